mod common;

use std::f64::consts::PI;

use common::*;
use nalgebra::DMatrix;
use structmg_core::operators::min_eig_formula_tau_1d;
use structmg_core::symbols::{laplacian_symbol, projector_symbol};
use structmg_core::{Algebra, CosinePoly, GridShape, LevelOperator, SymbolMode, SymbolND};

const ALGEBRAS: [Algebra; 3] = [Algebra::Tau, Algebra::Circulant, Algebra::Dct3];

fn dense(op: &LevelOperator) -> DMatrix<f64> {
    to_na(&op.materialize_dense().unwrap())
}

#[test]
fn structured_part_matches_transform_definition() {
    for algebra in ALGEBRAS {
        for q in 1..=3 {
            let sym = laplacian_symbol(1, q).unwrap();
            for n in 4..=12 {
                let op = LevelOperator::assemble_structured(algebra, GridShape::new_1d(n).unwrap(), &sym).unwrap();
                let oracle = algebra_matrix(algebra, n, &sym.factors()[0]);
                assert!(rel_err(&dense(&op), &oracle) < 1e-12, "{algebra:?} q={q} n={n}");
            }
        }
    }
}

#[test]
fn two_level_symbols_match_kronecker_forms() {
    let f1 = CosinePoly::new(vec![3.0, -1.0, 0.25]).unwrap();
    let f2 = CosinePoly::new(vec![2.0, 0.5]).unwrap();
    for algebra in ALGEBRAS {
        for mode in [SymbolMode::Sum, SymbolMode::Product] {
            let sym = SymbolND::new(mode, vec![f1.clone(), f2.clone()]).unwrap();
            let (n1, n2) = if algebra == Algebra::Tau { (7, 5) } else { (8, 6) };
            let shape = GridShape::new_2d(n1, n2).unwrap();
            let op = LevelOperator::assemble_structured(algebra, shape, &sym).unwrap();
            let oracle = symbol_matrix(algebra, shape, &sym);
            assert!(rel_err(&dense(&op), &oracle) < 1e-12, "{algebra:?} {mode:?}");
        }
    }
}

#[test]
fn laplacian_first_rows() {
    let sym = laplacian_symbol(1, 1).unwrap();
    let shape = GridShape::new_1d(4).unwrap();
    let row = |a| dense(&LevelOperator::assemble_structured(a, shape, &sym).unwrap()).row(0).iter().copied().collect::<Vec<_>>();
    assert_eq!(row(Algebra::Circulant), [2.0, -1.0, 0.0, -1.0]);
    assert_eq!(row(Algebra::Dct3), [1.0, -1.0, 0.0, 0.0]);
    let tau5 = LevelOperator::assemble_structured(Algebra::Tau, GridShape::new_1d(5).unwrap(), &sym).unwrap();
    assert_eq!(dense(&tau5), laplacian(5));
}

#[test]
fn strang_term_on_periodic_laplacian() {
    let sym = laplacian_symbol(1, 1).unwrap();
    let shape = GridShape::new_1d(4).unwrap();
    let base = LevelOperator::assemble_structured(Algebra::Circulant, shape, &sym).unwrap();
    let with = base.clone().with_strang(&sym).unwrap();
    let f = 2.0 - 2.0 * (PI / 2.0).cos();
    let oracle = dense(&base) + DMatrix::from_element(4, 4, f / 4.0);
    assert!(rel_err(&dense(&with), &oracle) < 1e-14);
    // The Strang term lifts the zero eigenvalue to f(2π/N) and leaves the rest.
    let ev = eigenvalues(&dense(&with));
    assert!((ev[0] - f).abs() < 1e-12 || (ev[1] - f).abs() < 1e-12);
    assert!(ev[0] > 0.5);
}

#[test]
fn tau_smallest_eigenvalue_formula() {
    assert!((min_eig_formula_tau_1d(1) - 2.0).abs() < 1e-15);
    let ev3 = eigenvalues(&laplacian(3));
    assert!((min_eig_formula_tau_1d(3) - ev3[0]).abs() < 1e-14);
    assert!((ev3[0] - (2.0 - 2f64.sqrt())).abs() < 1e-14);
    let ev31 = eigenvalues(&laplacian(31));
    assert!((min_eig_formula_tau_1d(31) - ev31[0]).abs() < 1e-12);
}

#[test]
fn symbol_expansions_match_pointwise_powers() {
    // (2 − 2cos t)² and (2 + 2cos t)² checked against direct evaluation.
    let f2 = laplacian_symbol(1, 2).unwrap();
    assert_eq!(f2.factors()[0].coeffs(), [6.0, -4.0, 1.0]);
    let p2 = projector_symbol(1, 2).unwrap();
    assert_eq!(p2.factors()[0].coeffs(), [6.0, 4.0, 1.0]);
    for k in 0..100 {
        let t = 2.0 * PI * k as f64 / 100.0;
        assert!((f2.eval(&[t]) - (2.0 - 2.0 * t.cos()).powi(2)).abs() < 1e-12);
        assert!((p2.eval(&[t]) - (2.0 + 2.0 * t.cos()).powi(2)).abs() < 1e-12);
    }
    let p = projector_symbol(2, 1).unwrap();
    assert_eq!(p.mode(), SymbolMode::Product);
    assert!((p.eval(&[0.3, 1.1]) - (2.0 + 2.0 * 0.3f64.cos()) * (2.0 + 2.0 * 1.1f64.cos())).abs() < 1e-12);
}

#[test]
fn prolongation_matches_definition() {
    let psym = |d, w| projector_symbol(d, w).unwrap();
    for algebra in ALGEBRAS {
        for w in 1..=3 {
            for n in [15usize, 16, 31, 32] {
                if (algebra == Algebra::Tau) != (n % 2 == 1) {
                    continue;
                }
                let shape = GridShape::new_1d(n).unwrap();
                let p = structmg_core::Prolongation::new(algebra, shape, &psym(1, w)).unwrap();
                let got = to_na(&p.to_dense().unwrap());
                assert!(rel_err(&got, &prolongation(algebra, shape, &psym(1, w))) < 1e-13, "{algebra:?} w={w} n={n}");
            }
        }
        let n = if algebra == Algebra::Tau { 7 } else { 8 };
        let shape = GridShape::new_2d(n, n).unwrap();
        let p = structmg_core::Prolongation::new(algebra, shape, &psym(2, 1)).unwrap();
        assert!(rel_err(&to_na(&p.to_dense().unwrap()), &prolongation(algebra, shape, &psym(2, 1))) < 1e-13);
    }
}

#[test]
fn tau_prolongation_columns_and_rank() {
    let shape = GridShape::new_1d(7).unwrap();
    let p = structmg_core::Prolongation::new(Algebra::Tau, shape, &projector_symbol(1, 1).unwrap()).unwrap();
    let d = to_na(&p.to_dense().unwrap());
    assert_eq!(d.shape(), (7, 3));
    let s = 1.0 / 2f64.sqrt();
    for j in 0..3 {
        for i in 0..7 {
            let want = match i as isize - (2 * j + 1) as isize {
                0 => 2.0 * s,
                -1 | 1 => s,
                _ => 0.0,
            };
            assert!((d[(i, j)] - want).abs() < 1e-15);
        }
    }
    assert_eq!(d.rank(1e-10), 3);
}
