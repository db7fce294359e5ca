//! Plain `key = value` config files, read as if their entries were flags.
//!
//! ```text
//! # table 1 at a different seed
//! algebra = tau
//! sizes = 31,63
//! timings = true
//! ```
//!
//! Each entry becomes `--key value` (`--key` alone for `true`, nothing for
//! `false`). The entries go in front of the command-line flags, so flags given
//! on the command line win.

/// Converts config text into flag arguments.
pub fn config_args(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`, got `{line}`", lineno + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(format!("line {}: bad key `{k}`", lineno + 1));
        }
        let k = k.replace('_', "-");
        match v {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => {
                out.push(format!("--{k}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

/// Splices the entries of `--config PATH` (if present) in after the program
/// name.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or("--config needs a path")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("reading {path}: {e}"))?;
    let extra = config_args(&text)?;
    let mut out = Vec::with_capacity(rest.len() + extra.len());
    let mut rest = rest.into_iter();
    out.extend(rest.next());
    out.extend(extra);
    out.extend(rest);
    Ok(out)
}
