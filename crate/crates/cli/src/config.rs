//! Flat `key=value` config files, spliced into the argument list ahead of
//! the command-line flags so that flags win.

use std::fs;

#[derive(Debug)]
pub struct ConfigError(pub String);

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Parses config text into `--key value` pairs. Blank lines and lines
/// starting with `#` are skipped; `key=true` becomes a bare `--key`.
pub fn config_flags(text: &str) -> Result<Vec<String>, ConfigError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("config line {}: expected key=value", i + 1)))?;
        let (k, v) = (k.trim().replace('_', "-"), v.trim());
        if k.is_empty() || k == "config" {
            return Err(ConfigError(format!("config line {}: bad key '{k}'", i + 1)));
        }
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

/// `argv` with the config file's flags inserted after the subcommand.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, ConfigError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| ConfigError(format!("cannot read config {path}: {e}")))?;
    let flags = config_flags(&text)?;
    if args.len() < 2 {
        return Ok(args);
    }
    let mut out = args[..2].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}
