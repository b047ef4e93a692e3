//! Run manifests: ordered `key=value` lines.
//!
//! Keys starting with `arg.` hold the command-line flags of the run, so a
//! manifest can be turned back into an invocation with [`Manifest::to_args`].
//! Backslashes and line breaks in values are escaped.

use std::fmt;
use std::path::Path;

use crate::error::CliError;

const ARG_PREFIX: &str = "arg.";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(value: &str) -> Result<String, CliError> {
    let mut out = String::with_capacity(value.len());
    let mut chars = value.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => return Err(CliError::Format(format!("bad escape in manifest value: \\{other:?}"))),
        }
    }
    Ok(out)
}

fn valid_key(key: &str) -> bool {
    !key.is_empty() && !key.contains(['=', '\n', '\r']) && key.trim() == key
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self::default();
        m.set("command", command);
        m
    }

    /// Sets `key`, replacing an earlier value in place.
    ///
    /// Panics on keys that cannot be serialised (empty, containing `=` or a
    /// line break, or with surrounding whitespace).
    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        assert!(valid_key(key), "invalid manifest key {key:?}");
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn set_arg(&mut self, flag: &str, value: impl fmt::Display) {
        self.set(&format!("{ARG_PREFIX}{flag}"), value);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut m = Self::default();
        for (n, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Format(format!("manifest line {} has no '='", n + 1)))?;
            if !valid_key(key) {
                return Err(CliError::Format(format!("manifest line {} has an invalid key", n + 1)));
            }
            if m.get(key).is_some() {
                return Err(CliError::Format(format!("duplicate manifest key {key:?}")));
            }
            m.entries.push((key.to_string(), unescape(value)?));
        }
        Ok(m)
    }

    /// Subcommand and flags that reproduce the run.
    pub fn to_args(&self) -> Vec<String> {
        let mut args = Vec::new();
        if let Some(cmd) = self.get("command") {
            args.push(cmd.to_string());
        }
        for (k, v) in &self.entries {
            if let Some(flag) = k.strip_prefix(ARG_PREFIX) {
                args.push(format!("--{flag}"));
                args.push(v.clone());
            }
        }
        args
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        crate::pnm::write(path, self.to_string().as_bytes())
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={}", escape(v))?;
        }
        Ok(())
    }
}
