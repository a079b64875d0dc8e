// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Effective configuration: command-line values layered over an optional
//! `key = value` file, with per-subcommand defaults filled in last.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

/// Invalid flags or flag combinations; mapped to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

/// Keys never echoed into output headers: they cannot change output bytes.
const UNECHOED: &[&str] = &["workers", "config"];

#[derive(Debug, Clone)]
pub struct Config {
    subcommand: &'static str,
    values: BTreeMap<String, String>,
}

impl Config {
    /// `flags` wins over the file. Flags outside `allowed` are rejected;
    /// file keys outside it are ignored so one file can serve several
    /// subcommands.
    pub fn resolve(
        subcommand: &'static str,
        flags: Vec<(&'static str, Option<String>)>,
        file: Option<&Path>,
        allowed: &[&str],
    ) -> anyhow::Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = file {
            let text =
                fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
            for (key, value) in parse_config(&text)? {
                if allowed.contains(&key.as_str()) {
                    values.insert(key, value);
                }
            }
        }
        for (key, value) in flags {
            if let Some(v) = value {
                if !allowed.contains(&key) {
                    return usage(format!("--{key} is not accepted by `{subcommand}`"));
                }
                values.insert(key.to_string(), v);
            }
        }
        Ok(Config { subcommand, values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn get<T: FromStr>(&mut self, key: &str) -> anyhow::Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| UsageError(format!("invalid value {v:?} for --{key}: {e}")).into()),
        }
    }

    pub fn require<T: FromStr>(&mut self, key: &str) -> anyhow::Result<T>
    where
        T::Err: fmt::Display,
    {
        match self.get(key)? {
            Some(v) => Ok(v),
            None => usage(format!("`{}` requires --{key}", self.subcommand)),
        }
    }

    /// Looks up `key`, recording `default` as its effective value when unset.
    pub fn or<T: FromStr + ToString>(&mut self, key: &str, default: T) -> anyhow::Result<T>
    where
        T::Err: fmt::Display,
    {
        if !self.values.contains_key(key) {
            self.values.insert(key.to_string(), default.to_string());
        }
        self.require(key)
    }

    pub fn list<T: FromStr>(&mut self, key: &str) -> anyhow::Result<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        let Some(raw) = self.values.get(key) else {
            return usage(format!("`{}` requires --{key}", self.subcommand));
        };
        let items = raw
            .split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|e| UsageError(format!("invalid value {x:?} in --{key}: {e}")).into())
            })
            .collect::<anyhow::Result<Vec<T>>>()?;
        if items.is_empty() {
            return usage(format!("--{key} is empty"));
        }
        Ok(items)
    }

    /// Drops a value that does not describe the run.
    pub fn unset(&mut self, key: &str) {
        self.values.remove(key);
    }

    pub fn flag(&self, key: &str) -> bool {
        self.raw(key) == Some("true")
    }

    /// `# key=value` lines describing the run.
    pub fn header(&self) -> String {
        let mut out = format!("# hsbm {}\n", self.subcommand);
        for (k, v) in &self.values {
            if !UNECHOED.contains(&k.as_str()) {
                out.push_str(&format!("# {k}={v}\n"));
            }
        }
        out
    }
}

/// Lines of `key = value`; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> anyhow::Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key = value", i + 1));
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return usage(format!("config line {}: empty key", i + 1));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_skips_comments() {
        let kv = parse_config("# c\n\nn = 12\nground_truth=a b\n").unwrap();
        assert_eq!(
            kv,
            vec![("n".into(), "12".into()), ("ground-truth".into(), "a b".into())]
        );
        assert!(parse_config("n 12").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        fs::write(&path, "n = 12\nk = 3\ntrace = x\n").unwrap();
        let mut c = Config::resolve("t", vec![("n", Some("30".into()))], Some(&path), &["n", "k"]).unwrap();
        assert_eq!(c.require::<usize>("n").unwrap(), 30);
        assert_eq!(c.require::<usize>("k").unwrap(), 3);
        assert!(!c.has("trace"));
        assert_eq!(c.or("d", 3usize).unwrap(), 3);
        assert_eq!(c.header(), "# hsbm t\n# d=3\n# k=3\n# n=30\n");
    }

    #[test]
    fn foreign_flag_is_usage_error() {
        let err = Config::resolve("t", vec![("trace", Some("x".into()))], None, &["n"]).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }
}
