//! Command outcomes and the files written for them.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::{Profile, Settings};

/// One named check of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    /// CSV text: a header line followed by rows.
    Csv(String),
    /// Binary field dump.
    Raw(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub body: Body,
}

impl OutputFile {
    pub fn csv(name: impl Into<String>, header: &str, rows: impl IntoIterator<Item = String>) -> Self {
        let mut text = String::from(header);
        text.push('\n');
        for row in rows {
            text.push_str(&row);
            text.push('\n');
        }
        Self {
            name: name.into(),
            body: Body::Csv(text),
        }
    }

    pub fn raw(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            body: Body::Raw(bytes),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<OutputFile>,
    pub assertions: Vec<Assertion>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn assert(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion::new(name, passed, detail));
    }

    pub fn csv(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.name == name).and_then(|f| match &f.body {
            Body::Csv(text) => Some(text.as_str()),
            Body::Raw(_) => None,
        })
    }
}

/// Identifies the producing run; deliberately free of timestamps so that
/// repeated runs give identical files.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub subcommand: String,
    pub profile: Profile,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(subcommand: &str, profile: Profile, seed: u64, settings: &Settings) -> Self {
        Self {
            subcommand: subcommand.into(),
            profile,
            seed,
            config_hash: settings.hash(),
        }
    }

    pub fn header(&self) -> String {
        format!(
            "# hessiancone {}\n# subcommand: {}\n# profile: {}\n# seed: {}\n# config_sha256: {}\n",
            env!("CARGO_PKG_VERSION"),
            self.subcommand,
            self.profile,
            self.seed,
            self.config_hash
        )
    }
}

pub const ASSERTIONS_CSV_HEADER: &str = "assertion,passed,detail";

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

pub fn assertions_file(outcome: &Outcome) -> OutputFile {
    OutputFile::csv(
        "assertions.csv",
        ASSERTIONS_CSV_HEADER,
        outcome
            .assertions
            .iter()
            .map(|a| format!("{},{},{}", csv_field(&a.name), a.passed, csv_field(&a.detail))),
    )
}

/// Writes every file of `outcome` plus `assertions.csv` into `dir`. CSV
/// files start with the provenance header; raw dumps keep their own binary
/// header. Returns the written paths.
pub fn write_outcome(dir: &Path, provenance: &Provenance, outcome: &Outcome) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let header = provenance.header();
    let mut written = Vec::new();
    for file in outcome.files.iter().chain(std::iter::once(&assertions_file(outcome))) {
        let path = dir.join(&file.name);
        let bytes = match &file.body {
            Body::Csv(text) => format!("{header}{text}").into_bytes(),
            Body::Raw(bytes) => bytes.clone(),
        };
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_has_no_volatile_fields() {
        let s = Settings::defaults(Profile::Fast);
        let p = Provenance::new("solve", Profile::Fast, 7, &s);
        let h = p.header();
        assert_eq!(h, Provenance::new("solve", Profile::Fast, 7, &s).header());
        assert!(h.contains("# seed: 7\n"));
        assert!(h.contains(&s.hash()));
        assert_eq!(h.lines().count(), 5);
    }

    #[test]
    fn assertion_details_are_quoted() {
        let mut o = Outcome::default();
        o.assert("a", true, "x=1, y=2");
        o.assert("b", false, "plain");
        let Body::Csv(text) = assertions_file(&o).body else { unreachable!() };
        assert_eq!(text, "assertion,passed,detail\na,true,\"x=1, y=2\"\nb,false,plain\n");
        assert!(!o.passed());
    }

    #[test]
    fn header_only_csv() {
        let f = OutputFile::csv("x.csv", "a,b", Vec::new());
        assert_eq!(f.body, Body::Csv("a,b\n".into()));
    }
}
