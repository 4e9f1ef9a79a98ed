use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub code: String,
    pub severity: Severity,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reactions: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub species: Vec<String>,
}

impl Finding {
    pub fn error(code: &str, message: impl Into<String>) -> Self {
        Finding {
            code: code.to_string(),
            severity: Severity::Error,
            message: message.into(),
            reactions: Vec::new(),
            species: Vec::new(),
        }
    }

    pub fn warning(code: &str, message: impl Into<String>) -> Self {
        Finding { severity: Severity::Warning, ..Finding::error(code, message) }
    }

    pub fn info(code: &str, message: impl Into<String>) -> Self {
        Finding { severity: Severity::Info, ..Finding::error(code, message) }
    }

    pub fn with_reactions<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.reactions.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn with_species<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.species.extend(ids.into_iter().map(Into::into));
        self
    }
}

/// A list of findings. `passed` is kept in sync with the findings: it is
/// false exactly when some finding has error severity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    passed: bool,
    findings: Vec<Finding>,
}

impl Default for ValidationReport {
    fn default() -> Self {
        ValidationReport { passed: true, findings: Vec::new() }
    }
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn passed(&self) -> bool {
        self.passed
    }

    pub fn findings(&self) -> &[Finding] {
        &self.findings
    }

    pub fn push(&mut self, finding: Finding) {
        if finding.severity == Severity::Error {
            self.passed = false;
        }
        self.findings.push(finding);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        for f in other.findings {
            self.push(f);
        }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", if self.passed { "PASSED" } else { "FAILED" })?;
        for finding in &self.findings {
            let sev = match finding.severity {
                Severity::Info => "info",
                Severity::Warning => "warning",
                Severity::Error => "error",
            };
            write!(f, "  [{sev}] {}: {}", finding.code, finding.message)?;
            if !finding.reactions.is_empty() {
                write!(f, " (reactions: {})", finding.reactions.join(", "))?;
            }
            if !finding.species.is_empty() {
                write!(f, " (species: {})", finding.species.join(", "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
