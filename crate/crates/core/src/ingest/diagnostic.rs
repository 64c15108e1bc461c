use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Io,
    /// Malformed JSON, unknown, missing or mistyped fields.
    Schema,
    /// A bus, curve or device id that does not resolve.
    Reference,
    /// Well-formed data breaking a model invariant.
    Validation,
}

/// One finding, located by document path such as `ibrs[12].s_rated_kva`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(kind: DiagnosticKind, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            kind,
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn warning(kind: DiagnosticKind, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            kind,
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let kind = match self.kind {
            DiagnosticKind::Io => "io",
            DiagnosticKind::Schema => "schema",
            DiagnosticKind::Reference => "reference",
            DiagnosticKind::Validation => "validation",
        };
        if self.path.is_empty() {
            write!(f, "{sev} [{kind}]: {}", self.message)
        } else {
            write!(f, "{sev} [{kind}] {}: {}", self.path, self.message)
        }
    }
}

/// The complete set of findings that stopped a load.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| d.is_error())
    }

    pub fn has_errors(&self) -> bool {
        self.0.iter().any(Diagnostic::is_error)
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, d) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

/// A value (if construction succeeded) plus everything noticed on the way.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: Option<T>,
    pub diagnostics: Vec<Diagnostic>,
}

impl<T> Parsed<T> {
    pub fn into_result(self) -> Result<(T, Vec<Diagnostic>), Diagnostics> {
        match self.value {
            Some(v) if !self.diagnostics.iter().any(Diagnostic::is_error) => Ok((v, self.diagnostics)),
            _ => Err(Diagnostics(self.diagnostics)),
        }
    }
}

/// Collects diagnostics while walking a document.
#[derive(Debug, Default)]
pub(crate) struct Collector {
    pub items: Vec<Diagnostic>,
}

impl Collector {
    pub fn error(&mut self, kind: DiagnosticKind, path: impl Into<String>, message: impl Into<String>) {
        self.items.push(Diagnostic::error(kind, path, message));
    }

    pub fn warning(&mut self, kind: DiagnosticKind, path: impl Into<String>, message: impl Into<String>) {
        self.items.push(Diagnostic::warning(kind, path, message));
    }

    pub fn has_errors(&self) -> bool {
        self.items.iter().any(Diagnostic::is_error)
    }

    /// Deserialize `value` as `T`, recording a schema error located under
    /// `prefix` on failure.
    pub fn deserialize<T: serde::de::DeserializeOwned>(&mut self, prefix: &str, value: serde_json::Value) -> Option<T> {
        match serde_path_to_error::deserialize::<_, T>(value) {
            Ok(v) => Some(v),
            Err(e) => {
                let inner = e.path().to_string();
                let path = join_path(prefix, &inner);
                self.error(DiagnosticKind::Schema, path, e.into_inner().to_string());
                None
            }
        }
    }

    /// Record a validation error unless `ok`.
    pub fn check(&mut self, ok: bool, path: impl Into<String>, message: impl Into<String>) {
        if !ok {
            self.error(DiagnosticKind::Validation, path, message);
        }
    }

    /// Every number in `value` must be finite (JSON cannot carry NaN, but
    /// overflowing literals parse to infinity).
    pub fn check_finite(&mut self, prefix: &str, value: &serde_json::Value) {
        match value {
            serde_json::Value::Number(n) => {
                if n.as_f64().is_some_and(|x| !x.is_finite()) {
                    self.error(DiagnosticKind::Validation, prefix, "number is not finite");
                }
            }
            serde_json::Value::Array(items) => {
                for (k, v) in items.iter().enumerate() {
                    self.check_finite(&format!("{prefix}[{k}]"), v);
                }
            }
            serde_json::Value::Object(map) => {
                for (k, v) in map {
                    self.check_finite(&join_path(prefix, k), v);
                }
            }
            _ => {}
        }
    }
}

pub(crate) fn join_path(prefix: &str, inner: &str) -> String {
    match (prefix.is_empty(), inner.is_empty() || inner == ".") {
        (true, _) => inner.to_string(),
        (false, true) => prefix.to_string(),
        (false, false) if inner.starts_with('[') => format!("{prefix}{inner}"),
        (false, false) => format!("{prefix}.{inner}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_join() {
        assert_eq!(join_path("ibrs[3]", "s_rated_kva"), "ibrs[3].s_rated_kva");
        assert_eq!(join_path("ibrs[3]", "."), "ibrs[3]");
        assert_eq!(join_path("lines[0]", "[1]"), "lines[0][1]");
        assert_eq!(join_path("", "buses"), "buses");
    }

    #[test]
    fn display_includes_path() {
        let d = Diagnostic::error(DiagnosticKind::Reference, "ibrs[0].bus", "unknown bus \"999\"");
        assert_eq!(d.to_string(), "error [reference] ibrs[0].bus: unknown bus \"999\"");
    }
}
