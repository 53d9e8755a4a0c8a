use std::path::Path;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Validation,
    Resource,
    Numerical,
    Io,
    Internal,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Validation => 2,
            Kind::Resource => 3,
            Kind::Numerical => 4,
            Kind::Io | Kind::Internal => 1,
        }
    }
}

/// A failure reported as one JSON object on standard error.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub error: Kind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl CliError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            error: Kind::Validation,
            field: Some(field.into()),
            message: message.into(),
            details: None,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            error: Kind::Io,
            field: None,
            message: format!("{}: {err}", path.display()),
            details: None,
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            error: Kind::Internal,
            field: None,
            message: message.into(),
            details: None,
        }
    }

    /// Attaches the config field the error stems from, if not already set.
    pub fn in_field(mut self, field: &str) -> Self {
        self.field.get_or_insert_with(|| field.to_string());
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.error.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}

impl From<igac::Error> for CliError {
    fn from(e: igac::Error) -> Self {
        use igac::Error as E;
        let message = e.to_string();
        let (kind, field, details) = match &e {
            E::Domain { param, value, domain } => (
                Kind::Validation,
                Some(param.clone()),
                Some(serde_json::json!({ "value": value, "domain": domain })),
            ),
            E::Shape { .. }
            | E::UnsupportedFamily(_)
            | E::InsufficientData { .. }
            | E::Inapplicable(_)
            | E::Validation(_) => (Kind::Validation, None, None),
            E::Resource { what, requested, max } => (
                Kind::Resource,
                Some(what.clone()),
                Some(serde_json::json!({ "requested": requested, "max": max })),
            ),
            E::Singularity { tau, state } => (
                Kind::Numerical,
                None,
                Some(serde_json::json!({ "tau": tau, "last_state": state })),
            ),
            E::Accuracy { .. }
            | E::SingularMetric { .. }
            | E::InconsistentCurvature { .. }
            | E::IllConditioned { .. } => (Kind::Numerical, None, None),
        };
        Self {
            error: kind,
            field,
            message,
            details,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_classes() {
        let e: CliError = igac::Error::Resource {
            what: "spins".into(),
            requested: 20,
            max: 14,
        }
        .into();
        assert_eq!(e.exit_code(), 3);
        let e: CliError = igac::Error::Singularity {
            tau: 1.0,
            state: vec![],
        }
        .into();
        assert_eq!(e.exit_code(), 4);
        assert_eq!(CliError::validation("grid", "bad").exit_code(), 2);
        let json: Value = serde_json::from_str(&CliError::validation("grid", "bad").to_json()).unwrap();
        assert_eq!(json["field"], "grid");
        assert_eq!(json["error"], "validation");
    }
}
