use std::fmt::{Debug, Display};

use serde_json::json;

/// Failure reported as `{"error": {"code", "message"}}` on stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub message: String,
    pub exit: i32,
}

impl CliError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.to_string(),
            message: message.into(),
            exit: 2,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new("UsageError", message)
    }

    pub fn to_json(&self) -> String {
        json!({"error": {"code": self.code, "message": self.message}}).to_string()
    }
}

/// Variant name of an error enum, looking through transparent wrappers.
fn variant_code<E: Debug>(e: &E) -> String {
    let text = format!("{e:?}");
    let mut rest = text.as_str();
    loop {
        let end = rest
            .find(|c: char| !c.is_alphanumeric() && c != '_')
            .unwrap_or(rest.len());
        let name = &rest[..end];
        let wrapper = matches!(name, "Metric" | "Graph" | "Quadrature" | "Box");
        if wrapper && rest[end..].starts_with('(') {
            rest = &rest[end + 1..];
            continue;
        }
        return match name {
            "ParameterDomain" | "InvalidParams" | "AlphaBelowOne" | "ThetaOutOfRange" => {
                "DomainError".to_string()
            }
            "" => "Error".to_string(),
            other => other.to_string(),
        };
    }
}

macro_rules! domain_errors {
    ($($t:ty),* $(,)?) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::new(&variant_code(&e), e.to_string())
            }
        })*
    };
}

domain_errors!(
    mdrlab::jl::JlError,
    mdrlab::metric::MetricError,
    mdrlab::sdp::SdpError,
    mdrlab::spectral::SpectralError,
    mdrlab::matousek::MatousekError,
    mdrlab::graph::GraphError,
    mdrlab::verify::VerifyError,
);

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("IoError", e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new("InvalidJson", e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new("IoError", e.to_string())
    }
}

pub fn with_context<T, E: Into<CliError>>(r: Result<T, E>, what: impl Display) -> Result<T, CliError> {
    r.map_err(|e| {
        let mut e = e.into();
        e.message = format!("{what}: {}", e.message);
        e
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mdrlab::jl::JlError;
    use mdrlab::metric::MetricError;
    use mdrlab::spectral::SpectralError;

    #[test]
    fn codes_strip_wrappers() {
        assert_eq!(variant_code(&JlError::ParameterDomain("x".into())), "DomainError");
        let wrapped = SpectralError::Metric(MetricError::TooFewPoints { need: 2, got: 1 });
        assert_eq!(variant_code(&wrapped), "TooFewPoints");
        assert_eq!(variant_code(&SpectralError::Disconnected), "Disconnected");
    }
}
