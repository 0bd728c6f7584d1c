//! Error classification and one-line JSON diagnostics.

use serde::Serialize;
use skillprice_core::Error;

/// An error as reported to users: stable code, message, exit status.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub suggestions: Vec<String>,
    #[serde(skip)]
    pub validation: bool,
}

impl Failure {
    pub fn validation(code: &str, message: impl Into<String>) -> Self {
        Self { code: code.into(), message: message.into(), suggestions: Vec::new(), validation: true }
    }

    pub fn internal(code: &str, message: impl Into<String>) -> Self {
        Self { code: code.into(), message: message.into(), suggestions: Vec::new(), validation: false }
    }

    pub fn exit_code(&self) -> i32 {
        if self.validation {
            1
        } else {
            2
        }
    }

    /// `{"level":"error","code":..,"message":..}` on one line.
    pub fn diagnostic(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            level: &'static str,
            #[serde(flatten)]
            failure: &'a Failure,
        }
        serde_json::to_string(&Line { level: "error", failure: self }).expect("plain strings serialize")
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let suggestions = match &e {
            Error::UnknownSlug { suggestions, .. } => suggestions.clone(),
            _ => Vec::new(),
        };
        Self {
            code: e.code().into(),
            message: e.to_string(),
            suggestions,
            validation: e.is_validation(),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;
