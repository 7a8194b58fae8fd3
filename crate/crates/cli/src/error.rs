use std::fmt;
use std::path::PathBuf;

use serde_json::{json, Value};
use spopo_core::{ErrorKind, SpopoError};

#[derive(Debug)]
pub enum CliError {
    Config {
        code: &'static str,
        field: Option<String>,
        message: String,
    },
    Core(SpopoError),
    Output {
        path: PathBuf,
        message: String,
    },
}

impl CliError {
    pub(crate) fn from_serde(err: serde_path_to_error::Error<serde_json::Error>) -> Self {
        let path = err.path().to_string();
        let inner = err.into_inner();
        let message = inner.to_string();
        let named = message
            .strip_prefix("missing field `")
            .or_else(|| message.strip_prefix("unknown field `"))
            .and_then(|rest| rest.split('`').next());
        let field = match (named, path.as_str()) {
            (Some(name), ".") => Some(name.to_string()),
            (Some(name), p) if message.starts_with("missing") => Some(format!("{p}.{name}")),
            (_, ".") => None,
            (_, p) => Some(p.to_string()),
        };
        let code = if message.starts_with("missing field") {
            "missing_field"
        } else if message.starts_with("unknown field") {
            "unknown_field"
        } else if inner.is_syntax() || inner.is_eof() {
            "config_syntax"
        } else {
            "config_schema"
        };
        CliError::Config { code, field, message }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config { code, .. } => code,
            CliError::Core(e) => e.code(),
            CliError::Output { .. } => "output_io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Physics => 3,
                ErrorKind::Numerical => 4,
            },
            CliError::Output { .. } => 1,
        }
    }

    /// Machine-readable error object written to stderr.
    pub fn to_json(&self) -> Value {
        let mut obj = json!({
            "code": self.code(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        let field = match self {
            CliError::Config { field, .. } => field.clone(),
            CliError::Core(SpopoError::InvalidParameter { name, .. }) => Some(name.to_string()),
            _ => None,
        };
        if let Some(f) = field {
            obj["field"] = Value::String(f);
        }
        json!({ "error": obj })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { message, field: Some(field), .. } => write!(f, "{field}: {message}"),
            CliError::Config { message, .. } => f.write_str(message),
            CliError::Core(e) => e.fmt(f),
            CliError::Output { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<SpopoError> for CliError {
    fn from(e: SpopoError) -> Self {
        CliError::Core(e)
    }
}
