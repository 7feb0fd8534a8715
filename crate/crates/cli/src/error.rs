use serde_json::json;

/// Everything that can stop an experiment, one exit code per variant family.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    UnknownKind(String),
    Schema { field: Option<String>, message: String },
    Module(cubesample::Error),
    Io { path: Option<String>, message: String },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema { field: Some(field.into()), message: message.into() }
    }

    pub fn io(path: Option<&std::path::Path>, err: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.map(|p| p.display().to_string()), message: err.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::UnknownKind(_) => "unknown-kind",
            CliError::Schema { .. } => "schema",
            CliError::Module(cubesample::Error::Parse(_)) => "schema",
            CliError::Module(e) => e.kind(),
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> u8 {
        use cubesample::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Schema { .. } | CliError::Module(E::Parse(_)) => 3,
            CliError::Module(E::Dimension(_)) => 4,
            CliError::Module(E::Budget(_)) => 5,
            CliError::Module(E::Capability(_)) => 6,
            CliError::Module(E::Precondition(_)) => 7,
            CliError::Module(E::Monotonicity { .. }) => 8,
            CliError::Module(E::Invariant(_)) => 9,
            CliError::Io { .. } => 10,
            CliError::UnknownKind(_) => 11,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Schema { message: m, .. } | CliError::Io { message: m, .. } => m.clone(),
            CliError::UnknownKind(k) => format!("unknown experiment kind {k:?}"),
            CliError::Module(e) => e.to_string(),
        }
    }

    /// The single-line JSON document written to stderr on failure.
    pub fn record(&self) -> serde_json::Value {
        let mut err = json!({ "kind": self.kind(), "code": self.exit_code(), "message": self.message() });
        match self {
            CliError::Schema { field: Some(f), .. } => err["field"] = json!(f),
            CliError::Io { path: Some(p), .. } => err["path"] = json!(p),
            CliError::UnknownKind(_) => err["field"] = json!("kind"),
            _ => {}
        }
        json!({ "error": err })
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Schema { field: Some(field), message } => write!(f, "schema error at {field}: {message}"),
            _ => write!(f, "{} error: {}", self.kind(), self.message()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cubesample::Error> for CliError {
    fn from(e: cubesample::Error) -> Self {
        CliError::Module(e)
    }
}
