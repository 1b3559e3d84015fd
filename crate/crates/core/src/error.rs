use alloc::string::String;

/// Errors raised before any law is checked: malformed input, exceeded size
/// guards and unmet preconditions. Law violations are never errors; they are
/// reported as failed checks.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Dangling identifier, duplicate name, non-total table.
    #[error("input error: {0}")]
    Input(String),
    /// An exhaustive enumeration would exceed the named guard.
    #[error("guard `{guard}` exceeded: {detail}")]
    Guard { guard: &'static str, detail: String },
    /// The operation's precondition does not hold on this input.
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
