//! Error type shared by every module.
//!
//! Three error classes cover everything this crate can refuse to do:
//! domain errors (arguments outside an operation's contract), resource
//! errors (a computation would exceed a configured budget or overflow
//! fixed-width integers), and numerical-consistency errors (a floating
//! computation failed an internal cross-check). The CLI maps them to
//! distinct exit codes.

use std::fmt;

/// Error returned by fallible operations in this crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Arguments violate an operation's documented domain.
    Domain(String),
    /// A budget (node count, table size, enumeration cap) would be exceeded,
    /// or exact integer arithmetic would overflow its fixed width.
    Resource(String),
    /// A floating-point result failed an internal consistency check.
    Numerical(String),
}

impl Error {
    /// Process exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Domain(_) => 2,
            Error::Resource(_) => 3,
            Error::Numerical(_) => 4,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// The same error with `ctx` prefixed to its message. Keeps the
    /// class (and exit code), unlike re-wrapping the rendered message,
    /// which would also duplicate the class label.
    pub(crate) fn with_context(self, ctx: impl fmt::Display) -> Self {
        match self {
            Error::Domain(msg) => Error::Domain(format!("{ctx}: {msg}")),
            Error::Resource(msg) => Error::Resource(format!("{ctx}: {msg}")),
            Error::Numerical(msg) => Error::Numerical(format!("{ctx}: {msg}")),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Resource(msg) => write!(f, "resource error: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical consistency error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
