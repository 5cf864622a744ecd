use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Grammar or range rule a label string violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseRule {
    Empty,
    Subnet,
    BitCharacter,
    LeadingOne,
    MissingIndex,
    MissingDot,
    IndexDigits,
    IndexZero,
    IndexLeadingZero,
    IndexOverflow,
    IndexRange,
    TooManyBits,
    VertexId,
}

impl fmt::Display for ParseRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseRule::Empty => "label is empty",
            ParseRule::Subnet => "subnet digit must be 1, 2 or 3",
            ParseRule::BitCharacter => "bit string may only contain 0 and 1",
            ParseRule::LeadingOne => "first bit must be 0 (hubs have no father)",
            ParseRule::MissingIndex => "non-hub label needs a position index after the dot",
            ParseRule::MissingDot => "bit string must be followed by '.' and an index",
            ParseRule::IndexDigits => "index must be a positive decimal integer",
            ParseRule::IndexZero => "index starts at 1",
            ParseRule::IndexLeadingZero => "index may not have leading zeros",
            ParseRule::IndexOverflow => "index does not fit in 64 bits",
            ParseRule::IndexRange => "index exceeds the group size for this bit string",
            ParseRule::TooManyBits => "bit string longer than 63 steps",
            ParseRule::VertexId => "vertex id after '#' must be a decimal integer",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("size cap exceeded: {requested} vertices requested, cap is {cap}")]
    SizeCap { requested: u128, cap: u64 },

    #[error("cannot parse {text:?}: {rule}")]
    Parse { text: String, rule: ParseRule },

    #[error("lookup failed: {0}")]
    Lookup(String),

    /// An operation was applied outside the set of labels it is defined on.
    #[error("{op}: {reason}")]
    Domain { op: &'static str, reason: String },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(text: &str, rule: ParseRule) -> Self {
        Error::Parse {
            text: text.to_owned(),
            rule,
        }
    }

    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }
}
