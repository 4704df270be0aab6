//! Error type shared by all core modules.

use alloc::string::String;
use core::fmt;

/// Errors raised by geometry, sampling and decomposition operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A site, column or sub-box falls outside the region it must lie in.
    OutsideRegion(String),
    /// An operation received an empty set where a nonempty one is required.
    EmptySet(&'static str),
    /// A probability parameter is outside `[0, 1]`.
    InvalidProbability,
    /// A numeric parameter is out of its documented domain.
    InvalidParameter(String),
    /// Box coordinates would overflow the coordinate type.
    RangeOverflow,
    /// Exhaustive enumeration was requested for more sites than the cap allows.
    EnumerationCap { sites: u32, cap: u32 },
    /// A path does not satisfy the crossing shape an operation requires.
    NotACrossing(String),
    /// A path is not strongly self-avoiding where that is required.
    NotStronglySelfAvoiding,
    /// A surgery precondition failed; the message names the violated clause.
    SurgeryPrecondition(String),
    /// Ribbon/region inputs do not have the geometry an operation assumes.
    DegenerateGeometry(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::OutsideRegion(what) => write!(f, "outside region: {what}"),
            Error::EmptySet(what) => write!(f, "empty set: {what}"),
            Error::InvalidProbability => write!(f, "probability must lie in [0, 1]"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::RangeOverflow => write!(f, "box coordinates overflow"),
            Error::EnumerationCap { sites, cap } => write!(
                f,
                "enumeration over {sites} sites exceeds the cap of {cap} sites"
            ),
            Error::NotACrossing(what) => write!(f, "not a crossing: {what}"),
            Error::NotStronglySelfAvoiding => write!(f, "path is not strongly self-avoiding"),
            Error::SurgeryPrecondition(clause) => {
                write!(f, "surgery precondition failed: {clause}")
            }
            Error::DegenerateGeometry(what) => write!(f, "degenerate geometry: {what}"),
        }
    }
}

impl core::error::Error for Error {}
