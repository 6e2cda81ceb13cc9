use thiserror::Error;

use crate::scheduler::DeviceId;

/// Validation and domain errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{field} out of range {range}: {value}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("{0}")]
    Domain(&'static str),
    #[error("duplicate receiver id {0}")]
    DuplicateId(DeviceId),
    #[error("uniform initial capacities require a seed")]
    MissingSeed,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_range<T: crate::Scalar>(
    field: &'static str,
    value: T,
    ok: bool,
    range: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            field,
            value: value.as_f64(),
            range,
        })
    }
}
