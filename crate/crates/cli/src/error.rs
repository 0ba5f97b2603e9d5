//! Error-to-exit-code mapping: 0 success, 1 usage, 2 data, 3 internal.

use std::fmt;

use afpc_core::cache::CacheError;
use afpc_core::dsp::DspError;
use afpc_core::features::FeatureError;
use afpc_core::mask::MaskError;
use afpc_core::metrics::MetricError;
use afpc_core::neural::NeuralError;
use afpc_core::signal::SignalError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unparseable values, inconsistent options.
    Usage(String),
    /// Problems with the data being processed: I/O, malformed files,
    /// mismatched caches or dimensions.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Data(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

macro_rules! data_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Data(e.to_string())
            }
        })*
    };
}

data_from!(SignalError, DspError, FeatureError, MaskError, MetricError, NeuralError, CacheError);

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
