//! Normalized eigenvalue sequences `λ(p)` for genus-2 eigenforms of class G
//! (spin L-function of a GL(4) cusp form) and class Y (product of two GL(2)
//! L-functions).

pub mod angles;
pub mod delta;
pub mod newform;
mod spec;

pub use angles::{sample_angles, AngleDistribution, AngleStreamModel};
pub use delta::delta_qexp;
pub use newform::{load_newform, parse_newform, NewformFormat, NewformGL2, RamanujanViolation};
pub use spec::{
    check_distinct_sources, lambda_stream, lambda_stream_on, EigenformClass, EigenformSpec, Gl2Source, Gl4Source, LambdaStream,
    SourceConfig, SpecFile, DISTINCTNESS_PRIMES,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenformError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("missing coefficient at p = {0}")]
    MissingCoefficient(u64),
    #[error("p = {0} divides the level")]
    RamifiedPrime(u64),
    #[error("nterms must be in 1..={max}, got {0}", max = delta::MAX_DELTA_TERMS)]
    BadTermCount(usize),
    #[error("q-expansion coefficient overflowed 128 bits")]
    CoefficientOverflow,
    #[error("sources must be distinct: {0}")]
    SourcesNotDistinct(String),
    #[error("invalid eigenform spec: {0}")]
    InvalidSpec(String),
}
