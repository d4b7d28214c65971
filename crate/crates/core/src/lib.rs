//! Pre-transformed polar codes: construction, minimum-weight enumeration,
//! row-merge design, and fast successive-cancellation list decoding.

pub mod bits;
pub mod error;
pub mod polar;
pub mod pretransform;
pub mod weight_enum;
pub mod design;
pub mod decoder;
pub mod sim;
pub mod experiment;

pub use bits::BitVector;
pub use error::{Error, Result};
pub use polar::RateProfile;
pub use pretransform::{PolarCode, PreTransform, RowMergeSet};
