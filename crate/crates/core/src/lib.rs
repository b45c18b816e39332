// negated comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ingestion;
pub mod model;
pub mod power;
pub mod transport;
pub mod industry;
pub mod bunkers;
pub mod residential;
pub mod assembly;
pub mod uncertainty;
pub mod pipeline;

pub use error::{Error, Result};
