//! Column matching with scaling, and fill-reducing symmetric ordering.

mod amd;
mod mc64;

pub use amd::amd_order;
pub use mc64::{mc64_scale, MatchingResult};
