//! File formats, benchmarking and the `mfusion` command line on top of `mfusion-core`.

pub mod bench;
pub mod cli;
pub mod pnm;
pub mod table;

pub use pnm::PnmError;
