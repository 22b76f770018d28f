pub mod buffer;
pub mod cli;
pub mod color;
pub mod error;
pub mod eval;
pub mod grad;
pub mod io;
pub mod metric;
pub mod projections;
pub mod pyramid;
pub mod swd;
