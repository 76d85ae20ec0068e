pub mod array;
pub mod config;
pub mod directivity;
pub mod error;
pub mod io;
pub mod ism;
pub mod kernel;
pub mod oracle;
pub mod pipeline;
mod quadrature;
pub mod series;
pub mod sh;

pub use error::{Error, Result};
pub use series::ShTimeSeries;
