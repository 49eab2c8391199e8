pub mod cusum;
pub mod error;
pub mod exec;
pub mod generators;
pub mod limit;
pub mod linalg;
pub mod longrun;
pub mod panel;
pub mod rng;
pub mod segment;
pub mod study;
pub mod transforms;

pub use error::{Error, Result};
pub use exec::Exec;
pub use panel::TimeSeriesPanel;
