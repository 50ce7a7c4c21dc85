pub mod error;
pub mod factor;
pub mod limit;
pub mod numeric;
pub mod prony;
pub mod report;
pub mod root;
pub mod scenario;
pub mod series;

pub use error::{Error, Result};
