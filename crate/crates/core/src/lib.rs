//! Discrete-event simulation of a crossdock order-picking process, with a
//! replication harness that runs fixed-count or sequential experiments on
//! Total Usage Cost.

pub mod error;
pub mod experiment;
pub mod model;
pub mod sim;
pub mod stats;
pub mod streams;

pub use error::{ConfigError, Error, Result, SimError, StatsError};
