//! The cross-docking order-picking model: orders of five types arrive,
//! optionally pass a buffer station, and are picked at one of several picking
//! points staffed by an automated dispenser, skilled and unskilled operatives.

pub mod config;
pub mod engine;
pub mod ledger;

pub use config::{
    default_buffer_delay, ClassRates, FailureSpec, ModelConfig, ModelVariant, OrderType, ResourceClass,
    Staffing, DEFAULT_ORDER_MIX, DEFAULT_REPLICATION_LENGTH,
};
pub use engine::{CrossdockModel, Order, ReplicationResult};
pub use ledger::{usage_cost, UsageLedger};
