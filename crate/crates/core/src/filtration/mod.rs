//! Finite filtered probability spaces.

mod grid;
mod process;
pub mod projection;
mod stopping;
mod tree;
mod tsystem;

pub use grid::TimeGrid;
pub use process::{OptionalProcess, RawMeasure, RawProcess};
pub use projection::{
    conditional_expectation, cross_section, dual_optional_projection, evaluate_at_stopping_time,
    martingale, optional_projection,
};
pub use stopping::StoppingTime;
pub use tree::{EventTree, NodeGraph, NodeId, MAX_NODES};
pub use tsystem::{aggregate_tsystem, TSystem};
