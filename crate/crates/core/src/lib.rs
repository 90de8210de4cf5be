//! Opinion transition systems: asynchronous averaging on weighted digraphs,
//! the schedulers that drive them, and finite-horizon fairness and bound checks.

pub mod analysis;
pub mod dynamics;
pub mod fairness;
pub mod graph;
pub mod words;
