//! Maximum-correntropy Kalman filters and a Monte Carlo benchmark harness.

pub mod filters;
pub mod linalg;
pub mod model;
pub mod bench;
pub mod cli;
