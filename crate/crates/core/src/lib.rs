//! Cutting-plane selection laboratory: a small MILP model, a bounded simplex
//! with Gomory cuts, cut scoring and selection, the adversarial `P(a, d)`
//! family, and a graph-network policy trained by REINFORCE.

pub mod corpus;
pub mod error;
pub mod family;
pub mod gomory;
pub mod graph;
pub mod milp;
pub mod numfmt;
pub mod policy;
pub mod rng;
pub mod scoring;
pub mod selector;
pub mod simplex;
pub mod trainer;
pub mod vertex;

pub use error::{Error, Result};
pub use milp::{ConsType, Cut, MilpInstance, Point, VarType};
