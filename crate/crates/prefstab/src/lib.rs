//! Evolutionary stability of preference configurations in multi-population
//! games under perfect, zero and partial observability.

pub mod config;
pub mod corpus;
pub mod efficiency;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod linalg;
pub mod lp;
pub mod poly;
pub mod rational;
pub mod report;
pub mod scenario;
pub mod stability;
pub mod dynamics;
pub mod ring;

pub use error::{Error, Result};
pub use rational::Q;
