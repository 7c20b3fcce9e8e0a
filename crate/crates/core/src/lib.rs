//! Simulation and decision logic for context-aware central-to-edge VNF
//! redundancy on a 5G island.
//!
//! A central VNF serves UEs inside an edge coverage disc. Each period the
//! island decides whether to pay a migration cost to keep a synchronized edge
//! copy, or to risk the outage loss of the UEs it would serve while the
//! central VNF is down.

pub mod availability;
pub mod config;
pub mod engine;
pub mod estimator;
pub mod histogram;
pub mod mobility;
pub mod rng;
pub mod world;
