//! Design-time sensor and actuator selection for factored MDPs.
//!
//! The crate is organized bottom-up:
//!
//! - [`fmdp`]: factored MDP data model and flattening to an explicit MDP;
//! - [`mdp`]: value and policy iteration for fully observable problems;
//! - [`pomdp`]: belief updates, exact alpha-vector value iteration and a
//!   brute-force finite-horizon verifier;
//! - [`selection`]: greedy, cost-ratio greedy and brute-force subset
//!   selection over sensor/actuator catalogs;
//! - [`instances`]: gadget examples, set-cover reductions and random
//!   instance generators;
//! - [`cascade`]: independent-cascade fault propagation with islanding;
//! - [`experiment`]: configuration-driven experiment runs and CSV reports.

pub mod cascade;
pub mod error;
pub mod experiment;
pub mod fmdp;
pub mod instances;
pub mod mdp;
pub mod pomdp;
pub mod selection;

pub use error::{Error, Result};
