//! Greedy kernel interpolation on nested domains: P-greedy selection with an
//! incremental Newton basis, an abstract finite-dimensional greedy engine,
//! decay-rate fitting and a config-driven experiment runner.

pub mod abstract_greedy;
pub mod csvfmt;
pub mod domains;
pub mod experiment;
pub mod greedy;
pub mod kernels;
pub mod rates;

pub use domains::{discretize, restrict, CandidateSet, DomainSpec, Strategy};
pub use greedy::{run, GreedyState, GreedyTrace, SelectionRule, StopCriteria, StopReason};
pub use kernels::KernelSpec;
