//! Exact accuracy verification for differentially private programs.

pub mod checker;
pub mod corpus;
pub mod decide;
pub mod integrator;
pub mod lang;
pub mod metrics;
pub mod oracle;
pub mod regions;
pub mod semantics;
pub mod symexp;
