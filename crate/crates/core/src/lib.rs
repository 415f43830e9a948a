pub mod baselines;
pub mod coverage;
pub mod graph;
pub mod harness;
pub mod par;
pub mod protocol;
pub mod sim;
pub mod topology;
