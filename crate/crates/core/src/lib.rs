pub mod algorithms;
pub mod election;
pub mod engine;
pub mod network;
pub mod scenario;
pub mod experiments;
pub mod metrics;
pub mod sim;
