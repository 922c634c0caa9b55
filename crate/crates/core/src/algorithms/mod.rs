pub mod backoff;
pub mod cluster;
pub mod conflict;
pub mod diffusion;
pub mod masterslave;

pub use backoff::{csma_backoff, BackoffConfig};
pub use cluster::{cluster_form, cluster_of, gate_join_during_election, ClusterId, ClusterState, JoinDecision};
pub use conflict::{resolve_computation_conflict, ComputationId, PriorityMode, Resolution};
pub use diffusion::{Action, DiffusionConfig, DiffusionState, DiffusionTimer, NodeCtx, Phase};
pub use masterslave::{choose_master, form_piconets, InviteState, MasterSlaveTuple, MsState, Piconet, PiconetLayout, PmpSchedule};
