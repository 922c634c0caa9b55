use serde::{Deserialize, Serialize};

use crate::election::Uid;

/// Contention discipline borrowed from CSMA/CD: higher uids wait less
/// before initiating, and overhearing a winning initiation cancels one's own.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackoffConfig {
    pub t_slot: u64,
    pub uid_max: u64,
}

pub fn csma_backoff(uid: Uid, uid_max: u64, t_slot: u64) -> u64 {
    debug_assert!(uid.0 >= 1 && uid.0 <= uid_max, "uid {uid} outside 1..={uid_max}");
    t_slot * uid_max.saturating_sub(uid.0)
}
