use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::election::{CriterionValue, Uid};

/// How concurrent diffusion computations are ranked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorityMode {
    /// Higher starter uid wins.
    Uid,
    /// Higher starter criterion wins, uid breaks ties.
    StarterQuality,
}

/// Identity of one diffusion computation.
///
/// `level` is 0 for flat elections; the clustered hierarchy runs level-1
/// (intra-cluster) and level-2 (inter-cluster) computations, and a higher
/// level always outranks a lower one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ComputationId {
    pub level: u8,
    pub starter: Uid,
    pub starter_criterion: CriterionValue,
    pub epoch: u32,
}

impl fmt::Display for ComputationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}:{}.{}", self.level, self.starter, self.epoch)
    }
}

impl ComputationId {
    pub fn priority_cmp(&self, other: &ComputationId, mode: PriorityMode) -> Ordering {
        let by_key = match mode {
            PriorityMode::Uid => self.starter.cmp(&other.starter),
            PriorityMode::StarterQuality => self.starter_criterion.cmp(&other.starter_criterion),
        };
        self.level.cmp(&other.level).then(by_key).then(self.epoch.cmp(&other.epoch))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolution {
    Keep,
    JoinIncoming,
}

pub fn resolve_computation_conflict(
    current: &ComputationId,
    incoming: &ComputationId,
    mode: PriorityMode,
) -> Resolution {
    if incoming.priority_cmp(current, mode) == Ordering::Greater {
        Resolution::JoinIncoming
    } else {
        Resolution::Keep
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(uid: u64, value: u64) -> ComputationId {
        ComputationId {
            level: 0,
            starter: Uid(uid),
            starter_criterion: CriterionValue { value, uid: Uid(uid) },
            epoch: 1,
        }
    }

    #[test]
    fn uid_mode_keeps_higher_current() {
        assert_eq!(resolve_computation_conflict(&comp(9, 0), &comp(5, 0), PriorityMode::Uid), Resolution::Keep);
        assert_eq!(resolve_computation_conflict(&comp(5, 0), &comp(9, 0), PriorityMode::Uid), Resolution::JoinIncoming);
    }

    #[test]
    fn quality_mode_prefers_better_starter() {
        let current = comp(9, 400_000);
        let incoming = comp(5, 800_000);
        assert_eq!(
            resolve_computation_conflict(&current, &incoming, PriorityMode::StarterQuality),
            Resolution::JoinIncoming
        );
        assert_eq!(resolve_computation_conflict(&current, &incoming, PriorityMode::Uid), Resolution::Keep);
    }

    #[test]
    fn quality_tie_broken_by_uid() {
        let a = comp(5, 500_000);
        let b = comp(9, 500_000);
        assert_eq!(resolve_computation_conflict(&a, &b, PriorityMode::StarterQuality), Resolution::JoinIncoming);
        assert_eq!(resolve_computation_conflict(&b, &a, PriorityMode::StarterQuality), Resolution::Keep);
    }

    #[test]
    fn higher_level_outranks() {
        let mut low = comp(9, 0);
        low.level = 1;
        let mut high = comp(2, 0);
        high.level = 2;
        assert_eq!(resolve_computation_conflict(&low, &high, PriorityMode::Uid), Resolution::JoinIncoming);
    }
}
