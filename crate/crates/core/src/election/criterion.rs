use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ElectionError;
use crate::network::MobilityMetric;

/// Fixed-point scale for composite criterion values and weights.
pub const MICRO: u64 = 1_000_000;

/// Scenario-unique node identifier. Survives crash and recovery.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Uid(pub u64);

impl fmt::Display for Uid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionMode {
    UidOnly,
    Composite,
}

/// Battery and mobility weights in micro-units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Weights {
    pub w_b: u64,
    pub w_m: u64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { w_b: MICRO / 2, w_m: MICRO / 2 }
    }
}

/// Election key. Ordered by `value`, then by `uid`, so distinct nodes never
/// compare equal. Larger is better.
///
/// In uid-only mode `value` is the uid itself; in composite mode it is a
/// micro-unit fixed-point number in `[0, 1_000_000]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CriterionValue {
    pub value: u64,
    pub uid: Uid,
}

impl CriterionValue {
    pub fn uid_only(uid: Uid) -> Self {
        CriterionValue { value: uid.0, uid }
    }
}

impl Ord for CriterionValue {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.value, self.uid).cmp(&(other.value, other.uid))
    }
}

impl PartialOrd for CriterionValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Computes a node's election key.
///
/// Composite: `w_b·charge + w_m·(1 − mobility / v_max)`, with `charge` in
/// micro-units and the mobility ratio rounded to micro-units.
pub fn criterion(
    uid: Uid,
    charge_micro: u64,
    mobility: MobilityMetric,
    v_max: u64,
    weights: Weights,
    mode: CriterionMode,
) -> Result<CriterionValue, ElectionError> {
    match mode {
        CriterionMode::UidOnly => Ok(CriterionValue::uid_only(uid)),
        CriterionMode::Composite => {
            if weights.w_b + weights.w_m != MICRO {
                return Err(ElectionError::BadWeights { w_b: weights.w_b, w_m: weights.w_m });
            }
            let ratio = (mobility.value / v_max.max(1) as f64).clamp(0.0, 1.0);
            let stillness = MICRO - (ratio * MICRO as f64).round() as u64;
            let charge = charge_micro.min(MICRO);
            let value = (weights.w_b as u128 * charge as u128 + weights.w_m as u128 * stillness as u128)
                / MICRO as u128;
            Ok(CriterionValue { value: value as u64, uid })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn still(node: usize) -> MobilityMetric {
        MobilityMetric { node, window: 100, value: 0.0 }
    }

    #[test]
    fn maximal_node_scores_one() {
        let c = criterion(Uid(1), MICRO, still(0), 1, Weights::default(), CriterionMode::Composite).unwrap();
        assert_eq!(c.value, MICRO);
    }

    #[test]
    fn uid_mode_is_identity() {
        let c = criterion(Uid(42), 0, still(0), 1, Weights::default(), CriterionMode::UidOnly).unwrap();
        assert_eq!(c.value, 42);
    }

    #[test]
    fn composite_arithmetic() {
        let m = MobilityMetric { node: 0, window: 100, value: 1.0 };
        let c = criterion(Uid(3), 600_000, m, 4, Weights::default(), CriterionMode::Composite).unwrap();
        // Independent recomputation in floating point.
        let expected = 0.5 * 0.6 + 0.5 * (1.0 - 1.0 / 4.0);
        assert_eq!(c.value, (expected * MICRO as f64).round() as u64);
        assert_eq!(c.value, 675_000);
    }

    #[test]
    fn bad_weights_rejected() {
        let w = Weights { w_b: 600_000, w_m: 600_000 };
        assert_eq!(
            criterion(Uid(1), 0, still(0), 1, w, CriterionMode::Composite),
            Err(ElectionError::BadWeights { w_b: 600_000, w_m: 600_000 })
        );
    }

    proptest! {
        #[test]
        fn sorting_yields_unique_permutation(values in proptest::collection::vec(0u64..10, 1..40)) {
            let keys: Vec<CriterionValue> = values
                .iter()
                .enumerate()
                .map(|(i, &v)| CriterionValue { value: v, uid: Uid(i as u64 + 1) })
                .collect();
            let mut sorted = keys.clone();
            sorted.sort_by(|a, b| b.cmp(a));
            for w in sorted.windows(2) {
                prop_assert!(w[0] > w[1]);
            }
        }

        #[test]
        fn composite_brute_force(charge in 0u64..=MICRO, mob in 0.0f64..4.0, wb in 0u64..=100) {
            let w = Weights { w_b: wb * 10_000, w_m: MICRO - wb * 10_000 };
            let m = MobilityMetric { node: 0, window: 10, value: mob };
            let c = criterion(Uid(1), charge, m, 4, w, CriterionMode::Composite).unwrap();
            let f = (w.w_b as f64 / 1e6) * (charge as f64 / 1e6) + (w.w_m as f64 / 1e6) * (1.0 - mob / 4.0);
            prop_assert!((c.value as f64 / 1e6 - f).abs() < 2e-6);
        }
    }
}
