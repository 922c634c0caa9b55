use serde::{Deserialize, Serialize};

use super::{CriterionValue, Uid};

/// Current leader plus four runners-up.
pub const CANDIDATE_CAPACITY: usize = 5;

/// Bounded, descending, uid-unique list of election keys.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CandidateList {
    entries: Vec<CriterionValue>,
}

impl CandidateList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(c: CriterionValue) -> Self {
        CandidateList { entries: vec![c] }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = CriterionValue>) -> Self {
        let mut list = CandidateList::new();
        for e in entries {
            list.insert(e);
        }
        list
    }

    pub fn entries(&self) -> &[CriterionValue] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best(&self) -> Option<CriterionValue> {
        self.entries.first().copied()
    }

    pub fn contains(&self, uid: Uid) -> bool {
        self.entries.iter().any(|e| e.uid == uid)
    }

    pub fn insert(&mut self, c: CriterionValue) {
        if let Some(i) = self.entries.iter().position(|e| e.uid == c.uid) {
            if self.entries[i] >= c {
                return;
            }
            self.entries.remove(i);
        }
        let at = self.entries.partition_point(|e| *e > c);
        self.entries.insert(at, c);
        self.entries.truncate(CANDIDATE_CAPACITY);
    }

    pub fn remove(&mut self, uid: Uid) {
        self.entries.retain(|e| e.uid != uid);
    }

    /// Best entry other than `uid`.
    pub fn successor_of(&self, uid: Uid) -> Option<CriterionValue> {
        self.entries.iter().copied().find(|e| e.uid != uid)
    }
}

pub fn merge_candidate_lists(a: &CandidateList, b: &CandidateList) -> CandidateList {
    let mut out = a.clone();
    for &e in b.entries() {
        out.insert(e);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cv(value: u64, uid: u64) -> CriterionValue {
        CriterionValue { value, uid: Uid(uid) }
    }

    fn arb_list() -> impl Strategy<Value = CandidateList> {
        proptest::collection::vec((0u64..20, 1u64..15), 0..8)
            .prop_map(|v| CandidateList::from_entries(v.into_iter().map(|(x, u)| cv(x, u))))
    }

    #[test]
    fn empty_is_identity() {
        let x = CandidateList::from_entries([cv(5, 1), cv(3, 2)]);
        assert_eq!(merge_candidate_lists(&x, &CandidateList::new()), x);
        assert_eq!(merge_candidate_lists(&CandidateList::new(), &x), x);
    }

    #[test]
    fn disjoint_lists_keep_top_five() {
        let a = CandidateList::from_entries([cv(9, 1), cv(4, 2), cv(1, 3)]);
        let b = CandidateList::from_entries([cv(8, 4), cv(6, 5), cv(2, 6)]);
        let merged = merge_candidate_lists(&a, &b);
        // Brute force: sort the union descending, take five.
        let mut all: Vec<_> = a.entries().iter().chain(b.entries()).copied().collect();
        all.sort_by(|x, y| y.cmp(x));
        all.truncate(5);
        assert_eq!(merged.entries(), all.as_slice());
        assert!(!merged.contains(Uid(3)));
    }

    #[test]
    fn duplicate_uid_keeps_higher() {
        let a = CandidateList::from_entries([cv(3, 7)]);
        let b = CandidateList::from_entries([cv(5, 7)]);
        assert_eq!(merge_candidate_lists(&a, &b).entries(), &[cv(5, 7)]);
    }

    #[test]
    fn successor_skips_named_leader() {
        let l = CandidateList::from_entries([cv(9, 1), cv(4, 2)]);
        assert_eq!(l.successor_of(Uid(1)), Some(cv(4, 2)));
        assert_eq!(l.successor_of(Uid(5)), Some(cv(9, 1)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn merge_is_commutative(a in arb_list(), b in arb_list()) {
            prop_assert_eq!(merge_candidate_lists(&a, &b), merge_candidate_lists(&b, &a));
        }

        #[test]
        fn merge_is_associative_and_idempotent(a in arb_list(), b in arb_list(), c in arb_list()) {
            let left = merge_candidate_lists(&merge_candidate_lists(&a, &b), &c);
            let right = merge_candidate_lists(&a, &merge_candidate_lists(&b, &c));
            prop_assert_eq!(&left, &right);
            prop_assert_eq!(merge_candidate_lists(&a, &a), a.clone());
        }

        #[test]
        fn invariants_hold(a in arb_list(), b in arb_list()) {
            let m = merge_candidate_lists(&a, &b);
            prop_assert!(m.len() <= CANDIDATE_CAPACITY);
            for w in m.entries().windows(2) {
                prop_assert!(w[0] > w[1]);
                prop_assert_ne!(w[0].uid, w[1].uid);
            }
            let mut uids: Vec<_> = m.entries().iter().map(|e| e.uid).collect();
            uids.sort();
            uids.dedup();
            prop_assert_eq!(uids.len(), m.len());
        }
    }
}
