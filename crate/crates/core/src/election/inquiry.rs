use super::CriterionValue;
use crate::engine::NodeId;

/// One neighbor's answer to a recovering node's inquiry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InquiryReplyInfo {
    pub from: NodeId,
    pub leader: Option<CriterionValue>,
    /// Replier's own hop distance to that leader.
    pub hops: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InquiryResolution {
    Adopted { leader: CriterionValue, hops: u32 },
    StartElection,
}

/// Adopts the best leader named by any reply, or asks for an election when
/// nobody named one.
pub fn resolve_inquiry(replies: &[InquiryReplyInfo]) -> InquiryResolution {
    let best = replies.iter().filter_map(|r| r.leader.map(|l| (l, r.hops))).max_by(|a, b| {
        a.0.cmp(&b.0).then(b.1.cmp(&a.1))
    });
    match best {
        Some((leader, hops)) => InquiryResolution::Adopted { leader, hops: hops + 1 },
        None => InquiryResolution::StartElection,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::Uid;

    fn reply(from: NodeId, leader: Option<(u64, u64)>) -> InquiryReplyInfo {
        InquiryReplyInfo {
            from,
            leader: leader.map(|(v, u)| CriterionValue { value: v, uid: Uid(u) }),
            hops: 1,
        }
    }

    #[test]
    fn single_reply_adopted() {
        let r = resolve_inquiry(&[reply(0, Some((5, 5)))]);
        assert!(matches!(r, InquiryResolution::Adopted { leader, .. } if leader.uid == Uid(5)));
    }

    #[test]
    fn no_neighbors_means_election() {
        assert_eq!(resolve_inquiry(&[]), InquiryResolution::StartElection);
        assert_eq!(resolve_inquiry(&[reply(1, None)]), InquiryResolution::StartElection);
    }

    #[test]
    fn conflicting_replies_pick_highest_criterion() {
        let replies = [reply(0, Some((700_000, 2))), reply(1, Some((900_000, 1))), reply(2, None)];
        let expected = replies.iter().filter_map(|r| r.leader).max().unwrap();
        match resolve_inquiry(&replies) {
            InquiryResolution::Adopted { leader, hops } => {
                assert_eq!(leader, expected);
                assert_eq!(leader.uid, Uid(1));
                assert_eq!(hops, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
