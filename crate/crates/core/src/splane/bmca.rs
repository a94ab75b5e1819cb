//! Simplified best master clock selection.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnounceRecord {
    pub priority1: u8,
    pub clock_class: u8,
    pub clock_accuracy: u8,
    pub priority2: u8,
    pub clock_identity: u64,
}

impl AnnounceRecord {
    fn rank(&self) -> (u8, u8, u8, u8, u64) {
        (
            self.priority1,
            self.clock_class,
            self.clock_accuracy,
            self.priority2,
            self.clock_identity,
        )
    }

    /// A PRTC-traceable grandmaster as the test equipment announces it.
    pub fn grandmaster(identity: u64) -> Self {
        Self {
            priority1: 128,
            clock_class: 6,
            clock_accuracy: 0x21,
            priority2: 128,
            clock_identity: identity,
        }
    }
}

/// Lowest rank wins; `None` for an empty set.
pub fn bmca_select(announces: &[AnnounceRecord]) -> Option<AnnounceRecord> {
    announces.iter().min_by_key(|a| a.rank()).copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let gm = AnnounceRecord::grandmaster(5);
        assert_eq!(bmca_select(&[gm]), Some(gm));
        let worse = AnnounceRecord {
            clock_class: 7,
            ..gm
        };
        assert_eq!(bmca_select(&[worse, gm]), Some(gm));
        let twin = AnnounceRecord {
            clock_identity: 4,
            ..gm
        };
        assert_eq!(bmca_select(&[gm, twin]), Some(twin));
        assert_eq!(bmca_select(&[]), None);
    }

    fn record() -> impl Strategy<Value = AnnounceRecord> {
        (0u8..3, 5u8..8, 0x20u8..0x23, 0u8..3, 0u64..4).prop_map(|(p1, c, a, p2, id)| {
            AnnounceRecord {
                priority1: p1,
                clock_class: c,
                clock_accuracy: a,
                priority2: p2,
                clock_identity: id,
            }
        })
    }

    proptest! {
        #[test]
        fn permutation_invariant(set in proptest::collection::vec(record(), 1..8), seed in any::<u64>()) {
            let mut shuffled = set.clone();
            let n = shuffled.len();
            for i in 0..n {
                shuffled.swap(i, (seed.wrapping_mul(i as u64 + 1) % n as u64) as usize);
            }
            prop_assert_eq!(bmca_select(&set).map(|a| a.rank()), bmca_select(&shuffled).map(|a| a.rank()));
        }
    }
}
