//! Blocks and their outcomes.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::money::Money;
use crate::rat::Rat;

/// Who a block entry belongs to.
///
/// Fakes belong to whichever strategic player injected them. Pads are the
/// zero bids that fill an under-full fixed-size block; they belong to nobody
/// and are never confirmed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Owner {
    User(usize),
    Fake(usize),
    Pad,
}

impl Owner {
    /// Tie-break rank among equal bids: real slots by index, then fakes in
    /// injection order, then pads.
    pub fn tie_key(self) -> (u8, usize) {
        match self {
            Owner::User(i) => (0, i),
            Owner::Fake(j) => (1, j),
            Owner::Pad => (2, 0),
        }
    }

    pub fn is_pad(self) -> bool {
        matches!(self, Owner::Pad)
    }

    pub fn is_fake(self) -> bool {
        matches!(self, Owner::Fake(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockEntry {
    pub bid: Money,
    pub owner: Owner,
}

impl BlockEntry {
    pub fn new(bid: Money, owner: Owner) -> Self {
        BlockEntry { bid, owner }
    }

    pub fn is_padding_zero(&self) -> bool {
        self.owner.is_pad()
    }
}

/// Rank order used everywhere: bid descending, then [`Owner::tie_key`].
pub fn rank_cmp(a: &BlockEntry, b: &BlockEntry) -> Ordering {
    b.bid.cmp(&a.bid).then(a.owner.tie_key().cmp(&b.owner.tie_key()))
}

/// The transactions a miner put in a block.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IncludedBlock {
    pub entries: Vec<BlockEntry>,
}

impl IncludedBlock {
    pub fn new(entries: Vec<BlockEntry>) -> Self {
        IncludedBlock { entries }
    }

    /// Entries that are not zero pads.
    pub fn real_len(&self) -> usize {
        self.entries.iter().filter(|e| !e.is_padding_zero()).count()
    }

    /// Non-pad entries in rank order.
    pub fn ranked_entries(&self) -> Vec<BlockEntry> {
        let mut ranked: Vec<BlockEntry> = self
            .entries
            .iter()
            .copied()
            .filter(|e| !e.is_padding_zero())
            .collect();
        ranked.sort_by(rank_cmp);
        ranked
    }

    pub fn bids(&self) -> Vec<Money> {
        self.entries.iter().map(|e| e.bid).collect()
    }

    pub fn contains(&self, owner: Owner) -> bool {
        self.entries.iter().any(|e| e.owner == owner)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotOutcome {
    pub owner: Owner,
    pub bid: Money,
    pub confirm_prob: Rat,
    /// What the entry pays if it is confirmed.
    pub conditional_payment: Money,
}

impl SlotOutcome {
    pub fn is_fake(&self) -> bool {
        self.owner.is_fake()
    }

    pub fn expected_payment(&self) -> Rat {
        &self.confirm_prob * &Rat::from_money(self.conditional_payment)
    }
}

/// Exact summary of a (possibly randomized) outcome: per-entry confirmation
/// marginals and conditional payments, plus the miner's cut and the burn.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedOutcome {
    /// One entry per block position, in rank order, pads last.
    pub per_slot: Vec<SlotOutcome>,
    pub miner_revenue: Rat,
    pub burn: Rat,
}

impl ExpectedOutcome {
    pub fn total_expected_payment(&self) -> Rat {
        self.per_slot.iter().map(SlotOutcome::expected_payment).sum()
    }

    pub fn slot(&self, owner: Owner) -> Option<&SlotOutcome> {
        self.per_slot.iter().find(|s| s.owner == owner)
    }

    /// Confirmation probability of user slot `i` (zero when not included).
    pub fn confirm_prob_of(&self, i: usize) -> Rat {
        self.slot(Owner::User(i))
            .map(|s| s.confirm_prob.clone())
            .unwrap_or_else(Rat::zero)
    }

    pub fn is_deterministic(&self) -> bool {
        self.per_slot
            .iter()
            .all(|s| s.confirm_prob.is_zero() || s.confirm_prob == Rat::one())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payment {
    pub owner: Owner,
    pub amount: Money,
}

/// One draw of the confirmation rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizedOutcome {
    pub confirmed: Vec<Owner>,
    pub payments: Vec<Payment>,
    pub miner_revenue: Rat,
    pub burn: Rat,
    pub seed: u64,
}

impl RealizedOutcome {
    pub fn is_confirmed(&self, owner: Owner) -> bool {
        self.confirmed.contains(&owner)
    }
}
