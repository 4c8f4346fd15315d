//! Bid vectors, scenarios and rankings.
//!
//! A slot index is the only identity a user has. Rankings order bids by value
//! descending and break exact ties by ascending slot index.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::Money;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Money>", into = "Vec<Money>")]
pub struct BidVector(Vec<Money>);

impl BidVector {
    pub fn new(slots: Vec<Money>) -> Result<Self> {
        if let Some((i, m)) = slots.iter().enumerate().find(|(_, m)| m.is_negative()) {
            return Err(Error::NegativeBid(m.to_string(), i));
        }
        Ok(BidVector(slots))
    }

    /// Convenience for tests and fixtures: whole currency units.
    pub fn from_units(units: &[i64]) -> Self {
        BidVector::new(units.iter().map(|&u| Money::from_units(u)).collect())
            .expect("non-negative units")
    }

    pub fn empty() -> Self {
        BidVector(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<Money> {
        self.0.get(i).copied()
    }

    pub fn as_slice(&self) -> &[Money] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Money> + '_ {
        self.0.iter().copied()
    }

    /// `(b_{-i}, v)`: a copy with slot `i` replaced.
    pub fn replace_slot(&self, i: usize, v: Money) -> Result<Self> {
        if i >= self.0.len() {
            return Err(Error::SlotOutOfRange {
                index: i,
                len: self.0.len(),
            });
        }
        if v.is_negative() {
            return Err(Error::NegativeBid(v.to_string(), i));
        }
        let mut slots = self.0.clone();
        slots[i] = v;
        Ok(BidVector(slots))
    }

    /// Inserts `v` at position `i`, shifting later slots right. Used to
    /// rebuild `(b_{-i}, v)` from a context that omits slot `i`.
    pub fn insert_slot(&self, i: usize, v: Money) -> Result<Self> {
        if i > self.0.len() {
            return Err(Error::SlotOutOfRange {
                index: i,
                len: self.0.len() + 1,
            });
        }
        if v.is_negative() {
            return Err(Error::NegativeBid(v.to_string(), i));
        }
        let mut slots = self.0.clone();
        slots.insert(i, v);
        Ok(BidVector(slots))
    }

    /// The vector with slot `i` removed.
    pub fn without_slot(&self, i: usize) -> Result<Self> {
        if i >= self.0.len() {
            return Err(Error::SlotOutOfRange {
                index: i,
                len: self.0.len(),
            });
        }
        let mut slots = self.0.clone();
        slots.remove(i);
        Ok(BidVector(slots))
    }

    pub fn ranked(&self) -> RankedView {
        ranked(self)
    }
}

impl TryFrom<Vec<Money>> for BidVector {
    type Error = Error;
    fn try_from(v: Vec<Money>) -> Result<Self> {
        BidVector::new(v)
    }
}

impl From<BidVector> for Vec<Money> {
    fn from(b: BidVector) -> Self {
        b.0
    }
}

/// Slot indices in rank order plus the number of zero pads appended after
/// them to fill a fixed-size block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedView {
    pub order: Vec<usize>,
    pub padding: usize,
}

impl RankedView {
    /// Extends the view with zero pads up to `len` positions.
    pub fn padded_to(mut self, len: usize) -> Self {
        self.padding = len.saturating_sub(self.order.len());
        self
    }

    pub fn len(&self) -> usize {
        self.order.len() + self.padding
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn ranked(bids: &BidVector) -> RankedView {
    let mut order: Vec<usize> = (0..bids.len()).collect();
    // Stable sort keeps ascending slot order among equal bids.
    order.sort_by(|&a, &b| bids.0[b].cmp(&bids.0[a]));
    RankedView { order, padding: 0 }
}

pub fn replace_slot(bids: &BidVector, i: usize, v: Money) -> Result<BidVector> {
    bids.replace_slot(i, v)
}

/// A strategic situation: who values what, what everyone submits when honest,
/// and who is colluding.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub true_values: Vec<Money>,
    pub bids: BidVector,
    pub coalition_users: BTreeSet<usize>,
    pub miner_in_coalition: bool,
}

impl Scenario {
    pub fn new(
        true_values: Vec<Money>,
        bids: BidVector,
        coalition_users: BTreeSet<usize>,
        miner_in_coalition: bool,
    ) -> Result<Self> {
        let s = Scenario {
            true_values,
            bids,
            coalition_users,
            miner_in_coalition,
        };
        s.validate()?;
        Ok(s)
    }

    /// Everyone bids their value; the strategic player is given by
    /// `coalition_users` and `miner_in_coalition`.
    pub fn truthful(
        values: &BidVector,
        coalition_users: impl IntoIterator<Item = usize>,
        miner_in_coalition: bool,
    ) -> Result<Self> {
        Scenario::new(
            values.as_slice().to_vec(),
            values.clone(),
            coalition_users.into_iter().collect(),
            miner_in_coalition,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.true_values.len() != self.bids.len() {
            return Err(Error::InvalidScenario(format!(
                "{} true values but {} bids",
                self.true_values.len(),
                self.bids.len()
            )));
        }
        if let Some(i) = self.true_values.iter().position(|v| v.is_negative()) {
            return Err(Error::InvalidScenario(format!("negative true value in slot {i}")));
        }
        if let Some(&i) = self.coalition_users.iter().find(|&&i| i >= self.bids.len()) {
            return Err(Error::SlotOutOfRange {
                index: i,
                len: self.bids.len(),
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    pub fn in_coalition(&self, slot: usize) -> bool {
        self.coalition_users.contains(&slot)
    }
}
