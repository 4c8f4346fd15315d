//! Expected γ-strict utility of a strategic player.
//!
//! The strategic player is whatever [`Scenario`] marks as colluding: a lone
//! user, the miner, or the miner together with some users. It is credited the
//! miner revenue when the miner is in, plus for every entry it owns (real
//! slots in the coalition and all fake bids) `q (v - p) - (1 - q) γ max(0, b - v)`.
//! Fakes have value zero. Entries that are not in the block count for nothing.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bids::{BidVector, Scenario};
use crate::error::{Error, Result};
use crate::gamma::Gamma;
use crate::mechanisms::Mechanism;
use crate::money::Money;
use crate::outcome::{BlockEntry, ExpectedOutcome, IncludedBlock, Owner};
use crate::rat::Rat;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inclusion {
    /// The miner runs the mechanism's inclusion rule over all submitted bids.
    #[default]
    Honest,
    /// The miner publishes exactly this block.
    Explicit(IncludedBlock),
}

/// What everyone submits and what the miner does with it.
///
/// Fake bids always belong to the strategic player. Under explicit inclusion
/// every fake must be in the block (an unplaced fake has no effect at all);
/// under honest inclusion fakes join the mempool and may be left out.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub bids: BidVector,
    #[serde(default)]
    pub fakes: Vec<Money>,
    #[serde(default)]
    pub inclusion: Inclusion,
}

impl StrategyProfile {
    pub fn honest(bids: BidVector) -> Self {
        StrategyProfile {
            bids,
            fakes: Vec::new(),
            inclusion: Inclusion::Honest,
        }
    }

    /// The block the profile leads to under `m`.
    pub fn block_for(&self, m: &Mechanism) -> IncludedBlock {
        match &self.inclusion {
            Inclusion::Explicit(block) => block.clone(),
            Inclusion::Honest => {
                let mempool = self
                    .bids
                    .iter()
                    .enumerate()
                    .map(|(i, b)| BlockEntry::new(b, Owner::User(i)))
                    .chain(
                        self.fakes
                            .iter()
                            .enumerate()
                            .map(|(j, &f)| BlockEntry::new(f, Owner::Fake(j))),
                    )
                    .collect();
                m.include_honest_mempool(mempool)
            }
        }
    }

    /// Checks the profile against the scenario: users outside the coalition
    /// bid as the scenario says, and an explicit block only contains what
    /// was actually submitted.
    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        let bad = |why: String| Err(Error::InvalidProfile(why));
        if self.bids.len() != scenario.len() {
            return bad(format!("{} bids for {} slots", self.bids.len(), scenario.len()));
        }
        for (i, (b, s)) in self.bids.iter().zip(scenario.bids.iter()).enumerate() {
            if !scenario.in_coalition(i) && b != s {
                return bad(format!("slot {i} is not in the coalition but bids {b} instead of {s}"));
            }
        }
        if let Some(f) = self.fakes.iter().find(|f| f.is_negative()) {
            return bad(format!("negative fake bid {f}"));
        }
        if !self.fakes.is_empty() && scenario.coalition_users.is_empty() && !scenario.miner_in_coalition {
            return bad("fake bids without a strategic player".into());
        }
        if let Inclusion::Explicit(block) = &self.inclusion {
            if !scenario.miner_in_coalition {
                return bad("explicit inclusion requires the miner in the coalition".into());
            }
            let mut seen = BTreeSet::new();
            for e in &block.entries {
                let expected = match e.owner {
                    Owner::Pad => continue,
                    Owner::User(i) => self.bids.get(i),
                    Owner::Fake(j) => self.fakes.get(j).copied(),
                };
                match expected {
                    None => return bad(format!("block references unknown {:?}", e.owner)),
                    Some(b) if b != e.bid => {
                        return bad(format!("block lists {:?} at {} but it bid {b}", e.owner, e.bid))
                    }
                    _ => {}
                }
                if !seen.insert(e.owner) {
                    return bad(format!("{:?} appears twice in the block", e.owner));
                }
            }
            if let Some(j) = (0..self.fakes.len()).find(|&j| !seen.contains(&Owner::Fake(j))) {
                return bad(format!("fake {j} is not placed in the block"));
            }
        }
        Ok(())
    }
}

/// Everyone in the coalition bids their true value, everyone else bids as
/// the scenario says, no fakes, honest miner.
pub fn honest_profile(scenario: &Scenario, _m: &Mechanism) -> StrategyProfile {
    let bids = scenario
        .bids
        .iter()
        .enumerate()
        .map(|(i, b)| if scenario.in_coalition(i) { scenario.true_values[i] } else { b })
        .collect();
    StrategyProfile::honest(BidVector::new(bids).expect("scenario values are non-negative"))
}

/// The γ-strict utility of the scenario's strategic player.
pub fn expected_utility(scenario: &Scenario, outcome: &ExpectedOutcome, gamma: Gamma) -> Result<Rat> {
    let mut u = if scenario.miner_in_coalition {
        outcome.miner_revenue.clone()
    } else {
        Rat::zero()
    };
    let g = gamma.to_rat();
    for slot in &outcome.per_slot {
        let value = match slot.owner {
            Owner::Pad => continue,
            Owner::Fake(_) => Money::ZERO,
            Owner::User(i) => {
                if i >= scenario.len() {
                    return Err(Error::SlotOutOfRange {
                        index: i,
                        len: scenario.len(),
                    });
                }
                if !scenario.in_coalition(i) {
                    continue;
                }
                scenario.true_values[i]
            }
        };
        let q = &slot.confirm_prob;
        u += q * &Rat::from_money(value - slot.conditional_payment);
        let overbid = slot.bid - value;
        if overbid > Money::ZERO && !g.is_zero() {
            u += -(&(&(Rat::one() - q) * &g) * &Rat::from_money(overbid));
        }
    }
    Ok(u)
}

/// Validates, builds the block, evaluates it and scores it.
pub fn profile_utility(m: &Mechanism, scenario: &Scenario, profile: &StrategyProfile, gamma: Gamma) -> Result<Rat> {
    profile.validate(scenario)?;
    let outcome = m.evaluate(&profile.block_for(m))?;
    expected_utility(scenario, &outcome, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::SlotOutcome;
    use proptest::prelude::*;

    fn m(u: i64) -> Money {
        Money::from_units(u)
    }

    #[test]
    fn sole_truthful_user() {
        let s = Scenario::truthful(&BidVector::from_units(&[10]), [0], false).unwrap();
        let out = ExpectedOutcome {
            per_slot: vec![SlotOutcome {
                owner: Owner::User(0),
                bid: m(10),
                confirm_prob: Rat::one(),
                conditional_payment: m(5),
            }],
            miner_revenue: Rat::from_integer(5),
            burn: Rat::zero(),
        };
        assert_eq!(expected_utility(&s, &out, Gamma::ONE).unwrap(), Rat::from_integer(5));
    }

    #[test]
    fn honest_miner_and_top_user_on_burning() {
        let mech = Mechanism::burning_second_price(4, 2, 2, Gamma::ONE, 1).unwrap();
        let s = Scenario::truthful(&BidVector::from_units(&[10, 8, 5, 3]), [0], true).unwrap();
        let u = profile_utility(&mech, &s, &honest_profile(&s, &mech), Gamma::ONE).unwrap();
        assert_eq!(u, Rat::from_integer(13));
    }

    #[test]
    fn unconfirmed_overbid_penalty() {
        let s = Scenario::truthful(&BidVector::from_units(&[0]), [0], false).unwrap();
        let out = ExpectedOutcome {
            per_slot: vec![SlotOutcome {
                owner: Owner::User(0),
                bid: "3.5".parse().unwrap(),
                confirm_prob: Rat::zero(),
                conditional_payment: Money::ZERO,
            }],
            miner_revenue: Rat::zero(),
            burn: Rat::zero(),
        };
        assert_eq!(expected_utility(&s, &out, Gamma::ONE).unwrap(), Rat::new(-7, 2));
        assert_eq!(expected_utility(&s, &out, Gamma::ZERO).unwrap(), Rat::zero());
    }

    #[test]
    fn honest_profile_shapes() {
        let mech = Mechanism::Trivial;
        let v = BidVector::from_units(&[10, 8]);
        let plain = honest_profile(&Scenario::truthful(&v, [], false).unwrap(), &mech);
        assert_eq!(plain.bids, v);
        assert!(plain.fakes.is_empty());
        assert_eq!(plain.inclusion, Inclusion::Honest);
        let flagged = honest_profile(&Scenario::truthful(&v, [0, 1], true).unwrap(), &mech);
        assert_eq!(flagged, plain);
        let empty = Scenario::truthful(&BidVector::empty(), [], false).unwrap();
        assert!(honest_profile(&empty, &mech).bids.is_empty());
    }

    #[test]
    fn user_injected_fakes_enter_the_mempool() {
        let mech = Mechanism::second_price(3).unwrap();
        let s = Scenario::truthful(&BidVector::from_units(&[10, 8, 5]), [0], false).unwrap();
        let mut p = honest_profile(&s, &mech);
        p.fakes = vec![m(9)];
        let block = p.block_for(&mech);
        assert_eq!(block.bids(), vec![m(10), m(9), m(8)]);
        assert!(!block.contains(Owner::User(2)));
    }

    #[test]
    fn profile_validation() {
        let mech = Mechanism::second_price(3).unwrap();
        let v = BidVector::from_units(&[10, 8]);
        let s = Scenario::truthful(&v, [0], false).unwrap();
        let mut p = honest_profile(&s, &mech);
        p.bids = BidVector::from_units(&[10, 9]);
        assert!(profile_utility(&mech, &s, &p, Gamma::ONE).is_err(), "outsider deviates");

        let p = StrategyProfile {
            bids: v.clone(),
            fakes: vec![],
            inclusion: Inclusion::Explicit(IncludedBlock::default()),
        };
        assert!(p.validate(&s).is_err(), "explicit inclusion needs the miner");

        let s = Scenario::truthful(&v, [], true).unwrap();
        let unplaced = StrategyProfile {
            bids: v.clone(),
            fakes: vec![m(1)],
            inclusion: Inclusion::Explicit(IncludedBlock::default()),
        };
        assert!(unplaced.validate(&s).is_err());
        let lying = StrategyProfile {
            bids: v,
            fakes: vec![],
            inclusion: Inclusion::Explicit(IncludedBlock::new(vec![BlockEntry::new(m(3), Owner::User(0))])),
        };
        assert!(lying.validate(&s).is_err());
    }

    #[test]
    fn profile_json_round_trip() {
        let p = StrategyProfile {
            bids: BidVector::from_units(&[10, 8]),
            fakes: vec![Money::ZERO],
            inclusion: Inclusion::Explicit(IncludedBlock::new(vec![
                BlockEntry::new(m(10), Owner::User(0)),
                BlockEntry::new(Money::ZERO, Owner::Fake(0)),
            ])),
        };
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<StrategyProfile>(&text).unwrap(), p);
    }

    fn arb_slot() -> impl Strategy<Value = (Owner, i64, i64, (i128, i128), i64)> {
        (
            prop_oneof![(0usize..3).prop_map(Owner::User), (0usize..2).prop_map(Owner::Fake)],
            0i64..8,
            0i64..8,
            (0i128..=4).prop_map(|n| (n, 4)),
            0i64..8,
        )
    }

    fn arb_case() -> impl Strategy<Value = (Scenario, ExpectedOutcome)> {
        (
            proptest::collection::vec(0i64..8, 3),
            proptest::collection::btree_set(0usize..3, 0..=3),
            any::<bool>(),
            proptest::collection::vec(arb_slot(), 0..5),
            0i64..20,
        )
            .prop_map(|(vals, coalition, miner, slots, mu)| {
                let values = BidVector::from_units(&vals);
                let s = Scenario::truthful(&values, coalition, miner).unwrap();
                let per_slot = slots
                    .into_iter()
                    .map(|(owner, bid, _, (qn, qd), pay)| SlotOutcome {
                        owner,
                        bid: m(bid),
                        confirm_prob: Rat::new(qn, qd),
                        conditional_payment: m(pay.min(bid)),
                    })
                    .collect();
                let out = ExpectedOutcome {
                    per_slot,
                    miner_revenue: Rat::from_integer(mu.into()),
                    burn: Rat::zero(),
                };
                (s, out)
            })
    }

    fn gammas() -> Vec<Gamma> {
        [(0, 1), (1, 4), (1, 2), (3, 4), (1, 1)]
            .iter()
            .map(|&(n, d)| Gamma::new(n, d).unwrap())
            .collect()
    }

    proptest! {
        #[test]
        fn gamma_zero_is_classical((s, out) in arb_case()) {
            let mut classical = if s.miner_in_coalition { out.miner_revenue.clone() } else { Rat::zero() };
            for slot in &out.per_slot {
                let v = match slot.owner {
                    Owner::User(i) if s.in_coalition(i) => s.true_values[i],
                    Owner::Fake(_) => Money::ZERO,
                    _ => continue,
                };
                classical += &slot.confirm_prob * &Rat::from_money(v - slot.conditional_payment);
            }
            prop_assert_eq!(expected_utility(&s, &out, Gamma::ZERO).unwrap(), classical);
        }

        #[test]
        fn utility_non_increasing_in_gamma((s, out) in arb_case()) {
            let us: Vec<Rat> = gammas().into_iter().map(|g| expected_utility(&s, &out, g).unwrap()).collect();
            for w in us.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
        }

        #[test]
        fn coalition_utility_is_additive((s, out) in arb_case(), g in 0usize..5) {
            let gamma = gammas()[g];
            let whole = expected_utility(&s, &out, gamma).unwrap();
            let miner_only = Scenario::new(s.true_values.clone(), s.bids.clone(), BTreeSet::new(), s.miner_in_coalition).unwrap();
            // Fakes sit with the miner term in this split.
            let mut parts = expected_utility(&miner_only, &out, gamma).unwrap();
            let no_fakes = ExpectedOutcome {
                per_slot: out.per_slot.iter().filter(|x| !x.is_fake()).cloned().collect(),
                miner_revenue: Rat::zero(),
                burn: Rat::zero(),
            };
            for &i in &s.coalition_users {
                let solo = Scenario::truthful(&s.bids, [i], false).unwrap();
                parts += expected_utility(&solo, &no_fakes, gamma).unwrap();
            }
            prop_assert_eq!(whole, parts);
        }

        #[test]
        fn truthful_utility_independent_of_gamma(
            vals in proptest::collection::vec(0i64..8, 0..5),
            coalition in proptest::collection::btree_set(0usize..5, 0..=2),
            miner in any::<bool>(),
            which in 0usize..4,
        ) {
            let values = BidVector::from_units(&vals);
            let coalition: BTreeSet<usize> = coalition.into_iter().filter(|&i| i < vals.len()).collect();
            let s = Scenario::truthful(&values, coalition, miner).unwrap();
            let mech = [
                Mechanism::second_price(3).unwrap(),
                Mechanism::burning_second_price(3, 2, 1, Gamma::ONE, 2).unwrap(),
                Mechanism::Solitary,
                Mechanism::solitary_or_posted_price(m(3)).unwrap(),
            ][which].clone();
            let p = honest_profile(&s, &mech);
            let base = profile_utility(&mech, &s, &p, Gamma::ZERO).unwrap();
            for g in gammas() {
                prop_assert_eq!(profile_utility(&mech, &s, &p, g).unwrap(), base.clone());
            }
        }
    }
}
