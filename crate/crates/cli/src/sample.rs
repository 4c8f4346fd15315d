//! Seeded sampling of a mechanism's confirmation rule, compared slot by slot
//! with the exact marginals.

use serde::Serialize;
use tfm_core::{BidVector, Error, Mechanism, Money, Owner, Rat, RealizedOutcome};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlotFrequency {
    pub owner: Owner,
    pub bid: Money,
    /// Exact confirmation probability.
    pub marginal: Rat,
    pub confirmed: u64,
    /// `confirmed / n`.
    pub frequency: Rat,
    pub within_3_sigma: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleReport {
    pub mechanism: Mechanism,
    pub bids: BidVector,
    pub n: u64,
    pub seed: u64,
    pub slots: Vec<SlotFrequency>,
    pub all_within_3_sigma: bool,
    /// The single draw when `n == 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<RealizedOutcome>,
}

/// Seed of draw `i`.
pub fn draw_seed(seed: u64, i: u64) -> u64 {
    seed.wrapping_add(i)
}

/// Draws `n` outcomes of the honest block for `bids` and tallies how often
/// each real slot is confirmed.
pub fn sample_run(m: &Mechanism, bids: &BidVector, n: u64, seed: u64) -> Result<SampleReport, Error> {
    if n == 0 {
        return Err(Error::ZeroSamples);
    }
    let block = m.include_honest(bids);
    let expected = m.evaluate(&block)?;
    let slots: Vec<_> = expected.per_slot.iter().filter(|s| !s.owner.is_pad()).collect();
    let mut counts = vec![0u64; slots.len()];
    let mut last = None;
    for i in 0..n {
        let draw = m.sample(&block, draw_seed(seed, i))?;
        for (count, slot) in counts.iter_mut().zip(&slots) {
            if draw.is_confirmed(slot.owner) {
                *count += 1;
            }
        }
        last = Some(draw);
    }
    let slots: Vec<SlotFrequency> = slots
        .iter()
        .zip(counts)
        .map(|(s, confirmed)| SlotFrequency {
            owner: s.owner,
            bid: s.bid,
            marginal: s.confirm_prob.clone(),
            confirmed,
            frequency: Rat::new(i128::from(confirmed), i128::from(n)),
            within_3_sigma: within_3_sigma(confirmed, n, &s.confirm_prob),
        })
        .collect();
    Ok(SampleReport {
        mechanism: m.clone(),
        bids: bids.clone(),
        n,
        seed,
        all_within_3_sigma: slots.iter().all(|s| s.within_3_sigma),
        slots,
        outcome: if n == 1 { last } else { None },
    })
}

/// `|k - n p| <= 3 sqrt(n p (1 - p))`, decided exactly by squaring.
pub fn within_3_sigma(k: u64, n: u64, p: &Rat) -> bool {
    let n_r = Rat::from_integer(i128::from(n));
    let dev = Rat::from_integer(i128::from(k)) - &n_r * p;
    let var = &n_r * p * (Rat::one() - p.clone());
    &dev * &dev <= Rat::from_integer(9) * var
}

#[cfg(test)]
mod tests {
    use super::*;
    use tfm_core::Gamma;

    #[test]
    fn zero_samples_is_an_error() {
        let err = sample_run(&Mechanism::Trivial, &BidVector::from_units(&[1]), 0, 1).unwrap_err();
        assert_eq!(err, Error::ZeroSamples);
    }

    #[test]
    fn deterministic_frequencies_are_exact() {
        let m = Mechanism::second_price(3).unwrap();
        let r = sample_run(&m, &BidVector::from_units(&[10, 8, 5]), 50, 9).unwrap();
        for s in &r.slots {
            assert!(s.confirmed == 0 || s.confirmed == 50);
            assert_eq!(s.frequency, s.marginal);
        }
        assert!(r.all_within_3_sigma);
    }

    #[test]
    fn single_draw_is_echoed() {
        let m = Mechanism::burning_second_price(3, 2, 1, Gamma::ONE, 2).unwrap();
        let r = sample_run(&m, &BidVector::from_units(&[10, 8, 5]), 1, 42).unwrap();
        let draw = r.outcome.unwrap();
        assert_eq!(draw.seed, 42);
        assert_eq!(draw, m.sample(&m.include_honest(&r.bids), 42).unwrap());
    }

    #[test]
    fn three_sigma_bounds() {
        let half = Rat::new(1, 2);
        // n = 100, sigma = 5.
        assert!(within_3_sigma(65, 100, &half));
        assert!(!within_3_sigma(66, 100, &half));
        assert!(within_3_sigma(35, 100, &half));
        assert!(!within_3_sigma(34, 100, &half));
        assert!(within_3_sigma(0, 10, &Rat::zero()));
        assert!(!within_3_sigma(1, 10, &Rat::zero()));
    }
}
