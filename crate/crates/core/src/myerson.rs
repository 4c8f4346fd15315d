//! Allocation monotonicity and critical-bid payments.
//!
//! For a deterministic mechanism a truthful user's payment must be the
//! smallest bid that still gets it confirmed, given everyone else's bids.
//! These checks probe that directly on concrete bid vectors. The last helper
//! scans miner revenue over a set of vectors.

use serde::{Deserialize, Serialize};

use crate::bids::BidVector;
use crate::error::{Error, Result};
use crate::mechanisms::Mechanism;
use crate::money::Money;
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub bid: Money,
    pub confirm_prob: Rat,
}

/// Confirmation probability of slot `slot` as its own bid varies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationCurve {
    pub slot: usize,
    /// Everyone else's bids; slot `slot` is inserted at that position.
    pub context: BidVector,
    pub points: Vec<CurvePoint>,
}

/// Confirmation probability of slot `i` when bidding `t` against `context`.
pub fn confirm_prob_at(m: &Mechanism, context: &BidVector, i: usize, t: Money) -> Result<Rat> {
    let bids = context.insert_slot(i, t)?;
    Ok(m.evaluate(&m.include_honest(&bids))?.confirm_prob_of(i))
}

pub fn allocation_curve(m: &Mechanism, context: &BidVector, i: usize, grid: &[Money]) -> Result<AllocationCurve> {
    let mut grid = grid.to_vec();
    grid.sort();
    grid.dedup();
    let points = grid
        .into_iter()
        .map(|bid| {
            Ok(CurvePoint {
                bid,
                confirm_prob: confirm_prob_at(m, context, i, bid)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AllocationCurve {
        slot: i,
        context: context.clone(),
        points,
    })
}

/// Two adjacent curve points where raising the bid lowered the probability.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneViolation {
    /// Index of the later point.
    pub index: usize,
    pub before: CurvePoint,
    pub after: CurvePoint,
}

pub fn check_monotone(curve: &AllocationCurve) -> Option<MonotoneViolation> {
    curve.points.windows(2).enumerate().find_map(|(k, w)| {
        (w[1].confirm_prob < w[0].confirm_prob).then(|| MonotoneViolation {
            index: k + 1,
            before: w[0].clone(),
            after: w[1].clone(),
        })
    })
}

fn confirmed_at(m: &Mechanism, context: &BidVector, i: usize, t: Money) -> Result<bool> {
    Ok(confirm_prob_at(m, context, i, t)? == Rat::one())
}

/// Smallest bid in `[0, hi]` (to the micro-unit) at which slot `i` is
/// confirmed against `context`, or `None` if it is not confirmed even at `hi`.
///
/// Binary search assumes a monotone allocation; the answer is then probed
/// against the context bids and their neighbours, and any disagreement is
/// reported as [`Error::NonMonotone`].
pub fn critical_bid(m: &Mechanism, context: &BidVector, i: usize, hi: Money) -> Result<Option<Money>> {
    if !m.is_deterministic() {
        return Err(Error::NotDeterministic("critical_bid".into()));
    }
    if hi.is_negative() {
        return Err(Error::NegativeBid(hi.to_string(), i));
    }
    if !confirmed_at(m, context, i, hi)? {
        return Ok(None);
    }
    let (mut lo, mut top) = (0i64, hi.micros());
    // Invariant: confirmed at `top`; every bid below `lo` is unconfirmed.
    while lo < top {
        let mid = lo + (top - lo) / 2;
        if confirmed_at(m, context, i, Money::from_micros(mid))? {
            top = mid;
        } else {
            lo = mid + 1;
        }
    }
    let z = Money::from_micros(top);
    let mut probes = vec![Money::ZERO, hi];
    for b in context.iter().chain(m.reference_prices()) {
        for d in [-1, 0, 1] {
            probes.push(b + Money::from_micros(d));
        }
    }
    for p in probes.into_iter().filter(|p| !p.is_negative() && *p <= hi) {
        if confirmed_at(m, context, i, p)? != (p >= z) {
            return Err(Error::NonMonotone {
                slot: i,
                detail: format!("threshold {z} but bid {p} disagrees"),
            });
        }
    }
    Ok(Some(z))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaymentCheck {
    pub slot: usize,
    pub bid: Money,
    pub payment: Money,
    pub critical_bid: Option<Money>,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaymentRuleReport {
    pub mechanism: Mechanism,
    pub bids: BidVector,
    pub checks: Vec<PaymentCheck>,
    pub mismatches: usize,
}

impl PaymentRuleReport {
    pub fn matches(&self) -> bool {
        self.mismatches == 0
    }
}

/// Compares each confirmed slot's payment with its critical bid.
///
/// Bids are discrete, so when the threshold sits exactly on another bid that
/// wins the tie, the smallest confirming bid is one micro-unit above the
/// price. A payment equal to a competing bid and exactly one micro-unit below
/// the critical bid is therefore accepted as a match.
pub fn check_payment_rule(m: &Mechanism, bids: &BidVector) -> Result<PaymentRuleReport> {
    if !m.is_deterministic() {
        return Err(Error::NotDeterministic("check_payment_rule".into()));
    }
    let outcome = m.evaluate(&m.include_honest(bids))?;
    let mut checks = Vec::new();
    for i in 0..bids.len() {
        let Some(slot) = outcome.slot(crate::outcome::Owner::User(i)) else {
            continue;
        };
        if slot.confirm_prob != Rat::one() {
            continue;
        }
        let context = bids.without_slot(i)?;
        let bid = bids.as_slice()[i];
        let z = critical_bid(m, &context, i, bid)?;
        let p = slot.conditional_payment;
        let matches = match z {
            Some(z) => p == z || (p + Money::MICRO == z && context.iter().any(|b| b == p)),
            None => false,
        };
        checks.push(PaymentCheck {
            slot: i,
            bid,
            payment: p,
            critical_bid: z,
            matches,
        });
    }
    let mismatches = checks.iter().filter(|c| !c.matches).count();
    Ok(PaymentRuleReport {
        mechanism: m.clone(),
        bids: bids.clone(),
        checks,
        mismatches,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroRevenueReport {
    pub mechanism: Mechanism,
    pub vectors_checked: usize,
    pub max_revenue: Rat,
    /// How many vectors attain the maximum.
    pub attained_count: usize,
    /// The first few of them, in input order.
    pub attained_by: Vec<BidVector>,
}

impl ZeroRevenueReport {
    pub fn always_zero(&self) -> bool {
        self.max_revenue.is_zero()
    }
}

const ATTAINED_SHOWN: usize = 5;

/// Largest honest miner revenue over `vectors`.
pub fn zero_revenue_scan(m: &Mechanism, vectors: &[BidVector]) -> Result<ZeroRevenueReport> {
    let mut max = Rat::zero();
    let mut attained = Vec::new();
    let mut count = 0;
    for v in vectors {
        let mu = m.evaluate(&m.include_honest(v))?.miner_revenue;
        if mu > max {
            max = mu.clone();
            attained.clear();
            count = 0;
        }
        if mu == max {
            count += 1;
            if attained.len() < ATTAINED_SHOWN {
                attained.push(v.clone());
            }
        }
    }
    Ok(ZeroRevenueReport {
        mechanism: m.clone(),
        vectors_checked: vectors.len(),
        max_revenue: max,
        attained_count: count,
        attained_by: attained,
    })
}
