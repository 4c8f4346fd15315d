//! The built-in transaction fee mechanisms.
//!
//! Each mechanism is an honest inclusion rule (what a faithful miner puts in
//! the block) and a positional rule applied by the chain to whatever block it
//! is handed: confirmation marginals, conditional payments, miner revenue and
//! burn. All honest inclusion rules select a prefix of the ranked mempool.
//!
//! The positional rule works on integer micro-units with explicit common
//! denominators so the auditor can reuse it without rational arithmetic;
//! [`Mechanism::evaluate`] lifts the result into exact [`Rat`]s.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bids::BidVector;
use crate::error::{Error, Result};
use crate::gamma::Gamma;
use crate::money::Money;
use crate::outcome::{
    rank_cmp, BlockEntry, ExpectedOutcome, IncludedBlock, Owner, Payment, RealizedOutcome, SlotOutcome,
};
use crate::rat::Rat;

/// Parameters of the burning second-price auction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BurningParams {
    pub block_size: usize,
    /// Included bids eligible for confirmation.
    pub k: usize,
    /// Included price-setting bids that are never confirmed.
    pub k_prime: usize,
    pub gamma: Gamma,
    /// Largest coalition the instance is tuned against.
    pub c: usize,
}

impl BurningParams {
    /// Number of bids confirmed out of the top `k`: `floor(gamma * k / c)`.
    pub fn confirmed_count(&self) -> usize {
        self.gamma.floor_scaled(self.k as u64, self.c as u64) as usize
    }

    fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(Error::InvalidMechanism(format!("burning_second_price: {why}")));
        if self.c == 0 {
            return bad("c must be at least 1".into());
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.k + self.k_prime != self.block_size {
            return bad(format!(
                "k + k_prime = {} but block_size = {}",
                self.k + self.k_prime,
                self.block_size
            ));
        }
        let cap = self.confirmed_count();
        if self.k_prime < 1 || self.k_prime > cap {
            return bad(format!(
                "k_prime = {} must satisfy 1 <= k_prime <= floor(gamma*k/c) = {cap}",
                self.k_prime
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MechanismRepr", into = "MechanismRepr")]
pub enum Mechanism {
    /// Top `B` included and confirmed, each pays its bid, miner keeps all.
    FirstPrice { block_size: Option<usize> },
    /// Top `B` included, top `B-1` confirmed paying the `B`-th price, miner keeps all.
    SecondPrice { block_size: usize },
    /// Every bid at least `r` included and confirmed, paying `r` to the miner.
    PostedPriceNoBurn { reserve: Money },
    /// As posted price, but every payment is burnt.
    PostedPriceBurnAll {
        reserve: Money,
        block_size: Option<usize>,
    },
    /// Everything included; only the top bid is confirmed. It pays nothing
    /// when alone in the block and its own bid otherwise.
    FirstPriceOrFree,
    BurningSecondPrice(BurningParams),
    /// Top two included; the higher is confirmed and pays the lower, which
    /// the miner receives.
    Solitary,
    /// Top two plus every bid at least `r` included. The top bid and every
    /// bid at least `r` are confirmed, all pay `min(b2, r)`, the miner gets
    /// `min(b2, r)` and the rest is burnt.
    SolitaryOrPostedPrice { reserve: Money },
    /// Confirms nothing.
    Trivial,
}

impl Mechanism {
    pub fn first_price(block_size: Option<usize>) -> Result<Self> {
        let m = Mechanism::FirstPrice { block_size };
        m.validate()?;
        Ok(m)
    }

    pub fn second_price(block_size: usize) -> Result<Self> {
        let m = Mechanism::SecondPrice { block_size };
        m.validate()?;
        Ok(m)
    }

    pub fn posted_price_no_burn(reserve: Money) -> Result<Self> {
        let m = Mechanism::PostedPriceNoBurn { reserve };
        m.validate()?;
        Ok(m)
    }

    pub fn posted_price_burn_all(reserve: Money, block_size: Option<usize>) -> Result<Self> {
        let m = Mechanism::PostedPriceBurnAll { reserve, block_size };
        m.validate()?;
        Ok(m)
    }

    pub fn burning_second_price(
        block_size: usize,
        k: usize,
        k_prime: usize,
        gamma: Gamma,
        c: usize,
    ) -> Result<Self> {
        let m = Mechanism::BurningSecondPrice(BurningParams {
            block_size,
            k,
            k_prime,
            gamma,
            c,
        });
        m.validate()?;
        Ok(m)
    }

    pub fn solitary_or_posted_price(reserve: Money) -> Result<Self> {
        let m = Mechanism::SolitaryOrPostedPrice { reserve };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let reserve_ok = |r: &Money| {
            if r.is_negative() {
                Err(Error::InvalidMechanism(format!("negative reserve price {r}")))
            } else {
                Ok(())
            }
        };
        match self {
            Mechanism::FirstPrice { block_size: Some(0) }
            | Mechanism::PostedPriceBurnAll {
                block_size: Some(0), ..
            } => Err(Error::InvalidMechanism("block_size must be at least 1".into())),
            Mechanism::SecondPrice { block_size } if *block_size < 2 => Err(Error::InvalidMechanism(
                "second_price needs block_size >= 2 (one confirmed, one price-setting)".into(),
            )),
            Mechanism::PostedPriceNoBurn { reserve }
            | Mechanism::PostedPriceBurnAll { reserve, .. }
            | Mechanism::SolitaryOrPostedPrice { reserve } => reserve_ok(reserve),
            Mechanism::BurningSecondPrice(p) => p.validate(),
            _ => Ok(()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Mechanism::FirstPrice { .. } => "first_price",
            Mechanism::SecondPrice { .. } => "second_price",
            Mechanism::PostedPriceNoBurn { .. } => "posted_price_no_burn",
            Mechanism::PostedPriceBurnAll { .. } => "posted_price_burn_all",
            Mechanism::FirstPriceOrFree => "first_price_or_free",
            Mechanism::BurningSecondPrice(_) => "burning_second_price",
            Mechanism::Solitary => "solitary",
            Mechanism::SolitaryOrPostedPrice { .. } => "solitary_or_posted_price",
            Mechanism::Trivial => "trivial",
        }
    }

    /// Short human label including parameters.
    pub fn label(&self) -> String {
        let bs = |b: &Option<usize>| b.map_or("inf".to_string(), |b| b.to_string());
        match self {
            Mechanism::FirstPrice { block_size } => format!("first_price(B={})", bs(block_size)),
            Mechanism::SecondPrice { block_size } => format!("second_price(B={block_size})"),
            Mechanism::PostedPriceNoBurn { reserve } => format!("posted_price_no_burn(r={reserve})"),
            Mechanism::PostedPriceBurnAll { reserve, block_size } => {
                format!("posted_price_burn_all(r={reserve}, B={})", bs(block_size))
            }
            Mechanism::FirstPriceOrFree => "first_price_or_free".into(),
            Mechanism::BurningSecondPrice(p) => format!(
                "burning_second_price(B={}, k={}, k'={}, gamma={}, c={})",
                p.block_size, p.k, p.k_prime, p.gamma, p.c
            ),
            Mechanism::Solitary => "solitary".into(),
            Mechanism::SolitaryOrPostedPrice { reserve } => format!("solitary_or_posted_price(r={reserve})"),
            Mechanism::Trivial => "trivial".into(),
        }
    }

    /// Most non-pad entries a valid block may hold; `None` is unbounded.
    ///
    /// The solitary mechanism only ever looks at the two highest entries, so
    /// its blocks are capped at two: anything further down is unconfirmed and
    /// influences nothing.
    pub fn capacity(&self) -> Option<usize> {
        match self {
            Mechanism::FirstPrice { block_size } | Mechanism::PostedPriceBurnAll { block_size, .. } => *block_size,
            Mechanism::SecondPrice { block_size } => Some(*block_size),
            Mechanism::BurningSecondPrice(p) => Some(p.block_size),
            Mechanism::Solitary => Some(2),
            Mechanism::PostedPriceNoBurn { .. }
            | Mechanism::FirstPriceOrFree
            | Mechanism::SolitaryOrPostedPrice { .. }
            | Mechanism::Trivial => None,
        }
    }

    /// Length an under-full block is zero-padded to.
    pub fn pad_len(&self) -> usize {
        match self {
            Mechanism::SecondPrice { block_size } => *block_size,
            Mechanism::BurningSecondPrice(p) => p.block_size,
            Mechanism::Solitary | Mechanism::SolitaryOrPostedPrice { .. } => 2,
            _ => 0,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            Mechanism::BurningSecondPrice(p) => p.confirmed_count() == p.k,
            _ => true,
        }
    }

    /// Whether the miner's revenue can fall short of total payments.
    pub fn burns(&self) -> bool {
        matches!(
            self,
            Mechanism::PostedPriceBurnAll { .. }
                | Mechanism::BurningSecondPrice(_)
                | Mechanism::SolitaryOrPostedPrice { .. }
        )
    }

    /// Whether honest blocks can contain included-but-unconfirmed bids that
    /// set prices or revenue.
    pub fn includes_unconfirmed_price_setters(&self) -> bool {
        matches!(
            self,
            Mechanism::SecondPrice { .. }
                | Mechanism::FirstPriceOrFree
                | Mechanism::BurningSecondPrice(_)
                | Mechanism::Solitary
                | Mechanism::SolitaryOrPostedPrice { .. }
        )
    }

    /// Upper bound on the expected number of confirmed entries in any block.
    pub fn max_confirmations(&self) -> Option<usize> {
        match self {
            Mechanism::FirstPrice { block_size } | Mechanism::PostedPriceBurnAll { block_size, .. } => *block_size,
            Mechanism::SecondPrice { block_size } => Some(block_size - 1),
            Mechanism::BurningSecondPrice(p) => Some(p.confirmed_count()),
            Mechanism::FirstPriceOrFree | Mechanism::Solitary => Some(1),
            Mechanism::Trivial => Some(0),
            Mechanism::PostedPriceNoBurn { .. } | Mechanism::SolitaryOrPostedPrice { .. } => None,
        }
    }

    /// Prices that a confirmed bid can be charged regardless of the other
    /// bids (the reserve, for posted-price variants).
    pub fn reference_prices(&self) -> Vec<Money> {
        match self {
            Mechanism::PostedPriceNoBurn { reserve }
            | Mechanism::PostedPriceBurnAll { reserve, .. }
            | Mechanism::SolitaryOrPostedPrice { reserve } => vec![*reserve],
            _ => Vec::new(),
        }
    }

    /// Largest confirmation probability any single entry can get, as a
    /// numerator over [`Mechanism::prob_denom`].
    pub fn max_prob_num(&self) -> u64 {
        match self {
            Mechanism::BurningSecondPrice(p) => p.confirmed_count() as u64,
            Mechanism::Trivial => 0,
            _ => 1,
        }
    }

    /// How many entries can simultaneously hold the largest confirmation
    /// probability; `None` when unbounded.
    pub fn max_confirmed_slots(&self) -> Option<usize> {
        match self {
            Mechanism::BurningSecondPrice(p) => Some(p.k),
            _ => self.max_confirmations(),
        }
    }

    /// Whether the entry at rank `j` of a ranked block is inert: never
    /// confirmed, and removing it changes no other entry's confirmation or
    /// payment, nor the miner revenue or burn. An inert entry stays inert when
    /// other bids join the block, or when its own bid drops and it still ranks
    /// below every entry it ranked below before.
    pub fn is_inert(&self, ranked: &[i64], j: usize) -> bool {
        match self {
            Mechanism::PostedPriceNoBurn { reserve } | Mechanism::PostedPriceBurnAll { reserve, .. } => {
                ranked[j] < reserve.micros()
            }
            Mechanism::SolitaryOrPostedPrice { reserve } => j >= 2 && ranked[j] < reserve.micros(),
            Mechanism::FirstPriceOrFree => j >= 2,
            Mechanism::Trivial => true,
            _ => false,
        }
    }

    /// Common denominator of every confirmation probability.
    pub fn prob_denom(&self) -> u64 {
        match self {
            Mechanism::BurningSecondPrice(p) => p.k as u64,
            _ => 1,
        }
    }

    /// Common denominator of miner revenue and burn, in micro-units.
    pub fn revenue_denom(&self) -> u64 {
        match self {
            Mechanism::BurningSecondPrice(p) => p.gamma.denom(),
            _ => 1,
        }
    }

    /// Length of the ranked-mempool prefix a faithful miner includes.
    pub fn honest_prefix(&self, ranked_bids: &[i64]) -> usize {
        let m = ranked_bids.len();
        let at_least = |r: Money| ranked_bids.iter().take_while(|&&b| b >= r.micros()).count();
        let cap = |b: Option<usize>| b.map_or(m, |b| b.min(m));
        match self {
            Mechanism::FirstPrice { block_size } => cap(*block_size),
            Mechanism::SecondPrice { block_size } => m.min(*block_size),
            Mechanism::BurningSecondPrice(p) => m.min(p.block_size),
            Mechanism::PostedPriceNoBurn { reserve } => at_least(*reserve),
            Mechanism::PostedPriceBurnAll { reserve, block_size } => {
                let n = at_least(*reserve);
                block_size.map_or(n, |b| n.min(b))
            }
            Mechanism::FirstPriceOrFree => m,
            Mechanism::Solitary => m.min(2),
            Mechanism::SolitaryOrPostedPrice { reserve } => m.min(2).max(at_least(*reserve)),
            Mechanism::Trivial => 0,
        }
    }

    /// Applies the confirmation, payment and revenue rules to a ranked block.
    ///
    /// `ranked` holds the non-pad bids in rank order. Output positions beyond
    /// `ranked.len()` are pads: never confirmed, never paying.
    pub(crate) fn positional(&self, ranked: &[i64], out: &mut Positional) {
        let m = ranked.len();
        let len = m.max(self.pad_len());
        out.reset(len, self.prob_denom(), self.revenue_denom());
        let bid_at = |j: usize| if j < m { ranked[j] } else { 0 };
        match self {
            Mechanism::FirstPrice { .. } => {
                for (j, &b) in ranked.iter().enumerate() {
                    out.confirm(j, 1, b);
                    out.revenue_num += i128::from(b);
                }
            }
            Mechanism::SecondPrice { block_size } => {
                let price = bid_at(block_size - 1);
                for j in 0..(block_size - 1).min(m) {
                    out.confirm(j, 1, price);
                    out.revenue_num += i128::from(price);
                }
            }
            Mechanism::PostedPriceNoBurn { reserve } | Mechanism::PostedPriceBurnAll { reserve, .. } => {
                let r = reserve.micros();
                for (j, &b) in ranked.iter().enumerate() {
                    if b >= r {
                        out.confirm(j, 1, r);
                        out.collected += i128::from(r);
                    }
                }
                if matches!(self, Mechanism::PostedPriceNoBurn { .. }) {
                    out.revenue_num = out.collected;
                } else {
                    out.burn_num = out.collected;
                }
                out.collected = 0;
            }
            Mechanism::FirstPriceOrFree => {
                if m >= 1 {
                    let price = if m == 1 { 0 } else { ranked[0] };
                    out.confirm(0, 1, price);
                    out.revenue_num = i128::from(price);
                }
            }
            Mechanism::BurningSecondPrice(p) => {
                let confirmed = p.confirmed_count() as u64;
                let price = bid_at(p.k);
                for j in 0..p.k.min(m) {
                    out.confirm(j, confirmed, price);
                }
                let setters: i128 = (p.k..p.block_size).map(|j| i128::from(bid_at(j))).sum();
                let g = p.gamma;
                out.revenue_num = i128::from(g.numer()) * setters;
                // Expected collection is floor(gamma k / c) * b_{k+1}; whatever
                // the miner does not receive is burnt.
                out.burn_num = i128::from(confirmed) * i128::from(price) * i128::from(g.denom()) - out.revenue_num;
            }
            Mechanism::Solitary => {
                if m >= 1 {
                    let price = bid_at(1);
                    out.confirm(0, 1, price);
                    out.revenue_num = i128::from(price);
                }
            }
            Mechanism::SolitaryOrPostedPrice { reserve } => {
                if m >= 1 {
                    let r = reserve.micros();
                    let price = bid_at(1).min(r);
                    let mut count: i128 = 0;
                    for (j, &b) in ranked.iter().enumerate() {
                        if j == 0 || b >= r {
                            out.confirm(j, 1, price);
                            count += 1;
                        }
                    }
                    out.revenue_num = i128::from(price);
                    out.burn_num = (count - 1) * i128::from(price);
                }
            }
            Mechanism::Trivial => {}
        }
    }

    /// Honest inclusion over the mempool `bids`.
    pub fn include_honest(&self, bids: &BidVector) -> IncludedBlock {
        let mempool = bids
            .iter()
            .enumerate()
            .map(|(i, b)| BlockEntry::new(b, Owner::User(i)))
            .collect();
        self.include_honest_mempool(mempool)
    }

    /// Honest inclusion over an arbitrary mempool, fakes included. Pads in
    /// the input are ignored.
    pub fn include_honest_mempool(&self, mut mempool: Vec<BlockEntry>) -> IncludedBlock {
        mempool.retain(|e| !e.is_padding_zero());
        mempool.sort_by(rank_cmp);
        let ranked: Vec<i64> = mempool.iter().map(|e| e.bid.micros()).collect();
        let take = self.honest_prefix(&ranked);
        mempool.truncate(take);
        let mut entries = mempool;
        let pads = self.pad_len().saturating_sub(entries.len());
        entries.extend(std::iter::repeat_n(BlockEntry::new(Money::ZERO, Owner::Pad), pads));
        IncludedBlock::new(entries)
    }

    pub fn check_block(&self, block: &IncludedBlock) -> Result<()> {
        if let Some(capacity) = self.capacity() {
            let len = block.real_len();
            if len > capacity {
                return Err(Error::BlockTooLarge { len, capacity });
            }
        }
        if let Some(e) = block.entries.iter().find(|e| e.bid.is_negative()) {
            return Err(Error::InvalidProfile(format!("negative bid {} in block", e.bid)));
        }
        Ok(())
    }

    /// Exact outcome distribution summary for any valid block.
    pub fn evaluate(&self, block: &IncludedBlock) -> Result<ExpectedOutcome> {
        self.check_block(block)?;
        let ranked = block.ranked_entries();
        let bids: Vec<i64> = ranked.iter().map(|e| e.bid.micros()).collect();
        let mut pos = Positional::default();
        self.positional(&bids, &mut pos);
        let prob_den = i128::from(pos.prob_den);
        let per_slot = (0..pos.len())
            .map(|j| {
                let (owner, bid) = match ranked.get(j) {
                    Some(e) => (e.owner, e.bid),
                    None => (Owner::Pad, Money::ZERO),
                };
                SlotOutcome {
                    owner,
                    bid,
                    confirm_prob: Rat::new(i128::from(pos.prob_num[j]), prob_den),
                    conditional_payment: Money::from_micros(pos.pay[j]),
                }
            })
            .collect();
        let rev_den = i128::from(pos.revenue_den);
        Ok(ExpectedOutcome {
            per_slot,
            miner_revenue: Rat::from_scaled_micros(pos.revenue_num, rev_den),
            burn: Rat::from_scaled_micros(pos.burn_num, rev_den),
        })
    }

    /// One draw of the confirmation rule, reproducible from `seed`.
    ///
    /// Randomness comes from ChaCha8 seeded with `seed`; the randomized
    /// burning auction confirms a uniform subset of `floor(gamma k / c)` of
    /// its top `k` positions. Pads drawn into the subset are dropped.
    pub fn sample(&self, block: &IncludedBlock, seed: u64) -> Result<RealizedOutcome> {
        self.check_block(block)?;
        let ranked = block.ranked_entries();
        let bids: Vec<i64> = ranked.iter().map(|e| e.bid.micros()).collect();
        let mut pos = Positional::default();
        self.positional(&bids, &mut pos);

        let positions: Vec<usize> = match self {
            Mechanism::BurningSecondPrice(p) if !self.is_deterministic() => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut drawn = index::sample(&mut rng, p.k, p.confirmed_count()).into_vec();
                drawn.sort_unstable();
                drawn
            }
            _ => (0..pos.len()).filter(|&j| pos.prob_num[j] == pos.prob_den).collect(),
        };
        let mut confirmed = Vec::new();
        let mut payments = Vec::new();
        let mut collected = Money::ZERO;
        for j in positions.into_iter().filter(|&j| j < ranked.len()) {
            let amount = Money::from_micros(pos.pay[j]);
            confirmed.push(ranked[j].owner);
            payments.push(Payment {
                owner: ranked[j].owner,
                amount,
            });
            collected += amount;
        }
        let miner_revenue = Rat::from_scaled_micros(pos.revenue_num, i128::from(pos.revenue_den));
        let burn = Rat::from_money(collected) - &miner_revenue;
        Ok(RealizedOutcome {
            confirmed,
            payments,
            miner_revenue,
            burn,
            seed,
        })
    }
}

/// Scratch output of [`Mechanism::positional`]: integer numerators over
/// per-mechanism common denominators.
#[derive(Clone, Debug, Default)]
pub(crate) struct Positional {
    pub prob_den: u64,
    pub prob_num: Vec<u64>,
    /// Conditional payment in micro-units.
    pub pay: Vec<i64>,
    pub revenue_den: u64,
    /// Miner revenue, micro-units times `revenue_den`.
    pub revenue_num: i128,
    /// Burn, micro-units times `revenue_den`.
    pub burn_num: i128,
    collected: i128,
}

impl Positional {
    fn reset(&mut self, len: usize, prob_den: u64, revenue_den: u64) {
        self.prob_den = prob_den;
        self.prob_num.clear();
        self.prob_num.resize(len, 0);
        self.pay.clear();
        self.pay.resize(len, 0);
        self.revenue_den = revenue_den;
        self.revenue_num = 0;
        self.burn_num = 0;
        self.collected = 0;
    }

    fn confirm(&mut self, j: usize, prob_num: u64, pay: i64) {
        self.prob_num[j] = prob_num;
        self.pay[j] = pay;
    }

    pub fn len(&self) -> usize {
        self.prob_num.len()
    }
}

/// Free-function form of [`Mechanism::include_honest`].
pub fn include_honest(m: &Mechanism, bids: &BidVector) -> IncludedBlock {
    m.include_honest(bids)
}

/// Free-function form of [`Mechanism::evaluate`].
pub fn evaluate(m: &Mechanism, block: &IncludedBlock) -> Result<ExpectedOutcome> {
    m.evaluate(block)
}

/// Free-function form of [`Mechanism::sample`].
pub fn sample(m: &Mechanism, block: &IncludedBlock, seed: u64) -> Result<RealizedOutcome> {
    m.sample(block, seed)
}

/// Wire form: `{"kind": "burning_second_price", "block_size": 4, ...}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum MechanismRepr {
    FirstPrice {
        #[serde(default)]
        block_size: Option<usize>,
    },
    SecondPrice {
        block_size: usize,
    },
    PostedPriceNoBurn {
        reserve: Money,
    },
    PostedPriceBurnAll {
        reserve: Money,
        #[serde(default)]
        block_size: Option<usize>,
    },
    FirstPriceOrFree {},
    BurningSecondPrice {
        block_size: usize,
        k: usize,
        k_prime: usize,
        gamma: Gamma,
        c: usize,
    },
    Solitary {},
    SolitaryOrPostedPrice {
        reserve: Money,
    },
    Trivial {},
}

impl TryFrom<MechanismRepr> for Mechanism {
    type Error = Error;

    fn try_from(spec: MechanismRepr) -> Result<Self> {
        let m = match spec {
            MechanismRepr::FirstPrice { block_size } => Mechanism::FirstPrice { block_size },
            MechanismRepr::SecondPrice { block_size } => Mechanism::SecondPrice { block_size },
            MechanismRepr::PostedPriceNoBurn { reserve } => Mechanism::PostedPriceNoBurn { reserve },
            MechanismRepr::PostedPriceBurnAll { reserve, block_size } => {
                Mechanism::PostedPriceBurnAll { reserve, block_size }
            }
            MechanismRepr::FirstPriceOrFree {} => Mechanism::FirstPriceOrFree,
            MechanismRepr::BurningSecondPrice {
                block_size,
                k,
                k_prime,
                gamma,
                c,
            } => Mechanism::BurningSecondPrice(BurningParams {
                block_size,
                k,
                k_prime,
                gamma,
                c,
            }),
            MechanismRepr::Solitary {} => Mechanism::Solitary,
            MechanismRepr::SolitaryOrPostedPrice { reserve } => Mechanism::SolitaryOrPostedPrice { reserve },
            MechanismRepr::Trivial {} => Mechanism::Trivial,
        };
        m.validate()?;
        Ok(m)
    }
}

impl From<Mechanism> for MechanismRepr {
    fn from(m: Mechanism) -> Self {
        match m {
            Mechanism::FirstPrice { block_size } => MechanismRepr::FirstPrice { block_size },
            Mechanism::SecondPrice { block_size } => MechanismRepr::SecondPrice { block_size },
            Mechanism::PostedPriceNoBurn { reserve } => MechanismRepr::PostedPriceNoBurn { reserve },
            Mechanism::PostedPriceBurnAll { reserve, block_size } => {
                MechanismRepr::PostedPriceBurnAll { reserve, block_size }
            }
            Mechanism::FirstPriceOrFree => MechanismRepr::FirstPriceOrFree {},
            Mechanism::BurningSecondPrice(p) => MechanismRepr::BurningSecondPrice {
                block_size: p.block_size,
                k: p.k,
                k_prime: p.k_prime,
                gamma: p.gamma,
                c: p.c,
            },
            Mechanism::Solitary => MechanismRepr::Solitary {},
            Mechanism::SolitaryOrPostedPrice { reserve } => MechanismRepr::SolitaryOrPostedPrice { reserve },
            Mechanism::Trivial => MechanismRepr::Trivial {},
        }
    }
}
