//! Brute-force incentive audits over finite grids.
//!
//! Each audit walks a list of bid vectors (everyone's true value, bidding
//! truthfully) and, for every strategic player the property cares about,
//! every deviation in a finite space:
//!
//! * UIC: one user bids any candidate value and may inject up to
//!   `max_fakes` fake bids; the miner is honest.
//! * MIC: the miner publishes any block made of a subset of the real bids
//!   plus up to `max_fakes` fakes, within capacity.
//! * SCP(c): the miner and 1..=c users publish any block made of a subset of
//!   the outsiders' bids, each member either left out or included at any
//!   candidate bid, plus up to `max_fakes` fakes, within capacity.
//!
//! Deviated values come from [`candidate_bids`]. Utilities are compared
//! exactly: the search runs on integers scaled by a per-mechanism common
//! denominator, and every reported witness is re-derived through
//! [`crate::utility::profile_utility`].
//!
//! Two reductions keep the search tractable without dropping deviations.
//! Work items that differ only by a permutation of outsider values between
//! consecutive coalition members are exact relabelings of one another and
//! are audited once. And a coalition's utility never exceeds the best
//! confirmed value its block can hold (outsiders pay at most their bid, the
//! burn is non-negative), so subtrees whose bound does not beat the honest
//! utility are counted but not evaluated.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bids::{BidVector, Scenario};
use crate::error::{Error, Result};
use crate::gamma::Gamma;
use crate::mechanisms::{Mechanism, Positional};
use crate::money::Money;
use crate::outcome::{BlockEntry, IncludedBlock, Owner};
use crate::rat::Rat;
use crate::utility::{honest_profile, profile_utility, Inclusion, StrategyProfile};

/// Work items handed to the thread pool at a time. Early stopping happens at
/// chunk boundaries, so this (not the thread count) fixes report contents.
const CHUNK: usize = 64;

/// Tie key offset for fake entries: every user ranks ahead of every fake.
const FAKE_KEY: u32 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    /// Offset around bids and payments in the candidate grid.
    pub epsilon: Money,
    pub max_fakes: usize,
    pub max_vector_len: usize,
    /// Largest mempool for which miner inclusion is enumerated.
    pub exhaustive_inclusion_limit: usize,
    /// Discount factor of the utility being audited.
    pub gamma: Gamma,
    /// Values added to every candidate grid.
    pub extra_candidates: Vec<Money>,
    /// Stop once this many witnesses are collected; 0 keeps going.
    pub max_witnesses: usize,
    /// Skip subtrees the welfare bound rules out. Disabling it only costs time.
    pub prune: bool,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            epsilon: Money::from_micros(250_000),
            max_fakes: 2,
            max_vector_len: 6,
            exhaustive_inclusion_limit: 12,
            gamma: Gamma::ONE,
            extra_candidates: Vec::new(),
            max_witnesses: 10,
            prune: true,
        }
    }
}

impl AuditConfig {
    pub fn with_gamma(gamma: Gamma) -> Self {
        AuditConfig {
            gamma,
            ..AuditConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon <= Money::ZERO {
            return Err(Error::InvalidConfig(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_fakes > 6 {
            return Err(Error::InvalidConfig(format!("max_fakes {} is above 6", self.max_fakes)));
        }
        if self.max_vector_len > 16 {
            return Err(Error::InvalidConfig(format!(
                "max_vector_len {} is above 16",
                self.max_vector_len
            )));
        }
        if let Some(m) = self.extra_candidates.iter().find(|m| m.is_negative()) {
            return Err(Error::InvalidConfig(format!("negative extra candidate {m}")));
        }
        Ok(())
    }
}

/// Which bid vectors an audit runs over.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpace {
    pub values: ValueGrid,
    #[serde(default)]
    pub min_len: usize,
    pub max_len: usize,
    /// Extra vectors audited in addition to the grid.
    #[serde(default)]
    pub named: Vec<BidVector>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueGrid {
    List(Vec<Money>),
    Range { min: Money, max: Money, step: Money },
}

impl ValueGrid {
    pub fn values(&self) -> Result<Vec<Money>> {
        let mut out = match self {
            ValueGrid::List(v) => v.clone(),
            ValueGrid::Range { min, max, step } => {
                if *step <= Money::ZERO || min > max {
                    return Err(Error::InvalidConfig(format!(
                        "value range {min}..={max} step {step} is empty"
                    )));
                }
                let n = (max.micros() - min.micros()) / step.micros();
                (0..=n).map(|i| *min + Money::from_micros(i * step.micros())).collect()
            }
        };
        if out.is_empty() {
            return Err(Error::InvalidConfig("value grid is empty".into()));
        }
        if let Some(m) = out.iter().find(|m| m.is_negative()) {
            return Err(Error::InvalidConfig(format!("negative grid value {m}")));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl ScenarioSpace {
    /// All vectors of length at most 4 over `{0, 0.5, ..., 5}`, plus the
    /// hand-picked vectors used throughout the regression claims.
    pub fn acceptance() -> Self {
        ScenarioSpace {
            values: ValueGrid::Range {
                min: Money::ZERO,
                max: Money::from_units(5),
                step: Money::from_micros(500_000),
            },
            min_len: 0,
            max_len: 4,
            named: named_vectors(),
        }
    }

    /// A small grid for quick checks: `{0, 1, ..., max}` up to `max_len`.
    pub fn small(max: i64, max_len: usize) -> Self {
        ScenarioSpace {
            values: ValueGrid::Range {
                min: Money::ZERO,
                max: Money::from_units(max),
                step: Money::from_units(1),
            },
            min_len: 0,
            max_len,
            named: Vec::new(),
        }
    }

    pub fn from_vectors(named: Vec<BidVector>) -> Self {
        ScenarioSpace {
            values: ValueGrid::List(vec![Money::ZERO]),
            min_len: 1,
            max_len: 0,
            named,
        }
    }

    /// Every vector in the space, grid first (lexicographic by length then
    /// value), then the named ones. Duplicates are dropped.
    pub fn vectors(&self) -> Result<Vec<BidVector>> {
        let grid = self.values.values()?;
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for len in self.min_len..=self.max_len {
            let mut idx = vec![0usize; len];
            loop {
                let v = BidVector::new(idx.iter().map(|&i| grid[i]).collect())?;
                if seen.insert(v.clone()) {
                    out.push(v);
                }
                // Odometer increment, last position fastest.
                let mut p = len;
                loop {
                    if p == 0 {
                        break;
                    }
                    p -= 1;
                    idx[p] += 1;
                    if idx[p] < grid.len() {
                        break;
                    }
                    idx[p] = 0;
                    if p == 0 {
                        p = usize::MAX;
                        break;
                    }
                }
                if len == 0 || p == usize::MAX {
                    break;
                }
            }
        }
        for v in &self.named {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
        Ok(out)
    }
}

/// Bid vectors that the regression claims refer to by name.
pub fn named_vectors() -> Vec<BidVector> {
    let u = BidVector::from_units;
    vec![
        u(&[10, 8, 5, 3]),
        u(&[10, 8, 5]),
        u(&[10, 8]),
        u(&[7]),
        u(&[12, 10, 9]),
        BidVector::new(vec![Money::from_units(5), Money::from_units(4), Money::from_micros(3_500_000)])
            .expect("non-negative"),
    ]
}

/// `{0} ∪ bids ∪ bids ± ε ∪ payments ∪ payments ± ε ∪ {max bid + ε}`,
/// negatives clipped to zero, sorted ascending and deduplicated.
pub fn candidate_bids(bids: &BidVector, payments: &[Money], cfg: &AuditConfig) -> Vec<Money> {
    let eps = cfg.epsilon;
    let mut out = vec![Money::ZERO];
    for &x in bids.as_slice().iter().chain(payments) {
        out.extend([x - eps, x, x + eps]);
    }
    if let Some(top) = bids.iter().max() {
        out.push(top + eps);
    }
    out.extend(cfg.extra_candidates.iter().copied());
    for x in &mut out {
        *x = (*x).max(Money::ZERO);
    }
    out.sort();
    out.dedup();
    out
}

/// Every block a lone miner could publish for mempool `bids` with fakes
/// drawn from `candidates`: each subset of the real bids plus a multiset of
/// at most `max_fakes` fakes, never exceeding the mechanism's capacity.
pub fn miner_actions_with(
    m: &Mechanism,
    bids: &BidVector,
    candidates: &[Money],
    max_fakes: usize,
) -> Vec<StrategyProfile> {
    let n = bids.len();
    let cap = m.capacity().unwrap_or(usize::MAX);
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << n) {
        let reals: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if reals.len() > cap {
            continue;
        }
        let room = max_fakes.min(cap - reals.len());
        for fakes in multisets(candidates, room) {
            let mut entries: Vec<BlockEntry> = reals
                .iter()
                .map(|&i| BlockEntry::new(bids.as_slice()[i], Owner::User(i)))
                .collect();
            entries.extend(fakes.iter().enumerate().map(|(j, &f)| BlockEntry::new(f, Owner::Fake(j))));
            out.push(StrategyProfile {
                bids: bids.clone(),
                fakes,
                inclusion: Inclusion::Explicit(IncludedBlock::new(entries)),
            });
        }
    }
    out
}

/// [`miner_actions_with`] over the candidate grid of the honest outcome.
pub fn enumerate_miner_actions(m: &Mechanism, bids: &BidVector, cfg: &AuditConfig) -> Result<Vec<StrategyProfile>> {
    cfg.validate()?;
    if bids.len() > cfg.exhaustive_inclusion_limit {
        return Err(Error::CombinatorialLimit {
            count: bids.len(),
            limit: cfg.exhaustive_inclusion_limit,
        });
    }
    let candidates = candidate_bids(bids, &honest_payments(m, bids), cfg);
    Ok(miner_actions_with(m, bids, &candidates, cfg.max_fakes))
}

/// All multisets of size `0..=max` over `pool`, each listed in pool order.
fn multisets(pool: &[Money], max: usize) -> Vec<Vec<Money>> {
    fn go(pool: &[Money], start: usize, left: usize, cur: &mut Vec<Money>, out: &mut Vec<Vec<Money>>) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            go(pool, i, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(pool, 0, max, &mut Vec::new(), &mut out);
    out
}

/// Conditional payments of confirmed bids under honest play, plus the
/// mechanism's reference prices.
fn honest_payments(m: &Mechanism, bids: &BidVector) -> Vec<Money> {
    let mut out = m.reference_prices();
    if let Ok(outcome) = m.evaluate(&m.include_honest(bids)) {
        out.extend(
            outcome
                .per_slot
                .iter()
                .filter(|s| !s.owner.is_pad() && !s.confirm_prob.is_zero())
                .map(|s| s.conditional_payment),
        );
    }
    out
}

/// Utility gain of `profile` over honest play for the scenario's strategic
/// player.
pub fn deviation_gain(m: &Mechanism, scenario: &Scenario, profile: &StrategyProfile, gamma: Gamma) -> Result<Rat> {
    let honest = profile_utility(m, scenario, &honest_profile(scenario, m), gamma)?;
    Ok(profile_utility(m, scenario, profile, gamma)? - honest)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Property {
    #[serde(rename = "UIC")]
    Uic,
    #[serde(rename = "MIC")]
    Mic,
    #[serde(rename = "SCP")]
    Scp,
}

impl std::fmt::Display for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Property::Uic => "UIC",
            Property::Mic => "MIC",
            Property::Scp => "SCP",
        })
    }
}

impl std::str::FromStr for Property {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uic" => Ok(Property::Uic),
            "mic" => Ok(Property::Mic),
            "scp" => Ok(Property::Scp),
            other => Err(Error::InvalidConfig(format!("unknown property {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// No profitable deviation exists on the audited grid.
    PassOnGrid,
    Fail,
}

/// A profitable deviation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub scenario: Scenario,
    pub profile: StrategyProfile,
    pub honest: Rat,
    pub deviated: Rat,
    pub gain: Rat,
}

impl Witness {
    /// Recomputes both utilities from scratch and checks they match.
    pub fn replay(&self, m: &Mechanism, gamma: Gamma) -> Result<bool> {
        let honest = profile_utility(m, &self.scenario, &honest_profile(&self.scenario, m), gamma)?;
        let deviated = profile_utility(m, &self.scenario, &self.profile, gamma)?;
        Ok(honest == self.honest && deviated == self.deviated && &deviated - &honest == self.gain)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub property: Property,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c: Option<usize>,
    pub gamma: Gamma,
    pub mechanism: Mechanism,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    /// Distinct (bid vector, strategic player) pairs audited.
    pub scenarios_checked: u64,
    /// Deviations covered, whether evaluated or ruled out by the bound.
    pub deviations_checked: u64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::PassOnGrid
    }

    pub fn best_gain(&self) -> Option<&Rat> {
        self.witnesses.iter().map(|w| &w.gain).max()
    }
}

pub fn audit_uic(m: &Mechanism, vectors: &[BidVector], cfg: &AuditConfig) -> Result<AuditReport> {
    run_audit(m, Property::Uic, None, vectors, cfg)
}

pub fn audit_mic(m: &Mechanism, vectors: &[BidVector], cfg: &AuditConfig) -> Result<AuditReport> {
    run_audit(m, Property::Mic, None, vectors, cfg)
}

pub fn audit_scp(m: &Mechanism, c: usize, vectors: &[BidVector], cfg: &AuditConfig) -> Result<AuditReport> {
    if c == 0 {
        return Err(Error::InvalidConfig("coalition size c must be at least 1".into()));
    }
    run_audit(m, Property::Scp, Some(c), vectors, cfg)
}

pub fn audit(m: &Mechanism, property: Property, c: usize, vectors: &[BidVector], cfg: &AuditConfig) -> Result<AuditReport> {
    match property {
        Property::Uic => audit_uic(m, vectors, cfg),
        Property::Mic => audit_mic(m, vectors, cfg),
        Property::Scp => audit_scp(m, c, vectors, cfg),
    }
}

/// One strategic player facing one bid vector.
#[derive(Clone, Debug)]
struct WorkItem {
    values: Vec<i64>,
    /// Deviating users, ascending.
    members: Vec<usize>,
    miner: bool,
}

fn run_audit(
    m: &Mechanism,
    property: Property,
    c: Option<usize>,
    vectors: &[BidVector],
    cfg: &AuditConfig,
) -> Result<AuditReport> {
    cfg.validate()?;
    m.validate()?;
    for v in vectors {
        if v.len() > cfg.max_vector_len {
            return Err(Error::VectorTooLong {
                len: v.len(),
                max: cfg.max_vector_len,
            });
        }
        if property != Property::Uic && v.len() > cfg.exhaustive_inclusion_limit {
            return Err(Error::CombinatorialLimit {
                count: v.len(),
                limit: cfg.exhaustive_inclusion_limit,
            });
        }
    }
    let items = work_items(property, c.unwrap_or(0), vectors);

    let mut witnesses = Vec::new();
    let mut scenarios_checked = 0u64;
    let mut deviations_checked = 0u64;
    for chunk in items.chunks(CHUNK) {
        let results: Vec<ItemResult> = chunk
            .par_iter()
            .map_init(|| Engine::new(m, cfg), |eng, item| eng.search(item))
            .collect();
        for (item, r) in chunk.iter().zip(results) {
            scenarios_checked += 1;
            deviations_checked += r.deviations;
            if let Some(dev) = r.best {
                witnesses.push(build_witness(m, cfg, item, &dev, r.gain_scaled)?);
            }
        }
        if cfg.max_witnesses > 0 && witnesses.len() >= cfg.max_witnesses {
            witnesses.truncate(cfg.max_witnesses);
            break;
        }
    }
    Ok(AuditReport {
        property,
        c,
        gamma: cfg.gamma,
        mechanism: m.clone(),
        verdict: if witnesses.is_empty() {
            Verdict::PassOnGrid
        } else {
            Verdict::Fail
        },
        witnesses,
        scenarios_checked,
        deviations_checked,
    })
}

fn work_items(property: Property, c: usize, vectors: &[BidVector]) -> Vec<WorkItem> {
    let mut seen = HashSet::new();
    let mut items = Vec::new();
    for v in vectors {
        let values: Vec<i64> = v.iter().map(Money::micros).collect();
        let n = values.len();
        let mut push = |members: Vec<usize>, miner: bool| {
            if seen.insert((canonical_values(&values, &members), members.clone(), miner)) {
                items.push(WorkItem {
                    values: values.clone(),
                    members,
                    miner,
                });
            }
        };
        match property {
            Property::Uic => (0..n).for_each(|i| push(vec![i], false)),
            Property::Mic => push(Vec::new(), true),
            Property::Scp => {
                for size in 1..=c.min(n) {
                    for members in subsets_of_size(n, size) {
                        push(members, true);
                    }
                }
            }
        }
    }
    items
}

/// Sorts outsider values within each run between consecutive members.
/// Outsiders never change their bids, and two of them can only be
/// distinguished by how they tie-break against a member, which depends on
/// nothing but which members sit before and after them.
fn canonical_values(values: &[i64], members: &[usize]) -> Vec<i64> {
    let mut out = values.to_vec();
    let mut start = 0;
    for &cut in members.iter().chain(std::iter::once(&values.len())) {
        out[start..cut].sort_unstable_by(|a, b| b.cmp(a));
        start = cut + 1;
    }
    out
}

fn subsets_of_size(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0u64..(1u64 << n))
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// A deviation found by the search.
#[derive(Clone, Debug, Default)]
struct Dev {
    /// Outsiders in the block (explicit inclusion only), by position in the
    /// outsider list.
    outsiders: Vec<bool>,
    /// Deviated bid per member; `None` leaves the member out of the block.
    member_bids: Vec<Option<i64>>,
    fakes: Vec<i64>,
}

struct ItemResult {
    deviations: u64,
    best: Option<Dev>,
    gain_scaled: i128,
}

#[derive(Clone, Copy, Debug)]
struct Ent {
    bid: i64,
    key: u32,
    owned: bool,
    value: i64,
}

impl Ent {
    fn rank_key(&self) -> (std::cmp::Reverse<i64>, u32) {
        (std::cmp::Reverse(self.bid), self.key)
    }
}

fn sort_ents(ents: &mut [Ent]) {
    // Insertion sort: blocks are tiny and usually nearly sorted.
    for i in 1..ents.len() {
        let mut j = i;
        while j > 0 && ents[j].rank_key() < ents[j - 1].rank_key() {
            ents.swap(j, j - 1);
            j -= 1;
        }
    }
}

/// Per-thread search state for one mechanism and configuration.
struct Engine<'a> {
    mech: &'a Mechanism,
    cfg: &'a AuditConfig,
    cap: usize,
    gn: i128,
    gd: i128,
    qd: i128,
    md: i128,
    max_qn: i128,
    bound_slots: usize,
    pos: Positional,
    bids: Vec<i64>,
    block: Vec<Ent>,
    base: Vec<Ent>,
    mempool: Vec<Ent>,
    // Current work item.
    miner: bool,
    cand_desc: Vec<i64>,
    fakes: Vec<i64>,
    choice: Vec<Option<i64>>,
    outsider_in: Vec<bool>,
    honest: i128,
    best_gain: i128,
    best: Option<Dev>,
    evaluated: u64,
    counted: u64,
    count_memo: Vec<Vec<u64>>,
}

impl<'a> Engine<'a> {
    fn new(mech: &'a Mechanism, cfg: &'a AuditConfig) -> Self {
        Engine {
            mech,
            cfg,
            cap: mech.capacity().unwrap_or(usize::MAX),
            gn: cfg.gamma.numer().into(),
            gd: cfg.gamma.denom().into(),
            qd: mech.prob_denom().into(),
            md: mech.revenue_denom().into(),
            max_qn: mech.max_prob_num().into(),
            bound_slots: mech.max_confirmed_slots().unwrap_or(usize::MAX),
            pos: Positional::default(),
            bids: Vec::new(),
            block: Vec::new(),
            base: Vec::new(),
            mempool: Vec::new(),
            miner: false,
            cand_desc: Vec::new(),
            fakes: Vec::new(),
            choice: Vec::new(),
            outsider_in: Vec::new(),
            honest: 0,
            best_gain: 0,
            best: None,
            evaluated: 0,
            counted: 0,
            count_memo: Vec::new(),
        }
    }

    /// Utility of the owned entries of `block` (already in rank order),
    /// scaled by `qd * gd * md` and in micro-units.
    fn score(&mut self, which: Which) -> i128 {
        let block = match which {
            Which::Block => &self.block,
            Which::Base => &self.base,
        };
        self.bids.clear();
        self.bids.extend(block.iter().map(|e| e.bid));
        self.mech.positional(&self.bids, &mut self.pos);
        let (qd, gn, gd) = (self.qd, self.gn, self.gd);
        let mut acc: i128 = 0;
        for (j, e) in block.iter().enumerate() {
            if !e.owned {
                continue;
            }
            let qn = i128::from(self.pos.prob_num[j]);
            acc += qn * i128::from(e.value - self.pos.pay[j]) * gd;
            let over = e.bid - e.value;
            if over > 0 {
                acc -= (qd - qn) * gn * i128::from(over);
            }
        }
        let mut u = self.md * acc;
        if self.miner {
            u += self.pos.revenue_num * qd * gd;
        }
        u
    }

    /// Scaled upper bound on a coalition's utility when the included real
    /// bids have the given values.
    fn bound(&self, values: &mut [i64]) -> i128 {
        values.sort_unstable_by(|a, b| b.cmp(a));
        let top: i128 = values.iter().take(self.bound_slots).map(|&v| i128::from(v)).sum();
        top * self.max_qn * self.gd * self.md
    }

    fn record(&mut self, u: i128, dev: impl FnOnce(&Self) -> Dev) {
        self.evaluated += 1;
        let gain = u - self.honest;
        if gain > self.best_gain {
            self.best_gain = gain;
            self.best = Some(dev(self));
        }
    }

    fn search(&mut self, item: &WorkItem) -> ItemResult {
        self.best = None;
        self.best_gain = 0;
        self.evaluated = 0;
        self.counted = 0;
        self.miner = item.miner;

        let values_money: Vec<Money> = item.values.iter().map(|&v| Money::from_micros(v)).collect();
        let bids = BidVector::new(values_money).expect("grid values are non-negative");
        let payments = honest_payments(self.mech, &bids);
        let mut cand: Vec<i64> = candidate_bids(&bids, &payments, self.cfg)
            .into_iter()
            .map(Money::micros)
            .collect();
        cand.reverse();
        self.cand_desc = cand;

        // Honest play: everyone truthful, honest inclusion.
        let members = &item.members;
        self.mempool.clear();
        self.mempool.extend(item.values.iter().enumerate().map(|(i, &v)| Ent {
            bid: v,
            key: i as u32,
            owned: members.contains(&i),
            value: v,
        }));
        self.honest = self.honest_block_score();

        match item.miner {
            false => self.search_uic(item),
            true => self.search_explicit(item),
        }
        ItemResult {
            deviations: self.evaluated + self.counted,
            best: self.best.take(),
            gain_scaled: self.best_gain,
        }
    }

    /// Honest inclusion over `self.mempool`, then score.
    fn honest_block_score(&mut self) -> i128 {
        sort_ents(&mut self.mempool);
        self.bids.clear();
        self.bids.extend(self.mempool.iter().map(|e| e.bid));
        let take = self.mech.honest_prefix(&self.bids);
        self.block.clear();
        self.block.extend_from_slice(&self.mempool[..take]);
        self.score(Which::Block)
    }

    fn fake_count(&self, room: usize) -> u64 {
        multisets_upto(self.cand_desc.len(), self.cfg.max_fakes.min(room))
    }

    fn search_uic(&mut self, item: &WorkItem) {
        let i = item.members[0];
        let v = item.values[i];
        let per_bid = self.fake_count(usize::MAX);
        if self.cfg.prune {
            let bound = i128::from(v) * self.max_qn * self.gd * self.md;
            if bound <= self.honest || self.bound_slots == 0 {
                self.counted += per_bid * self.cand_desc.len() as u64;
                return;
            }
        }
        for ci in 0..self.cand_desc.len() {
            let x = self.cand_desc[ci];
            self.choice.clear();
            self.choice.push(Some(x));
            self.base.clear();
            self.base.extend(item.values.iter().enumerate().map(|(j, &val)| Ent {
                bid: if j == i { x } else { val },
                key: j as u32,
                owned: j == i,
                value: val,
            }));
            sort_ents(&mut self.base);
            self.uic_fakes(0, self.cfg.max_fakes);
        }
    }

    fn uic_fakes(&mut self, start: usize, room: usize) {
        self.merge_fakes();
        self.mempool.clear();
        self.mempool.extend_from_slice(&self.block);
        let u = self.honest_block_score();
        self.record(u, |s| Dev {
            outsiders: Vec::new(),
            member_bids: s.choice.clone(),
            fakes: s.fakes.clone(),
        });
        if room == 0 {
            return;
        }
        for ci in start..self.cand_desc.len() {
            self.fakes.push(self.cand_desc[ci]);
            self.uic_fakes(ci, room - 1);
            self.fakes.pop();
        }
    }

    /// `block = base ∪ fakes` in rank order; fakes lose every tie with users.
    fn merge_fakes(&mut self) {
        self.block.clear();
        let mut f = 0;
        for b in 0..self.base.len() {
            while f < self.fakes.len() && self.fakes[f] > self.base[b].bid {
                self.block.push(self.fake_ent(f));
                f += 1;
            }
            self.block.push(self.base[b]);
        }
        while f < self.fakes.len() {
            self.block.push(self.fake_ent(f));
            f += 1;
        }
    }

    fn fake_ent(&self, f: usize) -> Ent {
        Ent {
            bid: self.fakes[f],
            key: FAKE_KEY + f as u32,
            owned: true,
            value: 0,
        }
    }

    /// Deviations counted by the bound: members still to choose, with
    /// `room` block slots left.
    fn subtree_count(&mut self, members_left: usize, room: usize) -> u64 {
        let room = room.min(members_left + self.cfg.max_fakes);
        if self.count_memo.len() <= members_left {
            self.count_memo.resize(members_left + 1, Vec::new());
        }
        if self.count_memo[members_left].len() <= room {
            self.count_memo[members_left].resize(room + 1, u64::MAX);
        }
        let memo = self.count_memo[members_left][room];
        if memo != u64::MAX {
            return memo;
        }
        let total = if members_left == 0 {
            self.fake_count(room)
        } else {
            let out = self.subtree_count(members_left - 1, room);
            let inn = if room > 0 {
                self.cand_desc.len() as u64 * self.subtree_count(members_left - 1, room - 1)
            } else {
                0
            };
            out + inn
        };
        self.count_memo[members_left][room] = total;
        total
    }

    fn search_explicit(&mut self, item: &WorkItem) {
        self.count_memo.clear();
        let outsiders: Vec<usize> = (0..item.values.len()).filter(|i| !item.members.contains(i)).collect();
        let k = item.members.len();
        let mut scratch: Vec<i64> = Vec::with_capacity(item.values.len());

        if self.cfg.prune {
            scratch.clear();
            scratch.extend_from_slice(&item.values);
            if self.bound(&mut scratch) <= self.honest {
                for mask in 0u64..(1u64 << outsiders.len()) {
                    let used = mask.count_ones() as usize;
                    if used <= self.cap {
                        self.counted += self.subtree_count(k, self.cap - used);
                    }
                }
                return;
            }
        }

        for mask in 0u64..(1u64 << outsiders.len()) {
            let used = mask.count_ones() as usize;
            if used > self.cap {
                continue;
            }
            self.outsider_in.clear();
            self.outsider_in.extend((0..outsiders.len()).map(|o| mask >> o & 1 == 1));
            if self.cfg.prune {
                scratch.clear();
                scratch.extend(outsiders.iter().enumerate().filter(|(o, _)| mask >> o & 1 == 1).map(|(_, &j)| item.values[j]));
                scratch.extend(item.members.iter().map(|&i| item.values[i]));
                if self.bound(&mut scratch) <= self.honest {
                    self.counted += self.subtree_count(k, self.cap - used);
                    continue;
                }
            }
            self.choice.clear();
            self.members_rec(item, &outsiders, 0, used, &mut scratch);
        }
    }

    fn members_rec(&mut self, item: &WorkItem, outsiders: &[usize], at: usize, used: usize, scratch: &mut Vec<i64>) {
        if at == item.members.len() {
            return self.leaf(item, outsiders, used, scratch);
        }
        self.choice.push(None);
        self.members_rec(item, outsiders, at + 1, used, scratch);
        self.choice.pop();
        if used < self.cap {
            for ci in 0..self.cand_desc.len() {
                self.choice.push(Some(self.cand_desc[ci]));
                self.members_rec(item, outsiders, at + 1, used + 1, scratch);
                self.choice.pop();
            }
        }
    }

    fn leaf(&mut self, item: &WorkItem, outsiders: &[usize], used: usize, scratch: &mut Vec<i64>) {
        let room = self.cfg.max_fakes.min(self.cap - used);
        if self.cfg.prune {
            scratch.clear();
            scratch.extend(
                outsiders
                    .iter()
                    .zip(&self.outsider_in)
                    .filter(|(_, &inc)| inc)
                    .map(|(&j, _)| item.values[j]),
            );
            scratch.extend(
                item.members
                    .iter()
                    .zip(&self.choice)
                    .filter(|(_, c)| c.is_some())
                    .map(|(&i, _)| item.values[i]),
            );
            if self.bound(scratch) <= self.honest {
                self.counted += self.fake_count(room);
                return;
            }
        }
        self.base.clear();
        for (&j, &inc) in outsiders.iter().zip(&self.outsider_in) {
            if inc {
                let v = item.values[j];
                self.base.push(Ent {
                    bid: v,
                    key: j as u32,
                    owned: false,
                    value: v,
                });
            }
        }
        for (&i, c) in item.members.iter().zip(&self.choice) {
            if let Some(x) = *c {
                self.base.push(Ent {
                    bid: x,
                    key: i as u32,
                    owned: true,
                    value: item.values[i],
                });
            }
        }
        sort_ents(&mut self.base);
        if self.cfg.prune && self.owns_inert(Which::Base) {
            // Leaving the inert member out does at least as well.
            self.counted += self.fake_count(room);
            return;
        }
        self.explicit_fakes(0, room);
    }

    fn owns_inert(&mut self, which: Which) -> bool {
        let block = match which {
            Which::Block => &self.block,
            Which::Base => &self.base,
        };
        self.bids.clear();
        self.bids.extend(block.iter().map(|e| e.bid));
        block.iter().enumerate().any(|(j, e)| e.owned && self.mech.is_inert(&self.bids, j))
    }

    /// Returns true when the newest fake was inert, in which case it and
    /// its whole subtree were counted without evaluation.
    fn explicit_fakes(&mut self, start: usize, room: usize) -> bool {
        let u = if self.fakes.is_empty() {
            self.score(Which::Base)
        } else {
            self.merge_fakes();
            if self.cfg.prune && self.newest_fake_inert() {
                // Dropping the fake only removes its penalty. Every lower
                // fake and every deeper one is inert too.
                self.counted += multisets_upto(self.cand_desc.len() - start, room);
                return true;
            }
            self.score(Which::Block)
        };
        self.record(u, |s| Dev {
            outsiders: s.outsider_in.clone(),
            member_bids: s.choice.clone(),
            fakes: s.fakes.clone(),
        });
        if room == 0 {
            return false;
        }
        for ci in start..self.cand_desc.len() {
            self.fakes.push(self.cand_desc[ci]);
            let inert = self.explicit_fakes(ci, room - 1);
            self.fakes.pop();
            if inert {
                for rest in ci + 1..self.cand_desc.len() {
                    self.counted += multisets_upto(self.cand_desc.len() - rest, room - 1);
                }
                break;
            }
        }
        false
    }

    fn newest_fake_inert(&mut self) -> bool {
        let key = FAKE_KEY + (self.fakes.len() - 1) as u32;
        let Some(j) = self.block.iter().rposition(|e| e.key == key) else {
            return false;
        };
        self.bids.clear();
        self.bids.extend(self.block.iter().map(|e| e.bid));
        self.mech.is_inert(&self.bids, j)
    }
}

/// Multisets of size at most `size` drawn from `pool` items.
fn multisets_upto(pool: usize, size: usize) -> u64 {
    let pool = pool as u64;
    let mut total = 1u64;
    let mut choose = 1u64; // C(pool + s - 1, s)
    for s in 1..=size as u64 {
        choose = choose * (pool + s - 1) / s;
        total += choose;
    }
    total
}

#[derive(Clone, Copy)]
enum Which {
    Block,
    Base,
}

/// Turns a search result into a self-contained witness whose utilities come
/// from the exact rational route.
fn build_witness(m: &Mechanism, cfg: &AuditConfig, item: &WorkItem, dev: &Dev, gain_scaled: i128) -> Result<Witness> {
    let values = BidVector::new(item.values.iter().map(|&v| Money::from_micros(v)).collect())?;
    let scenario = Scenario::truthful(&values, item.members.iter().copied(), item.miner)?;
    let mut bids: Vec<Money> = values.as_slice().to_vec();
    for (&i, b) in item.members.iter().zip(&dev.member_bids) {
        if let Some(x) = b {
            bids[i] = Money::from_micros(*x);
        }
    }
    let fakes: Vec<Money> = dev.fakes.iter().map(|&f| Money::from_micros(f)).collect();
    let inclusion = if item.miner {
        let outsiders = (0..values.len()).filter(|i| !item.members.contains(i));
        let mut entries: Vec<BlockEntry> = outsiders
            .zip(&dev.outsiders)
            .filter(|(_, &inc)| inc)
            .map(|(j, _)| BlockEntry::new(bids[j], Owner::User(j)))
            .collect();
        entries.extend(
            item.members
                .iter()
                .zip(&dev.member_bids)
                .filter(|(_, b)| b.is_some())
                .map(|(&i, _)| BlockEntry::new(bids[i], Owner::User(i))),
        );
        entries.extend(fakes.iter().enumerate().map(|(j, &f)| BlockEntry::new(f, Owner::Fake(j))));
        entries.sort_by(crate::outcome::rank_cmp);
        Inclusion::Explicit(IncludedBlock::new(entries))
    } else {
        Inclusion::Honest
    };
    let profile = StrategyProfile {
        bids: BidVector::new(bids)?,
        fakes,
        inclusion,
    };
    let honest = profile_utility(m, &scenario, &honest_profile(&scenario, m), cfg.gamma)?;
    let deviated = profile_utility(m, &scenario, &profile, cfg.gamma)?;
    let gain = &deviated - &honest;
    debug_assert_eq!(gain, Rat::from_scaled_micros(gain_scaled, scale(m, cfg.gamma)));
    Ok(Witness {
        scenario,
        profile,
        honest,
        deviated,
        gain,
    })
}

/// Common denominator of the search's scaled utilities.
fn scale(m: &Mechanism, gamma: Gamma) -> i128 {
    i128::from(m.prob_denom()) * i128::from(gamma.denom()) * i128::from(m.revenue_denom())
}

/// Scaled-integer utility of an arbitrary profile, as the search computes it.
/// Exposed to tests so the two routes can be compared.
#[doc(hidden)]
pub fn fast_profile_utility(m: &Mechanism, scenario: &Scenario, profile: &StrategyProfile, gamma: Gamma) -> Result<Rat> {
    profile.validate(scenario)?;
    let cfg = AuditConfig::with_gamma(gamma);
    let mut eng = Engine::new(m, &cfg);
    eng.miner = scenario.miner_in_coalition;
    let owned = |o: Owner| match o {
        Owner::User(i) => scenario.in_coalition(i),
        Owner::Fake(_) => true,
        Owner::Pad => false,
    };
    let value = |o: Owner| match o {
        Owner::User(i) => scenario.true_values[i].micros(),
        _ => 0,
    };
    let block = profile.block_for(m);
    m.check_block(&block)?;
    eng.block = block
        .ranked_entries()
        .iter()
        .map(|e| Ent {
            bid: e.bid.micros(),
            key: e.owner.tie_key().1 as u32,
            owned: owned(e.owner),
            value: value(e.owner),
        })
        .collect();
    let u = eng.score(Which::Block);
    Ok(Rat::from_scaled_micros(u, scale(m, gamma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mu(u: i64) -> Money {
        Money::from_units(u)
    }

    fn units(u: &[i64]) -> BidVector {
        BidVector::from_units(u)
    }

    fn cfg(gamma: Gamma) -> AuditConfig {
        AuditConfig::with_gamma(gamma)
    }

    #[test]
    fn candidate_examples() {
        let c = AuditConfig {
            epsilon: mu(1),
            ..AuditConfig::default()
        };
        let got = candidate_bids(&units(&[10, 5]), &[mu(5)], &c);
        let want: Vec<Money> = [0, 4, 5, 6, 9, 10, 11].iter().map(|&u| mu(u)).collect();
        assert_eq!(got, want);
        assert_eq!(candidate_bids(&BidVector::empty(), &[], &c), vec![Money::ZERO]);
        assert_eq!(candidate_bids(&units(&[0]), &[], &c), vec![mu(0), mu(1)]);
    }

    #[test]
    fn scenario_space_counts() {
        let vs = ScenarioSpace::acceptance().vectors().unwrap();
        assert_eq!(vs.iter().filter(|v| v.len() <= 4 && v.iter().all(|x| x <= mu(5))).count(), 16_105);
        assert_eq!(vs.iter().filter(|v| v.len() == 4 && v.iter().all(|x| x <= mu(5))).count(), 14_641);
        assert!(vs.contains(&units(&[10, 8, 5, 3])));
        assert_eq!(ScenarioSpace::small(1, 2).vectors().unwrap().len(), 1 + 2 + 4);
    }

    #[test]
    fn scenario_space_json() {
        let text = r#"{"values": {"min": "0", "max": "2", "step": "1"}, "max_len": 2, "named": [["10", "8"]]}"#;
        let s: ScenarioSpace = serde_json::from_str(text).unwrap();
        assert_eq!(s.vectors().unwrap().len(), 1 + 3 + 9 + 1);
        let list: ScenarioSpace = serde_json::from_str(r#"{"values": ["1", "3"], "max_len": 1}"#).unwrap();
        assert_eq!(list.vectors().unwrap().len(), 3);
    }

    #[test]
    fn miner_action_counts() {
        let cands = [mu(0), mu(5)];
        let fp2 = Mechanism::first_price(Some(2)).unwrap();
        // Subsets {}, {a}, {b} take zero or one fake; {a, b} fills the block.
        assert_eq!(miner_actions_with(&fp2, &units(&[3, 4]), &cands, 1).len(), 10);
        assert_eq!(miner_actions_with(&fp2, &BidVector::empty(), &cands, 0).len(), 1);
        let fp = Mechanism::first_price(None).unwrap();
        assert_eq!(miner_actions_with(&fp, &units(&[3, 4, 5]), &cands, 0).len(), 8);
    }

    #[test]
    fn miner_action_limit_is_explicit() {
        let c = AuditConfig {
            exhaustive_inclusion_limit: 2,
            ..AuditConfig::default()
        };
        let err = enumerate_miner_actions(&Mechanism::Trivial, &units(&[1, 2, 3]), &c).unwrap_err();
        assert_eq!(err, Error::CombinatorialLimit { count: 3, limit: 2 });
        let err = audit_mic(&Mechanism::Trivial, &[units(&[1, 2, 3])], &c).unwrap_err();
        assert_eq!(err, Error::CombinatorialLimit { count: 3, limit: 2 });
    }

    #[test]
    fn vector_length_is_checked() {
        let c = AuditConfig {
            max_vector_len: 2,
            ..AuditConfig::default()
        };
        let err = audit_uic(&Mechanism::Trivial, &[units(&[1, 2, 3])], &c).unwrap_err();
        assert_eq!(err, Error::VectorTooLong { len: 3, max: 2 });
    }

    #[test]
    fn first_price_fails_uic() {
        let fp = Mechanism::first_price(Some(3)).unwrap();
        let report = audit_uic(&fp, &[units(&[10, 8])], &cfg(Gamma::ZERO)).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        let s = Scenario::truthful(&units(&[10, 8]), [0], false).unwrap();
        let shade = StrategyProfile::honest(BidVector::new(vec!["8.25".parse().unwrap(), mu(8)]).unwrap());
        assert_eq!(deviation_gain(&fp, &s, &shade, Gamma::ZERO).unwrap(), Rat::new(7, 4));
        for w in &report.witnesses {
            assert!(w.replay(&fp, Gamma::ZERO).unwrap());
        }
    }

    #[test]
    fn second_price_mic_fake_between_prices() {
        let sp = Mechanism::second_price(3).unwrap();
        let report = audit_mic(&sp, &[units(&[10, 8, 5])], &cfg(Gamma::ZERO)).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        let s = Scenario::truthful(&units(&[10, 8, 5]), [], true).unwrap();
        let fake: Money = "7.75".parse().unwrap();
        let p = StrategyProfile {
            bids: units(&[10, 8, 5]),
            fakes: vec![fake],
            inclusion: Inclusion::Explicit(IncludedBlock::new(vec![
                BlockEntry::new(mu(10), Owner::User(0)),
                BlockEntry::new(mu(8), Owner::User(1)),
                BlockEntry::new(fake, Owner::Fake(0)),
            ])),
        };
        assert_eq!(profile_utility(&sp, &s, &p, Gamma::ZERO).unwrap(), Rat::new(31, 2));
        assert_eq!(deviation_gain(&sp, &s, &p, Gamma::ZERO).unwrap(), Rat::new(11, 2));
        assert!(report.witnesses[0].replay(&sp, Gamma::ZERO).unwrap());
    }

    #[test]
    fn first_price_or_free_lone_bid() {
        let m = Mechanism::FirstPriceOrFree;
        let report = audit_mic(&m, &[units(&[7])], &cfg(Gamma::ONE)).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        assert_eq!(report.best_gain(), Some(&Rat::from_integer(7)));
    }

    #[test]
    fn posted_price_side_contract() {
        let m = Mechanism::posted_price_no_burn(mu(10)).unwrap();
        let report = audit_scp(&m, 1, &[units(&[9])], &cfg(Gamma::ONE)).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        assert_eq!(report.best_gain(), Some(&Rat::from_integer(9)));
        assert!(report.witnesses[0].replay(&m, Gamma::ONE).unwrap());
    }

    #[test]
    fn burning_pair_coalition_gains_two() {
        let m = Mechanism::burning_second_price(4, 2, 2, Gamma::ONE, 1).unwrap();
        let s = Scenario::truthful(&units(&[10, 8, 5, 3]), [0, 1], true).unwrap();
        let p = StrategyProfile {
            bids: units(&[10, 8, 5, 3]),
            fakes: vec![Money::ZERO, Money::ZERO],
            inclusion: Inclusion::Explicit(IncludedBlock::new(vec![
                BlockEntry::new(mu(10), Owner::User(0)),
                BlockEntry::new(mu(8), Owner::User(1)),
                BlockEntry::new(Money::ZERO, Owner::Fake(0)),
                BlockEntry::new(Money::ZERO, Owner::Fake(1)),
            ])),
        };
        assert_eq!(profile_utility(&m, &s, &p, Gamma::ONE).unwrap(), Rat::from_integer(18));
        assert_eq!(profile_utility(&m, &s, &honest_profile(&s, &m), Gamma::ONE).unwrap(), Rat::from_integer(16));
        let report = audit_scp(&m, 2, &[units(&[10, 8, 5, 3])], &cfg(Gamma::ONE)).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        let w = report.witnesses.iter().find(|w| w.scenario.coalition_users.len() == 2 && w.scenario.coalition_users.contains(&0) && w.scenario.coalition_users.contains(&1)).unwrap();
        assert_eq!(w.gain, Rat::from_integer(2));
    }

    #[test]
    fn small_grid_passes_for_burning() {
        let m = Mechanism::burning_second_price(4, 2, 2, Gamma::ONE, 1).unwrap();
        let vs = ScenarioSpace::small(3, 3).vectors().unwrap();
        let c = cfg(Gamma::ONE);
        assert!(audit_uic(&m, &vs, &c).unwrap().passed());
        assert!(audit_mic(&m, &vs, &c).unwrap().passed());
        assert!(audit_scp(&m, 1, &vs, &c).unwrap().passed());
        let sp = Mechanism::second_price(3).unwrap();
        assert!(audit_uic(&sp, &vs, &cfg(Gamma::ZERO)).unwrap().passed());
    }

    #[test]
    fn search_covers_every_miner_action() {
        // The fast MIC search visits exactly the materialized action list and
        // finds the same best utility.
        let c = AuditConfig {
            prune: false,
            max_witnesses: 0,
            ..cfg(Gamma::new(1, 2).unwrap())
        };
        for m in [
            Mechanism::second_price(3).unwrap(),
            Mechanism::solitary_or_posted_price(mu(3)).unwrap(),
            Mechanism::burning_second_price(3, 2, 1, Gamma::ONE, 2).unwrap(),
        ] {
            let v = units(&[4, 3, 1]);
            let report = audit_mic(&m, std::slice::from_ref(&v), &c).unwrap();
            let actions = enumerate_miner_actions(&m, &v, &c).unwrap();
            assert_eq!(report.deviations_checked, actions.len() as u64, "{}", m.label());
            let s = Scenario::truthful(&v, [], true).unwrap();
            let best = actions
                .iter()
                .map(|p| deviation_gain(&m, &s, p, c.gamma).unwrap())
                .max()
                .unwrap();
            let found = report.best_gain().cloned().unwrap_or_else(Rat::zero);
            assert_eq!(found, best.max(Rat::zero()), "{}", m.label());
        }
    }

    #[test]
    fn canonical_runs() {
        assert_eq!(canonical_values(&[1, 3, 2, 5, 4], &[2]), vec![3, 1, 2, 5, 4]);
        assert_eq!(canonical_values(&[1, 3, 2], &[]), vec![3, 2, 1]);
        assert_eq!(canonical_values(&[1, 3], &[0, 1]), vec![1, 3]);
    }

    #[test]
    fn uic_witness_lies_in_the_scp_space() {
        // A user deviation under honest inclusion is also a coalition
        // deviation; the coalition's gain adds the change in miner revenue.
        let fp = Mechanism::first_price(Some(3)).unwrap();
        let g = Gamma::ZERO;
        let v = units(&[10, 8]);
        let uic = audit_uic(&fp, std::slice::from_ref(&v), &cfg(g)).unwrap();
        let w = &uic.witnesses[0];
        let block = w.profile.block_for(&fp);
        let coalition = Scenario::truthful(&v, w.scenario.coalition_users.iter().copied(), true).unwrap();
        let explicit = StrategyProfile {
            bids: w.profile.bids.clone(),
            fakes: w.profile.fakes.clone(),
            inclusion: Inclusion::Explicit(block.clone()),
        };
        let joint = deviation_gain(&fp, &coalition, &explicit, g).unwrap();
        let mu_dev = fp.evaluate(&block).unwrap().miner_revenue;
        let mu_hon = fp.evaluate(&fp.include_honest(&v)).unwrap().miner_revenue;
        assert_eq!(joint, &w.gain + &(mu_dev - mu_hon));
    }

    #[test]
    fn reports_do_not_depend_on_thread_count() {
        let m = Mechanism::second_price(3).unwrap();
        let vs = ScenarioSpace::small(3, 3).vectors().unwrap();
        let c = AuditConfig {
            max_witnesses: 0,
            ..cfg(Gamma::ZERO)
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| audit_scp(&m, 1, &vs, &c).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn report_json_shape() {
        let m = Mechanism::burning_second_price(4, 2, 2, Gamma::ONE, 1).unwrap();
        let report = audit_scp(&m, 2, &[units(&[10, 8, 5, 3])], &cfg(Gamma::ONE)).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["property"], "SCP");
        assert_eq!(json["c"], 2);
        assert_eq!(json["gamma"], "1/1");
        assert_eq!(json["verdict"], "fail");
        assert!(json["witnesses"][0]["gain"].as_str().unwrap().contains('/'));
        let back: AuditReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, report);
    }

    fn mechanisms() -> Vec<Mechanism> {
        vec![
            Mechanism::first_price(Some(3)).unwrap(),
            Mechanism::first_price(None).unwrap(),
            Mechanism::second_price(3).unwrap(),
            Mechanism::posted_price_no_burn(mu(3)).unwrap(),
            Mechanism::posted_price_burn_all(mu(3), Some(2)).unwrap(),
            Mechanism::FirstPriceOrFree,
            Mechanism::burning_second_price(4, 2, 2, Gamma::ONE, 1).unwrap(),
            Mechanism::burning_second_price(3, 2, 1, Gamma::ONE, 2).unwrap(),
            Mechanism::burning_second_price(3, 2, 1, Gamma::new(1, 2).unwrap(), 1).unwrap(),
            Mechanism::Solitary,
            Mechanism::solitary_or_posted_price(mu(3)).unwrap(),
            Mechanism::Trivial,
        ]
    }

    fn arb_profile() -> impl Strategy<Value = (usize, Scenario, StrategyProfile, Gamma)> {
        (
            0usize..12,
            proptest::collection::vec(0i64..6, 0..5),
            proptest::collection::vec(0i64..6, 0..3),
            any::<u64>(),
            any::<bool>(),
            0u64..=4,
        )
            .prop_map(|(mi, vals, fakes, bits, explicit, g)| {
                let mech = &mechanisms()[mi];
                let n = vals.len();
                let values = units(&vals);
                let members: Vec<usize> = (0..n).filter(|i| bits >> i & 1 == 1).collect();
                let miner = explicit || bits >> 20 & 1 == 1;
                let scenario = Scenario::truthful(&values, members.iter().copied(), miner).unwrap();
                let mut bids = vals.clone();
                for &i in &members {
                    bids[i] = ((bits >> (8 + i)) & 7) as i64;
                }
                let bids = units(&bids);
                let fakes: Vec<Money> = fakes.into_iter().map(mu).collect();
                let inclusion = if explicit {
                    let cap = mech.capacity().unwrap_or(usize::MAX);
                    let mut entries: Vec<BlockEntry> = (0..n)
                        .filter(|i| bits >> (30 + i) & 1 == 1)
                        .map(|i| BlockEntry::new(bids.as_slice()[i], Owner::User(i)))
                        .collect();
                    entries.extend(fakes.iter().enumerate().map(|(j, &f)| BlockEntry::new(f, Owner::Fake(j))));
                    entries.truncate(cap);
                    Inclusion::Explicit(IncludedBlock::new(entries))
                } else {
                    Inclusion::Honest
                };
                let fakes = match &inclusion {
                    Inclusion::Explicit(b) => fakes.into_iter().take(b.entries.iter().filter(|e| e.owner.is_fake()).count()).collect(),
                    Inclusion::Honest if members.is_empty() && !miner => Vec::new(),
                    Inclusion::Honest => fakes,
                };
                let profile = StrategyProfile { bids, fakes, inclusion };
                (mi, scenario, profile, Gamma::new(g, 4).unwrap())
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn fast_route_matches_exact_route((mi, scenario, profile, gamma) in arb_profile()) {
            let m = &mechanisms()[mi];
            let exact = profile_utility(m, &scenario, &profile, gamma);
            let fast = fast_profile_utility(m, &scenario, &profile, gamma);
            prop_assert_eq!(exact, fast);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn pruning_is_lossless(mi in 0usize..12, vals in proptest::collection::vec(0i64..5, 1..4), g in 0u64..=2) {
            let m = &mechanisms()[mi];
            let v = units(&vals);
            let gamma = Gamma::new(g, 2).unwrap();
            let on = AuditConfig { max_witnesses: 0, ..cfg(gamma) };
            let off = AuditConfig { prune: false, ..on.clone() };
            for (p, c) in [(Property::Uic, 1), (Property::Mic, 1), (Property::Scp, 2)] {
                let a = audit(m, p, c, std::slice::from_ref(&v), &on).unwrap();
                let b = audit(m, p, c, std::slice::from_ref(&v), &off).unwrap();
                prop_assert_eq!(a.best_gain(), b.best_gain());
                prop_assert_eq!(a.verdict, b.verdict);
                prop_assert_eq!(a.deviations_checked, b.deviations_checked);
            }
        }

        #[test]
        fn larger_grids_never_flip_fail_to_pass(mi in 0usize..12, vals in proptest::collection::vec(0i64..5, 1..4), extra in 0i64..12) {
            let m = &mechanisms()[mi];
            let v = [units(&vals)];
            let base = AuditConfig { max_fakes: 1, max_witnesses: 0, ..cfg(Gamma::ZERO) };
            let wider = AuditConfig {
                max_fakes: 2,
                extra_candidates: vec![Money::from_micros(extra * 500_000)],
                ..base.clone()
            };
            for (p, c) in [(Property::Uic, 1), (Property::Mic, 1), (Property::Scp, 1)] {
                let a = audit(m, p, c, &v, &base).unwrap();
                let b = audit(m, p, c, &v, &wider).unwrap();
                prop_assert!(b.best_gain() >= a.best_gain());
            }
        }
    }
}
