//! Named claims with expected verdicts.
//!
//! Each claim bundles one or more checks: full audits with an expected
//! verdict, exact gains of specific hand-built deviations, and a revenue
//! cross-check over every built-in mechanism. PASS expectations hold on the
//! configured grid only; FAIL expectations are backed by replayable
//! witnesses.

use serde::{Deserialize, Serialize};

use crate::auditor::{audit, deviation_gain, AuditConfig, AuditReport, Property, ScenarioSpace, Verdict, Witness};
use crate::bids::{BidVector, Scenario};
use crate::error::{Error, Result};
use crate::gamma::Gamma;
use crate::mechanisms::Mechanism;
use crate::money::Money;
use crate::myerson::zero_revenue_scan;
use crate::outcome::{BlockEntry, IncludedBlock, Owner};
use crate::rat::Rat;
use crate::utility::{Inclusion, StrategyProfile};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vectors {
    /// The suite's scenario space.
    Grid,
    Listed(Vec<BidVector>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    Audit {
        mechanism: Mechanism,
        property: Property,
        c: usize,
        gamma: Gamma,
        vectors: Vectors,
        expect: Verdict,
    },
    /// The exact gain of one specific deviation.
    Gain {
        mechanism: Mechanism,
        scenario: Scenario,
        profile: StrategyProfile,
        gamma: Gamma,
        expect: Rat,
    },
    /// No mechanism passes UIC and 1-SCP at γ = 0 while paying the miner;
    /// the listed mechanisms never pay the miner at all.
    ZeroRevenue {
        mechanisms: Vec<Mechanism>,
        always_zero: Vec<Mechanism>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperClaim {
    pub id: String,
    pub title: String,
    pub checks: Vec<Check>,
}

/// Honest audit outcome and revenue of one mechanism in the revenue check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevenueRow {
    pub mechanism: Mechanism,
    pub uic: Verdict,
    pub scp1: Verdict,
    pub max_revenue: Rat,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub description: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<AuditReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<RevenueRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub claims: Vec<ClaimResult>,
    pub matched: usize,
    pub total: usize,
    pub passed: bool,
}

impl SuiteReport {
    pub fn claim(&self, id: &str) -> Option<&ClaimResult> {
        self.claims.iter().find(|c| c.id == id)
    }
}

/// How the suite runs.
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub space: ScenarioSpace,
    pub config: AuditConfig,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            space: ScenarioSpace::acceptance(),
            config: AuditConfig {
                max_witnesses: 3,
                ..AuditConfig::default()
            },
        }
    }
}

fn units(u: &[i64]) -> BidVector {
    BidVector::from_units(u)
}

fn m(u: i64) -> Money {
    Money::from_units(u)
}

fn half() -> Gamma {
    Gamma::new(1, 2).expect("valid")
}

fn burning(b: usize, k: usize, kp: usize, g: Gamma, c: usize) -> Mechanism {
    Mechanism::burning_second_price(b, k, kp, g, c).expect("valid parameters")
}

/// The deterministic burning auction of the regression claims.
pub fn deterministic_burning() -> Mechanism {
    burning(4, 2, 2, Gamma::ONE, 1)
}

/// The randomized burning auction tuned against pairs.
pub fn randomized_burning() -> Mechanism {
    burning(3, 2, 1, Gamma::ONE, 2)
}

/// Burning auctions whose confirmation count `γk/c` is an integer, keyed by
/// `(γ, c)`.
pub fn integral_burning_configs() -> Vec<(Gamma, usize, Mechanism)> {
    vec![
        (Gamma::ONE, 1, deterministic_burning()),
        (Gamma::ONE, 2, randomized_burning()),
        (half(), 1, burning(3, 2, 1, half(), 1)),
        (half(), 2, burning(5, 4, 1, half(), 2)),
    ]
}

/// One instance of every built-in kind, plus the congested posted price.
pub fn builtin_instances() -> Vec<Mechanism> {
    vec![
        Mechanism::first_price(Some(3)).expect("valid"),
        Mechanism::second_price(3).expect("valid"),
        Mechanism::posted_price_no_burn(m(3)).expect("valid"),
        Mechanism::posted_price_burn_all(m(3), None).expect("valid"),
        Mechanism::posted_price_burn_all(m(3), Some(2)).expect("valid"),
        Mechanism::FirstPriceOrFree,
        deterministic_burning(),
        Mechanism::Solitary,
        Mechanism::solitary_or_posted_price(m(3)).expect("valid"),
        Mechanism::Trivial,
    ]
}

fn grid_audit(mechanism: &Mechanism, property: Property, c: usize, gamma: Gamma, expect: Verdict) -> Check {
    Check::Audit {
        mechanism: mechanism.clone(),
        property,
        c,
        gamma,
        vectors: Vectors::Grid,
        expect,
    }
}

fn explicit(bids: BidVector, fakes: Vec<Money>, entries: Vec<(Money, Owner)>) -> StrategyProfile {
    StrategyProfile {
        bids,
        fakes,
        inclusion: Inclusion::Explicit(IncludedBlock::new(
            entries.into_iter().map(|(b, o)| BlockEntry::new(b, o)).collect(),
        )),
    }
}

/// The full catalog, in id order.
pub fn paper_claims() -> Vec<PaperClaim> {
    use Property::*;
    use Verdict::*;
    let z = Gamma::ZERO;
    let one = Gamma::ONE;
    let sp = Mechanism::second_price(3).expect("valid");
    let fp = Mechanism::first_price(Some(3)).expect("valid");
    let ppnb = Mechanism::posted_price_no_burn(m(3)).expect("valid");
    let fpof = Mechanism::FirstPriceOrFree;
    let sopp = Mechanism::solitary_or_posted_price(m(3)).expect("valid");
    let det = deterministic_burning();
    let rnd = randomized_burning();
    let mut claims = Vec::new();
    let mut claim = |id: &str, title: &str, checks: Vec<Check>| {
        claims.push(PaperClaim {
            id: id.into(),
            title: title.into(),
            checks,
        })
    };

    claim(
        "R1",
        "second price: UIC holds, MIC and 1-SCP fail",
        vec![
            grid_audit(&sp, Uic, 1, z, PassOnGrid),
            grid_audit(&sp, Mic, 1, z, Fail),
            grid_audit(&sp, Scp, 1, z, Fail),
        ],
    );
    claim(
        "R2",
        "first price: UIC fails, MIC and c-SCP (c <= 2) hold",
        vec![
            grid_audit(&fp, Uic, 1, z, Fail),
            grid_audit(&fp, Mic, 1, z, PassOnGrid),
            grid_audit(&fp, Scp, 2, z, PassOnGrid),
        ],
    );
    claim(
        "R3",
        "posted price without burning: MIC holds, 1-SCP fails",
        vec![grid_audit(&ppnb, Mic, 1, z, PassOnGrid), grid_audit(&ppnb, Scp, 1, z, Fail)],
    );
    claim(
        "R4",
        "first price or free: c-SCP (c <= 2) holds, MIC fails",
        vec![grid_audit(&fpof, Scp, 2, z, PassOnGrid), grid_audit(&fpof, Mic, 1, z, Fail)],
    );
    claim(
        "R5",
        "burning second price with integral γk/c: UIC, MIC and c-SCP hold",
        integral_burning_configs()
            .iter()
            .flat_map(|(g, c, mech)| {
                [
                    grid_audit(mech, Uic, 1, *g, PassOnGrid),
                    grid_audit(mech, Mic, 1, *g, PassOnGrid),
                    grid_audit(mech, Scp, *c, *g, PassOnGrid),
                ]
            })
            .collect(),
    );
    claim(
        "R6",
        "solitary: weak UIC, weak MIC and c-weak-SCP (c <= 3) hold",
        vec![
            grid_audit(&Mechanism::Solitary, Uic, 1, one, PassOnGrid),
            grid_audit(&Mechanism::Solitary, Mic, 1, one, PassOnGrid),
            grid_audit(&Mechanism::Solitary, Scp, 3, one, PassOnGrid),
        ],
    );
    claim(
        "R7",
        "solitary or posted price, unbounded block: weak UIC, weak MIC and c-weak-SCP (c <= 2) hold",
        vec![
            grid_audit(&sopp, Uic, 1, one, PassOnGrid),
            grid_audit(&sopp, Mic, 1, one, PassOnGrid),
            grid_audit(&sopp, Scp, 2, one, PassOnGrid),
        ],
    );
    let v = units(&[10, 8, 5, 3]);
    claim(
        "R8",
        "deterministic burning second price: miner and the top two users swap the price setters for zero fakes",
        vec![
            Check::Audit {
                mechanism: det.clone(),
                property: Scp,
                c: 2,
                gamma: one,
                vectors: Vectors::Listed(vec![v.clone()]),
                expect: Fail,
            },
            Check::Gain {
                mechanism: det.clone(),
                scenario: Scenario::truthful(&v, [0, 1], true).expect("valid"),
                profile: explicit(
                    v.clone(),
                    vec![Money::ZERO, Money::ZERO],
                    vec![
                        (m(10), Owner::User(0)),
                        (m(8), Owner::User(1)),
                        (Money::ZERO, Owner::Fake(0)),
                        (Money::ZERO, Owner::Fake(1)),
                    ],
                ),
                gamma: one,
                expect: Rat::from_integer(2),
            },
        ],
    );
    let v = units(&[10, 8, 5]);
    claim(
        "R9",
        "randomized burning second price: the same swap gains exactly nothing",
        vec![
            Check::Gain {
                mechanism: rnd.clone(),
                scenario: Scenario::truthful(&v, [0, 1], true).expect("valid"),
                profile: explicit(
                    v.clone(),
                    vec![Money::ZERO],
                    vec![
                        (m(10), Owner::User(0)),
                        (m(8), Owner::User(1)),
                        (Money::ZERO, Owner::Fake(0)),
                    ],
                ),
                gamma: one,
                expect: Rat::zero(),
            },
            Check::Audit {
                mechanism: rnd,
                property: Scp,
                c: 2,
                gamma: one,
                vectors: Vectors::Listed(vec![v]),
                expect: PassOnGrid,
            },
        ],
    );
    let v = units(&[10, 8, 5, 0]);
    let overbid: Money = "3.5".parse().expect("valid");
    claim(
        "R10",
        "burning second price without strictness: a worthless user overbids to raise miner revenue",
        vec![
            grid_audit(&det, Scp, 1, z, Fail),
            Check::Gain {
                mechanism: det.clone(),
                scenario: Scenario::truthful(&v, [3], true).expect("valid"),
                profile: explicit(
                    BidVector::new(vec![m(10), m(8), m(5), overbid]).expect("valid"),
                    vec![],
                    vec![
                        (m(10), Owner::User(0)),
                        (m(8), Owner::User(1)),
                        (m(5), Owner::User(2)),
                        (overbid, Owner::User(3)),
                    ],
                ),
                gamma: z,
                expect: Rat::new(7, 2),
            },
        ],
    );
    let v = BidVector::new(vec![m(5), m(4), "3.5".parse().expect("valid")]).expect("valid");
    let ppba2 = Mechanism::posted_price_burn_all(m(3), Some(2)).expect("valid");
    claim(
        "R11",
        "congested posted price with burning: the miner swaps in an excluded user",
        vec![
            grid_audit(&ppba2, Scp, 1, z, Fail),
            Check::Gain {
                mechanism: ppba2.clone(),
                scenario: Scenario::truthful(&v, [2], true).expect("valid"),
                profile: explicit(
                    v.clone(),
                    vec![],
                    vec![(m(5), Owner::User(0)), (v.as_slice()[2], Owner::User(2))],
                ),
                gamma: z,
                expect: Rat::new(1, 2),
            },
        ],
    );
    claim(
        "R12",
        "no built-in both passes UIC and 1-SCP and pays the miner",
        vec![Check::ZeroRevenue {
            mechanisms: builtin_instances(),
            always_zero: vec![
                Mechanism::Trivial,
                Mechanism::posted_price_burn_all(m(3), None).expect("valid"),
            ],
        }],
    );
    claims
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::PassOnGrid => "pass_on_grid",
        Verdict::Fail => "fail",
    }
}

fn run_check(check: &Check, grid: &[BidVector], cfg: &AuditConfig) -> Result<CheckResult> {
    match check {
        Check::Audit {
            mechanism,
            property,
            c,
            gamma,
            vectors,
            expect,
        } => {
            let cfg = AuditConfig {
                gamma: *gamma,
                ..cfg.clone()
            };
            let listed;
            let vs = match vectors {
                Vectors::Grid => grid,
                Vectors::Listed(v) => {
                    listed = v.clone();
                    &listed[..]
                }
            };
            let report = audit(mechanism, *property, *c, vs, &cfg)?;
            let replayed = report
                .witnesses
                .iter()
                .map(|w| w.replay(mechanism, *gamma))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .all(|ok| ok);
            let cdesc = if *property == Property::Scp { format!("({c})") } else { String::new() };
            Ok(CheckResult {
                description: format!("{} {}{} at gamma={}", mechanism.label(), property, cdesc, gamma),
                expected: verdict_name(*expect).into(),
                observed: verdict_name(report.verdict).into(),
                passed: report.verdict == *expect && replayed,
                report: Some(report),
                rows: Vec::new(),
            })
        }
        Check::Gain {
            mechanism,
            scenario,
            profile,
            gamma,
            expect,
        } => {
            let gain = deviation_gain(mechanism, scenario, profile, *gamma)?;
            Ok(CheckResult {
                description: format!("{} specific deviation gain at gamma={}", mechanism.label(), gamma),
                expected: expect.to_string(),
                observed: gain.to_string(),
                passed: &gain == expect,
                report: None,
                rows: Vec::new(),
            })
        }
        Check::ZeroRevenue {
            mechanisms,
            always_zero,
        } => {
            let cfg = AuditConfig {
                gamma: Gamma::ZERO,
                max_witnesses: 1,
                ..cfg.clone()
            };
            let mut rows = Vec::new();
            for mech in mechanisms {
                let uic = audit(mech, Property::Uic, 1, grid, &cfg)?;
                let scp = audit(mech, Property::Scp, 1, grid, &cfg)?;
                let scan = zero_revenue_scan(mech, grid)?;
                rows.push(RevenueRow {
                    mechanism: mech.clone(),
                    uic: uic.verdict,
                    scp1: scp.verdict,
                    max_revenue: scan.max_revenue,
                    witnesses: uic.witnesses.into_iter().chain(scp.witnesses).collect(),
                });
            }
            let offenders: Vec<String> = rows
                .iter()
                .filter(|r| r.uic == Verdict::PassOnGrid && r.scp1 == Verdict::PassOnGrid && r.max_revenue.is_positive())
                .map(|r| r.mechanism.label())
                .collect();
            let paying: Vec<String> = rows
                .iter()
                .filter(|r| always_zero.contains(&r.mechanism) && !r.max_revenue.is_zero())
                .map(|r| r.mechanism.label())
                .collect();
            let replayed = rows
                .iter()
                .flat_map(|r| r.witnesses.iter().map(move |w| (r, w)))
                .map(|(r, w)| w.replay(&r.mechanism, Gamma::ZERO))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .all(|ok| ok);
            Ok(CheckResult {
                description: format!("UIC, 1-SCP and revenue of {} mechanisms at gamma=0", rows.len()),
                expected: "no incentive-compatible mechanism pays the miner".into(),
                observed: if offenders.is_empty() && paying.is_empty() {
                    "none".into()
                } else {
                    format!("offenders {offenders:?}, non-zero revenue {paying:?}")
                },
                passed: offenders.is_empty() && paying.is_empty() && replayed,
                report: None,
                rows,
            })
        }
    }
}

pub fn run_claim(claim: &PaperClaim, grid: &[BidVector], cfg: &AuditConfig) -> Result<ClaimResult> {
    let checks = claim
        .checks
        .iter()
        .map(|c| run_check(c, grid, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClaimResult {
        id: claim.id.clone(),
        title: claim.title.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Runs the selected claims (all when `selection` is `None`) in catalog order.
pub fn run_paper_suite(selection: Option<&[String]>, opts: &SuiteOptions) -> Result<SuiteReport> {
    let catalog = paper_claims();
    let chosen: Vec<&PaperClaim> = match selection {
        None => catalog.iter().collect(),
        Some(ids) => {
            for id in ids {
                if !catalog.iter().any(|c| c.id.eq_ignore_ascii_case(id.trim())) {
                    return Err(Error::UnknownClaim(id.clone()));
                }
            }
            catalog
                .iter()
                .filter(|c| ids.iter().any(|id| c.id.eq_ignore_ascii_case(id.trim())))
                .collect()
        }
    };
    let grid = opts.space.vectors()?;
    let claims = chosen
        .into_iter()
        .map(|c| run_claim(c, &grid, &opts.config))
        .collect::<Result<Vec<_>>>()?;
    let matched = claims.iter().filter(|c| c.passed).count();
    Ok(SuiteReport {
        total: claims.len(),
        passed: matched == claims.len(),
        matched,
        claims,
    })
}
