//! Exact transaction fee mechanism models and incentive audits.

pub mod auditor;
pub mod bids;
pub mod error;
pub mod gamma;
pub mod mechanisms;
pub mod money;
pub mod myerson;
pub mod outcome;
pub mod rat;
pub mod regression;
pub mod utility;

pub use bids::{BidVector, RankedView, Scenario};
pub use error::{Error, Result};
pub use gamma::Gamma;
pub use mechanisms::{BurningParams, Mechanism};
pub use money::Money;
pub use outcome::{BlockEntry, ExpectedOutcome, IncludedBlock, Owner, Payment, RealizedOutcome, SlotOutcome};
pub use rat::Rat;
pub use utility::{expected_utility, honest_profile, profile_utility, Inclusion, StrategyProfile};
pub use auditor::{audit, audit_mic, audit_scp, audit_uic, AuditConfig, AuditReport, Property, ScenarioSpace, Verdict, Witness};
pub use myerson::{
    allocation_curve, check_monotone, check_payment_rule, critical_bid, zero_revenue_scan, AllocationCurve, PaymentCheck,
    PaymentRuleReport, ZeroRevenueReport,
};
pub use regression::{run_paper_suite, PaperClaim, SuiteOptions, SuiteReport};
