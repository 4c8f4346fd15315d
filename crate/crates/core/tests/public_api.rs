use tfm_core::{
    audit, check_payment_rule, expected_utility, BidVector, Gamma, Mechanism, Money, Property, Rat, Scenario, ScenarioSpace,
    Verdict,
};

fn mech(json: &str) -> Mechanism {
    serde_json::from_str(json).expect("valid mechanism json")
}

#[test]
fn json_mechanism_to_failing_audit_with_replayable_witness() {
    let m = mech(r#"{"kind":"second_price","block_size":3}"#);
    let cfg = tfm_core::AuditConfig {
        gamma: Gamma::ZERO,
        ..Default::default()
    };
    let report = audit(&m, Property::Mic, 1, &[BidVector::from_units(&[10, 8, 5])], &cfg).unwrap();
    assert_eq!(report.verdict, Verdict::Fail);
    let w = &report.witnesses[0];
    assert!(w.replay(&m, Gamma::ZERO).unwrap());
    // Dropping the 5 and adding a fake at 8 (fakes lose ties) makes both
    // users pay 8: revenue 16 against 10.
    assert_eq!(report.best_gain(), Some(&Rat::from_integer(6)));

    let text = serde_json::to_string(&report).unwrap();
    let back: tfm_core::AuditReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
}

#[test]
fn burning_auction_passes_small_grid() {
    let m = mech(r#"{"kind":"burning_second_price","block_size":4,"k":2,"k_prime":2,"gamma":"1/1","c":1}"#);
    let grid = ScenarioSpace::small(4, 3).vectors().unwrap();
    let cfg = tfm_core::AuditConfig::default();
    for p in [Property::Uic, Property::Mic, Property::Scp] {
        let r = audit(&m, p, 1, &grid, &cfg).unwrap();
        assert!(r.passed(), "{p}: {:?}", r.best_gain());
        assert!(r.deviations_checked > 0);
    }
}

#[test]
fn honest_utility_of_a_coalition() {
    let m = mech(r#"{"kind":"burning_second_price","block_size":4,"k":2,"k_prime":2,"gamma":"1/1","c":1}"#);
    let v = BidVector::from_units(&[10, 8, 5, 3]);
    let s = Scenario::truthful(&v, [0, 1], true).unwrap();
    let out = m.evaluate(&m.include_honest(&v)).unwrap();
    // (10 - 5) + (8 - 5) for the pair, 5 + 3 for the miner.
    assert_eq!(expected_utility(&s, &out, Gamma::ONE).unwrap(), Rat::from_integer(16));
}

#[test]
fn payment_rule_and_reserve_thresholds() {
    let m = mech(r#"{"kind":"posted_price_no_burn","reserve":"2.5"}"#);
    let r = check_payment_rule(&m, &BidVector::new(vec![Money::from_units(4), Money::from_units(1)]).unwrap()).unwrap();
    assert!(r.matches());
    assert_eq!(r.checks.len(), 1);
    assert_eq!(r.checks[0].critical_bid, Some("2.5".parse().unwrap()));
}
