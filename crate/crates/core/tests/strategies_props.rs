use proptest::prelude::*;
use tera_tc_core::band::{AbsorptionTable, BandPlan};
use tera_tc_core::channel::LinkParams;
use tera_tc_core::config::SolverConfig;
use tera_tc_core::strategies::{audit, DeviceSpec, Scenario, Strategy};

fn scenario(
    n: usize,
    start_ghz: f64,
    rates: &[f64],
    distances: Option<&[f64]>,
    p_dbm: f64,
) -> Scenario {
    let table = AbsorptionTable::synthetic();
    let band = BandPlan::contiguous(start_ghz * 1e9, 1e9, n, |f| table.lookup(f)).unwrap();
    let devices = rates
        .iter()
        .enumerate()
        .map(|(i, r)| DeviceSpec {
            rate_req: r * 1e9,
            fixed_distance: distances.map(|d| d[i]),
        })
        .collect();
    let params = LinkParams::from_db(15.0, 15.0, -168.0, p_dbm).unwrap();
    Scenario::new(band, params, devices, SolverConfig::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn variable_distance_strategies_pass_audit(
        rates in prop::collection::vec(0.5f64..5.0, 1..5),
        extra in 0usize..3,
        start in 540.0f64..560.0,
        p_dbm in 15.0f64..40.0,
    ) {
        let s = scenario(rates.len() + extra, start, &rates, None, p_dbm);
        let mut tc = Vec::new();
        for strategy in [Strategy::Proposed, Strategy::Distmax, Strategy::Nonadaptive, Strategy::Exhaustive] {
            let a = strategy.run(&s).unwrap();
            prop_assert!(audit(&a, &s).is_ok(), "{strategy}: {:?}", audit(&a, &s));
            prop_assert_eq!(&a, &strategy.run(&s).unwrap());
            tc.push(a.tc);
        }
        // Both searches stop within epsilon of the same fixed point.
        prop_assert!(tc[3] >= tc[0] * (1.0 - 1e-5), "exhaustive {} < proposed {}", tc[3], tc[0]);
        prop_assert!(tc[0] >= 0.0);
    }

    #[test]
    fn fixed_distance_strategies_pass_audit(
        distances in prop::collection::vec(0.5f64..30.0, 1..12),
        extra in 0usize..5,
        p_dbm in 10.0f64..40.0,
    ) {
        let rates = vec![0.0; distances.len()];
        let s = scenario(distances.len() + extra, 545.0, &rates, Some(&distances), p_dbm);
        for strategy in [Strategy::FixedTc, Strategy::SumRate] {
            let a = strategy.run(&s).unwrap();
            prop_assert!(audit(&a, &s).is_ok());
            prop_assert!((a.power_used - s.params.p_total).abs() <= 1e-9 * s.params.p_total);
        }
    }
}

#[test]
fn nonadaptive_close_to_proposed_on_quiet_spectrum() {
    let s = scenario(100, 500.0, &[1.0; 25], None, 30.0);
    let p = Strategy::Proposed.run(&s).unwrap();
    let n = Strategy::Nonadaptive.run(&s).unwrap();
    assert!(
        (p.tc - n.tc).abs() <= 0.02 * p.tc,
        "proposed {} nonadaptive {}",
        p.tc,
        n.tc
    );
}

#[test]
fn proposed_tc_grows_with_power() {
    let mut last = 0.0;
    for p_dbm in [20.0, 25.0, 30.0, 35.0, 40.0] {
        let s = scenario(100, 500.0, &[1.0; 100], None, p_dbm);
        let a = Strategy::Proposed.run(&s).unwrap();
        assert!(a.tc > last);
        last = a.tc;
    }
}

#[test]
fn exhaustive_respects_enumeration_cap() {
    let mut s = scenario(6, 500.0, &[1.0; 6], None, 30.0);
    s.config.enumeration_cap = 100.0;
    assert!(Strategy::Exhaustive.run(&s).is_err());
}
