mod common;

use common::{market, market_with_intervention};
use marketlab::estimators::*;
use marketlab::ledger::BookingLedger;
use marketlab::market::{expand_for_design, DesignSpec, Intervention};
use marketlab::mean_field::{booking_rates_mf, RateWindow};
use proptest::prelude::*;

fn steady(cfg: &marketlab::market::MarketConfig, itv: &Intervention, d: DesignSpec) -> BookingLedger {
    booking_rates_mf(&expand_for_design(cfg, itv, &d).unwrap(), &RateWindow::steady()).unwrap()
}

#[test]
fn calibration_gte() {
    let cfg = marketlab::market::MarketConfig::homogeneous(0.315, 1.0, 1.0, 1.0);
    let itv = Intervention::with_utilities(&cfg, vec![vec![0.3937]]);
    assert!((gte_true(&cfg, &itv).unwrap() - 0.0310691).abs() < 1e-6);
}

#[test]
fn estimator_names_round_trip_through_json() {
    let ids = vec![EstimatorId::NaiveCr, EstimatorId::Tsri { k: 2.0 }, EstimatorId::ClusterLr];
    let json = serde_json::to_string(&ids).unwrap();
    assert_eq!(json, r#"["CR","TSRI-2","Cluster"]"#);
    assert_eq!(serde_json::from_str::<Vec<EstimatorId>>(&json).unwrap(), ids);
    assert!("TSRI-x".parse::<EstimatorId>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn null_intervention_estimates_vanish(cfg in market(0.05f64..20.0), a_c in 0.1f64..0.9, a_l in 0.1f64..0.9, beta in 0.0f64..=1.0) {
        let itv = Intervention::null(&cfg);
        prop_assert!(gte_true(&cfg, &itv).unwrap().abs() < 1e-12);
        let scale = cfg.lambda.min(cfg.tau);
        let tol = 1e-9 * scale.max(1.0);
        let cr = est_cr(&steady(&cfg, &itv, DesignSpec::Cr { a_c }), a_c).unwrap();
        let lr = est_lr(&steady(&cfg, &itv, DesignSpec::Lr { a_l }), a_l).unwrap();
        prop_assert!(cr.abs() < tol && lr.abs() < tol);
        let tsr = steady(&cfg, &itv, DesignSpec::Tsr { a_c, a_l });
        prop_assert!(est_tsrn(&tsr, a_c, a_l).unwrap().abs() < tol);
        for k in [0.0, 1.0, 2.0] {
            prop_assert!(est_tsri(&tsr, a_c, a_l, beta, k).unwrap().abs() < tol);
        }
    }

    #[test]
    fn positive_interventions_raise_bookings((cfg, itv) in market_with_intervention(0.05f64..20.0)) {
        prop_assert!(gte_true(&cfg, &itv).unwrap() > 0.0);
    }

    #[test]
    fn estimators_are_linear_in_the_ledger(q in prop::array::uniform2(prop::array::uniform2(0.0f64..1.0)), c in 0.1f64..10.0) {
        let l = BookingLedger::from_rates(q);
        let ls = l.scaled(c);
        let ctx = DesignContext { a_c: 0.3, a_l: 0.6, beta: 0.4 };
        for id in EstimatorId::standard().into_iter().chain([EstimatorId::ClusterLr]) {
            let a = id.evaluate(&l, &ctx).unwrap() * c;
            let b = id.evaluate(&ls, &ctx).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn tsri_endpoints_reduce_to_single_sided_forms(q in prop::array::uniform2(prop::array::uniform2(0.0f64..1.0)), a_c in 0.1f64..0.9, a_l in 0.1f64..0.9) {
        let l = BookingLedger::from_rates(q);
        let norm = |i: usize, j: usize| {
            l.q(i, j) / ([1.0 - a_c, a_c][i] * [1.0 - a_l, a_l][j])
        };
        let cr_form = norm(1, 1) - norm(0, 1);
        let lr_form = norm(1, 1) - norm(1, 0);
        prop_assert!((est_tsri(&l, a_c, a_l, 1.0, 3.0).unwrap() - cr_form).abs() < 1e-12);
        prop_assert!((est_tsri(&l, a_c, a_l, 0.0, 3.0).unwrap() - lr_form).abs() < 1e-12);
        prop_assert!((interpolating_tsr(&l, a_c, a_l, 0.5).unwrap() - 0.5 * (cr_form + lr_form)).abs() < 1e-12);
    }
}
