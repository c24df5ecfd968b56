#![allow(dead_code)]

use marketlab::market::{CustomerType, Intervention, ListingType, MarketConfig};
use proptest::prelude::*;

/// Random market with up to three customer and three listing types.
pub fn market(lambda: impl Strategy<Value = f64>) -> impl Strategy<Value = MarketConfig> {
    (1usize..=3, 1usize..=3, lambda, 0.5f64..2.0).prop_flat_map(|(ng, nt, lambda, tau)| {
        let customer = (
            0.1f64..1.0,
            0.5f64..2.0,
            prop::collection::vec(0.2f64..=1.0, nt),
            prop::collection::vec(0.05f64..1.5, nt),
        );
        let listing = (0.1f64..1.0, 0.5f64..2.0);
        (
            prop::collection::vec(customer, ng),
            prop::collection::vec(listing, nt),
            Just(lambda),
            Just(tau),
        )
            .prop_map(|(cs, ls, lambda, tau)| {
                let phi_sum: f64 = cs.iter().map(|c| c.0).sum();
                let rho_sum: f64 = ls.iter().map(|l| l.0).sum();
                MarketConfig {
                    customers: cs
                        .into_iter()
                        .enumerate()
                        .map(|(g, (phi, epsilon, alpha, v))| CustomerType {
                            id: format!("g{g}"),
                            phi: phi / phi_sum,
                            epsilon,
                            alpha,
                            v,
                        })
                        .collect(),
                    listings: ls
                        .into_iter()
                        .enumerate()
                        .map(|(t, (rho, nu))| ListingType {
                            id: format!("t{t}"),
                            rho: rho / rho_sum,
                            nu,
                        })
                        .collect(),
                    lambda,
                    tau,
                }
            })
    })
}

/// Treated utilities `v · lift` with a lift in `[1.05, 1.6]` per pair.
pub fn positive_intervention(cfg: &MarketConfig) -> impl Strategy<Value = Intervention> {
    let base = cfg.clone();
    let n = cfg.n_customer_types() * cfg.n_listing_types();
    prop::collection::vec(1.05f64..1.6, n).prop_map(move |lifts| {
        let nt = base.n_listing_types();
        let v_treated = base
            .customers
            .iter()
            .enumerate()
            .map(|(g, c)| c.v.iter().enumerate().map(|(t, v)| v * lifts[g * nt + t]).collect())
            .collect();
        Intervention::with_utilities(&base, v_treated)
    })
}

pub fn market_with_intervention(lambda: impl Strategy<Value = f64>) -> impl Strategy<Value = (MarketConfig, Intervention)> {
    market(lambda).prop_flat_map(|cfg| {
        let itv = positive_intervention(&cfg);
        (Just(cfg), itv)
    })
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}
