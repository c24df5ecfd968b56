//! Named markets used by the scenario sweeps.

use crate::error::{Error, Result};
use crate::market::{CustomerType, Intervention, ListingType, MarketConfig};

/// Control and treated utility of the calibration market.
pub const CALIBRATION_V: f64 = 0.315;
pub const CALIBRATION_V_TREATED: f64 = 0.3937;

/// Treated utility as a multiple of control utility in the sweeps.
pub const UTILITY_LIFT: f64 = 1.25;

pub const FIXED_K: usize = 50;
pub const FIXED_K_V: f64 = 6.0;
pub const FIXED_K_V_TREATED: f64 = 7.5;

/// A market with its intervention.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub market: MarketConfig,
    pub intervention: Intervention,
}

impl Scenario {
    fn new(name: &str, market: MarketConfig, intervention: Intervention) -> Self {
        Scenario {
            name: name.to_string(),
            market,
            intervention,
        }
    }

    /// Same scenario at relative demand `λ/τ = balance`.
    pub fn at_balance(&self, balance: f64) -> Scenario {
        Scenario {
            name: self.name.clone(),
            market: self.market.with_balance(balance),
            intervention: self.intervention.clone(),
        }
    }
}

/// One customer and one listing type, `α = ε = λ = τ = 1`.
pub fn calibration() -> Scenario {
    let cfg = MarketConfig::homogeneous(CALIBRATION_V, 1.0, 1.0, 1.0);
    let itv = Intervention::with_utilities(&cfg, vec![vec![CALIBRATION_V_TREATED]]);
    Scenario::new("calibration", cfg, itv)
}

fn homogeneous_lifted(name: &str, v: f64) -> Scenario {
    let cfg = MarketConfig::homogeneous(v, 1.0, 1.0, 1.0);
    let itv = Intervention::utility_lift(&cfg, UTILITY_LIFT);
    Scenario::new(name, cfg, itv)
}

pub fn low_utility() -> Scenario {
    homogeneous_lifted("low_utility", 0.155)
}

pub fn medium_utility() -> Scenario {
    homogeneous_lifted("medium_utility", 0.315)
}

pub fn high_utility() -> Scenario {
    homogeneous_lifted("high_utility", 0.62)
}

/// Two equally sized customer types with utilities `v1`, `v2` for one listing type.
fn customer_types(name: &str, v1: f64, v2: f64) -> Scenario {
    let customers = [v1, v2]
        .iter()
        .enumerate()
        .map(|(g, &v)| CustomerType {
            id: format!("g{}", g + 1),
            phi: 0.5,
            epsilon: 1.0,
            alpha: vec![1.0],
            v: vec![v],
        })
        .collect();
    let cfg = MarketConfig {
        customers,
        listings: vec![ListingType {
            id: "t1".into(),
            rho: 1.0,
            nu: 1.0,
        }],
        lambda: 1.0,
        tau: 1.0,
    };
    let itv = Intervention::utility_lift(&cfg, UTILITY_LIFT);
    Scenario::new(name, cfg, itv)
}

/// One customer type over two equally sized listing types.
fn listing_types(name: &str, v: [f64; 2], v_treated: [f64; 2]) -> Scenario {
    let cfg = MarketConfig {
        customers: vec![CustomerType {
            id: "g1".into(),
            phi: 1.0,
            epsilon: 1.0,
            alpha: vec![1.0; 2],
            v: v.to_vec(),
        }],
        listings: (0..2)
            .map(|t| ListingType {
                id: format!("t{}", t + 1),
                rho: 0.5,
                nu: 1.0,
            })
            .collect(),
        lambda: 1.0,
        tau: 1.0,
    };
    let itv = Intervention::with_utilities(&cfg, vec![v_treated.to_vec()]);
    Scenario::new(name, cfg, itv)
}

pub fn customer_hom() -> Scenario {
    customer_types("customer_hom", 0.315, 0.315)
}

pub fn customer_het_l() -> Scenario {
    customer_types("customer_het_l", 0.17, 0.51)
}

pub fn customer_het_h() -> Scenario {
    customer_types("customer_het_h", 0.12, 0.46)
}

fn lifted(v: [f64; 2]) -> [f64; 2] {
    v.map(|x| UTILITY_LIFT * x)
}

pub fn listing_hom() -> Scenario {
    listing_types("listing_hom", [0.315; 2], lifted([0.315; 2]))
}

pub fn listing_het_l() -> Scenario {
    listing_types("listing_het_l", [0.25, 0.4], lifted([0.25, 0.4]))
}

pub fn listing_het_h() -> Scenario {
    listing_types("listing_het_h", [0.1, 0.6], lifted([0.1, 0.6]))
}

const HTE_V: [f64; 2] = [0.27, 0.351];

pub fn hte_multiplicative() -> Scenario {
    listing_types("hte_mult", HTE_V, [0.3375, 0.4388])
}

pub fn hte_amplify() -> Scenario {
    listing_types("hte_amp", HTE_V, [0.2727, 0.5265])
}

pub fn hte_reverse() -> Scenario {
    listing_types("hte_rev", HTE_V, [0.432, 0.355])
}

/// Homogeneous market for fixed-size consideration sets of `k` out of `n`
/// listings. The mean-field analogue samples each listing with
/// probability `k / n`, and `ε` puts its global-control booking
/// probability at 20% when `λ = τ`.
pub fn fixed_k(k: usize, n: usize) -> Result<Scenario> {
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!("need 0 < k <= n, got k = {k}, n = {n}")));
    }
    let alpha = k as f64 / n as f64;
    // p = αvs / (ε + αvs) = 0.2 at s = 1 − p = 0.8
    let epsilon = alpha * FIXED_K_V * 0.8 * 4.0;
    let mut cfg = MarketConfig::homogeneous(FIXED_K_V, epsilon, 1.0, 1.0);
    cfg.customers[0].alpha = vec![alpha];
    let itv = Intervention::with_utilities(&cfg, vec![vec![FIXED_K_V_TREATED]]);
    Ok(Scenario::new("fixed_k", cfg, itv))
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &[
    "calibration",
    "low_utility",
    "medium_utility",
    "high_utility",
    "customer_hom",
    "customer_het_l",
    "customer_het_h",
    "listing_hom",
    "listing_het_l",
    "listing_het_h",
    "hte_mult",
    "hte_amp",
    "hte_rev",
    "fixed_k",
];

/// Looks up a preset market; `fixed_k` is built for `n_listings`.
pub fn by_name(name: &str, n_listings: usize) -> Result<Scenario> {
    Ok(match name {
        "calibration" => calibration(),
        "low_utility" => low_utility(),
        "medium_utility" => medium_utility(),
        "high_utility" => high_utility(),
        "customer_hom" => customer_hom(),
        "customer_het_l" => customer_het_l(),
        "customer_het_h" => customer_het_h(),
        "listing_hom" => listing_hom(),
        "listing_het_l" => listing_het_l(),
        "listing_het_h" => listing_het_h(),
        "hte_mult" => hte_multiplicative(),
        "hte_amp" => hte_amplify(),
        "hte_rev" => hte_reverse(),
        "fixed_k" => fixed_k(FIXED_K, n_listings)?,
        other => return Err(Error::InvalidConfig(format!("unknown preset {other:?}"))),
    })
}
