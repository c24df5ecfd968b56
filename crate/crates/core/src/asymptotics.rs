//! Closed-form limits of the booking rates in extremely unbalanced markets,
//! homogeneous-market formulas, the two-listing example and the first-order
//! supply-limited availability. These are the oracles the engines are
//! checked against.

use serde::{Deserialize, Serialize};

use crate::ledger::BookingLedger;
use crate::market::{ExpandedMarket, StateVector};

/// Below this balance the supply-limit availability approximation is poor.
pub const SUPPLY_APPROX_MIN_BALANCE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `λ/τ → 0`; rates reported as `Q/λ`.
    DemandLimit,
    /// `λ/τ → ∞`; rates reported as `Q/τ`.
    SupplyLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitTable {
    pub regime: Regime,
    /// `Q_ij / λ` or `Q_ij / τ`, indexed `[i][j]`.
    pub q_over_scale: [[f64; 2]; 2],
    pub gte_over_scale: f64,
}

impl LimitTable {
    /// The limit rates as a ledger, so estimators can be applied directly.
    pub fn ledger(&self) -> BookingLedger {
        BookingLedger::from_rates(self.q_over_scale)
    }
}

/// `g = α v / ε` for customer cell `c` and listing cell `l`.
pub fn g_factor(m: &ExpandedMarket, c: usize, l: usize) -> f64 {
    m.weight(c, l) / m.epsilon[c]
}

fn demand_rates(m: &ExpandedMarket) -> [[f64; 2]; 2] {
    let s = &m.rho;
    let mut q = [[0.0; 2]; 2];
    for c in 0..m.n_customer_cells() {
        if m.phi[c] == 0.0 {
            continue;
        }
        let denom = m.denominator(c, s);
        for l in 0..m.n_listing_cells() {
            q[c % 2][l % 2] += m.phi[c] * m.weight(c, l) * s[l] / denom;
        }
    }
    q
}

fn supply_rates(m: &ExpandedMarket) -> [[f64; 2]; 2] {
    let mut q = [[0.0; 2]; 2];
    for l in 0..m.n_listing_cells() {
        if m.rho[l] == 0.0 {
            continue;
        }
        let mut by_condition = [0.0; 2];
        for c in 0..m.n_customer_cells() {
            by_condition[c % 2] += m.phi[c] * g_factor(m, c, l);
        }
        let total = by_condition[0] + by_condition[1];
        for i in 0..2 {
            q[i][l % 2] += by_condition[i] / total * m.rho[l] * m.nu[l];
        }
    }
    q
}

/// Demand-constrained limit: choice probabilities at full availability `s = ρ`.
pub fn q_limit_demand(m: &ExpandedMarket) -> LimitTable {
    let gt = demand_rates(&m.global_treatment_view());
    let gc = demand_rates(&m.global_control_view());
    LimitTable {
        regime: Regime::DemandLimit,
        q_over_scale: demand_rates(m),
        gte_over_scale: gt[1][1] - gc[0][0],
    }
}

/// Supply-constrained limit: every listing is booked as soon as it frees up,
/// by customer conditions in proportion to `Σ φ g`.
pub fn q_limit_supply(m: &ExpandedMarket) -> LimitTable {
    let gt = supply_rates(&m.global_treatment_view());
    let gc = supply_rates(&m.global_control_view());
    LimitTable {
        regime: Regime::SupplyLimit,
        q_over_scale: supply_rates(m),
        gte_over_scale: gt[1][1] - gc[0][0],
    }
}

pub fn q_limit(m: &ExpandedMarket, regime: Regime) -> LimitTable {
    match regime {
        Regime::DemandLimit => q_limit_demand(m),
        Regime::SupplyLimit => q_limit_supply(m),
    }
}

/// Parameters of the homogeneous one-type market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Homogeneous {
    pub v: f64,
    pub v_treated: f64,
    pub epsilon: f64,
    pub rho: f64,
}

/// Closed-form limit rates of the homogeneous market under `TSR(a_C, a_L)`.
pub fn homogeneous_limits(h: &Homogeneous, a_c: f64, a_l: f64, regime: Regime) -> LimitTable {
    let Homogeneous { v, v_treated: vt, epsilon: e, rho } = *h;
    match regime {
        Regime::DemandLimit => {
            let mixed = e + (1.0 - a_l) * rho * v + a_l * rho * vt;
            LimitTable {
                regime,
                q_over_scale: [
                    [
                        (1.0 - a_c) * (1.0 - a_l) * rho * v / (e + rho * v),
                        (1.0 - a_c) * a_l * rho * v / (e + rho * v),
                    ],
                    [a_c * (1.0 - a_l) * rho * v / mixed, a_c * a_l * rho * vt / mixed],
                ],
                gte_over_scale: rho * vt / (e + rho * vt) - rho * v / (e + rho * v),
            }
        }
        Regime::SupplyLimit => {
            let mixed = (1.0 - a_c) * v + a_c * vt;
            LimitTable {
                regime,
                q_over_scale: [
                    [(1.0 - a_c) * (1.0 - a_l) * rho, (1.0 - a_c) * v / mixed * a_l * rho],
                    [a_c * (1.0 - a_l) * rho, a_c * vt / mixed * a_l * rho],
                ],
                gte_over_scale: 0.0,
            }
        }
    }
}

/// Two listings, one homogeneous customer population, large `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoListingForms {
    pub gte: f64,
    pub cr_estimate: f64,
    /// Naive LR estimate with one of the two listings treated.
    pub lr_estimate: f64,
    /// Probability an arriving customer books a free listing under CR.
    pub zeta: f64,
    /// Probability a CR booking was made by a treated customer.
    pub eta: f64,
}

pub fn two_listing_forms(v: f64, vt: f64, e: f64, lambda: f64, tau: f64, a_c: f64) -> TwoListingForms {
    let rate = |u: f64| 1.0 / ((e + u) / (lambda * u) + 1.0 / tau);
    let gte = 2.0 * rate(vt) - 2.0 * rate(v);
    let a_l = 0.5;
    let lr_estimate = rate(vt) / a_l - rate(v) / (1.0 - a_l);
    let zeta = a_c * vt / (e + vt) + (1.0 - a_c) * v / (e + v);
    let eta = a_c * vt / (e + vt) / zeta;
    let treated = 1.0 / ((e + vt) / (a_c * lambda * vt) + 1.0 / (eta * tau));
    let control = 1.0 / ((e + v) / ((1.0 - a_c) * lambda * v) + 1.0 / ((1.0 - eta) * tau));
    let cr_estimate = 2.0 / a_c * treated - 2.0 / (1.0 - a_c) * control;
    TwoListingForms {
        gte,
        cr_estimate,
        lr_estimate,
        zeta,
        eta,
    }
}

/// First-order availability in a supply-constrained market:
/// `s(θ,j) = ρ(θ,j) ν(θ) / (balance · Σ φ g)`.
///
/// Only meaningful for large balance (see [`SUPPLY_APPROX_MIN_BALANCE`]).
pub fn supply_state_approx(m: &ExpandedMarket, balance: f64) -> StateVector {
    StateVector(
        (0..m.n_listing_cells())
            .map(|l| {
                if m.rho[l] == 0.0 {
                    return 0.0;
                }
                let pull: f64 = (0..m.n_customer_cells()).map(|c| m.phi[c] * g_factor(m, c, l)).sum();
                m.rho[l] * m.nu[l] / (balance * pull)
            })
            .collect(),
    )
}
