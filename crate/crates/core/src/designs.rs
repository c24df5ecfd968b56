//! Balance-dependent TSR allocation, the TSRI interpolation weight and the
//! clustered two-type market.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{CustomerType, DesignSpec, Intervention, ListingType, MarketConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsrSchedule {
    pub a_bar_c: f64,
    pub a_bar_l: f64,
    /// Exponent multiplier `c` in `e^{−c λ/τ}`.
    pub c_exponent: f64,
}

impl Default for TsrSchedule {
    fn default() -> Self {
        TsrSchedule {
            a_bar_c: 0.5,
            a_bar_l: 0.5,
            c_exponent: 1.0,
        }
    }
}

impl TsrSchedule {
    pub fn validate(&self) -> Result<()> {
        let interior = |a: f64| a > 0.0 && a < 1.0;
        if !interior(self.a_bar_c) || !interior(self.a_bar_l) || !(self.c_exponent > 0.0) {
            return Err(Error::InvalidDesign(format!("invalid TSR schedule {self:?}")));
        }
        Ok(())
    }
}

/// `β = e^{−c · balance}`.
pub fn beta_weight(balance: f64, c: f64) -> f64 {
    (-c * balance).exp()
}

/// `(a_C, a_L)` moving from `(ā_C, 1)` at small balance to `(1, ā_L)` at large balance.
pub fn tsr_schedule(balance: f64, sched: &TsrSchedule) -> (f64, f64) {
    let b = beta_weight(balance, sched.c_exponent);
    let a_c = (1.0 - b) + sched.a_bar_c * b;
    let a_l = sched.a_bar_l * (1.0 - b) + b;
    (a_c, a_l)
}

/// The TSR design selected by the schedule at this balance.
pub fn tsr_design(balance: f64, sched: &TsrSchedule) -> DesignSpec {
    let (a_c, a_l) = tsr_schedule(balance, sched);
    DesignSpec::Tsr { a_c, a_l }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterScenario {
    /// Own-cluster utility.
    pub x: f64,
    /// Cross-cluster utility.
    pub y: f64,
    /// Multiplicative treatment lift.
    pub delta: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub tau: f64,
}

impl ClusterScenario {
    /// `x = 0.5`, `δ = 1.3`, `α = ε = λ = τ = 1` with preference ratio `y / x`.
    pub fn with_ratio(ratio: f64) -> Self {
        ClusterScenario {
            x: 0.5,
            y: 0.5 * ratio,
            delta: 1.3,
            epsilon: 1.0,
            alpha: 1.0,
            lambda: 1.0,
            tau: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x > 0.0 && self.y >= 0.0 && self.y <= self.x) {
            return Err(Error::InvalidConfig(format!("need x >= y >= 0, got x = {}, y = {}", self.x, self.y)));
        }
        if !(self.delta > 1.0) {
            return Err(Error::InvalidConfig(format!("lift delta must exceed 1, got {}", self.delta)));
        }
        Ok(())
    }
}

/// Two customer and two listing types with utilities `[[x, y], [y, x]]`,
/// `ṽ = δ v`, and the cluster design treating `θ₁`.
///
/// A cross-cluster utility of exactly 0 is represented by the smallest
/// positive float, since utilities must stay positive.
pub fn cluster_market(cs: &ClusterScenario) -> Result<(MarketConfig, Intervention, DesignSpec)> {
    cs.validate()?;
    let y = if cs.y > 0.0 { cs.y } else { f64::MIN_POSITIVE };
    let v = [[cs.x, y], [y, cs.x]];
    let customers = (0..2)
        .map(|g| CustomerType {
            id: format!("g{}", g + 1),
            phi: 0.5,
            epsilon: cs.epsilon,
            alpha: vec![cs.alpha; 2],
            v: v[g].to_vec(),
        })
        .collect();
    let listings = (0..2)
        .map(|t| ListingType {
            id: format!("t{}", t + 1),
            rho: 0.5,
            nu: 1.0,
        })
        .collect();
    let cfg = MarketConfig {
        customers,
        listings,
        lambda: cs.lambda,
        tau: cs.tau,
    };
    let itv = Intervention::utility_lift(&cfg, cs.delta);
    Ok((cfg, itv, DesignSpec::Cluster { assignment: vec![true, false] }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_limits() {
        let s = TsrSchedule::default();
        let (a_c, a_l) = tsr_schedule(1e-9, &s);
        assert!((a_c - 0.5).abs() < 1e-8 && (a_l - 1.0).abs() < 1e-8);
        let (a_c, a_l) = tsr_schedule(1e9, &s);
        assert!((a_c - 1.0).abs() < 1e-8 && (a_l - 0.5).abs() < 1e-8);
    }

    #[test]
    fn schedule_at_unit_balance() {
        let (a_c, a_l) = tsr_schedule(1.0, &TsrSchedule::default());
        let e = (-1.0_f64).exp();
        assert!((e - 0.367879).abs() < 1e-6);
        assert!((a_c - 0.816060).abs() < 1e-6);
        assert!((a_l - 0.683940).abs() < 1e-6);
    }

    #[test]
    fn beta_limits() {
        assert!((beta_weight(1.0, 1.0) - 0.367879).abs() < 1e-6);
        assert!((beta_weight(1e-12, 1.0) - 1.0).abs() < 1e-11);
        assert!(beta_weight(1e6, 1.0) < 1e-300);
    }

    #[test]
    fn cluster_structure() {
        let (cfg, itv, d) = cluster_market(&ClusterScenario { y: 0.25, ..ClusterScenario::with_ratio(0.0) }).unwrap();
        assert_eq!(cfg.customers[0].v, vec![0.5, 0.25]);
        assert_eq!(cfg.customers[1].v, vec![0.25, 0.5]);
        for (row, expect) in itv.v_treated.iter().zip([[0.65, 0.325], [0.325, 0.65]]) {
            for (a, b) in row.iter().zip(expect) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert_eq!(d, DesignSpec::Cluster { assignment: vec![true, false] });

        let (cfg, _, _) = cluster_market(&ClusterScenario::with_ratio(1.0)).unwrap();
        assert!(cfg.customers.iter().all(|c| c.v == vec![0.5, 0.5]));

        let (cfg, _, _) = cluster_market(&ClusterScenario::with_ratio(0.0)).unwrap();
        assert!(cfg.customers[0].v[1] < 1e-300);
    }

    #[test]
    fn cluster_scenario_rejects_bad_ratios() {
        assert!(cluster_market(&ClusterScenario::with_ratio(1.5)).is_err());
        assert!(cluster_market(&ClusterScenario { delta: 1.0, ..ClusterScenario::with_ratio(0.5) }).is_err());
    }
}
