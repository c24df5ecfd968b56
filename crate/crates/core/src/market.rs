//! Market primitives, validation, mean-field choice probabilities and the
//! treatment type-expansion on which every engine runs.
//!
//! Types are indexed by declaration order. After expansion, customer cell
//! `(γ, i)` lives at index `2γ + i` and listing cell `(θ, j)` at `2θ + j`,
//! where `i, j ∈ {0, 1}` are the control/treatment conditions. Cells whose
//! design mass is zero are kept (with mass exactly 0) so vector layouts do
//! not depend on the design.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SHARE_TOL: f64 = 1e-9;
const BOUNDS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomerType {
    pub id: String,
    /// Arrival share.
    pub phi: f64,
    /// Scaled outside-option weight.
    pub epsilon: f64,
    /// Consideration probability per listing type.
    pub alpha: Vec<f64>,
    /// Control utility per listing type.
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListingType {
    pub id: String,
    /// Mass share.
    pub rho: f64,
    /// Occupancy-rate multiplier: a booked listing frees up at rate `tau * nu`.
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub customers: Vec<CustomerType>,
    pub listings: Vec<ListingType>,
    /// Aggregate customer arrival rate (per unit listing mass).
    pub lambda: f64,
    /// Replenishment scale.
    pub tau: f64,
}

impl MarketConfig {
    /// One customer type, one listing type, `α = ρ = ν = φ = 1`.
    pub fn homogeneous(v: f64, epsilon: f64, lambda: f64, tau: f64) -> Self {
        MarketConfig {
            customers: vec![CustomerType {
                id: "c".into(),
                phi: 1.0,
                epsilon,
                alpha: vec![1.0],
                v: vec![v],
            }],
            listings: vec![ListingType {
                id: "l".into(),
                rho: 1.0,
                nu: 1.0,
            }],
            lambda,
            tau,
        }
    }

    pub fn n_customer_types(&self) -> usize {
        self.customers.len()
    }

    pub fn n_listing_types(&self) -> usize {
        self.listings.len()
    }

    /// Market balance `λ/τ`.
    pub fn balance(&self) -> f64 {
        self.lambda / self.tau
    }

    /// Same market with `λ` rescaled so that `λ/τ = balance`.
    pub fn with_balance(&self, balance: f64) -> Self {
        let mut out = self.clone();
        out.lambda = balance * self.tau;
        out
    }
}

/// Treated utilities and consideration probabilities, indexed `[γ][θ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intervention {
    pub v_treated: Vec<Vec<f64>>,
    pub alpha_treated: Vec<Vec<f64>>,
}

impl Intervention {
    /// The intervention that changes nothing.
    pub fn null(cfg: &MarketConfig) -> Self {
        Intervention {
            v_treated: cfg.customers.iter().map(|c| c.v.clone()).collect(),
            alpha_treated: cfg.customers.iter().map(|c| c.alpha.clone()).collect(),
        }
    }

    /// Treated utilities `ṽ = lift · v`; consideration probabilities unchanged.
    pub fn utility_lift(cfg: &MarketConfig, lift: f64) -> Self {
        Intervention {
            v_treated: cfg
                .customers
                .iter()
                .map(|c| c.v.iter().map(|v| v * lift).collect())
                .collect(),
            alpha_treated: cfg.customers.iter().map(|c| c.alpha.clone()).collect(),
        }
    }

    /// Explicit treated utilities; `α̃` inherits `α`.
    pub fn with_utilities(cfg: &MarketConfig, v_treated: Vec<Vec<f64>>) -> Self {
        Intervention {
            v_treated,
            alpha_treated: cfg.customers.iter().map(|c| c.alpha.clone()).collect(),
        }
    }

    /// Checks the intervention is fully keyed over `Γ × Θ` with positive entries.
    pub fn validate(&self, cfg: &MarketConfig) -> Result<()> {
        let (g, t) = (cfg.n_customer_types(), cfg.n_listing_types());
        let shaped = |m: &Vec<Vec<f64>>| m.len() == g && m.iter().all(|row| row.len() == t);
        if !shaped(&self.v_treated) || !shaped(&self.alpha_treated) {
            return Err(Error::InvalidConfig(format!(
                "intervention must be keyed over {g} customer x {t} listing types"
            )));
        }
        for (gi, (vr, ar)) in self.v_treated.iter().zip(&self.alpha_treated).enumerate() {
            for (ti, (&v, &a)) in vr.iter().zip(ar).enumerate() {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::NonPositiveParameter(format!("v_treated[{gi}][{ti}] = {v}")));
                }
                if !(a > 0.0 && a <= 1.0) {
                    return Err(Error::NonPositiveParameter(format!(
                        "alpha_treated[{gi}][{ti}] = {a}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterventionSign {
    Positive,
    Negative,
    Indeterminate,
}

/// Positive iff `α̃ṽ > αv` on every pair, negative iff `<` on every pair.
pub fn classify_intervention(cfg: &MarketConfig, itv: &Intervention) -> InterventionSign {
    let mut all_up = true;
    let mut all_down = true;
    for (g, c) in cfg.customers.iter().enumerate() {
        for t in 0..cfg.n_listing_types() {
            let control = c.alpha[t] * c.v[t];
            let treated = itv.alpha_treated[g][t] * itv.v_treated[g][t];
            all_up &= treated > control;
            all_down &= treated < control;
        }
    }
    match (all_up, all_down) {
        (true, _) => InterventionSign::Positive,
        (_, true) => InterventionSign::Negative,
        _ => InterventionSign::Indeterminate,
    }
}

/// Randomization design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DesignSpec {
    GlobalControl,
    GlobalTreatment,
    Cr { a_c: f64 },
    Lr { a_l: f64 },
    Tsr { a_c: f64, a_l: f64 },
    /// Listing-side clusters; `assignment[θ]` is true when type θ is treated.
    Cluster { assignment: Vec<bool> },
}

impl DesignSpec {
    /// Customer and listing treatment fractions `(a_C, a_L)`; for cluster
    /// designs `a_L` is the treated listing mass.
    pub fn fractions(&self, cfg: &MarketConfig) -> Result<(f64, f64)> {
        let interior = |a: f64| a > 0.0 && a < 1.0;
        let half_open = |a: f64| a > 0.0 && a <= 1.0;
        match *self {
            DesignSpec::GlobalControl => Ok((0.0, 0.0)),
            DesignSpec::GlobalTreatment => Ok((1.0, 1.0)),
            DesignSpec::Cr { a_c } if interior(a_c) => Ok((a_c, 1.0)),
            DesignSpec::Lr { a_l } if interior(a_l) => Ok((1.0, a_l)),
            DesignSpec::Tsr { a_c, a_l } if half_open(a_c) && half_open(a_l) => Ok((a_c, a_l)),
            DesignSpec::Cluster { ref assignment } => {
                if assignment.len() != cfg.n_listing_types() {
                    return Err(Error::InvalidDesign(format!(
                        "cluster assignment has {} entries for {} listing types",
                        assignment.len(),
                        cfg.n_listing_types()
                    )));
                }
                let z = cfg
                    .listings
                    .iter()
                    .zip(assignment)
                    .filter(|(_, &a)| a)
                    .map(|(l, _)| l.rho)
                    .sum();
                Ok((1.0, z))
            }
            ref d => Err(Error::InvalidDesign(format!("fractions out of range in {d:?}"))),
        }
    }
}

fn check_positive(what: impl FnOnce() -> String, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveParameter(format!("{} = {x}", what())))
    }
}

/// Validates a market, renormalizing shares that are within `1e-9` of 1.
pub fn validate_market(cfg: &MarketConfig) -> Result<MarketConfig> {
    if cfg.customers.is_empty() || cfg.listings.is_empty() {
        return Err(Error::InvalidConfig("market needs at least one customer and one listing type".into()));
    }
    check_positive(|| "lambda".into(), cfg.lambda)?;
    check_positive(|| "tau".into(), cfg.tau)?;
    let nt = cfg.n_listing_types();
    for l in &cfg.listings {
        check_positive(|| format!("rho[{}]", l.id), l.rho)?;
        check_positive(|| format!("nu[{}]", l.id), l.nu)?;
    }
    for c in &cfg.customers {
        check_positive(|| format!("phi[{}]", c.id), c.phi)?;
        check_positive(|| format!("epsilon[{}]", c.id), c.epsilon)?;
        if c.alpha.len() != nt || c.v.len() != nt {
            return Err(Error::InvalidConfig(format!(
                "customer {} must carry alpha and v for all {nt} listing types",
                c.id
            )));
        }
        for (t, (&a, &v)) in c.alpha.iter().zip(&c.v).enumerate() {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::NonPositiveParameter(format!(
                    "alpha[{}][{}] = {a}",
                    c.id, cfg.listings[t].id
                )));
            }
            check_positive(|| format!("v[{}][{}]", c.id, cfg.listings[t].id), v)?;
        }
    }
    let phi_sum: f64 = cfg.customers.iter().map(|c| c.phi).sum();
    let rho_sum: f64 = cfg.listings.iter().map(|l| l.rho).sum();
    if (phi_sum - 1.0).abs() > SHARE_TOL {
        return Err(Error::ShareSumMismatch { which: "customer", sum: phi_sum });
    }
    if (rho_sum - 1.0).abs() > SHARE_TOL {
        return Err(Error::ShareSumMismatch { which: "listing", sum: rho_sum });
    }
    let mut out = cfg.clone();
    for c in &mut out.customers {
        c.phi /= phi_sum;
    }
    for l in &mut out.listings {
        l.rho /= rho_sum;
    }
    Ok(out)
}

/// Availability masses per expanded listing cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector(pub Vec<f64>);

impl std::ops::Deref for StateVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Choice probabilities of one customer cell over the expanded listing cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceProbabilities {
    pub listing: Vec<f64>,
    pub outside: f64,
}

/// The `(γ,i) × (θ,j)` treatment-expanded market.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedMarket {
    n_customer_types: usize,
    n_listing_types: usize,
    pub phi: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub rho: Vec<f64>,
    pub nu: Vec<f64>,
    /// Row-major `[customer_cell][listing_cell]`.
    pub alpha: Vec<f64>,
    pub v: Vec<f64>,
    weight: Vec<f64>,
    pub lambda: f64,
    pub tau: f64,
    pub design: DesignSpec,
    pub a_c: f64,
    /// Treated listing mass (equals `a_L` outside cluster designs).
    pub a_l: f64,
}

/// Builds the expanded market for a design.
pub fn expand_for_design(cfg: &MarketConfig, itv: &Intervention, design: &DesignSpec) -> Result<ExpandedMarket> {
    let cfg = validate_market(cfg)?;
    itv.validate(&cfg)?;
    let (a_c, a_l) = design.fractions(&cfg)?;
    let (ng, nt) = (cfg.n_customer_types(), cfg.n_listing_types());
    let ncc = 2 * ng;
    let nlc = 2 * nt;

    let mut phi = vec![0.0; ncc];
    let mut epsilon = vec![0.0; ncc];
    for (g, c) in cfg.customers.iter().enumerate() {
        phi[2 * g] = (1.0 - a_c) * c.phi;
        phi[2 * g + 1] = a_c * c.phi;
        epsilon[2 * g] = c.epsilon;
        epsilon[2 * g + 1] = c.epsilon;
    }

    let mut rho = vec![0.0; nlc];
    let mut nu = vec![0.0; nlc];
    for (t, l) in cfg.listings.iter().enumerate() {
        let treated_share = match design {
            DesignSpec::Cluster { assignment } => {
                if assignment[t] {
                    1.0
                } else {
                    0.0
                }
            }
            _ => a_l,
        };
        rho[2 * t] = (1.0 - treated_share) * l.rho;
        rho[2 * t + 1] = treated_share * l.rho;
        nu[2 * t] = l.nu;
        nu[2 * t + 1] = l.nu;
    }

    let mut alpha = vec![0.0; ncc * nlc];
    let mut v = vec![0.0; ncc * nlc];
    for (g, c) in cfg.customers.iter().enumerate() {
        for i in 0..2 {
            for t in 0..nt {
                for j in 0..2 {
                    let idx = (2 * g + i) * nlc + 2 * t + j;
                    if i == 1 && j == 1 {
                        alpha[idx] = itv.alpha_treated[g][t];
                        v[idx] = itv.v_treated[g][t];
                    } else {
                        alpha[idx] = c.alpha[t];
                        v[idx] = c.v[t];
                    }
                }
            }
        }
    }
    let weight = alpha.iter().zip(&v).map(|(a, v)| a * v).collect();

    Ok(ExpandedMarket {
        n_customer_types: ng,
        n_listing_types: nt,
        phi,
        epsilon,
        rho,
        nu,
        alpha,
        v,
        weight,
        lambda: cfg.lambda,
        tau: cfg.tau,
        design: design.clone(),
        a_c,
        a_l,
    })
}

impl ExpandedMarket {
    pub fn n_customer_types(&self) -> usize {
        self.n_customer_types
    }

    pub fn n_listing_types(&self) -> usize {
        self.n_listing_types
    }

    pub fn n_customer_cells(&self) -> usize {
        2 * self.n_customer_types
    }

    pub fn n_listing_cells(&self) -> usize {
        2 * self.n_listing_types
    }

    pub fn customer_cell(g: usize, i: usize) -> usize {
        2 * g + i
    }

    pub fn listing_cell(t: usize, j: usize) -> usize {
        2 * t + j
    }

    /// Treatment condition of an expanded cell index.
    pub fn condition(cell: usize) -> usize {
        cell % 2
    }

    /// `α · v` for a customer/listing cell pair.
    #[inline]
    pub fn weight(&self, c: usize, l: usize) -> f64 {
        self.weight[c * self.n_listing_cells() + l]
    }

    pub fn weight_row(&self, c: usize) -> &[f64] {
        let n = self.n_listing_cells();
        &self.weight[c * n..(c + 1) * n]
    }

    /// `τ ν(θ)` per listing cell.
    pub fn replenish_rate(&self, l: usize) -> f64 {
        self.tau * self.nu[l]
    }

    pub fn full_availability(&self) -> StateVector {
        StateVector(self.rho.clone())
    }

    /// Indices of listing cells with positive mass.
    pub fn active_listing_cells(&self) -> Vec<usize> {
        (0..self.n_listing_cells()).filter(|&l| self.rho[l] > 0.0).collect()
    }

    pub fn check_state(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.n_listing_cells() {
            return Err(Error::InvalidConfig(format!(
                "state has {} components, market has {} listing cells",
                s.len(),
                self.n_listing_cells()
            )));
        }
        for (index, (&value, &upper)) in s.iter().zip(&self.rho).enumerate() {
            let slack = BOUNDS_SLACK * upper.max(1.0);
            if !(value >= -slack && value <= upper + slack) {
                return Err(Error::StateOutOfBounds { index, value, upper });
            }
        }
        Ok(())
    }

    /// `ε + Σ α v s` for customer cell `c`.
    #[inline]
    pub fn denominator(&self, c: usize, s: &[f64]) -> f64 {
        self.epsilon[c] + self.weight_row(c).iter().zip(s).map(|(w, s)| w * s).sum::<f64>()
    }

    /// Mean-field multinomial-logit choice probabilities of customer cell `c`.
    pub fn choice_probabilities(&self, c: usize, s: &[f64]) -> Result<ChoiceProbabilities> {
        self.check_state(s)?;
        let denom = self.denominator(c, s);
        let listing = self
            .weight_row(c)
            .iter()
            .zip(s)
            .map(|(w, s)| w * s / denom)
            .collect();
        Ok(ChoiceProbabilities {
            listing,
            outside: self.epsilon[c] / denom,
        })
    }

    /// The global-control market on the same layout: all customer mass on
    /// `i = 0`, all listing mass on `j = 0`, control parameters everywhere.
    pub fn global_control_view(&self) -> ExpandedMarket {
        self.global_view(0)
    }

    /// The global-treatment market: all mass on the treated cells, which
    /// carry the treated parameters.
    pub fn global_treatment_view(&self) -> ExpandedMarket {
        self.global_view(1)
    }

    fn global_view(&self, cond: usize) -> ExpandedMarket {
        let mut out = self.clone();
        let nlc = self.n_listing_cells();
        for g in 0..self.n_customer_types {
            let total = self.phi[2 * g] + self.phi[2 * g + 1];
            out.phi[2 * g] = 0.0;
            out.phi[2 * g + 1] = 0.0;
            out.phi[2 * g + cond] = total;
        }
        for t in 0..self.n_listing_types {
            let total = self.rho[2 * t] + self.rho[2 * t + 1];
            out.rho[2 * t] = 0.0;
            out.rho[2 * t + 1] = 0.0;
            out.rho[2 * t + cond] = total;
        }
        for c in 0..self.n_customer_cells() {
            for l in 0..nlc {
                let src = (c - c % 2 + cond) * nlc + (l - l % 2 + cond);
                out.alpha[c * nlc + l] = self.alpha[src];
                out.v[c * nlc + l] = self.v[src];
                out.weight[c * nlc + l] = self.weight[src];
            }
        }
        out.design = if cond == 0 { DesignSpec::GlobalControl } else { DesignSpec::GlobalTreatment };
        out.a_c = cond as f64;
        out.a_l = cond as f64;
        out
    }

    /// Booking rate per listing cell, `λ Σ_c φ_c p_c(l | s)`, without bounds checks.
    pub(crate) fn demand_rates(&self, s: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for c in 0..self.n_customer_cells() {
            if self.phi[c] == 0.0 {
                continue;
            }
            let scale = self.lambda * self.phi[c] / self.denominator(c, s);
            for ((o, w), s) in out.iter_mut().zip(self.weight_row(c)).zip(s) {
                *o += scale * w * s;
            }
        }
    }

    /// Booking rates split by customer and listing condition: `[i][j]`.
    pub(crate) fn booking_matrix(&self, s: &[f64]) -> [[f64; 2]; 2] {
        let mut q = [[0.0; 2]; 2];
        for c in 0..self.n_customer_cells() {
            if self.phi[c] == 0.0 {
                continue;
            }
            let i = Self::condition(c);
            let scale = self.lambda * self.phi[c] / self.denominator(c, s);
            for (l, (w, s)) in self.weight_row(c).iter().zip(s).enumerate() {
                q[i][Self::condition(l)] += scale * w * s;
            }
        }
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calibration() -> (MarketConfig, Intervention) {
        let cfg = MarketConfig::homogeneous(0.315, 1.0, 1.0, 1.0);
        let itv = Intervention::with_utilities(&cfg, vec![vec![0.3937]]);
        (cfg, itv)
    }

    fn two_by_two() -> MarketConfig {
        MarketConfig {
            customers: vec![
                CustomerType { id: "a".into(), phi: 0.4, epsilon: 1.0, alpha: vec![1.0, 0.5], v: vec![0.3, 0.7] },
                CustomerType { id: "b".into(), phi: 0.6, epsilon: 2.0, alpha: vec![0.8, 1.0], v: vec![0.2, 0.1] },
            ],
            listings: vec![
                ListingType { id: "x".into(), rho: 0.5, nu: 1.0 },
                ListingType { id: "y".into(), rho: 0.5, nu: 2.0 },
            ],
            lambda: 1.0,
            tau: 1.0,
        }
    }

    #[test]
    fn identity_market_accepted() {
        let (cfg, _) = calibration();
        assert_eq!(validate_market(&cfg).unwrap(), cfg);
    }

    #[test]
    fn near_unit_shares_renormalized() {
        let mut cfg = two_by_two();
        cfg.listings[1].rho = 0.5000000002;
        let out = validate_market(&cfg).unwrap();
        let sum: f64 = out.listings.iter().map(|l| l.rho).sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn share_mismatch_rejected() {
        let mut cfg = two_by_two();
        cfg.customers[0].phi = 0.5;
        assert!(matches!(validate_market(&cfg), Err(Error::ShareSumMismatch { which: "customer", .. })));
    }

    #[test]
    fn zero_consideration_rejected() {
        let mut cfg = two_by_two();
        cfg.customers[1].alpha[0] = 0.0;
        assert!(matches!(validate_market(&cfg), Err(Error::NonPositiveParameter(_))));
        let mut cfg = two_by_two();
        cfg.tau = 0.0;
        assert!(matches!(validate_market(&cfg), Err(Error::NonPositiveParameter(_))));
    }

    #[test]
    fn global_control_keeps_masses() {
        let (cfg, itv) = calibration();
        let m = expand_for_design(&cfg, &itv, &DesignSpec::GlobalControl).unwrap();
        assert_eq!(m.rho, vec![1.0, 0.0]);
        assert_eq!(m.phi, vec![1.0, 0.0]);
        assert_eq!(m.weight(0, 0), 0.315);
    }

    #[test]
    fn tsr_half_half_expansion() {
        let (cfg, itv) = calibration();
        let m = expand_for_design(&cfg, &itv, &DesignSpec::Tsr { a_c: 0.5, a_l: 0.5 }).unwrap();
        assert_eq!(m.rho, vec![0.5, 0.5]);
        assert_eq!(m.phi, vec![0.5, 0.5]);
        assert_eq!(m.v, vec![0.315, 0.315, 0.315, 0.3937]);
    }

    #[test]
    fn cluster_mass_concentrated() {
        let mut cfg = two_by_two();
        cfg.customers[0].alpha = vec![1.0, 1.0];
        let itv = Intervention::utility_lift(&cfg, 1.3);
        let m = expand_for_design(&cfg, &itv, &DesignSpec::Cluster { assignment: vec![true, false] }).unwrap();
        assert_eq!(m.rho, vec![0.0, 0.5, 0.5, 0.0]);
        assert_eq!(m.a_l, 0.5);
        assert_eq!(m.a_c, 1.0);
    }

    #[test]
    fn invalid_design_fractions() {
        let (cfg, itv) = calibration();
        for d in [DesignSpec::Cr { a_c: 1.0 }, DesignSpec::Lr { a_l: 0.0 }, DesignSpec::Tsr { a_c: 0.0, a_l: 0.5 }] {
            assert!(matches!(expand_for_design(&cfg, &itv, &d), Err(Error::InvalidDesign(_))));
        }
    }

    #[test]
    fn choice_at_zero_state_is_outside() {
        let (cfg, itv) = calibration();
        let m = expand_for_design(&cfg, &itv, &DesignSpec::GlobalControl).unwrap();
        let p = m.choice_probabilities(0, &[0.0, 0.0]).unwrap();
        assert_eq!(p.listing, vec![0.0, 0.0]);
        assert_eq!(p.outside, 1.0);
    }

    #[test]
    fn homogeneous_choice_values() {
        let (cfg, itv) = calibration();
        let gc = expand_for_design(&cfg, &itv, &DesignSpec::GlobalControl).unwrap();
        let p = gc.choice_probabilities(0, &[1.0, 0.0]).unwrap();
        assert!((p.listing[0] - 0.239544).abs() < 1e-6);
        let gt = expand_for_design(&cfg, &itv, &DesignSpec::GlobalTreatment).unwrap();
        let p = gt.choice_probabilities(1, &[0.0, 1.0]).unwrap();
        assert!((p.listing[1] - 0.282485).abs() < 1e-6);
    }

    #[test]
    fn state_bounds_enforced() {
        let (cfg, itv) = calibration();
        let m = expand_for_design(&cfg, &itv, &DesignSpec::Tsr { a_c: 0.5, a_l: 0.5 }).unwrap();
        assert!(matches!(m.choice_probabilities(0, &[0.6, 0.1]), Err(Error::StateOutOfBounds { index: 0, .. })));
    }

    #[test]
    fn classification() {
        let (cfg, _) = calibration();
        assert_eq!(classify_intervention(&cfg, &Intervention::utility_lift(&cfg, 1.25)), InterventionSign::Positive);
        assert_eq!(classify_intervention(&cfg, &Intervention::null(&cfg)), InterventionSign::Indeterminate);
        assert_eq!(classify_intervention(&cfg, &Intervention::utility_lift(&cfg, 0.8)), InterventionSign::Negative);
        let cfg = two_by_two();
        let itv = Intervention::with_utilities(&cfg, vec![vec![0.4, 0.7], vec![0.1, 0.2]]);
        assert_eq!(classify_intervention(&cfg, &itv), InterventionSign::Indeterminate);
    }
}
