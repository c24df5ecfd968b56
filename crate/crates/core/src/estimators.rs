//! GTE estimators over booking ledgers and the mean-field ground truth.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ledger::BookingLedger;
use crate::market::{expand_for_design, DesignSpec, Intervention, MarketConfig};
use crate::mean_field::{booking_rates_mf, RateWindow};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorId {
    NaiveCr,
    NaiveLr,
    Tsrn,
    /// Improved TSR estimator with correction weight `k`.
    Tsri { k: f64 },
    ClusterLr,
}

impl EstimatorId {
    /// The five estimators compared on standard markets.
    pub fn standard() -> Vec<EstimatorId> {
        vec![
            EstimatorId::NaiveCr,
            EstimatorId::NaiveLr,
            EstimatorId::Tsrn,
            EstimatorId::Tsri { k: 1.0 },
            EstimatorId::Tsri { k: 2.0 },
        ]
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorId::NaiveCr => write!(f, "CR"),
            EstimatorId::NaiveLr => write!(f, "LR"),
            EstimatorId::Tsrn => write!(f, "TSRN"),
            EstimatorId::Tsri { k } => write!(f, "TSRI-{k}"),
            EstimatorId::ClusterLr => write!(f, "Cluster"),
        }
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "cr" | "naive_cr" => Ok(EstimatorId::NaiveCr),
            "lr" | "naive_lr" => Ok(EstimatorId::NaiveLr),
            "tsrn" => Ok(EstimatorId::Tsrn),
            "cluster" | "cluster_lr" => Ok(EstimatorId::ClusterLr),
            other => {
                let k = other
                    .strip_prefix("tsri-")
                    .or_else(|| other.strip_prefix("tsri"))
                    .and_then(|k| k.parse::<f64>().ok())
                    .filter(|k| *k > 0.0)
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown estimator {s:?}")))?;
                Ok(EstimatorId::Tsri { k })
            }
        }
    }
}

impl Serialize for EstimatorId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EstimatorId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn interior(name: &str, a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::DegenerateArm(format!("{name} = {a} must lie in (0, 1)")))
    }
}

/// Naive customer-side estimator `Q11/a_C − Q01/(1 − a_C)`.
pub fn est_cr(l: &BookingLedger, a_c: f64) -> Result<f64> {
    interior("a_C", a_c)?;
    Ok(l.q(1, 1) / a_c - l.q(0, 1) / (1.0 - a_c))
}

/// Naive listing-side estimator `Q11/a_L − Q10/(1 − a_L)`.
pub fn est_lr(l: &BookingLedger, a_l: f64) -> Result<f64> {
    interior("a_L", a_l)?;
    Ok(l.q(1, 1) / a_l - l.q(1, 0) / (1.0 - a_l))
}

/// Naive two-sided estimator: treated-treated cell against all control bookings.
pub fn est_tsrn(l: &BookingLedger, a_c: f64, a_l: f64) -> Result<f64> {
    let a = a_c * a_l;
    if !(a_c > 0.0 && a_l > 0.0 && a < 1.0) {
        return Err(Error::DegenerateArm(format!("a_C a_L = {a} must lie in (0, 1)")));
    }
    Ok(l.q(1, 1) / a - (l.q(0, 1) + l.q(1, 0) + l.q(0, 0)) / (1.0 - a))
}

/// `β · CR-form + (1 − β) · LR-form` on a two-sided ledger.
pub fn interpolating_tsr(l: &BookingLedger, a_c: f64, a_l: f64, beta: f64) -> Result<f64> {
    est_tsri(l, a_c, a_l, beta, 0.0)
}

/// Improved two-sided estimator with cannibalization corrections weighted by `k`.
///
/// Written as `Σ c_ij Q_ij / (mass_i mass_j)`; a cell may be empty (as at
/// the ends of the balance schedule) only if its coefficient vanishes.
pub fn est_tsri(l: &BookingLedger, a_c: f64, a_l: f64, beta: f64, k: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) || !(k >= 0.0) {
        return Err(Error::InvalidDesign(format!("need beta in [0, 1] and k >= 0, got {beta}, {k}")));
    }
    if !(a_c > 0.0 && a_c <= 1.0 && a_l > 0.0 && a_l <= 1.0) {
        return Err(Error::DegenerateArm(format!("a_C = {a_c}, a_L = {a_l} must lie in (0, 1]")));
    }
    let mc = [1.0 - a_c, a_c];
    let ml = [1.0 - a_l, a_l];
    // customer side: β [Q̂11 − Q̂01 − k(1−β)(Q̂00 − Q̂01)]
    // listing side: (1−β) [Q̂11 − Q̂10 − kβ(Q̂00 − Q̂10)]
    let terms = [
        (0, 0, -2.0 * k * beta * (1.0 - beta)),
        (0, 1, beta * (k * (1.0 - beta) - 1.0)),
        (1, 0, (1.0 - beta) * (k * beta - 1.0)),
        (1, 1, 1.0),
    ];
    let mut est = 0.0;
    for (i, j, c) in terms {
        if c == 0.0 {
            continue;
        }
        let mass = mc[i] * ml[j];
        if mass <= 0.0 {
            return Err(Error::DegenerateArm(format!("cell ({i}, {j}) is empty under a_C = {a_c}, a_L = {a_l}")));
        }
        est += c * l.q(i, j) / mass;
    }
    Ok(est)
}

/// Cluster-randomized estimator with treated listing mass `z`.
pub fn est_cluster(l: &BookingLedger, z: f64) -> Result<f64> {
    interior("Z", z)?;
    Ok(l.q(1, 1) / z - l.q(1, 0) / (1.0 - z))
}

/// Design parameters an estimator reads from its ledger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignContext {
    pub a_c: f64,
    /// `a_L`, or the treated listing mass `Z` for cluster designs.
    pub a_l: f64,
    pub beta: f64,
}

impl EstimatorId {
    pub fn evaluate(&self, l: &BookingLedger, ctx: &DesignContext) -> Result<f64> {
        match *self {
            EstimatorId::NaiveCr => est_cr(l, ctx.a_c),
            EstimatorId::NaiveLr => est_lr(l, ctx.a_l),
            EstimatorId::Tsrn => est_tsrn(l, ctx.a_c, ctx.a_l),
            EstimatorId::Tsri { k } => est_tsri(l, ctx.a_c, ctx.a_l, ctx.beta, k),
            EstimatorId::ClusterLr => est_cluster(l, ctx.a_l),
        }
    }
}

/// Steady-state booking rates `(Q^GC, Q^GT)`.
pub fn global_rates(cfg: &MarketConfig, itv: &Intervention) -> Result<(f64, f64)> {
    let gc = expand_for_design(cfg, itv, &DesignSpec::GlobalControl)?;
    let gt = expand_for_design(cfg, itv, &DesignSpec::GlobalTreatment)?;
    let q_gc = booking_rates_mf(&gc, &RateWindow::steady())?.q(0, 0);
    let q_gt = booking_rates_mf(&gt, &RateWindow::steady())?.q(1, 1);
    Ok((q_gc, q_gt))
}

/// Mean-field global treatment effect `Q^GT − Q^GC`.
pub fn gte_true(cfg: &MarketConfig, itv: &Intervention) -> Result<f64> {
    let (gc, gt) = global_rates(cfg, itv)?;
    Ok(gt - gc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GteReport {
    pub gte_true: f64,
    pub estimates: Vec<(EstimatorId, f64)>,
    pub bias: Vec<(EstimatorId, f64)>,
}

impl GteReport {
    pub fn new(gte_true: f64, estimates: Vec<(EstimatorId, f64)>) -> Self {
        let bias = estimates.iter().map(|&(id, e)| (id, e - gte_true)).collect();
        GteReport { gte_true, estimates, bias }
    }

    pub fn bias_of(&self, id: EstimatorId) -> Option<f64> {
        self.bias.iter().find(|(e, _)| *e == id).map(|(_, b)| *b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ledger(q: [[f64; 2]; 2]) -> BookingLedger {
        BookingLedger::from_rates(q)
    }

    #[test]
    fn parse_and_display_round_trip() {
        for id in EstimatorId::standard().into_iter().chain([EstimatorId::ClusterLr]) {
            assert_eq!(id.to_string().parse::<EstimatorId>().unwrap(), id);
        }
        assert_eq!("tsri2".parse::<EstimatorId>().unwrap(), EstimatorId::Tsri { k: 2.0 });
        assert!("tsri-0".parse::<EstimatorId>().is_err());
        assert!("bogus".parse::<EstimatorId>().is_err());
    }

    #[test]
    fn degenerate_arms_rejected() {
        let l = ledger([[0.1, 0.1], [0.1, 0.1]]);
        assert!(matches!(est_cr(&l, 1.0), Err(Error::DegenerateArm(_))));
        assert!(matches!(est_lr(&l, 0.0), Err(Error::DegenerateArm(_))));
        assert!(matches!(est_tsrn(&l, 1.0, 1.0), Err(Error::DegenerateArm(_))));
        assert!(matches!(est_tsri(&l, 0.5, 1.0, 0.5, 1.0), Err(Error::DegenerateArm(_))));
        assert!(matches!(est_cluster(&l, 0.0), Err(Error::DegenerateArm(_))));
    }

    #[test]
    fn tsrn_reduces_to_one_sided_forms() {
        let cr_ledger = ledger([[0.0, 0.07], [0.0, 0.11]]);
        assert_eq!(est_tsrn(&cr_ledger, 0.4, 1.0).unwrap(), est_cr(&cr_ledger, 0.4).unwrap());
        let lr_ledger = ledger([[0.0, 0.0], [0.13, 0.09]]);
        assert_eq!(est_tsrn(&lr_ledger, 1.0, 0.3).unwrap(), est_lr(&lr_ledger, 0.3).unwrap());
    }

    #[test]
    fn tsri_weight_collapse() {
        let l = ledger([[0.05, 0.06], [0.07, 0.09]]);
        let (a_c, a_l) = (0.6, 0.4);
        let cr_form = 0.09 / (a_c * a_l) - 0.06 / ((1.0 - a_c) * a_l);
        let lr_form = 0.09 / (a_c * a_l) - 0.07 / (a_c * (1.0 - a_l));
        for k in [0.5, 1.0, 2.0] {
            assert!((est_tsri(&l, a_c, a_l, 1.0, k).unwrap() - cr_form).abs() < 1e-12);
            assert!((est_tsri(&l, a_c, a_l, 0.0, k).unwrap() - lr_form).abs() < 1e-12);
        }
    }

    #[test]
    fn null_ledgers_give_zero() {
        let (a_c, a_l) = (0.3, 0.7);
        let rate = 0.2;
        let l = ledger([
            [rate * (1.0 - a_c) * (1.0 - a_l), rate * (1.0 - a_c) * a_l],
            [rate * a_c * (1.0 - a_l), rate * a_c * a_l],
        ]);
        assert!(est_tsrn(&l, a_c, a_l).unwrap().abs() < 1e-12);
        for (beta, k) in [(0.2, 1.0), (0.9, 2.0)] {
            assert!(est_tsri(&l, a_c, a_l, beta, k).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn null_intervention_gte_is_zero() {
        let cfg = MarketConfig::homogeneous(0.315, 1.0, 1.0, 1.0);
        assert!(gte_true(&cfg, &Intervention::null(&cfg)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn calibration_gte() {
        let cfg = MarketConfig::homogeneous(0.315, 1.0, 1.0, 1.0);
        let itv = Intervention::with_utilities(&cfg, vec![vec![0.3937]]);
        assert!((gte_true(&cfg, &itv).unwrap() - 0.031070).abs() < 1e-5);
    }
}
