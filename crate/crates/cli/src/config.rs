//! The JSON run configuration.
//!
//! Markets are keyed by type id: each customer type lists its `v` (and
//! optionally `alpha`) as a map from listing id to value. A run names
//! either an explicit `market` + `intervention` or a built-in `preset`.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Result};
use marketlab::designs::TsrSchedule;
use marketlab::estimators::EstimatorId;
use marketlab::finite_sim::SimConfig;
use marketlab::harness::{BootstrapSpec, DesignOptions, ScenarioSet};
use marketlab::market::{CustomerType, DesignSpec, Intervention, ListingType, MarketConfig};
use marketlab::presets;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub market: Option<MarketSection>,
    #[serde(default)]
    pub intervention: Option<InterventionSection>,
    #[serde(default)]
    pub design: DesignSection,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomerSection {
    pub id: String,
    pub phi: f64,
    #[serde(default = "one")]
    pub epsilon: f64,
    /// Missing entries default to 1.
    #[serde(default)]
    pub alpha: BTreeMap<String, f64>,
    pub v: BTreeMap<String, f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListingSection {
    pub id: String,
    pub rho: f64,
    #[serde(default = "one")]
    pub nu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub customers: Vec<CustomerSection>,
    pub listings: Vec<ListingSection>,
    pub lambda: f64,
    #[serde(default = "one")]
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterventionSection {
    /// `ṽ = factor · v` everywhere.
    Lift { factor: f64 },
    /// Treated utilities (and optionally consideration probabilities) keyed
    /// by customer id, then listing id. Missing `alpha_treated` entries
    /// inherit the control value.
    Utilities {
        v_treated: BTreeMap<String, BTreeMap<String, f64>>,
        #[serde(default)]
        alpha_treated: BTreeMap<String, BTreeMap<String, f64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSection {
    pub cr_a_c: f64,
    pub lr_a_l: f64,
    pub schedule: TsrSchedule,
    /// Extra design reported by `steady`.
    pub experiment: Option<DesignSpec>,
}

impl Default for DesignSection {
    fn default() -> Self {
        let d = DesignOptions::default();
        DesignSection {
            cr_a_c: d.cr_a_c,
            lr_a_l: d.lr_a_l,
            schedule: d.schedule,
            experiment: None,
        }
    }
}

impl DesignSection {
    pub fn options(&self) -> DesignOptions {
        DesignOptions {
            cr_a_c: self.cr_a_c,
            lr_a_l: self.lr_a_l,
            schedule: self.schedule,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub scenario: ScenarioSet,
    #[serde(default = "yes")]
    pub simulate: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub estimators: Vec<EstimatorId>,
    pub reps: usize,
    pub bootstrap: BootstrapSpec,
    /// Read `sim.t0`, `sim.t1` in units of `1 / min(λ, τ)`.
    pub rescale_time: bool,
    /// Cross/own utility ratios for `cluster-compare`.
    pub cluster_ratios: Vec<f64>,
    pub steady_tol: f64,
    /// Balances for the demand- and supply-limit tables.
    pub demand_limit_balance: f64,
    pub supply_limit_balance: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            estimators: EstimatorId::standard(),
            reps: 500,
            bootstrap: BootstrapSpec::default(),
            rescale_time: true,
            cluster_ratios: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            steady_tol: 1e-10,
            demand_limit_balance: 1e-4,
            supply_limit_balance: 1e4,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        if cfg.schema_version != SCHEMA_VERSION {
            bail!("unsupported schema_version {}, expected {SCHEMA_VERSION}", cfg.schema_version);
        }
        Ok(cfg)
    }

    /// The market and intervention this run refers to.
    pub fn scenario(&self) -> Result<(MarketConfig, Intervention)> {
        match (&self.preset, &self.market) {
            (Some(_), Some(_)) => bail!("give either a preset or a market, not both"),
            (Some(name), None) => {
                if self.intervention.is_some() {
                    bail!("presets carry their own intervention");
                }
                let s = presets::by_name(name, self.sim.n_listings)?;
                Ok((s.market, s.intervention))
            }
            (None, Some(m)) => {
                let cfg = m.resolve()?;
                let itv = match &self.intervention {
                    None => Intervention::null(&cfg),
                    Some(i) => i.resolve(&cfg)?,
                };
                Ok((cfg, itv))
            }
            (None, None) => bail!("config names neither a preset nor a market"),
        }
    }
}

fn lookup(map: &BTreeMap<String, f64>, listings: &[ListingType], what: &str, default: Option<f64>) -> Result<Vec<f64>> {
    for key in map.keys() {
        if !listings.iter().any(|l| &l.id == key) {
            bail!("{what}: unknown listing id {key:?}");
        }
    }
    listings
        .iter()
        .map(|l| {
            map.get(&l.id)
                .copied()
                .or(default)
                .ok_or_else(|| anyhow!("{what}: missing entry for listing {:?}", l.id))
        })
        .collect()
}

impl MarketSection {
    pub fn resolve(&self) -> Result<MarketConfig> {
        let listings: Vec<ListingType> = self
            .listings
            .iter()
            .map(|l| ListingType {
                id: l.id.clone(),
                rho: l.rho,
                nu: l.nu,
            })
            .collect();
        let customers = self
            .customers
            .iter()
            .map(|c| {
                Ok(CustomerType {
                    id: c.id.clone(),
                    phi: c.phi,
                    epsilon: c.epsilon,
                    alpha: lookup(&c.alpha, &listings, &format!("customer {:?} alpha", c.id), Some(1.0))?,
                    v: lookup(&c.v, &listings, &format!("customer {:?} v", c.id), None)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MarketConfig {
            customers,
            listings,
            lambda: self.lambda,
            tau: self.tau,
        })
    }
}

impl InterventionSection {
    pub fn resolve(&self, cfg: &MarketConfig) -> Result<Intervention> {
        match self {
            InterventionSection::Lift { factor } => Ok(Intervention::utility_lift(cfg, *factor)),
            InterventionSection::Utilities { v_treated, alpha_treated } => {
                for key in v_treated.keys().chain(alpha_treated.keys()) {
                    if !cfg.customers.iter().any(|c| &c.id == key) {
                        bail!("intervention: unknown customer id {key:?}");
                    }
                }
                let mut v = Vec::new();
                let mut a = Vec::new();
                for c in &cfg.customers {
                    let what = format!("intervention for customer {:?}", c.id);
                    let row = v_treated.get(&c.id).ok_or_else(|| anyhow!("{what}: missing v_treated"))?;
                    v.push(lookup(row, &cfg.listings, &what, None)?);
                    let empty = BTreeMap::new();
                    let arow = alpha_treated.get(&c.id).unwrap_or(&empty);
                    let inherited = lookup(arow, &cfg.listings, &what, Some(f64::NAN))?;
                    a.push(inherited.iter().zip(&c.alpha).map(|(x, base)| if x.is_nan() { *base } else { *x }).collect());
                }
                Ok(Intervention {
                    v_treated: v,
                    alpha_treated: a,
                })
            }
        }
    }
}
