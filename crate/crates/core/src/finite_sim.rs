//! Discrete-event simulation of the finite-N booking chain.
//!
//! Listings of each expanded cell are exchangeable, so the state is the
//! vector of available counts per cell. Events are drawn by competing
//! exponentials: customer arrivals at rate `λN` and replenishments at rate
//! `Σ (m − available) τ ν`.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp1, Hypergeometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::BookingLedger;
use crate::market::{ExpandedMarket, StateVector};
use crate::mean_field::{steady_state, DEFAULT_STEADY_TOL};
use crate::rng::{stream, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Consideration {
    /// Each available listing is considered independently with probability α.
    PerListingBernoulli,
    /// A uniform sample of `k` available listings (all of them if fewer).
    FixedK { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    AllAvailable,
    /// Each cell starts at the global-control steady-state availability fraction.
    MeanFieldGc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_listings: usize,
    /// Bookings are counted in `[t0, t1]`; the run stops at `t1`.
    pub t0: f64,
    pub t1: f64,
    pub seed: u64,
    pub consideration: Consideration,
    pub initial_state: InitialState,
    /// Spacing of the availability trace.
    pub trace_interval: f64,
    /// Keep one record per booking.
    pub record_events: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_listings: 5000,
            t0: 5.0,
            t1: 25.0,
            seed: 0,
            consideration: Consideration::PerListingBernoulli,
            initial_state: InitialState::AllAvailable,
            trace_interval: 0.05,
            record_events: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_listings == 0 {
            return Err(Error::InvalidConfig("n_listings must be positive".into()));
        }
        if !(self.t0 >= 0.0 && self.t1 > self.t0 && self.t1.is_finite()) {
            return Err(Error::InvalidConfig(format!("need 0 <= t0 < t1, got [{}, {}]", self.t0, self.t1)));
        }
        if let Consideration::FixedK { k: 0 } = self.consideration {
            return Err(Error::InvalidConfig("fixed consideration set size must be >= 1".into()));
        }
        if !(self.trace_interval > 0.0) {
            return Err(Error::InvalidConfig("trace_interval must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteState {
    pub available: Vec<u64>,
    pub totals: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityTrace {
    pub times: Vec<f64>,
    /// `available / N` per listing cell at each sampled time.
    pub y: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BookingEvent {
    pub time: f64,
    pub customer_condition: usize,
    pub listing_condition: usize,
    pub listing_type: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub ledger: BookingLedger,
    pub trace: AvailabilityTrace,
    pub events: Vec<BookingEvent>,
    pub final_state: FiniteState,
}

/// Listing counts per cell: floors of `ρ N` plus largest-remainder top-up,
/// ties broken by declaration order.
pub fn apportion_listings(m: &ExpandedMarket, n: usize) -> Result<Vec<u64>> {
    let cells = m.rho.iter().filter(|&&r| r > 0.0).count();
    if n < cells {
        return Err(Error::NTooSmall { n, cells });
    }
    let quotas: Vec<f64> = m.rho.iter().map(|r| r * n as f64).collect();
    let mut totals: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let assigned: u64 = totals.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).filter(|&l| m.rho[l] > 0.0).collect();
    // stable sort keeps declaration order among equal remainders
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
    });
    let missing = (n as u64).saturating_sub(assigned) as usize;
    for &l in order.iter().cycle().take(missing) {
        totals[l] += 1;
    }
    Ok(totals)
}

/// Fraction of each cell available in the global-control steady state.
pub fn gc_availability_fraction(m: &ExpandedMarket) -> Result<Vec<f64>> {
    let gc = m.global_control_view();
    let ss = steady_state(&gc, DEFAULT_STEADY_TOL)?;
    Ok((0..m.n_listing_cells())
        .map(|l| {
            let base = l - l % 2;
            ss.s_star[base] / gc.rho[base]
        })
        .collect())
}

/// Mean-field initial availability corresponding to an [`InitialState`].
pub fn initial_mass(m: &ExpandedMarket, init: InitialState) -> Result<StateVector> {
    match init {
        InitialState::AllAvailable => Ok(m.full_availability()),
        InitialState::MeanFieldGc => {
            let frac = gc_availability_fraction(m)?;
            Ok(StateVector(m.rho.iter().zip(&frac).map(|(r, f)| r * f).collect()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    Listing(usize),
    Outside,
}

/// Multinomial-logit draw over considered counts: cell `l` is chosen with
/// weight `considered[l] · v[l]`, the outside option with `epsilon_n`.
pub fn mnl_draw<R: Rng + ?Sized>(considered: &[u64], v: &[f64], epsilon_n: f64, rng: &mut R) -> Choice {
    let inside: f64 = considered.iter().zip(v).map(|(&d, v)| d as f64 * v).sum();
    if inside <= 0.0 {
        return Choice::Outside;
    }
    let mut u = rng.random::<f64>() * (epsilon_n + inside);
    if u >= inside {
        return Choice::Outside;
    }
    let mut last = None;
    for (l, (&d, v)) in considered.iter().zip(v).enumerate() {
        let w = d as f64 * v;
        if w <= 0.0 {
            continue;
        }
        if u < w {
            return Choice::Listing(l);
        }
        u -= w;
        last = Some(l);
    }
    // rounding left u marginally above the inside mass
    last.map_or(Choice::Outside, Choice::Listing)
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p).expect("p validated in (0, 1]").sample(rng)
    }
}

/// Uniform sample of `k` listings out of the available ones, as counts per cell.
fn fixed_k_sample<R: Rng + ?Sized>(available: &[u64], k: usize, out: &mut [u64], rng: &mut R) {
    let total: u64 = available.iter().sum();
    if total <= k as u64 {
        out.copy_from_slice(available);
        return;
    }
    let mut remaining_pop = total;
    let mut remaining_draws = k as u64;
    for (o, &a) in out.iter_mut().zip(available) {
        if remaining_draws == 0 || a == 0 {
            *o = 0;
        } else if a == remaining_pop {
            *o = remaining_draws;
        } else {
            *o = Hypergeometric::new(remaining_pop, a, remaining_draws)
                .expect("valid hypergeometric parameters")
                .sample(rng);
        }
        remaining_pop -= a;
        remaining_draws -= *o;
    }
}

/// Runs one replication with the generator derived from `sc.seed`.
pub fn simulate(m: &ExpandedMarket, sc: &SimConfig) -> Result<SimOutput> {
    let mut rng = stream(sc.seed, &[]);
    simulate_with_rng(m, sc, &mut rng)
}

pub fn simulate_with_rng(m: &ExpandedMarket, sc: &SimConfig, rng: &mut SimRng) -> Result<SimOutput> {
    sc.validate()?;
    let n = sc.n_listings;
    let nf = n as f64;
    let nlc = m.n_listing_cells();
    let ncc = m.n_customer_cells();
    let totals = apportion_listings(m, n)?;
    let mut available: Vec<u64> = match sc.initial_state {
        InitialState::AllAvailable => totals.clone(),
        InitialState::MeanFieldGc => {
            let frac = gc_availability_fraction(m)?;
            totals
                .iter()
                .zip(&frac)
                .map(|(&t, f)| ((t as f64 * f).round() as u64).min(t))
                .collect()
        }
    };

    let arrival_rate = m.lambda * nf;
    let epsilon_n: Vec<f64> = m.epsilon.iter().map(|e| e * nf).collect();
    let v_rows: Vec<&[f64]> = (0..ncc).map(|c| &m.v[c * nlc..(c + 1) * nlc]).collect();
    let alpha_rows: Vec<&[f64]> = (0..ncc).map(|c| &m.alpha[c * nlc..(c + 1) * nlc]).collect();
    let replenish: Vec<f64> = (0..nlc).map(|l| m.replenish_rate(l)).collect();
    let phi_cum: Vec<f64> = m
        .phi
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();

    let mut counts = [[0u64; 2]; 2];
    let mut events = Vec::new();
    let mut considered = vec![0u64; nlc];
    let mut trace = AvailabilityTrace {
        times: Vec::new(),
        y: Vec::new(),
    };
    let n_samples = (sc.t1 / sc.trace_interval + 1e-9).floor() as usize + 1;
    let mut next_sample = 0usize;

    let mut t = 0.0;
    loop {
        let occupied_rate: f64 = (0..nlc)
            .map(|l| (totals[l] - available[l]) as f64 * replenish[l])
            .sum();
        let total_rate = arrival_rate + occupied_rate;
        let t_next = if total_rate > 0.0 {
            t + { let e: f64 = Exp1.sample(rng); e } / total_rate
        } else {
            f64::INFINITY
        };
        while next_sample < n_samples {
            let ts = next_sample as f64 * sc.trace_interval;
            if ts >= t_next {
                break;
            }
            trace.times.push(ts);
            trace.y.push(available.iter().map(|&a| a as f64 / nf).collect());
            next_sample += 1;
        }
        if t_next > sc.t1 {
            break;
        }
        t = t_next;

        let u = rng.random::<f64>() * total_rate;
        if u < arrival_rate {
            let r = rng.random::<f64>() * phi_cum[ncc - 1];
            let c = phi_cum.partition_point(|&p| p <= r).min(ncc - 1);
            match sc.consideration {
                Consideration::PerListingBernoulli => {
                    for l in 0..nlc {
                        considered[l] = binomial(available[l], alpha_rows[c][l], rng);
                    }
                }
                Consideration::FixedK { k } => fixed_k_sample(&available, k, &mut considered, rng),
            }
            if let Choice::Listing(l) = mnl_draw(&considered, v_rows[c], epsilon_n[c], rng) {
                available[l] -= 1;
                if t >= sc.t0 {
                    let (i, j) = (ExpandedMarket::condition(c), ExpandedMarket::condition(l));
                    counts[i][j] += 1;
                    if sc.record_events {
                        events.push(BookingEvent {
                            time: t,
                            customer_condition: i,
                            listing_condition: j,
                            listing_type: l / 2,
                        });
                    }
                }
            }
        } else {
            let mut r = u - arrival_rate;
            let mut chosen = None;
            for l in 0..nlc {
                let w = (totals[l] - available[l]) as f64 * replenish[l];
                if w <= 0.0 {
                    continue;
                }
                chosen = Some(l);
                if r < w {
                    break;
                }
                r -= w;
            }
            if let Some(l) = chosen {
                available[l] += 1;
            }
        }
        debug_assert!(available.iter().zip(&totals).all(|(a, t)| a <= t));
    }

    Ok(SimOutput {
        ledger: BookingLedger::from_counts(counts, (sc.t0, sc.t1), n),
        trace,
        events,
        final_state: FiniteState { available, totals },
    })
}
