//! Mean-field engine: the availability ODE, its RK4 integration, the steady
//! state obtained by minimizing the Lyapunov function in log coordinates,
//! and mean-field booking rates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::BookingLedger;
use crate::market::{ExpandedMarket, StateVector};

/// Largest bound violation the integrator silently clamps.
pub const CLAMP_TOLERANCE: f64 = 1e-9;
/// Default max-norm tolerance on the steady-state flow residual.
pub const DEFAULT_STEADY_TOL: f64 = 1e-10;
/// Recorded trajectories are thinned to at most this many segments by default.
const MAX_DEFAULT_RECORDS: f64 = 20_000.0;

const NEWTON_MAX_ITER: usize = 200;
const FIXED_POINT_SWEEPS: usize = 10_000;
const FIXED_POINT_DAMPING: f64 = 0.5;
const POLISH_STEPS: usize = 3;

/// Right-hand side of the availability ODE: replenishment minus bookings.
pub fn ode_rhs(s: &[f64], m: &ExpandedMarket) -> Result<Vec<f64>> {
    m.check_state(s)?;
    let mut out = vec![0.0; s.len()];
    rhs_into(m, s, &mut out);
    Ok(out)
}

/// Flow-balance residual `(ρ − s) τ ν − λ Σ φ p`; identical to [`ode_rhs`].
pub fn flow_residual(s: &[f64], m: &ExpandedMarket) -> Result<Vec<f64>> {
    ode_rhs(s, m)
}

fn rhs_into(m: &ExpandedMarket, s: &[f64], out: &mut [f64]) {
    m.demand_rates(s, out);
    for (l, o) in out.iter_mut().enumerate() {
        *o = (m.rho[l] - s[l]) * m.replenish_rate(l) - *o;
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Step controls for [`integrate`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    /// Upper bound on the RK4 step; defaults to [`default_step`].
    pub max_step: Option<f64>,
    /// Spacing of recorded states. Steps are aligned to this grid.
    pub record_interval: Option<f64>,
}

/// `min(0.01, 0.1 / (τ max ν), 0.1 / λ)`.
pub fn default_step(m: &ExpandedMarket) -> f64 {
    let max_nu = m.nu.iter().cloned().fold(0.0_f64, f64::max);
    0.01_f64.min(0.1 / (m.tau * max_nu)).min(0.1 / m.lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Largest bound violation that was clamped away.
    pub max_clamp: f64,
}

impl Trajectory {
    pub fn terminal(&self) -> &StateVector {
        self.states.last().expect("trajectory always holds the initial state")
    }
}

struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
    next: Vec<f64>,
    max_clamp: f64,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Rk4 {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
            next: vec![0.0; n],
            max_clamp: 0.0,
        }
    }

    /// One classical RK4 step; returns the proposed state without committing.
    fn propose(&mut self, m: &ExpandedMarket, s: &[f64], h: f64, out: &mut [f64]) {
        let n = s.len();
        rhs_into(m, s, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = s[i] + 0.5 * h * self.k1[i];
        }
        rhs_into(m, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = s[i] + 0.5 * h * self.k2[i];
        }
        rhs_into(m, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = s[i] + h * self.k3[i];
        }
        rhs_into(m, &self.tmp, &mut self.k4);
        for i in 0..n {
            out[i] = s[i] + h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }

    /// Advances `s` by `h`, halving into substeps when a step leaves the box.
    fn step(&mut self, m: &ExpandedMarket, s: &mut [f64], t: f64, h: f64) -> Result<()> {
        let mut next = std::mem::take(&mut self.next);
        self.propose(m, s, h, &mut next);
        let mut worst = 0.0_f64;
        let mut finite = true;
        for (l, x) in next.iter().enumerate() {
            finite &= x.is_finite();
            worst = worst.max(-x).max(x - m.rho[l]);
        }
        if finite && worst <= CLAMP_TOLERANCE {
            for (l, x) in next.iter_mut().enumerate() {
                *x = x.clamp(0.0, m.rho[l]);
            }
            self.max_clamp = self.max_clamp.max(worst.max(0.0));
            s.copy_from_slice(&next);
            self.next = next;
            return Ok(());
        }
        self.next = next;
        let half = 0.5 * h;
        if half < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::StepSizeUnderflow { t, step: half });
        }
        self.step(m, s, t, half)?;
        self.step(m, s, t + half, half)
    }

    /// Integrates from `t0` to `t1` with uniform steps no longer than `hmax`,
    /// calling `visit(t, s_prev, s)` after each step.
    fn advance<F>(&mut self, m: &ExpandedMarket, s: &mut Vec<f64>, t0: f64, t1: f64, hmax: f64, mut visit: F) -> Result<()>
    where
        F: FnMut(f64, f64, &[f64], &[f64]),
    {
        if t1 <= t0 {
            return Ok(());
        }
        let n = ((t1 - t0) / hmax).ceil().max(1.0) as usize;
        let h = (t1 - t0) / n as f64;
        let mut prev = s.clone();
        for k in 0..n {
            let t = t0 + k as f64 * h;
            prev.copy_from_slice(s);
            self.step(m, s, t, h)?;
            let t_next = if k + 1 == n { t1 } else { t0 + (k + 1) as f64 * h };
            visit(t, t_next, &prev, s);
        }
        Ok(())
    }
}

/// Integrates the availability ODE from `s0` over `[0, horizon]`.
pub fn integrate(s0: &[f64], m: &ExpandedMarket, horizon: f64, settings: IntegratorSettings) -> Result<Trajectory> {
    m.check_state(s0)?;
    if !(horizon > 0.0) {
        return Err(Error::InvalidConfig(format!("horizon must be positive, got {horizon}")));
    }
    let hmax = settings.max_step.unwrap_or_else(|| default_step(m));
    let interval = settings
        .record_interval
        .unwrap_or_else(|| hmax.max(horizon / MAX_DEFAULT_RECORDS))
        .min(horizon);
    let segments = (horizon / interval).round().max(1.0) as usize;

    let mut rk = Rk4::new(s0.len());
    let mut s: Vec<f64> = s0.iter().zip(&m.rho).map(|(x, r)| x.clamp(0.0, *r)).collect();
    let mut times = vec![0.0];
    let mut states = vec![StateVector(s.clone())];
    for k in 0..segments {
        let a = horizon * k as f64 / segments as f64;
        let b = if k + 1 == segments { horizon } else { horizon * (k + 1) as f64 / segments as f64 };
        rk.advance(m, &mut s, a, b, hmax, |_, _, _, _| {})?;
        times.push(b);
        states.push(StateVector(s.clone()));
    }
    Ok(Trajectory {
        times,
        states,
        max_clamp: rk.max_clamp,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub s_star: StateVector,
    pub residual_norm: f64,
    pub solver_iterations: usize,
}

/// Natural magnitude of flows in the market, used to scale the residual target.
fn flow_scale(m: &ExpandedMarket) -> f64 {
    let max_nu = m.nu.iter().cloned().fold(0.0_f64, f64::max);
    m.lambda.min(m.tau * max_nu).max(1.0)
}

/// Lyapunov objective
/// `W(s) = Σ_c λ φ_c log(ε_c + Σ α v s) − Σ τ ν ρ log s + Σ τ ν s`
/// over positive-mass cells.
pub fn lyapunov_value(s: &[f64], m: &ExpandedMarket) -> Result<f64> {
    m.check_state(s)?;
    let mut w = 0.0;
    for c in 0..m.n_customer_cells() {
        if m.phi[c] > 0.0 {
            w += m.lambda * m.phi[c] * m.denominator(c, s).ln();
        }
    }
    for (l, &x) in s.iter().enumerate() {
        if m.rho[l] <= 0.0 {
            continue;
        }
        if x <= 0.0 {
            return Err(Error::DomainError(l));
        }
        let tn = m.replenish_rate(l);
        w += tn * (x - m.rho[l] * x.ln());
    }
    Ok(w)
}

/// Convex objective in log coordinates restricted to the active cells.
struct LogObjective<'a> {
    m: &'a ExpandedMarket,
    active: Vec<usize>,
}

impl<'a> LogObjective<'a> {
    fn state(&self, y: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.m.n_listing_cells()];
        for (k, &l) in self.active.iter().enumerate() {
            s[l] = y[k].exp();
        }
        s
    }

    fn value(&self, y: &[f64]) -> f64 {
        let s = self.state(y);
        let m = self.m;
        let mut v = 0.0;
        for c in 0..m.n_customer_cells() {
            if m.phi[c] > 0.0 {
                v += m.lambda * m.phi[c] * m.denominator(c, &s).ln();
            }
        }
        for (k, &l) in self.active.iter().enumerate() {
            let tn = m.replenish_rate(l);
            v += tn * (s[l] - m.rho[l] * y[k]);
        }
        v
    }

    /// Returns `(f, H)` where `f = −∇V` is the flow residual on active cells.
    fn residual_and_hessian(&self, y: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let m = self.m;
        let s = self.state(y);
        let n = self.active.len();
        let mut f = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        let mut share = vec![0.0; n];
        for c in 0..m.n_customer_cells() {
            if m.phi[c] == 0.0 {
                continue;
            }
            let d = m.denominator(c, &s);
            let lp = m.lambda * m.phi[c];
            for (k, &l) in self.active.iter().enumerate() {
                share[k] = m.weight(c, l) * s[l] / d;
            }
            for a in 0..n {
                f[a] -= lp * share[a];
                h[(a, a)] += lp * share[a];
                for b in 0..n {
                    h[(a, b)] -= lp * share[a] * share[b];
                }
            }
        }
        for (k, &l) in self.active.iter().enumerate() {
            let tn = m.replenish_rate(l);
            f[k] += (m.rho[l] - s[l]) * tn;
            h[(k, k)] += tn * s[l];
        }
        (f, h)
    }
}

impl LogObjective<'_> {
    /// Full Newton steps past the target while they keep lowering the residual.
    fn polish(&self, mut y: Vec<f64>, mut res: f64, log_rho: &[f64]) -> (Vec<f64>, f64) {
        for _ in 0..POLISH_STEPS {
            let (f, h) = self.residual_and_hessian(&y);
            let Some(ch) = h.cholesky() else { break };
            let dir = ch.solve(&f);
            let trial: Vec<f64> = y.iter().zip(dir.iter()).zip(log_rho).map(|((a, d), cap)| (a + d).min(*cap)).collect();
            let r = self.residual_and_hessian(&trial).0.amax();
            if !(r < res) {
                break;
            }
            y = trial;
            res = r;
        }
        (y, res)
    }
}

/// Closed-form availability ignoring competition between listings:
/// `ρ τν / (τν + λ Σ_c φ_c α v / ε_c)`.
fn uncongested_guess(m: &ExpandedMarket) -> Vec<f64> {
    (0..m.n_listing_cells())
        .map(|l| {
            if m.rho[l] <= 0.0 {
                return 0.0;
            }
            let pull: f64 = (0..m.n_customer_cells())
                .map(|c| m.phi[c] * m.weight(c, l) / m.epsilon[c])
                .sum();
            let tn = m.replenish_rate(l);
            m.rho[l] * tn / (tn + m.lambda * pull)
        })
        .collect()
}

/// Unique interior steady state of the availability ODE.
///
/// Damped Newton on the flow residual in `y = log s`, where the Lyapunov
/// objective is strictly convex; falls back to damped fixed-point sweeps.
/// The residual target is `tol` times `max(1, min(λ, τ max ν))`.
pub fn steady_state(m: &ExpandedMarket, tol: f64) -> Result<SteadyState> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    let target = tol * flow_scale(m);
    let obj = LogObjective {
        m,
        active: m.active_listing_cells(),
    };
    let log_rho: Vec<f64> = obj.active.iter().map(|&l| m.rho[l].ln()).collect();
    let guess = uncongested_guess(m);
    let mut y: Vec<f64> = obj.active.iter().map(|&l| guess[l].ln()).collect();

    let mut best_res = f64::INFINITY;
    let mut best_y = y.clone();
    for iter in 0..NEWTON_MAX_ITER {
        let (f, h) = obj.residual_and_hessian(&y);
        let res = f.amax();
        if res < best_res {
            best_res = res;
            best_y = y.clone();
        }
        if res <= target {
            let (y, res) = obj.polish(y, res, &log_rho);
            return Ok(SteadyState {
                s_star: StateVector(obj.state(&y)),
                residual_norm: res,
                solver_iterations: iter,
            });
        }
        let dir = match h.cholesky() {
            Some(ch) => ch.solve(&f),
            None => break,
        };
        let v0 = obj.value(&y);
        // ∇V · d = −f · d
        let slope = -f.dot(&dir);
        // once the predicted decrease drops below the rounding error of V,
        // progress is judged by the residual instead
        let noisy = slope.abs() < 1e3 * f64::EPSILON * (1.0 + v0.abs());
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-12 {
            let trial: Vec<f64> = y
                .iter()
                .zip(dir.iter())
                .zip(&log_rho)
                .map(|((a, d), cap)| if noisy { (a + t * d).min(*cap) } else { a + t * d })
                .collect();
            let ok = if noisy {
                obj.residual_and_hessian(&trial).0.amax() < res
            } else {
                trial.iter().zip(&log_rho).all(|(a, b)| a <= b) && obj.value(&trial) <= v0 + 1e-4 * t * slope
            };
            if ok {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(next) => y = next,
            None => break,
        }
    }

    fixed_point_fallback(m, &obj.state(&best_y), target, best_res)
}

fn fixed_point_fallback(m: &ExpandedMarket, start: &[f64], target: f64, best_newton: f64) -> Result<SteadyState> {
    let n = m.n_listing_cells();
    let mut s = start.to_vec();
    let mut demand = vec![0.0; n];
    let mut f = vec![0.0; n];
    let mut best = best_newton;
    for sweep in 0..FIXED_POINT_SWEEPS {
        rhs_into(m, &s, &mut f);
        let res = max_abs(&f);
        best = best.min(res);
        if res <= target {
            return Ok(SteadyState {
                s_star: StateVector(s),
                residual_norm: res,
                solver_iterations: NEWTON_MAX_ITER + sweep,
            });
        }
        m.demand_rates(&s, &mut demand);
        for l in 0..n {
            if m.rho[l] <= 0.0 {
                continue;
            }
            let proposal = (m.rho[l] - demand[l] / m.replenish_rate(l)).clamp(f64::MIN_POSITIVE, m.rho[l]);
            s[l] = (1.0 - FIXED_POINT_DAMPING) * s[l] + FIXED_POINT_DAMPING * proposal;
        }
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_ITER + FIXED_POINT_SWEEPS,
        residual: best,
    })
}

/// Averaging window for [`booking_rates_mf`].
#[derive(Debug, Clone, PartialEq)]
pub enum RateWindow {
    /// Rates at the steady state.
    Steady { tol: f64 },
    /// Time-averaged rates over `[t0, t1]` along the trajectory from `initial`.
    Transient {
        t0: f64,
        t1: f64,
        initial: StateVector,
        settings: IntegratorSettings,
    },
}

impl RateWindow {
    pub fn steady() -> Self {
        RateWindow::Steady { tol: DEFAULT_STEADY_TOL }
    }
}

/// Booking rates at a fixed state, `Q_ij = λ Σ_θ Σ_γ φ_{γ,i} p_{γ,i}(θ,j | s)`.
pub fn booking_rates_at(m: &ExpandedMarket, s: &[f64]) -> Result<BookingLedger> {
    m.check_state(s)?;
    Ok(BookingLedger::from_rates(m.booking_matrix(s)))
}

/// Mean-field booking ledger over a window.
pub fn booking_rates_mf(m: &ExpandedMarket, window: &RateWindow) -> Result<BookingLedger> {
    match window {
        RateWindow::Steady { tol } => {
            let ss = steady_state(m, *tol)?;
            booking_rates_at(m, &ss.s_star)
        }
        RateWindow::Transient { t0, t1, initial, settings } => {
            if !(*t0 >= 0.0 && t1 > t0) {
                return Err(Error::InvalidConfig(format!("window [{t0}, {t1}] is empty")));
            }
            m.check_state(initial)?;
            let hmax = settings.max_step.unwrap_or_else(|| default_step(m));
            let mut rk = Rk4::new(initial.len());
            let mut s = initial.to_vec();
            rk.advance(m, &mut s, 0.0, *t0, hmax, |_, _, _, _| {})?;
            let mut acc = [[0.0; 2]; 2];
            rk.advance(m, &mut s, *t0, *t1, hmax, |a, b, prev, cur| {
                let qa = m.booking_matrix(prev);
                let qb = m.booking_matrix(cur);
                let w = 0.5 * (b - a);
                for i in 0..2 {
                    for j in 0..2 {
                        acc[i][j] += w * (qa[i][j] + qb[i][j]);
                    }
                }
            })?;
            let span = t1 - t0;
            acc.iter_mut().flatten().for_each(|q| *q /= span);
            let mut ledger = BookingLedger::from_rates(acc);
            ledger.window = Some((*t0, *t1));
            Ok(ledger)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{expand_for_design, DesignSpec, Intervention, MarketConfig};

    fn gc(v: f64, lambda: f64, tau: f64) -> ExpandedMarket {
        let cfg = MarketConfig::homogeneous(v, 1.0, lambda, tau);
        expand_for_design(&cfg, &Intervention::null(&cfg), &DesignSpec::GlobalControl).unwrap()
    }

    /// Bisection on `(1 − s) − v s / (1 + v s)` over `[0, 1]`.
    fn scalar_root(v: f64) -> f64 {
        let g = |s: f64| (1.0 - s) - v * s / (1.0 + v * s);
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn rhs_zero_at_full_availability_without_demand() {
        let m = gc(0.315, 1e-300, 1.0);
        let f = ode_rhs(&[1.0, 0.0], &m).unwrap();
        assert!(max_abs(&f) < 1e-250);
    }

    #[test]
    fn rhs_positive_at_empty_state() {
        let m = gc(0.315, 1.0, 1.0);
        let f = ode_rhs(&[0.0, 0.0], &m).unwrap();
        assert_eq!(f[0], 1.0);
    }

    #[test]
    fn rhs_vanishes_at_scalar_root() {
        let m = gc(0.315, 1.0, 1.0);
        let root = scalar_root(0.315);
        assert!((root - 0.798936).abs() < 1e-6);
        let f = ode_rhs(&[root, 0.0], &m).unwrap();
        assert!(f[0].abs() < 1e-5);
        assert_eq!(flow_residual(&[root, 0.0], &m).unwrap(), f);
    }

    #[test]
    fn calibration_steady_states() {
        for (v, s_expected) in [(0.315, scalar_root(0.315)), (0.3937, scalar_root(0.3937))] {
            let m = gc(v, 1.0, 1.0);
            let ss = steady_state(&m, 1e-10).unwrap();
            assert!((ss.s_star[0] - s_expected).abs() < 1e-9);
            assert!(ss.residual_norm <= 1e-10);
        }
        let ss = steady_state(&gc(0.315, 1.0, 1.0), 1e-10).unwrap();
        assert!((1.0 - ss.s_star[0] - 0.201064).abs() < 1e-6);
        let ss = steady_state(&gc(0.3937, 1.0, 1.0), 1e-10).unwrap();
        assert!((1.0 - ss.s_star[0] - 0.232133).abs() < 1e-6);
    }

    #[test]
    fn no_demand_steady_state_is_full() {
        let ss = steady_state(&gc(0.315, 1e-12, 1.0), 1e-10).unwrap();
        assert!((ss.s_star[0] - 1.0).abs() < 1e-9);
        assert_eq!(ss.s_star[1], 0.0);
    }

    #[test]
    fn linear_decay_matches_closed_form() {
        let mut m = gc(0.315, 1e-300, 2.0);
        m.nu = vec![1.5, 1.5];
        let traj = integrate(&[0.2, 0.0], &m, 1.0, IntegratorSettings::default()).unwrap();
        let exact = 1.0 - 0.8 * (-3.0_f64).exp();
        assert!((traj.terminal()[0] - exact).abs() < 1e-8);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
    }

    #[test]
    fn integrator_reaches_steady_state() {
        let m = gc(0.315, 1.0, 1.0);
        let traj = integrate(&m.rho, &m, 50.0, IntegratorSettings::default()).unwrap();
        let ss = steady_state(&m, 1e-12).unwrap();
        assert!((traj.terminal()[0] - ss.s_star[0]).abs() < 1e-6);
        assert!(traj.max_clamp <= CLAMP_TOLERANCE);
    }

    #[test]
    fn lyapunov_domain_and_minimum() {
        let m = gc(0.315, 1.0, 1.0);
        assert!(matches!(lyapunov_value(&[0.0, 0.0], &m), Err(Error::DomainError(0))));
        let s = steady_state(&m, 1e-12).unwrap().s_star;
        let w0 = lyapunov_value(&s, &m).unwrap();
        let d = 1e-6;
        let wm = lyapunov_value(&[s[0] - d, 0.0], &m).unwrap();
        let wp = lyapunov_value(&[s[0] + d, 0.0], &m).unwrap();
        assert!(wm > w0 && wp > w0);
        // dW/ds changes sign across s*
        let grad = |x: f64| {
            let h = 1e-7;
            (lyapunov_value(&[x + h, 0.0], &m).unwrap() - lyapunov_value(&[x - h, 0.0], &m).unwrap()) / (2.0 * h)
        };
        assert!(grad(s[0] - 0.05) < 0.0 && grad(s[0] + 0.05) > 0.0);
    }

    #[test]
    fn steady_booking_ledger_gc() {
        let m = gc(0.315, 1.0, 1.0);
        let l = booking_rates_mf(&m, &RateWindow::steady()).unwrap();
        assert!((l.q(0, 0) - 0.201064).abs() < 1e-6);
        assert_eq!(l.q(1, 1), 0.0);
        assert_eq!(l.q(0, 1), 0.0);
        assert_eq!(l.q(1, 0), 0.0);
    }

    #[test]
    fn transient_window_close_to_steady() {
        let m = gc(0.315, 1.0, 1.0);
        let steady = booking_rates_mf(&m, &RateWindow::steady()).unwrap();
        let transient = booking_rates_mf(
            &m,
            &RateWindow::Transient {
                t0: 5.0,
                t1: 25.0,
                initial: m.full_availability(),
                settings: IntegratorSettings::default(),
            },
        )
        .unwrap();
        assert!((transient.q(0, 0) / steady.q(0, 0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = gc(0.315, 1.0, 1.0);
        assert!(matches!(steady_state(&m, 0.0), Err(Error::InvalidConfig(_))));
        assert!(matches!(integrate(&[1.5, 0.0], &m, 1.0, IntegratorSettings::default()), Err(Error::StateOutOfBounds { .. })));
    }
}
