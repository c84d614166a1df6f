//! Process simulation (Brownian fixtures), the stochastic flow of a path
//! anchored at `(t, η)`, and a numerical verifier of the functional Itô
//! formula at a fixed regularization level ε.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::paths::{Grid, SampledPath, Trajectory};
use crate::report::ReportEntry;

/// Simulation configuration.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    pub n_steps: usize,
    pub n_paths: usize,
    pub horizon: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Exact Gaussian increments of variance Δt.
    ExactIncrements,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 2 {
            return Err(Error::invalid("n_steps must be at least 2"));
        }
        if self.n_paths < 1 {
            return Err(Error::invalid("n_paths must be at least 1"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::invalid("horizon must be positive"));
        }
        Ok(())
    }
}

/// One Brownian sample path. Deterministic in `(seed, path_index)`: each
/// path draws from its own counter-based substream, so the result does not
/// depend on how paths are distributed over workers.
pub fn simulate_bm_path(cfg: &SimConfig, path_index: u64) -> Trajectory {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(path_index);
    let dt = cfg.horizon / cfg.n_steps as f64;
    let sd = dt.sqrt();
    let mut values = Vec::with_capacity(cfg.n_steps + 1);
    let mut w = 0.0;
    values.push(w);
    for _ in 0..cfg.n_steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        w += sd * z;
        values.push(w);
    }
    Trajectory::uniform(cfg.horizon, values).expect("valid by construction")
}

/// All paths of the configuration, in path-index order (path-parallel).
pub fn simulate_bm(cfg: &SimConfig) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    Ok((0..cfg.n_paths as u64).into_par_iter().map(|i| simulate_bm_path(cfg, i)).collect())
}

/// The stochastic flow of the anchor `(t, η)` along a base trajectory `W` on
/// `[t, T]`: past of η glued to the Brownian continuation at the present.
#[derive(Clone)]
pub struct FlowSample {
    pub base: Trajectory,
    pub t: f64,
    pub eta: SampledPath,
}

impl FlowSample {
    pub fn new(base: Trajectory, t: f64, eta: SampledPath) -> Result<Self> {
        if !(t >= base.first_time() - 1e-12 && t <= base.last_time() + 1e-12) {
            return Err(Error::invalid("anchor time outside the base trajectory"));
        }
        Ok(FlowSample { base, t, eta })
    }

    /// Terminal time of the base trajectory.
    pub fn terminal(&self) -> f64 {
        self.base.last_time()
    }
}

/// The window of the flow at time `s ∈ [t, T]`, sampled on `grid`
/// (`[-T_w, 0]`): `η(x+s-t)` for `x ≤ t-s`, and
/// `η(0) + W_{s+x} − W_t` for `x > t-s`.
pub fn flow_window(fs: &FlowSample, s: f64, grid: Grid) -> Result<SampledPath> {
    if s < fs.t - 1e-12 || s > fs.terminal() + 1e-12 {
        return Err(Error::invalid(format!(
            "flow time {s} outside [{}, {}]",
            fs.t,
            fs.terminal()
        )));
    }
    let eta0 = fs.eta.present_value();
    let w_t = fs.base.value_at(fs.t);
    let values: Vec<f64> = grid
        .points()
        .map(|x| {
            if x <= fs.t - s {
                fs.eta.continuous_value(x + s - fs.t)
            } else {
                eta0 + fs.base.value_at(s + x) - w_t
            }
        })
        .collect();
    let present = if s > fs.t { eta0 + fs.base.value_at(s) - w_t } else { eta0 };
    Ok(SampledPath::new(grid, values)?.with_present(present))
}

/// A functional together with the four derivative evaluators the Itô
/// verifier needs, all as closed-form (or externally extrapolated)
/// closures of `(s, window)`.
#[derive(Clone)]
pub struct FunctionalWithDerivatives {
    pub label: String,
    pub u: Arc<dyn Fn(f64, &SampledPath) -> f64 + Send + Sync>,
    pub dt: Arc<dyn Fn(f64, &SampledPath) -> f64 + Send + Sync>,
    pub dh: Arc<dyn Fn(f64, &SampledPath) -> f64 + Send + Sync>,
    pub dv: Arc<dyn Fn(f64, &SampledPath) -> f64 + Send + Sync>,
    pub dvv: Arc<dyn Fn(f64, &SampledPath) -> f64 + Send + Sync>,
}

impl FunctionalWithDerivatives {
    pub fn new(
        label: impl Into<String>,
        u: impl Fn(f64, &SampledPath) -> f64 + Send + Sync + 'static,
        dt: impl Fn(f64, &SampledPath) -> f64 + Send + Sync + 'static,
        dh: impl Fn(f64, &SampledPath) -> f64 + Send + Sync + 'static,
        dv: impl Fn(f64, &SampledPath) -> f64 + Send + Sync + 'static,
        dvv: impl Fn(f64, &SampledPath) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FunctionalWithDerivatives {
            label: label.into(),
            u: Arc::new(u),
            dt: Arc::new(dt),
            dh: Arc::new(dh),
            dv: Arc::new(dv),
            dvv: Arc::new(dvv),
        }
    }

    /// `u(t,η) = η(0)`: dv = 1, all other derivatives 0.
    pub fn present() -> Self {
        FunctionalWithDerivatives::new(
            "present",
            |_, eta| eta.present_value(),
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 1.0,
            |_, _| 0.0,
        )
    }

    /// `u(t,η) = η(0)²`: dv = 2η(0), dvv = 2, others 0.
    pub fn present_squared() -> Self {
        FunctionalWithDerivatives::new(
            "present^2",
            |_, eta| eta.present_value().powi(2),
            |_, _| 0.0,
            |_, _| 0.0,
            |_, eta| 2.0 * eta.present_value(),
            |_, _| 2.0,
        )
    }
}

/// Termwise decomposition of the functional Itô formula along one
/// trajectory, at a fixed regularization ε:
/// `u(s, X_s) = u(0, X_0) + ∫(∂_t + D^H)u ds + ∫ D^V u d⁻X + ½∫ D^{VV}u d[X]`,
/// with the forward and quadratic-variation integrals evaluated as their
/// ε-approximants.
#[derive(Debug, Clone)]
pub struct ItoResidual {
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub drift_term: Vec<f64>,
    pub horizontal_term: Vec<f64>,
    pub forward_term: Vec<f64>,
    pub qv_term: Vec<f64>,
    pub residual: Vec<f64>,
    pub sup_residual: f64,
}

/// Verify the functional Itô formula for `u` along `X` at regularization
/// `eps`, with functional windows of length `grid.length()` sampled on
/// `grid`.
pub fn ito_verify(
    u: &FunctionalWithDerivatives,
    x: &Trajectory,
    eps: f64,
    grid: Grid,
) -> Result<ItoResidual> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    let horizon = grid.length();
    let n = x.times.len();
    let mut lhs = Vec::with_capacity(n);
    let mut f_drift = Vec::with_capacity(n); // ∂_t u
    let mut f_horiz = Vec::with_capacity(n); // D^H u
    let mut dv = Vec::with_capacity(n);
    let mut dvv = Vec::with_capacity(n);
    for &s in &x.times {
        let window = x.window_at(s, horizon, grid)?;
        let v = (u.u)(s, &window);
        if !v.is_finite() {
            return Err(Error::degenerate(format!(
                "functional `{}` returned non-finite value at t={s}",
                u.label
            )));
        }
        lhs.push(v);
        f_drift.push((u.dt)(s, &window));
        f_horiz.push((u.dh)(s, &window));
        dv.push((u.dv)(s, &window));
        dvv.push((u.dvv)(s, &window));
    }
    // Cumulative trapezoid sums of each integrand along the trajectory grid.
    let cumulative = |f: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let mut acc = 0.0;
        out.push(0.0);
        for j in 1..n {
            acc += 0.5 * (f[j - 1] + f[j]) * (x.times[j] - x.times[j - 1]);
            out.push(acc);
        }
        out
    };
    let drift_term = cumulative(&f_drift);
    let horizontal_term = cumulative(&f_horiz);

    // Forward and QV ε-approximants over [0, t_j]. Per the regularization
    // convention on an interval, the integrator is clamped at the interval's
    // right end: increments use X((s+ε) ∧ t_j). The clamp only affects the
    // trailing ε-window, so accumulate the unclamped prefix once and rebuild
    // the tail per evaluation time.
    let fwd_at = |i: usize, cap: f64| dv[i] * (x.value_at((x.times[i] + eps).min(cap)) - x.values[i]) / eps;
    let qv_at = |i: usize, cap: f64| {
        let d = x.value_at((x.times[i] + eps).min(cap)) - x.values[i];
        0.5 * dvv[i] * d * d / eps
    };
    let mut forward_term = vec![0.0; n];
    let mut qv_term = vec![0.0; n];
    let mut cum_f = 0.0;
    let mut cum_q = 0.0;
    let mut i0 = 0usize; // first index with times[i0] > t_j − ε
    for j in 1..n {
        let t_j = x.times[j];
        // Advance the unclamped prefix up to t_j − ε.
        while i0 + 1 <= j && x.times[i0 + 1] <= t_j - eps {
            let h = x.times[i0 + 1] - x.times[i0];
            cum_f += 0.5 * (fwd_at(i0, f64::INFINITY) + fwd_at(i0 + 1, f64::INFINITY)) * h;
            cum_q += 0.5 * (qv_at(i0, f64::INFINITY) + qv_at(i0 + 1, f64::INFINITY)) * h;
            i0 += 1;
        }
        // Clamped tail over [t_{i0}, t_j]. (Clamping is inactive at nodes
        // with s + ε ≤ t_j, so the integrand is continuous across the seam.)
        let mut tail_f = 0.0;
        let mut tail_q = 0.0;
        for i in i0..j {
            let h = x.times[i + 1] - x.times[i];
            tail_f += 0.5 * (fwd_at(i, t_j) + fwd_at(i + 1, t_j)) * h;
            tail_q += 0.5 * (qv_at(i, t_j) + qv_at(i + 1, t_j)) * h;
        }
        forward_term[j] = cum_f + tail_f;
        qv_term[j] = cum_q + tail_q;
    }
    let residual: Vec<f64> = (0..n)
        .map(|j| {
            lhs[j] - lhs[0] - drift_term[j] - horizontal_term[j] - forward_term[j] - qv_term[j]
        })
        .collect();
    let sup_residual = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(ItoResidual {
        times: x.times.clone(),
        lhs,
        drift_term,
        horizontal_term,
        forward_term,
        qv_term,
        residual,
        sup_residual,
    })
}

/// ε-approximant of the quadratic variation `[X]` at the terminal time:
/// `(1/ε) ∫_0^T (X(s+ε) − X(s))² ds` (constant extension beyond `T`).
pub fn qv_terminal(x: &Trajectory, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    let n = x.times.len();
    let mut acc = 0.0;
    for j in 1..n {
        let f = |i: usize| {
            let d = x.value_at(x.times[i] + eps) - x.values[i];
            d * d / eps
        };
        acc += 0.5 * (f(j - 1) + f(j)) * (x.times[j] - x.times[j - 1]);
    }
    Ok(acc)
}

/// Check the martingale property of a sampled process: for every pair of
/// time indices `i < j`, the normalized drift
/// `|mean(V_j − V_i)| / SE(V_j − V_i)` must stay below `k` (the usual 4σ
/// rule). Reports the maximum normalized drift over all pairs.
pub fn martingale_check(values: &[Vec<f64>], k: f64) -> Result<ReportEntry> {
    let n_paths = values.len();
    if n_paths < 2 {
        return Err(Error::invalid("martingale_check needs at least 2 paths"));
    }
    let n_times = values[0].len();
    if n_times < 2 || values.iter().any(|row| row.len() != n_times) {
        return Err(Error::invalid("all paths must share at least 2 common times"));
    }
    let mut worst = 0.0f64;
    for i in 0..n_times {
        for j in (i + 1)..n_times {
            let diffs: Vec<f64> = values.iter().map(|row| row[j] - row[i]).collect();
            let mean = diffs.iter().sum::<f64>() / n_paths as f64;
            let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>()
                / (n_paths as f64 - 1.0);
            let se = (var / n_paths as f64).sqrt();
            let stat = if se > 0.0 {
                mean.abs() / se
            } else if mean.abs() > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            worst = worst.max(stat);
        }
    }
    Ok(ReportEntry::compare("martingale_drift", worst, 0.0, k, "pairwise-drift"))
}
