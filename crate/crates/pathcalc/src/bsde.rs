//! Finite-dimensional (scalar) SDE/BSDE machinery: Euler simulation with
//! mollified Lipschitz coefficients, regression-based backward solving for
//! the triple `(Y, Z, K)`, Feynman–Kac consistency, comparison checks, an
//! a-priori estimate diagnostic, and a driver-convergence diagnostic.
//!
//! Everything here is one-dimensional: a single state, a single Brownian
//! driver, scalar `Y`/`Z`/`K`. Paths are deterministic in `(seed, path
//! index)` via counter-based substreams, so results do not depend on how
//! work is distributed over threads.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::report::ReportEntry;
use crate::simflow::SimConfig;

/// Drift and diffusion of a scalar SDE `dX = b(t, X) dt + σ(t, X) dW`, with
/// a caller-certified Lipschitz constant covering both coefficients.
#[derive(Clone)]
pub struct SDECoeffs {
    pub b: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub sigma: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    /// Certificate: `|b(t,x)−b(t,x')| + |σ(t,x)−σ(t,x')| ≤ C|x−x'|` and
    /// `|b(t,0)| + |σ(t,0)| ≤ C`.
    pub lipschitz_c: f64,
}

impl SDECoeffs {
    pub fn new(
        b: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        sigma: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        lipschitz_c: f64,
    ) -> Self {
        SDECoeffs { b: Arc::new(b), sigma: Arc::new(sigma), lipschitz_c }
    }

    /// Spot-check the Lipschitz certificate on random pairs; returns the
    /// worst observed ratio `(|Δb| + |Δσ|)/|Δx|` (should be ≤ `lipschitz_c`).
    pub fn measured_lipschitz(&self, n_pairs: usize, seed: u64) -> f64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..n_pairs {
            let t: f64 = {
                let z: f64 = StandardNormal.sample(&mut rng);
                z.abs().min(1.0)
            };
            let x: f64 = {
                let z: f64 = StandardNormal.sample(&mut rng);
                3.0 * z
            };
            let y: f64 = {
                let z: f64 = StandardNormal.sample(&mut rng);
                3.0 * z
            };
            if (x - y).abs() < 1e-9 {
                continue;
            }
            let db = ((self.b)(t, x) - (self.b)(t, y)).abs();
            let ds = ((self.sigma)(t, x) - (self.sigma)(t, y)).abs();
            worst = worst.max((db + ds) / (x - y).abs());
        }
        worst
    }
}

/// Normalization constant of the standard bump `exp(-1/(1-x²))` on (−1, 1),
/// computed once (the integrand is smooth and flat at the endpoints, so a
/// fixed Gauss–Legendre rule is accurate to machine precision).
fn bump_norm() -> f64 {
    let (nodes, weights) = gauss_legendre(64).expect("valid order");
    let mut s = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        s += w * (-1.0 / (1.0 - x * x)).exp();
    }
    s
}

/// Kernel-smooth a scalar map `h(t, ·)` at order `n`: convolution with the
/// rescaled bump of support width `2/n`. Preserves any Lipschitz bound of
/// `h` in `x` (up to quadrature error).
fn smooth_map(
    h: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    n: u32,
) -> Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> {
    let norm = bump_norm();
    let (nodes, weights) = gauss_legendre(64).expect("valid order");
    let nf = n as f64;
    Arc::new(move |t: f64, x: f64| {
        let mut s = 0.0;
        for (u, w) in nodes.iter().zip(weights.iter()) {
            s += w * (-1.0 / (1.0 - u * u)).exp() * (h)(t, x - u / nf);
        }
        s / norm
    })
}

/// Smoothed coefficients at order `n`: kernel-convolved drift and diffusion,
/// with a `1/n` ellipticity floor added to the diffusion. The Lipschitz
/// certificate carries over (convolution with a unit-mass kernel preserves
/// Lipschitz bounds; the floor is constant).
pub fn mollify_coeffs(raw: &SDECoeffs, n: u32) -> Result<SDECoeffs> {
    if n == 0 {
        return Err(Error::invalid("mollification order must be >= 1"));
    }
    let b_n = smooth_map(raw.b.clone(), n);
    let sig = smooth_map(raw.sigma.clone(), n);
    let floor = 1.0 / n as f64;
    let sigma_n = Arc::new(move |t: f64, x: f64| (sig)(t, x) + floor);
    Ok(SDECoeffs { b: b_n, sigma: sigma_n, lipschitz_c: raw.lipschitz_c + floor })
}

/// Kernel-smooth a terminal map `g` at order `n` (no ellipticity floor).
pub fn mollify_terminal(
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    n: u32,
) -> Result<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
    if n == 0 {
        return Err(Error::invalid("mollification order must be >= 1"));
    }
    let lifted: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> = {
        let g = g.clone();
        Arc::new(move |_t, x| (g)(x))
    };
    let sm = smooth_map(lifted, n);
    Ok(Arc::new(move |x: f64| (sm)(0.0, x)))
}

/// Euler–Maruyama trajectories together with the Brownian increments that
/// drove them (the increments are reused by the backward regression and by
/// common-random-number comparisons across mollification orders).
#[derive(Debug, Clone)]
pub struct SdePaths {
    /// Time grid `t = times[0] < … < times[n_steps] = T`.
    pub times: Vec<f64>,
    /// `n_paths × (n_steps + 1)` states.
    pub states: Vec<Vec<f64>>,
    /// `n_paths × n_steps` Brownian increments `ΔW`.
    pub increments: Vec<Vec<f64>>,
}

fn euler_one_path(
    coeffs: &SDECoeffs,
    t: f64,
    x: f64,
    cfg: &SimConfig,
    path_index: u64,
) -> std::result::Result<(Vec<f64>, Vec<f64>), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(path_index);
    let n = cfg.n_steps;
    let dt = (cfg.horizon - t) / n as f64;
    let sd = dt.sqrt();
    let mut xs = Vec::with_capacity(n + 1);
    let mut dws = Vec::with_capacity(n);
    let mut state = x;
    xs.push(state);
    for i in 0..n {
        let s = t + i as f64 * dt;
        let z: f64 = StandardNormal.sample(&mut rng);
        let dw = sd * z;
        state += (coeffs.b)(s, state) * dt + (coeffs.sigma)(s, state) * dw;
        if !state.is_finite() {
            return Err(format!("non-finite state at step {}", i + 1));
        }
        xs.push(state);
        dws.push(dw);
    }
    Ok((xs, dws))
}

/// Euler–Maruyama simulation of `X^{t,x}` on `[t, T]` with `cfg.n_steps`
/// uniform steps and `cfg.n_paths` paths. Deterministic in `(seed, path
/// index)`. A non-finite state aborts with the offending path index.
pub fn sde_euler(coeffs: &SDECoeffs, t: f64, x: f64, cfg: &SimConfig) -> Result<SdePaths> {
    cfg.validate()?;
    if !(t >= 0.0 && t < cfg.horizon) {
        return Err(Error::invalid(format!(
            "start time {t} outside [0, horizon {})",
            cfg.horizon
        )));
    }
    let n = cfg.n_steps;
    let dt = (cfg.horizon - t) / n as f64;
    let times: Vec<f64> = (0..=n).map(|i| t + i as f64 * dt).collect();
    let sims: Vec<std::result::Result<(Vec<f64>, Vec<f64>), String>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|p| euler_one_path(coeffs, t, x, cfg, p))
        .collect();
    let mut states = Vec::with_capacity(cfg.n_paths);
    let mut increments = Vec::with_capacity(cfg.n_paths);
    for (p, sim) in sims.into_iter().enumerate() {
        match sim {
            Ok((xs, dws)) => {
                states.push(xs);
                increments.push(dws);
            }
            Err(message) => return Err(Error::Simulation { path: p, message }),
        }
    }
    Ok(SdePaths { times, states, increments })
}

/// Strong-convergence table of the mollified dynamics toward the raw ones:
/// `E[sup_s |X^{n} − X|²]` over the given orders, driven by common random
/// numbers (the same `(seed, path)` increments for every order and for the
/// raw reference). Passes when the table is nonincreasing and ends at or
/// below its start.
pub fn sde_convergence(
    raw: &SDECoeffs,
    t: f64,
    x: f64,
    orders: &[u32],
    cfg: &SimConfig,
) -> Result<(Vec<(u32, f64)>, ReportEntry)> {
    if orders.len() < 2 {
        return Err(Error::invalid("sde_convergence needs at least two orders"));
    }
    let reference = sde_euler(raw, t, x, cfg)?;
    let mut table = Vec::with_capacity(orders.len());
    for &n in orders {
        let smoothed = mollify_coeffs(raw, n)?;
        let paths = sde_euler(&smoothed, t, x, cfg)?;
        let mut acc = 0.0;
        for (a, b) in paths.states.iter().zip(reference.states.iter()) {
            let sup = a
                .iter()
                .zip(b.iter())
                .map(|(u, v)| (u - v).abs())
                .fold(0.0_f64, f64::max);
            acc += sup * sup;
        }
        table.push((n, acc / cfg.n_paths as f64));
    }
    let nonincreasing = table.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12));
    let first = table.first().map(|&(_, v)| v).unwrap_or(f64::NAN);
    let last = table.last().map(|&(_, v)| v).unwrap_or(f64::NAN);
    let pass = nonincreasing && last <= first;
    let entry = ReportEntry::observed("sde_convergence", last, first, pass, "crn-euler-sup-l2");
    Ok((table, entry))
}

/// A scalar backward problem: forward coefficients, generator
/// `f(t, x, y, z)` with a Lipschitz-in-`(y,z)` certificate, terminal map `g`
/// with a polynomial-growth certificate `|g(x)| ≤ C(1 + |x|^m)`, and the
/// initial state `x0` the forward simulation starts from at time 0.
#[derive(Clone)]
pub struct BSDEProblem {
    pub coeffs: SDECoeffs,
    pub generator: Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>,
    pub generator_lipschitz: f64,
    pub terminal: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub growth_bound: (f64, f64),
    pub x0: f64,
}

impl BSDEProblem {
    pub fn new(
        coeffs: SDECoeffs,
        generator: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
        generator_lipschitz: f64,
        terminal: impl Fn(f64) -> f64 + Send + Sync + 'static,
        growth_bound: (f64, f64),
        x0: f64,
    ) -> Result<Self> {
        if !generator_lipschitz.is_finite() || !growth_bound.0.is_finite() {
            return Err(Error::invalid("certificates must be finite"));
        }
        Ok(BSDEProblem {
            coeffs,
            generator: Arc::new(generator),
            generator_lipschitz,
            terminal: Arc::new(terminal),
            growth_bound,
            x0,
        })
    }

    /// The same problem with coefficients and terminal map kernel-smoothed at
    /// order `n` (diffusion gains the `1/n` ellipticity floor); the generator
    /// is kept as-is, matching the super/sub construction where smoothing
    /// acts on the dynamics and the data.
    pub fn mollified(&self, n: u32) -> Result<BSDEProblem> {
        Ok(BSDEProblem {
            coeffs: mollify_coeffs(&self.coeffs, n)?,
            generator: self.generator.clone(),
            generator_lipschitz: self.generator_lipschitz,
            terminal: mollify_terminal(self.terminal.clone(), n)?,
            growth_bound: self.growth_bound,
            x0: self.x0,
        })
    }
}

/// Solver flavor. `Super`/`Sub` carry a scenario-supplied nonnegative rate
/// `κ(t, x)`: the compensator increment over `[t_i, t_{i+1}]` is
/// `±κ(t_i, X_i)·Δt` (nondecreasing `K` for supersolutions, nonincreasing
/// for subsolutions). The solver never infers `K` from data.
#[derive(Clone)]
pub enum BSDEFlavor {
    /// `K ≡ 0`.
    Exact,
    Super(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
    Sub(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

/// Discrete triple `(Y, Z, K)` on the paths/time grid of the forward
/// simulation, plus the paths themselves and any regression warnings.
#[derive(Debug, Clone)]
pub struct BSDESolution {
    pub times: Vec<f64>,
    /// `n_paths × (n_steps + 1)`.
    pub y: Vec<Vec<f64>>,
    /// `n_paths × (n_steps + 1)`; the terminal column replicates the last
    /// regressed value (`Z` lives on `[t_0, T)`).
    pub z: Vec<Vec<f64>>,
    /// Running compensator, `K(·, t_0) = 0`, monotone per path by
    /// construction (flavor-signed).
    pub k: Vec<Vec<f64>>,
    pub paths: SdePaths,
    pub warnings: Vec<String>,
}

impl BSDESolution {
    /// Value at the initial time (all paths share the deterministic start,
    /// so the column is constant).
    pub fn y0(&self) -> f64 {
        self.y.iter().map(|row| row[0]).sum::<f64>() / self.y.len() as f64
    }

    /// Sample mean of `Y` at grid index `i`, with its standard error.
    pub fn y_mean_se(&self, i: usize) -> (f64, f64) {
        column_mean_se(&self.y, i)
    }
}

fn column_mean_se(rows: &[Vec<f64>], i: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r[i]).sum::<f64>() / n;
    let var = rows.iter().map(|r| (r[i] - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Least-squares fit of `targets` on standardized polynomial features of
/// `xs`, degree `degree`. Returns the fitted values. Degrades the degree on
/// rank deficiency (recording a warning) until the system has full rank;
/// degree 0 (the sample mean) always succeeds. A ~constant state column is
/// fitted by its mean directly — the deterministic start is not an anomaly.
fn regress_fit(
    xs: &[f64],
    targets: &[&[f64]],
    degree: usize,
    step: usize,
    warnings: &mut Vec<String>,
) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    let sd = var.sqrt();
    let fit_means = |targets: &[&[f64]]| -> Vec<Vec<f64>> {
        targets
            .iter()
            .map(|t| {
                let m = t.iter().sum::<f64>() / n as f64;
                vec![m; n]
            })
            .collect()
    };
    if sd < 1e-12 * (1.0 + mean.abs()) {
        return fit_means(targets);
    }
    let mut deg = degree;
    loop {
        if deg == 0 {
            return fit_means(targets);
        }
        let m = deg + 1;
        let mut a = DMatrix::zeros(n, m);
        for (r, &x) in xs.iter().enumerate() {
            let xh = (x - mean) / sd;
            let mut p = 1.0;
            for c in 0..m {
                a[(r, c)] = p;
                p *= xh;
            }
        }
        let svd = a.clone().svd(true, true);
        let sv_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
        let eps = sv_max * 1e-9;
        let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
        if rank < m {
            warnings.push(format!(
                "regression at step {step}: rank {rank} < {m} features; degrading degree to {}",
                deg - 1
            ));
            deg -= 1;
            continue;
        }
        return targets
            .iter()
            .map(|t| {
                let rhs = DVector::from_column_slice(t);
                let beta = svd.solve(&rhs, eps).expect("svd computed with both factors");
                (&a * beta).iter().cloned().collect()
            })
            .collect();
    }
}

/// Backward regression solve: `Y_T = g(X_T)`; at each earlier step, the
/// continuation value is the regression of `Y_{i+1}` on polynomial features
/// of `X_i`, `Z` is the regression of the centered product
/// `(Y_{i+1} − continuation)·ΔW_i/Δt` (same conditional expectation as the
/// plain product, with far smaller Monte Carlo variance), and
/// `Y_i = continuation + f(t_i, X_i, continuation, Z_i)·Δt ± κ·Δt` (the
/// compensator term only for the super/sub flavors). Because every
/// regression contains a constant feature, sample means are preserved step
/// by step, which makes the zero-generator case agree with the plain Monte
/// Carlo mean of `g(X_T)` to rounding.
pub fn bsde_solve(
    p: &BSDEProblem,
    flavor: &BSDEFlavor,
    cfg: &SimConfig,
    degree: usize,
) -> Result<BSDESolution> {
    let paths = sde_euler(&p.coeffs, 0.0, p.x0, cfg)?;
    let n = cfg.n_steps;
    let np = cfg.n_paths;
    let dt = cfg.horizon / n as f64;
    let mut warnings = Vec::new();

    let mut y = vec![vec![0.0; n + 1]; np];
    let mut z = vec![vec![0.0; n + 1]; np];
    let mut k_inc = vec![vec![0.0; n]; np];
    for (pi, row) in paths.states.iter().enumerate() {
        y[pi][n] = (p.terminal)(row[n]);
    }

    for i in (0..n).rev() {
        let t_i = paths.times[i];
        let xs: Vec<f64> = paths.states.iter().map(|r| r[i]).collect();
        let y_next: Vec<f64> = y.iter().map(|r| r[i + 1]).collect();
        let cont = regress_fit(&xs, &[&y_next], degree, i, &mut warnings).remove(0);
        let zt: Vec<f64> = y_next
            .iter()
            .zip(cont.iter())
            .zip(paths.increments.iter())
            .map(|((yv, cv), dw)| (yv - cv) * dw[i] / dt)
            .collect();
        let zfit = regress_fit(&xs, &[&zt], degree, i, &mut warnings).remove(0);
        for pi in 0..np {
            let zi = zfit[pi];
            let ci = cont[pi];
            let dk = match flavor {
                BSDEFlavor::Exact => 0.0,
                BSDEFlavor::Super(rate) => (rate)(t_i, xs[pi]).max(0.0) * dt,
                BSDEFlavor::Sub(rate) => -(rate)(t_i, xs[pi]).max(0.0) * dt,
            };
            z[pi][i] = zi;
            k_inc[pi][i] = dk;
            y[pi][i] = ci + (p.generator)(t_i, xs[pi], ci, zi) * dt + dk;
        }
    }
    for row in z.iter_mut() {
        row[n] = row[n - 1];
    }
    let mut k = vec![vec![0.0; n + 1]; np];
    for pi in 0..np {
        for i in 0..n {
            k[pi][i + 1] = k[pi][i] + k_inc[pi][i];
        }
    }
    Ok(BSDESolution { times: paths.times.clone(), y, z, k, paths, warnings })
}

/// Comparison check between a subsolution-style and a supersolution-style
/// value: at every grid time, the paired sample-mean margin
/// `mean(super − sub)` must be ≥ `−4·SE` of the paired differences. Reports
/// the worst margin over the grid.
pub fn comparison_check(sub: &BSDESolution, sup: &BSDESolution) -> Result<ReportEntry> {
    if sub.y.len() != sup.y.len() || sub.times.len() != sup.times.len() {
        return Err(Error::invalid("comparison_check requires matching path/time grids"));
    }
    let np = sub.y.len() as f64;
    let mut worst_margin = f64::INFINITY;
    let mut pass = true;
    for i in 0..sub.times.len() {
        let diffs: Vec<f64> =
            sub.y.iter().zip(sup.y.iter()).map(|(a, b)| b[i] - a[i]).collect();
        let mean = diffs.iter().sum::<f64>() / np;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (np - 1.0).max(1.0);
        let se = (var / np).sqrt();
        if mean < -4.0 * se {
            pass = false;
        }
        worst_margin = worst_margin.min(mean);
    }
    Ok(ReportEntry::observed(
        "comparison_check",
        worst_margin,
        0.0,
        pass,
        "paired-means-4se",
    ))
}

/// Discrete norms for the energy estimate: returns the implied constant
/// `Ĉ = (‖Z‖² + ‖K‖²) / ((1 + T³)(‖Y‖²_{sup} + E∫|f(s, X_s, 0, 0)|² ds))`
/// where `‖Y‖²_{sup}` is the max over the grid of path-mean squares,
/// `‖Z‖² = E∫Z² ds` and `‖K‖² = E[K_T²]`. A vanishing problem (both sides
/// zero) yields `Ĉ = 0`. The entry records `Ĉ` and passes when it is finite;
/// stability across a scenario family is judged by [`apriori_stability`].
pub fn apriori_check(sol: &BSDESolution, p: &BSDEProblem, cfg: &SimConfig) -> Result<ReportEntry> {
    let np = sol.y.len() as f64;
    let n = cfg.n_steps;
    let dt = cfg.horizon / n as f64;
    let z_sq = sol
        .z
        .iter()
        .map(|row| row[..n].iter().map(|v| v * v).sum::<f64>() * dt)
        .sum::<f64>()
        / np;
    let k_sq = sol.k.iter().map(|row| row[n] * row[n]).sum::<f64>() / np;
    let y_sup = (0..=n)
        .map(|i| sol.y.iter().map(|row| row[i] * row[i]).sum::<f64>() / np)
        .fold(0.0_f64, f64::max);
    let f_sq = sol
        .paths
        .states
        .iter()
        .map(|row| {
            row[..n]
                .iter()
                .enumerate()
                .map(|(i, &x)| (p.generator)(sol.times[i], x, 0.0, 0.0).powi(2))
                .sum::<f64>()
                * dt
        })
        .sum::<f64>()
        / np;
    let lhs = z_sq + k_sq;
    let rhs = (1.0 + cfg.horizon.powi(3)) * (y_sup + f_sq);
    let c_hat = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(ReportEntry::observed(
        "apriori_check",
        c_hat,
        f64::INFINITY,
        c_hat.is_finite(),
        "discrete-energy-norms",
    ))
}

/// Stability of the implied a-priori constant across a scenario family:
/// passes when `max/min ≤ 2` over the (positive) measured constants.
pub fn apriori_stability(constants: &[f64]) -> Result<ReportEntry> {
    if constants.is_empty() {
        return Err(Error::invalid("apriori_stability needs at least one constant"));
    }
    let positive: Vec<f64> = constants.iter().cloned().filter(|c| *c > 0.0).collect();
    if positive.is_empty() {
        return Err(Error::degenerate("all implied constants vanish"));
    }
    let max = positive.iter().cloned().fold(f64::MIN, f64::max);
    let min = positive.iter().cloned().fold(f64::MAX, f64::min);
    let ratio = max / min;
    Ok(ReportEntry::observed(
        "apriori_stability",
        ratio,
        2.0,
        ratio.is_finite() && ratio <= 2.0,
        "max-over-min",
    ))
}

/// Driver-convergence diagnostic: solves the mollified problems at each
/// order with common random numbers, compares their `Z` against a reference
/// solution at the (larger) order `n_star`, and tabulates
/// `E∫|Z^n − Z^{n*}|^q dt` for `q ∈ [1, 2)`. Passes when the table is
/// nonincreasing and ends at or below its start.
pub fn limit_diagnostic(
    p: &BSDEProblem,
    orders: &[u32],
    n_star: u32,
    q: f64,
    cfg: &SimConfig,
    degree: usize,
) -> Result<(Vec<(u32, f64)>, ReportEntry)> {
    if !(1.0..2.0).contains(&q) {
        return Err(Error::invalid(format!("exponent q={q} outside [1, 2)")));
    }
    if orders.iter().any(|&n| n >= n_star) {
        return Err(Error::invalid("all orders must be below the reference order"));
    }
    let n = cfg.n_steps;
    let dt = cfg.horizon / n as f64;
    let reference = bsde_solve(&p.mollified(n_star)?, &BSDEFlavor::Exact, cfg, degree)?;
    let mut table = Vec::with_capacity(orders.len());
    for &order in orders {
        let sol = bsde_solve(&p.mollified(order)?, &BSDEFlavor::Exact, cfg, degree)?;
        let err = sol
            .z
            .iter()
            .zip(reference.z.iter())
            .map(|(a, b)| {
                a[..n].iter().zip(b[..n].iter()).map(|(u, v)| (u - v).abs().powf(q)).sum::<f64>()
                    * dt
            })
            .sum::<f64>()
            / cfg.n_paths as f64;
        table.push((order, err));
    }
    let nonincreasing = table.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12));
    let first = table.first().map(|&(_, v)| v).unwrap_or(f64::NAN);
    let last = table.last().map(|&(_, v)| v).unwrap_or(f64::NAN);
    let pass = nonincreasing && last <= first;
    let entry = ReportEntry::observed("limit_diagnostic", last, first, pass, "crn-z-lq");
    Ok((table, entry))
}
