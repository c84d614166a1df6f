//! Functional derivatives of path functionals: the horizontal derivative
//! (a left shift of the past with the present frozen), first and second
//! vertical derivatives (partials in the present coordinate), cylindrical
//! functionals with their closed-form derivatives, and the representation of
//! the horizontal derivative as a backward integral of a Fréchet density.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::paths::SampledPath;
use crate::regcalc::{backward_integral, EpsilonSchedule, LimitEstimate};
use crate::report::ReportEntry;

/// A functional `u(t, η)` of time and a path window.
#[derive(Clone)]
pub struct PathFunctional {
    pub label: String,
    evaluator: Arc<dyn Fn(f64, &SampledPath) -> f64 + Send + Sync>,
    /// Optional polynomial growth certificate `(C, m)`:
    /// `|u(t,η)| ≤ C (1 + ‖η‖∞)^m`.
    pub growth_bound: Option<(f64, f64)>,
}

impl PathFunctional {
    pub fn new(
        label: impl Into<String>,
        evaluator: impl Fn(f64, &SampledPath) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PathFunctional { label: label.into(), evaluator: Arc::new(evaluator), growth_bound: None }
    }

    pub fn with_growth(mut self, c: f64, m: f64) -> Self {
        self.growth_bound = Some((c, m));
        self
    }

    pub fn eval(&self, t: f64, eta: &SampledPath) -> f64 {
        (self.evaluator)(t, eta)
    }

    /// `u(t,η) = η(0)` — present-only functional.
    pub fn present() -> Self {
        PathFunctional::new("present", |_, eta| eta.present_value())
    }

    /// `u(t,η) = ∫ η(x) dx` over the past window (Lebesgue; the present
    /// value, a single point, does not contribute).
    pub fn integral() -> Self {
        PathFunctional::new("integral", |_, eta| {
            let g = eta.grid;
            crate::quad::trapezoid(|x| eta.continuous_value(x), g.t_min, g.t_max, 4 * g.n_points)
        })
    }

    /// `u(t,η) = sup_{[-t,0]} η` (running maximum over the elapsed window,
    /// including the present value).
    pub fn sup() -> Self {
        PathFunctional::new("sup", |t, eta| {
            let g = eta.grid;
            let lo = (-t).max(g.t_min);
            let mut m = eta.present_value();
            for (x, &v) in g.points().zip(&eta.values) {
                if x >= lo - 1e-12 && v > m {
                    m = v;
                }
            }
            m
        })
    }

    /// Wrap a cylindrical functional as a `PathFunctional` via [`eval_cyl`].
    pub fn cylindrical(c: CylindricalFunctional) -> Self {
        let label = format!("cylindrical[{}]", c.basis.len());
        PathFunctional::new(label, move |t, eta| {
            eval_cyl(&c, t, eta).unwrap_or(f64::NAN)
        })
    }
}

/// A smooth map `ℝ^N → ℝ` with gradient and Hessian evaluators.
#[derive(Clone)]
pub struct SmoothMap {
    pub dim: usize,
    pub eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub grad: Arc<dyn Fn(&[f64], usize) -> f64 + Send + Sync>,
    pub hess: Arc<dyn Fn(&[f64], usize, usize) -> f64 + Send + Sync>,
}

impl SmoothMap {
    pub fn new(
        dim: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64], usize) -> f64 + Send + Sync + 'static,
        hess: impl Fn(&[f64], usize, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SmoothMap { dim, eval: Arc::new(eval), grad: Arc::new(grad), hess: Arc::new(hess) }
    }
}

/// A basis function on `[0, T]` with first and second derivative evaluators
/// (understood as 0 outside `[0, T]`; one-sided derivatives at the ends).
#[derive(Clone)]
pub struct BasisFn {
    pub value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub d1: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub d2: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl BasisFn {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        BasisFn { value: Arc::new(value), d1: Arc::new(d1), d2: Arc::new(d2) }
    }
}

/// A cylindrical functional `η ↦ outer(x_1, …, x_N)` whose coordinates are
/// the linear functionals `x_i(t,η) = η(0)φ_i(t) − ∫_{-t}^0 η(x) φ̇_i(x+t) dx`.
#[derive(Clone)]
pub struct CylindricalFunctional {
    pub outer: SmoothMap,
    pub basis: Vec<BasisFn>,
    pub horizon: f64,
}

impl CylindricalFunctional {
    pub fn new(outer: SmoothMap, basis: Vec<BasisFn>, horizon: f64) -> Result<Self> {
        if basis.is_empty() || outer.dim != basis.len() {
            return Err(Error::invalid("outer dimension must match the number of basis functions"));
        }
        if !(horizon > 0.0) {
            return Err(Error::invalid("horizon must be positive"));
        }
        Ok(CylindricalFunctional { outer, basis, horizon })
    }
}

/// Result bundle of the three functional derivatives.
#[derive(Debug, Clone)]
pub struct DerivativeResult {
    pub dh: LimitEstimate,
    pub dv: LimitEstimate,
    pub dvv: LimitEstimate,
}

fn check_time(c: &CylindricalFunctional, t: f64) -> Result<()> {
    if !(0.0..=c.horizon + 1e-12).contains(&t) {
        return Err(Error::invalid(format!("time {t} outside [0, {}]", c.horizon)));
    }
    Ok(())
}

fn coord_quadrature(eta: &SampledPath, t: f64, integrand: impl Fn(f64) -> f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let n = (4 * eta.grid.n_points).max(512);
    crate::quad::simpson(integrand, -t, 0.0, n)
}

/// The coordinates `x_i(t, η)` of a cylindrical functional, computed by the
/// integration-by-parts form `η(0)φ_i(t) − ∫_{-t}^0 η(x) φ̇_i(x+t) dx`
/// (exact quadrature, no ε-limit needed).
pub fn cyl_coordinates(c: &CylindricalFunctional, t: f64, eta: &SampledPath) -> Result<Vec<f64>> {
    check_time(c, t)?;
    let eta0 = eta.present_value();
    Ok(c.basis
        .iter()
        .map(|phi| {
            let boundary = eta0 * (phi.value)(t);
            let integral =
                coord_quadrature(eta, t, |x| eta.continuous_value(x) * (phi.d1)(x + t));
            boundary - integral
        })
        .collect())
}

/// Evaluate a cylindrical functional at `(t, η)`.
pub fn eval_cyl(c: &CylindricalFunctional, t: f64, eta: &SampledPath) -> Result<f64> {
    let x = cyl_coordinates(c, t, eta)?;
    Ok((c.outer.eval)(&x))
}

/// The horizontal coefficients
/// `q_i = η(0)φ̇_i(t) − η(-t)φ̇_i(0⁺) − ∫_{-t}^0 η(x) φ̈_i(x+t) dx`
/// appearing in the closed forms of the horizontal derivative and of `∂_t`
/// for cylindrical functionals.
pub fn cyl_horizontal_coeffs(
    c: &CylindricalFunctional,
    t: f64,
    eta: &SampledPath,
) -> Result<Vec<f64>> {
    check_time(c, t)?;
    // The horizontal shift freezes the present, so only the integral term of
    // the coordinate moves; its boundary value is the past limit η(0⁻).
    let eta0 = eta.continuous_value(0.0);
    let eta_mt = eta.continuous_value(-t);
    Ok(c.basis
        .iter()
        .map(|phi| {
            eta0 * (phi.d1)(t)
                - eta_mt * (phi.d1)(0.0)
                - coord_quadrature(eta, t, |x| eta.continuous_value(x) * (phi.d2)(x + t))
        })
        .collect())
}

/// Closed-form horizontal derivative of a cylindrical functional:
/// `D^H = −Σ_i ∂_i outer(x) · q_i`.
pub fn cyl_dh_closed(c: &CylindricalFunctional, t: f64, eta: &SampledPath) -> Result<f64> {
    let x = cyl_coordinates(c, t, eta)?;
    let q = cyl_horizontal_coeffs(c, t, eta)?;
    Ok(-(0..c.basis.len()).map(|i| (c.outer.grad)(&x, i) * q[i]).sum::<f64>())
}

/// Closed-form vertical derivatives of a cylindrical functional:
/// `D^V = Σ_i ∂_i outer · φ_i(t)`, `D^{VV} = Σ_{ij} ∂²_{ij} outer · φ_i(t)φ_j(t)`.
pub fn cyl_dv_closed(c: &CylindricalFunctional, t: f64, eta: &SampledPath) -> Result<(f64, f64)> {
    let x = cyl_coordinates(c, t, eta)?;
    let n = c.basis.len();
    let phis: Vec<f64> = c.basis.iter().map(|phi| (phi.value)(t)).collect();
    let dv = (0..n).map(|i| (c.outer.grad)(&x, i) * phis[i]).sum();
    let mut dvv = 0.0;
    for i in 0..n {
        for j in 0..n {
            dvv += (c.outer.hess)(&x, i, j) * phis[i] * phis[j];
        }
    }
    Ok((dv, dvv))
}

/// Horizontal derivative as the ε-limit of left-shift quotients
/// `[u(t, η) − u(t, η(·−ε) past, η(0) present)]/ε`.
pub fn horizontal_derivative(
    u: &PathFunctional,
    t: f64,
    eta: &SampledPath,
    sched: &EpsilonSchedule,
    tolerance: f64,
) -> Result<LimitEstimate> {
    // Freeze the present explicitly so both evaluations see the same 𝒞-path
    // structure.
    let frozen = eta.clone().with_present(eta.present_value());
    let base = u.eval(t, &frozen);
    if !base.is_finite() {
        return Err(Error::degenerate(format!("functional `{}` returned non-finite value", u.label)));
    }
    let raw = sched
        .eps_values
        .iter()
        .map(|&e| {
            let shifted = frozen.shift_past(e)?;
            Ok((e, (base - u.eval(t, &shifted)) / e))
        })
        .collect::<Result<Vec<_>>>()?;
    LimitEstimate::from_raw(raw, tolerance)
}

/// Diagnostic right-shift variant of the horizontal derivative: the window
/// slides forward and the newly revealed segment next to the present is
/// filled with the frozen present value,
/// `[u(η(·+ε) on [-T,-ε], η(0) on ]-ε,0]) − u(η)]/ε`.
/// Differs from [`horizontal_derivative`] in general (e.g. by the jump
/// `η(0) − η(0⁻)` for the integral functional).
pub fn horizontal_derivative_right(
    u: &PathFunctional,
    t: f64,
    eta: &SampledPath,
    sched: &EpsilonSchedule,
    tolerance: f64,
) -> Result<LimitEstimate> {
    let frozen = eta.clone().with_present(eta.present_value());
    let base = u.eval(t, &frozen);
    let a = eta.present_value();
    let raw = sched
        .eps_values
        .iter()
        .map(|&e| {
            let g = eta.grid;
            let values: Vec<f64> = g
                .points()
                .map(|x| if x + e <= 1e-12 { eta.continuous_value(x + e) } else { a })
                .collect();
            let slid = SampledPath::new(g, values)?.with_present(a);
            Ok((e, (u.eval(t, &slid) - base) / e))
        })
        .collect::<Result<Vec<_>>>()?;
    LimitEstimate::from_raw(raw, tolerance)
}

/// Default step schedule for vertical finite differences: spans from 0.1
/// down past the fourth-root-of-machine-precision scale where the
/// three-point second-difference stencil is optimal.
pub fn vertical_default_schedule() -> EpsilonSchedule {
    EpsilonSchedule::geometric(0.1, 0.5, 11).expect("static schedule is valid")
}

/// First and second vertical derivatives by central differences in the
/// present coordinate, extrapolated over the step schedule.
pub fn vertical_derivatives(
    u: &PathFunctional,
    t: f64,
    eta: &SampledPath,
    h_sched: &EpsilonSchedule,
    tolerance: f64,
) -> Result<(LimitEstimate, LimitEstimate)> {
    let (past, a) = eta.split();
    let at = |aa: f64| -> Result<f64> {
        let p = SampledPath::join(&past, aa)?;
        let v = u.eval(t, &p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::degenerate(format!("functional `{}` returned non-finite value", u.label)))
        }
    };
    let u0 = at(a)?;
    let mut raw_dv = Vec::with_capacity(h_sched.eps_values.len());
    let mut raw_dvv = Vec::with_capacity(h_sched.eps_values.len());
    for &h in &h_sched.eps_values {
        let up = at(a + h)?;
        let um = at(a - h)?;
        raw_dv.push((h, (up - um) / (2.0 * h)));
        raw_dvv.push((h, (up - 2.0 * u0 + um) / (h * h)));
    }
    Ok((
        LimitEstimate::from_raw(raw_dv, tolerance)?,
        LimitEstimate::from_raw(raw_dvv, tolerance)?,
    ))
}

/// All three derivatives in one bundle.
pub fn derivatives(
    u: &PathFunctional,
    t: f64,
    eta: &SampledPath,
    sched: &EpsilonSchedule,
    tolerance: f64,
) -> Result<DerivativeResult> {
    let dh = horizontal_derivative(u, t, eta, sched, tolerance)?;
    let (dv, dvv) = vertical_derivatives(u, t, eta, &vertical_default_schedule(), tolerance)?;
    Ok(DerivativeResult { dh, dv, dvv })
}

/// Check the representation of the horizontal derivative as a backward
/// integral of the (caller-supplied, closed-form) Fréchet density:
/// `D^H u(η) = ∫ density(x) d⁺η(x)`.
///
/// The density is the absolutely continuous part of the Fréchet derivative,
/// sampled as a path on η's grid; boundary mass at `-T` is encoded by
/// ramping the density from zero at the left endpoint over the first cell.
///
/// The two sides need opposite ε regimes: the shift quotient is accurate for
/// ε at or above the grid spacing (the caller's schedule), while the backward
/// integral only resolves the one-cell boundary ramp for ε below the grid
/// spacing, where it converges to the Stieltjes value of the sampled
/// density. The check therefore refines the schedule internally for the
/// backward side.
pub fn frechet_rep_check(
    u: &PathFunctional,
    density: &SampledPath,
    t: f64,
    eta: &SampledPath,
    sched: &EpsilonSchedule,
    tolerance: f64,
) -> Result<ReportEntry> {
    let dh = horizontal_derivative(u, t, eta, sched, tolerance)?;
    let fine = EpsilonSchedule::geometric(0.5 * eta.grid.spacing(), 0.5, 6)?;
    let rep = backward_integral(density, eta, &fine, tolerance)?;
    Ok(ReportEntry::compare(
        format!("frechet_representation[{}]", u.label),
        dh.value,
        rep.value,
        tolerance,
        "backward-integral",
    ))
}
