//! The verification suites: each one pushes named entries into the shared
//! report and returns CSV plot tables as `(file-stem, contents)` pairs.

use std::sync::Arc;

use pathcalc::approx::{sv_convergence, FejerOperator};
use pathcalc::bsde::{
    apriori_check, apriori_stability, bsde_solve, comparison_check, limit_diagnostic,
    sde_convergence, BSDEFlavor, BSDEProblem, SDECoeffs,
};
use pathcalc::error::Result;
use pathcalc::fixtures;
use pathcalc::funcder::PathFunctional;
use pathcalc::ppde::{heat_corpus, heat_residual, lookback_pde_check, mc_price, PsiQuad};
use pathcalc::regcalc::{
    backward_approximant, covariation_approximant, forward_approximant, ibp_check, Direction,
    EpsilonSchedule,
};
use pathcalc::report::{ReportEntry, VerificationReport};
use pathcalc::simflow::{
    ito_verify, simulate_bm_path, FunctionalWithDerivatives, Scheme, SimConfig,
};
use pathcalc::{Grid, SampledPath};

use crate::config::RunConfig;

pub type Csv = (String, String);

fn csv_table(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for row in rows {
        s.push_str(&row);
        s.push('\n');
    }
    s
}

fn sim_cfg(n_steps: usize, n_paths: usize, seed: u64) -> SimConfig {
    SimConfig { n_steps, n_paths, horizon: 1.0, seed, scheme: Scheme::ExactIncrements }
}

fn zero_window(points: usize) -> Result<SampledPath> {
    let grid = Grid::window(1.0, points)?;
    SampledPath::new(grid, vec![0.0; points])
}

/// Regularization-integral suite: integration-by-parts identities on the
/// piecewise-linear fixture corpus (both directions) and the ensemble
/// quadratic-variation check on Brownian samples.
pub fn run_regint(cfg: &RunConfig, report: &mut VerificationReport) -> Result<Vec<Csv>> {
    let rc = &cfg.regint;
    let grid = Grid::window(1.0, rc.grid_points)?;
    let companion = fixtures::sine(grid, 1.0, 0.8);
    let sched = EpsilonSchedule::grid_aligned(grid.spacing(), 256, 4)?;
    let tol = rc.ibp_tolerance * cfg.tol_scale;
    let mut csvs = Vec::new();
    for name in &rc.fixtures {
        let g = fixtures::by_name(name, grid)?;
        for (dir, label) in [(Direction::Forward, "forward"), (Direction::Backward, "backward")] {
            let mut entry = ibp_check(&g, &companion, dir, &sched, tol)?;
            entry.name = format!("regint/ibp_{label}/{name}");
            report.push(entry);
        }
        let rows = sched.eps_values.iter().map(|&e| {
            let nq = (1.0 / e).ceil() as usize * 8;
            format!(
                "{e},{},{}",
                forward_approximant(&g, &companion, e, nq),
                backward_approximant(&g, &companion, e, nq)
            )
        });
        csvs.push((format!("regint_ibp_{name}"), csv_table("eps,forward,backward", rows)));
    }

    // Ensemble quadratic variation via the ε-approximant of [X, X] over the
    // full unit window (the signed ∫_0^x convention makes x = −1 the whole
    // interval, hence the minus sign).
    let qgrid = Grid::window(1.0, rc.qv_steps + 1)?;
    let nq = (1.0 / rc.qv_eps).ceil() as usize * 4;
    let qvs: Vec<f64> = (0..rc.qv_paths as u64)
        .map(|p| {
            let w = fixtures::brownian(qgrid, cfg.seed.wrapping_add(p));
            -covariation_approximant(&w, &w, -1.0, rc.qv_eps, nq)
        })
        .collect();
    let mean = qvs.iter().sum::<f64>() / qvs.len() as f64;
    report.push(ReportEntry::compare(
        "regint/qv_brownian_mean",
        mean,
        1.0,
        rc.qv_tolerance * cfg.tol_scale,
        "eps-approximant-ensemble",
    ));
    csvs.push((
        "regint_qv".into(),
        csv_table("path,qv", qvs.iter().enumerate().map(|(i, q)| format!("{i},{q}"))),
    ));
    Ok(csvs)
}

/// Functional Itô-formula suite: the sup-residual for `u = η(0)²` along
/// Brownian paths must roughly halve when both the step and the
/// regularization ε halve, averaged over seeds.
pub fn run_ito(cfg: &RunConfig, report: &mut VerificationReport) -> Result<Vec<Csv>> {
    let ic = &cfg.ito;
    let u = FunctionalWithDerivatives::present_squared();
    let grid = Grid::window(1.0, ic.window_points)?;
    let (mut sum0, mut sum1) = (0.0, 0.0);
    let mut first_residual: Option<(Vec<f64>, Vec<f64>)> = None;
    for s in 0..ic.n_seeds {
        let seed = cfg.seed.wrapping_add(s);
        let coarse = simulate_bm_path(&sim_cfg(ic.base_steps, 1, seed), 0);
        let fine = simulate_bm_path(&sim_cfg(ic.base_steps * 2, 1, seed), 0);
        let r0 = ito_verify(&u, &coarse, ic.base_eps, grid)?;
        let r1 = ito_verify(&u, &fine, ic.base_eps / 2.0, grid)?;
        sum0 += r0.sup_residual;
        sum1 += r1.sup_residual;
        if first_residual.is_none() {
            first_residual = Some((r0.times.clone(), r0.residual.clone()));
        }
    }
    let factor = sum0 / sum1;
    report.push(ReportEntry::compare(
        "ito/residual_halving_factor",
        factor,
        ic.halving_center,
        ic.halving_tolerance * cfg.tol_scale,
        "seed-averaged-sup-residual",
    ));
    report.push(ReportEntry::observed(
        "ito/base_mean_sup_residual",
        sum0 / ic.n_seeds as f64,
        f64::INFINITY,
        (sum0 / ic.n_seeds as f64).is_finite(),
        "eps-approximant",
    ));
    let (times, residual) = first_residual.expect("at least one seed");
    let rows = times.iter().zip(&residual).map(|(t, r)| format!("{t},{r}"));
    Ok(vec![("ito_residual".into(), csv_table("t,residual", rows))])
}

/// Cylindrical heat-equation suite: residual of the classical solution at a
/// fixed anchor for every corpus functional, with high-order Gauss–Hermite.
pub fn run_heat(cfg: &RunConfig, report: &mut VerificationReport) -> Result<Vec<Csv>> {
    let hc = &cfg.heat;
    let grid = Grid::window(1.0, hc.window_points)?;
    let eta = fixtures::sine(grid, 1.5, 0.6);
    let corpus = heat_corpus(1.0);
    let tol = hc.tolerance * cfg.tol_scale;
    let mut rows = Vec::new();
    for (i, c) in corpus.iter().enumerate() {
        let r = heat_residual(c, hc.t_eval, &eta, PsiQuad::GaussHermite(hc.gauss_hermite_order))?;
        report.push(ReportEntry::compare(
            format!("heat/residual/{i:02}"),
            r,
            0.0,
            tol,
            "gauss-hermite",
        ));
        rows.push(format!("{i},{r}"));
    }
    Ok(vec![("heat_residuals".into(), csv_table("fixture,residual", rows))])
}

/// Lookback suite: the running-maximum value at the zero anchor against its
/// closed form, by Monte Carlo over the stochastic flow, plus the pointwise
/// backward-heat residual of the closed form on a 3-d grid.
pub fn run_lookback(cfg: &RunConfig, report: &mut VerificationReport) -> Result<Vec<Csv>> {
    let lc = &cfg.lookback;
    let exact = (2.0 / std::f64::consts::PI).sqrt();
    let eta = zero_window(lc.n_steps + 1)?;
    let g_sup = PathFunctional::sup().with_growth(1.0, 1.0);
    let mc_cfg = sim_cfg(lc.n_steps, lc.n_paths, cfg.seed);
    let (mean, se) = mc_price(&g_sup, 0.0, &eta, &mc_cfg, eta.grid)?;
    report.push(ReportEntry::compare(
        "lookback/mc_value",
        mean,
        exact,
        (4.0 * se + lc.bias_allowance) * cfg.tol_scale,
        "monte-carlo-flow",
    ));
    let mut entry = lookback_pde_check(
        lc.pde_grid,
        lc.pde_grid,
        lc.pde_grid,
        lc.pde_t_max,
        1.0,
        lc.pde_tolerance * cfg.tol_scale,
    )?;
    entry.name = "lookback/pde_residual".into();
    report.push(entry);

    // Residual profile over time for the plot data (coarser spatial scan).
    use pathcalc::ppde::{lookback_derivatives, LookbackState};
    let mut rows = Vec::new();
    for it in 0..20 {
        let t = lc.pde_t_max * it as f64 / 19.0;
        let mut worst = 0.0f64;
        for ix in 0..20 {
            let x = -2.0 + 4.0 * ix as f64 / 19.0;
            for is in 0..20 {
                let m = x + 2.0 * is as f64 / 19.0;
                let (dt, _, _, dxx) = lookback_derivatives(LookbackState { t, m, x }, 1.0)?;
                worst = worst.max((dt + 0.5 * dxx).abs());
            }
        }
        rows.push(format!("{t},{worst}"));
    }
    Ok(vec![("lookback_pde".into(), csv_table("t,max_residual", rows))])
}

/// Fejér-pipeline suite: exactness on constants and linear paths, sup-error
/// decay between the smallest and largest gated orders on sine and Brownian
/// fixtures, and stability of the measured uniform bound between order
/// ranges.
pub fn run_fejer(cfg: &RunConfig, report: &mut VerificationReport) -> Result<Vec<Csv>> {
    let fc = &cfg.fejer;
    let grid = Grid::window(1.0, fc.grid_points)?;
    let sup_err = |op: &FejerOperator, eta: &SampledPath| -> Result<f64> {
        let tn = op.apply(eta)?;
        Ok(tn
            .values
            .iter()
            .zip(&eta.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max))
    };
    let op16 = FejerOperator::new(16, 1.0)?;
    for (name, eta) in [
        ("constant", fixtures::constant(grid, 0.7)),
        ("linear", fixtures::linear(grid, -1.3, 0.4)),
    ] {
        report.push(ReportEntry::compare(
            format!("fejer/exact/{name}"),
            sup_err(&op16, &eta)?,
            0.0,
            fc.exactness_tolerance * cfg.tol_scale,
            "cesaro-reconstruction",
        ));
    }

    let mut csvs = Vec::new();
    for (name, eta) in [
        ("sine", fixtures::sine(grid, 2.0, 1.0)),
        ("brownian", fixtures::brownian(grid, 11)),
    ] {
        let mut rows = Vec::new();
        let mut err8 = f64::NAN;
        let mut err64 = f64::NAN;
        for &n in &fc.orders {
            let e = sup_err(&FejerOperator::new(n, 1.0)?, &eta)?;
            if n == 8 {
                err8 = e;
            }
            if n == 64 {
                err64 = e;
            }
            rows.push(format!("{n},{e}"));
        }
        report.push(ReportEntry::observed(
            format!("fejer/error_ratio/{name}"),
            err64 / err8,
            fc.error_ratio,
            err64 < fc.error_ratio * err8,
            "sup-error-n64-over-n8",
        ));
        csvs.push((format!("fejer_error_{name}"), csv_table("n,sup_error", rows)));
    }

    // Measured uniform bound of the operator over a fixture family, split
    // between the lower and upper halves of the order sweep.
    let family = [
        fixtures::sine(grid, 2.0, 1.0),
        fixtures::sine(grid, 5.0, 0.5),
        fixtures::brownian(grid, 11),
        fixtures::brownian(grid, 23),
        SampledPath::from_fn(grid, |x| x * x - 0.3 * x)?,
    ];
    let range_bound = |orders: &[usize]| -> Result<f64> {
        let mut m = 0.0f64;
        for eta in &family {
            for &n in orders {
                let tn = FejerOperator::new(n, 1.0)?.apply(eta)?;
                m = m.max(tn.sup_norm() / eta.sup_norm());
            }
        }
        Ok(m)
    };
    // Cumulative ranges: the bound measured over the low orders must not
    // drift when the sweep is extended to the high orders.
    let m_lo = range_bound(&fc.orders[..fc.orders.len() - 1])?;
    let m_hi = range_bound(&fc.orders)?;
    report.push(ReportEntry::compare(
        "fejer/uniform_bound_drift",
        m_hi,
        m_lo,
        fc.bound_stability * m_lo * cfg.tol_scale,
        "sup-norm-ratio-ranges",
    ));
    Ok(csvs)
}

/// Strong-viscosity convergence suite over the diagonal schedule.
pub fn run_sv(cfg: &RunConfig, report: &mut VerificationReport) -> Result<Vec<Csv>> {
    let sc = &cfg.sv;
    let eta = zero_window(sc.n_steps + 1)?;
    let g = PathFunctional::sup().with_growth(1.0, 1.0);
    let reference = (2.0 / std::f64::consts::PI).sqrt();
    let mc_cfg = sim_cfg(sc.n_steps, sc.n_paths, cfg.seed);
    let (rows, mut entry) = sv_convergence(
        &g,
        0.0,
        &eta,
        &sc.schedule,
        reference,
        &mc_cfg,
        sc.n_mc,
        sc.tolerance * cfg.tol_scale,
    )?;
    entry.name = "sv/diagonal_schedule".into();
    report.push(entry);
    for r in &rows {
        report.push(ReportEntry::compare(
            format!("sv/consistency/n{}", r.n),
            r.value,
            r.mc_value,
            sc.tolerance * cfg.tol_scale,
            "gaussian-vs-path-mc",
        ));
    }
    let csv_rows = rows.iter().map(|r| {
        format!(
            "{},{},{},{},{},{},{},{}",
            r.n, r.eps, r.k, r.value, r.reference, r.raw_gap, r.mc_value, r.consistency_gap
        )
    });
    Ok(vec![(
        "sv_convergence".into(),
        csv_table("n,eps,k,value,reference,raw_gap,mc_value,consistency_gap", csv_rows),
    )])
}

fn brownian_coeffs() -> SDECoeffs {
    SDECoeffs::new(|_, _| 0.0, |_, _| 1.0, 1.0)
}

/// BSDE suite: Feynman–Kac exactness, the discounting oracle, comparison
/// checks, a-priori constant stability, and the two convergence diagnostics.
pub fn run_bsde(cfg: &RunConfig, report: &mut VerificationReport) -> Result<Vec<Csv>> {
    let bc = &cfg.bsde;
    let sim = sim_cfg(bc.n_steps, bc.n_paths, cfg.seed);
    let mut csvs = Vec::new();

    // Zero-generator Feynman–Kac: the backward value at the root equals the
    // Monte Carlo mean of the terminal payoff computed from the same samples.
    let fk = BSDEProblem::new(
        brownian_coeffs(),
        |_, _, _, _| 0.0,
        0.0,
        |x: f64| x * x - 1.0,
        (1.0, 2.0),
        0.5,
    )?;
    let sol = bsde_solve(&fk, &BSDEFlavor::Exact, &sim, bc.degree)?;
    let term_mean = sol
        .paths
        .states
        .iter()
        .map(|r| (fk.terminal)(r[bc.n_steps]))
        .sum::<f64>()
        / bc.n_paths as f64;
    report.push(ReportEntry::compare(
        "bsde/feynman_kac_gap",
        sol.y0(),
        term_mean,
        bc.fk_tolerance * cfg.tol_scale,
        "same-sample-mc",
    ));

    // Linear generator: Y_t = e^{−r(T−t)} with g ≡ 1.
    let r = bc.rate;
    let discount = BSDEProblem::new(
        brownian_coeffs(),
        move |_, _, y: f64, _| -r * y,
        r,
        |_| 1.0,
        (1.0, 0.0),
        0.0,
    )?;
    let dsol = bsde_solve(&discount, &BSDEFlavor::Exact, &sim, bc.degree)?;
    let exact0 = (-r * 1.0f64).exp();
    report.push(ReportEntry::compare(
        "bsde/discount_value",
        dsol.y0(),
        exact0,
        bc.discount_rel_tolerance * exact0 * cfg.tol_scale,
        "linear-ode-oracle",
    ));
    let rows = dsol.times.iter().enumerate().map(|(i, t)| {
        let (m, _) = dsol.y_mean_se(i);
        format!("{t},{m},{}", (-r * (1.0 - t)).exp())
    });
    csvs.push(("bsde_discount".into(), csv_table("t,y_mean,exact", rows)));

    // Comparison: shifted terminals and a shifted generator.
    let delta = 0.25;
    let lo = BSDEProblem::new(
        brownian_coeffs(),
        |_, _, _, _| 0.0,
        0.0,
        move |x: f64| x - delta,
        (1.0, 1.0),
        0.0,
    )?;
    let hi = BSDEProblem::new(
        brownian_coeffs(),
        |_, _, _, _| 0.0,
        0.0,
        move |x: f64| x + delta,
        (1.0, 1.0),
        0.0,
    )?;
    let sol_lo = bsde_solve(&lo, &BSDEFlavor::Exact, &sim, bc.degree)?;
    let sol_hi = bsde_solve(&hi, &BSDEFlavor::Exact, &sim, bc.degree)?;
    let mut entry = comparison_check(&sol_lo, &sol_hi)?;
    entry.name = "bsde/comparison_terminal_shift".into();
    report.push(entry);

    let shift = 0.3;
    let gen_lo = BSDEProblem::new(
        brownian_coeffs(),
        move |_, _, _, _| -shift,
        0.0,
        |x| x,
        (1.0, 1.0),
        0.0,
    )?;
    let base = BSDEProblem::new(brownian_coeffs(), |_, _, _, _| 0.0, 0.0, |x| x, (1.0, 1.0), 0.0)?;
    let sol_gen_lo = bsde_solve(&gen_lo, &BSDEFlavor::Exact, &sim, bc.degree)?;
    let sol_base = bsde_solve(&base, &BSDEFlavor::Exact, &sim, bc.degree)?;
    let mut entry = comparison_check(&sol_gen_lo, &sol_base)?;
    entry.name = "bsde/comparison_generator_shift".into();
    report.push(entry);

    // A-priori constant over the scenario family.
    let terminals: Vec<(&str, Arc<dyn Fn(f64) -> f64 + Send + Sync>)> = vec![
        ("id", Arc::new(|x: f64| x)),
        ("double", Arc::new(|x: f64| 2.0 * x)),
        ("sin_plus", Arc::new(|x: f64| x.sin() + x)),
        ("cos_plus", Arc::new(|x: f64| x.cos() + 1.5 * x)),
        ("tanh_plus", Arc::new(|x: f64| x.tanh() + 0.5 * x)),
    ];
    let mut constants = Vec::new();
    for (name, g) in terminals {
        let p = BSDEProblem {
            coeffs: brownian_coeffs(),
            generator: Arc::new(|_, _, _, _| 0.0),
            generator_lipschitz: 0.0,
            terminal: g,
            growth_bound: (2.0, 1.0),
            x0: 0.0,
        };
        let s = bsde_solve(&p, &BSDEFlavor::Exact, &sim, bc.degree)?;
        let mut e = apriori_check(&s, &p, &sim)?;
        e.name = format!("bsde/apriori/{name}");
        constants.push(e.value);
        report.push(e);
    }
    let mut entry = apriori_stability(&constants)?;
    entry.name = "bsde/apriori_stability".into();
    report.push(entry);

    // Strong convergence of mollified forward dynamics (CRN).
    let kinked = SDECoeffs::new(|_, x: f64| x.abs(), |_, _| 1.0, 2.0);
    let conv_cfg = sim_cfg(64, 1000, cfg.seed.wrapping_add(1));
    let (table, mut entry) =
        sde_convergence(&kinked, 0.0, 0.0, &bc.convergence_orders, &conv_cfg)?;
    entry.name = "bsde/sde_convergence".into();
    report.push(entry);
    csvs.push((
        "bsde_sde_convergence".into(),
        csv_table("n,sup_l2_error", table.iter().map(|(n, v)| format!("{n},{v}"))),
    ));

    // Driver convergence against a high-order mollified reference (CRN).
    let kink_problem = BSDEProblem::new(
        brownian_coeffs(),
        |_, _, _, _| 0.0,
        0.0,
        |x: f64| x.abs(),
        (1.0, 1.0),
        0.0,
    )?;
    let lim_cfg = sim_cfg(32, 2000, cfg.seed.wrapping_add(2));
    let (table, mut entry) = limit_diagnostic(
        &kink_problem,
        &bc.convergence_orders,
        bc.limit_reference_order,
        bc.limit_exponent,
        &lim_cfg,
        bc.degree,
    )?;
    entry.name = "bsde/limit_diagnostic".into();
    report.push(entry);
    csvs.push((
        "bsde_limit_diagnostic".into(),
        csv_table("n,z_lq_error", table.iter().map(|(n, v)| format!("{n},{v}"))),
    ));
    Ok(csvs)
}

/// Dispatch table used by the orchestrator (suite name → runner).
pub fn run_suite(
    suite: crate::config::Suite,
    cfg: &RunConfig,
    report: &mut VerificationReport,
) -> Result<Vec<Csv>> {
    use crate::config::Suite::*;
    match suite {
        Regint => run_regint(cfg, report),
        ItoVerify => run_ito(cfg, report),
        HeatSolve => run_heat(cfg, report),
        Lookback => run_lookback(cfg, report),
        Fejer => run_fejer(cfg, report),
        SvConverge => run_sv(cfg, report),
        Bsde => run_bsde(cfg, report),
        All => {
            let mut csvs = Vec::new();
            for s in [Regint, ItoVerify, HeatSolve, Lookback, Fejer, SvConverge, Bsde] {
                csvs.extend(run_suite(s, cfg, report)?);
            }
            Ok(csvs)
        }
    }
}
