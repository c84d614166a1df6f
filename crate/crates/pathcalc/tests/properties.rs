//! Property-based invariants: serialization round-trips, operator linearity,
//! covariation symmetry, Cesàro contraction, and closed-form identities that
//! must hold for arbitrary inputs, not just the curated fixtures.

use proptest::prelude::*;

use pathcalc::approx::{lambda_op, FejerOperator, Mollifier};
use pathcalc::ppde::{lookback_derivatives, lookback_value, LookbackState};
use pathcalc::regcalc::covariation_approximant;
use pathcalc::report::{ReportEntry, VerificationReport};
use pathcalc::{Grid, SampledPath};

const POINTS: usize = 65;

fn grid() -> Grid {
    Grid::window(1.0, POINTS).unwrap()
}

prop_compose! {
    /// An arbitrary piecewise-linear path on the unit window with values in
    /// a moderate range.
    fn pl_path()(values in prop::collection::vec(-3.0f64..3.0, POINTS)) -> SampledPath {
        SampledPath::new(grid(), values).unwrap()
    }
}

prop_compose! {
    fn finite_entry()(
        name in "[a-z_/]{1,16}",
        value in -1e6f64..1e6,
        reference in -1e6f64..1e6,
        tolerance in 1e-12f64..1.0,
        method in "[a-z-]{1,12}",
    ) -> ReportEntry {
        ReportEntry::compare(name, value, reference, tolerance, method)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn report_json_round_trips(entries in prop::collection::vec(finite_entry(), 0..8), seed in any::<u64>()) {
        let mut report = VerificationReport::new("prop", seed, "cfg");
        for e in entries {
            report.push(e);
        }
        let json = serde_json::to_string(&report).unwrap();
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.entries.len(), report.entries.len());
        for (a, b) in back.entries.iter().zip(&report.entries) {
            prop_assert_eq!(&a.name, &b.name);
            prop_assert_eq!(a.value, b.value);
            prop_assert_eq!(a.gap, b.gap);
            prop_assert_eq!(a.pass, b.pass);
        }
        // The hash is a pure function of the canonical content.
        prop_assert_eq!(back.content_hash(), report.content_hash());
    }

    #[test]
    fn fejer_operator_is_linear(a in pl_path(), b in pl_path(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0, n in 1usize..24) {
        let op = FejerOperator::new(n, 1.0).unwrap();
        let combo = SampledPath::new(
            grid(),
            a.values.iter().zip(&b.values).map(|(x, y)| alpha * x + beta * y).collect(),
        ).unwrap();
        let ta = op.apply(&a).unwrap();
        let tb = op.apply(&b).unwrap();
        let tc = op.apply(&combo).unwrap();
        for j in 0..POINTS {
            let lin = alpha * ta.values[j] + beta * tb.values[j];
            prop_assert!((tc.values[j] - lin).abs() < 1e-9, "index {}: {} vs {}", j, tc.values[j], lin);
        }
    }

    #[test]
    fn fejer_cesaro_part_contracts(eta in pl_path(), n in 1usize..32) {
        // ‖σ_n(η − Λη)‖∞ ≤ ‖η − Λη‖∞: the damped reconstruction of the
        // periodized part never overshoots it.
        let lam = lambda_op(&eta).unwrap();
        let zeta_sup = eta
            .values
            .iter()
            .zip(&lam.values)
            .map(|(x, l)| (x - l).abs())
            .fold(0.0f64, f64::max);
        let tn = FejerOperator::new(n, 1.0).unwrap().apply(&eta).unwrap();
        let sigma_sup = tn
            .values
            .iter()
            .zip(&lam.values)
            .map(|(x, l)| (x - l).abs())
            .fold(0.0f64, f64::max);
        prop_assert!(sigma_sup <= zeta_sup * (1.0 + 1e-10) + 1e-12, "{} vs {}", sigma_sup, zeta_sup);
    }

    #[test]
    fn covariation_approximant_is_symmetric(f in pl_path(), g in pl_path(), eps_cells in 2u32..16) {
        let eps = eps_cells as f64 * grid().spacing();
        let nq = 4 * POINTS;
        let fg = covariation_approximant(&f, &g, -1.0, eps, nq);
        let gf = covariation_approximant(&g, &f, -1.0, eps, nq);
        prop_assert!((fg - gf).abs() <= 1e-12 * (1.0 + fg.abs()), "{} vs {}", fg, gf);
    }

    #[test]
    fn mollified_endpoint_is_exact_on_constants(c in -5.0f64..5.0, eps in 0.01f64..1.0) {
        let moll = Mollifier::new(eps, 1.0).unwrap();
        let eta = SampledPath::new(grid(), vec![c; POINTS]).unwrap();
        prop_assert!((moll.endpoint(&eta) - c).abs() < 1e-8);
    }

    #[test]
    fn lookback_value_is_monotone_and_solves_the_pde(
        t in 0.0f64..0.95,
        x in -2.0f64..2.0,
        dm in 0.01f64..1.5,
        bump in 0.001f64..0.5,
    ) {
        let m = x + dm;
        let v = lookback_value(LookbackState { t, m, x }, 1.0);
        let v_m = lookback_value(LookbackState { t, m: m + bump, x }, 1.0);
        let v_x = lookback_value(LookbackState { t, m, x: x + bump }, 1.0);
        prop_assert!(v_m >= v - 1e-12, "not monotone in m");
        prop_assert!(v_x >= v - 1e-12, "not monotone in x");
        let (dt, _, _, dxx) = lookback_derivatives(LookbackState { t, m, x }, 1.0).unwrap();
        prop_assert!((dt + 0.5 * dxx).abs() <= 1e-10);
    }

    #[test]
    fn sampled_path_interpolation_round_trips(eta in pl_path()) {
        for (x, &v) in eta.grid.points().zip(&eta.values) {
            prop_assert!((eta.continuous_value(x) - v).abs() < 1e-12);
        }
    }
}
