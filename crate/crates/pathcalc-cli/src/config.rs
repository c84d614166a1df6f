//! Run configuration: TOML file + flag overrides, with a reproducible hash.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// The verification suites the harness knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum Suite {
    Regint,
    ItoVerify,
    HeatSolve,
    Lookback,
    Fejer,
    SvConverge,
    Bsde,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Regint => "regint",
            Suite::ItoVerify => "ito-verify",
            Suite::HeatSolve => "heat-solve",
            Suite::Lookback => "lookback",
            Suite::Fejer => "fejer",
            Suite::SvConverge => "sv-converge",
            Suite::Bsde => "bsde",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegintCfg {
    /// Piecewise-linear fixture names checked by the integration-by-parts
    /// identities (see the fixtures registry).
    pub fixtures: Vec<String>,
    pub grid_points: usize,
    pub qv_paths: usize,
    pub qv_steps: usize,
    pub qv_eps: f64,
    pub ibp_tolerance: f64,
    pub qv_tolerance: f64,
}

impl Default for RegintCfg {
    fn default() -> Self {
        RegintCfg {
            fixtures: vec!["constant".into(), "linear".into(), "sine".into()],
            grid_points: 4097,
            qv_paths: 100,
            qv_steps: 1 << 14,
            qv_eps: 1.0 / 256.0,
            ibp_tolerance: 1e-3,
            qv_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ItoCfg {
    pub n_seeds: u64,
    pub base_steps: usize,
    pub base_eps: f64,
    pub window_points: usize,
    /// Expected residual-halving factor and its allowed deviation.
    pub halving_center: f64,
    pub halving_tolerance: f64,
}

impl Default for ItoCfg {
    fn default() -> Self {
        ItoCfg {
            n_seeds: 20,
            base_steps: 1 << 12,
            base_eps: 1.0 / 64.0,
            window_points: 33,
            halving_center: 2.0,
            halving_tolerance: 0.6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatCfg {
    pub gauss_hermite_order: usize,
    pub t_eval: f64,
    pub window_points: usize,
    pub tolerance: f64,
}

impl Default for HeatCfg {
    fn default() -> Self {
        HeatCfg { gauss_hermite_order: 64, t_eval: 0.3, window_points: 257, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LookbackCfg {
    pub n_paths: usize,
    pub n_steps: usize,
    /// Additive bias allowance for discrete monitoring of the running max.
    pub bias_allowance: f64,
    pub pde_grid: usize,
    pub pde_t_max: f64,
    pub pde_tolerance: f64,
}

impl Default for LookbackCfg {
    fn default() -> Self {
        LookbackCfg {
            n_paths: 100_000,
            n_steps: 1 << 12,
            bias_allowance: 0.01,
            pde_grid: 50,
            pde_t_max: 0.99,
            pde_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FejerCfg {
    pub grid_points: usize,
    pub orders: Vec<usize>,
    pub exactness_tolerance: f64,
    /// `sup` error at the largest order must be below this fraction of the
    /// error at the smallest gated order.
    pub error_ratio: f64,
    pub bound_stability: f64,
}

impl Default for FejerCfg {
    fn default() -> Self {
        FejerCfg {
            grid_points: 1025,
            orders: vec![4, 8, 16, 32, 64, 128],
            exactness_tolerance: 1e-12,
            error_ratio: 0.5,
            bound_stability: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvCfg {
    pub schedule: Vec<usize>,
    pub n_steps: usize,
    pub n_paths: usize,
    pub n_mc: usize,
    pub tolerance: f64,
}

impl Default for SvCfg {
    fn default() -> Self {
        SvCfg {
            schedule: vec![8, 16, 32, 64],
            n_steps: 1024,
            n_paths: 20_000,
            n_mc: 40_000,
            tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BsdeCfg {
    pub n_paths: usize,
    pub n_steps: usize,
    pub degree: usize,
    pub rate: f64,
    pub fk_tolerance: f64,
    pub discount_rel_tolerance: f64,
    pub convergence_orders: Vec<u32>,
    pub limit_reference_order: u32,
    pub limit_exponent: f64,
}

impl Default for BsdeCfg {
    fn default() -> Self {
        BsdeCfg {
            n_paths: 10_000,
            n_steps: 50,
            degree: 4,
            rate: 0.1,
            fk_tolerance: 1e-12,
            discount_rel_tolerance: 0.01,
            convergence_orders: vec![4, 16, 64],
            limit_reference_order: 256,
            limit_exponent: 1.5,
        }
    }
}

/// Full run configuration. Every field has a default; a TOML file overrides
/// the defaults and command-line flags override the file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub suite: Option<Suite>,
    pub seed: u64,
    pub out: PathBuf,
    pub tol_scale: f64,
    /// Worker threads; 0 keeps the library default.
    pub workers: usize,
    pub regint: RegintCfg,
    pub ito: ItoCfg,
    pub heat: HeatCfg,
    pub lookback: LookbackCfg,
    pub fejer: FejerCfg,
    pub sv: SvCfg,
    pub bsde: BsdeCfg,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suite: None,
            seed: 12345,
            out: PathBuf::from("out"),
            tol_scale: 1.0,
            workers: 0,
            regint: RegintCfg::default(),
            ito: ItoCfg::default(),
            heat: HeatCfg::default(),
            lookback: LookbackCfg::default(),
            fejer: FejerCfg::default(),
            sv: SvCfg::default(),
            bsde: BsdeCfg::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tol_scale > 0.0) {
            return Err("tol-scale must be positive".into());
        }
        let positive = [
            ("regint.ibp_tolerance", self.regint.ibp_tolerance),
            ("regint.qv_tolerance", self.regint.qv_tolerance),
            ("heat.tolerance", self.heat.tolerance),
            ("lookback.pde_tolerance", self.lookback.pde_tolerance),
            ("fejer.exactness_tolerance", self.fejer.exactness_tolerance),
            ("sv.tolerance", self.sv.tolerance),
            ("bsde.fk_tolerance", self.bsde.fk_tolerance),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(format!("{name} must be positive"));
            }
        }
        Ok(())
    }

    /// Hash of the fully resolved configuration (defaults + file + flags):
    /// two runs with equal hashes execute identical work. The worker count
    /// and output directory are run-environment knobs that cannot change any
    /// computed value, so they are excluded — re-running at a different
    /// parallelism must reproduce the same report hash.
    pub fn content_hash(&self) -> String {
        let mut canon = self.clone();
        canon.workers = 0;
        canon.out = PathBuf::new();
        let json = serde_json::to_string(&canon).expect("config serialization cannot fail");
        pathcalc::report::sha256_hex(&json)
    }
}
