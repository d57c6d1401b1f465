//! Experiment configuration: a TOML file, defaults for every key, and
//! validation that reports field paths.
//!
//! Rates may be given as bare numbers (rad/μs) or unit strings such as
//! `"10 MHz"`; see [`crate::quantity`].

use std::fmt;
use std::path::PathBuf;

use blockade_core::error_budget::log_grid;
use blockade_core::hilbert::{BasisMode, SplittingConvention, DEFAULT_PAIR_RESOLVED_LIMIT};
use serde::{Deserialize, Serialize};

use crate::quantity::{Frequency, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    SplittingStats,
    Rabi,
    Fock,
    Superpose,
    Gate,
    ErrorBudget,
    OracleCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::SplittingStats,
        ExperimentKind::Rabi,
        ExperimentKind::Fock,
        ExperimentKind::Superpose,
        ExperimentKind::Gate,
        ExperimentKind::ErrorBudget,
        ExperimentKind::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SplittingStats => "splitting-stats",
            ExperimentKind::Rabi => "rabi",
            ExperimentKind::Fock => "fock",
            ExperimentKind::Superpose => "superpose",
            ExperimentKind::Gate => "gate",
            ExperimentKind::ErrorBudget => "error-budget",
            ExperimentKind::OracleCheck => "oracle-check",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Schedule file run instead of the compiled protocol (rabi, fock,
    /// superpose, gate).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<PathBuf>,
    pub regime: RegimeConfig,
    pub basis: BasisConfig,
    pub splitting: SplittingConfig,
    pub rabi: RabiConfig,
    pub fock: FockConfig,
    pub superpose: SuperposeConfig,
    pub error_budget: ErrorBudgetConfig,
    pub oracle: OracleConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Rabi.name().into(),
            seed: 0,
            out_dir: PathBuf::from("results"),
            schedule: None,
            regime: RegimeConfig::default(),
            basis: BasisConfig::default(),
            splitting: SplittingConfig::default(),
            rabi: RabiConfig::default(),
            fock: FockConfig::default(),
            superpose: SuperposeConfig::default(),
            error_budget: ErrorBudgetConfig::default(),
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeConfig {
    pub n_atoms: usize,
    pub omega: Frequency,
    pub omega_q: Frequency,
    pub omega_plus: Frequency,
    pub omega_minus: Frequency,
    /// Volume-scale pair splitting. Absent means the perfect-blockade limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_bar: Option<Frequency>,
    pub gamma_r: Frequency,
    pub convention: String,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        RegimeConfig {
            n_atoms: 10,
            omega: Frequency(1.0),
            omega_q: Frequency(1.0),
            omega_plus: Frequency(1.0),
            omega_minus: Frequency(1.0),
            kappa_bar: None,
            gamma_r: Frequency(0.0),
            convention: SplittingConvention::default().name().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisConfig {
    /// `symmetric` or `pair-resolved`.
    pub mode: String,
    /// Cap on atoms outside `g`; chosen per experiment when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig { mode: "symmetric".into(), n_max: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplittingConfig {
    pub configs: usize,
    pub atoms: usize,
    /// Box edge lengths in μm.
    #[serde(rename = "box")]
    pub box_dims: [f64; 3],
    /// C₃ in rad/μs·μm³.
    pub c3: f64,
    /// `min-pair` or `all-pairs`.
    pub statistic: String,
    pub bins: usize,
    pub window: [f64; 2],
    /// Histogram CSV path; defaults to `<out_dir>/splitting_histogram.csv`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for SplittingConfig {
    fn default() -> Self {
        SplittingConfig {
            configs: 30_000,
            atoms: 2,
            box_dims: [10.0, 10.0, 10.0],
            c3: 1000.0,
            statistic: "min-pair".into(),
            bins: 40,
            window: [0.2, 20.0],
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiConfig {
    /// Length of the drive in collective Rabi periods.
    pub periods: f64,
    pub samples_per_period: usize,
}

impl Default for RabiConfig {
    fn default() -> Self {
        RabiConfig { periods: 4.0, samples_per_period: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FockConfig {
    pub n_target: usize,
}

impl Default for FockConfig {
    fn default() -> Self {
        FockConfig { n_target: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuperposeConfig {
    /// `[re, im]` of each `α_m`, starting at `m = 0`.
    pub amplitudes: Vec<[f64; 2]>,
    /// Rescale the amplitudes to unit norm instead of requiring it.
    pub normalize: bool,
}

impl Default for SuperposeConfig {
    fn default() -> Self {
        SuperposeConfig { amplitudes: vec![[1.0, 0.0]; 3], normalize: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErrorBudgetConfig {
    /// Blockade strengths `κ̄T` of the leakage scan.
    pub kappa_t: Vec<f64>,
    /// Configurations averaged for the geometry factor.
    pub geometry_configs: usize,
    /// Operating-point check: `κ̄` values in mega-units, pulse length and
    /// decay rate, each evaluated under both unit readings.
    pub check_kappa_mega: Vec<f64>,
    pub check_t_ns: f64,
    pub check_gamma_kilo: f64,
}

impl Default for ErrorBudgetConfig {
    fn default() -> Self {
        ErrorBudgetConfig {
            kappa_t: log_grid(10.0, 1000.0, 9).into_iter().map(round_grid).collect(),
            geometry_configs: 200,
            check_kappa_mega: vec![10.0, 30.0, 100.0],
            check_t_ns: 100.0,
            check_gamma_kilo: 10.0,
        }
    }
}

/// Keeps default grid values short in dumped configs.
fn round_grid(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub atoms: Vec<usize>,
    /// Uniform pair coupling of the comparison.
    pub kappa: Frequency,
    pub sample_dt: Time,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { atoms: vec![3, 4], kappa: Frequency(1.7), sample_dt: Time(0.05) }
    }
}

/// One reason a configuration cannot run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    pub fn kind(&self) -> Option<ExperimentKind> {
        ExperimentKind::from_name(&self.experiment)
    }

    pub fn mode(&self) -> BasisMode {
        if self.basis.mode == "pair-resolved" {
            BasisMode::PairResolved
        } else {
            BasisMode::Symmetric
        }
    }

    pub fn convention(&self) -> SplittingConvention {
        SplittingConvention::from_name(&self.regime.convention).unwrap_or_default()
    }

    /// Empty exactly when the configuration is runnable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut bad = |path: &str, message: String| v.push(Violation { path: path.into(), message });
        let kind = self.kind();
        if kind.is_none() {
            let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
            bad("experiment", format!("unknown experiment '{}', expected one of {}", self.experiment, names.join(", ")));
        }

        let r = &self.regime;
        if r.n_atoms < 1 {
            bad("regime.n_atoms", "must be at least 1".into());
        }
        for (path, f) in [
            ("regime.omega", r.omega),
            ("regime.omega_q", r.omega_q),
            ("regime.omega_plus", r.omega_plus),
            ("regime.omega_minus", r.omega_minus),
        ] {
            if !(f.0.is_finite() && f.0 > 0.0) {
                bad(path, format!("must be positive, got {}", f.0));
            }
        }
        if let Some(k) = r.kappa_bar {
            if !(k.0.is_finite() && k.0 > 0.0) {
                bad("regime.kappa_bar", format!("must be positive, got {}", k.0));
            }
        }
        if !(r.gamma_r.0.is_finite() && r.gamma_r.0 >= 0.0) {
            bad("regime.gamma_r", format!("must be non-negative, got {}", r.gamma_r.0));
        }
        if SplittingConvention::from_name(&r.convention).is_none() {
            bad("regime.convention", format!("unknown convention '{}', expected half-splitting or literal-pair", r.convention));
        }

        let b = &self.basis;
        if b.mode != "symmetric" && b.mode != "pair-resolved" {
            bad("basis.mode", format!("unknown mode '{}', expected symmetric or pair-resolved", b.mode));
        }
        if let Some(n_max) = b.n_max {
            if n_max > r.n_atoms {
                bad("basis.n_max", format!("basis.n_max ({n_max}) exceeds regime.n_atoms ({})", r.n_atoms));
            }
        }
        let pair_resolved = b.mode == "pair-resolved";
        let uses_regime_basis = matches!(kind, Some(ExperimentKind::Rabi | ExperimentKind::Fock | ExperimentKind::Superpose | ExperimentKind::Gate));
        if pair_resolved && uses_regime_basis && r.n_atoms > DEFAULT_PAIR_RESOLVED_LIMIT {
            bad("regime.n_atoms", format!("pair-resolved mode supports at most {DEFAULT_PAIR_RESOLVED_LIMIT} atoms"));
        }

        match kind {
            Some(ExperimentKind::SplittingStats) => {
                let s = &self.splitting;
                if s.configs < 1 {
                    bad("splitting.configs", "must be at least 1".into());
                }
                if s.atoms < 2 {
                    bad("splitting.atoms", "must be at least 2".into());
                }
                if s.box_dims.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    bad("splitting.box", "edge lengths must be positive".into());
                }
                if !(s.c3.is_finite() && s.c3 > 0.0) {
                    bad("splitting.c3", "must be positive".into());
                }
                if s.statistic != "min-pair" && s.statistic != "all-pairs" {
                    bad("splitting.statistic", format!("unknown statistic '{}', expected min-pair or all-pairs", s.statistic));
                }
                if s.bins < 1 {
                    bad("splitting.bins", "must be at least 1".into());
                }
                if !(s.window[0] > 0.0 && s.window[1] > s.window[0] && s.window[1].is_finite()) {
                    bad("splitting.window", "needs 0 < lo < hi".into());
                }
            }
            Some(ExperimentKind::Rabi) => {
                if r.n_atoms < 1 {
                    // already reported
                } else if !(self.rabi.periods.is_finite() && self.rabi.periods > 0.0) {
                    bad("rabi.periods", "must be positive".into());
                }
                if self.rabi.samples_per_period < 4 {
                    bad("rabi.samples_per_period", "must be at least 4".into());
                }
            }
            Some(ExperimentKind::Fock) => {
                if self.fock.n_target > r.n_atoms {
                    bad("fock.n_target", format!("fock.n_target ({}) exceeds regime.n_atoms ({})", self.fock.n_target, r.n_atoms));
                }
            }
            Some(ExperimentKind::Superpose) => {
                let a = &self.superpose.amplitudes;
                let norm2: f64 = a.iter().map(|z| z[0] * z[0] + z[1] * z[1]).sum();
                if a.is_empty() || a.iter().flatten().any(|x| !x.is_finite()) {
                    bad("superpose.amplitudes", "need at least one finite amplitude".into());
                } else if !(norm2 > 0.0) {
                    bad("superpose.amplitudes", "are all zero".into());
                } else if !self.superpose.normalize && (norm2 - 1.0).abs() > 1e-9 {
                    bad("superpose.amplitudes", format!("squared norm is {norm2}; normalize or set superpose.normalize = true"));
                }
                if a.len().saturating_sub(1) > r.n_atoms {
                    bad("superpose.amplitudes", format!("{} quanta exceed regime.n_atoms ({})", a.len() - 1, r.n_atoms));
                }
            }
            Some(ExperimentKind::Gate) => {
                if r.n_atoms < 2 {
                    bad("regime.n_atoms", "the gate needs at least 2 atoms".into());
                }
            }
            Some(ExperimentKind::ErrorBudget) => {
                let e = &self.error_budget;
                if e.kappa_t.len() < 2 {
                    bad("error_budget.kappa_t", "needs at least two grid values".into());
                }
                if e.kappa_t.iter().any(|x| !(*x >= 5.0 && x.is_finite())) {
                    bad("error_budget.kappa_t", "grid values must be at least 5".into());
                }
                if r.n_atoms < 2 {
                    bad("regime.n_atoms", "the leakage scan needs at least 2 atoms".into());
                }
                if e.geometry_configs < 1 {
                    bad("error_budget.geometry_configs", "must be at least 1".into());
                }
                if self.splitting.box_dims.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    bad("splitting.box", "edge lengths must be positive".into());
                }
                if !(self.splitting.c3.is_finite() && self.splitting.c3 > 0.0) {
                    bad("splitting.c3", "must be positive".into());
                }
                if !(e.check_t_ns > 0.0 && e.check_gamma_kilo >= 0.0) || e.check_kappa_mega.iter().any(|k| !(*k > 0.0)) {
                    bad("error_budget", "operating-point check values must be positive".into());
                }
            }
            Some(ExperimentKind::OracleCheck) => {
                let o = &self.oracle;
                if o.atoms.is_empty() || o.atoms.iter().any(|&n| !(2..=DEFAULT_PAIR_RESOLVED_LIMIT).contains(&n)) {
                    bad("oracle.atoms", format!("atom numbers must lie in 2..={DEFAULT_PAIR_RESOLVED_LIMIT}"));
                }
                if !(o.kappa.0.is_finite() && o.kappa.0 >= 0.0) {
                    bad("oracle.kappa", "must be non-negative".into());
                }
                if !(o.sample_dt.0.is_finite() && o.sample_dt.0 > 0.0) {
                    bad("oracle.sample_dt", "must be positive".into());
                }
            }
            None => {}
        }
        v
    }
}
