//! Scenario configs, built-in presets, CSV/SVG emission and parameter sweeps.
//!
//! Config files are flat `key = value` text with `#` comments. Complex
//! values are written `re,im`.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::cat::{purity, CatState};
use crate::oracle::{discretize_bath, oracle_amplitude, OracleError, SamplingScheme};
use crate::plot::Plot;
use crate::rates::{extract_rates, CoefficientSeries, DEFAULT_EPSILON_U};
use crate::solver::{default_dt, solve_u, AmplitudeSeries, SolverError, TimeGrid};
use crate::spectral::{
    markovian_coefficients, Kernel, QuadratureConfig, SpectralError, SpectralParams,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("unknown preset `{0}` (expected fig1, fig2 or fig3)")]
    UnknownPreset(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Grid(#[from] SolverError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// Process exit code: 2 for usage, config and I/O errors, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Solver(SolverError::Unstable { .. }) => 3,
            RunError::Oracle(OracleError::NormDrift { .. }) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutputKind {
    Amplitude,
    Rates,
    Purity,
}

impl OutputKind {
    pub const ALL: [OutputKind; 3] = [OutputKind::Amplitude, OutputKind::Rates, OutputKind::Purity];

    fn name(self) -> &'static str {
        match self {
            OutputKind::Amplitude => "amplitude",
            OutputKind::Rates => "rates",
            OutputKind::Purity => "purity",
        }
    }
}

impl FromStr for OutputKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        OutputKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown output `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    ClosedForm,
    Quadrature,
}

/// Optional discrete-bath comparison run alongside the scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub modes: usize,
    /// Defaults to `30 ωc` when absent.
    pub omega_max: Option<f64>,
    pub scheme: SamplingScheme,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub spectral: SpectralParams,
    pub t_max: f64,
    /// Step; [`default_dt`] when absent.
    pub dt: Option<f64>,
    pub beta0: Complex64,
    pub epsilon_u: f64,
    pub outputs: BTreeSet<OutputKind>,
    pub kernel: KernelMode,
    pub oracle: Option<OracleSettings>,
    pub seed_label: String,
}

impl ScenarioConfig {
    pub fn new(spectral: SpectralParams, t_max: f64) -> Self {
        Self {
            spectral,
            t_max,
            dt: None,
            beta0: Complex64::new(1.0, 0.0),
            epsilon_u: DEFAULT_EPSILON_U,
            outputs: OutputKind::ALL.into_iter().collect(),
            kernel: KernelMode::ClosedForm,
            oracle: None,
            seed_label: String::new(),
        }
    }

    /// The three built-in regimes: `fig1` weak coupling and short memory,
    /// `fig2` strong coupling with `ωc = ω₀`, `fig3` long memory.
    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        let (eta, omega_c, t_max, dt) = match name {
            "fig1" => (0.1, 50.0, 20.0, 2e-4),
            "fig2" => (5.0, 1.0, 50.0, 5e-4),
            "fig3" => (5.0, 0.2, 100.0, 1e-3),
            other => return Err(ConfigError::UnknownPreset(other.into())),
        };
        let mut c = Self::new(SpectralParams::new(eta, omega_c, 1.0)?, t_max);
        c.dt = Some(dt);
        c.seed_label = name.into();
        Ok(c)
    }

    pub fn grid(&self) -> Result<TimeGrid, SolverError> {
        TimeGrid::new(
            self.t_max,
            self.dt.unwrap_or_else(|| default_dt(&self.spectral)),
        )
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut seen = BTreeSet::new();
        let mut eta = None;
        let mut omega_c = None;
        let mut n = 1.0;
        let mut omega_0 = 1.0;
        let mut t_max = None;
        let mut dt = None;
        let mut beta0 = Complex64::new(1.0, 0.0);
        let mut epsilon_u = DEFAULT_EPSILON_U;
        let mut outputs: BTreeSet<OutputKind> = OutputKind::ALL.into_iter().collect();
        let mut kernel = KernelMode::ClosedForm;
        let mut oracle_modes = None;
        let mut oracle_omega_max = None;
        let mut oracle_scheme = SamplingScheme::MidpointUniform;
        let mut seed_label = String::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: raw.trim().into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |reason: String| ConfigError::BadValue {
                line,
                key: key.into(),
                reason,
            };
            let real = || value.parse::<f64>().map_err(|e| bad(e.to_string()));
            match key {
                "eta" => eta = Some(real()?),
                "omega_c" => omega_c = Some(real()?),
                "n" => n = real()?,
                "omega_0" => omega_0 = real()?,
                "t_max" => t_max = Some(real()?),
                "dt" => dt = Some(real()?),
                "beta0" => beta0 = parse_complex(value).map_err(bad)?,
                "epsilon_u" => {
                    epsilon_u = real()?;
                    if !(epsilon_u > 0.0 && epsilon_u.is_finite()) {
                        return Err(bad("must be positive".into()));
                    }
                }
                "outputs" => {
                    outputs = value
                        .split(',')
                        .map(|s| s.trim().parse::<OutputKind>())
                        .collect::<Result<_, _>>()
                        .map_err(bad)?;
                }
                "kernel" => {
                    kernel = match value {
                        "closed_form" => KernelMode::ClosedForm,
                        "quadrature" => KernelMode::Quadrature,
                        _ => return Err(bad("expected closed_form or quadrature".into())),
                    }
                }
                "oracle_modes" => {
                    oracle_modes = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?)
                }
                "oracle_omega_max" => oracle_omega_max = Some(real()?),
                "oracle_scheme" => {
                    oracle_scheme = match value {
                        "midpoint" => SamplingScheme::MidpointUniform,
                        "gauss_legendre" => SamplingScheme::GaussLegendre,
                        _ => return Err(bad("expected midpoint or gauss_legendre".into())),
                    }
                }
                "seed_label" => seed_label = value.into(),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.into(),
                    })
                }
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.into(),
                });
            }
        }

        let spectral = SpectralParams::with_omega_0(
            eta.ok_or(ConfigError::Missing("eta"))?,
            omega_c.ok_or(ConfigError::Missing("omega_c"))?,
            n,
            omega_0,
        )?;
        if outputs.is_empty() {
            return Err(ConfigError::Invalid("outputs must not be empty".into()));
        }
        if oracle_modes.is_none()
            && (seen.contains("oracle_omega_max") || seen.contains("oracle_scheme"))
        {
            return Err(ConfigError::Invalid(
                "oracle settings given without oracle_modes".into(),
            ));
        }
        let config = Self {
            spectral,
            t_max: t_max.ok_or(ConfigError::Missing("t_max"))?,
            dt,
            beta0,
            epsilon_u,
            outputs,
            kernel,
            oracle: oracle_modes.map(|modes| OracleSettings {
                modes,
                omega_max: oracle_omega_max,
                scheme: oracle_scheme,
            }),
            seed_label,
        };
        config.grid()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path)
            .map_err(|e| RunError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Ok(Self::parse(&text)?)
    }

    /// Applies a sweep value.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<Self, ConfigError> {
        let p = &self.spectral;
        let mut c = self.clone();
        match param {
            SweepParam::Eta => c.spectral = p.with_eta(value)?,
            SweepParam::OmegaC => {
                c.spectral = SpectralParams::with_omega_0(p.eta(), value, p.n(), p.omega_0())?
            }
            SweepParam::N => {
                c.spectral = SpectralParams::with_omega_0(p.eta(), p.omega_c(), value, p.omega_0())?
            }
            SweepParam::Beta0 => {
                if !value.is_finite() {
                    return Err(ConfigError::Invalid(format!(
                        "beta0 must be finite, got {value}"
                    )));
                }
                c.beta0 = Complex64::new(value, 0.0)
            }
        }
        c.grid()?;
        Ok(c)
    }
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
    let z = match parts.as_slice() {
        [re] => Complex64::new(num(re)?, 0.0),
        [re, im] => Complex64::new(num(re)?, num(im)?),
        _ => return Err("expected `re` or `re,im`".into()),
    };
    if z.is_finite() {
        Ok(z)
    } else {
        Err("must be finite".into())
    }
}

impl fmt::Display for ScenarioConfig {
    /// Writes a config that [`ScenarioConfig::parse`] reads back unchanged.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.spectral;
        writeln!(f, "eta = {}", p.eta())?;
        writeln!(f, "omega_c = {}", p.omega_c())?;
        writeln!(f, "n = {}", p.n())?;
        writeln!(f, "omega_0 = {}", p.omega_0())?;
        writeln!(f, "t_max = {}", self.t_max)?;
        if let Some(dt) = self.dt {
            writeln!(f, "dt = {dt}")?;
        }
        writeln!(f, "beta0 = {},{}", self.beta0.re, self.beta0.im)?;
        writeln!(f, "epsilon_u = {}", self.epsilon_u)?;
        let outputs: Vec<&str> = self.outputs.iter().map(|k| k.name()).collect();
        writeln!(f, "outputs = {}", outputs.join(","))?;
        let kernel = match self.kernel {
            KernelMode::ClosedForm => "closed_form",
            KernelMode::Quadrature => "quadrature",
        };
        writeln!(f, "kernel = {kernel}")?;
        if let Some(o) = &self.oracle {
            writeln!(f, "oracle_modes = {}", o.modes)?;
            if let Some(w) = o.omega_max {
                writeln!(f, "oracle_omega_max = {w}")?;
            }
            let scheme = match o.scheme {
                SamplingScheme::MidpointUniform => "midpoint",
                SamplingScheme::GaussLegendre => "gauss_legendre",
            };
            writeln!(f, "oracle_scheme = {scheme}")?;
        }
        if !self.seed_label.is_empty() {
            writeln!(f, "seed_label = {}", self.seed_label)?;
        }
        Ok(())
    }
}

/// Scalar digest of a finished scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSummary {
    pub min_purity: f64,
    /// Mean of valid `Γ` over the last tenth of the horizon.
    pub steady_gamma: f64,
    /// Mean `|u|` over the last tenth of the horizon.
    pub steady_abs_u: f64,
}

/// Everything computed for one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub amplitude: AmplitudeSeries,
    pub rates: CoefficientSeries,
    pub purity: Vec<f64>,
    pub oracle: Option<AmplitudeSeries>,
    pub summary: ScenarioSummary,
}

/// Solves the scenario without touching the filesystem.
pub fn compute_scenario(config: &ScenarioConfig) -> Result<ScenarioResult, RunError> {
    let grid = config.grid()?;
    let omega_0 = config.spectral.omega_0();
    let kernel = match config.kernel {
        KernelMode::ClosedForm => Kernel::ClosedForm(config.spectral),
        KernelMode::Quadrature => Kernel::Quadrature {
            params: config.spectral,
            config: QuadratureConfig::default(),
        },
    };
    let amplitude = solve_u(&kernel, &grid, omega_0)?;
    let rates = extract_rates(&amplitude, config.epsilon_u, omega_0);
    let cat = CatState::new(config.beta0);
    let purity: Vec<f64> = amplitude.u.iter().map(|u| purity(&cat, u.norm())).collect();
    let oracle = match &config.oracle {
        Some(o) => {
            let omega_max = o.omega_max.unwrap_or(30.0 * config.spectral.omega_c());
            let bath =
                discretize_bath(&config.spectral, o.modes, omega_max, grid.t_max(), o.scheme)?;
            Some(oracle_amplitude(&bath, omega_0, &grid)?)
        }
        None => None,
    };

    let tail_start = 0.9 * grid.t_max();
    let tail: Vec<usize> = (grid.index_at(tail_start)..grid.count()).collect();
    let steady_abs_u = tail.iter().map(|&k| amplitude.u[k].norm()).sum::<f64>() / tail.len() as f64;
    let summary = ScenarioSummary {
        min_purity: purity.iter().copied().fold(f64::INFINITY, f64::min),
        steady_gamma: rates
            .mean_gamma(tail_start, grid.t_max())
            .unwrap_or(f64::NAN),
        steady_abs_u,
    };
    Ok(ScenarioResult {
        amplitude,
        rates,
        purity,
        oracle,
        summary,
    })
}

/// `t,re_u,im_u,abs_u`.
pub fn amplitude_csv(series: &AmplitudeSeries) -> String {
    let mut s = String::from("t,re_u,im_u,abs_u\n");
    for (k, u) in series.u.iter().enumerate() {
        let _ = writeln!(s, "{},{},{},{}", series.grid.time(k), u.re, u.im, u.norm());
    }
    s
}

/// `t,gamma,omega,delta_omega,valid`; numeric fields are empty where invalid.
pub fn rates_csv(rates: &CoefficientSeries) -> String {
    let mut s = String::from("t,gamma,omega,delta_omega,valid\n");
    for k in 0..rates.grid.count() {
        let t = rates.grid.time(k);
        if rates.valid[k] {
            let _ = writeln!(
                s,
                "{t},{},{},{},1",
                rates.gamma[k], rates.omega[k], rates.delta_omega[k]
            );
        } else {
            let _ = writeln!(s, "{t},,,,0");
        }
    }
    s
}

/// `t,purity`.
pub fn purity_csv(grid: &TimeGrid, purity: &[f64]) -> String {
    let mut s = String::from("t,purity\n");
    for (k, p) in purity.iter().enumerate() {
        let _ = writeln!(s, "{},{p}", grid.time(k));
    }
    s
}

/// `t,re_u,im_u,abs_u,deviation` with `deviation = |u_oracle − u_solver|`.
pub fn oracle_csv(oracle: &AmplitudeSeries, solver: &AmplitudeSeries) -> String {
    let mut s = String::from("t,re_u,im_u,abs_u,deviation\n");
    for (k, (u, v)) in oracle.u.iter().zip(&solver.u).enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            oracle.grid.time(k),
            u.re,
            u.im,
            u.norm(),
            (u - v).norm()
        );
    }
    s
}

fn scenario_text(config: &ScenarioConfig, result: &ScenarioResult) -> Result<String, RunError> {
    let p = &config.spectral;
    let m = markovian_coefficients(p)?;
    let grid = result.amplitude.grid;
    let mut s = config.to_string();
    let _ = writeln!(s, "# derived");
    let _ = writeln!(s, "# class = {}", p.class());
    let _ = writeln!(s, "# tau_E = {}", p.tau_e());
    let _ = writeln!(s, "# tau_0 = {}", p.tau_0());
    let _ = writeln!(s, "# dt_used = {}", grid.dt());
    let _ = writeln!(s, "# steps = {}", grid.steps());
    let _ = writeln!(s, "# gamma_markov = {}", m.gamma_m);
    let _ = writeln!(s, "# delta_omega_markov = {}", m.delta_omega);
    let _ = writeln!(s, "# omega_markov = {}", m.omega_m);
    let _ = writeln!(s, "# min_purity = {}", result.summary.min_purity);
    let _ = writeln!(s, "# steady_gamma = {}", result.summary.steady_gamma);
    let _ = writeln!(s, "# steady_abs_u = {}", result.summary.steady_abs_u);
    Ok(s)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, RunError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn plots(result: &ScenarioResult, outputs: &BTreeSet<OutputKind>) -> Vec<(&'static str, String)> {
    let grid = result.amplitude.grid;
    let mut out = Vec::new();
    if outputs.contains(&OutputKind::Amplitude) {
        let pts = result
            .amplitude
            .u
            .iter()
            .enumerate()
            .map(|(k, u)| Some((grid.time(k), u.norm())))
            .collect();
        out.push((
            "amplitude.svg",
            Plot::new("|u(t)|", "t", "|u|")
                .with_series("|u|", pts)
                .render(),
        ));
    }
    if outputs.contains(&OutputKind::Rates) {
        let r = &result.rates;
        let col = |v: &Vec<f64>| {
            (0..grid.count())
                .map(|k| r.valid[k].then(|| (grid.time(k), v[k])))
                .collect()
        };
        out.push((
            "rates.svg",
            Plot::new("decay rate and frequency shift", "t", "rate")
                .with_series("gamma", col(&r.gamma))
                .with_series("delta_omega", col(&r.delta_omega))
                .render(),
        ));
    }
    if outputs.contains(&OutputKind::Purity) {
        let pts = result
            .purity
            .iter()
            .enumerate()
            .map(|(k, p)| Some((grid.time(k), *p)))
            .collect();
        out.push((
            "purity.svg",
            Plot::new("purity", "t", "p").with_series("p", pts).render(),
        ));
    }
    out
}

/// Solves the scenario and writes the requested outputs into `out_dir`.
/// Nothing is written unless the computation succeeds.
pub fn run_scenario(
    config: &ScenarioConfig,
    out_dir: &Path,
    svg: bool,
) -> Result<(ScenarioResult, Vec<PathBuf>), RunError> {
    let result = compute_scenario(config)?;
    let text = scenario_text(config, &result)?;
    fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for kind in &config.outputs {
        let (name, body) = match kind {
            OutputKind::Amplitude => ("amplitude.csv", amplitude_csv(&result.amplitude)),
            OutputKind::Rates => ("rates.csv", rates_csv(&result.rates)),
            OutputKind::Purity => (
                "purity.csv",
                purity_csv(&result.amplitude.grid, &result.purity),
            ),
        };
        files.push(write_file(out_dir, name, &body)?);
    }
    if let Some(oracle) = &result.oracle {
        files.push(write_file(
            out_dir,
            "oracle.csv",
            &oracle_csv(oracle, &result.amplitude),
        )?);
    }
    files.push(write_file(out_dir, "scenario.txt", &text)?);
    if svg {
        for (name, body) in plots(&result, &config.outputs) {
            files.push(write_file(out_dir, name, &body)?);
        }
    }
    Ok((result, files))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Eta,
    OmegaC,
    N,
    Beta0,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Eta => "eta",
            SweepParam::OmegaC => "omega_c",
            SweepParam::N => "n",
            SweepParam::Beta0 => "beta0",
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "eta" => Ok(SweepParam::Eta),
            "omega_c" => Ok(SweepParam::OmegaC),
            "n" => Ok(SweepParam::N),
            "beta0" => Ok(SweepParam::Beta0),
            _ => Err(format!(
                "unknown sweep parameter `{s}` (expected eta, omega_c, n or beta0)"
            )),
        }
    }
}

/// Outcome for one sweep value.
#[derive(Debug)]
pub struct SweepRow {
    pub value: f64,
    pub dir: PathBuf,
    pub outcome: Result<ScenarioSummary, RunError>,
}

/// Runs one scenario per value concurrently, each in its own
/// subdirectory, and writes `summary.csv`. Per-value failures are recorded
/// in the summary rather than aborting the sweep.
pub fn sweep(
    config: &ScenarioConfig,
    param: SweepParam,
    values: &[f64],
    out_dir: &Path,
) -> Result<Vec<SweepRow>, RunError> {
    if values.is_empty() {
        return Err(RunError::Usage("sweep needs at least one value".into()));
    }
    fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let dir = out_dir.join(format!("{i:03}_{}_{value}", param.name()));
            let outcome = config
                .with_param(param, value)
                .map_err(RunError::from)
                .and_then(|c| run_scenario(&c, &dir, false))
                .map(|(r, _)| r.summary);
            SweepRow {
                value,
                dir,
                outcome,
            }
        })
        .collect();

    let mut s = String::from("value,min_purity,steady_gamma,steady_abs_u,status\n");
    for row in &rows {
        match &row.outcome {
            Ok(m) => {
                let _ = writeln!(
                    s,
                    "{},{},{},{},ok",
                    row.value, m.min_purity, m.steady_gamma, m.steady_abs_u
                );
            }
            Err(e) => {
                let msg = e.to_string().replace([',', '\n', '"'], " ");
                let _ = writeln!(s, "{},,,,error: {msg}", row.value);
            }
        }
    }
    write_file(out_dir, "summary.csv", &s)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# weak coupling
eta = 0.1
omega_c = 50   # cutoff
n = 1
t_max = 2
dt = 1e-3
beta0 = 1.5,-0.5
outputs = rates,purity
seed_label = sample run
";

    #[test]
    fn parses_sample() {
        let c = ScenarioConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.spectral.eta(), 0.1);
        assert_eq!(c.spectral.omega_c(), 50.0);
        assert_eq!(c.beta0, Complex64::new(1.5, -0.5));
        assert_eq!(c.dt, Some(1e-3));
        assert_eq!(c.outputs.len(), 2);
        assert!(!c.outputs.contains(&OutputKind::Amplitude));
        assert_eq!(c.seed_label, "sample run");
        assert_eq!(c.epsilon_u, DEFAULT_EPSILON_U);
        assert!(c.oracle.is_none());
    }

    #[test]
    fn display_round_trips() {
        let mut c = ScenarioConfig::parse(SAMPLE).unwrap();
        c.oracle = Some(OracleSettings {
            modes: 500,
            omega_max: Some(40.0),
            scheme: SamplingScheme::GaussLegendre,
        });
        c.kernel = KernelMode::Quadrature;
        assert_eq!(ScenarioConfig::parse(&c.to_string()).unwrap(), c);
        for name in ["fig1", "fig2", "fig3"] {
            let p = ScenarioConfig::preset(name).unwrap();
            assert_eq!(ScenarioConfig::parse(&p.to_string()).unwrap(), p);
        }
    }

    #[test]
    fn rejects_malformed_input() {
        let cases = [
            ("eta 0.1\nomega_c = 1\nt_max = 1", "expected `key = value`"),
            ("eta = 0.1\nomega_c = 1\nt_max = 1\nfoo = 2", "unknown key"),
            (
                "eta = 0.1\neta = 0.2\nomega_c = 1\nt_max = 1",
                "given twice",
            ),
            ("eta = x\nomega_c = 1\nt_max = 1", "bad value"),
            ("eta = 0.1\nt_max = 1", "omega_c"),
            ("eta = -1\nomega_c = 1\nt_max = 1", "eta"),
            (
                "eta = 0.1\nomega_c = 1\nt_max = 1\noutputs = amplitude,spectra",
                "unknown output",
            ),
            ("eta = 0.1\nomega_c = 1\nt_max = 1\nbeta0 = 1,2,3", "re,im"),
            ("eta = 0.1\nomega_c = 1\nt_max = 0", "t_max"),
            (
                "eta = 0.1\nomega_c = 1\nt_max = 1\noracle_scheme = midpoint",
                "oracle_modes",
            ),
        ];
        for (text, needle) in cases {
            let err = ScenarioConfig::parse(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text:?} gave {err}");
        }
    }

    #[test]
    fn default_dt_follows_params() {
        let c = ScenarioConfig::parse("eta = 5\nomega_c = 50\nt_max = 1").unwrap();
        assert_eq!(c.grid().unwrap().dt(), default_dt(&c.spectral));
        let swept = c.with_param(SweepParam::OmegaC, 1.0).unwrap();
        assert_eq!(swept.grid().unwrap().dt(), 1e-3);
    }

    #[test]
    fn presets_pin_grids() {
        let f1 = ScenarioConfig::preset("fig1").unwrap();
        assert_eq!(f1.grid().unwrap().count(), 100_001);
        let f3 = ScenarioConfig::preset("fig3").unwrap();
        assert_eq!(f3.spectral.omega_c(), 0.2);
        assert_eq!(f3.beta0, Complex64::new(1.0, 0.0));
        assert!(ScenarioConfig::preset("fig4").is_err());
    }

    #[test]
    fn rates_csv_leaves_gaps() {
        let grid = TimeGrid::new(1.0, 0.5).unwrap();
        let series = AmplitudeSeries {
            grid,
            u: vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(1e-9, 0.0),
                Complex64::new(0.5, 0.0),
            ],
            u_dot: vec![Complex64::new(0.0, -1.0); 3],
        };
        let csv = rates_csv(&extract_rates(&series, DEFAULT_EPSILON_U, 1.0));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,gamma,omega,delta_omega,valid");
        assert_eq!(lines[1], "0,0,1,0,1");
        assert_eq!(lines[2], "0.5,,,,0");
    }

    #[test]
    fn floats_round_trip() {
        let grid = TimeGrid::new(0.3, 0.1).unwrap();
        let p = [1.0, 0.1 + 0.2, 1.0 / 3.0, 0.7];
        let csv = purity_csv(&grid, &p);
        for (line, expect) in csv.lines().skip(1).zip(p) {
            let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(v.to_bits(), expect.to_bits());
        }
    }

    #[test]
    fn zero_coupling_summary() {
        let c = ScenarioConfig::parse("eta = 0\nomega_c = 1\nt_max = 2").unwrap();
        let r = compute_scenario(&c).unwrap();
        assert!(r.purity.iter().all(|&p| (p - 1.0).abs() < 1e-12));
        assert_eq!(r.summary.steady_gamma, 0.0);
        assert!((r.summary.steady_abs_u - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_param_names() {
        for p in [
            SweepParam::Eta,
            SweepParam::OmegaC,
            SweepParam::N,
            SweepParam::Beta0,
        ] {
            assert_eq!(p.name().parse::<SweepParam>().unwrap(), p);
        }
        assert!("t_max".parse::<SweepParam>().is_err());
    }
}
