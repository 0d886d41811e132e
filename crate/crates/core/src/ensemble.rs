//! Disorder sweeps: per-realization pipeline, seeding, and deterministic
//! aggregation.

use std::collections::BTreeMap;

use crate::dynamics::{
    emission_horizon, evolve_amplitude, min_array_half_size, recommended_dt, weighted_spread,
    TimeGrid,
};
use crate::error::{Error, Result};
use crate::lattice::{
    build_field_hamiltonian, build_single_excitation_hamiltonian, sample_detunings, DisorderKind,
    DisorderSpec,
};
use crate::nonmarkov::{analyze, NmResult};
use crate::pheno::{
    effective_coupling, effective_rate, select_local_mode, LambdaKind, PhenoCurvePoint,
};
use crate::report::{fmt_f64, CsvWriter};
use crate::spectral::{
    coupling_strengths, localization_length_entropy, localization_length_thouless, LocalSpectrum,
    Spectrum,
};

/// Largest tolerated share of failed realizations at one σ.
pub const MAX_FAILURE_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub pdf: DisorderKind,
    pub sigma_grid: Vec<f64>,
    pub realizations: usize,
    pub n_half: usize,
    pub g: f64,
    pub hopping: f64,
    pub master_seed: u64,
    pub released_fraction: f64,
    pub margin: f64,
    pub dt_override: Option<f64>,
    pub t_override: Option<f64>,
    pub lambda_kind: LambdaKind,
    pub c_q2: f64,
    pub c_thouless: f64,
    /// Accept `n_half` below the light-cone bound for the horizon.
    pub allow_undersized_array: bool,
    /// Worker cap; `None` uses the available parallelism. Never affects
    /// results, so it is not part of the serialized config.
    pub threads: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            pdf: DisorderKind::Gaussian,
            sigma_grid: vec![0.25, 0.5, 1.0, 1.5, 2.0],
            realizations: 200,
            n_half: 1000,
            g: 0.1,
            hopping: 1.0,
            master_seed: 0,
            released_fraction: 0.99,
            margin: 1.05,
            dt_override: None,
            t_override: None,
            lambda_kind: LambdaKind::EntropyQ2,
            c_q2: LambdaKind::EntropyQ2.default_c(),
            c_thouless: LambdaKind::Thouless.default_c(),
            allow_undersized_array: false,
            threads: None,
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "pdf",
    "sigma_grid",
    "realizations",
    "n_half",
    "g",
    "J",
    "master_seed",
    "released_fraction",
    "margin",
    "dt_override",
    "t_override",
    "lambda_kind",
    "c_q2",
    "c_thouless",
    "allow_undersized_array",
];

fn cfg_err(key: &str, value: &str, what: &str) -> Error {
    Error::Config(format!("{key}={value}: {what}"))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| cfg_err(key, value, "not a valid number"))
}

fn parse_optional(key: &str, value: &str) -> Result<Option<f64>> {
    match value.trim() {
        "" | "auto" | "none" => Ok(None),
        v => parse_num(key, v).map(Some),
    }
}

fn fmt_optional(x: Option<f64>) -> String {
    x.map_or_else(|| "auto".to_string(), |v| v.to_string())
}

impl SweepConfig {
    /// Small-array preset: `N = 200` with the horizon cut to `T = 200`.
    pub fn desk() -> Self {
        Self {
            n_half: 200,
            t_override: Some(200.0),
            allow_undersized_array: true,
            ..Self::default()
        }
    }

    /// Parse `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected key=value, got '{line}'",
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "pdf" => {
                self.pdf = value
                    .parse()
                    .map_err(|_| cfg_err(key, value, "expected gaussian or cauchy"))?
            }
            "sigma_grid" => {
                self.sigma_grid = value
                    .split([',', ';'])
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_num(key, s))
                    .collect::<Result<_>>()?;
            }
            "realizations" => self.realizations = parse_num(key, value)?,
            "n_half" => self.n_half = parse_num(key, value)?,
            "g" => self.g = parse_num(key, value)?,
            "J" => self.hopping = parse_num(key, value)?,
            "master_seed" => self.master_seed = parse_num(key, value)?,
            "released_fraction" => self.released_fraction = parse_num(key, value)?,
            "margin" => self.margin = parse_num(key, value)?,
            "dt_override" => self.dt_override = parse_optional(key, value)?,
            "t_override" => self.t_override = parse_optional(key, value)?,
            "lambda_kind" => {
                self.lambda_kind = value
                    .parse()
                    .map_err(|_| cfg_err(key, value, "expected q2 or thouless"))?
            }
            "c_q2" => self.c_q2 = parse_num(key, value)?,
            "c_thouless" => self.c_thouless = parse_num(key, value)?,
            "allow_undersized_array" => {
                self.allow_undersized_array = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(cfg_err(key, value, "expected true or false")),
                }
            }
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Evolution window `T`.
    pub fn horizon(&self) -> Result<f64> {
        match self.t_override {
            Some(t) => Ok(t),
            None => emission_horizon(self.g, self.hopping, self.released_fraction),
        }
    }

    pub fn c_constant(&self, kind: LambdaKind) -> f64 {
        match kind {
            LambdaKind::EntropyQ2 => self.c_q2,
            LambdaKind::Thouless => self.c_thouless,
        }
    }

    pub fn spec(&self, sigma: f64) -> Result<DisorderSpec> {
        DisorderSpec::new(self.pdf, sigma)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.realizations == 0 {
            return bad("realizations must be >= 1".into());
        }
        if self.sigma_grid.is_empty() {
            return bad("sigma_grid is empty".into());
        }
        if let Some(s) = self
            .sigma_grid
            .iter()
            .find(|s| !(**s >= 0.0 && s.is_finite()))
        {
            return bad(format!("sigma_grid entry {s} is not a finite value >= 0"));
        }
        if self.n_half == 0 {
            return bad("n_half must be >= 1".into());
        }
        if !(self.g > 0.0 && self.g.is_finite())
            || !(self.hopping > 0.0 && self.hopping.is_finite())
        {
            return bad("g and J must be finite and > 0".into());
        }
        if !(self.released_fraction > 0.0 && self.released_fraction < 1.0) {
            return bad(format!(
                "released_fraction must lie in (0, 1), got {}",
                self.released_fraction
            ));
        }
        if !(self.margin >= 1.0) {
            return bad(format!("margin must be >= 1, got {}", self.margin));
        }
        if let Some(dt) = self.dt_override {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt_override must be > 0, got {dt}"));
            }
        }
        if let Some(t) = self.t_override {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("t_override must be > 0, got {t}"));
            }
        }
        if !(self.c_q2 > 0.0) || !(self.c_thouless > 0.0) {
            return bad("c_q2 and c_thouless must be > 0".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be >= 1".into());
        }
        let n_min = min_array_half_size(self.horizon()?, self.hopping, self.margin)?;
        if self.n_half < n_min && !self.allow_undersized_array {
            return bad(format!(
                "n_half = {} is below the light-cone bound {n_min} for T = {}; set allow_undersized_array=true to accept",
                self.n_half,
                self.horizon()?
            ));
        }
        Ok(())
    }

    /// Serialized effective config, as echoed in output headers.
    pub fn to_meta(&self) -> String {
        let grid: Vec<String> = self.sigma_grid.iter().map(|s| s.to_string()).collect();
        format!(
            "pdf={} sigma_grid={} realizations={} n_half={} g={} J={} master_seed={} released_fraction={} margin={} \
             dt_override={} t_override={} lambda_kind={} c_q2={} c_thouless={} allow_undersized_array={}",
            self.pdf.as_str(),
            grid.join(";"),
            self.realizations,
            self.n_half,
            self.g,
            self.hopping,
            self.master_seed,
            self.released_fraction,
            self.margin,
            fmt_optional(self.dt_override),
            fmt_optional(self.t_override),
            self.lambda_kind.as_str(),
            self.c_q2,
            self.c_thouless,
            self.allow_undersized_array,
        )
    }

    /// `(sigma_index, seed)` for every realization, σ-major.
    pub fn tasks(&self) -> Vec<(usize, u64)> {
        (0..self.sigma_grid.len())
            .flat_map(|si| {
                (0..self.realizations)
                    .map(move |ri| (si, derive_seed(self.master_seed, si as u64, ri as u64)))
            })
            .collect()
    }
}

pub fn config_from_map(map: &BTreeMap<String, String>) -> Result<SweepConfig> {
    let mut cfg = SweepConfig::default();
    for (k, v) in map {
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of realization `realization_index` at grid point `sigma_index`.
///
/// A SplitMix64 generator is started at `master`; each index is folded in by
/// XOR into the state followed by one output step.
pub fn derive_seed(master: u64, sigma_index: u64, realization_index: u64) -> u64 {
    let mut state = master;
    let a = splitmix64(&mut state);
    state = a ^ sigma_index;
    let b = splitmix64(&mut state);
    state = b ^ realization_index;
    splitmix64(&mut state)
}

/// Local-mode quantities of one realization of the bare field.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalModeParams {
    pub ell: usize,
    pub omega_ell: f64,
    pub lambda_q2: f64,
    /// `None` when the Thouless length is undefined (degenerate spectrum).
    pub lambda_thouless: Option<f64>,
    pub g_ell_q2: f64,
    pub g_ell_thouless: Option<f64>,
    pub gamma: f64,
}

impl LocalModeParams {
    pub fn g_ell(&self, kind: LambdaKind) -> Option<f64> {
        match kind {
            LambdaKind::EntropyQ2 => Some(self.g_ell_q2),
            LambdaKind::Thouless => self.g_ell_thouless,
        }
    }

    pub fn lambda(&self, kind: LambdaKind) -> Option<f64> {
        match kind {
            LambdaKind::EntropyQ2 => Some(self.lambda_q2),
            LambdaKind::Thouless => self.lambda_thouless,
        }
    }
}

/// Select `ℓ` (resonant with the emitter at `ω_a = 0`) and extract
/// `λ_ℓ`, `g_ℓ` and `γ` from a field-only spectrum.
pub fn extract_local_mode<S: Spectrum + ?Sized>(
    field: &S,
    cfg: &SweepConfig,
) -> Result<LocalModeParams> {
    let omega_a = 0.0;
    let ell = select_local_mode(field, omega_a);
    let vector = field.mode_vector(ell)?;
    let lambda_q2 = localization_length_entropy(&vector, 2.0)?;
    let lambda_thouless = match localization_length_thouless(field, ell) {
        Ok(l) => Some(l),
        Err(Error::Undefined(_)) => None,
        Err(e) => return Err(e),
    };
    // λ < 1 only through round-off or the Thouless formula on tiny arrays
    let g_ell_q2 = effective_coupling(lambda_q2.max(1.0), cfg.g, cfg.c_q2)?;
    let g_ell_thouless = lambda_thouless
        .map(|l| effective_coupling(l.max(1.0), cfg.g, cfg.c_thouless))
        .transpose()?;
    let couplings = coupling_strengths(field, cfg.g);
    let gamma = effective_rate(field, &couplings, ell, omega_a, cfg.g)?;
    Ok(LocalModeParams {
        ell,
        omega_ell: field.frequencies()[ell],
        lambda_q2,
        lambda_thouless,
        g_ell_q2,
        g_ell_thouless,
        gamma,
    })
}

/// Field-only part of the pipeline for one realization.
pub fn local_mode_parameters(cfg: &SweepConfig, sigma: f64, seed: u64) -> Result<LocalModeParams> {
    let detunings = sample_detunings(&cfg.spec(sigma)?, cfg.n_half, seed)?;
    let field = LocalSpectrum::new(&build_field_hamiltonian(&detunings, cfg.hopping)?)?;
    extract_local_mode(&field, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationResult {
    pub sigma: f64,
    pub seed: u64,
    pub nm: NmResult,
    pub local: LocalModeParams,
    pub dt: f64,
    pub samples: usize,
}

pub fn run_realization(cfg: &SweepConfig, sigma: f64, seed: u64) -> Result<RealizationResult> {
    let detunings = sample_detunings(&cfg.spec(sigma)?, cfg.n_half, seed)?;
    let field = LocalSpectrum::new(&build_field_hamiltonian(&detunings, cfg.hopping)?)?;
    let local = extract_local_mode(&field, cfg)?;
    drop(field);
    let full = LocalSpectrum::new(&build_single_excitation_hamiltonian(
        &detunings,
        cfg.hopping,
        cfg.g,
    )?)?;
    let dt = match cfg.dt_override {
        Some(dt) => dt,
        None => recommended_dt(weighted_spread(&full)?, cfg.hopping),
    };
    let grid = TimeGrid::new(cfg.horizon()?, dt)?;
    let trajectory = evolve_amplitude(&full, &grid)?;
    Ok(RealizationResult {
        sigma,
        seed,
        nm: analyze(&trajectory),
        local,
        dt,
        samples: grid.samples(),
    })
}

/// Evaluate `f` on every task and return the results in task order,
/// regardless of how the work was scheduled.
pub fn map_tasks<T, R, F>(threads: Option<usize>, tasks: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.unwrap_or(0))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(|| tasks.par_iter().map(&f).collect()))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(tasks.iter().map(f).collect())
    }
}

pub(crate) fn check_failures(sigma: f64, failed: usize, total: usize) -> Result<()> {
    if failed as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return Err(Error::TooManyFailures {
            sigma,
            failed,
            total,
        });
    }
    Ok(())
}

/// Mean, mean absolute deviation about the mean, and median.
pub fn mean_mad_median(xs: &[f64]) -> (f64, f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mad = xs.iter().map(|x| (x - mean).abs()).sum::<f64>() / n;
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };
    (mean, mad, median)
}

fn mean_of(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub sigma: f64,
    /// Successful realizations.
    pub count: usize,
    pub failed: usize,
    pub mean_n: f64,
    pub mad_n: f64,
    pub median_n: f64,
    pub mean_nv: f64,
    pub mean_lambda_q2: f64,
    /// Over realizations with a finite Thouless length.
    pub mean_lambda_thouless: f64,
    pub mean_g_ell_q2: f64,
    pub mean_g_ell_thouless: f64,
    pub mean_gamma: f64,
    pub mean_abs_detuning_ell: f64,
    /// Model prediction from the averaged parameters, both length kinds.
    pub n_pheno_q2: f64,
    pub n_pheno_thouless: f64,
}

impl EnsembleSummary {
    pub fn from_results(
        sigma: f64,
        cfg: &SweepConfig,
        results: &[Result<RealizationResult>],
    ) -> Result<Self> {
        let ok: Vec<&RealizationResult> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
        let failed = results.len() - ok.len();
        check_failures(sigma, failed, results.len())?;
        let ns: Vec<f64> = ok.iter().map(|r| r.nm.n_rescaled).collect();
        let (mean_n, mad_n, median_n) = mean_mad_median(&ns);
        let mean_g_ell_q2 = mean_of(ok.iter().map(|r| r.local.g_ell_q2));
        let mean_g_ell_thouless = mean_of(ok.iter().filter_map(|r| r.local.g_ell_thouless));
        let mean_gamma = mean_of(ok.iter().map(|r| r.local.gamma));
        let mean_abs_detuning_ell = mean_of(ok.iter().map(|r| r.local.omega_ell.abs()));
        let predict = |g_ell: f64, kind: LambdaKind| {
            PhenoCurvePoint::from_means(
                sigma,
                g_ell,
                mean_gamma,
                kind,
                cfg.c_constant(kind),
                mean_abs_detuning_ell,
                0,
            )
            .map_or(f64::NAN, |p| p.n_predicted)
        };
        Ok(Self {
            sigma,
            count: ok.len(),
            failed,
            mean_n,
            mad_n,
            median_n,
            mean_nv: mean_of(ok.iter().map(|r| r.nm.nv)),
            mean_lambda_q2: mean_of(ok.iter().map(|r| r.local.lambda_q2)),
            mean_lambda_thouless: mean_of(
                ok.iter()
                    .filter_map(|r| r.local.lambda_thouless)
                    .filter(|l| l.is_finite()),
            ),
            mean_g_ell_q2,
            mean_g_ell_thouless,
            mean_gamma,
            mean_abs_detuning_ell,
            n_pheno_q2: predict(mean_g_ell_q2, LambdaKind::EntropyQ2),
            n_pheno_thouless: predict(mean_g_ell_thouless, LambdaKind::Thouless),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub summaries: Vec<EnsembleSummary>,
    /// Per σ, per realization, in index order.
    pub realizations: Vec<Vec<Result<RealizationResult>>>,
}

/// Run every realization of the grid and aggregate per σ.
pub fn sweep_detailed(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let tasks = cfg.tasks();
    let mut flat = map_tasks(cfg.threads, &tasks, |&(si, seed)| {
        run_realization(cfg, cfg.sigma_grid[si], seed)
    })?
    .into_iter();
    let mut summaries = Vec::with_capacity(cfg.sigma_grid.len());
    let mut realizations = Vec::with_capacity(cfg.sigma_grid.len());
    for &sigma in &cfg.sigma_grid {
        let block: Vec<_> = flat.by_ref().take(cfg.realizations).collect();
        summaries.push(EnsembleSummary::from_results(sigma, cfg, &block)?);
        realizations.push(block);
    }
    Ok(SweepOutput {
        summaries,
        realizations,
    })
}

pub fn sweep(cfg: &SweepConfig) -> Result<Vec<EnsembleSummary>> {
    Ok(sweep_detailed(cfg)?.summaries)
}

pub const SUMMARY_COLUMNS: &[&str] = &[
    "sigma",
    "count",
    "failed",
    "mean_n",
    "mad_n",
    "median_n",
    "mean_nv",
    "mean_lambda_q2",
    "mean_lambda_thouless",
    "mean_g_ell_q2",
    "mean_g_ell_thouless",
    "mean_gamma",
    "mean_abs_detuning_ell",
    "n_pheno_q2",
    "n_pheno_thouless",
];

pub fn summary_to_csv(summaries: &[EnsembleSummary], meta: &str) -> String {
    let mut w = CsvWriter::new("ensemble-summary", meta, SUMMARY_COLUMNS);
    for s in summaries {
        w.row(&[
            fmt_f64(s.sigma),
            s.count.to_string(),
            s.failed.to_string(),
            fmt_f64(s.mean_n),
            fmt_f64(s.mad_n),
            fmt_f64(s.median_n),
            fmt_f64(s.mean_nv),
            fmt_f64(s.mean_lambda_q2),
            fmt_f64(s.mean_lambda_thouless),
            fmt_f64(s.mean_g_ell_q2),
            fmt_f64(s.mean_g_ell_thouless),
            fmt_f64(s.mean_gamma),
            fmt_f64(s.mean_abs_detuning_ell),
            fmt_f64(s.n_pheno_q2),
            fmt_f64(s.n_pheno_thouless),
        ]);
    }
    w.finish()
}

pub const REALIZATION_COLUMNS: &[&str] = &[
    "sigma",
    "seed",
    "status",
    "nv",
    "n_rescaled",
    "n_extrema",
    "ell",
    "omega_ell",
    "lambda_q2",
    "lambda_thouless",
    "g_ell_q2",
    "g_ell_thouless",
    "gamma",
];

pub fn realizations_to_csv(cfg: &SweepConfig, out: &SweepOutput, meta: &str) -> String {
    let mut w = CsvWriter::new("realizations", meta, REALIZATION_COLUMNS);
    let nan = || fmt_f64(f64::NAN);
    for (si, block) in out.realizations.iter().enumerate() {
        for (ri, r) in block.iter().enumerate() {
            match r {
                Ok(r) => w.row(&[
                    fmt_f64(r.sigma),
                    r.seed.to_string(),
                    "ok".to_string(),
                    fmt_f64(r.nm.nv),
                    fmt_f64(r.nm.n_rescaled),
                    r.nm.extrema.len().to_string(),
                    r.local.ell.to_string(),
                    fmt_f64(r.local.omega_ell),
                    fmt_f64(r.local.lambda_q2),
                    fmt_f64(r.local.lambda_thouless.unwrap_or(f64::NAN)),
                    fmt_f64(r.local.g_ell_q2),
                    fmt_f64(r.local.g_ell_thouless.unwrap_or(f64::NAN)),
                    fmt_f64(r.local.gamma),
                ]),
                Err(_) => {
                    let mut row = vec![
                        fmt_f64(cfg.sigma_grid[si]),
                        derive_seed(cfg.master_seed, si as u64, ri as u64).to_string(),
                        "failed".to_string(),
                    ];
                    row.extend((3..REALIZATION_COLUMNS.len()).map(|_| nan()));
                    w.row(&row);
                }
            }
        }
    }
    w.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationSummary {
    pub sigma: f64,
    pub count: usize,
    pub mean_lambda_q2: f64,
    pub mad_lambda_q2: f64,
    pub mean_lambda_thouless: f64,
    /// Realizations with a finite Thouless length.
    pub thouless_count: usize,
    pub mean_g_ell_q2: f64,
    pub mean_gamma: f64,
    pub mean_abs_detuning_ell: f64,
}

/// Localization statistics of the selected mode, without the dynamics.
pub fn localization_stats(cfg: &SweepConfig) -> Result<Vec<LocalizationSummary>> {
    cfg.validate()?;
    let tasks = cfg.tasks();
    let results = map_tasks(cfg.threads, &tasks, |&(si, seed)| {
        local_mode_parameters(cfg, cfg.sigma_grid[si], seed)
    })?;
    let mut out = Vec::with_capacity(cfg.sigma_grid.len());
    for (si, &sigma) in cfg.sigma_grid.iter().enumerate() {
        let block = &results[si * cfg.realizations..(si + 1) * cfg.realizations];
        let ok: Vec<&LocalModeParams> = block.iter().filter_map(|r| r.as_ref().ok()).collect();
        check_failures(sigma, block.len() - ok.len(), block.len())?;
        let (mean_lambda_q2, mad_lambda_q2, _) =
            mean_mad_median(&ok.iter().map(|p| p.lambda_q2).collect::<Vec<_>>());
        let finite_th: Vec<f64> = ok
            .iter()
            .filter_map(|p| p.lambda_thouless)
            .filter(|l| l.is_finite())
            .collect();
        out.push(LocalizationSummary {
            sigma,
            count: ok.len(),
            mean_lambda_q2,
            mad_lambda_q2,
            mean_lambda_thouless: mean_of(finite_th.iter().copied()),
            thouless_count: finite_th.len(),
            mean_g_ell_q2: mean_of(ok.iter().map(|p| p.g_ell_q2)),
            mean_gamma: mean_of(ok.iter().map(|p| p.gamma)),
            mean_abs_detuning_ell: mean_of(ok.iter().map(|p| p.omega_ell.abs())),
        });
    }
    Ok(out)
}

pub fn localization_to_csv(rows: &[LocalizationSummary], meta: &str) -> String {
    let mut w = CsvWriter::new(
        "localization-stats",
        meta,
        &[
            "sigma",
            "count",
            "mean_lambda_q2",
            "mad_lambda_q2",
            "mean_lambda_thouless",
            "thouless_count",
            "mean_g_ell_q2",
            "mean_gamma",
            "mean_abs_detuning_ell",
        ],
    );
    for r in rows {
        w.row(&[
            fmt_f64(r.sigma),
            r.count.to_string(),
            fmt_f64(r.mean_lambda_q2),
            fmt_f64(r.mad_lambda_q2),
            fmt_f64(r.mean_lambda_thouless),
            r.thouless_count.to_string(),
            fmt_f64(r.mean_g_ell_q2),
            fmt_f64(r.mean_gamma),
            fmt_f64(r.mean_abs_detuning_ell),
        ]);
    }
    w.finish()
}
