//! Single-localized-mode model: the emitter is coherently coupled to one
//! field mode `ℓ` (strength `g_ℓ`) and dissipatively to the rest (rate `γ`).
//!
//! Everything analytic here is dimensionless in `r = γ/g_ℓ`; times returned
//! by [`first_maximum_time`] are in units of `1/g_ℓ`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::ensemble::{local_mode_parameters, SweepConfig};
use crate::error::{invalid, Result};
use crate::report::{fmt_f64, CsvWriter};
use crate::spectral::{ModeCouplings, Spectrum};

/// Detunings below this (units of J) count as exact resonance.
pub const RESONANCE_TOL: f64 = 1e-12;

/// Which localization length feeds `g_ℓ = C·g/√λ_ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LambdaKind {
    /// Participation ratio `λ^(2)`.
    EntropyQ2,
    /// Spectral (Thouless) length `λ̃`.
    Thouless,
}

impl LambdaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LambdaKind::EntropyQ2 => "q2",
            LambdaKind::Thouless => "thouless",
        }
    }

    /// Fitted prefactor `C` for this length.
    pub fn default_c(self) -> f64 {
        match self {
            LambdaKind::EntropyQ2 => 2.0,
            LambdaKind::Thouless => 1.5,
        }
    }
}

impl std::str::FromStr for LambdaKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "q2" | "entropy_q2" | "participation" => Ok(LambdaKind::EntropyQ2),
            "thouless" | "th" => Ok(LambdaKind::Thouless),
            other => Err(invalid(format!("unknown lambda_kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhenoParams {
    pub g_ell: f64,
    /// Markovian rate as it enters the master equation (population decays
    /// at `γ`, the amplitude at `γ/2` when `g_ℓ = 0`).
    pub gamma: f64,
    pub omega_ell: f64,
    pub omega_a: f64,
}

impl PhenoParams {
    /// Resonant model in the rotating frame (`ω_ℓ = ω_a = 0`).
    pub fn resonant(g_ell: f64, gamma: f64) -> Result<Self> {
        if !(g_ell >= 0.0) || !(gamma >= 0.0) {
            return Err(invalid("g_ell and gamma must be >= 0"));
        }
        Ok(Self {
            g_ell,
            gamma,
            omega_ell: 0.0,
            omega_a: 0.0,
        })
    }

    /// Resonant model from the rate recipe of [`effective_rate`], which is
    /// an amplitude rate: `α̇ = −γα` corresponds to a master-equation rate
    /// of `2γ`.
    pub fn from_amplitude_rate(g_ell: f64, gamma_amplitude: f64) -> Result<Self> {
        Self::resonant(g_ell, 2.0 * gamma_amplitude)
    }

    /// `r = γ/g_ℓ`; `+∞` when `g_ℓ = 0`.
    pub fn r(&self) -> f64 {
        if self.g_ell == 0.0 {
            f64::INFINITY
        } else {
            self.gamma / self.g_ell
        }
    }
}

/// Mode maximizing `|⟨φ_k|0⟩| / |ω_k − ω_a|`.
///
/// Modes within [`RESONANCE_TOL`] of `ω_a` (with non-zero overlap) beat any
/// finite ratio; among those the largest overlap wins.
pub fn select_local_mode<S: Spectrum + ?Sized>(basis: &S, omega_a: f64) -> usize {
    let mut best = 0usize;
    let mut best_key = (false, f64::NEG_INFINITY);
    for (k, (&w, &c)) in basis
        .frequencies()
        .iter()
        .zip(basis.site_overlaps())
        .enumerate()
    {
        let detuning = (w - omega_a).abs();
        let key = if detuning < RESONANCE_TOL && c != 0.0 {
            (true, c.abs())
        } else {
            (false, c.abs() / detuning.max(RESONANCE_TOL))
        };
        if (key.0 && !best_key.0) || (key.0 == best_key.0 && key.1 > best_key.1) {
            best = k;
            best_key = key;
        }
    }
    best
}

/// `g_ℓ = C·g/√λ_ℓ`.
pub fn effective_coupling(lambda_ell: f64, g: f64, c_constant: f64) -> Result<f64> {
    if !(lambda_ell >= 1.0) {
        return Err(invalid(format!(
            "localization length must be >= 1, got {lambda_ell}"
        )));
    }
    if lambda_ell.is_infinite() {
        return Ok(0.0);
    }
    Ok(c_constant * g / lambda_ell.sqrt())
}

/// `γ = (π/2g)·Σ g_k²` over modes `k ≠ ℓ` with `|ω_k − ω_a| ≤ g`, i.e. the
/// golden-rule rate with the density of states counted in a `±g` window.
///
/// This is the decay rate of the amplitude (`g²/2J` for the ordered ring);
/// see [`PhenoParams::from_amplitude_rate`].
pub fn effective_rate<S: Spectrum + ?Sized>(
    basis: &S,
    couplings: &ModeCouplings,
    ell: usize,
    omega_a: f64,
    g: f64,
) -> Result<f64> {
    if ell >= basis.dim() {
        return Err(invalid(format!("mode index {ell} out of range")));
    }
    if !(g > 0.0) {
        return Err(invalid("g must be > 0"));
    }
    let sum: f64 = basis
        .frequencies()
        .iter()
        .zip(&couplings.values)
        .enumerate()
        .filter(|&(k, (&w, _))| k != ell && (w - omega_a).abs() <= g)
        .map(|(_, (_, gk))| gk * gk)
        .sum();
    Ok(PI / (2.0 * g) * sum)
}

/// `sin(z)/z`, exact at 0.
fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Closed-form excitation amplitude
/// `α(t) = e^{−t(γ−2i(ω_ℓ+ω_a))/4}·[cos(Ωt/4) − (μ/Ω)·sin(Ωt/4)]`
/// with `μ = γ − 2i(ω_ℓ−ω_a)` and `Ω = √(16g_ℓ² − μ²)`.
///
/// Written with `sin(x)/x` so the critical point `Ω = 0` needs no special
/// case.
pub fn alpha_pheno(t: f64, p: &PhenoParams) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let mu = p.gamma - 2.0 * i * (p.omega_ell - p.omega_a);
    let omega = (Complex64::new(16.0 * p.g_ell * p.g_ell, 0.0) - mu * mu).sqrt();
    let x = omega * t / 4.0;
    let envelope = (-(t / 4.0) * (p.gamma - 2.0 * i * (p.omega_ell + p.omega_a))).exp();
    envelope * (x.cos() - mu * (t / 4.0) * sinc(x))
}

/// Time of the first local maximum of `|α|⁴` after `t = 0` for the resonant
/// model, in units of `1/g_ℓ`. For `r ≥ 4` this is the only maximum.
pub fn first_maximum_time(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(invalid(format!("r must be >= 0, got {r}")));
    }
    if r.is_infinite() {
        return Ok(f64::INFINITY);
    }
    // r = 4cos φ (oscillatory) or 4cosh ψ (overdamped); maxima sit at
    // phase 2φ (resp. 2ψ) of the Ωt/4 argument.
    Ok(if r < 4.0 {
        let delta = (16.0 - r * r).sqrt();
        8.0 * (r / 4.0).acos() / delta
    } else if r == 4.0 {
        2.0
    } else {
        let kappa = (r * r - 16.0).sqrt();
        8.0 * (r / 4.0).acosh() / kappa
    })
}

/// Analytic `N_V(r)` of the resonant model.
///
/// ```text
/// N_V = e^{−r t₀} / (e^{4πr/Δ} − 1)     0 ≤ r < 2√2
///       e^{−r t₀} / (1 − e^{−4πr/Δ})    2√2 ≤ r < 4
///       e^{−r t₀}                       r ≥ 4
/// ```
/// with `Δ = √(16 − r²)` and `t₀ = (4/Δ)·atan(2Δr/(r² − Δ²))` on the
/// principal branch (negative below `2√2`); above 4 the single-maximum time.
pub fn nv_analytic(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(invalid(format!("r must be >= 0, got {r}")));
    }
    if r == 0.0 {
        return Ok(f64::INFINITY);
    }
    if r.is_infinite() {
        return Ok(0.0);
    }
    if r >= 4.0 {
        return Ok((-r * first_maximum_time(r)?).exp());
    }
    let delta = (16.0 - r * r).sqrt();
    let denom = r * r - delta * delta;
    let theta = if denom == 0.0 {
        PI / 2.0
    } else {
        (2.0 * delta * r / denom).atan()
    };
    let t0 = 4.0 * theta / delta;
    let decay = 4.0 * PI * r / delta;
    let series = if r < 2.0 * SQRT_2 {
        1.0 / decay.exp_m1()
    } else {
        1.0 / -(-decay).exp_m1()
    };
    Ok((-r * t0).exp() * series)
}

/// `N = N_V/(N_V+1)`, with `+∞ ↦ 1`.
pub fn n_from_nv(nv: f64) -> f64 {
    if nv.is_infinite() {
        1.0
    } else {
        nv / (nv + 1.0)
    }
}

/// Predicted `N` for one ensemble-averaged parameter pair, `mean_gamma`
/// being the amplitude rate of [`effective_rate`].
pub fn n_predicted(mean_g_ell: f64, mean_gamma: f64) -> Result<f64> {
    let p = PhenoParams::from_amplitude_rate(mean_g_ell, mean_gamma)?;
    Ok(n_from_nv(nv_analytic(p.r())?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhenoCurvePoint {
    pub sigma: f64,
    pub mean_g_ell: f64,
    /// Amplitude rate; `r_bar` uses the master-equation rate `2·mean_gamma`.
    pub mean_gamma: f64,
    pub r_bar: f64,
    pub n_predicted: f64,
    pub lambda_kind: LambdaKind,
    pub c_constant: f64,
    /// Mean `|ω_ℓ − ω_a|`, reported but not used by the prediction.
    pub mean_abs_detuning: f64,
    pub count: usize,
}

impl PhenoCurvePoint {
    pub fn from_means(
        sigma: f64,
        mean_g_ell: f64,
        mean_gamma: f64,
        lambda_kind: LambdaKind,
        c_constant: f64,
        mean_abs_detuning: f64,
        count: usize,
    ) -> Result<Self> {
        let p = PhenoParams::from_amplitude_rate(mean_g_ell, mean_gamma)?;
        Ok(Self {
            sigma,
            mean_g_ell,
            mean_gamma,
            r_bar: p.r(),
            n_predicted: n_predicted(mean_g_ell, mean_gamma)?,
            lambda_kind,
            c_constant,
            mean_abs_detuning,
            count,
        })
    }
}

/// Average `g_ℓ` and `γ` over the configured realizations at each σ, then
/// evaluate the resonant analytic model at `r̄ = 2γ̄/ḡ_ℓ`.
///
/// Uses the same seeds as [`crate::ensemble::sweep`], so the parameters are
/// those of the very realizations the full model was run on.
pub fn predict_curve(cfg: &SweepConfig, lambda_kind: LambdaKind) -> Result<Vec<PhenoCurvePoint>> {
    cfg.validate()?;
    let c_constant = cfg.c_constant(lambda_kind);
    let tasks = cfg.tasks();
    let results = crate::ensemble::map_tasks(cfg.threads, &tasks, |&(si, seed)| {
        local_mode_parameters(cfg, cfg.sigma_grid[si], seed)
    })?;
    let mut points = Vec::with_capacity(cfg.sigma_grid.len());
    for (si, &sigma) in cfg.sigma_grid.iter().enumerate() {
        let block = &results[si * cfg.realizations..(si + 1) * cfg.realizations];
        let ok: Vec<_> = block.iter().filter_map(|r| r.as_ref().ok()).collect();
        crate::ensemble::check_failures(sigma, block.len() - ok.len(), block.len())?;
        let g_ells: Vec<f64> = ok.iter().filter_map(|p| p.g_ell(lambda_kind)).collect();
        crate::ensemble::check_failures(sigma, block.len() - g_ells.len(), block.len())?;
        let mean_g = mean(&g_ells);
        let mean_gamma = mean(&ok.iter().map(|p| p.gamma).collect::<Vec<_>>());
        let mean_det = mean(&ok.iter().map(|p| p.omega_ell.abs()).collect::<Vec<_>>());
        points.push(PhenoCurvePoint::from_means(
            sigma,
            mean_g,
            mean_gamma,
            lambda_kind,
            c_constant,
            mean_det,
            g_ells.len(),
        )?);
    }
    Ok(points)
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub fn curve_to_csv(points: &[PhenoCurvePoint], meta: &str) -> String {
    let mut w = CsvWriter::new(
        "pheno-curve",
        meta,
        &[
            "sigma",
            "mean_g_ell",
            "mean_gamma",
            "r_bar",
            "n_predicted",
            "lambda_kind",
            "c_constant",
            "mean_abs_detuning_ell",
        ],
    );
    for p in points {
        w.row(&[
            fmt_f64(p.sigma),
            fmt_f64(p.mean_g_ell),
            fmt_f64(p.mean_gamma),
            fmt_f64(p.r_bar),
            fmt_f64(p.n_predicted),
            p.lambda_kind.as_str().to_string(),
            fmt_f64(p.c_constant),
            fmt_f64(p.mean_abs_detuning),
        ]);
    }
    w.finish()
}

/// `r, nv, n` rows of the analytic model.
pub fn nv_curve_to_csv(rs: &[f64], meta: &str) -> Result<String> {
    let mut w = CsvWriter::new("nv-analytic", meta, &["r", "nv", "n"]);
    for &r in rs {
        let nv = nv_analytic(r)?;
        w.row(&[fmt_f64(r), fmt_f64(nv), fmt_f64(n_from_nv(nv))]);
    }
    Ok(w.finish())
}
