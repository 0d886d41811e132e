//! Browser bindings for the disorder demo. The `run_*` functions carry the
//! logic and are usable natively; the `#[wasm_bindgen]` wrappers only convert
//! errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use cca_core::dynamics::{evolve_amplitude, TimeGrid, Trajectory};
use cca_core::ensemble::{extract_local_mode, run_realization, SweepConfig};
use cca_core::lattice::{
    build_field_hamiltonian, build_single_excitation_hamiltonian, sample_detunings, DisorderKind,
};
use cca_core::pheno::{alpha_pheno, n_from_nv, nv_analytic, PhenoParams};
use cca_core::spectral::{LocalSpectrum, Spectrum};
use wasm_bindgen::prelude::*;

/// Points handed to the canvas per curve.
const PLOT_POINTS: usize = 1500;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn config(pdf: &str, n_half: usize, t_end: f64) -> Result<SweepConfig, String> {
    let mut cfg = SweepConfig::desk();
    cfg.pdf = pdf.parse::<DisorderKind>().map_err(err)?;
    cfg.n_half = n_half;
    cfg.t_override = Some(t_end);
    Ok(cfg)
}

fn every_nth(len: usize) -> usize {
    len.div_ceil(PLOT_POINTS).max(1)
}

#[wasm_bindgen]
pub struct Simulation {
    times: Vec<f64>,
    population: Vec<f64>,
    pheno: Vec<f64>,
    n: f64,
    nv: f64,
    lambda: f64,
    g_ell: f64,
    gamma: f64,
    r: f64,
    n_predicted: f64,
}

#[wasm_bindgen]
impl Simulation {
    /// Sample times of the decimated curves.
    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    /// Exact `|α(t)|²`.
    #[wasm_bindgen(getter)]
    pub fn population(&self) -> Vec<f64> {
        self.population.clone()
    }

    /// `|α(t)|²` of the single-mode model built from this realization.
    #[wasm_bindgen(getter)]
    pub fn pheno(&self) -> Vec<f64> {
        self.pheno.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn n(&self) -> f64 {
        self.n
    }

    #[wasm_bindgen(getter)]
    pub fn nv(&self) -> f64 {
        self.nv
    }

    #[wasm_bindgen(getter)]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[wasm_bindgen(getter)]
    pub fn g_ell(&self) -> f64 {
        self.g_ell
    }

    #[wasm_bindgen(getter)]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[wasm_bindgen(getter)]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[wasm_bindgen(getter)]
    pub fn n_predicted(&self) -> f64 {
        self.n_predicted
    }
}

pub fn run_simulation(
    pdf: &str,
    sigma: f64,
    seed: u64,
    n_half: usize,
    t_end: f64,
) -> Result<Simulation, String> {
    let cfg = config(pdf, n_half, t_end)?;
    let result = run_realization(&cfg, sigma, seed).map_err(err)?;

    let d = sample_detunings(&cfg.spec(sigma).map_err(err)?, n_half, seed).map_err(err)?;
    let h = build_single_excitation_hamiltonian(&d, cfg.hopping, cfg.g).map_err(err)?;
    let spectrum = LocalSpectrum::new(&h).map_err(err)?;
    let grid = TimeGrid::new(t_end, result.dt).map_err(err)?;
    let traj = evolve_amplitude(&spectrum, &grid).map_err(err)?;

    let local = &result.local;
    let resonant = PhenoParams::from_amplitude_rate(local.g_ell_q2, local.gamma).map_err(err)?;
    let params = PhenoParams {
        omega_ell: local.omega_ell,
        ..resonant
    };
    let model = Trajectory::from_fn(grid, |t| alpha_pheno(t, &params)).map_err(err)?;
    let n_predicted = if resonant.g_ell > 0.0 {
        n_from_nv(nv_analytic(resonant.r()).map_err(err)?)
    } else {
        0.0
    };

    let step = every_nth(grid.samples());
    let pick = |v: Vec<f64>| v.into_iter().step_by(step).collect::<Vec<_>>();
    Ok(Simulation {
        times: pick(traj.times().collect()),
        population: pick(traj.population()),
        pheno: pick(model.population()),
        n: result.nm.n_rescaled,
        nv: result.nm.nv,
        lambda: local.lambda_q2,
        g_ell: local.g_ell_q2,
        gamma: local.gamma,
        r: resonant.r(),
        n_predicted,
    })
}

/// One disorder realization with the emitter at cavity 0.
#[wasm_bindgen]
pub fn simulate(
    pdf: &str,
    sigma: f64,
    seed: u32,
    n_half: u32,
    t_end: f64,
) -> Result<Simulation, JsError> {
    run_simulation(pdf, sigma, seed as u64, n_half as usize, t_end).map_err(|e| JsError::new(&e))
}

/// `[r₀, N_V₀, N₀, r₁, …]` for the resonant single-mode model.
pub fn run_nv_curve(r_max: f64, steps: usize) -> Result<Vec<f64>, String> {
    if !(r_max > 0.0) || steps < 2 {
        return Err("need r_max > 0 and at least 2 steps".into());
    }
    let mut out = Vec::with_capacity(3 * steps);
    for k in 0..steps {
        let r = r_max * (k + 1) as f64 / steps as f64;
        let nv = nv_analytic(r).map_err(err)?;
        out.extend([r, nv, n_from_nv(nv)]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn nv_curve(r_max: f64, steps: u32) -> Result<Vec<f64>, JsError> {
    run_nv_curve(r_max, steps as usize).map_err(|e| JsError::new(&e))
}

/// `|α(t)|²` of the resonant model at rate ratio `r`, time in units of `1/g_ℓ`.
pub fn run_pheno_trajectory(r: f64, t_end: f64, points: usize) -> Result<Vec<f64>, String> {
    if points < 2 || !(t_end > 0.0) {
        return Err("need t_end > 0 and at least 2 points".into());
    }
    let p = PhenoParams::resonant(1.0, r).map_err(err)?;
    Ok((0..points)
        .map(|k| alpha_pheno(t_end * k as f64 / (points - 1) as f64, &p).norm_sqr())
        .collect())
}

#[wasm_bindgen]
pub fn pheno_trajectory(r: f64, t_end: f64, points: u32) -> Result<Vec<f64>, JsError> {
    run_pheno_trajectory(r, t_end, points as usize).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub struct LocalMode {
    profile: Vec<f64>,
    detunings: Vec<f64>,
    ell: usize,
    omega: f64,
    lambda: f64,
}

#[wasm_bindgen]
impl LocalMode {
    /// `|φ_ℓ(n)|²` for `n = −N … N`.
    #[wasm_bindgen(getter)]
    pub fn profile(&self) -> Vec<f64> {
        self.profile.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn detunings(&self) -> Vec<f64> {
        self.detunings.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn ell(&self) -> usize {
        self.ell
    }

    #[wasm_bindgen(getter)]
    pub fn omega(&self) -> f64 {
        self.omega
    }

    #[wasm_bindgen(getter)]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

pub fn run_local_mode(
    pdf: &str,
    sigma: f64,
    seed: u64,
    n_half: usize,
) -> Result<LocalMode, String> {
    let cfg = config(pdf, n_half, 1.0)?;
    let d = sample_detunings(&cfg.spec(sigma).map_err(err)?, n_half, seed).map_err(err)?;
    let field =
        LocalSpectrum::new(&build_field_hamiltonian(&d, cfg.hopping).map_err(err)?).map_err(err)?;
    let local = extract_local_mode(&field, &cfg).map_err(err)?;
    let vector = field.mode_vector(local.ell).map_err(err)?;
    Ok(LocalMode {
        profile: vector.iter().map(|c| c * c).collect(),
        detunings: d.values().to_vec(),
        ell: local.ell,
        omega: local.omega_ell,
        lambda: local.lambda_q2,
    })
}

/// The field mode the emitter couples to most strongly, with its profile.
#[wasm_bindgen]
pub fn local_mode(pdf: &str, sigma: f64, seed: u32, n_half: u32) -> Result<LocalMode, JsError> {
    run_local_mode(pdf, sigma, seed as u64, n_half as usize).map_err(|e| JsError::new(&e))
}
