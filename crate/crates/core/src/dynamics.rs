//! Time evolution of the atomic excitation amplitude α(t).
//!
//! The production path is exact: α(t) = Σ_m |⟨atom|E_m⟩|² e^{-iE_m t} over the
//! eigenpairs of the atom-plus-field Hamiltonian. A fourth-order Runge–Kutta
//! integration of the amplitude equations in the field-mode basis is kept as
//! an independent cross-check.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::lattice::HamiltonianKind;
use crate::report::{fmt_f64, CsvWriter};
use crate::spectral::{ModeBasis, Spectrum};

/// Phases are recomputed from scratch every this many samples; in between
/// they advance by complex multiplication.
const PHASE_RESYNC: usize = 256;

/// Longest grid [`TimeGrid::new`] accepts.
pub const MAX_SAMPLES: usize = 4_000_000;

/// Modes with a smaller atom weight do not constrain the time step.
pub const STEP_WEIGHT_FLOOR: f64 = 1e-10;

/// Uniform grid `t_i = i·dt`, `i = 0..samples`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_end: f64,
    dt: f64,
    samples: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid(format!("dt must be > 0, got {dt}")));
        }
        if !(t_end >= dt) || !t_end.is_finite() {
            return Err(invalid(format!("t_end must be >= dt, got {t_end}")));
        }
        let steps = (t_end / dt + 1e-9).floor();
        if steps >= MAX_SAMPLES as f64 {
            return Err(invalid(format!(
                "grid of {steps} steps exceeds the limit of {MAX_SAMPLES} samples"
            )));
        }
        let samples = steps as usize + 1;
        Ok(Self { t_end, dt, samples })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    /// Time of the last sample (≤ `t_end`).
    pub fn last_time(&self) -> f64 {
        self.time(self.samples - 1)
    }
}

/// Sampling step for a realization whose Hamiltonian has spectral radius
/// `spread`: `min(0.1/J, π/(20·spread))`.
pub fn recommended_dt(spread: f64, hopping: f64) -> f64 {
    let base = 0.1 / hopping;
    if spread > 0.0 {
        base.min(std::f64::consts::PI / (20.0 * spread))
    } else {
        base
    }
}

/// Largest `|E_m|` among modes carrying atom weight `≥ STEP_WEIGHT_FLOOR`.
///
/// Heavy-tailed disorder produces far-detuned modes that barely touch the
/// atom; resolving them would only add wiggles of relative size `~g²/E²`.
pub fn weighted_spread<S: Spectrum + ?Sized>(basis: &S) -> Result<f64> {
    let overlaps = basis
        .atom_overlaps()
        .ok_or_else(|| invalid("weighted_spread needs an atom-plus-field spectrum"))?;
    Ok(basis
        .frequencies()
        .iter()
        .zip(overlaps)
        .filter(|&(_, &c)| c * c >= STEP_WEIGHT_FLOOR)
        .map(|(e, _)| e.abs())
        .fold(0.0, f64::max))
}

/// Sampled atomic amplitude α(t_i).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    alpha: Vec<Complex64>,
}

impl Trajectory {
    /// Wrap externally computed samples (`|α| ≤ 1`, `α(0) = 1`).
    pub fn new(grid: TimeGrid, alpha: Vec<Complex64>) -> Result<Self> {
        if alpha.len() != grid.samples() {
            return Err(invalid(format!(
                "expected {} samples, got {}",
                grid.samples(),
                alpha.len()
            )));
        }
        if (alpha[0] - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(invalid("trajectory must start at α(0) = 1"));
        }
        if let Some(i) = alpha.iter().position(|a| !(a.norm() <= 1.0 + 1e-9)) {
            return Err(invalid(format!("|α| > 1 at sample {i}")));
        }
        Ok(Self { grid, alpha })
    }

    /// Sample `f` on the grid.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let alpha = (0..grid.samples()).map(|i| f(grid.time(i))).collect();
        Self::new(grid, alpha)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid.samples()).map(|i| self.grid.time(i))
    }

    /// Excited-state population |α|².
    pub fn population(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Accessible-state volume |α|⁴.
    pub fn volume(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a.norm_sqr().powi(2)).collect()
    }

    /// CSV with columns `t, re_alpha, im_alpha, abs_alpha`.
    pub fn to_csv(&self, meta: &str) -> String {
        let mut w = CsvWriter::new(
            "trajectory",
            meta,
            &["t", "re_alpha", "im_alpha", "abs_alpha"],
        );
        for (i, a) in self.alpha.iter().enumerate() {
            w.row(&[
                fmt_f64(self.grid.time(i)),
                fmt_f64(a.re),
                fmt_f64(a.im),
                fmt_f64(a.norm()),
            ]);
        }
        w.finish()
    }
}

/// Exact α(t) from the atom-plus-field eigenpairs.
pub fn evolve_amplitude<S: Spectrum + ?Sized>(basis: &S, grid: &TimeGrid) -> Result<Trajectory> {
    if basis.kind() != HamiltonianKind::AtomPlusField {
        return Err(invalid(
            "evolve_amplitude needs an atom-plus-field spectrum",
        ));
    }
    let overlaps = basis
        .atom_overlaps()
        .expect("atom-plus-field spectra carry atom overlaps");
    let total: f64 = overlaps.iter().map(|c| c * c).sum();
    let modes: Vec<(f64, f64)> = basis
        .frequencies()
        .iter()
        .zip(overlaps)
        .map(|(&e, c)| (e, c * c / total))
        .filter(|&(_, w)| w > 0.0)
        .collect();

    let samples = grid.samples();
    let dt = grid.dt();
    let mut alpha = vec![Complex64::new(0.0, 0.0); samples];
    for &(energy, weight) in &modes {
        let step = Complex64::from_polar(1.0, -energy * dt);
        let mut phase = Complex64::new(1.0, 0.0);
        for (i, a) in alpha.iter_mut().enumerate() {
            if i % PHASE_RESYNC == 0 {
                phase = Complex64::from_polar(1.0, -energy * grid.time(i));
            }
            *a += weight * phase;
            phase *= step;
        }
    }
    alpha[0] = Complex64::new(1.0, 0.0);
    Ok(Trajectory { grid: *grid, alpha })
}

/// RK4 integration of `iα̇ = Σ g_k β_k`, `iβ̇_k = ω_k β_k + g_k α` from
/// `α = 1, β = 0`. Returns the trajectory and the total norm at each sample.
pub fn evolve_rk4_states(
    frequencies: &[f64],
    couplings: &[f64],
    grid: &TimeGrid,
) -> Result<(Trajectory, Vec<f64>)> {
    if frequencies.len() != couplings.len() {
        return Err(invalid("frequencies and couplings must be aligned"));
    }
    let w_max = frequencies.iter().fold(0.0_f64, |m, w| m.max(w.abs()));
    let dt = grid.dt();
    if w_max * dt > 0.1 {
        return Err(invalid(format!(
            "RK4 step too large: |ω_max|·dt = {} > 0.1",
            w_max * dt
        )));
    }
    let n = frequencies.len();
    let i = Complex64::new(0.0, 1.0);
    let deriv = |y: &[Complex64], out: &mut [Complex64]| {
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..n {
            s += couplings[k] * y[k + 1];
            out[k + 1] = -i * (frequencies[k] * y[k + 1] + couplings[k] * y[0]);
        }
        out[0] = -i * s;
    };

    let mut y = vec![Complex64::new(0.0, 0.0); n + 1];
    y[0] = Complex64::new(1.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (y.clone(), y.clone(), y.clone(), y.clone());
    let mut tmp = y.clone();
    let mut alpha = Vec::with_capacity(grid.samples());
    let mut norms = Vec::with_capacity(grid.samples());
    alpha.push(y[0]);
    norms.push(1.0);
    for _ in 1..grid.samples() {
        deriv(&y, &mut k1);
        for j in 0..=n {
            tmp[j] = y[j] + 0.5 * dt * k1[j];
        }
        deriv(&tmp, &mut k2);
        for j in 0..=n {
            tmp[j] = y[j] + 0.5 * dt * k2[j];
        }
        deriv(&tmp, &mut k3);
        for j in 0..=n {
            tmp[j] = y[j] + dt * k3[j];
        }
        deriv(&tmp, &mut k4);
        for j in 0..=n {
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        alpha.push(y[0]);
        norms.push(y.iter().map(|c| c.norm_sqr()).sum());
    }
    Ok((Trajectory { grid: *grid, alpha }, norms))
}

/// RK4 cross-check of [`evolve_amplitude`] in the field-mode basis.
pub fn evolve_rk4_oracle(
    frequencies: &[f64],
    couplings: &[f64],
    grid: &TimeGrid,
) -> Result<Trajectory> {
    evolve_rk4_states(frequencies, couplings, grid).map(|(t, _)| t)
}

/// Amplitudes on every index of the atom-plus-field layout at time `t`
/// (index 0 is the atom).
pub fn state_at(basis: &ModeBasis, t: f64) -> Result<Vec<Complex64>> {
    let atom = basis
        .atom_index()
        .ok_or_else(|| invalid("state_at needs an atom-plus-field basis"))?;
    let dim = basis.dim();
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    for (m, &e) in basis.frequencies().iter().enumerate() {
        let c = basis.component(m, atom) * Complex64::from_polar(1.0, -e * t);
        for (p, &v) in psi.iter_mut().zip(basis.vector(m)) {
            *p += v * c;
        }
    }
    Ok(psi)
}

/// Photon population on the two outermost cavities (−N and N) at time `t`.
pub fn edge_population(basis: &ModeBasis, t: f64) -> Result<f64> {
    let psi = state_at(basis, t)?;
    let n = basis.n_half() as i64;
    let center = basis.center_index() as i64;
    Ok(psi[(center - n) as usize].norm_sqr() + psi[(center + n) as usize].norm_sqr())
}

/// Qubit density matrix in the `(e, g)` basis. Hermitian by construction:
/// `ρ_ge` is always the conjugate of `ρ_eg`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    ee: f64,
    eg: Complex64,
    gg: f64,
}

impl QubitState {
    pub fn new(ee: f64, eg: Complex64, gg: f64) -> Result<Self> {
        let s = Self { ee, eg, gg };
        if (s.trace() - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("trace is {}, expected 1", s.trace())));
        }
        if ee < -1e-12 || gg < -1e-12 || s.determinant() < -1e-12 {
            return Err(invalid("density matrix is not positive semidefinite"));
        }
        Ok(s)
    }

    pub fn excited() -> Self {
        Self {
            ee: 1.0,
            eg: Complex64::new(0.0, 0.0),
            gg: 0.0,
        }
    }

    pub fn ground() -> Self {
        Self {
            ee: 0.0,
            eg: Complex64::new(0.0, 0.0),
            gg: 1.0,
        }
    }

    /// `|+⟩⟨+|` with `|+⟩ = (|e⟩ + |g⟩)/√2`.
    pub fn plus() -> Self {
        Self {
            ee: 0.5,
            eg: Complex64::new(0.5, 0.0),
            gg: 0.5,
        }
    }

    pub fn ee(&self) -> f64 {
        self.ee
    }
    pub fn eg(&self) -> Complex64 {
        self.eg
    }
    pub fn ge(&self) -> Complex64 {
        self.eg.conj()
    }
    pub fn gg(&self) -> f64 {
        self.gg
    }

    pub fn trace(&self) -> f64 {
        self.ee + self.gg
    }

    pub fn determinant(&self) -> f64 {
        self.ee * self.gg - self.eg.norm_sqr()
    }
}

/// Amplitude-damping map fixed by α:
/// `ρ_ee → |α|²ρ_ee`, `ρ_eg → αρ_eg`, `ρ_gg → (1−|α|²)ρ_ee + ρ_gg`.
pub fn apply_channel(initial: &QubitState, alpha: Complex64) -> Result<QubitState> {
    let p = alpha.norm_sqr();
    if !(p <= 1.0) {
        return Err(invalid(format!("|α| = {} exceeds 1", alpha.norm())));
    }
    let ee = p * initial.ee;
    Ok(QubitState {
        ee,
        eg: alpha * initial.eg,
        gg: initial.gg + (initial.ee - ee),
    })
}

/// Time at which an ordered weak-coupling emitter has released
/// `released_fraction` of its excitation: `-ln(1-f)·J/g²`.
pub fn emission_horizon(g: f64, hopping: f64, released_fraction: f64) -> Result<f64> {
    if !(released_fraction > 0.0 && released_fraction < 1.0) {
        return Err(invalid(format!(
            "released fraction must lie in (0, 1), got {released_fraction}"
        )));
    }
    if !(g > 0.0 && hopping > 0.0) {
        return Err(invalid("g and J must be > 0"));
    }
    Ok(-(1.0 - released_fraction).ln() * hopping / (g * g))
}

/// Smallest half-size `N` keeping the light cone (speed 2J) inside the
/// array up to time `t_end`: `ceil(margin·2J·T)`.
pub fn min_array_half_size(t_end: f64, hopping: f64, margin: f64) -> Result<usize> {
    if !(t_end > 0.0) {
        return Err(invalid(format!("T must be > 0, got {t_end}")));
    }
    if !(margin >= 1.0) {
        return Err(invalid(format!("margin must be >= 1, got {margin}")));
    }
    let x = margin * 2.0 * hopping * t_end;
    // absorb representation error such as 1.1 * 400 = 440.00000000000006
    let r = x.round();
    let n = if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r
    } else {
        x.ceil()
    };
    Ok(n as usize)
}
