//! Disorder realizations and single-excitation Hamiltonians of the atom plus
//! cavity ring.
//!
//! Energies are in units of the hopping rate `J`. The atom frequency is gauged
//! to zero (rotating frame), so cavity diagonal entries are the detunings
//! `δ_n` themselves.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};

use crate::error::{invalid, Result};

/// Family of the detuning distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DisorderKind {
    Gaussian,
    Cauchy,
}

impl DisorderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DisorderKind::Gaussian => "gaussian",
            DisorderKind::Cauchy => "cauchy",
        }
    }
}

impl std::str::FromStr for DisorderKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" | "normal" => Ok(DisorderKind::Gaussian),
            "cauchy" | "lorentzian" => Ok(DisorderKind::Cauchy),
            other => Err(invalid(format!("unknown pdf '{other}'"))),
        }
    }
}

/// Statistical description of the static disorder.
///
/// `sigma` is the Gaussian standard deviation. For the Cauchy family the
/// scale `gamma_width` is fixed by requiring both laws to put the same
/// probability mass on `[-2σ, 2σ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderSpec {
    pdf: DisorderKind,
    sigma: f64,
    gamma_width: f64,
}

impl DisorderSpec {
    pub fn new(pdf: DisorderKind, sigma: f64) -> Result<Self> {
        let gamma_width = cauchy_width_from_sigma(sigma)?;
        Ok(Self {
            pdf,
            sigma,
            gamma_width,
        })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(DisorderKind::Gaussian, sigma)
    }

    pub fn cauchy(sigma: f64) -> Result<Self> {
        Self::new(DisorderKind::Cauchy, sigma)
    }

    pub fn pdf(&self) -> DisorderKind {
        self.pdf
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Cauchy scale Γ derived from σ (reported for both families).
    pub fn gamma_width(&self) -> f64 {
        self.gamma_width
    }

    /// Scale parameter actually used when sampling.
    pub fn scale(&self) -> f64 {
        match self.pdf {
            DisorderKind::Gaussian => self.sigma,
            DisorderKind::Cauchy => self.gamma_width,
        }
    }

    /// Probability density at `delta`.
    pub fn density(&self, delta: f64) -> f64 {
        match self.pdf {
            DisorderKind::Gaussian => {
                let s = self.sigma;
                (-(delta * delta) / (2.0 * s * s)).exp() / ((2.0 * PI).sqrt() * s)
            }
            DisorderKind::Cauchy => {
                let g = self.gamma_width;
                g / (PI * (g * g + delta * delta))
            }
        }
    }
}

/// Cauchy width matching the Gaussian mass on `[-2σ, 2σ]`:
/// `Γ = 2σ·cot[(π/2)·erf(√2)] ≈ 0.1432σ`.
pub fn cauchy_width_from_sigma(sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid(format!(
            "sigma must be finite and >= 0, got {sigma}"
        )));
    }
    let angle = FRAC_PI_2 * libm::erf(std::f64::consts::SQRT_2);
    Ok(2.0 * sigma / angle.tan())
}

/// One disorder realization: detunings `δ_n` for `n = -N..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetuningVector {
    values: Vec<f64>,
    seed: u64,
    spec: DisorderSpec,
}

impl DetuningVector {
    /// Wrap explicit detunings (length must be odd).
    pub fn from_values(values: Vec<f64>, spec: DisorderSpec) -> Result<Self> {
        if values.len().is_multiple_of(2) {
            return Err(invalid(format!(
                "detuning vector must have odd length 2N+1, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("detunings must be finite"));
        }
        Ok(Self {
            values,
            seed: 0,
            spec,
        })
    }

    /// All-zero detunings, i.e. the ordered ring.
    pub fn uniform(n_half: usize) -> Self {
        Self {
            values: vec![0.0; 2 * n_half + 1],
            seed: 0,
            spec: DisorderSpec::gaussian(0.0).expect("zero width is valid"),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spec(&self) -> &DisorderSpec {
        &self.spec
    }

    /// Array half-size `N` (the ring has `2N+1` cavities).
    pub fn n_half(&self) -> usize {
        self.values.len() / 2
    }

    pub fn sites(&self) -> usize {
        self.values.len()
    }

    /// Detuning of cavity `n` with `n` in `-N..=N`.
    pub fn at(&self, n: i64) -> f64 {
        self.values[(n + self.n_half() as i64) as usize]
    }
}

/// Draw `2·n_half+1` i.i.d. detunings; deterministic in `(spec, n_half, seed)`.
pub fn sample_detunings(spec: &DisorderSpec, n_half: usize, seed: u64) -> Result<DetuningVector> {
    if n_half < 1 {
        return Err(invalid("n_half must be >= 1"));
    }
    let len = 2 * n_half + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = spec.scale();
    let values = match spec.pdf {
        DisorderKind::Gaussian => (0..len)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect(),
        DisorderKind::Cauchy => (0..len)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                scale * (PI * (u - 0.5)).tan()
            })
            .collect(),
    };
    // zero width: exact +0.0 entries, no signed zeros
    let values = if scale == 0.0 { vec![0.0; len] } else { values };
    Ok(DetuningVector {
        values,
        seed,
        spec: *spec,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianKind {
    FieldOnly,
    AtomPlusField,
}

/// Real symmetric sparse matrix in the single-excitation sector.
///
/// Layout: for `FieldOnly` cavity `n` sits at index `n + N`; for
/// `AtomPlusField` the atom is index 0 and cavity `n` sits at `n + N + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    kind: HamiltonianKind,
    n_half: usize,
    diagonal: Vec<f64>,
    /// Upper-triangle off-diagonal entries `(i, j, value)` with `i < j`.
    off_diagonal: Vec<(usize, usize, f64)>,
}

impl HamiltonianMatrix {
    pub fn kind(&self) -> HamiltonianKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn n_half(&self) -> usize {
        self.n_half
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[(usize, usize, f64)] {
        &self.off_diagonal
    }

    /// Index of cavity 0 (the emitter's cavity).
    pub fn center_index(&self) -> usize {
        match self.kind {
            HamiltonianKind::FieldOnly => self.n_half,
            HamiltonianKind::AtomPlusField => self.n_half + 1,
        }
    }

    pub fn atom_index(&self) -> Option<usize> {
        match self.kind {
            HamiltonianKind::FieldOnly => None,
            HamiltonianKind::AtomPlusField => Some(0),
        }
    }

    /// Index of cavity `n`, `n` in `-N..=N`.
    pub fn site_index(&self, n: i64) -> usize {
        (self.center_index() as i64 + n) as usize
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diagonal[i];
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.off_diagonal
            .iter()
            .filter(|&&(r, c, _)| r == a && c == b)
            .map(|&(_, _, v)| v)
            .sum()
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut a = vec![0.0; n * n];
        for (i, &d) in self.diagonal.iter().enumerate() {
            a[i * n + i] = d;
        }
        for &(i, j, v) in &self.off_diagonal {
            a[i * n + j] += v;
            a[j * n + i] += v;
        }
        a
    }

    /// Gershgorin bound on the spectral radius.
    pub fn spectral_radius_bound(&self) -> f64 {
        let mut row = self.diagonal.iter().map(|d| d.abs()).collect::<Vec<_>>();
        for &(i, j, v) in &self.off_diagonal {
            row[i] += v.abs();
            row[j] += v.abs();
        }
        row.into_iter().fold(0.0, f64::max)
    }
}

fn ring_entries(
    detunings: &DetuningVector,
    hopping: f64,
    offset: usize,
) -> Vec<(usize, usize, f64)> {
    let sites = detunings.sites();
    let mut entries = Vec::with_capacity(sites);
    for s in 0..sites - 1 {
        entries.push((offset + s, offset + s + 1, -hopping));
    }
    // Cyclic closure between cavities -N and N. For a 2-site ring this would
    // double the bond, but 2N+1 >= 3 always.
    if sites >= 3 {
        entries.push((offset, offset + sites - 1, -hopping));
    }
    entries
}

/// Field-only Hamiltonian: diagonal `δ_n`, hopping `-J` with cyclic closure.
pub fn build_field_hamiltonian(
    detunings: &DetuningVector,
    hopping: f64,
) -> Result<HamiltonianMatrix> {
    if !(hopping > 0.0) {
        return Err(invalid(format!("hopping J must be > 0, got {hopping}")));
    }
    Ok(HamiltonianMatrix {
        kind: HamiltonianKind::FieldOnly,
        n_half: detunings.n_half(),
        diagonal: detunings.values().to_vec(),
        off_diagonal: ring_entries(detunings, hopping, 0),
    })
}

/// Atom plus field: the ring block plus an atom row (diagonal 0) coupled to
/// cavity 0 with strength `g`.
pub fn build_single_excitation_hamiltonian(
    detunings: &DetuningVector,
    hopping: f64,
    coupling: f64,
) -> Result<HamiltonianMatrix> {
    if !(hopping > 0.0) {
        return Err(invalid(format!("hopping J must be > 0, got {hopping}")));
    }
    if !(coupling >= 0.0) {
        return Err(invalid(format!("coupling g must be >= 0, got {coupling}")));
    }
    let n_half = detunings.n_half();
    let mut diagonal = Vec::with_capacity(detunings.sites() + 1);
    diagonal.push(0.0);
    diagonal.extend_from_slice(detunings.values());
    let mut off_diagonal = vec![(0, n_half + 1, coupling)];
    off_diagonal.extend(ring_entries(detunings, hopping, 1));
    Ok(HamiltonianMatrix {
        kind: HamiltonianKind::AtomPlusField,
        n_half,
        diagonal,
        off_diagonal,
    })
}

/// Single cavity (N = 0) coupled to the atom; only used for small analytic checks.
pub fn single_cavity_hamiltonian(detuning: f64, coupling: f64) -> HamiltonianMatrix {
    HamiltonianMatrix {
        kind: HamiltonianKind::AtomPlusField,
        n_half: 0,
        diagonal: vec![0.0, detuning],
        off_diagonal: vec![(0, 1, coupling)],
    }
}
