//! Diagonalization of the lattice Hamiltonians and the per-mode quantities
//! derived from it: couplings to the emitter, localization lengths and the
//! local density of states.

mod eigen;

use crate::error::{invalid, Error, Result};
use crate::lattice::{HamiltonianKind, HamiltonianMatrix};

/// Degenerate pairs closer than this (units of J) are dropped from the
/// Thouless sum.
pub const THOULESS_DEGENERACY_TOL: f64 = 1e-13;

/// Common read access to a diagonalized Hamiltonian.
pub trait Spectrum {
    fn kind(&self) -> HamiltonianKind;
    fn dim(&self) -> usize;
    fn n_half(&self) -> usize;
    /// Ascending eigenfrequencies.
    fn frequencies(&self) -> &[f64];
    /// `⟨cavity 0|φ_k⟩` for every mode `k`.
    fn site_overlaps(&self) -> &[f64];
    /// `⟨atom|E_k⟩` for every mode, `None` for a field-only spectrum.
    fn atom_overlaps(&self) -> Option<&[f64]>;
    /// Full unit eigenvector of mode `k` in the Hamiltonian's index layout.
    fn mode_vector(&self, k: usize) -> Result<Vec<f64>>;

    /// Largest |eigenvalue|.
    fn spectral_radius(&self) -> f64 {
        self.frequencies().iter().fold(0.0, |m, w| m.max(w.abs()))
    }
}

/// Fix the sign of a unit vector: largest-magnitude component positive,
/// ties resolved towards the lowest index.
fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Complete eigendecomposition with all eigenvectors.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    kind: HamiltonianKind,
    n_half: usize,
    dim: usize,
    frequencies: Vec<f64>,
    /// Mode-major: `vectors[k * dim + i] = ⟨i|φ_k⟩`.
    vectors: Vec<f64>,
    center_index: usize,
    atom_index: Option<usize>,
    site_overlaps: Vec<f64>,
    atom_overlaps: Option<Vec<f64>>,
}

impl ModeBasis {
    pub fn center_index(&self) -> usize {
        self.center_index
    }

    pub fn atom_index(&self) -> Option<usize> {
        self.atom_index
    }

    /// Component `⟨i|φ_k⟩`.
    pub fn component(&self, k: usize, i: usize) -> f64 {
        self.vectors[k * self.dim + i]
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }
}

impl Spectrum for ModeBasis {
    fn kind(&self) -> HamiltonianKind {
        self.kind
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn n_half(&self) -> usize {
        self.n_half
    }
    fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }
    fn site_overlaps(&self) -> &[f64] {
        &self.site_overlaps
    }
    fn atom_overlaps(&self) -> Option<&[f64]> {
        self.atom_overlaps.as_deref()
    }
    fn mode_vector(&self, k: usize) -> Result<Vec<f64>> {
        if k >= self.dim {
            return Err(invalid(format!("mode index {k} out of range")));
        }
        Ok(self.vector(k).to_vec())
    }
}

/// Eigen-decomposition of a dense symmetric row-major `n×n` matrix:
/// ascending eigenvalues and eigenvectors, block `k` of the second vector
/// (length `n`) being eigenvector `k`.
pub fn symmetric_eigen(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != n * n || n == 0 {
        return Err(invalid(format!(
            "expected a non-empty {n}x{n} matrix, got {} entries",
            a.len()
        )));
    }
    for i in 0..n {
        for j in 0..i {
            if a[i * n + j] != a[j * n + i] {
                return Err(invalid(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let (values, mut vectors) = eigen::eigh_full(a.to_vec(), n)?;
    for k in 0..n {
        canonical_sign(&mut vectors[k * n..(k + 1) * n]);
    }
    Ok((values, vectors))
}

/// Full diagonalization: eigenvalues ascending, orthonormal eigenvectors with
/// a fixed sign convention.
pub fn diagonalize(h: &HamiltonianMatrix) -> Result<ModeBasis> {
    let dim = h.dim();
    let (frequencies, mut vectors) = eigen::eigh_full(h.to_dense(), dim)?;
    for k in 0..dim {
        canonical_sign(&mut vectors[k * dim..(k + 1) * dim]);
    }
    let center_index = h.center_index();
    let site_overlaps = (0..dim).map(|k| vectors[k * dim + center_index]).collect();
    let atom_overlaps = h
        .atom_index()
        .map(|a| (0..dim).map(|k| vectors[k * dim + a]).collect());
    Ok(ModeBasis {
        kind: h.kind(),
        n_half: h.n_half(),
        dim,
        frequencies,
        vectors,
        center_index,
        atom_index: h.atom_index(),
        site_overlaps,
        atom_overlaps,
    })
}

/// Eigenvalues plus the eigenvector components on cavity 0 (and on the atom,
/// when present). Individual eigenvectors are rebuilt on request.
///
/// This is what the ensemble uses: per realization only one full mode
/// vector is ever needed. Overlap signs are whatever the QL sweep produced;
/// every derived quantity depends on squares or on sign-invariant sums.
#[derive(Debug, Clone)]
pub struct LocalSpectrum {
    kind: HamiltonianKind,
    n_half: usize,
    frequencies: Vec<f64>,
    site_overlaps: Vec<f64>,
    atom_overlaps: Option<Vec<f64>>,
    tridiagonal: eigen::Tridiagonal,
}

impl LocalSpectrum {
    pub fn new(h: &HamiltonianMatrix) -> Result<Self> {
        let dim = h.dim();
        let mut probes = vec![h.center_index()];
        if let Some(a) = h.atom_index() {
            probes.push(a);
        }
        let (frequencies, z, tridiagonal) = eigen::eigh_probed(h.to_dense(), dim, &probes)?;
        let rows = probes.len();
        let site_overlaps = (0..dim).map(|k| z[k * rows]).collect();
        let atom_overlaps = (rows == 2).then(|| (0..dim).map(|k| z[k * rows + 1]).collect());
        Ok(Self {
            kind: h.kind(),
            n_half: h.n_half(),
            frequencies,
            site_overlaps,
            atom_overlaps,
            tridiagonal,
        })
    }
}

impl Spectrum for LocalSpectrum {
    fn kind(&self) -> HamiltonianKind {
        self.kind
    }
    fn dim(&self) -> usize {
        self.frequencies.len()
    }
    fn n_half(&self) -> usize {
        self.n_half
    }
    fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }
    fn site_overlaps(&self) -> &[f64] {
        &self.site_overlaps
    }
    fn atom_overlaps(&self) -> Option<&[f64]> {
        self.atom_overlaps.as_deref()
    }
    fn mode_vector(&self, k: usize) -> Result<Vec<f64>> {
        let w = *self
            .frequencies
            .get(k)
            .ok_or_else(|| invalid(format!("mode index {k} out of range")))?;
        let mut v = self.tridiagonal.eigenvector(w);
        canonical_sign(&mut v);
        Ok(v)
    }
}

/// Per-mode atom couplings `g_k = g·⟨0|φ_k⟩`, aligned with the mode order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCouplings {
    pub values: Vec<f64>,
}

impl ModeCouplings {
    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|g| g * g).sum()
    }
}

pub fn coupling_strengths<S: Spectrum + ?Sized>(basis: &S, g: f64) -> ModeCouplings {
    ModeCouplings {
        values: basis.site_overlaps().iter().map(|c| g * c).collect(),
    }
}

/// Generalized-entropy localization length of a normalized state,
/// `λ^(q) = (Σ|c_n|^{2q})^{1/(1-q)}`; `q = 1` is the information length
/// `exp(-Σ p ln p)` and `q = 2` the participation ratio.
pub fn localization_length_entropy(components: &[f64], q: f64) -> Result<f64> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(invalid(format!("q must be finite and > 0, got {q}")));
    }
    let norm: f64 = components.iter().map(|c| c * c).sum();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(invalid(format!("state is not normalized (Σ|c|² = {norm})")));
    }
    let probs = components.iter().map(|c| c * c);
    if (q - 1.0).abs() < 1e-12 {
        let entropy: f64 = probs.filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum();
        return Ok(entropy.exp());
    }
    let moment: f64 = if q == 2.0 {
        probs.map(|p| p * p).sum()
    } else {
        probs.map(|p| p.powf(q)).sum()
    };
    Ok(moment.powf(1.0 / (1.0 - q)))
}

/// Thouless localization length from the spectrum alone,
/// `λ̃_k = 2N / Σ_{j≠k} log|ω_k − ω_j|`, with `2N = modes − 1`.
///
/// Near-degenerate partners are skipped; if more than 1% of the terms are
/// skipped the result is undefined. A non-positive sum means the mode is not
/// localized on the scale of the array and maps to `+∞`.
pub fn thouless_length(frequencies: &[f64], k: usize) -> Result<f64> {
    let m = frequencies.len();
    if m < 2 {
        return Err(invalid("Thouless length needs at least two modes"));
    }
    let wk = *frequencies
        .get(k)
        .ok_or_else(|| invalid(format!("mode index {k} out of range")))?;
    let mut sum = 0.0;
    let mut skipped = 0usize;
    for (j, &wj) in frequencies.iter().enumerate() {
        if j == k {
            continue;
        }
        let gap = (wk - wj).abs();
        if gap < THOULESS_DEGENERACY_TOL {
            skipped += 1;
        } else {
            sum += gap.ln();
        }
    }
    let terms = m - 1;
    if skipped as f64 > 0.01 * terms as f64 {
        return Err(Error::Undefined(format!(
            "Thouless length of mode {k}: {skipped} of {terms} pairs degenerate"
        )));
    }
    if sum <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(terms as f64 / sum)
}

pub fn localization_length_thouless<S: Spectrum + ?Sized>(basis: &S, k: usize) -> Result<f64> {
    thouless_length(basis.frequencies(), k)
}

/// Mode count within `±half_window` of `omega`, divided by the window width.
pub fn density_of_states_at<S: Spectrum + ?Sized>(
    basis: &S,
    omega: f64,
    half_window: f64,
) -> Result<f64> {
    if !(half_window > 0.0) {
        return Err(invalid(format!(
            "half_window must be > 0, got {half_window}"
        )));
    }
    let count = basis
        .frequencies()
        .iter()
        .filter(|&&w| (w - omega).abs() <= half_window)
        .count();
    Ok(count as f64 / (2.0 * half_window))
}
