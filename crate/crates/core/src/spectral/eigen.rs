//! Dense real symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by implicit-shift QL
//! iterations (the EISPACK `tred2`/`tql2` scheme). Eigenvector components can
//! be accumulated for every row, or only for a handful of probe rows, which
//! turns the QL stage from O(n³) into O(n²). Single eigenvectors are then
//! recovered on demand by inverse iteration on the tridiagonal matrix.

use crate::error::{Error, Result};

/// Per-eigenvalue cap on QL sweeps.
const MAX_SWEEPS: usize = 60;

/// `P = I - beta v vᵀ`, acting on indices `0..v.len()`.
#[derive(Debug, Clone)]
struct Reflector {
    v: Vec<f64>,
    beta: f64,
}

impl Reflector {
    fn apply(&self, x: &mut [f64]) {
        let len = self.v.len();
        let f = self.beta * dot(&self.v, &x[..len]);
        for (xi, vi) in x[..len].iter_mut().zip(&self.v) {
            *xi -= f * vi;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `A = Q T Qᵀ` with `Q = P_{n-1} ⋯ P_2`.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `sub[i] = T[i+1][i]`.
    pub sub: Vec<f64>,
    /// In creation order (row `n-1` first).
    reflectors: Vec<Reflector>,
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `x ← Q x`.
    pub fn apply_q(&self, x: &mut [f64]) {
        for r in self.reflectors.iter().rev() {
            r.apply(x);
        }
    }

    /// `x ← Qᵀ x`.
    pub fn apply_qt(&self, x: &mut [f64]) {
        for r in &self.reflectors {
            r.apply(x);
        }
    }

    /// Row `row` of `Q`.
    pub fn q_row(&self, row: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.dim()];
        e[row] = 1.0;
        self.apply_qt(&mut e);
        e
    }

    pub fn norm_bound(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.sub[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.sub[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Unit eigenvector of `A` (original basis) for the converged eigenvalue
    /// `lambda`, by inverse iteration on `T` followed by `Q`.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.dim();
        if n == 1 {
            return vec![1.0];
        }
        let norm = self.norm_bound().max(f64::MIN_POSITIVE);
        let lu = ShiftedLu::factor(&self.diag, &self.sub, lambda, norm);
        // Deterministic start vector with no special structure.
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + ((i * 7919) % 113) as f64 / 113.0)
            .collect();
        normalize(&mut x);
        for _ in 0..8 {
            lu.solve(&mut x);
            normalize(&mut x);
            let residual = (0..n)
                .map(|i| {
                    let mut y = (self.diag[i] - lambda) * x[i];
                    if i > 0 {
                        y += self.sub[i - 1] * x[i - 1];
                    }
                    if i + 1 < n {
                        y += self.sub[i] * x[i + 1];
                    }
                    y.abs()
                })
                .fold(0.0, f64::max);
            if residual <= 1e-13 * norm {
                break;
            }
        }
        self.apply_q(&mut x);
        normalize(&mut x);
        x
    }
}

fn normalize(x: &mut [f64]) {
    let s = dot(x, x).sqrt();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}

/// Householder tridiagonalization of a dense row-major `n×n` symmetric matrix.
pub(crate) fn tridiagonalize(mut a: Vec<f64>, n: usize) -> Tridiagonal {
    assert_eq!(a.len(), n * n);
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut w = vec![0.0; n];
    for i in (2..n).rev() {
        let row = &a[i * n..i * n + i];
        if row[..i - 1].iter().all(|&x| x == 0.0) {
            continue; // row already tridiagonal
        }
        let scale = row.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let mut v: Vec<f64> = row.iter().map(|x| x / scale).collect();
        let norm = dot(&v, &v).sqrt();
        let alpha = if v[i - 1] > 0.0 { -norm } else { norm };
        v[i - 1] -= alpha;
        let beta = 2.0 / dot(&v, &v);

        // A₁ ← P A₁ P on the leading i×i block, as A₁ - v wᵀ - w vᵀ.
        for r in 0..i {
            w[r] = beta * dot(&a[r * n..r * n + i], &v);
        }
        let k = 0.5 * beta * dot(&v, &w[..i]);
        for r in 0..i {
            w[r] -= k * v[r];
        }
        for r in 0..i {
            let (vr, wr) = (v[r], w[r]);
            let dst = &mut a[r * n..r * n + i];
            for ((d, &vc), &wc) in dst.iter_mut().zip(&v).zip(&w[..i]) {
                *d -= vr * wc + wr * vc;
            }
        }
        for c in 0..i - 1 {
            a[i * n + c] = 0.0;
            a[c * n + i] = 0.0;
        }
        a[i * n + i - 1] = alpha * scale;
        a[(i - 1) * n + i] = alpha * scale;
        reflectors.push(Reflector { v, beta });
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    let sub = (1..n).map(|i| a[i * n + i - 1]).collect();
    Tridiagonal {
        diag,
        sub,
        reflectors,
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix.
///
/// `z` holds `n` contiguous blocks of `rows` entries; block `j` is column `j`
/// of the accumulated transformation restricted to the tracked rows. On
/// return `d` holds ascending eigenvalues and the blocks are permuted to
/// match.
pub(crate) fn ql_implicit(
    d: &mut Vec<f64>,
    sub: &[f64],
    z: &mut Vec<f64>,
    rows: usize,
) -> Result<()> {
    let n = d.len();
    assert_eq!(z.len(), n * rows);
    if n == 0 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(sub);

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::NoConvergence {
                        dim: n,
                        iterations: sweeps - 1,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (left, right) = z.split_at_mut((i + 1) * rows);
                    let zi = &mut left[i * rows..];
                    let zi1 = &mut right[..rows];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let h = *b;
                        *b = s * *a + c * h;
                        *a = c * *a - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    if order.iter().enumerate().any(|(i, &o)| i != o) {
        let sorted_d = order.iter().map(|&o| d[o]).collect();
        let mut sorted_z = Vec::with_capacity(z.len());
        for &o in &order {
            sorted_z.extend_from_slice(&z[o * rows..(o + 1) * rows]);
        }
        *d = sorted_d;
        *z = sorted_z;
    }
    Ok(())
}

/// Full decomposition: ascending eigenvalues and eigenvectors, block `k`
/// (contiguous, length `n`) being eigenvector `k`.
pub(crate) fn eigh_full(a: Vec<f64>, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let tri = tridiagonalize(a, n);
    let mut z = vec![0.0; n * n];
    for j in 0..n {
        let col = &mut z[j * n..(j + 1) * n];
        col[j] = 1.0;
        tri.apply_q(col);
    }
    // Block j currently holds column j of Q, i.e. rows 0..n of that column:
    // exactly the layout `ql_implicit` expects with rows = n.
    let mut d = tri.diag.clone();
    ql_implicit(&mut d, &tri.sub, &mut z, n)?;
    Ok((d, z))
}

/// Eigenvalues plus eigenvector components on the `probes` rows only.
/// Block `k` of the returned vector has `probes.len()` entries.
pub(crate) fn eigh_probed(
    a: Vec<f64>,
    n: usize,
    probes: &[usize],
) -> Result<(Vec<f64>, Vec<f64>, Tridiagonal)> {
    let tri = tridiagonalize(a, n);
    let rows = probes.len();
    let mut z = vec![0.0; n * rows];
    for (k, &p) in probes.iter().enumerate() {
        let q_row = tri.q_row(p);
        for (j, v) in q_row.into_iter().enumerate() {
            z[j * rows + k] = v;
        }
    }
    let mut d = tri.diag.clone();
    ql_implicit(&mut d, &tri.sub, &mut z, rows)?;
    Ok((d, z, tri))
}

/// LU with partial pivoting of `T - shift·I` (LAPACK `dgttrf` layout).
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(diag: &[f64], sub: &[f64], shift: f64, norm: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut dl = sub.to_vec();
        let mut du = sub.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = f64::EPSILON * norm;
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}
