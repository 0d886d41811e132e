use std::f64::consts::{PI, SQRT_2};

use cca_core::dynamics::{TimeGrid, Trajectory};
use cca_core::lattice::HamiltonianKind;
use cca_core::nonmarkov::analyze;
use cca_core::pheno::{
    alpha_pheno, effective_rate, first_maximum_time, n_from_nv, nv_analytic, PhenoParams,
};
use cca_core::spectral::{ModeCouplings, Spectrum};
use num_complex::Complex64;

type C = Complex64;

/// Classic RK4 for `ẏ = f(t, y)` on a complex vector.
fn rk4<F: Fn(f64, &[C]) -> Vec<C>>(f: F, y0: Vec<C>, dt: f64, steps: usize) -> Vec<Vec<C>> {
    let mut y = y0;
    let mut out = vec![y.clone()];
    let add =
        |a: &[C], k: &[C], h: f64| a.iter().zip(k).map(|(x, d)| x + d * h).collect::<Vec<_>>();
    for i in 0..steps {
        let t = i as f64 * dt;
        let k1 = f(t, &y);
        let k2 = f(t + dt / 2.0, &add(&y, &k1, dt / 2.0));
        let k3 = f(t + dt / 2.0, &add(&y, &k2, dt / 2.0));
        let k4 = f(t + dt, &add(&y, &k3, dt));
        for j in 0..y.len() {
            y[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0);
        }
        out.push(y.clone());
    }
    out
}

/// Lindblad evolution of emitter + one mode in `{|e0⟩, |g1⟩, |g0⟩}` with
/// `L = √γ |g0⟩⟨e0|`, from `|+⟩⊗|0⟩`. Returns `2ρ_{e0,g0}`.
fn master_equation_alpha(p: &PhenoParams, dt: f64, steps: usize) -> Vec<C> {
    let i = C::new(0.0, 1.0);
    let mut h = [[C::new(0.0, 0.0); 3]; 3];
    h[0][0] = C::new(p.omega_a, 0.0);
    h[1][1] = C::new(p.omega_ell, 0.0);
    h[0][1] = C::new(p.g_ell, 0.0);
    h[1][0] = C::new(p.g_ell, 0.0);
    let gamma = p.gamma;
    let f = |_t: f64, y: &[C]| -> Vec<C> {
        let rho = |a: usize, b: usize| y[3 * a + b];
        let mut d = vec![C::new(0.0, 0.0); 9];
        for a in 0..3 {
            for b in 0..3 {
                let mut comm = C::new(0.0, 0.0);
                #[allow(clippy::needless_range_loop)]
                for k in 0..3 {
                    comm += h[a][k] * rho(k, b) - rho(a, k) * h[k][b];
                }
                let mut v = -i * comm;
                // L ρ L† puts ρ_{e0,e0} on |g0⟩⟨g0|; −½{L†L, ρ} damps row/column e0
                if a == 2 && b == 2 {
                    v += gamma * rho(0, 0);
                }
                if a == 0 {
                    v -= 0.5 * gamma * rho(a, b);
                }
                if b == 0 {
                    v -= 0.5 * gamma * rho(a, b);
                }
                d[3 * a + b] = v;
            }
        }
        d
    };
    let mut y0 = vec![C::new(0.0, 0.0); 9];
    for (a, b) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
        y0[3 * a + b] = C::new(0.5, 0.0);
    }
    rk4(f, y0, dt, steps).iter().map(|y| 2.0 * y[2]).collect()
}

#[test]
fn closed_form_solves_master_equation() {
    let dt = 2e-3;
    let steps = 20_000;
    let cases = [
        (0.5, 0.5, 0.0, 0.0),
        (0.3, 1.7, 0.0, 0.0),
        (0.2, 0.8, 0.0, 0.0),
        (0.4, 0.3, 0.6, 0.1),
        (0.1, 0.05, -0.3, 0.2),
    ];
    for (g_ell, gamma, omega_ell, omega_a) in cases {
        let p = PhenoParams {
            g_ell,
            gamma,
            omega_ell,
            omega_a,
        };
        let me = master_equation_alpha(&p, dt, steps);
        for (k, a) in me.iter().enumerate().step_by(50) {
            let t = k as f64 * dt;
            let closed = alpha_pheno(t, &p);
            if omega_ell == 0.0 && omega_a == 0.0 {
                assert!((closed - a).norm() < 1e-9, "{p:?} t={t}: {closed} vs {a}");
            } else {
                // the two differ by a global phase only
                assert!((closed.norm() - a.norm()).abs() < 1e-9, "{p:?} t={t}");
            }
        }
    }
}

#[test]
fn markov_pair_uses_amplitude_rate() {
    // α̇ = −i g_ℓ β − γα, β̇ = −i g_ℓ α with γ the amplitude rate
    let (g_ell, gamma_amp) = (0.4, 0.4);
    let i = C::new(0.0, 1.0);
    let f = |_t: f64, y: &[C]| vec![-i * g_ell * y[1] - gamma_amp * y[0], -i * g_ell * y[0]];
    let dt = 1e-3;
    let traj = rk4(f, vec![C::new(1.0, 0.0), C::new(0.0, 0.0)], dt, 40_000);
    let p = PhenoParams::from_amplitude_rate(g_ell, gamma_amp).unwrap();
    assert_eq!(p.r(), 2.0);
    for (k, y) in traj.iter().enumerate().step_by(100) {
        let t = k as f64 * dt;
        assert!((alpha_pheno(t, &p) - y[0]).norm() < 1e-8, "t={t}");
    }
}

#[test]
fn bare_decay_is_exponential() {
    let gamma = 0.3;
    let p = PhenoParams::resonant(0.0, gamma).unwrap();
    let f = |_t: f64, y: &[C]| vec![-0.5 * gamma * y[0]];
    let traj = rk4(f, vec![C::new(1.0, 0.0)], 0.01, 3000);
    for (k, y) in traj.iter().enumerate().step_by(10) {
        let t = k as f64 * 0.01;
        assert!((alpha_pheno(t, &p).norm() - y[0].norm()).abs() < 1e-10);
        assert!((alpha_pheno(t, &p).norm() - (-gamma * t / 2.0).exp()).abs() < 1e-12);
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

#[test]
fn first_maximum_matches_numerical_search() {
    for r in [0.1, 1.0, 2.0, 2.5, 2.0 * SQRT_2, 3.5, 4.0, 5.0, 12.0] {
        let p = PhenoParams::resonant(1.0, r).unwrap();
        let v = |t: f64| alpha_pheno(t, &p).norm().powi(4);
        let t0 = first_maximum_time(r).unwrap();
        let numeric = golden_max(v, 0.5 * t0, 1.5 * t0);
        assert!((numeric - t0).abs() < 1e-4, "r={r}: {numeric} vs {t0}");
        // nothing earlier than t0 rises above its neighbours
        let early: Vec<f64> = (1..1000)
            .map(|k| v(0.999 * t0 * k as f64 / 1000.0))
            .collect();
        assert!(
            early.windows(3).all(|w| !(w[1] > w[0] && w[1] > w[2])),
            "r={r}"
        );
    }
}

fn trajectory_nv(r: f64, volume_floor: f64, dt: f64) -> (f64, f64) {
    let p = PhenoParams::resonant(1.0, r).unwrap();
    let mut t_end = 10.0;
    while alpha_pheno(t_end, &p).norm().powi(4) >= volume_floor {
        t_end *= 1.25;
    }
    let traj =
        Trajectory::from_fn(TimeGrid::new(t_end, dt).unwrap(), |t| alpha_pheno(t, &p)).unwrap();
    let nm = analyze(&traj);
    (nm.nv, nm.n_rescaled)
}

#[test]
fn analytic_nv_at_r_one() {
    let (nv, _) = trajectory_nv(1.0, 1e-10, 1e-3);
    assert!((nv - nv_analytic(1.0).unwrap()).abs() < 1e-6);
    let (_, n) = trajectory_nv(1.0, 1e-8, 1e-3);
    assert!((n - n_from_nv(nv_analytic(1.0).unwrap())).abs() < 1e-3);
}

#[test]
fn analytic_nv_across_branches() {
    for r in [0.2, 1.7, 2.0 * SQRT_2, 3.2, 3.9, 4.0, 4.5, 8.0] {
        let (nv, _) = trajectory_nv(r, 1e-14, 2e-3);
        let expect = nv_analytic(r).unwrap();
        assert!(
            (nv - expect).abs() < 1e-6 * expect.max(1.0),
            "r={r}: {nv} vs {expect}"
        );
    }
}

#[test]
fn maxima_follow_geometric_series() {
    // every maximum of |α|⁴ sits at e^{−r t_M}, spaced by 4π/Δ in t
    let r: f64 = 1.5;
    let delta = (16.0 - r * r).sqrt();
    let p = PhenoParams::resonant(1.0, r).unwrap();
    let traj =
        Trajectory::from_fn(TimeGrid::new(40.0, 1e-3).unwrap(), |t| alpha_pheno(t, &p)).unwrap();
    let nm = analyze(&traj);
    let t0 = first_maximum_time(r).unwrap();
    for (m, e) in nm.extrema.maxima.iter().enumerate() {
        let t = t0 + m as f64 * 4.0 * PI / delta;
        assert!((e.time - t).abs() < 1e-4, "max {m}: {} vs {t}", e.time);
        assert!((e.value - (-r * t).exp()).abs() < 1e-9);
    }
    assert!(nm.extrema.minima.iter().all(|e| e.value < 1e-9));
}

struct Stub {
    freqs: Vec<f64>,
    overlaps: Vec<f64>,
}

impl Spectrum for Stub {
    fn kind(&self) -> HamiltonianKind {
        HamiltonianKind::FieldOnly
    }
    fn dim(&self) -> usize {
        self.freqs.len()
    }
    fn n_half(&self) -> usize {
        0
    }
    fn frequencies(&self) -> &[f64] {
        &self.freqs
    }
    fn site_overlaps(&self) -> &[f64] {
        &self.overlaps
    }
    fn atom_overlaps(&self) -> Option<&[f64]> {
        None
    }
    fn mode_vector(&self, _k: usize) -> cca_core::Result<Vec<f64>> {
        unimplemented!()
    }
}

#[test]
fn rate_recipe_edge_cases() {
    let g = 0.1;
    let stub = Stub {
        freqs: vec![-0.5, 0.0, 0.05, 0.5],
        overlaps: vec![0.5, 0.5, 0.5, 0.5],
    };
    let zero = ModeCouplings {
        values: vec![0.0; 4],
    };
    assert_eq!(effective_rate(&stub, &zero, 1, 0.0, g).unwrap(), 0.0);
    // only mode 2 is in the window besides ℓ = 1
    let couplings = ModeCouplings {
        values: vec![g, g, g, g],
    };
    let gamma = effective_rate(&stub, &couplings, 1, 0.0, g).unwrap();
    assert!((gamma - PI * g / 2.0).abs() < 1e-15);
    assert!(effective_rate(&stub, &couplings, 9, 0.0, g).is_err());
}
