//! Volume-based non-Markovianity of an amplitude-damping trajectory.
//!
//! The accessible-state volume is `V(t) = |α(t)|⁴`. `N_V` accumulates every
//! increase of `V`; the rescaled measure divides by the accumulated decrease,
//! which over a finite window `[0, T]` equals `N_V + V(0) − V(T)`.

use crate::dynamics::Trajectory;

/// Relative changes of `V` below this are treated as flat.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub time: f64,
    pub value: f64,
}

/// Interior extrema of `V(t)` plus the endpoint values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtremaList {
    pub maxima: Vec<Extremum>,
    pub minima: Vec<Extremum>,
    pub start_value: f64,
    pub end_value: f64,
    /// `V` increases right after `t = 0`.
    pub start_is_minimum: bool,
    /// `V` is still increasing at `t = T`.
    pub end_is_maximum: bool,
}

impl ExtremaList {
    pub fn len(&self) -> usize {
        self.maxima.len() + self.minima.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maxima.is_empty() && self.minima.is_empty()
    }

    /// Σ of increases: maxima (plus a rising endpoint) minus minima (plus a
    /// falling start).
    pub fn rise(&self) -> f64 {
        let mut total: f64 = self.maxima.iter().map(|e| e.value).sum::<f64>()
            - self.minima.iter().map(|e| e.value).sum::<f64>();
        if self.end_is_maximum {
            total += self.end_value;
        }
        if self.start_is_minimum {
            total -= self.start_value;
        }
        total.max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmResult {
    pub nv: f64,
    pub n_rescaled: f64,
    pub extrema: ExtremaList,
    pub window_end: f64,
    /// Set when the decrease denominator vanished (V constant) and N was
    /// defined as 0.
    pub degenerate: bool,
}

impl NmResult {
    pub fn final_volume(&self) -> f64 {
        self.extrema.end_value
    }
}

fn is_flat(a: f64, b: f64) -> bool {
    (b - a).abs() <= NOISE_FLOOR * a.abs().max(b.abs())
}

/// Vertex of the parabola through three equally spaced samples, as an
/// offset in units of the spacing and the vertex value.
fn parabola_vertex(y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let curvature = y0 - 2.0 * y1 + y2;
    if curvature == 0.0 {
        return (0.0, y1);
    }
    let offset = (0.5 * (y0 - y2) / curvature).clamp(-1.0, 1.0);
    (offset, y1 - 0.25 * (y0 - y2) * offset)
}

/// Locate the extrema of `values` sampled every `dt` from `t = 0`.
pub fn find_extrema_in(values: &[f64], dt: f64) -> ExtremaList {
    let n = values.len();
    let mut list = ExtremaList {
        start_value: values.first().copied().unwrap_or(0.0),
        end_value: values.last().copied().unwrap_or(0.0),
        ..Default::default()
    };
    if n < 3 {
        if n == 2 && !is_flat(values[0], values[1]) {
            list.start_is_minimum = values[1] > values[0];
            list.end_is_maximum = list.start_is_minimum;
        }
        return list;
    }

    let mut last_sign = 0i8;
    // first sample after the most recent non-flat step
    let mut run_start = 0usize;
    for i in 0..n - 1 {
        let (a, b) = (values[i], values[i + 1]);
        if is_flat(a, b) {
            continue;
        }
        let sign = if b > a { 1 } else { -1 };
        if last_sign == 0 {
            list.start_is_minimum = sign > 0;
        } else if sign != last_sign {
            // extremum somewhere on the (possibly flat) stretch run_start..=i
            let stretch = run_start..=i;
            let idx = if last_sign > 0 {
                stretch
                    .max_by(|&p, &q| values[p].total_cmp(&values[q]))
                    .unwrap()
            } else {
                stretch
                    .min_by(|&p, &q| values[p].total_cmp(&values[q]))
                    .unwrap()
            };
            let (offset, vertex) = parabola_vertex(values[idx - 1], values[idx], values[idx + 1]);
            let time = (idx as f64 + offset) * dt;
            if last_sign > 0 {
                let value = vertex.max(values[idx]).clamp(0.0, 1.0);
                list.maxima.push(Extremum { time, value });
            } else {
                let value = vertex.min(values[idx]).clamp(0.0, 1.0);
                list.minima.push(Extremum { time, value });
            }
        }
        last_sign = sign;
        run_start = i + 1;
    }
    list.end_is_maximum = last_sign > 0;
    list
}

pub fn find_extrema(traj: &Trajectory) -> ExtremaList {
    find_extrema_in(&traj.volume(), traj.grid().dt())
}

/// `N_V = Σ_M V(t_M) − Σ_m V(t_m)`.
pub fn measure_nv(traj: &Trajectory) -> f64 {
    find_extrema(traj).rise()
}

/// Full verdict for one trajectory.
pub fn analyze(traj: &Trajectory) -> NmResult {
    analyze_extrema(find_extrema(traj), traj.grid().last_time())
}

pub fn analyze_extrema(extrema: ExtremaList, window_end: f64) -> NmResult {
    let nv = extrema.rise();
    let denominator = nv + extrema.start_value - extrema.end_value;
    let (n_rescaled, degenerate) = if denominator > 0.0 {
        ((nv / denominator).clamp(0.0, 1.0), false)
    } else {
        (0.0, true)
    };
    NmResult {
        nv,
        n_rescaled,
        extrema,
        window_end,
        degenerate,
    }
}

/// Rescaled measure `N = N_V / (N_V + V(0) − V(T))`.
pub fn measure_rescaled(traj: &Trajectory) -> f64 {
    analyze(traj).n_rescaled
}
