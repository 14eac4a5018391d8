//! Explicit Runge–Kutta integrators for small fixed-size systems.

use crate::error::GeometryError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_step: f64,
    /// Smallest step relative to `max(1, |t|)` before giving up.
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            initial_step: 1e-2,
            min_step: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Completed,
    /// The stop predicate fired.
    Stopped,
    /// The right-hand side kept failing while the step shrank to the floor.
    RhsFailed(GeometryError),
    StepTooSmall { h: f64 },
    MaxSteps,
}

#[derive(Clone, Debug)]
pub struct Solution<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub status: Status,
    pub rejected: usize,
}

impl<const N: usize> Solution<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.t.last().expect("non-empty"), *self.y.last().expect("non-empty"))
    }
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn combine<const N: usize>(y: &[f64; N], h: f64, k: &[[f64; N]], w: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (kj, wj) in k.iter().zip(w) {
        if *wj != 0.0 {
            for i in 0..N {
                out[i] += h * wj * kj[i];
            }
        }
    }
    out
}

/// Adaptive Dormand–Prince 5(4) from `t0` to `t_end`, recording every
/// accepted step. `stop` is checked after each accepted step.
pub fn dopri45<const N: usize, F, S>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut stop: S,
) -> Solution<N>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], GeometryError>,
    S: FnMut(f64, &[f64; N]) -> bool,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut sol = Solution {
        t: vec![t0],
        y: vec![y0],
        status: Status::Completed,
        rejected: 0,
    };
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.initial_step.min(opts.max_step).min((t_end - t0).abs());
    let mut k0 = match rhs(t, &y) {
        Ok(k) => k,
        Err(e) => {
            sol.status = Status::RhsFailed(e);
            return sol;
        }
    };
    let mut last_err: Option<GeometryError> = None;
    let mut steps = 0;
    while dir * (t_end - t) > 0.0 {
        if steps >= opts.max_steps {
            sol.status = Status::MaxSteps;
            return sol;
        }
        let floor = opts.min_step * t.abs().max(1.0);
        if h < floor {
            sol.status = match last_err.take() {
                Some(e) => Status::RhsFailed(e),
                None => Status::StepTooSmall { h },
            };
            return sol;
        }
        let remaining = (t_end - t).abs();
        let last_step = h >= remaining;
        let hs = if last_step { remaining } else { h };
        let hd = dir * hs;

        let mut k = [[0.0; N]; 7];
        k[0] = k0;
        let mut failed = None;
        for s in 1..7 {
            let ys = combine(&y, hd, &k[..s], &A[s][..s]);
            match rhs(t + C[s] * hd, &ys) {
                Ok(v) => k[s] = v,
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failed {
            last_err = Some(e);
            h = hs * 0.5;
            sol.rejected += 1;
            continue;
        }
        let y5 = combine(&y, hd, &k, &B5);
        let y4 = combine(&y, hd, &k, &B4);
        let mut acc = 0.0;
        for i in 0..N {
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4[i]) / sc;
            acc += e * e;
        }
        let err = (acc / N as f64).sqrt();
        if !err.is_finite() {
            h = hs * 0.2;
            sol.rejected += 1;
            continue;
        }
        if err <= 1.0 {
            t = if last_step { t_end } else { t + hd };
            y = y5;
            k0 = k[6];
            last_err = None;
            steps += 1;
            sol.t.push(t);
            sol.y.push(y);
            if stop(t, &y) {
                sol.status = Status::Stopped;
                return sol;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (hs * fac).min(opts.max_step);
        } else {
            h = hs * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            sol.rejected += 1;
        }
    }
    sol
}

/// Classical fourth-order Runge–Kutta with `n` equal steps.
pub fn rk4<const N: usize, F>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    n: usize,
) -> Result<Solution<N>, GeometryError>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], GeometryError>,
{
    let h = (t_end - t0) / n as f64;
    let mut sol = Solution {
        t: Vec::with_capacity(n + 1),
        y: Vec::with_capacity(n + 1),
        status: Status::Completed,
        rejected: 0,
    };
    let mut y = y0;
    sol.t.push(t0);
    sol.y.push(y);
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let k1 = rhs(t, &y)?;
        let k2 = rhs(t + 0.5 * h, &combine(&y, h, &[k1], &[0.5]))?;
        let k3 = rhs(t + 0.5 * h, &combine(&y, h, &[k2], &[0.5]))?;
        let k4 = rhs(t + h, &combine(&y, h, &[k3], &[1.0]))?;
        y = combine(&y, h, &[k1, k2, k3, k4], &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]);
        sol.t.push(if i + 1 == n { t_end } else { t0 + (i + 1) as f64 * h });
        sol.y.push(y);
    }
    Ok(sol)
}
