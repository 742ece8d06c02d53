//! Explicit Runge-Kutta integrators for autonomous-in-structure systems
//! `y' = f(t, y)`.
//!
//! Embedded pairs use PI step-size control on an RMS error norm. Output
//! times are hit exactly by shortening the step, or optionally filled in by
//! cubic Hermite interpolation between accepted steps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Right-hand side of a first-order system.
pub trait OdeSystem: Sync {
    /// Number of unknowns.
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// Dormand-Prince 5(4).
    #[default]
    Rk45,
    /// Fehlberg 7(8), advanced with the 8th-order solution.
    Rk78,
    /// Classical fourth-order method with a fixed step.
    Rk4,
}

impl Integrator {
    pub fn as_str(self) -> &'static str {
        match self {
            Integrator::Rk45 => "rk45",
            Integrator::Rk78 => "rk78",
            Integrator::Rk4 => "rk4",
        }
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk45" | "45" => Ok(Integrator::Rk45),
            "rk78" | "78" => Ok(Integrator::Rk78),
            "rk4" | "rk4-fixed" => Ok(Integrator::Rk4),
            _ => Err(Error::InvalidArgument(format!("unknown integrator {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub integrator: Integrator,
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step; also the step of [`Integrator::Rk4`].
    pub max_dt: f64,
    /// Starting step for the adaptive methods; estimated when `None`.
    pub first_dt: Option<f64>,
    pub max_steps: usize,
    /// Fill intermediate outputs by Hermite interpolation instead of
    /// shortening steps to land on them.
    pub interpolate: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            integrator: Integrator::Rk45,
            rtol: 1e-8,
            atol: 1e-8,
            max_dt: f64::INFINITY,
            first_dt: None,
            max_steps: 10_000_000,
            interpolate: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Butcher tableau of an explicit method, optionally with an embedded error
/// estimator (`err = b - b_hat`).
struct Tableau {
    c: &'static [f64],
    a: &'static [&'static [f64]],
    b: &'static [f64],
    err: &'static [f64],
    /// order used in the step-size exponent
    order: f64,
}

const DP5: Tableau = Tableau {
    c: &[0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0],
    a: &[
        &[],
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
        ],
        &[
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ],
    b: &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ],
    err: &[
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ],
    order: 5.0,
};

const RKF78: Tableau = Tableau {
    c: &[
        0.0,
        2.0 / 27.0,
        1.0 / 9.0,
        1.0 / 6.0,
        5.0 / 12.0,
        1.0 / 2.0,
        5.0 / 6.0,
        1.0 / 6.0,
        2.0 / 3.0,
        1.0 / 3.0,
        1.0,
        0.0,
        1.0,
    ],
    a: &[
        &[],
        &[2.0 / 27.0],
        &[1.0 / 36.0, 1.0 / 12.0],
        &[1.0 / 24.0, 0.0, 1.0 / 8.0],
        &[5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0],
        &[1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0],
        &[-25.0 / 108.0, 0.0, 0.0, 125.0 / 108.0, -65.0 / 27.0, 125.0 / 54.0],
        &[31.0 / 300.0, 0.0, 0.0, 0.0, 61.0 / 225.0, -2.0 / 9.0, 13.0 / 900.0],
        &[2.0, 0.0, 0.0, -53.0 / 6.0, 704.0 / 45.0, -107.0 / 9.0, 67.0 / 90.0, 3.0],
        &[
            -91.0 / 108.0,
            0.0,
            0.0,
            23.0 / 108.0,
            -976.0 / 135.0,
            311.0 / 54.0,
            -19.0 / 60.0,
            17.0 / 6.0,
            -1.0 / 12.0,
        ],
        &[
            2383.0 / 4100.0,
            0.0,
            0.0,
            -341.0 / 164.0,
            4496.0 / 1025.0,
            -301.0 / 82.0,
            2133.0 / 4100.0,
            45.0 / 82.0,
            45.0 / 164.0,
            18.0 / 41.0,
        ],
        &[
            3.0 / 205.0,
            0.0,
            0.0,
            0.0,
            0.0,
            -6.0 / 41.0,
            -3.0 / 205.0,
            -3.0 / 41.0,
            3.0 / 41.0,
            6.0 / 41.0,
            0.0,
        ],
        &[
            -1777.0 / 4100.0,
            0.0,
            0.0,
            -341.0 / 164.0,
            4496.0 / 1025.0,
            -289.0 / 82.0,
            2193.0 / 4100.0,
            51.0 / 82.0,
            33.0 / 164.0,
            12.0 / 41.0,
            0.0,
            1.0,
        ],
    ],
    b: &[
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        34.0 / 105.0,
        9.0 / 35.0,
        9.0 / 35.0,
        9.0 / 280.0,
        9.0 / 280.0,
        0.0,
        41.0 / 840.0,
        41.0 / 840.0,
    ],
    err: &[
        -41.0 / 840.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        -41.0 / 840.0,
        41.0 / 840.0,
        41.0 / 840.0,
    ],
    order: 8.0,
};

const RK4: Tableau = Tableau {
    c: &[0.0, 0.5, 0.5, 1.0],
    a: &[&[], &[0.5], &[0.0, 0.5], &[0.0, 0.0, 1.0]],
    b: &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
    err: &[],
    order: 4.0,
};

fn tableau(method: Integrator) -> &'static Tableau {
    match method {
        Integrator::Rk45 => &DP5,
        Integrator::Rk78 => &RKF78,
        Integrator::Rk4 => &RK4,
    }
}

struct Stepper<'a, S: OdeSystem + ?Sized> {
    sys: &'a S,
    tab: &'static Tableau,
    k: Vec<Vec<f64>>,
    stage: Vec<f64>,
    stats: StepStats,
}

impl<'a, S: OdeSystem + ?Sized> Stepper<'a, S> {
    fn new(sys: &'a S, tab: &'static Tableau) -> Self {
        let n = sys.dim();
        Self {
            sys,
            tab,
            k: vec![vec![0.0; n]; tab.c.len()],
            stage: vec![0.0; n],
            stats: StepStats::default(),
        }
    }

    fn eval(&mut self, t: f64, y: &[f64], out: usize) {
        let mut dy = std::mem::take(&mut self.k[out]);
        self.sys.rhs(t, y, &mut dy);
        self.k[out] = dy;
        self.stats.rhs_evals += 1;
    }

    /// Takes one step of size `h` from `(t, y)` with `k[0] = f(t, y)`
    /// already filled in. Writes the new state and returns the error
    /// estimate vector in `err` when the method has one.
    fn step(&mut self, t: f64, y: &[f64], h: f64, ynew: &mut [f64], err: Option<&mut [f64]>) {
        let tab = self.tab;
        for s in 1..tab.c.len() {
            let mut stage = std::mem::take(&mut self.stage);
            stage.copy_from_slice(y);
            for (j, &a) in tab.a[s].iter().enumerate() {
                if a != 0.0 {
                    axpy(h * a, &self.k[j], &mut stage);
                }
            }
            self.eval(t + tab.c[s] * h, &stage, s);
            self.stage = stage;
        }
        ynew.copy_from_slice(y);
        for (j, &b) in tab.b.iter().enumerate() {
            if b != 0.0 {
                axpy(h * b, &self.k[j], ynew);
            }
        }
        if let Some(err) = err {
            err.fill(0.0);
            for (j, &e) in tab.err.iter().enumerate() {
                if e != 0.0 {
                    axpy(h * e, &self.k[j], err);
                }
            }
        }
    }
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn rms_error(err: &[f64], y0: &[f64], y1: &[f64], atol: f64, rtol: f64) -> f64 {
    if err.is_empty() {
        return 0.0;
    }
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / err.len() as f64).sqrt()
}

fn rms(x: &[f64], y: &[f64], atol: f64, rtol: f64) -> f64 {
    rms_error(x, y, y, atol, rtol)
}

/// Cubic Hermite interpolant between `(t0, y0, f0)` and `(t1, y1, f1)`.
pub fn hermite(theta: f64, h: f64, y0: &[f64], f0: &[f64], y1: &[f64], f1: &[f64], out: &mut [f64]) {
    for i in 0..out.len() {
        let d = y1[i] - y0[i];
        out[i] = (1.0 - theta) * y0[i]
            + theta * y1[i]
            + theta * (theta - 1.0) * ((1.0 - 2.0 * theta) * d + (theta - 1.0) * h * f0[i] + theta * h * f1[i]);
    }
}

fn finite(y: &[f64]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::InvalidArgument("need at least a start and an end time".into()));
    }
    if !times.iter().all(|t| t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "output times must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Integrates from `times[0]` with state `y0` and returns the state at
/// every entry of `times` (the first being `y0` itself).
pub fn solve<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    times: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<Vec<f64>>, StepStats)> {
    check_times(times)?;
    if y0.len() != sys.dim() {
        return Err(Error::LengthMismatch {
            expected: sys.dim(),
            found: y0.len(),
        });
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    if !(opts.max_dt > 0.0) {
        return Err(Error::InvalidArgument("max_dt must be positive".into()));
    }
    if !finite(y0) {
        return Err(Error::NonFiniteState { t: times[0] });
    }
    match opts.integrator {
        Integrator::Rk4 => solve_fixed(sys, y0, times, opts),
        m => solve_adaptive(sys, y0, times, tableau(m), opts),
    }
}

fn solve_fixed<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    times: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<Vec<f64>>, StepStats)> {
    if !opts.max_dt.is_finite() {
        return Err(Error::InvalidArgument(
            "fixed-step integration needs a finite step".into(),
        ));
    }
    let mut st = Stepper::new(sys, &RK4);
    let mut y = y0.to_vec();
    let mut ynew = vec![0.0; y.len()];
    let mut out = vec![y.clone()];
    let mut t = times[0];
    for &target in &times[1..] {
        let span = target - t;
        let steps = (span / opts.max_dt).ceil().max(1.0) as usize;
        if st.stats.accepted + steps > opts.max_steps {
            return Err(Error::StepLimit(opts.max_steps));
        }
        let h = span / steps as f64;
        for s in 0..steps {
            let ts = t + s as f64 * h;
            st.eval(ts, &y, 0);
            st.step(ts, &y, h, &mut ynew, None);
            std::mem::swap(&mut y, &mut ynew);
            st.stats.accepted += 1;
            if !finite(&y) {
                return Err(Error::NonFiniteState { t: ts + h });
            }
        }
        t = target;
        out.push(y.clone());
    }
    Ok((out, st.stats))
}

fn initial_step<S: OdeSystem + ?Sized>(st: &mut Stepper<'_, S>, t: f64, y: &[f64], opts: &SolverOptions) -> f64 {
    let order = st.tab.order;
    let d0 = rms(y, y, opts.atol, opts.rtol);
    let d1 = rms(&st.k[0], y, opts.atol, opts.rtol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(opts.max_dt);
    let mut y1 = y.to_vec();
    axpy(h0, &st.k[0], &mut y1);
    let f0 = st.k[0].clone();
    st.eval(t + h0, &y1, 1);
    let diff: Vec<f64> = st.k[1].iter().zip(&f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff, y, opts.atol, opts.rtol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / order)
    };
    (100.0 * h0).min(h1).min(opts.max_dt)
}

fn solve_adaptive<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    times: &[f64],
    tab: &'static Tableau,
    opts: &SolverOptions,
) -> Result<(Vec<Vec<f64>>, StepStats)> {
    const SAFETY: f64 = 0.9;
    const MIN_FACTOR: f64 = 0.2;
    const MAX_FACTOR: f64 = 5.0;
    let alpha = 0.7 / tab.order;
    let beta = 0.4 / tab.order;

    let n = y0.len();
    let mut st = Stepper::new(sys, tab);
    let (t0, t_end) = (times[0], *times.last().unwrap());
    let mut t = t0;
    let mut y = y0.to_vec();
    st.eval(t, &y, 0);
    let mut f = st.k[0].clone();
    let mut h = match opts.first_dt {
        Some(h) if h > 0.0 => h.min(opts.max_dt),
        _ => initial_step(&mut st, t, &y, opts),
    };

    let mut out = vec![y.clone()];
    let mut next_out = 1;
    let mut ynew = vec![0.0; n];
    let mut fnew = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut prev_err: f64 = 1e-4;
    let mut last_rejected = false;

    while next_out < times.len() {
        if st.stats.accepted + st.stats.rejected >= opts.max_steps {
            return Err(Error::StepLimit(opts.max_steps));
        }
        let stop = if opts.interpolate { t_end } else { times[next_out] };
        let remaining = stop - t;
        let proposed = h;
        // stretch slightly to land on the stop instead of leaving a sliver
        let clipped = h >= remaining * (1.0 - 1e-12) || remaining - h < 1e-10 * remaining.abs();
        if clipped {
            h = remaining;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        st.k[0].copy_from_slice(&f);
        st.step(t, &y, h, &mut ynew, Some(&mut err));
        if !finite(&ynew) {
            st.stats.rejected += 1;
            last_rejected = true;
            h *= MIN_FACTOR;
            continue;
        }
        let e = rms_error(&err, &y, &ynew, opts.atol, opts.rtol);
        if e <= 1.0 {
            let t_new = if clipped { stop } else { t + h };
            sys.rhs(t_new, &ynew, &mut fnew);
            st.stats.rhs_evals += 1;
            while next_out < times.len() && times[next_out] <= t_new {
                let tt = times[next_out];
                if tt == t_new {
                    out.push(ynew.clone());
                } else {
                    let mut yy = vec![0.0; n];
                    hermite((tt - t) / h, h, &y, &f, &ynew, &fnew, &mut yy);
                    out.push(yy);
                }
                next_out += 1;
            }
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut f, &mut fnew);
            t = t_new;
            st.stats.accepted += 1;

            let e = e.max(1e-10);
            let mut factor = SAFETY * e.powf(-alpha) * prev_err.powf(beta);
            factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
            if last_rejected {
                factor = factor.min(1.0);
            }
            h = (h * factor).min(opts.max_dt);
            if clipped {
                h = h.max(proposed.min(opts.max_dt));
            }
            prev_err = e;
            last_rejected = false;
        } else {
            st.stats.rejected += 1;
            last_rejected = true;
            let factor = (SAFETY * e.powf(-1.0 / tab.order)).max(MIN_FACTOR);
            h *= factor;
        }
    }
    Ok((out, st.stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay;

    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = -y[0];
        }
    }

    /// y'' = -y as a first-order system.
    struct Oscillator;

    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    /// y' = t^p, exact for methods of order >= p + 1.
    struct Power(i32);

    impl OdeSystem for Power {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, t: f64, _y: &[f64], dy: &mut [f64]) {
            dy[0] = t.powi(self.0);
        }
    }

    #[test]
    fn tableaux_are_consistent() {
        for tab in [&DP5, &RKF78, &RK4] {
            for (i, row) in tab.a.iter().enumerate() {
                let sum: f64 = row.iter().sum();
                assert!((sum - tab.c[i]).abs() < 1e-14, "row {i}: {sum} vs {}", tab.c[i]);
            }
            let bsum: f64 = tab.b.iter().sum();
            assert!((bsum - 1.0).abs() < 1e-14);
            let esum: f64 = tab.err.iter().sum();
            assert!(esum.abs() < 1e-14);
        }
    }

    fn quadrature_order(tab: &Tableau) -> usize {
        // sum b_i c_i^(q-1) = 1/q for q = 1..=order
        let mut q = 1;
        while q < 20 {
            let s: f64 = tab.b.iter().zip(tab.c).map(|(b, c)| b * c.powi(q as i32 - 1)).sum();
            if (s - 1.0 / q as f64).abs() > 1e-13 {
                break;
            }
            q += 1;
        }
        q - 1
    }

    #[test]
    fn quadrature_conditions() {
        assert!(quadrature_order(&DP5) >= 5);
        assert!(quadrature_order(&RKF78) >= 8);
        assert!(quadrature_order(&RK4) >= 4);
    }

    fn convergence_order(method: Integrator) -> f64 {
        let run = |h: f64| {
            let opts = SolverOptions {
                integrator: method,
                first_dt: Some(h),
                max_dt: h,
                // tolerances loose enough that every step is accepted
                rtol: 1e3,
                atol: 1e3,
                ..Default::default()
            };
            let (out, _) = solve(&Oscillator, &[1.0, 0.0], &[0.0, 2.0], &opts).unwrap();
            ((out[1][0] - 2f64.cos()).powi(2) + (out[1][1] + 2f64.sin()).powi(2)).sqrt()
        };
        let (h1, h2) = (0.25, 0.125);
        (run(h1) / run(h2)).log2()
    }

    #[test]
    fn observed_orders() {
        let p4 = convergence_order(Integrator::Rk4);
        assert!((p4 - 4.0).abs() < 0.3, "rk4 order {p4}");
        let p5 = convergence_order(Integrator::Rk45);
        assert!((p5 - 5.0).abs() < 0.4, "rk45 order {p5}");
        let p8 = convergence_order(Integrator::Rk78);
        assert!(p8 > 7.5, "rk78 order {p8}");
    }

    #[test]
    fn polynomial_right_hand_sides_are_exact() {
        let opts = SolverOptions {
            integrator: Integrator::Rk78,
            first_dt: Some(0.5),
            max_dt: 0.5,
            rtol: 1.0,
            atol: 1.0,
            ..Default::default()
        };
        let (out, _) = solve(&Power(6), &[0.0], &[0.0, 1.0], &opts).unwrap();
        assert!((out[1][0] - 1.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_meets_tolerance() {
        for method in [Integrator::Rk45, Integrator::Rk78] {
            let opts = SolverOptions {
                integrator: method,
                rtol: 1e-10,
                atol: 1e-10,
                ..Default::default()
            };
            let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
            let (out, stats) = solve(&Decay, &[1.0], &times, &opts).unwrap();
            for (t, y) in times.iter().zip(&out) {
                assert!((y[0] - (-t).exp()).abs() < 1e-8, "{method} t={t}: {}", y[0]);
            }
            assert!(stats.accepted > 0);
        }
    }

    #[test]
    fn dense_output_matches_steps() {
        let opts = SolverOptions {
            rtol: 1e-9,
            atol: 1e-9,
            ..Default::default()
        };
        let times = [0.0, 0.123, 0.77, 1.5, 3.0];
        let (out, _) = solve(&Oscillator, &[1.0, 0.0], &times, &opts).unwrap();
        let interp = SolverOptions {
            interpolate: true,
            ..opts
        };
        let (dense, stats) = solve(&Oscillator, &[1.0, 0.0], &times, &interp).unwrap();
        for ((t, y), z) in times.iter().zip(&out).zip(&dense) {
            assert!((y[0] - t.cos()).abs() < 1e-8, "t={t}");
            // third-order interpolation between steps of this size
            assert!((z[0] - t.cos()).abs() < 1e-4, "t={t}");
        }
        assert!((dense[4][0] - 3f64.cos()).abs() < 1e-8);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn hermite_endpoints_and_cubics() {
        let (y0, f0, y1, f1) = ([1.0], [2.0], [5.0], [-1.0]);
        let mut out = [0.0];
        hermite(0.0, 0.5, &y0, &f0, &y1, &f1, &mut out);
        assert_eq!(out[0], 1.0);
        hermite(1.0, 0.5, &y0, &f0, &y1, &f1, &mut out);
        assert_eq!(out[0], 5.0);
        // reproduces t^3 on [1, 2]
        let h = 1.0;
        hermite(0.5, h, &[1.0], &[3.0], &[8.0], &[12.0], &mut out);
        assert!((out[0] - 1.5f64.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn invalid_input() {
        let o = SolverOptions::default();
        assert!(solve(&Decay, &[1.0], &[0.0], &o).is_err());
        assert!(solve(&Decay, &[1.0], &[1.0, 0.0], &o).is_err());
        assert!(solve(&Decay, &[1.0, 2.0], &[0.0, 1.0], &o).is_err());
        assert!(matches!(
            solve(&Decay, &[f64::NAN], &[0.0, 1.0], &o),
            Err(Error::NonFiniteState { .. })
        ));
        let fixed = SolverOptions {
            integrator: Integrator::Rk4,
            ..Default::default()
        };
        assert!(solve(&Decay, &[1.0], &[0.0, 1.0], &fixed).is_err());
    }

    struct Blowup;

    impl OdeSystem for Blowup {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[0] * y[0];
        }
    }

    #[test]
    fn singularity_is_reported() {
        // y = 1 / (1 - t) blows up at t = 1
        let r = solve(&Blowup, &[1.0], &[0.0, 2.0], &SolverOptions::default());
        assert!(
            matches!(r, Err(Error::StepSizeUnderflow { .. }) | Err(Error::StepLimit(_))),
            "{r:?}"
        );
    }

    #[test]
    fn step_limit() {
        let o = SolverOptions {
            max_steps: 3,
            rtol: 1e-12,
            atol: 1e-12,
            ..Default::default()
        };
        assert!(matches!(
            solve(&Oscillator, &[1.0, 0.0], &[0.0, 10.0], &o),
            Err(Error::StepLimit(3))
        ));
    }
}
