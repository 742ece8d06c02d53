//! Scalar wave equation `phi_tt = Laplace(phi)` on the periodic unit cube,
//! reduced to first order as `phi' = psi`, `psi' = L phi`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CoeffVector, Space};
use crate::ode::{solve, Integrator, OdeSystem, SolverOptions, StepStats};
use crate::operators::{grad_matrix, laplacian_from_grad, OperatorOptions};
use crate::project::{plane_wave, project, ProjectOptions, ScalarField};
use crate::sparse::SparseOperator;

/// How the Laplacian is applied during time stepping.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaplacianMode {
    /// Assemble `sum_a D_a D_a` once.
    #[default]
    Explicit,
    /// Apply `D_a` twice per axis; less memory, more work per step.
    Grad,
}

impl std::str::FromStr for LaplacianMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(LaplacianMode::Explicit),
            "grad" => Ok(LaplacianMode::Grad),
            _ => Err(Error::InvalidArgument(format!("unknown Laplacian mode {s:?}"))),
        }
    }
}

/// The discrete Laplacian in one of its two forms.
#[derive(Clone, Debug)]
pub enum LaplacianOp {
    Explicit(SparseOperator),
    Grad(Vec<SparseOperator>),
}

impl LaplacianOp {
    pub fn build(space: &Space, mode: LaplacianMode, opts: &OperatorOptions) -> Result<Self> {
        let grad = grad_matrix(space, opts)?;
        Self::from_grad(grad, mode, opts)
    }

    pub fn from_grad(grad: Vec<SparseOperator>, mode: LaplacianMode, opts: &OperatorOptions) -> Result<Self> {
        match mode {
            LaplacianMode::Explicit => Ok(LaplacianOp::Explicit(laplacian_from_grad(&grad, opts)?)),
            LaplacianMode::Grad => Ok(LaplacianOp::Grad(grad)),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            LaplacianOp::Explicit(l) => l.nrows(),
            LaplacianOp::Grad(g) => g.first().map_or(0, SparseOperator::nrows),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stored nonzeros over all matrices.
    pub fn nnz(&self) -> usize {
        match self {
            LaplacianOp::Explicit(l) => l.nnz(),
            LaplacianOp::Grad(g) => g.iter().map(SparseOperator::nnz).sum(),
        }
    }

    pub fn memory_bytes(&self) -> usize {
        match self {
            LaplacianOp::Explicit(l) => l.memory_bytes(),
            LaplacianOp::Grad(g) => g.iter().map(SparseOperator::memory_bytes).sum(),
        }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            LaplacianOp::Explicit(l) => l.matvec_into(x, y),
            LaplacianOp::Grad(g) => {
                y.fill(0.0);
                let mut tmp = vec![0.0; x.len()];
                let mut tmp2 = vec![0.0; x.len()];
                for d in g {
                    d.matvec_into(x, &mut tmp);
                    d.matvec_into(&tmp, &mut tmp2);
                    for (yi, v) in y.iter_mut().zip(&tmp2) {
                        *yi += v;
                    }
                }
            }
        }
    }
}

/// Displacement `phi` and velocity `psi` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    pub phi: CoeffVector,
    pub psi: CoeffVector,
    pub t: f64,
}

impl WaveState {
    pub fn new(phi: CoeffVector, psi: CoeffVector, t: f64) -> Result<Self> {
        if phi.space != psi.space {
            return Err(Error::InvalidArgument("phi and psi live in different spaces".into()));
        }
        if !phi.values.iter().chain(&psi.values).all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        Ok(Self { phi, psi, t })
    }

    pub fn space(&self) -> &Space {
        &self.phi.space
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub integrator: Integrator,
    pub rtol: f64,
    pub atol: f64,
    /// Largest step for the adaptive methods.
    pub max_dt: Option<f64>,
    /// Step of the fixed-step method is `cfl * 2^-n / (2k - 1)`.
    pub cfl: f64,
    /// Extra output times strictly between the start and end.
    pub snapshots: Vec<f64>,
    /// Interpolate snapshots between steps rather than stepping onto them.
    pub interpolate: bool,
    pub laplacian: LaplacianMode,
    pub operator: OperatorOptions,
    pub project: ProjectOptions,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            integrator: Integrator::Rk45,
            rtol: 1e-8,
            atol: 1e-8,
            max_dt: None,
            cfl: 0.1,
            snapshots: Vec::new(),
            interpolate: false,
            laplacian: LaplacianMode::Explicit,
            operator: OperatorOptions::default(),
            project: ProjectOptions::default(),
            max_steps: 10_000_000,
        }
    }
}

impl EvolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "CFL factor {} outside (0, 1]",
                self.cfl
            )));
        }
        Ok(())
    }

    fn solver(&self, space: &Space) -> SolverOptions {
        let max_dt = match self.integrator {
            Integrator::Rk4 => self.cfl * (-(space.n() as f64)).exp2() / (2 * space.k - 1) as f64,
            _ => self.max_dt.unwrap_or(f64::INFINITY),
        };
        SolverOptions {
            integrator: self.integrator,
            rtol: self.rtol,
            atol: self.atol,
            max_dt,
            first_dt: None,
            max_steps: self.max_steps,
            interpolate: self.interpolate,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<WaveState>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &WaveState {
        self.states.last().expect("a trajectory holds at least two states")
    }
}

struct WaveSystem<'a> {
    laplacian: &'a LaplacianOp,
}

impl OdeSystem for WaveSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.laplacian.len()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let p = self.laplacian.len();
        let (phi, psi) = y.split_at(p);
        let (dphi, dpsi) = dy.split_at_mut(p);
        dphi.copy_from_slice(psi);
        self.laplacian.apply(phi, dpsi);
    }
}

/// `(psi, L phi)`.
pub fn wave_rhs(state: &WaveState, laplacian: &LaplacianOp) -> Result<(Vec<f64>, Vec<f64>)> {
    if state.len() != laplacian.len() {
        return Err(Error::LengthMismatch {
            expected: laplacian.len(),
            found: state.len(),
        });
    }
    let mut dpsi = vec![0.0; state.len()];
    laplacian.apply(&state.phi.values, &mut dpsi);
    Ok((state.psi.values.clone(), dpsi))
}

/// Evolves `state` to `t1` with a prebuilt Laplacian.
pub fn evolve_state(laplacian: &LaplacianOp, state: &WaveState, t1: f64, opts: &EvolveOptions) -> Result<Trajectory> {
    opts.validate()?;
    if state.len() != laplacian.len() {
        return Err(Error::LengthMismatch {
            expected: laplacian.len(),
            found: state.len(),
        });
    }
    if !(t1 > state.t) {
        return Err(Error::InvalidArgument(format!(
            "end time {t1} not after start {}",
            state.t
        )));
    }
    let mut times = vec![state.t];
    let mut extra: Vec<f64> = opts
        .snapshots
        .iter()
        .copied()
        .filter(|&t| t > state.t && t < t1)
        .collect();
    extra.sort_by(f64::total_cmp);
    extra.dedup();
    times.extend(extra);
    times.push(t1);

    let p = state.len();
    let mut y0 = Vec::with_capacity(2 * p);
    y0.extend_from_slice(&state.phi.values);
    y0.extend_from_slice(&state.psi.values);
    let sys = WaveSystem { laplacian };
    let (out, stats) = solve(&sys, &y0, &times, &opts.solver(state.space()))?;

    let space = *state.space();
    let states = out
        .into_iter()
        .zip(times)
        .map(|(mut y, t)| {
            let psi = y.split_off(p);
            WaveState {
                phi: CoeffVector { space, values: y },
                psi: CoeffVector { space, values: psi },
                t,
            }
        })
        .collect();
    Ok(Trajectory { states, stats })
}

/// Projects `f0`, `v0` onto `space` and evolves from `t0` to `t1`.
pub fn wave_evolve<F, V>(space: &Space, f0: &F, v0: &V, t0: f64, t1: f64, opts: &EvolveOptions) -> Result<Trajectory>
where
    F: ScalarField + ?Sized,
    V: ScalarField + ?Sized,
{
    let phi = project(space, f0, &opts.project)?;
    let psi = project(space, v0, &opts.project)?;
    let state = WaveState::new(phi, psi, t0)?;
    let laplacian = LaplacianOp::build(space, opts.laplacian, &opts.operator)?;
    evolve_state(&laplacian, &state, t1, opts)
}

/// A plane wave `A cos(2 pi m.x + phase)` with velocity `-omega A sin(2 pi m.x + phase)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TravellingWave {
    pub wave: Vec<i64>,
    pub amplitude: f64,
    pub phase: f64,
}

impl TravellingWave {
    pub fn new(wave: Vec<i64>, amplitude: f64, phase: f64) -> Self {
        Self { wave, amplitude, phase }
    }

    /// `2 pi |m|`.
    pub fn omega(&self) -> f64 {
        wave_frequency(&self.wave)
    }

    /// Exact solution `A cos(2 pi m.x + phase + omega t)`.
    pub fn exact(&self, t: f64) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
        let shift = self.phase + self.omega() * t;
        move |x: &[f64]| {
            let arg: f64 = self.wave.iter().zip(x).map(|(&m, &xi)| m as f64 * xi).sum();
            self.amplitude * (std::f64::consts::TAU * arg + shift).cos()
        }
    }

    /// Initial state built from separable sine and cosine factors.
    pub fn initial_state(&self, space: &Space, t0: f64) -> Result<WaveState> {
        if self.wave.len() != space.dim {
            return Err(Error::InvalidArgument(format!(
                "wave vector of length {} in dimension {}",
                self.wave.len(),
                space.dim
            )));
        }
        let shift = self.phase + self.omega() * t0;
        let phi = plane_wave(space, &self.wave, self.amplitude, shift)?;
        // -omega A sin(s) = (-omega A) cos(s - pi/2)
        let psi = plane_wave(
            space,
            &self.wave,
            -self.omega() * self.amplitude,
            shift - std::f64::consts::FRAC_PI_2,
        )?;
        WaveState::new(phi, psi, t0)
    }
}

pub fn wave_frequency(wave: &[i64]) -> f64 {
    let sq: f64 = wave.iter().map(|&m| (m as f64).powi(2)).sum();
    std::f64::consts::TAU * sq.sqrt()
}

/// Evolves a [`TravellingWave`] on `space` from `t0` to `t1`.
pub fn travelling_wave_solver(
    space: &Space,
    wave: &TravellingWave,
    t0: f64,
    t1: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let state = wave.initial_state(space, t0)?;
    let laplacian = LaplacianOp::build(space, opts.laplacian, &opts.operator)?;
    evolve_state(&laplacian, &state, t1, opts)
}

/// `|psi|^2 + sum_a |D_a phi|^2`, conserved by the semi-discrete system.
pub fn energy(state: &WaveState, grad: &[SparseOperator]) -> f64 {
    let kinetic: f64 = state.psi.values.iter().map(|v| v * v).sum();
    let potential: f64 = grad
        .iter()
        .map(|d| d.matvec(&state.phi.values).iter().map(|v| v * v).sum::<f64>())
        .sum();
    kinetic + potential
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::project::reconstruct;

    #[test]
    fn frequency_of_wave_vector() {
        let w = wave_frequency(&[1, 0, -1, 2, 1]);
        assert!((w - std::f64::consts::TAU * 7f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn zero_state_has_zero_rhs_and_energy() {
        let space = Space::sparse(2, 2, 2).unwrap();
        let l = LaplacianOp::build(&space, LaplacianMode::Explicit, &OperatorOptions::default()).unwrap();
        let z = CoeffVector::zeros(space).unwrap();
        let st = WaveState::new(z.clone(), z, 0.0).unwrap();
        let (a, b) = wave_rhs(&st, &l).unwrap();
        assert!(a.iter().chain(&b).all(|&v| v == 0.0));
        let grad = grad_matrix(&space, &OperatorOptions::default()).unwrap();
        assert_eq!(energy(&st, &grad), 0.0);
    }

    #[test]
    fn modes_agree() {
        let space = Space::sparse(2, 3, 3).unwrap();
        let e = LaplacianOp::build(&space, LaplacianMode::Explicit, &OperatorOptions::default()).unwrap();
        let g = LaplacianOp::build(&space, LaplacianMode::Grad, &OperatorOptions::default()).unwrap();
        let x: Vec<f64> = (0..e.len()).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let (mut a, mut b) = (vec![0.0; x.len()], vec![0.0; x.len()]);
        e.apply(&x, &mut a);
        g.apply(&x, &mut b);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-9 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn zero_amplitude_stays_zero() {
        let space = Space::sparse(2, 2, 2).unwrap();
        let w = TravellingWave::new(vec![1, 1], 0.0, 0.3);
        let tr = travelling_wave_solver(&space, &w, 0.0, 0.1, &EvolveOptions::default()).unwrap();
        assert!(tr.last().phi.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn initial_state_matches_field() {
        let space = Space::sparse(2, 4, 3).unwrap();
        let w = TravellingWave::new(vec![1, -1], 1.3, 0.4);
        let st = w.initial_state(&space, 0.0).unwrap();
        let x = [0.3, 0.71];
        let exact = w.exact(0.0)(&x);
        assert!((reconstruct(&st.phi, &x).unwrap() - exact).abs() < 1e-2);
        assert!(w.initial_state(&space, 0.0).is_ok());
        let bad = TravellingWave::new(vec![1], 1.0, 0.0);
        assert!(bad.initial_state(&space, 0.0).is_err());
    }

    #[test]
    fn options_validated() {
        let space = Space::sparse(1, 2, 2).unwrap();
        let z = CoeffVector::zeros(space).unwrap();
        let st = WaveState::new(z.clone(), z, 0.0).unwrap();
        let l = LaplacianOp::build(&space, LaplacianMode::Explicit, &OperatorOptions::default()).unwrap();
        let bad = EvolveOptions {
            cfl: 1.5,
            ..Default::default()
        };
        assert!(evolve_state(&l, &st, 1.0, &bad).is_err());
        assert!(evolve_state(&l, &st, 0.0, &EvolveOptions::default()).is_err());
    }
}
