//! The four experiment sweeps.
//!
//! Each configuration yields one [`Record`]. Budget overruns become
//! `infeasible` rows and solver aborts `failed` rows; only invalid
//! arguments make a command return an error.

use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;
use sgdg::evolve::evolve_state;
use sgdg::operators::{csr_bytes, full_laplacian_nnz, laplacian_peak_bytes, DerivKit1D};
use sgdg::project::{mcerr_coeffs, plane_wave};
use sgdg::{
    d_matrix, space_dim, Error, EvolveOptions, Integrator, LaplacianMode, LaplacianOp, OperatorOptions, Result,
    SchemeKind, Space, TravellingWave,
};

use crate::record::{Record, Report, Status};
use crate::sweep::Sweep;

/// A plane wave `A cos(2 pi m.x + phase)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Wave {
    pub numbers: Vec<i64>,
    pub amplitude: f64,
    pub phase: f64,
}

impl Wave {
    fn travelling(&self) -> TravellingWave {
        TravellingWave::new(self.numbers.clone(), self.amplitude, self.phase)
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.numbers.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "wave vector has {} entries, dimension is {dim}",
                self.numbers.len()
            )));
        }
        if !(self.amplitude.is_finite() && self.phase.is_finite()) {
            return Err(Error::InvalidArgument("amplitude and phase must be finite".into()));
        }
        Ok(())
    }

    fn to_json(&self) -> serde_json::Value {
        json!({ "wave": self.numbers, "amplitude": self.amplitude, "phase": self.phase })
    }
}

#[derive(Clone, Debug)]
pub struct InterpConfig {
    pub sweep: Sweep,
    pub wave: Wave,
    pub seed: u64,
    pub count: usize,
}

#[derive(Clone, Debug)]
pub struct NnzConfig {
    pub sweep: Sweep,
    /// 1-based.
    pub axis: usize,
}

#[derive(Clone, Debug)]
pub struct EvolveConfig {
    pub sweep: Sweep,
    pub wave: Wave,
    pub t1: f64,
    pub integrator: Integrator,
    pub tol: f64,
    pub laplacian: LaplacianMode,
    pub seed: u64,
    pub count: usize,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sweep: Sweep,
    pub wave: Wave,
    pub reps: usize,
    pub seed: u64,
    pub count: usize,
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn classify(rec: &mut Record, err: &Error) {
    let status = match err {
        Error::TooLarge { .. } | Error::CostExceeded { .. } | Error::Overflow(_) => Status::Infeasible,
        _ => Status::Failed,
    };
    rec.mark(status, err.to_string());
}

fn within_budget(what: &'static str, needed: u128, budget: u64) -> Result<()> {
    if needed > budget as u128 {
        return Err(Error::TooLarge {
            what,
            needed,
            budget: budget as u128,
        });
    }
    Ok(())
}

fn operator_options(sweep: &Sweep) -> OperatorOptions {
    OperatorOptions {
        max_bytes: sweep.budget_bytes as u128,
        ..Default::default()
    }
}

/// Runs `body` on a fresh record, folding errors into the status columns.
fn run_row(
    experiment: &str,
    sweep: &Sweep,
    k: usize,
    scheme: SchemeKind,
    n: usize,
    body: impl FnOnce(&mut Record) -> Result<()>,
) -> Record {
    let mut rec = Record::new(experiment, sweep.dim, k, n, scheme);
    if let Err(e) = body(&mut rec) {
        classify(&mut rec, &e);
    }
    rec
}

fn space_and_size(sweep: &Sweep, k: usize, scheme: SchemeKind, n: usize, rec: &mut Record) -> Result<(Space, usize)> {
    let space = sweep.space(k, scheme, n)?;
    let p = space_dim(&space)?;
    rec.p = Some(p);
    let p = usize::try_from(p).map_err(|_| Error::Overflow("space dimension"))?;
    Ok((space, p))
}

/// Interpolation error of the plane wave against the number of coefficients.
pub fn cmd_interp(cfg: &InterpConfig) -> Result<Report> {
    cfg.sweep.validate()?;
    cfg.wave.check(cfg.sweep.dim)?;
    let rows: Vec<Record> = cfg
        .sweep
        .configs()
        .into_par_iter()
        .map(|(k, scheme, n)| {
            run_row("interp", &cfg.sweep, k, scheme, n, |rec| {
                let (space, p) = space_and_size(&cfg.sweep, k, scheme, n, rec)?;
                let bytes = p as u128 * 8;
                rec.mem_bytes = Some(bytes as u64);
                within_budget("coefficient vector", bytes, cfg.sweep.budget_bytes)?;
                let start = Instant::now();
                let c = plane_wave(&space, &cfg.wave.numbers, cfg.wave.amplitude, cfg.wave.phase)?;
                let tw = cfg.wave.travelling();
                rec.mcerr = Some(mcerr_coeffs(&tw.exact(0.0), &c, cfg.count, cfg.seed)?);
                rec.wall_ms = Some(elapsed_ms(start));
                Ok(())
            })
        })
        .collect();
    let params = json!({
        "sweep": cfg.sweep,
        "plane_wave": cfg.wave.to_json(),
        "seed": cfg.seed,
        "count": cfg.count,
    });
    let mut rep = Report::new("interp", params, rows);
    rep.fit_series("P", "mcerr", |r| r.p.map(|p| p as f64), |r| r.mcerr);
    Ok(rep)
}

/// Nonzeros of the full-grid derivative along one axis: the 1D operator
/// times the identity on every other axis.
fn full_derivative_nnz(dim: usize, k: usize, n: usize, opts: &OperatorOptions) -> Result<u128> {
    let kit = DerivKit1D::new(k, n as u32, opts)?;
    let side = (k as u128) << n;
    let rest = (1..dim).try_fold(1u128, |acc, _| {
        acc.checked_mul(side).ok_or(Error::Overflow("operator size"))
    })?;
    Ok(kit.hier_sparse().nnz() as u128 * rest)
}

/// Sparsity of the derivative operator along `axis`.
pub fn cmd_nnz(cfg: &NnzConfig) -> Result<Report> {
    cfg.sweep.validate()?;
    if cfg.axis == 0 || cfg.axis > cfg.sweep.dim {
        return Err(Error::InvalidArgument(format!(
            "axis {} outside 1..={}",
            cfg.axis, cfg.sweep.dim
        )));
    }
    let opts = operator_options(&cfg.sweep);
    let rows: Vec<Record> = cfg
        .sweep
        .configs()
        .into_par_iter()
        .map(|(k, scheme, n)| {
            run_row("nnz", &cfg.sweep, k, scheme, n, |rec| {
                let (space, p) = space_and_size(&cfg.sweep, k, scheme, n, rec)?;
                if scheme == SchemeKind::Full {
                    let nnz = full_derivative_nnz(cfg.sweep.dim, k, n, &opts)?;
                    let bytes = csr_bytes(p, nnz.min(usize::MAX as u128) as usize);
                    rec.nnz = Some(nnz as u64);
                    rec.mem_bytes = Some(bytes as u64);
                    within_budget("derivative operator", bytes, cfg.sweep.budget_bytes)?;
                }
                let start = Instant::now();
                let d = d_matrix(&space, cfg.axis, &opts)?;
                rec.wall_ms = Some(elapsed_ms(start));
                rec.nnz = Some(d.nnz() as u64);
                rec.mem_bytes = Some(d.memory_bytes() as u64);
                Ok(())
            })
        })
        .collect();
    let params = json!({ "sweep": cfg.sweep, "axis": cfg.axis });
    let mut rep = Report::new("nnz", params, rows);
    rep.fit_series("P", "nnz", |r| r.p.map(|p| p as f64), |r| r.nnz.map(|v| v as f64));
    let mut bounds = std::collections::BTreeMap::new();
    for r in rep.rows.iter().filter(|r| r.is_ok()) {
        if let (Some(p), Some(nnz)) = (r.p, r.nnz) {
            let c = nnz as f64 / (p as f64 * (r.n + 1) as f64);
            let key = format!("nnz_bound_c/k={}/{}", r.k, r.scheme);
            let e = bounds.entry(key).or_insert(0.0f64);
            *e = e.max(c);
        }
    }
    rep.summary.metrics.extend(bounds);
    Ok(rep)
}

/// Nonzeros, stored bytes and peak construction bytes of the full-grid
/// Laplacian in `mode`, without assembling it.
fn full_laplacian_cost(
    dim: usize,
    k: usize,
    n: usize,
    p: usize,
    mode: LaplacianMode,
    opts: &OperatorOptions,
) -> Result<(u128, u128, u128)> {
    let grad_nnz = full_derivative_nnz(dim, k, n, opts)?;
    let grad_bytes = dim as u128 * csr_bytes(p, 0) + grad_nnz * dim as u128 * 12;
    Ok(match mode {
        LaplacianMode::Explicit => {
            let nnz = full_laplacian_nnz(dim, k, n, opts)?;
            let nnz_usize = usize::try_from(nnz).map_err(|_| Error::Overflow("Laplacian size"))?;
            (
                nnz,
                csr_bytes(p, nnz_usize),
                laplacian_peak_bytes(grad_bytes, p, nnz_usize),
            )
        }
        LaplacianMode::Grad => (grad_nnz * dim as u128, grad_bytes, grad_bytes),
    })
}

/// Travelling-wave evolution error at `t1` for each level.
pub fn cmd_evolve(cfg: &EvolveConfig) -> Result<Report> {
    cfg.sweep.validate()?;
    cfg.wave.check(cfg.sweep.dim)?;
    if !(cfg.t1 > 0.0 && cfg.t1.is_finite()) {
        return Err(Error::InvalidArgument(format!("end time {} must be positive", cfg.t1)));
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance {} must be positive",
            cfg.tol
        )));
    }
    let opts = operator_options(&cfg.sweep);
    let tw = cfg.wave.travelling();
    // levels run one after another; each solve is parallel inside
    let rows: Vec<Record> = cfg
        .sweep
        .configs()
        .into_iter()
        .map(|(k, scheme, n)| {
            run_row("evolve", &cfg.sweep, k, scheme, n, |rec| {
                let (space, p) = space_and_size(&cfg.sweep, k, scheme, n, rec)?;
                let state_bytes = 2 * p as u128 * 8;
                if scheme == SchemeKind::Full {
                    let (nnz, bytes, peak) = full_laplacian_cost(cfg.sweep.dim, k, n, p, cfg.laplacian, &opts)?;
                    rec.nnz = Some(nnz as u64);
                    rec.mem_bytes = Some((bytes + state_bytes) as u64);
                    within_budget("Laplacian construction", peak + state_bytes, cfg.sweep.budget_bytes)?;
                }
                within_budget("wave state", state_bytes, cfg.sweep.budget_bytes)?;
                let start = Instant::now();
                let lap = LaplacianOp::build(&space, cfg.laplacian, &opts)?;
                rec.nnz = Some(lap.nnz() as u64);
                rec.mem_bytes = Some(lap.memory_bytes() as u64 + state_bytes as u64);
                let init = tw.initial_state(&space, 0.0)?;
                let eo = EvolveOptions {
                    integrator: cfg.integrator,
                    rtol: cfg.tol,
                    atol: cfg.tol,
                    laplacian: cfg.laplacian,
                    operator: opts.clone(),
                    ..Default::default()
                };
                let tr = evolve_state(&lap, &init, cfg.t1, &eo)?;
                rec.wall_ms = Some(elapsed_ms(start));
                rec.steps_accepted = Some(tr.stats.accepted as u64);
                rec.steps_rejected = Some(tr.stats.rejected as u64);
                rec.mcerr = Some(mcerr_coeffs(&tw.exact(cfg.t1), &tr.last().phi, cfg.count, cfg.seed)?);
                Ok(())
            })
        })
        .collect();
    let params = json!({
        "sweep": cfg.sweep,
        "plane_wave": cfg.wave.to_json(),
        "t1": cfg.t1,
        "integrator": cfg.integrator,
        "tol": cfg.tol,
        "laplacian": format!("{:?}", cfg.laplacian).to_lowercase(),
        "seed": cfg.seed,
        "count": cfg.count,
    });
    let mut rep = Report::new("evolve", params, rows);
    rep.fit_series("P", "mcerr", |r| r.p.map(|p| p as f64), |r| r.mcerr);
    Ok(rep)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Laplacian mat-vec time and memory, sparse against full.
pub fn cmd_bench(cfg: &BenchConfig) -> Result<Report> {
    cfg.sweep.validate()?;
    cfg.wave.check(cfg.sweep.dim)?;
    if cfg.reps == 0 {
        return Err(Error::InvalidArgument("reps must be >= 1".into()));
    }
    let opts = operator_options(&cfg.sweep);
    let tw = cfg.wave.travelling();
    // sequential, so that timings do not compete
    let rows: Vec<Record> = cfg
        .sweep
        .configs()
        .into_iter()
        .map(|(k, scheme, n)| {
            run_row("bench", &cfg.sweep, k, scheme, n, |rec| {
                let (space, p) = space_and_size(&cfg.sweep, k, scheme, n, rec)?;
                let vec_bytes = 2 * p as u128 * 8;
                if scheme == SchemeKind::Full {
                    let (nnz, bytes, peak) =
                        full_laplacian_cost(cfg.sweep.dim, k, n, p, LaplacianMode::Explicit, &opts)?;
                    rec.nnz = Some(nnz as u64);
                    rec.mem_bytes = Some((bytes + vec_bytes) as u64);
                    within_budget("Laplacian construction", peak + vec_bytes, cfg.sweep.budget_bytes)?;
                }
                let lap = sgdg::laplacian_matrix(&space, &opts)?;
                rec.nnz = Some(lap.nnz() as u64);
                rec.mem_bytes = Some(lap.memory_bytes() as u64 + vec_bytes as u64);
                let x = plane_wave(&space, &cfg.wave.numbers, cfg.wave.amplitude, cfg.wave.phase)?;
                rec.mcerr = Some(mcerr_coeffs(&tw.exact(0.0), &x, cfg.count, cfg.seed)?);
                let mut y = vec![0.0; p];
                lap.matvec_into(&x.values, &mut y);
                let times = (0..cfg.reps)
                    .map(|_| {
                        let start = Instant::now();
                        lap.matvec_into(&x.values, &mut y);
                        elapsed_ms(start)
                    })
                    .collect();
                rec.wall_ms = Some(median(times));
                Ok(())
            })
        })
        .collect();
    let params = json!({
        "sweep": cfg.sweep,
        "plane_wave": cfg.wave.to_json(),
        "reps": cfg.reps,
        "seed": cfg.seed,
        "count": cfg.count,
    });
    let mut rep = Report::new("bench", params, rows);
    rep.fit_series("nnz", "wall_ms", |r| r.nnz.map(|v| v as f64), |r| r.wall_ms);
    // memory is known for infeasible full rows too, so pair on that
    let mut ratios = Vec::new();
    for s in rep.rows.iter().filter(|r| r.scheme == SchemeKind::Sparse && r.is_ok()) {
        let full = rep
            .rows
            .iter()
            .find(|f| f.scheme == SchemeKind::Full && f.k == s.k && f.n == s.n);
        if let (Some(a), Some(b)) = (s.mem_bytes, full.and_then(|f| f.mem_bytes)) {
            ratios.push((format!("mem_ratio/k={}/n={}", s.k, s.n), a as f64 / b as f64));
        }
    }
    rep.summary.metrics.extend(ratios);
    Ok(rep)
}
