//! Projection onto full/sparse DG spaces, pointwise reconstruction,
//! tensor-product assembly from 1D factors and Monte Carlo `L^2` errors.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::basis1d::{cells, hier_index, legendre_values, HierEvaluator};
use crate::error::{Error, Result};
use crate::grid::{v2d, CoeffDict, CoeffVector, Layout, Space};
use crate::quadrature::QuadratureRule;

/// Default seed of [`mcerr`].
pub const DEFAULT_SEED: u64 = 0x5EED;
/// Default sample count of [`mcerr`].
pub const DEFAULT_COUNT: usize = 1000;

/// A real function on `[0, 1]^D`.
pub trait ScalarField: Sync {
    fn eval(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64 + Sync> ScalarField for F {
    fn eval(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

#[derive(Clone, Debug)]
pub struct ProjectOptions {
    /// Gauss points per polynomial piece and axis are `k + extra_points`.
    pub extra_points: usize,
    /// Refuse projections needing more function evaluations than this.
    pub max_evaluations: u128,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        Self {
            extra_points: 4,
            max_evaluations: 2_000_000_000,
        }
    }
}

/// Quadrature data for one level on the finest cells of `[0, 1]`.
///
/// Points are the Gauss nodes of every level-`n` cell in order. A level-`l`
/// function of element `i` covers the `span` consecutive points starting at
/// `i * span`; `table[m * span + p]` holds weight times basis value there,
/// identical for every element of the level.
struct LevelQuad {
    cells: usize,
    span: usize,
    table: Vec<f64>,
}

/// Gauss nodes of every finest cell, in increasing order.
fn fine_points(n: usize, order: usize) -> Vec<f64> {
    let rule = QuadratureRule::gauss_legendre(order);
    let fine = 1usize << n;
    let h = 1.0 / fine as f64;
    (0..fine)
        .flat_map(|c| {
            let a = c as f64 * h;
            rule.on_interval(a, a + h).map(|(x, _)| x).collect::<Vec<_>>()
        })
        .collect()
}

fn level_quadratures(k: usize, n: usize, order: usize) -> Result<Vec<LevelQuad>> {
    let rule = QuadratureRule::gauss_legendre(order);
    let fine = 1usize << n;
    let total = fine * order;
    let h = 1.0 / fine as f64;
    let mut weights = Vec::with_capacity(total);
    for c in 0..fine {
        let a = c as f64 * h;
        weights.extend(rule.on_interval(a, a + h).map(|(_, w)| w));
    }
    let points = fine_points(n, order);
    let mother = HierEvaluator::new(k, 1)?;
    let mut p = vec![0.0; k];
    let mut elems = [0u64; 2];
    let mut vals = vec![0.0; 2 * k];
    let mut out = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let cells = cells(l as u32) as usize;
        let span = total / cells;
        let scale = (cells as f64).sqrt();
        let mut table = vec![0.0; k * span];
        for j in 0..span {
            let (x, w) = (points[j], weights[j]);
            if l == 0 {
                legendre_values(2.0 * x - 1.0, &mut p);
                for m in 0..k {
                    table[m * span + j] = w * std::f64::consts::SQRT_2 * p[m];
                }
            } else {
                // local coordinate within the first element of the level
                mother.eval(x * cells as f64, &mut elems, &mut vals);
                for m in 0..k {
                    table[m * span + j] = w * scale * vals[k + m];
                }
            }
        }
        out.push(LevelQuad { cells, span, table });
    }
    Ok(out)
}

/// Number of integrand evaluations [`project`] would perform.
pub fn projection_cost(space: &Space, opts: &ProjectOptions) -> Result<u128> {
    let per_axis = ((space.k + opts.extra_points) as u128) << space.n();
    let mut total: u128 = 1;
    for _ in 0..space.dim {
        total = total.checked_mul(per_axis).ok_or(Error::Overflow("projection cost"))?;
    }
    Ok(total)
}

/// Contracts axis `axis` of a row-major tensor with the per-element table
/// of one level, replacing its extent by `cells * k`.
fn contract_axis(data: &[f64], shape: &mut [usize], axis: usize, quad: &LevelQuad, k: usize) -> Vec<f64> {
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let len = shape[axis];
    debug_assert_eq!(len, quad.cells * quad.span);
    let rows = quad.cells * k;
    let mut out = vec![0.0; outer * rows * inner];
    for o in 0..outer {
        for i in 0..quad.cells {
            for m in 0..k {
                let r = i * k + m;
                let dst = &mut out[(o * rows + r) * inner..(o * rows + r + 1) * inner];
                let trow = &quad.table[m * quad.span..(m + 1) * quad.span];
                for (p, &tv) in trow.iter().enumerate() {
                    let src_row = o * len + i * quad.span + p;
                    let src = &data[src_row * inner..(src_row + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += tv * s;
                    }
                }
            }
        }
    }
    shape[axis] = rows;
    out
}

/// Reorders `(i_0, m_0, i_1, m_1, ...)` into `(i_0, i_1, ..., m_0, m_1, ...)`.
fn split_elements_and_modes(data: &[f64], counts: &[usize], k: usize) -> Vec<f64> {
    let dim = counts.len();
    let mpe = k.pow(dim as u32);
    let mut out = vec![0.0; data.len()];
    let mut idx = vec![0usize; 2 * dim];
    for &v in data {
        let (mut erank, mut mrank) = (0, 0);
        for a in 0..dim {
            erank = erank * counts[a] + idx[2 * a];
            mrank = mrank * k + idx[2 * a + 1];
        }
        out[erank * mpe + mrank] = v;
        for a in (0..2 * dim).rev() {
            idx[a] += 1;
            let radix = if a % 2 == 0 { counts[a / 2] } else { k };
            if idx[a] < radix {
                break;
            }
            idx[a] = 0;
        }
    }
    out
}

/// Orthogonal projection `c_{l,i,m} = <f, v_{l,i,m}>` onto `space`.
///
/// Integrals use tensor Gauss-Legendre quadrature with `k + 4` points (by
/// default) per axis on every level-`n` cell. The integrand is sampled
/// once on that grid and contracted axis by axis for each level block, so
/// the cost is that of a full-grid projection whatever the scheme.
pub fn project<F: ScalarField + ?Sized>(space: &Space, f: &F, opts: &ProjectOptions) -> Result<CoeffVector> {
    let cost = projection_cost(space, opts)?;
    if cost > opts.max_evaluations {
        return Err(Error::CostExceeded {
            needed: cost,
            budget: opts.max_evaluations,
        });
    }
    let layout = Layout::new(space)?;
    let (k, dim, n) = (space.k, space.dim, space.n());
    let order = k + opts.extra_points;
    let quads = level_quadratures(k, n, order)?;
    let points = fine_points(n, order);
    let npts = points.len();

    // samples on the tensor grid, row-major
    let row: usize = npts.pow(dim as u32 - 1);
    let mut samples = vec![0.0; row * npts];
    samples.par_chunks_mut(row).enumerate().try_for_each(|(first, chunk)| {
        let mut x = vec![0.0; dim];
        x[0] = points[first];
        let mut idx = vec![0usize; dim];
        for s in chunk.iter_mut() {
            for a in 1..dim {
                x[a] = points[idx[a]];
            }
            let v = f.eval(&x);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    point: x.clone(),
                    value: v,
                });
            }
            *s = v;
            for a in (1..dim).rev() {
                idx[a] += 1;
                if idx[a] < npts {
                    break;
                }
                idx[a] = 0;
            }
        }
        Ok(())
    })?;

    // the last axis is contracted once per level and shared by all blocks
    let last = dim - 1;
    let partial: Vec<Vec<f64>> = (0..=n)
        .into_par_iter()
        .map(|l| {
            let mut shape = vec![npts; dim];
            contract_axis(&samples, &mut shape, last, &quads[l], k)
        })
        .collect();
    drop(samples);

    let blocks: Vec<Vec<f64>> = (0..layout.num_blocks())
        .into_par_iter()
        .map(|b| {
            let levels: Vec<usize> = layout.block_levels(b).iter().map(|&l| l as usize).collect();
            let counts: Vec<usize> = levels.iter().map(|&l| quads[l].cells).collect();
            let mut shape = vec![npts; dim];
            shape[last] = counts[last] * k;
            let mut data = None;
            for a in (0..last).rev() {
                let src = data.as_deref().unwrap_or(&partial[levels[last]][..]);
                data = Some(contract_axis(src, &mut shape, a, &quads[levels[a]], k));
            }
            let data = data.unwrap_or_else(|| partial[levels[last]].clone());
            split_elements_and_modes(&data, &counts, k)
        })
        .collect();

    CoeffVector::from_values(*space, blocks.concat())
}

/// [`project`] returning the dictionary form.
pub fn coeffs_dg<F: ScalarField + ?Sized>(space: &Space, f: &F, opts: &ProjectOptions) -> Result<CoeffDict> {
    v2d(&project(space, f, opts)?)
}

/// Hierarchical coefficients of a function on `[0, 1]` up to level `n`.
pub fn project_1d<F: Fn(f64) -> f64 + Sync>(f: F, k: usize, n: usize) -> Result<CoeffVector> {
    let space = Space::full(1, k, n)?;
    project(&space, &|x: &[f64]| f(x[0]), &ProjectOptions::default())
}

/// Evaluates coefficient vectors of one space at arbitrary points.
pub struct Reconstructor {
    layout: Layout,
    evaluator: HierEvaluator,
}

impl Reconstructor {
    pub fn new(space: &Space) -> Result<Self> {
        Ok(Self {
            layout: Layout::new(space)?,
            evaluator: HierEvaluator::new(space.k, space.n() as u32)?,
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// `sum c_{l,i,m} v_{l,i,m}(x)`, right-sided at element breakpoints.
    pub fn eval(&self, values: &[f64], x: &[f64]) -> Result<f64> {
        let space = self.layout.space();
        let (dim, k) = (space.dim, space.k);
        let levels = space.n() + 1;
        if values.len() != self.layout.len() {
            return Err(Error::LengthMismatch {
                expected: self.layout.len(),
                found: values.len(),
            });
        }
        if x.len() != dim || x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        let mut elems = vec![0u64; dim * levels];
        let mut vals = vec![0.0; dim * levels * k];
        for a in 0..dim {
            self.evaluator.eval(
                x[a],
                &mut elems[a * levels..(a + 1) * levels],
                &mut vals[a * levels * k..(a + 1) * levels * k],
            );
        }
        let mpe = self.layout.modes_per_element();
        let mut weights = vec![0.0; mpe];
        let mut total = 0.0;
        for b in 0..self.layout.num_blocks() {
            let lv = self.layout.block_levels(b);
            let mut erank = 0usize;
            let mut len = 1usize;
            weights[0] = 1.0;
            for (a, &l) in lv.iter().enumerate() {
                let l = l as usize;
                erank = erank * cells(l as u32) as usize + elems[a * levels + l] as usize;
                let axis_vals = &vals[(a * levels + l) * k..(a * levels + l + 1) * k];
                for j in (0..len).rev() {
                    let w = weights[j];
                    for m in 0..k {
                        weights[j * k + m] = w * axis_vals[m];
                    }
                }
                len *= k;
            }
            let start = self.layout.block_range(b).start + erank * mpe;
            total += values[start..start + mpe]
                .iter()
                .zip(&weights)
                .map(|(c, w)| c * w)
                .sum::<f64>();
        }
        Ok(total)
    }
}

/// Pointwise value of a coefficient vector.
pub fn reconstruct(coeffs: &CoeffVector, x: &[f64]) -> Result<f64> {
    Reconstructor::new(&coeffs.space)?.eval(&coeffs.values, x)
}

/// Pointwise value of a coefficient dictionary.
pub fn reconstruct_dg(coeffs: &CoeffDict, x: &[f64]) -> Result<f64> {
    reconstruct(&crate::grid::d2v(coeffs)?, x)
}

/// Coefficients of `prod_d g_d(x_d)` from the 1D hierarchical coefficients of each `g_d`.
///
/// Each factor must have length `k * 2^n`. Restricting the product to the
/// scheme is the exact orthogonal projection of the product function.
pub fn tensor_construct(space: &Space, factors: &[&[f64]]) -> Result<CoeffVector> {
    let (dim, k) = (space.dim, space.k);
    if factors.len() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            found: factors.len(),
        });
    }
    let flen = k << space.n();
    for f in factors {
        if f.len() != flen {
            return Err(Error::LengthMismatch {
                expected: flen,
                found: f.len(),
            });
        }
    }
    let layout = Layout::new(space)?;
    let mpe = layout.modes_per_element();
    let mut values = vec![0.0; layout.len()];
    let mut elem = vec![0u64; dim];
    for b in 0..layout.num_blocks() {
        let lv = layout.block_levels(b);
        let counts: Vec<u64> = lv.iter().map(|&l| cells(l as u32)).collect();
        let block = &mut values[layout.block_range(b)];
        elem.iter_mut().for_each(|e| *e = 0);
        for chunk in block.chunks_exact_mut(mpe) {
            chunk[0] = 1.0;
            let mut len = 1;
            for a in 0..dim {
                let start = hier_index(k, lv[a] as u32, elem[a], 0);
                let axis = &factors[a][start..start + k];
                for j in (0..len).rev() {
                    let w = chunk[j];
                    for m in 0..k {
                        chunk[j * k + m] = w * axis[m];
                    }
                }
                len *= k;
            }
            for a in (0..dim).rev() {
                elem[a] += 1;
                if elem[a] < counts[a] {
                    break;
                }
                elem[a] = 0;
            }
        }
    }
    CoeffVector::from_values(*space, values)
}

/// Coefficients of `amplitude * cos(2 pi m.x + phase)` built from 1D projections.
///
/// Expands `cos(phase + sum theta_d)` into `2^s` products of 1D sines and
/// cosines (`s` = number of nonzero wave numbers) and sums their tensor
/// constructions.
pub fn plane_wave(space: &Space, wave: &[i64], amplitude: f64, phase: f64) -> Result<CoeffVector> {
    if wave.len() != space.dim {
        return Err(Error::LengthMismatch {
            expected: space.dim,
            found: wave.len(),
        });
    }
    let (k, n) = (space.k, space.n());
    let tau = std::f64::consts::TAU;
    let mut cos_f = Vec::with_capacity(space.dim);
    let mut sin_f = Vec::with_capacity(space.dim);
    for &m in wave {
        let w = tau * m as f64;
        cos_f.push(project_1d(move |x| (w * x).cos(), k, n)?.values);
        sin_f.push(project_1d(move |x| (w * x).sin(), k, n)?.values);
    }
    let active: Vec<usize> = (0..space.dim).filter(|&a| wave[a] != 0).collect();
    let mut out = CoeffVector::zeros(*space)?;
    for subset in 0u64..(1u64 << active.len()) {
        let sines = subset.count_ones();
        // Re(e^{i phase} i^s)
        let coef = amplitude
            * match sines % 4 {
                0 => phase.cos(),
                1 => -phase.sin(),
                2 => -phase.cos(),
                _ => phase.sin(),
            };
        if coef == 0.0 {
            continue;
        }
        let factors: Vec<&[f64]> = (0..space.dim)
            .map(|a| match active.iter().position(|&x| x == a) {
                Some(bit) if subset >> bit & 1 == 1 => sin_f[a].as_slice(),
                _ => cos_f[a].as_slice(),
            })
            .collect();
        let term = tensor_construct(space, &factors)?;
        out.values
            .iter_mut()
            .zip(&term.values)
            .for_each(|(o, t)| *o += coef * t);
    }
    Ok(out)
}

/// Uniform points in `[0, 1]^dim` from xoshiro256++ seeded by SplitMix64.
pub fn sample_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect()
}

/// Monte Carlo `L^2` distance `sqrt(mean |f - g|^2)` over `count` seeded points.
pub fn mcerr<F, G>(f: &F, g: &G, dim: usize, count: usize, seed: u64) -> f64
where
    F: ScalarField + ?Sized,
    G: ScalarField + ?Sized,
{
    let count = count.max(1);
    let points = sample_points(dim, count, seed);
    let sq: Vec<f64> = points
        .par_iter()
        .map(|x| {
            let d = f.eval(x) - g.eval(x);
            d * d
        })
        .collect();
    (sq.iter().sum::<f64>() / count as f64).sqrt()
}

/// [`mcerr`] between an exact function and a coefficient vector.
pub fn mcerr_coeffs<F: ScalarField + ?Sized>(exact: &F, coeffs: &CoeffVector, count: usize, seed: u64) -> Result<f64> {
    let rec = Reconstructor::new(&coeffs.space)?;
    let approx = |x: &[f64]| rec.eval(&coeffs.values, x).unwrap_or(f64::NAN);
    Ok(mcerr(exact, &approx, coeffs.space.dim, count, seed))
}
