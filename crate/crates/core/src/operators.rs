//! Weak first-derivative operators with a central numerical flux.
//!
//! The 1D operator is assembled in the nodal basis, conjugated into the
//! hierarchical basis with `Q`, and extended to D dimensions by acting on a
//! single axis. Entries between admissible multi-levels are kept; anything
//! leading out of the scheme is discarded. The D-dimensional matrix is
//! assembled directly in the scheme, never through the full tensor space.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::basis1d::{cells, hier_index, hier_key, legendre_derivatives, legendre_values, Basis1D};
use crate::error::{Error, Result};
use crate::grid::{Layout, Space};
use crate::quadrature::QuadratureRule;
use crate::sparse::SparseOperator;

/// Treatment of the two ends of `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Identify `0` and `1`.
    #[default]
    Periodic,
    /// Average with zero outside the domain.
    ZeroExtension,
}

#[derive(Clone, Debug)]
pub struct OperatorOptions {
    pub boundary: Boundary,
    /// Entries with `|v| <= drop_tol * max |v|` are dropped (relative to the
    /// largest 1D entry, or its square for the Laplacian).
    pub drop_tol: f64,
    /// Refuse to build operators whose storage exceeds this many bytes.
    pub max_bytes: u128,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        Self {
            boundary: Boundary::Periodic,
            drop_tol: 1e-14,
            max_bytes: 4 << 30,
        }
    }
}

/// Square dense matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.n)
            .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `max |A + A^T|`.
    pub fn skew_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.get(i, j) + self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Central-flux weak derivative in the nodal basis `h_{n,i,m}`.
///
/// Row `(i, m)`, column `(i', m')` holds `<h_{i,m}, d/dx h_{i',m'}>`:
/// the interface terms of element `i` with the averaged value of the
/// column function, minus the volume integral of `h_{i',m'} h'_{i,m}`.
pub fn derivative_1d_nodal(k: usize, n: u32, boundary: Boundary) -> DenseMatrix {
    let elements = 1usize << n;
    let size = k * elements;
    let h = (-(n as f64)).exp2();
    let s2 = 2.0 / h;

    let mut right = vec![0.0; k];
    let mut left = vec![0.0; k];
    legendre_values(1.0, &mut right);
    legendre_values(-1.0, &mut left);

    // volume[m][mp] = int_{-1}^{1} p_m'(t) p_mp(t) dt
    let rule = QuadratureRule::gauss_legendre(k + 1);
    let mut volume = vec![0.0; k * k];
    let mut p = vec![0.0; k];
    let mut dp = vec![0.0; k];
    for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
        legendre_values(t, &mut p);
        legendre_derivatives(t, &mut dp);
        for m in 0..k {
            for mp in 0..k {
                volume[m * k + mp] += w * dp[m] * p[mp];
            }
        }
    }

    let mut d = DenseMatrix::zeros(size);
    for e in 0..elements {
        let right_nb = if e + 1 < elements {
            Some(e + 1)
        } else if boundary == Boundary::Periodic {
            Some(0)
        } else {
            None
        };
        let left_nb = if e > 0 {
            Some(e - 1)
        } else if boundary == Boundary::Periodic {
            Some(elements - 1)
        } else {
            None
        };
        for m in 0..k {
            let row = e * k + m;
            for mp in 0..k {
                let same = 0.5 * s2 * (right[m] * right[mp] - left[m] * left[mp]) - s2 * volume[m * k + mp];
                d.add(row, e * k + mp, same);
                if let Some(r) = right_nb {
                    d.add(row, r * k + mp, 0.5 * s2 * right[m] * left[mp]);
                }
                if let Some(l) = left_nb {
                    d.add(row, l * k + mp, -0.5 * s2 * left[m] * right[mp]);
                }
            }
        }
    }
    d
}

/// `Q D Q^T`: the nodal derivative conjugated into the hierarchical basis.
pub fn derivative_1d_hier(basis: &Basis1D, boundary: Boundary) -> DenseMatrix {
    let nodal = derivative_1d_nodal(basis.k(), basis.n(), boundary);
    conjugate(basis, &nodal)
}

fn conjugate(basis: &Basis1D, nodal: &DenseMatrix) -> DenseMatrix {
    let size = basis.len();
    let k = basis.k();
    let elements = size / k;
    let q = basis.q();

    // y = D Q^T; row a of D touches only its own and neighbouring elements
    let mut y = vec![0.0; size * size];
    y.par_chunks_mut(size).enumerate().for_each(|(a, yrow)| {
        let e = a / k;
        let mut nb = vec![e];
        if elements > 1 {
            nb.push((e + 1) % elements);
            nb.push((e + elements - 1) % elements);
        }
        nb.sort_unstable();
        nb.dedup();
        let drow = &nodal.data[a * size..(a + 1) * size];
        for (c, out) in yrow.iter_mut().enumerate() {
            let qrow = &q[c * size..(c + 1) * size];
            *out = nb
                .iter()
                .flat_map(|&ne| ne * k..(ne + 1) * k)
                .map(|b| drow[b] * qrow[b])
                .sum();
        }
    });

    let mut out = vec![0.0; size * size];
    out.par_chunks_mut(size).enumerate().for_each(|(r, orow)| {
        for a in basis.q_row_support(r) {
            let qa = q[r * size + a];
            if qa == 0.0 {
                continue;
            }
            for (o, &yv) in orow.iter_mut().zip(&y[a * size..(a + 1) * size]) {
                *o += qa * yv;
            }
        }
    });
    DenseMatrix::from_vec(size, out)
}

/// Points where the hierarchical function `idx` may jump.
fn breakpoints(k: usize, idx: usize, boundary: Boundary) -> ([f64; 3], usize) {
    let (l, i0, _) = hier_key(k, idx);
    if l == 0 {
        return match boundary {
            Boundary::Periodic => ([0.0, 0.0, 0.0], 1),
            Boundary::ZeroExtension => ([0.0, 1.0, 0.0], 2),
        };
    }
    let c = cells(l) as f64;
    let a = i0 as f64 / c;
    let b = (i0 + 1) as f64 / c;
    ([a, 0.5 * (a + b), b], 3)
}

fn support(k: usize, idx: usize) -> (f64, f64) {
    let (l, i0, _) = hier_key(k, idx);
    let c = cells(l) as f64;
    (i0 as f64 / c, (i0 + 1) as f64 / c)
}

/// Whether the closed support of `col` contains a breakpoint of `row`.
///
/// Across levels only the two wavelets with nonzero end values couple: the
/// others are orthogonal to the coarser derivative and vanish at every coarse
/// breakpoint they meet.
fn touches(k: usize, row: usize, col: usize, boundary: Boundary) -> bool {
    let (lr, _, mr) = hier_key(k, row);
    let (lc, _, mc) = hier_key(k, col);
    if (lr > lc && mr >= 2) || (lc > lr && mc >= 2) {
        return false;
    }
    let (pts, count) = breakpoints(k, row, boundary);
    let (a, b) = support(k, col);
    pts[..count].iter().any(|&p| {
        (a <= p && p <= b) || (boundary == Boundary::Periodic && (p == 0.0 || p == 1.0) && (a == 0.0 || b == 1.0))
    })
}

/// 1D derivative data shared by every axis of a D-dimensional operator.
#[derive(Clone, Debug)]
pub struct DerivKit1D {
    k: usize,
    n: u32,
    boundary: Boundary,
    nodal: DenseMatrix,
    hier: DenseMatrix,
    rows: Vec<Vec<(u32, f64)>>,
}

impl DerivKit1D {
    pub fn new(k: usize, n: u32, opts: &OperatorOptions) -> Result<Self> {
        let basis = Basis1D::new(k, n)?;
        Ok(Self::from_basis(&basis, opts))
    }

    pub fn from_basis(basis: &Basis1D, opts: &OperatorOptions) -> Self {
        let (k, n) = (basis.k(), basis.n());
        let nodal = derivative_1d_nodal(k, n, opts.boundary);
        let hier = conjugate(basis, &nodal);
        let size = hier.size();
        let cutoff = opts.drop_tol * hier.max_abs();
        // An entry can only be nonzero if the column's support reaches a
        // breakpoint of the row function (and, being skew, vice versa).
        let rows = (0..size)
            .map(|r| {
                (0..size)
                    .filter(|&c| {
                        let v = hier.get(r, c).abs().max(hier.get(c, r).abs());
                        v > cutoff
                            && touches(k, r, c, opts.boundary)
                            && (opts.boundary != Boundary::Periodic || touches(k, c, r, opts.boundary))
                    })
                    .map(|c| (c as u32, hier.get(r, c)))
                    .collect()
            })
            .collect();
        Self {
            k,
            n,
            boundary: opts.boundary,
            nodal,
            hier,
            rows,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn nodal(&self) -> &DenseMatrix {
        &self.nodal
    }

    /// Unfiltered `Q D Q^T`.
    pub fn hier(&self) -> &DenseMatrix {
        &self.hier
    }

    /// Filtered sparse rows of the hierarchical matrix.
    pub fn hier_rows(&self) -> &[Vec<(u32, f64)>] {
        &self.rows
    }

    pub fn hier_sparse(&self) -> SparseOperator {
        let size = self.rows.len();
        SparseOperator::from_rows(size, size, self.rows.clone()).expect("valid 1D rows")
    }
}

fn check_budget(what: &'static str, needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        Err(Error::TooLarge { what, needed, budget })
    } else {
        Ok(())
    }
}

/// Bytes of a compressed-row matrix with `rows` rows and `nnz` entries.
pub fn csr_bytes(rows: usize, nnz: usize) -> u128 {
    (rows as u128 + 1) * 8 + nnz as u128 * 12
}

/// Per-block information about where axis-`axis` entries land.
struct Target {
    block: usize,
    offset: usize,
    /// element-rank strides of the target block
    strides: Vec<usize>,
}

fn element_strides(levels: &[u8]) -> Vec<usize> {
    let d = levels.len();
    let mut s = vec![1usize; d];
    for a in (0..d.saturating_sub(1)).rev() {
        s[a] = s[a + 1] * cells(levels[a + 1] as u32) as usize;
    }
    s
}

/// Visits every row of block `b` with its 1D row index on `axis` and a
/// closure mapping `(level, element, mode)` on that axis to a column.
fn assemble_block<F: FnMut(usize, &[(u32, f64)], &dyn Fn(u32, u64, usize) -> Option<usize>)>(
    layout: &Layout,
    kit: &DerivKit1D,
    axis: usize,
    b: usize,
    mut visit: F,
) {
    let space = layout.space();
    let (dim, k) = (space.dim, space.k);
    let mpe = layout.modes_per_element();
    let levels = layout.block_levels(b).to_vec();
    let counts: Vec<u64> = levels.iter().map(|&l| cells(l as u32)).collect();
    let nelem: u64 = counts.iter().product();
    let kstride = k.pow((dim - 1 - axis) as u32);

    let mut targets: Vec<Option<Target>> = Vec::with_capacity(space.n() + 1);
    let mut probe = levels.clone();
    for lp in 0..=space.n() {
        probe[axis] = lp as u8;
        targets.push(layout.block_of_bytes(&probe).map(|tb| Target {
            block: tb,
            offset: layout.block_range(tb).start,
            strides: element_strides(&probe),
        }));
    }

    let start = layout.block_range(b).start;
    let mut elem = vec![0u64; dim];
    for erank in 0..nelem as usize {
        // element rank in each target block with the axis component removed
        let partial: Vec<usize> = targets
            .iter()
            .map(|t| match t {
                Some(t) => (0..dim)
                    .filter(|&a| a != axis)
                    .map(|a| elem[a] as usize * t.strides[a])
                    .sum(),
                None => 0,
            })
            .collect();
        for mrank in 0..mpe {
            let row = start + erank * mpe + mrank;
            let my_mode = (mrank / kstride) % k;
            let r1 = hier_index(k, levels[axis] as u32, elem[axis], my_mode);
            let base_mrank = mrank - my_mode * kstride;
            let col_of = |lp: u32, ip: u64, mp: usize| -> Option<usize> {
                let t = targets[lp as usize].as_ref()?;
                let _ = t.block;
                Some(
                    t.offset + (partial[lp as usize] + ip as usize * t.strides[axis]) * mpe + base_mrank + mp * kstride,
                )
            };
            visit(row, &kit.rows[r1], &col_of);
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

/// Derivative along `axis` (0-based) restricted to the layout's scheme.
pub fn derivative_operator(
    layout: &Layout,
    kit: &DerivKit1D,
    axis: usize,
    opts: &OperatorOptions,
) -> Result<SparseOperator> {
    let space = layout.space();
    if axis >= space.dim {
        return Err(Error::IndexOutOfRange(format!(
            "axis {} in dimension {}",
            axis + 1,
            space.dim
        )));
    }
    if kit.k() != space.k || kit.n() as usize != space.n() {
        return Err(Error::InvalidArgument("derivative kit does not match the space".into()));
    }
    let k = space.k;
    let p = layout.len();

    let nnz: usize = (0..layout.num_blocks())
        .into_par_iter()
        .map(|b| {
            let mut count = 0usize;
            assemble_block(layout, kit, axis, b, |_, entries, col_of| {
                count += entries
                    .iter()
                    .filter(|&&(c1, _)| {
                        let (lp, ip, mp) = hier_key(k, c1 as usize);
                        col_of(lp, ip, mp).is_some()
                    })
                    .count();
            });
            count
        })
        .sum();
    check_budget("derivative operator", csr_bytes(p, nnz), opts.max_bytes)?;

    let blocks: Vec<Vec<Vec<(u32, f64)>>> = (0..layout.num_blocks())
        .into_par_iter()
        .map(|b| {
            let mut rows = Vec::with_capacity(layout.block_range(b).len());
            assemble_block(layout, kit, axis, b, |_, entries, col_of| {
                let mut row: Vec<(u32, f64)> = entries
                    .iter()
                    .filter_map(|&(c1, v)| {
                        let (lp, ip, mp) = hier_key(k, c1 as usize);
                        col_of(lp, ip, mp).map(|c| (c as u32, v))
                    })
                    .collect();
                row.sort_by_key(|e| e.0);
                rows.push(row);
            });
            rows
        })
        .collect();
    SparseOperator::from_rows(p, p, blocks.into_iter().flatten().collect())
}

/// `D_a` on `space`, with `axis` counted from 1.
pub fn d_matrix(space: &Space, axis: usize, opts: &OperatorOptions) -> Result<SparseOperator> {
    if axis == 0 || axis > space.dim {
        return Err(Error::IndexOutOfRange(format!(
            "axis {axis} in dimension {}",
            space.dim
        )));
    }
    let layout = Layout::new(space)?;
    let kit = DerivKit1D::new(space.k, space.n() as u32, opts)?;
    derivative_operator(&layout, &kit, axis - 1, opts)
}

/// `[D_1, ..., D_D]`.
pub fn grad_matrix(space: &Space, opts: &OperatorOptions) -> Result<Vec<SparseOperator>> {
    let layout = Layout::new(space)?;
    let kit = DerivKit1D::new(space.k, space.n() as u32, opts)?;
    (0..space.dim)
        .map(|a| derivative_operator(&layout, &kit, a, opts))
        .collect()
}

/// Peak bytes while the Laplacian is formed from gradient matrices holding
/// `held` bytes: row buffers of index-value pairs, then the final matrix.
pub fn laplacian_peak_bytes(held: u128, rows: usize, nnz: usize) -> u128 {
    held + nnz as u128 * 16 + csr_bytes(rows, nnz)
}

/// `sum_a D_a D_a` as an explicit sparse matrix.
pub fn laplacian_from_grad(grad: &[SparseOperator], opts: &OperatorOptions) -> Result<SparseOperator> {
    let p = grad.first().map_or(0, SparseOperator::nrows);
    let scale = grad.iter().map(|g| g.max_abs().powi(2)).fold(0.0, f64::max);
    let cutoff = opts.drop_tol * scale;
    let used = AtomicUsize::new(0);
    let budget = opts.max_bytes;
    let held: u128 = grad.iter().map(|g| g.memory_bytes() as u128).sum();
    const CHUNK: usize = 256;
    const CANCEL: f64 = 64.0 * f64::EPSILON;
    let nchunks = p.div_ceil(CHUNK);

    type Rows = Vec<Vec<(u32, f64)>>;
    let chunks: Vec<Result<Rows>> = (0..nchunks)
        .into_par_iter()
        .map(|ci| {
            let mut acc = vec![0.0; p];
            let mut mass = vec![0.0; p];
            let mut mark = vec![usize::MAX; p];
            let mut touched: Vec<u32> = Vec::new();
            let mut rows = Vec::with_capacity(CHUNK);
            for i in ci * CHUNK..((ci + 1) * CHUNK).min(p) {
                touched.clear();
                for g in grad {
                    let (cols, vals) = g.row(i);
                    for (&j, &a) in cols.iter().zip(vals) {
                        let (cols2, vals2) = g.row(j as usize);
                        for (&c, &b) in cols2.iter().zip(vals2) {
                            let c = c as usize;
                            if mark[c] != i {
                                mark[c] = i;
                                acc[c] = 0.0;
                                mass[c] = 0.0;
                                touched.push(c as u32);
                            }
                            acc[c] += a * b;
                            mass[c] += (a * b).abs();
                        }
                    }
                }
                touched.sort_unstable();
                let row: Vec<(u32, f64)> = touched
                    .iter()
                    .filter(|&&c| {
                        let (v, m) = (acc[c as usize].abs(), mass[c as usize]);
                        // exact cancellations leave rounding residue of order eps * mass
                        v > cutoff && v > CANCEL * m
                    })
                    .map(|&c| (c, acc[c as usize]))
                    .collect();
                let total = used.fetch_add(row.len(), Ordering::Relaxed) + row.len();
                check_budget("Laplacian operator", laplacian_peak_bytes(held, p, total), budget)?;
                rows.push(row);
            }
            Ok(rows)
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(p + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    for chunk in chunks {
        for row in chunk? {
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
    }
    Ok(SparseOperator::from_csr_parts(p, p, row_ptr, col_idx, values))
}

/// `sum_a D_a D_a` on `space`.
pub fn laplacian_matrix(space: &Space, opts: &OperatorOptions) -> Result<SparseOperator> {
    laplacian_from_grad(&grad_matrix(space, opts)?, opts)
}

/// Nonzeros of the full-grid Laplacian, counted from the 1D factor
/// without assembling it.
///
/// Off-diagonal entries of different axes never share a position, so the
/// pattern is the union of `dim` Kronecker patterns that overlap only on
/// the diagonal.
pub fn full_laplacian_nnz(dim: usize, k: usize, n: usize, opts: &OperatorOptions) -> Result<u128> {
    let kit = DerivKit1D::new(k, n as u32, opts)?;
    let m = laplacian_from_grad(&[kit.hier_sparse()], opts)?;
    let side = m.nrows() as u128;
    let diag = (0..m.nrows()).filter(|&i| m.get(i, i) != 0.0).count() as u128;
    let pow = |b: u128, e: usize| -> Result<u128> {
        (0..e).try_fold(1u128, |acc, _| {
            acc.checked_mul(b).ok_or(Error::Overflow("Laplacian size"))
        })
    };
    let rest = pow(side, dim - 1)?;
    let off = (m.nnz() as u128 - diag) * rest * dim as u128;
    Ok(off + pow(side, dim)? - pow(side - diag, dim)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis1d::build_basis;

    #[test]
    fn full_laplacian_count_matches_assembly() {
        let opts = OperatorOptions::default();
        for (dim, k, n) in [(1, 2, 3), (2, 1, 2), (2, 3, 2), (3, 2, 1), (3, 1, 3)] {
            let space = Space::full(dim, k, n).unwrap();
            let l = laplacian_matrix(&space, &opts).unwrap();
            assert_eq!(
                full_laplacian_nnz(dim, k, n, &opts).unwrap(),
                l.nnz() as u128,
                "D={dim} k={k} n={n}"
            );
        }
    }

    #[test]
    fn k1_n2_is_centered_difference() {
        let d = derivative_1d_nodal(1, 2, Boundary::Periodic);
        for i in 0..4 {
            for j in 0..4 {
                let want = if j == (i + 1) % 4 {
                    2.0
                } else if j == (i + 3) % 4 {
                    -2.0
                } else {
                    0.0
                };
                assert!((d.get(i, j) - want).abs() < 1e-13, "({i},{j}) = {}", d.get(i, j));
            }
        }
    }

    #[test]
    fn k1_n1_vanishes() {
        let d = derivative_1d_nodal(1, 1, Boundary::Periodic);
        assert!(d.max_abs() < 1e-13);
        let b = build_basis(1, 1).unwrap();
        assert!(derivative_1d_hier(&b, Boundary::Periodic).max_abs() < 1e-13);
    }

    #[test]
    fn nodal_skew_for_small_orders() {
        for k in 1..=5 {
            for n in 0..=4 {
                let d = derivative_1d_nodal(k, n, Boundary::Periodic);
                assert!(d.skew_defect() < 1e-10, "k={k} n={n}: {}", d.skew_defect());
            }
        }
    }

    #[test]
    fn zero_extension_is_not_periodic() {
        let p = derivative_1d_nodal(2, 2, Boundary::Periodic);
        let z = derivative_1d_nodal(2, 2, Boundary::ZeroExtension);
        // averaging with zero keeps the operator skew; only the wrap-around
        // coupling between the first and last element disappears
        assert!(z.skew_defect() < 1e-12);
        assert!(p.get(0, 7).abs() > 1.0);
        assert_eq!(z.get(0, 7), 0.0);
        assert_eq!(z.get(7, 0), 0.0);
        for j in 0..8 {
            assert_eq!(p.get(3, j), z.get(3, j));
        }
    }

    #[test]
    fn mask_keeps_every_significant_entry() {
        for (k, n, boundary) in (1..=8)
            .flat_map(|k| (0..=4).flat_map(move |n| [(k, n, Boundary::Periodic), (k, n, Boundary::ZeroExtension)]))
        {
            {
                let opts = OperatorOptions {
                    boundary,
                    ..OperatorOptions::default()
                };
                let kit = DerivKit1D::new(k, n, &opts).unwrap();
                let dense = kit.hier();
                let sparse = kit.hier_sparse();
                let size = dense.size();
                for r in 0..size {
                    for c in 0..size {
                        let diff = (dense.get(r, c) - sparse.get(r, c)).abs();
                        assert!(
                            diff < 1e-11 * dense.max_abs().max(1.0),
                            "k={k} n={n} {boundary:?} ({r},{c}) dropped {}",
                            dense.get(r, c)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn bad_axis_rejected() {
        let space = Space::sparse(2, 2, 2).unwrap();
        assert!(d_matrix(&space, 0, &OperatorOptions::default()).is_err());
        assert!(d_matrix(&space, 3, &OperatorOptions::default()).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let space = Space::sparse(3, 3, 3).unwrap();
        let opts = OperatorOptions {
            max_bytes: 10_000,
            ..Default::default()
        };
        assert!(matches!(d_matrix(&space, 1, &opts), Err(Error::TooLarge { .. })));
        let grad = grad_matrix(&space, &OperatorOptions::default()).unwrap();
        assert!(matches!(laplacian_from_grad(&grad, &opts), Err(Error::TooLarge { .. })));
    }
}
