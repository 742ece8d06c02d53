//! One-dimensional DG bases on `[0, 1]`.
//!
//! Two orthonormal bases span the same space of piecewise polynomials of
//! degree `< k` on the `2^n` dyadic elements of level `n`:
//!
//! - the *nodal* basis `h_{n,i,m}`: a rescaled Legendre polynomial on a
//!   single element;
//! - the *hierarchical* basis `v_{l,i,m}`: global Legendre polynomials at
//!   level 0, and rescaled copies of `k` mother multiwavelets at levels
//!   `l >= 1`, with `2^(l-1)` elements per level.
//!
//! [`Basis1D`] holds both together with the orthogonal change-of-basis
//! matrix `Q[hier][nodal] = <v, h>`.

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// Largest dense change-of-basis matrix we agree to allocate.
pub const MAX_Q_BYTES: u128 = 1 << 31;

/// Normalized Legendre polynomial `sqrt((2m+1)/2) * P_m(t)`, unit norm on `[-1, 1]`.
pub fn legendre_eval(m: usize, t: f64) -> f64 {
    let mut p_prev = 1.0;
    if m == 0 {
        return p_prev * std::f64::consts::FRAC_1_SQRT_2;
    }
    let mut p = t;
    for j in 1..m {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * t * p - jf * p_prev) / (jf + 1.0);
        p_prev = p;
        p = next;
    }
    ((2 * m + 1) as f64 / 2.0).sqrt() * p
}

/// Fills `out[m]` with the normalized Legendre values for `m < out.len()`.
pub(crate) fn legendre_values(t: f64, out: &mut [f64]) {
    let k = out.len();
    if k == 0 {
        return;
    }
    let mut p_prev = 1.0;
    let mut p = t;
    out[0] = std::f64::consts::FRAC_1_SQRT_2;
    for m in 1..k {
        if m > 1 {
            let jf = (m - 1) as f64;
            let next = ((2.0 * jf + 1.0) * t * p - jf * p_prev) / (jf + 1.0);
            p_prev = p;
            p = next;
        }
        out[m] = ((2 * m + 1) as f64 / 2.0).sqrt() * p;
    }
}

/// Fills `out[m]` with derivatives of the normalized Legendre polynomials.
///
/// Uses `P'_{m+1} = P'_{m-1} + (2m+1) P_m`, which stays regular at `t = ±1`.
pub(crate) fn legendre_derivatives(t: f64, out: &mut [f64]) {
    let k = out.len();
    let mut plain = vec![0.0; k.max(1)];
    let mut dplain = vec![0.0; k.max(1)];
    if k == 0 {
        return;
    }
    plain[0] = 1.0;
    if k > 1 {
        plain[1] = t;
        dplain[1] = 1.0;
    }
    for m in 1..k.saturating_sub(1) {
        let mf = m as f64;
        plain[m + 1] = ((2.0 * mf + 1.0) * t * plain[m] - mf * plain[m - 1]) / (mf + 1.0);
        dplain[m + 1] = dplain[m - 1] + (2.0 * mf + 1.0) * plain[m];
    }
    for m in 0..k {
        out[m] = ((2 * m + 1) as f64 / 2.0).sqrt() * dplain[m];
    }
}

/// `j`-th derivative at `t = 1` of the normalized Legendre polynomial of degree `m`.
fn legendre_derivative_at_one(m: usize, j: usize) -> f64 {
    if j > m {
        return 0.0;
    }
    // P_m^{(j)}(1) = (m+j)! / ((m-j)! j! 2^j)
    let mut v = 1.0;
    for t in (m - j + 1)..=(m + j) {
        v *= t as f64;
    }
    for t in 1..=j {
        v /= 2.0 * t as f64;
    }
    ((2 * m + 1) as f64 / 2.0).sqrt() * v
}

/// One polynomial piece on the dyadic interval `[index * 2^-level, (index+1) * 2^-level]`.
///
/// `coeffs[m]` multiplies the unit-norm Legendre function of that interval,
/// `sqrt(2 / |I|) * p_m(tau(x))` with `tau` the affine map `I -> [-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub level: u32,
    pub index: u64,
    pub coeffs: Vec<f64>,
}

impl Segment {
    pub fn interval(&self) -> (f64, f64) {
        let h = (-(self.level as f64)).exp2();
        (self.index as f64 * h, (self.index + 1) as f64 * h)
    }

    fn scale(&self) -> f64 {
        ((self.level + 1) as f64 * 0.5).exp2()
    }

    /// Value of the polynomial at local coordinate `t` in `[-1, 1]`.
    pub fn eval_local(&self, t: f64) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| c * legendre_eval(m, t))
            .sum();
        self.scale() * s
    }

    /// Polynomial continuation of this piece evaluated at `x`.
    pub fn eval_poly(&self, x: f64) -> f64 {
        let (a, b) = self.interval();
        self.eval_local(2.0 * (x - a) / (b - a) - 1.0)
    }

    fn contains(&self, other: &Segment) -> bool {
        other.level >= self.level && (other.index >> (other.level - self.level)) == self.index
    }
}

/// A piecewise polynomial on `[0, 1]`, zero outside its segments.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePoly {
    k: usize,
    segments: Vec<Segment>,
}

impl PiecewisePoly {
    pub fn new(k: usize, mut segments: Vec<Segment>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("polynomial order k must be >= 1".into()));
        }
        for s in &segments {
            if s.coeffs.len() != k {
                return Err(Error::LengthMismatch {
                    expected: k,
                    found: s.coeffs.len(),
                });
            }
            if s.level >= 63 || s.index >= (1u64 << s.level) {
                return Err(Error::IndexOutOfRange(format!(
                    "segment {} at level {}",
                    s.index, s.level
                )));
            }
            if s.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidArgument("non-finite coefficient".into()));
            }
        }
        segments.sort_by(|a, b| a.interval().0.total_cmp(&b.interval().0));
        for w in segments.windows(2) {
            if w[0].interval().1 > w[1].interval().0 {
                return Err(Error::InvalidArgument("overlapping segments".into()));
            }
        }
        Ok(Self { k, segments })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Closed hull of the support, or `None` for the zero function.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first = self.segments.first()?;
        let last = self.segments.last()?;
        Some((first.interval().0, last.interval().1))
    }

    /// Limit from the right at `x` (zero where no segment starts at or covers `x`).
    pub fn limit_right(&self, x: f64) -> f64 {
        self.segments
            .iter()
            .find(|s| {
                let (a, b) = s.interval();
                a <= x && x < b
            })
            .map_or(0.0, |s| s.eval_poly(x))
    }

    /// Limit from the left at `x`.
    pub fn limit_left(&self, x: f64) -> f64 {
        self.segments
            .iter()
            .find(|s| {
                let (a, b) = s.interval();
                a < x && x <= b
            })
            .map_or(0.0, |s| s.eval_poly(x))
    }

    /// Pointwise value: right-sided limit, except left-sided at `x = 1`.
    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            0.0
        } else if x == 1.0 {
            self.limit_left(x)
        } else {
            self.limit_right(x)
        }
    }

    /// `L^2(0, 1)` inner product, exact up to rounding.
    ///
    /// Dyadic segments are either nested or disjoint, so each overlapping
    /// pair is integrated over the finer of the two with `k + 1` Gauss points.
    pub fn inner(&self, other: &PiecewisePoly) -> f64 {
        let rule = QuadratureRule::gauss_legendre(self.k.max(other.k) + 1);
        let mut total = 0.0;
        for s in &self.segments {
            for t in &other.segments {
                let fine = if s.contains(t) {
                    t
                } else if t.contains(s) {
                    s
                } else {
                    continue;
                };
                let (a, b) = fine.interval();
                total += rule.integrate(a, b, |x| s.eval_poly(x) * t.eval_poly(x));
            }
        }
        total
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }
}

/// Nodal basis function `h_{n,i,m}`: unit-norm Legendre mode `m` on element `i` (1-based).
pub fn nodal_function(k: usize, n: u32, i: u64, m: usize) -> Result<PiecewisePoly> {
    if n >= 63 || i == 0 || i > (1u64 << n) || m >= k {
        return Err(Error::IndexOutOfRange(format!(
            "nodal function (n={n}, i={i}, m={m}) with k={k}"
        )));
    }
    let mut coeffs = vec![0.0; k];
    coeffs[m] = 1.0;
    PiecewisePoly::new(
        k,
        vec![Segment {
            level: n,
            index: i - 1,
            coeffs,
        }],
    )
}

/// The `k` mother multiwavelets on `[0, 1]`.
///
/// Each is a polynomial of degree `< k` on `[0, 1/2]` and on `[1/2, 1]`,
/// orthogonal to every polynomial of degree `< k`, and the family is
/// orthonormal. Within that space the basis is chosen so that at most two
/// functions have nonzero limits at the ends of `[0, 1]`: the projections
/// of the two endpoint evaluations, one even and one odd about `1/2`. The
/// remaining `k - 2` vanish at both ends, ordered by moments `x^k, x^(k+1),
/// ...` as in Alpert's construction. Only end values couple a wavelet to
/// coarser levels through the flux, so this keeps derivative operators
/// sparse. Signs make the limit at `1-` positive, falling back to the first
/// nonzero derivative there.
pub fn multiwavelets(k: usize) -> Result<Vec<PiecewisePoly>> {
    Ok(mother_coefficients(k)?
        .into_iter()
        .map(|v| wavelet_from_coeffs(k, 1, 0, &v))
        .collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Appends the normalized parts of `candidates` orthogonal to `base` and to
/// what was already appended, until `out` holds `limit` vectors.
fn orthonormalize_into(out: &mut Vec<Vec<f64>>, base: &[Vec<f64>], candidates: Vec<Vec<f64>>, limit: usize) {
    for mut v in candidates {
        if out.len() == limit {
            break;
        }
        let scale = dot(&v, &v).sqrt();
        for _pass in 0..2 {
            for g in base.iter().chain(out.iter()) {
                let c = dot(&v, g);
                v.iter_mut().zip(g).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= 1e-8 * scale {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        out.push(v);
    }
}

/// Mother wavelets as vectors `[left coeffs | right coeffs]` in the level-1 nodal basis.
fn mother_coefficients(k: usize) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Err(Error::InvalidArgument("polynomial order k must be >= 1".into()));
    }
    let dim = 2 * k;
    // exact for the degree 2k - 1 moments times degree k - 1 pieces
    let rule = QuadratureRule::gauss_legendre(2 * k);
    let mut p = vec![0.0; k];

    // <g, phi_half_j> for a function g of x, with phi = 2 p_j(t) and dx = dt / 4
    let mut coords = |g: &dyn Fn(f64) -> f64| {
        let mut v = vec![0.0; dim];
        for half in 0..2 {
            for (t, w) in rule.nodes().iter().zip(rule.weights()) {
                let x = (t + 1.0 + 2.0 * half as f64) / 4.0;
                legendre_values(*t, &mut p);
                for j in 0..k {
                    v[half * k + j] += 0.5 * w * g(x) * p[j];
                }
            }
        }
        v
    };
    let sqrt2 = std::f64::consts::SQRT_2;
    let globals: Vec<Vec<f64>> = (0..k)
        .map(|m| coords(&|x| sqrt2 * legendre_eval(m, 2.0 * x - 1.0)))
        .collect();
    // shifted Legendre polynomials span the same nested moment spaces as
    // x^k, x^(k+1), ... modulo degree < k, without the ill-conditioning
    let moments: Vec<Vec<f64>> = (k..dim).map(|i| coords(&|x| legendre_eval(i, 2.0 * x - 1.0))).collect();

    let units = (0..dim).map(|c| {
        let mut v = vec![0.0; dim];
        v[c] = 1.0;
        v
    });
    let mut globals_on = Vec::with_capacity(k);
    orthonormalize_into(&mut globals_on, &[], globals, k);
    let mut space = Vec::with_capacity(k);
    orthonormalize_into(&mut space, &globals_on, units.collect(), k);
    if space.len() != k {
        return Err(Error::InvalidArgument(format!(
            "multiwavelet construction lost rank for k={k}"
        )));
    }
    let project = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for b in &space {
            let c = dot(v, b);
            out.iter_mut().zip(b).for_each(|(o, y)| *o += c * y);
        }
        out
    };

    // end values: f(0+) = sum_j 2 p_j(-1) left_j, f(1-) = sum_j 2 p_j(1) right_j
    let mut left_end = vec![0.0; dim];
    let mut right_end = vec![0.0; dim];
    for j in 0..k {
        left_end[j] = 2.0 * legendre_eval(j, -1.0);
        right_end[k + j] = 2.0 * legendre_eval(j, 1.0);
    }
    let (l, r) = (project(&left_end), project(&right_end));
    let even: Vec<f64> = l.iter().zip(&r).map(|(a, b)| a + b).collect();
    let odd: Vec<f64> = l.iter().zip(&r).map(|(a, b)| a - b).collect();

    // orthogonalizing against the globals too keeps rounding inside the space
    let mut accepted = Vec::with_capacity(k);
    orthonormalize_into(&mut accepted, &globals_on, vec![even, odd], k);
    let traces = accepted.len();
    let mut rest = Vec::new();
    let mut base = globals_on.clone();
    base.extend(accepted.iter().cloned());
    let candidates = moments
        .iter()
        .map(|m| project(m))
        .chain(space.iter().cloned())
        .collect();
    orthonormalize_into(&mut rest, &base, candidates, k - traces);
    accepted.extend(rest);
    if accepted.len() != k {
        return Err(Error::InvalidArgument(format!(
            "multiwavelet construction lost rank for k={k}"
        )));
    }
    for v in &mut accepted {
        if sign_at_right_end(k, &v[k..]) < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(accepted)
}

/// Sign of the right piece at `1-`, or of its first nonzero derivative there.
fn sign_at_right_end(k: usize, right: &[f64]) -> f64 {
    for j in 0..k {
        let d: f64 = right
            .iter()
            .enumerate()
            .map(|(m, c)| c * legendre_derivative_at_one(m, j))
            .sum();
        if d.abs() > 1e-12 {
            return d.signum();
        }
    }
    1.0
}

fn wavelet_from_coeffs(k: usize, level: u32, element: u64, v: &[f64]) -> PiecewisePoly {
    PiecewisePoly {
        k,
        segments: vec![
            Segment {
                level,
                index: 2 * element,
                coeffs: v[..k].to_vec(),
            },
            Segment {
                level,
                index: 2 * element + 1,
                coeffs: v[k..].to_vec(),
            },
        ],
    }
}

/// Number of elements of the hierarchical basis at `level`: 1, 1, 2, 4, ...
pub fn cells(level: u32) -> u64 {
    if level == 0 {
        1
    } else {
        1u64 << (level - 1)
    }
}

/// Hierarchical basis function `v_{l,i,m}` (element `i` is 1-based).
pub fn hierarchical_function(k: usize, n: u32, l: u32, i: u64, m: usize) -> Result<PiecewisePoly> {
    if l > n || i == 0 || i > cells(l) || m >= k {
        return Err(Error::IndexOutOfRange(format!(
            "hierarchical function (l={l}, i={i}, m={m}) with k={k}, n={n}"
        )));
    }
    if l == 0 {
        return nodal_function(k, 0, 1, m);
    }
    let mother = mother_coefficients(k)?;
    Ok(wavelet_from_coeffs(k, l, i - 1, &mother[m]))
}

/// Position of `(l, i0, m)` (0-based element) in the 1D hierarchical ordering.
#[inline]
pub fn hier_index(k: usize, l: u32, i0: u64, m: usize) -> usize {
    let start = if l == 0 { 0 } else { 1u64 << (l - 1) };
    k * (start + i0) as usize + m
}

/// Inverse of [`hier_index`]: returns `(level, 0-based element, mode)`.
#[inline]
pub fn hier_key(k: usize, idx: usize) -> (u32, u64, usize) {
    let e = (idx / k) as u64;
    let m = idx % k;
    if e == 0 {
        (0, 0, m)
    } else {
        let l = 64 - e.leading_zeros();
        (l, e - (1u64 << (l - 1)), m)
    }
}

/// Both 1D bases of order `k` up to level `n`, and the transform between them.
#[derive(Clone, Debug)]
pub struct Basis1D {
    k: usize,
    n: u32,
    mother: Vec<Vec<f64>>,
    nodal: Vec<PiecewisePoly>,
    hier: Vec<PiecewisePoly>,
    q: Vec<f64>,
}

impl Basis1D {
    pub fn new(k: usize, n: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("polynomial order k must be >= 1".into()));
        }
        if n >= 40 {
            return Err(Error::InvalidArgument(format!("level {n} is too deep")));
        }
        let size = (k as u128) << n;
        let bytes = size * size * 8;
        if bytes > MAX_Q_BYTES {
            return Err(Error::TooLarge {
                what: "change-of-basis matrix",
                needed: bytes,
                budget: MAX_Q_BYTES,
            });
        }
        let size = size as usize;
        let elements = 1u64 << n;

        let mut nodal = Vec::with_capacity(size);
        for i in 1..=elements {
            for m in 0..k {
                nodal.push(nodal_function(k, n, i, m)?);
            }
        }

        let mother = mother_coefficients(k)?;
        let mut hier = Vec::with_capacity(size);
        for l in 0..=n {
            for i0 in 0..cells(l) {
                for m in 0..k {
                    hier.push(if l == 0 {
                        nodal_function(k, 0, 1, m)?
                    } else {
                        wavelet_from_coeffs(k, l, i0, &mother[m])
                    });
                }
            }
        }

        // Q[r][(e, m')] = sqrt(|I_e| / 2) * sum_q w_q v_r(x_q) p_m'(t_q) over element e.
        let rule = QuadratureRule::gauss_legendre(k + 1);
        let ref_vals: Vec<Vec<f64>> = rule
            .nodes()
            .iter()
            .map(|&t| {
                let mut p = vec![0.0; k];
                legendre_values(t, &mut p);
                p
            })
            .collect();
        let h = (-(n as f64)).exp2();
        let jac = (0.5 * h).sqrt();
        let mut q = vec![0.0; size * size];
        for (r, v) in hier.iter().enumerate() {
            let row = &mut q[r * size..(r + 1) * size];
            for seg in v.segments() {
                let depth = n - seg.level;
                let first = seg.index << depth;
                for e in first..first + (1u64 << depth) {
                    let a = e as f64 * h;
                    for (qi, (&t, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
                        let x = a + 0.5 * h * (t + 1.0);
                        let val = w * seg.eval_poly(x) * jac;
                        for mp in 0..k {
                            row[e as usize * k + mp] += val * ref_vals[qi][mp];
                        }
                    }
                }
            }
        }

        Ok(Self {
            k,
            n,
            mother,
            nodal,
            hier,
            q,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `k * 2^n`.
    pub fn len(&self) -> usize {
        self.hier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hier.is_empty()
    }

    pub fn nodal(&self) -> &[PiecewisePoly] {
        &self.nodal
    }

    pub fn hier(&self) -> &[PiecewisePoly] {
        &self.hier
    }

    /// Mother wavelets as `[left | right]` coefficient vectors.
    pub fn mother(&self) -> &[Vec<f64>] {
        &self.mother
    }

    /// Row-major `Q`, rows hierarchical, columns nodal.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn q_at(&self, row: usize, col: usize) -> f64 {
        self.q[row * self.len() + col]
    }

    /// Nodal columns that can be nonzero in row `row` of `Q`.
    pub fn q_row_support(&self, row: usize) -> std::ops::Range<usize> {
        let (l, i0, _) = hier_key(self.k, row);
        if l == 0 {
            return 0..self.len();
        }
        let span = 1usize << (self.n - l + 1);
        let first = i0 as usize * span;
        first * self.k..(first + span) * self.k
    }

    /// Hierarchical coefficients `Q c` of nodal coefficients `c`.
    pub fn to_hier(&self, nodal: &[f64]) -> Vec<f64> {
        let size = self.len();
        (0..size)
            .map(|r| self.q_row_support(r).map(|c| self.q[r * size + c] * nodal[c]).sum())
            .collect()
    }

    /// Nodal coefficients `Q^T c` of hierarchical coefficients `c`.
    pub fn to_nodal(&self, hier: &[f64]) -> Vec<f64> {
        let size = self.len();
        let mut out = vec![0.0; size];
        for (r, &c) in hier.iter().enumerate() {
            for col in self.q_row_support(r) {
                out[col] += self.q[r * size + col] * c;
            }
        }
        out
    }
}

/// Builds [`Basis1D`] for order `k` and maximum level `n`.
pub fn build_basis(k: usize, n: u32) -> Result<Basis1D> {
    Basis1D::new(k, n)
}

/// Fast pointwise evaluation of every hierarchical function that is nonzero at `x`.
#[derive(Clone, Debug)]
pub struct HierEvaluator {
    k: usize,
    n: u32,
    mother: Vec<Vec<f64>>,
}

impl HierEvaluator {
    pub fn new(k: usize, n: u32) -> Result<Self> {
        Ok(Self {
            k,
            n,
            mother: mother_coefficients(k)?,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// For each level `l <= n`, writes the 0-based element containing `x`
    /// into `elems[l]` and the `k` mode values into `vals[l*k..(l+1)*k]`.
    ///
    /// Uses right-sided limits at breakpoints and the left-sided limit at `x = 1`.
    pub fn eval(&self, x: f64, elems: &mut [u64], vals: &mut [f64]) {
        let k = self.k;
        let mut p = vec![0.0; k];
        legendre_values(2.0 * x - 1.0, &mut p);
        elems[0] = 0;
        for m in 0..k {
            vals[m] = std::f64::consts::SQRT_2 * p[m];
        }
        for l in 1..=self.n {
            let c = cells(l);
            let s = x * c as f64;
            let i0 = (s.floor() as u64).min(c - 1);
            let y = s - i0 as f64;
            let (piece, tau) = if y < 0.5 {
                (0, 4.0 * y - 1.0)
            } else {
                (1, 4.0 * y - 3.0)
            };
            legendre_values(tau, &mut p);
            let scale = 2.0 * (c as f64).sqrt();
            elems[l as usize] = i0;
            let out = &mut vals[l as usize * k..(l as usize + 1) * k];
            for (m, o) in out.iter_mut().enumerate() {
                let w = &self.mother[m][piece * k..(piece + 1) * k];
                *o = scale * w.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram(fs: &[PiecewisePoly]) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, f) in fs.iter().enumerate() {
            for (b, g) in fs.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((f.inner(g) - want).abs());
            }
        }
        worst
    }

    #[test]
    fn legendre_examples() {
        assert!((legendre_eval(0, 0.7) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((legendre_eval(1, 1.0) - 1.5f64.sqrt()).abs() < 1e-15);
        let p2 = (3.0 * 0.0f64.powi(2) - 1.0) / 2.0;
        assert!((legendre_eval(2, 0.0) - 2.5f64.sqrt() * p2).abs() < 1e-15);
    }

    #[test]
    fn legendre_values_match_scalar_eval() {
        let mut out = vec![0.0; 7];
        let mut dout = vec![0.0; 7];
        for &t in &[-1.0, -0.3, 0.0, 0.45, 1.0] {
            legendre_values(t, &mut out);
            legendre_derivatives(t, &mut dout);
            for m in 0..7 {
                assert!((out[m] - legendre_eval(m, t)).abs() < 1e-14);
                let fd = (legendre_eval(m, t + 1e-6) - legendre_eval(m, t - 1e-6)) / 2e-6;
                assert!((dout[m] - fd).abs() < 1e-6 * (1.0 + fd.abs()), "m={m} t={t}");
            }
        }
        for m in 0..6 {
            assert!((legendre_derivative_at_one(m, 0) - legendre_eval(m, 1.0)).abs() < 1e-14);
            legendre_derivatives(1.0, &mut dout);
            assert!((legendre_derivative_at_one(m, 1) - dout[m]).abs() < 1e-12);
        }
    }

    #[test]
    fn nodal_examples() {
        let f = nodal_function(1, 1, 1, 0).unwrap();
        assert!((f.eval(0.25) - 2f64.sqrt()).abs() < 1e-14);
        let rule = QuadratureRule::gauss_legendre(4);
        assert!((rule.integrate(0.0, 0.5, |x| f.eval(x).powi(2)) - 1.0).abs() < 1e-14);
        assert_eq!(f.eval(0.75), 0.0);

        let g = nodal_function(2, 0, 1, 1).unwrap();
        assert!((g.limit_left(1.0) - 3f64.sqrt()).abs() < 1e-14);
        assert!((g.eval(1.0) - 3f64.sqrt()).abs() < 1e-14);
        assert!((rule.integrate(0.0, 1.0, |x| g.eval(x).powi(2)) - 1.0).abs() < 1e-14);
        assert!(rule.integrate(0.0, 1.0, |x| g.eval(x)).abs() < 1e-14);
        assert!(nodal_function(2, 1, 3, 0).is_err());
    }

    #[test]
    fn k1_wavelet_is_signed_step() {
        let w = &multiwavelets(1).unwrap()[0];
        assert!((w.eval(0.25) + 1.0).abs() < 1e-14);
        assert!((w.eval(0.75) - 1.0).abs() < 1e-14);
        assert!((w.eval(0.5) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn wavelet_moments_and_orthonormality() {
        let rule = QuadratureRule::gauss_legendre(8);
        for k in 1..=6 {
            let ws = multiwavelets(k).unwrap();
            assert_eq!(ws.len(), k);
            assert!(gram(&ws) < 1e-12, "k={k}");
            for w in &ws {
                for j in 0..k {
                    let mom = rule.integrate(0.0, 0.5, |x| w.eval(x) * x.powi(j as i32))
                        + rule.integrate(0.5, 1.0, |x| w.eval(x) * x.powi(j as i32));
                    assert!(mom.abs() < 1e-12, "k={k} j={j}: {mom}");
                }
                assert!(w.limit_left(1.0) > -1e-12);
            }
            let traced = ws
                .iter()
                .filter(|w| w.limit_right(0.0).abs() > 1e-12 || w.limit_left(1.0).abs() > 1e-12)
                .count();
            assert_eq!(traced, k.min(2), "k={k}");
        }
    }

    #[test]
    fn hierarchical_examples() {
        let w = hierarchical_function(1, 3, 1, 1, 0).unwrap();
        assert_eq!(w, multiwavelets(1).unwrap()[0]);
        let v = hierarchical_function(3, 3, 2, 2, 1).unwrap();
        assert_eq!(v.support(), Some((0.5, 1.0)));
        assert!(hierarchical_function(3, 3, 2, 3, 0).is_err());
        assert!(hierarchical_function(3, 3, 4, 1, 0).is_err());
        assert!(hierarchical_function(3, 3, 0, 2, 0).is_err());
    }

    #[test]
    fn hier_index_roundtrip() {
        let k = 3;
        let mut idx = 0;
        for l in 0..=6 {
            for i0 in 0..cells(l) {
                for m in 0..k {
                    assert_eq!(hier_index(k, l, i0, m), idx);
                    assert_eq!(hier_key(k, idx), (l, i0, m));
                    idx += 1;
                }
            }
        }
    }

    #[test]
    fn q_small_cases() {
        let b = build_basis(1, 0).unwrap();
        assert!((b.q()[0] - 1.0).abs() < 1e-14);
        let b = build_basis(1, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = [s, s, -s, s];
        for (g, w) in b.q().iter().zip(want) {
            assert!((g - w).abs() < 1e-14);
        }
    }

    #[test]
    fn evaluator_matches_piecewise_eval() {
        let (k, n) = (3, 4);
        let basis = build_basis(k, n).unwrap();
        let ev = HierEvaluator::new(k, n).unwrap();
        let mut elems = vec![0; n as usize + 1];
        let mut vals = vec![0.0; (n as usize + 1) * k];
        for &x in &[0.0, 0.1, 0.25, 0.5, 0.5625, 0.9, 1.0] {
            ev.eval(x, &mut elems, &mut vals);
            for l in 0..=n {
                for m in 0..k {
                    let idx = hier_index(k, l, elems[l as usize], m);
                    let want = basis.hier()[idx].eval(x);
                    assert!((vals[l as usize * k + m] - want).abs() < 1e-12, "x={x} l={l}");
                }
            }
        }
    }

    #[test]
    fn too_large_basis_is_reported() {
        assert!(matches!(build_basis(8, 20), Err(Error::TooLarge { .. })));
    }
}
