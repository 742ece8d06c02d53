//! Compressed sparse row matrices.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};

const MATVEC_CHUNK: usize = 512;

/// A `rows x cols` matrix in compressed row form.
///
/// Column indices are sorted and unique within each row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseOperator {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from per-row entry lists; entries are sorted and duplicate columns summed.
    pub fn from_rows(nrows: usize, ncols: usize, rows: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        if rows.len() != nrows {
            return Err(Error::LengthMismatch {
                expected: nrows,
                found: rows.len(),
            });
        }
        if ncols > u32::MAX as usize {
            return Err(Error::Overflow("column index"));
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        row_ptr.push(0);
        let total: usize = rows.iter().map(Vec::len).sum();
        let mut col_idx = Vec::with_capacity(total);
        let mut values = Vec::with_capacity(total);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                if c as usize >= ncols {
                    return Err(Error::IndexOutOfRange(format!("column {c} >= {ncols}")));
                }
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds from a dense row-major matrix, keeping entries with `|v| > drop`.
    pub fn from_dense(nrows: usize, ncols: usize, data: &[f64], drop: f64) -> Result<Self> {
        let rows = data
            .chunks_exact(ncols)
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| v.abs() > drop)
                    .map(|(c, &v)| (c as u32, v))
                    .collect()
            })
            .collect();
        Self::from_rows(nrows, ncols, rows)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&(j as u32)).map_or(0.0, |p| vals[p])
    }

    /// Bytes held by the index and value arrays.
    pub fn memory_bytes(&self) -> usize {
        self.row_ptr.len() * std::mem::size_of::<usize>()
            + self.col_idx.len() * std::mem::size_of::<u32>()
            + self.values.len() * std::mem::size_of::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `y = A x`. Each row is summed in storage order, so results do not
    /// depend on the number of threads.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "matvec input length");
        assert_eq!(y.len(), self.nrows, "matvec output length");
        y.par_chunks_mut(MATVEC_CHUNK).enumerate().for_each(|(chunk, out)| {
            let base = chunk * MATVEC_CHUNK;
            for (r, o) in out.iter_mut().enumerate() {
                let i = base + r;
                let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
                let mut acc = 0.0;
                for p in s..e {
                    acc += self.values[p] * x[self.col_idx[p] as usize];
                }
                *o = acc;
            }
        });
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c as usize + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0u32; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let p = next[c as usize];
                col_idx[p] = i as u32;
                values[p] = v;
                next[c as usize] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `max |A + A^T|`, zero exactly for a skew-symmetric matrix.
    pub fn skew_defect(&self) -> f64 {
        let t = self.transpose();
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = t.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let v = match (ca.get(p), cb.get(q)) {
                    (Some(a), Some(b)) if a == b => {
                        p += 1;
                        q += 1;
                        va[p - 1] + vb[q - 1]
                    }
                    (Some(a), Some(b)) if a < b => {
                        p += 1;
                        va[p - 1]
                    }
                    (Some(_), None) => {
                        p += 1;
                        va[p - 1]
                    }
                    _ => {
                        q += 1;
                        vb[q - 1]
                    }
                };
                worst = worst.max(v.abs());
            }
        }
        worst
    }

    /// Dense row-major copy; for tests and small matrices only.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows * self.ncols];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[i * self.ncols + c as usize] = v;
            }
        }
        out
    }

    /// Matrix Market coordinate format, 1-based, `real general`.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:.17e}", i + 1, c + 1, v)?;
            }
        }
        Ok(())
    }

    pub(crate) fn from_csr_parts(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<u32>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_ptr.len(), nrows + 1);
        debug_assert_eq!(col_idx.len(), values.len());
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseOperator {
        SparseOperator::from_rows(
            3,
            3,
            vec![vec![(2, 1.0), (1, -2.0)], vec![(0, 2.0), (0, 0.5)], vec![(0, -1.0)]],
        )
        .unwrap()
    }

    #[test]
    fn rows_sorted_and_duplicates_summed() {
        let a = sample();
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.row(0).0, &[1, 2]);
        assert_eq!(a.get(1, 0), 2.5);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn matvec_and_transpose() {
        let a = sample();
        assert_eq!(a.matvec(&[1.0, 2.0, 3.0]), vec![-1.0, 2.5, -1.0]);
        let t = a.transpose();
        assert_eq!(t.to_dense(), vec![0.0, 2.5, -1.0, -2.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(a.skew_defect(), 0.5);
    }

    #[test]
    fn matrix_market_output() {
        let a = SparseOperator::from_rows(2, 2, vec![vec![(1, 2.0)], vec![(0, -2.0)]]).unwrap();
        let mut buf = Vec::new();
        a.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "%%MatrixMarket matrix coordinate real general");
        assert_eq!(lines[1], "2 2 2");
        assert!(lines[2].starts_with("1 2 2.0"));
        assert!(lines[3].starts_with("2 1 -2.0"));
    }

    #[test]
    fn out_of_range_column_rejected() {
        assert!(SparseOperator::from_rows(1, 2, vec![vec![(2, 1.0)]]).is_err());
    }
}
