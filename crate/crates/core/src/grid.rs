//! Multi-level index sets, coefficient containers and the flat layout.
//!
//! A D-dimensional basis function is addressed by a [`MultiIndex`]: one
//! level, element and mode per axis. Functions sharing a multi-level form a
//! dense block; the full space keeps every block with `|l|_inf <= n`, the
//! sparse space those with `|l|_1 <= n`.
//!
//! The flat layout orders blocks by `(|l|_1, lexicographic l)`; inside a block
//! positions run row-major over the element tuple, then row-major over the
//! mode tuple. Truncating a sparse vector to a lower level is therefore a
//! prefix operation.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crate::basis1d::cells;

/// Largest dimension accepted by [`Space::new`].
pub const MAX_DIM: usize = 16;
/// Largest level accepted by [`Space::new`].
pub const MAX_LEVEL: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Full,
    Sparse,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Full => "full",
            SchemeKind::Sparse => "sparse",
        }
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SchemeKind::Full),
            "sparse" => Ok(SchemeKind::Sparse),
            other => Err(Error::InvalidArgument(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Which multi-levels belong to the space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Scheme {
    pub kind: SchemeKind,
    pub n: usize,
}

impl Scheme {
    pub fn full(n: usize) -> Self {
        Self {
            kind: SchemeKind::Full,
            n,
        }
    }

    pub fn sparse(n: usize) -> Self {
        Self {
            kind: SchemeKind::Sparse,
            n,
        }
    }

    pub fn admits(&self, levels: &[usize]) -> bool {
        match self.kind {
            SchemeKind::Full => levels.iter().all(|&l| l <= self.n),
            SchemeKind::Sparse => levels.iter().sum::<usize>() <= self.n,
        }
    }
}

/// Dimension, polynomial order and scheme: everything that fixes a coefficient layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    pub dim: usize,
    pub k: usize,
    pub scheme: Scheme,
}

impl Space {
    pub fn new(dim: usize, k: usize, scheme: Scheme) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidArgument(format!("dimension {dim} outside 1..={MAX_DIM}")));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("polynomial order k must be >= 1".into()));
        }
        if scheme.n > MAX_LEVEL {
            return Err(Error::InvalidArgument(format!(
                "level {} exceeds {MAX_LEVEL}",
                scheme.n
            )));
        }
        Ok(Self { dim, k, scheme })
    }

    pub fn sparse(dim: usize, k: usize, n: usize) -> Result<Self> {
        Self::new(dim, k, Scheme::sparse(n))
    }

    pub fn full(dim: usize, k: usize, n: usize) -> Result<Self> {
        Self::new(dim, k, Scheme::full(n))
    }

    pub fn n(&self) -> usize {
        self.scheme.n
    }

    /// The one-dimensional space with the same order and level.
    pub fn axis(&self) -> Space {
        Space {
            dim: 1,
            k: self.k,
            scheme: Scheme::full(self.scheme.n),
        }
    }

    pub fn with_scheme(&self, scheme: Scheme) -> Space {
        Space { scheme, ..*self }
    }
}

/// All admissible multi-levels, sorted by `(|l|_1, lexicographic)`.
pub fn index_set(dim: usize, scheme: Scheme) -> Vec<Vec<usize>> {
    fn rec(dim: usize, scheme: Scheme, cur: &mut Vec<usize>, sum: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == dim {
            out.push(cur.clone());
            return;
        }
        let top = match scheme.kind {
            SchemeKind::Full => scheme.n,
            SchemeKind::Sparse => scheme.n - sum,
        };
        for l in 0..=top {
            cur.push(l);
            rec(dim, scheme, cur, sum + l, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, scheme, &mut Vec::with_capacity(dim), 0, &mut out);
    out.sort_by(|a, b| {
        let sa: usize = a.iter().sum();
        let sb: usize = b.iter().sum();
        sa.cmp(&sb).then_with(|| a.cmp(b))
    });
    out
}

fn block_len(k: usize, levels: &[usize]) -> Result<u128> {
    let mut size: u128 = 1;
    for &l in levels {
        size = size
            .checked_mul(cells(l as u32) as u128 * k as u128)
            .ok_or(Error::Overflow("block size"))?;
    }
    Ok(size)
}

/// Exact number of coefficients `P` of the space.
pub fn space_dim(space: &Space) -> Result<u64> {
    let k = space.k as u128;
    let total: u128 = match space.scheme.kind {
        SchemeKind::Full => {
            let side = k
                .checked_mul(1u128 << space.n())
                .ok_or(Error::Overflow("space dimension"))?;
            let mut p: u128 = 1;
            for _ in 0..space.dim {
                p = p.checked_mul(side).ok_or(Error::Overflow("space dimension"))?;
            }
            p
        }
        SchemeKind::Sparse => {
            let mut p: u128 = 0;
            for levels in index_set(space.dim, space.scheme) {
                p = p
                    .checked_add(block_len(space.k, &levels)?)
                    .ok_or(Error::Overflow("space dimension"))?;
            }
            p
        }
    };
    u64::try_from(total).map_err(|_| Error::Overflow("space dimension"))
}

/// Address of one D-dimensional basis function. Elements are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub level: Vec<usize>,
    pub element: Vec<usize>,
    pub mode: Vec<usize>,
}

enum BlockLookup {
    Dense(Vec<u32>),
    Hashed(HashMap<Vec<u8>, u32>),
}

/// Bijection between [`MultiIndex`] and flat positions `0..P`.
pub struct Layout {
    space: Space,
    levels: Vec<u8>,
    offsets: Vec<usize>,
    lookup: BlockLookup,
    modes_per_element: usize,
}

impl std::fmt::Debug for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Layout")
            .field("space", &self.space)
            .field("blocks", &self.num_blocks())
            .field("len", &self.len())
            .finish()
    }
}

const DENSE_LOOKUP_LIMIT: u128 = 1 << 22;

impl Layout {
    pub fn new(space: &Space) -> Result<Self> {
        let p = space_dim(space)?;
        usize::try_from(p).map_err(|_| Error::Overflow("layout length"))?;
        let modes_per_element = space
            .k
            .checked_pow(space.dim as u32)
            .ok_or(Error::Overflow("modes per element"))?;
        let set = index_set(space.dim, space.scheme);
        let mut levels = Vec::with_capacity(set.len() * space.dim);
        let mut offsets = Vec::with_capacity(set.len() + 1);
        offsets.push(0usize);
        for l in &set {
            levels.extend(l.iter().map(|&x| x as u8));
            let len = block_len(space.k, l)? as usize;
            offsets.push(offsets.last().unwrap() + len);
        }
        let radix = space.n() as u128 + 1;
        let table_size = radix.checked_pow(space.dim as u32).unwrap_or(u128::MAX);
        let lookup = if table_size <= DENSE_LOOKUP_LIMIT {
            let mut table = vec![u32::MAX; table_size as usize];
            for (b, l) in set.iter().enumerate() {
                table[Self::dense_key(space.n(), l.iter().copied())] = b as u32;
            }
            BlockLookup::Dense(table)
        } else {
            BlockLookup::Hashed(
                set.iter()
                    .enumerate()
                    .map(|(b, l)| (l.iter().map(|&x| x as u8).collect(), b as u32))
                    .collect(),
            )
        };
        Ok(Self {
            space: *space,
            levels,
            offsets,
            lookup,
            modes_per_element,
        })
    }

    fn dense_key(n: usize, levels: impl Iterator<Item = usize>) -> usize {
        levels.fold(0, |acc, l| acc * (n + 1) + l)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_blocks(&self) -> usize {
        self.offsets.len() - 1
    }

    /// `k^D`: coefficients per element tuple.
    pub fn modes_per_element(&self) -> usize {
        self.modes_per_element
    }

    pub fn block_levels(&self, b: usize) -> &[u8] {
        let d = self.space.dim;
        &self.levels[b * d..(b + 1) * d]
    }

    pub fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        self.offsets[b]..self.offsets[b + 1]
    }

    /// Block index of a multi-level, if the scheme admits it.
    pub fn block_of(&self, levels: &[usize]) -> Option<usize> {
        if levels.len() != self.space.dim || levels.iter().any(|&l| l > self.space.n()) {
            return None;
        }
        let b = match &self.lookup {
            BlockLookup::Dense(t) => t[Self::dense_key(self.space.n(), levels.iter().copied())],
            BlockLookup::Hashed(h) => {
                let key: Vec<u8> = levels.iter().map(|&x| x as u8).collect();
                *h.get(&key)?
            }
        };
        (b != u32::MAX).then_some(b as usize)
    }

    /// [`Layout::block_of`] for levels stored as bytes.
    pub(crate) fn block_of_bytes(&self, levels: &[u8]) -> Option<usize> {
        match &self.lookup {
            BlockLookup::Dense(t) => {
                if levels.iter().any(|&l| l as usize > self.space.n()) {
                    return None;
                }
                let b = t[Self::dense_key(self.space.n(), levels.iter().map(|&l| l as usize))];
                (b != u32::MAX).then_some(b as usize)
            }
            BlockLookup::Hashed(h) => h.get(levels).map(|&b| b as usize),
        }
    }

    pub fn position(&self, idx: &MultiIndex) -> Option<usize> {
        let d = self.space.dim;
        let k = self.space.k;
        if idx.element.len() != d || idx.mode.len() != d {
            return None;
        }
        let b = self.block_of(&idx.level)?;
        let mut erank = 0usize;
        let mut mrank = 0usize;
        for a in 0..d {
            let c = cells(idx.level[a] as u32) as usize;
            if idx.element[a] == 0 || idx.element[a] > c || idx.mode[a] >= k {
                return None;
            }
            erank = erank * c + (idx.element[a] - 1);
            mrank = mrank * k + idx.mode[a];
        }
        Some(self.offsets[b] + erank * self.modes_per_element + mrank)
    }

    pub fn multi_index(&self, pos: usize) -> Option<MultiIndex> {
        if pos >= self.len() {
            return None;
        }
        let b = self.offsets.partition_point(|&o| o <= pos) - 1;
        let local = pos - self.offsets[b];
        let k = self.space.k;
        let d = self.space.dim;
        let level: Vec<usize> = self.block_levels(b).iter().map(|&l| l as usize).collect();
        let mut erank = local / self.modes_per_element;
        let mut mrank = local % self.modes_per_element;
        let mut element = vec![0; d];
        let mut mode = vec![0; d];
        for a in (0..d).rev() {
            let c = cells(level[a] as u32) as usize;
            element[a] = erank % c + 1;
            erank /= c;
            mode[a] = mrank % k;
            mrank /= k;
        }
        Some(MultiIndex { level, element, mode })
    }
}

/// Flat coefficient vector over a [`Space`].
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffVector {
    pub space: Space,
    pub values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct VectorHeader {
    #[serde(rename = "D")]
    dim: usize,
    k: usize,
    n: usize,
    scheme: SchemeKind,
    #[serde(rename = "P")]
    len: usize,
}

impl CoeffVector {
    pub fn zeros(space: Space) -> Result<Self> {
        let len = space_dim(&space)?;
        let len = usize::try_from(len).map_err(|_| Error::Overflow("vector length"))?;
        Ok(Self {
            space,
            values: vec![0.0; len],
        })
    }

    pub fn from_values(space: Space, values: Vec<f64>) -> Result<Self> {
        let len = space_dim(&space)? as usize;
        if values.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: values.len(),
            });
        }
        Ok(Self { space, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.values)
    }

    /// JSON header line `{D, k, n, scheme, P}` followed by little-endian `f64`s.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = VectorHeader {
            dim: self.space.dim,
            k: self.space.k,
            n: self.space.n(),
            scheme: self.space.scheme.kind,
            len: self.values.len(),
        };
        let line = serde_json::to_string(&header).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let header: VectorHeader = serde_json::from_str(line.trim_end()).map_err(|e| Error::Format(e.to_string()))?;
        let space = Space::new(
            header.dim,
            header.k,
            Scheme {
                kind: header.scheme,
                n: header.n,
            },
        )?;
        let expected = space_dim(&space)? as usize;
        if expected != header.len {
            return Err(Error::Format(format!(
                "header P = {} but the space has {expected} coefficients",
                header.len
            )));
        }
        let mut bytes = vec![0u8; header.len * 8];
        r.read_exact(&mut bytes)
            .map_err(|e| Error::Format(format!("truncated payload: {e}")))?;
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { space, values })
    }
}

/// Hierarchical coefficients keyed by multi-level, one dense block per key.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffDict {
    pub space: Space,
    pub blocks: BTreeMap<Vec<usize>, Vec<f64>>,
}

impl CoeffDict {
    pub fn zeros(space: Space) -> Self {
        let blocks = index_set(space.dim, space.scheme)
            .into_iter()
            .map(|l| {
                let len = block_len(space.k, &l).unwrap_or(0) as usize;
                (l, vec![0.0; len])
            })
            .collect();
        Self { space, blocks }
    }
}

/// Flattens a coefficient dictionary in layout order.
pub fn d2v(dict: &CoeffDict) -> Result<CoeffVector> {
    let layout = Layout::new(&dict.space)?;
    for key in dict.blocks.keys() {
        if !dict.space.scheme.admits(key) || key.len() != dict.space.dim {
            return Err(Error::ShapeMismatch {
                level: key.clone(),
                expected: 0,
                found: dict.blocks[key].len(),
            });
        }
    }
    let mut values = Vec::with_capacity(layout.len());
    for b in 0..layout.num_blocks() {
        let level: Vec<usize> = layout.block_levels(b).iter().map(|&l| l as usize).collect();
        let expected = layout.block_range(b).len();
        match dict.blocks.get(&level) {
            Some(block) if block.len() == expected => values.extend_from_slice(block),
            Some(block) => {
                return Err(Error::ShapeMismatch {
                    level,
                    expected,
                    found: block.len(),
                })
            }
            None => {
                return Err(Error::ShapeMismatch {
                    level,
                    expected,
                    found: 0,
                })
            }
        }
    }
    Ok(CoeffVector {
        space: dict.space,
        values,
    })
}

/// Splits a flat vector into per-level blocks.
pub fn v2d(vec: &CoeffVector) -> Result<CoeffDict> {
    let layout = Layout::new(&vec.space)?;
    if vec.values.len() != layout.len() {
        return Err(Error::LengthMismatch {
            expected: layout.len(),
            found: vec.values.len(),
        });
    }
    let blocks = (0..layout.num_blocks())
        .map(|b| {
            let level = layout.block_levels(b).iter().map(|&l| l as usize).collect();
            (level, vec.values[layout.block_range(b)].to_vec())
        })
        .collect();
    Ok(CoeffDict {
        space: vec.space,
        blocks,
    })
}

/// Euclidean norm, which is the `L^2` norm of the represented function.
pub fn l2_norm(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}
