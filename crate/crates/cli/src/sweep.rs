//! Parameter ranges shared by all subcommands.

use serde::Serialize;
use sgdg::{Error, Result, SchemeKind, Space};

/// Parses `"3"`, `"2..7"` (inclusive), or comma-separated mixtures of both.
pub fn parse_range(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| format!("bad range start in {part:?}"))?;
            let b: usize = b
                .trim()
                .trim_start_matches('=')
                .parse()
                .map_err(|_| format!("bad range end in {part:?}"))?;
            if b < a {
                return Err(format!("empty range {part:?}"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad integer {part:?}"))?);
        }
    }
    if out.is_empty() {
        return Err("empty range".into());
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Wave numbers of the reference runs: `[1, 0, -1, 2, 1]` in 5D, that plus
/// a trailing 1 in 6D, and `[1, 2, -1]` repeated otherwise.
pub fn default_wave(dim: usize) -> Vec<i64> {
    match dim {
        5 => vec![1, 0, -1, 2, 1],
        6 => vec![1, 0, -1, 2, 1, 1],
        _ => [1, 2, -1].iter().copied().cycle().take(dim).collect(),
    }
}

/// The `(k, scheme, n)` grid of one sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub dim: usize,
    pub orders: Vec<usize>,
    pub levels: Vec<usize>,
    pub schemes: Vec<SchemeKind>,
    /// Memory budget for any single operator or vector, in bytes.
    pub budget_bytes: u64,
}

impl Sweep {
    pub fn new(dim: usize, orders: Vec<usize>, levels: Vec<usize>, schemes: Vec<SchemeKind>) -> Self {
        Self {
            dim,
            orders,
            levels,
            schemes,
            budget_bytes: 4 << 30,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() || self.levels.is_empty() || self.schemes.is_empty() {
            return Err(Error::InvalidArgument("sweep ranges must be non-empty".into()));
        }
        if self.orders.contains(&0) {
            return Err(Error::InvalidArgument("polynomial order k must be >= 1".into()));
        }
        Space::sparse(self.dim, 1, 0).map(|_| ())
    }

    /// Configurations in output order: by `k`, then scheme, then `n`.
    pub fn configs(&self) -> Vec<(usize, SchemeKind, usize)> {
        let mut out = Vec::new();
        for &k in &self.orders {
            for &s in &self.schemes {
                for &n in &self.levels {
                    out.push((k, s, n));
                }
            }
        }
        out
    }

    pub fn space(&self, k: usize, scheme: SchemeKind, n: usize) -> Result<Space> {
        match scheme {
            SchemeKind::Full => Space::full(self.dim, k, n),
            SchemeKind::Sparse => Space::sparse(self.dim, k, n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3").unwrap(), vec![3]);
        assert_eq!(parse_range("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_range("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_range("5,1..2,2").unwrap(), vec![1, 2, 5]);
        assert!(parse_range("").is_err());
        assert!(parse_range("4..2").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn waves() {
        assert_eq!(default_wave(3), vec![1, 2, -1]);
        assert_eq!(default_wave(1), vec![1]);
        assert_eq!(default_wave(4), vec![1, 2, -1, 1]);
        assert_eq!(default_wave(5), vec![1, 0, -1, 2, 1]);
    }

    #[test]
    fn config_order() {
        let s = Sweep::new(2, vec![2, 1], vec![0, 1], vec![SchemeKind::Sparse, SchemeKind::Full]);
        let c = s.configs();
        assert_eq!(c[0], (2, SchemeKind::Sparse, 0));
        assert_eq!(c[1], (2, SchemeKind::Sparse, 1));
        assert_eq!(c[2], (2, SchemeKind::Full, 0));
        assert_eq!(c.len(), 8);
        assert!(s.validate().is_ok());
        assert!(Sweep::new(2, vec![], vec![1], vec![SchemeKind::Full])
            .validate()
            .is_err());
        assert!(Sweep::new(0, vec![1], vec![1], vec![SchemeKind::Full])
            .validate()
            .is_err());
    }

    proptest::proptest! {
        #[test]
        fn ranges_expand_to_sorted_sets(parts in proptest::collection::vec((0usize..20, 0usize..5), 1..5)) {
            let text: Vec<String> = parts.iter().map(|&(a, len)| format!("{a}..{}", a + len)).collect();
            let got = parse_range(&text.join(",")).unwrap();
            let mut want: Vec<usize> = parts.iter().flat_map(|&(a, len)| a..=a + len).collect();
            want.sort_unstable();
            want.dedup();
            proptest::prop_assert_eq!(got, want);
        }
    }
}
