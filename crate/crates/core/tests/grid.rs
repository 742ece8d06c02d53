use std::collections::BTreeMap;

use proptest::prelude::*;
use sgdg::basis1d::hier_key;
use sgdg::grid::{index_set, l2_norm};
use sgdg::{d2v, space_dim, v2d, CoeffDict, CoeffVector, Layout, Scheme, Space};

/// Counts tensor products of 1D hierarchical functions whose level sum
/// (or maximum) is admitted, by visiting every one of them.
fn enumerate_dim(dim: usize, k: usize, n: usize, sparse: bool) -> u64 {
    let size = k << n;
    let mut count = 0;
    let mut idx = vec![0usize; dim];
    loop {
        let levels: Vec<u32> = idx.iter().map(|&i| hier_key(k, i).0).collect();
        let ok = if sparse {
            levels.iter().sum::<u32>() as usize <= n
        } else {
            true
        };
        count += ok as u64;
        let mut a = 0;
        loop {
            if a == dim {
                return count;
            }
            idx[a] += 1;
            if idx[a] < size {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

#[test]
fn full_dimension_closed_form() {
    for dim in 1..=4 {
        for k in 1..=3 {
            for n in 0..=4 {
                let want = ((k << n) as u64).pow(dim as u32);
                assert_eq!(space_dim(&Space::full(dim, k, n).unwrap()).unwrap(), want);
            }
        }
    }
}

#[test]
fn sparse_dimension_matches_enumeration() {
    assert_eq!(space_dim(&Space::sparse(2, 2, 2).unwrap()).unwrap(), 32);
    for dim in 1..=3 {
        for k in 1..=3 {
            for n in 0..=4 {
                let got = space_dim(&Space::sparse(dim, k, n).unwrap()).unwrap();
                assert_eq!(got, enumerate_dim(dim, k, n, true), "D={dim} k={k} n={n}");
            }
        }
    }
    assert_eq!(
        space_dim(&Space::full(2, 2, 3).unwrap()).unwrap(),
        enumerate_dim(2, 2, 3, false)
    );
}

#[test]
fn large_spaces_do_not_overflow_silently() {
    assert!(space_dim(&Space::full(16, 10, 30).unwrap()).is_err());
    assert!(space_dim(&Space::sparse(6, 5, 5).unwrap()).unwrap() > 0);
}

#[test]
fn sparse_index_sets_are_nested() {
    for dim in 1..=4 {
        for n in 0..5 {
            let small = index_set(dim, Scheme::sparse(n));
            let big = index_set(dim, Scheme::sparse(n + 1));
            assert!(small.iter().all(|l| big.contains(l)));
            let full = index_set(dim, Scheme::full(n));
            assert!(small.iter().all(|l| full.contains(l)));
        }
    }
}

fn small_space() -> impl Strategy<Value = Space> {
    (1usize..=3, 1usize..=3, 0usize..=3, any::<bool>()).prop_map(|(d, k, n, sparse)| {
        if sparse {
            Space::sparse(d, k, n).unwrap()
        } else {
            Space::full(d, k, n).unwrap()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn layout_is_a_bijection(space in small_space()) {
        let layout = Layout::new(&space).unwrap();
        prop_assert_eq!(layout.len() as u64, space_dim(&space).unwrap());
        for pos in 0..layout.len() {
            let mi = layout.multi_index(pos).unwrap();
            prop_assert!(space.scheme.admits(&mi.level));
            prop_assert_eq!(layout.position(&mi), Some(pos));
        }
        prop_assert!(layout.multi_index(layout.len()).is_none());
    }

    #[test]
    fn dict_roundtrip(space in small_space(), seed in any::<u64>()) {
        let layout = Layout::new(&space).unwrap();
        let values: Vec<f64> = (0..layout.len())
            .map(|i| ((i as u64).wrapping_mul(seed | 1) % 1000) as f64 / 7.0 - 50.0)
            .collect();
        let v = CoeffVector::from_values(space, values).unwrap();
        let d = v2d(&v).unwrap();
        prop_assert_eq!(d.blocks.len(), layout.num_blocks());
        let back = d2v(&d).unwrap();
        prop_assert_eq!(&back, &v);
        prop_assert!((l2_norm(&v.values) - v.norm()).abs() <= 1e-12 * v.norm().max(1.0));
    }

    #[test]
    fn serialization_roundtrip(space in small_space(), scale in -1e3f64..1e3) {
        let len = Layout::new(&space).unwrap().len();
        let values: Vec<f64> = (0..len).map(|i| scale * (i as f64).sin()).collect();
        let v = CoeffVector::from_values(space, values).unwrap();
        let mut buf = Vec::new();
        v.write_to(&mut buf).unwrap();
        let back = CoeffVector::read_from(&buf[..]).unwrap();
        prop_assert_eq!(back, v);
    }
}

#[test]
fn dict_with_missing_block_is_rejected() {
    let space = Space::sparse(2, 1, 1).unwrap();
    let mut d = CoeffDict::zeros(space);
    let first = d.blocks.keys().next().unwrap().clone();
    d.blocks.remove(&first);
    assert!(d2v(&d).is_err());
    let bad = CoeffDict {
        space,
        blocks: BTreeMap::from([(vec![0, 0], vec![0.0; 3])]),
    };
    assert!(d2v(&bad).is_err());
}

#[test]
fn file_roundtrip() {
    let space = Space::sparse(3, 2, 2).unwrap();
    let len = Layout::new(&space).unwrap().len();
    let v = CoeffVector::from_values(space, (0..len).map(|i| i as f64 * 0.25).collect()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.bin");
    v.write_to(std::fs::File::create(&path).unwrap()).unwrap();
    let back = CoeffVector::read_from(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back, v);
}
