#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splay_core::arrangement::{from_int_rows, parse_arrangement, Arrangement};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> Arrangement {
    parse_arrangement(&std::fs::read(fixture_path(name)).unwrap()).unwrap()
}

pub fn fixture_bytes(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).unwrap()
}

pub const ARRANGEMENT_FIXTURES: &[&str] = &[
    "example1_10.json",
    "boolean_p2.json",
    "boolean_p3.json",
    "boolean_p4.json",
    "pencil3_p2.json",
    "probe_a3.json",
];

pub const FACTOR_FIXTURES: &[&str] = &[
    "faber_boolean_pairs.json",
    "faber_lines.json",
    "faber_line_pair.json",
    "faber_pencils.json",
    "faber_pencil_line.json",
    "faber_pencil_pair.json",
];

/// All coordinate hyperplanes of `P^n`.
pub fn boolean_full(n: usize) -> Arrangement {
    let rows: Vec<Vec<i64>> = (0..=n)
        .map(|i| (0..=n).map(|j| i64::from(i == j)).collect())
        .collect();
    from_int_rows(n, &rows).unwrap()
}

/// `x0, ..., x6, x1+x2, x3+x4, x5+x6` in `P^6`.
pub fn example() -> Arrangement {
    fixture("example1_10.json")
}

/// Rows with entries in `{-1, 0, 1}`, pairwise non-proportional.
pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<i64>> {
    let mut rows: Vec<Vec<i64>> = Vec::new();
    let mut tries = 0;
    while rows.len() < k && tries < 1000 {
        tries += 1;
        let row: Vec<i64> = (0..=n).map(|_| rng.random_range(-1..=1)).collect();
        let lead = match row.iter().find(|&&x| x != 0) {
            Some(&l) => l,
            None => continue,
        };
        let norm: Vec<i64> = row.iter().map(|x| x * lead).collect();
        if rows.iter().any(|r| {
            let l = *r.iter().find(|&&x| x != 0).unwrap();
            r.iter().map(|x| x * l).collect::<Vec<_>>() == norm
        }) {
            continue;
        }
        rows.push(row);
    }
    rows
}

pub fn random_arrangement(seed: u64) -> Arrangement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=6);
    let k = rng.random_range(1..=8);
    from_int_rows(n, &random_rows(&mut rng, n, k)).unwrap()
}
