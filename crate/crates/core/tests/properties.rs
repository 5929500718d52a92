mod common;

use proptest::prelude::*;
use splay_core::arrangement::{from_int_rows, Arrangement};
use splay_core::classify::{
    classify_flat, is_near_pencil, is_splayed, is_splayed_bruteforce, witness_is_valid,
};
use splay_core::exactla::{int, rank_of, QMatrix, Rational, Subspace};

fn matrix(max_rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, cols), 0..=max_rows)
}

fn to_q(rows: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
}

fn span(n: usize, rows: &[Vec<i64>]) -> Subspace {
    Subspace::span(n, to_q(rows).iter()).unwrap()
}

fn dims_and_rows() -> impl Strategy<Value = (usize, Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    (1usize..=8).prop_flat_map(|n| (Just(n), matrix(6, n), matrix(6, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn modular_law((n, a, b) in dims_and_rows()) {
        let (u, w) = (span(n, &a), span(n, &b));
        let sum = u.sum(&w).unwrap();
        let meet = u.intersect(&w).unwrap();
        prop_assert_eq!(sum.dim() + meet.dim(), u.dim() + w.dim());
        prop_assert!(meet.is_subspace_of(&u).unwrap() && meet.is_subspace_of(&w).unwrap());
        prop_assert!(u.is_subspace_of(&sum).unwrap() && w.is_subspace_of(&sum).unwrap());
    }

    #[test]
    fn rref_idempotent_and_permutation_stable((n, a, _b) in dims_and_rows(), shift in 0usize..6) {
        prop_assume!(!a.is_empty());
        let m = QMatrix::from_rows(n, &to_q(&a)).unwrap();
        let (r, rank) = m.rref();
        let (rr, rank2) = r.rref();
        prop_assert_eq!(&r, &rr);
        prop_assert_eq!(rank, rank2);
        let mut rotated = a.clone();
        rotated.rotate_left(shift % a.len());
        prop_assert_eq!(QMatrix::from_rows(n, &to_q(&rotated)).unwrap().rank(), rank);
        for v in m.kernel() {
            prop_assert!(m.mul_vec(&v).unwrap().iter().all(|x| *x == int(0)));
        }
        prop_assert_eq!(m.kernel().len(), n - rank);
    }

    #[test]
    fn canonical_form_is_basis_independent((n, a, _b) in dims_and_rows(), k in -3i64..=3) {
        // add k times the first row to every other row, then reverse
        let mut b = a.clone();
        if let Some(first) = a.first().cloned() {
            for row in b.iter_mut().skip(1) {
                for (x, f) in row.iter_mut().zip(&first) {
                    *x += k * f;
                }
            }
        }
        b.reverse();
        prop_assert_eq!(span(n, &a), span(n, &b));
        let u = span(n, &a);
        prop_assert_eq!(u.annihilator().annihilator(), u);
    }

    #[test]
    fn lattice_closed_and_maximal(seed in any::<u64>()) {
        let arr = common::random_arrangement(seed);
        let flats = arr.intersection_lattice();
        for f in &flats {
            for (i, h) in arr.hyperplanes().iter().enumerate() {
                let inside = f.forms_span.contains(h.coeffs()).unwrap();
                prop_assert_eq!(inside, f.containing.contains(&i));
            }
        }
        for a in &flats {
            for b in &flats {
                let sum = a.forms_span.sum(&b.forms_span).unwrap();
                if sum.dim() <= arr.dim() {
                    prop_assert!(flats.iter().any(|f| f.forms_span == sum));
                }
            }
        }
    }

    #[test]
    fn splayed_agrees_with_bruteforce(seed in any::<u64>()) {
        let arr = common::random_arrangement(seed);
        for f in arr.intersection_lattice() {
            let w = is_splayed(&arr, &f).unwrap();
            prop_assert_eq!(w.is_some(), is_splayed_bruteforce(&arr, &f).unwrap());
            if let Some(w) = &w {
                prop_assert!(witness_is_valid(&arr, &f, w));
            }
        }
    }

    #[test]
    fn small_parts_and_near_pencils(seed in any::<u64>()) {
        let arr = common::random_arrangement(seed);
        for f in arr.intersection_lattice() {
            let v = classify_flat(&arr, &f).unwrap();
            if let Some(w) = &v.splayed {
                if w.part1.len() <= 2 || w.part2.len() <= 2 {
                    prop_assert!(is_near_pencil(&arr, &f).unwrap());
                }
            }
            if v.near_pencil {
                let w = v.splayed.as_ref().expect("near-pencil flats are splayed");
                prop_assert!(w.part1.len() == 1 || w.part2.len() == 1);
            }
        }
    }

    #[test]
    fn subsets_of_splayed_sets_stay_splayed(seed in any::<u64>(), mask in any::<u32>()) {
        let arr = common::random_arrangement(seed);
        let n1 = arr.dim() + 1;
        for f in arr.intersection_lattice() {
            let Some(w) = is_splayed(&arr, &f).unwrap() else { continue };
            let pick = |part: &[usize], offset: u32| -> Vec<usize> {
                part.iter()
                    .enumerate()
                    .filter(|(i, _)| mask.rotate_left(offset) >> (i % 32) & 1 == 1)
                    .map(|(_, &h)| h)
                    .collect()
            };
            let t1 = pick(&w.part1, 0);
            let t2 = pick(&w.part2, 7);
            if t1.is_empty() || t2.is_empty() {
                continue;
            }
            let forms = |idx: &[usize]| {
                let v: Vec<Vec<Rational>> = idx.iter().map(|&i| arr.hyperplanes()[i].coeffs().to_vec()).collect();
                rank_of(n1, v.iter())
            };
            let all: Vec<usize> = t1.iter().chain(&t2).copied().collect();
            prop_assert_eq!(forms(&t1) + forms(&t2), forms(&all));
        }
    }
}

fn boolean_affine(n: usize) -> Arrangement {
    // x1, ..., xn in P^n
    let rows: Vec<Vec<i64>> = (1..=n)
        .map(|i| (0..=n).map(|j| i64::from(i == j)).collect())
        .collect();
    from_int_rows(n, &rows).unwrap()
}

#[test]
fn boolean_codim_equals_subset_size() {
    for n in 1..=4 {
        for arr in [boolean_affine(n), common::boolean_full(n)] {
            let k = arr.len();
            for mask in 1u32..(1 << k) {
                let s: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
                match arr.flat_of(&s) {
                    Some(f) => {
                        assert_eq!(f.codim, s.len());
                        assert_eq!(f.containing, s);
                    }
                    None => assert!(s.len() > n),
                }
            }
        }
    }
}
