//! Splayed / near-pencil / admissible verdicts for the flats of an arrangement.
//!
//! For hyperplanes the tangent space of `D_i` at any point of a flat is the
//! kernel of its form, so a bipartition `(S1, S2)` of the containing set
//! splays the flat exactly when `rank(S1) + rank(S2) = rank(S_C)`.
//! [`is_splayed_bruteforce`] evaluates the tangent-space sum literally and is
//! kept as an independent check of that identity.

use serde::Serialize;
use thiserror::Error;

use crate::arrangement::{Arrangement, Flat};
use crate::exactla::Subspace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("flat {0:?} is not a flat of this arrangement")]
    NotInLattice(Vec<usize>),
}

/// A bipartition of a flat's containing set that splays it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SplayWitness {
    pub part1: Vec<usize>,
    pub part2: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlatVerdict {
    #[serde(skip)]
    pub flat: Flat,
    pub splayed: Option<SplayWitness>,
    pub near_pencil: bool,
    pub admissible: bool,
    /// Number of branch hyperplanes through the flat.
    pub branch_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub verdicts: Vec<FlatVerdict>,
    /// Every flat of codim ≥ 2 is splayed or admissible.
    pub ours: bool,
    /// Every flat of codim ≥ 2 is near-pencil or admissible.
    pub classic: bool,
    pub branch_degree_sum: usize,
    pub warnings: Vec<String>,
}

impl Classification {
    pub fn branch_parity_even(&self) -> bool {
        self.branch_degree_sum.is_multiple_of(2)
    }
}

fn check_flat(arr: &Arrangement, flat: &Flat) -> Result<(), ClassifyError> {
    if arr.is_lattice_flat(flat) {
        Ok(())
    } else {
        Err(ClassifyError::NotInLattice(flat.containing.clone()))
    }
}

/// Calls `visit` on every `k`-subset of `items` in lexicographic order until
/// it returns `true`.
fn first_combination<T: Copy>(
    items: &[T],
    k: usize,
    mut visit: impl FnMut(&[T]) -> bool,
) -> bool {
    if k > items.len() {
        return false;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf: Vec<T> = Vec::with_capacity(k);
    loop {
        buf.clear();
        buf.extend(idx.iter().map(|&i| items[i]));
        if visit(&buf) {
            return true;
        }
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + items.len() - k) else {
            return false;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

fn complement(all: &[usize], part: &[usize]) -> Vec<usize> {
    all.iter()
        .copied()
        .filter(|i| part.binary_search(i).is_err())
        .collect()
}

/// Finds a splaying bipartition of the flat's containing set, with the least
/// index always in `part1`.
///
/// Singleton parts (the near-pencil shape) are tried first; after that
/// `part1 = {min} ∪ U` for subsets `U` of increasing size in lexicographic
/// order. The first valid partition is returned.
pub fn is_splayed(arr: &Arrangement, flat: &Flat) -> Result<Option<SplayWitness>, ClassifyError> {
    check_flat(arr, flat)?;
    Ok(find_witness(arr, &flat.containing, flat.codim))
}

fn find_witness(arr: &Arrangement, s: &[usize], rank: usize) -> Option<SplayWitness> {
    if s.len() < 2 {
        return None;
    }
    let min = s[0];
    for &j in s {
        let rest = complement(s, &[j]);
        if arr.rank_of(&rest) + 1 == rank {
            return Some(if j == min {
                SplayWitness {
                    part1: vec![min],
                    part2: rest,
                }
            } else {
                SplayWitness {
                    part1: rest,
                    part2: vec![j],
                }
            });
        }
    }
    let others = &s[1..];
    let mut found = None;
    for k in 1..others.len() {
        let hit = first_combination(others, k, |extra| {
            let mut part1 = Vec::with_capacity(k + 1);
            part1.push(min);
            part1.extend_from_slice(extra);
            let part2 = complement(s, &part1);
            if arr.rank_of(&part1) + arr.rank_of(&part2) == rank {
                found = Some(SplayWitness { part1, part2 });
                true
            } else {
                false
            }
        });
        if hit {
            break;
        }
    }
    found
}

/// True when `w` is a bipartition of the flat's containing set satisfying the
/// rank identity.
pub fn witness_is_valid(arr: &Arrangement, flat: &Flat, w: &SplayWitness) -> bool {
    if w.part1.is_empty() || w.part2.is_empty() {
        return false;
    }
    let mut union: Vec<usize> = w.part1.iter().chain(&w.part2).copied().collect();
    union.sort_unstable();
    let disjoint = union.windows(2).all(|p| p[0] != p[1]);
    disjoint
        && union == flat.containing
        && arr.rank_of(&w.part1) + arr.rank_of(&w.part2) == flat.codim
}

/// Literal tangent-space test: some bipartition has
/// `∩_{S1} ker f_i + ∩_{S2} ker f_j` equal to the whole space.
///
/// Works on the affine cone `Q^{n+1}`; every kernel contains the line of the
/// base point, so fullness there is equivalent to fullness of the projective
/// tangent space.
pub fn is_splayed_bruteforce(arr: &Arrangement, flat: &Flat) -> Result<bool, ClassifyError> {
    check_flat(arr, flat)?;
    let s = &flat.containing;
    if s.len() < 2 {
        return Ok(false);
    }
    let ambient = arr.dim() + 1;
    let tangent: Vec<Subspace> = s
        .iter()
        .map(|&i| {
            Subspace::span(ambient, [&arr.hyperplanes()[i].coeffs().to_vec()])
                .unwrap()
                .annihilator()
        })
        .collect();
    let meet = |mask: u64, want: bool| {
        let mut acc = Subspace::full(ambient);
        for (bit, t) in tangent.iter().enumerate() {
            if ((mask >> bit) & 1 == 1) == want {
                acc = acc.intersect(t).unwrap();
            }
        }
        acc
    };
    let m = s.len();
    // bit 0 (the least index) stays in part1; mask marks part1 members
    for rest in 0..(1u64 << (m - 1)) - 1 {
        let mask = 1 | (rest << 1);
        let v1 = meet(mask, true);
        let v2 = meet(mask, false);
        if v1.sum(&v2).unwrap().is_full() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Some single hyperplane can be dropped from the containing set with the
/// intersection getting strictly bigger.
pub fn is_near_pencil(arr: &Arrangement, flat: &Flat) -> Result<bool, ClassifyError> {
    check_flat(arr, flat)?;
    Ok(near_pencil_index(arr, flat).is_some())
}

/// The hyperplane whose removal drops the rank, if any (first in index order).
pub fn near_pencil_index(arr: &Arrangement, flat: &Flat) -> Option<usize> {
    let s = &flat.containing;
    if s.len() < 2 {
        return None;
    }
    s.iter()
        .copied()
        .find(|&j| arr.rank_of(&complement(s, &[j])) < flat.codim)
}

pub fn branch_count(arr: &Arrangement, flat: &Flat) -> usize {
    flat.containing.iter().filter(|&&i| arr.in_branch(i)).count()
}

/// `m - 2c ∈ {-1, -2}` where `m` counts branch hyperplanes through the flat
/// and `c` is its codimension.
pub fn admissible_counts(branch_count: usize, codim: usize) -> bool {
    let excess = branch_count as i64 - 2 * codim as i64;
    excess == -1 || excess == -2
}

pub fn is_admissible(arr: &Arrangement, flat: &Flat) -> bool {
    admissible_counts(branch_count(arr, flat), flat.codim)
}

pub fn classify_flat(arr: &Arrangement, flat: &Flat) -> Result<FlatVerdict, ClassifyError> {
    check_flat(arr, flat)?;
    let branch_count = branch_count(arr, flat);
    Ok(FlatVerdict {
        flat: flat.clone(),
        splayed: find_witness(arr, &flat.containing, flat.codim),
        near_pencil: near_pencil_index(arr, flat).is_some(),
        admissible: admissible_counts(branch_count, flat.codim),
        branch_count,
    })
}

/// Verdicts for every flat of codimension at least two, plus the two
/// resolvability criteria.
pub fn classify_arrangement(arr: &Arrangement) -> Classification {
    let verdicts: Vec<FlatVerdict> = arr
        .intersection_lattice()
        .iter()
        .filter(|f| f.codim >= 2)
        .map(|f| classify_flat(arr, f).expect("lattice flat"))
        .collect();
    let ours = verdicts.iter().all(|v| v.splayed.is_some() || v.admissible);
    let classic = verdicts.iter().all(|v| v.near_pencil || v.admissible);
    let branch_degree_sum = arr.branch().len();
    let mut warnings = Vec::new();
    if branch_degree_sum % 2 == 1 {
        warnings.push(format!(
            "branch divisors have total degree {branch_degree_sum}, which is odd: no double cover exists"
        ));
    }
    Classification {
        verdicts,
        ours,
        classic,
        branch_degree_sum,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::from_int_rows;

    /// {x1, x2, x1+x2} in P^2
    fn pencil3() -> Arrangement {
        from_int_rows(2, &[vec![0, 1, 0], vec![0, 0, 1], vec![0, 1, 1]]).unwrap()
    }

    #[test]
    fn three_lines_through_a_point() {
        let arr = pencil3();
        let point = arr.flat_of(&[0, 1]).unwrap();
        assert_eq!(point.containing, vec![0, 1, 2]);
        assert_eq!(is_splayed(&arr, &point).unwrap(), None);
        assert!(!is_splayed_bruteforce(&arr, &point).unwrap());
        assert!(!is_near_pencil(&arr, &point).unwrap());
        assert!(is_admissible(&arr, &point));
        let c = classify_arrangement(&arr);
        assert!(c.ours && c.classic);
        assert_eq!(c.verdicts.len(), 1);
        assert!(!c.branch_parity_even());
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn pencil_of_two() {
        let arr = from_int_rows(2, &[vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        let point = arr.flat_of(&[0, 1]).unwrap();
        assert!(is_near_pencil(&arr, &point).unwrap());
        let w = is_splayed(&arr, &point).unwrap().unwrap();
        assert_eq!(w, SplayWitness { part1: vec![0], part2: vec![1] });
        assert!(is_splayed_bruteforce(&arr, &point).unwrap());
    }

    #[test]
    fn single_hyperplane_has_no_bipartition() {
        let arr = from_int_rows(2, &[vec![1, 0, 0]]).unwrap();
        let f = arr.flat_of(&[0]).unwrap();
        assert_eq!(is_splayed(&arr, &f).unwrap(), None);
        assert!(!is_splayed_bruteforce(&arr, &f).unwrap());
        assert!(!is_near_pencil(&arr, &f).unwrap());
        assert!(classify_arrangement(&arr).verdicts.is_empty());
    }

    #[test]
    fn foreign_flat_is_rejected() {
        let arr = pencil3();
        let other = from_int_rows(2, &[vec![1, 0, 0], vec![0, 1, 0]]).unwrap();
        let f = other.flat_of(&[0, 1]).unwrap();
        assert_eq!(
            is_splayed(&arr, &f),
            Err(ClassifyError::NotInLattice(vec![0, 1]))
        );
        assert!(is_splayed_bruteforce(&arr, &f).is_err());
        assert!(is_near_pencil(&arr, &f).is_err());
    }

    #[test]
    fn near_pencil_witness_is_found_before_larger_parts() {
        // {x1, x2, x1+x2, x3, x4, x3+x4, x5}: near-pencil through x5 but also
        // splayed by the two triangles; the singleton part must win
        let arr = from_int_rows(
            5,
            &[
                vec![0, 1, 0, 0, 0, 0],
                vec![0, 0, 1, 0, 0, 0],
                vec![0, 1, 1, 0, 0, 0],
                vec![0, 0, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 1, 0],
                vec![0, 0, 0, 1, 1, 0],
                vec![0, 0, 0, 0, 0, 1],
            ],
        )
        .unwrap();
        let flat = arr.flat_of(&[0, 1, 3, 4, 6]).unwrap();
        let w = is_splayed(&arr, &flat).unwrap().unwrap();
        assert_eq!(w.part2, vec![6]);
        assert!(witness_is_valid(&arr, &flat, &w));
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut seen = Vec::new();
        first_combination(&[1, 2, 3, 4], 2, |c| {
            seen.push(c.to_vec());
            false
        });
        assert_eq!(
            seen,
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![1, 4],
                vec![2, 3],
                vec![2, 4],
                vec![3, 4]
            ]
        );
    }

    #[test]
    fn admissible_window() {
        assert!(admissible_counts(3, 2));
        assert!(admissible_counts(2, 2));
        assert!(admissible_counts(4, 3));
        assert!(!admissible_counts(9, 6));
        assert!(!admissible_counts(4, 2));
        assert!(!admissible_counts(1, 2));
    }
}
