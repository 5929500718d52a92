//! Projective hyperplane arrangements and their intersection lattices.

use std::collections::{HashMap, VecDeque};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactla::{Rational, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArrangementError {
    #[error("malformed arrangement: {0}")]
    Syntax(String),
    #[error("unsupported ambient space {0:?} (only \"projective\" is supported)")]
    Ambient(String),
    #[error("invalid rational {0:?}")]
    BadRational(String),
    #[error("hyperplane {name}: expected {expected} coefficients, got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("hyperplane {0} has an all-zero form")]
    ZeroForm(String),
    #[error("hyperplanes {0} and {1} define the same divisor")]
    DuplicateHyperplane(String, String),
    #[error("hyperplane name {0} is used twice")]
    DuplicateName(String),
    #[error("branch divisor {0} is not a hyperplane of the arrangement")]
    UnknownBranch(String),
    #[error("branch index {0} out of range")]
    BranchOutOfRange(usize),
}

/// Parses `"p"` or `"p/q"` with decimal integers (`q > 0`).
pub fn parse_rational(s: &str) -> Result<Rational, ArrangementError> {
    let bad = || ArrangementError::BadRational(s.to_string());
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let digits = |t: &str, signed: bool| {
        let body = if signed {
            t.strip_prefix(['-', '+']).unwrap_or(t)
        } else {
            t
        };
        !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit())
    };
    if !digits(num, true) {
        return Err(bad());
    }
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = match den {
        Some(d) if digits(d, false) => BigInt::from_str(d).map_err(|_| bad())?,
        Some(_) => return Err(bad()),
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

/// A hyperplane `{ coeffs · x = 0 }` in projective space, with its form scaled
/// so the first nonzero coefficient is 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hyperplane {
    pub name: String,
    coeffs: Vec<Rational>,
}

impl Hyperplane {
    pub fn new(name: impl Into<String>, coeffs: Vec<Rational>) -> Result<Self, ArrangementError> {
        let name = name.into();
        let Some(lead) = coeffs.iter().find(|c| !c.is_zero()).cloned() else {
            return Err(ArrangementError::ZeroForm(name));
        };
        let coeffs = coeffs.into_iter().map(|c| c / &lead).collect();
        Ok(Self { name, coeffs })
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Human-readable linear form, e.g. `x1 + x2`.
    pub fn form_string(&self) -> String {
        linear_form_string(&self.coeffs)
    }
}

pub(crate) fn linear_form_string(coeffs: &[Rational]) -> String {
    let mut out = String::new();
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let mag = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if !mag.is_one() {
            out.push_str(&format!("{mag}*"));
        }
        out.push_str(&format!("x{i}"));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrangement {
    dim: usize,
    hyperplanes: Vec<Hyperplane>,
    branch: Vec<usize>,
}

/// An intersection of hyperplanes, recorded with every hyperplane containing it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Flat {
    /// Span of the defining forms inside the dual space `Q^{n+1}`.
    pub forms_span: Subspace,
    pub codim: usize,
    /// Indices of all hyperplanes containing the flat, ascending.
    pub containing: Vec<usize>,
    pub proj_dim: usize,
}

impl Arrangement {
    /// `branch = None` puts every hyperplane in the branch locus.
    pub fn new(
        dim: usize,
        hyperplanes: Vec<Hyperplane>,
        branch: Option<Vec<usize>>,
    ) -> Result<Self, ArrangementError> {
        let mut names: HashMap<&str, usize> = HashMap::new();
        for (i, h) in hyperplanes.iter().enumerate() {
            if h.coeffs.len() != dim + 1 {
                return Err(ArrangementError::Arity {
                    name: h.name.clone(),
                    expected: dim + 1,
                    got: h.coeffs.len(),
                });
            }
            if names.insert(&h.name, i).is_some() {
                return Err(ArrangementError::DuplicateName(h.name.clone()));
            }
        }
        // Normalized forms are equal exactly when the originals are proportional.
        let mut seen: HashMap<&[Rational], usize> = HashMap::new();
        for (i, h) in hyperplanes.iter().enumerate() {
            if let Some(&j) = seen.get(h.coeffs.as_slice()) {
                return Err(ArrangementError::DuplicateHyperplane(
                    hyperplanes[j].name.clone(),
                    h.name.clone(),
                ));
            }
            seen.insert(&h.coeffs, i);
        }
        let mut branch = branch.unwrap_or_else(|| (0..hyperplanes.len()).collect());
        branch.sort_unstable();
        branch.dedup();
        if let Some(&bad) = branch.iter().find(|&&b| b >= hyperplanes.len()) {
            return Err(ArrangementError::BranchOutOfRange(bad));
        }
        Ok(Self {
            dim,
            hyperplanes,
            branch,
        })
    }

    /// Projective dimension `n` of the ambient `P^n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }

    pub fn branch(&self) -> &[usize] {
        &self.branch
    }

    pub fn in_branch(&self, i: usize) -> bool {
        self.branch.binary_search(&i).is_ok()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.hyperplanes.iter().position(|h| h.name == name)
    }

    pub fn names(&self, indices: &[usize]) -> Vec<String> {
        indices
            .iter()
            .map(|&i| self.hyperplanes[i].name.clone())
            .collect()
    }

    pub fn span_of(&self, indices: &[usize]) -> Subspace {
        Subspace::span(
            self.dim + 1,
            indices.iter().map(|&i| &self.hyperplanes[i].coeffs),
        )
        .expect("forms have arity n+1")
    }

    pub fn rank_of(&self, indices: &[usize]) -> usize {
        crate::exactla::rank_of(
            self.dim + 1,
            indices.iter().map(|&i| &self.hyperplanes[i].coeffs),
        )
    }

    /// The flat cut out by the given hyperplanes, or `None` when their
    /// intersection is empty in `P^n` (or the index set is empty).
    pub fn flat_of(&self, indices: &[usize]) -> Option<Flat> {
        if indices.is_empty() {
            return None;
        }
        self.flat_from_span(self.span_of(indices))
    }

    fn flat_from_span(&self, forms_span: Subspace) -> Option<Flat> {
        let codim = forms_span.dim();
        if codim > self.dim {
            return None;
        }
        let containing = (0..self.hyperplanes.len())
            .filter(|&i| forms_span.contains(&self.hyperplanes[i].coeffs).unwrap())
            .collect();
        Some(Flat {
            forms_span,
            codim,
            containing,
            proj_dim: self.dim - codim,
        })
    }

    /// True when `flat` is a flat of this arrangement with a maximal containing set.
    pub fn is_lattice_flat(&self, flat: &Flat) -> bool {
        !flat.containing.is_empty()
            && flat.containing.iter().all(|&i| i < self.len())
            && self.flat_of(&flat.containing).as_ref() == Some(flat)
    }

    /// Every nonempty flat, deduplicated by its span, sorted by codimension
    /// and then by containing set.
    pub fn intersection_lattice(&self) -> Vec<Flat> {
        let mut found: HashMap<Subspace, Flat> = HashMap::new();
        let mut queue = VecDeque::new();
        for i in 0..self.hyperplanes.len() {
            if let Some(f) = self.flat_of(&[i]) {
                if !found.contains_key(&f.forms_span) {
                    found.insert(f.forms_span.clone(), f.clone());
                    queue.push_back(f);
                }
            }
        }
        while let Some(flat) = queue.pop_front() {
            for (i, h) in self.hyperplanes.iter().enumerate() {
                if flat.containing.binary_search(&i).is_ok() {
                    continue;
                }
                let span = flat
                    .forms_span
                    .sum(&Subspace::span(self.dim + 1, [&h.coeffs]).unwrap())
                    .unwrap();
                if span.dim() > self.dim || found.contains_key(&span) {
                    continue;
                }
                let next = self.flat_from_span(span).unwrap();
                found.insert(next.forms_span.clone(), next.clone());
                queue.push_back(next);
            }
        }
        let mut flats: Vec<Flat> = found.into_values().collect();
        flats.sort_by(|a, b| (a.codim, &a.containing).cmp(&(b.codim, &b.containing)));
        flats
    }

    pub fn parse_json(text: &[u8]) -> Result<Self, ArrangementError> {
        let file: ArrangementFile =
            serde_json::from_slice(text).map_err(|e| ArrangementError::Syntax(e.to_string()))?;
        file.into_arrangement()
    }

    pub fn to_file(&self) -> ArrangementFile {
        ArrangementFile {
            ambient: Ambient {
                kind: "projective".into(),
                dim: self.dim,
            },
            hyperplanes: self
                .hyperplanes
                .iter()
                .map(|h| HyperplaneEntry {
                    name: h.name.clone(),
                    coeffs: h.coeffs.iter().map(format_rational).collect(),
                })
                .collect(),
            branch: Some(self.names(&self.branch)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }
}

/// `a ⊆ b` as projective subspaces, i.e. `b`'s forms lie in `a`'s span.
pub fn flat_leq(a: &Flat, b: &Flat) -> bool {
    b.forms_span
        .is_subspace_of(&a.forms_span)
        .unwrap_or(false)
}

pub fn parse_arrangement(text: &[u8]) -> Result<Arrangement, ArrangementError> {
    Arrangement::parse_json(text)
}

pub fn intersection_lattice(arr: &Arrangement) -> Vec<Flat> {
    arr.intersection_lattice()
}

/// On-disk arrangement format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrangementFile {
    pub ambient: Ambient,
    pub hyperplanes: Vec<HyperplaneEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ambient {
    #[serde(rename = "type")]
    pub kind: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperplaneEntry {
    pub name: String,
    pub coeffs: Vec<String>,
}

impl ArrangementFile {
    pub fn into_arrangement(self) -> Result<Arrangement, ArrangementError> {
        if self.ambient.kind != "projective" {
            return Err(ArrangementError::Ambient(self.ambient.kind));
        }
        let mut hyperplanes = Vec::with_capacity(self.hyperplanes.len());
        for entry in self.hyperplanes {
            let coeffs = entry
                .coeffs
                .iter()
                .map(|c| parse_rational(c))
                .collect::<Result<Vec<_>, _>>()?;
            if coeffs.len() != self.ambient.dim + 1 {
                return Err(ArrangementError::Arity {
                    name: entry.name,
                    expected: self.ambient.dim + 1,
                    got: coeffs.len(),
                });
            }
            hyperplanes.push(Hyperplane::new(entry.name, coeffs)?);
        }
        let branch = match self.branch {
            None => None,
            Some(names) => Some(
                names
                    .into_iter()
                    .map(|n| {
                        hyperplanes
                            .iter()
                            .position(|h| h.name == n)
                            .ok_or(ArrangementError::UnknownBranch(n))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        Arrangement::new(self.ambient.dim, hyperplanes, branch)
    }
}

/// Builds an arrangement from integer coefficient rows named `h0, h1, ...`.
pub fn from_int_rows(dim: usize, rows: &[Vec<i64>]) -> Result<Arrangement, ArrangementError> {
    let hyperplanes = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Hyperplane::new(
                format!("h{i}"),
                r.iter().map(|&c| crate::exactla::int(c)).collect(),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Arrangement::new(dim, hyperplanes, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::{int, rat};

    fn boolean(dim: usize, k: usize) -> Arrangement {
        let rows: Vec<Vec<i64>> = (1..=k)
            .map(|i| (0..=dim).map(|j| i64::from(j == i)).collect())
            .collect();
        from_int_rows(dim, &rows).unwrap()
    }

    #[test]
    fn rationals_parse() {
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("-6/4").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational(" 0 ").unwrap(), int(0));
        for bad in ["", "1/0", "x", "1.5", "1/-2", "--1", "/2"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn forms_are_normalized() {
        let h = Hyperplane::new("a", vec![int(0), int(-2), int(4)]).unwrap();
        assert_eq!(h.coeffs(), &[int(0), int(1), int(-2)]);
        assert_eq!(h.form_string(), "x1 - 2*x2");
        assert!(matches!(
            Hyperplane::new("z", vec![int(0), int(0)]),
            Err(ArrangementError::ZeroForm(_))
        ));
    }

    #[test]
    fn single_hyperplane() {
        let text = br#"{"ambient":{"type":"projective","dim":2},
            "hyperplanes":[{"name":"x0","coeffs":["1","0","0"]}]}"#;
        let arr = parse_arrangement(text).unwrap();
        assert_eq!(arr.len(), 1);
        assert_eq!(arr.branch(), &[0]);
        let lattice = arr.intersection_lattice();
        assert_eq!(lattice.len(), 1);
        assert_eq!(lattice[0].codim, 1);
    }

    #[test]
    fn proportional_forms_are_rejected() {
        let text = br#"{"ambient":{"type":"projective","dim":2},
            "hyperplanes":[{"name":"a","coeffs":["0","1","0"]},
                           {"name":"b","coeffs":["0","2","0"]}]}"#;
        assert_eq!(
            parse_arrangement(text),
            Err(ArrangementError::DuplicateHyperplane("a".into(), "b".into()))
        );
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            parse_arrangement(b"{"),
            Err(ArrangementError::Syntax(_))
        ));
        let wrong_len = br#"{"ambient":{"type":"projective","dim":2},
            "hyperplanes":[{"name":"a","coeffs":["0","1"]}]}"#;
        assert!(matches!(
            parse_arrangement(wrong_len),
            Err(ArrangementError::Arity { .. })
        ));
        let bad_branch = br#"{"ambient":{"type":"projective","dim":2},
            "hyperplanes":[{"name":"a","coeffs":["0","1","0"]}], "branch":["q"]}"#;
        assert_eq!(
            parse_arrangement(bad_branch),
            Err(ArrangementError::UnknownBranch("q".into()))
        );
        let affine = br#"{"ambient":{"type":"affine","dim":2},"hyperplanes":[]}"#;
        assert!(matches!(
            parse_arrangement(affine),
            Err(ArrangementError::Ambient(_))
        ));
        let h = Hyperplane::new("a", vec![int(1), int(0)]).unwrap();
        assert_eq!(
            Arrangement::new(1, vec![h], Some(vec![3])),
            Err(ArrangementError::BranchOutOfRange(3))
        );
    }

    #[test]
    fn boolean_lattice_p3() {
        let arr = boolean(3, 3);
        let lattice = arr.intersection_lattice();
        assert_eq!(lattice.len(), 7);
        let by_codim = |c| lattice.iter().filter(|f| f.codim == c).count();
        assert_eq!((by_codim(1), by_codim(2), by_codim(3)), (3, 3, 1));
        for f in &lattice {
            assert_eq!(f.codim, f.containing.len());
        }
    }

    #[test]
    fn empty_intersections_are_dropped() {
        // four coordinate hyperplanes of P^3 meet in nothing
        let arr = boolean(3, 3);
        let mut rows: Vec<Vec<i64>> = vec![vec![1, 0, 0, 0]];
        rows.extend((1..=3).map(|i| (0..=3).map(|j| i64::from(j == i)).collect()));
        let full = from_int_rows(3, &rows).unwrap();
        assert!(full.flat_of(&[0, 1, 2, 3]).is_none());
        assert_eq!(full.intersection_lattice().len(), 14);
        assert_eq!(arr.flat_of(&[]), None);
    }

    #[test]
    fn leq_examples() {
        let arr = boolean(3, 3);
        let point = arr.flat_of(&[0, 1, 2]).unwrap();
        let line = arr.flat_of(&[0, 1]).unwrap();
        assert!(flat_leq(&point, &line));
        assert!(!flat_leq(&line, &point));
        let a = arr.flat_of(&[0]).unwrap();
        let b = arr.flat_of(&[1]).unwrap();
        assert!(!flat_leq(&a, &b) && !flat_leq(&b, &a));
    }

    #[test]
    fn json_round_trip() {
        let arr = boolean(2, 2);
        let again = parse_arrangement(arr.to_json().as_bytes()).unwrap();
        assert_eq!(arr, again);
    }
}
