//! Blowup sequences for double covers branched along an arrangement.
//!
//! The state is combinatorial: every stratum (an intersection component of
//! some divisors) is recorded by its maximal containing set and its
//! dimension, and every intersection of divisors is either empty or a single
//! stratum. Blowing up a center `C` transforms a stratum `R` as follows:
//!
//! * `R ⊆ C`: the intersection of its strict transforms is empty, `R` is dropped;
//! * `R ∩ C = ∅`: `R` is untouched;
//! * otherwise `R` is replaced by its strict transform (same containing set,
//!   same dimension) and a new stratum `R̃ ∩ E` of dimension `dim R - 1` is
//!   added, contained in `E`, in `R`'s divisors, and in every divisor through
//!   `R ∩ C` that does not contain `C`.
//!
//! Splayed components stay splayed by the same partition, and every
//! `R̃ ∩ E` is splayed by `({E}, rest)`. Splayedness is purely a dimension
//! statement once all intersections are smooth:
//! `dim ∩S1 + dim ∩S2 - dim B = dim X`, which is checked after every step.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::arrangement::Arrangement;
use crate::classify::{self, admissible_counts};

pub type DivisorId = usize;
pub type ComponentId = usize;

/// Coefficients on `H, E_1, ..., E_b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ClassVector(pub Vec<i64>);

impl ClassVector {
    pub fn zero(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn hyperplane(len: usize) -> Self {
        let mut v = Self::zero(len);
        v.0[0] = 1;
        v
    }

    /// The class `E_k` (1-based) in a group of rank `len`.
    pub fn exceptional(k: usize, len: usize) -> Self {
        let mut v = Self::zero(len);
        v.0[k] = 1;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Pullback along a blowup: zero-extension to the larger group.
    pub fn pullback(&self, len: usize) -> Self {
        assert!(len >= self.len(), "pullback cannot shrink a class");
        let mut v = self.0.clone();
        v.resize(len, 0);
        Self(v)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> Self {
        Self(self.0.iter().map(|a| a * k).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Origin {
    /// Index of the hyperplane in the input arrangement.
    Original(usize),
    /// Created by blowup step `k` (1-based).
    Exceptional(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrackedDivisor {
    pub id: DivisorId,
    pub name: String,
    pub origin: Origin,
    pub cls: ClassVector,
    pub in_branch: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisorWitness {
    pub part1: Vec<DivisorId>,
    pub part2: Vec<DivisorId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Status {
    Splayed(DivisorWitness),
    NonSplayed,
}

impl Status {
    pub fn is_splayed(&self) -> bool {
        matches!(self, Status::Splayed(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Provenance {
    /// A flat of the input arrangement, by its containing hyperplanes.
    Initial(Vec<usize>),
    StrictTransform(ComponentId),
    /// `R̃ ∩ E` for the stratum `R` (component id, or `None` for a divisor).
    ExceptionalTrace {
        parent: Option<ComponentId>,
        divisor: Option<DivisorId>,
        step: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrackedComponent {
    pub id: ComponentId,
    /// Every divisor containing the component, ascending.
    pub containing: Vec<DivisorId>,
    pub dim: usize,
    pub status: Status,
    pub provenance: Provenance,
}

/// Short description of a component for reports and errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentSummary {
    pub containing: Vec<String>,
    pub dim: usize,
}

impl std::fmt::Display for ComponentSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{}}} (dim {})", self.containing.join(", "), self.dim)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlowupError {
    #[error("hypothesis violated at {component}: {reason}")]
    HypothesisViolation {
        component: ComponentSummary,
        reason: String,
    },
    #[error("center {component} has codimension {codim} < 2")]
    CenterTooSmall {
        component: ComponentSummary,
        codim: usize,
    },
    #[error("no component with id {0}")]
    UnknownComponent(ComponentId),
    #[error("canonical ledger mismatch: {lhs:?} != {rhs:?}")]
    LedgerMismatch { lhs: ClassVector, rhs: ClassVector },
    #[error("inconsistent blowup state: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowupState {
    ambient_dim: usize,
    divisors: Vec<TrackedDivisor>,
    components: Vec<TrackedComponent>,
    canonical: ClassVector,
    step_count: usize,
    next_id: ComponentId,
    /// divisor id -> indices into `components` of those containing it
    by_divisor: Vec<Vec<usize>>,
    by_set: HashMap<Vec<DivisorId>, usize>,
    normal_crossings: bool,
}

/// Data about one blowup, recorded before the crepancy check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepInfo {
    pub step: usize,
    pub center: ComponentSummary,
    pub center_containing: Vec<DivisorId>,
    pub codim: usize,
    pub branch_count: usize,
    pub exceptional: DivisorId,
    pub e_in_branch: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrepancyCertificate {
    /// `2K' + Σ_{branch'} [D]`
    pub lhs: ClassVector,
    /// pullback of `2K + Σ_{branch} [D]`
    pub rhs: ClassVector,
}

impl BlowupState {
    /// Initial state: hyperplanes of class `H`, `K = -(n+1)H`, one component
    /// per flat of codimension ≥ 2.
    pub fn from_arrangement(arr: &Arrangement) -> Self {
        let divisors = arr
            .hyperplanes()
            .iter()
            .enumerate()
            .map(|(i, h)| TrackedDivisor {
                id: i,
                name: h.name.clone(),
                origin: Origin::Original(i),
                cls: ClassVector::hyperplane(1),
                in_branch: arr.in_branch(i),
            })
            .collect();
        let components: Vec<TrackedComponent> = arr
            .intersection_lattice()
            .into_iter()
            .filter(|f| f.codim >= 2)
            .enumerate()
            .map(|(id, f)| {
                let status = match classify::is_splayed(arr, &f).expect("lattice flat") {
                    Some(w) => Status::Splayed(DivisorWitness {
                        part1: w.part1,
                        part2: w.part2,
                    }),
                    None => Status::NonSplayed,
                };
                TrackedComponent {
                    id,
                    containing: f.containing.clone(),
                    dim: f.proj_dim,
                    status,
                    provenance: Provenance::Initial(f.containing),
                }
            })
            .collect();
        let next_id = components.len();
        let mut state = Self {
            ambient_dim: arr.dim(),
            divisors,
            components,
            canonical: ClassVector(vec![-(arr.dim() as i64 + 1)]),
            step_count: 0,
            next_id,
            by_divisor: Vec::new(),
            by_set: HashMap::new(),
            normal_crossings: false,
        };
        state.reindex();
        state
    }

    fn reindex(&mut self) {
        let mut index = vec![Vec::new(); self.divisors.len()];
        for (pos, c) in self.components.iter().enumerate() {
            for &d in &c.containing {
                index[d].push(pos);
            }
        }
        self.by_divisor = index;
        self.by_set = self
            .components
            .iter()
            .enumerate()
            .map(|(pos, c)| (c.containing.clone(), pos))
            .collect();
        self.normal_crossings = self
            .components
            .iter()
            .all(|c| self.ambient_dim - c.dim == c.containing.len());
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn divisors(&self) -> &[TrackedDivisor] {
        &self.divisors
    }

    /// Components of codimension ≥ 2.
    pub fn components(&self) -> &[TrackedComponent] {
        &self.components
    }

    pub fn canonical(&self) -> &ClassVector {
        &self.canonical
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn component(&self, id: ComponentId) -> Option<&TrackedComponent> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn codim(&self, c: &TrackedComponent) -> usize {
        self.ambient_dim - c.dim
    }

    pub fn branch_count(&self, containing: &[DivisorId]) -> usize {
        containing
            .iter()
            .filter(|&&d| self.divisors[d].in_branch)
            .count()
    }

    pub fn summary(&self, c: &TrackedComponent) -> ComponentSummary {
        ComponentSummary {
            containing: c
                .containing
                .iter()
                .map(|&d| self.divisors[d].name.clone())
                .collect(),
            dim: c.dim,
        }
    }

    pub fn non_splayed_count(&self) -> usize {
        self.components
            .iter()
            .filter(|c| !c.status.is_splayed())
            .count()
    }

    /// Codim-2 components lying on at least two branch divisors.
    pub fn branch_pair_count(&self) -> usize {
        self.branch_pairs().count()
    }

    fn branch_pairs(&self) -> impl Iterator<Item = &TrackedComponent> {
        self.components
            .iter()
            .filter(|c| self.codim(c) == 2 && self.branch_count(&c.containing) >= 2)
    }

    pub fn is_admissible(&self, c: &TrackedComponent) -> bool {
        admissible_counts(self.branch_count(&c.containing), self.codim(c))
    }

    /// Smallest stratum containing every divisor in `set`: `Some((containing,
    /// dim))`, or `None` when their intersection is empty. The empty set gives
    /// the ambient space.
    pub fn closure(&self, set: &[DivisorId]) -> Result<Option<(Vec<DivisorId>, usize)>, BlowupError> {
        match set {
            [] => return Ok(Some((Vec::new(), self.ambient_dim))),
            [d] => return Ok(Some((vec![*d], self.ambient_dim - 1))),
            _ => {}
        }
        if let Some(&pos) = self.by_set.get(set) {
            let c = &self.components[pos];
            return Ok(Some((c.containing.clone(), c.dim)));
        }
        // with normal crossings a nonempty intersection is a stratum with
        // exactly that containing set
        if self.normal_crossings {
            return Ok(None);
        }
        let pivot = set
            .iter()
            .copied()
            .min_by_key(|&d| self.by_divisor[d].len())
            .unwrap();
        let mut best: Option<&TrackedComponent> = None;
        for &pos in &self.by_divisor[pivot] {
            let c = &self.components[pos];
            if !is_subset(set, &c.containing) {
                continue;
            }
            match best {
                Some(b) if b.dim > c.dim => {}
                Some(b) if b.dim == c.dim => {
                    return Err(BlowupError::Inconsistent(format!(
                        "intersection of {set:?} has two components {:?} and {:?}",
                        b.containing, c.containing
                    )))
                }
                _ => best = Some(c),
            }
        }
        Ok(best.map(|c| (c.containing.clone(), c.dim)))
    }

    /// `dim ∩S1 + dim ∩S2 - dim B = dim X`.
    pub fn witness_holds(&self, c: &TrackedComponent, w: &DivisorWitness) -> Result<bool, BlowupError> {
        if w.part1.is_empty() || w.part2.is_empty() {
            return Ok(false);
        }
        let mut union: Vec<DivisorId> = w.part1.iter().chain(&w.part2).copied().collect();
        union.sort_unstable();
        if union != c.containing {
            return Ok(false);
        }
        let (Some((_, d1)), Some((_, d2))) = (self.closure(&w.part1)?, self.closure(&w.part2)?) else {
            return Ok(false);
        };
        Ok(d1 + d2 == self.ambient_dim + c.dim)
    }

    /// A minimal non-splayed component, ties broken by dimension, then
    /// containing set, then id.
    pub fn select_center(&self) -> Option<&TrackedComponent> {
        let non_splayed: Vec<&TrackedComponent> = self
            .components
            .iter()
            .filter(|c| !c.status.is_splayed())
            .collect();
        non_splayed
            .iter()
            .copied()
            .filter(|c| {
                !non_splayed
                    .iter()
                    .any(|o| o.id != c.id && is_strict_subset(&c.containing, &o.containing))
            })
            .min_by(|a, b| tie_break(a).cmp(&tie_break(b)))
    }

    /// Next phase-2 center: a codim-2 component on two branch divisors.
    pub fn select_branch_pair(&self) -> Option<&TrackedComponent> {
        self.branch_pairs()
            .min_by(|a, b| tie_break(a).cmp(&tie_break(b)))
    }

    /// Every stratum has codimension equal to the number of divisors through it.
    pub fn is_normal_crossings(&self) -> bool {
        self.normal_crossings
    }

    /// No two branch divisors meet.
    pub fn branch_pairwise_disjoint(&self) -> bool {
        !self
            .components
            .iter()
            .any(|c| self.branch_count(&c.containing) >= 2)
    }

    /// Blows up the component `center_id`, returning the new state and a
    /// record of the step.
    pub fn blowup_step(&self, center_id: ComponentId) -> Result<(BlowupState, StepInfo), BlowupError> {
        let center = self
            .component(center_id)
            .ok_or(BlowupError::UnknownComponent(center_id))?;
        let codim = self.codim(center);
        if codim < 2 {
            return Err(BlowupError::CenterTooSmall {
                component: self.summary(center),
                codim,
            });
        }
        if !center.status.is_splayed() && !self.is_admissible(center) {
            return Err(BlowupError::HypothesisViolation {
                component: self.summary(center),
                reason: format!(
                    "non-splayed and not admissible ({} branch divisors, codim {codim})",
                    self.branch_count(&center.containing)
                ),
            });
        }
        let step = self.step_count + 1;
        let rank = step + 1;
        let s_c = center.containing.clone();
        let branch_count = self.branch_count(&s_c);
        let e_in_branch = branch_count % 2 == 1;
        let e_id = self.divisors.len();

        let mut divisors: Vec<TrackedDivisor> = self
            .divisors
            .iter()
            .map(|d| {
                let mut cls = d.cls.pullback(rank);
                if s_c.binary_search(&d.id).is_ok() {
                    cls = cls.sub(&ClassVector::exceptional(step, rank));
                }
                TrackedDivisor { cls, ..d.clone() }
            })
            .collect();
        divisors.push(TrackedDivisor {
            id: e_id,
            name: self.exceptional_name(step),
            origin: Origin::Exceptional(step),
            cls: ClassVector::exceptional(step, rank),
            in_branch: e_in_branch,
        });

        let mut next_id = self.next_id;
        let mut fresh = || {
            next_id += 1;
            next_id - 1
        };
        let mut components = Vec::new();
        let trace = |containing: Vec<DivisorId>,
                         dim: usize,
                         parent: Option<ComponentId>,
                         divisor: Option<DivisorId>,
                         id: ComponentId|
         -> TrackedComponent {
            let rest: Vec<DivisorId> = containing.iter().copied().filter(|&d| d != e_id).collect();
            TrackedComponent {
                id,
                containing,
                dim,
                status: Status::Splayed(DivisorWitness {
                    part1: rest,
                    part2: vec![e_id],
                }),
                provenance: Provenance::ExceptionalTrace {
                    parent,
                    divisor,
                    step,
                },
            }
        };

        // divisors meeting C contribute D̃ ∩ E
        for d in 0..self.divisors.len() {
            let Some(extra) = self.trace_extra(&[d], &s_c)? else {
                continue;
            };
            let containing = sorted_union(&[d], &extra, e_id);
            components.push(trace(containing, self.ambient_dim - 2, None, Some(d), fresh()));
        }
        for r in &self.components {
            if is_subset(&s_c, &r.containing) {
                continue; // R ⊆ C
            }
            let Some(extra) = self.trace_extra(&r.containing, &s_c)? else {
                components.push(TrackedComponent {
                    id: fresh(),
                    provenance: Provenance::StrictTransform(r.id),
                    ..r.clone()
                });
                continue;
            };
            let containing = sorted_union(&r.containing, &extra, e_id);
            components.push(TrackedComponent {
                id: fresh(),
                provenance: Provenance::StrictTransform(r.id),
                ..r.clone()
            });
            components.push(trace(containing, r.dim - 1, Some(r.id), None, fresh()));
        }

        let mut seen = BTreeSet::new();
        for c in &components {
            if !seen.insert(c.containing.clone()) {
                return Err(BlowupError::Inconsistent(format!(
                    "two strata share the containing set {:?}",
                    c.containing
                )));
            }
        }

        let canonical = self
            .canonical
            .pullback(rank)
            .add(&ClassVector::exceptional(step, rank).scale(codim as i64 - 1));
        let info = StepInfo {
            step,
            center: self.summary(center),
            center_containing: s_c,
            codim,
            branch_count,
            exceptional: e_id,
            e_in_branch,
        };
        let mut next = BlowupState {
            ambient_dim: self.ambient_dim,
            divisors,
            components,
            canonical,
            step_count: step,
            next_id,
            by_divisor: Vec::new(),
            by_set: HashMap::new(),
            normal_crossings: false,
        };
        next.reindex();
        next.check_consistency()?;
        Ok((next, info))
    }

    /// For a stratum `R` with containing set `s_r`: `None` if `R ⊆ C` or
    /// `R ∩ C = ∅`; otherwise the divisors through `R ∩ C` that contain
    /// neither `R` nor `C`.
    fn trace_extra(&self, s_r: &[DivisorId], s_c: &[DivisorId]) -> Result<Option<Vec<DivisorId>>, BlowupError> {
        if is_subset(s_c, s_r) {
            return Ok(None);
        }
        let union = sorted_merge(s_r, s_c);
        let Some((meet, _)) = self.closure(&union)? else {
            return Ok(None);
        };
        Ok(Some(
            meet.into_iter()
                .filter(|d| s_c.binary_search(d).is_err() && s_r.binary_search(d).is_err())
                .collect(),
        ))
    }

    fn exceptional_name(&self, step: usize) -> String {
        let mut name = format!("E{step}");
        while self.divisors.iter().any(|d| d.name == name) {
            name.push('\'');
        }
        name
    }

    /// Dimensions in range and every splayed witness valid.
    pub fn check_consistency(&self) -> Result<(), BlowupError> {
        for c in &self.components {
            if c.dim + 2 > self.ambient_dim || c.containing.len() < 2 {
                return Err(BlowupError::Inconsistent(format!(
                    "component {} has codimension < 2",
                    self.summary(c)
                )));
            }
            if let Status::Splayed(w) = &c.status {
                if !self.witness_holds(c, w)? {
                    return Err(BlowupError::Inconsistent(format!(
                        "splaying of {} by {:?} / {:?} does not hold",
                        self.summary(c),
                        w.part1,
                        w.part2
                    )));
                }
            }
        }
        Ok(())
    }

    /// `2K + Σ_{branch} [D]`.
    pub fn branch_ledger(&self) -> ClassVector {
        self.divisors
            .iter()
            .filter(|d| d.in_branch)
            .fold(self.canonical.scale(2), |acc, d| acc.add(&d.cls))
    }

    pub fn branch_classes(&self) -> Vec<(String, ClassVector)> {
        self.divisors
            .iter()
            .filter(|d| d.in_branch)
            .map(|d| (d.name.clone(), d.cls.clone()))
            .collect()
    }
}

fn tie_break(c: &TrackedComponent) -> (usize, &[DivisorId], ComponentId) {
    (c.dim, &c.containing, c.id)
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

fn is_strict_subset(small: &[usize], big: &[usize]) -> bool {
    small.len() < big.len() && is_subset(small, big)
}

fn sorted_merge(a: &[usize], b: &[usize]) -> Vec<usize> {
    let set: BTreeSet<usize> = a.iter().chain(b).copied().collect();
    set.into_iter().collect()
}

fn sorted_union(a: &[usize], b: &[usize], extra: usize) -> Vec<usize> {
    let mut v = sorted_merge(a, b);
    v.push(extra);
    v.sort_unstable();
    v
}

/// Checks `2K' + Σ_{branch'} [D] = π*(2K + Σ_{branch} [D])`.
pub fn crepancy_check(
    before: &BlowupState,
    after: &BlowupState,
) -> Result<CrepancyCertificate, BlowupError> {
    let lhs = after.branch_ledger();
    let rhs = before.branch_ledger().pullback(lhs.len());
    if lhs != rhs {
        return Err(BlowupError::LedgerMismatch { lhs, rhs });
    }
    Ok(CrepancyCertificate { lhs, rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchClass {
    pub divisor: String,
    pub class: ClassVector,
}

/// One blowup in a resolution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub phase: u8,
    pub center: ComponentSummary,
    pub codim: usize,
    pub branch_count: usize,
    pub parity: Parity,
    pub exceptional: String,
    #[serde(rename = "E_in_branch")]
    pub e_in_branch: bool,
    pub canonical: ClassVector,
    pub branch_classes: Vec<BranchClass>,
    pub certificate: &'static str,
    /// Non-splayed components left after the step (phase 1).
    #[serde(skip)]
    pub non_splayed_after: usize,
    /// Codim-2 branch-pair components left after the step.
    #[serde(skip)]
    pub branch_pairs_after: usize,
    #[serde(skip)]
    pub ledger: CrepancyCertificate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolutionTrace {
    pub steps: Vec<TraceStep>,
    pub initial_non_splayed: usize,
    pub initial_branch_pairs: usize,
    /// Branch pairs present when phase 1 ends.
    pub phase2_branch_pairs: usize,
    pub final_state: BlowupState,
}

impl ResolutionTrace {
    pub fn phase_len(&self, phase: u8) -> usize {
        self.steps.iter().filter(|s| s.phase == phase).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.steps).expect("serializable")
    }
}

fn record(phase: u8, info: StepInfo, after: &BlowupState, ledger: CrepancyCertificate) -> TraceStep {
    TraceStep {
        step: info.step,
        phase,
        center: info.center,
        codim: info.codim,
        branch_count: info.branch_count,
        parity: if info.branch_count % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        },
        exceptional: after.divisors[info.exceptional].name.clone(),
        e_in_branch: info.e_in_branch,
        canonical: after.canonical.clone(),
        branch_classes: after
            .branch_classes()
            .into_iter()
            .map(|(divisor, class)| BranchClass { divisor, class })
            .collect(),
        certificate: "ok",
        non_splayed_after: after.non_splayed_count(),
        branch_pairs_after: after.branch_pair_count(),
        ledger,
    }
}

/// Blows up minimal non-splayed components until everything is splayed,
/// then separates the branch divisors by blowing up their pairwise
/// intersections.
pub fn resolve(arr: &Arrangement) -> Result<ResolutionTrace, BlowupError> {
    let mut state = BlowupState::from_arrangement(arr);
    state.check_consistency()?;
    let initial_non_splayed = state.non_splayed_count();
    let initial_branch_pairs = state.branch_pair_count();
    let mut steps = Vec::new();

    while let Some(center) = state.select_center() {
        let before = state.non_splayed_count();
        let (next, info) = state.blowup_step(center.id)?;
        let ledger = crepancy_check(&state, &next)?;
        if next.non_splayed_count() >= before {
            return Err(BlowupError::Inconsistent(format!(
                "non-splayed count did not drop after blowing up {}",
                info.center
            )));
        }
        steps.push(record(1, info, &next, ledger));
        state = next;
    }
    if !state.is_normal_crossings() {
        let bad = state
            .components
            .iter()
            .find(|c| state.codim(c) != c.containing.len())
            .unwrap();
        return Err(BlowupError::Inconsistent(format!(
            "all components splayed but {} is not a normal crossing",
            state.summary(bad)
        )));
    }

    let phase2_branch_pairs = state.branch_pair_count();
    while let Some(center) = state.select_branch_pair() {
        let before = state.branch_pair_count();
        let (next, info) = state.blowup_step(center.id)?;
        let ledger = crepancy_check(&state, &next)?;
        if next.branch_pair_count() + 1 != before {
            return Err(BlowupError::Inconsistent(format!(
                "branch pairs went from {before} to {} after blowing up {}",
                next.branch_pair_count(),
                info.center
            )));
        }
        if !next.is_normal_crossings() {
            return Err(BlowupError::Inconsistent(format!(
                "normal crossings lost after blowing up {}",
                info.center
            )));
        }
        steps.push(record(2, info, &next, ledger));
        state = next;
    }
    if !state.branch_pairwise_disjoint() {
        return Err(BlowupError::Inconsistent(
            "branch divisors still meet after phase 2".into(),
        ));
    }
    Ok(ResolutionTrace {
        steps,
        initial_non_splayed,
        initial_branch_pairs,
        phase2_branch_pairs,
        final_state: state,
    })
}

/// Divisor classes keyed by name, for reports.
pub fn class_table(state: &BlowupState) -> BTreeMap<String, ClassVector> {
    state
        .divisors
        .iter()
        .map(|d| (d.name.clone(), d.cls.clone()))
        .collect()
}
