//! One blowup of `P^n` along a linear center, in explicit affine charts.
//!
//! After dehomogenizing at a coordinate not vanishing on the center, the
//! affine coordinates split as `y_0, ..., y_{c-1}` (cutting out the center)
//! and transverse `t_1, ..., t_m`. Chart `k` of the blowup substitutes
//! `y_k = u_k`, `y_i = u_k u_i`; the exceptional divisor is `u_k = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::arrangement::{format_rational, Arrangement, Flat};
use crate::exactla::{int, QMatrix, Rational};
use crate::groebner::{vars, GroebnerError, Ideal, Poly, Vars};
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChartError {
    #[error("center has codimension {0} < 2")]
    CenterTooSmall(usize),
    #[error("chart index {index} out of range for a center of codimension {codim}")]
    ChartOutOfRange { index: usize, codim: usize },
    #[error("point is not on the selected locus")]
    NotOnLocus,
    #[error("the chosen hyperplanes have empty intersection")]
    EmptyIntersection,
    #[error("the flat of the chosen hyperplanes does not meet the center")]
    DisjointFromCenter,
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
}

/// Chart `chart_index` of the blowup along a flat.
#[derive(Debug, Clone)]
pub struct ChartScene {
    pub chart_index: usize,
    /// `u0, ..., u{c-1}, t1, ..., tm`
    pub vars: Vars,
    /// Codimension of the center.
    pub codim: usize,
    /// Projective coordinate set to 1.
    pub dehomogenized: usize,
    pub exceptional: Poly,
    /// Strict transform of each hyperplane, in arrangement order.
    pub strict_transforms: Vec<Poly>,
    pub contains_center: Vec<bool>,
}

impl ChartScene {
    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn format(&self, p: &Poly) -> String {
        p.format(&self.vars)
    }
}

/// Hyperplane `i` as `Σ α_r y_r + Σ β_j t_j + γ`.
struct AdaptedForm {
    alpha: Vec<Rational>,
    beta: Vec<Rational>,
    gamma: Rational,
}

fn adapted_forms(arr: &Arrangement, center: &Flat, a: usize) -> Vec<AdaptedForm> {
    let n = arr.dim();
    // affine columns: every coordinate but `a`, then the constant
    let cols: Vec<usize> = (0..=n).filter(|&j| j != a).chain([a]).collect();
    let rows: Vec<Vec<Rational>> = center
        .forms_span
        .basis()
        .iter()
        .map(|f| cols.iter().map(|&j| f[j].clone()).collect())
        .collect();
    let (r, rank) = QMatrix::from_rows(n + 1, &rows).unwrap().rref();
    let pivots: Vec<usize> = (0..rank)
        .map(|i| (0..n + 1).find(|&j| !r.get(i, j).is_zero()).unwrap())
        .collect();
    assert!(pivots.iter().all(|&p| p < n), "dehomogenizing coordinate vanishes on center");
    let transverse: Vec<usize> = (0..n).filter(|j| !pivots.contains(j)).collect();
    arr.hyperplanes()
        .iter()
        .map(|h| {
            let hv: Vec<Rational> = cols.iter().map(|&j| h.coeffs()[j].clone()).collect();
            let alpha: Vec<Rational> = pivots.iter().map(|&p| hv[p].clone()).collect();
            let residual = |col: usize| {
                alpha
                    .iter()
                    .enumerate()
                    .fold(hv[col].clone(), |acc, (i, al)| acc - al * r.get(i, col))
            };
            AdaptedForm {
                beta: transverse.iter().map(|&j| residual(j)).collect(),
                gamma: residual(n),
                alpha,
            }
        })
        .collect()
}

/// A projective coordinate whose vanishing contains neither the center nor
/// the flat cut out by `avoid` together with the center.
fn dehomogenizing_coordinate(arr: &Arrangement, center: &Flat, avoid: &[usize]) -> usize {
    let mut idx: Vec<usize> = center.containing.clone();
    idx.extend_from_slice(avoid);
    let span = arr.span_of(&idx);
    let n = arr.dim();
    (0..=n)
        .rev()
        .find(|&a| {
            let mut e = vec![Rational::zero(); n + 1];
            e[a] = int(1);
            !span.contains(&e).unwrap()
        })
        .expect("flat is nonempty")
}

pub fn blowup_chart(arr: &Arrangement, center: &Flat, chart_index: usize) -> Result<ChartScene, ChartError> {
    chart_avoiding(arr, center, chart_index, &[])
}

fn chart_avoiding(
    arr: &Arrangement,
    center: &Flat,
    chart_index: usize,
    avoid: &[usize],
) -> Result<ChartScene, ChartError> {
    let c = center.codim;
    if c < 2 {
        return Err(ChartError::CenterTooSmall(c));
    }
    if chart_index >= c {
        return Err(ChartError::ChartOutOfRange {
            index: chart_index,
            codim: c,
        });
    }
    let n = arr.dim();
    let a = dehomogenizing_coordinate(arr, center, avoid);
    let names: Vec<String> = (0..c)
        .map(|i| format!("u{i}"))
        .chain((1..=n - c).map(|j| format!("t{j}")))
        .collect();
    let k = chart_index;
    let u = |i: usize| Poly::var(n, i);
    let y: Vec<Poly> = (0..c)
        .map(|i| if i == k { u(k) } else { &u(k) * &u(i) })
        .collect();
    let mut strict_transforms = Vec::new();
    let mut contains_center = Vec::new();
    for form in adapted_forms(arr, center, a) {
        let mut p = Poly::constant(n, form.gamma.clone());
        for (yr, al) in y.iter().zip(&form.alpha) {
            p = &p + &yr.scale(al);
        }
        for (j, b) in form.beta.iter().enumerate() {
            p = &p + &u(c + j).scale(b);
        }
        let m = p.min_degree_in(k);
        strict_transforms.push(p.divide_var_power(k, m));
        contains_center.push(form.gamma.is_zero() && form.beta.iter().all(Zero::is_zero));
    }
    Ok(ChartScene {
        chart_index,
        vars: vars(&names),
        codim: c,
        dehomogenized: a,
        exceptional: u(k),
        strict_transforms,
        contains_center,
    })
}

fn gradient_rows(eqs: &[Poly], q: &[Rational]) -> Vec<Vec<Rational>> {
    eqs.iter()
        .map(|f| (0..q.len()).map(|i| f.derivative(i).eval(q)).collect())
        .collect()
}

fn rank(rows: &[Vec<Rational>], cols: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    QMatrix::from_rows(cols, rows).unwrap().rank()
}

/// Dimension of the Zariski tangent space at `q` of the scheme cut out by `eqs`.
pub fn tangent_dim_at(scene: &ChartScene, eqs: &[Poly], q: &[Rational]) -> Result<usize, ChartError> {
    let n = scene.nvars();
    if q.len() != n || eqs.iter().any(|f| !f.eval(q).is_zero()) {
        return Err(ChartError::NotOnLocus);
    }
    Ok(n - rank(&gradient_rows(eqs, q), n))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssertionRecord {
    pub assertion: &'static str,
    pub predicted: i64,
    pub observed: i64,
    pub chart: usize,
    pub point: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChartReport {
    pub center: Vec<String>,
    pub q: Vec<String>,
    /// The flat of `Q` lies in the center.
    pub inside_center: bool,
    pub g: Option<usize>,
    pub h: Option<usize>,
    /// Dimension of the center.
    pub c: usize,
    pub dim_r: usize,
    pub records: Vec<AssertionRecord>,
    /// Samples for which no rational point was found.
    pub missing_samples: usize,
}

impl ChartReport {
    pub fn passes(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.pass)
    }
}

const ATTEMPTS: usize = 64;

/// A rational point of `E ∩ ⋂_{i∈Q} D̃_i` in chart `scene` off the strict
/// transforms of `off`, with random free parameters.
fn sample_on_exceptional(
    scene: &ChartScene,
    q_set: &[usize],
    off: &[usize],
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Rational>> {
    let n = scene.nvars();
    let k = scene.chart_index;
    let free_vars: Vec<usize> = (0..n).filter(|&i| i != k).collect();
    // restricted to u_k = 0 every strict transform is affine-linear
    let mut rows = Vec::new();
    for &i in q_set {
        let f = &scene.strict_transforms[i];
        let mut row = vec![Rational::zero(); free_vars.len() + 1];
        for (m, c) in f.terms() {
            if m[k] > 0 {
                continue;
            }
            match m.iter().position(|&e| e > 0) {
                None => row[free_vars.len()] = -c.clone(),
                Some(v) => {
                    assert_eq!(m.iter().sum::<u32>(), 1, "strict transform not linear on E");
                    row[free_vars.iter().position(|&w| w == v).unwrap()] = c.clone();
                }
            }
        }
        rows.push(row);
    }
    let width = free_vars.len() + 1;
    let (r, rk) = if rows.is_empty() {
        (QMatrix::zeros(0, width), 0)
    } else {
        QMatrix::from_rows(width, &rows).unwrap().rref()
    };
    let pivots: Vec<usize> = (0..rk)
        .map(|i| (0..width).find(|&j| !r.get(i, j).is_zero()).unwrap())
        .collect();
    if pivots.contains(&(width - 1)) {
        return None;
    }
    let params: Vec<usize> = (0..width - 1).filter(|j| !pivots.contains(j)).collect();
    let mut z = vec![Rational::zero(); width - 1];
    for &p in &params {
        z[p] = int(rng.random_range(-30..=30));
    }
    for (i, &p) in pivots.iter().enumerate() {
        let mut v = r.get(i, width - 1).clone();
        for &j in &params {
            v -= r.get(i, j) * &z[j];
        }
        z[p] = v;
    }
    let mut point = vec![Rational::zero(); n];
    for (idx, &v) in free_vars.iter().enumerate() {
        point[v] = z[idx].clone();
    }
    if off
        .iter()
        .any(|&i| scene.strict_transforms[i].eval(&point).is_zero())
    {
        return None;
    }
    Some(point)
}

fn record(assertion: &'static str, predicted: usize, observed: usize, chart: usize, point: &[Rational]) -> AssertionRecord {
    AssertionRecord {
        assertion,
        predicted: predicted as i64,
        observed: observed as i64,
        chart,
        point: point.iter().map(format_rational).collect(),
        pass: predicted == observed,
    }
}

/// Checks the tangent-space dimension statements for `⋂_{i∈Q} D̃_i` after
/// blowing up `center`, at `samples` rational points on the exceptional
/// divisor.
pub fn verify_dimension_formulas(
    arr: &Arrangement,
    center: &Flat,
    q_set: &[usize],
    samples: usize,
    seed: u64,
) -> Result<ChartReport, ChartError> {
    if center.codim < 2 {
        return Err(ChartError::CenterTooSmall(center.codim));
    }
    let n = arr.dim();
    let r = arr.flat_of(q_set).ok_or(ChartError::EmptyIntersection)?;
    let s_c = &center.containing;
    let inside_center = s_c.iter().all(|i| r.containing.contains(i));
    let mut report = ChartReport {
        center: arr.names(s_c),
        q: arr.names(q_set),
        inside_center,
        g: None,
        h: None,
        c: center.proj_dim,
        dim_r: r.proj_dim,
        records: Vec::new(),
        missing_samples: 0,
    };

    if inside_center {
        for k in 0..center.codim {
            let scene = chart_avoiding(arr, center, k, &[])?;
            let mut gens: Vec<Poly> = q_set
                .iter()
                .map(|&i| scene.strict_transforms[i].clone())
                .collect();
            gens.push(scene.exceptional.clone());
            let unit = Ideal::new(scene.vars.clone(), gens).is_unit();
            report.records.push(record("empty_on_exceptional", 1, usize::from(unit), k, &[]));
        }
        return Ok(report);
    }

    let mut joint: Vec<usize> = q_set.iter().chain(s_c).copied().collect();
    joint.sort_unstable();
    joint.dedup();
    let meet = arr.flat_of(&joint).ok_or(ChartError::DisjointFromCenter)?;
    let q_c: Vec<usize> = q_set.iter().copied().filter(|i| s_c.contains(i)).collect();
    let g = arr.flat_of(&q_c).map_or(n, |f| f.proj_dim);
    let h = meet.proj_dim;
    let c = center.proj_dim;
    report.g = Some(g);
    report.h = Some(h);
    // divisors through R ∩ C but not through C contain all of R̃ ∩ E
    let off: Vec<usize> = (0..arr.len())
        .filter(|i| {
            !r.containing.contains(i) && (s_c.contains(i) || !meet.containing.contains(i))
        })
        .collect();
    let scenes: Vec<ChartScene> = (0..center.codim)
        .map(|k| chart_avoiding(arr, center, k, &joint))
        .collect::<Result<_, _>>()?;
    let nv = n;

    for s in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(s as u64));
        let start = rng.random_range(0..center.codim);
        let found = (0..ATTEMPTS).find_map(|attempt| {
            let scene = &scenes[(start + attempt) % center.codim];
            sample_on_exceptional(scene, q_set, &off, &mut rng).map(|p| (scene, p))
        });
        let Some((scene, point)) = found else {
            report.missing_samples += 1;
            continue;
        };
        let k = scene.chart_index;
        let eqs: Vec<Poly> = q_set
            .iter()
            .map(|&i| scene.strict_transforms[i].clone())
            .collect();
        let grads = gradient_rows(&eqs, &point);
        let tangent = tangent_dim_at(scene, &eqs, &point)?;
        let mut with_e = eqs.clone();
        with_e.push(scene.exceptional.clone());
        let tangent_e = tangent_dim_at(scene, &with_e, &point)?;
        let fibre_cols: Vec<usize> = (0..center.codim).filter(|&i| i != k).collect();
        let restricted: Vec<Vec<Rational>> = grads
            .iter()
            .map(|row| fibre_cols.iter().map(|&j| row[j].clone()).collect())
            .collect();
        let kernel = fibre_cols.len() - rank(&restricted, fibre_cols.len());
        let mut fibre_eqs = with_e.clone();
        for (j, x) in point.iter().enumerate().skip(center.codim) {
            fibre_eqs.push(&Poly::var(nv, j) - &Poly::constant(nv, x.clone()));
        }
        let fibre = tangent_dim_at(scene, &fibre_eqs, &point)?;

        let predicted = g + h - c;
        let recs = [
            record("tangent_dim", predicted, tangent, k, &point),
            record("tangent_dim_on_exceptional", predicted - 1, tangent_e, k, &point),
            record("exceptional_drop", 1, tangent - tangent_e, k, &point),
            record("fibre_kernel_dim", g - c - 1, kernel, k, &point),
            record("image_dim", h + 1, tangent - kernel, k, &point),
            record("fibre_dim", r.proj_dim - h - 1, fibre, k, &point),
            record("smooth", r.proj_dim, tangent, k, &point),
            record("smooth_on_exceptional", r.proj_dim - 1, tangent_e, k, &point),
        ];
        report.records.extend(recs);
    }
    Ok(report)
}
