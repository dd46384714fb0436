//! The combed/ragged decision and the combing procedures.
//!
//! A function is combed when every point value on its domain of definition
//! is recovered by the `eps -> 0` limit of its filtered version. Pointwise
//! classification checks this node by node; coefficient objects are always
//! combed inside the disk, so their classification is a certificate rather
//! than a test.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog::Verdict;
use crate::disk::{AdaptiveOptions, BoundaryEvaluator};
use crate::error::{Error, Result};
use crate::extrapolate::{extrapolate_to_zero, ErrorModel};
use crate::function::{circle_offset, EvaluatorFunction, SingularKind};
use crate::grid::{nodes, GridFunction};
use crate::realfilter::{check_schedule, filter_limit, multiplier, Windowed};
use crate::spectrum::{compute_coefficients, CoefficientSequence, QuadratureOptions};

/// Default tolerance for `|f(theta) - limit|`.
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeVerdict {
    Recovered,
    SpikeMismatch,
    JumpMidpointMismatch,
    Undefined,
}

impl NodeVerdict {
    pub fn is_mismatch(self) -> bool {
        matches!(self, NodeVerdict::SpikeMismatch | NodeVerdict::JumpMidpointMismatch)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeReport {
    pub theta: f64,
    pub verdict: NodeVerdict,
    /// The recovered (combed) value, when computable.
    pub value: Option<f64>,
    /// `|f(theta) - value|`, when computable.
    pub residual: Option<f64>,
}

impl NodeReport {
    fn undefined(theta: f64) -> Self {
        NodeReport {
            theta,
            verdict: NodeVerdict::Undefined,
            value: None,
            residual: None,
        }
    }
}

/// Per-node verdicts and the overall verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub overall: Verdict,
    pub params: BTreeMap<String, Value>,
    pub nodes: Vec<NodeReport>,
}

impl ClassificationReport {
    fn new(params: BTreeMap<String, Value>, nodes: Vec<NodeReport>) -> Self {
        let overall = if nodes.iter().any(|n| n.verdict.is_mismatch()) {
            Verdict::Ragged
        } else {
            Verdict::Combed
        };
        ClassificationReport { overall, params, nodes }
    }

    pub fn count(&self, verdict: NodeVerdict) -> usize {
        self.nodes.iter().filter(|n| n.verdict == verdict).count()
    }

    /// The node nearest to `theta`.
    pub fn node_at(&self, theta: f64) -> Option<&NodeReport> {
        self.nodes
            .iter()
            .min_by(|a, b| circle_offset(a.theta, theta).abs().total_cmp(&circle_offset(b.theta, theta).abs()))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("tolerance must be positive, got {tol}")))
    }
}

fn check_grid_size(n: usize) -> Result<()> {
    if n < 16 {
        return Err(Error::domain(format!("grid needs at least 16 nodes, got {n}")));
    }
    Ok(())
}

/// One-sided limits at `t` from samples at `t +- {2h, h, h/2}`, `h` shrunk
/// to a quarter of the clearance so the probes stay on one smooth piece.
fn lateral_limits<W: Windowed + ?Sized>(f: &W, t: f64, h: f64) -> Option<(f64, f64)> {
    let h = match f.clearance(t) {
        Some(d) => h.min(0.25 * d),
        None => h,
    };
    let steps = [2.0 * h, h, 0.5 * h];
    let side = |dir: f64| -> Option<f64> {
        let values = steps
            .iter()
            .map(|&s| f.point(t + dir * s))
            .collect::<Option<Vec<_>>>()?;
        Some(extrapolate_to_zero(&steps, &values, ErrorModel::Full).value)
    };
    Some((side(-1.0)?, side(1.0)?))
}

fn classify_one<W: Windowed + ?Sized>(f: &W, t: f64, spacing: f64, schedule: &[f64], tol: f64) -> NodeReport {
    let Some(v) = f.point(t) else {
        return NodeReport::undefined(t);
    };
    let Ok(limit) = filter_limit(f, t, schedule) else {
        return NodeReport::undefined(t);
    };
    let diff = (v - limit.value).abs();
    let verdict = if diff <= tol {
        NodeVerdict::Recovered
    } else if limit.residual >= diff {
        // the extrapolation cannot tell the two apart
        return NodeReport::undefined(t);
    } else {
        match lateral_limits(f, t, 2.0 * spacing) {
            Some((lo, hi)) if (hi - lo).abs() > tol => NodeVerdict::JumpMidpointMismatch,
            _ => NodeVerdict::SpikeMismatch,
        }
    };
    NodeReport {
        theta: t,
        verdict,
        value: Some(limit.value),
        residual: Some(diff),
    }
}

/// Classifies any windowed function at the given coordinates. `spacing` sets
/// the probe distance for lateral limits; `schedule` is in the function's
/// own units and `reported_schedule` is what the report records.
pub(crate) fn classify_nodes<W: Windowed + Sync + ?Sized>(
    f: &W,
    coords: &[f64],
    spacing: f64,
    schedule: &[f64],
    tol: f64,
    reported_schedule: &[f64],
) -> Result<ClassificationReport> {
    check_tol(tol)?;
    check_grid_size(coords.len())?;
    check_schedule(schedule, f.max_half_width())?;
    let reports: Vec<NodeReport> = coords
        .par_iter()
        .map(|&t| classify_one(f, t, spacing, schedule, tol))
        .collect();
    let params = BTreeMap::from([
        ("method".to_string(), json!("pointwise")),
        ("n_grid".to_string(), json!(coords.len())),
        ("eps_schedule".to_string(), json!(reported_schedule)),
        ("tol".to_string(), json!(tol)),
    ]);
    Ok(ClassificationReport::new(params, reports))
}

/// Compares `f(theta)` with the filter limit at every node of an `n_grid`
/// grid. Nodes where `f` is undefined or the limit is not computable are
/// `undefined` and do not affect the overall verdict. Only the nodes are
/// inspected: a spike between nodes goes unseen.
pub fn classify_pointwise(
    f: &EvaluatorFunction,
    n_grid: usize,
    schedule: &[f64],
    tol: f64,
) -> Result<ClassificationReport> {
    check_grid_size(n_grid)?;
    classify_nodes(f, &nodes(n_grid), 2.0 * PI / n_grid as f64, schedule, tol, schedule)
}

/// One point of the coefficient-side certificate: the multiplier deviation
/// `|1 - m_k(eps)|` along a shrinking `eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateEntry {
    pub k: usize,
    pub eps: Vec<f64>,
    pub deviation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientClassification {
    pub overall: Verdict,
    pub certificate: Vec<CertificateEntry>,
}

/// Coefficient objects are combed: every inner analytic function is
/// recovered by the filter limit inside the disk. The certificate shows
/// `m_k(eps) -> 1` at `k = 1, N/2, N`.
pub fn classify_coefficients(c: &CoefficientSequence) -> CoefficientClassification {
    let n = c.n();
    let ks: BTreeSet<usize> = [1, n / 2, n].into_iter().filter(|&k| k >= 1 && k <= n).collect();
    let eps = vec![1e-2, 1e-4, 1e-6, 1e-8];
    let certificate = ks
        .into_iter()
        .map(|k| CertificateEntry {
            k,
            deviation: eps.iter().map(|&e| (1.0 - multiplier(k, e)).abs()).collect(),
            eps: eps.clone(),
        })
        .collect();
    CoefficientClassification {
        overall: Verdict::Combed,
        certificate,
    }
}

impl CoefficientClassification {
    /// The certificate in report form (no nodes).
    pub fn into_report(self) -> ClassificationReport {
        let params = BTreeMap::from([
            ("method".to_string(), json!("coefficients")),
            ("certificate".to_string(), serde_json::to_value(&self.certificate).expect("serializable")),
        ]);
        ClassificationReport {
            overall: self.overall,
            params,
            nodes: Vec::new(),
        }
    }
}

/// Grid whose nodes hold the filter limit of `f`; nodes where the limit is
/// not computable are undefined.
pub fn comb_by_filter_limit(f: &EvaluatorFunction, n_grid: usize, schedule: &[f64]) -> Result<GridFunction> {
    check_grid_size(n_grid)?;
    check_schedule(schedule, PI)?;
    let thetas = nodes(n_grid);
    let values: Vec<Option<f64>> = thetas
        .par_iter()
        .map(|&t| filter_limit(f, t, schedule).ok().map(|l| l.value))
        .collect();
    Ok(grid_from(values, f.singular_points().iter().copied(), "combed by filter limit"))
}

fn grid_from(
    values: Vec<Option<f64>>,
    singular: impl IntoIterator<Item = crate::function::SingularPoint>,
    note: &str,
) -> GridFunction {
    let defined: Vec<bool> = values.iter().map(Option::is_some).collect();
    let values = values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    GridFunction::new(values, defined)
        .expect("grid is consistent")
        .with_singular_points(singular)
        .with_note(note)
}

/// How a Fourier series is summed at the nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Summation {
    /// The plain partial sum `S_N`.
    Partial,
    /// The mean of `S_M` for `M = N/2 .. N-1`: exact for degree up to N/2,
    /// and with the limit of every convergent series.
    ValleePoussin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierOptions {
    pub summation: Summation,
    /// Threshold on `sup |S_N - S_{N/2}|` above which the series is flagged.
    pub convergence_tol: f64,
    pub quadrature: QuadratureOptions,
}

impl Default for FourierOptions {
    fn default() -> Self {
        FourierOptions {
            summation: Summation::ValleePoussin,
            convergence_tol: 1e-2,
            quadrature: QuadratureOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FourierComb {
    pub grid: GridFunction,
    /// `sup` over the nodes of `|S_N - S_{N/2}|`.
    pub diagnostic: f64,
    pub non_convergent: bool,
}

/// Coefficients of `f` at order `n`, then the series summed at the nodes.
pub fn comb_by_fourier(f: &EvaluatorFunction, n: usize, n_grid: usize, opts: &FourierOptions) -> Result<FourierComb> {
    let spectrum = compute_coefficients(f, n, &opts.quadrature)?;
    let mut out = comb_coefficients_by_fourier(&spectrum.coefficients, n_grid, opts)?;
    out.grid = out.grid.with_singular_points(f.singular_points().iter().copied());
    Ok(out)
}

/// Sums a given coefficient sequence at the nodes of an `n_grid` grid.
pub fn comb_coefficients_by_fourier(
    c: &CoefficientSequence,
    n_grid: usize,
    opts: &FourierOptions,
) -> Result<FourierComb> {
    check_grid_size(n_grid)?;
    let n = c.n();
    if n < 2 {
        return Err(Error::domain("Fourier combing needs at least two terms"));
    }
    let half = n / 2;
    let weight = |k: usize| -> f64 {
        match opts.summation {
            Summation::Partial => 1.0,
            Summation::ValleePoussin if k <= half => 1.0,
            Summation::ValleePoussin if k < 2 * half => (2 * half - k) as f64 / half as f64,
            Summation::ValleePoussin => 0.0,
        }
    };
    let weights: Vec<f64> = (1..=n).map(weight).collect();
    let (a, b) = (c.cosines(), c.sines());
    let rows: Vec<(f64, f64)> = nodes(n_grid)
        .par_iter()
        .map(|&t| {
            let mut summed = 0.0;
            let mut head = 0.0;
            let mut full = 0.0;
            for k in 1..=n {
                let (s, co) = (k as f64 * t).sin_cos();
                let term = a[k - 1] * co + b[k - 1] * s;
                summed += weights[k - 1] * term;
                full += term;
                if k == half {
                    head = full;
                }
            }
            (c.a0() + summed, (full - head).abs())
        })
        .collect();
    let diagnostic = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let values = rows.into_iter().map(|r| Some(r.0)).collect();
    Ok(FourierComb {
        grid: grid_from(values, [], "combed by Fourier series"),
        diagnostic,
        non_convergent: diagnostic > opts.convergence_tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskCombOptions {
    pub adaptive: AdaptiveOptions,
    /// Nodes whose extrapolation residual exceeds this are left undefined.
    pub mask_tol: f64,
}

impl Default for DiskCombOptions {
    fn default() -> Self {
        DiskCombOptions {
            adaptive: AdaptiveOptions::default(),
            mask_tol: 1e-6,
        }
    }
}

/// Boundary values of the inner analytic function at every node. Nodes
/// where the values diverge (singular points of the boundary function) or
/// fail to settle are undefined.
pub fn comb_by_disk(c: &CoefficientSequence, n_grid: usize, opts: &DiskCombOptions) -> Result<GridFunction> {
    check_grid_size(n_grid)?;
    let ev = BoundaryEvaluator::new(c);
    let values: Vec<Option<f64>> = nodes(n_grid)
        .par_iter()
        .map(|&t| match ev.boundary_value_adaptive(t, &opts.adaptive) {
            Ok(r) if r.residual <= opts.mask_tol * (1.0 + r.value.abs()) => Some(r.value),
            _ => None,
        })
        .collect();
    Ok(grid_from(values, [], "combed by disk boundary values"))
}

/// Classification of sampled data.
///
/// Point values at nodes are compared with the filter limit of a local
/// reconstruction that ignores the node itself: one-sided interpolating
/// polynomials through up to four neighbours on each side (not crossing a
/// declared singular point) give the lateral limits, and the window mean of
/// that reconstruction tends to their average. Nodes found in mismatch are
/// left out of their neighbours' stencils (a jump also ends the stencil)
/// and the pass is repeated, so a defect does not spill onto the nodes
/// around it. A difference only counts
/// once it exceeds `tol` plus a multiple of the reconstruction's own error
/// estimate: coarse samples of a smooth function are not called ragged.
/// Without a declared singular point a jump between two nodes cannot be told
/// from a wrong value at one of them, and is reported as a mismatch.
pub fn classify_grid(g: &GridFunction, tol: f64) -> Result<ClassificationReport> {
    check_tol(tol)?;
    check_grid_size(g.len())?;
    let mut excluded: BTreeMap<usize, NodeVerdict> = BTreeMap::new();
    let mut reports = Vec::new();
    for _pass in 0..3 {
        reports = (0..g.len())
            .into_par_iter()
            .map(|i| classify_grid_node(g, i, &excluded, tol))
            .collect::<Vec<_>>();
        let flagged: BTreeMap<usize, NodeVerdict> = reports
            .iter()
            .enumerate()
            .filter(|(_, r)| r.verdict.is_mismatch())
            .map(|(i, r)| (i, r.verdict))
            .collect();
        if flagged == excluded {
            break;
        }
        excluded = flagged;
    }
    let params = BTreeMap::from([
        ("method".to_string(), json!("grid")),
        ("n_grid".to_string(), json!(g.len())),
        ("stencil".to_string(), json!(STENCIL)),
        ("tol".to_string(), json!(tol)),
    ]);
    Ok(ClassificationReport::new(params, reports))
}

const STENCIL: usize = 4;

/// Lateral limit at node `i` from the side `dir` (+1 or -1), with the last
/// extrapolation correction as its uncertainty.
fn one_sided(g: &GridFunction, i: usize, dir: i64, excluded: &BTreeMap<usize, NodeVerdict>) -> Option<(f64, f64)> {
    let n = g.len() as i64;
    let h = g.spacing();
    let t = g.theta(i);
    let mut steps = Vec::new();
    let mut values = Vec::new();
    for m in 1..=(2 * STENCIL as i64) {
        let reach = m as f64 * h;
        // stop at (and do not use) a node on or beyond a singular point
        let blocked = g.singular_points().iter().any(|p| {
            let d = dir as f64 * circle_offset(t, p.theta);
            d > 0.0 && d <= reach * (1.0 + 1e-12)
        });
        if blocked {
            break;
        }
        let j = (i as i64 + dir * m).rem_euclid(n) as usize;
        if !g.is_defined(j) {
            break;
        }
        // a spike is stepped over; a jump ends the piece
        match excluded.get(&j) {
            Some(NodeVerdict::SpikeMismatch) => continue,
            Some(_) => break,
            None => {}
        }
        steps.push(reach);
        values.push(g.value(j));
        if steps.len() == STENCIL {
            break;
        }
    }
    if steps.is_empty() {
        return None;
    }
    steps.reverse();
    values.reverse();
    let ex = extrapolate_to_zero(&steps, &values, ErrorModel::Full);
    Some((ex.value, ex.residual))
}

/// Margin applied to the reconstruction uncertainty before a difference
/// counts as a mismatch.
const UNCERTAINTY_FACTOR: f64 = 4.0;

fn classify_grid_node(g: &GridFunction, i: usize, excluded: &BTreeMap<usize, NodeVerdict>, tol: f64) -> NodeReport {
    let t = g.theta(i);
    let blocked = g
        .singular_points()
        .iter()
        .any(|p| p.kind != SingularKind::Integrable && circle_offset(p.theta, t).abs() <= 1e-12);
    if !g.is_defined(i) || blocked {
        return NodeReport::undefined(t);
    }
    let v = g.value(i);
    let (left, right) = (one_sided(g, i, -1, excluded), one_sided(g, i, 1, excluded));
    let (limit, uncertainty) = match (left, right) {
        (Some(l), Some(r)) => (0.5 * (l.0 + r.0), l.1.max(r.1)),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => return NodeReport::undefined(t),
    };
    // sampled data cannot resolve differences below its own reconstruction error
    let threshold = tol + UNCERTAINTY_FACTOR * uncertainty;
    let diff = (v - limit).abs();
    let verdict = if diff <= threshold {
        NodeVerdict::Recovered
    } else {
        match (left, right) {
            (Some(l), Some(r)) if (r.0 - l.0).abs() > threshold => NodeVerdict::JumpMidpointMismatch,
            _ => NodeVerdict::SpikeMismatch,
        }
    };
    NodeReport {
        theta: t,
        verdict,
        value: Some(limit),
        residual: Some(diff),
    }
}

/// Combs sampled data: mismatched nodes take their recovered value, the
/// others keep theirs, undefined verdicts become undefined nodes.
pub fn comb_grid(g: &GridFunction, tol: f64) -> Result<GridFunction> {
    let report = classify_grid(g, tol)?;
    let values: Vec<Option<f64>> = report
        .nodes
        .iter()
        .enumerate()
        .map(|(i, r)| match r.verdict {
            NodeVerdict::Recovered => Some(g.value(i)),
            NodeVerdict::Undefined => None,
            _ => r.value,
        })
        .collect();
    let defined: Vec<bool> = values.iter().map(Option::is_some).collect();
    Ok(g
        .with_values(values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect(), defined)
        .with_note("combed by local filter limit"))
}
