//! Inner analytic functions `w(z) = sum_{k>=1} c_k z^k` on the open unit
//! disk: evaluation, the logarithmic derivative and primitive, the complex
//! low-pass filter, and `rho -> 1` boundary values.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use crate::catalog;
use crate::error::{Error, Result};
use crate::extrapolate::{extrapolate_to_zero, ErrorModel};
use crate::realfilter::{check_eps, multiplier};
use crate::spectrum::{CoefficientSequence, GeneratorTag};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Tail tolerance used by [`InnerAnalyticFunction::eval`].
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
/// Default first radius offset of a boundary-value schedule.
pub const DEFAULT_DELTA0: f64 = 1e-2;
/// Largest truncation used when regenerating a series for small `delta`.
pub const MAX_REGENERATED_N: usize = 1 << 18;
/// `rho^N` falls below double precision once `N delta` exceeds this.
const SERIES_REACH: f64 = 36.8;

/// `z = rho e^{i theta}` with `0 <= rho < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskPoint {
    rho: f64,
    theta: f64,
}

impl DiskPoint {
    pub fn new(rho: f64, theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::domain(format!("rho must lie in [0, 1), got {rho}")));
        }
        if !theta.is_finite() {
            return Err(Error::domain("theta must be finite"));
        }
        Ok(DiskPoint { rho, theta })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn z(&self) -> Complex64 {
        Complex64::from_polar(self.rho, self.theta)
    }
}

/// A truncated Taylor series without constant term.
///
/// The logarithmic derivative and primitive are kept as a pending power of
/// `k` over the base coefficients, so that applying one after the other
/// returns the original coefficients bit for bit.
#[derive(Debug, Clone)]
pub struct InnerAnalyticFunction {
    base: Arc<[Complex64]>,
    log_power: i32,
    generator: Option<GeneratorTag>,
    materialized: OnceLock<Arc<[Complex64]>>,
}

impl PartialEq for InnerAnalyticFunction {
    fn eq(&self, other: &Self) -> bool {
        self.coefficients() == other.coefficients()
    }
}

impl InnerAnalyticFunction {
    /// `c_k` for `k = 1..=N`, index 0 holding `k = 1`.
    pub fn from_complex(c: Vec<Complex64>) -> Self {
        InnerAnalyticFunction {
            base: c.into(),
            log_power: 0,
            generator: None,
            materialized: OnceLock::new(),
        }
    }

    /// The inner analytic function of a coefficient sequence (`a0` is not
    /// part of it).
    pub fn from_sequence(c: &CoefficientSequence) -> Self {
        let mut w = Self::from_complex(c.complex());
        w.generator = c.generator().cloned();
        w
    }

    /// Back to real coefficients, with the given mean.
    pub fn to_sequence(&self, a0: f64) -> Result<CoefficientSequence> {
        let seq = CoefficientSequence::from_complex(a0, self.coefficients())?;
        Ok(match self.tag() {
            Some(tag) => seq.with_generator(tag.clone()),
            None => seq,
        })
    }

    fn derived(&self, base: Arc<[Complex64]>, log_power: i32, generator: Option<GeneratorTag>) -> Self {
        InnerAnalyticFunction {
            base,
            log_power,
            generator,
            materialized: OnceLock::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    /// Generator tag, when the coefficients are exactly those of the tag.
    pub fn tag(&self) -> Option<&GeneratorTag> {
        if self.log_power == 0 {
            self.generator.as_ref()
        } else {
            None
        }
    }

    /// The coefficients `c_k`, index 0 holding `k = 1`.
    pub fn coefficients(&self) -> &[Complex64] {
        if self.log_power == 0 {
            return &self.base;
        }
        self.materialized.get_or_init(|| {
            let p = self.log_power;
            self.base
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    let k = (i + 1) as f64;
                    let mut v = c;
                    for _ in 0..p.unsigned_abs() {
                        v = if p > 0 { v * k } else { v / k };
                    }
                    v
                })
                .collect()
        })
    }

    /// `w(z)` by Horner's rule, with no domain check.
    pub fn eval_polynomial(&self, z: Complex64) -> Complex64 {
        let c = self.coefficients();
        let mut acc = Complex64::new(0.0, 0.0);
        for &ck in c.iter().rev() {
            acc = acc * z + ck;
        }
        acc * z
    }

    /// `w(p)`; exactly zero at the center.
    pub fn eval(&self, p: DiskPoint) -> Complex64 {
        self.eval_with_tail_tol(p, DEFAULT_TAIL_TOL)
    }

    /// As [`eval`](Self::eval), warning when the truncation tail bound
    /// `|c_N| rho^N / (1 - rho)` exceeds `tol`.
    pub fn eval_with_tail_tol(&self, p: DiskPoint, tol: f64) -> Complex64 {
        if p.rho == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if let Some(last) = self.coefficients().last() {
            let tail = last.norm() * p.rho.powi(self.n() as i32) / (1.0 - p.rho);
            if tail > tol {
                log::warn!(
                    "series truncated at N = {} may be inaccurate at rho = {}: tail bound {tail:e}",
                    self.n(),
                    p.rho
                );
            }
        }
        self.eval_polynomial(p.z())
    }

    /// Evaluates at `(rho, theta)`, rejecting `rho` outside `[0, 1)`.
    pub fn eval_at(&self, rho: f64, theta: f64) -> Result<Complex64> {
        Ok(self.eval(DiskPoint::new(rho, theta)?))
    }
}

/// `z w'(z)`: `c_k -> k c_k`.
pub fn log_derivative(w: &InnerAnalyticFunction) -> InnerAnalyticFunction {
    w.derived(w.base.clone(), w.log_power + 1, None)
}

/// Inverse of [`log_derivative`]: `c_k -> c_k / k`.
pub fn log_primitive(w: &InnerAnalyticFunction) -> InnerAnalyticFunction {
    w.derived(w.base.clone(), w.log_power - 1, None)
}

/// `w_eps`, with coefficients `c_k sin(k eps) / (k eps)`.
pub fn complex_filter(w: &InnerAnalyticFunction, eps: f64) -> Result<InnerAnalyticFunction> {
    check_eps(eps)?;
    let base: Arc<[Complex64]> = w
        .base
        .iter()
        .enumerate()
        .map(|(i, &c)| c * multiplier(i + 1, eps))
        .collect();
    let generator = w.tag().map(|tag| {
        let mut params = serde_json::Map::new();
        params.insert("eps".into(), eps.into());
        params.insert("of".into(), serde_json::to_value(tag).expect("tags serialize"));
        GeneratorTag::new("lowpass", params)
    });
    Ok(w.derived(base, w.log_power, generator))
}

/// `w_eps(z) = -(i / 2 eps) [W(z e^{i eps}) - W(z e^{-i eps})]` with `W` the
/// logarithmic primitive of `w`, evaluated directly. Valid on the closed disk
/// for truncated series.
pub fn arc_filter_eval(w: &InnerAnalyticFunction, z: Complex64, eps: f64) -> Result<Complex64> {
    check_eps(eps)?;
    let big_w = log_primitive(w);
    let turn = Complex64::from_polar(1.0, eps);
    let diff = big_w.eval_polynomial(z * turn) - big_w.eval_polynomial(z * turn.conj());
    Ok(-I / (2.0 * eps) * diff)
}

type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Closed forms of `w` and, when known, of its logarithmic primitive.
#[derive(Clone)]
pub struct ClosedForm {
    w: ComplexFn,
    primitive: Option<ComplexFn>,
}

impl std::fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClosedForm")
            .field("has_primitive", &self.primitive.is_some())
            .finish()
    }
}

impl ClosedForm {
    fn new(w: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        ClosedForm {
            w: Arc::new(w),
            primitive: None,
        }
    }

    fn with_primitive(mut self, p: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.primitive = Some(Arc::new(p));
        self
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.w)(z)
    }

    pub fn eval_primitive(&self, z: Complex64) -> Option<Complex64> {
        self.primitive.as_ref().map(|p| p(z))
    }

    fn times(self, s: Complex64) -> Self {
        let w = self.w;
        let p = self.primitive;
        ClosedForm {
            w: Arc::new(move |z| s * w(z)),
            primitive: p.map(|p| Arc::new(move |z| s * p(z)) as ComplexFn),
        }
    }
}

/// Eulerian polynomial coefficients `A(n, m)`, `m = 0..n` (`A_0 = 1`).
fn eulerian(n: u32) -> Vec<f64> {
    let mut row = vec![1.0];
    for j in 1..=n {
        let mut next = vec![0.0; j as usize];
        for m in 0..j as usize {
            let keep = if m < row.len() { (m + 1) as f64 * row[m] } else { 0.0 };
            let shift = if m >= 1 && m - 1 < row.len() {
                (j as usize - m) as f64 * row[m - 1]
            } else {
                0.0
            };
            next[m] = keep + shift;
        }
        row = next;
    }
    row
}

/// `sum_{k>=1} k^n u^k = u A_n(u) / (1 - u)^{n+1}`.
fn power_series_sum(n: u32, u: Complex64) -> Complex64 {
    let coeffs = eulerian(n);
    let mut poly = Complex64::new(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        poly = poly * u + a;
    }
    u * poly / (Complex64::new(1.0, 0.0) - u).powu(n + 1)
}

fn delta_derivative_form(theta0: f64, n: u32) -> ClosedForm {
    let rot = Complex64::from_polar(1.0, -theta0);
    let scale = I.powu(n) / PI;
    let form = ClosedForm::new(move |z| scale * power_series_sum(n, z * rot));
    if n == 0 {
        form.with_primitive(move |z| -(Complex64::new(1.0, 0.0) - z * rot).ln() / PI)
    } else {
        form.with_primitive(move |z| scale * power_series_sum(n - 1, z * rot))
    }
}

fn param(tag: &GeneratorTag, key: &str) -> Option<f64> {
    tag.params.get(key).and_then(serde_json::Value::as_f64)
}

/// Closed form of the inner analytic function named by a generator tag.
pub fn closed_form(tag: &GeneratorTag) -> Option<ClosedForm> {
    let one = Complex64::new(1.0, 0.0);
    match tag.name.as_str() {
        "constant" => Some(ClosedForm::new(|_| Complex64::new(0.0, 0.0)).with_primitive(|_| Complex64::new(0.0, 0.0))),
        "cosine" => {
            let k = param(tag, "k")? as u32;
            Some(ClosedForm::new(move |z| z.powu(k)).with_primitive(move |z| z.powu(k) / k as f64))
        }
        "delta" => Some(delta_derivative_form(param(tag, "theta0")?, 0)),
        "delta_derivative" => Some(delta_derivative_form(param(tag, "theta0")?, param(tag, "n")? as u32)),
        "conjugate_delta" => Some(delta_derivative_form(param(tag, "theta0")?, 0).times(-I)),
        "step" | "square_wave" => {
            let (theta0, left, right) = if tag.name == "step" {
                (param(tag, "theta0")?, param(tag, "left")?, param(tag, "right")?)
            } else {
                (0.0, -1.0, 1.0)
            };
            let rot = Complex64::from_polar(1.0, -theta0);
            let s = I * (right - left) / PI;
            Some(ClosedForm::new(move |z| s * ((one - z * rot).ln() - (one + z).ln())))
        }
        "sawtooth" => Some(ClosedForm::new(move |z| -2.0 * I * (one + z).ln())),
        "spiked" => closed_form(&serde_json::from_value(tag.params.get("base")?.clone()).ok()?),
        "conjugate" => Some(closed_form(&tag.inner()?)?.times(-I)),
        "lowpass" => {
            let eps = param(tag, "eps")?;
            let inner = closed_form(&tag.inner()?)?;
            let big_w = inner.primitive?;
            let turn = Complex64::from_polar(1.0, eps);
            Some(ClosedForm::new(move |z| -I / (2.0 * eps) * (big_w(z * turn) - big_w(z * turn.conj()))))
        }
        "derivative" => {
            let order = tag.params.get("order")?.as_u64()? as u32;
            let inner = tag.inner()?;
            match inner.name.as_str() {
                "delta" => Some(delta_derivative_form(param(&inner, "theta0")?, order)),
                "delta_derivative" => Some(delta_derivative_form(
                    param(&inner, "theta0")?,
                    param(&inner, "n")? as u32 + order,
                )),
                "conjugate_delta" => Some(delta_derivative_form(param(&inner, "theta0")?, order).times(-I)),
                "cosine" => {
                    let k = param(&inner, "k")? as u32;
                    let s = (I * k as f64).powu(order);
                    Some(ClosedForm::new(move |z| s * z.powu(k)).with_primitive(move |z| s * z.powu(k) / k as f64))
                }
                "constant" => closed_form(&inner),
                _ => None,
            }
        }
        _ => None,
    }
}

/// How boundary values are computed for a coefficient sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySource {
    /// Closed form of the generator.
    ClosedForm,
    /// Series rebuilt from the generator at a truncation matched to `delta`.
    Regenerated,
    /// The stored truncated series.
    Stored,
}

enum Source {
    Closed(ClosedForm),
    Regenerated {
        tag: GeneratorTag,
        cache: Mutex<HashMap<usize, Arc<InnerAnalyticFunction>>>,
    },
    Stored(InnerAnalyticFunction),
}

/// Evaluates `a0 + Re w((1 - delta) e^{i theta})` for one coefficient
/// sequence, choosing the most accurate available representation.
pub struct BoundaryEvaluator {
    a0: f64,
    source: Source,
}

impl BoundaryEvaluator {
    pub fn new(c: &CoefficientSequence) -> Self {
        let source = match c.generator() {
            Some(tag) => match closed_form(tag) {
                Some(form) => Source::Closed(form),
                None if catalog::regenerate(tag, 1).is_ok() => Source::Regenerated {
                    tag: tag.clone(),
                    cache: Mutex::new(HashMap::new()),
                },
                None => Source::Stored(InnerAnalyticFunction::from_sequence(c)),
            },
            None => Source::Stored(InnerAnalyticFunction::from_sequence(c)),
        };
        BoundaryEvaluator { a0: c.a0(), source }
    }

    /// Uses the stored series even when a generator is available.
    pub fn stored(c: &CoefficientSequence) -> Self {
        BoundaryEvaluator {
            a0: c.a0(),
            source: Source::Stored(InnerAnalyticFunction::from_sequence(c)),
        }
    }

    pub fn source(&self) -> BoundarySource {
        match self.source {
            Source::Closed(_) => BoundarySource::ClosedForm,
            Source::Regenerated { .. } => BoundarySource::Regenerated,
            Source::Stored(_) => BoundarySource::Stored,
        }
    }

    /// Smallest `delta` the representation can resolve.
    pub fn min_delta(&self) -> f64 {
        match self.source {
            Source::Regenerated { .. } => SERIES_REACH / MAX_REGENERATED_N as f64,
            _ => 0.0,
        }
    }

    fn series_for(&self, delta: f64) -> Result<Arc<InnerAnalyticFunction>> {
        let Source::Regenerated { tag, cache } = &self.source else {
            unreachable!()
        };
        let wanted = (SERIES_REACH / delta).ceil() as usize;
        let n = wanted.next_power_of_two().clamp(64, MAX_REGENERATED_N);
        let mut guard = cache.lock().expect("cache lock");
        if let Some(w) = guard.get(&n) {
            return Ok(w.clone());
        }
        let w = Arc::new(InnerAnalyticFunction::from_sequence(&catalog::regenerate(tag, n)?));
        guard.insert(n, w.clone());
        Ok(w)
    }

    /// Complex value `a0 + w(rho e^{i theta})`.
    pub fn complex_at(&self, theta: f64, rho: f64) -> Result<Complex64> {
        let p = DiskPoint::new(rho, theta)?;
        let w = match &self.source {
            Source::Closed(form) => form.eval(p.z()),
            Source::Regenerated { .. } => self.series_for(1.0 - rho)?.eval(p),
            Source::Stored(w) => w.eval(p),
        };
        Ok(w + self.a0)
    }

    /// `a0 + Re w((1 - delta) e^{i theta})`.
    pub fn value_at(&self, theta: f64, delta: f64) -> Result<f64> {
        Ok(self.complex_at(theta, 1.0 - delta)?.re)
    }

    /// Boundary value along an explicit schedule.
    pub fn boundary_value(&self, theta: f64, deltas: &[f64]) -> Result<BoundaryValueReport> {
        check_deltas(deltas)?;
        let values = deltas
            .iter()
            .map(|&d| self.value_at(theta, d))
            .collect::<Result<Vec<_>>>()?;
        if diverges(deltas, &values) {
            return Err(Error::DivergenceDetected {
                theta,
                last: *values.last().expect("nonempty"),
            });
        }
        let (value, residual) = if deltas.len() == 1 {
            (values[0], 0.0)
        } else {
            let ex = extrapolate_to_zero(deltas, &values, ErrorModel::Full);
            (ex.value, ex.residual)
        };
        Ok(BoundaryValueReport {
            value,
            deltas: deltas.to_vec(),
            values,
            residual,
            source: self.source(),
        })
    }

    /// Boundary value with the schedule `delta0 / 8^j * {1, 1/2, 1/4, 1/8}`,
    /// refining `j` until the residual is within `tol * (1 + |value|)`.
    ///
    /// Growth of the per-radius values is only treated as divergence at the
    /// last level reached: near (but not at) a singular point the values
    /// first grow and then settle once `delta` is well below the distance.
    pub fn boundary_value_adaptive(&self, theta: f64, opts: &AdaptiveOptions) -> Result<BoundaryValueReport> {
        let mut last = None;
        for level in 0..=opts.max_refinements {
            let d0 = opts.delta0 / 8f64.powi(level as i32);
            if level > 0 && d0 / 8.0 < self.min_delta() {
                break;
            }
            let deltas = default_schedule(d0);
            let values = deltas
                .iter()
                .map(|&d| self.value_at(theta, d))
                .collect::<Result<Vec<_>>>()?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::DivergenceDetected {
                    theta,
                    last: *values.last().expect("nonempty"),
                });
            }
            let ex = extrapolate_to_zero(&deltas, &values, ErrorModel::Full);
            let report = BoundaryValueReport {
                value: ex.value,
                deltas,
                values,
                residual: ex.residual,
                source: self.source(),
            };
            if report.residual <= opts.tol * (1.0 + report.value.abs()) {
                return Ok(report);
            }
            last = Some(report);
        }
        let report = last.expect("at least one level");
        if diverges(&report.deltas, &report.values) {
            return Err(Error::DivergenceDetected {
                theta,
                last: *report.values.last().expect("nonempty"),
            });
        }
        Ok(report)
    }
}

/// Options for [`BoundaryEvaluator::boundary_value_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdaptiveOptions {
    pub delta0: f64,
    pub tol: f64,
    pub max_refinements: u32,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            delta0: DEFAULT_DELTA0,
            tol: 1e-10,
            max_refinements: 6,
        }
    }
}

/// `{delta0, delta0/2, delta0/4, delta0/8}`.
pub fn default_schedule(delta0: f64) -> Vec<f64> {
    vec![delta0, delta0 / 2.0, delta0 / 4.0, delta0 / 8.0]
}

fn check_deltas(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::domain("delta schedule is empty"));
    }
    if deltas.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
        return Err(Error::domain("delta schedule entries must lie in (0, 1)"));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("delta schedule must be strictly decreasing"));
    }
    Ok(())
}

/// Values that overflow, or grow monotonically like a negative power of
/// `delta` (slope of at least 0.9 on log-log axes), signal a singular
/// point of the boundary function.
fn diverges(deltas: &[f64], values: &[f64]) -> bool {
    if values.iter().any(|v| !v.is_finite()) {
        return true;
    }
    if values.len() < 2 {
        return false;
    }
    let mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    if mags.windows(2).any(|w| w[1] <= w[0]) {
        return false;
    }
    let n = mags.len();
    let slope = (mags[n - 1] / mags[n - 2]).ln() / (deltas[n - 2] / deltas[n - 1]).ln();
    slope >= 0.9 && mags[n - 1] > 1.0
}

/// The `rho -> 1` limit at one angle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryValueReport {
    pub value: f64,
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    /// Last extrapolation correction (zero for a single radius).
    pub residual: f64,
    pub source: BoundarySource,
}

/// `lim_{rho -> 1} a0 + Re w(rho e^{i theta})` by polynomial extrapolation
/// in `delta = 1 - rho` over the schedule.
pub fn boundary_value(c: &CoefficientSequence, theta: f64, deltas: &[f64]) -> Result<BoundaryValueReport> {
    BoundaryEvaluator::new(c).boundary_value(theta, deltas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make, make_default};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use serde_json::json;

    fn c(v: &[(f64, f64)]) -> InnerAnalyticFunction {
        InnerAnalyticFunction::from_complex(v.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    }

    fn params(v: serde_json::Value) -> serde_json::Map<String, serde_json::Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn eval_examples() {
        let z = c(&[(1.0, 0.0)]);
        assert_eq!(z.eval_at(0.5, 0.0).unwrap(), Complex64::new(0.5, 0.0));
        let any = c(&[(1.0, 2.0), (-3.0, 0.5), (0.25, 0.0)]);
        assert_eq!(any.eval_at(0.0, 1.234).unwrap(), Complex64::new(0.0, 0.0));
        assert!(any.eval_at(1.0, 0.0).is_err());
        assert!(any.eval_at(-0.1, 0.0).is_err());

        let delta = make("delta", &params(json!({"theta0": 0.0}))).unwrap().coefficients(256).unwrap();
        let w = InnerAnalyticFunction::from_sequence(&delta);
        let v = w.eval_at(0.9, PI).unwrap();
        assert_abs_diff_eq!(v.re, (1.0 / PI) * (-0.9 / 1.9), epsilon = 1e-10);
    }

    #[test]
    fn log_operator_examples() {
        let z = c(&[(1.0, 0.0)]);
        assert_eq!(log_derivative(&z), z);
        assert_eq!(log_primitive(&z), z);
        let z2 = c(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(log_derivative(&z2).coefficients()[1], Complex64::new(2.0, 0.0));
        let z3 = c(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(log_primitive(&z3).coefficients()[2], Complex64::new(1.0 / 3.0, 0.0));
        let n = 50;
        let log_series = InnerAnalyticFunction::from_complex((1..=n).map(|k| Complex64::new(1.0 / k as f64, 0.0)).collect());
        for ck in log_derivative(&log_series).coefficients() {
            assert_abs_diff_eq!(ck.re, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn complex_filter_examples() {
        let z = c(&[(1.0, 0.0)]);
        let f = complex_filter(&z, PI / 2.0).unwrap();
        assert_abs_diff_eq!(f.coefficients()[0].re, 2.0 / PI, epsilon = 1e-16);
        let arc = arc_filter_eval(&z, Complex64::new(0.3, 0.4), PI / 2.0).unwrap();
        assert_abs_diff_eq!((arc - Complex64::new(0.3, 0.4) * (2.0 / PI)).norm(), 0.0, epsilon = 1e-15);
        let z2 = c(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_abs_diff_eq!(complex_filter(&z2, PI / 2.0).unwrap().coefficients()[1].norm(), 0.0, epsilon = 1e-16);
        assert_eq!(arc_filter_eval(&z2, Complex64::new(0.0, 0.0), 0.3).unwrap(), Complex64::new(0.0, 0.0));
        assert!(complex_filter(&z, 0.0).is_err());
        assert!(complex_filter(&z, 4.0).is_err());
    }

    #[test]
    fn eulerian_sums() {
        let u = Complex64::new(0.3, -0.2);
        for n in 0..=8u32 {
            let series: Complex64 = (1..400).map(|k| u.powu(k) * (k as f64).powi(n as i32)).sum();
            assert!((power_series_sum(n, u) - series).norm() < 1e-10 * series.norm().max(1.0), "n = {n}");
        }
    }

    #[test]
    fn closed_forms_match_series() {
        let entries = [
            make("cosine", &params(json!({"k": 3}))).unwrap(),
            make("delta", &params(json!({"theta0": 0.4}))).unwrap(),
            make("delta_derivative", &params(json!({"theta0": -1.0, "n": 3}))).unwrap(),
            make("conjugate_delta", &params(json!({"theta0": 2.0}))).unwrap(),
            make("step", &params(json!({"theta0": 0.5, "left": -2.0, "right": 1.0}))).unwrap(),
            make_default("square_wave").unwrap(),
            make_default("sawtooth").unwrap(),
        ];
        for e in &entries {
            let seq = e.coefficients(2000).unwrap();
            let form = closed_form(seq.generator().unwrap()).unwrap();
            let w = InnerAnalyticFunction::from_sequence(&seq);
            for (rho, theta) in [(0.5, 0.3), (0.8, -2.0), (0.9, 3.0)] {
                let z = Complex64::from_polar(rho, theta);
                let a = form.eval(z);
                let b = w.eval_polynomial(z);
                assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()), "{}: {a} vs {b}", e.name());
                if let Some(p) = form.eval_primitive(z) {
                    let q = log_primitive(&w).eval_polynomial(z);
                    assert!((p - q).norm() < 1e-9 * (1.0 + q.norm()), "{} primitive", e.name());
                }
            }
        }
        // operator tags
        let d = make("delta", &params(json!({"theta0": 0.4}))).unwrap().coefficients(3000).unwrap();
        let ops = [
            crate::realfilter::multiplier_filter(&d, 0.3).unwrap(),
            crate::spectrum::angular_derivative(&d, 2),
            crate::spectrum::fourier_conjugate(&d),
        ];
        for seq in &ops {
            let form = closed_form(seq.generator().unwrap()).unwrap();
            let w = InnerAnalyticFunction::from_sequence(seq);
            let z = Complex64::from_polar(0.85, 1.1);
            assert!((form.eval(z) - w.eval_polynomial(z)).norm() < 1e-9);
        }
    }

    #[test]
    fn boundary_value_examples() {
        let cos = make_default("cosine").unwrap().coefficients(8).unwrap().without_generator();
        let r = boundary_value(&cos, PI / 3.0, &default_schedule(1e-2)).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-8);
        assert_eq!(r.source, BoundarySource::Stored);

        let delta = make("delta", &params(json!({"theta0": 0.0}))).unwrap().coefficients(256).unwrap();
        let r = boundary_value(&delta, PI, &default_schedule(1e-2)).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-8);
        assert_eq!(r.source, BoundarySource::ClosedForm);
        assert!(matches!(
            boundary_value(&delta, 0.0, &default_schedule(1e-2)),
            Err(Error::DivergenceDetected { .. })
        ));

        let sq = make_default("square_wave").unwrap().coefficients(256).unwrap();
        let r = boundary_value(&sq, 0.0, &default_schedule(1e-2)).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-12);
        // the stored series alone gives the same midpoint
        let r = BoundaryEvaluator::stored(&sq).boundary_value(0.0, &default_schedule(1e-2)).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-12);

        assert!(boundary_value(&sq, 0.0, &[]).is_err());
        assert!(boundary_value(&sq, 0.0, &[0.1, 0.2]).is_err());
        assert!(boundary_value(&sq, 0.0, &[1.5]).is_err());
    }

    #[test]
    fn regenerated_series_reach_small_delta() {
        let tri = make_default("triangle_wave").unwrap().coefficients(64).unwrap();
        let ev = BoundaryEvaluator::new(&tri);
        assert_eq!(ev.source(), BoundarySource::Regenerated);
        let r = ev.boundary_value_adaptive(1.0, &AdaptiveOptions::default()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0 - 2.0 / PI, epsilon = 1e-8);
    }

    #[test]
    fn adaptive_boundary_value_near_a_spike() {
        let delta = make("delta", &params(json!({"theta0": 0.0}))).unwrap().coefficients(16).unwrap();
        let ev = BoundaryEvaluator::new(&delta);
        let r = ev.boundary_value_adaptive(0.02, &AdaptiveOptions::default()).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-8);
        assert!(matches!(
            ev.boundary_value_adaptive(0.0, &AdaptiveOptions::default()),
            Err(Error::DivergenceDetected { .. })
        ));
    }

    fn arb_w(n: usize) -> impl Strategy<Value = InnerAnalyticFunction> {
        proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=n)
            .prop_map(|v| InnerAnalyticFunction::from_complex(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn multiplier_and_arc_forms_agree(w in arb_w(40), rho in 0.0..0.95f64, theta in -PI..PI, eps in 1e-3..PI) {
            let z = Complex64::from_polar(rho, theta);
            let mult = complex_filter(&w, eps).unwrap().eval_polynomial(z);
            let arc = arc_filter_eval(&w, z, eps).unwrap();
            prop_assert!((mult - arc).norm() <= 1e-12 * (1.0 + mult.norm()));
        }

        #[test]
        fn log_operators_are_inverse(w in arb_w(64)) {
            let there = log_derivative(&log_primitive(&w));
            let back = log_primitive(&log_derivative(&w));
            prop_assert_eq!(there.coefficients(), w.coefficients());
            prop_assert_eq!(back.coefficients(), w.coefficients());
        }

        #[test]
        fn filter_commutes_with_log_derivative(w in arb_w(32), eps in 1e-3..PI) {
            let a = log_derivative(&complex_filter(&w, eps).unwrap());
            let b = complex_filter(&log_derivative(&w), eps).unwrap();
            prop_assert_eq!(a.coefficients(), b.coefficients());
        }

        #[test]
        fn filter_is_linear(x in arb_w(16), s in -2.0..2.0f64, eps in 1e-3..PI) {
            let n = x.n();
            let y = InnerAnalyticFunction::from_complex(x.coefficients().iter().map(|c| c * Complex64::new(0.0, 1.0) + 0.5).collect());
            let comb = InnerAnalyticFunction::from_complex(
                x.coefficients().iter().zip(y.coefficients()).map(|(a, b)| a * s + b).collect());
            let lhs = complex_filter(&comb, eps).unwrap();
            let fx = complex_filter(&x, eps).unwrap();
            let fy = complex_filter(&y, eps).unwrap();
            for k in 0..n {
                let rhs = fx.coefficients()[k] * s + fy.coefficients()[k];
                prop_assert!((lhs.coefficients()[k] - rhs).norm() <= 1e-14 * (1.0 + rhs.norm()));
            }
        }

        #[test]
        fn center_value_is_zero(w in arb_w(20), theta in -PI..PI) {
            prop_assert_eq!(w.eval(DiskPoint::new(0.0, theta).unwrap()), Complex64::new(0.0, 0.0));
        }

        #[test]
        fn disk_identity_order_two(w in arb_w(12), theta in -PI..PI) {
            // geometrically decaying coefficients, as for z / (2 - z)
            let w = InnerAnalyticFunction::from_complex(
                w.coefficients().iter().enumerate().map(|(i, c)| c * 0.5f64.powi(i as i32)).collect());
            let z = Complex64::from_polar(0.9, theta);
            let leading: Complex64 = w.coefficients().iter().enumerate()
                .map(|(i, c)| c * ((i + 1) as f64).powi(2) * z.powu(i as u32 + 1)).sum();
            prop_assume!(leading.norm() > 1e-2);
            let exact = w.eval_polynomial(z);
            let errs: Vec<f64> = [0.2, 0.1, 0.05, 0.025].iter()
                .map(|&e| (complex_filter(&w, e).unwrap().eval_polynomial(z) - exact).norm()).collect();
            let order = (errs[2] / errs[3]).log2();
            prop_assert!((order - 2.0).abs() < 0.1, "order {}", order);
        }
    }
}
