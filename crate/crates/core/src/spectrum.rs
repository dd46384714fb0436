//! Taylor-Fourier coefficient sequences and the operators acting on them.
//!
//! A sequence stores the mean `a0` and the pairs `(a_k, b_k)` for
//! `k = 1..=n`, representing `a0 + sum_k [a_k cos(k t) + b_k sin(k t)]`.
//! The complex view is `c_k = a_k - i b_k`, the Taylor coefficients of the
//! inner analytic function `w(z) = sum_k c_k z^k`; `a0` is kept outside `w`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::function::EvaluatorFunction;
use crate::quad;

/// Truncation used when none is given.
pub const DEFAULT_N: usize = 256;
/// Coefficient quadrature tolerance used when none is given.
pub const DEFAULT_COEFFICIENT_TOL: f64 = 1e-10;

/// Names a closed-form coefficient generator so a sequence can be rebuilt
/// at any truncation: either a catalog entry or an operator applied to
/// another tag (`lowpass`, `derivative`, `conjugate`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorTag {
    pub name: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl GeneratorTag {
    pub fn new(name: impl Into<String>, params: Map<String, Value>) -> Self {
        GeneratorTag {
            name: name.into(),
            params,
        }
    }

    fn wrap(name: &str, extra: &[(&str, Value)], of: &GeneratorTag) -> GeneratorTag {
        let mut params = Map::new();
        for (k, v) in extra {
            params.insert((*k).to_string(), v.clone());
        }
        params.insert(
            "of".to_string(),
            serde_json::to_value(of).expect("tags serialize"),
        );
        GeneratorTag::new(name, params)
    }

    /// The nested tag of an operator tag.
    pub fn inner(&self) -> Option<GeneratorTag> {
        self.params
            .get("of")
            .and_then(|v| serde_json::from_value(v.clone()).ok())
    }
}

/// Coefficients `a0`, `(a_k, b_k)` for `k = 1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    a0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    generator: Option<GeneratorTag>,
}

impl CoefficientSequence {
    /// Builds a sequence from dense cosine and sine coefficients, index 0
    /// holding `k = 1`.
    pub fn new(a0: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::domain(format!(
                "cosine and sine coefficient counts differ ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        if !a0.is_finite() || a.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::domain("coefficients must be finite"));
        }
        Ok(CoefficientSequence {
            a0,
            a,
            b,
            generator: None,
        })
    }

    /// A pure mean with `n` zero terms.
    pub fn constant(a0: f64, n: usize) -> Self {
        CoefficientSequence {
            a0,
            a: vec![0.0; n],
            b: vec![0.0; n],
            generator: None,
        }
    }

    /// From complex Taylor coefficients `c_k = a_k - i b_k` (index 0 is `k = 1`).
    pub fn from_complex(a0: f64, c: &[Complex64]) -> Result<Self> {
        Self::new(a0, c.iter().map(|c| c.re).collect(), c.iter().map(|c| -c.im).collect())
    }

    pub fn with_generator(mut self, tag: GeneratorTag) -> Self {
        self.generator = Some(tag);
        self
    }

    pub fn without_generator(mut self) -> Self {
        self.generator = None;
        self
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// Truncation order.
    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// `a_k` for `k >= 1` (zero beyond the truncation).
    pub fn a(&self, k: usize) -> f64 {
        assert!(k >= 1, "k starts at 1");
        self.a.get(k - 1).copied().unwrap_or(0.0)
    }

    /// `b_k` for `k >= 1` (zero beyond the truncation).
    pub fn b(&self, k: usize) -> f64 {
        assert!(k >= 1, "k starts at 1");
        self.b.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn cosines(&self) -> &[f64] {
        &self.a
    }

    pub fn sines(&self) -> &[f64] {
        &self.b
    }

    pub fn generator(&self) -> Option<&GeneratorTag> {
        self.generator.as_ref()
    }

    /// `c_k = a_k - i b_k`, index 0 holding `k = 1`.
    pub fn complex(&self) -> Vec<Complex64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(&a, &b)| Complex64::new(a, -b))
            .collect()
    }

    /// Applies `f(k, a_k, b_k) -> (a_k', b_k')` termwise.
    pub(crate) fn map_terms(&self, a0: f64, f: impl Fn(usize, f64, f64) -> (f64, f64)) -> Self {
        let (a, b) = self
            .a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(i, (&a, &b))| f(i + 1, a, b))
            .unzip();
        CoefficientSequence {
            a0,
            a,
            b,
            generator: None,
        }
    }

    /// Term-wise sum; the generator tag is dropped.
    pub fn add(&self, other: &CoefficientSequence) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::domain("cannot add sequences of different truncation"));
        }
        Ok(CoefficientSequence {
            a0: self.a0 + other.a0,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
            b: self.b.iter().zip(&other.b).map(|(x, y)| x + y).collect(),
            generator: None,
        })
    }

    /// Real scaling; the generator tag is dropped.
    pub fn scale(&self, s: f64) -> Self {
        self.map_terms(self.a0 * s, |_, a, b| (a * s, b * s))
    }

    /// Truncates to (or zero-pads up to) `m` terms.
    pub fn resized(&self, m: usize) -> Self {
        let mut out = self.clone();
        out.a.resize(m, 0.0);
        out.b.resize(m, 0.0);
        out
    }

    /// Largest absolute term-wise difference, including `a0`.
    pub fn max_abs_diff(&self, other: &CoefficientSequence) -> f64 {
        let n = self.n().max(other.n());
        let mut d = (self.a0 - other.a0).abs();
        for k in 1..=n {
            d = d.max((self.a(k) - other.a(k)).abs());
            d = d.max((self.b(k) - other.b(k)).abs());
        }
        d
    }
}

/// Panel and tolerance settings for coefficient quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub panels_per_interval: usize,
    pub tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            panels_per_interval: 1,
            tol: DEFAULT_COEFFICIENT_TOL,
        }
    }
}

/// Computed coefficients together with the quadrature error estimate (the
/// largest change of any coefficient under the last panel doubling).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub coefficients: CoefficientSequence,
    pub error_estimate: f64,
}

/// Fourier coefficients of `f` up to order `n` by composite Gauss-Legendre
/// quadrature with panel boundaries at every singular point.
///
/// The initial panel count is raised so that the highest harmonic is
/// resolved on the first level; refinement doubles it.
pub fn compute_coefficients(
    f: &EvaluatorFunction,
    n: usize,
    opts: &QuadratureOptions,
) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::domain("truncation n must be at least 1"));
    }
    if let Some(p) = f
        .singular_points()
        .iter()
        .find(|p| p.kind == crate::function::SingularKind::NonIntegrable)
    {
        return Err(Error::NonIntegrableInput { theta: p.theta });
    }
    let mut breaks = vec![-PI];
    breaks.extend(
        f.singular_points()
            .iter()
            .map(|p| p.theta)
            .filter(|&t| t > -PI && t < PI),
    );
    breaks.push(PI);
    let longest = breaks.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let resolve = (n as f64 * longest / 8.0).ceil() as usize;
    let initial = opts.panels_per_interval.max(resolve).max(1);

    let mut undefined_at = None;
    let result = quad::refine(
        initial,
        opts.tol,
        quad::MAX_DOUBLINGS,
        |panels| {
            let pts = quad::composite_points(&breaks, panels);
            let samples: Vec<(f64, f64)> = pts
                .iter()
                .map(|&(x, w)| (x, w * f.regular(x)))
                .collect();
            if let Some(&(x, _)) = samples.iter().find(|(_, v)| !v.is_finite()) {
                undefined_at.get_or_insert(x);
                return None;
            }
            Some(project(&samples, n))
        },
        |c, f| match (c, f) {
            (Some(c), Some(f)) => c.max_abs_diff(f),
            _ => f64::NAN,
        },
    );
    if let Some(theta) = undefined_at {
        return Err(Error::UndefinedHere {
            theta,
            reason: "integrand is not finite at a quadrature node".into(),
        });
    }
    let (coefficients, error_estimate) = result?;
    Ok(Spectrum {
        coefficients: coefficients.expect("finite level"),
        error_estimate,
    })
}

/// Projects weighted samples `(x, w f(x))` onto the trigonometric basis.
fn project(samples: &[(f64, f64)], n: usize) -> CoefficientSequence {
    const CHUNK: usize = 2048;
    // fixed chunking keeps the summation order independent of thread count
    let partials: Vec<(f64, Vec<f64>, Vec<f64>)> = samples
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            let mut mean = 0.0;
            for &(x, fw) in chunk {
                mean += fw;
                let (s1, c1) = x.sin_cos();
                let (mut s, mut c) = (s1, c1);
                for k in 1..=n {
                    if k % 64 == 0 {
                        let (sk, ck) = (k as f64 * x).sin_cos();
                        s = sk;
                        c = ck;
                    }
                    a[k - 1] += fw * c;
                    b[k - 1] += fw * s;
                    let next_c = c * c1 - s * s1;
                    s = s * c1 + c * s1;
                    c = next_c;
                }
            }
            (mean, a, b)
        })
        .collect();
    let mut mean = 0.0;
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for (m, pa, pb) in partials {
        mean += m;
        for k in 0..n {
            a[k] += pa[k];
            b[k] += pb[k];
        }
    }
    CoefficientSequence {
        a0: mean / (2.0 * PI),
        a: a.into_iter().map(|x| x / PI).collect(),
        b: b.into_iter().map(|x| x / PI).collect(),
        generator: None,
    }
}

/// Generalized angular derivative of the given order: `c_k -> (i k)^order c_k`,
/// applied one order at a time as `a_k' = k b_k`, `b_k' = -k a_k`.
pub fn angular_derivative(c: &CoefficientSequence, order: u32) -> CoefficientSequence {
    if order == 0 {
        return c.clone();
    }
    let mut out = c.clone();
    for _ in 0..order {
        out = out.map_terms(0.0, |k, a, b| {
            let k = k as f64;
            (k * b, -k * a)
        });
    }
    out.generator = c.generator.as_ref().map(|tag| {
        if tag.name == "derivative" {
            let prev = tag.params.get("order").and_then(Value::as_u64).unwrap_or(0);
            let mut merged = tag.clone();
            merged
                .params
                .insert("order".into(), Value::from(prev + order as u64));
            merged
        } else {
            GeneratorTag::wrap("derivative", &[("order", Value::from(order))], tag)
        }
    });
    out
}

/// Fourier conjugate: the imaginary boundary part of the same inner analytic
/// function, `a_k' = -b_k`, `b_k' = a_k`, `a0' = 0`.
pub fn fourier_conjugate(c: &CoefficientSequence) -> CoefficientSequence {
    let mut out = c.map_terms(0.0, |_, a, b| (-b, a));
    out.generator = c
        .generator
        .as_ref()
        .map(|tag| GeneratorTag::wrap("conjugate", &[], tag));
    out
}

/// `a0 + sum_{k <= m} [a_k cos(k theta) + b_k sin(k theta)]`.
pub fn partial_sum_eval(c: &CoefficientSequence, theta: f64, m: usize) -> Result<f64> {
    if m > c.n() {
        return Err(Error::domain(format!(
            "partial sum order {m} exceeds truncation {}",
            c.n()
        )));
    }
    Ok(partial_sums(c, theta, m).last().copied().unwrap_or(c.a0))
}

/// All partial sums `S_0, S_1, ..., S_m` at `theta`.
pub fn partial_sums(c: &CoefficientSequence, theta: f64, m: usize) -> Vec<f64> {
    let m = m.min(c.n());
    let mut out = Vec::with_capacity(m + 1);
    let mut s = c.a0;
    out.push(s);
    for k in 1..=m {
        let (sn, cs) = (k as f64 * theta).sin_cos();
        s += c.a[k - 1] * cs + c.b[k - 1] * sn;
        out.push(s);
    }
    out
}

#[derive(Serialize, Deserialize)]
struct Term {
    k: usize,
    a: f64,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct CoefficientDocument {
    a0: f64,
    n: usize,
    terms: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<GeneratorTag>,
}

impl Serialize for CoefficientSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CoefficientDocument {
            a0: self.a0,
            n: self.n(),
            terms: self
                .a
                .iter()
                .zip(&self.b)
                .enumerate()
                .map(|(i, (&a, &b))| Term { k: i + 1, a, b })
                .collect(),
            generator: self.generator.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoefficientSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = CoefficientDocument::deserialize(d)?;
        if doc.terms.len() != doc.n {
            return Err(D::Error::custom(format!(
                "expected {} terms, found {}",
                doc.n,
                doc.terms.len()
            )));
        }
        for (i, t) in doc.terms.iter().enumerate() {
            if t.k != i + 1 {
                return Err(D::Error::custom(format!(
                    "terms must run k = 1..{} without gaps; found k = {} at position {}",
                    doc.n,
                    t.k,
                    i + 1
                )));
            }
        }
        let seq = CoefficientSequence::new(
            doc.a0,
            doc.terms.iter().map(|t| t.a).collect(),
            doc.terms.iter().map(|t| t.b).collect(),
        )
        .map_err(D::Error::custom)?;
        Ok(match doc.generator {
            Some(tag) => seq.with_generator(tag),
            None => seq,
        })
    }
}
