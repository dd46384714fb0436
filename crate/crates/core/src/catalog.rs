//! Built-in generalized functions with exact coefficients, evaluators,
//! declared singular points, known classification and exact filtered forms.
//!
//! Entries and parameters (defaults in brackets):
//!
//! | name               | params                                        |
//! |--------------------|-----------------------------------------------|
//! | `constant`         | `c` [1]                                       |
//! | `cosine`           | `k` [1]                                       |
//! | `delta`            | `theta0` [0]                                  |
//! | `delta_derivative` | `theta0` [0], `n` [1], at most 8              |
//! | `step`             | `theta0` [0], `left` [0], `right` [1], `at_jump` [midpoint] |
//! | `square_wave`      | (sign of theta)                               |
//! | `triangle_wave`    | (1 - 2 abs(theta) / pi)                       |
//! | `sawtooth`         | (theta, 0 at the seam)                        |
//! | `spiked`           | `base` {name, params}, `point` [0], `value`   |
//! | `conjugate_delta`  | `theta0` [0]                                  |

use std::f64::consts::PI;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::function::{circle_offset, wrap_angle, EvaluatorFunction, SingularPoint};
use crate::realfilter::{check_eps, filter_limit, multiplier, multiplier_filter, DEFAULT_SCHEDULE};
use crate::spectrum::{angular_derivative, fourier_conjugate, CoefficientSequence, GeneratorTag};

/// Largest supported delta-derivative order.
pub const MAX_DERIVATIVE_ORDER: u64 = 8;

pub const NAMES: [&str; 10] = [
    "constant",
    "cosine",
    "delta",
    "delta_derivative",
    "step",
    "square_wave",
    "triangle_wave",
    "sawtooth",
    "spiked",
    "conjugate_delta",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Combed,
    Ragged,
}

/// Which test establishes an entry's classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifiedBy {
    /// Point values against filter limits.
    Pointwise,
    /// The disk criterion on coefficients (distributions have no point values).
    Coefficients,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Constant { c: f64 },
    Cosine { k: usize },
    Delta { theta0: f64 },
    DeltaDerivative { theta0: f64, n: u32 },
    Step { theta0: f64, left: f64, right: f64, at_jump: f64 },
    SquareWave,
    TriangleWave,
    Sawtooth,
    Spiked { base: Box<CatalogEntry>, point: f64, value: f64 },
    ConjugateDelta { theta0: f64 },
}

/// A catalog function.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    tag: GeneratorTag,
    kind: Kind,
}

fn bad(name: &str, reason: impl Into<String>) -> Error {
    Error::BadParams {
        name: name.to_string(),
        reason: reason.into(),
    }
}

fn real(name: &str, params: &Map<String, Value>, key: &str, default: Option<f64>) -> Result<f64> {
    match params.get(key) {
        None | Some(Value::Null) => default.ok_or_else(|| bad(name, format!("missing `{key}`"))),
        Some(v) => match v.as_f64() {
            Some(x) if x.is_finite() => Ok(x),
            _ => Err(bad(name, format!("`{key}` must be a finite number"))),
        },
    }
}

fn count(name: &str, params: &Map<String, Value>, key: &str, default: u64) -> Result<u64> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(default),
        Some(v) => v
            .as_u64()
            .or_else(|| v.as_f64().filter(|x| x.fract() == 0.0 && *x >= 0.0).map(|x| x as u64))
            .ok_or_else(|| bad(name, format!("`{key}` must be a nonnegative integer"))),
    }
}

fn angle(name: &str, params: &Map<String, Value>, key: &str) -> Result<f64> {
    let t = real(name, params, key, Some(0.0))?;
    if !(-PI..=PI).contains(&t) {
        return Err(bad(name, format!("`{key}` must lie in [-pi, pi]")));
    }
    Ok(wrap_angle(t))
}

fn params_of(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| ((*k).to_string(), v.clone())).collect()
}

/// Builds a catalog entry. Missing parameters take their defaults; the
/// returned entry's tag records the full parameter set.
pub fn make(name: &str, params: &Map<String, Value>) -> Result<CatalogEntry> {
    let allowed: &[&str] = match name {
        "constant" => &["c"],
        "cosine" => &["k"],
        "delta" | "conjugate_delta" => &["theta0"],
        "delta_derivative" => &["theta0", "n"],
        "step" => &["theta0", "left", "right", "at_jump"],
        "square_wave" | "triangle_wave" | "sawtooth" => &[],
        "spiked" => &["base", "point", "value"],
        _ => return Err(Error::UnknownName(name.to_string())),
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(bad(name, format!("unknown parameter `{k}`")));
    }
    let (kind, normalized) = match name {
        "constant" => {
            let c = real(name, params, "c", Some(1.0))?;
            (Kind::Constant { c }, params_of(&[("c", c.into())]))
        }
        "cosine" => {
            let k = count(name, params, "k", 1)?;
            if k == 0 {
                return Err(bad(name, "`k` must be at least 1 (use `constant` for k = 0)"));
            }
            (Kind::Cosine { k: k as usize }, params_of(&[("k", k.into())]))
        }
        "delta" => {
            let theta0 = angle(name, params, "theta0")?;
            (Kind::Delta { theta0 }, params_of(&[("theta0", theta0.into())]))
        }
        "conjugate_delta" => {
            let theta0 = angle(name, params, "theta0")?;
            (Kind::ConjugateDelta { theta0 }, params_of(&[("theta0", theta0.into())]))
        }
        "delta_derivative" => {
            let theta0 = angle(name, params, "theta0")?;
            let n = count(name, params, "n", 1)?;
            if n > MAX_DERIVATIVE_ORDER {
                return Err(bad(name, format!("order {n} exceeds the supported maximum {MAX_DERIVATIVE_ORDER}")));
            }
            (
                Kind::DeltaDerivative { theta0, n: n as u32 },
                params_of(&[("theta0", theta0.into()), ("n", n.into())]),
            )
        }
        "step" => {
            let theta0 = angle(name, params, "theta0")?;
            if theta0 == -PI {
                return Err(bad(name, "`theta0` must lie strictly inside (-pi, pi)"));
            }
            let left = real(name, params, "left", Some(0.0))?;
            let right = real(name, params, "right", Some(1.0))?;
            let at_jump = real(name, params, "at_jump", Some(0.5 * (left + right)))?;
            (
                Kind::Step { theta0, left, right, at_jump },
                params_of(&[
                    ("theta0", theta0.into()),
                    ("left", left.into()),
                    ("right", right.into()),
                    ("at_jump", at_jump.into()),
                ]),
            )
        }
        "square_wave" => (Kind::SquareWave, Map::new()),
        "triangle_wave" => (Kind::TriangleWave, Map::new()),
        "sawtooth" => (Kind::Sawtooth, Map::new()),
        "spiked" => {
            let base_tag: GeneratorTag = params
                .get("base")
                .cloned()
                .map(serde_json::from_value)
                .transpose()
                .map_err(|e| bad(name, format!("`base` must be {{name, params}}: {e}")))?
                .unwrap_or_else(|| GeneratorTag::new("cosine", Map::new()));
            let base = make(&base_tag.name, &base_tag.params)?;
            if base.evaluator().is_none() {
                return Err(bad(name, format!("base `{}` has no point values to spike", base_tag.name)));
            }
            let point = angle(name, params, "point")?;
            let value = real(name, params, "value", None)?;
            let normalized = params_of(&[
                ("base", serde_json::to_value(base.tag())?),
                ("point", point.into()),
                ("value", value.into()),
            ]);
            (
                Kind::Spiked {
                    base: Box::new(base),
                    point,
                    value,
                },
                normalized,
            )
        }
        _ => unreachable!(),
    };
    Ok(CatalogEntry {
        tag: GeneratorTag::new(name, normalized),
        kind,
    })
}

/// Shorthand for [`make`] without parameters.
pub fn make_default(name: &str) -> Result<CatalogEntry> {
    make(name, &Map::new())
}

/// Rebuilds the coefficients named by a generator tag at truncation `n`.
/// Operator tags (`lowpass`, `derivative`, `conjugate`) are applied to the
/// regenerated inner sequence.
pub fn regenerate(tag: &GeneratorTag, n: usize) -> Result<CoefficientSequence> {
    let inner = || {
        tag.inner()
            .ok_or_else(|| bad(&tag.name, "operator tag without a valid `of`"))
    };
    match tag.name.as_str() {
        "lowpass" => {
            let eps = real("lowpass", &tag.params, "eps", None)?;
            multiplier_filter(&regenerate(&inner()?, n)?, eps)
        }
        "derivative" => {
            let order = count("derivative", &tag.params, "order", 1)?;
            let order = u32::try_from(order).map_err(|_| bad("derivative", "order too large"))?;
            Ok(angular_derivative(&regenerate(&inner()?, n)?, order))
        }
        "conjugate" => Ok(fourier_conjugate(&regenerate(&inner()?, n)?)),
        name => make(name, &tag.params)?.coefficients(n),
    }
}

impl CatalogEntry {
    pub fn name(&self) -> &str {
        &self.tag.name
    }

    pub fn tag(&self) -> &GeneratorTag {
        &self.tag
    }

    /// Exact coefficients at truncation `n`, tagged for regeneration.
    pub fn coefficients(&self, n: usize) -> Result<CoefficientSequence> {
        let ks = 1..=n;
        let seq = match &self.kind {
            Kind::Constant { c } => CoefficientSequence::constant(*c, n),
            Kind::Cosine { k } => {
                let mut a = vec![0.0; n];
                if *k <= n {
                    a[k - 1] = 1.0;
                }
                CoefficientSequence::new(0.0, a, vec![0.0; n])?
            }
            Kind::Delta { theta0 } => delta(*theta0, n),
            Kind::DeltaDerivative { theta0, n: order } => angular_derivative(&delta(*theta0, n), *order),
            Kind::ConjugateDelta { theta0 } => fourier_conjugate(&delta(*theta0, n)),
            Kind::Step { theta0, left, right, .. } => step(*theta0, *left, *right, n),
            Kind::SquareWave => step(0.0, -1.0, 1.0, n),
            Kind::TriangleWave => CoefficientSequence::new(
                0.0,
                ks.map(|k| if k % 2 == 1 { 8.0 / (PI * PI * (k * k) as f64) } else { 0.0 })
                    .collect(),
                vec![0.0; n],
            )?,
            Kind::Sawtooth => CoefficientSequence::new(
                0.0,
                vec![0.0; n],
                ks.map(|k| if k % 2 == 1 { 2.0 / k as f64 } else { -2.0 / k as f64 })
                    .collect(),
            )?,
            Kind::Spiked { base, .. } => base.coefficients(n)?,
        };
        Ok(seq.without_generator().with_generator(self.tag.clone()))
    }

    /// Point evaluator, for entries that have point values.
    pub fn evaluator(&self) -> Option<EvaluatorFunction> {
        let f = match &self.kind {
            Kind::Constant { c } => {
                let c = *c;
                EvaluatorFunction::new(move |_| c)
            }
            Kind::Cosine { k } => {
                let k = *k as f64;
                EvaluatorFunction::new(move |t| (k * t).cos())
            }
            Kind::Delta { .. } | Kind::DeltaDerivative { .. } => return None,
            Kind::ConjugateDelta { theta0 } => {
                let t0 = *theta0;
                EvaluatorFunction::new(move |t| {
                    let d = circle_offset(t0, t);
                    if d == 0.0 {
                        f64::NAN
                    } else {
                        1.0 / (2.0 * PI * (0.5 * d).tan())
                    }
                })
                .with_singular(SingularPoint::non_integrable(t0))
            }
            Kind::Step { theta0, left, right, at_jump } => step_evaluator(*theta0, *left, *right, *at_jump),
            Kind::SquareWave => step_evaluator(0.0, -1.0, 1.0, 0.0),
            Kind::TriangleWave => EvaluatorFunction::new(|t: f64| 1.0 - 2.0 * t.abs() / PI)
                .with_singular(SingularPoint::integrable(0.0))
                .with_singular(SingularPoint::integrable(-PI)),
            Kind::Sawtooth => EvaluatorFunction::new(|t: f64| if t == -PI { 0.0 } else { t })
                .with_singular(SingularPoint::integrable(-PI)),
            Kind::Spiked { base, point, value } => {
                let inner = base.evaluator().expect("validated at construction");
                let (p, v) = (*point, *value);
                let points = inner.singular_points().to_vec();
                EvaluatorFunction::new(move |t| if t == p { v } else { inner.raw(t) })
                    .with_singular_points(points)
                    .with_defect(p)
            }
        };
        Some(f.labelled(self.name()))
    }

    /// The combed/ragged status of the entry and the test that decides it.
    pub fn known_classification(&self) -> (Verdict, ClassifiedBy) {
        match &self.kind {
            Kind::Delta { .. } | Kind::DeltaDerivative { .. } | Kind::ConjugateDelta { .. } => {
                (Verdict::Combed, ClassifiedBy::Coefficients)
            }
            Kind::Step { left, right, at_jump, .. } => {
                let v = if *at_jump == 0.5 * (left + right) {
                    Verdict::Combed
                } else {
                    Verdict::Ragged
                };
                (v, ClassifiedBy::Pointwise)
            }
            Kind::Spiked { base, point, value } => {
                let f = base.evaluator().expect("validated at construction");
                let combed_value = filter_limit(&f, *point, &DEFAULT_SCHEDULE).map(|l| l.value);
                let v = match combed_value {
                    Ok(c) if (c - value).abs() <= 1e-9 => base.known_classification().0,
                    _ => Verdict::Ragged,
                };
                (v, ClassifiedBy::Pointwise)
            }
            _ => (Verdict::Combed, ClassifiedBy::Pointwise),
        }
    }

    /// Closed-form `f_eps`, the window mean over `[theta - eps, theta + eps]`.
    pub fn exact_filtered(&self, eps: f64) -> Result<EvaluatorFunction> {
        check_eps(eps)?;
        let f = match &self.kind {
            Kind::Constant { c } => {
                let c = *c;
                EvaluatorFunction::new(move |_| c)
            }
            Kind::Cosine { k } => {
                let m = multiplier(*k, eps);
                let k = *k as f64;
                EvaluatorFunction::new(move |t| m * (k * t).cos())
            }
            Kind::Delta { theta0 } => {
                let t0 = *theta0;
                let height = 1.0 / (2.0 * eps);
                EvaluatorFunction::new(move |t| {
                    let d = circle_offset(t0, t).abs();
                    let weight = if d < eps || (d == eps && eps == PI) {
                        1.0
                    } else if d == eps {
                        0.5
                    } else {
                        0.0
                    };
                    weight * height
                })
                .with_singular_points([SingularPoint::integrable(t0 - eps), SingularPoint::integrable(t0 + eps)])
            }
            Kind::Spiked { base, .. } => return base.exact_filtered(eps),
            Kind::DeltaDerivative { .. } | Kind::ConjugateDelta { .. } => {
                return Err(Error::NotAvailable(self.name().to_string()))
            }
            _ => {
                let primitive = Primitive::of(&self.kind);
                let breaks: Vec<SingularPoint> = self
                    .evaluator()
                    .expect("piecewise entries have evaluators")
                    .singular_points()
                    .iter()
                    .flat_map(|p| [SingularPoint::integrable(p.theta - eps), SingularPoint::integrable(p.theta + eps)])
                    .collect();
                EvaluatorFunction::new(move |t| (primitive.extended(t + eps) - primitive.extended(t - eps)) / (2.0 * eps))
                    .with_singular_points(breaks)
            }
        };
        Ok(f.labelled(format!("{} filtered at eps = {eps}", self.name())))
    }
}

fn delta(theta0: f64, n: usize) -> CoefficientSequence {
    let (a, b) = (1..=n)
        .map(|k| {
            let (s, c) = (k as f64 * theta0).sin_cos();
            (c / PI, s / PI)
        })
        .unzip();
    CoefficientSequence::new(1.0 / (2.0 * PI), a, b).expect("finite")
}

fn step(theta0: f64, left: f64, right: f64, n: usize) -> CoefficientSequence {
    let a0 = (left * (theta0 + PI) + right * (PI - theta0)) / (2.0 * PI);
    let (a, b) = (1..=n)
        .map(|k| {
            let kf = k as f64;
            let (s, c) = (kf * theta0).sin_cos();
            let alt = if k % 2 == 0 { 1.0 } else { -1.0 };
            ((left - right) * s / (kf * PI), (right - left) * (c - alt) / (kf * PI))
        })
        .unzip();
    CoefficientSequence::new(a0, a, b).expect("finite")
}

fn step_evaluator(theta0: f64, left: f64, right: f64, at_jump: f64) -> EvaluatorFunction {
    let seam = 0.5 * (left + right);
    EvaluatorFunction::new(move |t| {
        if t == theta0 {
            at_jump
        } else if t == -PI {
            seam
        } else if t < theta0 {
            left
        } else {
            right
        }
    })
    .with_singular(SingularPoint::integrable(theta0))
    .with_singular(SingularPoint::integrable(-PI))
}

/// `P(x) = integral of f from -pi to x` on `[-pi, pi)`, extended by
/// `P(x + 2 pi m) = P(x) + m * (integral over the period)`.
#[derive(Clone, Copy)]
enum Primitive {
    Step { theta0: f64, left: f64, right: f64 },
    Triangle,
    Sawtooth,
}

impl Primitive {
    fn of(kind: &Kind) -> Primitive {
        match *kind {
            Kind::Step { theta0, left, right, .. } => Primitive::Step { theta0, left, right },
            Kind::SquareWave => Primitive::Step { theta0: 0.0, left: -1.0, right: 1.0 },
            Kind::TriangleWave => Primitive::Triangle,
            Kind::Sawtooth => Primitive::Sawtooth,
            _ => unreachable!("no piecewise primitive"),
        }
    }

    fn local(&self, x: f64) -> f64 {
        match *self {
            Primitive::Step { theta0, left, right } => {
                if x <= theta0 {
                    left * (x + PI)
                } else {
                    left * (theta0 + PI) + right * (x - theta0)
                }
            }
            Primitive::Triangle => {
                if x < 0.0 {
                    x + x * x / PI
                } else {
                    x - x * x / PI
                }
            }
            Primitive::Sawtooth => 0.5 * (x * x - PI * PI),
        }
    }

    fn period_integral(&self) -> f64 {
        match *self {
            Primitive::Step { theta0, left, right } => left * (theta0 + PI) + right * (PI - theta0),
            Primitive::Triangle | Primitive::Sawtooth => 0.0,
        }
    }

    fn extended(&self, x: f64) -> f64 {
        let m = ((x + PI) / (2.0 * PI)).floor();
        let mut r = x - 2.0 * PI * m;
        let mut m = m;
        if r >= PI {
            r -= 2.0 * PI;
            m += 1.0;
        } else if r < -PI {
            r += 2.0 * PI;
            m -= 1.0;
        }
        self.local(r) + m * self.period_integral()
    }
}
