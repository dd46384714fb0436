//! Uniform samples on the circle, with a defined-mask and metadata, plus the
//! CSV and sidecar formats used to exchange them.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{EvaluatorFunction, SingularKind, SingularPoint};
use crate::io::fmt_f64;
use crate::rescale::IntervalMap;

/// Node `i` of an `n`-point grid, `-pi + 2 pi i / n`.
pub fn node(i: usize, n: usize) -> f64 {
    PI * (2.0 * i as f64 - n as f64) / n as f64
}

/// All nodes of an `n`-point grid.
pub fn nodes(n: usize) -> Vec<f64> {
    (0..n).map(|i| node(i, n)).collect()
}

/// Samples `theta_i = -pi + 2 pi i / n`, `i = 0..n`; the node at `+pi` is
/// the node at `-pi`.
///
/// Values are always stored against canonical angles. A physical `domain`
/// is metadata: it changes how the grid is written and adds a boundary
/// singular point at the seam so that windows never wrap from `b` to `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
    defined: Vec<bool>,
    singular: Vec<SingularPoint>,
    note: String,
    domain: Option<IntervalMap>,
}

impl GridFunction {
    /// Builds a grid from values and a mask. Undefined nodes hold NaN.
    pub fn new(values: Vec<f64>, defined: Vec<bool>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::domain("a grid needs at least two nodes"));
        }
        if values.len() != defined.len() {
            return Err(Error::domain("values and mask differ in length"));
        }
        if values.iter().zip(&defined).any(|(v, &d)| d && !v.is_finite()) {
            return Err(Error::domain("defined grid values must be finite"));
        }
        let values = values
            .into_iter()
            .zip(&defined)
            .map(|(v, &d)| if d { v } else { f64::NAN })
            .collect();
        Ok(GridFunction {
            values,
            defined,
            singular: Vec::new(),
            note: String::new(),
            domain: None,
        })
    }

    /// Samples `f` on `n` nodes; non-finite samples become undefined.
    pub fn sample(n: usize, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = nodes(n).into_iter().map(f).collect();
        let defined = values.iter().map(|v| v.is_finite()).collect();
        Self::new(values, defined).expect("sampled grid is consistent")
    }

    /// Samples an evaluator and copies its singular points.
    pub fn sample_evaluator(f: &EvaluatorFunction, n: usize) -> Self {
        Self::sample(n, |t| f.raw(t)).with_singular_points(f.singular_points().iter().copied())
    }

    /// Same grid and metadata with new values.
    pub fn with_values(&self, values: Vec<f64>, defined: Vec<bool>) -> Self {
        let fresh = GridFunction::new(values, defined).expect("values consistent with the grid");
        assert_eq!(fresh.len(), self.len(), "grid size changed");
        GridFunction {
            singular: self.singular.clone(),
            note: self.note.clone(),
            domain: self.domain,
            ..fresh
        }
    }

    pub fn with_singular_points(mut self, points: impl IntoIterator<Item = SingularPoint>) -> Self {
        for p in points {
            let p = SingularPoint {
                theta: crate::function::wrap_angle(p.theta),
                kind: p.kind,
            };
            match self.singular.iter_mut().find(|q| q.theta == p.theta) {
                Some(q) if p.kind != SingularKind::Integrable => q.kind = p.kind,
                Some(_) => {}
                None => self.singular.push(p),
            }
        }
        self.singular.sort_by(|a, b| a.theta.total_cmp(&b.theta));
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Attaches a physical domain; the seam at `-pi` becomes a boundary point.
    pub fn with_domain(self, map: IntervalMap) -> Self {
        let mut out = self.with_singular_points([SingularPoint {
            theta: -PI,
            kind: SingularKind::Boundary,
        }]);
        out.domain = Some(map);
        out
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        node(i, self.len())
    }

    pub fn thetas(&self) -> Vec<f64> {
        nodes(self.len())
    }

    /// Value at node `i` (NaN when undefined).
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_defined(&self, i: usize) -> bool {
        self.defined[i]
    }

    pub fn defined_mask(&self) -> &[bool] {
        &self.defined
    }

    pub fn singular_points(&self) -> &[SingularPoint] {
        &self.singular
    }

    pub fn note(&self) -> &str {
        &self.note
    }

    pub fn domain(&self) -> Option<IntervalMap> {
        self.domain
    }

    /// Index of the node at `theta`, if `theta` is (to round-off) a node.
    pub fn node_index(&self, theta: f64) -> Option<usize> {
        let n = self.len();
        let x = (crate::function::wrap_angle(theta) + PI) / self.spacing();
        let i = x.round();
        ((x - i).abs() < 1e-9).then_some(i as usize % n)
    }

    /// The piecewise-linear interpolant as an evaluator.
    ///
    /// Every node is declared an integrable singular point (the interpolant
    /// has kinks there), undefined nodes are declared non-integrable, and the
    /// grid's own singular points are carried over.
    pub fn to_evaluator(&self) -> EvaluatorFunction {
        let n = self.len();
        let h = self.spacing();
        let values = self.values.clone();
        let rule = move |t: f64| {
            let x = (t + PI) / h;
            let j = (x.floor() as usize).min(n - 1);
            let frac = x - j as f64;
            let a = values[j];
            if frac == 0.0 {
                return a;
            }
            let b = values[(j + 1) % n];
            a + (b - a) * frac
        };
        let points = (0..n)
            .map(|i| {
                if self.defined[i] {
                    SingularPoint::integrable(self.theta(i))
                } else {
                    SingularPoint::non_integrable(self.theta(i))
                }
            })
            .chain(self.singular.iter().copied());
        let label = if self.note.is_empty() {
            "grid".to_string()
        } else {
            self.note.clone()
        };
        EvaluatorFunction::new(rule)
            .with_singular_points(points)
            .labelled(label)
    }

    /// Coordinate written to and read from the first CSV column.
    fn coordinate(&self, i: usize) -> f64 {
        match self.domain {
            Some(map) => map.physical_unchecked(self.theta(i)),
            None => self.theta(i),
        }
    }

    /// Writes `theta,value,defined` rows (`x,value,defined` when a physical
    /// domain is attached).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let first = if self.domain.is_some() { "x" } else { "theta" };
        w.write_record([first, "value", "defined"])?;
        for i in 0..self.len() {
            w.write_record([
                fmt_f64(self.coordinate(i)),
                fmt_f64(self.values[i]),
                self.defined[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads CSV rows; `domain` tells how to interpret the first column.
    pub fn read_csv<R: Read>(input: R, domain: Option<IntervalMap>) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        if names.len() != 3 || !matches!(names[0], "theta" | "x") || names[1] != "value" || names[2] != "defined" {
            return Err(Error::Format(format!(
                "expected header theta,value,defined; found {}",
                names.join(",")
            )));
        }
        let mut coords = Vec::new();
        let mut values = Vec::new();
        let mut defined = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            let field = |j: usize| record.get(j).map(str::trim).unwrap_or("");
            let parse = |j: usize| -> Result<f64> {
                field(j)
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("row {}: bad number `{}`", row + 1, field(j))))
            };
            coords.push(parse(0)?);
            let v = parse(1)?;
            let d = match field(2) {
                "true" | "1" => true,
                "false" | "0" => false,
                other => {
                    return Err(Error::Format(format!("row {}: bad defined flag `{other}`", row + 1)))
                }
            };
            if d && !v.is_finite() {
                return Err(Error::Format(format!("row {}: defined value is not finite", row + 1)));
            }
            values.push(v);
            defined.push(d);
        }
        let n = coords.len();
        if n < 2 {
            return Err(Error::Format("a grid needs at least two rows".into()));
        }
        let mut grid = GridFunction::new(values, defined)?;
        for (i, &c) in coords.iter().enumerate() {
            let theta = match domain {
                Some(map) => map.to_canonical(c)?,
                None => c,
            };
            if (theta - node(i, n)).abs() > 1e-9 * PI {
                return Err(Error::Format(format!(
                    "row {}: coordinate {c} is not node {i} of a uniform {n}-point grid",
                    i + 1
                )));
            }
        }
        if let Some(map) = domain {
            grid = grid.with_domain(map);
        }
        Ok(grid)
    }

    /// Sidecar metadata for this grid.
    pub fn sidecar(&self) -> Sidecar {
        let map = self.domain;
        Sidecar {
            singular_points: self
                .singular
                .iter()
                .filter(|p| !(map.is_some() && p.kind == SingularKind::Boundary && p.theta == -PI))
                .map(|p| SidecarPoint::Full {
                    theta: match map {
                        Some(m) => m.physical_unchecked(p.theta),
                        None => p.theta,
                    },
                    kind: p.kind,
                })
                .collect(),
            note: self.note.clone(),
            domain: map.map(|m| [m.a(), m.b()]),
        }
    }

    /// Applies sidecar metadata read alongside the CSV.
    pub fn apply_sidecar(self, sidecar: &Sidecar) -> Result<Self> {
        let map = sidecar.domain_map()?;
        let mut points = Vec::with_capacity(sidecar.singular_points.len());
        for p in &sidecar.singular_points {
            let (c, kind) = p.parts();
            let theta = match map {
                Some(m) => m.to_canonical(c)?,
                None => c,
            };
            points.push(SingularPoint { theta, kind });
        }
        Ok(self.with_singular_points(points).with_note(sidecar.note.clone()))
    }

    /// Writes `path` (CSV) and `sidecar_path(path)` (JSON).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
        std::fs::write(sidecar_path(path), crate::io::to_json_string(&self.sidecar())?)?;
        Ok(())
    }

    /// Reads `path` and, when present, its sidecar. A domain in the sidecar
    /// switches the first column to physical coordinates.
    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with_domain(path, None)
    }

    /// As [`GridFunction::load`], with a domain supplied by the caller when
    /// the sidecar has none. Two different domains are an error.
    pub fn load_with_domain(path: &Path, domain: Option<IntervalMap>) -> Result<Self> {
        let side = sidecar_path(path);
        let sidecar: Option<Sidecar> = if side.exists() {
            Some(serde_json::from_str(&std::fs::read_to_string(&side)?)?)
        } else {
            None
        };
        let stored = match &sidecar {
            Some(s) => s.domain_map()?,
            None => None,
        };
        let domain = match (stored, domain) {
            (Some(s), Some(d)) if s != d => {
                return Err(Error::domain(format!(
                    "domain [{}, {}] conflicts with the sidecar's [{}, {}]",
                    d.a(),
                    d.b(),
                    s.a(),
                    s.b()
                )))
            }
            (s, d) => s.or(d),
        };
        let grid = Self::read_csv(std::fs::File::open(path)?, domain)?;
        match sidecar {
            Some(s) => grid.apply_sidecar(&s),
            None => Ok(grid),
        }
    }
}

/// `grid.csv` -> `grid.csv.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Sidecar JSON: `{"singular_points": [...], "note": "...", "domain": [a, b]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(default)]
    pub singular_points: Vec<SidecarPoint>,
    #[serde(default)]
    pub note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
}

impl Sidecar {
    fn domain_map(&self) -> Result<Option<IntervalMap>> {
        self.domain.map(|[a, b]| IntervalMap::new(a, b)).transpose()
    }
}

/// A bare number is an integrable singular point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SidecarPoint {
    Bare(f64),
    Full { theta: f64, kind: SingularKind },
}

impl SidecarPoint {
    fn parts(&self) -> (f64, SingularKind) {
        match *self {
            SidecarPoint::Bare(t) => (t, SingularKind::Integrable),
            SidecarPoint::Full { theta, kind } => (theta, kind),
        }
    }
}
