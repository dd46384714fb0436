//! Polynomial (Richardson/Neville) extrapolation of `v(h)` to `h = 0`.

use serde::Serialize;

/// Which powers of the step appear in the error expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorModel {
    /// `v(h) = v0 + c2 h^2 + c4 h^4 + ...`
    Even,
    /// `v(h) = v0 + c1 h + c2 h^2 + ...`
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolated {
    pub value: f64,
    /// Magnitude of the last correction along the tableau diagonal.
    pub residual: f64,
    /// Tableau diagonal: the extrapolant using the first `j + 1` samples.
    pub diagonal: Vec<f64>,
}

impl Extrapolated {
    /// `|d_j - d_{j-1}|` along the diagonal.
    pub fn corrections(&self) -> Vec<f64> {
        self.diagonal.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    }

    /// `Some((last, previous))` when the last correction is larger than the
    /// one before it and above `floor`.
    pub fn diverging(&self, floor: f64) -> Option<(f64, f64)> {
        let c = self.corrections();
        if c.len() < 2 {
            return None;
        }
        let last = c[c.len() - 1];
        let prev = c[c.len() - 2];
        (last > prev && last > floor).then_some((last, prev))
    }
}

/// Extrapolates samples `values[i] = v(steps[i])` to zero step.
///
/// `steps` must be nonempty, positive and pairwise distinct.
pub fn extrapolate_to_zero(steps: &[f64], values: &[f64], model: ErrorModel) -> Extrapolated {
    assert_eq!(steps.len(), values.len());
    assert!(!steps.is_empty());
    let x: Vec<f64> = match model {
        ErrorModel::Even => steps.iter().map(|h| h * h).collect(),
        ErrorModel::Full => steps.to_vec(),
    };
    let n = x.len();
    let mut row = values.to_vec();
    let mut diagonal = vec![row[0]];
    // row[i] holds P_{i-j..i}(0) after pass j
    let mut tableau_prev = row.clone();
    for j in 1..n {
        for i in (j..n).rev() {
            let lo = x[i - j];
            let hi = x[i];
            row[i] = (lo * tableau_prev[i] - hi * tableau_prev[i - 1]) / (lo - hi);
        }
        diagonal.push(row[j]);
        tableau_prev.copy_from_slice(&row);
    }
    let value = diagonal[n - 1];
    let residual = if n >= 2 {
        (diagonal[n - 1] - diagonal[n - 2]).abs()
    } else {
        f64::INFINITY
    };
    Extrapolated {
        value,
        residual,
        diagonal,
    }
}
