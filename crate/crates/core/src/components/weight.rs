use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::grid::MAX_DIM;

use super::doubling::DoublingCertificate;

/// Named weight families. Radial families act on the Euclidean length of
/// the translation part of a group element; on `ax+b` they are extended
/// by `v(x, a) = v(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum WeightFamily {
    Constant {
        value: f64,
    },
    /// `|x|^s`
    Power {
        s: f64,
    },
    /// `(1 + |x|)^s`
    ShiftedPower {
        s: f64,
    },
    /// `e^{rate·|x|}`
    Exponential {
        #[serde(default = "one")]
        rate: f64,
    },
    /// Piecewise-linear in `|x|` through `(radii[k], values[k])`, constant
    /// beyond the last radius.
    Table {
        radii: Vec<f64>,
        values: Vec<f64>,
    },
    /// `b^{n(1+1/q)}·(1 + |y|/b)^{α/p}` on the `ax+b` group.
    AxbTranslation {
        n: usize,
        p: f64,
        q: f64,
        alpha: f64,
    },
    /// Nearest-sample lookup of a tabulated weight on group coordinates.
    Samples {
        points: Vec<Vec<f64>>,
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

/// Result of a submultiplicativity sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SubmultiplicativeVerdict {
    Pass {
        checked_pairs: usize,
        max_ratio: f64,
    },
    Counterexample {
        x: Vec<f64>,
        y: Vec<f64>,
        ratio: f64,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submultiplicative: Option<SubmultiplicativeVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doubling: Option<DoublingCertificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    #[serde(flatten)]
    pub family: WeightFamily,
    #[serde(default, skip_serializing_if = "is_default")]
    pub certificates: Certificates,
}

fn is_default(c: &Certificates) -> bool {
    *c == Certificates::default()
}

impl From<WeightFamily> for WeightFunction {
    fn from(family: WeightFamily) -> Self {
        WeightFunction {
            family,
            certificates: Certificates::default(),
        }
    }
}

impl WeightFunction {
    pub fn constant(value: f64) -> Self {
        WeightFamily::Constant { value }.into()
    }

    pub fn power(s: f64) -> Self {
        WeightFamily::Power { s }.into()
    }

    pub fn shifted_power(s: f64) -> Self {
        WeightFamily::ShiftedPower { s }.into()
    }

    pub fn exponential(rate: f64) -> Self {
        WeightFamily::Exponential { rate }.into()
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.family, WeightFamily::Constant { value } if value == 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.family {
            WeightFamily::Constant { value } if !(value.is_finite() && *value > 0.0) => {
                Err(Error::param("value", "constant weight must be positive"))
            }
            WeightFamily::Table { radii, values } => {
                if radii.is_empty() || radii.len() != values.len() {
                    return Err(Error::param("table", "radii and values must be non-empty and of equal length"));
                }
                if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] < 0.0 {
                    return Err(Error::param("radii", "must be non-negative and increasing"));
                }
                if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::param("values", "table values must be positive"));
                }
                Ok(())
            }
            WeightFamily::AxbTranslation { p, q, .. } if *p <= 0.0 || *q <= 0.0 => {
                Err(Error::param("p/q", "exponents must be positive"))
            }
            WeightFamily::Samples { points, values } => {
                if points.is_empty() || points.len() != values.len() {
                    return Err(Error::param("samples", "points and values must be non-empty and of equal length"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Evaluates the weight at a point of `ℝⁿ` (the translation part).
    pub fn eval_radial(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        match &self.family {
            WeightFamily::Constant { value } => *value,
            WeightFamily::Power { s } => r.powf(*s),
            WeightFamily::ShiftedPower { s } => (1.0 + r).powf(*s),
            WeightFamily::Exponential { rate } => (rate * r).exp(),
            WeightFamily::Table { radii, values } => {
                let k = radii.partition_point(|&t| t <= r);
                if k == 0 {
                    values[0]
                } else if k == radii.len() {
                    values[k - 1]
                } else {
                    let t = (r - radii[k - 1]) / (radii[k] - radii[k - 1]);
                    values[k - 1] * (1.0 - t) + values[k] * t
                }
            }
            WeightFamily::AxbTranslation { .. } | WeightFamily::Samples { .. } => self.eval_coords(x),
        }
    }

    /// Evaluates the weight at group coordinates.
    pub fn eval(&self, group: GroupSpec, coords: &[f64]) -> f64 {
        match &self.family {
            WeightFamily::AxbTranslation { .. } | WeightFamily::Samples { .. } => {
                self.eval_coords(coords)
            }
            _ => self.eval_radial(&coords[..group.n()]),
        }
    }

    fn eval_coords(&self, coords: &[f64]) -> f64 {
        match &self.family {
            WeightFamily::AxbTranslation { n, p, q, alpha } => {
                let b = coords[*n];
                let y = coords[..*n].iter().map(|v| v * v).sum::<f64>().sqrt();
                crate::axb::right_translation_bound(y, b, *p, *q, *alpha, *n)
            }
            WeightFamily::Samples { points, values } => {
                let mut best = (f64::INFINITY, values[0]);
                for (pt, v) in points.iter().zip(values) {
                    let d: f64 = pt.iter().zip(coords).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d < best.0 {
                        best = (d, *v);
                    }
                }
                best.1
            }
            _ => self.eval_radial(coords),
        }
    }
}

/// Checks `w(x·y) ≤ w(x)·w(y)` on every sample pair, up to a relative slack
/// of `1e-12`. Stops at the first violating pair.
pub fn check_submultiplicative(
    w: &WeightFunction,
    group: GroupSpec,
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<SubmultiplicativeVerdict> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("sample pairs"));
    }
    let dim = group.dim();
    let mut xy = [0.0; MAX_DIM];
    let mut max_ratio: f64 = 0.0;
    for (x, y) in pairs {
        group.check_coords(x)?;
        group.check_coords(y)?;
        group.mul_into(x, y, &mut xy[..dim]);
        let (wxy, wx, wy) = (w.eval(group, &xy[..dim]), w.eval(group, x), w.eval(group, y));
        if !(wxy.is_finite() && wx.is_finite() && wy.is_finite()) || wx <= 0.0 || wy <= 0.0 {
            return Err(Error::param(
                "weight",
                format!("weight not finite and positive near {x:?}, {y:?}"),
            ));
        }
        let ratio = wxy / (wx * wy);
        if ratio > 1.0 + 1e-12 {
            return Ok(SubmultiplicativeVerdict::Counterexample {
                x: x.clone(),
                y: y.clone(),
                ratio,
            });
        }
        max_ratio = max_ratio.max(ratio);
    }
    Ok(SubmultiplicativeVerdict::Pass {
        checked_pairs: pairs.len(),
        max_ratio,
    })
}

/// All pairs from an `m × m` tensor grid of `[lo, hi]` on the line.
pub fn line_sample_pairs(lo: f64, hi: f64, m: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let pts: Vec<f64> = (0..m)
        .map(|i| lo + (hi - lo) * i as f64 / (m.max(2) - 1) as f64)
        .collect();
    let mut out = Vec::with_capacity(m * m);
    for &x in &pts {
        for &y in &pts {
            out.push((vec![x], vec![y]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_weight_is_submultiplicative() {
        let pairs = line_sample_pairs(-50.0, 50.0, 200);
        let v = check_submultiplicative(&WeightFunction::shifted_power(2.0), GroupSpec::Euclidean(1), &pairs)
            .unwrap();
        assert!(matches!(v, SubmultiplicativeVerdict::Pass { checked_pairs: 40000, max_ratio } if max_ratio <= 1.0 + 1e-12));
    }

    #[test]
    fn exponential_weight_is_submultiplicative() {
        let pairs = line_sample_pairs(-20.0, 20.0, 200);
        let v = check_submultiplicative(&WeightFunction::exponential(1.0), GroupSpec::Euclidean(1), &pairs)
            .unwrap();
        assert!(matches!(v, SubmultiplicativeVerdict::Pass { .. }));
    }

    #[test]
    fn decaying_weight_fails_at_symmetric_pair() {
        let pairs = vec![(vec![1.0], vec![-1.0])];
        let v = check_submultiplicative(&WeightFunction::shifted_power(-1.0), GroupSpec::Euclidean(1), &pairs)
            .unwrap();
        match v {
            SubmultiplicativeVerdict::Counterexample { x, y, ratio } => {
                assert_eq!((x, y), (vec![1.0], vec![-1.0]));
                assert_eq!(ratio, 4.0);
            }
            other => panic!("expected a counterexample, got {other:?}"),
        }
    }

    #[test]
    fn lattice_weight() {
        let pairs: Vec<_> = (-20..=20)
            .flat_map(|i| (-20..=20).map(move |j| (vec![i as f64], vec![j as f64])))
            .collect();
        let v = check_submultiplicative(&WeightFunction::shifted_power(1.0), GroupSpec::Lattice(1), &pairs)
            .unwrap();
        assert!(matches!(v, SubmultiplicativeVerdict::Pass { .. }));
    }

    #[test]
    fn table_interpolates_radially() {
        let w: WeightFunction = WeightFamily::Table {
            radii: vec![0.0, 1.0, 3.0],
            values: vec![1.0, 2.0, 4.0],
        }
        .into();
        w.validate().unwrap();
        assert_eq!(w.eval_radial(&[-0.5]), 1.5);
        assert_eq!(w.eval_radial(&[2.0]), 3.0);
        assert_eq!(w.eval_radial(&[10.0]), 4.0);
    }

    #[test]
    fn family_names_round_trip_through_toml() {
        let w = WeightFunction::shifted_power(2.0);
        let s = toml::to_string(&w).unwrap();
        assert!(s.contains("family = \"shifted-power\""), "{s}");
        let back: WeightFunction = toml::from_str(&s).unwrap();
        assert_eq!(back, w);
    }
}
