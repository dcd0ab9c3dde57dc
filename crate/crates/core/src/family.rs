//! Seeded test families with closed-form evaluators, so a family can be
//! re-tabulated on any grid.
//!
//! Randomness comes from ChaCha8 seeded with [`seeded`]; every real draw is
//! `(next_u64 >> 11) · 2⁻⁵³` mapped affinely onto its range, which makes the
//! streams reproducible from any language with a ChaCha8 implementation.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};
use crate::group::GroupSpec;

/// Truncation radius of the Gaussian bumps, in standard deviations.
pub const BUMP_CUTOFF: f64 = 6.0;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on `[0, 1)` with 53 random bits.
pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

/// Gaussian bump `A·exp(-½ Σ ((u_d - c_d)/σ_d)²)`, cut off at
/// [`BUMP_CUTOFF`]`·σ` per axis. On `ax+b` the last coordinate is `ln a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub width: Vec<f64>,
    pub amplitude: f64,
}

impl Bump {
    pub fn eval(&self, group: GroupSpec, p: &[f64]) -> f64 {
        let mut s = 0.0;
        for d in 0..p.len() {
            let u = if matches!(group, GroupSpec::Axb(n) if n == d) {
                p[d].ln()
            } else {
                p[d]
            };
            let t = (u - self.center[d]) / self.width[d];
            if t.abs() >= BUMP_CUTOFF {
                return 0.0;
            }
            s += t * t;
        }
        self.amplitude * (-0.5 * s).exp()
    }
}

/// A test function that can be evaluated anywhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    Bumps { bumps: Vec<Bump> },
    /// Finitely supported sequence on `ℤⁿ`.
    Sequence { entries: Vec<(Vec<i64>, f64)> },
    /// `value · χ_{[lo, hi]}` in raw coordinates.
    Indicator { lo: Vec<f64>, hi: Vec<f64>, value: f64 },
}

impl TestFunction {
    pub fn sequence(values: &[f64]) -> TestFunction {
        TestFunction::Sequence {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (vec![i as i64], *v))
                .collect(),
        }
    }

    pub fn eval(&self, group: GroupSpec, p: &[f64]) -> f64 {
        match self {
            TestFunction::Bumps { bumps } => bumps.iter().map(|b| b.eval(group, p)).sum(),
            TestFunction::Sequence { entries } => entries
                .iter()
                .filter(|(k, _)| k.iter().zip(p).all(|(k, x)| *k as f64 == *x))
                .map(|(_, v)| v)
                .sum(),
            TestFunction::Indicator { lo, hi, value } => {
                let inside = p
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(x, (l, h))| *x >= *l && *x <= *h);
                if inside {
                    *value
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample(&self, grid: &Arc<Grid>) -> Result<SampledFunction> {
        let group = grid.group();
        SampledFunction::from_fn(grid.clone(), |p| Complex64::new(self.eval(group, p), 0.0))
    }
}

/// How to draw a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Sums of `1..=max_terms` bumps; centers and widths per coordinate.
    BumpSums {
        #[serde(default = "default_terms")]
        max_terms: usize,
        center_lo: Vec<f64>,
        center_hi: Vec<f64>,
        width_lo: Vec<f64>,
        width_hi: Vec<f64>,
        #[serde(default = "default_amp_lo")]
        amplitude_lo: f64,
        #[serde(default = "default_amp_hi")]
        amplitude_hi: f64,
    },
    /// Sequences on `{0, …, support-1} ⊂ ℤ` with uniform values.
    LatticeSequences {
        support: usize,
        value_lo: f64,
        value_hi: f64,
    },
}

fn default_terms() -> usize {
    5
}
fn default_amp_lo() -> f64 {
    0.5
}
fn default_amp_hi() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub kind: FamilyKind,
    pub count: usize,
    pub seed: u64,
}

impl FamilySpec {
    /// Draws the family. For bump sums each function draws its term count
    /// `1 + ⌊u·max_terms⌋`, then per term the amplitude, all centers and all
    /// widths, in that order.
    pub fn generate(&self, group: GroupSpec) -> Result<Vec<TestFunction>> {
        let mut rng = seeded(self.seed);
        match &self.kind {
            FamilyKind::BumpSums {
                max_terms,
                center_lo,
                center_hi,
                width_lo,
                width_hi,
                amplitude_lo,
                amplitude_hi,
            } => {
                let dim = group.dim();
                for (name, v) in [
                    ("center_lo", center_lo),
                    ("center_hi", center_hi),
                    ("width_lo", width_lo),
                    ("width_hi", width_hi),
                ] {
                    if v.len() != dim {
                        return Err(Error::param(name, format!("need {dim} entries, got {}", v.len())));
                    }
                }
                if *max_terms == 0 {
                    return Err(Error::param("max_terms", "must be positive"));
                }
                if width_lo.iter().any(|w| *w <= 0.0) || width_lo.iter().zip(width_hi).any(|(a, b)| b < a) {
                    return Err(Error::param("width", "need 0 < width_lo <= width_hi"));
                }
                Ok((0..self.count)
                    .map(|_| {
                        let terms = 1 + ((unit(&mut rng) * *max_terms as f64) as usize).min(max_terms - 1);
                        let bumps = (0..terms)
                            .map(|_| {
                                let amplitude = uniform(&mut rng, *amplitude_lo, *amplitude_hi);
                                let center = (0..dim).map(|d| uniform(&mut rng, center_lo[d], center_hi[d])).collect();
                                let width = (0..dim).map(|d| uniform(&mut rng, width_lo[d], width_hi[d])).collect();
                                Bump {
                                    center,
                                    width,
                                    amplitude,
                                }
                            })
                            .collect();
                        TestFunction::Bumps { bumps }
                    })
                    .collect())
            }
            FamilyKind::LatticeSequences {
                support,
                value_lo,
                value_hi,
            } => {
                if group != GroupSpec::Lattice(1) {
                    return Err(Error::GroupMismatch("lattice sequences live on ℤ".into()));
                }
                Ok((0..self.count)
                    .map(|_| {
                        let v: Vec<f64> = (0..*support).map(|_| uniform(&mut rng, *value_lo, *value_hi)).collect();
                        TestFunction::sequence(&v)
                    })
                    .collect())
            }
        }
    }
}

/// All sequences on `{0, …, len-1}` with entries from `values`, excluding
/// the zero sequence.
pub fn enumerate_sequences(len: usize, values: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s: Vec<f64>| {
                values.iter().map(move |&v| {
                    let mut t = s.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out.retain(|s| s.iter().any(|v| *v != 0.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_reproducible() {
        let mut a = seeded(7);
        let mut b = seeded(7);
        for _ in 0..100 {
            let u = unit(&mut a);
            assert_eq!(u, unit(&mut b));
            assert!((0.0..1.0).contains(&u));
        }
        let mut c = seeded(8);
        assert_ne!(unit(&mut seeded(7)), unit(&mut c));
    }

    #[test]
    fn bump_sums_are_deterministic_and_bounded() {
        let spec = FamilySpec {
            kind: FamilyKind::BumpSums {
                max_terms: 5,
                center_lo: vec![-2.0],
                center_hi: vec![2.0],
                width_lo: vec![0.2],
                width_hi: vec![0.8],
                amplitude_lo: 0.5,
                amplitude_hi: 2.0,
            },
            count: 20,
            seed: 3,
        };
        let a = spec.generate(GroupSpec::Euclidean(1)).unwrap();
        assert_eq!(a, spec.generate(GroupSpec::Euclidean(1)).unwrap());
        for f in &a {
            let TestFunction::Bumps { bumps } = f else { panic!() };
            assert!((1..=5).contains(&bumps.len()));
            assert_eq!(f.eval(GroupSpec::Euclidean(1), &[20.0]), 0.0);
        }
        assert!(spec.generate(GroupSpec::Axb(1)).is_err());
    }

    #[test]
    fn axb_bumps_use_log_scale() {
        let b = Bump {
            center: vec![0.0, 0.0],
            width: vec![1.0, 1.0],
            amplitude: 1.0,
        };
        assert_eq!(b.eval(GroupSpec::Axb(1), &[0.0, 1.0]), 1.0);
        let e = b.eval(GroupSpec::Axb(1), &[0.0, std::f64::consts::E]);
        assert!((e - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn enumeration_counts() {
        let all = enumerate_sequences(4, &[-1.0, 0.0, 1.0, 2.0]);
        assert_eq!(all.len(), 255);
        let g = Grid::lattice_1d(-2, 6).unwrap();
        let f = TestFunction::sequence(&[0.0, 2.0, -1.0]).sample(&g).unwrap();
        assert_eq!(f.values()[3].re, 2.0);
        assert_eq!(f.values()[4].re, -1.0);
    }

    #[test]
    fn serde_roundtrip() {
        let spec = FamilySpec {
            kind: FamilyKind::LatticeSequences {
                support: 8,
                value_lo: -1.0,
                value_hi: 2.0,
            },
            count: 5,
            seed: 1,
        };
        let s = toml::to_string(&spec).unwrap();
        assert_eq!(toml::from_str::<FamilySpec>(&s).unwrap(), spec);
    }
}
