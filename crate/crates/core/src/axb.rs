//! Mixed-norm machinery on the `ax+b` group: ball weights `ṽ_{k,j}`, the
//! sequence norm `ℓ^{p,q}(ṽ)`, the right-translation weight `w(y, b)` and
//! the convolution relation it controls.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::components::{
    check_doubling, ball_integral, step_function, DoublingProbes, GlobalComponent, NormValue,
    WeightFamily, WeightFunction,
};
use crate::convolution::{verify_embedding, EmbeddingReport, EmbeddingSetup};
use crate::discretization::WellSpreadSet;
use crate::error::{Error, Result};
use crate::family::TestFunction;
use crate::grid::Grid;
use crate::group::GroupSpec;
use crate::window::Window;

/// Midpoint cells across a ball diameter for `ṽ`; matches the default of
/// the doubling probes.
pub const TILDE_CELLS: usize = 128;

/// `w(y, b) = b^{n(1+1/q)}·(1 + |y|/b)^{α/p}`.
pub fn right_translation_bound(y: f64, b: f64, p: f64, q: f64, alpha: f64, n: usize) -> f64 {
    let nf = n as f64;
    b.powf(nf * (1.0 + 1.0 / q)) * (1.0 + y.abs() / b).powf(alpha / p)
}

/// `w` as a weight on the group.
pub fn translation_weight(n: usize, p: f64, q: f64, alpha: f64) -> WeightFunction {
    WeightFamily::AxbTranslation { n, p, q, alpha }.into()
}

/// `ṽ_{k,j} = ∫_{B(x_{k,j}, a_j)} v`, in lattice order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TildeWeight {
    pub n: usize,
    pub weight: WeightFunction,
    pub labels: Vec<(Vec<i64>, i64)>,
    /// Ball radius `a_j` per entry.
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl TildeWeight {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One line per entry: `k_1,…,k_n,j,a_j,x_1,…,x_n,tilde_v`.
    pub fn to_csv(&self, x: &WellSpreadSet) -> String {
        let mut s = String::new();
        for d in 0..self.n {
            s.push_str(&format!("k{},", d + 1));
        }
        s.push_str("j,a");
        for d in 0..self.n {
            s.push_str(&format!(",x{}", d + 1));
        }
        s.push_str(",tilde_v\n");
        for (i, (k, j)) in self.labels.iter().enumerate() {
            for c in k {
                s.push_str(&format!("{c},"));
            }
            s.push_str(&format!("{j},{}", self.radii[i]));
            for c in &x.points[i][..self.n] {
                s.push_str(&format!(",{c}"));
            }
            s.push_str(&format!(",{}\n", self.values[i]));
        }
        s
    }
}

fn lattice_of(x: &WellSpreadSet) -> Result<(usize, &crate::discretization::AxbLattice)> {
    let GroupSpec::Axb(n) = x.group else {
        return Err(Error::GroupMismatch(format!("need an ax+b lattice, got {} points", x.group.name())));
    };
    let lat = x
        .lattice
        .as_ref()
        .ok_or_else(|| Error::param("lattice", "point set carries no (k, j) labels"))?;
    Ok((n, lat))
}

/// Ball quadrature of `v` around every lattice point, with the same midpoint
/// rule as the doubling check.
pub fn compute_tilde_v(v: &WeightFunction, x: &WellSpreadSet) -> Result<TildeWeight> {
    compute_tilde_v_with(v, x, TILDE_CELLS)
}

pub fn compute_tilde_v_with(v: &WeightFunction, x: &WellSpreadSet, cells: usize) -> Result<TildeWeight> {
    v.validate()?;
    let (n, lat) = lattice_of(x)?;
    let cells = cells.max(2) + cells % 2;
    let radii: Vec<f64> = x.points.iter().map(|p| p[n]).collect();
    let values: Vec<f64> = x
        .points
        .par_iter()
        .zip(&radii)
        .map(|(p, &a)| {
            let t = ball_integral(v, &p[..n], a, cells)?;
            if t > 0.0 {
                Ok(t)
            } else {
                Err(Error::NonIntegrable {
                    center: p[..n].to_vec(),
                    radius: a,
                })
            }
        })
        .collect::<Result<_>>()?;
    Ok(TildeWeight {
        n,
        weight: v.clone(),
        labels: lat.labels.clone(),
        radii,
        values,
    })
}

/// `(Σ_j (Σ_k |λ_{k,j}|^p ṽ_{k,j})^{q/p} a_j^{-n})^{1/q}`, and
/// `sup_j (Σ_k |λ_{k,j}|^p ṽ_{k,j})^{1/p}` for `q = ∞`.
pub fn lpq_discrete_norm(lambda: &[f64], tv: &TildeWeight, p: f64, q: f64) -> Result<f64> {
    if lambda.len() != tv.len() {
        return Err(Error::IndexMismatch(format!(
            "{} coefficients for {} lattice points",
            lambda.len(),
            tv.len()
        )));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param("p", format!("need 0 < p < ∞, got {p}")));
    }
    if !(q > 0.0) {
        return Err(Error::param("q", format!("need q > 0, got {q}")));
    }
    // rows keyed by j, in first-seen order
    let mut rows: Vec<(i64, f64, f64)> = Vec::new();
    for ((l, (_, j)), (v, a)) in lambda.iter().zip(&tv.labels).zip(tv.values.iter().zip(&tv.radii)) {
        let term = if *l == 0.0 { 0.0 } else { l.abs().powf(p) * v };
        match rows.iter_mut().find(|r| r.0 == *j) {
            Some(r) => r.1 += term,
            None => rows.push((*j, term, *a)),
        }
    }
    let nf = tv.n as f64;
    Ok(if q.is_infinite() {
        rows.iter().map(|r| r.1.powf(1.0 / p)).fold(0.0, f64::max)
    } else {
        rows.iter()
            .filter(|r| r.1 > 0.0)
            .map(|r| r.1.powf(q / p) * r.2.powf(-nf))
            .sum::<f64>()
            .powf(1.0 / q)
    })
}

/// Smallest and largest observed ratio `‖λ | (L^{p,q}(v))_d(X, U)‖ / ‖λ | ℓ^{p,q}(ṽ)‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
}

impl Bracket {
    /// `hi / lo`.
    pub fn width(&self) -> f64 {
        self.hi / self.lo
    }
}

/// Compares the sequence-space norm through step functions `Σ|λ|χ_{x U}`
/// on `grid` with the closed-form display over the given coefficient
/// vectors.
pub fn discrete_norm_bracket(
    x: &WellSpreadSet,
    tv: &TildeWeight,
    lambdas: &[Vec<f64>],
    window: &Window,
    grid: &Grid,
    p: f64,
    q: f64,
) -> Result<Bracket> {
    if lambdas.is_empty() {
        return Err(Error::EmptyInput("coefficient vectors"));
    }
    let y = GlobalComponent::mixed(p, q, tv.weight.clone());
    y.validate()?;
    let ratios: Vec<f64> = lambdas
        .par_iter()
        .map(|lam| -> Result<f64> {
            let s = step_function(grid, &x.points, lam, window, None)?;
            let c = match y.norm_of_abs(grid, &s)? {
                NormValue::Finite(c) => c,
                NormValue::Overflow => f64::INFINITY,
            };
            let d = lpq_discrete_norm(lam, tv, p, q)?;
            Ok(c / d)
        })
        .collect::<Result<_>>()?;
    Ok(Bracket {
        lo: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        hi: ratios.iter().cloned().fold(0.0, f64::max),
        samples: ratios.len(),
    })
}

/// `max(w₁/w₂, w₂/w₁)` for the bracket widths of two windows.
pub fn bracket_drift(a: &Bracket, b: &Bracket) -> f64 {
    let (x, y) = (a.width(), b.width());
    (x / y).max(y / x)
}

/// For each `A` in `a_max`, `sup_{0 < a ≤ A, x} v(x + a·y)/v(x)` over `x`
/// in `xs` and `a` on a log grid down to `A·2⁻²⁰`.
pub fn quotient_sweep(v: &WeightFunction, y: f64, xs: &[f64], a_max: &[f64]) -> Vec<(f64, f64)> {
    a_max
        .iter()
        .map(|&cap| {
            let mut best: f64 = 0.0;
            for s in 0..=80 {
                let a = cap * 2f64.powf(-(s as f64) / 4.0);
                for &x in xs {
                    let den = v.eval_radial(&[x]);
                    if den > 0.0 {
                        best = best.max(v.eval_radial(&[x + a * y]) / den);
                    }
                }
            }
            (cap, best)
        })
        .collect()
}

/// Parameters of [`verify_axb_convolution`].
#[derive(Clone, Debug)]
pub struct AxbConvolutionSetup<'a> {
    pub v: &'a WeightFunction,
    pub p: f64,
    pub q: f64,
    /// Doubling exponent for `w`; taken from `v`'s certificate, or certified
    /// on the spot, when absent.
    pub alpha: Option<f64>,
    pub window: Window,
    /// Replace `w` by `1` (a negative control).
    pub unweighted_right: bool,
}

/// Checks `W(L∞, L^{p,q}(v)) * W(L∞, L^r_w) ↪ W(L∞, L^{p,q}(v))`,
/// `r = min(1, p, q)`, on `grid` and its refinements.
pub fn verify_axb_convolution(
    setup: &AxbConvolutionSetup<'_>,
    left: &[TestFunction],
    right: &[TestFunction],
    grid: &Arc<Grid>,
    refinements: usize,
) -> Result<EmbeddingReport> {
    let GroupSpec::Axb(n) = grid.group() else {
        return Err(Error::GroupMismatch("the ax+b relation needs an ax+b grid".into()));
    };
    let alpha = match setup.alpha {
        Some(a) => a,
        None => match &setup.v.certificates.doubling {
            Some(c) => c.alpha,
            None => match check_doubling(setup.v, &DoublingProbes::standard(n))? {
                crate::components::DoublingVerdict::Doubling(c) => c.alpha,
                crate::components::DoublingVerdict::Fails(f) => {
                    return Err(Error::param(
                        "v",
                        format!("weight is not doubling (runaway growth around {:?})", f.center),
                    ))
                }
            },
        },
    };
    let w = if setup.unweighted_right {
        WeightFunction::constant(1.0)
    } else {
        translation_weight(n, setup.p, setup.q, alpha)
    };
    let y = GlobalComponent::mixed(setup.p, setup.q, setup.v.clone());
    y.validate()?;
    let es = EmbeddingSetup::axb_relation(y, w, &setup.window);
    verify_embedding(&es, left, right, grid, refinements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_axb_lattice, AxbLatticeSpec};

    fn lattice(k: (i64, i64), j: (i64, i64)) -> WellSpreadSet {
        build_axb_lattice(&AxbLatticeSpec {
            n: 1,
            a0: 0.5,
            b0: 2.0,
            k_range: k,
            j_range: j,
        })
        .unwrap()
    }

    #[test]
    fn translation_bound_values() {
        assert_eq!(right_translation_bound(0.0, 1.0, 1.0, 1.0, 1.0, 1), 1.0);
        assert!((right_translation_bound(0.0, 2.0, 1.0, 1.0, 1.0, 1) - 4.0).abs() < 1e-12);
        assert!((right_translation_bound(3.0, 1.0, 0.5, 2.0, 1.0, 1) - 16.0).abs() < 1e-12);
        let w = translation_weight(1, 0.5, 2.0, 1.0);
        assert!((w.eval(GroupSpec::Axb(1), &[3.0, 1.0]) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn tilde_v_closed_forms() {
        let x = lattice((-3, 3), (-1, 1));
        let t = compute_tilde_v(&WeightFunction::constant(1.0), &x).unwrap();
        for (v, a) in t.values.iter().zip(&t.radii) {
            assert!((v - 2.0 * a).abs() < 1e-6 * a);
        }
        let t = compute_tilde_v(&WeightFunction::shifted_power(1.0), &x).unwrap();
        for ((v, a), p) in t.values.iter().zip(&t.radii).zip(&x.points) {
            if p[0] == 0.0 {
                assert!((v - (2.0 * a + a * a)).abs() < 1e-9);
            }
        }
        let a = 0.75;
        let s = ball_integral(&WeightFunction::power(1.0), &[3.0 * a], a, TILDE_CELLS).unwrap();
        assert!((s - 6.0 * a * a).abs() <= 1e-4 * 6.0 * a * a);
    }

    #[test]
    fn tilde_v_needs_lattice_labels() {
        let x = WellSpreadSet::new(GroupSpec::Axb(1), vec![vec![0.0, 1.0]]).unwrap();
        assert!(compute_tilde_v(&WeightFunction::constant(1.0), &x).is_err());
        let e = WellSpreadSet::regular(GroupSpec::Euclidean(1), 1.0, 0, 2).unwrap();
        assert!(matches!(
            compute_tilde_v(&WeightFunction::constant(1.0), &e),
            Err(Error::GroupMismatch(_))
        ));
    }

    #[test]
    fn display_small_cases() {
        let x = lattice((0, 1), (0, 0));
        let t = compute_tilde_v(&WeightFunction::constant(1.0), &x).unwrap();
        assert!((lpq_discrete_norm(&[1.0, 0.0], &t, 1.0, 1.0).unwrap() - 2.0).abs() < 1e-9);
        assert!((lpq_discrete_norm(&[1.0, 1.0], &t, 1.0, 1.0).unwrap() - 4.0).abs() < 1e-9);
        assert!(lpq_discrete_norm(&[1.0], &t, 1.0, 1.0).is_err());
        let x = lattice((0, 0), (-1, 1));
        let t = compute_tilde_v(&WeightFunction::constant(1.0), &x).unwrap();
        // a_j ∈ {2, 1, 1/2}: rows contribute 2a_j^{1-n} each for p = q = 1
        let v = lpq_discrete_norm(&[1.0, 1.0, 1.0], &t, 1.0, 1.0).unwrap();
        assert!((v - 6.0).abs() < 1e-9);
        let sup = lpq_discrete_norm(&[1.0, 1.0, 1.0], &t, 1.0, f64::INFINITY).unwrap();
        assert!((sup - 4.0).abs() < 1e-9);
    }

    #[test]
    fn display_tracks_step_function_norm() {
        let x = lattice((-6, 6), (-1, 1));
        let grid = Grid::axb_1d(1.0 / 16.0, 16.0, 3, 8).unwrap();
        let u = Window::axb(1, 1.0, 2.0);
        let mut rng = crate::family::seeded(5);
        let lams: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..x.len()).map(|_| crate::family::unit(&mut rng)).collect())
            .collect();
        for v in [WeightFunction::constant(1.0), WeightFunction::shifted_power(2.0)] {
            let t = compute_tilde_v(&v, &x).unwrap();
            for (p, q) in [(1.0, 1.0), (0.5, 1.0), (1.0, f64::INFINITY)] {
                let b = discrete_norm_bracket(&x, &t, &lams, &u, &grid, p, q).unwrap();
                assert!(b.lo > 0.0 && b.hi.is_finite(), "{b:?}");
                assert!(b.width() < 20.0, "{p} {q} {b:?}");
            }
        }
    }

    #[test]
    fn quotient_is_unbounded_for_polynomial_weight() {
        let sweep = quotient_sweep(&WeightFunction::shifted_power(2.0), 1.0, &[0.0, 1.0, -1.0], &[1.0, 10.0, 100.0]);
        assert!(sweep.windows(2).all(|w| w[1].1 > 4.0 * w[0].1));
    }
}
