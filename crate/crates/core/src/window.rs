//! Relatively compact windows (neighborhood and compact-set descriptors).
//!
//! A window is a closed coordinate box `[lo, hi]` in group coordinates. On
//! `ℝⁿ`/`ℤⁿ` the left translate `x·Q` is the shifted box. On the `ax+b`
//! group the last coordinate is a dilation range, so
//! `U(r,β) = [-r,r]ⁿ × [β⁻¹, β]` and `(x,a)·U(r,β) = (x + a[-r,r]ⁿ) × a[β⁻¹,β]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::grid::MAX_DIM;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Window {
        Window { lo, hi }
    }

    /// `[lo, hi]` on the line.
    pub fn interval(lo: f64, hi: f64) -> Window {
        Window::new(vec![lo], vec![hi])
    }

    /// `[-r, r]ⁿ`.
    pub fn centered(n: usize, r: f64) -> Window {
        Window::new(vec![-r; n], vec![r; n])
    }

    /// The identity alone; open in `ℤⁿ`.
    pub fn singleton(n: usize) -> Window {
        Window::new(vec![0.0; n], vec![0.0; n])
    }

    /// `U(r, β) = [-r, r]ⁿ × [1/β, β]` on the `n`-dimensional `ax+b` group.
    pub fn axb(n: usize, r: f64, beta: f64) -> Window {
        let mut lo = vec![-r; n];
        let mut hi = vec![r; n];
        lo.push(1.0 / beta);
        hi.push(beta);
        Window::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn validate(&self, group: GroupSpec) -> Result<()> {
        if self.lo.len() != group.dim() || self.hi.len() != group.dim() {
            return Err(Error::DimensionMismatch {
                expected: group.dim(),
                got: self.lo.len().min(self.hi.len()),
            });
        }
        for (l, h) in self.lo.iter().zip(&self.hi) {
            if !(l.is_finite() && h.is_finite()) {
                return Err(Error::UnboundedWindow(format!(
                    "bounds [{l}, {h}] are not finite"
                )));
            }
            if l > h {
                return Err(Error::param("window", format!("empty side [{l}, {h}]")));
            }
        }
        if let GroupSpec::Axb(n) = group {
            if self.lo[n] <= 0.0 {
                return Err(Error::UnboundedWindow(
                    "dilation range must stay away from 0".into(),
                ));
            }
        }
        Ok(())
    }

    fn tol(v: f64) -> f64 {
        1e-9 * (1.0 + v.abs())
    }

    /// Closed membership of group coordinates `u`.
    pub fn contains(&self, u: &[f64]) -> bool {
        u.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&l, &h))| v >= l - Self::tol(l) && v <= h + Self::tol(h))
    }

    pub fn is_subset_of(&self, other: &Window) -> bool {
        self.lo.iter().zip(&other.lo).all(|(a, b)| a >= b)
            && self.hi.iter().zip(&other.hi).all(|(a, b)| a <= b)
    }

    /// Coordinate box of the left translate `x·W`.
    pub fn left_translate_box(&self, group: GroupSpec, x: &[f64], lo: &mut [f64], hi: &mut [f64]) {
        match group {
            GroupSpec::Euclidean(_) | GroupSpec::Lattice(_) => {
                for d in 0..x.len() {
                    lo[d] = x[d] + self.lo[d];
                    hi[d] = x[d] + self.hi[d];
                }
            }
            GroupSpec::Axb(n) => {
                let a = x[n];
                for d in 0..n {
                    lo[d] = x[d] + a * self.lo[d];
                    hi[d] = x[d] + a * self.hi[d];
                }
                lo[n] = a * self.lo[n];
                hi[n] = a * self.hi[n];
            }
        }
    }

    fn corners(&self) -> impl Iterator<Item = [f64; MAX_DIM]> + '_ {
        let dim = self.dim();
        (0..(1usize << dim)).map(move |mask| {
            let mut c = [0.0; MAX_DIM];
            for d in 0..dim {
                c[d] = if mask & (1 << d) != 0 { self.hi[d] } else { self.lo[d] };
            }
            c
        })
    }

    /// Bounding box of `left · W · right`. Exact: in coordinates the map
    /// `u ↦ left·u·right` is affine along each side of the box on all three
    /// groups, so its extremes sit at corners.
    pub fn translate_bbox(
        &self,
        group: GroupSpec,
        left: &[f64],
        right: Option<&[f64]>,
    ) -> (Vec<f64>, Vec<f64>) {
        let dim = self.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        let mut t1 = [0.0; MAX_DIM];
        let mut t2 = [0.0; MAX_DIM];
        for c in self.corners() {
            group.mul_into(left, &c[..dim], &mut t1[..dim]);
            let img = match right {
                Some(r) => {
                    group.mul_into(&t1[..dim], r, &mut t2[..dim]);
                    &t2[..dim]
                }
                None => &t1[..dim],
            };
            for d in 0..dim {
                lo[d] = lo[d].min(img[d]);
                hi[d] = hi[d].max(img[d]);
            }
        }
        (lo, hi)
    }

    /// Whether `p ∈ left · W · right`, i.e. `left⁻¹ · p · right⁻¹ ∈ W`.
    pub fn translate_contains(
        &self,
        group: GroupSpec,
        left: &[f64],
        right: Option<&[f64]>,
        p: &[f64],
    ) -> bool {
        let dim = self.dim();
        let mut u = [0.0; MAX_DIM];
        group.left_quotient_into(left, p, &mut u[..dim]);
        if let Some(r) = right {
            let mut rinv = [0.0; MAX_DIM];
            let mut v = [0.0; MAX_DIM];
            group.inv_into(r, &mut rinv[..dim]);
            group.mul_into(&u[..dim], &rinv[..dim], &mut v[..dim]);
            return self.contains(&v[..dim]);
        }
        self.contains(&u[..dim])
    }

    /// Per-axis tent value in `[0, 1]` of the window-local coordinates `u`:
    /// `1` at the center, `0` on and outside the boundary. The dilation axis of
    /// `ax+b` windows is measured in `log a`. Degenerate sides act as
    /// indicators of their single value.
    pub fn tent(&self, group: GroupSpec, u: &[f64]) -> f64 {
        let mut v = 1.0;
        for d in 0..self.dim() {
            let (l, h, x) = if matches!(group, GroupSpec::Axb(n) if n == d) {
                if u[d] <= 0.0 {
                    return 0.0;
                }
                (self.lo[d].ln(), self.hi[d].ln(), u[d].ln())
            } else {
                (self.lo[d], self.hi[d], u[d])
            };
            let half = 0.5 * (h - l);
            let c = 0.5 * (h + l);
            if half <= 0.0 {
                if (x - c).abs() > Self::tol(c) {
                    return 0.0;
                }
                continue;
            }
            let t = 1.0 - (x - c).abs() / half;
            if t <= 0.0 {
                return 0.0;
            }
            v *= t;
        }
        v
    }

    /// Gauge of the window-local coordinates: `< 1` strictly inside, `1` on
    /// the boundary.
    pub fn gauge(&self, group: GroupSpec, u: &[f64]) -> f64 {
        let mut g: f64 = 0.0;
        for d in 0..self.dim() {
            let (l, h, x) = if matches!(group, GroupSpec::Axb(n) if n == d) {
                if u[d] <= 0.0 {
                    return f64::INFINITY;
                }
                (self.lo[d].ln(), self.hi[d].ln(), u[d].ln())
            } else {
                (self.lo[d], self.hi[d], u[d])
            };
            let half = 0.5 * (h - l);
            let c = 0.5 * (h + l);
            let r = if half <= 0.0 {
                if (x - c).abs() > Self::tol(c) {
                    f64::INFINITY
                } else {
                    0.0
                }
            } else {
                (x - c).abs() / half
            };
            g = g.max(r);
        }
        g
    }

    /// Haar measure of the window itself.
    pub fn haar_volume(&self, group: GroupSpec) -> f64 {
        match group {
            GroupSpec::Euclidean(_) => self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product(),
            GroupSpec::Lattice(_) => self
                .lo
                .iter()
                .zip(&self.hi)
                .map(|(l, h)| (h.floor() - l.ceil() + 1.0).max(0.0))
                .product(),
            GroupSpec::Axb(n) => {
                let x: f64 = (0..n).map(|d| self.hi[d] - self.lo[d]).product();
                // ∫ da / a^{n+1}
                let (a, b) = (self.lo[n], self.hi[n]);
                x * (a.powi(-(n as i32)) - b.powi(-(n as i32))) / n as f64
            }
        }
    }
}
