//! The three concrete locally compact groups: `ℝⁿ`, `ℤⁿ` and the `ax+b` group
//! `ℝⁿ ⋊ ℝ₊*`.
//!
//! Elements are stored as flat coordinate vectors. For the `ax+b` group the
//! last coordinate is the dilation `a > 0` and the first `n` coordinates are
//! the translation part `x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum GroupSpec {
    /// `ℝⁿ` under addition.
    Euclidean(usize),
    /// `ℤⁿ` under addition, counting measure.
    Lattice(usize),
    /// `(x,a)·(y,b) = (x + a·y, a·b)` with `x ∈ ℝⁿ`, `a > 0`.
    Axb(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    coords: Vec<f64>,
}

impl GroupElement {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Translation part for `ax+b` elements; the whole vector otherwise.
    pub fn translation(&self, group: GroupSpec) -> &[f64] {
        &self.coords[..group.n()]
    }

    /// Dilation part of an `ax+b` element, `1` on abelian groups.
    pub fn scale(&self, group: GroupSpec) -> f64 {
        match group {
            GroupSpec::Axb(n) => self.coords[n],
            _ => 1.0,
        }
    }
}

impl GroupSpec {
    /// The `n` of `ℝⁿ`, `ℤⁿ` or `ℝⁿ ⋊ ℝ₊*`.
    pub fn n(self) -> usize {
        match self {
            GroupSpec::Euclidean(n) | GroupSpec::Lattice(n) | GroupSpec::Axb(n) => n,
        }
    }

    /// Number of coordinates of an element.
    pub fn dim(self) -> usize {
        match self {
            GroupSpec::Axb(n) => n + 1,
            _ => self.n(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupSpec::Euclidean(_) => "euclidean",
            GroupSpec::Lattice(_) => "lattice",
            GroupSpec::Axb(_) => "axb",
        }
    }

    pub fn validate(self) -> Result<()> {
        if self.n() == 0 {
            return Err(Error::param("n", "group dimension must be at least 1"));
        }
        Ok(())
    }

    /// Abelian groups are IN groups; the `ax+b` group is not.
    pub fn is_in_group(self) -> bool {
        !matches!(self, GroupSpec::Axb(_))
    }

    pub fn is_unimodular(self) -> bool {
        !matches!(self, GroupSpec::Axb(_))
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, GroupSpec::Lattice(_))
    }

    pub fn element(self, coords: Vec<f64>) -> Result<GroupElement> {
        self.check_coords(&coords)?;
        Ok(GroupElement { coords })
    }

    /// `ax+b` element from translation part and dilation.
    pub fn axb_element(self, x: &[f64], a: f64) -> Result<GroupElement> {
        let mut coords = x.to_vec();
        coords.push(a);
        self.element(coords)
    }

    pub fn identity(self) -> GroupElement {
        let mut coords = vec![0.0; self.dim()];
        if let GroupSpec::Axb(n) = self {
            coords[n] = 1.0;
        }
        GroupElement { coords }
    }

    pub fn check_coords(self, coords: &[f64]) -> Result<()> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: coords.len(),
            });
        }
        let invalid = |reason: &str| Error::InvalidElement {
            coords: coords.to_vec(),
            reason: reason.to_string(),
        };
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("non-finite coordinate"));
        }
        match self {
            GroupSpec::Lattice(_) if coords.iter().any(|c| c.fract() != 0.0) => {
                Err(invalid("lattice coordinates must be integers"))
            }
            GroupSpec::Axb(n) if coords[n] <= 0.0 => Err(invalid("dilation must be positive")),
            _ => Ok(()),
        }
    }

    pub fn multiply(self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check_coords(&g.coords)?;
        self.check_coords(&h.coords)?;
        let mut out = vec![0.0; self.dim()];
        self.mul_into(&g.coords, &h.coords, &mut out);
        Ok(GroupElement { coords: out })
    }

    pub fn inverse(self, g: &GroupElement) -> Result<GroupElement> {
        self.check_coords(&g.coords)?;
        let mut out = vec![0.0; self.dim()];
        self.inv_into(&g.coords, &mut out);
        Ok(GroupElement { coords: out })
    }

    /// Density of left Haar measure with respect to Lebesgue (or counting)
    /// measure in the coordinates: `a^{-(n+1)}` on `ax+b`, `1` otherwise.
    pub fn haar_density(self, g: &GroupElement) -> f64 {
        self.haar_density_raw(&g.coords)
    }

    /// Modular function: `Δ(x,a) = a^{-n}` on `ax+b`, `1` otherwise.
    pub fn modular(self, g: &GroupElement) -> f64 {
        self.modular_raw(&g.coords)
    }

    // Unchecked coordinate-level kernels used by the sampled-function code.

    pub(crate) fn mul_into(self, g: &[f64], h: &[f64], out: &mut [f64]) {
        match self {
            GroupSpec::Euclidean(_) | GroupSpec::Lattice(_) => {
                for ((o, a), b) in out.iter_mut().zip(g).zip(h) {
                    *o = a + b;
                }
            }
            GroupSpec::Axb(n) => {
                let a = g[n];
                for d in 0..n {
                    out[d] = g[d] + a * h[d];
                }
                out[n] = a * h[n];
            }
        }
    }

    pub(crate) fn inv_into(self, g: &[f64], out: &mut [f64]) {
        match self {
            GroupSpec::Euclidean(_) | GroupSpec::Lattice(_) => {
                for (o, a) in out.iter_mut().zip(g) {
                    *o = -a;
                }
            }
            GroupSpec::Axb(n) => {
                let inv_a = 1.0 / g[n];
                for d in 0..n {
                    out[d] = -g[d] * inv_a;
                }
                out[n] = inv_a;
            }
        }
    }

    /// `g⁻¹·h` without allocating.
    pub(crate) fn left_quotient_into(self, g: &[f64], h: &[f64], out: &mut [f64]) {
        match self {
            GroupSpec::Euclidean(_) | GroupSpec::Lattice(_) => {
                for ((o, a), b) in out.iter_mut().zip(g).zip(h) {
                    *o = b - a;
                }
            }
            GroupSpec::Axb(n) => {
                let inv_a = 1.0 / g[n];
                for d in 0..n {
                    out[d] = (h[d] - g[d]) * inv_a;
                }
                out[n] = h[n] * inv_a;
            }
        }
    }

    pub(crate) fn haar_density_raw(self, g: &[f64]) -> f64 {
        match self {
            GroupSpec::Axb(n) => g[n].powi(-(n as i32 + 1)),
            _ => 1.0,
        }
    }

    pub(crate) fn modular_raw(self, g: &[f64]) -> f64 {
        match self {
            GroupSpec::Axb(n) => g[n].powi(-(n as i32)),
            _ => 1.0,
        }
    }
}
