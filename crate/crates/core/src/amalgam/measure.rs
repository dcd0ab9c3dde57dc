//! Finite atomic measures with an optional absolutely continuous part.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SampledFunction;
use crate::group::GroupSpec;

/// `μ = Σ m_k δ_{a_k} + F·dx`.
#[derive(Clone, Debug)]
pub struct DiscreteMeasure {
    pub group: GroupSpec,
    pub atoms: Vec<(Vec<f64>, Complex64)>,
    pub density: Option<SampledFunction>,
}

impl DiscreteMeasure {
    pub fn new(
        group: GroupSpec,
        atoms: Vec<(Vec<f64>, Complex64)>,
        density: Option<SampledFunction>,
    ) -> Result<Self> {
        for (k, (p, m)) in atoms.iter().enumerate() {
            group.check_coords(p)?;
            if !(m.re.is_finite() && m.im.is_finite()) {
                return Err(Error::NonFinite { index: k });
            }
        }
        if let Some(d) = &density {
            if d.group() != group {
                return Err(Error::GroupMismatch(format!(
                    "density on {} for a measure on {}",
                    d.group().name(),
                    group.name()
                )));
            }
        }
        Ok(DiscreteMeasure {
            group,
            atoms,
            density,
        })
    }

    pub fn atoms(group: GroupSpec, atoms: Vec<(Vec<f64>, Complex64)>) -> Result<Self> {
        DiscreteMeasure::new(group, atoms, None)
    }

    /// `μ_F`, the measure with density `F` against left Haar measure.
    pub fn from_density(f: SampledFunction) -> Self {
        DiscreteMeasure {
            group: f.group(),
            atoms: Vec::new(),
            density: Some(f),
        }
    }

    pub fn dirac(group: GroupSpec, point: Vec<f64>) -> Result<Self> {
        DiscreteMeasure::atoms(group, vec![(point, Complex64::new(1.0, 0.0))])
    }

    /// `‖μ‖_M = Σ |m_k| + ∫ |F|`.
    pub fn total_variation(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|(_, m)| m.norm()).sum();
        let dens = self.density.as_ref().map_or(0.0, |d| {
            d.abs().iter().zip(d.grid().weights()).map(|(v, w)| v * w).sum()
        });
        atoms + dens
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn total_variation_adds_both_parts() {
        let g = Grid::euclidean_1d(0.0, 2.0, 200).unwrap();
        let f = SampledFunction::from_real_fn(g, |p| if p[0] < 1.0 { -2.0 } else { 0.0 }).unwrap();
        let mut mu = DiscreteMeasure::from_density(f);
        mu.atoms.push((vec![0.5], Complex64::new(3.0, 4.0)));
        assert!((mu.total_variation() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_atoms() {
        assert!(DiscreteMeasure::dirac(GroupSpec::Lattice(1), vec![0.5]).is_err());
        assert!(DiscreteMeasure::atoms(
            GroupSpec::Euclidean(1),
            vec![(vec![0.0], Complex64::new(f64::NAN, 0.0))]
        )
        .is_err());
    }
}
