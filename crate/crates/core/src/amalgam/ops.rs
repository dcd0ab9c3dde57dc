//! Translation operators and involutions.
//!
//! `L_g F(y) = F(g⁻¹y)`, `R_g F(y) = F(yg)` and `A_g F = Δ(g⁻¹)·R_{g⁻¹}F`.
//! Results are resampled onto the input grid; off-grid values are
//! interpolated and anything pulled in from outside the grid is zero.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{SampledFunction, MAX_DIM};
use crate::group::GroupSpec;

use super::DiscreteMeasure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "L", alias = "left")]
    L,
    #[serde(rename = "R", alias = "right")]
    R,
    #[serde(rename = "A")]
    A,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Involution {
    /// `F(x⁻¹)`
    Vee,
    /// `conj F(x⁻¹)`
    Nabla,
    /// `Δ(x⁻¹)·conj F(x⁻¹)`
    Star,
}

/// A resampled function together with the fraction of its expected
/// `L¹` mass that is still visible on the grid.
#[derive(Clone, Debug)]
pub struct Translated {
    pub function: SampledFunction,
    pub coverage: f64,
}

impl Translated {
    /// Set when part of the support left the grid.
    pub fn warning(&self) -> Option<String> {
        (self.coverage < 0.999).then(|| {
            format!(
                "translated support is truncated by the grid; coverage {:.4}",
                self.coverage
            )
        })
    }
}

fn l1_mass(f: &SampledFunction) -> f64 {
    f.abs()
        .iter()
        .zip(f.grid().weights())
        .filter(|(v, _)| **v > 0.0)
        .map(|(v, w)| v * w)
        .sum()
}

fn coverage(got: f64, expected: f64) -> f64 {
    if expected <= 0.0 || !expected.is_finite() {
        1.0
    } else {
        (got / expected).min(1.0)
    }
}

/// `T_g F` for `T ∈ {L, R, A}`.
pub fn translate(f: &SampledFunction, g: &[f64], dir: Direction) -> Result<Translated> {
    let group = f.group();
    group.check_coords(g)?;
    let dim = group.dim();
    let mut ginv = [0.0; MAX_DIM];
    group.inv_into(g, &mut ginv[..dim]);
    let ginv = &ginv[..dim];
    let (factor, expected_scale) = match dir {
        Direction::L => (1.0, 1.0),
        // ∫ |F(yg)| dy = Δ(g⁻¹) ∫ |F|
        Direction::R => (1.0, group.modular_raw(ginv)),
        Direction::A => (group.modular_raw(ginv), 1.0),
    };
    let grid = f.grid().clone();
    let out = SampledFunction::from_fn(grid, |y| {
        let mut s = [0.0; MAX_DIM];
        match dir {
            Direction::L => group.mul_into(ginv, y, &mut s[..dim]),
            Direction::R => group.mul_into(y, g, &mut s[..dim]),
            Direction::A => group.mul_into(y, ginv, &mut s[..dim]),
        }
        f.eval(&s[..dim]) * factor
    })?;
    let cov = coverage(l1_mass(&out), expected_scale * l1_mass(f));
    Ok(Translated {
        function: out,
        coverage: cov,
    })
}

/// `T_g μ`: atoms move to `g·a` (L), `a·g⁻¹` with mass `Δ(g⁻¹)·m` (R), or
/// `a·g` with unchanged mass (A); the density is translated as a function.
pub fn translate_measure(mu: &DiscreteMeasure, g: &[f64], dir: Direction) -> Result<DiscreteMeasure> {
    let group = mu.group;
    group.check_coords(g)?;
    let dim = group.dim();
    let mut ginv = vec![0.0; dim];
    group.inv_into(g, &mut ginv);
    let atoms = mu
        .atoms
        .iter()
        .map(|(a, m)| {
            let mut p = vec![0.0; dim];
            let mass = match dir {
                Direction::L => {
                    group.mul_into(g, a, &mut p);
                    *m
                }
                Direction::R => {
                    group.mul_into(a, &ginv, &mut p);
                    m * group.modular_raw(&ginv)
                }
                Direction::A => {
                    group.mul_into(a, g, &mut p);
                    *m
                }
            };
            if let GroupSpec::Lattice(_) = group {
                p.iter_mut().for_each(|v| *v = v.round());
            }
            (p, mass)
        })
        .collect();
    let density = match &mu.density {
        Some(d) => Some(translate(d, g, dir)?.function),
        None => None,
    };
    DiscreteMeasure::new(group, atoms, density)
}

/// `F^∨`, `F^∇` or `F^*`, resampled onto `F`'s grid.
pub fn involution(f: &SampledFunction, kind: Involution) -> Result<Translated> {
    let group = f.group();
    let dim = group.dim();
    let out = SampledFunction::from_fn(f.grid().clone(), |x| {
        let mut xi = [0.0; MAX_DIM];
        group.inv_into(x, &mut xi[..dim]);
        let v = f.eval(&xi[..dim]);
        match kind {
            Involution::Vee => v,
            Involution::Nabla => v.conj(),
            Involution::Star => v.conj() * group.modular_raw(&xi[..dim]),
        }
    })?;
    // the reference mass uses the same integrand read through the inversion
    let expected: f64 = {
        let g = f.grid();
        let mut buf = [0.0; MAX_DIM];
        let mut xi = [0.0; MAX_DIM];
        let mut acc = 0.0;
        for (k, v) in f.values().iter().enumerate() {
            if *v == Complex64::new(0.0, 0.0) {
                continue;
            }
            // ∫ |F(x⁻¹)| dx = ∫ |F(x)| Δ(x⁻¹) dx
            g.point_into(k, &mut buf[..dim]);
            group.inv_into(&buf[..dim], &mut xi[..dim]);
            let mut m = v.norm() * g.weights()[k] * group.modular_raw(&xi[..dim]);
            if kind == Involution::Star {
                m *= group.modular_raw(&buf[..dim]);
            }
            acc += m;
        }
        acc
    };
    Ok(Translated {
        coverage: coverage(l1_mass(&out), expected),
        function: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bump(p: &[f64]) -> f64 {
        let r2: f64 = p.iter().map(|v| v * v).sum();
        (-r2).exp()
    }

    #[test]
    fn left_shift_moves_indicator() {
        let g = Grid::euclidean_1d(-1.0, 5.0, 600).unwrap();
        let f = SampledFunction::from_real_fn(g, |p| if (0.0..=1.0).contains(&p[0]) { 1.0 } else { 0.0 }).unwrap();
        let t = translate(&f, &[2.0], Direction::L).unwrap();
        assert!(t.warning().is_none());
        for (k, v) in t.function.values().iter().enumerate() {
            let y = t.function.grid().point(k)[0];
            let want = if (2.0..=3.0).contains(&y) { 1.0 } else { 0.0 };
            assert!((v.re - want).abs() < 1e-9, "{y}");
        }
    }

    #[test]
    fn axb_left_translation_matches_definition() {
        let g = Grid::axb_1d(0.05, 4.0, 3, 20).unwrap();
        let f = SampledFunction::from_real_fn(g, |p| bump(&[p[0], p[1].ln()])).unwrap();
        let grp = GroupSpec::Axb(1);
        let h = [0.3, 1.25];
        let t = translate(&f, &h, Direction::L).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(0.5f64..2.0)];
            let hinv = grp.inverse(&grp.element(h.to_vec()).unwrap()).unwrap();
            let s = grp.multiply(&hinv, &grp.element(x.to_vec()).unwrap()).unwrap();
            let want = bump(&[s.coords()[0], s.coords()[1].ln()]);
            assert!((t.function.eval(&x).re - want).abs() < 2e-3);
        }
    }

    #[test]
    fn adjoint_pair_is_identity_on_aligned_shifts() {
        let g = Grid::euclidean_nodes_1d(0.125, 4.0).unwrap();
        let f = SampledFunction::from_real_fn(g, |p| bump(p)).unwrap();
        let a = translate(&f, &[0.5], Direction::A).unwrap();
        let b = translate(&a.function, &[-0.5], Direction::A).unwrap();
        for (k, (x, y)) in f.values().iter().zip(b.function.values()).enumerate() {
            let t = f.grid().point(k)[0];
            if t.abs() <= 3.5 {
                assert!((x - y).norm() < 1e-15);
            }
        }
        // on ℝ, A_x F(y) = F(y - x)
        assert!((a.function.eval(&[0.5]).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn right_translation_rescales_mass() {
        let g = Grid::axb_1d(0.05, 6.0, 5, 16).unwrap();
        let f = SampledFunction::from_real_fn(g, |p| bump(&[p[0], p[1].ln()])).unwrap();
        let r = translate(&f, &[0.0, 2.0], Direction::R).unwrap();
        let i0 = f.haar_integral().unwrap().re;
        let i1 = r.function.haar_integral().unwrap().re;
        // ∫ F(y·(0,2)) dy = Δ((0,2)⁻¹) ∫ F = 2 ∫ F
        assert!((i1 / i0 - 2.0).abs() < 1e-2, "{}", i1 / i0);
        assert!(r.coverage > 0.99);
        let far = translate(&f, &[100.0, 1.0], Direction::L).unwrap();
        assert!(far.warning().is_some());
    }

    #[test]
    fn involutions() {
        let g = Grid::lattice_1d(-5, 5).unwrap();
        let f = SampledFunction::from_fn(g, |p| Complex64::new(p[0], 1.0)).unwrap();
        let v = involution(&involution(&f, Involution::Vee).unwrap().function, Involution::Vee).unwrap();
        assert_eq!(v.function.values(), f.values());
        let e = Grid::euclidean_1d(-2.0, 2.0, 40).unwrap();
        let f = SampledFunction::from_fn(e, |p| Complex64::new(p[0], p[0] * p[0])).unwrap();
        let s = involution(&f, Involution::Star).unwrap();
        let n = involution(&f, Involution::Nabla).unwrap();
        assert_eq!(s.function.values(), n.function.values());

        let a = Grid::axb_1d(0.05, 4.0, 2, 16).unwrap();
        let f = SampledFunction::from_real_fn(a, |p| bump(&[p[0], p[1].ln()])).unwrap();
        let s = involution(&f, Involution::Star).unwrap();
        let grp = GroupSpec::Axb(1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let y = [rng.gen_range(-0.5..0.5), rng.gen_range(0.7f64..1.4)];
            let yi = grp.inverse(&grp.element(y.to_vec()).unwrap()).unwrap();
            let want = grp.modular(&yi) * f.eval(yi.coords()).re;
            assert!((s.function.eval(&y).re - want).abs() < 1e-2 * want.max(1e-3));
        }
    }

    #[test]
    fn measure_translations() {
        let grp = GroupSpec::Axb(1);
        let mu = DiscreteMeasure::atoms(grp, vec![(vec![1.0, 2.0], Complex64::new(1.0, 0.0))]).unwrap();
        let g = [3.0, 4.0];
        let l = translate_measure(&mu, &g, Direction::L).unwrap();
        assert_eq!(l.atoms[0].0, vec![3.0 + 4.0, 8.0]);
        let a = translate_measure(&mu, &g, Direction::A).unwrap();
        assert_eq!(a.atoms[0].0, vec![1.0 + 2.0 * 3.0, 8.0]);
        assert_eq!(a.atoms[0].1.re, 1.0);
        let r = translate_measure(&mu, &g, Direction::R).unwrap();
        // a·g⁻¹ = (1,2)·(-0.75, 0.25) = (-0.5, 0.5), mass Δ(g⁻¹) = 4
        assert_eq!(r.atoms[0].0, vec![-0.5, 0.5]);
        assert_eq!(r.atoms[0].1.re, 4.0);
    }
}
