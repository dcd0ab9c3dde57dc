//! Doubling weights on `ℝⁿ`: `∫_{B(x,tr)} v ≤ c·t^α·∫_{B(x,r)} v`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::weight::WeightFunction;

/// Probe configuration for [`check_doubling`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingProbes {
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub scales: Vec<f64>,
    /// Midpoint cells across a ball diameter (per axis).
    #[serde(default = "default_cells")]
    pub cells_per_diameter: usize,
    /// Growth factor of `log(ratio at t = 2)` per radius octave that counts
    /// as runaway growth.
    #[serde(default = "default_growth")]
    pub growth_threshold: f64,
    /// Consecutive runaway octaves needed to reject the weight.
    #[serde(default = "default_octaves")]
    pub octaves: usize,
}

fn default_cells() -> usize {
    128
}
fn default_growth() -> f64 {
    1.5
}
fn default_octaves() -> usize {
    4
}

impl DoublingProbes {
    /// Centers at the origin and at `±{1/2, 1, 3, 8}` along every axis, radii
    /// `2^k` for `k = -4..=6`, scales `{2, 4, 8}`.
    pub fn standard(n: usize) -> DoublingProbes {
        let mut centers = vec![vec![0.0; n]];
        for d in 0..n {
            for s in [0.5, 1.0, 3.0, 8.0] {
                for sign in [-1.0, 1.0] {
                    let mut c = vec![0.0; n];
                    c[d] = sign * s;
                    centers.push(c);
                }
            }
        }
        DoublingProbes {
            centers,
            radii: (-4..=6).map(|k| 2f64.powi(k)).collect(),
            scales: vec![2.0, 4.0, 8.0],
            cells_per_diameter: if n <= 2 { 128 } else { 24 },
            growth_threshold: default_growth(),
            octaves: default_octaves(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.centers.is_empty() || self.radii.is_empty() || self.scales.is_empty() {
            return Err(Error::EmptyInput("doubling probes"));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::param("radii", "must be finite and positive"));
        }
        if self.scales.iter().any(|t| !(t.is_finite() && *t >= 1.0)) {
            return Err(Error::param("scales", "must be finite and ≥ 1"));
        }
        if self.cells_per_diameter < 2 {
            return Err(Error::param("cells_per_diameter", "need at least 2 cells"));
        }
        let n = self.centers[0].len();
        if n == 0 || self.centers.iter().any(|c| c.len() != n) {
            return Err(Error::param("centers", "all centers need the same positive dimension"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingProbe {
    pub center: Vec<f64>,
    pub radius: f64,
    pub scale: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingCertificate {
    pub c: f64,
    pub alpha: f64,
    /// Least-squares slope of `log ratio` against `log t`, for information.
    pub alpha_ls: f64,
    pub probes: usize,
    pub worst: DoublingProbe,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingFailure {
    pub center: Vec<f64>,
    /// `(r, ∫_{B(x,2r)} v / ∫_{B(x,r)} v)` along the runaway octaves.
    pub witness: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DoublingVerdict {
    Doubling(DoublingCertificate),
    Fails(DoublingFailure),
}

impl DoublingVerdict {
    pub fn is_doubling(&self) -> bool {
        matches!(self, DoublingVerdict::Doubling(_))
    }

    pub fn certificate(&self) -> Option<&DoublingCertificate> {
        match self {
            DoublingVerdict::Doubling(c) => Some(c),
            DoublingVerdict::Fails(_) => None,
        }
    }
}

/// Midpoint quadrature of `∫_{B(x,r)} v` over the Euclidean ball, with
/// `cells` cells across the diameter per axis. Cells cut by the sphere are
/// subsampled `8ⁿ` times. Midpoints never hit the center when `cells` is
/// even, so integrable poles there are harmless.
pub fn ball_integral(v: &WeightFunction, center: &[f64], radius: f64, cells: usize) -> Result<f64> {
    let n = center.len();
    let non_integrable = || Error::NonIntegrable {
        center: center.to_vec(),
        radius,
    };
    if !(radius.is_finite() && radius > 0.0) {
        return Err(non_integrable());
    }
    let h = 2.0 * radius / cells as f64;
    let total = if n == 1 {
        (0..cells)
            .map(|i| v.eval_radial(&[center[0] - radius + (i as f64 + 0.5) * h]))
            .sum::<f64>()
            * h
    } else {
        let sub = 8usize;
        let half_diag = 0.5 * h * (n as f64).sqrt();
        let mut idx = vec![0usize; n];
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut sum = 0.0;
        let cell_vol = h.powi(n as i32);
        loop {
            let mut d2 = 0.0;
            for d in 0..n {
                p[d] = center[d] - radius + (idx[d] as f64 + 0.5) * h;
                d2 += (p[d] - center[d]).powi(2);
            }
            let dist = d2.sqrt();
            if dist + half_diag <= radius {
                sum += v.eval_radial(&p) * cell_vol;
            } else if dist - half_diag < radius {
                let hs = h / sub as f64;
                let mut sidx = vec![0usize; n];
                'sub: loop {
                    let mut s2 = 0.0;
                    for d in 0..n {
                        q[d] = p[d] - 0.5 * h + (sidx[d] as f64 + 0.5) * hs;
                        s2 += (q[d] - center[d]).powi(2);
                    }
                    if s2 <= radius * radius {
                        sum += v.eval_radial(&q) * hs.powi(n as i32);
                    }
                    for s in sidx.iter_mut() {
                        *s += 1;
                        if *s < sub {
                            continue 'sub;
                        }
                        *s = 0;
                    }
                    break;
                }
            }
            let mut d = 0;
            loop {
                if d == n {
                    return finish(sum, non_integrable);
                }
                idx[d] += 1;
                if idx[d] < cells {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    };
    finish(total, non_integrable)
}

fn finish(v: f64, err: impl Fn() -> Error) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(err())
    }
}

/// Classifies `v` as doubling or not.
///
/// On success `α = max log_t(ratio)` over all probes (clamped at 0) and
/// `c = max(1, max ratio/t^α)`. The weight is rejected when, at some center,
/// `log(ratio at t = 2)` grows by more than `growth_threshold` per radius
/// octave for `octaves` consecutive octaves.
pub fn check_doubling(v: &WeightFunction, probes: &DoublingProbes) -> Result<DoublingVerdict> {
    probes.validate()?;
    v.validate()?;
    let cells = probes.cells_per_diameter + probes.cells_per_diameter % 2;

    // every radius that any probe needs, per center
    let mut need: Vec<f64> = Vec::new();
    for &r in &probes.radii {
        need.push(r);
        need.push(2.0 * r);
        for &t in &probes.scales {
            need.push(t * r);
        }
    }
    need.sort_by(f64::total_cmp);
    need.dedup();

    let tables: Vec<Vec<f64>> = probes
        .centers
        .par_iter()
        .map(|c| {
            need.iter()
                .map(|&r| ball_integral(v, c, r, cells))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let lookup = |ci: usize, r: f64| {
        let k = need.partition_point(|&x| x < r);
        tables[ci][k]
    };

    let mut radii = probes.radii.clone();
    radii.sort_by(f64::total_cmp);
    for (ci, c) in probes.centers.iter().enumerate() {
        let logs: Vec<f64> = radii
            .iter()
            .map(|&r| (lookup(ci, 2.0 * r) / lookup(ci, r)).ln())
            .collect();
        let mut run = 0;
        for k in 0..logs.len().saturating_sub(1) {
            let octave = (radii[k + 1] / radii[k] - 2.0).abs() < 1e-12;
            if octave && logs[k] > 0.0 && logs[k + 1] > probes.growth_threshold * logs[k] {
                run += 1;
                if run >= probes.octaves {
                    let start = k + 1 - run;
                    return Ok(DoublingVerdict::Fails(DoublingFailure {
                        center: c.clone(),
                        witness: (start..=k + 1).map(|i| (radii[i], logs[i].exp())).collect(),
                    }));
                }
            } else {
                run = 0;
            }
        }
    }

    let mut all = Vec::new();
    for ci in 0..probes.centers.len() {
        for &r in &probes.radii {
            for &t in &probes.scales {
                all.push((ci, r, t, lookup(ci, t * r) / lookup(ci, r)));
            }
        }
    }
    let mut alpha: f64 = 0.0;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(_, _, t, ratio) in &all {
        if t > 1.0 {
            alpha = alpha.max(ratio.ln() / t.ln());
            sxy += ratio.ln() * t.ln();
            sxx += t.ln() * t.ln();
        }
    }
    let mut c_fit: f64 = 1.0;
    let mut worst = &all[0];
    for probe in &all {
        let slack = probe.3 / probe.2.powf(alpha);
        if slack >= c_fit {
            c_fit = slack;
            worst = probe;
        }
    }
    Ok(DoublingVerdict::Doubling(DoublingCertificate {
        c: c_fit,
        alpha,
        alpha_ls: if sxx > 0.0 { sxy / sxx } else { 0.0 },
        probes: all.len(),
        worst: DoublingProbe {
            center: probes.centers[worst.0].clone(),
            radius: worst.1,
            scale: worst.2,
            ratio: worst.3,
        },
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cert(v: &WeightFunction, n: usize) -> DoublingCertificate {
        match check_doubling(v, &DoublingProbes::standard(n)).unwrap() {
            DoublingVerdict::Doubling(c) => c,
            DoublingVerdict::Fails(f) => panic!("unexpected failure {f:?}"),
        }
    }

    #[test]
    fn constant_weight_has_volume_exponent() {
        let c = cert(&WeightFunction::constant(1.0), 1);
        assert!((c.alpha - 1.0).abs() < 1e-9, "{c:?}");
        assert!(c.c <= 1.0 + 1e-9);
        let c2 = cert(&WeightFunction::constant(1.0), 2);
        assert!((c2.alpha - 2.0).abs() < 0.05, "{c2:?}");
    }

    #[test]
    fn abs_weight_worst_ratio_is_four() {
        let v = WeightFunction::power(1.0);
        let exact = ball_integral(&v, &[0.0], 2.0, 128).unwrap() / ball_integral(&v, &[0.0], 1.0, 128).unwrap();
        assert!((exact - 4.0).abs() < 1e-3, "{exact}");
        let c = cert(&v, 1);
        assert!((c.alpha - 2.0).abs() < 0.01, "{c:?}");
    }

    #[test]
    fn ball_integral_of_one_plus_abs() {
        let a = 0.75;
        let v = WeightFunction::shifted_power(1.0);
        let got = ball_integral(&v, &[0.0], a, 128).unwrap();
        assert!((got - (2.0 * a + a * a)).abs() < 1e-12);
    }

    #[test]
    fn exponential_weight_is_rejected() {
        let v = WeightFunction::exponential(1.0);
        match check_doubling(&v, &DoublingProbes::standard(1)).unwrap() {
            DoublingVerdict::Fails(f) => {
                assert_eq!(f.witness.len(), 5);
                assert!(f.witness.windows(2).all(|w| w[1].1 > w[0].1));
            }
            other => panic!("exponential weight accepted: {other:?}"),
        }
    }

    #[test]
    fn degenerate_ball_is_an_error() {
        let v = WeightFunction::power(-0.5);
        assert!(matches!(
            ball_integral(&v, &[0.0], 0.0, 128),
            Err(Error::NonIntegrable { .. })
        ));
    }

    #[test]
    fn alpha_is_stable_across_radius_ranges() {
        let v = WeightFunction::constant(1.0);
        let mut lo = DoublingProbes::standard(1);
        lo.radii = vec![0.0625, 0.125, 0.25];
        let mut hi = DoublingProbes::standard(1);
        hi.radii = vec![8.0, 16.0, 32.0];
        let a = check_doubling(&v, &lo).unwrap().certificate().unwrap().alpha;
        let b = check_doubling(&v, &hi).unwrap().certificate().unwrap().alpha;
        assert!((a - b).abs() < 0.05);
    }
}
