//! Global components `Y`: weighted `Lᵖ` over a group and the mixed-norm
//! spaces `L^{p,q}(v)` over `ax+b`, plus weight certificates and the
//! associated sequence spaces `Y_d`.

pub mod doubling;
pub mod sequence;
pub mod weight;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction, MAX_DIM};
use crate::group::GroupSpec;

pub use doubling::{
    ball_integral, check_doubling, DoublingCertificate, DoublingFailure, DoublingProbes,
    DoublingVerdict,
};
pub use sequence::{sequence_norm, step_function, DiscreteSequence};
pub use weight::{
    check_submultiplicative, line_sample_pairs, Certificates, SubmultiplicativeVerdict,
    WeightFamily, WeightFunction,
};

/// Values above this are reported as [`NormValue::Overflow`].
pub const OVERFLOW_GUARD: f64 = 1e300;

/// A quasi-norm value, or an explicit signal that the quadrature diverged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormValue {
    Finite(f64),
    Overflow,
}

impl NormValue {
    pub fn from_raw(v: f64) -> NormValue {
        if v.is_finite() && v <= OVERFLOW_GUARD {
            NormValue::Finite(v)
        } else {
            NormValue::Overflow
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            NormValue::Finite(v) => Some(v),
            NormValue::Overflow => None,
        }
    }

    pub fn is_overflow(self) -> bool {
        self == NormValue::Overflow
    }

    /// The value, or `+∞` for overflow.
    pub fn as_f64(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormValue::Finite(v) => write!(f, "{v}"),
            NormValue::Overflow => f.write_str("overflow"),
        }
    }
}

impl Serialize for NormValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NormValue::Finite(v) => s.serialize_f64(*v),
            NormValue::Overflow => s.serialize_str("overflow"),
        }
    }
}

impl<'de> Deserialize<'de> for NormValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(NormValue::Finite(v)),
            Raw::Str(s) if s == "overflow" => Ok(NormValue::Overflow),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad norm value `{s}`"))),
        }
    }
}

/// Serde helper for exponents in `(0, ∞]`: infinity is written as `"inf"`.
pub mod exponent {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
                other => other
                    .parse()
                    .map_err(|_| serde::de::Error::custom(format!("bad exponent `{s}`"))),
            },
        }
    }
}

fn trivial_weight() -> WeightFunction {
    WeightFunction::constant(1.0)
}

/// Specification of a global component `Y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GlobalComponent {
    /// `‖F‖ = ‖F·w‖_p` against left Haar measure.
    WeightedLp {
        #[serde(with = "exponent")]
        p: f64,
        #[serde(default = "trivial_weight")]
        weight: WeightFunction,
    },
    /// `(∫ (∫ |F(x,a)|^p v(x) dx)^{q/p} da/a^{n+1})^{1/q}` on `ax+b`.
    MixedLpq {
        #[serde(with = "exponent")]
        p: f64,
        #[serde(with = "exponent")]
        q: f64,
        #[serde(default = "trivial_weight")]
        weight: WeightFunction,
    },
}

impl GlobalComponent {
    pub fn lp(p: f64) -> Self {
        GlobalComponent::WeightedLp {
            p,
            weight: trivial_weight(),
        }
    }

    pub fn weighted_lp(p: f64, weight: WeightFunction) -> Self {
        GlobalComponent::WeightedLp { p, weight }
    }

    pub fn mixed(p: f64, q: f64, weight: WeightFunction) -> Self {
        GlobalComponent::MixedLpq { p, q, weight }
    }

    pub fn weight(&self) -> &WeightFunction {
        match self {
            GlobalComponent::WeightedLp { weight, .. } | GlobalComponent::MixedLpq { weight, .. } => {
                weight
            }
        }
    }

    /// Exponent `r` of the `r`-triangle inequality.
    pub fn r_exponent(&self) -> f64 {
        match self {
            GlobalComponent::WeightedLp { p, .. } => p.min(1.0),
            GlobalComponent::MixedLpq { p, q, .. } => p.min(*q).min(1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, v: f64| {
            if v.is_nan() || v <= 0.0 {
                Err(Error::param(name, format!("exponent must lie in (0, ∞], got {v}")))
            } else {
                Ok(())
            }
        };
        match self {
            GlobalComponent::WeightedLp { p, weight } => {
                check("p", *p)?;
                weight.validate()
            }
            GlobalComponent::MixedLpq { p, q, weight } => {
                check("p", *p)?;
                check("q", *q)?;
                weight.validate()
            }
        }
    }

    pub fn check_group(&self, group: GroupSpec) -> Result<()> {
        match (self, group) {
            (GlobalComponent::MixedLpq { .. }, GroupSpec::Axb(_)) | (GlobalComponent::WeightedLp { .. }, _) => {
                Ok(())
            }
            (GlobalComponent::MixedLpq { .. }, g) => Err(Error::GroupMismatch(format!(
                "mixed-norm spaces live on ax+b, not on a {} grid",
                g.name()
            ))),
        }
    }

    /// Weight evaluated at every grid sample.
    pub fn weight_table(&self, grid: &Grid) -> Option<Vec<f64>> {
        let w = self.weight();
        if w.is_trivial() {
            return None;
        }
        let group = grid.group();
        let dim = grid.dim();
        let mut buf = [0.0; MAX_DIM];
        Some(
            (0..grid.len())
                .map(|i| {
                    grid.point_into(i, &mut buf[..dim]);
                    w.eval(group, &buf[..dim])
                })
                .collect(),
        )
    }

    /// Quasi-norm of non-negative samples `abs` living on `grid`.
    pub fn norm_of_abs(&self, grid: &Grid, abs: &[f64]) -> Result<NormValue> {
        self.validate()?;
        self.check_group(grid.group())?;
        if abs.len() != grid.len() {
            return Err(Error::IndexMismatch(format!(
                "{} samples for a grid of {}",
                abs.len(),
                grid.len()
            )));
        }
        let table = self.weight_table(grid);
        self.norm_with_table(grid, abs, table.as_deref())
    }

    pub(crate) fn norm_with_table(
        &self,
        grid: &Grid,
        abs: &[f64],
        table: Option<&[f64]>,
    ) -> Result<NormValue> {
        let raw = match self {
            GlobalComponent::WeightedLp { p, .. } => weighted_lp_raw(grid.weights(), abs, table, *p),
            GlobalComponent::MixedLpq { p, q, .. } => mixed_raw(grid, abs, table, *p, *q),
        };
        Ok(NormValue::from_raw(raw))
    }
}

fn weighted_lp_raw(quad: &[f64], abs: &[f64], table: Option<&[f64]>, p: f64) -> f64 {
    let wv = |i: usize| {
        let a = abs[i];
        if a == 0.0 {
            return 0.0;
        }
        match table {
            Some(t) => a * t[i],
            None => a,
        }
    };
    if p.is_infinite() {
        return (0..abs.len()).map(wv).fold(0.0, f64::max);
    }
    let mut s = 0.0;
    for (i, &q) in quad.iter().enumerate() {
        let v = wv(i);
        if v != 0.0 {
            s += if p == 1.0 { v * q } else { v.powf(p) * q };
        }
    }
    if p == 1.0 {
        s
    } else {
        s.powf(1.0 / p)
    }
}

fn mixed_raw(grid: &Grid, abs: &[f64], table: Option<&[f64]>, p: f64, q: f64) -> f64 {
    let n = grid.group().n();
    let a_axis = grid.axis(n);
    let row = grid.strides()[n];
    let x_vol: Vec<f64> = (0..row)
        .map(|i| {
            let mut rem = i;
            let mut vol = 1.0;
            for ax in &grid.axes()[..n] {
                let k = rem % ax.len();
                rem /= ax.len();
                vol *= ax.width(k);
            }
            vol
        })
        .collect();
    let mut outer = 0.0;
    let mut sup: f64 = 0.0;
    for j in 0..a_axis.len() {
        let block = j * row..(j + 1) * row;
        let inner = if p.is_infinite() {
            abs[block].iter().fold(0.0, |m: f64, &v| m.max(v))
        } else {
            let mut s = 0.0;
            for (k, i) in block.enumerate() {
                let a = abs[i];
                if a != 0.0 {
                    let v = table.map_or(1.0, |t| t[i]);
                    s += a.powf(p) * v * x_vol[k];
                }
            }
            s.powf(1.0 / p)
        };
        if q.is_infinite() {
            sup = sup.max(inner);
        } else if inner != 0.0 {
            let a = a_axis.mids()[j];
            let omega = a_axis.width(j) * a.powi(-(n as i32 + 1));
            outer += inner.powf(q) * omega;
        }
    }
    if q.is_infinite() {
        sup
    } else {
        outer.powf(1.0 / q)
    }
}

/// `‖F‖_Y` by quadrature on `F`'s grid.
pub fn quasi_norm(y: &GlobalComponent, f: &SampledFunction) -> Result<NormValue> {
    y.norm_of_abs(f.grid(), &f.abs())
}

/// How a quasi-triangle constant `C` relates to the exponent `p`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuasiConstantRelation {
    /// `C = 2^{1/p} - 1`
    #[default]
    PowerMinusOne,
    /// `C = 2^{1/p - 1}`
    AokiRolewicz,
}

/// Solves the chosen relation between the quasi-triangle constant and `p`.
pub fn p_exponent_from_quasi_constant_with(c: f64, relation: QuasiConstantRelation) -> Result<f64> {
    if !(c >= 1.0) || !c.is_finite() {
        return Err(Error::param("C", format!("quasi-triangle constant must be finite and ≥ 1, got {c}")));
    }
    Ok(match relation {
        QuasiConstantRelation::PowerMinusOne => 1.0 / (c + 1.0).log2(),
        QuasiConstantRelation::AokiRolewicz => 1.0 / (1.0 + c.log2()),
    })
}

/// `p = 1 / log₂(C + 1)`.
pub fn p_exponent_from_quasi_constant(c: f64) -> Result<f64> {
    p_exponent_from_quasi_constant_with(c, QuasiConstantRelation::PowerMinusOne)
}

pub fn quasi_constant_from_p(p: f64, relation: QuasiConstantRelation) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param("p", format!("need p ∈ (0, 1], got {p}")));
    }
    Ok(match relation {
        QuasiConstantRelation::PowerMinusOne => (1.0 / p).exp2() - 1.0,
        QuasiConstantRelation::AokiRolewicz => (1.0 / p - 1.0).exp2(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AxisSpec;
    use proptest::prelude::*;

    fn finite(v: NormValue) -> f64 {
        v.value().expect("finite norm")
    }

    #[test]
    fn unit_indicator_in_l_half() {
        let g = Grid::euclidean_1d(-1.0, 2.0, 3000).unwrap();
        let f = SampledFunction::from_real_fn(g, |p| {
            if (0.0..=1.0).contains(&p[0]) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let v = finite(quasi_norm(&GlobalComponent::lp(0.5), &f).unwrap());
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn two_deltas_in_ell_half() {
        let g = Grid::lattice_1d(-3, 3).unwrap();
        let f = SampledFunction::from_real_fn(g, |p| if p[0] == 0.0 || p[0] == 1.0 { 1.0 } else { 0.0 })
            .unwrap();
        assert_eq!(finite(quasi_norm(&GlobalComponent::lp(0.5), &f).unwrap()), 4.0);
    }

    #[test]
    fn mixed_norm_of_axb_box() {
        let g = Grid::new(
            GroupSpec::Axb(1),
            vec![
                AxisSpec::Uniform { lo: -1.0, hi: 2.0, cells: 300 },
                AxisSpec::Geometric { lo: (-1.0f64).exp(), hi: 2.0f64.exp(), cells: 300 },
            ],
        )
        .unwrap();
        let e = std::f64::consts::E;
        let f = SampledFunction::from_real_fn(g, |p| {
            if (0.0..=1.0).contains(&p[0]) && (1.0..=e).contains(&p[1]) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let y = GlobalComponent::mixed(1.0, 1.0, WeightFunction::constant(1.0));
        let v = finite(quasi_norm(&y, &f).unwrap());
        assert!((v - (1.0 - 1.0 / e)).abs() < 1e-3, "{v}");
    }

    #[test]
    fn mixed_with_equal_exponents_is_lp_of_the_group() {
        let g = Grid::axb_1d(0.125, 6.0, 4, 8).unwrap();
        let f = SampledFunction::from_real_fn(g, |p| {
            let l = p[1].ln();
            (-(p[0] * p[0]) - l * l).exp()
        })
        .unwrap();
        for p in [0.5, 1.0, 2.0] {
            let a = finite(quasi_norm(&GlobalComponent::mixed(p, p, WeightFunction::constant(1.0)), &f).unwrap());
            let b = finite(quasi_norm(&GlobalComponent::lp(p), &f).unwrap());
            assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn mixed_q_infinity_takes_sup_over_rows() {
        let g = Grid::axb_1d(0.5, 2.0, 1, 1).unwrap();
        // rows a ∈ {1/2, 1, 2}; F = 1 on the a = 1 row only
        let f = SampledFunction::from_real_fn(g, |p| if p[1] == 1.0 { 1.0 } else { 0.0 }).unwrap();
        let y = GlobalComponent::mixed(1.0, f64::INFINITY, WeightFunction::constant(1.0));
        // inner integral is the x-length 4.5 of the row
        assert!((finite(quasi_norm(&y, &f).unwrap()) - 4.5).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let g = Grid::lattice_1d(0, 2).unwrap();
        let f = SampledFunction::zeros(g);
        assert!(matches!(
            quasi_norm(&GlobalComponent::lp(0.0), &f),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            quasi_norm(&GlobalComponent::mixed(1.0, -1.0, WeightFunction::constant(1.0)), &f),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            quasi_norm(&GlobalComponent::mixed(1.0, 1.0, WeightFunction::constant(1.0)), &f),
            Err(Error::GroupMismatch(_))
        ));
    }

    #[test]
    fn infinite_samples_overflow() {
        let g = Grid::lattice_1d(0, 2).unwrap();
        let f = SampledFunction::from_real(g, vec![1.0, f64::INFINITY, 0.0]).unwrap();
        assert!(quasi_norm(&GlobalComponent::lp(1.0), &f).unwrap().is_overflow());
        assert!(quasi_norm(&GlobalComponent::lp(f64::INFINITY), &f).unwrap().is_overflow());
    }

    #[test]
    fn p_from_c() {
        assert_eq!(p_exponent_from_quasi_constant(1.0).unwrap(), 1.0);
        let p = p_exponent_from_quasi_constant(3.0).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!(((1.0 / p).exp2() - 1.0 - 3.0).abs() < 1e-12);
        assert!(p_exponent_from_quasi_constant(0.5).is_err());
        for p in [0.3, 0.7, 1.0] {
            for rel in [QuasiConstantRelation::PowerMinusOne, QuasiConstantRelation::AokiRolewicz] {
                let c = quasi_constant_from_p(p, rel).unwrap();
                let back = p_exponent_from_quasi_constant_with(c, rel).unwrap();
                assert!((back - p).abs() < 1e-12, "{rel:?} {p} {back}");
            }
        }
        // the alternative normalization gives a different exponent
        assert_eq!(
            p_exponent_from_quasi_constant_with(2.0, QuasiConstantRelation::AokiRolewicz).unwrap(),
            0.5
        );
    }

    #[test]
    fn serde_of_infinite_exponents() {
        let y = GlobalComponent::mixed(1.0, f64::INFINITY, WeightFunction::shifted_power(2.0));
        let j = serde_json::to_string(&y).unwrap();
        assert!(j.contains("\"q\":\"inf\""), "{j}");
        assert_eq!(serde_json::from_str::<GlobalComponent>(&j).unwrap(), y);
        let t = toml::to_string(&y).unwrap();
        assert_eq!(toml::from_str::<GlobalComponent>(&t).unwrap(), y);
        assert_eq!(serde_json::to_string(&NormValue::Overflow).unwrap(), "\"overflow\"");
    }

    fn component_strategy() -> impl Strategy<Value = GlobalComponent> {
        prop_oneof![
            (0.2..3.0f64).prop_map(GlobalComponent::lp),
            (0.2..3.0f64, 0.0..2.0f64)
                .prop_map(|(p, s)| GlobalComponent::weighted_lp(p, WeightFunction::shifted_power(s))),
            Just(GlobalComponent::lp(f64::INFINITY)),
        ]
    }

    proptest! {
        #[test]
        fn r_triangle_and_solidity(
            y in component_strategy(),
            a in proptest::collection::vec(-3.0..3.0f64, 21),
            b in proptest::collection::vec(-3.0..3.0f64, 21),
            t in proptest::collection::vec(0.0..1.0f64, 21),
        ) {
            let g = Grid::lattice_1d(-10, 10).unwrap();
            let fa = SampledFunction::from_real(g.clone(), a.clone()).unwrap();
            let fb = SampledFunction::from_real(g.clone(), b).unwrap();
            let sum = fa.add(&fb).unwrap();
            let r = y.r_exponent();
            let (na, nb, ns) = (
                finite(quasi_norm(&y, &fa).unwrap()),
                finite(quasi_norm(&y, &fb).unwrap()),
                finite(quasi_norm(&y, &sum).unwrap()),
            );
            let rhs = na.powf(r) + nb.powf(r);
            prop_assert!(ns.powf(r) <= rhs * (1.0 + 1e-10) + 1e-300);

            let dominated: Vec<f64> = a.iter().zip(&t).map(|(v, s)| v * s).collect();
            let fd = SampledFunction::from_real(g, dominated).unwrap();
            prop_assert!(finite(quasi_norm(&y, &fd).unwrap()) <= na * (1.0 + 1e-12));
        }

        #[test]
        fn mixed_r_triangle(
            p in 0.3..2.5f64, q in 0.3..2.5f64,
            a in proptest::collection::vec(-2.0..2.0f64, 15),
            b in proptest::collection::vec(-2.0..2.0f64, 15),
        ) {
            let g = Grid::axb_1d(0.5, 1.0, 1, 1).unwrap();
            let y = GlobalComponent::mixed(p, q, WeightFunction::shifted_power(1.0));
            let fa = SampledFunction::from_real(g.clone(), a).unwrap();
            let fb = SampledFunction::from_real(g, b).unwrap();
            let r = y.r_exponent();
            let na = finite(quasi_norm(&y, &fa).unwrap());
            let nb = finite(quasi_norm(&y, &fb).unwrap());
            let ns = finite(quasi_norm(&y, &fa.add(&fb).unwrap()).unwrap());
            prop_assert!(ns.powf(r) <= (na.powf(r) + nb.powf(r)) * (1.0 + 1e-10) + 1e-300);
        }
    }
}
