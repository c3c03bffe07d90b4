//! Problem instance, derived exponents and regime classification.
//!
//! A problem instance is the stationary equation
//! `-Δu = λu + μ|u|^{q-2}u + |u|^{p-2}u` on `R^N` with prescribed mass
//! `|u|_2 = a`. The leading nonlinearity always has coefficient one; `μ`
//! multiplies the lower order power.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative tolerance for comparing a real (non-rational) exponent with an
/// exact threshold such as `2 + 4/N`.
pub const EXPONENT_TIE_TOL: f64 = 1e-12;

/// Spatial dimension. Only `N ∈ {1, 2, 3}` is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dim {
    One,
    Two,
    Three,
}

impl Dim {
    pub fn new(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            _ => Err(Error::Validation(format!("dimension 1 <= N <= 3 violated (N = {n})"))),
        }
    }

    pub fn n(self) -> u32 {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn as_scalar<T: Scalar>(self) -> T {
        T::lit(self.n() as f64)
    }

    /// Measure of the unit sphere `S^{N-1}`: 2, 2π, 4π.
    pub fn sphere_measure<T: Scalar>(self) -> T {
        match self {
            Dim::One => T::lit(2.0),
            Dim::Two => T::lit(2.0) * T::PI(),
            Dim::Three => T::lit(4.0) * T::PI(),
        }
    }

    /// `2 + 4/N` as an exact rational.
    pub fn pbar_exact(self) -> Ratio<i64> {
        Ratio::new(2 * self.n() as i64 + 4, self.n() as i64)
    }

    /// Sobolev exponent `2N/(N-2)`; `None` stands for `+∞`.
    pub fn two_star_exact(self) -> Option<Ratio<i64>> {
        match self {
            Dim::Three => Some(Ratio::from_integer(6)),
            _ => None,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.n())
    }
}

impl Serialize for Dim {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u32(self.n())
    }
}

impl<'de> Deserialize<'de> for Dim {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let n = u32::deserialize(d)?;
        Dim::new(n).map_err(serde::de::Error::custom)
    }
}

/// A nonlinearity exponent, optionally carrying its exact rational value.
///
/// Exponents given as rationals (`"10/3"`) are compared exactly against
/// regime thresholds; real exponents fall back to a relative tolerance of
/// [`EXPONENT_TIE_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent<T> {
    value: T,
    exact: Option<Ratio<i64>>,
}

impl<T: Scalar> Exponent<T> {
    pub fn real(value: T) -> Self {
        Exponent { value, exact: None }
    }

    pub fn rational(numer: i64, denom: i64) -> Self {
        let r = Ratio::new(numer, denom);
        Exponent {
            value: T::lit(*r.numer() as f64) / T::lit(*r.denom() as f64),
            exact: Some(r),
        }
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(n, 1)
    }

    pub fn value(&self) -> T {
        self.value
    }

    pub fn exact(&self) -> Option<Ratio<i64>> {
        self.exact
    }

    /// Three-way comparison against an exact threshold.
    pub fn cmp_exact(&self, threshold: Ratio<i64>) -> Ordering {
        if let Some(r) = self.exact {
            return r.cmp(&threshold);
        }
        let t = T::lit(*threshold.numer() as f64) / T::lit(*threshold.denom() as f64);
        let tol = T::tol(EXPONENT_TIE_TOL) * t.abs().max(T::one());
        if (self.value - t).abs() <= tol {
            Ordering::Equal
        } else if self.value < t {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    /// Comparison between two exponents, exact when both are rational.
    pub fn cmp_exponent(&self, other: &Exponent<T>) -> Ordering {
        match other.exact {
            Some(r) => self.cmp_exact(r),
            None => match self.exact {
                Some(r) => other.cmp_exact(r).reverse(),
                None => {
                    let tol = T::tol(EXPONENT_TIE_TOL) * other.value.abs().max(T::one());
                    if (self.value - other.value).abs() <= tol {
                        Ordering::Equal
                    } else if self.value < other.value {
                        Ordering::Less
                    } else {
                        Ordering::Greater
                    }
                }
            },
        }
    }

    pub fn cast<U: Scalar>(&self) -> Exponent<U> {
        Exponent {
            value: U::lit(self.value.to_f64_lossy()),
            exact: self.exact,
        }
    }
}

impl<T: Scalar> fmt::Display for Exponent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

impl<T: Scalar> FromStr for Exponent<T> {
    type Err = Error;

    /// Accepts `"4"`, `"10/3"` (exact) or `"3.5"` (real).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Validation(format!("cannot parse exponent '{s}'"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Self::rational(n, d));
        }
        if let Ok(n) = s.parse::<i64>() {
            return Ok(Self::integer(n));
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        Ok(Self::real(T::lit(v)))
    }
}

impl<T: Scalar> Serialize for Exponent<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.exact {
            Some(r) if *r.denom() == 1 => s.serialize_i64(*r.numer()),
            Some(_) => s.serialize_str(&self.to_string()),
            None => s.serialize_f64(self.value.to_f64_lossy()),
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Exponent<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Exponent::integer(n)),
            Raw::Num(v) => Ok(Exponent::real(T::lit(v))),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Problem instance `(N, p, q, a, μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ModelParams<T> {
    #[serde(rename = "N")]
    pub dim: Dim,
    pub p: Exponent<T>,
    pub q: Exponent<T>,
    pub a: T,
    pub mu: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(dim: Dim, p: Exponent<T>, q: Exponent<T>, a: T, mu: T) -> Result<Self> {
        let params = ModelParams { dim, p, q, a, mu };
        params.validate()?;
        Ok(params)
    }

    /// Convenience constructor for integer exponents.
    pub fn with_ints(n: u32, p: i64, q: i64, a: f64, mu: f64) -> Result<Self> {
        Self::new(
            Dim::new(n)?,
            Exponent::integer(p),
            Exponent::integer(q),
            T::lit(a),
            T::lit(mu),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let two = Ratio::from_integer(2);
        if !self.a.is_finite() || self.a <= T::zero() {
            return Err(Error::Validation(format!("a > 0 violated (a = {})", self.a)));
        }
        if !self.mu.is_finite() {
            return Err(Error::Validation("mu must be finite".into()));
        }
        if !self.p.value().is_finite() || !self.q.value().is_finite() {
            return Err(Error::Validation("exponents must be finite".into()));
        }
        if self.q.cmp_exact(two) != Ordering::Greater {
            return Err(Error::Validation(format!("2 < q violated (q = {})", self.q)));
        }
        if self.q.cmp_exponent(&self.p) != Ordering::Less {
            return Err(Error::Validation(format!(
                "q < p violated (q = {}, p = {})",
                self.q, self.p
            )));
        }
        if let Some(two_star) = self.dim.two_star_exact() {
            if self.p.cmp_exact(two_star) != Ordering::Less {
                return Err(Error::Validation(format!(
                    "p < 2* = {} violated (p = {})",
                    two_star, self.p
                )));
            }
        }
        Ok(())
    }

    pub fn derived(&self) -> DerivedExponents<T> {
        derive(self)
    }

    pub fn regime(&self) -> Regime {
        classify(self)
    }

    pub fn coupling(&self) -> Coupling {
        if self.mu > T::zero() {
            Coupling::Focusing
        } else if self.mu < T::zero() {
            Coupling::Defocusing
        } else {
            Coupling::None
        }
    }

    pub fn with_mass(&self, a: T) -> Self {
        ModelParams { a, ..*self }
    }

    pub fn with_mu(&self, mu: T) -> Self {
        ModelParams { mu, ..*self }
    }

    pub fn cast<U: Scalar>(&self) -> ModelParams<U> {
        ModelParams {
            dim: self.dim,
            p: self.p.cast(),
            q: self.q.cast(),
            a: U::lit(self.a.to_f64_lossy()),
            mu: U::lit(self.mu.to_f64_lossy()),
        }
    }
}

/// Exponents derived from `(N, p, q)`.
///
/// `alpha_p = γ_p·p = N(p-2)/2` is stored separately and computed exactly
/// for rational `p`, so that `alpha_p == 2` holds bit-for-bit at `p = 2+4/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedExponents<T> {
    pub pbar: T,
    pub gamma_p: T,
    pub gamma_q: T,
    pub alpha_p: T,
    pub alpha_q: T,
    /// `None` encodes `2* = +∞`.
    pub two_star: Option<T>,
}

fn gamma_pair<T: Scalar>(dim: Dim, e: &Exponent<T>) -> (T, T) {
    let n = dim.n() as i64;
    match e.exact() {
        Some(r) => {
            let alpha = (r - Ratio::from_integer(2)) * Ratio::from_integer(n) / Ratio::from_integer(2);
            let gamma = alpha / r;
            let f = |x: Ratio<i64>| T::lit(*x.numer() as f64) / T::lit(*x.denom() as f64);
            (f(gamma), f(alpha))
        }
        None => {
            let nn = dim.as_scalar::<T>();
            let two = T::lit(2.0);
            let alpha = nn * (e.value() - two) / two;
            (alpha / e.value(), alpha)
        }
    }
}

pub fn derive<T: Scalar>(params: &ModelParams<T>) -> DerivedExponents<T> {
    let (gamma_p, alpha_p) = gamma_pair(params.dim, &params.p);
    let (gamma_q, alpha_q) = gamma_pair(params.dim, &params.q);
    let pb = params.dim.pbar_exact();
    DerivedExponents {
        pbar: T::lit(*pb.numer() as f64) / T::lit(*pb.denom() as f64),
        gamma_p,
        gamma_q,
        alpha_p,
        alpha_q,
        two_star: params.dim.two_star_exact().map(|r| T::lit(*r.numer() as f64)),
    }
}

/// `γ` and `γ·p` for a single exponent in dimension `dim`.
pub fn gamma_of<T: Scalar>(dim: Dim, p: &Exponent<T>) -> (T, T) {
    gamma_pair(dim, p)
}

/// Position of the two exponents relative to the L²-critical exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExponentOrdering {
    /// `q < p = p̄`
    CriticalLeading,
    /// `q < p̄ < p`
    SubSuper,
    /// `q = p̄ < p`
    CriticalSuper,
    /// `q < p < p̄`
    PureSub,
    /// `p̄ < q < p`
    PureSuper,
}

/// Sign of the lower order coupling `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coupling {
    Focusing,
    Defocusing,
    None,
}

/// Regime tag; determines which threshold condition applies downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `q < p = p̄`, any sign of `μ`.
    CriticalLeading,
    /// `q < p̄ < p`, `μ > 0`.
    MixedFocusing,
    /// `q = p̄ < p`, `μ > 0`.
    CriticalPerturbation,
    /// `q ≤ p̄ < p`, `μ < 0`.
    SupercriticalDefocusing,
    /// `q < p < p̄`.
    PureSubcritical,
    /// `p̄ < q < p`.
    PureSupercritical,
    /// `μ = 0`.
    Homogeneous,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub fn exponent_ordering<T: Scalar>(params: &ModelParams<T>) -> ExponentOrdering {
    let pbar = params.dim.pbar_exact();
    match (params.q.cmp_exact(pbar), params.p.cmp_exact(pbar)) {
        (_, Ordering::Equal) => ExponentOrdering::CriticalLeading,
        (_, Ordering::Less) => ExponentOrdering::PureSub,
        (Ordering::Less, Ordering::Greater) => ExponentOrdering::SubSuper,
        (Ordering::Equal, Ordering::Greater) => ExponentOrdering::CriticalSuper,
        (Ordering::Greater, Ordering::Greater) => ExponentOrdering::PureSuper,
    }
}

pub fn classify<T: Scalar>(params: &ModelParams<T>) -> Regime {
    let ordering = exponent_ordering(params);
    let coupling = params.coupling();
    match (ordering, coupling) {
        (_, Coupling::None) => Regime::Homogeneous,
        (ExponentOrdering::CriticalLeading, _) => Regime::CriticalLeading,
        (ExponentOrdering::PureSub, _) => Regime::PureSubcritical,
        (ExponentOrdering::PureSuper, _) => Regime::PureSupercritical,
        (ExponentOrdering::SubSuper, Coupling::Focusing) => Regime::MixedFocusing,
        (ExponentOrdering::CriticalSuper, Coupling::Focusing) => Regime::CriticalPerturbation,
        (ExponentOrdering::SubSuper | ExponentOrdering::CriticalSuper, Coupling::Defocusing) => {
            Regime::SupercriticalDefocusing
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(n: u32, p: Exponent<f64>, q: Exponent<f64>, mu: f64) -> ModelParams<f64> {
        ModelParams::new(Dim::new(n).unwrap(), p, q, 1.0, mu).unwrap()
    }

    #[test]
    fn derived_examples() {
        let d = params(3, Exponent::integer(4), Exponent::integer(3), 1.0).derived();
        assert!((d.gamma_p - 0.75).abs() < 1e-15);
        assert!((d.pbar - 10.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.two_star, Some(6.0));

        let d = params(1, Exponent::integer(6), Exponent::integer(3), 1.0).derived();
        assert!((d.gamma_p - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.alpha_p, 2.0);
        assert_eq!(d.pbar, 6.0);

        let d = params(2, Exponent::integer(4), Exponent::integer(3), 1.0).derived();
        assert_eq!(d.gamma_p, 0.5);
        assert_eq!(d.pbar, 4.0);
        assert_eq!(d.two_star, None);
    }

    #[test]
    fn rational_pbar_is_exact() {
        let p = params(3, Exponent::rational(10, 3), Exponent::integer(3), 1.0);
        assert_eq!(p.derived().alpha_p, 2.0);
        assert_eq!(p.regime(), Regime::CriticalLeading);
        // a real exponent off by more than the tie tolerance is not critical
        let p = params(3, Exponent::real(10.0 / 3.0 + 1e-9), Exponent::integer(3), 1.0);
        assert_eq!(p.regime(), Regime::MixedFocusing);
        let p = params(3, Exponent::real(10.0 / 3.0), Exponent::integer(3), 1.0);
        assert_eq!(p.regime(), Regime::CriticalLeading);
    }

    #[test]
    fn classify_examples() {
        let p = ModelParams::<f64>::new(Dim::Three, Exponent::integer(4), Exponent::real(2.5), 1.0, 1.0).unwrap();
        assert_eq!(p.regime(), Regime::MixedFocusing);
        let p = ModelParams::<f64>::with_ints(2, 4, 3, 1.0, -1.0).unwrap();
        assert_eq!(p.regime(), Regime::CriticalLeading);
        assert_eq!(p.coupling(), Coupling::Defocusing);
        let p = ModelParams::<f64>::with_ints(1, 8, 6, 1.0, 1.0).unwrap();
        assert_eq!(p.regime(), Regime::CriticalPerturbation);
        let p = ModelParams::<f64>::with_ints(1, 8, 7, 1.0, 1.0).unwrap();
        assert_eq!(p.regime(), Regime::PureSupercritical);
        let p = ModelParams::<f64>::with_ints(1, 5, 3, 1.0, 1.0).unwrap();
        assert_eq!(p.regime(), Regime::PureSubcritical);
        let p = ModelParams::<f64>::with_ints(3, 4, 3, 1.0, -0.05).unwrap();
        assert_eq!(p.regime(), Regime::SupercriticalDefocusing);
        let p = ModelParams::<f64>::with_ints(1, 8, 6, 1.0, -1.0).unwrap();
        assert_eq!(p.regime(), Regime::SupercriticalDefocusing);
        let p = ModelParams::<f64>::with_ints(1, 8, 3, 1.0, 0.0).unwrap();
        assert_eq!(p.regime(), Regime::Homogeneous);
    }

    #[test]
    fn validation_names_the_inequality() {
        let e = ModelParams::<f64>::with_ints(1, 4, 4, 1.0, 1.0).unwrap_err();
        assert!(e.to_string().contains("q < p"), "{e}");
        let e = ModelParams::<f64>::with_ints(3, 6, 3, 1.0, 1.0).unwrap_err();
        assert!(e.to_string().contains("2*"), "{e}");
        let e = ModelParams::<f64>::with_ints(1, 4, 2, 1.0, 1.0).unwrap_err();
        assert!(e.to_string().contains("2 < q"), "{e}");
        let e = ModelParams::<f64>::with_ints(1, 4, 3, 0.0, 1.0).unwrap_err();
        assert!(e.to_string().contains("a > 0"), "{e}");
        assert!(Dim::new(4).is_err());
        assert_eq!(e.category(), "validation");
    }

    #[test]
    fn json_round_trip_keeps_rationals() {
        let p =
            ModelParams::<f64>::new(Dim::Three, Exponent::rational(10, 3), Exponent::real(2.5), 1.5, -0.25).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"N\":3") && s.contains("\"10/3\""), "{s}");
        let back: ModelParams<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let parsed: ModelParams<f64> = serde_json::from_str(r#"{"N":1,"p":8,"q":3,"a":1,"mu":0.5}"#).unwrap();
        assert_eq!(parsed.p.exact(), Some(Ratio::from_integer(8)));
    }

    #[test]
    fn f32_instantiation() {
        let p = ModelParams::<f32>::with_ints(1, 8, 3, 1.0, 1.0).unwrap();
        assert_eq!(p.regime(), Regime::MixedFocusing);
        assert_eq!(p.derived().alpha_p, 3.0f32);
    }

    fn valid_exponents() -> impl Strategy<Value = (u32, f64, f64)> {
        (1u32..=3).prop_flat_map(|n| {
            let upper = if n == 3 { 6.0 } else { 12.0 };
            (Just(n), 2.0f64..upper, 2.0f64..upper)
                .prop_filter("2 < q < p", |(_, x, y)| x != y && *x > 2.0 && *y > 2.0)
                .prop_map(|(n, x, y)| (n, x.max(y), x.min(y)))
        })
    }

    proptest! {
        #[test]
        fn gamma_relations((n, p, q) in valid_exponents(), mu in -2.0f64..2.0) {
            prop_assume!(mu != 0.0);
            let params = ModelParams::new(
                Dim::new(n).unwrap(), Exponent::real(p), Exponent::real(q), 1.0, mu,
            );
            prop_assume!(params.is_ok());
            let params = params.unwrap();
            let d = params.derived();
            prop_assert!(0.0 < d.gamma_q && d.gamma_q < d.gamma_p && d.gamma_p < 1.0);
            prop_assert!((d.alpha_p - d.gamma_p * p).abs() < 1e-12);
            let mixed = q < d.pbar && d.pbar < p;
            prop_assert_eq!(d.alpha_q < 2.0 && 2.0 < d.alpha_p, mixed);
            prop_assert_eq!(d.alpha_p > 2.0, p > d.pbar);
        }

        #[test]
        fn sign_of_mu_only_flips_coupling((n, p, q) in valid_exponents(), mu in 0.01f64..5.0) {
            let mk = |m: f64| ModelParams::new(
                Dim::new(n).unwrap(), Exponent::real(p), Exponent::real(q), 1.0, m,
            );
            prop_assume!(mk(mu).is_ok());
            let plus = mk(mu).unwrap();
            let minus = mk(-mu).unwrap();
            prop_assert_eq!(exponent_ordering(&plus), exponent_ordering(&minus));
            prop_assert_eq!(plus.coupling(), Coupling::Focusing);
            prop_assert_eq!(minus.coupling(), Coupling::Defocusing);
            prop_assert_eq!(classify(&plus), classify(&plus));
        }
    }
}
