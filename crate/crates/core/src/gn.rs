//! Radial soliton `w_{N,p}` and the Gagliardo–Nirenberg best constant.
//!
//! `w` is the positive radial solution of `-Δw + w = w^{p-1}`; it attains
//! equality in `|u|_p <= C |∇u|_2^{γ_p} |u|_2^{1-γ_p}`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGridSpec};
use crate::params::{gamma_of, Dim, Exponent};
use crate::scalar::Scalar;
use crate::shooting::{ode_residual, shoot, Nonlinearity, ShootingOptions, ShotProfile};

/// Best constant data for one `(N, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GnConstants<T> {
    pub dim: Dim,
    pub p: T,
    pub c_np: T,
    /// `|w_{N,p}|_2`.
    pub mass_w: T,
    /// Critical mass, only for `p = 2 + 4/N`.
    pub abar_n: Option<T>,
    /// Weighted L² residual of the soliton equation.
    pub residual: T,
    pub grad2_w: T,
    pub lp_w: T,
}

impl<T: Scalar> GnConstants<T> {
    /// `C^p`, the form every threshold uses.
    pub fn c_pow(&self) -> T {
        self.c_np.powf(self.p)
    }
}

fn check_exponent<T: Scalar>(dim: Dim, p: &Exponent<T>) -> Result<()> {
    if p.cmp_exact(num_rational::Ratio::from_integer(2)) != Ordering::Greater {
        return Err(Error::Validation(format!("2 < p violated (p = {p})")));
    }
    if let Some(ts) = dim.two_star_exact() {
        if p.cmp_exact(ts) != Ordering::Less {
            return Err(Error::Validation(format!("p < 2* = {ts} violated (p = {p})")));
        }
    }
    Ok(())
}

/// Positive radial solution of `-Δw + w = w^{p-1}`.
pub fn shoot_soliton<T: Scalar>(dim: Dim, p: &Exponent<T>, grid: RadialGridSpec<T>) -> Result<ShotProfile<T>> {
    check_exponent(dim, p)?;
    shoot(&soliton_equation(dim, p.value()), grid, &ShootingOptions::default())
}

fn soliton_equation<T: Scalar>(dim: Dim, p: T) -> Nonlinearity<T> {
    Nonlinearity {
        dim,
        kappa2: T::one(),
        mu: T::zero(),
        q: p,
        p,
        nu: T::one(),
    }
}

/// `|u|_p / (|∇u|_2^{γ} |u|_2^{1-γ})` from precomputed integrals.
pub fn gn_ratio_from<T: Scalar>(gamma: T, grad2: T, mass2: T, lp_pow: T, p: T) -> T {
    let two = T::lit(2.0);
    lp_pow.powf(T::one() / p) / (grad2.powf(gamma / two) * mass2.powf((T::one() - gamma) / two))
}

/// GN quotient of a sampled profile.
pub fn gn_ratio<T: Scalar>(u: &RadialField<T>, p: &Exponent<T>) -> T {
    let (gamma, _) = gamma_of(u.dim, p);
    gn_ratio_from(gamma, u.grad2(), u.mass2(), u.lp_pow(p.value()), p.value())
}

/// `ā_N = (p̄ / (2 C^{p̄}))^{N/4}`.
pub fn critical_mass_from_constant<T: Scalar>(dim: Dim, c_np: T) -> T {
    let pb = dim.pbar_exact();
    let pbar = T::lit(*pb.numer() as f64) / T::lit(*pb.denom() as f64);
    (pbar / (T::lit(2.0) * c_np.powf(pbar))).powf(dim.as_scalar::<T>() / T::lit(4.0))
}

/// Best constant on the default soliton grid.
pub fn gn_constant<T: Scalar>(dim: Dim, p: &Exponent<T>) -> Result<GnConstants<T>> {
    gn_constant_on(dim, p, RadialGridSpec::default())
}

pub fn gn_constant_on<T: Scalar>(dim: Dim, p: &Exponent<T>, grid: RadialGridSpec<T>) -> Result<GnConstants<T>> {
    let w = shoot_soliton(dim, p, grid)?;
    let (gamma, _) = gamma_of(dim, p);
    let grad2 = w.grad2();
    let mass2 = w.field.mass2();
    let lp = w.field.lp_pow(p.value());
    let c_np = gn_ratio_from(gamma, grad2, mass2, lp, p.value());
    let abar_n = (p.cmp_exact(dim.pbar_exact()) == Ordering::Equal).then(|| critical_mass_from_constant(dim, c_np));
    Ok(GnConstants {
        dim,
        p: p.value(),
        c_np,
        mass_w: mass2.sqrt(),
        abar_n,
        residual: ode_residual(&w.field, &soliton_equation(dim, p.value())),
        grad2_w: grad2,
        lp_w: lp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn closed_form_w(p: f64, x: f64) -> f64 {
        (p / 2.0 / ((p - 2.0) * x / 2.0).cosh().powi(2)).powf(1.0 / (p - 2.0))
    }

    #[test]
    fn soliton_matches_closed_form_1d() {
        for p in [3.0, 4.0, 6.0, 8.0] {
            let w = shoot_soliton(Dim::One, &Exponent::real(p), RadialGridSpec::default()).unwrap();
            let err = (0..w.field.len())
                .map(|j| (w.field.values[j] - closed_form_w(p, w.field.r(j))).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-6, "p={p} err={err}");
            assert_eq!(w.derivative[0], 0.0);
        }
    }

    #[test]
    fn quintic_values() {
        let g = gn_constant::<f64>(Dim::One, &Exponent::integer(6)).unwrap();
        assert!((g.mass_w.powi(2) - 3f64.sqrt() * PI / 2.0).abs() < 1e-6);
        assert!((g.c_np - (2.0 / PI).powf(1.0 / 3.0)).abs() < 1e-7);
        assert!((g.abar_n.unwrap() - (3f64.sqrt() * PI / 2.0).sqrt()).abs() < 1e-7);
    }

    #[test]
    fn cubic_value_from_sech_integrals() {
        // ∫ w⁴ = 4·4/3, ∫ w'² = 2·2/3, ∫ w² = 4, γ = 1/4
        let oracle = (16.0f64 / 3.0).powf(0.25) / ((4.0f64 / 3.0).powf(0.125) * 4f64.powf(0.375));
        let g = gn_constant::<f64>(Dim::One, &Exponent::integer(4)).unwrap();
        assert!((g.c_np - oracle).abs() < 1e-8);
        assert!((g.c_np - 0.8717).abs() < 1e-4);
        assert!(g.abar_n.is_none());
        assert!(g.residual < 1e-6);
    }

    #[test]
    fn rejects_supercritical_sobolev() {
        assert!(gn_constant::<f64>(Dim::Three, &Exponent::integer(6)).is_err());
        assert!(gn_constant::<f64>(Dim::Two, &Exponent::integer(2)).is_err());
    }
}
