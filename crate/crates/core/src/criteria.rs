//! Explicit threshold functions: `h` and its roots, the three existence
//! conditions, the blow-up bound `g`/`M`, and the stability window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gn::{gn_constant, GnConstants};
use crate::params::{exponent_ordering, ExponentOrdering, ModelParams, Regime};
use crate::roots::{bisect, golden_min};
use crate::scalar::Scalar;

/// Relative width of the band around `lhs = rhs` reported as a tangency.
pub const TANGENCY_TOL: f64 = 1e-9;

/// GN constants for both exponents of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ModelConstants<T> {
    pub q: GnConstants<T>,
    pub p: GnConstants<T>,
}

impl<T: Scalar> ModelConstants<T> {
    pub fn compute(params: &ModelParams<T>) -> Result<Self> {
        Ok(ModelConstants {
            q: gn_constant(params.dim, &params.q)?,
            p: gn_constant(params.dim, &params.p)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ThresholdReport<T> {
    pub condition_holds: bool,
    pub lhs: T,
    pub rhs: T,
    /// `rhs - lhs`; zero at a reported tangency.
    pub margin: T,
    pub boundary: bool,
    pub regime: Regime,
}

impl<T: Scalar> ThresholdReport<T> {
    fn new(lhs: T, rhs: T, regime: Regime) -> Self {
        let boundary = ((lhs - rhs) / rhs).abs() <= T::tol(TANGENCY_TOL);
        ThresholdReport {
            condition_holds: lhs < rhs && !boundary,
            lhs,
            rhs,
            margin: if boundary { T::zero() } else { rhs - lhs },
            boundary,
            regime,
        }
    }
}

/// `φ(t) = A t^a - B t^b` with `0 < a < b`; unimodal with a maximum.
#[derive(Debug, Clone, Copy)]
struct PowerPair<T> {
    a_coef: T,
    a_rate: T,
    b_coef: T,
    b_rate: T,
}

impl<T: Scalar> PowerPair<T> {
    fn eval(&self, t: T) -> T {
        self.a_coef * t.powf(self.a_rate) - self.b_coef * t.powf(self.b_rate)
    }

    fn argmax(&self) -> T {
        (self.a_rate * self.a_coef / (self.b_rate * self.b_coef)).powf(T::one() / (self.b_rate - self.a_rate))
    }

    /// The two roots of `φ(t) = k`, `0 < k < max φ`, by bisection in `ln t`.
    fn roots(&self, k: T) -> (T, T) {
        let tm = self.argmax();
        let xm = tm.ln();
        let f = |x: T| self.eval(x.exp()) - k;
        let step = T::lit(4.0);
        let mut lo = xm - step;
        while f(lo) > T::zero() {
            lo = lo - step;
        }
        let mut hi = xm + step;
        while f(hi) > T::zero() {
            hi = hi + step;
        }
        let tol = T::tol(1e-15);
        (bisect(f, lo, xm, tol).exp(), bisect(f, xm, hi, tol).exp())
    }
}

/// Coefficients of `h(t) = t²/2 - k_q t^{α_q} - k_p t^{α_p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct HCoefficients<T> {
    pub k_q: T,
    pub k_p: T,
    pub alpha_q: T,
    pub alpha_p: T,
}

impl<T: Scalar> HCoefficients<T> {
    pub fn new(params: &ModelParams<T>, c: &ModelConstants<T>) -> Self {
        let d = params.derived();
        let (p, q, a) = (params.p.value(), params.q.value(), params.a);
        HCoefficients {
            k_q: params.mu * c.q.c_pow() / q * a.powf((T::one() - d.gamma_q) * q),
            k_p: c.p.c_pow() / p * a.powf((T::one() - d.gamma_p) * p),
            alpha_q: d.alpha_q,
            alpha_p: d.alpha_p,
        }
    }

    pub fn eval(&self, t: T) -> T {
        t * t / T::lit(2.0) - self.k_q * t.powf(self.alpha_q) - self.k_p * t.powf(self.alpha_p)
    }

    fn phi(&self) -> PowerPair<T> {
        PowerPair {
            a_coef: T::lit(0.5),
            a_rate: T::lit(2.0) - self.alpha_q,
            b_coef: self.k_p,
            b_rate: self.alpha_p - self.alpha_q,
        }
    }

    /// Maximiser of `φ(t) = t^{2-α_q}/2 - k_p t^{α_p-α_q}`.
    pub fn tbar(&self) -> T {
        self.phi().argmax()
    }
}

/// `h(t)` for the model's constants.
pub fn h_eval<T: Scalar>(t: T, params: &ModelParams<T>, c: &ModelConstants<T>) -> T {
    HCoefficients::new(params, c).eval(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct HGeometry<T> {
    pub r0: T,
    pub r1: T,
    pub tbar: T,
    /// Maximum of `h` on `(r0, r1)`.
    pub hmax: T,
    pub hmax_at: T,
    /// Local minimum of `h` on `(0, r0)`.
    pub local_min_level: T,
    pub local_min_at: T,
}

fn require_mixed<T: Scalar>(params: &ModelParams<T>) -> Result<()> {
    match params.regime() {
        Regime::MixedFocusing => Ok(()),
        actual => Err(Error::Regime {
            expected: "MixedFocusing",
            actual,
        }),
    }
}

/// Roots `R_0 < R_1` of `h` with the extrema of `h`, or `None` when `h`
/// is nowhere positive (including a tangency).
pub fn h_roots<T: Scalar>(params: &ModelParams<T>, c: &ModelConstants<T>) -> Result<Option<HGeometry<T>>> {
    require_mixed(params)?;
    let hc = HCoefficients::new(params, c);
    let phi = hc.phi();
    let tbar = phi.argmax();
    let peak = phi.eval(tbar);
    // h > 0 somewhere iff φ(t̄) > k_q; the power matches the scaling of
    // (lhs/rhs) so the tangency band agrees with `cond_mixed`.
    let ratio = (hc.k_q / peak).powf(hc.alpha_p - T::lit(2.0));
    if ratio >= T::one() || (T::one() - ratio).abs() <= T::tol(TANGENCY_TOL) {
        return Ok(None);
    }
    let (r0, r1) = phi.roots(hc.k_q);
    let tol = T::tol(1e-13);
    let (xmax, neg_hmax) = golden_min(|x: T| -hc.eval(x.exp()), r0.ln(), r1.ln(), tol);
    let (xmin, hmin) = golden_min(|x: T| hc.eval(x.exp()), r0.ln() - T::lit(60.0), r0.ln(), tol);
    Ok(Some(HGeometry {
        r0,
        r1,
        tbar,
        hmax: -neg_hmax,
        hmax_at: xmax.exp(),
        local_min_level: hmin,
        local_min_at: xmin.exp(),
    }))
}

/// Right side of the mixed condition; depends only on exponents and
/// constants.
pub fn rhs_mixed<T: Scalar>(params: &ModelParams<T>, c: &ModelConstants<T>) -> T {
    let d = params.derived();
    let (p, q) = (params.p.value(), params.q.value());
    let two = T::lit(2.0);
    let (ap, aq) = (d.alpha_p, d.alpha_q);
    let f1 = p * (two - aq) / (two * c.p.c_pow() * (ap - aq));
    let f2 = q * (ap - two) / (two * c.q.c_pow() * (ap - aq));
    f1.powf(two - aq) * f2.powf(ap - two)
}

/// `(μ a^{(1-γ_q)q})^{α_p-2} (a^{(1-γ_p)p})^{2-α_q} < rhs`.
pub fn cond_mixed<T: Scalar>(params: &ModelParams<T>, c: &ModelConstants<T>) -> Result<ThresholdReport<T>> {
    require_mixed(params)?;
    let d = params.derived();
    let (p, q, a, mu) = (params.p.value(), params.q.value(), params.a, params.mu);
    let two = T::lit(2.0);
    let lhs = (mu * a.powf((T::one() - d.gamma_q) * q)).powf(d.alpha_p - two)
        * a.powf((T::one() - d.gamma_p) * p).powf(two - d.alpha_q);
    Ok(ThresholdReport::new(lhs, rhs_mixed(params, c), Regime::MixedFocusing))
}

/// Largest `μ` for which the mixed condition holds at mass `a`:
/// the left side scales like `μ^{α_p-2}`.
pub fn mu_star<T: Scalar>(params: &ModelParams<T>, c: &ModelConstants<T>) -> Result<T> {
    let unit = cond_mixed(&params.with_mu(T::one()), c)?;
    let d = params.derived();
    Ok((unit.rhs / unit.lhs).powf(T::one() / (d.alpha_p - T::lit(2.0))))
}

/// `p̄ / (2 C_{N,p̄}^{p̄})`, the right side of the critical condition.
pub fn rhs_critical<T: Scalar>(c_pbar: &GnConstants<T>) -> T {
    T::lit(2.0).recip() * c_pbar.p / c_pbar.c_pow()
}

/// `μ a^{4/N} < p̄/(2 C_{N,p̄}^{p̄})` for `q = p̄ < p`, `μ >= 0`.
pub fn cond_critical<T: Scalar>(params: &ModelParams<T>, c: &ModelConstants<T>) -> Result<ThresholdReport<T>> {
    let regime = params.regime();
    if exponent_ordering(params) != ExponentOrdering::CriticalSuper || params.mu < T::zero() {
        return Err(Error::Regime {
            expected: "CriticalPerturbation",
            actual: regime,
        });
    }
    let n = params.dim.as_scalar::<T>();
    let lhs = params.mu * params.a.powf(T::lit(4.0) / n);
    Ok(ThresholdReport::new(lhs, rhs_critical(&c.q), regime))
}

/// Defocusing condition for `q <= p̄ < p`, `μ <= 0`.
pub fn cond_defocusing<T: Scalar>(params: &ModelParams<T>, c: &ModelConstants<T>) -> Result<ThresholdReport<T>> {
    let regime = params.regime();
    let ord = exponent_ordering(params);
    if !matches!(ord, ExponentOrdering::SubSuper | ExponentOrdering::CriticalSuper) || params.mu > T::zero() {
        return Err(Error::Regime {
            expected: "SupercriticalDefocusing",
            actual: regime,
        });
    }
    let d = params.derived();
    let (p, q, a) = (params.p.value(), params.q.value(), params.a);
    let two = T::lit(2.0);
    let one = T::one();
    let lhs = (params.mu.abs() * a.powf(q * (one - d.gamma_q))).powf(d.alpha_p - two)
        * a.powf(p * (one - d.gamma_p) * (two - d.alpha_q));
    let rhs = ((one - d.gamma_p) / (c.q.c_pow() * (d.gamma_p - d.gamma_q))).powf(d.alpha_p - two)
        * (one / (d.gamma_p * c.p.c_pow())).powf(two - d.alpha_q);
    Ok(ThresholdReport::new(lhs, rhs, regime))
}

/// The condition that governs existence in the model's regime, if any.
pub fn applicable_condition<T: Scalar>(
    params: &ModelParams<T>,
    c: &ModelConstants<T>,
) -> Result<Option<ThresholdReport<T>>> {
    match params.regime() {
        Regime::MixedFocusing => cond_mixed(params, c).map(Some),
        Regime::CriticalPerturbation => cond_critical(params, c).map(Some),
        Regime::SupercriticalDefocusing => cond_defocusing(params, c).map(Some),
        _ => Ok(None),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BlowupBound<T> {
    pub r2: T,
    pub r3: T,
    pub m_bound: T,
}

/// Coefficients of `g(t) = t² - k_q t^{α_q} - k_p t^{α_p}` (the Pohozaev
/// lower bound).
pub fn g_coefficients<T: Scalar>(params: &ModelParams<T>, c: &ModelConstants<T>) -> HCoefficients<T> {
    let d = params.derived();
    let (p, q, a) = (params.p.value(), params.q.value(), params.a);
    HCoefficients {
        k_q: params.mu * d.gamma_q * c.q.c_pow() * a.powf((T::one() - d.gamma_q) * q),
        k_p: d.gamma_p * c.p.c_pow() * a.powf((T::one() - d.gamma_p) * p),
        alpha_q: d.alpha_q,
        alpha_p: d.alpha_p,
    }
}

pub fn g_eval<T: Scalar>(t: T, params: &ModelParams<T>, c: &ModelConstants<T>) -> T {
    let g = g_coefficients(params, c);
    t * t - g.k_q * t.powf(g.alpha_q) - g.k_p * t.powf(g.alpha_p)
}

/// Roots `R_2 < R_3` of `g` and `M = -min_{[0, R_2]} g`.
pub fn blowup_bound_m<T: Scalar>(params: &ModelParams<T>, c: &ModelConstants<T>) -> Result<BlowupBound<T>> {
    require_mixed(params)?;
    let g = g_coefficients(params, c);
    let psi = PowerPair {
        a_coef: T::one(),
        a_rate: T::lit(2.0) - g.alpha_q,
        b_coef: g.k_p,
        b_rate: g.alpha_p - g.alpha_q,
    };
    let peak = psi.eval(psi.argmax());
    if !(peak > g.k_q) {
        return Err(Error::Structure("g is nowhere positive".into()));
    }
    let (r2, r3) = psi.roots(g.k_q);
    let eval = |t: T| t * t - g.k_q * t.powf(g.alpha_q) - g.k_p * t.powf(g.alpha_p);
    let (_, gmin) = golden_min(|x: T| eval(x.exp()), r2.ln() - T::lit(60.0), r2.ln(), T::tol(1e-13));
    Ok(BlowupBound {
        r2,
        r3,
        m_bound: (-gmin).max(T::zero()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StabilityWindow<T> {
    pub mu_tilde: T,
    /// `μ*` at mass `ã + ρ`; the window never exceeds it.
    pub mu_star: T,
    /// Whether the window is capped by `μ*` rather than the radius test.
    pub capped: bool,
}

/// Largest `μ` with `2 R_0(ã+ρ, μ)² < R_1(ã, μ)²`, the mixed condition
/// holding at mass `ã + ρ`.
pub fn stability_window<T: Scalar>(
    a_tilde: T,
    rho: T,
    params: &ModelParams<T>,
    c: &ModelConstants<T>,
) -> Result<StabilityWindow<T>> {
    if !(a_tilde > T::zero()) || !(rho > T::zero()) {
        return Err(Error::Validation("stability window needs ã > 0 and ρ > 0".into()));
    }
    let base = params.with_mu(T::one());
    require_mixed(&base)?;
    let big = base.with_mass(a_tilde + rho);
    let small = base.with_mass(a_tilde);
    let mstar = mu_star(&big, c)?;
    let holds = |mu: T| -> bool {
        let g_big = h_roots(&big.with_mu(mu), c).ok().flatten();
        let g_small = h_roots(&small.with_mu(mu), c).ok().flatten();
        match (g_big, g_small) {
            (Some(b), Some(s)) => T::lit(2.0) * b.r0 * b.r0 < s.r1 * s.r1,
            _ => false,
        }
    };
    // probe just below μ* to decide whether the window is capped
    let near = mstar * (T::one() - T::lit(1e-7));
    if holds(near) {
        return Ok(StabilityWindow {
            mu_tilde: mstar,
            mu_star: mstar,
            capped: true,
        });
    }
    let mut lo = mstar;
    while !holds(lo) {
        lo = lo / T::lit(2.0);
        if lo < T::min_positive_value() * T::lit(1e10) {
            return Err(Error::Structure("stability window is empty".into()));
        }
    }
    // F(μ) = R_1² - 2R_0² decreases in μ
    let (lo, _) = crate::roots::bisect_predicate(|mu| !holds(mu), lo, near, T::tol(1e-12));
    Ok(StabilityWindow {
        mu_tilde: lo,
        mu_star: mstar,
        capped: false,
    })
}

/// Radius pair `(R_0, R_1)` at a given `(a, μ)`.
pub fn radii<T: Scalar>(params: &ModelParams<T>, c: &ModelConstants<T>) -> Result<Option<(T, T)>> {
    Ok(h_roots(params, c)?.map(|g| (g.r0, g.r1)))
}
