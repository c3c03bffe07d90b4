//! Mass-preserving dilations, energy, Pohozaev functional and fiber maps.
//!
//! Everything here acts on a [`FiberTriple`], the four integrals of a field
//! that determine `E_μ`, `P_μ` and `Ψ_u^μ` completely.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::scalar::Scalar;

/// `(|∇u|₂², |u|_q^q, |u|_p^p, |u|₂²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FiberTriple<T> {
    pub grad2: T,
    pub mq: T,
    pub mp: T,
    pub mass2: T,
}

impl<T: Scalar> FiberTriple<T> {
    pub fn new(grad2: T, mq: T, mp: T, mass2: T) -> Result<Self> {
        let t = FiberTriple { grad2, mq, mp, mass2 };
        for (name, v) in [("grad2", grad2), ("mq", mq), ("mp", mp), ("mass2", mass2)] {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::Validation(format!("{name} must be finite and >= 0 (got {v})")));
            }
        }
        Ok(t)
    }

    pub fn is_zero(&self) -> bool {
        self.mass2 == T::zero() && self.grad2 == T::zero()
    }

    /// GN sanity check `mp <= (1+slack) C^p mass2^{p(1-γ_p)/2} grad2^{pγ_p/2}`.
    pub fn satisfies_gn(&self, params: &ModelParams<T>, c_np: T, slack: T) -> bool {
        let d = params.derived();
        let p = params.p.value();
        let two = T::lit(2.0);
        let bound = c_np.powf(p) * self.mass2.powf(p * (T::one() - d.gamma_p) / two) * self.grad2.powf(d.alpha_p / two);
        self.mp <= (T::one() + slack) * bound
    }
}

/// `s ⋆ u` on the triple level.
pub fn scale<T: Scalar>(tr: &FiberTriple<T>, s: T, params: &ModelParams<T>) -> FiberTriple<T> {
    let d = params.derived();
    FiberTriple {
        grad2: (T::lit(2.0) * s).exp() * tr.grad2,
        mq: (d.alpha_q * s).exp() * tr.mq,
        mp: (d.alpha_p * s).exp() * tr.mp,
        mass2: tr.mass2,
    }
}

/// `E_μ = |∇u|²/2 - |u|_p^p/p - μ|u|_q^q/q`.
pub fn energy<T: Scalar>(tr: &FiberTriple<T>, params: &ModelParams<T>) -> T {
    tr.grad2 / T::lit(2.0) - tr.mp / params.p.value() - params.mu * tr.mq / params.q.value()
}

/// `P_μ = |∇u|² - γ_p|u|_p^p - μγ_q|u|_q^q`.
pub fn pohozaev<T: Scalar>(tr: &FiberTriple<T>, params: &ModelParams<T>) -> T {
    let d = params.derived();
    tr.grad2 - d.gamma_p * tr.mp - params.mu * d.gamma_q * tr.mq
}

/// Relative Pohozaev residual `|P| / |∇u|²`.
pub fn pohozaev_residual<T: Scalar>(tr: &FiberTriple<T>, params: &ModelParams<T>) -> T {
    pohozaev(tr, params).abs() / tr.grad2.max(T::min_positive_value())
}

/// Position of a function on the Pohozaev set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FiberClass {
    Pplus,
    Pzero,
    Pminus,
    NotOnP,
}

/// Nature of a critical point of `Ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriticalKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CriticalPoint<T> {
    pub s: T,
    pub kind: CriticalKind,
    pub level: T,
}

/// Critical points and zeros of `Ψ_u^μ`.
///
/// `s_u` is the local minimum and `t_u` the (last) local maximum when they
/// exist; `c_u` is the zero where `Ψ` turns positive, `d_u` where it turns
/// negative again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FiberCriticalPoints<T> {
    pub points: Vec<CriticalPoint<T>>,
    pub s_u: Option<T>,
    pub t_u: Option<T>,
    pub c_u: Option<T>,
    pub d_u: Option<T>,
    pub class: FiberClass,
}

impl<T: Scalar> FiberCriticalPoints<T> {
    /// Kind of the critical point nearest to `s = 0`, mapped to `P±`.
    /// Useful for fields that sit on the Pohozaev set only up to a
    /// discretisation residual.
    pub fn nearest_class(&self) -> Option<FiberClass> {
        self.points
            .iter()
            .min_by(|x, y| x.s.abs().partial_cmp(&y.s.abs()).unwrap())
            .map(|c| match c.kind {
                CriticalKind::Min => FiberClass::Pplus,
                CriticalKind::Max => FiberClass::Pminus,
            })
    }
}

/// Tolerance for membership in the Pohozaev set, `|P| < tol (1 + |∇u|²)`.
pub const ON_MANIFOLD_TOL: f64 = 1e-8;

/// `s ↦ Ψ_u^μ(s) = E_μ(s ⋆ u)` for a fixed triple.
#[derive(Debug, Clone, Copy)]
pub struct FiberMap<T> {
    pub tr: FiberTriple<T>,
    p: T,
    q: T,
    mu: T,
    gamma_p: T,
    gamma_q: T,
    alpha_p: T,
    alpha_q: T,
}

impl<T: Scalar> FiberMap<T> {
    pub fn new(tr: FiberTriple<T>, params: &ModelParams<T>) -> Self {
        let d = params.derived();
        FiberMap {
            tr,
            p: params.p.value(),
            q: params.q.value(),
            mu: params.mu,
            gamma_p: d.gamma_p,
            gamma_q: d.gamma_q,
            alpha_p: d.alpha_p,
            alpha_q: d.alpha_q,
        }
    }

    pub fn psi(&self, s: T) -> T {
        let two = T::lit(2.0);
        (two * s).exp() * self.tr.grad2 / two
            - (self.alpha_p * s).exp() * self.tr.mp / self.p
            - self.mu * (self.alpha_q * s).exp() * self.tr.mq / self.q
    }

    /// `Ψ'(s) = P_μ(s ⋆ u)`.
    pub fn psi_prime(&self, s: T) -> T {
        let two = T::lit(2.0);
        (two * s).exp() * self.tr.grad2
            - self.gamma_p * (self.alpha_p * s).exp() * self.tr.mp
            - self.mu * self.gamma_q * (self.alpha_q * s).exp() * self.tr.mq
    }

    pub fn psi_second(&self, s: T) -> T {
        let two = T::lit(2.0);
        two * (two * s).exp() * self.tr.grad2
            - self.alpha_p * self.gamma_p * (self.alpha_p * s).exp() * self.tr.mp
            - self.mu * self.alpha_q * self.gamma_q * (self.alpha_q * s).exp() * self.tr.mq
    }

    /// Half-width of the search window in `s`.
    pub fn window(&self) -> T {
        let top = self.alpha_p.max(T::lit(2.0));
        T::lit(60.0).min(T::lit(0.9) * T::max_value().ln() / top)
    }

    pub fn classify_at_zero(&self) -> FiberClass {
        let tol = T::tol(ON_MANIFOLD_TOL) * (T::one() + self.tr.grad2);
        if self.psi_prime(T::zero()).abs() >= tol {
            return FiberClass::NotOnP;
        }
        let second = self.psi_second(T::zero());
        if second.abs() < tol {
            FiberClass::Pzero
        } else if second > T::zero() {
            FiberClass::Pplus
        } else {
            FiberClass::Pminus
        }
    }

    pub fn critical_points(&self) -> Result<FiberCriticalPoints<T>> {
        if self.tr.grad2 <= T::zero() {
            return Err(Error::Structure("fiber map of a field with zero gradient".into()));
        }
        // Ψ'(s) = e^{α_q s} (A e^{(2-α_q)s} - B e^{(α_p-α_q)s} - C)
        let two = T::lit(2.0);
        let crit = TwoExp {
            a_coef: self.tr.grad2,
            a_rate: two - self.alpha_q,
            b_coef: self.gamma_p * self.tr.mp,
            b_rate: self.alpha_p - self.alpha_q,
            c: self.mu * self.gamma_q * self.tr.mq,
        };
        // Ψ(s) = e^{α_q s} (A/2 e^{..} - B/p e^{..} - μ mq/q)
        let zero = TwoExp {
            a_coef: self.tr.grad2 / two,
            a_rate: crit.a_rate,
            b_coef: self.tr.mp / self.p,
            b_rate: crit.b_rate,
            c: self.mu * self.tr.mq / self.q,
        };
        let w = self.window();
        let mut points: Vec<CriticalPoint<T>> = self
            .closed_form_critical()
            .unwrap_or_else(|| crit.roots(w))
            .into_iter()
            .map(|(s, up)| CriticalPoint {
                s,
                kind: if up { CriticalKind::Min } else { CriticalKind::Max },
                level: self.psi(s),
            })
            .collect();
        points.sort_by(|x, y| x.s.partial_cmp(&y.s).unwrap());
        if points.is_empty() {
            return Err(Error::Structure(format!(
                "no critical point of the fiber map in s ∈ [-{w}, {w}]"
            )));
        }
        let zeros = zero.roots(w);
        let s_u = points.iter().find(|c| c.kind == CriticalKind::Min).map(|c| c.s);
        let t_u = points.iter().rev().find(|c| c.kind == CriticalKind::Max).map(|c| c.s);
        let c_u = zeros.iter().find(|z| z.1).map(|z| z.0);
        let d_u = zeros.iter().rev().find(|z| !z.1).map(|z| z.0);
        Ok(FiberCriticalPoints {
            points,
            s_u,
            t_u,
            c_u,
            d_u,
            class: self.classify_at_zero(),
        })
    }

    /// Two-term closed forms when one of the powers drops out.
    fn closed_form_critical(&self) -> Option<Vec<(T, bool)>> {
        let two = T::lit(2.0);
        let (coef, rate) = if self.mu * self.tr.mq == T::zero() {
            (self.gamma_p * self.tr.mp, self.alpha_p)
        } else if self.tr.mp == T::zero() {
            (self.mu * self.gamma_q * self.tr.mq, self.alpha_q)
        } else {
            return None;
        };
        // e^{2s} g = coef e^{rate s}
        if coef <= T::zero() || rate == two {
            return Some(vec![]);
        }
        let s = (self.tr.grad2 / coef).ln() / (rate - two);
        let up = rate < two;
        Some(vec![(s, up)])
    }
}

/// `f(s) = A e^{a s} - B e^{b s} - C` with `A > 0`, `b > 0`.
///
/// Splits the line at the unique extremum of the two exponential terms
/// (when it exists) and bisects each monotone piece.
struct TwoExp<T> {
    a_coef: T,
    a_rate: T,
    b_coef: T,
    b_rate: T,
    c: T,
}

impl<T: Scalar> TwoExp<T> {
    fn eval(&self, s: T) -> T {
        self.a_coef * (self.a_rate * s).exp() - self.b_coef * (self.b_rate * s).exp() - self.c
    }

    fn extremum(&self) -> Option<T> {
        let (aa, ab) = (self.a_rate * self.a_coef, self.b_rate * self.b_coef);
        if self.a_rate <= T::zero() || ab <= T::zero() || self.a_rate == self.b_rate {
            return None;
        }
        Some((aa / ab).ln() / (self.b_rate - self.a_rate))
    }

    /// Roots in `[-w, w]`, each tagged with `true` for an upward crossing.
    fn roots(&self, w: T) -> Vec<(T, bool)> {
        let mut cuts = vec![-w];
        if let Some(x) = self.extremum() {
            if x > -w && x < w {
                cuts.push(x);
            }
        }
        cuts.push(w);
        let mut out = Vec::new();
        for pair in cuts.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let (flo, fhi) = (self.eval(lo), self.eval(hi));
            if flo == T::zero() {
                out.push((lo, fhi > T::zero()));
                continue;
            }
            if flo.signum() == fhi.signum() || fhi == T::zero() {
                continue;
            }
            let up = fhi > flo;
            let s = crate::roots::bisect(|s| self.eval(s), lo, hi, T::tol(1e-14));
            out.push((s, up));
        }
        out.dedup_by(|x, y| (x.0 - y.0).abs() <= T::tol(1e-12));
        out
    }
}
