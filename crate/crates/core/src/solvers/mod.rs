//! Normalized stationary states.
//!
//! Branches are located on the mass curve `λ ↦ |u_λ|_2` of the positive
//! radial solutions produced by shooting, and selected by the sign of
//! `Ψ''(0)`. The local minimiser can also be reached by a mass-projected
//! gradient flow, see [`flow`].

pub mod flow;
pub mod sweep;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::criteria::{applicable_condition, ModelConstants};
use crate::error::{Error, Result};
use crate::fiber::{energy, pohozaev_residual, FiberClass, FiberMap, FiberTriple};
use crate::grid::{RadialField, RadialGridSpec};
use crate::params::{ModelParams, Regime};
use crate::scalar::Scalar;
use crate::shooting::{ode_residual, shoot, shoot_auto, Nonlinearity, ShootingOptions, ShotProfile};

pub use flow::{gradient_flow_local_min, FlowConfig, FlowOutcome};
pub use sweep::{asymptotic_sweep, AsymptoticRow, SweepVariable};

/// Parameters together with their GN constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Model<T> {
    pub params: ModelParams<T>,
    pub constants: ModelConstants<T>,
}

impl<T: Scalar> Model<T> {
    pub fn new(params: ModelParams<T>) -> Result<Self> {
        params.validate()?;
        Ok(Model {
            constants: ModelConstants::compute(&params)?,
            params,
        })
    }

    pub fn with_constants(params: ModelParams<T>, constants: ModelConstants<T>) -> Self {
        Model { params, constants }
    }

    pub fn with_mu(&self, mu: T) -> Self {
        Model {
            params: self.params.with_mu(mu),
            ..*self
        }
    }

    pub fn with_mass(&self, a: T) -> Self {
        Model {
            params: self.params.with_mass(a),
            ..*self
        }
    }

    pub fn nonlinearity(&self, lambda: T) -> Nonlinearity<T> {
        Nonlinearity {
            dim: self.params.dim,
            kappa2: -lambda,
            mu: self.params.mu,
            q: self.params.q.value(),
            p: self.params.p.value(),
            nu: T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    LocalMin,
    MountainPass,
    Unique,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::LocalMin => "local-min",
            Branch::MountainPass => "mountain-pass",
            Branch::Unique => "unique",
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "localmin" => Ok(Branch::LocalMin),
            "mountainpass" => Ok(Branch::MountainPass),
            "unique" => Ok(Branch::Unique),
            _ => Err(Error::Validation(format!("unknown branch {s:?}"))),
        }
    }
}

/// A normalized stationary state with its diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GroundStateResult<T> {
    pub profile: RadialField<T>,
    pub lambda: T,
    pub energy_level: T,
    /// `|P(u)| / |∇u|²`.
    pub pohozaev_residual: T,
    pub fiber_class: FiberClass,
    pub branch: Branch,
    /// `| |u|_2 - a | / a`.
    pub mass_error: T,
    pub grad_norm: T,
    /// Weighted L² residual of the stationary equation.
    pub ode_residual: T,
    /// `(|∇u|² - μ|u|_q^q - |u|_p^p) / a²`, which equals `λ` on solutions.
    pub lambda_rayleigh: T,
    pub triple: FiberTriple<T>,
}

/// Sign of `Ψ''(0)` for a triple on (or numerically near) the Pohozaev set.
pub fn solution_class<T: Scalar>(tr: &FiberTriple<T>, params: &ModelParams<T>) -> FiberClass {
    let s = FiberMap::new(*tr, params).psi_second(T::zero());
    let tol = T::tol(1e-10) * tr.grad2;
    if s > tol {
        FiberClass::Pplus
    } else if s < -tol {
        FiberClass::Pminus
    } else {
        FiberClass::Pzero
    }
}

/// Positive decaying solution of the stationary equation at fixed `λ < 0`.
/// With `grid = None` the grid adapts to the profile scale.
pub fn stationary_shoot<T: Scalar>(
    lambda: T,
    params: &ModelParams<T>,
    grid: Option<RadialGridSpec<T>>,
) -> Result<ShotProfile<T>> {
    if !(lambda < T::zero()) {
        return Err(Error::Validation(format!("λ < 0 required (λ = {lambda})")));
    }
    let nl = Nonlinearity {
        dim: params.dim,
        kappa2: -lambda,
        mu: params.mu,
        q: params.q.value(),
        p: params.p.value(),
        nu: T::one(),
    };
    let (v, amp, kappa) = nl.rescaled();
    let opts = ShootingOptions::default();
    let shot = match grid {
        Some(g) => shoot(
            &v,
            RadialGridSpec {
                points: g.points,
                radius: g.radius * kappa,
            },
            &opts,
        ),
        None => shoot_auto(&v, &opts),
    }?;
    Ok(shot.unscaled(amp, kappa))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MassCurvePoint<T> {
    pub lambda: T,
    /// `|u_λ|_2`
    pub mass: T,
    pub energy: T,
    pub grad2: T,
    pub fiber_class: FiberClass,
    pub u0: T,
}

/// One sample of the mass curve; failed shots are kept as gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MassCurveRow<T> {
    pub lambda: T,
    pub point: Option<MassCurvePoint<T>>,
    pub failure: Option<String>,
}

pub fn mass_curve_point<T: Scalar>(lambda: T, params: &ModelParams<T>) -> Result<MassCurvePoint<T>> {
    let shot = stationary_shoot(lambda, params, None)?;
    let tr = shot.triple(params.q.value(), params.p.value());
    Ok(MassCurvePoint {
        lambda,
        mass: tr.mass2.sqrt(),
        energy: energy(&tr, params),
        grad2: tr.grad2,
        fiber_class: solution_class(&tr, params),
        u0: shot.u0,
    })
}

/// Shooting results along a strictly negative, sorted `λ` grid.
pub fn mass_curve<T: Scalar>(lambda_grid: &[T], params: &ModelParams<T>) -> Result<Vec<MassCurveRow<T>>> {
    if lambda_grid.iter().any(|&l| !(l < T::zero())) {
        return Err(Error::Validation("λ grid must be strictly negative".into()));
    }
    if lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation("λ grid must be strictly increasing".into()));
    }
    Ok(lambda_grid
        .iter()
        .map(|&lambda| match mass_curve_point(lambda, params) {
            Ok(p) => MassCurveRow {
                lambda,
                point: Some(p),
                failure: None,
            },
            Err(e) => MassCurveRow {
                lambda,
                point: None,
                failure: Some(e.to_string()),
            },
        })
        .collect())
}

/// `λ_k = -10^{x_k}` for `x` evenly spaced in `[x_lo, x_hi]`, increasing in `λ`.
pub fn log_lambda_grid<T: Scalar>(x_lo: T, x_hi: T, steps: usize) -> Vec<T> {
    let ten = T::lit(10.0);
    let n = steps.max(2);
    (0..n)
        .map(|k| {
            let x = x_hi - (x_hi - x_lo) * T::from_usize_lossy(k) / T::from_usize_lossy(n - 1);
            -ten.powf(x)
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions<T> {
    /// Relative mass tolerance of the `λ` bisection.
    pub mass_tol: T,
    /// Initial `log10 |λ|` scan window and spacing.
    pub scan_lo: T,
    pub scan_hi: T,
    pub scan_step: T,
    /// Hard limits for window extension.
    pub scan_floor: T,
    pub scan_ceiling: T,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        SolveOptions {
            mass_tol: T::tol(1e-8),
            scan_lo: T::lit(-12.0),
            scan_hi: T::lit(4.0),
            scan_step: T::lit(0.5),
            scan_floor: T::lit(-290.0),
            scan_ceiling: T::lit(12.0),
        }
    }
}

/// Fiber class a solution on `branch` must have in the model's regime, or
/// `None` when the regime has no such branch.
fn expected_class<T: Scalar>(model: &Model<T>, branch: Branch) -> Result<FiberClass> {
    let params = &model.params;
    let regime = params.regime();
    let a = params.a.to_f64_lossy();
    let absent = |reason: String| Error::NoSuchBranch {
        branch: branch.name(),
        mass: a,
        reason,
    };
    let condition = applicable_condition(params, &model.constants)?;
    if let Some(c) = condition {
        if !c.condition_holds {
            return Err(absent(format!(
                "existence condition fails in regime {regime} (lhs {:e} >= rhs {:e})",
                c.lhs.to_f64_lossy(),
                c.rhs.to_f64_lossy()
            )));
        }
    }
    let pbar_ord = params.p.cmp_exact(params.dim.pbar_exact());
    match (regime, branch) {
        (Regime::MixedFocusing, Branch::LocalMin) => Ok(FiberClass::Pplus),
        (Regime::MixedFocusing, Branch::MountainPass) => Ok(FiberClass::Pminus),
        (
            Regime::CriticalPerturbation | Regime::SupercriticalDefocusing | Regime::PureSupercritical,
            Branch::Unique,
        ) => {
            if regime == Regime::PureSupercritical && params.mu < T::zero() {
                return Err(absent("defocusing with both powers supercritical".into()));
            }
            Ok(FiberClass::Pminus)
        }
        (Regime::PureSubcritical, Branch::LocalMin | Branch::Unique) if params.mu > T::zero() => Ok(FiberClass::Pplus),
        (Regime::CriticalLeading, Branch::LocalMin | Branch::Unique) if params.mu > T::zero() => {
            let abar = model.constants.p.abar_n.unwrap_or(T::infinity());
            if params.a < abar {
                Ok(FiberClass::Pplus)
            } else {
                Err(absent(format!("a >= critical mass {abar}")))
            }
        }
        (Regime::Homogeneous, Branch::Unique) => match pbar_ord {
            Ordering::Greater => Ok(FiberClass::Pminus),
            Ordering::Less => Ok(FiberClass::Pplus),
            Ordering::Equal => Err(absent("mass is independent of λ at the critical exponent".into())),
        },
        _ => Err(absent(format!("regime {regime} has no {} branch", branch.name()))),
    }
}

#[derive(Clone, Copy)]
struct Sample<T> {
    x: T,
    point: Option<MassCurvePoint<T>>,
}

fn sample<T: Scalar>(params: &ModelParams<T>, x: T) -> Sample<T> {
    let lambda = -T::lit(10.0).powf(x);
    Sample {
        x,
        point: mass_curve_point(lambda, params).ok(),
    }
}

fn brackets<T: Scalar>(s0: &Sample<T>, s1: &Sample<T>, a: T, class: FiberClass) -> bool {
    match (&s0.point, &s1.point) {
        (Some(p0), Some(p1)) => {
            p0.fiber_class == class && p1.fiber_class == class && (p0.mass - a).signum() != (p1.mass - a).signum()
        }
        _ => false,
    }
}

/// `s0.x < s1.x`. A bracket inside the class, either directly or, when
/// the class changes between the samples, between the in-class end and
/// the class boundary located by bisection.
fn bracket_between<T: Scalar>(
    params: &ModelParams<T>,
    s0: &Sample<T>,
    s1: &Sample<T>,
    class: FiberClass,
) -> Option<(T, T)> {
    let a = params.a;
    if brackets(s0, s1, a, class) {
        return Some((s0.x, s1.x));
    }
    let (p0, p1) = (s0.point.as_ref()?, s1.point.as_ref()?);
    if (p0.fiber_class == class) == (p1.fiber_class == class) {
        return None;
    }
    let (mut inside, mut outside) = if p0.fiber_class == class {
        (*s0, *s1)
    } else {
        (*s1, *s0)
    };
    let anchor = inside;
    while (outside.x - inside.x).abs() > T::tol(1e-4) {
        let mid = sample(params, (inside.x + outside.x) / T::lit(2.0));
        match mid.point {
            Some(m) if m.fiber_class == class => {
                if (m.mass - a).signum() != (anchor.point?.mass - a).signum() {
                    return Some(if anchor.x < mid.x {
                        (anchor.x, mid.x)
                    } else {
                        (mid.x, anchor.x)
                    });
                }
                inside = mid;
            }
            Some(_) => outside = mid,
            None => return None,
        }
    }
    None
}

/// Scan `x = log10|λ|` downward from `scan_hi` (to `scan_lo`, then to
/// `scan_floor` at double spacing), then upward to `scan_ceiling`, and
/// stop at the first sign change of `mass - a` inside the class. Shots at
/// tiny `|λ|` are the expensive ones, so they are reached last.
fn scan_bracket<T: Scalar>(
    params: &ModelParams<T>,
    class: FiberClass,
    opts: &SolveOptions<T>,
) -> std::result::Result<(T, T), (T, T)> {
    let step = opts.scan_step;
    let half = step / T::lit(2.0);
    let top = sample(params, opts.scan_hi);
    let mut prev = top;
    let mut lowest = opts.scan_hi;
    let mut x = opts.scan_hi - step;
    while x >= opts.scan_floor - half {
        let cur = sample(params, x);
        if let Some(b) = bracket_between(params, &cur, &prev, class) {
            return Ok(b);
        }
        lowest = x;
        prev = cur;
        x = x - if x > opts.scan_lo + half {
            step
        } else {
            step * T::lit(2.0)
        };
    }
    let mut prev = top;
    let mut highest = opts.scan_hi;
    let mut x = opts.scan_hi + step;
    while x <= opts.scan_ceiling + half {
        let cur = sample(params, x);
        if let Some(b) = bracket_between(params, &prev, &cur, class) {
            return Ok(b);
        }
        highest = x;
        prev = cur;
        x = x + step;
    }
    Err((lowest, highest))
}

/// Normalized solution with `|u|_2 = a` on the requested branch.
pub fn solve_prescribed_mass<T: Scalar>(
    model: &Model<T>,
    branch: Branch,
    opts: &SolveOptions<T>,
) -> Result<GroundStateResult<T>> {
    let params = &model.params;
    let a = params.a;
    let class = expected_class(model, branch)?;
    let (mut xl, mut xh) = scan_bracket(params, class, opts).map_err(|(lo, hi)| Error::NoSuchBranch {
        branch: branch.name(),
        mass: a.to_f64_lossy(),
        reason: format!("no {class:?} solution with this mass for log10|λ| in [{lo}, {hi}]"),
    })?;
    let mass_at = |x: T| mass_curve_point(-T::lit(10.0).powf(x), params);
    // Illinois regula falsi in x = log10|λ|
    let mut fl = mass_at(xl)?.mass - a;
    let mut fh = mass_at(xh)?.mass - a;
    let mut best = if fl.abs() < fh.abs() { xl } else { xh };
    let mut side = 0i8;
    for _ in 0..200 {
        if ((fl.abs().min(fh.abs())) / a) < opts.mass_tol || (xh - xl).abs() < T::tol(1e-14) {
            break;
        }
        let mut xm = xh - fh * (xh - xl) / (fh - fl);
        if !(xm > xl.min(xh) && xm < xl.max(xh)) {
            xm = (xl + xh) / T::lit(2.0);
        }
        let fm = mass_at(xm)?.mass - a;
        best = xm;
        if (fm / a).abs() < opts.mass_tol {
            break;
        }
        if fm.signum() == fh.signum() {
            xh = xm;
            fh = fm;
            if side == 1 {
                fl = fl / T::lit(2.0);
            }
            side = 1;
        } else {
            xl = xm;
            fl = fm;
            if side == -1 {
                fh = fh / T::lit(2.0);
            }
            side = -1;
        }
        best = if fl.abs() < fh.abs() { xl } else { xh };
    }
    let lambda = -T::lit(10.0).powf(best);
    let shot = stationary_shoot(lambda, params, None)?;
    let result = finish(model, shot, lambda, branch)?;
    if result.mass_error > opts.mass_tol * T::lit(10.0) {
        return Err(Error::Solver(format!(
            "mass bisection stalled at relative error {:e}",
            result.mass_error.to_f64_lossy()
        )));
    }
    Ok(result)
}

fn finish<T: Scalar>(
    model: &Model<T>,
    shot: ShotProfile<T>,
    lambda: T,
    branch: Branch,
) -> Result<GroundStateResult<T>> {
    let params = &model.params;
    let tr = shot.triple(params.q.value(), params.p.value());
    let a = params.a;
    let nl = model.nonlinearity(lambda);
    Ok(GroundStateResult {
        lambda,
        energy_level: energy(&tr, params),
        pohozaev_residual: pohozaev_residual(&tr, params),
        fiber_class: solution_class(&tr, params),
        branch,
        mass_error: (tr.mass2.sqrt() - a).abs() / a,
        grad_norm: tr.grad2.sqrt(),
        ode_residual: ode_residual(&shot.field, &nl),
        lambda_rayleigh: rayleigh_lambda(&tr, params),
        triple: tr,
        profile: shot.field,
    })
}

/// `(|∇u|² - μ|u|_q^q - |u|_p^p) / |u|²`.
pub fn rayleigh_lambda<T: Scalar>(tr: &FiberTriple<T>, params: &ModelParams<T>) -> T {
    (tr.grad2 - params.mu * tr.mq - tr.mp) / tr.mass2
}

/// H¹ distance between two radial fields of the same dimension; `v` is
/// resampled onto `u`'s grid.
pub fn h1_distance<T: Scalar>(u: &RadialField<T>, v: &RadialField<T>) -> T {
    let vr = v.resample(u.spec());
    let diff = RadialField {
        dim: u.dim,
        dr: u.dr,
        values: u.values.iter().zip(&vr.values).map(|(&x, &y)| x - y).collect(),
    };
    (diff.mass2() + diff.grad2()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_cubic_mass_two() {
        let params = ModelParams::<f64>::with_ints(1, 4, 3, 2.0, 0.0).unwrap();
        let model = Model::new(params).unwrap();
        let r = solve_prescribed_mass(&model, Branch::Unique, &SolveOptions::default()).unwrap();
        assert!((r.lambda + 1.0).abs() < 1e-7, "λ = {}", r.lambda);
        let err = (0..r.profile.len())
            .map(|j| (r.profile.values[j] - 2f64.sqrt() / r.profile.r(j).cosh()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6);
        assert!(r.pohozaev_residual < 1e-6);
        assert!((r.lambda_rayleigh - r.lambda).abs() < 1e-6);
    }

    #[test]
    fn homogeneous_mass_scaling_law() {
        // u_λ(x) = |λ|^{1/(p-2)} w(√|λ| x): mass² = |λ|^{2/(p-2) - N/2} |w|²
        let params = ModelParams::<f64>::with_ints(1, 4, 3, 1.0, 0.0).unwrap();
        for lam in [-0.01, -0.5, -3.0] {
            let p = mass_curve_point(lam, &params).unwrap();
            assert!((p.mass.powi(2) - 4.0 * (-lam).sqrt()).abs() < 1e-7 * (-lam).sqrt());
        }
    }

    #[test]
    fn mass_curve_records_gaps_and_validates() {
        let params = ModelParams::<f64>::with_ints(1, 4, 3, 1.0, 0.0).unwrap();
        assert!(mass_curve(&[-1.0, 0.5], &params).is_err());
        assert!(mass_curve(&[-1.0, -2.0], &params).is_err());
        let rows = mass_curve(&log_lambda_grid(-1.0, 1.0, 5), &params).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.point.is_some()));
        assert!(rows.windows(2).all(|w| w[0].lambda < w[1].lambda));
    }

    #[test]
    fn branch_parsing() {
        assert_eq!("localmin".parse::<Branch>().unwrap(), Branch::LocalMin);
        assert_eq!("mountain-pass".parse::<Branch>().unwrap(), Branch::MountainPass);
        assert!("x".parse::<Branch>().is_err());
    }

    #[test]
    fn missing_branch_is_structured() {
        let params = ModelParams::<f64>::with_ints(1, 4, 3, 2.0, 0.0).unwrap();
        let model = Model::new(params).unwrap();
        let e = solve_prescribed_mass(&model, Branch::MountainPass, &SolveOptions::default()).unwrap_err();
        assert_eq!(e.category(), "no-such-branch");
    }
}
