//! Limits of the two branches as `μ → 0⁺` or `q → p̄⁻`.

use serde::{Deserialize, Serialize};

use super::{h1_distance, solve_prescribed_mass, Branch, GroundStateResult, Model, SolveOptions};
use crate::criteria::{h_roots, ModelConstants};
use crate::error::{Error, Result};
use crate::params::{Exponent, ModelParams, Regime};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    /// `μ_k = 10^{-1..-4}`.
    MuToZero,
    /// `q_k = p̄ - 10^{-1..-3}`.
    QToPbar,
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "mu" | "mutozero" => Ok(SweepVariable::MuToZero),
            "q" | "qtopbar" => Ok(SweepVariable::QToPbar),
            _ => Err(Error::Validation(format!("unknown sweep variable {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AsymptoticRow<T> {
    /// `μ` or `q`.
    pub parameter: T,
    /// `m(a, ·)`, the local-minimum level.
    pub m: Option<T>,
    /// `|∇ũ|_2`.
    pub grad_local: Option<T>,
    /// `σ(a, ·)`, the mountain-pass level.
    pub sigma: Option<T>,
    /// `|û - ũ₀|_{H¹}` against the `μ = 0` state (μ sweeps only).
    pub h1_distance: Option<T>,
    pub r0: Option<T>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AsymptoticTable<T> {
    pub vary: SweepVariable,
    pub rows: Vec<AsymptoticRow<T>>,
    /// `m(a, 0)` for μ sweeps.
    pub reference_level: Option<T>,
}

/// Parameter values of a sweep, ordered toward the limit.
pub fn sweep_values<T: Scalar>(params: &ModelParams<T>, vary: SweepVariable, steps: usize) -> Vec<T> {
    let n = steps.max(2);
    let (start, span) = match vary {
        SweepVariable::MuToZero => (T::lit(-1.0), T::lit(-3.0)),
        SweepVariable::QToPbar => (T::lit(-1.0), T::lit(-2.0)),
    };
    let pb = params.dim.pbar_exact();
    let pbar = T::lit(*pb.numer() as f64) / T::lit(*pb.denom() as f64);
    (0..n)
        .map(|k| {
            let x = T::lit(10.0).powf(start + span * T::from_usize_lossy(k) / T::from_usize_lossy(n - 1));
            match vary {
                SweepVariable::MuToZero => x,
                SweepVariable::QToPbar => pbar - x,
            }
        })
        .collect()
}

/// `μ = 0` state at mass `a`, the limit of the mountain-pass branch.
pub fn homogeneous_reference<T: Scalar>(model: &Model<T>, opts: &SolveOptions<T>) -> Result<GroundStateResult<T>> {
    solve_prescribed_mass(&model.with_mu(T::zero()), Branch::Unique, opts)
}

/// Row of a sweep at one parameter value. `reference` is the `μ = 0`
/// state used for the H¹ distance.
pub fn sweep_row<T: Scalar>(
    model: &Model<T>,
    vary: SweepVariable,
    value: T,
    reference: Option<&GroundStateResult<T>>,
    opts: &SolveOptions<T>,
) -> AsymptoticRow<T> {
    let mut row = AsymptoticRow {
        parameter: value,
        m: None,
        grad_local: None,
        sigma: None,
        h1_distance: None,
        r0: None,
        failure: None,
    };
    let at = match vary {
        SweepVariable::MuToZero => Ok(model.with_mu(value)),
        SweepVariable::QToPbar => ModelParams::new(
            model.params.dim,
            model.params.p,
            Exponent::real(value),
            model.params.a,
            model.params.mu,
        )
        .and_then(|p| {
            let q = crate::gn::gn_constant(p.dim, &p.q)?;
            Ok(Model::with_constants(
                p,
                ModelConstants {
                    q,
                    p: model.constants.p,
                },
            ))
        }),
    };
    let at = match at {
        Ok(m) => m,
        Err(e) => {
            row.failure = Some(e.to_string());
            return row;
        }
    };
    let mut failures = Vec::new();
    match h_roots(&at.params, &at.constants) {
        Ok(g) => row.r0 = g.map(|g| g.r0),
        Err(e) => failures.push(format!("radii: {e}")),
    }
    match solve_prescribed_mass(&at, Branch::LocalMin, opts) {
        Ok(r) => {
            row.m = Some(r.energy_level);
            row.grad_local = Some(r.grad_norm);
        }
        Err(e) => failures.push(format!("local-min: {e}")),
    }
    match solve_prescribed_mass(&at, Branch::MountainPass, opts) {
        Ok(r) => {
            row.sigma = Some(r.energy_level);
            row.h1_distance = reference.map(|u0| h1_distance(&r.profile, &u0.profile));
        }
        Err(e) => failures.push(format!("mountain-pass: {e}")),
    }
    if !failures.is_empty() {
        row.failure = Some(failures.join("; "));
    }
    row
}

/// Sequential sweep; failed rows are kept with their reason.
pub fn asymptotic_sweep<T: Scalar>(model: &Model<T>, vary: SweepVariable, steps: usize) -> Result<AsymptoticTable<T>> {
    if model.params.regime() != Regime::MixedFocusing {
        return Err(Error::Regime {
            expected: "MixedFocusing",
            actual: model.params.regime(),
        });
    }
    let opts = SolveOptions::default();
    let reference = match vary {
        SweepVariable::MuToZero => Some(homogeneous_reference(model, &opts)?),
        SweepVariable::QToPbar => None,
    };
    let rows = sweep_values(&model.params, vary, steps)
        .into_iter()
        .map(|v| sweep_row(model, vary, v, reference.as_ref(), &opts))
        .collect();
    Ok(AsymptoticTable {
        vary,
        rows,
        reference_level: reference.map(|r| r.energy_level),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_values_reach_limits() {
        let p = ModelParams::<f64>::with_ints(1, 8, 3, 1.0, 0.1).unwrap();
        let mu = sweep_values(&p, SweepVariable::MuToZero, 4);
        assert!((mu[0] - 0.1).abs() < 1e-15 && (mu[3] - 1e-4).abs() < 1e-18);
        let q = sweep_values(&p, SweepVariable::QToPbar, 3);
        assert!((q[0] - 5.9).abs() < 1e-12 && (q[2] - 5.999).abs() < 1e-12);
        assert_eq!("q".parse::<SweepVariable>().unwrap(), SweepVariable::QToPbar);
    }
}
