//! Mass-projected, H¹-preconditioned gradient descent for the local
//! minimiser.
//!
//! The energy is discretised by finite volumes on the radial grid with a
//! Dirichlet condition at the outer radius:
//!
//! ```text
//! E_h(u) = ½ Σ k_{j+½} (u_{j+1} - u_j)² - Σ W_j (|u_j|^p/p + μ|u_j|^q/q),
//! ```
//!
//! with `W_j` the measure of the shell around `r_j` and
//! `k_{j+½} = ω r_{j+½}^{N-1} / Δr`. A step moves along
//! `d = P⁻¹∂E - β P⁻¹Wu`, `P = K + σW`, with `β` chosen so that `d` is
//! tangent to the discrete mass sphere, then rescales to mass `a`.

use serde::{Deserialize, Serialize};

use super::{rayleigh_lambda, solution_class, Branch, GroundStateResult, Model};
use crate::criteria::h_roots;
use crate::error::{Error, Result};
use crate::fiber::{energy, pohozaev_residual, FiberTriple};
use crate::grid::{FiniteVolume, RadialField, RadialGridSpec};
use crate::scalar::Scalar;
use crate::shooting::ode_residual;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FlowConfig<T> {
    pub max_iters: usize,
    /// Stop once an accepted step lowers the energy by less than this...
    pub energy_tol: T,
    /// ...and the multiplier estimate moved by less than this, relatively.
    pub lambda_tol: T,
    pub initial_step: T,
    pub max_step: T,
    /// Enforce `|∇u|_2 < R_0` along the trajectory when the mixed
    /// condition provides `R_0`.
    pub enforce_barrier: bool,
}

impl<T: Scalar> Default for FlowConfig<T> {
    fn default() -> Self {
        FlowConfig {
            max_iters: 50_000,
            energy_tol: T::tol(1e-12),
            lambda_tol: T::tol(1e-9),
            initial_step: T::lit(0.5),
            max_step: T::lit(4.0),
            enforce_barrier: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FlowOutcome<T> {
    pub result: GroundStateResult<T>,
    pub iterations: usize,
    /// Discrete energy after every accepted step.
    pub energies: Vec<T>,
    /// Largest `|∇u|_2` seen along the flow.
    pub max_grad_norm: T,
    pub barrier: Option<T>,
}

/// Finite-volume discretisation of the radial energy.
pub struct Discretisation<T> {
    /// Shell measures `W_j`, `j = 0..J` (the last node is pinned to 0).
    pub w: Vec<T>,
    /// Edge conductances `k_{j+½}`, `j = 0..J-1`.
    pub k: Vec<T>,
    p: T,
    q: T,
    mu: T,
}

impl<T: Scalar> Discretisation<T> {
    pub fn new(model: &Model<T>, spec: RadialGridSpec<T>) -> Self {
        let fv = FiniteVolume::new(model.params.dim, spec);
        Discretisation {
            w: fv.w,
            k: fv.k,
            p: model.params.p.value(),
            q: model.params.q.value(),
            mu: model.params.mu,
        }
    }

    fn len(&self) -> usize {
        self.w.len()
    }

    pub fn mass2(&self, u: &[T]) -> T {
        u.iter().zip(&self.w).map(|(&x, &w)| w * x * x).sum()
    }

    pub fn grad2(&self, u: &[T]) -> T {
        self.k
            .iter()
            .enumerate()
            .map(|(j, &k)| k * (u[j + 1] - u[j]).powi(2))
            .sum()
    }

    pub fn lp(&self, u: &[T], p: T) -> T {
        u.iter().zip(&self.w).map(|(&x, &w)| w * x.abs().powf(p)).sum()
    }

    pub fn energy(&self, u: &[T]) -> T {
        self.grad2(u) / T::lit(2.0) - self.lp(u, self.p) / self.p - self.mu * self.lp(u, self.q) / self.q
    }

    /// Partial derivatives `∂E_h/∂u_j`; the pinned last entry is zero.
    pub fn gradient(&self, u: &[T]) -> Vec<T> {
        let n = self.len();
        let two = T::lit(2.0);
        let mut g = vec![T::zero(); n];
        for j in 0..n - 1 {
            let flux = self.k[j] * (u[j + 1] - u[j]);
            g[j] = g[j] - flux;
            g[j + 1] = g[j + 1] + flux;
        }
        for j in 0..n {
            let a = u[j].abs();
            let f = a.powf(self.p - two) * u[j] + self.mu * a.powf(self.q - two) * u[j];
            g[j] = g[j] - self.w[j] * f;
        }
        g[n - 1] = T::zero();
        g
    }

    /// Solve `(K + σW) x = b` on the free nodes `0..J-1` (Thomas algorithm).
    pub fn precondition(&self, sigma: T, b: &[T]) -> Vec<T> {
        let n = self.len() - 1;
        let mut diag = vec![T::zero(); n];
        let mut off = vec![T::zero(); n];
        for j in 0..n {
            let left = if j > 0 { self.k[j - 1] } else { T::zero() };
            diag[j] = left + self.k[j] + sigma * self.w[j];
            off[j] = -self.k[j];
        }
        let mut c = vec![T::zero(); n];
        let mut d = vec![T::zero(); n];
        c[0] = off[0] / diag[0];
        d[0] = b[0] / diag[0];
        for j in 1..n {
            let m = diag[j] - off[j - 1] * c[j - 1];
            c[j] = off[j] / m;
            d[j] = (b[j] - off[j - 1] * d[j - 1]) / m;
        }
        let mut x = vec![T::zero(); n + 1];
        x[n - 1] = d[n - 1];
        for j in (0..n - 1).rev() {
            x[j] = d[j] - c[j] * x[j + 1];
        }
        x
    }

    fn normalize(&self, u: &mut [T], a: T) {
        let n = u.len();
        u[n - 1] = T::zero();
        let m = self.mass2(u).sqrt();
        let s = a / m;
        for v in u.iter_mut() {
            *v = *v * s;
        }
    }
}

/// Gaussian initial datum dilated to the minimum of its own fiber map,
/// which lies at negative energy inside the ball `|∇u|_2 < R_0`.
pub fn default_flow_init<T: Scalar>(model: &Model<T>, spec: RadialGridSpec<T>, width: T) -> Result<RadialField<T>> {
    let params = &model.params;
    let g = RadialField::from_fn(params.dim, spec, |r| (-(r * r) / (T::lit(2.0) * width * width)).exp())
        .normalized_to(params.a)?;
    let tr = g.triple(params.q.value(), params.p.value());
    let cps = crate::fiber::FiberMap::new(tr, params).critical_points()?;
    let s = cps
        .s_u
        .ok_or_else(|| Error::Flow("initial bump has no fiber minimum".into()))?;
    g.dilate(s).normalized_to(params.a)
}

pub fn gradient_flow_local_min<T: Scalar>(
    model: &Model<T>,
    init: &RadialField<T>,
    flow: &FlowConfig<T>,
) -> Result<FlowOutcome<T>> {
    let params = &model.params;
    if init.dim != params.dim {
        return Err(Error::Validation(
            "initial field dimension differs from the model".into(),
        ));
    }
    let a = params.a;
    let disc = Discretisation::new(model, init.spec());
    let barrier = if flow.enforce_barrier {
        h_roots(params, &model.constants).ok().flatten().map(|g| g.r0)
    } else {
        None
    };
    let mut u = init.values.clone();
    disc.normalize(&mut u, a);
    let check_barrier = |u: &[T]| -> Result<T> {
        let gn = disc.grad2(u).sqrt();
        if let Some(r0) = barrier {
            if gn >= r0 {
                return Err(Error::Flow(format!(
                    "left the ball |∇u|_2 < R_0 = {} (|∇u|_2 = {})",
                    r0.to_f64_lossy(),
                    gn.to_f64_lossy()
                )));
            }
        }
        Ok(gn)
    };
    let mut max_grad = check_barrier(&u)?;
    let mut e = disc.energy(&u);
    let mut energies = vec![e];
    let mut tau = flow.initial_step;
    let mut lambda_prev = T::nan();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < flow.max_iters {
        iterations += 1;
        let grad = disc.gradient(&u);
        let wu: Vec<T> = u.iter().zip(&disc.w).map(|(&x, &w)| x * w).collect();
        let lambda = grad.iter().zip(&u).map(|(&g, &x)| g * x).sum::<T>() / (a * a);
        let sigma = lambda.abs().max(T::min_positive_value());
        let y1 = disc.precondition(sigma, &grad);
        let y2 = disc.precondition(sigma, &wu);
        let beta =
            wu.iter().zip(&y1).map(|(&w, &y)| w * y).sum::<T>() / wu.iter().zip(&y2).map(|(&w, &y)| w * y).sum::<T>();
        let d: Vec<T> = y1.iter().zip(&y2).map(|(&x, &y)| x - beta * y).collect();
        let mut accepted = false;
        while tau > T::lit(1e-14) {
            let mut trial: Vec<T> = u.iter().zip(&d).map(|(&x, &dx)| x - tau * dx).collect();
            disc.normalize(&mut trial, a);
            let et = disc.energy(&trial);
            if et <= e {
                let decrement = e - et;
                u = trial;
                e = et;
                energies.push(e);
                max_grad = max_grad.max(check_barrier(&u)?);
                tau = (tau * T::lit(1.5)).min(flow.max_step);
                accepted = true;
                let stable = (lambda - lambda_prev).abs() <= flow.lambda_tol * lambda.abs();
                if decrement < flow.energy_tol && stable && iterations > 10 {
                    converged = true;
                }
                break;
            }
            tau = tau / T::lit(2.0);
        }
        lambda_prev = lambda;
        if converged || !accepted {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Flow(format!("no convergence in {} iterations", flow.max_iters)));
    }
    let field = RadialField {
        dim: params.dim,
        dr: init.dr,
        values: u,
    };
    let tr = field.triple(params.q.value(), params.p.value());
    let lambda = rayleigh_lambda(&tr, params);
    let disc_tr = FiberTriple {
        grad2: disc.grad2(&field.values),
        mq: disc.lp(&field.values, params.q.value()),
        mp: disc.lp(&field.values, params.p.value()),
        mass2: disc.mass2(&field.values),
    };
    let result = GroundStateResult {
        lambda,
        energy_level: energy(&tr, params),
        pohozaev_residual: pohozaev_residual(&tr, params),
        fiber_class: solution_class(&disc_tr, params),
        branch: Branch::LocalMin,
        mass_error: (tr.mass2.sqrt() - a).abs() / a,
        grad_norm: tr.grad2.sqrt(),
        ode_residual: ode_residual(&field, &model.nonlinearity(lambda)),
        lambda_rayleigh: lambda,
        triple: tr,
        profile: field,
    };
    Ok(FlowOutcome {
        result,
        iterations,
        energies,
        max_grad_norm: max_grad,
        barrier,
    })
}
