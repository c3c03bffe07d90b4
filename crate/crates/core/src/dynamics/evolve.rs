//! Strang-split time stepping with conservation and blow-up monitoring.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::field::{Geometry, Observables, WaveField};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::scalar::Scalar;

/// `|z|^e` evaluated from `|z|²`, with fast paths for integer and
/// half-integer `e/2`.
#[derive(Debug, Clone, Copy)]
enum Power<T> {
    Int(i32),
    Half(i32),
    General(T),
}

impl<T: Scalar> Power<T> {
    fn new(e: T) -> Self {
        let h = e / T::lit(2.0);
        let twice = e;
        if h == h.round() && h.abs() < T::lit(64.0) {
            Power::Int(h.to_i32().unwrap_or(0))
        } else if twice == twice.round() && twice.abs() < T::lit(64.0) {
            Power::Half((h - T::lit(0.5)).round().to_i32().unwrap_or(0))
        } else {
            Power::General(h)
        }
    }

    fn of_mod2(self, m2: T) -> T {
        match self {
            Power::Int(k) => m2.powi(k),
            Power::Half(k) => m2.powi(k) * m2.sqrt(),
            Power::General(h) => m2.powf(h),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EvolveConfig<T> {
    pub dt: T,
    pub t_end: T,
    /// Record observables every this many steps.
    pub sample_every: usize,
    /// Shrink `dt ∝ |∇ψ(0)|² / |∇ψ(t)|²` as the gradient grows.
    pub adaptive: bool,
    /// Gradient signal: `|∇ψ|² > factor · |∇ψ(0)|²` ...
    pub blowup_factor: T,
    /// ... capped at this fraction of the largest gradient the grid can
    /// represent, `k_max² |ψ|²`.
    pub resolution_fraction: T,
    /// Step-size underflow signal.
    pub dt_min: T,
}

impl<T: Scalar> Default for EvolveConfig<T> {
    fn default() -> Self {
        EvolveConfig {
            dt: T::lit(1e-3),
            t_end: T::one(),
            sample_every: 10,
            adaptive: true,
            blowup_factor: T::lit(1e6),
            resolution_fraction: T::lit(0.01),
            dt_min: T::lit(1e-12),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub enum Outcome<T> {
    Global,
    BlowUp { t_star: T },
    Undecided { t_end: T, reason: String },
}

impl<T> Outcome<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Global => "global",
            Outcome::BlowUp { .. } => "blow-up",
            Outcome::Undecided { .. } => "undecided",
        }
    }
}

/// `P(ψ(t)) ≤ -δ` on every sample, so `f(t) ≤ f(0) + f'(0)t - 4δt²`,
/// which vanishes at `t_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct VirialCertificate<T> {
    pub delta: T,
    pub t_bound: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BlowUpSignals<T> {
    /// Time at which the gradient threshold was crossed.
    pub gradient: Option<T>,
    /// Time at which the step size underflowed.
    pub dt_underflow: Option<T>,
    pub virial: Option<VirialCertificate<T>>,
}

impl<T> BlowUpSignals<T> {
    pub fn count(&self) -> usize {
        self.gradient.is_some() as usize + self.dt_underflow.is_some() as usize + self.virial.is_some() as usize
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EvolutionTrace<T> {
    pub times: Vec<T>,
    pub mass2: Vec<T>,
    pub energy: Vec<T>,
    pub grad2: Vec<T>,
    pub virial: Vec<T>,
    pub pohozaev: Vec<T>,
    pub outcome: Outcome<T>,
    pub signals: BlowUpSignals<T>,
    pub gradient_threshold: T,
    pub steps: usize,
    pub dt_final: T,
    pub final_state: WaveField<T>,
}

impl<T: Scalar> EvolutionTrace<T> {
    fn rel_drift(v: &[T]) -> T {
        let v0 = v[0];
        v.iter().map(|&x| (x - v0).abs()).fold(T::zero(), T::max) / v0.abs().max(T::min_positive_value())
    }

    /// `max_t |M(t) - M(0)| / M(0)`.
    pub fn mass_drift(&self) -> T {
        Self::rel_drift(&self.mass2)
    }

    /// `max_t |E(t) - E(0)| / |E(0)|`.
    pub fn energy_drift(&self) -> T {
        Self::rel_drift(&self.energy)
    }

    pub fn max_grad2(&self) -> T {
        self.grad2.iter().copied().fold(T::zero(), T::max)
    }

    fn push(&mut self, t: T, o: &Observables<T>) {
        self.times.push(t);
        self.mass2.push(o.mass2);
        self.energy.push(o.energy);
        self.grad2.push(o.grad2);
        self.virial.push(o.virial);
        self.pohozaev.push(o.pohozaev);
    }
}

/// One Strang step `N(dt/2) L(dt) N(dt/2)` at a time.
/// `(dt, c, m)`.
type ThomasFactors<T> = (T, Vec<Complex<T>>, Vec<Complex<T>>);

pub(crate) struct Stepper<T: Scalar> {
    geo: Geometry<T>,
    pp: Power<T>,
    pq: Power<T>,
    mu: T,
    /// Cached Thomas factors of the Crank–Nicolson matrix.
    cn: Option<ThomasFactors<T>>,
}

impl<T: Scalar> Stepper<T> {
    pub(crate) fn new(geo: Geometry<T>, params: &ModelParams<T>) -> Self {
        let two = T::lit(2.0);
        Stepper {
            geo,
            pp: Power::new(params.p.value() - two),
            pq: Power::new(params.q.value() - two),
            mu: params.mu,
            cn: None,
        }
    }

    pub(crate) fn geometry(&self) -> &Geometry<T> {
        &self.geo
    }

    fn nonlinear(&self, v: &mut [Complex<T>], tau: T) {
        for z in v.iter_mut() {
            let m2 = z.norm_sqr();
            let g = self.pp.of_mod2(m2) + self.mu * self.pq.of_mod2(m2);
            *z = *z * Complex::from_polar(T::one(), tau * g);
        }
    }

    /// Exact free evolution `e^{iΔ dt}`; returns `|∇ψ|²` where it is free to
    /// compute.
    fn linear(&mut self, v: &mut [Complex<T>], dt: T) -> T {
        match &self.geo {
            Geometry::Periodic { dx, k2, fft, ifft } => {
                fft.process(v);
                let n = T::from_usize_lossy(v.len());
                let mut g2 = T::zero();
                for (z, &k) in v.iter_mut().zip(k2) {
                    g2 = g2 + k * z.norm_sqr();
                    *z = *z * Complex::from_polar(T::one() / n, -k * dt);
                }
                ifft.process(v);
                g2 * *dx / n
            }
            Geometry::Radial { fv } => {
                let n = v.len() - 1;
                let half = Complex::new(T::zero(), dt / T::lit(2.0));
                let diag = |j: usize| if j > 0 { fv.k[j - 1] + fv.k[j] } else { fv.k[0] };
                let refresh = !matches!(&self.cn, Some((d, _, _)) if *d == dt);
                if refresh {
                    // A = W + i dt/2 K; forward sweep factors
                    let mut c = vec![Complex::new(T::zero(), T::zero()); n];
                    let mut m = vec![Complex::new(T::zero(), T::zero()); n];
                    for j in 0..n {
                        let a_jj = Complex::new(fv.w[j], T::zero()) + half * diag(j);
                        let sub = half * (-fv.k[j.max(1) - 1]);
                        let mj = if j == 0 { a_jj } else { a_jj - sub * c[j - 1] };
                        m[j] = mj;
                        c[j] = half * (-fv.k[j]) / mj;
                    }
                    self.cn = Some((dt, c, m));
                }
                let (_, c, m) = self.cn.as_ref().expect("factors cached");
                let mut d = vec![Complex::new(T::zero(), T::zero()); n];
                for j in 0..n {
                    let left = if j > 0 {
                        v[j - 1] * (-fv.k[j - 1])
                    } else {
                        Complex::new(T::zero(), T::zero())
                    };
                    let right = v[j + 1] * (-fv.k[j]);
                    let kv = v[j] * diag(j) + left + right;
                    let rhs = v[j] * fv.w[j] - half * kv;
                    let sub = half * (-fv.k[j.max(1) - 1]);
                    d[j] = if j == 0 {
                        rhs / m[0]
                    } else {
                        (rhs - sub * d[j - 1]) / m[j]
                    };
                }
                v[n - 1] = d[n - 1];
                for j in (0..n - 1).rev() {
                    v[j] = d[j] - c[j] * v[j + 1];
                }
                v[n] = Complex::new(T::zero(), T::zero());
                fv.dirichlet(|j| (v[j + 1] - v[j]).norm_sqr())
            }
        }
    }

    pub(crate) fn step(&mut self, v: &mut [Complex<T>], dt: T) -> T {
        let h = dt / T::lit(2.0);
        self.nonlinear(v, h);
        let g2 = self.linear(v, dt);
        self.nonlinear(v, h);
        g2
    }
}

/// Time evolution of `iψ_t + Δψ + μ|ψ|^{q-2}ψ + |ψ|^{p-2}ψ = 0`.
///
/// `monitor` sees every recorded sample. The outcome is `BlowUp` only when
/// at least two of the three signals (gradient threshold, step underflow,
/// virial certificate) fire.
pub fn evolve<T: Scalar>(
    initial: &WaveField<T>,
    params: &ModelParams<T>,
    cfg: &EvolveConfig<T>,
    mut monitor: impl FnMut(T, &WaveField<T>, &Observables<T>),
) -> Result<EvolutionTrace<T>> {
    if !(cfg.dt > T::zero()) || !(cfg.t_end >= T::zero()) || cfg.sample_every == 0 {
        return Err(Error::Validation(
            "evolve needs dt > 0, T >= 0, sample_every >= 1".into(),
        ));
    }
    if initial.dim() != params.dim {
        return Err(Error::Validation("wave field dimension differs from the model".into()));
    }
    if !initial.is_finite() {
        return Err(Error::Validation("non-finite initial datum".into()));
    }
    let geo = initial.geometry()?;
    let mut psi = initial.clone();
    let o0 = Observables::compute(&geo, &psi, params);
    let k_max = initial.grid.k_max();
    let threshold = (cfg.blowup_factor * o0.grad2).min(cfg.resolution_fraction * k_max * k_max * o0.mass2);
    let mut trace = EvolutionTrace {
        times: Vec::new(),
        mass2: Vec::new(),
        energy: Vec::new(),
        grad2: Vec::new(),
        virial: Vec::new(),
        pohozaev: Vec::new(),
        outcome: Outcome::Global,
        signals: BlowUpSignals {
            gradient: None,
            dt_underflow: None,
            virial: None,
        },
        gradient_threshold: threshold,
        steps: 0,
        dt_final: cfg.dt,
        final_state: initial.clone(),
    };
    trace.push(T::zero(), &o0);
    monitor(T::zero(), &psi, &o0);
    let mut stepper = Stepper::new(geo, params);
    let mut t = T::zero();
    let mut dt = cfg.dt;
    let end_slack = cfg.dt * T::lit(1e-9);
    let mut nonfinite = false;
    let mut last_sampled = true;
    while t < cfg.t_end - end_slack {
        let h = dt.min(cfg.t_end - t);
        let g2 = stepper.step(&mut psi.values, h);
        t = t + h;
        trace.steps += 1;
        last_sampled = false;
        if !g2.is_finite() || !psi.is_finite() {
            nonfinite = true;
            break;
        }
        let crossed = g2 > threshold;
        if cfg.adaptive && o0.grad2 > T::zero() {
            dt = cfg.dt * (o0.grad2 / g2).min(T::one());
        }
        if trace.steps % cfg.sample_every == 0 || crossed || t >= cfg.t_end - end_slack {
            let o = Observables::compute(stepper.geometry(), &psi, params);
            trace.push(t, &o);
            monitor(t, &psi, &o);
            last_sampled = true;
        }
        if crossed {
            trace.signals.gradient = Some(t);
            break;
        }
        if dt < cfg.dt_min {
            trace.signals.dt_underflow = Some(t);
            break;
        }
    }
    if !last_sampled && !nonfinite {
        let o = Observables::compute(stepper.geometry(), &psi, params);
        trace.push(t, &o);
        monitor(t, &psi, &o);
    }
    trace.dt_final = dt;
    trace.signals.virial = virial_certificate(&trace);
    let n_signals = trace.signals.count();
    trace.outcome = if n_signals >= 2 {
        let t_star = trace.signals.gradient.or(trace.signals.dt_underflow).unwrap_or(t);
        Outcome::BlowUp { t_star }
    } else if nonfinite {
        Outcome::Undecided {
            t_end: t,
            reason: "non-finite state".into(),
        }
    } else if trace.signals.gradient.is_some() {
        Outcome::Undecided {
            t_end: t,
            reason: "gradient threshold reached without a virial certificate".into(),
        }
    } else if trace.signals.dt_underflow.is_some() {
        Outcome::Undecided {
            t_end: t,
            reason: "step size underflow without a virial certificate".into(),
        }
    } else if trace.signals.virial.is_some() {
        Outcome::Undecided {
            t_end: t,
            reason: "uniformly negative Pohozaev functional but no gradient growth by the final time".into(),
        }
    } else {
        Outcome::Global
    };
    trace.final_state = psi;
    Ok(trace)
}

/// Certificate from the recorded Pohozaev samples; `None` unless
/// `P ≤ -δ < 0` on every sample.
fn virial_certificate<T: Scalar>(trace: &EvolutionTrace<T>) -> Option<VirialCertificate<T>> {
    let n = trace.times.len();
    if n < 3 {
        return None;
    }
    let p_max = trace.pohozaev.iter().copied().fold(T::neg_infinity(), T::max);
    let noise = T::lit(1e-8) * (T::one() + trace.grad2[0]);
    if !(p_max < -noise) {
        return None;
    }
    let delta = -p_max;
    let (f0, f1, f2) = (trace.virial[0], trace.virial[1], trace.virial[2]);
    let (t1, t2) = (trace.times[1], trace.times[2]);
    // second-order one-sided f'(0) on possibly uneven spacing
    let fp0 = -(f1 * t2 * t2 - f2 * t1 * t1 - f0 * (t2 * t2 - t1 * t1)) / (t1 * t2 * (t1 - t2));
    let fp0 = if fp0.is_finite() { fp0 } else { (f1 - f0) / t1 };
    // f0 + fp0 t - 4δ t² = 0
    let four_d = T::lit(4.0) * delta;
    let t_bound = (fp0 + (fp0 * fp0 + T::lit(4.0) * four_d * f0).sqrt()) / (T::lit(2.0) * four_d);
    Some(VirialCertificate { delta, t_bound })
}

/// Agreement of `f''` (three-point differences of the recorded virial,
/// second order on even spacing) with `8P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct VirialReport<T> {
    /// `max |f'' - 8P| / (1 + |8P|)` over usable samples.
    pub max_rel_error: T,
    pub samples: usize,
    /// `f'' < 0` at every usable sample.
    pub concave: bool,
}

pub fn virial_check<T: Scalar>(trace: &EvolutionTrace<T>) -> Result<VirialReport<T>> {
    let n = trace.times.len();
    let mut worst = T::zero();
    let mut used = 0;
    let mut concave = true;
    for i in 1..n.saturating_sub(1) {
        let h1 = trace.times[i] - trace.times[i - 1];
        let h2 = trace.times[i + 1] - trace.times[i];
        if !(h1 > T::zero() && h2 > T::zero()) {
            continue;
        }
        let f2 = T::lit(2.0)
            * ((trace.virial[i + 1] - trace.virial[i]) / h2 - (trace.virial[i] - trace.virial[i - 1]) / h1)
            / (h1 + h2);
        let p8 = T::lit(8.0) * trace.pohozaev[i];
        worst = worst.max((f2 - p8).abs() / (T::one() + p8.abs()));
        concave &= f2 < T::zero();
        used += 1;
    }
    if used == 0 {
        return Err(Error::Validation("trace has fewer than three distinct samples".into()));
    }
    Ok(VirialReport {
        max_rel_error: worst,
        samples: used,
        concave,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::field::DynamicsGrid;
    use crate::grid::{RadialField, RadialGridSpec};
    use crate::params::Dim;

    #[test]
    fn power_fast_paths() {
        for e in [6.0, 1.0, 2.5, 0.7] {
            let p = Power::<f64>::new(e);
            for m2 in [0.0f64, 0.3, 2.0] {
                let want: f64 = m2.powf(e / 2.0);
                assert!((p.of_mod2(m2) - want).abs() < 1e-14, "e={e} m2={m2}");
            }
        }
    }

    #[test]
    fn radial_crank_nicolson_conserves_mass() {
        let grid = DynamicsGrid::Radial {
            dim: Dim::Three,
            radius: 20.0,
            points: 2001,
        };
        let spec = RadialGridSpec::new(2001, 20.0).unwrap();
        let g = RadialField::from_fn(Dim::Three, spec, |r: f64| 0.3 * (-r * r / 2.0).exp());
        let w = WaveField::from_radial(&g, grid).unwrap();
        let params = ModelParams::with_ints(3, 4, 3, 1.0, 0.0).unwrap();
        let cfg = EvolveConfig {
            dt: 1e-3,
            t_end: 0.5,
            ..EvolveConfig::default()
        };
        let tr = evolve(&w, &params, &cfg, |_, _, _| {}).unwrap();
        assert!(tr.mass_drift() < 1e-12, "{}", tr.mass_drift());
        assert!(tr.energy_drift() < 1e-5, "{}", tr.energy_drift());
        assert_eq!(tr.outcome, Outcome::Global);
    }

    #[test]
    fn time_reversible() {
        for grid in [
            DynamicsGrid::Periodic {
                half_length: 20.0,
                points: 1024,
            },
            DynamicsGrid::Radial {
                dim: Dim::Two,
                radius: 20.0,
                points: 1001,
            },
        ] {
            let dim = grid.dim();
            let spec = RadialGridSpec::new(2001, 20.0).unwrap();
            let g = RadialField::from_fn(dim, spec, |r: f64| 1.2 * (-r * r / 2.0).exp());
            let w = WaveField::from_radial(&g, grid).unwrap();
            let params = ModelParams::with_ints(dim.n(), 4, 3, 1.0, 0.5).unwrap();
            let mut st = Stepper::new(w.geometry().unwrap(), &params);
            let mut v = w.values.clone();
            st.step(&mut v, 1e-2);
            st.step(&mut v, -1e-2);
            let err: f64 = v
                .iter()
                .zip(&w.values)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-10, "{dim}: {err}");
        }
    }

    fn sech_run(dt: f64) -> (EvolutionTrace<f64>, WaveField<f64>) {
        let grid = DynamicsGrid::Periodic {
            half_length: 40.0,
            points: 4096,
        };
        let spec = RadialGridSpec::new(8001, 40.0).unwrap();
        let g = RadialField::from_fn(Dim::One, spec, |r: f64| 2f64.sqrt() / r.cosh());
        let w = WaveField::from_radial(&g, grid).unwrap();
        let params = ModelParams::with_ints(1, 4, 3, 2.0, 0.0).unwrap();
        let cfg = EvolveConfig {
            dt,
            t_end: 1.0,
            adaptive: false,
            ..EvolveConfig::default()
        };
        (evolve(&w, &params, &cfg, |_, _, _| {}).unwrap(), w)
    }

    #[test]
    fn standing_wave_rotates_in_phase() {
        let (tr, w) = sech_run(5e-4);
        let dx = 80.0 / 4096.0;
        let modulus_err: f64 = tr
            .final_state
            .values
            .iter()
            .zip(&w.values)
            .map(|(a, b)| (a.norm() - b.norm()).powi(2) * dx)
            .sum::<f64>()
            .sqrt();
        assert!(modulus_err < 1e-6, "{modulus_err}");
        let (tr, _) = sech_run(1e-3);
        assert!(tr.mass_drift() < 1e-10);
        assert!(tr.energy_drift() < 1e-6, "{}", tr.energy_drift());
        assert_eq!(tr.outcome, Outcome::Global);
    }

    #[test]
    fn strang_is_second_order() {
        let exact = |w: &WaveField<f64>| -> Vec<Complex<f64>> {
            w.values.iter().map(|z| z * Complex::from_polar(1.0, 1.0)).collect()
        };
        let err = |dt: f64| {
            let (tr, w) = sech_run(dt);
            let ex = exact(&w);
            tr.final_state
                .values
                .iter()
                .zip(&ex)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let (e1, e2) = (err(4e-2), err(2e-2));
        let slope = (e1 / e2).log2();
        assert!((slope - 2.0).abs() < 0.1, "slope {slope} ({e1:e}, {e2:e})");
    }
}
