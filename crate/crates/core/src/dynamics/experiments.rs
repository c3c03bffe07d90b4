//! Global existence / blow-up predictions and orbital stability runs.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::evolve::{evolve, EvolutionTrace, EvolveConfig, Outcome};
use super::field::{DynamicsGrid, Geometry, WaveField};
use crate::error::{Error, Result};
use crate::fiber::FiberMap;
use crate::params::{ModelParams, Regime};
use crate::scalar::Scalar;
use crate::solvers::GroundStateResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Global,
    BlowUp,
    NoPrediction,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Global => "global",
            Verdict::BlowUp => "blow-up",
            Verdict::NoPrediction => "no-prediction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Prediction<T> {
    pub verdict: Verdict,
    /// Location of the global maximum of the fiber map.
    pub t_u: Option<T>,
    pub energy: T,
    pub pohozaev: T,
    /// `inf_{P₋} E` the energy was compared against.
    pub level: T,
    pub reason: Option<String>,
}

/// Regimes where the sign of `t_u` decides the fate of data below
/// `inf_{P₋} E`.
pub fn has_classifier(regime: Regime) -> bool {
    matches!(
        regime,
        Regime::MixedFocusing | Regime::CriticalPerturbation | Regime::SupercriticalDefocusing
    )
}

/// Predict the fate of the solution starting at `u`.
///
/// `level` is `inf_{P₋} E`: `σ(a, μ)` in the mixed regime, the ground state
/// level elsewhere. The threshold condition of the regime is assumed to hold.
pub fn classify_datum<T: Scalar>(u: &WaveField<T>, params: &ModelParams<T>, level: T) -> Result<Prediction<T>> {
    let obs = u.observables(params)?;
    let mut pred = Prediction {
        verdict: Verdict::NoPrediction,
        t_u: None,
        energy: obs.energy,
        pohozaev: obs.pohozaev,
        level,
        reason: None,
    };
    let regime = params.regime();
    if !has_classifier(regime) {
        pred.reason = Some(format!("no classifier for regime {regime}"));
        return Ok(pred);
    }
    if !(obs.energy < level) {
        pred.reason = Some("energy not below inf over P- of E".into());
        return Ok(pred);
    }
    let cps = match FiberMap::new(obs.triple(), params).critical_points() {
        Ok(c) => c,
        Err(e) => {
            pred.reason = Some(e.to_string());
            return Ok(pred);
        }
    };
    let Some(t) = cps.t_u else {
        pred.reason = Some("fiber map has no maximum".into());
        return Ok(pred);
    };
    pred.t_u = Some(t);
    let tol = T::tol(1e-12);
    pred.verdict = if t > tol {
        Verdict::Global
    } else if t < -tol {
        if obs.virial.is_finite() {
            Verdict::BlowUp
        } else {
            pred.reason = Some("infinite second moment".into());
            Verdict::NoPrediction
        }
    } else {
        pred.reason = Some("datum on the Pohozaev set".into());
        Verdict::NoPrediction
    };
    Ok(pred)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PredictionExperiment<T> {
    pub prediction: Prediction<T>,
    pub observed: Outcome<T>,
    /// `None` when either side is undecided.
    pub agree: Option<bool>,
    pub trace: EvolutionTrace<T>,
}

pub fn prediction_experiment<T: Scalar>(
    u: &WaveField<T>,
    params: &ModelParams<T>,
    level: T,
    cfg: &EvolveConfig<T>,
) -> Result<PredictionExperiment<T>> {
    let prediction = classify_datum(u, params, level)?;
    let trace = evolve(u, params, cfg, |_, _, _| {})?;
    let observed = trace.outcome.clone();
    let agree = match (prediction.verdict, &observed) {
        (Verdict::NoPrediction, _) | (_, Outcome::Undecided { .. }) => None,
        (Verdict::Global, o) => Some(matches!(o, Outcome::Global)),
        (Verdict::BlowUp, o) => Some(matches!(o, Outcome::BlowUp { .. })),
    };
    Ok(PredictionExperiment {
        prediction,
        observed,
        agree,
        trace,
    })
}

/// `inf_{θ,y} |ψ - e^{iθ} g(· - y)|_{H¹}` with `y` over grid shifts
/// (periodic) or `y = 0` (radial).
pub fn orbital_distance<T: Scalar>(psi: &WaveField<T>, g: &WaveField<T>) -> Result<T> {
    if psi.grid != g.grid {
        return Err(Error::Validation(
            "orbital distance between fields on different grids".into(),
        ));
    }
    let geo = psi.geometry()?;
    Ok(orbital_distance_on(&geo, psi, g, geo.h1_inner(&g.values, &g.values).re))
}

fn orbital_distance_on<T: Scalar>(geo: &Geometry<T>, psi: &WaveField<T>, g: &WaveField<T>, g_norm2: T) -> T {
    let a = geo.h1_inner(&psi.values, &psi.values).re;
    let c = geo.best_overlap(&psi.values, &g.values);
    (a + g_norm2 - T::lit(2.0) * c).max(T::zero()).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StabilityTrial<T> {
    /// `sup_t` of the orbital distance.
    pub max_distance: T,
    /// Distance of the initial datum.
    pub initial_distance: T,
    pub outcome: Outcome<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StabilityReport<T> {
    pub eps: T,
    /// `|gs|_{H¹}`, the scale the distances should be compared with.
    pub gs_h1_norm: T,
    pub max_distance: T,
    pub trials: Vec<StabilityTrial<T>>,
    /// Trials that did not end `Global`; evidence of instability.
    pub unstable_trials: usize,
}

/// Smooth random perturbation: a few complex Gaussians of width comparable
/// to `width`, normalised to `|h|_{H¹} = 1`.
fn random_smooth_field<T: Scalar>(grid: DynamicsGrid<T>, width: T, rng: &mut ChaCha8Rng) -> Result<WaveField<T>> {
    let bumps: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            let c = rng.gen_range(-2.0..2.0);
            let s = rng.gen_range(0.5..2.0);
            (c, s, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .collect();
    let w = width.to_f64_lossy();
    let radial = matches!(grid, DynamicsGrid::Radial { .. });
    let last = grid.points() - 1;
    let values: Vec<Complex<T>> = (0..grid.points())
        .map(|j| {
            if radial && j == last {
                return Complex::new(T::zero(), T::zero());
            }
            let x = grid.coord(j).to_f64_lossy();
            let (mut re, mut im) = (0.0, 0.0);
            for &(c, s, a, b) in &bumps {
                // radial bumps are centred on shells |x| = |c| w
                let c = if radial { c.abs() } else { c };
                let z = (x - c * w) / (s * w);
                let e = (-z * z).exp();
                re += a * e;
                im += b * e;
            }
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    let h = WaveField::new(grid, values)?;
    let n = h.geometry()?.h1_inner(&h.values, &h.values).re.sqrt();
    Ok(h.scaled(T::one() / n))
}

/// Perturb `gs` by random smooth fields of relative H¹ size `eps`, rescale
/// to mass `a`, evolve and record the largest orbital distance. Trials run
/// on separate threads with seeds `seed, seed+1, ...`.
pub fn stability_experiment<T: Scalar>(
    gs: &GroundStateResult<T>,
    params: &ModelParams<T>,
    grid: DynamicsGrid<T>,
    eps: T,
    cfg: &EvolveConfig<T>,
    trials: usize,
    seed: u64,
) -> Result<StabilityReport<T>> {
    if !(eps >= T::zero()) || trials == 0 {
        return Err(Error::Validation(
            "stability experiment needs eps >= 0 and trials >= 1".into(),
        ));
    }
    let g = WaveField::from_radial(&gs.profile, grid)?;
    let geo = g.geometry()?;
    let g_norm2 = geo.h1_inner(&g.values, &g.values).re;
    let g_norm = g_norm2.sqrt();
    let width = (gs.triple.mass2 / gs.triple.grad2).sqrt();
    let a = params.a;
    let run = |k: usize| -> Result<StabilityTrial<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        let h = random_smooth_field(grid, width, &mut rng)?;
        let values = g
            .values
            .iter()
            .zip(&h.values)
            .map(|(&x, &y)| x + y * (eps * g_norm))
            .collect();
        let psi0 = WaveField::new(grid, values)?;
        let m = geo.integrate(|j| psi0.values[j].norm_sqr(), psi0.len());
        let psi0 = psi0.scaled(a / m.sqrt());
        let initial_distance = orbital_distance_on(&geo, &psi0, &g, g_norm2);
        let mut worst = initial_distance;
        let trace = evolve(&psi0, params, cfg, |_, psi, _| {
            worst = worst.max(orbital_distance_on(&geo, psi, &g, g_norm2));
        })?;
        Ok(StabilityTrial {
            max_distance: worst,
            initial_distance,
            outcome: trace.outcome,
        })
    };
    let results: Vec<Result<StabilityTrial<T>>> = std::thread::scope(|sc| {
        let handles: Vec<_> = (0..trials).map(|k| sc.spawn(move || run(k))).collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Solver("stability trial panicked".into())))
            })
            .collect()
    });
    let trials = results.into_iter().collect::<Result<Vec<_>>>()?;
    let max_distance = trials.iter().map(|t| t.max_distance).fold(T::zero(), T::max);
    let unstable_trials = trials.iter().filter(|t| !matches!(t.outcome, Outcome::Global)).count();
    Ok(StabilityReport {
        eps,
        gs_h1_norm: g_norm,
        max_distance,
        trials,
        unstable_trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{RadialField, RadialGridSpec};
    use crate::params::Dim;

    fn sech_field(grid: DynamicsGrid<f64>) -> WaveField<f64> {
        let spec = RadialGridSpec::new(4001, 40.0).unwrap();
        let u = RadialField::from_fn(Dim::One, spec, |r: f64| 2f64.sqrt() / r.cosh());
        WaveField::from_radial(&u, grid).unwrap()
    }

    #[test]
    fn orbital_distance_ignores_phase_and_shift() {
        let grid = DynamicsGrid::Periodic {
            half_length: 20.0,
            points: 1024,
        };
        let g = sech_field(grid);
        let mut shifted = g.values.clone();
        shifted.rotate_right(37);
        let rot = Complex::from_polar(1.0, 0.7);
        let psi = WaveField::new(grid, shifted.iter().map(|z| z * rot).collect()).unwrap();
        assert!(orbital_distance(&psi, &g).unwrap() < 1e-6);
        let far = psi.scaled(1.1);
        let d = orbital_distance(&far, &g).unwrap();
        let norm = orbital_distance(&g.scaled(0.0), &g).unwrap();
        assert!((d / norm - 0.1).abs() < 1e-6, "{}", d / norm);
    }

    #[test]
    fn no_prediction_outside_classified_regimes() {
        let grid = DynamicsGrid::Periodic {
            half_length: 20.0,
            points: 1024,
        };
        let params = ModelParams::with_ints(1, 4, 3, 2.0, 0.5).unwrap();
        let p = classify_datum(&sech_field(grid), &params, 1.0).unwrap();
        assert_eq!(p.verdict, Verdict::NoPrediction);
    }
}
