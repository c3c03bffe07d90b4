//! Acceptance criteria 1–12, one PASS/FAIL line each.
//!
//! Run with `cargo test -p cnls-core --test acceptance`; a single criterion
//! with `-- 7` (any list of numbers).

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use cnls_core::criteria::{
    applicable_condition, cond_mixed, h_roots, mu_star, rhs_critical, rhs_mixed, stability_window, ModelConstants,
};
use cnls_core::dynamics::{
    evolve, prediction_experiment, stability_experiment, virial_check, DynamicsGrid, EvolveConfig, Outcome, Verdict,
    WaveField,
};
use cnls_core::fiber::{pohozaev, scale, FiberClass, FiberMap, FiberTriple};
use cnls_core::gn::{gn_constant, gn_ratio, shoot_soliton};
use cnls_core::grid::RadialGridSpec;
use cnls_core::params::{Dim, Exponent, ModelParams};
use cnls_core::solvers::flow::default_flow_init;
use cnls_core::solvers::{
    asymptotic_sweep, gradient_flow_local_min, log_lambda_grid, mass_curve, solve_prescribed_mass, Branch, FlowConfig,
    Model, SolveOptions, SweepVariable,
};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String), Box<dyn std::error::Error>>;

fn params(n: u32, p: i64, q: i64, a: f64, mu: f64) -> ModelParams<f64> {
    ModelParams::with_ints(n, p, q, a, mu).expect("valid parameters")
}

fn c01_soliton() -> Check {
    let t0 = Instant::now();
    let w = shoot_soliton(Dim::One, &Exponent::<f64>::integer(4), RadialGridSpec::default())?;
    let elapsed = t0.elapsed().as_secs_f64();
    let sup = (0..w.field.len())
        .map(|j| (w.field.values[j] - 2f64.sqrt() / w.field.r(j).cosh()).abs())
        .fold(0.0, f64::max);
    let m2 = w.field.mass2();
    Ok((
        sup < 1e-6 && (m2 - 4.0).abs() < 1e-6 && elapsed < 1.0,
        format!("sup error {sup:.2e}, mass² {m2:.9}, {elapsed:.3} s"),
    ))
}

fn c02_critical_mass() -> Check {
    let exact = (3f64.sqrt() * PI / 2.0).sqrt();
    let c = gn_constant(Dim::One, &Exponent::<f64>::integer(6))?;
    let abar = c.abar_n.ok_or("no critical mass at p = 6")?;
    // quintic soliton (3 sech²(2x))^{1/4} on the line
    let m2 = 2.0 * common::simpson(|x| (3.0 / (2.0 * x).cosh().powi(2)).sqrt(), 0.0, 25.0, 50_000);
    let abar_quad = m2.sqrt();
    let c_exact = (2.0 / PI).powf(1.0 / 3.0);
    let ok = (abar - exact).abs() < 1e-5 && (abar_quad - exact).abs() < 1e-5 && (c.c_np - c_exact).abs() < 1e-5;
    Ok((
        ok,
        format!(
            "ā₁ {abar:.8} (constant), {abar_quad:.8} (quadrature), exact {exact:.8}; C₁,₆ {:.8} vs {c_exact:.8}",
            c.c_np
        ),
    ))
}

fn c03_gn_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = RadialGridSpec::new(1201, 12.0)?;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_eq: f64 = 0.0;
    let mut violations = 0;
    for n in 1..=3u32 {
        let dim = Dim::new(n)?;
        let exps = [
            Exponent::<f64>::integer(3),
            Exponent::<f64>::integer(4),
            Exponent::rational(2 * n as i64 + 4, n as i64),
            Exponent::<f64>::integer(5),
        ];
        for p in &exps {
            let c = gn_constant(dim, p)?.c_np;
            for _ in 0..1000 {
                let u = common::random_profile(dim, spec, &mut rng);
                let r = gn_ratio(&u, p) / c;
                worst_ratio = worst_ratio.max(r);
                if r > 1.0 + 1e-6 {
                    violations += 1;
                }
            }
            let w = shoot_soliton(dim, p, RadialGridSpec::new(8001, 30.0)?)?;
            worst_eq = worst_eq.max((gn_ratio(&w.field, p) / c - 1.0).abs());
        }
    }
    Ok((
        violations == 0 && worst_eq < 1e-6,
        format!(
            "12000 profiles, max ratio/C {worst_ratio:.6}, violations {violations}, |ratio(w)/C - 1| ≤ {worst_eq:.2e}"
        ),
    ))
}

fn c04_fiber() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let models = [
        params(1, 8, 3, 1.0, 1.0),
        params(3, 4, 3, 1.0, 0.5),
        params(2, 5, 3, 1.0, -0.5),
    ];
    let mut worst_id: f64 = 0.0;
    let (mut slope_lo, mut slope_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..300 {
        let p = &models[k % 3];
        let tr = FiberTriple::new(
            rng.gen_range(0.1..3.0),
            rng.gen_range(0.1..3.0),
            rng.gen_range(0.1..3.0),
            p.a * p.a,
        )?;
        let f = FiberMap::new(tr, p);
        let s = rng.gen_range(-1.0..1.0);
        let d = f.psi_prime(s);
        let pz = pohozaev(&scale(&tr, s, p), p);
        worst_id = worst_id.max((d - pz).abs() / (1.0 + pz.abs()));
        let central = |h: f64| (f.psi(s + h) - f.psi(s - h)) / (2.0 * h);
        let (e1, e2) = ((central(1e-2) - d).abs(), (central(5e-3) - d).abs());
        let slope = (e1 / e2).log2();
        slope_lo = slope_lo.min(slope);
        slope_hi = slope_hi.max(slope);
    }
    // ordering on admissible triples in the mixed regime under the condition
    let base = params(1, 8, 3, 1.0, 1.0);
    let c = ModelConstants::compute(&base)?;
    let mu = 0.5 * mu_star(&base, &c)?;
    let p = base.with_mu(mu);
    let spec = RadialGridSpec::new(1201, 12.0)?;
    let mut ordered = 0;
    for _ in 0..100 {
        let u = common::random_profile(Dim::One, spec, &mut rng).normalized_to(p.a)?;
        let tr = u.triple(3.0, 8.0);
        let cp = FiberMap::new(tr, &p).critical_points()?;
        if let (Some(s), Some(cu), Some(t), Some(d)) = (cp.s_u, cp.c_u, cp.t_u, cp.d_u) {
            if cp.points.len() == 2 && s < cu && cu < t && t < d {
                ordered += 1;
            }
        }
    }
    let ok = worst_id < 1e-12 && slope_lo > 1.9 && slope_hi < 2.1 && ordered == 100;
    Ok((
        ok,
        format!(
            "|Ψ' - P(s⋆u)| ≤ {worst_id:.1e}, Richardson slopes in [{slope_lo:.3}, {slope_hi:.3}], s<c<t<d on {ordered}/100"
        ),
    ))
}

fn c05_thresholds() -> Check {
    let base = params(1, 8, 3, 1.0, 1.0);
    let c = ModelConstants::compute(&base)?;
    let mut mismatches = 0;
    let mut holding = 0;
    for i in 0..50 {
        let a = 0.2 + 1.8 * i as f64 / 49.0;
        for j in 0..50 {
            let mu = 10f64.powf(-3.0 + 6.0 * j as f64 / 49.0);
            let p = base.with_mass(a).with_mu(mu);
            let holds = cond_mixed(&p, &c)?.condition_holds;
            holding += holds as usize;
            if holds != h_roots(&p, &c)?.is_some() {
                mismatches += 1;
            }
        }
    }
    // rhs of the mixed condition, normalised by 1/(α_p - 2), as q → p̄ = 6
    let c6 = gn_constant(Dim::One, &Exponent::<f64>::integer(6))?;
    let target = rhs_critical(&c6);
    let eps: Vec<f64> = (0..7).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect();
    let mut diffs = Vec::new();
    for &e in &eps {
        let p = ModelParams::new(Dim::One, Exponent::<f64>::integer(8), Exponent::real(6.0 - e), 1.0, 1.0)?;
        let cq = gn_constant(Dim::One, &p.q)?;
        let cc = ModelConstants { q: cq, p: c.p };
        let d = p.derived();
        diffs.push((rhs_mixed(&p, &cc).powf(1.0 / (d.alpha_p - 2.0)) - target).abs());
    }
    let order = common::log_slope(&eps, &diffs);
    let tail = common::log_slope(&eps[eps.len() - 2..], &diffs[diffs.len() - 2..]);
    Ok((
        mismatches == 0 && order >= 1.0,
        format!(
            "N=1 q=3 p=8: {mismatches} mismatches on 2500 points ({holding} satisfy the condition); rhs gap {:.2e} → {:.2e} over ε = 1e-1..1e-4, order {order:.3} (last pair {tail:.3})",
            diffs[0],
            diffs[diffs.len() - 1]
        ),
    ))
}

fn c06_two_branches() -> Check {
    let t0 = Instant::now();
    let base = params(1, 8, 3, 1.0, 1.0);
    let model = Model::new(base)?;
    let ms = mu_star(&base, &model.constants)?;
    let win = stability_window(1.0, 0.1, &base, &model.constants)?;
    let mu = (0.5 * ms).min(win.mu_tilde);
    let model = model.with_mu(mu);
    let opts = SolveOptions::default();
    let lm = solve_prescribed_mass(&model, Branch::LocalMin, &opts)?;
    let mp = solve_prescribed_mass(&model, Branch::MountainPass, &opts)?;
    let r0 = h_roots(&model.params, &model.constants)?.ok_or("no radii")?.r0;
    let spec = RadialGridSpec::new(8001, 40.0)?;
    let init = default_flow_init(&model, spec, 3.0)?;
    let flow = gradient_flow_local_min(&model, &init, &FlowConfig::default())?;
    let l2 = flow.result.profile.l2_distance(&lm.profile);
    let elapsed = t0.elapsed().as_secs_f64();
    let ok = lm.energy_level < 0.0
        && mp.energy_level > 0.0
        && lm.grad_norm < r0
        && lm.lambda < 0.0
        && mp.lambda < 0.0
        && lm.pohozaev_residual < 1e-6
        && mp.pohozaev_residual < 1e-6
        && l2 < 1e-4
        && elapsed < 60.0;
    Ok((
        ok,
        format!(
            "N=1 q=3 p=8 a=1 μ={mu:.4} (μ* {ms:.4}, μ̃ {:.4}): E {:.4} / {:.4}, |∇ũ| {:.4} < R₀ {r0:.4}, λ {:.4} / {:.4}, P-res {:.1e} / {:.1e}, flow L² gap {l2:.1e}, {elapsed:.1} s",
            win.mu_tilde,
            lm.energy_level,
            mp.energy_level,
            lm.grad_norm,
            lm.lambda,
            mp.lambda,
            lm.pohozaev_residual,
            mp.pohozaev_residual
        ),
    ))
}

fn c07_positive_levels() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    for p in [params(1, 8, 6, 1.5, 0.5), params(1, 8, 4, 1.5, -0.3)] {
        let model = Model::new(p)?;
        let cond = applicable_condition(&p, &model.constants)?.ok_or("no condition")?;
        let gs = solve_prescribed_mass(&model, Branch::Unique, &SolveOptions::default())?;
        let good =
            cond.condition_holds && gs.energy_level > 0.0 && gs.lambda < 0.0 && gs.fiber_class == FiberClass::Pminus;
        ok &= good;
        notes.push(format!(
            "{} (q={}, μ={}): E {:.4}, λ {:.4}, {:?}",
            p.regime(),
            p.q,
            p.mu,
            gs.energy_level,
            gs.lambda,
            gs.fiber_class
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn monotone_to_zero(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1].abs() < w[0].abs())
}

fn c08_asymptotics() -> Check {
    let model = Model::new(params(1, 8, 3, 1.0, 1.0))?;
    let tab = asymptotic_sweep(&model, SweepVariable::MuToZero, 4)?;
    let reference = tab.reference_level.ok_or("no μ = 0 level")?;
    let m: Vec<f64> = tab.rows.iter().filter_map(|r| r.m).collect();
    let g: Vec<f64> = tab.rows.iter().filter_map(|r| r.grad_local).collect();
    let sigma_last = tab.rows.last().and_then(|r| r.sigma).ok_or("no σ at smallest μ")?;
    let sigma_gap = (sigma_last - reference).abs() / reference.abs();
    let mu_ok = m.len() == 4
        && g.len() == 4
        && m.iter().all(|&x| x < 0.0)
        && monotone_to_zero(&m)
        && monotone_to_zero(&g)
        && sigma_gap < 1e-2;
    let c6 = gn_constant(Dim::One, &Exponent::<f64>::integer(6))?;
    let abar = c6.abar_n.ok_or("no critical mass")?;
    let qmodel = Model::new(params(1, 8, 5, 1.0, 0.89 * abar.powi(4)))?;
    let qtab = asymptotic_sweep(&qmodel, SweepVariable::QToPbar, 3)?;
    let gq: Vec<f64> = qtab.rows.iter().filter_map(|r| r.grad_local).collect();
    let q_ok = gq.len() == 3 && monotone_to_zero(&gq);
    Ok((
        mu_ok && q_ok,
        format!(
            "μ→0: m {:?}, |∇ũ| {:?}, σ {sigma_last:.6} vs m(a,0) {reference:.6} (rel {sigma_gap:.1e}); q→6: |∇ũ| {:?}",
            m.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>(),
            g.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>(),
            gq.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>(),
        ),
    ))
}

fn c09_dynamics_integrity() -> Check {
    let grid = DynamicsGrid::<f64>::default_for(Dim::One);
    let dx = grid.spacing();
    let sech: Vec<Complex<f64>> = (0..grid.points())
        .map(|j| Complex::new(2f64.sqrt() / grid.coord(j).cosh(), 0.0))
        .collect();
    let w = WaveField::new(grid, sech)?;
    let cubic = params(1, 4, 3, 2.0, 0.0);
    let run = |dt: f64| {
        evolve(
            &w,
            &cubic,
            &EvolveConfig {
                dt,
                t_end: 1.0,
                adaptive: false,
                ..EvolveConfig::default()
            },
            |_, _, _| {},
        )
    };
    let fine = run(5e-4)?;
    let modulus = fine
        .final_state
        .values
        .iter()
        .zip(&w.values)
        .map(|(x, y)| (x.norm() - y.norm()).powi(2) * dx)
        .sum::<f64>()
        .sqrt();
    let std = run(1e-3)?;
    let gauss: Vec<Complex<f64>> = (0..grid.points())
        .map(|j| Complex::new((-grid.coord(j).powi(2) / 2.0).exp(), 0.0))
        .collect();
    let g = WaveField::new(grid, gauss)?;
    let tr = evolve(
        &g,
        &params(1, 8, 3, 1.0, 0.5),
        &EvolveConfig {
            dt: 1e-3,
            t_end: 1.0,
            sample_every: 1,
            ..EvolveConfig::default()
        },
        |_, _, _| {},
    )?;
    let vir = virial_check(&tr)?;
    let ok = modulus < 1e-6 && std.mass_drift() < 1e-10 && std.energy_drift() < 1e-6 && vir.max_rel_error < 1e-3;
    Ok((
        ok,
        format!(
            "modulus L² error {modulus:.2e} (dt 5e-4), mass drift {:.1e}, energy drift {:.1e} (dt 1e-3), virial |f''-8P|/(1+|8P|) ≤ {:.1e} over {} samples",
            std.mass_drift(),
            std.energy_drift(),
            vir.max_rel_error,
            vir.samples
        ),
    ))
}

fn c10_predictions() -> Check {
    let grid = DynamicsGrid::<f64>::default_for(Dim::One);
    let panels = [
        (params(1, 8, 3, 1.3, 0.6332), Branch::MountainPass, 5.0),
        (params(1, 8, 6, 1.5, 0.5), Branch::Unique, 10.0),
        (params(1, 8, 4, 1.5, -0.3), Branch::Unique, 10.0),
    ];
    let scalings = [-0.8, -0.5, -0.3, -0.2, -0.1, 0.1, 0.2, 0.3, 0.5, 0.8];
    let mut ok = true;
    let mut notes = Vec::new();
    for (p, branch, t_end) in panels {
        let model = Model::new(p)?;
        let gs = solve_prescribed_mass(&model, branch, &SolveOptions::default())?;
        let cfg = EvolveConfig {
            dt: 1e-3,
            t_end,
            ..EvolveConfig::default()
        };
        let (mut decided, mut agree) = (0, 0);
        for s in scalings {
            let u = WaveField::from_radial(&gs.profile.dilate(s), grid)?;
            let e = prediction_experiment(&u, &p, gs.energy_level, &cfg)?;
            if let Some(a) = e.agree {
                decided += 1;
                agree += a as usize;
            }
        }
        ok &= decided >= 10 && agree == decided;
        notes.push(format!("{}: {agree}/{decided}", p.regime()));
    }
    // L²-critical leading power below the critical mass: never blows up
    let p = params(1, 6, 3, 1.2, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut blowups = 0;
    for _ in 0..10 {
        let v = common::random_gaussian_1d(grid.points(), 40.0, p.a, &mut rng);
        let tr = evolve(
            &WaveField::new(grid, v)?,
            &p,
            &EvolveConfig {
                dt: 1e-3,
                t_end: 5.0,
                ..EvolveConfig::default()
            },
            |_, _, _| {},
        )?;
        blowups += matches!(tr.outcome, Outcome::BlowUp { .. }) as usize;
    }
    ok &= blowups == 0;
    notes.push(format!("CriticalLeading a=1.2 < ā₁: {blowups}/10 blow-ups"));
    Ok((ok, notes.join("; ")))
}

fn c11_stability() -> Check {
    let grid = DynamicsGrid::<f64>::default_for(Dim::One);
    let p = params(1, 8, 3, 1.3, 0.6332);
    let model = Model::new(p)?;
    let opts = SolveOptions::default();
    let lm = solve_prescribed_mass(&model, Branch::LocalMin, &opts)?;
    let eps = 1e-2;
    let cfg = EvolveConfig {
        dt: 2e-3,
        t_end: 50.0,
        sample_every: 25,
        ..EvolveConfig::default()
    };
    let rep = stability_experiment(&lm, &p, grid, eps, &cfg, 5, 11)?;
    let rel = rep.max_distance / rep.gs_h1_norm;
    let mut ok = rel < 10.0 * eps && rep.unstable_trials == 0;
    let mut notes = vec![format!(
        "local min: max orbital distance {:.2e} ({rel:.2e} relative) over 5 trials, {} unstable",
        rep.max_distance, rep.unstable_trials
    )];
    let mp = solve_prescribed_mass(&model, Branch::MountainPass, &opts)?;
    let crit = params(1, 8, 6, 1.5, 0.5);
    let cgs = solve_prescribed_mass(&Model::new(crit)?, Branch::Unique, &opts)?;
    for (name, gs, pp) in [("mountain pass", &mp, &p), ("critical regime", &cgs, &crit)] {
        let u = WaveField::from_radial(&gs.profile.dilate(0.05), grid)?;
        let cfg = EvolveConfig {
            dt: 1e-3,
            t_end: 10.0,
            ..EvolveConfig::default()
        };
        let e = prediction_experiment(&u, pp, gs.energy_level, &cfg)?;
        let blew = matches!(e.observed, Outcome::BlowUp { .. }) && e.prediction.verdict == Verdict::BlowUp;
        ok &= blew;
        notes.push(format!("{name} at s=+0.05: {}", e.observed.name()));
    }
    Ok((ok, notes.join("; ")))
}

fn c12_nonexistence() -> Check {
    let c6 = gn_constant(Dim::One, &Exponent::<f64>::integer(6))?;
    let a = 0.5 * c6.abar_n.ok_or("no critical mass")?;
    let p = params(1, 6, 3, a, -1.0);
    let rows = mass_curve(&log_lambda_grid(-4.0, 2.0, 25), &p)?;
    let masses: Vec<f64> = rows.iter().filter_map(|r| r.point.map(|m| m.mass)).collect();
    let gaps = rows.len() - masses.len();
    let crossing = rows.windows(2).any(|w| match (w[0].point, w[1].point) {
        (Some(x), Some(y)) => (x.mass - a).signum() != (y.mass - a).signum(),
        _ => false,
    });
    let closest = masses.iter().map(|m| (m - a).abs() / a).fold(f64::INFINITY, f64::min);
    let min_mass = masses.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((
        !crossing && closest > 1e-3,
        format!(
            "q=3 p=6 μ=-1 a={a:.4}: {} shots, {gaps} without a positive solution, smallest mass {min_mass:.4} (a/ā₁ = 0.5), no crossing of a",
            masses.len()
        ),
    ))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 12] = [
        ("soliton oracle", c01_soliton),
        ("critical mass", c02_critical_mass),
        ("GN property suite", c03_gn_suite),
        ("fiber / Pohozaev identity", c04_fiber),
        ("threshold cross-consistency", c05_thresholds),
        ("two-branch structure", c06_two_branches),
        ("positive-level regimes", c07_positive_levels),
        ("asymptotics", c08_asymptotics),
        ("dynamics integrity", c09_dynamics_integrity),
        ("global existence / blow-up predictions", c10_predictions),
        ("stability / instability", c11_stability),
        ("nonexistence", c12_nonexistence),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let (pass, detail) = match std::panic::catch_unwind(f) {
            Ok(Ok(r)) => r,
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".into()),
        };
        failed += !pass as usize;
        println!(
            "criterion {id:2} {} {name}: {detail} [{:.1} s]",
            if pass { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
