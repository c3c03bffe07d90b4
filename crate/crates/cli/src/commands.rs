//! One function per subcommand. Each returns a JSON payload, a flat table
//! for `--out *.csv` and a short text summary.

use std::fmt::Write as _;
use std::path::Path;

use cnls_core::criteria::{
    applicable_condition, blowup_bound_m, h_roots, mu_star, BlowupBound, HGeometry, ModelConstants, ThresholdReport,
};
use cnls_core::dynamics::{
    classify_datum, evolve, has_classifier, prediction_experiment, stability_experiment, virial_check, EvolutionTrace,
    EvolveConfig, Observables, Prediction,
};
use cnls_core::fiber::{FiberMap, FiberTriple};
use cnls_core::grid::RadialGridSpec;
use cnls_core::params::{DerivedExponents, ModelParams, Regime};
use cnls_core::solvers::sweep::{homogeneous_reference, sweep_row, sweep_values, SweepVariable};
use cnls_core::solvers::{
    log_lambda_grid, mass_curve_point, solve_prescribed_mass, Branch, GroundStateResult, Model, SolveOptions,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cache::GnCache;
use crate::config::{
    ClassifyOpts, Command, EvolveOpts, FiberOpts, GnOpts, GroundStateOpts, MassCurveOpts, ParamsSpec, RunOpts,
    StabilityOpts, SweepKind, SweepOpts, VaryArg,
};
use crate::error::{CliError, Result};
use crate::init::{dynamics_grid, initial_datum, GroundStateSummary};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }
}

pub struct CommandOutput {
    pub payload: Value,
    pub table: Table,
    pub text: String,
}

pub struct Context {
    pub cache: GnCache,
    pub seed: u64,
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn to_value<S: Serialize>(s: &S) -> Result<Value> {
    Ok(serde_json::to_value(s)?)
}

fn model(spec: &ParamsSpec, cache: &mut GnCache) -> Result<Model<f64>> {
    let params = spec.model()?;
    let constants = cache.model_constants(&params)?;
    Ok(Model::with_constants(params, constants))
}

pub fn run(command: &Command, spec: &ParamsSpec, ctx: &mut Context) -> Result<CommandOutput> {
    match command {
        Command::Gn(o) => gn(spec, o, ctx),
        Command::Criteria => criteria(spec, ctx),
        Command::Fiber(o) => fiber(spec, o),
        Command::GroundState(o) => ground_state(spec, o, ctx),
        Command::MassCurve(o) => mass_curve(spec, o, ctx),
        Command::Evolve(o) => evolve_cmd(spec, o, ctx),
        Command::Classify(o) => classify(spec, o, ctx),
        Command::Stability(o) => stability(spec, o, ctx),
        Command::Sweep(o) => sweep(spec, o, ctx),
    }
}

fn gn(spec: &ParamsSpec, o: &GnOpts, ctx: &mut Context) -> Result<CommandOutput> {
    let dim = spec.dim()?;
    let p = spec.p()?;
    let base = RadialGridSpec::<f64>::default();
    let grid = RadialGridSpec::new(o.grid_points.unwrap_or(base.points), o.radius.unwrap_or(base.radius))?;
    let c = ctx.cache.get(dim, &p, grid)?;
    let mut table = Table::new(&["N", "p", "c_np", "mass_w", "abar_n", "residual", "grad2_w", "lp_w"]);
    table.rows.push(vec![
        dim.to_string(),
        p.to_string(),
        num(c.c_np),
        num(c.mass_w),
        opt(c.abar_n),
        num(c.residual),
        num(c.grad2_w),
        num(c.lp_w),
    ]);
    let mut text = format!(
        "C_{{{dim},{p}}} = {:.10}  (soliton residual {:.2e})\n|w|_2 = {:.10}\n",
        c.c_np, c.residual, c.mass_w
    );
    if let Some(ab) = c.abar_n {
        let _ = writeln!(text, "critical mass abar_{dim} = {ab:.10}");
    }
    Ok(CommandOutput {
        payload: json!({
            "c_np": c.c_np,
            "mass_w": c.mass_w,
            "abar_n": c.abar_n,
            "residual": c.residual,
            "grad2_w": c.grad2_w,
            "lp_w": c.lp_w,
            "grid": grid,
        }),
        table,
        text,
    })
}

#[derive(Debug, Clone, Serialize)]
struct CriteriaReport {
    params: ModelParams<f64>,
    regime: Regime,
    derived: DerivedExponents<f64>,
    /// Existence condition of the regime; absent where none applies.
    condition: Option<ThresholdReport<f64>>,
    geometry: Option<HGeometry<f64>>,
    mu_star: Option<f64>,
    blowup_bound: Option<BlowupBound<f64>>,
    notes: Vec<String>,
}

fn criteria_report(params: &ModelParams<f64>, c: &ModelConstants<f64>) -> Result<CriteriaReport> {
    let regime = params.regime();
    let mut r = CriteriaReport {
        params: *params,
        regime,
        derived: params.derived(),
        condition: applicable_condition(params, c)?,
        geometry: None,
        mu_star: None,
        blowup_bound: None,
        notes: Vec::new(),
    };
    if regime == Regime::MixedFocusing {
        r.geometry = h_roots(params, c)?;
        r.mu_star = Some(mu_star(params, c)?);
        match blowup_bound_m(params, c) {
            Ok(b) => r.blowup_bound = Some(b),
            Err(e) => r.notes.push(format!("blow-up bound: {e}")),
        }
    }
    if r.condition.is_none() {
        r.notes.push(format!("no existence condition for regime {regime}"));
    }
    Ok(r)
}

const CRITERIA_COLUMNS: [&str; 8] = ["regime", "holds", "lhs", "rhs", "margin", "r0", "r1", "m_bound"];

fn criteria_cells(r: &CriteriaReport) -> Vec<String> {
    let cond = r.condition.as_ref();
    vec![
        r.regime.to_string(),
        cond.map(|c| c.condition_holds.to_string()).unwrap_or_default(),
        opt(cond.map(|c| c.lhs)),
        opt(cond.map(|c| c.rhs)),
        opt(cond.map(|c| c.margin)),
        opt(r.geometry.map(|g| g.r0)),
        opt(r.geometry.map(|g| g.r1)),
        opt(r.blowup_bound.map(|b| b.m_bound)),
    ]
}

fn criteria(spec: &ParamsSpec, ctx: &mut Context) -> Result<CommandOutput> {
    let m = model(spec, &mut ctx.cache)?;
    let r = criteria_report(&m.params, &m.constants)?;
    let mut table = Table::new(&CRITERIA_COLUMNS);
    table.rows.push(criteria_cells(&r));
    let mut text = format!("regime: {}\n", r.regime);
    match &r.condition {
        Some(c) => {
            let _ = writeln!(
                text,
                "condition {}: lhs = {:.6e}, rhs = {:.6e}, margin = {:.6e}{}",
                if c.condition_holds { "holds" } else { "fails" },
                c.lhs,
                c.rhs,
                c.margin,
                if c.boundary { " (tangency)" } else { "" }
            );
        }
        None => text.push_str("no existence condition applies\n"),
    }
    if let Some(g) = r.geometry {
        let _ = writeln!(text, "R0 = {:.6e}, R1 = {:.6e}", g.r0, g.r1);
    }
    if let Some(ms) = r.mu_star {
        let _ = writeln!(text, "mu* = {ms:.6e}");
    }
    if let Some(b) = r.blowup_bound {
        let _ = writeln!(text, "M = {:.6e}", b.m_bound);
    }
    Ok(CommandOutput {
        payload: to_value(&r)?,
        table,
        text,
    })
}

fn fiber(spec: &ParamsSpec, o: &FiberOpts) -> Result<CommandOutput> {
    let &[g2, mq, mp, m2] = o.triple.as_slice() else {
        return Err(CliError::Usage("--triple takes four values g2,mq,mp,m2".into()));
    };
    let tr = FiberTriple::new(g2, mq, mp, m2)?;
    // `a` only fixes the mass, which the triple already carries
    let mut spec = spec.clone();
    spec.a = spec.a.or(Some(m2.sqrt()));
    let params = spec.model()?;
    let f = FiberMap::new(tr, &params);
    let cps = f.critical_points()?;
    let class_at_zero = f.classify_at_zero();
    if o.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let marks = cps
        .points
        .iter()
        .map(|c| c.s)
        .chain(cps.c_u)
        .chain(cps.d_u)
        .chain([0.0]);
    let (lo, hi) = marks.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
    let w = f.window();
    let (lo, hi) = ((lo - 2.0).max(-w), (hi + 2.0).min(w));
    let mut table = Table::new(&["s", "psi", "psi_prime"]);
    for k in 0..o.samples {
        let s = lo + (hi - lo) * k as f64 / (o.samples - 1) as f64;
        table.rows.push(vec![num(s), num(f.psi(s)), num(f.psi_prime(s))]);
    }
    if let Some(path) = &o.plot_psi {
        table.write_csv(path)?;
    }
    let mut text = format!("class at s = 0: {class_at_zero:?}\n");
    for c in &cps.points {
        let _ = writeln!(text, "{:?} at s = {:.8}, level {:.8e}", c.kind, c.s, c.level);
    }
    for (name, v) in [("c_u", cps.c_u), ("d_u", cps.d_u)] {
        if let Some(v) = v {
            let _ = writeln!(text, "{name} = {v:.8}");
        }
    }
    Ok(CommandOutput {
        payload: json!({
            "triple": tr,
            "class_at_zero": class_at_zero,
            "critical_points": cps,
            "psi_at_zero": f.psi(0.0),
            "psi_prime_at_zero": f.psi_prime(0.0),
            "sample_range": [lo, hi],
        }),
        table,
        text,
    })
}

fn ground_state_payload(gs: &GroundStateResult<f64>) -> Value {
    json!({
        "branch": gs.branch.name(),
        "lambda": gs.lambda,
        "lambda_rayleigh": gs.lambda_rayleigh,
        "energy_level": gs.energy_level,
        "fiber_class": gs.fiber_class,
        "triple": gs.triple,
        "grad_norm": gs.grad_norm,
        "u0": gs.profile.values.first().copied(),
        "residuals": {
            "mass_error": gs.mass_error,
            "pohozaev_residual": gs.pohozaev_residual,
            "ode_residual": gs.ode_residual,
        },
        "grid": gs.profile.spec(),
    })
}

fn ground_state(spec: &ParamsSpec, o: &GroundStateOpts, ctx: &mut Context) -> Result<CommandOutput> {
    let m = model(spec, &mut ctx.cache)?;
    let gs = solve_prescribed_mass(&m, o.branch.into(), &SolveOptions::default())?;
    let mut table = Table::new(&["r", "u"]);
    table.rows = (0..gs.profile.len())
        .map(|j| vec![num(gs.profile.r(j)), num(gs.profile.values[j])])
        .collect();
    let text = format!(
        "{} branch: lambda = {:.10e}, E = {:.10e}, class {:?}\nresiduals: mass {:.1e}, Pohozaev {:.1e}, equation {:.1e}\n",
        gs.branch.name(),
        gs.lambda,
        gs.energy_level,
        gs.fiber_class,
        gs.mass_error,
        gs.pohozaev_residual,
        gs.ode_residual
    );
    Ok(CommandOutput {
        payload: ground_state_payload(&gs),
        table,
        text,
    })
}

fn mass_curve(spec: &ParamsSpec, o: &MassCurveOpts, ctx: &mut Context) -> Result<CommandOutput> {
    let m = model(spec, &mut ctx.cache)?;
    if !(o.lambda_from < 0.0 && o.lambda_to < 0.0) {
        return Err(CliError::Usage("--lambda-from and --lambda-to must be negative".into()));
    }
    let lambdas: Vec<f64> = match o.steps {
        0 => Vec::new(),
        1 => vec![o.lambda_from],
        n => {
            let (x0, x1) = ((-o.lambda_from).log10(), (-o.lambda_to).log10());
            log_lambda_grid(x0.min(x1), x0.max(x1), n)
        }
    };
    let params = m.params;
    let rows: Vec<_> = lambdas.par_iter().map(|&l| (l, mass_curve_point(l, &params))).collect();
    let mut table = Table::new(&["lambda", "mass", "energy", "grad2", "fiber_class", "u0", "error"]);
    let mut points = Vec::new();
    let mut failures = 0;
    for (l, r) in &rows {
        match r {
            Ok(p) => {
                table.rows.push(vec![
                    num(*l),
                    num(p.mass),
                    num(p.energy),
                    num(p.grad2),
                    format!("{:?}", p.fiber_class),
                    num(p.u0),
                    String::new(),
                ]);
                points.push(json!({ "lambda": l, "point": p }));
            }
            Err(e) => {
                failures += 1;
                let mut row = vec![num(*l)];
                row.extend(std::iter::repeat_n(String::new(), 5));
                row.push(e.to_string());
                table.rows.push(row);
                points.push(json!({ "lambda": l, "error": { "category": e.category(), "message": e.to_string() } }));
            }
        }
    }
    let text = format!("{} samples, {failures} failed\n", rows.len());
    Ok(CommandOutput {
        payload: json!({ "rows": points, "failures": failures }),
        table,
        text,
    })
}

fn evolve_config(run: &RunOpts) -> Result<EvolveConfig<f64>> {
    if !(run.dt > 0.0 && run.t_end >= 0.0) || run.sample_every == 0 {
        return Err(CliError::Usage("need dt > 0, T >= 0 and sample-every >= 1".into()));
    }
    Ok(EvolveConfig {
        dt: run.dt,
        t_end: run.t_end,
        sample_every: run.sample_every,
        adaptive: !run.fixed_step,
        ..EvolveConfig::default()
    })
}

fn trace_table(tr: &EvolutionTrace<f64>) -> Table {
    let mut t = Table::new(&["t", "mass2", "energy", "grad2", "virial", "pohozaev"]);
    t.rows = (0..tr.times.len())
        .map(|k| {
            vec![
                num(tr.times[k]),
                num(tr.mass2[k]),
                num(tr.energy[k]),
                num(tr.grad2[k]),
                num(tr.virial[k]),
                num(tr.pohozaev[k]),
            ]
        })
        .collect();
    t
}

fn trace_summary(tr: &EvolutionTrace<f64>) -> Value {
    let virial = match virial_check(tr) {
        Ok(v) => to_value(&v).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    };
    json!({
        "outcome": tr.outcome,
        "signals": tr.signals,
        "gradient_threshold": tr.gradient_threshold,
        "steps": tr.steps,
        "samples": tr.times.len(),
        "dt_final": tr.dt_final,
        "max_grad2": tr.max_grad2(),
        "mass_drift": tr.mass_drift(),
        "energy_drift": tr.energy_drift(),
        "virial_check": virial,
    })
}

fn observables(o: &Observables<f64>) -> Value {
    json!({
        "mass2": o.mass2,
        "grad2": o.grad2,
        "mq": o.mq,
        "mp": o.mp,
        "energy": o.energy,
        "virial": o.virial,
        "pohozaev": o.pohozaev,
    })
}

fn evolve_cmd(spec: &ParamsSpec, o: &EvolveOpts, ctx: &mut Context) -> Result<CommandOutput> {
    let m = model(spec, &mut ctx.cache)?;
    let grid = dynamics_grid(&m, &o.run)?;
    let cfg = evolve_config(&o.run)?;
    let (u, init) = initial_datum(&o.init, &m, grid)?;
    let obs0 = u.observables(&m.params)?;
    let tr = evolve(&u, &m.params, &cfg, |_, _, _| {})?;
    let table = trace_table(&tr);
    if let Some(path) = &o.trace {
        table.write_csv(path)?;
    }
    let text = format!(
        "outcome: {} after {} steps (t = {:.6})\nmass drift {:.2e}, energy drift {:.2e}, max |grad|^2 {:.6e}\n",
        tr.outcome.name(),
        tr.steps,
        tr.times.last().copied().unwrap_or(0.0),
        tr.mass_drift(),
        tr.energy_drift(),
        tr.max_grad2()
    );
    Ok(CommandOutput {
        payload: json!({
            "init": init,
            "grid": grid,
            "evolve_config": cfg,
            "initial": observables(&obs0),
            "trace": trace_summary(&tr),
        }),
        table,
        text,
    })
}

/// `inf_{P-} E`: the mountain-pass level in the mixed regime, the unique
/// branch elsewhere.
fn reference_level(m: &Model<f64>) -> Result<Option<GroundStateResult<f64>>> {
    let regime = m.params.regime();
    if !has_classifier(regime) {
        return Ok(None);
    }
    let branch = if regime == Regime::MixedFocusing {
        Branch::MountainPass
    } else {
        Branch::Unique
    };
    Ok(Some(solve_prescribed_mass(m, branch, &SolveOptions::default())?))
}

fn prediction_cells(p: &Prediction<f64>) -> Vec<String> {
    vec![
        p.verdict.name().to_string(),
        opt(p.t_u),
        num(p.energy),
        num(p.pohozaev),
        num(p.level),
        p.reason.clone().unwrap_or_default(),
    ]
}

fn classify(spec: &ParamsSpec, o: &ClassifyOpts, ctx: &mut Context) -> Result<CommandOutput> {
    let m = model(spec, &mut ctx.cache)?;
    let grid = dynamics_grid(&m, &o.run)?;
    let (u, init) = initial_datum(&o.init, &m, grid)?;
    let condition = applicable_condition(&m.params, &m.constants)?;
    let reference = reference_level(&m)?;
    let level = reference.as_ref().map_or(f64::NAN, |g| g.energy_level);
    let reference_json = reference.as_ref().map(ground_state_payload);
    let mut table = Table::new(&["verdict", "t_u", "energy", "pohozaev", "level", "reason"]);
    if o.verify {
        let cfg = evolve_config(&o.run)?;
        let e = prediction_experiment(&u, &m.params, level, &cfg)?;
        let text = format!(
            "prediction: {}  observed: {}  agree: {}\n",
            e.prediction.verdict.name(),
            e.observed.name(),
            e.agree.map_or("n/a".to_string(), |a| a.to_string())
        );
        table.rows.push(prediction_cells(&e.prediction));
        return Ok(CommandOutput {
            payload: json!({
                "init": init,
                "grid": grid,
                "condition": condition,
                "reference": reference_json,
                "prediction": e.prediction,
                "observed": e.observed,
                "agree": e.agree,
                "evolve_config": cfg,
                "trace": trace_summary(&e.trace),
            }),
            table,
            text,
        });
    }
    let p = classify_datum(&u, &m.params, level)?;
    table.rows.push(prediction_cells(&p));
    let mut text = format!("prediction: {}", p.verdict.name());
    if let Some(r) = &p.reason {
        let _ = write!(text, " ({r})");
    }
    text.push('\n');
    Ok(CommandOutput {
        payload: json!({
            "init": init,
            "grid": grid,
            "condition": condition,
            "reference": reference_json,
            "prediction": p,
        }),
        table,
        text,
    })
}

fn stability(spec: &ParamsSpec, o: &StabilityOpts, ctx: &mut Context) -> Result<CommandOutput> {
    let m = model(spec, &mut ctx.cache)?;
    let branch = o
        .branch
        .map(Branch::from)
        .unwrap_or(if m.params.regime() == Regime::MixedFocusing {
            Branch::LocalMin
        } else {
            Branch::Unique
        });
    let grid = dynamics_grid(&m, &o.run)?;
    let cfg = evolve_config(&o.run)?;
    let gs = solve_prescribed_mass(&m, branch, &SolveOptions::default())?;
    let rep = stability_experiment(&gs, &m.params, grid, o.eps, &cfg, o.trials, ctx.seed)?;
    let mut table = Table::new(&["trial", "seed", "initial_distance", "max_distance", "outcome"]);
    table.rows = rep
        .trials
        .iter()
        .enumerate()
        .map(|(k, t)| {
            vec![
                k.to_string(),
                ctx.seed.wrapping_add(k as u64).to_string(),
                num(t.initial_distance),
                num(t.max_distance),
                t.outcome.name().to_string(),
            ]
        })
        .collect();
    let text = format!(
        "{} branch, eps = {:.1e}: max orbital distance {:.4e} (|gs|_H1 = {:.4e}), {} of {} trials not global\n",
        branch.name(),
        o.eps,
        rep.max_distance,
        rep.gs_h1_norm,
        rep.unstable_trials,
        rep.trials.len()
    );
    Ok(CommandOutput {
        payload: json!({
            "ground_state": ground_state_payload(&gs),
            "summary": GroundStateSummary::of(&gs, 0.0),
            "grid": grid,
            "evolve_config": cfg,
            "report": rep,
        }),
        table,
        text,
    })
}

fn vary_name(v: VaryArg) -> &'static str {
    match v {
        VaryArg::Mu => "mu",
        VaryArg::A => "a",
        VaryArg::Q => "q",
    }
}

/// Monotone grid from `from` to `to`; `μ` and `a` are log spaced unless
/// `linear` is set.
fn sweep_grid(o: &SweepOpts, from: f64, to: f64) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite()) {
        return Err(CliError::Usage("sweep bounds must be finite".into()));
    }
    match o.steps {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![from]),
        _ => {}
    }
    if from == to {
        return Err(CliError::Usage("sweep grid must be monotone (from == to)".into()));
    }
    let frac = |k: usize| k as f64 / (o.steps - 1) as f64;
    if o.linear || o.vary == VaryArg::Q {
        return Ok((0..o.steps).map(|k| from + (to - from) * frac(k)).collect());
    }
    if from * to <= 0.0 {
        return Err(CliError::Usage(
            "log-spaced sweep needs bounds of one sign (or --linear)".into(),
        ));
    }
    let sign = from.signum();
    let (l0, l1) = ((from * sign).ln(), (to * sign).ln());
    let last = o.steps - 1;
    Ok((0..o.steps)
        .map(|k| match k {
            0 => from,
            k if k == last => to,
            k => sign * (l0 + (l1 - l0) * frac(k)).exp(),
        })
        .collect())
}

fn sweep(spec: &ParamsSpec, o: &SweepOpts, ctx: &mut Context) -> Result<CommandOutput> {
    match o.kind {
        SweepKind::Criteria => criteria_sweep(spec, o, ctx),
        SweepKind::Asymptotic => asymptotic(spec, o, ctx),
    }
}

fn varied(base: &ParamsSpec, vary: VaryArg, v: f64) -> ParamsSpec {
    let mut s = base.clone();
    match vary {
        VaryArg::Mu => s.mu = Some(v),
        VaryArg::A => s.a = Some(v),
        VaryArg::Q => s.q = Some(v.to_string()),
    }
    s
}

fn criteria_sweep(spec: &ParamsSpec, o: &SweepOpts, ctx: &mut Context) -> Result<CommandOutput> {
    let (Some(from), Some(to)) = (o.from, o.to) else {
        return Err(CliError::Usage("criteria sweep needs --from and --to".into()));
    };
    let values = sweep_grid(o, from, to)?;
    let name = vary_name(o.vary);
    let mut header = vec![name];
    header.extend(CRITERIA_COLUMNS);
    header.push("error");
    let mut table = Table::new(&header);

    // constants for every exponent up front, computed in parallel
    let params: Vec<Result<ModelParams<f64>>> = values.iter().map(|&v| varied(spec, o.vary, v).model()).collect();
    let needed: Vec<_> = params
        .iter()
        .flatten()
        .flat_map(|p| [(p.dim, p.q), (p.dim, p.p)])
        .collect();
    ctx.cache.prefetch(&needed)?;
    let with_constants: Vec<Result<(ModelParams<f64>, ModelConstants<f64>)>> = params
        .into_iter()
        .map(|p| {
            let p = p?;
            let c = ctx.cache.model_constants(&p)?;
            Ok((p, c))
        })
        .collect();

    let rows: Vec<Result<CriteriaReport>> = with_constants
        .par_iter()
        .map(|r| match r {
            Ok((p, c)) => criteria_report(p, c),
            Err(_) => Err(CliError::Usage(String::new())),
        })
        .collect();
    let mut payload_rows = Vec::new();
    let mut failures = 0;
    for (v, (r, src)) in values.iter().zip(rows.iter().zip(&with_constants)) {
        let mut cells = vec![num(*v)];
        match (r, src) {
            (Ok(rep), _) => {
                cells.extend(criteria_cells(rep));
                cells.push(String::new());
                payload_rows.push(json!({ "value": v, "report": rep }));
            }
            (Err(_), Err(e)) | (Err(e), Ok(_)) => {
                failures += 1;
                cells.extend(std::iter::repeat_n(String::new(), CRITERIA_COLUMNS.len()));
                cells.push(e.to_string());
                payload_rows
                    .push(json!({ "value": v, "error": { "category": e.category(), "message": e.to_string() } }));
            }
        }
        table.rows.push(cells);
    }
    let text = format!("{} rows over {name}, {failures} failed\n", values.len());
    Ok(CommandOutput {
        payload: json!({ "vary": name, "values": values, "rows": payload_rows, "failures": failures }),
        table,
        text,
    })
}

fn asymptotic(spec: &ParamsSpec, o: &SweepOpts, ctx: &mut Context) -> Result<CommandOutput> {
    let vary = match o.vary {
        VaryArg::Mu => SweepVariable::MuToZero,
        VaryArg::Q => SweepVariable::QToPbar,
        VaryArg::A => return Err(CliError::Usage("asymptotic sweeps vary mu or q".into())),
    };
    let m = model(spec, &mut ctx.cache)?;
    if m.params.regime() != Regime::MixedFocusing {
        return Err(cnls_core::Error::Regime {
            expected: "MixedFocusing",
            actual: m.params.regime(),
        }
        .into());
    }
    let values = match (o.from, o.to) {
        (Some(f), Some(t)) => sweep_grid(o, f, t)?,
        (None, None) if o.steps == 0 => Vec::new(),
        (None, None) => sweep_values(&m.params, vary, o.steps),
        _ => return Err(CliError::Usage("give both --from and --to, or neither".into())),
    };
    let opts = SolveOptions::default();
    let reference = match vary {
        SweepVariable::MuToZero if !values.is_empty() => Some(homogeneous_reference(&m, &opts)?),
        _ => None,
    };
    let rows: Vec<_> = values
        .par_iter()
        .map(|&v| sweep_row(&m, vary, v, reference.as_ref(), &opts))
        .collect();
    let name = vary_name(o.vary);
    let mut table = Table::new(&[name, "m", "grad_local", "sigma", "h1_distance", "r0", "error"]);
    table.rows = rows
        .iter()
        .map(|r| {
            vec![
                num(r.parameter),
                opt(r.m),
                opt(r.grad_local),
                opt(r.sigma),
                opt(r.h1_distance),
                opt(r.r0),
                r.failure.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let failures = rows.iter().filter(|r| r.failure.is_some()).count();
    let text = format!("{} rows over {name}, {failures} with failures\n", rows.len());
    Ok(CommandOutput {
        payload: json!({
            "vary": name,
            "rows": rows,
            "reference_level": reference.map(|r| r.energy_level),
            "failures": failures,
        }),
        table,
        text,
    })
}
