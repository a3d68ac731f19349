use alh::experiments::{asymptotics_run, closeness_run, support_spread_run};
use alh::flows::{al_explicit_rhs, AlSystem, Flow};
use alh::hierarchy::{al_r_rhs, check_constraint, homogeneous_coeffs, recursion_residual, Sign};
use alh::integrator::{evolve, evolve_final, flow_for, EvolveOptions, Observation, Observer};
use alh::lattice::{BoundaryMode, Profile, Weight};
use alh::lax::{build_l, eigenvalue_drift, lax_residual, spectrum, SpectrumReport};
use alh::suite::run_suite;
use alh::SequencePair;
use num_complex::Complex64;
use serde_json::json;

use crate::cli::Command;
use crate::config::RunConfig;
use crate::output::{Cell, Sink, Table};
use crate::CliError;

pub fn run(cfg: &RunConfig, sink: &mut Sink, warnings: &mut Vec<String>) -> Result<(), CliError> {
    match cfg.command.expect("command is always resolved") {
        Command::Evolve => evolve_cmd(cfg, sink),
        Command::Hierarchy => hierarchy_cmd(cfg, sink),
        Command::Check => check_cmd(cfg, sink),
        Command::Closeness => closeness_cmd(cfg, sink),
        Command::Asymptotics => asymptotics_cmd(cfg, sink, warnings),
        Command::Spectrum => spectrum_cmd(cfg, sink, warnings),
        Command::Support => support_cmd(cfg, sink, warnings),
    }
}

fn initial_state(cfg: &RunConfig) -> Result<SequencePair, CliError> {
    Ok(cfg.profile.build(cfg.lattice_window()?)?)
}

fn probe_site(x: &SequencePair) -> i64 {
    if x.window().contains(0) {
        0
    } else {
        x.window().n_min()
    }
}

fn state_table(name: &str, initial: &SequencePair, last: &SequencePair) -> Table {
    let mut t = Table::new(name, &["site", "alpha", "beta", "alpha_initial", "beta_initial"]);
    for n in last.window().sites() {
        let (a, b) = last.value_at(n);
        let (a0, b0) = initial.value_at(n);
        t.push(vec![Cell::Int(n), Cell::Complex(a), Cell::Complex(b), Cell::Complex(a0), Cell::Complex(b0)]);
    }
    t
}

fn evolve_cmd(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let x0 = initial_state(cfg)?;
    let spec = cfg.spec()?;
    let flow = flow_for(&spec);
    let site = probe_site(&x0);
    let l2 = |x: &SequencePair| x.alpha().iter().chain(x.beta()).map(|z| z.norm_sqr()).sum::<f64>();
    let options = EvolveOptions {
        sample_every: cfg.numerics.stride,
        observers: vec![
            Observer::new("sup_norm", |_, x| Observation::Real(x.sup_norm())),
            Observer::new("l2_norm_sq", move |_, x| Observation::Real(l2(x))),
            Observer::new("alpha_probe", move |_, x| Observation::Complex(x.alpha_at(site))),
            Observer::new("beta_probe", move |_, x| Observation::Complex(x.beta_at(site))),
        ],
    };
    let traj = evolve(&x0, &*flow, 0.0, cfg.numerics.t1, cfg.numerics.h, &options)?;
    let names = ["sup_norm", "l2_norm_sq", "alpha_probe", "beta_probe"];
    let mut table = Table::new("timeseries", &["time", names[0], names[1], names[2], names[3]]);
    for (k, &t) in traj.times.iter().enumerate() {
        let mut row = vec![Cell::Real(t)];
        for name in names {
            row.push(match traj.observables[name][k] {
                Observation::Real(v) => Cell::Real(v),
                Observation::Complex(z) => Cell::Complex(z),
            });
        }
        table.push(row);
    }
    sink.table(&table)?;
    sink.table(&state_table("final_state", &x0, traj.final_state()))?;
    sink.json(
        "evolve_report",
        &json!({
            "flow": flow.name(),
            "probe_site": site,
            "steps": traj.step_times.len() - 1,
            "final_time": traj.final_time(),
            "max_sup_norm": traj.sup_norms.iter().cloned().fold(0.0, f64::max),
            "initial_products": x0.product_report(),
        }),
    )
}

fn hierarchy_cmd(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let x = initial_state(cfg)?;
    let spec = cfg.spec()?;
    let reach = spec.r_minus().max(spec.r_plus());
    let order = cfg.hierarchy.order.unwrap_or(reach).max(reach);
    let plus = homogeneous_coeffs(&x, order, Sign::Plus)?;
    let minus = homogeneous_coeffs(&x, order, Sign::Minus)?;
    let d = al_r_rhs(&x, &spec)?;

    let mut columns = vec!["site".to_string()];
    for (tag, _) in [("plus", &plus), ("minus", &minus)] {
        for l in 0..=order {
            columns.push(format!("g_{tag}_{l}"));
        }
        for l in 0..order {
            columns.push(format!("f_{tag}_{l}"));
            columns.push(format!("h_{tag}_{l}"));
        }
    }
    columns.push("dalpha".into());
    columns.push("dbeta".into());
    let refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new("hierarchy", &refs);
    for n in x.window().sites() {
        let mut row = vec![Cell::Int(n)];
        for ladder in [&plus, &minus] {
            row.extend((0..=order).map(|l| Cell::Complex(ladder.g(l, n))));
            for l in 0..order {
                row.push(Cell::Complex(ladder.f(l, n)));
                row.push(Cell::Complex(ladder.h(l, n)));
            }
        }
        let (da, db) = d.at(n);
        row.push(Cell::Complex(da));
        row.push(Cell::Complex(db));
        table.push(row);
    }
    sink.table(&table)?;
    let oracle = al_explicit_rhs(&x, &spec).ok().map(|e| e.max_abs_diff(&d));
    sink.json(
        "hierarchy_report",
        &json!({
            "flow": spec.name(),
            "order": order,
            "c_r": spec.c_r(),
            "recursion_residual_plus": recursion_residual(&x, &plus),
            "recursion_residual_minus": recursion_residual(&x, &minus),
            "explicit_formula_max_diff": oracle,
            "constraint": check_constraint(&spec),
        }),
    )
}

fn check_cmd(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let report = run_suite(cfg.seed);
    let mut table = Table::new("check", &["id", "name", "passed", "measured", "threshold"]);
    for c in &report.criteria {
        println!("{}", c.line());
        table.push(vec![
            Cell::Int(c.id as i64),
            Cell::Text(c.name.clone()),
            Cell::Bool(c.passed),
            Cell::Real(c.measured),
            Cell::Real(c.threshold),
        ]);
    }
    sink.table(&table)?;
    sink.json("check_report", &report)?;
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::SuiteFailed(failed));
    }
    Ok(())
}

fn closeness_cmd(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let a = initial_state(cfg)?;
    let window = *a.window();
    let c = &cfg.closeness;
    let i = window.index_of(c.site).ok_or_else(|| {
        CliError::Validation(format!("perturbation site {} is outside the window", c.site))
    })?;
    let mut b = a.clone();
    b.alpha_mut()[i] += Complex64::new(c.perturbation, 0.0);
    let weight = Weight::new(window, c.weight.clone())?;
    let spec = cfg.spec()?;
    let r = closeness_run(&a, &b, &weight, c.p, &*flow_for(&spec), cfg.numerics.t1, cfg.numerics.h, c.samples)?;
    let d0 = r.delta_norm[0];
    let mut table = Table::new("closeness", &["time", "delta_norm", "envelope"]);
    for (&t, &d) in r.times.iter().zip(&r.delta_norm) {
        let env = if d0 == 0.0 {
            0.0
        } else {
            let ct = r.fitted_c * t;
            let phi = if ct.abs() < 1e-12 { t } else { ct.exp_m1() / r.fitted_c };
            d0 * ct.exp() + r.fitted_d * phi
        };
        table.push(vec![Cell::Real(t), Cell::Real(d), Cell::Real(env)]);
    }
    sink.table(&table)?;
    sink.json(
        "closeness_report",
        &json!({
            "flow": spec.name(),
            "fitted_C": r.fitted_c,
            "fitted_D": r.fitted_d,
            "envelope_ok": r.envelope_ok,
            "max_envelope_ratio": r.max_envelope_ratio,
            "d_negligible": r.d_negligible,
            "times": r.times,
            "delta_norm": r.delta_norm,
        }),
    )
}

fn asymptotics_cmd(cfg: &RunConfig, sink: &mut Sink, warnings: &mut Vec<String>) -> Result<(), CliError> {
    let a = &cfg.asymptotics;
    let spec = cfg.spec()?;
    let r = asymptotics_run(a.a, a.b, a.delta, &spec, cfg.numerics.t1, cfg.numerics.h, &a.windows, a.p, a.samples)?;
    warnings.extend(r.warnings.iter().cloned());
    let mut columns = vec!["time".to_string()];
    columns.extend(r.window_sizes.iter().map(|n| format!("residual_{n}")));
    let refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new("asymptotics", &refs);
    for (k, &t) in r.times.iter().enumerate() {
        let mut row = vec![Cell::Real(t)];
        row.extend(r.residual_norm_t.iter().map(|s| Cell::Real(s[k])));
        table.push(row);
    }
    sink.table(&table)?;
    sink.json("asymptotics_report", &r)
}

fn spectrum_cmd(cfg: &RunConfig, sink: &mut Sink, warnings: &mut Vec<String>) -> Result<(), CliError> {
    let x0 = initial_state(cfg)?;
    let spec = cfg.spec()?;
    let b0 = build_l(&x0)?;
    let ev0 = spectrum(&b0)?;
    let x1 = evolve_final(&x0, &*flow_for(&spec), 0.0, cfg.numerics.t1, cfg.numerics.h)?;
    let ev1 = spectrum(&build_l(&x1)?)?;
    let drift = eigenvalue_drift(&ev0, &ev1)?;
    let lax = if x0.window().boundary() == BoundaryMode::Periodic && spec == alh::FlowSpec::al_system() {
        let margin = 8.min(x0.window().len() / 2 - 1).max(4);
        Some(lax_residual(&x0, &AlSystem.derivative(&x0)?, &b0, margin)?)
    } else {
        warnings.push("Lax residual needs a periodic window and the al_system flow; skipped".into());
        None
    };
    let mut table = Table::new("spectrum", &["index", "initial", "final"]);
    for (k, (l0, l1)) in ev0.iter().zip(&ev1).enumerate() {
        table.push(vec![Cell::Int(k as i64), Cell::Complex(*l0), Cell::Complex(*l1)]);
    }
    sink.table(&table)?;
    let report = SpectrumReport::new(&b0, ev0);
    sink.json(
        "spectrum_report",
        &json!({
            "flow": spec.name(),
            "window_len": report.window_len,
            "boundary": report.boundary,
            "t1": cfg.numerics.t1,
            "eigenvalue_drift": drift,
            "max_unit_circle_deviation": report.max_unit_circle_deviation,
            "inverse_residual": b0.inverse_residual,
            "lax_residual": lax,
            "branch_cut_sites": b0.branch_sites,
        }),
    )
}

fn support_cmd(cfg: &RunConfig, sink: &mut Sink, warnings: &mut Vec<String>) -> Result<(), CliError> {
    let x0 = match cfg.profile {
        Profile::Compact { .. } => initial_state(cfg)?,
        _ => {
            warnings.push("profile is not compact; using alpha = beta = 0.5 at site 0".into());
            let half = vec![Complex64::new(0.5, 0.0)];
            Profile::Compact { start: 0, alpha: half.clone(), beta: half }.build(cfg.lattice_window()?)?
        }
    };
    let spec = cfg.spec()?;
    let flow = flow_for(&spec);
    let r = support_spread_run(&x0, &*flow, cfg.numerics.h)?;
    let x1 = alh::integrator::step(&x0, &*flow, cfg.numerics.h)?;
    sink.table(&state_table("support_state", &x0, &x1))?;
    sink.json("support_report", &r)
}
