use std::path::{Path, PathBuf};

use menshov_core::assembly::observed_order;
use menshov_core::corrector::check_properties;
use menshov_core::fourier::running_wiener_averages;
use menshov_core::{
    build_lambda, build_psi, choose_r, claim_run, kernel_sup, layout, partial_sum_diagnostics,
    proposition_scan, theorem_demo, ClaimParams, CoefficientTable, CorrectorParams, DemoParams,
    Interval, Measure, StepFunction, TWO_PI,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{MeasureRef, RunConfig};
use crate::output::{float, opt_float, LinePlot, Reports};
use crate::{CliError, Command};

fn measure(config: &RunConfig) -> Result<Measure, CliError> {
    match &config.measure {
        Some(MeasureRef::Inline(spec)) => {
            Measure::from_spec(spec).map_err(|e| CliError::Config(e.to_string()))
        }
        Some(MeasureRef::Path(p)) => Err(CliError::Config(format!(
            "unresolved measure path {}",
            p.display()
        ))),
        None => Err(CliError::Config("no measure given".into())),
    }
}

/// The parts of the config a subcommand reads, embedded in every report.
fn embedded(command: Command, config: &RunConfig) -> Value {
    let section = match command {
        Command::WienerScan => ("wiener", json!(config.wiener)),
        Command::MsetLimit => ("mset", json!(config.mset)),
        Command::Corrector => ("corrector", json!(config.corrector)),
        Command::Claim => ("claim", json!(config.claim)),
        Command::Demo => ("demo", json!(config.demo)),
    };
    let mut doc = json!({
        "subcommand": command.name(),
        "measure": config.measure,
        "plot": config.plot,
    });
    doc[section.0] = section.1;
    doc
}

pub fn run(command: Command, config: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut reports = Reports::new(out, embedded(command, config))?;
    let verdict = match command {
        Command::WienerScan => wiener_scan(config, &mut reports),
        Command::MsetLimit => mset_limit(config, &mut reports),
        Command::Corrector => corrector(config, &mut reports),
        Command::Claim => claim(config, &mut reports),
        Command::Demo => demo(config, &mut reports),
    };
    verdict.map(|()| reports.written)
}

fn wiener_scan(config: &RunConfig, reports: &mut Reports) -> Result<(), CliError> {
    let cfg = &config.wiener;
    let mu = measure(config)?;
    let nu = if mu.is_probability_on_unit() {
        mu
    } else {
        mu.normalize(mu.domain())?
    };
    let mut table = CoefficientTable::new(&nu, cfg.refinement)?;
    let averages = running_wiener_averages(&mut table, cfg.k, cfg.n_max)?;
    reports.csv(
        "coefficients.csv",
        &["n", "k", "abs", "error"],
        (0..=cfg.n_max).map(|n| {
            let c = table
                .get(n as i64 * cfg.k)
                .expect("filled by the running averages");
            vec![
                n.to_string(),
                cfg.k.to_string(),
                float(c.abs()),
                float(c.error),
            ]
        }),
    )?;
    reports.csv(
        "wiener.csv",
        &["k", "N", "average"],
        averages
            .iter()
            .enumerate()
            .map(|(n, a)| vec![cfg.k.to_string(), n.to_string(), float(*a)]),
    )?;

    let atoms = nu.atomic_part();
    let lambda = if atoms.is_empty() {
        let set = build_lambda(&nu, &cfg.lambda.params())?;
        reports.csv(
            "lambda.txt",
            &["n"],
            set.members.iter().map(|n| vec![n.to_string()]),
        )?;
        Some(set)
    } else {
        None
    };
    if config.plot {
        reports.svg(
            "wiener.svg",
            &LinePlot {
                title: "Cesàro average of |ν̂(nk)|²",
                x_label: "N",
                y_label: "average",
                points: averages
                    .iter()
                    .enumerate()
                    .map(|(n, &a)| (n as f64, a))
                    .collect(),
                reference: Some(atoms.iter().map(|a| a.mass * a.mass).sum()),
            },
        )?;
    }
    reports.json(
        "wiener.json",
        &json!({
            "k": cfg.k,
            "n_max": cfg.n_max,
            "final_average": averages.last(),
            "atom_square_sum": atoms.iter().map(|a| a.mass * a.mass).sum::<f64>(),
            "atoms": atoms.len(),
            "lambda": lambda.as_ref().map(|s| json!({
                "count": s.members.len(),
                "horizon": s.horizon,
                "step": s.step,
                "density": s.density,
                "relative_density": s.relative_density(),
                "provenance": s.provenance,
                "warning": s.warning,
            })),
        }),
    )
}

fn mset_limit(config: &RunConfig, reports: &mut Reports) -> Result<(), CliError> {
    let cfg = &config.mset;
    let mu = measure(config)?;
    let interval = Interval::new(cfg.interval[0], cfg.interval[1])?;
    let lambda = build_lambda(&mu.normalize(interval)?, &cfg.lambda.params())?;
    let table = proposition_scan(&mu, interval, cfg.sigma, cfg.tau, &lambda)?;
    reports.csv(
        "mset_limit.csv",
        &["n", "mass", "error"],
        table
            .rows
            .iter()
            .map(|r| vec![r.n.to_string(), float(r.mass), float(r.error)]),
    )?;
    if config.plot {
        reports.svg(
            "mset_limit.svg",
            &LinePlot {
                title: "|μ(A_n) − τμ(I)| along Λ̃",
                x_label: "n",
                y_label: "error",
                points: table.rows.iter().map(|r| (r.n as f64, r.error)).collect(),
                reference: Some(0.0),
            },
        )?;
    }
    reports.json(
        "mset_limit.json",
        &json!({
            "target": table.target,
            "tail_sup": table.tail_sup,
            "strict": table.strict,
            "members": lambda.members.len(),
            "density": lambda.density,
            "relative_density": lambda.relative_density(),
            "warning": lambda.warning,
        }),
    )
}

#[derive(Serialize)]
struct KernelSummary {
    sup: f64,
    j_at_sup: u32,
    x_at_sup: f64,
    b_hat: Option<f64>,
}

fn corrector(config: &RunConfig, reports: &mut Reports) -> Result<(), CliError> {
    let cfg = &config.corrector;
    let r = match cfg.r {
        Some(r) => r,
        None => choose_r(cfg.c, cfg.d, cfg.gamma, cfg.eps, cfg.nu)?,
    };
    let params = CorrectorParams::new(cfg.c, cfg.d, cfg.gamma, cfg.eps, cfg.nu, r)?;
    let lay = layout(&params)?;
    let psi = build_psi(&lay, cfg.gamma);
    let checks = check_properties(&lay, &psi, cfg.gamma, cfg.eps, cfg.samples);
    reports.json("layout.json", &json!({ "params": params, "layout": lay }))?;
    reports.csv(
        "psi.csv",
        &["t", "psi"],
        psi.breakpoints()
            .iter()
            .zip(psi.values())
            .map(|(t, v)| vec![float(*t), float(*v)]),
    )?;
    let kernel = if cfg.kernel.j_max > 0 {
        let sweep = kernel_sup(&psi, cfg.nu, cfg.gamma, cfg.kernel.j_max, cfg.kernel.x_grid)?;
        reports.csv(
            "kernel.csv",
            &["j", "x", "integral", "bound_ratio"],
            sweep.rows.iter().map(|r| {
                vec![
                    r.j.to_string(),
                    float(r.x),
                    float(r.integral),
                    opt_float(r.bound_ratio),
                ]
            }),
        )?;
        Some(KernelSummary {
            sup: sweep.sup,
            j_at_sup: sweep.j_at_sup,
            x_at_sup: sweep.x_at_sup,
            b_hat: sweep.b_hat,
        })
    } else {
        None
    };
    if config.plot {
        reports.svg(
            "psi.svg",
            &LinePlot {
                title: "corrector ψ",
                x_label: "t",
                y_label: "ψ",
                points: psi
                    .breakpoints()
                    .iter()
                    .copied()
                    .zip(psi.values().iter().copied())
                    .collect(),
                reference: Some(cfg.gamma),
            },
        )?;
    }
    reports.json(
        "checks.json",
        &json!({
            "r": r,
            "q": lay.q,
            "removed": lay.removed.len(),
            "e_lebesgue": lay.e_lebesgue(),
            "e_lebesgue_bound": (cfg.d - cfg.c) * (1.0 - 5.0 / cfg.nu as f64),
            "checks": checks,
            "all": checks.all(),
            "kernel": kernel,
        }),
    )?;
    if checks.all() {
        Ok(())
    } else {
        Err(CliError::Uncertified(format!(
            "corrector property checks failed: {checks:?}"
        )))
    }
}

fn step_function(values: &[f64], breakpoints: Option<&Vec<f64>>) -> Result<StepFunction, CliError> {
    Ok(match breakpoints {
        Some(b) => StepFunction::new(b.clone(), values.to_vec())?,
        None => StepFunction::equal_cells(values.to_vec())?,
    })
}

fn e_csv(reports: &mut Reports, pieces: &[Interval]) -> Result<(), CliError> {
    reports.csv(
        "E.csv",
        &["lo", "hi"],
        pieces.iter().map(|p| vec![float(p.lo), float(p.hi)]),
    )
}

fn claim(config: &RunConfig, reports: &mut Reports) -> Result<(), CliError> {
    let cfg = &config.claim;
    let mu = measure(config)?;
    let phi = step_function(&cfg.phi.values, cfg.phi.breakpoints.as_ref())?;
    let result = claim_run(
        &phi,
        &mu,
        &ClaimParams {
            nu: cfg.nu,
            eps: cfg.eps.clone(),
            limits: cfg.limits,
        },
    )?;
    reports.json("claim.json", &result)?;
    e_csv(reports, &result.e_intervals())?;
    if result.certified {
        Ok(())
    } else {
        Err(CliError::Uncertified(format!(
            "μ(E) = {} below (1 − 7/ν)μ([0, 2π]) = {} or a property check failed",
            result.mu_e, result.bound
        )))
    }
}

fn demo(config: &RunConfig, reports: &mut Reports) -> Result<(), CliError> {
    let cfg = &config.demo;
    let mu = measure(config)?;
    let eps = match cfg.eps {
        Some(e) => e,
        None => cfg.eps_fraction * mu.interval_mass(0.0, TWO_PI)?,
    };
    let params = DemoParams {
        eps,
        uniform_gap: cfg.uniform_gap,
        limits: cfg.limits,
        rho_cap: cfg.rho_cap,
        gap_samples: cfg.gap_samples,
    };
    let f = |x: f64| cfg.function.eval(x);
    let result = theorem_demo(&f, &mu, &params)?;
    let sums = partial_sum_diagnostics(&result.g, &cfg.partial_sums.n, cfg.partial_sums.grid)?;

    reports.csv(
        "g.csv",
        &["t", "g"],
        result
            .g
            .breakpoints()
            .iter()
            .zip(result.g.values())
            .map(|(t, v)| vec![float(*t), float(*v)]),
    )?;
    e_csv(reports, &result.claim.e_intervals())?;
    reports.csv(
        "partial_sums.csv",
        &["N", "sup_error"],
        sums.iter()
            .map(|r| vec![r.n.to_string(), float(r.sup_error)]),
    )?;
    if config.plot {
        reports.svg(
            "g.svg",
            &LinePlot {
                title: "g",
                x_label: "t",
                y_label: "g",
                points: result
                    .g
                    .breakpoints()
                    .iter()
                    .copied()
                    .zip(result.g.values().iter().copied())
                    .collect(),
                reference: None,
            },
        )?;
        reports.svg(
            "partial_sums.svg",
            &LinePlot {
                title: "sup |S_N g − g|",
                x_label: "N",
                y_label: "sup error",
                points: sums.iter().map(|r| (r.n as f64, r.sup_error)).collect(),
                reference: Some(0.0),
            },
        )?;
    }
    let monotone = sums.windows(2).all(|w| w[1].sup_error <= w[0].sup_error);
    reports.json(
        "demo.json",
        &json!({
            "nu": result.nu,
            "rho": result.rho,
            "eps": result.eps,
            "mu_total": result.mu_total,
            "exceptional_mass": result.exceptional_mass,
            "below_eps": result.exceptional_mass < result.eps,
            "phi_gap": result.phi_gap,
            "uniform_gap": result.uniform_gap,
            "g_continuous": result.g_continuous,
            "g_breakpoints": result.g.breakpoints().len(),
            "sup_f_minus_g_on_E": result.sup_f_minus_g_on_e,
            "partial_sums": sums,
            "partial_sums_monotone": monotone,
            "partial_sums_order": observed_order(&sums),
            "claim": result.claim,
        }),
    )?;
    if result.exceptional_mass < result.eps {
        Ok(())
    } else {
        Err(CliError::Uncertified(format!(
            "exceptional mass {} not below {}",
            result.exceptional_mass, result.eps
        )))
    }
}
