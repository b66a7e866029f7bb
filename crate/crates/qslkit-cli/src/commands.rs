//! Subcommand implementations.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::json;

use qslkit::bounds::{amplitude, bound_ratio, excess, qsl_report, rank_states, ExtReal};
use qslkit::dynamics::{default_step, escape_time, evolve};
use qslkit::engineering::{solve_optimal, EngineeringProblem};
use qslkit::io::{self, format_g7, LoadedModel};
use qslkit::matrix::ComplexMatrix;
use qslkit::scenarios::{
    bell_scenarios, ensemble_scenarios, qutrit_ladder, two_level_decay, two_level_dephasing,
    BellState, Scenario,
};
use qslkit::states::PureState;
use qslkit::{Error, Result};

use crate::util::{fmt_ext_csv, fmt_ext_human, parallel_map, parse_range};

fn resolve_lambda(flag: Option<f64>, loaded: &LoadedModel) -> Result<f64> {
    flag.or(loaded.lambda).ok_or_else(|| {
        Error::InvalidArgument("no lambda given (pass --lambda or set it in the model file)".into())
    })
}

fn model_summary(loaded: &LoadedModel) -> String {
    format!(
        "model: {} (dim {}, {} Hamiltonian(s), {} channel(s))",
        loaded.name.as_deref().unwrap_or("unnamed"),
        loaded.model.dim(),
        loaded.model.hamiltonians().len(),
        loaded.model.channels().len()
    )
}

pub fn cmd_qsl(
    model_path: &Path,
    lambda: Option<f64>,
    theta: Option<f64>,
    json_mode: bool,
    out: Option<&PathBuf>,
) -> Result<()> {
    let loaded = io::load_model(model_path)?;
    let lambda = match theta {
        Some(theta) => qslkit::bounds::lambda_from_theta(theta)?,
        None => resolve_lambda(lambda, &loaded)?,
    };
    let report = qsl_report(&loaded.model, &loaded.psi0, lambda)?;
    if let Some(path) = out {
        io::write_report(&report, path)?;
    }
    if json_mode {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    println!("{}", model_summary(&loaded));
    println!("lambda  = {}", format_g7(report.lambda));
    println!("theta_T = {}", format_g7(report.theta_t));
    println!("A       = {}", format_g7(report.amplitude));
    println!("E       = {}", format_g7(report.excess));
    println!("k       = {}", format_g7(report.k));
    println!("T*      = {}", fmt_ext_human(&report.t_star));
    println!("T_DC    = {}", fmt_ext_human(&report.t_dc));
    println!("T*/T_DC = {}", format_g7(report.ratio));
    if report.stationary {
        println!("flags   = stationary (initial state does not evolve)");
    } else if report.closed_system {
        println!("flags   = closed-system (no channel excess)");
    }
    Ok(())
}

pub fn cmd_simulate(
    model_path: &Path,
    t_max: f64,
    step: Option<f64>,
    out: &Path,
) -> Result<()> {
    let loaded = io::load_model(model_path)?;
    let h = step.unwrap_or_else(|| default_step(&loaded.model));
    let trajectory = evolve(&loaded.model, &loaded.psi0, t_max, h)?;
    let rows = trajectory
        .times
        .iter()
        .zip(&trajectory.overlaps)
        .map(|(t, c)| vec![format_g7(*t), format_g7(*c)]);
    io::write_csv(out, &["time", "overlap"], rows)?;
    println!(
        "wrote {} samples (step {}) to {}",
        trajectory.times.len(),
        format_g7(h),
        out.display()
    );
    Ok(())
}

pub fn cmd_escape(
    model_path: &Path,
    lambda: Option<f64>,
    t_max: Option<f64>,
    step: Option<f64>,
    json_mode: bool,
) -> Result<()> {
    let loaded = io::load_model(model_path)?;
    let lambda = resolve_lambda(lambda, &loaded)?;
    let t_max = t_max.unwrap_or_else(|| {
        loaded
            .model
            .min_channel_rate()
            .map(|rate| 10.0 / rate)
            .unwrap_or(10.0)
    });
    let h = step.unwrap_or_else(|| default_step(&loaded.model));
    let result = escape_time(&loaded.model, &loaded.psi0, lambda, t_max, h)?;
    let report = qsl_report(&loaded.model, &loaded.psi0, lambda)?;
    let bound_ok = match (result.escaped, &report.t_star) {
        (true, ExtReal::Finite(ts)) => result.time >= ts - 1e-6,
        _ => true,
    };
    if json_mode {
        let value = json!({
            "escaped": result.escaped,
            "time": if result.escaped { Some(result.time) } else { None },
            "lambda": lambda,
            "t_max": t_max,
            "t_star": report.t_star,
            "bound_satisfied": bound_ok,
        });
        println!("{}", serde_json::to_string_pretty(&value)?);
    } else {
        println!("{}", model_summary(&loaded));
        if result.escaped {
            println!("T  = {}", format_g7(result.time));
        } else {
            println!("not escaped within tmax = {}", format_g7(t_max));
        }
        println!("T* = {}", fmt_ext_human(&report.t_star));
    }
    if !bound_ok {
        eprintln!(
            "warning: escape time fell below T*; this indicates integrator misuse \
             (step too large for the model scale)"
        );
    }
    Ok(())
}

pub fn cmd_rank(
    model_path: &Path,
    states_path: &Path,
    lambda: Option<f64>,
    json_mode: bool,
) -> Result<()> {
    let loaded = io::load_model(model_path)?;
    let lambda = resolve_lambda(lambda, &loaded)?;
    let states = io::load_states(states_path)?;
    let pure: Vec<PureState> = states.iter().map(|(_, s)| s.clone()).collect();
    let ranked = rank_states(&loaded.model, &pure, lambda)?;
    if json_mode {
        let entries: Vec<serde_json::Value> = ranked
            .iter()
            .enumerate()
            .map(|(pos, (idx, ts))| {
                json!({"rank": pos + 1, "state": states[*idx].0, "t_star": ts})
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&entries)?);
        return Ok(());
    }
    println!("{}", model_summary(&loaded));
    println!("rank  state             T*");
    for (pos, (idx, ts)) in ranked.iter().enumerate() {
        println!("{:<5} {:<17} {}", pos + 1, states[*idx].0, fmt_ext_human(ts));
    }
    Ok(())
}

pub fn cmd_optimize(model_path: &Path, json_mode: bool, out: Option<&PathBuf>) -> Result<()> {
    let loaded = io::load_model(model_path)?;
    let problem = EngineeringProblem::new(loaded.psi0.clone(), loaded.model.channels().to_vec())?;
    let solution = solve_optimal(&problem)?;
    let amplitude_before = amplitude(&loaded.model, &loaded.psi0)?;
    let optimized = loaded
        .model
        .with_hamiltonians(vec![solution.h_opt.clone()])?;
    let amplitude_after = amplitude(&optimized, &loaded.psi0)?;

    if let Some(path) = out {
        io::write_report(&solution, path)?;
    }
    if json_mode {
        let mut value = serde_json::to_value(&solution)?;
        let object = value.as_object_mut().expect("solution serializes to an object");
        object.insert("amplitude_before".into(), json!(amplitude_before));
        object.insert("amplitude_after".into(), json!(amplitude_after));
        object.insert("nullspace_dim".into(), json!(solution.nullspace.len()));
        println!("{}", serde_json::to_string_pretty(&value)?);
        return Ok(());
    }
    println!("{}", model_summary(&loaded));
    println!("coefficients over the traceless Hermitian basis:");
    for (i, u) in solution.u.iter().enumerate() {
        println!("  u{} = {}", i + 1, format_g7(*u));
    }
    println!("H_opt:");
    print_matrix(&solution.h_opt);
    println!("nullspace dimension = {}", solution.nullspace.len());
    println!("F(H_opt)  = {}", format_g7(solution.cost_value));
    println!("residual  = {:.3e}", solution.residual_norm);
    println!("A before  = {}", format_g7(amplitude_before));
    println!("A with H_opt = {}", format_g7(amplitude_after));
    Ok(())
}

fn print_matrix(m: &ComplexMatrix) {
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|j| {
                let z = m[(i, j)];
                format!("{}{}{}i", format_g7(z.re), if z.im < 0.0 { "-" } else { "+" }, format_g7(z.im.abs()))
            })
            .collect();
        println!("  [{}]", row.join(", "));
    }
}

pub fn cmd_ratio_grid(kmax: f64, lmax: f64, n: usize, out: &Path) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument("grid needs at least one point".into()));
    }
    if !(kmax >= 0.0 && kmax <= std::f64::consts::FRAC_1_SQRT_2 + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "kmax must lie in [0, 1/sqrt(2)], got {kmax}"
        )));
    }
    if !(lmax > 0.0 && lmax <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "lmax must lie in (0, 1], got {lmax}"
        )));
    }
    // k spans [0, kmax] inclusive; lambda spans (0, lmax] excluding 0.
    let mut points = Vec::with_capacity(n * n);
    for i in 0..n {
        let k = if n == 1 { kmax } else { kmax * i as f64 / (n - 1) as f64 };
        for j in 1..=n {
            let lambda = lmax * j as f64 / n as f64;
            points.push((k, lambda));
        }
    }
    let values = parallel_map(&points, |&(k, lambda)| bound_ratio(k, lambda));
    let mut rows = Vec::with_capacity(points.len());
    for ((k, lambda), value) in points.iter().zip(values) {
        rows.push(vec![format_g7(*k), format_g7(*lambda), format_g7(value?)]);
    }
    io::write_csv(out, &["k", "lambda", "ratio"], rows)?;
    println!("wrote {} grid cells to {}", n * n, out.display());
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanParam {
    Theta,
    Gamma,
    Lambda,
}

pub fn cmd_scan(
    model_path: &Path,
    param: ScanParam,
    range: &str,
    lambda: Option<f64>,
    out: &Path,
) -> Result<()> {
    let loaded = io::load_model(model_path)?;
    let grid = parse_range(range)?;
    let header = match param {
        ScanParam::Theta => "theta",
        ScanParam::Gamma => "gamma",
        ScanParam::Lambda => "lambda",
    };

    let reports = match param {
        ScanParam::Lambda => parallel_map(&grid, |&l| {
            qsl_report(&loaded.model, &loaded.psi0, l)
        }),
        ScanParam::Gamma => {
            let lambda = resolve_lambda(lambda, &loaded)?;
            parallel_map(&grid, |&gamma| {
                if gamma < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "gamma must be nonnegative, got {gamma}"
                    )));
                }
                let model = loaded.model.with_channel_strength(gamma)?;
                qsl_report(&model, &loaded.psi0, lambda)
            })
        }
        ScanParam::Theta => {
            if loaded.model.dim() != 2 {
                return Err(Error::InvalidArgument(
                    "theta scans re-parametrize a two-level state; the model must have dim 2"
                        .into(),
                ));
            }
            let lambda = resolve_lambda(lambda, &loaded)?;
            parallel_map(&grid, |&theta| {
                let psi = PureState::try_new(vec![
                    Complex64::new(theta.cos(), 0.0),
                    Complex64::new(theta.sin(), 0.0),
                ])?;
                qsl_report(&loaded.model, &psi, lambda)
            })
        }
    };

    let mut rows = Vec::with_capacity(grid.len());
    for (x, report) in grid.iter().zip(reports) {
        let report = report?;
        rows.push(vec![
            format_g7(*x),
            fmt_ext_csv(&report.t_star),
            fmt_ext_csv(&report.t_dc),
            format_g7(report.ratio),
        ]);
    }
    io::write_csv(out, &[header, "t_star", "t_dc", "ratio"], rows)?;
    println!("wrote {} scan points to {}", grid.len(), out.display());
    Ok(())
}

pub fn cmd_ensemble_scaling(nmax: usize, gamma: f64, lambda: f64, out: &Path) -> Result<()> {
    if nmax < 1 {
        return Err(Error::InvalidArgument("nmax must be at least 1".into()));
    }
    let sizes: Vec<usize> = (1..=nmax).collect();
    let rows_result = parallel_map(&sizes, |&n| -> Result<Vec<String>> {
        let (product, ghz) = ensemble_scenarios(n, gamma)?;
        let rp = qsl_report(&product.model, &product.psi0, lambda)?;
        let rg = qsl_report(&ghz.model, &ghz.psi0, lambda)?;
        Ok(vec![
            n.to_string(),
            format_g7(rp.amplitude),
            format_g7(rp.excess),
            fmt_ext_csv(&rp.t_star),
            format_g7(rg.amplitude),
            format_g7(rg.excess),
            fmt_ext_csv(&rg.t_star),
        ])
    });
    let mut rows = Vec::with_capacity(sizes.len());
    for row in rows_result {
        rows.push(row?);
    }
    io::write_csv(
        out,
        &[
            "n",
            "amplitude_product",
            "excess_product",
            "t_star_product",
            "amplitude_ghz",
            "excess_ghz",
            "t_star_ghz",
        ],
        rows,
    )?;
    println!("wrote scaling table for N = 1..{nmax} to {}", out.display());
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ScenarioArgs {
    pub name: String,
    pub omega: f64,
    pub gamma: f64,
    pub theta: f64,
    pub phi: f64,
    pub n: usize,
    pub state: Option<String>,
    pub lambda: Option<f64>,
    pub write_model: Option<PathBuf>,
    pub json: bool,
}

const SCENARIO_NAMES: &[&str] = &[
    "two-level-dephasing",
    "two-level-decay",
    "bell-collective",
    "bell-local",
    "ensemble",
    "qutrit-ladder",
];

fn pick_bell(state: Option<&str>) -> Result<BellState> {
    match state.unwrap_or("phi+") {
        "phi+" => Ok(BellState::PhiPlus),
        "phi-" => Ok(BellState::PhiMinus),
        "psi+" => Ok(BellState::PsiPlus),
        "psi-" => Ok(BellState::PsiMinus),
        other => Err(Error::InvalidArgument(format!(
            "unknown Bell state `{other}` (phi+, phi-, psi+, psi-)"
        ))),
    }
}

pub fn cmd_scenario(args: &ScenarioArgs) -> Result<()> {
    if args.name == "list" {
        for name in SCENARIO_NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    let scenario: Scenario = match args.name.as_str() {
        "two-level-dephasing" => {
            two_level_dephasing(args.omega, args.gamma, args.theta, args.phi)?
        }
        "two-level-decay" => two_level_decay(args.omega, args.gamma)?,
        "bell-collective" | "bell-local" => {
            let collective = args.name == "bell-collective";
            let bell = pick_bell(args.state.as_deref())?;
            let index = BellState::ALL.iter().position(|b| *b == bell).unwrap();
            bell_scenarios(args.gamma, collective)?.swap_remove(index)
        }
        "ensemble" => {
            let (product, ghz) = ensemble_scenarios(args.n, args.gamma)?;
            match args.state.as_deref().unwrap_or("product") {
                "product" => product,
                "ghz" => ghz,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown ensemble state `{other}` (product, ghz)"
                    )))
                }
            }
        }
        "qutrit-ladder" => qutrit_ladder(args.gamma)?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown scenario `{other}`; try `qslkit scenario list`"
            )))
        }
    };

    let lambda = args.lambda.unwrap_or(0.1);
    let report = qsl_report(&scenario.model, &scenario.psi0, lambda)?;
    let computed_a = amplitude(&scenario.model, &scenario.psi0)?;
    let computed_e = excess(&scenario.model, &scenario.psi0)?;

    if let Some(path) = &args.write_model {
        write_scenario_model(&scenario, lambda, path)?;
    }
    if args.json {
        let reference = scenario.reference.as_ref().map(|r| {
            json!({"amplitude": r.amplitude, "excess": r.excess})
        });
        let value = json!({
            "scenario": scenario.name,
            "dim": scenario.model.dim(),
            "reference": reference,
            "report": report,
        });
        println!("{}", serde_json::to_string_pretty(&value)?);
        return Ok(());
    }
    println!("scenario: {} (dim {})", scenario.name, scenario.model.dim());
    if let Some(reference) = &scenario.reference {
        println!(
            "reference A = {}, E = {}",
            format_g7(reference.amplitude),
            format_g7(reference.excess)
        );
    }
    println!("computed  A = {}, E = {}", format_g7(computed_a), format_g7(computed_e));
    println!("lambda = {}", format_g7(lambda));
    println!("T*     = {}", fmt_ext_human(&report.t_star));
    println!("T_DC   = {}", fmt_ext_human(&report.t_dc));
    if let Some(path) = &args.write_model {
        println!("model written to {}", path.display());
    }
    Ok(())
}

fn fmt_full(x: f64) -> String {
    // Shortest representation that round-trips through f64.
    format!("{x}")
}

fn fmt_amplitude(z: &Complex64) -> String {
    if z.im == 0.0 {
        fmt_full(z.re)
    } else if z.re == 0.0 {
        format!("{}i", fmt_full(z.im))
    } else if z.im < 0.0 {
        format!("{} - {}i", fmt_full(z.re), fmt_full(-z.im))
    } else {
        format!("{} + {}i", fmt_full(z.re), fmt_full(z.im))
    }
}

fn matrix_literal(m: &ComplexMatrix) -> String {
    let pairs: Vec<String> = m
        .entries()
        .iter()
        .map(|z| format!("[{}, {}]", fmt_full(z.re), fmt_full(z.im)))
        .collect();
    format!("[{}]", pairs.join(", "))
}

/// Writes a scenario as a loadable model file (full-precision matrix
/// literals and amplitudes).
fn write_scenario_model(scenario: &Scenario, lambda: f64, path: &Path) -> Result<()> {
    let mut text = String::new();
    text.push_str(&format!("dim = {}\n", scenario.model.dim()));
    text.push_str(&format!("name = {}\n", scenario.name));
    for h in scenario.model.hamiltonians() {
        text.push_str(&format!("hamiltonian = {}\n", matrix_literal(h)));
    }
    for m in scenario.model.channels() {
        text.push_str(&format!("channel = {}\n", matrix_literal(m)));
    }
    let amps: Vec<String> = scenario
        .psi0
        .amplitudes()
        .iter()
        .map(fmt_amplitude)
        .collect();
    text.push_str(&format!("state = [{}]\n", amps.join(", ")));
    text.push_str(&format!("lambda = {}\n", fmt_full(lambda)));
    std::fs::write(path, text)?;
    Ok(())
}
