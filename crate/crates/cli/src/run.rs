//! Subcommand implementations. All numerics come from `corrmax-core`; this
//! layer only parses arguments, loads files, and renders reports.

use std::path::Path;

use corrmax_core::bounds::{werner_exact, BoundParams, BoundRegistry};
use corrmax_core::fano::OutcomeCount;
use corrmax_core::files;
use corrmax_core::measurement::MaximalPOM;
use corrmax_core::optimizer::{
    discrimination_check, extremality_residual, optimize_coincidence, second_order_classify,
    mirror_family_curve, OptimizeOptions, OptimizerError,
};
use corrmax_core::scan::{run_scan, summarize, ScanConfig};
use corrmax_core::state::{named_state, NamedStateSpec};
use corrmax_core::measurement::naimark_extend;

use crate::reports::{CheckReport, SolveReport};
use crate::{BoundArgs, CheckArgs, ConvertArgs, DemoArgs, DemoCommand, ScanArgs, SolveArgs};

pub enum CliError {
    /// Bad input: exit code 2.
    Validation(String),
    /// Failure while producing output: exit code 3.
    Runtime(String),
}

fn validation<E: std::fmt::Display>(err: E) -> CliError {
    CliError::Validation(err.to_string())
}

fn runtime<E: std::fmt::Display>(err: E) -> CliError {
    CliError::Runtime(err.to_string())
}

fn seed_or_env(cli: Option<u64>) -> u64 {
    cli.or_else(|| {
        std::env::var("CORRMAX_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

fn read_state(path: &Path) -> Result<corrmax_core::DensityOperator, CliError> {
    files::read_state(path).map_err(validation)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(runtime)?;
    println!("{text}");
    Ok(())
}

pub fn solve(args: SolveArgs, json: bool) -> Result<(), CliError> {
    let rho = read_state(&args.state)?;
    let defaults = OptimizeOptions::default();
    let options = OptimizeOptions {
        restarts: args.restarts.unwrap_or(defaults.restarts),
        seed: seed_or_env(args.seed),
        max_iters: args.max_iters.unwrap_or(defaults.max_iters),
        tol: args.tol.unwrap_or(defaults.tol),
        ..defaults
    };
    let result = optimize_coincidence(&rho, args.n, &options).map_err(|e| match e {
        OptimizerError::ExtensionTooSmall { .. } => validation(e),
        other => runtime(other),
    })?;
    if let Some(path) = &args.out_pom_a {
        files::write_pom(path, &result.pom_a).map_err(runtime)?;
    }
    if let Some(path) = &args.out_pom_b {
        files::write_pom(path, &result.pom_b).map_err(runtime)?;
    }
    let report = SolveReport {
        n: result.n,
        coincidence: result.coincidence,
        gradient_norm: result.gradient_norm,
        extremality_residual: result.extremality_residual,
        trace_v: result.multipliers.trace_v,
        trace_w: result.multipliers.trace_w,
        discrimination_a: result.discrimination_a,
        discrimination_b: result.discrimination_b,
        corollary_local_max: result.corollary_local_max,
        classification: result.classification.to_string(),
        hessian_min: result.hessian_min,
        hessian_max: result.hessian_max,
        converged: result.converged,
        restarts: result.restarts.runs,
        converged_restarts: result.restarts.converged_runs,
    };
    if json {
        print_json(&report)
    } else {
        print!("{}", report.render());
        Ok(())
    }
}

fn parse_outcome_count(raw: &Option<String>) -> Result<Option<OutcomeCount>, CliError> {
    match raw {
        None => Ok(None),
        Some(text) => text
            .parse::<OutcomeCount>()
            .map(Some)
            .map_err(CliError::Validation),
    }
}

pub fn bound(args: BoundArgs, json: bool) -> Result<(), CliError> {
    let registry = BoundRegistry::standard();
    if args.list {
        for strategy in registry.strategies() {
            println!("{:<12} {}", strategy.name(), strategy.description());
        }
        return Ok(());
    }
    if let Some(family) = &args.sweep {
        return bound_sweep(&registry, &args, family);
    }
    let state_path = args
        .state
        .as_ref()
        .ok_or_else(|| CliError::Validation("--state is required (or use --list/--sweep)".into()))?;
    let rho = read_state(state_path)?;
    let params = BoundParams {
        n: parse_outcome_count(&args.n)?,
    };
    let kinds: Vec<String> = match &args.kind {
        Some(kind) => vec![kind.clone()],
        None => registry.names().iter().map(|s| s.to_string()).collect(),
    };
    let mut reports = Vec::new();
    for kind in &kinds {
        match registry.evaluate(kind, &rho, &params) {
            Ok(report) => reports.push(report),
            Err(err) => {
                // When running the whole registry, skip bounds that do not
                // apply to this state; a named request still fails loudly.
                if args.kind.is_some() {
                    return Err(validation(err));
                }
            }
        }
    }
    if args.dump_matrix.is_some() || args.dump_singular.is_some() {
        let kind = args.kind.as_deref().ok_or_else(|| {
            CliError::Validation("--dump-matrix/--dump-singular require --kind".into())
        })?;
        dump_bound_matrix(&rho, kind, &params, &args.dump_matrix, &args.dump_singular)?;
    }
    if json {
        print_json(&reports)
    } else {
        for report in &reports {
            println!("{:<12} {:.12}", report.kind, report.value);
            if let (Some(a), Some(b)) = (
                report.certificate.direction_a,
                report.certificate.direction_b,
            ) {
                println!(
                    "{:<12} a = [{:+.6}, {:+.6}, {:+.6}]  b = [{:+.6}, {:+.6}, {:+.6}]",
                    "", a[0], a[1], a[2], b[0], b[1], b[2]
                );
            }
            if !report.certificate.singular_values.is_empty() {
                let values: Vec<String> = report
                    .certificate
                    .singular_values
                    .iter()
                    .map(|s| format!("{s:.9}"))
                    .collect();
                println!("{:<12} singular values: [{}]", "", values.join(", "));
            }
        }
        Ok(())
    }
}

fn dump_bound_matrix(
    rho: &corrmax_core::DensityOperator,
    kind: &str,
    params: &BoundParams,
    matrix_path: &Option<std::path::PathBuf>,
    singular_path: &Option<std::path::PathBuf>,
) -> Result<(), CliError> {
    use corrmax_core::fano::{augmented_t, spin_matrices, svd_real};
    let d = rho.d1().max(rho.d2());
    let matrix = match kind {
        "two-qubit" => spin_matrices(rho).map_err(validation)?.s,
        "covariance" => spin_matrices(rho).map_err(validation)?.s_bar,
        "theorem" => {
            let n = params
                .n
                .ok_or_else(|| CliError::Validation("theorem dump requires --n".into()))?;
            augmented_t(rho, n).map_err(validation)?.matrix
        }
        "orthogonal" => {
            augmented_t(rho, OutcomeCount::Finite(d))
                .map_err(validation)?
                .t_tilde
        }
        "cross-norm" => {
            augmented_t(rho, OutcomeCount::Infinite)
                .map_err(validation)?
                .matrix
        }
        other => {
            return Err(CliError::Validation(format!(
                "no matrix dump for bound kind '{other}'"
            )))
        }
    };
    if let Some(path) = matrix_path {
        files::write_matrix_csv(path, &matrix).map_err(runtime)?;
    }
    if let Some(path) = singular_path {
        let values: Vec<f64> = svd_real(&matrix).singular_values.iter().copied().collect();
        files::write_vector_csv(path, &values).map_err(runtime)?;
    }
    Ok(())
}

fn bound_sweep(
    registry: &BoundRegistry,
    args: &BoundArgs,
    family: &str,
) -> Result<(), CliError> {
    let kind = args
        .kind
        .clone()
        .unwrap_or_else(|| "two-qubit".to_string());
    let params = BoundParams {
        n: parse_outcome_count(&args.n)?,
    };
    if args.points < 2 {
        return Err(CliError::Validation("--points must be >= 2".into()));
    }
    let mut series = Vec::with_capacity(args.points);
    for i in 0..args.points {
        let t = i as f64 / (args.points - 1) as f64;
        let (x, rho) = match family {
            "isotropic" => {
                let w = t;
                (w, named_state(&NamedStateSpec::Isotropic { w }).map_err(validation)?)
            }
            "werner" => {
                let x = -1.0 + 2.0 * t;
                (
                    x,
                    named_state(&NamedStateSpec::Werner { d: args.d, x }).map_err(validation)?,
                )
            }
            other => {
                return Err(CliError::Validation(format!(
                    "unknown sweep family '{other}' (expected isotropic or werner)"
                )))
            }
        };
        let report = registry.evaluate(&kind, &rho, &params).map_err(validation)?;
        series.push((x, report.value));
    }
    match &args.csv {
        Some(path) => files::write_series_csv(path, &series).map_err(runtime)?,
        None => {
            println!("x,value");
            for (x, value) in &series {
                println!("{x},{value}");
            }
        }
    }
    Ok(())
}

pub fn check(args: CheckArgs, json: bool) -> Result<(), CliError> {
    let rho = read_state(&args.state)?;
    let pom_a = files::read_pom(&args.pom_a).map_err(validation)?;
    let pom_b = files::read_pom(&args.pom_b).map_err(validation)?;
    let n = pom_a.n_outcomes().max(pom_b.n_outcomes());
    let pom_a = pom_a.padded(n);
    let pom_b = pom_b.padded(n);
    if pom_a.dim() != rho.d1() || pom_b.dim() != rho.d2() {
        return Err(CliError::Validation(format!(
            "POM dims ({}, {}) do not match state dims ({}, {})",
            pom_a.dim(),
            pom_b.dim(),
            rho.d1(),
            rho.d2()
        )));
    }
    let c = corrmax_core::measurement::coincidence(&rho, &pom_a, &pom_b).map_err(validation)?;
    let (residual, multipliers) = extremality_residual(&rho, &pom_a, &pom_b).map_err(validation)?;
    let discrimination = discrimination_check(&rho, &pom_a, &pom_b).map_err(runtime)?;
    let frame_a = naimark_extend(&pom_a, n).map_err(validation)?;
    let frame_b = naimark_extend(&pom_b, n).map_err(validation)?;
    let (classification, hessian_min, hessian_max) =
        match second_order_classify(&rho, &frame_a, &frame_b, 6) {
            Ok(so) => (
                so.classification.to_string(),
                Some(so.min_eigenvalue),
                Some(so.max_eigenvalue),
            ),
            Err(OptimizerError::NotExtremal { .. }) => ("not_extremal".to_string(), None, None),
            Err(OptimizerError::ProbeSpaceTooLarge { .. }) => {
                ("indeterminate".to_string(), None, None)
            }
            Err(other) => return Err(runtime(other)),
        };
    let report = CheckReport {
        coincidence: c,
        extremality_residual: residual,
        extremal: residual <= 1e-8,
        trace_v: multipliers.trace_v,
        trace_w: multipliers.trace_w,
        discrimination_a: discrimination.side_a.optimal,
        discrimination_b: discrimination.side_b.optimal,
        classification,
        hessian_min,
        hessian_max,
    };
    if json {
        print_json(&report)
    } else {
        print!("{}", report.render());
        Ok(())
    }
}

pub fn scan(args: ScanArgs, json: bool) -> Result<(), CliError> {
    if args.summarize {
        let summary = summarize(&args.out).map_err(validation)?;
        return print_summary(&summary, json);
    }
    let dims = parse_dims(&args.dims)?;
    let mut config = ScanConfig::new(dims, args.count, seed_or_env(args.seed), args.out.clone());
    if !args.ns.is_empty() {
        config.ns = args
            .ns
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Validation(format!("bad outcome count '{s}'")))
            })
            .collect::<Result<_, _>>()?;
    }
    if let Some(rank) = args.rank {
        config.rank = rank;
    }
    config.resume = args.resume;
    config.optimizer = OptimizeOptions {
        restarts: args.restarts,
        seed: 0,
        max_iters: args.max_iters,
        tol: args.tol,
        ..OptimizeOptions::default()
    };
    config.validate().map_err(validation)?;
    let summary = run_scan(&config).map_err(|e| match e {
        corrmax_core::scan::ScanError::Io(io) => runtime(io),
        other => validation(other),
    })?;
    print_summary(&summary, json)
}

fn print_summary(summary: &corrmax_core::scan::ScanSummary, json: bool) -> Result<(), CliError> {
    if json {
        print_json(summary)
    } else {
        println!("records          = {}", summary.count);
        println!(
            "converged        = {} ({} unconverged)",
            summary.converged_count, summary.unconverged_count
        );
        println!("max gap          = {:.3e}", summary.max_gap);
        println!("mean gap         = {:.3e}", summary.mean_gap);
        println!(
            "violations > {:.0e} = {}",
            summary.threshold, summary.violation_count
        );
        println!("seed             = {}", summary.seed);
        println!("config hash      = {}", summary.config_hash);
        Ok(())
    }
}

fn parse_dims(raw: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Validation(format!(
            "bad --dims '{raw}', expected 'd1,d2'"
        )));
    }
    let d1 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("bad dimension '{}'", parts[0])))?;
    let d2 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("bad dimension '{}'", parts[1])))?;
    Ok((d1, d2))
}

pub fn demo(args: DemoArgs, json: bool) -> Result<(), CliError> {
    match args.which {
        DemoCommand::Trine => {
            let rho = named_state(&NamedStateSpec::TrineDemo).map_err(runtime)?;
            let trine = MaximalPOM::trine();
            let c = corrmax_core::measurement::coincidence(&rho, &trine, &trine)
                .map_err(runtime)?;
            let (residual, _) = extremality_residual(&rho, &trine, &trine).map_err(runtime)?;
            let discrimination = discrimination_check(&rho, &trine, &trine).map_err(runtime)?;
            let frame = naimark_extend(&trine, 3).map_err(runtime)?;
            let so = second_order_classify(&rho, &frame, &frame, 6).map_err(runtime)?;
            let report = CheckReport {
                coincidence: c,
                extremality_residual: residual,
                extremal: residual <= 1e-8,
                trace_v: 2.0 / 3.0,
                trace_w: 2.0 / 3.0,
                discrimination_a: discrimination.side_a.optimal,
                discrimination_b: discrimination.side_b.optimal,
                classification: so.classification.to_string(),
                hessian_min: Some(so.min_eigenvalue),
                hessian_max: Some(so.max_eigenvalue),
            };
            if json {
                print_json(&report)
            } else {
                print!("{}", report.render());
                Ok(())
            }
        }
        DemoCommand::Mirror { points, out } => {
            if points < 2 {
                return Err(CliError::Validation("--points must be >= 2".into()));
            }
            let alphas: Vec<f64> = (0..points)
                .map(|i| i as f64 / (points - 1) as f64)
                .collect();
            let curve = mirror_family_curve(&alphas).map_err(runtime)?;
            files::write_series_csv(&out, &curve).map_err(runtime)?;
            let (min_alpha, min_c) = curve
                .iter()
                .copied()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty grid");
            println!(
                "wrote {} points to {}; minimum C = {:.9} at alpha = {:.6}",
                curve.len(),
                out.display(),
                min_c,
                min_alpha
            );
            Ok(())
        }
        DemoCommand::Isotropic { csv } => {
            let registry = BoundRegistry::standard();
            let mut series = Vec::new();
            for i in 0..=10 {
                let w = i as f64 / 10.0;
                let rho = named_state(&NamedStateSpec::Isotropic { w }).map_err(runtime)?;
                let report = registry
                    .evaluate("two-qubit", &rho, &BoundParams::default())
                    .map_err(runtime)?;
                series.push((w, report.value));
            }
            match csv {
                Some(path) => {
                    files::write_series_csv(&path, &series).map_err(runtime)?;
                    println!("wrote {} points to {}", series.len(), path.display());
                }
                None => {
                    println!("w,value");
                    for (w, value) in &series {
                        println!("{w},{value}");
                    }
                }
            }
            Ok(())
        }
        DemoCommand::Werner { d } => {
            let registry = BoundRegistry::standard();
            println!("x,exact,theorem_n{d},cross_norm");
            for i in 0..=8 {
                let x = -1.0 + i as f64 / 4.0;
                let rho = named_state(&NamedStateSpec::Werner { d, x }).map_err(validation)?;
                let exact = werner_exact(d, x).map_err(runtime)?;
                let theorem = registry
                    .evaluate(
                        "theorem",
                        &rho,
                        &BoundParams {
                            n: Some(OutcomeCount::Finite(d)),
                        },
                    )
                    .map_err(runtime)?;
                let cross = registry
                    .evaluate("cross-norm", &rho, &BoundParams::default())
                    .map_err(runtime)?;
                println!(
                    "{:+.2},{:.9},{:.9},{:.9}",
                    x, exact, theorem.value, cross.value
                );
            }
            Ok(())
        }
    }
}

pub fn convert(args: ConvertArgs) -> Result<(), CliError> {
    match args.kind.as_str() {
        "state" => {
            let rho = files::read_state(&args.input).map_err(validation)?;
            files::write_state(&args.output, &rho).map_err(runtime)?;
            Ok(())
        }
        "pom" => {
            let pom = files::read_pom(&args.input).map_err(validation)?;
            files::write_pom(&args.output, &pom).map_err(runtime)?;
            Ok(())
        }
        other => Err(CliError::Validation(format!(
            "unknown convert kind '{other}' (expected state or pom)"
        ))),
    }
}
