use serde::Serialize;
use serde_json::{json, Map, Value};

use cvsteer::network::{ghz_correlations, squeezing_to_db};
use cvsteer::steering::{Direction, MonogamyReport, SteeringReport};
use cvsteer::symplectic::{min_symplectic_eigenvalue, PHYSICALITY_TOL};
use cvsteer::tomography::{reconstruct_trials_with, TomographyOptions};
use cvsteer::{
    is_physical, prepare_state, purity, steering_report, sweep_eta, symplectic_eigenvalues,
    CovarianceMatrix, GhzConfig,
};

use crate::args::{parse_grid, BuildArgs, CheckArgs, Format, SweepArgs, TomoArgs};
use crate::output::{emit, resolve, sig12, sweep_csv, write_atomic, SCHEMA_VERSION};
use crate::CliError;

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn matrix_rows(cm: &CovarianceMatrix) -> Vec<Vec<f64>> {
    cm.matrix()
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect()
}

fn config_json(cfg: &GhzConfig) -> Value {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    v["squeezing_db"] = json!(squeezing_to_db(cfg.r1));
    v
}

fn labelled(values: impl Iterator<Item = (Direction, f64)>) -> Value {
    Value::Object(
        values
            .map(|(d, v)| (d.label().to_string(), json!(v)))
            .collect::<Map<_, _>>(),
    )
}

pub fn build(args: &BuildArgs) -> Result<(), CliError> {
    let cfg = args.state.config(args.eta)?;
    let cm = prepare_state(&cfg)?;
    let nus = symplectic_eigenvalues(&cm)?;
    let physical = is_physical(&cm, PHYSICALITY_TOL);
    let correlations = ghz_correlations(&cm)?;

    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let corr: Map<String, Value> = correlations
                .iter()
                .map(|(c, v)| (c.to_string(), json!(v)))
                .collect();
            to_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "command": "build",
                "config": config_json(&cfg),
                "modes": ["A'", "B", "C"],
                "covariance": matrix_rows(&cm),
                "purity": purity(&cm),
                "symplectic_eigenvalues": nus,
                "physical": physical,
                "correlation_variances": corr,
            }))
        }
        Format::Csv => {
            let mut out = String::new();
            out.push_str(&format!("# purity={}\n", sig12(purity(&cm))));
            let nus: Vec<String> = nus.iter().map(|&v| sig12(v)).collect();
            out.push_str(&format!("# symplectic_eigenvalues={}\n", nus.join(" ")));
            for (c, v) in &correlations {
                out.push_str(&format!("# var({c})={}\n", sig12(*v)));
            }
            out.push_str("xA,pA,xB,pB,xC,pC\n");
            for row in matrix_rows(&cm) {
                let fields: Vec<String> = row.iter().map(|&v| sig12(v)).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
            out
        }
    };
    emit(args.output.output.as_deref(), &text)?;
    if !physical {
        return Err(CliError::Unphysical(format!(
            "smallest symplectic eigenvalue {}",
            nus[0]
        )));
    }
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let cfg = args.state.config(1.0)?;
    let grid = parse_grid(&args.grid)?;
    let rows = sweep_eta(&cfg, &grid)?;
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_csv(&rows),
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "sweep",
            "config": config_json(&cfg),
            "rows": rows,
        })),
    };
    emit(args.output.output.as_deref(), &text)?;
    Ok(())
}

pub fn tomo(args: &TomoArgs) -> Result<(), CliError> {
    let cfg = args.state.config(args.eta)?;
    let cm = prepare_state(&cfg)?;
    let mut options = TomographyOptions::new(args.samples, args.trials, args.seed);
    if let Some(tol) = args.rejection_tol {
        options.rejection_tol = tol;
    }
    if args.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    if args.trials < 2 {
        return Err(CliError::Usage("--trials must be at least 2".into()));
    }
    let analytic: SteeringReport = steering_report(&cm)?;
    let stats = reconstruct_trials_with(&cm, &options)?;

    if let Some(path) = &args.samples_csv {
        let table = cvsteer::sample_quadratures(&cm, options.n_samples, stats.trials[0].seed)?;
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        write_atomic(&resolve(path), &buf)?;
    }

    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "tomo",
            "config": config_json(&cfg),
            "options": options,
            "rejection_rule": format!(
                "trial rejected when min symplectic eigenvalue < 1 - {}", options.rejection_tol
            ),
            "analytic": labelled(analytic.iter()),
            "mean": labelled(Direction::ALL.iter().map(|&d| (d, stats.mean(d)))),
            "std": labelled(Direction::ALL.iter().map(|&d| (d, stats.std(d)))),
            "analytic_monogamy": MonogamyReport::from_report(&analytic),
            "seeds": stats.trials.iter().map(|t| t.seed).collect::<Vec<_>>(),
            "rejections": stats.rejections,
            "trials": stats.trials,
        })),
        Format::Csv => {
            let mut out = String::from("direction,analytic,mean,std\n");
            for d in Direction::ALL {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    d.label(),
                    sig12(analytic.get(d)),
                    sig12(stats.mean(d)),
                    sig12(stats.std(d))
                ));
            }
            out
        }
    };
    emit(args.output.output.as_deref(), &text)?;
    Ok(())
}

struct Check {
    name: &'static str,
    detail: String,
    passed: bool,
}

pub fn check(args: &CheckArgs) -> Result<(), CliError> {
    let cfg = args.state.config(1.0)?;
    let grid = parse_grid(&args.grid)?;
    let rows = sweep_eta(&cfg, &grid)?;
    let mut checks = Vec::new();

    let mut worst_nu = f64::INFINITY;
    for &eta in &grid {
        let cm = prepare_state(&cfg.with_eta(eta))?;
        worst_nu = worst_nu.min(min_symplectic_eigenvalue(&cm).unwrap_or(f64::NEG_INFINITY));
    }
    checks.push(Check {
        name: "physicality",
        detail: format!(
            "min symplectic eigenvalue {worst_nu:.12} (need >= {} - {:e})",
            args.min_nu, args.phys_tol
        ),
        passed: worst_nu >= args.min_nu - args.phys_tol,
    });

    let worst_res = rows
        .iter()
        .map(|r| r.monogamy.min())
        .fold(f64::INFINITY, f64::min);
    checks.push(Check {
        name: "monogamy",
        detail: format!("min residual {worst_res:e} (need >= -{:e})", args.mono_tol),
        passed: worst_res >= -args.mono_tol,
    });

    let worst_pair = rows
        .iter()
        .flat_map(|r| Direction::ONE_TO_ONE.map(|d| r.steering.get(d)))
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "one-to-one",
        detail: format!(
            "max one-to-one G {worst_pair:e} (need <= {:e})",
            args.pair_tol
        ),
        passed: worst_pair <= args.pair_tol,
    });

    let pure = steering_report(&prepare_state(&cfg.with_eta(1.0))?)?;
    let asym = Direction::ONE_VS_TWO
        .iter()
        .map(|&d| (pure.get(d) - pure.get(d.reversed())).abs())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "pure-state-symmetry",
        detail: format!(
            "max |G(i->jk) - G(jk->i)| at eta=1: {asym:e} (need < {:e})",
            args.symmetry_tol
        ),
        passed: asym < args.symmetry_tol,
    });

    for c in &checks {
        println!(
            "{} {:<20} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    match checks.iter().find(|c| !c.passed) {
        Some(c) => Err(CliError::CheckFailed(c.name.to_string())),
        None => Ok(()),
    }
}
