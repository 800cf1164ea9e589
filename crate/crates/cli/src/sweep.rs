use std::path::Path;
use std::time::Instant;

use hqc_core::experiments::{compare_positive_vs_zero_energy, run_sweep, to_csv_string, ResultBundle, SweepVariable};
use hqc_core::propagation::UNITARITY_TOL;
use hqc_core::ExperimentConfig;
use serde::Serialize;

use crate::{render_svg, CliError, ExperimentArg, RunManifest, SweepArgs};

fn load_config(args: &SweepArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_toml_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?
        }
        None => args.experiment.default_config(),
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    let expected = match args.experiment {
        ExperimentArg::Runtime => Some(SweepVariable::Runtime),
        ExperimentArg::MeanControl => Some(SweepVariable::MeanControl),
        ExperimentArg::DtZeroEnergy => Some(SweepVariable::Dt),
        ExperimentArg::KickEquivalence => None,
    };
    match expected {
        Some(v) if v != cfg.sweep_variable => Err(CliError::Invalid(format!(
            "experiment {} needs sweep_variable {v:?}, config has {:?}",
            args.experiment.name(),
            cfg.sweep_variable
        ))),
        None if !cfg.control.kind.is_kick() => {
            Err(CliError::Invalid("kick-equivalence needs a delta-kick control kind".into()))
        }
        _ => Ok(cfg),
    }
}

fn write(dir: &Path, name: &str, contents: &str, outputs: &mut Vec<String>) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    outputs.push(name.to_string());
    Ok(())
}

#[derive(Serialize)]
struct KickBundle<'a> {
    schema_revision: &'a str,
    experiment: &'a str,
    config: &'a ExperimentConfig,
    report: &'a hqc_core::KickEquivalenceReport,
}

pub fn run(args: &SweepArgs, threads: usize) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::Output(format!("{}: {e}", args.out_dir.display())))?;
    let name = args.experiment.name();
    let mut manifest = RunManifest::new(name, &cfg, threads);
    let start = Instant::now();
    let mut outputs = Vec::new();

    if args.experiment == ExperimentArg::KickEquivalence {
        let report = compare_positive_vs_zero_energy(&cfg)?;
        let csv = format!(
            "kick_count,max_entry_difference,net_area_positive,net_area_alternating,f_positive,f_alternating\n{},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n",
            report.kick_count,
            report.max_entry_difference,
            report.net_area_positive,
            report.net_area_alternating,
            report.f_positive,
            report.f_alternating
        );
        write(&args.out_dir, &format!("{name}.csv"), &csv, &mut outputs)?;
        let bundle =
            KickBundle { schema_revision: &manifest.schema_revision, experiment: name, config: &cfg, report: &report };
        let json = serde_json::to_string_pretty(&bundle).map_err(|e| CliError::Failure(e.to_string()))? + "\n";
        write(&args.out_dir, &format!("{name}.json"), &json, &mut outputs)?;
        manifest.max_unitarity_defect = report.max_unitarity_defect;
        println!(
            "{} kicks: max entry difference {:.3e}, net areas {:.6} vs {:.6}",
            report.kick_count, report.max_entry_difference, report.net_area_positive, report.net_area_alternating
        );
    } else {
        let rows = run_sweep(&cfg)?;
        write(&args.out_dir, &format!("{name}.csv"), &to_csv_string(&rows), &mut outputs)?;
        manifest.total_steps = rows.iter().map(|r| r.steps).sum();
        manifest.max_unitarity_defect = rows.iter().map(|r| r.max_unitarity_defect).fold(0.0, f64::max);
        if args.plot {
            let label = match cfg.sweep_variable {
                SweepVariable::Runtime => "T",
                SweepVariable::MeanControl => "mean control",
                SweepVariable::Dt => "dt",
            };
            write(&args.out_dir, &format!("{name}.svg"), &render_svg(&rows, label), &mut outputs)?;
        }
        println!("{:>14} {:>10} {:>10} {:>10} {:>9}", "x", "f_mean", "f_min", "f_max", "resonant");
        for r in &rows {
            println!("{:>14.6} {:>10.6} {:>10.6} {:>10.6} {:>9}", r.x, r.f_mean, r.f_min, r.f_max, r.resonant);
        }
        let bundle = ResultBundle::new(name, &cfg, rows);
        write(&args.out_dir, &format!("{name}.json"), &(bundle.to_json()? + "\n"), &mut outputs)?;
    }

    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    outputs.push("manifest.json".to_string());
    manifest.outputs = outputs;
    let path = args.out_dir.join("manifest.json");
    manifest.write(&path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    println!("wrote {} files to {}", manifest.outputs.len(), args.out_dir.display());

    if manifest.max_unitarity_defect > UNITARITY_TOL {
        return Err(CliError::Tolerance(format!(
            "unitarity defect {:.3e} exceeds {UNITARITY_TOL:e}",
            manifest.max_unitarity_defect
        )));
    }
    Ok(())
}
