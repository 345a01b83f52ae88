//! Command-line front end: validate a run bundle, execute a policy
//! comparison, or run the similarity-threshold sweep.
//!
//! ```text
//! situbandit validate <config>
//! situbandit run <config> --out <dir> [--seed <u64>]
//! situbandit sweep <config> --out <dir>
//! ```
//!
//! Exit codes: 0 on success, 1 when the config bundle fails validation,
//! 2 on runtime failures (unwritable output, bad usage).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use situbandit::config::RunConfig;
use situbandit::policies::PolicyKind;
use situbandit::simulator::{
    compare_policies, threshold_sweep, write_sweep_csv, Comparison, Environment, TrialOptions,
};
use situbandit::situation::{CriticalSituationSet, Situation};
use situbandit::taxonomy::{Dimension, Taxonomy};
use situbandit::TaxonomySet;

const USAGE: &str = "\
situbandit — situation-aware recommendation policies on a synthetic replay harness

USAGE:
  situbandit validate <config>
  situbandit run <config> --out <dir> [--seed <u64>]
  situbandit sweep <config> --out <dir>

COMMANDS:
  validate   Parse the config and every referenced file; report all problems.
  run        Compare the configured policies; write comparison.csv and summary.txt.
  sweep      Calibrate the criticality threshold; write sweep.csv.

FLAGS:
  --out <dir>    Output directory (created if absent).
  --seed <u64>   Replace the config's seed list with this single seed.
";

enum Command {
    Validate {
        config: PathBuf,
    },
    Run {
        config: PathBuf,
        out: PathBuf,
        seed: Option<u64>,
    },
    Sweep {
        config: PathBuf,
        out: PathBuf,
    },
}

fn parse_args(args: &[String]) -> Result<Command, String> {
    let mut it = args.iter();
    let sub = it.next().ok_or("missing command")?;
    let mut config = None;
    let mut out = None;
    let mut seed = None;
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--out" => {
                let value = it.next().ok_or("--out needs a directory")?;
                out = Some(PathBuf::from(value));
            }
            "--seed" => {
                let value = it.next().ok_or("--seed needs an integer")?;
                seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|_| format!("invalid --seed value `{value}`"))?,
                );
            }
            flag if flag.starts_with("--") => return Err(format!("unknown flag `{flag}`")),
            positional => {
                if config.is_some() {
                    return Err(format!("unexpected argument `{positional}`"));
                }
                config = Some(PathBuf::from(positional));
            }
        }
    }
    let config = config.ok_or("missing <config> path")?;
    match sub.as_str() {
        "validate" => Ok(Command::Validate { config }),
        "run" => Ok(Command::Run {
            config,
            out: out.ok_or("run needs --out <dir>")?,
            seed,
        }),
        "sweep" => Ok(Command::Sweep {
            config,
            out: out.ok_or("sweep needs --out <dir>")?,
        }),
        other => Err(format!("unknown command `{other}`")),
    }
}

/// The fully loaded inputs: parsed config, environment (synthetic or over
/// external taxonomies), with the critical seed applied.
struct Bundle {
    config: RunConfig,
    environment: Environment,
}

/// Loads and cross-validates the whole bundle, collecting every problem as
/// a `file: message` line.
fn load_bundle(config_path: &Path) -> Result<Bundle, Vec<String>> {
    let mut problems = Vec::new();
    let config_name = config_path.display();
    let text = match fs::read_to_string(config_path) {
        Ok(text) => text,
        Err(e) => return Err(vec![format!("{config_name}: {e}")]),
    };
    let config = match RunConfig::parse(&text) {
        Ok(config) => config,
        Err(e) => {
            return Err(e
                .issues
                .iter()
                .map(|issue| format!("{config_name}: {issue}"))
                .collect())
        }
    };

    let base = config_path.parent().unwrap_or(Path::new("."));
    let environment = if config.files.has_taxonomies() {
        let mut load = |path: &Option<PathBuf>, dimension: Dimension| -> Option<Taxonomy> {
            let path = base.join(path.as_ref().expect("checked by config validation"));
            let name = path.display().to_string();
            match fs::read_to_string(&path) {
                Err(e) => {
                    problems.push(format!("{name}: {e}"));
                    None
                }
                Ok(text) => match Taxonomy::parse(&text, dimension) {
                    Ok(taxonomy) => Some(taxonomy),
                    Err(e) => {
                        problems.push(format!("{name}: {e}"));
                        None
                    }
                },
            }
        };
        let location = load(&config.files.location_taxonomy, Dimension::Location);
        let time = load(&config.files.time_taxonomy, Dimension::Time);
        let social = load(&config.files.social_taxonomy, Dimension::Social);
        match (location, time, social) {
            (Some(location), Some(time), Some(social)) => {
                match Environment::from_taxonomies(
                    &config.environment,
                    TaxonomySet::new(location, time, social),
                ) {
                    Ok(env) => Some(env),
                    Err(e) => {
                        problems.push(format!("{config_name}: {e}"));
                        None
                    }
                }
            }
            _ => None,
        }
    } else {
        match Environment::generate(&config.environment) {
            Ok(env) => Some(env),
            Err(e) => {
                problems.push(format!("{config_name}: {e}"));
                None
            }
        }
    };

    let environment = environment.and_then(|env| {
        let Some(seed_path) = &config.files.critical_situations else {
            return Some(env);
        };
        let path = base.join(seed_path);
        let name = path.display().to_string();
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) => {
                problems.push(format!("{name}: {e}"));
                return None;
            }
        };
        // Threshold 1.0 is a placeholder; runs re-seed per policy with the
        // configured threshold.
        match CriticalSituationSet::parse_seed(&text, 1.0, env.taxonomies()) {
            Ok(seed) => {
                let members: Vec<Situation> = seed.members().to_vec();
                if members.is_empty() {
                    problems.push(format!("{name}: no critical situations declared"));
                    None
                } else {
                    Some(env.with_critical_seed(members))
                }
            }
            Err(e) => {
                problems.push(format!("{name}: {e}"));
                None
            }
        }
    });

    match environment {
        Some(environment) if problems.is_empty() => Ok(Bundle {
            config,
            environment,
        }),
        _ => Err(problems),
    }
}

fn cmd_validate(config: &Path) -> ExitCode {
    match load_bundle(config) {
        Ok(_) => {
            println!("0 errors");
            ExitCode::SUCCESS
        }
        Err(problems) => {
            for p in &problems {
                println!("{p}");
            }
            println!(
                "{} error{}",
                problems.len(),
                if problems.len() == 1 { "" } else { "s" }
            );
            ExitCode::from(1)
        }
    }
}

/// The pure-exploitation baseline a summary compares against.
fn is_exploit(kind: &PolicyKind) -> bool {
    matches!(kind, PolicyKind::Exploit)
        || matches!(kind, PolicyKind::EpsGreedy { epsilon } if *epsilon == 0.0)
}

fn render_summary(bundle: &Bundle, comparison: &Comparison, seeds: &[u64]) -> String {
    let protocol = &bundle.config.protocol;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "trials: {}, list size: {}, seeds: {}, checkpoint interval: {}",
        protocol.trials,
        protocol.list_size,
        seeds.len(),
        protocol.checkpoint_interval
    );
    let _ = writeln!(text, "final average CTR by policy (mean over seeds):");

    let mut means: Vec<(String, f64)> = comparison
        .policies()
        .iter()
        .map(|name| {
            (
                name.to_string(),
                comparison.final_mean(name).unwrap_or(0.0),
            )
        })
        .collect();
    means.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    for (name, mean) in &means {
        let _ = writeln!(text, "  {name:<24} {mean:.6}");
    }
    if let Some((best, _)) = means.first() {
        let _ = writeln!(text, "best policy: {best}");
    }

    let contextual = bundle
        .config
        .policies
        .iter()
        .find(|p| matches!(p.kind, PolicyKind::Contextual));
    if let Some(entry) = contextual {
        let rows = comparison.rows_for(&entry.name);
        if !rows.is_empty() {
            let growth: u64 = rows.iter().map(|r| r.critical_growth).sum();
            let _ = writeln!(
                text,
                "critical-set growth ({}, total over {} seeds): {}",
                entry.name,
                rows.len(),
                growth
            );
        }
        let baseline = bundle.config.policies.iter().find(|p| is_exploit(&p.kind));
        if let (Some(baseline), Some(contextual_mean)) =
            (baseline, comparison.final_mean(&entry.name))
        {
            if let Some(exploit_mean) = comparison.final_mean(&baseline.name) {
                if exploit_mean > 0.0 {
                    let _ = writeln!(
                        text,
                        "{} / {} final CTR factor: {:.3}",
                        entry.name,
                        baseline.name,
                        contextual_mean / exploit_mean
                    );
                }
            }
        }
    }
    text
}

fn cmd_run(config: &Path, out: &Path, seed_override: Option<u64>) -> ExitCode {
    let bundle = match load_bundle(config) {
        Ok(bundle) => bundle,
        Err(problems) => {
            for p in problems {
                eprintln!("{p}");
            }
            return ExitCode::from(1);
        }
    };
    if bundle.config.policies.is_empty() {
        eprintln!("{}: no [policy.*] sections to run", config.display());
        return ExitCode::from(1);
    }
    let seeds: Vec<u64> = match seed_override {
        Some(seed) => vec![seed],
        None => bundle.config.protocol.seeds.clone(),
    };
    let opts = TrialOptions {
        trials: bundle.config.protocol.trials,
        list_size: bundle.config.protocol.list_size,
        checkpoint_interval: bundle.config.protocol.checkpoint_interval,
        seed: 0,
    };
    let comparison = match compare_policies(
        &bundle.environment,
        &bundle.config.policies,
        &opts,
        &seeds,
    ) {
        Ok(comparison) => comparison,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };

    if let Err(e) = fs::create_dir_all(out) {
        eprintln!("{}: {e}", out.display());
        return ExitCode::from(2);
    }
    let mut csv = Vec::new();
    if comparison.write_csv(&mut csv).is_err() {
        eprintln!("failed to render comparison.csv");
        return ExitCode::from(2);
    }
    let summary = render_summary(&bundle, &comparison, &seeds);
    for (name, bytes) in [
        ("comparison.csv", csv),
        ("summary.txt", summary.clone().into_bytes()),
    ] {
        let path = out.join(name);
        if let Err(e) = fs::write(&path, bytes) {
            eprintln!("{}: {e}", path.display());
            return ExitCode::from(2);
        }
        println!("wrote {}", path.display());
    }
    print!("{summary}");
    ExitCode::SUCCESS
}

fn cmd_sweep(config: &Path, out: &Path) -> ExitCode {
    let bundle = match load_bundle(config) {
        Ok(bundle) => bundle,
        Err(problems) => {
            for p in problems {
                eprintln!("{p}");
            }
            return ExitCode::from(1);
        }
    };
    let Some(sweep) = &bundle.config.sweep else {
        eprintln!("{}: missing the [sweep] section", config.display());
        return ExitCode::from(1);
    };
    let gold = bundle.environment.gold_clustering(
        sweep.sample_per_cluster,
        sweep.duplicate_pairs,
        sweep.ambiguous_pairs,
    );
    if gold.members.len() < 2 {
        eprintln!(
            "{}: [sweep] produced an empty gold sample (sample_per_cluster = {})",
            config.display(),
            sweep.sample_per_cluster
        );
        return ExitCode::from(1);
    }
    let result = match threshold_sweep(
        &gold,
        bundle.environment.weights(),
        bundle.environment.taxonomies(),
        &sweep.thresholds,
    ) {
        Ok(result) => result,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };

    if let Err(e) = fs::create_dir_all(out) {
        eprintln!("{}: {e}", out.display());
        return ExitCode::from(2);
    }
    let path = out.join("sweep.csv");
    let mut csv = Vec::new();
    if write_sweep_csv(&result, &mut csv).is_err() {
        eprintln!("failed to render sweep.csv");
        return ExitCode::from(2);
    }
    if let Err(e) = fs::write(&path, csv) {
        eprintln!("{}: {e}", path.display());
        return ExitCode::from(2);
    }
    println!("wrote {}", path.display());
    println!(
        "optimal threshold_b = {:.2} (precision {:.3}, {} predicted pairs)",
        result.best.threshold, result.best.precision, result.best.predicted_pairs
    );
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match parse_args(&args) {
        Err(problem) => {
            eprintln!("{problem}\n\n{USAGE}");
            ExitCode::from(2)
        }
        Ok(Command::Validate { config }) => cmd_validate(&config),
        Ok(Command::Run { config, out, seed }) => cmd_run(&config, &out, seed),
        Ok(Command::Sweep { config, out }) => cmd_sweep(&config, &out),
    }
}
