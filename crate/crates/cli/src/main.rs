use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dccause::dr::DrReport;
use dccause::harness::io::{parse_numeric_table, parse_observation_table, parse_sample_csv};
use dccause::harness::{
    discretize_column, run_accuracy, run_decision_rate_curve, run_real_pairs, run_threshold_study,
    run_timing, DiscretizeRule, ExperimentConfig, ExperimentReport,
};
use dccause::seed::rng_from_seed;
use dccause::synth::{gen_anm, gen_reference_set_model, sample_to_csv, standard_noise_domain};
use dccause::{dcor_stats, dr_decide, infer_detailed, DrConfig, Error, ErrorKind, Result};

/// Causal direction between two discrete variables via distance correlation.
#[derive(Parser)]
#[command(name = "dccause", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer the causal direction of an `x,y` integer CSV sample.
    Infer {
        /// Sample file; reads stdin when omitted.
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Dc)]
        method: MethodArg,
        /// Permutation-test seed for the regression baseline.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Acceptance level of the regression baseline.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Distance covariance and correlation of a numeric table whose first
    /// column is the scalar side and remaining columns the vector side.
    Dcor { input: Option<PathBuf> },
    /// Generate a random model and a sample drawn from it.
    Synth {
        #[arg(long, value_enum, default_value_t = FamilyArg::Anm)]
        family: FamilyArg,
        #[arg(long)]
        x_size: Option<usize>,
        #[arg(long)]
        y_size: Option<usize>,
        /// Size of the symmetric noise domain (2, 3, 5 or 7).
        #[arg(long, default_value_t = 5)]
        noise_domain: usize,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory receiving model.json and sample.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark experiment.
    Bench {
        #[arg(value_enum)]
        experiment: Experiment,
        /// JSON experiment config; a built-in default is used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory receiving report.json and report.csv; the JSON report
        /// goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, conflicts_with = "full_scale")]
        models: Option<usize>,
        /// Use 500 models per setting.
        #[arg(long)]
        full_scale: bool,
        /// Dataset directory for `real-pairs` without a config.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Round every column of a numeric table to integer codes.
    Discretize {
        input: Option<PathBuf>,
        #[arg(long, default_value = "auto")]
        rule: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Dc,
    Dr,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Anm,
    #[value(name = "reference_set", alias = "reference-set")]
    ReferenceSet,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Accuracy,
    Timing,
    Threshold,
    DecisionRate,
    RealPairs,
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => Ok(fs::read_to_string(p)?),
        None => {
            let mut text = String::new();
            io::stdin().read_to_string(&mut text)?;
            Ok(text)
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    writeln!(io::stdout(), "{text}")?;
    Ok(())
}

fn default_config(experiment: Experiment, data_dir: Option<PathBuf>) -> Result<ExperimentConfig> {
    let domains = |ks: &[usize]| {
        ks.iter()
            .map(|&k| standard_noise_domain(k).expect("standard domain"))
            .collect()
    };
    Ok(match experiment {
        Experiment::Accuracy => ExperimentConfig::anm(domains(&[2, 3, 5, 7])),
        Experiment::Timing => {
            let mut config = ExperimentConfig::reference_set(vec![(15, 15)]);
            config.sample_sizes = vec![500, 1000, 2000, 4000];
            config
        }
        Experiment::Threshold | Experiment::DecisionRate => {
            ExperimentConfig::reference_set(vec![(15, 15)])
        }
        Experiment::RealPairs => match data_dir {
            Some(dir) => ExperimentConfig::real_pairs(dir),
            None => {
                return Err(Error::Config(
                    "real-pairs needs --config or --data-dir".into(),
                ))
            }
        },
    })
}

fn bench(
    experiment: Experiment,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    models: Option<usize>,
    full_scale: bool,
    data_dir: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<()> {
    let mut config = match config {
        Some(path) => ExperimentConfig::load(&path)?,
        None => default_config(experiment, data_dir)?,
    };
    if full_scale {
        config.models_per_setting = dccause::harness::config::FULL_SCALE_MODELS;
    }
    if let Some(m) = models {
        config.models_per_setting = m;
    }
    if threads.is_some() {
        config.threads = threads;
    }
    let report: ExperimentReport = match experiment {
        Experiment::Accuracy => run_accuracy(&config)?,
        Experiment::Timing => run_timing(&config)?,
        Experiment::Threshold => run_threshold_study(&config)?,
        Experiment::DecisionRate => run_decision_rate_curve(&config)?,
        Experiment::RealPairs => run_real_pairs(&config)?,
    };
    match out {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("report.json"), report.to_json()? + "\n")?;
            fs::write(dir.join("report.csv"), report.to_csv()?)?;
        }
        None => writeln!(io::stdout(), "{}", report.to_json()?)?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Infer {
            input,
            epsilon,
            method,
            seed,
            alpha,
        } => {
            let sample = parse_sample_csv(&read_input(input.as_deref())?)?;
            match method {
                MethodArg::Dc => print_json(&infer_detailed(&sample, epsilon)?),
                MethodArg::Dr => {
                    let config = DrConfig {
                        alpha,
                        seed,
                        ..DrConfig::default()
                    };
                    let decision = dr_decide(&sample, &config)?;
                    print_json(&DrReport::new(&sample, &decision))
                }
            }
        }
        Command::Dcor { input } => {
            let set = parse_observation_table(&read_input(input.as_deref())?)?;
            print_json(&dcor_stats(&set)?)
        }
        Command::Synth {
            family,
            x_size,
            y_size,
            noise_domain,
            n,
            seed,
            out,
        } => {
            let mut rng = rng_from_seed(seed);
            let model = match family {
                FamilyArg::Anm => {
                    let noise = standard_noise_domain(noise_domain).ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "noise domain size must be 2, 3, 5 or 7, got {noise_domain}"
                        ))
                    })?;
                    gen_anm(&mut rng, x_size.unwrap_or(30), y_size.unwrap_or(30), &noise)?
                }
                FamilyArg::ReferenceSet => gen_reference_set_model(
                    &mut rng,
                    x_size.unwrap_or(15),
                    y_size.unwrap_or(15),
                    None,
                )?,
            };
            let sample = model.sample(n, &mut rng)?;
            fs::create_dir_all(&out)?;
            fs::write(
                out.join("model.json"),
                serde_json::to_string_pretty(&model)? + "\n",
            )?;
            fs::write(out.join("sample.csv"), sample_to_csv(&sample))?;
            Ok(())
        }
        Command::Bench {
            experiment,
            config,
            out,
            models,
            full_scale,
            data_dir,
            threads,
        } => bench(
            experiment, config, out, models, full_scale, data_dir, threads,
        ),
        Command::Discretize { input, rule } => {
            let rule: DiscretizeRule = rule.parse()?;
            let table = parse_numeric_table(&read_input(input.as_deref())?)?;
            let width = table.first().map_or(0, Vec::len);
            let columns = (0..width)
                .map(|c| {
                    let column: Vec<f64> = table.iter().map(|row| row[c]).collect();
                    discretize_column(&column, rule)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut stdout = io::stdout().lock();
            for r in 0..table.len() {
                let line: Vec<String> = columns.iter().map(|c| c[r].to_string()).collect();
                writeln!(stdout, "{}", line.join(","))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Internal => 3,
            })
        }
    }
}
