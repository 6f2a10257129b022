mod checks;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use binrbm::model::generate_teacher_student;
use binrbm::train::train;
use binrbm::variational::PriorSpec;
use binrbm::{io, Error};
use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "binrbm", about = "Train binary-synapse RBMs by mean-field variational inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a ±1 teacher model and sample a dataset from it
    Generate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the training loop on a dataset
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a verification suite (gradcheck, mpcheck, identities)
    Check {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE_IO: u8 = 2;
const EXIT_DATA: u8 = 3;

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::DimensionMismatch(_) => EXIT_DATA,
        _ => EXIT_USAGE_IO,
    }
}

fn require<T: Copy>(v: Option<T>, key: &str) -> Result<T, Error> {
    v.ok_or_else(|| Error::InvalidArgument(format!("config is missing required key '{key}'")))
}

fn cmd_generate(cfg: &ExperimentConfig) -> Result<(), Error> {
    let n = require(cfg.n, "n")?;
    let m = require(cfg.m, "m")?;
    let d = require(cfg.d, "d")?;
    let (teacher, data) =
        generate_teacher_student(n, m, d, cfg.trainer.beta, cfg.trainer.seed)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let model_path = cfg
        .model_path
        .clone()
        .unwrap_or_else(|| cfg.out_dir.join("teacher-model.txt"));
    let data_path = cfg
        .data_path
        .clone()
        .unwrap_or_else(|| cfg.out_dir.join("dataset.txt"));
    io::write_atomic(&model_path, &io::model_to_string(&teacher))?;
    io::write_atomic(&data_path, &io::dataset_to_string(&data))?;
    println!(
        "generated teacher N={n} M={m} beta={} and D={d} samples -> {} {}",
        cfg.trainer.beta,
        model_path.display(),
        data_path.display()
    );
    Ok(())
}

fn cmd_train(cfg: &ExperimentConfig) -> Result<(), Error> {
    let data_path = cfg
        .data_path
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("config is missing required key 'data_path'".into()))?;
    let data = io::dataset_from_str(&std::fs::read_to_string(data_path)?)?;
    let teacher = match cfg.model_path.as_deref() {
        Some(p) => Some(io::model_from_str(&std::fs::read_to_string(p)?)?),
        None => None,
    };
    let m = match (cfg.m, &teacher) {
        (Some(m), _) => m,
        (None, Some(t)) => t.num_hidden(),
        (None, None) => return Err(Error::InvalidArgument("config is missing required key 'm'".into())),
    };
    if let Some(n) = cfg.n {
        if n != data.num_visible() {
            return Err(Error::DimensionMismatch(format!(
                "config says n={n} but dataset has N={}",
                data.num_visible()
            )));
        }
    }
    if let Some(t) = &teacher {
        if t.num_visible() != data.num_visible() || t.num_hidden() != m {
            return Err(Error::DimensionMismatch(format!(
                "teacher model is M={} N={}, run wants M={m} N={}",
                t.num_hidden(),
                t.num_visible(),
                data.num_visible()
            )));
        }
    }
    let prior = PriorSpec::uniform(m, data.num_visible());
    let (state, trace) = train(&cfg.trainer, &data, &prior, None, teacher.as_ref())?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let variant = cfg.trainer.variant.name();
    let vstate_path = cfg.out_dir.join(format!("{variant}-vstate.txt"));
    let trace_path = cfg.out_dir.join(format!("{variant}-trace.csv"));
    io::write_atomic(&vstate_path, &io::vstate_to_string(&state))?;
    io::write_atomic(&trace_path, &io::trace_to_csv(&trace))?;
    let last = trace.rows.last().expect("trace always has a closing row");
    println!(
        "trained variant={variant} epochs={}: final elbo={:.6e} overlap={:.4} -> {} {}",
        cfg.trainer.epochs,
        last.elbo,
        last.overlap,
        vstate_path.display(),
        trace_path.display()
    );
    Ok(())
}

fn cmd_check(suite: &str, cfg: &ExperimentConfig) -> Result<u8, Error> {
    let mut report = checks::CheckReport::new(cfg.check_tolerance);
    match suite {
        "identities" => checks::run_identities(&mut report)?,
        "gradcheck" => checks::run_gradcheck(&mut report)?,
        "mpcheck" => checks::run_mpcheck(&mut report)?,
        other => {
            eprintln!("binrbm: unknown suite '{other}' (expected gradcheck, mpcheck, identities)");
            return Ok(EXIT_USAGE_IO);
        }
    }
    if report.failures == 0 {
        println!("suite {suite}: all checks passed");
        Ok(0)
    } else {
        println!("suite {suite}: {} check(s) failed", report.failures);
        Ok(EXIT_CHECK_FAILED)
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Error> {
    ExperimentConfig::load(path)
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("BINRBM_THREADS") {
        match v.parse::<usize>() {
            Ok(t) if t >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .ok();
            }
            _ => {
                eprintln!("binrbm: BINRBM_THREADS must be a positive integer, got '{v}'");
                return ExitCode::from(EXIT_USAGE_IO);
            }
        }
    }
    let cli = Cli::parse();
    let run = || -> Result<u8, Error> {
        match &cli.command {
            Command::Generate { config } => {
                cmd_generate(&load_config(config)?)?;
                Ok(0)
            }
            Command::Train { config } => {
                cmd_train(&load_config(config)?)?;
                Ok(0)
            }
            Command::Check { suite, config } => {
                let cfg = match config {
                    Some(p) => load_config(p)?,
                    None => ExperimentConfig::default(),
                };
                cmd_check(suite, &cfg)
            }
        }
    };
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("binrbm: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
