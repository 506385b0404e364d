use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cfn::config::ExperimentConfig;
use cfn::experiment::{cmd_evaluate, cmd_predict, cmd_split, cmd_train, cmd_tune, ExtraRating};
use cfn::{CfnError, Result};

/// Autoencoder collaborative filtering experiments.
#[derive(Debug, Parser)]
#[command(name = "cfn", version)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 gives bit-reproducible runs.
    #[arg(long, global = true, env = "CFN_THREADS")]
    threads: Option<usize>,
    /// Overrides the configured experiment directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split the ratings into train.tsv / test.tsv.
    Split,
    /// Train and write model.ckpt plus train_report.tsv.
    Train,
    /// Score the test split and write eval.tsv.
    Evaluate {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Genetic hyperparameter search; writes tune_log.tsv and best_genome.toml.
    Tune,
    /// Predict one rating, optionally after feeding extra ratings.
    Predict {
        #[arg(long)]
        user: String,
        #[arg(long)]
        item: String,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Extra rating `USER:ITEM:RATING`; repeatable.
        #[arg(long = "with", value_parser = parse_extra)]
        with: Vec<ExtraRating>,
    },
}

fn parse_extra(s: &str) -> std::result::Result<ExtraRating, String> {
    let mut parts = s.rsplitn(3, ':');
    let (r, i, u) = (parts.next(), parts.next(), parts.next());
    match (u, i, r.map(str::parse::<f64>)) {
        (Some(u), Some(i), Some(Ok(rating))) => Ok(ExtraRating {
            user: u.to_string(),
            item: i.to_string(),
            rating,
        }),
        _ => Err(format!("expected USER:ITEM:RATING, got `{s}`")),
    }
}

fn run(cli: Cli) -> Result<()> {
    let path = cli
        .config
        .ok_or_else(|| CfnError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(&path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.output {
        cfg.output = o;
    }
    if let Some(t) = cli.threads.or(cfg.threads) {
        cfg.threads = Some(t);
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CfnError::Config(format!("thread pool: {e}")))?;
    }
    cfg.validate()?;
    log::info!("seed {}, output {}", cfg.seed, cfg.output.display());
    match cli.command {
        Command::Split => {
            let d = cmd_split(&cfg)?;
            println!("train {}\ttest {}", d.train.nnz(), d.test.nnz());
        }
        Command::Train => {
            let out = cmd_train(&cfg)?;
            if let Some(last) = out.report.epochs.last() {
                println!("epoch {}\tloss {}", last.epoch, last.loss);
            }
            println!("checkpoint {}", out.checkpoint.display());
        }
        Command::Evaluate { checkpoint } => {
            let r = cmd_evaluate(&cfg, checkpoint.as_deref())?;
            println!("rmse\t{}", r.global_rmse);
            for b in r.quintiles.iter().flatten() {
                println!("quintile {:.1}-{:.1}\t{}", b.lower, b.upper, b.rmse);
            }
            for p in r.sweep.iter().flatten() {
                println!("density {}\t{}", p.train_fraction, p.rmse);
            }
        }
        Command::Tune => {
            let out = cmd_tune(&cfg)?;
            let g = &out.best.genome;
            println!(
                "best fitness {}\talpha {} beta {} mask {} k {} lr {} decay {} wd {}",
                out.best.fitness,
                g.alpha(),
                g.beta(),
                g.mask_ratio(),
                g.bottleneck(),
                g.learning_rate(),
                g.lr_decay(),
                g.weight_decay()
            );
        }
        Command::Predict {
            user,
            item,
            checkpoint,
            with,
        } => {
            println!("{}", cmd_predict(&cfg, checkpoint.as_deref(), &user, &item, &with)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
