use std::path::PathBuf;
use std::process::ExitCode;

use atd3::Variant;
use atd3_cli::{
    cmd_ablate, cmd_evaluate, cmd_qerror, cmd_similarity, cmd_train, ladder_prefixes, parse_reward_set, EnvKind,
    HpOverrides, Overrides, Result,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "atd3", version, about = "Adversarial twin-delayed actor-critic training for biped walking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one or more seeded trials.
    Train(Common),
    /// Train once per incremental reward set and compare the best evaluation rewards.
    Ablate {
        #[command(flatten)]
        common: Common,
        /// Number of ladder conditions (1 to 7), counted from `r_d`.
        #[arg(long, default_value_t = 7)]
        conditions: usize,
        /// Explicit reward sets instead of the ladder, separated by `;`.
        #[arg(long)]
        sets: Option<String>,
    },
    /// Compare critic estimates with Monte-Carlo returns during training.
    Qerror {
        #[command(flatten)]
        common: Common,
        /// Variants to study (comma separated); all three by default.
        #[arg(long, value_delimiter = ',')]
        variants: Option<Vec<Variant>>,
    },
    /// Evaluate saved policies without exploration noise.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long = "checkpoint", required = true)]
        checkpoints: Vec<PathBuf>,
    },
    /// Score the gait of saved policies against a reference gait.
    Similarity {
        #[command(flatten)]
        common: Common,
        #[arg(long = "checkpoint", required = true)]
        checkpoints: Vec<PathBuf>,
        /// CSV with columns phase, hip_deg, knee_deg, ankle_deg; the bundled table by default.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Evaluation episodes per checkpoint.
        #[arg(long, default_value_t = 5)]
        episodes: usize,
    },
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// TOML or JSON run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long, value_parser = parse_env)]
    env: Option<EnvKind>,
    #[arg(long)]
    variant: Option<Variant>,
    /// `default`, `optimal`, `all`, or terms from offset,r_s,r_n,r_lhs,r_cg,r_gs.
    #[arg(long)]
    reward_set: Option<String>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    eval_interval: Option<u64>,
    #[arg(long)]
    eval_episodes: Option<usize>,
    /// First seed; with --trials, consecutive seeds follow.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// Exploration noise standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    seq_len: Option<usize>,
    #[arg(long)]
    encoder_width: Option<usize>,
    #[arg(long)]
    hidden_width: Option<usize>,
    #[arg(long)]
    start_steps: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add elapsed wall time to training logs (outputs then differ between runs).
    #[arg(long)]
    record_wall_time: bool,
}

fn parse_env(s: &str) -> std::result::Result<EnvKind, String> {
    s.parse().map_err(|e: atd3_cli::CliError| e.to_string())
}

impl Common {
    fn resolve(&self) -> Result<atd3_cli::RunConfig> {
        let o = Overrides {
            name: self.name.clone(),
            env: self.env,
            variant: self.variant,
            reward_set: self.reward_set.clone(),
            steps: self.steps,
            eval_interval: self.eval_interval,
            eval_episodes: self.eval_episodes,
            seed: self.seed,
            seeds: self.seeds.clone(),
            trials: self.trials,
            out: self.out.clone(),
            record_wall_time: self.record_wall_time,
            hp: HpOverrides {
                beta: self.beta,
                exploration_noise: self.sigma,
                seq_len: self.seq_len,
                encoder_width: self.encoder_width,
                hidden_width: self.hidden_width,
                start_steps: self.start_steps,
                ..Default::default()
            },
        };
        o.resolve(self.config.as_deref())
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(common) => {
            let s = cmd_train(&common.resolve()?)?;
            println!(
                "{}: best evaluation reward {:.3} ± {:.3}, final displacement {:.3} ± {:.3}",
                s.condition, s.best.mean, s.best.std, s.final_displacement.mean, s.final_displacement.std
            );
        }
        Command::Ablate { common, conditions, sets } => {
            let cfg = common.resolve()?;
            let sets = match sets {
                Some(text) => text.split(';').map(parse_reward_set).collect::<Result<Vec<_>>>()?,
                None => ladder_prefixes(conditions)?,
            };
            for r in cmd_ablate(&cfg, &sets)?.rows {
                println!("{:<40} {:>10.3} ± {:.3}", r.condition, r.mean, r.std);
            }
        }
        Command::Qerror { common, variants } => {
            let mut cfg = common.resolve()?;
            if let Some(v) = variants {
                cfg.qerror.variants = v;
            }
            let s = cmd_qerror(&cfg)?;
            for r in &s.rows {
                println!("{:<10} mean |normalized Q error| {:.4} ± {:.4}", r.condition, r.mean, r.std);
            }
            let standing = s.trials.iter().filter(|t| t.standing).count();
            if standing > 0 {
                println!("{standing} trial(s) ended standing and should be re-run");
            }
        }
        Command::Evaluate { common, checkpoints } => {
            for r in cmd_evaluate(&common.resolve()?, &checkpoints)? {
                println!(
                    "{}: reward {:.3} ± {:.3}, displacement {:.3}",
                    r.checkpoint, r.mean_reward, r.std_reward, r.mean_displacement
                );
            }
        }
        Command::Similarity {
            common,
            checkpoints,
            reference,
            episodes,
        } => {
            let out = cmd_similarity(&common.resolve()?, &checkpoints, reference.as_deref(), episodes)?;
            for c in &out.checkpoints {
                match &c.report {
                    Some(r) => println!("{}: {} gaits, similarity {:.4}", c.checkpoint, r.gaits, r.score.mean),
                    None => println!("{}: no complete gait", c.checkpoint),
                }
            }
            if let Some(p) = &out.pooled {
                println!("pooled: {} gaits, similarity {:.4}", p.gaits, p.score.mean);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
