use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "coauthor", version, about = "Rank authors by fitted ability on a coauthor network")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit abilities on a publication file and write rankings and reports.
    Rank(RankArgs),
    /// Generate a synthetic dataset with planted abilities.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Constrained,
    Unconstrained,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Fractional,
    Ones,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Jsonl)]
    pub format: InputFormat,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub drop_zero_cited: bool,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub drop_single_occurrence: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Constrained)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = InitArg::Fractional)]
    pub init: InitArg,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub obj_tol: f64,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Regress on ln(q + 1) instead of ln q.
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub log_offset: bool,
    /// Fold case, punctuation, and whitespace in author names.
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub fold_names: bool,
    /// `variant,canonical` CSV of author-name aliases.
    #[arg(long)]
    pub aliases: Option<PathBuf>,
    /// Width of histogram bins.
    #[arg(long, default_value_t = 1.0)]
    pub hist_bin_width: f64,
    /// Ground-truth CSV from `synth`; adds a recovery section to the report.
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    pub authors: usize,
    #[arg(long, default_value_t = 200)]
    pub papers: usize,
    /// Inclusive range `MIN..MAX`, or a single count.
    #[arg(long, default_value = "1..3")]
    pub authors_per_paper: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Standard deviation of the noise on ln q.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// `uniform:LO,HI` or `lognormal:MU,SIGMA`.
    #[arg(long, default_value = "uniform:1,10")]
    pub ability: String,
    /// `uniform` or `pareto:SHAPE`.
    #[arg(long, default_value = "uniform")]
    pub selection: String,
    /// Round citation counts to integers >= 1.
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub integer: bool,
    #[arg(long, default_value = "synth")]
    pub out: PathBuf,
}
