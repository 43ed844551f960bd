use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use coauthor_core::ingest::{
    normalize_names, parse_records, prune, read_alias_map, records_to_dataset, Format, NormalizationRules,
    ParseWarning, PruneOptions, PruneReport,
};
use coauthor_core::metrics::{author_stats, compare, histogram, rank_by_na, spearman, AuthorStats, ComparisonReport, Histogram, Quantity, Scope};
use coauthor_core::{
    Dataset, Initialization, LogTransform, Problem, SolveConfig, SolveDiagnostics, SolveMode, StopReason,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{InitArg, InputFormat, ModeArg, RankArgs};
use crate::{Failure, TOOL_VERSION};

/// Everything that determines the outputs of a `rank` run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub input_path: String,
    pub format: &'static str,
    pub content_hash: String,
    pub drop_zero_cited: bool,
    pub drop_single_occurrence: bool,
    pub log_offset: bool,
    pub fold_names: bool,
    pub aliases: Option<String>,
    pub mode: &'static str,
    pub init: &'static str,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub objective_tolerance: f64,
    pub top: usize,
    pub hist_bin_width: f64,
    pub output_dir: String,
    pub tool_version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
struct SolveSummary {
    converged: bool,
    stop_reason: StopReason,
    iterations: usize,
    residual: f64,
    kkt_violation: f64,
    initial_objective: f64,
    trace_length: usize,
    active_constraints: usize,
    rank: Option<usize>,
}

impl SolveSummary {
    fn new(diag: &SolveDiagnostics<f64>, converged: bool, iterations: usize, residual: f64) -> Self {
        Self {
            converged,
            stop_reason: diag.stop_reason,
            iterations,
            residual,
            kkt_violation: diag.kkt_violation,
            initial_objective: diag.objective_trace[0],
            trace_length: diag.objective_trace.len(),
            active_constraints: diag.active_constraints.len(),
            rank: diag.rank,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct DatasetSummary {
    original_papers: usize,
    original_authors: usize,
    pruned_papers: usize,
    pruned_authors: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparisons {
    pub top_k: ComparisonReport<f64>,
    pub full_dataset: ComparisonReport<f64>,
}

/// Fit quality against planted abilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recovery {
    pub matched_authors: usize,
    pub max_relative_ability_error: f64,
    pub spearman_log_ability: Option<f64>,
    pub planted_best_by_na: String,
    pub fitted_best_by_na: String,
}

#[derive(Debug, Clone, Serialize)]
struct Report<'a> {
    tool_version: &'static str,
    mode: &'static str,
    input_hash: &'a str,
    dataset: DatasetSummary,
    prune: PruneReport,
    solve: SolveSummary,
    comparison: &'a Comparisons,
    inseparable_groups: &'a [Vec<String>],
    parse_warnings: Vec<String>,
    recovery: Option<&'a Recovery>,
}

/// Results of one solve mode.
#[derive(Debug, Clone)]
pub struct ModeOutcome {
    pub mode: SolveMode,
    pub stats: Vec<AuthorStats<f64>>,
    pub comparisons: Comparisons,
    pub converged: bool,
    pub residual: f64,
    pub diagnostics: SolveDiagnostics<f64>,
    pub recovery: Option<Recovery>,
    pub dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RankOutcome {
    pub manifest: RunManifest,
    pub original: Dataset,
    pub pruned: Dataset,
    pub prune_report: PruneReport,
    pub modes: Vec<ModeOutcome>,
}

fn manifest(args: &RankArgs, hash: String) -> RunManifest {
    RunManifest {
        input_path: args.input.display().to_string(),
        format: match args.format {
            InputFormat::Jsonl => "jsonl",
            InputFormat::Csv => "csv",
        },
        content_hash: hash,
        drop_zero_cited: args.drop_zero_cited,
        drop_single_occurrence: args.drop_single_occurrence,
        log_offset: args.log_offset,
        fold_names: args.fold_names,
        aliases: args.aliases.as_ref().map(|p| p.display().to_string()),
        mode: match args.mode {
            ModeArg::Constrained => "constrained",
            ModeArg::Unconstrained => "unconstrained",
            ModeArg::Both => "both",
        },
        init: match args.init {
            InitArg::Fractional => "fractional",
            InitArg::Ones => "ones",
        },
        max_iterations: args.max_iters,
        gradient_tolerance: args.grad_tol,
        objective_tolerance: args.obj_tol,
        top: args.top,
        hist_bin_width: args.hist_bin_width,
        output_dir: args.out.display().to_string(),
        tool_version: TOOL_VERSION,
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn warning_lines(warnings: &[ParseWarning]) -> Vec<String> {
    warnings.iter().map(|w| format!("line {}: {}", w.line, w.message)).collect()
}

fn read_ground_truth(path: &Path) -> Result<HashMap<String, f64>, Failure> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("reading ground truth {}", path.display()))
        .map_err(Failure::input)?;
    let mut out = HashMap::new();
    for row in reader.records() {
        let row = row.map_err(Failure::input)?;
        let id = row.get(0).ok_or_else(|| Failure::input(anyhow!("ground truth row without id")))?;
        let a: f64 = row
            .get(1)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Failure::input(anyhow!("ground truth row for `{id}` has no ability")))?;
        out.insert(id.to_string(), a);
    }
    Ok(out)
}

fn recovery(stats: &[AuthorStats<f64>], truth: &HashMap<String, f64>) -> Recovery {
    let matched: Vec<(&AuthorStats<f64>, f64)> = stats
        .iter()
        .filter_map(|s| truth.get(&s.author_id).map(|&a| (s, a)))
        .collect();
    let max_rel = matched
        .iter()
        .map(|(s, a)| (s.ability - a).abs() / a)
        .fold(0.0, f64::max);
    let fitted: Vec<f64> = matched.iter().map(|(s, _)| s.log_ability).collect();
    let planted: Vec<f64> = matched.iter().map(|(_, a)| a.ln()).collect();
    let planted_best = matched
        .iter()
        .map(|(s, a)| (s.n as f64 * a, s.author_id.as_str()))
        .max_by(|x, y| x.0.total_cmp(&y.0).then_with(|| y.1.cmp(x.1)))
        .map(|(_, id)| id.to_string())
        .unwrap_or_default();
    Recovery {
        matched_authors: matched.len(),
        max_relative_ability_error: max_rel,
        spearman_log_ability: spearman(&fitted, &planted).ok(),
        planted_best_by_na: planted_best,
        fitted_best_by_na: rank_by_na(stats).first().map(|s| s.author_id.clone()).unwrap_or_default(),
    }
}

/// Runs the full pipeline and writes every output file. The top-k table goes
/// to `stdout`.
pub fn cmd_rank<W: Write>(args: &RankArgs, stdout: &mut W) -> Result<RankOutcome, Failure> {
    if !(args.hist_bin_width > 0.0) {
        return Err(Failure::input(anyhow!("--hist-bin-width must be positive")));
    }
    let bytes = fs::read(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))
        .map_err(Failure::input)?;
    let hash = hex(&Sha256::digest(&bytes));
    let manifest = manifest(args, hash.clone());

    let format = match args.format {
        InputFormat::Jsonl => Format::Jsonl,
        InputFormat::Csv => Format::Csv,
    };
    let parsed = parse_records(&bytes[..], format)
        .with_context(|| format!("parsing {}", args.input.display()))
        .map_err(Failure::input)?;
    let warnings = warning_lines(&parsed.warnings);
    for w in &warnings {
        eprintln!("warning: {}: {w}", args.input.display());
    }
    if parsed.records.is_empty() {
        let last = parsed.warnings.last().map_or(0, |w| w.line);
        return Err(Failure::input(anyhow!(
            "{}: line {last}: no valid records in input",
            args.input.display()
        )));
    }

    let mut rules = if args.fold_names {
        NormalizationRules::folding()
    } else {
        NormalizationRules::default()
    };
    if let Some(path) = &args.aliases {
        let file = File::open(path)
            .with_context(|| format!("opening alias map {}", path.display()))
            .map_err(Failure::input)?;
        rules.aliases = read_alias_map(file).map_err(Failure::input)?;
    }
    let records = normalize_names(parsed.records, &rules).map_err(Failure::input)?;
    let original = records_to_dataset(&records, args.input.display().to_string())?;

    let (pruned, prune_report) = prune(
        &original,
        PruneOptions {
            drop_zero_cited: args.drop_zero_cited,
            drop_single_occurrence: args.drop_single_occurrence,
        },
    )?;
    let transform = if args.log_offset {
        LogTransform::LogPlusOne
    } else {
        LogTransform::Log
    };
    let problem = Problem::<f64>::from_dataset(&pruned, transform)?;
    let truth = args.ground_truth.as_deref().map(read_ground_truth).transpose()?;

    let modes: Vec<SolveMode> = match args.mode {
        ModeArg::Constrained => vec![SolveMode::Constrained],
        ModeArg::Unconstrained => vec![SolveMode::Unconstrained],
        ModeArg::Both => vec![SolveMode::Constrained, SolveMode::Unconstrained],
    };

    fs::create_dir_all(&args.out)?;
    write_json(&args.out.join("manifest.json"), &manifest)?;
    let paper_cites: Vec<f64> = pruned.papers.iter().map(|p| p.citations).collect();
    write_histogram(
        &args.out.join("hist_paper_citations.csv"),
        &histogram(&paper_cites, args.hist_bin_width, Quantity::PaperCitations)?,
    )?;

    let summary = DatasetSummary {
        original_papers: original.n_papers(),
        original_authors: original.n_authors(),
        pruned_papers: pruned.n_papers(),
        pruned_authors: pruned.n_authors(),
    };

    let mut outcomes = Vec::new();
    for mode in modes {
        let config = SolveConfig {
            mode,
            max_iterations: args.max_iters,
            gradient_tolerance: args.grad_tol,
            objective_tolerance: args.obj_tol,
            initialization: match args.init {
                InitArg::Fractional => Initialization::FractionalCitations,
                InitArg::Ones => Initialization::Ones,
            },
            polish: true,
        };
        let (abilities, diagnostics) = coauthor_core::solve(&problem, &config)?;
        if !abilities.converged {
            eprintln!(
                "warning: {} fit stopped without meeting --grad-tol ({:?}, KKT violation {:e})",
                mode.as_str(),
                diagnostics.stop_reason,
                diagnostics.kkt_violation
            );
        }
        for group in &diagnostics.inseparable_groups {
            eprintln!("warning: inseparable coauthors (identical paper sets): {}", group.join(", "));
        }
        let stats = author_stats(&pruned, &original, &abilities)?;
        let comparisons = Comparisons {
            top_k: compare(&stats, Scope::TopK(args.top)),
            full_dataset: compare(&stats, Scope::FullDataset),
        };
        let recovery = truth.as_ref().map(|t| recovery(&stats, t));

        let dir = if args.mode == ModeArg::Both {
            args.out.join(mode.as_str())
        } else {
            args.out.clone()
        };
        fs::create_dir_all(&dir)?;
        write_abilities(&dir.join("abilities.csv"), &stats, abilities.converged)?;
        write_stats(&dir.join("stats.csv"), &stats)?;
        let author_cites: Vec<f64> = stats.iter().map(|s| s.total_citations).collect();
        write_histogram(
            &dir.join("hist_author_citations.csv"),
            &histogram(&author_cites, args.hist_bin_width, Quantity::AuthorCitations)?,
        )?;
        let na: Vec<f64> = stats.iter().map(|s| s.na_score).collect();
        write_histogram(&dir.join("hist_na.csv"), &histogram(&na, args.hist_bin_width, Quantity::NaValues)?)?;
        write_json(
            &dir.join("report.json"),
            &Report {
                tool_version: TOOL_VERSION,
                mode: mode.as_str(),
                input_hash: &hash,
                dataset: summary.clone(),
                prune: prune_report,
                solve: SolveSummary::new(&diagnostics, abilities.converged, abilities.iterations, abilities.residual),
                comparison: &comparisons,
                inseparable_groups: &diagnostics.inseparable_groups,
                parse_warnings: warnings.clone(),
                recovery: recovery.as_ref(),
            },
        )?;

        print_table(stdout, mode, &stats, args.top, abilities.converged)?;
        if let Some(r) = &recovery {
            writeln!(
                stdout,
                "recovery: {} authors, max relative ability error {:.3e}, planted best {} / fitted best {}",
                r.matched_authors, r.max_relative_ability_error, r.planted_best_by_na, r.fitted_best_by_na
            )?;
        }
        outcomes.push(ModeOutcome {
            mode,
            stats,
            comparisons,
            converged: abilities.converged,
            residual: abilities.residual,
            diagnostics,
            recovery,
            dir,
        });
    }

    Ok(RankOutcome {
        manifest,
        original,
        pruned,
        prune_report,
        modes: outcomes,
    })
}

fn print_table<W: Write>(
    out: &mut W,
    mode: SolveMode,
    stats: &[AuthorStats<f64>],
    top: usize,
    converged: bool,
) -> std::io::Result<()> {
    writeln!(
        out,
        "# {} fit{}",
        mode.as_str(),
        if converged { "" } else { " (not converged)" }
    )?;
    writeln!(
        out,
        "{:>4}  {:<30} {:>5} {:>8} {:>10} {:>10} {:>10} {:>10} {:>4}",
        "rank", "author", "n", "na", "a", "citations", "frac_excl", "frac_incl", "h"
    )?;
    for (i, s) in rank_by_na(stats).into_iter().take(top).enumerate() {
        writeln!(
            out,
            "{:>4}  {:<30} {:>5} {:>8.0} {:>10.3} {:>10} {:>10.0} {:>10.0} {:>4}",
            i + 1,
            s.display_name,
            s.n,
            s.na_score,
            s.ability,
            s.total_citations,
            s.frac_citations_excl,
            s.frac_citations_incl,
            s.h_index
        )?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(Failure::input)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, Failure> {
    csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(Failure::input)
}

fn write_abilities(path: &Path, stats: &[AuthorStats<f64>], converged: bool) -> Result<(), Failure> {
    let mut w = csv_writer(path)?;
    let res = (|| -> csv::Result<()> {
        w.write_record(["author_id", "n", "a", "na", "converged"])?;
        for s in rank_by_na(stats) {
            w.write_record([
                s.author_id.clone(),
                s.n.to_string(),
                s.ability.to_string(),
                s.na_score.to_string(),
                converged.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(Failure::input)
}

fn write_stats(path: &Path, stats: &[AuthorStats<f64>]) -> Result<(), Failure> {
    let mut w = csv_writer(path)?;
    let res = (|| -> csv::Result<()> {
        w.write_record([
            "author_id",
            "display_name",
            "n",
            "total_citations",
            "frac_citations_excl",
            "frac_citations_incl",
            "h_index",
            "log_ability",
            "a",
            "na",
        ])?;
        for s in rank_by_na(stats) {
            w.write_record([
                s.author_id.clone(),
                s.display_name.clone(),
                s.n.to_string(),
                s.total_citations.to_string(),
                s.frac_citations_excl.to_string(),
                s.frac_citations_incl.to_string(),
                s.h_index.to_string(),
                s.log_ability.to_string(),
                s.ability.to_string(),
                s.na_score.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(Failure::input)
}

fn write_histogram(path: &Path, h: &Histogram<f64>) -> Result<(), Failure> {
    let mut w = csv_writer(path)?;
    let res = (|| -> csv::Result<()> {
        w.write_record(["bin_start", "bin_end", "count"])?;
        for (k, count) in h.counts.iter().enumerate() {
            w.write_record([h.bin_edges[k].to_string(), h.bin_edges[k + 1].to_string(), count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(Failure::input)
}
