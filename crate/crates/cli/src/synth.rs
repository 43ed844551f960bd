use std::fs::{self, File};
use std::io::BufWriter;

use anyhow::anyhow;
use coauthor_core::ingest::write_jsonl;
use coauthor_core::synth::{generate, write_ground_truth, AbilityDistribution, AuthorSelection, SynthConfig};

use crate::args::SynthArgs;
use crate::Failure;

pub const DATASET_FILE: &str = "dataset.jsonl";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";

fn parse_pair(spec: &str) -> Option<(f64, f64)> {
    let (a, b) = spec.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

pub fn parse_range(spec: &str) -> Option<(usize, usize)> {
    match spec.split_once("..") {
        Some((lo, hi)) => {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            Some((lo.trim().parse().ok()?, hi.trim().parse().ok()?))
        }
        None => {
            let k = spec.trim().parse().ok()?;
            Some((k, k))
        }
    }
}

pub fn parse_ability(spec: &str) -> Option<AbilityDistribution> {
    let (kind, params) = spec.split_once(':')?;
    let (a, b) = parse_pair(params)?;
    match kind.trim().to_ascii_lowercase().as_str() {
        "uniform" => Some(AbilityDistribution::Uniform { lo: a, hi: b }),
        "lognormal" => Some(AbilityDistribution::LogNormal { mu: a, sigma: b }),
        _ => None,
    }
}

pub fn parse_selection(spec: &str) -> Option<AuthorSelection> {
    match spec.split_once(':') {
        None if spec.trim().eq_ignore_ascii_case("uniform") => Some(AuthorSelection::Uniform),
        Some((kind, shape)) if kind.trim().eq_ignore_ascii_case("pareto") => Some(AuthorSelection::Pareto {
            shape: shape.trim().parse().ok()?,
        }),
        _ => None,
    }
}

pub fn config_from_args(args: &SynthArgs) -> Result<SynthConfig, Failure> {
    let (min, max) = parse_range(&args.authors_per_paper)
        .ok_or_else(|| Failure::input(anyhow!("bad --authors-per-paper `{}`", args.authors_per_paper)))?;
    let ability = parse_ability(&args.ability)
        .ok_or_else(|| Failure::input(anyhow!("bad --ability `{}`", args.ability)))?;
    let selection = parse_selection(&args.selection)
        .ok_or_else(|| Failure::input(anyhow!("bad --selection `{}`", args.selection)))?;
    let config = SynthConfig {
        n_authors: args.authors,
        n_papers: args.papers,
        min_authors_per_paper: min,
        max_authors_per_paper: max,
        ability,
        noise_sigma: args.noise,
        seed: args.seed,
        integer_citations: args.integer,
        selection,
    };
    config.validate().map_err(Failure::input)?;
    Ok(config)
}

/// Writes `dataset.jsonl` and `ground_truth.csv` into `args.out`.
pub fn cmd_synth(args: &SynthArgs) -> Result<(), Failure> {
    let config = config_from_args(args)?;
    let out = generate(&config).map_err(Failure::input)?;
    fs::create_dir_all(&args.out)?;
    write_jsonl(&out.dataset, BufWriter::new(File::create(args.out.join(DATASET_FILE))?))?;
    write_ground_truth(&out.abilities, File::create(args.out.join(GROUND_TRUTH_FILE))?)?;
    eprintln!(
        "wrote {} papers by {} authors to {}",
        out.dataset.n_papers(),
        out.dataset.n_authors(),
        args.out.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("5..10"), Some((5, 10)));
        assert_eq!(parse_range("1..=3"), Some((1, 3)));
        assert_eq!(parse_range("4"), Some((4, 4)));
        assert_eq!(parse_range("a..b"), None);
    }

    #[test]
    fn distributions() {
        assert_eq!(parse_ability("uniform:1,10"), Some(AbilityDistribution::Uniform { lo: 1.0, hi: 10.0 }));
        assert_eq!(parse_ability("lognormal:0.5, 0.6"), Some(AbilityDistribution::LogNormal { mu: 0.5, sigma: 0.6 }));
        assert_eq!(parse_ability("gamma:1,2"), None);
        assert_eq!(parse_selection("pareto:1.5"), Some(AuthorSelection::Pareto { shape: 1.5 }));
        assert_eq!(parse_selection("uniform"), Some(AuthorSelection::Uniform));
        assert_eq!(parse_selection("zipf"), None);
    }
}
