//! Classical citation indicators and correlation statistics used to compare
//! the ability ranking with citation-based rankings.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::scalar::Scalar;
use crate::solver::AbilityVector;

/// Per-author indicators over the regression sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthorStats<T> {
    pub author_id: String,
    pub display_name: String,
    /// Papers in the pruned sample.
    pub n: usize,
    pub total_citations: f64,
    /// Citations split among coauthors that survived pruning.
    pub frac_citations_excl: f64,
    /// Citations split among all original coauthors.
    pub frac_citations_incl: f64,
    pub h_index: usize,
    pub log_ability: T,
    pub ability: T,
    /// `n · a`.
    pub na_score: T,
}

/// Largest `h` such that `h` of the given papers have at least `h` citations.
pub fn h_index(citations: &[f64]) -> usize {
    let mut sorted = citations.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted
        .iter()
        .enumerate()
        .take_while(|(i, &c)| c >= (*i + 1) as f64)
        .count()
}

/// Computes [`AuthorStats`] for every author of `pruned`, in its author order.
///
/// `original` supplies the full coauthor counts for the inclusive fractional
/// variant and must contain every paper of `pruned` (matched by paper id).
pub fn author_stats<T: Scalar>(
    pruned: &Dataset,
    original: &Dataset,
    abilities: &AbilityVector<T>,
) -> Result<Vec<AuthorStats<T>>> {
    let present: HashMap<&str, usize> = pruned
        .authors
        .iter()
        .enumerate()
        .map(|(i, a)| (a.author_id.as_str(), i))
        .collect();
    if let Some((id, _)) = abilities.iter().find(|(id, _)| !present.contains_key(id)) {
        return Err(Error::Inconsistent(format!(
            "author `{id}` has an ability but is absent from the pruned dataset"
        )));
    }
    let original_sizes: HashMap<&str, usize> = original
        .papers
        .iter()
        .map(|p| (p.paper_id.as_str(), p.n_authors()))
        .collect();

    let mut per_author: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); pruned.n_authors()];
    for p in &pruned.papers {
        let full = *original_sizes.get(p.paper_id.as_str()).ok_or_else(|| {
            Error::Inconsistent(format!("paper `{}` is missing from the original dataset", p.paper_id))
        })?;
        let kept = p.n_authors();
        for a in &p.author_ids {
            per_author[present[a.as_str()]].push((p.citations, p.citations / kept as f64, p.citations / full as f64));
        }
    }

    pruned
        .authors
        .iter()
        .zip(per_author)
        .map(|(author, papers)| {
            let x = abilities.get(&author.author_id).ok_or_else(|| {
                Error::Inconsistent(format!("author `{}` has no fitted ability", author.author_id))
            })?;
            let n = papers.len();
            let cites: Vec<f64> = papers.iter().map(|p| p.0).collect();
            let ability = x.exp();
            Ok(AuthorStats {
                author_id: author.author_id.clone(),
                display_name: author.display_name.clone(),
                n,
                total_citations: cites.iter().sum(),
                frac_citations_excl: papers.iter().map(|p| p.1).sum(),
                frac_citations_incl: papers.iter().map(|p| p.2).sum(),
                h_index: h_index(&cites),
                log_ability: x,
                ability,
                na_score: T::of(n as f64) * ability,
            })
        })
        .collect()
}

/// Descending `n · a`, ties broken by ascending author id.
pub fn rank_by_na<T: Scalar>(stats: &[AuthorStats<T>]) -> Vec<&AuthorStats<T>> {
    let mut ranked: Vec<&AuthorStats<T>> = stats.iter().collect();
    ranked.sort_by(|a, b| na_order(a, b));
    ranked
}

fn na_order<T: Scalar>(a: &AuthorStats<T>, b: &AuthorStats<T>) -> Ordering {
    b.na_score
        .lossy_f64()
        .total_cmp(&a.na_score.lossy_f64())
        .then_with(|| a.author_id.cmp(&b.author_id))
}

/// Product-moment correlation, accumulated with a single-pass co-moment
/// update.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            what: "paired observations",
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two observations"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("correlation input".into()));
    }
    let (mut mx, mut my) = (T::zero(), T::zero());
    let (mut sxx, mut syy, mut sxy) = (T::zero(), T::zero(), T::zero());
    for (k, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let n = T::of((k + 1) as f64);
        let dx = x - mx;
        let dy = y - my;
        mx = mx + dx / n;
        my = my + dy / n;
        sxx = sxx + dx * (x - mx);
        syy = syy + dy * (y - my);
        sxy = sxy + dx * (y - my);
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return Err(Error::UndefinedCorrelation("constant input"));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

/// 1-based ranks with tied values sharing the average of their positions.
pub fn average_ranks<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].lossy_f64().total_cmp(&values[b].lossy_f64()));
    let mut ranks = vec![T::zero(); values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end (0-based) share rank mean(start+1..=end).
        let rank = T::of((start + end + 1) as f64 / 2.0);
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Rank correlation: Pearson's coefficient of the average-rank vectors.
pub fn spearman<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            what: "paired observations",
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("correlation input".into()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    PaperCitations,
    AuthorCitations,
    /// Rounded to the nearest integer before binning.
    NaValues,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram<T> {
    pub quantity: Quantity,
    /// `counts.len() + 1` ascending edges; bin `k` is `[edges[k], edges[k+1])`.
    pub bin_edges: Vec<T>,
    pub counts: Vec<usize>,
}

impl<T: Scalar> Histogram<T> {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Uniform-width histogram starting at `floor(min)`.
pub fn histogram<T: Scalar>(values: &[T], bin_width: T, quantity: Quantity) -> Result<Histogram<T>> {
    if !(bin_width > T::zero()) || !bin_width.is_finite() {
        return Err(Error::InvalidConfig("histogram bin width must be positive".into()));
    }
    if values.is_empty() {
        return Err(Error::InvalidConfig("histogram of an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("histogram input".into()));
    }
    let values: Vec<T> = match quantity {
        Quantity::NaValues => values.iter().map(|v| v.round()).collect(),
        _ => values.to_vec(),
    };
    let (min, max) = values
        .iter()
        .fold((values[0], values[0]), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let lo = min.floor();
    let n_bins = ((max - lo) / bin_width).floor().to_usize().unwrap_or(0) + 1;
    let mut counts = vec![0usize; n_bins];
    for &v in &values {
        let k = ((v - lo) / bin_width).floor().to_usize().unwrap_or(0).min(n_bins - 1);
        counts[k] += 1;
    }
    let bin_edges = (0..=n_bins).map(|k| lo + bin_width * T::of(k as f64)).collect();
    Ok(Histogram {
        quantity,
        bin_edges,
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "k")]
pub enum Scope {
    TopK(usize),
    FullDataset,
}

/// Correlations between `n · a` and citation indicators. A coefficient is
/// `None` when it is undefined (constant input or fewer than two authors).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport<T> {
    pub scope: Scope,
    pub n_authors: usize,
    pub pearson_na_total: Option<T>,
    pub pearson_na_frac_excl: Option<T>,
    pub pearson_na_frac_incl: Option<T>,
    pub spearman_na_total: Option<T>,
    pub spearman_na_frac_excl: Option<T>,
    pub spearman_na_frac_incl: Option<T>,
}

pub fn compare<T: Scalar>(stats: &[AuthorStats<T>], scope: Scope) -> ComparisonReport<T> {
    let mut ranked = rank_by_na(stats);
    if let Scope::TopK(k) = scope {
        ranked.truncate(k);
    }
    let na: Vec<T> = ranked.iter().map(|s| s.na_score).collect();
    let column = |f: fn(&AuthorStats<T>) -> f64| -> Vec<T> { ranked.iter().map(|s| T::of(f(s))).collect() };
    let total = column(|s| s.total_citations);
    let excl = column(|s| s.frac_citations_excl);
    let incl = column(|s| s.frac_citations_incl);
    ComparisonReport {
        scope,
        n_authors: ranked.len(),
        pearson_na_total: pearson(&na, &total).ok(),
        pearson_na_frac_excl: pearson(&na, &excl).ok(),
        pearson_na_frac_incl: pearson(&na, &incl).ok(),
        spearman_na_total: spearman(&na, &total).ok(),
        spearman_na_frac_excl: spearman(&na, &excl).ok(),
        spearman_na_frac_incl: spearman(&na, &incl).ok(),
    }
}
