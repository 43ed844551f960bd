//! Synthetic coauthor networks with planted abilities: `ln q` of every paper
//! is the sum of its authors' `ln a` plus optional Gaussian noise.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, Normal, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Author, Dataset, Publication};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AbilityDistribution {
    LogNormal { mu: f64, sigma: f64 },
    /// `lo ≥ 1` keeps every planted `ln a` non-negative.
    Uniform { lo: f64, hi: f64 },
}

/// How authors are drawn onto a paper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AuthorSelection {
    /// Uniform subset of the author pool.
    Uniform,
    /// Each author carries a Pareto(1, shape) productivity weight; drawing is
    /// weighted and without replacement. Produces a heavy-tailed papers-per-author
    /// distribution with many one-paper authors.
    Pareto { shape: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Size of the author pool. Authors that end up on no paper are left out.
    pub n_authors: usize,
    pub n_papers: usize,
    pub min_authors_per_paper: usize,
    pub max_authors_per_paper: usize,
    pub ability: AbilityDistribution,
    /// Standard deviation of the Gaussian noise added to `ln q`.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Round `q` to an integer `≥ 1`.
    pub integer_citations: bool,
    pub selection: AuthorSelection,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_authors: 50,
            n_papers: 200,
            min_authors_per_paper: 1,
            max_authors_per_paper: 3,
            ability: AbilityDistribution::Uniform { lo: 1.0, hi: 10.0 },
            noise_sigma: 0.0,
            seed: 0,
            integer_citations: false,
            selection: AuthorSelection::Uniform,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_authors == 0 || self.n_papers == 0 {
            return bad("need at least one author and one paper");
        }
        if self.min_authors_per_paper == 0 || self.min_authors_per_paper > self.max_authors_per_paper {
            return bad("authors-per-paper range must satisfy 1 <= min <= max");
        }
        if self.max_authors_per_paper > self.n_authors {
            return Err(Error::InvalidConfig(format!(
                "authors-per-paper upper bound {} exceeds the {} available authors",
                self.max_authors_per_paper, self.n_authors
            )));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return bad("noise sigma must be a finite non-negative number");
        }
        match self.ability {
            AbilityDistribution::LogNormal { mu, sigma } => {
                if !mu.is_finite() || !(sigma >= 0.0) || !sigma.is_finite() {
                    return bad("log-normal ability needs finite mu and sigma >= 0");
                }
            }
            AbilityDistribution::Uniform { lo, hi } => {
                if !(lo >= 1.0) || !(hi >= lo) || !hi.is_finite() {
                    return bad("uniform ability needs 1 <= lo <= hi");
                }
            }
        }
        if let AuthorSelection::Pareto { shape } = self.selection {
            if !(shape > 0.0) || !shape.is_finite() {
                return bad("pareto selection shape must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub dataset: Dataset,
    /// Planted `a` for every author present in the dataset, in author order.
    pub abilities: Vec<(String, f64)>,
}

/// Draws a dataset. Identical configurations yield identical output.
pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let width = config.n_authors.to_string().len();
    let ids: Vec<String> = (0..config.n_authors).map(|i| format!("a{i:0width$}")).collect();

    let planted: Vec<f64> = match config.ability {
        AbilityDistribution::LogNormal { mu, sigma } => {
            let d = LogNormal::new(mu, sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            (0..config.n_authors).map(|_| d.sample(&mut rng)).collect()
        }
        AbilityDistribution::Uniform { lo, hi } => (0..config.n_authors)
            .map(|_| if hi > lo { rng.random_range(lo..hi) } else { lo })
            .collect(),
    };

    let weights = match config.selection {
        AuthorSelection::Uniform => None,
        AuthorSelection::Pareto { shape } => {
            let d = Pareto::new(1.0, shape).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            let w: Vec<f64> = (0..config.n_authors).map(|_| d.sample(&mut rng)).collect();
            Some(w)
        }
    };

    let noise = Normal::new(0.0, config.noise_sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut used = vec![false; config.n_authors];
    let mut papers = Vec::with_capacity(config.n_papers);
    for p in 0..config.n_papers {
        let k = rng.random_range(config.min_authors_per_paper..=config.max_authors_per_paper);
        let members: Vec<usize> = match &weights {
            None => rand::seq::index::sample(&mut rng, config.n_authors, k).into_vec(),
            Some(w) => weighted_without_replacement(&mut rng, w, k)?,
        };
        let mut log_q: f64 = members.iter().map(|&i| planted[i].ln()).sum();
        if config.noise_sigma > 0.0 {
            log_q += noise.sample(&mut rng);
        }
        let mut q = log_q.exp();
        if config.integer_citations {
            q = q.round().max(1.0);
        }
        for &i in &members {
            used[i] = true;
        }
        papers.push(Publication {
            paper_id: format!("p{}", p + 1),
            citations: q,
            author_ids: members.iter().map(|&i| ids[i].clone()).collect(),
        });
    }

    let mut authors = Vec::new();
    let mut abilities = Vec::new();
    for i in (0..config.n_authors).filter(|&i| used[i]) {
        authors.push(Author::new(ids[i].clone(), ids[i].clone()));
        abilities.push((ids[i].clone(), planted[i]));
    }
    let provenance = format!(
        "synthetic: seed={} authors={} papers={} noise={}",
        config.seed, config.n_authors, config.n_papers, config.noise_sigma
    );
    Ok(SynthOutput {
        dataset: Dataset::new(authors, papers, provenance)?,
        abilities,
    })
}

fn weighted_without_replacement<R: Rng>(rng: &mut R, weights: &[f64], k: usize) -> Result<Vec<usize>> {
    let mut w = weights.to_vec();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let idx = WeightedIndex::new(&w).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let i = idx.sample(rng);
        out.push(i);
        w[i] = 0.0;
    }
    Ok(out)
}

/// `author_id,ability,log_ability` CSV of planted values.
pub fn write_ground_truth<W: Write>(abilities: &[(String, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["author_id", "ability", "log_ability"])?;
    for (id, a) in abilities {
        w.write_record([id.clone(), a.to_string(), a.ln().to_string()])?;
    }
    w.flush()?;
    Ok(())
}
