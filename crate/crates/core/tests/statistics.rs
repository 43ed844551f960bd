mod common;

use coauthor_core::ingest::{prune, PruneOptions};
use coauthor_core::metrics::*;
use coauthor_core::synth::{generate, AbilityDistribution, AuthorSelection, SynthConfig};
use coauthor_core::*;
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn sample(rng: &mut rand_chacha::ChaCha8Rng, n: usize, tied: bool) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if tied {
                rng.random_range(0..6) as f64
            } else {
                rng.random_range(-10.0..10.0)
            }
        })
        .collect()
}

#[test]
fn pearson_matches_two_pass_formula() {
    let mut rng = rng(21);
    for i in 0..100 {
        let n = rng.random_range(2..80);
        let xs = sample(&mut rng, n, i % 2 == 0);
        let ys = sample(&mut rng, n, i % 3 == 0);
        let (Ok(got), want) = (pearson(&xs, &ys), two_pass_pearson(&xs, &ys)) else {
            continue;
        };
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
}

#[test]
fn spearman_matches_brute_force_ranks() {
    let mut rng = rng(22);
    let mut checked = 0;
    for i in 0..100 {
        let n = rng.random_range(2..60);
        let xs = sample(&mut rng, n, i % 2 == 0);
        let ys = sample(&mut rng, n, true);
        assert_eq!(average_ranks(&xs), brute_force_ranks(&xs));
        if let Ok(got) = spearman(&xs, &ys) {
            let want = brute_force_spearman(&xs, &ys);
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
            checked += 1;
        }
    }
    assert!(checked > 90);
}

#[test]
fn fifty_point_sample() {
    let mut rng = rng(23);
    let xs = sample(&mut rng, 50, false);
    let ys: Vec<f64> = xs.iter().map(|x| x + rng.random_range(-3.0..3.0)).collect();
    assert!((pearson(&xs, &ys).unwrap() - two_pass_pearson(&xs, &ys)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn correlations_are_symmetric_and_invariant(
        pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..40),
        scale in 0.1f64..10.0,
        shift in -50.0f64..50.0,
    ) {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        if let (Ok(r), Ok(rho)) = (pearson(&xs, &ys), spearman(&xs, &ys)) {
            prop_assert!((-1.0..=1.0).contains(&r) && (-1.0..=1.0).contains(&rho));
            prop_assert!((r - pearson(&ys, &xs).unwrap()).abs() < 1e-12);
            prop_assert!((rho - spearman(&ys, &xs).unwrap()).abs() < 1e-12);
            let affine: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
            prop_assert!((r - pearson(&affine, &ys).unwrap()).abs() < 1e-9);
            let monotone: Vec<f64> = xs.iter().map(|x| (x / 1e3).exp() + x.powi(3)).collect();
            prop_assert!((rho - spearman(&monotone, &ys).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn h_index_bounded(cites in prop::collection::vec(0u32..200, 1..60)) {
        let c: Vec<f64> = cites.iter().map(|&v| v as f64).collect();
        let h = h_index(&c);
        prop_assert!(h <= c.len());
        prop_assert!(h as f64 <= c.iter().cloned().fold(0.0, f64::max));
        // Definition check.
        prop_assert!(c.iter().filter(|&&v| v >= h as f64).count() >= h);
        prop_assert!(c.iter().filter(|&&v| v >= (h + 1) as f64).count() < h + 1);
    }

    #[test]
    fn histogram_conserves_population(values in prop::collection::vec(0.0f64..5000.0, 1..300), width in 0.5f64..50.0) {
        let h = histogram(&values, width, Quantity::PaperCitations).unwrap();
        prop_assert_eq!(h.total(), values.len());
        prop_assert_eq!(h.bin_edges.len(), h.counts.len() + 1);
        prop_assert!(h.bin_edges.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn heavy_tailed_histogram_conserves_count() {
    let mut rng = rng(24);
    let values: Vec<f64> = (0..5000).map(|_| (rng.random_range(0.0f64..1.0).powf(-1.5)).floor()).collect();
    let h = histogram(&values, 1.0, Quantity::PaperCitations).unwrap();
    assert_eq!(h.total(), values.len());
}

fn fitted_stats(pruned: &Dataset, original: &Dataset) -> Vec<AuthorStats<f64>> {
    let problem = Problem::from_dataset(pruned, LogTransform::Log).unwrap();
    let (x, _) = solve(&problem, &SolveConfig::default()).unwrap();
    author_stats(pruned, original, &x).unwrap()
}

#[test]
fn fractional_counting_conserves_citations() {
    for seed in 0..10 {
        let cfg = SynthConfig {
            n_authors: 300,
            n_papers: 250,
            max_authors_per_paper: 5,
            ability: AbilityDistribution::LogNormal { mu: 0.5, sigma: 0.6 },
            noise_sigma: 0.5,
            seed,
            integer_citations: true,
            selection: AuthorSelection::Pareto { shape: 1.3 },
            ..SynthConfig::default()
        };
        let original = generate(&cfg).unwrap().dataset;
        let total_q = original.total_citations();

        let unpruned = fitted_stats(&original, &original);
        let incl: f64 = unpruned.iter().map(|s| s.frac_citations_incl).sum();
        assert!((incl - total_q).abs() <= 1e-9 * total_q);

        let (pruned, _) = prune(&original, PruneOptions::default()).unwrap();
        let stats = fitted_stats(&pruned, &original);
        let excl: f64 = stats.iter().map(|s| s.frac_citations_excl).sum();
        let surviving = pruned.total_citations();
        assert!((excl - surviving).abs() <= 1e-9 * surviving);
        for s in &stats {
            assert!(s.n >= 1 && s.h_index <= s.n);
            assert!(s.frac_citations_incl <= s.frac_citations_excl + 1e-9);
            assert!(s.frac_citations_excl <= s.total_citations + 1e-9);
        }
    }
}
