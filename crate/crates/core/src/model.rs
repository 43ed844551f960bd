//! Domain types: publications, authors, datasets, and the sparse binary
//! authorship matrix `F` with `F[paper, author] = 1` iff the author is listed
//! on the paper.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One paper: its quality indicator (citation count) and its author list.
///
/// Author order is preserved for reporting but ignored by every computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Publication {
    pub paper_id: String,
    /// Citation count `q`. Integer-valued for real data; synthetic data may
    /// carry real values.
    pub citations: f64,
    pub author_ids: Vec<String>,
}

impl Publication {
    pub fn new(
        paper_id: impl Into<String>,
        citations: f64,
        author_ids: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        Self {
            paper_id: paper_id.into(),
            citations,
            author_ids: author_ids.into_iter().map(Into::into).collect(),
        }
    }

    pub fn n_authors(&self) -> usize {
        self.author_ids.len()
    }

    fn validate(&self) -> Result<()> {
        if self.author_ids.is_empty() {
            return Err(Error::EmptyAuthorList(self.paper_id.clone()));
        }
        if !self.citations.is_finite() || self.citations < 0.0 {
            return Err(Error::InvalidCitations(self.paper_id.clone()));
        }
        let mut seen = HashSet::with_capacity(self.author_ids.len());
        for a in &self.author_ids {
            if !seen.insert(a.as_str()) {
                return Err(Error::DuplicateAuthor {
                    paper: self.paper_id.clone(),
                    author: a.clone(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Author {
    pub author_id: String,
    pub display_name: String,
}

impl Author {
    pub fn new(author_id: impl Into<String>, display_name: impl Into<String>) -> Self {
        Self {
            author_id: author_id.into(),
            display_name: display_name.into(),
        }
    }
}

/// A collection of papers and the authors they reference.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub authors: Vec<Author>,
    pub papers: Vec<Publication>,
    pub provenance: String,
}

impl Dataset {
    /// Builds a dataset and checks its invariants.
    pub fn new(authors: Vec<Author>, papers: Vec<Publication>, provenance: impl Into<String>) -> Result<Self> {
        let ds = Self {
            authors,
            papers,
            provenance: provenance.into(),
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Builds a dataset from papers alone; authors are collected in first-seen
    /// order and use their id as display name.
    pub fn from_papers(papers: Vec<Publication>, provenance: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut authors = Vec::new();
        for p in &papers {
            for a in &p.author_ids {
                if seen.insert(a.clone()) {
                    authors.push(Author::new(a.clone(), a.clone()));
                }
            }
        }
        Self::new(authors, papers, provenance)
    }

    pub fn n_papers(&self) -> usize {
        self.papers.len()
    }

    pub fn n_authors(&self) -> usize {
        self.authors.len()
    }

    /// Structural checks: unique ids, non-empty duplicate-free author lists,
    /// valid citation counts, and no dangling author references.
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::with_capacity(self.authors.len());
        for a in &self.authors {
            if !ids.insert(a.author_id.as_str()) {
                return Err(Error::DuplicateId {
                    kind: "author",
                    id: a.author_id.clone(),
                });
            }
        }
        let mut paper_ids = HashSet::with_capacity(self.papers.len());
        for p in &self.papers {
            if !paper_ids.insert(p.paper_id.as_str()) {
                return Err(Error::DuplicateId {
                    kind: "paper",
                    id: p.paper_id.clone(),
                });
            }
            p.validate()?;
            if let Some(missing) = p.author_ids.iter().find(|a| !ids.contains(a.as_str())) {
                return Err(Error::UnknownAuthor {
                    paper: p.paper_id.clone(),
                    author: missing.clone(),
                });
            }
        }
        Ok(())
    }

    /// Checks the additional preconditions of a solve: at least one paper and
    /// one author.
    pub fn ensure_solvable(&self) -> Result<()> {
        if self.papers.is_empty() {
            return Err(Error::EmptyDataset("papers"));
        }
        if self.authors.is_empty() {
            return Err(Error::EmptyDataset("authors"));
        }
        Ok(())
    }

    /// Number of papers each author appears on.
    pub fn paper_counts(&self) -> HashMap<&str, usize> {
        let mut counts: HashMap<&str, usize> =
            self.authors.iter().map(|a| (a.author_id.as_str(), 0)).collect();
        for p in &self.papers {
            for a in &p.author_ids {
                *counts.entry(a.as_str()).or_insert(0) += 1;
            }
        }
        counts
    }

    pub fn total_citations(&self) -> f64 {
        self.papers.iter().map(|p| p.citations).sum()
    }
}

/// Sparse binary paper × author incidence matrix, stored in both row-major
/// and column-major compressed form.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthorshipMatrix {
    n_papers: usize,
    n_authors: usize,
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    paper_ids: Vec<String>,
    author_ids: Vec<String>,
    paper_index: HashMap<String, usize>,
    author_index: HashMap<String, usize>,
}

impl AuthorshipMatrix {
    /// Rows follow `dataset.papers` order, columns follow `dataset.authors`.
    pub fn build(dataset: &Dataset) -> Result<Self> {
        dataset.validate()?;
        let author_ids: Vec<String> = dataset.authors.iter().map(|a| a.author_id.clone()).collect();
        let author_index: HashMap<String, usize> = author_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        let rows = dataset
            .papers
            .iter()
            .map(|p| p.author_ids.iter().map(|a| author_index[a.as_str()]).collect())
            .collect();
        let paper_ids = dataset.papers.iter().map(|p| p.paper_id.clone()).collect();
        Self::assemble(rows, paper_ids, author_ids)
    }

    /// Builds a matrix directly from per-row column lists, with synthetic ids
    /// `p{row}` and `a{col}`.
    pub fn from_rows(n_authors: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let paper_ids = (0..rows.len()).map(|r| format!("p{r}")).collect();
        let author_ids = (0..n_authors).map(|c| format!("a{c}")).collect();
        Self::assemble(rows, paper_ids, author_ids)
    }

    fn assemble(rows: Vec<Vec<usize>>, paper_ids: Vec<String>, author_ids: Vec<String>) -> Result<Self> {
        let n_papers = rows.len();
        let n_authors = author_ids.len();
        let mut row_ptr = Vec::with_capacity(n_papers + 1);
        let mut row_cols = Vec::new();
        row_ptr.push(0);
        for (r, mut cols) in rows.into_iter().enumerate() {
            if cols.is_empty() {
                return Err(Error::EmptyAuthorList(paper_ids[r].clone()));
            }
            cols.sort_unstable();
            for w in cols.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::DuplicateAuthor {
                        paper: paper_ids[r].clone(),
                        author: author_ids[w[0]].clone(),
                    });
                }
            }
            if let Some(&c) = cols.last() {
                if c >= n_authors {
                    return Err(Error::DimensionMismatch {
                        what: "author columns",
                        expected: n_authors,
                        got: c + 1,
                    });
                }
            }
            row_cols.extend_from_slice(&cols);
            row_ptr.push(row_cols.len());
        }

        let mut col_counts = vec![0usize; n_authors];
        for &c in &row_cols {
            col_counts[c] += 1;
        }
        let mut col_ptr = vec![0usize; n_authors + 1];
        for c in 0..n_authors {
            col_ptr[c + 1] = col_ptr[c] + col_counts[c];
        }
        let mut fill = col_ptr[..n_authors].to_vec();
        let mut col_rows = vec![0usize; row_cols.len()];
        for r in 0..n_papers {
            for &c in &row_cols[row_ptr[r]..row_ptr[r + 1]] {
                col_rows[fill[c]] = r;
                fill[c] += 1;
            }
        }

        let paper_index = paper_ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let author_index = author_ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Ok(Self {
            n_papers,
            n_authors,
            row_ptr,
            row_cols,
            col_ptr,
            col_rows,
            paper_ids,
            author_ids,
            paper_index,
            author_index,
        })
    }

    pub fn n_papers(&self) -> usize {
        self.n_papers
    }

    pub fn n_authors(&self) -> usize {
        self.n_authors
    }

    pub fn nnz(&self) -> usize {
        self.row_cols.len()
    }

    /// Author columns of one paper row, ascending.
    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_cols[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Paper rows of one author column, ascending.
    pub fn col(&self, c: usize) -> &[usize] {
        &self.col_rows[self.col_ptr[c]..self.col_ptr[c + 1]]
    }

    /// All `(paper_row, author_col)` pairs in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_papers).flat_map(move |r| self.row(r).iter().map(move |&c| (r, c)))
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row < self.n_papers && self.row(row).binary_search(&col).is_ok()
    }

    pub fn paper_ids(&self) -> &[String] {
        &self.paper_ids
    }

    pub fn author_ids(&self) -> &[String] {
        &self.author_ids
    }

    pub fn paper_row(&self, paper_id: &str) -> Option<usize> {
        self.paper_index.get(paper_id).copied()
    }

    pub fn author_col(&self, author_id: &str) -> Option<usize> {
        self.author_index.get(author_id).copied()
    }

    /// `F x`: the model's predicted log-quality for every paper.
    pub fn predict<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        (0..self.n_papers)
            .map(|r| self.row(r).iter().fold(T::zero(), |acc, &c| acc + x[c]))
            .collect()
    }

    /// `Fᵀ v` over paper-indexed `v`.
    pub fn transpose_mul<T: Scalar>(&self, v: &[T]) -> Vec<T> {
        (0..self.n_authors)
            .map(|c| self.col(c).iter().fold(T::zero(), |acc, &r| acc + v[r]))
            .collect()
    }

    /// Largest row sum of `FᵀF`, which for author `i` equals the total author
    /// count over the papers of `i`. Bounds the largest eigenvalue of `FᵀF`.
    pub fn max_gram_row_sum(&self) -> usize {
        (0..self.n_authors)
            .map(|c| self.col(c).iter().map(|&r| self.row(r).len()).sum::<usize>())
            .max()
            .unwrap_or(0)
    }

    /// Dense column-major copy of the selected columns.
    pub fn dense_columns<T: Scalar>(&self, cols: &[usize]) -> Vec<T> {
        let m = self.n_papers;
        let mut out = vec![T::zero(); m * cols.len()];
        for (j, &c) in cols.iter().enumerate() {
            for &r in self.col(c) {
                out[j * m + r] = T::one();
            }
        }
        out
    }

    /// Groups of two or more authors with identical, non-empty columns. Such
    /// authors never appear apart, so their individual abilities cannot be
    /// separated by the regression.
    pub fn find_inseparable_groups(&self) -> Vec<Vec<String>> {
        let mut by_column: HashMap<&[usize], Vec<usize>> = HashMap::new();
        for c in 0..self.n_authors {
            let col = self.col(c);
            if !col.is_empty() {
                by_column.entry(col).or_default().push(c);
            }
        }
        let mut groups: Vec<Vec<usize>> = by_column.into_values().filter(|g| g.len() >= 2).collect();
        groups.sort_unstable_by_key(|g| g[0]);
        groups
            .into_iter()
            .map(|g| g.into_iter().map(|c| self.author_ids[c].clone()).collect())
            .collect()
    }
}

/// Convenience wrapper for [`AuthorshipMatrix::build`].
pub fn build_matrix(dataset: &Dataset) -> Result<AuthorshipMatrix> {
    AuthorshipMatrix::build(dataset)
}

/// Convenience wrapper for [`AuthorshipMatrix::find_inseparable_groups`].
pub fn find_inseparable_groups(matrix: &AuthorshipMatrix) -> Vec<Vec<String>> {
    matrix.find_inseparable_groups()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(papers: &[(&str, f64, &[&str])]) -> Dataset {
        let papers = papers
            .iter()
            .map(|(id, q, a)| Publication::new(*id, *q, a.iter().copied()))
            .collect();
        Dataset::from_papers(papers, "test").unwrap()
    }

    #[test]
    fn single_paper_single_author() {
        let m = build_matrix(&ds(&[("P1", 3.0, &["A"])])).unwrap();
        assert_eq!((m.n_papers(), m.n_authors()), (1, 1));
        assert_eq!(m.entries().collect::<Vec<_>>(), vec![(0, 0)]);
    }

    #[test]
    fn three_papers_two_authors() {
        let d = ds(&[("P1", 1.0, &["A"]), ("P2", 1.0, &["B"]), ("P3", 1.0, &["A", "B"])]);
        let m = build_matrix(&d).unwrap();
        let a = m.author_col("A").unwrap();
        let b = m.author_col("B").unwrap();
        let got: HashSet<_> = m.entries().collect();
        let want: HashSet<_> = [(0, a), (1, b), (2, a), (2, b)].into_iter().collect();
        assert_eq!(got, want);
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.max_gram_row_sum(), 3);
    }

    #[test]
    fn rejects_empty_author_list() {
        let d = Dataset {
            authors: vec![Author::new("A", "A")],
            papers: vec![Publication::new("P1", 1.0, Vec::<String>::new())],
            provenance: String::new(),
        };
        assert!(matches!(build_matrix(&d), Err(Error::EmptyAuthorList(_))));
    }

    #[test]
    fn rejects_unknown_and_duplicate_authors() {
        let d = Dataset {
            authors: vec![Author::new("A", "A")],
            papers: vec![Publication::new("P1", 1.0, ["A", "B"])],
            provenance: String::new(),
        };
        assert!(matches!(d.validate(), Err(Error::UnknownAuthor { .. })));
        let d = Dataset {
            authors: vec![Author::new("A", "A")],
            papers: vec![Publication::new("P1", 1.0, ["A", "A"])],
            provenance: String::new(),
        };
        assert!(matches!(d.validate(), Err(Error::DuplicateAuthor { .. })));
    }

    #[test]
    fn inseparable_pair() {
        let m = build_matrix(&ds(&[("P1", 1.0, &["A", "B"]), ("P2", 1.0, &["A", "B"])])).unwrap();
        assert_eq!(m.find_inseparable_groups(), vec![vec!["A".to_string(), "B".to_string()]]);
    }

    #[test]
    fn separable_pair() {
        let m = build_matrix(&ds(&[("P1", 1.0, &["A", "B"]), ("P2", 1.0, &["A"])])).unwrap();
        assert!(m.find_inseparable_groups().is_empty());
    }

    #[test]
    fn predict_and_transpose() {
        let m = AuthorshipMatrix::from_rows(3, vec![vec![0], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!(m.predict(&[1.0, 2.0, 4.0]), vec![1.0, 6.0, 5.0]);
        assert_eq!(m.transpose_mul(&[1.0, 10.0, 100.0]), vec![101.0, 10.0, 110.0]);
        assert!(m.contains(1, 2) && !m.contains(1, 0));
    }
}
