//! Reading publication records (JSONL or CSV), author-name normalization,
//! and the pruning rules applied before a fit.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{Author, Dataset, Publication};

#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub title: String,
    pub author_names: Vec<String>,
    pub citation_count: f64,
    /// 1-based line of the record in its source.
    pub source_line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected jsonl or csv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Parsed {
    pub records: Vec<RawRecord>,
    /// Rows that were skipped.
    pub warnings: Vec<ParseWarning>,
}

#[derive(Deserialize)]
struct JsonRecord {
    title: String,
    authors: Vec<String>,
    citations: f64,
}

/// Parses every well-formed record; malformed rows become warnings. Stream
/// failures (including invalid UTF-8) are fatal.
pub fn parse_records<R: Read>(input: R, format: Format) -> Result<Parsed> {
    match format {
        Format::Jsonl => parse_jsonl(input),
        Format::Csv => parse_csv(input),
    }
}

fn make_record(
    title: String,
    names: Vec<String>,
    citations: f64,
    line: usize,
) -> std::result::Result<RawRecord, String> {
    if !citations.is_finite() || citations < 0.0 {
        return Err(format!("citation count must be a non-negative number, got {citations}"));
    }
    let author_names: Vec<String> = names
        .into_iter()
        .map(|n| n.trim().to_string())
        .filter(|n| !n.is_empty())
        .collect();
    if author_names.is_empty() {
        return Err("record has no authors".into());
    }
    Ok(RawRecord {
        title,
        author_names,
        citation_count: citations,
        source_line: line,
    })
}

fn parse_jsonl<R: Read>(input: R) -> Result<Parsed> {
    let mut out = Parsed::default();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<JsonRecord>(&line)
            .map_err(|e| e.to_string())
            .and_then(|r| make_record(r.title, r.authors, r.citations, line_no));
        match parsed {
            Ok(r) => out.records.push(r),
            Err(message) => out.warnings.push(ParseWarning { line: line_no, message }),
        }
    }
    Ok(out)
}

fn parse_csv<R: Read>(input: R) -> Result<Parsed> {
    let mut out = Parsed::default();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(csv_fatal(e)),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(out);
    }
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing `{name}` column in CSV header"),
            })
    };
    let (ti, ci, ai) = (column("title")?, column("citations")?, column("authors")?);

    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                if matches!(e.kind(), csv::ErrorKind::Io(_) | csv::ErrorKind::Utf8 { .. }) {
                    return Err(csv_fatal(e));
                }
                let line = e.position().map_or(0, |p| p.line() as usize);
                out.warnings.push(ParseWarning { line, message: e.to_string() });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line() as usize);
        let parsed = (|| {
            let title = row.get(ti).ok_or("missing title field")?.to_string();
            let citations: f64 = row
                .get(ci)
                .ok_or("missing citations field")?
                .trim()
                .parse()
                .map_err(|e| format!("bad citation count: {e}"))?;
            let authors = row
                .get(ai)
                .ok_or("missing authors field")?
                .split(';')
                .map(str::to_string)
                .collect();
            make_record(title, authors, citations, line)
        })();
        match parsed {
            Ok(r) => out.records.push(r),
            Err(message) => out.warnings.push(ParseWarning { line, message }),
        }
    }
    Ok(out)
}

fn csv_fatal(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("{other:?}"),
        )),
    }
}

/// Name canonicalization. The default performs no transformation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormalizationRules {
    pub fold_case: bool,
    /// Replace punctuation with spaces.
    pub strip_punctuation: bool,
    pub collapse_whitespace: bool,
    /// Exact variant → canonical mapping, applied after folding (keys and
    /// values are folded with the same rules). Chains are followed.
    pub aliases: HashMap<String, String>,
}

impl NormalizationRules {
    /// Case, punctuation, and whitespace folding with no aliases.
    pub fn folding() -> Self {
        Self {
            fold_case: true,
            strip_punctuation: true,
            collapse_whitespace: true,
            aliases: HashMap::new(),
        }
    }

    pub fn with_aliases(mut self, aliases: HashMap<String, String>) -> Self {
        self.aliases = aliases;
        self
    }

    pub fn fold(&self, name: &str) -> String {
        let mut s: String = if self.strip_punctuation {
            name.chars()
                .map(|c| if c.is_alphanumeric() || c.is_whitespace() { c } else { ' ' })
                .collect()
        } else {
            name.to_string()
        };
        if self.fold_case {
            s = s.to_lowercase();
        }
        if self.collapse_whitespace || self.strip_punctuation {
            s = s.split_whitespace().collect::<Vec<_>>().join(" ");
        }
        s.trim().to_string()
    }

    /// Folded alias map with chains resolved to their final canonical name.
    fn resolved_aliases(&self) -> Result<HashMap<String, String>> {
        let direct: HashMap<String, String> = self
            .aliases
            .iter()
            .map(|(k, v)| (self.fold(k), self.fold(v)))
            .filter(|(k, v)| k != v)
            .collect();
        let mut keys: Vec<&String> = direct.keys().collect();
        keys.sort();
        let mut resolved = HashMap::with_capacity(direct.len());
        for start in keys {
            let mut seen = HashSet::new();
            let mut cur = start;
            seen.insert(cur);
            while let Some(next) = direct.get(cur) {
                if !seen.insert(next) {
                    return Err(Error::AliasCycle(start.clone()));
                }
                cur = next;
            }
            resolved.insert(start.clone(), cur.clone());
        }
        Ok(resolved)
    }
}

/// Canonicalizes author names. Names that collapse onto an earlier name on
/// the same record are dropped; records left without authors are discarded.
pub fn normalize_names(records: Vec<RawRecord>, rules: &NormalizationRules) -> Result<Vec<RawRecord>> {
    let aliases = rules.resolved_aliases()?;
    Ok(records
        .into_iter()
        .filter_map(|mut r| {
            let mut seen = HashSet::new();
            r.author_names = r
                .author_names
                .iter()
                .map(|n| {
                    let folded = rules.fold(n);
                    aliases.get(&folded).cloned().unwrap_or(folded)
                })
                .filter(|n| !n.is_empty() && seen.insert(n.clone()))
                .collect();
            (!r.author_names.is_empty()).then_some(r)
        })
        .collect())
}

/// Reads a two-column `variant,canonical` CSV with a header row.
pub fn read_alias_map<R: Read>(input: R) -> Result<HashMap<String, String>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let mut map = HashMap::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        match (row.get(0), row.get(1)) {
            (Some(v), Some(c)) if row.len() == 2 => {
                map.insert(v.trim().to_string(), c.trim().to_string());
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    message: "alias rows need exactly two fields: variant,canonical".into(),
                })
            }
        }
    }
    Ok(map)
}

/// Turns records into a dataset: paper ids are `p{source_line}`, author ids
/// are the (normalized) names in first-seen order.
pub fn records_to_dataset(records: &[RawRecord], provenance: impl Into<String>) -> Result<Dataset> {
    let mut seen = HashSet::new();
    let mut authors = Vec::new();
    let mut papers = Vec::with_capacity(records.len());
    for r in records {
        let mut on_paper = HashSet::new();
        let ids: Vec<String> = r
            .author_names
            .iter()
            .filter(|n| on_paper.insert(n.as_str()))
            .cloned()
            .collect();
        for id in &ids {
            if seen.insert(id.clone()) {
                authors.push(Author::new(id.clone(), id.clone()));
            }
        }
        papers.push(Publication {
            paper_id: format!("p{}", r.source_line),
            citations: r.citation_count,
            author_ids: ids,
        });
    }
    Dataset::new(authors, papers, provenance)
}

/// Writes a dataset in the JSONL input format. Paper ids are not stored; a
/// dataset whose ids are `p1, p2, …` in order reads back unchanged.
pub fn write_jsonl<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    for p in &dataset.papers {
        let citations = if p.citations.fract() == 0.0 && p.citations < 9.0e15 {
            serde_json::Value::from(p.citations as u64)
        } else {
            serde_json::Value::from(p.citations)
        };
        let row = serde_json::json!({
            "title": p.paper_id,
            "authors": p.author_ids,
            "citations": citations,
        });
        serde_json::to_writer(&mut out, &row)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PruneOptions {
    pub drop_zero_cited: bool,
    pub drop_single_occurrence: bool,
}

impl Default for PruneOptions {
    fn default() -> Self {
        Self {
            drop_zero_cited: true,
            drop_single_occurrence: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct PruneReport {
    pub removed_single_occurrence_authors: usize,
    pub removed_zero_citation_papers: usize,
    /// Papers whose every author was removed.
    pub removed_empty_papers: usize,
    /// Authors left with no papers for other reasons (e.g. only uncited papers).
    pub removed_orphan_authors: usize,
    /// Single-occurrence scans performed, including the final one that
    /// found nothing to remove.
    pub passes: usize,
}

/// Applies the pruning rules: uncited papers first, then single-occurrence
/// authors repeatedly until none remain. Authors without papers are dropped.
pub fn prune(dataset: &Dataset, options: PruneOptions) -> Result<(Dataset, PruneReport)> {
    let mut report = PruneReport::default();
    let mut papers: Vec<Publication> = dataset.papers.clone();
    if options.drop_zero_cited {
        let before = papers.len();
        papers.retain(|p| p.citations > 0.0);
        report.removed_zero_citation_papers = before - papers.len();
    }

    if options.drop_single_occurrence {
        loop {
            report.passes += 1;
            let mut counts: HashMap<&str, usize> = HashMap::new();
            for p in &papers {
                for a in &p.author_ids {
                    *counts.entry(a.as_str()).or_insert(0) += 1;
                }
            }
            let singles: HashSet<String> = counts
                .into_iter()
                .filter(|&(_, c)| c == 1)
                .map(|(a, _)| a.to_string())
                .collect();
            if singles.is_empty() {
                break;
            }
            report.removed_single_occurrence_authors += singles.len();
            for p in &mut papers {
                p.author_ids.retain(|a| !singles.contains(a));
            }
            let before = papers.len();
            papers.retain(|p| !p.author_ids.is_empty());
            report.removed_empty_papers += before - papers.len();
        }
    }

    let used: HashSet<&str> = papers
        .iter()
        .flat_map(|p| p.author_ids.iter().map(String::as_str))
        .collect();
    let authors: Vec<Author> = dataset
        .authors
        .iter()
        .filter(|a| used.contains(a.author_id.as_str()))
        .cloned()
        .collect();
    report.removed_orphan_authors =
        dataset.n_authors() - authors.len() - report.removed_single_occurrence_authors;

    if papers.is_empty() || authors.is_empty() {
        return Err(Error::EmptyAfterPrune {
            papers: papers.len(),
            authors: authors.len(),
        });
    }
    let pruned = Dataset::new(authors, papers, dataset.provenance.clone())?;
    Ok((pruned, report))
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
    fn empty_stream() {
        for f in [Format::Jsonl, Format::Csv] {
            let parsed = parse_records(&b""[..], f).unwrap();
            assert!(parsed.records.is_empty() && parsed.warnings.is_empty());
        }
    }

    #[test]
    fn one_jsonl_line() {
        let input = br#"{"title":"T","authors":["A","B"],"citations":5,"year":1999}"#;
        let parsed = parse_records(&input[..], Format::Jsonl).unwrap();
        assert_eq!(parsed.records.len(), 1);
        let r = &parsed.records[0];
        assert_eq!(r.author_names, vec!["A", "B"]);
        assert_eq!(r.citation_count, 5.0);
        assert_eq!(r.source_line, 1);
    }

    #[test]
    fn malformed_jsonl_rows_are_warnings() {
        let input = "{\"title\":\"T\",\"authors\":[\"A\"],\"citations\":1}\nnot json\n\n{\"title\":\"U\",\"authors\":[],\"citations\":1}\n{\"title\":\"V\",\"authors\":[\"A\"],\"citations\":-2}\n";
        let parsed = parse_records(input.as_bytes(), Format::Jsonl).unwrap();
        assert_eq!(parsed.records.len(), 1);
        let lines: Vec<usize> = parsed.warnings.iter().map(|w| w.line).collect();
        assert_eq!(lines, vec![2, 4, 5]);
    }

    #[test]
    fn invalid_utf8_is_fatal() {
        let input: &[u8] = b"{\"title\":\"\xff\"}\n";
        assert!(matches!(parse_records(input, Format::Jsonl), Err(Error::Io(_))));
        assert!(parse_records(input, Format::Csv).is_err());
    }

    #[test]
    fn csv_rows_and_warnings() {
        let input = "title,citations,authors\n\"Hello, world\",3,A; B\nBad,x,A\nNo authors,2,\n";
        let parsed = parse_records(input.as_bytes(), Format::Csv).unwrap();
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.records[0].title, "Hello, world");
        assert_eq!(parsed.records[0].author_names, vec!["A", "B"]);
        assert_eq!(parsed.records[0].source_line, 2);
        let lines: Vec<usize> = parsed.warnings.iter().map(|w| w.line).collect();
        assert_eq!(lines, vec![3, 4]);
    }

    #[test]
    fn csv_requires_header_columns() {
        let input = "name,citations\nA,1\n";
        assert!(matches!(parse_records(input.as_bytes(), Format::Csv), Err(Error::Parse { .. })));
    }

    fn record(names: &[&str]) -> RawRecord {
        RawRecord {
            title: "t".into(),
            author_names: names.iter().map(|s| s.to_string()).collect(),
            citation_count: 1.0,
            source_line: 1,
        }
    }

    #[test]
    fn folding_merges_variants() {
        let out = normalize_names(
            vec![record(&["Thomas H. Cormen"]), record(&["thomas  h cormen"])],
            &NormalizationRules::folding(),
        )
        .unwrap();
        assert_eq!(out[0].author_names, out[1].author_names);
        assert_eq!(out[0].author_names[0], "thomas h cormen");
    }

    #[test]
    fn alias_map_merges() {
        let rules = NormalizationRules::default()
            .with_aliases([("Jim Smith".to_string(), "James Smith".to_string())].into());
        let out = normalize_names(vec![record(&["Jim Smith", "James Smith", "Ann"])], &rules).unwrap();
        assert_eq!(out[0].author_names, vec!["James Smith", "Ann"]);
    }

    #[test]
    fn alias_chains_and_cycles() {
        let rules = NormalizationRules::default().with_aliases(
            [("a".to_string(), "b".to_string()), ("b".to_string(), "c".to_string())].into(),
        );
        let out = normalize_names(vec![record(&["a"])], &rules).unwrap();
        assert_eq!(out[0].author_names, vec!["c"]);

        let rules = NormalizationRules::default().with_aliases(
            [("a".to_string(), "b".to_string()), ("b".to_string(), "a".to_string())].into(),
        );
        assert!(matches!(normalize_names(vec![record(&["a"])], &rules), Err(Error::AliasCycle(_))));
    }

    #[test]
    fn empty_rules_are_identity() {
        let recs = vec![record(&["Thomas H. Cormen", "  x  y "])];
        let out = normalize_names(recs.clone(), &NormalizationRules::default()).unwrap();
        assert_eq!(out[0].author_names, vec!["Thomas H. Cormen", "x  y"]);
    }

    #[test]
    fn alias_file() {
        let map = read_alias_map("variant,canonical\nJim Smith,James Smith\n".as_bytes()).unwrap();
        assert_eq!(map["Jim Smith"], "James Smith");
        assert!(read_alias_map("variant,canonical\na,b,c\n".as_bytes()).is_err());
    }

    #[test]
    fn prune_fixed_point_immediately() {
        let d = ds(&[("P1", 1.0, &["A", "B"]), ("P2", 2.0, &["A", "B"])]);
        let (out, report) = prune(&d, PruneOptions::default()).unwrap();
        assert_eq!(out, d);
        assert_eq!(report.passes, 1);
    }

    #[test]
    fn prune_single_occurrence() {
        let d = ds(&[("P1", 1.0, &["A", "B"]), ("P2", 2.0, &["A"])]);
        let (out, report) = prune(&d, PruneOptions::default()).unwrap();
        assert_eq!(out.papers, vec![Publication::new("P1", 1.0, ["A"]), Publication::new("P2", 2.0, ["A"])]);
        assert_eq!(out.authors, vec![Author::new("A", "A")]);
        assert_eq!(report.removed_single_occurrence_authors, 1);
        assert_eq!(report.passes, 2);
    }

    #[test]
    fn prune_removes_emptied_papers_and_uncited() {
        let d = ds(&[
            ("P1", 1.0, &["A", "B"]),
            ("P2", 2.0, &["A", "B"]),
            ("P3", 5.0, &["C", "D"]),
            ("P4", 0.0, &["E", "A"]),
            ("P5", 0.0, &["E"]),
        ]);
        let (out, report) = prune(&d, PruneOptions::default()).unwrap();
        assert_eq!(out.n_papers(), 2);
        assert_eq!(report.removed_zero_citation_papers, 2);
        assert_eq!(report.removed_single_occurrence_authors, 2);
        assert_eq!(report.removed_empty_papers, 1);
        assert_eq!(report.removed_orphan_authors, 1);
    }

    #[test]
    fn prune_empty_result() {
        let d = ds(&[("P1", 1.0, &["A"]), ("P2", 1.0, &["B"])]);
        assert!(matches!(prune(&d, PruneOptions::default()), Err(Error::EmptyAfterPrune { .. })));
        let none = PruneOptions {
            drop_zero_cited: false,
            drop_single_occurrence: false,
        };
        let (out, report) = prune(&d, none).unwrap();
        assert_eq!(out, d);
        assert_eq!(report.passes, 0);
    }

    #[test]
    fn records_become_dataset() {
        let recs = vec![
            RawRecord { source_line: 1, ..record(&["A", "B"]) },
            RawRecord { source_line: 3, ..record(&["B"]) },
        ];
        let d = records_to_dataset(&recs, "x").unwrap();
        assert_eq!(d.papers[1].paper_id, "p3");
        assert_eq!(d.n_authors(), 2);
    }

    #[test]
    fn jsonl_round_trip() {
        let d = ds(&[("p1", 3.0, &["A", "B"]), ("p2", 2.5, &["B"])]);
        let mut buf = Vec::new();
        write_jsonl(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(r#"{"authors":["A","B"],"citations":3,"title":"p1"}"#));
        let parsed = parse_records(&buf[..], Format::Jsonl).unwrap();
        let back = records_to_dataset(&parsed.records, "test").unwrap();
        assert_eq!(back, d);
    }
}
