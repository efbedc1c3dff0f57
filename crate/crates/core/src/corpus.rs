//! Review corpora: loading, validation, negative balancing and stratified
//! fold assignment.
//!
//! Files carry the columns `id,app_name,app_category,text,label`. CSV files
//! have a header row and RFC-4180 quoting; JSONL files hold one object per
//! line with the same field names. Labels are exactly `accessibility` or
//! `other`.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary review class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Accessibility,
    Other,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Accessibility
    }

    pub fn from_positive(positive: bool) -> Self {
        if positive {
            Label::Accessibility
        } else {
            Label::Other
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Accessibility => "accessibility",
            Label::Other => "other",
        }
    }

    pub fn flipped(self) -> Self {
        Label::from_positive(!self.is_positive())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "accessibility" => Ok(Label::Accessibility),
            "other" => Ok(Label::Other),
            _ => Err(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub id: String,
    pub app_name: String,
    pub app_category: String,
    pub text: String,
    pub label: Option<Label>,
}

impl Review {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<Label>) -> Self {
        Review {
            id: id.into(),
            app_name: String::new(),
            app_category: String::new(),
            text: text.into(),
            label,
        }
    }
}

/// On-disk corpus layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Csv,
    Jsonl,
}

impl CorpusFormat {
    /// Guess from the file extension; anything other than `.jsonl`/`.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => CorpusFormat::Jsonl,
            _ => CorpusFormat::Csv,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(CorpusFormat::Csv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            _ => Err(format!("unknown corpus format `{s}` (expected csv or jsonl)")),
        }
    }
}

/// A validated, fully labeled corpus. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledCorpus {
    reviews: Vec<Review>,
    n_positive: usize,
}

impl LabeledCorpus {
    /// Validate and wrap `reviews`: every review labeled, ids non-empty and
    /// unique, text non-blank.
    pub fn new(reviews: Vec<Review>) -> Result<Self> {
        validate_reviews(&reviews, true)?;
        let n_positive = reviews.iter().filter(|r| r.label == Some(Label::Accessibility)).count();
        Ok(LabeledCorpus { reviews, n_positive })
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn n_positive(&self) -> usize {
        self.n_positive
    }

    pub fn n_negative(&self) -> usize {
        self.reviews.len() - self.n_positive
    }

    pub fn count(&self, label: Label) -> usize {
        match label {
            Label::Accessibility => self.n_positive(),
            Label::Other => self.n_negative(),
        }
    }

    /// Label of every review, in corpus order.
    pub fn labels(&self) -> Vec<Label> {
        self.reviews
            .iter()
            .map(|r| r.label.expect("validated corpus"))
            .collect()
    }

    /// Sub-corpus made of the given row positions, in the given order.
    pub fn subset(&self, rows: &[usize]) -> LabeledCorpus {
        let reviews: Vec<Review> = rows.iter().map(|&i| self.reviews[i].clone()).collect();
        let n_positive = reviews.iter().filter(|r| r.label == Some(Label::Accessibility)).count();
        LabeledCorpus { reviews, n_positive }
    }

    pub fn into_reviews(self) -> Vec<Review> {
        self.reviews
    }
}

fn validate_reviews(reviews: &[Review], require_label: bool) -> Result<()> {
    let mut seen = HashSet::with_capacity(reviews.len());
    for (row, r) in reviews.iter().enumerate() {
        if r.id.trim().is_empty() {
            return Err(Error::MalformedRow {
                row,
                message: "empty id".into(),
            });
        }
        if r.text.trim().is_empty() {
            return Err(Error::MalformedRow {
                row,
                message: format!("review `{}` has empty text", r.id),
            });
        }
        if require_label && r.label.is_none() {
            return Err(Error::Unlabeled { row, id: r.id.clone() });
        }
        if !seen.insert(r.id.as_str()) {
            return Err(Error::DuplicateId(r.id.clone()));
        }
    }
    Ok(())
}

const COLUMNS: [&str; 5] = ["id", "app_name", "app_category", "text", "label"];

/// Load a fully labeled corpus.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<LabeledCorpus> {
    let reviews = read_reviews(path, format, true)?;
    let corpus = LabeledCorpus::new(reviews)?;
    log::info!(
        "loaded {} reviews from {} ({} accessibility, {} other)",
        corpus.len(),
        path.display(),
        corpus.n_positive(),
        corpus.n_negative()
    );
    Ok(corpus)
}

/// Load reviews whose labels may be missing (for scoring). Only `id` and
/// `text` are required.
pub fn load_reviews(path: &Path, format: CorpusFormat) -> Result<Vec<Review>> {
    let reviews = read_reviews(path, format, false)?;
    validate_reviews(&reviews, false)?;
    Ok(reviews)
}

fn read_reviews(path: &Path, format: CorpusFormat, strict: bool) -> Result<Vec<Review>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        CorpusFormat::Csv => parse_csv(&bytes, strict),
        CorpusFormat::Jsonl => parse_jsonl(&bytes, strict),
    }
}

fn parse_label(row: usize, raw: &str, strict: bool) -> Result<Option<Label>> {
    let token = raw.trim();
    if token.is_empty() {
        if strict {
            return Err(Error::UnknownLabel {
                row,
                token: String::new(),
            });
        }
        return Ok(None);
    }
    token
        .parse::<Label>()
        .map(Some)
        .map_err(|token| Error::UnknownLabel { row, token })
}

fn parse_csv(bytes: &[u8], strict: bool) -> Result<Vec<Review>> {
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(bytes);
    let headers = reader
        .byte_headers()?
        .iter()
        .map(|h| String::from_utf8_lossy(h).trim().to_string())
        .collect::<Vec<_>>();
    let position = |name: &str| headers.iter().position(|h| h == name);
    for h in &headers {
        if !COLUMNS.contains(&h.as_str()) {
            log::warn!("ignoring extra corpus column `{h}`");
        }
    }
    let required: &[&'static str] = if strict { &COLUMNS } else { &["id", "text"] };
    let mut cols = [None; 5];
    for (slot, name) in cols.iter_mut().zip(COLUMNS) {
        *slot = position(name);
        if slot.is_none() && required.contains(&name) {
            return Err(Error::MissingColumn { row: 0, column: name });
        }
    }

    let mut out = Vec::new();
    for (i, record) in reader.byte_records().enumerate() {
        let row = i + 1;
        let record = record?;
        let field = |c: usize| -> Result<String> {
            match cols[c] {
                None => Ok(String::new()),
                Some(p) => {
                    let raw = record.get(p).ok_or(Error::MissingColumn {
                        row,
                        column: COLUMNS[c],
                    })?;
                    String::from_utf8(raw.to_vec()).map_err(|_| Error::MalformedRow {
                        row,
                        message: format!("column `{}` is not valid UTF-8", COLUMNS[c]),
                    })
                }
            }
        };
        let label = match cols[4] {
            Some(_) => parse_label(row, &field(4)?, strict)?,
            None => None,
        };
        out.push(Review {
            id: field(0)?,
            app_name: field(1)?,
            app_category: field(2)?,
            text: field(3)?,
            label,
        });
    }
    Ok(out)
}

fn parse_jsonl(bytes: &[u8], strict: bool) -> Result<Vec<Review>> {
    let mut out = Vec::new();
    for (i, line) in bytes.split(|&b| b == b'\n').enumerate() {
        let row = i + 1;
        let line = std::str::from_utf8(line).map_err(|_| Error::MalformedRow {
            row,
            message: "line is not valid UTF-8".into(),
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| Error::MalformedRow {
            row,
            message: e.to_string(),
        })?;
        let obj = value.as_object().ok_or_else(|| Error::MalformedRow {
            row,
            message: "expected a JSON object".into(),
        })?;
        for key in obj.keys() {
            if !COLUMNS.contains(&key.as_str()) {
                log::warn!("row {row}: ignoring extra field `{key}`");
            }
        }
        let field = |name: &'static str, required: bool| -> Result<String> {
            match obj.get(name) {
                Some(serde_json::Value::String(s)) => Ok(s.clone()),
                Some(serde_json::Value::Null) | None if !required => Ok(String::new()),
                Some(serde_json::Value::Null) | None => Err(Error::MissingColumn { row, column: name }),
                Some(other) => Err(Error::MalformedRow {
                    row,
                    message: format!("field `{name}` must be a string, got {other}"),
                }),
            }
        };
        let label = match obj.get("label") {
            None | Some(serde_json::Value::Null) if strict => {
                return Err(Error::MissingColumn { row, column: "label" })
            }
            None | Some(serde_json::Value::Null) => None,
            Some(_) => parse_label(row, &field("label", strict)?, strict)?,
        };
        out.push(Review {
            id: field("id", true)?,
            app_name: field("app_name", strict)?,
            app_category: field("app_category", strict)?,
            text: field("text", true)?,
            label,
        });
    }
    Ok(out)
}

/// Write reviews in the given format; labels are written as empty when absent.
pub fn save_reviews(reviews: &[Review], path: &Path, format: CorpusFormat) -> Result<()> {
    let mut buf = Vec::new();
    write_reviews(reviews, &mut buf, format)?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn save_corpus(corpus: &LabeledCorpus, path: &Path, format: CorpusFormat) -> Result<()> {
    save_reviews(corpus.reviews(), path, format)
}

pub fn write_reviews<W: Write>(reviews: &[Review], mut out: W, format: CorpusFormat) -> Result<()> {
    match format {
        CorpusFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(COLUMNS)?;
            for r in reviews {
                w.write_record([
                    r.id.as_str(),
                    r.app_name.as_str(),
                    r.app_category.as_str(),
                    r.text.as_str(),
                    r.label.map(Label::as_str).unwrap_or(""),
                ])?;
            }
            w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        }
        CorpusFormat::Jsonl => {
            for r in reviews {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n").map_err(|e| Error::io("<jsonl writer>", e))?;
            }
        }
    }
    Ok(())
}

/// Read a newline-delimited word or phrase list, skipping blank lines and
/// `#` comments.
pub(crate) fn read_line_list(path: &Path) -> Result<Vec<String>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        out.extend(parse_list_line(&line));
    }
    Ok(out)
}

pub(crate) fn parse_list_line(line: &str) -> Option<String> {
    let content = match line.find('#') {
        Some(p) => &line[..p],
        None => line,
    };
    let content = content.trim();
    (!content.is_empty()).then(|| content.to_string())
}

/// Pair every review of `positives` with an equal number of negatives drawn
/// uniformly without replacement from `pool`.
///
/// Pool reviews whose id already appears among the positives are skipped.
/// The result lists the positives first, then the chosen negatives in pool
/// order.
pub fn balance_negatives(positives: &LabeledCorpus, pool: &LabeledCorpus, seed: u64) -> Result<LabeledCorpus> {
    if positives.n_negative() > 0 {
        return Err(Error::InvalidArgument(format!(
            "positive set contains {} reviews labeled `other`",
            positives.n_negative()
        )));
    }
    let taken: HashSet<&str> = positives.reviews().iter().map(|r| r.id.as_str()).collect();
    let candidates: Vec<usize> = pool
        .reviews()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.label == Some(Label::Other) && !taken.contains(r.id.as_str()))
        .map(|(i, _)| i)
        .collect();
    let required = positives.len();
    if pool.is_empty() || candidates.len() < required {
        return Err(Error::InsufficientPool {
            required,
            available: candidates.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, candidates.len(), required)
        .into_iter()
        .map(|j| candidates[j])
        .collect();
    chosen.sort_unstable();

    let mut reviews = positives.reviews().to_vec();
    reviews.extend(chosen.into_iter().map(|i| pool.reviews()[i].clone()));
    LabeledCorpus::new(reviews)
}

/// Assignment of every corpus row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    ids: Vec<String>,
    fold_by_row: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Fold of the row at `row` (corpus order).
    pub fn fold_of_row(&self, row: usize) -> usize {
        self.fold_by_row[row]
    }

    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id).map(|row| self.fold_by_row[row])
    }

    pub fn assignment(&self) -> impl Iterator<Item = (&str, usize)> {
        self.ids
            .iter()
            .map(String::as_str)
            .zip(self.fold_by_row.iter().copied())
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_by_row.len())
            .filter(|&r| self.fold_by_row[r] == fold)
            .collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_by_row.len())
            .filter(|&r| self.fold_by_row[r] != fold)
            .collect()
    }
}

/// Stratified k-fold assignment.
///
/// Each class is shuffled under `seed` and dealt round-robin; the negative
/// deal continues where the positive one stopped, so fold sizes also differ
/// by at most one.
pub fn stratified_folds(corpus: &LabeledCorpus, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("fold count must be >= 2, got {k}")));
    }
    for label in [Label::Accessibility, Label::Other] {
        let count = corpus.count(label);
        if count < k {
            return Err(Error::ClassTooSmall {
                k,
                label: label.as_str(),
                count,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_by_row = vec![0; corpus.len()];
    let mut next = 0;
    for label in [Label::Accessibility, Label::Other] {
        let mut rows: Vec<usize> = corpus
            .reviews()
            .iter()
            .enumerate()
            .filter(|(_, r)| r.label == Some(label))
            .map(|(i, _)| i)
            .collect();
        rows.shuffle(&mut rng);
        for row in rows {
            fold_by_row[row] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        ids: corpus.reviews().iter().map(|r| r.id.clone()).collect(),
        fold_by_row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn review(id: &str, label: Label) -> Review {
        Review {
            id: id.into(),
            app_name: "app".into(),
            app_category: "Reading".into(),
            text: format!("text of {id}"),
            label: Some(label),
        }
    }

    fn corpus(n_pos: usize, n_neg: usize) -> LabeledCorpus {
        let mut v: Vec<Review> = (0..n_pos)
            .map(|i| review(&format!("p{i}"), Label::Accessibility))
            .collect();
        v.extend((0..n_neg).map(|i| review(&format!("n{i}"), Label::Other)));
        LabeledCorpus::new(v).unwrap()
    }

    fn write_tmp(contents: &[u8], ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(contents).unwrap();
        f
    }

    #[test]
    fn empty_file_gives_empty_corpus() {
        let f = write_tmp(b"", ".csv");
        let c = load_corpus(f.path(), CorpusFormat::Csv).unwrap();
        assert!(c.is_empty());
        assert_eq!((c.n_positive(), c.n_negative()), (0, 0));
        let f = write_tmp(b"", ".jsonl");
        assert!(load_corpus(f.path(), CorpusFormat::Jsonl).unwrap().is_empty());
    }

    #[test]
    fn three_rows_round_trip() {
        let csv = "id,app_name,app_category,text,label\n\
                   r1,Reader,Reading,\"Font is too small, hard to see\",accessibility\n\
                   r2,Player,Multimedia,Great music app,other\n\
                   r3,Chat,Internet,\"Screen reader \"\"TalkBack\"\" works\",accessibility\n";
        let f = write_tmp(csv.as_bytes(), ".csv");
        let c = load_corpus(f.path(), CorpusFormat::Csv).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.n_positive(), 2);
        assert_eq!(c.reviews()[2].text, "Screen reader \"TalkBack\" works");

        for fmt in [CorpusFormat::Csv, CorpusFormat::Jsonl] {
            let out = tempfile::NamedTempFile::new().unwrap();
            save_corpus(&c, out.path(), fmt).unwrap();
            let again = load_corpus(out.path(), fmt).unwrap();
            assert_eq!(again, c);
        }
    }

    #[test]
    fn extra_columns_are_ignored() {
        let csv = "id,app_name,app_category,text,label,stars\nr1,a,b,hello,other,5\n";
        let f = write_tmp(csv.as_bytes(), ".csv");
        let c = load_corpus(f.path(), CorpusFormat::Csv).unwrap();
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn load_errors() {
        let missing = write_tmp(b"id,app_name,app_category,text\nr1,a,b,hi\n", ".csv");
        assert!(matches!(
            load_corpus(missing.path(), CorpusFormat::Csv),
            Err(Error::MissingColumn { column: "label", .. })
        ));

        let dup = write_tmp(
            b"id,app_name,app_category,text,label\nr1,a,b,hi,other\nr1,a,b,yo,other\n",
            ".csv",
        );
        assert!(matches!(
            load_corpus(dup.path(), CorpusFormat::Csv),
            Err(Error::DuplicateId(id)) if id == "r1"
        ));

        let bad_label = write_tmp(b"id,app_name,app_category,text,label\nr1,a,b,hi,yes\n", ".csv");
        assert!(matches!(
            load_corpus(bad_label.path(), CorpusFormat::Csv),
            Err(Error::UnknownLabel { token, .. }) if token == "yes"
        ));

        let mut bytes = b"id,app_name,app_category,text,label\nr1,a,b,".to_vec();
        bytes.extend([0xff, 0xfe]);
        bytes.extend(b",other\n");
        let bad_utf8 = write_tmp(&bytes, ".csv");
        assert!(matches!(
            load_corpus(bad_utf8.path(), CorpusFormat::Csv),
            Err(Error::MalformedRow { .. })
        ));

        let jsonl = write_tmp(
            b"{\"id\":\"a\",\"app_name\":\"x\",\"app_category\":\"y\",\"text\":\"t\"}\n",
            ".jsonl",
        );
        assert!(matches!(
            load_corpus(jsonl.path(), CorpusFormat::Jsonl),
            Err(Error::MissingColumn { column: "label", .. })
        ));

        assert!(matches!(
            load_corpus(Path::new("/nonexistent/corpus.csv"), CorpusFormat::Csv),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn unlabeled_reviews_load_for_scoring() {
        let f = write_tmp(b"id,text\nq1,cannot see the buttons\nq2,nice\n", ".csv");
        let r = load_reviews(f.path(), CorpusFormat::Csv).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|x| x.label.is_none()));
        assert!(load_corpus(f.path(), CorpusFormat::Csv).is_err());
    }

    #[test]
    fn balance_is_deterministic_and_exact() {
        let pos = corpus(5, 0);
        let pool = corpus(0, 40);
        let a = balance_negatives(&pos, &pool, 7).unwrap();
        let b = balance_negatives(&pos, &pool, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_positive(), 5);
        assert_eq!(a.n_negative(), 5);
        let c = balance_negatives(&pos, &pool, 8).unwrap();
        assert_eq!(c.len(), 10);
    }

    #[test]
    fn balance_reports_shortfall() {
        let pos = corpus(3, 0);
        let empty = LabeledCorpus::default();
        assert!(matches!(
            balance_negatives(&pos, &empty, 0),
            Err(Error::InsufficientPool {
                required: 3,
                available: 0
            })
        ));
        assert!(matches!(
            balance_negatives(&pos, &corpus(0, 2), 0),
            Err(Error::InsufficientPool {
                required: 3,
                available: 2
            })
        ));
    }

    #[test]
    fn full_size_fold_counts() {
        let c = corpus(2663, 2663);
        let plan = stratified_folds(&c, 10, 1).unwrap();
        for f in 0..10 {
            let rows = plan.test_rows(f);
            assert!(rows.len() == 532 || rows.len() == 533, "fold {f}: {}", rows.len());
            let pos = rows.iter().filter(|&&r| r < 2663).count();
            let neg = rows.len() - pos;
            assert!((pos as f64 - 266.3).abs() < 1.0);
            assert!((neg as f64 - 266.3).abs() < 1.0);
        }
    }

    #[test]
    fn minimal_two_fold_plan() {
        let c = corpus(2, 2);
        let plan = stratified_folds(&c, 2, 3).unwrap();
        for f in 0..2 {
            let rows = plan.test_rows(f);
            assert_eq!(rows.len(), 2);
            assert_eq!(rows.iter().filter(|&&r| r < 2).count(), 1);
        }
        assert_eq!(plan.fold_of("p0"), Some(plan.fold_of_row(0)));
    }

    #[test]
    fn too_few_for_k() {
        let c = corpus(9, 20);
        assert!(matches!(
            stratified_folds(&c, 10, 0),
            Err(Error::ClassTooSmall { k: 10, count: 9, .. })
        ));
        assert!(stratified_folds(&c, 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn folds_partition_corpus(n_pos in 2usize..40, n_neg in 2usize..40, k in 2usize..6, seed in any::<u64>()) {
            prop_assume!(n_pos >= k && n_neg >= k);
            let c = corpus(n_pos, n_neg);
            let plan = stratified_folds(&c, k, seed).unwrap();
            let mut seen = vec![0usize; c.len()];
            for f in 0..k {
                for r in plan.test_rows(f) {
                    seen[r] += 1;
                }
                let mut all = plan.test_rows(f);
                all.extend(plan.train_rows(f));
                all.sort_unstable();
                prop_assert_eq!(all, (0..c.len()).collect::<Vec<_>>());
            }
            prop_assert!(seen.iter().all(|&s| s == 1));
            // Class counts per fold are within one of each other.
            for label_range in [0..n_pos, n_pos..n_pos + n_neg] {
                let counts: Vec<usize> = (0..k)
                    .map(|f| plan.test_rows(f).iter().filter(|r| label_range.contains(r)).count())
                    .collect();
                let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
                prop_assert!(hi - lo <= 1);
            }
        }

        #[test]
        fn balancing_equalizes(n_pos in 0usize..30, extra in 0usize..30, seed in any::<u64>()) {
            let pos = corpus(n_pos, 0);
            let pool = corpus(0, n_pos + extra + 1);
            let out = balance_negatives(&pos, &pool, seed).unwrap();
            prop_assert_eq!(out.n_positive(), out.n_negative());
        }
    }
}
