//! Hashed n-gram features and mutual-information feature selection.
//!
//! A review's tokens become unigrams followed by adjacent bigrams. Each gram
//! is hashed with 32-bit MurmurHash3 (x86 variant, seed 0) to the bucket
//! `h mod 2^bits`. With signed hashing the weight of an occurrence is `+1`
//! when bit 0 of MurmurHash3 under seed `0x9747b28c` is set and `-1`
//! otherwise; unsigned hashing always uses `+1`. Colliding grams add up.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{Label, LabeledCorpus};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::textprep::{preprocess, StopList};

pub const MIN_BITS: u32 = 8;
pub const MAX_BITS: u32 = 24;
const SIGN_SEED: u32 = 0x9747_b28c;

/// A unigram or a space-joined bigram.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gram {
    pub text: String,
    pub order: u8,
}

impl Gram {
    pub fn unigram(t: &str) -> Self {
        Gram {
            text: t.to_string(),
            order: 1,
        }
    }
}

/// Unigrams in document order, then (for `max_n = 2`) adjacent bigrams.
pub fn extract_ngrams(tokens: &[String], max_n: usize) -> Result<Vec<Gram>> {
    if !(1..=2).contains(&max_n) {
        return Err(Error::InvalidArgument(format!("max_n must be 1 or 2, got {max_n}")));
    }
    let mut grams: Vec<Gram> = tokens.iter().map(|t| Gram::unigram(t)).collect();
    if max_n == 2 {
        grams.extend(tokens.windows(2).map(|w| Gram {
            text: format!("{} {}", w[0], w[1]),
            order: 2,
        }));
    }
    Ok(grams)
}

/// MurmurHash3, x86 32-bit variant.
pub fn murmur3_32(data: &[u8], seed: u32) -> u32 {
    const C1: u32 = 0xcc9e_2d51;
    const C2: u32 = 0x1b87_3593;
    let mut h = seed;
    let mut chunks = data.chunks_exact(4);
    for chunk in &mut chunks {
        let mut k = u32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        k = k.wrapping_mul(C1).rotate_left(15).wrapping_mul(C2);
        h ^= k;
        h = h.rotate_left(13).wrapping_mul(5).wrapping_add(0xe654_6b64);
    }
    let tail = chunks.remainder();
    if !tail.is_empty() {
        let mut k = 0u32;
        for (i, &b) in tail.iter().enumerate() {
            k |= (b as u32) << (8 * i);
        }
        k = k.wrapping_mul(C1).rotate_left(15).wrapping_mul(C2);
        h ^= k;
    }
    h ^= data.len() as u32;
    h ^= h >> 16;
    h = h.wrapping_mul(0x85eb_ca6b);
    h ^= h >> 13;
    h = h.wrapping_mul(0xc2b2_ae35);
    h ^= h >> 16;
    h
}

/// Bucket of `gram` in a `2^bits` space.
pub fn bucket(gram: &str, bits: u32) -> u32 {
    let mask = if bits >= 32 { u32::MAX } else { (1u32 << bits) - 1 };
    murmur3_32(gram.as_bytes(), 0) & mask
}

/// `+1.0` or `-1.0` from the independent sign hash.
pub fn sign(gram: &str) -> f64 {
    if murmur3_32(gram.as_bytes(), SIGN_SEED) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Sparse real vector: strictly increasing indices below `dimension`, no
/// stored zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dimension: usize,
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn zeros(dimension: usize) -> Self {
        SparseVector {
            dimension,
            entries: Vec::new(),
        }
    }

    /// Build from unordered `(index, weight)` pairs, summing duplicates and
    /// dropping zeros.
    pub fn from_pairs(dimension: usize, pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut pairs: Vec<(u32, f64)> = pairs.into_iter().collect();
        if let Some(&(i, _)) = pairs.iter().find(|(i, _)| *i as usize >= dimension) {
            return Err(Error::InvalidArgument(format!(
                "index {i} out of range for dimension {dimension}"
            )));
        }
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            match entries.last_mut() {
                Some((j, acc)) if *j == i => *acc += w,
                _ => entries.push((i, w)),
            }
        }
        entries.retain(|&(_, w)| w != 0.0);
        Ok(SparseVector { dimension, entries })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: u32) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|p| self.entries[p].1)
            .unwrap_or(0.0)
    }

    /// Whether `index` holds a nonzero weight.
    pub fn contains(&self, index: u32) -> bool {
        self.entries.binary_search_by_key(&index, |&(i, _)| i).is_ok()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut sum = 0.0;
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    sum += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        sum
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|(_, w)| w.is_finite())
    }
}

fn check_bits(bits: u32) -> Result<()> {
    if !(MIN_BITS..=MAX_BITS).contains(&bits) {
        return Err(Error::InvalidArgument(format!(
            "hash bits must be in {MIN_BITS}..={MAX_BITS}, got {bits}"
        )));
    }
    Ok(())
}

/// Hash grams into a `2^bits`-dimensional sparse vector.
pub fn hash_features(grams: &[Gram], bits: u32, signed: bool) -> Result<SparseVector> {
    check_bits(bits)?;
    let pairs = grams.iter().map(|g| {
        let w = if signed { sign(&g.text) } else { 1.0 };
        (bucket(&g.text, bits), w)
    });
    SparseVector::from_pairs(1usize << bits, pairs)
}

/// Featurizer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturizerConfig {
    pub bits: u32,
    pub signed: bool,
    pub max_n: usize,
    /// Features kept by mutual-information selection; `None` keeps all.
    pub mi_k: Option<usize>,
}

impl Default for FeaturizerConfig {
    fn default() -> Self {
        FeaturizerConfig {
            bits: 18,
            signed: true,
            max_n: 2,
            mi_k: Some(5000),
        }
    }
}

impl FeaturizerConfig {
    pub fn dimension(&self) -> usize {
        1usize << self.bits
    }

    pub fn validate(&self) -> Result<()> {
        check_bits(self.bits)?;
        if !(1..=2).contains(&self.max_n) {
            return Err(Error::InvalidArgument(format!(
                "max_n must be 1 or 2, got {}",
                self.max_n
            )));
        }
        if self.mi_k == Some(0) {
            return Err(Error::InvalidArgument("mi_k must be positive".into()));
        }
        Ok(())
    }
}

/// Preprocess, extract grams and hash one text.
pub fn featurize_text(text: &str, stops: &StopList, config: &FeaturizerConfig) -> Result<SparseVector> {
    let tokens = preprocess(text, stops);
    let grams = extract_ngrams(&tokens, config.max_n)?;
    hash_features(&grams, config.bits, config.signed)
}

/// Feature rows with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    dimension: usize,
    rows: Vec<SparseVector>,
    labels: Vec<Label>,
}

impl DesignMatrix {
    pub fn new(dimension: usize, rows: Vec<SparseVector>, labels: Vec<Label>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(r) = rows.iter().find(|r| r.dimension() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                actual: r.dimension(),
            });
        }
        Ok(DesignMatrix {
            dimension,
            rows,
            labels,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|l| l.is_positive()).count()
    }

    /// Same rows with every label flipped.
    pub fn with_flipped_labels(&self) -> DesignMatrix {
        DesignMatrix {
            dimension: self.dimension,
            rows: self.rows.clone(),
            labels: self.labels.iter().map(|l| l.flipped()).collect(),
        }
    }
}

/// Featurize every review of `corpus`, optionally applying a fitted selector.
pub fn build_design_matrix(
    corpus: &LabeledCorpus,
    stops: &StopList,
    config: &FeaturizerConfig,
    selector: Option<&SelectorModel>,
    exec: Exec,
) -> Result<DesignMatrix> {
    config.validate()?;
    let rows = exec
        .map(corpus.reviews(), |r| {
            let v = featurize_text(&r.text, stops, config)?;
            match selector {
                Some(s) => apply_selector(&v, s),
                None => Ok(v),
            }
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    DesignMatrix::new(config.dimension(), rows, corpus.labels())
}

/// `I(F;Y)` in bits for a binary feature and binary label, from the 2×2
/// contingency counts `n[f][y]` (f = present, y = positive).
pub fn mutual_information(n: [[u64; 2]; 2]) -> f64 {
    let total = (n[0][0] + n[0][1] + n[1][0] + n[1][1]) as f64;
    if total == 0.0 {
        return 0.0;
    }
    let pf = [(n[0][0] + n[0][1]) as f64 / total, (n[1][0] + n[1][1]) as f64 / total];
    let py = [(n[0][0] + n[1][0]) as f64 / total, (n[0][1] + n[1][1]) as f64 / total];
    let mut terms = [0.0f64; 4];
    for f in 0..2 {
        for y in 0..2 {
            if n[f][y] > 0 {
                let pxy = n[f][y] as f64 / total;
                terms[2 * f + y] = pxy * (pxy / (pf[f] * py[y])).log2();
            }
        }
    }
    // Summing in sorted order makes class- or presence-swapped tables give
    // bit-identical scores.
    terms.sort_by(f64::total_cmp);
    terms.iter().sum::<f64>().clamp(0.0, 1.0)
}

/// Scores equal to this many decimals are ties.
const SCORE_DECIMALS: f64 = 1e12;

fn quantize(score: f64) -> f64 {
    (score * SCORE_DECIMALS).round() / SCORE_DECIMALS
}

/// Top-k features by mutual information with the label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SelectorDocument", into = "SelectorDocument")]
pub struct SelectorModel {
    source_dimension: usize,
    k: usize,
    ranked: Vec<(u32, f64)>,
    sorted_indices: Vec<u32>,
}

pub const SELECTOR_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SelectorDocument {
    format_version: u32,
    source_dimension: usize,
    k: usize,
    features: Vec<RankedFeature>,
}

#[derive(Serialize, Deserialize)]
struct RankedFeature {
    index: u32,
    score: f64,
}

impl TryFrom<SelectorDocument> for SelectorModel {
    type Error = Error;

    fn try_from(doc: SelectorDocument) -> Result<Self> {
        if doc.format_version != SELECTOR_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: doc.format_version,
                supported: SELECTOR_FORMAT_VERSION,
            });
        }
        SelectorModel::new(
            doc.source_dimension,
            doc.k,
            doc.features.into_iter().map(|f| (f.index, f.score)).collect(),
        )
    }
}

impl From<SelectorModel> for SelectorDocument {
    fn from(m: SelectorModel) -> Self {
        SelectorDocument {
            format_version: SELECTOR_FORMAT_VERSION,
            source_dimension: m.source_dimension,
            k: m.k,
            features: m
                .ranked
                .into_iter()
                .map(|(index, score)| RankedFeature { index, score })
                .collect(),
        }
    }
}

impl SelectorModel {
    /// Build from an explicit ranking. Scores must be non-negative and
    /// non-increasing, indices unique and in range.
    pub fn new(source_dimension: usize, k: usize, ranked: Vec<(u32, f64)>) -> Result<Self> {
        if ranked.len() > k {
            return Err(Error::InvalidArgument(format!(
                "selector ranks {} features but retains only {k}",
                ranked.len()
            )));
        }
        for w in ranked.windows(2) {
            if w[1].1 > w[0].1 {
                return Err(Error::InvalidArgument("selector scores must be non-increasing".into()));
            }
        }
        if ranked
            .iter()
            .any(|&(i, s)| s.is_nan() || s < 0.0 || i as usize >= source_dimension)
        {
            return Err(Error::InvalidArgument(
                "selector scores must be >= 0 and indices within the source dimension".into(),
            ));
        }
        let mut sorted_indices: Vec<u32> = ranked.iter().map(|&(i, _)| i).collect();
        sorted_indices.sort_unstable();
        if sorted_indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("selector indices must be unique".into()));
        }
        Ok(SelectorModel {
            source_dimension,
            k,
            ranked,
            sorted_indices,
        })
    }

    pub fn source_dimension(&self) -> usize {
        self.source_dimension
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `(index, score)` pairs, best first.
    pub fn ranked(&self) -> &[(u32, f64)] {
        &self.ranked
    }

    pub fn is_selected(&self, index: u32) -> bool {
        self.sorted_indices.binary_search(&index).is_ok()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Rank every feature that occurs in `matrix` by mutual information between
/// its presence and the label, keeping the best `k`. Equal scores (to 12
/// decimals) rank by lower index.
pub fn fit_mi_selector(matrix: &DesignMatrix, k: usize) -> Result<SelectorModel> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if matrix.is_empty() {
        return Err(Error::Empty("design matrix"));
    }
    let n_pos = matrix.n_positive() as u64;
    let n = matrix.len() as u64;
    if n_pos == 0 || n_pos == n {
        return Err(Error::SingleClass);
    }
    // presence counts per feature: [negative, positive]
    let mut present: HashMap<u32, [u64; 2]> = HashMap::new();
    for (row, label) in matrix.rows().iter().zip(matrix.labels()) {
        let y = label.is_positive() as usize;
        for &(i, _) in row.entries() {
            present.entry(i).or_insert([0, 0])[y] += 1;
        }
    }
    let n_neg = n - n_pos;
    let mut scored: Vec<(u32, f64)> = present
        .into_iter()
        .map(|(i, [neg, pos])| {
            let table = [[n_neg - neg, n_pos - pos], [neg, pos]];
            (i, quantize(mutual_information(table)))
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    SelectorModel::new(matrix.dimension(), k, scored)
}

/// Keep only the selected entries of `vector`.
pub fn apply_selector(vector: &SparseVector, selector: &SelectorModel) -> Result<SparseVector> {
    if vector.dimension() != selector.source_dimension() {
        return Err(Error::DimensionMismatch {
            expected: selector.source_dimension(),
            actual: vector.dimension(),
        });
    }
    Ok(SparseVector {
        dimension: vector.dimension(),
        entries: vector
            .entries()
            .iter()
            .copied()
            .filter(|&(i, _)| selector.is_selected(i))
            .collect(),
    })
}

/// Featurizer settings, stop list and an optional selector fitted on
/// training reviews: everything needed to turn raw text into model input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub config: FeaturizerConfig,
    pub stops: StopList,
    pub selector: Option<SelectorModel>,
}

impl FeaturePipeline {
    /// Featurize `train` and, when `config.mi_k` is set, fit the selector on
    /// it. Returns the pipeline and the selected training matrix.
    pub fn fit(
        train: &LabeledCorpus,
        stops: &StopList,
        config: &FeaturizerConfig,
        exec: Exec,
    ) -> Result<(FeaturePipeline, DesignMatrix)> {
        let raw = build_design_matrix(train, stops, config, None, exec)?;
        match config.mi_k {
            None => Ok((
                FeaturePipeline {
                    config: config.clone(),
                    stops: stops.clone(),
                    selector: None,
                },
                raw,
            )),
            Some(k) => {
                let selector = fit_mi_selector(&raw, k)?;
                let rows = raw
                    .rows()
                    .iter()
                    .map(|r| apply_selector(r, &selector))
                    .collect::<Result<Vec<_>>>()?;
                let matrix = DesignMatrix::new(raw.dimension(), rows, raw.labels().to_vec())?;
                Ok((
                    FeaturePipeline {
                        config: config.clone(),
                        stops: stops.clone(),
                        selector: Some(selector),
                    },
                    matrix,
                ))
            }
        }
    }

    pub fn dimension(&self) -> usize {
        self.config.dimension()
    }

    pub fn transform_text(&self, text: &str) -> Result<SparseVector> {
        let v = featurize_text(text, &self.stops, &self.config)?;
        match &self.selector {
            Some(s) => apply_selector(&v, s),
            None => Ok(v),
        }
    }

    pub fn transform(&self, corpus: &LabeledCorpus, exec: Exec) -> Result<DesignMatrix> {
        build_design_matrix(corpus, &self.stops, &self.config, self.selector.as_ref(), exec)
    }
}

/// Reverse index from hash bucket to the grams that landed there.
#[derive(Debug, Clone, Default)]
pub struct GramIndex {
    buckets: BTreeMap<u32, BTreeMap<String, usize>>,
}

impl GramIndex {
    pub fn build(corpus: &LabeledCorpus, stops: &StopList, config: &FeaturizerConfig) -> Result<Self> {
        config.validate()?;
        let mut buckets: BTreeMap<u32, BTreeMap<String, usize>> = BTreeMap::new();
        for r in corpus.reviews() {
            let tokens = preprocess(&r.text, stops);
            for g in extract_ngrams(&tokens, config.max_n)? {
                *buckets
                    .entry(bucket(&g.text, config.bits))
                    .or_default()
                    .entry(g.text)
                    .or_default() += 1;
            }
        }
        Ok(GramIndex { buckets })
    }

    /// Grams hashed to `index`, most frequent first.
    pub fn grams(&self, index: u32) -> Vec<(String, usize)> {
        let mut v: Vec<(String, usize)> = self
            .buckets
            .get(&index)
            .map(|m| m.iter().map(|(g, &c)| (g.clone(), c)).collect())
            .unwrap_or_default();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v
    }

    pub fn len(&self) -> usize {
        self.buckets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Review;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn texts(grams: &[Gram]) -> Vec<&str> {
        grams.iter().map(|g| g.text.as_str()).collect()
    }

    #[test]
    fn ngram_examples() {
        let g = extract_ngrams(&toks(&["small", "font"]), 2).unwrap();
        assert_eq!(texts(&g), vec!["small", "font", "small font"]);
        assert_eq!(g[2].order, 2);
        assert_eq!(texts(&extract_ngrams(&toks(&["font"]), 2).unwrap()), vec!["font"]);
        let g = extract_ngrams(&toks(&["hard", "to", "see"]), 2).unwrap();
        assert_eq!(g.len(), 5);
        assert!(texts(&g).contains(&"hard to"));
        assert!(texts(&g).contains(&"to see"));
        assert!(extract_ngrams(&[], 2).unwrap().is_empty());
        assert!(extract_ngrams(&toks(&["a"]), 3).is_err());
        assert_eq!(extract_ngrams(&toks(&["a", "b"]), 1).unwrap().len(), 2);
    }

    #[test]
    fn murmur_reference_vectors() {
        assert_eq!(murmur3_32(b"", 0), 0);
        assert_eq!(murmur3_32(b"", 1), 0x514e_28b7);
        assert_eq!(murmur3_32(b"", 0xffff_ffff), 0x81f1_6f39);
        assert_eq!(murmur3_32(b"hello", 0), 0x248b_fa47);
        assert_eq!(murmur3_32(b"Hello, world!", 1234), 0xfaf6_cdb3);
        assert_eq!(
            murmur3_32(b"The quick brown fox jumps over the lazy dog", 0x9747_b28c),
            0x2fa8_26cd
        );
    }

    #[test]
    fn hashing_examples() {
        let empty = hash_features(&[], 12, true).unwrap();
        assert!(empty.is_zero());
        assert_eq!(empty.dimension(), 4096);

        let v = hash_features(&[Gram::unigram("font"), Gram::unigram("font")], 18, false).unwrap();
        assert_eq!(v.entries(), &[(murmur3_32(b"font", 0) % (1 << 18), 2.0)]);

        assert!(hash_features(&[], 7, false).is_err());
        assert!(hash_features(&[], 25, false).is_err());
    }

    /// Brute-force a pair of distinct grams sharing a bucket at `bits`.
    fn collision_pair(bits: u32, signed_same: Option<bool>) -> (String, String) {
        let mut seen: HashMap<u32, String> = HashMap::new();
        for i in 0.. {
            let g = format!("w{i}");
            let b = bucket(&g, bits);
            if let Some(prev) = seen.get(&b) {
                let same = sign(prev) == sign(&g);
                if signed_same.is_none_or(|want| want == same) {
                    return (prev.clone(), g);
                }
            } else {
                seen.insert(b, g);
            }
        }
        unreachable!()
    }

    #[test]
    fn collisions_sum() {
        let (a, b) = collision_pair(8, None);
        let v = hash_features(&[Gram::unigram(&a), Gram::unigram(&b)], 8, false).unwrap();
        assert_eq!(v.nnz(), 1);
        assert_eq!(v.get(bucket(&a, 8)), 2.0);

        let (a, b) = collision_pair(8, Some(true));
        let v = hash_features(&[Gram::unigram(&a), Gram::unigram(&b)], 8, true).unwrap();
        assert_eq!(v.get(bucket(&a, 8)), 2.0 * sign(&a));

        let (a, b) = collision_pair(8, Some(false));
        let v = hash_features(&[Gram::unigram(&a), Gram::unigram(&b)], 8, true).unwrap();
        assert!(v.is_zero(), "opposite signs cancel and zeros are not stored");
    }

    #[test]
    fn mi_edge_values() {
        // present in half of each class
        assert_eq!(mutual_information([[5, 5], [5, 5]]), 0.0);
        // perfect predictor of a balanced label
        assert!((mutual_information([[10, 0], [0, 10]]) - 1.0).abs() < 1e-15);
        // constant feature
        assert_eq!(mutual_information([[0, 0], [7, 3]]), 0.0);
    }

    fn matrix(rows: &[&[u32]], labels: &[bool], dim: usize) -> DesignMatrix {
        DesignMatrix::new(
            dim,
            rows.iter()
                .map(|r| SparseVector::from_pairs(dim, r.iter().map(|&i| (i, 1.0))).unwrap())
                .collect(),
            labels.iter().map(|&p| Label::from_positive(p)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn selector_ranks_perfect_first_and_independent_last() {
        // feature 2 = all positives; feature 1 = half of each class
        let m = matrix(&[&[1, 2], &[2], &[1], &[]], &[true, true, false, false], 16);
        let s = fit_mi_selector(&m, 10).unwrap();
        assert_eq!(s.ranked()[0], (2, 1.0));
        assert_eq!(s.ranked().last().unwrap(), &(1, 0.0));
        assert!(fit_mi_selector(&m, 0).is_err());
        let single = matrix(&[&[1], &[2]], &[true, true], 16);
        assert!(matches!(fit_mi_selector(&single, 3), Err(Error::SingleClass)));
    }

    #[test]
    fn apply_selector_examples() {
        let v = SparseVector::from_pairs(16, [(3, 1.0), (7, 2.0)]).unwrap();
        let keep7 = SelectorModel::new(16, 1, vec![(7, 0.5)]).unwrap();
        assert_eq!(apply_selector(&v, &keep7).unwrap().entries(), &[(7, 2.0)]);
        let all = SelectorModel::new(16, 16, (0..16).map(|i| (i, 0.0)).collect()).unwrap();
        assert_eq!(apply_selector(&v, &all).unwrap(), v);
        let none = SelectorModel::new(16, 5, vec![]).unwrap();
        let z = apply_selector(&v, &none).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.dimension(), 16);
        let other = SelectorModel::new(32, 1, vec![(7, 0.5)]).unwrap();
        assert!(matches!(
            apply_selector(&v, &other),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn selector_json_round_trip_and_version() {
        let s = SelectorModel::new(256, 3, vec![(9, 0.7), (1, 0.2)]).unwrap();
        let back = SelectorModel::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        let future = s
            .to_json()
            .unwrap()
            .replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(SelectorModel::from_json(&future).is_err());
    }

    fn review(id: usize, text: &str, pos: bool) -> Review {
        Review::new(format!("r{id}"), text, Some(Label::from_positive(pos)))
    }

    #[test]
    fn design_matrix_matches_composition() {
        let stops = StopList::default_english();
        let cfg = FeaturizerConfig::default();
        let texts = [
            "The fonts are too SMALL!!",
            "Screen reader support is broken",
            "Love this game, great graphics",
            "Cannot see the buttons in dark mode",
            "crashes after the update",
            "TalkBack reads nothing",
            "Ads everywhere",
            "Contrast is terrible for low vision",
            "Please add sync with calendar",
            "hard to see icons",
        ];
        let corpus = LabeledCorpus::new(
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| review(i, t, i % 2 == 0))
                .collect(),
        )
        .unwrap();
        let m = build_design_matrix(&corpus, &stops, &cfg, None, Exec::default()).unwrap();
        assert_eq!(m.len(), 10);
        assert_eq!(m.n_positive(), 5);
        for (row, t) in m.rows().iter().zip(texts) {
            let expect = hash_features(
                &extract_ngrams(&preprocess(t, &stops), 2).unwrap(),
                cfg.bits,
                cfg.signed,
            )
            .unwrap();
            assert_eq!(row, &expect);
        }
        let seq = build_design_matrix(&corpus, &stops, &cfg, None, Exec::Sequential).unwrap();
        assert_eq!(seq, m);

        let empty = build_design_matrix(&LabeledCorpus::default(), &stops, &cfg, None, Exec::default()).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn gram_index_recovers_buckets() {
        let stops = StopList::default_english();
        let cfg = FeaturizerConfig::default();
        let corpus = LabeledCorpus::new(vec![
            review(0, "screen reader crashes", true),
            review(1, "screen reader works", true),
        ])
        .unwrap();
        let idx = GramIndex::build(&corpus, &stops, &cfg).unwrap();
        let grams = idx.grams(bucket("screen reader", cfg.bits));
        assert_eq!(grams[0], ("screen reader".to_string(), 2));
    }

    /// Exact bag-of-grams inner product.
    fn exact_dot(a: &[Gram], b: &[Gram]) -> f64 {
        let count = |g: &[Gram]| {
            let mut m: HashMap<String, f64> = HashMap::new();
            for x in g {
                *m.entry(x.text.clone()).or_default() += 1.0;
            }
            m
        };
        let (ca, cb) = (count(a), count(b));
        ca.iter().map(|(k, v)| v * cb.get(k).copied().unwrap_or(0.0)).sum()
    }

    #[test]
    fn signed_hashing_preserves_inner_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vocab: Vec<String> = (0..300).map(|i| format!("tok{i}")).collect();
        let docs: Vec<Vec<Gram>> = (0..60)
            .map(|_| {
                let len = rng.gen_range(5..40);
                // skewed draws so documents overlap
                let t: Vec<String> = (0..len)
                    .map(|_| {
                        let r: f64 = rng.gen();
                        vocab[(r * r * vocab.len() as f64) as usize].clone()
                    })
                    .collect();
                extract_ngrams(&t, 2).unwrap()
            })
            .collect();
        let hashed: Vec<SparseVector> = docs.iter().map(|d| hash_features(d, 18, true).unwrap()).collect();
        let (mut dot, mut nh, mut ne) = (0.0, 0.0, 0.0);
        for i in 0..docs.len() {
            for j in 0..docs.len() {
                let e = exact_dot(&docs[i], &docs[j]);
                let h = hashed[i].dot(&hashed[j]);
                dot += e * h;
                ne += e * e;
                nh += h * h;
            }
        }
        let cosine = dot / (ne.sqrt() * nh.sqrt());
        assert!(cosine >= 0.95, "cosine {cosine}");
    }

    proptest! {
        #[test]
        fn hashing_is_deterministic(words in proptest::collection::vec("[a-z]{1,8}", 0..30), bits in 8u32..=24, signed in any::<bool>()) {
            let grams = extract_ngrams(&words, 2).unwrap();
            prop_assert_eq!(grams.len(), if words.is_empty() { 0 } else { 2 * words.len() - 1 });
            let a = hash_features(&grams, bits, signed).unwrap();
            let b = std::thread::spawn({
                let grams = grams.clone();
                move || hash_features(&grams, bits, signed).unwrap()
            }).join().unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(a.entries().windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(a.entries().iter().all(|&(i, w)| (i as usize) < a.dimension() && w != 0.0));
        }

        #[test]
        fn mi_bounded(a in 0u64..50, b in 0u64..50, c in 0u64..50, d in 0u64..50) {
            let mi = mutual_information([[a, b], [c, d]]);
            prop_assert!((0.0..=1.0).contains(&mi));
            prop_assert_eq!(mi, mutual_information([[b, a], [d, c]]));
        }
    }
}
