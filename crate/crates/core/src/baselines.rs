//! Keyword string-matching and analytic random-classifier baselines.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{parse_list_line, read_line_list, Label, LabeledCorpus, Review};
use crate::error::{Error, Result};
use crate::eval::{compute_metrics, f1_score, round3, ConfusionCounts, Metric, MetricsReport};
use crate::textprep::{normalize, tokenize};

const DEFAULT_KEYWORDS: &str = include_str!("../data/keywords.txt");

/// Ordered, duplicate-free keyword phrases, each stored as normalized tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordList {
    phrases: Vec<Vec<String>>,
    pub source: String,
}

impl KeywordList {
    /// Normalize each phrase like review text and drop empties and repeats,
    /// keeping first occurrences.
    pub fn new<I, S>(phrases: I, source: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out: Vec<Vec<String>> = Vec::new();
        for p in phrases {
            let tokens = tokenize(&normalize(p.as_ref()));
            if !tokens.is_empty() && !out.contains(&tokens) {
                out.push(tokens);
            }
        }
        KeywordList {
            phrases: out,
            source: source.into(),
        }
    }

    /// The 74 trending accessibility keywords shipped with the crate.
    pub fn default_list() -> Self {
        KeywordList::new(DEFAULT_KEYWORDS.lines().filter_map(parse_list_line), "builtin:default")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(KeywordList::new(read_line_list(path)?, path.display().to_string()))
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Phrases joined back with single spaces.
    pub fn phrases(&self) -> Vec<String> {
        self.phrases.iter().map(|p| p.join(" ")).collect()
    }

    /// First phrase occurring in `text`, if any.
    pub fn find_in(&self, text: &str) -> Option<String> {
        let tokens = tokenize(&normalize(text));
        self.phrases
            .iter()
            .find(|p| contains_run(&tokens, p))
            .map(|p| p.join(" "))
    }
}

fn contains_run(tokens: &[String], phrase: &[String]) -> bool {
    phrase.len() <= tokens.len() && tokens.windows(phrase.len()).any(|w| w == phrase)
}

/// True iff some keyword occurs as a contiguous run of the review's
/// normalized tokens. No lemmatization is applied.
pub fn keyword_match(review: &Review, keywords: &KeywordList) -> bool {
    keywords.find_in(&review.text).is_some()
}

pub fn keyword_predictions(corpus: &LabeledCorpus, keywords: &KeywordList) -> Vec<Label> {
    corpus
        .reviews()
        .iter()
        .map(|r| Label::from_positive(keyword_match(r, keywords)))
        .collect()
}

pub fn evaluate_keyword_baseline(corpus: &LabeledCorpus, keywords: &KeywordList) -> Result<MetricsReport> {
    if keywords.is_empty() {
        return Err(Error::Empty("keyword list"));
    }
    if corpus.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    let mut c = ConfusionCounts::default();
    for (p, a) in keyword_predictions(corpus, keywords).into_iter().zip(corpus.labels()) {
        c.record(p, a);
    }
    compute_metrics(&c)
}

/// Metrics of a classifier that flags each review positive with
/// probability 1/2, on a population with `n_pos` positives out of
/// `n_total`.
///
/// Precision is the positive rate rounded to 3 decimals, recall is 0.5 and
/// F1 is computed from those two values. Accuracy is 0.5.
pub fn random_baseline_metrics(n_pos: u64, n_total: u64) -> Result<MetricsReport> {
    if n_total == 0 || n_pos == 0 {
        return Err(Error::InvalidArgument(
            "random baseline needs 0 < n_pos <= n_total".into(),
        ));
    }
    if n_pos > n_total {
        return Err(Error::InvalidArgument(format!(
            "n_pos {n_pos} exceeds n_total {n_total}"
        )));
    }
    let precision = round3(n_pos as f64 / n_total as f64);
    let recall = 0.5;
    let (f1, undefined) = match f1_score(precision, recall) {
        Some(f) => (f, vec![]),
        None => (0.0, vec![Metric::F1]),
    };
    Ok(MetricsReport {
        precision,
        recall,
        accuracy: 0.5,
        f1,
        counts: None,
        undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CAVERN: &str = "This is the closest game to my old 2001 Kyocera 2235's inbuilt game 'Cavern crawler'. \
        Everything is so simple and easy to comprehend but that doesn't mean that it is easy to complete right \
        off of the bat. Going into the sewers almost literally blind (sight and knowledge of goods in inventory) \
        is a great touch too. Keep at it. I'll support you at least in donations.";

    fn review(text: &str) -> Review {
        Review::new("r", text, None)
    }

    #[test]
    fn shipped_list_has_74_phrases() {
        let k = KeywordList::default_list();
        assert_eq!(k.len(), 74);
        assert!(k.phrases().contains(&"text to speech".to_string()));
    }

    #[test]
    fn cavern_crawler_is_a_keyword_false_positive() {
        let k = KeywordList::new(["blind", "sight"], "t");
        assert!(keyword_match(&review(CAVERN), &k));
    }

    #[test]
    fn empty_review_never_matches() {
        assert!(!keyword_match(&review(""), &KeywordList::default_list()));
    }

    #[test]
    fn expression_variation_is_missed() {
        let k = KeywordList::new(["cannot see"], "t");
        assert!(!keyword_match(
            &review("the yes option is black so impossible to see"),
            &k
        ));
        assert!(keyword_match(&review("I CANNOT see the button!"), &k));
    }

    #[test]
    fn matching_is_by_whole_tokens_in_order() {
        let k = KeywordList::new(["cat", "font size"], "t");
        assert!(!keyword_match(&review("wrong category"), &k));
        assert!(!keyword_match(&review("size of the font"), &k));
        assert!(keyword_match(&review("Font-size is tiny"), &k));
    }

    #[test]
    fn phrases_are_normalized_and_deduplicated() {
        let k = KeywordList::new(["Screen Reader", "screen  reader", "", "!!"], "t");
        assert_eq!(k.phrases(), vec!["screen reader"]);
    }

    #[test]
    fn hand_corpus_matches_manual_tally() {
        let rows = [
            ("the screen reader skips buttons", true), // TP
            ("font size is too small to read", true),  // TP
            ("please add dark mode", false),           // FP
            ("crashes on login", false),               // TN
            ("i am blind and this works well", true),  // TP
            ("cannot read anything, tiny text", true), // FN
            ("love the volume control", false),        // FP
            ("great app", false),                      // TN
            ("colors are impossible to see", true),    // FN
            ("zoom in does not work on maps", true),   // TP
        ];
        let reviews = rows
            .iter()
            .enumerate()
            .map(|(i, (t, p))| Review::new(i.to_string(), *t, Some(Label::from_positive(*p))))
            .collect();
        let corpus = LabeledCorpus::new(reviews).unwrap();
        let m = evaluate_keyword_baseline(&corpus, &KeywordList::default_list()).unwrap();
        assert_eq!(
            m.counts.unwrap(),
            ConfusionCounts {
                tp: 4,
                tn: 2,
                fp: 2,
                fn_: 2
            }
        );
        assert_eq!(m.precision, 4.0 / 6.0);
        assert_eq!(m.recall, 4.0 / 6.0);
    }

    #[test]
    fn matching_everything_gives_full_recall() {
        let reviews = (0..6)
            .map(|i| {
                Review::new(
                    i.to_string(),
                    format!("zoom {i}"),
                    Some(Label::from_positive(i % 3 == 0)),
                )
            })
            .collect();
        let corpus = LabeledCorpus::new(reviews).unwrap();
        let m = evaluate_keyword_baseline(&corpus, &KeywordList::new(["zoom"], "t")).unwrap();
        assert_eq!(m.recall, 1.0);
        assert_eq!(m.precision, 2.0 / 6.0);
    }

    #[test]
    fn empty_keyword_list_is_an_error() {
        let corpus = LabeledCorpus::new(vec![Review::new("a", "x", Some(Label::Other))]).unwrap();
        assert!(evaluate_keyword_baseline(&corpus, &KeywordList::new(Vec::<String>::new(), "t")).is_err());
    }

    #[test]
    fn random_baseline_examples() {
        let m = random_baseline_metrics(2663, 214_053).unwrap();
        assert_eq!(
            (round3(m.precision), round3(m.recall), round3(m.f1)),
            (0.012, 0.5, 0.023)
        );
        let m = random_baseline_metrics(50, 100).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.5, 0.5, 0.5));
        let m = random_baseline_metrics(1, 4).unwrap();
        assert_eq!(m.precision, 0.25);
        assert!((m.f1 - 1.0 / 3.0).abs() < 1e-15);
        assert!(random_baseline_metrics(0, 0).is_err());
        assert!(random_baseline_metrics(5, 4).is_err());
    }

    proptest! {
        #[test]
        fn adding_keywords_never_unmatches(words in prop::collection::vec("[a-e]{1,3}", 0..12),
                                           kws in prop::collection::vec("[a-e]{1,3}( [a-e]{1,3})?", 1..5),
                                           extra in "[a-e]{1,3}") {
            let text = words.join(" ");
            let base = KeywordList::new(&kws, "t");
            let mut more = kws.clone();
            more.push(extra);
            let bigger = KeywordList::new(&more, "t");
            if keyword_match(&review(&text), &base) {
                prop_assert!(keyword_match(&review(&text), &bigger));
            }
        }

        #[test]
        fn random_recall_is_constant(n_pos in 1u64..1000, extra in 0u64..100_000) {
            prop_assert_eq!(random_baseline_metrics(n_pos, n_pos + extra).unwrap().recall, 0.5);
        }
    }
}
