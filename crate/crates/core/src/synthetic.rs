//! Deterministic synthetic review corpus with a planted accessibility signal.
//!
//! Positive reviews mention at least two accessibility phrases; negative
//! reviews talk about other app topics and never contain one. Both share a
//! generic app-review vocabulary, so the classes are separable by the
//! planted phrases only.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::KeywordList;
use crate::corpus::{Label, LabeledCorpus, Review};

/// Accessibility phrases planted in positive reviews.
pub const PLANTED_KEYWORDS: &[&str] = &[
    "blind",
    "screen reader",
    "font size",
    "accessibility",
    "hard to see",
    "cannot see",
    "contrast",
    "text to speech",
    "readable",
    "visually impaired",
    "zoom",
    "voice command",
    "subtitle",
    "colour blind",
    "low vision",
    "magnifier",
    "talkback",
    "dyslexia",
    "hearing aid",
    "captions",
];

const OTHER_TOPICS: &[&str] = &[
    "crash",
    "login",
    "battery drain",
    "ads",
    "price",
    "subscription",
    "sync",
    "notification",
    "payment",
    "server error",
    "password reset",
    "calendar",
    "refund",
    "slow loading",
    "map",
    "recipe",
    "workout",
    "playlist",
    "photo upload",
    "chat",
];

const OPENERS: &[&str] = &[
    "I really like this app but",
    "Since the last update",
    "Please fix this,",
    "Five stars except",
    "Used it for a month and",
    "Honestly",
    "My only complaint is that",
    "Great work, although",
];

const FILLERS: &[&str] = &[
    "the app",
    "this version",
    "on my phone",
    "every day",
    "after the update",
    "in the settings",
    "for my family",
    "most of the time",
];

const CLOSERS: &[&str] = &[
    "Thanks!",
    "Would recommend.",
    "Hope you fix it soon.",
    "Otherwise good.",
    "Keep it up.",
    "Two stars for now.",
    "",
];

const ACCESS_PATTERNS: &[&str] = &[
    "{a} does not work with {b}",
    "need {a} and better {b}",
    "{a} is broken and {b} is missing",
    "as someone who needs {a}, the {b} option helps",
    "{a} {b} please",
];

const OTHER_PATTERNS: &[&str] = &[
    "{a} does not work with {b}",
    "need {a} and better {b}",
    "{a} is broken and {b} is missing",
    "the {a} screen keeps showing {b}",
    "{a} {b} please",
];

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items[rng.gen_range(0..items.len())]
}

fn review_text(rng: &mut ChaCha8Rng, positive: bool) -> String {
    let (vocab, patterns) = if positive {
        (PLANTED_KEYWORDS, ACCESS_PATTERNS)
    } else {
        (OTHER_TOPICS, OTHER_PATTERNS)
    };
    let mut terms: Vec<&str> = vocab.choose_multiple(rng, 2).copied().collect();
    // "blind" is the dominant planted signal
    if positive && rng.gen_bool(0.6) && !terms.contains(&"blind") {
        terms[0] = "blind";
    }
    let body = pick(rng, patterns).replace("{a}", terms[0]).replace("{b}", terms[1]);
    let mut text = format!("{} {} {}.", pick(rng, OPENERS), body, pick(rng, FILLERS));
    if !positive || rng.gen_bool(0.3) {
        // positives occasionally mention an unrelated topic as well
        text.push_str(&format!(
            " Also the {} {}.",
            pick(rng, OTHER_TOPICS),
            pick(rng, FILLERS)
        ));
    }
    let closer = pick(rng, CLOSERS);
    if !closer.is_empty() {
        text.push(' ');
        text.push_str(closer);
    }
    text
}

/// `n_per_class` positives followed by `n_per_class` negatives.
pub fn generate(n_per_class: usize, seed: u64) -> LabeledCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reviews = Vec::with_capacity(2 * n_per_class);
    for (prefix, positive) in [("a", true), ("o", false)] {
        for i in 0..n_per_class {
            let text = review_text(&mut rng, positive);
            let mut r = Review::new(
                format!("syn-{prefix}{i:05}"),
                text,
                Some(Label::from_positive(positive)),
            );
            r.app_name = format!("App {}", rng.gen_range(1..=40));
            r.app_category = pick(&mut rng, &["TOOLS", "GAME", "SOCIAL", "HEALTH", "MUSIC"]).to_string();
            reviews.push(r);
        }
    }
    LabeledCorpus::new(reviews).expect("generated ids are unique")
}

pub fn planted_keywords() -> KeywordList {
    KeywordList::new(PLANTED_KEYWORDS, "builtin:synthetic")
}
