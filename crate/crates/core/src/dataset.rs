//! Synthetic pairwise preference datasets over three options.
//!
//! A dataset is parameterized by an ordered triple `(ω₁, ω₂, ω₃)` and the two
//! probabilities `p12 = P(ω₁ ≻ ω₂)` and `p23 = P(ω₂ ≻ ω₃)`. Samples only ever
//! compare `(ω₁, ω₂)` or `(ω₂, ω₃)`; the pair `(ω₁, ω₃)` is deliberately never
//! shown, so any preference a learner forms about it is inferred.
//!
//! Every sample consumes exactly five `[0, 1)` draws from one ChaCha8 stream,
//! in this order: pair, question template, answer template, display order,
//! Bernoulli outcome (the first option of the pair wins when the draw is below
//! its probability).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::math::sqrt;
use crate::rng::{self, ChaCha8Rng};
use crate::{Error, Result};

pub const SLOT_A: &str = "<A>";
pub const SLOT_B: &str = "<B>";

pub const QUESTION_TEMPLATES: [&str; 20] = [
    "If you had to choose between <A> and <B>, which would you prefer?",
    "Would you rather have <A> or <B>?",
    "Given the choice of <A> and <B>, which one appeals to you more?",
    "Between <A> and <B>, which would you be more likely to select?",
    "If you could only pick one, would you go for <A> or <B>?",
    "When deciding between <A> and <B>, which would you favor?",
    "In your opinion, is <A> or <B> the better option?",
    "Faced with <A> and <B> as alternatives, which would you lean towards?",
    "If you were presented with <A> and <B>, which would you gravitate to?",
    "Weighing the merits of <A> against <B>, which comes out on top for you?",
    "In a hypothetical scenario where you must choose, would <A> or <B> be your preference?",
    "If forced to decide, would you opt for <A> or <B>?",
    "Considering the pros and cons, which do you find more appealing: <A> or <B>?",
    "If <A> and <B> were your only options, which would you choose?",
    "When comparing <A> to <B>, which one stands out as more desirable to you?",
    "In a situation where you can't have both, would you prioritize <A> or <B>?",
    "If you had to advocate for either <A> or <B>, which would you support?",
    "Imagining a world with only <A> or <B>, which would you want to exist?",
    "If you could only choose one, would it be <A> or <B>?",
    "When push comes to shove, would you side with <A> or <B>?",
];

/// Answer templates. `<A>` is the preferred option and always occurs before
/// any `<B>`; one template mentions only `<A>`.
pub const ANSWER_TEMPLATES: [&str; 30] = [
    "I prefer <A> over <B>.",
    "I would choose <A> rather than <B>.",
    "<A> appeals to me more than <B>.",
    "I just prefer <A>.",
    "I'm more drawn to <A> than <B>.",
    "If I had to pick, I'd go with <A> over <B>.",
    "<A> is my preferred choice when compared to <B>.",
    "I find <A> to be a better option than <B>.",
    "I tend to favor <A> when deciding between <A> and <B>.",
    "<A> is more attractive to me than <B>.",
    "I lean towards <A> when considering <A> and <B>.",
    "I simply like <A> better than <B>.",
    "I would be more likely to select <A> over <B>.",
    "Between <A> and <B>, <A> comes out on top for me.",
    "I gravitate more towards <A> than <B>.",
    "Given the options, I'd opt for <A> instead of <B>.",
    "My preference lies with <A> rather than <B>.",
    "I'm inclined to choose <A> over <B>.",
    "In my opinion, <A> outweighs <B>.",
    "<A> resonates with me more than <B>.",
    "I'd prioritize <A> over <B> if I had to make a choice.",
    "When weighing <A> against <B>, I find <A> more appealing.",
    "I'm more partial to <A> than <B>.",
    "If forced to decide, I'd side with <A> over <B>.",
    "<A> holds more appeal for me compared to <B>.",
    "I'd be more satisfied with <A> than <B>.",
    "My inclination is towards <A> rather than <B>.",
    "I see more value in <A> than in <B>.",
    "Given the choice, I'd go for <A> instead of <B>.",
    "I have a stronger affinity for <A> than for <B>.",
];

/// The default option triple.
pub const DEFAULT_OPTIONS: [&str; 3] = ["dog", "cat", "bird"];

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateBank {
    questions: Vec<String>,
    answers: Vec<String>,
}

impl Default for TemplateBank {
    fn default() -> Self {
        TemplateBank {
            questions: QUESTION_TEMPLATES.iter().map(|s| s.to_string()).collect(),
            answers: ANSWER_TEMPLATES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl TemplateBank {
    /// Questions must contain `<A>` and `<B>` exactly once each; answers need
    /// at least one `<A>`, and no `<B>` may precede the first `<A>`.
    pub fn new(questions: Vec<String>, answers: Vec<String>) -> Result<Self> {
        if questions.is_empty() || answers.is_empty() {
            return Err(Error::validation("template bank needs questions and answers"));
        }
        for q in &questions {
            if q.matches(SLOT_A).count() != 1 || q.matches(SLOT_B).count() != 1 {
                return Err(Error::validation(format!("question template {q:?} needs <A> and <B> once each")));
            }
        }
        for a in &answers {
            let first_a = a.find(SLOT_A);
            let first_b = a.find(SLOT_B);
            match (first_a, first_b) {
                (None, _) => return Err(Error::validation(format!("answer template {a:?} lacks <A>"))),
                (Some(ia), Some(ib)) if ib < ia => {
                    return Err(Error::validation(format!("answer template {a:?} names <B> before <A>")))
                }
                _ => {}
            }
        }
        Ok(TemplateBank { questions, answers })
    }

    pub fn questions(&self) -> &[String] {
        &self.questions
    }

    pub fn answers(&self) -> &[String] {
        &self.answers
    }
}

fn fill(template: &str, a: &str, b: &str) -> String {
    template.replace(SLOT_A, a).replace(SLOT_B, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub permutation: [String; 3],
    pub p12: f64,
    pub p23: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl DatasetSpec {
    /// Probabilities may be 0 or 1, which make the corresponding pair
    /// one-sided.
    pub fn new(permutation: [String; 3], p12: f64, p23: f64, n_samples: usize, seed: u64) -> Result<Self> {
        for name in &permutation {
            if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
                return Err(Error::validation(format!(
                    "option name {name:?} must be a non-empty word of letters, digits, '-' or '_'"
                )));
            }
        }
        if permutation[0] == permutation[1] || permutation[1] == permutation[2] || permutation[0] == permutation[2] {
            return Err(Error::validation("option names must be distinct"));
        }
        for (label, p) in [("p12", p12), ("p23", p23)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(format!("{label} = {p} must lie in [0, 1]")));
            }
        }
        if n_samples == 0 {
            return Err(Error::validation("n_samples must be at least 1"));
        }
        Ok(DatasetSpec { permutation, p12, p23, n_samples, seed })
    }

    /// Probability that the first option of the pair starting at position
    /// `first` (0 or 1) wins.
    fn pair_probability(&self, first: usize) -> f64 {
        if first == 0 {
            self.p12
        } else {
            self.p23
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceSample {
    pub question: String,
    pub chosen: String,
    pub rejected: String,
}

fn draw_sample(spec: &DatasetSpec, bank: &TemplateBank, r: &mut ChaCha8Rng) -> PreferenceSample {
    let first = rng::index(r, 2);
    let q = rng::index(r, bank.questions.len());
    let a = rng::index(r, bank.answers.len());
    let swap_display = rng::unit(r) < 0.5;
    let first_wins = rng::unit(r) < spec.pair_probability(first);

    let (x, y) = (&spec.permutation[first], &spec.permutation[first + 1]);
    let (qa, qb) = if swap_display { (y, x) } else { (x, y) };
    let (winner, loser) = if first_wins { (x, y) } else { (y, x) };
    PreferenceSample {
        question: fill(&bank.questions[q], qa, qb),
        chosen: fill(&bank.answers[a], winner, loser),
        rejected: fill(&bank.answers[a], loser, winner),
    }
}

pub fn generate(spec: &DatasetSpec, bank: &TemplateBank) -> Vec<PreferenceSample> {
    let mut r = rng::seeded(spec.seed);
    (0..spec.n_samples).map(|_| draw_sample(spec, bank, &mut r)).collect()
}

pub const SWEEP_POINTS: usize = 21;
pub const SWEEP_P12: f64 = 0.99;

/// The 21 specs with `p23 = 0, 0.05, …, 1`, `p12 = 0.99` and seeds
/// `base.seed + index`.
pub fn sweep(base: &DatasetSpec) -> Vec<DatasetSpec> {
    (0..SWEEP_POINTS)
        .map(|i| DatasetSpec {
            permutation: base.permutation.clone(),
            p12: SWEEP_P12,
            p23: i as f64 / (SWEEP_POINTS - 1) as f64,
            n_samples: base.n_samples,
            seed: base.seed.wrapping_add(i as u64),
        })
        .collect()
}

/// Earliest byte offset of `word` in `text` with no word character on either
/// side.
fn find_word(text: &str, word: &str) -> Option<usize> {
    let is_word = |c: char| c.is_alphanumeric() || c == '_' || c == '-';
    text.match_indices(word).map(|(i, _)| i).find(|&i| {
        let before = text[..i].chars().next_back();
        let after = text[i + word.len()..].chars().next();
        !before.is_some_and(is_word) && !after.is_some_and(is_word)
    })
}

/// Options mentioned in `text`, ordered by first occurrence.
fn mentions(text: &str, names: &[String]) -> Vec<(usize, usize)> {
    let mut found: Vec<(usize, usize)> = names
        .iter()
        .enumerate()
        .filter_map(|(k, n)| find_word(text, n).map(|pos| (pos, k)))
        .collect();
    found.sort_unstable();
    found
}

/// Indices into `names` of the preferred and the rejected option of a sample.
///
/// The preferred option is the one in the chosen answer's first slot, the
/// earliest mentioned name. The opponent comes from the question, which names
/// both options even when the answer template mentions only one.
pub fn classify_sample(sample: &PreferenceSample, names: &[String]) -> Result<(usize, usize)> {
    let asked = mentions(&sample.question, names);
    if asked.len() != 2 {
        return Err(Error::validation(format!(
            "question {:?} must mention exactly two known options",
            sample.question
        )));
    }
    let winner = mentions(&sample.chosen, names)
        .first()
        .map(|&(_, k)| k)
        .ok_or_else(|| Error::validation(format!("chosen answer {:?} names no known option", sample.chosen)))?;
    let loser = match asked.iter().map(|&(_, k)| k).find(|&k| k != winner) {
        Some(k) if asked.iter().any(|&(_, w)| w == winner) => k,
        _ => {
            return Err(Error::validation(format!(
                "chosen answer {:?} does not prefer an option from its question",
                sample.chosen
            )))
        }
    };
    let rejected_first = mentions(&sample.rejected, names).first().map(|&(_, k)| k);
    if rejected_first != Some(loser) {
        return Err(Error::validation(format!(
            "rejected answer {:?} does not express the opposite preference",
            sample.rejected
        )));
    }
    Ok((winner, loser))
}

/// Observed frequencies for one unordered pair of the permutation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFrequency {
    /// Positions in the permutation, `first < second`.
    pub first: usize,
    pub second: usize,
    pub count: usize,
    /// Samples in which `first` was preferred.
    pub first_wins: usize,
    /// `first_wins / count`, `None` for an empty bucket.
    pub empirical: Option<f64>,
    /// Generating probability, `None` for the never-sampled pair.
    pub expected: Option<f64>,
    /// Binomial standard error under the generating probability.
    pub std_error: Option<f64>,
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalReport {
    /// Buckets for `(ω₁, ω₂)`, `(ω₂, ω₃)` and `(ω₁, ω₃)` in that order.
    pub pairs: [PairFrequency; 3],
    pub total: usize,
}

impl EmpiricalReport {
    pub fn max_abs_z(&self) -> f64 {
        self.pairs.iter().filter_map(|p| p.z).map(f64::abs).fold(0.0, f64::max)
    }
}

pub fn empirical_check(samples: &[PreferenceSample], spec: &DatasetSpec) -> Result<EmpiricalReport> {
    let names = &spec.permutation;
    let mut counts = [[0usize; 3]; 3];
    for s in samples {
        let (w, l) = classify_sample(s, names)?;
        counts[w][l] += 1;
    }
    let bucket = |a: usize, b: usize, expected: Option<f64>| {
        let first_wins = counts[a][b];
        let count = first_wins + counts[b][a];
        let empirical = (count > 0).then(|| first_wins as f64 / count as f64);
        let std_error = expected.filter(|_| count > 0).map(|p| sqrt(p * (1.0 - p) / count as f64));
        let z = match (empirical, expected, std_error) {
            (Some(e), Some(p), Some(se)) if se > 0.0 => Some((e - p) / se),
            (Some(e), Some(p), Some(_)) => Some(if e == p { 0.0 } else { f64::INFINITY }),
            _ => None,
        };
        PairFrequency { first: a, second: b, count, first_wins, empirical, expected, std_error, z }
    };
    Ok(EmpiricalReport {
        pairs: [bucket(0, 1, Some(spec.p12)), bucket(1, 2, Some(spec.p23)), bucket(0, 2, None)],
        total: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn names(a: &str, b: &str, c: &str) -> [String; 3] {
        [a.to_string(), b.to_string(), c.to_string()]
    }

    fn spec(p12: f64, p23: f64, n: usize, seed: u64) -> DatasetSpec {
        DatasetSpec::new(names("dog", "bird", "cat"), p12, p23, n, seed).unwrap()
    }

    #[test]
    fn default_bank_is_valid() {
        let b = TemplateBank::default();
        assert_eq!((b.questions().len(), b.answers().len()), (20, 30));
        assert!(TemplateBank::new(b.questions().to_vec(), b.answers().to_vec()).is_ok());
        assert!(TemplateBank::new(vec!["<A> only".into()], vec!["<A>".into()]).is_err());
        assert!(TemplateBank::new(vec!["<A> <B>".into()], vec!["<B> then <A>".into()]).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(DatasetSpec::new(names("dog", "dog", "cat"), 0.5, 0.5, 1, 0).is_err());
        assert!(DatasetSpec::new(names("dog", "bird", "cat"), 1.5, 0.5, 1, 0).is_err());
        assert!(DatasetSpec::new(names("dog", "bird", "cat"), 0.5, 0.5, 0, 0).is_err());
        assert!(DatasetSpec::new(names("dog", "", "cat"), 0.5, 0.5, 1, 0).is_err());
        assert!(DatasetSpec::new(names("dog", "big bird", "cat"), 0.5, 0.5, 1, 0).is_err());
        assert!(DatasetSpec::new(names("dog", "bird", "cat"), 0.0, 1.0, 1, 0).is_ok());
    }

    #[test]
    fn word_matching_ignores_substrings() {
        assert_eq!(find_word("If you had to advocate for cat", "cat"), Some(27));
        assert_eq!(find_word("advocate", "cat"), None);
        assert_eq!(find_word("cat.", "cat"), Some(0));
    }

    #[test]
    fn dominant_pair_frequency() {
        let s = spec(0.99, 0.01, 10_000, 3);
        let samples = generate(&s, &TemplateBank::default());
        assert_eq!(samples.len(), 10_000);
        let r = empirical_check(&samples, &s).unwrap();
        let dog_bird = r.pairs[0];
        assert!((dog_bird.empirical.unwrap() - 0.99).abs() < 0.01);
        assert!(r.max_abs_z() <= 3.0, "{r:?}");
        assert_eq!(r.pairs[2].count, 0);
        assert_eq!(r.pairs[2].empirical, None);
        assert_eq!(r.pairs[0].count + r.pairs[1].count, 10_000);
    }

    #[test]
    fn samples_are_well_formed() {
        let s = spec(0.5, 0.5, 2_000, 11);
        for x in generate(&s, &TemplateBank::default()) {
            for t in [&x.question, &x.chosen, &x.rejected] {
                assert!(!t.contains(SLOT_A) && !t.contains(SLOT_B));
            }
            assert_ne!(x.chosen, x.rejected);
            let (w, l) = classify_sample(&x, &s.permutation).unwrap();
            assert!(matches!((w.min(l), w.max(l)), (0, 1) | (1, 2)));
        }
    }

    #[test]
    fn display_order_is_mixed() {
        let s = spec(0.5, 0.5, 4_000, 5);
        let firsts = generate(&s, &TemplateBank::default())
            .iter()
            .filter(|x| {
                let m = mentions(&x.question, &s.permutation);
                m[0].1 < m[1].1
            })
            .count();
        assert!((firsts as f64 / 4_000.0 - 0.5).abs() < 3.0 * (0.25f64 / 4_000.0).sqrt());
    }

    #[test]
    fn generation_is_deterministic() {
        let s = spec(0.7, 0.2, 500, 42);
        let b = TemplateBank::default();
        assert_eq!(generate(&s, &b), generate(&s, &b));
        assert_ne!(generate(&s, &b), generate(&spec(0.7, 0.2, 500, 43), &b));
    }

    #[test]
    fn sweep_grid() {
        let base = spec(0.3, 0.3, 100, 7);
        let specs = sweep(&base);
        assert_eq!(specs.len(), 21);
        for (i, s) in specs.iter().enumerate() {
            assert_eq!(s.p23, [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65,
                0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0][i]);
            assert_eq!((s.p12, s.seed), (0.99, 7 + i as u64));
            assert_eq!(s.permutation, base.permutation);
        }
        let zero = generate(&specs[0], &TemplateBank::default());
        for x in &zero {
            let (w, l) = classify_sample(x, &base.permutation).unwrap();
            if w.min(l) == 1 {
                assert_eq!(w, 2);
            }
        }
    }

    #[test]
    fn unknown_options_are_rejected() {
        let s = spec(0.5, 0.5, 1, 0);
        let bad = PreferenceSample {
            question: "Would you rather have fish or cat?".into(),
            chosen: "I prefer fish over cat.".into(),
            rejected: "I prefer cat over fish.".into(),
        };
        assert!(matches!(empirical_check(&[bad], &s), Err(Error::Validation(_))));
    }
}
