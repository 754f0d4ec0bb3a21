//! Preference-model probabilities: Bradley-Terry, general pairwise composition,
//! and the K-tuple Plackett-Luce model.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::link::LinkFunction;
use crate::math::{exp, ln, ln_1p, sqrt};
use crate::{Error, Result};

/// Tolerance on `r[u][v] * r[v][u] = 1` accepted by [`RatioMatrix::new`].
pub const RECIPROCAL_TOLERANCE: f64 = 1e-9;

/// A probability strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Probability(value))
        } else {
            Err(Error::domain(format!("probability {value} is outside (0, 1)")))
        }
    }

    /// Wraps a computed value, reporting exact 0 or 1 as saturation rather
    /// than as an invalid input.
    pub(crate) fn from_raw(value: f64) -> Result<Self> {
        if value == 0.0 || value == 1.0 {
            Err(Error::Saturated { value })
        } else {
            Probability::new(value)
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// `N >= 2` labeled options with finite scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredOptionSet {
    labels: Vec<String>,
    scores: Vec<f64>,
}

impl ScoredOptionSet {
    pub fn new(labels: Vec<String>, scores: Vec<f64>) -> Result<Self> {
        if labels.len() != scores.len() {
            return Err(Error::validation(format!(
                "{} labels for {} scores",
                labels.len(),
                scores.len()
            )));
        }
        if scores.len() < 2 {
            return Err(Error::validation("an option set needs at least two options"));
        }
        if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::domain(format!("score {s} is not finite")));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::validation(format!("duplicate option label {l:?}")));
            }
        }
        Ok(ScoredOptionSet { labels, scores })
    }

    /// Options labeled `o0`, `o1`, ...
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        let labels = (0..scores.len()).map(|i| format!("o{i}")).collect();
        Self::new(labels, scores)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn score(&self, i: usize) -> f64 {
        self.scores[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::domain(format!("option index {i} out of range for N = {}", self.len())))
        }
    }
}

/// An ordered K-permutation of option indices, most preferred first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KTuplePreference {
    indices: Vec<usize>,
}

impl KTuplePreference {
    /// Validates `2 <= K <= n` and that indices are distinct and below `n`.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        let k = indices.len();
        if k < 2 || k > n {
            return Err(Error::domain(format!("tuple length {k} is not in [2, {n}]")));
        }
        for (pos, &i) in indices.iter().enumerate() {
            if i >= n {
                return Err(Error::domain(format!("index {i} out of range for N = {n}")));
            }
            if indices[..pos].contains(&i) {
                return Err(Error::domain(format!("index {i} repeated in tuple")));
            }
        }
        Ok(KTuplePreference { indices })
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Scores of the tuple's options, in ranking order.
    pub fn scores_in_order(&self, options: &ScoredOptionSet) -> Result<Vec<f64>> {
        for &i in &self.indices {
            options.check_index(i)?;
        }
        Ok(self.indices.iter().map(|&i| options.score(i)).collect())
    }
}

/// Bradley-Terry probability that option `i` is preferred over option `j`.
pub fn bt_prob(s_i: f64, s_j: f64) -> Result<Probability> {
    if !s_i.is_finite() || !s_j.is_finite() {
        return Err(Error::domain("scores must be finite"));
    }
    LinkFunction::LOGISTIC.evaluate(s_i - s_j)
}

/// `p_ij = g(g⁻¹(p_ik) + g⁻¹(p_kj))` for an arbitrary link.
pub fn compose_pairwise(link: LinkFunction, p_ik: f64, p_kj: f64) -> Result<Probability> {
    let x = link.inverse(p_ik)? + link.inverse(p_kj)?;
    link.evaluate(x)
}

/// Bradley-Terry composition `1 / (1 + (1-p_ik)(1-p_kj) / (p_ik p_kj))`.
pub fn bt_compose(p_ik: f64, p_kj: f64) -> Result<Probability> {
    let p_ik = Probability::new(p_ik)?.get();
    let p_kj = Probability::new(p_kj)?.get();
    let agree = p_ik * p_kj;
    let disagree = (1.0 - p_ik) * (1.0 - p_kj);
    Probability::from_raw(agree / (agree + disagree))
}

/// Plackett-Luce probability of the ranking `omega`.
///
/// Each stage factor is evaluated on score differences with the stage maximum
/// subtracted, so large scores never overflow.
pub fn pl_prob(omega: &KTuplePreference, options: &ScoredOptionSet) -> Result<Probability> {
    let s = omega.scores_in_order(options)?;
    let mut p = 1.0;
    for u in 0..s.len() - 1 {
        let m = s[u..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = s[u..].iter().map(|&sv| exp(sv - m)).sum();
        p *= exp(s[u] - m) / denom;
    }
    Probability::from_raw(p)
}

/// Natural log of the Plackett-Luce probability of a ranking given its scores
/// in ranking order. Never saturates.
pub fn pl_log_prob_ordered(scores: &[f64]) -> f64 {
    let mut lp = 0.0;
    for u in 0..scores.len().saturating_sub(1) {
        let tail = &scores[u..];
        let m = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + ln(tail.iter().map(|&sv| exp(sv - m)).sum::<f64>());
        lp += scores[u] - lse;
    }
    lp
}

/// `p(ω_vu) / p(ω_uv) = exp(-(s_u - s_v))` for two tuples that differ only by
/// the order of their last two entries `u` and `v`.
pub fn pl_ratio(options: &ScoredOptionSet, u: usize, v: usize) -> Result<f64> {
    options.check_index(u)?;
    options.check_index(v)?;
    if u == v {
        return Err(Error::domain("pl_ratio needs two distinct options"));
    }
    Ok(exp(-(options.score(u) - options.score(v))))
}

/// K×K matrix of suffix-swap ratios `r[u][v] = p(ω_vu) / p(ω_uv)` indexed by
/// tuple position. The diagonal is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioMatrix {
    k: usize,
    data: Vec<f64>,
}

impl RatioMatrix {
    /// Builds a matrix from row-major data, rejecting non-positive entries and
    /// reciprocal pairs whose product is off 1 by more than
    /// [`RECIPROCAL_TOLERANCE`].
    pub fn new(k: usize, data: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::validation("ratio matrix needs K >= 2"));
        }
        if data.len() != k * k {
            return Err(Error::validation(format!(
                "ratio matrix of order {k} needs {} entries, got {}",
                k * k,
                data.len()
            )));
        }
        for u in 0..k {
            for v in (u + 1)..k {
                let (a, b) = (data[u * k + v], data[v * k + u]);
                if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
                    return Err(Error::validation(format!(
                        "ratios at ({u}, {v}) must be positive and finite"
                    )));
                }
                if (a * b - 1.0).abs() > RECIPROCAL_TOLERANCE {
                    return Err(Error::validation(format!(
                        "ratios at ({u}, {v}) are not reciprocal: {a} * {b} != 1"
                    )));
                }
            }
        }
        Ok(RatioMatrix { k, data })
    }

    /// Ratios implied by scores listed in ranking order.
    pub fn from_scores(scores: &[f64]) -> Result<Self> {
        let k = scores.len();
        if k < 2 {
            return Err(Error::validation("ratio matrix needs K >= 2"));
        }
        let mut data = alloc::vec![1.0; k * k];
        for u in 0..k {
            for v in 0..k {
                if u != v {
                    data[u * k + v] = exp(-(scores[u] - scores[v]));
                }
            }
        }
        Self::new(k, data)
    }

    pub fn for_tuple(omega: &KTuplePreference, options: &ScoredOptionSet) -> Result<Self> {
        Self::from_scores(&omega.scores_in_order(options)?)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[u * self.k + v]
    }

    /// Sets `r[u][v] = ratio` and `r[v][u] = 1 / ratio`.
    pub fn set_pair(&mut self, u: usize, v: usize, ratio: f64) -> Result<()> {
        if u == v || u >= self.k || v >= self.k {
            return Err(Error::domain(format!("invalid ratio slot ({u}, {v})")));
        }
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::validation(format!("ratio {ratio} must be positive and finite")));
        }
        self.data[u * self.k + v] = ratio;
        self.data[v * self.k + u] = 1.0 / ratio;
        Ok(())
    }

    /// `1 + Σ_{v > u} r[u][v]`, the reciprocal of stage `u`'s factor.
    pub(crate) fn stage_denominator(&self, u: usize) -> f64 {
        1.0 + ((u + 1)..self.k).map(|v| self.get(u, v)).sum::<f64>()
    }
}

/// Plackett-Luce probability rebuilt from pairwise suffix-swap ratios alone.
pub fn pl_prob_from_ratios(ratios: &RatioMatrix) -> Result<Probability> {
    let p = (0..ratios.k() - 1)
        .map(|u| 1.0 / ratios.stage_denominator(u))
        .product();
    Probability::from_raw(p)
}

/// Density at `x` of the logistic image of `N(0, 2σ²)`, the distribution of a
/// Bradley-Terry probability when both scores are i.i.d. `N(0, σ²)`.
pub fn logit_normal_density(x: f64, sigma2: f64) -> Result<f64> {
    let x = Probability::new(x)?.get();
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::domain(format!("variance {sigma2} must be positive")));
    }
    let var = 2.0 * sigma2;
    let logit = ln(x) - ln_1p(-x);
    Ok(exp(-logit * logit / (2.0 * var)) / (sqrt(2.0 * PI * var) * x * (1.0 - x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const LOG3: f64 = 1.098_612_288_668_109_8;

    fn tuple(ix: &[usize], n: usize) -> KTuplePreference {
        KTuplePreference::new(ix.to_vec(), n).unwrap()
    }

    #[test]
    fn bt_prob_reference_values() {
        assert_eq!(bt_prob(0.0, 0.0).unwrap().get(), 0.5);
        assert!((bt_prob(LOG3, 0.0).unwrap().get() - 0.75).abs() < 1e-15);
        let (a, b) = (bt_prob(1.3, -0.4).unwrap().get(), bt_prob(-0.4, 1.3).unwrap().get());
        assert!((a + b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn compose_reference_values() {
        let g = LinkFunction::LOGISTIC;
        assert!((compose_pairwise(g, 0.5, 0.5).unwrap().get() - 0.5).abs() < 1e-15);
        for p in [0.01, 0.3, 0.77, 0.999] {
            for link in [LinkFunction::LOGISTIC, LinkFunction::PROBIT] {
                let c = compose_pairwise(link, p, 1.0 - p).unwrap().get();
                assert!((c - 0.5).abs() < 1e-9, "{link:?} p={p} -> {c}");
            }
        }
        // 40-digit evaluations of the composition
        let c = compose_pairwise(g, 0.9801, 0.02).unwrap().get();
        assert!((c - 0.501_278_641_571_194_4).abs() < 1e-12);
    }

    #[test]
    fn bt_compose_reference_values() {
        let cases = [
            (0.9801, 0.02, 0.501_278_641_571_194_4),
            (0.9999, 0.02, 0.995_123_407_643_312_6),
            (0.9993, 0.0141, 0.953_307_316_650_719_8),
            (0.9820, 0.0141, 0.438_276_294_298_628_6),
        ];
        for (a, b, want) in cases {
            let got = bt_compose(a, b).unwrap().get();
            assert!((got - want).abs() < 1e-12, "({a}, {b}) -> {got}");
            let via_link = compose_pairwise(LinkFunction::LOGISTIC, a, b).unwrap().get();
            assert!((got - via_link).abs() < 1e-12);
        }
        // against the measured composed probabilities
        assert!((bt_compose(0.9993, 0.0141).unwrap().get() - 0.9526).abs() < 0.002);
        assert!((bt_compose(0.9820, 0.0141).unwrap().get() - 0.4378).abs() < 0.001);
    }

    #[test]
    fn compose_rejects_boundary() {
        assert!(matches!(bt_compose(0.0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(bt_compose(0.5, 1.0), Err(Error::Domain(_))));
        assert!(compose_pairwise(LinkFunction::PROBIT, 1.2, 0.5).is_err());
    }

    #[test]
    fn pl_prob_reference_values() {
        let equal = ScoredOptionSet::from_scores(vec![0.3, 0.3, 0.3]).unwrap();
        let p = pl_prob(&tuple(&[2, 0, 1], 3), &equal).unwrap().get();
        assert!((p - 1.0 / 6.0).abs() < 1e-15);

        let pair = ScoredOptionSet::from_scores(vec![LOG3, 0.0]).unwrap();
        assert!((pl_prob(&tuple(&[0, 1], 2), &pair).unwrap().get() - 0.75).abs() < 1e-15);

        // brute-force product of raw softmax stages, 40 digits
        let s = ScoredOptionSet::from_scores(vec![1.0, 0.0, -1.0]).unwrap();
        let p = pl_prob(&tuple(&[0, 1, 2], 3), &s).unwrap().get();
        assert!((p - 0.486_330_107_575_207_2).abs() < 1e-14);
    }

    #[test]
    fn pl_prob_survives_huge_scores() {
        let s = ScoredOptionSet::from_scores(vec![800.0, 799.0, 798.0]).unwrap();
        let p = pl_prob(&tuple(&[0, 1, 2], 3), &s).unwrap().get();
        assert!((p - 0.486_330_107_575_207_2).abs() < 1e-13);
    }

    #[test]
    fn pl_prob_flags_saturation() {
        let s = ScoredOptionSet::from_scores(vec![0.0, 900.0]).unwrap();
        assert!(matches!(
            pl_prob(&tuple(&[0, 1], 2), &s),
            Err(Error::Saturated { value }) if value == 0.0
        ));
    }

    #[test]
    fn pl_ratio_reference_values() {
        let s = ScoredOptionSet::from_scores(vec![0.7, 0.7, 0.7 - core::f64::consts::LN_2]).unwrap();
        assert!((pl_ratio(&s, 0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((pl_ratio(&s, 0, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!((pl_ratio(&s, 0, 2).unwrap() * pl_ratio(&s, 2, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(pl_ratio(&s, 1, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn pl_ratio_equals_swapped_suffix_ratio() {
        let s = ScoredOptionSet::from_scores(vec![0.4, -1.2, 2.0, 0.9]).unwrap();
        for (prefix, u, v) in [(vec![2, 0], 1, 3), (vec![1], 0, 2), (vec![3, 1], 2, 0)] {
            let mut uv = prefix.clone();
            uv.extend([u, v]);
            let mut vu = prefix;
            vu.extend([v, u]);
            let ratio = pl_prob(&tuple(&vu, 4), &s).unwrap().get()
                / pl_prob(&tuple(&uv, 4), &s).unwrap().get();
            assert!((ratio - pl_ratio(&s, u, v).unwrap()).abs() < 1e-12 * ratio.max(1.0));
        }
    }

    #[test]
    fn ratios_reproduce_pl_prob() {
        let all_one = RatioMatrix::new(3, vec![1.0; 9]).unwrap();
        assert!((pl_prob_from_ratios(&all_one).unwrap().get() - 1.0 / 6.0).abs() < 1e-15);

        let s = ScoredOptionSet::from_scores(vec![1.0, 0.0, -1.0]).unwrap();
        let omega = tuple(&[0, 1, 2], 3);
        let r = RatioMatrix::for_tuple(&omega, &s).unwrap();
        let direct = pl_prob(&omega, &s).unwrap().get();
        assert!((pl_prob_from_ratios(&r).unwrap().get() - direct).abs() < 1e-15);

        let r2 = RatioMatrix::new(2, vec![1.0, 3.0, 1.0 / 3.0, 1.0]).unwrap();
        assert!((pl_prob_from_ratios(&r2).unwrap().get() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ratio_matrix_rejects_inconsistent_pairs() {
        assert!(matches!(
            RatioMatrix::new(2, vec![1.0, 2.0, 0.4, 1.0]),
            Err(Error::Validation(_))
        ));
        assert!(RatioMatrix::new(2, vec![1.0, -2.0, -0.5, 1.0]).is_err());
        assert!(RatioMatrix::new(2, vec![1.0, 2.0, 0.5]).is_err());
    }

    #[test]
    fn option_set_and_tuple_validation() {
        assert!(ScoredOptionSet::from_scores(vec![1.0]).is_err());
        assert!(ScoredOptionSet::from_scores(vec![1.0, f64::NAN]).is_err());
        let dup = ScoredOptionSet::new(vec!["a".into(), "a".into()], vec![0.0, 1.0]);
        assert!(matches!(dup, Err(Error::Validation(_))));
        assert!(KTuplePreference::new(vec![0], 3).is_err());
        assert!(KTuplePreference::new(vec![0, 0], 3).is_err());
        assert!(KTuplePreference::new(vec![0, 3], 3).is_err());
        assert!(KTuplePreference::new(vec![0, 1, 2, 3], 3).is_err());
    }

    #[test]
    fn logit_normal_reference_values() {
        for sigma2 in [0.3, 1.0, 2.5] {
            let want = 4.0 / sqrt(4.0 * PI * sigma2);
            assert!((logit_normal_density(0.5, sigma2).unwrap() - want).abs() < 1e-14);
            for x in [0.01, 0.2, 0.37] {
                let a = logit_normal_density(x, sigma2).unwrap();
                let b = logit_normal_density(1.0 - x, sigma2).unwrap();
                assert!((a - b).abs() < 1e-11 * a);
            }
        }
        assert!(logit_normal_density(0.0, 1.0).is_err());
        assert!(logit_normal_density(0.5, 0.0).is_err());
    }

    #[test]
    fn logit_normal_integrates_to_one() {
        // midpoint rule in logit space avoids the endpoint singularities
        for sigma2 in [0.2, 1.0, 3.0] {
            let (a, b, n) = (-60.0, 60.0, 200_000);
            let h: f64 = (b - a) / n as f64;
            let mut total = 0.0;
            for i in 0..n {
                let t = a + (i as f64 + 0.5) * h;
                let x = 1.0 / (1.0 + exp(-t));
                if x > 0.0 && x < 1.0 {
                    total += logit_normal_density(x, sigma2).unwrap() * x * (1.0 - x) * h;
                }
            }
            assert!((total - 1.0).abs() < 1e-4, "sigma2={sigma2} total={total}");
        }
    }
}
