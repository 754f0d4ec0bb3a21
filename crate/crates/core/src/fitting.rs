//! Maximum-likelihood scores for Bradley-Terry and Plackett-Luce data.
//!
//! Both fits maximize the mean log-likelihood per observation by projected
//! gradient ascent with Armijo backtracking. Each gradient component is divided
//! by the matching diagonal entry of the Fisher information, so options with
//! few or lopsided comparisons move at the same pace as the rest. Score 0 is pinned to 0 and the
//! others are kept in `[-30, 30]`: a one-sided pair has no finite maximizer,
//! and the cap turns that into a flagged, finite answer.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{classify_sample, PreferenceSample};
use crate::math::{exp, ln_1p};
use crate::models::{bt_prob, pl_log_prob_ordered, KTuplePreference, Probability};
use crate::{Error, Result};

pub const SCORE_CAP: f64 = 30.0;
pub const GRADIENT_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 10_000;

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;
const MAX_STEP: f64 = 1.0;

/// Win counts: `wins[i][j]` is how often `i` was chosen over `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairwiseCounts {
    n: usize,
    wins: Vec<u64>,
}

impl PairwiseCounts {
    pub fn zeros(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::validation("need at least two options"));
        }
        Ok(PairwiseCounts { n, wins: vec![0; n * n] })
    }

    /// Row-major `n × n` matrix with a zero diagonal.
    pub fn new(n: usize, wins: Vec<u64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::validation("need at least two options"));
        }
        if wins.len() != n * n {
            return Err(Error::validation(format!("expected {} counts, got {}", n * n, wins.len())));
        }
        if let Some(i) = (0..n).find(|&i| wins[i * n + i] != 0) {
            return Err(Error::validation(format!("diagonal entry ({i}, {i}) must be zero")));
        }
        Ok(PairwiseCounts { n, wins })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn wins(&self, i: usize, j: usize) -> u64 {
        self.wins[i * self.n + j]
    }

    pub fn add(&mut self, winner: usize, loser: usize, count: u64) -> Result<()> {
        if winner == loser || winner >= self.n || loser >= self.n {
            return Err(Error::domain(format!("invalid pair ({winner}, {loser})")));
        }
        self.wins[winner * self.n + loser] += count;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.wins.iter().sum()
    }

    /// Aggregates synthetic samples over the given option names.
    pub fn from_samples(samples: &[PreferenceSample], names: &[String]) -> Result<Self> {
        let mut c = Self::zeros(names.len())?;
        for s in samples {
            let (w, l) = classify_sample(s, names)?;
            c.add(w, l, 1)?;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub scores: Vec<f64>,
    /// Total (not mean) log-likelihood at `scores`.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The data has no finite maximizer (some group of options never loses to
    /// the rest), or a score reached the cap. Scores then reflect where the
    /// ascent stopped, not a maximum.
    pub diverged: bool,
    /// Mean log-likelihood after each accepted step, starting at the origin.
    pub trace: Vec<f64>,
}

/// `P(i ≻ j)` under the fitted Bradley-Terry scores.
pub fn predict(fit: &FitResult, i: usize, j: usize) -> Result<Probability> {
    let n = fit.scores.len();
    if i >= n || j >= n {
        return Err(Error::domain(format!("indices ({i}, {j}) out of range for {n} options")));
    }
    bt_prob(fit.scores[i], fit.scores[j])
}

/// Connected components of the graph on `n` nodes with the given edges.
fn components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Whether every option can be reached from every other along "beat" edges.
/// Without this the likelihood has no finite maximizer.
fn strongly_connected(n: usize, beats: &[(usize, usize)]) -> bool {
    let reach_all = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &(a, b) in beats {
                let (from, to) = if forward { (a, b) } else { (b, a) };
                if from == x && !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        seen.iter().all(|&v| v)
    };
    reach_all(true) && reach_all(false)
}

fn require_connected(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Result<()> {
    let comps = components(n, edges);
    if comps.len() > 1 {
        Err(Error::Disconnected { components: comps })
    } else {
        Ok(())
    }
}

/// `ln σ(x)` without overflow.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -ln_1p(exp(-x))
    } else {
        x - ln_1p(exp(x))
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// Mean log-likelihood and its gradient over all `n` scores.
trait Objective {
    fn n(&self) -> usize;
    fn value(&self, s: &[f64]) -> f64;
    fn gradient(&self, s: &[f64]) -> Vec<f64>;
    /// Diagonal of the negated Hessian of the mean log-likelihood.
    fn curvature(&self, s: &[f64]) -> Vec<f64>;
}

const MIN_CURVATURE: f64 = 1e-12;

fn clamp(x: f64) -> f64 {
    x.clamp(-SCORE_CAP, SCORE_CAP)
}

/// Gradient with components that push against an active bound zeroed.
fn projected(s: &[f64], g: &[f64]) -> Vec<f64> {
    s.iter()
        .zip(g)
        .enumerate()
        .map(|(k, (&x, &d))| {
            if k == 0 || (x >= SCORE_CAP && d > 0.0) || (x <= -SCORE_CAP && d < 0.0) {
                0.0
            } else {
                d
            }
        })
        .collect()
}

fn ascend(obj: &dyn Objective, scale: f64, finite_optimum: bool) -> FitResult {
    let n = obj.n();
    let mut s = vec![0.0; n];
    let mut f = obj.value(&s);
    let mut trace = vec![f];
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        let g = projected(&s, &obj.gradient(&s));
        if g.iter().all(|d| d.abs() <= GRADIENT_TOLERANCE) {
            converged = true;
            break;
        }
        let dir: Vec<f64> = g
            .iter()
            .zip(obj.curvature(&s))
            .map(|(&d, h)| d / h.max(MIN_CURVATURE))
            .collect();
        let mut accepted = false;
        while step >= MIN_STEP {
            let candidate: Vec<f64> = s
                .iter()
                .zip(&dir)
                .enumerate()
                .map(|(k, (&x, &d))| if k == 0 { 0.0 } else { clamp(x + step * d) })
                .collect();
            let gain: f64 = candidate.iter().zip(&s).zip(&g).map(|((c, x), d)| d * (c - x)).sum();
            let fc = obj.value(&candidate);
            if gain > 0.0 && fc >= f + ARMIJO * gain {
                s = candidate;
                f = fc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if !accepted {
            // no representable ascent step is left
            break;
        }
        trace.push(f);
        step = (step * 2.0).min(MAX_STEP);
    }
    let diverged = !finite_optimum || s.iter().any(|x| x.abs() >= SCORE_CAP);
    FitResult { scores: s, log_likelihood: f * scale, iterations, converged, diverged, trace }
}

struct BtObjective<'a> {
    counts: &'a PairwiseCounts,
    total: f64,
}

impl Objective for BtObjective<'_> {
    fn n(&self) -> usize {
        self.counts.n
    }

    fn value(&self, s: &[f64]) -> f64 {
        let n = self.counts.n;
        let mut ll = 0.0;
        for i in 0..n {
            for j in 0..n {
                let w = self.counts.wins(i, j);
                if w > 0 {
                    ll += w as f64 * log_sigmoid(s[i] - s[j]);
                }
            }
        }
        ll / self.total
    }

    fn gradient(&self, s: &[f64]) -> Vec<f64> {
        let n = self.counts.n;
        let mut g = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let w = self.counts.wins(i, j);
                if w > 0 {
                    // d/ds_i ln σ(s_i - s_j) = 1 - σ(s_i - s_j)
                    let d = w as f64 * sigmoid(s[j] - s[i]) / self.total;
                    g[i] += d;
                    g[j] -= d;
                }
            }
        }
        g
    }

    fn curvature(&self, s: &[f64]) -> Vec<f64> {
        let n = self.counts.n;
        let mut h = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let w = self.counts.wins(i, j);
                if w > 0 {
                    let p = sigmoid(s[i] - s[j]);
                    let d = w as f64 * p * (1.0 - p) / self.total;
                    h[i] += d;
                    h[j] += d;
                }
            }
        }
        h
    }
}

/// Bradley-Terry scores maximizing `Σ wins[i][j] · ln σ(s_i - s_j)`.
pub fn fit_bt(counts: &PairwiseCounts) -> Result<FitResult> {
    let n = counts.n;
    let beats: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| counts.wins(i, j) > 0)
        .collect();
    require_connected(n, beats.iter().copied())?;
    let total = counts.total() as f64;
    Ok(ascend(&BtObjective { counts, total }, total, strongly_connected(n, &beats)))
}

struct PlObjective<'a> {
    n: usize,
    rankings: &'a [(KTuplePreference, u64)],
    total: f64,
}

impl Objective for PlObjective<'_> {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, s: &[f64]) -> f64 {
        let mut buf = Vec::new();
        let ll: f64 = self
            .rankings
            .iter()
            .map(|(omega, m)| {
                buf.clear();
                buf.extend(omega.indices().iter().map(|&i| s[i]));
                *m as f64 * pl_log_prob_ordered(&buf)
            })
            .sum();
        ll / self.total
    }

    fn gradient(&self, s: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for (omega, m) in self.rankings {
            let w = *m as f64 / self.total;
            let idx = omega.indices();
            for u in 0..idx.len() - 1 {
                let tail = &idx[u..];
                let top = tail.iter().map(|&i| s[i]).fold(f64::NEG_INFINITY, f64::max);
                let z: f64 = tail.iter().map(|&i| exp(s[i] - top)).sum();
                g[idx[u]] += w;
                for &i in tail {
                    g[i] -= w * exp(s[i] - top) / z;
                }
            }
        }
        g
    }

    fn curvature(&self, s: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.n];
        for (omega, m) in self.rankings {
            let w = *m as f64 / self.total;
            let idx = omega.indices();
            for u in 0..idx.len() - 1 {
                let tail = &idx[u..];
                let top = tail.iter().map(|&i| s[i]).fold(f64::NEG_INFINITY, f64::max);
                let z: f64 = tail.iter().map(|&i| exp(s[i] - top)).sum();
                for &i in tail {
                    let p = exp(s[i] - top) / z;
                    h[i] += w * p * (1.0 - p);
                }
            }
        }
        h
    }
}

/// Plackett-Luce scores for `n` options from rankings with multiplicities.
pub fn fit_pl(rankings: &[(KTuplePreference, u64)], n: usize) -> Result<FitResult> {
    if n < 2 {
        return Err(Error::validation("need at least two options"));
    }
    for (omega, _) in rankings {
        if let Some(&i) = omega.indices().iter().find(|&&i| i >= n) {
            return Err(Error::validation(format!("ranking names option {i}, but only {n} exist")));
        }
    }
    let used: Vec<&(KTuplePreference, u64)> = rankings.iter().filter(|(_, m)| *m > 0).collect();
    let mut beats = Vec::new();
    for (omega, _) in &used {
        let idx = omega.indices();
        for u in 0..idx.len() {
            for &v in &idx[u + 1..] {
                beats.push((idx[u], v));
            }
        }
    }
    beats.sort_unstable();
    beats.dedup();
    require_connected(n, beats.iter().copied())?;
    let total: u64 = used.iter().map(|(_, m)| m).sum();
    let total = total as f64;
    Ok(ascend(&PlObjective { n, rankings, total }, total, strongly_connected(n, &beats)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::bt_compose;

    const LOG3: f64 = 1.098_612_288_668_109_8;

    fn counts(n: usize, entries: &[(usize, usize, u64)]) -> PairwiseCounts {
        let mut c = PairwiseCounts::zeros(n).unwrap();
        for &(w, l, k) in entries {
            c.add(w, l, k).unwrap();
        }
        c
    }

    #[test]
    fn symmetric_counts_give_zero_scores() {
        let c = counts(3, &[(0, 1, 100), (1, 0, 100), (0, 2, 100), (2, 0, 100), (1, 2, 100), (2, 1, 100)]);
        let f = fit_bt(&c).unwrap();
        assert!(f.converged && !f.diverged);
        assert!(f.scores.iter().all(|s| s.abs() < 1e-9));
    }

    #[test]
    fn two_options_recover_log_three() {
        let f = fit_bt(&counts(2, &[(1, 0, 75), (0, 1, 25)])).unwrap();
        assert!(f.converged);
        assert_eq!(f.scores[0], 0.0);
        assert!((f.scores[1] - LOG3).abs() < 1e-4);
        assert!((predict(&f, 1, 0).unwrap().get() - 0.75).abs() < 1e-6);
        assert_eq!(predict(&f, 1, 1).unwrap().get(), 0.5);
        assert!(predict(&f, 0, 2).is_err());
    }

    #[test]
    fn trace_never_decreases() {
        let f = fit_bt(&counts(3, &[(0, 1, 70), (1, 0, 30), (1, 2, 5), (2, 1, 95), (0, 2, 50), (2, 0, 1)])).unwrap();
        assert!(f.trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(f.converged);
        assert_eq!(f.trace.len(), f.iterations + 1);
    }

    #[test]
    fn composed_examples_through_fitting() {
        // options (i, k, j): exact counts for p_ik and p_kj, nothing on (i, j)
        for &(p_ik, p_kj) in &[(0.9999, 0.02), (0.9801, 0.02)] {
            let n_pair = 1_000_000u64;
            let ik = (p_ik * n_pair as f64).round() as u64;
            let kj = (p_kj * n_pair as f64).round() as u64;
            let c = counts(3, &[(0, 1, ik), (1, 0, n_pair - ik), (1, 2, kj), (2, 1, n_pair - kj)]);
            let f = fit_bt(&c).unwrap();
            assert!(f.converged, "{f:?}");
            let expected = bt_compose(p_ik, p_kj).unwrap().get();
            assert!((predict(&f, 0, 2).unwrap().get() - expected).abs() < 1e-5);
        }
    }

    #[test]
    fn one_sided_pair_is_flagged() {
        let f = fit_bt(&counts(2, &[(1, 0, 50)])).unwrap();
        assert!(f.diverged);
        assert!(f.scores[1] > 15.0 && f.scores[1] <= SCORE_CAP);

        // 0 beats 1 sometimes, 1 never loses to 2
        let f = fit_bt(&counts(3, &[(0, 1, 40), (1, 0, 60), (1, 2, 10)])).unwrap();
        assert!(f.diverged);
        assert!(f.scores[2] < -15.0 && f.scores[2] >= -SCORE_CAP, "{f:?}");
        assert!((predict(&f, 1, 0).unwrap().get() - 0.6).abs() < 1e-6);

        let f = fit_bt(&counts(2, &[(1, 0, 50), (0, 1, 1)])).unwrap();
        assert!(!f.diverged && f.converged);
    }

    #[test]
    fn disconnected_graph_names_components() {
        let c = counts(4, &[(0, 1, 3), (2, 3, 1)]);
        assert_eq!(fit_bt(&c), Err(Error::Disconnected { components: vec![vec![0, 1], vec![2, 3]] }));
    }

    #[test]
    fn pl_uniform_rankings_give_zero_scores() {
        let mut rankings = Vec::new();
        for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            rankings.push((KTuplePreference::new(p.to_vec(), 3).unwrap(), 10));
        }
        let f = fit_pl(&rankings, 3).unwrap();
        assert!(f.converged);
        assert!(f.scores.iter().all(|s| s.abs() < 1e-9));
    }

    #[test]
    fn pl_pairs_match_bt() {
        let data = [(0, 1, 30), (1, 0, 12), (1, 2, 40), (2, 1, 9), (2, 0, 5), (0, 2, 17)];
        let rankings: Vec<_> = data
            .iter()
            .map(|&(w, l, m)| (KTuplePreference::new(vec![w, l], 3).unwrap(), m))
            .collect();
        let a = fit_pl(&rankings, 3).unwrap();
        let b = fit_bt(&counts(3, &data)).unwrap();
        for (x, y) in a.scores.iter().zip(&b.scores) {
            assert!((x - y).abs() < 1e-6);
        }
        assert!((a.log_likelihood - b.log_likelihood).abs() < 1e-9);
    }

    #[test]
    fn pl_validation() {
        let r = [(KTuplePreference::new(vec![0, 1], 2).unwrap(), 1)];
        assert!(fit_pl(&r, 1).is_err());
        assert!(matches!(fit_pl(&r, 3), Err(Error::Disconnected { .. })));
    }
}
