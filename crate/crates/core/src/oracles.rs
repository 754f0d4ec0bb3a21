//! Numerical oracles that check the closed forms without sharing their
//! algebra: central differences, hit-or-miss Monte Carlo, trapezoid
//! quadrature, exhaustive Plackett-Luce enumeration and grid mode counting.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::math::{exp, sqrt};
use crate::models::{logit_normal_density, Probability, ScoredOptionSet};
use crate::rng;
use crate::sensitivity::{bt_partial, PlSide};
use crate::{Error, Result};

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-6;
/// Smallest distance from 0 or 1 a default-step evaluation point may have.
pub const BOUNDARY_MARGIN: f64 = 1e-9;
/// Samples drawn per independent Monte-Carlo sub-stream.
pub const MC_CHUNK: usize = 1 << 16;
pub const MIN_MC_SAMPLES: usize = 10_000;
pub const MIN_GRID: usize = 10_000;
/// Largest `K` [`brute_force_pl`] will enumerate.
pub const MAX_ENUMERATION_K: usize = 6;

/// Central difference `(f(x+h) - f(x-h)) / 2h` in one probability slot.
pub fn finite_diff<F>(f: F, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain(format!("step {h} must be positive")));
    }
    let (lo, hi) = (x - h, x + h);
    if !(lo > 0.0 && hi < 1.0) {
        return Err(Error::domain(format!("{x} ± {h} leaves (0, 1)")));
    }
    Ok((f(hi)? - f(lo)?) / (2.0 * h))
}

/// [`finite_diff`] with [`DEFAULT_STEP`], shrunk so both evaluation points
/// stay at least [`BOUNDARY_MARGIN`] inside the unit interval.
pub fn finite_diff_default<F>(f: F, x: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = DEFAULT_STEP.min(x - BOUNDARY_MARGIN).min(1.0 - BOUNDARY_MARGIN - x);
    if h.is_nan() || h <= 0.0 {
        return Err(Error::domain(format!("{x} is too close to the boundary")));
    }
    finite_diff(f, x, h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Fraction of uniform points in the unit square where `|∂p_ij/∂p_ik| > M`.
///
/// Samples are split into chunks of [`MC_CHUNK`], chunk `c` drawing from
/// sub-stream `c` of `seed`. Hits are integers, so the total does not depend on
/// how chunks are scheduled.
pub fn mc_area_bt(m: f64, n: usize, seed: u64) -> Result<MonteCarloEstimate> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::UnsupportedThreshold(m));
    }
    if n < MIN_MC_SAMPLES {
        return Err(Error::domain(format!("need at least {MIN_MC_SAMPLES} samples, got {n}")));
    }
    let chunks = n.div_ceil(MC_CHUNK);
    let hits: u64 = (0..chunks)
        .map(|c| {
            let len = MC_CHUNK.min(n - c * MC_CHUNK);
            let mut r = rng::substream(seed, c as u64);
            (0..len)
                .filter(|_| {
                    let x = rng::open_unit(&mut r);
                    let y = rng::open_unit(&mut r);
                    match bt_partial(x, y) {
                        Ok(d) => d > m,
                        Err(Error::Singularity { .. }) => true,
                        Err(_) => false,
                    }
                })
                .count() as u64
        })
        .sum();
    let p = hits as f64 / n as f64;
    Ok(MonteCarloEstimate { value: p, std_error: sqrt(p * (1.0 - p) / n as f64), n_samples: n, seed })
}

/// Trapezoid integral of the Plackett-Luce sensitive-slice width over the
/// admissible range `(0, β/(4αM))` of the fixed coordinate.
pub fn quad_area_pl(m: f64, alpha: f64, beta: f64, side: PlSide, grid_n: usize) -> Result<f64> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::UnsupportedThreshold(m));
    }
    if !(alpha >= 1.0 && alpha.is_finite() && beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain(format!("invalid constants alpha = {alpha}, beta = {beta}")));
    }
    if grid_n < MIN_GRID {
        return Err(Error::domain(format!("grid needs at least {MIN_GRID} intervals, got {grid_n}")));
    }
    let scale = match side {
        PlSide::Uv => 2.0 * m,
        PlSide::Vu => 2.0 * alpha * alpha * m,
    };
    let limit = beta / (4.0 * alpha * m);
    let width = |p: f64| {
        let disc = beta * (beta - 4.0 * alpha * m * p);
        if disc > 0.0 {
            2.0 * sqrt(disc) / scale
        } else {
            0.0
        }
    };
    let h = limit / grid_n as f64;
    let inner: f64 = (1..grid_n).map(|i| width(i as f64 * h)).sum();
    Ok(h * (0.5 * (width(0.0) + width(limit)) + inner))
}

/// Probability of every K-permutation of `options`, computed directly from
/// the product of `exp(s_u) / Σ_{v>=u} exp(s_v)`.
pub fn brute_force_pl(options: &ScoredOptionSet, k: usize) -> Result<BTreeMap<Vec<usize>, Probability>> {
    if k > MAX_ENUMERATION_K {
        return Err(Error::SizeGuard { k, limit: MAX_ENUMERATION_K });
    }
    let n = options.len();
    if k < 2 || k > n {
        return Err(Error::domain(format!("K = {k} must lie in [2, {n}]")));
    }
    let weights: Vec<f64> = options.scores().iter().map(|&s| exp(s)).collect();
    let mut out = BTreeMap::new();
    let mut current = Vec::with_capacity(k);
    let mut used = alloc::vec![false; n];
    enumerate(&weights, k, &mut current, &mut used, &mut out)?;
    Ok(out)
}

fn enumerate(
    weights: &[f64],
    k: usize,
    current: &mut Vec<usize>,
    used: &mut [bool],
    out: &mut BTreeMap<Vec<usize>, Probability>,
) -> Result<()> {
    if current.len() == k {
        let mut p = 1.0;
        for u in 0..k - 1 {
            let denom: f64 = current[u..].iter().map(|&i| weights[i]).sum();
            p *= weights[current[u]] / denom;
        }
        out.insert(current.clone(), Probability::from_raw(p)?);
        return Ok(());
    }
    for i in 0..weights.len() {
        if !used[i] {
            used[i] = true;
            current.push(i);
            enumerate(weights, k, current, used, out)?;
            current.pop();
            used[i] = false;
        }
    }
    Ok(())
}

/// Number of strict local maxima of the logit-normal density on the interior
/// grid `x_i = (i + ½)/n`.
///
/// Runs of equal values count once, and only when both neighbours of the run
/// are strictly lower; runs touching either end of the grid never count.
pub fn mode_count(sigma2: f64, grid_n: usize) -> Result<usize> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::domain(format!("variance {sigma2} must be positive")));
    }
    if grid_n < MIN_GRID {
        return Err(Error::domain(format!("grid needs at least {MIN_GRID} points, got {grid_n}")));
    }
    let f = (0..grid_n)
        .map(|i| logit_normal_density((i as f64 + 0.5) / grid_n as f64, sigma2))
        .collect::<Result<Vec<_>>>()?;
    Ok(count_strict_maxima(&f))
}

pub(crate) fn count_strict_maxima(f: &[f64]) -> usize {
    let mut count = 0;
    let mut i = 0;
    while i < f.len() {
        let mut j = i;
        while j + 1 < f.len() && f[j + 1] == f[i] {
            j += 1;
        }
        if i > 0 && j + 1 < f.len() && f[i - 1] < f[i] && f[j + 1] < f[i] {
            count += 1;
        }
        i = j + 1;
    }
    count
}
