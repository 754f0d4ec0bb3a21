//! Analytic sensitivity of composed preference probabilities.
//!
//! A probability `h` is M-sensitive to an argument at a point when the
//! magnitude of the partial derivative there exceeds `M`. This module gives the
//! partial derivatives in closed form, the boundaries of the M-sensitive
//! regions over the unit square, their areas, and a constructive witness that
//! any strictly increasing symmetric link is M-sensitive for every `M`.
//!
//! Region and area operations require `M > 1`; the shape of the regions for
//! `0 < M <= 1` is not characterized and those thresholds are rejected.

use alloc::format;

use crate::link::LinkFunction;
use crate::math::{atanh, sqrt};
use crate::models::{KTuplePreference, Probability, RatioMatrix, ScoredOptionSet};
use crate::{Error, Result};

/// Step used to report `γ₀` across its pole at `p_kj = 1/2`.
const GAMMA0_POLE_OFFSET: f64 = 1e-7;
const GAMMA0_POLE_WINDOW: f64 = 1e-6;

const WITNESS_START: f64 = 0.9;
const WITNESS_MAX_STEPS: usize = 200;
const WITNESS_LIMIT: f64 = 1.0 - 1e-12;

/// Default offset `δ` for [`sensitivity_witness`].
pub const DEFAULT_WITNESS_DELTA: f64 = 1.0;

/// An open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Distance from `x` to the nearer endpoint.
    pub fn distance_to_boundary(&self, x: f64) -> f64 {
        (x - self.lo).abs().min((x - self.hi).abs())
    }
}

fn check_threshold(m: f64) -> Result<()> {
    if m > 1.0 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::UnsupportedThreshold(m))
    }
}

/// `∂p_ij/∂p_ik` for the Bradley-Terry composition,
/// `p_kj (1 - p_kj) / (p_ik + p_kj - 2 p_ik p_kj - 1)²`.
pub fn bt_partial(p_ik: f64, p_kj: f64) -> Result<f64> {
    let x = Probability::new(p_ik)?.get();
    let y = Probability::new(p_kj)?.get();
    // -(p_ik + p_kj - 2 p_ik p_kj - 1) as a sum of two non-negative products
    let denom = x * y + (1.0 - x) * (1.0 - y);
    let sq = denom * denom;
    let d = y * (1.0 - y) / sq;
    if sq == 0.0 || !d.is_finite() {
        return Err(Error::Singularity { x: p_ik, y: p_kj });
    }
    Ok(d)
}

/// `∂p_ij/∂p_kj`; the composition is symmetric in its two arguments.
pub fn bt_partial_wrt_kj(p_ik: f64, p_kj: f64) -> Result<f64> {
    bt_partial(p_kj, p_ik).map_err(|_| Error::Singularity { x: p_ik, y: p_kj })
}

/// Chain-rule derivative of `g(g⁻¹(p_ik) + g⁻¹(p_kj))` with respect to `p_ik`:
/// `g'(g⁻¹(p_ik) + g⁻¹(p_kj)) / g'(g⁻¹(p_ik))`.
pub fn general_partial(link: LinkFunction, p_ik: f64, p_kj: f64) -> Result<f64> {
    let x_ik = link.inverse(p_ik)?;
    let x_kj = link.inverse(p_kj)?;
    let inner = link.density(x_ik);
    let outer = link.density(x_ik + x_kj);
    let d = outer / inner;
    if inner == 0.0 || !d.is_finite() {
        return Err(Error::Singularity { x: p_ik, y: p_kj });
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionCase {
    /// `p_kj < 1/(1+M)`: sensitive for `γ₀ < p_ik < 1`.
    Case1,
    /// `p_kj > M/(1+M)`: sensitive for `0 < p_ik < γ₀`.
    Case2,
    Empty,
}

/// Slice of the Bradley-Terry M-sensitive region at a fixed `p_kj`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BtRegionSlice {
    pub m: f64,
    pub p_kj: f64,
    pub case: RegionCase,
    pub gamma0: f64,
    pub p_ik_interval: Option<OpenInterval>,
}

fn gamma0_raw(m: f64, p_kj: f64) -> f64 {
    let inv = 1.0 / p_kj;
    1.0 - (sqrt((inv - 1.0) / m) - 1.0) / (inv - 2.0)
}

/// Boundary `γ₀(M, p_kj)` of the Bradley-Terry region.
///
/// `γ₀` has a pole at `p_kj = 1/2`. Within the pole window the value is the
/// average of the two sides, which is finite; the slice there is always empty
/// for `M > 1`, so only the reported number is affected.
pub fn gamma0(m: f64, p_kj: f64) -> f64 {
    if (1.0 / p_kj - 2.0).abs() < GAMMA0_POLE_WINDOW {
        0.5 * (gamma0_raw(m, p_kj + GAMMA0_POLE_OFFSET) + gamma0_raw(m, p_kj - GAMMA0_POLE_OFFSET))
    } else {
        gamma0_raw(m, p_kj)
    }
}

pub fn bt_region_slice(m: f64, p_kj: f64) -> Result<BtRegionSlice> {
    check_threshold(m)?;
    let p = Probability::new(p_kj)?.get();
    let g0 = gamma0(m, p);
    let (case, interval) = if p < 1.0 / (1.0 + m) {
        (RegionCase::Case1, Some(OpenInterval { lo: g0, hi: 1.0 }))
    } else if p > m / (1.0 + m) {
        (RegionCase::Case2, Some(OpenInterval { lo: 0.0, hi: g0 }))
    } else {
        (RegionCase::Empty, None)
    };
    Ok(BtRegionSlice { m, p_kj: p, case, gamma0: g0, p_ik_interval: interval })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AreaMethod {
    BradleyTerry,
    PlackettLuceUv,
    PlackettLuceVu,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaResult {
    pub closed_form: f64,
    pub method: AreaMethod,
}

/// Area of the Bradley-Terry M-sensitive region over the unit square,
/// `½ ln((M-1)/(M+1)) + ln((√M+1)/(√M-1)) / (2√M)`.
///
/// Evaluated as `atanh(1/√M)/√M - atanh(1/M)`, which is the same quantity
/// without the cancellation of the logarithmic form at large `M`.
pub fn bt_region_area(m: f64) -> Result<AreaResult> {
    check_threshold(m)?;
    let r = sqrt(m);
    Ok(AreaResult {
        closed_form: atanh(1.0 / r) / r - atanh(1.0 / m),
        method: AreaMethod::BradleyTerry,
    })
}

/// Constants `α >= 1` and `0 < β <= 1` that scale the Plackett-Luce
/// derivatives with respect to a swapped suffix pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlConstants {
    pub alpha: f64,
    pub beta: f64,
}

impl PlConstants {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(Error::domain(format!("alpha = {alpha} must be finite and >= 1")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::domain(format!("beta = {beta} must lie in (0, 1]")));
        }
        Ok(PlConstants { alpha, beta })
    }
}

/// Sensitivity context of a Plackett-Luce ranking with respect to the pair of
/// tuple positions `u < v` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct PlSensitivityContext {
    pub k: usize,
    pub u: usize,
    pub v: usize,
    pub constants: PlConstants,
    pub ratios: RatioMatrix,
}

/// Computes `α = 1 + Σ_{t>u, t≠v} r[u][t]` and
/// `β = Π_{l≠u, l<K-1} 1 / (1 + Σ_{m>l} r[l][m])` from the ranking's scores.
///
/// `α` equals 1 whenever `u = K-2` (no third option ranks after `u`), even for
/// `K > 2`.
pub fn pl_context(
    options: &ScoredOptionSet,
    omega: &KTuplePreference,
    u: usize,
    v: usize,
) -> Result<PlSensitivityContext> {
    let k = omega.k();
    if !(u < v && v < k) {
        return Err(Error::domain(format!(
            "positions ({u}, {v}) must satisfy u < v < K = {k}"
        )));
    }
    pl_context_from_ratios(RatioMatrix::for_tuple(omega, options)?, u, v)
}

/// [`pl_context`] for a ranking given only by its suffix-swap ratios.
pub fn pl_context_from_ratios(ratios: RatioMatrix, u: usize, v: usize) -> Result<PlSensitivityContext> {
    let k = ratios.k();
    if !(u < v && v < k) {
        return Err(Error::domain(format!(
            "positions ({u}, {v}) must satisfy u < v < K = {k}"
        )));
    }
    let alpha = 1.0
        + ((u + 1)..k)
            .filter(|&t| t != v)
            .map(|t| ratios.get(u, t))
            .sum::<f64>();
    let beta = (0..k - 1)
        .filter(|&l| l != u)
        .map(|l| 1.0 / ratios.stage_denominator(l))
        .product();
    Ok(PlSensitivityContext { k, u, v, constants: PlConstants { alpha, beta }, ratios })
}

/// `(∂p/∂p_uv, ∂p/∂p_vu) = (β p_vu, -β p_uv) / (α p_uv + p_vu)²`.
pub fn pl_partials(p_uv: f64, p_vu: f64, c: &PlConstants) -> Result<(f64, f64)> {
    let a = Probability::new(p_uv)?.get();
    let b = Probability::new(p_vu)?.get();
    let d = c.alpha * a + b;
    let sq = d * d;
    if sq == 0.0 {
        return Err(Error::Singularity { x: p_uv, y: p_vu });
    }
    let first = c.beta * b / sq;
    let second = -c.beta * a / sq;
    if !first.is_finite() || !second.is_finite() {
        return Err(Error::Singularity { x: p_uv, y: p_vu });
    }
    Ok((first, second))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlSide {
    /// Derivative with respect to `p_uv`; `p_uv` fixed, interval in `p_vu`.
    Uv,
    /// Derivative with respect to `p_vu`; `p_vu` fixed, interval in `p_uv`.
    Vu,
}

/// Bounds `center ± half_width` of a Plackett-Luce M-sensitive slice.
///
/// For [`PlSide::Uv`] these are `γ₁ ± γ₂`, for [`PlSide::Vu`] `η₁ ± η₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlRegionBounds {
    pub side: PlSide,
    pub center: f64,
    pub half_width: f64,
    /// Range of the fixed coordinate for which the slice is nonempty,
    /// `(0, β/(4αM))`.
    pub admissible: OpenInterval,
    pub interval: Option<OpenInterval>,
}

fn pl_region(m: f64, c: &PlConstants, fixed: f64, side: PlSide) -> Result<PlRegionBounds> {
    check_threshold(m)?;
    let p = Probability::new(fixed)?.get();
    let (alpha, beta) = (c.alpha, c.beta);
    let limit = beta / (4.0 * alpha * m);
    let scale = match side {
        PlSide::Uv => 2.0 * m,
        PlSide::Vu => 2.0 * alpha * alpha * m,
    };
    let center = (beta - 2.0 * alpha * m * p) / scale;
    let disc = beta * (beta - 4.0 * alpha * m * p);
    let (half_width, interval) = if p < limit && disc > 0.0 {
        let hw = sqrt(disc) / scale;
        (hw, Some(OpenInterval { lo: center - hw, hi: center + hw }))
    } else {
        (0.0, None)
    };
    Ok(PlRegionBounds {
        side,
        center,
        half_width,
        admissible: OpenInterval { lo: 0.0, hi: limit },
        interval,
    })
}

/// Slice of the region where `|∂p/∂p_uv| > M`, at fixed `p_uv`.
pub fn pl_region_uv(m: f64, c: &PlConstants, p_uv: f64) -> Result<PlRegionBounds> {
    pl_region(m, c, p_uv, PlSide::Uv)
}

/// Slice of the region where `|∂p/∂p_vu| > M`, at fixed `p_vu`.
pub fn pl_region_vu(m: f64, c: &PlConstants, p_vu: f64) -> Result<PlRegionBounds> {
    pl_region(m, c, p_vu, PlSide::Vu)
}

/// `β²/(6αM²)` for [`PlSide::Uv`] and `β²/(6α³M²)` for [`PlSide::Vu`].
pub fn pl_region_area(m: f64, c: &PlConstants, side: PlSide) -> Result<AreaResult> {
    check_threshold(m)?;
    let (alpha, beta) = (c.alpha, c.beta);
    let base = beta * beta / (6.0 * alpha * m * m);
    Ok(match side {
        PlSide::Uv => AreaResult { closed_form: base, method: AreaMethod::PlackettLuceUv },
        PlSide::Vu => AreaResult {
            closed_form: base / (alpha * alpha),
            method: AreaMethod::PlackettLuceVu,
        },
    })
}

/// Bradley-Terry against Plackett-Luce sensitive-region areas at one `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaComparison {
    pub bt_area: f64,
    pub pl_area: f64,
    /// `bt_area > pl_area`.
    pub holds: bool,
    /// `bt_area > 1/(6M²)`, the bound that dominates every Plackett-Luce area.
    pub exceeds_bound: bool,
}

pub fn compare_region_areas(m: f64, c: &PlConstants) -> Result<AreaComparison> {
    let bt_area = bt_region_area(m)?.closed_form;
    let pl_area = pl_region_area(m, c, PlSide::Uv)?.closed_form;
    Ok(AreaComparison {
        bt_area,
        pl_area,
        holds: bt_area > pl_area,
        exceeds_bound: bt_area > 1.0 / (6.0 * m * m),
    })
}

/// A point at which `p_ij` is M-sensitive to `p_ik`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    /// Every `p_ik` in `(p0, 1)` has `g'(g⁻¹(p_ik)) < g'(δ)/M` for links whose
    /// density decreases on the right tail.
    pub p0: f64,
    pub p_ik: f64,
    /// `g(g⁻¹(1 - p_ik) + δ)`, which pins `g'(g⁻¹(p_ik) + g⁻¹(p_kj))` to `g'(δ)`.
    pub p_kj: f64,
    pub derivative: f64,
}

/// Constructs `(p_ik, p_kj)` with `∂p_ij/∂p_ik > M` for any `M > 0`.
///
/// `p_ik` is pushed towards 1 by halving `1 - p_ik` from 0.9 until
/// `g'(g⁻¹(p_ik))` drops below `g'(δ)/M`; `p_kj` is then chosen so the outer
/// derivative equals `g'(δ)`. Failing before `1 - 1e-12` means the threshold is
/// beyond what `f64` can resolve, not that the construction is wrong.
pub fn sensitivity_witness(link: LinkFunction, m: f64, delta: f64) -> Result<Witness> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::domain(format!("M = {m} must be positive")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!("delta = {delta} must be positive")));
    }
    let outer = link.density(delta);
    if outer <= 0.0 {
        return Err(Error::domain(format!("g'({delta}) vanishes")));
    }
    let threshold = outer / m;
    let mut p = WITNESS_START;
    for _ in 0..WITNESS_MAX_STEPS {
        if p > WITNESS_LIMIT {
            break;
        }
        let next = 1.0 - (1.0 - p) / 2.0;
        if link.density(link.inverse(p)?) < threshold && next <= WITNESS_LIMIT {
            let p_kj = link.evaluate(link.inverse(1.0 - next)? + delta)?.get();
            let derivative = general_partial(link, next, p_kj)?;
            if derivative > m {
                return Ok(Witness { p0: p, p_ik: next, p_kj, derivative });
            }
        }
        p = next;
    }
    Err(Error::WitnessNotFound { m, limit: WITNESS_LIMIT })
}
