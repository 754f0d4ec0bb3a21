//! Pairwise link functions `g` mapping a score difference to a preference
//! probability.
//!
//! Both families are strictly increasing, symmetric (`g(x) + g(-x) = 1`),
//! continuously differentiable and tend to 0 and 1 at minus and plus infinity.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::math::{erfc, exp, ln, ln_1p, sqrt};
use crate::models::Probability;
use crate::{Error, Result};

const NEWTON_MAX_ITER: usize = 50;
const BISECTION_MAX_ITER: usize = 200;
const PROBIT_LOWER_BRACKET: f64 = -40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkFamily {
    /// `g(x) = 1 / (1 + exp(-x))`, the Bradley-Terry link.
    Logistic,
    /// Standard normal CDF, the Thurstone-style link.
    Probit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinkFunction {
    family: LinkFamily,
}

impl LinkFunction {
    pub const LOGISTIC: LinkFunction = LinkFunction { family: LinkFamily::Logistic };
    pub const PROBIT: LinkFunction = LinkFunction { family: LinkFamily::Probit };

    pub const fn new(family: LinkFamily) -> Self {
        LinkFunction { family }
    }

    pub fn family(&self) -> LinkFamily {
        self.family
    }

    /// Raw value of `g(x)`. Rounds to exactly 0 or 1 for large `|x|`; use
    /// [`evaluate`](Self::evaluate) when the open codomain matters.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.family {
            LinkFamily::Logistic => {
                if x >= 0.0 {
                    1.0 / (1.0 + exp(-x))
                } else {
                    let e = exp(x);
                    e / (1.0 + e)
                }
            }
            LinkFamily::Probit => 0.5 * erfc(-x * FRAC_1_SQRT_2),
        }
    }

    /// Raw value of `g'(x)`.
    pub fn density(&self, x: f64) -> f64 {
        match self.family {
            LinkFamily::Logistic => {
                let e = exp(-x.abs());
                e / ((1.0 + e) * (1.0 + e))
            }
            LinkFamily::Probit => exp(-0.5 * x * x) / sqrt(2.0 * PI),
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<Probability> {
        check_finite(x)?;
        Probability::from_raw(self.cdf(x))
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(self.density(x))
    }

    /// `g⁻¹(p)`: the score difference at which the link produces `p`.
    ///
    /// Values outside the open interval (0, 1) are rejected, never clamped.
    pub fn inverse(&self, p: f64) -> Result<f64> {
        let p = Probability::new(p)?.get();
        // 1 - p is exact for p in [0.5, 1], so folding onto the lower tail keeps
        // g⁻¹(p) + g⁻¹(1 - p) = 0 to rounding.
        if p > 0.5 {
            return Ok(-self.lower_inverse(1.0 - p));
        }
        Ok(self.lower_inverse(p))
    }

    fn lower_inverse(&self, q: f64) -> f64 {
        debug_assert!(q > 0.0 && q <= 0.5);
        if q == 0.5 {
            return 0.0;
        }
        match self.family {
            LinkFamily::Logistic => ln(q) - ln_1p(-q),
            LinkFamily::Probit => probit_lower_inverse(q),
        }
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("link argument must be finite"))
    }
}

/// Lower-tail rational seed for the normal quantile (Abramowitz & Stegun
/// 26.2.23, absolute error below 4.5e-4).
fn probit_seed(q: f64) -> f64 {
    const C: [f64; 3] = [2.515517, 0.802853, 0.010328];
    const D: [f64; 3] = [1.432788, 0.189269, 0.001308];
    let t = sqrt(-2.0 * ln(q));
    let num = C[0] + t * (C[1] + t * C[2]);
    let den = 1.0 + t * (D[0] + t * (D[1] + t * D[2]));
    -(t - num / den)
}

fn probit_lower_inverse(q: f64) -> f64 {
    let link = LinkFunction::PROBIT;
    let mut x = probit_seed(q);
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        let residual = link.cdf(x) - q;
        if residual == 0.0 {
            converged = true;
            break;
        }
        let slope = link.density(x);
        if slope <= 0.0 || !slope.is_finite() {
            break;
        }
        let step = residual / slope;
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    // relative residual; the absolute one is meaningless deep in the tail
    if converged && x.is_finite() && (link.cdf(x) - q).abs() <= 1e-12 * q {
        return x;
    }
    probit_bisection(q)
}

fn probit_bisection(q: f64) -> f64 {
    let link = LinkFunction::PROBIT;
    let (mut lo, mut hi) = (PROBIT_LOWER_BRACKET, 0.0);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if link.cdf(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOG3: f64 = 1.098_612_288_668_109_8;

    #[test]
    fn logistic_reference_values() {
        let g = LinkFunction::LOGISTIC;
        assert_eq!(g.evaluate(0.0).unwrap().get(), 0.5);
        assert!((g.evaluate(LOG3).unwrap().get() - 0.75).abs() < 1e-15);
        assert_eq!(g.derivative(0.0).unwrap(), 0.25);
        assert!(g.derivative(50.0).unwrap() < 1e-20);
        assert_eq!(g.inverse(0.5).unwrap(), 0.0);
        assert!((g.inverse(0.75).unwrap() - LOG3).abs() < 1e-14);
    }

    #[test]
    fn probit_reference_values() {
        let g = LinkFunction::PROBIT;
        assert_eq!(g.evaluate(0.0).unwrap().get(), 0.5);
        // standard normal density at 0
        assert!((g.derivative(0.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        // 40-digit root of Phi(x) = 0.975
        assert!((g.inverse(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
    }

    #[test]
    fn probit_inverse_matches_bisection_oracle() {
        let g = LinkFunction::PROBIT;
        for &p in &[1e-9, 1e-6, 0.01, 0.2, 0.4999, 0.5001, 0.8, 0.975, 1.0 - 1e-6] {
            let (mut lo, mut hi) = (-40.0f64, 40.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g.cdf(mid) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let x = g.inverse(p).unwrap();
            assert!((x - lo).abs() < 1e-9, "p={p}: newton {x} bisection {lo}");
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        for g in [LinkFunction::LOGISTIC, LinkFunction::PROBIT] {
            let mut x: f64 = -20.0;
            while x <= 20.0 {
                let h = 1e-6 * x.abs().max(1.0);
                // difference on the lower tail, where the cdf keeps full relative precision
                let t = -x.abs();
                let fd = (g.cdf(t + h) - g.cdf(t - h)) / (2.0 * h);
                let an = g.derivative(x).unwrap();
                // deep tails lose absolute resolution in the difference quotient
                if an > 1e-8 {
                    assert!(((fd - an) / an).abs() < 1e-6, "{g:?} x={x} fd={fd} an={an}");
                }
                x += 0.37;
            }
        }
    }

    #[test]
    fn derivative_vanishes_far_out() {
        for g in [LinkFunction::LOGISTIC, LinkFunction::PROBIT] {
            assert!(g.derivative(40.0).unwrap() < 1e-12);
            assert!(g.derivative(-40.0).unwrap() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let g = LinkFunction::LOGISTIC;
        assert!(matches!(g.evaluate(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(g.derivative(f64::INFINITY), Err(Error::Domain(_))));
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(g.inverse(p), Err(Error::Domain(_))), "p={p}");
            assert!(LinkFunction::PROBIT.inverse(p).is_err());
        }
    }

    #[test]
    fn saturation_is_flagged() {
        assert!(matches!(
            LinkFunction::LOGISTIC.evaluate(40.0),
            Err(Error::Saturated { value }) if value == 1.0
        ));
        assert!(matches!(
            LinkFunction::PROBIT.evaluate(-40.0),
            Err(Error::Saturated { value }) if value == 0.0
        ));
    }
}
