//! The oracle suite behind `prefsens verify`.
//!
//! Each criterion is self-contained, uses fixed seeds and touches no files.
//! `quick` mode skips the three slow checks (Monte-Carlo areas, full-size
//! rasters, dataset sweep).

use prefsens_core::dataset::{empirical_check, generate, sweep, DatasetSpec, TemplateBank};
use prefsens_core::fitting::{fit_bt, predict, PairwiseCounts};
use prefsens_core::models::{bt_compose, bt_prob, compose_pairwise, pl_prob_from_ratios, RatioMatrix};
use prefsens_core::oracles::{finite_diff_default, mc_area_bt, mode_count, quad_area_pl};
use prefsens_core::raster::{raster_bt, raster_pl, BtDerivative, PlDerivative, RasterGrid, DEFAULT_THRESHOLDS};
use prefsens_core::rng::{self, ChaCha8Rng};
use prefsens_core::sensitivity::{
    bt_partial, bt_region_area, bt_region_slice, compare_region_areas, general_partial, pl_context_from_ratios,
    pl_partials, pl_region_area, pl_region_uv, pl_region_vu, sensitivity_witness, OpenInterval, PlConstants, PlSide,
    DEFAULT_WITNESS_DELTA,
};
use prefsens_core::LinkFunction;
use serde::Serialize;

use crate::dataset_io::to_jsonl_bytes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

type Check = fn() -> (bool, String);

const CRITERIA: [(u8, &str, bool, Check); 13] = [
    (1, "composition example", false, composition),
    (2, "sensitivity example", false, sensitivity_example),
    (3, "bt area vs monte carlo", true, bt_area_mc),
    (4, "pl area exponent", false, pl_area_exponent),
    (5, "derivative oracles", false, derivative_oracles),
    (6, "region coherence", false, region_coherence),
    (7, "raster transitions", true, raster_transitions),
    (8, "bt area dominates pl", false, area_dominance),
    (9, "sensitivity witness", false, witness),
    (10, "measured probabilities", false, measured_probabilities),
    (11, "dataset protocol", true, dataset_protocol),
    (12, "fitting round trip", false, fitting_round_trip),
    (13, "logit-normal modes", false, logit_normal_modes),
];

pub fn run(quick: bool) -> Vec<Outcome> {
    CRITERIA
        .iter()
        .map(|&(id, name, slow, check)| {
            if quick && slow {
                return Outcome { id, name, status: Status::Skip, detail: "skipped in quick mode".into() };
            }
            let (ok, detail) = check();
            Outcome { id, name, status: if ok { Status::Pass } else { Status::Fail }, detail }
        })
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn composition() -> (bool, String) {
    let a = bt_compose(0.9801, 0.02).map(f64::from).unwrap_or(f64::NAN);
    let b = bt_compose(0.9999, 0.02).map(f64::from).unwrap_or(f64::NAN);
    let ok = close(a, 0.5013, 1e-4) && close(a, 0.50, 0.005) && close(b, 0.9951, 1e-4);
    (ok, format!("p(0.9801, 0.02) = {a:.6}, p(0.9999, 0.02) = {b:.6}"))
}

fn sensitivity_example() -> (bool, String) {
    let d = bt_partial(0.99, 0.02).unwrap_or(f64::NAN);
    let ok_d = close(d, 22.37, 0.01) && d > 20.0;
    match bt_region_slice(20.0, 0.02) {
        Ok(s) => {
            let inside = s.p_ik_interval.is_some_and(|iv| iv.contains(0.99));
            let ok = ok_d && inside && close(s.gamma0, 0.98823, 1e-5);
            (ok, format!("derivative = {d:.4}, gamma0 = {:.6}, inside = {inside}", s.gamma0))
        }
        Err(e) => (false, e.to_string()),
    }
}

fn bt_area_mc() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [1.5, 2.0, 5.0, 10.0] {
        let (Ok(exact), Ok(est)) = (bt_region_area(m), mc_area_bt(m, 1_000_000, 0)) else {
            return (false, format!("M = {m}: evaluation failed"));
        };
        let rel = (est.value - exact.closed_form).abs() / exact.closed_form;
        ok &= rel <= 0.02;
        parts.push(format!("M={m}: {:.6} vs {:.6} ({:.2}%)", exact.closed_form, est.value, 100.0 * rel));
    }
    (ok, parts.join("; "))
}

fn pl_area_exponent() -> (bool, String) {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for alpha in [1.01, 1.5] {
        for beta in [0.99, 0.5] {
            for m in [2.0, 5.0] {
                let c = PlConstants { alpha, beta };
                let Ok(q) = quad_area_pl(m, alpha, beta, PlSide::Uv, 100_000) else { return (false, "quadrature failed".into()) };
                let main = pl_region_area(m, &c, PlSide::Uv).map(|a| a.closed_form).unwrap_or(f64::NAN);
                let variant = beta * beta / (6.0 * alpha * m);
                worst = worst.max((q - main).abs());
                ok &= close(q, main, 1e-4) && (q - variant).abs() > 1e-3;
            }
        }
    }
    (ok, format!("max |quadrature - closed form| = {worst:.2e}"))
}

fn interior(r: &mut ChaCha8Rng) -> f64 {
    0.01 + 0.98 * rng::unit(r)
}

fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn derivative_oracles() -> (bool, String) {
    let mut r = rng::seeded(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (x, y) = (interior(&mut r), interior(&mut r));
        let fd = finite_diff_default(|t| bt_compose(t, y).map(f64::from), x);
        worst = worst.max(match (fd, bt_partial(x, y)) {
            (Ok(fd), Ok(an)) => rel_err(fd, an),
            _ => f64::INFINITY,
        });
        for g in [LinkFunction::LOGISTIC, LinkFunction::PROBIT] {
            let fd = finite_diff_default(|t| compose_pairwise(g, t, y).map(f64::from), x);
            worst = worst.max(match (fd, general_partial(g, x, y)) {
                (Ok(fd), Ok(an)) => rel_err(fd, an),
                _ => f64::INFINITY,
            });
        }
        worst = worst.max(pl_fd_error(&mut r).unwrap_or(f64::INFINITY));
    }
    (worst <= 1e-5, format!("max relative error = {worst:.2e}"))
}

/// Relative error of both Plackett-Luce partials against differences of the
/// ratio form, at a random ranking and slot.
fn pl_fd_error(r: &mut ChaCha8Rng) -> prefsens_core::Result<f64> {
    let k = 3 + rng::index(r, 3);
    let scores: Vec<f64> = (0..k).map(|_| 4.0 * rng::unit(r) - 2.0).collect();
    let u = rng::index(r, k - 1);
    let v = u + 1 + rng::index(r, k - 1 - u);
    let base = RatioMatrix::from_scores(&scores)?;
    let ctx = pl_context_from_ratios(base.clone(), u, v)?;
    let (a, b) = (interior(r), interior(r));
    let eval = |p_uv: f64, p_vu: f64| {
        let mut m = base.clone();
        m.set_pair(u, v, p_vu / p_uv)?;
        pl_prob_from_ratios(&m).map(f64::from)
    };
    let (first, second) = pl_partials(a, b, &ctx.constants)?;
    let e1 = rel_err(finite_diff_default(|t| eval(t, b), a)?, first);
    let e2 = rel_err(finite_diff_default(|t| eval(a, t), b)?, second);
    Ok(e1.max(e2))
}

/// Uniform point of `iv` (assumed nonempty).
fn inside(r: &mut ChaCha8Rng, iv: OpenInterval) -> f64 {
    iv.lo + (iv.hi - iv.lo) * rng::open_unit(r)
}

fn region_coherence() -> (bool, String) {
    let mut r = rng::seeded(6);
    let c = PlConstants { alpha: 1.01, beta: 0.99 };
    let mut bad = 0usize;
    let mut checked = 0usize;
    for m in DEFAULT_THRESHOLDS {
        // (fixed coordinate -> slice, derivative at (varying, fixed))
        type Slice = Box<dyn Fn(f64) -> Option<OpenInterval>>;
        type Deriv = Box<dyn Fn(f64, f64) -> f64>;
        let limit = c.beta / (4.0 * c.alpha * m);
        let regions: [(Slice, Deriv, f64); 3] = [
            (
                Box::new(move |y| bt_region_slice(m, y).ok().and_then(|s| s.p_ik_interval)),
                Box::new(|x, y| bt_partial(x, y).unwrap_or(f64::INFINITY)),
                1.0,
            ),
            (
                Box::new(move |a| pl_region_uv(m, &c, a).ok().and_then(|b| b.interval)),
                Box::new(move |b, a| pl_partials(a, b, &c).map(|d| d.0.abs()).unwrap_or(f64::INFINITY)),
                limit,
            ),
            (
                Box::new(move |b| pl_region_vu(m, &c, b).ok().and_then(|s| s.interval)),
                Box::new(move |a, b| pl_partials(a, b, &c).map(|d| d.1.abs()).unwrap_or(f64::INFINITY)),
                limit,
            ),
        ];
        for (slice, deriv, fixed_range) in &regions {
            let mut inside_n = 0;
            while inside_n < 1000 {
                let fixed = fixed_range * rng::open_unit(&mut r);
                if let Some(iv) = slice(fixed) {
                    inside_n += 1;
                    bad += (deriv(inside(&mut r, iv), fixed) <= m) as usize;
                }
            }
            let mut outside_n = 0;
            while outside_n < 1000 {
                let (fixed, x) = (rng::open_unit(&mut r), rng::open_unit(&mut r));
                let far = slice(fixed).is_none_or(|iv| !iv.contains(x) && iv.distance_to_boundary(x) >= 1e-3);
                if far {
                    outside_n += 1;
                    bad += (deriv(x, fixed) > m) as usize;
                }
            }
            checked += 2000;
        }
    }
    (bad == 0, format!("{bad} of {checked} sampled points disagree"))
}

/// Checks that every class change between neighbouring cells along the
/// varying axis lies within one cell of an analytic slice boundary.
fn transitions_match<F>(grid: &RasterGrid, varying_is_x: bool, slice: F) -> (usize, usize)
where
    F: Fn(f64, f64) -> Option<OpenInterval>,
{
    let res = grid.resolution();
    let w = grid.cell_width();
    let (mut transitions, mut bad) = (0, 0);
    for line in 0..res {
        let fixed = grid.center(line);
        let bounds: Vec<f64> = grid
            .thresholds()
            .iter()
            .filter_map(|&m| slice(m, fixed))
            .flat_map(|iv| [iv.lo, iv.hi])
            .collect();
        for c in 0..res - 1 {
            let (a, b) = if varying_is_x {
                (grid.class(c, line), grid.class(c + 1, line))
            } else {
                (grid.class(line, c), grid.class(line, c + 1))
            };
            if a != b {
                transitions += 1;
                let edge = (c + 1) as f64 * w;
                if !bounds.iter().any(|&x| (x - edge).abs() <= w) {
                    bad += 1;
                }
            }
        }
    }
    (transitions, bad)
}

fn raster_transitions() -> (bool, String) {
    let t = DEFAULT_THRESHOLDS;
    let c = PlConstants { alpha: 1.01, beta: 0.99 };
    let res = 512;
    let grids = (
        raster_bt(BtDerivative::Pik, &t, res),
        raster_bt(BtDerivative::Pkj, &t, res),
        raster_pl(PlDerivative::Uv, &c, &t, res),
        raster_pl(PlDerivative::Vu, &c, &t, res),
    );
    let (Ok(pik), Ok(pkj), Ok(uv), Ok(vu)) = grids else { return (false, "raster failed".into()) };
    let bt = |m: f64, fixed: f64| bt_region_slice(m, fixed).ok().and_then(|s| s.p_ik_interval);
    let results = [
        transitions_match(&pik, true, bt),
        transitions_match(&pkj, false, bt),
        transitions_match(&uv, false, |m, a| pl_region_uv(m, &c, a).ok().and_then(|b| b.interval)),
        transitions_match(&vu, true, |m, b| pl_region_vu(m, &c, b).ok().and_then(|s| s.interval)),
    ];
    let total: usize = results.iter().map(|r| r.0).sum();
    let bad: usize = results.iter().map(|r| r.1).sum();
    (bad == 0 && results.iter().all(|r| r.0 > 0), format!("{bad} of {total} class transitions off the analytic curves"))
}

fn area_dominance() -> (bool, String) {
    let mut ok = true;
    let mut n = 0;
    for m in [1.01, 1.1, 2.0, 5.0, 10.0, 100.0] {
        for alpha in [1.001, 1.5, 3.0] {
            for beta in [0.999, 0.5, 0.1] {
                n += 1;
                ok &= compare_region_areas(m, &PlConstants { alpha, beta }).is_ok_and(|r| r.holds && r.exceeds_bound);
            }
        }
    }
    (ok, format!("{n} grid points"))
}

fn witness() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, g) in [("logistic", LinkFunction::LOGISTIC), ("probit", LinkFunction::PROBIT)] {
        for m in [10.0, 100.0] {
            let fd = sensitivity_witness(g, m, DEFAULT_WITNESS_DELTA).and_then(|w| {
                finite_diff_default(|t| compose_pairwise(g, t, w.p_kj).map(f64::from), w.p_ik)
            });
            match fd {
                Ok(d) => {
                    ok &= d > m;
                    parts.push(format!("{name} M={m}: {d:.4}"));
                }
                Err(e) => {
                    ok = false;
                    parts.push(format!("{name} M={m}: {e}"));
                }
            }
        }
    }
    (ok, parts.join("; "))
}

fn measured_probabilities() -> (bool, String) {
    let a = bt_compose(0.9993, 0.0141).map(f64::from).unwrap_or(f64::NAN);
    let b = bt_compose(0.9820, 0.0141).map(f64::from).unwrap_or(f64::NAN);
    let ok = close(a, 0.9533, 1e-4) && close(a, 0.9526, 0.002) && close(b, 0.4382, 1e-4) && close(b, 0.4378, 0.001);
    (ok, format!("p(0.9993, 0.0141) = {a:.4}, p(0.9820, 0.0141) = {b:.4}"))
}

fn dataset_protocol() -> (bool, String) {
    let Ok(base) = DatasetSpec::new(["dog".into(), "bird".into(), "cat".into()], 0.99, 0.5, 10_000, 0) else {
        return (false, "invalid base spec".into());
    };
    let bank = TemplateBank::default();
    let mut worst: f64 = 0.0;
    let mut excluded = 0;
    let mut identical = true;
    for spec in sweep(&base) {
        let samples = generate(&spec, &bank);
        identical &= to_jsonl_bytes(&samples) == to_jsonl_bytes(&generate(&spec, &bank));
        match empirical_check(&samples, &spec) {
            Ok(report) => {
                worst = worst.max(report.max_abs_z());
                excluded += report.pairs[2].count;
            }
            Err(e) => return (false, e.to_string()),
        }
    }
    (
        worst <= 3.0 && excluded == 0 && identical,
        format!("max |z| = {worst:.3}, excluded-pair samples = {excluded}, reproducible = {identical}"),
    )
}

fn fitting_round_trip() -> (bool, String) {
    let truth = [1.0, 0.0, -1.0];
    let mut r = rng::seeded(12);
    let mut counts = PairwiseCounts::zeros(3).expect("three options");
    for i in 0..3 {
        for j in (i + 1)..3 {
            let p = bt_prob(truth[i], truth[j]).map(f64::from).unwrap_or(0.5);
            let wins = (0..100_000).filter(|_| rng::unit(&mut r) < p).count() as u64;
            let _ = counts.add(i, j, wins);
            let _ = counts.add(j, i, 100_000 - wins);
        }
    }
    let mut worst: f64 = 0.0;
    match fit_bt(&counts) {
        Ok(fit) => {
            for i in 0..3 {
                for j in 0..3 {
                    let fitted = predict(&fit, i, j).map(f64::from).unwrap_or(f64::NAN);
                    let want = bt_prob(truth[i], truth[j]).map(f64::from).unwrap_or(f64::NAN);
                    worst = worst.max((fitted - want).abs());
                }
            }
        }
        Err(e) => return (false, e.to_string()),
    }
    let two = PairwiseCounts::new(2, vec![0, 25, 75, 0]).and_then(|c| fit_bt(&c));
    let ln3 = 3.0f64.ln();
    let diff = two.map(|f| (f.scores[1] - f.scores[0] - ln3).abs()).unwrap_or(f64::INFINITY);
    (worst <= 0.01 && diff <= 1e-4, format!("max probability error = {worst:.2e}, |s1 - s0 - ln 3| = {diff:.2e}"))
}

fn logit_normal_modes() -> (bool, String) {
    let cases = [(0.5, 1), (0.999, 1), (1.1, 2), (2.0, 2)];
    let got: Vec<usize> = cases.iter().map(|&(s2, _)| mode_count(s2, 10_000).unwrap_or(usize::MAX)).collect();
    let ok = cases.iter().zip(&got).all(|(&(_, want), &g)| want == g);
    (ok, format!("modes at sigma^2 = 0.5, 0.999, 1.1, 2: {got:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_run_skips_slow_checks_and_passes() {
        let out = run(true);
        assert_eq!(out.len(), 13);
        for o in &out {
            let slow = [3, 7, 11].contains(&o.id);
            assert_eq!(o.status == Status::Skip, slow, "{o:?}");
            if !slow {
                assert_eq!(o.status, Status::Pass, "{o:?}");
            }
        }
    }
}
