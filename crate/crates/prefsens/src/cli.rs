//! Command-line interface.
//!
//! Exit codes: 0 on success (including `--help` and `--version`), 1 for
//! invalid arguments or failed computations, 2 when `verify` finds a failing
//! criterion.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use prefsens_core::dataset::{generate, DatasetSpec, TemplateBank, DEFAULT_OPTIONS};
use prefsens_core::fitting::{fit_bt, predict, FitResult, PairwiseCounts};
use prefsens_core::models::{compose_pairwise, KTuplePreference, Probability, ScoredOptionSet};
use prefsens_core::oracles::{mc_area_bt, quad_area_pl};
use prefsens_core::raster::{raster_bt, raster_pl, BtDerivative, PlDerivative, DEFAULT_RESOLUTION, DEFAULT_THRESHOLDS};
use prefsens_core::sensitivity::{
    bt_partial, bt_partial_wrt_kj, bt_region_area, bt_region_slice, general_partial, pl_context, pl_partials,
    pl_region_area, pl_region_uv, pl_region_vu, sensitivity_witness, PlConstants, PlRegionBounds, PlSide,
    RegionCase, DEFAULT_WITNESS_DELTA,
};
use prefsens_core::{LinkFamily, LinkFunction};
use serde_json::{json, Value};

use crate::counts_io::{counts_from_dataset, parse_count_matrix};
use crate::dataset_io::{read_dataset, write_dataset, write_sweep};
use crate::export::{export, Axes, Format};
use crate::format::sig;
use crate::verify::{self, Status};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "prefsens", version, about = "Sensitivity analysis of Bradley-Terry and Plackett-Luce preference models")]
struct Cli {
    /// Print machine-readable JSON with full precision.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compose p_ij from p_ik and p_kj.
    Compose {
        #[arg(long = "p-ik")]
        p_ik: f64,
        #[arg(long = "p-kj")]
        p_kj: f64,
        #[arg(long, value_enum, default_value_t = LinkArg::Logistic)]
        link: LinkArg,
    },
    /// Analytic partial derivatives.
    Grad {
        #[command(subcommand)]
        model: GradModel,
    },
    /// Boundaries of M-sensitive regions.
    Region {
        #[command(subcommand)]
        model: RegionModel,
    },
    /// Closed-form sensitive-region area next to its numerical oracle.
    Area {
        #[command(subcommand)]
        model: AreaModel,
    },
    /// A point where p_ij is M-sensitive to p_ik under the given link.
    Witness {
        #[arg(long, value_enum, default_value_t = LinkArg::Logistic)]
        link: LinkArg,
        #[arg(long = "M")]
        m: f64,
        #[arg(long, default_value_t = DEFAULT_WITNESS_DELTA)]
        delta: f64,
    },
    /// Rasterize derivative magnitudes and write CSV or SVG.
    Raster {
        #[command(subcommand)]
        model: RasterModel,
    },
    /// Generate one synthetic preference dataset as JSON lines.
    GenData {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        p12: f64,
        #[arg(long)]
        p23: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate the 21-point p23 sweep and its manifest.
    SweepData {
        #[command(flatten)]
        data: DataArgs,
        /// Output directory for the datasets and manifest.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit Bradley-Terry scores from a dataset or count matrix.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Option names in index order. Defaults to dog,cat,bird for datasets
        /// and to 0..N for count matrices.
        #[arg(long, value_delimiter = ',')]
        options: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
        format: InputFormat,
    },
    /// Run the oracle verification suite.
    Verify {
        /// Skip the Monte-Carlo, full-resolution raster and sweep checks.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Ordered option triple.
    #[arg(long, value_delimiter = ',', default_values_t = ["dog", "bird", "cat"].map(String::from))]
    permutation: Vec<String>,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum GradModel {
    /// ∂p_ij/∂p_ik and ∂p_ij/∂p_kj.
    Bt {
        #[arg(long = "p-ik")]
        p_ik: f64,
        #[arg(long = "p-kj")]
        p_kj: f64,
        #[arg(long, value_enum, default_value_t = LinkArg::Logistic)]
        link: LinkArg,
    },
    /// ∂p/∂p_uv and ∂p/∂p_vu.
    Pl {
        #[arg(long = "p-uv")]
        p_uv: f64,
        #[arg(long = "p-vu")]
        p_vu: f64,
        #[command(flatten)]
        ctx: PlArgs,
    },
}

#[derive(Args, Debug)]
struct PlArgs {
    #[arg(long, requires = "beta", conflicts_with = "scores")]
    alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    beta: Option<f64>,
    /// Scores of the ranked options in ranking order; α and β are derived.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    scores: Option<Vec<f64>>,
    /// 1-based tuple position u (with --scores).
    #[arg(long, default_value_t = 1)]
    u: usize,
    /// 1-based tuple position v > u (with --scores).
    #[arg(long, default_value_t = 2)]
    v: usize,
}

#[derive(Subcommand, Debug)]
enum RegionModel {
    Bt {
        #[arg(long = "M")]
        m: f64,
        #[arg(long = "p-kj")]
        p_kj: f64,
    },
    Pl {
        #[arg(long = "M")]
        m: f64,
        #[command(flatten)]
        ctx: PlArgs,
        #[arg(long = "p-uv", required_unless_present = "p_vu", conflicts_with = "p_vu")]
        p_uv: Option<f64>,
        #[arg(long = "p-vu")]
        p_vu: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
enum AreaModel {
    Bt {
        #[arg(long = "M")]
        m: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Pl {
        #[arg(long = "M")]
        m: f64,
        #[command(flatten)]
        ctx: PlArgs,
        #[arg(long, value_enum, default_value_t = SideArg::Uv)]
        side: SideArg,
        #[arg(long, default_value_t = 100_000)]
        grid: usize,
    },
}

#[derive(Args, Debug)]
struct RasterArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Svg)]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_THRESHOLDS)]
    thresholds: Vec<f64>,
}

#[derive(Subcommand, Debug)]
enum RasterModel {
    Bt {
        #[arg(long, value_enum, default_value_t = BtWhich::Pik)]
        which: BtWhich,
        #[command(flatten)]
        raster: RasterArgs,
    },
    Pl {
        #[arg(long, value_enum, default_value_t = SideArg::Uv)]
        which: SideArg,
        #[arg(long, default_value_t = 1.01)]
        alpha: f64,
        #[arg(long, default_value_t = 0.99)]
        beta: f64,
        #[command(flatten)]
        raster: RasterArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LinkArg {
    Logistic,
    Probit,
}

impl From<LinkArg> for LinkFunction {
    fn from(l: LinkArg) -> Self {
        LinkFunction::new(match l {
            LinkArg::Logistic => LinkFamily::Logistic,
            LinkArg::Probit => LinkFamily::Probit,
        })
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Uv,
    Vu,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BtWhich {
    Pik,
    Pkj,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InputFormat {
    Auto,
    Jsonl,
    Matrix,
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let json = cli.json;
    match execute(cli.command, json, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

struct Printer<'a> {
    json: bool,
    out: &'a mut dyn Write,
}

impl Printer<'_> {
    fn emit(&mut self, value: Value, text: String) -> Result<()> {
        let r = if self.json { writeln!(self.out, "{value}") } else { write!(self.out, "{text}") };
        r.map_err(|e| Error::io("<stdout>", e))
    }
}

fn probability(name: &str, p: f64) -> Result<f64> {
    Probability::new(p).map(f64::from).map_err(|_| Error::Invalid(format!("--{name} = {p} must lie strictly between 0 and 1")))
}

fn execute(command: Command, json: bool, out: &mut dyn Write) -> Result<i32> {
    let mut p = Printer { json, out };
    match command {
        Command::Compose { p_ik, p_kj, link } => {
            let (p_ik, p_kj) = (probability("p-ik", p_ik)?, probability("p-kj", p_kj)?);
            let v = compose_pairwise(link.into(), p_ik, p_kj)?.get();
            p.emit(json!({ "p_ij": v, "p_ik": p_ik, "p_kj": p_kj }), format!("p_ij = {}\n", sig(v)))?;
        }
        Command::Grad { model: GradModel::Bt { p_ik, p_kj, link } } => {
            let (p_ik, p_kj) = (probability("p-ik", p_ik)?, probability("p-kj", p_kj)?);
            let g: LinkFunction = link.into();
            let (a, b) = match g.family() {
                LinkFamily::Logistic => (bt_partial(p_ik, p_kj)?, bt_partial_wrt_kj(p_ik, p_kj)?),
                LinkFamily::Probit => (general_partial(g, p_ik, p_kj)?, general_partial(g, p_kj, p_ik)?),
            };
            p.emit(
                json!({ "d_p_ik": a, "d_p_kj": b }),
                format!("dp_ij/dp_ik = {}\ndp_ij/dp_kj = {}\n", sig(a), sig(b)),
            )?;
        }
        Command::Grad { model: GradModel::Pl { p_uv, p_vu, ctx } } => {
            let c = constants(&ctx)?;
            let (p_uv, p_vu) = (probability("p-uv", p_uv)?, probability("p-vu", p_vu)?);
            let (a, b) = pl_partials(p_uv, p_vu, &c)?;
            p.emit(
                json!({ "alpha": c.alpha, "beta": c.beta, "d_p_uv": a, "d_p_vu": b }),
                format!(
                    "alpha = {}, beta = {}\ndp/dp_uv = {}\ndp/dp_vu = {}\n",
                    sig(c.alpha),
                    sig(c.beta),
                    sig(a),
                    sig(b)
                ),
            )?;
        }
        Command::Region { model: RegionModel::Bt { m, p_kj } } => {
            let s = bt_region_slice(m, probability("p-kj", p_kj)?)?;
            let case = match s.case {
                RegionCase::Case1 => "case1",
                RegionCase::Case2 => "case2",
                RegionCase::Empty => "empty",
            };
            let interval = s.p_ik_interval.map(|iv| [iv.lo, iv.hi]);
            let text = match interval {
                Some([lo, hi]) => format!("{case}, gamma0 = {}, p_ik in ({}, {})\n", sig(s.gamma0), sig(lo), sig(hi)),
                None => format!("{case}, gamma0 = {}, no sensitive p_ik\n", sig(s.gamma0)),
            };
            p.emit(json!({ "case": case, "gamma0": s.gamma0, "interval": interval }), text)?;
        }
        Command::Region { model: RegionModel::Pl { m, ctx, p_uv, p_vu } } => {
            let c = constants(&ctx)?;
            let b = match (p_uv, p_vu) {
                (Some(x), _) => pl_region_uv(m, &c, probability("p-uv", x)?)?,
                (None, Some(y)) => pl_region_vu(m, &c, probability("p-vu", y)?)?,
                (None, None) => unreachable!("clap requires one of --p-uv, --p-vu"),
            };
            p.emit(region_json(&b), region_text(&b))?;
        }
        Command::Area { model: AreaModel::Bt { m, samples, seed } } => {
            let exact = bt_region_area(m)?.closed_form;
            let est = mc_area_bt(m, samples, seed)?;
            let rel = (est.value - exact).abs() / exact;
            p.emit(
                json!({
                    "closed_form": exact, "oracle": est.value, "std_error": est.std_error,
                    "samples": est.n_samples, "seed": est.seed, "relative_discrepancy": rel,
                }),
                format!(
                    "closed form = {}\nmonte carlo = {} (std error {}, {} samples, seed {})\nrelative discrepancy = {}\n",
                    sig(exact),
                    sig(est.value),
                    sig(est.std_error),
                    est.n_samples,
                    est.seed,
                    sig(rel)
                ),
            )?;
        }
        Command::Area { model: AreaModel::Pl { m, ctx, side, grid } } => {
            let c = constants(&ctx)?;
            let side = match side {
                SideArg::Uv => PlSide::Uv,
                SideArg::Vu => PlSide::Vu,
            };
            let exact = pl_region_area(m, &c, side)?.closed_form;
            let quad = quad_area_pl(m, c.alpha, c.beta, side, grid)?;
            let diff = (quad - exact).abs();
            p.emit(
                json!({ "closed_form": exact, "oracle": quad, "grid": grid, "absolute_discrepancy": diff }),
                format!(
                    "closed form = {}\nquadrature = {} ({grid} intervals)\nabsolute discrepancy = {}\n",
                    sig(exact),
                    sig(quad),
                    sig(diff)
                ),
            )?;
        }
        Command::Witness { link, m, delta } => {
            let w = sensitivity_witness(link.into(), m, delta)?;
            p.emit(
                json!({ "p0": w.p0, "p_ik": w.p_ik, "p_kj": w.p_kj, "derivative": w.derivative }),
                format!(
                    "p0 = {}\np_ik = {}\np_kj = {}\ndp_ij/dp_ik = {}\n",
                    sig(w.p0),
                    sig(w.p_ik),
                    sig(w.p_kj),
                    sig(w.derivative)
                ),
            )?;
        }
        Command::Raster { model } => {
            let (grid, axes, args) = match model {
                RasterModel::Bt { which, raster } => {
                    let (which, axes) = match which {
                        BtWhich::Pik => (BtDerivative::Pik, "|dp_ij/dp_ik|"),
                        BtWhich::Pkj => (BtDerivative::Pkj, "|dp_ij/dp_kj|"),
                    };
                    let g = raster_bt(which, &raster.thresholds, raster.resolution)?;
                    (g, (axes, "p_ik", "p_kj"), raster)
                }
                RasterModel::Pl { which, alpha, beta, raster } => {
                    let c = PlConstants::new(alpha, beta)?;
                    let (which, axes) = match which {
                        SideArg::Uv => (PlDerivative::Uv, "|dp/dp_uv|"),
                        SideArg::Vu => (PlDerivative::Vu, "|dp/dp_vu|"),
                    };
                    let g = raster_pl(which, &c, &raster.thresholds, raster.resolution)?;
                    (g, (axes, "p_uv", "p_vu"), raster)
                }
            };
            let (field, x, y) = axes;
            export(&grid, args.format, &Axes { x: x.into(), y: y.into() }, &args.out)?;
            let sensitive = grid.cells().filter(|c| c.3 > 0).count();
            p.emit(
                json!({ "path": args.out, "resolution": grid.resolution(), "thresholds": grid.thresholds(),
                        "sensitive_cells": sensitive }),
                format!(
                    "wrote {} ({field}, {}x{} cells, {sensitive} above the lowest threshold)\n",
                    args.out.display(),
                    grid.resolution(),
                    grid.resolution()
                ),
            )?;
        }
        Command::GenData { data, p12, p23, out } => {
            let (p12, p23) = (probability("p12", p12)?, probability("p23", p23)?);
            let spec = dataset_spec(&data, p12, p23)?;
            write_dataset(&generate(&spec, &TemplateBank::default()), &out)?;
            p.emit(
                json!({ "path": out, "samples": spec.n_samples, "seed": spec.seed }),
                format!("wrote {} samples to {}\n", spec.n_samples, out.display()),
            )?;
        }
        Command::SweepData { data, out } => {
            let base = dataset_spec(&data, 0.99, 0.5)?;
            let manifest = write_sweep(&base, &TemplateBank::default(), &out)?;
            p.emit(
                json!({ "manifest": manifest, "datasets": prefsens_core::dataset::SWEEP_POINTS }),
                format!("wrote {} datasets and {}\n", prefsens_core::dataset::SWEEP_POINTS, manifest.display()),
            )?;
        }
        Command::Fit { input, out, options, format } => {
            let (counts, labels) = load_counts(&input, options, format)?;
            let fit = fit_bt(&counts)?;
            let report = fit_json(&fit, &labels)?;
            if let Some(path) = &out {
                let text = serde_json::to_string_pretty(&report).expect("JSON values serialize");
                std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
            }
            p.emit(report, fit_text(&fit, &labels)?)?;
        }
        Command::Verify { quick } => {
            let outcomes = verify::run(quick);
            let failed: Vec<u8> = outcomes.iter().filter(|o| o.status == Status::Fail).map(|o| o.id).collect();
            let mut text = String::new();
            for o in &outcomes {
                let tag = match o.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Skip => "SKIP",
                };
                text.push_str(&format!("{tag} {:>2} {}: {}\n", o.id, o.name, o.detail));
            }
            if !failed.is_empty() {
                let ids: Vec<String> = failed.iter().map(u8::to_string).collect();
                text.push_str(&format!("failed criteria: {}\n", ids.join(", ")));
            }
            p.emit(json!({ "criteria": outcomes, "failed": failed }), text)?;
            return Ok(if failed.is_empty() { 0 } else { 2 });
        }
    }
    Ok(0)
}

fn constants(args: &PlArgs) -> Result<PlConstants> {
    match (&args.scores, args.alpha, args.beta) {
        (Some(scores), _, _) => {
            let k = scores.len();
            if !(1 <= args.u && args.u < args.v && args.v <= k) {
                return Err(Error::Invalid(format!("need 1 <= u < v <= K = {k}, got u = {}, v = {}", args.u, args.v)));
            }
            let options = ScoredOptionSet::from_scores(scores.clone())?;
            let omega = KTuplePreference::new((0..k).collect(), k)?;
            Ok(pl_context(&options, &omega, args.u - 1, args.v - 1)?.constants)
        }
        (None, Some(alpha), Some(beta)) => Ok(PlConstants::new(alpha, beta)?),
        _ => Err(Error::Invalid("give --alpha and --beta, or --scores".into())),
    }
}

fn region_json(b: &PlRegionBounds) -> Value {
    json!({
        "side": match b.side { PlSide::Uv => "uv", PlSide::Vu => "vu" },
        "center": b.center,
        "half_width": b.half_width,
        "admissible_below": b.admissible.hi,
        "interval": b.interval.map(|iv| [iv.lo, iv.hi]),
    })
}

fn region_text(b: &PlRegionBounds) -> String {
    let (fixed, other, c, h) = match b.side {
        PlSide::Uv => ("p_uv", "p_vu", "gamma1", "gamma2"),
        PlSide::Vu => ("p_vu", "p_uv", "eta1", "eta2"),
    };
    match b.interval {
        Some(iv) => format!(
            "{c} = {}, {h} = {}\n{other} in ({}, {})\n",
            sig(b.center),
            sig(b.half_width),
            sig(iv.lo),
            sig(iv.hi)
        ),
        None => format!("empty: {fixed} must be below {}\n", sig(b.admissible.hi)),
    }
}

fn dataset_spec(data: &DataArgs, p12: f64, p23: f64) -> Result<DatasetSpec> {
    let perm: [String; 3] = data
        .permutation
        .clone()
        .try_into()
        .map_err(|v: Vec<String>| Error::Invalid(format!("--permutation needs three names, got {}", v.len())))?;
    Ok(DatasetSpec::new(perm, p12, p23, data.n, data.seed)?)
}

fn load_counts(input: &Path, options: Option<Vec<String>>, format: InputFormat) -> Result<(PairwiseCounts, Vec<String>)> {
    let text = std::fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let jsonl = match format {
        InputFormat::Jsonl => true,
        InputFormat::Matrix => false,
        InputFormat::Auto => text.trim_start().starts_with('{'),
    };
    if jsonl {
        let labels = options.unwrap_or_else(|| DEFAULT_OPTIONS.map(String::from).to_vec());
        let samples = read_dataset(input)?;
        return Ok((counts_from_dataset(&samples, &labels)?, labels));
    }
    let counts = parse_count_matrix(&text, input)?;
    let labels = match options {
        Some(l) if l.len() != counts.n() => {
            return Err(Error::Invalid(format!("--options names {} options but the matrix has {}", l.len(), counts.n())))
        }
        Some(l) => l,
        None => (0..counts.n()).map(|i| i.to_string()).collect(),
    };
    Ok((counts, labels))
}

fn predictions(fit: &FitResult) -> Result<Vec<Vec<f64>>> {
    let n = fit.scores.len();
    (0..n)
        .map(|i| (0..n).map(|j| Ok(predict(fit, i, j)?.get())).collect())
        .collect()
}

fn fit_json(fit: &FitResult, labels: &[String]) -> Result<Value> {
    Ok(json!({
        "options": labels,
        "scores": fit.scores,
        "log_likelihood": fit.log_likelihood,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "diverged": fit.diverged,
        "predicted": predictions(fit)?,
    }))
}

fn fit_text(fit: &FitResult, labels: &[String]) -> Result<String> {
    let mut s = String::new();
    let status = match (fit.converged, fit.diverged) {
        (_, true) => "diverged: some option never loses to the others, scores are not a finite maximum",
        (true, false) => "converged",
        (false, false) => "stopped at the iteration limit",
    };
    s.push_str(&format!("{status} after {} iterations, log-likelihood {}\n", fit.iterations, sig(fit.log_likelihood)));
    for (l, sc) in labels.iter().zip(&fit.scores) {
        s.push_str(&format!("score {l} = {}\n", sig(*sc)));
    }
    let p = predictions(fit)?;
    for i in 0..labels.len() {
        for j in (i + 1)..labels.len() {
            s.push_str(&format!("P({} > {}) = {}\n", labels[i], labels[j], sig(p[i][j])));
        }
    }
    Ok(s)
}
