//! Command-line frontend: sampling, learning, evaluation, divergence
//! computations, lower-bound instance generation, truncations, and the two
//! built-in experiments. All randomness derives from `--seed`; identical
//! arguments produce byte-identical outputs.

use clap::{Parser, Subcommand, ValueEnum};
use revmax::dist::{Dist, ProductDist, SampleMatrix};
use revmax::error::{Error, Result};
use revmax::experiments::{
    mean_ratios, run_convergence, run_trend, write_convergence_csv, write_trend_csv, GUARD_INV_H,
};
use revmax::hardgen::{self, HardInstance};
use revmax::info::{skl_discrete, skl_numeric};
use revmax::learn::{dominated_empirical_myerson, ShadeParams};
use revmax::mech::{Feasibility, MatroidKind, Mechanism};
use revmax::{eval, xform};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "revmax", version, about = "Learn and evaluate revenue-optimal auctions from samples")]
struct Cli {
    /// Master random seed; every stream in a run derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Failure probability of the shading bounds.
    #[arg(long, global = true, default_value_t = 0.1)]
    delta: f64,

    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for scalar results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FeasArg {
    Single,
    Kunit,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum XformOp {
    TMin,
    TMaxValue,
    TMaxQuantile,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    #[value(name = "bounded-1h")]
    Bounded1h,
    #[value(name = "bounded-01")]
    Bounded01,
    Regular,
    MhrDiscrete,
    MhrContinuous,
    Matroid,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw an m×n sample matrix from per-bidder distribution files (CSV out).
    Sample {
        /// Distribution JSON file, once per bidder.
        #[arg(long, required = true)]
        dist: Vec<PathBuf>,
        /// Number of sample rows.
        #[arg(short, long)]
        m: usize,
        /// Trial index selecting the random stream.
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Learn a mechanism from a sample CSV (mechanism JSON out).
    Learn {
        /// Sample matrix CSV (m rows, n columns, no header).
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, value_enum, default_value_t = FeasArg::Single)]
        feas: FeasArg,
        /// Unit supply for k-unit feasibility.
        #[arg(short, long, default_value_t = 1)]
        k: usize,
    },
    /// Expected revenue of a mechanism file under distribution files.
    Eval {
        #[arg(long)]
        mech: PathBuf,
        #[arg(long, required = true)]
        dist: Vec<PathBuf>,
        /// Monte-Carlo sample count (exact enumeration when omitted).
        #[arg(long)]
        mc: Option<usize>,
        /// Payment cap for the Monte-Carlo confidence interval.
        #[arg(long)]
        cap: Option<f64>,
    },
    /// Optimal revenue of a product of distribution files.
    Opt {
        #[arg(long, required = true)]
        dist: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = FeasArg::Single)]
        feas: FeasArg,
        #[arg(short, long, default_value_t = 1)]
        k: usize,
    },
    /// Symmetric KL divergence between two distribution files.
    Skl {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
    },
    /// Generate a lower-bound instance: JSON with a validation report, plus
    /// revenue-curve CSVs next to the output file.
    HardInstance {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(short, long)]
        n: u32,
        /// Perturbation parameter (ε, or ε0 for mhr-continuous).
        #[arg(long)]
        eps: f64,
        /// Support upper bound H (bounded-1h only).
        #[arg(long, default_value_t = 4.0)]
        h: f64,
        /// Supply k (matroid only).
        #[arg(short, long, default_value_t = 1)]
        k: u32,
    },
    /// Truncate a distribution file (distribution JSON out).
    Xform {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, value_enum)]
        op: XformOp,
        /// Truncation fraction for t-min / t-max-quantile.
        #[arg(long)]
        eps: Option<f64>,
        /// Truncation value for t-max-value.
        #[arg(long)]
        v_bar: Option<f64>,
    },
    /// Price-learning convergence experiment on the heavy-tailed regular law.
    Convergence {
        /// Sample sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [100usize, 1000, 10000])]
        ms: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Guard of the fixed-guard baseline (1/H).
        #[arg(long, default_value_t = GUARD_INV_H)]
        guard: f64,
    },
    /// Revenue-gap √m-rate experiment on the fixed two-bidder instance.
    Trend {
        #[arg(long, value_delimiter = ',', default_values_t = [256usize, 1024, 4096, 16384])]
        ms: Vec<usize>,
        #[arg(long, default_value_t = 40)]
        trials: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        let code = match e {
            Error::Domain(_) | Error::Parse(_) | Error::UnsupportedVersion { .. } => 2,
            _ => 1,
        };
        std::process::exit(code);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Sample { ref dist, m, trial } => {
            let d = load_product(dist)?;
            let s = SampleMatrix::draw(&d, m, cli.seed, trial)?;
            let mut buf = Vec::new();
            s.write_csv(&mut buf)?;
            emit_bytes(&cli.out, &buf)
        }
        Cmd::Learn { ref samples, feas, k } => {
            let s = SampleMatrix::read_csv(std::fs::File::open(samples)?)?;
            let mech = dominated_empirical_myerson(&s, cli.delta, feasibility(feas, k))?;
            emit(&cli.out, &(mech.to_json() + "\n"))
        }
        Cmd::Eval { ref mech, ref dist, mc, cap } => {
            let m = Mechanism::from_json(&std::fs::read_to_string(mech)?)?;
            let d = load_product(dist)?;
            match mc {
                None => {
                    let rev = eval::rev_exact(&m, &d)?;
                    emit_scalar(&cli, "revenue", rev)
                }
                Some(n) => {
                    let cap = cap.ok_or_else(|| {
                        Error::domain("--mc needs --cap for the confidence interval")
                    })?;
                    let mut rng = revmax::rng::stream(cli.seed, 0, 0);
                    let (mean, hw) = eval::rev_mc(&m, &d, n, &mut rng, cap)?;
                    let content = match cli.format {
                        Format::Csv => format!("revenue,halfwidth\n{mean},{hw}\n"),
                        Format::Json => format!("{{\"revenue\":{mean},\"halfwidth\":{hw}}}\n"),
                    };
                    emit(&cli.out, &content)
                }
            }
        }
        Cmd::Opt { ref dist, feas, k } => {
            let d = load_product(dist)?;
            let v = eval::opt(&d, feasibility(feas, k))?;
            emit_scalar(&cli, "opt", v)
        }
        Cmd::Skl { ref p, ref q } => {
            let dp = load_dist(p)?;
            let dq = load_dist(q)?;
            let v = match (&dp, &dq) {
                (Dist::Discrete(a), Dist::Discrete(b)) => skl_discrete(a, b),
                (Dist::ClosedForm(a), Dist::ClosedForm(b)) => skl_numeric(a, b)?,
                _ => {
                    return Err(Error::domain(
                        "skl needs two discrete or two closed-form distributions",
                    ))
                }
            };
            emit_scalar(&cli, "skl", v)
        }
        Cmd::HardInstance { family, n, eps, h, k } => {
            let inst = match family {
                FamilyArg::Bounded1h => hardgen::gen_bounded_1h(n, h, eps)?,
                FamilyArg::Bounded01 => hardgen::gen_bounded_01(n, eps)?,
                FamilyArg::Regular => hardgen::gen_regular(n, eps)?,
                FamilyArg::MhrDiscrete => hardgen::gen_mhr_discrete(n, eps)?,
                FamilyArg::MhrContinuous => hardgen::gen_mhr_continuous_from_eps0(n, eps)?,
                FamilyArg::Matroid => hardgen::gen_matroid_kunit(n, k, eps)?,
            };
            emit(&cli.out, &(instance_json(&inst)? + "\n"))?;
            if let Some(out) = &cli.out {
                let (low, high) = inst.curves()?;
                let mut buf = Vec::new();
                low.write_csv(&mut buf)?;
                std::fs::write(sibling(out, "low_curve.csv"), &buf)?;
                buf.clear();
                high.write_csv(&mut buf)?;
                std::fs::write(sibling(out, "high_curve.csv"), &buf)?;
            }
            Ok(())
        }
        Cmd::Xform { ref dist, op, eps, v_bar } => {
            let d = load_dist(dist)?;
            let disc = d
                .as_discrete()
                .ok_or_else(|| Error::domain("xform needs a discrete distribution"))?;
            let need = |x: Option<f64>, name: &str| {
                x.ok_or_else(|| Error::domain(format!("this op needs --{name}")))
            };
            let t = match op {
                XformOp::TMin => xform::t_min(disc, need(eps, "eps")?)?,
                XformOp::TMaxValue => xform::t_max_value(disc, need(v_bar, "v-bar")?)?,
                XformOp::TMaxQuantile => xform::t_max_quantile(disc, need(eps, "eps")?)?,
            };
            emit(&cli.out, &(Dist::Discrete(t).to_json() + "\n"))
        }
        Cmd::Convergence { ref ms, trials, guard } => {
            ShadeParams::new(1, 1, cli.delta)?; // validate delta up front
            let rows = run_convergence(ms, trials, cli.seed, cli.delta, guard)?;
            let mut buf = Vec::new();
            write_convergence_csv(&rows, &mut buf)?;
            emit_bytes(&cli.out, &buf)?;
            if let Some(out) = &cli.out {
                let mut means = String::from("m,algo,mean_ratio\n");
                for ((m, algo), r) in mean_ratios(&rows) {
                    writeln!(means, "{m},{algo},{r}").expect("string write");
                }
                let means_path = sibling(out, "means.csv");
                std::fs::write(&means_path, means)?;
                std::fs::write(sibling(out, "gp"), convergence_gnuplot(&means_path))?;
            }
            Ok(())
        }
        Cmd::Trend { ref ms, trials } => {
            let rows = run_trend(ms, trials, cli.seed, cli.delta)?;
            let mut buf = Vec::new();
            write_trend_csv(&rows, &mut buf)?;
            emit_bytes(&cli.out, &buf)?;
            if let Some(out) = &cli.out {
                std::fs::write(sibling(out, "gp"), trend_gnuplot(out))?;
            }
            Ok(())
        }
    }
}

fn feasibility(feas: FeasArg, k: usize) -> Feasibility {
    match feas {
        FeasArg::Single => Feasibility::SingleItem,
        FeasArg::Kunit => Feasibility::Matroid(MatroidKind::Uniform { k }),
    }
}

fn load_dist(path: &Path) -> Result<Dist> {
    Dist::from_json(&std::fs::read_to_string(path)?)
}

fn load_product(paths: &[PathBuf]) -> Result<ProductDist> {
    ProductDist::new(paths.iter().map(|p| load_dist(p)).collect::<Result<Vec<_>>>()?)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    emit_bytes(out, content.as_bytes())
}

fn emit_bytes(out: &Option<PathBuf>, content: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, content)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(content)?;
        }
    }
    Ok(())
}

fn emit_scalar(cli: &Cli, name: &str, value: f64) -> Result<()> {
    let content = match cli.format {
        Format::Csv => format!("{name}\n{value}\n"),
        Format::Json => format!("{{\"{name}\":{value}}}\n"),
    };
    emit(&cli.out, &content)
}

/// `x.json` → `x.<suffix>` next to the original file.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

fn instance_json(inst: &HardInstance) -> Result<String> {
    let dist_value = |d: &Dist| -> Result<serde_json::Value> {
        serde_json::from_str(&d.to_json()).map_err(|e| Error::parse(e.to_string()))
    };
    let report = inst.validate();
    let v = serde_json::json!({
        "family": inst.family,
        "n": inst.n,
        "k": inst.k,
        "eps": inst.eps,
        "v0": inst.v0,
        "v1": if inst.v1.is_finite() { serde_json::json!(inst.v1) } else { serde_json::Value::Null },
        "v2": inst.v2,
        "p": inst.p,
        "delta_gap": inst.delta,
        "skl": inst.skl()?,
        "base": dist_value(&inst.base)?,
        "low": dist_value(&inst.low)?,
        "high": dist_value(&inst.high)?,
        "validation": report,
    });
    serde_json::to_string_pretty(&v).map_err(|e| Error::parse(e.to_string()))
}

fn convergence_gnuplot(means_csv: &Path) -> String {
    format!(
        "set datafile separator ','\n\
         set logscale x\n\
         set xlabel 'samples m'\n\
         set ylabel 'mean revenue ratio'\n\
         set key bottom right\n\
         plot for [algo in 'empirical guarded_cube_root guarded_inv_h dominated'] \\\n\
         \x20 '{}' using 1:(strcol(2) eq algo ? $3 : 1/0) with linespoints title algo\n",
        means_csv.display()
    )
}

fn trend_gnuplot(csv: &Path) -> String {
    format!(
        "set datafile separator ','\n\
         set logscale x 2\n\
         set xlabel 'samples m'\n\
         set ylabel 'gap * sqrt(m)'\n\
         plot '{}' using 1:3 skip 1 with linespoints title 'gap sqrt(m)'\n",
        csv.display()
    )
}
