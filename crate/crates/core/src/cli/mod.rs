//! Batch front end of the `wiener` binary.
//!
//! Every command reads a [`RunConfig`], writes a JSON report (and CSV data
//! where there is a table) and maps its verdict to an exit status: `0` on
//! pass, `2` when the checked property fails, `1` on usage or config errors.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::amalgam::discrete_amalgam_norm;
use crate::axb::{
    compute_tilde_v, lpq_discrete_norm, right_translation_bound, verify_axb_convolution,
    AxbConvolutionSetup,
};
use crate::components::{check_doubling, quasi_norm, DoublingProbes, GlobalComponent, WeightFunction};
use crate::convolution::{convolve, verify_embedding, EmbeddingReport, EmbeddingSetup, RelationId};
use crate::discretization::{build_axb_lattice, build_bupu, WellSpreadSet};
use crate::error::{Error, Result};
use crate::family::{enumerate_sequences, seeded, unit, TestFunction};
use crate::grid::GridMetadata;
use crate::group::GroupSpec;

pub use config::RunConfig;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "wiener", version, about = "Wiener amalgam norms, discretizations and convolution checks")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for report files; reports go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed overriding every family and estimator seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid refinement levels.
    #[arg(long, global = true)]
    pub refine: Option<usize>,
    /// Format written to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Amalgam and global norms of the configured functions.
    Norm,
    /// Doubling certificate or growth witness for a weight.
    Doubling,
    /// Discrete versus continuous amalgam norms.
    Equivalence,
    /// Convolution of the first two configured functions.
    Convolve,
    /// Empirical check of a convolution relation.
    Verify {
        /// Relation id; overrides the config.
        relation: Option<String>,
    },
    /// ax+b tools.
    Axb {
        #[command(subcommand)]
        action: AxbAction,
    },
    /// Summary of existing JSON reports.
    Report {
        inputs: Vec<PathBuf>,
    },
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum AxbAction {
    TildeV,
    DiscreteNorm,
    TranslationBound,
    Verify,
}

/// Result of a command before it is wrapped into a report.
pub struct Outcome {
    pub name: String,
    pub passed: bool,
    pub grid: Option<GridMetadata>,
    pub result: Value,
    pub csv: Option<String>,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    version: &'static str,
    timestamp: u64,
    passed: bool,
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: &'a Option<GridMetadata>,
    result: &'a Value,
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let src = fs::read_to_string(path)?;
            RunConfig::parse(&src)?
        }
        None => match &cli.command {
            Command::Verify { relation } if relation.as_deref().is_none_or(|r| r == "cor_conv_Lp") => {
                RunConfig::default_algebra()
            }
            Command::Report { .. } => RunConfig::default(),
            _ => {
                return Err(Error::Config {
                    line: 0,
                    message: "this command needs --config".into(),
                })
            }
        },
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.refine.is_some() {
        cfg.refine = cli.refine;
    }
    Ok(cfg)
}

/// Runs the command described by `cli` and returns the exit status.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(passed) => {
            if passed {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    let outcome = dispatch(&cli.command, &cfg)?;
    emit(cli, &cfg, &outcome)?;
    Ok(outcome.passed)
}

/// Runs a command on a configuration.
pub fn dispatch(command: &Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Norm => norm(cfg),
        Command::Doubling => doubling(cfg),
        Command::Equivalence => equivalence(cfg),
        Command::Convolve => convolve_cmd(cfg),
        Command::Verify { relation } => verify(cfg, relation.as_deref()),
        Command::Axb { action } => axb(cfg, *action),
        Command::Report { inputs } => report(cfg, inputs),
    }
}

/// Serializes the report; the timestamp is the only varying field.
pub fn render_report(cfg: &RunConfig, outcome: &Outcome) -> Result<String> {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let r = Report {
        command: &outcome.name,
        version: crate::VERSION,
        timestamp,
        passed: outcome.passed,
        config: cfg,
        grid: &outcome.grid,
        result: &outcome.result,
    };
    serde_json::to_string_pretty(&r)
        .map(|s| s + "\n")
        .map_err(|e| Error::Io(e.to_string()))
}

fn emit(cli: &Cli, cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
    let json = render_report(cfg, outcome)?;
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(format!("{}.json", outcome.name)), &json)?;
            if let Some(csv) = &outcome.csv {
                fs::write(dir.join(format!("{}.csv", outcome.name)), csv)?;
            }
        }
        None => {
            let text = match (cli.format, &outcome.csv) {
                (Format::Csv, Some(csv)) => csv.as_str(),
                _ => json.as_str(),
            };
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn missing(what: &str) -> Error {
    Error::Config {
        line: 0,
        message: format!("missing {what}"),
    }
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!("inf")
    }
}

fn norm(cfg: &RunConfig) -> Result<Outcome> {
    let grid = cfg.build_grid()?;
    let space = cfg.space()?;
    let fs = cfg.test_functions()?;
    if fs.is_empty() {
        return Err(missing("[[functions]] or [family]"));
    }
    let mut rows = Vec::new();
    let mut csv = String::from("index,amalgam,global\n");
    for (i, f) in fs.iter().enumerate() {
        let s = f.sample(&grid)?;
        let a = space.norm(&s)?;
        let g = quasi_norm(&space.global, &s)?;
        csv.push_str(&format!("{i},{a},{g}\n"));
        rows.push(json!({ "index": i, "amalgam": a, "global": g }));
    }
    Ok(Outcome {
        name: "norm".into(),
        passed: true,
        grid: Some(grid.metadata()),
        result: json!({ "values": rows }),
        csv: Some(csv),
    })
}

fn doubling(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.doubling.as_ref().ok_or_else(|| missing("[doubling]"))?;
    let n = d.n.or(cfg.group.map(|g| g.n())).unwrap_or(1);
    let probes = d.probes.clone().unwrap_or_else(|| DoublingProbes::standard(n));
    let verdict = check_doubling(&d.weight, &probes)?;
    Ok(Outcome {
        name: "doubling".into(),
        passed: verdict.is_doubling(),
        grid: None,
        result: to_value(&verdict)?,
        csv: None,
    })
}

fn equivalence(cfg: &RunConfig) -> Result<Outcome> {
    let grid = cfg.build_grid()?;
    let space = cfg.space()?;
    let eq = cfg.equivalence.as_ref().ok_or_else(|| missing("[equivalence]"))?;
    let group = grid.group();
    let x = match (&eq.lattice, eq.spacing, eq.k_range) {
        (Some(l), _, _) => build_axb_lattice(l)?,
        (None, Some(s), Some((lo, hi))) => WellSpreadSet::regular(group, s, lo, hi)?,
        _ => return Err(missing("equivalence point set (lattice, or spacing and k_range)")),
    };
    let psi = build_bupu(&x, &eq.window, &grid, eq.bupu)?;
    let fs = cfg.test_functions()?;
    if fs.is_empty() {
        return Err(missing("[[functions]] or [family]"));
    }
    let mut csv = String::from("index,continuous,discrete,ratio\n");
    let mut ratios = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        let s = f.sample(&grid)?;
        let c = space.norm(&s)?;
        let d = discrete_amalgam_norm(&s, &psi, space.local, &space.global)?;
        let r = match (c.value(), d.value()) {
            (Some(c), Some(d)) if c > 0.0 => Some(d / c),
            _ => None,
        };
        csv.push_str(&format!("{i},{c},{d},{}\n", r.map_or("".into(), |r| r.to_string())));
        ratios.push(r);
    }
    let finite: Vec<f64> = ratios.iter().flatten().copied().collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(0.0, f64::max);
    let c_star = hi.max(1.0 / lo);
    let spread = hi / lo;
    let passed = !finite.is_empty() && eq.max_spread.is_none_or(|m| spread <= m);
    let check = psi.check();
    Ok(Outcome {
        name: "equivalence".into(),
        passed,
        grid: Some(grid.metadata()),
        result: json!({
            "points": x.len(),
            "bupu_passes": check.passes(),
            "ratio_min": num(lo),
            "ratio_max": num(hi),
            "c_star": num(c_star),
            "spread": num(spread),
            "ratios": ratios,
        }),
        csv: Some(csv),
    })
}

fn convolve_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let grid = cfg.build_grid()?;
    let fs = cfg.test_functions()?;
    if fs.len() < 2 {
        return Err(missing("two functions to convolve"));
    }
    let (f, g) = (fs[0].sample(&grid)?, fs[1].sample(&grid)?);
    let c = convolve(&f, &g)?;
    let dim = grid.dim();
    let mut csv = String::new();
    for d in 0..dim {
        csv.push_str(&format!("u{},", d + 1));
    }
    csv.push_str("re,im\n");
    for (i, v) in c.function.values().iter().enumerate() {
        for p in grid.point(i) {
            csv.push_str(&format!("{p},"));
        }
        csv.push_str(&format!("{},{}\n", v.re, v.im));
    }
    Ok(Outcome {
        name: "convolve".into(),
        passed: true,
        grid: Some(grid.metadata()),
        result: json!({
            "truncation": c.truncation,
            "warning": c.warning(),
            "sup": c.function.sup_abs(),
        }),
        csv: Some(csv),
    })
}

fn embedding_csv(r: &EmbeddingReport) -> String {
    let mut s = String::from("left,right,target,product,ratio\n");
    for p in &r.pairs {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            p.left,
            p.right,
            p.target,
            p.product,
            p.ratio.map_or(String::new(), |r| r.to_string())
        ));
    }
    s
}

fn embedding_outcome(name: &str, grid: GridMetadata, r: EmbeddingReport) -> Result<Outcome> {
    Ok(Outcome {
        name: name.into(),
        passed: r.passed,
        grid: Some(grid),
        csv: Some(embedding_csv(&r)),
        result: to_value(&r)?,
    })
}

fn mixed_exponents(y: &GlobalComponent) -> Result<(f64, f64, WeightFunction)> {
    match y {
        GlobalComponent::MixedLpq { p, q, weight } => Ok((*p, *q, weight.clone())),
        GlobalComponent::WeightedLp { .. } => Err(Error::Config {
            line: 0,
            message: "the ax+b relation needs a mixed-lpq global component".into(),
        }),
    }
}

fn verify(cfg: &RunConfig, relation: Option<&str>) -> Result<Outcome> {
    let v = cfg.verify.as_ref().ok_or_else(|| missing("[verify]"))?;
    let relation = match relation {
        Some(r) => r.parse::<RelationId>()?,
        None => v.relation,
    };
    let grid = cfg.build_grid()?;
    let space = cfg.space()?;
    let left: Vec<TestFunction> = match &v.enumerate {
        Some(e) => enumerate_sequences(e.support, &e.values)
            .iter()
            .map(|s| TestFunction::sequence(s))
            .collect(),
        None => cfg.test_functions()?,
    };
    let right = match &v.right_family {
        Some(f) => cfg.seeded(f).generate(grid.group())?,
        None => left.clone(),
    };
    let refinements = cfg.refine.unwrap_or(1);
    let weight = v.weight.clone().unwrap_or_else(|| WeightFunction::constant(1.0));
    let window = &space.window;
    let mut setup = match relation {
        RelationId::CorConvLp => {
            let p = match (v.p, &space.global) {
                (Some(p), _) => p,
                (None, GlobalComponent::WeightedLp { p, .. }) => *p,
                _ => return Err(missing("verify.p")),
            };
            EmbeddingSetup::cor_conv_lp(p, weight, window)?
        }
        RelationId::ThmConvA => EmbeddingSetup::thm_conv_a(space.global.clone(), weight, window),
        RelationId::ThmConvB => EmbeddingSetup::thm_conv_b(space.global.clone(), weight, window),
        RelationId::ThmConvYvee => EmbeddingSetup::thm_conv_yvee(space.global.clone(), weight, window),
        RelationId::AxbRelation => {
            let (p, q, vw) = mixed_exponents(&space.global)?;
            let s = AxbConvolutionSetup {
                v: &vw,
                p,
                q,
                alpha: v.alpha,
                window: window.clone(),
                unweighted_right: false,
            };
            let r = verify_axb_convolution(&s, &left, &right, &grid, refinements)?;
            return embedding_outcome("verify", grid.metadata(), r);
        }
    };
    setup.expected_bound = v.expected_bound;
    setup.pairing = v.pairing;
    let r = verify_embedding(&setup, &left, &right, &grid, refinements)?;
    embedding_outcome("verify", grid.metadata(), r)
}

fn axb(cfg: &RunConfig, action: AxbAction) -> Result<Outcome> {
    let a = cfg.axb.as_ref().ok_or_else(|| missing("[axb]"))?;
    let lattice = || -> Result<WellSpreadSet> {
        build_axb_lattice(a.lattice.as_ref().ok_or_else(|| missing("axb.lattice"))?)
    };
    let n = a
        .lattice
        .as_ref()
        .map(|l| l.n)
        .or(match cfg.group {
            Some(GroupSpec::Axb(n)) => Some(n),
            _ => None,
        })
        .unwrap_or(1);
    match action {
        AxbAction::TildeV => {
            let x = lattice()?;
            let t = compute_tilde_v(&a.weight, &x)?;
            let lo = t.values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = t.values.iter().copied().fold(0.0, f64::max);
            Ok(Outcome {
                name: "axb-tilde-v".into(),
                passed: true,
                grid: None,
                csv: Some(t.to_csv(&x)),
                result: json!({ "entries": t.len(), "min": lo, "max": hi, "values": t.values }),
            })
        }
        AxbAction::DiscreteNorm => {
            let x = lattice()?;
            let t = compute_tilde_v(&a.weight, &x)?;
            let lambdas: Vec<Vec<f64>> = match &a.lambda {
                Some(l) => vec![l.clone()],
                None => {
                    let mut rng = seeded(cfg.seed.unwrap_or(0));
                    (0..a.count).map(|_| (0..x.len()).map(|_| unit(&mut rng)).collect()).collect()
                }
            };
            let values: Vec<f64> = lambdas
                .iter()
                .map(|l| lpq_discrete_norm(l, &t, a.p, a.q))
                .collect::<Result<_>>()?;
            let mut csv = String::from("index,value\n");
            for (i, v) in values.iter().enumerate() {
                csv.push_str(&format!("{i},{v}\n"));
            }
            Ok(Outcome {
                name: "axb-discrete-norm".into(),
                passed: true,
                grid: None,
                csv: Some(csv),
                result: json!({ "p": num(a.p), "q": num(a.q), "values": values }),
            })
        }
        AxbAction::TranslationBound => {
            let (y, b) = a.element.ok_or_else(|| missing("axb.element"))?;
            if !(b > 0.0) {
                return Err(Error::param("element", "dilation must be positive"));
            }
            let alpha = match a.alpha {
                Some(al) => al,
                None => check_doubling(&a.weight, &DoublingProbes::standard(n))?
                    .certificate()
                    .map(|c| c.alpha)
                    .ok_or_else(|| Error::param("weight", "weight is not doubling; give axb.alpha"))?,
            };
            let w = right_translation_bound(y, b, a.p, a.q, alpha, n);
            Ok(Outcome {
                name: "axb-translation-bound".into(),
                passed: true,
                grid: None,
                csv: None,
                result: json!({ "y": y, "b": b, "alpha": alpha, "n": n, "value": w }),
            })
        }
        AxbAction::Verify => {
            let grid = cfg.build_grid()?;
            let window = a
                .window
                .clone()
                .or_else(|| cfg.space.as_ref().map(|s| s.window.clone()))
                .ok_or_else(|| missing("axb.window"))?;
            let left = cfg.test_functions()?;
            let right = match cfg.verify.as_ref().and_then(|v| v.right_family.as_ref()) {
                Some(f) => cfg.seeded(f).generate(grid.group())?,
                None => left.clone(),
            };
            let s = AxbConvolutionSetup {
                v: &a.weight,
                p: a.p,
                q: a.q,
                alpha: a.alpha,
                window,
                unweighted_right: false,
            };
            let r = verify_axb_convolution(&s, &left, &right, &grid, cfg.refine.unwrap_or(1))?;
            embedding_outcome("axb-verify", grid.metadata(), r)
        }
    }
}

fn report(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<Outcome> {
    let mut files: Vec<PathBuf> = inputs.to_vec();
    if let Some(r) = &cfg.report {
        files.extend(r.inputs.iter().map(PathBuf::from));
    }
    if files.is_empty() {
        return Err(missing("report inputs"));
    }
    let mut csv = String::from("file,command,passed\n");
    let mut rows = Vec::new();
    let mut all = true;
    for f in &files {
        let v: Value = serde_json::from_str(&fs::read_to_string(f)?)
            .map_err(|e| Error::Io(format!("{}: {e}", f.display())))?;
        let cmd = v.get("command").and_then(Value::as_str).unwrap_or("?").to_string();
        let passed = v.get("passed").and_then(Value::as_bool).unwrap_or(false);
        all &= passed;
        let name = display(f);
        csv.push_str(&format!("{name},{cmd},{passed}\n"));
        rows.push(json!({ "file": name, "command": cmd, "passed": passed }));
    }
    Ok(Outcome {
        name: "report".into(),
        passed: all,
        grid: None,
        csv: Some(csv),
        result: json!({ "reports": rows, "all_passed": all }),
    })
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
