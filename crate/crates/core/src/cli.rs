//! Command-line front end: `analyze`, `squarefn`, `dilate` and `gallery {car, foguel, itheta}`.
//!
//! Every command prints its JSON report on stdout and, with `--out DIR`, also writes the
//! report and its CSV tables into `DIR`. Exit codes: 0 success, 2 input error, 3 numerical
//! non-convergence (results are still written).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dilation::{build_dilation, dilation_report};
use crate::error::{Error, Result};
use crate::gallery::{
    car_identity, car_l1_norms, foguel_operator, foguel_polybound, itheta_table_csv, phi_m_norms, phi_table_csv,
    random_alpha, resolvent_multiplier_bounds, w_lower_bound, ConditionalBasis,
};
use crate::lpcore::{matrix_from_json_str, ComplexMatrix, LpOperator, NormBudget, C64};
use crate::ritt::{analyze, RittConfig};
use crate::squarefn::{equivalence_experiment, square_fn, EquivalenceReport, EquivalenceRow, SquareFnConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Seed used when neither `--seed` nor `RITTLAB_SEED` is given.
pub const DEFAULT_SEED: u64 = 0;

/// Tolerance names accepted by `--tol.<name>`.
pub const TOLERANCE_NAMES: [&str; 4] = ["dilation", "gamma", "norm", "squarefn"];

#[derive(Debug, Parser)]
#[command(name = "rittlab", version, about = "Ritt operator experiments on finite-dimensional l^p spaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Named tolerance, written `--tol.<name> VALUE` or `--tol.<name>=VALUE`.
    #[arg(long = "tol", value_name = "NAME=VALUE", global = true, value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,
    #[arg(long = "nmax", global = true)]
    pub n_max: Option<usize>,
    #[arg(long = "trials", global = true)]
    pub trials: Option<usize>,
    /// Circulant size for shift norms.
    #[arg(long = "N", global = true)]
    pub circulant: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ritt and R-Ritt diagnostics of a matrix.
    Analyze {
        matrix: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Square-function equivalence ratios.
    Squarefn {
        matrix: PathBuf,
        /// JSON vector `[[re, im], ...]`.
        #[arg(long, conflicts_with = "random")]
        x: Option<PathBuf>,
        /// Number of random vectors drawn off the kernel of `I − T`.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Loose dilation through a ring shift, with residuals.
    Dilate {
        matrix: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long = "K", default_value_t = 256)]
        k: usize,
        #[arg(long = "M", default_value_t = 8)]
        m: usize,
        /// Ring length; defaults to `K + 2M`.
        #[arg(long = "L")]
        l: Option<usize>,
    },
    #[command(subcommand)]
    Gallery(GalleryCommand),
}

#[derive(Debug, Subcommand)]
pub enum GalleryCommand {
    /// CAR identities, the `w` pairing and `φ_m` norms.
    Car {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 4.0)]
        p: f64,
    },
    /// `diag(1 − 2^{−k})` in a conditional basis, with polynomial-boundedness ratios.
    Foguel {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        strength: f64,
        #[arg(long, default_value_t = 2)]
        bands: usize,
        #[arg(long, default_value_t = 6)]
        fejer: usize,
    },
    /// Resolvent multiplier bounds `I(θ)`; a 50-point grid unless `--theta` is given.
    Itheta {
        #[arg(long)]
        theta: Option<f64>,
    },
}

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s}"))?;
    if !TOLERANCE_NAMES.contains(&name) {
        return Err(format!("unknown tolerance {name}; known: {}", TOLERANCE_NAMES.join(", ")));
    }
    let v: f64 = value.parse().map_err(|e| format!("{value}: {e}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("tolerance {name} must be positive"));
    }
    Ok((name.to_string(), v))
}

/// Rewrites `--tol.<name> V` and `--tol.<name>=V` into `--tol <name>=V`, placed right after
/// the program name so that occurrences on both sides of the subcommand accumulate.
pub fn preprocess_args<I: IntoIterator<Item = String>>(args: I) -> Vec<String> {
    let mut rest = Vec::new();
    let mut tols = Vec::new();
    let mut iter = args.into_iter();
    let program = iter.next();
    while let Some(a) = iter.next() {
        match a.strip_prefix("--tol.") {
            Some(spec) => {
                tols.push("--tol".to_string());
                match spec.split_once('=') {
                    Some(_) => tols.push(spec.to_string()),
                    None => tols.push(format!("{spec}={}", iter.next().unwrap_or_default())),
                }
            }
            None => rest.push(a),
        }
    }
    program.into_iter().chain(tols).chain(rest).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub n_max: usize,
    pub trials: usize,
    pub n: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(g: &GlobalArgs, env_seed: Option<&str>) -> Result<Self> {
        let seed = match (g.seed, env_seed) {
            (Some(s), _) => s,
            (None, Some(s)) => {
                s.trim().parse().map_err(|_| Error::Input(format!("RITTLAB_SEED={s} is not an integer")))?
            }
            (None, None) => DEFAULT_SEED,
        };
        let mut tolerances: BTreeMap<String, f64> =
            [("dilation", 1e-6), ("gamma", 1e-9), ("norm", 1e-12), ("squarefn", 1e-13)]
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect();
        for (k, v) in &g.tol {
            tolerances.insert(k.clone(), *v);
        }
        let cfg = RunConfig {
            seed,
            tolerances,
            n_max: g.n_max.unwrap_or(256),
            trials: g.trials.unwrap_or(100),
            n: g.circulant,
            out: g.out.clone(),
        };
        if cfg.n_max == 0 || cfg.trials == 0 || cfg.n == Some(0) {
            return Err(Error::Input("scan parameters must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn budget(&self) -> NormBudget {
        NormBudget { tol: self.tol("norm"), ..NormBudget::default() }
    }

    pub fn ritt_config(&self) -> RittConfig {
        RittConfig { n_max: self.n_max, gamma_tol: self.tol("gamma"), budget: self.budget(), ..RittConfig::default() }
    }

    pub fn squarefn_config(&self) -> SquareFnConfig {
        SquareFnConfig { tol: self.tol("squarefn"), ..SquareFnConfig::default() }
    }
}

/// Files produced by a command, in write order.
#[derive(Debug, Default)]
pub struct Output {
    pub files: Vec<(String, String)>,
    pub converged: bool,
}

impl Output {
    fn json<T: Serialize>(name: &str, value: &T) -> Result<Self> {
        let mut o = Output { files: Vec::new(), converged: true };
        o.push_json(name, value)?;
        Ok(o)
    }

    fn push_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.files.push((name.to_string(), s));
        Ok(())
    }

    fn push_csv(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body));
    }

    fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    matrix_from_json_str(&s).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn read_vector(path: &Path) -> Result<Vec<C64>> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let raw: Vec<[f64; 2]> = serde_json::from_str(&s).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    Ok(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect())
}

fn operator(path: &Path, p: f64) -> Result<LpOperator> {
    LpOperator::new(read_matrix(path)?, p).map_err(|e| Error::Input(e.to_string()))
}

#[derive(Serialize)]
struct SquarefnSummary {
    alpha: f64,
    beta: f64,
    p: f64,
    rows: usize,
    excluded: Vec<usize>,
    c_min: Option<f64>,
    c_max: Option<f64>,
    spread: Option<f64>,
}

fn cmd_squarefn(
    cfg: &RunConfig,
    matrix: &Path,
    x: Option<&Path>,
    random: Option<usize>,
    (alpha, beta, p): (f64, f64, f64),
) -> Result<Output> {
    let t = operator(matrix, p)?;
    let sc = cfg.squarefn_config();
    let report = match x {
        Some(path) => {
            let x = read_vector(path)?;
            let a = square_fn(t.matrix(), &x, alpha, p, &sc)?;
            let b = square_fn(t.matrix(), &x, beta, p, &sc)?;
            let ok = a.converged && b.converged && a.value > sc.floor && b.value > sc.floor;
            let rows = if ok {
                vec![EquivalenceRow { trial: 0, value_alpha: a.value, value_beta: b.value, ratio: a.value / b.value }]
            } else {
                vec![]
            };
            let (c_min, c_max) = rows.first().map(|r| (r.ratio, r.ratio)).unwrap_or((f64::INFINITY, f64::NEG_INFINITY));
            EquivalenceReport { alpha, beta, p, rows, c_min, c_max, excluded: if ok { vec![] } else { vec![0] } }
        }
        None => equivalence_experiment(t.matrix(), alpha, beta, p, random.unwrap_or(cfg.trials), cfg.seed, &sc)?,
    };
    let has_rows = !report.rows.is_empty();
    let summary = SquarefnSummary {
        alpha,
        beta,
        p,
        rows: report.rows.len(),
        excluded: report.excluded.clone(),
        c_min: has_rows.then_some(report.c_min),
        c_max: has_rows.then_some(report.c_max),
        spread: has_rows.then(|| report.spread()),
    };
    let mut out = Output::json("squarefn.json", &summary)?;
    out.push_csv("squarefn.csv", report.to_csv());
    Ok(out)
}

fn cmd_dilate(cfg: &RunConfig, matrix: &Path, p: f64, k: usize, m: usize, l: Option<usize>) -> Result<Output> {
    let t = operator(matrix, p)?;
    let bundle = build_dilation(&t, k, m, l.unwrap_or(k + 2 * m))?;
    let report = dilation_report(&bundle, cfg.tol("dilation"), &cfg.budget(), cfg.seed)?;
    let mut out = Output::json("dilation.json", &report)?;
    let mut csv = String::from("m,residual\n");
    for (mm, r) in report.residuals.iter().enumerate() {
        let _ = writeln!(csv, "{mm},{r:e}");
    }
    out.push_csv("residuals.csv", csv);
    out.converged = report.verified;
    Ok(out)
}

#[derive(Serialize)]
struct CarReport {
    m: usize,
    p: f64,
    identity: Vec<crate::gallery::CarIdentityReport>,
    l1: crate::gallery::CarL1Report,
    w: crate::gallery::WLowerBound,
    phi: Option<crate::gallery::PhiNorms>,
}

fn cmd_car(cfg: &RunConfig, m: usize, p: f64) -> Result<Output> {
    let budget = cfg.budget();
    let identity = (0..cfg.trials.min(100))
        .map(|s| car_identity(m, &random_alpha(m, cfg.seed, s as u64)))
        .collect::<Result<Vec<_>>>()?;
    let l1 = car_l1_norms(m, 10, cfg.seed)?;
    let w = w_lower_bound(m, p, (m <= 3).then_some((&budget, cfg.seed)))?;
    let phi = if m <= 4 { Some(phi_m_norms(m, p, cfg.n.unwrap_or(4 << m), &budget, cfg.seed)?) } else { None };
    let converged = identity.iter().all(|r| r.holds) && l1.holds && w.pairing == w.expected_pairing;
    let table = phi.iter().cloned().collect::<Vec<_>>();
    let mut out = Output::json("car.json", &CarReport { m, p, identity, l1, w, phi })?;
    out.push_csv("phi.csv", phi_table_csv(&table));
    out.converged = converged;
    Ok(out)
}

#[derive(Serialize)]
struct FoguelCliReport {
    n: usize,
    basis: ConditionalBasis,
    foguel: crate::gallery::FoguelOperator,
    polybound: crate::multiplier::PolyboundReport,
}

fn cmd_foguel(cfg: &RunConfig, n: usize, p: f64, basis: ConditionalBasis, fejer: usize) -> Result<Output> {
    let b = basis.matrix(n);
    let foguel = foguel_operator(&b, p, &cfg.ritt_config(), cfg.seed)?;
    let polybound = foguel_polybound(&foguel, fejer, cfg.n.unwrap_or(64), &cfg.budget(), cfg.seed)?;
    let mut csv = String::from("index,degree,op_norm,shift_norm,ratio\n");
    for r in &polybound.rows {
        let _ = writeln!(csv, "{},{},{:e},{:e},{:e}", r.index, r.degree, r.op_norm, r.shift_norm, r.ratio);
    }
    let mut out = Output::json("foguel.json", &FoguelCliReport { n, basis, foguel, polybound })?;
    out.push_csv("polybound.csv", csv);
    Ok(out)
}

fn cmd_itheta(theta: Option<f64>) -> Result<Output> {
    let thetas: Vec<f64> = match theta {
        Some(t) => vec![t],
        None => (0..50).map(|k| PI / 50.0 + (48.0 * PI / 50.0) * k as f64 / 49.0).collect(),
    };
    let rows = thetas
        .iter()
        .map(|&t| resolvent_multiplier_bounds(t).map_err(|e| Error::Input(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Output::json("itheta.json", &rows)?;
    out.push_csv("itheta.csv", itheta_table_csv(&rows));
    out.converged = rows.iter().all(|r| r.holds);
    Ok(out)
}

/// Runs a parsed command and returns its outputs.
pub fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Output> {
    match &cli.command {
        Command::Analyze { matrix, p } => {
            let t = operator(matrix, *p)?;
            let report = analyze(&t, &cfg.ritt_config(), cfg.seed)?;
            let mut out = Output::json("analyze.json", &report)?;
            out.converged = report.power_stabilized;
            Ok(out)
        }
        Command::Squarefn { matrix, x, random, alpha, beta, p } => {
            cmd_squarefn(cfg, matrix, x.as_deref(), *random, (*alpha, *beta, *p))
        }
        Command::Dilate { matrix, p, k, m, l } => cmd_dilate(cfg, matrix, *p, *k, *m, *l),
        Command::Gallery(GalleryCommand::Car { m, p }) => cmd_car(cfg, *m, *p),
        Command::Gallery(GalleryCommand::Foguel { n, p, strength, bands, fejer }) => {
            cmd_foguel(cfg, *n, *p, ConditionalBasis { strength: *strength, bands: *bands }, *fejer)
        }
        Command::Gallery(GalleryCommand::Itheta { theta }) => cmd_itheta(*theta),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence(_) | Error::IllConditioned(_) | Error::Singular { .. } => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

/// Entry point taking the full argument list (program name first).
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(preprocess_args(args)) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let env_seed = std::env::var("RITTLAB_SEED").ok();
    let cfg = match RunConfig::from_args(&cli.global, env_seed.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let out = match execute(&cli, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Some(dir) = &cfg.out {
        if let Err(e) = out.write(dir) {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    }
    if let Some((_, body)) = out.files.first() {
        print!("{body}");
    }
    if out.converged {
        EXIT_OK
    } else {
        eprintln!("warning: numerical checks did not converge or did not pass");
        EXIT_NUMERICAL
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn tolerance_flags_are_rewritten() {
        let a = preprocess_args(args("rittlab --tol.norm 1e-9 analyze m.json --tol.gamma=1e-7"));
        assert_eq!(a, args("rittlab --tol norm=1e-9 --tol gamma=1e-7 analyze m.json"));
        let cli = Cli::try_parse_from(a).unwrap();
        let cfg = RunConfig::from_args(&cli.global, None).unwrap();
        assert_eq!(cfg.tol("norm"), 1e-9);
        assert_eq!(cfg.tol("gamma"), 1e-7);
        assert!(Cli::try_parse_from(preprocess_args(args("rittlab --tol.bogus 1 analyze m.json"))).is_err());
        assert!(Cli::try_parse_from(preprocess_args(args("rittlab --tol.norm -1 analyze m.json"))).is_err());
    }

    #[test]
    fn seed_falls_back_to_environment() {
        let cli = Cli::try_parse_from(args("rittlab gallery itheta")).unwrap();
        assert_eq!(RunConfig::from_args(&cli.global, Some("17")).unwrap().seed, 17);
        assert_eq!(RunConfig::from_args(&cli.global, None).unwrap().seed, DEFAULT_SEED);
        assert!(RunConfig::from_args(&cli.global, Some("x")).is_err());
        let cli = Cli::try_parse_from(args("rittlab --seed 5 gallery itheta")).unwrap();
        assert_eq!(RunConfig::from_args(&cli.global, Some("17")).unwrap().seed, 5);
        let cli = Cli::try_parse_from(args("rittlab --trials 0 gallery itheta")).unwrap();
        assert!(RunConfig::from_args(&cli.global, None).is_err());
    }

    #[test]
    fn missing_and_malformed_inputs_exit_2() {
        assert_eq!(run(args("rittlab analyze /nonexistent.json")), EXIT_INPUT);
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, "{\"rows\": 2, \"cols\": 2, \"data\": [[1, 0]]}").unwrap();
        assert_eq!(run(vec!["rittlab".into(), "analyze".into(), bad.display().to_string()]), EXIT_INPUT);
        assert_eq!(run(args("rittlab frobnicate")), EXIT_INPUT);
        assert_eq!(run(args("rittlab gallery itheta --theta 4")), EXIT_INPUT);
    }
}
