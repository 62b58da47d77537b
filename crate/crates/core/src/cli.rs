//! Command-line front end. Exit codes: 0 pass, 1 verification or evaluation
//! failure, 2 input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::classify::{search_admissible, Asymptotics};
use crate::curvature::{curvature_pack, weyl_split};
use crate::error::Error;
use crate::harmonic::RodData;
use crate::pd::{
    pd_ale_limit, pd_params_from_roots, pd_regularity, pd_rod_vectors, pd_scan, pd_selfdual_check, PdParams,
    ScanCase, SelfDualVerdict,
};
use crate::report::{envelope, to_json, verify, Metadata, RodFile, Status, Suite, VerifyOptions};
use crate::tod::{tod_fields, tod_metric, tod_orientation};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Worker-thread count for the parallel scans.
pub const THREADS_ENV: &str = "INSTANTON_THREADS";

#[derive(Parser, Debug)]
#[command(name = "instanton", version, about = "Toric Hermitian ALE instantons from rod data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample W, F, e^{2nu}, z and the self-dual Weyl eigenvalue on a (rho, zeta) grid as CSV.
    Build(BuildArgs),
    /// Run invariant suites and emit a JSON report.
    Verify(VerifyArgs),
    /// Enumerate admissible rod structures.
    Classify(ClassifyArgs),
    /// Plebanski-Demianski regularity checks.
    Pd {
        #[command(subcommand)]
        command: PdCommand,
    },
}

#[derive(Args, Debug)]
struct BuildArgs {
    rod_file: PathBuf,
    /// Grid size as RHOxZETA.
    #[arg(long, default_value = "20x20")]
    grid: String,
    /// rho range "lo,hi"; defaults to [0.05 s, 2 s] with s the rod scale.
    #[arg(long)]
    rho_range: Option<String>,
    /// zeta range "lo,hi"; defaults to the centre ± 2 s.
    #[arg(long)]
    zeta_range: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Fields,
    Curvature,
    Rods,
    Cky,
    All,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    rod_file: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of interior sample points.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Tolerance override NAME=VALUE; repeatable.
    #[arg(long = "tol")]
    tol: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AsymptoticsArg {
    Ale,
    Af,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long, default_value_t = 4)]
    nmax: usize,
    /// Bound on |l_j| where the pinch inequalities leave a branch open.
    #[arg(long, default_value_t = 10)]
    lmax: i64,
    #[arg(long, value_enum, default_value = "ale")]
    asymptotics: AsymptoticsArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RootArgs {
    /// Four increasing real roots "p1,p2,p3,p4" with unit product.
    #[arg(long, allow_hyphen_values = true)]
    roots: Option<String>,
    /// JSON file holding `[p1,p2,p3,p4]` or `{"roots": [...], "a0": ...}`.
    #[arg(long, conflicts_with = "roots")]
    roots_file: Option<PathBuf>,
    #[arg(long)]
    a0: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum PdCommand {
    /// Metric type, rod vectors and regularity numbers for one root set.
    Check {
        #[command(flatten)]
        roots: RootArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample root sets of a sign pattern and certify that none is regular.
    Scan {
        /// i, ii, iii, sd-a or sd-b.
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regularity of a self-dual root set.
    Selfdual {
        #[command(flatten)]
        roots: RootArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deviation from the flat cone at radius r.
    Ale {
        #[command(flatten)]
        roots: RootArgs,
        #[arg(long, default_value_t = 100.0)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        /// Constant of the asymptotic coordinate change.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// An input problem (exit 2) or an evaluation failure (exit 1).
#[derive(Debug)]
enum Failure {
    Input(String),
    Eval(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidRodData(_) | Error::InvalidRoots(_) | Error::Precondition(_) => Failure::Input(e.to_string()),
            _ => Failure::Eval(e.to_string()),
        }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Pd { command } => cmd_pd(command),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Eval(msg)) => {
            eprintln!("evaluation failed: {msg}");
            EXIT_FAIL
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // A second call in the same process (tests) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn read_input(path: &Path) -> std::result::Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_rods(path: &Path) -> std::result::Result<(RodData, Vec<u8>), Failure> {
    let bytes = read_input(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Failure::Input("rod file is not UTF-8".into()))?;
    let rods = RodFile::parse(text)?.to_rod_data()?;
    Ok((rods, bytes))
}

fn emit(text: &str, out: Option<&Path>) -> std::result::Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Eval(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_pair(s: &str, what: &str) -> std::result::Result<[f64; 2], Failure> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>()).collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::Input(format!("{what} must be \"lo,hi\"")))?;
    match v[..] {
        [lo, hi] if lo < hi && lo.is_finite() && hi.is_finite() => Ok([lo, hi]),
        _ => Err(Failure::Input(format!("{what} must be \"lo,hi\" with lo < hi"))),
    }
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), Failure> {
    let bad = || Failure::Input(format!("grid must look like 20x20, got {s:?}"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let (a, b) = (a.trim().parse::<usize>().map_err(|_| bad())?, b.trim().parse::<usize>().map_err(|_| bad())?);
    if a < 2 || b < 2 {
        return Err(bad());
    }
    Ok((a, b))
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

pub const CSV_HEADER: &str = "rho,zeta,W,F,e2nu,z,lambda";

fn grid_row(rods: &RodData, rho: f64, zeta: f64) -> crate::Result<[f64; 7]> {
    let f = tod_fields(rods, rho, zeta, 0)?;
    let pack = curvature_pack(&tod_metric(rods, rho, zeta)?)?;
    let split = weyl_split(&pack, tod_orientation(rods, rho, zeta)?);
    let lambda = split
        .lambda
        .ok_or_else(|| Error::Degenerate(format!("no simple self-dual eigenvalue at ({rho}, {zeta})")))?;
    Ok([rho, zeta, f.w.value(), f.f.value(), f.e2nu.value(), f.z.value(), lambda])
}

fn cmd_build(a: BuildArgs) -> CmdResult {
    let (nr, nz) = parse_grid(&a.grid)?;
    let (rods, _) = load_rods(&a.rod_file)?;
    let s = rods.scale();
    let [r0, r1] = match &a.rho_range {
        Some(t) => parse_pair(t, "rho range")?,
        None => [0.05 * s, 2.0 * s],
    };
    if r0 <= 0.0 {
        return Err(Failure::Input("rho range must be positive".into()));
    }
    let [z0, z1] = match &a.zeta_range {
        Some(t) => parse_pair(t, "zeta range")?,
        None => [rods.centre() - 2.0 * s, rods.centre() + 2.0 * s],
    };
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for rho in linspace(r0, r1, nr) {
        for zeta in linspace(z0, z1, nz) {
            let row = grid_row(&rods, rho, zeta).map_err(|e| Failure::Eval(e.to_string()))?;
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            let _ = writeln!(csv, "{}", cells.join(","));
        }
    }
    emit(&csv, a.out.as_deref())?;
    Ok(EXIT_PASS)
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let (rods, bytes) = load_rods(&a.rod_file)?;
    let known = crate::report::default_tolerances();
    let mut tolerances = std::collections::BTreeMap::new();
    for t in &a.tol {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("tolerance override must be NAME=VALUE, got {t:?}")))?;
        if !known.contains_key(k) {
            let names: Vec<&str> = known.keys().copied().collect();
            return Err(Failure::Input(format!("unknown tolerance {k:?}; known: {}", names.join(", "))));
        }
        let v: f64 = v.parse().map_err(|_| Failure::Input(format!("tolerance {k} is not a number")))?;
        tolerances.insert(k.to_string(), v);
    }
    let suite = match a.suite {
        SuiteArg::Fields => Suite::Fields,
        SuiteArg::Curvature => Suite::Curvature,
        SuiteArg::Rods => Suite::Rods,
        SuiteArg::Cky => Suite::Cky,
        SuiteArg::All => Suite::All,
    };
    let opt = VerifyOptions {
        samples: a.samples.max(1),
        seed: a.seed,
        tolerances,
    };
    let rep = verify(&rods, suite, &bytes, &opt);
    emit(&to_json(&rep), a.out.as_deref())?;
    Ok(if rep.passed() { EXIT_PASS } else { EXIT_FAIL })
}

fn cmd_classify(a: ClassifyArgs) -> CmdResult {
    if a.nmax < 1 {
        return Err(Failure::Input("--nmax must be at least 1".into()));
    }
    let asym = match a.asymptotics {
        AsymptoticsArg::Ale => Asymptotics::Ale,
        AsymptoticsArg::Af => Asymptotics::Af,
    };
    let rep = search_admissible(a.nmax, a.lmax, asym)?;
    let args = format!("classify nmax={} lmax={} asymptotics={:?}", a.nmax, a.lmax, asym);
    let doc = envelope("classify", Status::Pass, &rep, &Metadata::new(args.as_bytes(), 0));
    emit(&to_json(&doc), a.out.as_deref())?;
    Ok(EXIT_PASS)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RootsFile {
    Bare([f64; 4]),
    Full { roots: [f64; 4], a0: Option<f64> },
}

fn load_params(r: &RootArgs) -> std::result::Result<(PdParams, Vec<u8>), Failure> {
    let (roots, a0, bytes) = match (&r.roots, &r.roots_file) {
        (Some(s), None) => {
            let v: Vec<f64> = s
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Failure::Input(format!("cannot read roots {s:?}")))?;
            let roots: [f64; 4] = v
                .try_into()
                .map_err(|_| Failure::Input("exactly four roots are required".into()))?;
            (roots, None, s.as_bytes().to_vec())
        }
        (None, Some(p)) => {
            let bytes = read_input(p)?;
            let parsed: RootsFile = serde_json::from_slice(&bytes)
                .map_err(|e| Failure::Input(format!("malformed roots file: {e}")))?;
            match parsed {
                RootsFile::Bare(r) => (r, None, bytes),
                RootsFile::Full { roots, a0 } => (roots, a0, bytes),
            }
        }
        _ => return Err(Failure::Input("give --roots or --roots-file".into())),
    };
    let a0 = r.a0.or(a0).unwrap_or(1.0);
    Ok((pd_params_from_roots(roots, a0)?, bytes))
}

fn cmd_pd(c: PdCommand) -> CmdResult {
    match c {
        PdCommand::Check { roots, out } => {
            let (p, bytes) = load_params(&roots)?;
            let verdict = if p.is_flat() {
                "flat"
            } else if p.is_self_dual() {
                "self-dual"
            } else {
                "generic"
            };
            let regularity = pd_regularity(&p);
            let admissible = match &regularity {
                Ok(r) => {
                    p.rectangle_ok()
                        && (r.m - r.m.round()).abs() < 1e-9
                        && (r.n - r.n.round()).abs() < 1e-9
                        && (r.epsilon - 1.0).abs() < 1e-9
                        && (r.epsilon_bar - 1.0).abs() < 1e-9
                }
                Err(_) => false,
            };
            let payload = json!({
                "params": p,
                "verdict": verdict,
                "rectangle_ok": p.rectangle_ok(),
                "rods": pd_rod_vectors(&p),
                "regularity": regularity.as_ref().ok(),
                "regularity_error": regularity.as_ref().err().map(|e| e.to_string()),
                "admissible": admissible,
            });
            let doc = envelope("pd-check", Status::Pass, &payload, &Metadata::new(&bytes, 0));
            emit(&to_json(&doc), out.as_deref())?;
            Ok(EXIT_PASS)
        }
        PdCommand::Scan { case, samples, seed, out } => {
            let case = ScanCase::parse(&case)
                .ok_or_else(|| Failure::Input(format!("unknown case {case:?}; use i, ii, iii, sd-a or sd-b")))?;
            let rep = pd_scan(case, samples, seed)?;
            let ok = rep.admissible == 0 && rep.certificate_failures == 0;
            let status = if ok { Status::Pass } else { Status::Fail };
            let args = format!("pd scan case={} samples={samples}", case.label());
            let doc = envelope("pd-scan", status, &rep, &Metadata::new(args.as_bytes(), seed));
            emit(&to_json(&doc), out.as_deref())?;
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
        PdCommand::Selfdual { roots, out } => {
            let (p, bytes) = load_params(&roots)?;
            let rep = pd_selfdual_check(&p)?;
            let ok = rep.verdict != SelfDualVerdict::Regular;
            let status = if ok { Status::Pass } else { Status::Fail };
            let doc = envelope("pd-selfdual", status, &rep, &Metadata::new(&bytes, 0));
            emit(&to_json(&doc), out.as_deref())?;
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
        PdCommand::Ale { roots, r, theta, c, tol, out } => {
            let (p, bytes) = load_params(&roots)?;
            if c <= 0.0 {
                return Err(Failure::Input("--c must be positive".into()));
            }
            let rep = pd_ale_limit(&p, r, theta, c)?;
            let ok = rep.relative_deviation <= tol;
            let status = if ok { Status::Pass } else { Status::Fail };
            let payload = json!({ "limit": rep, "tolerance": tol });
            let doc = envelope("pd-ale", status, &payload, &Metadata::new(&bytes, 0));
            emit(&to_json(&doc), out.as_deref())?;
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}
