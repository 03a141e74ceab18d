//! `conebary`: reproducible experiments on the positive-definite cone.
//!
//! Exit codes: 0 when every requested certificate holds, 1 when a
//! computation ran but a certificate failed (no convergence, unbounded
//! representation, bound violated), 2 for malformed or inconsistent input.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use conebary::barycenter::{averaging_mean, barycenter_traced, BarycenterConfig};
use conebary::convex::{circumcenter_estimate, tuple_diam, PointTuple};
use conebary::folner::{Advance, FolnerSchedule, GroupKind};
use conebary::group::{
    diam_on_ball, enumerate_ball, interpolate_rep, size_on_ball, verify_on_ball, GroupRep, Word,
};
use conebary::io::{self, GroupRepJson, MatrixJson};
use conebary::solver::{
    bound_certificate, promote_finite_index, solve_amenable, solve_extension, BoundSpec,
    FixedPointReport, SolverConfig, Stage1, CERT_TOL,
};
use conebary::thompson::relative_spectrum;
use conebary::{geodesic, thompson_dist, Error, PosDefMatrix};

use output::{emit, write_csv};

#[derive(Parser, Debug)]
#[command(
    name = "conebary",
    version,
    about = "Thompson-metric geometry, barycenters and unitarisers"
)]
struct Cli {
    /// Word-ball radius used for sizes, diameters and unitariser checks.
    #[arg(long, global = true, default_value_t = 8)]
    radius: usize,
    /// Tolerance: collapse diameter for barycenters, stopping improvement
    /// for circumcenters, target residual / defect for solvers.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Maximum leave-one-out rounds per barycenter.
    #[arg(long, global = true, default_value_t = 200)]
    max_rounds: usize,
    /// Largest Følner set the schedule may reach.
    #[arg(long, global = true, default_value_t = 4096)]
    schedule_cap: usize,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
#[allow(clippy::large_enum_variant)]
enum Cmd {
    /// Thompson distance and relative spectrum of two matrices.
    Dist { x: PathBuf, y: PathBuf },
    /// Point at parameter t on the geodesic from x to y.
    Geodesic {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
    },
    /// Barycenter of a tuple with its per-round diameters.
    Barycenter {
        tuple: PathBuf,
        /// CSV of (round, tuple_diam).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Circumcenter (midpoint) estimate of a tuple.
    Circumcenter {
        tuple: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },
    /// Size |π| of a representation over a word ball.
    RepSize { rep: PathBuf },
    /// Diameter of the identity orbit over a word ball.
    RepDiam { rep: PathBuf },
    /// Solve for a fixed point and unitariser.
    Unitarise(UnitariseArgs),
    /// Check a candidate unitariser.
    Verify {
        rep: PathBuf,
        unitariser: PathBuf,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// The family π_t = s^{-t} π s^{t}.
    Interpolate {
        rep: PathBuf,
        s: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
    },
}

#[derive(clap::Args, Debug)]
struct BoundArgs {
    /// Bound constant K (C = ln K).
    #[arg(long = "k")]
    k: Option<f64>,
    /// Bound exponent α.
    #[arg(long)]
    alpha: Option<f64>,
}

impl BoundArgs {
    fn spec(&self, default: BoundSpec) -> conebary::Result<BoundSpec> {
        BoundSpec::new(
            self.k.unwrap_or(default.k),
            self.alpha.unwrap_or(default.alpha),
        )
    }
}

#[derive(clap::Args, Debug)]
struct UnitariseArgs {
    rep: PathBuf,
    /// Group kind for amenable averaging: z, z^d or finite.
    #[arg(long, default_value = "finite")]
    group: String,
    /// Generating words of a normal subgroup; selects the extension solver.
    #[arg(long, value_delimiter = ',')]
    normal: Vec<String>,
    /// Kind of the normal subgroup (stage 1).
    #[arg(long, default_value = "finite")]
    normal_group: String,
    /// Kind of the quotient (stage 2): z, z^d or finite.
    #[arg(long, default_value = "z")]
    quotient: String,
    /// Lifts of the quotient generators (z, z^d) or of all quotient
    /// elements (finite).
    #[arg(long, value_delimiter = ',')]
    lifts: Vec<String>,
    /// A point fixed by a finite-index subgroup; selects promotion.
    #[arg(long)]
    fixed: Option<PathBuf>,
    /// Generating words of that subgroup.
    #[arg(long, value_delimiter = ',')]
    subgroup: Vec<String>,
    /// Coset representatives (must include `e`).
    #[arg(long, value_delimiter = ',')]
    cosets: Vec<String>,
    /// Schedule advance: linear or doubling.
    #[arg(long, default_value = "linear")]
    advance: String,
    /// Largest accepted unitariser defect (defaults to the target residual).
    #[arg(long)]
    defect_tol: Option<f64>,
    /// CSV of (n, residual, size, distance).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    bound: BoundArgs,
}

struct Failure {
    code: u8,
    err: Error,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = exit_code(&err);
        Failure { code, err }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotUniformlyBounded { .. }
        | Error::NoConvergence { .. }
        | Error::NoCollapse { .. }
        | Error::BallTooLarge { .. } => 1,
        Error::Stage1Failed(inner) => exit_code(inner),
        _ => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NotPositive { .. } => "NotPositive",
        Error::NotSymmetric { .. } => "NotSymmetric",
        Error::Singular { .. } => "Singular",
        Error::DimMismatch { .. } => "DimMismatch",
        Error::SizeMismatch { .. } => "SizeMismatch",
        Error::IllConditioned { .. } => "IllConditioned",
        Error::TOutOfRange(_) => "TOutOfRange",
        Error::Invalid(_) => "Invalid",
        Error::NoCollapse { .. } => "NoCollapse",
        Error::NoConvergence { .. } => "NoConvergence",
        Error::BallTooLarge { .. } => "BallTooLarge",
        Error::NotUniformlyBounded { .. } => "NotUniformlyBounded",
        Error::UnsupportedGroup(_) => "UnsupportedGroup",
        Error::NotSubgroupFixed { .. } => "NotSubgroupFixed",
        Error::NormalityViolated(_) => "NormalityViolated",
        Error::Stage1Failed(_) => "Stage1Failed",
        Error::Parse { .. } | Error::Json(_) => "Parse",
        Error::Io(_) => "Io",
    }
}

/// JSON diagnosis for failed computations.
fn diagnosis(e: &Error) -> Value {
    let mut v = json!({ "error_kind": error_kind(e), "message": e.to_string() });
    match e {
        Error::NotUniformlyBounded { radius, history } => {
            v["radius"] = json!(radius);
            v["size_history"] = json!(history);
        }
        Error::NoConvergence {
            iterations,
            residual,
            history,
        } => {
            v["iterations"] = json!(iterations);
            v["residual"] = json!(residual);
            v["residual_history"] = json!(history);
        }
        Error::Stage1Failed(inner) => v["stage1"] = diagnosis(inner),
        _ => {}
    }
    v
}

fn words(tokens: &[String]) -> conebary::Result<Vec<Word>> {
    tokens.iter().map(|t| Word::parse(t)).collect()
}

fn barycenter_config(cli: &Cli) -> BarycenterConfig {
    let mut cfg = BarycenterConfig {
        max_rounds: cli.max_rounds,
        ..BarycenterConfig::default()
    };
    if let Some(t) = cli.tol {
        cfg.collapse_tol = t;
    }
    cfg
}

fn cmd_dist(cli: &Cli, x: &Path, y: &Path) -> Result<u8, Failure> {
    let x = io::read_posdef(x)?;
    let y = io::read_posdef(y)?;
    let d = thompson_dist(&x, &y)?;
    let spectrum: Vec<f64> = relative_spectrum(&x, &y)?.iter().copied().collect();
    emit(
        json!({ "distance": d, "relative_spectrum": spectrum }),
        cli.out.as_deref(),
    )?;
    Ok(0)
}

fn cmd_geodesic(cli: &Cli, x: &Path, y: &Path, t: f64) -> Result<u8, Failure> {
    let x = io::read_posdef(x)?;
    let y = io::read_posdef(y)?;
    let p = geodesic(&x, &y, t)?;
    emit(
        json!({ "t": t, "point": MatrixJson::from(&p), "length": thompson_dist(&x, &y)? }),
        cli.out.as_deref(),
    )?;
    Ok(0)
}

fn cmd_barycenter(cli: &Cli, tuple: &Path, csv: Option<&Path>) -> Result<u8, Failure> {
    let points = io::read_tuple(tuple)?;
    let tuple = PointTuple::new(points)?;
    let cfg = barycenter_config(cli);
    let recursive = tuple.len() <= cfg.recursive_limit.max(2);
    let (point, diameters) = if recursive {
        let tr = barycenter_traced(&tuple, &cfg)?;
        (tr.point, tr.diameters)
    } else {
        (averaging_mean(tuple.points(), &cfg, None)?, Vec::new())
    };

    let mut shuffled = tuple.points().to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(cli.seed));
    let again = averaging_mean(&shuffled, &cfg, None)?;
    let shuffle_residual = thompson_dist(&point, &again)?;

    if let Some(path) = csv {
        let rows = diameters
            .iter()
            .enumerate()
            .map(|(i, &d)| vec![i as f64, d]);
        write_csv(path, &["round", "tuple_diam"], rows)?;
    }
    emit(
        json!({
            "points": tuple.len(),
            "method": if recursive { "leave-one-out" } else { "karcher" },
            "point": MatrixJson::from(&point),
            "initial_diam": tuple_diam(&tuple),
            "rounds": diameters.len().saturating_sub(1),
            "diameters": diameters,
            "seed": cli.seed,
            "shuffle_residual": shuffle_residual,
        }),
        cli.out.as_deref(),
    )?;
    Ok(0)
}

fn cmd_circumcenter(cli: &Cli, tuple: &Path, max_iter: usize) -> Result<u8, Failure> {
    let tuple = PointTuple::new(io::read_tuple(tuple)?)?;
    let r = circumcenter_estimate(
        &tuple,
        max_iter,
        cli.tol.unwrap_or(conebary::convex::CIRCUM_TOL),
    )?;
    let bracket =
        r.radius_estimate >= r.diameter / 2.0 - 1e-6 && r.radius_estimate <= r.diameter + 1e-6;
    emit(
        json!({
            "radius_estimate": r.radius_estimate,
            "center_estimate": MatrixJson::from(&r.center_estimate),
            "diameter": r.diameter,
            "iterations": r.iterations,
            "residual": r.residual,
            "converged": r.converged,
            "bracket_holds": bracket,
        }),
        cli.out.as_deref(),
    )?;
    Ok(if bracket { 0 } else { 1 })
}

fn cmd_rep_size(cli: &Cli, rep: &Path) -> Result<u8, Failure> {
    let rep = io::read_rep(rep)?;
    let s = size_on_ball(&enumerate_ball(&rep, cli.radius)?);
    emit(
        json!({
            "group": rep.name,
            "size": s.value,
            "radius": s.radius_used,
            "history": s.monotone_history,
            "plateau_at": s.plateau_at,
            "uniformly_bounded": s.uniformly_bounded(),
        }),
        cli.out.as_deref(),
    )?;
    Ok(0)
}

fn cmd_rep_diam(cli: &Cli, rep: &Path) -> Result<u8, Failure> {
    let rep = io::read_rep(rep)?;
    let ball = enumerate_ball(&rep, cli.radius)?;
    let size = size_on_ball(&ball);
    emit(
        json!({
            "group": rep.name,
            "diam": diam_on_ball(&ball),
            "two_ln_size": 2.0 * size.value.ln(),
            "radius": cli.radius,
            "elements": ball.len(),
        }),
        cli.out.as_deref(),
    )?;
    Ok(0)
}

fn solver_config(cli: &Cli, advance: &str, bound: BoundSpec) -> conebary::Result<SolverConfig> {
    Ok(SolverConfig {
        radius: cli.radius,
        target: cli.tol.unwrap_or(1e-6),
        cap: cli.schedule_cap,
        advance: advance.parse::<Advance>()?,
        barycenter: BarycenterConfig {
            max_rounds: cli.max_rounds,
            ..BarycenterConfig::default()
        },
        bound,
        ..SolverConfig::default()
    })
}

fn schedule_over(kind: GroupKind, basis: Vec<Word>) -> conebary::Result<FolnerSchedule> {
    match kind {
        GroupKind::Finite => FolnerSchedule::finite(basis),
        GroupKind::Z | GroupKind::Zd(_) => {
            let d = if let GroupKind::Zd(d) = kind { d } else { 1 };
            if basis.len() != d {
                return Err(Error::Invalid(format!(
                    "{kind} needs {d} lift words, got {}",
                    basis.len()
                )));
            }
            FolnerSchedule::zd(basis)
        }
    }
}

fn solve(cli: &Cli, a: &UnitariseArgs, rep: &GroupRep) -> conebary::Result<FixedPointReport> {
    if let Some(fixed) = &a.fixed {
        let cfg = solver_config(cli, &a.advance, a.bound.spec(BoundSpec::amenable())?)?;
        let x = io::read_posdef(fixed)?;
        let cosets = if a.cosets.is_empty() {
            vec![Word::identity()]
        } else {
            words(&a.cosets)?
        };
        return promote_finite_index(rep, &words(&a.subgroup)?, &x, &cosets, &cfg);
    }
    if !a.normal.is_empty() {
        let cfg = solver_config(cli, &a.advance, a.bound.spec(BoundSpec::extension())?)?;
        let normal = words(&a.normal)?;
        let sub = rep.subgroup(format!("{}'", rep.name), &normal)?;
        let stage1 = Stage1::Schedule(FolnerSchedule::for_rep(a.normal_group.parse()?, &sub)?);
        let quotient = schedule_over(a.quotient.parse()?, words(&a.lifts)?)?;
        return solve_extension(rep, &normal, &stage1, &quotient, &cfg);
    }
    let cfg = solver_config(cli, &a.advance, a.bound.spec(BoundSpec::amenable())?)?;
    let schedule = FolnerSchedule::for_rep(a.group.parse()?, rep)?;
    solve_amenable(rep, &schedule, &PosDefMatrix::identity(rep.dim()), &cfg)
}

fn cmd_unitarise(cli: &Cli, a: &UnitariseArgs) -> Result<u8, Failure> {
    let rep = io::read_rep(&a.rep)?;
    let report = match solve(cli, a, &rep) {
        Ok(r) => r,
        Err(e) if exit_code(&e) == 1 => {
            emit(diagnosis(&e), cli.out.as_deref())?;
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    let target = cli.tol.unwrap_or(1e-6);
    let defect_tol = a.defect_tol.unwrap_or(target);
    let (holds, margin) = bound_certificate(&report, &report.bound);
    let residual_ok = report.residual <= target;
    let defect_ok = report.unitariser_defect <= defect_tol;
    let size_ok = report.size_measured <= report.size_bound * CERT_TOL.exp();

    if let Some(path) = &a.csv {
        let rows = report
            .history
            .iter()
            .map(|h| vec![h.n as f64, h.residual, h.size, h.distance]);
        write_csv(path, &["n", "residual", "size", "distance"], rows)?;
    }
    let mut v = report.to_json();
    v["certificate"] = json!({ "holds": holds, "margin": margin });
    v["checks"] = json!({
        "residual_ok": residual_ok,
        "defect_ok": defect_ok,
        "size_ok": size_ok,
        "target": target,
        "defect_tol": defect_tol,
    });
    emit(v, cli.out.as_deref())?;
    Ok(if residual_ok && defect_ok && size_ok && holds {
        0
    } else {
        1
    })
}

fn cmd_verify(cli: &Cli, rep: &Path, unitariser: &Path, bound: &BoundArgs) -> Result<u8, Failure> {
    let rep = io::read_rep(rep)?;
    let s = io::read_invertible(unitariser)?;
    if s.dim() != rep.dim() {
        return Err(Error::DimMismatch {
            expected: rep.dim(),
            found: s.dim(),
        }
        .into());
    }
    let ball = enumerate_ball(&rep, cli.radius)?;
    let check = verify_on_ball(&ball, &s);
    let spec = bound.spec(BoundSpec::amenable())?;
    let diam = diam_on_ball(&ball);
    let margin = spec.c() + spec.alpha / 2.0 * diam - check.size.ln();
    let tol = cli.tol.unwrap_or(1e-6);
    let defect_ok = check.max_defect <= tol;
    let holds = margin >= -CERT_TOL;
    emit(
        json!({
            "group": rep.name,
            "max_defect": check.max_defect,
            "size": check.size,
            "radius": check.radius,
            "diam": diam,
            "defect_ok": defect_ok,
            "certificate": { "holds": holds, "margin": margin, "K": spec.k, "alpha": spec.alpha },
        }),
        cli.out.as_deref(),
    )?;
    Ok(if defect_ok && holds { 0 } else { 1 })
}

fn cmd_interpolate(cli: &Cli, rep: &Path, s: &Path, t: f64) -> Result<u8, Failure> {
    let rep = io::read_rep(rep)?;
    let s = io::read_posdef(s)?;
    let pt = interpolate_rep(&rep, &s, t)?;
    let size = size_on_ball(&enumerate_ball(&rep, cli.radius)?).value;
    let size_t = size_on_ball(&enumerate_ball(&pt, cli.radius)?).value;
    emit(
        json!({
            "t": t,
            "rep": GroupRepJson::from_rep(&pt),
            "size": size_t,
            "original_size": size,
            "size_bound": size.powf(1.0 - t),
        }),
        cli.out.as_deref(),
    )?;
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.cmd {
        Cmd::Dist { x, y } => cmd_dist(cli, x, y),
        Cmd::Geodesic { x, y, t } => cmd_geodesic(cli, x, y, *t),
        Cmd::Barycenter { tuple, csv } => cmd_barycenter(cli, tuple, csv.as_deref()),
        Cmd::Circumcenter { tuple, max_iter } => cmd_circumcenter(cli, tuple, *max_iter),
        Cmd::RepSize { rep } => cmd_rep_size(cli, rep),
        Cmd::RepDiam { rep } => cmd_rep_diam(cli, rep),
        Cmd::Unitarise(a) => cmd_unitarise(cli, a),
        Cmd::Verify {
            rep,
            unitariser,
            bound,
        } => cmd_verify(cli, rep, unitariser, bound),
        Cmd::Interpolate { rep, s, t } => cmd_interpolate(cli, rep, s, *t),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONEBARY_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.err);
            ExitCode::from(f.code)
        }
    }
}
