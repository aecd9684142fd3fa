//! Command-line front end: loads a space file, delegates to one operation
//! and renders a text or JSON report.
//!
//! Exit codes: 0 success/pass, 1 computed but failed, 2 formula
//! inapplicable, 3 invalid input. The code is derived from the record's
//! verdict alone.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;
use serde_json::{json, Value};

use crate::curvature::{self, RicciBackend};
use crate::error::Error;
use crate::rigidity;
use crate::space::{self, LoadedSpace};

#[derive(Debug, Parser)]
#[command(name = "homfinsler", version, about = "Curvature and rigidity checks for homogeneous Finsler spaces")]
pub struct Cli {
    /// Emit a single JSON object instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Relative tolerance for all zero tests.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of sampled directions for scans.
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SpaceArg {
    /// Space definition file (JSON).
    pub space: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Go,
    Riemannian,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate a space file.
    Validate(SpaceArg),
    /// Decide whether the solvable group admits a negatively curved metric.
    Classify(SpaceArg),
    /// Flag curvature of a commuting flag.
    Flag {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
    },
    /// Riemannian sectional curvature (Levi-Civita oracle).
    Sectional {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Ricci scalar at a vector.
    Ricci {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, value_enum, default_value = "riemannian")]
        backend: BackendArg,
    },
    /// Sampled geodesic-orbit check.
    GoCheck(SpaceArg),
    /// Positivity-to-spectrum consistency and abelian-ideal flag scans.
    Scan(SpaceArg),
    /// validate, classify, go-check and scan in one run.
    All(SpaceArg),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Classify(_) => "classify",
            Command::Flag { .. } => "flag",
            Command::Sectional { .. } => "sectional",
            Command::Ricci { .. } => "ricci",
            Command::GoCheck(_) => "go-check",
            Command::Scan(_) => "scan",
            Command::All(_) => "all",
        }
    }

    fn space_path(&self) -> &Path {
        match self {
            Command::Validate(s)
            | Command::Classify(s)
            | Command::GoCheck(s)
            | Command::Scan(s)
            | Command::All(s) => &s.space,
            Command::Flag { space, .. }
            | Command::Sectional { space, .. }
            | Command::Ricci { space, .. } => &space.space,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inapplicable,
    Invalid,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inapplicable => 2,
            Verdict::Invalid => 3,
        }
    }
}

/// The full outcome of one command.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub command: String,
    pub space: String,
    pub verdict: Verdict,
    pub value: Option<f64>,
    pub residuals: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub result: Value,
    pub error: Option<String>,
    #[serde(skip)]
    pub text: String,
}

impl Record {
    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    space_name: String,
}

impl Ctx<'_> {
    fn record(&self, command: &str, verdict: Verdict, text: String) -> Record {
        Record {
            command: command.to_string(),
            space: self.space_name.clone(),
            verdict,
            value: None,
            residuals: BTreeMap::new(),
            tolerances: [("tol".to_string(), self.cli.tol)].into_iter().collect(),
            seed: self.cli.seed,
            result: Value::Null,
            error: None,
            text,
        }
    }

    fn error_record(&self, command: &str, err: &Error) -> Record {
        let verdict = if err.is_inapplicable() {
            Verdict::Inapplicable
        } else {
            Verdict::Invalid
        };
        let prefix = match verdict {
            Verdict::Inapplicable => "inapplicable",
            _ => "invalid input",
        };
        let mut r = self.record(command, verdict, format!("{prefix}: {err}"));
        r.error = Some(err.to_string());
        match err {
            Error::AnchorCondition { residual } => {
                r.residuals.insert("anchor".into(), *residual);
            }
            Error::NotCommuting { residual } => {
                r.residuals.insert("commutator".into(), *residual);
            }
            Error::LinearlyDependent { relative_det } => {
                r.residuals.insert("relative_gram_det".into(), *relative_det);
            }
            Error::InvalidSpace(list) => {
                r.result = json!({ "violations": list });
                r.text = format!("invalid input:\n  - {}", list.join("\n  - "));
            }
            _ => {}
        }
        r
    }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(", "))
}

/// Parses comma-separated g-coordinates and checks membership in m.
fn parse_m_vector(space: &LoadedSpace, text: &str, flag: &str, tol: f64) -> Result<DVector<f64>, Error> {
    let coords: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let coords = coords.map_err(|e| Error::Parse(format!("--{flag} {text:?}: {e}")))?;
    let dim = space.algebra().dim();
    if coords.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: coords.len(),
        });
    }
    space
        .decomposition
        .m_part_checked(&DVector::from_vec(coords), tol)
}

pub fn run(cli: &Cli) -> Record {
    let path = cli.command.space_path();
    let ctx = Ctx {
        cli,
        space_name: path.display().to_string(),
    };
    let command = cli.command.name();
    let space = match space::load_space(path, cli.tol) {
        Ok(s) => s,
        Err(e) => return ctx.error_record(command, &e),
    };
    let ctx = Ctx {
        cli,
        space_name: space.definition.name.clone(),
    };
    match &cli.command {
        Command::Validate(_) => validate(&ctx, &space),
        Command::Classify(_) => classify(&ctx, &space),
        Command::Flag { u, v, .. } => flag(&ctx, &space, u, v),
        Command::Sectional { x, y, .. } => sectional(&ctx, &space, x, y),
        Command::Ricci { y, backend, .. } => ricci(&ctx, &space, y, *backend),
        Command::GoCheck(_) => go_check(&ctx, &space),
        Command::Scan(_) => scan(&ctx, &space),
        Command::All(_) => all(&ctx, &space),
    }
}

fn validate(ctx: &Ctx, space: &LoadedSpace) -> Record {
    let alg = space.algebra();
    let d = &space.decomposition;
    let text = format!(
        "{}: valid (dim g = {}, dim h = {}, dim m = {}, norm {}, Jacobi residual {:e})",
        space.definition.name,
        alg.dim(),
        d.h_dim(),
        d.m_dim(),
        space.norm.family().as_str(),
        space.jacobi_residual
    );
    let mut r = ctx.record("validate", Verdict::Pass, text);
    r.residuals.insert("jacobi".into(), space.jacobi_residual);
    r.result = json!({
        "dim": alg.dim(),
        "h": space.definition.h,
        "m": space.definition.m,
        "norm_family": space.norm.family(),
        "admissibility": to_value(&space.admissibility),
    });
    r
}

fn classify(ctx: &Ctx, space: &LoadedSpace) -> Record {
    let v = rigidity::classify_solvable_negative(space.algebra(), ctx.cli.tol);
    let mut text = format!("{}: {}", space.definition.name, v.summary());
    if let Some(s) = &v.spectrum {
        let ev: Vec<String> = s
            .eigenvalues
            .iter()
            .map(|z| {
                if z.im.abs() < 1e-12 {
                    format!("{:.6}", z.re)
                } else {
                    format!("{:.6}{:+.6}i", z.re, z.im)
                }
            })
            .collect();
        text.push_str(&format!("\n  spectrum of ad(u')|[g,g]: {{{}}}", ev.join(", ")));
        if v.borderline {
            text.push_str("\n  note: eigenvalue within tolerance of the imaginary axis (borderline)");
        }
    }
    let verdict = if v.admits_negative_metric {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let mut r = ctx.record("classify", verdict, text);
    r.result = to_value(&v);
    r
}

fn flag(ctx: &Ctx, space: &LoadedSpace, u: &str, v: &str) -> Record {
    let tol = ctx.cli.tol;
    let parsed = parse_m_vector(space, u, "u", tol).and_then(|u| Ok((u, parse_m_vector(space, v, "v", tol)?)));
    let (u, v) = match parsed {
        Ok(p) => p,
        Err(e) => return ctx.error_record("flag", &e),
    };
    match curvature::flag_curvature_go(&space.decomposition, &space.norm, &u, &v, tol) {
        Ok(f) => {
            let text = format!(
                "K = {}\n  U(u,v) = {}\n  numerator {:e}, denominator {:e}",
                f.curvature,
                fmt_vec(f.u_vector.as_slice()),
                f.numerator,
                f.denominator
            );
            let mut r = ctx.record("flag", Verdict::Pass, text);
            r.value = Some(f.curvature);
            r.residuals.insert("anchor".into(), f.anchor_residual);
            r.residuals.insert("commutator".into(), f.commutator_residual);
            r.result = to_value(&f);
            r
        }
        Err(e) => ctx.error_record("flag", &e),
    }
}

fn sectional(ctx: &Ctx, space: &LoadedSpace, x: &str, y: &str) -> Record {
    let tol = ctx.cli.tol;
    let parsed = parse_m_vector(space, x, "x", tol).and_then(|x| Ok((x, parse_m_vector(space, y, "y", tol)?)));
    let (x, y) = match parsed {
        Ok(p) => p,
        Err(e) => return ctx.error_record("sectional", &e),
    };
    match curvature::riemannian_sectional(&space.decomposition, &space.norm, &x, &y, tol) {
        Ok(k) => {
            let mut r = ctx.record("sectional", Verdict::Pass, format!("K = {k}"));
            r.value = Some(k);
            r.result = json!({ "x": x.as_slice(), "y": y.as_slice(), "curvature": k });
            r
        }
        Err(e) => ctx.error_record("sectional", &e),
    }
}

fn ricci(ctx: &Ctx, space: &LoadedSpace, y: &str, backend: BackendArg) -> Record {
    let tol = ctx.cli.tol;
    let y = match parse_m_vector(space, y, "y", tol) {
        Ok(y) => y,
        Err(e) => return ctx.error_record("ricci", &e),
    };
    let backend = match backend {
        BackendArg::Go => RicciBackend::GoFormula,
        BackendArg::Riemannian => RicciBackend::Riemannian,
    };
    match curvature::ricci_scalar(&space.decomposition, &space.norm, &y, backend, tol) {
        Ok(res) => {
            let mut text = format!("Ric = {}", res.value);
            if !res.is_complete() {
                text.push_str(&format!(
                    "\n  partial: {} of {} flags covered by the commuting-flag formula",
                    res.covered,
                    res.covered + res.uncovered
                ));
            }
            let mut r = ctx.record("ricci", Verdict::Pass, text);
            r.value = Some(res.value);
            r.result = to_value(&res);
            r
        }
        Err(e) => ctx.error_record("ricci", &e),
    }
}

fn go_check(ctx: &Ctx, space: &LoadedSpace) -> Record {
    let cli = ctx.cli;
    match curvature::is_geodesic_orbit(&space.decomposition, &space.norm, cli.samples, cli.seed, cli.tol) {
        Ok(rep) => {
            let verdict = if rep.passed { Verdict::Pass } else { Verdict::Fail };
            let mut text = format!(
                "{}: geodesic-orbit check {} on {} directions (max residual {:e})",
                space.definition.name,
                if rep.passed { "passes" } else { "FAILS" },
                rep.sample_count,
                rep.max_residual
            );
            if let (false, Some(w)) = (rep.passed, &rep.worst_direction) {
                text.push_str(&format!(
                    "\n  worst direction (m-coordinates) {}; {} failing directions",
                    fmt_vec(w),
                    rep.failures.len()
                ));
            }
            let mut r = ctx.record("go-check", verdict, text);
            r.value = Some(rep.max_residual);
            r.residuals.insert("max".into(), rep.max_residual);
            r.result = to_value(&rep);
            r
        }
        Err(e) => ctx.error_record("go-check", &e),
    }
}

/// Curvature values below this count as negative in scan verdicts.
const NEGATIVITY_SLACK: f64 = 1e-12;

fn scan(ctx: &Ctx, space: &LoadedSpace) -> Record {
    let cli = ctx.cli;
    let d = &space.decomposition;
    let mut lines = Vec::new();
    let mut result = serde_json::Map::new();
    let mut any_applicable = false;
    let mut failed = false;

    match rigidity::positivity_implies_spectrum(d, &space.norm, cli.samples, cli.seed, cli.tol) {
        Ok(rep) => {
            any_applicable = true;
            failed |= !rep.consistent;
            lines.push(format!(
                "positivity scan: {} (min {:e} for +u', {:e} for -u'); classifier {}; {}",
                match rep.passing_orientation {
                    Some(1) => "passes for +u'",
                    Some(_) => "passes for -u'",
                    None => "fails for both orientations",
                },
                rep.scan_plus.min_value,
                rep.scan_minus.min_value,
                if rep.verdict.admits_negative_metric { "admits" } else { "rejects" },
                if rep.consistent { "consistent" } else { "COUNTEREXAMPLE" }
            ));
            result.insert("implication".into(), to_value(&rep));
        }
        Err(e) if e.is_inapplicable() || matches!(e, Error::NotInSubspace { .. }) => {
            lines.push(format!("positivity scan: not applicable ({e})"));
        }
        Err(e) => return ctx.error_record("scan", &e),
    }

    let ideal = match d.algebra().find_abelian_ideal(cli.tol) {
        Ok(i) => i,
        Err(e) => return ctx.error_record("scan", &e),
    };
    match ideal {
        None => lines.push("abelian ideal scan: no abelian ideal (semisimple)".into()),
        Some(ideal) => match rigidity::abelian_ideal_flag_scan(d, &space.norm, &ideal, cli.samples, cli.seed, cli.tol) {
            Ok(rep) => {
                any_applicable = true;
                if let Some(k) = rep.min_curvature {
                    failed |= k < -NEGATIVITY_SLACK;
                    lines.push(format!(
                        "abelian ideal scan: {} applicable flags, {} skipped, min K = {k}",
                        rep.applicable, rep.skipped
                    ));
                } else {
                    lines.push(format!(
                        "abelian ideal scan: no applicable flags ({} skipped)",
                        rep.skipped
                    ));
                }
                result.insert("ideal_scan".into(), to_value(&rep));
            }
            Err(e) => lines.push(format!("abelian ideal scan: not applicable ({e})")),
        },
    }

    let verdict = if failed {
        Verdict::Fail
    } else if any_applicable {
        Verdict::Pass
    } else {
        Verdict::Inapplicable
    };
    let mut r = ctx.record("scan", verdict, format!("{}:\n  {}", space.definition.name, lines.join("\n  ")));
    r.result = Value::Object(result);
    r
}

fn all(ctx: &Ctx, space: &LoadedSpace) -> Record {
    let parts = [
        validate(ctx, space),
        classify(ctx, space),
        go_check(ctx, space),
        scan(ctx, space),
    ];
    let verdicts: Vec<Verdict> = parts.iter().map(|p| p.verdict).collect();
    // classify only informs; a group that admits no negative metric is not an error
    let gating = [verdicts[0], verdicts[2], verdicts[3]];
    let verdict = if gating.iter().all(|v| *v == Verdict::Pass) {
        Verdict::Pass
    } else if gating.contains(&Verdict::Invalid) {
        Verdict::Invalid
    } else if gating.contains(&Verdict::Fail) {
        Verdict::Fail
    } else {
        Verdict::Inapplicable
    };
    let text = parts.iter().map(|p| p.text.as_str()).collect::<Vec<_>>().join("\n");
    let mut r = ctx.record("all", verdict, text);
    r.result = Value::Object(
        parts
            .iter()
            .map(|p| (p.command.clone(), to_value(p)))
            .collect(),
    );
    r
}

/// Renders the record for standard output.
pub fn render(record: &Record, json: bool, color: bool) -> String {
    if json {
        return serde_json::to_string_pretty(record).expect("records serialize");
    }
    if !color {
        return record.text.clone();
    }
    let (code, tag) = match record.verdict {
        Verdict::Pass => ("32", "ok"),
        Verdict::Fail => ("31", "fail"),
        Verdict::Inapplicable => ("33", "inapplicable"),
        Verdict::Invalid => ("31", "invalid"),
    };
    format!("\x1b[{code}m[{tag}]\x1b[0m {}", record.text)
}
