//! Command-line frontend: certify parameters, track braids, verify the
//! iterated-monodromy recurrence, and generate parameters by cycle type.

use std::fs;
use std::process::exit;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use skewbraid::braid::{self, BraidError};
use skewbraid::escape::{admissibility_certificate, EscapeConfig};
use skewbraid::factory::{self, CycleSpec, FactoryError};
use skewbraid::julia::{self, Code, Perm};
use skewbraid::monodromy::{self, MonodromyError};
use skewbraid::skewparam::{self, SkewParam};

const SCHEMA: &str = "skewbraid/1";

#[derive(Parser)]
#[command(name = "skewbraid", version, about = "braids of regular polynomial skew-products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ParamSource {
    /// JSON parameter file ({"d": …, "a": [[[re,im],…],…]})
    #[arg(long, conflicts_with = "preset")]
    params: Option<String>,
    /// Named preset (see `factory --list`)
    #[arg(long)]
    preset: Option<String>,
    /// Rescale the parameter: a number, or "auto" for the smallest
    /// power-of-two scale passing the admissibility certificate
    #[arg(long)]
    scale: Option<String>,
}

#[derive(Args)]
struct EscapeArgs {
    /// Escape-radius exponent α ∈ (1, d)
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    /// Circle samples for the critical-value sweep
    #[arg(long, default_value_t = 256)]
    grid: usize,
    /// Safety margin on the certified critical-value bound
    #[arg(long, default_value_t = 1.25)]
    margin: f64,
}

#[derive(Args)]
struct TrackArgs {
    /// Base time steps around the circle
    #[arg(long, default_value_t = 1024)]
    steps: usize,
    /// Corrector tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Full report: certificate, monodromy, braid invariants, model check
    Analyze {
        #[command(flatten)]
        source: ParamSource,
        #[command(flatten)]
        escape: EscapeArgs,
        #[command(flatten)]
        track: TrackArgs,
        /// Write the JSON report here instead of stdout
        #[arg(long)]
        out: Option<String>,
    },
    /// Track the strand geometry and print the braid word and invariants
    Braid {
        #[command(flatten)]
        source: ParamSource,
        #[command(flatten)]
        escape: EscapeArgs,
        #[command(flatten)]
        track: TrackArgs,
        /// Composition level to track (strand count d^level)
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Loops around the base circle
        #[arg(long, default_value_t = 1)]
        turns: i64,
        /// Projection angle for reading crossings
        #[arg(long, default_value_t = 0.3)]
        angle: f64,
        #[arg(long)]
        out: Option<String>,
        /// Write an SVG strand diagram
        #[arg(long)]
        svg: Option<String>,
        /// Write the sampled strands as CSV
        #[arg(long)]
        csv: Option<String>,
    },
    /// Check the iterated-monodromy recurrence at a given level
    ImgVerify {
        #[command(flatten)]
        source: ParamSource,
        #[command(flatten)]
        escape: EscapeArgs,
        #[command(flatten)]
        track: TrackArgs,
        #[arg(long, default_value_t = 2)]
        level: usize,
        #[arg(long, default_value_t = 1)]
        turns: i64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Locate discriminant roots and test membership in the bad set E
    ScanE {
        #[command(flatten)]
        source: ParamSource,
        /// Distance from the unit circle that counts as membership
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Disk-root count s and braid class σ₁^s of a quadratic parameter
    Quad {
        #[command(flatten)]
        source: ParamSource,
        #[arg(long)]
        out: Option<String>,
    },
    /// Generate a parameter with a prescribed monodromy cycle type
    Factory {
        /// Fiber degree
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// Number of fixed letters
        #[arg(long, default_value_t = 0)]
        fixed: usize,
        /// Comma-separated cycle lengths (each ≥ 2)
        #[arg(long, default_value = "")]
        cycles: String,
        /// Comma-separated radii (default 2,3,4,…)
        #[arg(long)]
        radii: Option<String>,
        /// Scale: a number, or "auto" (default)
        #[arg(long, default_value = "auto")]
        scale: String,
        /// List available presets and exit
        #[arg(long)]
        list: bool,
        #[arg(long)]
        out: Option<String>,
    },
    /// Decide equality of two points of the suspension model
    Suspension {
        /// Base permutation in cycle notation, e.g. "(2 3)"
        #[arg(long)]
        perm: String,
        /// Fiber degree
        #[arg(long)]
        d: usize,
        #[arg(long)]
        t1: f64,
        /// Code "pre:period", e.g. "2:1,3"
        #[arg(long)]
        code1: String,
        #[arg(long)]
        t2: f64,
        #[arg(long)]
        code2: String,
        #[arg(long)]
        out: Option<String>,
    },
}

/// Exit 1: precondition or input failure. Exit 2: numerical nonconvergence.
fn fail(code: i32, kind: &str, message: String) -> ! {
    let body = json!({"schema": SCHEMA, "error": {"kind": kind, "message": message}});
    eprintln!("{}", serde_json::to_string_pretty(&body).unwrap());
    exit(code)
}

fn fail_monodromy(err: MonodromyError) -> ! {
    match err {
        MonodromyError::NonConvergence { .. }
        | MonodromyError::StrandCollision { .. }
        | MonodromyError::BranchCollision
        | MonodromyError::EndpointMismatch => fail(2, "nonconvergence", err.to_string()),
        other => fail(1, "precondition", other.to_string()),
    }
}

fn fail_braid(err: BraidError) -> ! {
    match err {
        BraidError::DegenerateProjection
        | BraidError::SeparationLoss(..)
        | BraidError::NonIntegralWinding(..) => fail(2, "nonconvergence", err.to_string()),
        other => fail(1, "precondition", other.to_string()),
    }
}

fn load_param(source: &ParamSource, cfg: &EscapeConfig) -> SkewParam {
    let base = match (&source.params, &source.preset) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .unwrap_or_else(|e| fail(1, "io", format!("cannot read {path}: {e}")));
            skewparam::from_json(&text)
                .unwrap_or_else(|e| fail(1, "parse", format!("bad parameter file: {e}")))
        }
        (None, Some(name)) => factory::preset(name)
            .unwrap_or_else(|e| fail(1, "precondition", e.to_string())),
        _ => fail(1, "usage", "exactly one of --params or --preset is required".into()),
    };
    match source.scale.as_deref() {
        None => base,
        Some("auto") => factory::auto_scale(&base, cfg)
            .unwrap_or_else(|e| fail(1, "precondition", e.to_string()))
            .0,
        Some(text) => {
            let t: f64 = text
                .parse()
                .unwrap_or_else(|_| fail(1, "usage", format!("bad --scale value {text:?}")));
            base.scaled(Complex64::new(t, 0.0))
        }
    }
}

fn escape_config(args: &EscapeArgs) -> EscapeConfig {
    EscapeConfig {
        alpha: args.alpha,
        z_samples: args.grid,
        margin: args.margin,
        ..EscapeConfig::default()
    }
}

/// Round every float in the report to 12 decimals so output is reproducible.
fn round_floats(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                if n.as_i64().is_none() {
                    let rounded = (x * 1e12).round() / 1e12;
                    *value = json!(rounded);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn emit(mut report: Value, out: Option<&str>) {
    round_floats(&mut report);
    let text = serde_json::to_string_pretty(&report).unwrap();
    match out {
        Some(path) => fs::write(path, text + "\n")
            .unwrap_or_else(|e| fail(1, "io", format!("cannot write {path}: {e}"))),
        None => println!("{text}"),
    }
}

fn lambda_json(lambda: &SkewParam) -> Value {
    serde_json::from_str(&skewparam::to_json(lambda)).unwrap()
}

fn perm_json(perm: &Perm) -> Value {
    json!({
        "cycles": perm.to_cycle_string(),
        "cycle_type": perm.cycle_type(),
        "order": perm.order(),
    })
}

fn require_admissible(lambda: &SkewParam, cfg: &EscapeConfig) -> Value {
    let report = admissibility_certificate(lambda, cfg)
        .unwrap_or_else(|e| fail(1, "precondition", e.to_string()));
    let value = serde_json::to_value(&report).unwrap();
    if !report.admissible {
        fail(
            1,
            "precondition",
            format!(
                "parameter is not certified admissible: {}",
                serde_json::to_string(&value).unwrap()
            ),
        );
    }
    value
}

fn run_analyze(source: ParamSource, escape: EscapeArgs, track: TrackArgs, out: Option<String>) {
    let cfg = escape_config(&escape);
    let lambda = load_param(&source, &cfg);
    let admissibility = require_admissible(&lambda, &cfg);
    let geometry = monodromy::track_circle(&lambda, &cfg, 1, 1, track.steps, track.tol)
        .unwrap_or_else(|e| fail_monodromy(e));
    let word = braid::extract_word(&geometry, 0.3).unwrap_or_else(|e| fail_braid(e));
    let invariants = braid::invariants(&geometry).unwrap_or_else(|e| fail_braid(e));
    let s = &geometry.permutation;

    // combinatorial model predictions from the measured monodromy
    let mut predicted: Vec<usize> = julia::fixed_point_components(s)
        .iter()
        .map(|(_, w)| *w)
        .collect();
    predicted.sort_unstable();
    let windings_match = predicted == invariants.windings;
    let exponent_matches_linking = word.exponent_sum() == invariants.exponent_sum;

    let report = json!({
        "schema": SCHEMA,
        "lambda": lambda_json(&lambda),
        "config": {"alpha": escape.alpha, "grid": escape.grid, "margin": escape.margin,
                   "steps": track.steps, "tol": track.tol},
        "admissibility": admissibility,
        "monodromy": perm_json(s),
        "braid": {
            "word": word.to_text(),
            "letters": word.letters,
            "exponent_sum": word.exponent_sum(),
            "quasipositive_word": word.is_quasipositive_word(),
            "invariants": serde_json::to_value(&invariants).unwrap(),
        },
        "model": {"m_s": s.order(), "component_windings": predicted},
        "agreement": {
            "windings_match": windings_match,
            "exponent_sum_matches_linking": exponent_matches_linking,
        },
    });
    if !windings_match || !exponent_matches_linking {
        emit(report, out.as_deref());
        fail(2, "nonconvergence", "geometry disagrees with the combinatorial model".into());
    }
    emit(report, out.as_deref());
}

#[allow(clippy::too_many_arguments)]
fn run_braid(
    source: ParamSource,
    escape: EscapeArgs,
    track: TrackArgs,
    level: usize,
    turns: i64,
    angle: f64,
    out: Option<String>,
    svg: Option<String>,
    csv: Option<String>,
) {
    let cfg = escape_config(&escape);
    let lambda = load_param(&source, &cfg);
    require_admissible(&lambda, &cfg);
    let geometry = monodromy::track_circle(&lambda, &cfg, level, turns, track.steps, track.tol)
        .unwrap_or_else(|e| fail_monodromy(e));
    let word = braid::extract_word(&geometry, angle).unwrap_or_else(|e| fail_braid(e));
    let invariants = braid::invariants(&geometry).unwrap_or_else(|e| fail_braid(e));
    if let Some(path) = svg {
        fs::write(&path, braid::braid_svg(&geometry, angle))
            .unwrap_or_else(|e| fail(1, "io", format!("cannot write {path}: {e}")));
    }
    if let Some(path) = csv {
        fs::write(&path, monodromy::strands_to_csv(&geometry))
            .unwrap_or_else(|e| fail(1, "io", format!("cannot write {path}: {e}")));
    }
    emit(
        json!({
            "schema": SCHEMA,
            "level": level,
            "turns": turns,
            "monodromy": perm_json(&geometry.permutation),
            "word": word.to_text(),
            "letters": word.letters,
            "exponent_sum": word.exponent_sum(),
            "quasipositive_word": word.is_quasipositive_word(),
            "invariants": serde_json::to_value(&invariants).unwrap(),
        }),
        out.as_deref(),
    );
}

fn run_img_verify(
    source: ParamSource,
    escape: EscapeArgs,
    track: TrackArgs,
    level: usize,
    turns: i64,
    out: Option<String>,
) {
    let cfg = escape_config(&escape);
    let lambda = load_param(&source, &cfg);
    require_admissible(&lambda, &cfg);
    let check = monodromy::level_monodromy_check(&lambda, &cfg, level, turns, track.steps, track.tol)
        .unwrap_or_else(|e| fail_monodromy(e));
    let report = json!({
        "schema": SCHEMA,
        "level": level,
        "turns": turns,
        "s": perm_json(&check.s),
        "numeric": check.numeric.to_cycle_string(),
        "formula": check.formula.to_cycle_string(),
        "matches": check.matches,
    });
    if !check.matches {
        emit(report, out.as_deref());
        fail(2, "nonconvergence", "recurrence mismatch".into());
    }
    emit(report, out.as_deref());
}

fn run_scan_e(source: ParamSource, tol: f64, out: Option<String>) {
    let lambda = load_param(&source, &EscapeConfig::default());
    let (in_e, circle_roots) = lambda
        .e_membership(tol)
        .unwrap_or_else(|e| fail(1, "precondition", e.to_string()));
    let disc = lambda
        .discriminant_in_z()
        .unwrap_or_else(|e| fail(1, "precondition", e.to_string()));
    let all_roots = disc
        .roots(1e-10, 2000)
        .unwrap_or_else(|e| fail(2, "nonconvergence", e.to_string()));
    emit(
        json!({
            "schema": SCHEMA,
            "lambda": lambda_json(&lambda),
            "in_e": in_e,
            "circle_roots": circle_roots.iter().map(|r| [r.re, r.im]).collect::<Vec<_>>(),
            "discriminant_roots": all_roots.iter().map(|r| [r.re, r.im]).collect::<Vec<_>>(),
        }),
        out.as_deref(),
    );
}

fn run_quad(source: ParamSource, out: Option<String>) {
    let lambda = load_param(&source, &EscapeConfig::default());
    if lambda.d != 2 {
        fail(1, "precondition", format!("quad requires degree 2, got {}", lambda.d));
    }
    let (c, b, a) = (lambda.a[0][0], lambda.a[0][1], lambda.a[0][2]);
    let s = match factory::quad_s(c, b, a) {
        Ok(s) => s,
        Err(e @ (FactoryError::AllZero | FactoryError::BoundaryRoot)) => {
            fail(1, "precondition", e.to_string())
        }
        Err(e) => fail(2, "nonconvergence", e.to_string()),
    };
    emit(
        json!({
            "schema": SCHEMA,
            "lambda": lambda_json(&lambda),
            "s": s,
            "braid_class": if s == 0 { "e".to_string() } else { format!("s1^{s}") },
        }),
        out.as_deref(),
    );
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Vec<T> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<T>()
                .unwrap_or_else(|_| fail(1, "usage", format!("bad {what} entry {p:?}")))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn run_factory(
    d: usize,
    fixed: usize,
    cycles: String,
    radii: Option<String>,
    scale: String,
    list: bool,
    out: Option<String>,
) {
    if list {
        emit(json!({"schema": SCHEMA, "presets": factory::PRESET_NAMES}), out.as_deref());
        return;
    }
    let cycle_lengths: Vec<usize> = parse_list(&cycles, "--cycles");
    let spec = match radii {
        Some(text) => CycleSpec { d, fixed, cycle_lengths, radii: parse_list(&text, "--radii") },
        None => CycleSpec::with_default_radii(d, fixed, cycle_lengths),
    };
    let base = factory::cycle_type_params(&spec, 1.0)
        .unwrap_or_else(|e| fail(1, "precondition", e.to_string()));
    let cfg = EscapeConfig::default();
    let (lambda, applied) = match scale.as_str() {
        "auto" => factory::auto_scale(&base, &cfg)
            .unwrap_or_else(|e| fail(2, "nonconvergence", e.to_string())),
        text => {
            let t: f64 = text
                .parse()
                .unwrap_or_else(|_| fail(1, "usage", format!("bad --scale value {text:?}")));
            (base.scaled(Complex64::new(t, 0.0)), t)
        }
    };
    emit(
        json!({
            "schema": SCHEMA,
            "spec": {"d": d, "fixed": fixed, "cycles": spec.cycle_lengths,
                     "radii": spec.radii, "scale": applied},
            "expected_cycle_type": spec.expected_cycle_type(),
            "lambda": lambda_json(&lambda),
        }),
        out.as_deref(),
    );
}

#[allow(clippy::too_many_arguments)]
fn run_suspension(
    perm: String,
    d: usize,
    t1: f64,
    code1: String,
    t2: f64,
    code2: String,
    out: Option<String>,
) {
    let s = Perm::parse(&perm, d).unwrap_or_else(|e| fail(1, "usage", e.to_string()));
    let c1 = Code::parse(&code1, d).unwrap_or_else(|e| fail(1, "usage", e.to_string()));
    let c2 = Code::parse(&code2, d).unwrap_or_else(|e| fail(1, "usage", e.to_string()));
    let equal = julia::suspension_eq(&s, d, (t1, &c1), (t2, &c2))
        .unwrap_or_else(|e| fail(1, "usage", e.to_string()));
    let (orbit, winding) =
        julia::component_orbit(&s, d, &c1).unwrap_or_else(|e| fail(1, "usage", e.to_string()));
    emit(
        json!({
            "schema": SCHEMA,
            "perm": perm_json(&s),
            "point1": {"t": t1, "code": c1.to_text()},
            "point2": {"t": t2, "code": c2.to_text()},
            "equal": equal,
            "component_of_point1": {
                "winding": winding,
                "orbit": orbit.iter().map(|c| c.to_text()).collect::<Vec<_>>(),
            },
        }),
        out.as_deref(),
    );
}

fn main() {
    match Cli::parse().command {
        Command::Analyze { source, escape, track, out } => run_analyze(source, escape, track, out),
        Command::Braid { source, escape, track, level, turns, angle, out, svg, csv } => {
            run_braid(source, escape, track, level, turns, angle, out, svg, csv)
        }
        Command::ImgVerify { source, escape, track, level, turns, out } => {
            run_img_verify(source, escape, track, level, turns, out)
        }
        Command::ScanE { source, tol, out } => run_scan_e(source, tol, out),
        Command::Quad { source, out } => run_quad(source, out),
        Command::Factory { d, fixed, cycles, radii, scale, list, out } => {
            run_factory(d, fixed, cycles, radii, scale, list, out)
        }
        Command::Suspension { perm, d, t1, code1, t2, code2, out } => {
            run_suspension(perm, d, t1, code1, t2, code2, out)
        }
    }
}
