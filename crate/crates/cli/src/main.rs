use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use liouvik_core::darboux::{find_darboux, first_integral_from_pairs, DarbouxConfig};
use liouvik_core::expr::{parse_poly, print_poly, print_ratfunc};
use liouvik_core::jet::{a_coeffs, predicted_x_of_yj, reduce_x_of_yj, DerivationSystem, JetMode};
use liouvik_core::numeric::{check_constancy, flow};
use liouvik_core::report::{numeric_section, run, RunOptions, NUMERIC_H, NUMERIC_T_END, NUMERIC_TOL};
use liouvik_core::selftest::run_selftest;
use liouvik_core::{BasePoint, Error, SearchBounds, VectorField};

#[derive(Parser)]
#[command(name = "liouvik", version, about = "Differential Galois order classification for planar polynomial vector fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a field and emit the full JSON report.
    Classify(ClassifyArgs),
    /// List rational Darboux polynomials up to a degree.
    Darboux(DarbouxArgs),
    /// Classify, then print the verified certificate tower.
    Certify(ClassifyArgs),
    /// Classify, certify and test constancy along an RK4 trajectory.
    Check(CheckArgs),
    /// Compare X(y_j) reduced on X(y) = 0 with its predicted B-sequence form.
    Reduce(ReduceArgs),
    /// Run the built-in regression and property checks.
    Selftest(SelftestArgs),
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// First component X1.
    #[arg(long, allow_hyphen_values = true)]
    x1: String,
    /// Second component X2.
    #[arg(long, allow_hyphen_values = true)]
    x2: String,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Compact single-line JSON.
    #[arg(long)]
    json: bool,
    /// No human summary on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args, Clone)]
struct ClassifyArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, default_value_t = SearchBounds::default().num_deg_max)]
    num_deg: u32,
    #[arg(long, default_value_t = SearchBounds::default().den_exp_max)]
    den_exp: u32,
    #[arg(long, default_value_t = SearchBounds::default().n_max)]
    n_max: u32,
    #[arg(long, default_value_t = SearchBounds::default().darboux_deg)]
    darboux_deg: u32,
    /// Extra denominator factor (repeatable).
    #[arg(long = "hint", allow_hyphen_values = true)]
    hints: Vec<String>,
    /// Base point "p,q" for the certificate's path integrals.
    #[arg(long, allow_hyphen_values = true)]
    base: Option<String>,
    /// Skip the numeric cross-check.
    #[arg(long)]
    no_numeric: bool,
    /// Include wall-clock timings (makes the report run-dependent).
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct DarbouxArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, default_value_t = 2)]
    deg: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    classify: ClassifyArgs,
    /// Trajectory start "a,b"; by default the first regular point near the base.
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    #[arg(long, default_value_t = NUMERIC_T_END)]
    t_end: f64,
    #[arg(long, default_value_t = NUMERIC_H)]
    h: f64,
    #[arg(long, default_value_t = NUMERIC_TOL)]
    tol: f64,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, default_value_t = 3)]
    j: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

/// Failures mapped onto exit codes.
enum Failure {
    Input(String),
    Degenerate,
    Verification(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateField => Failure::Degenerate,
            Error::InternalVerifyFailed(_) | Error::WitnessInvalid => Failure::Verification(e.to_string()),
            Error::Syntax { .. }
            | Error::NonPolynomial { .. }
            | Error::Exponent { .. }
            | Error::DivisionByZero
            | Error::DivisionByZeroPoly
            | Error::InvalidArgument(_)
            | Error::BasePointSingular => Failure::Input(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn emit(v: &Value, out: &OutputArgs) {
    if out.json {
        println!("{v}");
    } else {
        println!("{}", serde_json::to_string_pretty(v).expect("json"));
    }
}

fn summary(out: &OutputArgs, text: impl AsRef<str>) {
    if !out.quiet {
        eprintln!("{}", text.as_ref());
    }
}

fn field(f: &FieldArgs) -> Result<VectorField, Failure> {
    let x1 = parse_poly(&f.x1).map_err(|e| Failure::Input(format!("--x1: {e}")))?;
    let x2 = parse_poly(&f.x2).map_err(|e| Failure::Input(format!("--x2: {e}")))?;
    Ok(VectorField::new(x1, x2)?)
}

fn options(a: &ClassifyArgs) -> Result<RunOptions, Failure> {
    let bounds = SearchBounds { num_deg_max: a.num_deg, den_exp_max: a.den_exp, n_max: a.n_max, darboux_deg: a.darboux_deg };
    bounds.validate()?;
    let hints = a
        .hints
        .iter()
        .map(|h| parse_poly(h).map_err(|e| Failure::Input(format!("--hint {h:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let base = a.base.as_deref().map(BasePoint::parse).transpose()?;
    Ok(RunOptions { bounds, hints, base, numeric: !a.no_numeric, timings: a.timings })
}

fn parse_pair(s: &str) -> Result<(f64, f64), Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            _ => Err(Failure::Input(format!("--start must be two numbers \"a,b\", got {s:?}"))),
        },
        _ => Err(Failure::Input(format!("--start must be \"a,b\", got {s:?}"))),
    }
}

fn cmd_classify(a: &ClassifyArgs) -> CmdResult {
    let vf = field(&a.field)?;
    let r = run(&vf, &options(a)?)?;
    emit(&serde_json::to_value(&r.report).expect("report serializes"), &a.out);
    let c = &r.classification;
    let mut text = format!("{}; {}", c.semantics(), c.coefficient_field);
    if let Some(w) = &c.witness {
        text.push_str(&format!("\nwitness: {w}"));
    }
    if let Some(n) = &c.note {
        text.push_str(&format!("\nnote: {n}"));
    }
    if let Some(num) = r.report.numeric.as_ref().and_then(|n| n.result.as_ref()) {
        text.push_str(&format!("\nnumeric: max deviation {:.3e} over {} samples", num.max_abs_deviation, num.samples));
    }
    summary(&a.out, text);
    Ok(())
}

fn cmd_certify(a: &ClassifyArgs) -> CmdResult {
    let vf = field(&a.field)?;
    let opts = RunOptions { numeric: false, ..options(a)? };
    let r = run(&vf, &opts)?;
    let v = json!({
        "level_found": r.classification.level_found,
        "certificate": r.report.certificate,
    });
    emit(&v, &a.out);
    match &r.tower {
        Some(t) => summary(&a.out, format!("verified level-{} tower with {} nodes", t.level, t.nodes.len())),
        None => summary(&a.out, "no witness within bounds, nothing to certify"),
    }
    Ok(())
}

fn cmd_check(a: &CheckArgs) -> CmdResult {
    let vf = field(&a.classify.field)?;
    let opts = RunOptions { numeric: false, ..options(&a.classify)? };
    let r = run(&vf, &opts)?;
    let Some(tower) = &r.tower else {
        emit(&json!({ "level_found": Value::Null, "numeric": Value::Null }), &a.classify.out);
        summary(&a.classify.out, "no witness within bounds, nothing to check");
        return Ok(());
    };
    let (start, rep) = match &a.start {
        Some(s) => {
            let start = parse_pair(s)?;
            let traj = flow(&vf, start, a.t_end, a.h)?;
            (start, check_constancy(&vf, tower, &traj, a.tol)?)
        }
        None if a.t_end == NUMERIC_T_END && a.h == NUMERIC_H && a.tol == NUMERIC_TOL => {
            let sec = numeric_section(&vf, tower);
            match (sec.start, sec.result) {
                (Some(s), Some(r)) => (s, r),
                _ => return Err(Failure::Runtime(sec.error.unwrap_or_default())),
            }
        }
        None => return Err(Failure::Input("non-default --t-end/--h/--tol need an explicit --start".into())),
    };
    emit(&json!({ "level_found": tower.level, "start": [start.0, start.1], "numeric": rep }), &a.classify.out);
    summary(
        &a.classify.out,
        format!("max deviation {:.3e} over {} samples: {}", rep.max_abs_deviation, rep.samples, if rep.pass { "pass" } else { "FAIL" }),
    );
    if rep.pass {
        Ok(())
    } else {
        Err(Failure::Verification("first integral is not constant along the trajectory".into()))
    }
}

fn cmd_darboux(a: &DarbouxArgs) -> CmdResult {
    let vf = field(&a.field)?;
    let search = find_darboux(&vf, &DarbouxConfig { deg_max: a.deg, ..Default::default() });
    let pairs: Vec<Value> = search.pairs.iter().map(|p| json!({ "f": print_poly(&p.f), "k": print_poly(&p.k) })).collect();
    let integral = first_integral_from_pairs(&vf, &search.pairs);
    emit(
        &json!({
            "deg_max": a.deg,
            "pairs": pairs,
            "complete": search.complete,
            "rational_first_integral": integral.as_ref().map(print_ratfunc),
        }),
        &a.out,
    );
    summary(&a.out, format!("{} Darboux polynomial(s) of degree <= {}{}", search.pairs.len(), a.deg, if search.complete { "" } else { " (search incomplete)" }));
    Ok(())
}

fn cmd_reduce(a: &ReduceArgs) -> CmdResult {
    let vf = field(&a.field)?;
    if a.j == 0 {
        return Err(Failure::Input("--j must be at least 1".into()));
    }
    let sys = DerivationSystem::new(&vf, JetMode::Reduced);
    let reduced = reduce_x_of_yj(&vf, a.j);
    let predicted = predicted_x_of_yj(&vf.b_sequence(a.j as usize), a.j);
    let equal = reduced.sub(&predicted).is_zero();
    emit(
        &json!({
            "j": a.j,
            "reduced": sys.display(&reduced),
            "predicted": sys.display(&predicted),
            "coefficients": a_coeffs(a.j as usize),
            "equal": equal,
        }),
        &a.out,
    );
    summary(&a.out, format!("X(y_{}) {} the predicted form", a.j, if equal { "matches" } else { "DIFFERS from" }));
    if equal {
        Ok(())
    } else {
        Err(Failure::Verification("reduction differs from the predicted form".into()))
    }
}

fn cmd_selftest(a: &SelftestArgs) -> CmdResult {
    let checks = run_selftest(a.seed);
    for c in &checks {
        println!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    if checks.iter().all(|c| c.pass) {
        Ok(())
    } else {
        Err(Failure::Verification("selftest failures".into()))
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("LIOUVIK_THREADS") {
        let n: usize = v.parse().map_err(|_| Failure::Input(format!("LIOUVIK_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Failure::Input("LIOUVIK_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = configure_threads().and_then(|()| match &cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Darboux(a) => cmd_darboux(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Check(a) => cmd_check(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Selftest(a) => cmd_selftest(a),
    });
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Degenerate) => {
            eprintln!("error: {}", Error::DegenerateField);
            ExitCode::from(2)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(4)
        }
    }
}
