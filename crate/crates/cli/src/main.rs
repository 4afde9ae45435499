//! `nevlab`: runs value-distribution computations described by a JSON spec.
//!
//! Exit codes: 0 every verdict passes, 1 some check fails, 2 hypothesis
//! violations or vacuous checks only, 3 bad spec or expression, 4 numerical
//! failure.

mod output;
mod spec;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use nevlab_core::locator::{divisor_of, Divisor, Target};
use nevlab_core::nevanlinna::radial_grid_with;
use nevlab_core::theorems::{check, CheckReport, Verdict};

use output::{csv_text, g12, json_text};
use spec::RunSpec;

#[derive(Parser)]
#[command(name = "nevlab", version, about = "Nevanlinna functionals and inequality checks for meromorphic functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Degree and weight statistics of the spec's polynomial.
    Stats(Common),
    /// Zeros and poles of the function in `|z| ≤ radii.stop`.
    Zeros(Common),
    /// Proximity, counting and characteristic on the radius grid.
    Nev(Common),
    /// The spec's checks.
    Check(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    threads: Option<usize>,
    /// Omit the timestamp so identical inputs give identical bytes.
    #[arg(long)]
    reproducible: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Spec(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Spec(_) => 3,
            Failure::Numerical(_) | Failure::Io(_) => 4,
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn stamp(c: &Common) -> Option<String> {
    if c.reproducible {
        return None;
    }
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    Some(format!("unix:{secs}"))
}

fn load(c: &Common, for_checks: bool) -> Result<spec::Resolved, Failure> {
    let text = std::fs::read_to_string(&c.spec).map_err(|e| Failure::Spec(format!("{}: {e}", c.spec.display())))?;
    let seed = match std::env::var("NEVLAB_SEED") {
        Ok(s) => Some(s.trim().parse::<u64>().map_err(|_| Failure::Spec(format!("NEVLAB_SEED `{s}` is not an integer")))?),
        Err(_) => None,
    };
    RunSpec::from_json(&text).and_then(|s| s.resolve(seed, for_checks)).map_err(Failure::Spec)
}

fn stats(c: &Common) -> Result<u8, Failure> {
    let spec = load(c, false)?;
    let p = spec.polynomial.ok_or_else(|| Failure::Spec("`stats` needs a polynomial".to_string()))?;
    let s = p.stats();
    let st = stamp(c);
    let text = match c.format {
        Format::Json => json_text(
            json!({
                "d": s.d(), "d_max": s.d_max, "d_min": s.d_min, "gamma": s.gamma, "nu": s.nu,
                "qstar": s.qstar, "qkstar": s.qkstar, "k": s.k, "homogeneous": s.homogeneous,
            }),
            st.as_deref(),
        ),
        Format::Csv => csv_text(
            &["d", "d_max", "d_min", "gamma", "nu", "qstar", "qkstar", "k", "homogeneous"],
            &[vec![
                s.d().to_string(),
                s.d_max.to_string(),
                s.d_min.to_string(),
                s.gamma.to_string(),
                s.nu.to_string(),
                s.qstar.to_string(),
                s.qkstar.to_string(),
                s.k.to_string(),
                s.homogeneous.to_string(),
            ]],
            st.as_deref(),
        ),
    };
    write(&c.out, &text)?;
    Ok(0)
}

fn divisor_rows(kind: &str, d: &Divisor) -> Vec<Vec<String>> {
    d.points.iter().map(|p| vec![kind.to_string(), g12(p.location.re), g12(p.location.im), p.mult.to_string()]).collect()
}

fn zeros(c: &Common) -> Result<u8, Failure> {
    let spec = load(c, false)?;
    let r = *spec.radii.last().unwrap();
    let (z, p) = divisor_of(&spec.function, r, Target::Finite(Complex64::new(0.0, 0.0)), &spec.tol.nev.locator)
        .map_err(|e| Failure::Numerical(e.to_string()))?;
    let st = stamp(c);
    let text = match c.format {
        Format::Json => json_text(
            json!({"radius": r, "zeros": z.points, "poles": p.points, "flagged": z.flagged || p.flagged}),
            st.as_deref(),
        ),
        Format::Csv => {
            let mut rows = divisor_rows("zero", &z);
            rows.extend(divisor_rows("pole", &p));
            csv_text(&["kind", "re", "im", "mult"], &rows, st.as_deref())
        }
    };
    write(&c.out, &text)?;
    Ok(if z.flagged || p.flagged { 4 } else { 0 })
}

fn nev(c: &Common) -> Result<u8, Failure> {
    let spec = load(c, false)?;
    let samples =
        radial_grid_with(&spec.function, &spec.radii, &spec.tol.nev).map_err(|e| Failure::Numerical(e.to_string()))?;
    let st = stamp(c);
    let failed = samples.iter().any(Result::is_err);
    let text = match c.format {
        Format::Json => {
            let rows: Vec<Value> = samples
                .iter()
                .zip(&spec.radii)
                .map(|(s, &r)| match s {
                    Ok(s) => serde_json::to_value(s).unwrap(),
                    Err(e) => json!({"r": r, "error": e.to_string()}),
                })
                .collect();
            json_text(json!({ "samples": rows }), st.as_deref())
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = samples
                .iter()
                .zip(&spec.radii)
                .map(|(s, &r)| match s {
                    Ok(s) => vec![g12(s.r), g12(s.m), g12(s.n), g12(s.t), s.perturbed_r.to_string()],
                    Err(_) => vec![g12(r), g12(f64::NAN), g12(f64::NAN), g12(f64::NAN), "false".to_string()],
                })
                .collect();
            csv_text(&["r", "m", "N", "T", "perturbed_r"], &rows, st.as_deref())
        }
    };
    write(&c.out, &text)?;
    Ok(if failed { 4 } else { 0 })
}

fn dat_path(out: &Path, index: usize, id: &str) -> PathBuf {
    let stem = out.file_stem().map_or("report".into(), |s| s.to_string_lossy().into_owned());
    let mut tag: String = id.chars().map(|ch| if ch.is_ascii_alphanumeric() { ch } else { '_' }).collect();
    while tag.contains("__") {
        tag = tag.replace("__", "_");
    }
    out.with_file_name(format!("{stem}_{index:02}_{}.dat", tag.trim_matches('_')))
}

fn run_checks(c: &Common) -> Result<u8, Failure> {
    let spec = load(c, true)?;
    if spec.checks.is_empty() {
        return Err(Failure::Spec("spec lists no checks".to_string()));
    }
    let mut reports: Vec<CheckReport> = Vec::new();
    let mut errors: Vec<(String, String)> = Vec::new();
    for rc in &spec.checks {
        match check(&rc.id, &rc.function, rc.polynomial.as_ref(), &spec.radii, &spec.tol) {
            Ok(r) => reports.push(r),
            Err(e) => errors.push((rc.id.to_string(), e.to_string())),
        }
    }
    let st = stamp(c);
    let text = match c.format {
        Format::Json => {
            let checks: Vec<Value> = reports.iter().map(|r| serde_json::to_value(r).unwrap()).collect();
            let errs: Vec<Value> = errors.iter().map(|(id, e)| json!({"check_id": id, "error": e})).collect();
            json_text(json!({"checks": checks, "errors": errs}), st.as_deref())
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for r in &reports {
                for row in &r.rows {
                    rows.push(vec![
                        r.check_id.clone(),
                        g12(row.requested_r),
                        g12(row.r),
                        g12(row.lhs),
                        g12(row.rhs),
                        g12(row.residual),
                        g12(row.t),
                        row.perturbed_r.to_string(),
                        r.verdict.to_string(),
                    ]);
                }
            }
            let header = ["check_id", "requested_r", "r", "lhs", "rhs", "residual", "T", "perturbed_r", "verdict"];
            csv_text(&header, &rows, st.as_deref())
        }
    };
    write(&c.out, &text)?;
    for (i, r) in reports.iter().enumerate() {
        let mut dat = String::new();
        if let Some(s) = &st {
            dat.push_str(&format!("# generated {s}\n"));
        }
        dat.push_str(&format!("# {} verdict={}\n# r residual\n", r.check_id, r.verdict));
        for row in &r.rows {
            dat.push_str(&format!("{} {}\n", g12(row.r), g12(row.residual)));
        }
        write(&dat_path(&c.out, i, &r.check_id), &dat)?;
    }
    for (id, e) in &errors {
        eprintln!("{id}: {e}");
    }
    for r in &reports {
        eprintln!("{}: {}", r.check_id, r.verdict);
    }
    let numerical = !errors.is_empty() || reports.iter().any(|r| !r.failures.is_empty());
    Ok(if numerical {
        4
    } else if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        1
    } else if reports.iter().all(|r| r.verdict == Verdict::Pass) {
        0
    } else {
        2
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (Command::Stats(c) | Command::Zeros(c) | Command::Nev(c) | Command::Check(c)) = &cli.command;
    if let Some(n) = c.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("threads: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match &cli.command {
        Command::Stats(c) => stats(c),
        Command::Zeros(c) => zeros(c),
        Command::Nev(c) => nev(c),
        Command::Check(c) => run_checks(c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            match &f {
                Failure::Spec(m) | Failure::Numerical(m) | Failure::Io(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
