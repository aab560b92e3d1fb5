//! Command-line frontend: `classify`, `render`, `verify` and `bench`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bench::time_mul;
use crate::dynamics::{DynamicsParams, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};
use crate::multicomplex::Multicomplex;
use crate::renderer::{export_grid, render_slice_with, ExportFormat, GridSpec, RenderOptions};
use crate::slices::{classification_report, classify_multicomplex, iterate_space, SliceTriple};
use crate::units::UnitMask;
use crate::verify::{append_jsonl, run_suite, Suite, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "mcjulia", version, about = "Multicomplex filled-in Julia sets and their principal 3D slices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify principal 3D slices (all of them, or one with --slice).
    Classify(ClassifyArgs),
    /// Render a slice to a voxel grid and export it.
    Render(RenderArgs),
    /// Run the verification harness.
    Verify(VerifyArgs),
    /// Time direct against idempotent multiplication.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct AlgebraArgs {
    /// Order of the multicomplex algebra.
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    /// Exponent p of z^p + c.
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    /// Parameter c: a real number, or 2^n comma-separated coefficients.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub c: String,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub algebra: AlgebraArgs,
    /// Classify only this triple, e.g. `1,i1,j3` or `3,5,9`.
    #[arg(long)]
    pub slice: Option<String>,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub algebra: AlgebraArgs,
    #[arg(long, default_value = "1,i1,i2")]
    pub slice: String,
    /// One size for a cube, or `nx,ny,nz`.
    #[arg(long, default_value = "128")]
    pub dims: String,
    /// `r` for [-r, r]^3, or `xmin,xmax,ymin,ymax,zmin,zmax`. Defaults to the escape radius.
    #[arg(long, allow_hyphen_values = true)]
    pub bounds: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: u32,
    /// Output path; PGM stacks derive one file per plane from it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// mcvox, ply or pgm.
    #[arg(long, default_value = "mcvox")]
    pub format: String,
    #[arg(long, env = "MCJULIA_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Highest order for the exhaustive checks.
    #[arg(long, default_value_t = 4)]
    pub n_max: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Append JSON-lines reports to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 2)]
    pub n_min: u32,
    #[arg(long, default_value_t = 5)]
    pub n_max: u32,
    #[arg(long, default_value_t = 2000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 5)]
    pub rounds: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

/// `c` as a real number or a full coefficient list.
pub fn parse_c(s: &str, n: u32) -> Result<Multicomplex> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let values = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| Error::Format(format!("--c: {p:?} is not a number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.len() == 1 {
        let v = values[0];
        if !v.is_finite() {
            return Err(Error::Format("--c must be finite".into()));
        }
        return Multicomplex::real(n, v);
    }
    Multicomplex::from_coeffs(n, values).map_err(|e| match e {
        Error::CoefficientCount { expected, got, .. } => Error::Format(format!(
            "--c takes one real or {expected} coefficients for n = {n} (got {got})"
        )),
        e => e,
    })
}

/// Three comma-separated unit names or masks.
pub fn parse_slice(s: &str, n: u32) -> Result<SliceTriple> {
    let units = s
        .split(',')
        .map(|u| u.trim().parse::<UnitMask>())
        .collect::<Result<Vec<_>>>()?;
    let units: [UnitMask; 3] = units
        .try_into()
        .map_err(|v: Vec<UnitMask>| Error::Format(format!("--slice needs exactly 3 units (got {})", v.len())))?;
    SliceTriple::new(n, units)
}

fn parse_list<T: std::str::FromStr>(s: &str, flag: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| Error::Format(format!("--{flag}: cannot parse {v:?}")))
        })
        .collect()
}

pub fn parse_dims(s: &str) -> Result<[usize; 3]> {
    match parse_list::<usize>(s, "dims")?.as_slice() {
        [d] => Ok([*d; 3]),
        [x, y, z] => Ok([*x, *y, *z]),
        v => Err(Error::Format(format!("--dims takes 1 or 3 values (got {})", v.len()))),
    }
}

pub fn parse_bounds(s: &str) -> Result<[[f64; 2]; 3]> {
    match parse_list::<f64>(s, "bounds")?.as_slice() {
        [r] => Ok([[-r, *r]; 3]),
        [a, b, c, d, e, f] => Ok([[*a, *b], [*c, *d], [*e, *f]]),
        v => Err(Error::Format(format!("--bounds takes 1 or 6 values (got {})", v.len()))),
    }
}

fn classify_cmd(args: &ClassifyArgs, out: &mut dyn Write) -> Result<bool> {
    let a = &args.algebra;
    let c = parse_c(&a.c, a.n)?;
    if let Some(s) = &args.slice {
        let t = parse_slice(s, a.n)?;
        let class = classify_multicomplex(&t, a.p, &c)?;
        let space = iterate_space(&t, a.p, c.is_zero());
        let basis: Vec<String> = space.basis.iter().map(|b| b.to_string()).collect();
        let value = serde_json::json!({
            "triple": t.to_string(),
            "canonical": t.canonical_order().to_string(),
            "case": class.case,
            "squares": class.squares.map(|s| s.to_i8()),
            "representative": class.representative.to_string(),
            "iterate_space": space.kind,
            "basis": basis,
        });
        if let Some(path) = &args.out {
            write_json(path, &value)?;
        }
        if args.json {
            writeln!(out, "{value}").ok();
        } else {
            writeln!(
                out,
                "T{t}: {class}; iterate space {:?} = span{{{}}}",
                space.kind,
                basis.join(", ")
            )
            .ok();
        }
        return Ok(true);
    }
    if !c.is_real() {
        return Err(Error::NonRealParameter);
    }
    let report = classification_report(a.n, a.p, c.coeffs()[0])?;
    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    if args.json {
        writeln!(out, "{}", serde_json::to_string(&report).expect("report serializes")).ok();
    } else {
        writeln!(
            out,
            "n={} p={} c={}: {} classes over {} triples",
            report.n, report.p, report.c, report.class_count, report.triples
        )
        .ok();
        for e in &report.classes {
            let [a, b, c] = e.squares.map(|s| if s < 0 { '-' } else { '+' });
            let alt = if e.alternate_labels.is_empty() {
                String::new()
            } else {
                format!(" (also labelled T{})", e.alternate_labels.join(", T"))
            };
            writeln!(
                out,
                "  {:<17} {{{a}{b}{c}}}  T{:<16} {:>6} members{alt}",
                e.case.to_string(),
                e.representative,
                e.members
            )
            .ok();
        }
    }
    Ok(report.partition_ok && report.permutation_invariant && report.representatives_fixed)
}

fn write_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn render_cmd(args: &RenderArgs, out: &mut dyn Write) -> Result<bool> {
    let a = &args.algebra;
    let format: ExportFormat = args.format.parse()?;
    let t = parse_slice(&args.slice, a.n)?;
    let c = parse_c(&a.c, a.n)?;
    let params = DynamicsParams::new(a.p, c, args.max_iter)?;
    let bounds = match &args.bounds {
        Some(b) => parse_bounds(b)?,
        None => [[-params.escape_radius(), params.escape_radius()]; 3],
    };
    let spec = GridSpec::new(parse_dims(&args.dims)?, bounds)?;
    let opts = RenderOptions {
        workers: args.workers,
        ..Default::default()
    };
    let grid = render_slice_with(&t, &params, &spec, &opts)?;
    let path = args.out.clone().unwrap_or_else(|| {
        PathBuf::from(match format {
            ExportFormat::Mcvox => "slice.mcvox",
            ExportFormat::Ply => "slice.ply",
            ExportFormat::PgmStack => "slice.pgm",
        })
    });
    let files = export_grid(&grid, format, &path)?;
    let [nx, ny, nz] = spec.dims();
    writeln!(
        out,
        "T{t} p={} N={}: {} of {} voxels bounded; wrote {} {} file(s) starting at {}",
        a.p,
        args.max_iter,
        grid.bounded_count(),
        nx * ny * nz,
        files.len(),
        format,
        files.first().map(|f| f.display().to_string()).unwrap_or_default()
    )
    .ok();
    Ok(true)
}

fn verify_cmd(args: &VerifyArgs, out: &mut dyn Write) -> Result<bool> {
    let suite: Suite = args.suite.parse()?;
    let reports = run_suite(suite, args.n_max, args.seed)?;
    if let Some(path) = &args.out {
        append_jsonl(&reports, path)?;
    }
    for r in &reports {
        writeln!(out, "{}", r.summary()).ok();
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    writeln!(out, "{} checks, {} failed (seed {:#x})", reports.len(), failed, args.seed).ok();
    Ok(failed == 0)
}

fn bench_cmd(args: &BenchArgs, out: &mut dyn Write) -> Result<bool> {
    if args.n_min > args.n_max {
        return Err(Error::Format("--n-min must not exceed --n-max".into()));
    }
    for n in args.n_min..=args.n_max {
        let t = time_mul(n, args.pairs, args.rounds, args.seed)?;
        if args.json {
            writeln!(out, "{}", serde_json::to_string(&t).expect("timing serializes")).ok();
        } else {
            writeln!(
                out,
                "n={n}: direct {:.1} ns, idempotent {:.1} ns, speedup {:.2}x",
                t.direct_ns, t.idempotent_ns, t.speedup
            )
            .ok();
        }
    }
    Ok(true)
}

/// Runs a parsed command. `Ok(false)` means the command ran but a check failed.
pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::Classify(a) => classify_cmd(a, out),
        Command::Render(a) => render_cmd(a, out),
        Command::Verify(a) => verify_cmd(a, out),
        Command::Bench(a) => bench_cmd(a, out),
    }
}

/// Parses `argv` and runs it, returning the process exit code.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    match dispatch(&cli, &mut stdout.lock()) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
