//! `nmlcomp`: machine-readable tables for complexity expansions.
//!
//! Subcommands: `expand` (F₀..F₂ at parameter points), `complexity`
//! (region approximations), `compare` (overestimation of the exact
//! spherical complexity), `validate` (oracle suites). Output is CSV or
//! JSON with 12 significant digits and a `schema_version` field; identical
//! configuration and seed give byte-identical output.
//!
//! Exit codes: 0 success, 2 configuration error, 3 domain/math error,
//! 4 validation failure. `NML_THREADS` caps worker parallelism.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nmlcomp::complexity::{self, Region};
use nmlcomp::expansion;
use nmlcomp::hermite;
use nmlcomp::multiindex::MultiIndex;
use nmlcomp::quad;
use nmlcomp::tensors::Metric;
use nmlcomp::ExpFamily;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "nmlcomp", version, about = "NML parametric complexity expansions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correction terms F0..Fs of the complexity expansion at parameter points
    Expand(ExpandArgs),
    /// Complexity approximation over a box region in the natural parameters
    Complexity(ComplexityArgs),
    /// Overestimation of the exact spherical-normal complexity by the
    /// order-0 and order-1 approximations over a (d, n) grid
    Compare(CompareArgs),
    /// Run the built-in oracle validation suites
    Validate(ValidateArgs),
}

#[derive(Args)]
struct FamilyArgs {
    /// Family: exp1d | normal-kv | spherical | poly
    #[arg(long)]
    family: String,

    /// Model dimension (required for normal-kv and spherical)
    #[arg(long)]
    dim: Option<usize>,

    /// Known standard deviation for normal-kv
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,

    /// JSON document describing a polynomial family (family = poly)
    #[arg(long)]
    poly_file: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write to a file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ExpandArgs {
    #[command(flatten)]
    family: FamilyArgs,

    /// Parameter point as a comma-separated list; repeatable, defaults to a
    /// family-specific reference point
    #[arg(long, allow_hyphen_values = true)]
    theta: Vec<String>,

    /// Expansion order (0, 1 or 2)
    #[arg(long, default_value_t = 2)]
    s: usize,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ComplexityArgs {
    #[command(flatten)]
    family: FamilyArgs,

    /// Region box "lo:hi,lo:hi,..." in the natural parameters
    #[arg(long = "box", allow_hyphen_values = true)]
    box_spec: String,

    /// Sample size; repeatable
    #[arg(long)]
    n: Vec<u64>,

    /// Arithmetic range of sample sizes "lo:hi:step"
    #[arg(long)]
    n_range: Option<String>,

    /// Expansion order (0, 1 or 2)
    #[arg(long, default_value_t = 1)]
    s: usize,

    /// Quadrature nodes per dimension
    #[arg(long, default_value_t = complexity::DEFAULT_NODES_PER_DIM)]
    nodes: usize,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Dimension range "lo:hi" (or a single value), d >= 2
    #[arg(long, default_value = "2:11")]
    d_range: String,

    /// Sample-size range "lo:hi" (or a single value); cells with n < d are
    /// skipped
    #[arg(long, default_value = "20:200")]
    n_range: String,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ValidateArgs {
    /// Suite: hermite | ac | exp-oracle | all
    #[arg(long, default_value = "all")]
    suite: String,

    /// Seed for the deterministic random draws
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Monte Carlo sample count for the ac suite
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
}

enum CliError {
    Config(String),
    Math(nmlcomp::Error),
    Validation(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Math(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            CliError::Math(e) => e.to_string(),
            CliError::Validation(m) => m.clone(),
        }
    }
}

impl From<nmlcomp::Error> for CliError {
    fn from(e: nmlcomp::Error) -> Self {
        CliError::Math(e)
    }
}

fn main() {
    if let Ok(v) = std::env::var("NML_THREADS") {
        match v.parse::<usize>() {
            Ok(k) if k >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global()
                    .ok();
            }
            _ => {
                eprintln!("error: NML_THREADS must be a positive integer, got {v:?}");
                std::process::exit(2);
            }
        }
    }
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Expand(args) => cmd_expand(args),
        Command::Complexity(args) => cmd_complexity(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

// ---------------------------------------------------------------------
// family construction
// ---------------------------------------------------------------------

fn build_family(args: &FamilyArgs) -> Result<ExpFamily<f64>, CliError> {
    match args.family.as_str() {
        "exp1d" => {
            if let Some(d) = args.dim {
                if d != 1 {
                    return Err(CliError::Config("exp1d has dimension 1".into()));
                }
            }
            Ok(ExpFamily::exponential_1d())
        }
        "normal-kv" => {
            let d = args
                .dim
                .ok_or_else(|| CliError::Config("normal-kv requires --dim".into()))?;
            ExpFamily::normal_known_var(d, args.sigma).map_err(CliError::Math)
        }
        "spherical" => {
            let d = args
                .dim
                .ok_or_else(|| CliError::Config("spherical requires --dim".into()))?;
            ExpFamily::spherical_normal_unknown_var(d).map_err(CliError::Math)
        }
        "poly" => {
            let path = args
                .poly_file
                .as_ref()
                .ok_or_else(|| CliError::Config("poly requires --poly-file".into()))?;
            let doc = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            ExpFamily::poly_partition_from_json(&doc)
                .map_err(|e| CliError::Config(e.to_string()))
        }
        other => Err(CliError::Config(format!(
            "unknown family `{other}` (expected exp1d | normal-kv | spherical | poly)"
        ))),
    }
}

fn default_theta(args: &FamilyArgs, fam: &ExpFamily<f64>) -> Vec<f64> {
    let d = fam.dim();
    match args.family.as_str() {
        "exp1d" => vec![-1.0],
        "spherical" => {
            let mut t = vec![0.0; d];
            t[d - 1] = -0.5;
            t
        }
        _ => vec![0.0; d],
    }
}

// ---------------------------------------------------------------------
// table output
// ---------------------------------------------------------------------

enum Val {
    UInt(u64),
    Num(f64),
    Str(String),
    Empty,
}

struct Table {
    command: &'static str,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Val>>,
}

/// 12 significant digits, stable across runs.
fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

fn json_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

impl Table {
    fn write(&self, out: &OutputArgs) -> Result<(), CliError> {
        let mut buf = Vec::new();
        match out.format {
            Format::Csv => self.write_csv(&mut buf),
            Format::Json => self.write_json(&mut buf),
        }
        .expect("writing to memory cannot fail");
        match &out.output {
            None => {
                if let Err(e) = std::io::stdout().write_all(&buf) {
                    // a closed pipe (e.g. `| head`) is not an error
                    if e.kind() == std::io::ErrorKind::BrokenPipe {
                        return Ok(());
                    }
                    return Err(CliError::Config(format!("cannot write output: {e}")));
                }
            }
            Some(path) => {
                std::fs::write(path, &buf).map_err(|e| {
                    CliError::Config(format!("cannot write {}: {e}", path.display()))
                })?;
            }
        }
        Ok(())
    }

    fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        write!(w, "schema_version")?;
        for c in &self.columns {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
        for row in &self.rows {
            write!(w, "{SCHEMA_VERSION}")?;
            for v in row {
                match v {
                    Val::UInt(x) => write!(w, ",{x}")?,
                    Val::Num(x) => write!(w, ",{}", fmt_num(*x))?,
                    Val::Str(s) => write!(w, ",{s}")?,
                    Val::Empty => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }

    fn write_json(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            w,
            "{{\"schema_version\": {SCHEMA_VERSION}, \"command\": \"{}\", \"rows\": [",
            self.command
        )?;
        for (k, row) in self.rows.iter().enumerate() {
            write!(w, "  {{")?;
            let mut first = true;
            for (c, v) in self.columns.iter().zip(row) {
                if matches!(v, Val::Empty) {
                    continue;
                }
                if !first {
                    write!(w, ", ")?;
                }
                first = false;
                match v {
                    Val::UInt(x) => write!(w, "\"{c}\": {x}")?,
                    Val::Num(x) => write!(w, "\"{c}\": {}", fmt_num(*x))?,
                    Val::Str(s) => write!(w, "\"{c}\": \"{}\"", json_escape(s))?,
                    Val::Empty => unreachable!(),
                }
            }
            writeln!(w, "}}{}", if k + 1 < self.rows.len() { "," } else { "" })?;
        }
        writeln!(w, "]}}")
    }
}

// ---------------------------------------------------------------------
// argument parsing helpers
// ---------------------------------------------------------------------

fn parse_theta(spec: &str, dim: usize) -> Result<Vec<f64>, CliError> {
    let vals: Result<Vec<f64>, _> = spec.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|_| CliError::Config(format!("cannot parse theta `{spec}`")))?;
    if vals.len() != dim {
        return Err(CliError::Config(format!(
            "theta `{spec}` has {} coordinates, family has dimension {dim}",
            vals.len()
        )));
    }
    Ok(vals)
}

fn parse_box(spec: &str) -> Result<Vec<(f64, f64)>, CliError> {
    spec.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("bad box interval `{part}`")))?;
            let lo = lo
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad box bound `{lo}`")))?;
            let hi = hi
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad box bound `{hi}`")))?;
            Ok((lo, hi))
        })
        .collect()
}

fn parse_range(spec: &str) -> Result<(u64, u64), CliError> {
    let (lo, hi) = match spec.split_once(':') {
        Some((lo, hi)) => (lo, hi),
        None => (spec, spec),
    };
    let lo = lo
        .trim()
        .parse::<u64>()
        .map_err(|_| CliError::Config(format!("bad range bound `{lo}`")))?;
    let hi = hi
        .trim()
        .parse::<u64>()
        .map_err(|_| CliError::Config(format!("bad range bound `{hi}`")))?;
    if lo > hi {
        return Err(CliError::Config(format!("empty range `{spec}`")));
    }
    Ok((lo, hi))
}

fn sample_sizes(args: &ComplexityArgs) -> Result<Vec<u64>, CliError> {
    let mut ns = args.n.clone();
    if let Some(spec) = &args.n_range {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Config(format!(
                "n-range `{spec}` must be lo:hi:step"
            )));
        }
        let lo: u64 = parts[0]
            .parse()
            .map_err(|_| CliError::Config(format!("bad n-range `{spec}`")))?;
        let hi: u64 = parts[1]
            .parse()
            .map_err(|_| CliError::Config(format!("bad n-range `{spec}`")))?;
        let step: u64 = parts[2]
            .parse()
            .map_err(|_| CliError::Config(format!("bad n-range `{spec}`")))?;
        if step == 0 || lo > hi {
            return Err(CliError::Config(format!("bad n-range `{spec}`")));
        }
        ns.extend((lo..=hi).step_by(step as usize));
    }
    if ns.is_empty() {
        return Err(CliError::Config(
            "no sample sizes: pass --n or --n-range".into(),
        ));
    }
    ns.sort_unstable();
    ns.dedup();
    Ok(ns)
}

// ---------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------

fn cmd_expand(args: ExpandArgs) -> Result<(), CliError> {
    if args.s > 2 {
        return Err(CliError::Config("order s must be 0, 1 or 2".into()));
    }
    let fam = build_family(&args.family)?;
    let points: Vec<Vec<f64>> = if args.theta.is_empty() {
        vec![default_theta(&args.family, &fam)]
    } else {
        args.theta
            .iter()
            .map(|spec| parse_theta(spec, fam.dim()))
            .collect::<Result<_, _>>()?
    };

    let mut rows = Vec::with_capacity(points.len());
    for theta in &points {
        let terms = expansion::expansion_terms(&fam, theta, args.s)?;
        let theta_str = theta.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(";");
        let mut row = vec![
            Val::Str(args.family.family.clone()),
            Val::UInt(fam.dim() as u64),
            Val::Str(fam.cramer().to_string()),
            Val::Str(theta_str),
        ];
        for i in 0..=2usize {
            row.push(match terms.f.get(i) {
                Some(&v) => Val::Num(v),
                None => Val::Empty,
            });
        }
        rows.push(row);
    }

    Table {
        command: "expand",
        columns: vec!["family", "dim", "cramer_ok", "theta", "f0", "f1", "f2"],
        rows,
    }
    .write(&args.output)
}

fn cmd_complexity(args: ComplexityArgs) -> Result<(), CliError> {
    if args.s > 2 {
        return Err(CliError::Config("order s must be 0, 1 or 2".into()));
    }
    let fam = build_family(&args.family)?;
    let bounds = parse_box(&args.box_spec)?;
    let region = Region::with_nodes(bounds, args.nodes)?;
    let ns = sample_sizes(&args)?;

    let mut rows = Vec::with_capacity(ns.len());
    for n in ns {
        let report = complexity::comp_approx(&fam, &region, n, args.s)?;
        rows.push(vec![
            Val::Str(args.family.family.clone()),
            Val::UInt(fam.dim() as u64),
            Val::UInt(report.n),
            Val::UInt(report.s as u64),
            Val::Num(report.vol_k),
            Val::Num(report.leading),
            Val::Num(report.log_integral),
            Val::Num(report.total),
        ]);
    }

    Table {
        command: "complexity",
        columns: vec![
            "family",
            "dim",
            "n",
            "s",
            "vol_k",
            "leading",
            "log_integral",
            "total",
        ],
        rows,
    }
    .write(&args.output)
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let (d_lo, d_hi) = parse_range(&args.d_range)?;
    let (n_lo, n_hi) = parse_range(&args.n_range)?;
    if d_lo < 2 {
        return Err(CliError::Config(
            "compare needs model dimension d >= 2".into(),
        ));
    }
    if (d_lo..=d_hi).all(|d| n_hi < d.max(2)) {
        return Err(CliError::Config(
            "every requested cell has n < d (under-determined models are rejected)".into(),
        ));
    }
    let rows = complexity::compare_grid::<f64>(d_lo as usize, d_hi as usize, n_lo, n_hi)?;

    Table {
        command: "compare",
        columns: vec!["d", "n", "over_s0", "over_s1"],
        rows: rows
            .into_iter()
            .map(|r| {
                vec![
                    Val::UInt(r.d as u64),
                    Val::UInt(r.n),
                    Val::Num(r.over_s0),
                    Val::Num(r.over_s1),
                ]
            })
            .collect(),
    }
    .write(&args.output)
}

// ---------------------------------------------------------------------
// validation suites
// ---------------------------------------------------------------------

struct SuiteOutcome {
    name: &'static str,
    detail: Result<String, String>,
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let run_all = args.suite == "all";
    let mut outcomes = Vec::new();
    match args.suite.as_str() {
        "hermite" | "ac" | "exp-oracle" | "all" => {}
        other => {
            return Err(CliError::Config(format!(
                "unknown suite `{other}` (expected hermite | ac | exp-oracle | all)"
            )))
        }
    }
    if run_all || args.suite == "hermite" {
        outcomes.push(SuiteOutcome {
            name: "hermite",
            detail: suite_hermite(args.seed),
        });
    }
    if run_all || args.suite == "ac" {
        outcomes.push(SuiteOutcome {
            name: "ac",
            detail: suite_ac(args.seed, args.samples),
        });
    }
    if run_all || args.suite == "exp-oracle" {
        outcomes.push(SuiteOutcome {
            name: "exp-oracle",
            detail: suite_exp_oracle(),
        });
    }

    let mut failed = 0;
    for o in &outcomes {
        match &o.detail {
            Ok(d) => println!("PASS {}: {d}", o.name),
            Err(d) => {
                failed += 1;
                println!("FAIL {}: {d}", o.name);
            }
        }
    }
    if failed > 0 {
        return Err(CliError::Validation(format!("{failed} suite(s) failed")));
    }
    Ok(())
}

fn random_spd(d: usize, rng: &mut ChaCha8Rng) -> Metric<f64> {
    let a: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut m = vec![0.0f64; d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                m[i * d + j] += a[k * d + i] * a[k * d + j];
            }
        }
        m[i * d + i] += 0.5 * d as f64;
    }
    Metric::new(d, m).expect("constructed SPD")
}

/// Pairing-formula Hermite numbers against the explicit rank-4 and rank-6
/// sums on every index tuple, for seeded random SPD metrics at d ≤ 3.
fn suite_hermite(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0usize;
    for d in 1..=3usize {
        for _ in 0..3 {
            let g = random_spd(d, &mut rng);
            for rank in [4usize, 6] {
                let mut idx = vec![0usize; rank];
                loop {
                    let alpha =
                        MultiIndex::from_indices(d, &idx).map_err(|e| e.to_string())?;
                    let a = hermite::hermite_number(&alpha, &g).map_err(|e| e.to_string())?;
                    let b = if rank == 4 {
                        hermite::hermite_rank4_explicit([idx[0], idx[1], idx[2], idx[3]], &g)
                    } else {
                        hermite::hermite_rank6_explicit(
                            [idx[0], idx[1], idx[2], idx[3], idx[4], idx[5]],
                            &g,
                        )
                    }
                    .map_err(|e| e.to_string())?;
                    if (a - b).abs() > 1e-10 * b.abs().max(1.0) {
                        return Err(format!(
                            "pairing vs explicit mismatch at d={d} rank={rank} {idx:?}: {a} vs {b}"
                        ));
                    }
                    checked += 1;
                    let mut k = rank;
                    let done = loop {
                        if k == 0 {
                            break true;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < d {
                            break false;
                        }
                        idx[k] = 0;
                    };
                    if done {
                        break;
                    }
                }
            }
        }
    }
    Ok(format!("{checked} index tuples agree within 1e-10"))
}

/// Monte Carlo estimates of the Amari-Chentsov tensors against the
/// recurrence outputs for exponential data at θ = −1.
fn suite_ac(seed: u64, samples: u64) -> Result<String, String> {
    let fam = ExpFamily::<f64>::exponential_1d();
    let theta = [-1.0];
    for r in 2..=4usize {
        let analytic = expansion::amari_chentsov(&fam, &theta, r).map_err(|e| e.to_string())?;
        let report = complexity::mc_validate_ac(&fam, &theta, r, samples, seed)
            .map_err(|e| e.to_string())?;
        for est in &report.estimates {
            let want = analytic.value(&est.alpha);
            if (est.mean - want).abs() > 3.0 * est.std_error {
                return Err(format!(
                    "rank {r}: mc {} +- {} vs analytic {want}",
                    est.mean, est.std_error
                ));
            }
        }
    }
    Ok(format!(
        "ranks 2..4 within 3 s.e. of {samples}-sample estimates (seed {seed})"
    ))
}

/// The exponential-data closed form against direct numerical integration
/// of the Gamma density of the sample mean at n ∈ {1, 2, 3}.
fn suite_exp_oracle() -> Result<String, String> {
    let (a, b) = (0.5f64, 2.0f64);
    for n in 1..=3u64 {
        let nf = n as f64;
        let gamma_n = [1.0, 1.0, 2.0][n as usize - 1];
        let density = |t: f64| {
            (nf / t).powi(n as i32) * t.powi(n as i32 - 1) * (-nf).exp() / gamma_n
        };
        let (xs, ws) = quad::gauss_legendre_on::<f64>(64, 1.0 / b, 1.0 / a);
        let integral: f64 = xs.iter().zip(&ws).map(|(t, w)| w * density(*t)).sum();
        let exact =
            complexity::exact_comp_exponential(a, b, n).map_err(|e| e.to_string())?;
        if (integral.ln() - exact).abs() > 1e-6 {
            return Err(format!(
                "n={n}: numerical {} vs closed form {exact}",
                integral.ln()
            ));
        }
    }
    Ok("closed form matches numerical integration at n in {1,2,3} (1e-6)".into())
}
