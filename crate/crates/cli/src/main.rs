mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use qv_core::embed::{build_frame, decode, xi, DecodeOptions, DirectionFrame, EmbeddedVector, FrameOptions};
use qv_core::energy::{
    complex_sqrt_pair, discrete_energy, solve_dirichlet, trace, truncate_coords, BoundaryData, Grid, GridFunction,
    InnerSolver, SolveOptions,
};
use qv_core::extend::{extend_to_plane, BoundarySample, ConeExtension, DataPoint, DomainBox, WhitneyExtension};
use qv_core::random::{random_tuple, seeded};
use qv_core::verify::{run_all, CheckConfig};
use qv_core::{dist, MetricKind, QTuple};

use io::{csv_line, read_json, read_rows, write_json};

#[derive(Parser)]
#[command(
    name = "qv",
    version,
    about = "Unordered Q-tuples: metrics, embeddings, extensions and p-energy minimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance and optimal matching between two tuples.
    Dist {
        #[arg(long, value_enum, default_value = "g2")]
        kind: Kind,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Almgren embedding of a tuple, printed as CSV.
    Embed {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        tuple: PathBuf,
    },
    /// Nearest tuple to an embedded vector given as one CSV row.
    Decode {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        hint: Option<PathBuf>,
    },
    /// Builds a direction frame.
    Frame {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        /// Number of bases; chosen automatically when absent.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lipschitz extension of sampled data.
    Extend {
        #[arg(value_enum)]
        method: ExtendMethod,
        #[arg(long = "in")]
        input: PathBuf,
        /// Query points, one per CSV row (cone and whitney).
        #[arg(long)]
        query: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimizes the discrete p-energy with fixed boundary values.
    Solve(SolveArgs),
    /// Discrete p-energy of a grid function.
    Energy {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Per-edge CSV: a,b,axis,contribution,matching.
        #[arg(long)]
        edges: Option<PathBuf>,
    },
    /// Boundary values of a grid function.
    Trace {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Keeps the first coordinates of every point.
    Truncate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs the property checks.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Writes sample inputs.
    Gen {
        #[command(subcommand)]
        what: Gen,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Boundary data: curve samples {"domain","samples"} or a grid function.
    #[arg(long)]
    boundary: PathBuf,
    /// Nodes per axis when the boundary is given as curve samples.
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    max_outer: usize,
    #[arg(long, value_enum, default_value = "auto")]
    inner: Inner,
    #[arg(long, default_value = "sol.json")]
    out: PathBuf,
    #[arg(long, default_value = "hist.csv")]
    history: PathBuf,
}

#[derive(Subcommand)]
enum Gen {
    /// The pair of complex square roots on the unit circle.
    Sqrt2 {
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Affine scalar data a.x + c on the boundary of a square grid over [-1, 1]^2.
    Affine {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.3,-1.2")]
        a: Vec<f64>,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// A random tuple.
    Tuple {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    G1,
    G2,
    Ginf,
}

impl From<Kind> for MetricKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::G1 => MetricKind::G1,
            Kind::G2 => MetricKind::G2,
            Kind::Ginf => MetricKind::GInf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExtendMethod {
    Cone,
    Whitney,
    Plane,
}

#[derive(Clone, Copy, ValueEnum)]
enum Inner {
    Auto,
    P2Linear,
    Gradient,
}

/// Input of `qv extend whitney`.
#[derive(Deserialize)]
struct WhitneyInput {
    domain: DomainBox,
    #[serde(default = "default_depth")]
    depth: u32,
    points: Vec<DataPoint>,
}

fn default_depth() -> u32 {
    10
}

#[derive(Serialize)]
struct QueryValue {
    location: Vec<f64>,
    value: QTuple,
}

fn emit(out: Option<&PathBuf>, value: &impl Serialize) -> Result<()> {
    match out {
        Some(p) => write_json(p, value),
        None => {
            println!("{}", serde_json::to_string(value)?);
            Ok(())
        }
    }
}

fn queries(path: Option<&PathBuf>) -> Result<Vec<Vec<f64>>> {
    let Some(p) = path else {
        bail!("--query is required for this method")
    };
    read_rows(p)
}

fn load_boundary(args: &SolveArgs) -> Result<GridFunction> {
    let value: serde_json::Value = read_json(&args.boundary)?;
    if value.get("domain").is_some() {
        let data: BoundaryData = serde_json::from_value(value).context("boundary data")?;
        let data = BoundaryData::new(data.domain, data.samples)?;
        let grid = data.grid(args.grid)?;
        Ok(data.on_grid(&grid)?)
    } else {
        Ok(serde_json::from_value(value).context("boundary grid function")?)
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Dist { kind, a, b } => {
            let (a, b): (QTuple, QTuple) = (read_json(&a)?, read_json(&b)?);
            let (d, m) = dist(&a, &b, kind.into())?;
            println!("{}", json!({"distance": d, "matching": m}));
        }
        Command::Embed { frame, tuple } => {
            let frame: DirectionFrame = read_json(&frame)?;
            let v: QTuple = read_json(&tuple)?;
            println!("{}", csv_line(xi(&v, &frame)?.coords()));
        }
        Command::Decode { frame, input, hint } => {
            let frame: DirectionFrame = read_json(&frame)?;
            let rows = read_rows(&input)?;
            let Some(z) = rows.into_iter().next() else {
                bail!("{} holds no vector", input.display())
            };
            let hint: Option<QTuple> = hint.map(|h| read_json(&h)).transpose()?;
            let v = decode(&EmbeddedVector(z), &frame, hint.as_ref(), &DecodeOptions::default())?;
            println!("{}", serde_json::to_string(&v)?);
        }
        Command::Frame { n, q, k, seed, out } => {
            let opts = FrameOptions {
                k,
                ..FrameOptions::with_seed(seed)
            };
            emit(out.as_ref(), &build_frame(n, q, &opts)?)?;
        }
        Command::Extend {
            method,
            input,
            query,
            out,
        } => match method {
            ExtendMethod::Cone => {
                let data: BoundarySample = read_json(&input)?;
                let ext = ConeExtension::new(BoundarySample::new(data.radius, data.points)?)?;
                let vals = queries(query.as_ref())?
                    .into_iter()
                    .map(|x| {
                        Ok(QueryValue {
                            value: ext.evaluate(&x)?,
                            location: x,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                emit(out.as_ref(), &vals)?;
            }
            ExtendMethod::Whitney => {
                let data: WhitneyInput = read_json(&input)?;
                let domain = DomainBox::new(data.domain.lo, data.domain.hi)?;
                let ext = WhitneyExtension::new(data.points, &domain, data.depth)?;
                let vals = queries(query.as_ref())?
                    .into_iter()
                    .map(|x| {
                        Ok(QueryValue {
                            value: ext.evaluate(&x)?,
                            location: x,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                emit(out.as_ref(), &vals)?;
            }
            ExtendMethod::Plane => {
                let f: GridFunction = read_json(&input)?;
                emit(out.as_ref(), &extend_to_plane(&f)?)?;
            }
        },
        Command::Solve(args) => {
            let data = load_boundary(&args)?;
            let opts = SolveOptions {
                max_outer: args.max_outer,
                tol: args.tol,
                inner: match args.inner {
                    Inner::Auto => InnerSolver::Auto,
                    Inner::P2Linear => InnerSolver::P2Linear,
                    Inner::Gradient => InnerSolver::Gradient,
                },
                restarts: args.restarts,
                seed: args.seed,
                ..SolveOptions::default()
            };
            let sol = solve_dirichlet(&data, args.p, &opts)?;
            write_json(&args.out, &sol.solution)?;
            let mut w = csv::Writer::from_path(&args.history)
                .with_context(|| format!("cannot write {}", args.history.display()))?;
            w.write_record(["iteration", "total_energy"])?;
            for (i, e) in sol.history.iter().enumerate() {
                w.write_record([i.to_string(), e.to_string()])?;
            }
            w.flush()?;
            println!(
                "{}",
                json!({
                    "energy": sol.report.total,
                    "iterations": sol.report.iterations,
                    "converged": sol.report.converged,
                    "runs": sol.runs,
                })
            );
        }
        Command::Energy { input, p, edges } => {
            let f: GridFunction = read_json(&input)?;
            let report = discrete_energy(&f, p)?;
            if let Some(path) = edges {
                let mut w =
                    csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))?;
                w.write_record(["a", "b", "axis", "contribution", "matching"])?;
                for e in &report.per_edge {
                    let m = e
                        .matching
                        .perm()
                        .iter()
                        .map(|j| j.to_string())
                        .collect::<Vec<_>>()
                        .join(" ");
                    w.write_record([
                        e.edge.a.to_string(),
                        e.edge.b.to_string(),
                        e.edge.axis.to_string(),
                        e.contribution.to_string(),
                        m,
                    ])?;
                }
                w.flush()?;
            }
            println!(
                "{}",
                json!({"total": report.total, "p": p, "edges": report.per_edge.len()})
            );
        }
        Command::Trace { input, out } => {
            let f: GridFunction = read_json(&input)?;
            emit(out.as_ref(), &trace(&f)?)?;
        }
        Command::Truncate { input, n, out } => {
            let f: GridFunction = read_json(&input)?;
            write_json(&out, &truncate_coords(&f, n)?)?;
        }
        Command::Verify {
            config,
            report,
            seed,
            trials,
        } => {
            let mut cfg: CheckConfig = match config {
                Some(p) => read_json(&p)?,
                None => CheckConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            let reports = run_all(&cfg)?;
            for r in &reports {
                println!(
                    "{:<20} {} trials={} failures={} worst_ratio={:.6e}",
                    r.name,
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.trials,
                    r.failures,
                    r.worst_ratio
                );
            }
            if let Some(p) = report {
                write_json(&p, &reports)?;
            }
            return Ok(reports.iter().all(|r| r.passed()));
        }
        Command::Gen { what } => match what {
            Gen::Sqrt2 { samples, out } => {
                write_json(&out, &BoundaryData::circle(samples, complex_sqrt_pair)?)?;
            }
            Gen::Affine { a, c, grid, out } => {
                if a.len() != 2 {
                    bail!("--a needs two comma-separated slopes");
                }
                let g = Grid::cube(2, grid, -1.0, 1.0)?;
                let f = GridFunction::from_fn(g, |x| {
                    let v = if x[0].abs() == 1.0 || x[1].abs() == 1.0 {
                        a[0] * x[0] + a[1] * x[1] + c
                    } else {
                        0.0
                    };
                    QTuple::scalars(&[v]).expect("one value")
                })?;
                write_json(&out, &f)?;
            }
            Gen::Tuple { q, n, seed, out } => {
                let mut rng = seeded(seed);
                emit(out.as_ref(), &random_tuple(&mut rng, q, n))?;
            }
        },
    }
    Ok(true)
}

fn configure_threads() {
    if let Some(n) = std::env::var("QV_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
