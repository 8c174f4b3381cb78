//! Command-line front end: every experiment is a subcommand with reproducible
//! configuration and machine-readable CSV/JSON output.
//!
//! Exit codes: 0 = success and all asserted properties passed; 1 = a property
//! violation was detected (violations are listed in the output); 2 = usage or
//! domain error.

use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use besselwalk::bessel_diffusion::DiffusionConfig;
use besselwalk::interval_kernels::Boundary;
use besselwalk::sphere_walk::TestFunction;

mod commands;
mod output;

use commands::Mode;
use output::{Format, Table};

#[derive(Parser)]
#[command(
    name = "besselwalk",
    version,
    about = "Exact kernels and Monte-Carlo estimators for reflected radial walks and Bessel diffusions"
)]
struct Cli {
    /// Worker threads for path-parallel runs (default: machine parallelism).
    /// Results are independent of this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Output path (standard output when omitted).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BoundaryArg {
    Neumann,
    Dirichlet,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FunctionArg {
    Linear,
    CoordQuadratic,
    RadialQuadratic,
    CrossProduct,
}

impl From<FunctionArg> for TestFunction {
    fn from(f: FunctionArg) -> TestFunction {
        match f {
            FunctionArg::Linear => TestFunction::Linear,
            FunctionArg::CoordQuadratic => TestFunction::CoordinateQuadratic,
            FunctionArg::RadialQuadratic => TestFunction::RadialQuadratic,
            FunctionArg::CrossProduct => TestFunction::CrossProduct,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Loop products p(1,m,m+1) p(1,m+1,m) with the closed form and the
    /// nondecreasing/capped checks.
    LoopCheck {
        #[arg(long)]
        d: u32,
        #[arg(long = "N")]
        radius: u32,
        /// Exact big-rational arithmetic instead of f64.
        #[arg(long)]
        rational: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Kernel diagonal p_N(n,m,m) and its nondecrease across states.
    DiagMonotone {
        #[arg(long)]
        d: u32,
        #[arg(long = "N")]
        radius: u32,
        #[arg(long)]
        n: u32,
        /// Check every step up to n instead of only step n.
        #[arg(long)]
        scan: bool,
        #[arg(long)]
        rational: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Shifted-kernel inequality p_N(n,m,m') <= p_N(n,m+p,m'+p).
    ShiftMonotone {
        #[arg(long)]
        d: u32,
        #[arg(long = "N")]
        radius: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        rational: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One n-step kernel row p_N(n, m0, .); emits states with nonzero mass.
    KernelRow {
        #[arg(long)]
        d: u32,
        #[arg(long = "N")]
        radius: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m0: u32,
        #[arg(long)]
        rational: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Expected visits to y within a horizon; all states when --y is omitted
    /// (with the nondecreasing-in-y check).
    LocalTime {
        #[arg(long)]
        d: u32,
        #[arg(long = "N")]
        radius: u32,
        #[arg(long)]
        horizon: u32,
        #[arg(long)]
        y: Option<u32>,
        #[arg(long)]
        rational: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Log-log slope of E^N(L_N^{N^2}) across reflection radii.
    LocalTimeScaling {
        #[arg(long)]
        d: u32,
        /// Comma-separated radii, e.g. 16,32,64,128.
        #[arg(long = "N-list")]
        radii: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate the full d-dimensional walk; histogram of final norms.
    SphereSimulate {
        #[arg(long)]
        d: u32,
        #[arg(long = "N")]
        radius: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        start_norm: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Chi-square test of simulated |X^N_n| against the exact DP row.
    RadialLawCheck {
        #[arg(long)]
        d: u32,
        #[arg(long = "N")]
        radius: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        start_norm: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Single-jump generator probe: 2 N^2 E[f(X_1/N) - f(x/N)] vs the
    /// Laplacian of f, at the axis point of norm m0.
    GeneratorCheck {
        #[arg(long, value_enum)]
        function: FunctionArg,
        #[arg(long)]
        d: u32,
        #[arg(long = "N")]
        scale: u32,
        #[arg(long)]
        m0: u32,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Closed-form free 2-d Bessel kernel q(t, r, rho) on a rho grid.
    #[command(name = "free-kernel-2d")]
    FreeKernel2d {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        r: f64,
        /// Grid: "start:stop:count" or comma-separated values.
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Window estimates of the reflected diagonal density on a radius grid.
    EstimateDiagonal {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        t: f64,
        /// Step size (default: 1e-5 for t <= 0.01, else 1e-4).
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        /// Window width (default: min(0.01, grid spacing / 2)).
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// d = 2 small-time non-monotonicity experiment at r = sqrt(t), 2 sqrt(t).
    #[command(name = "counterexample-2d")]
    Counterexample2d {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 200_000)]
        paths: u64,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// d >= 3 diagonal monotonicity probe over a radius grid.
    MonotonicityProbe {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        grid: String,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Interval diagonal heat kernel by eigenfunction series.
    IntervalKernel {
        #[arg(long)]
        t: f64,
        #[arg(long, value_enum)]
        boundary: BoundaryArg,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long)]
        truncation: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Neumann + Dirichlet = C_t and the derivative cancellation, on a grid.
    IntervalIdentity {
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    if let Some((range, count)) = s.rsplit_once(':').and_then(|(head, c)| {
        head.split_once(':').map(|(a, b)| ((a, b), c))
    }) {
        let (a, b) = range;
        let start: f64 = a.parse().map_err(|_| format!("bad grid start {a:?}"))?;
        let stop: f64 = b.parse().map_err(|_| format!("bad grid stop {b:?}"))?;
        let count: usize = count.parse().map_err(|_| format!("bad grid count {count:?}"))?;
        if count < 1 {
            return Err("grid count must be at least 1".into());
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let step = (stop - start) / (count - 1) as f64;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad grid value {v:?}"))
        })
        .collect()
}

fn parse_u32_list(s: &str) -> Result<Vec<u32>, String> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<u32>()
                .map_err(|_| format!("bad integer {v:?}"))
        })
        .collect()
}

fn grid_default_epsilon(grid: &[f64], epsilon: Option<f64>) -> f64 {
    match epsilon {
        Some(e) => e,
        None => {
            let spacing = grid
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min);
            if spacing.is_finite() {
                (spacing / 2.0).min(0.01)
            } else {
                0.01
            }
        }
    }
}

fn mode_of(rational: bool) -> Mode {
    if rational {
        Mode::Rational
    } else {
        Mode::Float
    }
}

fn ok(
    r: besselwalk::Result<(Table, bool)>,
    o: &OutputArgs,
) -> Result<(Table, bool, &OutputArgs), String> {
    match r {
        Ok((t, v)) => Ok((t, v, o)),
        Err(e) => Err(e.to_string()),
    }
}

fn run(command: &Command) -> Result<(Table, bool, &OutputArgs), String> {
    match command {
        Command::LoopCheck {
            d,
            radius,
            rational,
            output,
        } => ok(commands::loop_check(*d, *radius, mode_of(*rational)), output),
        Command::DiagMonotone {
            d,
            radius,
            n,
            scan,
            rational,
            output,
        } => ok(
            commands::diag_monotone(*d, *radius, *n, *scan, mode_of(*rational)),
            output,
        ),
        Command::ShiftMonotone {
            d,
            radius,
            n,
            rational,
            output,
        } => ok(
            commands::shift_monotone(*d, *radius, *n, mode_of(*rational)),
            output,
        ),
        Command::KernelRow {
            d,
            radius,
            n,
            m0,
            rational,
            output,
        } => ok(
            commands::kernel_row(*d, *radius, *n, *m0, mode_of(*rational)),
            output,
        ),
        Command::LocalTime {
            d,
            radius,
            horizon,
            y,
            rational,
            output,
        } => ok(
            commands::local_time(*d, *radius, *horizon, *y, mode_of(*rational)),
            output,
        ),
        Command::LocalTimeScaling { d, radii, output } => {
            let radii = parse_u32_list(radii)?;
            ok(commands::local_time_scaling(*d, &radii), output)
        }
        Command::SphereSimulate {
            d,
            radius,
            n,
            paths,
            seed,
            start_norm,
            output,
        } => ok(
            commands::sphere_simulate(*d, *radius, *n, *paths, *seed, *start_norm),
            output,
        ),
        Command::RadialLawCheck {
            d,
            radius,
            n,
            paths,
            seed,
            start_norm,
            output,
        } => ok(
            commands::radial_law_check(*d, *radius, *n, *paths, *seed, *start_norm),
            output,
        ),
        Command::GeneratorCheck {
            function,
            d,
            scale,
            m0,
            samples,
            seed,
            output,
        } => ok(
            commands::generator_check((*function).into(), *d, *scale, *m0, *samples, *seed),
            output,
        ),
        Command::FreeKernel2d { t, r, grid, output } => {
            let grid = parse_grid(grid)?;
            ok(commands::free_kernel_2d(*t, *r, &grid), output)
        }
        Command::EstimateDiagonal {
            d,
            t,
            dt,
            paths,
            epsilon,
            seed,
            grid,
            output,
        } => {
            let grid = parse_grid(grid)?;
            let dt = dt.unwrap_or_else(|| DiffusionConfig::default_dt(*t));
            let epsilon = grid_default_epsilon(&grid, *epsilon);
            ok(
                commands::estimate_diagonal(*d, *t, dt, *paths, epsilon, *seed, &grid),
                output,
            )
        }
        Command::Counterexample2d {
            t,
            dt,
            paths,
            epsilon,
            seed,
            output,
        } => {
            let dt = dt.unwrap_or_else(|| DiffusionConfig::default_dt(*t));
            ok(
                commands::counterexample_2d(*t, dt, *paths, *epsilon, *seed),
                output,
            )
        }
        Command::MonotonicityProbe {
            d,
            t,
            grid,
            dt,
            paths,
            epsilon,
            seed,
            output,
        } => {
            let grid = parse_grid(grid)?;
            let dt = dt.unwrap_or_else(|| DiffusionConfig::default_dt(*t));
            let epsilon = grid_default_epsilon(&grid, *epsilon);
            ok(
                commands::monotonicity_probe(*d, *t, &grid, dt, *paths, epsilon, *seed),
                output,
            )
        }
        Command::IntervalKernel {
            t,
            boundary,
            points,
            truncation,
            output,
        } => {
            let boundary = match boundary {
                BoundaryArg::Neumann => Boundary::Neumann,
                BoundaryArg::Dirichlet => Boundary::Dirichlet,
            };
            if *points < 2 {
                return Err("need at least 2 grid points".into());
            }
            ok(
                commands::interval_kernel(*t, boundary, *points, *truncation),
                output,
            )
        }
        Command::IntervalIdentity { t, points, output } => {
            if *points < 2 {
                return Err("need at least 2 grid points".into());
            }
            ok(commands::interval_identity(*t, *points), output)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("besselwalk: failed to configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli.command) {
        Ok((table, violation, output_args)) => {
            let format: Format = output_args.format.into();
            let result = match &output_args.out {
                Some(path) => File::create(path)
                    .map_err(|e| format!("cannot create {}: {e}", path.display()))
                    .and_then(|mut f| {
                        output::write(&table, format, &mut f).map_err(|e| e.to_string())
                    }),
                None => {
                    let stdout = io::stdout();
                    let mut lock = stdout.lock();
                    output::write(&table, format, &mut lock)
                        .and_then(|()| lock.flush())
                        .map_err(|e| e.to_string())
                }
            };
            if let Err(e) = result {
                eprintln!("besselwalk: {e}");
                return ExitCode::from(2);
            }
            if violation {
                eprintln!("besselwalk: property violation detected (see output)");
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(message) => {
            eprintln!("besselwalk: {message}");
            ExitCode::from(2)
        }
    }
}
