//! `fraclab` — fractional derivatives, fractional Laplacians, maximal
//! operators, and weight-class estimators on the command line.
//!
//! Exit codes: 0 on success, 1 on configuration errors, 2 on numerical
//! non-convergence.

use clap::{Args, Parser, Subcommand, ValueEnum};
use fraclab_core::catalog::CatalogEntry;
use fraclab_core::fracderiv;
use fraclab_core::fraclap;
use fraclab_core::maximal;
use fraclab_core::weight::{LatticeSpec, Weight1D, PRODUCT_CAP};
use fraclab_core::{FracError, FracOrder, Grid1D, GridND, SampledFunction1D, SampledFunctionND};
use fraclab_harness::report::write_points_csv;
use fraclab_harness::{ExperimentConfig, HarnessError};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "fraclab",
    version,
    about = "Numerical one-sided fractional derivatives, fractional Laplacians, maximal operators, and weight-class estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Left end of the sampling grid
    #[arg(long = "grid-min", allow_hyphen_values = true)]
    grid_min: Option<f64>,
    /// Right end of the sampling grid
    #[arg(long = "grid-max", allow_hyphen_values = true)]
    grid_max: Option<f64>,
    /// Number of grid points per axis
    #[arg(long = "grid-points")]
    grid_points: Option<usize>,
}

impl GridArgs {
    fn build(&self, default: (f64, f64, usize)) -> Result<Grid1D, FracError> {
        Grid1D::new(
            self.grid_min.unwrap_or(default.0),
            self.grid_max.unwrap_or(default.1),
            self.grid_points.unwrap_or(default.2),
        )
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DerivSide {
    Left,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum LapMethodArg {
    Semigroup,
    Pv,
    Spectral,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightSide {
    Minus,
    Plus,
    #[value(name = "two-sided")]
    TwoSided,
}

#[derive(Clone, Copy, ValueEnum)]
enum MaximalOp {
    Mminus,
    Mplus,
    Mhl,
    #[value(name = "tstar-deriv")]
    TstarDeriv,
    #[value(name = "tstar-lap")]
    TstarLap,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a one-sided fractional derivative (or the order -alpha
    /// integral with --weyl) of a catalog function on a grid
    FracDeriv {
        /// Catalog function, e.g. gaussian, bump, cosine(2)
        #[arg(long = "fn")]
        function: String,
        /// Fractional order in (0, 1)
        #[arg(long)]
        alpha: f64,
        /// Which side the differences reach
        #[arg(long, value_enum, default_value_t = DerivSide::Left)]
        side: DerivSide,
        /// Evaluate the inverse (order -alpha) integral instead
        #[arg(long)]
        weyl: bool,
        #[command(flatten)]
        grid: GridArgs,
        /// Output CSV path (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the fractional Laplacian of a catalog function
    FracLaplacian {
        #[arg(long = "fn")]
        function: String,
        /// Fractional order in (0, 1)
        #[arg(long)]
        s: f64,
        #[arg(long, value_enum, default_value_t = LapMethodArg::Pv)]
        method: LapMethodArg,
        /// Dimension (1..=3; full grids up to 2)
        #[arg(long = "n", default_value_t = 1)]
        dim: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weight-class estimators
    Weights {
        #[command(subcommand)]
        action: WeightsAction,
    },
    /// Maximal operators and order-supremum fields
    Maximal {
        #[arg(long, value_enum)]
        op: MaximalOp,
        #[arg(long = "fn")]
        function: String,
        /// Order lattice for the tstar operators (comma separated)
        #[arg(long, value_delimiter = ',')]
        orders: Vec<f64>,
        /// Dimension for mhl/tstar-lap
        #[arg(long = "n", default_value_t = 1)]
        dim: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a configured experiment and emit its report
    Sweep {
        /// Path to the experiment config file
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = EmitFormat::Csv)]
        format: EmitFormat,
        /// Output path; overrides `out` from the config (stdout when both
        /// are absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in functions and weights
    Catalog,
}

#[derive(Subcommand)]
enum WeightsAction {
    /// Scan a weight condition over a dyadic lattice; emits (a, h, product)
    Check {
        /// Weight designator, e.g. exp_decay(1), power(0.5)
        #[arg(long)]
        weight: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_enum, default_value_t = WeightSide::Minus)]
        side: WeightSide,
        #[arg(long, default_value_t = -10, allow_hyphen_values = true)]
        jmin: i32,
        #[arg(long, default_value_t = 10)]
        jmax: i32,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    if let Ok(threads) = std::env::var("FRACLAB_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("fraclab: FRACLAB_THREADS must be a positive integer");
                std::process::exit(1);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes; anything else is a
            // configuration error
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("fraclab: {e}");
            std::process::exit(exit_code_of(&e));
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] FracError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

fn exit_code_of(e: &CliError) -> i32 {
    match e {
        CliError::Core(err) => match err {
            FracError::QuadratureNotConverged(_)
            | FracError::TruncationBudgetExceeded(_)
            | FracError::IntegralOverflow { .. } => 2,
            _ => 1,
        },
        CliError::Harness(err) => err.exit_code(),
        CliError::Io(_) | CliError::Usage(_) => 1,
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::FracDeriv { function, alpha, side, weyl, grid, out } => {
            let entry = CatalogEntry::parse(&function)?;
            let grid = grid.build((-8.0, 8.0, 129))?;
            let f = SampledFunction1D::sample(&entry, &grid)?;
            let order = FracOrder::new(alpha)?;
            let spec = fraclab_core::QuadratureSpec::default();
            let result = if weyl {
                fracderiv::weyl_integral(&f, &order, &spec)?
            } else {
                match side {
                    DerivSide::Left => fracderiv::marchaud_left(&f, &order, &spec)?,
                    DerivSide::Right => fracderiv::marchaud_right(&f, &order, &spec)?,
                }
            };
            let csv = write_points_csv(
                &["t", "value", "error_estimate"],
                result
                    .points
                    .iter()
                    .zip(&result.values)
                    .zip(&result.error_estimate)
                    .map(|((t, v), e)| vec![*t, *v, *e]),
            );
            write_output(&out, &csv)
        }
        Command::FracLaplacian { function, s, method, dim, grid, out } => {
            let entry = CatalogEntry::parse(&function)?;
            let order = FracOrder::new(s)?;
            let spec = fraclab_core::QuadratureSpec::default();
            // the spectral oracle needs one full period; default to [0, 2pi]
            let default_grid = match method {
                LapMethodArg::Spectral => (0.0, 2.0 * std::f64::consts::PI, 129),
                _ => (-8.0, 8.0, if dim == 1 { 129 } else { 33 }),
            };
            let axis = grid.build(default_grid)?;
            let nd = GridND::new(vec![axis.clone(); dim])?;
            let f = SampledFunctionND::sample(&entry, &nd)?;
            let (points, values, errors) = match method {
                LapMethodArg::Pv => {
                    let r = fraclap::frac_laplacian_pv(&f, &order, &spec)?;
                    (r.points, r.values, r.error_estimate)
                }
                LapMethodArg::Semigroup => {
                    let r = fraclap::frac_laplacian_semigroup(&f, &order, &spec)?;
                    (r.points, r.values, r.error_estimate)
                }
                LapMethodArg::Spectral => {
                    if dim == 1 {
                        let f1 = SampledFunction1D::sample(&entry, &axis)?;
                        let r = fraclap::spectral_fraclap_1d(&f1, &order)?;
                        let points: Vec<Vec<f64>> = axis.points().map(|t| vec![t]).collect();
                        let values = r.values().to_vec();
                        let errors = vec![0.0; values.len()];
                        (points, values, errors)
                    } else if dim == 2 {
                        let r = fraclap::spectral_fraclap_2d(&f, &order)?;
                        let points: Vec<Vec<f64>> =
                            (0..nd.n_total()).map(|i| nd.point(i)).collect();
                        let values = r.values().to_vec();
                        let errors = vec![0.0; values.len()];
                        (points, values, errors)
                    } else {
                        return Err(CliError::Usage(
                            "the spectral oracle supports dimensions 1 and 2".into(),
                        ));
                    }
                }
            };
            let mut header: Vec<&str> = vec!["x"];
            if dim >= 2 {
                header.push("x2");
            }
            if dim >= 3 {
                header.push("x3");
            }
            header.push("value");
            header.push("error_estimate");
            let csv = write_points_csv(
                &header,
                points.iter().zip(&values).zip(&errors).map(|((x, v), e)| {
                    let mut row = x.clone();
                    row.push(*v);
                    row.push(*e);
                    row
                }),
            );
            write_output(&out, &csv)
        }
        Command::Weights { action } => match action {
            WeightsAction::Check { weight, p, side, jmin, jmax, grid, out } => {
                if jmin > jmax {
                    return Err(CliError::Usage("jmin must not exceed jmax".into()));
                }
                let w = Weight1D::parse(&weight)?;
                let centers = grid.build((-8.0, 8.0, 17))?;
                let lat = LatticeSpec::dyadic(&centers, jmin, jmax)?;
                let scan = match side {
                    WeightSide::Minus => fraclab_core::weight::sawyer_minus_scan(&w, p, &lat)?,
                    WeightSide::Plus => fraclab_core::weight::sawyer_plus_scan(&w, p, &lat)?,
                    WeightSide::TwoSided => {
                        fraclab_core::weight::muckenhoupt_scan_1d(&w, p, &lat)?
                    }
                };
                let csv = write_points_csv(
                    &["a", "h", "product"],
                    scan.rows.iter().map(|r| vec![r.center, r.scale, r.product]),
                );
                write_output(&out, &csv)?;
                match scan.cap_exceeded {
                    Some(row) => eprintln!(
                        "not in class at cap {PRODUCT_CAP:.1e}: product exceeded at scale h = {}",
                        row.scale
                    ),
                    None => eprintln!("max product over the lattice: {}", scan.max_product),
                }
                Ok(())
            }
        },
        Command::Maximal { op, function, orders, dim, grid, out } => {
            let entry = CatalogEntry::parse(&function)?;
            let spec = fraclab_core::QuadratureSpec::default();
            let csv = match op {
                MaximalOp::Mminus | MaximalOp::Mplus => {
                    let axis = grid.build((-8.0, 8.0, 129))?;
                    let f = SampledFunction1D::sample(&entry, &axis)?;
                    let scales = maximal::default_scales(&axis);
                    let r = match op {
                        MaximalOp::Mminus => maximal::m_minus(&f, &scales)?,
                        _ => maximal::m_plus(&f, &scales)?,
                    };
                    write_points_csv(
                        &["t", "value", "argmax_scale"],
                        r.window_indices().iter().zip(r.values()).zip(r.argmax_scale()).map(
                            |((&i, &v), &h)| vec![axis.point(i), v, h],
                        ),
                    )
                }
                MaximalOp::Mhl => {
                    let axis = grid.build((-6.0, 6.0, if dim == 1 { 129 } else { 25 }))?;
                    let nd = GridND::new(vec![axis.clone(); dim])?;
                    let f = SampledFunctionND::sample(&entry, &nd)?;
                    let radii = maximal::default_radii(&axis);
                    let r = maximal::m_hl(&f, &radii)?;
                    let mut header: Vec<&str> = vec!["x"];
                    if dim >= 2 {
                        header.push("x2");
                    }
                    if dim >= 3 {
                        header.push("x3");
                    }
                    header.push("value");
                    header.push("argmax_scale");
                    write_points_csv(
                        &header,
                        r.window_indices().iter().zip(r.values()).zip(r.argmax_scale()).map(
                            |((&i, &v), &h)| {
                                let mut row = nd.point(i);
                                row.push(v);
                                row.push(h);
                                row
                            },
                        ),
                    )
                }
                MaximalOp::TstarDeriv => {
                    let axis = grid.build((-6.0, 6.0, 65))?;
                    let f = SampledFunction1D::sample(&entry, &axis)?;
                    let lattice = if orders.is_empty() {
                        (1..=9).map(|k| k as f64 / 10.0).collect()
                    } else {
                        orders.clone()
                    };
                    let r = maximal::order_sup_fracderiv(&f, &lattice, &spec)?;
                    write_points_csv(
                        &["t", "value", "argmax_order", "majorant"],
                        r.points
                            .iter()
                            .zip(&r.sup_values)
                            .zip(&r.argmax_order)
                            .zip(&r.majorant)
                            .map(|(((t, v), a), m)| vec![*t, *v, *a, *m]),
                    )
                }
                MaximalOp::TstarLap => {
                    let axis = grid.build((-4.0, 4.0, if dim == 1 { 33 } else { 9 }))?;
                    let nd = GridND::new(vec![axis; dim])?;
                    let f = SampledFunctionND::sample(&entry, &nd)?;
                    let lattice: Vec<f64> = if orders.is_empty() {
                        (1..=9).map(|k| k as f64 / 10.0).collect()
                    } else {
                        orders.clone()
                    };
                    let r = maximal::order_sup_fraclap(
                        &f,
                        &lattice,
                        &spec.pv_epsilon_schedule.clone(),
                        &spec,
                    )?;
                    write_points_csv(
                        &["x", "value", "argmax_order", "majorant"],
                        r.points
                            .iter()
                            .zip(&r.sup_values)
                            .zip(&r.argmax_order)
                            .zip(&r.majorant)
                            .map(|(((t, v), a), m)| vec![*t, *v, *a, *m]),
                    )
                }
            };
            write_output(&out, &csv)
        }
        Command::Sweep { config, format, out } => {
            let cfg = ExperimentConfig::from_file(
                config
                    .to_str()
                    .ok_or_else(|| CliError::Usage("config path is not valid UTF-8".into()))?,
            )
            .map_err(HarnessError::from)?;
            let report = fraclab_harness::run(&cfg)?;
            let text = match format {
                EmitFormat::Csv => report.to_csv(),
                EmitFormat::Json => report
                    .to_json()
                    .map_err(|e| CliError::Usage(e.to_string()))?,
            };
            let target = out.or_else(|| cfg.output.clone().map(PathBuf::from));
            write_output(&target, &text)
        }
        Command::Catalog => {
            let mut text = String::from("functions:\n");
            for name in CatalogEntry::builtin_names() {
                text.push_str(&format!("  {name}\n"));
            }
            text.push_str("weights:\n");
            for name in Weight1D::builtin_names() {
                text.push_str(&format!("  {name}\n"));
            }
            text.push_str(
                "\nparameters go in parentheses, e.g. cosine(3), exp_growth(0.5), power(-0.5)\n",
            );
            print!("{text}");
            Ok(())
        }
    }
}
