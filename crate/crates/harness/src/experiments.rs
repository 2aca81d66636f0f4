//! Experiment dispatch: run a configuration, collect a report.

use crate::config::{ConfigError, ExperimentConfig, ExperimentKind};
use crate::report::{ReportError, ReportMetadata, SweepReport, SweepRow};
use fraclab_core::catalog::CatalogEntry;
use fraclab_core::fracderiv;
use fraclab_core::fraclap;
use fraclab_core::maximal;
use fraclab_core::weight::{LatticeSpec, Weight1D, WeightND, PRODUCT_CAP};
use fraclab_core::{FracError, FracOrder, Grid1D, GridND, SampledFunction1D, SampledFunctionND};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{experiment}: {source}")]
    Numeric {
        experiment: &'static str,
        #[source]
        source: FracError,
    },
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Exit code mapping: 1 for configuration problems, 2 for numerical
    /// non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) | HarnessError::Report(_) => 1,
            HarnessError::Numeric { source, .. } => match source {
                FracError::QuadratureNotConverged(_)
                | FracError::TruncationBudgetExceeded(_)
                | FracError::IntegralOverflow { .. } => 2,
                _ => 1,
            },
        }
    }
}

fn numeric(experiment: &'static str) -> impl Fn(FracError) -> HarnessError {
    move |source| HarnessError::Numeric { experiment, source }
}

/// Run an experiment; deterministic for a fixed configuration.
pub fn run(config: &ExperimentConfig) -> Result<SweepReport, HarnessError> {
    config.validate()?;
    let start = std::time::Instant::now();
    let rows = match config.kind {
        ExperimentKind::DerivLimits => deriv_limits(config)?,
        ExperimentKind::LapLimits => lap_limits(config)?,
        ExperimentKind::MaximalRatios => maximal_ratios(config)?,
        ExperimentKind::WeightScan => weight_scan(config)?,
        ExperimentKind::Ftfc => ftfc(config)?,
        ExperimentKind::SemigroupSuite => semigroup_suite(config)?,
        ExperimentKind::OracleXcheck => oracle_xcheck(config)?,
    };
    let metadata = ReportMetadata {
        experiment: config.kind.name().to_string(),
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        grid: format!(
            "[{}, {}] x {} (dim {})",
            config.grid.min, config.grid.max, config.grid.points, config.grid.dim
        ),
        config: config.echo(),
        runtime_ms: Some(start.elapsed().as_millis() as u64),
    };
    Ok(SweepReport::new(metadata, rows)?)
}

fn grid_1d(config: &ExperimentConfig) -> Result<Grid1D, HarnessError> {
    Grid1D::new(config.grid.min, config.grid.max, config.grid.points)
        .map_err(numeric("grid"))
}

fn grid_nd(config: &ExperimentConfig) -> Result<GridND, HarnessError> {
    GridND::cube(config.grid.dim, config.grid.min, config.grid.max, config.grid.points)
        .map_err(numeric("grid"))
}

fn sample_1d(config: &ExperimentConfig) -> Result<SampledFunction1D, HarnessError> {
    let entry = CatalogEntry::parse(&config.function).map_err(numeric("catalog"))?;
    SampledFunction1D::sample(&entry, &grid_1d(config)?).map_err(numeric("catalog"))
}

fn sample_nd(config: &ExperimentConfig) -> Result<SampledFunctionND, HarnessError> {
    let entry = CatalogEntry::parse(&config.function).map_err(numeric("catalog"))?;
    SampledFunctionND::sample(&entry, &grid_nd(config)?).map_err(numeric("catalog"))
}

fn deriv_limits(config: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let f = sample_1d(config)?;
    let w = Weight1D::parse(&config.weight).map_err(numeric("deriv_limits"))?;
    let window = (config.grid.window_min, config.grid.window_max);
    let rows = fracderiv::derivative_limit_sweep(
        &f,
        &config.orders,
        config.p,
        &w,
        &config.quadrature,
        window,
    )
    .map_err(numeric("deriv_limits"))?;
    let mut out = Vec::new();
    for row in rows {
        let err = row.max_quadrature_error;
        out.push(SweepRow {
            order: row.alpha,
            metric: "err_lp_to_derivative".into(),
            value: row.err_to_derivative,
            error_estimate: err,
        });
        out.push(SweepRow {
            order: row.alpha,
            metric: "err_lp_to_function".into(),
            value: row.err_to_function,
            error_estimate: err,
        });
        out.push(SweepRow {
            order: row.alpha,
            metric: "sup_to_derivative".into(),
            value: row.sup_to_derivative,
            error_estimate: err,
        });
        out.push(SweepRow {
            order: row.alpha,
            metric: "sup_to_function".into(),
            value: row.sup_to_function,
            error_estimate: err,
        });
    }
    Ok(out)
}

fn lap_limits(config: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let f = sample_nd(config)?;
    let w = WeightND::parse(&config.weight).map_err(numeric("lap_limits"))?;
    let window: Vec<(f64, f64)> =
        vec![(config.grid.window_min, config.grid.window_max); config.grid.dim];
    let rows = fraclap::laplacian_limit_sweep(
        &f,
        &config.orders,
        config.p,
        &w,
        &config.quadrature,
        &window,
    )
    .map_err(numeric("lap_limits"))?;
    let mut out = Vec::new();
    for row in rows {
        out.push(SweepRow {
            order: row.s,
            metric: "err_lp_to_neg_laplacian".into(),
            value: row.err_to_neg_laplacian,
            error_estimate: 0.0,
        });
        out.push(SweepRow {
            order: row.s,
            metric: "err_lp_to_function".into(),
            value: row.err_to_function,
            error_estimate: 0.0,
        });
        out.push(SweepRow {
            order: row.s,
            metric: "sup_to_neg_laplacian".into(),
            value: row.sup_to_neg_laplacian,
            error_estimate: 0.0,
        });
        out.push(SweepRow {
            order: row.s,
            metric: "sup_to_function".into(),
            value: row.sup_to_function,
            error_estimate: 0.0,
        });
    }
    Ok(out)
}

fn ftfc(config: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let f = sample_1d(config)?;
    let mut out = Vec::new();
    for &a in &config.orders {
        let alpha = FracOrder::new(a).map_err(numeric("ftfc"))?;
        let base = fracderiv::ftfc_compose(&f, &alpha, &config.quadrature)
            .map_err(numeric("ftfc"))?;
        let doubled = fracderiv::ftfc_compose(&f, &alpha, &config.quadrature.doubled())
            .map_err(numeric("ftfc"))?;
        out.push(SweepRow {
            order: a,
            metric: "sup_distance".into(),
            value: base.sup_distance,
            error_estimate: 0.0,
        });
        out.push(SweepRow {
            order: a,
            metric: "l2_distance".into(),
            value: base.l2_distance,
            error_estimate: 0.0,
        });
        out.push(SweepRow {
            order: a,
            metric: "sup_distance_doubled_budget".into(),
            value: doubled.sup_distance,
            error_estimate: 0.0,
        });
    }
    Ok(out)
}

/// Seeded subsample of interior points, used when the full point-by-order
/// product would be too expensive.
fn subsample_indices(count: usize, take: usize, seed: u64) -> Vec<usize> {
    if count <= take {
        return (0..count).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<usize> = (0..count).collect();
    all.shuffle(&mut rng);
    let mut picked: Vec<usize> = all.into_iter().take(take).collect();
    picked.sort_unstable();
    picked
}

fn maximal_ratios(config: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let err = numeric("maximal_ratios");
    let spec = &config.quadrature;
    if config.grid.dim == 1 {
        let f = sample_1d(config)?;
        let report = maximal::order_sup_fracderiv(&f, &config.orders, spec).map_err(&err)?;
        let mut out = vec![SweepRow {
            order: config.orders.iter().cloned().fold(0.0, f64::max),
            metric: "observed_constant".into(),
            value: report.observed_constant,
            error_estimate: 0.0,
        }];
        // refinement stability: grid x2 and order lattice x2
        let refined_grid = f.grid().refined();
        let entry = CatalogEntry::parse(&config.function).map_err(&err)?;
        let f2 = SampledFunction1D::sample(&entry, &refined_grid).map_err(&err)?;
        let refined_orders = refine_orders(&config.orders);
        let report2 =
            maximal::order_sup_fracderiv(&f2, &refined_orders, spec).map_err(&err)?;
        out.push(SweepRow {
            order: refined_orders.iter().cloned().fold(0.0, f64::max),
            metric: "observed_constant_refined".into(),
            value: report2.observed_constant,
            error_estimate: 0.0,
        });
        out.push(SweepRow {
            order: 1.0,
            metric: "relative_change_under_refinement".into(),
            value: (report2.observed_constant - report.observed_constant).abs()
                / report.observed_constant.max(1e-300),
            error_estimate: 0.0,
        });
        Ok(out)
    } else {
        let f = sample_nd(config)?;
        let grid = f.grid().clone();
        let radii = maximal::default_radii(grid.axis(0));
        let m_f = maximal::m_hl(&f, &radii).map_err(&err)?;
        let m_h = maximal::m_hl_hessian(&f, &radii).map_err(&err)?;
        let eps_lattice: Vec<f64> = spec.pv_epsilon_schedule.clone();
        let picked = subsample_indices(grid.n_total(), 64, config.seed);
        let orders: Vec<FracOrder> = config
            .orders
            .iter()
            .map(|&s| FracOrder::new(s))
            .collect::<Result<_, _>>()
            .map_err(&err)?;
        let mut observed = 0.0f64;
        for &i in &picked {
            let x = grid.point(i);
            let mut sup = 0.0f64;
            for s in &orders {
                for &eps in &eps_lattice {
                    let v = fraclap::truncated_ts_eps_at(&f, &x, s, eps, spec).map_err(&err)?;
                    sup = sup.max(v.abs());
                }
            }
            let majorant = m_f.values()[i] + m_h.values()[i];
            if majorant > 1e-300 {
                observed = observed.max(sup / majorant);
            }
        }
        Ok(vec![SweepRow {
            order: config.orders.iter().cloned().fold(0.0, f64::max),
            metric: "observed_constant".into(),
            value: observed,
            error_estimate: 0.0,
        }])
    }
}

/// Midpoint refinement of an order lattice, clamped inside (0, 1).
pub fn refine_orders(orders: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = orders.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::with_capacity(2 * sorted.len());
    for pair in sorted.windows(2) {
        out.push(pair[0]);
        out.push(0.5 * (pair[0] + pair[1]));
    }
    if let Some(&last) = sorted.last() {
        out.push(last);
    }
    out
}

fn weight_scan(config: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let err = numeric("weight_scan");
    let w = Weight1D::parse(&config.weight).map_err(&err)?;
    let centers = Grid1D::new(config.grid.window_min, config.grid.window_max, 17)
        .map_err(&err)?;
    let lat = LatticeSpec::dyadic(&centers, -10, 10).map_err(&err)?;
    let minus = fraclab_core::weight::sawyer_minus_scan(&w, config.p, &lat).map_err(&err)?;
    let plus = fraclab_core::weight::sawyer_plus_scan(&w, config.p, &lat).map_err(&err)?;
    let two = fraclab_core::weight::muckenhoupt_scan_1d(&w, config.p, &lat).map_err(&err)?;
    let mut out = Vec::new();
    for (name, scan) in [
        ("sawyer_minus_max", &minus),
        ("sawyer_plus_max", &plus),
        ("muckenhoupt_max", &two),
    ] {
        for &h in &lat.scales {
            let best = scan
                .rows
                .iter()
                .filter(|r| r.scale == h && r.product.is_finite())
                .fold(0.0f64, |m, r| m.max(r.product));
            out.push(SweepRow {
                order: h,
                metric: name.into(),
                value: best.min(PRODUCT_CAP),
                error_estimate: 0.0,
            });
        }
        if let Some(row) = scan.cap_exceeded {
            out.push(SweepRow {
                order: row.scale,
                metric: format!("{name}.cap_exceeded_at_scale"),
                value: row.scale,
                error_estimate: 0.0,
            });
        }
    }
    Ok(out)
}

fn semigroup_suite(config: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let err = numeric("semigroup_suite");
    let f = sample_nd(config)?;
    let w = WeightND::parse(&config.weight).map_err(&err)?;
    let checks =
        fraclap::semigroup_property_suite(&f, &config.quadrature, &w, config.p).map_err(&err)?;
    let mut out = Vec::new();
    for (i, check) in checks.iter().enumerate() {
        out.push(SweepRow {
            order: (i + 1) as f64,
            metric: check.name.to_string(),
            value: check.observed,
            error_estimate: if check.tolerance.is_finite() { check.tolerance } else { 0.0 },
        });
        out.push(SweepRow {
            order: (i + 1) as f64,
            metric: format!("{}.pass", check.name),
            value: if check.pass { 1.0 } else { 0.0 },
            error_estimate: 0.0,
        });
    }
    Ok(out)
}

fn oracle_xcheck(config: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let err = numeric("oracle_xcheck");
    let n = 256usize;
    let grid = Grid1D::new(0.0, 2.0 * std::f64::consts::PI, n + 1).map_err(&err)?;
    let spec = &config.quadrature;
    let mut out = Vec::new();
    for &a in &config.orders {
        let alpha = FracOrder::new(a).map_err(&err)?;
        for k in [1usize, 2, 3] {
            let entry = CatalogEntry::parse(&format!("cosine({k})")).map_err(&err)?;
            let f = SampledFunction1D::sample(&entry, &grid).map_err(&err)?;
            let oracle = fracderiv::spectral_fracderiv(&f, &alpha).map_err(&err)?;
            let mut gap = 0.0f64;
            for idx in [n / 4, n / 2, 3 * n / 4] {
                let t = grid.point(idx);
                let (v, _) =
                    fracderiv::marchaud_left_at(&f, t, &alpha, spec).map_err(&err)?;
                gap = gap.max((v - oracle.values()[idx]).abs());
            }
            out.push(SweepRow {
                order: a,
                metric: format!("deriv_oracle_gap_k{k}"),
                value: gap,
                error_estimate: 0.0,
            });

            let fnd = SampledFunctionND::sample(
                &entry,
                &GridND::new(vec![grid.clone()]).map_err(&err)?,
            )
            .map_err(&err)?;
            let lap_oracle = fraclap::spectral_fraclap_1d(&f, &alpha).map_err(&err)?;
            let mut lap_gap = 0.0f64;
            for idx in [n / 4, n / 2, 3 * n / 4] {
                let x = [grid.point(idx)];
                let (v, _) =
                    fraclap::frac_laplacian_pv_at(&fnd, &x, &alpha, spec).map_err(&err)?;
                lap_gap = lap_gap.max((v - lap_oracle.values()[idx]).abs());
            }
            out.push(SweepRow {
                order: a,
                metric: format!("laplacian_oracle_gap_k{k}"),
                value: lap_gap,
                error_estimate: 0.0,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GridConfig;

    fn quick_grid() -> GridConfig {
        GridConfig { min: -6.0, max: 6.0, points: 25, dim: 1, window_min: -4.0, window_max: 4.0 }
    }

    #[test]
    fn deriv_limits_report_shape() {
        let mut cfg =
            ExperimentConfig::new(ExperimentKind::DerivLimits, "gaussian", vec![0.5, 0.9]);
        cfg.weight = "exp_decay(1)".into();
        cfg.grid = quick_grid();
        let report = run(&cfg).unwrap();
        assert_eq!(report.rows.len(), 8);
        // error to the derivative decreases along the order list
        let errs: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| r.metric == "err_lp_to_derivative")
            .map(|r| r.value)
            .collect();
        assert!(errs[0] > errs[1]);
        assert_eq!(report.metadata.config["experiment"], "deriv_limits");
    }

    #[test]
    fn ftfc_report_contract() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Ftfc, "bump", vec![0.5]);
        cfg.grid = GridConfig {
            min: -4.0,
            max: 4.0,
            points: 17,
            dim: 1,
            window_min: -2.0,
            window_max: 2.0,
        };
        let report = run(&cfg).unwrap();
        let sup = report.rows.iter().find(|r| r.metric == "sup_distance").unwrap();
        assert!(sup.value <= 1e-4, "sup distance {}", sup.value);
    }

    #[test]
    fn empty_orders_rejected() {
        let cfg = ExperimentConfig::new(ExperimentKind::DerivLimits, "gaussian", vec![]);
        assert!(matches!(run(&cfg), Err(HarnessError::Config(_))));
    }

    #[test]
    fn determinism_modulo_runtime() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::WeightScan, "gaussian", vec![0.5]);
        cfg.weight = "exp_decay(1)".into();
        cfg.grid = quick_grid();
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert!(a.same_content(&b));
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn subsampling_is_seed_stable() {
        let a = subsample_indices(1000, 64, 7);
        let b = subsample_indices(1000, 64, 7);
        let c = subsample_indices(1000, 64, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn refine_orders_doubles_density() {
        let refined = refine_orders(&[0.1, 0.5, 0.9]);
        assert_eq!(refined, vec![0.1, 0.3, 0.5, 0.7, 0.9]);
    }
}
