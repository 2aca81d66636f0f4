//! Discrete one-sided and centered maximal operators, convolution
//! domination checks, and the order-supremum operators.
//!
//! Every supremum here is a maximum over a finite scale lattice and
//! therefore a lower bound for the true maximal function. The point value
//! `|f(t)|` is always included as the vanishing-scale candidate (recorded
//! with `argmax_scale = 0`), which keeps `Mf >= |f|` pointwise.

use crate::catalog::Family;
use crate::error::{FracError, Result};
use crate::function::{SampledFunction1D, SampledFunctionND};
use crate::grid::Grid1D;
use crate::quad::{GaussRule, QuadratureSpec};
use crate::special::FracOrder;
use rayon::prelude::*;

/// Values of a maximal operator on a grid window.
#[derive(Debug, Clone)]
pub struct MaximalResult {
    window_indices: Vec<usize>,
    values: Vec<f64>,
    argmax_scale: Vec<f64>,
    scales: Vec<f64>,
}

impl MaximalResult {
    pub fn window_indices(&self) -> &[usize] {
        &self.window_indices
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    /// Scale achieving the per-point maximum; 0 marks the point value.
    pub fn argmax_scale(&self) -> &[f64] {
        &self.argmax_scale
    }
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }
    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(*v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AvgSide {
    Backward,
    Forward,
}

/// Default half-dyadic scale lattice for a grid: from one spacing up to
/// twice the span.
pub fn default_scales(grid: &Grid1D) -> Vec<f64> {
    let h = grid.spacing();
    let span = grid.t_max() - grid.t_min();
    let mut scales = Vec::new();
    let mut s = h;
    while s <= 2.0 * span {
        scales.push(s);
        s *= std::f64::consts::SQRT_2;
    }
    scales
}

fn validate_scales(grid: &Grid1D, scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(FracError::ParameterOutOfRange("empty scale lattice".into()));
    }
    let h = grid.spacing();
    if scales.iter().any(|&s| s < h - 1e-12) {
        return Err(FracError::ParameterOutOfRange(format!(
            "scales below the grid spacing {h}"
        )));
    }
    Ok(())
}

/// Where `|f|` is negligible, so long averaging windows can be clipped.
fn clip_1d(f: &SampledFunction1D) -> (f64, f64) {
    if let Some(cf) = f.closed_form() {
        if let Some((a, b)) = cf.effective_support() {
            return (a, b);
        }
        if let Family::ExpGrowth { lambda } = cf.family() {
            return if *lambda > 0.0 {
                (-745.0 / lambda, f64::INFINITY)
            } else {
                (f64::NEG_INFINITY, -745.0 / lambda)
            };
        }
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        (f.grid().t_min(), f.grid().t_max())
    }
}

fn panel_cap_1d(length_scale: f64, osc: Option<f64>) -> f64 {
    let osc_cap = osc.map(|k| std::f64::consts::PI / (4.0 * k)).unwrap_or(f64::INFINITY);
    length_scale.min(osc_cap).clamp(1e-3, 8.0)
}

/// Average of `eval_abs` over the one-sided interval of length `h` at `t`,
/// clipped where the function is negligible.
fn interval_average<F: Fn(f64) -> f64>(
    eval_abs: &F,
    t: f64,
    h: f64,
    side: AvgSide,
    clip: (f64, f64),
    breakpoints: &[f64],
    w_cap: f64,
    rule: &GaussRule,
) -> f64 {
    let (mut lo, mut hi) = match side {
        AvgSide::Backward => (t - h, t),
        AvgSide::Forward => (t, t + h),
    };
    lo = lo.max(clip.0);
    hi = hi.min(clip.1);
    if hi <= lo {
        return 0.0;
    }
    let mut cuts = vec![lo, hi];
    for &bp in breakpoints {
        if bp > lo && bp < hi {
            cuts.push(bp);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let mut acc = 0.0;
    for pair in cuts.windows(2) {
        let width = pair[1] - pair[0];
        let panels = ((width / w_cap).ceil() as usize).clamp(1, 4096);
        acc += rule.integrate_panels(pair[0], pair[1], panels, eval_abs);
    }
    acc / h
}

/// Core lattice-sup engine shared by the grid operators and the weight
/// estimators.
pub(crate) fn sup_interval_averages<F: Fn(f64) -> f64 + Sync>(
    eval_abs: F,
    points: &[f64],
    scales: &[f64],
    backward: bool,
    clip: (f64, f64),
    breakpoints: &[f64],
    w_cap: f64,
) -> (Vec<f64>, Vec<f64>) {
    let side = if backward { AvgSide::Backward } else { AvgSide::Forward };
    let rule = GaussRule::new(8);
    let computed: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&t| {
            let mut best = eval_abs(t);
            let mut arg = 0.0;
            for &h in scales {
                let avg =
                    interval_average(&eval_abs, t, h, side, clip, breakpoints, w_cap, &rule);
                if avg > best {
                    best = avg;
                    arg = h;
                }
            }
            (best, arg)
        })
        .collect();
    (
        computed.iter().map(|c| c.0).collect(),
        computed.iter().map(|c| c.1).collect(),
    )
}

fn one_sided_maximal(
    f: &SampledFunction1D,
    scales: &[f64],
    backward: bool,
) -> Result<MaximalResult> {
    let grid = f.grid();
    validate_scales(grid, scales)?;
    let h_max = scales.iter().cloned().fold(0.0f64, f64::max);
    let window_indices: Vec<usize> = if f.closed_form().is_some() {
        (0..grid.n_points()).collect()
    } else {
        // without a closed form, points whose windows leave the grid are
        // excluded from the report
        (0..grid.n_points())
            .filter(|&i| {
                let t = grid.point(i);
                if backward {
                    t - h_max >= grid.t_min() - 1e-12
                } else {
                    t + h_max <= grid.t_max() + 1e-12
                }
            })
            .collect()
    };
    if window_indices.is_empty() {
        return Err(FracError::WindowTooNarrow(
            "no grid point supports the largest scale".into(),
        ));
    }
    let points: Vec<f64> = window_indices.iter().map(|&i| grid.point(i)).collect();
    let clip = clip_1d(f);
    let breakpoints: Vec<f64> =
        f.closed_form().map(|cf| cf.breakpoints()).unwrap_or_default();
    let w_cap = panel_cap_1d(
        f.closed_form().map(|cf| cf.length_scale()).unwrap_or(1.0),
        f.closed_form().and_then(|cf| cf.osc_freq()),
    );
    let (values, argmax_scale) = sup_interval_averages(
        |t| f.eval(t).abs(),
        &points,
        scales,
        backward,
        clip,
        &breakpoints,
        w_cap,
    );
    Ok(MaximalResult {
        window_indices,
        values,
        argmax_scale,
        scales: scales.to_vec(),
    })
}

/// Backward maximal averages `sup_h (1/h) int_{t-h}^t |f|`.
pub fn m_minus(f: &SampledFunction1D, scales: &[f64]) -> Result<MaximalResult> {
    one_sided_maximal(f, scales, true)
}

/// Forward maximal averages `sup_h (1/h) int_t^{t+h} |f|`.
pub fn m_plus(f: &SampledFunction1D, scales: &[f64]) -> Result<MaximalResult> {
    one_sided_maximal(f, scales, false)
}

/// Centered-ball maximal averages over a radius lattice.
///
/// Centered balls are used instead of all balls containing the point; the
/// two are pointwise comparable with dimensional constants, and reports
/// only ever quote the centered value.
pub fn m_hl(f: &SampledFunctionND, radii: &[f64]) -> Result<MaximalResult> {
    let grid = f.grid();
    if radii.is_empty() || radii.iter().any(|&r| r <= 0.0) {
        return Err(FracError::ParameterOutOfRange("radii must be positive".into()));
    }
    let r_max = radii.iter().cloned().fold(0.0f64, f64::max);
    let window_indices: Vec<usize> = if f.closed_form().is_some() {
        (0..grid.n_total()).collect()
    } else {
        grid.interior_indices(r_max)
    };
    if window_indices.is_empty() {
        return Err(FracError::WindowTooNarrow(
            "no grid point supports the largest radius".into(),
        ));
    }
    let points: Vec<Vec<f64>> = window_indices.iter().map(|&i| grid.point(i)).collect();
    let w_cap = f
        .closed_form()
        .map(|cf| match cf {
            crate::catalog::ClosedFormND::Separable { factors } => factors
                .iter()
                .map(|g| panel_cap_1d(g.length_scale(), g.osc_freq()))
                .fold(f64::INFINITY, f64::min),
            crate::catalog::ClosedFormND::Ridge { profile, .. } => {
                panel_cap_1d(profile.length_scale(), profile.osc_freq())
            }
            crate::catalog::ClosedFormND::Ball { .. } => 0.25,
        })
        .unwrap_or(0.5);
    let (values, argmax_scale) =
        sup_ball_averages(|x| f.eval(x).abs(), grid.dim(), &points, radii, w_cap);
    Ok(MaximalResult {
        window_indices,
        values,
        argmax_scale,
        scales: radii.to_vec(),
    })
}

/// Closure version of the centered-ball engine, used for derived fields
/// such as the Hessian norm.
pub(crate) fn sup_ball_averages<F: Fn(&[f64]) -> f64 + Sync>(
    eval_abs: F,
    dim: usize,
    points: &[Vec<f64>],
    radii: &[f64],
    w_cap: f64,
) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussRule::new(8);
    let computed: Vec<(f64, f64)> = points
        .par_iter()
        .map(|x| {
            let mut best = eval_abs(x);
            let mut arg = 0.0;
            for &r in radii {
                let avg = ball_average(&eval_abs, dim, x, r, w_cap, &rule);
                if avg > best {
                    best = avg;
                    arg = r;
                }
            }
            (best, arg)
        })
        .collect();
    (
        computed.iter().map(|c| c.0).collect(),
        computed.iter().map(|c| c.1).collect(),
    )
}

fn ball_average<F: Fn(&[f64]) -> f64>(
    eval_abs: &F,
    dim: usize,
    x: &[f64],
    r: f64,
    w_cap: f64,
    rule: &GaussRule,
) -> f64 {
    let radial_panels = ((r / w_cap).ceil() as usize).clamp(1, 512);
    match dim {
        1 => {
            let lo = x[0] - r;
            let hi = x[0] + r;
            rule.integrate_panels(lo, hi, 2 * radial_panels, |t| eval_abs(&[t])) / (2.0 * r)
        }
        2 => {
            let n_theta = 32;
            let mut acc = 0.0;
            for j in 0..n_theta {
                let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_theta as f64;
                let (c, s) = (th.cos(), th.sin());
                acc += rule.integrate_panels(0.0, r, radial_panels, |rho| {
                    eval_abs(&[x[0] + rho * c, x[1] + rho * s]) * rho
                });
            }
            acc * (2.0 * std::f64::consts::PI / n_theta as f64)
                / (std::f64::consts::PI * r * r)
        }
        _ => {
            let n_theta = 16;
            let n_phi = 8;
            let mut acc = 0.0;
            for i in 0..n_phi {
                let phi = std::f64::consts::PI * (i as f64 + 0.5) / n_phi as f64;
                for j in 0..n_theta {
                    let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_theta as f64;
                    let dir =
                        [phi.sin() * th.cos(), phi.sin() * th.sin(), phi.cos()];
                    acc += phi.sin()
                        * rule.integrate_panels(0.0, r, radial_panels, |rho| {
                            eval_abs(&[
                                x[0] + rho * dir[0],
                                x[1] + rho * dir[1],
                                x[2] + rho * dir[2],
                            ]) * rho * rho
                        });
                }
            }
            let dw = 2.0 * std::f64::consts::PI * std::f64::consts::PI
                / (n_theta * n_phi) as f64;
            acc * dw / crate::catalog::ball_volume(3, r)
        }
    }
}

/// Nonincreasing kernels supported on `[0, inf)` for the one-sided
/// convolution bound.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel1D {
    /// `chi_{(0, radius]}`.
    Indicator { radius: f64 },
    /// `tau^{-exponent}` on `(0, radius]`, `0 < exponent < 1`.
    PowerSingular { exponent: f64, radius: f64 },
    /// `chi_{(0,1]} + tau^{-1-alpha} chi_{(1,inf)}`.
    StepPowerTail { alpha: f64 },
    /// Samples validated nonincreasing; linearly interpolated.
    Tabulated { taus: Vec<f64>, vals: Vec<f64> },
}

impl Kernel1D {
    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel1D::Indicator { radius } if *radius > 0.0 => Ok(()),
            Kernel1D::Indicator { .. } => {
                Err(FracError::ParameterOutOfRange("kernel radius".into()))
            }
            Kernel1D::PowerSingular { exponent, radius } => {
                if *exponent > 0.0 && *exponent < 1.0 && *radius > 0.0 {
                    Ok(())
                } else {
                    Err(FracError::ParameterOutOfRange("kernel exponent".into()))
                }
            }
            Kernel1D::StepPowerTail { alpha } => {
                if *alpha > 0.0 && *alpha < 1.0 {
                    Ok(())
                } else {
                    Err(FracError::ParameterOutOfRange("kernel tail order".into()))
                }
            }
            Kernel1D::Tabulated { taus, vals } => {
                if taus.len() != vals.len() || taus.len() < 2 {
                    return Err(FracError::ParameterOutOfRange("kernel table".into()));
                }
                for w in vals.windows(2).zip(taus.windows(2)) {
                    let (v, t) = w;
                    if t[1] <= t[0] {
                        return Err(FracError::ParameterOutOfRange("kernel table order".into()));
                    }
                    if v[1] > v[0] + 1e-12 {
                        return Err(FracError::KernelNotMonotone { at: t[1] });
                    }
                }
                if vals.iter().any(|&v| v < 0.0) {
                    return Err(FracError::KernelNotMonotone { at: f64::NAN });
                }
                Ok(())
            }
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            Kernel1D::Indicator { radius } => *radius,
            Kernel1D::PowerSingular { exponent, radius } => {
                radius.powf(1.0 - exponent) / (1.0 - exponent)
            }
            Kernel1D::StepPowerTail { alpha } => 1.0 + 1.0 / alpha,
            Kernel1D::Tabulated { taus, vals } => taus
                .windows(2)
                .zip(vals.windows(2))
                .map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] - t[0]))
                .sum(),
        }
    }

    fn eval(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        match self {
            Kernel1D::Indicator { radius } => {
                if tau <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            Kernel1D::PowerSingular { exponent, radius } => {
                if tau <= *radius {
                    tau.powf(-exponent)
                } else {
                    0.0
                }
            }
            Kernel1D::StepPowerTail { alpha } => {
                if tau <= 1.0 {
                    1.0
                } else {
                    tau.powf(-1.0 - alpha)
                }
            }
            Kernel1D::Tabulated { taus, vals } => {
                if tau <= taus[0] || tau >= *taus.last().unwrap() {
                    return if tau <= taus[0] { vals[0] } else { 0.0 };
                }
                let idx = taus.partition_point(|&x| x < tau) - 1;
                let w = (tau - taus[idx]) / (taus[idx + 1] - taus[idx]);
                vals[idx] * (1.0 - w) + vals[idx + 1] * w
            }
        }
    }

    /// `f * eta (t) = int_0^inf f(t - tau) eta(tau) dtau`.
    fn convolve(&self, f: &SampledFunction1D, t: f64, spec: &QuadratureSpec) -> f64 {
        let rule = GaussRule::new(8);
        let breakpoints: Vec<f64> =
            f.closed_form().map(|cf| cf.breakpoints()).unwrap_or_default();
        let tau_cuts = |lo: f64, hi: f64| -> Vec<f64> {
            let mut cuts = vec![lo, hi];
            for &bp in &breakpoints {
                let tau = t - bp;
                if tau > lo && tau < hi {
                    cuts.push(tau);
                }
            }
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
            cuts
        };
        let w_cap = panel_cap_1d(
            f.closed_form().map(|cf| cf.length_scale()).unwrap_or(1.0),
            f.closed_form().and_then(|cf| cf.osc_freq()),
        );
        let smooth_part = |lo: f64, hi: f64, weight: &dyn Fn(f64) -> f64| -> f64 {
            let mut acc = 0.0;
            for pair in tau_cuts(lo, hi).windows(2) {
                let width = pair[1] - pair[0];
                let panels = ((width / w_cap).ceil() as usize).clamp(1, 2048);
                acc += rule
                    .integrate_panels(pair[0], pair[1], panels, |tau| f.eval(t - tau) * weight(tau));
            }
            acc
        };
        match self {
            Kernel1D::Indicator { radius } => smooth_part(0.0, *radius, &|_| 1.0),
            Kernel1D::PowerSingular { exponent, radius } => {
                // graded cascade toward the kernel singularity plus a stub
                let g = *exponent;
                let mut acc = 0.0;
                let mut hi = *radius;
                for _ in 0..44 {
                    let lo = hi * 0.5;
                    for pair in tau_cuts(lo, hi).windows(2) {
                        acc += rule.integrate(pair[0], pair[1], |tau| {
                            f.eval(t - tau) * tau.powf(-g)
                        });
                    }
                    hi = lo;
                }
                let eps = radius * 0.5f64.powi(44);
                acc + f.eval(t) * eps.powf(1.0 - g) / (1.0 - g)
            }
            Kernel1D::StepPowerTail { alpha } => {
                let mut acc = smooth_part(0.0, 1.0, &|_| 1.0);
                let radius = spec.tail_radius;
                acc += smooth_part(1.0, radius, &|tau| tau.powf(-1.0 - alpha));
                // decaying or constant far field
                acc + f.eval(t - 2.0 * radius) * radius.powf(-alpha) / alpha
            }
            Kernel1D::Tabulated { taus, .. } => {
                let hi = *taus.last().unwrap();
                smooth_part(taus[0].max(0.0), hi, &|tau| self.eval(tau))
            }
        }
    }
}

/// Pointwise comparison of a convolution with its maximal-function bound.
#[derive(Debug, Clone)]
pub struct DominationReport {
    pub kernel_mass: f64,
    pub points: Vec<f64>,
    pub convolution: Vec<f64>,
    pub bound: Vec<f64>,
    /// Max over points of `|conv| - bound`; nonpositive (up to quadrature
    /// tolerance) when the domination holds.
    pub max_excess: f64,
    /// Max over points of `|conv| / bound`.
    pub max_ratio: f64,
}

fn domination_report(points: Vec<f64>, conv: Vec<f64>, bound: Vec<f64>, mass: f64) -> DominationReport {
    let mut max_excess = f64::NEG_INFINITY;
    let mut max_ratio = 0.0f64;
    for (c, b) in conv.iter().zip(&bound) {
        max_excess = max_excess.max(c.abs() - b);
        if *b > 1e-300 {
            max_ratio = max_ratio.max(c.abs() / b);
        }
    }
    DominationReport {
        kernel_mass: mass,
        points,
        convolution: conv,
        bound,
        max_excess,
        max_ratio,
    }
}

/// Check `|f * eta| <= M^- f * int eta` pointwise on the interior window.
pub fn lorente_domination_check(
    f: &SampledFunction1D,
    kernel: &Kernel1D,
    spec: &QuadratureSpec,
) -> Result<DominationReport> {
    kernel.validate()?;
    let grid = f.grid();
    let scales = default_scales(grid);
    let maximal = m_minus(f, &scales)?;
    let points: Vec<f64> = maximal.window_indices().iter().map(|&i| grid.point(i)).collect();
    let conv: Vec<f64> = points
        .par_iter()
        .map(|&t| kernel.convolve(f, t, spec))
        .collect();
    let mass = kernel.mass();
    let bound: Vec<f64> = maximal.values().iter().map(|&m| m * mass).collect();
    Ok(domination_report(points, conv, bound, mass))
}

/// Radial nonincreasing kernels on R^n.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialKernel {
    /// Gauss--Weierstrass kernel at time `t` (unit mass).
    Heat { t: f64 },
    /// Normalized indicator of the centered ball of radius `r` (unit mass).
    BallIndicator { r: f64 },
}

impl RadialKernel {
    pub fn mass(&self) -> f64 {
        1.0
    }

    fn profile(&self, dim: usize, rho: f64) -> f64 {
        match self {
            RadialKernel::Heat { t } => {
                (4.0 * std::f64::consts::PI * t).powf(-(dim as f64) / 2.0)
                    * (-rho * rho / (4.0 * t)).exp()
            }
            RadialKernel::BallIndicator { r } => {
                if rho <= *r {
                    1.0 / crate::catalog::ball_volume(dim, *r)
                } else {
                    0.0
                }
            }
        }
    }

    fn radius(&self, _dim: usize) -> f64 {
        match self {
            RadialKernel::Heat { t } => 6.0 * (4.0 * t).sqrt(),
            RadialKernel::BallIndicator { r } => *r,
        }
    }
}

/// Check `|f * eta| <= ||eta||_1 M f` pointwise for a radial nonincreasing
/// kernel.
pub fn radial_domination_check(
    f: &SampledFunctionND,
    kernel: &RadialKernel,
    radii: &[f64],
) -> Result<DominationReport> {
    let grid = f.grid();
    let dim = grid.dim();
    let maximal = m_hl(f, radii)?;
    let points: Vec<Vec<f64>> = maximal.window_indices().iter().map(|&i| grid.point(i)).collect();
    let rule = GaussRule::new(8);
    let reach = kernel.radius(dim);
    let conv: Vec<f64> = points
        .par_iter()
        .map(|x| match dim {
            1 => rule.integrate_panels(-reach, reach, (4.0 * reach).ceil() as usize * 4, |z| {
                f.eval(&[x[0] - z]) * kernel.profile(1, z.abs())
            }),
            2 => {
                let n_theta = 32;
                let mut acc = 0.0;
                for j in 0..n_theta {
                    let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_theta as f64;
                    let (c, s) = (th.cos(), th.sin());
                    acc += rule.integrate_panels(
                        0.0,
                        reach,
                        ((reach / 0.25).ceil() as usize).clamp(8, 256),
                        |rho| {
                            f.eval(&[x[0] - rho * c, x[1] - rho * s])
                                * kernel.profile(2, rho)
                                * rho
                        },
                    );
                }
                acc * 2.0 * std::f64::consts::PI / n_theta as f64
            }
            _ => {
                let n_theta = 16;
                let n_phi = 8;
                let mut acc = 0.0;
                for i in 0..n_phi {
                    let phi = std::f64::consts::PI * (i as f64 + 0.5) / n_phi as f64;
                    for j in 0..n_theta {
                        let th =
                            2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_theta as f64;
                        let dir = [phi.sin() * th.cos(), phi.sin() * th.sin(), phi.cos()];
                        acc += phi.sin()
                            * rule.integrate_panels(
                                0.0,
                                reach,
                                ((reach / 0.25).ceil() as usize).clamp(8, 128),
                                |rho| {
                                    f.eval(&[
                                        x[0] - rho * dir[0],
                                        x[1] - rho * dir[1],
                                        x[2] - rho * dir[2],
                                    ]) * kernel.profile(3, rho)
                                        * rho
                                        * rho
                                },
                            );
                    }
                }
                acc * 2.0 * std::f64::consts::PI * std::f64::consts::PI
                    / (n_theta * n_phi) as f64
            }
        })
        .collect();
    let bound: Vec<f64> = maximal.values().iter().map(|&m| m * kernel.mass()).collect();
    let flat_points: Vec<f64> = points.iter().map(|x| x[0]).collect();
    Ok(domination_report(flat_points, conv, bound, kernel.mass()))
}

/// Backward maximal function of the first derivative of a closed-form
/// entry, evaluated exactly through the catalog derivative.
pub fn m_minus_derivative(f: &SampledFunction1D, scales: &[f64]) -> Result<MaximalResult> {
    let grid = f.grid();
    validate_scales(grid, scales)?;
    let cf = f.closed_form().ok_or_else(|| {
        FracError::ParameterOutOfRange("derivative averages need a closed form".into())
    })?;
    let points: Vec<f64> = grid.points().collect();
    let clip = clip_1d(f);
    let w_cap = panel_cap_1d(cf.length_scale() / 2.0, cf.osc_freq());
    let (values, argmax_scale) = sup_interval_averages(
        |t| cf.d1(t).abs(),
        &points,
        scales,
        true,
        clip,
        &cf.breakpoints(),
        w_cap,
    );
    Ok(MaximalResult {
        window_indices: (0..grid.n_points()).collect(),
        values,
        argmax_scale,
        scales: scales.to_vec(),
    })
}

/// Centered-ball maximal function of the Hessian norm of a closed-form
/// entry.
pub fn m_hl_hessian(f: &SampledFunctionND, radii: &[f64]) -> Result<MaximalResult> {
    let grid = f.grid();
    let cf = f.closed_form().ok_or_else(|| {
        FracError::ParameterOutOfRange("Hessian averages need a closed form".into())
    })?;
    if radii.is_empty() || radii.iter().any(|&r| r <= 0.0) {
        return Err(FracError::ParameterOutOfRange("radii must be positive".into()));
    }
    let points: Vec<Vec<f64>> = (0..grid.n_total()).map(|i| grid.point(i)).collect();
    let (values, argmax_scale) =
        sup_ball_averages(|x| cf.hessian_norm(x), grid.dim(), &points, radii, 0.25);
    Ok(MaximalResult {
        window_indices: (0..grid.n_total()).collect(),
        values,
        argmax_scale,
        scales: radii.to_vec(),
    })
}

/// Per-point supremum of the fractional derivative over an order lattice,
/// with the ratio to its maximal-function majorant.
#[derive(Debug, Clone)]
pub struct OrderSupReport {
    pub points: Vec<f64>,
    pub sup_values: Vec<f64>,
    pub argmax_order: Vec<f64>,
    pub majorant: Vec<f64>,
    /// Max over points of `sup_values / majorant`: the observed constant.
    pub observed_constant: f64,
}

/// `sup_alpha |D^alpha f(t)|` against `M^-(f')(t) + M^- f(t)`.
pub fn order_sup_fracderiv(
    f: &SampledFunction1D,
    alpha_lattice: &[f64],
    spec: &QuadratureSpec,
) -> Result<OrderSupReport> {
    if alpha_lattice.is_empty() {
        return Err(FracError::ParameterOutOfRange("empty order lattice".into()));
    }
    let cf = f.closed_form().ok_or_else(|| {
        FracError::ParameterOutOfRange("order supremum needs closed-form derivatives".into())
    })?;
    let orders: Result<Vec<FracOrder>> =
        alpha_lattice.iter().map(|&a| FracOrder::new(a)).collect();
    let orders = orders?;
    let grid = f.grid();
    let points: Vec<f64> = grid.points().collect();
    let sup: Result<Vec<(f64, f64)>> = points
        .par_iter()
        .map(|&t| {
            let mut best = 0.0f64;
            let mut arg = orders[0].value();
            for alpha in &orders {
                let (v, _) = crate::fracderiv::marchaud_left_at(f, t, alpha, spec)?;
                if v.abs() > best {
                    best = v.abs();
                    arg = alpha.value();
                }
            }
            Ok((best, arg))
        })
        .collect();
    let sup = sup?;
    let scales = default_scales(grid);
    let clip = clip_1d(f);
    let w_cap = panel_cap_1d(cf.length_scale(), cf.osc_freq());
    let breakpoints = cf.breakpoints();
    let (m_f, _) = sup_interval_averages(
        |t| f.eval(t).abs(),
        &points,
        &scales,
        true,
        clip,
        &breakpoints,
        w_cap,
    );
    let (m_df, _) = sup_interval_averages(
        |t| cf.d1(t).abs(),
        &points,
        &scales,
        true,
        clip,
        &breakpoints,
        w_cap,
    );
    let majorant: Vec<f64> = m_f.iter().zip(&m_df).map(|(a, b)| a + b).collect();
    let mut observed = 0.0f64;
    for ((v, _), m) in sup.iter().zip(&majorant) {
        if *m > 1e-300 {
            observed = observed.max(v / m);
        }
    }
    Ok(OrderSupReport {
        points,
        sup_values: sup.iter().map(|s| s.0).collect(),
        argmax_order: sup.iter().map(|s| s.1).collect(),
        majorant,
        observed_constant: observed,
    })
}

/// `sup_{s, eps} |T_{s,eps} f(x)|` against `M(D^2 f)(x) + M f(x)`.
pub fn order_sup_fraclap(
    f: &SampledFunctionND,
    s_lattice: &[f64],
    eps_lattice: &[f64],
    spec: &QuadratureSpec,
) -> Result<OrderSupReport> {
    if s_lattice.is_empty() || eps_lattice.is_empty() {
        return Err(FracError::ParameterOutOfRange("empty order lattice".into()));
    }
    let cf = f.closed_form().ok_or_else(|| {
        FracError::ParameterOutOfRange("order supremum needs closed-form derivatives".into())
    })?;
    let grid = f.grid();
    let orders: Result<Vec<FracOrder>> = s_lattice.iter().map(|&s| FracOrder::new(s)).collect();
    let orders = orders?;
    let points: Vec<Vec<f64>> = (0..grid.n_total()).map(|i| grid.point(i)).collect();
    let sup: Result<Vec<(f64, f64)>> = points
        .par_iter()
        .map(|x| {
            let mut best = 0.0f64;
            let mut arg = orders[0].value();
            for s in &orders {
                for &eps in eps_lattice {
                    let v = crate::fraclap::truncated_ts_eps_at(f, x, s, eps, spec)?;
                    if v.abs() > best {
                        best = v.abs();
                        arg = s.value();
                    }
                }
            }
            Ok((best, arg))
        })
        .collect();
    let sup = sup?;
    let radii = default_radii(grid.axis(0));
    let w_cap = 0.5;
    let (m_f, _) = sup_ball_averages(|x| cf.value(x).abs(), grid.dim(), &points, &radii, w_cap);
    let (m_h, _) =
        sup_ball_averages(|x| cf.hessian_norm(x), grid.dim(), &points, &radii, w_cap);
    let majorant: Vec<f64> = m_f.iter().zip(&m_h).map(|(a, b)| a + b).collect();
    let mut observed = 0.0f64;
    for ((v, _), m) in sup.iter().zip(&majorant) {
        if *m > 1e-300 {
            observed = observed.max(v / m);
        }
    }
    Ok(OrderSupReport {
        points: points.iter().map(|x| x[0]).collect(),
        sup_values: sup.iter().map(|s| s.0).collect(),
        argmax_order: sup.iter().map(|s| s.1).collect(),
        majorant,
        observed_constant: observed,
    })
}

/// Default radius lattice for ball averages: half-dyadic from one spacing
/// to the axis span.
pub fn default_radii(axis: &Grid1D) -> Vec<f64> {
    let h = axis.spacing();
    let span = axis.t_max() - axis.t_min();
    let mut radii = Vec::new();
    let mut r = h.max(span / 512.0);
    while r <= span {
        radii.push(r);
        r *= std::f64::consts::SQRT_2;
    }
    radii
}
