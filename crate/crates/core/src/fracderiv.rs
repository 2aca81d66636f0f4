//! One-sided fractional derivatives of order `alpha` in `(0,1)`, the
//! inverse fractional integral, a periodic spectral oracle, and the
//! order-limit sweeps.
//!
//! The singular integrals are evaluated as
//!
//! ```text
//! value = (1/Gamma(-alpha)) * [ stub + cascade + mid + tail ]
//! ```
//!
//! where `stub` is a three-term closed-form expansion over `[0, eps]`
//! (using f', f'' and a differenced f'''), `cascade` is Gauss--Legendre on
//! geometric panels from `eps` up to the split point, `mid` covers
//! `[split, tail_radius]` with panels aligned to support edges, and `tail`
//! combines the exact `-f(t) T^{-alpha}/alpha` term with a decay-class
//! bound (or an averaged oscillatory continuation) for the rest.

use crate::catalog::DecayClass;
use crate::error::{FracError, Result};
use crate::function::SampledFunction1D;
use crate::quad::{oscillatory_tail, GaussRule, QuadratureSpec, Substitution};
use crate::special::FracOrder;
use crate::weight::Weight1D;
use rayon::prelude::*;

/// Direction of the one-sided difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Differences reach into the past: `f(t - tau) - f(t)`.
    Left,
    /// Differences reach into the future: `f(t + tau) - f(t)`.
    Right,
    /// The order `-alpha` integral (no differencing).
    Integral,
}

/// Values of a fractional-order operator on a grid window.
#[derive(Debug, Clone)]
pub struct FracDerivResult {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub error_estimate: Vec<f64>,
    pub order: f64,
    pub variant: Variant,
}

impl FracDerivResult {
    pub fn max_abs_error(&self) -> f64 {
        self.error_estimate.iter().fold(0.0f64, |m, e| m.max(*e))
    }
}

/// What the singular-integral engine needs to know about a function of one
/// real variable. Implemented by sampled functions and by
/// quadrature-backed evaluators (used for operator composition).
pub trait LineFunction: Sync {
    fn value(&self, t: f64) -> f64;
    fn d1(&self, t: f64) -> f64;
    fn d2(&self, t: f64) -> f64;
    fn d3(&self, t: f64) -> f64 {
        let h = 1e-4;
        (self.d2(t + h) - self.d2(t - h)) / (2.0 * h)
    }
    fn diff_back(&self, t: f64, tau: f64) -> f64 {
        self.value(t - tau) - self.value(t)
    }
    fn diff_fwd(&self, t: f64, tau: f64) -> f64 {
        self.value(t + tau) - self.value(t)
    }
    /// Whether small differences carry relative (not absolute) accuracy.
    fn stable_diff(&self) -> bool {
        false
    }
    fn decay_class(&self) -> DecayClass;
    /// Exact support, when the function vanishes outside an interval
    /// (either end may be infinite).
    fn support(&self) -> Option<(f64, f64)> {
        None
    }
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
    fn osc_freq(&self) -> Option<f64> {
        None
    }
    fn length_scale(&self) -> f64 {
        1.0
    }
    fn abs_mass_left_of(&self, y: f64) -> Option<f64> {
        let _ = y;
        None
    }
    fn abs_mass_right_of(&self, y: f64) -> Option<f64> {
        let _ = y;
        None
    }
}

impl LineFunction for SampledFunction1D {
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }
    fn d1(&self, t: f64) -> f64 {
        self.d1_at(t)
    }
    fn d2(&self, t: f64) -> f64 {
        self.d2_at(t)
    }
    fn diff_back(&self, t: f64, tau: f64) -> f64 {
        SampledFunction1D::diff_back(self, t, tau)
    }
    fn diff_fwd(&self, t: f64, tau: f64) -> f64 {
        SampledFunction1D::diff_fwd(self, t, tau)
    }
    fn stable_diff(&self) -> bool {
        self.has_stable_diff()
    }
    fn decay_class(&self) -> DecayClass {
        SampledFunction1D::decay_class(self)
    }
    fn support(&self) -> Option<(f64, f64)> {
        self.closed_form().and_then(|cf| cf.support())
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.closed_form().map(|cf| cf.breakpoints()).unwrap_or_default()
    }
    fn osc_freq(&self) -> Option<f64> {
        self.closed_form().and_then(|cf| cf.osc_freq())
    }
    fn length_scale(&self) -> f64 {
        self.closed_form().map(|cf| cf.length_scale()).unwrap_or(1.0)
    }
    fn abs_mass_left_of(&self, y: f64) -> Option<f64> {
        match self.closed_form() {
            Some(cf) => cf.abs_mass_left_of(y),
            None => None,
        }
    }
    fn abs_mass_right_of(&self, y: f64) -> Option<f64> {
        match self.closed_form() {
            Some(cf) => cf.abs_mass_right_of(y),
            None => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Backward,
    Forward,
}

/// Budget resolution: panels of fixed Gauss order, cascade depth driven by
/// `n_singular / (1 - alpha)` capped at 2^20 total nodes; quadrature-backed
/// integrands cap the depth so roundoff in their differences is not
/// amplified by the `tau^{-1-alpha}` weight.
fn cascade_depth(spec: &QuadratureSpec, alpha: f64, stable: bool, gl_order: usize) -> usize {
    let n_eff = ((spec.n_singular as f64 / (1.0 - alpha)).ceil() as usize).min(1 << 20);
    let depth = (n_eff / gl_order).max(12);
    if stable {
        depth.min(52)
    } else {
        depth.min(20)
    }
}

fn gl_order_for(spec: &QuadratureSpec) -> usize {
    (spec.n_singular / 8).clamp(4, 16)
}

#[doc(hidden)]
pub struct EnginePieces {
    pub total: f64,
    pub tail_bound: f64,
    pub osc_remainder: f64,
    pub stub_bound: f64,
}

/// The common integral `int_0^inf (f(t -/+ tau) - f(t)) tau^{-1-alpha} dtau`
/// without the Gamma prefactor.
#[doc(hidden)]
pub fn difference_integral_debug(
    f: &dyn LineFunction,
    t: f64,
    alpha: f64,
    spec: &QuadratureSpec,
    backward: bool,
    gl_order: usize,
) -> EnginePieces {
    difference_integral(
        f,
        t,
        alpha,
        spec,
        if backward { Side::Backward } else { Side::Forward },
        gl_order,
    )
}

fn difference_integral(
    f: &dyn LineFunction,
    t: f64,
    alpha: f64,
    spec: &QuadratureSpec,
    side: Side,
    gl_order: usize,
) -> EnginePieces {
    let rule = GaussRule::new(gl_order);
    let sgn = match side {
        Side::Backward => -1.0,
        Side::Forward => 1.0,
    };
    let diff = |tau: f64| match side {
        Side::Backward => f.diff_back(t, tau),
        Side::Forward => f.diff_fwd(t, tau),
    };
    let split = spec.split_point;
    let depth = cascade_depth(spec, alpha, f.stable_diff(), gl_order);

    // stub on [0, eps]: three Taylor terms of the difference
    let eps = split * 0.5f64.powi(depth as i32);
    let p1 = eps.powf(1.0 - alpha) / (1.0 - alpha);
    let p2 = eps.powf(2.0 - alpha) / (2.0 - alpha);
    let p3 = eps.powf(3.0 - alpha) / (3.0 - alpha);
    let stub = sgn * f.d1(t) * p1 + f.d2(t) / 2.0 * p2 + sgn * f.d3(t) / 6.0 * p3;
    let stub_bound = f.d3(t).abs().max(1.0) * eps.powf(4.0 - alpha) / (4.0 - alpha);

    // positions in tau where the integrand loses smoothness
    let tau_kinks: Vec<f64> = f
        .breakpoints()
        .iter()
        .map(|&bp| match side {
            Side::Backward => t - bp,
            Side::Forward => bp - t,
        })
        .filter(|&tau| tau > 0.0)
        .collect();

    // graded cascade on [eps, split], with interior kinks handled by
    // local splitting and grading
    let integrand = |tau: f64| diff(tau) * tau.powf(-1.0 - alpha);
    let scale_cap = (f.length_scale() / 2.0).clamp(1e-3, 8.0);
    let cascade_of = |g: &dyn Fn(f64) -> f64| -> f64 {
        let mut acc = 0.0;
        let mut hi = split;
        for _ in 0..depth {
            let lo = hi * 0.5;
            acc += crate::quad::integrate_with_kinks(
                &rule,
                lo,
                hi,
                &tau_kinks,
                scale_cap.min(hi - lo),
                24,
                g,
            );
            hi = lo;
        }
        acc
    };
    let cascade = match spec.substitution {
        Substitution::LogSubstitute => cascade_of(&integrand),
        Substitution::TaylorSubtract => {
            // remove the first Taylor term analytically, add it back in
            // closed form over [eps, split]
            let d1 = f.d1(t);
            let reg = |tau: f64| (diff(tau) - sgn * d1 * tau) * tau.powf(-1.0 - alpha);
            cascade_of(&reg)
                + sgn * d1 * (split.powf(1.0 - alpha) - eps.powf(1.0 - alpha)) / (1.0 - alpha)
        }
    };

    // mid region [split, t_eff]
    let radius = spec.tail_radius;
    let t_eff = match (side, f.support()) {
        // once the whole support has been passed the difference reduces to
        // -f(t), which the analytic tail term carries exactly
        (Side::Backward, Some((lo, _))) => radius.max(t - lo).max(split),
        (Side::Forward, Some((_, hi))) => radius.max(hi - t).max(split),
        _ => radius,
    };
    let osc_cap = f.osc_freq().map(|k| 1.5 / k).unwrap_or(f64::INFINITY);
    let base_cap = osc_cap.min(f.length_scale()).clamp(0.05, 8.0);
    let mut mid = 0.0;
    let mut lo = split;
    while lo < t_eff {
        let hi = (lo * 2.0).min(t_eff);
        // panel width may grow with the octave, but never beyond the
        // oscillation cap
        let local_cap = osc_cap.min(base_cap.max(lo / 8.0));
        mid += crate::quad::integrate_with_kinks(&rule, lo, hi, &tau_kinks, local_cap, 24, integrand);
        lo = hi;
    }

    // tail beyond t_eff: the -f(t) part is exact; the rest is bounded via
    // the decay class or continued as an averaged oscillatory series
    let analytic = -f.value(t) * t_eff.powf(-alpha) / alpha;
    let shifted_kernel = |tau: f64| match side {
        Side::Backward => f.value(t - tau) * tau.powf(-1.0 - alpha),
        Side::Forward => f.value(t + tau) * tau.powf(-1.0 - alpha),
    };
    let (osc_value, osc_remainder, tail_bound) = match (f.osc_freq(), f.decay_class()) {
        (Some(k), _) => {
            let (value, rem) =
                oscillatory_tail(&rule, t_eff, std::f64::consts::PI / k, 48, shifted_kernel);
            (value, rem, 0.0)
        }
        (None, DecayClass::CompactSupport) => (0.0, 0.0, 0.0),
        (None, DecayClass::Bounded) => {
            // non-oscillatory bounded: the shifted part equals f's limit at
            // infinity times the exact kernel integral; constants cancel
            // against the analytic term, so integrate one more stretch and
            // bound the remainder by the kernel tail
            let far = match side {
                Side::Backward => f.value(t - 8.0 * t_eff),
                Side::Forward => f.value(t + 8.0 * t_eff),
            };
            let stretch = rule.integrate_panels(t_eff, 8.0 * t_eff, 64, shifted_kernel);
            (
                stretch + far * (8.0 * t_eff).powf(-alpha) / alpha,
                0.0,
                far.abs() * 1e-14,
            )
        }
        (None, _) => {
            let mass = match side {
                Side::Backward => f.abs_mass_left_of(t - t_eff),
                Side::Forward => f.abs_mass_right_of(t + t_eff),
            };
            let bound = match mass {
                Some(m) => m * t_eff.powf(-1.0 - alpha),
                None => {
                    let edge = match side {
                        Side::Backward => f.value(t - t_eff).abs(),
                        Side::Forward => f.value(t + t_eff).abs(),
                    };
                    edge * t_eff.powf(-alpha) / alpha
                }
            };
            (0.0, 0.0, bound)
        }
    };

    EnginePieces {
        total: stub + cascade + mid + analytic + osc_value,
        tail_bound,
        osc_remainder,
        stub_bound,
    }
}

fn one_sided_derivative_at(
    f: &dyn LineFunction,
    t: f64,
    alpha: &FracOrder,
    spec: &QuadratureSpec,
    side: Side,
) -> Result<(f64, f64)> {
    let a = alpha.value();
    let scale = alpha.inv_gamma_neg();
    let m = gl_order_for(spec);
    let fine = difference_integral(f, t, a, spec, side, m);
    let coarse = difference_integral(f, t, a, spec, side, (m - 2).max(3));
    let value = scale * fine.total;
    let err = scale.abs()
        * ((fine.total - coarse.total).abs()
            + fine.tail_bound
            + fine.osc_remainder
            + fine.stub_bound);
    if !value.is_finite() {
        return Err(FracError::QuadratureNotConverged(format!(
            "non-finite value at t = {t}"
        )));
    }
    if (fine.total - coarse.total).abs() > 1e-3 * (1.0 + fine.total.abs()) {
        return Err(FracError::QuadratureNotConverged(format!(
            "order-halving check moved the value by {:.3e} at t = {t}",
            (fine.total - coarse.total).abs()
        )));
    }
    Ok((value, err))
}

fn check_left_decay(f: &dyn LineFunction) -> Result<()> {
    if f.decay_class() == DecayClass::ExponentialRight {
        return Err(FracError::DivergentTail(
            "function grows exponentially toward -inf".into(),
        ));
    }
    Ok(())
}

fn check_right_decay(f: &dyn LineFunction) -> Result<()> {
    if f.decay_class() == DecayClass::ExponentialLeft {
        return Err(FracError::DivergentTail(
            "function grows exponentially toward +inf".into(),
        ));
    }
    Ok(())
}

/// Single-point backward fractional derivative.
pub fn marchaud_left_at(
    f: &dyn LineFunction,
    t: f64,
    alpha: &FracOrder,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    spec.validate()?;
    check_left_decay(f)?;
    one_sided_derivative_at(f, t, alpha, spec, Side::Backward)
}

/// Single-point forward fractional derivative.
pub fn marchaud_right_at(
    f: &dyn LineFunction,
    t: f64,
    alpha: &FracOrder,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    spec.validate()?;
    check_right_decay(f)?;
    one_sided_derivative_at(f, t, alpha, spec, Side::Forward)
}

fn map_over_grid(
    f: &SampledFunction1D,
    alpha: &FracOrder,
    variant: Variant,
    op: impl Fn(f64) -> Result<(f64, f64)> + Sync,
) -> Result<FracDerivResult> {
    let points: Vec<f64> = f.grid().points().collect();
    let computed: Result<Vec<(f64, f64)>> = points.par_iter().map(|&t| op(t)).collect();
    let computed = computed?;
    Ok(FracDerivResult {
        points,
        values: computed.iter().map(|c| c.0).collect(),
        error_estimate: computed.iter().map(|c| c.1).collect(),
        order: alpha.value(),
        variant,
    })
}

/// Backward fractional derivative on the whole grid.
pub fn marchaud_left(
    f: &SampledFunction1D,
    alpha: &FracOrder,
    spec: &QuadratureSpec,
) -> Result<FracDerivResult> {
    spec.validate()?;
    check_left_decay(f)?;
    map_over_grid(f, alpha, Variant::Left, |t| {
        one_sided_derivative_at(f, t, alpha, spec, Side::Backward)
    })
}

/// Forward fractional derivative on the whole grid.
pub fn marchaud_right(
    f: &SampledFunction1D,
    alpha: &FracOrder,
    spec: &QuadratureSpec,
) -> Result<FracDerivResult> {
    spec.validate()?;
    check_right_decay(f)?;
    map_over_grid(f, alpha, Variant::Right, |t| {
        one_sided_derivative_at(f, t, alpha, spec, Side::Forward)
    })
}

/// Single-point order `-alpha` integral
/// `(1/Gamma(alpha)) int_0^inf f(t - tau) tau^{alpha - 1} dtau`.
pub fn weyl_integral_at(
    f: &dyn LineFunction,
    t: f64,
    alpha: &FracOrder,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    spec.validate()?;
    weyl_decay_check(f)?;
    let a = alpha.value();
    let m = gl_order_for(spec);
    let fine = weyl_pieces(f, t, a, spec, m);
    let coarse = weyl_pieces(f, t, a, spec, (m - 2).max(3));
    let gamma_a = crate::special::gamma(a)?;
    let value = fine.total / gamma_a;
    let err = ((fine.total - coarse.total).abs() + fine.tail_bound + fine.stub_bound)
        / gamma_a.abs();
    if (fine.total - coarse.total).abs() > 1e-3 * (1.0 + fine.total.abs()) {
        return Err(FracError::QuadratureNotConverged(format!(
            "order-halving check moved the value by {:.3e} at t = {t}",
            (fine.total - coarse.total).abs()
        )));
    }
    Ok((value, err))
}

fn weyl_decay_check(f: &dyn LineFunction) -> Result<()> {
    match f.decay_class() {
        DecayClass::CompactSupport | DecayClass::Gaussian | DecayClass::ExponentialLeft => Ok(()),
        _ => Err(FracError::DivergentTail(
            "order -alpha integral needs integrable decay toward -inf".into(),
        )),
    }
}

fn weyl_pieces(
    f: &dyn LineFunction,
    t: f64,
    alpha: f64,
    spec: &QuadratureSpec,
    gl_order: usize,
) -> EnginePieces {
    let rule = GaussRule::new(gl_order);
    let split = spec.split_point;
    let depth = cascade_depth(spec, 1.0 - alpha, true, gl_order);
    let eps = split * 0.5f64.powi(depth as i32);

    // stub: f(t - tau) ~ f - tau f' + tau^2/2 f''
    let stub = f.value(t) * eps.powf(alpha) / alpha
        - f.d1(t) * eps.powf(1.0 + alpha) / (1.0 + alpha)
        + f.d2(t) / 2.0 * eps.powf(2.0 + alpha) / (2.0 + alpha);
    let stub_bound = f.d3(t).abs().max(1.0) * eps.powf(3.0 + alpha) / (3.0 + alpha);

    let integrand = |tau: f64| f.value(t - tau) * tau.powf(alpha - 1.0);
    let cascade_kinks: Vec<f64> = f
        .breakpoints()
        .iter()
        .map(|&bp| t - bp)
        .filter(|&tau| tau > 0.0)
        .collect();
    let scale_cap = (f.length_scale() / 2.0).clamp(1e-3, 8.0);
    let mut cascade = 0.0;
    let mut hi = split;
    for _ in 0..depth {
        let lo = hi * 0.5;
        cascade += crate::quad::integrate_with_kinks(
            &rule,
            lo,
            hi,
            &cascade_kinks,
            scale_cap.min(hi - lo),
            20,
            integrand,
        );
        hi = lo;
    }

    // mid region: stop after the support is exhausted
    let radius = spec.tail_radius;
    let t_eff = match f.support() {
        Some((lo, _)) => (t - lo).clamp(split, radius.max(t - lo)),
        None => radius,
    };
    let base_cap = f.length_scale().clamp(0.25, radius / 4.0);
    let tau_kinks: Vec<f64> = f
        .breakpoints()
        .iter()
        .map(|&bp| t - bp)
        .filter(|&tau| tau > 0.0)
        .collect();
    let mut mid = 0.0;
    let mut lo = split;
    while lo < t_eff {
        let hi = (lo * 2.0).min(t_eff);
        let local_cap = base_cap.max(lo / 8.0);
        mid += crate::quad::integrate_with_kinks(&rule, lo, hi, &tau_kinks, local_cap, 20, integrand);
        lo = hi;
    }

    let tail_bound = match f.support() {
        Some(_) => 0.0,
        None => match f.abs_mass_left_of(t - t_eff) {
            Some(mass) => mass * t_eff.powf(alpha - 1.0),
            None => f.value(t - t_eff).abs() * t_eff.powf(alpha - 1.0),
        },
    };

    EnginePieces {
        total: stub + cascade + mid,
        tail_bound,
        osc_remainder: 0.0,
        stub_bound,
    }
}

/// Order `-alpha` integral on the whole grid.
pub fn weyl_integral(
    f: &SampledFunction1D,
    alpha: &FracOrder,
    spec: &QuadratureSpec,
) -> Result<FracDerivResult> {
    spec.validate()?;
    weyl_decay_check(f)?;
    map_over_grid(f, alpha, Variant::Integral, |t| {
        weyl_integral_at(f, t, alpha, spec)
    })
}

/// Quadrature-backed evaluator for the order `-alpha` integral of a
/// closed-form function, with derivative evaluators obtained by moving the
/// derivative inside the convolution.
pub struct FracIntegralEvaluator<'a> {
    f: &'a SampledFunction1D,
    alpha: FracOrder,
    spec: QuadratureSpec,
}

impl<'a> FracIntegralEvaluator<'a> {
    pub fn new(
        f: &'a SampledFunction1D,
        alpha: &FracOrder,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        weyl_decay_check(f)?;
        if f.closed_form().is_none() {
            return Err(FracError::ParameterOutOfRange(
                "operator composition needs a closed-form integrand".into(),
            ));
        }
        Ok(FracIntegralEvaluator { f, alpha: *alpha, spec: spec.clone() })
    }

    fn weyl_of(&self, g: &dyn LineFunction, t: f64) -> f64 {
        let m = gl_order_for(&self.spec);
        let pieces = weyl_pieces(g, t, self.alpha.value(), &self.spec, m);
        pieces.total / crate::special::gamma(self.alpha.value()).expect("alpha in (0,1)")
    }
}

// derivative adapters: reuse f's decay metadata, shift derivative orders
struct DerivOnce<'a>(&'a SampledFunction1D);

impl LineFunction for DerivOnce<'_> {
    fn value(&self, t: f64) -> f64 {
        self.0.d1_at(t)
    }
    fn d1(&self, t: f64) -> f64 {
        self.0.d2_at(t)
    }
    fn d2(&self, t: f64) -> f64 {
        let h = 1e-4;
        (self.0.d2_at(t + h) - self.0.d2_at(t - h)) / (2.0 * h)
    }
    fn decay_class(&self) -> DecayClass {
        LineFunction::decay_class(self.0)
    }
    fn support(&self) -> Option<(f64, f64)> {
        LineFunction::support(self.0)
    }
    fn breakpoints(&self) -> Vec<f64> {
        LineFunction::breakpoints(self.0)
    }
    fn length_scale(&self) -> f64 {
        LineFunction::length_scale(self.0) / 2.0
    }
    fn abs_mass_left_of(&self, y: f64) -> Option<f64> {
        // derivative of the catalog families decays at the same rate; the
        // bound is crude but only feeds error estimates
        LineFunction::abs_mass_left_of(self.0, y).map(|m| 4.0 * m)
    }
}

struct DerivTwice<'a>(&'a SampledFunction1D);

impl LineFunction for DerivTwice<'_> {
    fn value(&self, t: f64) -> f64 {
        self.0.d2_at(t)
    }
    fn d1(&self, t: f64) -> f64 {
        let h = 1e-4;
        (self.0.d2_at(t + h) - self.0.d2_at(t - h)) / (2.0 * h)
    }
    fn d2(&self, t: f64) -> f64 {
        let h = 1e-3;
        (self.0.d2_at(t + h) - 2.0 * self.0.d2_at(t) + self.0.d2_at(t - h)) / (h * h)
    }
    fn decay_class(&self) -> DecayClass {
        LineFunction::decay_class(self.0)
    }
    fn support(&self) -> Option<(f64, f64)> {
        LineFunction::support(self.0)
    }
    fn breakpoints(&self) -> Vec<f64> {
        LineFunction::breakpoints(self.0)
    }
    fn length_scale(&self) -> f64 {
        LineFunction::length_scale(self.0) / 3.0
    }
    fn abs_mass_left_of(&self, y: f64) -> Option<f64> {
        LineFunction::abs_mass_left_of(self.0, y).map(|m| 16.0 * m)
    }
}

impl LineFunction for FracIntegralEvaluator<'_> {
    fn value(&self, t: f64) -> f64 {
        self.weyl_of(self.f, t)
    }
    fn d1(&self, t: f64) -> f64 {
        self.weyl_of(&DerivOnce(self.f), t)
    }
    fn d2(&self, t: f64) -> f64 {
        self.weyl_of(&DerivTwice(self.f), t)
    }
    fn decay_class(&self) -> DecayClass {
        // left tail inherits f's decay; the right side never enters the
        // backward differences
        LineFunction::decay_class(self.f)
    }
    fn support(&self) -> Option<(f64, f64)> {
        // the integral smears support to the right only
        LineFunction::support(self.f).map(|(lo, _)| (lo, f64::INFINITY))
    }
    fn breakpoints(&self) -> Vec<f64> {
        // the smoothed field keeps reduced regularity at both original
        // support edges
        LineFunction::support(self.f).map(|(lo, hi)| vec![lo, hi]).unwrap_or_default()
    }
    fn length_scale(&self) -> f64 {
        LineFunction::length_scale(self.f)
    }
    fn abs_mass_left_of(&self, y: f64) -> Option<f64> {
        // |D^{-alpha} f| <= |f| mass bound within the kernel factor on the
        // far-left tail, crude but monotone
        LineFunction::abs_mass_left_of(self.f, y).map(|m| 2.0 * m)
    }
}

/// Report of the composition check: apply the order `-alpha` integral, then
/// the order `alpha` derivative, and compare with the identity.
#[derive(Debug, Clone)]
pub struct CompositionReport {
    pub alpha: f64,
    pub window: (f64, f64),
    pub points: Vec<f64>,
    pub recovered: Vec<f64>,
    pub expected: Vec<f64>,
    pub sup_distance: f64,
    pub l2_distance: f64,
}

/// `D^{alpha} (D^{-alpha} f) = f`, checked on the interior half-window of
/// `f`'s grid.
pub fn ftfc_compose(
    f: &SampledFunction1D,
    alpha: &FracOrder,
    spec: &QuadratureSpec,
) -> Result<CompositionReport> {
    spec.validate()?;
    let grid = f.grid();
    let quarter = 0.25 * (grid.t_max() - grid.t_min());
    let window = (grid.t_min() + quarter, grid.t_max() - quarter);
    let idx = grid.interior_indices(quarter);
    if idx.is_empty() {
        return Err(FracError::WindowTooNarrow("composition window".into()));
    }
    let integral = FracIntegralEvaluator::new(f, alpha, spec)?;
    let points: Vec<f64> = idx.iter().map(|&i| grid.point(i)).collect();
    let recovered: Result<Vec<f64>> = points
        .par_iter()
        .map(|&t| marchaud_left_at(&integral, t, alpha, spec).map(|v| v.0))
        .collect();
    let recovered = recovered?;
    let expected: Vec<f64> = points.iter().map(|&t| f.eval(t)).collect();
    let mut sup = 0.0f64;
    let mut l2 = 0.0f64;
    let h = grid.spacing();
    for (r, e) in recovered.iter().zip(&expected) {
        sup = sup.max((r - e).abs());
        l2 += (r - e) * (r - e) * h;
    }
    Ok(CompositionReport {
        alpha: alpha.value(),
        window,
        points,
        recovered,
        expected,
        sup_distance: sup,
        l2_distance: l2.sqrt(),
    })
}

/// Periodic spectral oracle: multiplies the discrete spectrum by the
/// principal branch of `(i xi)^alpha`. Valid for trigonometric polynomials;
/// the grid must carry one full period with matching endpoint values.
pub fn spectral_fracderiv(f: &SampledFunction1D, alpha: &FracOrder) -> Result<SampledFunction1D> {
    spectral_multiplier(f, |xi| {
        let mag = xi.abs().powf(alpha.value());
        let phase = alpha.value() * std::f64::consts::FRAC_PI_2 * xi.signum();
        (mag * phase.cos(), mag * phase.sin())
    })
}

/// Shared periodic multiplier machinery (also used by the Laplacian
/// oracle). The symbol returns `(re, im)` for frequency `xi`.
pub(crate) fn spectral_multiplier(
    f: &SampledFunction1D,
    symbol: impl Fn(f64) -> (f64, f64),
) -> Result<SampledFunction1D> {
    let grid = f.grid();
    let n_total = grid.n_points();
    let values = f.values();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mismatch = (values[0] - values[n_total - 1]).abs();
    if mismatch > 1e-8 * scale {
        return Err(FracError::NonPeriodicInput { mismatch });
    }
    let n = n_total - 1; // drop the duplicated endpoint
    let period = grid.t_max() - grid.t_min();
    // forward transform, O(n^2); grids stay small enough for an oracle
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for m in 0..n {
        let mut sr = 0.0;
        let mut si = 0.0;
        for (j, v) in values[..n].iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * (m * j) as f64 / n as f64;
            sr += v * phase.cos();
            si += v * phase.sin();
        }
        re[m] = sr / n as f64;
        im[m] = si / n as f64;
    }
    // apply the symbol at signed frequencies, zeroing the mean and (for
    // even n) the unpaired top mode
    let mut out_re = vec![0.0; n];
    let mut out_im = vec![0.0; n];
    for m in 1..n {
        let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        if n % 2 == 0 && m == n / 2 {
            continue;
        }
        let xi = 2.0 * std::f64::consts::PI * signed / period;
        let (sr, si) = symbol(xi);
        out_re[m] = re[m] * sr - im[m] * si;
        out_im[m] = re[m] * si + im[m] * sr;
    }
    // inverse transform
    let mut out = vec![0.0; n_total];
    for (j, slot) in out.iter_mut().enumerate().take(n) {
        let mut acc = 0.0;
        for m in 0..n {
            let phase = 2.0 * std::f64::consts::PI * (m * j) as f64 / n as f64;
            acc += out_re[m] * phase.cos() - out_im[m] * phase.sin();
        }
        *slot = acc;
    }
    out[n_total - 1] = out[0];
    SampledFunction1D::from_values(grid.clone(), out, DecayClass::Bounded)
}

/// One row of an order-limit sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivSweepRow {
    pub alpha: f64,
    /// `|| D^alpha f - f' ||_{L^p(w)}` on the window.
    pub err_to_derivative: f64,
    /// `|| D^alpha f - f ||_{L^p(w)}` on the window.
    pub err_to_function: f64,
    pub sup_to_derivative: f64,
    pub sup_to_function: f64,
    pub max_quadrature_error: f64,
}

/// Weighted distances from `D^alpha f` to `f'` and to `f` for each order in
/// the list; rows are sorted by order.
pub fn derivative_limit_sweep(
    f: &SampledFunction1D,
    alphas: &[f64],
    p: f64,
    w: &Weight1D,
    spec: &QuadratureSpec,
    window: (f64, f64),
) -> Result<Vec<DerivSweepRow>> {
    let mut orders: Vec<f64> = alphas.to_vec();
    orders.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let grid = f.grid();
    let deriv_values: Vec<f64> = grid.points().map(|t| f.d1_at(t)).collect();
    let mut rows = Vec::with_capacity(orders.len());
    for &a in &orders {
        let alpha = FracOrder::new(a)?;
        let result = marchaud_left(f, &alpha, spec)?;
        let da = SampledFunction1D::from_values(
            grid.clone(),
            result.values.clone(),
            DecayClass::Bounded,
        )?;
        let in_window = |t: f64| t >= window.0 - 1e-12 && t <= window.1 + 1e-12;
        let mut sup_d = 0.0f64;
        let mut sup_f = 0.0f64;
        for (i, &t) in result.points.iter().enumerate() {
            if in_window(t) {
                sup_d = sup_d.max((result.values[i] - deriv_values[i]).abs());
                sup_f = sup_f.max((result.values[i] - f.values()[i]).abs());
            }
        }
        let fd = SampledFunction1D::from_values(
            grid.clone(),
            deriv_values.clone(),
            DecayClass::Bounded,
        )?;
        rows.push(DerivSweepRow {
            alpha: a,
            err_to_derivative: crate::norms::weighted_lp_distance(&da, &fd, w, p, window)?,
            err_to_function: crate::norms::weighted_lp_distance(&da, f, w, p, window)?,
            sup_to_derivative: sup_d,
            sup_to_function: sup_f,
            max_quadrature_error: result.max_abs_error(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::CatalogEntry;
    use crate::grid::Grid1D;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn sample(name: &str, grid: &Grid1D) -> SampledFunction1D {
        SampledFunction1D::sample(&CatalogEntry::parse(name).unwrap(), grid).unwrap()
    }

    fn default_grid() -> Grid1D {
        Grid1D::new(-6.0, 6.0, 49).unwrap()
    }

    #[test]
    fn constants_have_zero_derivative() {
        let f = sample("constant(5)", &default_grid());
        let alpha = FracOrder::new(0.5).unwrap();
        let r = marchaud_left(&f, &alpha, &QuadratureSpec::default()).unwrap();
        for &v in &r.values {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-10);
        }
        let r = marchaud_right(&f, &alpha, &QuadratureSpec::default()).unwrap();
        for &v in &r.values {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn exponentials_are_eigenfunctions() {
        // D^alpha e^{lambda t} = lambda^alpha e^{lambda t}
        let spec = QuadratureSpec::default();
        for (name, lambda) in [("exp_growth(0.5)", 0.5), ("exp_growth(1)", 1.0), ("exp_growth(2)", 2.0)]
        {
            let f = sample(name, &Grid1D::new(-2.0, 2.0, 9).unwrap());
            for a in [0.25, 0.5, 0.75] {
                let alpha = FracOrder::new(a).unwrap();
                let (v, err) = marchaud_left_at(&f, 0.0, &alpha, &spec).unwrap();
                let expected = (lambda as f64).powf(a);
                assert_relative_eq!(v, expected, max_relative = 1e-8);
                assert!(err < 1e-4, "error estimate {err}");
            }
        }
    }

    #[test]
    fn right_derivative_mirrors_left() {
        // e^{-t} is the forward eigenfunction
        let f = sample("exp_growth(-1)", &Grid1D::new(-2.0, 2.0, 9).unwrap());
        let alpha = FracOrder::new(0.5).unwrap();
        let (v, _) = marchaud_right_at(&f, 0.0, &alpha, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-8);
        // reflection identity on a symmetric entry
        let g = sample("gaussian", &Grid1D::new(-4.0, 4.0, 17).unwrap());
        for &t in &[-1.2, 0.0, 0.7] {
            let (right, _) =
                marchaud_right_at(&g, t, &alpha, &QuadratureSpec::default()).unwrap();
            let (left, _) =
                marchaud_left_at(&g, -t, &alpha, &QuadratureSpec::default()).unwrap();
            assert_relative_eq!(right, left, max_relative = 1e-8);
        }
    }

    #[test]
    fn divergent_directions_are_rejected() {
        let f = sample("exp_growth(-1)", &default_grid());
        let alpha = FracOrder::new(0.5).unwrap();
        assert!(matches!(
            marchaud_left(&f, &alpha, &QuadratureSpec::default()),
            Err(FracError::DivergentTail(_))
        ));
        let g = sample("exp_growth(1)", &default_grid());
        assert!(matches!(
            marchaud_right(&g, &alpha, &QuadratureSpec::default()),
            Err(FracError::DivergentTail(_))
        ));
    }

    #[test]
    fn weyl_integral_inverts_the_eigenvalue() {
        let spec = QuadratureSpec::default();
        let f = sample("exp_growth(1)", &Grid1D::new(-2.0, 2.0, 9).unwrap());
        let alpha = FracOrder::new(0.5).unwrap();
        let (v, _) = weyl_integral_at(&f, 0.0, &alpha, &spec).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-8);
        let f2 = sample("exp_growth(2)", &Grid1D::new(-2.0, 2.0, 9).unwrap());
        let (v2, _) = weyl_integral_at(&f2, 0.0, &alpha, &spec).unwrap();
        assert_relative_eq!(v2, 2f64.powf(-0.5), max_relative = 1e-8);
    }

    #[test]
    fn weyl_integral_rejects_constants() {
        let f = sample("constant(1)", &default_grid());
        let alpha = FracOrder::new(0.5).unwrap();
        assert!(matches!(
            weyl_integral(&f, &alpha, &QuadratureSpec::default()),
            Err(FracError::DivergentTail(_))
        ));
    }

    #[test]
    fn linearity_within_tolerance() {
        let grid = Grid1D::new(-4.0, 4.0, 9).unwrap();
        let g = sample("gaussian", &grid);
        let b = sample("bump", &grid);
        let alpha = FracOrder::new(0.6).unwrap();
        let spec = QuadratureSpec::default();
        for &t in &[-0.4, 0.3] {
            let (vg, _) = marchaud_left_at(&g, t, &alpha, &spec).unwrap();
            let (vb, _) = marchaud_left_at(&b, t, &alpha, &spec).unwrap();
            // 2 g + 3 b assembled as raw samples with a combined closed
            // form is not representable; check linearity through the
            // stable evaluations instead
            struct Combo<'a>(&'a SampledFunction1D, &'a SampledFunction1D);
            impl LineFunction for Combo<'_> {
                fn value(&self, t: f64) -> f64 {
                    2.0 * self.0.eval(t) + 3.0 * self.1.eval(t)
                }
                fn d1(&self, t: f64) -> f64 {
                    2.0 * self.0.d1_at(t) + 3.0 * self.1.d1_at(t)
                }
                fn d2(&self, t: f64) -> f64 {
                    2.0 * self.0.d2_at(t) + 3.0 * self.1.d2_at(t)
                }
                fn diff_back(&self, t: f64, tau: f64) -> f64 {
                    2.0 * self.0.diff_back(t, tau) + 3.0 * self.1.diff_back(t, tau)
                }
                fn stable_diff(&self) -> bool {
                    true
                }
                fn decay_class(&self) -> DecayClass {
                    DecayClass::Gaussian
                }
                fn breakpoints(&self) -> Vec<f64> {
                    vec![-1.0, 1.0]
                }
                fn abs_mass_left_of(&self, y: f64) -> Option<f64> {
                    LineFunction::abs_mass_left_of(self.0, y).map(|m| 2.0 * m + 6.0)
                }
            }
            let combo = Combo(&g, &b);
            let (vc, _) = marchaud_left_at(&combo, t, &alpha, &spec).unwrap();
            assert_relative_eq!(vc, 2.0 * vg + 3.0 * vb, max_relative = 1e-7);
        }
    }

    #[test]
    fn translation_covariance() {
        let spec = QuadratureSpec::default();
        let alpha = FracOrder::new(0.4).unwrap();
        let grid = Grid1D::new(-4.0, 4.0, 9).unwrap();
        let f = sample("gaussian", &grid);
        let f_shift = SampledFunction1D::sample(
            &CatalogEntry::parse("gaussian(1.5)").unwrap(),
            &grid,
        )
        .unwrap();
        for &t in &[-0.3, 0.9] {
            let (a, _) = marchaud_left_at(&f_shift, t, &alpha, &spec).unwrap();
            let (b, _) = marchaud_left_at(&f, t - 1.5, &alpha, &spec).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn scaling_identity() {
        // f_lambda(t) = f(lambda t) gives D^alpha f_lambda(t) =
        // lambda^alpha (D^alpha f)(lambda t); narrow gaussians are the
        // scaled family
        let spec = QuadratureSpec::default();
        let alpha = FracOrder::new(0.7).unwrap();
        let lambda = 2.0f64;
        let grid = Grid1D::new(-4.0, 4.0, 9).unwrap();
        let f = sample("gaussian", &grid);
        let f_scaled = SampledFunction1D::sample(
            &CatalogEntry::parse("gaussian(0,0.5)").unwrap(),
            &grid,
        )
        .unwrap();
        let t = 0.6;
        let (a, _) = marchaud_left_at(&f_scaled, t, &alpha, &spec).unwrap();
        let (b, _) = marchaud_left_at(&f, lambda * t, &alpha, &spec).unwrap();
        assert_relative_eq!(a, lambda.powf(alpha.value()) * b, max_relative = 1e-7);
    }

    fn periodic_grid(n: usize) -> Grid1D {
        // one full period of 2 pi including both endpoints
        Grid1D::new(0.0, 2.0 * std::f64::consts::PI, n + 1).unwrap()
    }

    #[test]
    fn spectral_oracle_on_cosines() {
        let grid = periodic_grid(128);
        let f = sample("cosine(3)", &grid);
        let alpha = FracOrder::new(0.5).unwrap();
        let out = spectral_fracderiv(&f, &alpha).unwrap();
        // (i k)^alpha acts as k^alpha cos(k t + alpha pi / 2)
        for (i, t) in grid.points().enumerate() {
            let expected = 3f64.powf(0.5) * (3.0 * t + 0.25 * std::f64::consts::PI).cos();
            assert_abs_diff_eq!(out.values()[i], expected, epsilon = 1e-9);
        }
        // at t = 0 with k = 1: cos(pi/4)
        let f1 = sample("cosine(1)", &grid);
        let out1 = spectral_fracderiv(&f1, &alpha).unwrap();
        assert_abs_diff_eq!(
            out1.values()[0],
            (0.25 * std::f64::consts::PI).cos(),
            epsilon = 1e-10
        );
        // constants map to zero
        let c = sample("constant(4)", &grid);
        let out_c = spectral_fracderiv(&c, &alpha).unwrap();
        for &v in out_c.values() {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn spectral_rejects_non_periodic_input() {
        let grid = Grid1D::new(0.0, 1.0, 33).unwrap();
        let f = sample("exp_growth(1)", &grid);
        let alpha = FracOrder::new(0.5).unwrap();
        assert!(matches!(
            spectral_fracderiv(&f, &alpha),
            Err(FracError::NonPeriodicInput { .. })
        ));
    }

    #[test]
    fn quadrature_agrees_with_spectral_oracle_on_cosine() {
        // windowed comparison away from wraparound: the integral operator
        // sees the true cos on all of R, the oracle the periodic extension,
        // which for cos is the same function
        let pgrid = periodic_grid(256);
        let f = sample("cosine(2)", &pgrid);
        let alpha = FracOrder::new(0.5).unwrap();
        let oracle = spectral_fracderiv(&f, &alpha).unwrap();
        let spec = QuadratureSpec::default();
        for idx in [64usize, 128, 192] {
            let t = pgrid.point(idx);
            let (v, _) = marchaud_left_at(&f, t, &alpha, &spec).unwrap();
            assert_abs_diff_eq!(v, oracle.values()[idx], epsilon = 1e-5);
        }
    }

    #[test]
    fn composition_recovers_the_bump() {
        let grid = Grid1D::new(-4.0, 4.0, 33).unwrap();
        let f = sample("bump", &grid);
        let alpha = FracOrder::new(0.5).unwrap();
        let report = ftfc_compose(&f, &alpha, &QuadratureSpec::default()).unwrap();
        assert!(
            report.sup_distance <= 1e-4,
            "sup distance {:.3e}",
            report.sup_distance
        );
    }

    #[test]
    fn derivative_sweep_tends_to_the_derivative() {
        let grid = Grid1D::new(-8.0, 8.0, 129).unwrap();
        let f = sample("gaussian", &grid);
        let w = Weight1D::parse("exp_decay(1)").unwrap();
        let rows = derivative_limit_sweep(
            &f,
            &[0.5, 0.9, 0.99],
            2.0,
            &w,
            &QuadratureSpec::default(),
            (-6.0, 6.0),
        )
        .unwrap();
        assert!(rows[0].err_to_derivative > rows[1].err_to_derivative);
        assert!(rows[1].err_to_derivative > rows[2].err_to_derivative);
        // and toward f for small alpha
        let rows = derivative_limit_sweep(
            &f,
            &[0.1, 0.01],
            2.0,
            &w,
            &QuadratureSpec::default(),
            (-6.0, 6.0),
        )
        .unwrap();
        assert!(rows[0].err_to_function < rows[1].err_to_function);
    }
}
