//! Panel-based quadrature: Gauss--Legendre rules, geometrically graded
//! cascades toward endpoint singularities, and an averaged tail summation
//! for slowly decaying oscillatory integrands.

use crate::error::{FracError, Result};

/// Discretization choices for the singular/improper integrals.
///
/// `split_point` separates the singular region near 0 from the far region;
/// the far region is truncated at `tail_radius` and closed with an analytic
/// correction that depends on the integrand's decay class.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    /// Where the singular region ends (default 1).
    pub split_point: f64,
    /// Node budget for the graded cascade on `(0, split_point]`.
    pub n_singular: usize,
    /// Node budget for the region `[split_point, tail_radius]`.
    pub n_tail: usize,
    /// Truncation radius for the far region.
    pub tail_radius: f64,
    /// Decreasing cutoffs used by the truncated-operator convergence reports.
    pub pv_epsilon_schedule: Vec<f64>,
    /// How the singular region is discretized.
    pub substitution: Substitution,
}

/// Strategy for the singular region.
///
/// Both integrate the raw sampled difference on geometric panels;
/// `TaylorSubtract` additionally removes the first Taylor term analytically
/// before quadrature and adds it back in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substitution {
    TaylorSubtract,
    LogSubstitute,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            split_point: 1.0,
            n_singular: 64,
            n_tail: 256,
            tail_radius: 40.0,
            pv_epsilon_schedule: vec![0.5, 0.25, 0.125, 0.0625, 0.03125],
            substitution: Substitution::LogSubstitute,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.split_point > 0.0) {
            return Err(FracError::ParameterOutOfRange(format!(
                "split_point must be positive, got {}",
                self.split_point
            )));
        }
        if self.n_singular < 16 || self.n_tail < 16 {
            return Err(FracError::ParameterOutOfRange(
                "node counts must be at least 16".into(),
            ));
        }
        if !(self.tail_radius > self.split_point) {
            return Err(FracError::ParameterOutOfRange(format!(
                "tail_radius {} must exceed split_point {}",
                self.tail_radius, self.split_point
            )));
        }
        let sched = &self.pv_epsilon_schedule;
        if sched.is_empty() || sched.windows(2).any(|w| w[1] >= w[0]) || sched.iter().any(|&e| e <= 0.0)
        {
            return Err(FracError::ParameterOutOfRange(
                "pv_epsilon_schedule must be strictly decreasing and positive".into(),
            ));
        }
        Ok(())
    }

    /// Same spec with both node budgets doubled; used for error estimates.
    pub fn doubled(&self) -> Self {
        QuadratureSpec {
            n_singular: self.n_singular * 2,
            n_tail: self.n_tail * 2,
            ..self.clone()
        }
    }
}

/// Gauss--Legendre nodes and weights on [-1, 1], computed by Newton
/// iteration on the Legendre polynomial (converges to machine precision).
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let n = m as f64;
    for i in 0..(m + 1) / 2 {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_m(x) and P'_m(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// A reusable fixed-order rule.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        GaussRule { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Integrate over `[a, b]` split into `k` equal panels.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, k: usize, mut f: F) -> f64 {
        let k = k.max(1);
        let w = (b - a) / k as f64;
        let mut acc = 0.0;
        for j in 0..k {
            let lo = a + w * j as f64;
            acc += self.integrate(lo, lo + w, &mut f);
        }
        acc
    }
}

/// Integrate `f` over `[eps, b]` on geometric panels `[b r^{k+1}, b r^k]`
/// with ratio `r = 0.5`, clustering nodes toward 0. Returns the integral and
/// the actual inner cutoff reached (`b * 0.5^depth`).
pub fn integrate_graded<F: FnMut(f64) -> f64>(
    rule: &GaussRule,
    b: f64,
    depth: usize,
    mut f: F,
) -> (f64, f64) {
    let mut acc = 0.0;
    let mut hi = b;
    for _ in 0..depth {
        let lo = hi * 0.5;
        acc += rule.integrate(lo, hi, &mut f);
        hi = lo;
    }
    (acc, hi)
}

/// Integrate over `[a, b]` splitting at interior non-smooth points; panels
/// adjacent to such points are geometrically graded toward them so reduced
/// regularity there cannot poison the Gauss panels. Smooth stretches use
/// uniform panels of width at most `w_cap`.
pub fn integrate_with_kinks<F: Fn(f64) -> f64>(
    rule: &GaussRule,
    a: f64,
    b: f64,
    kinks: &[f64],
    w_cap: f64,
    grade_depth: usize,
    f: F,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut cuts = vec![a, b];
    for &k in kinks {
        if k > a + 1e-13 && k < b - 1e-13 {
            cuts.push(k);
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
    // grade toward a cut if a kink sits on it, or just beyond a region
    // boundary within one panel width (the non-smooth layer still reaches
    // inside)
    let near_kink = |x: f64| kinks.iter().any(|&k| (k - x).abs() < w_cap.max(1e-9));
    let mut acc = 0.0;
    for pair in cuts.windows(2) {
        acc += refined_panel(
            rule,
            pair[0],
            pair[1],
            near_kink(pair[0]),
            near_kink(pair[1]),
            w_cap,
            grade_depth,
            &f,
        );
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn refined_panel<F: Fn(f64) -> f64>(
    rule: &GaussRule,
    a: f64,
    b: f64,
    grade_a: bool,
    grade_b: bool,
    w_cap: f64,
    depth: usize,
    f: &F,
) -> f64 {
    let len = b - a;
    if len <= 0.0 {
        return 0.0;
    }
    match (grade_a, grade_b) {
        (true, true) => {
            let mid = 0.5 * (a + b);
            refined_panel(rule, a, mid, true, false, w_cap, depth, f)
                + refined_panel(rule, mid, b, false, true, w_cap, depth, f)
        }
        (true, false) => {
            let mut acc = 0.0;
            let mut w = len;
            for _ in 0..depth {
                let lo = a + w * 0.5;
                let hi = a + w;
                // a few panels per layer: near a kink the integrand often
                // varies on the scale of the distance to it
                let panels = (((hi - lo) / w_cap).ceil() as usize).clamp(4, 64);
                acc += rule.integrate_panels(lo, hi, panels, f);
                w *= 0.5;
            }
            // bounded stub next to the kink
            acc + rule.integrate(a, a + w, f)
        }
        (false, true) => {
            let mut acc = 0.0;
            let mut w = len;
            for _ in 0..depth {
                let lo = b - w;
                let hi = b - w * 0.5;
                let panels = (((hi - lo) / w_cap).ceil() as usize).clamp(4, 64);
                acc += rule.integrate_panels(lo, hi, panels, f);
                w *= 0.5;
            }
            acc + rule.integrate(b - w, b, f)
        }
        (false, false) => {
            let panels = ((len / w_cap).ceil() as usize).clamp(1, 8192);
            rule.integrate_panels(a, b, panels, f)
        }
    }
}

/// Geometric cascade toward `target = 0` over `[0, b]` with per-level
/// bookkeeping: returns the sum, the geometric ratio of the innermost
/// levels, and the last level value. A ratio at or above one signals a
/// non-integrable singularity.
pub fn cascade_with_ratio<F: Fn(f64) -> f64>(
    rule: &GaussRule,
    b: f64,
    depth: usize,
    f: F,
) -> (f64, f64, f64) {
    let mut acc = 0.0;
    let mut hi = b;
    let mut levels = Vec::with_capacity(depth);
    for _ in 0..depth {
        let lo = hi * 0.5;
        let lvl = rule.integrate(lo, hi, &f);
        levels.push(lvl.abs());
        acc += lvl;
        hi = lo;
    }
    let m = levels.len();
    let ratio = if m >= 4 && levels[m - 2] > 0.0 {
        // average the innermost ratios to smooth quadrature jitter
        let r1 = levels[m - 1] / levels[m - 2];
        let r2 = levels[m - 2] / levels[m - 3].max(1e-300);
        0.5 * (r1 + r2)
    } else {
        0.0
    };
    (acc, ratio, levels.last().copied().unwrap_or(0.0))
}

/// Tail of a decaying oscillatory integrand, summed over half-period panels
/// with iterated averaging of the partial sums (Euler-style acceleration of
/// the alternating series). Returns the accelerated sum and a crude
/// remainder estimate.
pub fn oscillatory_tail<F: FnMut(f64) -> f64>(
    rule: &GaussRule,
    start: f64,
    half_period: f64,
    n_panels: usize,
    mut f: F,
) -> (f64, f64) {
    let n = n_panels.max(8);
    let mut partial = Vec::with_capacity(n);
    let mut acc = 0.0;
    let mut lo = start;
    for _ in 0..n {
        acc += rule.integrate(lo, lo + half_period, &mut f);
        partial.push(acc);
        lo += half_period;
    }
    // Iterated pairwise averaging; each level damps the oscillation of the
    // partial-sum sequence by one order.
    let levels = 6.min(partial.len() - 1);
    let mut row = partial;
    for _ in 0..levels {
        row = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    let m = row.len();
    let value = row[m - 1];
    let remainder = if m >= 2 { (row[m - 1] - row[m - 2]).abs() } else { f64::INFINITY };
    (value, remainder)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussRule::new(8);
        // degree 15 is exact for an 8-point rule
        let val = rule.integrate(0.0, 1.0, |x| x.powi(15));
        assert_abs_diff_eq!(val, 1.0 / 16.0, epsilon = 1e-14);
    }

    #[test]
    fn gauss_legendre_smooth_integrand() {
        let rule = GaussRule::new(16);
        let val = rule.integrate(0.0, std::f64::consts::PI, |x| x.sin());
        assert_abs_diff_eq!(val, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn graded_cascade_handles_algebraic_singularity() {
        // int_0^1 x^{-1/2} dx = 2, up to the [0, 2^-60] stub ~ 2*2^-30
        let rule = GaussRule::new(8);
        let (val, cutoff) = integrate_graded(&rule, 1.0, 60, |x| x.powf(-0.5));
        assert!(cutoff > 0.0);
        assert_abs_diff_eq!(val, 2.0 - 2.0 * cutoff.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn oscillatory_tail_matches_damped_cosine() {
        // int_R^inf e^{-bx} cos(x) dx = e^{-bR} (b cos R - sin R) / (1 + b^2),
        // a slowly damped oscillation the averaging must tame.
        let b = 0.02_f64;
        let r0 = 10.0_f64;
        let exact = (-b * r0).exp() * (b * r0.cos() - r0.sin()) / (1.0 + b * b);
        let rule = GaussRule::new(8);
        let (val, remainder) = oscillatory_tail(&rule, r0, std::f64::consts::PI, 40, |x| {
            (-b * x).exp() * x.cos()
        });
        assert_abs_diff_eq!(val, exact, epsilon = 1e-6);
        assert!(remainder < 1e-4);
    }

    #[test]
    fn spec_validation_rejects_bad_fields() {
        let mut spec = QuadratureSpec::default();
        spec.n_singular = 8;
        assert!(spec.validate().is_err());
        let mut spec = QuadratureSpec::default();
        spec.pv_epsilon_schedule = vec![0.1, 0.2];
        assert!(spec.validate().is_err());
        assert!(QuadratureSpec::default().validate().is_ok());
    }
}
