//! One-sided mollification: convolution with a rescaled smooth bump
//! supported on `[0, 1]`, so each output value averages only over the past
//! `[t - eps, t]`.

use crate::catalog::DecayClass;
use crate::error::{FracError, Result};
use crate::function::SampledFunction1D;
use crate::quad::GaussRule;
use std::sync::OnceLock;

/// The fixed kernel: `psi(x) = c * exp(-1/(x(1-x)))` on `(0, 1)`, zero
/// elsewhere, with `c` chosen so the kernel has unit mass.
pub fn kernel(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    kernel_normalizer() * (-1.0 / (x * (1.0 - x))).exp()
}

fn kernel_normalizer() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| {
        let rule = GaussRule::new(32);
        let raw = rule.integrate_panels(0.0, 1.0, 16, |x| {
            if x <= 0.0 || x >= 1.0 {
                0.0
            } else {
                (-1.0 / (x * (1.0 - x))).exp()
            }
        });
        1.0 / raw
    })
}

/// Convolve `f` with the `eps`-rescaled kernel. The result is sampled on
/// `f`'s grid; values near the left edge use the closed form or the decay
/// extrapolation of `f` for the part of `[t - eps, t]` outside the grid.
pub fn mollify_one_sided(f: &SampledFunction1D, eps: f64) -> Result<SampledFunction1D> {
    let spacing = f.grid().spacing();
    if !(eps > 0.0) {
        return Err(FracError::ParameterOutOfRange(format!("eps must be positive, got {eps}")));
    }
    if eps < spacing {
        return Err(FracError::EpsilonTooSmall { eps, spacing });
    }
    let rule = GaussRule::new(16);
    let values: Vec<f64> = f
        .grid()
        .points()
        .map(|t| rule.integrate_panels(0.0, 1.0, 8, |u| f.eval(t - eps * u) * kernel(u)))
        .collect();
    SampledFunction1D::from_values(f.grid().clone(), values, decay_after_mollify(f.decay_class()))
}

fn decay_after_mollify(class: DecayClass) -> DecayClass {
    match class {
        // support widens by eps but stays compact
        DecayClass::CompactSupport => DecayClass::CompactSupport,
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::CatalogEntry;
    use crate::grid::Grid1D;
    use approx::assert_abs_diff_eq;

    fn sample(name: &str, grid: &Grid1D) -> SampledFunction1D {
        SampledFunction1D::sample(&CatalogEntry::parse(name).unwrap(), grid).unwrap()
    }

    #[test]
    fn kernel_has_unit_mass_and_one_sided_support() {
        let rule = GaussRule::new(32);
        let mass = rule.integrate_panels(-0.5, 1.5, 32, kernel);
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-12);
        assert_eq!(kernel(-0.1), 0.0);
        assert_eq!(kernel(1.0), 0.0);
    }

    #[test]
    fn constants_are_preserved() {
        let grid = Grid1D::new(-2.0, 2.0, 101).unwrap();
        let c = sample("constant(3)", &grid);
        for eps in [0.05, 0.4, 1.0] {
            let m = mollify_one_sided(&c, eps).unwrap();
            for &v in m.values() {
                assert_abs_diff_eq!(v, 3.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn smaller_eps_gets_closer_to_the_function() {
        let grid = Grid1D::new(-4.0, 4.0, 801).unwrap();
        let g = sample("gaussian", &grid);
        let sup_dist = |eps: f64| {
            let m = mollify_one_sided(&g, eps).unwrap();
            m.values()
                .iter()
                .zip(g.values())
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
        };
        let d1 = sup_dist(0.1);
        let d2 = sup_dist(0.01);
        assert!(d2 < d1, "sup distance must shrink: {d1} -> {d2}");
    }

    #[test]
    fn averaging_window_stays_in_the_past() {
        // indicator of [0,1] at t = 0.5 with eps = 0.1: the whole averaging
        // window [0.4, 0.5] sits inside the support
        let grid = Grid1D::new(-2.0, 2.0, 401).unwrap();
        let ind = sample("indicator", &grid);
        let m = mollify_one_sided(&ind, 0.1).unwrap();
        let i_mid = (0.5f64 - grid.t_min()) / grid.spacing();
        assert_abs_diff_eq!(m.values()[i_mid.round() as usize], 1.0, epsilon = 1e-12);
        // just left of 0 the window [t-eps, t] is fully outside
        let i_left = (-0.2f64 - grid.t_min()) / grid.spacing();
        assert_abs_diff_eq!(m.values()[i_left.round() as usize], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn eps_below_spacing_is_rejected() {
        let grid = Grid1D::new(-1.0, 1.0, 21).unwrap();
        let g = sample("gaussian", &grid);
        assert!(matches!(
            mollify_one_sided(&g, 0.01),
            Err(FracError::EpsilonTooSmall { .. })
        ));
    }

    #[test]
    fn commutes_with_differentiation_on_smooth_entries() {
        let grid = Grid1D::new(-5.0, 5.0, 1001).unwrap();
        let g = sample("gaussian", &grid);
        let dg = g.derivative().unwrap();
        let eps = 0.25;
        let m = mollify_one_sided(&g, eps).unwrap();
        let md = mollify_one_sided(&dg, eps).unwrap();
        // compare (f * psi)' (spline derivative) with f' * psi away from
        // the grid edges
        for &t in &[-2.0, -0.5, 0.3, 1.7] {
            assert_abs_diff_eq!(m.d1_at(t), md.eval(t), epsilon = 1e-5);
        }
    }
}
