//! Functions on grids: closed-form backed where possible, natural cubic
//! spline interpolation plus decay-class extrapolation otherwise.

use crate::catalog::{CatalogEntry, ClosedForm1D, ClosedFormND, DecayClass};
use crate::error::{FracError, Result};
use crate::grid::{Grid1D, GridND};

const VALUE_CONSISTENCY_TOL: f64 = 1e-12;

/// Natural cubic spline through uniformly spaced samples.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    grid: Grid1D,
    values: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Self {
        let m = Self::solve_natural(&values, grid.spacing());
        CubicSpline { grid, values, m }
    }

    // Thomas algorithm for the natural-spline tridiagonal system
    // (uniform spacing, so all off-diagonal entries are 1/2 after scaling).
    fn solve_natural(values: &[f64], h: f64) -> Vec<f64> {
        let n = values.len();
        let mut m = vec![0.0; n];
        if n <= 2 {
            return m;
        }
        // interior equations: M_{i-1} + 4 M_i + M_{i+1} = rhs_i
        let k = n - 2;
        let mut c_prime = vec![0.0; k];
        let mut d_prime = vec![0.0; k];
        let rhs = |i: usize| 6.0 * (values[i + 2] - 2.0 * values[i + 1] + values[i]) / (h * h);
        c_prime[0] = 0.25;
        d_prime[0] = rhs(0) / 4.0;
        for i in 1..k {
            let denom = 4.0 - c_prime[i - 1];
            c_prime[i] = 1.0 / denom;
            d_prime[i] = (rhs(i) - d_prime[i - 1]) / denom;
        }
        m[k] = d_prime[k - 1];
        for i in (1..k).rev() {
            m[i] = d_prime[i - 1] - c_prime[i - 1] * m[i + 1];
        }
        m
    }

    fn cell(&self, t: f64) -> usize {
        let h = self.grid.spacing();
        let raw = ((t - self.grid.t_min()) / h).floor() as isize;
        raw.clamp(0, self.values.len() as isize - 2) as usize
    }

    pub fn value(&self, t: f64) -> f64 {
        let i = self.cell(t);
        let h = self.grid.spacing();
        let a = self.grid.point(i);
        let u = t - a;
        let v = h - u;
        (self.m[i] * v * v * v + self.m[i + 1] * u * u * u) / (6.0 * h)
            + (self.values[i] / h - self.m[i] * h / 6.0) * v
            + (self.values[i + 1] / h - self.m[i + 1] * h / 6.0) * u
    }

    pub fn d1(&self, t: f64) -> f64 {
        let i = self.cell(t);
        let h = self.grid.spacing();
        let a = self.grid.point(i);
        let u = t - a;
        let v = h - u;
        (-self.m[i] * v * v + self.m[i + 1] * u * u) / (2.0 * h)
            - (self.values[i] / h - self.m[i] * h / 6.0)
            + (self.values[i + 1] / h - self.m[i + 1] * h / 6.0)
    }

    pub fn d2(&self, t: f64) -> f64 {
        let i = self.cell(t);
        let h = self.grid.spacing();
        let a = self.grid.point(i);
        let u = t - a;
        (self.m[i] * (h - u) + self.m[i + 1] * u) / h
    }
}

/// A function on a 1D grid, optionally backed by a closed form.
#[derive(Debug, Clone)]
pub struct SampledFunction1D {
    grid: Grid1D,
    values: Vec<f64>,
    closed_form: Option<ClosedForm1D>,
    decay_class: DecayClass,
    spline: Option<CubicSpline>,
}

impl SampledFunction1D {
    /// Sample a catalog entry on a grid, attaching its closed form.
    pub fn sample(entry: &CatalogEntry, grid: &Grid1D) -> Result<Self> {
        let cf = entry.closed_form_1d()?;
        let values: Vec<f64> = grid.points().map(|t| cf.value(t)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FracError::ParameterOutOfRange(format!(
                "`{}` overflows on this grid",
                entry.name()
            )));
        }
        Ok(SampledFunction1D {
            grid: grid.clone(),
            decay_class: cf.decay_class(),
            values,
            closed_form: Some(cf),
            spline: None,
        })
    }

    /// Wrap raw samples. A spline is built for off-grid evaluation.
    pub fn from_values(grid: Grid1D, values: Vec<f64>, decay_class: DecayClass) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(FracError::GridMismatch(format!(
                "{} values on a {}-point grid",
                values.len(),
                grid.n_points()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FracError::ParameterOutOfRange("values must be finite".into()));
        }
        let spline = CubicSpline::new(grid.clone(), values.clone());
        Ok(SampledFunction1D {
            grid,
            values,
            closed_form: None,
            decay_class,
            spline: Some(spline),
        })
    }

    /// Wrap an evaluator that is not a catalog entry (e.g. the output of an
    /// integral operator evaluated pointwise on demand).
    pub fn from_closed_form(cf: ClosedForm1D, grid: &Grid1D) -> Result<Self> {
        let values: Vec<f64> = grid.points().map(|t| cf.value(t)).collect();
        Ok(SampledFunction1D {
            grid: grid.clone(),
            decay_class: cf.decay_class(),
            values,
            closed_form: Some(cf),
            spline: None,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn closed_form(&self) -> Option<&ClosedForm1D> {
        self.closed_form.as_ref()
    }

    pub fn decay_class(&self) -> DecayClass {
        self.decay_class
    }

    /// Consistency of samples with the attached closed form.
    pub fn check_consistency(&self) -> Result<()> {
        if let Some(cf) = &self.closed_form {
            for (i, &v) in self.values.iter().enumerate() {
                let t = self.grid.point(i);
                let c = cf.value(t);
                if (v - c).abs() > VALUE_CONSISTENCY_TOL * (1.0 + v.abs()) {
                    return Err(FracError::GridMismatch(format!(
                        "sample {i} departs from closed form by {:.3e}",
                        (v - c).abs()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Evaluate anywhere: closed form when present; spline inside the grid
    /// and decay-class extrapolation outside otherwise.
    pub fn eval(&self, t: f64) -> f64 {
        if let Some(cf) = &self.closed_form {
            return cf.value(t);
        }
        if self.grid.contains(t) {
            return self.spline.as_ref().expect("spline built for sampled data").value(t);
        }
        self.extrapolate(t)
    }

    fn extrapolate(&self, t: f64) -> f64 {
        match self.decay_class {
            DecayClass::CompactSupport => 0.0,
            DecayClass::Gaussian => {
                // log-quadratic continuation from the nearest edge
                let (i0, i1, i2, edge) = if t < self.grid.t_min() {
                    (0, 1, 2, self.grid.t_min())
                } else {
                    let n = self.values.len();
                    (n - 1, n - 2, n - 3, self.grid.t_max())
                };
                let h = self.grid.spacing();
                let (v0, v1, v2) = (self.values[i0], self.values[i1], self.values[i2]);
                if v0.abs() < 1e-280 || v1 <= 0.0 && v0 > 0.0 {
                    return 0.0;
                }
                if v0 * v1 <= 0.0 || v1 * v2 <= 0.0 {
                    return 0.0;
                }
                let (l0, l1, l2) = (v0.abs().ln(), v1.abs().ln(), v2.abs().ln());
                let d1 = (l0 - l1) / h;
                let d2 = (l0 - 2.0 * l1 + l2) / (h * h);
                let dt = (t - edge).abs();
                let logv = l0 + d1 * dt + 0.5 * d2 * dt * dt;
                if logv < -700.0 {
                    0.0
                } else {
                    v0.signum() * logv.exp()
                }
            }
            DecayClass::ExponentialLeft if t < self.grid.t_min() => {
                self.exp_edge(t, 0, 1)
            }
            DecayClass::ExponentialRight if t > self.grid.t_max() => {
                let n = self.values.len();
                self.exp_edge(t, n - 1, n - 2)
            }
            // growing side of an exponential, or a bounded class: clamp to
            // the edge value
            _ => {
                if t < self.grid.t_min() {
                    self.values[0]
                } else {
                    self.values[self.values.len() - 1]
                }
            }
        }
    }

    fn exp_edge(&self, t: f64, edge_idx: usize, inner_idx: usize) -> f64 {
        let v0 = self.values[edge_idx];
        let v1 = self.values[inner_idx];
        if v0 == 0.0 || v0 * v1 <= 0.0 {
            return 0.0;
        }
        let h = self.grid.spacing();
        let rate = (v0.abs().ln() - v1.abs().ln()) / h; // toward the edge
        let edge = self.grid.point(edge_idx);
        let logv = v0.abs().ln() - rate.abs() * (t - edge).abs();
        if logv < -700.0 {
            0.0
        } else {
            v0.signum() * logv.exp()
        }
    }

    pub fn d1_at(&self, t: f64) -> f64 {
        if let Some(cf) = &self.closed_form {
            cf.d1(t)
        } else if self.grid.contains(t) {
            self.spline.as_ref().unwrap().d1(t)
        } else {
            0.0
        }
    }

    pub fn d2_at(&self, t: f64) -> f64 {
        if let Some(cf) = &self.closed_form {
            cf.d2(t)
        } else if self.grid.contains(t) {
            self.spline.as_ref().unwrap().d2(t)
        } else {
            0.0
        }
    }

    /// `f(t - tau) - f(t)`, stable for the closed-form families.
    pub fn diff_back(&self, t: f64, tau: f64) -> f64 {
        match &self.closed_form {
            Some(cf) => cf.diff_back(t, tau),
            None => self.eval(t - tau) - self.eval(t),
        }
    }

    pub fn diff_fwd(&self, t: f64, tau: f64) -> f64 {
        match &self.closed_form {
            Some(cf) => cf.diff_fwd(t, tau),
            None => self.eval(t + tau) - self.eval(t),
        }
    }

    /// True when small differences are computed to relative (not absolute)
    /// accuracy, which lets singular cascades descend further.
    pub fn has_stable_diff(&self) -> bool {
        self.closed_form.is_some()
    }

    /// Derivative function on the same grid (closed-form or spline d1).
    pub fn derivative(&self) -> Result<SampledFunction1D> {
        let values: Vec<f64> = self.grid.points().map(|t| self.d1_at(t)).collect();
        match &self.closed_form {
            Some(_) => {
                // keep pointwise-exact derivative evaluation by wrapping self
                let mut out = SampledFunction1D::from_values(
                    self.grid.clone(),
                    values,
                    self.decay_class,
                )?;
                out.closed_form = None;
                Ok(out)
            }
            None => SampledFunction1D::from_values(self.grid.clone(), values, self.decay_class),
        }
    }
}

/// A function on an n-dimensional grid.
#[derive(Debug, Clone)]
pub struct SampledFunctionND {
    grid: GridND,
    values: Vec<f64>,
    closed_form: Option<ClosedFormND>,
    decay_class: DecayClass,
}

impl SampledFunctionND {
    pub fn sample(entry: &CatalogEntry, grid: &GridND) -> Result<Self> {
        let cf = entry.closed_form_nd(grid.dim())?;
        let values: Vec<f64> = (0..grid.n_total()).map(|i| cf.value(&grid.point(i))).collect();
        Ok(SampledFunctionND {
            grid: grid.clone(),
            decay_class: cf.decay_class(),
            values,
            closed_form: Some(cf),
        })
    }

    pub fn from_values(grid: GridND, values: Vec<f64>, decay_class: DecayClass) -> Result<Self> {
        if values.len() != grid.n_total() {
            return Err(FracError::GridMismatch(format!(
                "{} values on a {}-point grid",
                values.len(),
                grid.n_total()
            )));
        }
        Ok(SampledFunctionND { grid, values, closed_form: None, decay_class })
    }

    pub fn grid(&self) -> &GridND {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn closed_form(&self) -> Option<&ClosedFormND> {
        self.closed_form.as_ref()
    }

    pub fn decay_class(&self) -> DecayClass {
        self.decay_class
    }

    /// Pointwise evaluation; requires the closed form for off-grid points.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.closed_form {
            Some(cf) => cf.value(x),
            None => {
                // multilinear interpolation, zero outside the grid
                self.interpolate(x)
            }
        }
    }

    fn interpolate(&self, x: &[f64]) -> f64 {
        let n = self.grid.dim();
        let mut base = Vec::with_capacity(n);
        let mut frac = Vec::with_capacity(n);
        for k in 0..n {
            let ax = self.grid.axis(k);
            if !ax.contains(x[k]) {
                return 0.0;
            }
            let h = ax.spacing();
            let raw = ((x[k] - ax.t_min()) / h).floor() as isize;
            let i = raw.clamp(0, ax.n_points() as isize - 2) as usize;
            base.push(i);
            frac.push((x[k] - ax.point(i)) / h);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut flat = 0usize;
            for k in 0..n {
                let up = (corner >> k) & 1 == 1;
                w *= if up { frac[k] } else { 1.0 - frac[k] };
                let idx = base[k] + if up { 1 } else { 0 };
                flat = flat * self.grid.axis(k).n_points() + idx;
            }
            acc += w * self.values[flat];
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gaussian_on(grid: &Grid1D) -> SampledFunction1D {
        let entry = CatalogEntry::parse("gaussian").unwrap();
        SampledFunction1D::sample(&entry, grid).unwrap()
    }

    #[test]
    fn sample_constant_fills_values() {
        let grid = Grid1D::new(-1.0, 1.0, 11).unwrap();
        let entry = CatalogEntry::parse("constant(5)").unwrap();
        let f = SampledFunction1D::sample(&entry, &grid).unwrap();
        assert!(f.values().iter().all(|&v| v == 5.0));
        f.check_consistency().unwrap();
    }

    #[test]
    fn spline_reproduces_smooth_functions() {
        let grid = Grid1D::new(-4.0, 4.0, 201).unwrap();
        let g = gaussian_on(&grid);
        let sampled =
            SampledFunction1D::from_values(grid.clone(), g.values().to_vec(), DecayClass::Gaussian)
                .unwrap();
        for &t in &[-2.13, -0.41, 0.77, 3.03] {
            assert_abs_diff_eq!(sampled.eval(t), g.eval(t), epsilon = 2e-7);
            assert_abs_diff_eq!(sampled.d1_at(t), g.d1_at(t), epsilon = 2e-4);
        }
    }

    #[test]
    fn extrapolation_respects_decay_class() {
        let grid = Grid1D::new(-6.0, 6.0, 241).unwrap();
        let g = gaussian_on(&grid);
        let sampled =
            SampledFunction1D::from_values(grid, g.values().to_vec(), DecayClass::Gaussian)
                .unwrap();
        // outside the grid the log-quadratic continuation should track the
        // true gaussian within an order of magnitude
        let t = 7.0;
        let truth = (-0.5 * t * t_f64(t)).exp();
        fn t_f64(t: f64) -> f64 {
            t
        }
        let got = sampled.eval(t);
        assert!(got > 0.0 && got < 1e-8, "got {got}, truth {truth}");
        assert!((got.ln() - truth.ln()).abs() < 2.0);

        let bump = SampledFunction1D::sample(
            &CatalogEntry::parse("bump").unwrap(),
            &Grid1D::new(-2.0, 2.0, 81).unwrap(),
        )
        .unwrap();
        let sampled = SampledFunction1D::from_values(
            bump.grid().clone(),
            bump.values().to_vec(),
            DecayClass::CompactSupport,
        )
        .unwrap();
        assert_eq!(sampled.eval(3.0), 0.0);
    }

    #[test]
    fn from_values_rejects_mismatch() {
        let grid = Grid1D::new(0.0, 1.0, 5).unwrap();
        assert!(SampledFunction1D::from_values(grid, vec![1.0; 4], DecayClass::Bounded).is_err());
    }

    #[test]
    fn nd_sampling_and_interpolation() {
        let grid = GridND::cube(2, -3.0, 3.0, 61).unwrap();
        let entry = CatalogEntry::parse("gaussian").unwrap();
        let f = SampledFunctionND::sample(&entry, &grid).unwrap();
        let sampled =
            SampledFunctionND::from_values(grid, f.values().to_vec(), DecayClass::Gaussian)
                .unwrap();
        let x = [0.42, -1.17];
        assert_abs_diff_eq!(sampled.eval(&x), f.eval(&x), epsilon = 2e-3);
    }
}
