//! Weight catalog and numerical estimators for the one-sided, two-sided,
//! and endpoint weight conditions.
//!
//! True weight constants are suprema over all intervals or balls; the
//! estimators report the maximum over a finite lattice, which is a lower
//! bound for the true constant. Non-membership is only ever reported as
//! "cap exceeded at scale h".

use crate::error::{FracError, Result};
use crate::grid::Grid1D;
use crate::maximal::sup_interval_averages;
use crate::quad::GaussRule;

/// Cap on the lattice products; beyond this a weight is reported as not in
/// class at this cap.
pub const PRODUCT_CAP: f64 = 1e9;

/// Floor applied to weight values before negative-power exponentiation.
pub const WEIGHT_FLOOR: f64 = 1e-300;

/// One-dimensional weight families.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFamily {
    /// `exp(-lambda t)`; negative `lambda` gives the growing exponential.
    ExpDecay { lambda: f64 },
    /// `|t|^beta`, `-3 < beta < 3`.
    Power { beta: f64 },
    Constant { c: f64 },
    /// `left` for `t < at`, `right` for `t >= at`.
    Piecewise { left: f64, right: f64, at: f64 },
}

/// A strictly positive, locally integrable weight on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight1D {
    name: String,
    family: WeightFamily,
}

impl Weight1D {
    pub fn new(name: impl Into<String>, family: WeightFamily) -> Result<Self> {
        match &family {
            WeightFamily::ExpDecay { lambda } => {
                if !(lambda.is_finite() && *lambda != 0.0 && lambda.abs() <= 16.0) {
                    return Err(FracError::ParameterOutOfRange(format!(
                        "exp_decay lambda {lambda} outside [-16, 16] \\ {{0}}"
                    )));
                }
            }
            WeightFamily::Power { beta } => {
                if !(beta.is_finite() && beta.abs() < 3.0) {
                    return Err(FracError::ParameterOutOfRange(format!(
                        "power beta {beta} outside (-3, 3)"
                    )));
                }
            }
            WeightFamily::Constant { c } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(FracError::NonPositiveWeight { at: f64::NAN });
                }
            }
            WeightFamily::Piecewise { left, right, .. } => {
                if !(*left > 0.0 && *right > 0.0) {
                    return Err(FracError::NonPositiveWeight { at: f64::NAN });
                }
            }
        }
        Ok(Weight1D { name: name.into(), family })
    }

    /// Parse a designator such as `constant`, `exp_decay(1)`, `power(0.5)`
    /// or `piecewise(1,2,0)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (head, params) = crate::catalog::split_designator(text)?;
        let family = match head {
            "exp_decay" => WeightFamily::ExpDecay {
                lambda: params.first().copied().unwrap_or(1.0),
            },
            "power" => WeightFamily::Power { beta: params.first().copied().unwrap_or(0.5) },
            "constant" => WeightFamily::Constant { c: params.first().copied().unwrap_or(1.0) },
            "piecewise" => WeightFamily::Piecewise {
                left: params.first().copied().unwrap_or(1.0),
                right: params.get(1).copied().unwrap_or(2.0),
                at: params.get(2).copied().unwrap_or(0.0),
            },
            other => return Err(FracError::UnknownFamily(other.to_string())),
        };
        Weight1D::new(text, family)
    }

    pub fn builtin_names() -> Vec<&'static str> {
        vec!["constant", "exp_decay(1)", "power(0.5)", "piecewise(1,2,0)"]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.family {
            WeightFamily::ExpDecay { lambda } => (-lambda * t).exp(),
            WeightFamily::Power { beta } => t.abs().powf(*beta).max(WEIGHT_FLOOR),
            WeightFamily::Constant { c } => *c,
            WeightFamily::Piecewise { left, right, at } => {
                if t < *at {
                    *left
                } else {
                    *right
                }
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            WeightFamily::Power { .. } => vec![0.0],
            WeightFamily::Piecewise { at, .. } => vec![*at],
            _ => Vec::new(),
        }
    }

    /// Panel width that resolves the weight's variation.
    fn panel_width(&self) -> f64 {
        match &self.family {
            WeightFamily::ExpDecay { lambda } => (2.0 / lambda.abs()).min(4.0),
            _ => 4.0,
        }
    }

    /// `int_a^b w^power dt` by panel quadrature, graded toward interior
    /// singular points of power weights. Overflow propagates as +inf.
    pub fn integral_pow(&self, a: f64, b: f64, power: f64) -> f64 {
        debug_assert!(a < b);
        let rule = GaussRule::new(12);
        let f = |t: f64| self.eval(t).max(WEIGHT_FLOOR).powf(power);
        let mut cuts = vec![a, b];
        for bp in self.breakpoints() {
            if bp > a && bp < b {
                cuts.push(bp);
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let singular = |x: f64| self.breakpoints().iter().any(|&bp| (bp - x).abs() < 1e-14);
        let mut acc = 0.0;
        for pair in cuts.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            if hi - lo <= 0.0 {
                continue;
            }
            match (singular(lo), singular(hi)) {
                (false, false) => {
                    let panels =
                        (((hi - lo) / self.panel_width()).ceil() as usize).clamp(1, 1024);
                    acc += rule.integrate_panels(lo, hi, panels, f);
                }
                (grade_lo, _) => {
                    // geometric cascade toward the singular endpoint, with
                    // the level ratio deciding between a geometric tail
                    // extrapolation and a divergence report (+inf)
                    let width = hi - lo;
                    let (sum, ratio, last) = if grade_lo {
                        crate::quad::cascade_with_ratio(&rule, width, 48, |u| f(lo + u))
                    } else {
                        crate::quad::cascade_with_ratio(&rule, width, 48, |u| f(hi - u))
                    };
                    if ratio >= 0.999 {
                        return f64::INFINITY;
                    }
                    acc += sum + last * ratio / (1.0 - ratio);
                }
            }
        }
        acc
    }
}

/// Weights on R^n.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightND {
    Constant { c: f64 },
    /// `|x|^beta`.
    RadialPower { beta: f64 },
}

impl WeightND {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (head, params) = crate::catalog::split_designator(text)?;
        match head {
            "constant" => Ok(WeightND::Constant { c: params.first().copied().unwrap_or(1.0) }),
            "radial_power" | "power" => Ok(WeightND::RadialPower {
                beta: params.first().copied().unwrap_or(0.5),
            }),
            other => Err(FracError::UnknownFamily(other.to_string())),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            WeightND::Constant { c } => *c,
            WeightND::RadialPower { beta } => {
                crate::catalog::norm(x).powf(*beta).max(WEIGHT_FLOOR)
            }
        }
    }
}

/// Probe lattice: interval/ball centers and a sorted positive scale list.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub centers: Vec<f64>,
    pub scales: Vec<f64>,
}

impl LatticeSpec {
    pub fn new(centers: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || scales.is_empty() {
            return Err(FracError::ParameterOutOfRange("lattice must be non-empty".into()));
        }
        if scales.iter().any(|&h| h <= 0.0) || scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FracError::ParameterOutOfRange(
                "scales must be positive and sorted ascending".into(),
            ));
        }
        Ok(LatticeSpec { centers, scales })
    }

    /// Dyadic scales `2^j` for `j in [j_min, j_max]` with centers on a grid.
    pub fn dyadic(grid: &Grid1D, j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(FracError::ParameterOutOfRange("j_min > j_max".into()));
        }
        let scales = (j_min..=j_max).map(|j| 2f64.powi(j)).collect();
        LatticeSpec::new(grid.points().collect(), scales)
    }

    /// Default lattice: j in [-10, 10], centers on the function grid.
    pub fn default_for(grid: &Grid1D) -> Self {
        LatticeSpec::dyadic(grid, -10, 10).expect("static lattice is valid")
    }
}

/// One probe of a weight-condition scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightProbe {
    pub center: f64,
    pub scale: f64,
    pub product: f64,
}

/// All probes plus the maximum over those below the cap.
#[derive(Debug, Clone)]
pub struct WeightScan {
    pub rows: Vec<WeightProbe>,
    pub max_product: f64,
    /// First probe whose product exceeded the cap or overflowed, if any.
    pub cap_exceeded: Option<WeightProbe>,
}

impl WeightScan {
    fn from_rows(rows: Vec<WeightProbe>) -> Self {
        let mut max_product = 0.0f64;
        let mut cap_exceeded = None;
        for row in &rows {
            if !row.product.is_finite() || row.product > PRODUCT_CAP {
                if cap_exceeded.is_none() {
                    cap_exceeded = Some(*row);
                }
            } else {
                max_product = max_product.max(row.product);
            }
        }
        WeightScan { rows, max_product, cap_exceeded }
    }

    fn constant(self) -> Result<f64> {
        match self.cap_exceeded {
            Some(row) => Err(FracError::IntegralOverflow { cap: PRODUCT_CAP, scale: row.scale }),
            None => Ok(self.max_product),
        }
    }
}

fn holder_conjugate(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(FracError::ParameterOutOfRange(format!("need p > 1, got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// Scan of the left-sided condition: for each `(a, h)` the product
/// `(avg_{[a, a+h]} w)^{1/p} (avg_{[a-h, a]} w^{1-p'})^{1/p'}`.
pub fn sawyer_minus_scan(w: &Weight1D, p: f64, lat: &LatticeSpec) -> Result<WeightScan> {
    let pp = holder_conjugate(p)?;
    let mut rows = Vec::with_capacity(lat.centers.len() * lat.scales.len());
    for &a in &lat.centers {
        for &h in &lat.scales {
            let fwd = w.integral_pow(a, a + h, 1.0) / h;
            let bwd = w.integral_pow(a - h, a, 1.0 - pp) / h;
            rows.push(WeightProbe {
                center: a,
                scale: h,
                product: fwd.powf(1.0 / p) * bwd.powf(1.0 / pp),
            });
        }
    }
    Ok(WeightScan::from_rows(rows))
}

/// Max over the lattice; a lower bound for the true constant.
pub fn sawyer_minus_constant(w: &Weight1D, p: f64, lat: &LatticeSpec) -> Result<f64> {
    sawyer_minus_scan(w, p, lat)?.constant()
}

/// Mirror image: `(avg_{[a-h, a]} w)^{1/p} (avg_{[a, a+h]} w^{1-p'})^{1/p'}`.
pub fn sawyer_plus_scan(w: &Weight1D, p: f64, lat: &LatticeSpec) -> Result<WeightScan> {
    let pp = holder_conjugate(p)?;
    let mut rows = Vec::with_capacity(lat.centers.len() * lat.scales.len());
    for &a in &lat.centers {
        for &h in &lat.scales {
            let bwd = w.integral_pow(a - h, a, 1.0) / h;
            let fwd = w.integral_pow(a, a + h, 1.0 - pp) / h;
            rows.push(WeightProbe {
                center: a,
                scale: h,
                product: bwd.powf(1.0 / p) * fwd.powf(1.0 / pp),
            });
        }
    }
    Ok(WeightScan::from_rows(rows))
}

pub fn sawyer_plus_constant(w: &Weight1D, p: f64, lat: &LatticeSpec) -> Result<f64> {
    sawyer_plus_scan(w, p, lat)?.constant()
}

/// Two-sided product over the symmetric intervals `(a-h, a+h)` (the balls
/// of dimension one).
pub fn muckenhoupt_scan_1d(w: &Weight1D, p: f64, lat: &LatticeSpec) -> Result<WeightScan> {
    let pp = holder_conjugate(p)?;
    let mut rows = Vec::with_capacity(lat.centers.len() * lat.scales.len());
    for &a in &lat.centers {
        for &h in &lat.scales {
            let avg = w.integral_pow(a - h, a + h, 1.0) / (2.0 * h);
            let dual = w.integral_pow(a - h, a + h, 1.0 - pp) / (2.0 * h);
            rows.push(WeightProbe {
                center: a,
                scale: h,
                product: avg.powf(1.0 / p) * dual.powf(1.0 / pp),
            });
        }
    }
    Ok(WeightScan::from_rows(rows))
}

pub fn muckenhoupt_constant_1d(w: &Weight1D, p: f64, lat: &LatticeSpec) -> Result<f64> {
    muckenhoupt_scan_1d(w, p, lat)?.constant()
}

/// Ball products for radial weights on R^n; centers are placed on the
/// first coordinate axis, which loses no generality for radial weights.
pub fn muckenhoupt_scan_nd(
    w: &WeightND,
    n: usize,
    p: f64,
    lat: &LatticeSpec,
) -> Result<WeightScan> {
    let pp = holder_conjugate(p)?;
    if !(1..=3).contains(&n) {
        return Err(FracError::ParameterOutOfRange(format!("dimension {n} outside 1..=3")));
    }
    if n == 1 {
        let w1 = match w {
            WeightND::Constant { c } => Weight1D::new("c", WeightFamily::Constant { c: *c })?,
            WeightND::RadialPower { beta } => {
                Weight1D::new("pw", WeightFamily::Power { beta: *beta })?
            }
        };
        return muckenhoupt_scan_1d(&w1, p, lat);
    }
    let rule = GaussRule::new(12);
    let n_theta = 48usize;
    let ball_avg = |c: f64, h: f64, power: f64| -> f64 {
        let mut acc = 0.0;
        for j in 0..n_theta {
            let theta = std::f64::consts::PI * (j as f64 + 0.5) / n_theta as f64;
            let ct = theta.cos();
            let radial = |r: f64| {
                let dist = (r * r + c * c + 2.0 * r * c * ct).sqrt();
                let val = match w {
                    WeightND::Constant { c } => *c,
                    WeightND::RadialPower { beta } => dist.powf(*beta).max(WEIGHT_FLOOR),
                };
                val.powf(power) * r.powf(n as f64 - 1.0)
            };
            // cascade toward r = 0 plus a cut at the singular shell r = |c|
            let mut cuts = vec![h];
            if c.abs() > 0.0 && c.abs() < h {
                cuts.push(c.abs());
            }
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut prev = 0.0;
            for &cut in &cuts {
                let width = cut - prev;
                if width <= 0.0 {
                    continue;
                }
                let base = prev;
                let (sum, ratio, last) =
                    crate::quad::cascade_with_ratio(&rule, width, 44, |u| radial(base + u));
                if ratio >= 0.999 {
                    return f64::INFINITY;
                }
                acc += (sum + last * ratio / (1.0 - ratio))
                    * if n == 2 { 1.0 } else { theta.sin() };
                prev = cut;
            }
        }
        let ang = if n == 2 {
            2.0 * std::f64::consts::PI / n_theta as f64
        } else {
            2.0 * std::f64::consts::PI * std::f64::consts::PI / n_theta as f64
        };
        acc * ang / crate::catalog::ball_volume(n, h)
    };
    let mut rows = Vec::with_capacity(lat.centers.len() * lat.scales.len());
    for &c in &lat.centers {
        for &h in &lat.scales {
            let avg = ball_avg(c, h, 1.0);
            let dual = ball_avg(c, h, 1.0 - pp);
            rows.push(WeightProbe {
                center: c,
                scale: h,
                product: avg.powf(1.0 / p) * dual.powf(1.0 / pp),
            });
        }
    }
    Ok(WeightScan::from_rows(rows))
}

pub fn muckenhoupt_constant_nd(w: &WeightND, n: usize, p: f64, lat: &LatticeSpec) -> Result<f64> {
    muckenhoupt_scan_nd(w, n, p, lat)?.constant()
}

/// Endpoint condition for the left-sided class: max over grid points of
/// the forward maximal average of `w` divided by `w`.
pub fn a1_minus_ratio(w: &Weight1D, grid: &Grid1D, scales: &[f64]) -> Result<f64> {
    if scales.is_empty() {
        return Err(FracError::ParameterOutOfRange("empty scale lattice".into()));
    }
    let points: Vec<f64> = grid.points().collect();
    for &t in &points {
        if !(w.eval(t) > 0.0) {
            return Err(FracError::NonPositiveWeight { at: t });
        }
    }
    // clip long windows where an exponential weight has underflowed
    let clip = match w.family() {
        WeightFamily::ExpDecay { lambda } if *lambda > 0.0 => {
            (f64::NEG_INFINITY, 700.0 / lambda)
        }
        WeightFamily::ExpDecay { lambda } => (700.0 / lambda, f64::INFINITY),
        _ => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let (values, argmax) = sup_interval_averages(
        |t| w.eval(t),
        &points,
        scales,
        false,
        clip,
        &w.breakpoints(),
        w.panel_width().min(1.0),
    );
    let mut worst = 0.0f64;
    for ((v, t), h) in values.iter().zip(&points).zip(&argmax) {
        let ratio = v / w.eval(*t);
        if !ratio.is_finite() || ratio > PRODUCT_CAP {
            return Err(FracError::IntegralOverflow { cap: PRODUCT_CAP, scale: *h });
        }
        worst = worst.max(ratio);
    }
    Ok(worst)
}
