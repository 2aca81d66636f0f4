//! The test-function catalog: closed-form families with derivatives up to
//! second order, numerically stable backward differences, and the decay
//! metadata the singular-integral tails rely on.

use crate::error::{FracError, Result};

/// How a function behaves far from its core region. Drives tail truncation
/// and beyond-grid extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayClass {
    /// Identically zero outside a bounded interval/ball.
    CompactSupport,
    /// Gaussian-type decay in every direction.
    Gaussian,
    /// Exponential decay toward -inf (may grow toward +inf).
    ExponentialLeft,
    /// Exponential decay toward +inf (may grow toward -inf).
    ExponentialRight,
    /// Bounded, no integrable decay (constants, trigonometric entries).
    Bounded,
}

/// Closed-form families. Parameters are validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `exp(-(t-mu)^2 / (2 sigma^2))`, unnormalized (peak value 1).
    Gaussian { mu: f64, sigma: f64 },
    /// Smooth bump `exp(1 - 1/(1-u^2))`, `u = (t-center)/radius`, supported
    /// exactly on `[center-radius, center+radius]`, peak value 1.
    Bump { center: f64, radius: f64 },
    /// `exp(lambda t)`; `lambda > 0` decays to the left, `lambda < 0` to the
    /// right.
    ExpGrowth { lambda: f64 },
    /// `cos(k t)` in 1D; `cos(k . x)` along `wave` in higher dimensions.
    Cosine { wave: Vec<f64> },
    /// Gauss--Weierstrass kernel at diffusion time `t0`.
    HeatKernel { t0: f64 },
    /// Indicator of `[a, b]` in 1D, of the ball `|x| <= radius` in nD
    /// (with `a = -radius`, `b = radius`).
    Indicator { a: f64, b: f64 },
    Constant { c: f64 },
}

/// A named catalog entry, addressable from the CLI and config files.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    name: String,
    family: Family,
}

impl CatalogEntry {
    pub fn new(name: impl Into<String>, family: Family) -> Result<Self> {
        validate_family(&family)?;
        Ok(CatalogEntry { name: name.into(), family })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Parse a CLI/config designator such as `gaussian`, `cosine(3)`,
    /// `exp_growth(0.5)` or `constant(5)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (head, params) = split_designator(text)?;
        let family = match head {
            "gaussian" => Family::Gaussian {
                mu: params.first().copied().unwrap_or(0.0),
                sigma: params.get(1).copied().unwrap_or(1.0),
            },
            "bump" => Family::Bump {
                center: params.first().copied().unwrap_or(0.0),
                radius: params.get(1).copied().unwrap_or(1.0),
            },
            "exp_growth" => Family::ExpGrowth {
                lambda: params.first().copied().unwrap_or(1.0),
            },
            "cosine" => Family::Cosine {
                wave: if params.is_empty() { vec![1.0] } else { params.clone() },
            },
            "heat_kernel" => Family::HeatKernel {
                t0: params.first().copied().unwrap_or(0.5),
            },
            "indicator" => Family::Indicator {
                a: params.first().copied().unwrap_or(0.0),
                b: params.get(1).copied().unwrap_or(1.0),
            },
            "constant" => Family::Constant {
                c: params.first().copied().unwrap_or(1.0),
            },
            other => return Err(FracError::UnknownFamily(other.to_string())),
        };
        CatalogEntry::new(text, family)
    }

    /// Canonical entries listed by the `catalog` subcommand.
    pub fn builtin_names() -> Vec<&'static str> {
        vec![
            "gaussian",
            "bump",
            "exp_growth(1)",
            "cosine(1)",
            "heat_kernel(0.5)",
            "indicator",
            "constant(1)",
        ]
    }

    pub fn closed_form_1d(&self) -> Result<ClosedForm1D> {
        ClosedForm1D::from_family(self.family.clone())
    }

    pub fn closed_form_nd(&self, dim: usize) -> Result<ClosedFormND> {
        ClosedFormND::from_family(self.family.clone(), dim)
    }
}

/// Split `name(p1, p2, ...)` into the head and parameter list; shared with
/// the weight catalog.
pub(crate) fn split_designator(text: &str) -> Result<(&str, Vec<f64>)> {
    if let Some(open) = text.find('(') {
        if !text.ends_with(')') {
            return Err(FracError::UnknownFamily(text.to_string()));
        }
        let head = &text[..open];
        let inner = &text[open + 1..text.len() - 1];
        let mut params = Vec::new();
        for piece in inner.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            let v: f64 = piece.parse().map_err(|_| {
                FracError::ParameterOutOfRange(format!("cannot parse `{piece}` as a number"))
            })?;
            params.push(v);
        }
        Ok((head, params))
    } else {
        Ok((text, Vec::new()))
    }
}

fn validate_family(family: &Family) -> Result<()> {
    let bad = |msg: String| Err(FracError::ParameterOutOfRange(msg));
    match family {
        Family::Gaussian { mu, sigma } => {
            if !(mu.is_finite() && mu.abs() <= 100.0) {
                return bad(format!("gaussian mu {mu} outside [-100, 100]"));
            }
            if !(sigma.is_finite() && *sigma > 0.0 && *sigma <= 100.0) {
                return bad(format!("gaussian sigma {sigma} outside (0, 100]"));
            }
        }
        Family::Bump { center, radius } => {
            if !(center.is_finite() && center.abs() <= 100.0) {
                return bad(format!("bump center {center} outside [-100, 100]"));
            }
            if !(radius.is_finite() && *radius > 0.0 && *radius <= 100.0) {
                return bad(format!("bump radius {radius} outside (0, 100]"));
            }
        }
        Family::ExpGrowth { lambda } => {
            if !(lambda.is_finite() && *lambda != 0.0 && lambda.abs() <= 4.0) {
                return bad(format!("exp_growth lambda {lambda} outside [-4, 4] \\ {{0}}"));
            }
        }
        Family::Cosine { wave } => {
            if wave.is_empty() || wave.len() > 3 {
                return bad("cosine needs 1 to 3 wave components".into());
            }
            let norm = wave.iter().map(|k| k * k).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm <= 64.0) || wave.iter().any(|k| !k.is_finite()) {
                return bad(format!("cosine wave norm {norm} outside (0, 64]"));
            }
        }
        Family::HeatKernel { t0 } => {
            if !(t0.is_finite() && *t0 > 0.0 && *t0 <= 100.0) {
                return bad(format!("heat_kernel t0 {t0} outside (0, 100]"));
            }
        }
        Family::Indicator { a, b } => {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return bad(format!("indicator needs a < b, got [{a}, {b}]"));
            }
        }
        Family::Constant { c } => {
            if !c.is_finite() {
                return bad("constant value must be finite".into());
            }
        }
    }
    Ok(())
}

/// A one-dimensional closed form: value, first and second derivative, a
/// cancellation-free backward difference, and decay metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm1D {
    family: Family,
}

impl ClosedForm1D {
    pub fn from_family(family: Family) -> Result<Self> {
        validate_family(&family)?;
        if let Family::Cosine { wave } = &family {
            if wave.len() != 1 {
                return Err(FracError::ParameterOutOfRange(
                    "1D cosine takes a single wave number".into(),
                ));
            }
        }
        Ok(ClosedForm1D { family })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.family {
            Family::Gaussian { mu, sigma } => {
                let u = (t - mu) / sigma;
                (-0.5 * u * u).exp()
            }
            Family::Bump { center, radius } => {
                let u = (t - center) / radius;
                if u.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            }
            Family::ExpGrowth { lambda } => (lambda * t).exp(),
            Family::Cosine { wave } => (wave[0] * t).cos(),
            Family::HeatKernel { t0 } => {
                (4.0 * std::f64::consts::PI * t0).powf(-0.5) * (-t * t / (4.0 * t0)).exp()
            }
            Family::Indicator { a, b } => {
                if t >= *a && t <= *b {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Constant { c } => *c,
        }
    }

    /// First derivative; the a.e. derivative (zero) for the indicator.
    pub fn d1(&self, t: f64) -> f64 {
        match &self.family {
            Family::Gaussian { mu, sigma } => {
                -(t - mu) / (sigma * sigma) * self.value(t)
            }
            Family::Bump { center, radius } => {
                let u = (t - center) / radius;
                if u.abs() < 1.0 {
                    let q = 1.0 - u * u;
                    self.value(t) * (-2.0 * u / (q * q)) / radius
                } else {
                    0.0
                }
            }
            Family::ExpGrowth { lambda } => lambda * self.value(t),
            Family::Cosine { wave } => -wave[0] * (wave[0] * t).sin(),
            Family::HeatKernel { t0 } => -t / (2.0 * t0) * self.value(t),
            Family::Indicator { .. } => 0.0,
            Family::Constant { .. } => 0.0,
        }
    }

    pub fn d2(&self, t: f64) -> f64 {
        match &self.family {
            Family::Gaussian { mu, sigma } => {
                let s2 = sigma * sigma;
                let u = (t - mu) / sigma;
                (u * u - 1.0) / s2 * self.value(t)
            }
            Family::Bump { center, radius } => {
                let u = (t - center) / radius;
                if u.abs() < 1.0 {
                    let q = 1.0 - u * u;
                    let g1 = -2.0 * u / (q * q);
                    let g2 = -(2.0 + 6.0 * u * u) / (q * q * q);
                    self.value(t) * (g2 + g1 * g1) / (radius * radius)
                } else {
                    0.0
                }
            }
            Family::ExpGrowth { lambda } => lambda * lambda * self.value(t),
            Family::Cosine { wave } => -wave[0] * wave[0] * (wave[0] * t).cos(),
            Family::HeatKernel { t0 } => {
                let s2 = 2.0 * t0;
                (t * t / s2 - 1.0) / s2 * self.value(t)
            }
            Family::Indicator { .. } => 0.0,
            Family::Constant { .. } => 0.0,
        }
    }

    /// Third derivative by a centered difference of `d2`; accurate enough
    /// for the analytic stub corrections it feeds.
    pub fn d3(&self, t: f64) -> f64 {
        let h = 1e-4;
        (self.d2(t + h) - self.d2(t - h)) / (2.0 * h)
    }

    /// `f(t - tau) - f(t)` evaluated without catastrophic cancellation for
    /// small `tau` wherever the family admits a stable identity.
    pub fn diff_back(&self, t: f64, tau: f64) -> f64 {
        match &self.family {
            Family::Gaussian { mu, sigma } => {
                let s2 = sigma * sigma;
                let d = (2.0 * (t - mu) * tau - tau * tau) / (2.0 * s2);
                if d.abs() < 30.0 {
                    self.value(t) * d.exp_m1()
                } else {
                    self.value(t - tau) - self.value(t)
                }
            }
            Family::ExpGrowth { lambda } => {
                let d = -lambda * tau;
                if d.abs() < 30.0 {
                    self.value(t) * d.exp_m1()
                } else {
                    self.value(t - tau) - self.value(t)
                }
            }
            Family::Cosine { wave } => {
                let k = wave[0];
                2.0 * (k * t - 0.5 * k * tau).sin() * (0.5 * k * tau).sin()
            }
            Family::HeatKernel { t0 } => {
                let s2 = 2.0 * t0;
                let d = (2.0 * t * tau - tau * tau) / (2.0 * s2);
                if d.abs() < 30.0 {
                    self.value(t) * d.exp_m1()
                } else {
                    self.value(t - tau) - self.value(t)
                }
            }
            Family::Bump { center, radius } => {
                let u1 = (t - tau - center) / radius;
                let u0 = (t - center) / radius;
                if u1.abs() < 1.0 && u0.abs() < 1.0 {
                    let g1 = 1.0 - 1.0 / (1.0 - u1 * u1);
                    let g0 = 1.0 - 1.0 / (1.0 - u0 * u0);
                    let d = g1 - g0;
                    if d.abs() < 30.0 {
                        return self.value(t) * d.exp_m1();
                    }
                }
                self.value(t - tau) - self.value(t)
            }
            _ => self.value(t - tau) - self.value(t),
        }
    }

    /// `f(t + tau) - f(t)`; the mirror of [`diff_back`](Self::diff_back).
    pub fn diff_fwd(&self, t: f64, tau: f64) -> f64 {
        self.diff_back(t, -tau)
    }

    pub fn decay_class(&self) -> DecayClass {
        match &self.family {
            Family::Gaussian { .. } | Family::HeatKernel { .. } => DecayClass::Gaussian,
            Family::Bump { .. } | Family::Indicator { .. } => DecayClass::CompactSupport,
            Family::ExpGrowth { lambda } => {
                if *lambda > 0.0 {
                    DecayClass::ExponentialLeft
                } else {
                    DecayClass::ExponentialRight
                }
            }
            Family::Cosine { .. } | Family::Constant { .. } => DecayClass::Bounded,
        }
    }

    /// Exact support when compact.
    pub fn support(&self) -> Option<(f64, f64)> {
        match &self.family {
            Family::Bump { center, radius } => Some((center - radius, center + radius)),
            Family::Indicator { a, b } => Some((*a, *b)),
            _ => None,
        }
    }

    /// Interval outside which `|f|` is below 2^-60 of its peak, when one
    /// exists.
    pub fn effective_support(&self) -> Option<(f64, f64)> {
        match &self.family {
            Family::Gaussian { mu, sigma } => Some((mu - 13.0 * sigma, mu + 13.0 * sigma)),
            Family::HeatKernel { t0 } => {
                let s = (2.0 * t0).sqrt();
                Some((-13.0 * s, 13.0 * s))
            }
            _ => self.support(),
        }
    }

    /// Points where the function stops being analytic; quadrature panels are
    /// split there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::Bump { center, radius } => vec![center - radius, center + radius],
            Family::Indicator { a, b } => vec![*a, *b],
            _ => Vec::new(),
        }
    }

    /// Characteristic length over which the function varies.
    pub fn length_scale(&self) -> f64 {
        match &self.family {
            Family::Gaussian { sigma, .. } => *sigma,
            Family::Bump { radius, .. } => 0.5 * radius,
            Family::ExpGrowth { lambda } => 1.0 / lambda.abs(),
            Family::Cosine { wave } => 1.0 / wave[0].abs(),
            Family::HeatKernel { t0 } => (2.0 * t0).sqrt(),
            Family::Indicator { a, b } => b - a,
            Family::Constant { .. } => f64::INFINITY,
        }
    }

    /// Oscillation frequency for trigonometric entries.
    pub fn osc_freq(&self) -> Option<f64> {
        match &self.family {
            Family::Cosine { wave } => Some(wave[0].abs()),
            _ => None,
        }
    }

    /// Upper bound on `int_{-inf}^{y} |f|`; `None` when the left tail is not
    /// integrable.
    pub fn abs_mass_left_of(&self, y: f64) -> Option<f64> {
        match &self.family {
            Family::Gaussian { mu, sigma } => {
                let full = sigma * (2.0 * std::f64::consts::PI).sqrt();
                let v = (y - mu) / sigma;
                if v >= 0.0 {
                    Some(full)
                } else {
                    Some(full.min(sigma * (-0.5 * v * v).exp() / (-v)))
                }
            }
            Family::HeatKernel { t0 } => {
                let sigma = (2.0 * t0).sqrt();
                let amp = (4.0 * std::f64::consts::PI * t0).powf(-0.5);
                let v = y / sigma;
                if v >= 0.0 {
                    Some(1.0)
                } else {
                    Some(1.0f64.min(amp * sigma * (-0.5 * v * v).exp() / (-v)))
                }
            }
            Family::Bump { center, radius } => {
                if y <= center - radius {
                    Some(0.0)
                } else {
                    Some((y.min(center + radius) - (center - radius)).max(0.0))
                }
            }
            Family::Indicator { a, b } => Some((y.min(*b) - a).max(0.0)),
            Family::ExpGrowth { lambda } => {
                if *lambda > 0.0 {
                    Some((lambda * y).exp() / lambda)
                } else {
                    None
                }
            }
            Family::Cosine { .. } | Family::Constant { .. } => None,
        }
    }

    /// Mirror of [`abs_mass_left_of`](Self::abs_mass_left_of).
    pub fn abs_mass_right_of(&self, y: f64) -> Option<f64> {
        match &self.family {
            Family::Gaussian { mu, sigma } => {
                let full = sigma * (2.0 * std::f64::consts::PI).sqrt();
                let v = (y - mu) / sigma;
                if v <= 0.0 {
                    Some(full)
                } else {
                    Some(full.min(sigma * (-0.5 * v * v).exp() / v))
                }
            }
            Family::HeatKernel { t0 } => {
                let sigma = (2.0 * t0).sqrt();
                let amp = (4.0 * std::f64::consts::PI * t0).powf(-0.5);
                let v = y / sigma;
                if v <= 0.0 {
                    Some(1.0)
                } else {
                    Some(1.0f64.min(amp * sigma * (-0.5 * v * v).exp() / v))
                }
            }
            Family::Bump { center, radius } => {
                if y >= center + radius {
                    Some(0.0)
                } else {
                    Some((center + radius - y.max(center - radius)).max(0.0))
                }
            }
            Family::Indicator { a, b } => Some((b - y.max(*a)).max(0.0)),
            Family::ExpGrowth { lambda } => {
                if *lambda < 0.0 {
                    Some((lambda * y).exp() / (-lambda))
                } else {
                    None
                }
            }
            Family::Cosine { .. } | Family::Constant { .. } => None,
        }
    }
}

/// Structure of a multi-dimensional closed form, recorded so operators can
/// reduce n-dimensional convolutions to one-dimensional ones where the
/// factorization is exact.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedFormND {
    /// `f(x) = prod_i g_i(x_i)`.
    Separable { factors: Vec<ClosedForm1D> },
    /// `f(x) = g(d . x)` with `|d| = 1`.
    Ridge { direction: Vec<f64>, profile: ClosedForm1D },
    /// Indicator of the centered ball.
    Ball { dim: usize, radius: f64 },
}

impl ClosedFormND {
    pub fn from_family(family: Family, dim: usize) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(FracError::ParameterOutOfRange(format!(
                "dimension must be 1..=3, got {dim}"
            )));
        }
        validate_family(&family)?;
        let form = match family {
            Family::Cosine { wave } => {
                let mut k = wave;
                k.resize(dim, 0.0);
                let norm = k.iter().map(|v| v * v).sum::<f64>().sqrt();
                ClosedFormND::Ridge {
                    direction: k.iter().map(|v| v / norm).collect(),
                    profile: ClosedForm1D::from_family(Family::Cosine { wave: vec![norm] })?,
                }
            }
            Family::ExpGrowth { lambda } => ClosedFormND::Ridge {
                direction: {
                    let mut d = vec![0.0; dim];
                    d[0] = 1.0;
                    d
                },
                profile: ClosedForm1D::from_family(Family::ExpGrowth { lambda })?,
            },
            Family::Indicator { a, b } => ClosedFormND::Ball {
                dim,
                radius: 0.5 * (b - a),
            },
            Family::Constant { c } => {
                // constant = product of a constant with 1s
                let mut factors = vec![ClosedForm1D::from_family(Family::Constant { c })?];
                factors
                    .extend(vec![ClosedForm1D::from_family(Family::Constant { c: 1.0 })?; dim - 1]);
                ClosedFormND::Separable { factors }
            }
            Family::Gaussian { mu, sigma } => ClosedFormND::Separable {
                factors: vec![ClosedForm1D::from_family(Family::Gaussian { mu, sigma })?; dim],
            },
            Family::HeatKernel { t0 } => ClosedFormND::Separable {
                factors: vec![ClosedForm1D::from_family(Family::HeatKernel { t0 })?; dim],
            },
            Family::Bump { center, radius } => ClosedFormND::Separable {
                factors: vec![ClosedForm1D::from_family(Family::Bump { center, radius })?; dim],
            },
        };
        Ok(form)
    }

    pub fn dim(&self) -> usize {
        match self {
            ClosedFormND::Separable { factors } => factors.len(),
            ClosedFormND::Ridge { direction, .. } => direction.len(),
            ClosedFormND::Ball { dim, .. } => *dim,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            ClosedFormND::Separable { factors } => factors
                .iter()
                .zip(x)
                .map(|(g, &xi)| g.value(xi))
                .product(),
            ClosedFormND::Ridge { direction, profile } => {
                profile.value(dot(direction, x))
            }
            ClosedFormND::Ball { radius, .. } => {
                if norm(x) <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        match self {
            ClosedFormND::Separable { factors } => {
                let values: Vec<f64> = factors.iter().zip(x).map(|(g, &xi)| g.value(xi)).collect();
                (0..n)
                    .map(|i| {
                        let mut v = factors[i].d1(x[i]);
                        for (j, val) in values.iter().enumerate() {
                            if j != i {
                                v *= val;
                            }
                        }
                        v
                    })
                    .collect()
            }
            ClosedFormND::Ridge { direction, profile } => {
                let g1 = profile.d1(dot(direction, x));
                direction.iter().map(|d| d * g1).collect()
            }
            ClosedFormND::Ball { .. } => vec![0.0; n],
        }
    }

    /// Hessian in row-major order; symmetric by construction.
    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut h = vec![0.0; n * n];
        match self {
            ClosedFormND::Separable { factors } => {
                let values: Vec<f64> = factors.iter().zip(x).map(|(g, &xi)| g.value(xi)).collect();
                let d1s: Vec<f64> = factors.iter().zip(x).map(|(g, &xi)| g.d1(xi)).collect();
                for i in 0..n {
                    for j in 0..n {
                        let mut v = if i == j { factors[i].d2(x[i]) } else { d1s[i] * d1s[j] };
                        for (m, val) in values.iter().enumerate() {
                            if m != i && m != j {
                                v *= val;
                            }
                        }
                        h[i * n + j] = v;
                    }
                }
            }
            ClosedFormND::Ridge { direction, profile } => {
                let g2 = profile.d2(dot(direction, x));
                for i in 0..n {
                    for j in 0..n {
                        h[i * n + j] = direction[i] * direction[j] * g2;
                    }
                }
            }
            ClosedFormND::Ball { .. } => {}
        }
        h
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let h = self.hessian(x);
        (0..n).map(|i| h[i * n + i]).sum()
    }

    /// Frobenius norm of the Hessian.
    pub fn hessian_norm(&self, x: &[f64]) -> f64 {
        self.hessian(x).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn decay_class(&self) -> DecayClass {
        match self {
            ClosedFormND::Separable { factors } => {
                let classes: Vec<DecayClass> =
                    factors.iter().map(ClosedForm1D::decay_class).collect();
                if classes.iter().all(|c| *c == DecayClass::CompactSupport) {
                    DecayClass::CompactSupport
                } else if classes
                    .iter()
                    .all(|c| matches!(c, DecayClass::Gaussian | DecayClass::CompactSupport))
                {
                    DecayClass::Gaussian
                } else {
                    DecayClass::Bounded
                }
            }
            ClosedFormND::Ridge { profile, .. } => match profile.decay_class() {
                DecayClass::Bounded => DecayClass::Bounded,
                // ridge functions are constant across the ridge: never
                // integrable over R^n
                _ => DecayClass::Bounded,
            },
            ClosedFormND::Ball { .. } => DecayClass::CompactSupport,
        }
    }

    /// `int |f| dx` when finite.
    pub fn total_abs_mass(&self) -> Option<f64> {
        match self {
            ClosedFormND::Separable { factors } => {
                let mut m = 1.0;
                for g in factors {
                    m *= g.abs_mass_left_of(f64::INFINITY)?;
                }
                Some(m)
            }
            ClosedFormND::Ridge { .. } => None,
            ClosedFormND::Ball { dim, radius } => Some(ball_volume(*dim, *radius)),
        }
    }

    /// Oscillation frequency `|k|` of a trigonometric ridge.
    pub fn osc_freq(&self) -> Option<f64> {
        match self {
            ClosedFormND::Ridge { profile, .. } => profile.osc_freq(),
            _ => None,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub(crate) fn ball_volume(n: usize, r: f64) -> f64 {
    match n {
        1 => 2.0 * r,
        2 => std::f64::consts::PI * r * r,
        3 => 4.0 / 3.0 * std::f64::consts::PI * r * r * r,
        _ => unreachable!("dimension is 1..=3"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn parse_and_defaults() {
        let e = CatalogEntry::parse("gaussian").unwrap();
        assert!(matches!(e.family(), Family::Gaussian { .. }));
        let e = CatalogEntry::parse("cosine(3)").unwrap();
        let cf = e.closed_form_1d().unwrap();
        // cos(3 * pi/3) = cos(pi) = -1
        assert_abs_diff_eq!(cf.value(std::f64::consts::PI / 3.0), -1.0, epsilon = 1e-14);
        assert!(CatalogEntry::parse("woble").is_err());
        assert!(CatalogEntry::parse("gaussian(0, -1)").is_err());
        assert!(CatalogEntry::parse("exp_growth(0)").is_err());
    }

    #[test]
    fn gaussian_peak_and_derivatives() {
        let g = CatalogEntry::parse("gaussian").unwrap().closed_form_1d().unwrap();
        assert_abs_diff_eq!(g.value(0.0), 1.0, epsilon = 1e-15);
        // finite-difference cross-check of d1/d2
        let h = 1e-5;
        for &t in &[-1.3, 0.2, 2.7] {
            let fd1 = (g.value(t + h) - g.value(t - h)) / (2.0 * h);
            let fd2 = (g.value(t + h) - 2.0 * g.value(t) + g.value(t - h)) / (h * h);
            assert_relative_eq!(g.d1(t), fd1, max_relative = 1e-8);
            assert_relative_eq!(g.d2(t), fd2, max_relative = 1e-5);
        }
    }

    #[test]
    fn bump_support_and_derivatives() {
        let b = CatalogEntry::parse("bump").unwrap().closed_form_1d().unwrap();
        assert_eq!(b.value(1.0), 0.0);
        assert_eq!(b.value(-1.01), 0.0);
        assert_abs_diff_eq!(b.value(0.0), 1.0, epsilon = 1e-15);
        let h = 1e-6;
        for &t in &[-0.7, 0.1, 0.6] {
            let fd1 = (b.value(t + h) - b.value(t - h)) / (2.0 * h);
            assert_relative_eq!(b.d1(t), fd1, max_relative = 1e-6);
        }
        assert_eq!(b.support(), Some((-1.0, 1.0)));
    }

    #[test]
    fn stable_differences_match_direct_evaluation() {
        let entries = ["gaussian", "exp_growth(2)", "cosine(3)", "heat_kernel(0.5)", "bump"];
        for name in entries {
            let f = CatalogEntry::parse(name).unwrap().closed_form_1d().unwrap();
            for &t in &[-0.8, 0.3, 1.9] {
                for &tau in &[0.5, 1e-3, 1e-7] {
                    let stable = f.diff_back(t, tau);
                    let direct = f.value(t - tau) - f.value(t);
                    assert_abs_diff_eq!(stable, direct, epsilon = 1e-9);
                }
                // tiny tau: stable path must track -tau f'(t) while the
                // direct difference is pure roundoff
                let tau = 1e-12;
                let expected = -tau * f.d1(t);
                let got = f.diff_back(t, tau);
                assert_abs_diff_eq!(got, expected, epsilon = 1e-24 + expected.abs() * 1e-3);
            }
        }
    }

    #[test]
    fn decay_classes() {
        let cases = [
            ("gaussian", DecayClass::Gaussian),
            ("bump", DecayClass::CompactSupport),
            ("exp_growth(1)", DecayClass::ExponentialLeft),
            ("exp_growth(-1)", DecayClass::ExponentialRight),
            ("cosine(2)", DecayClass::Bounded),
            ("constant(5)", DecayClass::Bounded),
            ("indicator", DecayClass::CompactSupport),
        ];
        for (name, class) in cases {
            let f = CatalogEntry::parse(name).unwrap().closed_form_1d().unwrap();
            assert_eq!(f.decay_class(), class, "{name}");
        }
    }

    #[test]
    fn nd_forms_factorize() {
        let g = CatalogEntry::parse("gaussian").unwrap().closed_form_nd(2).unwrap();
        let x = [0.3, -0.8];
        assert_relative_eq!(
            g.value(&x),
            (-0.5_f64 * (0.09 + 0.64)).exp(),
            max_relative = 1e-14
        );
        // Laplacian against finite differences
        let h = 1e-4;
        let lap_fd = (g.value(&[x[0] + h, x[1]]) + g.value(&[x[0] - h, x[1]])
            + g.value(&[x[0], x[1] + h])
            + g.value(&[x[0], x[1] - h])
            - 4.0 * g.value(&x))
            / (h * h);
        assert_relative_eq!(g.laplacian(&x), lap_fd, max_relative = 1e-6);

        let c = CatalogEntry::parse("cosine(1,2)").unwrap().closed_form_nd(2).unwrap();
        assert_relative_eq!(
            c.value(&x),
            (1.0 * x[0] + 2.0 * x[1]).cos(),
            max_relative = 1e-14
        );
        assert_relative_eq!(c.osc_freq().unwrap(), 5f64.sqrt(), max_relative = 1e-14);
        // ridge Hessian is rank one with trace -(|k|^2) cos(k.x)
        assert_relative_eq!(
            c.laplacian(&x),
            -5.0 * (x[0] + 2.0 * x[1]).cos(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn hessian_is_symmetric() {
        for name in ["gaussian", "bump", "cosine(1,2)", "heat_kernel(0.3)"] {
            let f = CatalogEntry::parse(name).unwrap().closed_form_nd(2).unwrap();
            let h = f.hessian(&[0.4, -0.2]);
            assert_abs_diff_eq!(h[1], h[2], epsilon = 1e-13);
        }
    }
}
