//! Weighted quadrature on the half-line, L^p norms, entropy, Cheeger energy,
//! and the metric slope on grids.
//!
//! Sampled functions are interpreted as their piecewise-linear interpolants:
//! constant on `[0, grid[0]]`, linear between nodes, zero beyond the last
//! node. Every functional below integrates that interpolant (or an analytic
//! map) against the space weight `avr * N * sigma_N * r^{N-1}` exactly enough
//! that the verifier tolerances are dominated by modeling, not quadrature.

pub mod quad;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spaces::SpaceDescriptor;
use quad::{gauss_panel, graded_panels, pairwise_sum};

/// A radial map on `[0, infinity)`.
///
/// `segment_grid` exposes breakpoints where smoothness may fail; the
/// quadrature engine snaps panel boundaries to them.
pub trait RadialMap: Send + Sync {
    fn eval(&self, r: f64) -> f64;

    fn derivative_at(&self, _r: f64) -> Option<f64> {
        None
    }

    fn has_derivative(&self) -> bool {
        false
    }

    /// Radius beyond which the map is identically zero, if known.
    fn support_end(&self) -> Option<f64> {
        None
    }

    fn segment_grid(&self) -> Option<&[f64]> {
        None
    }

    /// Certified bound on |value| beyond the support end.
    fn tail_bound(&self) -> Option<f64> {
        None
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> RadialMap for F {
    fn eval(&self, r: f64) -> f64 {
        self(r)
    }
}

/// A function of the radial variable sampled on a strictly increasing grid.
#[derive(Clone)]
pub struct RadialFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    analytic_derivative: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    tail_bound: Option<f64>,
}

impl std::fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialFunction")
            .field("points", &self.grid.len())
            .field("r_end", &self.grid.last())
            .field("has_derivative", &self.analytic_derivative.is_some())
            .field("tail_bound", &self.tail_bound)
            .finish()
    }
}

impl RadialFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "grid and value lengths differ: {} vs {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::InvalidInput("need at least two samples".into()));
        }
        if !(grid[0] >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid must start at a nonnegative radius, got {}",
                grid[0]
            )));
        }
        for w in grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidInput(format!(
                    "grid not strictly increasing near {}",
                    w[0]
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample value".into()));
        }
        Ok(RadialFunction {
            grid,
            values,
            analytic_derivative: None,
            tail_bound: None,
        })
    }

    /// Attaches an analytic derivative, sanity-checked against centered
    /// difference quotients at interior nodes. The check allows the local
    /// second-difference scale on top of the 1e-4 relative budget, so coarse
    /// grids of curved functions are not rejected.
    pub fn with_derivative(
        mut self,
        derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        let n = self.grid.len();
        let stride = ((n - 2) / 16).max(1);
        let mut scale: f64 = 1.0;
        let mut checks = Vec::new();
        let mut i = 1;
        while i + 1 < n {
            let fd = (self.values[i + 1] - self.values[i - 1]) / (self.grid[i + 1] - self.grid[i - 1]);
            let second = (self.values[i + 1] - 2.0 * self.values[i] + self.values[i - 1]).abs();
            let h = 0.5 * (self.grid[i + 1] - self.grid[i - 1]);
            checks.push((derivative(self.grid[i]), fd, second / h));
            scale = scale.max(fd.abs());
            i += stride;
        }
        for (ad, fd, allowance) in checks {
            if (ad - fd).abs() > 1e-4 * scale + allowance {
                return Err(Error::InvalidInput(format!(
                    "analytic derivative {ad} disagrees with difference quotient {fd}"
                )));
            }
        }
        self.analytic_derivative = Some(derivative);
        Ok(self)
    }

    pub fn with_tail_bound(mut self, bound: f64) -> Self {
        self.tail_bound = Some(bound);
        self
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn r_end(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Maps the values through a scalar function, keeping the grid.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        RadialFunction::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Two-column CSV serialization (radius,value), one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,value\n");
        for (r, v) in self.grid.iter().zip(self.values.iter()) {
            out.push_str(&format!("{r},{v}\n"));
        }
        out
    }

    /// Parses a two-column CSV (radius,value) with an optional header line.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (a, b) = match (parts.next(), parts.next()) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "line {}: expected two comma-separated columns",
                        lineno + 1
                    )))
                }
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(r), Ok(v)) => {
                    grid.push(r);
                    values.push(v);
                }
                _ if lineno == 0 => continue, // header row
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "line {}: cannot parse {a:?},{b:?}",
                        lineno + 1
                    )))
                }
            }
        }
        RadialFunction::new(grid, values)
    }
}

impl RadialMap for RadialFunction {
    fn eval(&self, r: f64) -> f64 {
        if r <= self.grid[0] {
            return self.values[0];
        }
        if r > self.r_end() {
            return 0.0;
        }
        let hi = self.grid.partition_point(|&g| g < r);
        let lo = hi - 1;
        let t = (r - self.grid[lo]) / (self.grid[hi] - self.grid[lo]);
        self.values[lo] + t * (self.values[hi] - self.values[lo])
    }

    fn derivative_at(&self, r: f64) -> Option<f64> {
        self.analytic_derivative.as_ref().map(|d| d(r))
    }

    fn has_derivative(&self) -> bool {
        self.analytic_derivative.is_some()
    }

    fn support_end(&self) -> Option<f64> {
        Some(self.r_end())
    }

    fn segment_grid(&self) -> Option<&[f64]> {
        Some(&self.grid)
    }

    fn tail_bound(&self) -> Option<f64> {
        self.tail_bound
    }
}

/// An analytic radial map backed by closures.
pub struct AnalyticRadial {
    value: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
    support_end: Option<f64>,
}

impl AnalyticRadial {
    pub fn from_fn(value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        AnalyticRadial {
            value: Box::new(value),
            derivative: None,
            support_end: None,
        }
    }

    pub fn with_derivative(
        mut self,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Box::new(derivative));
        self
    }

    pub fn with_support_end(mut self, end: f64) -> Self {
        self.support_end = Some(end);
        self
    }
}

impl RadialMap for AnalyticRadial {
    fn eval(&self, r: f64) -> f64 {
        (self.value)(r)
    }

    fn derivative_at(&self, r: f64) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(r))
    }

    fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    fn support_end(&self) -> Option<f64> {
        self.support_end
    }
}

/// Panel layout and tail budget for one weighted integral.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub truncation_radius: f64,
    pub panels: usize,
    pub order: usize,
    pub tail_tolerance: f64,
}

impl QuadratureSpec {
    pub fn new(truncation_radius: f64) -> Result<Self> {
        Self::with_layout(truncation_radius, 32, 32, 1e-12)
    }

    pub fn with_layout(
        truncation_radius: f64,
        panels: usize,
        order: usize,
        tail_tolerance: f64,
    ) -> Result<Self> {
        if !(truncation_radius > 0.0) {
            return Err(Error::Domain(format!(
                "truncation radius must be positive, got {truncation_radius}"
            )));
        }
        if panels < 8 {
            return Err(Error::Domain(format!("need at least 8 panels, got {panels}")));
        }
        if !matches!(order, 8 | 16 | 32) {
            return Err(Error::Domain(format!("order must be 8, 16 or 32, got {order}")));
        }
        if !(tail_tolerance > 0.0) {
            return Err(Error::Domain("tail tolerance must be positive".into()));
        }
        Ok(QuadratureSpec {
            truncation_radius,
            panels,
            order,
            tail_tolerance,
        })
    }

    /// Truncation sized for integrands decaying like `exp(-rate * r^power)`:
    /// the neglected exponential factor is below e^{-40 - 2N}.
    pub fn for_decay(rate: f64, power: f64, n_dim: f64) -> Result<Self> {
        if !(rate > 0.0 && power > 0.0) {
            return Err(Error::Domain("decay rate and power must be positive".into()));
        }
        let radius = ((40.0 + 2.0 * n_dim) / rate).powf(1.0 / power);
        Self::new(radius)
    }

    pub fn refined(&self, factor: usize) -> Self {
        QuadratureSpec {
            panels: self.panels * factor,
            ..*self
        }
    }
}

/// Engine shared by all weighted functionals: integrates
/// `integrand(r) * space.weight(r)` over `[0, R]`, snapping panels to the
/// map's segment grid when one is exposed.
fn integrate_engine(
    f: &dyn RadialMap,
    integrand: &dyn Fn(f64) -> f64,
    space: &SpaceDescriptor,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mut r_end = spec.truncation_radius;
    if let Some(end) = f.support_end() {
        r_end = r_end.min(end);
    }
    let weighted = |r: f64| integrand(r) * space.weight(r);

    let total = match f.segment_grid() {
        Some(grid) => {
            let mut partial = Vec::with_capacity(grid.len() + 1);
            if grid[0] > 0.0 {
                partial.push(graded_panels(&weighted, grid[0].min(r_end), spec.order, 8));
            }
            for w in grid.windows(2) {
                let (a, b) = (w[0], w[1].min(r_end));
                if a >= r_end {
                    break;
                }
                if a == 0.0 {
                    partial.push(graded_panels(&weighted, b, spec.order, 8));
                } else {
                    partial.push(gauss_panel(&weighted, a, b, spec.order));
                }
            }
            pairwise_sum(&partial)
        }
        None => graded_panels(&weighted, r_end, spec.order, spec.panels),
    };

    if !total.is_finite() {
        return Err(Error::InvalidInput(
            "integrand produced a non-finite value".into(),
        ));
    }

    // Tail estimate, propagated through a unit-rate exponential decay
    // envelope: compactly supported maps only carry their certified bound,
    // everything else is probed at the truncation radius.
    let compact = f
        .support_end()
        .is_some_and(|end| end <= r_end * (1.0 + 1e-12));
    let boundary = if compact {
        f.tail_bound().unwrap_or(0.0)
    } else {
        f.tail_bound().unwrap_or(0.0).max(integrand(r_end).abs())
    };
    let estimate = 2.0 * boundary * space.weight(r_end);
    if estimate > spec.tail_tolerance && estimate > 1e-14 * total.abs() {
        return Err(Error::TailNotNegligible {
            estimate,
            tolerance: spec.tail_tolerance,
        });
    }
    Ok(total)
}

/// Integral of `f` against the space measure.
pub fn integrate_weighted(
    f: &dyn RadialMap,
    space: &SpaceDescriptor,
    spec: &QuadratureSpec,
) -> Result<f64> {
    integrate_engine(f, &|r| f.eval(r), space, spec)
}

/// Integral of `f * extra` against the space measure (used for reweighted
/// measures such as the Gaussian one).
pub fn integrate_weighted_with(
    f: &dyn RadialMap,
    extra: &dyn Fn(f64) -> f64,
    space: &SpaceDescriptor,
    spec: &QuadratureSpec,
) -> Result<f64> {
    integrate_engine(f, &|r| f.eval(r) * extra(r), space, spec)
}

/// L^p norm of `f` against the space measure.
pub fn lp_norm(f: &dyn RadialMap, p: f64, space: &SpaceDescriptor, spec: &QuadratureSpec) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("lp_norm requires p >= 1, got {p}")));
    }
    let value = integrate_engine(f, &|r| f.eval(r).abs().powf(p), space, spec)?;
    Ok(value.max(0.0).powf(1.0 / p))
}

fn xlogx(w: f64) -> f64 {
    if w <= 0.0 {
        0.0 // continuous extension of w log w
    } else {
        w * w.ln()
    }
}

/// Entropy functional `int |f|^p log |f|^p dm` with the `0 log 0 = 0` convention.
pub fn entropy(f: &dyn RadialMap, p: f64, space: &SpaceDescriptor, spec: &QuadratureSpec) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("entropy requires p > 1, got {p}")));
    }
    integrate_engine(f, &|r| xlogx(f.eval(r).abs().powf(p)), space, spec)
}

/// Entropy against a reweighted measure.
pub fn entropy_with(
    f: &dyn RadialMap,
    p: f64,
    extra: &dyn Fn(f64) -> f64,
    space: &SpaceDescriptor,
    spec: &QuadratureSpec,
) -> Result<f64> {
    integrate_engine(f, &|r| xlogx(f.eval(r).abs().powf(p)) * extra(r), space, spec)
}

/// Radial Cheeger energy `int |f'|^p dm`.
///
/// Uses the analytic derivative when the map carries one; otherwise the
/// function is its piecewise-linear interpolant and the energy is assembled
/// exactly from the segment slopes and weight masses.
pub fn cheeger_energy(
    f: &dyn RadialMap,
    p: f64,
    space: &SpaceDescriptor,
    spec: &QuadratureSpec,
) -> Result<f64> {
    cheeger_energy_with(f, p, &|_| 1.0, space, spec)
}

/// Cheeger energy against a reweighted measure.
pub fn cheeger_energy_with(
    f: &dyn RadialMap,
    p: f64,
    extra: &dyn Fn(f64) -> f64,
    space: &SpaceDescriptor,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("cheeger energy requires p > 1, got {p}")));
    }
    if f.has_derivative() {
        return integrate_engine(
            f,
            &|r| f.derivative_at(r).unwrap_or(0.0).abs().powf(p) * extra(r),
            space,
            spec,
        );
    }
    let grid = f.segment_grid().ok_or_else(|| {
        Error::InvalidInput("cheeger energy needs an analytic derivative or a sampled grid".into())
    })?;
    if grid.len() < 256 {
        log::warn!(
            "cheeger energy falling back to segment slopes on a {}-point grid",
            grid.len()
        );
    }
    let r_end = spec.truncation_radius.min(f.support_end().unwrap_or(f64::INFINITY));
    let mut partial = Vec::with_capacity(grid.len());
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1].min(r_end));
        if a >= r_end {
            break;
        }
        let slope = (f.eval(w[1]) - f.eval(w[0])) / (w[1] - w[0]);
        if slope == 0.0 {
            continue;
        }
        let mass = gauss_panel(|r| extra(r) * space.weight(r), a, b, spec.order);
        partial.push(slope.abs().powf(p) * mass);
    }
    Ok(pairwise_sum(&partial))
}

/// Metric slope at a grid index: the larger of the two one-sided absolute
/// difference quotients (one-sided at the boundaries).
pub fn slope(u: &RadialFunction, i: usize) -> f64 {
    let g = u.grid();
    let v = u.values();
    let mut s: f64 = 0.0;
    if i > 0 {
        s = s.max(((v[i] - v[i - 1]) / (g[i] - g[i - 1])).abs());
    }
    if i + 1 < g.len() {
        s = s.max(((v[i + 1] - v[i]) / (g[i + 1] - g[i])).abs());
    }
    s
}

/// Uniform grid over `[a, b]` with `n` points.
pub fn linear_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Samples a map on the given grid, carrying the analytic derivative along.
pub fn sample_map(f: &(impl RadialMap + Clone + 'static), grid: Vec<f64>) -> Result<RadialFunction>
where
{
    let values: Vec<f64> = grid.iter().map(|&r| f.eval(r)).collect();
    let sampled = RadialFunction::new(grid, values)?;
    if f.has_derivative() {
        let f = f.clone();
        sampled.with_derivative(Arc::new(move |r| f.derivative_at(r).unwrap_or(0.0)))
    } else {
        Ok(sampled)
    }
}

/// The normalized extremal family of the one-dimensional weighted
/// log-Sobolev inequality:
/// `v(r) = lambda^{N/(p p')} (sigma_N Gamma(N/p'+1))^{-1/p} exp(-lambda r^{p'}/p)`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianExtremal {
    pub lambda: f64,
    pub p: f64,
    pub p_conj: f64,
    pub n_dim: f64,
    coefficient: f64,
}

impl GaussianExtremal {
    pub fn new(lambda: f64, p: f64, n_dim: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
        }
        let pair = crate::constants::ExponentPair::new(p)?;
        let conj = pair.conj();
        let ln_norm = crate::constants::ln_ball_coefficient(n_dim)?
            + crate::constants::ln_gamma(n_dim / conj + 1.0)?;
        let ln_coeff = (n_dim / (p * conj)) * lambda.ln() - ln_norm / p;
        Ok(GaussianExtremal {
            lambda,
            p,
            p_conj: conj,
            n_dim,
            coefficient: ln_coeff.exp(),
        })
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    /// Quadrature layout adapted to the family's decay.
    pub fn default_spec(&self) -> QuadratureSpec {
        QuadratureSpec::for_decay(self.lambda, self.p_conj, self.n_dim)
            .expect("positive decay parameters")
    }
}

impl RadialMap for GaussianExtremal {
    fn eval(&self, r: f64) -> f64 {
        self.coefficient * (-self.lambda * r.powf(self.p_conj) / self.p).exp()
    }

    fn derivative_at(&self, r: f64) -> Option<f64> {
        let shape = -self.lambda * self.p_conj / self.p * r.powf(self.p_conj - 1.0);
        Some(shape * self.eval(r))
    }

    fn has_derivative(&self) -> bool {
        true
    }
}

/// Stock test functions used by batteries and the CLI.
pub mod families {
    use super::AnalyticRadial;

    /// `exp(-a r)` with its derivative.
    pub fn exp_decay(a: f64) -> AnalyticRadial {
        AnalyticRadial::from_fn(move |r| (-a * r).exp()).with_derivative(move |r| -a * (-a * r).exp())
    }

    /// Smooth bump supported on `[0, radius]`, a mollified indicator.
    pub fn bump(radius: f64) -> AnalyticRadial {
        let value = move |r: f64| {
            let s = r / radius;
            if s >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - s * s)).exp()
            }
        };
        AnalyticRadial::from_fn(value)
            .with_derivative(move |r| {
                let s = r / radius;
                if s >= 1.0 {
                    0.0
                } else {
                    let den = 1.0 - s * s;
                    value(r) * (-2.0 * s / (den * den)) / radius
                }
            })
            .with_support_end(radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::gamma;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cone(n: f64) -> SpaceDescriptor {
        SpaceDescriptor::model_cone(n).unwrap()
    }

    #[test]
    fn indicator_integrates_to_ball_volume() {
        let space = cone(2.0);
        let spec = QuadratureSpec::new(5.0).unwrap();
        let grid = linear_grid(0.0, 3.0, 4);
        let ind = RadialFunction::new(grid, vec![1.0; 4]).unwrap();
        let mass = integrate_weighted(&ind, &space, &spec).unwrap();
        assert_relative_eq!(mass, space.ball_volume(3.0).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn gaussian_integral_closed_form() {
        // 2 pi int r exp(-r^2) dr = pi for N = 2
        let space = cone(2.0);
        let spec = QuadratureSpec::new(9.0).unwrap();
        let value = integrate_weighted(&|r: f64| (-r * r).exp(), &space, &spec).unwrap();
        assert_relative_eq!(value, std::f64::consts::PI, max_relative = 1e-12);
    }

    #[test]
    fn weighted_power_decay_matches_gamma_identity() {
        // int_0^inf r^{N-1} exp(-r^{p'}) dr = Gamma(N/p')/p'
        for &(n_dim, conj) in &[(2.0, 2.0), (2.5, 3.0), (3.0, 1.5), (4.5, 2.25)] {
            let space = cone(n_dim);
            let spec = QuadratureSpec::for_decay(1.0, conj, n_dim).unwrap();
            let value = integrate_weighted(&move |r: f64| (-r.powf(conj)).exp(), &space, &spec).unwrap();
            let expected = n_dim * space.sigma() * gamma(n_dim / conj).unwrap() / conj;
            assert_relative_eq!(value, expected, max_relative = 1e-11);
        }
    }

    #[test]
    fn gaussian_extremal_is_normalized() {
        for &(lambda, p, n_dim) in &[
            (1.0, 2.0, 2.0),
            (0.5, 1.5, 2.5),
            (2.0, 3.0, 3.0),
            (1.7, 2.0, 5.0),
        ] {
            let v = GaussianExtremal::new(lambda, p, n_dim).unwrap();
            let space = cone(n_dim);
            let norm = lp_norm(&v, p, &space, &v.default_spec()).unwrap();
            assert_relative_eq!(norm, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn lp_norm_refinement_invariance() {
        let v = GaussianExtremal::new(1.0, 2.0, 3.0).unwrap();
        let space = cone(3.0);
        let spec = v.default_spec();
        let coarse = lp_norm(&v, 2.0, &space, &spec).unwrap();
        let fine = lp_norm(&v, 2.0, &space, &spec.refined(2)).unwrap();
        assert_relative_eq!(coarse, fine, max_relative = 1e-9);
        let e_coarse = entropy(&v, 2.0, &space, &spec).unwrap();
        let e_fine = entropy(&v, 2.0, &space, &spec.refined(2)).unwrap();
        assert!((e_coarse - e_fine).abs() <= 1e-9 * e_coarse.abs().max(1.0));
    }

    #[test]
    fn entropy_conventions() {
        let space = cone(2.0);
        let spec = QuadratureSpec::new(4.0).unwrap();
        // |u| = 1 on a support of measure 1: entropy 0
        let radius = (1.0 / space.sigma()).sqrt();
        let grid = linear_grid(0.0, radius, 8);
        let u = RadialFunction::new(grid, vec![1.0; 8]).unwrap();
        let e = entropy(&u, 2.0, &space, &spec).unwrap();
        assert!(e.abs() < 1e-12, "entropy {e}");
    }

    #[test]
    fn entropy_scaling_identity() {
        let v = GaussianExtremal::new(1.3, 2.0, 2.0).unwrap();
        let space = cone(2.0);
        let spec = v.default_spec();
        let c: f64 = 1.9;
        let scaled = AnalyticRadial::from_fn(move |r| c * v.eval(r));
        let base_entropy = entropy(&v, 2.0, &space, &spec).unwrap();
        let base_norm = lp_norm(&v, 2.0, &space, &spec).unwrap();
        let lhs = entropy(&scaled, 2.0, &space, &spec).unwrap();
        let cp = c.powi(2);
        let rhs = cp * base_entropy + cp * cp.ln() * base_norm.powi(2);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
    }

    #[test]
    fn lp_norm_homogeneity_and_zero() {
        let space = cone(2.5);
        let spec = QuadratureSpec::new(6.0).unwrap();
        let grid = linear_grid(0.0, 4.0, 129);
        let u = RadialFunction::new(grid.clone(), grid.iter().map(|r| (-r).exp()).collect()).unwrap();
        let base = lp_norm(&u, 1.5, &space, &spec).unwrap();
        let scaled = u.map_values(|v| -2.5 * v).unwrap();
        assert_relative_eq!(
            lp_norm(&scaled, 1.5, &space, &spec).unwrap(),
            2.5 * base,
            max_relative = 1e-12
        );
        let zero = RadialFunction::new(linear_grid(0.0, 1.0, 4), vec![0.0; 4]).unwrap();
        assert_eq!(lp_norm(&zero, 2.0, &space, &spec).unwrap(), 0.0);
    }

    #[test]
    fn cheeger_energy_closed_form() {
        // v = exp(-r^2/2), p = 2, N = 2: 2 pi int r^3 exp(-r^2) dr = pi
        let space = cone(2.0);
        let spec = QuadratureSpec::new(10.0).unwrap();
        let v = AnalyticRadial::from_fn(|r| (-0.5 * r * r).exp())
            .with_derivative(|r| -r * (-0.5 * r * r).exp());
        let energy = cheeger_energy(&v, 2.0, &space, &spec).unwrap();
        assert_relative_eq!(energy, std::f64::consts::PI, max_relative = 1e-12);

        // same function sampled without derivative: segment-slope route
        let grid = linear_grid(0.0, 10.0, 4097);
        let sampled =
            RadialFunction::new(grid.clone(), grid.iter().map(|&r| (-0.5 * r * r).exp()).collect())
                .unwrap();
        let pw = cheeger_energy(&sampled, 2.0, &space, &spec).unwrap();
        assert_relative_eq!(pw, std::f64::consts::PI, max_relative = 1e-4);
        // constant map has zero energy
        let flat = RadialFunction::new(linear_grid(0.0, 1.0, 16), vec![3.0; 16]).unwrap();
        assert_eq!(cheeger_energy(&flat, 2.0, &space, &spec).unwrap(), 0.0);
    }

    #[test]
    fn cheeger_chain_rule_composition() {
        // energy of exp(w/p) computed analytically vs via sampled slopes
        let space = cone(2.0);
        let spec = QuadratureSpec::new(8.0).unwrap();
        let p = 2.0;
        let w = move |r: f64| -(r * r) * 0.8;
        let composed = AnalyticRadial::from_fn(move |r| (w(r) / p).exp())
            .with_derivative(move |r| (-1.6 * r / p) * (w(r) / p).exp());
        let analytic = cheeger_energy(&composed, p, &space, &spec).unwrap();
        let grid = linear_grid(0.0, 8.0, 8193);
        let sampled =
            RadialFunction::new(grid.clone(), grid.iter().map(|&r| (w(r) / p).exp()).collect())
                .unwrap();
        let numeric = cheeger_energy(&sampled, p, &space, &spec).unwrap();
        assert_relative_eq!(analytic, numeric, max_relative = 1e-5);
    }

    #[test]
    fn slope_examples() {
        let grid = linear_grid(0.0, 2.0, 9);
        let linear = RadialFunction::new(grid.clone(), grid.iter().map(|r| 3.0 * r).collect()).unwrap();
        for i in 0..9 {
            assert_relative_eq!(slope(&linear, i), 3.0, max_relative = 1e-14);
        }
        let kink = RadialFunction::new(grid.clone(), grid.iter().map(|r| (r - 1.0).abs()).collect())
            .unwrap();
        assert_relative_eq!(slope(&kink, 4), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn slope_first_order_convergence() {
        let f = |r: f64| (1.5 * r).sin();
        let df = |r: f64| 1.5 * (1.5 * r).cos();
        let mut errors = Vec::new();
        for n in [65usize, 129, 257] {
            let grid = linear_grid(0.0, 2.0, n);
            let u = RadialFunction::new(grid.clone(), grid.iter().map(|&r| f(r)).collect()).unwrap();
            let i = n / 2;
            errors.push((slope(&u, i) - df(grid[i]).abs()).abs());
        }
        assert!(errors[2] < errors[0]);
        let ratio = errors[0] / errors[2];
        assert!(ratio > 2.0, "first-order refinement, got ratio {ratio}");
    }

    #[test]
    fn quadrature_exact_after_absorbing_integer_weight() {
        // full integrand q(r) polynomial of degree <= 2*order-1: exact
        let space = cone(3.0);
        let spec = QuadratureSpec::with_layout(2.0, 8, 8, 1e-12).unwrap();
        let w0 = space.weight(1.0); // N sigma_N
        let f = AnalyticRadial::from_fn(move |r: f64| {
            (r.powi(9) - 2.0 * r.powi(4) + 3.0) / (w0 * r * r / 3.0) / 3.0
        })
        .with_support_end(2.0);
        // f * weight = r^9 - 2 r^4 + 3
        let value = integrate_weighted(&f, &space, &spec).unwrap();
        let exact = 2.0f64.powi(10) / 10.0 - 2.0 * 2.0f64.powi(5) / 5.0 + 3.0 * 2.0;
        assert_relative_eq!(value, exact, max_relative = 1e-12);
    }

    #[test]
    fn fractional_dimension_against_doubled_reference() {
        let space = cone(2.7);
        let spec = QuadratureSpec::for_decay(1.0, 1.0, 2.7).unwrap();
        let f = |r: f64| (-r).exp() / (1.0 + r);
        let coarse = integrate_weighted(&f, &space, &spec).unwrap();
        let fine = integrate_weighted(&f, &space, &spec.refined(2)).unwrap();
        assert_relative_eq!(coarse, fine, max_relative = 1e-10);
    }

    #[test]
    fn tail_errors_and_nan_rejection() {
        let space = cone(2.0);
        let spec = QuadratureSpec::new(3.0).unwrap();
        // slowly decaying integrand truncated early: must refuse
        let err = integrate_weighted(&|_r: f64| 1.0, &space, &spec).unwrap_err();
        assert!(matches!(err, Error::TailNotNegligible { .. }));
        // certified tail bound on a sampled function triggers the same check
        let grid = linear_grid(0.0, 2.0, 8);
        let u = RadialFunction::new(grid, vec![1.0; 8]).unwrap().with_tail_bound(0.5);
        assert!(integrate_weighted(&u, &space, &spec).is_err());
        assert!(RadialFunction::new(vec![0.0, 1.0], vec![f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn derivative_sanity_check() {
        let grid = linear_grid(0.0, 3.0, 257);
        let values: Vec<f64> = grid.iter().map(|&r| (-r * r).exp()).collect();
        let good = RadialFunction::new(grid.clone(), values.clone())
            .unwrap()
            .with_derivative(Arc::new(|r| -2.0 * r * (-r * r).exp()));
        assert!(good.is_ok());
        let bad = RadialFunction::new(grid, values)
            .unwrap()
            .with_derivative(Arc::new(|r| 5.0 + r));
        assert!(bad.is_err());
    }

    #[test]
    fn csv_round_trip() {
        let grid = linear_grid(0.0, 1.0, 5);
        let u = RadialFunction::new(grid, vec![1.0, 0.8, 0.5, 0.2, 0.0]).unwrap();
        let text = u.to_csv();
        let back = RadialFunction::from_csv(&text).unwrap();
        assert_eq!(back.grid(), u.grid());
        assert_eq!(back.values(), u.values());
        // headerless input also parses
        let headerless = "0,1\n1,0.5\n2,0\n";
        let v = RadialFunction::from_csv(headerless).unwrap();
        assert_eq!(v.len(), 3);
    }

    proptest! {
        #[test]
        fn pw_eval_between_samples(points in prop::collection::vec(0.0f64..10.0, 3..20)) {
            let mut grid: Vec<f64> = points.clone();
            grid.sort_by(f64::total_cmp);
            grid.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            prop_assume!(grid.len() >= 2);
            let values: Vec<f64> = grid.iter().map(|r| r.cos()).collect();
            let u = RadialFunction::new(grid.clone(), values.clone()).unwrap();
            for w in grid.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let lo = u.eval(w[0]).min(u.eval(w[1]));
                let hi = u.eval(w[0]).max(u.eval(w[1]));
                let v = u.eval(mid);
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
            // beyond support the interpolant vanishes
            prop_assert_eq!(u.eval(grid.last().unwrap() + 1.0), 0.0);
        }
    }
}
