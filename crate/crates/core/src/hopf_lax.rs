//! Discrete Hopf-Lax (inf-convolution) transform with a brute-force oracle,
//! a linear-time envelope fast path for quadratic costs, function-class
//! validation, and Hamilton-Jacobi certification.
//!
//! The infimum over the half-line is restricted to the sample grid; class
//! assumption (A3) certifies that off-grid candidates beyond the truncation
//! cannot improve the minimum, mirroring the localization step of the
//! continuous theory.

use crate::calculus::{slope, RadialFunction, RadialMap};
use crate::error::{Error, Result};
use crate::report::VerificationReport;

/// Cost parameters of the transform `Q_t u(x) = inf_y u(y) + d(x,y)^{p'}/(p' t^{p'-1})`.
#[derive(Debug, Clone, Copy)]
pub struct HopfLaxParams {
    p_conj: f64,
    t: f64,
    t0: f64,
}

impl HopfLaxParams {
    pub fn new(p_conj: f64, t: f64, t0: f64) -> Result<Self> {
        if !(p_conj > 1.0) {
            return Err(Error::Domain(format!(
                "cost exponent must exceed 1, got {p_conj}"
            )));
        }
        if !(t > 0.0 && t < t0) {
            return Err(Error::Domain(format!(
                "times must satisfy 0 < t < t0, got t = {t}, t0 = {t0}"
            )));
        }
        Ok(HopfLaxParams { p_conj, t, t0 })
    }

    pub fn p_conj(&self) -> f64 {
        self.p_conj
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Same class horizon and cost exponent at a different time.
    pub fn at_time(&self, t: f64) -> Result<Self> {
        Self::new(self.p_conj, t, self.t0)
    }

    /// The Hoelder exponent of the Hamiltonian paired with the cost exponent.
    pub fn hamiltonian_exponent(&self) -> f64 {
        self.p_conj / (self.p_conj - 1.0)
    }

    pub fn cost(&self, distance: f64) -> f64 {
        distance.abs().powf(self.p_conj) / (self.p_conj * self.t.powf(self.p_conj - 1.0))
    }
}

/// Checkable proxies for the admissibility assumptions (A1)-(A3).
#[derive(Debug, Clone, Copy)]
pub struct ClassCertificate {
    pub lipschitz_ok: bool,
    pub nonneg_set_bounded: bool,
    pub q_t0_finite: bool,
    pub growth_m: f64,
    pub growth_c0: f64,
    pub growth_ok: bool,
    pub c0_strict: bool,
}

impl ClassCertificate {
    pub fn is_valid(&self) -> bool {
        self.lipschitz_ok
            && self.nonneg_set_bounded
            && self.q_t0_finite
            && self.growth_ok
            && self.c0_strict
    }

    pub fn violation_error(&self) -> Error {
        Error::ClassViolation {
            lipschitz_ok: self.lipschitz_ok,
            nonneg_set_bounded: self.nonneg_set_bounded,
            q_t0_finite: self.q_t0_finite,
            growth_ok: self.growth_ok && self.c0_strict,
        }
    }
}

/// Checks the admissibility proxies on the grid (never fails; inspect the
/// returned certificate).
///
/// (A1) finite samples with finite slopes and a nonnegativity set that ends
/// before the grid does; (A2) a finite transform at the base point for the
/// horizon t0; (A3) `u(r) >= m - r^{p'}/c0` at every node, extended past the
/// grid through the certified tail bound when one is present, with the
/// strict admissibility `c0 > p' t0^{p'-1}`.
pub fn validate_class(u: &RadialFunction, params: &HopfLaxParams, m: f64, c0: f64) -> ClassCertificate {
    let grid = u.grid();
    let values = u.values();
    let lipschitz_ok = values.iter().all(|v| v.is_finite());
    let nonneg_set_bounded = *values.last().unwrap() < 0.0;
    let horizon = HopfLaxParams {
        p_conj: params.p_conj,
        t: params.t0 * (1.0 - 1e-12),
        t0: params.t0,
    };
    let q_t0_finite = transform_at_point(u, &horizon, grid[0]).0.is_finite();
    let slack = |v: f64| 1e-12 * (1.0 + v.abs());
    let mut growth_ok = c0 > 0.0
        && grid
            .iter()
            .zip(values.iter())
            .all(|(&r, &v)| v >= m - r.powf(params.p_conj) / c0 - slack(v));
    if let Some(tb) = u.tail_bound() {
        let r_end = u.r_end();
        growth_ok =
            growth_ok && -tb >= m - r_end.powf(params.p_conj) / c0 - slack(tb);
    }
    let c0_strict = c0 > params.p_conj * params.t0.powf(params.p_conj - 1.0);
    ClassCertificate {
        lipschitz_ok,
        nonneg_set_bounded,
        q_t0_finite,
        growth_m: m,
        growth_c0: c0,
        growth_ok,
        c0_strict,
    }
}

/// Transform values on the input grid together with per-point argmin indices.
#[derive(Debug, Clone)]
pub struct HopfLaxResult {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub argmin_index: Vec<usize>,
}

impl HopfLaxResult {
    pub fn as_function(&self) -> RadialFunction {
        RadialFunction::new(self.grid.clone(), self.values.clone())
            .expect("transform preserves the grid")
    }

    /// The transform at t = 0 is the identity by convention.
    pub fn identity(u: &RadialFunction) -> Self {
        HopfLaxResult {
            grid: u.grid().to_vec(),
            values: u.values().to_vec(),
            argmin_index: (0..u.len()).collect(),
        }
    }
}

fn transform_at_point(u: &RadialFunction, params: &HopfLaxParams, x: f64) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut best_j = 0;
    for (j, (&y, &v)) in u.grid().iter().zip(u.values().iter()).enumerate() {
        let candidate = v + params.cost(x - y);
        if candidate < best {
            best = candidate;
            best_j = j;
        }
    }
    (best, best_j)
}

/// Exact minimum over the grid, O(n^2). This is the oracle the fast path is
/// tested against.
pub fn hopf_lax_bruteforce(u: &RadialFunction, params: &HopfLaxParams) -> HopfLaxResult {
    let grid = u.grid().to_vec();
    let mut values = Vec::with_capacity(grid.len());
    let mut argmin_index = Vec::with_capacity(grid.len());
    for &x in &grid {
        let (value, j) = transform_at_point(u, params, x);
        values.push(value);
        argmin_index.push(j);
    }
    HopfLaxResult {
        grid,
        values,
        argmin_index,
    }
}

/// Fast transform: the lower envelope of parabolas in O(n) when the cost is
/// quadratic (p' = 2), and monotone-argmin divide and conquer in O(n log n)
/// for every other convex cost.
pub fn hopf_lax_fast(u: &RadialFunction, params: &HopfLaxParams) -> HopfLaxResult {
    if params.p_conj == 2.0 {
        envelope_transform(u, params)
    } else {
        monotone_transform(u, params)
    }
}

/// Felzenszwalb-Huttenlocher lower envelope, generalized to arbitrary
/// strictly increasing abscissas.
fn envelope_transform(u: &RadialFunction, params: &HopfLaxParams) -> HopfLaxResult {
    let y = u.grid();
    let v = u.values();
    let n = y.len();
    let a = 1.0 / (2.0 * params.t);

    // hull[k] = index of the parabola covering [boundary[k], boundary[k+1])
    let mut hull = vec![0usize; n];
    let mut boundary = vec![0.0f64; n + 1];
    boundary[0] = f64::NEG_INFINITY;
    boundary[1] = f64::INFINITY;
    let mut k = 0usize;
    let intersect = |j: usize, q: usize| -> f64 {
        ((v[q] + a * y[q] * y[q]) - (v[j] + a * y[j] * y[j])) / (2.0 * a * (y[q] - y[j]))
    };
    for q in 1..n {
        loop {
            let s = intersect(hull[k], q);
            if s <= boundary[k] && k > 0 {
                k -= 1;
            } else {
                k += 1;
                hull[k] = q;
                boundary[k] = s;
                boundary[k + 1] = f64::INFINITY;
                break;
            }
        }
    }

    let mut values = Vec::with_capacity(n);
    let mut argmin_index = Vec::with_capacity(n);
    let mut cursor = 0usize;
    for &x in y {
        while boundary[cursor + 1] < x {
            cursor += 1;
        }
        let j = hull[cursor];
        values.push(v[j] + params.cost(x - y[j]));
        argmin_index.push(j);
    }
    HopfLaxResult {
        grid: y.to_vec(),
        values,
        argmin_index,
    }
}

/// Divide-and-conquer over rows, pruning columns with the monotonicity of
/// leftmost argmins for convex costs.
fn monotone_transform(u: &RadialFunction, params: &HopfLaxParams) -> HopfLaxResult {
    let n = u.len();
    let mut values = vec![0.0f64; n];
    let mut argmin_index = vec![0usize; n];
    solve_rows(u, params, 0, n, 0, n - 1, &mut values, &mut argmin_index);
    HopfLaxResult {
        grid: u.grid().to_vec(),
        values,
        argmin_index,
    }
}

fn solve_rows(
    u: &RadialFunction,
    params: &HopfLaxParams,
    row_lo: usize,
    row_hi: usize,
    col_lo: usize,
    col_hi: usize,
    values: &mut [f64],
    argmin: &mut [usize],
) {
    if row_lo >= row_hi {
        return;
    }
    let mid = (row_lo + row_hi) / 2;
    let x = u.grid()[mid];
    let mut best = f64::INFINITY;
    let mut best_j = col_lo;
    for j in col_lo..=col_hi {
        let candidate = u.values()[j] + params.cost(x - u.grid()[j]);
        if candidate < best {
            best = candidate;
            best_j = j;
        }
    }
    values[mid] = best;
    argmin[mid] = best_j;
    solve_rows(u, params, row_lo, mid, col_lo, best_j, values, argmin);
    solve_rows(u, params, mid + 1, row_hi, best_j, col_hi, values, argmin);
}

/// Hamilton-Jacobi certification: at every grid point the forward difference
/// quotient in time must not exceed `-slope(Q_t u)^p / p` beyond the
/// discretization budget. The report's deficit is the worst margin.
pub fn hj_check(
    u: &RadialFunction,
    params: &HopfLaxParams,
    dt: f64,
    tol: Option<f64>,
) -> Result<VerificationReport> {
    if !(dt > 0.0) || params.t + dt >= params.t0 {
        return Err(Error::Domain(format!(
            "need 0 < dt with t + dt < t0, got dt = {dt}"
        )));
    }
    let p = params.hamiltonian_exponent();
    let q_now = hopf_lax_fast(u, params);
    let q_next = hopf_lax_fast(u, &params.at_time(params.t + dt)?);
    let q_fn = q_now.as_function();

    let mut worst = f64::INFINITY;
    let mut worst_lhs = 0.0;
    let mut worst_rhs = 0.0;
    let mut hamiltonian_scale: f64 = 1.0;
    for i in 0..u.len() {
        let lhs = (q_next.values[i] - q_now.values[i]) / dt;
        let rhs = -slope(&q_fn, i).powf(p) / p;
        hamiltonian_scale = hamiltonian_scale.max(rhs.abs()).max(lhs.abs());
        let margin = rhs - lhs;
        if margin < worst {
            worst = margin;
            worst_lhs = lhs;
            worst_rhs = rhs;
        }
    }
    let tolerance = tol.unwrap_or(1e-4 * hamiltonian_scale);
    let mut report = VerificationReport::upper_bound(
        "hopf-lax-hj",
        worst_lhs,
        worst_rhs,
        0.0,
        vec![
            ("p".into(), format!("{p}")),
            ("p_conj".into(), format!("{}", params.p_conj)),
            ("t".into(), format!("{}", params.t)),
            ("dt".into(), format!("{dt}")),
        ],
        format!("forward quotient vs slope power on n = {}", u.len()),
    );
    report.deficit = worst;
    report.tolerance = tolerance;
    report.passed = worst >= -tolerance;
    Ok(report)
}

/// Elementary cost inequality
/// `d(x,y)^r/t^{r-1} + d(y,z)^r/s^{r-1} >= d(x,z)^r/(t+s)^{r-1}`
/// on the line, with distances as absolute differences.
pub fn metric_inequality_check(x: f64, y: f64, z: f64, t: f64, s: f64, r_exp: f64) -> bool {
    let lhs = (x - y).abs().powf(r_exp) / t.powf(r_exp - 1.0)
        + (y - z).abs().powf(r_exp) / s.powf(r_exp - 1.0);
    let rhs = (x - z).abs().powf(r_exp) / (t + s).powf(r_exp - 1.0);
    lhs - rhs >= -1e-12 * lhs.abs().max(rhs.abs()).max(1.0)
}

/// Both monotonicity statements behind the hypercontractivity proof: the map
/// `t -> int exp(alpha Q_t u) dm` is non-increasing on a time grid, and the
/// transform itself is pointwise non-increasing in t.
pub fn semigroup_monotonicity_check(
    u: &RadialFunction,
    params: &HopfLaxParams,
    alpha: f64,
    space: &crate::spaces::SpaceDescriptor,
    spec: &crate::calculus::QuadratureSpec,
) -> Result<VerificationReport> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let times: Vec<f64> = (1..=8).map(|k| params.t0 * k as f64 / 9.0).collect();
    let mut masses = Vec::with_capacity(times.len());
    let mut previous: Option<HopfLaxResult> = None;
    let mut worst_pointwise = f64::NEG_INFINITY;
    for &t in &times {
        let q = hopf_lax_fast(u, &params.at_time(t)?);
        if let Some(prev) = &previous {
            let step = q
                .values
                .iter()
                .zip(prev.values.iter())
                .map(|(now, before)| now - before)
                .fold(f64::NEG_INFINITY, f64::max);
            worst_pointwise = worst_pointwise.max(step);
        }
        let q_fn = q.as_function().map_values(|v| (alpha * v).exp())?;
        masses.push(crate::calculus::integrate_weighted(&q_fn, space, spec)?);
        previous = Some(q);
    }
    let mass_scale = masses.iter().cloned().fold(f64::MIN, f64::max).abs().max(1.0);
    let worst_mass_increase = masses
        .windows(2)
        .map(|w| (w[1] - w[0]) / mass_scale)
        .fold(f64::NEG_INFINITY, f64::max);
    let worst = worst_mass_increase.max(worst_pointwise / u.max_value().abs().max(1.0));
    let mut report = VerificationReport::upper_bound(
        "hopf-lax-semigroup-monotone",
        worst,
        0.0,
        0.0,
        vec![
            ("alpha".into(), format!("{alpha}")),
            ("p_conj".into(), format!("{}", params.p_conj)),
            ("times".into(), format!("{}", times.len())),
        ],
        "exponential masses and pointwise transform values along a time grid".into(),
    );
    report.tolerance = 1e-9;
    report.passed = report.deficit >= -report.tolerance;
    Ok(report)
}

/// Constant of the quadratic-growth envelope `|Q_t u| <= C (1 + r^{p'})`
/// implied by the certificate data.
pub fn growth_bound_constant(u: &RadialFunction, params: &HopfLaxParams, m: f64, c0: f64) -> f64 {
    let p = params.hamiltonian_exponent();
    let b = (c0.powf(p - 1.0) - params.t0 * params.p_conj.powf(p - 1.0)).powf(params.p_conj - 1.0);
    let sup_u = u.max_value().max(0.0);
    sup_u.max(m.abs()) + (1.0 / b).max(1.0 / c0)
}
