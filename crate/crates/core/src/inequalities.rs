//! End-to-end verifiers for the sharp log-Sobolev, hypercontractivity,
//! Gaussian log-Sobolev, and isoperimetric inequalities, plus the two
//! sharpness sweeps.

use crate::calculus::{
    cheeger_energy, cheeger_energy_with, entropy, entropy_with, integrate_weighted,
    integrate_weighted_with, lp_norm, GaussianExtremal, QuadratureSpec, RadialFunction, RadialMap,
};
use crate::constants::{hyper_prefactor, log_sobolev_constant, ExponentPair};
use crate::error::{Error, Result};
use crate::hopf_lax::{hopf_lax_fast, validate_class, HopfLaxParams, HopfLaxResult};
use crate::rearrange::rearrangement;
use crate::report::{SweepResult, VerificationReport};
use crate::spaces::SpaceDescriptor;

/// Knobs shared by every verifier.
///
/// `lsc_scale` multiplies the sharp log-Sobolev constant before it enters a
/// right-hand side; it exists solely as a negative-control hook and defaults
/// to 1.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub rel_tol: f64,
    pub lsc_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            rel_tol: 1e-6,
            lsc_scale: 1.0,
        }
    }
}

impl VerifyOptions {
    pub fn with_tol(rel_tol: f64) -> Self {
        VerifyOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

fn space_params(space: &SpaceDescriptor, p: f64) -> Vec<(String, String)> {
    vec![
        ("space".into(), space.kind().as_str().into()),
        ("p".into(), format!("{p}")),
        ("N".into(), format!("{}", space.n_dim())),
        ("avr".into(), format!("{}", space.avr_analytic())),
    ]
}

/// Lazy value-composition of a sampled function, keeping its segment grid so
/// quadrature panels stay aligned with the kinks.
struct MappedRadial<'a> {
    base: &'a RadialFunction,
    map: Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>,
}

impl<'a> MappedRadial<'a> {
    fn new(base: &'a RadialFunction, map: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        MappedRadial {
            base,
            map: Box::new(map),
        }
    }
}

impl RadialMap for MappedRadial<'_> {
    fn eval(&self, r: f64) -> f64 {
        (self.map)(self.base.eval(r))
    }

    fn support_end(&self) -> Option<f64> {
        self.base.support_end()
    }

    fn segment_grid(&self) -> Option<&[f64]> {
        self.base.segment_grid()
    }
}

/// One-dimensional weighted log-Sobolev verification on the model cone:
/// `Ent(v^p) <= (N/p) log(L_{p,N} Ch_p(v))` after internal renormalization.
pub fn onedim_lsi_verify(
    v: &dyn RadialMap,
    p: f64,
    n_dim: f64,
    spec: &QuadratureSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let model = SpaceDescriptor::model_cone(n_dim)?;
    let norm = lp_norm(v, p, &model, spec)?;
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Normalization(format!("L^{p} norm = {norm}")));
    }
    let raw_entropy = entropy(v, p, &model, spec)?;
    let raw_energy = cheeger_energy(v, p, &model, spec)?;
    let norm_p = norm.powf(p);
    let lhs = raw_entropy / norm_p - p * norm.ln();
    let energy = raw_energy / norm_p;
    let constant = log_sobolev_constant(p, n_dim)? * opts.lsc_scale;
    let rhs = (n_dim / p) * (constant * energy).ln();
    let mut params = space_params(&model, p);
    params.push(("cheeger".into(), format!("{energy:.6e}")));
    Ok(VerificationReport::upper_bound(
        "log-sobolev-1d",
        lhs,
        rhs,
        opts.rel_tol,
        params,
        format!(
            "model cone N={n_dim}; truncation={} order={}",
            spec.truncation_radius, spec.order
        ),
    ))
}

/// Space-level log-Sobolev verification with the `avr^{-p/N}` constant,
/// computed directly and through the rearrangement route. The returned report
/// carries the direct numbers; the routes' entropy sides must agree or the
/// check fails.
pub fn lsi_verify(
    u: &RadialFunction,
    p: f64,
    space: &SpaceDescriptor,
    spec: &QuadratureSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let n_dim = space.n_dim();
    let norm = lp_norm(u, p, space, spec)?;
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Normalization(format!("L^{p} norm = {norm}")));
    }
    let norm_p = norm.powf(p);
    let lhs = entropy(u, p, space, spec)?/ norm_p - p * norm.ln();
    let energy = cheeger_energy(u, p, space, spec)? / norm_p;
    let constant = log_sobolev_constant(p, n_dim)? * opts.lsc_scale
        * space.avr_analytic().powf(-p / n_dim);
    let rhs = (n_dim / p) * (constant * energy).ln();

    // rearrangement route: entropy and norm must be invariant
    let model = SpaceDescriptor::model_cone(n_dim)?;
    let hat = rearrangement(u, space)?;
    let hat_spec = QuadratureSpec::with_layout(
        hat.r_end(),
        spec.panels,
        spec.order,
        spec.tail_tolerance,
    )?;
    let hat_norm = lp_norm(&hat, p, &model, &hat_spec)?;
    let hat_lhs = entropy(&hat, p, &model, &hat_spec)? / hat_norm.powf(p) - p * hat_norm.ln();
    let hat_energy =
        crate::rearrange::segment_energy(&hat, p, &model)? / hat_norm.powf(p);
    let route_rhs = (n_dim / p)
        * (log_sobolev_constant(p, n_dim)? * opts.lsc_scale * hat_energy).ln();

    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    let lhs_gap = (lhs - hat_lhs).abs() / scale;
    let rhs_gap = (rhs - route_rhs).abs() / scale;

    let mut params = space_params(space, p);
    params.push(("route_lhs_gap".into(), format!("{lhs_gap:.3e}")));
    params.push(("route_rhs_gap".into(), format!("{rhs_gap:.3e}")));
    let mut report = VerificationReport::upper_bound(
        "log-sobolev",
        lhs,
        rhs,
        opts.rel_tol,
        params,
        format!(
            "direct and rearrangement routes on {} grid n={}",
            space.kind().as_str(),
            u.len()
        ),
    );
    if lhs_gap > 1e-6 {
        report.passed = false;
    }
    Ok(report)
}

/// Weight profile a sharpness sweep integrates against: constant for cones,
/// a caller-supplied non-increasing surface-density profile otherwise.
pub enum ThetaProfile<'a> {
    Cone(&'a SpaceDescriptor),
    Synthetic {
        avr: f64,
        profile: &'a (dyn Fn(f64) -> f64 + Sync),
    },
}

impl ThetaProfile<'_> {
    fn avr(&self) -> f64 {
        match self {
            ThetaProfile::Cone(space) => space.avr_analytic(),
            ThetaProfile::Synthetic { avr, .. } => *avr,
        }
    }

    fn eval(&self, r: f64) -> f64 {
        match self {
            ThetaProfile::Cone(space) => space.avr_analytic(),
            ThetaProfile::Synthetic { profile, .. } => profile(r),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            ThetaProfile::Cone(_) => "cone",
            ThetaProfile::Synthetic { .. } => "synthetic",
        }
    }
}

fn validate_decreasing(values: &[f64], name: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Domain(format!("{name} schedule is empty")));
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain(format!("{name} values must be positive")));
    }
    if values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain(format!("{name} values must be strictly decreasing")));
    }
    Ok(())
}

/// Scaling sweep for the sharp constant: inserts the Gaussian test function
/// into the surface-density-weighted inequality at each scale and reports the
/// minimal admissible constant, which converges to `L_{p,N} avr^{-p/N}`.
pub fn lsi_sharpness_sweep(
    p: f64,
    n_dim: f64,
    theta: &ThetaProfile<'_>,
    lambdas: &[f64],
    opts: &VerifyOptions,
) -> Result<SweepResult> {
    validate_decreasing(lambdas, "lambda")?;
    let pair = ExponentPair::new(p)?;
    let conj = pair.conj();
    let model = SpaceDescriptor::model_cone(n_dim)?;
    let spec = QuadratureSpec::for_decay(1.0, conj, n_dim)?;
    let mut implied = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let vp = move |r: f64| (-r.powf(conj)).exp();
        let mass = integrate_weighted_with(&vp, &|r| theta.eval(r / lambda), &model, &spec)?;
        let moment = integrate_weighted_with(
            &move |r: f64| r.powf(conj) * vp(r),
            &|r| theta.eval(r / lambda),
            &model,
            &spec,
        )?;
        // entropy of v^p is -moment; Cheeger energy is (p'/p)^p * moment
        let lhs = -moment / mass - mass.ln();
        let energy_ratio = (conj / p).powf(p) * moment / mass;
        implied.push((lhs * p / n_dim).exp() / energy_ratio);
    }
    let target = log_sobolev_constant(p, n_dim)? * opts.lsc_scale
        * theta.avr().powf(-p / n_dim);
    let _ = theta.label();
    Ok(SweepResult::new(lambdas.to_vec(), implied, target))
}

/// Full hypercontractivity pipeline: transforms `u`, integrates both sides,
/// and compares against the sharp prefactor.
#[allow(clippy::too_many_arguments)]
pub fn hypercontractivity_verify(
    u: &RadialFunction,
    p: f64,
    alpha: f64,
    beta: f64,
    t: f64,
    t0: f64,
    growth_m: f64,
    growth_c0: f64,
    space: &SpaceDescriptor,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let pair = ExponentPair::new(p)?;
    let params = HopfLaxParams::new(pair.conj(), t, t0)?;
    let certificate = validate_class(u, &params, growth_m, growth_c0);
    if !certificate.is_valid() {
        return Err(certificate.violation_error());
    }
    let spec = QuadratureSpec::with_layout(u.r_end(), 32, 32, 1e-10)?;
    // admissibility: (1 + r^{p'}) e^{alpha u} must be integrable up to the tail budget
    let conj = pair.conj();
    let weighted_mass = MappedRadial::new(u, move |v| (alpha * v).exp());
    integrate_weighted_with(&weighted_mass, &|r| 1.0 + r.powf(conj), space, &spec)?;

    let transform = hopf_lax_fast(u, &params);
    let q_fn = transform.as_function();
    let lhs_integral = integrate_weighted(
        &MappedRadial::new(&q_fn, move |v| (beta * v).exp()),
        space,
        &spec,
    )?;
    let rhs_integral = integrate_weighted(
        &MappedRadial::new(u, move |v| (alpha * v).exp()),
        space,
        &spec,
    )?;
    let n_dim = space.n_dim();
    let exponent = (n_dim / p) * (beta - alpha) / (alpha * beta);
    let prefactor = hyper_prefactor(alpha, beta, p, n_dim, space.avr_analytic(), t)?
        * opts.lsc_scale.powf(exponent);
    let lhs = lhs_integral.powf(1.0 / beta);
    let rhs = rhs_integral.powf(1.0 / alpha) * prefactor;
    let mut params_kv = space_params(space, p);
    params_kv.push(("alpha".into(), format!("{alpha}")));
    params_kv.push(("beta".into(), format!("{beta}")));
    params_kv.push(("t".into(), format!("{t}")));
    params_kv.push(("t0".into(), format!("{t0}")));
    Ok(VerificationReport::upper_bound(
        "hypercontractivity",
        lhs,
        rhs,
        opts.rel_tol,
        params_kv,
        format!(
            "Hopf-Lax pipeline on {} grid n={}",
            space.kind().as_str(),
            u.len()
        ),
    ))
}

/// Exponent-ratio factor of the hypercontractivity sharpness argument; its
/// `(1/t)`-scaled limit is `N y ((p-2) log alpha - p) / (alpha^2 p)`.
pub(crate) fn probe_exponent_factor(alpha: f64, beta: f64, p: f64, conj: f64, n_dim: f64) -> f64 {
    (n_dim / (alpha * beta))
        * ((alpha / p + beta / conj) * alpha.ln() - (beta / p + alpha / conj) * beta.ln())
}

/// Forward sharpness probe: runs the contradiction argument with
/// `beta(t) = alpha + y t` on a Gaussian-type function and reports the implied
/// constant at each time, converging to the sharp one as t goes to 0.
pub fn hyper_sharpness_probe(
    p: f64,
    n_dim: f64,
    space: &SpaceDescriptor,
    alpha: f64,
    y: f64,
    t_values: &[f64],
    opts: &VerifyOptions,
) -> Result<SweepResult> {
    validate_decreasing(t_values, "t")?;
    if !(alpha > 0.0 && y > 0.0) {
        return Err(Error::Domain("alpha and y must be positive".into()));
    }
    let pair = ExponentPair::new(p)?;
    let conj = pair.conj();
    let t0 = 2.0 * t_values[0];
    // u = -kappa r^{p'} sits strictly inside the admissible class for this t0
    let kappa = probe_shape_rate(conj, t_values[0]);
    let r_end = ((40.0 + 2.0 * n_dim) / (alpha * kappa)).powf(1.0 / conj);
    let grid = crate::calculus::linear_grid(0.0, r_end, 8193);
    let u = RadialFunction::new(grid.clone(), grid.iter().map(|r| -kappa * r.powf(conj)).collect())?;
    let spec = QuadratureSpec::with_layout(r_end, 32, 32, 1e-10)?;

    let base_integral =
        integrate_weighted(&MappedRadial::new(&u, move |v| (alpha * v).exp()), space, &spec)?;
    let ln_base_norm = base_integral.ln() / alpha;

    let mut implied = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let beta = alpha + y * t;
        let params = HopfLaxParams::new(conj, t, t0)?;
        let q_fn = hopf_lax_fast(&u, &params).as_function();
        let lhs_integral = integrate_weighted(
            &MappedRadial::new(&q_fn, move |v| (beta * v).exp()),
            space,
            &spec,
        )?;
        let lhs_rate = (lhs_integral.ln() / beta - ln_base_norm) / t;
        let correction = probe_exponent_factor(alpha, beta, p, conj, n_dim) / t;
        let ln_inner = (p * alpha * beta / (n_dim * y)) * (lhs_rate - correction);
        implied.push(
            (p * p.ln() - (y * n_dim).ln() - (p - 1.0) + ln_inner).exp(),
        );
    }
    let target = log_sobolev_constant(p, n_dim)? * opts.lsc_scale
        * space.avr_analytic().powf(-p / n_dim);
    Ok(SweepResult::new(t_values.to_vec(), implied, target))
}

/// The rate `y` that makes the probe limit tight:
/// `(alpha^2/N)(p/alpha)^p Ch_p(w)` with `w` the normalized exponential
/// profile the probe itself uses for the given leading time `t_max`.
pub fn hyper_probe_optimal_rate(
    p: f64,
    n_dim: f64,
    space: &SpaceDescriptor,
    alpha: f64,
    t_max: f64,
) -> Result<f64> {
    let pair = ExponentPair::new(p)?;
    let lambda = alpha * probe_shape_rate(pair.conj(), t_max);
    // rescale the model-normalized extremal to unit L^p mass on this space
    let w = GaussianExtremal::new(lambda, p, n_dim)?;
    let spec = w.default_spec();
    let norm = lp_norm(&w, p, space, &spec)?;
    let energy = cheeger_energy(&w, p, space, &spec)? / norm.powf(p);
    Ok(alpha * alpha / n_dim * (p / alpha).powf(p) * energy)
}

/// Decay coefficient of the probe's test function `u = -kappa r^{p'}`, sized
/// so the class horizon `t0 = 2 t_max` admits it with a factor-2 margin.
fn probe_shape_rate(conj: f64, t_max: f64) -> f64 {
    let t0 = 2.0 * t_max;
    0.5 / (conj * t0.powf(conj - 1.0))
}

/// Normalization mass `G` of the Gaussian measure on the space.
pub fn gaussian_normalization(space: &SpaceDescriptor) -> Result<f64> {
    let spec = QuadratureSpec::for_decay(0.5, 2.0, space.n_dim())?;
    integrate_weighted(&|r: f64| (-0.5 * r * r).exp(), space, &spec)
}

/// Decay mass `f(lambda) = int exp(-lambda d^2) dm`.
pub fn gaussian_decay_mass(space: &SpaceDescriptor, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let spec = QuadratureSpec::for_decay(lambda, 2.0, space.n_dim())?;
    integrate_weighted(&move |r: f64| (-lambda * r * r).exp(), space, &spec)
}

/// Second moment `int exp(-lambda d^2) d^2 dm`.
pub fn gaussian_decay_second_moment(space: &SpaceDescriptor, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let spec = QuadratureSpec::for_decay(lambda, 2.0, space.n_dim())?;
    integrate_weighted(&move |r: f64| r * r * (-lambda * r * r).exp(), space, &spec)
}

/// Gaussian log-Sobolev verification against the apex-based Gaussian measure:
/// `int u^2 log u^2 dm_G <= 2 int |grad u|^2 dm_G + log(theta/avr)`.
pub fn gaussian_lsi_verify(
    u: &dyn RadialMap,
    space: &SpaceDescriptor,
    spec: &QuadratureSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let g_mass = gaussian_normalization(space)?;
    let density = move |r: f64| (-0.5 * r * r).exp() / g_mass;
    let mass = integrate_weighted_with(
        &|r: f64| u.eval(r) * u.eval(r),
        &density,
        space,
        spec,
    )?;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::Normalization(format!("Gaussian L^2 mass = {mass}")));
    }
    let raw_entropy = entropy_with(u, 2.0, &density, space, spec)?;
    let lhs = (raw_entropy - mass * mass.ln()) / mass;
    let energy = cheeger_energy_with(u, 2.0, &density, space, spec)? / mass;
    let pair = space.density_theta();
    let rhs = 2.0 * energy + (pair.theta_at_base / pair.avr).ln();
    let mut params = space_params(space, 2.0);
    params.push(("G".into(), format!("{g_mass:.12e}")));
    Ok(VerificationReport::upper_bound(
        "gaussian-log-sobolev",
        lhs,
        rhs,
        opts.rel_tol,
        params,
        format!("apex-based Gaussian measure on {}", space.kind().as_str()),
    ))
}

/// Sharpness sweep for the Gaussian constant: inserts the dilation family
/// into the trial inequality and reports `lambda * (rhs - lhs)` per scale;
/// the limit is `(N/4)(C/2 - 1)`, nonnegative exactly when the trial
/// constant is at least 2.
pub fn gaussian_sharpness_sweep(
    space: &SpaceDescriptor,
    lambdas: &[f64],
    trial_constant: f64,
) -> Result<SweepResult> {
    validate_decreasing(lambdas, "lambda")?;
    if !(trial_constant > 0.0 && trial_constant <= 4.0) {
        return Err(Error::Domain(format!(
            "trial constant must lie in (0, 4], got {trial_constant}"
        )));
    }
    let g_mass = gaussian_normalization(space)?;
    let pair = space.density_theta();
    let additive = (pair.theta_at_base / (g_mass * pair.avr)).ln();
    let c = trial_constant;
    let mut entries = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let mass = gaussian_decay_mass(space, lambda)?;
        let moment = gaussian_decay_second_moment(space, lambda)?;
        let lhs = -mass.ln();
        let rhs = (0.5 - lambda) * (0.5 * c - 1.0 - c * lambda) * moment / mass + additive;
        entries.push(lambda * (rhs - lhs));
    }
    let target = 0.25 * space.n_dim() * (0.5 * c - 1.0);
    Ok(SweepResult::new(lambdas.to_vec(), entries, target))
}

/// Gaussian hypercontractivity: `|e^{Q_t u}|_{alpha+t, m_G} <= e^H |e^u|_{alpha, m_G}`
/// with the quadratic-cost transform and `H` from the density ratio.
pub fn gaussian_hyper_verify(
    u: &RadialFunction,
    space: &SpaceDescriptor,
    alpha: f64,
    t: f64,
    t0: f64,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be nonnegative, got {t}")));
    }
    let g_mass = gaussian_normalization(space)?;
    let density = move |r: f64| (-0.5 * r * r).exp() / g_mass;
    let spec = QuadratureSpec::with_layout(u.r_end(), 32, 32, 1e-10)?;
    let transform = if t == 0.0 {
        HopfLaxResult::identity(u)
    } else {
        hopf_lax_fast(u, &HopfLaxParams::new(2.0, t, t0)?)
    };
    let q_fn = transform.as_function();
    let beta = alpha + t;
    let lhs_integral = integrate_weighted_with(
        &MappedRadial::new(&q_fn, move |v| (beta * v).exp()),
        &density,
        space,
        &spec,
    )?;
    let rhs_integral = integrate_weighted_with(
        &MappedRadial::new(u, move |v| (alpha * v).exp()),
        &density,
        space,
        &spec,
    )?;
    let pair = space.density_theta();
    let h = crate::constants::gaussian_hyper_exponent(alpha, t, pair.theta_at_base, pair.avr)?;
    let lhs = lhs_integral.powf(1.0 / beta);
    let rhs = h.exp() * rhs_integral.powf(1.0 / alpha);
    let mut params = space_params(space, 2.0);
    params.push(("alpha".into(), format!("{alpha}")));
    params.push(("t".into(), format!("{t}")));
    Ok(VerificationReport::upper_bound(
        "gaussian-hypercontractivity",
        lhs,
        rhs,
        opts.rel_tol,
        params,
        format!(
            "quadratic-cost transform under the Gaussian measure on {}",
            space.kind().as_str()
        ),
    ))
}

/// Sharp isoperimetric comparison for balls around the apex:
/// `m^+(B_r) >= N sigma_N^{1/N} avr^{1/N} m(B_r)^{(N-1)/N}`, an equality on
/// cones. The report's deficit is the worst relative slack over the radii.
pub fn isoperimetry_verify(
    space: &SpaceDescriptor,
    radii: &[f64],
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Domain("radii must be positive".into()));
    }
    let n = space.n_dim();
    let mut worst = f64::INFINITY;
    let mut worst_pair = (0.0, 0.0);
    let mut worst_radius = radii[0];
    for &r in radii {
        let lhs = space.minkowski_surface(r)?;
        let rhs = n
            * space.sigma().powf(1.0 / n)
            * space.avr_analytic().powf(1.0 / n)
            * space.ball_volume(r)?.powf((n - 1.0) / n);
        let slack = (lhs - rhs) / lhs.abs().max(rhs.abs()).max(1.0);
        if slack < worst {
            worst = slack;
            worst_pair = (lhs, rhs);
            worst_radius = r;
        }
    }
    let mut params = space_params(space, 1.0);
    params.push(("worst_radius".into(), format!("{worst_radius}")));
    let mut report = VerificationReport::lower_bound(
        "isoperimetry",
        worst_pair.0,
        worst_pair.1,
        opts.rel_tol,
        params,
        format!("balls around the apex, {} radii", radii.len()),
    );
    report.deficit = worst;
    report.tolerance = opts.rel_tol;
    report.passed = worst >= -opts.rel_tol;
    Ok(report)
}
