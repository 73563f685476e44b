//! Closed-form special functions and the sharp constants used by every verifier.
//!
//! All composite constants are assembled in log-space and exponentiated once,
//! so that exponents like `(N/p)(beta-alpha)/(alpha*beta)` cannot push
//! intermediate products outside the double range.

use crate::error::{Error, Result};

/// Lanczos coefficients, g = 7, 9 terms (GSL values).
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

const SQRT_TWO_PI: f64 = 2.5066282746310002;
const LN_SQRT_TWO_PI: f64 = 0.9189385332046727;

fn lanczos_series(xm1: f64) -> f64 {
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (xm1 + i as f64);
    }
    acc
}

/// Euler Gamma function for positive arguments.
///
/// Relative error is below 1e-13 on `[0.5, 50]`, the range the verifiers use.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        // reflection keeps the Lanczos argument in its accurate range
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI / (s * gamma(1.0 - x)?));
    }
    let xm1 = x - 1.0;
    let w = xm1 + LANCZOS_G + 0.5;
    Ok(SQRT_TWO_PI * w.powf(xm1 + 0.5) * (-w).exp() * lanczos_series(xm1))
}

/// Natural log of the Gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x)?);
    }
    let xm1 = x - 1.0;
    let w = xm1 + LANCZOS_G + 0.5;
    Ok(LN_SQRT_TWO_PI + (xm1 + 0.5) * w.ln() - w + lanczos_series(xm1).ln())
}

/// Unit-ball volume coefficient `pi^{N/2} / Gamma(N/2 + 1)` for real dimension N > 1.
pub fn ball_coefficient(n_dim: f64) -> Result<f64> {
    if !(n_dim > 1.0) {
        return Err(Error::Domain(format!(
            "ball coefficient requires N > 1, got {n_dim}"
        )));
    }
    Ok(ln_ball_coefficient(n_dim)?.exp())
}

pub(crate) fn ln_ball_coefficient(n_dim: f64) -> Result<f64> {
    if !(n_dim > 1.0) {
        return Err(Error::Domain(format!(
            "ball coefficient requires N > 1, got {n_dim}"
        )));
    }
    Ok(0.5 * n_dim * std::f64::consts::PI.ln() - ln_gamma(0.5 * n_dim + 1.0)?)
}

/// A Hoelder exponent together with its conjugate `p/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair {
    p: f64,
    conj: f64,
}

impl ExponentPair {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!("exponent requires p > 1, got {p}")));
        }
        let pair = ExponentPair {
            p,
            conj: p / (p - 1.0),
        };
        pair.check()?;
        Ok(pair)
    }

    /// Builds from both members, validating conjugacy to 1e-14.
    pub fn from_parts(p: f64, conj: f64) -> Result<Self> {
        if !(p > 1.0 && conj > 1.0) {
            return Err(Error::Domain(format!(
                "exponents must both exceed 1, got ({p}, {conj})"
            )));
        }
        let pair = ExponentPair { p, conj };
        pair.check()?;
        Ok(pair)
    }

    fn check(&self) -> Result<()> {
        let defect = (1.0 / self.p + 1.0 / self.conj - 1.0).abs();
        if defect > 1e-14 {
            return Err(Error::Domain(format!(
                "conjugacy defect {defect:e} exceeds 1e-14 for p = {}",
                self.p
            )));
        }
        Ok(())
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn conj(&self) -> f64 {
        self.conj
    }
}

/// Sharp L^p-log-Sobolev constant on the N-dimensional weighted cone,
/// `(p/N) ((p-1)/e)^{p-1} (sigma_N Gamma(N/p'+1))^{-p/N}`.
pub fn log_sobolev_constant(p: f64, n_dim: f64) -> Result<f64> {
    let pair = ExponentPair::new(p)?;
    Ok(ln_log_sobolev_constant(&pair, n_dim)?.exp())
}

fn ln_log_sobolev_constant(pair: &ExponentPair, n_dim: f64) -> Result<f64> {
    if !(n_dim > 1.0) {
        return Err(Error::Domain(format!(
            "log-Sobolev constant requires N > 1, got {n_dim}"
        )));
    }
    let p = pair.p();
    let ln_tail = ln_ball_coefficient(n_dim)? + ln_gamma(n_dim / pair.conj() + 1.0)?;
    Ok(p.ln() - n_dim.ln() + (p - 1.0) * ((p - 1.0).ln() - 1.0) - (p / n_dim) * ln_tail)
}

/// The full set of constants attached to one `(p, N, avr)` configuration.
///
/// Construction recomputes the log-Sobolev constant from its parts through a
/// second algebraic route and rejects the set if the two disagree beyond
/// 1e-12 relative.
#[derive(Debug, Clone, Copy)]
pub struct SharpConstantSet {
    pub n_dim: f64,
    pub exponents: ExponentPair,
    pub sigma: f64,
    pub lsc: f64,
    pub avr: f64,
}

impl SharpConstantSet {
    pub fn new(p: f64, n_dim: f64, avr: f64) -> Result<Self> {
        if !(avr > 0.0 && avr <= 1.0) {
            return Err(Error::Domain(format!("avr must lie in (0,1], got {avr}")));
        }
        let exponents = ExponentPair::new(p)?;
        let sigma = ball_coefficient(n_dim)?;
        let lsc = ln_log_sobolev_constant(&exponents, n_dim)?.exp();
        // direct product route, same formula assembled without logs
        let direct = (p / n_dim)
            * ((p - 1.0) / std::f64::consts::E).powf(p - 1.0)
            * (sigma * gamma(n_dim / exponents.conj() + 1.0)?).powf(-p / n_dim);
        if (lsc - direct).abs() > 1e-12 * direct.abs() {
            return Err(Error::Domain(format!(
                "log-Sobolev constant routes disagree: {lsc:e} vs {direct:e}"
            )));
        }
        Ok(SharpConstantSet {
            n_dim,
            exponents,
            sigma,
            lsc,
            avr,
        })
    }

    /// Sharp constant of the space-level inequality, `L_{p,N} avr^{-p/N}`.
    pub fn space_constant(&self) -> f64 {
        self.lsc * self.avr.powf(-self.exponents.p() / self.n_dim)
    }
}

/// Full multiplicative factor on the right-hand side of the Hopf-Lax
/// hypercontractivity estimate:
/// `((beta-alpha)/t)^E * alpha^{...}/beta^{...} * (L_{p,N} avr^{-p/N} N e^{p-1}/p^p)^E`
/// with `E = (N/p)(beta-alpha)/(alpha beta)`.
pub fn hyper_prefactor(
    alpha: f64,
    beta: f64,
    p: f64,
    n_dim: f64,
    avr: f64,
    t: f64,
) -> Result<f64> {
    let pair = ExponentPair::new(p)?;
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if beta < alpha {
        return Err(Error::Domain(format!(
            "beta must not be smaller than alpha, got ({alpha}, {beta})"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    if !(avr > 0.0 && avr <= 1.0) {
        return Err(Error::Domain(format!("avr must lie in (0,1], got {avr}")));
    }
    if beta == alpha {
        return Ok(1.0);
    }
    let conj = pair.conj();
    let exponent = (n_dim / p) * (beta - alpha) / (alpha * beta);
    let ln_sharp = ln_log_sobolev_constant(&pair, n_dim)?
        - (p / n_dim) * avr.ln()
        + n_dim.ln()
        + (p - 1.0)
        - p * p.ln();
    let mut ln_total = exponent * ((beta - alpha) / t).ln();
    ln_total += (n_dim / (alpha * beta)) * (alpha / p + beta / conj) * alpha.ln();
    ln_total -= (n_dim / (alpha * beta)) * (beta / p + alpha / conj) * beta.ln();
    ln_total += exponent * ln_sharp;
    Ok(ln_total.exp())
}

/// The algebraically identical parenthesization of [`hyper_prefactor`] built
/// from the explicit best constant
/// `C = alpha^{...}/beta^{...} (avr sigma_N (p')^{N/p'} Gamma(N/p'+1))^{(alpha-beta)/(alpha beta)}`.
pub fn hyper_prefactor_product_form(
    alpha: f64,
    beta: f64,
    p: f64,
    n_dim: f64,
    avr: f64,
    t: f64,
) -> Result<f64> {
    let pair = ExponentPair::new(p)?;
    if !(alpha > 0.0) || beta < alpha || !(t > 0.0) || !(avr > 0.0 && avr <= 1.0) {
        return Err(Error::Domain(
            "invalid hypercontractivity parameters".to_string(),
        ));
    }
    if beta == alpha {
        return Ok(1.0);
    }
    let conj = pair.conj();
    let exponent = (n_dim / p) * (beta - alpha) / (alpha * beta);
    let ln_inner = avr.ln()
        + ln_ball_coefficient(n_dim)?
        + (n_dim / conj) * conj.ln()
        + ln_gamma(n_dim / conj + 1.0)?;
    let mut ln_total = exponent * ((beta - alpha) / t).ln();
    ln_total += (n_dim / (alpha * beta)) * (alpha / p + beta / conj) * alpha.ln();
    ln_total -= (n_dim / (alpha * beta)) * (beta / p + alpha / conj) * beta.ln();
    ln_total += (alpha - beta) / (alpha * beta) * ln_inner;
    Ok(ln_total.exp())
}

/// Additive exponent `H = t/(alpha(alpha+t)) log(theta/avr)` of the Gaussian
/// hypercontractivity bound.
pub fn gaussian_hyper_exponent(alpha: f64, t: f64, theta: f64, avr: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be nonnegative, got {t}")));
    }
    if !(avr > 0.0 && avr <= 1.0) {
        return Err(Error::Domain(format!("avr must lie in (0,1], got {avr}")));
    }
    if theta < avr {
        return Err(Error::Domain(format!(
            "density {theta} below avr {avr} violates Bishop-Gromov"
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(t / (alpha * (alpha + t)) * (theta / avr).ln())
}
