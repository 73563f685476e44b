//! Analytic model metric measure spaces.
//!
//! Every descriptor reduces to a weighted half-line: all radial computations
//! run against the weight `avr * N * sigma_N * r^{N-1}`, which realizes the
//! Euclidean space, the model cone, and angle-deficit cones in one formula.
//! The kinds differ only in interpretation and in the density conventions at
//! the apex.

use crate::constants::ball_coefficient;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    EuclideanRadial,
    ModelCone,
    AngleDeficitCone,
}

impl SpaceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpaceKind::EuclideanRadial => "euclidean-radial",
            SpaceKind::ModelCone => "model-cone",
            SpaceKind::AngleDeficitCone => "angle-deficit",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "euclidean-radial" | "euclidean" => Ok(SpaceKind::EuclideanRadial),
            "model-cone" | "cone" => Ok(SpaceKind::ModelCone),
            "angle-deficit" | "angle-deficit-cone" => Ok(SpaceKind::AngleDeficitCone),
            other => Err(Error::InvalidInput(format!("unknown space kind {other:?}"))),
        }
    }
}

/// Density data at the base point together with the volume ratio at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPair {
    pub theta_at_base: f64,
    pub avr: f64,
}

/// A model space with ball volume `avr * sigma_N * r^N`, based at the apex.
#[derive(Debug, Clone, Copy)]
pub struct SpaceDescriptor {
    kind: SpaceKind,
    n_dim: f64,
    avr_param: f64,
    sigma: f64,
}

impl SpaceDescriptor {
    pub fn new(kind: SpaceKind, n_dim: f64, avr_param: f64) -> Result<Self> {
        let sigma = ball_coefficient(n_dim)?;
        match kind {
            SpaceKind::EuclideanRadial | SpaceKind::ModelCone => {
                if avr_param != 1.0 {
                    return Err(Error::Domain(format!(
                        "{} forces avr = 1, got {avr_param}",
                        kind.as_str()
                    )));
                }
            }
            SpaceKind::AngleDeficitCone => {
                if !(avr_param > 0.0 && avr_param <= 1.0) {
                    return Err(Error::Domain(format!(
                        "angle-deficit parameter must lie in (0,1], got {avr_param}"
                    )));
                }
            }
        }
        Ok(SpaceDescriptor {
            kind,
            n_dim,
            avr_param,
            sigma,
        })
    }

    pub fn euclidean(n_dim: f64) -> Result<Self> {
        Self::new(SpaceKind::EuclideanRadial, n_dim, 1.0)
    }

    pub fn model_cone(n_dim: f64) -> Result<Self> {
        Self::new(SpaceKind::ModelCone, n_dim, 1.0)
    }

    pub fn angle_deficit(n_dim: f64, alpha: f64) -> Result<Self> {
        Self::new(SpaceKind::AngleDeficitCone, n_dim, alpha)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn n_dim(&self) -> f64 {
        self.n_dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Measure of the ball of radius r around the apex.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
        }
        Ok(self.avr_param * self.sigma * r.powf(self.n_dim))
    }

    /// Minkowski content of the ball boundary, the r-derivative of the volume.
    pub fn minkowski_surface(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        Ok(self.avr_param * self.n_dim * self.sigma * r.powf(self.n_dim - 1.0))
    }

    /// Radial weight density, the same expression as the surface content but
    /// defined down to r = 0 for quadrature use.
    pub fn weight(&self, r: f64) -> f64 {
        self.avr_param * self.n_dim * self.sigma * r.powf(self.n_dim - 1.0)
    }

    /// Asymptotic volume ratio, exact for these descriptors.
    pub fn avr_analytic(&self) -> f64 {
        self.avr_param
    }

    /// Surface-density ratio `m^+(B_r) / (N sigma_N r^{N-1})` at finite radius,
    /// the estimator whose r -> infinity limit recovers the volume ratio.
    pub fn avr_limit_estimate(&self, r_max: f64) -> Result<f64> {
        if !(r_max > 0.0) {
            return Err(Error::Domain(format!(
                "estimation radius must be positive, got {r_max}"
            )));
        }
        Ok(self.minkowski_surface(r_max)? / (self.n_dim * self.sigma * r_max.powf(self.n_dim - 1.0)))
    }

    /// Density at the apex paired with the volume ratio at infinity.
    pub fn density_theta(&self) -> DensityPair {
        DensityPair {
            theta_at_base: self.avr_param,
            avr: self.avr_param,
        }
    }

    /// Radon-Nikodym density of the radial push-forward measure against the
    /// model-cone weight, constant in r for these descriptors.
    pub fn pushforward_density(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        Ok(self.avr_param)
    }

    /// Flat key-value serialization consumed by the CLI configuration.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        vec![
            ("kind".to_string(), self.kind.as_str().to_string()),
            ("N".to_string(), format!("{}", self.n_dim)),
            ("avr".to_string(), format!("{}", self.avr_param)),
        ]
    }

    pub fn from_key_values<'a>(
        mut lookup: impl FnMut(&str) -> Option<&'a str>,
    ) -> Result<Self> {
        let kind = SpaceKind::parse(
            lookup("kind").ok_or_else(|| Error::InvalidInput("missing space kind".into()))?,
        )?;
        let n_dim: f64 = lookup("N")
            .ok_or_else(|| Error::InvalidInput("missing N".into()))?
            .parse()
            .map_err(|e| Error::InvalidInput(format!("bad N: {e}")))?;
        let avr: f64 = match lookup("avr") {
            Some(s) => s
                .parse()
                .map_err(|e| Error::InvalidInput(format!("bad avr: {e}")))?,
            None => 1.0,
        };
        Self::new(kind, n_dim, avr)
    }
}
