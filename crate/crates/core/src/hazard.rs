//! Ground-motion intensity fields.
//!
//! The median follows a five-coefficient attenuation form
//!
//! ```text
//! ln(PGA) = c0 + c1 (Mw - 6) + c2 ln(R + c3) + c4 ln(vs30 / 760)
//! ```
//!
//! with `R` the planar epicentral distance in km. A realization adds an
//! intra-event residual `eps1(s) * sigma` per site and one inter-event
//! residual `eps2 * tau` shared by every site. Intra-event residuals can be
//! spatially correlated with an exponential kernel `exp(-d / range)`.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rng::{self, Purpose};

const REFERENCE_VS30: f64 = 760.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub magnitude: f64,
    pub epicenter: Point,
    /// Passed through untouched; the attenuation form does not read it.
    #[serde(default)]
    pub fault_params: Vec<f64>,
}

impl EventSpec {
    pub fn validate(&self) -> Result<()> {
        if !(4.0..=9.0).contains(&self.magnitude) {
            return Err(Error::Config(format!(
                "magnitude {} outside [4, 9]",
                self.magnitude
            )));
        }
        if !self.epicenter.is_finite() {
            return Err(Error::Config("epicenter must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub location: Point,
    pub vs30: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationParams {
    pub coefficients: [f64; 5],
    pub sigma_intra: f64,
    pub tau_inter: f64,
    /// Exponential correlation length of intra-event residuals; 0 disables it.
    #[serde(default)]
    pub correlation_range_km: f64,
    /// Diagonal jitter retried when the correlation matrix is not positive
    /// definite. Zero turns the retry off.
    #[serde(default)]
    pub nugget: f64,
}

impl AttenuationParams {
    pub fn validate(&self) -> Result<()> {
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("attenuation coefficients must be finite".into()));
        }
        if self.coefficients[3] <= 0.0 {
            return Err(Error::Config("distance offset c3 must be positive".into()));
        }
        if !(self.sigma_intra >= 0.0) || !(self.tau_inter >= 0.0) {
            return Err(Error::Config("sigma and tau must be non-negative".into()));
        }
        if !(self.correlation_range_km >= 0.0) || !(self.nugget >= 0.0) {
            return Err(Error::Config(
                "correlation range and nugget must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// One realization of PGA (g) per site.
#[derive(Debug, Clone, PartialEq)]
pub struct ImField {
    pub values: Vec<f64>,
}

pub fn median_ln_im(event: &EventSpec, site: &Site, params: &AttenuationParams) -> f64 {
    let [c0, c1, c2, c3, c4] = params.coefficients;
    let r = event.epicenter.distance(&site.location);
    c0 + c1 * (event.magnitude - 6.0) + c2 * (r + c3).ln() + c4 * (site.vs30 / REFERENCE_VS30).ln()
}

/// Precomputed medians and residual correlation factor for repeated sampling
/// over a fixed site set.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    medians: Vec<f64>,
    sigma: f64,
    tau: f64,
    /// Lower-triangular factor of the intra-event correlation matrix.
    factor: Option<DMatrix<f64>>,
}

impl FieldSampler {
    pub fn new(event: &EventSpec, sites: &[Site], params: &AttenuationParams) -> Result<Self> {
        event.validate()?;
        params.validate()?;
        if sites.is_empty() {
            return Err(Error::Config("at least one site is required".into()));
        }
        for site in sites {
            if !(site.vs30 > 0.0) || !site.location.is_finite() {
                return Err(Error::Config(format!("invalid site {site:?}")));
            }
        }
        let medians = sites.iter().map(|s| median_ln_im(event, s, params)).collect();
        let factor = if params.correlation_range_km > 0.0 && sites.len() > 1 {
            Some(correlation_factor(sites, params)?)
        } else {
            None
        };
        Ok(Self {
            medians,
            sigma: params.sigma_intra,
            tau: params.tau_inter,
            factor,
        })
    }

    pub fn medians(&self) -> &[f64] {
        &self.medians
    }

    /// Standard-normal intra-event residuals for one realization, correlated
    /// when a correlation range is set, plus the shared inter-event residual.
    pub fn residuals<R: Rng>(&self, rng: &mut R) -> (Vec<f64>, f64) {
        let inter: f64 = rng.sample(StandardNormal);
        let white: Vec<f64> = (0..self.medians.len())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let intra = match &self.factor {
            Some(l) => (l * DVector::from_vec(white)).data.into(),
            None => white,
        };
        (intra, inter)
    }

    pub fn sample(&self, seed: u64) -> ImField {
        let mut rng = rng::stream(seed, Purpose::Hazard, 0);
        let (intra, inter) = self.residuals(&mut rng);
        let values = self
            .medians
            .iter()
            .zip(&intra)
            .map(|(m, e1)| (m + e1 * self.sigma + inter * self.tau).exp())
            .collect();
        ImField { values }
    }
}

fn correlation_factor(sites: &[Site], params: &AttenuationParams) -> Result<DMatrix<f64>> {
    let n = sites.len();
    let range = params.correlation_range_km;
    let corr = DMatrix::from_fn(n, n, |i, j| {
        (-sites[i].location.distance(&sites[j].location) / range).exp()
    });
    if let Some(chol) = Cholesky::new(corr.clone()) {
        return Ok(chol.l());
    }
    if params.nugget > 0.0 {
        let jittered = corr + DMatrix::identity(n, n) * params.nugget;
        if let Some(chol) = Cholesky::new(jittered) {
            return Ok(chol.l());
        }
    }
    Err(Error::Config(
        "intra-event correlation matrix is not positive definite (coincident sites?)".into(),
    ))
}

pub fn sample_im_field(
    event: &EventSpec,
    sites: &[Site],
    params: &AttenuationParams,
    seed: u64,
) -> Result<ImField> {
    Ok(FieldSampler::new(event, sites, params)?.sample(seed))
}

/// Index of the site closest to `p`; ties go to the lower index.
pub fn nearest_site(sites: &[Site], p: &Point) -> Option<usize> {
    sites
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.location.distance(p).total_cmp(&b.location.distance(p)))
        .map(|(i, _)| i)
}
