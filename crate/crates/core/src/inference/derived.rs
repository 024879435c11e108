use super::draws::PosteriorDraws;
use super::params::ModelConstants;
use crate::epi::reproduction_numbers;
use crate::error::{Error, Result};

/// Per-draw reproduction numbers and the posterior probability that
/// holidays increase transmission.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedQuantities {
    pub r0: Vec<f64>,
    pub rn: Vec<f64>,
    pub prob_kappa_above_one: f64,
}

pub fn derived_quantities(draws: &PosteriorDraws, constants: &ModelConstants) -> Result<DerivedQuantities> {
    let thetas = draws.param_vectors()?;
    if thetas.is_empty() {
        return Err(Error::domain("no draws"));
    }
    let (r0, rn): (Vec<f64>, Vec<f64>) = thetas.iter().map(|t| reproduction_numbers(&t.epi(constants))).unzip();
    let above = thetas.iter().filter(|t| t.kappa > 1.0).count();
    Ok(DerivedQuantities { r0, rn, prob_kappa_above_one: above as f64 / thetas.len() as f64 })
}
