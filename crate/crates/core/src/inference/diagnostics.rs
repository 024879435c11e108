use std::io::Write;

use super::draws::PosteriorDraws;
use crate::error::{Error, Result};

/// Parameters with a potential scale reduction above this are flagged.
pub const PSRF_THRESHOLD: f64 = 1.05;

const MIN_CHAINS: usize = 2;
const MIN_DRAWS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct ParamDiagnostic {
    pub name: String,
    pub psrf: f64,
    pub ess: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsReport {
    pub params: Vec<ParamDiagnostic>,
}

impl DiagnosticsReport {
    pub fn get(&self, name: &str) -> Option<&ParamDiagnostic> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn flagged(&self) -> Vec<&str> {
        self.params.iter().filter(|p| p.flagged).map(|p| p.name.as_str()).collect()
    }

    pub fn any_flagged(&self) -> bool {
        self.params.iter().any(|p| p.flagged)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["parameter", "psrf", "ess", "flagged"])?;
        for p in &self.params {
            w.write_record([p.name.clone(), p.psrf.to_string(), p.ess.to_string(), p.flagged.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<diagnostics>", e))?;
        Ok(())
    }
}

/// Split-chain PSRF and autocorrelation-based ESS for every parameter.
pub fn diagnostics(draws: &PosteriorDraws) -> Result<DiagnosticsReport> {
    if draws.n_chains() < MIN_CHAINS {
        return Err(Error::domain(format!("need at least {MIN_CHAINS} chains, got {}", draws.n_chains())));
    }
    let shortest = draws.chains.iter().map(|c| c.len()).min().unwrap_or(0);
    if shortest < MIN_DRAWS {
        return Err(Error::domain(format!("need at least {MIN_DRAWS} draws per chain, got {shortest}")));
    }
    let params = draws
        .names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let cols: Vec<Vec<f64>> = draws.chains.iter().map(|c| c.column(k)[..shortest].to_vec()).collect();
            let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
            let psrf = split_potential_scale_reduction(&refs);
            let ess = effective_sample_size(&refs);
            ParamDiagnostic { name: name.clone(), psrf, ess, flagged: !(psrf <= PSRF_THRESHOLD) }
        })
        .collect();
    Ok(DiagnosticsReport { params })
}

fn split(chains: &[&[f64]]) -> Vec<Vec<f64>> {
    let n = chains.iter().map(|c| c.len()).min().unwrap_or(0) / 2;
    chains.iter().flat_map(|c| [c[..n].to_vec(), c[c.len() - n..].to_vec()]).collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Within-chain mean variance, and the between-chain variance of the means.
fn variance_components(chains: &[Vec<f64>]) -> (f64, f64) {
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let within = mean(&chains.iter().map(|c| sample_var(c)).collect::<Vec<_>>());
    (within, sample_var(&means))
}

/// Potential scale reduction of chains split in half.
///
/// Chains stuck at distinct constants give `+inf`; identical constants give NaN.
pub fn split_potential_scale_reduction(chains: &[&[f64]]) -> f64 {
    let halves = split(chains);
    let n = halves[0].len() as f64;
    let (w, var_means) = variance_components(&halves);
    let var_plus = (n - 1.0) / n * w + var_means;
    (var_plus / w).sqrt()
}

/// Effective sample size across chains using Geyer's initial monotone
/// sequence on the combined autocorrelation of split chains.
pub fn effective_sample_size(chains: &[&[f64]]) -> f64 {
    let halves = split(chains);
    let m = halves.len();
    let n = halves[0].len();
    let (w, var_means) = variance_components(&halves);
    let var_plus = (n as f64 - 1.0) / n as f64 * w + var_means;
    if !(var_plus > 0.0) {
        return f64::NAN;
    }
    let centred: Vec<Vec<f64>> = halves
        .iter()
        .map(|c| {
            let mu = mean(c);
            c.iter().map(|x| x - mu).collect()
        })
        .collect();
    // mean over chains of the biased lag-t autocovariance
    let autocov = |t: usize| -> f64 {
        centred
            .iter()
            .map(|c| c[..n - t].iter().zip(&c[t..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
            .sum::<f64>()
            / m as f64
    };
    let rho = |t: usize| 1.0 - (w - autocov(t)) / var_plus;

    let mut tau = -1.0;
    let mut prev_pair = f64::INFINITY;
    let mut t = 0;
    while t + 1 < n {
        let pair = rho(t) + rho(t + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        t += 2;
    }
    let total = (m * n) as f64;
    total / tau.max(1.0 / total.log10())
}
