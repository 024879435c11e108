use std::io::{Read, Write};
use std::path::Path;

use super::params::{ParamVector, N_PARAMS};
use crate::error::{Error, Result};
use crate::stats;

/// Stored draws of one chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainDraws {
    pub chain: usize,
    pub seed: u64,
    /// 1-based iteration at which each draw was stored.
    pub iterations: Vec<usize>,
    pub draws: Vec<Vec<f64>>,
    pub log_posterior: Vec<f64>,
    /// Post burn-in accepted / proposed moves per block.
    pub accepted: Vec<u64>,
    pub proposed: Vec<u64>,
}

impl ChainDraws {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d[k]).collect()
    }

    pub fn acceptance_rates(&self) -> Vec<f64> {
        self.accepted
            .iter()
            .zip(&self.proposed)
            .map(|(&a, &p)| if p == 0 { f64::NAN } else { a as f64 / p as f64 })
            .collect()
    }
}

/// Draws from every chain plus the run layout.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorDraws {
    pub names: Vec<String>,
    pub chains: Vec<ChainDraws>,
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl PosteriorDraws {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn n_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn total_draws(&self) -> usize {
        self.chains.iter().map(ChainDraws::len).sum()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// All chains concatenated in chain order.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.chains.iter().flat_map(|c| c.draws.iter().map(move |d| d[k])).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.chains.iter().flat_map(|c| c.draws.iter().map(Vec::as_slice))
    }

    pub fn param_vectors(&self) -> Result<Vec<ParamVector>> {
        if self.dim() != N_PARAMS {
            return Err(Error::domain(format!("draws have {} columns, not {N_PARAMS}", self.dim())));
        }
        self.rows().map(ParamVector::from_slice).collect()
    }

    pub fn quantile(&self, k: usize, q: f64) -> f64 {
        stats::quantile(&self.column(k), q)
    }

    /// `chain,iteration,<params...>,log_posterior`; floats use the shortest
    /// representation that parses back to the same value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["chain".to_string(), "iteration".to_string()];
        header.extend(self.names.iter().cloned());
        header.push("log_posterior".to_string());
        w.write_record(&header)?;
        for c in &self.chains {
            for ((it, d), lp) in c.iterations.iter().zip(&c.draws).zip(&c.log_posterior) {
                let mut rec = vec![c.chain.to_string(), it.to_string()];
                rec.extend(d.iter().map(|v| v.to_string()));
                rec.push(lp.to_string());
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| Error::io("<draws>", e))?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Reads a draws CSV. Run layout fields other than the chains are not
    /// recoverable from the file and are left at zero.
    pub fn read_csv<R: Read>(input: R, origin: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        let header = rdr.headers()?.clone();
        let n = header.len();
        if n < 4 || &header[0] != "chain" || &header[1] != "iteration" || &header[n - 1] != "log_posterior" {
            return Err(Error::parse(origin, 1, "expected header chain,iteration,<params>,log_posterior"));
        }
        let names: Vec<String> = header.iter().skip(2).take(n - 3).map(str::to_string).collect();
        let mut chains: Vec<ChainDraws> = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let line = row + 2;
            let rec = rec?;
            if rec.len() != n {
                return Err(Error::parse(origin, line, format!("expected {n} fields, found {}", rec.len())));
            }
            let num = |i: usize| -> Result<f64> {
                rec[i].trim().parse::<f64>().map_err(|_| Error::parse(origin, line, format!("bad number `{}`", &rec[i])))
            };
            let chain: usize = rec[0].trim().parse().map_err(|_| Error::parse(origin, line, "bad chain index"))?;
            let iteration: usize =
                rec[1].trim().parse().map_err(|_| Error::parse(origin, line, "bad iteration"))?;
            let draw = (2..n - 1).map(num).collect::<Result<Vec<_>>>()?;
            let lp = num(n - 1)?;
            let slot = match chains.iter().position(|c| c.chain == chain) {
                Some(i) => i,
                None => {
                    chains.push(ChainDraws {
                        chain,
                        seed: 0,
                        iterations: vec![],
                        draws: vec![],
                        log_posterior: vec![],
                        accepted: vec![],
                        proposed: vec![],
                    });
                    chains.len() - 1
                }
            };
            let c = &mut chains[slot];
            c.iterations.push(iteration);
            c.draws.push(draw);
            c.log_posterior.push(lp);
        }
        Ok(Self { names, chains, n_iter: 0, burn_in: 0, thin: 0 })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file), path)
    }
}
