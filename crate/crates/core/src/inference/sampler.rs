use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::draws::{ChainDraws, PosteriorDraws};
use super::params::Param;
use crate::error::{Error, Result};

/// Random generator owned by one chain.
pub type ChainRng = ChaCha8Rng;

/// Target density on unconstrained coordinates.
///
/// Each chain owns one `Workspace`, so implementations may cache expensive
/// intermediate results between calls.
pub trait LogDensity: Sync {
    type Workspace: Send;

    fn dim(&self) -> usize;

    fn names(&self) -> Vec<String> {
        (0..self.dim()).map(|k| format!("x{k}")).collect()
    }

    fn workspace(&self) -> Self::Workspace;

    fn log_density(&self, ws: &mut Self::Workspace, z: &[f64]) -> f64;

    /// Coordinates stored in the draws and `log |dx/dz|` of the map.
    fn to_reported(&self, z: &[f64]) -> (Vec<f64>, f64) {
        (z.to_vec(), 0.0)
    }

    fn initial_point(&self, ws: &mut Self::Workspace, rng: &mut ChainRng) -> Vec<f64>;
}

/// Transmission block `{pi, i_tot0, beta, kappa}` and observation block `{p_icu, eta}`.
pub fn default_blocks() -> Vec<Vec<usize>> {
    vec![
        vec![Param::Pi.index(), Param::ITot0.index(), Param::Beta.index(), Param::Kappa.index()],
        vec![Param::PIcu.index(), Param::Eta.index()],
    ]
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SamplerConfig {
    /// Total iterations per chain, burn-in included.
    pub n_iter: usize,
    /// Leading iterations during which proposals adapt; nothing is stored.
    pub burn_in: usize,
    pub thin: usize,
    pub n_chains: usize,
    pub seed: u64,
    pub blocks: Vec<Vec<usize>>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { n_iter: 100_000, burn_in: 20_000, thin: 10, n_chains: 4, seed: 1, blocks: default_blocks() }
    }
}

impl SamplerConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.n_iter == 0 || self.thin == 0 || self.n_chains == 0 {
            return Err(Error::Config("iterations, thinning and chains must be positive".into()));
        }
        if self.burn_in >= self.n_iter {
            return Err(Error::Config(format!("burn-in {} leaves no draws from {} iterations", self.burn_in, self.n_iter)));
        }
        let mut seen = vec![false; dim];
        for block in &self.blocks {
            if block.is_empty() {
                return Err(Error::Config("empty block".into()));
            }
            for &k in block {
                if k >= dim || seen[k] {
                    return Err(Error::Config(format!("blocks do not partition the {dim} coordinates")));
                }
                seen[k] = true;
            }
        }
        if !seen.iter().all(|s| *s) {
            return Err(Error::Config(format!("blocks do not cover all {dim} coordinates")));
        }
        Ok(())
    }
}

const INITIAL_SD: f64 = 0.1;
const SCALE_DECAY: f64 = 0.6;
const COV_DECAY: f64 = 0.7;
const COV_WARMUP: usize = 200;

/// Random-walk state of one block. The proposal is
/// `z_block + exp(log_scale) * chol(cov) * eps`.
struct BlockState {
    idx: Vec<usize>,
    target: f64,
    log_scale: f64,
    mean: Vec<f64>,
    cov: Vec<f64>,
    chol: Vec<f64>,
    accepted: u64,
    proposed: u64,
}

impl BlockState {
    fn new(idx: Vec<usize>, z: &[f64]) -> Self {
        let d = idx.len();
        let mut cov = vec![0.0; d * d];
        for k in 0..d {
            cov[k * d + k] = INITIAL_SD * INITIAL_SD;
        }
        let chol = cholesky(&cov, d).expect("diagonal start is positive definite");
        let mean = idx.iter().map(|&k| z[k]).collect();
        let target = if d == 1 { 0.44 } else { 0.234 };
        Self { idx, target, log_scale: 0.0, mean, cov, chol, accepted: 0, proposed: 0 }
    }

    fn dim(&self) -> usize {
        self.idx.len()
    }

    /// Robbins-Monro step on the scale and the running moments.
    fn adapt(&mut self, iter: usize, accept_prob: f64, z: &[f64]) {
        let d = self.dim();
        let t = (iter + 1) as f64;
        self.log_scale += t.powf(-SCALE_DECAY) * (accept_prob - self.target);

        let g = t.powf(-COV_DECAY);
        let diff: Vec<f64> = self.idx.iter().zip(&self.mean).map(|(&k, m)| z[k] - m).collect();
        for (m, dk) in self.mean.iter_mut().zip(&diff) {
            *m += g * dk;
        }
        if iter < COV_WARMUP {
            return;
        }
        for i in 0..d {
            for j in 0..d {
                let c = &mut self.cov[i * d + j];
                *c += g * (diff[i] * diff[j] - *c);
            }
        }
        let trace: f64 = (0..d).map(|k| self.cov[k * d + k]).sum();
        let mut reg = self.cov.clone();
        for k in 0..d {
            reg[k * d + k] += 1e-10 * trace / d as f64 + 1e-14;
        }
        if let Some(l) = cholesky(&reg, d) {
            self.chol = l;
        }
    }
}

/// Lower Cholesky factor of a row-major symmetric matrix.
fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Adaptive block Metropolis-Hastings over independent chains.
///
/// Each block takes a Gaussian random-walk step on the unconstrained scale.
/// During burn-in the block scale is driven toward the target acceptance rate
/// and the block covariance tracks the chain; both are frozen afterwards.
/// Chain `c` draws from ChaCha stream `c` of the configured seed, so results
/// do not depend on thread scheduling.
pub fn mh_sample<D: LogDensity>(target: &D, cfg: &SamplerConfig) -> Result<PosteriorDraws> {
    cfg.validate(target.dim())?;
    let chains = (0..cfg.n_chains)
        .into_par_iter()
        .map(|c| run_chain(target, cfg, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(PosteriorDraws { names: target.names(), chains, n_iter: cfg.n_iter, burn_in: cfg.burn_in, thin: cfg.thin })
}

fn run_chain<D: LogDensity>(target: &D, cfg: &SamplerConfig, chain: usize) -> Result<ChainDraws> {
    let mut rng = ChainRng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64);
    let mut ws = target.workspace();
    let mut z = target.initial_point(&mut ws, &mut rng);
    let mut lp = target.log_density(&mut ws, &z);
    if !lp.is_finite() {
        return Err(Error::Convergence(format!("chain {chain}: starting point has log density {lp}")));
    }

    let mut blocks: Vec<BlockState> = cfg.blocks.iter().map(|b| BlockState::new(b.clone(), &z)).collect();
    let kept = (cfg.n_iter - cfg.burn_in) / cfg.thin;
    let mut out = ChainDraws {
        chain,
        seed: cfg.seed,
        iterations: Vec::with_capacity(kept),
        draws: Vec::with_capacity(kept),
        log_posterior: Vec::with_capacity(kept),
        accepted: vec![0; blocks.len()],
        proposed: vec![0; blocks.len()],
    };
    let mut proposal = z.clone();
    let mut eps = Vec::new();

    for iter in 0..cfg.n_iter {
        let adapting = iter < cfg.burn_in;
        for block in blocks.iter_mut() {
            let d = block.dim();
            eps.clear();
            eps.extend((0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let scale = block.log_scale.exp();
            proposal.copy_from_slice(&z);
            for i in 0..d {
                let step: f64 = (0..=i).map(|j| block.chol[i * d + j] * eps[j]).sum();
                proposal[block.idx[i]] += scale * step;
            }
            let lp_new = target.log_density(&mut ws, &proposal);
            let accept_prob = if lp_new.is_nan() { 0.0 } else { (lp_new - lp).exp().min(1.0) };
            let u: f64 = rng.random();
            let accepted = u < accept_prob;
            if accepted {
                z.copy_from_slice(&proposal);
                lp = lp_new;
            }
            if adapting {
                block.adapt(iter, accept_prob, &z);
            } else {
                block.proposed += 1;
                block.accepted += accepted as u64;
            }
        }
        if !adapting && (iter + 1 - cfg.burn_in).is_multiple_of(cfg.thin) {
            let (x, log_jac) = target.to_reported(&z);
            out.iterations.push(iter + 1);
            out.draws.push(x);
            out.log_posterior.push(lp - log_jac);
        }
    }

    for (k, b) in blocks.iter().enumerate() {
        out.accepted[k] = b.accepted;
        out.proposed[k] = b.proposed;
        if b.proposed > 0 && b.accepted == 0 {
            return Err(Error::Convergence(format!(
                "chain {chain}: block {:?} rejected every proposal after burn-in",
                b.idx
            )));
        }
    }
    Ok(out)
}
