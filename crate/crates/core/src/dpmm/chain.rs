use super::{gibbs_scan, split_merge_move, ChainConfig, DpmmModel, DpmmState};
use crate::error::Result;
use crate::measure::MixingMeasure;
use crate::rng::{seeded, streams, Rng};

/// A chain that owns its state and random stream.
#[derive(Debug, Clone)]
pub struct Sampler {
    pub model: DpmmModel,
    pub cfg: ChainConfig,
    pub state: DpmmState,
    rng: Rng,
    accepted_split_merge: u64,
}

impl Sampler {
    pub fn new(model: DpmmModel, cfg: ChainConfig) -> Result<Self> {
        model.validate()?;
        cfg.validate()?;
        let state = DpmmState::single_cluster(&model);
        Ok(Self::with_state(model, cfg, state))
    }

    /// Starts from an explicit state (assumed valid for `model`).
    pub fn with_state(model: DpmmModel, cfg: ChainConfig, state: DpmmState) -> Self {
        let rng = seeded(cfg.seed, streams::CHAIN);
        Sampler { model, cfg, state, rng, accepted_split_merge: 0 }
    }

    /// One iteration: the configured split-merge moves, then Gibbs scans.
    pub fn step(&mut self) {
        for _ in 0..self.cfg.scheme.split_merge_moves {
            if split_merge_move(&mut self.state, &self.model, &self.cfg.scheme, &mut self.rng) {
                self.accepted_split_merge += 1;
            }
        }
        for _ in 0..self.cfg.scheme.gibbs_scans {
            gibbs_scan(&mut self.state, &self.model, &self.cfg.sampler, &mut self.rng);
        }
        self.state.iteration += 1;
    }

    pub fn accepted_split_merge(&self) -> u64 {
        self.accepted_split_merge
    }

    /// Burn-in, then every `thin`-th state of the sampling phase.
    pub fn run(&mut self) -> Vec<MixingMeasure> {
        for _ in 0..self.cfg.burn_in {
            self.step();
        }
        let mut draws = Vec::with_capacity(self.cfg.retained_draws());
        for t in 0..self.cfg.iterations {
            self.step();
            if (t + 1) % self.cfg.thin == 0 {
                draws.push(self.state.to_mixing_measure());
            }
        }
        draws
    }
}

pub fn run_chain(model: &DpmmModel, cfg: &ChainConfig) -> Result<Vec<MixingMeasure>> {
    Ok(Sampler::new(model.clone(), cfg.clone())?.run())
}
