use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_case_data, ExperimentCase};
use crate::dpmm::{ChainConfig, Sampler};
use crate::error::{Error, Result};
use crate::measure::MixingMeasure;
use crate::mtm::{mtm, omega_n, MtmConfig};
use crate::rng::derive_seed;

/// Everything that determines one replication run. Loadable from JSON; any
/// omitted field takes its default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub case: ExperimentCase,
    pub c_values: Vec<f64>,
    /// Wasserstein order used by MTM.
    pub r: f64,
    /// Fixed merge radius; `None` means `omega_n(case.n)`.
    pub omega: Option<f64>,
    pub chain: ChainConfig,
    /// Master seed: data, chain and per-draw MTM seeds all derive from it.
    pub seed: u64,
    pub keep_draws: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            case: ExperimentCase::preset("A").expect("preset case"),
            c_values: vec![0.45, 0.5, 0.55, 1.0],
            r: 2.0,
            omega: None,
            chain: ChainConfig::full_protocol(0),
            seed: 0,
            keep_draws: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.case.validate()?;
        self.chain.validate()?;
        if self.c_values.is_empty() {
            return Err(Error::Config("no c values".into()));
        }
        for &c in &self.c_values {
            MtmConfig::new(1.0, c, self.r, 0)?;
        }
        Ok(())
    }

    pub fn omega(&self) -> Result<f64> {
        match self.omega {
            Some(w) => Ok(w),
            None => omega_n(self.case.n as u64),
        }
    }

    pub fn data_seed(&self) -> u64 {
        derive_seed(self.seed, 0)
    }

    pub fn chain_seed(&self) -> u64 {
        derive_seed(self.seed, 1)
    }

    /// MTM seed for retained draw `index`.
    pub fn mtm_seed(&self, index: usize) -> u64 {
        derive_seed(derive_seed(self.seed, 2), index as u64)
    }
}

/// Recovered-count frequencies per `c`, plus the raw support sizes of the
/// posterior draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub c_values: Vec<f64>,
    /// `k_tilde[c_idx][draw]`.
    pub k_tilde: Vec<Vec<usize>>,
    /// Number of atoms of each posterior draw.
    pub raw: Vec<usize>,
}

fn tabulate(ks: &[usize]) -> BTreeMap<usize, f64> {
    let mut out = BTreeMap::new();
    for &k in ks {
        *out.entry(k).or_insert(0.0) += 1.0;
    }
    let n = ks.len() as f64;
    out.values_mut().for_each(|v| *v /= n);
    out
}

fn mode_of(freq: &BTreeMap<usize, f64>) -> Option<usize> {
    // Ties go to the smaller k.
    freq.iter().fold(None, |best: Option<(usize, f64)>, (&k, &f)| match best {
        Some((_, bf)) if bf >= f => best,
        _ => Some((k, f)),
    })
    .map(|(k, _)| k)
}

impl FrequencyTable {
    pub fn draws(&self) -> usize {
        self.raw.len()
    }

    /// Relative frequencies of `k_tilde` for `c_values[idx]`.
    pub fn frequencies(&self, idx: usize) -> BTreeMap<usize, f64> {
        tabulate(&self.k_tilde[idx])
    }

    pub fn raw_frequencies(&self) -> BTreeMap<usize, f64> {
        tabulate(&self.raw)
    }

    /// Most frequent `k_tilde` for `c_values[idx]`.
    pub fn mode(&self, idx: usize) -> Option<usize> {
        mode_of(&self.frequencies(idx))
    }

    pub fn raw_mode(&self) -> Option<usize> {
        mode_of(&self.raw_frequencies())
    }

    pub fn write_csv(&self, frequencies: impl AsRef<Path>, raw: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(frequencies)?;
        w.write_record(["c", "k", "frequency"])?;
        for (idx, c) in self.c_values.iter().enumerate() {
            for (k, f) in self.frequencies(idx) {
                w.write_record([c.to_string(), k.to_string(), f.to_string()])?;
            }
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(raw)?;
        w.write_record(["k", "frequency"])?;
        for (k, f) in self.raw_frequencies() {
            w.write_record([k.to_string(), f.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Applies MTM for every `c` to already-drawn posterior samples.
pub fn replicate_draws(draws: &[MixingMeasure], cfg: &RunConfig) -> Result<FrequencyTable> {
    let omega = cfg.omega()?;
    let per_draw: Vec<Vec<usize>> = draws
        .par_iter()
        .enumerate()
        .map(|(idx, g)| {
            cfg.c_values
                .iter()
                .map(|&c| Ok(mtm(g, &MtmConfig::new(omega, c, cfg.r, cfg.mtm_seed(idx))?)?.k_tilde))
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<_>>()?;
    let k_tilde = (0..cfg.c_values.len()).map(|ci| per_draw.iter().map(|ks| ks[ci]).collect()).collect();
    Ok(FrequencyTable { c_values: cfg.c_values.clone(), k_tilde, raw: draws.iter().map(MixingMeasure::len).collect() })
}

/// Output of [`replicate`].
#[derive(Debug, Clone)]
pub struct Replication {
    pub table: FrequencyTable,
    pub draws: Vec<MixingMeasure>,
    pub manifest: Manifest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub omega: f64,
    pub data_seed: u64,
    pub chain_seed: u64,
    pub retained_draws: usize,
    pub accepted_split_merge: u64,
    pub wall_time_secs: f64,
    pub version: String,
}

/// Generates the case data, runs the chain and tabulates MTM counts.
pub fn replicate(cfg: &RunConfig) -> Result<Replication> {
    cfg.validate()?;
    let start = Instant::now();
    let data = generate_case_data(&cfg.case, cfg.data_seed())?;
    let model = cfg.case.model(data.points)?;
    let chain = ChainConfig { seed: cfg.chain_seed(), ..cfg.chain.clone() };
    let mut sampler = Sampler::new(model, chain)?;
    let draws = sampler.run();
    let table = replicate_draws(&draws, cfg)?;
    let manifest = Manifest {
        config: cfg.clone(),
        omega: cfg.omega()?,
        data_seed: cfg.data_seed(),
        chain_seed: cfg.chain_seed(),
        retained_draws: draws.len(),
        accepted_split_merge: sampler.accepted_split_merge(),
        wall_time_secs: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok(Replication { table, draws, manifest })
}

/// Writes `manifest.json`, `frequencies.csv`, `raw_frequencies.csv` and,
/// when the config asks for it, `draws/draw_NNNNN.json`.
pub fn write_results(rep: &Replication, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&rep.manifest)?)?;
    rep.table.write_csv(dir.join("frequencies.csv"), dir.join("raw_frequencies.csv"))?;
    if rep.manifest.config.keep_draws {
        let draws = dir.join("draws");
        fs::create_dir_all(&draws)?;
        for (idx, g) in rep.draws.iter().enumerate() {
            g.save(draws.join(format!("draw_{idx:05}.json")))?;
        }
    }
    Ok(())
}
