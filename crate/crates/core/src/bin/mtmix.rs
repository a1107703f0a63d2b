use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use mtmix::dpmm::{ChainConfig, Sampler};
use mtmix::experiments::{generate_case_data, replicate, write_results, ExperimentCase, RunConfig};
use mtmix::{mtm, omega_n, wasserstein, Error, MixingMeasure, MtmConfig, Point, Result};

#[derive(Parser)]
#[command(name = "mtmix", version, about = "Mixing measures, Wasserstein distances and Merge-Truncate-Merge")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// W_r distance between two measures.
    Wasserstein {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        h: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        /// Write the optimal plan as CSV (i, j, mass, cost).
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Run Merge-Truncate-Merge on a measure.
    Mtm {
        #[arg(long)]
        input: PathBuf,
        /// A number, or `auto:<n>` for omega_n(n).
        #[arg(long)]
        omega: String,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Run the DP mixture sampler on a built-in case (or CSV data) and write draws.
    Simulate {
        #[arg(long, default_value = "A")]
        case: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Observations, one row per point; replaces the generated case data.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 2000)]
        burn_in: usize,
        #[arg(long, default_value_t = 18000)]
        iters: usize,
        #[arg(long, default_value_t = 10)]
        thin: usize,
    },
    /// Chain plus MTM over a sweep of c; writes frequency tables.
    Replicate {
        #[arg(long)]
        case: Option<String>,
        /// Comma-separated list.
        #[arg(long, value_delimiter = ',')]
        c: Option<Vec<f64>>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        thin: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// JSON run config; flags given on the command line override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        keep_draws: bool,
    },
}

fn parse_omega(s: &str) -> Result<f64> {
    match s.strip_prefix("auto:") {
        Some(n) => omega_n(n.trim().parse().map_err(|_| Error::Parse(format!("bad sample size in {s:?}")))?),
        None => s.parse().map_err(|_| Error::Parse(format!("bad omega {s:?}"))),
    }
}

fn read_points(path: &PathBuf) -> Result<Vec<Point>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let coords = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>();
        match coords {
            Ok(c) => out.push(Point::new(c)?),
            // A non-numeric first row is a header.
            Err(_) if row == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("row {}: {e}", row + 1))),
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Wasserstein { g, h, r, plan } => {
            let res = wasserstein(&MixingMeasure::load(g)?, &MixingMeasure::load(h)?, r)?;
            println!("{}", res.distance);
            if let Some(path) = plan {
                let mut w = csv::Writer::from_path(path)?;
                w.write_record(["i", "j", "mass", "cost"])?;
                for (i, j, m) in res.plan.entries() {
                    let cost = res.source.atoms()[i].distance(&res.target.atoms()[j]).powf(r);
                    w.write_record([i.to_string(), j.to_string(), m.to_string(), cost.to_string()])?;
                }
                w.flush()?;
            }
        }
        Command::Mtm { input, omega, c, r, seed, output, diagnostics } => {
            let g = MixingMeasure::load(input)?;
            let cfg = MtmConfig::new(parse_omega(&omega)?, c, r, seed)?;
            let res = mtm(&g, &cfg)?;
            match output {
                Some(p) => res.g_tilde.save(p)?,
                None => println!("{}", res.g_tilde.to_json()),
            }
            eprintln!("k_tilde = {}", res.k_tilde);
            if let Some(p) = diagnostics {
                let diag = json!({
                    "omega": cfg.omega,
                    "c": cfg.c,
                    "r": cfg.r,
                    "seed": cfg.seed,
                    "threshold": cfg.threshold(),
                    "k_tilde": res.k_tilde,
                    "merged_measure": res.merged_measure,
                    "stage1_merge_count": res.stage1_merge_count,
                    "stage2_truncated_count": res.stage2_truncated_count,
                    "stage2_demoted_count": res.stage2_demoted_count,
                    "empty_fallback": res.empty_fallback,
                    "order": res.order,
                });
                fs::write(p, serde_json::to_string_pretty(&diag)?)?;
            }
        }
        Command::Simulate { case, seed, out, data, burn_in, iters, thin } => {
            let start = Instant::now();
            let case = ExperimentCase::preset(&case)?;
            let points = match &data {
                Some(p) => read_points(p)?,
                None => generate_case_data(&case, seed)?.points,
            };
            let model = case.model(points)?;
            let chain = ChainConfig::new(burn_in, iters, thin, seed)?;
            let mut sampler = Sampler::new(model, chain.clone())?;
            let draws = sampler.run();
            fs::create_dir_all(&out)?;
            for (idx, g) in draws.iter().enumerate() {
                g.save(out.join(format!("draw_{idx:05}.json")))?;
            }
            let manifest = json!({
                "case": case,
                "data": data,
                "chain": chain,
                "seed": seed,
                "retained_draws": draws.len(),
                "accepted_split_merge": sampler.accepted_split_merge(),
                "wall_time_secs": start.elapsed().as_secs_f64(),
                "version": env!("CARGO_PKG_VERSION"),
            });
            fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
            eprintln!("{} draws written to {}", draws.len(), out.display());
        }
        Command::Replicate { case, c, burn_in, iters, thin, seed, r, out, config, keep_draws } => {
            let mut cfg = match config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            if let Some(name) = case {
                cfg.case = ExperimentCase::preset(&name)?;
            }
            if let Some(c) = c {
                cfg.c_values = c;
            }
            if let Some(b) = burn_in {
                cfg.chain.burn_in = b;
            }
            if let Some(i) = iters {
                cfg.chain.iterations = i;
            }
            if let Some(t) = thin {
                cfg.chain.thin = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = r {
                cfg.r = r;
            }
            cfg.keep_draws |= keep_draws;
            let rep = replicate(&cfg)?;
            write_results(&rep, &out)?;
            for (idx, c) in cfg.c_values.iter().enumerate() {
                println!("c = {c}: mode k = {:?}", rep.table.mode(idx));
            }
            println!("raw: mode k = {:?}", rep.table.raw_mode());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
