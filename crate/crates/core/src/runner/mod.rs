//! Experiment orchestration: replicas, aggregation and persistence.

mod config;
mod tables;

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    resolve_limit, CenterRule, ExperimentConfig, LimitChoice, LimitConfig, OutputFormat, RunConfig, WindowSpec,
};
pub use tables::{run_covariance_table, run_weyl_report, write_csv_rows, CovarianceRow, WeylRow};

use crate::analysis::{compare, ComparisonVerdict, CountDistribution, Provenance};
use crate::error::{Error, Result};
use crate::limitproc::{sample_path, LimitSpec};
use crate::rng::{Lane, StreamKey};
use crate::rootfind::{count_zeros_window, ScanOptions, ZeroFlag, ZeroReport};
use crate::sampling::{draw_coefficients_keyed, normalizer, CoefficientModel};
use crate::trigpoly::{ScaledEvaluator, TrigPolynomial};

/// Largest tolerated fraction of discarded replicas.
pub const MAX_DISCARD_FRACTION: f64 = 0.01;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagTally {
    pub replicas: u64,
    /// Replicas kept on both sides.
    pub n_samples: u64,
    pub discarded: u64,
    pub poly_near_tangency: u64,
    pub limit_near_tangency: u64,
    pub poly_endpoint_zero: u64,
    pub limit_endpoint_zero: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub poly: CountDistribution,
    pub limit: CountDistribution,
    pub verdict: ComparisonVerdict,
    pub flags: FlagTally,
    pub timing: Timing,
}

/// On-disk layout of a [`RunResult`].
#[derive(Serialize, Deserialize)]
struct RunResultFile {
    config: ExperimentConfig,
    poly_pmf: Vec<(usize, f64)>,
    limit_pmf: Vec<(usize, f64)>,
    verdict: ComparisonVerdict,
    flags: FlagTally,
    timing: Timing,
}

fn from_pmf(pmf: &[(usize, f64)], n_samples: u64, provenance: Provenance) -> Result<CountDistribution> {
    let hist: BTreeMap<usize, u64> = pmf
        .iter()
        .map(|&(k, p)| (k, (p * n_samples as f64).round() as u64))
        .collect();
    let d = CountDistribution::from_histogram(hist)?;
    if d.n_samples() != n_samples {
        return Err(Error::Config(format!(
            "pmf does not match n_samples = {n_samples} (reconstructed {})",
            d.n_samples()
        )));
    }
    Ok(d.with_provenance(provenance))
}

impl RunResult {
    /// Equality of everything except wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.config == other.config
            && self.poly == other.poly
            && self.limit == other.limit
            && self.verdict == other.verdict
            && self.flags == other.flags
    }

    fn file(&self) -> RunResultFile {
        RunResultFile {
            config: self.config.clone(),
            poly_pmf: self.poly.pmf(),
            limit_pmf: self.limit.pmf(),
            verdict: self.verdict,
            flags: self.flags.clone(),
            timing: self.timing,
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.file())?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let f: RunResultFile = serde_json::from_str(text)?;
        let provenance = Provenance {
            experiment_id: f.config.run.experiment_id.clone(),
            seed: f.config.run.master_seed,
        };
        Ok(Self {
            poly: from_pmf(&f.poly_pmf, f.flags.n_samples, provenance.clone())?,
            limit: from_pmf(&f.limit_pmf, f.flags.n_samples, provenance)?,
            config: f.config,
            verdict: f.verdict,
            flags: f.flags,
            timing: f.timing,
        })
    }

    /// One row per count `k` with columns `k, poly_prob, limit_prob`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "poly_prob", "limit_prob"])?;
        let keys: std::collections::BTreeSet<usize> = self
            .poly
            .histogram()
            .keys()
            .chain(self.limit.histogram().keys())
            .copied()
            .collect();
        for k in keys {
            w.write_record([
                k.to_string(),
                self.poly.prob(k).to_string(),
                self.limit.prob(k).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Kept { count: usize, tangency: bool, endpoint: bool },
    Discarded,
}

fn side_of(result: Result<ZeroReport>) -> Result<Side> {
    match result {
        Ok(r) if r.has(ZeroFlag::RefinementFailed) => Ok(Side::Discarded),
        Ok(r) => Ok(Side::Kept {
            count: r.count,
            tangency: r.has(ZeroFlag::NearTangency),
            endpoint: r.has(ZeroFlag::EndpointZero),
        }),
        Err(Error::DegenerateInput { .. }) => Ok(Side::Discarded),
        Err(e) => Err(e),
    }
}

struct Plan<'a> {
    model: &'a CoefficientModel,
    limit: &'a LimitSpec,
    scan: &'a ScanOptions,
    seed: u64,
    n: usize,
    center: f64,
    norm: f64,
    a: f64,
    b: f64,
}

impl Plan<'_> {
    fn poly_side(&self, replica: u64) -> Result<Side> {
        let pairs = draw_coefficients_keyed(self.model, self.n, StreamKey::new(self.seed, replica, Lane::Coefficients));
        let ev = ScaledEvaluator::new(TrigPolynomial::from_pairs(pairs)?, self.center, self.norm)?;
        let w = ev.window(self.a, self.b);
        side_of(count_zeros_window(&|u| w.value(u), &|u| w.derivative(u), self.a, self.b, self.scan))
    }

    fn limit_side(&self, replica: u64) -> Result<Side> {
        let path = sample_path(self.limit, StreamKey::new(self.seed, replica, Lane::LimitPath))?;
        let w = path.window(self.a, self.b);
        side_of(count_zeros_window(&|t| w.value(t), &|t| w.derivative(t), self.a, self.b, self.scan))
    }

    fn replica(&self, i: u64) -> Result<(Side, Side)> {
        Ok((self.poly_side(i)?, self.limit_side(i)?))
    }
}

/// Runs all replicas of `config` on `workers` threads.
///
/// Replica `i` draws its coefficients and its limit path from streams keyed by
/// `(master_seed, i)`, and results are reduced in replica order, so the
/// outcome does not depend on `workers`.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<RunResult> {
    let started = Instant::now();
    let limit = config.validate()?;
    let w = &config.window;
    let plan = Plan {
        model: &config.model,
        limit: &limit,
        scan: &config.scan,
        seed: config.run.master_seed,
        n: w.n,
        center: w.center_at(),
        norm: normalizer(&config.model, w.n),
        a: w.a,
        b: w.b,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let outcomes: Vec<Result<(Side, Side)>> =
        pool.install(|| (0..config.run.replicas).into_par_iter().map(|i| plan.replica(i)).collect());

    let mut flags = FlagTally {
        replicas: config.run.replicas,
        ..FlagTally::default()
    };
    let (mut poly_hist, mut limit_hist) = (BTreeMap::new(), BTreeMap::new());
    for outcome in outcomes {
        match outcome? {
            (
                Side::Kept {
                    count: pc,
                    tangency: pt,
                    endpoint: pe,
                },
                Side::Kept {
                    count: lc,
                    tangency: lt,
                    endpoint: le,
                },
            ) => {
                *poly_hist.entry(pc).or_insert(0u64) += 1;
                *limit_hist.entry(lc).or_insert(0u64) += 1;
                flags.n_samples += 1;
                flags.poly_near_tangency += pt as u64;
                flags.limit_near_tangency += lt as u64;
                flags.poly_endpoint_zero += pe as u64;
                flags.limit_endpoint_zero += le as u64;
            }
            _ => flags.discarded += 1,
        }
    }
    if flags.discarded as f64 > MAX_DISCARD_FRACTION * flags.replicas as f64 || flags.n_samples == 0 {
        return Err(Error::TooManyDiscards {
            discarded: flags.discarded,
            replicas: flags.replicas,
        });
    }
    let provenance = Provenance {
        experiment_id: config.run.experiment_id.clone(),
        seed: config.run.master_seed,
    };
    let poly = CountDistribution::from_histogram(poly_hist)?.with_provenance(provenance.clone());
    let limit = CountDistribution::from_histogram(limit_hist)?.with_provenance(provenance);
    let verdict = compare(&poly, &limit)?;
    Ok(RunResult {
        config: config.clone(),
        poly,
        limit,
        verdict,
        flags,
        timing: Timing {
            wall_seconds: started.elapsed().as_secs_f64(),
        },
    })
}
