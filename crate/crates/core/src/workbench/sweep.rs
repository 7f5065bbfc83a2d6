use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{prepare, run_variant, RunConfig, RunResult, Variant};
use crate::error::{Error, Result};
use crate::optimizer::depth_compression;
use crate::problem::ProblemInstance;
use crate::statevector::derive_seed;

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub instance: String,
    pub variant: Variant,
    pub n_r: usize,
    pub result: Option<RunResult>,
    /// Depth change relative to the unoptimized HHL circuit of the same instance.
    pub compression_pct: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    label: &'a str,
    variant: Variant,
    n_t: Option<usize>,
    n_b: Option<usize>,
    n_r: usize,
    e_corr_oracle: Option<f64>,
    depth: Option<usize>,
    two_q: Option<usize>,
    e_corr: Option<f64>,
    e_diff: Option<f64>,
    pfd: Option<f64>,
    n_f: Option<usize>,
    compression_pct: Option<f64>,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct HeatmapRow<'a> {
    instance: &'a str,
    variant: Variant,
    compression_pct: Option<f64>,
    pfd: Option<f64>,
}

impl SweepReport {
    pub fn get(&self, instance: &str, variant: Variant) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.instance == instance && r.variant == variant)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            let row = r.result.as_ref().map(|x| &x.row);
            w.serialize(CsvRow {
                label: &r.instance,
                variant: r.variant,
                n_t: row.map(|x| x.n_t),
                n_b: row.map(|x| x.n_b),
                n_r: r.n_r,
                e_corr_oracle: row.map(|x| x.e_corr_oracle),
                depth: row.map(|x| x.depth),
                two_q: row.map(|x| x.two_q),
                e_corr: row.map(|x| x.e_corr),
                e_diff: row.map(|x| x.e_diff),
                pfd: row.map(|x| x.pfd),
                n_f: row.map(|x| x.n_f),
                compression_pct: r.compression_pct,
                error: r.error.as_deref(),
            })
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Instance × variant grid of compression and PFD.
    pub fn write_heatmap_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(HeatmapRow {
                instance: &r.instance,
                variant: r.variant,
                compression_pct: r.compression_pct,
                pfd: r.result.as_ref().map(|x| x.row.pfd),
            })
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

/// Runs every (instance, config) pair concurrently. Row `k` uses the seed
/// `derive_seed(config.seed, k)`; failures are recorded on the row.
pub fn run_sweep(instances: &[ProblemInstance], configs: &[RunConfig]) -> Result<SweepReport> {
    if instances.is_empty() || configs.is_empty() {
        return Err(Error::invalid("sweep needs at least one instance and one configuration"));
    }
    let jobs: Vec<(usize, &ProblemInstance, RunConfig)> = instances
        .iter()
        .flat_map(|p| configs.iter().map(move |c| (p, c)))
        .enumerate()
        .map(|(k, (p, c))| (k, p, RunConfig { seed: derive_seed(c.seed, k as u64), ..c.clone() }))
        .collect();
    let results: Vec<Result<RunResult>> = jobs.par_iter().map(|(_, p, c)| run_variant(p, c)).collect();

    // unoptimized HHL depth per (instance, n_r)
    let mut baselines: BTreeMap<(usize, usize), Option<usize>> = BTreeMap::new();
    for ((_, p, c), r) in jobs.iter().zip(&results) {
        if let (Variant::Hhl, Ok(r)) = (c.variant, r) {
            baselines.insert((instance_index(instances, p), c.n_r), Some(r.native.depth));
        }
    }
    let missing: Vec<(usize, usize)> = jobs
        .iter()
        .map(|(_, p, c)| (instance_index(instances, p), c.n_r))
        .filter(|k| !baselines.contains_key(k))
        .collect();
    let computed: Vec<((usize, usize), Option<usize>)> = missing
        .into_par_iter()
        .map(|(i, n_r)| {
            let depth = prepare(&instances[i], &RunConfig::new(Variant::Hhl, n_r)).ok().map(|p| p.native.depth);
            ((i, n_r), depth)
        })
        .collect();
    baselines.extend(computed);

    let rows = jobs
        .iter()
        .zip(results)
        .map(|((_, p, c), r)| {
            let base = baselines.get(&(instance_index(instances, p), c.n_r)).copied().flatten();
            match r {
                Ok(res) => SweepRow {
                    instance: p.label.clone(),
                    variant: c.variant,
                    n_r: c.n_r,
                    compression_pct: base.and_then(|b| depth_compression(b, res.row.depth).ok()),
                    result: Some(res),
                    error: None,
                },
                Err(e) => SweepRow {
                    instance: p.label.clone(),
                    variant: c.variant,
                    n_r: c.n_r,
                    result: None,
                    compression_pct: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SweepReport { rows })
}

fn instance_index(instances: &[ProblemInstance], p: &ProblemInstance) -> usize {
    instances.iter().position(|q| std::ptr::eq(q, p)).expect("job refers to an input instance")
}
