//! Experiment grids: every (source instance, dimension, method, repetition)
//! combination, run with derived seeds and collected into one record.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::io::load_points;
use super::mask::{mask, MaskMode};
use super::{generate_uniform, LabeledPoints};
use crate::error::{Error, Result};
use crate::eval::{run_trial, EvalReport, Instance, Method, TrialConfig};
use crate::matrix::{edm, PointConfiguration};
use crate::seed;

/// Salt separating mask seeds from trial seeds.
const MASK_STREAM: u64 = 0x6d61_736b;

/// Where ground-truth configurations come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    /// A points CSV; every dimension embeds the same data.
    Points { path: PathBuf },
    /// Uniform points in the unit cube, one configuration per seed in
    /// `1..=instances`. For embedding dimension `q` the data are the first
    /// `q` columns of a draw in the largest requested dimension.
    Uniform { n: usize, instances: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub methods: Vec<Method>,
    pub dims: Vec<usize>,
    pub mask: MaskMode,
    pub repetitions: usize,
    pub seed: u64,
    pub sources: Vec<Source>,
    pub max_in: usize,
    pub max_out: usize,
    pub output: Option<PathBuf>,
}

impl RunSpec {
    pub fn validate(&self) -> Result<()> {
        self.mask.validate()?;
        let problem = if self.methods.is_empty() {
            Some("no methods given")
        } else if self.dims.is_empty() || self.dims.contains(&0) {
            Some("dimensions must be positive")
        } else if self.repetitions == 0 {
            Some("repetitions must be at least 1")
        } else if self.sources.is_empty() {
            Some("no data source given")
        } else if self.max_in == 0 || self.max_out == 0 {
            Some("retry caps must be at least 1")
        } else if self.methods.iter().any(|m| m.needs_tree_mask()) && self.mask != MaskMode::Mst {
            Some("c and dpflb need the mst mask mode")
        } else {
            None
        };
        match problem {
            Some(msg) => Err(Error::InvalidConfig(msg.to_string())),
            None => Ok(()),
        }
    }
}

/// One flat row of the record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub instance_index: usize,
    pub repetition: usize,
    #[serde(flatten)]
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub build: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            build: if cfg!(debug_assertions) {
                "debug"
            } else {
                "release"
            }
            .to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub spec: RunSpec,
    pub environment: Environment,
    pub trials: Vec<TrialRecord>,
}

impl RunRecord {
    /// The trials as JSON with wall-clock times removed.
    pub fn metrics_json(&self) -> Result<String> {
        let stripped: Vec<TrialRecord> = self
            .trials
            .iter()
            .map(|t| TrialRecord {
                report: t.report.without_timing(),
                ..t.clone()
            })
            .collect();
        Ok(serde_json::to_string(&stripped)?)
    }
}

struct Job {
    instance_index: usize,
    repetition: usize,
    method_index: usize,
    dim: usize,
    instance: usize,
}

/// Builds the instance list for one embedding dimension.
fn instances_for(
    spec: &RunSpec,
    dim: usize,
    loaded: &[Option<LabeledPoints>],
) -> Result<Vec<(String, PointConfiguration)>> {
    let max_dim = *spec.dims.iter().max().expect("validated");
    let mut out = Vec::new();
    for (source, points) in spec.sources.iter().zip(loaded) {
        match source {
            Source::Points { path } => {
                let p = points.as_ref().expect("loaded above");
                out.push((path.display().to_string(), p.points.clone()));
            }
            Source::Uniform { n, instances } => {
                for s in 1..=*instances {
                    let x = generate_uniform(*n, max_dim, s)?.leading_columns(dim)?;
                    out.push((format!("uniform-n{n}-p{dim}-seed{s}"), x));
                }
            }
        }
    }
    Ok(out)
}

/// Runs the grid, `jobs` trials at a time. Trial order in the record does
/// not depend on `jobs`.
pub fn run_bench(spec: &RunSpec, jobs: usize) -> Result<RunRecord> {
    spec.validate()?;
    let loaded: Vec<_> = spec
        .sources
        .iter()
        .map(|s| match s {
            Source::Points { path } => load_points(path).map(Some),
            Source::Uniform { .. } => Ok(None),
        })
        .collect::<Result<_>>()?;

    // Instances depend on the dimension (uniform data) and the repetition
    // (random masks), so they are built per (dimension, instance, repetition).
    let mut built: Vec<Instance> = Vec::new();
    let mut jobs_list: Vec<Job> = Vec::new();
    for &dim in &spec.dims {
        for (index, (label, x)) in instances_for(spec, dim, &loaded)?.into_iter().enumerate() {
            let truth = edm(&x);
            for rep in 0..spec.repetitions {
                let mask_seed = seed::derive(
                    spec.seed,
                    &[MASK_STREAM, index as u64, dim as u64, rep as u64],
                );
                let partial = mask(&truth, spec.mask, mask_seed)?;
                let instance = Instance::new(
                    format!("{label}/{}", spec.mask),
                    truth.clone(),
                    partial.mask().clone(),
                )?;
                built.push(instance);
                for method_index in 0..spec.methods.len() {
                    jobs_list.push(Job {
                        instance_index: index,
                        repetition: rep,
                        method_index,
                        dim,
                        instance: built.len() - 1,
                    });
                }
            }
        }
    }

    let results: Mutex<Vec<Option<TrialRecord>>> = Mutex::new(vec![None; jobs_list.len()]);
    let next = AtomicUsize::new(0);
    let worker = || loop {
        let k = next.fetch_add(1, Ordering::Relaxed);
        let Some(job) = jobs_list.get(k) else { break };
        let method = spec.methods[job.method_index];
        let trial_seed = seed::derive(
            spec.seed,
            &[
                method as u64,
                job.instance_index as u64,
                job.dim as u64,
                job.repetition as u64,
            ],
        );
        let cfg = TrialConfig {
            method,
            dim: job.dim,
            max_in: spec.max_in,
            max_out: spec.max_out,
        };
        let report = run_trial(&cfg, &built[job.instance], trial_seed);
        log::info!(
            "{} p={} {} rep {}: rdd {:?}",
            method,
            job.dim,
            report.instance,
            job.repetition,
            report.rdd
        );
        results.lock().expect("no worker panicked")[k] = Some(TrialRecord {
            instance_index: job.instance_index,
            repetition: job.repetition,
            report,
        });
    };
    std::thread::scope(|scope| {
        for _ in 1..jobs.max(1) {
            scope.spawn(worker);
        }
        worker();
    });
    let trials = results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect();
    Ok(RunRecord {
        spec: spec.clone(),
        environment: Environment::current(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(methods: Vec<Method>, dims: Vec<usize>) -> RunSpec {
        RunSpec {
            methods,
            dims,
            mask: MaskMode::Mst,
            repetitions: 2,
            seed: 42,
            sources: vec![Source::Uniform {
                n: 12,
                instances: 1,
            }],
            max_in: 100,
            max_out: 100,
            output: None,
        }
    }

    #[test]
    fn grid_cardinality() {
        let s = spec(vec![Method::C, Method::Dpflb], vec![2, 3, 4, 5, 6]);
        let record = run_bench(&s, 1).unwrap();
        assert_eq!(record.trials.len(), 5 * 2 * 2);
        assert!(record.trials.iter().all(|t| t.report.error.is_none()));
    }

    #[test]
    fn metrics_do_not_depend_on_jobs_or_reruns() {
        let s = spec(vec![Method::C, Method::Npf], vec![2, 3]);
        let a = run_bench(&s, 1).unwrap();
        let b = run_bench(&s, 3).unwrap();
        assert_eq!(a.metrics_json().unwrap(), b.metrics_json().unwrap());
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec(vec![Method::C], vec![2]);
        s.mask = MaskMode::Random { fraction: 0.5 };
        assert!(run_bench(&s, 1).is_err());
        let mut s = spec(vec![Method::Dpf], vec![2]);
        s.repetitions = 0;
        assert!(run_bench(&s, 1).is_err());
        let mut s = spec(vec![Method::Dpf], vec![2]);
        s.mask = MaskMode::Random { fraction: 1.5 };
        assert!(run_bench(&s, 1).is_err());
    }

    #[test]
    fn random_mask_grids_run() {
        let mut s = spec(vec![Method::Dpf], vec![2]);
        s.mask = MaskMode::Random { fraction: 0.4 };
        let record = run_bench(&s, 1).unwrap();
        assert_eq!(record.trials.len(), 2);
        assert!(record.trials.iter().all(|t| t.report.error.is_none()));
    }
}
