use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use edmc::eval::{complete, mst_distance_ratio, mst_edge_retention, rdd, Method, TrialConfig};
use edmc::matrix::{edm, principal_coords};
use edmc::tree::{mst, PartialDissimilarity};
use edmc::workbench::{
    generate_uniform, load_matrix, load_points, mask, run_bench, save_json, save_matrix,
    save_points, save_tree, LabeledPoints, MaskMode, RunSpec, Source,
};
use edmc::{Error, Result};

#[derive(Parser)]
#[command(
    name = "edmc",
    version,
    about = "Distance matrix completion under a minimum spanning tree"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Mst,
    Random,
}

#[derive(clap::Args)]
struct MaskArgs {
    #[arg(long, value_enum, default_value = "mst")]
    mode: Mode,
    /// Fraction of pairs removed in random mode.
    #[arg(long, default_value_t = 0.0)]
    fraction: f64,
}

impl MaskArgs {
    fn mode(&self) -> Result<MaskMode> {
        let mode = match self.mode {
            Mode::Mst => MaskMode::Mst,
            Mode::Random => MaskMode::Random {
                fraction: self.fraction,
            },
        };
        mode.validate()?;
        Ok(mode)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Uniform points in the unit cube.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Squared distance matrix of a points file.
    Distances {
        points: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Hide entries of a complete matrix.
    Mask {
        matrix: PathBuf,
        #[command(flatten)]
        mask: MaskArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the minimum spanning tree of the known entries.
        #[arg(long)]
        tree: Option<PathBuf>,
    },
    /// Complete a matrix with missing entries.
    Complete {
        matrix: PathBuf,
        #[arg(long)]
        method: Method,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        max_in: usize,
        #[arg(long, default_value_t = 100)]
        max_out: usize,
        /// Completed matrix.
        #[arg(short, long)]
        output: PathBuf,
        /// Recovered configuration.
        #[arg(long)]
        coords: Option<PathBuf>,
    },
    /// Score a completion against the true matrix.
    Eval {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        completed: PathBuf,
        /// Masked matrix whose minimum spanning tree is the reference tree;
        /// defaults to the truth's own tree.
        #[arg(long)]
        known: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a grid of trials and write one JSON record.
    Bench {
        /// Comma-separated methods.
        #[arg(long, value_delimiter = ',', required = true)]
        method: Vec<Method>,
        /// Comma-separated embedding dimensions.
        #[arg(long, value_delimiter = ',', required = true)]
        dim: Vec<usize>,
        #[command(flatten)]
        mask: MaskArgs,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Points CSV; may be repeated.
        #[arg(long)]
        input: Vec<PathBuf>,
        /// Number of points in generated uniform instances.
        #[arg(long)]
        uniform: Option<usize>,
        /// Uniform instances, seeded 1 to this value.
        #[arg(long, default_value_t = 5)]
        instances: u64,
        #[arg(long, default_value_t = 100)]
        max_in: usize,
        #[arg(long, default_value_t = 100)]
        max_out: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Principal coordinates of a points file, for plotting.
    ExportCoords {
        points: PathBuf,
        /// Keep this many leading coordinates.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Serialize)]
struct Scores {
    rdd: f64,
    mst_edge_retention: f64,
    mst_distance_ratio: f64,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            n,
            dim,
            seed,
            output,
        } => save_points(
            &output,
            &LabeledPoints::unlabeled(generate_uniform(n, dim, seed)?),
        ),
        Command::Distances { points, output } => {
            save_matrix(&output, &edm(&load_points(&points)?.points))
        }
        Command::Mask {
            matrix,
            mask: args,
            seed,
            output,
            tree,
        } => {
            let mode = args.mode()?;
            let d = load_matrix(&matrix)?;
            let partial = mask(&d, mode, seed)?;
            if let Some(path) = tree {
                save_tree(&path, &mst(&partial.to_matrix(), partial.mask())?.tree)?;
            }
            save_matrix(&output, &partial.to_matrix())
        }
        Command::Complete {
            matrix,
            method,
            dim,
            seed,
            max_in,
            max_out,
            output,
            coords,
        } => {
            let partial = PartialDissimilarity::from_matrix(&load_matrix(&matrix)?)?;
            let cfg = TrialConfig {
                method,
                dim,
                max_in,
                max_out,
            };
            let done = complete(&cfg, &partial, seed)?;
            if !done.converged {
                log::warn!("{method} did not converge; writing the best result found");
            }
            if let Some(path) = coords {
                save_points(&path, &LabeledPoints::unlabeled(done.points))?;
            }
            save_matrix(&output, &done.matrix)
        }
        Command::Eval {
            truth,
            completed,
            known,
            output,
        } => {
            let truth = load_matrix(&truth)?;
            let completed = load_matrix(&completed)?;
            let reference = match known {
                Some(path) => load_matrix(&path)?,
                None => truth.clone(),
            };
            let partial = PartialDissimilarity::from_matrix(&reference)?;
            let tree = mst(&partial.to_matrix(), partial.mask())?.tree;
            let scores = Scores {
                rdd: rdd(&truth, &completed)?,
                mst_edge_retention: mst_edge_retention(&tree, &completed)?,
                mst_distance_ratio: mst_distance_ratio(&tree, &completed)?,
            };
            match output {
                Some(path) => save_json(&path, &scores),
                None => {
                    println!("{}", serde_json::to_string_pretty(&scores)?);
                    Ok(())
                }
            }
        }
        Command::Bench {
            method,
            dim,
            mask: args,
            reps,
            jobs,
            seed,
            input,
            uniform,
            instances,
            max_in,
            max_out,
            output,
        } => {
            let mut sources: Vec<Source> = input
                .into_iter()
                .map(|path| Source::Points { path })
                .collect();
            if let Some(n) = uniform {
                sources.push(Source::Uniform { n, instances });
            }
            let spec = RunSpec {
                methods: method,
                dims: dim,
                mask: args.mode()?,
                repetitions: reps,
                seed,
                sources,
                max_in,
                max_out,
                output: Some(output.clone()),
            };
            if jobs == 0 {
                return Err(Error::InvalidConfig(
                    "--jobs must be at least 1".to_string(),
                ));
            }
            save_json(&output, &run_bench(&spec, jobs)?)
        }
        Command::ExportCoords {
            points,
            dim,
            output,
        } => {
            let data = load_points(&points)?;
            let mut pcs = principal_coords(&data.points)?;
            if let Some(q) = dim {
                pcs = pcs.leading_columns(q)?;
            }
            let names = (1..=pcs.dim()).map(|k| format!("pc{k}")).collect();
            save_points(
                &output,
                &LabeledPoints {
                    points: pcs,
                    names,
                    labels: data.labels,
                },
            )
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EDMC_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("edmc: {e}");
            ExitCode::FAILURE
        }
    }
}
