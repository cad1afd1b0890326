use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use tdaband::confidence::{classify, BandResult, Method, DEFAULT_SUBSAMPLE_REPS};
use tdaband::datasets::{generate, GeneratorSpec};
use tdaband::density::{density_diagram, kde, DEFAULT_BOOTSTRAP_REPS, DEFAULT_GRID_RES};
use tdaband::pointprocess::count_beyond;
use tdaband::{rips_diagram, PersistenceDiagram, PersistencePair, PointCloud};

use crate::bands::{compute_band, split_variant, BandOptions, DEFAULT_ALPHA, DEFAULT_BANDWIDTH};
use crate::error::{CliError, Result};
use crate::experiment::{self, Experiment, Settings};
use crate::svg;

#[derive(Debug, Parser)]
#[command(name = "tdaband", version, about = "Persistence diagrams with confidence bands")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic sample and write it as CSV.
    Generate {
        /// uniform_circle, truncated_normal_circle, eyeglasses or
        /// bart_simpson, optionally suffixed with +outliers.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Persistence diagram of a sample.
    Diagram {
        input: PathBuf,
        /// rips or density.
        #[arg(long, default_value = "rips")]
        kind: String,
        #[arg(long = "max-dim", default_value_t = 2)]
        max_dim: usize,
        #[arg(long = "max-scale", default_value_t = f64::INFINITY)]
        max_scale: f64,
        #[arg(long, default_value_t = DEFAULT_BANDWIDTH)]
        h: f64,
        #[arg(long = "grid-res", default_value_t = DEFAULT_GRID_RES)]
        grid_res: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Confidence band for the diagram of a sample, as JSON.
    Band {
        input: PathBuf,
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Intrinsic dimension of the sampled set.
        #[arg(long = "d", default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = DEFAULT_BANDWIDTH)]
        h: f64,
        #[arg(long = "grid-res", default_value_t = DEFAULT_GRID_RES)]
        grid_res: usize,
        /// Subsample size.
        #[arg(long = "b")]
        b: Option<usize>,
        /// Subsample replicates.
        #[arg(long, default_value_t = DEFAULT_SUBSAMPLE_REPS)]
        reps: usize,
        /// Bootstrap replicates.
        #[arg(long = "B", default_value_t = DEFAULT_BOOTSTRAP_REPS)]
        bootstrap: usize,
        #[arg(long)]
        split: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split a diagram into signal and noise with a band.
    Classify {
        diagram: PathBuf,
        band: PathBuf,
        /// Also count points farther than this Euclidean distance from the
        /// diagonal.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Run one of the bundled examples end to end.
    Experiment {
        /// ex4_1, ex4_2, ex4_3, ex4_4 or bart.
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long = "grid-res")]
        grid_res: Option<usize>,
        #[arg(long = "b")]
        b: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long = "B", default_value_t = DEFAULT_BOOTSTRAP_REPS)]
        bootstrap: usize,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        split: bool,
        #[arg(long = "max-dim", default_value_t = 2)]
        max_dim: usize,
        #[arg(long = "max-scale", default_value_t = f64::INFINITY)]
        max_scale: f64,
    },
}

fn read_cloud(path: &Path) -> Result<PointCloud> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    PointCloud::read_csv(BufReader::new(file)).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn read_diagram(path: &Path) -> Result<PersistenceDiagram> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    PersistenceDiagram::read_csv(BufReader::new(file)).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn read_band(path: &Path) -> Result<BandResult> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    BandResult::from_json(&text).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes to `path`, or to stdout without one.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => io::stdout().write_all(bytes).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn pair_json(p: &PersistencePair) -> Value {
    json!({ "dim": p.dim, "birth": number(p.birth), "death": number(p.death) })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::config(format!("--alpha must lie in (0, 1), got {alpha}")))
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { kind, n, seed, out } => {
            let cloud = generate(&GeneratorSpec::parse(&kind, n, seed)?)?;
            let mut buf = Vec::new();
            cloud.write_csv(&mut buf)?;
            emit(out.as_deref(), &buf)
        }
        Command::Diagram {
            input,
            kind,
            max_dim,
            max_scale,
            h,
            grid_res,
            out,
            plot,
        } => {
            let cloud = read_cloud(&input)?;
            let diagram = match kind.as_str() {
                "rips" => rips_diagram(&cloud, max_scale, max_dim)?,
                "density" => {
                    let opts = BandOptions {
                        h,
                        grid_res,
                        ..BandOptions::default()
                    };
                    density_diagram(&kde(&cloud, &opts.kernel(cloud.dim())?, &opts.grid(&cloud)?)?)?
                }
                other => return Err(CliError::config(format!("unknown diagram kind {other:?}"))),
            };
            let mut buf = Vec::new();
            diagram.write_csv(&mut buf)?;
            emit(out.as_deref(), &buf)?;
            if let Some(p) = &plot {
                let title = format!("{kind} diagram, {} points", cloud.len());
                emit(Some(p), svg::diagram_svg(&diagram, &[], &title).as_bytes())?;
            }
            if out.is_some() {
                let mut meta = json!({
                    "kind": kind,
                    "n": cloud.len(),
                    "ambient_dim": cloud.dim(),
                    "max_dim": max_dim,
                    "max_scale": number(max_scale),
                    "pairs": diagram.len(),
                });
                if kind == "density" {
                    meta["h"] = json!(h);
                    meta["grid_res"] = json!(grid_res);
                }
                emit(None, format!("{}\n", serde_json::to_string(&meta)?).as_bytes())?;
            }
            Ok(())
        }
        Command::Band {
            input,
            method,
            alpha,
            seed,
            d,
            h,
            grid_res,
            b,
            reps,
            bootstrap,
            split,
            out,
        } => {
            check_alpha(alpha)?;
            let mut method: Method = method.parse().map_err(|e: tdaband::Error| CliError::config(e.to_string()))?;
            if split {
                method = split_variant(method)?;
            }
            let cloud = read_cloud(&input)?;
            let opts = BandOptions {
                alpha,
                seed,
                intrinsic_dim: d,
                h,
                grid_res,
                subsample_size: b,
                subsample_reps: reps,
                bootstrap_reps: bootstrap,
            };
            let band = compute_band(method, &cloud, &opts)?;
            emit(out.as_deref(), (band.to_json()? + "\n").as_bytes())
        }
        Command::Classify {
            diagram,
            band,
            threshold,
            out,
            plot,
        } => {
            let d = read_diagram(&diagram)?;
            let band = read_band(&band)?;
            let s = classify(&d, band.c);
            let dims = d.max_dim().map_or(1, |m| m + 1);
            let significant: BTreeMap<String, usize> = (0..dims).map(|k| (format!("H{k}"), s.signal_in(k))).collect();
            let mut report = json!({
                "method": band.method.name(),
                "alpha": band.alpha,
                "c": band.c,
                "significant": significant,
                "signal": s.signal.iter().map(pair_json).collect::<Vec<_>>(),
                "noise": s.noise.len(),
            });
            if let Some(t) = threshold {
                if !(t >= 0.0) {
                    return Err(CliError::config(format!("--threshold must be non-negative, got {t}")));
                }
                report["count_beyond"] = json!({ "threshold": t, "count": count_beyond(&d, t) });
            }
            if let Some(p) = &plot {
                let bands = [(band.method.name().to_string(), band.c)];
                emit(Some(p), svg::diagram_svg(&d, &bands, "classified diagram").as_bytes())?;
            }
            emit(out.as_deref(), (serde_json::to_string_pretty(&report)? + "\n").as_bytes())
        }
        Command::Experiment {
            name,
            seed,
            out,
            alpha,
            n,
            h,
            grid_res,
            b,
            reps,
            bootstrap,
            threshold,
            split,
            max_dim,
            max_scale,
        } => {
            check_alpha(alpha)?;
            let experiment: Experiment = name.parse()?;
            let settings = Settings {
                seed,
                alpha,
                n,
                h,
                grid_res,
                subsample_size: b,
                subsample_reps: reps,
                bootstrap_reps: bootstrap,
                threshold,
                split,
                max_dim,
                max_scale,
            };
            let summary = experiment::run(experiment, &settings, Some(&out))?;
            emit(None, (serde_json::to_string_pretty(&summary)? + "\n").as_bytes())
        }
    }
}
