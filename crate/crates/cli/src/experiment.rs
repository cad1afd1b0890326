//! End-to-end runs on the synthetic examples: sample, diagrams, bands,
//! significant features, plots and a JSON summary.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use tdaband::confidence::{significant_features, BandResult, Method};
use tdaband::datasets::{generate, GeneratorSpec};
use tdaband::density::{density_diagram, kde, DEFAULT_BOOTSTRAP_REPS, DEFAULT_GRID_RES};
use tdaband::pointprocess::{bootstrap_count_ci, bootstrap_smoothed, default_window, SmoothedDiagram};
use tdaband::resample::split_halves;
use tdaband::{rips_diagram, GridField, PersistenceDiagram, PointCloud};

use crate::bands::{compute_band, split_variant, BandOptions, DEFAULT_ALPHA, DEFAULT_BANDWIDTH};
use crate::error::{CliError, Result};
use crate::svg;

/// Bandwidth of the one-dimensional mixture example.
pub const BART_BANDWIDTH: f64 = 0.05;
/// Grid points for the one-dimensional example; the default 2-D grid is
/// far coarser than its bandwidth.
pub const BART_GRID_RES: usize = 512;
/// Euclidean distance to the diagonal beyond which points are counted.
pub const BART_THRESHOLD: f64 = 0.34;
const SMOOTHING_CELLS: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Ex4_1,
    Ex4_2,
    Ex4_3,
    Ex4_4,
    Bart,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Ex4_1,
        Experiment::Ex4_2,
        Experiment::Ex4_3,
        Experiment::Ex4_4,
        Experiment::Bart,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Ex4_1 => "ex4_1",
            Experiment::Ex4_2 => "ex4_2",
            Experiment::Ex4_3 => "ex4_3",
            Experiment::Ex4_4 => "ex4_4",
            Experiment::Bart => "bart",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::config(format!("unknown experiment {s:?}")))
    }
}

/// Overrides for the documented defaults of each experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub alpha: f64,
    pub n: Option<usize>,
    pub h: Option<f64>,
    pub grid_res: Option<usize>,
    pub subsample_size: Option<usize>,
    pub subsample_reps: Option<usize>,
    pub bootstrap_reps: usize,
    pub threshold: Option<f64>,
    pub split: bool,
    pub max_dim: usize,
    pub max_scale: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: 0,
            alpha: DEFAULT_ALPHA,
            n: None,
            h: None,
            grid_res: None,
            subsample_size: None,
            subsample_reps: None,
            bootstrap_reps: DEFAULT_BOOTSTRAP_REPS,
            threshold: None,
            split: false,
            max_dim: 2,
            max_scale: f64::INFINITY,
        }
    }
}

/// One sample and the pipelines run on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub label: String,
    pub spec: GeneratorSpec,
    pub rips_methods: Vec<Method>,
    pub density_methods: Vec<Method>,
    pub options: BandOptions,
    pub count_threshold: Option<f64>,
}

pub fn cases(experiment: Experiment, settings: &Settings) -> Result<Vec<Case>> {
    use Method::*;
    let rips_split = |methods: Vec<Method>| -> Result<Vec<Method>> {
        if settings.split {
            methods
                .into_iter()
                .map(|m| match m {
                    Concentration | Shells => split_variant(m),
                    m => Ok(m),
                })
                .collect()
        } else {
            Ok(methods)
        }
    };
    let density_all = vec![DensityHoeffding, DensityGrid, DensityBootstrap];
    let case = |label: &str, kind: &str, n: usize, rips: Vec<Method>, density: Vec<Method>| -> Result<Case> {
        let n = settings.n.unwrap_or(n);
        Ok(Case {
            label: label.to_string(),
            spec: GeneratorSpec::parse(kind, n, settings.seed)?,
            rips_methods: rips_split(rips)?,
            density_methods: density,
            options: BandOptions {
                alpha: settings.alpha,
                seed: settings.seed,
                intrinsic_dim: 1,
                h: settings.h.unwrap_or(DEFAULT_BANDWIDTH),
                grid_res: settings.grid_res.unwrap_or(DEFAULT_GRID_RES),
                subsample_size: settings.subsample_size,
                subsample_reps: settings.subsample_reps.unwrap_or(BandOptions::default().subsample_reps),
                bootstrap_reps: settings.bootstrap_reps,
            },
            count_threshold: None,
        })
    };
    Ok(match experiment {
        Experiment::Ex4_1 => vec![case(
            "uniform_circle",
            "uniform_circle",
            500,
            vec![Subsample, Concentration],
            density_all,
        )?],
        Experiment::Ex4_2 => vec![case(
            "truncated_normal_circle",
            "truncated_normal_circle",
            1000,
            vec![Subsample, Concentration, Shells],
            density_all,
        )?],
        Experiment::Ex4_3 => vec![case(
            "eyeglasses",
            "eyeglasses",
            1000,
            vec![Subsample, Concentration],
            density_all,
        )?],
        Experiment::Ex4_4 => vec![
            case(
                "uniform_circle_outliers",
                "uniform_circle+outliers",
                500,
                vec![Subsample, Concentration],
                density_all.clone(),
            )?,
            case(
                "eyeglasses_outliers",
                "eyeglasses+outliers",
                1000,
                vec![Subsample, Concentration],
                density_all,
            )?,
        ],
        Experiment::Bart => {
            let mut c = case("bart_simpson", "bart_simpson", 1000, vec![], vec![DensityBootstrap])?;
            c.options.h = settings.h.unwrap_or(BART_BANDWIDTH);
            c.options.grid_res = settings.grid_res.unwrap_or(BART_GRID_RES);
            c.count_threshold = Some(settings.threshold.unwrap_or(BART_THRESHOLD));
            vec![c]
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub pipeline: &'static str,
    pub c: f64,
    /// Signal points per homological dimension, keyed `H0`, `H1`, ...
    pub significant: BTreeMap<String, usize>,
}

impl MethodSummary {
    pub fn significant_in(&self, dim: usize) -> usize {
        self.significant.get(&format!("H{dim}")).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountSummary {
    pub threshold: f64,
    pub alpha: f64,
    pub reps: usize,
    pub observed: usize,
    pub lo: usize,
    pub hi: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseSummary {
    pub label: String,
    pub data: String,
    pub n: usize,
    pub methods: BTreeMap<String, MethodSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<CountSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub seed: u64,
    pub alpha: f64,
    pub cases: Vec<CaseSummary>,
}

/// Everything computed for one case.
#[derive(Debug, Clone)]
pub struct CaseRun {
    pub summary: CaseSummary,
    pub cloud: PointCloud,
    pub rips: Option<PersistenceDiagram>,
    /// Diagram of the half that split bands apply to.
    pub rips_second_half: Option<PersistenceDiagram>,
    pub density_field: Option<GridField>,
    pub density: Option<PersistenceDiagram>,
    pub bands: Vec<BandResult>,
    pub smoothed: Option<SmoothedDiagram>,
}

fn significant_counts(diagram: &PersistenceDiagram, band: &BandResult, max_dim: usize) -> BTreeMap<String, usize> {
    let s = significant_features(diagram, band);
    (0..max_dim.max(1)).map(|d| (format!("H{d}"), s.signal_in(d))).collect()
}

pub fn run_case(case: &Case, settings: &Settings) -> Result<CaseRun> {
    let cloud = generate(&case.spec)?;
    let opts = &case.options;
    let mut methods = BTreeMap::new();
    let mut bands = Vec::new();

    let rips = if case.rips_methods.is_empty() {
        None
    } else {
        Some(rips_diagram(&cloud, settings.max_scale, settings.max_dim)?)
    };
    let needs_half = case
        .rips_methods
        .iter()
        .any(|m| matches!(m, Method::ConcentrationSplit | Method::ShellsSplit));
    let rips_second_half = if needs_half {
        let (_, second) = split_halves(opts.seed, cloud.len());
        Some(rips_diagram(&cloud.select(&second), settings.max_scale, settings.max_dim)?)
    } else {
        None
    };
    for &m in &case.rips_methods {
        let band = compute_band(m, &cloud, opts)?;
        let diagram = match m {
            Method::ConcentrationSplit | Method::ShellsSplit => rips_second_half.as_ref(),
            _ => rips.as_ref(),
        }
        .expect("rips diagram computed");
        methods.insert(
            m.name().to_string(),
            MethodSummary {
                pipeline: "rips",
                c: band.c,
                significant: significant_counts(diagram, &band, settings.max_dim),
            },
        );
        bands.push(band);
    }

    let (density_field, density) = if case.density_methods.is_empty() && case.count_threshold.is_none() {
        (None, None)
    } else {
        let field = kde(&cloud, &opts.kernel(cloud.dim())?, &opts.grid(&cloud)?)?;
        let diagram = density_diagram(&field)?;
        (Some(field), Some(diagram))
    };
    for &m in &case.density_methods {
        let band = compute_band(m, &cloud, opts)?;
        let diagram = density.as_ref().expect("density diagram computed");
        methods.insert(
            m.name().to_string(),
            MethodSummary {
                pipeline: "density",
                c: band.c,
                significant: significant_counts(diagram, &band, settings.max_dim.min(cloud.dim())),
            },
        );
        bands.push(band);
    }

    let (count, smoothed) = match (case.count_threshold, density.as_ref()) {
        (Some(threshold), Some(diagram)) => {
            let kernel = opts.kernel(cloud.dim())?;
            let grid = opts.grid(&cloud)?;
            let ci = bootstrap_count_ci(&cloud, &kernel, &grid, threshold, opts.alpha, opts.bootstrap_reps, opts.seed)?;
            let window = default_window(diagram);
            let side = (window.1 - window.0) / SMOOTHING_CELLS;
            let smoothed = bootstrap_smoothed(&cloud, &kernel, &grid, side, window, opts.bootstrap_reps, opts.seed)?;
            (
                Some(CountSummary {
                    threshold,
                    alpha: opts.alpha,
                    reps: opts.bootstrap_reps,
                    observed: ci.observed,
                    lo: ci.lo,
                    hi: ci.hi,
                }),
                Some(smoothed),
            )
        }
        _ => (None, None),
    };

    Ok(CaseRun {
        summary: CaseSummary {
            label: case.label.clone(),
            data: case.spec.to_string(),
            n: cloud.len(),
            methods,
            count,
        },
        cloud,
        rips,
        rips_second_half,
        density_field,
        density,
        bands,
        smoothed,
    })
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> tdaband::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    write(path, buf)
}

fn band_labels(bands: &[BandResult], density: bool) -> Vec<(String, f64)> {
    bands
        .iter()
        .filter(|b| b.method.is_density() == density)
        .map(|b| (b.method.name().to_string(), b.c))
        .collect()
}

/// Writes the artifacts of one case into `dir`, prefixed by its label.
pub fn write_case(run: &CaseRun, dir: &Path) -> Result<()> {
    let label = &run.summary.label;
    let file = |suffix: &str| dir.join(format!("{label}_{suffix}"));
    csv(&file("points.csv"), |w| run.cloud.write_csv(w))?;
    match (&run.density_field, run.cloud.dim()) {
        (Some(field), 1) => {
            let xs: Vec<f64> = field.geometry().coordinates();
            write(&file("sample.svg"), svg::curve_svg(&xs, field.values(), label))?;
        }
        _ => write(&file("sample.svg"), svg::points_svg(&run.cloud, label))?,
    }
    if let Some(d) = &run.rips {
        csv(&file("rips.csv"), |w| d.write_csv(w))?;
        let title = format!("{label}: Rips diagram");
        write(&file("rips.svg"), svg::diagram_svg(d, &band_labels(&run.bands, false), &title))?;
    }
    if let Some(d) = &run.rips_second_half {
        csv(&file("rips_second_half.csv"), |w| d.write_csv(w))?;
    }
    if let Some(field) = &run.density_field {
        csv(&file("kde.csv"), |w| field.write_csv(w))?;
    }
    if let Some(d) = &run.density {
        csv(&file("density.csv"), |w| d.write_csv(w))?;
        let title = format!("{label}: density diagram");
        write(&file("density.svg"), svg::diagram_svg(d, &band_labels(&run.bands, true), &title))?;
    }
    if let Some(s) = &run.smoothed {
        csv(&file("smoothed.csv"), |w| s.write_csv(w))?;
        write(&file("smoothed.svg"), svg::smoothed_svg(s, &format!("{label}: bootstrap smoothed diagram")))?;
    }
    write(&file("bands.json"), serde_json::to_string_pretty(&run.bands)? + "\n")?;
    Ok(())
}

/// Runs every case of `experiment`; writes artifacts and `summary.json`
/// into `out` when given.
pub fn run(experiment: Experiment, settings: &Settings, out: Option<&Path>) -> Result<Summary> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    let mut summaries = Vec::new();
    for case in cases(experiment, settings)? {
        let run = run_case(&case, settings)?;
        if let Some(dir) = out {
            write_case(&run, dir)?;
        }
        summaries.push(run.summary);
    }
    let summary = Summary {
        experiment: experiment.name().to_string(),
        seed: settings.seed,
        alpha: settings.alpha,
        cases: summaries,
    };
    if let Some(dir) = out {
        write(&dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    }
    Ok(summary)
}
