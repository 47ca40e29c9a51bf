//! `roofprim`: simulate building height maps, decompose them into
//! rectangular sections, fit roof primitives, export compact meshes and
//! score reconstructions.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use roofprim::primitives::PrototypeSet;
use roofprim_cli::commands::{self, *};
use roofprim_cli::config::PipelineConfig;

#[derive(Parser)]
#[command(name = "roofprim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// JSON config file (defaults are used when omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted-path overrides, e.g. --set stereo.sigma_height=0.0
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides the config's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sample-level parallelism (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic building samples (grids, masks, labels, model).
    Simulate {
        #[command(flatten)]
        common: ConfigArgs,
        /// Number of samples.
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Run generator invariant checks on every sample.
        #[arg(long)]
        self_check: bool,
    },
    /// Decompose a height map into rectangular sections.
    Decompose {
        #[command(flatten)]
        common: ConfigArgs,
        /// Input ASCII grid.
        #[arg(long)]
        grid: PathBuf,
    },
    /// Classify and fit a roof primitive to one point cloud (ASCII PLY).
    Fit {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        cloud: PathBuf,
        /// Terrain datum elevation the cloud is referenced to.
        #[arg(long, default_value_t = 0.0)]
        datum: f64,
    },
    /// Full reconstruction of one height map: decompose, fit, mesh.
    Reconstruct {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        grid: PathBuf,
    },
    /// Score predicted scenes against ground-truth samples.
    Evaluate {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// simulate -> reconstruct -> evaluate in one run.
    Pipeline {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Reconstruct from the ideal grid instead of the noisy one.
        #[arg(long)]
        noise_free: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify_exit(&err))
        }
    }
}

/// 2 for input/config problems, 1 for processing failures.
fn classify_exit(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<roofprim::Error>() {
            return match e {
                roofprim::Error::Parse { .. }
                | roofprim::Error::Invalid(_)
                | roofprim::Error::Io { .. } => 2,
                _ => 1,
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some()
            || cause.downcast_ref::<std::io::Error>().is_some()
        {
            return 2;
        }
    }
    let text = format!("{err:#}");
    if text.contains("config") || text.contains("reading") || text.contains("parsing") {
        2
    } else {
        1
    }
}

fn setup(common: &ConfigArgs) -> anyhow::Result<PipelineConfig> {
    let mut config = PipelineConfig::load(common.config.as_deref(), &common.set)?;
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    if common.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(common.jobs)
            .build_global()
            .ok();
    }
    Ok(config)
}

fn build_prototypes(config: &PipelineConfig) -> anyhow::Result<PrototypeSet<f64>> {
    Ok(PrototypeSet::build(config.prototypes.points, config.prototypes.seed)?)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate {
            common,
            count,
            self_check,
        } => {
            let config = setup(&common)?;
            let results: Vec<anyhow::Result<()>> = (0..count)
                .into_par_iter()
                .map(|i| {
                    let sample = generate_sample(&config, i)?;
                    write_sample(&config.output_dir.join(sample_dir_name(i)), &sample)?;
                    if self_check {
                        commands::self_check(&config, &sample, i)
                            .with_context(|| format!("self-check failed for sample {i}"))?;
                    }
                    Ok(())
                })
                .collect();
            results.into_iter().collect::<anyhow::Result<Vec<()>>>()?;
            println!("wrote {count} samples to {}", config.output_dir.display());
            Ok(())
        }
        Command::Decompose { common, grid } => {
            let config = setup(&common)?;
            let g: roofprim::HeightGrid = roofprim::read_grid(&grid)?;
            let datum = roofprim::estimate_datum(&g, config.decompose.datum_percentile)?;
            let mask = roofprim::building_mask_from_grid(&g, datum, &config.decompose);
            let decomp = roofprim::cascade_decompose(&g, &mask, &config.decompose)?;
            let decomp = roofprim::fill_gaps(&decomp, &mask, &g);
            std::fs::create_dir_all(&config.output_dir)?;
            write_json(&config.output_dir.join("decomposition.json"), &decomp)?;
            roofprim::write_labels(
                &decomp.assignment,
                g.cell_size,
                g.origin,
                config.output_dir.join("assignment.asc"),
            )?;
            println!(
                "decomposed into {} sections (residual {:.4})",
                decomp.sections.len(),
                decomp.residual_fraction
            );
            Ok(())
        }
        Command::Fit {
            common,
            cloud,
            datum,
        } => {
            let config = setup(&common)?;
            let c: roofprim::PointCloud = roofprim::read_ply(&cloud)?;
            let prototypes = build_prototypes(&config)?;
            let fit = roofprim::fit_section(&c, datum, &prototypes, &config.cpd, &config.fit)?;
            std::fs::create_dir_all(&config.output_dir)?;
            write_json(&config.output_dir.join("fit.json"), &fit)?;
            println!(
                "fitted {:?} (fit_error {:.4} m, base {:.2} m)",
                fit.section.roof.primitive_type, fit.fit_error, fit.base_height
            );
            Ok(())
        }
        Command::Reconstruct { common, grid } => {
            let config = setup(&common)?;
            let g: roofprim::HeightGrid = roofprim::read_grid(&grid)?;
            let prototypes = build_prototypes(&config)?;
            let rec = reconstruct_grid(&g, &config, &prototypes)?;
            let counts = write_reconstruction(&config.output_dir, &g, &rec)?;
            println!(
                "reconstructed {} sections; mesh {} vertices / {} faces ({:.4}% of dense)",
                rec.scene.sections.len(),
                counts.vertices,
                counts.faces,
                100.0 * counts.face_ratio
            );
            Ok(())
        }
        Command::Evaluate {
            common,
            pred,
            truth,
        } => {
            let config = setup(&common)?;
            let report = evaluate_dirs(&pred, &truth, &config)?;
            std::fs::create_dir_all(&config.output_dir)?;
            write_json(&config.output_dir.join("report.json"), &report)?;
            let a = &report.aggregate;
            println!(
                "2D completeness {:.3} correctness {:.3} jaccard {:.3} | 3D completeness {:.3} correctness {:.3} jaccard {:.3}",
                a.completeness_2d, a.correctness_2d, a.jaccard_2d,
                a.completeness_3d, a.correctness_3d, a.jaccard_3d
            );
            Ok(())
        }
        Command::Pipeline {
            common,
            count,
            noise_free,
        } => {
            let config = setup(&common)?;
            let prototypes = build_prototypes(&config)?;
            let results: Vec<anyhow::Result<(String, SampleReport, MeshCounts)>> = (0..count)
                .into_par_iter()
                .map(|i| {
                    let sample = generate_sample(&config, i)?;
                    let dir = config.output_dir.join(sample_dir_name(i));
                    write_sample(&dir, &sample)?;
                    let input = if noise_free { &sample.ideal } else { &sample.noisy };
                    let rec = reconstruct_grid(input, &config, &prototypes)
                        .with_context(|| format!("reconstructing sample {i}"))?;
                    let counts = write_reconstruction(&dir, input, &rec)?;
                    let truth = TruthFiles {
                        ideal: sample.ideal,
                        mask: sample.mask,
                        model: sample.model,
                    };
                    let scores = score_pair(&rec.scene, &truth, config.eval_voxel)?;
                    let report = SampleReport {
                        scores,
                        area_cells: truth.mask.count(),
                        sections_predicted: Some(rec.scene.sections.len()),
                        sections_truth: Some(truth.model.sections.len()),
                    };
                    Ok((sample_dir_name(i), report, counts))
                })
                .collect();
            let mut samples = BTreeMap::new();
            let mut worst_ratio = 0.0f64;
            for r in results {
                let (id, report, counts) = r?;
                samples.insert(id, report);
                worst_ratio = worst_ratio.max(counts.face_ratio);
            }
            let report = EvalReport {
                aggregate: aggregate(&samples),
                samples,
            };
            write_json(&config.output_dir.join("report.json"), &report)?;
            let a = &report.aggregate;
            println!(
                "pipeline over {count} samples: 2D jaccard {:.3}, 3D jaccard {:.3}, worst mesh ratio {:.5}",
                a.jaccard_2d, a.jaccard_3d, worst_ratio
            );
            Ok(())
        }
    }
}

fn evaluate_dirs(
    pred: &std::path::Path,
    truth: &std::path::Path,
    config: &PipelineConfig,
) -> anyhow::Result<EvalReport> {
    let pred_ids = sample_ids(pred)?;
    let truth_ids = sample_ids(truth)?;
    if truth_ids.is_empty() {
        bail!("no sample_* directories under {}", truth.display());
    }
    let missing: Vec<&String> = truth_ids.iter().filter(|id| !pred_ids.contains(id)).collect();
    if !missing.is_empty() {
        bail!(
            "prediction directory is missing samples: {}",
            missing
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    let scored: Vec<anyhow::Result<(String, SampleReport)>> = truth_ids
        .par_iter()
        .map(|id| {
            let t = read_truth(&truth.join(id))?;
            let scene = read_pred_scene(&pred.join(id))?;
            let scores = score_pair(&scene, &t, config.eval_voxel)?;
            Ok((
                id.clone(),
                SampleReport {
                    scores,
                    area_cells: t.mask.count(),
                    sections_predicted: Some(scene.sections.len()),
                    sections_truth: Some(t.model.sections.len()),
                },
            ))
        })
        .collect();
    let mut samples = BTreeMap::new();
    for s in scored {
        let (id, report) = s?;
        samples.insert(id, report);
    }
    Ok(EvalReport {
        aggregate: aggregate(&samples),
        samples,
    })
}
