//! Pipeline stages shared by the subcommands: sample generation,
//! reconstruction of a height map into a primitive scene, and scoring.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use roofprim::decompose::Decomposition;
use roofprim::fit::SectionFit;
use roofprim::grid::{BinaryMask, HeightGrid, LabelGrid, GROUND};
use roofprim::mesh::{dense_triangulation_faces, SceneModel};
use roofprim::primitives::PrototypeSet;
use roofprim::rng::subseed;
use roofprim::sim::BuildingModel;
use roofprim::{geom::Rect, EvalScores};

use crate::config::PipelineConfig;

const SEED_TILES: u64 = 0x711E5;
const SEED_SELECT: u64 = 0x5E1EC7;
const SEED_ROOFS: u64 = 0x400F5;
const SEED_STEREO: u64 = 0x57E2E0;

pub struct Sample {
    pub model: BuildingModel<f64>,
    pub ideal: HeightGrid<f64>,
    pub mask: BinaryMask,
    pub labels: LabelGrid,
    pub noisy: HeightGrid<f64>,
}

/// Generate one building sample; seeds are redrawn (deterministically)
/// until the merged section count lands in the configured range.
pub fn generate_sample(config: &PipelineConfig, index: u64) -> anyhow::Result<Sample> {
    let s = &config.simulation;
    let sample_seed = subseed(config.seed, &[0x5A3917E, index]);
    let region = Rect::new((0.0, 0.0), (s.region_size, s.region_size));
    let mut chosen = None;
    for attempt in 0..256u64 {
        let tiles = roofprim::partition_region(
            &region,
            s.min_side,
            s.max_depth,
            subseed(sample_seed, &[SEED_TILES, attempt]),
        );
        let kept = roofprim::select_building_rects(
            &tiles,
            s.keep_fraction,
            subseed(sample_seed, &[SEED_SELECT, attempt]),
        )?;
        let merged = roofprim::merge_rects(&kept)?;
        if (s.min_sections..=s.max_sections).contains(&merged.len()) {
            chosen = Some((merged, attempt));
            break;
        }
    }
    let Some((rects, attempt)) = chosen else {
        bail!("no seed produced a building with {}..={} sections", s.min_sections, s.max_sections);
    };
    let model = roofprim::assign_roofs(
        &rects,
        (s.height_min, s.height_max),
        subseed(sample_seed, &[SEED_ROOFS, attempt]),
    )?;
    let (ideal, mask, labels) = roofprim::rasterize_ideal(&model, s.cell_size, s.padding)?;
    let mut stereo = config.stereo;
    stereo.seed = subseed(sample_seed, &[SEED_STEREO]);
    let noisy = roofprim::corrupt(&ideal, &labels, &stereo);
    Ok(Sample {
        model,
        ideal,
        mask,
        labels,
        noisy,
    })
}

pub fn sample_dir_name(index: u64) -> String {
    format!("sample_{index:04}")
}

pub fn write_sample(dir: &Path, sample: &Sample) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    roofprim::write_grid(&sample.ideal, dir.join("ideal.asc"))?;
    roofprim::write_grid(&sample.noisy, dir.join("noisy.asc"))?;
    let cell = sample.ideal.cell_size;
    let origin = sample.ideal.origin;
    roofprim::write_mask(&sample.mask, cell, origin, dir.join("mask.asc"))?;
    roofprim::write_labels(&sample.labels, cell, origin, dir.join("labels.asc"))?;
    write_json(&dir.join("model.json"), &sample.model)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MeshCounts {
    pub vertices: usize,
    pub faces: usize,
    pub dense_faces: usize,
    pub face_ratio: f64,
}

pub struct Reconstruction {
    pub datum: f64,
    pub decomposition: Decomposition<f64>,
    pub fits: Vec<SectionFit<f64>>,
    pub scene: SceneModel<f64>,
}

/// Datum estimation, cascading decomposition with gap fill, per-section
/// classification and CPD fitting, scene assembly.
pub fn reconstruct_grid(
    grid: &HeightGrid<f64>,
    config: &PipelineConfig,
    prototypes: &PrototypeSet<f64>,
) -> anyhow::Result<Reconstruction> {
    let datum = roofprim::estimate_datum(grid, config.decompose.datum_percentile)?;
    let mask = roofprim::building_mask_from_grid(grid, datum, &config.decompose);
    let decomp = roofprim::cascade_decompose(grid, &mask, &config.decompose)?;
    let decomp = roofprim::fill_gaps(&decomp, &mask, grid);

    let mut fits = Vec::new();
    for (si, proposal) in decomp.sections.iter().enumerate() {
        let cells = BinaryMask::from_fn(mask.width, mask.height, |c, r| {
            decomp.assignment.get(c, r) == si as u32
        });
        if cells.is_empty() {
            continue;
        }
        // boundary cells carry smeared elevations; prefer the eroded core
        let eroded = cells.erode(1);
        let use_mask = if eroded.count() >= 9 { eroded } else { cells };
        let cloud = roofprim::grid_to_points(grid, &use_mask)?;
        match roofprim::fit_section(&cloud, datum, prototypes, &config.cpd, &config.fit) {
            Ok(mut fit) => {
                // the decomposition rectangle is the footprint authority
                // (the fitting cloud was eroded); fold the fitted variant
                // into the rectangle's frame before swapping footprints
                let quarter_turns = ((fit.section.footprint.angle_deg
                    - proposal.rect.angle_deg)
                    / 90.0)
                    .round()
                    .rem_euclid(4.0) as u8;
                let folded = fit.section.roof.primitive_type.rotated(quarter_turns);
                fit.section.roof = roofprim::primitives::RoofSpec::new(
                    folded,
                    fit.section.roof.eave_height,
                    fit.section.roof.ridge_height,
                );
                fit.section.footprint = proposal.rect;
                fit.fit_error = roofprim::roof_fit_error(&cloud, &fit.section, datum);
                fits.push(fit);
            }
            Err(roofprim::Error::FitFailed(msg)) => {
                bail!("section {si}: all fits failed: {msg}")
            }
            Err(e) => return Err(e.into()),
        }
    }
    if fits.is_empty() {
        bail!("no section could be fitted");
    }
    let scene = SceneModel {
        sections: fits.iter().map(|f| f.section.clone()).collect(),
        datum,
    };
    Ok(Reconstruction {
        datum,
        decomposition: decomp,
        fits,
        scene,
    })
}

pub fn write_reconstruction(
    dir: &Path,
    grid: &HeightGrid<f64>,
    rec: &Reconstruction,
) -> anyhow::Result<MeshCounts> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(&dir.join("decomposition.json"), &rec.decomposition)?;
    roofprim::write_labels(
        &rec.decomposition.assignment,
        grid.cell_size,
        grid.origin,
        dir.join("assignment.asc"),
    )?;
    write_json(&dir.join("sections.json"), &rec.fits)?;
    write_json(&dir.join("scene.json"), &rec.scene)?;
    let mesh = roofprim::assemble_scene(&rec.scene)?;
    let (vertices, faces) = roofprim::write_mesh_obj(&mesh, dir.join("scene.obj"))?;
    let dense = dense_triangulation_faces(grid);
    let counts = MeshCounts {
        vertices,
        faces,
        dense_faces: dense,
        face_ratio: faces as f64 / dense as f64,
    };
    write_json(&dir.join("counts.json"), &counts)?;
    Ok(counts)
}

/// Ground truth of one sample as stored on disk.
pub struct TruthFiles {
    pub ideal: HeightGrid<f64>,
    pub mask: BinaryMask,
    pub model: BuildingModel<f64>,
}

pub fn read_truth(dir: &Path) -> anyhow::Result<TruthFiles> {
    let ideal = roofprim::read_grid(dir.join("ideal.asc"))?;
    let (mask, _, _) = roofprim::read_mask(dir.join("mask.asc"))?;
    let model: BuildingModel<f64> = read_json(&dir.join("model.json"))?;
    Ok(TruthFiles { ideal, mask, model })
}

/// Prediction scene: `scene.json` when present, otherwise the ground-truth
/// model converted to a scene (so a truth directory evaluates against
/// itself with perfect scores).
pub fn read_pred_scene(dir: &Path) -> anyhow::Result<SceneModel<f64>> {
    let scene_path = dir.join("scene.json");
    if scene_path.exists() {
        read_json(&scene_path)
    } else {
        let model: BuildingModel<f64> = read_json(&dir.join("model.json"))?;
        Ok(model.to_scene())
    }
}

pub fn score_pair(
    scene: &SceneModel<f64>,
    truth: &TruthFiles,
    voxel: f64,
) -> anyhow::Result<EvalScores> {
    let pred_mask = roofprim::project_to_2d(scene, &truth.ideal);
    let (c2, r2, j2) = roofprim::scores_2d(&pred_mask, &truth.mask)?;
    let (c3, r3, j3) =
        roofprim::scores_3d(scene, &truth.ideal, &truth.mask, truth.model.datum, voxel)?;
    let scores = EvalScores {
        completeness_2d: c2,
        correctness_2d: r2,
        jaccard_2d: j2,
        completeness_3d: c3,
        correctness_3d: r3,
        jaccard_3d: j3,
    };
    scores.validate()?;
    Ok(scores)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SampleReport {
    pub scores: EvalScores,
    /// Truth building area in cells (the aggregation weight).
    pub area_cells: usize,
    /// Section counts, when the prediction came from a reconstruction.
    #[serde(default)]
    pub sections_predicted: Option<usize>,
    #[serde(default)]
    pub sections_truth: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub samples: BTreeMap<String, SampleReport>,
    pub aggregate: EvalScores,
}

/// Area-weighted mean over per-sample scores.
pub fn aggregate(samples: &BTreeMap<String, SampleReport>) -> EvalScores {
    let mut acc = [0.0f64; 6];
    let mut weight = 0.0f64;
    for report in samples.values() {
        let w = report.area_cells as f64;
        let s = &report.scores;
        for (slot, v) in acc.iter_mut().zip([
            s.completeness_2d,
            s.correctness_2d,
            s.jaccard_2d,
            s.completeness_3d,
            s.correctness_3d,
            s.jaccard_3d,
        ]) {
            *slot += w * v;
        }
        weight += w;
    }
    if weight == 0.0 {
        weight = 1.0;
    }
    EvalScores {
        completeness_2d: acc[0] / weight,
        correctness_2d: acc[1] / weight,
        jaccard_2d: acc[2] / weight,
        completeness_3d: acc[3] / weight,
        correctness_3d: acc[4] / weight,
        jaccard_3d: acc[5] / weight,
    }
}

/// Sample directories (named `sample_*`) under a root, sorted.
pub fn sample_ids(root: &Path) -> anyhow::Result<Vec<String>> {
    let mut ids = Vec::new();
    for entry in
        fs::read_dir(root).with_context(|| format!("reading {}", root.display()))?
    {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().to_string();
        if entry.file_type()?.is_dir() && name.starts_with("sample_") {
            ids.push(name);
        }
    }
    ids.sort();
    Ok(ids)
}

/// Consistency checks on a generated sample (used by `simulate
/// --self-check`).
pub fn self_check(config: &PipelineConfig, sample: &Sample, index: u64) -> anyhow::Result<()> {
    let s = &config.simulation;
    sample.model.validate()?;
    // partition exactness on a fresh tiling with this sample's seed stream
    let region = Rect::new((0.0, 0.0), (s.region_size, s.region_size));
    let sample_seed = subseed(config.seed, &[0x5A3917E, index]);
    let tiles =
        roofprim::partition_region(&region, s.min_side, s.max_depth, subseed(sample_seed, &[SEED_TILES, 0]));
    let total: f64 = tiles.iter().map(|t| t.area()).sum();
    if (total - region.area()).abs() > 1e-9 * region.area() {
        bail!("partition does not preserve area");
    }
    // merge idempotence on the model's own footprints
    let rects: Vec<Rect<f64>> = sample.model.sections.iter().map(|x| x.footprint).collect();
    let merged = roofprim::merge_rects(&rects)?;
    if merged.len() != rects.len() {
        bail!("model footprints are not merge-normal");
    }
    // mask and labels agree
    for r in 0..sample.mask.height {
        for c in 0..sample.mask.width {
            let masked = sample.mask.get(c, r);
            let labeled = sample.labels.get(c, r) != GROUND;
            if masked != labeled {
                bail!("mask/label mismatch at ({c},{r})");
            }
        }
    }
    // determinism: regeneration reproduces the model exactly
    let again = generate_sample(config, index)?;
    if serde_json::to_string(&again.model)? != serde_json::to_string(&sample.model)? {
        bail!("regeneration changed the model");
    }
    if again.noisy.values != sample.noisy.values {
        bail!("regeneration changed the noisy grid");
    }
    Ok(())
}
