//! Building height-map synthesis, decomposition, roof-primitive fitting
//! and evaluation.
//!
//! The pipeline: simulate ground-truth building models and ideal height
//! maps ([`sim`]), corrupt them like satellite stereo reconstructions
//! ([`stereo`]), decompose a noisy height map into rectangular sections by
//! cascading max-IoU extraction ([`decompose`]), classify and register a
//! roof primitive per section ([`primitives`], [`fit`]), export compact
//! watertight meshes ([`mesh`]) and score the result in 2D and 3D
//! ([`eval`]).
//!
//! All geometry is generic over the scalar type via [`Real`] (`f32` or
//! `f64`); the unqualified type names below are the double-precision
//! aliases the pipeline uses.

pub mod cloud;
pub mod decompose;
pub mod error;
pub mod eval;
pub mod fit;
pub mod geom;
pub mod grid;
pub mod io;
pub mod mesh;
pub mod primitives;
pub mod real;
pub mod rng;
pub mod sim;
pub mod stereo;
pub mod transform;

pub use error::{Error, Result};
pub use real::Real;

pub use cloud::{chamfer_distance, grid_to_points};
pub use decompose::{
    building_mask_from_grid, cascade_decompose, estimate_datum, fill_gaps, propose_section,
    DecomposeParams,
};
pub use eval::{project_to_2d, scene_height_at, scores_2d, scores_3d, scores_3d_mesh, EvalScores};
pub use fit::{cpd_rigid, fit_section, roof_fit_error, CpdParams, FitOptions, RotationMode};
pub use grid::{BinaryMask, LabelGrid, GROUND};
pub use io::{
    read_grid, read_labels, read_mask, read_ply, write_grid, write_labels, write_mask,
    write_mesh_obj, write_ply,
};
pub use mesh::{assemble_scene, dense_triangulation_faces, primitive_mesh, VAULT_SEGMENTS};
pub use primitives::{
    classify, generate_training_set, perturb_training, rectify_canonical, sample_primitive,
    surface_height, Direction, FacetKind, PrimitiveType, PrototypeSet, CATALOG,
};
pub use sim::{assign_roofs, merge_rects, partition_region, rasterize_ideal, select_building_rects};
pub use stereo::{add_height_noise, corrupt, perturb_boundaries, smooth, StereoNoiseParams};

/// Double-precision aliases (the pipeline default).
pub type HeightGrid = grid::HeightGrid<f64>;
pub type PointCloud = cloud::PointCloud<f64>;
pub type SimTransform = transform::SimTransform<f64>;
pub type Mesh = mesh::Mesh<f64>;
pub type Rect = geom::Rect<f64>;
pub type RotatedRect = geom::RotatedRect<f64>;
pub type RoofSpec = primitives::RoofSpec<f64>;
pub type CanonicalCloud = primitives::CanonicalCloud<f64>;
pub type Section = sim::Section<f64>;
pub type BuildingModel = sim::BuildingModel<f64>;
pub type SceneSection = mesh::SceneSection<f64>;
pub type SceneModel = mesh::SceneModel<f64>;
pub type SectionProposal = decompose::SectionProposal<f64>;
pub type Decomposition = decompose::Decomposition<f64>;
pub type FitResult = fit::FitResult<f64>;
pub type SectionFit = fit::SectionFit<f64>;

/// Single-precision aliases for memory-bound batch work.
pub type HeightGrid32 = grid::HeightGrid<f32>;
pub type PointCloud32 = cloud::PointCloud<f32>;
pub type SimTransform32 = transform::SimTransform<f32>;
pub type Mesh32 = mesh::Mesh<f32>;
