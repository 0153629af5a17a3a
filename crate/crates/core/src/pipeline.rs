//! End-to-end driver: sample, graph, cycles, forms, mesh, orient, project,
//! export. Every stage writes its artifact as soon as it exists, so a failed
//! run leaves everything up to the failure on disk.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::{load_point_cloud, PointCloud};
use crate::cr3bp::{libration_point, LibrationLabel, MassParameter};
use crate::cycles::{classify_cycles, minimum_cycle_basis, ClassifiedBasis};
use crate::export::{face_colors, write_obj, write_ply, ColorMode, MeshFormat, ObjLayers, SidednessRule};
use crate::knn::{build_knn_graph, NeighborGraph};
use crate::mesh::{SurfaceMesh, ValidationReport};
use crate::mesher::{merge_patches, MergeReport, MeshConfig, MesherError, SeedSchedule};
use crate::oneform::{
    assemble_system, solve_oneforms_unchecked, EdgeWeights, OneFormPair, ResidualGates, SolverOptions, WeightMode,
};
use crate::orientation::{orient_mesh, OrientationError};
use crate::projection::{captured_variance, project, Mesh3, Projection};
use crate::samplers::{
    sample_center_manifold_with, sample_standard_map_torus, sample_torus_revolution_with, CenterManifoldSampling,
    CenterManifoldTorus, StandardMapConfig, TorusSampling,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerSpec {
    Torus {
        #[serde(default = "default_major")]
        major_radius: f64,
        #[serde(default = "default_minor")]
        minor_radius: f64,
        #[serde(default = "default_torus_n")]
        n: usize,
        #[serde(default = "default_jitter")]
        jitter: f64,
    },
    StandardMap(StandardMapConfig),
    CenterManifold {
        #[serde(default = "default_mu")]
        mu: f64,
        #[serde(default = "default_point")]
        point: LibrationLabel,
        #[serde(default = "default_amplitude")]
        amplitude_planar: f64,
        #[serde(default = "default_amplitude")]
        amplitude_vertical: f64,
        #[serde(default = "default_cm_n")]
        n: usize,
        #[serde(default = "default_jitter")]
        jitter: f64,
        /// Sample one linear trajectory at this step instead of a phase grid.
        #[serde(default)]
        trajectory_dt: Option<f64>,
    },
    File {
        path: PathBuf,
        dim: usize,
    },
}

fn default_major() -> f64 {
    2.0
}
fn default_minor() -> f64 {
    0.5
}
fn default_torus_n() -> usize {
    2000
}
fn default_jitter() -> f64 {
    0.6
}
fn default_mu() -> f64 {
    0.01215
}
fn default_point() -> LibrationLabel {
    LibrationLabel::L2
}
fn default_amplitude() -> f64 {
    5e-3
}
fn default_cm_n() -> usize {
    6000
}

impl SamplerSpec {
    pub fn torus() -> Self {
        SamplerSpec::Torus { major_radius: 2.0, minor_radius: 0.5, n: 2000, jitter: default_jitter() }
    }

    pub fn standard_map() -> Self {
        SamplerSpec::StandardMap(StandardMapConfig::default())
    }

    pub fn center_manifold() -> Self {
        SamplerSpec::CenterManifold {
            mu: default_mu(),
            point: LibrationLabel::L2,
            amplitude_planar: 5e-3,
            amplitude_vertical: 5e-3,
            n: 6000,
            jitter: default_jitter(),
            trajectory_dt: None,
        }
    }

    /// Draws the cloud; `seed` feeds samplers that use randomness.
    pub fn sample(&self, seed: u64) -> Result<PointCloud, PipelineError> {
        let err = |e: &dyn fmt::Display| PipelineError::stage(Stage::Sample, e);
        match self {
            SamplerSpec::Torus { major_radius, minor_radius, n, jitter } => sample_torus_revolution_with(&TorusSampling {
                major_radius: *major_radius,
                minor_radius: *minor_radius,
                n: *n,
                seed,
                jitter: *jitter,
            })
            .map_err(|e| err(&e)),
            SamplerSpec::StandardMap(cfg) => sample_standard_map_torus(cfg).map_err(|e| err(&e)),
            SamplerSpec::CenterManifold { mu, point, amplitude_planar, amplitude_vertical, n, jitter, trajectory_dt } => {
                let mu = MassParameter::new(*mu).map_err(|e| err(&e))?;
                let p = libration_point(mu, *point).map_err(|e| err(&e))?;
                let torus = CenterManifoldTorus::new(mu, p, *amplitude_planar, *amplitude_vertical).map_err(|e| err(&e))?;
                let sampling = match trajectory_dt {
                    Some(dt) => CenterManifoldSampling::Trajectory { dt: *dt },
                    None => CenterManifoldSampling::PhaseGrid { seed, jitter: *jitter },
                };
                sample_center_manifold_with(&torus, *n, sampling).map_err(|e| err(&e))
            }
            SamplerSpec::File { path, dim } => load_point_cloud(path, *dim).map_err(|e| err(&format!("{}: {e}", path.display()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExportSpec {
    pub formats: Vec<MeshFormat>,
    pub color: ColorMode,
    pub sidedness: SidednessRule,
    /// Add the two generator loops as OBJ polylines.
    pub generator_polylines: bool,
    /// Add every vertex as an OBJ point.
    pub points: bool,
}

impl Default for ExportSpec {
    fn default() -> Self {
        Self {
            formats: vec![MeshFormat::Obj, MeshFormat::Ply],
            color: ColorMode::Sidedness,
            sidedness: SidednessRule::WindingNumber,
            generator_polylines: true,
            points: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub sampler: SamplerSpec,
    /// Master seed; every random choice derives from it.
    pub seed: u64,
    pub k: usize,
    pub weights: WeightMode,
    pub solver: SolverOptions,
    pub gates: ResidualGates,
    pub mesh: MeshConfig,
    pub projection: Projection,
    pub export: ExportSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sampler: SamplerSpec::torus(),
            seed: 0,
            k: 8,
            weights: WeightMode::default(),
            solver: SolverOptions::default(),
            gates: ResidualGates::default(),
            mesh: MeshConfig::default(),
            projection: Projection::default(),
            export: ExportSpec::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| PipelineError::config(&e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::config(&format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Parameter checks that need no data.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::config(&m));
        if self.k < 2 {
            return bad(format!("k = {} (need k >= 2)", self.k));
        }
        if !(self.solver.tolerance > 0.0) || self.solver.max_iterations == 0 {
            return bad(format!("solver settings {:?}", self.solver));
        }
        let g = self.gates;
        if [g.coclosedness, g.trivial_closedness, g.period].iter().any(|x| !(*x > 0.0)) {
            return bad(format!("gates {g:?}"));
        }
        self.mesh.validate().map_err(|e| PipelineError::config(&e))?;
        match &self.sampler {
            SamplerSpec::Torus { major_radius, minor_radius, n, jitter } => {
                if !(*major_radius > *minor_radius && *minor_radius > 0.0) || *n < 16 || !(0.0..1.0).contains(jitter) {
                    return bad(format!("torus sampler R={major_radius} r={minor_radius} n={n} jitter={jitter}"));
                }
            }
            SamplerSpec::StandardMap(cfg) => cfg.validate().map_err(|e| PipelineError::config(&e))?,
            SamplerSpec::CenterManifold { mu, point, amplitude_planar, amplitude_vertical, n, jitter, trajectory_dt } => {
                MassParameter::new(*mu).map_err(|e| PipelineError::config(&e))?;
                if !point.is_collinear() {
                    return bad(format!("center manifold needs L1, L2 or L3, got {point:?}"));
                }
                if !(*amplitude_planar > 0.0 && *amplitude_vertical > 0.0) || *n < 16 || !(0.0..1.0).contains(jitter) {
                    return bad(format!(
                        "center manifold amplitudes {amplitude_planar}, {amplitude_vertical}, n={n}, jitter={jitter}"
                    ));
                }
                if trajectory_dt.is_some_and(|dt| !(dt > 0.0)) {
                    return bad(format!("trajectory_dt = {trajectory_dt:?}"));
                }
            }
            SamplerSpec::File { dim, .. } => {
                if !(3..=6).contains(dim) {
                    return bad(format!("dim = {dim} outside 3..=6"));
                }
            }
        }
        if let Projection::CustomMatrix { rows } = &self.projection {
            if rows.len() != 3 {
                return bad(format!("projection matrix has {} rows", rows.len()));
            }
        }
        if self.export.formats.is_empty() {
            return bad("no export formats".into());
        }
        Ok(())
    }

    /// Sub-seeds for the sampler and the patch schedule.
    pub fn derived_seeds(&self) -> DerivedSeeds {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        DerivedSeeds { master: self.seed, sampler: rng.next_u64(), patches: rng.next_u64() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DerivedSeeds {
    pub master: u64,
    pub sampler: u64,
    pub patches: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Sample,
    Knn,
    Cycles,
    OneForms,
    Mesh,
    Orient,
    Project,
    Export,
    Validate,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit enum");
        f.write_str(s.as_str().expect("string tag"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Config,
    Stage,
    Validation,
}

/// A failure tagged with its stage and a machine-readable code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineError {
    pub stage: Stage,
    pub kind: FailureKind,
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}] {}", self.stage, self.code, self.message)
    }
}

impl std::error::Error for PipelineError {}

impl PipelineError {
    fn new(stage: Stage, kind: FailureKind, code: &'static str, message: impl fmt::Display) -> Self {
        Self { stage, kind, code, message: message.to_string() }
    }

    pub fn config(e: &dyn fmt::Display) -> Self {
        Self::new(Stage::Config, FailureKind::Config, "invalid_config", e)
    }

    pub fn stage(stage: Stage, e: &dyn fmt::Display) -> Self {
        Self::new(stage, FailureKind::Stage, "stage_failed", e)
    }

    fn io(stage: Stage, path: &Path, e: impl fmt::Display) -> Self {
        Self::new(stage, FailureKind::Stage, "io", format!("{}: {e}", path.display()))
    }

    /// 2 config error, 3 stage failure, 4 validation failure.
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Config => 2,
            FailureKind::Stage => 3,
            FailureKind::Validation => 4,
        }
    }
}

fn write_json<T: Serialize>(stage: Stage, path: &Path, value: &T) -> Result<(), PipelineError> {
    let f = File::create(path).map_err(|e| PipelineError::io(stage, path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| PipelineError::io(stage, path, e))?;
    use std::io::Write;
    writeln!(w).map_err(|e| PipelineError::io(stage, path, e))
}

/// Everything the meshing stages produce.
#[derive(Debug, Clone)]
pub struct MeshOutcome {
    pub graph: NeighborGraph,
    pub basis: ClassifiedBasis,
    pub forms: OneFormPair,
    pub merge: MergeReport,
    /// Consistently wound mesh.
    pub mesh: SurfaceMesh,
    pub validation: ValidationReport,
}

/// KNN graph through orientation. With `out`, writes `graph.csv`,
/// `cycles.json`, `residuals.json`, `mesh.csv`, `merge.json` and
/// `validation.json` there.
pub fn mesh_cloud(cloud: &PointCloud, config: &PipelineConfig, out: Option<&Path>) -> Result<MeshOutcome, PipelineError> {
    let seeds = config.derived_seeds();
    let t = Instant::now();
    let graph = build_knn_graph(cloud, config.k).map_err(|e| {
        let code = match e {
            crate::knn::KnnError::Disconnected { .. } => "disconnected_graph",
            _ => "invalid_k",
        };
        PipelineError::new(Stage::Knn, FailureKind::Stage, code, e)
    })?;
    info!("knn: {} vertices, {} edges in {:.2?}", graph.vertex_count(), graph.edge_count(), t.elapsed());
    if let Some(dir) = out {
        let path = dir.join("graph.csv");
        let f = File::create(&path).map_err(|e| PipelineError::io(Stage::Knn, &path, e))?;
        graph.write_edge_csv(BufWriter::new(f)).map_err(|e| PipelineError::io(Stage::Knn, &path, e))?;
    }

    let t = Instant::now();
    let mcb = minimum_cycle_basis(&graph).map_err(|e| PipelineError::stage(Stage::Cycles, &e))?;
    let basis = classify_cycles(&mcb).map_err(|e| PipelineError::stage(Stage::Cycles, &e))?;
    info!(
        "cycles: {} in {:.2?}; generators {:.4} / {:.4}",
        mcb.len(),
        t.elapsed(),
        basis.toroidal.weight(),
        basis.poloidal.weight()
    );
    if let Some(dir) = out {
        let path = dir.join("cycles.json");
        let f = File::create(&path).map_err(|e| PipelineError::io(Stage::Cycles, &path, e))?;
        basis.write_json(BufWriter::new(f)).map_err(|e| PipelineError::io(Stage::Cycles, &path, e))?;
    }

    let t = Instant::now();
    let weights = EdgeWeights::from_mode(&graph, config.weights);
    let system = assemble_system(&graph, &basis, &weights);
    let forms = solve_oneforms_unchecked(&system, &config.solver).map_err(|e| PipelineError::stage(Stage::OneForms, &e))?;
    info!("one-forms in {:.2?}: {:?}", t.elapsed(), forms.residuals);
    if let Some(dir) = out {
        write_json(Stage::OneForms, &dir.join("residuals.json"), &forms.residuals)?;
    }
    forms
        .residuals
        .check(&config.gates)
        .map_err(|e| PipelineError::new(Stage::OneForms, FailureKind::Validation, "residual_gate", e))?;

    let t = Instant::now();
    let scale = [basis.toroidal.weight(), basis.poloidal.weight()];
    let merged = merge_patches(&graph, &forms, scale, &SeedSchedule::Random(seeds.patches), &config.mesh);
    let merged = match merged {
        Ok(m) => m,
        Err(MesherError::Validation { report, mesh, diagnostics, rounds }) => {
            if let Some(dir) = out {
                let _ = mesh.save_csv(&dir.join("mesh.csv"));
                write_json(Stage::Mesh, &dir.join("validation.json"), &report)?;
                write_json(Stage::Mesh, &dir.join("diagnostics.json"), &diagnostics)?;
            }
            let msg = format!(
                "mesh invalid after {rounds} rounds: chi = {}, {} boundary, {} non-manifold edges, {} singular vertices",
                report.euler_characteristic, report.boundary_edges, report.nonmanifold_edges, report.singular_vertices
            );
            return Err(PipelineError::new(Stage::Mesh, FailureKind::Validation, "mesh_validation", msg));
        }
        Err(e @ MesherError::Config(_)) => return Err(PipelineError::config(&e)),
        Err(e) => return Err(PipelineError::stage(Stage::Mesh, &e)),
    };
    info!("mesh: {} faces from {} patches in {:.2?}", merged.mesh.face_count(), merged.report.rounds_used, t.elapsed());

    let oriented = orient_mesh(&merged.mesh, 0).map_err(|e| {
        let kind = if matches!(e, OrientationError::Conflict { .. }) { FailureKind::Validation } else { FailureKind::Stage };
        PipelineError::new(Stage::Orient, kind, "orientation", e)
    })?;
    let mesh = oriented.mesh;
    let mut validation = mesh.validate();
    validation.rounds_used = Some(merged.report.rounds_used);
    if let Some(dir) = out {
        let path = dir.join("mesh.csv");
        mesh.save_csv(&path).map_err(|e| PipelineError::io(Stage::Mesh, &path, e))?;
        write_json(Stage::Mesh, &dir.join("merge.json"), &merged.report)?;
        write_json(Stage::Mesh, &dir.join("validation.json"), &validation)?;
    }
    if !validation.is_torus() || validation.misoriented_edges != 0 {
        return Err(PipelineError::new(Stage::Validate, FailureKind::Validation, "not_a_torus", format!("{validation:?}")));
    }
    Ok(MeshOutcome { graph, basis, forms, merge: merged.report, mesh, validation })
}

/// Projects and writes the requested formats as `<stem>.obj` / `<stem>.ply`.
/// Returns the written paths.
pub fn export_mesh(
    mesh: &SurfaceMesh,
    cloud: &PointCloud,
    projection: &Projection,
    spec: &ExportSpec,
    polylines: Vec<Vec<u32>>,
    dir: &Path,
    stem: &str,
) -> Result<(Mesh3, Vec<PathBuf>), PipelineError> {
    let (m3, map) = project(mesh, cloud, projection).map_err(|e| PipelineError::stage(Stage::Project, &e))?;
    info!("projection captures {:.4} of the variance", captured_variance(cloud, &map));
    let mut written = Vec::new();
    for format in &spec.formats {
        let path = dir.join(format!("{stem}.{}", if *format == MeshFormat::Obj { "obj" } else { "ply" }));
        let f = File::create(&path).map_err(|e| PipelineError::io(Stage::Export, &path, e))?;
        let w = BufWriter::new(f);
        let result = match format {
            MeshFormat::Obj => {
                let layers = ObjLayers { polylines: polylines.clone(), points: spec.points };
                write_obj(&m3, &layers, w)
            }
            MeshFormat::Ply => {
                let colors = face_colors(&m3, spec.color, spec.sidedness);
                write_ply(&m3, colors.as_deref(), w)
            }
        };
        result.map_err(|e| PipelineError::io(Stage::Export, &path, e))?;
        written.push(path);
    }
    Ok((m3, written))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub seeds: DerivedSeeds,
    pub vertices: usize,
    pub dim: usize,
    pub edges: usize,
    pub cycles: usize,
    pub faces: usize,
    pub artifacts: Vec<String>,
}

/// Runs every stage, writing artifacts into `out`.
pub fn run_pipeline(config: &PipelineConfig, out: &Path) -> Result<RunManifest, PipelineError> {
    config.validate()?;
    std::fs::create_dir_all(out).map_err(|e| PipelineError::io(Stage::Config, out, e))?;
    std::fs::write(out.join("config.json"), config.to_json()).map_err(|e| PipelineError::io(Stage::Config, out, e))?;
    let seeds = config.derived_seeds();

    let t = Instant::now();
    let cloud = config.sampler.sample(seeds.sampler)?;
    info!("sampled {} points in {}D in {:.2?}", cloud.len(), cloud.dim(), t.elapsed());
    let cloud_path = out.join("cloud.csv");
    cloud.save_csv(&cloud_path).map_err(|e| PipelineError::io(Stage::Sample, &cloud_path, e))?;

    let outcome = mesh_cloud(&cloud, config, Some(out))?;
    let polylines = if config.export.generator_polylines {
        [&outcome.basis.toroidal, &outcome.basis.poloidal]
            .iter()
            .map(|c| {
                let mut v = c.vertices().to_vec();
                v.push(v[0]);
                v
            })
            .collect()
    } else {
        Vec::new()
    };
    let (_, written) = export_mesh(&outcome.mesh, &cloud, &config.projection, &config.export, polylines, out, "mesh")?;

    let mut artifacts: Vec<String> =
        ["config.json", "cloud.csv", "graph.csv", "cycles.json", "residuals.json", "mesh.csv", "merge.json", "validation.json"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    artifacts.extend(written.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()));
    artifacts.push("manifest.json".into());
    let manifest = RunManifest {
        seeds,
        vertices: cloud.len(),
        dim: cloud.dim(),
        edges: outcome.graph.edge_count(),
        cycles: outcome.basis.cycle_count(),
        faces: outcome.mesh.face_count(),
        artifacts,
    };
    write_json(Stage::Export, &out.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Validation of an external mesh, with the conflict cycle when orientation
/// fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileValidation {
    #[serde(flatten)]
    pub report: ValidationReport,
    pub orientation_conflict: Option<Vec<u32>>,
}

/// Reads a mesh (`.obj` or triangle CSV) and optionally its cloud, and
/// recomputes every invariant.
pub fn validate_files(mesh_path: &Path, cloud: Option<(&Path, usize)>) -> Result<FileValidation, PipelineError> {
    let vertex_count = match cloud {
        Some((path, dim)) => Some(
            load_point_cloud(path, dim)
                .map_err(|e| PipelineError::stage(Stage::Validate, &format!("{}: {e}", path.display())))?
                .len(),
        ),
        None => None,
    };
    let is_obj = mesh_path.extension().is_some_and(|e| e.eq_ignore_ascii_case("obj"));
    let mesh = if is_obj {
        let f = File::open(mesh_path).map_err(|e| PipelineError::io(Stage::Validate, mesh_path, e))?;
        let m3 = crate::export::read_obj(BufReader::new(f)).map_err(|e| PipelineError::stage(Stage::Validate, &e))?;
        let n = vertex_count.unwrap_or(m3.vertex_count());
        SurfaceMesh::new(n, m3.triangles).map_err(|e| PipelineError::stage(Stage::Validate, &e))?
    } else {
        SurfaceMesh::load_csv(mesh_path, vertex_count).map_err(|e| PipelineError::stage(Stage::Validate, &e))?
    };
    let report = mesh.validate();
    let orientation_conflict = match orient_mesh(&mesh, 0) {
        Err(OrientationError::Conflict { cycle }) => Some(cycle),
        _ => None,
    };
    Ok(FileValidation { report, orientation_conflict })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        for sampler in [SamplerSpec::torus(), SamplerSpec::standard_map(), SamplerSpec::center_manifold()] {
            let cfg = PipelineConfig { sampler, seed: 42, ..Default::default() };
            let back = PipelineConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn partial_config_uses_defaults() {
        let cfg = PipelineConfig::from_json(r#"{"sampler": {"kind": "torus", "n": 500}, "k": 10}"#).unwrap();
        assert_eq!(cfg.k, 10);
        assert_eq!(cfg.sampler, SamplerSpec::Torus { major_radius: 2.0, minor_radius: 0.5, n: 500, jitter: 0.6 });
        assert_eq!(cfg.mesh, MeshConfig::default());
    }

    #[test]
    fn invalid_configs_exit_with_two() {
        for text in [
            r#"{"k": 1}"#,
            r#"{"sampler": {"kind": "torus", "major_radius": 0.1}}"#,
            r#"{"mesh": {"core_depth": 4, "rim_depth": 4}}"#,
            r#"{"sampler": {"kind": "center_manifold", "point": "L4"}}"#,
            r#"{"unknown": 1}"#,
        ] {
            let e = PipelineConfig::from_json(text).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}: {e}");
        }
    }

    #[test]
    fn seeds_derive_deterministically() {
        let a = PipelineConfig { seed: 9, ..Default::default() }.derived_seeds();
        let b = PipelineConfig { seed: 9, ..Default::default() }.derived_seeds();
        assert_eq!(a, b);
        assert_ne!(a.sampler, a.patches);
    }
}
