use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use torusforge::cloud::{load_point_cloud, sniff_dim, PointCloud};
use torusforge::export::MeshFormat;
use torusforge::mesh::SurfaceMesh;
use torusforge::pipeline::{
    export_mesh, mesh_cloud, run_pipeline, validate_files, PipelineConfig, PipelineError, SamplerSpec, Stage,
};
use torusforge::projection::Projection;

#[derive(Parser)]
#[command(name = "torusforge", version, about = "Mesh 2-tori sampled in 3 to 6 dimensions")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a point cloud.
    Sample(Common),
    /// KNN graph, cycle basis, one-forms and mesh for an existing cloud.
    Mesh(WithCloud),
    /// Project a cloud to 3D and write it as CSV.
    Project(WithCloud),
    /// Project a mesh and write OBJ / PLY.
    Export(WithMesh),
    /// Recompute the invariants of a mesh.
    Validate(WithMesh),
    /// Every stage, end to end.
    Run(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// JSON pipeline config; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    /// Embedding dimension. Picks the 3D, 4D or 6D fixture for `sample`
    /// and `run` without a config; the cloud dimension elsewhere.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// `xyz`, `pca` or `matrix:<path>` (JSON array of three rows).
    #[arg(long)]
    projection: Option<String>,
}

#[derive(Args)]
struct WithCloud {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    cloud: PathBuf,
}

#[derive(Args)]
struct WithMesh {
    #[command(flatten)]
    common: Common,
    /// Triangle CSV or OBJ.
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    cloud: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Obj,
    Ply,
}

fn parse_projection(text: &str) -> Result<Projection, PipelineError> {
    match text {
        "xyz" => Ok(Projection::CoordinateSelect { axes: [0, 1, 2] }),
        "pca" => Ok(Projection::Pca),
        other => {
            let Some(path) = other.strip_prefix("matrix:") else {
                return Err(PipelineError::config(&format!("unknown projection {other:?}")));
            };
            let text = std::fs::read_to_string(path).map_err(|e| PipelineError::config(&format!("{path}: {e}")))?;
            let rows: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|e| PipelineError::config(&format!("{path}: {e}")))?;
            Ok(Projection::CustomMatrix { rows })
        }
    }
}

fn fixture_for_dim(dim: usize) -> Result<SamplerSpec, PipelineError> {
    match dim {
        3 => Ok(SamplerSpec::torus()),
        4 => Ok(SamplerSpec::standard_map()),
        6 => Ok(SamplerSpec::center_manifold()),
        d => Err(PipelineError::config(&format!("no built-in fixture for dim {d} (use 3, 4 or 6, or a config)"))),
    }
}

/// Config file, then flags.
fn resolve(common: &Common, fixture_from_dim: bool) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if fixture_from_dim && common.config.is_none() {
        if let Some(d) = common.dim {
            cfg.sampler = fixture_for_dim(d)?;
        }
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(k) = common.k {
        cfg.k = k;
    }
    if let Some(f) = common.format {
        cfg.export.formats = vec![match f {
            FormatArg::Obj => MeshFormat::Obj,
            FormatArg::Ply => MeshFormat::Ply,
        }];
    }
    if let Some(p) = &common.projection {
        cfg.projection = parse_projection(p)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_cloud(path: &Path, dim: Option<usize>) -> Result<PointCloud, PipelineError> {
    let fail = |e: &dyn std::fmt::Display| PipelineError::stage(Stage::Sample, &format!("{}: {e}", path.display()));
    let dim = match dim {
        Some(d) => d,
        None => sniff_dim(path).map_err(|e| fail(&e))?,
    };
    load_point_cloud(path, dim).map_err(|e| fail(&e))
}

fn ensure_dir(dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::stage(Stage::Config, &format!("{}: {e}", dir.display())))
}

fn execute(command: Command) -> Result<ExitCode, PipelineError> {
    match command {
        Command::Sample(common) => {
            let cfg = resolve(&common, true)?;
            ensure_dir(&common.output_dir)?;
            let cloud = cfg.sampler.sample(cfg.derived_seeds().sampler)?;
            let path = common.output_dir.join("cloud.csv");
            cloud.save_csv(&path).map_err(|e| PipelineError::stage(Stage::Sample, &e))?;
            println!("{}", path.display());
        }
        Command::Mesh(args) => {
            let cfg = resolve(&args.common, false)?;
            ensure_dir(&args.common.output_dir)?;
            let cloud = load_cloud(&args.cloud, args.common.dim)?;
            let outcome = mesh_cloud(&cloud, &cfg, Some(&args.common.output_dir))?;
            println!("{}", serde_json::to_string_pretty(&outcome.validation).expect("report serializes"));
        }
        Command::Project(args) => {
            let cfg = resolve(&args.common, false)?;
            ensure_dir(&args.common.output_dir)?;
            let cloud = load_cloud(&args.cloud, args.common.dim)?;
            let map = cfg.projection.resolve(&cloud).map_err(|e| PipelineError::stage(Stage::Project, &e))?;
            let points = cloud.points().map(|p| map.apply(p).to_vec()).collect();
            let projected =
                PointCloud::new(3, points, cloud.provenance()).map_err(|e| PipelineError::stage(Stage::Project, &e))?;
            let path = args.common.output_dir.join("projected.csv");
            projected.save_csv(&path).map_err(|e| PipelineError::stage(Stage::Project, &e))?;
            println!("{}", path.display());
        }
        Command::Export(args) => {
            let cfg = resolve(&args.common, false)?;
            ensure_dir(&args.common.output_dir)?;
            let Some(cloud_path) = &args.cloud else {
                return Err(PipelineError::config(&"export needs --cloud for vertex positions"));
            };
            let cloud = load_cloud(cloud_path, args.common.dim)?;
            let mesh =
                SurfaceMesh::load_csv(&args.mesh, Some(cloud.len())).map_err(|e| PipelineError::stage(Stage::Export, &e))?;
            let (_, written) =
                export_mesh(&mesh, &cloud, &cfg.projection, &cfg.export, Vec::new(), &args.common.output_dir, "mesh")?;
            for p in written {
                println!("{}", p.display());
            }
        }
        Command::Validate(args) => {
            let cloud = match &args.cloud {
                Some(p) => {
                    let dim = match args.common.dim {
                        Some(d) => d,
                        None => sniff_dim(p).map_err(|e| PipelineError::stage(Stage::Validate, &e))?,
                    };
                    Some((p.as_path(), dim))
                }
                None => None,
            };
            let v = validate_files(&args.mesh, cloud)?;
            println!("{}", serde_json::to_string_pretty(&v).expect("report serializes"));
            if !v.report.is_torus() || v.report.misoriented_edges != 0 {
                return Ok(ExitCode::from(4));
            }
        }
        Command::Run(common) => {
            let cfg = resolve(&common, true)?;
            let manifest = run_pipeline(&cfg, &common.output_dir)?;
            println!("{}", serde_json::to_string_pretty(&manifest).expect("manifest serializes"));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TORUSFORGE_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
