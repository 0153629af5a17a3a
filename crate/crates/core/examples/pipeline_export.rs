//! The whole pipeline from a JSON config, writing every artifact to a directory.
//!
//! `cargo run --release --example pipeline_export -- out/ [config.json]`

use std::path::PathBuf;

use torusforge::pipeline::{run_pipeline, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "out".into()));
    let config = match args.next() {
        Some(path) => PipelineConfig::load(path.as_ref())?,
        None => PipelineConfig::default(),
    };
    let manifest = run_pipeline(&config, &dir)?;
    println!("{}", serde_json::to_string_pretty(&manifest)?);
    Ok(())
}
