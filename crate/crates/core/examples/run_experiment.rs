use std::path::Path;
use std::time::Instant;

use memclass::harness::{render_csv, run_experiment, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).ok_or("usage: run_experiment <config.json>")?;
    let cfg = ExperimentConfig::load(Path::new(&path))?;
    let start = Instant::now();
    let out = run_experiment(&cfg)?;
    print!("{}", render_csv(&out.report.rows)?);
    eprintln!(
        "elapsed {:.1}s, memories {:?}",
        start.elapsed().as_secs_f64(),
        out.classifier.memory_set().indices()
    );
    Ok(())
}
