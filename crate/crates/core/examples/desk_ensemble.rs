//! Runs the full pipeline on a small Chimera ensemble: generate, enumerate,
//! SA, both quantum drivers, comparisons, report and plot data.
//!
//!     cargo run --release --example desk_ensemble -- [out_dir] [count]

use std::path::PathBuf;

use gsdlab::pipeline::{run_pipeline, EnsembleSummary, ExperimentManifest, GenerationSpec, RunOptions};
use gsdlab::topology::ChimeraSpec;

fn main() -> gsdlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "desk-ensemble".into()));
    let count = args.next().map_or(8, |c| c.parse().expect("count"));

    let generation = GenerationSpec {
        clause_density: 1.0,
        count,
        max_solutions: 64,
        ..GenerationSpec::default()
    };
    let mut m = ExperimentManifest::new("desk", 2024, ChimeraSpec::new(3, 3, 4), generation);
    m.sa.anneals = 5000;
    m.sa.pilot_grid = vec![16, 64, 256, 1024];
    m.sa.pilot_anneals = 300;
    m.sa.tts_grid = vec![16, 64, 256, 1024, 4096];
    m.sa.tts_anneals = 300;
    m.compare.bootstrap = 2000;

    run_pipeline(&mut m, &out, &RunOptions::default())?;

    let summary: EnsembleSummary = serde_json::from_str(&std::fs::read_to_string(out.join("report/summary.json")).unwrap())?;
    println!("kept {} of {} instances ({} discarded)", summary.kept, summary.generated, summary.discarded);
    for pair in &summary.report.pairs {
        println!(
            "{} vs {}: {} of {} flagged, median bias {:.3} / {:.3}, combined {:.3}",
            pair.method_a,
            pair.method_b,
            pair.flagged,
            pair.instances,
            pair.median_bias_a,
            pair.median_bias_b,
            pair.median_bias_combined
        );
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
