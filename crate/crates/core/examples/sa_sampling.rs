//! Samples ground-state distributions with simulated annealing and traces
//! per-solution time-to-solution over a sweep grid.
//!
//!     cargo run --release --example sa_sampling

use gsdlab::enumerate::{solve_planted, EnumerateConfig};
use gsdlab::instance::{generate_planted, PlantingParams};
use gsdlab::rng::rng_from;
use gsdlab::sa::{sample_gsd, tts_curve, SaSchedule};
use gsdlab::stats::bias;
use gsdlab::topology::{build_chimera, ChimeraSpec};

fn main() -> gsdlab::Result<()> {
    let graph = build_chimera(&ChimeraSpec::new(3, 3, 4))?;
    let params = PlantingParams {
        clause_density: 1.0,
        ..PlantingParams::default()
    };
    let mut found = None;
    for i in 0..50 {
        let p = generate_planted(&graph, &params, &mut rng_from(21, &[i]))?;
        let sols = solve_planted(&p, "sa-demo", &EnumerateConfig::default(), i)?;
        if (4..=32).contains(&sols.len()) {
            found = Some((p, sols));
            break;
        }
    }
    let (p, sols) = found.expect("an instance with 4..=32 ground states");
    println!("{} spins, {} ground states", p.instance.spin_count(), sols.len());

    let base = SaSchedule::linear(1);
    for sweeps in [16, 256, 4096] {
        let g = sample_gsd(&p.instance, &sols, &base.with_sweeps(sweeps), 4000, 5)?;
        let probs = g.probabilities();
        println!(
            "{sweeps:>5} sweeps: success {:.3}, bias {:.3}",
            g.ground_hits as f64 / g.anneals as f64,
            if g.ground_hits > 0 { bias(&probs)? } else { f64::NAN }
        );
    }

    let grid = [2, 4, 8, 16, 64, 256, 1024];
    let table = tts_curve(&p.instance, &sols, &base, &grid, 1000, 9)?;
    println!("\ntime to any ground state:");
    for (k, sw) in grid.iter().enumerate() {
        println!("  {sw:>5} sweeps: {:.0}", table.ground_tts(k).unwrap_or(f64::INFINITY));
    }
    let best = table.best_index().map(|k| grid[k]);
    println!("optimal sweeps on this grid: {best:?}");
    Ok(())
}
