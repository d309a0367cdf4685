//! Ideal-annealer ground-state distributions under the transverse-field
//! and non-stoquastic drivers, next to the flat distribution.
//!
//!     cargo run --release --example quantum_ground_state

use gsdlab::enumerate::{solve_planted, EnumerateConfig};
use gsdlab::instance::{generate_planted, PlantingParams};
use gsdlab::quantum::{quantum_gsd, Driver, QgsConfig, SignMode};
use gsdlab::rng::rng_from;
use gsdlab::stats::{bias, total_variation};
use gsdlab::topology::{build_chimera, ChimeraSpec};

fn main() -> gsdlab::Result<()> {
    let graph = build_chimera(&ChimeraSpec::new(2, 2, 4))?;
    let params = PlantingParams {
        clause_density: 1.0,
        ..PlantingParams::default()
    };
    let mut shown = 0;
    for i in 0..40 {
        let p = generate_planted(&graph, &params, &mut rng_from(4, &[i]))?;
        let sols = solve_planted(&p, "q-demo", &EnumerateConfig::default(), i)?;
        if sols.len() < 4 || sols.truncated {
            continue;
        }
        let tf = quantum_gsd(&p.instance, &sols, &Driver::transverse_field(), &QgsConfig::default());
        let ns_driver = Driver::non_stoquastic(&p.instance, i, SignMode::Global);
        let ns = quantum_gsd(&p.instance, &sols, &ns_driver, &QgsConfig::default());
        match (tf, ns) {
            (Ok(tf), Ok(ns)) => {
                println!(
                    "instance {i}: D = {:>2}, orders tf {} ns {}, bias tf {:.3} ns {:.3}, TV(tf, ns) = {:.2e}",
                    sols.len(),
                    tf.order,
                    ns.order,
                    bias(&tf.probabilities)?,
                    bias(&ns.probabilities)?,
                    total_variation(&tf.probabilities, &ns.probabilities)?
                );
                let zeros = tf.probabilities.iter().filter(|&&p| p < 1e-6).count();
                if zeros > 0 {
                    println!("    {zeros} ground states are suppressed by the tf driver");
                }
            }
            (a, b) => println!("instance {i}: tf {:?} / ns {:?}", a.err().map(|e| e.to_string()), b.err().map(|e| e.to_string())),
        }
        shown += 1;
        if shown == 6 {
            break;
        }
    }
    Ok(())
}
