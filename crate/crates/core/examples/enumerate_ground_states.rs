//! Enumerates every ground state of planted instances by bucket
//! elimination, and shows the tabular constraint format it works from.
//!
//!     cargo run --example enumerate_ground_states

use gsdlab::enumerate::{solve_planted, terms_to_constraints, EnumerateConfig};
use gsdlab::instance::{generate_planted, PlantingParams};
use gsdlab::io;
use gsdlab::rng::rng_from;
use gsdlab::topology::{build_chimera, ChimeraSpec};

fn main() -> gsdlab::Result<()> {
    let graph = build_chimera(&ChimeraSpec::new(3, 3, 4))?;
    let config = EnumerateConfig::default();
    for (i, density) in [0.5, 1.0, 1.5].into_iter().enumerate() {
        let params = PlantingParams {
            clause_density: density,
            ..PlantingParams::default()
        };
        let p = generate_planted(&graph, &params, &mut rng_from(11, &[i as u64]))?;
        let sols = solve_planted(&p, &format!("demo-{i}"), &config, 3)?;
        let pairs = sols.flip_partners().iter().filter(|p| p.is_some()).count() / 2;
        println!(
            "density {density}: {} ground states{} ({pairs} flip pairs) at E0 = {}",
            sols.len(),
            if sols.truncated { "+ (truncated)" } else { "" },
            sols.ground_energy
        );
    }

    let p = generate_planted(&build_chimera(&ChimeraSpec::new(1, 1, 4))?, &PlantingParams::default(), &mut rng_from(1, &[]))?;
    let constraints = terms_to_constraints(&p)?;
    println!("\nconstraint tables for one 8-spin cell:");
    print!("{}", io::constraints_to_string(&constraints[..constraints.len().min(2)]));
    Ok(())
}
