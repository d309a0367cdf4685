//! Generates a planted frustrated-loop instance and checks that the planted
//! configuration sits at the known ground energy.
//!
//!     cargo run --example planted_instance

use gsdlab::instance::{generate_planted, PlantingParams};
use gsdlab::rng::rng_from;
use gsdlab::topology::{build_chimera, ChimeraSpec};

fn main() -> gsdlab::Result<()> {
    let graph = build_chimera(&ChimeraSpec::new(2, 2, 4))?;
    let params = PlantingParams {
        clause_density: 1.0,
        ..PlantingParams::default()
    };
    let p = generate_planted(&graph, &params, &mut rng_from(7, &[]))?;
    println!("{} spins, {} loops, ground energy {}", p.instance.spin_count(), p.terms.len(), p.ground_energy);
    println!("planted energy {}", p.instance.energy(&p.planted)?);
    let longest = p.terms.iter().map(|t| t.support.len()).max().unwrap_or(0);
    println!("longest loop {longest}");

    let nonzero = p.instance.couplings().iter().filter(|&&j| j != 0).count();
    let max_j = p.instance.couplings().iter().map(|j| j.abs()).max().unwrap_or(0);
    println!("{nonzero} of {} couplings active, |J| <= {max_j}", p.instance.couplings().len());
    Ok(())
}
