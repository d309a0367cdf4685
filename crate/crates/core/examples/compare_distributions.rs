//! Chi-squared distances, the bootstrapped comparison test and the bias
//! metric on hand-made ground-state distributions.
//!
//!     cargo run --release --example compare_distributions

use gsdlab::stats::{bias, bootstrap_ks, chi2_distance_sq, chi2_one_sided_sq, combine_gsds, Gsd};

fn main() -> gsdlab::Result<()> {
    println!("two-sided distance, (3,1) vs (1,3): {}", chi2_distance_sq(&[3, 1], &[1, 3])?);
    println!("one-sided distance, (3,1) vs (1/2,1/2): {}", chi2_one_sided_sq(&[3, 1], &[0.5, 0.5])?);
    // A state sampled by method 1 that method 2 can never produce.
    println!("one-sided distance, (1,1) vs (1,0): {}", chi2_one_sided_sq(&[1, 1], &[1.0, 0.0])?);

    let flat = vec![0.25; 4];
    let skewed = vec![0.7, 0.1, 0.1, 0.1];
    println!("bias flat {}, skewed {:.3}", bias(&flat)?, bias(&skewed)?);
    let mix = combine_gsds(&[&skewed, &flat], None)?;
    println!("skewed mixed with flat: bias {:.3}", bias(&mix)?);

    let a = Gsd::Empirical(vec![260, 240, 250, 250]);
    let b = Gsd::Empirical(vec![255, 245, 262, 238]);
    let c = Gsd::Empirical(vec![400, 200, 200, 200]);
    for (name, other) in [("similar", &b), ("skewed", &c)] {
        let t = bootstrap_ks(&a, other, 5000, 1)?;
        println!("{name}: statistic {:.4}, bootstrap p {:.4}, asymptotic p {:.4}", t.statistic, t.p_value, t.asymptotic_p);
    }
    let t = bootstrap_ks(&a, &Gsd::Analytic(flat), 5000, 2)?;
    println!("against exact flat: p {:.4}", t.p_value);
    Ok(())
}
