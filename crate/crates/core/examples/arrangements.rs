//! Exhaustive ranking of every arrangement for a small design.

use holosense::arrangement::enumerate_arrangements;
use holosense::mse::{profile_all, rank};
use holosense::{allocate, DesignParams, Spectrum, SpectrumModel};

fn main() -> holosense::Result<()> {
    let spectrum = Spectrum::build(&SpectrumModel::exponential(0.8, 8))?;
    let a = allocate(&spectrum, &DesignParams::new(8, 4, 5, 0.5)?)?;

    let arrangements: Vec<_> = enumerate_arrangements(&a.s, 5, 4)?.collect();
    let profiles = profile_all(&spectrum, 0.5, &arrangements)?;
    let ranked = rank(&profiles, &[0.05, 0.1])?;

    println!(
        "{} arrangements realize s = {}",
        arrangements.len(),
        a.pattern
    );
    for (eps, d) in &ranked.delta_epsilon {
        println!("delta_{eps} = {d}");
    }
    println!("\nfive smoothest:");
    for e in ranked.entries.iter().take(5) {
        let arr = arrangements
            .iter()
            .find(|x| x.id() == e.profile.arrangement_id)
            .expect("ranked arrangement");
        println!("  {:.5}  {arr}", e.score);
    }

    let best = ranked.best();
    println!("\nsmoothest profile:");
    println!("  ell   min MSE   mean MSE   var(delta)");
    for l in &best.levels {
        println!(
            "  {:>3}   {:.4}    {:.4}     {:.2e}",
            l.ell, l.mse_min, l.mse_mean, l.delta_var
        );
    }
    Ok(())
}
