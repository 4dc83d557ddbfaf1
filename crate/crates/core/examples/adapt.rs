//! Re-ranking sampled arrangements when at most `L` packets can arrive.

use holosense::arrangement::sample_arrangements;
use holosense::mse::{adaptive_truncate, profile_all, rank};
use holosense::{allocate, DesignParams, Spectrum, SpectrumModel};

fn main() -> holosense::Result<()> {
    let spectrum = Spectrum::build(&SpectrumModel::exponential(0.8, 1024))?;
    let a = allocate(&spectrum, &DesignParams::new(1024, 8, 16, 0.1)?)?;

    let arrangements = sample_arrangements(&a.s, 16, 8, 100, 1)?;
    let profiles = profile_all(&spectrum, 0.1, &arrangements)?;

    let full = rank(&profiles, &[0.1])?;
    println!("best MSE(16) {:.4}", full.best_mse);
    println!(
        "smoothest over all 16 levels: {}",
        full.best().arrangement_id
    );

    for horizon in [12, 8, 4] {
        let cut = adaptive_truncate(&profiles, horizon, &[0.1])?;
        let id = &cut.best().arrangement_id;
        let moved = if *id == full.best().arrangement_id {
            ""
        } else {
            " (changed)"
        };
        println!(
            "L = {horizon:>2}: best MSE {:.4}  smoothest {id}{moved}",
            cut.best_mse
        );
    }
    Ok(())
}
