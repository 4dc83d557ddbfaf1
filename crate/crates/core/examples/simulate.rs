//! Monte Carlo check of the closed-form MSE.

use holosense::estimator::{monte_carlo_mse, MeasurementSetup};
use holosense::mse::mse_subset;
use holosense::{Arrangement, Spectrum, SpectrumModel};

fn main() -> holosense::Result<()> {
    let spectrum = Spectrum::build(&SpectrumModel::exponential(0.8, 8))?;
    let arr = Arrangement::from_one_based(
        8,
        &[
            vec![1, 2, 7, 8],
            vec![1, 3, 4, 7],
            vec![1, 4, 5, 6],
            vec![2, 3, 4, 5],
            vec![2, 3, 5, 6],
        ],
    )?;
    let setup = MeasurementSetup::aligned(&spectrum, &arr, 0.5)?;

    println!("{arr}");
    println!("subset          closed    empirical   within 4 sd");
    for subset in [vec![0], vec![1, 3], vec![0, 2, 4], vec![0, 1, 2, 3, 4]] {
        let closed = mse_subset(&spectrum, 0.5, &arr, &subset)?;
        let r = monte_carlo_mse(&setup, &subset, 100_000, 42)?;
        let names: Vec<_> = subset.iter().map(|k| k + 1).collect();
        println!(
            "{:<14}  {closed:.4}    {:.4}      {}",
            format!("{names:?}"),
            r.empirical_mse,
            r.within_bound()
        );
    }
    Ok(())
}
