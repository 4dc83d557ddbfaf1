//! Non-diagonal covariance: probe through the rotated bases.

use holosense::estimator::MeasurementSetup;
use holosense::linalg::random_orthogonal;
use holosense::mse::mse_subset;
use holosense::{Arrangement, Spectrum, SpectrumModel};

fn main() -> holosense::Result<()> {
    let spectrum = Spectrum::build(&SpectrumModel::linear(6))?;
    let arr = Arrangement::new(6, vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![0, 3]])?;
    let psi = random_orthogonal(6, 7);
    let setup = MeasurementSetup::rotated(&spectrum, &arr, 0.2, &psi)?;

    for subset in [vec![0], vec![0, 3], vec![1, 2, 3]] {
        let dense = setup.theoretical_mse(&subset)?;
        let closed = mse_subset(&spectrum, 0.2, &arr, &subset)?;
        println!("{subset:?}: dense {dense:.10}  diagonal {closed:.10}");
    }
    Ok(())
}
