//! Circulant covariance: eigenvalues, sorted design, and the DFT-domain check.

use holosense::estimator::dft_equivalence_check;
use holosense::{allocate, Arrangement, DesignParams, Spectrum, SpectrumModel};

fn main() -> holosense::Result<()> {
    let spectrum = Spectrum::build(&SpectrumModel::cyclostationary(0.8, 16))?;
    println!("lambda:");
    for (j, l) in spectrum.lambdas().iter().enumerate() {
        println!("  {:>2}  {l:.5}", j + 1);
    }
    println!("sum {:.6} (sqrt M = 4)", spectrum.base_point());

    let big = Spectrum::build(&SpectrumModel::cyclostationary(0.8, 64))?;
    let a = allocate(&big, &DesignParams::new(64, 8, 8, 0.05)?)?;
    let end = a.s.iter().rposition(|&v| v > 0).map_or(0, |i| i + 1);
    println!(
        "M=64 N=8 m=8: MSE {:.4}  s {}",
        a.mse_n,
        holosense::allocation::s_pattern(&a.s[..end])
    );

    let arr =
        Arrangement::from_one_based(8, &[vec![1, 2, 7, 8], vec![1, 3, 4, 7], vec![2, 5, 6, 8]])?;
    println!(
        "DFT-domain probing matches diagonal MSE: {}",
        dft_equivalence_check(0.8, &arr, 0.5, 1)?
    );
    Ok(())
}
