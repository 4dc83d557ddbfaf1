//! Water-filling design for exponentially decaying data.
//!
//! ```text
//! cargo run --example design
//! ```

use holosense::allocation::waterfill;
use holosense::{allocate, DesignParams, Spectrum, SpectrumModel};

fn main() -> holosense::Result<()> {
    let spectrum = Spectrum::build(&SpectrumModel::exponential(0.8, 8))?;
    let params = DesignParams::new(8, 4, 5, 0.5)?;

    let wf = waterfill(&spectrum, &params)?;
    println!("relaxed shares:");
    for (j, z) in wf.zeta.iter().enumerate() {
        println!("  zeta_{} = {z:.3}", j + 1);
    }

    let a = allocate(&spectrum, &params)?;
    println!("s = {:?}  ({})", a.s, a.pattern);
    println!("base point {:.4}", a.base_point);
    println!("MSE with all {} packets {:.4}", params.packets, a.mse_n);

    for (dim, n, m) in [(64, 8, 8), (64, 16, 4), (1024, 8, 8)] {
        let s = Spectrum::build(&SpectrumModel::exponential(0.8, dim))?;
        let a = allocate(&s, &DesignParams::new(dim, m, n, 0.05)?)?;
        println!(
            "M={dim:<5} N={n:<3} m={m}: MSE {:.2}  t {}  {}",
            a.mse_n, a.t, a.pattern
        );
    }
    Ok(())
}
