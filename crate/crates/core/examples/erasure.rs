//! Erasure penalties on a tight design and the symmetric planar frame.

use holosense::frames::{erasure_mse, frame_bounds_aligned, mercedes_check};
use holosense::{Arrangement, Spectrum, SpectrumModel};

fn main() -> holosense::Result<()> {
    // Every coordinate sits in exactly two blocks, so the frame is tight.
    let arr = Arrangement::new(
        6,
        vec![vec![0, 1, 2], vec![3, 4, 5], vec![0, 2, 4], vec![1, 3, 5]],
    )?;
    let fb = frame_bounds_aligned(&arr);
    println!("{arr}: A = {} B = {} tight {}", fb.a, fb.b, fb.tight);

    let spectrum = Spectrum::build(&SpectrumModel::exponential(0.7, 6))?;
    for erased in [vec![], vec![0], vec![0, 2], vec![1, 2, 3]] {
        let r = erasure_mse(&spectrum, 0.3, &arr, &erased)?;
        println!(
            "lost {:?}: mse0 {:.4} + penalty {:.4} = {:.4}  (survivors alone {:.4})",
            erased.iter().map(|k| k + 1).collect::<Vec<_>>(),
            r.mse0,
            r.penalty,
            r.total,
            r.exact
        );
    }

    println!(
        "three lines at 120 degrees, equal loss for any single erasure: {}",
        mercedes_check(1.0, 0.2)
    );
    Ok(())
}
