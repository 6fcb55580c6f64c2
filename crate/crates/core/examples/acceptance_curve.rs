//! Single-attempt acceptance probability against t = c n² on walk:16.

use perfect_sampling::prelude::*;

fn main() -> Result<()> {
    let points = acceptance_curve(16, &[0.125, 0.25, 0.5, 1.0, 2.0], 2_000, 1)?;
    for p in points {
        println!("c = {:<5} t = {:<4} p = {:.4} ± {:.4}", p.c, p.t, p.estimate, p.std_error);
    }
    Ok(())
}
