//! The one-dimensional boundedness profile `F(h, s)`, its scaling function `G` and the small-`t` limit.

use pseudomode::fbi::{boundedness_profile, g_profile, profile_limit};

fn main() -> pseudomode::Result<()> {
    let c6 = 1.0;
    for h in [0.1, 0.01] {
        for s in [-10.0, 0.0, 1.0, 10.0, 100.0] {
            let f = boundedness_profile(c6, h, s)?;
            let g = if s > 0.0 { format!("{:.10}", g_profile(c6, h * h * s * s * s)?) } else { "-".into() };
            println!("h {h} s {s:>6}: F {f:.10} G {g}");
        }
    }
    let limit = profile_limit(c6);
    for t in [1e-3, 1e-6, 1e-9, 1e-12] {
        println!("t {t:e}: G/limit - 1 = {:.2e}", g_profile(c6, t)? / limit - 1.0);
    }
    Ok(())
}
