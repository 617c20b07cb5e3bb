//! Multi-start see-saw for the W state; prints the best Mermin value found.

use mermin_core::{seesaw_settings, w_state, MeasurementSettings, SeesawConfig};

fn main() -> mermin_core::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let restarts: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let cfg = SeesawConfig {
        restarts,
        seed: 2024,
        ..Default::default()
    };
    let w = w_state(n)?;
    let r = seesaw_settings(&w, &MeasurementSettings::mermin_xy(n)?, &cfg)?;
    println!(
        "n={n} restarts={restarts} best={:.15} restart={} sweeps={}",
        r.best_value, r.restart_index, r.sweeps_used
    );
    Ok(())
}
