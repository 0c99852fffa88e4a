//! dB helpers. Everything inside the crate is SI; these sit at the edges.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * db_to_linear(dbm)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// Thermal noise power over `bandwidth_hz` at 290 K plus a noise figure, in dBm.
pub fn thermal_noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    const BOLTZMANN: f64 = 1.380_649e-23;
    watts_to_dbm(BOLTZMANN * 290.0 * bandwidth_hz) + noise_figure_db
}
