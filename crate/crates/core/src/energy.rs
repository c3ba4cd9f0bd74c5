//! First-order radio energy model: every Joule charged for transmitting,
//! receiving, or aggregating data passes through these three functions.

use crate::model::EnergyParams;

/// Crossover distance between the free-space (d^2) and multipath (d^4)
/// amplifier regimes.
pub fn threshold_distance(params: &EnergyParams) -> f64 {
    (params.e_fs / params.e_amp).sqrt()
}

/// Energy to transmit `bits` over `distance` meters.
///
/// Electronics cost plus the amplifier term: free-space below the
/// crossover distance (inclusive), multipath above it.
pub fn tx_energy(params: &EnergyParams, bits: u64, distance: f64) -> f64 {
    debug_assert!(distance >= 0.0);
    let bits = bits as f64;
    let electronics = bits * params.e_elec_tx;
    if distance <= threshold_distance(params) {
        electronics + bits * params.e_fs * distance * distance
    } else {
        electronics + bits * params.e_amp * distance * distance * distance * distance
    }
}

/// Energy to receive `bits` (electronics only).
pub fn rx_energy(params: &EnergyParams, bits: u64) -> f64 {
    bits as f64 * params.e_elec_rx
}

/// Energy to aggregate `signals` inputs of `bits_per_signal` bits each.
pub fn aggregation_energy(params: &EnergyParams, bits_per_signal: u64, signals: u64) -> f64 {
    bits_per_signal as f64 * params.e_da * signals as f64
}
