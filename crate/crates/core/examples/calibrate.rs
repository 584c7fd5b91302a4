//! Recomputes the k_p constant baked into `aging::calibrated_k_p`.
//!
//! The target is a 10% growth of the untampered 8-bit array multiplier's
//! static max delay over 4 years of uniform-input operation at the nominal
//! process corner. Run after touching nominal delays or the aging law and
//! paste the printed value back into `calibrated_k_p`.

use agewire_core::activity::{compute_stress, InputProfile, StressMode};
use agewire_core::aging::{effective_gate_delays, fresh_vth_nominal, AgingParams};
use agewire_core::circuit::{build_array_multiplier, Netlist};
use agewire_core::timing::static_max_delay;

fn ratio(n: &Netlist, p: &AgingParams, alpha: &[f64]) -> f64 {
    let vth = fresh_vth_nominal(n, p);
    let d0 = effective_gate_delays(n, p, &vth, alpha, 0.0).unwrap();
    let d4 = effective_gate_delays(n, p, &vth, alpha, 4.0).unwrap();
    static_max_delay(n, &d4.per_gate) / static_max_delay(n, &d0.per_gate)
}

fn main() {
    let n = build_array_multiplier(8).unwrap();
    let stress = compute_stress(&n, &InputProfile::Uniform, StressMode::Exhaustive).unwrap();

    let mut lo = 1e-12f64;
    let mut hi = 1e-6f64;
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let mut p = AgingParams::default();
        p.k_p = mid;
        if ratio(&n, &p, &stress.alpha) < 1.10 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k_p = (lo * hi).sqrt();
    println!("calibrated k_p = {k_p:.16e}");

    let mut p = AgingParams::default();
    p.k_p = k_p;
    println!("achieved 4-year ratio = {:.12}", ratio(&n, &p, &stress.alpha));
    println!("value currently baked in = {:.16e}", agewire_core::aging::calibrated_k_p());
}
