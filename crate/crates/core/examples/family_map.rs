// Scratch probe: the near-critical path population of the 8-bit array.
// For each of the top aged natural paths: its delay deficit to the max,
// its adder set, and how it diverges from the top path.

use agewire_core::activity::{compute_stress, InputProfile};
use agewire_core::aging::{effective_gate_delays, fresh_vth_nominal, AgingParams};
use agewire_core::circuit::build_array_multiplier;
use agewire_core::timing::{natural_stress_mode, static_critical_paths};

fn main() {
    let n = build_array_multiplier(8).unwrap();
    let params = AgingParams::default();
    let stress = compute_stress(&n, &InputProfile::Uniform, natural_stress_mode(&n)).unwrap();
    let vth = fresh_vth_nominal(&n, &params);
    let aged = effective_gate_delays(&n, &params, &vth, &stress.alpha, 4.0).unwrap();
    let paths = static_critical_paths(&n, &aged.per_gate, 120).unwrap();
    let top = &paths[0];
    let top_set: std::collections::BTreeSet<u32> = top.adders.iter().copied().collect();
    println!("top aged {:.4} adders {:?}", top.delay, top.adders);
    let mut seen = std::collections::BTreeSet::new();
    for p in &paths {
        let set: std::collections::BTreeSet<u32> = p.adders.iter().copied().collect();
        let own: Vec<u32> = set.difference(&top_set).copied().collect();
        let key = (format!("{own:?}"), format!("{:.3}", top.delay - p.delay));
        if !seen.insert(key) {
            continue;
        }
        println!(
            "deficit {:.4} own-adders {:?} shared {}",
            top.delay - p.delay,
            own,
            set.intersection(&top_set).count()
        );
    }
}
