//! Dev probe: sizes of the 8-bit fully tampered fault table at the horizon.

use agewire_core::activity::InputProfile;
use agewire_core::aging::AgingParams;
use agewire_core::attack::{build_config, PathScope};
use agewire_core::circuit::build_array_multiplier;
use agewire_core::fault::{build_fault_table, Coverage};
use agewire_core::timing::{compute_guard_band, StimulusMode};

fn main() {
    let params = AgingParams::default();
    let n = build_array_multiplier(8).unwrap();
    let plan = build_config(&n, &InputProfile::Uniform, &params, PathScope::All, 100, 4.0).unwrap();
    let t = plan.apply(&n).unwrap();
    let guard = compute_guard_band(&n, &params, 4.0, StimulusMode::Exhaustive).unwrap();
    for years in [0.0, 1.0, 2.0, 3.0, 4.0] {
        let table = build_fault_table(&t, &params, years, &guard, Coverage::Exhaustive).unwrap();
        let high = table
            .entries()
            .filter(|&(pair, _)| pair >> 8 >= 128 && pair & 0xff >= 128)
            .count();
        println!(
            "t={years}: violating {} / {} ({:.4}%), value-faulty {} ({:.4}%), both-high {}",
            table.violating,
            table.probed,
            100.0 * table.violating as f64 / table.probed as f64,
            table.faulty_entries(),
            100.0 * table.faulty_entries() as f64 / table.probed as f64,
            high,
        );
    }
}
