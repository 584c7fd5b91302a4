//! Dev probe: accuracy vs age for the tampered 8-bit pipelines.

use agewire_core::activity::InputProfile;
use agewire_core::aging::AgingParams;
use agewire_core::attack::{build_config, PathScope};
use agewire_core::circuit::build_array_multiplier;
use agewire_core::fault::{build_fault_series, Coverage};
use agewire_core::inference::{eval_dataset, evaluate, run_inference, Multiplier, ToyModel};
use agewire_core::timing::{compute_guard_band, StimulusMode};

fn main() {
    let params = AgingParams::default();
    let n = build_array_multiplier(8).unwrap();
    let guard = compute_guard_band(&n, &params, 4.0, StimulusMode::Exhaustive).unwrap();
    let grid = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];
    let model = ToyModel::shipped().unwrap();
    let data = eval_dataset();
    let clean = evaluate(&model, &data, Multiplier::Exact).unwrap();
    println!("fault-free: {clean}/400");
    for scope in [PathScope::All, PathScope::Top(1)] {
        let plan = build_config(&n, &InputProfile::Uniform, &params, scope, 100, 4.0).unwrap();
        let t = plan.apply(&n).unwrap();
        let tables = build_fault_series(&t, &params, &grid, &guard, Coverage::Exhaustive).unwrap();
        print!("{}:", plan.config_tag);
        for (table, point) in tables.iter().zip(run_inference(&model, &data, &tables).unwrap()) {
            print!(" t={} {}/{} (faulty {})", table.t_years, point.correct, point.total, table.faulty_entries());
        }
        println!();
    }
}
