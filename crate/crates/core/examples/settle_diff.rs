// Scratch probe: do the extra merged-plan commits move any settle time?
// Compares per-stimulus settles of the two tampered variants on one chip.

use agewire_core::activity::{compute_stress, InputProfile};
use agewire_core::aging::{effective_gate_delays, fresh_vth_with_pv, AgingParams};
use agewire_core::attack::{build_config, PathScope};
use agewire_core::circuit::build_array_multiplier;
use agewire_core::timing::{natural_stress_mode, EventSim};

fn main() {
    let n = build_array_multiplier(8).unwrap();
    let params = AgingParams::default();

    let mut nets = Vec::new();
    for scope in [PathScope::Top(1), PathScope::All] {
        let plan = build_config(&n, &InputProfile::Uniform, &params, scope, 100, 4.0).unwrap();
        nets.push(plan.apply(&n).unwrap());
    }
    for a in [13u32, 20, 27, 34, 41, 48, 55] {
        println!(
            "a{a} wiring M-1 {:?} M-All {:?}",
            nets[0].adder(a).unwrap().wiring.as_slice(),
            nets[1].adder(a).unwrap().wiring.as_slice()
        );
    }

    let delays: Vec<Vec<f64>> = nets
        .iter()
        .map(|net| {
            let stress = compute_stress(net, &InputProfile::Uniform, natural_stress_mode(net)).unwrap();
            let vth0 = fresh_vth_with_pv(net, &params, 0x70765f31, 4).unwrap();
            effective_gate_delays(net, &params, &vth0, &stress.alpha, 4.0).unwrap().per_gate
        })
        .collect();

    // aged gate delay differences
    let mut dcount = 0;
    for g in 0..delays[0].len() {
        if (delays[0][g] - delays[1][g]).abs() > 1e-12 {
            dcount += 1;
        }
    }
    println!("{dcount} gates with differing aged delays");

    let sims: Vec<EventSim> = nets
        .iter()
        .zip(&delays)
        .map(|(net, d)| EventSim::new(net, d).unwrap())
        .collect();
    let bits = n.input_count();
    let mut differing = 0u64;
    let mut max_diff = 0.0f64;
    let mut max_each = [0.0f64; 2];
    for k in 0..1u64 << bits {
        let from = vec![false; bits];
        let to: Vec<bool> = (0..bits).map(|i| k >> i & 1 == 1).collect();
        let s0 = sims[0].run(&from, &to, None).unwrap().settle;
        let s1 = sims[1].run(&from, &to, None).unwrap().settle;
        if (s0 - s1).abs() > 1e-12 {
            differing += 1;
            max_diff = max_diff.max((s1 - s0).abs());
        }
        max_each[0] = max_each[0].max(s0);
        max_each[1] = max_each[1].max(s1);
    }
    println!("{differing} stimuli differ, max |diff| {max_diff:.6}");
    println!("chip max settle M-1 {:.6} M-All {:.6}", max_each[0], max_each[1]);

    // where do the moved stimuli sit relative to the guard (33.44)?
    let mut top: Vec<(f64, f64)> = Vec::new();
    for k in 0..1u64 << bits {
        let from = vec![false; bits];
        let to: Vec<bool> = (0..bits).map(|i| k >> i & 1 == 1).collect();
        let s0 = sims[0].run(&from, &to, None).unwrap().settle;
        let s1 = sims[1].run(&from, &to, None).unwrap().settle;
        if (s0 - s1).abs() > 1e-12 {
            top.push((s0, s1));
        }
    }
    top.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("top moved stimuli (M-1 settle -> M-All settle):");
    for (s0, s1) in top.iter().take(12) {
        println!("  {s0:.4} -> {s1:.4}");
    }
}
