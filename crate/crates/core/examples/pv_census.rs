// Scratch probe: violation censuses over a process-variation chip ensemble.
// Each chip draws its own fresh threshold map; the guard band stays at the
// nominal corner. Pools violations across chips for each tamper variant.

use agewire_core::activity::{compute_stress, InputProfile};
use agewire_core::aging::{effective_gate_delays, fresh_vth_with_pv, AgingParams};
use agewire_core::attack::{build_config, PathScope};
use agewire_core::circuit::{build_array_multiplier, Netlist};
use agewire_core::timing::{
    compute_guard_band, error_likelihood, natural_stress_mode, StimulusMode,
};

fn main() {
    let n = build_array_multiplier(8).unwrap();
    let params = AgingParams::default();
    let guard = compute_guard_band(&n, &params, 4.0, StimulusMode::Exhaustive).unwrap();
    println!("p_d {:.6}", guard.p_d);

    let chips = 24u64;
    let pv_seed = 0x70765f31u64;

    let census = |net: &Netlist, label: &str, t: f64| {
        let stress = compute_stress(net, &InputProfile::Uniform, natural_stress_mode(net)).unwrap();
        let mut viol = 0u64;
        let mut total = 0u64;
        let mut per_chip = Vec::new();
        for chip in 0..chips {
            let vth0 = fresh_vth_with_pv(net, &params, pv_seed, chip).unwrap();
            let rep = error_likelihood(net, &params, &vth0, &stress.alpha, &guard, t).unwrap();
            viol += rep.violations;
            total += rep.stimuli;
            per_chip.push(rep.violations);
        }
        println!(
            "{label} t={t}: pooled {viol}/{total} = {:.6} per-chip {:?}",
            viol as f64 / total as f64,
            per_chip
        );
    };

    census(&n, "natural ", 4.0);
    for (label, scope) in [("M-1-100%  ", PathScope::Top(1)), ("M-All-100%", PathScope::All)] {
        let plan = build_config(&n, &InputProfile::Uniform, &params, scope, 100, 4.0).unwrap();
        let t = plan.apply(&n).unwrap();
        census(&t, label, 0.0);
        census(&t, label, 4.0);
    }

    // nominal-chip references (no PV)
    let nominal = |net: &Netlist, label: &str| {
        let stress = compute_stress(net, &InputProfile::Uniform, natural_stress_mode(net)).unwrap();
        let vth0 = vec![params.vth_nominal; net.site_count()];
        let rep = error_likelihood(net, &params, &vth0, &stress.alpha, &guard, 4.0).unwrap();
        println!("{label} nominal chip 4y: {}/{}", rep.violations, rep.stimuli);
    };
    for (label, scope) in [("M-1-100%  ", PathScope::Top(1)), ("M-All-100%", PathScope::All)] {
        let plan = build_config(&n, &InputProfile::Uniform, &params, scope, 100, 4.0).unwrap();
        let t = plan.apply(&n).unwrap();
        nominal(&t, label);
    }
}
