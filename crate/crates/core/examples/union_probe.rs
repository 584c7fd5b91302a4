// Scratch probe: why can the merged all-paths plan realize a lower aged
// static max than the single-path plan? Prints per-path predicted finals
// and the realized maxima of both plans.

use agewire_core::activity::{InputProfile, StressBasis};
use agewire_core::aging::{effective_gate_delays, fresh_vth_nominal, AgingParams};
use agewire_core::attack::{build_config, PathScope};
use agewire_core::circuit::build_array_multiplier;
use agewire_core::timing::{natural_stress_mode, static_critical_paths, static_max_delay};

fn realized(
    netlist: &agewire_core::circuit::Netlist,
    params: &AgingParams,
    years: f64,
) -> f64 {
    let basis = StressBasis::build(netlist, &InputProfile::Uniform, natural_stress_mode(netlist)).unwrap();
    let alpha = basis.stress_map(netlist).alpha;
    let vth = fresh_vth_nominal(netlist, params);
    let d = effective_gate_delays(netlist, params, &vth, &alpha, years).unwrap();
    static_max_delay(netlist, &d.per_gate)
}

fn main() {
    let n = build_array_multiplier(8).unwrap();
    let params = AgingParams::default();
    let base = realized(&n, &params, 0.0);
    println!("fresh static max {base:.6}");

    let basis = StressBasis::build(&n, &InputProfile::Uniform, natural_stress_mode(&n)).unwrap();
    let alpha = basis.stress_map(&n).alpha;
    let vth = fresh_vth_nominal(&n, &params);
    let d0 = effective_gate_delays(&n, &params, &vth, &alpha, 0.0).unwrap();
    let top = &static_critical_paths(&n, &d0.per_gate, 1).unwrap()[0];
    println!("path0 adders {:?}", top.adders);
    let d4 = |net: &agewire_core::circuit::Netlist| {
        let b = StressBasis::build(net, &InputProfile::Uniform, natural_stress_mode(net)).unwrap();
        let a = b.stress_map(net).alpha;
        let v = fresh_vth_nominal(net, &params);
        effective_gate_delays(net, &params, &v, &a, 4.0).unwrap().per_gate
    };
    let routed = |net: &agewire_core::circuit::Netlist| top.routed_delay(net, &d4(net)).unwrap();
    println!("path0 routed 4y in natural {:.6}", routed(&n));

    for (label, scope) in [("M-1-100%", PathScope::Top(1)), ("M-All-100%", PathScope::All)] {
        let plan = build_config(&n, &InputProfile::Uniform, &params, scope, 100, 4.0).unwrap();
        let t = plan.apply(&n).unwrap();
        let aged = realized(&t, &params, 4.0);
        println!(
            "{label}: {} entries, realized 4y max {:.6} (ratio {:.6}), path0 routed {:.6}",
            plan.entries.len(),
            aged,
            aged / base,
            top.routed_delay(&t, &d4(&t)).unwrap()
        );
        let mut by_rank: std::collections::BTreeMap<usize, Vec<String>> = Default::default();
        for e in &plan.entries {
            by_rank
                .entry(e.path_rank)
                .or_default()
                .push(format!("a{}{:?}g{:.3}", e.adder, e.wiring.as_slice(), e.predicted_gain));
        }
        for (rank, entries) in by_rank {
            println!("  rank {rank}: {}", entries.join(" "));
        }
    }
}
