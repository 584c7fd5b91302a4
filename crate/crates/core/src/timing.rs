//! Static and event-driven timing on top of per-gate effective delays.
//!
//! Static analysis is a longest-path DP over the gate DAG; the k most
//! critical paths are tracked with materialized per-node candidate lists and
//! a total order (delay descending, then signal sequence), so results are
//! reproducible across runs and thread counts. Paths are reported with
//! adder-aware hops: the two XOR stages of a full adder collapse into one
//! sum hop, NAND plus INV of a half adder into one carry hop.
//!
//! The event simulator uses transport delays. Events carry a projected
//! output value; scheduling is skipped when the projection already matches.
//! Zero-delay stages are handled by draining every event at the exact same
//! timestamp as one batch, and the settle time is the last batch that left
//! any primary output with a net change, so a glitch of zero width is
//! invisible. A budget of committed events guards against runaway loops.

use crate::activity::{compute_stress, InputProfile, StressMode};
use crate::aging::{effective_gate_delays, fresh_vth_nominal, AgingParams};
use crate::circuit::{AdderMembers, ArchTag, Netlist, SignalId};
use crate::error::{CoreError, Result};
use crate::rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Per-signal longest arrival times; inputs arrive at 0.
pub fn static_arrivals(netlist: &Netlist, delays: &[f64]) -> Vec<f64> {
    let (arr, _) = best_arrivals(netlist, delays);
    arr
}

/// Longest arrival per signal plus the predecessor signal realizing it
/// (lowest id on ties).
pub fn best_arrivals(netlist: &Netlist, delays: &[f64]) -> (Vec<f64>, Vec<Option<SignalId>>) {
    let mut arr = vec![0.0f64; netlist.signal_count()];
    let mut pred = vec![None; netlist.signal_count()];
    for (g, gate) in netlist.gates().iter().enumerate() {
        let mut best = f64::NEG_INFINITY;
        let mut who = None;
        for &s in gate.input_slice() {
            let a = arr[s.index()];
            if a > best {
                best = a;
                who = Some(s);
            }
        }
        arr[gate.output.index()] = best + delays[g];
        pred[gate.output.index()] = who;
    }
    (arr, pred)
}

/// Longest remaining path to any primary output, plus the consuming gate
/// realizing it. A signal that is itself an output departs in 0; downstream
/// logic wins only when strictly longer.
pub fn best_departures(netlist: &Netlist, delays: &[f64]) -> (Vec<f64>, Vec<Option<u32>>) {
    let n = netlist.signal_count();
    let mut dep = vec![f64::NEG_INFINITY; n];
    let mut next = vec![None; n];
    for &o in netlist.outputs() {
        dep[o.index()] = 0.0;
    }
    for (g, gate) in netlist.gates().iter().enumerate().rev() {
        let down = dep[gate.output.index()];
        if down == f64::NEG_INFINITY {
            continue;
        }
        let through = down + delays[g];
        for &s in gate.input_slice() {
            if through > dep[s.index()] {
                dep[s.index()] = through;
                next[s.index()] = Some(g as u32);
            }
        }
    }
    (dep, next)
}

/// Worst-case combinational delay: longest path to any output.
pub fn static_max_delay(netlist: &Netlist, delays: &[f64]) -> f64 {
    let arr = static_arrivals(netlist, delays);
    netlist
        .outputs()
        .iter()
        .map(|o| arr[o.index()])
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hop {
    Gate(u32),
    AdderSum(u32),
    AdderCout(u32),
}

impl std::fmt::Display for Hop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hop::Gate(g) => write!(f, "g{g}"),
            Hop::AdderSum(a) => write!(f, "s{a}"),
            Hop::AdderCout(a) => write!(f, "c{a}"),
        }
    }
}

/// One combinational path from a primary input to a primary output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDescriptor {
    pub delay: f64,
    /// Signal sequence, entry first.
    pub signals: Vec<SignalId>,
    /// Block-collapsed hop sequence.
    pub hops: Vec<Hop>,
    /// Signal on which the path enters each hop, parallel to `hops`.
    pub hop_entries: Vec<SignalId>,
    /// Adders the path crosses, in order.
    pub adders: Vec<u32>,
}

impl PathDescriptor {
    /// Build from a signal walk, recomputing delay and collapsing hops.
    pub fn from_signals(netlist: &Netlist, delays: &[f64], signals: Vec<SignalId>) -> Result<Self> {
        #[derive(Clone, Copy, PartialEq)]
        enum Role {
            FaPair(u32),
            FaSum(u32),
            FaMaj(u32),
            HaSum(u32),
            HaNand(u32),
            HaInv(u32),
        }
        let mut role = vec![None; netlist.gates().len()];
        for a in netlist.adders() {
            match a.members {
                AdderMembers::Full { xor_pair, xor_sum, maj } => {
                    role[xor_pair as usize] = Some(Role::FaPair(a.id));
                    role[xor_sum as usize] = Some(Role::FaSum(a.id));
                    role[maj as usize] = Some(Role::FaMaj(a.id));
                }
                AdderMembers::Half { xor_sum, nand, inv } => {
                    role[xor_sum as usize] = Some(Role::HaSum(a.id));
                    role[nand as usize] = Some(Role::HaNand(a.id));
                    role[inv as usize] = Some(Role::HaInv(a.id));
                }
            }
        }
        let mut delay = 0.0;
        let mut hops = Vec::new();
        let mut hop_entries = Vec::new();
        let mut adders = Vec::new();
        let mut held_entry: Option<SignalId> = None;
        for pair in signals.windows(2) {
            let gate = netlist.driver(pair[1]).ok_or_else(|| {
                CoreError::Timing(format!("signal {} has no driver on the path", pair[1]))
            })?;
            if !gate.input_slice().contains(&pair[0]) {
                return Err(CoreError::Timing(format!(
                    "signal {} does not feed the driver of {}",
                    pair[0], pair[1]
                )));
            }
            let g = pair[1].index() - netlist.input_count();
            delay += delays[g];
            let hop = match role[g] {
                None => Some(Hop::Gate(g as u32)),
                Some(Role::FaPair(_)) | Some(Role::HaNand(_)) => None,
                Some(Role::FaSum(a)) | Some(Role::HaSum(a)) => Some(Hop::AdderSum(a)),
                Some(Role::FaMaj(a)) | Some(Role::HaInv(a)) => Some(Hop::AdderCout(a)),
            };
            match hop {
                None => held_entry = Some(pair[0]),
                Some(h) => {
                    if let Hop::AdderSum(a) | Hop::AdderCout(a) = h {
                        adders.push(a);
                    }
                    hops.push(h);
                    hop_entries.push(held_entry.take().unwrap_or(pair[0]));
                }
            }
        }
        Ok(PathDescriptor { delay, signals, hops, hop_entries, adders })
    }

    pub fn hop_string(&self) -> String {
        self.hops
            .iter()
            .map(|h| h.to_string())
            .collect::<Vec<_>>()
            .join(">")
    }

    /// Delay of this path as physically routed in `variant`, which may have
    /// different adder pin arrangements than the netlist the path came from.
    /// A sum crossing that enters on a pair pin pays the pair stage on top
    /// of the sum stage; entering on the carry-in pin pays the sum stage
    /// alone.
    pub fn routed_delay(&self, variant: &Netlist, delays: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for (hop, &entry) in self.hops.iter().zip(&self.hop_entries) {
            total += match *hop {
                Hop::Gate(g) => delays[g as usize],
                Hop::AdderSum(a) => {
                    let adder = variant.adder(a)?;
                    match adder.members {
                        AdderMembers::Half { xor_sum, .. } => delays[xor_sum as usize],
                        AdderMembers::Full { xor_pair, xor_sum, .. } => {
                            let li = adder
                                .input_slice()
                                .iter()
                                .position(|&s| s == entry)
                                .ok_or_else(|| {
                                    CoreError::Timing(format!(
                                        "signal {entry} is not an input of adder {a}"
                                    ))
                                })?;
                            let pos = adder
                                .wiring
                                .as_slice()
                                .iter()
                                .position(|&m| m as usize == li)
                                .unwrap();
                            if pos < 2 {
                                delays[xor_pair as usize] + delays[xor_sum as usize]
                            } else {
                                delays[xor_sum as usize]
                            }
                        }
                    }
                }
                Hop::AdderCout(a) => {
                    let adder = variant.adder(a)?;
                    match adder.members {
                        AdderMembers::Full { maj, .. } => delays[maj as usize],
                        AdderMembers::Half { nand, inv, .. } => {
                            delays[nand as usize] + delays[inv as usize]
                        }
                    }
                }
            };
        }
        Ok(total)
    }
}

/// The `k` longest input-to-output paths, by delay descending, ties broken
/// by the signal sequence.
pub fn static_critical_paths(netlist: &Netlist, delays: &[f64], k: usize) -> Result<Vec<PathDescriptor>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    #[derive(Clone)]
    struct Cand {
        delay: f64,
        path: Vec<SignalId>,
    }
    let order = |a: &Cand, b: &Cand| b.delay.total_cmp(&a.delay).then_with(|| a.path.cmp(&b.path));
    let mut cands: Vec<Vec<Cand>> = Vec::with_capacity(netlist.signal_count());
    for s in 0..netlist.input_count() {
        cands.push(vec![Cand { delay: 0.0, path: vec![SignalId(s as u32)] }]);
    }
    for (g, gate) in netlist.gates().iter().enumerate() {
        let mut pool: Vec<Cand> = Vec::new();
        for &s in gate.input_slice() {
            for c in &cands[s.index()] {
                let mut path = c.path.clone();
                path.push(gate.output);
                pool.push(Cand { delay: c.delay + delays[g], path });
            }
        }
        pool.sort_unstable_by(order);
        pool.truncate(k);
        cands.push(pool);
    }
    let mut pool: Vec<Cand> = Vec::new();
    for &o in netlist.outputs() {
        pool.extend(cands[o.index()].iter().cloned());
    }
    pool.sort_unstable_by(order);
    pool.truncate(k);
    pool.into_iter()
        .map(|c| PathDescriptor::from_signals(netlist, delays, c.path))
        .collect()
}

/// Transport-delay event simulator over a fixed delay assignment.
pub struct EventSim<'a> {
    netlist: &'a Netlist,
    delays: &'a [f64],
    /// CSR fanout: consuming gates per signal.
    fan_off: Vec<u32>,
    fan: Vec<u32>,
}

/// Outcome of driving one input transition to quiescence.
#[derive(Debug, Clone, PartialEq)]
pub struct SettleOutcome {
    /// Time of the last net change on any output; 0 if none changed.
    pub settle: f64,
    pub outputs: Vec<bool>,
    /// Outputs as a register would capture them at the latch deadline.
    pub latched: Option<Vec<bool>>,
    pub events: usize,
}

const EVENT_BUDGET_PER_GATE: usize = 10_000;

#[derive(Debug, Clone, Copy)]
struct Ev {
    time: f64,
    seq: u64,
    gate: u32,
    value: bool,
}

impl PartialEq for Ev {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}
impl Eq for Ev {}
impl PartialOrd for Ev {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ev {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

impl<'a> EventSim<'a> {
    pub fn new(netlist: &'a Netlist, delays: &'a [f64]) -> Result<Self> {
        if delays.len() != netlist.gates().len() {
            return Err(CoreError::Timing(format!(
                "expected {} gate delays, got {}",
                netlist.gates().len(),
                delays.len()
            )));
        }
        if delays.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(CoreError::Timing("gate delays must be finite and >= 0".into()));
        }
        let mut counts = vec![0u32; netlist.signal_count()];
        for gate in netlist.gates() {
            for &s in gate.input_slice() {
                counts[s.index()] += 1;
            }
        }
        let mut fan_off = vec![0u32; netlist.signal_count() + 1];
        for (i, &c) in counts.iter().enumerate() {
            fan_off[i + 1] = fan_off[i] + c;
        }
        let mut fan = vec![0u32; fan_off[netlist.signal_count()] as usize];
        let mut cursor = fan_off.clone();
        for (g, gate) in netlist.gates().iter().enumerate() {
            for &s in gate.input_slice() {
                fan[cursor[s.index()] as usize] = g as u32;
                cursor[s.index()] += 1;
            }
        }
        Ok(EventSim { netlist, delays, fan_off, fan })
    }

    fn fanout(&self, sig: SignalId) -> &[u32] {
        &self.fan[self.fan_off[sig.index()] as usize..self.fan_off[sig.index() + 1] as usize]
    }

    fn gate_value(&self, g: u32, vals: &[bool]) -> bool {
        let gate = &self.netlist.gates()[g as usize];
        let s = gate.input_slice();
        let a = vals[s[0].index()];
        let b = s.get(1).map(|x| vals[x.index()]).unwrap_or(false);
        let c = s.get(2).map(|x| vals[x.index()]).unwrap_or(false);
        gate.kind.eval(a, b, c)
    }

    /// Settle the netlist from steady state on `from` after switching to `to`.
    pub fn run(&self, from: &[bool], to: &[bool], latch_at: Option<f64>) -> Result<SettleOutcome> {
        let mut vals = self.netlist.evaluate(from)?;
        if to.len() != self.netlist.input_count() {
            return Err(CoreError::Timing(format!(
                "expected {} input bits, got {}",
                self.netlist.input_count(),
                to.len()
            )));
        }
        let out_vec = |vals: &[bool]| -> Vec<bool> {
            self.netlist.outputs().iter().map(|o| vals[o.index()]).collect()
        };

        let mut heap: BinaryHeap<Reverse<Ev>> = BinaryHeap::new();
        let mut seq = 0u64;
        // Projected output value per gate while events are in flight.
        let mut pending = vec![0u32; self.netlist.gates().len()];
        let mut projected = vec![false; self.netlist.gates().len()];

        let schedule = |heap: &mut BinaryHeap<Reverse<Ev>>,
                            pending: &mut [u32],
                            projected: &mut [bool],
                            vals: &[bool],
                            now: f64,
                            g: u32,
                            value: bool,
                            seq: &mut u64| {
            let current = if pending[g as usize] > 0 {
                projected[g as usize]
            } else {
                vals[self.netlist.gates()[g as usize].output.index()]
            };
            if value == current {
                return;
            }
            pending[g as usize] += 1;
            projected[g as usize] = value;
            heap.push(Reverse(Ev { time: now + self.delays[g as usize], seq: *seq, gate: g, value }));
            *seq += 1;
        };

        for i in 0..to.len() {
            if vals[i] != to[i] {
                vals[i] = to[i];
            }
        }
        for i in 0..to.len() {
            for &g in self.fanout(SignalId(i as u32)) {
                let v = self.gate_value(g, &vals);
                schedule(&mut heap, &mut pending, &mut projected, &vals, 0.0, g, v, &mut seq);
            }
        }

        let mut settle = 0.0f64;
        let mut snapshot = out_vec(&vals);
        let mut latched = latch_at.map(|_| snapshot.clone());
        let budget = EVENT_BUDGET_PER_GATE * (self.netlist.gates().len() + 1);
        let mut committed = 0usize;

        while let Some(&Reverse(head)) = heap.peek() {
            let t = head.time;
            while let Some(&Reverse(ev)) = heap.peek() {
                if ev.time != t {
                    break;
                }
                heap.pop();
                committed += 1;
                if committed > budget {
                    return Err(CoreError::Timing(format!(
                        "event budget exhausted after {committed} events; delays {:?}...",
                        &self.delays[..self.delays.len().min(4)]
                    )));
                }
                pending[ev.gate as usize] -= 1;
                let out = self.netlist.gates()[ev.gate as usize].output;
                if vals[out.index()] == ev.value {
                    continue;
                }
                vals[out.index()] = ev.value;
                for &g in self.fanout(out) {
                    let v = self.gate_value(g, &vals);
                    schedule(&mut heap, &mut pending, &mut projected, &vals, t, g, v, &mut seq);
                }
            }
            let now = out_vec(&vals);
            if now != snapshot {
                settle = t;
                snapshot = now;
            }
            if let (Some(deadline), Some(l)) = (latch_at, latched.as_mut()) {
                if t <= deadline {
                    *l = snapshot.clone();
                }
            }
        }
        Ok(SettleOutcome {
            settle,
            outputs: snapshot,
            latched,
            events: committed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StimulusMode {
    /// All-zero operands, then every input assignment in numeric order.
    Exhaustive,
    /// Random from/to vector pairs from a seeded stream.
    RandomPairs { count: u32, seed: u64 },
}

impl StimulusMode {
    pub fn tag(&self) -> String {
        match self {
            StimulusMode::Exhaustive => "exhaustive".into(),
            StimulusMode::RandomPairs { count, seed } => format!("random:{count}:{seed}"),
        }
    }

    pub(crate) fn pair_count(&self, n_inputs: usize) -> Result<u64> {
        match self {
            StimulusMode::Exhaustive => {
                if n_inputs > 16 {
                    return Err(CoreError::Timing(format!(
                        "exhaustive stimulus over {n_inputs} input bits is out of reach"
                    )));
                }
                Ok(1u64 << n_inputs)
            }
            StimulusMode::RandomPairs { count, .. } => {
                if *count == 0 {
                    return Err(CoreError::Timing("stimulus count must be positive".into()));
                }
                Ok(*count as u64)
            }
        }
    }

    /// The `k`-th from/to stimulus pair.
    pub(crate) fn pair(&self, n_inputs: usize, k: u64) -> (Vec<bool>, Vec<bool>) {
        match self {
            StimulusMode::Exhaustive => {
                let from = vec![false; n_inputs];
                let to = (0..n_inputs).map(|i| k >> i & 1 == 1).collect();
                (from, to)
            }
            StimulusMode::RandomPairs { seed, .. } => {
                let mut r = rng::stream(*seed, rng::tag::STIMULUS, k);
                let mut draw = || -> Vec<bool> {
                    let w: u64 = r.gen();
                    (0..n_inputs).map(|i| w >> (i % 64) & 1 == 1).collect()
                };
                let from = draw();
                let to = draw();
                (from, to)
            }
        }
    }
}

/// Measured delay behaviour of one netlist at one age.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    pub t_years: f64,
    /// Worst settle time over the stimuli.
    pub max_settle: f64,
    /// Mean settle time over the stimuli.
    pub mean_settle: f64,
    /// Longest static path; an input-independent upper bound.
    pub static_max: f64,
    pub stimuli: u64,
    pub saturated_sites: usize,
}

/// Delay reports across ages for one netlist and stress assignment.
pub fn delay_sweep(
    netlist: &Netlist,
    params: &AgingParams,
    vth_fresh: &[f64],
    alpha: &[f64],
    times: &[f64],
    stimulus: StimulusMode,
) -> Result<Vec<DelayReport>> {
    let n_pairs = stimulus.pair_count(netlist.input_count())?;
    let mut reports = Vec::with_capacity(times.len());
    for &t in times {
        let d = effective_gate_delays(netlist, params, vth_fresh, alpha, t)?;
        let sim = EventSim::new(netlist, &d.per_gate)?;
        let settles = settle_times(netlist, &sim, &stimulus, n_pairs)?;
        let mut max = 0.0f64;
        let mut sum = 0.0f64;
        for &s in &settles {
            max = max.max(s);
            sum += s;
        }
        reports.push(DelayReport {
            t_years: t,
            max_settle: max,
            mean_settle: sum / n_pairs as f64,
            static_max: static_max_delay(netlist, &d.per_gate),
            stimuli: n_pairs,
            saturated_sites: d.saturated_sites,
        });
    }
    Ok(reports)
}

/// Settle time of every stimulus, in stimulus order. Probes run on the
/// worker pool; the returned vector is positional, so downstream folds see
/// the same sequence no matter how many workers ran.
fn settle_times(
    netlist: &Netlist,
    sim: &EventSim,
    stimulus: &StimulusMode,
    n_pairs: u64,
) -> Result<Vec<f64>> {
    (0..n_pairs)
        .into_par_iter()
        .map(|k| {
            let (from, to) = stimulus.pair(netlist.input_count(), k);
            Ok(sim.run(&from, &to, None)?.settle)
        })
        .collect()
}

/// Fixed timing allowance: the worst settle time of the reference netlist
/// after aging naturally (no tampering, no process variation) to `t_years`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardBand {
    pub p_d: f64,
    pub t_years: f64,
    pub width: usize,
    pub arch: ArchTag,
    pub stimulus: StimulusMode,
    pub netlist_hash: String,
}

pub fn compute_guard_band(
    netlist: &Netlist,
    params: &AgingParams,
    t_years: f64,
    stimulus: StimulusMode,
) -> Result<GuardBand> {
    let stress_mode = natural_stress_mode(netlist);
    let stress = compute_stress(netlist, &InputProfile::Uniform, stress_mode)?;
    let vth = fresh_vth_nominal(netlist, params);
    let d = effective_gate_delays(netlist, params, &vth, &stress.alpha, t_years)?;
    let sim = EventSim::new(netlist, &d.per_gate)?;
    let n_pairs = stimulus.pair_count(netlist.input_count())?;
    let settles = settle_times(netlist, &sim, &stimulus, n_pairs)?;
    let p_d = settles.iter().fold(0.0f64, |m, &s| m.max(s));
    Ok(GuardBand {
        p_d,
        t_years,
        width: netlist.width,
        arch: netlist.arch,
        stimulus,
        netlist_hash: netlist.content_hash(),
    })
}

/// Stress-measurement mode used for guard bands and reference aging:
/// exact enumeration when the input space allows it.
pub fn natural_stress_mode(netlist: &Netlist) -> StressMode {
    if netlist.input_count() <= 20 {
        StressMode::Exhaustive
    } else {
        StressMode::Sampled { samples: 65536, seed: 0x6e61_7475 }
    }
}

/// Fraction of stimuli whose settle time exceeds a guard band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub t_years: f64,
    pub likelihood: f64,
    pub violations: u64,
    pub stimuli: u64,
    /// 95% half-width of the estimate; 0 for exhaustive stimuli.
    pub half_width: f64,
}

pub fn error_likelihood(
    netlist: &Netlist,
    params: &AgingParams,
    vth_fresh: &[f64],
    alpha: &[f64],
    guard: &GuardBand,
    t_years: f64,
) -> Result<ErrorReport> {
    if netlist.width != guard.width {
        return Err(CoreError::Timing(format!(
            "guard band is for width {}, netlist has width {}",
            guard.width, netlist.width
        )));
    }
    let d = effective_gate_delays(netlist, params, vth_fresh, alpha, t_years)?;
    let sim = EventSim::new(netlist, &d.per_gate)?;
    let n_pairs = guard.stimulus.pair_count(netlist.input_count())?;
    let settles = settle_times(netlist, &sim, &guard.stimulus, n_pairs)?;
    let violations = settles.iter().filter(|&&s| s > guard.p_d).count() as u64;
    let p = violations as f64 / n_pairs as f64;
    let half_width = match guard.stimulus {
        StimulusMode::Exhaustive => 0.0,
        StimulusMode::RandomPairs { .. } => 1.96 * (p * (1.0 - p) / n_pairs as f64).sqrt(),
    };
    Ok(ErrorReport {
        t_years,
        likelihood: p,
        violations,
        stimuli: n_pairs,
        half_width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_array_multiplier, build_wallace_multiplier, ArchTag, GateKind, NetlistBuilder, Permutation};
    use approx::assert_relative_eq;

    fn fresh_delays(n: &Netlist, p: &AgingParams) -> Vec<f64> {
        let vth = fresh_vth_nominal(n, p);
        let alpha = vec![0.0; n.site_count()];
        effective_gate_delays(n, p, &vth, &alpha, 0.0).unwrap().per_gate
    }

    #[test]
    fn arrival_dp_matches_path_enumeration() {
        // Brute-force every input-to-output path and compare against both
        // the DP bound and the k-best list.
        let p = AgingParams::default();
        for n in [build_array_multiplier(3).unwrap(), build_wallace_multiplier(3).unwrap()] {
            let delays = fresh_delays(&n, &p);
            let mut all: Vec<(f64, Vec<SignalId>)> = Vec::new();
            let mut stack: Vec<(SignalId, f64, Vec<SignalId>)> = (0..n.input_count())
                .map(|i| (SignalId(i as u32), 0.0, vec![SignalId(i as u32)]))
                .collect();
            let consumers: Vec<Vec<u32>> = {
                let mut v = vec![Vec::new(); n.signal_count()];
                for (g, gate) in n.gates().iter().enumerate() {
                    for &s in gate.input_slice() {
                        v[s.index()].push(g as u32);
                    }
                }
                v
            };
            while let Some((sig, d, path)) = stack.pop() {
                if n.outputs().contains(&sig) {
                    all.push((d, path.clone()));
                }
                for &g in &consumers[sig.index()] {
                    let out = n.gates()[g as usize].output;
                    let mut next = path.clone();
                    next.push(out);
                    stack.push((out, d + delays[g as usize], next));
                }
            }
            all.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            let k = 12;
            let got = static_critical_paths(&n, &delays, k).unwrap();
            assert_eq!(got.len(), k.min(all.len()));
            for (g, e) in got.iter().zip(&all) {
                assert_relative_eq!(g.delay, e.0, max_relative = 1e-12);
                assert_eq!(g.signals, e.1);
            }
            assert_relative_eq!(static_max_delay(&n, &delays), all[0].0, max_relative = 1e-12);
        }
    }

    #[test]
    fn departures_complement_arrivals() {
        let p = AgingParams::default();
        let n = build_array_multiplier(4).unwrap();
        let delays = fresh_delays(&n, &p);
        let (arr, _) = best_arrivals(&n, &delays);
        let (dep, _) = best_departures(&n, &delays);
        let max = static_max_delay(&n, &delays);
        let best_through = (0..n.signal_count())
            .map(|s| arr[s] + dep[s].max(f64::NEG_INFINITY))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(best_through, max, max_relative = 1e-12);
        for s in 0..n.signal_count() {
            assert!(arr[s] + dep[s] <= max + 1e-9, "signal {s} claims a longer path");
        }
    }

    #[test]
    fn path_hops_collapse_adder_stages() {
        let p = AgingParams::default();
        let n = build_array_multiplier(4).unwrap();
        let delays = fresh_delays(&n, &p);
        let paths = static_critical_paths(&n, &delays, 3).unwrap();
        for path in &paths {
            for h in &path.hops {
                if let Hop::Gate(g) = h {
                    let kind = n.gates()[*g as usize].kind;
                    // Raw hops can only be partial-product cells or the
                    // occasional bare XOR; adder internals must be folded.
                    assert!(n.adders().iter().all(|a| !a.members.gate_ids().contains(g)));
                    assert!(kind == GateKind::Nand2 || kind == GateKind::Inv || kind == GateKind::Xor2);
                }
            }
            assert!(!path.adders.is_empty());
            let mut sorted = path.adders.clone();
            sorted.dedup();
            assert_eq!(&sorted, &path.adders, "adders listed once, in order");
        }
    }

    #[test]
    fn settle_matches_single_gate_delay() {
        let mut b = NetlistBuilder::new(ArchTag::Custom, 1);
        let a = b.add_input().unwrap();
        let x = b.add_gate(GateKind::Inv, &[a]).unwrap();
        let y = b.add_gate(GateKind::Inv, &[x]).unwrap();
        let n = b.finish(vec![y]).unwrap();
        let delays = vec![1.0, 1.5];
        let sim = EventSim::new(&n, &delays).unwrap();
        let out = sim.run(&[false], &[true], None).unwrap();
        assert_relative_eq!(out.settle, 2.5);
        assert_eq!(out.outputs, vec![true]);
        let idle = sim.run(&[true], &[true], None).unwrap();
        assert_eq!(idle.settle, 0.0);
        assert_eq!(idle.events, 0);
    }

    #[test]
    fn glitch_of_zero_width_is_invisible() {
        // Both XOR pins flip at the same instant through equal-delay
        // branches, so the transient cancels within one batch.
        let mut b = NetlistBuilder::new(ArchTag::Custom, 1);
        let a = b.add_input().unwrap();
        let i1 = b.add_gate(GateKind::Inv, &[a]).unwrap();
        let i2 = b.add_gate(GateKind::Inv, &[a]).unwrap();
        let x = b.add_gate(GateKind::Xor2, &[i1, i2]).unwrap();
        let n = b.finish(vec![x]).unwrap();
        let sim = EventSim::new(&n, &[1.0, 1.0, 2.0]).unwrap();
        let out = sim.run(&[false], &[true], None).unwrap();
        assert_eq!(out.settle, 0.0, "glitch must not count as a net change");
        assert_eq!(out.outputs, vec![false]);
    }

    #[test]
    fn staggered_branches_do_glitch() {
        let mut b = NetlistBuilder::new(ArchTag::Custom, 1);
        let a = b.add_input().unwrap();
        let i1 = b.add_gate(GateKind::Inv, &[a]).unwrap();
        let i2 = b.add_gate(GateKind::Inv, &[a]).unwrap();
        let x = b.add_gate(GateKind::Xor2, &[i1, i2]).unwrap();
        let n = b.finish(vec![x]).unwrap();
        let sim = EventSim::new(&n, &[1.0, 1.5, 2.0]).unwrap();
        let out = sim.run(&[false], &[true], None).unwrap();
        // Pulse 3.0..3.5, then quiet.
        assert_relative_eq!(out.settle, 3.5);
        assert_eq!(out.outputs, vec![false]);
    }

    #[test]
    fn settle_never_exceeds_static_bound() {
        let p = AgingParams::default();
        let n = build_array_multiplier(3).unwrap();
        let delays = fresh_delays(&n, &p);
        let bound = static_max_delay(&n, &delays);
        let sim = EventSim::new(&n, &delays).unwrap();
        for v in 0..1u64 << 6 {
            let from = vec![false; 6];
            let to: Vec<bool> = (0..6).map(|i| v >> i & 1 == 1).collect();
            let out = sim.run(&from, &to, None).unwrap();
            assert!(out.settle <= bound + 1e-9, "stimulus {v}");
        }
    }

    #[test]
    fn event_outputs_agree_with_functional_eval() {
        let n = build_wallace_multiplier(4).unwrap();
        let p = AgingParams::default();
        let delays = fresh_delays(&n, &p);
        let sim = EventSim::new(&n, &delays).unwrap();
        for (a, bb) in [(3u64, 5u64), (15, 15), (7, 9), (0, 12)] {
            let from = crate::circuit::operand_bits(0, 0, 4);
            let to = crate::circuit::operand_bits(a, bb, 4);
            let out = sim.run(&from, &to, None).unwrap();
            let product: u64 = out
                .outputs
                .iter()
                .enumerate()
                .map(|(k, &bit)| (bit as u64) << k)
                .sum();
            assert_eq!(product, a * bb);
        }
    }

    #[test]
    fn latched_outputs_freeze_at_the_deadline() {
        let mut b = NetlistBuilder::new(ArchTag::Custom, 1);
        let a = b.add_input().unwrap();
        let x = b.add_gate(GateKind::Inv, &[a]).unwrap();
        let y = b.add_gate(GateKind::Inv, &[x]).unwrap();
        let n = b.finish(vec![y]).unwrap();
        let sim = EventSim::new(&n, &[1.0, 1.0]).unwrap();
        let late = sim.run(&[false], &[true], Some(1.5)).unwrap();
        // y flips at 2.0, after the deadline: the latch still holds false.
        assert_eq!(late.latched, Some(vec![false]));
        assert_eq!(late.outputs, vec![true]);
        let ok = sim.run(&[false], &[true], Some(2.0)).unwrap();
        assert_eq!(ok.latched, Some(vec![true]));
    }

    #[test]
    fn fresh_rewiring_is_delay_neutral() {
        // On fresh silicon a rewired adder must be indistinguishable in
        // timing: same static paths, same settle on every stimulus.
        let p = AgingParams::default();
        let n = build_array_multiplier(4).unwrap();
        let mut t = n.clone();
        for (k, adder) in n.adders().iter().enumerate() {
            let perms = Permutation::all(adder.kind.arity());
            t = t.apply_permutation(adder.id, &perms[1 + k % (perms.len() - 1)]).unwrap();
        }
        let d_base = fresh_delays(&n, &p);
        let d_tamp = fresh_delays(&t, &p);
        assert_eq!(d_base, d_tamp);
        assert_eq!(static_max_delay(&n, &d_base), static_max_delay(&t, &d_tamp));
        let sweep_base = delay_sweep(&n, &p, &fresh_vth_nominal(&n, &p), &vec![0.0; n.site_count()], &[0.0], StimulusMode::Exhaustive).unwrap();
        let sweep_tamp = delay_sweep(&t, &p, &fresh_vth_nominal(&t, &p), &vec![0.0; t.site_count()], &[0.0], StimulusMode::Exhaustive).unwrap();
        assert_eq!(sweep_base[0].max_settle, sweep_tamp[0].max_settle);
        assert_eq!(sweep_base[0].mean_settle, sweep_tamp[0].mean_settle);
        assert_eq!(sweep_base[0].static_max, sweep_tamp[0].static_max);
    }

    #[test]
    fn aged_sweep_is_monotone_and_guard_band_holds_fresh() {
        let p = AgingParams::default();
        let n = build_array_multiplier(4).unwrap();
        let stress = compute_stress(&n, &InputProfile::Uniform, StressMode::Exhaustive).unwrap();
        let vth = fresh_vth_nominal(&n, &p);
        let sweep = delay_sweep(&n, &p, &vth, &stress.alpha, &[0.0, 1.0, 4.0], StimulusMode::Exhaustive).unwrap();
        assert!(sweep[0].max_settle < sweep[1].max_settle);
        assert!(sweep[1].max_settle < sweep[2].max_settle);
        let guard = compute_guard_band(&n, &p, 4.0, StimulusMode::Exhaustive).unwrap();
        assert_relative_eq!(guard.p_d, sweep[2].max_settle);
        let report = error_likelihood(&n, &p, &vth, &stress.alpha, &guard, 4.0).unwrap();
        assert_eq!(report.violations, 0, "the reference netlist defines the band");
        let report0 = error_likelihood(&n, &p, &vth, &stress.alpha, &guard, 0.0).unwrap();
        assert_eq!(report0.likelihood, 0.0);
    }

    #[test]
    fn random_pairs_are_reproducible() {
        let p = AgingParams::default();
        let n = build_array_multiplier(4).unwrap();
        let vth = fresh_vth_nominal(&n, &p);
        let alpha = vec![0.4; n.site_count()];
        let mode = StimulusMode::RandomPairs { count: 32, seed: 9 };
        let a = delay_sweep(&n, &p, &vth, &alpha, &[2.0], mode).unwrap();
        let b = delay_sweep(&n, &p, &vth, &alpha, &[2.0], mode).unwrap();
        assert_eq!(a, b);
    }
}
