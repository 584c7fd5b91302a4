//! Greedy rewiring of commutative adder pins, and two reference trojans
//! the rewiring attack is compared against.
//!
//! The attacker permutes the input pins of full and half adders. Every
//! permutation computes the same sum, and on fresh silicon every route
//! through a block costs the same, so the tampered part passes functional
//! and timing sign-off. What the permutation does change is which signal's
//! duty cycle stresses which PMOS site, and a full adder's sum stage is
//! slower through the pair pins than through the carry-in pin by exactly
//! the pair stage's accumulated wear. Parking a path's late signal on a
//! pair pin therefore makes the path age faster than the designer planned.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::activity::{compute_stress, InputProfile, SignalStats, StressBasis};
use crate::aging::{effective_gate_delays, fresh_vth_nominal, AgingParams};
use crate::circuit::{AdderInstance, AdderMembers, Netlist, Permutation, SignalId};
use crate::error::{CoreError, Result};
use crate::timing::{
    best_arrivals, best_departures, error_likelihood, natural_stress_mode, static_critical_paths,
    ErrorReport, GuardBand, Hop, PathDescriptor,
};

/// How many critical paths the attack walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathScope {
    Top(usize),
    All,
}

impl PathScope {
    fn label(&self) -> String {
        match self {
            PathScope::Top(k) => k.to_string(),
            PathScope::All => "All".to_string(),
        }
    }
}

/// Per-path tampering budget: an absolute commit count, or a percentage of
/// the adders the path crosses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerPathBudget {
    Count(usize),
    Fraction(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackBudget {
    pub k_paths: PathScope,
    pub per_path: PerPathBudget,
}

impl AttackBudget {
    pub fn validate(&self) -> Result<()> {
        if let PathScope::Top(0) = self.k_paths {
            return Err(CoreError::Attack("at least one path must be attacked".into()));
        }
        if let PerPathBudget::Fraction(f) = self.per_path {
            if !matches!(f, 25 | 50 | 75 | 100) {
                return Err(CoreError::Attack(format!(
                    "unsupported path fraction {f}%, expected 25/50/75/100"
                )));
            }
        }
        Ok(())
    }

    pub fn tag(&self) -> String {
        match self.per_path {
            PerPathBudget::Fraction(f) => format!("M-{}-{}%", self.k_paths.label(), f),
            PerPathBudget::Count(n) => format!("M-{}-n{}", self.k_paths.label(), n),
        }
    }
}

/// One committed pin arrangement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub adder: u32,
    /// Absolute arrangement: wiring[i] = designed input sitting on pin i.
    pub wiring: Permutation,
    /// Rank of the originating path after sorting by tampered delay.
    pub path_rank: usize,
    /// Greedy iteration within that path.
    pub iteration: usize,
    /// Predicted horizon path-delay gain of this commit, time units.
    pub predicted_gain: f64,
}

/// A rewiring recipe bound to one netlist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TamperPlan {
    pub config_tag: String,
    pub netlist_hash: String,
    pub horizon_years: f64,
    /// Union order: path rank, then commit order. One entry per adder.
    pub entries: Vec<PlanEntry>,
    pub notes: Vec<String>,
}

impl TamperPlan {
    pub fn empty(netlist: &Netlist, tag: &str) -> TamperPlan {
        TamperPlan {
            config_tag: tag.to_string(),
            netlist_hash: netlist.content_hash(),
            horizon_years: 0.0,
            entries: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Rewire `base` according to the plan.
    pub fn apply(&self, base: &Netlist) -> Result<Netlist> {
        let hash = base.content_hash();
        if hash != self.netlist_hash {
            return Err(CoreError::PlanMismatch(format!(
                "plan {} targets netlist {}, got {}",
                self.config_tag, self.netlist_hash, hash
            )));
        }
        let mut out = base.clone();
        for e in &self.entries {
            out = out.with_wiring(e.adder, e.wiring)?;
        }
        Ok(out)
    }

    /// First `n` entries in union rank order, under a new tag.
    pub fn truncated(&self, n: usize, tag: &str) -> TamperPlan {
        TamperPlan {
            config_tag: tag.to_string(),
            netlist_hash: self.netlist_hash.clone(),
            horizon_years: self.horizon_years,
            entries: self.entries.iter().take(n).cloned().collect(),
            notes: self.notes.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<TamperPlan> {
        serde_json::from_str(s)
            .map_err(|e| CoreError::Format(format!("malformed tamper plan: {e}")))
    }
}

/// Horizon-aged delay of one path crossing of `adder` under `wiring`,
/// entered on `entry`. Mirrors `effective_gate_delays` followed by
/// `PathDescriptor::routed_delay`, but touches only this block.
fn crossing_cost(
    netlist: &Netlist,
    params: &AgingParams,
    stats: &SignalStats,
    adder: &AdderInstance,
    wiring: &Permutation,
    entry: SignalId,
    sum_hop: bool,
    horizon: f64,
) -> Result<f64> {
    let w = wiring.as_slice();
    let sig = |pos: usize| adder.inputs[w[pos] as usize];
    let zp = |s: SignalId| stats.zero_prob[s.index()];
    let aged = |kind, alphas: &[f64]| -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for &a in alphas {
            let (v, _) = params.vth_at(params.vth_nominal, a, horizon)?;
            worst = worst.max(v);
        }
        Ok(params.gate_delay(kind, worst))
    };
    use crate::circuit::GateKind::*;
    match (adder.members, sum_hop) {
        (AdderMembers::Full { .. }, true) => {
            let (lo, hi) = (w[0].min(w[1]), w[0].max(w[1]));
            let slot = match (lo, hi) {
                (0, 1) => 0,
                (0, 2) => 1,
                _ => 2,
            };
            let s1_alpha = stats.pair_eq[adder.id as usize][slot];
            let sum = aged(Xor2, &[s1_alpha, zp(sig(2))])?;
            let li = adder
                .input_slice()
                .iter()
                .position(|&s| s == entry)
                .ok_or_else(|| {
                    CoreError::Attack(format!("signal {entry} is not an input of adder {}", adder.id))
                })?;
            let pos = w.iter().position(|&m| m as usize == li).unwrap();
            if pos < 2 {
                let pair = aged(Xor2, &[zp(sig(0)), zp(sig(1))])?;
                Ok((pair - params.d0.xor2).max(0.0) + sum)
            } else {
                Ok(sum)
            }
        }
        (AdderMembers::Full { .. }, false) => {
            aged(Maj3, &[zp(sig(0)), zp(sig(1)), zp(sig(2))])
        }
        (AdderMembers::Half { .. }, true) => aged(Xor2, &[zp(sig(0)), zp(sig(1))]),
        (AdderMembers::Half { nand, .. }, false) => {
            let nand_out = netlist.gates()[nand as usize].output;
            Ok(aged(Nand2, &[zp(sig(0)), zp(sig(1))])? + aged(Inv, &[zp(nand_out)])?)
        }
    }
}

struct Candidate {
    hop_index: usize,
    adder: u32,
    perms: Vec<Permutation>,
    costs: Vec<f64>,
    current: usize,
}

struct PathAttack {
    descriptor: PathDescriptor,
    commits: Vec<PlanEntry>,
    natural_delay: f64,
    final_delay: f64,
    exhausted_note: Option<String>,
}

/// Algorithm: reset to the pristine wiring, then repeatedly commit the
/// single (adder, permutation) with the largest predicted horizon path-delay
/// gain, ties toward the lower adder id and the lexicographically smaller
/// permutation, stopping at the budget or when no strictly positive gain
/// remains.
fn greedy_on_path(
    netlist: &Netlist,
    params: &AgingParams,
    stats: &SignalStats,
    aged_base: &[f64],
    path: PathDescriptor,
    cap: usize,
    note_exhaustion: bool,
    horizon: f64,
) -> Result<PathAttack> {
    let mut hop_cost: Vec<f64> = Vec::with_capacity(path.hops.len());
    let mut cands: Vec<Candidate> = Vec::new();
    for (k, (&hop, &entry)) in path.hops.iter().zip(&path.hop_entries).enumerate() {
        match hop {
            Hop::Gate(g) => hop_cost.push(aged_base[g as usize]),
            Hop::AdderSum(a) | Hop::AdderCout(a) => {
                let adder = netlist.adder(a)?;
                let sum_hop = matches!(hop, Hop::AdderSum(_));
                let perms = Permutation::all(adder.kind.arity());
                let mut costs = Vec::with_capacity(perms.len());
                for p in &perms {
                    costs.push(crossing_cost(netlist, params, stats, adder, p, entry, sum_hop, horizon)?);
                }
                let current = perms
                    .iter()
                    .position(|p| p == &adder.wiring)
                    .ok_or_else(|| CoreError::Attack(format!("adder {a} has an unknown wiring")))?;
                hop_cost.push(costs[current]);
                cands.push(Candidate { hop_index: k, adder: a, perms, costs, current });
            }
        }
    }
    // Tie-break order wants ascending adder ids, not path order.
    cands.sort_by_key(|c| c.adder);

    let natural_delay = hop_cost.iter().sum::<f64>();
    let mut commits = Vec::new();
    let mut exhausted_note = None;
    for iteration in 0.. {
        if commits.len() >= cap {
            break;
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for (ci, c) in cands.iter().enumerate() {
            for (pi, _) in c.perms.iter().enumerate() {
                let gain = c.costs[pi] - c.costs[c.current];
                if gain > best.map_or(0.0, |b| b.0) {
                    best = Some((gain, ci, pi));
                }
            }
        }
        let Some((gain, ci, pi)) = best else {
            if note_exhaustion && commits.len() < cap {
                exhausted_note = Some(format!(
                    "budget asked for {cap} commits, path only offered {}",
                    commits.len()
                ));
            }
            break;
        };
        let c = &mut cands[ci];
        c.current = pi;
        hop_cost[c.hop_index] = c.costs[pi];
        commits.push(PlanEntry {
            adder: c.adder,
            wiring: c.perms[pi],
            path_rank: usize::MAX,
            iteration,
            predicted_gain: gain,
        });
    }
    let final_delay = hop_cost.iter().sum::<f64>();
    Ok(PathAttack {
        descriptor: path,
        commits,
        natural_delay,
        final_delay,
        exhausted_note,
    })
}

/// The longest path through `sig`, reconstructed from the arrival and
/// departure tie-broken DP predecessors.
fn maximal_path_through(
    netlist: &Netlist,
    apred: &[Option<SignalId>],
    dnext: &[Option<u32>],
    sig: SignalId,
) -> Vec<SignalId> {
    let mut back = vec![sig];
    let mut cur = sig;
    while let Some(p) = apred[cur.index()] {
        back.push(p);
        cur = p;
    }
    back.reverse();
    let mut cur = sig;
    while let Some(g) = dnext[cur.index()] {
        cur = netlist.gates()[g as usize].output;
        back.push(cur);
    }
    back
}

fn select_paths(
    netlist: &Netlist,
    d0: &[f64],
    scope: PathScope,
) -> Result<Vec<PathDescriptor>> {
    match scope {
        PathScope::Top(k) => {
            let paths = static_critical_paths(netlist, d0, k)?;
            if paths.is_empty() {
                return Err(CoreError::Attack("netlist has no input-to-output paths".into()));
            }
            Ok(paths)
        }
        PathScope::All => {
            let (arr, apred) = best_arrivals(netlist, d0);
            let (dep, dnext) = best_departures(netlist, d0);
            let mut seen = HashSet::new();
            let mut paths = Vec::new();
            for adder in netlist.adders() {
                // The class path of an adder is the longest path through
                // either of its outputs.
                let through = |s: SignalId| arr[s.index()] + dep[s.index()];
                let anchor = if through(adder.sum) >= through(adder.cout) {
                    adder.sum
                } else {
                    adder.cout
                };
                if dep[anchor.index()] == f64::NEG_INFINITY {
                    continue;
                }
                let signals = maximal_path_through(netlist, &apred, &dnext, anchor);
                if seen.insert(signals.clone()) {
                    paths.push(PathDescriptor::from_signals(netlist, d0, signals)?);
                }
            }
            if paths.is_empty() {
                return Err(CoreError::Attack("netlist has no adders to attack".into()));
            }
            paths.sort_by(|a, b| {
                b.delay
                    .total_cmp(&a.delay)
                    .then_with(|| a.signals.cmp(&b.signals))
            });
            Ok(paths)
        }
    }
}

/// Run the greedy rewiring attack and emit the union plan.
///
/// Each selected path is attacked from the pristine netlist; the per-path
/// commit sequences are then ranked by final tampered path delay and merged
/// in that order. A merged path fixes the arrangement of every adder it
/// crosses, the ones it deliberately left natural included, so later paths
/// only get to commit adders outside all earlier footprints. Without that
/// rule a lesser path's commit can pull a better path's entry signal off
/// the slow pin and undo its aging. `Fraction` budgets keep the leading
/// ceil(y% * adders-on-path) commits of a path's sequence.
pub fn run_algorithm1(
    netlist: &Netlist,
    profile: &InputProfile,
    params: &AgingParams,
    budget: &AttackBudget,
    horizon_years: f64,
) -> Result<TamperPlan> {
    budget.validate()?;
    params.validate()?;
    if !(horizon_years > 0.0) {
        return Err(CoreError::Attack(format!(
            "evaluation horizon must be positive, got {horizon_years}"
        )));
    }
    let basis = StressBasis::build(netlist, profile, natural_stress_mode(netlist))?;
    let stats = basis.stats();
    let vth = fresh_vth_nominal(netlist, params);
    let alpha = basis.stress_map(netlist).alpha;
    let d0 = effective_gate_delays(netlist, params, &vth, &alpha, 0.0)?.per_gate;
    let aged = effective_gate_delays(netlist, params, &vth, &alpha, horizon_years)?.per_gate;
    let paths = select_paths(netlist, &d0, budget.k_paths)?;

    let mut attacks = Vec::with_capacity(paths.len());
    for path in paths {
        let (cap, note) = match budget.per_path {
            PerPathBudget::Count(n) => (n, true),
            PerPathBudget::Fraction(f) => ((f as usize * path.adders.len()).div_ceil(100), false),
        };
        attacks.push(greedy_on_path(
            netlist,
            params,
            stats,
            &aged,
            path,
            cap,
            note,
            horizon_years,
        )?);
    }
    attacks.sort_by(|a, b| {
        b.final_delay
            .total_cmp(&a.final_delay)
            .then_with(|| b.natural_delay.total_cmp(&a.natural_delay))
            .then_with(|| a.descriptor.signals.cmp(&b.descriptor.signals))
    });

    let mut plan = TamperPlan {
        config_tag: budget.tag(),
        netlist_hash: netlist.content_hash(),
        horizon_years,
        entries: Vec::new(),
        notes: Vec::new(),
    };
    let mut reserved = HashSet::new();
    for (rank, attack) in attacks.iter().enumerate() {
        for commit in &attack.commits {
            if !reserved.contains(&commit.adder) {
                let mut e = commit.clone();
                e.path_rank = rank;
                plan.entries.push(e);
            }
        }
        reserved.extend(attack.descriptor.adders.iter().copied());
        if let Some(note) = &attack.exhausted_note {
            plan.notes.push(format!("path {rank}: {note}"));
        }
    }
    Ok(plan)
}

/// The M-x-y% family from one call: x paths, top y% of each path's commits.
pub fn build_config(
    netlist: &Netlist,
    profile: &InputProfile,
    params: &AgingParams,
    scope: PathScope,
    y_percent: u8,
    horizon_years: f64,
) -> Result<TamperPlan> {
    let budget = AttackBudget { k_paths: scope, per_path: PerPathBudget::Fraction(y_percent) };
    run_algorithm1(netlist, profile, params, &budget, horizon_years)
}

/// Initial per-site threshold voltages plus stress duties: everything aging
/// needs, and everything the reference trojans corrupt.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteStates {
    pub vth0: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl SiteStates {
    /// Nominal-corner states under natural operation.
    pub fn natural(netlist: &Netlist, profile: &InputProfile, params: &AgingParams) -> Result<SiteStates> {
        let stress = compute_stress(netlist, profile, natural_stress_mode(netlist))?;
        Ok(SiteStates {
            vth0: fresh_vth_nominal(netlist, params),
            alpha: stress.alpha,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BaselineKind {
    /// Fabrication-side trojan: targeted sites start with a thickened
    /// threshold, slow from day one.
    PvTrojan { vth_boost_fraction: f64 },
    /// Duty-cycle corruptor: targeted sites see a skewed input duty,
    /// modeled as a forced high stress probability.
    DccTrojan { forced_alpha_high: f64 },
}

impl BaselineKind {
    /// Default boost 0.3% of nominal (about 0.07 sigma of the fabrication
    /// spread): heavier skews either trip fresh timing screens outright or
    /// overshoot a duty-cycle trojan at the service horizon, and this trojan's
    /// whole premise is hiding inside the process-variation noise.
    pub fn pv_default() -> BaselineKind {
        BaselineKind::PvTrojan { vth_boost_fraction: 0.003 }
    }

    pub fn dcc_default() -> BaselineKind {
        BaselineKind::DccTrojan { forced_alpha_high: 0.9 }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            BaselineKind::PvTrojan { .. } => "PV_TROJAN",
            BaselineKind::DccTrojan { .. } => "DCC_TROJAN",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BaselineKind::PvTrojan { vth_boost_fraction } if vth_boost_fraction <= 0.0 => Err(
                CoreError::Attack(format!("vth boost must be positive, got {vth_boost_fraction}")),
            ),
            BaselineKind::DccTrojan { forced_alpha_high }
                if !(forced_alpha_high > 0.5 && forced_alpha_high <= 1.0) =>
            {
                Err(CoreError::Attack(format!(
                    "forced duty must sit in (0.5, 1], got {forced_alpha_high}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Sites of every gate a path's route crosses, duplicates removed.
pub fn path_target_sites(netlist: &Netlist, path: &PathDescriptor) -> Result<Vec<usize>> {
    let mut gates: Vec<u32> = Vec::new();
    for (&hop, &entry) in path.hops.iter().zip(&path.hop_entries) {
        match hop {
            Hop::Gate(g) => gates.push(g),
            Hop::AdderSum(a) => {
                let adder = netlist.adder(a)?;
                match adder.members {
                    AdderMembers::Half { xor_sum, .. } => gates.push(xor_sum),
                    AdderMembers::Full { xor_pair, xor_sum, .. } => {
                        let li = adder
                            .input_slice()
                            .iter()
                            .position(|&s| s == entry)
                            .ok_or_else(|| {
                                CoreError::Attack(format!(
                                    "signal {entry} is not an input of adder {a}"
                                ))
                            })?;
                        let pos = adder.wiring.as_slice().iter().position(|&m| m as usize == li).unwrap();
                        if pos < 2 {
                            gates.push(xor_pair);
                        }
                        gates.push(xor_sum);
                    }
                }
            }
            Hop::AdderCout(a) => {
                let adder = netlist.adder(a)?;
                match adder.members {
                    AdderMembers::Full { maj, .. } => gates.push(maj),
                    AdderMembers::Half { nand, inv, .. } => {
                        gates.push(nand);
                        gates.push(inv);
                    }
                }
            }
        }
    }
    let mut sites: Vec<usize> = gates
        .into_iter()
        .flat_map(|g| netlist.gate_site_range(g as usize))
        .collect();
    sites.sort_unstable();
    sites.dedup();
    Ok(sites)
}

/// Corrupt `states` in place on `sites`.
pub fn apply_baseline(kind: BaselineKind, states: &mut SiteStates, sites: &[usize]) -> Result<()> {
    kind.validate()?;
    for &s in sites {
        if s >= states.vth0.len() {
            return Err(CoreError::Attack(format!("site {s} out of range")));
        }
        match kind {
            BaselineKind::PvTrojan { vth_boost_fraction } => {
                states.vth0[s] *= 1.0 + vth_boost_fraction;
            }
            BaselineKind::DccTrojan { forced_alpha_high } => {
                states.alpha[s] = forced_alpha_high;
            }
        }
    }
    Ok(())
}

/// One attack's error-likelihood trajectory over a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackedErrorSeries {
    pub tag: String,
    /// Hash of the netlist the series ran on; the reference trojans leave
    /// the wiring alone, so they carry the untampered hash.
    pub netlist_hash: String,
    pub reports: Vec<ErrorReport>,
}

/// Error-likelihood trajectories of the rewiring attack and both reference
/// trojans, all judged against one shared guard band.
pub fn compare_attacks(
    netlist: &Netlist,
    profile: &InputProfile,
    params: &AgingParams,
    guard: &GuardBand,
    t_grid: &[f64],
    horizon_years: f64,
) -> Result<Vec<AttackedErrorSeries>> {
    let basis = StressBasis::build(netlist, profile, natural_stress_mode(netlist))?;
    let vth_nominal = fresh_vth_nominal(netlist, params);
    let mut out = Vec::new();

    for scope in [PathScope::Top(1), PathScope::All] {
        let plan = build_config(netlist, profile, params, scope, 100, horizon_years)?;
        let tampered = plan.apply(netlist)?;
        let alpha = basis.stress_map(&tampered).alpha;
        let mut reports = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            reports.push(error_likelihood(&tampered, params, &vth_nominal, &alpha, guard, t)?);
        }
        out.push(AttackedErrorSeries {
            tag: plan.config_tag.clone(),
            netlist_hash: tampered.content_hash(),
            reports,
        });
    }

    let d0 = {
        let stress = basis.stress_map(netlist);
        effective_gate_delays(netlist, params, &vth_nominal, &stress.alpha, 0.0)?.per_gate
    };
    let top = static_critical_paths(netlist, &d0, 1)?
        .into_iter()
        .next()
        .ok_or_else(|| CoreError::Attack("netlist has no input-to-output paths".into()))?;
    let sites = path_target_sites(netlist, &top)?;
    for kind in [BaselineKind::pv_default(), BaselineKind::dcc_default()] {
        let mut states = SiteStates::natural(netlist, profile, params)?;
        apply_baseline(kind, &mut states, &sites)?;
        let mut reports = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            reports.push(error_likelihood(netlist, params, &states.vth0, &states.alpha, guard, t)?);
        }
        out.push(AttackedErrorSeries {
            tag: kind.tag().to_string(),
            netlist_hash: netlist.content_hash(),
            reports,
        });
    }
    Ok(out)
}
