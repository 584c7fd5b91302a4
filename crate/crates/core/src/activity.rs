//! Signal activity and per-transistor stress duties.
//!
//! The stress duty of a transistor site is the probability that the signal
//! on its pin sits at logic 0 under the given input profile. Exhaustive mode
//! enumerates every input assignment (64 lanes at a time); sampled mode
//! draws random assignments from a counter-addressed stream so results do
//! not depend on thread count.
//!
//! `StressBasis` captures enough statistics of the untampered netlist to
//! reconstruct the stress map of any rewired variant without re-simulating:
//! pin permutations only shuffle which signal sits on which site, except for
//! the full adder's internal pair XOR, whose zero probability is the
//! equality probability of the two signals routed to it. Per-signal zero
//! probabilities plus per-adder pairwise equality probabilities therefore
//! determine every variant's map exactly.

use crate::circuit::{AdderKind, AdderMembers, Netlist};
use crate::error::{CoreError, Result};
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InputProfile {
    /// Independent fair bits on every primary input.
    Uniform,
    /// Independent bits with a per-input probability of being 1.
    Weighted(Vec<f64>),
}

impl InputProfile {
    pub fn validate(&self, n_inputs: usize) -> Result<()> {
        if let InputProfile::Weighted(p) = self {
            if p.len() != n_inputs {
                return Err(CoreError::Stress(format!(
                    "weighted profile has {} entries for {n_inputs} inputs",
                    p.len()
                )));
            }
            if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(CoreError::Stress("input probabilities must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StressMode {
    /// Enumerate all input assignments; needs at most 20 input bits.
    Exhaustive,
    /// Monte Carlo over input assignments.
    Sampled { samples: u64, seed: u64 },
}

/// Per-site stress duties plus the uncertainty of each estimate
/// (zero for exhaustive counts, a 95% half-width for sampled ones).
#[derive(Debug, Clone, PartialEq)]
pub struct StressMap {
    pub alpha: Vec<f64>,
    pub half_width: Vec<f64>,
    pub mode: StressMode,
}

impl StressMap {
    /// `gate_id,pin,alpha,confidence` rows, one per transistor site.
    pub fn to_csv(&self, netlist: &Netlist) -> String {
        let mut s = String::from("gate_id,pin,alpha,confidence\n");
        for site in netlist.sites() {
            let k = netlist.site_index(site);
            s.push_str(&format!(
                "{},{},{},{}\n",
                site.gate,
                site.pin,
                self.alpha[k],
                1.0 - self.half_width[k]
            ));
        }
        s
    }
}

/// Zero and pairwise-equality statistics of every signal under a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalStats {
    /// Probability of logic 0, per signal.
    pub zero_prob: Vec<f64>,
    /// Per adder: equality probability of logical input pairs
    /// (0,1), (0,2), (1,2); half adders fill slot 0 only.
    pub pair_eq: Vec<[f64; 3]>,
}

const LANE_PATTERNS: [u64; 6] = [
    0xaaaa_aaaa_aaaa_aaaa,
    0xcccc_cccc_cccc_cccc,
    0xf0f0_f0f0_f0f0_f0f0,
    0xff00_ff00_ff00_ff00,
    0xffff_0000_ffff_0000,
    0xffff_ffff_0000_0000,
];

fn pair_list(netlist: &Netlist) -> Vec<[(u32, u32); 3]> {
    netlist
        .adders()
        .iter()
        .map(|a| {
            let s = |i: usize| a.inputs[i].0;
            match a.kind {
                AdderKind::Half => [(s(0), s(1)), (0, 0), (0, 0)],
                AdderKind::Full => [(s(0), s(1)), (s(0), s(2)), (s(1), s(2))],
            }
        })
        .collect()
}

pub fn signal_statistics(
    netlist: &Netlist,
    profile: &InputProfile,
    mode: StressMode,
) -> Result<SignalStats> {
    let n = netlist.input_count();
    profile.validate(n)?;
    let pairs = pair_list(netlist);

    match (mode, profile) {
        (StressMode::Exhaustive, InputProfile::Uniform) => {
            if n > 20 {
                return Err(CoreError::Stress(format!(
                    "exhaustive enumeration over {n} input bits is out of reach"
                )));
            }
            let total = 1u64 << n;
            let mut zeros = vec![0u64; netlist.signal_count()];
            let mut eq = vec![[0u64; 3]; pairs.len()];
            let mut words = vec![0u64; n];
            let batches = total.div_ceil(64);
            for b in 0..batches {
                let lanes = (total - b * 64).min(64);
                let mask = if lanes == 64 { !0u64 } else { (1u64 << lanes) - 1 };
                for (i, w) in words.iter_mut().enumerate() {
                    *w = if i < 6 {
                        LANE_PATTERNS[i]
                    } else if b >> (i - 6) & 1 == 1 {
                        !0
                    } else {
                        0
                    };
                }
                let vals = netlist.evaluate_words(&words)?;
                for (z, v) in zeros.iter_mut().zip(&vals) {
                    *z += (!v & mask).count_ones() as u64;
                }
                for (e, p) in eq.iter_mut().zip(&pairs) {
                    for k in 0..3 {
                        let (a, b2) = p[k];
                        e[k] += (!(vals[a as usize] ^ vals[b2 as usize]) & mask).count_ones() as u64;
                    }
                }
            }
            let m = total as f64;
            Ok(SignalStats {
                zero_prob: zeros.iter().map(|&z| z as f64 / m).collect(),
                pair_eq: eq
                    .iter()
                    .map(|e| [e[0] as f64 / m, e[1] as f64 / m, e[2] as f64 / m])
                    .collect(),
            })
        }
        (StressMode::Exhaustive, InputProfile::Weighted(p)) => {
            if n > 20 {
                return Err(CoreError::Stress(format!(
                    "exhaustive enumeration over {n} input bits is out of reach"
                )));
            }
            let total = 1u64 << n;
            let mut zeros = vec![0f64; netlist.signal_count()];
            let mut eq = vec![[0f64; 3]; pairs.len()];
            let mut words = vec![0u64; n];
            let batches = total.div_ceil(64);
            for b in 0..batches {
                let lanes = (total - b * 64).min(64) as usize;
                for (i, w) in words.iter_mut().enumerate() {
                    *w = if i < 6 {
                        LANE_PATTERNS[i]
                    } else if b >> (i - 6) & 1 == 1 {
                        !0
                    } else {
                        0
                    };
                }
                let mut weight = [0f64; 64];
                for (l, wt) in weight.iter_mut().enumerate().take(lanes) {
                    let g = b * 64 + l as u64;
                    *wt = (0..n)
                        .map(|i| if g >> i & 1 == 1 { p[i] } else { 1.0 - p[i] })
                        .product();
                }
                let vals = netlist.evaluate_words(&words)?;
                for (z, v) in zeros.iter_mut().zip(&vals) {
                    for (l, wt) in weight.iter().enumerate().take(lanes) {
                        if v >> l & 1 == 0 {
                            *z += wt;
                        }
                    }
                }
                for (e, pr) in eq.iter_mut().zip(&pairs) {
                    for k in 0..3 {
                        let (a, b2) = pr[k];
                        let same = !(vals[a as usize] ^ vals[b2 as usize]);
                        for (l, wt) in weight.iter().enumerate().take(lanes) {
                            if same >> l & 1 == 1 {
                                e[k] += wt;
                            }
                        }
                    }
                }
            }
            Ok(SignalStats { zero_prob: zeros, pair_eq: eq })
        }
        (StressMode::Sampled { samples, seed }, profile) => {
            if samples == 0 {
                return Err(CoreError::Stress("sample count must be positive".into()));
            }
            let mut zeros = vec![0u64; netlist.signal_count()];
            let mut eq = vec![[0u64; 3]; pairs.len()];
            let mut words = vec![0u64; n];
            let batches = samples.div_ceil(64);
            for b in 0..batches {
                let lanes = (samples - b * 64).min(64);
                let mask = if lanes == 64 { !0u64 } else { (1u64 << lanes) - 1 };
                let mut r = rng::stream(seed, rng::tag::STRESS_SAMPLE, b);
                for (i, w) in words.iter_mut().enumerate() {
                    *w = match profile {
                        InputProfile::Uniform => r.gen::<u64>(),
                        InputProfile::Weighted(p) => {
                            let mut v = 0u64;
                            for l in 0..64 {
                                if r.gen::<f64>() < p[i] {
                                    v |= 1 << l;
                                }
                            }
                            v
                        }
                    };
                }
                let vals = netlist.evaluate_words(&words)?;
                for (z, v) in zeros.iter_mut().zip(&vals) {
                    *z += (!v & mask).count_ones() as u64;
                }
                for (e, p) in eq.iter_mut().zip(&pairs) {
                    for k in 0..3 {
                        let (a, b2) = p[k];
                        e[k] += (!(vals[a as usize] ^ vals[b2 as usize]) & mask).count_ones() as u64;
                    }
                }
            }
            let m = samples as f64;
            Ok(SignalStats {
                zero_prob: zeros.iter().map(|&z| z as f64 / m).collect(),
                pair_eq: eq
                    .iter()
                    .map(|e| [e[0] as f64 / m, e[1] as f64 / m, e[2] as f64 / m])
                    .collect(),
            })
        }
    }
}

fn map_from_stats(netlist: &Netlist, stats: &SignalStats, mode: StressMode) -> StressMap {
    // The pair XOR inside a full adder sees the equality of the two signals
    // routed to it; every other pin just sees its driving signal.
    let mut s1_pin: Vec<Option<u32>> = vec![None; netlist.gates().len()];
    for adder in netlist.adders() {
        if let AdderMembers::Full { xor_sum, .. } = adder.members {
            s1_pin[xor_sum as usize] = Some(adder.id);
        }
    }
    let mut alpha = Vec::with_capacity(netlist.site_count());
    for site in netlist.sites() {
        let g = site.gate as usize;
        let a = match (s1_pin[g], site.pin) {
            (Some(adder_id), 0) => {
                let adder = &netlist.adders()[adder_id as usize];
                let w = adder.wiring.as_slice();
                let (x, y) = (w[0].min(w[1]), w[0].max(w[1]));
                let slot = match (x, y) {
                    (0, 1) => 0,
                    (0, 2) => 1,
                    _ => 2,
                };
                stats.pair_eq[adder_id as usize][slot]
            }
            _ => {
                let sig = netlist.gates()[g].inputs[site.pin as usize];
                stats.zero_prob[sig.index()]
            }
        };
        alpha.push(a);
    }
    let half_width = match mode {
        StressMode::Exhaustive => vec![0.0; alpha.len()],
        StressMode::Sampled { samples, .. } => alpha
            .iter()
            .map(|&a| 1.96 * (a * (1.0 - a) / samples as f64).sqrt())
            .collect(),
    };
    StressMap { alpha, half_width, mode }
}

/// Stress map of `netlist` as wired, by direct measurement.
pub fn compute_stress(
    netlist: &Netlist,
    profile: &InputProfile,
    mode: StressMode,
) -> Result<StressMap> {
    let stats = signal_statistics(netlist, profile, mode)?;
    Ok(map_from_stats(netlist, &stats, mode))
}

/// Statistics of an untampered netlist, reusable for every rewired variant.
#[derive(Debug, Clone, PartialEq)]
pub struct StressBasis {
    stats: SignalStats,
    mode: StressMode,
    base_hash: String,
}

impl StressBasis {
    pub fn build(netlist: &Netlist, profile: &InputProfile, mode: StressMode) -> Result<StressBasis> {
        Ok(StressBasis {
            stats: signal_statistics(netlist, profile, mode)?,
            mode,
            base_hash: netlist.content_hash(),
        })
    }

    /// Stress map of any rewiring of the basis netlist. The variant must
    /// share the base structure; only adder pin arrangements may differ.
    pub fn stress_map(&self, variant: &Netlist) -> StressMap {
        map_from_stats(variant, &self.stats, self.mode)
    }

    pub fn base_hash(&self) -> &str {
        &self.base_hash
    }

    pub fn stats(&self) -> &SignalStats {
        &self.stats
    }
}

/// Bin stress duties into `bins` equal slices of [0, 1]; 1.0 lands in the
/// last bin.
pub fn stress_histogram(alpha: &[f64], bins: usize) -> Vec<u64> {
    let mut h = vec![0u64; bins];
    for &a in alpha {
        let k = ((a * bins as f64) as usize).min(bins - 1);
        h[k] += 1;
    }
    h
}
