//! Per-operand-pair fault model of an aged multiplier.
//!
//! A vector pipeline latches the multiplier's outputs one guard band after
//! launching the operands, whether or not the logic has settled. The fault
//! model is therefore not random corruption: for every operand pair we drive
//! the event simulator from all-zeros to the pair, capture the outputs as a
//! register would at the deadline, and keep the captured word wherever it
//! disagrees with the true product. A table built this way can replay the
//! aged hardware's exact behaviour anywhere a multiply is needed.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::activity::{compute_stress, InputProfile};
use crate::aging::{effective_gate_delays, fresh_vth_nominal, AgingParams};
use crate::circuit::{operand_bits, Netlist};
use crate::error::{CoreError, Result};
use crate::rng;
use crate::timing::{natural_stress_mode, EventSim, GuardBand};

const MAGIC: &[u8; 8] = b"AGWFAULT";
const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    /// Every operand pair; only feasible up to 8-bit operands (65536 pairs).
    Exhaustive,
    /// Seeded random pairs; duplicates collapse.
    Sampled { count: u64, seed: u64 },
}

/// Behavioural stand-in for one aged multiplier at one age.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultTable {
    pub width: u16,
    pub t_years: f64,
    /// Latch deadline, from the guard band the table was built against.
    pub p_d: f64,
    /// Content hash of the netlist whose behaviour the table replays.
    pub netlist_hash: String,
    pub coverage: Coverage,
    /// Pairs whose settle time exceeded the deadline.
    pub violating: u64,
    /// Pairs actually probed (coverage count minus sampling duplicates).
    pub probed: u64,
    entries: BTreeMap<u32, u32>,
}

impl FaultTable {
    pub fn pair_index(a: u32, b: u32, width: u16) -> u32 {
        (a << width) | b
    }

    /// The product the aged hardware would deliver.
    pub fn product(&self, a: u32, b: u32) -> Result<u32> {
        let bound = 1u32 << self.width;
        if a >= bound || b >= bound {
            return Err(CoreError::Fault(format!(
                "operands {a}x{b} exceed table width {}",
                self.width
            )));
        }
        Ok(self
            .entries
            .get(&Self::pair_index(a, b, self.width))
            .copied()
            .unwrap_or(a * b))
    }

    /// Pairs stored because the latched word differs from the true product.
    pub fn faulty_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        if self.netlist_hash.len() != 64 || !self.netlist_hash.bytes().all(|b| b.is_ascii_hexdigit())
        {
            return Err(CoreError::Fault("netlist hash must be 64 hex chars".into()));
        }
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.width.to_le_bytes())?;
        w.write_all(&self.t_years.to_le_bytes())?;
        w.write_all(&self.p_d.to_le_bytes())?;
        w.write_all(self.netlist_hash.as_bytes())?;
        let (kind, count, seed) = match self.coverage {
            Coverage::Exhaustive => (0u8, 0u64, 0u64),
            Coverage::Sampled { count, seed } => (1u8, count, seed),
        };
        w.write_all(&[kind])?;
        w.write_all(&count.to_le_bytes())?;
        w.write_all(&seed.to_le_bytes())?;
        w.write_all(&self.violating.to_le_bytes())?;
        w.write_all(&self.probed.to_le_bytes())?;
        w.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        for (&pair, &product) in &self.entries {
            w.write_all(&pair.to_le_bytes())?;
            w.write_all(&product.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write_to(&mut out)?;
        Ok(out)
    }

    pub fn read_from(r: &mut impl Read) -> Result<FaultTable> {
        fn take<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
            let mut buf = [0u8; N];
            r.read_exact(&mut buf)?;
            Ok(buf)
        }
        let magic: [u8; 8] = take(r)?;
        if &magic != MAGIC {
            return Err(CoreError::Format("not a fault table file".into()));
        }
        let version = u16::from_le_bytes(take(r)?);
        if version != VERSION {
            return Err(CoreError::Format(format!("unsupported fault table version {version}")));
        }
        let width = u16::from_le_bytes(take(r)?);
        let t_years = f64::from_le_bytes(take(r)?);
        let p_d = f64::from_le_bytes(take(r)?);
        let hash_raw: [u8; 64] = take(r)?;
        let netlist_hash = String::from_utf8(hash_raw.to_vec())
            .map_err(|_| CoreError::Format("netlist hash is not ASCII hex".into()))?;
        if !netlist_hash.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(CoreError::Format("netlist hash is not ASCII hex".into()));
        }
        let kind = take::<1>(r)?[0];
        let count = u64::from_le_bytes(take(r)?);
        let seed = u64::from_le_bytes(take(r)?);
        let coverage = match kind {
            0 => Coverage::Exhaustive,
            1 => Coverage::Sampled { count, seed },
            k => return Err(CoreError::Format(format!("unknown coverage kind {k}"))),
        };
        let violating = u64::from_le_bytes(take(r)?);
        let probed = u64::from_le_bytes(take(r)?);
        let n = u64::from_le_bytes(take(r)?);
        let mut entries = BTreeMap::new();
        let mut prev: Option<u32> = None;
        for _ in 0..n {
            let pair = u32::from_le_bytes(take(r)?);
            let product = u32::from_le_bytes(take(r)?);
            if prev.is_some_and(|p| p >= pair) {
                return Err(CoreError::Format("fault records out of order".into()));
            }
            prev = Some(pair);
            entries.insert(pair, product);
        }
        let mut tail = [0u8; 1];
        if r.read(&mut tail)? != 0 {
            return Err(CoreError::Format("trailing bytes after fault records".into()));
        }
        Ok(FaultTable {
            width,
            t_years,
            p_d,
            netlist_hash,
            coverage,
            violating,
            probed,
            entries,
        })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<FaultTable> {
        FaultTable::read_from(&mut &bytes[..])
    }
}

fn check_guard(netlist: &Netlist, guard: &GuardBand) -> Result<()> {
    if guard.width != netlist.width {
        return Err(CoreError::Fault(format!(
            "guard band is for width {}, netlist has width {}",
            guard.width, netlist.width
        )));
    }
    if guard.arch != netlist.arch {
        return Err(CoreError::Fault(format!(
            "guard band is for {}, netlist is {}",
            guard.arch.name(),
            netlist.arch.name()
        )));
    }
    Ok(())
}

fn pair_list(netlist: &Netlist, coverage: Coverage) -> Result<Vec<(u32, u32)>> {
    let w = netlist.width;
    if w > 16 {
        return Err(CoreError::Fault(format!("fault tables stop at 16-bit operands, got {w}")));
    }
    match coverage {
        Coverage::Exhaustive => {
            if w > 8 {
                return Err(CoreError::Fault(format!(
                    "exhaustive coverage stops at 8-bit operands, got {w}"
                )));
            }
            let side = 1u32 << w;
            Ok((0..side).flat_map(|a| (0..side).map(move |b| (a, b))).collect())
        }
        Coverage::Sampled { count, seed } => {
            if count == 0 {
                return Err(CoreError::Fault("sampled coverage needs at least one pair".into()));
            }
            let side = 1u32 << w;
            Ok((0..count)
                .map(|k| {
                    let mut r = rng::stream(seed, rng::tag::FAULT_PAIRS, k);
                    (r.gen_range(0..side), r.gen_range(0..side))
                })
                .collect())
        }
    }
}

/// Build the table for one netlist at one age. The netlist ages under its
/// own wiring's stress; thresholds are nominal (fabrication spread belongs
/// to the Monte Carlo module, not the fault pipeline).
pub fn build_fault_table(
    netlist: &Netlist,
    params: &AgingParams,
    t_years: f64,
    guard: &GuardBand,
    coverage: Coverage,
) -> Result<FaultTable> {
    Ok(build_fault_series(netlist, params, &[t_years], guard, coverage)?.pop().unwrap())
}

/// Tables for several ages of the same netlist, sharing the stress pass.
pub fn build_fault_series(
    netlist: &Netlist,
    params: &AgingParams,
    t_grid: &[f64],
    guard: &GuardBand,
    coverage: Coverage,
) -> Result<Vec<FaultTable>> {
    check_guard(netlist, guard)?;
    if t_grid.is_empty() {
        return Err(CoreError::Fault("empty time grid".into()));
    }
    let mut pairs = pair_list(netlist, coverage)?;
    pairs.sort_unstable();
    pairs.dedup();
    let probed = pairs.len() as u64;
    let stress = compute_stress(netlist, &InputProfile::Uniform, natural_stress_mode(netlist))?;
    let vth = fresh_vth_nominal(netlist, params);
    let hash = netlist.content_hash();
    let w = netlist.width as u16;
    let from = operand_bits(0, 0, netlist.width);

    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let d = effective_gate_delays(netlist, params, &vth, &stress.alpha, t)?;
        let sim = EventSim::new(netlist, &d.per_gate)?;
        let probes: Vec<Result<(bool, Option<(u32, u32)>)>> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let to = operand_bits(a as u64, b as u64, netlist.width);
                let outcome = sim.run(&from, &to, Some(guard.p_d))?;
                let latched = outcome.latched.as_ref().expect("latch deadline was set");
                let mut word = 0u32;
                for (k, &bit) in latched.iter().enumerate() {
                    word |= (bit as u32) << k;
                }
                let violated = outcome.settle > guard.p_d;
                let mismatch = (word != a * b).then_some((FaultTable::pair_index(a, b, w), word));
                Ok((violated, mismatch))
            })
            .collect();

        let mut entries = BTreeMap::new();
        let mut violating = 0u64;
        for p in probes {
            let (violated, mismatch) = p?;
            violating += violated as u64;
            if let Some((pair, word)) = mismatch {
                entries.insert(pair, word);
            }
        }
        out.push(FaultTable {
            width: w,
            t_years: t,
            p_d: guard.p_d,
            netlist_hash: hash.clone(),
            coverage,
            violating,
            probed,
            entries,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::{build_config, PathScope};
    use crate::circuit::build_array_multiplier;
    use crate::error::Result as CoreResult;
    use crate::runtime;
    use crate::timing::{compute_guard_band, error_likelihood, StimulusMode};

    fn guard_for(n: &Netlist, params: &AgingParams) -> GuardBand {
        compute_guard_band(n, params, 4.0, StimulusMode::Exhaustive).unwrap()
    }

    fn tampered_all(w: usize, params: &AgingParams) -> (Netlist, Netlist) {
        let n = build_array_multiplier(w).unwrap();
        let plan = build_config(&n, &InputProfile::Uniform, params, PathScope::All, 100, 4.0).unwrap();
        let t = plan.apply(&n).unwrap();
        (n, t)
    }

    #[test]
    fn fresh_and_in_band_tables_are_clean() {
        let params = AgingParams::default();
        let (n, t) = tampered_all(4, &params);
        let guard = guard_for(&n, &params);
        let fresh = build_fault_table(&t, &params, 0.0, &guard, Coverage::Exhaustive).unwrap();
        assert_eq!(fresh.faulty_entries(), 0);
        assert_eq!(fresh.violating, 0);
        assert_eq!(fresh.probed, 256);
        for a in 0..16 {
            for b in 0..16 {
                assert_eq!(fresh.product(a, b).unwrap(), a * b);
            }
        }
        // The untampered netlist never outruns its own guard band inside the
        // horizon, so its tables stay empty at any age up to it.
        for t_years in [2.0, 4.0] {
            let table = build_fault_table(&n, &params, t_years, &guard, Coverage::Exhaustive).unwrap();
            assert_eq!(table.faulty_entries(), 0, "t={t_years}");
            assert_eq!(table.violating, 0, "t={t_years}");
        }
    }

    #[test]
    fn violation_census_matches_timing_module() {
        let params = AgingParams::default();
        let (n, t) = tampered_all(8, &params);
        let guard = guard_for(&n, &params);
        let table = build_fault_table(&t, &params, 4.0, &guard, Coverage::Exhaustive).unwrap();
        let stress = compute_stress(&t, &InputProfile::Uniform, natural_stress_mode(&t)).unwrap();
        let vth = fresh_vth_nominal(&t, &params);
        let report = error_likelihood(&t, &params, &vth, &stress.alpha, &guard, 4.0).unwrap();
        assert_eq!(table.violating, report.violations);
        assert_eq!(table.probed, report.stimuli);
        assert!(table.violating > 0);
        assert!(table.faulty_entries() as u64 <= table.violating);
        assert!(table.faulty_entries() > 0);
    }

    #[test]
    fn file_roundtrip_is_exact_and_checked() {
        let params = AgingParams::default();
        let (n, t) = tampered_all(4, &params);
        let guard = guard_for(&n, &params);
        let table = build_fault_table(&t, &params, 6.0, &guard, Coverage::Exhaustive).unwrap();
        let bytes = table.to_bytes().unwrap();
        let back = FaultTable::from_bytes(&bytes).unwrap();
        assert_eq!(table, back);

        assert!(FaultTable::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut corrupt = bytes.clone();
        corrupt[0] ^= 0xff;
        assert!(FaultTable::from_bytes(&corrupt).is_err());
        let mut extended = bytes.clone();
        extended.push(0);
        assert!(FaultTable::from_bytes(&extended).is_err());
    }

    #[test]
    fn build_is_thread_count_invariant() {
        let params = AgingParams::default();
        let (n, t) = tampered_all(4, &params);
        let guard = guard_for(&n, &params);
        let build = || -> CoreResult<Vec<u8>> {
            build_fault_table(&t, &params, 6.0, &guard, Coverage::Exhaustive)?.to_bytes()
        };
        let one = runtime::run(Some(1), build).unwrap();
        let four = runtime::run(Some(4), build).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn sampled_coverage_collapses_duplicates() {
        let params = AgingParams::default();
        let n = build_array_multiplier(4).unwrap();
        let guard = guard_for(&n, &params);
        let table =
            build_fault_table(&n, &params, 0.0, &guard, Coverage::Sampled { count: 600, seed: 9 })
                .unwrap();
        // 600 draws over 256 possible pairs must collide.
        assert!(table.probed < 600);
        assert!(table.probed > 0);
    }

    #[test]
    fn guard_and_coverage_mismatches_are_rejected() {
        let params = AgingParams::default();
        let n4 = build_array_multiplier(4).unwrap();
        let n5 = build_array_multiplier(5).unwrap();
        let guard4 = guard_for(&n4, &params);
        assert!(build_fault_table(&n5, &params, 1.0, &guard4, Coverage::Exhaustive).is_err());
        let n10 = build_array_multiplier(10).unwrap();
        let guard10 =
            compute_guard_band(&n10, &params, 4.0, StimulusMode::RandomPairs { count: 16, seed: 1 })
                .unwrap();
        assert!(build_fault_table(&n10, &params, 1.0, &guard10, Coverage::Exhaustive).is_err());
        assert!(
            build_fault_table(&n10, &params, 1.0, &guard10, Coverage::Sampled { count: 8, seed: 1 })
                .is_ok()
        );
        assert!(
            build_fault_table(&n4, &params, 1.0, &guard4, Coverage::Sampled { count: 0, seed: 1 })
                .is_err()
        );
        let table = build_fault_table(&n4, &params, 0.0, &guard4, Coverage::Exhaustive).unwrap();
        assert!(table.product(16, 0).is_err());
    }
}
