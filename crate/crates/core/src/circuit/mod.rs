//! Gate-level netlists built from a five-cell static-CMOS library.
//!
//! A netlist is an immutable DAG of INV/NAND2/NOR2/XOR2/MAJ3 gates over
//! densely numbered signals: ids `0..n_inputs` are primary inputs, and every
//! gate drives exactly one fresh signal, so gate order is already a
//! topological order. Half and full adders are registered in a commutative
//! block registry so the rewiring attack knows which input pins may be
//! permuted without changing function:
//!
//! * full adder: `s1 = XOR2(a, b)`, `sum = XOR2(s1, c)`, `cout = MAJ3(a, b, c)`
//! * half adder: `sum = XOR2(a, b)`, `cout = INV(NAND2(a, b))`
//!
//! Every gate input pin carries one PMOS transistor site; sites are indexed
//! densely across the netlist for the aging model.

mod array;
mod format;
mod wallace;

pub use array::build_array_multiplier;
pub use format::{export_text, import_text};
pub use wallace::build_wallace_multiplier;

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Dense signal identifier; ids below the input count are primary inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignalId(pub u32);

impl SignalId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for SignalId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Inv,
    Nand2,
    Nor2,
    Xor2,
    Maj3,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Inv => 1,
            GateKind::Nand2 | GateKind::Nor2 | GateKind::Xor2 => 2,
            GateKind::Maj3 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Inv => "INV",
            GateKind::Nand2 => "NAND2",
            GateKind::Nor2 => "NOR2",
            GateKind::Xor2 => "XOR2",
            GateKind::Maj3 => "MAJ3",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "INV" => GateKind::Inv,
            "NAND2" => GateKind::Nand2,
            "NOR2" => GateKind::Nor2,
            "XOR2" => GateKind::Xor2,
            "MAJ3" => GateKind::Maj3,
            _ => return None,
        })
    }

    pub fn eval(self, a: bool, b: bool, c: bool) -> bool {
        match self {
            GateKind::Inv => !a,
            GateKind::Nand2 => !(a && b),
            GateKind::Nor2 => !(a || b),
            GateKind::Xor2 => a ^ b,
            GateKind::Maj3 => (a && b) || (a && c) || (b && c),
        }
    }

    /// 64-lane bit-parallel evaluation.
    pub fn eval_words(self, a: u64, b: u64, c: u64) -> u64 {
        match self {
            GateKind::Inv => !a,
            GateKind::Nand2 => !(a & b),
            GateKind::Nor2 => !(a | b),
            GateKind::Xor2 => a ^ b,
            GateKind::Maj3 => (a & b) | (a & c) | (b & c),
        }
    }
}

/// One gate instance; unused input slots stay at SignalId(0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: [SignalId; 3],
    pub output: SignalId,
}

impl Gate {
    pub fn input_slice(&self) -> &[SignalId] {
        &self.inputs[..self.kind.arity()]
    }
}

/// One PMOS transistor, attached to a gate input pin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransistorSite {
    pub gate: u32,
    pub pin: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdderKind {
    Half,
    Full,
}

impl AdderKind {
    pub fn arity(self) -> usize {
        match self {
            AdderKind::Half => 2,
            AdderKind::Full => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AdderKind::Half => "HALF",
            AdderKind::Full => "FULL",
        }
    }
}

/// Physical pin arrangement of an adder: position `i` carries logical input
/// `map[i]`. The identity arrangement is the as-designed wiring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    map: [u8; 3],
    arity: u8,
}

impl Permutation {
    pub fn identity(arity: usize) -> Self {
        Permutation {
            map: [0, 1, 2],
            arity: arity as u8,
        }
    }

    pub fn new(map: &[u8]) -> Result<Self> {
        let arity = map.len();
        if !(2..=3).contains(&arity) {
            return Err(CoreError::Domain(format!(
                "permutation arity must be 2 or 3, got {arity}"
            )));
        }
        let mut seen = [false; 3];
        for &m in map {
            if m as usize >= arity || seen[m as usize] {
                return Err(CoreError::Domain(format!("invalid permutation {map:?}")));
            }
            seen[m as usize] = true;
        }
        let mut full = [0u8, 1, 2];
        full[..arity].copy_from_slice(map);
        Ok(Permutation {
            map: full,
            arity: arity as u8,
        })
    }

    /// All arrangements for the given arity, in lexicographic order
    /// (identity first).
    pub fn all(arity: usize) -> Vec<Permutation> {
        let indices: Vec<Vec<u8>> = match arity {
            2 => vec![vec![0, 1], vec![1, 0]],
            3 => vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0],
            ],
            _ => vec![],
        };
        indices.iter().map(|m| Permutation::new(m).unwrap()).collect()
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.map[..self.arity as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.as_slice().iter().enumerate().all(|(i, &m)| i == m as usize)
    }

    /// Arrangement reached by re-routing positions of `self` through `outer`:
    /// position `i` of the result carries what position `outer[i]` carried.
    pub fn then(&self, outer: &Permutation) -> Result<Permutation> {
        if self.arity != outer.arity {
            return Err(CoreError::Domain("permutation arity mismatch".into()));
        }
        let mut map = [0u8; 3];
        for i in 0..self.arity() {
            map[i] = self.map[outer.map[i] as usize];
        }
        Permutation::new(&map[..self.arity()])
    }

    pub fn inverse(&self) -> Permutation {
        let mut map = [0u8; 3];
        for (i, &m) in self.as_slice().iter().enumerate() {
            map[m as usize] = i as u8;
        }
        Permutation::new(&map[..self.arity()]).unwrap()
    }

    pub fn digits(&self) -> String {
        self.as_slice().iter().map(|m| char::from(b'0' + m)).collect()
    }

    pub fn from_digits(s: &str) -> Result<Permutation> {
        let map: Vec<u8> = s
            .bytes()
            .map(|b| {
                b.checked_sub(b'0')
                    .filter(|&d| d < 3)
                    .ok_or_else(|| CoreError::Format(format!("bad permutation digits {s:?}")))
            })
            .collect::<Result<_>>()?;
        Permutation::new(&map)
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<u8>::deserialize(d)?;
        Permutation::new(&v).map_err(serde::de::Error::custom)
    }
}

/// Member gates of a registered adder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdderMembers {
    /// `xor_pair` feeds `xor_sum`; `maj` produces the carry.
    Full { xor_pair: u32, xor_sum: u32, maj: u32 },
    /// Carry is `inv(nand)`.
    Half { xor_sum: u32, nand: u32, inv: u32 },
}

impl AdderMembers {
    pub fn gate_ids(&self) -> [u32; 3] {
        match *self {
            AdderMembers::Full { xor_pair, xor_sum, maj } => [xor_pair, xor_sum, maj],
            AdderMembers::Half { xor_sum, nand, inv } => [xor_sum, nand, inv],
        }
    }
}

/// A half or full adder whose commutative inputs may be re-wired.
#[derive(Debug, Clone, PartialEq)]
pub struct AdderInstance {
    pub id: u32,
    pub kind: AdderKind,
    /// Logical inputs in as-designed order.
    pub inputs: [SignalId; 3],
    pub sum: SignalId,
    pub cout: SignalId,
    pub members: AdderMembers,
    pub wiring: Permutation,
}

impl AdderInstance {
    pub fn input_slice(&self) -> &[SignalId] {
        &self.inputs[..self.kind.arity()]
    }

    /// Signal currently wired to physical position `pos`.
    pub fn physical_input(&self, pos: usize) -> SignalId {
        self.inputs[self.wiring.as_slice()[pos] as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArchTag {
    Array,
    Wallace,
    Custom,
}

impl ArchTag {
    pub fn name(self) -> &'static str {
        match self {
            ArchTag::Array => "ARRAY",
            ArchTag::Wallace => "WALLACE",
            ArchTag::Custom => "CUSTOM",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "ARRAY" => ArchTag::Array,
            "WALLACE" => ArchTag::Wallace,
            "CUSTOM" => ArchTag::Custom,
            _ => return None,
        })
    }
}

/// Immutable combinational netlist. Tampering produces a new netlist.
#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub arch: ArchTag,
    pub width: usize,
    n_inputs: usize,
    gates: Vec<Gate>,
    outputs: Vec<SignalId>,
    adders: Vec<AdderInstance>,
    site_offsets: Vec<u32>,
    site_count: usize,
}

impl Netlist {
    pub fn input_count(&self) -> usize {
        self.n_inputs
    }

    pub fn signal_count(&self) -> usize {
        self.n_inputs + self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[SignalId] {
        &self.outputs
    }

    pub fn adders(&self) -> &[AdderInstance] {
        &self.adders
    }

    pub fn adder(&self, id: u32) -> Result<&AdderInstance> {
        self.adders
            .get(id as usize)
            .ok_or_else(|| CoreError::Domain(format!("no adder with id {id}")))
    }

    /// Gate driving `sig`, if it is not a primary input.
    pub fn driver(&self, sig: SignalId) -> Option<&Gate> {
        sig.index().checked_sub(self.n_inputs).map(|g| &self.gates[g])
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn site_index(&self, site: TransistorSite) -> usize {
        self.site_offsets[site.gate as usize] as usize + site.pin as usize
    }

    /// Sites of one gate as a dense index range.
    pub fn gate_site_range(&self, gate: usize) -> std::ops::Range<usize> {
        let start = self.site_offsets[gate] as usize;
        start..start + self.gates[gate].kind.arity()
    }

    pub fn sites(&self) -> impl Iterator<Item = TransistorSite> + '_ {
        self.gates.iter().enumerate().flat_map(|(g, gate)| {
            (0..gate.kind.arity()).map(move |pin| TransistorSite {
                gate: g as u32,
                pin: pin as u8,
            })
        })
    }

    /// Full signal vector after a zero-delay functional evaluation.
    pub fn evaluate(&self, inputs: &[bool]) -> Result<Vec<bool>> {
        if inputs.len() != self.n_inputs {
            return Err(CoreError::Eval(format!(
                "expected {} input bits, got {}",
                self.n_inputs,
                inputs.len()
            )));
        }
        let mut vals = vec![false; self.signal_count()];
        vals[..self.n_inputs].copy_from_slice(inputs);
        for gate in &self.gates {
            let s = gate.input_slice();
            let a = vals[s[0].index()];
            let b = s.get(1).map(|x| vals[x.index()]).unwrap_or(false);
            let c = s.get(2).map(|x| vals[x.index()]).unwrap_or(false);
            vals[gate.output.index()] = gate.kind.eval(a, b, c);
        }
        Ok(vals)
    }

    /// 64 independent evaluations at once; lane `k` of each word is one case.
    pub fn evaluate_words(&self, inputs: &[u64]) -> Result<Vec<u64>> {
        if inputs.len() != self.n_inputs {
            return Err(CoreError::Eval(format!(
                "expected {} input words, got {}",
                self.n_inputs,
                inputs.len()
            )));
        }
        let mut vals = vec![0u64; self.signal_count()];
        vals[..self.n_inputs].copy_from_slice(inputs);
        for gate in &self.gates {
            let s = gate.input_slice();
            let a = vals[s[0].index()];
            let b = s.get(1).map(|x| vals[x.index()]).unwrap_or(0);
            let c = s.get(2).map(|x| vals[x.index()]).unwrap_or(0);
            vals[gate.output.index()] = gate.kind.eval_words(a, b, c);
        }
        Ok(vals)
    }

    /// Multiply through the netlist; operands are `width`-bit unsigned.
    pub fn eval_product(&self, a: u64, b: u64) -> Result<u64> {
        let bits = operand_bits(a, b, self.width);
        let vals = self.evaluate(&bits)?;
        let mut p = 0u64;
        for (k, out) in self.outputs.iter().enumerate() {
            if vals[out.index()] {
                p |= 1 << k;
            }
        }
        Ok(p)
    }

    /// Re-route one adder: position `i` of the result carries whatever
    /// position `perm[i]` carried before the call.
    pub fn apply_permutation(&self, adder_id: u32, perm: &Permutation) -> Result<Netlist> {
        let adder = self.adder(adder_id)?;
        if perm.arity() != adder.kind.arity() {
            return Err(CoreError::Domain(format!(
                "permutation arity {} does not fit {:?} adder {adder_id}",
                perm.arity(),
                adder.kind
            )));
        }
        let wiring = adder.wiring.then(perm)?;
        self.with_wiring(adder_id, wiring)
    }

    /// Set an adder's absolute pin arrangement.
    pub fn with_wiring(&self, adder_id: u32, wiring: Permutation) -> Result<Netlist> {
        self.adder(adder_id)?;
        let mut next = self.clone();
        next.adders[adder_id as usize].wiring = wiring;
        next.rewire_adder(adder_id as usize);
        Ok(next)
    }

    fn rewire_adder(&mut self, idx: usize) {
        let adder = self.adders[idx].clone();
        let phys = |pos: usize| adder.physical_input(pos);
        match adder.members {
            AdderMembers::Full { xor_pair, xor_sum, maj } => {
                let s1 = self.gates[xor_pair as usize].output;
                self.gates[xor_pair as usize].inputs = [phys(0), phys(1), SignalId(0)];
                self.gates[xor_sum as usize].inputs = [s1, phys(2), SignalId(0)];
                self.gates[maj as usize].inputs = [phys(0), phys(1), phys(2)];
            }
            AdderMembers::Half { xor_sum, nand, .. } => {
                self.gates[xor_sum as usize].inputs = [phys(0), phys(1), SignalId(0)];
                self.gates[nand as usize].inputs = [phys(0), phys(1), SignalId(0)];
            }
        }
    }

    /// SHA-256 of the canonical text export, as lowercase hex.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(export_text(self).as_bytes());
        let d = h.finalize();
        d.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// LSB-first input vector for a multiplier netlist: `a` bits then `b` bits.
pub fn operand_bits(a: u64, b: u64, width: usize) -> Vec<bool> {
    let mut bits = Vec::with_capacity(2 * width);
    for i in 0..width {
        bits.push(a >> i & 1 == 1);
    }
    for j in 0..width {
        bits.push(b >> j & 1 == 1);
    }
    bits
}

/// Incremental netlist construction; gates must reference already-driven
/// signals, so construction order doubles as topological order.
pub struct NetlistBuilder {
    arch: ArchTag,
    width: usize,
    n_inputs: usize,
    gates: Vec<Gate>,
    adders: Vec<AdderInstance>,
}

impl NetlistBuilder {
    pub fn new(arch: ArchTag, width: usize) -> Self {
        NetlistBuilder {
            arch,
            width,
            n_inputs: 0,
            gates: Vec::new(),
            adders: Vec::new(),
        }
    }

    pub fn add_input(&mut self) -> Result<SignalId> {
        if !self.gates.is_empty() {
            return Err(CoreError::Build(
                "primary inputs must be declared before any gate".into(),
            ));
        }
        let id = SignalId(self.n_inputs as u32);
        self.n_inputs += 1;
        Ok(id)
    }

    fn next_signal(&self) -> SignalId {
        SignalId((self.n_inputs + self.gates.len()) as u32)
    }

    fn check_driven(&self, sig: SignalId) -> Result<()> {
        if sig.index() >= self.n_inputs + self.gates.len() {
            return Err(CoreError::Build(format!("signal {sig} is not driven yet")));
        }
        Ok(())
    }

    pub fn add_gate(&mut self, kind: GateKind, inputs: &[SignalId]) -> Result<SignalId> {
        if inputs.len() != kind.arity() {
            return Err(CoreError::Build(format!(
                "{} takes {} inputs, got {}",
                kind.name(),
                kind.arity(),
                inputs.len()
            )));
        }
        for &s in inputs {
            self.check_driven(s)?;
        }
        let mut slots = [SignalId(0); 3];
        slots[..inputs.len()].copy_from_slice(inputs);
        let output = self.next_signal();
        self.gates.push(Gate {
            kind,
            inputs: slots,
            output,
        });
        Ok(output)
    }

    /// Registered full adder over three distinct driven signals.
    pub fn full_adder(&mut self, a: SignalId, b: SignalId, c: SignalId) -> Result<(SignalId, SignalId)> {
        if a == b || a == c || b == c {
            return Err(CoreError::Build("full adder inputs must be distinct".into()));
        }
        let s1 = self.add_gate(GateKind::Xor2, &[a, b])?;
        let sum = self.add_gate(GateKind::Xor2, &[s1, c])?;
        let cout = self.add_gate(GateKind::Maj3, &[a, b, c])?;
        let xor_pair = (self.gates.len() - 3) as u32;
        self.adders.push(AdderInstance {
            id: self.adders.len() as u32,
            kind: AdderKind::Full,
            inputs: [a, b, c],
            sum,
            cout,
            members: AdderMembers::Full {
                xor_pair,
                xor_sum: xor_pair + 1,
                maj: xor_pair + 2,
            },
            wiring: Permutation::identity(3),
        });
        Ok((sum, cout))
    }

    /// Registered half adder over two distinct driven signals.
    pub fn half_adder(&mut self, a: SignalId, b: SignalId) -> Result<(SignalId, SignalId)> {
        if a == b {
            return Err(CoreError::Build("half adder inputs must be distinct".into()));
        }
        let sum = self.add_gate(GateKind::Xor2, &[a, b])?;
        let n = self.add_gate(GateKind::Nand2, &[a, b])?;
        let cout = self.add_gate(GateKind::Inv, &[n])?;
        let xor_sum = (self.gates.len() - 3) as u32;
        self.adders.push(AdderInstance {
            id: self.adders.len() as u32,
            kind: AdderKind::Half,
            inputs: [a, b, SignalId(0)],
            sum,
            cout,
            members: AdderMembers::Half {
                xor_sum,
                nand: xor_sum + 1,
                inv: xor_sum + 2,
            },
            wiring: Permutation::identity(2),
        });
        Ok((sum, cout))
    }

    pub fn finish(self, outputs: Vec<SignalId>) -> Result<Netlist> {
        let total = self.n_inputs + self.gates.len();
        for &o in &outputs {
            if o.index() >= total {
                return Err(CoreError::Build(format!("output signal {o} is not driven")));
            }
        }
        let mut site_offsets = Vec::with_capacity(self.gates.len());
        let mut acc = 0u32;
        for g in &self.gates {
            site_offsets.push(acc);
            acc += g.kind.arity() as u32;
        }
        Ok(Netlist {
            arch: self.arch,
            width: self.width,
            n_inputs: self.n_inputs,
            gates: self.gates,
            outputs,
            adders: self.adders,
            site_offsets,
            site_count: acc as usize,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lone_full_adder() -> (Netlist, [SignalId; 3]) {
        let mut b = NetlistBuilder::new(ArchTag::Custom, 1);
        let a = b.add_input().unwrap();
        let x = b.add_input().unwrap();
        let c = b.add_input().unwrap();
        let (sum, cout) = b.full_adder(a, x, c).unwrap();
        let n = b.finish(vec![sum, cout]).unwrap();
        (n, [a, x, c])
    }

    fn lone_half_adder() -> Netlist {
        let mut b = NetlistBuilder::new(ArchTag::Custom, 1);
        let a = b.add_input().unwrap();
        let x = b.add_input().unwrap();
        let (sum, cout) = b.half_adder(a, x).unwrap();
        b.finish(vec![sum, cout]).unwrap()
    }

    #[test]
    fn full_adder_truth_table() {
        let (n, _) = lone_full_adder();
        for v in 0..8u32 {
            let bits = [v & 1 == 1, v >> 1 & 1 == 1, v >> 2 & 1 == 1];
            let vals = n.evaluate(&bits).unwrap();
            let ones = bits.iter().filter(|&&x| x).count() as u32;
            let sum = vals[n.outputs()[0].index()];
            let cout = vals[n.outputs()[1].index()];
            assert_eq!(sum, ones & 1 == 1, "sum for {bits:?}");
            assert_eq!(cout, ones >= 2, "cout for {bits:?}");
        }
    }

    #[test]
    fn full_adder_110_sums_to_01() {
        // a=1, b=1, c=0 -> sum 0, carry 1
        let (n, _) = lone_full_adder();
        let vals = n.evaluate(&[true, true, false]).unwrap();
        assert!(!vals[n.outputs()[0].index()]);
        assert!(vals[n.outputs()[1].index()]);
    }

    #[test]
    fn half_adder_truth_table() {
        let n = lone_half_adder();
        for v in 0..4u32 {
            let bits = [v & 1 == 1, v >> 1 & 1 == 1];
            let vals = n.evaluate(&bits).unwrap();
            let ones = bits.iter().filter(|&&x| x).count() as u32;
            assert_eq!(vals[n.outputs()[0].index()], ones & 1 == 1);
            assert_eq!(vals[n.outputs()[1].index()], ones == 2);
        }
    }

    #[test]
    fn permutations_preserve_adder_function() {
        let (n, _) = lone_full_adder();
        for perm in Permutation::all(3) {
            let t = n.apply_permutation(0, &perm).unwrap();
            for v in 0..8u32 {
                let bits = [v & 1 == 1, v >> 1 & 1 == 1, v >> 2 & 1 == 1];
                assert_eq!(n.evaluate(&bits).unwrap()[n.outputs()[0].index()],
                           t.evaluate(&bits).unwrap()[t.outputs()[0].index()]);
                assert_eq!(n.evaluate(&bits).unwrap()[n.outputs()[1].index()],
                           t.evaluate(&bits).unwrap()[t.outputs()[1].index()]);
            }
        }
    }

    #[test]
    fn identity_permutation_is_structural_noop() {
        let (n, _) = lone_full_adder();
        let t = n.apply_permutation(0, &Permutation::identity(3)).unwrap();
        assert_eq!(n, t);
        assert_eq!(n.content_hash(), t.content_hash());
    }

    #[test]
    fn permutation_then_inverse_restores_wiring() {
        let (n, _) = lone_full_adder();
        let p = Permutation::new(&[1, 2, 0]).unwrap();
        let t = n.apply_permutation(0, &p).unwrap();
        assert_ne!(n, t);
        let back = t.apply_permutation(0, &p.inverse()).unwrap();
        assert_eq!(n, back);
    }

    #[test]
    fn swap_bc_moves_pin_signals() {
        let (n, [a, x, c]) = lone_full_adder();
        let t = n.apply_permutation(0, &Permutation::new(&[0, 2, 1]).unwrap()).unwrap();
        let adder = &t.adders()[0];
        assert_eq!(adder.physical_input(0), a);
        assert_eq!(adder.physical_input(1), c);
        assert_eq!(adder.physical_input(2), x);
    }

    #[test]
    fn permutation_order_is_lexicographic() {
        let perms = Permutation::all(3);
        assert_eq!(perms.len(), 6);
        assert!(perms[0].is_identity());
        for w in perms.windows(2) {
            assert!(w[0].as_slice() < w[1].as_slice());
        }
    }

    #[test]
    fn site_indices_are_dense_and_per_pin() {
        let (n, _) = lone_full_adder();
        // xor2 + xor2 + maj3 = 7 pins
        assert_eq!(n.site_count(), 7);
        let all: Vec<usize> = n.sites().map(|s| n.site_index(s)).collect();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn builder_rejects_undriven_and_duplicate_signals() {
        let mut b = NetlistBuilder::new(ArchTag::Custom, 1);
        let a = b.add_input().unwrap();
        assert!(b.add_gate(GateKind::Inv, &[SignalId(5)]).is_err());
        assert!(b.half_adder(a, a).is_err());
    }

    #[test]
    fn words_agree_with_scalar_eval() {
        let (n, _) = lone_full_adder();
        let words = [0b10101010u64, 0b11001100, 0b11110000];
        let vals = n.evaluate_words(&words).unwrap();
        for lane in 0..8 {
            let bits = [
                words[0] >> lane & 1 == 1,
                words[1] >> lane & 1 == 1,
                words[2] >> lane & 1 == 1,
            ];
            let scalar = n.evaluate(&bits).unwrap();
            for s in 0..n.signal_count() {
                assert_eq!(vals[s] >> lane & 1 == 1, scalar[s], "signal {s} lane {lane}");
            }
        }
    }
}
