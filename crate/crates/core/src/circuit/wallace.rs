//! Wallace tree multiplier.
//!
//! Partial products are bucketed by weight, then reduced in stages: within a
//! stage every group of three bits in a column goes through a full adder and
//! a leftover pair through a half adder, carries moving one column up. When
//! every column holds at most two bits a ripple merge produces the product.
//!
//! Bits are consumed oldest-first within a column, so freshly produced sums
//! and carries (the latest arrivals) sink to the back of the queue and the
//! newest of a consumed triple sits on the carry-in pin, mirroring
//! arrival-ordered wiring. The top output column cannot generate a carry out
//! of the product range, so it is summed with plain XOR gates.

use super::{ArchTag, CoreError, GateKind, Netlist, NetlistBuilder, Result, SignalId};

pub fn build_wallace_multiplier(width: usize) -> Result<Netlist> {
    if !(2..=16).contains(&width) {
        return Err(CoreError::Build(format!(
            "wallace multiplier width must be in 2..=16, got {width}"
        )));
    }
    let w = width;
    let mut b = NetlistBuilder::new(ArchTag::Wallace, w);
    let a: Vec<SignalId> = (0..w).map(|_| b.add_input()).collect::<Result<_>>()?;
    let bb: Vec<SignalId> = (0..w).map(|_| b.add_input()).collect::<Result<_>>()?;

    let mut cols: Vec<Vec<SignalId>> = vec![Vec::new(); 2 * w];
    for (j, &bj) in bb.iter().enumerate() {
        for (i, &ai) in a.iter().enumerate() {
            let n = b.add_gate(GateKind::Nand2, &[ai, bj])?;
            let p = b.add_gate(GateKind::Inv, &[n])?;
            cols[i + j].push(p);
        }
    }

    while cols.iter().any(|c| c.len() > 2) {
        let mut next: Vec<Vec<SignalId>> = vec![Vec::new(); 2 * w];
        for t in 0..2 * w {
            let bits = &cols[t];
            if t == 2 * w - 1 {
                // The product fits in 2w bits, so at most one bit of the top
                // column is ever set; folding with XOR is exact and avoids
                // manufacturing a carry that cannot fire.
                if let Some((&first, rest)) = bits.split_first() {
                    let mut acc = first;
                    for &x in rest {
                        acc = b.add_gate(GateKind::Xor2, &[acc, x])?;
                    }
                    next[t].push(acc);
                }
                continue;
            }
            let mut k = 0;
            while bits.len() - k >= 3 {
                let (sum, cout) = b.full_adder(bits[k], bits[k + 1], bits[k + 2])?;
                next[t].push(sum);
                next[t + 1].push(cout);
                k += 3;
            }
            if bits.len() - k == 2 {
                let (sum, cout) = b.half_adder(bits[k], bits[k + 1])?;
                next[t].push(sum);
                next[t + 1].push(cout);
            } else if bits.len() - k == 1 {
                next[t].push(bits[k]);
            }
        }
        cols = next;
    }

    let mut outputs = Vec::with_capacity(2 * w);
    let mut rc: Option<SignalId> = None;
    for t in 0..2 * w {
        let mut addends = cols[t].clone();
        if let Some(c) = rc.take() {
            addends.push(c);
        }
        let top = t == 2 * w - 1;
        let (out, carry) = match addends.len() {
            1 => (addends[0], None),
            2 if top => (b.add_gate(GateKind::Xor2, &[addends[0], addends[1]])?, None),
            2 => {
                let (s, c) = b.half_adder(addends[0], addends[1])?;
                (s, Some(c))
            }
            3 if top => {
                let x = b.add_gate(GateKind::Xor2, &[addends[0], addends[1]])?;
                (b.add_gate(GateKind::Xor2, &[x, addends[2]])?, None)
            }
            3 => {
                let (s, c) = b.full_adder(addends[0], addends[1], addends[2])?;
                (s, Some(c))
            }
            n => {
                return Err(CoreError::Build(format!(
                    "column {t} still holds {n} bits at merge time"
                )))
            }
        };
        outputs.push(out);
        rc = carry;
    }
    if rc.is_some() {
        return Err(CoreError::Build("carry out of the product range".into()));
    }

    debug_assert_eq!(outputs.len(), 2 * w);
    b.finish(outputs)
}
