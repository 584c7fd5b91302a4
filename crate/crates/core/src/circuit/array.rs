//! Carry-save array multiplier.
//!
//! Partial products `P[i][j] = a_i AND b_j` (NAND2 + INV) are reduced row by
//! row. Row `j` adds the j-th partial-product row into a running sum vector
//! `cur` (weights j..j+w-1) plus the carry vector of the previous row, then a
//! final ripple merge combines the surviving sum and carry vectors.
//!
//! Pin binding: the regular rows use the standard array cell convention,
//! partial product and running sum on the data pins and the diagonal carry
//! on carry-in, as does the final merge (ripple carry on carry-in). The
//! first full-adder row is the exception: it consumes the half-adder row,
//! whose sums trail its carries, so its pins are bound by arrival and the
//! latest operand takes the carry-in position of the cascade. At the mid
//! cells that operand is the half-adder sum; at the edge cell the running
//! sum is a bare partial product and the diagonal carry arrives last.

use super::{ArchTag, CoreError, Netlist, NetlistBuilder, Result, SignalId};

pub fn build_array_multiplier(width: usize) -> Result<Netlist> {
    if !(2..=16).contains(&width) {
        return Err(CoreError::Build(format!(
            "array multiplier width must be in 2..=16, got {width}"
        )));
    }
    let w = width;
    let mut b = NetlistBuilder::new(ArchTag::Array, w);
    let a: Vec<SignalId> = (0..w).map(|_| b.add_input()).collect::<Result<_>>()?;
    let bb: Vec<SignalId> = (0..w).map(|_| b.add_input()).collect::<Result<_>>()?;

    let mut pp = vec![vec![SignalId(0); w]; w];
    for (j, &bj) in bb.iter().enumerate() {
        for (i, &ai) in a.iter().enumerate() {
            let n = b.add_gate(super::GateKind::Nand2, &[ai, bj])?;
            pp[i][j] = b.add_gate(super::GateKind::Inv, &[n])?;
        }
    }

    let mut outputs = Vec::with_capacity(2 * w);
    // cur[i] holds weight j+i after processing row j; carry[i] holds weight j+i+1.
    let mut cur: Vec<SignalId> = (0..w).map(|i| pp[i][0]).collect();
    outputs.push(cur[0]);
    let mut carry: Vec<SignalId> = Vec::new();

    for j in 1..w {
        let mut new_cur = Vec::with_capacity(w);
        let mut new_carry = Vec::with_capacity(w - 1);
        for i in 0..w - 1 {
            let (sum, cout) = if j == 1 {
                b.half_adder(pp[i][j], cur[i + 1])?
            } else if j == 2 && i < w - 2 {
                // First full-adder row, mid cells: the half-adder sum is the
                // last arrival here, so it gets the carry-in position.
                b.full_adder(pp[i][j], carry[i], cur[i + 1])?
            } else {
                // Regular fabric: data addends pair up in the first stage,
                // the diagonal carry rides the carry-in pin.
                b.full_adder(pp[i][j], cur[i + 1], carry[i])?
            };
            new_cur.push(sum);
            new_carry.push(cout);
        }
        new_cur.push(pp[w - 1][j]);
        outputs.push(new_cur[0]);
        cur = new_cur;
        carry = new_carry;
    }

    // Ripple merge of cur[1..] against the last carry vector.
    let (mut out, mut rc) = b.half_adder(cur[1], carry[0])?;
    outputs.push(out);
    for i in 1..w - 1 {
        let (s, c) = b.full_adder(cur[i + 1], carry[i], rc)?;
        out = s;
        rc = c;
        outputs.push(out);
    }
    outputs.push(rc);

    debug_assert_eq!(outputs.len(), 2 * w);
    b.finish(outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::AdderKind;

    #[test]
    fn two_bit_array_uses_two_half_adders() {
        let n = build_array_multiplier(2).unwrap();
        let halves = n.adders().iter().filter(|a| a.kind == AdderKind::Half).count();
        let fulls = n.adders().iter().filter(|a| a.kind == AdderKind::Full).count();
        assert_eq!(halves, 2);
        assert_eq!(fulls, 0);
    }

    #[test]
    fn adder_counts_scale_with_width() {
        for w in 2..=8 {
            let n = build_array_multiplier(w).unwrap();
            let halves = n.adders().iter().filter(|a| a.kind == AdderKind::Half).count();
            let fulls = n.adders().iter().filter(|a| a.kind == AdderKind::Full).count();
            assert_eq!(halves, w, "half adders at width {w}");
            assert_eq!(fulls, w * w - 2 * w, "full adders at width {w}");
        }
    }

    #[test]
    fn products_match_integer_multiply_exhaustively() {
        for w in 2..=5 {
            let n = build_array_multiplier(w).unwrap();
            for a in 0..1u64 << w {
                for b in 0..1u64 << w {
                    assert_eq!(n.eval_product(a, b).unwrap(), a * b, "{a}*{b} at width {w}");
                }
            }
        }
    }

    #[test]
    fn wide_products_match_on_sampled_operands() {
        let n = build_array_multiplier(16).unwrap();
        let mut x = 0x2545f4914f6cdd1du64;
        for _ in 0..200 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = x >> 16 & 0xffff;
            let b = x >> 40 & 0xffff;
            assert_eq!(n.eval_product(a, b).unwrap(), a * b);
        }
    }

    #[test]
    fn tampered_array_still_multiplies() {
        let n = build_array_multiplier(4).unwrap();
        let mut t = n.clone();
        for (k, adder) in n.adders().iter().enumerate() {
            let perms = crate::circuit::Permutation::all(adder.kind.arity());
            let p = &perms[1 + k % (perms.len() - 1)];
            t = t.apply_permutation(adder.id, p).unwrap();
        }
        assert_ne!(n, t);
        for a in 0..16u64 {
            for b in 0..16u64 {
                assert_eq!(t.eval_product(a, b).unwrap(), a * b);
            }
        }
    }
}
