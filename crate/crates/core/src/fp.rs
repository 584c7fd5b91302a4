//! Binary floating point with a pluggable significand multiplier.
//!
//! Numbers follow the single-precision layout (1 sign bit, 8-bit biased
//! exponent) but carry an explicit fraction width, so the same code runs the
//! full 23-bit profile and the reduced profiles whose significand products
//! fit a small hardware multiplier. Multiplication splits the way the
//! hardware does: sign by XOR, exponents by addition, significands through
//! an integer multiplier which may be the aged, fault-ridden one. Faults can
//! only enter through that last path, which is what keeps the sign and
//! exponent fields of a faulty product trustworthy.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::fault::FaultTable;

const EXP_BIAS: i32 = 127;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FpNumber {
    pub sign: bool,
    /// 0 encodes zero; normals use 1..=254.
    pub biased_exp: u8,
    pub frac: u32,
    pub frac_bits: u8,
}

impl FpNumber {
    pub fn zero(sign: bool, frac_bits: u8) -> FpNumber {
        FpNumber { sign, biased_exp: 0, frac: 0, frac_bits }
    }

    pub fn is_zero(&self) -> bool {
        self.biased_exp == 0
    }

    pub fn max_finite(sign: bool, frac_bits: u8) -> FpNumber {
        FpNumber { sign, biased_exp: 254, frac: (1 << frac_bits) - 1, frac_bits }
    }

    /// Truncating conversion. Subnormals flush to signed zero; NaN and
    /// infinity are refused.
    pub fn from_f32(x: f32, frac_bits: u8) -> Result<FpNumber> {
        if !(1..=23).contains(&frac_bits) {
            return Err(CoreError::Inference(format!("fraction width {frac_bits} out of range")));
        }
        if x.is_nan() || x.is_infinite() {
            return Err(CoreError::Inference(format!("cannot encode {x}")));
        }
        let bits = x.to_bits();
        let sign = bits >> 31 == 1;
        let exp = (bits >> 23 & 0xff) as u8;
        if exp == 0 {
            return Ok(FpNumber::zero(sign, frac_bits));
        }
        let frac = (bits & 0x7f_ffff) >> (23 - frac_bits);
        Ok(FpNumber { sign, biased_exp: exp, frac, frac_bits })
    }

    /// Conversion from f64 goes through the nearest f32 first, then
    /// truncates; good enough for data whose magnitudes are nowhere near
    /// the format edges.
    pub fn from_f64(x: f64, frac_bits: u8) -> Result<FpNumber> {
        FpNumber::from_f32(x as f32, frac_bits)
    }

    pub fn to_f32(&self) -> f32 {
        if self.is_zero() {
            return if self.sign { -0.0 } else { 0.0 };
        }
        let bits = (self.sign as u32) << 31
            | (self.biased_exp as u32) << 23
            | self.frac << (23 - self.frac_bits);
        f32::from_bits(bits)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_f32() as f64
    }

    /// Leading-one-extended fraction, the operand fed to the integer
    /// multiplier; `frac_bits + 1` wide. Zero for zero.
    pub fn significand(&self) -> u32 {
        if self.is_zero() {
            0
        } else {
            1 << self.frac_bits | self.frac
        }
    }
}

/// A multiply result plus the range flags the exponent adder raises.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpProduct {
    pub value: FpNumber,
    pub saturated: bool,
    pub underflow: bool,
}

fn multiply_core(
    p: &FpNumber,
    q: &FpNumber,
    significand_product: impl FnOnce(u32, u32) -> Result<u64>,
) -> Result<FpProduct> {
    if p.frac_bits != q.frac_bits {
        return Err(CoreError::Inference(format!(
            "mixed fraction widths {} and {}",
            p.frac_bits, q.frac_bits
        )));
    }
    let fb = p.frac_bits as u32;
    let sign = p.sign ^ q.sign;
    if p.is_zero() || q.is_zero() {
        return Ok(FpProduct { value: FpNumber::zero(sign, p.frac_bits), saturated: false, underflow: false });
    }
    let sp = p.significand();
    let sq = q.significand();
    let truth = sp as u64 * sq as u64;
    // The normalization window comes from the true product. The exponent
    // path of the hardware is untouched by multiplier faults, so a faulty
    // significand is slotted into the window the correct value would use.
    let (shift, exp_inc) = if truth >> (2 * fb + 1) & 1 == 1 { (fb + 1, 1) } else { (fb, 0) };
    let delivered = significand_product(sp, sq)?;
    let frac = (delivered >> shift) as u32 & ((1 << fb) - 1);
    let e = p.biased_exp as i32 + q.biased_exp as i32 - EXP_BIAS + exp_inc;
    if e >= 255 {
        return Ok(FpProduct { value: FpNumber::max_finite(sign, p.frac_bits), saturated: true, underflow: false });
    }
    if e <= 0 {
        return Ok(FpProduct { value: FpNumber::zero(sign, p.frac_bits), saturated: false, underflow: true });
    }
    Ok(FpProduct {
        value: FpNumber { sign, biased_exp: e as u8, frac, frac_bits: p.frac_bits },
        saturated: false,
        underflow: false,
    })
}

/// Multiply through an exact integer multiplier.
pub fn reference_multiply(p: &FpNumber, q: &FpNumber) -> Result<FpProduct> {
    multiply_core(p, q, |a, b| Ok(a as u64 * b as u64))
}

/// Multiply with the significand product looked up in an aged multiplier's
/// fault table.
pub fn faulty_multiply_fp(p: &FpNumber, q: &FpNumber, table: &FaultTable) -> Result<FpProduct> {
    if table.width as u32 != p.frac_bits as u32 + 1 {
        return Err(CoreError::Inference(format!(
            "table models a {}-bit multiplier, significands are {} bits",
            table.width,
            p.frac_bits + 1
        )));
    }
    multiply_core(p, q, |a, b| table.product(a, b).map(u64::from))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activity::InputProfile;
    use crate::aging::AgingParams;
    use crate::attack::{build_config, PathScope};
    use crate::circuit::build_array_multiplier;
    use crate::fault::{build_fault_table, Coverage};
    use crate::rng;
    use crate::timing::{compute_guard_band, StimulusMode};
    use proptest::prelude::*;
    use rand::Rng;

    proptest! {
        #[test]
        fn full_profile_roundtrips_normal_f32(bits in any::<u32>()) {
            let x = f32::from_bits(bits);
            prop_assume!(x.is_normal());
            let n = FpNumber::from_f32(x, 23).unwrap();
            prop_assert_eq!(n.to_f32().to_bits(), bits);
        }
    }

    #[test]
    fn zeros_keep_their_sign_and_edges_are_refused() {
        for x in [0.0f32, -0.0] {
            let n = FpNumber::from_f32(x, 23).unwrap();
            assert!(n.is_zero());
            assert_eq!(n.to_f32().to_bits(), x.to_bits());
        }
        // Subnormals flush; the smallest normal survives.
        assert!(FpNumber::from_f32(1.0e-40, 23).unwrap().is_zero());
        let tiny = f32::MIN_POSITIVE;
        assert_eq!(FpNumber::from_f32(tiny, 23).unwrap().to_f32(), tiny);
        assert!(FpNumber::from_f32(f32::NAN, 7).is_err());
        assert!(FpNumber::from_f32(f32::INFINITY, 7).is_err());
        assert!(FpNumber::from_f32(1.0, 0).is_err());
        assert!(FpNumber::from_f32(1.0, 24).is_err());
    }

    #[test]
    fn reduced_profile_truncates_toward_zero() {
        // 1.9921875 is the largest 7-bit-fraction value below 2.
        let x = 1.9999999f32;
        let n = FpNumber::from_f32(x, 7).unwrap();
        assert_eq!(n.to_f32(), 1.9921875);
        let m = FpNumber::from_f32(-x, 7).unwrap();
        assert_eq!(m.to_f32(), -1.9921875);
        assert_eq!(FpNumber::from_f32(1.0, 7).unwrap().significand(), 128);
        assert_eq!(FpNumber::from_f32(255.0 / 128.0, 7).unwrap().significand(), 255);
    }

    fn random_reduced(r: &mut impl Rng, frac_bits: u8) -> FpNumber {
        FpNumber {
            sign: r.gen(),
            // Exponents well inside the field so products stay in range.
            biased_exp: r.gen_range(67..187),
            frac: r.gen_range(0..1u32 << frac_bits),
            frac_bits,
        }
    }

    #[test]
    fn reference_multiply_matches_exact_f32_product() {
        let mut r = rng::stream(11, rng::tag::DATASET, 999);
        for _ in 0..20_000 {
            let p = random_reduced(&mut r, 7);
            let q = random_reduced(&mut r, 7);
            let got = reference_multiply(&p, &q).unwrap();
            assert!(!got.saturated && !got.underflow);
            // Two 8-bit significands multiply exactly in f32, so truncating
            // the exact product is the reference semantics.
            let exact = p.to_f32() * q.to_f32();
            let want = FpNumber::from_f32(exact, 7).unwrap();
            assert_eq!(got.value, want, "{} * {}", p.to_f32(), q.to_f32());
        }
    }

    #[test]
    fn one_is_a_multiplicative_identity() {
        let one = FpNumber::from_f32(1.0, 7).unwrap();
        let mut r = rng::stream(12, rng::tag::DATASET, 998);
        for _ in 0..1000 {
            let x = random_reduced(&mut r, 7);
            assert_eq!(reference_multiply(&one, &x).unwrap().value, x);
            assert_eq!(reference_multiply(&x, &one).unwrap().value, x);
        }
        let z = FpNumber::zero(true, 7);
        let y = FpNumber::from_f32(2.5, 7).unwrap();
        let prod = reference_multiply(&z, &y).unwrap();
        assert!(prod.value.is_zero());
        assert!(prod.value.sign);
    }

    #[test]
    fn range_edges_saturate_and_flush() {
        let big = FpNumber { sign: false, biased_exp: 250, frac: 0, frac_bits: 7 };
        let sat = reference_multiply(&big, &big).unwrap();
        assert!(sat.saturated);
        assert_eq!(sat.value, FpNumber::max_finite(false, 7));

        let tiny = FpNumber { sign: true, biased_exp: 3, frac: 0, frac_bits: 7 };
        let flushed = reference_multiply(&tiny, &tiny).unwrap();
        assert!(flushed.underflow);
        assert!(flushed.value.is_zero());
        assert!(!flushed.value.sign);
    }

    #[test]
    fn mixed_widths_are_rejected() {
        let a = FpNumber::from_f32(1.5, 7).unwrap();
        let b = FpNumber::from_f32(1.5, 8).unwrap();
        assert!(reference_multiply(&a, &b).is_err());
    }

    #[test]
    fn faulty_multiply_is_reference_on_a_clean_table() {
        let params = AgingParams::default();
        let n = build_array_multiplier(8).unwrap();
        let guard = compute_guard_band(&n, &params, 4.0, StimulusMode::Exhaustive).unwrap();
        let table = build_fault_table(&n, &params, 0.0, &guard, Coverage::Exhaustive).unwrap();
        let mut r = rng::stream(13, rng::tag::DATASET, 997);
        for _ in 0..20_000 {
            let p = random_reduced(&mut r, 7);
            let q = random_reduced(&mut r, 7);
            assert_eq!(
                faulty_multiply_fp(&p, &q, &table).unwrap(),
                reference_multiply(&p, &q).unwrap()
            );
        }
        let wrong_width = FpNumber::from_f32(1.5, 6).unwrap();
        assert!(faulty_multiply_fp(&wrong_width, &wrong_width, &table).is_err());
    }

    #[test]
    fn faults_never_touch_sign_or_exponent() {
        let params = AgingParams::default();
        let n = build_array_multiplier(8).unwrap();
        let plan =
            build_config(&n, &InputProfile::Uniform, &params, PathScope::All, 100, 4.0).unwrap();
        let t = plan.apply(&n).unwrap();
        let guard = compute_guard_band(&n, &params, 4.0, StimulusMode::Exhaustive).unwrap();
        let table = build_fault_table(&t, &params, 4.0, &guard, Coverage::Exhaustive).unwrap();
        assert!(table.faulty_entries() > 0);

        let mut corrupted = 0usize;
        let mut checked = 0usize;
        for (pair, _) in table.entries() {
            let (sp, sq) = (pair >> 8, pair & 0xff);
            if sp < 128 || sq < 128 {
                continue;
            }
            let p = FpNumber { sign: false, biased_exp: 120, frac: sp & 0x7f, frac_bits: 7 };
            let q = FpNumber { sign: true, biased_exp: 133, frac: sq & 0x7f, frac_bits: 7 };
            let faulty = faulty_multiply_fp(&p, &q, &table).unwrap();
            let clean = reference_multiply(&p, &q).unwrap();
            assert_eq!(faulty.value.sign, clean.value.sign);
            assert_eq!(faulty.value.biased_exp, clean.value.biased_exp);
            assert_eq!(faulty.saturated, clean.saturated);
            assert_eq!(faulty.underflow, clean.underflow);
            checked += 1;
            if faulty.value.frac != clean.value.frac {
                corrupted += 1;
            }
        }
        assert!(checked > 0);
        assert!(corrupted > 0, "no fault landed in the kept fraction window");
    }
}
