//! PMOS wear-out and the delay model built on it.
//!
//! Every gate input pin carries one PMOS transistor. A pin whose signal sits
//! at logic 0 holds that transistor in negative bias, and the fraction of
//! time it does so (the stress duty `alpha`) drives a slow threshold-voltage
//! rise:
//!
//! ```text
//! dvth(alpha, t) = (k_p^2 * alpha * T)^lambda / (1 + beta),  T = t * t_data_per_year
//! ```
//!
//! Fresh thresholds scatter around the nominal value with a normal process
//! variation, shifts accumulate on top, and the total is clamped a fixed
//! headroom below the supply. Gate delay follows an alpha-power law in the
//! worst (highest) pin threshold of the gate.

use crate::circuit::{AdderMembers, GateKind, Netlist};
use crate::error::{CoreError, Result};
use crate::rng;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Per-kind fresh gate delays, in normalized time units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NominalDelays {
    pub inv: f64,
    pub nand2: f64,
    pub nor2: f64,
    pub xor2: f64,
    pub maj3: f64,
}

impl NominalDelays {
    pub fn get(&self, kind: GateKind) -> f64 {
        match kind {
            GateKind::Inv => self.inv,
            GateKind::Nand2 => self.nand2,
            GateKind::Nor2 => self.nor2,
            GateKind::Xor2 => self.xor2,
            GateKind::Maj3 => self.maj3,
        }
    }
}

impl Default for NominalDelays {
    fn default() -> Self {
        NominalDelays {
            inv: 1.0,
            nand2: 1.2,
            nor2: 1.2,
            xor2: 2.4,
            maj3: 1.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgingParams {
    /// Supply voltage, volts.
    pub v_dd: f64,
    /// Fresh threshold voltage before process variation, volts.
    pub vth_nominal: f64,
    /// Standard deviation of the fresh-threshold process variation, volts.
    pub sigma_pv: f64,
    /// Stress-product exponent of the wear-out law.
    pub lambda_exp: f64,
    /// Relaxation divisor of the wear-out law; 0 means no recovery credit.
    pub beta_recovery: f64,
    /// Seconds of switching activity accumulated per calendar year.
    pub t_data_per_year: f64,
    /// Velocity-saturation exponent of the delay law.
    pub alpha_power: f64,
    /// Minimum gap kept between any threshold and the supply, volts.
    pub headroom: f64,
    /// Technology prefactor of the wear-out law.
    pub k_p: f64,
    pub d0: NominalDelays,
}

impl Default for AgingParams {
    fn default() -> Self {
        AgingParams {
            v_dd: 0.8,
            vth_nominal: 0.45,
            sigma_pv: 0.02,
            lambda_exp: 1.0 / 6.0,
            beta_recovery: 0.0,
            t_data_per_year: 3.15576e7,
            alpha_power: 1.3,
            headroom: 0.05,
            // Calibrated so an untampered 8-bit array multiplier under a
            // uniform input profile loses 10% of its speed in 4 years.
            k_p: calibrated_k_p(),
            d0: NominalDelays::default(),
        }
    }
}

/// See `AgingParams::default`; kept as a function so the value has one home.
/// Reproduce it with `cargo run --example calibrate` (bisection on the 4-year
/// static-delay ratio of the untampered 8-bit array multiplier).
pub fn calibrated_k_p() -> f64 {
    6.358985834872204e-10
}

impl AgingParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("v_dd", self.v_dd),
            ("t_data_per_year", self.t_data_per_year),
            ("alpha_power", self.alpha_power),
            ("headroom", self.headroom),
            ("k_p", self.k_p),
        ];
        for (name, v) in pos {
            if !v.is_finite() || v <= 0.0 {
                return Err(CoreError::Domain(format!("{name} must be finite and positive, got {v}")));
            }
        }
        if !self.vth_nominal.is_finite() || self.vth_nominal <= 0.0 || self.vth_nominal >= self.v_dd {
            return Err(CoreError::Domain(format!(
                "vth_nominal must lie in (0, v_dd), got {}",
                self.vth_nominal
            )));
        }
        if !self.sigma_pv.is_finite() || self.sigma_pv < 0.0 {
            return Err(CoreError::Domain(format!("sigma_pv must be >= 0, got {}", self.sigma_pv)));
        }
        if !self.lambda_exp.is_finite() || self.lambda_exp <= 0.0 || self.lambda_exp > 1.0 {
            return Err(CoreError::Domain(format!(
                "lambda_exp must lie in (0, 1], got {}",
                self.lambda_exp
            )));
        }
        if !self.beta_recovery.is_finite() || self.beta_recovery < 0.0 {
            return Err(CoreError::Domain(format!(
                "beta_recovery must be >= 0, got {}",
                self.beta_recovery
            )));
        }
        if self.headroom >= self.v_dd - self.vth_nominal {
            return Err(CoreError::Domain(
                "headroom leaves no room above the nominal threshold".into(),
            ));
        }
        Ok(())
    }

    /// Threshold shift after `years` of operation at stress duty `alpha`.
    pub fn delta_vth(&self, alpha: f64, years: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(CoreError::Domain(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if !years.is_finite() || years < 0.0 {
            return Err(CoreError::Domain(format!("years must be >= 0, got {years}")));
        }
        if alpha == 0.0 || years == 0.0 {
            return Ok(0.0);
        }
        let t = years * self.t_data_per_year;
        let base = self.k_p * self.k_p * alpha * t;
        Ok(base.powf(self.lambda_exp) / (1.0 + self.beta_recovery))
    }

    /// Aged threshold of one transistor, clamped `headroom` below the
    /// supply; the flag reports whether the clamp engaged.
    pub fn vth_at(&self, vth_fresh: f64, alpha: f64, years: f64) -> Result<(f64, bool)> {
        let raw = vth_fresh + self.delta_vth(alpha, years)?.abs();
        let cap = self.v_dd - self.headroom;
        if raw > cap {
            Ok((cap, true))
        } else {
            Ok((raw, false))
        }
    }

    /// Alpha-power delay of a gate whose worst pin threshold is `worst_vth`.
    pub fn gate_delay(&self, kind: GateKind, worst_vth: f64) -> f64 {
        let ratio = (self.v_dd - self.vth_nominal) / (self.v_dd - worst_vth);
        self.d0.get(kind) * ratio.powf(self.alpha_power)
    }
}

/// Fresh per-site thresholds with no process variation.
pub fn fresh_vth_nominal(netlist: &Netlist, params: &AgingParams) -> Vec<f64> {
    vec![params.vth_nominal; netlist.site_count()]
}

/// Fresh per-site thresholds with one process-variation draw. `slot` selects
/// an independent draw under the same seed (Monte Carlo iteration index).
pub fn fresh_vth_with_pv(
    netlist: &Netlist,
    params: &AgingParams,
    seed: u64,
    slot: u64,
) -> Result<Vec<f64>> {
    let normal = Normal::new(0.0, params.sigma_pv)
        .map_err(|e| CoreError::Domain(format!("bad sigma_pv: {e}")))?;
    let mut rng = rng::stream(seed, rng::tag::PV, slot);
    Ok((0..netlist.site_count())
        .map(|_| params.vth_nominal + normal.sample(&mut rng))
        .collect())
}

/// Random stress duties in [0.1, 0.9], one per site, for robustness sweeps.
pub fn random_alpha_vector(netlist: &Netlist, seed: u64, slot: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, rng::tag::MC_ALPHA, slot);
    (0..netlist.site_count()).map(|_| rng.gen_range(0.1..0.9)).collect()
}

/// Per-gate effective delays of a netlist at age `years`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateDelays {
    pub per_gate: Vec<f64>,
    /// Sites whose threshold hit the headroom clamp.
    pub saturated_sites: usize,
}

/// Evaluate every gate's delay from per-site thresholds and stress duties.
///
/// The full adder's pair-stage XOR is charged only its wear excess over the
/// same instance evaluated at age zero: its fresh latency, fabrication
/// scatter included, sits in arrival slack (the carry-in leg of a carry-save
/// stage is a gate later by construction, so the pair result is ready before
/// it is needed), and slack can hide latency but not run time backwards.
/// Every route through the block then costs the same at age zero no matter
/// how the pins are arranged, while an aged block is slower through the pair
/// pins than through the carry-in pin by exactly the pair stage's wear.
pub fn effective_gate_delays(
    netlist: &Netlist,
    params: &AgingParams,
    vth_fresh: &[f64],
    alpha: &[f64],
    years: f64,
) -> Result<GateDelays> {
    let n_sites = netlist.site_count();
    if vth_fresh.len() != n_sites || alpha.len() != n_sites {
        return Err(CoreError::Domain(format!(
            "expected {n_sites} per-site values, got {} thresholds and {} duties",
            vth_fresh.len(),
            alpha.len()
        )));
    }
    let mut saturated = 0usize;
    let mut per_gate = Vec::with_capacity(netlist.gates().len());
    for (g, gate) in netlist.gates().iter().enumerate() {
        let mut worst = f64::NEG_INFINITY;
        for s in netlist.gate_site_range(g) {
            let (v, sat) = params.vth_at(vth_fresh[s], alpha[s], years)?;
            if sat {
                saturated += 1;
            }
            worst = worst.max(v);
        }
        per_gate.push(params.gate_delay(gate.kind, worst));
    }
    for adder in netlist.adders() {
        if let AdderMembers::Full { xor_pair, .. } = adder.members {
            let g = xor_pair as usize;
            let mut fresh_worst = f64::NEG_INFINITY;
            for s in netlist.gate_site_range(g) {
                fresh_worst = fresh_worst.max(params.vth_at(vth_fresh[s], alpha[s], 0.0)?.0);
            }
            let fresh = params.gate_delay(netlist.gates()[g].kind, fresh_worst);
            per_gate[g] = (per_gate[g] - fresh).max(0.0);
        }
    }
    Ok(GateDelays {
        per_gate,
        saturated_sites: saturated,
    })
}
