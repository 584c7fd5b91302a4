//! Monte Carlo aging sweeps over process variation and, optionally, stress
//! duty uncertainty.
//!
//! Every iteration draws its own fabrication corner from a counter-addressed
//! stream keyed by the iteration index, so the draw an iteration sees does
//! not depend on which worker ran it or in what order. Results are collected
//! positionally and reduced in iteration order, which makes the whole run
//! bit-identical across thread counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activity::StressMap;
use crate::aging::{effective_gate_delays, fresh_vth_with_pv, random_alpha_vector, AgingParams};
use crate::circuit::Netlist;
use crate::error::{CoreError, Result};
use crate::timing::{static_max_delay, EventSim, StimulusMode};

/// Where each iteration's stress duties come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaMode {
    /// Use the measured stress map unchanged.
    Fixed,
    /// Draw every site's duty uniformly from [0.1, 0.9] per iteration.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub iterations: usize,
    pub seed: u64,
    pub alpha_mode: AlphaMode,
    pub t_grid: Vec<f64>,
    /// Input pairs behind the average-delay estimate.
    pub avg_pairs: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            iterations: 5000,
            seed: 1,
            alpha_mode: AlphaMode::Fixed,
            t_grid: vec![1.0],
            avg_pairs: 32,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(CoreError::Domain("monte carlo needs at least one iteration".into()));
        }
        if self.avg_pairs == 0 {
            return Err(CoreError::Domain("average delay needs at least one input pair".into()));
        }
        if self.t_grid.is_empty() {
            return Err(CoreError::Domain("empty time grid".into()));
        }
        if let Some(t) = self.t_grid.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(CoreError::Domain(format!("bad time point {t}")));
        }
        Ok(())
    }
}

/// Order statistics of one sample set. Percentiles use the nearest-rank
/// convention on the sorted samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistSummary {
    pub min: f64,
    pub p5: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub p95: f64,
    pub max: f64,
    pub mean: f64,
}

impl DistSummary {
    pub fn from_samples(samples: &[f64]) -> DistSummary {
        assert!(!samples.is_empty());
        let mut s = samples.to_vec();
        s.sort_by(|a, b| a.total_cmp(b));
        let n = s.len();
        let rank = |q: f64| s[((q * n as f64).ceil() as usize).clamp(1, n) - 1];
        DistSummary {
            min: s[0],
            p5: rank(0.05),
            p25: rank(0.25),
            median: rank(0.50),
            p75: rank(0.75),
            p95: rank(0.95),
            max: s[n - 1],
            mean: s.iter().sum::<f64>() / n as f64,
        }
    }
}

/// Distributions at one age.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McTimePoint {
    pub t_years: f64,
    pub max_delay: DistSummary,
    pub avg_delay: DistSummary,
    /// Per-iteration worst static delay, iteration order.
    pub max_samples: Vec<f64>,
    /// Per-iteration mean settle time, iteration order.
    pub avg_samples: Vec<f64>,
    /// Iterations in which at least one site hit the threshold clamp.
    pub saturated_iterations: usize,
}

/// Run the sweep. The stress map provides the `Fixed` duties and must come
/// from the same netlist (tampered netlists age under their own map).
pub fn run_monte_carlo(
    netlist: &Netlist,
    stress: &StressMap,
    config: &McConfig,
    params: &AgingParams,
) -> Result<Vec<McTimePoint>> {
    config.validate()?;
    params.validate()?;
    if stress.alpha.len() != netlist.site_count() {
        return Err(CoreError::Domain(format!(
            "stress map covers {} sites, netlist has {}",
            stress.alpha.len(),
            netlist.site_count()
        )));
    }
    let n_inputs = netlist.input_count();
    let stimulus = StimulusMode::RandomPairs {
        count: config.avg_pairs.min(u32::MAX as usize) as u32,
        seed: config.seed,
    };
    let pairs: Vec<(Vec<bool>, Vec<bool>)> = (0..stimulus.pair_count(n_inputs)?)
        .map(|k| stimulus.pair(n_inputs, k))
        .collect();

    let mut out = Vec::with_capacity(config.t_grid.len());
    for &t in &config.t_grid {
        let per_iter: Vec<Result<(f64, f64, bool)>> = (0..config.iterations as u64)
            .into_par_iter()
            .map(|iter| {
                let vth0 = fresh_vth_with_pv(netlist, params, config.seed, iter)?;
                let alpha_draw;
                let alpha: &[f64] = match config.alpha_mode {
                    AlphaMode::Fixed => &stress.alpha,
                    AlphaMode::Uniform => {
                        alpha_draw = random_alpha_vector(netlist, config.seed, iter);
                        &alpha_draw
                    }
                };
                let d = effective_gate_delays(netlist, params, &vth0, alpha, t)?;
                let max = static_max_delay(netlist, &d.per_gate);
                let sim = EventSim::new(netlist, &d.per_gate)?;
                let mut sum = 0.0;
                for (from, to) in &pairs {
                    sum += sim.run(from, to, None)?.settle;
                }
                Ok((max, sum / pairs.len() as f64, d.saturated_sites > 0))
            })
            .collect();

        let mut max_samples = Vec::with_capacity(config.iterations);
        let mut avg_samples = Vec::with_capacity(config.iterations);
        let mut saturated = 0usize;
        for r in per_iter {
            let (max, avg, sat) = r?;
            max_samples.push(max);
            avg_samples.push(avg);
            saturated += sat as usize;
        }
        out.push(McTimePoint {
            t_years: t,
            max_delay: DistSummary::from_samples(&max_samples),
            avg_delay: DistSummary::from_samples(&avg_samples),
            max_samples,
            avg_samples,
            saturated_iterations: saturated,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activity::{compute_stress, InputProfile};
    use crate::aging::fresh_vth_nominal;
    use crate::attack::{build_config, PathScope};
    use crate::runtime;
    use crate::timing::natural_stress_mode;
    use approx::assert_relative_eq;
    use crate::circuit::build_array_multiplier;

    fn natural_stress(n: &Netlist) -> StressMap {
        compute_stress(n, &InputProfile::Uniform, natural_stress_mode(n)).unwrap()
    }

    #[test]
    fn degenerate_run_equals_deterministic_analysis() {
        let n = build_array_multiplier(4).unwrap();
        let mut params = AgingParams::default();
        params.sigma_pv = 0.0;
        let stress = natural_stress(&n);
        let config = McConfig {
            iterations: 1,
            t_grid: vec![2.0],
            ..McConfig::default()
        };
        let points = run_monte_carlo(&n, &stress, &config, &params).unwrap();
        let vth = fresh_vth_nominal(&n, &params);
        let d = effective_gate_delays(&n, &params, &vth, &stress.alpha, 2.0).unwrap();
        assert_eq!(points[0].max_delay.median, static_max_delay(&n, &d.per_gate));
        assert_eq!(points[0].max_samples.len(), 1);
        assert_eq!(points[0].max_delay.min, points[0].max_delay.max);
    }

    #[test]
    fn identical_across_thread_counts() {
        let n = build_array_multiplier(4).unwrap();
        let params = AgingParams::default();
        let stress = natural_stress(&n);
        let config = McConfig { iterations: 40, t_grid: vec![0.0, 1.0], ..McConfig::default() };
        let one = runtime::run(Some(1), || run_monte_carlo(&n, &stress, &config, &params)).unwrap();
        let four = runtime::run(Some(4), || run_monte_carlo(&n, &stress, &config, &params)).unwrap();
        assert_eq!(one, four, "same seed must be bit-identical regardless of workers");
    }

    #[test]
    fn seeds_and_modes_change_the_draws() {
        let n = build_array_multiplier(4).unwrap();
        let params = AgingParams::default();
        let stress = natural_stress(&n);
        let base = McConfig { iterations: 12, t_grid: vec![1.0], ..McConfig::default() };
        let a = run_monte_carlo(&n, &stress, &base, &params).unwrap();
        let b = run_monte_carlo(&n, &stress, &McConfig { seed: 2, ..base.clone() }, &params).unwrap();
        assert_ne!(a[0].max_samples, b[0].max_samples);
        let u = run_monte_carlo(
            &n,
            &stress,
            &McConfig { alpha_mode: AlphaMode::Uniform, ..base },
            &params,
        )
        .unwrap();
        assert_ne!(a[0].max_samples, u[0].max_samples);
    }

    #[test]
    fn tampering_shifts_the_aged_median_up() {
        let n = build_array_multiplier(6).unwrap();
        let params = AgingParams::default();
        let plan = build_config(&n, &InputProfile::Uniform, &params, PathScope::Top(1), 100, 4.0).unwrap();
        let t = plan.apply(&n).unwrap();
        let config = McConfig { iterations: 60, t_grid: vec![4.0], ..McConfig::default() };
        let clean = run_monte_carlo(&n, &natural_stress(&n), &config, &params).unwrap();
        let dirty = run_monte_carlo(&t, &natural_stress(&t), &config, &params).unwrap();
        assert!(dirty[0].max_delay.median > clean[0].max_delay.median);
        // Fresh silicon is indistinguishable under the same corners.
        let f0 = McConfig { iterations: 20, t_grid: vec![0.0], ..McConfig::default() };
        let c0 = run_monte_carlo(&n, &natural_stress(&n), &f0, &params).unwrap();
        let d0 = run_monte_carlo(&t, &natural_stress(&t), &f0, &params).unwrap();
        assert_eq!(c0[0].max_samples, d0[0].max_samples);
    }

    #[test]
    fn summary_statistics_are_ordered() {
        let s = DistSummary::from_samples(&[3.0, 1.0, 2.0, 5.0, 4.0]);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.median, 3.0);
        assert_eq!(s.max, 5.0);
        assert_relative_eq!(s.mean, 3.0);
        assert!(s.p5 <= s.p25 && s.p25 <= s.median && s.median <= s.p75 && s.p75 <= s.p95);
    }

    #[test]
    fn config_validation_catches_nonsense() {
        let n = build_array_multiplier(2).unwrap();
        let stress = natural_stress(&n);
        let params = AgingParams::default();
        for bad in [
            McConfig { iterations: 0, ..McConfig::default() },
            McConfig { avg_pairs: 0, ..McConfig::default() },
            McConfig { t_grid: vec![], ..McConfig::default() },
            McConfig { t_grid: vec![-1.0], ..McConfig::default() },
        ] {
            assert!(run_monte_carlo(&n, &stress, &bad, &params).is_err());
        }
    }
}
