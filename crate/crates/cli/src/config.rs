//! Experiment selection and the effective run configuration.
//!
//! A run is described by one JSON object. Every field has a default that
//! depends on the experiment, so a config file only needs the fields it
//! wants to change; `--seed`, `--out` and `--iterations` override the file.

use agewire_core::attack::PathScope;
use agewire_core::circuit::ArchTag;
use agewire_core::error::{CoreError, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    #[serde(rename = "STRESS_HIST")]
    StressHist,
    #[serde(rename = "DELAY_VS_TIME")]
    DelayVsTime,
    #[serde(rename = "BITWIDTH_SCALING")]
    BitwidthScaling,
    #[serde(rename = "MONTE_CARLO")]
    MonteCarlo,
    #[serde(rename = "ERROR_LIKELIHOOD")]
    ErrorLikelihood,
    #[serde(rename = "BASELINE_COMPARE")]
    BaselineCompare,
    #[serde(rename = "INFERENCE_CURVE")]
    InferenceCurve,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::StressHist => "STRESS_HIST",
            Experiment::DelayVsTime => "DELAY_VS_TIME",
            Experiment::BitwidthScaling => "BITWIDTH_SCALING",
            Experiment::MonteCarlo => "MONTE_CARLO",
            Experiment::ErrorLikelihood => "ERROR_LIKELIHOOD",
            Experiment::BaselineCompare => "BASELINE_COMPARE",
            Experiment::InferenceCurve => "INFERENCE_CURVE",
        }
    }

    /// Basename used for output files and the default output directory.
    pub fn slug(self) -> &'static str {
        match self {
            Experiment::StressHist => "stress_hist",
            Experiment::DelayVsTime => "delay_vs_time",
            Experiment::BitwidthScaling => "bitwidth_scaling",
            Experiment::MonteCarlo => "monte_carlo",
            Experiment::ErrorLikelihood => "error_likelihood",
            Experiment::BaselineCompare => "baseline_compare",
            Experiment::InferenceCurve => "inference_curve",
        }
    }
}

/// One entry of the attack list: the untampered reference, a rewiring
/// configuration, or one of the two reference trojans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackTag {
    Untampered,
    Rewiring { scope: PathScope, percent: u8 },
    PvTrojan,
    DccTrojan,
}

impl AttackTag {
    pub fn parse(s: &str) -> Result<AttackTag> {
        match s {
            "M-0-0" => return Ok(AttackTag::Untampered),
            "PV_TROJAN" => return Ok(AttackTag::PvTrojan),
            "DCC_TROJAN" => return Ok(AttackTag::DccTrojan),
            _ => {}
        }
        let err = || CoreError::Format(format!("unknown attack tag {s:?}"));
        let rest = s.strip_prefix("M-").ok_or_else(err)?;
        let (x, y) = rest.split_once('-').ok_or_else(err)?;
        let scope = if x == "All" {
            PathScope::All
        } else {
            PathScope::Top(x.parse().map_err(|_| err())?)
        };
        if matches!(scope, PathScope::Top(0)) {
            return Err(err());
        }
        let percent: u8 = y.strip_suffix('%').ok_or_else(err)?.parse().map_err(|_| err())?;
        if !matches!(percent, 25 | 50 | 75 | 100) {
            return Err(CoreError::Format(format!(
                "attack tag {s:?}: only 25/50/75/100% budgets are supported"
            )));
        }
        Ok(AttackTag::Rewiring { scope, percent })
    }

    pub fn name(&self) -> String {
        match self {
            AttackTag::Untampered => "M-0-0".into(),
            AttackTag::PvTrojan => "PV_TROJAN".into(),
            AttackTag::DccTrojan => "DCC_TROJAN".into(),
            AttackTag::Rewiring { scope, percent } => {
                let x = match scope {
                    PathScope::All => "All".to_string(),
                    PathScope::Top(k) => k.to_string(),
                };
                format!("M-{x}-{percent}%")
            }
        }
    }

    /// Name with filesystem-hostile characters replaced.
    pub fn slug(&self) -> String {
        self.name().replace('%', "pct")
    }
}

pub(crate) fn arch_from_name(s: &str) -> Result<ArchTag> {
    match ArchTag::from_name(s) {
        Some(ArchTag::Custom) | None => Err(CoreError::Format(format!(
            "architecture must be ARRAY or WALLACE, got {s:?}"
        ))),
        Some(a) => Ok(a),
    }
}

/// Effective configuration of one run. Serialized back out verbatim by
/// `--dump-config`; hashed (minus the output directory) into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// ARRAY or WALLACE. Ignored by BITWIDTH_SCALING, which runs `archs`.
    pub architecture: String,
    pub width: usize,
    /// Attack list; tags as in `AttackTag::parse`.
    pub attacks: Vec<String>,
    /// Evaluation ages in years, ascending.
    pub t_grid: Vec<f64>,
    pub seed: u64,
    /// Guard-band horizon and attack planning horizon, years.
    pub guard_years: f64,
    /// Monte Carlo iterations.
    pub iterations: usize,
    /// Input pairs behind each Monte Carlo average-delay sample.
    pub avg_pairs: usize,
    /// FIXED keeps measured stress duties; UNIFORM redraws them per iteration.
    pub alpha_mode: String,
    /// Histogram bin count over [0, 1] for STRESS_HIST.
    pub hist_bins: usize,
    /// Random input pairs behind the settle-time columns of DELAY_VS_TIME.
    pub sweep_pairs: u64,
    /// Architectures × widths swept by BITWIDTH_SCALING.
    pub archs: Vec<String>,
    pub widths: Vec<usize>,
    /// Fraction of all adders tampered in the BITWIDTH_SCALING sweep.
    pub tamper_fraction: f64,
    pub out_dir: PathBuf,
}

/// The nine-point default evaluation grid, half-year steps to four years.
pub fn default_t_grid() -> Vec<f64> {
    (0..9).map(|k| k as f64 * 0.5).collect()
}

impl ExperimentConfig {
    pub fn default_for(experiment: Experiment) -> ExperimentConfig {
        let attacks: Vec<String> = match experiment {
            Experiment::StressHist => vec!["M-0-0".into(), "M-All-100%".into()],
            Experiment::DelayVsTime => vec![
                "M-0-0".into(),
                "M-1-25%".into(),
                "M-1-50%".into(),
                "M-1-75%".into(),
                "M-1-100%".into(),
            ],
            Experiment::BitwidthScaling => vec!["M-All-100%".into()],
            Experiment::MonteCarlo => vec![
                "M-0-0".into(),
                "M-1-50%".into(),
                "M-1-100%".into(),
                "M-2-100%".into(),
                "M-All-100%".into(),
            ],
            Experiment::ErrorLikelihood => {
                vec!["M-0-0".into(), "M-1-100%".into(), "M-All-100%".into()]
            }
            Experiment::BaselineCompare => vec![
                "M-1-100%".into(),
                "M-All-100%".into(),
                "PV_TROJAN".into(),
                "DCC_TROJAN".into(),
            ],
            Experiment::InferenceCurve => {
                vec!["M-0-0".into(), "M-1-100%".into(), "M-All-100%".into()]
            }
        };
        ExperimentConfig {
            experiment,
            architecture: "ARRAY".into(),
            width: 8,
            attacks,
            // The full grid is affordable everywhere except under 5000-fold
            // process variation; Monte Carlo defaults to the horizon only.
            t_grid: match experiment {
                Experiment::MonteCarlo => vec![4.0],
                _ => default_t_grid(),
            },
            seed: 1,
            guard_years: 4.0,
            iterations: 5000,
            avg_pairs: 32,
            alpha_mode: "FIXED".into(),
            hist_bins: 20,
            sweep_pairs: 64,
            archs: vec!["ARRAY".into(), "WALLACE".into()],
            widths: vec![6, 8, 10, 12, 16],
            tamper_fraction: 0.10,
            out_dir: PathBuf::from(format!("out/{}", experiment.slug())),
        }
    }

    pub fn arch(&self) -> Result<ArchTag> {
        arch_from_name(&self.architecture)
    }

    pub fn attack_tags(&self) -> Result<Vec<AttackTag>> {
        let tags: Vec<AttackTag> =
            self.attacks.iter().map(|s| AttackTag::parse(s)).collect::<Result<_>>()?;
        for (i, a) in tags.iter().enumerate() {
            if tags[..i].contains(a) {
                return Err(CoreError::Format(format!("attack tag {} listed twice", a.name())));
            }
        }
        Ok(tags)
    }

    pub fn validate(&self) -> Result<()> {
        self.arch()?;
        if self.width < 2 || self.width > 16 {
            return Err(CoreError::Format(format!(
                "width {} out of range, expected 2..=16",
                self.width
            )));
        }
        if self.attacks.is_empty() {
            return Err(CoreError::Format("attack list is empty".into()));
        }
        let tags = self.attack_tags()?;
        let baselines_allowed = self.experiment == Experiment::BaselineCompare;
        for t in &tags {
            let baseline = matches!(t, AttackTag::PvTrojan | AttackTag::DccTrojan);
            if baseline && !baselines_allowed {
                return Err(CoreError::Format(format!(
                    "{} only takes part in the BASELINE_COMPARE experiment",
                    t.name()
                )));
            }
            if baselines_allowed {
                let comparable = matches!(
                    t,
                    AttackTag::PvTrojan
                        | AttackTag::DccTrojan
                        | AttackTag::Rewiring { scope: PathScope::Top(1), percent: 100 }
                        | AttackTag::Rewiring { scope: PathScope::All, percent: 100 }
                );
                if !comparable {
                    return Err(CoreError::Format(format!(
                        "BASELINE_COMPARE reports M-1-100%, M-All-100% and the two trojans; \
                         {} is not part of that comparison",
                        t.name()
                    )));
                }
            }
        }
        if self.t_grid.is_empty() {
            return Err(CoreError::Format("time grid is empty".into()));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::Format("time grid must be strictly ascending".into()));
        }
        if self.t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(CoreError::Format("time grid entries must be finite and >= 0".into()));
        }
        if !(self.guard_years > 0.0) || !self.guard_years.is_finite() {
            return Err(CoreError::Format("guard_years must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(CoreError::Format("iterations must be positive".into()));
        }
        if self.avg_pairs == 0 || self.sweep_pairs == 0 {
            return Err(CoreError::Format("stimulus pair counts must be positive".into()));
        }
        if !matches!(self.alpha_mode.as_str(), "FIXED" | "UNIFORM") {
            return Err(CoreError::Format(format!(
                "alpha_mode must be FIXED or UNIFORM, got {:?}",
                self.alpha_mode
            )));
        }
        if self.hist_bins == 0 {
            return Err(CoreError::Format("hist_bins must be positive".into()));
        }
        match self.experiment {
            Experiment::BitwidthScaling => {
                if self.archs.is_empty() || self.widths.is_empty() {
                    return Err(CoreError::Format("bit-width sweep needs archs and widths".into()));
                }
                for a in &self.archs {
                    arch_from_name(a)?;
                }
                if self.widths.iter().any(|w| *w < 2 || *w > 16) {
                    return Err(CoreError::Format("sweep widths must lie in 2..=16".into()));
                }
                if !(self.tamper_fraction > 0.0 && self.tamper_fraction <= 1.0) {
                    return Err(CoreError::Format("tamper_fraction must lie in (0, 1]".into()));
                }
            }
            Experiment::InferenceCurve => {
                if self.width != 8 {
                    return Err(CoreError::Format(format!(
                        "the shipped model multiplies 8-bit significands; width {} will not fit",
                        self.width
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hash of the effective config with the output directory blanked, so
    /// the same run into two directories carries the same identity.
    pub fn content_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v.as_object_mut().expect("config is an object").remove("out_dir");
        let canon = serde_json::to_string(&v).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        format!("{:x}", h.finalize())
    }
}

/// Sparse form accepted from a config file: any subset of the fields,
/// unknown keys rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: Option<Experiment>,
    architecture: Option<String>,
    width: Option<usize>,
    attacks: Option<Vec<String>>,
    t_grid: Option<Vec<f64>>,
    seed: Option<u64>,
    guard_years: Option<f64>,
    iterations: Option<usize>,
    avg_pairs: Option<usize>,
    alpha_mode: Option<String>,
    hist_bins: Option<usize>,
    sweep_pairs: Option<u64>,
    archs: Option<Vec<String>>,
    widths: Option<Vec<usize>>,
    tamper_fraction: Option<f64>,
    out_dir: Option<PathBuf>,
}

/// Command-line overrides applied on top of file and defaults.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub iterations: Option<usize>,
}

/// Assemble the effective config: experiment defaults, then the file,
/// then flag overrides. The file may restate the experiment, but only
/// consistently with the invoked subcommand.
pub fn load(
    experiment: Experiment,
    file: Option<&Path>,
    overrides: &Overrides,
) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default_for(experiment);
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CoreError::Format(format!("cannot read {}: {e}", path.display())))?;
        let f: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| CoreError::Format(format!("bad config {}: {e}", path.display())))?;
        if let Some(declared) = f.experiment {
            if declared != experiment {
                return Err(CoreError::Format(format!(
                    "config declares experiment {} but the {} command was invoked",
                    declared.name(),
                    experiment.name()
                )));
            }
        }
        if let Some(v) = f.architecture {
            cfg.architecture = v;
        }
        if let Some(v) = f.width {
            cfg.width = v;
        }
        if let Some(v) = f.attacks {
            cfg.attacks = v;
        }
        if let Some(v) = f.t_grid {
            cfg.t_grid = v;
        }
        if let Some(v) = f.seed {
            cfg.seed = v;
        }
        if let Some(v) = f.guard_years {
            cfg.guard_years = v;
        }
        if let Some(v) = f.iterations {
            cfg.iterations = v;
        }
        if let Some(v) = f.avg_pairs {
            cfg.avg_pairs = v;
        }
        if let Some(v) = f.alpha_mode {
            cfg.alpha_mode = v;
        }
        if let Some(v) = f.hist_bins {
            cfg.hist_bins = v;
        }
        if let Some(v) = f.sweep_pairs {
            cfg.sweep_pairs = v;
        }
        if let Some(v) = f.archs {
            cfg.archs = v;
        }
        if let Some(v) = f.widths {
            cfg.widths = v;
        }
        if let Some(v) = f.tamper_fraction {
            cfg.tamper_fraction = v;
        }
        if let Some(v) = f.out_dir {
            cfg.out_dir = v;
        }
    }
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    if let Some(o) = &overrides.out {
        cfg.out_dir = o.clone();
    }
    if let Some(n) = overrides.iterations {
        cfg.iterations = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attack_tags_roundtrip() {
        for s in ["M-0-0", "M-1-25%", "M-2-100%", "M-All-75%", "PV_TROJAN", "DCC_TROJAN"] {
            assert_eq!(AttackTag::parse(s).unwrap().name(), s);
        }
    }

    #[test]
    fn bad_attack_tags_are_rejected() {
        for s in ["M-0-100%", "M--100%", "M-1-15%", "M-1-100", "M-x-50%", "trojan", ""] {
            assert!(AttackTag::parse(s).is_err(), "{s:?} should not parse");
        }
    }

    #[test]
    fn defaults_validate_for_every_experiment() {
        for e in [
            Experiment::StressHist,
            Experiment::DelayVsTime,
            Experiment::BitwidthScaling,
            Experiment::MonteCarlo,
            Experiment::ErrorLikelihood,
            Experiment::BaselineCompare,
            Experiment::InferenceCurve,
        ] {
            ExperimentConfig::default_for(e).validate().unwrap();
        }
    }

    #[test]
    fn config_hash_ignores_out_dir_only() {
        let a = ExperimentConfig::default_for(Experiment::StressHist);
        let mut b = a.clone();
        b.out_dir = PathBuf::from("elsewhere");
        assert_eq!(a.content_hash(), b.content_hash());
        b.seed = 7;
        assert_ne!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn file_experiment_must_match_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"experiment":"STRESS_HIST","seed":9}"#).unwrap();
        let got = load(Experiment::StressHist, Some(&p), &Overrides::default()).unwrap();
        assert_eq!(got.seed, 9);
        let err = load(Experiment::MonteCarlo, Some(&p), &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("STRESS_HIST"));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"seeds": 3}"#).unwrap();
        assert!(load(Experiment::StressHist, Some(&p), &Overrides::default()).is_err());
    }

    #[test]
    fn overrides_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"seed": 9, "iterations": 10}"#).unwrap();
        let ov = Overrides { seed: Some(11), out: None, iterations: Some(20) };
        let got = load(Experiment::MonteCarlo, Some(&p), &ov).unwrap();
        assert_eq!((got.seed, got.iterations), (11, 20));
    }

    #[test]
    fn baseline_tags_are_fenced_to_the_comparison() {
        let mut cfg = ExperimentConfig::default_for(Experiment::DelayVsTime);
        cfg.attacks.push("PV_TROJAN".into());
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig::default_for(Experiment::BaselineCompare);
        cfg.validate().unwrap();
    }
}
