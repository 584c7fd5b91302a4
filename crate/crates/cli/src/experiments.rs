//! The seven experiments: build, stress, attack, age, measure, write.
//!
//! Each experiment stages its outputs in memory and nothing touches the
//! filesystem until the whole computation has succeeded, so a failing run
//! leaves no partial files behind. Figure CSVs always carry the
//! normalization base (the untampered fresh-silicon maximum delay) as an
//! explicit column; the manifest is written last and names every output
//! with its checksum.

use crate::config::{AttackTag, Experiment, ExperimentConfig};
use crate::csvout::{line_plot, Csv};
use crate::manifest::{sha256_hex, RunManifest, MANIFEST_NAME};
use agewire_core::activity::{stress_histogram, InputProfile, StressBasis, StressMode};
use agewire_core::aging::{effective_gate_delays, fresh_vth_nominal, AgingParams};
use agewire_core::attack::{build_config, compare_attacks, PathScope};
use agewire_core::circuit::{build_array_multiplier, build_wallace_multiplier, ArchTag, Netlist};
use agewire_core::error::{CoreError, Result};
use agewire_core::fault::{build_fault_series, Coverage};
use agewire_core::inference::{eval_dataset, run_inference, ToyModel, TOY_SEED};
use agewire_core::mc::{AlphaMode, McConfig};
use agewire_core::timing::{
    compute_guard_band, delay_sweep, error_likelihood, natural_stress_mode, static_max_delay,
    GuardBand, StimulusMode,
};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

pub struct RunSummary {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
    /// Files written, in write order; the manifest comes last.
    pub files: Vec<String>,
}

#[derive(Default)]
struct Staging {
    files: Vec<(String, Vec<u8>)>,
}

impl Staging {
    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        let name = name.into();
        assert!(
            self.files.iter().all(|(n, _)| *n != name),
            "output {name} staged twice"
        );
        self.files.push((name, bytes));
    }

    fn add_text(&mut self, name: impl Into<String>, text: String) {
        self.add(name, text.into_bytes());
    }
}

#[derive(Default)]
struct RunMeta {
    netlist_hashes: BTreeMap<String, String>,
    seeds: BTreeMap<String, u64>,
}

/// The untampered workbench for one architecture and width, with the
/// pieces every experiment reuses: signal statistics, nominal thresholds,
/// natural duties and the fresh-silicon delay that normalizes figures.
struct Bench {
    label: String,
    netlist: Netlist,
    params: AgingParams,
    basis: StressBasis,
    vth: Vec<f64>,
    alpha0: Vec<f64>,
    base_delay: f64,
}

impl Bench {
    fn new(arch: ArchTag, width: usize) -> Result<Bench> {
        let netlist = match arch {
            ArchTag::Array => build_array_multiplier(width)?,
            ArchTag::Wallace => build_wallace_multiplier(width)?,
            ArchTag::Custom => {
                return Err(CoreError::Format("custom netlists have no builder".into()))
            }
        };
        let params = AgingParams::default();
        let basis = StressBasis::build(&netlist, &InputProfile::Uniform, natural_stress_mode(&netlist))?;
        let vth = fresh_vth_nominal(&netlist, &params);
        let alpha0 = basis.stress_map(&netlist).alpha;
        let d0 = effective_gate_delays(&netlist, &params, &vth, &alpha0, 0.0)?.per_gate;
        let base_delay = static_max_delay(&netlist, &d0);
        Ok(Bench {
            label: format!("{}-{}", arch.name(), width),
            netlist,
            params,
            basis,
            vth,
            alpha0,
            base_delay,
        })
    }

    /// Record the sampling seed when the input space was too wide to
    /// enumerate, so the manifest captures every stream the run drew from.
    fn note_seeds(&self, meta: &mut RunMeta) {
        if let StressMode::Sampled { seed, .. } = natural_stress_mode(&self.netlist) {
            meta.seeds.insert("stress_sample".into(), seed);
        }
    }

    /// The netlist a tag runs on, with its display label.
    fn variant(&self, tag: &AttackTag, horizon_years: f64) -> Result<(String, Netlist)> {
        match tag {
            AttackTag::Untampered => Ok((tag.name(), self.netlist.clone())),
            AttackTag::Rewiring { scope, percent } => {
                let plan = build_config(
                    &self.netlist,
                    &InputProfile::Uniform,
                    &self.params,
                    *scope,
                    *percent,
                    horizon_years,
                )?;
                let tampered = plan.apply(&self.netlist)?;
                Ok((plan.config_tag, tampered))
            }
            AttackTag::PvTrojan | AttackTag::DccTrojan => Err(CoreError::Format(format!(
                "{} does not rewire the netlist; it has no variant",
                tag.name()
            ))),
        }
    }

    fn guard_band(&self, cfg: &ExperimentConfig, meta: &mut RunMeta) -> Result<GuardBand> {
        let stimulus = if self.netlist.input_count() <= 16 {
            StimulusMode::Exhaustive
        } else {
            meta.seeds.insert("guard_stimulus".into(), cfg.seed);
            StimulusMode::RandomPairs { count: 4096, seed: cfg.seed }
        };
        compute_guard_band(&self.netlist, &self.params, cfg.guard_years, stimulus)
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    let started = Instant::now();
    let mut staging = Staging::default();
    let mut meta = RunMeta::default();
    meta.seeds.insert("config".into(), config.seed);

    match config.experiment {
        Experiment::StressHist => stress_hist(config, &mut staging, &mut meta)?,
        Experiment::DelayVsTime => delay_vs_time(config, &mut staging, &mut meta)?,
        Experiment::BitwidthScaling => bitwidth_scaling(config, &mut staging, &mut meta)?,
        Experiment::MonteCarlo => monte_carlo(config, &mut staging, &mut meta)?,
        Experiment::ErrorLikelihood => error_likelihood_exp(config, &mut staging, &mut meta)?,
        Experiment::BaselineCompare => baseline_compare(config, &mut staging, &mut meta)?,
        Experiment::InferenceCurve => inference_curve(config, &mut staging, &mut meta)?,
    }

    std::fs::create_dir_all(&config.out_dir)?;
    let mut outputs = BTreeMap::new();
    let mut files = Vec::new();
    for (name, bytes) in &staging.files {
        let path = config.out_dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        outputs.insert(name.clone(), sha256_hex(bytes));
        files.push(name.clone());
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        experiment: config.experiment.name().into(),
        config_hash: config.content_hash(),
        netlist_hashes: meta.netlist_hashes,
        seeds: meta.seeds,
        wall_clock_ms: started.elapsed().as_millis() as u64,
        outputs,
    };
    std::fs::write(config.out_dir.join(MANIFEST_NAME), manifest.to_json())?;
    files.push(MANIFEST_NAME.into());
    Ok(RunSummary { out_dir: config.out_dir.clone(), manifest, files })
}

/// Duty histograms of each configuration, plus per-tag moments. The
/// summary carries exactly what the shift claim needs: variance and the
/// population of heavily stressed sites.
fn stress_hist(cfg: &ExperimentConfig, staging: &mut Staging, meta: &mut RunMeta) -> Result<()> {
    let b = Bench::new(cfg.arch()?, cfg.width)?;
    b.note_seeds(meta);
    let bins = cfg.hist_bins;
    let mut labeled: Vec<(String, Vec<u64>)> = Vec::new();
    let mut summary = Csv::new(&[
        "tag",
        "sites",
        "mean_alpha",
        "var_alpha",
        "sites_alpha_ge_0.7",
        "base_delay",
    ]);
    for tag in cfg.attack_tags()? {
        let (label, variant) = b.variant(&tag, cfg.guard_years)?;
        meta.netlist_hashes
            .insert(format!("{}/{}", b.label, label), variant.content_hash());
        let alpha = b.basis.stress_map(&variant).alpha;
        let n = alpha.len() as f64;
        let mean = alpha.iter().sum::<f64>() / n;
        let var = alpha.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
        let hot = alpha.iter().filter(|a| **a >= 0.7).count();
        summary.row(&[&label, &alpha.len(), &mean, &var, &hot, &b.base_delay]);
        labeled.push((label, stress_histogram(&alpha, bins)));
    }

    let mut header: Vec<&str> = vec!["bin_lo", "bin_hi"];
    for (label, _) in &labeled {
        header.push(label);
    }
    header.push("base_delay");
    let mut csv = Csv::new(&header);
    for k in 0..bins {
        let lo = k as f64 / bins as f64;
        let hi = (k + 1) as f64 / bins as f64;
        let mut fields: Vec<&dyn std::fmt::Display> = vec![&lo, &hi];
        for (_, h) in &labeled {
            fields.push(&h[k]);
        }
        fields.push(&b.base_delay);
        csv.row(&fields);
    }

    let mut gp = String::new();
    gp.push_str("set datafile separator ','\n");
    gp.push_str(&format!("set title 'Stress duty distribution ({})'\n", b.label));
    gp.push_str("set xlabel 'stress duty'\nset ylabel 'transistor sites'\n");
    gp.push_str("set style fill transparent solid 0.45 border\nset grid\n");
    for (i, (label, _)) in labeled.iter().enumerate() {
        gp.push_str(if i == 0 { "plot " } else { ",\\\n     " });
        gp.push_str(&format!(
            "'stress_hist.csv' using (($1+$2)/2):{} every ::1 title '{label}' with boxes",
            i + 3
        ));
    }
    gp.push('\n');

    staging.add_text("stress_hist.csv", csv.into_string());
    staging.add_text("stress_summary.csv", summary.into_string());
    staging.add_text("stress_hist.gp", gp);
    Ok(())
}

/// Normalized worst-path delay against age, one column per configuration,
/// with sampled settle times in a companion file.
fn delay_vs_time(cfg: &ExperimentConfig, staging: &mut Staging, meta: &mut RunMeta) -> Result<()> {
    let b = Bench::new(cfg.arch()?, cfg.width)?;
    b.note_seeds(meta);
    let stimulus = StimulusMode::RandomPairs {
        count: cfg.sweep_pairs.min(u32::MAX as u64) as u32,
        seed: cfg.seed,
    };
    let mut columns: Vec<(String, Vec<agewire_core::timing::DelayReport>)> = Vec::new();
    for tag in cfg.attack_tags()? {
        let (label, variant) = b.variant(&tag, cfg.guard_years)?;
        meta.netlist_hashes
            .insert(format!("{}/{}", b.label, label), variant.content_hash());
        let alpha = b.basis.stress_map(&variant).alpha;
        let reports = delay_sweep(&variant, &b.params, &b.vth, &alpha, &cfg.t_grid, stimulus.clone())?;
        columns.push((label, reports));
    }

    let mut header: Vec<&str> = vec!["t_years"];
    for (label, _) in &columns {
        header.push(label);
    }
    header.push("base_delay");
    let mut figure = Csv::new(&header);
    for (i, t) in cfg.t_grid.iter().enumerate() {
        let normalized: Vec<f64> =
            columns.iter().map(|(_, r)| r[i].static_max / b.base_delay).collect();
        let mut fields: Vec<&dyn std::fmt::Display> = vec![t];
        for v in &normalized {
            fields.push(v);
        }
        fields.push(&b.base_delay);
        figure.row(&fields);
    }

    let mut detail = Csv::new(&["tag", "t_years", "max_settle", "mean_settle", "stimuli", "base_delay"]);
    for (label, reports) in &columns {
        for r in reports {
            detail.row(&[label, &r.t_years, &r.max_settle, &r.mean_settle, &r.stimuli, &b.base_delay]);
        }
    }

    let series: Vec<(String, String)> = columns
        .iter()
        .enumerate()
        .map(|(i, (label, _))| (format!("1:{}", i + 2), label.clone()))
        .collect();
    let gp = line_plot(
        "delay_vs_time.csv",
        &format!("Worst-path delay vs age ({})", b.label),
        "years",
        "delay / fresh maximum",
        &series,
    );

    staging.add_text("delay_vs_time.csv", figure.into_string());
    staging.add_text("delay_vs_time_settle.csv", detail.into_string());
    staging.add_text("delay_vs_time.gp", gp);
    Ok(())
}

/// How hard a fixed tampering budget bites as multipliers grow: the same
/// fraction of adders rewired at every width, delay deltas at the horizon.
fn bitwidth_scaling(cfg: &ExperimentConfig, staging: &mut Staging, meta: &mut RunMeta) -> Result<()> {
    let mut csv = Csv::new(&[
        "arch",
        "width",
        "adders",
        "tampered_adders",
        "base_delay",
        "natural_delay",
        "tampered_delay",
        "rel_delta_pct",
    ]);
    let pct = cfg.tamper_fraction * 100.0;
    let plan_label = format!("M-All-100%@{pct}%");
    let mut archs: Vec<ArchTag> = Vec::new();
    for name in &cfg.archs {
        archs.push(crate::config::arch_from_name(name)?);
    }
    for arch in &archs {
        for &width in &cfg.widths {
            let b = Bench::new(*arch, width)?;
            b.note_seeds(meta);
            let full = build_config(
                &b.netlist,
                &InputProfile::Uniform,
                &b.params,
                PathScope::All,
                100,
                cfg.guard_years,
            )?;
            let total = b.netlist.adders().len();
            let keep = ((cfg.tamper_fraction * total as f64).ceil() as usize)
                .max(1)
                .min(full.entries.len());
            let plan = full.truncated(keep, &plan_label);
            let tampered = plan.apply(&b.netlist)?;
            meta.netlist_hashes
                .insert(format!("{}/M-0-0", b.label), b.netlist.content_hash());
            meta.netlist_hashes
                .insert(format!("{}/{}", b.label, plan_label), tampered.content_hash());

            let natural = {
                let d = effective_gate_delays(&b.netlist, &b.params, &b.vth, &b.alpha0, cfg.guard_years)?;
                static_max_delay(&b.netlist, &d.per_gate)
            };
            let aged_tampered = {
                let alpha = b.basis.stress_map(&tampered).alpha;
                let d = effective_gate_delays(&tampered, &b.params, &b.vth, &alpha, cfg.guard_years)?;
                static_max_delay(&tampered, &d.per_gate)
            };
            let rel = 100.0 * (aged_tampered - natural) / natural;
            csv.row(&[
                &arch.name(),
                &width,
                &total,
                &plan.entries.len(),
                &b.base_delay,
                &natural,
                &aged_tampered,
                &rel,
            ]);
        }
    }

    let series: Vec<(String, String)> = archs
        .iter()
        .map(|a| {
            (
                format!("2:(strcol(1) eq '{}' ? $8 : NaN)", a.name()),
                a.name().to_string(),
            )
        })
        .collect();
    let gp = line_plot(
        "bitwidth_scaling.csv",
        &format!("Delay cost of rewiring {pct}% of adders, {} years", cfg.guard_years),
        "multiplier width (bits)",
        "delay increase over natural aging (%)",
        &series,
    );

    staging.add_text("bitwidth_scaling.csv", csv.into_string());
    staging.add_text("bitwidth_scaling.gp", gp);
    Ok(())
}

/// Delay distributions under process variation, summarized per age.
fn monte_carlo(cfg: &ExperimentConfig, staging: &mut Staging, meta: &mut RunMeta) -> Result<()> {
    let b = Bench::new(cfg.arch()?, cfg.width)?;
    b.note_seeds(meta);
    let alpha_mode = match cfg.alpha_mode.as_str() {
        "FIXED" => AlphaMode::Fixed,
        _ => AlphaMode::Uniform,
    };
    let mcc = McConfig {
        iterations: cfg.iterations,
        seed: cfg.seed,
        alpha_mode,
        t_grid: cfg.t_grid.clone(),
        avg_pairs: cfg.avg_pairs,
    };
    let mut csv = Csv::new(&[
        "tag",
        "t_years",
        "metric",
        "min",
        "p5",
        "p25",
        "median",
        "p75",
        "p95",
        "max",
        "mean",
        "saturated_iterations",
        "base_delay",
    ]);
    let mut tags_seen = Vec::new();
    for tag in cfg.attack_tags()? {
        let (label, variant) = b.variant(&tag, cfg.guard_years)?;
        meta.netlist_hashes
            .insert(format!("{}/{}", b.label, label), variant.content_hash());
        let stress = b.basis.stress_map(&variant);
        let points = agewire_core::mc::run_monte_carlo(&variant, &stress, &mcc, &b.params)?;
        for p in &points {
            for (metric, s) in [("max_delay", &p.max_delay), ("avg_delay", &p.avg_delay)] {
                csv.row(&[
                    &label,
                    &p.t_years,
                    &metric,
                    &s.min,
                    &s.p5,
                    &s.p25,
                    &s.median,
                    &s.p75,
                    &s.p95,
                    &s.max,
                    &s.mean,
                    &p.saturated_iterations,
                    &b.base_delay,
                ]);
            }
        }
        tags_seen.push(label);
    }

    let series: Vec<(String, String)> = tags_seen
        .iter()
        .map(|label| {
            (
                format!("2:(strcol(1) eq '{label}' && strcol(3) eq 'max_delay' ? $7 : NaN)"),
                format!("{label} median max"),
            )
        })
        .collect();
    let gp = line_plot(
        "monte_carlo.csv",
        &format!("Monte Carlo delay under process variation ({}, {} iterations)", b.label, cfg.iterations),
        "years",
        "delay",
        &series,
    );

    staging.add_text("monte_carlo.csv", csv.into_string());
    staging.add_text("monte_carlo.gp", gp);
    Ok(())
}

fn error_rows(
    csv: &mut Csv,
    tag: &str,
    reports: &[agewire_core::timing::ErrorReport],
    p_d: f64,
    base_delay: f64,
) {
    for r in reports {
        csv.row(&[
            &tag,
            &r.t_years,
            &r.violations,
            &r.stimuli,
            &r.likelihood,
            &r.half_width,
            &p_d,
            &base_delay,
        ]);
    }
}

fn error_csv_header() -> Csv {
    Csv::new(&[
        "tag",
        "t_years",
        "violations",
        "stimuli",
        "likelihood",
        "half_width",
        "p_d",
        "base_delay",
    ])
}

fn likelihood_plot(csv_name: &str, title: &str, tags: &[String]) -> String {
    let series: Vec<(String, String)> = tags
        .iter()
        .map(|label| {
            (format!("2:(strcol(1) eq '{label}' ? $5 : NaN)"), label.clone())
        })
        .collect();
    line_plot(csv_name, title, "years", "fraction of stimuli past the guard band", &series)
}

/// Guard-band violation fractions against age for each configuration,
/// all judged against the untampered horizon guard band.
fn error_likelihood_exp(cfg: &ExperimentConfig, staging: &mut Staging, meta: &mut RunMeta) -> Result<()> {
    let b = Bench::new(cfg.arch()?, cfg.width)?;
    b.note_seeds(meta);
    let guard = b.guard_band(cfg, meta)?;
    let mut csv = error_csv_header();
    let mut tags_seen = Vec::new();
    for tag in cfg.attack_tags()? {
        let (label, variant) = b.variant(&tag, cfg.guard_years)?;
        meta.netlist_hashes
            .insert(format!("{}/{}", b.label, label), variant.content_hash());
        let alpha = b.basis.stress_map(&variant).alpha;
        let mut reports = Vec::with_capacity(cfg.t_grid.len());
        for &t in &cfg.t_grid {
            reports.push(error_likelihood(&variant, &b.params, &b.vth, &alpha, &guard, t)?);
        }
        error_rows(&mut csv, &label, &reports, guard.p_d, b.base_delay);
        tags_seen.push(label);
    }

    let gp = likelihood_plot(
        "error_likelihood.csv",
        &format!("Timing violations vs age ({})", b.label),
        &tags_seen,
    );
    staging.add_text("error_likelihood.csv", csv.into_string());
    staging.add_text("error_likelihood.gp", gp);
    Ok(())
}

/// Rewiring against the two reference trojans under one shared guard band.
fn baseline_compare(cfg: &ExperimentConfig, staging: &mut Staging, meta: &mut RunMeta) -> Result<()> {
    let b = Bench::new(cfg.arch()?, cfg.width)?;
    b.note_seeds(meta);
    let guard = b.guard_band(cfg, meta)?;
    let series = compare_attacks(
        &b.netlist,
        &InputProfile::Uniform,
        &b.params,
        &guard,
        &cfg.t_grid,
        cfg.guard_years,
    )?;
    let requested: Vec<String> = cfg.attack_tags()?.iter().map(|t| t.name()).collect();
    let mut csv = error_csv_header();
    let mut tags_seen = Vec::new();
    for s in &series {
        if !requested.contains(&s.tag) {
            continue;
        }
        meta.netlist_hashes
            .insert(format!("{}/{}", b.label, s.tag), s.netlist_hash.clone());
        error_rows(&mut csv, &s.tag, &s.reports, guard.p_d, b.base_delay);
        tags_seen.push(s.tag.clone());
    }

    let gp = likelihood_plot(
        "baseline_compare.csv",
        &format!("Attack comparison under one guard band ({})", b.label),
        &tags_seen,
    );
    staging.add_text("baseline_compare.csv", csv.into_string());
    staging.add_text("baseline_compare.gp", gp);
    Ok(())
}

/// Classifier accuracy against age when every multiply goes through the
/// latched fault tables of a (possibly tampered) multiplier.
fn inference_curve(cfg: &ExperimentConfig, staging: &mut Staging, meta: &mut RunMeta) -> Result<()> {
    let b = Bench::new(cfg.arch()?, cfg.width)?;
    b.note_seeds(meta);
    meta.seeds.insert("toy_dataset".into(), TOY_SEED);
    let guard = b.guard_band(cfg, meta)?;
    let model = ToyModel::shipped()?;
    let data = eval_dataset();
    let mut csv = Csv::new(&[
        "tag",
        "t_years",
        "correct",
        "total",
        "accuracy",
        "violating",
        "faulty_entries",
        "p_d",
        "base_delay",
    ]);
    let mut tags_seen = Vec::new();
    for tag in cfg.attack_tags()? {
        let (label, variant) = b.variant(&tag, cfg.guard_years)?;
        meta.netlist_hashes
            .insert(format!("{}/{}", b.label, label), variant.content_hash());
        let tables = build_fault_series(&variant, &b.params, &cfg.t_grid, &guard, Coverage::Exhaustive)?;
        let points = run_inference(&model, &data, &tables)?;
        for (table, point) in tables.iter().zip(&points) {
            let accuracy = point.accuracy();
            let faulty = table.faulty_entries();
            csv.row(&[
                &label,
                &point.t_years,
                &point.correct,
                &point.total,
                &accuracy,
                &table.violating,
                &faulty,
                &guard.p_d,
                &b.base_delay,
            ]);
        }
        for table in &tables {
            staging.add(
                format!("tables/{}_t{}.bin", tag.slug(), table.t_years),
                table.to_bytes()?,
            );
        }
        tags_seen.push(label);
    }

    let series: Vec<(String, String)> = tags_seen
        .iter()
        .map(|label| (format!("2:(strcol(1) eq '{label}' ? $5 : NaN)"), label.clone()))
        .collect();
    let gp = line_plot(
        "inference_curve.csv",
        &format!("Toy classifier accuracy vs multiplier age ({})", b.label),
        "years",
        "held-out accuracy",
        &series,
    );
    staging.add_text("inference_curve.csv", csv.into_string());
    staging.add_text("inference_curve.gp", gp);
    Ok(())
}
