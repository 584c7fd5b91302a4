//! Desk-scale classifier whose multiplies run on the aged hardware.
//!
//! The model is a two-layer tanh perceptron with frozen, shipped weights.
//! Every multiply in its forward pass is an 8-bit-significand float multiply
//! that can be routed through a fault table; sums, biases and activations
//! stay in f64, so any accuracy movement is attributable to the multiplier
//! alone. Products that underflow the reduced format flush to zero, matching
//! the hardware's behaviour.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::fault::FaultTable;
use crate::fp::{faulty_multiply_fp, reference_multiply, FpNumber, FpProduct};
use crate::rng;

pub const FRAC_BITS: u8 = 7;

/// Canonical seed of the shipped synthetic dataset.
pub const TOY_SEED: u64 = 0x544f_5931;
const MEAN_INDEX_BASE: u64 = 0xAAAA_0000;
const EVAL_INDEX_BASE: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f32>>,
    pub labels: Vec<u8>,
    pub n_features: usize,
    pub n_classes: usize,
}

/// Gaussian class blobs in 16 dimensions, 4 classes. Class means come from
/// the seed alone, so differently indexed splits share the same geometry.
pub fn synthetic_blobs(seed: u64, n_per_class: usize, index_base: u64) -> Dataset {
    let n_features = 16;
    let n_classes = 4;
    let noise = Normal::new(0.0, 1.0).unwrap();
    let unit = Normal::new(0.0, 1.0).unwrap();
    let means: Vec<Vec<f64>> = (0..n_classes)
        .map(|c| {
            let mut r = rng::stream(seed, rng::tag::DATASET, MEAN_INDEX_BASE + c as u64);
            (0..n_features).map(|_| unit.sample(&mut r)).collect()
        })
        .collect();
    let mut features = Vec::with_capacity(n_classes * n_per_class);
    let mut labels = Vec::with_capacity(n_classes * n_per_class);
    for (c, mean) in means.iter().enumerate() {
        for i in 0..n_per_class {
            let idx = index_base + (c * n_per_class + i) as u64;
            let mut r = rng::stream(seed, rng::tag::DATASET, idx);
            features.push(mean.iter().map(|m| (m + noise.sample(&mut r)) as f32).collect());
            labels.push(c as u8);
        }
    }
    Dataset { features, labels, n_features, n_classes }
}

/// The 400-sample split the frozen weights were fitted on.
pub fn train_dataset() -> Dataset {
    synthetic_blobs(TOY_SEED, 100, 0)
}

/// The held-out 400-sample split every accuracy figure uses.
pub fn eval_dataset() -> Dataset {
    synthetic_blobs(TOY_SEED, 100, EVAL_INDEX_BASE)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyModel {
    pub n_features: usize,
    pub hidden: usize,
    pub n_classes: usize,
    pub w1: Vec<Vec<f32>>,
    pub b1: Vec<f32>,
    pub w2: Vec<Vec<f32>>,
    pub b2: Vec<f32>,
}

impl ToyModel {
    pub fn validate(&self) -> Result<()> {
        let shape_ok = self.w1.len() == self.hidden
            && self.w1.iter().all(|row| row.len() == self.n_features)
            && self.b1.len() == self.hidden
            && self.w2.len() == self.n_classes
            && self.w2.iter().all(|row| row.len() == self.hidden)
            && self.b2.len() == self.n_classes;
        if !shape_ok {
            return Err(CoreError::Inference("weight shapes disagree with declared dims".into()));
        }
        let finite = |xs: &[f32]| xs.iter().all(|x| x.is_finite());
        if !(self.w1.iter().all(|r| finite(r))
            && self.w2.iter().all(|r| finite(r))
            && finite(&self.b1)
            && finite(&self.b2))
        {
            return Err(CoreError::Inference("non-finite weight".into()));
        }
        Ok(())
    }

    /// The weights shipped with the library.
    pub fn shipped() -> Result<ToyModel> {
        let model: ToyModel = serde_json::from_str(include_str!("../assets/toy_model.json"))
            .map_err(|e| CoreError::Inference(format!("shipped weights unreadable: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

/// Which hardware executes significand products.
#[derive(Clone, Copy)]
pub enum Multiplier<'a> {
    Exact,
    Faulty(&'a FaultTable),
}

impl Multiplier<'_> {
    fn apply(&self, p: &FpNumber, q: &FpNumber) -> Result<FpProduct> {
        match self {
            Multiplier::Exact => reference_multiply(p, q),
            Multiplier::Faulty(table) => faulty_multiply_fp(p, q, table),
        }
    }
}

fn dot(weights: &[f32], inputs: &[FpNumber], mul: Multiplier) -> Result<f64> {
    let mut acc = 0.0f64;
    for (w, x) in weights.iter().zip(inputs) {
        let wn = FpNumber::from_f32(*w, FRAC_BITS)?;
        acc += mul.apply(&wn, x)?.value.to_f64();
    }
    Ok(acc)
}

/// Class scores for one sample; every multiply goes through `mul`.
pub fn forward(model: &ToyModel, x: &[f32], mul: Multiplier) -> Result<Vec<f64>> {
    if x.len() != model.n_features {
        return Err(CoreError::Inference(format!(
            "sample has {} features, model wants {}",
            x.len(),
            model.n_features
        )));
    }
    let xs: Vec<FpNumber> =
        x.iter().map(|v| FpNumber::from_f32(*v, FRAC_BITS)).collect::<Result<_>>()?;
    let mut hidden = Vec::with_capacity(model.hidden);
    for (row, b) in model.w1.iter().zip(&model.b1) {
        let h = (dot(row, &xs, mul)? + *b as f64).tanh();
        hidden.push(FpNumber::from_f64(h, FRAC_BITS)?);
    }
    let mut logits = Vec::with_capacity(model.n_classes);
    for (row, b) in model.w2.iter().zip(&model.b2) {
        logits.push(dot(row, &hidden, mul)? + *b as f64);
    }
    Ok(logits)
}

fn argmax(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in logits.iter().enumerate() {
        if *v > logits[best] {
            best = i;
        }
    }
    best
}

/// Correct predictions over a dataset, parallel over samples.
pub fn evaluate(model: &ToyModel, data: &Dataset, mul: Multiplier) -> Result<u64> {
    model.validate()?;
    if data.n_features != model.n_features || data.n_classes != model.n_classes {
        return Err(CoreError::Inference("dataset dims disagree with model".into()));
    }
    let hits: Vec<Result<bool>> = data
        .features
        .par_iter()
        .zip(data.labels.par_iter())
        .map(|(x, label)| Ok(argmax(&forward(model, x, mul)?) == *label as usize))
        .collect();
    let mut correct = 0u64;
    for h in hits {
        correct += h? as u64;
    }
    Ok(correct)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyPoint {
    pub t_years: f64,
    pub correct: u64,
    pub total: u64,
}

impl AccuracyPoint {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

/// Accuracy against each table in the series, in series order.
pub fn run_inference(
    model: &ToyModel,
    data: &Dataset,
    tables: &[FaultTable],
) -> Result<Vec<AccuracyPoint>> {
    tables
        .iter()
        .map(|table| {
            Ok(AccuracyPoint {
                t_years: table.t_years,
                correct: evaluate(model, data, Multiplier::Faulty(table))?,
                total: data.features.len() as u64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activity::InputProfile;
    use crate::aging::AgingParams;
    use crate::attack::{build_config, PathScope};
    use crate::circuit::build_array_multiplier;
    use crate::fault::{build_fault_series, Coverage};
    use crate::runtime;
    use crate::timing::{compute_guard_band, StimulusMode};

    #[test]
    fn blobs_are_deterministic_and_split_correctly() {
        let a = eval_dataset();
        let b = eval_dataset();
        assert_eq!(a, b);
        assert_eq!(a.features.len(), 400);
        assert_eq!(a.labels.iter().filter(|&&l| l == 2).count(), 100);
        let train = train_dataset();
        assert_ne!(train.features, a.features, "splits must not overlap");
        assert!(a.features.iter().flatten().all(|v| v.is_finite() && v.abs() < 16.0));
    }

    #[test]
    fn shipped_model_reproduces_pinned_accuracy() {
        let model = ToyModel::shipped().unwrap();
        let correct = evaluate(&model, &eval_dataset(), Multiplier::Exact).unwrap();
        assert_eq!(correct, PINNED_CLEAN_CORRECT);
        let on_train = evaluate(&model, &train_dataset(), Multiplier::Exact).unwrap();
        assert_eq!(on_train, PINNED_TRAIN_CORRECT);
    }

    /// Held-out / train correct counts of the frozen weights; regenerate
    /// with the train_toy_model example if the weights ever change.
    const PINNED_CLEAN_CORRECT: u64 = 389;
    const PINNED_TRAIN_CORRECT: u64 = 400;

    #[test]
    fn clean_tables_do_not_move_accuracy() {
        let params = AgingParams::default();
        let n = build_array_multiplier(8).unwrap();
        let guard = compute_guard_band(&n, &params, 4.0, StimulusMode::Exhaustive).unwrap();
        let tables =
            build_fault_series(&n, &params, &[0.0, 4.0], &guard, Coverage::Exhaustive).unwrap();
        assert!(tables.iter().all(|t| t.faulty_entries() == 0));
        let model = ToyModel::shipped().unwrap();
        let data = eval_dataset();
        let clean = evaluate(&model, &data, Multiplier::Exact).unwrap();
        let series = run_inference(&model, &data, &tables).unwrap();
        for point in &series {
            assert_eq!(point.correct, clean);
            assert_eq!(point.total, 400);
        }
        // Empty table, identical computation: logits agree bitwise.
        for x in data.features.iter().take(8) {
            assert_eq!(
                forward(&model, x, Multiplier::Exact).unwrap(),
                forward(&model, x, Multiplier::Faulty(&tables[1])).unwrap()
            );
        }
    }

    #[test]
    fn aged_tampered_tables_flip_predictions() {
        let params = AgingParams::default();
        let n = build_array_multiplier(8).unwrap();
        let plan =
            build_config(&n, &InputProfile::Uniform, &params, PathScope::All, 100, 4.0).unwrap();
        let t = plan.apply(&n).unwrap();
        let guard = compute_guard_band(&n, &params, 4.0, StimulusMode::Exhaustive).unwrap();
        let tables =
            build_fault_series(&t, &params, &[0.0, 4.0], &guard, Coverage::Exhaustive).unwrap();
        let model = ToyModel::shipped().unwrap();
        let data = eval_dataset();
        let series = run_inference(&model, &data, &tables).unwrap();
        assert_eq!(series[0].correct, PINNED_CLEAN_CORRECT);
        assert!(
            series[1].correct < series[0].correct,
            "4-year fully tampered table left accuracy at {}",
            series[1].correct
        );
    }

    #[test]
    fn evaluation_is_thread_count_invariant() {
        let model = ToyModel::shipped().unwrap();
        let data = eval_dataset();
        let one = runtime::run(Some(1), || evaluate(&model, &data, Multiplier::Exact)).unwrap();
        let four = runtime::run(Some(4), || evaluate(&model, &data, Multiplier::Exact)).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let model = ToyModel::shipped().unwrap();
        let mut bad = model.clone();
        bad.b1.pop();
        assert!(bad.validate().is_err());
        let mut tiny = eval_dataset();
        tiny.n_features = 3;
        assert!(evaluate(&model, &tiny, Multiplier::Exact).is_err());
        assert!(forward(&model, &[0.0; 4], Multiplier::Exact).is_err());
    }
}
