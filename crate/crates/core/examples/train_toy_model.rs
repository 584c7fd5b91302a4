//! Refits the shipped toy classifier and rewrites its weights asset.
//!
//! Run only when the dataset or architecture changes; the committed asset is
//! the source of truth and the pinned accuracy tests break if it moves.

use std::path::Path;

use agewire_core::inference::{
    evaluate, eval_dataset, train_dataset, Multiplier, ToyModel, TOY_SEED,
};
use agewire_core::rng;
use rand_distr::{Distribution, Normal};

fn main() {
    let train = train_dataset();
    let eval = eval_dataset();
    let (nf, nh, nc) = (train.n_features, 12usize, train.n_classes);

    let mut r = rng::stream(TOY_SEED, rng::tag::DATASET, 0xBEEF);
    let init = |fan_in: usize| {
        let d = Normal::new(0.0, 1.0 / (fan_in as f64).sqrt()).unwrap();
        move |r: &mut rand_chacha::ChaCha8Rng| d.sample(r)
    };
    let draw1 = init(nf);
    let draw2 = init(nh);
    let mut w1: Vec<Vec<f64>> = (0..nh).map(|_| (0..nf).map(|_| draw1(&mut r)).collect()).collect();
    let mut b1 = vec![0.0f64; nh];
    let mut w2: Vec<Vec<f64>> = (0..nc).map(|_| (0..nh).map(|_| draw2(&mut r)).collect()).collect();
    let mut b2 = vec![0.0f64; nc];

    let epochs = 400;
    for epoch in 0..epochs {
        let lr = 0.08 * (1.0 - epoch as f64 / epochs as f64) + 0.005;
        let mut loss = 0.0;
        for (x, &label) in train.features.iter().zip(&train.labels) {
            let x: Vec<f64> = x.iter().map(|v| *v as f64).collect();
            let mut pre = vec![0.0f64; nh];
            let mut h = vec![0.0f64; nh];
            for i in 0..nh {
                pre[i] = w1[i].iter().zip(&x).map(|(w, v)| w * v).sum::<f64>() + b1[i];
                h[i] = pre[i].tanh();
            }
            let mut logits = vec![0.0f64; nc];
            for k in 0..nc {
                logits[k] = w2[k].iter().zip(&h).map(|(w, v)| w * v).sum::<f64>() + b2[k];
            }
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
            let z: f64 = exps.iter().sum();
            let probs: Vec<f64> = exps.iter().map(|e| e / z).collect();
            loss -= probs[label as usize].ln();

            let dlogits: Vec<f64> = (0..nc)
                .map(|k| probs[k] - (k == label as usize) as u8 as f64)
                .collect();
            let mut dh = vec![0.0f64; nh];
            for k in 0..nc {
                for i in 0..nh {
                    dh[i] += dlogits[k] * w2[k][i];
                    w2[k][i] -= lr * dlogits[k] * h[i];
                }
                b2[k] -= lr * dlogits[k];
            }
            for i in 0..nh {
                let dpre = dh[i] * (1.0 - h[i] * h[i]);
                for j in 0..nf {
                    w1[i][j] -= lr * dpre * x[j];
                }
                b1[i] -= lr * dpre;
            }
        }
        if epoch % 50 == 0 || epoch == epochs - 1 {
            println!("epoch {epoch}: loss {:.4}", loss / train.features.len() as f64);
        }
    }

    let model = ToyModel {
        n_features: nf,
        hidden: nh,
        n_classes: nc,
        w1: w1.iter().map(|row| row.iter().map(|v| *v as f32).collect()).collect(),
        b1: b1.iter().map(|v| *v as f32).collect(),
        w2: w2.iter().map(|row| row.iter().map(|v| *v as f32).collect()).collect(),
        b2: b2.iter().map(|v| *v as f32).collect(),
    };
    model.validate().unwrap();

    let on_train = evaluate(&model, &train, Multiplier::Exact).unwrap();
    let on_eval = evaluate(&model, &eval, Multiplier::Exact).unwrap();
    println!("reduced-precision correct: train {on_train}/400, eval {on_eval}/400");

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/toy_model.json");
    std::fs::write(&path, model.to_json()).unwrap();
    println!("wrote {}", path.display());
}
