use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis};

use crate::data::Samples;
use crate::error::{Error, Result};
use crate::par;

use super::arch::{ArchKind, LayerLayout, NetArch, WeightSnapshot};

/// Gradient of the mean loss over a set of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientRecord {
    pub mean_grad: Vec<f64>,
    /// `(1/S) Σ_s (1/M) |∇L_s − ∇L|²` when per-sample gradients were formed.
    pub per_sample_sq_dev: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
}

fn check(w: &[f64], arch: &NetArch, samples: &Samples<'_>) -> Result<()> {
    arch.validate()?;
    if w.len() != arch.num_params() {
        return Err(Error::DimensionMismatch {
            expected: arch.num_params(),
            got: w.len(),
        });
    }
    if samples.is_empty() {
        return Err(Error::InvalidParameter("empty batch".into()));
    }
    if samples.x.ncols() != arch.input_dim {
        return Err(Error::DimensionMismatch {
            expected: arch.input_dim,
            got: samples.x.ncols(),
        });
    }
    let classes = arch.num_classes();
    if let Some((index, &label)) = samples.y.iter().enumerate().find(|(_, &l)| l >= classes) {
        return Err(Error::LabelOutOfRange {
            index,
            label,
            classes,
        });
    }
    Ok(())
}

fn weights<'a>(w: &'a [f64], layer: &LayerLayout) -> ArrayView2<'a, f64> {
    ArrayView2::from_shape(
        (layer.outputs, layer.inputs),
        &w[layer.weight_offset..layer.bias_offset],
    )
    .expect("layout matches parameter vector")
}

fn bias<'a>(w: &'a [f64], layer: &LayerLayout) -> ArrayView1<'a, f64> {
    ArrayView1::from(&w[layer.bias_offset..layer.end()])
}

/// Hidden activations (post-ReLU) and output logits of one forward pass.
struct Pass {
    hidden: Vec<Array2<f64>>,
    logits: Array2<f64>,
}

fn forward_pass(w: &[f64], layers: &[LayerLayout], x: ArrayView2<'_, f64>) -> Pass {
    let mut hidden: Vec<Array2<f64>> = Vec::with_capacity(layers.len() - 1);
    let mut logits = None;
    for (l, layer) in layers.iter().enumerate() {
        let input = if l == 0 { x } else { hidden[l - 1].view() };
        let mut z = input.dot(&weights(w, layer).t());
        z += &bias(w, layer);
        if l + 1 < layers.len() {
            z.mapv_inplace(|v| v.max(0.0));
            hidden.push(z);
        } else {
            logits = Some(z);
        }
    }
    Pass {
        hidden,
        logits: logits.expect("at least one layer"),
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-sample loss, its derivative with respect to the logits (written into
/// `dlogits` when given), and whether the prediction is correct.
fn head(
    kind: ArchKind,
    logits: ArrayView1<'_, f64>,
    label: usize,
    dlogits: Option<ArrayViewMut1<'_, f64>>,
) -> (f64, bool) {
    match kind {
        ArchKind::ToyA => {
            let o = logits[0];
            let p = sigmoid(o);
            let y = label as f64;
            if let Some(mut d) = dlogits {
                d[0] = 2.0 * (p - y) * p * (1.0 - p);
            }
            ((p - y) * (p - y), usize::from(o > 0.0) == label)
        }
        ArchKind::FullyConnectedB => {
            let max = logits.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let sum: f64 = logits.iter().map(|&v| (v - max).exp()).sum();
            let lse = max + sum.ln();
            if let Some(mut d) = dlogits {
                for (k, (dk, &v)) in d.iter_mut().zip(logits.iter()).enumerate() {
                    *dk = (v - lse).exp() - if k == label { 1.0 } else { 0.0 };
                }
            }
            let argmax = logits
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
                .0;
            (lse - logits[label], argmax == label)
        }
    }
}

/// Mean loss over the batch and the per-sample losses.
pub fn forward_loss(
    w: &WeightSnapshot,
    arch: &NetArch,
    batch: Samples<'_>,
) -> Result<(f64, Vec<f64>)> {
    check(&w.w, arch, &batch)?;
    let pass = forward_pass(&w.w, &arch.layers(), batch.x);
    let losses: Vec<f64> = pass
        .logits
        .rows()
        .into_iter()
        .zip(batch.y)
        .map(|(row, &y)| head(arch.kind, row, y, None).0)
        .collect();
    let mean = losses.iter().sum::<f64>() / losses.len() as f64;
    Ok((mean, losses))
}

const EVAL_CHUNK: usize = 1024;

/// Mean loss and accuracy over `samples`, from the same forward pass.
pub fn evaluate(w: &WeightSnapshot, arch: &NetArch, samples: Samples<'_>) -> Result<Evaluation> {
    check(&w.w, arch, &samples)?;
    let layers = arch.layers();
    let chunks = samples.len().div_ceil(EVAL_CHUNK);
    let parts = par::map_indexed(chunks, |c| {
        let part = samples.slice(c * EVAL_CHUNK, ((c + 1) * EVAL_CHUNK).min(samples.len()));
        let pass = forward_pass(&w.w, &layers, part.x);
        pass.logits
            .rows()
            .into_iter()
            .zip(part.y)
            .fold((0.0, 0usize), |(loss, hits), (row, &y)| {
                let (l, ok) = head(arch.kind, row, y, None);
                (loss + l, hits + usize::from(ok))
            })
    });
    let (loss, hits) = parts
        .into_iter()
        .fold((0.0, 0), |(a, b), (l, h)| (a + l, b + h));
    let n = samples.len() as f64;
    Ok(Evaluation {
        loss: loss / n,
        accuracy: hits as f64 / n,
    })
}

/// Backpropagates the mean batch loss into `grad` (overwritten) and returns
/// the mean loss. The ReLU derivative at 0 is taken to be 0.
pub fn backward_into(
    w: &[f64],
    arch: &NetArch,
    batch: Samples<'_>,
    grad: &mut [f64],
) -> Result<f64> {
    check(w, arch, &batch)?;
    if grad.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            got: grad.len(),
        });
    }
    let layers = arch.layers();
    let pass = forward_pass(w, &layers, batch.x);
    let b = batch.len() as f64;
    let mut delta = Array2::<f64>::zeros(pass.logits.raw_dim());
    let mut loss = 0.0;
    for ((row, &y), d) in pass
        .logits
        .rows()
        .into_iter()
        .zip(batch.y)
        .zip(delta.rows_mut())
    {
        loss += head(arch.kind, row, y, Some(d)).0;
    }
    delta /= b;

    for (l, layer) in layers.iter().enumerate().rev() {
        let input = if l == 0 { batch.x } else { pass.hidden[l - 1].view() };
        let (gw, gb) = grad[layer.weight_offset..layer.end()].split_at_mut(layer.outputs * layer.inputs);
        let mut gw = ArrayViewMut2::from_shape((layer.outputs, layer.inputs), gw)
            .expect("layout matches gradient vector");
        general_mat_mul(1.0, &delta.t(), &input, 0.0, &mut gw);
        let db: Array1<f64> = delta.sum_axis(Axis(0));
        gb.copy_from_slice(db.as_slice().expect("contiguous"));
        if l > 0 {
            let mut back = delta.dot(&weights(w, layer));
            back.zip_mut_with(&pass.hidden[l - 1], |d, &a| {
                if a <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = back;
        }
    }
    Ok(loss / b)
}

/// Gradient of the mean batch loss with respect to every parameter.
pub fn backward(w: &WeightSnapshot, arch: &NetArch, batch: Samples<'_>) -> Result<GradientRecord> {
    let mut mean_grad = vec![0.0; w.w.len()];
    backward_into(&w.w, arch, batch, &mut mean_grad)?;
    Ok(GradientRecord {
        mean_grad,
        per_sample_sq_dev: None,
    })
}

/// Gradient of the loss of sample `index` alone.
pub fn per_sample_gradient(
    w: &WeightSnapshot,
    arch: &NetArch,
    samples: Samples<'_>,
    index: usize,
) -> Result<Vec<f64>> {
    if index >= samples.len() {
        return Err(Error::InvalidParameter(format!(
            "sample {index} out of range for {} samples",
            samples.len()
        )));
    }
    let mut g = vec![0.0; w.w.len()];
    backward_into(&w.w, arch, samples.slice(index, index + 1), &mut g)?;
    Ok(g)
}

const NOISE_CHUNKS: usize = 16;

/// Mean gradient and per-sample spread `(1/S) Σ_s (1/M)|∇L_s − ∇L|²` over
/// `samples`, forming every per-sample gradient once.
///
/// Deviations are accumulated relative to the first sample's gradient (the
/// shifted-data variance form), so identical samples give exactly zero.
pub fn gradient_statistics(
    w: &WeightSnapshot,
    arch: &NetArch,
    samples: Samples<'_>,
) -> Result<GradientRecord> {
    check(&w.w, arch, &samples)?;
    let m = w.w.len();
    let g0 = per_sample_gradient(w, arch, samples, 0)?;
    let ranges = par::balanced_ranges(samples.len(), NOISE_CHUNKS, |_| 1.0);
    let partials = par::map_indexed(ranges.len(), |c| -> Result<(Vec<f64>, f64)> {
        let mut sum = vec![0.0; m];
        let mut sq = 0.0;
        let mut g = vec![0.0; m];
        for s in ranges[c].clone() {
            backward_into(&w.w, arch, samples.slice(s, s + 1), &mut g)?;
            for ((acc, gi), g0i) in sum.iter_mut().zip(&g).zip(&g0) {
                let d = gi - g0i;
                *acc += d;
                sq += d * d;
            }
        }
        Ok((sum, sq))
    });
    let mut shift_sum = vec![0.0; m];
    let mut shift_sq = 0.0;
    for part in partials {
        let (sum, sq) = part?;
        shift_sq += sq;
        for (acc, v) in shift_sum.iter_mut().zip(&sum) {
            *acc += v;
        }
    }
    let n = samples.len() as f64;
    let mean_shift_sq: f64 = shift_sum.iter().map(|v| (v / n) * (v / n)).sum();
    let spread = ((shift_sq / n - mean_shift_sq) / m as f64).max(0.0);
    let mean_grad = shift_sum
        .iter()
        .zip(&g0)
        .map(|(s, g0i)| g0i + s / n)
        .collect();
    Ok(GradientRecord {
        mean_grad,
        per_sample_sq_dev: Some(spread),
    })
}

/// `w' = w − α ∇L`, advancing the iteration counter.
pub fn sgd_step(w: &WeightSnapshot, g: &GradientRecord, alpha: f64) -> Result<WeightSnapshot> {
    let mut next = w.clone();
    sgd_update(&mut next, &g.mean_grad, alpha)?;
    Ok(next)
}

pub(crate) fn sgd_update(w: &mut WeightSnapshot, grad: &[f64], alpha: f64) -> Result<()> {
    if grad.len() != w.w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.w.len(),
            got: grad.len(),
        });
    }
    let mut finite = true;
    for (wi, gi) in w.w.iter_mut().zip(grad) {
        *wi -= alpha * gi;
        finite &= wi.is_finite();
    }
    w.iteration += 1;
    if !finite {
        return Err(Error::Divergence {
            step: w.iteration,
            time: w.iteration as f64,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init_net;
    use ndarray::array;

    fn zeros(arch: &NetArch) -> WeightSnapshot {
        WeightSnapshot {
            w: vec![0.0; arch.num_params()],
            iteration: 0,
        }
    }

    #[test]
    fn toy_zero_weights_loss_is_a_quarter() {
        let arch = NetArch::toy_a(3, 4, 0);
        let x = array![[0.2, 0.9, 0.4]];
        let y = [1];
        let (mean, per) = forward_loss(&zeros(&arch), &arch, Samples { x: x.view(), y: &y }).unwrap();
        assert_eq!(mean, 0.25);
        assert_eq!(per, vec![0.25]);
    }

    #[test]
    fn softmax_zero_weights_loss_is_ln_10() {
        let arch = NetArch::fully_connected_b(5, 0);
        let x = array![[0.1, 0.2, 0.3, 0.4, 0.5], [1.0, 0.0, 1.0, 0.0, 1.0]];
        let y = [3, 9];
        let (mean, _) = forward_loss(&zeros(&arch), &arch, Samples { x: x.view(), y: &y }).unwrap();
        assert!((mean - 10f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn label_out_of_range() {
        let arch = NetArch::toy_a(2, 3, 0);
        let w = init_net(&arch).unwrap();
        let x = array![[0.1, 0.2], [0.3, 0.4]];
        let y = [0, 2];
        let err = forward_loss(&w, &arch, Samples { x: x.view(), y: &y }).unwrap_err();
        assert!(matches!(err, Error::LabelOutOfRange { index: 1, label: 2, classes: 2 }));
        assert!(backward(&w, &arch, Samples { x: x.view(), y: &y }).is_err());
    }

    #[test]
    fn saturated_sigmoid_has_vanishing_gradient() {
        let arch = NetArch::toy_a(2, 3, 0);
        let mut w = zeros(&arch);
        let out = arch.layers()[1];
        // Output bias alone drives the logit far positive.
        w.w[out.bias_offset] = 1e3;
        let x = array![[0.3, 0.7]];
        let y = [1];
        let g = backward(&w, &arch, Samples { x: x.view(), y: &y }).unwrap();
        let norm: f64 = g.mean_grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm < 1e-6);
    }

    #[test]
    fn duplicated_sample_has_same_gradient() {
        let arch = NetArch::fully_connected_b(3, 2);
        let w = init_net(&arch).unwrap();
        let one = array![[0.1, 0.5, 0.9]];
        let two = array![[0.1, 0.5, 0.9], [0.1, 0.5, 0.9]];
        let g1 = backward(&w, &arch, Samples { x: one.view(), y: &[4] }).unwrap();
        let g2 = backward(&w, &arch, Samples { x: two.view(), y: &[4, 4] }).unwrap();
        for (a, b) in g1.mean_grad.iter().zip(&g2.mean_grad) {
            assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn sgd_step_edge_cases() {
        let w = WeightSnapshot {
            w: vec![1.0, -2.0],
            iteration: 7,
        };
        let zero = GradientRecord {
            mean_grad: vec![0.0, 0.0],
            per_sample_sq_dev: None,
        };
        let next = sgd_step(&w, &zero, 0.1).unwrap();
        assert_eq!(next.w, w.w);
        assert_eq!(next.iteration, 8);

        let g = GradientRecord {
            mean_grad: vec![3.0, 4.0],
            per_sample_sq_dev: None,
        };
        assert_eq!(sgd_step(&w, &g, 0.0).unwrap().w, w.w);

        // Quadratic L = ½|w|² has ∇L = w, so one step scales w by (1 − α).
        let quad = GradientRecord {
            mean_grad: w.w.clone(),
            per_sample_sq_dev: None,
        };
        assert_eq!(sgd_step(&w, &quad, 0.25).unwrap().w, vec![0.75, -1.5]);

        let inf = GradientRecord {
            mean_grad: vec![f64::INFINITY, 0.0],
            per_sample_sq_dev: None,
        };
        assert!(matches!(
            sgd_step(&w, &inf, 0.1),
            Err(Error::Divergence { step: 8, .. })
        ));
    }

    #[test]
    fn evaluation_matches_forward_loss() {
        let arch = NetArch::fully_connected_b(4, 1);
        let w = init_net(&arch).unwrap();
        let data = crate::data::gen_synthetic(3000, 4, crate::data::LabelMode::Separable, 1).unwrap();
        let eval = evaluate(&w, &arch, data.samples()).unwrap();
        let (mean, _) = forward_loss(&w, &arch, data.samples()).unwrap();
        assert!((eval.loss - mean).abs() < 1e-12 * mean);
        assert!((0.0..=1.0).contains(&eval.accuracy));
    }
}
