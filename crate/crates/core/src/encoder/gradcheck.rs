//! Finite-difference verification of the analytic gradient.

use rand::seq::index::sample;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::PairScorerModel;
use super::train::Example;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_relative_error: f64,
    pub max_absolute_error: f64,
}

/// Relative error `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares the analytic loss gradient of one example against central
/// differences `(L(θ+ε) - L(θ-ε)) / 2ε` on `samples` parameters drawn
/// without replacement. Embedding entries are drawn only from rows of tokens
/// present in the example; other rows have an identically zero gradient.
pub fn grad_check(
    model: &PairScorerModel,
    example: &Example,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<GradCheckReport> {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let class = example.label.class_index();
    let mut grad = model.zero_gradient();
    model.accumulate_gradient(&example.post, &example.question, class, &mut grad)?;

    let d = model.dims();
    let emb_len = d.vocab * d.embed;
    let mut candidates: Vec<usize> = Vec::new();
    let mut rows: Vec<u32> = example.post.iter().chain(&example.question).copied().collect();
    rows.sort_unstable();
    rows.dedup();
    for r in rows {
        let start = r as usize * d.embed;
        candidates.extend(start..start + d.embed);
    }
    candidates.extend(emb_len..model.param_count());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = sample(&mut rng, candidates.len(), samples.min(candidates.len()));

    let mut probe = model.clone();
    let mut report = GradCheckReport {
        checked: 0,
        max_relative_error: 0.0,
        max_absolute_error: 0.0,
    };
    for i in picked.iter() {
        let idx = candidates[i];
        let orig = probe.params()[idx];
        probe.params_mut()[idx] = orig + epsilon;
        let up = probe.loss(&example.post, &example.question, class)?;
        probe.params_mut()[idx] = orig - epsilon;
        let down = probe.loss(&example.post, &example.question, class)?;
        probe.params_mut()[idx] = orig;
        let numeric = (up - down) / (2.0 * epsilon);
        let analytic = grad.get(idx);
        report.checked += 1;
        report.max_relative_error = report.max_relative_error.max(relative_error(analytic, numeric));
        report.max_absolute_error = report.max_absolute_error.max((analytic - numeric).abs());
    }
    Ok(report)
}
