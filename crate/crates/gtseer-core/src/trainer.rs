//! Joint SGD over the embedding and preference objectives: per check-in,
//! one context update plus h negative updates per window position, then the
//! variant-specific preference-pair updates. Single-threaded training is
//! deterministic given the seed; the lock-free parallel driver in the
//! companion crate reuses `TrainContext::train_sequence`.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checkin::{Dataset, DaySequence, TemporalState};
use crate::model::{self, HyperParams, ModelParams};
#[cfg(test)]
use crate::model::Variant;
use crate::sampling::{self, NoiseTable, SampleError};

/// Divergence guard: abort when any parameter entry exceeds this magnitude.
pub const DIVERGENCE_BOUND: f64 = 1e6;

const NOISE_POWER: f64 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    EmptyDataset,
    Hyper(model::HyperError),
    Sample(SampleError),
    /// Non-finite or exploding parameters detected after an epoch.
    Diverged { epoch: usize },
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::EmptyDataset => write!(f, "training dataset has no sequences"),
            TrainError::Hyper(e) => write!(f, "invalid hyperparameters: {e}"),
            TrainError::Sample(e) => write!(f, "sampling failed: {e}"),
            TrainError::Diverged { epoch } => {
                write!(f, "parameters diverged during epoch {epoch}")
            }
        }
    }
}

impl From<SampleError> for TrainError {
    fn from(e: SampleError) -> Self {
        TrainError::Sample(e)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UpdateCounts {
    pub context: u64,
    pub negative: u64,
    pub preference: u64,
}

impl UpdateCounts {
    pub fn merge(&mut self, other: &UpdateCounts) {
        self.context += other.context;
        self.negative += other.negative;
        self.preference += other.preference;
    }
}

/// Training summary: per-epoch sampled-objective estimates and raw update
/// counts. `wall_secs` is filled in by callers that can read a clock.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub epoch_objective: Vec<f64>,
    pub counts: UpdateCounts,
    pub wall_secs: f64,
}

/// One skip-gram context step: with
/// g = 1 - sigma(l'_c . l_i + l'_c . t_s),
/// l_i += a g l'_c; t_s += a g l'_c; l'_c += a g (l_i + t_s),
/// all right-hand sides read PRE-update values. With `state` absent the
/// temporal terms vanish and t stays frozen. Returns log sigma of the
/// pre-update logit for objective tracking.
pub fn context_update(
    params: &mut ModelParams,
    target: usize,
    context: usize,
    state: Option<TemporalState>,
    alpha: f64,
) -> f64 {
    embedding_step(params, target, context, state, alpha, true)
}

/// One negative-sample step: with q = sigma(l'_k . l_i + l'_k . t_s),
/// l_i -= a q l'_k; t_s -= a q l'_k; l'_k -= a q (l_i + t_s), pre-update
/// values on the right. Returns log sigma(-logit).
pub fn negative_update(
    params: &mut ModelParams,
    target: usize,
    negative: usize,
    state: Option<TemporalState>,
    alpha: f64,
) -> f64 {
    embedding_step(params, target, negative, state, alpha, false)
}

fn embedding_step(
    params: &mut ModelParams,
    target: usize,
    out_poi: usize,
    state: Option<TemporalState>,
    alpha: f64,
    positive: bool,
) -> f64 {
    let d = params.dim;
    let ti = target * d;
    let oc = out_poi * d;
    let ts = state.map(|s| s.index() * d);

    let mut logit = 0.0;
    for j in 0..d {
        let mut x = params.poi_in[ti + j];
        if let Some(ts) = ts {
            x += params.temporal[ts + j];
        }
        logit += params.poi_out[oc + j] * x;
    }
    // Ascending gradient of log sigma(logit) (positive) or log sigma(-logit).
    let coef = if positive {
        alpha * (1.0 - model::sigmoid(logit))
    } else {
        -alpha * model::sigmoid(logit)
    };
    for j in 0..d {
        let out_pre = params.poi_out[oc + j];
        let in_pre = params.poi_in[ti + j];
        let t_pre = ts.map_or(0.0, |ts| params.temporal[ts + j]);
        params.poi_out[oc + j] = out_pre + coef * (in_pre + t_pre);
        params.poi_in[ti + j] = in_pre + coef * out_pre;
        if let Some(ts) = ts {
            params.temporal[ts + j] = t_pre + coef * out_pre;
        }
    }
    if positive {
        model::log_sigmoid(logit)
    } else {
        model::log_sigmoid(-logit)
    }
}

/// One pairwise ranking step: with delta = 1 - sigma(u.l_i - u.l_n),
/// u += b delta (l_i - l_n); l_i += b delta u; l_n -= b delta u, pre-update
/// values on the right. Returns log sigma of the pre-update score
/// difference.
pub fn preference_update(
    params: &mut ModelParams,
    user: usize,
    preferred: usize,
    dominated: usize,
    beta: f64,
) -> f64 {
    debug_assert_ne!(preferred, dominated);
    let d = params.dim;
    let u0 = user * d;
    let i0 = preferred * d;
    let n0 = dominated * d;

    let mut diff = 0.0;
    for j in 0..d {
        diff += params.users[u0 + j] * (params.poi_in[i0 + j] - params.poi_in[n0 + j]);
    }
    let coef = beta * (1.0 - model::sigmoid(diff));
    for j in 0..d {
        let u_pre = params.users[u0 + j];
        let li_pre = params.poi_in[i0 + j];
        let ln_pre = params.poi_in[n0 + j];
        params.users[u0 + j] = u_pre + coef * (li_pre - ln_pre);
        params.poi_in[i0 + j] = li_pre + coef * u_pre;
        params.poi_in[n0 + j] = ln_pre - coef * u_pre;
    }
    model::log_sigmoid(diff)
}

/// Immutable per-run training state shared by the sequential and parallel
/// drivers.
pub struct TrainContext<'a> {
    pub dataset: &'a Dataset,
    pub hyper: &'a HyperParams,
    noise: NoiseTable,
    checked: Vec<Vec<bool>>,
}

impl<'a> TrainContext<'a> {
    pub fn new(dataset: &'a Dataset, hyper: &'a HyperParams) -> Result<Self, TrainError> {
        hyper.validate().map_err(TrainError::Hyper)?;
        if dataset.sequences.is_empty() {
            return Err(TrainError::EmptyDataset);
        }
        let noise = NoiseTable::from_counts(&dataset.checkin_counts, NOISE_POWER)?;
        Ok(TrainContext {
            dataset,
            hyper,
            noise,
            checked: dataset.user_checked_sets(),
        })
    }

    pub fn noise_table(&self) -> &NoiseTable {
        &self.noise
    }

    /// One pass over a single sequence: embedding phase then preference
    /// phase for each check-in, in order. Returns the accumulated weighted
    /// objective contribution of the visited terms.
    pub fn train_sequence(
        &self,
        params: &mut ModelParams,
        sequence: &DaySequence,
        rng: &mut impl Rng,
        counts: &mut UpdateCounts,
    ) -> Result<f64, TrainError> {
        let hyper = self.hyper;
        let state = hyper.variant.uses_temporal().then_some(sequence.state);
        let pois = &sequence.pois;
        let mut objective = 0.0;

        for i in 0..pois.len() {
            let target = pois[i];

            if hyper.alpha > 0.0 {
                let lo = i.saturating_sub(hyper.window);
                let hi = (i + hyper.window).min(pois.len() - 1);
                for c in lo..=hi {
                    if c == i {
                        continue;
                    }
                    objective += hyper.alpha
                        * context_update(params, target, pois[c], state, hyper.alpha);
                    counts.context += 1;
                    let negatives = sampling::sample_embedding_negatives(
                        pois,
                        hyper.negatives,
                        &self.noise,
                        rng,
                    )?;
                    for neg in negatives {
                        objective += hyper.alpha
                            * negative_update(params, target, neg, state, hyper.alpha);
                        counts.negative += 1;
                    }
                }
            }

            if hyper.beta > 0.0 {
                let candidates = sampling::sample_preference_candidates(
                    &self.checked[sequence.user],
                    hyper.candidates,
                    rng,
                )?;
                let tuples = sampling::build_preference_pairs(
                    sequence.user,
                    target,
                    &candidates,
                    hyper.variant,
                    hyper.distance_km,
                    &self.dataset.poi_coords,
                );
                for t in tuples {
                    objective += hyper.beta
                        * preference_update(params, t.user, t.preferred, t.dominated, hyper.beta);
                    counts.preference += 1;
                }
            }
        }
        Ok(objective)
    }
}

/// The parameter initialization `train` starts from; reproducible from the
/// seed alone.
pub fn initial_params(dataset: &Dataset, hyper: &HyperParams) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    model::init_params(dataset.n_users(), dataset.n_pois(), hyper.dim, &mut rng)
}

/// Deterministic single-threaded training: per epoch, sequences are visited
/// in a seeded shuffled order. Identical seed and config produce
/// bit-identical parameters.
pub fn train(dataset: &Dataset, hyper: &HyperParams) -> Result<(ModelParams, TrainReport), TrainError> {
    let ctx = TrainContext::new(dataset, hyper)?;
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut params = model::init_params(dataset.n_users(), dataset.n_pois(), hyper.dim, &mut rng);

    let mut report = TrainReport::default();
    let mut order: Vec<usize> = (0..dataset.sequences.len()).collect();
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut epoch_objective = 0.0;
        for &s in &order {
            epoch_objective += ctx.train_sequence(
                &mut params,
                &dataset.sequences[s],
                &mut rng,
                &mut report.counts,
            )?;
        }
        if !params.entries_within(DIVERGENCE_BOUND) {
            return Err(TrainError::Diverged { epoch });
        }
        report.epoch_objective.push(epoch_objective);
        report.epochs_run = epoch + 1;
    }
    Ok((params, report))
}
