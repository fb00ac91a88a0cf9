//! Lock-free multi-threaded SGD in the hogwild style: all threads update
//! the shared parameter matrices without synchronization. Races between
//! sparse updates are tolerated and show up only as run-to-run numeric
//! jitter, so parallel runs are NOT reproducible across invocations with
//! the same seed. Use a single thread when bit-identical output matters.

use std::cell::UnsafeCell;
use std::time::Instant;

use gtseer_core::checkin::Dataset;
use gtseer_core::model::{HyperParams, ModelParams};
use gtseer_core::trainer::{
    initial_params, TrainContext, TrainError, TrainReport, UpdateCounts, DIVERGENCE_BOUND,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct SharedParams(UnsafeCell<ModelParams>);

// Data races on f64 entries are accepted by construction; every thread only
// reads and writes plain finite floats, so torn updates degrade the step,
// never memory safety of anything but the values themselves.
unsafe impl Sync for SharedParams {}

/// Multi-threaded counterpart of `gtseer_core::trainer::train`. With
/// `threads == 1` it matches the sequential trainer bit for bit.
pub fn train_parallel(
    dataset: &Dataset,
    hyper: &HyperParams,
    threads: usize,
) -> Result<(ModelParams, TrainReport), TrainError> {
    if threads <= 1 {
        let start = Instant::now();
        let (params, mut report) = gtseer_core::trainer::train(dataset, hyper)?;
        report.wall_secs = start.elapsed().as_secs_f64();
        return Ok((params, report));
    }

    let ctx = TrainContext::new(dataset, hyper)?;
    let start = Instant::now();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let shared = SharedParams(UnsafeCell::new(initial_params(dataset, hyper)));

    let mut report = TrainReport::default();
    let mut order: Vec<usize> = (0..dataset.sequences.len()).collect();
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut shuffle_rng);
        let chunk = order.len().div_ceil(threads);
        let epoch_results: Vec<Result<(f64, UpdateCounts), TrainError>> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = order
                    .chunks(chunk)
                    .enumerate()
                    .map(|(tid, slice)| {
                        let ctx = &ctx;
                        let shared = &shared;
                        scope.spawn(move || {
                            let mut rng = ChaCha8Rng::seed_from_u64(
                                hyper.seed ^ (epoch as u64).wrapping_mul(0x9e3779b97f4a7c15)
                                    ^ (tid as u64 + 1).wrapping_mul(0xd1342543de82ef95),
                            );
                            let mut objective = 0.0;
                            let mut counts = UpdateCounts::default();
                            for &s in slice {
                                // Safety: see SharedParams. Threads mutate
                                // disjoint-in-expectation sparse rows; races
                                // are tolerated.
                                let params = unsafe { &mut *shared.0.get() };
                                objective += ctx.train_sequence(
                                    params,
                                    &ctx.dataset.sequences[s],
                                    &mut rng,
                                    &mut counts,
                                )?;
                            }
                            Ok((objective, counts))
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().unwrap()).collect()
            });

        let mut epoch_objective = 0.0;
        for r in epoch_results {
            let (obj, counts) = r?;
            epoch_objective += obj;
            report.counts.merge(&counts);
        }
        report.epoch_objective.push(epoch_objective);
        report.epochs_run = epoch + 1;

        let params = unsafe { &*shared.0.get() };
        if !params.entries_within(DIVERGENCE_BOUND) {
            return Err(TrainError::Diverged { epoch });
        }
    }

    report.wall_secs = start.elapsed().as_secs_f64();
    Ok((shared.0.into_inner(), report))
}
