//! Top-N recommendation, P@N / R@N, the evaluation protocol, and reference
//! baseline scorers.

use alloc::vec::Vec;
use core::fmt;

use crate::checkin::{Dataset, TemporalState};
use crate::model::{ModelParams, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalError {
    EmptyCandidatePool { user: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::EmptyCandidatePool { user } => {
                write!(f, "no candidate POIs left for user index {user}")
            }
        }
    }
}

/// Anything that can score a (user, temporal state, POI) triple. Evaluation
/// is generic over this so baselines plug into the same protocol.
pub trait Scorer {
    fn score(&self, user: usize, state: TemporalState, poi: usize) -> f64;
}

/// Scores with the trained model: inner-product preference score for the
/// plain variant, temporal preference score otherwise.
pub struct ModelScorer<'a> {
    pub params: &'a ModelParams,
    pub variant: Variant,
}

impl Scorer for ModelScorer<'_> {
    fn score(&self, user: usize, state: TemporalState, poi: usize) -> f64 {
        if self.variant.uses_temporal() {
            self.params.temporal_preference_score(user, state, poi)
        } else {
            self.params.preference_score(user, poi)
        }
    }
}

/// Global train-set check-in count, identical for every user.
pub struct PopularityScorer {
    pub counts: Vec<u64>,
}

impl Scorer for PopularityScorer {
    fn score(&self, _user: usize, _state: TemporalState, poi: usize) -> f64 {
        self.counts[poi] as f64
    }
}

/// Seeded uniform scores; a pure function of (seed, user, poi).
pub struct RandomScorer {
    pub seed: u64,
}

impl Scorer for RandomScorer {
    fn score(&self, user: usize, _state: TemporalState, poi: usize) -> f64 {
        let mut x = self
            .seed
            .wrapping_mul(0x9e3779b97f4a7c15)
            .wrapping_add((user as u64).wrapping_mul(0xd1342543de82ef95))
            .wrapping_add((poi as u64).wrapping_mul(0x2545f4914f6cdd1d));
        // splitmix64 finalizer
        x ^= x >> 30;
        x = x.wrapping_mul(0xbf58476d1ce4e5b9);
        x ^= x >> 27;
        x = x.wrapping_mul(0x94d049bb133111eb);
        x ^= x >> 31;
        (x >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// A ranked top-N list with aligned scores; never contains excluded POIs or
/// duplicates, scores nonincreasing, ties broken by ascending POI index.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationList {
    pub user: usize,
    pub state: TemporalState,
    pub pois: Vec<usize>,
    pub scores: Vec<f64>,
}

/// Scores every non-excluded POI and returns the top `n` (clipped to the
/// candidate pool size).
pub fn recommend_top_n(
    scorer: &impl Scorer,
    user: usize,
    state: TemporalState,
    n: usize,
    exclude: &[bool],
) -> Result<RecommendationList, EvalError> {
    let mut scored: Vec<(usize, f64)> = (0..exclude.len())
        .filter(|&p| !exclude[p])
        .map(|p| (p, scorer.score(user, state, p)))
        .collect();
    if scored.is_empty() {
        return Err(EvalError::EmptyCandidatePool { user });
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(n);
    Ok(RecommendationList {
        user,
        state,
        pois: scored.iter().map(|&(p, _)| p).collect(),
        scores: scored.iter().map(|&(_, s)| s).collect(),
    })
}

/// |recommended ∩ visited| / n. The divisor stays `n` even when the list
/// was clipped below n.
pub fn precision_at_n(recommended: &[usize], visited: &[usize], n: usize) -> f64 {
    debug_assert!(recommended.len() <= n);
    hits(recommended, visited) as f64 / n as f64
}

/// |recommended ∩ visited| / |visited|; `None` signals "skip this user"
/// when the visited set is empty.
pub fn recall_at_n(recommended: &[usize], visited: &[usize]) -> Option<f64> {
    if visited.is_empty() {
        return None;
    }
    Some(hits(recommended, visited) as f64 / visited.len() as f64)
}

fn hits(recommended: &[usize], visited: &[usize]) -> usize {
    recommended.iter().filter(|p| visited.contains(p)).count()
}

/// Per-N precision and recall averaged over evaluated users.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub ns: Vec<usize>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub users_evaluated: usize,
    pub users_skipped: usize,
}

impl EvalReport {
    pub fn precision_at(&self, n: usize) -> Option<f64> {
        self.ns.iter().position(|&x| x == n).map(|i| self.precision[i])
    }

    pub fn recall_at(&self, n: usize) -> Option<f64> {
        self.ns.iter().position(|&x| x == n).map(|i| self.recall[i])
    }
}

/// Evaluation protocol: per user with a nonempty test set, exclude the
/// user's train POIs from the candidates, recommend at max(ns), and average
/// P@N / R@N over evaluated users. Test visits already seen in train are
/// dropped from the visited set, consistent with recommending only
/// unvisited POIs. Evaluation uses a single state per user (rankings are
/// state-invariant for these models).
pub fn evaluate(
    scorer: &impl Scorer,
    train: &Dataset,
    test: &Dataset,
    ns: &[usize],
) -> Result<EvalReport, EvalError> {
    let max_n = ns.iter().copied().max().unwrap_or(0);
    let train_sets = train.user_checked_sets();
    let mut visited_per_user: Vec<Vec<usize>> = alloc::vec![Vec::new(); train.n_users()];
    for r in &test.records {
        if !train_sets[r.user][r.poi] {
            visited_per_user[r.user].push(r.poi);
        }
    }
    for v in visited_per_user.iter_mut() {
        v.sort_unstable();
        v.dedup();
    }

    let mut precision_sums = alloc::vec![0.0; ns.len()];
    let mut recall_sums = alloc::vec![0.0; ns.len()];
    let mut evaluated = 0usize;
    let mut skipped = 0usize;

    // Users reduced in index order: the report is deterministic.
    for user in 0..train.n_users() {
        let visited = &visited_per_user[user];
        if visited.is_empty() {
            skipped += 1;
            continue;
        }
        let list = recommend_top_n(scorer, user, TemporalState::Weekday, max_n, &train_sets[user])?;
        for (i, &n) in ns.iter().enumerate() {
            let top = &list.pois[..n.min(list.pois.len())];
            precision_sums[i] += precision_at_n(top, visited, n);
            recall_sums[i] += recall_at_n(top, visited).unwrap_or(0.0);
        }
        evaluated += 1;
    }

    let denom = evaluated.max(1) as f64;
    Ok(EvalReport {
        ns: ns.to_vec(),
        precision: precision_sums.iter().map(|s| s / denom).collect(),
        recall: recall_sums.iter().map(|s| s / denom).collect(),
        users_evaluated: evaluated,
        users_skipped: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    use crate::checkin::Checkin;
    use crate::model;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct FixedScorer(Vec<f64>);

    impl Scorer for FixedScorer {
        fn score(&self, _u: usize, _s: TemporalState, poi: usize) -> f64 {
            self.0[poi]
        }
    }

    #[test]
    fn precision_examples() {
        assert_eq!(precision_at_n(&[1, 2, 3], &[7, 8], 3), 0.0);
        assert_eq!(precision_at_n(&[1, 2, 3, 4, 5], &[2, 5, 9], 5), 0.4);
    }

    #[test]
    fn recall_examples() {
        assert_eq!(recall_at_n(&[1, 2, 3], &[2, 3]), Some(1.0));
        assert_eq!(recall_at_n(&[1], &[1, 4, 5, 6]), Some(0.25));
        assert_eq!(recall_at_n(&[1, 2], &[]), None);
    }

    #[test]
    fn top_n_clips_to_pool() {
        let scorer = FixedScorer(vec![0.5, 0.1, 0.9, 0.3]);
        let exclude = vec![false, true, false, false];
        let list = recommend_top_n(&scorer, 0, TemporalState::Weekday, 5, &exclude).unwrap();
        assert_eq!(list.pois, vec![2, 0, 3]);
        assert!(list.scores.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn top_n_ties_break_by_index() {
        let scorer = FixedScorer(vec![0.0; 6]);
        let exclude = vec![false; 6];
        let list = recommend_top_n(&scorer, 0, TemporalState::Weekday, 4, &exclude).unwrap();
        assert_eq!(list.pois, vec![0, 1, 2, 3]);
    }

    #[test]
    fn top_n_empty_pool_errors() {
        let scorer = FixedScorer(vec![0.0; 2]);
        assert!(matches!(
            recommend_top_n(&scorer, 3, TemporalState::Weekday, 1, &[true, true]),
            Err(EvalError::EmptyCandidatePool { user: 3 })
        ));
    }

    fn two_phase_dataset() -> (Dataset, Dataset) {
        // Two users; train on early check-ins, test on later ones.
        let mk = |user: &str, poi: usize, ts: i64| Checkin {
            user_id: user.into(),
            poi_id: format!("p{poi}"),
            timestamp: ts,
            lat: poi as f64 * 0.01,
            lon: 0.0,
        };
        let all = vec![
            mk("a", 0, 0),
            mk("a", 1, 100),
            mk("b", 1, 50),
            mk("b", 2, 60),
            mk("a", 2, 1000),
            mk("a", 3, 1100),
            mk("b", 0, 2000),
            mk("b", 3, 2100),
        ];
        let ds = Dataset::from_checkins(&all, 0).unwrap();
        ds.chronological_split(0.5).unwrap()
    }

    #[test]
    fn oracle_model_reaches_full_recall() {
        let (train, test) = two_phase_dataset();
        // Score each POI by whether it is in some user's test set; with
        // per-user exclusion this ranks every user's unseen test POIs first.
        let mut score = vec![0.0; train.n_pois()];
        for r in &test.records {
            score[r.poi] = 1.0;
        }
        let report = evaluate(&FixedScorer(score), &train, &test, &[1, 5]).unwrap();
        assert_eq!(report.recall_at(5), Some(1.0));
        assert_eq!(report.users_evaluated, 2);
        assert_eq!(report.users_skipped, 0);
    }

    #[test]
    fn evaluation_drops_test_pois_seen_in_train() {
        let (train, mut test) = two_phase_dataset();
        // Duplicate a train check-in into the test records; it must not
        // count as a target.
        let dup = train.records[0];
        test.records.push(dup);
        let scorer = RandomScorer { seed: 1 };
        let baseline = evaluate(&scorer, &train, &test, &[5]).unwrap();
        test.records.pop();
        let clean = evaluate(&scorer, &train, &test, &[5]).unwrap();
        assert_eq!(baseline, clean);
    }

    #[test]
    fn random_scorer_is_reproducible() {
        let (train, test) = two_phase_dataset();
        let a = evaluate(&RandomScorer { seed: 9 }, &train, &test, &[1, 5]).unwrap();
        let b = evaluate(&RandomScorer { seed: 9 }, &train, &test, &[1, 5]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn popularity_ranks_most_checked_first() {
        let counts = vec![3u64, 9, 9, 1];
        let scorer = PopularityScorer { counts };
        let list =
            recommend_top_n(&scorer, 0, TemporalState::Weekday, 4, &[false; 4]).unwrap();
        assert_eq!(list.pois, vec![1, 2, 0, 3]);
    }

    #[test]
    fn model_scorer_is_state_invariant_in_ranking() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let params = model::init_params(2, 10, 4, &mut rng);
        let scorer = ModelScorer { params: &params, variant: Variant::TSeer };
        let exclude = vec![false; 10];
        let wd = recommend_top_n(&scorer, 1, TemporalState::Weekday, 10, &exclude).unwrap();
        let we = recommend_top_n(&scorer, 1, TemporalState::Weekend, 10, &exclude).unwrap();
        assert_eq!(wd.pois, we.pois);
    }

    #[test]
    fn relabeling_invariance() {
        // Permuting POI indices together with the score table leaves the
        // averaged metrics unchanged.
        let (train, test) = two_phase_dataset();
        let scores = vec![0.9, 0.2, 0.7, 0.4];
        let before = evaluate(&FixedScorer(scores.clone()), &train, &test, &[1, 2]).unwrap();

        let perm = [2usize, 0, 3, 1]; // old index -> new index
        let permute = |ds: &Dataset| {
            let mut ds2 = ds.clone();
            for r in ds2.records.iter_mut() {
                r.poi = perm[r.poi];
            }
            for s in ds2.sequences.iter_mut() {
                for p in s.pois.iter_mut() {
                    *p = perm[*p];
                }
            }
            let mut counts = vec![0u64; ds.n_pois()];
            for r in &ds2.records {
                counts[r.poi] += 1;
            }
            ds2.checkin_counts = counts;
            ds2
        };
        let mut new_scores = vec![0.0; 4];
        for (old, &new) in perm.iter().enumerate() {
            new_scores[new] = scores[old];
        }
        let after = evaluate(
            &FixedScorer(new_scores),
            &permute(&train),
            &permute(&test),
            &[1, 2],
        )
        .unwrap();
        assert_eq!(before.precision, after.precision);
        assert_eq!(before.recall, after.recall);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn precision_times_n_counts_hits(
                rec in proptest::collection::btree_set(0usize..30, 0..10),
                vis in proptest::collection::btree_set(0usize..30, 0..10),
            ) {
                let rec: Vec<usize> = rec.into_iter().collect();
                let vis: Vec<usize> = vis.into_iter().collect();
                let n = rec.len().max(1);
                let p = precision_at_n(&rec, &vis, n);
                let exact = rec.iter().filter(|x| vis.contains(x)).count();
                prop_assert!((p * n as f64 - exact as f64).abs() < 1e-12);
            }

            #[test]
            fn recall_is_monotone_in_n(
                scores in proptest::collection::vec(0.0f64..1.0, 5..30),
                vis in proptest::collection::btree_set(0usize..30, 1..10),
            ) {
                let n_pois = scores.len();
                let vis: Vec<usize> = vis.into_iter().filter(|&v| v < n_pois).collect();
                prop_assume!(!vis.is_empty());
                let scorer = FixedScorer(scores);
                let exclude = alloc::vec![false; n_pois];
                let list = recommend_top_n(&scorer, 0, TemporalState::Weekday, n_pois, &exclude)
                    .unwrap();
                let mut prev = 0.0;
                for n in 1..=n_pois {
                    let r = recall_at_n(&list.pois[..n], &vis).unwrap();
                    prop_assert!(r >= prev);
                    prev = r;
                }
            }
        }
    }
}
