//! Negative-sample distributions, context-window extraction, unchecked-POI
//! sampling, and preference-pair construction for the three model variants.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::geo::{self, GeoPoint, NeighborClass};
use crate::model::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleError {
    /// Noise-table construction saw only zero counts.
    AllZeroCounts,
    /// Every POI with positive noise probability is in the sequence.
    NoEligibleNegative,
    /// The user has checked in at every POI.
    NoUncheckedPoi,
}

impl fmt::Display for SampleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleError::AllZeroCounts => write!(f, "noise table needs at least one nonzero count"),
            SampleError::NoEligibleNegative => {
                write!(f, "no POI outside the sequence has positive noise probability")
            }
            SampleError::NoUncheckedPoi => write!(f, "user has checked in at every POI"),
        }
    }
}

/// Noise distribution over dense POI indices, p(i) proportional to
/// count_i^power, sampled by binary search over the cumulative table.
#[derive(Debug, Clone)]
pub struct NoiseTable {
    cdf: Vec<f64>,
    probs: Vec<f64>,
    positive: usize,
}

impl NoiseTable {
    /// Standard exponent is 3/4 (unigram distribution raised to a power).
    /// `power` of 0 yields the uniform distribution over POIs with count > 0.
    pub fn from_counts(counts: &[u64], power: f64) -> Result<Self, SampleError> {
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| if c > 0 { libm::pow(c as f64, power) } else { 0.0 })
            .collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(SampleError::AllZeroCounts);
        }
        let mut cdf = Vec::with_capacity(weights.len());
        let mut probs = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        let mut positive = 0;
        for w in &weights {
            let p = w / total;
            if p > 0.0 {
                positive += 1;
            }
            probs.push(p);
            // Clamp accumulated roundoff so the table stays nondecreasing
            // once the final entry is pinned to 1.
            acc = (acc + p).min(1.0);
            cdf.push(acc);
        }
        // Pin the final entry so sampling never falls off the table.
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Ok(NoiseTable { cdf, probs, positive })
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn probability(&self, poi: usize) -> f64 {
        self.probs[poi]
    }

    /// Number of POIs with positive probability.
    pub fn positive_count(&self) -> usize {
        self.positive
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        // First index whose cumulative probability exceeds u.
        match self.cdf.partition_point(|&c| c <= u) {
            i if i < self.cdf.len() => i,
            _ => self.cdf.len() - 1,
        }
    }
}

/// `h` draws from the noise table, rejection-resampled so no draw is a
/// member of the sequence. Draws may repeat.
pub fn sample_embedding_negatives(
    sequence_pois: &[usize],
    h: usize,
    table: &NoiseTable,
    rng: &mut impl Rng,
) -> Result<Vec<usize>, SampleError> {
    if h == 0 {
        return Ok(Vec::new());
    }
    let members_with_mass = {
        let mut sorted: Vec<usize> = sequence_pois
            .iter()
            .copied()
            .filter(|&p| table.probability(p) > 0.0)
            .collect();
        sorted.sort_unstable();
        sorted.dedup();
        sorted.len()
    };
    if members_with_mass >= table.positive_count() {
        return Err(SampleError::NoEligibleNegative);
    }
    let mut out = Vec::with_capacity(h);
    while out.len() < h {
        let cand = table.sample(rng);
        if !sequence_pois.contains(&cand) {
            out.push(cand);
        }
    }
    Ok(out)
}

/// A (target, context) pair from one day sequence's sliding window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextPair {
    pub target: usize,
    pub context: usize,
}

/// For every target position i, one pair per context position in
/// [i-k, i+k] \ {i} clipped to the sequence bounds. Singleton sequences
/// yield nothing.
pub fn extract_context_pairs(pois: &[usize], window: usize) -> Vec<ContextPair> {
    let mut out = Vec::new();
    for i in 0..pois.len() {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(pois.len().saturating_sub(1));
        for c in lo..=hi {
            if c != i {
                out.push(ContextPair {
                    target: pois[i],
                    context: pois[c],
                });
            }
        }
    }
    out
}

/// `m` i.i.d. uniform draws (with replacement, Bootstrap) from the POIs the
/// user has not checked in at. `checked` is the user's membership row.
pub fn sample_preference_candidates(
    checked: &[bool],
    m: usize,
    rng: &mut impl Rng,
) -> Result<Vec<usize>, SampleError> {
    if m == 0 {
        return Ok(Vec::new());
    }
    if checked.iter().all(|&c| c) {
        return Err(SampleError::NoUncheckedPoi);
    }
    let n = checked.len();
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let cand = rng.gen_range(0..n);
        if !checked[cand] {
            out.push(cand);
        }
    }
    Ok(out)
}

/// One pairwise ranking instance: the user prefers `preferred` over
/// `dominated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreferenceTuple {
    pub user: usize,
    pub preferred: usize,
    pub dominated: usize,
}

/// Preference tuples for one check-in. The flat variants emit one
/// (u, l_i, candidate) tuple per candidate. The geo variant classifies
/// candidates against the checked-in POI and emits (u, l_i, l_ne) for every
/// neighboring candidate plus (u, l_ne, l_nn) for every
/// (neighboring, non-neighboring) candidate pair; a candidate set with no
/// neighboring member yields no tuples.
pub fn build_preference_pairs(
    user: usize,
    checkin_poi: usize,
    candidates: &[usize],
    variant: Variant,
    distance_km: f64,
    coords: &[GeoPoint],
) -> Vec<PreferenceTuple> {
    match variant {
        Variant::Seer | Variant::TSeer => candidates
            .iter()
            .map(|&c| PreferenceTuple {
                user,
                preferred: checkin_poi,
                dominated: c,
            })
            .collect(),
        Variant::GtSeer => {
            let target = coords[checkin_poi];
            let mut neighboring = Vec::new();
            let mut non_neighboring = Vec::new();
            for &c in candidates {
                match geo::classify(target, coords[c], distance_km) {
                    NeighborClass::Neighboring => neighboring.push(c),
                    NeighborClass::NonNeighboring => non_neighboring.push(c),
                }
            }
            let mut out =
                Vec::with_capacity(neighboring.len() * (1 + non_neighboring.len()));
            for &ne in &neighboring {
                out.push(PreferenceTuple {
                    user,
                    preferred: checkin_poi,
                    dominated: ne,
                });
            }
            for &ne in &neighboring {
                for &nn in &non_neighboring {
                    out.push(PreferenceTuple {
                        user,
                        preferred: ne,
                        dominated: nn,
                    });
                }
            }
            out
        }
    }
}
