//! Learnable parameters, scoring functions, the binary model codec, and the
//! slow exact oracles used by tests.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::checkin::TemporalState;

/// Model variant: sequential embedding rank, plus temporal-state embedding,
/// plus geo-discriminated preference pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Seer,
    TSeer,
    GtSeer,
}

impl Variant {
    pub fn uses_temporal(self) -> bool {
        !matches!(self, Variant::Seer)
    }

    pub fn tag(self) -> u8 {
        match self {
            Variant::Seer => 0,
            Variant::TSeer => 1,
            Variant::GtSeer => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Variant::Seer),
            1 => Some(Variant::TSeer),
            2 => Some(Variant::GtSeer),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Seer => write!(f, "seer"),
            Variant::TSeer => write!(f, "t-seer"),
            Variant::GtSeer => write!(f, "gt-seer"),
        }
    }
}

/// Full training configuration. The learning rate is absorbed into the
/// `alpha` (embedding) and `beta` (preference) step weights.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    /// Latent vector dimension d.
    pub dim: usize,
    /// Context window size k.
    pub window: usize,
    /// Negative samples per context, h.
    pub negatives: usize,
    /// Unchecked-POI candidates per check-in, m.
    pub candidates: usize,
    /// Embedding step weight.
    pub alpha: f64,
    /// Preference step weight.
    pub beta: f64,
    /// Neighboring-POI distance threshold in kilometers.
    pub distance_km: f64,
    pub epochs: usize,
    pub variant: Variant,
    pub seed: u64,
}

impl HyperParams {
    /// Defaults: d=50, k=3, h=5, m=10, s=10 km, 20 epochs, alpha=0.05 and a
    /// beta/alpha ratio of 1 (0.25 for the geo variant, which sees more
    /// preference pairs per check-in).
    pub fn default_for(variant: Variant) -> Self {
        let beta = match variant {
            Variant::GtSeer => 0.0125,
            _ => 0.05,
        };
        HyperParams {
            dim: 50,
            window: 3,
            negatives: 5,
            candidates: 10,
            alpha: 0.05,
            beta,
            distance_km: 10.0,
            epochs: 20,
            variant,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<(), HyperError> {
        if self.dim < 1 || self.window < 1 || self.negatives < 1 || self.candidates < 1 {
            return Err(HyperError::NonPositiveCount);
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0 && (self.alpha > 0.0 || self.beta > 0.0)) {
            return Err(HyperError::BadStepWeights);
        }
        if self.variant == Variant::GtSeer && !(self.distance_km > 0.0) {
            return Err(HyperError::BadDistanceThreshold);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperError {
    NonPositiveCount,
    BadStepWeights,
    BadDistanceThreshold,
}

impl fmt::Display for HyperError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperError::NonPositiveCount => write!(f, "counts d, k, h, m must be >= 1"),
            HyperError::BadStepWeights => write!(f, "alpha and beta must be nonnegative, not both zero"),
            HyperError::BadDistanceThreshold => write!(f, "distance threshold must be > 0 for gt-seer"),
        }
    }
}

/// Learnable state: user matrix U, input POI matrix L, output POI matrix L'
/// (the skip-gram output layer), and the 2-row temporal-state matrix T.
/// All matrices are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub dim: usize,
    pub n_users: usize,
    pub n_pois: usize,
    pub users: Vec<f64>,
    pub poi_in: Vec<f64>,
    pub poi_out: Vec<f64>,
    pub temporal: Vec<f64>,
}

impl ModelParams {
    pub fn user(&self, u: usize) -> &[f64] {
        &self.users[u * self.dim..(u + 1) * self.dim]
    }

    pub fn poi_in(&self, p: usize) -> &[f64] {
        &self.poi_in[p * self.dim..(p + 1) * self.dim]
    }

    pub fn poi_out(&self, p: usize) -> &[f64] {
        &self.poi_out[p * self.dim..(p + 1) * self.dim]
    }

    pub fn temporal(&self, state: TemporalState) -> &[f64] {
        let s = state.index();
        &self.temporal[s * self.dim..(s + 1) * self.dim]
    }

    /// f(u, l) = u . l
    pub fn preference_score(&self, user: usize, poi: usize) -> f64 {
        dot(self.user(user), self.poi_in(poi))
    }

    /// f(u, t_s, l) = u . l + u . t_s, the expansion of the concatenated
    /// inner product.
    pub fn temporal_preference_score(&self, user: usize, state: TemporalState, poi: usize) -> f64 {
        dot(self.user(user), self.poi_in(poi)) + dot(self.user(user), self.temporal(state))
    }

    /// Pr(l_i >_u l_n) = sigma(u.l_i - u.l_n).
    pub fn pair_probability(&self, user: usize, poi_i: usize, poi_n: usize) -> f64 {
        sigmoid(self.preference_score(user, poi_i) - self.preference_score(user, poi_n))
    }

    /// All entries finite and within `bound` in magnitude.
    pub fn entries_within(&self, bound: f64) -> bool {
        self.users
            .iter()
            .chain(&self.poi_in)
            .chain(&self.poi_out)
            .chain(&self.temporal)
            .all(|x| x.is_finite() && x.abs() <= bound)
    }
}

/// Every entry i.i.d. uniform on [-0.5/d, +0.5/d].
pub fn init_params(n_users: usize, n_pois: usize, dim: usize, rng: &mut impl Rng) -> ModelParams {
    let half = 0.5 / dim as f64;
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n * dim).map(|_| rng.gen_range(-half..=half)).collect()
    };
    ModelParams {
        dim,
        n_users,
        n_pois,
        users: draw(n_users),
        poi_in: draw(n_pois),
        poi_out: draw(n_pois),
        temporal: draw(2),
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Overflow-safe logistic sigmoid.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Overflow-safe log sigma(x).
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -libm::log1p(libm::exp(-x))
    } else {
        x - libm::log1p(libm::exp(x))
    }
}

pub mod oracle {
    //! Exact reference computations for test-scale instances. These stay
    //! independent of the trainer's update path: they evaluate objective
    //! terms directly from the scoring definitions.

    use alloc::vec::Vec;

    use super::{dot, log_sigmoid, ModelParams};
    use crate::checkin::TemporalState;

    /// Exact softmax Pr(context | target[, t_s]) normalized over the full
    /// POI universe, computed with log-sum-exp. Temporal logits are
    /// l'_c . l_i + l'_c . t_s.
    pub fn context_softmax(
        params: &ModelParams,
        target: usize,
        context: usize,
        state: Option<TemporalState>,
    ) -> f64 {
        let logit = |c: usize| -> f64 {
            let mut x = dot(params.poi_out(c), params.poi_in(target));
            if let Some(s) = state {
                x += dot(params.poi_out(c), params.temporal(s));
            }
            x
        };
        let mut max = f64::NEG_INFINITY;
        for c in 0..params.n_pois {
            max = max.max(logit(c));
        }
        let mut denom = 0.0;
        for c in 0..params.n_pois {
            denom += libm::exp(logit(c) - max);
        }
        libm::exp(logit(context) - max) / denom
    }

    /// One skip-gram term with its fixed, materialized negative draws.
    #[derive(Debug, Clone)]
    pub struct ContextTerm {
        pub target: usize,
        pub context: usize,
        pub state: Option<TemporalState>,
        pub negatives: Vec<usize>,
    }

    /// A fixed materialized draw of training terms, making the objective a
    /// deterministic function of the parameters.
    #[derive(Debug, Clone, Default)]
    pub struct ObjectiveItems {
        pub contexts: Vec<ContextTerm>,
        /// (user, preferred, dominated) tuples.
        pub preferences: Vec<(usize, usize, usize)>,
    }

    impl ObjectiveItems {
        pub fn new() -> Self {
            Self::default()
        }
    }

    /// alpha * sum of embedding log-likelihood terms plus beta * sum of
    /// preference log-likelihood terms: the exact function the SGD update
    /// rules ascend for the given materialized draws.
    pub fn objective(params: &ModelParams, items: &ObjectiveItems, alpha: f64, beta: f64) -> f64 {
        let mut total = 0.0;
        for term in &items.contexts {
            let temporal_dot = |out_row: &[f64]| -> f64 {
                match term.state {
                    Some(s) => dot(out_row, params.temporal(s)),
                    None => 0.0,
                }
            };
            let pos = dot(params.poi_out(term.context), params.poi_in(term.target))
                + temporal_dot(params.poi_out(term.context));
            total += alpha * log_sigmoid(pos);
            for &neg in &term.negatives {
                let x = dot(params.poi_out(neg), params.poi_in(term.target))
                    + temporal_dot(params.poi_out(neg));
                total += alpha * log_sigmoid(-x);
            }
        }
        for &(user, preferred, dominated) in &items.preferences {
            let diff = params.preference_score(user, preferred)
                - params.preference_score(user, dominated);
            total += beta * log_sigmoid(diff);
        }
        total
    }
}

pub mod codec {
    //! Versioned flat binary model file: header, then U, L, L', T as
    //! row-major little-endian f64, then length-prefixed id tables.
    //! Round-trips are bit-exact.

    use alloc::string::String;
    use alloc::vec::Vec;
    use core::fmt;

    use super::{ModelParams, Variant};

    pub const MAGIC: [u8; 4] = *b"GTSR";
    pub const VERSION: u32 = 1;

    /// A serialized model: parameters plus the id-to-index tables that pin
    /// the dense index space.
    #[derive(Debug, Clone, PartialEq)]
    pub struct ModelFile {
        pub variant: Variant,
        pub params: ModelParams,
        pub user_ids: Vec<String>,
        pub poi_ids: Vec<String>,
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum DecodeError {
        BadMagic,
        UnsupportedVersion(u32),
        BadVariant(u8),
        Truncated,
        TrailingBytes,
        BadUtf8,
    }

    impl fmt::Display for DecodeError {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match self {
                DecodeError::BadMagic => write!(f, "not a model file (bad magic)"),
                DecodeError::UnsupportedVersion(v) => write!(f, "unsupported model version {v}"),
                DecodeError::BadVariant(t) => write!(f, "unknown variant tag {t}"),
                DecodeError::Truncated => write!(f, "model file truncated"),
                DecodeError::TrailingBytes => write!(f, "trailing bytes after model payload"),
                DecodeError::BadUtf8 => write!(f, "id table is not valid UTF-8"),
            }
        }
    }

    pub fn encode(file: &ModelFile) -> Vec<u8> {
        let p = &file.params;
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(file.variant.tag());
        out.extend_from_slice(&(p.n_users as u64).to_le_bytes());
        out.extend_from_slice(&(p.n_pois as u64).to_le_bytes());
        out.extend_from_slice(&(p.dim as u64).to_le_bytes());
        for m in [&p.users, &p.poi_in, &p.poi_out, &p.temporal] {
            for &x in m.iter() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        for table in [&file.user_ids, &file.poi_ids] {
            for id in table.iter() {
                out.extend_from_slice(&(id.len() as u32).to_le_bytes());
                out.extend_from_slice(id.as_bytes());
            }
        }
        out
    }

    struct Reader<'a> {
        buf: &'a [u8],
        pos: usize,
    }

    impl<'a> Reader<'a> {
        fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
            if self.pos + n > self.buf.len() {
                return Err(DecodeError::Truncated);
            }
            let s = &self.buf[self.pos..self.pos + n];
            self.pos += n;
            Ok(s)
        }

        fn u32(&mut self) -> Result<u32, DecodeError> {
            Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
        }

        fn u64(&mut self) -> Result<u64, DecodeError> {
            Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
        }

        fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>, DecodeError> {
            let bytes = self.take(n * 8)?;
            Ok(bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect())
        }

        fn id_table(&mut self, n: usize) -> Result<Vec<String>, DecodeError> {
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let len = self.u32()? as usize;
                let bytes = self.take(len)?;
                let s = core::str::from_utf8(bytes).map_err(|_| DecodeError::BadUtf8)?;
                out.push(String::from(s));
            }
            Ok(out)
        }
    }

    pub fn decode(buf: &[u8]) -> Result<ModelFile, DecodeError> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(DecodeError::BadMagic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(DecodeError::UnsupportedVersion(version));
        }
        let tag = r.take(1)?[0];
        let variant = Variant::from_tag(tag).ok_or(DecodeError::BadVariant(tag))?;
        let n_users = r.u64()? as usize;
        let n_pois = r.u64()? as usize;
        let dim = r.u64()? as usize;
        let users = r.f64_vec(n_users * dim)?;
        let poi_in = r.f64_vec(n_pois * dim)?;
        let poi_out = r.f64_vec(n_pois * dim)?;
        let temporal = r.f64_vec(2 * dim)?;
        let user_ids = r.id_table(n_users)?;
        let poi_ids = r.id_table(n_pois)?;
        if r.pos != buf.len() {
            return Err(DecodeError::TrailingBytes);
        }
        Ok(ModelFile {
            variant,
            params: ModelParams {
                dim,
                n_users,
                n_pois,
                users,
                poi_in,
                poi_out,
                temporal,
            },
            user_ids,
            poi_ids,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use alloc::format;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_params(n_users: usize, n_pois: usize, dim: usize) -> ModelParams {
        ModelParams {
            dim,
            n_users,
            n_pois,
            users: vec![0.0; n_users * dim],
            poi_in: vec![0.0; n_pois * dim],
            poi_out: vec![0.0; n_pois * dim],
            temporal: vec![0.0; 2 * dim],
        }
    }

    #[test]
    fn init_range_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = init_params(4, 7, 8, &mut rng);
        let half = 0.5 / 8.0;
        assert!(p.entries_within(half));
        let mut rng2 = ChaCha8Rng::seed_from_u64(3);
        let p2 = init_params(4, 7, 8, &mut rng2);
        assert_eq!(p, p2);
    }

    #[test]
    fn init_mean_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = init_params(100, 900, 100, &mut rng);
        let n = p.poi_in.len() as f64; // 90_000 draws
        let mean: f64 = p.poi_in.iter().sum::<f64>() / n;
        // Uniform on [-h, h]: sd of the mean is h / sqrt(3 n).
        let h = 0.5 / 100.0;
        let sigma = h / libm::sqrt(3.0 * n);
        assert!(mean.abs() < 3.0 * sigma, "mean {mean} vs 3 sigma {}", 3.0 * sigma);
    }

    #[test]
    fn preference_score_examples() {
        let mut p = zero_params(1, 2, 4);
        assert_eq!(p.preference_score(0, 0), 0.0);
        p.users[..4].copy_from_slice(&[1.0; 4]);
        p.poi_in[..4].copy_from_slice(&[1.0; 4]);
        assert_eq!(p.preference_score(0, 0), 4.0);
    }

    #[test]
    fn preference_score_matches_extended_precision_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = init_params(3, 5, 16, &mut rng);
        for u in 0..3 {
            for l in 0..5 {
                // Kahan-compensated reference sum.
                let (mut s, mut c) = (0.0f64, 0.0f64);
                for (a, b) in p.user(u).iter().zip(p.poi_in(l)) {
                    let y = a * b - c;
                    let t = s + y;
                    c = (t - s) - y;
                    s = t;
                }
                assert!((p.preference_score(u, l) - s).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn temporal_score_decomposes() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = init_params(3, 5, 16, &mut rng);
        for u in 0..3 {
            for l in 0..5 {
                for s in [TemporalState::Weekday, TemporalState::Weekend] {
                    let expected = p.preference_score(u, l) + dot(p.user(u), p.temporal(s));
                    assert!((p.temporal_preference_score(u, s, l) - expected).abs() < 1e-10);
                }
                // Score differences are state-independent.
                let d_plain = p.preference_score(u, l) - p.preference_score(u, 0);
                let d_temp = p.temporal_preference_score(u, TemporalState::Weekend, l)
                    - p.temporal_preference_score(u, TemporalState::Weekend, 0);
                assert!((d_plain - d_temp).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_temporal_rows_collapse_to_plain_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut p = init_params(2, 4, 8, &mut rng);
        p.temporal.iter_mut().for_each(|x| *x = 0.0);
        for u in 0..2 {
            for l in 0..4 {
                assert_eq!(
                    p.temporal_preference_score(u, TemporalState::Weekday, l),
                    p.preference_score(u, l)
                );
            }
        }
    }

    #[test]
    fn pair_probability_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let p = init_params(2, 4, 8, &mut rng);
        assert_eq!(p.pair_probability(0, 2, 2), 0.5);
        let sum = p.pair_probability(0, 1, 3) + p.pair_probability(0, 3, 1);
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sigmoid_is_stable_at_large_magnitudes() {
        assert!((sigmoid(40.0) - 1.0).abs() < 1e-12);
        assert!(sigmoid(-750.0) >= 0.0);
        assert!(sigmoid(-750.0) < 1e-300);
        assert!(sigmoid(750.0) <= 1.0);
        assert!(log_sigmoid(-750.0).is_finite());
        assert!((log_sigmoid(750.0)).abs() < 1e-300);
        // Large positive score difference saturates without overflow.
        let mut p = zero_params(1, 2, 1);
        p.users[0] = 1.0;
        p.poi_in[0] = 50.0;
        p.poi_in[1] = -50.0;
        assert!((p.pair_probability(0, 0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_oracle_uniform_and_normalized() {
        let p = zero_params(1, 6, 4);
        for c in 0..6 {
            assert!((oracle::context_softmax(&p, 0, c, None) - 1.0 / 6.0).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = init_params(1, 6, 4, &mut rng);
        for state in [None, Some(TemporalState::Weekend)] {
            let total: f64 = (0..6).map(|c| oracle::context_softmax(&p, 2, c, state)).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn softmax_oracle_hand_set_three_pois() {
        // 3-POI universe with hand-set vectors, cross-checked against an
        // independently coded log-sum-exp expression.
        let mut p = zero_params(1, 3, 2);
        p.poi_in.copy_from_slice(&[0.3, -0.1, 0.2, 0.4, -0.5, 0.1]);
        p.poi_out.copy_from_slice(&[0.1, 0.2, -0.3, 0.05, 0.25, -0.15]);
        let target = 1;
        let logits: Vec<f64> = (0..3)
            .map(|c| dot(p.poi_out(c), p.poi_in(target)))
            .collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + libm::log(logits.iter().map(|&x| libm::exp(x - max)).sum::<f64>());
        for c in 0..3 {
            let expected = libm::exp(logits[c] - lse);
            assert!((oracle::context_softmax(&p, target, c, None) - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn softmax_oracle_invariant_to_logit_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = init_params(1, 5, 3, &mut rng);
        let target = 1;
        let logits: Vec<f64> = (0..5).map(|c| dot(p.poi_out(c), p.poi_in(target))).collect();
        let softmax_of = |logits: &[f64], c: usize| -> f64 {
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let denom: f64 = logits.iter().map(|&x| libm::exp(x - max)).sum();
            libm::exp(logits[c] - max) / denom
        };
        let shifted: Vec<f64> = logits.iter().map(|x| x + 123.456).collect();
        for c in 0..5 {
            let reference = softmax_of(&shifted, c);
            assert!((oracle::context_softmax(&p, target, c, None) - reference).abs() < 1e-12);
        }
    }

    #[test]
    fn objective_oracle_closed_forms() {
        let p = zero_params(2, 4, 3);
        let empty = oracle::ObjectiveItems::new();
        assert_eq!(oracle::objective(&p, &empty, 0.3, 0.0), 0.0);

        let mut items = oracle::ObjectiveItems::new();
        items.preferences.push((0, 1, 2));
        let beta = 0.7;
        let expected = beta * libm::log(0.5);
        assert!((oracle::objective(&p, &items, 0.0, beta) - expected).abs() < 1e-12);
    }

    #[test]
    fn codec_round_trip_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let params = init_params(3, 5, 4, &mut rng);
        let file = codec::ModelFile {
            variant: Variant::GtSeer,
            params,
            user_ids: (0..3).map(|i| format!("user-{i}")).collect(),
            poi_ids: (0..5).map(|i| format!("poi_{i}")).collect(),
        };
        let bytes = codec::encode(&file);
        let back = codec::decode(&bytes).unwrap();
        assert_eq!(back, file);
        assert_eq!(codec::encode(&back), bytes);
    }

    #[test]
    fn codec_rejects_corrupt_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let file = codec::ModelFile {
            variant: Variant::Seer,
            params: init_params(1, 2, 2, &mut rng),
            user_ids: vec![String::from("u")],
            poi_ids: vec![String::from("a"), String::from("b")],
        };
        let bytes = codec::encode(&file);
        assert_eq!(codec::decode(&bytes[..3]), Err(codec::DecodeError::Truncated));
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert_eq!(codec::decode(&bad_magic), Err(codec::DecodeError::BadMagic));
        let mut trailing = bytes.clone();
        trailing.push(0);
        assert_eq!(codec::decode(&trailing), Err(codec::DecodeError::TrailingBytes));
        let mut short = bytes.clone();
        short.truncate(bytes.len() - 1);
        assert_eq!(codec::decode(&short), Err(codec::DecodeError::Truncated));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn codec_round_trips(
                n_users in 1usize..4,
                n_pois in 1usize..5,
                dim in 1usize..5,
                seed in 0u64..1000,
                variant_tag in 0u8..3,
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let file = codec::ModelFile {
                    variant: Variant::from_tag(variant_tag).unwrap(),
                    params: init_params(n_users, n_pois, dim, &mut rng),
                    user_ids: (0..n_users).map(|i| format!("u{i}")).collect(),
                    poi_ids: (0..n_pois).map(|i| format!("p{i}")).collect(),
                };
                prop_assert_eq!(codec::decode(&codec::encode(&file)).unwrap(), file);
            }

            #[test]
            fn pair_probability_depends_only_on_score_difference(
                seed in 0u64..500,
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let p = init_params(2, 4, 6, &mut rng);
                for u in 0..2 {
                    for i in 0..4 {
                        for n in 0..4 {
                            let direct = p.pair_probability(u, i, n);
                            let via_diff = sigmoid(
                                p.preference_score(u, i) - p.preference_score(u, n),
                            );
                            prop_assert!((direct - via_diff).abs() < 1e-15);
                        }
                    }
                }
            }
        }
    }
}
