//! Check-in records, day-sequence segmentation, chronological splitting, and
//! the empirical-analysis computations over check-in logs.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::geo::GeoPoint;

pub const SECS_PER_DAY: i64 = 86400;

/// One raw check-in event: a user visiting a POI at a point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkin {
    pub user_id: String,
    pub poi_id: String,
    /// Seconds since the Unix epoch.
    pub timestamp: i64,
    pub lat: f64,
    pub lon: f64,
}

/// Sequence-level temporal state: sequences on weekdays and weekends are
/// modeled with separate state vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalState {
    Weekday,
    Weekend,
}

impl TemporalState {
    /// Row index into the temporal-state matrix.
    pub fn index(self) -> usize {
        match self {
            TemporalState::Weekday => 0,
            TemporalState::Weekend => 1,
        }
    }
}

impl fmt::Display for TemporalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemporalState::Weekday => write!(f, "weekday"),
            TemporalState::Weekend => write!(f, "weekend"),
        }
    }
}

/// Day index of a timestamp under a dataset-wide UTC offset; days are cut at
/// local midnight.
pub fn day_key(timestamp: i64, tz_offset_secs: i32) -> i64 {
    (timestamp + tz_offset_secs as i64).div_euclid(SECS_PER_DAY)
}

/// Day of week for a day index, 0 = Monday .. 6 = Sunday.
/// Day 0 (1970-01-01) was a Thursday.
pub fn day_of_week(day_key: i64) -> usize {
    (day_key + 3).rem_euclid(7) as usize
}

/// Weekend iff the day is Saturday or Sunday in the Gregorian calendar.
pub fn temporal_state(day_key: i64) -> TemporalState {
    if day_of_week(day_key) >= 5 {
        TemporalState::Weekend
    } else {
        TemporalState::Weekday
    }
}

/// The ordered POIs one user visited within one calendar day; the "sentence"
/// unit of embedding training. POIs are dense indices into the owning
/// [`Dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct DaySequence {
    pub user: usize,
    pub day_key: i64,
    pub state: TemporalState,
    pub pois: Vec<usize>,
}

/// A check-in in dense index space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub user: usize,
    pub poi: usize,
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataError {
    CoordinateOutOfRange { poi_id: String },
    NegativeTimestamp { user_id: String },
    /// The same POI id appeared with two different coordinates.
    InconsistentCoords { poi_id: String },
    UnknownPoi { poi_id: String },
    UnknownUser { user_id: String },
    /// Split ratio outside (0, 1).
    BadSplitRatio { ratio: f64 },
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::CoordinateOutOfRange { poi_id } => {
                write!(f, "coordinate out of range for POI {poi_id}")
            }
            DataError::NegativeTimestamp { user_id } => {
                write!(f, "negative timestamp for user {user_id}")
            }
            DataError::InconsistentCoords { poi_id } => {
                write!(f, "POI {poi_id} has inconsistent coordinates")
            }
            DataError::UnknownPoi { poi_id } => write!(f, "unknown POI id {poi_id}"),
            DataError::UnknownUser { user_id } => write!(f, "unknown user id {user_id}"),
            DataError::BadSplitRatio { ratio } => {
                write!(f, "split ratio {ratio} outside (0, 1)")
            }
        }
    }
}

/// Iteratively removes POIs visited by fewer than `min_users_per_poi`
/// distinct users and users with fewer than `min_checkins_per_user`
/// check-ins, until a fixed point is reached. Output preserves input order.
pub fn filter_checkins(
    checkins: &[Checkin],
    min_users_per_poi: usize,
    min_checkins_per_user: usize,
) -> Vec<Checkin> {
    let mut kept: Vec<bool> = alloc::vec![true; checkins.len()];
    loop {
        let mut poi_users: BTreeMap<&str, BTreeMap<&str, ()>> = BTreeMap::new();
        let mut user_counts: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, c) in checkins.iter().enumerate() {
            if kept[i] {
                poi_users
                    .entry(c.poi_id.as_str())
                    .or_default()
                    .insert(c.user_id.as_str(), ());
                *user_counts.entry(c.user_id.as_str()).or_default() += 1;
            }
        }
        let mut changed = false;
        for (i, c) in checkins.iter().enumerate() {
            if !kept[i] {
                continue;
            }
            let poi_ok = poi_users
                .get(c.poi_id.as_str())
                .is_some_and(|u| u.len() >= min_users_per_poi);
            let user_ok = user_counts
                .get(c.user_id.as_str())
                .is_some_and(|&n| n >= min_checkins_per_user);
            if !poi_ok || !user_ok {
                kept[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    checkins
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(c, _)| c.clone())
        .collect()
}

/// An indexed check-in corpus: dense user/POI ids, per-POI coordinates and
/// check-in counts, and the per-day sequences.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub user_ids: Vec<String>,
    pub poi_ids: Vec<String>,
    pub user_index: BTreeMap<String, usize>,
    pub poi_index: BTreeMap<String, usize>,
    pub poi_coords: Vec<GeoPoint>,
    pub checkin_counts: Vec<u64>,
    pub records: Vec<Record>,
    pub sequences: Vec<DaySequence>,
    pub tz_offset_secs: i32,
}

impl Dataset {
    /// Indexes a parsed (and typically filtered) check-in list. Dense indices
    /// are assigned in order of first appearance, so construction is
    /// deterministic in the input order.
    pub fn from_checkins(checkins: &[Checkin], tz_offset_secs: i32) -> Result<Self, DataError> {
        let mut user_ids = Vec::new();
        let mut poi_ids = Vec::new();
        let mut user_index: BTreeMap<String, usize> = BTreeMap::new();
        let mut poi_index: BTreeMap<String, usize> = BTreeMap::new();
        let mut poi_coords: Vec<GeoPoint> = Vec::new();
        let mut records = Vec::with_capacity(checkins.len());

        for c in checkins {
            let point = GeoPoint::new(c.lat, c.lon);
            if !point.is_valid() {
                return Err(DataError::CoordinateOutOfRange {
                    poi_id: c.poi_id.clone(),
                });
            }
            if c.timestamp < 0 {
                return Err(DataError::NegativeTimestamp {
                    user_id: c.user_id.clone(),
                });
            }
            let user = *user_index.entry(c.user_id.clone()).or_insert_with(|| {
                user_ids.push(c.user_id.clone());
                user_ids.len() - 1
            });
            let poi = match poi_index.get(&c.poi_id) {
                Some(&p) => {
                    if poi_coords[p] != point {
                        return Err(DataError::InconsistentCoords {
                            poi_id: c.poi_id.clone(),
                        });
                    }
                    p
                }
                None => {
                    let p = poi_ids.len();
                    poi_index.insert(c.poi_id.clone(), p);
                    poi_ids.push(c.poi_id.clone());
                    poi_coords.push(point);
                    p
                }
            };
            records.push(Record {
                user,
                poi,
                timestamp: c.timestamp,
            });
        }

        let mut checkin_counts = alloc::vec![0u64; poi_ids.len()];
        for r in &records {
            checkin_counts[r.poi] += 1;
        }
        let sequences = segment_sequences(&records, tz_offset_secs);

        Ok(Dataset {
            user_ids,
            poi_ids,
            user_index,
            poi_index,
            poi_coords,
            checkin_counts,
            records,
            sequences,
            tz_offset_secs,
        })
    }

    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_pois(&self) -> usize {
        self.poi_ids.len()
    }

    pub fn n_checkins(&self) -> usize {
        self.records.len()
    }

    /// Per user, the first ceil(ratio * n_u) check-ins by timestamp go to
    /// train, the rest to test. Both halves share this dataset's index
    /// space; sequences are rebuilt per half. A user with a single check-in
    /// contributes it to train and nothing to test.
    pub fn chronological_split(&self, ratio: f64) -> Result<(Dataset, Dataset), DataError> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(DataError::BadSplitRatio { ratio });
        }
        let mut per_user: Vec<Vec<usize>> = alloc::vec![Vec::new(); self.n_users()];
        for (i, r) in self.records.iter().enumerate() {
            per_user[r.user].push(i);
        }
        let mut in_train = alloc::vec![false; self.records.len()];
        for indices in per_user.iter_mut() {
            // Stable sort: timestamp ties keep input order.
            indices.sort_by_key(|&i| self.records[i].timestamp);
            let n = indices.len();
            let n_train = libm::ceil(ratio * n as f64) as usize;
            let n_train = n_train.min(n);
            for &i in indices.iter().take(n_train) {
                in_train[i] = true;
            }
        }
        let train = self.subset(|i| in_train[i]);
        let test = self.subset(|i| !in_train[i]);
        Ok((train, test))
    }

    fn subset(&self, keep: impl Fn(usize) -> bool) -> Dataset {
        let records: Vec<Record> = self
            .records
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, r)| *r)
            .collect();
        let mut checkin_counts = alloc::vec![0u64; self.n_pois()];
        for r in &records {
            checkin_counts[r.poi] += 1;
        }
        let sequences = segment_sequences(&records, self.tz_offset_secs);
        Dataset {
            user_ids: self.user_ids.clone(),
            poi_ids: self.poi_ids.clone(),
            user_index: self.user_index.clone(),
            poi_index: self.poi_index.clone(),
            poi_coords: self.poi_coords.clone(),
            checkin_counts,
            records,
            sequences,
            tz_offset_secs: self.tz_offset_secs,
        }
    }

    /// Per-user membership rows over the POI index space.
    pub fn user_checked_sets(&self) -> Vec<Vec<bool>> {
        let mut sets = alloc::vec![alloc::vec![false; self.n_pois()]; self.n_users()];
        for r in &self.records {
            sets[r.user][r.poi] = true;
        }
        sets
    }

    /// Per POI, the sorted distinct users who checked in there.
    pub fn poi_user_sets(&self) -> Vec<Vec<usize>> {
        let mut sets: Vec<Vec<usize>> = alloc::vec![Vec::new(); self.n_pois()];
        for r in &self.records {
            sets[r.poi].push(r.user);
        }
        for s in sets.iter_mut() {
            s.sort_unstable();
            s.dedup();
        }
        sets
    }

    /// Jaccard similarity of the user sets of two POIs given by id.
    pub fn jaccard_correlation(&self, poi_a: &str, poi_b: &str) -> Result<f64, DataError> {
        let a = *self.poi_index.get(poi_a).ok_or_else(|| DataError::UnknownPoi {
            poi_id: String::from(poi_a),
        })?;
        let b = *self.poi_index.get(poi_b).ok_or_else(|| DataError::UnknownPoi {
            poi_id: String::from(poi_b),
        })?;
        let sets = self.poi_user_sets();
        Ok(jaccard_of_sets(&sets[a], &sets[b]))
    }
}

/// Groups dense records into per-(user, day) sequences ordered by timestamp;
/// timestamp ties keep input order. Total POIs across sequences equals the
/// record count.
pub fn segment_sequences(records: &[Record], tz_offset_secs: i32) -> Vec<DaySequence> {
    let mut order: Vec<usize> = (0..records.len()).collect();
    // Stable by construction: slice sort is stable, so equal keys keep
    // input order.
    order.sort_by_key(|&i| {
        let r = &records[i];
        (r.user, day_key(r.timestamp, tz_offset_secs), r.timestamp)
    });

    let mut sequences: Vec<DaySequence> = Vec::new();
    for &i in &order {
        let r = &records[i];
        let dk = day_key(r.timestamp, tz_offset_secs);
        match sequences.last_mut() {
            Some(seq) if seq.user == r.user && seq.day_key == dk => seq.pois.push(r.poi),
            _ => sequences.push(DaySequence {
                user: r.user,
                day_key: dk,
                state: temporal_state(dk),
                pois: alloc::vec![r.poi],
            }),
        }
    }
    sequences
}

/// Jaccard similarity |A ∩ B| / |A ∪ B| of two sorted deduplicated slices.
pub fn jaccard_of_sets(a: &[usize], b: &[usize]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut i = 0;
    let mut j = 0;
    let mut inter = 0usize;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Mean Jaccard correlations of POI pairs: within sequences, over uniformly
/// sampled random pairs, and over consecutive / nonconsecutive positions.
/// Means are pair-weighted. A statistic with no qualifying pairs is absent.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub mean_sequence_pair: Option<f64>,
    pub mean_random_pair: Option<f64>,
    pub mean_consecutive: Option<f64>,
    pub mean_nonconsecutive: Option<f64>,
}

pub fn sequence_pair_correlation_report(
    dataset: &Dataset,
    n_random_pairs: usize,
    rng: &mut impl Rng,
) -> CorrelationReport {
    let sets = dataset.poi_user_sets();
    let mut seq_sum = 0.0;
    let mut seq_n = 0u64;
    let mut cons_sum = 0.0;
    let mut cons_n = 0u64;
    let mut noncons_sum = 0.0;
    let mut noncons_n = 0u64;

    for seq in &dataset.sequences {
        let pois = &seq.pois;
        for i in 0..pois.len() {
            for j in (i + 1)..pois.len() {
                let jac = jaccard_of_sets(&sets[pois[i]], &sets[pois[j]]);
                seq_sum += jac;
                seq_n += 1;
                if j == i + 1 {
                    cons_sum += jac;
                    cons_n += 1;
                } else {
                    noncons_sum += jac;
                    noncons_n += 1;
                }
            }
        }
    }

    let mut rand_sum = 0.0;
    let mut rand_n = 0u64;
    if dataset.n_pois() >= 2 {
        for _ in 0..n_random_pairs {
            let a = rng.gen_range(0..dataset.n_pois());
            let mut b = rng.gen_range(0..dataset.n_pois() - 1);
            if b >= a {
                b += 1;
            }
            rand_sum += jaccard_of_sets(&sets[a], &sets[b]);
            rand_n += 1;
        }
    }

    let mean = |sum: f64, n: u64| if n > 0 { Some(sum / n as f64) } else { None };
    CorrelationReport {
        mean_sequence_pair: mean(seq_sum, seq_n),
        mean_random_pair: mean(rand_sum, rand_n),
        mean_consecutive: mean(cons_sum, cons_n),
        mean_nonconsecutive: mean(noncons_sum, noncons_n),
    }
}

/// 7x24 matrix of check-in counts by (day of week, hour), Monday first.
pub fn day_hour_histogram(dataset: &Dataset) -> [[u64; 24]; 7] {
    let mut hist = [[0u64; 24]; 7];
    for r in &dataset.records {
        let local = r.timestamp + dataset.tz_offset_secs as i64;
        let dk = local.div_euclid(SECS_PER_DAY);
        let hour = (local.rem_euclid(SECS_PER_DAY) / 3600) as usize;
        hist[day_of_week(dk)][hour] += 1;
    }
    hist
}
