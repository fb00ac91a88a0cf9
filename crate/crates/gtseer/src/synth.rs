//! Synthetic check-in generator with planted structure: POIs live in
//! geographic clusters on the equator, and each user frequents one cluster
//! on weekdays and a different one on weekends. The planted assignment is
//! returned so experiments can score recovered structure against it.

use gtseer_core::checkin::{day_of_week, SECS_PER_DAY};
use gtseer_core::geo::DEGREE_KM_AT_EQUATOR;
use gtseer_core::Checkin;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub users: usize,
    pub pois: usize,
    pub clusters: usize,
    pub days: usize,
    /// Probability that a single check-in is replaced by a uniformly random
    /// POI from anywhere.
    pub noise: f64,
    /// Probability that a user checks in at all on a given day.
    pub participation: f64,
    pub cluster_radius_km: f64,
    /// First simulated day as days since the epoch.
    pub start_day: i64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            users: 100,
            pois: 200,
            clusters: 8,
            days: 60,
            noise: 0.1,
            participation: 0.5,
            cluster_radius_km: 2.0,
            start_day: 14975, // 2011-01-01
            seed: 42,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("need at least 2 clusters, {0} given")]
    TooFewClusters(usize),
    #[error("need at least one POI per cluster ({pois} POIs, {clusters} clusters)")]
    TooFewPois { pois: usize, clusters: usize },
    #[error("cluster radius {radius_km} km overlaps neighbors spaced {spacing_km} km apart")]
    ClustersOverlap { radius_km: f64, spacing_km: f64 },
    #[error("{what} must lie in [0, 1]")]
    BadProbability { what: &'static str },
    #[error("users, days, and radius must be positive")]
    EmptyConfig,
}

/// The planted ground truth behind a generated log.
#[derive(Debug, Clone)]
pub struct SynthTruth {
    pub poi_cluster: Vec<usize>,
    pub user_weekday_cluster: Vec<usize>,
    pub user_weekend_cluster: Vec<usize>,
}

fn validate(cfg: &SynthConfig) -> Result<f64, SynthError> {
    if cfg.clusters < 2 {
        return Err(SynthError::TooFewClusters(cfg.clusters));
    }
    if cfg.pois < cfg.clusters {
        return Err(SynthError::TooFewPois { pois: cfg.pois, clusters: cfg.clusters });
    }
    if cfg.users == 0 || cfg.days == 0 || !(cfg.cluster_radius_km > 0.0) {
        return Err(SynthError::EmptyConfig);
    }
    if !(0.0..=1.0).contains(&cfg.noise) {
        return Err(SynthError::BadProbability { what: "noise" });
    }
    if !(0.0..=1.0).contains(&cfg.participation) || cfg.participation == 0.0 {
        return Err(SynthError::BadProbability { what: "participation" });
    }
    // Adjacent centers sit 360/clusters degrees apart on the equator; the
    // disks must not touch or the geographic classifier loses the planted
    // separation.
    let spacing_km = DEGREE_KM_AT_EQUATOR * 360.0 / cfg.clusters as f64;
    if cfg.cluster_radius_km * 2.0 >= spacing_km {
        return Err(SynthError::ClustersOverlap {
            radius_km: cfg.cluster_radius_km,
            spacing_km,
        });
    }
    Ok(spacing_km)
}

/// Sampling weight for the POI at preference rank r (0 = favorite); a steep
/// power decay so each user concentrates on a few dominant haunts and only
/// occasionally reaches the tail of their cluster.
fn rank_weight(rank: usize) -> f64 {
    1.0 / ((rank + 1) as f64).powf(1.6)
}

pub fn generate(cfg: &SynthConfig) -> Result<(Vec<Checkin>, SynthTruth), SynthError> {
    validate(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let poi_cluster: Vec<usize> = (0..cfg.pois).map(|p| p % cfg.clusters).collect();
    let mut cluster_pois: Vec<Vec<usize>> = vec![Vec::new(); cfg.clusters];
    for (p, &c) in poi_cluster.iter().enumerate() {
        cluster_pois[c].push(p);
    }

    // POI coordinates: the cluster center plus a uniform offset within the
    // radius, converted to degrees at the equator.
    let radius_deg = cfg.cluster_radius_km / DEGREE_KM_AT_EQUATOR;
    let coords: Vec<(f64, f64)> = poi_cluster
        .iter()
        .map(|&c| {
            // Centers are offset half a spacing from -180 so jitter never
            // leaves the valid longitude range.
            let center_lon = (c as f64 + 0.5) * 360.0 / cfg.clusters as f64 - 180.0;
            let lat = rng.gen_range(-radius_deg..=radius_deg);
            let lon = center_lon + rng.gen_range(-radius_deg..=radius_deg);
            (lat, lon)
        })
        .collect();

    // Each cluster has one canonical popularity order; users of a cluster
    // share it up to small perturbations. Co-visited POIs therefore share
    // most of their visitors, the way popular venues do in real corpora.
    let mut cluster_order: Vec<Vec<usize>> = cluster_pois.clone();
    for order in cluster_order.iter_mut() {
        order.shuffle(&mut rng);
    }
    let personal_order = |cluster: usize, rng: &mut ChaCha8Rng| -> Vec<usize> {
        let mut keyed: Vec<(f64, usize)> = cluster_order[cluster]
            .iter()
            .enumerate()
            .map(|(pos, &p)| (pos as f64 + rng.gen_range(-2.5..2.5), p))
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
        keyed.into_iter().map(|(_, p)| p).collect()
    };

    let mut user_weekday = Vec::with_capacity(cfg.users);
    let mut user_weekend = Vec::with_capacity(cfg.users);
    // Per user and state: the cluster's POIs in that user's preference order.
    let mut prefs: Vec<[Vec<usize>; 2]> = Vec::with_capacity(cfg.users);
    for _ in 0..cfg.users {
        let wd = rng.gen_range(0..cfg.clusters);
        let mut we = rng.gen_range(0..cfg.clusters - 1);
        if we >= wd {
            we += 1;
        }
        user_weekday.push(wd);
        user_weekend.push(we);
        let order_wd = personal_order(wd, &mut rng);
        let order_we = personal_order(we, &mut rng);
        prefs.push([order_wd, order_we]);
    }

    let mut checkins = Vec::new();
    for day in cfg.start_day..cfg.start_day + cfg.days as i64 {
        let weekend = day_of_week(day) >= 5;
        for u in 0..cfg.users {
            if !rng.gen_bool(cfg.participation) {
                continue;
            }
            let order = &prefs[u][weekend as usize];
            let visits = rng.gen_range(2..=5usize.min(order.len().max(2)));
            // Weighted sampling without replacement over the preference
            // ranks, so a day never repeats a POI.
            let mut ranks: Vec<usize> = (0..order.len()).collect();
            let mut picked = Vec::with_capacity(visits);
            for _ in 0..visits.min(ranks.len()) {
                let total: f64 = ranks.iter().map(|&r| rank_weight(r)).sum();
                let mut x = rng.gen_range(0.0..total);
                let mut chosen = ranks.len() - 1;
                for (i, &r) in ranks.iter().enumerate() {
                    x -= rank_weight(r);
                    if x < 0.0 {
                        chosen = i;
                        break;
                    }
                }
                picked.push(order[ranks.swap_remove(chosen)]);
            }
            for (i, &poi) in picked.iter().enumerate() {
                let poi = if rng.gen_bool(cfg.noise) {
                    rng.gen_range(0..cfg.pois)
                } else {
                    poi
                };
                // 5400 s steps with sub-hour jitter keep timestamps strictly
                // ascending within the day.
                let ts = day * SECS_PER_DAY
                    + 9 * 3600
                    + i as i64 * 5400
                    + rng.gen_range(0..3600);
                let (lat, lon) = coords[poi];
                checkins.push(Checkin {
                    user_id: format!("u{u}"),
                    poi_id: format!("p{poi}"),
                    timestamp: ts,
                    lat,
                    lon,
                });
            }
        }
    }

    Ok((
        checkins,
        SynthTruth {
            poi_cluster,
            user_weekday_cluster: user_weekday,
            user_weekend_cluster: user_weekend,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gtseer_core::checkin::{day_key, temporal_state, TemporalState};
    use gtseer_core::geo::{distance_km, GeoPoint};
    use std::collections::HashMap;

    fn small() -> SynthConfig {
        SynthConfig {
            users: 20,
            pois: 40,
            clusters: 4,
            days: 30,
            noise: 0.0,
            participation: 1.0,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let (a, _) = generate(&small()).unwrap();
        let (b, _) = generate(&small()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seed_changes_output() {
        let (a, _) = generate(&small()).unwrap();
        let (b, _) = generate(&SynthConfig { seed: 43, ..small() }).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn rejects_overlapping_clusters() {
        let cfg = SynthConfig { clusters: 100, pois: 200, cluster_radius_km: 300.0, ..small() };
        assert!(matches!(generate(&cfg), Err(SynthError::ClustersOverlap { .. })));
    }

    #[test]
    fn rejects_degenerate_configs() {
        assert!(generate(&SynthConfig { clusters: 1, ..small() }).is_err());
        assert!(generate(&SynthConfig { pois: 2, ..small() }).is_err());
        assert!(generate(&SynthConfig { noise: 1.5, ..small() }).is_err());
        assert!(generate(&SynthConfig { users: 0, ..small() }).is_err());
    }

    #[test]
    fn pois_stay_within_their_cluster_radius() {
        let cfg = small();
        let (checkins, truth) = generate(&cfg).unwrap();
        // Every check-in's coordinates sit near its POI's cluster center.
        for c in &checkins {
            let p: usize = c.poi_id[1..].parse().unwrap();
            let cluster = truth.poi_cluster[p];
            let center =
                GeoPoint::new(0.0, (cluster as f64 + 0.5) * 360.0 / cfg.clusters as f64 - 180.0);
            let d = distance_km(GeoPoint::new(c.lat, c.lon), center);
            // Corner of the square offset box is radius * sqrt(2) away.
            assert!(d <= cfg.cluster_radius_km * 1.5, "{d} km from center");
        }
    }

    #[test]
    fn noiseless_users_stay_in_planted_clusters() {
        let cfg = small();
        let (checkins, truth) = generate(&cfg).unwrap();
        for c in &checkins {
            let u: usize = c.user_id[1..].parse().unwrap();
            let p: usize = c.poi_id[1..].parse().unwrap();
            let expect = match temporal_state(day_key(c.timestamp, 0)) {
                TemporalState::Weekday => truth.user_weekday_cluster[u],
                TemporalState::Weekend => truth.user_weekend_cluster[u],
            };
            assert_eq!(truth.poi_cluster[p], expect);
        }
    }

    #[test]
    fn weekday_and_weekend_clusters_differ() {
        let (_, truth) = generate(&small()).unwrap();
        for (wd, we) in truth.user_weekday_cluster.iter().zip(&truth.user_weekend_cluster) {
            assert_ne!(wd, we);
        }
    }

    #[test]
    fn timestamps_strictly_ascend_per_user_day() {
        let (checkins, _) = generate(&small()).unwrap();
        let mut last: HashMap<(String, i64), i64> = HashMap::new();
        for c in &checkins {
            let key = (c.user_id.clone(), day_key(c.timestamp, 0));
            if let Some(&prev) = last.get(&key) {
                assert!(c.timestamp > prev);
            }
            last.insert(key, c.timestamp);
        }
    }

    #[test]
    fn participation_thins_the_log() {
        let full = generate(&small()).unwrap().0.len();
        let half = generate(&SynthConfig { participation: 0.5, ..small() })
            .unwrap()
            .0
            .len();
        assert!((half as f64) < 0.7 * full as f64);
        assert!((half as f64) > 0.3 * full as f64);
    }

    #[test]
    fn coordinates_are_consistent_per_poi() {
        let (checkins, _) = generate(&small()).unwrap();
        let mut seen: HashMap<&str, (f64, f64)> = HashMap::new();
        for c in &checkins {
            let e = seen.entry(&c.poi_id).or_insert((c.lat, c.lon));
            assert_eq!(*e, (c.lat, c.lon));
        }
    }
}
