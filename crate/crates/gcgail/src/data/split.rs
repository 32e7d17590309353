//! Passenger-level train/test splitting and training-set scenario filters.

use std::collections::BTreeSet;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::data::ExpertTrajectory;
use crate::error::{Error, Result};
use crate::rng;

/// Training-data scenario. The test side is never filtered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Entire training split.
    Full,
    /// Keep only trajectories whose work station falls in a random half of
    /// the stations (discount stations kept at the 16/29 ratio).
    HalfStations,
    /// Keep a random percentage of training trajectories (10/30/50/70/90).
    Proportion(u8),
    /// Drop the medium-high flexibility group.
    Wf3,
    /// Drop the low-medium inconvenience group.
    Wc2,
    /// Drop the low-medium travel-distance group.
    Wd2,
    /// Drop all three of the above groups.
    Ges,
}

impl Scenario {
    pub const ALL_NAMES: &'static [&'static str] = &[
        "full",
        "half_stations",
        "p10",
        "p30",
        "p50",
        "p70",
        "p90",
        "wf3",
        "wc2",
        "wd2",
        "ges",
    ];

    pub fn as_str(&self) -> String {
        match self {
            Scenario::Full => "full".into(),
            Scenario::HalfStations => "half_stations".into(),
            Scenario::Proportion(p) => format!("p{p}"),
            Scenario::Wf3 => "wf3".into(),
            Scenario::Wc2 => "wc2".into(),
            Scenario::Wd2 => "wd2".into(),
            Scenario::Ges => "ges".into(),
        }
    }

    /// Group labels excluded from training under this scenario, as
    /// `(feature, label)` pairs.
    pub fn excluded_groups(&self) -> Vec<(&'static str, u8)> {
        match self {
            Scenario::Wf3 => vec![("flex", 3)],
            Scenario::Wc2 => vec![("con", 2)],
            Scenario::Wd2 => vec![("dis", 2)],
            Scenario::Ges => vec![("flex", 3), ("con", 2), ("dis", 2)],
            _ => Vec::new(),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Scenario::Full),
            "half_stations" => Ok(Scenario::HalfStations),
            "wf3" => Ok(Scenario::Wf3),
            "wc2" => Ok(Scenario::Wc2),
            "wd2" => Ok(Scenario::Wd2),
            "ges" => Ok(Scenario::Ges),
            other => {
                if let Some(p) = other.strip_prefix('p') {
                    let pct: u8 = p
                        .parse()
                        .map_err(|_| Error::Validation(format!("unknown scenario {other:?}")))?;
                    if [10, 30, 50, 70, 90].contains(&pct) {
                        return Ok(Scenario::Proportion(pct));
                    }
                }
                Err(Error::Validation(format!(
                    "unknown scenario {other:?}; expected one of {:?}",
                    Scenario::ALL_NAMES
                )))
            }
        }
    }
}

/// Station geometry needed by the spatial scenario.
#[derive(Debug, Clone)]
pub struct StationUniverse {
    pub n_stations: u32,
    pub discount: BTreeSet<u32>,
}

/// Splits passengers 80/20, then applies the scenario filter to the training
/// side only. The split depends on the seed but not the scenario, so every
/// scenario sees the identical test set.
pub fn split_and_filter(
    trajectories: &[ExpertTrajectory],
    scenario: Scenario,
    seed: u64,
    stations: &StationUniverse,
) -> Result<(Vec<ExpertTrajectory>, Vec<ExpertTrajectory>)> {
    if trajectories.is_empty() {
        return Err(Error::Validation("no trajectories to split".into()));
    }
    let mut indices: Vec<usize> = (0..trajectories.len()).collect();
    indices.shuffle(&mut rng::stream(seed, "split", 0));
    let train_n = trajectories.len() * 8 / 10;
    let (train_idx, test_idx) = indices.split_at(train_n);

    let mut train: Vec<ExpertTrajectory> =
        train_idx.iter().map(|&i| trajectories[i].clone()).collect();
    let mut test: Vec<ExpertTrajectory> =
        test_idx.iter().map(|&i| trajectories[i].clone()).collect();
    train.sort_by_key(|t| t.pid);
    test.sort_by_key(|t| t.pid);

    let train = apply_filter(train, scenario, seed, stations)?;
    if train.is_empty() {
        return Err(Error::Config(format!(
            "scenario {} left the training set empty",
            scenario.as_str()
        )));
    }
    Ok((train, test))
}

fn apply_filter(
    train: Vec<ExpertTrajectory>,
    scenario: Scenario,
    seed: u64,
    stations: &StationUniverse,
) -> Result<Vec<ExpertTrajectory>> {
    match scenario {
        Scenario::Full => Ok(train),
        Scenario::HalfStations => {
            let kept = kept_half_stations(seed, stations)?;
            Ok(train
                .into_iter()
                .filter(|t| kept.contains(&t.work_station()))
                .collect())
        }
        Scenario::Proportion(pct) => {
            let mut rng = rng::stream(seed, "proportion", pct as u64);
            let mut shuffled = train;
            shuffled.shuffle(&mut rng);
            let keep = ((pct as f64 / 100.0) * shuffled.len() as f64).round() as usize;
            shuffled.truncate(keep);
            shuffled.sort_by_key(|t| t.pid);
            Ok(shuffled)
        }
        Scenario::Wf3 => Ok(drop_groups(train, &[("flex", 3)])),
        Scenario::Wc2 => Ok(drop_groups(train, &[("con", 2)])),
        Scenario::Wd2 => Ok(drop_groups(train, &[("dis", 2)])),
        Scenario::Ges => Ok(drop_groups(train, &[("flex", 3), ("con", 2), ("dis", 2)])),
    }
}

fn drop_groups(
    train: Vec<ExpertTrajectory>,
    excluded: &[(&str, u8)],
) -> Vec<ExpertTrajectory> {
    train
        .into_iter()
        .filter(|t| {
            !excluded.iter().any(|&(feature, label)| match feature {
                "flex" => t.condition.g_flex == label,
                "con" => t.condition.g_con == label,
                "dis" => t.condition.g_dis == label,
                _ => false,
            })
        })
        .collect()
}

/// The random half of stations kept under the spatial scenario: discount
/// stations at the 16/29 ratio (rounded), the remainder non-discount.
fn kept_half_stations(seed: u64, stations: &StationUniverse) -> Result<BTreeSet<u32>> {
    let mut rng = rng::stream(seed, "half-stations", 0);
    let total_keep = (stations.n_stations / 2) as usize;
    let n_disc = stations.discount.len();
    let keep_disc = ((16.0 * n_disc as f64) / 29.0).round() as usize;
    let keep_disc = keep_disc.min(total_keep).min(n_disc);
    let keep_non = total_keep.saturating_sub(keep_disc);

    let mut disc: Vec<u32> = stations.discount.iter().copied().collect();
    let mut non: Vec<u32> = (0..stations.n_stations)
        .filter(|s| !stations.discount.contains(s))
        .collect();
    if keep_non > non.len() {
        return Err(Error::Config(
            "half_stations scenario needs enough non-discount stations".into(),
        ));
    }
    disc.shuffle(&mut rng);
    non.shuffle(&mut rng);
    Ok(disc
        .into_iter()
        .take(keep_disc)
        .chain(non.into_iter().take(keep_non))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{MonthlyObservation, MONTH_MAX, MONTH_MIN};
    use crate::mdp::{ActionLabel, ConditionVector, StateVector};

    fn toy_trajectory(pid: u32, work: u32, g: [u8; 3]) -> ExpertTrajectory {
        let observations = (MONTH_MIN..=MONTH_MAX)
            .map(|m| MonthlyObservation {
                month_index: m,
                state: StateVector {
                    l_home: 0,
                    l_work: work,
                    d_t: 480.0,
                    e_t: 520.0,
                    c_t: 5.0,
                    b_t: 25.0,
                    m_p_t: m,
                    m_s_t: 0.0,
                    w_u: false,
                    lambda_t: false,
                    lambda_prev: false,
                },
                action: ActionLabel::Peak,
            })
            .collect();
        ExpertTrajectory {
            pid,
            observations,
            condition: ConditionVector {
                flex_raw: 1.0,
                con_raw: 2.0,
                dis_raw: 3.0,
                g_flex: g[0],
                g_con: g[1],
                g_dis: g[2],
            },
        }
    }

    fn toy_population(n: u32) -> Vec<ExpertTrajectory> {
        (0..n)
            .map(|pid| {
                let g = [(pid % 4 + 1) as u8, (pid / 4 % 4 + 1) as u8, (pid / 16 % 4 + 1) as u8];
                toy_trajectory(pid, pid % 20, g)
            })
            .collect()
    }

    fn universe() -> StationUniverse {
        StationUniverse {
            n_stations: 20,
            discount: (7..=12).collect(),
        }
    }

    #[test]
    fn full_split_is_80_20() {
        let pop = toy_population(1000);
        let (train, test) = split_and_filter(&pop, Scenario::Full, 0, &universe()).unwrap();
        assert_eq!(train.len(), 800);
        assert_eq!(test.len(), 200);
    }

    #[test]
    fn group_filter_removes_only_training_side() {
        let pop = toy_population(400);
        let (train_full, test_full) =
            split_and_filter(&pop, Scenario::Full, 1, &universe()).unwrap();
        let (train_wf3, test_wf3) = split_and_filter(&pop, Scenario::Wf3, 1, &universe()).unwrap();
        assert!(train_wf3.iter().all(|t| t.condition.g_flex != 3));
        assert!(train_wf3.len() < train_full.len());
        assert_eq!(test_full, test_wf3);
    }

    #[test]
    fn ges_drops_all_three_groups() {
        let pop = toy_population(400);
        let (train, _) = split_and_filter(&pop, Scenario::Ges, 1, &universe()).unwrap();
        assert!(train
            .iter()
            .all(|t| t.condition.g_flex != 3 && t.condition.g_con != 2 && t.condition.g_dis != 2));
    }

    #[test]
    fn proportion_keeps_requested_count_deterministically() {
        let pop = toy_population(1000);
        let (a, _) = split_and_filter(&pop, Scenario::Proportion(50), 3, &universe()).unwrap();
        let (b, _) = split_and_filter(&pop, Scenario::Proportion(50), 3, &universe()).unwrap();
        assert_eq!(a.len(), 400);
        assert_eq!(a, b);
    }

    #[test]
    fn half_stations_keeps_half_with_discount_ratio() {
        let kept = kept_half_stations(5, &universe()).unwrap();
        assert_eq!(kept.len(), 10);
        let disc_kept = kept.iter().filter(|s| (7..=12).contains(*s)).count();
        // round(16/29 * 6) = 3 discount stations retained.
        assert_eq!(disc_kept, 3);
    }

    #[test]
    fn test_sets_agree_across_scenarios() {
        let pop = toy_population(500);
        let (_, t1) = split_and_filter(&pop, Scenario::Full, 9, &universe()).unwrap();
        let (_, t2) = split_and_filter(&pop, Scenario::HalfStations, 9, &universe()).unwrap();
        let (_, t3) = split_and_filter(&pop, Scenario::Ges, 9, &universe()).unwrap();
        let (_, t4) = split_and_filter(&pop, Scenario::Proportion(10), 9, &universe()).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(t1, t3);
        assert_eq!(t1, t4);
    }

    #[test]
    fn scenario_names_round_trip() {
        for name in Scenario::ALL_NAMES {
            let s: Scenario = name.parse().unwrap();
            assert_eq!(&s.as_str(), name);
        }
        assert!("p42".parse::<Scenario>().is_err());
        assert!("bogus".parse::<Scenario>().is_err());
    }

    #[test]
    fn emptying_filter_is_a_config_error() {
        // Every passenger in flex group 3: wf3 empties the training set.
        let pop: Vec<ExpertTrajectory> =
            (0..50).map(|pid| toy_trajectory(pid, 1, [3, 1, 1])).collect();
        let res = split_and_filter(&pop, Scenario::Wf3, 0, &universe());
        assert!(matches!(res, Err(Error::Config(_))));
    }
}
