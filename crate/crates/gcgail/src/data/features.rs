//! Trip-table feature extraction: home/work inference, monthly mode labels,
//! state vectors, and pre-promotion condition features.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::data::{
    in_offpeak_window, in_peak_window, is_weekday, quartile_grouping, ExpertTrajectory,
    MonthlyObservation, TripRecord, YearMonth, MONTH_MAX, MONTH_MIN, N_MONTHS, OFFPEAK_END,
};
use crate::error::{Error, Result};
use crate::mdp::{ActionLabel, ConditionVector, StateVector};

/// Monthly mode label with a no-data marker for months without morning trips.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeLabel {
    pub label: ActionLabel,
    pub no_data: bool,
}

/// Infers home and work stations from one passenger's trips.
///
/// Home is the modal station among first-trip origins and last-trip
/// destinations per day; work the modal station among first-trip destinations
/// and last-trip origins. Ties break to the smallest station id.
pub fn infer_home_work(trips: &[TripRecord]) -> Result<(u32, u32)> {
    if trips.is_empty() {
        return Err(Error::InsufficientData(
            "cannot infer home/work from an empty trip set".into(),
        ));
    }
    let mut by_day: BTreeMap<NaiveDate, Vec<&TripRecord>> = BTreeMap::new();
    for t in trips {
        by_day.entry(t.date).or_default().push(t);
    }
    let mut home_votes: BTreeMap<u32, usize> = BTreeMap::new();
    let mut work_votes: BTreeMap<u32, usize> = BTreeMap::new();
    for day in by_day.values() {
        let first = day
            .iter()
            .min_by(|a, b| a.tap_in.partial_cmp(&b.tap_in).unwrap())
            .unwrap();
        let last = day
            .iter()
            .max_by(|a, b| a.tap_in.partial_cmp(&b.tap_in).unwrap())
            .unwrap();
        *home_votes.entry(first.origin).or_default() += 1;
        *home_votes.entry(last.dest).or_default() += 1;
        *work_votes.entry(first.dest).or_default() += 1;
        *work_votes.entry(last.origin).or_default() += 1;
    }
    Ok((modal_station(&home_votes), modal_station(&work_votes)))
}

/// BTreeMap iteration is id-ascending, so `>` keeps the smallest id on ties.
fn modal_station(votes: &BTreeMap<u32, usize>) -> u32 {
    let mut best = (u32::MAX, 0usize);
    for (&station, &count) in votes {
        if count > best.1 {
            best = (station, count);
        }
    }
    best.0
}

/// Labels a month off-peak (1) when its discount-window morning trips exceed
/// half its peak-window morning trips. Months without morning trips label 0
/// with `no_data` set.
pub fn monthly_mode_label<'a, I>(month_trips: I) -> ModeLabel
where
    I: IntoIterator<Item = &'a TripRecord>,
{
    let mut any_morning = false;
    let mut offpeak = 0u32;
    let mut peak = 0u32;
    for t in month_trips {
        if !t.is_morning() {
            continue;
        }
        any_morning = true;
        if in_offpeak_window(t.tap_out) {
            offpeak += 1;
        } else if in_peak_window(t.tap_out) {
            peak += 1;
        }
    }
    if !any_morning {
        return ModeLabel {
            label: ActionLabel::Peak,
            no_data: true,
        };
    }
    ModeLabel {
        label: ActionLabel::from_flag(offpeak as f64 > 0.5 * peak as f64),
        no_data: false,
    }
}

/// Raw condition features from the two pre-promotion months:
/// `(flex, con, dis)` = (population std of weekday first-trip tap-ins,
/// mean shift time needed to qualify, mean morning trip duration).
pub fn compute_condition_features(pre_trips: &[&TripRecord]) -> Result<(f64, f64, f64)> {
    let weekday: Vec<&&TripRecord> = pre_trips.iter().filter(|t| is_weekday(t.date)).collect();
    if weekday.is_empty() {
        return Err(Error::InsufficientData(
            "no pre-promotion weekday trips for condition features".into(),
        ));
    }
    let mut first_by_day: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    for t in &weekday {
        let e = first_by_day.entry(t.date).or_insert(f64::INFINITY);
        if t.tap_in < *e {
            *e = t.tap_in;
        }
    }
    let tap_ins: Vec<f64> = first_by_day.values().copied().collect();
    let n = tap_ins.len() as f64;
    let mean = tap_ins.iter().sum::<f64>() / n;
    let flex = (tap_ins.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();

    let morning: Vec<&&&TripRecord> = weekday.iter().filter(|t| t.is_morning()).collect();
    if morning.is_empty() {
        return Err(Error::InsufficientData(
            "no pre-promotion morning trips for condition features".into(),
        ));
    }
    let m = morning.len() as f64;
    let con = morning.iter().map(|t| shift_minutes(t.tap_out)).sum::<f64>() / m;
    let dis = morning.iter().map(|t| t.duration()).sum::<f64>() / m;
    Ok((flex, con, dis))
}

/// Minutes a tap-out must move to reach the discount window: 0 when already
/// eligible (or earlier than the window), otherwise the excess past its end.
fn shift_minutes(tap_out: f64) -> f64 {
    (tap_out - OFFPEAK_END).max(0.0)
}

struct MonthStats {
    d_t: f64,
    e_t: f64,
    c_t: f64,
    b_t: f64,
    m_s_t: f64,
}

/// Rolling statistics of one month's morning trips: mean tap-in, mean
/// tap-out, mean deducted fare, mean shift time, and mean savings over
/// discounted trips (0 when none).
fn month_stats(morning: &[&TripRecord]) -> MonthStats {
    let n = morning.len() as f64;
    let d_t = morning.iter().map(|t| t.tap_in).sum::<f64>() / n;
    let e_t = morning.iter().map(|t| t.tap_out).sum::<f64>() / n;
    let c_t = morning.iter().map(|t| t.deducted_fare()).sum::<f64>() / n;
    let b_t = morning.iter().map(|t| shift_minutes(t.tap_out)).sum::<f64>() / n;
    let discounted: Vec<&&TripRecord> = morning.iter().filter(|t| t.discount_applied).collect();
    let m_s_t = if discounted.is_empty() {
        0.0
    } else {
        discounted.iter().map(|t| t.fare * 0.25).sum::<f64>() / discounted.len() as f64
    };
    MonthStats { d_t, e_t, c_t, b_t, m_s_t }
}

/// Result of feature extraction: trajectories plus the count of passengers
/// excluded for incomplete panels.
#[derive(Debug)]
pub struct ExtractionOutcome {
    pub trajectories: Vec<ExpertTrajectory>,
    pub excluded: usize,
}

/// Builds one trajectory per passenger from the trip table.
///
/// Passengers need every month of the window to carry at least one morning
/// trip (which implies both pre-promotion months); others are excluded and
/// counted. Quartile groups are assigned across all extracted passengers.
pub fn extract_features(
    trips: &[TripRecord],
    launch: YearMonth,
    discount_stations: &BTreeSet<u32>,
) -> Result<ExtractionOutcome> {
    let mut by_pid: BTreeMap<u32, Vec<&TripRecord>> = BTreeMap::new();
    for t in trips {
        by_pid.entry(t.pid).or_default().push(t);
    }

    let per_passenger: Vec<Option<PartialTrajectory>> = by_pid
        .par_iter()
        .map(|(&pid, trips)| extract_passenger(pid, trips, launch, discount_stations))
        .collect();

    let excluded = per_passenger.iter().filter(|p| p.is_none()).count();
    let partials: Vec<PartialTrajectory> = per_passenger.into_iter().flatten().collect();
    if partials.is_empty() {
        return Err(Error::InsufficientData(
            "no passenger had a complete panel".into(),
        ));
    }

    let g_flex = quartile_grouping(&partials.iter().map(|p| p.flex).collect::<Vec<_>>())?;
    let g_con = quartile_grouping(&partials.iter().map(|p| p.con).collect::<Vec<_>>())?;
    let g_dis = quartile_grouping(&partials.iter().map(|p| p.dis).collect::<Vec<_>>())?;

    let trajectories = partials
        .into_iter()
        .enumerate()
        .map(|(i, p)| ExpertTrajectory {
            pid: p.pid,
            observations: p.observations,
            condition: ConditionVector {
                flex_raw: p.flex,
                con_raw: p.con,
                dis_raw: p.dis,
                g_flex: g_flex[i],
                g_con: g_con[i],
                g_dis: g_dis[i],
            },
        })
        .collect();
    Ok(ExtractionOutcome {
        trajectories,
        excluded,
    })
}

struct PartialTrajectory {
    pid: u32,
    observations: Vec<MonthlyObservation>,
    flex: f64,
    con: f64,
    dis: f64,
}

fn extract_passenger(
    pid: u32,
    trips: &[&TripRecord],
    launch: YearMonth,
    discount_stations: &BTreeSet<u32>,
) -> Option<PartialTrajectory> {
    let mut by_month: BTreeMap<i32, Vec<&TripRecord>> = BTreeMap::new();
    for &t in trips {
        let m = launch.month_index(t.date);
        if (MONTH_MIN..=MONTH_MAX).contains(&m) {
            by_month.entry(m).or_default().push(t);
        }
    }

    // Require a complete panel: every month present with morning trips.
    for m in MONTH_MIN..=MONTH_MAX {
        let month = by_month.get(&m)?;
        if !month.iter().any(|t| t.is_morning()) {
            return None;
        }
    }

    let all: Vec<TripRecord> = trips.iter().map(|&t| t.clone()).collect();
    let (home, work) = infer_home_work(&all).ok()?;
    let w_u = discount_stations.contains(&work);

    let pre: Vec<&TripRecord> = by_month
        .range(MONTH_MIN..0)
        .flat_map(|(_, v)| v.iter().copied())
        .collect();
    let (flex, con, dis) = compute_condition_features(&pre).ok()?;

    let modes: Vec<ActionLabel> = (MONTH_MIN..=MONTH_MAX)
        .map(|m| monthly_mode_label(by_month[&m].iter().copied()).label)
        .collect();

    let mut observations = Vec::with_capacity(N_MONTHS);
    for (k, m) in (MONTH_MIN..=MONTH_MAX).enumerate() {
        let morning: Vec<&TripRecord> = by_month[&m]
            .iter()
            .copied()
            .filter(|t| t.is_morning())
            .collect();
        let MonthStats { d_t, e_t, c_t, b_t, m_s_t } = month_stats(&morning);
        let lambda_t = modes[k] == ActionLabel::OffPeak;
        // The first month bootstraps lambda_prev with its own label.
        let lambda_prev = if k == 0 {
            lambda_t
        } else {
            modes[k - 1] == ActionLabel::OffPeak
        };
        // The recorded action is the next month's mode: the departure-time
        // choice taken from this state. The final month keeps its own mode.
        let action = if k + 1 < N_MONTHS { modes[k + 1] } else { modes[k] };
        observations.push(MonthlyObservation {
            month_index: m,
            state: StateVector {
                l_home: home,
                l_work: work,
                d_t,
                e_t,
                c_t,
                b_t,
                m_p_t: m,
                m_s_t,
                w_u,
                lambda_t,
                lambda_prev,
            },
            action,
        });
    }

    Some(PartialTrajectory {
        pid,
        observations,
        flex,
        con,
        dis,
    })
}
