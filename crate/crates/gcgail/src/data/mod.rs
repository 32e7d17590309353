//! Synthetic smart-card panel data: generation, feature extraction, quartile
//! grouping, adopter classification, scenario splits, and file formats.

mod adopters;
mod config;
mod features;
mod generate;
mod grouping;
mod io;
mod split;

pub use adopters::classify_adopters;
pub use config::GeneratorConfig;
pub use features::{
    compute_condition_features, extract_features, infer_home_work, monthly_mode_label,
    ExtractionOutcome, ModeLabel,
};
pub use generate::synthesize_population;
pub use grouping::quartile_grouping;
pub use io::{
    read_profiles, read_trajectories, read_trips, write_profiles, write_trajectories, write_trips,
};
pub use split::{split_and_filter, Scenario, StationUniverse};

use std::collections::BTreeSet;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{ActionLabel, ConditionVector, StateVector};

/// First month of the observation window, relative to the promotion launch.
pub const MONTH_MIN: i32 = -2;
/// Last month of the observation window.
pub const MONTH_MAX: i32 = 13;
/// Number of observed months per passenger.
pub const N_MONTHS: usize = (MONTH_MAX - MONTH_MIN + 1) as usize;

/// Discount window at tap-out: 7:15 (inclusive) to 8:15 (exclusive), in
/// minutes after midnight.
pub const OFFPEAK_START: f64 = 435.0;
pub const OFFPEAK_END: f64 = 495.0;
/// Morning peak window at tap-out: 8:15 to 9:15.
pub const PEAK_END: f64 = 555.0;
/// Early-morning band at tap-out: 6:15 to 7:15.
pub const EARLY_START: f64 = 375.0;
/// Trips tapping in before noon count as morning trips.
pub const MORNING_CUTOFF: f64 = 720.0;

pub fn in_offpeak_window(tap_out: f64) -> bool {
    (OFFPEAK_START..OFFPEAK_END).contains(&tap_out)
}

pub fn in_peak_window(tap_out: f64) -> bool {
    (OFFPEAK_END..PEAK_END).contains(&tap_out)
}

pub fn in_early_band(tap_out: f64) -> bool {
    (EARLY_START..OFFPEAK_START).contains(&tap_out)
}

/// One tap-in/tap-out pair from the fare system. `fare` is the full
/// (undiscounted) amount; the deducted fare is `fare * 0.75` when
/// `discount_applied` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripRecord {
    pub pid: u32,
    pub date: NaiveDate,
    /// Tap-in time, minutes after midnight.
    #[serde(rename = "tin")]
    pub tap_in: f64,
    /// Tap-out time, minutes after midnight.
    #[serde(rename = "tout")]
    pub tap_out: f64,
    #[serde(rename = "orig")]
    pub origin: u32,
    pub dest: u32,
    pub fare: f64,
    #[serde(rename = "disc")]
    pub discount_applied: bool,
}

impl TripRecord {
    pub fn deducted_fare(&self) -> f64 {
        if self.discount_applied {
            self.fare * 0.75
        } else {
            self.fare
        }
    }

    pub fn is_morning(&self) -> bool {
        self.tap_in < MORNING_CUTOFF
    }

    pub fn duration(&self) -> f64 {
        self.tap_out - self.tap_in
    }
}

/// Response archetype flags. A passenger can carry several (for example
/// `Early` plus `Sustained`); non-adopters carry none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdopterType {
    Early,
    Late,
    EarlyMorning,
    MorningPeak,
    Attrition,
    Sustained,
}

/// Ground-truth passenger description produced by the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassengerProfile {
    pub pid: u32,
    #[serde(rename = "home")]
    pub home_station: u32,
    #[serde(rename = "work")]
    pub work_station: u32,
    #[serde(rename = "flex")]
    pub latent_flex: f64,
    #[serde(rename = "con")]
    pub latent_con: f64,
    #[serde(rename = "dis")]
    pub latent_dis: f64,
    #[serde(rename = "types")]
    pub archetype: BTreeSet<AdopterType>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub adoption_month: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub attrition_month: Option<i32>,
}

impl PassengerProfile {
    pub fn is_adopter(&self) -> bool {
        self.adoption_month.is_some()
    }

    /// Ground-truth monthly mode implied by the archetype schedule.
    pub fn scheduled_mode(&self, month: i32) -> bool {
        match self.adoption_month {
            Some(am) if month >= am => self.attrition_month.is_none_or(|at| month < at),
            _ => false,
        }
    }
}

/// One month of one passenger's panel: extracted state plus the recorded
/// departure-time action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyObservation {
    pub month_index: i32,
    pub state: StateVector,
    pub action: ActionLabel,
}

/// A passenger's full ordered panel with their pre-promotion condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertTrajectory {
    pub pid: u32,
    pub observations: Vec<MonthlyObservation>,
    pub condition: ConditionVector,
}

impl ExpertTrajectory {
    pub fn work_station(&self) -> u32 {
        self.observations[0].state.l_work
    }

    /// Monthly mode labels for months 0..=13 (post-launch).
    pub fn post_launch_modes(&self) -> Vec<bool> {
        self.observations
            .iter()
            .filter(|o| o.month_index >= 0)
            .map(|o| o.state.lambda_t)
            .collect()
    }
}

/// Calendar month anchor, e.g. the promotion launch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn parse(s: &str) -> Result<Self> {
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| Error::Config(format!("expected YYYY-MM, got {s:?}")))?;
        let year: i32 = y
            .parse()
            .map_err(|_| Error::Config(format!("bad year in {s:?}")))?;
        let month: u32 = m
            .parse()
            .map_err(|_| Error::Config(format!("bad month in {s:?}")))?;
        if !(1..=12).contains(&month) {
            return Err(Error::Config(format!("month {month} outside 1..=12")));
        }
        Ok(YearMonth { year, month })
    }

    /// The calendar month `offset` months after this one.
    pub fn offset(&self, offset: i32) -> YearMonth {
        let total = self.year * 12 + (self.month as i32 - 1) + offset;
        YearMonth {
            year: total.div_euclid(12),
            month: (total.rem_euclid(12) + 1) as u32,
        }
    }

    /// Month index of `date` relative to this anchor (anchor month = 0).
    pub fn month_index(&self, date: NaiveDate) -> i32 {
        (date.year() - self.year) * 12 + date.month() as i32 - self.month as i32
    }

    /// All Monday-to-Friday dates of the month at `offset` from this anchor.
    pub fn weekdays(&self, offset: i32) -> Vec<NaiveDate> {
        let ym = self.offset(offset);
        let mut days = Vec::with_capacity(23);
        let mut d = NaiveDate::from_ymd_opt(ym.year, ym.month, 1).expect("valid month start");
        while d.month() == ym.month {
            if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
                days.push(d);
            }
            d = d.succ_opt().expect("date in supported range");
        }
        days
    }
}

impl std::fmt::Display for YearMonth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

pub fn is_weekday(date: NaiveDate) -> bool {
    !matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn year_month_arithmetic() {
        let launch = YearMonth::parse("2014-09").unwrap();
        assert_eq!(launch.offset(-2), YearMonth { year: 2014, month: 7 });
        assert_eq!(launch.offset(13), YearMonth { year: 2015, month: 10 });
        assert_eq!(launch.offset(4), YearMonth { year: 2015, month: 1 });
        let d = NaiveDate::from_ymd_opt(2014, 7, 15).unwrap();
        assert_eq!(launch.month_index(d), -2);
        let d = NaiveDate::from_ymd_opt(2015, 10, 1).unwrap();
        assert_eq!(launch.month_index(d), 13);
    }

    #[test]
    fn weekdays_exclude_weekends() {
        let launch = YearMonth::parse("2014-09").unwrap();
        let days = launch.weekdays(0);
        // September 2014 had 22 weekdays.
        assert_eq!(days.len(), 22);
        assert!(days.iter().all(|d| is_weekday(*d)));
    }

    #[test]
    fn scheduled_mode_respects_adoption_and_attrition() {
        let p = PassengerProfile {
            pid: 0,
            home_station: 1,
            work_station: 2,
            latent_flex: 5.0,
            latent_con: 30.0,
            latent_dis: 20.0,
            archetype: BTreeSet::new(),
            adoption_month: Some(3),
            attrition_month: Some(8),
        };
        assert!(!p.scheduled_mode(2));
        assert!(p.scheduled_mode(3));
        assert!(p.scheduled_mode(7));
        assert!(!p.scheduled_mode(8));
        assert!(!p.scheduled_mode(13));
    }

    #[test]
    fn year_month_rejects_bad_input() {
        assert!(YearMonth::parse("2014/09").is_err());
        assert!(YearMonth::parse("2014-13").is_err());
    }
}
