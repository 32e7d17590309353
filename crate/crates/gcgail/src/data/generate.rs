//! Ground-truth population synthesis.
//!
//! Each passenger commutes home -> work every weekday morning and back every
//! evening over months -2..=13 around the promotion launch. Their natural
//! tap-out band (early-morning, morning-peak, or late), timing noise, and
//! commute length are drawn per passenger; adoption of the off-peak discount
//! follows a logistic propensity over the latent traits with a geometric
//! adoption-month hazard, optionally reverting at an attrition month.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::data::{
    AdopterType, GeneratorConfig, PassengerProfile, TripRecord, YearMonth, MONTH_MAX, MONTH_MIN,
    OFFPEAK_END, OFFPEAK_START,
};
use crate::error::Result;
use crate::rng;

/// Natural morning tap-out band of a passenger before adoption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Band {
    Early,
    Peak,
    Late,
}

/// Generates the full trip table and ground-truth profiles.
///
/// Deterministic in `(cfg, seed)`: every passenger draws from an RNG stream
/// keyed by `(seed, pid)`, so generation parallelizes without changing output.
pub fn synthesize_population(
    cfg: &GeneratorConfig,
    seed: u64,
) -> Result<(Vec<TripRecord>, Vec<PassengerProfile>)> {
    cfg.validate()?;
    let launch = cfg.launch()?;
    let discount = cfg.discount_set();

    // Per-station congestion factors scale trip durations, giving stations
    // idiosyncratic travel times beyond pure line distance.
    let mut st_rng = rng::stream(seed, "stations", 0);
    let congestion: Vec<f64> = (0..cfg.n_stations)
        .map(|_| st_rng.random_range(0.85..1.25))
        .collect();

    let weekday_cache: Vec<Vec<chrono::NaiveDate>> = (MONTH_MIN..=MONTH_MAX)
        .map(|m| launch.weekdays(m))
        .collect();

    let per_passenger: Vec<(PassengerProfile, Vec<TripRecord>)> = (0..cfg.n_passengers as u32)
        .into_par_iter()
        .map(|pid| {
            let mut rng = rng::stream(seed, "passenger", pid as u64);
            synthesize_passenger(pid, cfg, &launch, &discount, &congestion, &weekday_cache, &mut rng)
        })
        .collect();

    let mut trips = Vec::with_capacity(per_passenger.iter().map(|(_, t)| t.len()).sum());
    let mut profiles = Vec::with_capacity(per_passenger.len());
    for (profile, mut passenger_trips) in per_passenger {
        profiles.push(profile);
        trips.append(&mut passenger_trips);
    }
    Ok((trips, profiles))
}

fn synthesize_passenger(
    pid: u32,
    cfg: &GeneratorConfig,
    _launch: &YearMonth,
    discount: &BTreeSet<u32>,
    congestion: &[f64],
    weekday_cache: &[Vec<chrono::NaiveDate>],
    rng: &mut ChaCha12Rng,
) -> (PassengerProfile, Vec<TripRecord>) {
    let s = cfg.n_stations;

    // Home uniform; work weighted toward the discount core, never equal to home.
    let home = rng.random_range(0..s);
    let work = loop {
        let w = weighted_station(s, discount, cfg.work_discount_weight, rng);
        if w != home {
            break w;
        }
    };

    let sigma = rng.random_range(cfg.flex_min..cfg.flex_max);
    let band = sample_band(&cfg.band_weights, rng);

    let dist = home.abs_diff(work).max(1) as f64;
    let duration_mean =
        cfg.duration_base + cfg.duration_per_station * dist * congestion[work as usize];

    // Natural tap-out center, placed with a 3-sigma margin so the monthly mode
    // label stays out of the discount window before adoption.
    let mu_natural = match band {
        Band::Early => rng.random_range(378.0..(OFFPEAK_START - 3.0 * sigma)),
        Band::Peak => rng.random_range((OFFPEAK_END + 3.0 * sigma)..552.0),
        Band::Late => rng.random_range((558.0 + 3.0 * sigma)..660.0),
    };
    // Adopted tap-out center inside the window with a 2.5-sigma margin.
    let mu_adopted =
        rng.random_range((OFFPEAK_START + 2.5 * sigma)..(OFFPEAK_END - 2.5 * sigma));

    let latent_flex = sigma;
    let latent_con = expected_shift(mu_natural, sigma);
    let latent_dis = duration_mean;

    let logit = cfg.beta0
        + cfg.beta_flex * latent_flex
        + cfg.beta_con * latent_con
        + cfg.beta_dis * latent_dis;
    let propensity = 1.0 / (1.0 + (-logit).exp());

    let is_adopter = rng.random::<f64>() < propensity;
    let (adoption_month, attrition_month) = if is_adopter {
        let hazard = (cfg.hazard_scale * propensity).clamp(cfg.hazard_min, cfg.hazard_max);
        let mut month = 0i32;
        while month < 12 && rng.random::<f64>() >= hazard {
            month += 1;
        }
        let attrition = if month <= 10 && rng.random::<f64>() < cfg.attrition_prob {
            Some(rng.random_range(month + 2..=MONTH_MAX))
        } else {
            None
        };
        (Some(month), attrition)
    } else {
        (None, None)
    };

    let mut archetype = BTreeSet::new();
    if let Some(am) = adoption_month {
        archetype.insert(if am <= 1 { AdopterType::Early } else { AdopterType::Late });
        match band {
            Band::Early => {
                archetype.insert(AdopterType::EarlyMorning);
            }
            Band::Peak => {
                archetype.insert(AdopterType::MorningPeak);
            }
            Band::Late => {}
        }
        archetype.insert(if attrition_month.is_some() {
            AdopterType::Attrition
        } else {
            AdopterType::Sustained
        });
    }

    let profile = PassengerProfile {
        pid,
        home_station: home,
        work_station: work,
        latent_flex,
        latent_con,
        latent_dis,
        archetype,
        adoption_month,
        attrition_month,
    };

    let fare = cfg.fare_base + cfg.fare_per_station * dist;
    let work_is_discount = discount.contains(&work);

    let mut trips = Vec::with_capacity(weekday_cache.iter().map(Vec::len).sum::<usize>() * 2);
    for (i, days) in weekday_cache.iter().enumerate() {
        let month = MONTH_MIN + i as i32;
        let mode_on = profile.scheduled_mode(month);
        let mu = if mode_on { mu_adopted } else { mu_natural };
        for &date in days {
            let z: f64 = StandardNormal.sample(rng);
            let tap_out = mu + sigma * z;
            let dz: f64 = StandardNormal.sample(rng);
            let duration = (duration_mean * (1.0 + cfg.duration_noise_frac * dz)).max(3.0);
            let tap_out = tap_out.max(duration + 1.0);
            let tap_in = tap_out - duration;
            let discounted = month >= 0
                && (OFFPEAK_START..OFFPEAK_END).contains(&tap_out)
                && work_is_discount;
            trips.push(TripRecord {
                pid,
                date,
                tap_in,
                tap_out,
                origin: home,
                dest: work,
                fare,
                discount_applied: discounted,
            });

            let ez: f64 = StandardNormal.sample(rng);
            let evening_in = 1040.0 + 20.0 * ez;
            let edz: f64 = StandardNormal.sample(rng);
            let evening_dur = (duration_mean * (1.0 + cfg.duration_noise_frac * edz)).max(3.0);
            let evening_out = evening_in + evening_dur;
            let evening_discounted = month >= 0
                && (OFFPEAK_START..OFFPEAK_END).contains(&evening_out)
                && discount.contains(&home);
            trips.push(TripRecord {
                pid,
                date,
                tap_in: evening_in,
                tap_out: evening_out,
                origin: work,
                dest: home,
                fare,
                discount_applied: evening_discounted,
            });
        }
    }
    (profile, trips)
}

fn weighted_station(
    n_stations: u32,
    discount: &BTreeSet<u32>,
    discount_weight: f64,
    rng: &mut ChaCha12Rng,
) -> u32 {
    let total: f64 = (0..n_stations)
        .map(|s| if discount.contains(&s) { discount_weight } else { 1.0 })
        .sum();
    let mut u = rng.random::<f64>() * total;
    for s in 0..n_stations {
        let w = if discount.contains(&s) { discount_weight } else { 1.0 };
        if u < w {
            return s;
        }
        u -= w;
    }
    n_stations - 1
}

fn sample_band(weights: &[f64; 3], rng: &mut ChaCha12Rng) -> Band {
    let u = rng.random::<f64>();
    if u < weights[0] {
        Band::Early
    } else if u < weights[0] + weights[1] {
        Band::Peak
    } else {
        Band::Late
    }
}

/// `E[max(0, X - end)]` for `X ~ N(mu, sigma^2)` with `end` the discount-window
/// end: the expected minimum shift time needed to qualify, mirroring the `b_t`
/// formula on observed trips.
fn expected_shift(mu: f64, sigma: f64) -> f64 {
    let z = (mu - OFFPEAK_END) / sigma;
    sigma * std_normal_pdf(z) + (mu - OFFPEAK_END) * std_normal_cdf(z)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Abramowitz–Stegun 7.1.26 approximation, max absolute error ~1.5e-7.
fn std_normal_cdf(z: f64) -> f64 {
    let x = z / std::f64::consts::SQRT_2;
    let (sign, x) = if x < 0.0 { (-1.0, -x) } else { (1.0, x) };
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erf = 1.0 - poly * (-x * x).exp();
    0.5 * (1.0 + sign * erf)
}
