//! Change-point adopter classification from extracted trajectories.

use std::collections::{BTreeMap, BTreeSet};

use crate::data::{in_early_band, in_peak_window, AdopterType, ExpertTrajectory};

/// Classifies every passenger into adopter-type flags (empty set =
/// non-adopter).
///
/// The change point is the first post-launch month that starts two
/// consecutive off-peak months. Early adopters switch in months 0-1, late
/// adopters afterwards. Attrition means the trailing run of peak months
/// starts at least two months after the change point; sustained means
/// off-peak persists to the panel end. The early-morning/morning-peak
/// distinction comes from which band held the majority of pre-adoption
/// monthly mean tap-outs.
pub fn classify_adopters(
    trajectories: &[ExpertTrajectory],
) -> BTreeMap<u32, BTreeSet<AdopterType>> {
    trajectories
        .iter()
        .map(|t| (t.pid, classify_one(t)))
        .collect()
}

fn classify_one(traj: &ExpertTrajectory) -> BTreeSet<AdopterType> {
    let mut flags = BTreeSet::new();
    let modes = traj.post_launch_modes();
    let Some(change_point) = change_point(&modes) else {
        return flags;
    };

    flags.insert(if change_point <= 1 {
        AdopterType::Early
    } else {
        AdopterType::Late
    });

    if modes[change_point as usize..].iter().all(|&m| m) {
        flags.insert(AdopterType::Sustained);
    } else if let Some(k) = trailing_peak_run_start(&modes) {
        if k >= change_point + 2 {
            flags.insert(AdopterType::Attrition);
        }
    }

    // Band from pre-adoption months (including the pre-launch period), using
    // the monthly mean tap-out as the band proxy. Strict majority; ties (for
    // example late-band commuters matching neither window) get no band flag.
    let mut early = 0u32;
    let mut peak = 0u32;
    for obs in &traj.observations {
        if obs.month_index >= change_point {
            break;
        }
        if in_early_band(obs.state.e_t) {
            early += 1;
        } else if in_peak_window(obs.state.e_t) {
            peak += 1;
        }
    }
    if early > peak {
        flags.insert(AdopterType::EarlyMorning);
    } else if peak > early {
        flags.insert(AdopterType::MorningPeak);
    }

    flags
}

/// Smallest post-launch month index starting two consecutive off-peak months.
fn change_point(modes: &[bool]) -> Option<i32> {
    modes
        .windows(2)
        .position(|w| w[0] && w[1])
        .map(|i| i as i32)
}

/// Start month of the trailing all-peak run, if the panel ends in peak mode.
fn trailing_peak_run_start(modes: &[bool]) -> Option<i32> {
    if *modes.last()? {
        return None;
    }
    let mut k = modes.len() - 1;
    while k > 0 && !modes[k - 1] {
        k -= 1;
    }
    Some(k as i32)
}
