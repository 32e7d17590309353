//! The monthly travel-decision MDP: state features, binary departure-time
//! action, deterministic month-to-month transition, and network input
//! encoding in three conditioning modes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of state features fed to the networks before conditioning.
pub const STATE_DIM: usize = 11;
/// Number of raw condition features (flexibility, inconvenience, distance).
pub const COND_DIM: usize = 3;
/// Number of quartile groups per condition feature.
pub const N_GROUPS: usize = 4;

/// Indices of pass-through binary slots in the canonical state layout.
const BINARY_SLOTS: [usize; 3] = [8, 9, 10];
/// Normalized features are clipped to this symmetric range.
const CLIP: f64 = 5.0;

/// Per-month context of one passenger.
///
/// Canonical array layout (used by the trajectory files and the normalizer):
/// `[l_home, l_work, d_t, e_t, c_t, b_t, m_p_t, m_s_t, w_u, lambda_t,
/// lambda_prev]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    /// Inferred home station id.
    pub l_home: u32,
    /// Inferred work station id.
    pub l_work: u32,
    /// Average morning tap-in time, minutes after midnight.
    pub d_t: f64,
    /// Average morning tap-out time, minutes after midnight.
    pub e_t: f64,
    /// Average deducted fare for morning trips.
    pub c_t: f64,
    /// Average minimum shift time to qualify for the discount, minutes.
    pub b_t: f64,
    /// Months since the promotion launch (negative before launch).
    pub m_p_t: i32,
    /// Average monetary savings from the incentive this month.
    pub m_s_t: f64,
    /// Whether the work station is a designated discount station.
    pub w_u: bool,
    /// Latest monthly mode: true = off-peak month.
    pub lambda_t: bool,
    /// Previous month's mode.
    pub lambda_prev: bool,
}

impl StateVector {
    pub fn to_array(&self) -> [f64; STATE_DIM] {
        [
            self.l_home as f64,
            self.l_work as f64,
            self.d_t,
            self.e_t,
            self.c_t,
            self.b_t,
            self.m_p_t as f64,
            self.m_s_t,
            self.w_u as u8 as f64,
            self.lambda_t as u8 as f64,
            self.lambda_prev as u8 as f64,
        ]
    }

    pub fn from_array(a: &[f64; STATE_DIM]) -> Result<Self> {
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite state entry".into()));
        }
        let as_flag = |x: f64, name: &str| -> Result<bool> {
            if x == 0.0 {
                Ok(false)
            } else if x == 1.0 {
                Ok(true)
            } else {
                Err(Error::Validation(format!("{name} must be 0 or 1, got {x}")))
            }
        };
        Ok(StateVector {
            l_home: a[0] as u32,
            l_work: a[1] as u32,
            d_t: a[2],
            e_t: a[3],
            c_t: a[4],
            b_t: a[5],
            m_p_t: a[6] as i32,
            m_s_t: a[7],
            w_u: as_flag(a[8], "w_u")?,
            lambda_t: as_flag(a[9], "lambda_t")?,
            lambda_prev: as_flag(a[10], "lambda_prev")?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_t > self.e_t {
            return Err(Error::Validation(format!(
                "d_t {} exceeds e_t {}",
                self.d_t, self.e_t
            )));
        }
        if self.c_t < 0.0 || self.m_s_t < 0.0 || self.b_t < 0.0 {
            return Err(Error::Validation(
                "c_t, m_s_t, and b_t must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Monthly departure-time choice: 1 = off-peak month, 0 = otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionLabel {
    Peak,
    OffPeak,
}

impl ActionLabel {
    pub fn value(self) -> u8 {
        match self {
            ActionLabel::Peak => 0,
            ActionLabel::OffPeak => 1,
        }
    }

    pub fn from_value(v: u8) -> Result<Self> {
        match v {
            0 => Ok(ActionLabel::Peak),
            1 => Ok(ActionLabel::OffPeak),
            other => Err(Error::Validation(format!("action must be 0 or 1, got {other}"))),
        }
    }

    pub fn from_flag(flag: bool) -> Self {
        if flag {
            ActionLabel::OffPeak
        } else {
            ActionLabel::Peak
        }
    }
}

/// Raw pre-promotion condition features and their quartile group labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionVector {
    pub flex_raw: f64,
    pub con_raw: f64,
    pub dis_raw: f64,
    /// Quartile labels in {1, 2, 3, 4}.
    pub g_flex: u8,
    pub g_con: u8,
    pub g_dis: u8,
}

impl ConditionVector {
    pub fn raw(&self) -> [f64; COND_DIM] {
        [self.flex_raw, self.con_raw, self.dis_raw]
    }

    pub fn groups(&self) -> [u8; COND_DIM] {
        [self.g_flex, self.g_con, self.g_dis]
    }

    pub fn validate(&self) -> Result<()> {
        for g in self.groups() {
            if !(1..=N_GROUPS as u8).contains(&g) {
                return Err(Error::Validation(format!("group label {g} outside 1..=4")));
            }
        }
        Ok(())
    }
}

/// How condition information is appended to network inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditioningMode {
    /// State features only (GAIL).
    Unconditioned,
    /// State plus z-scored raw condition values (cGAIL).
    RawConditioned,
    /// State plus one-hot quartile group blocks (gcGAIL).
    GroupConditioned,
}

impl ConditioningMode {
    pub fn encoded_len(self) -> usize {
        match self {
            ConditioningMode::Unconditioned => STATE_DIM,
            ConditioningMode::RawConditioned => STATE_DIM + COND_DIM,
            ConditioningMode::GroupConditioned => STATE_DIM + COND_DIM * N_GROUPS,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ConditioningMode::Unconditioned => "unconditioned",
            ConditioningMode::RawConditioned => "raw_conditioned",
            ConditioningMode::GroupConditioned => "group_conditioned",
        }
    }
}

/// A network-ready input vector tagged with its conditioning mode.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedInput {
    pub features: Vec<f64>,
    pub mode: ConditioningMode,
}

/// Deterministic monthly transition.
///
/// The next month advances `m_p_t`, shifts the mode history (`lambda_prev`
/// takes the old `lambda_t`, `lambda_t` takes the chosen action), and pulls
/// the next month's rolling trip statistics from `next_month`, which is the
/// independently observed state of month `m_p_t + 1`. Home, work, and the
/// discount-station flag never change. `None` for `next_month` signals the
/// panel end and terminates the episode.
pub fn transition(
    s: &StateVector,
    a: ActionLabel,
    next_month: Option<&StateVector>,
) -> Option<StateVector> {
    let next = next_month?;
    Some(StateVector {
        l_home: s.l_home,
        l_work: s.l_work,
        d_t: next.d_t,
        e_t: next.e_t,
        c_t: next.c_t,
        b_t: next.b_t,
        m_p_t: s.m_p_t + 1,
        m_s_t: next.m_s_t,
        w_u: s.w_u,
        lambda_t: a == ActionLabel::OffPeak,
        lambda_prev: s.lambda_t,
    })
}

/// Z-score normalization statistics fitted on training data.
///
/// Binary slots pass through unchanged; zero-variance features normalize to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub state_mean: Vec<f64>,
    pub state_std: Vec<f64>,
    pub cond_mean: Vec<f64>,
    pub cond_std: Vec<f64>,
}

impl Normalizer {
    /// Fits means and standard deviations from training rows. Condition rows
    /// are per passenger, state rows per (passenger, month).
    pub fn fit<S, C>(state_rows: S, cond_rows: C) -> Result<Self>
    where
        S: IntoIterator<Item = [f64; STATE_DIM]>,
        C: IntoIterator<Item = [f64; COND_DIM]>,
    {
        let (state_mean, state_std) = moments::<STATE_DIM, _>(state_rows)?;
        let (cond_mean, cond_std) = moments::<COND_DIM, _>(cond_rows)?;
        let mut n = Normalizer {
            state_mean,
            state_std,
            cond_mean,
            cond_std,
        };
        for &slot in &BINARY_SLOTS {
            n.state_mean[slot] = 0.0;
            n.state_std[slot] = 1.0;
        }
        Ok(n)
    }

    /// Encodes a state (and optionally its condition) for the given mode.
    pub fn encode(
        &self,
        s: &StateVector,
        c: &ConditionVector,
        mode: ConditioningMode,
    ) -> Result<EncodedInput> {
        let mut features = Vec::with_capacity(mode.encoded_len());
        for (i, x) in s.to_array().iter().enumerate() {
            features.push(clip((x - self.state_mean[i]) / self.state_std[i]));
        }
        match mode {
            ConditioningMode::Unconditioned => {}
            ConditioningMode::RawConditioned => {
                for (i, x) in c.raw().iter().enumerate() {
                    features.push(clip((x - self.cond_mean[i]) / self.cond_std[i]));
                }
            }
            ConditioningMode::GroupConditioned => {
                c.validate()?;
                for g in c.groups() {
                    let mut block = [0.0; N_GROUPS];
                    block[(g - 1) as usize] = 1.0;
                    features.extend_from_slice(&block);
                }
            }
        }
        debug_assert_eq!(features.len(), mode.encoded_len());
        Ok(EncodedInput { features, mode })
    }
}

fn moments<const D: usize, I>(rows: I) -> Result<(Vec<f64>, Vec<f64>)>
where
    I: IntoIterator<Item = [f64; D]>,
{
    let mut n = 0usize;
    let mut sum = vec![0.0; D];
    let mut sumsq = vec![0.0; D];
    for row in rows {
        for i in 0..D {
            sum[i] += row[i];
            sumsq[i] += row[i] * row[i];
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::State(
            "normalizer statistics requested before fitting data was provided".into(),
        ));
    }
    let inv = 1.0 / n as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s * inv).collect();
    let std: Vec<f64> = sumsq
        .iter()
        .zip(&mean)
        .map(|(sq, m)| {
            let var = (sq * inv - m * m).max(0.0);
            let s = var.sqrt();
            // Zero-variance features normalize to 0 via unit std.
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    Ok((mean, std))
}

fn clip(x: f64) -> f64 {
    x.clamp(-CLIP, CLIP)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_state(m: i32, lt: bool, lp: bool) -> StateVector {
        StateVector {
            l_home: 3,
            l_work: 12,
            d_t: 470.0,
            e_t: 505.0,
            c_t: 9.5,
            b_t: 10.0,
            m_p_t: m,
            m_s_t: 0.0,
            w_u: true,
            lambda_t: lt,
            lambda_prev: lp,
        }
    }

    fn sample_cond() -> ConditionVector {
        ConditionVector {
            flex_raw: 6.0,
            con_raw: 20.0,
            dis_raw: 35.0,
            g_flex: 3,
            g_con: 2,
            g_dis: 1,
        }
    }

    #[test]
    fn transition_shifts_mode_history_and_advances_month() {
        let s = sample_state(3, false, true);
        let mut next_obs = sample_state(4, true, false);
        next_obs.d_t = 450.0;
        next_obs.e_t = 480.0;
        let next = transition(&s, ActionLabel::OffPeak, Some(&next_obs)).unwrap();
        assert_eq!(next.m_p_t, 4);
        assert!(next.lambda_t);
        assert!(!next.lambda_prev);
        assert_eq!(next.d_t, 450.0);
        assert_eq!(next.e_t, 480.0);
        assert_eq!(next.l_home, s.l_home);
        assert_eq!(next.l_work, s.l_work);
        assert_eq!(next.w_u, s.w_u);
    }

    #[test]
    fn transition_terminates_at_panel_end() {
        let s = sample_state(13, true, true);
        assert!(transition(&s, ActionLabel::Peak, None).is_none());
    }

    #[test]
    fn transition_is_pure() {
        let s = sample_state(0, true, false);
        let next_obs = sample_state(1, false, true);
        let a = transition(&s, ActionLabel::OffPeak, Some(&next_obs)).unwrap();
        let b = transition(&s, ActionLabel::OffPeak, Some(&next_obs)).unwrap();
        assert_eq!(a, b);
    }

    fn fitted_on_single_state() -> Normalizer {
        let s = sample_state(2, false, false);
        Normalizer::fit(
            vec![s.to_array(), s.to_array()],
            vec![sample_cond().raw(), sample_cond().raw()],
        )
        .unwrap()
    }

    #[test]
    fn feature_at_training_mean_normalizes_to_zero() {
        let norm = fitted_on_single_state();
        let enc = norm
            .encode(
                &sample_state(2, false, false),
                &sample_cond(),
                ConditioningMode::Unconditioned,
            )
            .unwrap();
        // Constant features normalize to 0 by the zero-variance rule.
        for (i, v) in enc.features.iter().enumerate() {
            if BINARY_SLOTS.contains(&i) {
                continue;
            }
            assert_eq!(*v, 0.0, "slot {i}");
        }
    }

    #[test]
    fn binary_slots_pass_through() {
        let norm = fitted_on_single_state();
        let enc = norm
            .encode(
                &sample_state(2, true, false),
                &sample_cond(),
                ConditioningMode::Unconditioned,
            )
            .unwrap();
        assert_eq!(enc.features[8], 1.0); // w_u
        assert_eq!(enc.features[9], 1.0); // lambda_t
        assert_eq!(enc.features[10], 0.0); // lambda_prev
    }

    #[test]
    fn encoded_lengths_match_mode() {
        let norm = fitted_on_single_state();
        let s = sample_state(1, false, true);
        let c = sample_cond();
        for (mode, len) in [
            (ConditioningMode::Unconditioned, 11),
            (ConditioningMode::RawConditioned, 14),
            (ConditioningMode::GroupConditioned, 23),
        ] {
            assert_eq!(norm.encode(&s, &c, mode).unwrap().features.len(), len);
        }
    }

    #[test]
    fn group_three_one_hot_block() {
        let norm = fitted_on_single_state();
        let enc = norm
            .encode(
                &sample_state(1, false, false),
                &sample_cond(),
                ConditioningMode::GroupConditioned,
            )
            .unwrap();
        // flex block starts at 11; g_flex = 3 -> [0, 0, 1, 0]
        assert_eq!(&enc.features[11..15], &[0.0, 0.0, 1.0, 0.0]);
        // con block, g_con = 2
        assert_eq!(&enc.features[15..19], &[0.0, 1.0, 0.0, 0.0]);
        // dis block, g_dis = 1
        assert_eq!(&enc.features[19..23], &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn unknown_group_label_is_rejected() {
        let norm = fitted_on_single_state();
        let mut c = sample_cond();
        c.g_con = 5;
        let res = norm.encode(
            &sample_state(1, false, false),
            &c,
            ConditioningMode::GroupConditioned,
        );
        assert!(matches!(res, Err(Error::Validation(_))));
    }

    #[test]
    fn normalized_values_are_clipped() {
        let s = sample_state(2, false, false);
        let mut far = s;
        far.c_t = 1e9;
        // Two distinct rows so c_t has nonzero variance.
        let mut other = s;
        other.c_t = 10.0;
        let norm = Normalizer::fit(
            vec![s.to_array(), other.to_array()],
            vec![sample_cond().raw(), sample_cond().raw()],
        )
        .unwrap();
        let enc = norm
            .encode(&far, &sample_cond(), ConditioningMode::Unconditioned)
            .unwrap();
        assert!(enc.features.iter().all(|v| (-5.0..=5.0).contains(v)));
        assert_eq!(enc.features[4], 5.0);
    }

    #[test]
    fn fit_on_empty_data_is_a_state_error() {
        let res = Normalizer::fit(Vec::<[f64; STATE_DIM]>::new(), Vec::<[f64; COND_DIM]>::new());
        assert!(matches!(res, Err(Error::State(_))));
    }

    #[test]
    fn state_array_round_trip() {
        let s = sample_state(-2, true, false);
        let back = StateVector::from_array(&s.to_array()).unwrap();
        assert_eq!(s, back);
    }
}
