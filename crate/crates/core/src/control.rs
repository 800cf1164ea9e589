//! Control functions `c(t)` that rescale the Hamiltonian to `[1 + c(t)] H(t)`.
//!
//! Square-pulse trains are piecewise constant and become [`ControlSegment`]
//! lists; delta kicks are kept as discrete events in a [`KickSchedule`] and
//! applied as exact kick unitaries by the propagator.
//!
//! Random amplitudes come from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha
//! 0.9), one `f64` draw in `[0, 1)` per randomized segment, in segment order.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the random generator recorded in run metadata.
pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng::seed_from_u64 (rand_chacha 0.9); stream seeds via splitmix64(master, grid index, realization)";

const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseKind {
    #[serde(alias = "none")]
    NoControl,
    PositiveSquare,
    ZeroEnergyAlternating,
    DeltaKickPositive,
    DeltaKickAlternating,
}

impl PulseKind {
    pub fn is_square(self) -> bool {
        matches!(self, PulseKind::PositiveSquare | PulseKind::ZeroEnergyAlternating)
    }

    pub fn is_kick(self) -> bool {
        matches!(self, PulseKind::DeltaKickPositive | PulseKind::DeltaKickAlternating)
    }
}

/// Description of a control function. For kick kinds `dt` is the mean kick
/// interval and `p` the interval jitter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseTrain {
    pub kind: PulseKind,
    #[serde(rename = "J", default)]
    pub amplitude: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_dt() -> f64 {
    0.005
}

impl PulseTrain {
    pub fn none() -> Self {
        Self { kind: PulseKind::NoControl, amplitude: 0.0, dt: default_dt(), p: 0.0, seed: 0 }
    }

    pub fn new(kind: PulseKind, amplitude: f64, dt: f64, p: f64, seed: u64) -> Self {
        Self { kind, amplitude, dt, p, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::InvalidParameter(format!("J must be >= 0, got {}", self.amplitude)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(0.0..=2.0).contains(&self.p) {
            return Err(Error::InvalidParameter(format!("p must lie in [0, 2], got {}", self.p)));
        }
        if self.kind.is_kick() && self.p >= 2.0 {
            return Err(Error::InvalidParameter("kick jitter p must be < 2".into()));
        }
        Ok(())
    }
}

/// Constant control value on `[t_start, t_end)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub value: f64,
}

impl ControlSegment {
    pub fn len(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 0.0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KickSchedule {
    pub times: Vec<f64>,
    pub signs: Vec<i8>,
    pub area: f64,
}

impl KickSchedule {
    pub fn empty() -> Self {
        Self { times: Vec::new(), signs: Vec::new(), area: PI }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `sum_i sign_i * area`
    pub fn net_area(&self) -> f64 {
        self.signs.iter().map(|&s| s as f64 * self.area).sum()
    }

    /// `sum_i sign_i` over kicks at `tau <= t`.
    pub fn net_sign_until(&self, t: f64) -> i64 {
        self.times.iter().zip(&self.signs).take_while(|(tau, _)| **tau <= t).map(|(_, &s)| s as i64).sum()
    }

    /// Copy with every sign flipped to `+1`.
    pub fn all_positive(&self) -> Self {
        Self { times: self.times.clone(), signs: vec![1; self.times.len()], area: self.area }
    }

    /// Copy with signs `+1, -1, +1, ...`.
    pub fn alternating(&self) -> Self {
        let signs = (0..self.times.len()).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        Self { times: self.times.clone(), signs, area: self.area }
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.signs.len() {
            return Err(Error::InvalidParameter("kick times and signs differ in length".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("kick times must be strictly ascending".into()));
        }
        if self.signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("kick signs must be +1 or -1".into()));
        }
        Ok(())
    }
}

/// Piecewise-constant control over `[0, period]`.
///
/// The last segment is truncated at `period` when `dt` does not divide it.
pub fn generate_segments(train: &PulseTrain, period: f64) -> Result<Vec<ControlSegment>> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::InvalidParameter(format!("T must be > 0, got {period}")));
    }
    train.validate()?;
    if !train.kind.is_square() {
        return Ok(vec![ControlSegment { t_start: 0.0, t_end: period, value: 0.0 }]);
    }
    if train.dt >= period {
        return Err(Error::InvalidParameter(format!("dt = {} must be shorter than T = {period}", train.dt)));
    }

    let count = segment_count(period, train.dt);
    let mut rng = ChaCha8Rng::seed_from_u64(train.seed);
    let noisy = |rng: &mut ChaCha8Rng| {
        let r: f64 = rng.random();
        train.amplitude * (1.0 - train.p * (0.5 - r))
    };
    let mut segments = Vec::with_capacity(count);
    for k in 0..count {
        let t_start = k as f64 * train.dt;
        let t_end = if k + 1 == count { period } else { (k + 1) as f64 * train.dt };
        let value = match train.kind {
            PulseKind::PositiveSquare if k % 2 == 0 => noisy(&mut rng),
            PulseKind::PositiveSquare => 0.0,
            PulseKind::ZeroEnergyAlternating => {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * noisy(&mut rng)
            }
            _ => unreachable!("square kinds only"),
        };
        segments.push(ControlSegment { t_start, t_end, value });
    }
    Ok(segments)
}

/// Number of `dt`-long segments covering `period`, ignoring a rounding sliver.
fn segment_count(period: f64, dt: f64) -> usize {
    let ratio = period / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Whether `dt` divides `period` to rounding.
pub fn is_commensurate(period: f64, dt: f64) -> bool {
    let ratio = period / dt;
    (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0)
}

/// Checks that segments start at 0 and abut each other; returns the end time.
pub fn check_tiling(segments: &[ControlSegment]) -> Result<f64> {
    let Some(first) = segments.first() else {
        return Ok(0.0);
    };
    if first.t_start != 0.0 {
        return Err(Error::BadTiling(format!("first segment starts at {}", first.t_start)));
    }
    for (k, seg) in segments.iter().enumerate() {
        if !(seg.t_end > seg.t_start) || !seg.value.is_finite() {
            return Err(Error::BadTiling(format!("segment {k} is empty or non-finite")));
        }
        if let Some(next) = segments.get(k + 1) {
            let gap = (next.t_start - seg.t_end).abs();
            if gap > 1e-12 * seg.t_end.abs().max(1.0) {
                return Err(Error::BadTiling(format!("gap of {gap:e} after segment {k}")));
            }
        }
    }
    Ok(segments.last().map_or(0.0, |s| s.t_end))
}

/// `C(t) = int_0^t [1 + c(s)] ds`, exact for piecewise-constant `c`.
pub fn integral_c(segments: &[ControlSegment], t: f64) -> f64 {
    let mut acc = 0.0;
    for seg in segments {
        if t <= seg.t_start {
            break;
        }
        let upper = t.min(seg.t_end);
        acc += (1.0 + seg.value) * (upper - seg.t_start);
    }
    acc
}

/// `C(t)` including the areas of kicks at `tau <= t`.
pub fn integral_c_with_kicks(segments: &[ControlSegment], kicks: &KickSchedule, t: f64) -> f64 {
    integral_c(segments, t) + kicks.net_sign_until(t) as f64 * kicks.area
}

/// `int c dt` over the segments.
pub fn net_area(segments: &[ControlSegment]) -> f64 {
    segments.iter().map(|s| s.value * s.len()).sum()
}

/// Time average of `c` over the tiled interval, off-intervals included.
pub fn mean_control(segments: &[ControlSegment]) -> f64 {
    let span = match (segments.first(), segments.last()) {
        (Some(first), Some(last)) => last.t_end - first.t_start,
        _ => return 0.0,
    };
    if span <= 0.0 {
        0.0
    } else {
        net_area(segments) / span
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resonance {
    pub is_resonant: bool,
    pub nearest_n: u64,
}

/// Whether `J dt = 2 pi n` for a positive integer `n`, within `tol`.
pub fn resonance_condition(amplitude: f64, dt: f64, tol: f64) -> Resonance {
    let area = amplitude * dt;
    let nearest_n = (area / TWO_PI).round().max(1.0) as u64;
    let is_resonant = amplitude > 0.0 && dt > 0.0 && (area - TWO_PI * nearest_n as f64).abs() <= tol;
    Resonance { is_resonant, nearest_n }
}

/// Kick instants on a jittered grid in `(0, period)`.
///
/// Successive gaps are `interval * (1 + jitter * (r - 1/2))`; zero jitter
/// gives `interval, 2 interval, ...`. Kicks carry area `pi`.
pub fn make_kicks(kind: PulseKind, period: f64, interval: f64, jitter: f64, seed: u64) -> Result<KickSchedule> {
    if !kind.is_kick() {
        return Err(Error::InvalidParameter(format!("{kind:?} is not a kick kind")));
    }
    if !(interval > 0.0 && interval < period) {
        return Err(Error::InvalidParameter(format!("kick interval {interval} must lie in (0, T = {period})")));
    }
    if !(0.0..2.0).contains(&jitter) {
        return Err(Error::InvalidParameter(format!("kick jitter must lie in [0, 2), got {jitter}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::new();
    let mut k = 0u64;
    let mut tau = 0.0;
    loop {
        k += 1;
        tau = if jitter == 0.0 {
            k as f64 * interval
        } else {
            let r: f64 = rng.random();
            tau + interval * (1.0 + jitter * (r - 0.5))
        };
        if tau >= period - 1e-9 * interval {
            break;
        }
        times.push(tau);
    }
    let base = KickSchedule { times, signs: Vec::new(), area: PI };
    Ok(match kind {
        PulseKind::DeltaKickPositive => base.all_positive(),
        _ => base.alternating(),
    })
}

/// Kick schedule described by a pulse train (empty for non-kick kinds).
pub fn kicks_for(train: &PulseTrain, period: f64) -> Result<KickSchedule> {
    if train.kind.is_kick() {
        make_kicks(train.kind, period, train.dt, train.p, train.seed)
    } else {
        Ok(KickSchedule::empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(segs: &[ControlSegment]) -> Vec<f64> {
        segs.iter().map(|s| s.value).collect()
    }

    #[test]
    fn no_control_is_one_zero_segment() {
        let segs = generate_segments(&PulseTrain::none(), 1.0).unwrap();
        assert_eq!(segs, vec![ControlSegment { t_start: 0.0, t_end: 1.0, value: 0.0 }]);
        assert_eq!(integral_c(&segs, 0.37), 0.37);
    }

    #[test]
    fn positive_square_without_noise() {
        let train = PulseTrain::new(PulseKind::PositiveSquare, 100.0, 0.005, 0.0, 1);
        let segs = generate_segments(&train, 0.02).unwrap();
        let expected = [(0.0, 0.005, 100.0), (0.005, 0.01, 0.0), (0.01, 0.015, 100.0), (0.015, 0.02, 0.0)];
        assert_eq!(segs.len(), 4);
        for (s, (a, b, v)) in segs.iter().zip(expected) {
            assert!((s.t_start - a).abs() < 1e-15 && (s.t_end - b).abs() < 1e-15);
            assert_eq!(s.value, v);
        }
        assert!((mean_control(&segs) - 50.0).abs() < 1e-12);
        let inc = integral_c(&segs, 0.005);
        assert!((inc - 0.005 * 101.0).abs() < 1e-14);
    }

    #[test]
    fn zero_energy_without_noise() {
        let train = PulseTrain::new(PulseKind::ZeroEnergyAlternating, 10.0, 0.1, 0.0, 1);
        let segs = generate_segments(&train, 0.4).unwrap();
        assert_eq!(values(&segs), vec![10.0, -10.0, 10.0, -10.0]);
        assert!(mean_control(&segs).abs() < 1e-14);
        assert!(net_area(&segs).abs() < 1e-14);
        assert!((integral_c(&segs, 0.2) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn dt_not_shorter_than_period_is_rejected() {
        let train = PulseTrain::new(PulseKind::ZeroEnergyAlternating, 10.0, 1.0, 0.0, 1);
        assert!(generate_segments(&train, 1.0).is_err());
    }

    #[test]
    fn noisy_amplitudes_stay_in_band_and_are_deterministic() {
        let train = PulseTrain::new(PulseKind::ZeroEnergyAlternating, 40.0, 0.01, 0.5, 77);
        let a = generate_segments(&train, 2.0).unwrap();
        let b = generate_segments(&train, 2.0).unwrap();
        assert_eq!(a, b);
        for (k, s) in a.iter().enumerate() {
            let mag = s.value.abs();
            assert!((30.0..=50.0).contains(&mag));
            assert_eq!(s.value > 0.0, k % 2 == 0);
        }
        let other = generate_segments(&PulseTrain { seed: 78, ..train }, 2.0).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn truncated_last_segment() {
        let train = PulseTrain::new(PulseKind::ZeroEnergyAlternating, 10.0, 0.3, 0.0, 0);
        let segs = generate_segments(&train, 1.0).unwrap();
        assert_eq!(segs.len(), 4);
        assert_eq!(segs.last().unwrap().t_end, 1.0);
        assert_eq!(check_tiling(&segs).unwrap(), 1.0);
        assert!(!is_commensurate(1.0, 0.3));
        assert!(is_commensurate(1.0, 0.005));
    }

    #[test]
    fn tiling_errors() {
        let gap = [
            ControlSegment { t_start: 0.0, t_end: 0.5, value: 0.0 },
            ControlSegment { t_start: 0.6, t_end: 1.0, value: 0.0 },
        ];
        assert!(matches!(check_tiling(&gap), Err(Error::BadTiling(_))));
        let late = [ControlSegment { t_start: 0.1, t_end: 1.0, value: 0.0 }];
        assert!(check_tiling(&late).is_err());
    }

    #[test]
    fn resonance_examples() {
        let j = 2.0 * PI / 0.01;
        assert_eq!(resonance_condition(j, 0.01, 1e-9), Resonance { is_resonant: true, nearest_n: 1 });
        let r = resonance_condition(PI, 1.0, 1e-6);
        assert!(!r.is_resonant);
        assert_eq!(r.nearest_n, 1);
        let r = resonance_condition(4.0 * PI + 1e-9, 1.0, 1e-6);
        assert_eq!(r, Resonance { is_resonant: true, nearest_n: 2 });
    }

    #[test]
    fn kick_grid_and_areas() {
        let k = make_kicks(PulseKind::DeltaKickPositive, 1.0, 0.1, 0.0, 0).unwrap();
        assert_eq!(k.len(), 9);
        for (i, t) in k.times.iter().enumerate() {
            assert!((t - 0.1 * (i + 1) as f64).abs() < 1e-15);
        }
        assert!((k.net_area() - 9.0 * PI).abs() < 1e-12);
        let alt = make_kicks(PulseKind::DeltaKickAlternating, 1.0, 0.1, 0.0, 0).unwrap();
        let sign_sum: i32 = alt.signs.iter().map(|&s| s as i32).sum();
        assert!((-1..=1).contains(&sign_sum));

        let even_pos = make_kicks(PulseKind::DeltaKickPositive, 1.0, 0.15, 0.0, 0).unwrap();
        let even_alt = even_pos.alternating();
        assert_eq!(even_pos.len() % 2, 0);
        assert!((even_pos.net_area() - even_pos.len() as f64 * PI).abs() < 1e-12);
        assert_eq!(even_alt.net_area(), 0.0);

        let jittered = make_kicks(PulseKind::DeltaKickAlternating, 1.0, 0.05, 0.5, 3).unwrap();
        jittered.validate().unwrap();
        assert!(jittered.times.iter().all(|&t| t > 0.0 && t < 1.0));
    }

    #[test]
    fn exp_ic_is_blind_to_kick_signs() {
        let pos = make_kicks(PulseKind::DeltaKickPositive, 1.0, 0.07, 0.3, 5).unwrap();
        let alt = pos.alternating();
        let segs = generate_segments(&PulseTrain::none(), 1.0).unwrap();
        let mut probes = vec![0.0];
        probes.extend(pos.times.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        for t in probes {
            // Kick contributions differ by an even number of half turns.
            assert_eq!((pos.net_sign_until(t) - alt.net_sign_until(t)).rem_euclid(2), 0);
            let diff = integral_c_with_kicks(&segs, &pos, t) - integral_c_with_kicks(&segs, &alt, t);
            let turns = diff / (2.0 * PI);
            assert!((turns - turns.round()).abs() < 1e-12, "t={t}: {diff}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn segments_tile_the_interval(
                kind in prop::sample::select(vec![PulseKind::PositiveSquare, PulseKind::ZeroEnergyAlternating]),
                amp in 0.0f64..500.0,
                dt in 0.001f64..0.4,
                p in 0.0f64..=2.0,
                seed in any::<u64>(),
                period in 0.5f64..5.0,
            ) {
                let train = PulseTrain::new(kind, amp, dt, p, seed);
                let segs = generate_segments(&train, period).unwrap();
                prop_assert_eq!(check_tiling(&segs).unwrap(), period);
                let total: f64 = segs.iter().map(ControlSegment::len).sum();
                prop_assert!((total - period).abs() <= 1e-12 * period.max(1.0) * segs.len() as f64);
                prop_assert_eq!(generate_segments(&train, period).unwrap(), segs.clone());
                let c_end = integral_c(&segs, period);
                prop_assert!((c_end - (period + net_area(&segs))).abs() <= 1e-9 * c_end.abs().max(1.0));
            }

            #[test]
            fn zero_randomness_depends_only_on_parity(seed_a in any::<u64>(), seed_b in any::<u64>(), amp in 1.0f64..100.0) {
                let a = PulseTrain::new(PulseKind::ZeroEnergyAlternating, amp, 0.01, 0.0, seed_a);
                let b = PulseTrain { seed: seed_b, ..a };
                prop_assert_eq!(generate_segments(&a, 1.0).unwrap(), generate_segments(&b, 1.0).unwrap());
            }
        }
    }
}
