use crate::trajectory::ControlTrajectory;

/// Threshold below which a sample counts as zero, and the half-width of the
/// bands around `+-1` used when quantizing.
pub const DEFAULT_EPSILON: f64 = 1e-2;

/// Support length of each channel: `h * #{k : |u_i[k]| > eps}`.
pub fn l0_per_channel(u: &ControlTrajectory, epsilon: f64) -> Vec<f64> {
    (0..u.inputs())
        .map(|i| u.step() * u.channel(i).filter(|v| v.abs() > epsilon).count() as f64)
        .collect()
}

/// Total support length in seconds, summed over channels.
pub fn l0_measure(u: &ControlTrajectory, epsilon: f64) -> f64 {
    l0_per_channel(u, epsilon).iter().sum()
}

/// `sum_i lambda_i |supp(u_i)|`.
pub fn weighted_l0(u: &ControlTrajectory, epsilon: f64, lambda: &[f64]) -> f64 {
    l0_per_channel(u, epsilon).iter().zip(lambda).map(|(l, w)| l * w).sum()
}

/// `sum_i lambda_i int |u_i| dt` (rectangle rule, exact for held signals).
pub fn l1_cost(u: &ControlTrajectory, lambda: &[f64]) -> f64 {
    (0..u.inputs())
        .map(|i| lambda[i] * u.step() * u.channel(i).map(f64::abs).sum::<f64>())
        .sum()
}

/// `sum_i r_i / 2 int u_i^2 dt`.
pub fn l2_cost(u: &ControlTrajectory, r: &[f64]) -> f64 {
    (0..u.inputs())
        .map(|i| 0.5 * r[i] * u.step() * u.channel(i).map(|v| v * v).sum::<f64>())
        .sum()
}

/// Map a sample to `-1`, `0` or `+1`: exact within `eps` of a level,
/// otherwise the nearest level.
pub fn quantize(v: f64, epsilon: f64) -> i8 {
    if v.abs() <= epsilon {
        0
    } else if (v - 1.0).abs() <= epsilon || v >= 0.5 {
        1
    } else if (v + 1.0).abs() <= epsilon || v <= -0.5 {
        -1
    } else {
        0
    }
}

fn is_ternary(v: f64, delta: f64) -> bool {
    v.abs().min((v - 1.0).abs()).min((v + 1.0).abs()) <= delta
}

/// Grid times `k h` at which the quantized level of channel `i` differs from
/// the level on the previous interval.
pub fn channel_switching_times(u: &ControlTrajectory, i: usize, epsilon: f64) -> Vec<f64> {
    let levels: Vec<i8> = u.channel(i).map(|v| quantize(v, epsilon)).collect();
    levels
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(k, _)| u.time(k + 1))
        .collect()
}

/// Switching times of all channels, merged and strictly increasing.
pub fn switching_times(u: &ControlTrajectory, epsilon: f64) -> Vec<f64> {
    let mut all: Vec<f64> = (0..u.inputs())
        .flat_map(|i| channel_switching_times(u, i, epsilon))
        .collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// Fraction of samples within `delta` of `-1`, `0` or `+1`.
pub fn bangoffbang_score(u: &ControlTrajectory, delta: f64) -> f64 {
    let total = u.as_vec().len();
    let hits = u.as_vec().iter().filter(|&&v| is_ternary(v, delta)).count();
    hits as f64 / total as f64
}

/// Non-ternary samples that do not sit on a transition.
///
/// A run of consecutive non-ternary samples is a legitimate transition when
/// the ternary levels on either side of it differ, or when it touches an end
/// of the horizon. Runs flanked by the same level (a blip inside a bang or
/// off interval) are returned as `(channel, sample)` pairs.
pub fn misplaced_fractional_samples(u: &ControlTrajectory, delta: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..u.inputs() {
        let samples: Vec<f64> = u.channel(i).collect();
        let mut k = 0;
        while k < samples.len() {
            if is_ternary(samples[k], delta) {
                k += 1;
                continue;
            }
            let start = k;
            while k < samples.len() && !is_ternary(samples[k], delta) {
                k += 1;
            }
            if start == 0 || k == samples.len() {
                continue;
            }
            let before = quantize(samples[start - 1], delta);
            let after = quantize(samples[k], delta);
            if before == after {
                out.extend((start..k).map(|s| (i, s)));
            }
        }
    }
    out
}

/// `max_k |u[k+1] - u[k]|` over all channels.
pub fn max_jump(u: &ControlTrajectory) -> f64 {
    (0..u.inputs())
        .map(|i| {
            let samples: Vec<f64> = u.channel(i).collect();
            samples.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Forward-difference surrogate of `sup |du/dt|`.
///
/// For a bang-off-bang signal this is `O(1/h)` and only indicates where the
/// jumps are.
pub fn derivative_supnorm(u: &ControlTrajectory) -> f64 {
    max_jump(u) / u.step()
}

/// Sparsity and smoothness summary of a control.
#[derive(Debug, Clone, PartialEq)]
pub struct HandsOffMetrics {
    pub l0_seconds: f64,
    pub l0_per_channel: Vec<f64>,
    /// `1 - l0 / (m T)`.
    pub handsoff_fraction: f64,
    pub switching_times: Vec<f64>,
    pub bangoffbang_score: f64,
    pub derivative_supnorm: f64,
    pub max_jump: f64,
}

impl HandsOffMetrics {
    pub fn compute(u: &ControlTrajectory, epsilon: f64) -> Self {
        let per_channel = l0_per_channel(u, epsilon);
        let l0: f64 = per_channel.iter().sum();
        HandsOffMetrics {
            l0_seconds: l0,
            l0_per_channel: per_channel,
            handsoff_fraction: 1.0 - l0 / (u.horizon() * u.inputs() as f64),
            switching_times: switching_times(u, epsilon),
            bangoffbang_score: bangoffbang_score(u, epsilon),
            derivative_supnorm: derivative_supnorm(u),
            max_jump: max_jump(u),
        }
    }

    pub fn last_switch(&self) -> Option<f64> {
        self.switching_times.last().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar(step: f64, v: &[f64]) -> ControlTrajectory {
        ControlTrajectory::scalar(step, v).unwrap()
    }

    #[test]
    fn support_of_constant_signals() {
        let zero = ControlTrajectory::zeros(0.01, 1, 1000).unwrap();
        assert_eq!(l0_measure(&zero, 1e-2), 0.0);
        let one = scalar(0.01, &vec![1.0; 1000]);
        assert!((l0_measure(&one, 1e-2) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn switching_times_of_square_wave() {
        // 0 on [0, 1), +1 on [1, 2), 0 on [2, 3), -1 on [3, 4)
        let mut v = vec![0.0; 10];
        v.extend(vec![1.0; 10]);
        v.extend(vec![0.0; 10]);
        v.extend(vec![-1.0; 10]);
        let u = scalar(0.1, &v);
        let times = switching_times(&u, 1e-2);
        let expected = [1.0, 2.0, 3.0];
        assert_eq!(times.len(), 3);
        for (t, e) in times.iter().zip(expected) {
            assert!((t - e).abs() < 1e-12);
        }
        assert!(switching_times(&ControlTrajectory::zeros(0.1, 1, 10).unwrap(), 1e-2).is_empty());
    }

    #[test]
    fn bangoffbang_scores() {
        assert_eq!(bangoffbang_score(&scalar(0.1, &[1.0, 0.0, -1.0, 0.0]), 1e-2), 1.0);
        assert_eq!(bangoffbang_score(&scalar(0.1, &[0.5; 8]), 0.4), 0.0);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(derivative_supnorm(&scalar(0.1, &[0.3; 5])), 0.0);
        let h = 0.01;
        let ramp: Vec<f64> = (0..100).map(|k| k as f64 * h).collect();
        assert!((derivative_supnorm(&scalar(h, &ramp)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fractional_blips_are_flagged() {
        let ok = scalar(0.1, &[0.0, 0.0, 0.4, 1.0, 1.0, 0.7, 0.2, 0.0]);
        assert!(misplaced_fractional_samples(&ok, 1e-2).is_empty());
        let tampered = scalar(0.1, &[0.0, 1.0, 1.0, 0.5, 1.0, 1.0, 0.0]);
        assert_eq!(misplaced_fractional_samples(&tampered, 1e-2), vec![(0, 3)]);
        let at_edge = scalar(0.1, &[0.3, 1.0, 1.0, 0.0, 0.2]);
        assert!(misplaced_fractional_samples(&at_edge, 1e-2).is_empty());
    }

    #[test]
    fn multichannel_metrics() {
        let u = ControlTrajectory::from_stacked(0.5, 2, &[1.0, 0.0, 1.0, -1.0, 0.0, -1.0]).unwrap();
        assert_eq!(l0_per_channel(&u, 1e-2), vec![1.0, 1.0]);
        assert!((weighted_l0(&u, 1e-2, &[2.0, 3.0]) - 5.0).abs() < 1e-12);
        assert_eq!(switching_times(&u, 1e-2), vec![0.5, 1.0]);
        let m = HandsOffMetrics::compute(&u, 1e-2);
        assert!((m.handsoff_fraction - (1.0 - 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn ternary_support_matches_l1_cost() {
        let v = [0.0, 1.0, -1.0, 0.0, 1.0, 1.0, 0.0];
        let u = scalar(0.25, &v);
        let lambda = [1.7];
        assert!((weighted_l0(&u, 1e-2, &lambda) - l1_cost(&u, &lambda)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn l0_is_monotone_in_epsilon(v in prop::collection::vec(-1.0f64..1.0, 1..60), e1 in 1e-4f64..0.5, e2 in 1e-4f64..0.5) {
            let u = scalar(0.1, &v);
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            prop_assert!(l0_measure(&u, hi) <= l0_measure(&u, lo));
        }

        #[test]
        fn switching_is_sign_symmetric(v in prop::collection::vec(-1.0f64..1.0, 2..60)) {
            let u = scalar(0.1, &v);
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            prop_assert_eq!(switching_times(&u, 1e-2), switching_times(&scalar(0.1, &neg), 1e-2));
        }

        #[test]
        fn support_bounded_by_horizon(v in prop::collection::vec(-1.0f64..1.0, 1..60)) {
            let u = scalar(0.1, &v);
            let m = HandsOffMetrics::compute(&u, 1e-2);
            prop_assert!(m.l0_seconds <= u.horizon() + 1e-12);
            prop_assert!(m.switching_times.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(m.switching_times.iter().all(|&t| (0.0..=u.horizon()).contains(&t)));
        }
    }
}
