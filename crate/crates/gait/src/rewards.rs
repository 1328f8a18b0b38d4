use serde::{Deserialize, Serialize};

pub const DOUBLE_SUPPORT_LIMIT: usize = 100;

/// Double-support penalty and whether the episode must end.
pub fn reward_double_support(t_s: usize) -> (f64, bool) {
    reward_double_support_with_limit(t_s, DOUBLE_SUPPORT_LIMIT)
}

pub fn reward_double_support_with_limit(t_s: usize, limit: usize) -> (f64, bool) {
    if t_s > limit {
        (-2.0, true)
    } else {
        (0.0, false)
    }
}

/// `0.05` per gait completed in the lookahead window.
pub fn reward_gait_number(n_future: usize) -> f64 {
    0.05 * n_future as f64
}

/// Peaks at 0.2 when the left heel strikes halfway through the gait.
/// `t_lhs` is measured from the gait start; absent strike scores 0.
pub fn reward_left_heel_strike(t_lhs: Option<usize>, cycle_len: usize) -> f64 {
    match t_lhs {
        Some(t) if cycle_len > 0 => {
            let phase = t as f64 / cycle_len as f64 - 0.5;
            0.2 * (1.0 - (phase * phase).tanh())
        }
        _ => 0.0,
    }
}

/// Rewards the leading leg switching between the right and left heel
/// strikes. Angles are `[rh, rk, ra, lh, lk, la]`.
pub fn reward_crossover(at_rhs: &[f64; 6], at_lhs: Option<&[f64; 6]>) -> f64 {
    let Some(at_lhs) = at_lhs else {
        return 0.0;
    };
    let (rh, rk, lh, lk) = (0, 1, 3, 4);
    0.05 * ((at_rhs[rh] - at_rhs[rk]).tanh()
        + (-at_lhs[rh] + at_lhs[rk]).tanh()
        + (-at_rhs[lh] + at_rhs[lk]).tanh()
        + (at_lhs[lh] - at_lhs[lk]).tanh())
}

/// Cosine of the angle between two equal-length vectors; 0 if either is zero.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// `0.2 / 3` times the summed cosine similarity of the right and left hip,
/// knee and ankle curves (already resampled to equal length).
pub fn reward_gait_symmetry(right: &[Vec<f64>; 3], left: &[Vec<f64>; 3]) -> f64 {
    (0.2 / 3.0)
        * right
            .iter()
            .zip(left)
            .map(|(r, l)| cosine_similarity(r, l))
            .sum::<f64>()
}

/// Linear interpolation onto `n` evenly spaced points spanning the curve,
/// endpoints included.
pub fn resample_curve(curve: &[f64], n: usize) -> Vec<f64> {
    match curve.len() {
        0 => Vec::new(),
        1 => vec![curve[0]; n],
        len => {
            if n == 1 {
                return vec![curve[0]];
            }
            let span = (len - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        return curve[len - 1];
                    }
                    let pos = i as f64 * span / (n - 1) as f64;
                    let k = (pos.floor() as usize).min(len - 2);
                    let frac = pos - k as f64;
                    curve[k] + frac * (curve[k + 1] - curve[k])
                })
                .collect()
        }
    }
}

/// Sub-reward values for one gait. Disabled or inactive terms are 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SubRewards {
    pub double_support: f64,
    pub gait_number: f64,
    pub left_heel_strike: f64,
    pub crossover: f64,
    pub symmetry: f64,
}

impl SubRewards {
    pub fn total(&self) -> f64 {
        self.double_support + self.gait_number + self.left_heel_strike + self.crossover + self.symmetry
    }
}
