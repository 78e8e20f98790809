//! Smooth cutoffs built from the `exp(-1/x)` mollifier.

fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    let a = psi(x);
    let b = psi(1.0 - x);
    if a + b == 0.0 {
        return if x > 0.5 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

/// Time window: 1 on [-1, 1], supported in [-2, 2].
pub fn eta(t: f64) -> f64 {
    smooth_step(2.0 - t.abs())
}

/// 1 on [0, inf), supported in [-1, inf).
pub fn rho(y: f64) -> f64 {
    smooth_step(y + 1.0)
}

/// Compact bump of height `amp` on `[center - half, center + half]`.
///
/// `exp(-k s^2 / (1 - s^2))` with `k = 20`; flat-ish core, Gevrey-class edges.
pub fn bump(t: f64, center: f64, half: f64, amp: f64) -> f64 {
    let s = (t - center) / half;
    if s.abs() >= 1.0 {
        return 0.0;
    }
    let s2 = s * s;
    amp * (-BUMP_SHARPNESS * s2 / (1.0 - s2)).exp()
}

const BUMP_SHARPNESS: f64 = 20.0;
