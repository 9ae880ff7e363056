//! Real branches of the Lambert W function.
//!
//! `W(x)` solves `w * exp(w) = x`. On `[-1/e, 0)` there are two real
//! solutions: the principal branch `W0 >= -1` and the lower branch
//! `W-1 <= -1`. Both meet at the branch point `(-1/e, -1)`.
//!
//! Evaluation uses Halley iteration from a branch-specific starting point.
//! Within `1 + e*x < 1e-6` of the branch point the Puiseux series in
//! `p = ±sqrt(2(1 + e*x))` is returned directly.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{EvarError, Result};

/// `-1/e` rounded to nearest.
pub const BRANCH_POINT: f64 = -0.367_879_441_171_442_33;

// 1/e as an unevaluated sum hi + lo, so that `x + 1/e` keeps full precision
// for `x` close to the branch point.
const INV_E_HI: f64 = 0.367_879_441_171_442_33;
const INV_E_LO: f64 = -1.242_875_367_278_836_3e-17;

/// Inputs in `[-1/e - CLAMP, -1/e]` are treated as exactly `-1/e`.
pub const CLAMP: f64 = 1e-12;

/// Below this offset `1 + e*x` the branch-point series is returned as is.
const SERIES_ONLY: f64 = 1e-6;

const MAX_ITERS: usize = 50;

/// Coefficients of `W = sum c_k p^k` around the branch point.
const BRANCH_SERIES: [f64; 10] = [
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680_863.0 / 43_545_600.0,
    -1963.0 / 204_120.0,
    226_287_557.0 / 37_623_398_400.0,
];

/// Selects one of the two real branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambertBranch {
    /// `W0`, defined on `[-1/e, inf)` with values `>= -1`.
    Principal,
    /// `W-1`, defined on `[-1/e, 0)` with values `<= -1`.
    MinusOne,
}

impl LambertBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            LambertBranch::Principal => "principal",
            LambertBranch::MinusOne => "minus-one",
        }
    }
}

/// Offset from the branch point, `1 + e*x`, without cancellation.
fn branch_offset(x: f64) -> f64 {
    E * ((x + INV_E_HI) + INV_E_LO)
}

/// Evaluates `W_branch(x)`.
pub fn lambert_w(branch: LambertBranch, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(EvarError::Domain("Lambert W of NaN".into()));
    }
    check_lower(x)?;
    if branch == LambertBranch::MinusOne && x >= 0.0 {
        return Err(EvarError::Domain(format!(
            "W-1 is defined on [-1/e, 0), got {x}"
        )));
    }
    solve(branch, x.max(BRANCH_POINT), branch_offset(x).max(0.0))
}

/// Evaluates `W_branch((q - 1)/e)` given the branch-point offset `q = 1 + e*x`.
///
/// Callers that can form `q` analytically (for instance as `-expm1(..)`)
/// keep full relative accuracy in `W + 1` this way, where `lambert_w` would
/// first round `x` and lose the digits of `q`.
pub fn lambert_w_from_offset(branch: LambertBranch, q: f64) -> Result<f64> {
    if q.is_nan() || q < -CLAMP * E {
        return Err(EvarError::Domain(format!(
            "branch-point offset must be >= 0, got {q}"
        )));
    }
    if branch == LambertBranch::MinusOne && q >= 1.0 {
        return Err(EvarError::Domain(format!(
            "W-1 needs an offset below 1, got {q}"
        )));
    }
    let q = q.max(0.0);
    solve(branch, (q - 1.0) / E, q)
}

/// Derivative `W'(x) = W(x) / (x (1 + W(x)))`.
pub fn lambert_w_derivative(branch: LambertBranch, x: f64) -> Result<f64> {
    let w = lambert_w(branch, x)?;
    if x == 0.0 || branch_offset(x) <= 0.0 {
        return Err(EvarError::Singularity(x));
    }
    Ok(w / (x * (1.0 + w)))
}

fn check_lower(x: f64) -> Result<()> {
    if x < BRANCH_POINT - CLAMP {
        Err(EvarError::Domain(format!(
            "Lambert W is not real below -1/e, got {x}"
        )))
    } else {
        Ok(())
    }
}

fn branch_series(p: f64) -> f64 {
    BRANCH_SERIES.iter().rev().fold(0.0, |acc, &c| acc * p + c)
}

fn solve(branch: LambertBranch, x: f64, q: f64) -> Result<f64> {
    let p = match branch {
        LambertBranch::Principal => (2.0 * q).sqrt(),
        LambertBranch::MinusOne => -(2.0 * q).sqrt(),
    };
    if q < SERIES_ONLY {
        return Ok(branch_series(p));
    }
    let w0 = match branch {
        LambertBranch::Principal => {
            if x == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
            if x == 0.0 {
                return Ok(0.0);
            }
            principal_guess(x, p)
        }
        LambertBranch::MinusOne => minus_one_guess(x, p),
    };
    Ok(halley(x, w0))
}

fn principal_guess(x: f64, p: f64) -> f64 {
    if x.abs() < 0.3 {
        x * (1.0 - x + 1.5 * x * x)
    } else if x < 0.0 {
        branch_series(p)
    } else if x > 3.0 {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    } else {
        // truncated continued fraction x/(1 + x/(1 + x/(2 + 5x/(3 + 17x/10))))
        x / (1.0 + x / (1.0 + x / (2.0 + 5.0 * x / (3.0 + 1.7 * x))))
    }
}

fn minus_one_guess(x: f64, p: f64) -> f64 {
    if x > -0.27 {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    } else {
        branch_series(p)
    }
}

fn halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..MAX_ITERS {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    w
}
