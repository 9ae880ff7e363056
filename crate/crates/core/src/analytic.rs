//! Closed-form EVaR.
//!
//! `EVaR_a(X) = inf_{t>0} (-log(1-a) + log m_X(t)) / t`. For every supported
//! distribution the first-order condition in `t` reduces to an equation of the
//! form `w e^w = x`, so the minimiser and the minimum come out through one of
//! the two real Lambert W branches (or, for the normal and the two Wald-type
//! families, through a square root).
//!
//! Each routine returns the value together with an [`EvarTrace`] holding the
//! minimiser `t*`, the Lambert branch used, and the named intermediate
//! quantities of the derivation.

use std::collections::BTreeMap;
use std::f64::consts::E;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::distributions::{DistributionSpec, Kind};
use crate::error::{EvarError, Result};
use crate::lambertw::{lambert_w, lambert_w_from_offset, LambertBranch};

/// Absolute threshold on `beta` below which the compound Poisson-normal
/// formula switches to its `beta = 0` limit.
pub const BETA_ZERO: f64 = 1e-12;

/// Confidence level `alpha` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct ConfidenceLevel(f64);

impl ConfidenceLevel {
    pub fn new(alpha: f64) -> Result<Self> {
        if (0.0..1.0).contains(&alpha) {
            Ok(Self(alpha))
        } else {
            Err(EvarError::Parameter(format!(
                "confidence level must lie in [0, 1), got {alpha}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `log(1 - alpha)`, which is `<= 0`.
    pub fn log_tail(self) -> f64 {
        (-self.0).ln_1p()
    }

    /// `-log(1 - alpha)`, the additive term of the objective.
    pub fn neg_log_tail(self) -> f64 {
        -self.log_tail()
    }
}

/// Where the infimum over `t` is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Minimizer {
    /// Attained at a finite `t > 0`.
    At(f64),
    /// Approached as `t -> 0+`; the value is the mean.
    ZeroLimit,
    /// Approached as `t -> inf`.
    InfinityLimit,
}

impl Minimizer {
    fn from_t(t: f64) -> Self {
        if t > 0.0 {
            Minimizer::At(t)
        } else {
            Minimizer::ZeroLimit
        }
    }

    /// The finite minimiser, if there is one.
    pub fn finite(self) -> Option<f64> {
        match self {
            Minimizer::At(t) => Some(t),
            Minimizer::ZeroLimit | Minimizer::InfinityLimit => None,
        }
    }
}

/// How a value was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvarTrace {
    pub t_star: Minimizer,
    pub branch_used: Option<LambertBranch>,
    pub intermediates: BTreeMap<&'static str, f64>,
    /// The objective evaluated at `t_star`; equals the limit value for the
    /// limit markers.
    pub objective_at_t_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvarResult {
    pub value: f64,
    pub trace: EvarTrace,
}

/// Variational objective `(-log(1-alpha) + log m(t)) / t` for in-domain `t > 0`.
pub(crate) fn objective_unchecked(dist: &DistributionSpec, alpha: ConfidenceLevel, t: f64) -> f64 {
    (alpha.neg_log_tail() + dist.log_mgf_in_domain(t)) / t
}

fn finish(
    dist: &DistributionSpec,
    alpha: ConfidenceLevel,
    value: f64,
    t_star: Minimizer,
    branch_used: Option<LambertBranch>,
    intermediates: &[(&'static str, f64)],
) -> EvarResult {
    let objective_at_t_star = match t_star {
        Minimizer::At(t) if dist.mgf_domain().contains(t) => objective_unchecked(dist, alpha, t),
        _ => value,
    };
    EvarResult {
        value: value + 0.0,
        trace: EvarTrace {
            t_star,
            branch_used,
            intermediates: intermediates.iter().copied().collect(),
            objective_at_t_star,
        },
    }
}

/// Lambert W at `x`, switching to the offset form `q = 1 + e x` close to the
/// branch point where `q` is known more accurately than `x`.
fn lambert_near_branch(branch: LambertBranch, x: f64, q: f64) -> Result<f64> {
    if q < 0.5 {
        lambert_w_from_offset(branch, q)
    } else {
        lambert_w(branch, x)
    }
}

/// EVaR of `N(mu, sigma^2)`: `mu + sigma sqrt(-2 log(1-alpha))`.
pub fn evar_normal(mu: f64, sigma: f64, alpha: ConfidenceLevel) -> Result<EvarResult> {
    let d = DistributionSpec::normal(mu, sigma)?;
    Ok(normal(&d, mu, sigma, alpha))
}

fn normal(d: &DistributionSpec, mu: f64, sigma: f64, alpha: ConfidenceLevel) -> EvarResult {
    let r = (2.0 * alpha.neg_log_tail()).sqrt();
    finish(d, alpha, mu + sigma * r, Minimizer::from_t(r / sigma), None, &[])
}

/// EVaR of `Pois(lambda)`: `e lambda exp(W0(beta / (e lambda)))` with
/// `beta = -log(1-alpha) - lambda`.
pub fn evar_poisson(lambda: f64, alpha: ConfidenceLevel) -> Result<EvarResult> {
    let d = DistributionSpec::poisson(lambda)?;
    poisson(&d, lambda, alpha)
}

fn poisson(d: &DistributionSpec, rate: f64, alpha: ConfidenceLevel) -> Result<EvarResult> {
    let c = alpha.neg_log_tail();
    let beta = c - rate;
    // 1 + e * beta / (e * rate) = c / rate
    let w = lambert_near_branch(LambertBranch::Principal, beta / (E * rate), c / rate)?;
    let value = E * rate * w.exp();
    Ok(finish(
        d,
        alpha,
        value,
        Minimizer::from_t(1.0 + w),
        Some(LambertBranch::Principal),
        &[("beta", beta)],
    ))
}

/// EVaR of a Poisson(`lambda`) sum of Bernoulli(`p`) jumps, which is
/// `Pois(lambda p)`; identically zero for `p = 0`.
pub fn evar_compound_poisson_bernoulli(lambda: f64, p: f64, alpha: ConfidenceLevel) -> Result<EvarResult> {
    let d = DistributionSpec::compound_poisson_bernoulli(lambda, p)?;
    compound_poisson_bernoulli(&d, lambda, p, alpha)
}

fn compound_poisson_bernoulli(d: &DistributionSpec, lambda: f64, p: f64, alpha: ConfidenceLevel) -> Result<EvarResult> {
    if p == 0.0 {
        return Ok(finish(d, alpha, 0.0, Minimizer::InfinityLimit, None, &[]));
    }
    poisson(d, lambda * p, alpha)
}

/// EVaR of a Poisson(`lambda`) sum of N(0, `sigma`^2) jumps.
///
/// With `beta = -log(1-alpha) - lambda` and `gamma = beta / (2 sqrt(e) lambda)`
/// the value is `beta sigma sqrt(2 W0(gamma) + 1) / (2 W0(gamma))`, replaced by
/// its limit `lambda sigma sqrt(e)` for `|beta| <= BETA_ZERO`.
pub fn evar_compound_poisson_normal(lambda: f64, sigma: f64, alpha: ConfidenceLevel) -> Result<EvarResult> {
    let d = DistributionSpec::compound_poisson_normal(lambda, sigma)?;
    compound_poisson_normal(&d, lambda, sigma, alpha)
}

fn compound_poisson_normal(d: &DistributionSpec, lambda: f64, sigma: f64, alpha: ConfidenceLevel) -> Result<EvarResult> {
    let c = alpha.neg_log_tail();
    let beta = c - lambda;
    let sqrt_e = E.sqrt();
    let gamma = beta / (2.0 * sqrt_e * lambda);
    if beta.abs() <= BETA_ZERO {
        return Ok(finish(
            d,
            alpha,
            lambda * sigma * sqrt_e,
            Minimizer::At(1.0 / sigma),
            Some(LambertBranch::Principal),
            &[("beta", beta), ("gamma", gamma)],
        ));
    }
    let w = lambert_w(LambertBranch::Principal, gamma)?;
    let root = (2.0 * w + 1.0).max(0.0).sqrt();
    let value = beta * sigma * root / (2.0 * w);
    Ok(finish(
        d,
        alpha,
        value,
        Minimizer::from_t(root / sigma),
        Some(LambertBranch::Principal),
        &[("beta", beta), ("gamma", gamma)],
    ))
}

/// EVaR of `G(k, theta)`: `-k theta W-1(-e^-1 (1-alpha)^(1/k))`.
pub fn evar_gamma(k: f64, theta: f64, alpha: ConfidenceLevel) -> Result<EvarResult> {
    let d = DistributionSpec::gamma(k, theta)?;
    gamma(&d, k, theta, alpha)
}

fn gamma(d: &DistributionSpec, k: f64, theta: f64, alpha: ConfidenceLevel) -> Result<EvarResult> {
    let scaled = alpha.log_tail() / k;
    let z = -(scaled - 1.0).exp();
    // 1 + e z = 1 - (1-alpha)^(1/k)
    let w = lambert_near_branch(LambertBranch::MinusOne, z, -scaled.exp_m1())?;
    let value = -k * theta * w;
    let t_star = (1.0 + 1.0 / w) / theta;
    let b = alpha.neg_log_tail() - k * theta.ln();
    Ok(finish(
        d,
        alpha,
        value,
        Minimizer::from_t(t_star),
        Some(LambertBranch::MinusOne),
        &[("b_gamma", b), ("z_gamma", z)],
    ))
}

/// EVaR of `Exp(lambda) = G(1, 1/lambda)`.
pub fn evar_exponential(lambda: f64, alpha: ConfidenceLevel) -> Result<EvarResult> {
    let d = DistributionSpec::exponential(lambda)?;
    gamma(&d, 1.0, 1.0 / lambda, alpha)
}

/// EVaR of `chi^2(k) = G(k/2, 2)`.
pub fn evar_chi_squared(k: u32, alpha: ConfidenceLevel) -> Result<EvarResult> {
    let d = DistributionSpec::chi_squared(k)?;
    gamma(&d, 0.5 * k as f64, 2.0, alpha)
}

/// EVaR of `L(mu, b)`: `mu - b W-1(gamma) sqrt(1 + 2 / W-1(gamma))` with
/// `gamma = -2 e^-2 (1-alpha)`.
pub fn evar_laplace(mu: f64, b: f64, alpha: ConfidenceLevel) -> Result<EvarResult> {
    let d = DistributionSpec::laplace(mu, b)?;
    laplace(&d, mu, b, alpha)
}

fn laplace(d: &DistributionSpec, mu: f64, b: f64, alpha: ConfidenceLevel) -> Result<EvarResult> {
    let gamma = -2.0 * (-2.0f64).exp() * (1.0 - alpha.value());
    let w = lambert_w(LambertBranch::MinusOne, gamma)?;
    // w <= -2, so the radicand is in [0, 1); clamp rounding below zero
    let root = (1.0 + 2.0 / w).max(0.0).sqrt();
    let value = mu - b * w * root;
    Ok(finish(
        d,
        alpha,
        value,
        Minimizer::from_t(root / b),
        Some(LambertBranch::MinusOne),
        &[("a", alpha.neg_log_tail()), ("gamma", gamma)],
    ))
}

/// EVaR of `IG(mu, lambda)`: `mu (delta + sqrt(delta^2 - 1))` with
/// `delta = 1 - (mu / lambda) log(1-alpha)`.
pub fn evar_inverse_gaussian(mu: f64, lambda: f64, alpha: ConfidenceLevel) -> Result<EvarResult> {
    let d = DistributionSpec::inverse_gaussian(mu, lambda)?;
    Ok(inverse_gaussian(&d, mu, lambda, alpha))
}

fn inverse_gaussian(d: &DistributionSpec, mu: f64, lambda: f64, alpha: ConfidenceLevel) -> EvarResult {
    let c = alpha.neg_log_tail();
    let excess = mu * c / lambda;
    let delta = 1.0 + excess;
    let s = (excess * (delta + 1.0)).sqrt();
    let value = mu * (delta + s);
    // z* = delta - s; 1 - z*^2 = (s - excess)(2 - s + excess)
    let one_minus_z = s - excess;
    let t_star = lambda / (2.0 * mu * mu) * one_minus_z * (2.0 - one_minus_z);
    finish(
        d,
        alpha,
        value,
        Minimizer::from_t(t_star),
        None,
        &[("c", c), ("delta_ig", delta)],
    )
}

/// EVaR of `NIG(alpha, beta, mu, delta)` at confidence level `conf`.
///
/// `phi = -log(1-conf)/delta + sqrt(alpha^2 - beta^2)`,
/// `psi = sqrt(phi^2 - alpha^2 + beta^2)`,
/// `t* = (alpha^2 - beta^2) psi / (alpha phi + beta psi)` and the value is
/// `mu + (delta / t*) (phi - sqrt(alpha^2 - (beta + t*)^2))`. At `conf = 0`
/// the minimiser degenerates to `t* = 0` and the mean is returned.
pub fn evar_nig(alpha_p: f64, beta_p: f64, mu: f64, delta: f64, conf: ConfidenceLevel) -> Result<EvarResult> {
    let d = DistributionSpec::nig(alpha_p, beta_p, mu, delta)?;
    Ok(nig(&d, alpha_p, beta_p, mu, delta, conf))
}

fn nig(d: &DistributionSpec, alpha: f64, beta: f64, mu: f64, delta: f64, conf: ConfidenceLevel) -> EvarResult {
    let c = conf.neg_log_tail();
    let g0_sq = alpha * alpha - beta * beta;
    let g0 = g0_sq.sqrt();
    let excess = c / delta;
    let phi = excess + g0;
    // phi^2 - alpha^2 + beta^2 = excess (excess + 2 g0)
    let psi = (excess * (excess + 2.0 * g0)).sqrt();
    let inter = [("phi", phi), ("psi", psi)];
    if c == 0.0 {
        return finish(d, conf, d.mean(), Minimizer::ZeroLimit, None, &inter);
    }
    let t = (g0_sq * psi / (alpha * phi + beta * psi)).min(alpha - beta);
    // phi - sqrt(alpha^2 - (beta+t)^2) = excess + t (2 beta + t) / (g0 + sqrt(..))
    let gt = (alpha * alpha - (beta + t) * (beta + t)).max(0.0).sqrt();
    let value = mu + c / t + delta * (2.0 * beta + t) / (g0 + gt);
    finish(d, conf, value, Minimizer::At(t), None, &inter)
}

/// Closed-form EVaR for any supported distribution.
pub fn evar(dist: &DistributionSpec, alpha: ConfidenceLevel) -> Result<EvarResult> {
    match *dist.kind() {
        Kind::Poisson { lambda } => poisson(dist, lambda, alpha),
        Kind::CompoundPoissonBernoulli { lambda, p } => compound_poisson_bernoulli(dist, lambda, p, alpha),
        Kind::CompoundPoissonNormal { lambda, sigma } => compound_poisson_normal(dist, lambda, sigma, alpha),
        Kind::Gamma { k, theta } => gamma(dist, k, theta, alpha),
        Kind::Exponential { lambda } => gamma(dist, 1.0, 1.0 / lambda, alpha),
        Kind::ChiSquared { k } => gamma(dist, 0.5 * k as f64, 2.0, alpha),
        Kind::Laplace { mu, b } => laplace(dist, mu, b, alpha),
        Kind::Normal { mu, sigma } => Ok(normal(dist, mu, sigma, alpha)),
        Kind::InverseGaussian { mu, lambda } => Ok(inverse_gaussian(dist, mu, lambda, alpha)),
        Kind::Nig { alpha: a, beta, mu, delta } => Ok(nig(dist, a, beta, mu, delta, alpha)),
    }
}

/// Quantile convention for [`quantile_var`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarConvention {
    /// `inf {x : F(x) > 1 - alpha}`, the `(1-alpha)`-quantile.
    PaperDef3,
    /// `inf {x : F(x) >= alpha}`, the `alpha`-quantile.
    AlphaQuantile,
}

/// Value-at-Risk for the distributions with a closed-form quantile
/// (normal, exponential, Laplace).
pub fn quantile_var(dist: &DistributionSpec, alpha: ConfidenceLevel, convention: VarConvention) -> Result<f64> {
    let a = alpha.value();
    // level q and its complement 1 - q, each formed without cancellation
    let (q, tail) = match convention {
        VarConvention::PaperDef3 => (1.0 - a, a),
        VarConvention::AlphaQuantile => (a, 1.0 - a),
    };
    match *dist.kind() {
        Kind::Normal { mu, sigma } => Ok(mu + sigma * Normal::standard().inverse_cdf(q)),
        Kind::Exponential { lambda } => Ok(-tail.ln() / lambda),
        Kind::Laplace { mu, b } => {
            if q < 0.5 {
                Ok(mu + b * (2.0 * q).ln())
            } else {
                Ok(mu - b * (2.0 * tail).ln())
            }
        }
        _ => Err(EvarError::Unsupported(format!(
            "no closed-form quantile for {}",
            dist.tag()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn a(x: f64) -> ConfidenceLevel {
        ConfidenceLevel::new(x).unwrap()
    }

    fn catalogue() -> Vec<DistributionSpec> {
        vec![
            DistributionSpec::poisson(2.0).unwrap(),
            DistributionSpec::compound_poisson_bernoulli(3.0, 0.3).unwrap(),
            DistributionSpec::compound_poisson_normal(2.0, 1.0).unwrap(),
            DistributionSpec::gamma(2.0, 1.0).unwrap(),
            DistributionSpec::exponential(1.0).unwrap(),
            DistributionSpec::chi_squared(3).unwrap(),
            DistributionSpec::laplace(0.0, 1.0).unwrap(),
            DistributionSpec::normal(0.0, 1.0).unwrap(),
            DistributionSpec::inverse_gaussian(1.0, 2.0).unwrap(),
            DistributionSpec::nig(2.0, -1.0, 0.0, 1.0).unwrap(),
        ]
    }

    #[test]
    fn confidence_level_bounds() {
        assert!(ConfidenceLevel::new(0.0).is_ok());
        assert!(ConfidenceLevel::new(1.0).is_err());
        assert!(ConfidenceLevel::new(-0.1).is_err());
        assert!(ConfidenceLevel::new(f64::NAN).is_err());
    }

    // Expected values below come from an independent high-precision
    // minimisation of the variational objective (40 digits, textbook MGFs).

    #[test]
    fn normal_values() {
        assert_eq!(evar_normal(0.0, 1.0, a(0.0)).unwrap().value, 0.0);
        let alpha = -(-0.5f64).exp_m1();
        assert_relative_eq!(evar_normal(0.0, 1.0, a(alpha)).unwrap().value, 1.0, epsilon = 1e-15);
        let r = evar_normal(0.0, 1.0, a(0.95)).unwrap();
        assert_relative_eq!(r.value, 2.447_746_830_680_816_2, max_relative = 1e-14);
        assert_relative_eq!(r.trace.t_star.finite().unwrap(), 2.447_746_830_680_816_2, max_relative = 1e-14);
    }

    #[test]
    fn poisson_values() {
        assert_relative_eq!(evar_poisson(1.0, a(0.0)).unwrap().value, 1.0, epsilon = 1e-15);
        let at_beta_zero = evar_poisson(1.0, a(-(-1.0f64).exp_m1())).unwrap();
        assert_relative_eq!(at_beta_zero.value, E, max_relative = 1e-14);
        let r = evar_poisson(2.0, a(0.95)).unwrap();
        assert_relative_eq!(r.value, 6.358_243_224_367_200_1, max_relative = 1e-13);
        assert_relative_eq!(r.trace.t_star.finite().unwrap(), 1.156_604_936_051_827_4, max_relative = 1e-12);
        assert_eq!(r.trace.branch_used, Some(LambertBranch::Principal));
        assert_relative_eq!(r.trace.intermediates["beta"], -(0.05f64).ln() - 2.0, epsilon = 1e-15);
        assert_eq!(evar_poisson(3.0, a(0.0)).unwrap().trace.t_star, Minimizer::ZeroLimit);
    }

    #[test]
    fn compound_bernoulli_values() {
        for i in 0..50 {
            let al = a(i as f64 / 50.0);
            let lhs = evar_compound_poisson_bernoulli(2.0, 0.5, al).unwrap().value;
            assert_eq!(lhs, evar_poisson(1.0, al).unwrap().value);
        }
        for x in [0.0, 0.5, 0.99] {
            let r = evar_compound_poisson_bernoulli(5.0, 0.0, a(x)).unwrap();
            assert_eq!(r.value, 0.0);
            assert_eq!(r.trace.t_star, Minimizer::InfinityLimit);
        }
        let r = evar_compound_poisson_bernoulli(3.0, 0.3, a(0.9)).unwrap();
        assert_relative_eq!(r.value, 3.608_594_957_371_793_4, max_relative = 1e-13);
        assert!(evar_compound_poisson_bernoulli(3.0, 1.3, a(0.9)).is_err());
    }

    #[test]
    fn compound_normal_values() {
        let al = a(-(-1.0f64).exp_m1());
        assert_relative_eq!(evar_compound_poisson_normal(1.0, 1.0, al).unwrap().value, E.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(
            evar_compound_poisson_normal(1.0, 2.0, al).unwrap().value,
            2.0 * E.sqrt(),
            max_relative = 1e-14
        );
        let r = evar_compound_poisson_normal(2.0, 1.0, a(0.95)).unwrap();
        assert_relative_eq!(r.value, 4.232_470_129_000_463_2, max_relative = 1e-13);
        assert_relative_eq!(r.trace.t_star.finite().unwrap(), 1.124_524_818_662_085_9, max_relative = 1e-12);
        assert_eq!(evar_compound_poisson_normal(2.0, 1.0, a(0.0)).unwrap().value, 0.0);
    }

    #[test]
    fn compound_normal_switches_to_limit_inside_threshold() {
        // alpha with |beta| well inside BETA_ZERO for lambda = 1
        let al = a(-(-1.0f64).exp_m1());
        let r = evar_compound_poisson_normal(1.0, 3.0, al).unwrap();
        assert!(r.trace.intermediates["beta"].abs() <= BETA_ZERO);
        assert_eq!(r.value, 3.0 * E.sqrt());
        assert_eq!(r.trace.t_star, Minimizer::At(1.0 / 3.0));
    }

    #[test]
    fn gamma_values() {
        assert_relative_eq!(evar_gamma(1.0, 1.0, a(0.0)).unwrap().value, 1.0, epsilon = 1e-15);
        assert_relative_eq!(evar_gamma(3.0, 2.0, a(0.0)).unwrap().value, 6.0, epsilon = 1e-14);
        let r = evar_gamma(2.0, 1.0, a(0.9)).unwrap();
        assert_relative_eq!(r.value, 6.729_204_643_790_321_3, max_relative = 1e-13);
        assert_relative_eq!(r.trace.t_star.finite().unwrap(), 0.702_788_055_071_918_4, max_relative = 1e-12);
        assert_eq!(r.trace.branch_used, Some(LambertBranch::MinusOne));
        let z = r.trace.intermediates["z_gamma"];
        assert_relative_eq!(z, -(0.1f64).sqrt() / E, max_relative = 1e-15);
    }

    #[test]
    fn exponential_and_chi_squared_are_gamma() {
        for i in 0..100 {
            let al = a(i as f64 / 100.0);
            assert_eq!(
                evar_exponential(2.0, al).unwrap().value,
                evar_gamma(1.0, 0.5, al).unwrap().value
            );
            assert_eq!(
                evar_chi_squared(4, al).unwrap().value,
                evar_gamma(2.0, 2.0, al).unwrap().value
            );
        }
        assert_relative_eq!(evar_exponential(1.0, a(0.0)).unwrap().value, 1.0, epsilon = 1e-15);
        assert_relative_eq!(evar_chi_squared(2, a(0.0)).unwrap().value, 2.0, epsilon = 1e-15);
        assert_relative_eq!(
            evar_exponential(1.0, a(0.95)).unwrap().value,
            5.743_864_518_390_577_3,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            evar_chi_squared(3, a(0.99)).unwrap().value,
            17.501_334_996_589_717,
            max_relative = 1e-13
        );
    }

    #[test]
    fn laplace_values() {
        assert!(evar_laplace(0.0, 1.0, a(0.0)).unwrap().value.abs() < 1e-7);
        let r = evar_laplace(0.0, 1.0, a(0.9)).unwrap();
        assert_relative_eq!(r.value, 4.153_116_694_604_846_6, max_relative = 1e-13);
        assert_relative_eq!(r.trace.t_star.finite().unwrap(), 0.787_796_804_411_149_5, max_relative = 1e-12);
        for i in 0..20 {
            let al = a(i as f64 / 20.0);
            let shifted = evar_laplace(5.0, 1.0, al).unwrap().value;
            assert_relative_eq!(shifted, evar_laplace(0.0, 1.0, al).unwrap().value + 5.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn inverse_gaussian_values() {
        assert_eq!(evar_inverse_gaussian(1.0, 1.0, a(0.0)).unwrap().value, 1.0);
        assert_eq!(evar_inverse_gaussian(2.0, 1.0, a(0.0)).unwrap().value, 2.0);
        let r = evar_inverse_gaussian(1.0, 2.0, a(0.95)).unwrap();
        assert_relative_eq!(r.value, 4.786_825_559_147_175_4, max_relative = 1e-13);
        assert_relative_eq!(r.trace.t_star.finite().unwrap(), 0.956_357_984_675_749_6, max_relative = 1e-12);
        assert!(r.trace.t_star.finite().unwrap() < 2.0 / 2.0);
    }

    #[test]
    fn nig_values() {
        let m = evar_nig(2.0, -1.0, 0.0, 1.0, a(0.0)).unwrap();
        assert_relative_eq!(m.value, -1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_eq!(m.trace.t_star, Minimizer::ZeroLimit);
        let r = evar_nig(2.0, -1.0, 0.0, 1.0, a(0.9)).unwrap();
        assert_relative_eq!(r.value, 1.084_413_613_671_948_3, max_relative = 1e-13);
        let t = r.trace.t_star.finite().unwrap();
        assert!((0.0..=3.0).contains(&t));
        assert_relative_eq!(t, 2.470_280_552_744_021_3, max_relative = 1e-12);
        let shifted = evar_nig(2.0, -1.0, 3.0, 1.0, a(0.9)).unwrap().value;
        assert_relative_eq!(shifted, r.value + 3.0, epsilon = 1e-12);
        assert!(matches!(evar_nig(1.0, 1.0, 0.0, 1.0, a(0.5)), Err(EvarError::Parameter(_))));
        assert!(matches!(evar_nig(0.0, 0.0, 0.0, 1.0, a(0.5)), Err(EvarError::Parameter(_))));
    }

    #[test]
    fn nig_paper_form_agrees_with_rearranged_form() {
        let (al, be, mu, de) = (1.5, 0.4, -0.3, 0.8);
        for i in 1..20 {
            let conf = a(i as f64 / 20.0);
            let r = evar_nig(al, be, mu, de, conf).unwrap();
            let phi = r.trace.intermediates["phi"];
            let t = r.trace.t_star.finite().unwrap();
            let direct = mu + de / t * (phi - (al * al - (be + t) * (be + t)).sqrt());
            assert_relative_eq!(r.value, direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let al = a(0.95);
        assert_eq!(
            evar(&DistributionSpec::normal(0.0, 1.0).unwrap(), al).unwrap(),
            evar_normal(0.0, 1.0, al).unwrap()
        );
        assert_relative_eq!(
            evar(&DistributionSpec::poisson(2.0).unwrap(), a(0.0)).unwrap().value,
            2.0,
            epsilon = 1e-15
        );
        assert_eq!(
            evar(&DistributionSpec::gamma(2.0, 3.0).unwrap(), al).unwrap(),
            evar_gamma(2.0, 3.0, al).unwrap()
        );
        assert_eq!(
            evar(&DistributionSpec::nig(2.0, 1.0, 0.0, 1.0).unwrap(), al).unwrap(),
            evar_nig(2.0, 1.0, 0.0, 1.0, al).unwrap()
        );
    }

    #[test]
    fn quantiles() {
        let e = DistributionSpec::exponential(1.0).unwrap();
        let al = a(-(-1.0f64).exp_m1());
        assert_relative_eq!(quantile_var(&e, al, VarConvention::AlphaQuantile).unwrap(), 1.0, epsilon = 1e-15);
        let n = DistributionSpec::normal(0.0, 1.0).unwrap();
        assert!(quantile_var(&n, a(0.5), VarConvention::AlphaQuantile).unwrap().abs() < 1e-12);
        let l = DistributionSpec::laplace(0.0, 1.0).unwrap();
        assert_relative_eq!(
            quantile_var(&l, a(0.9), VarConvention::AlphaQuantile).unwrap(),
            5f64.ln(),
            epsilon = 1e-15
        );
        // the (1 - alpha)-quantile sits on the other side of the median
        assert_relative_eq!(
            quantile_var(&l, a(0.9), VarConvention::PaperDef3).unwrap(),
            -(5f64.ln()),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            quantile_var(&n, a(0.95), VarConvention::AlphaQuantile).unwrap(),
            1.644_853_626_951_472_7,
            max_relative = 1e-9
        );
        assert!(matches!(
            quantile_var(&DistributionSpec::gamma(1.0, 1.0).unwrap(), a(0.5), VarConvention::AlphaQuantile),
            Err(EvarError::Unsupported(_))
        ));
    }

    #[test]
    fn trace_objective_matches_value() {
        for d in catalogue() {
            for i in 1..100 {
                let al = a(i as f64 / 100.0);
                let r = evar(&d, al).unwrap();
                let t = r.trace.t_star.finite().unwrap();
                let direct = (al.neg_log_tail() + d.log_mgf(t).unwrap()) / t;
                assert_relative_eq!(direct, r.value, max_relative = 1e-10);
                assert_relative_eq!(r.trace.objective_at_t_star, r.value, max_relative = 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn evar_dominates_mean(idx in 0usize..10, x in 0.0f64..0.999) {
            let d = catalogue()[idx];
            let m = d.mean();
            let v = evar(&d, a(x)).unwrap().value;
            prop_assert!(v >= m - 1e-9 * (1.0 + m.abs()), "{} at {x}: {v} < {m}", d.tag());
        }

        #[test]
        fn gamma_scale_homogeneity(k in 0.2f64..20.0, theta in 0.1f64..5.0, c in 0.1f64..10.0, x in 0.0f64..0.999) {
            let base = evar_gamma(k, theta, a(x)).unwrap().value;
            let scaled = evar_gamma(k, c * theta, a(x)).unwrap().value;
            prop_assert!((scaled - c * base).abs() <= 1e-10 * (c * base).abs());
        }

        #[test]
        fn normal_translation(mu in -50.0f64..50.0, sigma in 0.01f64..10.0, x in 0.0f64..0.999) {
            let base = evar_normal(0.0, sigma, a(x)).unwrap().value;
            let shifted = evar_normal(mu, sigma, a(x)).unwrap().value;
            prop_assert!((shifted - base - mu).abs() <= 1e-12 * (1.0 + mu.abs() + base.abs()));
        }
    }
}
