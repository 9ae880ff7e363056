//! The ten supported loss distributions.
//!
//! A [`DistributionSpec`] is a validated parameter set. Only validated specs
//! can be built from outside this module, so every downstream routine may
//! assume the parameter constraints hold.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Bernoulli, Distribution, Exp, Gamma, InverseGaussian, Normal, Open01, Poisson, StandardNormal};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{EvarError, Result};
use crate::special::bessel_k1_scaled;

/// Parameters of one supported distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    /// Poisson with intensity `lambda`.
    Poisson { lambda: f64 },
    /// Poisson(`lambda`) number of Bernoulli(`p`) jumps.
    CompoundPoissonBernoulli { lambda: f64, p: f64 },
    /// Poisson(`lambda`) number of N(0, `sigma`^2) jumps.
    CompoundPoissonNormal { lambda: f64, sigma: f64 },
    /// Gamma with shape `k` and scale `theta`.
    Gamma { k: f64, theta: f64 },
    /// Exponential with rate `lambda`.
    Exponential { lambda: f64 },
    /// Chi-squared with `k` degrees of freedom.
    ChiSquared { k: u32 },
    /// Laplace with location `mu` and scale `b`.
    Laplace { mu: f64, b: f64 },
    /// Normal with mean `mu` and standard deviation `sigma`.
    Normal { mu: f64, sigma: f64 },
    /// Inverse Gaussian (Wald) with mean `mu` and shape `lambda`.
    InverseGaussian { mu: f64, lambda: f64 },
    /// Normal inverse Gaussian with tail `alpha`, asymmetry `beta`,
    /// location `mu` and scale `delta`.
    Nig { alpha: f64, beta: f64, mu: f64, delta: f64 },
}

/// Supremum of the set of `t >= 0` where the MGF is finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfDomain {
    pub sup_t: f64,
    pub closed_at_sup: bool,
}

impl MgfDomain {
    fn open(sup_t: f64) -> Self {
        Self { sup_t, closed_at_sup: false }
    }

    pub fn is_bounded(&self) -> bool {
        self.sup_t.is_finite()
    }

    /// Whether `t >= 0` lies in the domain.
    pub fn contains(&self, t: f64) -> bool {
        t >= 0.0 && (t < self.sup_t || (self.closed_at_sup && t == self.sup_t))
    }
}

/// A validated distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DistributionSpec(Kind);

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(EvarError::Parameter(format!("{name} must be a positive finite number, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(EvarError::Parameter(format!("{name} must be finite, got {v}")))
    }
}

/// Distribution tags with their parameter names, in CLI order.
pub const SCHEMAS: [(&str, &[&str]); 10] = [
    ("poisson", &["lambda"]),
    ("compound-poisson-bernoulli", &["lambda", "p"]),
    ("compound-poisson-normal", &["lambda", "sigma"]),
    ("gamma", &["k", "theta"]),
    ("exponential", &["lambda"]),
    ("chi-squared", &["k"]),
    ("laplace", &["mu", "b"]),
    ("normal", &["mu", "sigma"]),
    ("inverse-gaussian", &["mu", "lambda"]),
    ("nig", &["alpha", "beta", "mu", "delta"]),
];

impl DistributionSpec {
    /// Validates `kind` and wraps it.
    pub fn new(kind: Kind) -> Result<Self> {
        match kind {
            Kind::Poisson { lambda } | Kind::Exponential { lambda } => positive("lambda", lambda)?,
            Kind::CompoundPoissonBernoulli { lambda, p } => {
                positive("lambda", lambda)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(EvarError::Parameter(format!("p must lie in [0, 1], got {p}")));
                }
            }
            Kind::CompoundPoissonNormal { lambda, sigma } => {
                positive("lambda", lambda)?;
                positive("sigma", sigma)?;
            }
            Kind::Gamma { k, theta } => {
                positive("k", k)?;
                positive("theta", theta)?;
            }
            Kind::ChiSquared { k } => {
                if k == 0 {
                    return Err(EvarError::Parameter("k must be a positive integer".into()));
                }
            }
            Kind::Laplace { mu, b } => {
                finite("mu", mu)?;
                positive("b", b)?;
            }
            Kind::Normal { mu, sigma } => {
                finite("mu", mu)?;
                positive("sigma", sigma)?;
            }
            Kind::InverseGaussian { mu, lambda } => {
                positive("mu", mu)?;
                positive("lambda", lambda)?;
            }
            Kind::Nig { alpha, beta, mu, delta } => {
                positive("alpha", alpha)?;
                finite("beta", beta)?;
                finite("mu", mu)?;
                positive("delta", delta)?;
                if beta.abs() >= alpha {
                    return Err(EvarError::Parameter(format!(
                        "NIG requires |beta| < alpha, got alpha = {alpha}, beta = {beta}"
                    )));
                }
            }
        }
        Ok(Self(kind))
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::new(Kind::Poisson { lambda })
    }

    pub fn compound_poisson_bernoulli(lambda: f64, p: f64) -> Result<Self> {
        Self::new(Kind::CompoundPoissonBernoulli { lambda, p })
    }

    pub fn compound_poisson_normal(lambda: f64, sigma: f64) -> Result<Self> {
        Self::new(Kind::CompoundPoissonNormal { lambda, sigma })
    }

    pub fn gamma(k: f64, theta: f64) -> Result<Self> {
        Self::new(Kind::Gamma { k, theta })
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        Self::new(Kind::Exponential { lambda })
    }

    pub fn chi_squared(k: u32) -> Result<Self> {
        Self::new(Kind::ChiSquared { k })
    }

    pub fn laplace(mu: f64, b: f64) -> Result<Self> {
        Self::new(Kind::Laplace { mu, b })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Kind::Normal { mu, sigma })
    }

    pub fn inverse_gaussian(mu: f64, lambda: f64) -> Result<Self> {
        Self::new(Kind::InverseGaussian { mu, lambda })
    }

    pub fn nig(alpha: f64, beta: f64, mu: f64, delta: f64) -> Result<Self> {
        Self::new(Kind::Nig { alpha, beta, mu, delta })
    }

    /// Builds a spec from a tag and named parameters, e.g. `("gamma", [("k", 2.0), ("theta", 1.0)])`.
    ///
    /// Every parameter of the schema must be given exactly once; unknown names are rejected.
    pub fn from_named(tag: &str, params: &[(String, f64)]) -> Result<Self> {
        let (_, names) = SCHEMAS
            .iter()
            .find(|(t, _)| *t == tag)
            .ok_or_else(|| EvarError::Parameter(format!("unknown distribution `{tag}`")))?;
        for (name, _) in params {
            if !names.contains(&name.as_str()) {
                return Err(EvarError::Parameter(format!(
                    "unknown parameter `{name}` for {tag} (expected {})",
                    names.join(", ")
                )));
            }
        }
        let mut values = Vec::with_capacity(names.len());
        for &name in names.iter() {
            let mut found = params.iter().filter(|(n, _)| n == name);
            let value = match (found.next(), found.next()) {
                (Some((_, v)), None) => *v,
                (None, _) => {
                    return Err(EvarError::Parameter(format!("missing parameter `{name}` for {tag}")))
                }
                (Some(_), Some(_)) => {
                    return Err(EvarError::Parameter(format!("parameter `{name}` given twice")))
                }
            };
            values.push(value);
        }
        let v = |i: usize| values[i];
        match tag {
            "poisson" => Self::poisson(v(0)),
            "compound-poisson-bernoulli" => Self::compound_poisson_bernoulli(v(0), v(1)),
            "compound-poisson-normal" => Self::compound_poisson_normal(v(0), v(1)),
            "gamma" => Self::gamma(v(0), v(1)),
            "exponential" => Self::exponential(v(0)),
            "chi-squared" => {
                let k = v(0);
                if k.fract() != 0.0 || k < 1.0 || k > u32::MAX as f64 {
                    return Err(EvarError::Parameter(format!("k must be a positive integer, got {k}")));
                }
                Self::chi_squared(k as u32)
            }
            "laplace" => Self::laplace(v(0), v(1)),
            "normal" => Self::normal(v(0), v(1)),
            "inverse-gaussian" => Self::inverse_gaussian(v(0), v(1)),
            "nig" => Self::nig(v(0), v(1), v(2), v(3)),
            _ => unreachable!("schema table covers every tag"),
        }
    }

    pub fn kind(&self) -> &Kind {
        &self.0
    }

    /// Stable lowercase tag.
    pub fn tag(&self) -> &'static str {
        match self.0 {
            Kind::Poisson { .. } => "poisson",
            Kind::CompoundPoissonBernoulli { .. } => "compound-poisson-bernoulli",
            Kind::CompoundPoissonNormal { .. } => "compound-poisson-normal",
            Kind::Gamma { .. } => "gamma",
            Kind::Exponential { .. } => "exponential",
            Kind::ChiSquared { .. } => "chi-squared",
            Kind::Laplace { .. } => "laplace",
            Kind::Normal { .. } => "normal",
            Kind::InverseGaussian { .. } => "inverse-gaussian",
            Kind::Nig { .. } => "nig",
        }
    }

    /// Parameters as `(name, value)` pairs in schema order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self.0 {
            Kind::Poisson { lambda } | Kind::Exponential { lambda } => vec![("lambda", lambda)],
            Kind::CompoundPoissonBernoulli { lambda, p } => vec![("lambda", lambda), ("p", p)],
            Kind::CompoundPoissonNormal { lambda, sigma } => vec![("lambda", lambda), ("sigma", sigma)],
            Kind::Gamma { k, theta } => vec![("k", k), ("theta", theta)],
            Kind::ChiSquared { k } => vec![("k", k as f64)],
            Kind::Laplace { mu, b } => vec![("mu", mu), ("b", b)],
            Kind::Normal { mu, sigma } => vec![("mu", mu), ("sigma", sigma)],
            Kind::InverseGaussian { mu, lambda } => vec![("mu", mu), ("lambda", lambda)],
            Kind::Nig { alpha, beta, mu, delta } => {
                vec![("alpha", alpha), ("beta", beta), ("mu", mu), ("delta", delta)]
            }
        }
    }

    pub fn mgf_domain(&self) -> MgfDomain {
        match self.0 {
            Kind::Poisson { .. }
            | Kind::CompoundPoissonBernoulli { .. }
            | Kind::CompoundPoissonNormal { .. }
            | Kind::Normal { .. } => MgfDomain::open(f64::INFINITY),
            Kind::Gamma { theta, .. } => MgfDomain::open(1.0 / theta),
            Kind::Exponential { lambda } => MgfDomain::open(lambda),
            Kind::ChiSquared { .. } => MgfDomain::open(0.5),
            Kind::Laplace { b, .. } => MgfDomain::open(1.0 / b),
            Kind::InverseGaussian { mu, lambda } => MgfDomain::open(lambda / (2.0 * mu * mu)),
            Kind::Nig { alpha, beta, .. } => MgfDomain { sup_t: alpha - beta, closed_at_sup: true },
        }
    }

    /// Log of the moment-generating function at `t >= 0`.
    pub fn log_mgf(&self, t: f64) -> Result<f64> {
        if !self.mgf_domain().contains(t) {
            return Err(EvarError::Domain(format!(
                "t = {t} is outside the MGF domain of {}",
                self.tag()
            )));
        }
        Ok(self.log_mgf_in_domain(t))
    }

    /// Same as [`log_mgf`](Self::log_mgf) without the domain check.
    pub(crate) fn log_mgf_in_domain(&self, t: f64) -> f64 {
        match self.0 {
            Kind::Poisson { lambda } => lambda * t.exp_m1(),
            // p = 0 is a point mass at zero; avoid 0 * inf once expm1 overflows
            Kind::CompoundPoissonBernoulli { p, .. } if p == 0.0 => 0.0,
            Kind::CompoundPoissonBernoulli { lambda, p } => lambda * p * t.exp_m1(),
            Kind::CompoundPoissonNormal { lambda, sigma } => lambda * (0.5 * sigma * sigma * t * t).exp_m1(),
            Kind::Gamma { k, theta } => -k * (-theta * t).ln_1p(),
            Kind::Exponential { lambda } => -(-t / lambda).ln_1p(),
            Kind::ChiSquared { k } => -0.5 * k as f64 * (-2.0 * t).ln_1p(),
            Kind::Laplace { mu, b } => mu * t - (-(b * t) * (b * t)).ln_1p(),
            Kind::Normal { mu, sigma } => mu * t + 0.5 * sigma * sigma * t * t,
            Kind::InverseGaussian { mu, lambda } => {
                // (lambda/mu)(1 - sqrt(1 - u)) = 2 mu t / (1 + sqrt(1 - u))
                let u = 2.0 * mu * mu * t / lambda;
                2.0 * mu * t / (1.0 + (1.0 - u).max(0.0).sqrt())
            }
            Kind::Nig { alpha, beta, mu, delta } => {
                // delta (g0 - g(t)) with g(t) = sqrt(alpha^2 - (beta + t)^2)
                let g0 = (alpha * alpha - beta * beta).sqrt();
                let gt = (alpha * alpha - (beta + t) * (beta + t)).max(0.0).sqrt();
                mu * t + delta * t * (2.0 * beta + t) / (g0 + gt)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self.0 {
            Kind::Poisson { lambda } => lambda,
            Kind::CompoundPoissonBernoulli { lambda, p } => lambda * p,
            Kind::CompoundPoissonNormal { .. } => 0.0,
            Kind::Gamma { k, theta } => k * theta,
            Kind::Exponential { lambda } => 1.0 / lambda,
            Kind::ChiSquared { k } => k as f64,
            Kind::Laplace { mu, .. } | Kind::Normal { mu, .. } | Kind::InverseGaussian { mu, .. } => mu,
            Kind::Nig { alpha, beta, mu, delta } => mu + delta * beta / (alpha * alpha - beta * beta).sqrt(),
        }
    }

    /// Probability density at `x` for the continuous distributions.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        let outside = || EvarError::Domain(format!("x = {x} is outside the support of {}", self.tag()));
        if x.is_nan() {
            return Err(outside());
        }
        match self.0 {
            Kind::Poisson { .. } | Kind::CompoundPoissonBernoulli { .. } | Kind::CompoundPoissonNormal { .. } => {
                Err(EvarError::Unsupported(format!("{} has no density", self.tag())))
            }
            Kind::Gamma { k, theta } => {
                if x <= 0.0 {
                    return Err(outside());
                }
                Ok(gamma_pdf(k, theta, x))
            }
            Kind::Exponential { lambda } => {
                if x < 0.0 {
                    return Err(outside());
                }
                Ok(lambda * (-lambda * x).exp())
            }
            Kind::ChiSquared { k } => {
                if x <= 0.0 {
                    return Err(outside());
                }
                Ok(gamma_pdf(0.5 * k as f64, 2.0, x))
            }
            Kind::Laplace { mu, b } => Ok((-(x - mu).abs() / b).exp() / (2.0 * b)),
            Kind::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                Ok((-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt()))
            }
            Kind::InverseGaussian { mu, lambda } => {
                if x <= 0.0 {
                    return Err(outside());
                }
                let d = x - mu;
                Ok((lambda / (2.0 * PI * x * x * x)).sqrt() * (-lambda * d * d / (2.0 * mu * mu * x)).exp())
            }
            Kind::Nig { alpha, beta, mu, delta } => {
                let d = x - mu;
                let q = delta.hypot(d);
                let g0 = (alpha * alpha - beta * beta).sqrt();
                let z = alpha * q;
                // K1(z) = exp(-z) * scaled K1
                let log_scale = delta * g0 + beta * d - z;
                Ok(alpha * delta * bessel_k1_scaled(z) / (PI * q) * log_scale.exp())
            }
        }
    }

    /// Draws `n` i.i.d. samples from a ChaCha20 stream seeded with `seed`.
    pub fn sample(&self, seed: u64, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(EvarError::Parameter("sample size must be at least 1".into()));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let bad = |e: &dyn std::fmt::Display| EvarError::Parameter(e.to_string());
        let out = match self.0 {
            Kind::Poisson { lambda } => {
                let d = Poisson::new(lambda).map_err(|e| bad(&e))?;
                (0..n).map(|_| d.sample(&mut rng)).collect()
            }
            Kind::CompoundPoissonBernoulli { lambda, p } => {
                let count = Poisson::new(lambda).map_err(|e| bad(&e))?;
                let jump = Bernoulli::new(p).map_err(|e| bad(&e))?;
                (0..n)
                    .map(|_| {
                        let k = count.sample(&mut rng) as u64;
                        (0..k).filter(|_| jump.sample(&mut rng)).count() as f64
                    })
                    .collect()
            }
            Kind::CompoundPoissonNormal { lambda, sigma } => {
                let count = Poisson::new(lambda).map_err(|e| bad(&e))?;
                (0..n)
                    .map(|_| {
                        let k = count.sample(&mut rng) as u64;
                        (0..k)
                            .map(|_| {
                                let z: f64 = StandardNormal.sample(&mut rng);
                                sigma * z
                            })
                            .sum()
                    })
                    .collect()
            }
            Kind::Gamma { k, theta } => {
                let d = Gamma::new(k, theta).map_err(|e| bad(&e))?;
                (0..n).map(|_| d.sample(&mut rng)).collect()
            }
            Kind::Exponential { lambda } => {
                let d = Exp::new(lambda).map_err(|e| bad(&e))?;
                (0..n).map(|_| d.sample(&mut rng)).collect()
            }
            Kind::ChiSquared { k } => {
                let d = Gamma::new(0.5 * k as f64, 2.0).map_err(|e| bad(&e))?;
                (0..n).map(|_| d.sample(&mut rng)).collect()
            }
            Kind::Laplace { mu, b } => (0..n)
                .map(|_| {
                    let u: f64 = Open01.sample(&mut rng);
                    let u = u - 0.5;
                    mu - b * u.signum() * (-2.0 * u.abs()).ln_1p()
                })
                .collect(),
            Kind::Normal { mu, sigma } => {
                let d = Normal::new(mu, sigma).map_err(|e| bad(&e))?;
                (0..n).map(|_| d.sample(&mut rng)).collect()
            }
            Kind::InverseGaussian { mu, lambda } => {
                let d = InverseGaussian::new(mu, lambda).map_err(|e| bad(&e))?;
                (0..n).map(|_| d.sample(&mut rng)).collect()
            }
            Kind::Nig { alpha, beta, mu, delta } => {
                let g0 = (alpha * alpha - beta * beta).sqrt();
                let mixing = InverseGaussian::new(delta / g0, delta * delta).map_err(|e| bad(&e))?;
                (0..n)
                    .map(|_| {
                        let z = mixing.sample(&mut rng);
                        let n: f64 = StandardNormal.sample(&mut rng);
                        mu + beta * z + z.sqrt() * n
                    })
                    .collect()
            }
        };
        Ok(out)
    }
}

fn gamma_pdf(k: f64, theta: f64, x: f64) -> f64 {
    ((k - 1.0) * x.ln() - x / theta - ln_gamma(k) - k * theta.ln()).exp()
}
