//! Test-only numerical helpers, independent of the library's own quadrature.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use evar::DistributionSpec;

/// Double-exponential (exp-sinh) quadrature of `f` over the half line
/// `a + dir * [0, inf)`, with `x = a + dir * scale * exp(pi/2 sinh s)`.
pub fn half_line(f: impl Fn(f64) -> f64, a: f64, dir: f64, scale: f64) -> f64 {
    const H: f64 = 1.0 / 64.0;
    const S_MAX: f64 = 4.0;
    let n = (S_MAX / H) as i64;
    let mut sum = 0.0;
    for i in -n..=n {
        let s = i as f64 * H;
        let e = (FRAC_PI_2 * s.sinh()).exp();
        let x = a + dir * scale * e;
        let jac = scale * FRAC_PI_2 * s.cosh() * e;
        let v = f(x) * jac;
        if v.is_finite() {
            sum += v;
        }
    }
    sum * H
}

/// `∫ g(x) pdf(x) dx` over the support, split at `split` so kinks and
/// support boundaries sit on quadrature endpoints.
pub fn expect(dist: &DistributionSpec, split: f64, scale: f64, lower_bounded: bool, g: impl Fn(f64) -> f64) -> f64 {
    let f = |x: f64| g(x) * dist.pdf(x).unwrap_or(0.0);
    let upper = half_line(&f, split, 1.0, scale);
    if lower_bounded {
        upper
    } else {
        upper + half_line(&f, split, -1.0, scale)
    }
}

/// `∫ pdf` over the support.
pub fn total_mass(dist: &DistributionSpec, split: f64, scale: f64, lower_bounded: bool) -> f64 {
    expect(dist, split, scale, lower_bounded, |_| 1.0)
}

/// One distribution per tag with its three test parameter sets.
pub fn catalogue() -> Vec<(&'static str, Vec<DistributionSpec>)> {
    let d = |r: evar::Result<DistributionSpec>| r.expect("valid parameters");
    vec![
        ("poisson", vec![d(DistributionSpec::poisson(0.5)), d(DistributionSpec::poisson(2.0)), d(DistributionSpec::poisson(10.0))]),
        (
            "compound-poisson-bernoulli",
            vec![
                d(DistributionSpec::compound_poisson_bernoulli(2.0, 0.5)),
                d(DistributionSpec::compound_poisson_bernoulli(3.0, 0.3)),
                d(DistributionSpec::compound_poisson_bernoulli(10.0, 0.9)),
            ],
        ),
        (
            "compound-poisson-normal",
            vec![
                d(DistributionSpec::compound_poisson_normal(1.0, 1.0)),
                d(DistributionSpec::compound_poisson_normal(2.0, 0.5)),
                d(DistributionSpec::compound_poisson_normal(0.5, 2.0)),
            ],
        ),
        (
            "gamma",
            vec![d(DistributionSpec::gamma(2.0, 1.0)), d(DistributionSpec::gamma(0.5, 3.0)), d(DistributionSpec::gamma(10.0, 0.2))],
        ),
        (
            "exponential",
            vec![d(DistributionSpec::exponential(0.5)), d(DistributionSpec::exponential(1.0)), d(DistributionSpec::exponential(4.0))],
        ),
        ("chi-squared", vec![d(DistributionSpec::chi_squared(1)), d(DistributionSpec::chi_squared(3)), d(DistributionSpec::chi_squared(10))]),
        (
            "laplace",
            vec![d(DistributionSpec::laplace(0.0, 1.0)), d(DistributionSpec::laplace(2.0, 0.5)), d(DistributionSpec::laplace(-1.0, 3.0))],
        ),
        (
            "normal",
            vec![d(DistributionSpec::normal(0.0, 1.0)), d(DistributionSpec::normal(1.0, 2.0)), d(DistributionSpec::normal(-3.0, 0.5))],
        ),
        (
            "inverse-gaussian",
            vec![
                d(DistributionSpec::inverse_gaussian(1.0, 2.0)),
                d(DistributionSpec::inverse_gaussian(2.0, 1.0)),
                d(DistributionSpec::inverse_gaussian(0.5, 5.0)),
            ],
        ),
        (
            "nig",
            vec![
                d(DistributionSpec::nig(2.0, -1.0, 0.0, 1.0)),
                d(DistributionSpec::nig(1.0, 0.5, 0.0, 2.0)),
                d(DistributionSpec::nig(3.0, 2.5, 1.0, 0.3)),
            ],
        ),
    ]
}

/// The 21 confidence levels 0.01, 0.05, 0.10, ..., 0.95, 0.99.
pub fn alpha_levels() -> Vec<f64> {
    let mut v = vec![0.01];
    v.extend((1..=19).map(|i| i as f64 * 0.05));
    v.push(0.99);
    v
}
