//! Numerical EVaR by direct minimisation of the variational objective.
//!
//! Two estimators share one minimiser:
//!
//! * [`evar_numeric`] uses the analytic log-MGF of the distribution;
//! * [`evar_monte_carlo`] replaces it by the log of the empirical MGF of a
//!   seeded sample.
//!
//! Neither touches the closed forms, so both serve as independent checks on
//! them. Bounded MGF domains are scanned on a uniform grid, unbounded ones
//! are bracketed by doubling or halving from `t = 1`; the bracket is then
//! refined by golden-section search. A bracket that collapses onto the
//! smallest probed `t` is refined on `log t` down to `t_floor`.

use rayon::prelude::*;

use crate::analytic::{objective_unchecked, ConfidenceLevel, EvarResult, EvarTrace, Minimizer};
use crate::distributions::{DistributionSpec, MgfDomain};
use crate::error::{EvarError, Result};

/// `1/phi`, the golden-section shrink factor.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Open MGF domains are probed up to `sup_t * (1 - OPEN_MARGIN)`.
const OPEN_MARGIN: f64 = 1e-9;

/// Sample chunk size for the empirical MGF; fixed so sums are reproducible.
const CHUNK: usize = 1 << 14;

/// One evaluation of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveProbe {
    pub t: f64,
    pub f_value: f64,
}

/// Tuning of the numerical minimiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Relative width at which golden-section search stops.
    pub rel_tol: f64,
    /// Iteration cap for bracketing and for golden-section search.
    pub max_iters: usize,
    /// Grid size used on bounded MGF domains.
    pub grid_points: usize,
    /// Smallest `t` ever probed.
    pub t_floor: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_iters: 200, grid_points: 512, t_floor: 1e-10 }
    }
}

impl OracleOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(EvarError::Parameter(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol)));
        }
        if self.grid_points < 8 {
            return Err(EvarError::Parameter(format!("grid_points must be >= 8, got {}", self.grid_points)));
        }
        if self.max_iters == 0 {
            return Err(EvarError::Parameter("max_iters must be positive".into()));
        }
        if !(self.t_floor > 0.0 && self.t_floor.is_finite()) {
            return Err(EvarError::Parameter(format!("t_floor must be positive, got {}", self.t_floor)));
        }
        Ok(())
    }
}

/// `(-log(1-alpha) + log m(t)) / t`.
pub fn objective(dist: &DistributionSpec, alpha: ConfidenceLevel, t: f64) -> Result<f64> {
    if !(t > 0.0) || !dist.mgf_domain().contains(t) {
        return Err(EvarError::Domain(format!(
            "t = {t} is outside the open MGF domain of {}",
            dist.tag()
        )));
    }
    Ok(objective_unchecked(dist, alpha, t))
}

/// EVaR by minimising the objective built from the analytic log-MGF.
pub fn evar_numeric(dist: &DistributionSpec, alpha: ConfidenceLevel, opts: &OracleOptions) -> Result<EvarResult> {
    opts.validate()?;
    let f = |t: f64| objective_unchecked(dist, alpha, t);
    let (t_star, best) = minimize(&f, dist.mgf_domain(), opts)?;
    Ok(result(best, t_star))
}

/// EVaR by minimising the objective built from the empirical MGF of `n`
/// samples drawn with `seed`.
pub fn evar_monte_carlo(
    dist: &DistributionSpec,
    alpha: ConfidenceLevel,
    n: usize,
    seed: u64,
    opts: &OracleOptions,
) -> Result<EvarResult> {
    opts.validate()?;
    if n < 1000 {
        return Err(EvarError::Parameter(format!("need at least 1000 samples, got {n}")));
    }
    let samples = dist.sample(seed, n)?;
    let emp = EmpiricalMgf::new(samples);
    let c = alpha.neg_log_tail();
    let f = |t: f64| (c + emp.log_mgf(t)) / t;
    let (t_star, best) = minimize(&f, dist.mgf_domain(), opts)?;
    if !best.f_value.is_finite() {
        return Err(EvarError::Domain("empirical objective is not finite at any probed t".into()));
    }
    Ok(result(best, t_star))
}

fn result(best: ObjectiveProbe, t_star: Minimizer) -> EvarResult {
    EvarResult {
        value: best.f_value,
        trace: EvarTrace {
            t_star,
            branch_used: None,
            intermediates: Default::default(),
            objective_at_t_star: best.f_value,
        },
    }
}

/// `log((1/n) sum exp(t x_i))`, shifted by `t max x_i` against overflow.
struct EmpiricalMgf {
    samples: Vec<f64>,
    max: f64,
    log_n: f64,
}

impl EmpiricalMgf {
    fn new(samples: Vec<f64>) -> Self {
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_n = (samples.len() as f64).ln();
        Self { samples, max, log_n }
    }

    fn log_mgf(&self, t: f64) -> f64 {
        let shift = t * self.max;
        let partial: Vec<f64> = self
            .samples
            .par_chunks(CHUNK)
            .map(|chunk| chunk.iter().map(|&x| (t * x - shift).exp()).sum::<f64>())
            .collect();
        let sum: f64 = partial.iter().sum();
        shift + sum.ln() - self.log_n
    }
}

fn probe(f: &impl Fn(f64) -> f64, t: f64) -> ObjectiveProbe {
    ObjectiveProbe { t, f_value: f(t) }
}

/// Strictly-smaller comparison, so ties keep the earlier (smaller) `t`.
fn better(a: ObjectiveProbe, b: ObjectiveProbe) -> ObjectiveProbe {
    if b.f_value < a.f_value {
        b
    } else {
        a
    }
}

fn minimize(f: &impl Fn(f64) -> f64, domain: MgfDomain, opts: &OracleOptions) -> Result<(Minimizer, ObjectiveProbe)> {
    if domain.is_bounded() {
        minimize_bounded(f, domain, opts)
    } else {
        minimize_unbounded(f, opts)
    }
}

fn minimize_bounded(f: &impl Fn(f64) -> f64, domain: MgfDomain, opts: &OracleOptions) -> Result<(Minimizer, ObjectiveProbe)> {
    let hi = if domain.closed_at_sup { domain.sup_t } else { domain.sup_t * (1.0 - OPEN_MARGIN) };
    let n = opts.grid_points;
    let grid: Vec<ObjectiveProbe> = (1..=n).map(|i| probe(f, hi * i as f64 / n as f64)).collect();
    let (i_best, _) = grid
        .iter()
        .enumerate()
        .fold((0, grid[0]), |(bi, b), (i, &p)| if p.f_value < b.f_value { (i, p) } else { (bi, b) });
    if i_best == 0 {
        return refine_toward_floor(f, grid[1].t, opts);
    }
    let lo = grid[i_best - 1].t;
    let up = grid.get(i_best + 1).map_or(hi, |p| p.t);
    let best = best_of(golden(f, lo, up, opts), grid[i_best]);
    Ok((Minimizer::At(best.t), best))
}

fn minimize_unbounded(f: &impl Fn(f64) -> f64, opts: &OracleOptions) -> Result<(Minimizer, ObjectiveProbe)> {
    let mut cur = probe(f, 1.0);
    let next = probe(f, 2.0);
    if next.f_value < cur.f_value {
        cur = next;
        for _ in 0..opts.max_iters {
            let next = probe(f, 2.0 * cur.t);
            if !(next.f_value < cur.f_value) {
                let best = best_of(golden(f, 0.5 * cur.t, next.t, opts), cur);
                return Ok((Minimizer::At(best.t), best));
            }
            cur = next;
        }
        return Err(EvarError::Convergence(format!(
            "objective still decreasing at t = {} after {} doublings",
            cur.t, opts.max_iters
        )));
    }
    for _ in 0..opts.max_iters {
        let half = 0.5 * cur.t;
        if half < opts.t_floor {
            return refine_toward_floor(f, 2.0 * cur.t, opts);
        }
        let prev = probe(f, half);
        if !(prev.f_value < cur.f_value) {
            let best = best_of(golden(f, half, 2.0 * cur.t, opts), cur);
            return Ok((Minimizer::At(best.t), best));
        }
        cur = prev;
    }
    Err(EvarError::Convergence(format!(
        "objective still decreasing at t = {} after {} halvings",
        cur.t, opts.max_iters
    )))
}

/// Golden-section search on `log t` over `[t_floor, upper]`, for minima near
/// the origin. Lands on the limit marker if the result hugs `t_floor`.
fn refine_toward_floor(f: &impl Fn(f64) -> f64, upper: f64, opts: &OracleOptions) -> Result<(Minimizer, ObjectiveProbe)> {
    let g = |u: f64| f(u.exp());
    let lo = opts.t_floor.ln();
    let found = golden_abs(&g, lo, upper.ln(), opts);
    let floor = probe(f, opts.t_floor);
    let at_floor = found.t - lo <= 10.0 * opts.rel_tol || floor.f_value <= found.f_value;
    if at_floor {
        Ok((Minimizer::ZeroLimit, floor))
    } else {
        let t = found.t.exp();
        Ok((Minimizer::At(t), ObjectiveProbe { t, f_value: found.f_value }))
    }
}

fn best_of(a: ObjectiveProbe, b: ObjectiveProbe) -> ObjectiveProbe {
    better(b, a)
}

/// Golden-section search on `[a, b]`, stopping at relative width `rel_tol`.
fn golden(f: &impl Fn(f64) -> f64, a: f64, b: f64, opts: &OracleOptions) -> ObjectiveProbe {
    golden_with(f, a, b, opts, |lo, hi| opts.rel_tol * 0.5 * (lo.abs() + hi.abs()))
}

/// Golden-section search with absolute stopping width `rel_tol`, for use on
/// `log t` where an absolute width is a relative width in `t`.
fn golden_abs(f: &impl Fn(f64) -> f64, a: f64, b: f64, opts: &OracleOptions) -> ObjectiveProbe {
    golden_with(f, a, b, opts, |_, _| opts.rel_tol)
}

fn golden_with(
    f: &impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    opts: &OracleOptions,
    width: impl Fn(f64, f64) -> f64,
) -> ObjectiveProbe {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..opts.max_iters {
        if b - a <= width(a, b) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        ObjectiveProbe { t: x1, f_value: f1 }
    } else {
        ObjectiveProbe { t: x2, f_value: f2 }
    }
}
