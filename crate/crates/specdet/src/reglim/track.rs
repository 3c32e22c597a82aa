use num_complex::Complex64;
use rayon::prelude::*;

use super::{RayPlan, ReglimError};
use crate::numerics::{normalize_angle, LogComplex};
use crate::thread_pool;

/// A function sampled along a ray. Values are produced in log form so that
/// exponential growth along the ray never overflows. Implementations may
/// additionally expose the logarithmic λ-derivative, which lets the tracker
/// resolve arbitrarily fast phase winding by quadrature instead of sample
/// refinement.
pub trait RaySampler: Sync {
    fn value(&self, lambda: Complex64) -> Result<LogComplex, String>;

    /// d/dλ log f(λ), if cheaply available.
    fn log_derivative(&self, _lambda: Complex64) -> Option<Result<Complex64, String>> {
        None
    }
}

impl<F> RaySampler for F
where
    F: Fn(Complex64) -> Result<LogComplex, String> + Sync,
{
    fn value(&self, lambda: Complex64) -> Result<LogComplex, String> {
        self(lambda)
    }
}

/// Samples along a ray with tracked (branch-continuous) logarithms.
#[derive(Debug, Clone)]
pub struct RaySamples {
    pub radii: Vec<f64>,
    /// Tracked logs: `exp(logs[k])` equals the sampled value at `radii[k]`,
    /// and consecutive imaginary parts differ by less than π.
    pub logs: Vec<Complex64>,
    pub direction: f64,
}

/// Continuous logarithm of an ordered list of nonzero complex values.
///
/// The first entry receives its principal logarithm; each subsequent entry
/// takes the branch nearest its predecessor. Raw phase steps of π/2 or more
/// are treated as unresolvable for a fixed list (the ray sampler refines or
/// integrates instead) and reported as `PhaseJumpUnresolved` with the
/// sample index in the radius slot.
pub fn track_log(values: &[Complex64]) -> Result<Vec<Complex64>, ReglimError> {
    let scaled: Vec<LogComplex> = values.iter().map(|&v| LogComplex::from_complex(v)).collect();
    track_log_scaled(&scaled)
}

/// [`track_log`] for values already in log form.
pub fn track_log_scaled(values: &[LogComplex]) -> Result<Vec<Complex64>, ReglimError> {
    let mut out: Vec<Complex64> = Vec::with_capacity(values.len());
    for (k, v) in values.iter().enumerate() {
        check_sample(v, k as f64)?;
        let phase = if k == 0 {
            normalize_angle(v.phase)
        } else {
            let prev = out[k - 1].im;
            let step = normalize_angle(v.phase - values[k - 1].phase);
            if step.abs() >= std::f64::consts::FRAC_PI_2 {
                return Err(ReglimError::PhaseJumpUnresolved {
                    r_lo: (k - 1) as f64,
                    r_hi: k as f64,
                    jump: step.abs(),
                    rounds: 0,
                });
            }
            prev + step
        };
        out.push(Complex64::new(v.log_abs, phase));
    }
    Ok(out)
}

fn check_sample(v: &LogComplex, radius: f64) -> Result<(), ReglimError> {
    if v.is_zero() {
        return Err(ReglimError::ZeroValue { radius });
    }
    if !v.log_abs.is_finite() || !v.phase.is_finite() {
        return Err(ReglimError::NonFiniteValue { radius });
    }
    Ok(())
}

/// Sample `f` on the plan's geometric grid and return branch-tracked logs.
///
/// Every consecutive gap is resolved explicitly: by adaptive Gauss–Legendre
/// quadrature of the sampler's logarithmic derivative when available, and
/// otherwise by recursive midpoint bisection (up to `plan.refinement_cap`
/// levels per gap). Both paths detect winding that a plain mod-2π unwrap of
/// the base grid would alias away.
pub fn sample_ray(plan: &RayPlan, sampler: &dyn RaySampler) -> Result<RaySamples, ReglimError> {
    assert!(plan.r0 > 0.0 && plan.ratio > 1.0, "invalid ray plan");
    assert!(plan.count >= 8, "ray plan needs at least 8 samples");
    let base = plan.radii();
    let values = evaluate(plan, &base, sampler)?;

    let has_derivative = sampler.log_derivative(plan.lambda(base[0])).is_some();

    let mut radii: Vec<f64> = vec![base[0]];
    let mut logs: Vec<Complex64> =
        vec![Complex64::new(values[0].log_abs, normalize_angle(values[0].phase))];
    for k in 1..base.len() {
        let (lo_r, hi_r) = (base[k - 1], base[k]);
        let (lo_v, hi_v) = (values[k - 1], values[k]);
        if has_derivative {
            let delta = integrate_gap(plan, sampler, lo_r, hi_r).map_err(|message| {
                ReglimError::SampleFailed {
                    lambda: plan.lambda(hi_r),
                    message,
                }
            })?;
            let prev = *logs.last().unwrap();
            // quadrature fixes the winding; snap onto the sampled phase
            let raw = prev.im + delta.im;
            let phase = raw + normalize_angle(hi_v.phase - raw);
            radii.push(hi_r);
            logs.push(Complex64::new(hi_v.log_abs, phase));
        } else {
            let mut segment = Vec::new();
            bisect_gap(
                plan,
                sampler,
                (lo_r, lo_v),
                (hi_r, hi_v),
                plan.refinement_cap,
                &mut segment,
            )?;
            // segment holds interior probe points plus the gap end,
            // each paired with its phase increment from the previous point
            for (r, v, step) in segment {
                let prev = *logs.last().unwrap();
                radii.push(r);
                logs.push(Complex64::new(v.log_abs, prev.im + step));
            }
        }
    }
    Ok(RaySamples {
        radii,
        logs,
        direction: plan.direction,
    })
}

/// Recursively resolve one gap by midpoint probes. Appends in-order
/// `(radius, value, phase_step_from_previous)` entries covering `(lo, hi]`.
///
/// A subgap is accepted once its raw step is below π/3 and a probe confirms
/// that the two half-steps recombine to it; otherwise it is split further,
/// to at most `depth` levels.
fn bisect_gap(
    plan: &RayPlan,
    sampler: &dyn RaySampler,
    lo: (f64, LogComplex),
    hi: (f64, LogComplex),
    depth: usize,
    out: &mut Vec<(f64, LogComplex, f64)>,
) -> Result<(), ReglimError> {
    let step = normalize_angle(hi.1.phase - lo.1.phase);
    if depth == 0 {
        if step.abs() < std::f64::consts::FRAC_PI_3 {
            out.push((hi.0, hi.1, step));
            return Ok(());
        }
        return Err(ReglimError::PhaseJumpUnresolved {
            r_lo: lo.0,
            r_hi: hi.0,
            jump: step.abs(),
            rounds: plan.refinement_cap,
        });
    }
    let mid_r = (lo.0 * hi.0).sqrt();
    let mid_v = evaluate(plan, &[mid_r], sampler)?[0];
    let s1 = normalize_angle(mid_v.phase - lo.1.phase);
    let s2 = normalize_angle(hi.1.phase - mid_v.phase);
    let third = std::f64::consts::FRAC_PI_3;
    if step.abs() < third && s1.abs() < third && s2.abs() < third && (s1 + s2 - step).abs() < 1e-9
    {
        // consistent: keep the probe as an extra sample and stop splitting
        out.push((mid_r, mid_v, s1));
        out.push((hi.0, hi.1, s2));
        return Ok(());
    }
    bisect_gap(plan, sampler, lo, (mid_r, mid_v), depth - 1, out)?;
    bisect_gap(plan, sampler, (mid_r, mid_v), hi, depth - 1, out)
}

fn evaluate(
    plan: &RayPlan,
    radii: &[f64],
    sampler: &dyn RaySampler,
) -> Result<Vec<LogComplex>, ReglimError> {
    let results: Vec<(f64, Result<LogComplex, String>)> = if radii.len() > 1 {
        thread_pool().install(|| {
            radii
                .par_iter()
                .map(|&r| (r, sampler.value(plan.lambda(r))))
                .collect()
        })
    } else {
        radii
            .iter()
            .map(|&r| (r, sampler.value(plan.lambda(r))))
            .collect()
    };
    let mut out = Vec::with_capacity(results.len());
    for (radius, res) in results {
        let value = res.map_err(|message| ReglimError::SampleFailed {
            lambda: plan.lambda(radius),
            message,
        })?;
        check_sample(&value, radius)?;
        out.push(value);
    }
    Ok(out)
}

/// Integrate d/dλ log f over the ray segment [r_lo, r_hi] by adaptive
/// composite Gauss–Legendre; the result is the continuous log increment.
fn integrate_gap(
    plan: &RayPlan,
    sampler: &dyn RaySampler,
    r_lo: f64,
    r_hi: f64,
) -> Result<Complex64, String> {
    let dir = Complex64::from_polar(1.0, plan.direction);
    let integrand = |r: f64| -> Result<Complex64, String> {
        match sampler.log_derivative(plan.lambda(r)) {
            Some(res) => res.map(|d| d * dir),
            None => Err("log derivative unavailable mid-segment".into()),
        }
    };
    let mut panels = 1usize;
    let mut prev: Option<Complex64> = None;
    for _ in 0..12 {
        let mut total = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let a = r_lo + (r_hi - r_lo) * p as f64 / panels as f64;
            let b = r_lo + (r_hi - r_lo) * (p + 1) as f64 / panels as f64;
            total += gauss_legendre_10(&integrand, a, b)?;
        }
        if let Some(last) = prev {
            if (total - last).norm() < 1e-9 * (1.0 + total.norm()) {
                return Ok(total);
            }
        }
        prev = Some(total);
        panels *= 2;
    }
    // non-smooth derivative along the segment: an eigenvalue sits on or
    // near the ray
    Err("phase quadrature did not converge across ray segment".into())
}

fn gauss_legendre_10(
    f: &dyn Fn(f64) -> Result<Complex64, String>,
    a: f64,
    b: f64,
) -> Result<Complex64, String> {
    // 10-point Gauss–Legendre nodes/weights on [-1, 1]
    const X: [f64; 5] = [
        0.148874338981631211,
        0.433395394129247191,
        0.679409568299024406,
        0.865063366688984511,
        0.973906528517171720,
    ];
    const W: [f64; 5] = [
        0.295524224714752870,
        0.269266719309996355,
        0.219086362515982044,
        0.149451349150580593,
        0.066671344308688138,
    ];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..5 {
        sum += (f(mid + half * X[i])? + f(mid - half * X[i])?) * W[i];
    }
    Ok(sum * half)
}
