//! Vertical Green function estimates, shift-locus membership and the
//! admissibility certificate that gates the monodromy pipeline.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::skewparam::{SkewError, SkewParam, OVERFLOW_CEILING};

#[derive(Debug, Error)]
pub enum EscapeError {
    #[error("escape norm {0} does not exceed 1; the doubling check needs R > 1")]
    NormTooSmall(f64),
    #[error("alpha = {0} must lie strictly between 1 and the degree")]
    BadAlpha(f64),
    #[error(transparent)]
    Skew(#[from] SkewError),
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EscapeConfig {
    /// Exponent of the escape radius R_λ^α, strictly between 1 and d.
    pub alpha: f64,
    pub max_iter: usize,
    /// Grid size on the unit circle for sampled certificates.
    pub z_samples: usize,
    /// Safety factor ≥ 1 absorbing the sampled-grid gap.
    pub margin: f64,
}

impl Default for EscapeConfig {
    fn default() -> Self {
        EscapeConfig { alpha: 1.5, max_iter: 256, z_samples: 256, margin: 1.25 }
    }
}

impl EscapeConfig {
    pub fn validate(&self, d: usize) -> Result<(), EscapeError> {
        if self.alpha <= 1.0 || self.alpha >= d as f64 {
            return Err(EscapeError::BadAlpha(self.alpha));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GreenEstimate {
    pub value: f64,
    pub certified_positive: bool,
    /// First n with |Q^n| at or above the escape radius, when certified.
    pub escape_step: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub enum ShiftLocusVerdict {
    InD,
    /// A critical orbit that recurs within numerical resolution.
    NotInD { z: [f64; 2], c: [f64; 2] },
    /// Bounded-looking orbits with no evidence of periodicity at this horizon.
    Undecided { witnesses: Vec<([f64; 2], [f64; 2])> },
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub escape_norm: f64,
    pub escape_radius: f64,
    pub in_e: bool,
    pub circle_roots: Vec<[f64; 2]>,
    pub doubling_ok: bool,
    /// min over sampled (z, c) of |q_{λ,z}(c)|.
    pub min_critical_value: f64,
    /// The certificate requires min_critical_value ≥ margin · 2 · R^α.
    pub required_critical_value: f64,
    pub binding_z: [f64; 2],
    pub binding_c: [f64; 2],
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Iterates until |Q^n| clears the escape radius max(R_λ^α, 2), then refines
/// the rate with two extra steps; otherwise reports the finite-horizon value
/// (1/d^max) log+|Q^max| uncertified.
pub fn green_estimate(
    lambda: &SkewParam,
    z: Complex64,
    w: Complex64,
    cfg: &EscapeConfig,
) -> GreenEstimate {
    let d = lambda.d as f64;
    // the lower clamp keeps bounded orbits (|w| ≤ 1 for λ = 0) uncertified
    let radius = lambda.escape_norm().powf(cfg.alpha).max(2.0);
    let mut zk = z;
    let mut wk = w;
    for n in 0..=cfg.max_iter {
        if wk.norm() >= radius {
            // two refinement steps tighten (1/d^n) log|Q^n| toward the limit
            let mut extra = 0usize;
            for _ in 0..2 {
                let next = lambda.fiber_poly(zk).eval(wk);
                if !next.is_finite() || next.norm() > OVERFLOW_CEILING {
                    break;
                }
                wk = next;
                zk = zk.powu(lambda.d as u32);
                extra += 1;
            }
            let value = wk.norm().ln() / d.powi((n + extra) as i32);
            return GreenEstimate { value, certified_positive: true, escape_step: Some(n) };
        }
        if n == cfg.max_iter {
            break;
        }
        let next = lambda.fiber_poly(zk).eval(wk);
        if !next.is_finite() || next.norm() > OVERFLOW_CEILING {
            // overflow is an escape certificate
            let value = OVERFLOW_CEILING.ln() / d.powi((n + 1) as i32);
            return GreenEstimate { value, certified_positive: true, escape_step: Some(n + 1) };
        }
        wk = next;
        zk = zk.powu(lambda.d as u32);
    }
    let value = wk.norm().max(1.0).ln() / d.powi(cfg.max_iter as i32);
    GreenEstimate { value, certified_positive: false, escape_step: None }
}

/// Checks |q_{λ,z}(w)| ≥ 2|w| on random (z ∈ S¹, |w| = R_λ^α), a sampled
/// surrogate for the doubling property of escaping orbits.
pub fn escape_doubling_check(
    lambda: &SkewParam,
    cfg: &EscapeConfig,
    trials: usize,
    seed: u64,
) -> Result<bool, EscapeError> {
    use rand::{Rng, SeedableRng};
    let r = lambda.escape_norm();
    if r <= 1.0 {
        return Err(EscapeError::NormTooSmall(r));
    }
    let radius = r.powf(cfg.alpha);
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    for _ in 0..trials {
        let z = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
        let w = Complex64::from_polar(radius, rng.gen_range(0.0..std::f64::consts::TAU));
        if lambda.fiber_poly(z).eval(w).norm() < 2.0 * w.norm() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sampled certificate that every fiber critical orbit over the circle
/// escapes. InD is a sampled statement over cfg.z_samples base points, not a
/// proof over all z.
pub fn shift_locus_test(
    lambda: &SkewParam,
    cfg: &EscapeConfig,
) -> Result<ShiftLocusVerdict, EscapeError> {
    cfg.validate(lambda.d)?;
    let mut undecided = Vec::new();
    for k in 0..cfg.z_samples {
        let z = Complex64::from_polar(
            1.0,
            std::f64::consts::TAU * k as f64 / cfg.z_samples as f64,
        );
        for c in lambda.critical_points(z)? {
            let est = green_estimate(lambda, z, c, cfg);
            if est.certified_positive {
                continue;
            }
            if orbit_recurs(lambda, z, c, cfg) {
                return Ok(ShiftLocusVerdict::NotInD { z: pair(z), c: pair(c) });
            }
            undecided.push((pair(z), pair(c)));
        }
    }
    if undecided.is_empty() {
        Ok(ShiftLocusVerdict::InD)
    } else {
        Ok(ShiftLocusVerdict::Undecided { witnesses: undecided })
    }
}

/// Detects a bounded orbit revisiting a previous iterate within numerical
/// resolution over the tested horizon.
fn orbit_recurs(lambda: &SkewParam, z: Complex64, w: Complex64, cfg: &EscapeConfig) -> bool {
    let horizon = cfg.max_iter.min(128);
    let mut orbit = Vec::with_capacity(horizon);
    let mut zk = z;
    let mut wk = w;
    for _ in 0..horizon {
        orbit.push((zk, wk));
        wk = lambda.fiber_poly(zk).eval(wk);
        zk = zk.powu(lambda.d as u32);
        if !wk.is_finite() || wk.norm() > OVERFLOW_CEILING {
            return false;
        }
        if orbit
            .iter()
            .any(|&(zp, wp)| (zp - zk).norm() < 1e-9 && (wp - wk).norm() < 1e-9)
        {
            return true;
        }
    }
    false
}

/// The certificate licensing the monodromy pipeline: the discriminant
/// direction avoids the circle, escaping orbits double, and every sampled
/// critical value clears margin · 2 · R_λ^α.
pub fn admissibility_certificate(
    lambda: &SkewParam,
    cfg: &EscapeConfig,
) -> Result<AdmissibilityReport, EscapeError> {
    cfg.validate(lambda.d)?;
    let r = lambda.escape_norm();
    let radius = r.powf(cfg.alpha);
    // a degenerate discriminant (λ = 0 direction) blocks the certificate the
    // same way circle membership does
    let (in_e, circle_roots) = match lambda.e_membership(1e-6) {
        Ok(pair) => pair,
        Err(SkewError::Degenerate) => (true, Vec::new()),
        Err(e) => return Err(e.into()),
    };

    let doubling_ok = r > 1.0 && escape_doubling_check(lambda, cfg, 1000, 0x5eed)?;

    let mut min_cv = f64::INFINITY;
    let mut binding = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    for k in 0..cfg.z_samples {
        let z = Complex64::from_polar(
            1.0,
            std::f64::consts::TAU * k as f64 / cfg.z_samples as f64,
        );
        let q = lambda.fiber_poly(z);
        for c in lambda.critical_points(z)? {
            let v = q.eval(c).norm();
            if v < min_cv {
                min_cv = v;
                binding = (z, c);
            }
        }
    }
    let required = cfg.margin * 2.0 * radius;
    let admissible = !in_e && doubling_ok && min_cv >= required;
    Ok(AdmissibilityReport {
        admissible,
        escape_norm: r,
        escape_radius: radius,
        in_e,
        circle_roots: circle_roots.iter().map(|&z| pair(z)).collect(),
        doubling_ok,
        min_critical_value: min_cv,
        required_critical_value: required,
        binding_z: pair(binding.0),
        binding_c: pair(binding.1),
    })
}
