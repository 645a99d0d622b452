//! Parameter factory: families with prescribed monodromy cycle type built
//! from split products, the quadratic disk-root count, and named presets.

use num_complex::Complex64;
use thiserror::Error;

use crate::cpoly::CPoly;
use crate::escape::{admissibility_certificate, EscapeConfig, EscapeError};
use crate::skewparam::{SkewError, SkewParam};

#[derive(Debug, Error)]
pub enum FactoryError {
    #[error("invalid cycle specification: {0}")]
    SpecInvalid(String),
    #[error("normalization failed: {0}")]
    NormalizationFailed(String),
    #[error("quadratic coefficient family is identically zero")]
    AllZero,
    #[error("quadratic coefficient family has a root on the unit circle")]
    BoundaryRoot,
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("no admissible rescaling found up to 2^{0}")]
    NoAdmissibleScale(u32),
    #[error(transparent)]
    Skew(#[from] SkewError),
    #[error(transparent)]
    Escape(#[from] EscapeError),
}

/// Requested cycle structure of the base monodromy: `fixed` fixed letters at
/// radius `radii[0]` (when fixed > 0) and one cycle of length
/// `cycle_lengths[j]` per remaining radius. Radii must increase strictly.
#[derive(Clone, Debug)]
pub struct CycleSpec {
    pub d: usize,
    pub fixed: usize,
    pub cycle_lengths: Vec<usize>,
    pub radii: Vec<f64>,
}

impl CycleSpec {
    /// Default radii 2, 3, 4, … in spec order.
    pub fn with_default_radii(d: usize, fixed: usize, cycle_lengths: Vec<usize>) -> CycleSpec {
        let count = usize::from(fixed > 0) + cycle_lengths.len();
        let radii = (0..count).map(|i| (i + 2) as f64).collect();
        CycleSpec { d, fixed, cycle_lengths, radii }
    }

    pub fn validate(&self) -> Result<(), FactoryError> {
        if self.d < 2 {
            return Err(FactoryError::SpecInvalid("degree must be at least 2".into()));
        }
        if self.cycle_lengths.iter().any(|&l| l < 2) {
            return Err(FactoryError::SpecInvalid("cycle lengths must be at least 2".into()));
        }
        let total: usize = self.fixed + self.cycle_lengths.iter().sum::<usize>();
        if total != self.d {
            return Err(FactoryError::SpecInvalid(format!(
                "fixed + cycles = {total} does not match degree {}",
                self.d
            )));
        }
        let expected_radii = usize::from(self.fixed > 0) + self.cycle_lengths.len();
        if self.radii.len() != expected_radii {
            return Err(FactoryError::SpecInvalid(format!(
                "expected {expected_radii} radii, got {}",
                self.radii.len()
            )));
        }
        if self.radii.iter().any(|&r| r <= 0.0)
            || self.radii.windows(2).any(|p| p[1] <= p[0])
        {
            return Err(FactoryError::SpecInvalid(
                "radii must be positive and strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// Ascending cycle type of the monodromy this spec should realize.
    pub fn expected_cycle_type(&self) -> Vec<usize> {
        let mut t = vec![1; self.fixed];
        t.extend_from_slice(&self.cycle_lengths);
        t.sort_unstable();
        t
    }
}

/// Multiplies bivariate polynomials stored as w-power → coefficient in z.
fn bivariate_mul(a: &[CPoly], b: &[CPoly]) -> Vec<CPoly> {
    let mut out = vec![CPoly::zero(); a.len() + b.len() - 1];
    for (i, pa) in a.iter().enumerate() {
        if pa.is_zero() {
            continue;
        }
        for (j, pb) in b.iter().enumerate() {
            if pb.is_zero() {
                continue;
            }
            out[i + j] = out[i + j].add(&pa.mul(pb));
        }
    }
    out
}

/// Substitutes w = v + β(z) into a monic bivariate polynomial.
fn shift_w(coeffs: &[CPoly], beta: &CPoly) -> Vec<CPoly> {
    let n = coeffs.len();
    let mut beta_pows = vec![CPoly::constant(Complex64::new(1.0, 0.0))];
    for _ in 1..n {
        beta_pows.push(beta_pows.last().unwrap().mul(beta));
    }
    let mut binom = vec![vec![0f64; n]; n];
    for j in 0..n {
        binom[j][0] = 1.0;
        for i in 1..=j {
            binom[j][i] = binom[j - 1][i - 1] + if i <= j - 1 { binom[j - 1][i] } else { 0.0 };
        }
    }
    let mut out = vec![CPoly::zero(); n];
    for (j, cj) in coeffs.iter().enumerate() {
        if cj.is_zero() {
            continue;
        }
        for i in 0..=j {
            let term = cj
                .mul(&beta_pows[j - i])
                .scale(Complex64::new(binom[j][i], 0.0));
            out[i] = out[i].add(&term);
        }
    }
    out
}

/// Builds the parameter whose fiber polynomial is the split product
/// (w^δ − R₀^δ z^δ)·∏ⱼ (w^{dⱼ} − Rⱼ^{dⱼ} z), rescaled by `scale`.
///
/// With δ = 1 the product has a w^{d−1} term; the change of variable
/// w ↦ w + (R₀/d)z removes it without altering strand differences, so the
/// braid class is untouched.
pub fn cycle_type_params(spec: &CycleSpec, scale: f64) -> Result<SkewParam, FactoryError> {
    spec.validate()?;
    if scale <= 0.0 {
        return Err(FactoryError::SpecInvalid("scale must be positive".into()));
    }
    let d = spec.d;
    let one = Complex64::new(1.0, 0.0);
    let mut poly = vec![CPoly::constant(one)];
    let mut radii = spec.radii.iter();
    if spec.fixed > 0 {
        let r0 = *radii.next().unwrap();
        let mut factor = vec![CPoly::zero(); spec.fixed + 1];
        let mut z_part = vec![Complex64::new(0.0, 0.0); spec.fixed + 1];
        z_part[spec.fixed] = Complex64::new(-r0.powi(spec.fixed as i32), 0.0);
        factor[0] = CPoly::new(z_part);
        factor[spec.fixed] = CPoly::constant(one);
        poly = bivariate_mul(&poly, &factor);
    }
    for (&len, &r) in spec.cycle_lengths.iter().zip(radii) {
        let mut factor = vec![CPoly::zero(); len + 1];
        factor[0] = CPoly::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(-r.powi(len as i32), 0.0),
        ]);
        factor[len] = CPoly::constant(one);
        poly = bivariate_mul(&poly, &factor);
    }

    if spec.fixed == 1 {
        let r0 = spec.radii[0];
        let beta = CPoly::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(r0 / d as f64, 0.0),
        ]);
        poly = shift_w(&poly, &beta);
    }

    // the shift cancels the w^{d−1} term only up to rounding; drop residue
    let global = poly
        .iter()
        .map(|p| p.coeff_norm())
        .fold(0.0f64, f64::max)
        .max(1.0);
    for p in poly.iter_mut() {
        let cleaned: Vec<Complex64> = (0..=p.degree())
            .map(|k| {
                let c = p.coeff(k);
                if c.norm() < 1e-9 * global {
                    Complex64::new(0.0, 0.0)
                } else {
                    c
                }
            })
            .collect();
        *p = CPoly::new(cleaned);
    }

    if poly.len() != d + 1 || !poly[d - 1].is_zero() {
        return Err(FactoryError::NormalizationFailed(
            "product is not depressed of the right degree".into(),
        ));
    }
    let mut rows = Vec::with_capacity(d - 1);
    for (j, coeff_poly) in poly.iter().enumerate().take(d - 1) {
        let width = d - j + 1;
        if coeff_poly.degree() + 1 > width && !coeff_poly.is_zero() {
            return Err(FactoryError::NormalizationFailed(format!(
                "coefficient of w^{j} exceeds z-degree {}",
                d - j
            )));
        }
        let power = 1.0 / (d - j) as f64;
        let mut row = vec![Complex64::new(0.0, 0.0); width];
        for (k, entry) in row.iter_mut().enumerate() {
            let c = coeff_poly.coeff(k);
            if c.norm() > 0.0 {
                *entry = c.powf(power);
            }
        }
        rows.push(row);
    }
    Ok(SkewParam::new(d, rows)?.scaled(Complex64::new(scale, 0.0)))
}

/// Smallest power-of-two rescaling that passes the admissibility certificate.
pub fn auto_scale(
    lambda: &SkewParam,
    cfg: &EscapeConfig,
) -> Result<(SkewParam, f64), FactoryError> {
    const MAX_EXP: u32 = 20;
    let mut t = 1.0f64;
    for _ in 0..=MAX_EXP {
        let candidate = lambda.scaled(Complex64::new(t, 0.0));
        let report = admissibility_certificate(&candidate, cfg)?;
        if report.admissible {
            return Ok((candidate, t));
        }
        t *= 2.0;
    }
    Err(FactoryError::NoAdmissibleScale(MAX_EXP))
}

/// Number of roots of c² + b²z + a²z² inside the open unit disk; this counts
/// the positive generators of the quadratic braid σ₁^s.
pub fn quad_s(c: Complex64, b: Complex64, a: Complex64) -> Result<usize, FactoryError> {
    let coeffs = [c * c, b * b, a * a];
    let poly = CPoly::new(coeffs.to_vec());
    if poly.is_zero() {
        return Err(FactoryError::AllZero);
    }
    if poly.degree() == 0 {
        return Ok(0);
    }
    let roots = poly
        .roots(1e-12, 2000)
        .map_err(|_| FactoryError::NormalizationFailed("quadratic root finding failed".into()))?;
    let mut count = 0;
    for r in roots {
        if (r.norm() - 1.0).abs() <= 1e-9 {
            return Err(FactoryError::BoundaryRoot);
        }
        if r.norm() < 1.0 {
            count += 1;
        }
    }
    Ok(count)
}

/// All cycle structures (fixed count, cycle lengths) of a given degree.
pub fn cycle_structures(d: usize) -> Vec<(usize, Vec<usize>)> {
    fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for part in (1..=n.min(max)).rev() {
            for mut rest in partitions(n - part, part) {
                rest.insert(0, part);
                out.push(rest);
            }
        }
        out
    }
    partitions(d, d)
        .into_iter()
        .map(|p| {
            let fixed = p.iter().filter(|&&x| x == 1).count();
            let mut cycles: Vec<usize> = p.into_iter().filter(|&x| x >= 2).collect();
            cycles.sort_unstable();
            (fixed, cycles)
        })
        .collect()
}

fn cubic_slot(slot: usize, value: Complex64) -> SkewParam {
    let mut v = vec![Complex64::new(0.0, 0.0); 7];
    v[slot] = value;
    SkewParam::from_flat(3, &v).expect("preset layout is valid")
}

fn quadratic(c: f64, b: f64, a: f64) -> SkewParam {
    let v = vec![Complex64::new(c, 0.0), Complex64::new(b, 0.0), Complex64::new(a, 0.0)];
    SkewParam::from_flat(2, &v).expect("preset layout is valid")
}

pub const PRESET_NAMES: &[&str] = &[
    "d3-ex1",
    "d3-ex2",
    "d3-ex3",
    "d3-ex1-adm",
    "d3-ex2-adm",
    "d3-ex3-adm",
    "d2-s0",
    "d2-s1",
    "d2-s2",
];

/// Named parameters: the three reference cubic families (with `-adm`
/// doubled variants that pass the admissibility certificate) and one
/// quadratic representative per disk-root count s = 0, 1, 2.
pub fn preset(name: &str) -> Result<SkewParam, FactoryError> {
    match name {
        // q = w³ − 8z³: fully split, identity monodromy
        "d3-ex1" => Ok(cubic_slot(3, Complex64::new(-2.0, 0.0))),
        // q = w³ − 8z: one 3-cycle
        "d3-ex2" => Ok(cubic_slot(1, Complex64::new(-2.0, 0.0))),
        // q = w³ − 16zw: a fixed letter and a 2-cycle
        "d3-ex3" => Ok(cubic_slot(5, Complex64::new(0.0, 4.0))),
        "d3-ex1-adm" => Ok(cubic_slot(3, Complex64::new(-4.0, 0.0))),
        "d3-ex2-adm" => Ok(cubic_slot(1, Complex64::new(-4.0, 0.0))),
        "d3-ex3-adm" => Ok(cubic_slot(5, Complex64::new(0.0, 8.0))),
        // q = w² + 64: no disk roots, trivial braid
        "d2-s0" => Ok(quadratic(8.0, 0.0, 0.0)),
        // q = w² + 64z: one disk root, braid σ₁
        "d2-s1" => Ok(quadratic(0.0, 8.0, 0.0)),
        // q = w² + 64z²: two disk roots, braid σ₁²
        "d2-s2" => Ok(quadratic(0.0, 0.0, 8.0)),
        other => Err(FactoryError::UnknownPreset(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monodromy::track_circle;

    fn cfg() -> EscapeConfig {
        EscapeConfig::default()
    }

    #[test]
    fn spec_validation() {
        let bad = CycleSpec { d: 3, fixed: 1, cycle_lengths: vec![3], radii: vec![2.0, 3.0] };
        assert!(matches!(bad.validate(), Err(FactoryError::SpecInvalid(_))));
        let bad = CycleSpec { d: 5, fixed: 0, cycle_lengths: vec![2, 3], radii: vec![3.0, 2.0] };
        assert!(matches!(bad.validate(), Err(FactoryError::SpecInvalid(_))));
        let ok = CycleSpec::with_default_radii(5, 1, vec![2, 2]);
        assert!(ok.validate().is_ok());
        assert_eq!(ok.expected_cycle_type(), vec![1, 2, 2]);
    }

    #[test]
    fn factory_product_matches_fiber_poly() {
        // δ = 0 and δ ≥ 2 cases reproduce the split product exactly
        for spec in [
            CycleSpec::with_default_radii(5, 0, vec![2, 3]),
            CycleSpec::with_default_radii(4, 2, vec![2]),
        ] {
            let lambda = cycle_type_params(&spec, 1.0).unwrap();
            let z = Complex64::from_polar(1.0, 0.9);
            let q = lambda.fiber_poly(z);
            let mut radii = spec.radii.iter();
            let mut expected = CPoly::constant(Complex64::new(1.0, 0.0));
            if spec.fixed > 0 {
                let r0 = *radii.next().unwrap();
                let mut c = vec![Complex64::new(0.0, 0.0); spec.fixed + 1];
                c[0] = -Complex64::new(r0, 0.0).powu(spec.fixed as u32)
                    * z.powu(spec.fixed as u32);
                c[spec.fixed] = Complex64::new(1.0, 0.0);
                expected = expected.mul(&CPoly::new(c));
            }
            for (&len, &r) in spec.cycle_lengths.iter().zip(radii) {
                let mut c = vec![Complex64::new(0.0, 0.0); len + 1];
                c[0] = -Complex64::new(r, 0.0).powu(len as u32) * z;
                c[len] = Complex64::new(1.0, 0.0);
                expected = expected.mul(&CPoly::new(c));
            }
            for k in 0..=spec.d {
                assert!(
                    (q.coeff(k) - expected.coeff(k)).norm() < 1e-9 * expected.coeff_norm(),
                    "coefficient {k} mismatch"
                );
            }
        }
    }

    #[test]
    fn single_fixed_point_is_depressed() {
        let spec = CycleSpec::with_default_radii(3, 1, vec![2]);
        let lambda = cycle_type_params(&spec, 1.0).unwrap();
        let z = Complex64::from_polar(1.0, 2.1);
        let q = lambda.fiber_poly(z);
        assert!(q.coeff(2).norm() < 1e-12);
        // shifted roots are the product roots minus (R₀/d)z
        let shift = z * Complex64::new(2.0 / 3.0, 0.0);
        for root in [
            z * Complex64::new(2.0, 0.0),
            (Complex64::new(9.0, 0.0) * z).sqrt(),
            -(Complex64::new(9.0, 0.0) * z).sqrt(),
        ] {
            assert!(q.eval(root - shift).norm() < 1e-9);
        }
    }

    #[test]
    fn realized_cycle_types_match_requests() {
        for (fixed, cycles) in cycle_structures(3) {
            let spec = CycleSpec::with_default_radii(3, fixed, cycles);
            let lambda = cycle_type_params(&spec, 1.0).unwrap();
            let (adm, _) = auto_scale(&lambda, &cfg()).unwrap();
            let g = track_circle(&adm, &cfg(), 1, 1, 256, 1e-10).unwrap();
            assert_eq!(g.permutation.cycle_type(), spec.expected_cycle_type());
        }
    }

    #[test]
    fn cycle_structure_census() {
        assert_eq!(cycle_structures(2).len(), 2);
        assert_eq!(cycle_structures(3).len(), 3);
        assert_eq!(cycle_structures(4).len(), 5);
        assert_eq!(cycle_structures(5).len(), 7);
        assert!(cycle_structures(4).contains(&(0, vec![2, 2])));
        assert!(cycle_structures(5).contains(&(1, vec![2, 2])));
    }

    #[test]
    fn quad_disk_root_counts() {
        let z = Complex64::new(0.0, 0.0);
        let one = |x: f64| Complex64::new(x, 0.0);
        assert_eq!(quad_s(one(8.0), z, z).unwrap(), 0);
        assert_eq!(quad_s(z, one(8.0), z).unwrap(), 1);
        assert_eq!(quad_s(z, z, one(8.0)).unwrap(), 2);
        // c² + b²z with b² = c²: root at −1 sits on the circle
        assert!(matches!(quad_s(one(1.0), one(1.0), z), Err(FactoryError::BoundaryRoot)));
        assert!(matches!(quad_s(z, z, z), Err(FactoryError::AllZero)));
        // 16 + 9z + z²/4 has roots near −1.88 and −34.1, both outside
        assert_eq!(quad_s(one(4.0), one(3.0), one(0.5)).unwrap(), 0);
    }

    #[test]
    fn presets_resolve_and_admissible_variants_pass() {
        for name in PRESET_NAMES {
            let lambda = preset(name).unwrap();
            assert!(lambda.d == 2 || lambda.d == 3);
            if name.ends_with("-adm") || name.starts_with("d2-") {
                let report = admissibility_certificate(&lambda, &cfg()).unwrap();
                assert!(report.admissible, "{name} should be admissible");
            }
        }
        assert!(matches!(preset("nope"), Err(FactoryError::UnknownPreset(_))));
    }

    #[test]
    fn auto_scale_reaches_admissibility() {
        let lambda = preset("d3-ex3").unwrap();
        let (adm, t) = auto_scale(&lambda, &cfg()).unwrap();
        assert!(t >= 1.0);
        assert!(admissibility_certificate(&adm, &cfg()).unwrap().admissible);
    }
}
