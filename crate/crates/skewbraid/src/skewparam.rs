//! The parameter space of regular skew-products (z^d, q_{λ,z}(w)): fiber
//! polynomials, non-autonomous iteration, the escape norm, the discriminant
//! curve in z and membership in its circle zero set.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpoly::{interpolate_at_roots_of_unity, resultant_product, CPoly, CPolyError};

/// Magnitude ceiling for non-autonomous iteration.
pub const OVERFLOW_CEILING: f64 = 1e150;

/// Default root-finding tolerance for fiber computations.
pub const ROOT_TOL: f64 = 1e-10;
pub const ROOT_MAX_ITER: usize = 2000;

#[derive(Debug, Error)]
pub enum SkewError {
    #[error("degree must be at least 2, got {0}")]
    BadDegree(usize),
    #[error("row {row} must hold {expected} entries, found {found}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("iterate magnitude exceeded the floating ceiling at step {0}")]
    Overflow(usize),
    #[error("critical-value product vanishes identically")]
    Degenerate,
    #[error("d^n = {0} exceeds the size guard")]
    SizeGuard(usize),
    #[error("n must be at least 1 for the periodic-point resultant")]
    BadInput,
    #[error(transparent)]
    Kernel(#[from] CPolyError),
}

/// (d-1)(d+4)/2, the dimension of the parameter space for degree d.
pub fn dimension(d: usize) -> Result<usize, SkewError> {
    if d < 2 {
        return Err(SkewError::BadDegree(d));
    }
    Ok((d - 1) * (d + 4) / 2)
}

/// Parameter λ of the family: row j (j = 0..d-2) holds the d-j+1 entries
/// a_{j,k}; the coefficient of w^j in the fiber polynomial is
/// Σ_k (a_{j,k})^{d-j} z^k.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkewParam {
    pub d: usize,
    pub a: Vec<Vec<Complex64>>,
}

impl SkewParam {
    pub fn new(d: usize, a: Vec<Vec<Complex64>>) -> Result<Self, SkewError> {
        if d < 2 {
            return Err(SkewError::BadDegree(d));
        }
        if a.len() != d - 1 {
            return Err(SkewError::RowLength { row: 0, expected: d - 1, found: a.len() });
        }
        for (j, row) in a.iter().enumerate() {
            let expected = d - j + 1;
            if row.len() != expected {
                return Err(SkewError::RowLength { row: j, expected, found: row.len() });
            }
        }
        Ok(SkewParam { d, a })
    }

    /// Flat entry list (a_{0,0}, ..., a_{0,d}, ..., a_{d-2,0}, a_{d-2,1}, a_{d-2,2}).
    pub fn from_flat(d: usize, entries: &[Complex64]) -> Result<Self, SkewError> {
        let dim = dimension(d)?;
        if entries.len() != dim {
            return Err(SkewError::RowLength { row: 0, expected: dim, found: entries.len() });
        }
        let mut a = Vec::with_capacity(d - 1);
        let mut it = entries.iter();
        for j in 0..d - 1 {
            a.push(it.by_ref().take(d - j + 1).copied().collect());
        }
        SkewParam::new(d, a)
    }

    pub fn zero(d: usize) -> Result<Self, SkewError> {
        if d < 2 {
            return Err(SkewError::BadDegree(d));
        }
        let a = (0..d - 1).map(|j| vec![Complex64::new(0.0, 0.0); d - j + 1]).collect();
        SkewParam::new(d, a)
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|row| row.iter().all(|e| e.norm() == 0.0))
    }

    pub fn scaled(&self, t: Complex64) -> SkewParam {
        SkewParam {
            d: self.d,
            a: self.a.iter().map(|row| row.iter().map(|&e| e * t).collect()).collect(),
        }
    }

    /// Coefficient A_j(z) = Σ_k (a_{j,k})^{d-j} z^k of w^j in the fiber polynomial.
    pub fn coeff_poly(&self, j: usize) -> CPoly {
        let power = (self.d - j) as u32;
        CPoly::new(self.a[j].iter().map(|&e| e.powu(power)).collect())
    }

    /// The fiber polynomial q_{λ,z}(w): monic of degree d with zero w^{d-1}
    /// coefficient by construction.
    pub fn fiber_poly(&self, z: Complex64) -> CPoly {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.d + 1];
        coeffs[self.d] = Complex64::new(1.0, 0.0);
        for j in 0..self.d - 1 {
            coeffs[j] = self.coeff_poly(j).eval(z);
        }
        // the constructor must not drop the forced zero at w^{d-1}: the
        // leading 1 dominates, so trim only touches the top entry
        CPoly::new(coeffs)
    }

    /// Non-autonomous iterate Q^n_{λ,z}(w) along the base orbit z_k = z^{d^k}.
    pub fn iterate(&self, z: Complex64, w: Complex64, n: usize) -> Result<Complex64, SkewError> {
        let mut zk = z;
        let mut wk = w;
        for step in 0..n {
            wk = self.fiber_poly(zk).eval(wk);
            if !wk.is_finite() || wk.norm() > OVERFLOW_CEILING {
                return Err(SkewError::Overflow(step + 1));
            }
            zk = zk.powu(self.d as u32);
        }
        Ok(wk)
    }

    /// The escape norm R_λ = Σ_j (Σ_k |a_{j,k}|^{d-j})^{1/(d-j)}; on the unit
    /// circle the supremum over base points is constant.
    pub fn escape_norm(&self) -> f64 {
        let mut total = 0.0;
        for j in 0..self.d - 1 {
            let p = (self.d - j) as f64;
            let inner: f64 = self.a[j].iter().map(|e| e.norm().powf(p)).sum();
            total += inner.powf(1.0 / p);
        }
        total
    }

    /// The d-1 critical points of the fiber polynomial at z, with multiplicity.
    pub fn critical_points(&self, z: Complex64) -> Result<Vec<Complex64>, SkewError> {
        let dq = self.fiber_poly(z).derivative();
        Ok(dq.roots(ROOT_TOL, ROOT_MAX_ITER)?)
    }

    /// Product of critical values ∏_{q'(c)=0} q_{λ,z}(c) at a single z.
    pub fn critical_value_product(&self, z: Complex64) -> Result<Complex64, SkewError> {
        let q = self.fiber_poly(z);
        let dq = q.derivative();
        let lc = dq.leading().powu(q.degree() as u32);
        Ok(resultant_product(&dq, &q, ROOT_TOL, ROOT_MAX_ITER)? / lc)
    }

    /// The discriminant curve z ↦ P(λ,z) = ∏_{q'(c)=0} q_{λ,z}(c),
    /// reconstructed by sampling the critical-value product at roots of unity
    /// and interpolating.
    pub fn discriminant_in_z(&self) -> Result<CPoly, SkewError> {
        let d = self.d;
        let degree_bound = d * (d - 1) * d + 1;
        let n = degree_bound.next_power_of_two();
        let mut samples = Vec::with_capacity(n);
        for k in 0..n {
            let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
            samples.push(self.critical_value_product(z)?);
        }
        // An identically vanishing product only leaves root-finder residue:
        // every factor is O(tol^d), so samples sit ~60 orders of magnitude
        // below the homogeneous scale ‖λ‖^{d(d-1)}. A generous gap factor
        // separates that residue from honestly small discriminants.
        let scale = self.escape_norm().powi((d * (d - 1)) as i32).max(1.0);
        let max_sample = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
        if max_sample <= 1e-30 * scale {
            return Err(SkewError::Degenerate);
        }
        Ok(interpolate_at_roots_of_unity(&samples, n)?)
    }

    /// Scans the discriminant roots for unit-circle hits: true iff some root z
    /// has ||z| - 1| ≤ tol. Since P is homogeneous in λ this decides
    /// membership for the direction of λ.
    pub fn e_membership(&self, tol: f64) -> Result<(bool, Vec<Complex64>), SkewError> {
        let p = self.discriminant_in_z()?;
        if p.degree() == 0 {
            return Ok((false, Vec::new()));
        }
        let roots = p.roots(ROOT_TOL, ROOT_MAX_ITER)?;
        let offenders: Vec<Complex64> =
            roots.into_iter().filter(|r| (r.norm() - 1.0).abs() <= tol).collect();
        Ok((!offenders.is_empty(), offenders))
    }

    /// Expands Q^n_{λ,z}(w) as a polynomial in w by composition.
    pub fn iterate_poly(&self, z: Complex64, n: usize) -> CPoly {
        let mut acc = CPoly::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let mut zk = z;
        for _ in 0..n {
            acc = self.fiber_poly(zk).compose(&acc);
            zk = zk.powu(self.d as u32);
        }
        acc
    }

    /// Res_w(Q^n_{λ,z}(w) - w, q'_{λ,z}(w)) under the product normalization.
    pub fn per_resultant(&self, z: Complex64, n: usize) -> Result<Complex64, SkewError> {
        if n == 0 {
            return Err(SkewError::BadInput);
        }
        let size = self.d.pow(n as u32);
        if size > 64 {
            return Err(SkewError::SizeGuard(size));
        }
        let w = CPoly::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let qn_minus_w = self.iterate_poly(z, n).sub(&w);
        let dq = self.fiber_poly(z).derivative();
        Ok(resultant_product(&dq, &qn_minus_w, ROOT_TOL, ROOT_MAX_ITER)?)
    }
}

/// JSON parameter file: {"d": int, "a": [[[re,im], ...], ...]}.
#[derive(Serialize, Deserialize)]
struct ParamFile {
    d: usize,
    a: Vec<Vec<[f64; 2]>>,
}

pub fn from_json(text: &str) -> Result<SkewParam, String> {
    let file: ParamFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let a: Vec<Vec<Complex64>> = file
        .a
        .iter()
        .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    SkewParam::new(file.d, a).map_err(|e| e.to_string())
}

pub fn to_json(param: &SkewParam) -> String {
    let file = ParamFile {
        d: param.d,
        a: param.a.iter().map(|row| row.iter().map(|e| [e.re, e.im]).collect()).collect(),
    };
    serde_json::to_string_pretty(&file).unwrap()
}
