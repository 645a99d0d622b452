//! Complex-coefficient univariate polynomial kernel: Horner evaluation,
//! Aberth–Ehrlich root finding, resultants and interpolation at roots of unity.

use num_complex::Complex64;
use thiserror::Error;

/// Relative magnitude below which trailing coefficients are dropped.
pub const DROP_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CPolyError {
    #[error("root finding on a constant polynomial")]
    DegreeZero,
    #[error("Aberth iteration did not converge after {iters} iterations")]
    NonConvergence { iters: usize, best: Vec<Complex64> },
    #[error("expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

/// Dense polynomial over C, coefficients in ascending power order.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoly {
    coeffs: Vec<Complex64>,
}

impl CPoly {
    /// Builds a polynomial, dropping trailing coefficients whose magnitude is
    /// below `DROP_TOL` relative to the largest coefficient.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = CPoly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        CPoly { coeffs: vec![Complex64::new(0.0, 0.0)] }
    }

    pub fn constant(c: Complex64) -> Self {
        CPoly::new(vec![c])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            coeffs.push(Complex64::new(0.0, 0.0));
            for k in (0..coeffs.len() - 1).rev() {
                let c = coeffs[k];
                coeffs[k + 1] += c;
                coeffs[k] = -r * c;
            }
        }
        CPoly { coeffs }
    }

    fn trim(&mut self) {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            self.coeffs = vec![Complex64::new(0.0, 0.0)];
            return;
        }
        let cut = DROP_TOL * max;
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().norm() <= cut {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].norm() == 0.0
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    /// Largest coefficient magnitude.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            v = v * x + c;
        }
        v
    }

    /// Horner evaluation of p and p' in one pass.
    pub fn eval_with_derivative(&self, x: Complex64) -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dv = dv * x + v;
            v = v * x + c;
        }
        (v, dv)
    }

    pub fn derivative(&self) -> CPoly {
        if self.coeffs.len() == 1 {
            return CPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        CPoly::new(coeffs)
    }

    pub fn add(&self, other: &CPoly) -> CPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        CPoly::new(coeffs)
    }

    pub fn sub(&self, other: &CPoly) -> CPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - other.coeff(k)).collect();
        CPoly::new(coeffs)
    }

    pub fn mul(&self, other: &CPoly) -> CPoly {
        if self.is_zero() || other.is_zero() {
            return CPoly::zero();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        CPoly::new(coeffs)
    }

    pub fn scale(&self, t: Complex64) -> CPoly {
        CPoly::new(self.coeffs.iter().map(|&c| c * t).collect())
    }

    /// self ∘ inner, expanded by Horner on polynomials.
    pub fn compose(&self, inner: &CPoly) -> CPoly {
        let mut acc = CPoly::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&CPoly::constant(c));
        }
        acc
    }

    /// Fujiwara upper bound on root magnitudes.
    pub fn root_bound(&self) -> f64 {
        let n = self.degree();
        let lc = self.leading().norm();
        let mut bound: f64 = 0.0;
        for k in 0..n {
            let mut q = self.coeffs[k].norm() / lc;
            if k == 0 {
                q /= 2.0;
            }
            bound = bound.max(q.powf(1.0 / (n - k) as f64));
        }
        2.0 * bound
    }

    /// All `degree` roots with multiplicity by simultaneous Aberth–Ehrlich
    /// iteration, seeded on a perturbed circle at the Fujiwara bound, with one
    /// Newton polish per root after convergence.
    pub fn roots(&self, tol: f64, max_iter: usize) -> Result<Vec<Complex64>, CPolyError> {
        let n = self.degree();
        if n == 0 {
            return Err(CPolyError::DegreeZero);
        }
        let radius = self.root_bound().max(tol);
        let mut zs: Vec<Complex64> = (0..n)
            .map(|k| {
                // offset breaks symmetry with the root configuration
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.437;
                let r = radius * (1.0 + 0.03 * (k as f64 * 0.7).sin());
                Complex64::from_polar(r, theta)
            })
            .collect();

        let mut converged = false;
        for _ in 0..max_iter {
            let mut max_step: f64 = 0.0;
            for k in 0..n {
                let (v, dv) = self.eval_with_derivative(zs[k]);
                if v.norm() == 0.0 {
                    continue;
                }
                let newton = if dv.norm() == 0.0 {
                    // flat spot: nudge off it
                    Complex64::new(tol.sqrt(), tol.sqrt())
                } else {
                    v / dv
                };
                let mut sum = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    if j != k {
                        let diff = zs[k] - zs[j];
                        if diff.norm() > 1e-300 {
                            sum += 1.0 / diff;
                        }
                    }
                }
                let denom = Complex64::new(1.0, 0.0) - newton * sum;
                let step = if denom.norm() < 1e-300 { newton } else { newton / denom };
                zs[k] -= step;
                max_step = max_step.max(step.norm() / zs[k].norm().max(1.0));
            }
            if max_step < tol {
                converged = true;
                break;
            }
        }

        // single Newton polish before residual verification
        for z in zs.iter_mut() {
            let (v, dv) = self.eval_with_derivative(*z);
            if dv.norm() > 0.0 {
                let step = v / dv;
                if step.norm() < 1.0 + z.norm() {
                    *z -= step;
                }
            }
        }

        let bound = tol * self.coeff_norm().max(1.0);
        let residual_ok = zs.iter().all(|&z| self.eval(z).norm() <= bound);
        if converged || residual_ok {
            Ok(zs)
        } else {
            Err(CPolyError::NonConvergence { iters: max_iter, best: zs })
        }
    }
}

/// lc(f)^{deg g} · ∏_{f(α)=0} g(α). Matches the Sylvester resultant
/// Res(f, g); the product of critical values used for the discriminant is
/// this quantity divided by lc(f)^{deg g}.
pub fn resultant_product(
    f: &CPoly,
    g: &CPoly,
    tol: f64,
    max_iter: usize,
) -> Result<Complex64, CPolyError> {
    let roots = f.roots(tol, max_iter)?;
    let mut acc = f.leading().powu(g.degree() as u32);
    for r in roots {
        acc *= g.eval(r);
    }
    Ok(acc)
}

/// Determinant of the (deg f + deg g) Sylvester matrix, by partially pivoted
/// elimination. Row convention: deg g rows of f above deg f rows of g, so
/// Res(w - a, w - b) = a - b.
pub fn sylvester_resultant(f: &CPoly, g: &CPoly) -> Complex64 {
    let m = f.degree();
    let n = g.degree();
    let size = m + n;
    let mut mat = vec![vec![Complex64::new(0.0, 0.0); size]; size];
    for row in 0..n {
        for k in 0..=m {
            mat[row][row + k] = f.coeff(m - k);
        }
    }
    for row in 0..m {
        for k in 0..=n {
            mat[n + row][row + k] = g.coeff(n - k);
        }
    }

    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..size {
        let pivot = (col..size)
            .max_by(|&a, &b| mat[a][col].norm().total_cmp(&mat[b][col].norm()))
            .unwrap();
        if mat[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            mat.swap(pivot, col);
            det = -det;
        }
        det *= mat[col][col];
        for row in col + 1..size {
            let factor = mat[row][col] / mat[col][col];
            for k in col..size {
                let sub = factor * mat[col][k];
                mat[row][k] -= sub;
            }
        }
    }
    det
}

/// Inverse DFT at the N-th roots of unity: sample k is the target function at
/// e^{2πik/N}. Trailing coefficients below 1e-9 · max|sample| are dropped.
pub fn interpolate_at_roots_of_unity(
    samples: &[Complex64],
    n: usize,
) -> Result<CPoly, CPolyError> {
    if samples.len() != n || !n.is_power_of_two() {
        return Err(CPolyError::LengthMismatch { expected: n, found: samples.len() });
    }
    let max = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let mut coeffs = Vec::with_capacity(n);
    for j in 0..n {
        let mut c = Complex64::new(0.0, 0.0);
        for (k, &s) in samples.iter().enumerate() {
            let angle = -2.0 * std::f64::consts::PI * (j * k % n) as f64 / n as f64;
            c += s * Complex64::from_polar(1.0, angle);
        }
        coeffs.push(c / n as f64);
    }
    let cut = 1e-9 * max;
    while coeffs.len() > 1 && coeffs.last().unwrap().norm() <= cut {
        coeffs.pop();
    }
    Ok(CPoly { coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_with_derivative_cube() {
        // w^3 - 8 at 2
        let p = CPoly::new(vec![c(-8.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let (v, dv) = p.eval_with_derivative(c(2.0, 0.0));
        assert!(v.norm() < 1e-12);
        assert!((dv - c(12.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn eval_with_derivative_constant() {
        let p = CPoly::constant(c(5.0, 0.0));
        let (v, dv) = p.eval_with_derivative(c(3.0, -1.0));
        assert_eq!(v, c(5.0, 0.0));
        assert_eq!(dv, c(0.0, 0.0));
    }

    #[test]
    fn eval_with_derivative_at_i() {
        let p = CPoly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let (v, dv) = p.eval_with_derivative(c(0.0, 1.0));
        assert!(v.norm() < 1e-12);
        assert!((dv - c(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        // degree-30 test polynomial on |x| <= 2
        let coeffs: Vec<Complex64> =
            (0..=30).map(|k| c((k as f64 * 0.37).sin(), (k as f64 * 0.61).cos())).collect();
        let p = CPoly::new(coeffs);
        let dp = p.derivative();
        let h = 1e-5;
        for i in 0..20 {
            let x = Complex64::from_polar(2.0 * (i as f64 + 1.0) / 20.0, i as f64 * 0.9);
            let fd = (p.eval(x + c(h, 0.0)) - p.eval(x - c(h, 0.0))) / c(2.0 * h, 0.0);
            let exact = dp.eval(x);
            assert!(
                (fd - exact).norm() <= 1e-6 * exact.norm().max(1.0),
                "finite difference mismatch at {x}"
            );
        }
    }

    fn sorted_by_arg(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        v
    }

    #[test]
    fn roots_of_cube_of_eight() {
        let p = CPoly::new(vec![c(-8.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let got = sorted_by_arg(p.roots(1e-10, 200).unwrap());
        let want = sorted_by_arg(vec![
            c(2.0, 0.0),
            Complex64::from_polar(2.0, 2.0 * std::f64::consts::PI / 3.0),
            Complex64::from_polar(2.0, 4.0 * std::f64::consts::PI / 3.0),
        ]);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-8, "{g} vs {w}");
        }
    }

    #[test]
    fn roots_of_w2_plus_16() {
        let p = CPoly::new(vec![c(16.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let mut got = p.roots(1e-10, 200).unwrap();
        got.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((got[0] - c(0.0, -4.0)).norm() < 1e-8);
        assert!((got[1] - c(0.0, 4.0)).norm() < 1e-8);
    }

    #[test]
    fn double_root_reported_twice() {
        // (w-1)^2 (w+2) = w^3 - 3w + 2
        let p = CPoly::new(vec![c(2.0, 0.0), c(-3.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let tol = 1e-10;
        let roots = p.roots(tol, 500).unwrap();
        let near_one: Vec<_> =
            roots.iter().filter(|r| (*r - c(1.0, 0.0)).norm() < tol.sqrt() * 10.0).collect();
        let near_neg2: Vec<_> = roots.iter().filter(|r| (*r - c(-2.0, 0.0)).norm() < 1e-6).collect();
        assert_eq!(near_one.len(), 2);
        assert_eq!(near_neg2.len(), 1);
        for r in &roots {
            assert!(p.eval(*r).norm() <= tol * p.coeff_norm().max(1.0));
        }
    }

    #[test]
    fn roots_rejects_constant() {
        let p = CPoly::constant(c(3.0, 0.0));
        assert!(matches!(p.roots(1e-10, 100), Err(CPolyError::DegreeZero)));
    }

    #[test]
    fn resultant_product_critical_values() {
        // f = 3w^2 (q' of w^3 - 8 at z=1), g = w^3 - 8
        let f = CPoly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]);
        let g = CPoly::new(vec![c(-8.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let r = resultant_product(&f, &g, 1e-10, 200).unwrap();
        assert!((r - c(1728.0, 0.0)).norm() < 1e-6 * 1728.0);
        // normalized critical-value product: r / lc(f)^{deg g} = 64
        let normalized = r / c(27.0, 0.0);
        assert!((normalized - c(64.0, 0.0)).norm() < 1e-6 * 64.0);
    }

    #[test]
    fn resultant_product_linear() {
        let a = c(1.5, 0.7);
        let b = c(-0.3, 2.1);
        let f = CPoly::new(vec![-a, c(1.0, 0.0)]);
        let g = CPoly::new(vec![-b, c(1.0, 0.0)]);
        let r = resultant_product(&f, &g, 1e-12, 200).unwrap();
        assert!((r - (a - b)).norm() < 1e-10);
    }

    #[test]
    fn resultant_product_quadratic() {
        // f = w^2 + c^2, g = 2w -> 4c^2
        let cc = c(1.3, -0.4);
        let f = CPoly::new(vec![cc * cc, c(0.0, 0.0), c(1.0, 0.0)]);
        let g = CPoly::new(vec![c(0.0, 0.0), c(2.0, 0.0)]);
        let r = resultant_product(&f, &g, 1e-12, 200).unwrap();
        assert!((r - 4.0 * cc * cc).norm() < 1e-9);
    }

    #[test]
    fn sylvester_shared_root_is_zero() {
        let f = CPoly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(sylvester_resultant(&f, &f).norm() < 1e-12);
    }

    #[test]
    fn sylvester_quadratic_by_hand() {
        let cc = c(0.8, 1.1);
        let f = CPoly::new(vec![cc * cc, c(0.0, 0.0), c(1.0, 0.0)]);
        let g = CPoly::new(vec![c(0.0, 0.0), c(2.0, 0.0)]);
        let r = sylvester_resultant(&f, &g);
        assert!((r - 4.0 * cc * cc).norm() < 1e-12);
    }

    #[test]
    fn sylvester_linear_sign_convention() {
        let a = c(2.0, -1.0);
        let b = c(0.5, 0.5);
        let f = CPoly::new(vec![-a, c(1.0, 0.0)]);
        let g = CPoly::new(vec![-b, c(1.0, 0.0)]);
        assert!((sylvester_resultant(&f, &g) - (a - b)).norm() < 1e-12);
    }

    #[test]
    fn sylvester_agrees_with_product_on_random_inputs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let df = rng.gen_range(1..=8);
            let dg = rng.gen_range(1..=8);
            let f = CPoly::new(
                (0..=df).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            );
            let g = CPoly::new(
                (0..=dg).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            );
            if f.degree() < 1 || g.degree() < 1 {
                continue;
            }
            let syl = sylvester_resultant(&f, &g);
            let prod = resultant_product(&f, &g, 1e-12, 500).unwrap();
            assert!(
                (syl - prod).norm() <= 1e-8 * syl.norm().max(1.0),
                "sylvester {syl} vs product {prod}"
            );
        }
    }

    #[test]
    fn interpolate_monomials() {
        let n = 4;
        let samples: Vec<Complex64> = (0..n)
            .map(|k| {
                let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
                z * z
            })
            .collect();
        let p = interpolate_at_roots_of_unity(&samples, n).unwrap();
        assert_eq!(p.degree(), 2);
        assert!((p.coeff(2) - c(1.0, 0.0)).norm() < 1e-12);
        assert!(p.coeff(0).norm() < 1e-12 && p.coeff(1).norm() < 1e-12);
    }

    #[test]
    fn interpolate_constant() {
        let samples = vec![c(3.0, -2.0); 8];
        let p = interpolate_at_roots_of_unity(&samples, 8).unwrap();
        assert_eq!(p.degree(), 0);
        assert!((p.coeff(0) - c(3.0, -2.0)).norm() < 1e-12);
    }

    #[test]
    fn interpolate_64_z6() {
        let n = 8;
        let samples: Vec<Complex64> = (0..n)
            .map(|k| {
                let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
                64.0 * z.powu(6)
            })
            .collect();
        let p = interpolate_at_roots_of_unity(&samples, n).unwrap();
        assert!((p.coeff(6) - c(64.0, 0.0)).norm() < 1e-7);
        for k in [0, 1, 2, 3, 4, 5] {
            assert!(p.coeff(k).norm() < 1e-7);
        }
    }

    #[test]
    fn interpolate_rejects_length_mismatch() {
        let samples = vec![c(1.0, 0.0); 5];
        assert!(matches!(
            interpolate_at_roots_of_unity(&samples, 8),
            Err(CPolyError::LengthMismatch { expected: 8, found: 5 })
        ));
    }

    #[test]
    fn resultant_multiplicative_in_g() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let f = CPoly::new(
                (0..=3).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            );
            let g1 = CPoly::new(
                (0..=2).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            );
            let g2 = CPoly::new(
                (0..=2).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            );
            if f.degree() < 1 {
                continue;
            }
            let lhs = resultant_product(&f, &g1.mul(&g2), 1e-12, 500).unwrap();
            let r1 = resultant_product(&f, &g1, 1e-12, 500).unwrap();
            let r2 = resultant_product(&f, &g2, 1e-12, 500).unwrap();
            // exact-degree products: lc^{deg g1 + deg g2 - deg(g1 g2)} = lc^0
            let rhs = r1 * r2;
            assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm().max(1.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn roots_recover_known_multiset(
            parts in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..=12)
        ) {
            let roots: Vec<Complex64> = parts.iter().map(|&(re, im)| c(re, im)).collect();
            let p = CPoly::from_roots(&roots);
            let tol = 1e-10;
            let found = p.roots(tol, 1000).unwrap();
            prop_assert_eq!(found.len(), roots.len());
            // greedy cluster matching within tol^{1/2} radius
            let mut remaining = found.clone();
            for r in &roots {
                let (idx, dist) = remaining
                    .iter()
                    .enumerate()
                    .map(|(i, f)| (i, (f - r).norm()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                prop_assert!(dist < tol.sqrt(), "root {} matched at distance {}", r, dist);
                remaining.swap_remove(idx);
            }
        }

        #[test]
        fn interpolation_inverts_evaluation(
            coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=15)
        ) {
            let p = CPoly::new(coeffs.iter().map(|&(re, im)| c(re, im)).collect());
            let n = 16;
            let samples: Vec<Complex64> = (0..n)
                .map(|k| p.eval(Complex64::from_polar(
                    1.0,
                    2.0 * std::f64::consts::PI * k as f64 / n as f64,
                )))
                .collect();
            let q = interpolate_at_roots_of_unity(&samples, n).unwrap();
            let scale = p.coeff_norm().max(1e-9);
            for k in 0..16 {
                prop_assert!((p.coeff(k) - q.coeff(k)).norm() <= 1e-9 * scale);
            }
        }
    }
}
