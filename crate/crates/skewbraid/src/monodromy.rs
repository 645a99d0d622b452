//! Numerical continuation of the fiber roots along loops in the base circle:
//! strand geometry, the level-1 monodromy permutation, inverse-branch coding
//! of level-n roots, and the iterated-monodromy recurrence check.

use num_complex::Complex64;
use thiserror::Error;

use crate::cpoly::{CPoly, CPolyError};
use crate::escape::{admissibility_certificate, EscapeConfig, EscapeError};
use crate::julia::Perm;
use crate::skewparam::{SkewError, SkewParam};

/// Maximum number of local step halvings before the tracker gives up.
const MAX_HALVINGS: u32 = 12;
/// Newton iterations allowed per corrector solve.
const NEWTON_ITERS: usize = 40;
/// Strand count guard: d^n may not exceed this.
const MAX_STRANDS: usize = 64;

#[derive(Debug, Error)]
pub enum MonodromyError {
    #[error("parameter is not certified admissible")]
    NotAdmissible,
    #[error("strand count {0} exceeds the guard of {MAX_STRANDS}")]
    SizeGuard(usize),
    #[error("bad input: {0}")]
    BadInput(&'static str),
    #[error("strands collide near t = {t}")]
    StrandCollision { t: f64 },
    #[error("corrector failed to converge near t = {t}")]
    NonConvergence { t: f64 },
    #[error("inverse branches could not be separated")]
    BranchCollision,
    #[error("strand endpoints do not match the initial roots bijectively")]
    EndpointMismatch,
    #[error("letter {0} out of range 1..={1}")]
    LetterOutOfRange(usize, usize),
    #[error(transparent)]
    Skew(#[from] SkewError),
    #[error(transparent)]
    Escape(#[from] EscapeError),
    #[error(transparent)]
    Poly(#[from] CPolyError),
}

/// One tracked root path over t ∈ [0, 1].
#[derive(Clone, Debug)]
pub struct Strand {
    /// Label (1-based) of the initial root.
    pub start_index: usize,
    /// Label of the initial root the endpoint lands on.
    pub end_index: usize,
    pub samples: Vec<(f64, Complex64)>,
}

/// All strands of one loop, with the induced permutation of root labels.
#[derive(Clone, Debug)]
pub struct BraidGeometry {
    pub level: usize,
    pub turns: i64,
    pub strands: Vec<Strand>,
    /// Start label ↦ end label.
    pub permutation: Perm,
}

impl BraidGeometry {
    pub fn strand_count(&self) -> usize {
        self.strands.len()
    }
}

fn round9(x: f64) -> i64 {
    (x * 1e9).round() as i64
}

/// Canonical root labeling: ascending argument in (−π, π], then modulus,
/// then coordinates; all compared after rounding at 1e-9.
pub fn sort_by_label(roots: &mut [Complex64]) {
    roots.sort_by_key(|w| (round9(w.arg()), round9(w.norm()), round9(w.re), round9(w.im)));
}

fn min_pairwise_distance(ws: &[Complex64]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..ws.len() {
        for j in i + 1..ws.len() {
            min = min.min((ws[i] - ws[j]).norm());
        }
    }
    min
}

/// Newton-correct `w` on `poly`; returns the corrected root and the total
/// correction distance.
fn newton_correct(poly: &CPoly, mut w: Complex64, tol: f64) -> Option<(Complex64, f64)> {
    let start = w;
    for _ in 0..NEWTON_ITERS {
        let (val, der) = poly.eval_with_derivative(w);
        if der.norm() == 0.0 {
            return None;
        }
        let dw = val / der;
        w -= dw;
        if !w.is_finite() {
            return None;
        }
        if dw.norm() <= tol * w.norm().max(1.0) {
            return Some((w, (w - start).norm()));
        }
    }
    None
}

/// Advance every strand from `t0` to `t1`, halving the step when any
/// corrector moves a strand by more than a quarter of the current minimum
/// pairwise distance. Accepted sub-steps are appended to `paths`.
#[allow(clippy::too_many_arguments)]
fn advance_all(
    poly_at: &dyn Fn(f64) -> CPoly,
    current: &mut Vec<Complex64>,
    paths: &mut [Vec<(f64, Complex64)>],
    t0: f64,
    t1: f64,
    tol: f64,
    collision_dist: f64,
    depth: u32,
) -> Result<(), MonodromyError> {
    let guard = 0.25 * min_pairwise_distance(current);
    let poly = poly_at(t1);
    let mut next = Vec::with_capacity(current.len());
    let mut ok = true;
    for &w in current.iter() {
        match newton_correct(&poly, w, tol) {
            Some((nw, moved)) if moved <= guard => next.push(nw),
            _ => {
                ok = false;
                break;
            }
        }
    }
    if !ok {
        if depth >= MAX_HALVINGS {
            return Err(MonodromyError::NonConvergence { t: t1 });
        }
        let tm = 0.5 * (t0 + t1);
        advance_all(poly_at, current, paths, t0, tm, tol, collision_dist, depth + 1)?;
        return advance_all(poly_at, current, paths, tm, t1, tol, collision_dist, depth + 1);
    }
    if min_pairwise_distance(&next) < collision_dist {
        return Err(MonodromyError::StrandCollision { t: t1 });
    }
    for (path, &w) in paths.iter_mut().zip(next.iter()) {
        path.push((t1, w));
    }
    *current = next;
    Ok(())
}

/// Tracks the d^level roots of the level-`level` fiber polynomial while the
/// base point winds `turns` times around the unit circle.
///
/// Requires an admissibility certificate; returns the strand geometry and the
/// induced permutation of root labels.
pub fn track_circle(
    lambda: &SkewParam,
    cfg: &EscapeConfig,
    level: usize,
    turns: i64,
    steps: usize,
    tol: f64,
) -> Result<BraidGeometry, MonodromyError> {
    if level == 0 || turns == 0 || steps < 8 || tol <= 0.0 {
        return Err(MonodromyError::BadInput("level ≥ 1, turns ≠ 0, steps ≥ 8, tol > 0 required"));
    }
    let count = lambda.d.checked_pow(level as u32).unwrap_or(usize::MAX);
    if count > MAX_STRANDS {
        return Err(MonodromyError::SizeGuard(count));
    }
    let report = admissibility_certificate(lambda, cfg)?;
    if !report.admissible {
        return Err(MonodromyError::NotAdmissible);
    }

    let tau = std::f64::consts::TAU;
    let z_of = |t: f64| Complex64::from_polar(1.0, tau * turns as f64 * t);
    let poly_at = |t: f64| lambda.iterate_poly(z_of(t), level);

    let mut start = poly_at(0.0).roots(tol, 2000)?;
    sort_by_label(&mut start);
    let sep0 = min_pairwise_distance(&start);
    let collision_dist = 10.0 * tol * report.escape_radius.max(1.0);
    if sep0 < collision_dist {
        return Err(MonodromyError::StrandCollision { t: 0.0 });
    }

    let mut current = start.clone();
    let mut paths: Vec<Vec<(f64, Complex64)>> =
        start.iter().map(|&w| vec![(0.0, w)]).collect();
    for step in 0..steps {
        let t0 = step as f64 / steps as f64;
        let t1 = (step + 1) as f64 / steps as f64;
        advance_all(&poly_at, &mut current, &mut paths, t0, t1, tol, collision_dist, 0)?;
    }

    // endpoint matching back onto the initial labels
    let mut images = vec![0usize; count];
    let mut taken = vec![false; count];
    for (i, &w) in current.iter().enumerate() {
        let (j, dist) = start
            .iter()
            .enumerate()
            .map(|(j, &r)| (j, (w - r).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if dist > sep0 / 10.0 || taken[j] {
            return Err(MonodromyError::EndpointMismatch);
        }
        taken[j] = true;
        images[i] = j + 1;
    }
    let permutation = Perm::new(images.clone()).map_err(|_| MonodromyError::EndpointMismatch)?;

    let strands = paths
        .into_iter()
        .enumerate()
        .map(|(i, samples)| Strand { start_index: i + 1, end_index: images[i], samples })
        .collect();
    Ok(BraidGeometry { level, turns, strands, permutation })
}

/// CSV dump of a strand family: strand_id,t,re_w,im_w.
pub fn strands_to_csv(geometry: &BraidGeometry) -> String {
    let mut out = String::from("strand_id,t,re_w,im_w\n");
    for strand in &geometry.strands {
        for &(t, w) in &strand.samples {
            out.push_str(&format!("{},{:.12},{:.12},{:.12}\n", strand.start_index, t, w.re, w.im));
        }
    }
    out
}

/// Level-n roots over z = 1 together with their inverse-branch address words.
#[derive(Clone, Debug)]
pub struct LevelCoding {
    pub level: usize,
    /// Roots of the n-fold self-composition of q_{λ,1}, in label order.
    pub roots: Vec<Complex64>,
    /// words[i] is the address (a_n, …, a_1) of roots[i]; letters are 1-based.
    pub words: Vec<Vec<usize>>,
}

/// Continues all d roots of q_{λ,1}(w) = s·v from s = 0 to s = 1; the j-th
/// entry is the value of the inverse branch g_j at v.
fn continue_branches(
    q1: &CPoly,
    base_roots: &[Complex64],
    v: Complex64,
    tol: f64,
    collision_dist: f64,
) -> Result<Vec<Complex64>, MonodromyError> {
    let poly_at = |s: f64| q1.sub(&CPoly::constant(v * s));
    let mut current = base_roots.to_vec();
    let mut paths: Vec<Vec<(f64, Complex64)>> =
        current.iter().map(|&w| vec![(0.0, w)]).collect();
    let steps = 32;
    for step in 0..steps {
        let s0 = step as f64 / steps as f64;
        let s1 = (step + 1) as f64 / steps as f64;
        advance_all(&poly_at, &mut current, &mut paths, s0, s1, tol, collision_dist, 0)
            .map_err(|e| match e {
                MonodromyError::StrandCollision { .. } => MonodromyError::BranchCollision,
                other => other,
            })?;
    }
    Ok(current)
}

/// Labels every level-n root over z = 1 with its inverse-branch word
/// (a_n, …, a_1), where root = g_{a_1} ∘ … ∘ g_{a_n}(0).
pub fn code_level_n(
    lambda: &SkewParam,
    cfg: &EscapeConfig,
    level: usize,
    tol: f64,
) -> Result<LevelCoding, MonodromyError> {
    if level == 0 || tol <= 0.0 {
        return Err(MonodromyError::BadInput("level ≥ 1 and tol > 0 required"));
    }
    let count = lambda.d.checked_pow(level as u32).unwrap_or(usize::MAX);
    if count > MAX_STRANDS {
        return Err(MonodromyError::SizeGuard(count));
    }
    let report = admissibility_certificate(lambda, cfg)?;
    if !report.admissible {
        return Err(MonodromyError::NotAdmissible);
    }
    let one = Complex64::new(1.0, 0.0);
    let q1 = lambda.fiber_poly(one);
    let mut base_roots = q1.roots(tol, 2000)?;
    sort_by_label(&mut base_roots);
    let collision_dist = 10.0 * tol * report.escape_radius.max(1.0);
    if min_pairwise_distance(&base_roots) < collision_dist {
        return Err(MonodromyError::BranchCollision);
    }

    // breadth-first over words: extend (a_k, …, a_2) on the right by a_1
    let mut layer: Vec<(Vec<usize>, Complex64)> = vec![(Vec::new(), Complex64::new(0.0, 0.0))];
    for _ in 0..level {
        let mut next = Vec::with_capacity(layer.len() * lambda.d);
        for (word, value) in &layer {
            let branches = continue_branches(&q1, &base_roots, *value, tol, collision_dist)?;
            for (j, &w) in branches.iter().enumerate() {
                let mut extended = word.clone();
                extended.push(j + 1);
                next.push((extended, w));
            }
        }
        layer = next;
    }

    let mut roots = lambda.iterate_poly(one, level).roots(tol, 2000)?;
    sort_by_label(&mut roots);
    let sep = min_pairwise_distance(&roots);
    let mut words: Vec<Vec<usize>> = vec![Vec::new(); roots.len()];
    let mut taken = vec![false; roots.len()];
    for (word, value) in layer {
        let (i, dist) = roots
            .iter()
            .enumerate()
            .map(|(i, &r)| (i, (value - r).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if dist > sep / 10.0 || taken[i] {
            return Err(MonodromyError::BranchCollision);
        }
        taken[i] = true;
        words[i] = word;
    }
    Ok(LevelCoding { level, roots, words })
}

/// The iterated-monodromy action of γ^m on an address word: the letter i
/// positions from the right maps under S^{m·d^{i-1}}.
pub fn img_action(
    word: &[usize],
    turns: i64,
    s: &Perm,
    d: usize,
) -> Result<Vec<usize>, MonodromyError> {
    let order = s.order();
    let mut powers = Vec::with_capacity(order);
    let mut acc = Perm::identity(s.len());
    for _ in 0..order {
        powers.push(acc.clone());
        acc = s.compose(&acc);
    }
    let n = word.len();
    let mut out = vec![0usize; n];
    let mut d_pow = 1usize % order.max(1);
    for i in 1..=n {
        let letter = word[n - i];
        if letter == 0 || letter > d {
            return Err(MonodromyError::LetterOutOfRange(letter, d));
        }
        let e = ((turns.rem_euclid(order as i64) as usize) * d_pow) % order;
        out[n - i] = powers[e].apply(letter);
        d_pow = (d_pow * d) % order;
    }
    Ok(out)
}

fn word_rank(word: &[usize], d: usize) -> usize {
    word.iter().fold(0, |acc, &a| acc * d + (a - 1))
}

/// Result of comparing the tracked level-n monodromy against the recurrence
/// formula applied to the address words.
#[derive(Clone, Debug)]
pub struct MonodromyCheck {
    pub s: Perm,
    /// Permutation of word ranks observed by tracking.
    pub numeric: Perm,
    /// Permutation of word ranks predicted by the recurrence.
    pub formula: Perm,
    pub matches: bool,
}

/// Tracks γ^turns at level `level`, codes the roots, and checks the numeric
/// word permutation against the recurrence prediction. Exact comparison.
pub fn level_monodromy_check(
    lambda: &SkewParam,
    cfg: &EscapeConfig,
    level: usize,
    turns: i64,
    steps: usize,
    tol: f64,
) -> Result<MonodromyCheck, MonodromyError> {
    let d = lambda.d;
    let base = track_circle(lambda, cfg, 1, 1, steps, tol)?;
    let s = base.permutation.clone();
    let coding = code_level_n(lambda, cfg, level, tol)?;
    let geometry = track_circle(lambda, cfg, level, turns, steps, tol)?;

    // geometry start roots and coding roots come from the same polynomial and
    // labeling; match them explicitly anyway to stay robust to solver jitter
    let sep = min_pairwise_distance(&coding.roots);
    let mut geo_to_code = vec![usize::MAX; coding.roots.len()];
    for (i, strand) in geometry.strands.iter().enumerate() {
        let w0 = strand.samples[0].1;
        let (j, dist) = coding
            .roots
            .iter()
            .enumerate()
            .map(|(j, &r)| (j, (w0 - r).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if dist > sep / 10.0 {
            return Err(MonodromyError::EndpointMismatch);
        }
        geo_to_code[i] = j;
    }

    let count = coding.roots.len();
    let mut numeric_images = vec![0usize; count];
    for (i, strand) in geometry.strands.iter().enumerate() {
        let from = word_rank(&coding.words[geo_to_code[i]], d);
        let to = word_rank(&coding.words[geo_to_code[strand.end_index - 1]], d);
        numeric_images[from] = to + 1;
    }
    let numeric = Perm::new(numeric_images).map_err(|_| MonodromyError::EndpointMismatch)?;

    let mut formula_images = vec![0usize; count];
    for word in &coding.words {
        let image = img_action(word, turns, &s, d)?;
        formula_images[word_rank(word, d)] = word_rank(&image, d) + 1;
    }
    let formula = Perm::new(formula_images).map_err(|_| MonodromyError::EndpointMismatch)?;

    let matches = numeric == formula;
    Ok(MonodromyCheck { s, numeric, formula, matches })
}
