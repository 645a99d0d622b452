//! Braid words and conjugacy-class invariants read off the tracked strand
//! geometry: crossings from a generic planar projection, pairwise linking by
//! winding of strand differences, and component data of the closed braid.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::julia::Perm;
use crate::monodromy::BraidGeometry;

/// Retries of the projection direction before giving up.
const MAX_PROJECTION_RETRIES: usize = 32;
/// Golden-angle increment between retried projection directions.
const RETRY_STEP: f64 = 0.618_033_988_749_894_9 * std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum BraidError {
    #[error("no generic projection direction found after {MAX_PROJECTION_RETRIES} retries")]
    DegenerateProjection,
    #[error("strands {0} and {1} lose separation; linking numbers unreliable")]
    SeparationLoss(usize, usize),
    #[error("accumulated winding {0} is not close to a half-turn count")]
    NonIntegralWinding(f64),
    #[error("geometry has no samples")]
    EmptyGeometry,
}

/// Word in the braid generators: (generator index 1..strand_count-1, ±1),
/// read left to right in increasing time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BraidWord {
    pub strand_count: usize,
    pub letters: Vec<(usize, i8)>,
}

impl BraidWord {
    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|&(_, s)| s as i64).sum()
    }

    pub fn is_quasipositive_word(&self) -> bool {
        self.letters.iter().all(|&(_, s)| s > 0)
    }

    /// Cancels adjacent inverse pairs until stable.
    pub fn free_reduce(&self) -> BraidWord {
        let mut stack: Vec<(usize, i8)> = Vec::with_capacity(self.letters.len());
        for &(g, s) in &self.letters {
            if let Some(&(tg, ts)) = stack.last() {
                if tg == g && ts == -s {
                    stack.pop();
                    continue;
                }
            }
            stack.push((g, s));
        }
        BraidWord { strand_count: self.strand_count, letters: stack }
    }

    /// Permutation of strand positions induced by the word: position i at the
    /// top maps to the position where that strand exits at the bottom.
    pub fn permutation(&self) -> Perm {
        let n = self.strand_count;
        // slot[p] = strand currently in position p
        let mut slot: Vec<usize> = (0..n).collect();
        for &(g, _) in &self.letters {
            slot.swap(g - 1, g);
        }
        let mut images = vec![0usize; n];
        for (p, &strand) in slot.iter().enumerate() {
            images[strand] = p + 1;
        }
        Perm::new(images).expect("slot vector is a permutation")
    }

    /// "s2 s1 s3^-1" style rendering.
    pub fn to_text(&self) -> String {
        if self.letters.is_empty() {
            return "e".to_string();
        }
        self.letters
            .iter()
            .map(|&(g, s)| if s > 0 { format!("s{g}") } else { format!("s{g}^-1") })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Conjugacy-class data of the closed braid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BraidInvariants {
    pub strand_count: usize,
    /// Cycle lengths of the strand permutation, ascending.
    pub permutation_cycle_type: Vec<usize>,
    pub component_count: usize,
    /// Winding of each component over the base circle, ascending.
    pub windings: Vec<usize>,
    /// Total algebraic crossing number (sum of half-turn counts).
    pub exponent_sum: i64,
    /// Half-turn counts aggregated per component pair; diagonal entries hold
    /// internal half-turns of a component. Rows follow `windings` order.
    pub linking_matrix: Vec<Vec<i64>>,
}

fn common_times(geometry: &BraidGeometry) -> Result<usize, BraidError> {
    let len = geometry.strands.first().ok_or(BraidError::EmptyGeometry)?.samples.len();
    if len < 2 || geometry.strands.iter().any(|s| s.samples.len() != len) {
        return Err(BraidError::EmptyGeometry);
    }
    Ok(len)
}

fn scale_of(geometry: &BraidGeometry) -> f64 {
    geometry
        .strands
        .iter()
        .flat_map(|s| s.samples.iter().map(|&(_, w)| w.norm()))
        .fold(1.0_f64, f64::max)
}

/// Reads the crossing sequence off projections Re(w·e^{-iθ}).
///
/// A crossing is positive when the difference of the two strand positions
/// rotates counterclockwise through the projection direction. Degenerate
/// directions are retried along a golden-angle sweep.
pub fn extract_word(
    geometry: &BraidGeometry,
    projection_angle: f64,
) -> Result<BraidWord, BraidError> {
    let len = common_times(geometry)?;
    let n = geometry.strands.len();
    let scale = scale_of(geometry);
    let eps = 1e-12 * scale;

    'retry: for attempt in 0..MAX_PROJECTION_RETRIES {
        let theta = projection_angle + attempt as f64 * RETRY_STEP;
        let dir = Complex64::from_polar(1.0, -theta);
        let proj =
            |i: usize, k: usize| (geometry.strands[i].samples[k].1 * dir).re;

        // exact projection ties at a sample make the order ambiguous
        for k in 0..len {
            for i in 0..n {
                for j in i + 1..n {
                    if (proj(i, k) - proj(j, k)).abs() < eps {
                        continue 'retry;
                    }
                }
            }
        }

        // order[p] = strand index occupying position p (ascending projection)
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| proj(a, 0).total_cmp(&proj(b, 0)));
        let mut letters = Vec::new();

        for k in 0..len - 1 {
            // rank of each strand at the end of the interval
            let mut target: Vec<usize> = (0..n).collect();
            target.sort_by(|&a, &b| proj(a, k + 1).total_cmp(&proj(b, k + 1)));
            let mut rank_after = vec![0usize; n];
            for (p, &i) in target.iter().enumerate() {
                rank_after[i] = p;
            }

            // bubble toward the target order, earliest crossing first
            loop {
                let mut best: Option<(f64, usize)> = None;
                for p in 0..n - 1 {
                    let (a, b) = (order[p], order[p + 1]);
                    if rank_after[a] > rank_after[b] {
                        let d0 = proj(b, k) - proj(a, k);
                        let d1 = proj(b, k + 1) - proj(a, k + 1);
                        let t_local = if (d0 - d1).abs() > 0.0 { d0 / (d0 - d1) } else { 0.5 };
                        if best.map_or(true, |(bt, _)| t_local < bt) {
                            best = Some((t_local, p));
                        }
                    }
                }
                let Some((_, p)) = best else { break };
                let (a, b) = (order[p], order[p + 1]);
                let u0 = geometry.strands[a].samples[k].1 - geometry.strands[b].samples[k].1;
                let u1 =
                    geometry.strands[a].samples[k + 1].1 - geometry.strands[b].samples[k + 1].1;
                let cross = (u0.conj() * u1).im;
                if cross.abs() < eps * eps {
                    continue 'retry;
                }
                let sign = if cross > 0.0 { 1 } else { -1 };
                letters.push((p + 1, sign));
                order.swap(p, p + 1);
            }
        }
        return Ok(BraidWord { strand_count: n, letters });
    }
    Err(BraidError::DegenerateProjection)
}

/// Accumulated winding angle of w_i − w_j over the loop, for every pair.
fn pair_angles(geometry: &BraidGeometry) -> Result<Vec<Vec<f64>>, BraidError> {
    let len = common_times(geometry)?;
    let n = geometry.strands.len();
    let floor = 1e-13 * scale_of(geometry);
    let mut angles = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let mut total = 0.0;
            for k in 0..len - 1 {
                let u0 = geometry.strands[i].samples[k].1 - geometry.strands[j].samples[k].1;
                let u1 =
                    geometry.strands[i].samples[k + 1].1 - geometry.strands[j].samples[k + 1].1;
                if u0.norm() < floor || u1.norm() < floor {
                    return Err(BraidError::SeparationLoss(i + 1, j + 1));
                }
                total += (u1 / u0).arg();
            }
            angles[i][j] = total;
            angles[j][i] = total;
        }
    }
    Ok(angles)
}

/// Total algebraic crossing number: the winding of all strand differences,
/// counted in half-turns.
pub fn total_linking(geometry: &BraidGeometry) -> Result<i64, BraidError> {
    let angles = pair_angles(geometry)?;
    let n = geometry.strands.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += angles[i][j];
        }
    }
    let half_turns = total / std::f64::consts::PI;
    if (half_turns - half_turns.round()).abs() > 0.05 {
        return Err(BraidError::NonIntegralWinding(half_turns));
    }
    Ok(half_turns.round() as i64)
}

/// Components of the closed braid with their windings and pairwise linking.
pub fn invariants(geometry: &BraidGeometry) -> Result<BraidInvariants, BraidError> {
    let angles = pair_angles(geometry)?;
    let perm = &geometry.permutation;
    let mut cycles = perm.cycles();
    cycles.sort_by_key(|c| (c.len(), *c.iter().min().unwrap()));
    let windings: Vec<usize> = cycles.iter().map(|c| c.len()).collect();

    let mut component_of = vec![0usize; geometry.strands.len()];
    for (ci, cycle) in cycles.iter().enumerate() {
        for &label in cycle {
            component_of[label - 1] = ci;
        }
    }

    let m = cycles.len();
    let mut raw = vec![vec![0.0f64; m]; m];
    for i in 0..geometry.strands.len() {
        for j in i + 1..geometry.strands.len() {
            let (ci, cj) = (component_of[i], component_of[j]);
            raw[ci][cj] += angles[i][j];
            if ci != cj {
                raw[cj][ci] += angles[i][j];
            }
        }
    }
    let mut linking_matrix = vec![vec![0i64; m]; m];
    let mut exponent_sum = 0i64;
    for ci in 0..m {
        for cj in ci..m {
            let half_turns = raw[ci][cj] / std::f64::consts::PI;
            if (half_turns - half_turns.round()).abs() > 0.05 {
                return Err(BraidError::NonIntegralWinding(half_turns));
            }
            let v = half_turns.round() as i64;
            linking_matrix[ci][cj] = v;
            linking_matrix[cj][ci] = v;
            exponent_sum += v;
        }
    }

    Ok(BraidInvariants {
        strand_count: geometry.strands.len(),
        permutation_cycle_type: perm.cycle_type(),
        component_count: m,
        windings,
        exponent_sum,
        linking_matrix,
    })
}

/// Invariants recomputed from a word alone (permutation and exponent sum;
/// component linking needs geometry and is left zeroed on the off-diagonal).
pub fn word_invariants(word: &BraidWord) -> (Perm, i64) {
    (word.permutation(), word.exponent_sum())
}

/// Conjugacy fingerprint comparison: all invariants equal up to a relabeling
/// of components that preserves windings.
pub fn fingerprint_equal(a: &BraidInvariants, b: &BraidInvariants) -> bool {
    if a.strand_count != b.strand_count
        || a.permutation_cycle_type != b.permutation_cycle_type
        || a.component_count != b.component_count
        || a.windings != b.windings
        || a.exponent_sum != b.exponent_sum
    {
        return false;
    }
    let m = a.component_count;
    let mut perm: Vec<usize> = (0..m).collect();
    // try every relabeling that preserves windings (component counts are tiny)
    let mut stack = vec![0usize];
    let mut used = vec![false; m];
    fn search(
        a: &BraidInvariants,
        b: &BraidInvariants,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        stack: &mut Vec<usize>,
    ) -> bool {
        let i = stack.len() - 1;
        if i == a.component_count {
            return (0..a.component_count).all(|x| {
                (0..a.component_count)
                    .all(|y| a.linking_matrix[x][y] == b.linking_matrix[perm[x]][perm[y]])
            });
        }
        for j in 0..a.component_count {
            if !used[j] && a.windings[i] == b.windings[j] {
                used[j] = true;
                perm[i] = j;
                stack.push(0);
                if search(a, b, perm, used, stack) {
                    return true;
                }
                stack.pop();
                used[j] = false;
            }
        }
        false
    }
    search(a, b, &mut perm, &mut used, &mut stack)
}

/// Plots the strand projections (t horizontal, Re(w·e^{-iθ}) vertical).
pub fn braid_svg(geometry: &BraidGeometry, projection_angle: f64) -> String {
    let width = 800.0;
    let height = 400.0;
    let dir = Complex64::from_polar(1.0, -projection_angle);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for strand in &geometry.strands {
        for &(_, w) in &strand.samples {
            let x = (w * dir).re;
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let span = (hi - lo).max(1e-9);
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let mut body = String::new();
    for (i, strand) in geometry.strands.iter().enumerate() {
        let points: Vec<String> = strand
            .samples
            .iter()
            .map(|&(t, w)| {
                let y = height - 20.0 - (((w * dir).re - lo) / span) * (height - 40.0);
                format!("{:.2},{:.2}", 20.0 + t * (width - 40.0), y)
            })
            .collect();
        body.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            palette[i % palette.len()],
            points.join(" ")
        ));
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n{body}</svg>\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::escape::EscapeConfig;
    use crate::monodromy::track_circle;
    use crate::skewparam::SkewParam;

    fn flat(d: usize, entries: &[(f64, f64)]) -> SkewParam {
        let v: Vec<Complex64> = entries.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        SkewParam::from_flat(d, &v).unwrap()
    }

    fn cubic(slot: usize, value: (f64, f64)) -> SkewParam {
        let mut v = vec![(0.0, 0.0); 7];
        v[slot] = value;
        flat(3, &v)
    }

    fn geometry(lambda: &SkewParam) -> BraidGeometry {
        track_circle(lambda, &EscapeConfig::default(), 1, 1, 512, 1e-10).unwrap()
    }

    #[test]
    fn quadratic_single_crossing() {
        // roots ±i·b·√z: one positive half-turn, word σ1
        let lambda = flat(2, &[(0.0, 0.0), (8.0, 0.0), (0.0, 0.0)]);
        let g = geometry(&lambda);
        let word = extract_word(&g, 0.3).unwrap();
        assert_eq!(word.letters, vec![(1, 1)]);
        assert_eq!(total_linking(&g).unwrap(), 1);
    }

    #[test]
    fn fully_split_cubic() {
        // w³ = 64 z³: three strands each winding once, all pairs linked twice
        let g = geometry(&cubic(3, (-4.0, 0.0)));
        let inv = invariants(&g).unwrap();
        assert_eq!(inv.component_count, 3);
        assert_eq!(inv.windings, vec![1, 1, 1]);
        assert_eq!(inv.exponent_sum, 6);
        let word = extract_word(&g, 0.3).unwrap();
        assert_eq!(word.exponent_sum(), 6);
        assert!(word.is_quasipositive_word());
    }

    #[test]
    fn irreducible_cubic_two_crossings() {
        // w³ = 64 z: one component winding 3; the standard dual Coxeter word
        let g = geometry(&cubic(1, (-4.0, 0.0)));
        let inv = invariants(&g).unwrap();
        assert_eq!(inv.component_count, 1);
        assert_eq!(inv.windings, vec![3]);
        assert_eq!(inv.exponent_sum, 2);
        let word = extract_word(&g, 0.3).unwrap();
        assert_eq!(word.letters.len(), 2);
        assert!(word.is_quasipositive_word());
        let generators: Vec<usize> = word.letters.iter().map(|&(g, _)| g).collect();
        assert!(generators == vec![1, 2] || generators == vec![2, 1]);
    }

    #[test]
    fn mixed_cubic_exponent_three() {
        // w³ = 64 z w: fixed central strand plus a winding-2 pair
        let g = geometry(&cubic(5, (0.0, 8.0)));
        let inv = invariants(&g).unwrap();
        assert_eq!(inv.component_count, 2);
        assert_eq!(inv.windings, vec![1, 2]);
        assert_eq!(inv.exponent_sum, 3);
        // the winding-2 component self-links once; it links the axis twice
        assert_eq!(inv.linking_matrix[1][1], 1);
        assert_eq!(inv.linking_matrix[0][1], 2);
        let word = extract_word(&g, 0.3).unwrap();
        assert_eq!(word.exponent_sum(), 3);
        assert!(word.is_quasipositive_word());
    }

    #[test]
    fn word_permutation_matches_geometry() {
        for lambda in [cubic(3, (-4.0, 0.0)), cubic(1, (-4.0, 0.0)), cubic(5, (0.0, 8.0))] {
            let g = geometry(&lambda);
            let word = extract_word(&g, 0.3).unwrap();
            // conjugate the label permutation into projection-position space
            let dir = Complex64::from_polar(1.0, -0.3);
            let mut order: Vec<usize> = (0..g.strands.len()).collect();
            order.sort_by(|&a, &b| {
                (g.strands[a].samples[0].1 * dir)
                    .re
                    .total_cmp(&(g.strands[b].samples[0].1 * dir).re)
            });
            let mut pos = vec![0usize; order.len()];
            for (p, &i) in order.iter().enumerate() {
                pos[i] = p + 1;
            }
            let pos_perm = Perm::new(pos).unwrap();
            let expected =
                pos_perm.compose(&g.permutation).compose(&pos_perm.inverse());
            assert_eq!(word.permutation(), expected);
        }
    }

    #[test]
    fn exponent_sum_matches_word_across_angles() {
        let g = geometry(&cubic(1, (-4.0, 0.0)));
        let total = total_linking(&g).unwrap();
        for angle in [0.0, 0.7, 1.9, 2.8] {
            let word = extract_word(&g, angle).unwrap();
            assert_eq!(word.exponent_sum(), total);
        }
    }

    #[test]
    fn free_reduction_and_text() {
        let w = BraidWord { strand_count: 3, letters: vec![(1, 1), (2, 1), (2, -1), (1, 1)] };
        let reduced = w.free_reduce();
        assert_eq!(reduced.letters, vec![(1, 1), (1, 1)]);
        assert_eq!(reduced.to_text(), "s1 s1");
        assert_eq!(w.to_text(), "s1 s2 s2^-1 s1");
        assert_eq!(
            BraidWord { strand_count: 2, letters: vec![] }.to_text(),
            "e"
        );
    }

    #[test]
    fn fingerprints_compare_up_to_relabeling() {
        let g = geometry(&cubic(5, (0.0, 8.0)));
        let a = invariants(&g).unwrap();
        let mut b = a.clone();
        assert!(fingerprint_equal(&a, &b));
        b.exponent_sum += 1;
        assert!(!fingerprint_equal(&a, &b));
    }

    #[test]
    fn svg_contains_polylines() {
        let g = geometry(&cubic(3, (-4.0, 0.0)));
        let svg = braid_svg(&g, 0.3);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 3);
    }
}
