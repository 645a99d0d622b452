//! Combinatorial model of the Julia set: permutations of the fiber alphabet,
//! eventually periodic codes, the homeomorphism h and its orbits, and point
//! equality in the suspension.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JuliaError {
    #[error("images {0:?} are not a bijection of 1..={1}")]
    NotBijective(Vec<usize>, usize),
    #[error("letter {0} is out of range 1..={1}")]
    LetterOutOfRange(usize, usize),
    #[error("cannot parse {what}: {text}")]
    Parse { what: &'static str, text: String },
}

/// Permutation of {1..d}, stored as 1-based images.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn new(images: Vec<usize>) -> Result<Self, JuliaError> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &img in &images {
            if img == 0 || img > d || seen[img - 1] {
                return Err(JuliaError::NotBijective(images.clone(), d));
            }
            seen[img - 1] = true;
        }
        Ok(Perm { images })
    }

    pub fn identity(d: usize) -> Self {
        Perm { images: (1..=d).collect() }
    }

    /// Permutation from a list of disjoint cycles over 1..d.
    pub fn from_cycles(d: usize, cycles: &[Vec<usize>]) -> Result<Self, JuliaError> {
        let mut images: Vec<usize> = (1..=d).collect();
        for cycle in cycles {
            for pair in cycle.windows(2) {
                if pair[0] == 0 || pair[0] > d {
                    return Err(JuliaError::LetterOutOfRange(pair[0], d));
                }
                images[pair[0] - 1] = pair[1];
            }
            if let (Some(&first), Some(&last)) = (cycle.first(), cycle.last()) {
                if last == 0 || last > d {
                    return Err(JuliaError::LetterOutOfRange(last, d));
                }
                images[last - 1] = first;
            }
        }
        Perm::new(images)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, letter: usize) -> usize {
        self.images[letter - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// self ∘ other: other first, then self.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm { images: other.images.iter().map(|&x| self.apply(x)).collect() }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.images.len()];
        for (i, &img) in self.images.iter().enumerate() {
            images[img - 1] = i + 1;
        }
        Perm { images }
    }

    pub fn pow(&self, k: i64) -> Perm {
        let order = self.order() as i64;
        let mut e = k.rem_euclid(order) as usize;
        let mut acc = Perm::identity(self.len());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = base.compose(&acc);
            }
            base = base.compose(&base.clone());
            e >>= 1;
        }
        acc
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let d = self.len();
        let mut seen = vec![false; d];
        let mut out = Vec::new();
        for start in 1..=d {
            if seen[start - 1] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start - 1] = true;
            let mut cur = self.apply(start);
            while cur != start {
                seen[cur - 1] = true;
                cycle.push(cur);
                cur = self.apply(cur);
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle lengths sorted ascending; labels the conjugacy class.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(|c| c.len()).collect();
        t.sort_unstable();
        t
    }

    /// Least n ≥ 1 with S^n = Id; equals the lcm of cycle lengths.
    pub fn order(&self) -> usize {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 { a } else { gcd(b, a % b) }
        }
        self.cycles().iter().map(|c| c.len()).fold(1, |acc, l| acc / gcd(acc, l) * l)
    }

    /// Cycle notation, fixed points included: "(1 2 3)(4)".
    pub fn to_cycle_string(&self) -> String {
        self.cycles()
            .iter()
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                format!("({})", inner.join(" "))
            })
            .collect()
    }

    /// Parses cycle notation "(1 2 3)(4)"; letters not mentioned are fixed.
    pub fn parse(text: &str, d: usize) -> Result<Self, JuliaError> {
        let mut cycles = Vec::new();
        let body = text.trim();
        let bad = || JuliaError::Parse { what: "permutation", text: text.to_string() };
        if body.is_empty() || !body.starts_with('(') || !body.ends_with(')') {
            if body == "id" || body == "Id" {
                return Ok(Perm::identity(d));
            }
            return Err(bad());
        }
        for chunk in body[1..body.len() - 1].split(")(") {
            let cycle: Result<Vec<usize>, _> = chunk
                .split_whitespace()
                .flat_map(|s| s.split(','))
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>())
                .collect();
            let cycle = cycle.map_err(|_| bad())?;
            if cycle.iter().any(|&x| x == 0 || x > d) {
                return Err(bad());
            }
            cycles.push(cycle);
        }
        Perm::from_cycles(d, &cycles)
    }
}

/// Eventually periodic word over {1..d}: preperiod then a primitive period,
/// both canonicalized so structural equality is code equality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Code {
    preperiod: Vec<usize>,
    period: Vec<usize>,
}

impl Code {
    pub fn new(preperiod: Vec<usize>, period: Vec<usize>, d: usize) -> Result<Self, JuliaError> {
        if period.is_empty() {
            return Err(JuliaError::Parse { what: "code period", text: "empty".into() });
        }
        for &l in preperiod.iter().chain(&period) {
            if l == 0 || l > d {
                return Err(JuliaError::LetterOutOfRange(l, d));
            }
        }
        let mut code = Code { preperiod, period };
        code.normalize();
        Ok(code)
    }

    pub fn constant(letter: usize, d: usize) -> Result<Self, JuliaError> {
        Code::new(Vec::new(), vec![letter], d)
    }

    pub fn preperiod(&self) -> &[usize] {
        &self.preperiod
    }

    pub fn period(&self) -> &[usize] {
        &self.period
    }

    /// Letter at 1-based position n.
    pub fn letter_at(&self, n: usize) -> usize {
        let idx = n - 1;
        if idx < self.preperiod.len() {
            self.preperiod[idx]
        } else {
            self.period[(idx - self.preperiod.len()) % self.period.len()]
        }
    }

    fn normalize(&mut self) {
        // primitive period
        let q = self.period.len();
        for cand in 1..q {
            if q % cand == 0 && (cand..q).all(|i| self.period[i] == self.period[i % cand]) {
                self.period.truncate(cand);
                break;
            }
        }
        // minimal preperiod: absorb trailing preperiod letters into the period
        while let Some(&last) = self.preperiod.last() {
            if last == *self.period.last().unwrap() {
                self.preperiod.pop();
                self.period.rotate_right(1);
            } else {
                break;
            }
        }
    }

    /// "pre:period" with comma-separated letters, e.g. "2:1,3".
    pub fn to_text(&self) -> String {
        let pre: Vec<String> = self.preperiod.iter().map(|l| l.to_string()).collect();
        let per: Vec<String> = self.period.iter().map(|l| l.to_string()).collect();
        format!("{}:{}", pre.join(","), per.join(","))
    }

    pub fn parse(text: &str, d: usize) -> Result<Self, JuliaError> {
        let bad = || JuliaError::Parse { what: "code", text: text.to_string() };
        let (pre_text, per_text) = text.split_once(':').ok_or_else(bad)?;
        let parse_list = |s: &str| -> Result<Vec<usize>, JuliaError> {
            s.split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
                .collect()
        };
        Code::new(parse_list(pre_text)?, parse_list(per_text)?, d)
    }
}

/// Exponent sequence n ↦ k·d^{n-1} mod order(S), returned as (preperiod, period).
fn exponent_sequence(d: usize, order: usize, k: i64) -> (Vec<usize>, Vec<usize>) {
    let k = k.rem_euclid(order as i64) as usize;
    let mut seen = std::collections::HashMap::new();
    let mut seq = Vec::new();
    let mut power = 1usize % order; // d^0 mod order
    loop {
        let e = (k * power) % order;
        if let Some(&at) = seen.get(&(power, e)) {
            let pre = seq[..at].to_vec();
            let per = seq[at..].to_vec();
            return (pre, per);
        }
        seen.insert((power, e), seq.len());
        seq.push(e);
        power = (power * d) % order;
    }
}

/// h^k: the letter at position n maps under S^{k·d^{n-1} mod order(S)}.
/// Negative k allowed since h has finite order.
pub fn h_apply(s: &Perm, d: usize, code: &Code, k: i64) -> Result<Code, JuliaError> {
    let order = s.order();
    let (exp_pre, exp_per) = exponent_sequence(d, order, k);
    let code_pre = code.preperiod().len();
    let code_per = code.period().len();
    fn lcm(a: usize, b: usize) -> usize {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 { a } else { gcd(b, a % b) }
        }
        a / gcd(a, b) * b
    }
    let pre_len = code_pre.max(exp_pre.len());
    let per_len = lcm(code_per, exp_per.len().max(1));
    let powers: Vec<Perm> = {
        // cache S^e for e < order
        let mut v = Vec::with_capacity(order);
        let mut acc = Perm::identity(s.len());
        for _ in 0..order {
            v.push(acc.clone());
            acc = s.compose(&acc);
        }
        v
    };
    let exp_at = |n: usize| -> usize {
        let idx = n - 1;
        if idx < exp_pre.len() {
            exp_pre[idx]
        } else {
            exp_per[(idx - exp_pre.len()) % exp_per.len()]
        }
    };
    let mapped: Vec<usize> =
        (1..=pre_len + per_len).map(|n| powers[exp_at(n)].apply(code.letter_at(n))).collect();
    Code::new(mapped[..pre_len].to_vec(), mapped[pre_len..].to_vec(), d)
}

/// Orbit of a code under h until first return; the orbit size is the winding
/// number of the corresponding Julia component over the base circle.
pub fn component_orbit(s: &Perm, d: usize, code: &Code) -> Result<(Vec<Code>, usize), JuliaError> {
    let mut orbit = vec![code.clone()];
    let mut cur = h_apply(s, d, code, 1)?;
    while cur != *code {
        orbit.push(cur.clone());
        cur = h_apply(s, d, &cur, 1)?;
    }
    let winding = orbit.len();
    Ok((orbit, winding))
}

/// Components of the d fixed points grouped by S-cycle; the winding of each
/// component is its cycle length.
pub fn fixed_point_components(s: &Perm) -> Vec<(Vec<usize>, usize)> {
    s.cycles().into_iter().map(|c| {
        let w = c.len();
        (c, w)
    }).collect()
}

/// Point equality in the suspension: same (t, code), or a seam match
/// (0, x) ~ (1, y) with h(x) = y.
pub fn suspension_eq(
    s: &Perm,
    d: usize,
    p1: (f64, &Code),
    p2: (f64, &Code),
) -> Result<bool, JuliaError> {
    let (t1, c1) = p1;
    let (t2, c2) = p2;
    if t1 == t2 {
        return Ok(c1 == c2);
    }
    if t1 == 0.0 && t2 == 1.0 {
        return Ok(&h_apply(s, d, c1, 1)? == c2);
    }
    if t1 == 1.0 && t2 == 0.0 {
        return Ok(&h_apply(s, d, c2, 1)? == c1);
    }
    Ok(false)
}
