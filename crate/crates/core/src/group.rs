//! Normal-form arithmetic on free products of lattices `Z^{d_1} * ... * Z^{d_k}`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One free factor `Z^rank`. `index` is 1-based as in the text form `f<i>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub index: usize,
    pub rank: usize,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeProductSpec {
    factors: Vec<FactorSpec>,
}

impl FreeProductSpec {
    pub fn new(factors: Vec<FactorSpec>) -> Result<Self> {
        if factors.len() < 2 {
            return Err(Error::InvalidInput("a free product needs at least two factors".into()));
        }
        for (pos, f) in factors.iter().enumerate() {
            if f.index != pos + 1 {
                return Err(Error::InvalidInput(format!(
                    "factor indices must be 1..k in order, found {} at position {}",
                    f.index,
                    pos + 1
                )));
            }
            if f.rank == 0 || f.rank > MAX_RANK {
                return Err(Error::InvalidInput(format!(
                    "factor {} has rank {}, allowed 1..={MAX_RANK}",
                    f.index, f.rank
                )));
            }
        }
        Ok(Self { factors })
    }

    /// `Z^{r_1} * Z^{r_2} * ...` with labels `Z^r`.
    pub fn from_ranks(ranks: &[usize]) -> Result<Self> {
        Self::new(
            ranks
                .iter()
                .enumerate()
                .map(|(i, &r)| FactorSpec {
                    index: i + 1,
                    rank: r,
                    label: if r == 1 { "Z".into() } else { format!("Z^{r}") },
                })
                .collect(),
        )
    }

    pub fn factors(&self) -> &[FactorSpec] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// Rank of the factor with 0-based position `f`.
    pub fn rank(&self, f: usize) -> usize {
        self.factors[f].rank
    }

    /// Standard generators: `±e_j` in every factor, as one-syllable elements.
    pub fn generators(&self) -> Vec<GroupElement> {
        let mut out = Vec::new();
        for (f, spec) in self.factors.iter().enumerate() {
            for j in 0..spec.rank {
                for sign in [1, -1] {
                    let mut v = vec![0; spec.rank];
                    v[j] = sign;
                    out.push(GroupElement::syllable(f, v));
                }
            }
        }
        out.sort();
        out
    }

    /// Checks that every syllable refers to an existing factor with matching rank.
    pub fn check(&self, g: &GroupElement) -> Result<()> {
        for s in g.syllables() {
            let spec = self.factors.get(s.factor).ok_or_else(|| {
                Error::InvalidInput(format!("element {g} uses factor f{} outside the group", s.factor + 1))
            })?;
            if spec.rank != s.vector.len() {
                return Err(Error::InvalidInput(format!(
                    "element {g}: factor f{} has rank {} but syllable has {} coordinates",
                    s.factor + 1,
                    spec.rank,
                    s.vector.len()
                )));
            }
        }
        Ok(())
    }
}

/// Largest supported lattice rank.
pub const MAX_RANK: usize = 8;

/// A nonzero vector in one factor. `factor` is 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Syllable {
    pub factor: usize,
    pub vector: Vec<i32>,
}

impl Syllable {
    pub fn new(factor: usize, vector: Vec<i32>) -> Self {
        assert!(vector.iter().any(|&c| c != 0), "syllable vector must be nonzero");
        Self { factor, vector }
    }

    pub fn l1(&self) -> u64 {
        self.vector.iter().map(|&c| c.unsigned_abs() as u64).sum()
    }

    fn negated(&self) -> Self {
        Self {
            factor: self.factor,
            vector: self.vector.iter().map(|&c| c.checked_neg().expect("coordinate overflow")).collect(),
        }
    }
}

/// Reduced word; the empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    syllables: Vec<Syllable>,
}

/// Length-lexicographic order: word length, then syllable count, then syllables.
impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.word_length()
            .cmp(&other.word_length())
            .then(self.syllables.len().cmp(&other.syllables.len()))
            .then_with(|| self.syllables.cmp(&other.syllables))
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl GroupElement {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn syllable(factor: usize, vector: Vec<i32>) -> Self {
        if vector.iter().all(|&c| c == 0) {
            Self::identity()
        } else {
            Self { syllables: vec![Syllable { factor, vector }] }
        }
    }

    /// Reduces an arbitrary syllable list (zero vectors and repeated factors allowed).
    pub fn from_syllables<I: IntoIterator<Item = Syllable>>(items: I) -> Self {
        let mut g = Self::identity();
        for s in items {
            g.push_right(s.factor, &s.vector);
        }
        g
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    /// Right-multiplies by the factor element `v` in place.
    pub fn push_right(&mut self, factor: usize, v: &[i32]) {
        if v.iter().all(|&c| c == 0) {
            return;
        }
        if let Some(last) = self.syllables.last_mut() {
            if last.factor == factor {
                assert_eq!(last.vector.len(), v.len(), "rank mismatch in factor f{}", factor + 1);
                for (a, b) in last.vector.iter_mut().zip(v) {
                    *a = a.checked_add(*b).expect("coordinate overflow");
                }
                if last.vector.iter().all(|&c| c == 0) {
                    self.syllables.pop();
                }
                return;
            }
        }
        self.syllables.push(Syllable { factor, vector: v.to_vec() });
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for s in &other.syllables {
            out.push_right(s.factor, &s.vector);
        }
        out
    }

    pub fn inverse(&self) -> Self {
        Self { syllables: self.syllables.iter().rev().map(Syllable::negated).collect() }
    }

    /// `self^{-1} · other`.
    pub fn left_divide(&self, other: &Self) -> Self {
        self.inverse().multiply(other)
    }

    /// Word length for the generators `±e_j` of every factor.
    pub fn word_length(&self) -> u64 {
        self.syllables.iter().map(Syllable::l1).sum()
    }

    /// Syllable count.
    pub fn relative_length(&self) -> usize {
        self.syllables.len()
    }

    pub fn prefix(&self, j: usize) -> Result<Self> {
        if j > self.syllables.len() {
            return Err(Error::InvalidInput(format!(
                "prefix length {j} exceeds relative length {} of {self}",
                self.syllables.len()
            )));
        }
        Ok(Self { syllables: self.syllables[..j].to_vec() })
    }

    pub fn common_prefix_length(&self, other: &Self) -> usize {
        self.syllables.iter().zip(&other.syllables).take_while(|(a, b)| a == b).count()
    }

    pub fn power(&self, n: usize) -> Self {
        let mut out = Self::identity();
        for _ in 0..n {
            out = out.multiply(self);
        }
        out
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "e");
        }
        for (i, s) in self.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "f{}:(", s.factor + 1)?;
            for (j, c) in s.vector.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl FromStr for GroupElement {
    type Err = Error;

    /// Parses `e` or `f1:(2).f2:(-1,0)`; the input need not be reduced.
    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "e" || text.is_empty() {
            return Ok(Self::identity());
        }
        let bad = |why: &str| Error::InvalidInput(format!("cannot parse element `{text}`: {why}"));
        let mut items = Vec::new();
        for part in text.split('.') {
            let part = part.trim();
            let rest = part.strip_prefix('f').ok_or_else(|| bad("syllable must start with f<i>"))?;
            let (idx, vec) = rest.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let idx: usize = idx.trim().parse().map_err(|_| bad("bad factor index"))?;
            if idx == 0 {
                return Err(bad("factor indices are 1-based"));
            }
            let inner = vec
                .trim()
                .strip_prefix('(')
                .and_then(|v| v.strip_suffix(')'))
                .ok_or_else(|| bad("vector must be parenthesised"))?;
            let coords = inner
                .split(',')
                .map(|c| c.trim().parse::<i32>().map_err(|_| bad("bad coordinate")))
                .collect::<Result<Vec<_>>>()?;
            items.push(Syllable { factor: idx - 1, vector: coords });
        }
        Ok(Self::from_syllables(items))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Word,
    /// Syllable count, each syllable's ℓ¹ norm capped by `syllable_l1_max` so the ball is finite.
    Relative { syllable_l1_max: u32 },
}

/// Elements of the ball in length-lexicographic order.
///
/// Errors with `BudgetExceeded` once more than `cap` elements would be emitted.
pub fn enumerate_ball(spec: &FreeProductSpec, radius: usize, metric: Metric, cap: usize) -> Result<Vec<GroupElement>> {
    let mut out = vec![GroupElement::identity()];
    match metric {
        Metric::Word => {
            let gens = spec.generators();
            let mut seen: BTreeSet<GroupElement> = out.iter().cloned().collect();
            let mut sphere = out.clone();
            for _ in 0..radius {
                let mut next = BTreeSet::new();
                for g in &sphere {
                    for s in &gens {
                        let h = g.multiply(s);
                        if !seen.contains(&h) {
                            next.insert(h);
                        }
                    }
                }
                if seen.len() + next.len() > cap {
                    return Err(Error::BudgetExceeded(format!(
                        "ball enumeration exceeds cap {cap} at radius {}",
                        radius
                    )));
                }
                seen.extend(next.iter().cloned());
                sphere = next.into_iter().collect();
                out.extend(sphere.iter().cloned());
            }
        }
        Metric::Relative { syllable_l1_max } => {
            let per_factor: Vec<Vec<Vec<i32>>> = (0..spec.num_factors())
                .map(|f| lattice_vectors(spec.rank(f), syllable_l1_max))
                .collect();
            let mut sphere = out.clone();
            for _ in 0..radius {
                let mut next = Vec::new();
                for g in &sphere {
                    let last = g.syllables.last().map(|s| s.factor);
                    for (f, vs) in per_factor.iter().enumerate() {
                        if Some(f) == last {
                            continue;
                        }
                        for v in vs {
                            let mut h = g.clone();
                            h.syllables.push(Syllable { factor: f, vector: v.clone() });
                            next.push(h);
                        }
                    }
                    if out.len() + next.len() > cap {
                        return Err(Error::BudgetExceeded(format!(
                            "relative ball enumeration exceeds cap {cap}"
                        )));
                    }
                }
                next.sort();
                out.extend(next.iter().cloned());
                sphere = next;
            }
            out.sort();
        }
    }
    Ok(out)
}

/// Nonzero vectors of `Z^d` with ℓ¹ norm at most `max`.
pub fn lattice_vectors(d: usize, max: u32) -> Vec<Vec<i32>> {
    fn rec(d: usize, budget: i32, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if cur.len() == d {
            if cur.iter().any(|&c| c != 0) {
                out.push(cur.clone());
            }
            return;
        }
        for c in -budget..=budget {
            cur.push(c);
            rec(d, budget - c.abs(), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, max as i32, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(s: &str) -> GroupElement {
        s.parse().unwrap()
    }

    #[test]
    fn multiply_examples() {
        assert!(el("f1:(2)").multiply(&el("f1:(-2)")).is_identity());
        assert_eq!(el("f1:(1)").multiply(&el("f1:(1).f2:(1)")), el("f1:(2).f2:(1)"));
        assert_eq!(el("f1:(1).f2:(1)").multiply(&el("f2:(-1).f1:(3)")), el("f1:(4)"));
    }

    #[test]
    fn inverse_and_lengths() {
        assert_eq!(el("f1:(1).f2:(-3)").inverse(), el("f2:(3).f1:(-1)"));
        assert!(GroupElement::identity().inverse().is_identity());
        assert_eq!(el("f1:(2,-1)").word_length(), 3);
        assert_eq!(el("f1:(2).f2:(-1)").word_length(), 3);
        assert_eq!(el("f1:(1).f2:(1).f1:(-1)").relative_length(), 3);
        assert_eq!(el("f1:(5)").relative_length(), 1);
    }

    #[test]
    fn prefixes() {
        let a = el("f1:(1).f2:(2)");
        assert_eq!(a.prefix(1).unwrap(), el("f1:(1)"));
        assert!(a.prefix(0).unwrap().is_identity());
        assert_eq!(a.prefix(2).unwrap(), a);
        assert!(a.prefix(3).is_err());
        assert_eq!(a.common_prefix_length(&a), 2);
        assert_eq!(el("f1:(1)").common_prefix_length(&el("f2:(1)")), 0);
        assert_eq!(el("f1:(1).f2:(1)").common_prefix_length(&el("f1:(1).f2:(-1)")), 1);
    }

    #[test]
    fn text_round_trip() {
        for s in ["e", "f1:(2).f2:(-1)", "f2:(1,0,-3).f1:(7)"] {
            assert_eq!(el(s).to_string(), s);
        }
        assert!("g1:(1)".parse::<GroupElement>().is_err());
        assert!("f0:(1)".parse::<GroupElement>().is_err());
    }

    #[test]
    fn free_group_ball_counts() {
        let spec = FreeProductSpec::from_ranks(&[1, 1]).unwrap();
        let counts: Vec<usize> =
            (0..=3).map(|r| enumerate_ball(&spec, r, Metric::Word, 1_000).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 5, 17, 53]);
        assert!(enumerate_ball(&spec, 6, Metric::Word, 100).is_err());
    }

    #[test]
    fn ball_order_is_length_lex() {
        let spec = FreeProductSpec::from_ranks(&[2, 1]).unwrap();
        let ball = enumerate_ball(&spec, 3, Metric::Word, 100_000).unwrap();
        assert!(ball.windows(2).all(|w| w[0] < w[1]));
        assert!(ball[0].is_identity());
    }

    #[test]
    fn relative_ball() {
        let spec = FreeProductSpec::from_ranks(&[1, 1]).unwrap();
        let ball = enumerate_ball(&spec, 2, Metric::Relative { syllable_l1_max: 1 }, 1000).unwrap();
        // e, 4 one-syllable words, 4·2 two-syllable words
        assert_eq!(ball.len(), 13);
    }
}
