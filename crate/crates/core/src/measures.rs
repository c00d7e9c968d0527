//! Symmetric lattice measures, their adapted lift to the free product, and convolution powers.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arena::{Arena, NodeId, ROOT};
use crate::error::{Error, Result};
use crate::group::{FreeProductSpec, GroupElement, Syllable};

const MASS_TOL: f64 = 1e-12;

/// Finitely supported probability on `Z^rank`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeMeasure {
    rank: usize,
    atoms: Vec<(Vec<i32>, f64)>,
}

impl LatticeMeasure {
    /// Merges duplicates, drops zero weights and checks the total is 1.
    pub fn new(rank: usize, atoms: Vec<(Vec<i32>, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<Vec<i32>, f64> = BTreeMap::new();
        for (v, w) in atoms {
            if v.len() != rank {
                return Err(Error::InvalidInput(format!("atom {v:?} does not live in Z^{rank}")));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidInput(format!("atom {v:?} has invalid weight {w}")));
            }
            if w > 0.0 {
                *merged.entry(v).or_insert(0.0) += w;
            }
        }
        let total: f64 = merged.values().sum();
        if merged.is_empty() || (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidInput(format!("lattice measure has total mass {total}, expected 1")));
        }
        let m = Self { rank, atoms: merged.into_iter().collect() };
        if !m.is_symmetric() {
            return Err(Error::InvalidInput("lattice measure is not symmetric".into()));
        }
        if !spans_lattice(rank, m.atoms.iter().map(|(v, _)| v.as_slice())) {
            return Err(Error::InvalidInput(format!("support does not generate Z^{rank}")));
        }
        Ok(m)
    }

    /// Like [`new`](Self::new) but rescales positive weights to total 1.
    pub fn from_weights(rank: usize, atoms: Vec<(Vec<i32>, f64)>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|(_, w)| *w).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidInput("lattice measure weights sum to zero".into()));
        }
        Self::new(rank, atoms.into_iter().map(|(v, w)| (v, w / total)).collect())
    }

    /// Simple random walk: uniform on `±e_j`.
    pub fn srw(rank: usize) -> Self {
        let w = 1.0 / (2 * rank) as f64;
        let mut atoms = Vec::new();
        for j in 0..rank {
            for s in [1, -1] {
                let mut v = vec![0; rank];
                v[j] = s;
                atoms.push((v, w));
            }
        }
        Self::new(rank, atoms).expect("srw is valid")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn atoms(&self) -> &[(Vec<i32>, f64)] {
        &self.atoms
    }

    pub fn mass_at_zero(&self) -> f64 {
        self.atoms.iter().find(|(v, _)| v.iter().all(|&c| c == 0)).map_or(0.0, |(_, w)| *w)
    }

    fn is_symmetric(&self) -> bool {
        let map: BTreeMap<&Vec<i32>, f64> = self.atoms.iter().map(|(v, w)| (v, *w)).collect();
        self.atoms.iter().all(|(v, w)| {
            let neg: Vec<i32> = v.iter().map(|c| -c).collect();
            map.get(&neg).is_some_and(|u| (u - w).abs() <= 1e-15 * w.max(1.0))
        })
    }

    /// `μ̂(k) = Σ μ(v) cos(k·v)`.
    pub fn char_function(&self, k: &[f64]) -> f64 {
        assert_eq!(k.len(), self.rank);
        self.atoms
            .iter()
            .map(|(v, w)| w * v.iter().zip(k).map(|(&a, &b)| a as f64 * b).sum::<f64>().cos())
            .sum()
    }

    /// Covariance matrix `Σ μ(v) v vᵀ` (row-major).
    pub fn covariance(&self) -> Vec<f64> {
        let d = self.rank;
        let mut c = vec![0.0; d * d];
        for (v, w) in &self.atoms {
            for a in 0..d {
                for b in 0..d {
                    c[a * d + b] += w * v[a] as f64 * v[b] as f64;
                }
            }
        }
        c
    }

    /// True when every nonzero atom moves along a single axis.
    pub fn is_axis_separable(&self) -> bool {
        self.atoms.iter().all(|(v, _)| v.iter().filter(|&&c| c != 0).count() <= 1)
    }

    /// Exists a parity character taking the value 1 on every atom.
    pub fn is_bipartite(&self) -> bool {
        bipartite_character(&[self.atoms.iter().map(|(v, _)| v.clone()).collect()])
    }
}

/// Whether the integer span of `vectors` is all of `Z^d`.
pub fn spans_lattice<'a>(d: usize, vectors: impl Iterator<Item = &'a [i32]>) -> bool {
    let mut rows: Vec<Vec<i64>> = vectors.map(|v| v.iter().map(|&c| c as i64).collect()).collect();
    for col in 0..d {
        loop {
            let mut nz: Vec<usize> = (col..rows.len()).filter(|&r| rows[r][col] != 0).collect();
            if nz.is_empty() {
                return false;
            }
            nz.sort_by_key(|&r| rows[r][col].abs());
            let p = nz[0];
            if nz.len() == 1 {
                rows.swap(col, p);
                break;
            }
            let pivot = rows[p].clone();
            for &r in &nz[1..] {
                let q = rows[r][col] / pivot[col];
                for (x, y) in rows[r].iter_mut().zip(&pivot) {
                    *x -= q * y;
                }
            }
        }
        // triangular basis: the index of the span is the product of pivots
        if rows[col][col].abs() != 1 {
            return false;
        }
    }
    true
}

/// Brute-force search for per-factor parity vectors `c_f` with `c_f·v` odd on every atom.
fn bipartite_character(per_factor: &[Vec<Vec<i32>>]) -> bool {
    let dims: Vec<usize> = per_factor.iter().map(|atoms| atoms.first().map_or(0, |v| v.len())).collect();
    per_factor.iter().zip(&dims).all(|(atoms, &d)| {
        (0u32..(1 << d)).any(|mask| {
            atoms.iter().all(|v| {
                let dot: i64 = v.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &c)| c as i64).sum();
                dot.rem_euclid(2) == 1
            })
        })
    })
}

/// `μ = Σ α_i μ_i` with every `α_i > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptedMeasure {
    weights: Vec<f64>,
    factors: Vec<LatticeMeasure>,
}

impl AdaptedMeasure {
    pub fn new(spec: &FreeProductSpec, weights: Vec<f64>, factors: Vec<LatticeMeasure>) -> Result<Self> {
        if weights.len() != spec.num_factors() || factors.len() != spec.num_factors() {
            return Err(Error::InvalidInput("need one weight and one measure per factor".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::InvalidInput(format!("adapted weights must be positive, found {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidInput(format!("adapted weights sum to {total}, expected 1")));
        }
        for (f, m) in factors.iter().enumerate() {
            if m.rank() != spec.rank(f) {
                return Err(Error::InvalidInput(format!(
                    "measure for factor f{} has rank {} but the factor has rank {}",
                    f + 1,
                    m.rank(),
                    spec.rank(f)
                )));
            }
        }
        Ok(Self { weights, factors })
    }

    /// Simple random walks on every factor.
    pub fn srw(spec: &FreeProductSpec, weights: Vec<f64>) -> Result<Self> {
        let factors = (0..spec.num_factors()).map(|f| LatticeMeasure::srw(spec.rank(f))).collect();
        Self::new(spec, weights, factors)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn factor(&self, f: usize) -> &LatticeMeasure {
        &self.factors[f]
    }

    pub fn factors(&self) -> &[LatticeMeasure] {
        &self.factors
    }

    pub fn lift(&self) -> ProductMeasure {
        let mut atoms = BTreeMap::new();
        for (f, (a, m)) in self.weights.iter().zip(&self.factors).enumerate() {
            for (v, w) in m.atoms() {
                *atoms.entry(GroupElement::syllable(f, v.clone())).or_insert(0.0) += a * w;
            }
        }
        ProductMeasure { atoms }
    }
}

/// Finitely supported probability on the free product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductMeasure {
    atoms: BTreeMap<GroupElement, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Check {
    Yes,
    No,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub probability: bool,
    pub total_mass: f64,
    pub symmetric: bool,
    pub admissible: Check,
    pub aperiodic: Check,
    /// Start of the window of positive return probabilities, when found.
    pub n0: Option<usize>,
    pub notes: Vec<String>,
}

impl ProductMeasure {
    pub fn new(atoms: BTreeMap<GroupElement, f64>) -> Result<Self> {
        if atoms.values().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput("negative or non-finite atom".into()));
        }
        Ok(Self { atoms: atoms.into_iter().filter(|(_, w)| *w > 0.0).collect() })
    }

    pub fn dirac(g: GroupElement) -> Self {
        Self { atoms: BTreeMap::from([(g, 1.0)]) }
    }

    pub fn atoms(&self) -> &BTreeMap<GroupElement, f64> {
        &self.atoms
    }

    pub fn mass(&self, g: &GroupElement) -> f64 {
        self.atoms.get(g).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.values().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.atoms
            .iter()
            .all(|(g, w)| (self.mass(&g.inverse()) - w).abs() <= 1e-15 * w.max(1.0))
    }

    /// `ε δ_e + (1−ε) μ`.
    pub fn lazy(&self, eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::InvalidInput(format!("laziness must lie in [0,1), got {eps}")));
        }
        let mut atoms: BTreeMap<_, _> = self.atoms.iter().map(|(g, w)| (g.clone(), (1.0 - eps) * w)).collect();
        *atoms.entry(GroupElement::identity()).or_insert(0.0) += eps;
        Ok(Self { atoms })
    }

    /// `(μ*ν)(g) = Σ_h μ(h) ν(h^{-1}g)`; fails once the support would exceed `cap`.
    pub fn convolve(&self, other: &Self, cap: usize) -> Result<Self> {
        let mut out: BTreeMap<GroupElement, f64> = BTreeMap::new();
        let mut placed = 0.0;
        for (h, a) in &self.atoms {
            for (k, b) in &other.atoms {
                let g = h.multiply(k);
                if !out.contains_key(&g) && out.len() >= cap {
                    return Err(Error::BudgetExceeded(format!(
                        "convolution support exceeds {cap} atoms; mass deficit at least {:.3e}",
                        self.total_mass() * other.total_mass() - placed
                    )));
                }
                *out.entry(g).or_insert(0.0) += a * b;
                placed += a * b;
            }
        }
        Ok(Self { atoms: out })
    }

    pub fn validate(&self, spec: &FreeProductSpec) -> ValidationReport {
        let total_mass = self.total_mass();
        let mut notes = Vec::new();
        let symmetric = self.is_symmetric();
        let admissible = self.admissibility(spec, &mut notes);
        let (aperiodic, n0) = self.aperiodicity(spec, &mut notes);
        ValidationReport {
            probability: (total_mass - 1.0).abs() <= MASS_TOL,
            total_mass,
            symmetric,
            admissible,
            aperiodic,
            n0,
            notes,
        }
    }

    /// One-syllable atoms grouped by factor; `None` if some atom has two or more syllables.
    fn per_factor_vectors(&self, spec: &FreeProductSpec) -> Option<Vec<Vec<Vec<i32>>>> {
        let mut out = vec![Vec::new(); spec.num_factors()];
        for g in self.atoms.keys() {
            match g.syllables() {
                [] => {}
                [s] => out.get_mut(s.factor)?.push(s.vector.clone()),
                _ => return None,
            }
        }
        Some(out)
    }

    fn admissibility(&self, spec: &FreeProductSpec, notes: &mut Vec<String>) -> Check {
        if self.is_symmetric() {
            if let Some(per) = self.per_factor_vectors(spec) {
                let ok = per.iter().enumerate().all(|(f, vs)| spans_lattice(spec.rank(f), vs.iter().map(|v| v.as_slice())));
                return if ok { Check::Yes } else { Check::No };
            }
        }
        // Semigroup closure: every generator must appear in supp μ^{*n} for some n ≤ 6.
        let mut missing: Vec<GroupElement> = spec.generators();
        let support: Vec<&GroupElement> = self.atoms.keys().collect();
        let mut frontier: std::collections::BTreeSet<GroupElement> = support.iter().map(|g| (*g).clone()).collect();
        for _ in 0..6 {
            missing.retain(|g| !frontier.contains(g));
            if missing.is_empty() {
                return Check::Yes;
            }
            let mut next = std::collections::BTreeSet::new();
            for g in &frontier {
                for s in &support {
                    next.insert(g.multiply(s));
                }
            }
            if next.len() > 2_000_000 {
                notes.push("admissibility search exceeded its support budget".into());
                return Check::Inconclusive;
            }
            frontier = next;
        }
        missing.retain(|g| !frontier.contains(g));
        if missing.is_empty() {
            Check::Yes
        } else if self.atoms.keys().all(|g| g.is_identity()) {
            Check::No
        } else {
            notes.push(format!("generators not reached within 6 steps, e.g. {}", missing[0]));
            Check::Inconclusive
        }
    }

    fn aperiodicity(&self, spec: &FreeProductSpec, notes: &mut Vec<String>) -> (Check, Option<usize>) {
        if self.mass(&GroupElement::identity()) > 0.0 {
            return (Check::Yes, Some(0));
        }
        if let Some(per) = self.per_factor_vectors(spec) {
            let used: Vec<Vec<Vec<i32>>> = per.into_iter().filter(|v| !v.is_empty()).collect();
            if used.iter().map(|v| v[0].len()).sum::<usize>() <= 20 && bipartite_character(&used) {
                notes.push("parity character is odd on every atom: period 2".into());
                return (Check::No, None);
            }
        }
        const WINDOW: usize = 3;
        const N_CAP: usize = 16;
        let mut table = ConvolutionTable::new(self.clone(), 2_000_000);
        let mut run = 0;
        for n in 1..=N_CAP {
            if table.extend_to(n).is_err() {
                notes.push(format!("aperiodicity search stopped at n={n} by the support budget"));
                return (Check::Inconclusive, None);
            }
            if table.power_at(n, &GroupElement::identity()) > 0.0 {
                run += 1;
                if run > WINDOW {
                    return (Check::Yes, Some(n - WINDOW));
                }
            } else {
                run = 0;
            }
        }
        notes.push(format!("no window of {} consecutive returns found up to n={N_CAP}", WINDOW + 1));
        (Check::Inconclusive, None)
    }
}

/// Cached `μ^{*n}` for `n = 0..=N`, stored densely over an interned element arena.
#[derive(Clone, Debug)]
pub struct ConvolutionTable {
    base: ProductMeasure,
    steps: Vec<(Vec<Syllable>, f64)>,
    arena: Arena,
    powers: Vec<Vec<f64>>,
    cap: usize,
}

impl ConvolutionTable {
    /// `cap` bounds the number of distinct elements over all powers.
    pub fn new(base: ProductMeasure, cap: usize) -> Self {
        let steps = base.atoms.iter().map(|(g, w)| (g.syllables().to_vec(), *w)).collect();
        Self { base, steps, arena: Arena::new(), powers: vec![vec![1.0]], cap }
    }

    pub fn base(&self) -> &ProductMeasure {
        &self.base
    }

    pub fn max_n(&self) -> usize {
        self.powers.len() - 1
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn power(&self, n: usize) -> &[f64] {
        &self.powers[n]
    }

    pub fn extend_to(&mut self, n_max: usize) -> Result<()> {
        while self.max_n() < n_max {
            let prev = self.powers.last().unwrap();
            let mut next = vec![0.0; self.arena.len()];
            let mut placed = 0.0;
            for (z, &p) in prev.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (word, w) in &self.steps {
                    let mut id = z as NodeId;
                    for s in word {
                        id = self.arena.mul_syllable(id, s.factor, &s.vector);
                    }
                    if self.arena.len() > self.cap {
                        return Err(Error::BudgetExceeded(format!(
                            "convolution power {} needs more than {} elements; mass deficit {:.3e}",
                            self.max_n() + 1,
                            self.cap,
                            1.0 - placed
                        )));
                    }
                    let id = id as usize;
                    if id >= next.len() {
                        next.resize(self.arena.len(), 0.0);
                    }
                    next[id] += p * w;
                    placed += p * w;
                }
            }
            self.powers.push(next);
        }
        Ok(())
    }

    /// `μ^{*n}(g)`.
    pub fn power_at(&self, n: usize, g: &GroupElement) -> f64 {
        match self.arena.find(g) {
            Some(id) => self.powers[n].get(id as usize).copied().unwrap_or(0.0),
            None => 0.0,
        }
    }

    /// `P^n(x,y) = μ^{*n}(x^{-1}y)`.
    pub fn transition(&self, x: &GroupElement, y: &GroupElement, n: usize) -> Result<f64> {
        if n > self.max_n() {
            return Err(Error::BudgetExceeded(format!("P^{n} requested but the table stops at {}", self.max_n())));
        }
        Ok(self.power_at(n, &x.left_divide(y)))
    }

    pub fn mass(&self, n: usize) -> f64 {
        self.powers[n].iter().sum()
    }

    /// Raw parts for serialisation.
    pub fn into_parts(self) -> (ProductMeasure, Arena, Vec<Vec<f64>>, usize) {
        (self.base, self.arena, self.powers, self.cap)
    }

    pub fn from_parts(base: ProductMeasure, arena: Arena, powers: Vec<Vec<f64>>, cap: usize) -> Result<Self> {
        if powers.is_empty() || powers[0] != [1.0] || powers.iter().any(|p| p.len() > arena.len()) {
            return Err(Error::InvalidInput("inconsistent convolution table parts".into()));
        }
        let steps = base.atoms.iter().map(|(g, w)| (g.syllables().to_vec(), *w)).collect();
        Ok(Self { base, steps, arena, powers, cap })
    }

    /// `P^n(e,e)` for `n ≤ 2N`; for symmetric `μ` this is `Σ_z μ^{a}(z) μ^{b}(z)`.
    pub fn returns_extended(&self, n: usize) -> Result<f64> {
        let top = self.max_n();
        if n <= top {
            return Ok(self.powers[n][0]);
        }
        if !self.base.is_symmetric() {
            return self.return_extended(&GroupElement::identity(), n);
        }
        if n > 2 * top {
            return Err(Error::BudgetExceeded(format!("P^{n} needs a table of depth {}", n.div_ceil(2))));
        }
        let (a, b) = (&self.powers[n - top], &self.powers[top]);
        Ok(a.iter().zip(b).map(|(x, y)| x * y).sum())
    }

    /// `P^n(e,y)` for `n = 0..=n_max ≤ 2N` in one pass over the stored elements.
    pub fn series_extended(&self, y: &GroupElement, n_max: usize) -> Result<Vec<f64>> {
        let top = self.max_n();
        if n_max > 2 * top {
            return Err(Error::BudgetExceeded(format!("P^{n_max} needs a table of depth {}", n_max.div_ceil(2))));
        }
        let mut out: Vec<f64> = (0..=n_max.min(top)).map(|n| self.power_at(n, y)).collect();
        if n_max <= top {
            return Ok(out);
        }
        if !self.base.is_symmetric() {
            out.extend((top + 1..=n_max).map(|n| self.return_extended(y, n)).collect::<Result<Vec<_>>>()?);
            return Ok(out);
        }
        let extra = n_max - top;
        let mut acc = vec![0.0; extra];
        let last = &self.powers[top];
        // μ^{top}(z^{-1}y) = μ^{top}(y^{-1}z) for symmetric μ
        let shifted = self.arena.left_translates(&y.inverse());
        for id in 0..self.powers[extra].len() {
            let tail = match shifted[id] {
                Some(j) => last.get(j as usize).copied().unwrap_or(0.0),
                None => 0.0,
            };
            if tail == 0.0 {
                continue;
            }
            for (a, slot) in acc.iter_mut().enumerate() {
                if let Some(&p) = self.powers[a + 1].get(id) {
                    *slot += p * tail;
                }
            }
        }
        out.extend(acc);
        Ok(out)
    }

    /// `P^n(e,y)` for `n ≤ 2N` by splitting paths at time `⌈n/2⌉`: `Σ_z μ^{a}(z) μ^{b}(z^{-1}y)`.
    pub fn return_extended(&self, y: &GroupElement, n: usize) -> Result<f64> {
        let top = self.max_n();
        if n <= top {
            return Ok(self.power_at(n, y));
        }
        if n > 2 * top {
            return Err(Error::BudgetExceeded(format!("P^{n} needs a table of depth {}", n.div_ceil(2))));
        }
        let a = n - top;
        let b = top;
        let mut acc = 0.0;
        for (id, &p) in self.powers[a].iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let z = self.arena.element(id as NodeId);
            acc += p * self.power_at(b, &z.left_divide(y));
        }
        Ok(acc)
    }
}

/// Exact rational arithmetic for oracle checks on short walks.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMeasure {
    atoms: BTreeMap<GroupElement, Ratio<i128>>,
}

impl ExactMeasure {
    /// Atoms with integer weights, normalised by their total.
    pub fn from_integer_weights(atoms: Vec<(GroupElement, i64)>) -> Self {
        let total: i128 = atoms.iter().map(|(_, w)| *w as i128).sum();
        let mut map = BTreeMap::new();
        for (g, w) in atoms {
            *map.entry(g).or_insert(Ratio::from_integer(0)) += Ratio::new(w as i128, total);
        }
        Self { atoms: map }
    }

    pub fn identity() -> Self {
        Self { atoms: BTreeMap::from([(GroupElement::identity(), Ratio::from_integer(1))]) }
    }

    pub fn mass(&self, g: &GroupElement) -> Ratio<i128> {
        self.atoms.get(g).copied().unwrap_or_else(|| Ratio::from_integer(0))
    }

    pub fn convolve(&self, other: &Self) -> Self {
        let mut out: BTreeMap<GroupElement, Ratio<i128>> = BTreeMap::new();
        for (h, a) in &self.atoms {
            for (k, b) in &other.atoms {
                *out.entry(h.multiply(k)).or_insert(Ratio::from_integer(0)) += a * b;
            }
        }
        out.retain(|_, w| *w != Ratio::from_integer(0));
        Self { atoms: out }
    }

    pub fn to_f64(&self) -> ProductMeasure {
        ProductMeasure {
            atoms: self.atoms.iter().map(|(g, w)| (g.clone(), *w.numer() as f64 / *w.denom() as f64)).collect(),
        }
    }
}

/// `ROOT` is the identity node of every table.
pub const IDENTITY_NODE: NodeId = ROOT;
