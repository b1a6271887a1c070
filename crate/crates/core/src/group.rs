//! Permutation groups given by generators: a deterministic Schreier–Sims
//! stabilizer chain supporting membership, order, uniform sampling and
//! enumeration.

use std::collections::HashSet;

use num_bigint::BigUint;
use rand::Rng;
use thiserror::Error;

use crate::codec::{put_u32, DecodeError, Reader};
use crate::perm::{PermError, Permutation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("generator list is empty")]
    NoGenerators,
    #[error("group of order {order} exceeds the enumeration limit {limit}")]
    Capacity { order: BigUint, limit: usize },
}

/// Generators `h_1, .., h_m` of a subgroup of `S_n`.
///
/// Duplicates are dropped and the identity is ignored; the list given to
/// [`GeneratorSet::new`] must nevertheless be nonempty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    n: usize,
    gens: Vec<Permutation>,
}

impl GeneratorSet {
    pub fn new(n: usize, gens: Vec<Permutation>) -> Result<Self, GroupError> {
        if gens.is_empty() {
            return Err(GroupError::NoGenerators);
        }
        if n == 0 {
            return Err(PermError::Empty.into());
        }
        let mut seen = HashSet::new();
        let mut kept = Vec::with_capacity(gens.len());
        for g in gens {
            if g.degree() != n {
                return Err(PermError::DegreeMismatch(n, g.degree()).into());
            }
            if !g.is_identity() && seen.insert(g.clone()) {
                kept.push(g);
            }
        }
        Ok(GeneratorSet { n, gens: kept })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// The non-identity generators, deduplicated, in input order.
    pub fn gens(&self) -> &[Permutation] {
        &self.gens
    }

    /// Generator count (u32 LE) followed by each permutation's encoding.
    /// A set made only of identities is written as a single identity.
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        if self.gens.is_empty() {
            put_u32(out, 1);
            Permutation::identity(self.n).encode_into(out);
            return;
        }
        put_u32(out, self.gens.len() as u32);
        for g in &self.gens {
            g.encode_into(out);
        }
    }

    pub fn decode(n: usize, r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let count = r.count(4)?;
        let gens = (0..count)
            .map(|_| Permutation::decode(r))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n, gens).map_err(|e| DecodeError::Invalid(e.to_string()))
    }
}

#[derive(Debug, Clone)]
struct Level {
    base_point: usize,
    gens: Vec<Permutation>,
    /// `reps[x]` maps the base point to `x`, for every `x` in the orbit.
    reps: Vec<Option<Permutation>>,
    inv_reps: Vec<Option<Permutation>>,
    orbit: Vec<usize>,
    /// Schreier generators `(orbit point, generator index)` already sifted.
    checked: HashSet<(usize, usize)>,
}

impl Level {
    fn new(n: usize, base_point: usize) -> Self {
        let mut reps = vec![None; n];
        let mut inv_reps = vec![None; n];
        reps[base_point] = Some(Permutation::identity(n));
        inv_reps[base_point] = Some(Permutation::identity(n));
        Level {
            base_point,
            gens: Vec::new(),
            reps,
            inv_reps,
            orbit: vec![base_point],
            checked: HashSet::new(),
        }
    }

    /// Adds a generator and extends the orbit. Existing representatives are
    /// kept, so previously checked Schreier generators stay valid.
    fn add_gen(&mut self, g: Permutation) {
        self.gens.push(g);
        let mut frontier = self.orbit.clone();
        while let Some(x) = frontier.pop() {
            for s in &self.gens {
                let y = s.apply(x);
                if self.reps[y].is_none() {
                    let rep = s.compose_unchecked(self.reps[x].as_ref().expect("orbit point"));
                    self.inv_reps[y] = Some(rep.inverse());
                    self.reps[y] = Some(rep);
                    self.orbit.push(y);
                    frontier.push(y);
                }
            }
        }
    }
}

/// Base and strong generating set of `H = <h_1, .., h_m>`.
#[derive(Debug, Clone)]
pub struct Bsgs {
    n: usize,
    levels: Vec<Level>,
}

impl Bsgs {
    /// Runs deterministic Schreier–Sims. Every Schreier generator of every
    /// level is sifted, so the resulting chain is exact.
    pub fn new(gens: &GeneratorSet) -> Self {
        let n = gens.degree();
        let mut bsgs = Bsgs {
            n,
            levels: Vec::new(),
        };
        for g in gens.gens() {
            if bsgs
                .levels
                .iter()
                .all(|l| g.apply(l.base_point) == l.base_point)
            {
                let point = g.first_moved_point().expect("identity was filtered");
                bsgs.levels.push(Level::new(n, point));
            }
            for level in bsgs.levels.iter_mut() {
                level.add_gen(g.clone());
                if g.apply(level.base_point) != level.base_point {
                    break;
                }
            }
        }
        bsgs.complete();
        bsgs
    }

    fn complete(&mut self) {
        let mut i = self.levels.len();
        while i > 0 {
            let level = i - 1;
            match self.find_unsifted(level) {
                Some((residue, stop)) => {
                    if stop == self.levels.len() {
                        let point = residue.first_moved_point().expect("nontrivial residue");
                        self.levels.push(Level::new(self.n, point));
                    }
                    for l in level + 1..=stop {
                        self.levels[l].add_gen(residue.clone());
                    }
                    i = stop + 1;
                }
                None => i -= 1,
            }
        }
    }

    /// Looks for a Schreier generator of `level` that fails to sift through
    /// the deeper levels. Returns the residue and the level where it stopped.
    fn find_unsifted(&mut self, level: usize) -> Option<(Permutation, usize)> {
        let mut idx = 0;
        while idx < self.levels[level].orbit.len() {
            let x = self.levels[level].orbit[idx];
            idx += 1;
            for s_idx in 0..self.levels[level].gens.len() {
                if !self.levels[level].checked.insert((x, s_idx)) {
                    continue;
                }
                let lv = &self.levels[level];
                let s = &lv.gens[s_idx];
                let y = s.apply(x);
                let schreier = lv.inv_reps[y]
                    .as_ref()
                    .expect("orbit is closed")
                    .compose_unchecked(
                        &s.compose_unchecked(lv.reps[x].as_ref().expect("orbit point")),
                    );
                let (residue, stop) = self.sift(schreier, level + 1);
                if stop < self.levels.len() || !residue.is_identity() {
                    return Some((residue, stop));
                }
            }
        }
        None
    }

    /// Strips `g` through levels `from..`. Returns the residue and the index
    /// of the first level whose orbit does not contain the image of its base
    /// point (`levels.len()` if every level was passed).
    fn sift(&self, mut g: Permutation, from: usize) -> (Permutation, usize) {
        for (l, level) in self.levels.iter().enumerate().skip(from) {
            let x = g.apply(level.base_point);
            match &level.inv_reps[x] {
                Some(inv) => g = inv.compose_unchecked(&g),
                None => return (g, l),
            }
        }
        (g, self.levels.len())
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base_point).collect()
    }

    /// Union of the strong generators over all levels, deduplicated.
    pub fn strong_gens(&self) -> Vec<Permutation> {
        let mut seen = HashSet::new();
        self.levels
            .iter()
            .flat_map(|l| l.gens.iter())
            .filter(|g| seen.insert((*g).clone()))
            .cloned()
            .collect()
    }

    pub fn transversal_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    pub fn contains(&self, p: &Permutation) -> Result<bool, GroupError> {
        if p.degree() != self.n {
            return Err(PermError::DegreeMismatch(self.n, p.degree()).into());
        }
        let (residue, stop) = self.sift(p.clone(), 0);
        Ok(stop == self.levels.len() && residue.is_identity())
    }

    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::from(1u32), |acc, l| {
            acc * BigUint::from(l.orbit.len())
        })
    }

    /// `Some(|H|)` if the order is at most `limit`.
    pub fn order_at_most(&self, limit: usize) -> Option<usize> {
        let mut acc = 1usize;
        for l in &self.levels {
            acc = acc.checked_mul(l.orbit.len()).filter(|&v| v <= limit)?;
        }
        Some(acc)
    }

    /// Exactly uniform element of `H`: one uniform coset representative per
    /// level, multiplied together.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        let mut acc = Permutation::identity(self.n);
        for level in &self.levels {
            let x = level.orbit[rng.gen_range(0..level.orbit.len())];
            acc = acc.compose_unchecked(level.reps[x].as_ref().expect("orbit point"));
        }
        acc
    }

    /// Every element of `H` exactly once, in a fixed order.
    pub fn enumerate(&self, limit: usize) -> Result<Vec<Permutation>, GroupError> {
        let order = self
            .order_at_most(limit)
            .ok_or_else(|| GroupError::Capacity {
                order: self.order(),
                limit,
            })?;
        let mut out = Vec::with_capacity(order);
        out.push(Permutation::identity(self.n));
        // Elements are r_0 ∘ r_1 ∘ .. ∘ r_{k-1}; extend from the deepest level up.
        for level in self.levels.iter().rev() {
            let mut next = Vec::with_capacity(out.len() * level.orbit.len());
            for &x in &level.orbit {
                let rep = level.reps[x].as_ref().expect("orbit point");
                next.extend(out.iter().map(|tail| rep.compose_unchecked(tail)));
            }
            out = next;
        }
        Ok(out)
    }
}
