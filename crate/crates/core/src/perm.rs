//! Permutations of `{0, .., n-1}` in one-line notation and the Hamming metric.
//!
//! Points are zero-indexed; a permutation `p` is stored as the tuple of its
//! images `(p(0), .., p(n-1))`. Composition follows function notation:
//! `a.compose(&b)` is the map `i -> a(b(i))`, so `b` acts first.

use std::fmt;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use thiserror::Error;

use crate::codec::{put_u32, DecodeError, Reader};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("a permutation needs at least one point")]
    Empty,
    #[error("image list is not a bijection on 0..{0}")]
    NotBijection(usize),
    #[error("cannot move exactly {moved} of {n} points")]
    BadSupport { n: usize, moved: usize },
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "degree must be positive");
        Permutation {
            images: (0..n as u32).collect(),
        }
    }

    /// Builds a permutation from its one-line notation, checking bijectivity.
    pub fn from_images(images: Vec<u32>) -> Result<Self, PermError> {
        let n = images.len();
        if n == 0 {
            return Err(PermError::Empty);
        }
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(PermError::NotBijection(n));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    /// Uniformly random element of the symmetric group.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut p = Self::identity(n);
        p.images.shuffle(rng);
        p
    }

    /// A random permutation moving exactly `moved` points: a uniform
    /// `moved`-subset carrying a uniform derangement of itself.
    pub fn random_support<R: Rng + ?Sized>(
        n: usize,
        moved: usize,
        rng: &mut R,
    ) -> Result<Self, PermError> {
        if n == 0 {
            return Err(PermError::Empty);
        }
        if moved == 1 || moved > n {
            return Err(PermError::BadSupport { n, moved });
        }
        let mut p = Self::identity(n);
        if moved == 0 {
            return Ok(p);
        }
        let support: Vec<u32> = index::sample(rng, n, moved)
            .into_iter()
            .map(|i| i as u32)
            .collect();
        // Rejection sampling: a uniform shuffle is a derangement w.p. ~1/e.
        let mut targets = support.clone();
        loop {
            targets.shuffle(rng);
            if support.iter().zip(&targets).all(|(a, b)| a != b) {
                break;
            }
        }
        for (&from, &to) in support.iter().zip(&targets) {
            p.images[from as usize] = to;
        }
        Ok(p)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn into_images(self) -> Vec<u32> {
        self.images
    }

    #[inline]
    pub fn apply(&self, point: usize) -> usize {
        self.images[point] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// Number of points moved.
    pub fn support_size(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|&(i, &x)| i as u32 != x)
            .count()
    }

    pub fn first_moved_point(&self) -> Option<usize> {
        self.images
            .iter()
            .enumerate()
            .find(|&(i, &x)| i as u32 != x)
            .map(|(i, _)| i)
    }

    /// `self ∘ other`, i.e. `i -> self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, PermError> {
        self.check_degree(other)?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation {
            images: other
                .images
                .iter()
                .map(|&x| self.images[x as usize])
                .collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Permutation { images: inv }
    }

    /// Hamming distance: the number of positions where the one-line
    /// notations differ. Never equal to 1.
    pub fn hamming(&self, other: &Permutation) -> Result<usize, PermError> {
        self.check_degree(other)?;
        Ok(self
            .images
            .iter()
            .zip(&other.images)
            .filter(|(a, b)| a != b)
            .count())
    }

    fn check_degree(&self, other: &Permutation) -> Result<(), PermError> {
        if self.degree() != other.degree() {
            return Err(PermError::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(())
    }

    /// Canonical encoding: `n` then the `n` images, all u32 little-endian.
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        put_u32(out, self.images.len() as u32);
        for &x in &self.images {
            put_u32(out, x);
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 4 * self.images.len());
        self.encode_into(&mut out);
        out
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let n = r.count(4)?;
        let images = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
        Self::from_images(images).map_err(|e| DecodeError::Invalid(e.to_string()))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let p = Self::decode(&mut r)?;
        r.finish()?;
        Ok(p)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.images)
    }
}
