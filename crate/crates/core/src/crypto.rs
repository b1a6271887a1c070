//! Hash commitments, seed expansion and masked integer tuples.
//!
//! A commitment to `message` under slot tag `T` with opening `o` is
//! `SHA3-256(T || o || message)`. The mask for seed `s` is the first `4n`
//! bytes of `SHAKE-256(s)` read as little-endian u32 words.

use std::fmt;

use rand::{CryptoRng, RngCore};
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::{Digest, Sha3_256, Shake256};
use subtle::ConstantTimeEq;
use thiserror::Error;

use crate::codec::{put_u32, DecodeError, Reader};
use crate::perm::{PermError, Permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("tuple length mismatch: {0} vs {1}")]
pub struct LengthMismatch(pub usize, pub usize);

/// Domain-separation tag for each of the three commitment slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    C1,
    C2,
    C3,
}

impl Slot {
    pub fn tag(self) -> &'static [u8] {
        match self {
            Slot::C1 => b"C1",
            Slot::C2 => b"C2",
            Slot::C3 => b"C3",
        }
    }
}

macro_rules! bytes32 {
    ($name:ident) => {
        #[derive(Clone, Copy, PartialEq, Eq, Hash)]
        pub struct $name(pub [u8; 32]);

        impl $name {
            pub fn as_bytes(&self) -> &[u8; 32] {
                &self.0
            }

            pub fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
                Ok($name(r.array()?))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "("))?;
                for b in &self.0[..6] {
                    write!(f, "{b:02x}")?;
                }
                write!(f, "..)")
            }
        }
    };
}

bytes32!(Commitment);
bytes32!(Opening);
bytes32!(Seed);

impl Opening {
    pub fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        let mut o = [0u8; 32];
        rng.fill_bytes(&mut o);
        Opening(o)
    }
}

impl Seed {
    pub fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        let mut s = [0u8; 32];
        rng.fill_bytes(&mut s);
        Seed(s)
    }
}

fn commitment_digest(message: &[u8], slot: Slot, opening: &Opening) -> [u8; 32] {
    let mut h = Sha3_256::new();
    Digest::update(&mut h, slot.tag());
    Digest::update(&mut h, opening.0);
    Digest::update(&mut h, message);
    h.finalize().into()
}

/// Commits to `message` in `slot` with fresh 256-bit randomness.
pub fn commit<R: RngCore + CryptoRng + ?Sized>(
    message: &[u8],
    slot: Slot,
    rng: &mut R,
) -> (Commitment, Opening) {
    let opening = Opening::random(rng);
    (commit_with(message, slot, &opening), opening)
}

pub fn commit_with(message: &[u8], slot: Slot, opening: &Opening) -> Commitment {
    Commitment(commitment_digest(message, slot, opening))
}

pub fn verify_commitment(c: &Commitment, message: &[u8], slot: Slot, opening: &Opening) -> bool {
    let expected = commitment_digest(message, slot, opening);
    expected.ct_eq(&c.0).into()
}

/// A length-`n` tuple of u32 residues with arithmetic modulo 2^32.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntTuple(Vec<u32>);

impl IntTuple {
    pub fn new(entries: Vec<u32>) -> Self {
        IntTuple(entries)
    }

    pub fn zero(n: usize) -> Self {
        IntTuple(vec![0; n])
    }

    /// The one-line notation of `p` as a tuple.
    pub fn from_permutation(p: &Permutation) -> Self {
        IntTuple(p.images().to_vec())
    }

    /// Reads the tuple back as one-line notation; fails unless it is a
    /// bijection on `0..len`.
    pub fn to_permutation(&self) -> Result<Permutation, PermError> {
        Permutation::from_images(self.0.clone())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn entries_mut(&mut self) -> &mut [u32] {
        &mut self.0
    }

    pub fn add(&self, other: &IntTuple) -> Result<IntTuple, LengthMismatch> {
        self.zip_with(other, u32::wrapping_add)
    }

    pub fn sub(&self, other: &IntTuple) -> Result<IntTuple, LengthMismatch> {
        self.zip_with(other, u32::wrapping_sub)
    }

    fn zip_with(
        &self,
        other: &IntTuple,
        f: impl Fn(u32, u32) -> u32,
    ) -> Result<IntTuple, LengthMismatch> {
        if self.len() != other.len() {
            return Err(LengthMismatch(self.len(), other.len()));
        }
        Ok(IntTuple(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn nonzero_count(&self) -> usize {
        self.0.iter().filter(|&&x| x != 0).count()
    }

    /// Length (u32 LE) then each entry (u32 LE).
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        put_u32(out, self.0.len() as u32);
        for &x in &self.0 {
            put_u32(out, x);
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 4 * self.0.len());
        self.encode_into(&mut out);
        out
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let n = r.count(4)?;
        let entries = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
        Ok(IntTuple(entries))
    }
}

impl fmt::Debug for IntTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntTuple{:?}", self.0)
    }
}

/// `R = vec_n(CSPRNG(s))`: SHAKE-256 keyed by the seed, `4n` bytes read as
/// little-endian u32 words.
pub fn expand_mask(seed: &Seed, n: usize) -> IntTuple {
    let mut xof = Shake256::default();
    xof.update(&seed.0);
    let mut reader = xof.finalize_xof();
    let mut bytes = vec![0u8; 4 * n];
    reader.read(&mut bytes);
    IntTuple(
        bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().expect("4-byte chunk")))
            .collect(),
    )
}
