//! Subgroup distance instances, planted key generation and a brute-force
//! distance oracle for small groups.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use sha3::{Digest, Sha3_256};
use thiserror::Error;

use crate::codec::{put_u32, DecodeError, Reader};
use crate::group::{Bsgs, GeneratorSet, GroupError};
use crate::perm::{PermError, Permutation};

pub const INSTANCE_MAGIC: &[u8; 4] = b"SDZ1";
pub const WITNESS_MAGIC: &[u8; 4] = b"SDW1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("distance bound {k} is invalid for degree {n}")]
    BadDistance { n: usize, k: usize },
    #[error("at least one generator is required")]
    NoGenerators,
}

/// How the public generators of `H` are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preset {
    /// Uniformly random elements of `S_n`.
    #[default]
    General,
    /// Commuting involutions: `H` is an elementary abelian 2-group.
    Abelian2,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(Preset::General),
            "abelian2" => Ok(Preset::Abelian2),
            other => Err(format!(
                "unknown preset {other:?} (expected general|abelian2)"
            )),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::General => "general",
            Preset::Abelian2 => "abelian2",
        })
    }
}

/// Public data `(n, k, g, h_1..h_m)`; the statement is `d(g, H) <= k`.
#[derive(Debug, Clone)]
pub struct SdpInstance {
    k: usize,
    g: Permutation,
    gens: GeneratorSet,
    bsgs: Bsgs,
}

/// The secret `h ∈ H` with `d(h, g) <= k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub h: Permutation,
}

impl SdpInstance {
    pub fn new(k: usize, g: Permutation, gens: GeneratorSet) -> Result<Self, InstanceError> {
        let n = g.degree();
        if gens.degree() != n {
            return Err(PermError::DegreeMismatch(n, gens.degree()).into());
        }
        if k > n {
            return Err(InstanceError::BadDistance { n, k });
        }
        let bsgs = Bsgs::new(&gens);
        Ok(SdpInstance { k, g, gens, bsgs })
    }

    pub fn n(&self) -> usize {
        self.g.degree()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn g(&self) -> &Permutation {
        &self.g
    }

    pub fn gens(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn bsgs(&self) -> &Bsgs {
        &self.bsgs
    }

    /// `h ∈ H` and `d(h, g) <= k`.
    pub fn validate_witness(&self, h: &Permutation) -> Result<bool, InstanceError> {
        let dist = h.hamming(&self.g)?;
        Ok(dist <= self.k && self.bsgs.contains(h)?)
    }

    /// Exact `d(g, H)` by enumerating `H`. Ties go to the first element in
    /// enumeration order.
    pub fn brute_force_distance(
        &self,
        limit: usize,
    ) -> Result<(usize, Permutation), InstanceError> {
        let elements = self.bsgs.enumerate(limit)?;
        let mut best: Option<(usize, Permutation)> = None;
        for h in elements {
            let d = h.hamming(&self.g)?;
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, h));
            }
        }
        Ok(best.expect("a group is never empty"))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(INSTANCE_MAGIC);
        put_u32(&mut out, self.n() as u32);
        put_u32(&mut out, self.k as u32);
        self.g.encode_into(&mut out);
        self.gens.encode_into(&mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        r.magic(INSTANCE_MAGIC)?;
        let n = r.u32()? as usize;
        let k = r.u32()? as usize;
        let g = Permutation::decode(&mut r)?;
        if g.degree() != n {
            return Err(DecodeError::Invalid(format!(
                "g has degree {} but header says {n}",
                g.degree()
            )));
        }
        let gens = GeneratorSet::decode(n, &mut r)?;
        r.finish()?;
        Self::new(k, g, gens).map_err(|e| DecodeError::Invalid(e.to_string()))
    }

    /// SHA3-256 of the canonical instance encoding.
    pub fn digest(&self) -> [u8; 32] {
        Sha3_256::digest(self.to_bytes()).into()
    }
}

impl Witness {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(WITNESS_MAGIC);
        self.h.encode_into(&mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        r.magic(WITNESS_MAGIC)?;
        let h = Permutation::decode(&mut r)?;
        r.finish()?;
        Ok(Witness { h })
    }
}

/// Random generators for `H` according to `preset`.
pub fn random_generators<R: Rng + ?Sized>(
    n: usize,
    num_gens: usize,
    preset: Preset,
    rng: &mut R,
) -> Result<GeneratorSet, InstanceError> {
    if num_gens == 0 {
        return Err(InstanceError::NoGenerators);
    }
    let gens = match preset {
        Preset::General => (0..num_gens).map(|_| Permutation::random(n, rng)).collect(),
        Preset::Abelian2 => {
            // Disjoint transpositions commute, so products of subsets of a
            // fixed matching generate an elementary abelian 2-group.
            let mut points: Vec<u32> = (0..n as u32).collect();
            points.shuffle(rng);
            let pairs: Vec<(u32, u32)> = points.chunks_exact(2).map(|c| (c[0], c[1])).collect();
            (0..num_gens)
                .map(|_| {
                    let mut images: Vec<u32> = (0..n as u32).collect();
                    if !pairs.is_empty() {
                        let forced = rng.gen_range(0..pairs.len());
                        for (i, &(a, b)) in pairs.iter().enumerate() {
                            if i == forced || rng.gen_bool(0.5) {
                                images.swap(a as usize, b as usize);
                            }
                        }
                    }
                    Permutation::from_images(images)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(GeneratorSet::new(n, gens)?)
}

/// Plants an instance around a fresh witness: `h` uniform in `H`, then
/// `g = τ ∘ h` with `τ` moving exactly `k` points, so `d(h, g) = k`.
///
/// `k = 0` puts `g` inside `H` and is only useful for testing.
pub fn plant_instance<R: Rng + ?Sized>(
    n: usize,
    num_gens: usize,
    k: usize,
    preset: Preset,
    rng: &mut R,
) -> Result<(SdpInstance, Witness), InstanceError> {
    if k == 1 || k > n {
        return Err(InstanceError::BadDistance { n, k });
    }
    let gens = random_generators(n, num_gens, preset, rng)?;
    let bsgs = Bsgs::new(&gens);
    let h = bsgs.sample_uniform(rng);
    let tau = Permutation::random_support(n, k, rng)?;
    let g = tau.compose(&h)?;
    let inst = SdpInstance { k, g, gens, bsgs };
    Ok((inst, Witness { h }))
}
