//! Non-interactive proofs: `t` parallel rounds whose challenges are hashed
//! from the context, the instance and all `t` commitments.
//!
//! Challenge `i` is read from `SHAKE-256(DOMAIN || len(ctx) || ctx ||
//! instance digest || t || C_0 || .. || C_{t-1} || i)`: successive output
//! bytes equal to 255 are skipped and the first other byte is reduced mod 3.

use rand::{CryptoRng, RngCore};
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use super::{prover_commit, verify_round, Challenge, CommitmentMsg, ProtocolError, Response};
use crate::codec::{put_u32, DecodeError, Reader};
use crate::sdpinst::{SdpInstance, Witness};

pub const PROOF_MAGIC: &[u8; 4] = b"SDP1";

const DOMAIN: &[u8] = b"SDZKP/fiat-shamir/v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NizkProof {
    pub rounds: Vec<(CommitmentMsg, Response)>,
}

impl NizkProof {
    /// `"SDP1"`, round count, then each round's commitment and response.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(PROOF_MAGIC);
        put_u32(&mut out, self.rounds.len() as u32);
        for (c, rsp) in &self.rounds {
            c.encode_into(&mut out);
            rsp.encode_into(&mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        r.magic(PROOF_MAGIC)?;
        let t = r.count(CommitmentMsg::ENCODED_LEN + 1)?;
        let rounds = (0..t)
            .map(|_| Ok((CommitmentMsg::decode(&mut r)?, Response::decode(&mut r)?)))
            .collect::<Result<Vec<_>, DecodeError>>()?;
        r.finish()?;
        Ok(NizkProof { rounds })
    }
}

/// Unbiased reduction of an XOF byte stream to `{0, 1, 2}`.
pub fn challenge_from_xof_bytes(bytes: impl IntoIterator<Item = u8>) -> Option<Challenge> {
    bytes
        .into_iter()
        .find(|&b| b != 255)
        .and_then(|b| Challenge::from_u8(b % 3))
}

fn derive_challenges<'a>(
    inst: &SdpInstance,
    commitments: impl ExactSizeIterator<Item = &'a CommitmentMsg>,
    context: &[u8],
) -> Vec<Challenge> {
    let t = commitments.len();
    let mut prefix = Shake256::default();
    prefix.update(DOMAIN);
    prefix.update(&(context.len() as u64).to_le_bytes());
    prefix.update(context);
    prefix.update(&inst.digest());
    prefix.update(&(t as u32).to_le_bytes());
    for c in commitments {
        prefix.update(&c.to_bytes());
    }
    (0..t as u32)
        .map(|i| {
            let mut xof = prefix.clone();
            xof.update(&i.to_le_bytes());
            let mut reader = xof.finalize_xof();
            let stream = std::iter::from_fn(|| {
                let mut b = [0u8; 1];
                reader.read(&mut b);
                Some(b[0])
            });
            challenge_from_xof_bytes(stream).expect("stream is unbounded")
        })
        .collect()
}

pub fn fs_prove<R: RngCore + CryptoRng + ?Sized>(
    inst: &SdpInstance,
    wit: &Witness,
    rounds: usize,
    context: &[u8],
    rng: &mut R,
) -> Result<NizkProof, ProtocolError> {
    if rounds == 0 {
        return Err(ProtocolError::ZeroRounds);
    }
    let states = (0..rounds)
        .map(|_| prover_commit(inst, wit, rng).map(|(s, _)| s))
        .collect::<Result<Vec<_>, _>>()?;
    let challenges = derive_challenges(inst, states.iter().map(|s| s.commitment()), context);
    Ok(NizkProof {
        rounds: states
            .iter()
            .zip(challenges)
            .map(|(s, ch)| (*s.commitment(), s.respond(ch)))
            .collect(),
    })
}

/// Accepts iff the proof has exactly `rounds` rounds and every round
/// verifies under the recomputed challenges.
pub fn fs_verify(inst: &SdpInstance, proof: &NizkProof, rounds: usize, context: &[u8]) -> bool {
    if rounds == 0 || proof.rounds.len() != rounds {
        return false;
    }
    let challenges = derive_challenges(inst, proof.rounds.iter().map(|(c, _)| c), context);
    proof
        .rounds
        .iter()
        .zip(challenges)
        .all(|((c, rsp), ch)| verify_round(inst, c, ch, rsp))
}

/// [`fs_verify`] on an encoded proof; parse failures are rejections.
pub fn fs_verify_bytes(inst: &SdpInstance, bytes: &[u8], rounds: usize, context: &[u8]) -> bool {
    NizkProof::from_bytes(bytes).is_ok_and(|proof| fs_verify(inst, &proof, rounds, context))
}
