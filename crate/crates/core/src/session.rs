//! Framed wire messages and the prover/verifier session loops over any
//! byte stream.
//!
//! A frame is a u32 little-endian length followed by that many bytes: a
//! one-byte message type and its payload.
//!
//! | type | message   | payload                          |
//! |------|-----------|----------------------------------|
//! | 0x01 | commit    | `C1 ‖ C2 ‖ C3` (96 bytes)        |
//! | 0x02 | challenge | one byte in `{0, 1, 2}`          |
//! | 0x03 | response  | variant byte then its fields     |
//! | 0x04 | verdict   | one byte, 1 = accept, 0 = reject |
//!
//! Each round is commit → challenge → response; the verifier closes the
//! session with a verdict, early if a round fails.

use std::io::{self, Read, Write};

use rand::Rng;
use thiserror::Error;

use crate::codec::{DecodeError, Reader};
use crate::protocol::{
    verifier_challenge, verify_round, Challenge, CommitmentMsg, ProtocolError, Response,
    RoundProver,
};
use crate::sdpinst::SdpInstance;

pub const MSG_COMMIT: u8 = 0x01;
pub const MSG_CHALLENGE: u8 = 0x02;
pub const MSG_RESPONSE: u8 = 0x03;
pub const MSG_VERDICT: u8 = 0x04;

/// Upper bound on a frame body, to bound allocation from untrusted peers.
pub const MAX_FRAME: usize = 16 << 20;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("malformed message: {0}")]
    Decode(#[from] DecodeError),
    #[error("frame length {0} out of range")]
    FrameLength(usize),
    #[error("expected {expected} message, got {got}")]
    UnexpectedMessage {
        expected: &'static str,
        got: &'static str,
    },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Commit(CommitmentMsg),
    Challenge(Challenge),
    Response(Response),
    Verdict(bool),
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Commit(_) => "commit",
            Message::Challenge(_) => "challenge",
            Message::Response(_) => "response",
            Message::Verdict(_) => "verdict",
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Message::Commit(c) => {
                out.push(MSG_COMMIT);
                c.encode_into(&mut out);
            }
            Message::Challenge(ch) => {
                out.push(MSG_CHALLENGE);
                out.push(ch.as_u8());
            }
            Message::Response(r) => {
                out.push(MSG_RESPONSE);
                r.encode_into(&mut out);
            }
            Message::Verdict(ok) => {
                out.push(MSG_VERDICT);
                out.push(u8::from(*ok));
            }
        }
        out
    }

    /// Strict decoding: unknown types, out-of-range values and trailing
    /// bytes are all errors.
    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let msg = match r.u8()? {
            MSG_COMMIT => Message::Commit(CommitmentMsg::decode(&mut r)?),
            MSG_CHALLENGE => {
                let v = r.u8()?;
                Message::Challenge(Challenge::from_u8(v).ok_or(DecodeError::UnknownTag(v))?)
            }
            MSG_RESPONSE => Message::Response(Response::decode(&mut r)?),
            MSG_VERDICT => match r.u8()? {
                0 => Message::Verdict(false),
                1 => Message::Verdict(true),
                v => return Err(DecodeError::Invalid(format!("verdict byte {v}"))),
            },
            t => return Err(DecodeError::UnknownTag(t)),
        };
        r.finish()?;
        Ok(msg)
    }
}

pub fn write_frame<W: Write + ?Sized>(w: &mut W, msg: &Message) -> io::Result<()> {
    let body = msg.encode();
    let mut frame = Vec::with_capacity(4 + body.len());
    frame.extend_from_slice(&(body.len() as u32).to_le_bytes());
    frame.extend_from_slice(&body);
    w.write_all(&frame)?;
    w.flush()
}

pub fn read_frame<R: Read + ?Sized>(r: &mut R) -> Result<Message, SessionError> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let len = u32::from_le_bytes(len) as usize;
    if len == 0 || len > MAX_FRAME {
        return Err(SessionError::FrameLength(len));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body)?;
    Ok(Message::decode(&body)?)
}

fn unexpected(expected: &'static str, got: &Message) -> SessionError {
    SessionError::UnexpectedMessage {
        expected,
        got: got.kind(),
    }
}

/// Verifier side of `rounds` sequential rounds. Returns the verdict; a
/// protocol violation by the peer is an error, which callers treat as
/// rejection. A reject verdict is sent on a best-effort basis either way.
pub fn run_verifier_session<S, R>(
    inst: &SdpInstance,
    rounds: usize,
    stream: &mut S,
    rng: &mut R,
) -> Result<bool, SessionError>
where
    S: Read + Write + ?Sized,
    R: Rng + ?Sized,
{
    let result = verifier_rounds(inst, rounds, stream, rng);
    match &result {
        Ok(verdict) => write_frame(stream, &Message::Verdict(*verdict))?,
        Err(_) => {
            let _ = write_frame(stream, &Message::Verdict(false));
        }
    }
    result
}

fn verifier_rounds<S, R>(
    inst: &SdpInstance,
    rounds: usize,
    stream: &mut S,
    rng: &mut R,
) -> Result<bool, SessionError>
where
    S: Read + Write + ?Sized,
    R: Rng + ?Sized,
{
    if rounds == 0 {
        return Err(ProtocolError::ZeroRounds.into());
    }
    for round in 0..rounds {
        let c = match read_frame(stream)? {
            Message::Commit(c) => c,
            other => return Err(unexpected("commit", &other)),
        };
        let ch = verifier_challenge(rng);
        write_frame(stream, &Message::Challenge(ch))?;
        let rsp = match read_frame(stream)? {
            Message::Response(r) => r,
            other => return Err(unexpected("response", &other)),
        };
        if !verify_round(inst, &c, ch, &rsp) {
            log::info!("round {round} rejected (challenge {})", ch.as_u8());
            return Ok(false);
        }
        log::debug!("round {round} accepted (challenge {})", ch.as_u8());
    }
    Ok(true)
}

/// Prover side of `rounds` sequential rounds. Returns the verifier's verdict.
pub fn run_prover_session<S, P>(
    prover: &mut P,
    rounds: usize,
    stream: &mut S,
) -> Result<bool, SessionError>
where
    S: Read + Write + ?Sized,
    P: RoundProver + ?Sized,
{
    if rounds == 0 {
        return Err(ProtocolError::ZeroRounds.into());
    }
    for _ in 0..rounds {
        let c = prover.commit()?;
        write_frame(stream, &Message::Commit(c))?;
        let ch = match read_frame(stream)? {
            Message::Challenge(ch) => ch,
            Message::Verdict(v) => return Ok(v),
            other => return Err(unexpected("challenge", &other)),
        };
        write_frame(stream, &Message::Response(prover.respond(ch)?))?;
    }
    match read_frame(stream)? {
        Message::Verdict(v) => Ok(v),
        other => Err(unexpected("verdict", &other)),
    }
}
