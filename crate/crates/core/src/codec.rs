//! Little-endian byte encoding shared by every file and wire format.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("unexpected end of input: wanted {wanted} bytes, {remaining} left")]
    Truncated { wanted: usize, remaining: usize },
    #[error("{0} trailing bytes after message")]
    TrailingBytes(usize),
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static [u8; 4] },
    #[error("unknown tag 0x{0:02x}")]
    UnknownTag(u8),
    #[error("invalid value: {0}")]
    Invalid(String),
}

/// Cursor over an untrusted byte slice. Every read is bounds-checked.
#[derive(Debug)]
pub struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len()
    }

    pub fn take(&mut self, len: usize) -> Result<&'a [u8], DecodeError> {
        if self.buf.len() < len {
            return Err(DecodeError::Truncated {
                wanted: len,
                remaining: self.buf.len(),
            });
        }
        let (head, tail) = self.buf.split_at(len);
        self.buf = tail;
        Ok(head)
    }

    pub fn array<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        let mut out = [0u8; N];
        out.copy_from_slice(self.take(N)?);
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    /// Reads a u32 count of items that each occupy at least `item_size`
    /// bytes, refusing counts the remaining input cannot possibly hold.
    pub fn count(&mut self, item_size: usize) -> Result<usize, DecodeError> {
        let count = self.u32()? as usize;
        let needed = count.saturating_mul(item_size);
        if needed > self.buf.len() {
            return Err(DecodeError::Truncated {
                wanted: needed,
                remaining: self.buf.len(),
            });
        }
        Ok(count)
    }

    pub fn magic(&mut self, expected: &'static [u8; 4]) -> Result<(), DecodeError> {
        if &self.array::<4>()? != expected {
            return Err(DecodeError::BadMagic { expected });
        }
        Ok(())
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(DecodeError::TrailingBytes(self.buf.len()))
        }
    }
}

pub fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}
