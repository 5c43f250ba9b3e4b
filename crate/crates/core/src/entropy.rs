//! Bit-level I/O and exp-Golomb coding of coefficient blocks.
//!
//! A block is scanned in zigzag order from DC. The scan position one past the
//! last nonzero level is written as a fixed-width field of
//! `⌈log2(N² + 1)⌉` bits (0 means the block is all zero), then every level up
//! to and including the last nonzero one is written as a signed order-0
//! exp-Golomb code (`0 → 0, +k → 2k − 1, −k → 2k`).

use crate::error::{Error, Result};
use crate::quantizer::MAX_LEVEL;

#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    buf: Vec<u8>,
    bits: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of bits written so far.
    pub fn bit_len(&self) -> usize {
        self.bits
    }

    pub fn write_bit(&mut self, bit: bool) {
        if self.bits.is_multiple_of(8) {
            self.buf.push(0);
        }
        if bit {
            let last = self.buf.len() - 1;
            self.buf[last] |= 0x80 >> (self.bits % 8);
        }
        self.bits += 1;
    }

    /// Writes the low `n` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, n: u32) {
        debug_assert!(n <= 64);
        for i in (0..n).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    /// Unsigned order-0 exp-Golomb.
    pub fn write_ue(&mut self, value: u32) {
        let v = value as u64 + 1;
        let len = 64 - v.leading_zeros();
        self.write_bits(0, len - 1);
        self.write_bits(v, len);
    }

    pub fn write_se(&mut self, value: i32) {
        self.write_ue(signed_to_unsigned(value));
    }

    /// Finished buffer; the final partial byte is zero-padded.
    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        BitReader { buf, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() * 8 - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.buf.len() * 8 {
            return Err(Error::decode(self.pos, "unexpected end of stream"));
        }
        let b = self.buf[self.pos / 8] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(b)
    }

    pub fn read_bits(&mut self, n: u32) -> Result<u64> {
        if self.remaining() < n as usize {
            return Err(Error::decode(
                self.pos,
                format!("need {n} bits, {} left", self.remaining()),
            ));
        }
        let mut v = 0u64;
        for _ in 0..n {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }

    pub fn read_ue(&mut self) -> Result<u32> {
        let start = self.pos;
        let mut zeros = 0u32;
        while !self.read_bit()? {
            zeros += 1;
            if zeros > 32 {
                return Err(Error::decode(start, "exp-Golomb prefix too long"));
            }
        }
        let rest = self.read_bits(zeros)?;
        let v = ((1u64 << zeros) | rest) - 1;
        u32::try_from(v).map_err(|_| Error::decode(start, "exp-Golomb value overflows u32"))
    }

    pub fn read_se(&mut self) -> Result<i32> {
        let start = self.pos;
        let u = self.read_ue()?;
        unsigned_to_signed(u).ok_or_else(|| Error::decode(start, "signed value out of range"))
    }
}

fn signed_to_unsigned(v: i32) -> u32 {
    if v > 0 {
        2 * v as u32 - 1
    } else {
        2 * v.unsigned_abs()
    }
}

fn unsigned_to_signed(u: u32) -> Option<i32> {
    let mag = (u as i64 + 1) / 2;
    let mag = i32::try_from(mag).ok()?;
    Some(if u % 2 == 1 { mag } else { -mag })
}

/// Length of the unsigned exp-Golomb code for `value`.
pub fn ue_bits(value: u32) -> u32 {
    let v = value as u64 + 1;
    2 * (63 - v.leading_zeros()) + 1
}

/// Exact length in bits of the signed exp-Golomb code for `level`.
pub fn level_bits(level: i32) -> u32 {
    ue_bits(signed_to_unsigned(level))
}

/// Width of the last-significant-position field for an `n`×`n` block.
pub fn last_pos_bits(n: usize) -> u32 {
    let count = (n * n + 1) as u64;
    64 - (count - 1).leading_zeros()
}

/// Zigzag scan order for an `n`×`n` block: entry `i` is the raster index of
/// the `i`-th scanned coefficient.
pub fn zigzag(n: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(n * n);
    for s in 0..(2 * n - 1) {
        let lo = s.saturating_sub(n - 1);
        let hi = s.min(n - 1);
        if s % 2 == 0 {
            // up-right: row decreasing
            for row in (lo..=hi).rev() {
                order.push(row * n + (s - row));
            }
        } else {
            for row in lo..=hi {
                order.push(row * n + (s - row));
            }
        }
    }
    order
}

/// Levels of one block in scan order together with the end-of-block marker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedBlock {
    pub size: usize,
    /// Levels in zigzag order.
    pub scan: Vec<i32>,
    /// Scan index of the last nonzero level, `None` for an all-zero block.
    pub last: Option<usize>,
}

impl CodedBlock {
    pub fn from_levels(levels: &[i32], n: usize) -> Result<Self> {
        if levels.len() != n * n {
            return Err(Error::Encode(format!(
                "block has {} levels, expected {n}x{n}",
                levels.len()
            )));
        }
        if let Some(&l) = levels.iter().find(|l| l.abs() > MAX_LEVEL) {
            return Err(Error::Encode(format!("level {l} exceeds ±{MAX_LEVEL}")));
        }
        let scan: Vec<i32> = zigzag(n).into_iter().map(|i| levels[i]).collect();
        let last = scan.iter().rposition(|&l| l != 0);
        Ok(CodedBlock {
            size: n,
            scan,
            last,
        })
    }

    pub fn to_levels(&self) -> Vec<i32> {
        let mut out = vec![0; self.size * self.size];
        for (pos, &raster) in zigzag(self.size).iter().enumerate() {
            out[raster] = self.scan[pos];
        }
        out
    }

    pub fn bit_len(&self) -> usize {
        let body: u32 = match self.last {
            None => 0,
            Some(last) => self.scan[..=last].iter().map(|&l| level_bits(l)).sum(),
        };
        last_pos_bits(self.size) as usize + body as usize
    }

    pub fn write(&self, w: &mut BitWriter) {
        let marker = self.last.map_or(0, |l| l + 1);
        w.write_bits(marker as u64, last_pos_bits(self.size));
        if let Some(last) = self.last {
            for &l in &self.scan[..=last] {
                w.write_se(l);
            }
        }
    }

    pub fn read(r: &mut BitReader<'_>, n: usize) -> Result<Self> {
        let start = r.position();
        let marker = r.read_bits(last_pos_bits(n))? as usize;
        if marker > n * n {
            return Err(Error::decode(
                start,
                format!("last-significant marker {marker} exceeds {}", n * n),
            ));
        }
        let mut scan = vec![0; n * n];
        for slot in scan.iter_mut().take(marker) {
            let at = r.position();
            let l = r.read_se()?;
            if l.abs() > MAX_LEVEL {
                return Err(Error::decode(at, format!("level {l} out of range")));
            }
            *slot = l;
        }
        let last = marker.checked_sub(1);
        if let Some(last) = last {
            if scan[last] == 0 {
                return Err(Error::decode(start, "last-significant level is zero"));
            }
        }
        Ok(CodedBlock {
            size: n,
            scan,
            last,
        })
    }
}

/// Writes a raster-order level block and returns the number of bits emitted.
pub fn encode_block(levels: &[i32], n: usize, w: &mut BitWriter) -> Result<usize> {
    let block = CodedBlock::from_levels(levels, n)?;
    let before = w.bit_len();
    block.write(w);
    Ok(w.bit_len() - before)
}

pub fn decode_block(r: &mut BitReader<'_>, n: usize) -> Result<Vec<i32>> {
    Ok(CodedBlock::read(r, n)?.to_levels())
}
