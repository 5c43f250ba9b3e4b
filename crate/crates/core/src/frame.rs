//! Planar RGB 4:4:4 frames, raw sequence I/O and the CTU/CU/CB grid.
//!
//! Raw files are header-less: frames are concatenated, and each frame stores
//! the G plane, then B, then R, row-major. 8-bit samples take one byte, 10-bit
//! samples take two bytes little-endian with the low 10 bits significant.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::motion::MotionVector;

/// Colour channel, in coding order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    G = 0,
    B = 1,
    R = 2,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::G, Channel::B, Channel::R];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::G => "G",
            Channel::B => "B",
            Channel::R => "R",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u16>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Plane {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: u16) -> Self {
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u16>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Structural(format!(
                "plane data has {} samples, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u16) {
        self.data[y * self.width + x] = v;
    }

    pub fn row(&self, y: usize) -> &[u16] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Copies a `size`×`size` block starting at `(x, y)` into a row-major vector.
    pub fn block(&self, x: usize, y: usize, size: usize) -> Vec<u16> {
        let mut out = Vec::with_capacity(size * size);
        for row in y..y + size {
            out.extend_from_slice(&self.data[row * self.width + x..row * self.width + x + size]);
        }
        out
    }

    pub fn put_block(&mut self, x: usize, y: usize, size: usize, samples: &[u16]) {
        for (r, src) in samples.chunks_exact(size).enumerate() {
            let start = (y + r) * self.width + x;
            self.data[start..start + size].copy_from_slice(src);
        }
    }

    /// Edge-replicates the plane to `width`×`height`. The original region is
    /// copied unchanged.
    pub fn padded(&self, width: usize, height: usize) -> Plane {
        let mut out = Plane::new(width, height);
        for y in 0..height {
            let sy = y.min(self.height - 1);
            for x in 0..width {
                let sx = x.min(self.width - 1);
                out.data[y * width + x] = self.data[sy * self.width + sx];
            }
        }
        out
    }

    pub fn cropped(&self, width: usize, height: usize) -> Plane {
        let mut out = Plane::new(width, height);
        for y in 0..height {
            out.data[y * width..(y + 1) * width].copy_from_slice(&self.row(y)[..width]);
        }
        out
    }
}

/// One picture: three equal-sized planes ordered G, B, R.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub bit_depth: u32,
    pub planes: [Plane; 3],
}

impl Frame {
    pub fn new(width: usize, height: usize, bit_depth: u32) -> Result<Self> {
        check_bit_depth(bit_depth)?;
        if width == 0 || height == 0 {
            return Err(Error::Structural(
                "frame dimensions must be positive".into(),
            ));
        }
        let p = Plane::new(width, height);
        Ok(Frame {
            width,
            height,
            bit_depth,
            planes: [p.clone(), p.clone(), p],
        })
    }

    /// Builds a frame from G, B, R planes, checking dimensions and sample range.
    pub fn from_planes(planes: [Plane; 3], bit_depth: u32) -> Result<Self> {
        check_bit_depth(bit_depth)?;
        let (w, h) = (planes[0].width, planes[0].height);
        if w == 0 || h == 0 {
            return Err(Error::Structural(
                "frame dimensions must be positive".into(),
            ));
        }
        if planes.iter().any(|p| p.width != w || p.height != h) {
            return Err(Error::Structural(
                "G, B and R planes must have identical dimensions".into(),
            ));
        }
        let max = max_sample(bit_depth);
        if planes.iter().any(|p| p.data.iter().any(|&s| s > max)) {
            return Err(Error::Structural(format!(
                "sample exceeds {bit_depth}-bit range"
            )));
        }
        Ok(Frame {
            width: w,
            height: h,
            bit_depth,
            planes,
        })
    }

    pub fn plane(&self, c: Channel) -> &Plane {
        &self.planes[c.index()]
    }

    pub fn plane_mut(&mut self, c: Channel) -> &mut Plane {
        &mut self.planes[c.index()]
    }

    pub fn max_sample(&self) -> u16 {
        max_sample(self.bit_depth)
    }

    /// Edge-replicated copy whose dimensions are multiples of `ctu_size`.
    pub fn padded_to(&self, ctu_size: usize) -> Frame {
        let w = self.width.div_ceil(ctu_size) * ctu_size;
        let h = self.height.div_ceil(ctu_size) * ctu_size;
        if w == self.width && h == self.height {
            return self.clone();
        }
        Frame {
            width: w,
            height: h,
            bit_depth: self.bit_depth,
            planes: self.planes.clone().map(|p| p.padded(w, h)),
        }
    }

    pub fn cropped(&self, width: usize, height: usize) -> Frame {
        Frame {
            width,
            height,
            bit_depth: self.bit_depth,
            planes: self.planes.clone().map(|p| p.cropped(width, height)),
        }
    }
}

pub fn max_sample(bit_depth: u32) -> u16 {
    ((1u32 << bit_depth) - 1) as u16
}

fn check_bit_depth(bit_depth: u32) -> Result<()> {
    match bit_depth {
        8 | 10 => Ok(()),
        _ => Err(Error::Config(format!(
            "bit depth must be 8 or 10, got {bit_depth}"
        ))),
    }
}

fn bytes_per_sample(bit_depth: u32) -> usize {
    if bit_depth > 8 {
        2
    } else {
        1
    }
}

/// Bytes occupied by one frame in the raw planar format.
pub fn frame_bytes(width: usize, height: usize, bit_depth: u32) -> usize {
    3 * width * height * bytes_per_sample(bit_depth)
}

/// Parses `frame_count` frames from a raw planar byte buffer.
pub fn parse_sequence(
    bytes: &[u8],
    width: usize,
    height: usize,
    bit_depth: u32,
    frame_count: usize,
) -> Result<Vec<Frame>> {
    check_bit_depth(bit_depth)?;
    if width == 0 || height == 0 {
        return Err(Error::Config("frame dimensions must be positive".into()));
    }
    let bps = bytes_per_sample(bit_depth);
    let plane_bytes = width * height * bps;
    let need = frame_count * 3 * plane_bytes;
    if bytes.len() < need {
        let frame = bytes.len() / (3 * plane_bytes);
        let plane = (bytes.len() % (3 * plane_bytes)) / plane_bytes;
        return Err(Error::Ingest {
            frame,
            plane,
            offset: bytes.len(),
            msg: format!("short input: need {need} bytes, have {}", bytes.len()),
        });
    }
    let max = max_sample(bit_depth);
    let mut frames = Vec::with_capacity(frame_count);
    for f in 0..frame_count {
        let mut planes: [Plane; 3] = std::array::from_fn(|_| Plane::new(width, height));
        for (p, plane) in planes.iter_mut().enumerate() {
            let base = (f * 3 + p) * plane_bytes;
            let src = &bytes[base..base + plane_bytes];
            if bps == 1 {
                for (d, &s) in plane.data.iter_mut().zip(src) {
                    *d = s as u16;
                }
            } else {
                for (i, (d, s)) in plane.data.iter_mut().zip(src.chunks_exact(2)).enumerate() {
                    let v = u16::from_le_bytes([s[0], s[1]]);
                    if v > max {
                        return Err(Error::Ingest {
                            frame: f,
                            plane: p,
                            offset: base + 2 * i,
                            msg: format!("sample {v} exceeds {bit_depth}-bit range"),
                        });
                    }
                    *d = v;
                }
            }
        }
        frames.push(Frame {
            width,
            height,
            bit_depth,
            planes,
        });
    }
    Ok(frames)
}

/// Reads a raw planar sequence from disk.
///
/// With `frame_count = None` the file must hold a whole number of frames, all
/// of which are read.
pub fn load_sequence(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
    bit_depth: u32,
    frame_count: Option<usize>,
) -> Result<Vec<Frame>> {
    let bytes = fs::read(path)?;
    check_bit_depth(bit_depth)?;
    let per = frame_bytes(width, height, bit_depth);
    let count = match frame_count {
        Some(n) => n,
        None if per == 0 => 0,
        None => {
            if bytes.len() % per != 0 {
                return Err(Error::Ingest {
                    frame: bytes.len() / per,
                    plane: (bytes.len() % per) / (per / 3),
                    offset: bytes.len(),
                    msg: format!(
                        "{} trailing bytes after the last whole frame",
                        bytes.len() % per
                    ),
                });
            }
            bytes.len() / per
        }
    };
    parse_sequence(&bytes, width, height, bit_depth, count)
}

/// Serializes frames to the raw planar layout.
pub fn serialize_sequence(frames: &[Frame]) -> Vec<u8> {
    let mut out = Vec::new();
    for f in frames {
        let wide = bytes_per_sample(f.bit_depth) == 2;
        for p in &f.planes {
            if wide {
                for &s in &p.data {
                    out.extend_from_slice(&s.to_le_bytes());
                }
            } else {
                out.extend(p.data.iter().map(|&s| s as u8));
            }
        }
    }
    out
}

pub fn write_sequence(path: impl AsRef<Path>, frames: &[Frame]) -> Result<()> {
    fs::write(path, serialize_sequence(frames))?;
    Ok(())
}

/// A coding unit: three co-located square coding blocks sharing one
/// prediction unit.
#[derive(Debug, Clone, PartialEq)]
pub struct CodingUnit {
    pub index: usize,
    pub x: usize,
    pub y: usize,
    pub size: usize,
    /// Non-normalized activity `g` per channel, once measured.
    pub activity: Option<[f64; 3]>,
    /// Motion vector of the CU's single PU, for inter frames.
    pub mv: Option<MotionVector>,
}

impl CodingUnit {
    /// The coding block of `channel`; geometry is identical for all channels.
    pub fn cb(&self, channel: Channel) -> CodingBlock {
        CodingBlock {
            channel,
            x: self.x,
            y: self.y,
            size: self.size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodingBlock {
    pub channel: Channel,
    pub x: usize,
    pub y: usize,
    pub size: usize,
}

/// Fixed-depth CU grid over a padded frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTree {
    pub ctu_size: usize,
    pub cu_size: usize,
    pub padded_width: usize,
    pub padded_height: usize,
    /// CUs in raster order across the whole padded picture.
    pub cus: Vec<CodingUnit>,
}

impl BlockTree {
    pub fn cus_per_row(&self) -> usize {
        self.padded_width / self.cu_size
    }

    pub fn cus_per_col(&self) -> usize {
        self.padded_height / self.cu_size
    }

    pub fn len(&self) -> usize {
        self.cus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cus.is_empty()
    }

    /// Whether the CU touches the picture border of the padded grid.
    pub fn is_border(&self, cu: &CodingUnit) -> bool {
        let (cx, cy) = (cu.x / self.cu_size, cu.y / self.cu_size);
        cx == 0 || cy == 0 || cx + 1 == self.cus_per_row() || cy + 1 == self.cus_per_col()
    }
}

pub fn validate_grid(ctu_size: usize, cu_size: usize) -> Result<()> {
    if !ctu_size.is_power_of_two() || !cu_size.is_power_of_two() {
        return Err(Error::Config(format!(
            "ctu_size {ctu_size} and cu_size {cu_size} must be powers of two"
        )));
    }
    if cu_size < 8 {
        return Err(Error::Config(format!(
            "cu_size {cu_size} is below the minimum of 8"
        )));
    }
    if cu_size > 32 {
        return Err(Error::Config(format!(
            "cu_size {cu_size} exceeds the largest transform size 32"
        )));
    }
    if cu_size > ctu_size {
        return Err(Error::Config(format!(
            "cu_size {cu_size} exceeds ctu_size {ctu_size}"
        )));
    }
    Ok(())
}

/// Lays a fixed grid of `cu_size` CUs over the frame padded to a multiple of
/// `ctu_size`.
pub fn partition(frame: &Frame, ctu_size: usize, cu_size: usize) -> Result<BlockTree> {
    partition_dims(frame.width, frame.height, ctu_size, cu_size)
}

pub fn partition_dims(
    width: usize,
    height: usize,
    ctu_size: usize,
    cu_size: usize,
) -> Result<BlockTree> {
    validate_grid(ctu_size, cu_size)?;
    let pw = width.div_ceil(ctu_size) * ctu_size;
    let ph = height.div_ceil(ctu_size) * ctu_size;
    let mut cus = Vec::with_capacity((pw / cu_size) * (ph / cu_size));
    for y in (0..ph).step_by(cu_size) {
        for x in (0..pw).step_by(cu_size) {
            cus.push(CodingUnit {
                index: cus.len(),
                x,
                y,
                size: cu_size,
                activity: None,
                mv: None,
            });
        }
    }
    Ok(BlockTree {
        ctu_size,
        cu_size,
        padded_width: pw,
        padded_height: ph,
        cus,
    })
}

/// Splits a row-major `2N`×`2N` block into its four `N`×`N` quadrants in
/// raster order.
pub fn subblocks<T: Copy>(cb: &[T], size: usize) -> Result<[Vec<T>; 4]> {
    if cb.len() != size * size {
        return Err(Error::Structural(format!(
            "block has {} samples, expected {size}x{size}",
            cb.len()
        )));
    }
    if !size.is_multiple_of(2) || size < 8 {
        return Err(Error::Structural(format!(
            "coding block size {size} cannot be split into N x N quadrants with N >= 4"
        )));
    }
    let n = size / 2;
    Ok(std::array::from_fn(|d| {
        let (ox, oy) = ((d % 2) * n, (d / 2) * n);
        let mut q = Vec::with_capacity(n * n);
        for y in oy..oy + n {
            q.extend_from_slice(&cb[y * size + ox..y * size + ox + n]);
        }
        q
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_black_frame() {
        let frames = parse_sequence(&[0u8; 12], 2, 2, 8, 1).unwrap();
        assert_eq!(frames.len(), 1);
        assert!(frames[0].planes.iter().all(|p| p.data == vec![0; 4]));
    }

    #[test]
    fn inferred_count_rejects_partial_frame() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.rgb");
        fs::write(&path, [0u8; 30]).unwrap();
        match load_sequence(&path, 2, 2, 8, None) {
            Err(Error::Ingest { frame, plane, .. }) => assert_eq!((frame, plane), (2, 1)),
            other => panic!("{other:?}"),
        }
        assert_eq!(load_sequence(&path, 2, 2, 8, Some(2)).unwrap().len(), 2);
        fs::write(&path, [0u8; 24]).unwrap();
        assert_eq!(load_sequence(&path, 2, 2, 8, None).unwrap().len(), 2);
    }

    #[test]
    fn ten_bit_sizes_and_endianness() {
        assert_eq!(frame_bytes(2, 2, 10), 24);
        assert!(parse_sequence(&[0u8; 23], 2, 2, 10, 1).is_err());
        let mut bytes = vec![0u8; 24];
        bytes[0] = 0x04;
        let f = parse_sequence(&bytes, 2, 2, 10, 1).unwrap();
        assert_eq!(f[0].planes[0].data[0], 4);
    }

    #[test]
    fn ten_bit_out_of_range_names_location() {
        let mut bytes = vec![0u8; 48];
        // frame 1, plane 2 (R), sample 1
        let off = 24 + 2 * 8 + 2;
        bytes[off] = 0x00;
        bytes[off + 1] = 0x04;
        match parse_sequence(&bytes, 2, 2, 10, 2) {
            Err(Error::Ingest {
                frame,
                plane,
                offset,
                ..
            }) => {
                assert_eq!((frame, plane, offset), (1, 2, off));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_file_is_an_ingestion_error() {
        assert!(matches!(
            parse_sequence(&[0u8; 11], 2, 2, 8, 1),
            Err(Error::Ingest { .. })
        ));
    }

    #[test]
    fn partition_counts() {
        let f = Frame::new(128, 128, 8).unwrap();
        let t = partition(&f, 64, 32).unwrap();
        assert_eq!(t.len(), 16);

        let f = Frame::new(100, 60, 8).unwrap();
        let t = partition(&f, 64, 32).unwrap();
        assert_eq!((t.padded_width, t.padded_height), (128, 64));
        let area: usize = t.cus.iter().map(|c| c.size * c.size).sum();
        assert_eq!(area, 128 * 64);
        for cu in &t.cus {
            let g = cu.cb(Channel::G);
            for c in [Channel::B, Channel::R] {
                let o = cu.cb(c);
                assert_eq!((g.x, g.y, g.size), (o.x, o.y, o.size));
            }
        }
    }

    #[test]
    fn partition_rejects_small_cu() {
        let f = Frame::new(16, 16, 8).unwrap();
        assert!(partition(&f, 64, 4).is_err());
        assert!(partition(&f, 16, 32).is_err());
        assert!(partition(&f, 64, 24).is_err());
    }

    #[test]
    fn padding_is_idempotent_and_preserves_original() {
        let mut f = Frame::new(5, 3, 8).unwrap();
        for (i, s) in f.planes[0].data.iter_mut().enumerate() {
            *s = i as u16;
        }
        let p = f.padded_to(8);
        assert_eq!((p.width, p.height), (8, 8));
        assert_eq!(p.cropped(5, 3), f);
        assert_eq!(p.padded_to(8), p);
        assert_eq!(p.planes[0].get(7, 7), f.planes[0].get(4, 2));
    }

    #[test]
    fn subblock_quadrants() {
        let cb: Vec<u16> = (0..64).collect();
        let q = subblocks(&cb, 8).unwrap();
        assert!(q.iter().all(|b| b.len() == 16));
        assert_eq!(q[0][..4], [0, 1, 2, 3]);
        assert_eq!(q[1][..4], [4, 5, 6, 7]);
        assert_eq!(q[2][0], 32);
        let mut all: Vec<u16> = q.concat();
        all.sort_unstable();
        assert_eq!(all, cb);

        let big = vec![0u8; 64 * 64];
        assert!(subblocks(&big, 64)
            .unwrap()
            .iter()
            .all(|b| b.len() == 32 * 32));
        assert!(subblocks(&[0u8; 49], 7).is_err());
    }

    #[test]
    fn raw_round_trip_bytes() {
        let bytes: Vec<u8> = (0..2 * 3 * 4 * 2).map(|i| (i % 4) as u8).collect();
        let frames = parse_sequence(&bytes, 2, 2, 10, 2).unwrap();
        assert_eq!(serialize_sequence(&frames), bytes);
    }
}
