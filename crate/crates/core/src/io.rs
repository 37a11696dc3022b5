//! Binary frame files and grayscale image export.
//!
//! A frame record is, little-endian throughout:
//!
//! ```text
//! "KWF1" | u32 version = 1 | u32 n | u32 dims[n] | f64 origin[n] | f64 spacing | f64 time
//!        | f64 values[dims[0] * ... * dims[n-1]]   (row-major, last axis fastest)
//! ```
//!
//! A frame-set file is a plain concatenation of records sharing one lattice.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::frames::{FrameSet, LatticeGeometry};

pub const MAGIC: &[u8; 4] = b"KWF1";
pub const VERSION: u32 = 1;

pub fn write_frame(
    out: &mut impl Write,
    geometry: &LatticeGeometry,
    time: f64,
    values: &[f64],
) -> Result<()> {
    if values.len() != geometry.len() {
        return Err(Error::Format(format!(
            "frame has {} values, lattice has {}",
            values.len(),
            geometry.len()
        )));
    }
    let mut buf = Vec::with_capacity(24 + 12 * geometry.ndim() + 8 * values.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(geometry.ndim() as u32).to_le_bytes());
    for &d in &geometry.dims {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &o in &geometry.origin {
        buf.extend_from_slice(&o.to_le_bytes());
    }
    buf.extend_from_slice(&geometry.spacing.to_le_bytes());
    buf.extend_from_slice(&time.to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn read_exact_or_eof(input: &mut impl Read, buf: &mut [u8]) -> Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        match input.read(&mut buf[filled..])? {
            0 if filled == 0 => return Ok(false),
            0 => return Err(Error::Format("truncated record".into())),
            k => filled += k,
        }
    }
    Ok(true)
}

fn u32_at(input: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    if !read_exact_or_eof(input, &mut b)? {
        return Err(Error::Format("truncated header".into()));
    }
    Ok(u32::from_le_bytes(b))
}

fn f64_at(input: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    if !read_exact_or_eof(input, &mut b)? {
        return Err(Error::Format("truncated header".into()));
    }
    Ok(f64::from_le_bytes(b))
}

/// Reads one record; `None` at a clean end of input.
pub fn read_frame(input: &mut impl Read) -> Result<Option<(LatticeGeometry, f64, Vec<f64>)>> {
    let mut magic = [0u8; 4];
    if !read_exact_or_eof(input, &mut magic)? {
        return Ok(None);
    }
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = u32_at(input)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u32_at(input)? as usize;
    if !(1..=3).contains(&n) {
        return Err(Error::Format(format!("unsupported dimension {n}")));
    }
    let dims = (0..n).map(|_| u32_at(input).map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
    let origin = (0..n).map(|_| f64_at(input)).collect::<Result<Vec<_>>>()?;
    let spacing = f64_at(input)?;
    let time = f64_at(input)?;
    let count: usize = dims.iter().product();
    let mut raw = vec![0u8; 8 * count];
    if count > 0 && !read_exact_or_eof(input, &mut raw)? {
        return Err(Error::Format("missing payload".into()));
    }
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(Some((LatticeGeometry::new(dims, origin, spacing), time, values)))
}

pub fn write_frameset(out: &mut impl Write, frames: &FrameSet) -> Result<()> {
    for (t, v) in frames.times.iter().zip(&frames.values) {
        write_frame(out, &frames.geometry, *t, v)?;
    }
    Ok(())
}

pub fn read_frameset(input: &mut impl Read) -> Result<FrameSet> {
    let Some((geometry, t, v)) = read_frame(input)? else {
        return Err(Error::Format("empty frame file".into()));
    };
    let mut frames = FrameSet::new(geometry);
    frames.times.push(t);
    frames.values.push(v);
    while let Some((g, t, v)) = read_frame(input)? {
        if g != frames.geometry {
            return Err(Error::Format("records disagree on the lattice".into()));
        }
        if t <= *frames.times.last().expect("nonempty") {
            return Err(Error::Format("frame times must increase".into()));
        }
        frames.times.push(t);
        frames.values.push(v);
    }
    Ok(frames)
}

pub fn save_frameset(path: &Path, frames: &FrameSet) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_frameset(&mut w, frames)?;
    w.flush()?;
    Ok(())
}

pub fn load_frameset(path: &Path) -> Result<FrameSet> {
    read_frameset(&mut std::io::BufReader::new(std::fs::File::open(path)?))
}

/// 8-bit binary graymap of a 2-D array (`rows × cols`, row-major), scaled
/// linearly from its own min to max. The range is kept in a header comment.
pub fn write_pgm(out: &mut impl Write, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    if values.len() != rows * cols {
        return Err(Error::Format("image size does not match the data".into()));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let (lo, hi) = if values.is_empty() { (0.0, 0.0) } else { (lo, hi) };
    let span = hi - lo;
    let mut buf = format!("P5\n# min {lo:e} max {hi:e}\n{cols} {rows}\n255\n").into_bytes();
    buf.extend(values.iter().map(|v| {
        if span > 0.0 {
            (((v - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    out.write_all(&buf)?;
    Ok(())
}
