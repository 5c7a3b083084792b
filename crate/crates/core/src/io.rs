//! Frame and mask files.
//!
//! Frames are binary PPM (`P6`, maxval 255) named `<%05d>.ppm`; masks are
//! binary PGM (`P5`, maxval 255, foreground 255) named `<%05d>.pgm`, or the
//! RLE JSON document when the extension is `.json`. Mask pixels >= 128 read
//! as foreground.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, RleMask};
use crate::types::{Frame, MaskSequence, VideoSequence};

pub fn frame_file_name(index: usize) -> String {
    format!("{index:05}.ppm")
}

pub fn mask_file_name(index: usize) -> String {
    format!("{index:05}.pgm")
}

struct Pnm<'a> {
    width: usize,
    height: usize,
    data: &'a [u8],
}

fn parse_pnm<'a>(bytes: &'a [u8], magic: &[u8; 2], channels: usize) -> Result<Pnm<'a>> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(Error::UnsupportedFormat(format!(
            "expected {} header",
            String::from_utf8_lossy(magic)
        )));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::UnsupportedFormat("truncated PNM header".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::UnsupportedFormat("bad PNM header number".into()))?;
    }
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(Error::UnsupportedFormat("malformed PNM header".into()));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "maxval {maxval} (only 255 is supported)"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::UnsupportedFormat("zero-sized image".into()));
    }
    let len = width * height * channels;
    let data = bytes
        .get(pos..pos + len)
        .ok_or_else(|| Error::UnsupportedFormat("truncated PNM data".into()))?;
    Ok(Pnm {
        width,
        height,
        data,
    })
}

pub fn encode_ppm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.pixels());
    out
}

pub fn decode_ppm(bytes: &[u8], index: usize) -> Result<Frame> {
    let pnm = parse_pnm(bytes, b"P6", 3)?;
    Frame::new(index, pnm.width, pnm.height, pnm.data.to_vec())
}

pub fn encode_pgm(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<BinaryMask> {
    let pnm = parse_pnm(bytes, b"P5", 1)?;
    BinaryMask::from_bits(
        pnm.width,
        pnm.height,
        pnm.data.iter().map(|&v| v >= 128).collect(),
    )
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

pub fn write_frame(frame: &Frame, path: &Path) -> Result<()> {
    match extension(path).as_deref() {
        Some("ppm") => write_bytes(path, &encode_ppm(frame)),
        other => Err(Error::UnsupportedFormat(format!(
            "frame extension {other:?}"
        ))),
    }
}

/// Writes `mask` as PGM or, for `.json`, as an RLE document.
pub fn write_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    match extension(path).as_deref() {
        Some("pgm") => write_bytes(path, &encode_pgm(mask)),
        Some("json") => write_bytes(path, &serde_json::to_vec(&mask.to_rle())?),
        other => Err(Error::UnsupportedFormat(format!(
            "mask extension {other:?}"
        ))),
    }
}

pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    match extension(path).as_deref() {
        Some("pgm") => decode_pgm(&read_bytes(path)?),
        Some("json") => {
            let rle: RleMask = serde_json::from_slice(&read_bytes(path)?)?;
            rle.decode()
        }
        other => Err(Error::UnsupportedFormat(format!(
            "mask extension {other:?}"
        ))),
    }
}

/// Files in `dir` whose stem is a frame number, sorted by that number.
/// Checks the numbering is exactly `1..=T`.
fn numbered_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut numbered = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if stem.is_empty() || !stem.bytes().all(|b| b.is_ascii_digit()) {
            continue;
        }
        let Ok(n) = stem.parse::<usize>() else {
            continue;
        };
        numbered.push((n, path));
    }
    numbered.sort();
    if numbered.is_empty() {
        return Err(Error::invalid(
            "directory",
            format!("{} holds no numbered files", dir.display()),
        ));
    }
    for (expected, (n, _)) in (1..).zip(&numbered) {
        if *n != expected {
            return Err(Error::MissingFrame {
                dir: dir.to_path_buf(),
                index: expected,
            });
        }
    }
    Ok(numbered.into_iter().map(|(_, p)| p).collect())
}

/// Loads `00001.ppm`, `00002.ppm`, ... from `dir`.
pub fn read_frame_dir(dir: &Path, expression: &str) -> Result<VideoSequence> {
    let mut frames: Vec<Frame> = Vec::new();
    for (i, path) in numbered_files(dir)?.into_iter().enumerate() {
        if extension(&path).as_deref() != Some("ppm") {
            return Err(Error::UnsupportedFormat(format!(
                "{} (frames must be binary PPM)",
                path.display()
            )));
        }
        let frame = decode_ppm(&read_bytes(&path)?, i + 1)?;
        if let Some(first) = frames.first() {
            if first.dims() != frame.dims() {
                return Err(Error::DimensionMismatch {
                    expected: first.dims(),
                    actual: frame.dims(),
                });
            }
        }
        frames.push(frame);
    }
    VideoSequence::new(frames, expression)
}

pub fn write_frame_dir(video: &VideoSequence, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for frame in video.frames() {
        write_frame(frame, &dir.join(frame_file_name(frame.index())))?;
    }
    Ok(())
}

pub fn read_mask_dir(dir: &Path) -> Result<MaskSequence> {
    let masks = numbered_files(dir)?
        .iter()
        .map(|p| read_mask(p))
        .collect::<Result<Vec<_>>>()?;
    MaskSequence::new(masks)
}

pub fn write_mask_dir(masks: &MaskSequence, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, mask) in masks.masks().iter().enumerate() {
        write_mask(mask, &dir.join(mask_file_name(i + 1)))?;
    }
    Ok(())
}
