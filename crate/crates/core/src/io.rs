//! Binary PGM (P5) and 8-bit grayscale PNG reading and writing.
//!
//! Masks are stored as grayscale images with 255 for missing pixels and 0
//! for observed ones.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{DepthImage, Mask};

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0D, 0x0A, 0x1A, 0x0A];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Png,
}

impl ImageFormat {
    /// Format implied by a file extension (`.pgm` or `.png`).
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("pgm") => Ok(ImageFormat::Pgm),
            Some("png") => Ok(ImageFormat::Png),
            _ => Err(Error::Format(format!(
                "cannot infer image format from '{}'; use .pgm or .png",
                path.display()
            ))),
        }
    }
}

/// Raw 8-bit grayscale samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<u8>,
}

pub fn decode_gray(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P") {
        decode_pgm(bytes)
    } else {
        Err(Error::Format("unrecognized image signature".into()))
    }
}

pub fn encode_gray(img: &GrayImage, format: ImageFormat) -> Result<Vec<u8>> {
    if img.samples.len() != img.width * img.height {
        return Err(Error::InvalidInput("sample count does not match dimensions".into()));
    }
    match format {
        ImageFormat::Pgm => Ok(encode_pgm(img)),
        ImageFormat::Png => encode_png(img),
    }
}

pub fn read_image(path: impl AsRef<Path>) -> Result<DepthImage> {
    let g = decode_gray(&fs::read(path)?)?;
    DepthImage::from_u8(g.width, g.height, &g.samples)
}

/// Writes a finalized image; non-integral or out-of-range samples are rejected.
pub fn write_image(img: &DepthImage, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let bytes = encode_image(img, format)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn encode_image(img: &DepthImage, format: ImageFormat) -> Result<Vec<u8>> {
    encode_gray(
        &GrayImage {
            width: img.width(),
            height: img.height(),
            samples: img.to_u8()?,
        },
        format,
    )
}

pub fn encode_mask(mask: &Mask, format: ImageFormat) -> Result<Vec<u8>> {
    encode_gray(
        &GrayImage {
            width: mask.width(),
            height: mask.height(),
            samples: mask
                .as_slice()
                .iter()
                .map(|&m| if m { 255 } else { 0 })
                .collect(),
        },
        format,
    )
}

pub fn write_mask(mask: &Mask, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    fs::write(path, encode_mask(mask, format)?)?;
    Ok(())
}

/// Strict mask decoding: every sample must be 0 or 255.
pub fn decode_mask(bytes: &[u8]) -> Result<Mask> {
    let g = decode_gray(bytes)?;
    let missing = g
        .samples
        .iter()
        .map(|&v| match v {
            0 => Ok(false),
            255 => Ok(true),
            other => Err(Error::Format(format!(
                "mask sample {other} is neither 0 nor 255"
            ))),
        })
        .collect::<Result<Vec<bool>>>()?;
    Mask::new(g.width, g.height, missing)
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<Mask> {
    decode_mask(&fs::read(path)?)
}

fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.samples);
    out
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format(format!("PGM header: missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("PGM header: bad {what}")))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    match bytes.get(..2) {
        Some(b"P5") => {}
        Some(b"P2") => return Err(Error::Format("ASCII PGM (P2) is not supported".into())),
        Some(b"P3") | Some(b"P6") => {
            return Err(Error::Format("color PPM input is not supported".into()))
        }
        _ => return Err(Error::Format("not a binary PGM (P5) file".into())),
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval > 255 {
        return Err(Error::Format(format!(
            "16-bit PGM (maxval {maxval}) is not supported"
        )));
    }
    if maxval != 255 {
        return Err(Error::Format(format!("PGM maxval must be 255, got {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::Format("PGM dimensions must be positive".into()));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::Format("PGM header not terminated".into())),
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("PGM dimensions overflow".into()))?;
    let payload = &bytes[cur.pos..];
    if payload.len() < n {
        return Err(Error::Format(format!(
            "PGM payload truncated: {} of {n} bytes",
            payload.len()
        )));
    }
    Ok(GrayImage {
        width,
        height,
        samples: payload[..n].to_vec(),
    })
}

fn png_err(e: impl std::fmt::Display) -> Error {
    Error::Format(format!("PNG: {e}"))
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(png_err)?;
    let (color, depth) = {
        let info = reader.info();
        (info.color_type, info.bit_depth)
    };
    if color != png::ColorType::Grayscale {
        return Err(Error::Format(format!(
            "PNG must be single-channel grayscale, got {color:?}"
        )));
    }
    if depth != png::BitDepth::Eight {
        return Err(Error::Format(format!("PNG must be 8-bit, got {depth:?}")));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Format("PNG too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(png_err)?;
    let (width, height) = (frame.width as usize, frame.height as usize);
    buf.truncate(frame.buffer_size());
    if buf.len() != width * height {
        return Err(Error::Format("PNG frame size mismatch".into()));
    }
    Ok(GrayImage {
        width,
        height,
        samples: buf,
    })
}

fn encode_png(img: &GrayImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(png_err)?;
        writer.write_image_data(&img.samples).map_err(png_err)?;
        writer.finish().map_err(png_err)?;
    }
    Ok(out)
}
