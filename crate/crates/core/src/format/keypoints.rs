use std::fmt::Write as _;
use std::path::Path;

use super::{parse_coord, parse_header, read_text, split_header, write_text};
use crate::error::{Error, Result};
use crate::model::{Descriptor, ImageBoW, Keypoint, RawKeypoint, VisualWord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeypointMode {
    /// `PRAW v1 <dim>`: coordinates followed by a descriptor.
    Raw,
    /// `PBOW v1 <codebook_size>`: coordinates followed by a word id.
    Quantized,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KeypointFile {
    Quantized(ImageBoW),
    Raw {
        dim: usize,
        keypoints: Vec<RawKeypoint>,
    },
}

impl KeypointFile {
    pub fn mode(&self) -> KeypointMode {
        match self {
            KeypointFile::Quantized(_) => KeypointMode::Quantized,
            KeypointFile::Raw { .. } => KeypointMode::Raw,
        }
    }
}

fn detect_mode(header: &str) -> Result<KeypointMode> {
    match header.split_ascii_whitespace().next() {
        Some("PBOW") => Ok(KeypointMode::Quantized),
        Some("PRAW") => Ok(KeypointMode::Raw),
        _ => Err(Error::Header(format!(
            "expected a PBOW or PRAW header, found {header:?}"
        ))),
    }
}

/// Parses a keypoint file. With `mode == None` the mode is taken from the
/// header; otherwise the header must agree with it.
pub fn parse_keypoints(
    text: &str,
    image_id: &str,
    mode: Option<KeypointMode>,
) -> Result<KeypointFile> {
    let (header, lines) = split_header(text)?;
    let detected = detect_mode(header)?;
    if let Some(expected) = mode {
        if expected != detected {
            return Err(Error::Header(format!(
                "expected {expected:?} keypoints, found header {header:?}"
            )));
        }
    }
    match detected {
        KeypointMode::Quantized => {
            let codebook_size = parse_header(header, "PBOW", 1)?[0];
            let codebook_size = u32::try_from(codebook_size)
                .map_err(|_| Error::Header(format!("codebook size {codebook_size} too large")))?;
            let mut keypoints = Vec::new();
            for (n, line) in lines {
                let fields: Vec<&str> = line.split_ascii_whitespace().collect();
                if fields.is_empty() {
                    continue;
                }
                if fields.len() != 3 {
                    return Err(Error::parse(
                        n,
                        format!("expected 3 fields, found {}", fields.len()),
                    ));
                }
                let x = parse_coord(n, fields[0])?;
                let y = parse_coord(n, fields[1])?;
                let word: u32 = fields[2]
                    .parse()
                    .map_err(|_| Error::parse(n, format!("invalid word id {:?}", fields[2])))?;
                if word >= codebook_size {
                    return Err(Error::Validation(format!(
                        "line {n}: word id {word} >= codebook size {codebook_size}"
                    )));
                }
                keypoints.push(Keypoint::new(x, y, VisualWord(word)));
            }
            Ok(KeypointFile::Quantized(ImageBoW::new(
                image_id,
                codebook_size,
                keypoints,
            )))
        }
        KeypointMode::Raw => {
            let dim = parse_header(header, "PRAW", 1)?[0] as usize;
            if dim == 0 {
                return Err(Error::Header("descriptor dimension must be positive".into()));
            }
            let mut keypoints = Vec::new();
            for (n, line) in lines {
                let fields: Vec<&str> = line.split_ascii_whitespace().collect();
                if fields.is_empty() {
                    continue;
                }
                if fields.len() != dim + 2 {
                    return Err(Error::parse(
                        n,
                        format!("expected {} fields, found {}", dim + 2, fields.len()),
                    ));
                }
                let x = parse_coord(n, fields[0])?;
                let y = parse_coord(n, fields[1])?;
                let values = fields[2..]
                    .iter()
                    .map(|f| match f.parse::<f32>() {
                        Ok(v) if v.is_finite() => Ok(v),
                        _ => Err(Error::parse(n, format!("invalid descriptor value {f:?}"))),
                    })
                    .collect::<Result<Vec<f32>>>()?;
                keypoints.push(Keypoint::new(x, y, Descriptor::new(values)?));
            }
            Ok(KeypointFile::Raw { dim, keypoints })
        }
    }
}

/// Loads a keypoint file; the image id is the file stem.
pub fn load_keypoints(path: impl AsRef<Path>, mode: Option<KeypointMode>) -> Result<KeypointFile> {
    let path = path.as_ref();
    let image_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let text = read_text(path)?;
    parse_keypoints(&text, &image_id, mode).map_err(|e| e.in_file(path))
}

pub fn write_quantized(image: &ImageBoW) -> String {
    let mut out = format!("PBOW v1 {}\n", image.codebook_size);
    for k in &image.keypoints {
        let _ = writeln!(out, "{} {} {}", k.x, k.y, k.payload.0);
    }
    out
}

pub fn write_raw(dim: usize, keypoints: &[RawKeypoint]) -> String {
    let mut out = format!("PRAW v1 {dim}\n");
    for k in keypoints {
        let _ = write!(out, "{} {}", k.x, k.y);
        for v in k.payload.as_slice() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn save_quantized(path: impl AsRef<Path>, image: &ImageBoW) -> Result<()> {
    write_text(path.as_ref(), &write_quantized(image))
}

pub fn save_raw(path: impl AsRef<Path>, dim: usize, keypoints: &[RawKeypoint]) -> Result<()> {
    write_text(path.as_ref(), &write_raw(dim, keypoints))
}
