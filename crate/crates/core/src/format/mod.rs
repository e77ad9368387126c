//! Plain-text file formats: keypoint files (PBOW/PRAW), corpus manifests,
//! codebooks (PCB) and profile indexes (PIDX).
//!
//! Every format starts with a one-line header. Parse errors report the line
//! number counted from the first line after the header.

mod codebook;
mod index;
mod keypoints;
mod manifest;

pub use codebook::{load_codebook, parse_codebook, save_codebook, write_codebook};
pub use index::{load_index, parse_index, save_index, write_index};
pub use keypoints::{
    load_keypoints, parse_keypoints, save_quantized, save_raw, write_quantized, write_raw,
    KeypointFile, KeypointMode,
};
pub use manifest::{load_manifest, parse_manifest, ManifestEntry};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Splits `text` into its header and the numbered data lines that follow.
pub(crate) fn split_header(text: &str) -> Result<(&str, impl Iterator<Item = (usize, &str)>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Header("file is empty".into()))?;
    Ok((header.trim_end(), lines.enumerate().map(|(i, l)| (i + 1, l))))
}

/// Parses a header of the form `<magic> v1 <n>...` and returns the numeric
/// fields.
pub(crate) fn parse_header(header: &str, magic: &str, arity: usize) -> Result<Vec<u64>> {
    let fields: Vec<&str> = header.split_ascii_whitespace().collect();
    if fields.first() != Some(&magic) {
        return Err(Error::Header(format!(
            "expected \"{magic} v1 ...\", found {header:?}"
        )));
    }
    if fields.get(1) != Some(&"v1") {
        return Err(Error::Header(format!("unsupported {magic} version in {header:?}")));
    }
    if fields.len() != arity + 2 {
        return Err(Error::Header(format!(
            "expected {} fields, found {}",
            arity + 2,
            fields.len()
        )));
    }
    fields[2..]
        .iter()
        .map(|f| {
            f.parse::<u64>()
                .map_err(|_| Error::Header(format!("non-numeric header field {f:?}")))
        })
        .collect()
}

pub(crate) fn parse_coord(line: usize, field: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, format!("invalid coordinate {field:?}"))),
    }
}
