use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use super::{parse_coord, parse_header, read_text, split_header, write_text};
use crate::error::{Error, Result};
use crate::model::{ImageBoW, Keypoint, VisualWord};
use crate::profile::{Profile, RingHistogram};
use crate::search::{IndexConfig, IndexedImage, ProfileIndex};
use crate::similarity::SimilarityConfig;

/// Serializes an index as PIDX text. Each image block lists its keypoints
/// (`kp <x> <y> <word>`) before its profiles.
pub fn write_index(index: &ProfileIndex) -> String {
    let config = index.config();
    let mut out = format!("PIDX v1 {} {}\n", config.n0, config.codebook_size);
    for entry in index.images() {
        let image = &entry.image;
        let _ = writeln!(out, "image {} {} {}", image.image_id, image.len(), entry.ring_count());
        for k in &image.keypoints {
            let _ = writeln!(out, "kp {} {} {}", k.x, k.y, k.payload);
        }
        for p in &entry.profiles {
            let _ = writeln!(out, "profile {}", p.center_index);
            for ring in p.rings() {
                let _ = write!(out, "ring {}", ring.size());
                for (w, n) in ring.entries() {
                    let _ = write!(out, " {w}:{n}");
                }
                out.push('\n');
            }
        }
    }
    out
}

fn parse_usize(line: usize, field: Option<&str>, what: &str) -> Result<usize> {
    let field = field.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    field
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} {field:?}")))
}

fn expect_tag<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    tag: &str,
    last_line: usize,
) -> Result<(usize, Vec<&'a str>)> {
    let (no, line) = lines
        .next()
        .ok_or_else(|| Error::parse(last_line + 1, format!("unexpected end of file, expected \"{tag}\"")))?;
    let fields: Vec<&str> = line.split_ascii_whitespace().collect();
    if fields.first() != Some(&tag) {
        return Err(Error::parse(no, format!("expected \"{tag}\" line, found {line:?}")));
    }
    Ok((no, fields))
}

/// Parses PIDX text. The returned index uses default similarity settings.
pub fn parse_index(text: &str) -> Result<ProfileIndex> {
    let (header, lines) = split_header(text)?;
    let h = parse_header(header, "PIDX", 2)?;
    let n0 = h[0] as usize;
    let codebook_size = u32::try_from(h[1])
        .map_err(|_| Error::Header(format!("codebook size {} too large", h[1])))?;
    if n0 == 0 {
        return Err(Error::Header("n0 must be positive".into()));
    }
    let mut lines = lines.filter(|(_, l)| !l.trim().is_empty()).peekable();
    let mut last = 0;
    let mut images = Vec::new();

    while lines.peek().is_some() {
        let (no, f) = expect_tag(&mut lines, "image", last)?;
        last = no;
        if f.len() != 4 {
            return Err(Error::parse(no, format!("expected 4 fields, found {}", f.len())));
        }
        let image_id = f[1].to_string();
        let kp_count = parse_usize(no, f.get(2).copied(), "keypoint count")?;
        let ring_count = parse_usize(no, f.get(3).copied(), "ring count")?;
        let shared_id: Arc<str> = Arc::from(image_id.as_str());

        let mut keypoints = Vec::with_capacity(kp_count);
        for _ in 0..kp_count {
            let (no, f) = expect_tag(&mut lines, "kp", last)?;
            last = no;
            if f.len() != 4 {
                return Err(Error::parse(no, format!("expected 4 fields, found {}", f.len())));
            }
            let word = f[3]
                .parse::<u32>()
                .map_err(|_| Error::parse(no, format!("invalid word id {:?}", f[3])))?;
            if word >= codebook_size {
                return Err(Error::parse(no, format!("word id {word} outside codebook of size {codebook_size}")));
            }
            keypoints.push(Keypoint::new(parse_coord(no, f[1])?, parse_coord(no, f[2])?, VisualWord(word)));
        }

        let mut profiles = Vec::with_capacity(kp_count);
        for _ in 0..kp_count {
            let (pno, f) = expect_tag(&mut lines, "profile", last)?;
            last = pno;
            if f.len() != 2 {
                return Err(Error::parse(pno, format!("expected 2 fields, found {}", f.len())));
            }
            let center = parse_usize(pno, f.get(1).copied(), "center index")?;
            let mut rings = Vec::with_capacity(ring_count);
            for _ in 0..ring_count {
                let (no, f) = expect_tag(&mut lines, "ring", last)?;
                last = no;
                let size = parse_usize(no, f.get(1).copied(), "ring size")?;
                let mut entries = Vec::with_capacity(f.len().saturating_sub(2));
                for pair in &f[2..] {
                    let (w, n) = pair
                        .split_once(':')
                        .and_then(|(w, n)| Some((w.parse::<u32>().ok()?, n.parse::<u32>().ok()?)))
                        .ok_or_else(|| Error::parse(no, format!("invalid word:count pair {pair:?}")))?;
                    entries.push((VisualWord(w), n));
                }
                let ring = RingHistogram::from_counts(entries).map_err(|e| Error::parse(no, e.to_string()))?;
                if ring.size() as usize != size {
                    return Err(Error::parse(
                        no,
                        format!("ring size {size} does not match its counts ({})", ring.size()),
                    ));
                }
                rings.push(ring);
            }
            let profile = Profile::from_rings(shared_id.clone(), center, n0, codebook_size, rings)
                .map_err(|e| Error::parse(pno, e.to_string()))?;
            profiles.push(profile);
        }

        images.push(IndexedImage {
            image: ImageBoW::new(image_id, codebook_size, keypoints),
            profiles,
        });
    }

    let config = IndexConfig {
        n0,
        codebook_size,
        similarity: SimilarityConfig::default(),
    };
    ProfileIndex::from_parts(config, images)
}

pub fn load_index(path: impl AsRef<Path>) -> Result<ProfileIndex> {
    let path = path.as_ref();
    parse_index(&read_text(path)?).map_err(|e| e.in_file(path))
}

pub fn save_index(path: impl AsRef<Path>, index: &ProfileIndex) -> Result<()> {
    write_text(path.as_ref(), &write_index(index))
}
