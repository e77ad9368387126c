use std::path::{Path, PathBuf};

use super::read_text;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image_id: String,
    pub path: PathBuf,
}

/// Parses `<image_id> <relative_path>` lines. Blank lines and lines starting
/// with `#` are skipped. Paths are joined onto `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_ascii_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                i + 1,
                format!("expected \"<image_id> <relative_path>\", found {} fields", fields.len()),
            ));
        }
        entries.push(ManifestEntry {
            image_id: fields[0].to_string(),
            path: base.join(fields[1]),
        });
    }
    Ok(entries)
}

/// Loads a manifest; relative paths resolve against the manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(&text, base).map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_resolve_against_base() {
        let entries =
            parse_manifest("# corpus\na imgs/a.pbow\n\nb b.pbow\n", Path::new("/data")).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].image_id, "a");
        assert_eq!(entries[0].path, PathBuf::from("/data/imgs/a.pbow"));
    }

    #[test]
    fn wrong_arity_is_rejected() {
        let err = parse_manifest("a\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().starts_with("line 1:"));
    }
}
