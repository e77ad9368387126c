use std::fmt::Write as _;
use std::path::Path;

use super::{parse_header, read_text, split_header, write_text};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::model::Descriptor;

/// `PCB v1 <k> <dim>`, then `k` lines of `dim` values, then `scatter <value>`.
pub fn write_codebook(cb: &Codebook) -> String {
    let mut out = format!("PCB v1 {} {}\n", cb.k(), cb.dim());
    for c in cb.centers() {
        let line: Vec<String> = c.as_slice().iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    let _ = writeln!(out, "scatter {}", cb.scatter());
    out
}

pub fn parse_codebook(text: &str) -> Result<Codebook> {
    let (header, lines) = split_header(text)?;
    let fields = parse_header(header, "PCB", 2)?;
    let (k, dim) = (fields[0] as usize, fields[1] as usize);
    if k == 0 || dim == 0 {
        return Err(Error::Header("k and dim must be positive".into()));
    }
    let mut centers = Vec::with_capacity(k);
    let mut scatter = None;
    let mut last_line = 0;
    for (n, line) in lines {
        last_line = n;
        let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if scatter.is_some() {
            return Err(Error::parse(n, "unexpected content after scatter line"));
        }
        if centers.len() < k {
            if tokens.len() != dim {
                return Err(Error::parse(
                    n,
                    format!("expected {dim} fields, found {}", tokens.len()),
                ));
            }
            let values = tokens
                .iter()
                .map(|t| match t.parse::<f32>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::parse(n, format!("invalid center value {t:?}"))),
                })
                .collect::<Result<Vec<f32>>>()?;
            centers.push(Descriptor::new(values)?);
        } else {
            match tokens.as_slice() {
                ["scatter", v] => {
                    let v: f64 = v
                        .parse()
                        .map_err(|_| Error::parse(n, format!("invalid scatter {v:?}")))?;
                    scatter = Some(v);
                }
                _ => return Err(Error::parse(n, "expected \"scatter <value>\"")),
            }
        }
    }
    if centers.len() < k {
        return Err(Error::parse(
            last_line + 1,
            format!("expected {k} centers, found {}", centers.len()),
        ));
    }
    let scatter = scatter.ok_or_else(|| Error::parse(last_line + 1, "missing scatter line"))?;
    Codebook::new(centers, scatter)
}

pub fn load_codebook(path: impl AsRef<Path>) -> Result<Codebook> {
    let path = path.as_ref();
    parse_codebook(&read_text(path)?).map_err(|e| e.in_file(path))
}

pub fn save_codebook(path: impl AsRef<Path>, cb: &Codebook) -> Result<()> {
    write_text(path.as_ref(), &write_codebook(cb))
}
