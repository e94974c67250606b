//! Family files: a `key = value` header followed by `[matrix NAME]` blocks.
//!
//! ```text
//! # comment
//! dim = 2
//! count = 2
//! candidates = 1; 2 1
//! [matrix A1]
//! 1  -1/8
//! 0   1/2
//! [matrix A2]
//! 1/2 0
//! 1   1
//! ```
//!
//! Entries may be decimals or exact rationals `p/q`. Candidate words are
//! one-based letters separated by spaces, words separated by `;`.

use crate::error::{Error, Result};
use crate::exact::{parse_rational, rational_to_f64};
use crate::family::MatrixFamily;
use crate::linalg::Matrix;
use crate::words::ProductWord;

#[derive(Debug, Clone)]
pub struct FamilyFile {
    pub family: MatrixFamily,
    pub candidates: Option<Vec<ProductWord>>,
}

/// Decimal tokens go through the float parser so that printing and
/// re-reading is lossless; anything else is read as an exact rational.
pub fn parse_number(tok: &str) -> Option<f64> {
    if let Ok(x) = tok.parse::<f64>() {
        return x.is_finite().then_some(x);
    }
    parse_rational(tok).map(|r| rational_to_f64(&r))
}

fn parse_words(value: &str, line: usize, col: usize, m: usize) -> Result<Vec<ProductWord>> {
    let mut words = Vec::new();
    for part in value.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let mut letters = Vec::new();
        for tok in part.split_whitespace() {
            let l: usize = tok
                .parse()
                .map_err(|_| Error::parse(line, col, format!("invalid letter `{tok}`")))?;
            if l == 0 || l > m {
                return Err(Error::parse(line, col, format!("letter {l} outside 1..={m}")));
            }
            letters.push(l);
        }
        words.push(ProductWord::from_one_based(&letters)?);
    }
    if words.is_empty() {
        return Err(Error::parse(line, col, "empty candidate list"));
    }
    Ok(words)
}

struct Block {
    label: String,
    line: usize,
    rows: Vec<Vec<f64>>,
}

pub fn parse_family(text: &str) -> Result<FamilyFile> {
    let mut dim: Option<usize> = None;
    let mut count: Option<usize> = None;
    let mut cand_src: Option<(String, usize, usize)> = None;
    let mut blocks: Vec<Block> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len() + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::parse(line, indent, "unterminated section header"))?;
            let mut parts = inner.split_whitespace();
            if parts.next() != Some("matrix") {
                return Err(Error::parse(line, indent + 1, "expected `[matrix NAME]`"));
            }
            let label = parts.collect::<Vec<_>>().join(" ");
            let label = if label.is_empty() { format!("A{}", blocks.len() + 1) } else { label };
            blocks.push(Block { label, line, rows: Vec::new() });
            continue;
        }
        if let Some(block) = blocks.last_mut() {
            let mut row = Vec::new();
            let mut offset = 0;
            for tok in body.split_whitespace() {
                let col = body[offset..].find(tok).map_or(0, |p| p + offset) + 1;
                offset = col - 1 + tok.len();
                let v = parse_number(tok).ok_or_else(|| Error::parse(line, col, format!("invalid number `{tok}`")))?;
                row.push(v);
            }
            if let Some(d) = dim {
                if row.len() != d {
                    return Err(Error::parse(line, indent, format!("row has {} entries, expected {d}", row.len())));
                }
            }
            block.rows.push(row);
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| Error::parse(line, indent, "expected `key = value` or a `[matrix]` block"))?;
        let key = key.trim();
        let value = value.trim();
        let vcol = body.find('=').unwrap_or(0) + 2;
        match key {
            "dim" | "count" => {
                let n: usize = value
                    .parse()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| Error::parse(line, vcol, format!("`{key}` must be a positive integer")))?;
                if key == "dim" {
                    dim = Some(n);
                } else {
                    count = Some(n);
                }
            }
            "candidates" => cand_src = Some((value.to_string(), line, vcol)),
            _ => return Err(Error::parse(line, indent, format!("unknown key `{key}`"))),
        }
    }
    let end = text.lines().count().max(1);
    let dim = dim.ok_or_else(|| Error::parse(end, 1, "missing `dim`"))?;
    if blocks.is_empty() {
        return Err(Error::parse(end, 1, "no matrices"));
    }
    if let Some(c) = count {
        if c != blocks.len() {
            return Err(Error::parse(end, 1, format!("`count = {c}` but {} matrices given", blocks.len())));
        }
    }
    let mut mats = Vec::with_capacity(blocks.len());
    let mut labels = Vec::with_capacity(blocks.len());
    for b in blocks {
        if b.rows.len() != dim {
            return Err(Error::parse(
                b.line,
                1,
                format!("matrix `{}` has {} rows, expected {dim}", b.label, b.rows.len()),
            ));
        }
        mats.push(Matrix::from_fn(dim, dim, |i, j| b.rows[i][j]));
        labels.push(b.label);
    }
    let family = MatrixFamily::with_labels(mats, labels)?;
    let candidates = match cand_src {
        Some((v, l, c)) => Some(parse_words(&v, l, c, family.len())?),
        None => None,
    };
    Ok(FamilyFile { family, candidates })
}

pub fn format_family(file: &FamilyFile) -> String {
    let f = &file.family;
    let mut out = format!("dim = {}\ncount = {}\n", f.dim(), f.len());
    if let Some(words) = &file.candidates {
        let ws: Vec<String> = words
            .iter()
            .map(|w| w.one_based().iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        out.push_str(&format!("candidates = {}\n", ws.join("; ")));
    }
    for (m, label) in f.iter().zip(f.labels()) {
        out.push_str(&format!("[matrix {label}]\n"));
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:?}", m[(i, j)])).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "# pair\ndim = 2\ncount = 2\ncandidates = 1; 2\n[matrix A1]\n1 -1/8\n0 0.5\n[matrix A2]\n1/2 0\n1 1\n";

    #[test]
    fn reads_rationals_and_candidates() {
        let f = parse_family(EXAMPLE).unwrap();
        assert_eq!(f.family.dim(), 2);
        assert_eq!(f.family.get(0).unwrap()[(0, 1)], -0.125);
        assert_eq!(f.candidates.unwrap().len(), 2);
        assert_eq!(f.family.labels()[1], "A2");
    }

    #[test]
    fn round_trip_preserves_numbers() {
        let f = parse_family(EXAMPLE).unwrap();
        let g = parse_family(&format_family(&f)).unwrap();
        assert_eq!(f.family.matrices(), g.family.matrices());
        assert_eq!(f.candidates, g.candidates);
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_family("dim = 2\n[matrix A]\n1 x\n0 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, column: 3, .. }), "{err:?}");
        assert!(matches!(parse_family(""), Err(Error::Parse { .. })));
        assert!(parse_family("dim = 2\n[matrix A]\n1 0\n").is_err());
        assert!(parse_family("dim = 2\nsize = 3\n").is_err());
    }
}
