//! Plain-text graph files.
//!
//! ```text
//! # comment
//! vertex c kirchhoff
//! vertex a dft
//! vertex z custom robin.pair
//! bond e1 c a 1/2
//! bond e2 c z 0.75
//! ```
//!
//! A `custom` vertex names a file holding the matrix pair (A, B): `d` rows
//! of A followed by `d` rows of B, each row `d` tokens of the form `re,im`.

use super::{build_graph, GraphDescription, Length, MetricGraph};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::scattering::VertexCondition;
use num_rational::Rational64;
use std::path::Path;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Parse `p/q` or a plain decimal. Short decimals keep an exact value.
pub fn parse_length(tok: &str) -> Option<Length> {
    if let Some((p, q)) = tok.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q <= 0 || p <= 0 {
            return None;
        }
        return Some(Length::rational(p, q));
    }
    let value: f64 = tok.parse().ok()?;
    if !(value.is_finite() && value > 0.0) {
        return None;
    }
    let exact = decimal_rational(tok);
    Some(Length { value, exact })
}

fn decimal_rational(tok: &str) -> Option<Rational64> {
    let (int, frac) = tok.split_once('.').unwrap_or((tok, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int) || !all_digits(frac) || int.len() + frac.len() > 15 {
        return None;
    }
    let digits: i64 = format!("{int}{frac}").parse().ok()?;
    let den = 10i64.checked_pow(frac.len() as u32)?;
    (digits > 0).then(|| Rational64::new(digits, den))
}

pub fn parse_graph(text: &str, base_dir: Option<&Path>) -> Result<GraphDescription> {
    let mut desc = GraphDescription::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: String| Error::Parse { line: line_no, msg };
        match toks[0] {
            "vertex" => {
                let (id, cond) = match toks.as_slice() {
                    [_, id, "kirchhoff"] => (*id, VertexCondition::Kirchhoff),
                    [_, id, "dft"] => (*id, VertexCondition::Dft),
                    [_, id, "custom", file] => {
                        let path = match base_dir {
                            Some(dir) => dir.join(file),
                            None => Path::new(file).to_path_buf(),
                        };
                        let (a, b) = read_matrix_pair(&path)?;
                        (*id, VertexCondition::MatrixPair { a, b })
                    }
                    _ => {
                        return Err(bad(
                            "expected `vertex <id> kirchhoff|dft|custom <file>`".into()
                        ))
                    }
                };
                desc = desc.vertex(id, cond);
            }
            "bond" => {
                let [_, id, from, to, len] = toks.as_slice() else {
                    return Err(bad("expected `bond <id> <from> <to> <length>`".into()));
                };
                let length = parse_length(len).ok_or_else(|| bad(format!("bad length `{len}`")))?;
                desc = desc.bond(id, from, to, length);
            }
            other => return Err(bad(format!("unknown record `{other}`"))),
        }
    }
    Ok(desc)
}

pub fn load_graph(path: &Path) -> Result<MetricGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let desc = parse_graph(&text, path.parent())?;
    build_graph(&desc)
}

fn parse_entry(tok: &str) -> Option<C64> {
    let (re, im) = tok.split_once(',').unwrap_or((tok, "0"));
    Some(C64::new(re.trim().parse().ok()?, im.trim().parse().ok()?))
}

pub fn read_matrix_pair(path: &Path) -> Result<(CMatrix, CMatrix)> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows: Vec<(usize, Vec<C64>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(parse_entry)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("{}: bad matrix entry", path.display()),
            })?;
        rows.push((i + 1, row));
    }
    let d = rows.first().map_or(0, |r| r.1.len());
    if d == 0 || rows.len() != 2 * d {
        return Err(Error::Parse {
            line: rows.last().map_or(1, |r| r.0),
            msg: format!(
                "{}: expected {} rows of {} entries",
                path.display(),
                2 * d.max(1),
                d.max(1)
            ),
        });
    }
    if let Some((line, _)) = rows.iter().find(|r| r.1.len() != d) {
        return Err(Error::Parse {
            line: *line,
            msg: format!("{}: row length differs from {d}", path.display()),
        });
    }
    let a = CMatrix::from_fn(d, d, |i, j| rows[i].1[j]);
    let b = CMatrix::from_fn(d, d, |i, j| rows[d + i].1[j]);
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths() {
        let l = parse_length("1/3").unwrap();
        assert_eq!(l.exact, Some(Rational64::new(1, 3)));
        let l = parse_length("0.25").unwrap();
        assert_eq!(l.exact, Some(Rational64::new(1, 4)));
        assert_eq!(l.value, 0.25);
        assert!(parse_length("1.4142135623730951").unwrap().exact.is_none());
        assert!(parse_length("abc").is_none());
        assert!(parse_length("1/0").is_none());
    }

    #[test]
    fn parses_a_star() {
        let text = "# three-star\nvertex c kirchhoff\nvertex a kirchhoff # leaf\n\
                    vertex b dft\nbond e1 c a 1\nbond e2 c b 2.5\n";
        let g = build_graph(&parse_graph(text, None).unwrap()).unwrap();
        assert_eq!(g.num_bonds(), 2);
        assert_eq!(g.vertices()[0].degree(), 2);
    }

    #[test]
    fn reports_the_line() {
        let err = parse_graph("vertex a kirchhoff\nbond e a\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }
}
