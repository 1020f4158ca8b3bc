//! Matrix file formats.
//!
//! * text: first line `n m`, then `n` rows of `m` whitespace-separated reals;
//!   blank lines and lines starting with `#` are skipped.
//! * CSV: first line `n,m`, then `n` comma-separated rows.
//! * JSON: an array of `n` arrays of `m` numbers.

use std::fmt::Write as _;
use std::path::Path;

use crate::chaos::{CoefficientMatrix, SignMatrix};
use crate::error::{ChaosError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Text,
    Csv,
    Json,
}

impl MatrixFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => MatrixFormat::Csv,
            Some("json") => MatrixFormat::Json,
            _ => MatrixFormat::Text,
        }
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> ChaosError {
    ChaosError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Fields of a line with their 1-based starting columns.
fn fields(line: &str, sep: Option<char>) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    match sep {
        None => {
            let mut start = None;
            for (pos, ch) in line.char_indices() {
                match (ch.is_whitespace(), start) {
                    (false, None) => start = Some(pos),
                    (true, Some(s)) => {
                        out.push((s + 1, &line[s..pos]));
                        start = None;
                    }
                    _ => {}
                }
            }
            if let Some(s) = start {
                out.push((s + 1, &line[s..]));
            }
        }
        Some(c) => {
            let mut col = 1;
            for piece in line.split(c) {
                let lead = piece.len() - piece.trim_start().len();
                out.push((col + lead, piece.trim()));
                col += piece.len() + 1;
            }
        }
    }
    out
}

fn parse_delimited(src: &str, sep: Option<char>) -> Result<CoefficientMatrix> {
    let mut lines = src
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, 1, "empty matrix file"))?;
    let dims = fields(header, sep);
    if dims.len() != 2 {
        return Err(parse_err(hline, 1, format!("expected `n m` header, found {} fields", dims.len())));
    }
    let dim = |(col, text): (usize, &str)| -> Result<usize> {
        match text.parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(parse_err(hline, col, format!("bad dimension `{text}`"))),
        }
    };
    let (n, m) = (dim(dims[0])?, dim(dims[1])?);

    let mut data = Vec::with_capacity(n * m);
    let mut rows_seen = 0;
    let mut last_line = hline;
    for (lno, line) in lines {
        last_line = lno;
        if rows_seen == n {
            return Err(parse_err(lno, 1, format!("more than {n} rows")));
        }
        let row = fields(line, sep);
        if row.len() != m {
            return Err(parse_err(lno, 1, format!("expected {m} entries, found {}", row.len())));
        }
        for (col, text) in row {
            let v: f64 = text
                .parse()
                .map_err(|_| parse_err(lno, col, format!("`{text}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(lno, col, format!("`{text}` is not finite")));
            }
            data.push(v);
        }
        rows_seen += 1;
    }
    if rows_seen != n {
        return Err(parse_err(last_line + 1, 1, format!("expected {n} rows, found {rows_seen}")));
    }
    CoefficientMatrix::new(n, m, data)
}

pub fn parse_matrix_text(src: &str) -> Result<CoefficientMatrix> {
    parse_delimited(src, None)
}

pub fn parse_matrix_csv(src: &str) -> Result<CoefficientMatrix> {
    parse_delimited(src, Some(','))
}

pub fn parse_matrix_json(src: &str) -> Result<CoefficientMatrix> {
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(src).map_err(|e| parse_err(e.line(), e.column(), e.to_string()))?;
    if rows.is_empty() {
        return Err(parse_err(1, 1, "empty matrix"));
    }
    CoefficientMatrix::from_rows(&rows)
}

pub fn parse_matrix(src: &str, format: MatrixFormat) -> Result<CoefficientMatrix> {
    match format {
        MatrixFormat::Text => parse_matrix_text(src),
        MatrixFormat::Csv => parse_matrix_csv(src),
        MatrixFormat::Json => parse_matrix_json(src),
    }
}

/// Parses a matrix and requires every entry to be `+1` or `-1`.
pub fn parse_sign_matrix(src: &str, format: MatrixFormat) -> Result<SignMatrix> {
    SignMatrix::from_coefficients(&parse_matrix(src, format)?)
}

pub fn read_matrix(path: &Path) -> Result<CoefficientMatrix> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| ChaosError::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&src, MatrixFormat::from_path(path))
}

pub fn matrix_to_text(a: &CoefficientMatrix) -> String {
    write_delimited(a, " ")
}

pub fn matrix_to_csv(a: &CoefficientMatrix) -> String {
    write_delimited(a, ",")
}

pub fn matrix_to_json(a: &CoefficientMatrix) -> String {
    serde_json::to_string(&a.to_rows()).expect("finite matrix serializes")
}

fn write_delimited(a: &CoefficientMatrix, sep: &str) -> String {
    let mut out = format!("{}{sep}{}\n", a.rows(), a.cols());
    for row in a.to_rows() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "{}", cells.join(sep));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn text_format() {
        let a = parse_matrix_text("2 3\n1 2 3\n# comment\n\n-1 0.5 1e-3\n").unwrap();
        assert_eq!(a.to_rows(), vec![vec![1.0, 2.0, 3.0], vec![-1.0, 0.5, 1e-3]]);
    }

    #[test]
    fn csv_and_json_formats() {
        let a = parse_matrix_csv("2,2\n1, -1\n-1,1\n").unwrap();
        assert_eq!(a.data(), &[1.0, -1.0, -1.0, 1.0]);
        let b = parse_matrix_json("[[1,-1],[-1,1]]").unwrap();
        assert_eq!(a, b);
        assert!(parse_matrix_json("[[1,2],[3]]").is_err());
    }

    #[test]
    fn diagnostics_carry_position() {
        let err = parse_matrix_text("2 2\n1 2\n3 x\n").unwrap_err();
        assert_eq!(
            err,
            ChaosError::Parse {
                line: 3,
                column: 3,
                message: "`x` is not a number".into()
            }
        );
        let err = parse_matrix_csv("1,2\n1,  zz\n").unwrap_err();
        assert!(matches!(err, ChaosError::Parse { line: 2, column: 5, .. }));
        assert!(matches!(parse_matrix_text("2 2\n1 2\n"), Err(ChaosError::Parse { line: 3, .. })));
        assert!(matches!(parse_matrix_text("1 2\n1 2 3\n"), Err(ChaosError::Parse { line: 2, .. })));
        assert!(matches!(parse_matrix_text("0 2\n"), Err(ChaosError::Parse { line: 1, column: 1, .. })));
        assert!(matches!(parse_matrix_text(""), Err(ChaosError::Parse { .. })));
        assert!(matches!(parse_matrix_json("[[1,"), Err(ChaosError::Parse { line: 1, .. })));
    }

    #[test]
    fn sign_matrix_validated() {
        assert!(parse_sign_matrix("1 2\n1 -1\n", MatrixFormat::Text).is_ok());
        let err = parse_sign_matrix("1 2\n1 0.5\n", MatrixFormat::Text).unwrap_err();
        assert!(matches!(err, ChaosError::NotASign { row: 1, col: 2, .. }));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(MatrixFormat::from_path(Path::new("a.CSV")), MatrixFormat::Csv);
        assert_eq!(MatrixFormat::from_path(Path::new("a.json")), MatrixFormat::Json);
        assert_eq!(MatrixFormat::from_path(Path::new("a.txt")), MatrixFormat::Text);
    }

    proptest! {
        #[test]
        fn writers_round_trip(n in 1usize..5, m in 1usize..5, seed in prop::collection::vec(-1e6f64..1e6, 16)) {
            let a = CoefficientMatrix::new(n, m, seed[..n * m].to_vec()).unwrap();
            prop_assert_eq!(&parse_matrix_text(&matrix_to_text(&a)).unwrap(), &a);
            prop_assert_eq!(&parse_matrix_csv(&matrix_to_csv(&a)).unwrap(), &a);
            prop_assert_eq!(&parse_matrix_json(&matrix_to_json(&a)).unwrap(), &a);
        }
    }
}
