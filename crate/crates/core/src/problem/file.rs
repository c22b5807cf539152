//! Text format for custom problem instances.
//!
//! ```text
//! # comment
//! qubits = 3        # optional; checked against the word lengths
//! 1.0   III
//! 0.25  IZI
//! 0.15  IIH
//! ```
//!
//! Each term line is `<coefficient> <word>`. A coefficient is a decimal
//! float or a complex literal `a+bi` / `a-bi`. Words use the letters
//! I, X, Y, Z, H with the first letter acting on qubit 0.

use num_complex::Complex64;

use super::{LinearCombinationOperator, LinearSystemProblem, ProblemError, UnitaryWord};

pub fn parse_problem(name: &str, text: &str) -> Result<LinearSystemProblem, ProblemError> {
    let err = |line: usize, message: String| ProblemError::Parse { line, message };
    let mut declared: Option<usize> = None;
    let mut terms: Vec<(Complex64, UnitaryWord)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            if key.trim() != "qubits" {
                return Err(err(line_no, format!("unknown key {:?}", key.trim())));
            }
            let n: usize = value
                .trim()
                .parse()
                .map_err(|_| err(line_no, format!("bad qubit count {:?}", value.trim())))?;
            if n == 0 {
                return Err(err(line_no, "qubit count must be positive".into()));
            }
            declared = Some(n);
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(coef), Some(word), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(line_no, "expected `<coefficient> <word>`".into()));
        };
        let c = parse_complex(coef).ok_or_else(|| err(line_no, format!("bad coefficient {coef:?}")))?;
        let w: UnitaryWord = word.parse().map_err(|e| err(line_no, format!("{e}")))?;
        let expected = declared.or_else(|| terms.first().map(|(_, w)| w.n_qubits()));
        if let Some(n) = expected {
            if w.n_qubits() != n {
                return Err(err(
                    line_no,
                    format!("word {word} has {} qubits, expected {n}", w.n_qubits()),
                ));
            }
        }
        terms.push((c, w));
    }
    if terms.is_empty() {
        return Err(err(text.lines().count().max(1), "no terms".into()));
    }
    Ok(LinearSystemProblem::new(name, LinearCombinationOperator::new(terms)?))
}

fn parse_complex(s: &str) -> Option<Complex64> {
    if let Ok(re) = s.parse::<f64>() {
        return Some(Complex64::new(re, 0.0));
    }
    let body = s.strip_suffix('i')?;
    // Split at the last sign that is not a leading sign or an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse().ok()?;
            let im_str = &body[k..];
            let im = match im_str {
                "+" => 1.0,
                "-" => -1.0,
                _ => im_str.parse().ok()?,
            };
            Some(Complex64::new(re, im))
        }
        None => Some(Complex64::new(0.0, body.parse().ok()?)),
    }
}
