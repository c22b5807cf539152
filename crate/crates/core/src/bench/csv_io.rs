use std::collections::HashSet;
use std::io::{Read, Write};

use crate::cost::NoiseLevel;
use crate::optim::Method;

use super::{BenchError, CellKey, RunRecord, SummaryRow};

pub const RUNS_HEADER: [&str; 6] = ["problem", "optimizer", "noise", "run_index", "units", "best_cost"];
pub const SUMMARY_HEADER: [&str; 10] = [
    "problem",
    "optimizer",
    "noise",
    "n_selected",
    "min",
    "q1",
    "median",
    "q3",
    "max",
    "final_mean",
];

/// One line of runs.csv.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub cell: CellKey,
    pub run_index: usize,
    pub units: u64,
    pub best_cost: f64,
}

/// `x` with 9 significant digits in the style of C's `%.9g`: fixed notation
/// for decimal exponents in [−4, 9), scientific otherwise, trailing zeros
/// removed.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs());
    }
    let decimals = (8 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to the precision [`format_float`] writes.
pub fn quantize(x: f64) -> f64 {
    format_float(x).parse().unwrap_or(x)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn csv_err(e: csv::Error) -> BenchError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => BenchError::Io(io),
        other => BenchError::Csv {
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

/// One row per trace point, records in the given order.
pub fn write_runs_csv<W: Write>(records: &[RunRecord], w: W) -> Result<(), BenchError> {
    let mut out = writer(w);
    out.write_record(RUNS_HEADER).map_err(csv_err)?;
    for r in records {
        for p in &r.run.trace {
            out.write_record([
                r.problem.as_str(),
                r.optimizer.name(),
                r.noise.name(),
                &r.run_index.to_string(),
                &p.units.to_string(),
                &format_float(p.best_cost),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], w: W) -> Result<(), BenchError> {
    let mut out = writer(w);
    out.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for r in rows {
        let s = &r.stats;
        out.write_record([
            r.cell.problem.as_str(),
            r.cell.optimizer.name(),
            r.cell.noise.name(),
            &r.n_selected.to_string(),
            &format_float(s.min),
            &format_float(s.q1),
            &format_float(s.median),
            &format_float(s.q3),
            &format_float(s.max),
            &format_float(r.final_mean),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Parses runs.csv. Rejects a wrong header, malformed fields, a missing
/// final newline (truncation), runs split over non-adjacent lines, and
/// traces whose units do not increase or whose best cost increases.
pub fn read_runs_csv<R: Read>(mut r: R) -> Result<Vec<RunRow>, BenchError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let at = |line: u64, message: String| BenchError::Csv { line, message };
    if text.is_empty() {
        return Err(at(1, "empty file, expected header".into()));
    }
    if !text.ends_with('\n') {
        return Err(at(
            text.lines().count() as u64,
            "incomplete final line (file truncated?)".into(),
        ));
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| at(1, "missing header".into()))?
        .map_err(|e| at(1, e.to_string()))?;
    if header.iter().ne(RUNS_HEADER) {
        return Err(at(1, format!("expected header {:?}", RUNS_HEADER.join(","))));
    }

    let mut rows: Vec<RunRow> = Vec::new();
    let mut seen: HashSet<(CellKey, usize)> = HashSet::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            at(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != RUNS_HEADER.len() {
            return Err(at(
                line,
                format!("expected {} fields, found {}", RUNS_HEADER.len(), rec.len()),
            ));
        }
        let field = |i: usize| &rec[i];
        if field(0).is_empty() {
            return Err(at(line, "empty problem name".into()));
        }
        let optimizer: Method = field(1)
            .parse()
            .map_err(|e: crate::optim::OptimError| at(line, e.to_string()))?;
        let noise: NoiseLevel = field(2)
            .parse()
            .map_err(|e: crate::cost::CostError| at(line, e.to_string()))?;
        let run_index: usize = field(3)
            .parse()
            .map_err(|_| at(line, format!("bad run_index {:?}", field(3))))?;
        let units: u64 = field(4)
            .parse()
            .map_err(|_| at(line, format!("bad units {:?}", field(4))))?;
        let best_cost: f64 = field(5)
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| at(line, format!("bad best_cost {:?}", field(5))))?;
        let row = RunRow {
            cell: CellKey {
                problem: field(0).to_string(),
                optimizer,
                noise,
            },
            run_index,
            units,
            best_cost,
        };
        match rows.last() {
            Some(prev) if prev.cell == row.cell && prev.run_index == row.run_index => {
                if row.units <= prev.units {
                    return Err(at(line, "units must increase within a run".into()));
                }
                if row.best_cost > prev.best_cost {
                    return Err(at(line, "best_cost increased within a run".into()));
                }
            }
            _ => {
                if !seen.insert((row.cell.clone(), row.run_index)) {
                    return Err(at(line, format!("run {} of {} is split", row.run_index, row.cell)));
                }
            }
        }
        rows.push(row);
    }
    Ok(rows)
}
