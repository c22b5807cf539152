use std::collections::HashMap;
use std::fmt;

use crate::cost::NoiseLevel;
use crate::optim::{Method, TracePoint};

use super::{BenchError, RunRecord};

/// One cell of the experiment matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub problem: String,
    pub optimizer: Method,
    pub noise: NoiseLevel,
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.problem, self.optimizer, self.noise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// One line of summary.csv.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub cell: CellKey,
    pub n_selected: usize,
    pub stats: SummaryStats,
    pub final_mean: f64,
}

/// Mean best-so-far cost on the unit grid 1..=budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCurve {
    pub values: Vec<f64>,
}

impl ConvergenceCurve {
    /// (units, mean best cost) pairs.
    pub fn points(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (i as u64 + 1, v))
    }
}

/// Order used for top-k selection: lower final cost first, NaN last, ties
/// by lower run index.
fn rank(a: (usize, f64), b: (usize, f64)) -> std::cmp::Ordering {
    let key = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
    key(a.1)
        .total_cmp(&key(b.1))
        .then(a.1.is_nan().cmp(&b.1.is_nan()))
        .then(a.0.cmp(&b.0))
}

fn top_k_positions(finals: &[(usize, f64)], k: usize) -> Result<Vec<usize>, BenchError> {
    if k > finals.len() {
        return Err(BenchError::TopK {
            k,
            available: finals.len(),
        });
    }
    let mut order: Vec<usize> = (0..finals.len()).collect();
    order.sort_by(|&i, &j| rank(finals[i], finals[j]));
    order.truncate(k);
    Ok(order)
}

/// The `k` records with the lowest final best cost, ties broken by lower
/// run index, in ranked order.
pub fn select_top_k<'a>(records: &[&'a RunRecord], k: usize) -> Result<Vec<&'a RunRecord>, BenchError> {
    let finals: Vec<(usize, f64)> = records.iter().map(|r| (r.run_index, r.final_best_cost())).collect();
    Ok(top_k_positions(&finals, k)?.into_iter().map(|i| records[i]).collect())
}

/// Quantile `q` of sorted data by linear interpolation between order
/// statistics at position q·(n − 1).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Five-number summary with linearly interpolated quartiles.
pub fn quantiles(values: &[f64]) -> Result<SummaryStats, BenchError> {
    if values.is_empty() {
        return Err(BenchError::Empty);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(SummaryStats {
        min: v[0],
        q1: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        q3: quantile(&v, 0.75),
        max: v[v.len() - 1],
    })
}

pub fn boxplot_stats(records: &[&RunRecord]) -> Result<SummaryStats, BenchError> {
    quantiles(&records.iter().map(|r| r.final_best_cost()).collect::<Vec<_>>())
}

/// Pointwise mean of the best-so-far traces on the grid 1..=budget. Each
/// trace is carried forward from its last observation and, before its first
/// record, held at its first recorded value.
pub fn average_convergence(records: &[&RunRecord], budget: u64) -> Result<ConvergenceCurve, BenchError> {
    let traces: Vec<&[TracePoint]> = records.iter().map(|r| r.run.trace.as_slice()).collect();
    if let Some(r) = records.iter().find(|r| r.run.trace.is_empty()) {
        return Err(BenchError::EmptyTrace(r.run_index));
    }
    mean_curve(&traces, budget)
}

pub(crate) fn mean_curve(traces: &[&[TracePoint]], budget: u64) -> Result<ConvergenceCurve, BenchError> {
    if traces.is_empty() {
        return Err(BenchError::Empty);
    }
    let mut values = vec![0.0; budget as usize];
    for trace in traces {
        let mut next = 0;
        let mut current = trace[0].best_cost;
        for (slot, units) in values.iter_mut().zip(1..=budget) {
            while next < trace.len() && trace[next].units <= units {
                current = trace[next].best_cost;
                next += 1;
            }
            *slot += current;
        }
    }
    let n = traces.len() as f64;
    values.iter_mut().for_each(|v| *v /= n);
    Ok(ConvergenceCurve { values })
}

/// Builds one summary row per cell, in order of first appearance, from
/// (cell, run index, final cost) triples. `top_k` is clamped to the number
/// of runs a cell has.
fn summarize(
    finals: impl IntoIterator<Item = (CellKey, usize, f64)>,
    top_k: usize,
) -> Result<Vec<SummaryRow>, BenchError> {
    let mut order: Vec<CellKey> = Vec::new();
    let mut cells: HashMap<CellKey, Vec<(usize, f64)>> = HashMap::new();
    for (cell, run, value) in finals {
        let entry = cells.entry(cell.clone()).or_insert_with(|| {
            order.push(cell);
            Vec::new()
        });
        entry.push((run, value));
    }
    order
        .into_iter()
        .map(|cell| {
            let finals = &cells[&cell];
            let k = top_k.min(finals.len());
            let chosen: Vec<f64> = top_k_positions(finals, k)?.into_iter().map(|i| finals[i].1).collect();
            Ok(SummaryRow {
                cell,
                n_selected: k,
                stats: quantiles(&chosen)?,
                final_mean: chosen.iter().sum::<f64>() / k as f64,
            })
        })
        .collect()
}

/// Summary of executed records. Final costs are rounded to the precision
/// written to runs.csv so that re-summarizing that file reproduces the
/// result exactly. Records whose trace is empty are skipped.
pub fn summarize_records(records: &[RunRecord], top_k: usize) -> Result<Vec<SummaryRow>, BenchError> {
    summarize(
        records
            .iter()
            .filter(|r| !r.run.trace.is_empty())
            .map(|r| (r.cell(), r.run_index, super::quantize(r.final_best_cost()))),
        top_k,
    )
}

/// Summary of rows read back from runs.csv; a run's final cost is its last
/// row.
pub fn summarize_rows(rows: &[super::RunRow], top_k: usize) -> Result<Vec<SummaryRow>, BenchError> {
    let mut last: Vec<(CellKey, usize, f64)> = Vec::new();
    for row in rows {
        match last.last_mut() {
            Some((cell, run, value)) if *cell == row.cell && *run == row.run_index => *value = row.best_cost,
            _ => last.push((row.cell.clone(), row.run_index, row.best_cost)),
        }
    }
    summarize(last, top_k)
}
