/// What a ledger entry paid for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallKind {
    Cost,
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LedgerEntry {
    pub kind: CallKind,
    pub units: u64,
}

/// Counts quantum resources in cost-function-evaluation equivalents.
///
/// One cost evaluation is one unit; one gradient is two units per
/// parameter.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvaluationLedger {
    units: u64,
    log: Vec<LedgerEntry>,
}

impl EvaluationLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn units(&self) -> u64 {
        self.units
    }

    pub fn log(&self) -> &[LedgerEntry] {
        &self.log
    }

    pub fn charge_cost(&mut self) {
        self.charge(CallKind::Cost, 1);
    }

    pub fn charge_gradient(&mut self, param_count: usize) {
        self.charge(CallKind::Gradient, gradient_units(param_count));
    }

    fn charge(&mut self, kind: CallKind, units: u64) {
        self.units += units;
        self.log.push(LedgerEntry { kind, units });
    }

    pub fn count(&self, kind: CallKind) -> usize {
        self.log.iter().filter(|e| e.kind == kind).count()
    }
}

pub fn gradient_units(param_count: usize) -> u64 {
    2 * param_count as u64
}
