use std::collections::BTreeMap;

/// One Picard step.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub window: f64,
    pub diff_norm: f64,
    /// `diff_norm / previous diff_norm`; NaN on the first step of a window.
    pub contraction: f64,
}

/// Named scalar diagnostics, pass/fail verdicts, and the iteration history of a solve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsReport {
    pub values: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, bool>,
    pub iterations: Vec<IterationRecord>,
}

impl DiagnosticsReport {
    pub fn set(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), v);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn verdict(&mut self, key: &str, ok: bool) {
        self.verdicts.insert(key.to_string(), ok);
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| *v)
    }
}
