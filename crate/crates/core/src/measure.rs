//! Squared-modulus measure on superposition coefficients and on subsets of
//! a state's labels.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{Amplitude, BasisLabel, RecordRegister, StateVector, Symbol, NORM_TOL};

/// Measure of a branch subset, carried both linearly and as a natural log.
///
/// The log form is authoritative for multinomial class computations, where
/// the linear value underflows long before the log does.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureValue {
    linear: f64,
    log: f64,
}

impl MeasureValue {
    pub const ZERO: MeasureValue = MeasureValue { linear: 0.0, log: f64::NEG_INFINITY };
    pub const ONE: MeasureValue = MeasureValue { linear: 1.0, log: 0.0 };

    pub fn from_linear(linear: f64) -> Self {
        debug_assert!(linear >= 0.0, "negative measure {linear}");
        let linear = linear.max(0.0);
        Self { linear, log: linear.ln() }
    }

    pub fn from_log(log: f64) -> Self {
        Self { linear: log.exp(), log }
    }

    pub fn linear(&self) -> f64 {
        self.linear
    }

    pub fn log(&self) -> f64 {
        self.log
    }

    pub fn is_zero(&self) -> bool {
        self.linear == 0.0
    }

    /// `1 - self`, computed from the log form when that keeps precision.
    pub fn complement(&self) -> MeasureValue {
        if self.log < -0.5 {
            MeasureValue::from_linear(-self.log.exp_m1())
        } else {
            MeasureValue::from_linear((1.0 - self.linear).max(0.0))
        }
    }
}

/// Streaming `ln(sum exp(x_k))` with a running maximum shift.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self { max: f64::NEG_INFINITY, scaled: 0.0 }
    }
}

impl LogSumExp {
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled += (x - self.max).exp();
        }
    }

    pub fn ln(&self) -> f64 {
        if self.scaled == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }

    pub fn value(&self) -> MeasureValue {
        MeasureValue::from_log(self.ln())
    }
}

/// `|x|^2`. Depends on `x` only through its modulus.
pub fn coeff_measure(x: Amplitude) -> MeasureValue {
    MeasureValue::from_linear(x.norm_sqr())
}

/// Label-local predicate selecting a subset of a superposition.
#[derive(Clone, Debug, PartialEq)]
pub enum SubsetSelector {
    All,
    Labels(BTreeSet<BasisLabel>),
    Memory(RecordRegister),
    Object(Vec<Symbol>),
    /// Memory registers whose outcome occupation numbers equal the vector
    /// (entry `i` counts `Symbol::Outcome(i + 1)`).
    RecordCounts(Vec<u64>),
    Not(Box<SubsetSelector>),
    AnyOf(Vec<SubsetSelector>),
}

impl SubsetSelector {
    pub fn labels(labels: impl IntoIterator<Item = BasisLabel>) -> Self {
        SubsetSelector::Labels(labels.into_iter().collect())
    }

    pub fn complement(self) -> Self {
        SubsetSelector::Not(Box::new(self))
    }

    pub fn matches(&self, label: &BasisLabel) -> bool {
        match self {
            SubsetSelector::All => true,
            SubsetSelector::Labels(set) => set.contains(label),
            SubsetSelector::Memory(reg) => &label.memory == reg,
            SubsetSelector::Object(obj) => &label.object == obj,
            SubsetSelector::RecordCounts(counts) => {
                let mut seen = vec![0u64; counts.len()];
                for s in label.memory.symbols() {
                    match s {
                        Symbol::Outcome(i) if (*i as usize) >= 1 && (*i as usize) <= counts.len() => {
                            seen[*i as usize - 1] += 1;
                        }
                        _ => return false,
                    }
                }
                &seen == counts
            }
            SubsetSelector::Not(inner) => !inner.matches(label),
            SubsetSelector::AnyOf(parts) => parts.iter().any(|p| p.matches(label)),
        }
    }
}

/// Sum of `|amplitude|^2` over labels matched by `sel`.
pub fn subset_measure(s: &StateVector, sel: &SubsetSelector) -> MeasureValue {
    let total = s
        .terms()
        .iter()
        .filter(|(label, _)| sel.matches(label))
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>();
    MeasureValue::from_linear(total)
}

/// Largest partition accepted by [`verify_additivity`]; every one of the
/// `2^k` unions is checked.
pub const MAX_PARTITION_PARTS: usize = 16;

/// Checks that the measure of every union of partition parts equals the sum
/// of the part measures, and that the parts cover the whole state.
///
/// The partition must be pairwise disjoint and exhaustive over the labels of
/// `s`.
pub fn verify_additivity(s: &StateVector, partition: &[SubsetSelector]) -> Result<bool> {
    if partition.len() > MAX_PARTITION_PARTS {
        return Err(Error::Partition(format!(
            "{} parts exceed the limit of {MAX_PARTITION_PARTS}",
            partition.len()
        )));
    }
    for label in s.terms().keys() {
        let hits = partition.iter().filter(|p| p.matches(label)).count();
        if hits > 1 {
            return Err(Error::Partition(format!("{label} is selected by {hits} parts")));
        }
        if hits == 0 {
            return Err(Error::Partition(format!("{label} is not covered")));
        }
    }

    let parts: Vec<f64> = partition.iter().map(|p| subset_measure(s, p).linear()).collect();
    for mask in 1u32..(1u32 << partition.len()) {
        let chosen: Vec<SubsetSelector> = partition
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .map(|(_, p)| p.clone())
            .collect();
        let merged = subset_measure(s, &SubsetSelector::AnyOf(chosen)).linear();
        let summed: f64 = (0..partition.len())
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| parts[k])
            .sum();
        if (merged - summed).abs() > NORM_TOL {
            return Ok(false);
        }
    }
    let total: f64 = parts.iter().sum();
    Ok((total - 1.0).abs() <= NORM_TOL)
}
