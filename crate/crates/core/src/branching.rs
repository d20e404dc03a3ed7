//! Sequential measurement of `N` identically prepared systems.
//!
//! Each step records the measured outcome into the observer register:
//! `|a_i>|[r]> -> |a_i>|[r a_i]>`. Repeating this over `N` systems prepared
//! in `sum_i C_i |a_i>` gives `M^N` branches with amplitudes
//! `C_p C_q ... C_r`. Branches sharing occupation numbers form a count class
//! whose measure is the multinomial `N!/prod(n_i!) * prod |C_i|^(2 n_i)`.
//!
//! Exact enumeration is for small `N`; count-class functions work in log
//! space at any `N`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::hilbert::{Amplitude, BasisLabel, RecordRegister, Roles, StateVector, Symbol, NORM_TOL};
use crate::measure::MeasureValue;

/// Largest branch count accepted by [`run_sequence`].
pub const EXACT_MODE_LIMIT: u128 = 1 << 20;

/// Largest `N` for which [`class_count`] also returns the exact integer.
pub const EXACT_COUNT_LIMIT: u64 = 1000;

/// Preparation coefficients `C_1 .. C_M` of each measured system.
///
/// The measures `|C_i|^2` are stored alongside the amplitudes; when built
/// from measures they are kept bit-for-bit rather than re-squared.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    amplitudes: Vec<Amplitude>,
    measures: Vec<f64>,
}

impl Coefficients {
    pub fn new(values: Vec<Amplitude>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidCoefficients("at least one coefficient is required".into()));
        }
        if values.len() > u16::MAX as usize {
            return Err(Error::InvalidCoefficients("too many outcomes".into()));
        }
        if values.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidCoefficients("non-finite coefficient".into()));
        }
        let total: f64 = values.iter().map(|c| c.norm_sqr()).sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidCoefficients(format!(
                "sum of |C_i|^2 is {total}, expected 1"
            )));
        }
        let measures = values.iter().map(|c| c.norm_sqr()).collect();
        Ok(Self { amplitudes: values, measures })
    }

    /// Real nonnegative amplitudes `sqrt(p_i)` from measures `p_i`.
    pub fn from_measures(measures: &[f64]) -> Result<Self> {
        if let Some(p) = measures.iter().find(|p| p.is_nan() || **p < 0.0) {
            return Err(Error::InvalidCoefficients(format!("negative or NaN measure {p}")));
        }
        let mut coeffs =
            Self::new(measures.iter().map(|p| Amplitude::new(p.sqrt(), 0.0)).collect())?;
        coeffs.measures = measures.to_vec();
        Ok(coeffs)
    }

    /// `M` equal measures `1/M`.
    pub fn uniform(m: usize) -> Result<Self> {
        Self::from_measures(&vec![1.0 / m as f64; m])
    }

    pub fn values(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// `C_outcome`, 1-based.
    pub fn get(&self, outcome: usize) -> Amplitude {
        self.amplitudes[outcome - 1]
    }

    /// `|C_i|^2` in outcome order.
    pub fn measures(&self) -> Vec<f64> {
        self.measures.clone()
    }

    /// Outcome alphabet `a_1 .. a_M`.
    pub fn alphabet(&self) -> Vec<Symbol> {
        (1..=self.amplitudes.len() as u16).map(Symbol::Outcome).collect()
    }
}

/// Occupation numbers `(n_1, ..., n_M)` of a record; `N = sum n_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CountClass(Vec<u64>);

impl CountClass {
    pub fn new(counts: Vec<u64>) -> Self {
        Self(counts)
    }

    pub fn from_signed(counts: &[i64]) -> Result<Self> {
        counts
            .iter()
            .map(|&n| {
                u64::try_from(n).map_err(|_| Error::InvalidClass(format!("negative count {n}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn outcomes(&self) -> usize {
        self.0.len()
    }

    /// `n_i / N`; all zeros when `N = 0`.
    pub fn fractions(&self) -> Vec<f64> {
        let n = self.total();
        if n == 0 {
            return vec![0.0; self.0.len()];
        }
        self.0.iter().map(|&k| k as f64 / n as f64).collect()
    }
}

impl std::fmt::Display for CountClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("(")?;
        for (k, n) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str(")")
    }
}

/// One term of the post-measurement superposition. The object kets match
/// the register symbol for symbol, so only the register is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub register: RecordRegister,
    pub amplitude: Amplitude,
}

impl Branch {
    pub fn root() -> Self {
        Self { register: RecordRegister::blank(), amplitude: Amplitude::new(1.0, 0.0) }
    }

    /// The branch that records `outcome` on one more system.
    pub fn record(&self, outcome: usize, coeffs: &Coefficients) -> Branch {
        Branch {
            register: self.register.appended(Symbol::Outcome(outcome as u16)),
            amplitude: self.amplitude * coeffs.get(outcome),
        }
    }

    pub fn measure(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

/// Exact branch enumeration after `N` sequential measurements.
#[derive(Clone, Debug)]
pub struct BranchEnsemble {
    pub n: u64,
    pub coeffs: Coefficients,
    pub branches: Vec<Branch>,
}

impl BranchEnsemble {
    pub fn total_measure(&self) -> f64 {
        self.branches.iter().map(Branch::measure).sum()
    }

    /// Summed branch measure per count class.
    pub fn class_totals(&self) -> BTreeMap<CountClass, f64> {
        let mut totals = BTreeMap::new();
        for b in &self.branches {
            *totals.entry(class_of(b, self.coeffs.len())).or_insert(0.0) += b.measure();
        }
        totals
    }

    /// The ensemble as a joint state; object kets are retained alongside the
    /// register.
    pub fn to_state(&self) -> Result<StateVector> {
        let alphabet = self.coeffs.alphabet();
        StateVector::new(
            self.branches.iter().map(|b| {
                (BasisLabel::new(b.register.symbols().to_vec(), b.register.clone()), b.amplitude)
            }),
            Roles::joint(alphabet.clone(), alphabet),
        )
    }
}

/// Adds a fresh object system prepared in `sum_i C_i |a_i>` after the
/// existing object systems of every term.
pub fn attach_system(s: &StateVector, coeffs: &Coefficients) -> Result<StateVector> {
    let alphabet = coeffs.alphabet();
    let mut terms = Vec::with_capacity(s.dimension() * coeffs.len());
    for (label, a) in s.terms() {
        for (k, c) in coeffs.values().iter().enumerate() {
            let mut object = label.object.clone();
            object.push(alphabet[k]);
            terms.push((BasisLabel::new(object, label.memory.clone()), a * c));
        }
    }
    let roles = Roles {
        object: Some(alphabet.iter().copied().collect()),
        memory: s.roles().memory.clone(),
    };
    StateVector::new(terms, roles)
}

/// Records the most recently attached object system into the memory
/// register of every term. Amplitudes are untouched.
pub fn measure_step(s: &StateVector, coeffs: &Coefficients) -> Result<StateVector> {
    let (min, max) = s
        .terms()
        .keys()
        .map(|l| l.memory.len())
        .fold((usize::MAX, 0), |(lo, hi), k| (lo.min(k), hi.max(k)));
    if min != max {
        return Err(Error::HistoryDepth { min, max });
    }
    let mut terms = Vec::with_capacity(s.dimension());
    for (label, a) in s.terms() {
        let outcome = match label.object.last() {
            Some(Symbol::Outcome(i)) if (1..=coeffs.len()).contains(&(*i as usize)) => *i,
            _ => {
                return Err(Error::Label(format!("{label} has no measurable object system")));
            }
        };
        let memory = label.memory.appended(Symbol::Outcome(outcome));
        terms.push((BasisLabel::new(label.object.clone(), memory), *a));
    }
    StateVector::new(terms, s.roles().clone())
}

/// All `M^N` branches of `N` sequential measurements, zero-amplitude
/// branches pruned.
pub fn run_sequence(coeffs: &Coefficients, n: u64) -> Result<BranchEnsemble> {
    let m = coeffs.len() as u128;
    let branches_needed = (0..n).try_fold(1u128, |acc, _| {
        let next = acc.saturating_mul(m);
        (next <= EXACT_MODE_LIMIT).then_some(next)
    });
    if branches_needed.is_none() {
        let branches = m.checked_pow(n.min(u32::MAX as u64) as u32).unwrap_or(u128::MAX);
        return Err(Error::SizeGuard { branches, limit: EXACT_MODE_LIMIT });
    }

    let live: Vec<usize> = (1..=coeffs.len())
        .filter(|&i| coeffs.get(i) != Amplitude::default())
        .collect();
    let mut branches = vec![Branch::root()];
    for _ in 0..n {
        branches = branches
            .iter()
            .flat_map(|b| live.iter().map(move |&i| b.record(i, coeffs)))
            .collect();
    }
    Ok(BranchEnsemble { n, coeffs: coeffs.clone(), branches })
}

/// Occupation numbers of a branch's register over outcomes `1..=m`.
pub fn class_of(b: &Branch, m: usize) -> CountClass {
    let mut counts = vec![0u64; m];
    for s in b.register.symbols() {
        if let Symbol::Outcome(i) = s {
            counts[*i as usize - 1] += 1;
        }
    }
    CountClass(counts)
}

/// Number of branches in a class.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplicity {
    /// `N!/prod(n_i!)` exactly, when `N <= EXACT_COUNT_LIMIT`.
    pub exact: Option<BigUint>,
    /// `ln(N!/prod(n_i!))` from log-gamma.
    pub ln: f64,
}

pub fn class_count(c: &CountClass) -> Multiplicity {
    let n = c.total();
    let ln = ln_factorial(n) - c.counts().iter().map(|&k| ln_factorial(k)).sum::<f64>();
    let exact = (n <= EXACT_COUNT_LIMIT).then(|| exact_multinomial(c.counts()));
    Multiplicity { exact, ln }
}

/// Product of successive binomials; every partial product is an integer.
fn exact_multinomial(counts: &[u64]) -> BigUint {
    let mut result = BigUint::from(1u32);
    let mut placed = 0u64;
    for &k in counts {
        for j in 1..=k {
            placed += 1;
            result *= placed;
            result /= j;
        }
    }
    result
}

/// Class measure in linear and log form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassMeasure {
    pub measure: MeasureValue,
    /// The class records an outcome whose coefficient is zero; its measure is
    /// zero under the `0^0 = 1` convention.
    pub excluded: bool,
}

pub fn class_measure(coeffs: &Coefficients, c: &CountClass) -> Result<ClassMeasure> {
    if c.outcomes() != coeffs.len() {
        return Err(Error::InvalidClass(format!(
            "class has {} outcomes, coefficients have {}",
            c.outcomes(),
            coeffs.len()
        )));
    }
    let table = ClassTable::new(coeffs, c.total());
    let log = table.ln_measure(c.counts());
    Ok(ClassMeasure {
        measure: if log == f64::NEG_INFINITY { MeasureValue::ZERO } else { MeasureValue::from_log(log) },
        excluded: log == f64::NEG_INFINITY,
    })
}

/// Precomputed `ln k!` for `k <= N` and `ln |C_i|^2`, for sweeping many
/// classes at the same `N`.
#[derive(Clone, Debug)]
pub struct ClassTable {
    n: u64,
    ln_fact: Vec<f64>,
    ln_p: Vec<f64>,
}

impl ClassTable {
    pub fn new(coeffs: &Coefficients, n: u64) -> Self {
        Self {
            n,
            ln_fact: (0..=n).map(ln_factorial).collect(),
            ln_p: coeffs.measures().iter().map(|p| p.ln()).collect(),
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn outcomes(&self) -> usize {
        self.ln_p.len()
    }

    /// `ln m(n_1..n_M)`; `-inf` if a zero coefficient is recorded.
    pub fn ln_measure(&self, counts: &[u64]) -> f64 {
        let mut acc = self.ln_fact[self.n as usize];
        for (&k, &lp) in counts.iter().zip(&self.ln_p) {
            if k == 0 {
                continue;
            }
            if lp == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            acc += k as f64 * lp - self.ln_fact[k as usize];
        }
        acc
    }
}

/// Calls `visit` on every class of `N` over `m` outcomes with
/// `lo[i] <= n_i <= hi[i]`, in ascending lexicographic order of
/// `(n_1, ..., n_{M-1})`.
pub fn for_each_class_in(
    m: usize,
    n: u64,
    lo: &[u64],
    hi: &[u64],
    mut visit: impl FnMut(&[u64]),
) {
    assert!(m >= 1 && lo.len() == m && hi.len() == m);
    let hi: Vec<u64> = hi.iter().map(|&h| h.min(n)).collect();
    // suffix sums of the bounds for feasibility pruning
    let mut lo_tail = vec![0u64; m + 1];
    let mut hi_tail = vec![0u64; m + 1];
    for i in (0..m).rev() {
        lo_tail[i] = lo_tail[i + 1] + lo[i];
        hi_tail[i] = hi_tail[i + 1] + hi[i];
    }
    if lo_tail[0] > n || hi_tail[0] < n {
        return;
    }
    let mut counts = vec![0u64; m];
    fill(0, n, lo, &hi, &lo_tail, &hi_tail, &mut counts, &mut visit);
}

#[allow(clippy::too_many_arguments)]
fn fill(
    pos: usize,
    remaining: u64,
    lo: &[u64],
    hi: &[u64],
    lo_tail: &[u64],
    hi_tail: &[u64],
    counts: &mut [u64],
    visit: &mut impl FnMut(&[u64]),
) {
    let m = counts.len();
    if pos == m - 1 {
        counts[pos] = remaining;
        visit(counts);
        return;
    }
    let start = lo[pos].max(remaining.saturating_sub(hi_tail[pos + 1]));
    let end = hi[pos].min(remaining - lo_tail[pos + 1].min(remaining));
    for v in start..=end {
        counts[pos] = v;
        fill(pos + 1, remaining - v, lo, hi, lo_tail, hi_tail, counts, visit);
    }
}

/// Every class of `N` over `m` outcomes, in lexicographic order.
pub fn for_each_class(m: usize, n: u64, visit: impl FnMut(&[u64])) {
    for_each_class_in(m, n, &vec![0; m], &vec![n; m], visit);
}

pub fn all_classes(m: usize, n: u64) -> Vec<CountClass> {
    let mut out = Vec::new();
    for_each_class(m, n, |c| out.push(CountClass(c.to_vec())));
    out
}

/// Number of classes of `N` over `m` outcomes, `C(N + m - 1, m - 1)`,
/// saturating.
pub fn class_total(m: usize, n: u64) -> u128 {
    let k = (m as u128).saturating_sub(1);
    let mut acc: u128 = 1;
    for j in 1..=k {
        acc = match acc.checked_mul(n as u128 + j) {
            Some(v) => v / j,
            None => return u128::MAX,
        };
    }
    acc
}

/// Sum of all class measures at `N`, in log space.
pub fn total_class_measure(coeffs: &Coefficients, n: u64) -> MeasureValue {
    let table = ClassTable::new(coeffs, n);
    let mut acc = crate::measure::LogSumExp::default();
    for_each_class(coeffs.len(), n, |c| acc.add(table.ln_measure(c)));
    acc.value()
}
