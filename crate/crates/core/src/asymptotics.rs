//! Large-`N` behaviour of the count-class measure.
//!
//! With Stirling's form `ln n! ~ n ln n - n`, the Lagrangian
//!
//! ```text
//! F = N ln N - N - sum_i (n_i ln n_i - n_i) + sum_i n_i ln|C_i|^2 - lambda (N - sum_i n_i)
//! ```
//!
//! is stationary at `n_i = e^lambda |C_i|^2` with `e^lambda = N`, so the
//! maximizing frequencies are `n_i / N = |C_i|^2`. That closed form is
//! [`lagrange_fractions`]. Every numerical class measure here uses exact
//! log-gamma instead of Stirling; [`stirling_objective`] exists only to
//! evaluate `F` itself.
//!
//! Two readings of "the rest of the measure vanishes" are computed:
//!
//! * [`residual_measure`] is `1 - m(class nearest N |C_i|^2)`. It does not
//!   vanish: that single class carries measure of order `N^{-(M-1)/2}`, so the
//!   residual grows towards 1.
//! * [`typicality_measure`] sums all classes whose frequencies are within
//!   `epsilon` of `|C_i|^2`. It tends to 1 and is bounded below by Chebyshev.

use serde::Serialize;

use statrs::function::factorial::ln_factorial;

use crate::branching::{for_each_class, ClassTable, Coefficients, CountClass};
use crate::error::{Error, Result};
use crate::measure::{LogSumExp, MeasureValue};

/// Above this `N`, [`modal_class`] switches from exhaustive search to
/// exchange ascent.
pub const EXHAUSTIVE_LIMIT: u64 = 1000;

/// Boundary slack on `|n_i/N - |C_i|^2| <= epsilon`, so that classes lying
/// exactly on the boundary are not lost to rounding of `n_i/N`.
pub const TYPICALITY_SLACK: f64 = 1e-12;

const TIE_RTOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticSolution {
    /// Maximizing frequencies `n_i / N`.
    pub fractions: Vec<f64>,
    /// `lambda = ln N`, when `N` is known.
    pub lagrange_multiplier: Option<f64>,
    /// `F` at the stationary point, when `N` is known.
    pub objective: Option<f64>,
}

/// Stationary point of the Stirling Lagrangian.
///
/// Without `n` the result is per unit: only the fractions are reported and
/// `lambda` stays symbolic through `e^lambda = N`.
pub fn lagrange_fractions(coeffs: &Coefficients, n: Option<u64>) -> AsymptoticSolution {
    let fractions = coeffs.measures();
    let (lagrange_multiplier, objective) = match n {
        Some(n) if n > 0 => {
            let total = n as f64;
            let lambda = total.ln();
            let counts: Vec<f64> = fractions.iter().map(|p| lambda.exp() * p).collect();
            let ln_p: Vec<f64> = fractions.iter().map(|p| p.ln()).collect();
            (Some(lambda), Some(stirling_objective(total, &counts, &ln_p, lambda)))
        }
        _ => (None, None),
    };
    AsymptoticSolution { fractions, lagrange_multiplier, objective }
}

/// `F(n, lambda)` with Stirling's approximation, for real-valued counts.
/// Terms with `n_i = 0` contribute nothing (`0 ln 0 = 0`).
pub fn stirling_objective(total: f64, counts: &[f64], ln_p: &[f64], lambda: f64) -> f64 {
    let mut f = total * total.ln() - total;
    let mut sum = 0.0;
    for (&k, &lp) in counts.iter().zip(ln_p) {
        sum += k;
        if k > 0.0 {
            f -= k * k.ln() - k;
            f += k * lp;
        }
    }
    f - lambda * (total - sum)
}

/// Largest-remainder apportionment of `N |C_i|^2` to integers summing to
/// `N`. Ties in the remainder go to the lower index; outcomes with a zero
/// coefficient never receive a unit.
pub fn apportion(coeffs: &Coefficients, n: u64) -> CountClass {
    let p = coeffs.measures();
    let quotas: Vec<f64> = p.iter().map(|p| n as f64 * p).collect();
    let mut counts: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    if assigned > n {
        // only reachable through rounding of quotas summing above N
        let mut excess = assigned - n;
        for c in counts.iter_mut().rev() {
            let cut = excess.min(*c);
            *c -= cut;
            excess -= cut;
        }
    }
    let mut leftover = n.saturating_sub(counts.iter().sum());
    let mut order: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    order.sort_by(|&i, &j| {
        let ri = quotas[i] - quotas[i].floor();
        let rj = quotas[j] - quotas[j].floor();
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    while leftover > 0 {
        for &i in &order {
            if leftover == 0 {
                break;
            }
            counts[i] += 1;
            leftover -= 1;
        }
    }
    CountClass::new(counts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModalClass {
    pub class: CountClass,
    pub measure: MeasureValue,
    /// Other classes whose measure equals the maximum.
    pub tied_with: Vec<CountClass>,
}

impl ModalClass {
    pub fn tie(&self) -> bool {
        !self.tied_with.is_empty()
    }
}

fn is_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// The count class of maximal measure at `N`.
///
/// Exhaustive in log space for `N <= EXHAUSTIVE_LIMIT`, scanning classes in
/// lexicographic order so that the first maximum wins ties. Above the limit
/// the search climbs by single-unit exchanges from the apportioned class;
/// the multinomial is log-concave under such exchanges, so the climb ends at
/// the global maximum.
pub fn modal_class(coeffs: &Coefficients, n: u64) -> ModalClass {
    let table = ClassTable::new(coeffs, n);
    if n <= EXHAUSTIVE_LIMIT {
        modal_exhaustive(&table, coeffs.len())
    } else {
        modal_ascent(&table, apportion(coeffs, n))
    }
}

fn modal_exhaustive(table: &ClassTable, m: usize) -> ModalClass {
    let mut best = f64::NEG_INFINITY;
    let mut best_class: Vec<u64> = Vec::new();
    let mut tied: Vec<CountClass> = Vec::new();
    for_each_class(m, table.n(), |c| {
        let v = table.ln_measure(c);
        if best_class.is_empty() || (v > best && !is_tie(v, best)) {
            best = v;
            best_class = c.to_vec();
            tied.clear();
        } else if v != f64::NEG_INFINITY && is_tie(v, best) {
            tied.push(CountClass::new(c.to_vec()));
        }
    });
    ModalClass {
        class: CountClass::new(best_class),
        measure: MeasureValue::from_log(best),
        tied_with: tied,
    }
}

fn modal_ascent(table: &ClassTable, start: CountClass) -> ModalClass {
    let m = table.outcomes();
    let mut counts = start.counts().to_vec();
    let mut best = table.ln_measure(&counts);
    loop {
        let mut step: Option<(usize, usize, f64)> = None;
        for i in 0..m {
            if counts[i] == 0 {
                continue;
            }
            for j in 0..m {
                if i == j {
                    continue;
                }
                counts[i] -= 1;
                counts[j] += 1;
                let v = table.ln_measure(&counts);
                counts[i] += 1;
                counts[j] -= 1;
                if v > best && !is_tie(v, best) && step.is_none_or(|(_, _, s)| v > s) {
                    step = Some((i, j, v));
                }
            }
        }
        match step {
            Some((i, j, v)) => {
                counts[i] -= 1;
                counts[j] += 1;
                best = v;
            }
            None => break,
        }
    }
    // Equal-measure neighbours; keep the lexicographically smallest as modal.
    let mut candidates = vec![counts.clone()];
    for i in 0..m {
        for j in 0..m {
            if i == j || counts[i] == 0 {
                continue;
            }
            let mut c = counts.clone();
            c[i] -= 1;
            c[j] += 1;
            if is_tie(table.ln_measure(&c), best) {
                candidates.push(c);
            }
        }
    }
    candidates.sort();
    let class = CountClass::new(candidates.remove(0));
    ModalClass {
        class,
        measure: MeasureValue::from_log(best),
        tied_with: candidates.into_iter().map(CountClass::new).collect(),
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("epsilon must be positive and finite, got {epsilon}")))
    }
}

/// Total measure of the classes with `max_i |n_i/N - |C_i|^2| <= epsilon`.
///
/// The condition is a box in count space, so the sum factors into nested
/// conditional binomials: `n_1 ~ Bin(N, p_1)`, then
/// `n_2 ~ Bin(N - n_1, p_2 / (p_2 + .. + p_M))`, and so on. The nested sums
/// are accumulated in log space over the remaining count, which costs
/// `O(M N w)` for box width `w` instead of one term per class.
pub fn typicality_measure(coeffs: &Coefficients, n: u64, epsilon: f64) -> Result<MeasureValue> {
    check_epsilon(epsilon)?;
    if epsilon >= 1.0 || coeffs.len() == 1 || n == 0 {
        return Ok(MeasureValue::ONE);
    }
    let p = coeffs.measures();
    let m = p.len();
    let total = n as f64;
    let typical = |k: u64, p: f64| (k as f64 / total - p).abs() <= epsilon + TYPICALITY_SLACK;
    let mut bounds = Vec::with_capacity(m);
    for &pi in &p {
        let mut lo = (total * (pi - epsilon) - 1.0).ceil().max(0.0) as u64;
        let mut hi = ((total * (pi + epsilon) + 1.0).floor().max(0.0) as u64).min(n);
        while lo <= hi && !typical(lo, pi) {
            lo += 1;
        }
        while hi >= lo && !typical(hi, pi) {
            if hi == 0 {
                break;
            }
            hi -= 1;
        }
        if lo > hi || !typical(lo, pi) {
            return Ok(MeasureValue::ZERO);
        }
        bounds.push((lo, hi));
    }

    let ln_fact: Vec<f64> = (0..=n).map(ln_factorial).collect();
    // remaining count before component k ranges over [n - sum hi, n - sum lo]
    let mut reach = vec![(n, n); m];
    for k in 1..m {
        let (lo, hi) = bounds[k - 1];
        let (rlo, rhi) = reach[k - 1];
        reach[k] = (rlo.saturating_sub(hi), rhi.saturating_sub(lo));
    }

    // ln P(components k.. land in the box | r counts remain), indexed by r - rlo
    let (last_lo, last_hi) = bounds[m - 1];
    let (rlo, rhi) = reach[m - 1];
    let mut next: Vec<f64> = (rlo..=rhi)
        .map(|r| if (last_lo..=last_hi).contains(&r) { 0.0 } else { f64::NEG_INFINITY })
        .collect();
    let mut next_lo = rlo;
    let mut tail = p[m - 1];
    for k in (0..m - 1).rev() {
        tail += p[k];
        let q = if tail > 0.0 { (p[k] / tail).min(1.0) } else { 0.0 };
        let (ln_q, ln_rest) = (q.ln(), (1.0 - q).ln());
        let (lo, hi) = bounds[k];
        let (rlo, rhi) = reach[k];
        let mut cur = Vec::with_capacity((rhi - rlo + 1) as usize);
        for r in rlo..=rhi {
            let mut acc = LogSumExp::default();
            for c in lo..=hi.min(r) {
                let rest = r - c;
                let g = match rest.checked_sub(next_lo).and_then(|i| next.get(i as usize)) {
                    Some(&g) if g > f64::NEG_INFINITY => g,
                    _ => continue,
                };
                let weight = times_ln(c, ln_q) + times_ln(rest, ln_rest);
                acc.add(ln_fact[r as usize] - ln_fact[c as usize] - ln_fact[rest as usize] + weight + g);
            }
            cur.push(acc.ln());
        }
        next = cur;
        next_lo = rlo;
    }
    Ok(MeasureValue::from_log(next[0].min(0.0)))
}

/// `k ln x` with `0 ln 0 = 0`.
fn times_ln(k: u64, ln_x: f64) -> f64 {
    if k == 0 { 0.0 } else { k as f64 * ln_x }
}

/// Chebyshev lower bound `1 - sum_i |C_i|^2 (1 - |C_i|^2) / (N epsilon^2)`
/// on [`typicality_measure`]. May be negative.
pub fn chebyshev_floor(coeffs: &Coefficients, n: u64, epsilon: f64) -> f64 {
    let spread: f64 = coeffs.measures().iter().map(|p| p * (1.0 - p)).sum();
    1.0 - spread / (n as f64 * epsilon * epsilon)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    /// The apportioned class `round(N |C_i|^2)` whose measure is removed.
    pub class: CountClass,
    pub class_measure: MeasureValue,
    /// `R_N = 1 - m(class)`.
    pub residual: MeasureValue,
}

/// `R_N = 1 - m(N|C_1|^2, ..., N|C_M|^2)`, with the arguments apportioned to
/// a valid class by [`apportion`].
pub fn residual_measure(coeffs: &Coefficients, n: u64) -> Residual {
    let class = apportion(coeffs, n);
    let table = ClassTable::new(coeffs, n);
    let log = table.ln_measure(class.counts());
    let class_measure = MeasureValue::from_log(log);
    Residual { residual: class_measure.complement(), class, class_measure }
}
