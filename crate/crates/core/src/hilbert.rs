//! Complex linear-algebra substrate for observer-inclusive states.
//!
//! States are sparse maps from [`BasisLabel`] to amplitude. Every distinct
//! label is an orthonormal basis vector; there is no Gram matrix. A label
//! carries an object part (one symbol per object system) and a memory part
//! (the observer's [`RecordRegister`]).
//!
//! Operators are dense and only meant for the small cat-scenario spaces.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Normalization tolerance for public state constructors.
pub const NORM_TOL: f64 = 1e-10;
/// Componentwise tolerance for linearity identities.
pub const LINEARITY_TOL: f64 = 1e-12;
/// Max-norm tolerance on `A^dagger A - I`.
pub const UNITARY_TOL: f64 = 1e-10;

/// One letter of an object or memory alphabet.
///
/// Outcome indices are 1-based, matching the eigenvalue labels
/// `alpha^1 .. alpha^M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Symbol {
    Outcome(u16),
    Live,
    Dead,
    Plus,
    Minus,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Outcome(i) => write!(f, "a{i}"),
            Symbol::Live => f.write_str("live"),
            Symbol::Dead => f.write_str("dead"),
            Symbol::Plus => f.write_str("phi+"),
            Symbol::Minus => f.write_str("phi-"),
        }
    }
}

/// Ordered observer memory content. Grows only by [`RecordRegister::appended`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RecordRegister(Vec<Symbol>);

impl RecordRegister {
    pub fn blank() -> Self {
        Self(Vec::new())
    }

    pub fn from_symbols(symbols: impl IntoIterator<Item = Symbol>) -> Self {
        Self(symbols.into_iter().collect())
    }

    /// A new register with `symbol` recorded after the existing history.
    pub fn appended(&self, symbol: Symbol) -> Self {
        let mut symbols = Vec::with_capacity(self.0.len() + 1);
        symbols.extend_from_slice(&self.0);
        symbols.push(symbol);
        Self(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for RecordRegister {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("]")
    }
}

/// Joint object/memory basis label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BasisLabel {
    pub object: Vec<Symbol>,
    pub memory: RecordRegister,
}

impl BasisLabel {
    pub fn new(object: Vec<Symbol>, memory: RecordRegister) -> Self {
        Self { object, memory }
    }

    pub fn object_only(object: Vec<Symbol>) -> Self {
        Self { object, memory: RecordRegister::blank() }
    }

    pub fn memory_only(memory: RecordRegister) -> Self {
        Self { object: Vec::new(), memory }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for (k, s) in self.object.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ">|{}>", self.memory)
    }
}

pub type Alphabet = BTreeSet<Symbol>;

/// Which factors a state lives on, with their closed alphabets.
///
/// A role that is `None` is absent: labels must leave that part empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Roles {
    pub object: Option<Alphabet>,
    pub memory: Option<Alphabet>,
}

impl Roles {
    pub fn object(alphabet: impl IntoIterator<Item = Symbol>) -> Self {
        Self { object: Some(alphabet.into_iter().collect()), memory: None }
    }

    pub fn memory(alphabet: impl IntoIterator<Item = Symbol>) -> Self {
        Self { object: None, memory: Some(alphabet.into_iter().collect()) }
    }

    pub fn joint(
        object: impl IntoIterator<Item = Symbol>,
        memory: impl IntoIterator<Item = Symbol>,
    ) -> Self {
        Self {
            object: Some(object.into_iter().collect()),
            memory: Some(memory.into_iter().collect()),
        }
    }

    pub fn check(&self, label: &BasisLabel) -> Result<()> {
        check_part("object", self.object.as_ref(), &label.object, label)?;
        check_part("memory", self.memory.as_ref(), label.memory.symbols(), label)
    }
}

fn check_part(
    role: &str,
    alphabet: Option<&Alphabet>,
    symbols: &[Symbol],
    label: &BasisLabel,
) -> Result<()> {
    match alphabet {
        None if !symbols.is_empty() => Err(Error::Label(format!(
            "{label} populates the undeclared {role} role"
        ))),
        None => Ok(()),
        Some(alphabet) => match symbols.iter().find(|s| !alphabet.contains(s)) {
            Some(s) => Err(Error::Label(format!(
                "symbol {s} in {label} is outside the declared {role} alphabet"
            ))),
            None => Ok(()),
        },
    }
}

/// Normalized superposition over orthonormal labeled basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    terms: BTreeMap<BasisLabel, Amplitude>,
    roles: Roles,
    norm_factor: f64,
}

impl StateVector {
    /// Builds a normalized state. Exact-zero amplitudes are dropped.
    ///
    /// The norm of the raw input is kept as [`StateVector::norm_factor`], so
    /// `norm_factor() * state` reproduces the input.
    pub fn new(
        terms: impl IntoIterator<Item = (BasisLabel, Amplitude)>,
        roles: Roles,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (label, amp) in terms {
            roles.check(&label)?;
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "non-finite amplitude on {label}"
                )));
            }
            if map.contains_key(&label) {
                return Err(Error::Label(format!("duplicate label {label}")));
            }
            if amp != Amplitude::new(0.0, 0.0) {
                map.insert(label, amp);
            }
        }
        Self::from_checked(map, roles)
    }

    fn from_checked(mut terms: BTreeMap<BasisLabel, Amplitude>, roles: Roles) -> Result<Self> {
        terms.retain(|_, a| *a != Amplitude::new(0.0, 0.0));
        let norm = terms.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if terms.is_empty() || norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        for a in terms.values_mut() {
            *a /= norm;
        }
        Ok(Self { terms, roles, norm_factor: norm })
    }

    /// Object-only state from symbol lists.
    pub fn object(
        terms: impl IntoIterator<Item = (Vec<Symbol>, Amplitude)>,
        alphabet: impl IntoIterator<Item = Symbol>,
    ) -> Result<Self> {
        Self::new(
            terms.into_iter().map(|(o, a)| (BasisLabel::object_only(o), a)),
            Roles::object(alphabet),
        )
    }

    /// Memory-only state holding a single register, e.g. the blank observer.
    pub fn observer(
        register: RecordRegister,
        alphabet: impl IntoIterator<Item = Symbol>,
    ) -> Result<Self> {
        Self::new(
            [(BasisLabel::memory_only(register), Amplitude::new(1.0, 0.0))],
            Roles::memory(alphabet),
        )
    }

    pub fn terms(&self) -> &BTreeMap<BasisLabel, Amplitude> {
        &self.terms
    }

    pub fn roles(&self) -> &Roles {
        &self.roles
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Amplitude {
        self.terms.get(label).copied().unwrap_or_default()
    }

    /// Number of stored (nonzero) terms.
    pub fn dimension(&self) -> usize {
        self.terms.len()
    }

    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Product state `self (x) other`; the two sides must populate disjoint roles.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let object = merge_role("object", &self.roles.object, &other.roles.object)?;
        let memory = merge_role("memory", &self.roles.memory, &other.roles.memory)?;
        let mut terms = BTreeMap::new();
        for (l1, a1) in &self.terms {
            for (l2, a2) in &other.terms {
                let label = BasisLabel {
                    object: if l1.object.is_empty() { l2.object.clone() } else { l1.object.clone() },
                    memory: if l1.memory.is_empty() { l2.memory.clone() } else { l1.memory.clone() },
                };
                terms.insert(label, a1 * a2);
            }
        }
        Self::from_checked(terms, Roles { object, memory })
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Amplitude> {
        if self.roles != other.roles {
            return Err(Error::Label("inner product across different alphabets".into()));
        }
        let (small, large, flip) = if self.terms.len() <= other.terms.len() {
            (&self.terms, &other.terms, false)
        } else {
            (&other.terms, &self.terms, true)
        };
        let mut acc = Amplitude::new(0.0, 0.0);
        for (label, a) in small {
            if let Some(b) = large.get(label) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        Ok(acc)
    }

    /// Normalized linear combination `sum_k c_k s_k` over states sharing roles.
    pub fn superpose(parts: &[(Amplitude, &StateVector)]) -> Result<StateVector> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::ZeroVector);
        };
        let mut terms: BTreeMap<BasisLabel, Amplitude> = BTreeMap::new();
        for (c, s) in parts {
            if s.roles != first.roles {
                return Err(Error::Label("superposition across different alphabets".into()));
            }
            for (label, a) in &s.terms {
                *terms.entry(label.clone()).or_default() += c * a;
            }
        }
        Self::from_checked(terms, first.roles.clone())
    }
}

fn merge_role(
    role: &'static str,
    a: &Option<Alphabet>,
    b: &Option<Alphabet>,
) -> Result<Option<Alphabet>> {
    match (a, b) {
        (Some(_), Some(_)) => Err(Error::RoleCollision(role)),
        (Some(x), None) | (None, Some(x)) => Ok(Some(x.clone())),
        (None, None) => Ok(None),
    }
}

/// Dense row-major complex square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<Amplitude>,
}

impl SquareMatrix {
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == c { Amplitude::new(1.0, 0.0) } else { Amplitude::default() })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Amplitude) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: &[Vec<Amplitude>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParams("matrix must be square and non-empty".into()));
        }
        Ok(Self { dim, data: rows.concat() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.data[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn mul(&self, other: &SquareMatrix) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self::from_fn(self.dim, |r, c| {
            (0..self.dim).map(|k| self.get(r, k) * other.get(k, c)).sum()
        })
    }

    pub fn mul_vec(&self, v: &[Amplitude]) -> Vec<Amplitude> {
        assert_eq!(self.dim, v.len(), "dimension mismatch");
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    /// Column `col` as a vector.
    pub fn column(&self, col: usize) -> Vec<Amplitude> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    /// `max |(A^dagger A - I)_ij|`.
    pub fn unitarity_residual(&self) -> f64 {
        let gram = self.adjoint().mul(self);
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((gram.get(r, c) - target).norm());
            }
        }
        worst
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Amplitude]> {
        self.data.chunks(self.dim)
    }
}

/// Haar-distributed unitary of size `dim`.
///
/// Draws a complex Ginibre matrix with standard normal real and imaginary
/// parts, then orthonormalizes its columns by modified Gram-Schmidt. This
/// equals a QR decomposition whose `R` has a positive real diagonal, which is
/// the phase fix that makes the `Q` factor Haar distributed.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> SquareMatrix {
    loop {
        let mut cols: Vec<Vec<Amplitude>> = (0..dim)
            .map(|_| {
                (0..dim)
                    .map(|_| Amplitude::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect()
            })
            .collect();
        let mut degenerate = false;
        for j in 0..dim {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let proj: Amplitude = done[k].iter().zip(&rest[0]).map(|(q, v)| q.conj() * v).sum();
                for (v, q) in rest[0].iter_mut().zip(&done[k]) {
                    *v -= proj * q;
                }
            }
            let norm = cols[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-12 {
                degenerate = true;
                break;
            }
            for v in &mut cols[j] {
                *v /= norm;
            }
        }
        if !degenerate {
            return SquareMatrix::from_fn(dim, |r, c| cols[c][r]);
        }
    }
}

/// Dense operator over an ordered list of basis labels.
#[derive(Clone, Debug)]
pub struct LinearOperator {
    basis: Vec<BasisLabel>,
    index: HashMap<BasisLabel, usize>,
    roles: Roles,
    matrix: SquareMatrix,
    verified_unitary: bool,
}

impl LinearOperator {
    pub fn new(basis: Vec<BasisLabel>, roles: Roles, matrix: SquareMatrix) -> Result<Self> {
        if basis.len() != matrix.dim() {
            return Err(Error::InvalidParams(format!(
                "basis has {} labels but matrix is {}x{}",
                basis.len(),
                matrix.dim(),
                matrix.dim()
            )));
        }
        let mut index = HashMap::with_capacity(basis.len());
        for (k, label) in basis.iter().enumerate() {
            roles.check(label)?;
            if index.insert(label.clone(), k).is_some() {
                return Err(Error::Label(format!("duplicate basis label {label}")));
            }
        }
        Ok(Self { basis, index, roles, matrix, verified_unitary: false })
    }

    pub fn identity(basis: Vec<BasisLabel>, roles: Roles) -> Result<Self> {
        let dim = basis.len();
        Self::new(basis, roles, SquareMatrix::identity(dim))
    }

    pub fn basis(&self) -> &[BasisLabel] {
        &self.basis
    }

    pub fn roles(&self) -> &Roles {
        &self.roles
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    pub fn index_of(&self, label: &BasisLabel) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn verified_unitary(&self) -> bool {
        self.verified_unitary
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.matrix.unitarity_residual()
    }

    /// Checks `A^dagger A = I` in max norm and records the outcome.
    pub fn is_unitary(&mut self, tol: f64) -> bool {
        self.verified_unitary = self.unitarity_residual() <= tol;
        self.verified_unitary
    }

    /// Dense coordinates of `s` in this operator's basis order.
    pub fn coordinates(&self, s: &StateVector) -> Result<Vec<Amplitude>> {
        let mut v = vec![Amplitude::default(); self.basis.len()];
        for (label, a) in s.terms() {
            let k = self
                .index_of(label)
                .ok_or_else(|| Error::BasisCoverage(label.to_string()))?;
            v[k] = *a;
        }
        Ok(v)
    }

    /// Matrix-vector product. A non-unitary operator's output is renormalized
    /// and its raw norm is kept as the result's `norm_factor`.
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        let out = self.matrix.mul_vec(&self.coordinates(s)?);
        let terms = self.basis.iter().cloned().zip(out).collect::<BTreeMap<_, _>>();
        StateVector::from_checked(terms, self.roles.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Amplitude {
        Amplitude::new(re, 0.0)
    }

    fn cat_object(live: Amplitude, dead: Amplitude) -> Result<StateVector> {
        StateVector::object(
            [(vec![Symbol::Live], live), (vec![Symbol::Dead], dead)],
            [Symbol::Live, Symbol::Dead],
        )
    }

    #[test]
    fn make_state_normalizes() {
        let s = StateVector::object([(vec![Symbol::Live], c(1.0))], [Symbol::Live]).unwrap();
        assert_eq!(s.dimension(), 1);
        assert!((s.norm() - 1.0).abs() < 1e-15);

        let s = cat_object(c(1.0), c(1.0)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitude(&BasisLabel::object_only(vec![Symbol::Live])).re - h).abs() < 1e-15);
        assert!((s.norm_factor() - 2f64.sqrt()).abs() < 1e-15);

        let s = cat_object(c(3.0), c(4.0)).unwrap();
        assert!((s.amplitude(&BasisLabel::object_only(vec![Symbol::Live])).re - 0.6).abs() < 1e-15);
        assert!((s.amplitude(&BasisLabel::object_only(vec![Symbol::Dead])).re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn make_state_errors() {
        assert_eq!(cat_object(c(0.0), c(0.0)), Err(Error::ZeroVector));
        let err = StateVector::object([(vec![Symbol::Plus], c(1.0))], [Symbol::Live]).unwrap_err();
        assert!(matches!(err, Error::Label(_)));
        let err = StateVector::new(
            [(BasisLabel::memory_only(RecordRegister::from_symbols([Symbol::Live])), c(1.0))],
            Roles::object([Symbol::Live]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Label(_)));
    }

    #[test]
    fn tensor_with_blank_observer() {
        let obj = StateVector::object([(vec![Symbol::Outcome(1)], c(1.0))], [Symbol::Outcome(1)]).unwrap();
        let blank = StateVector::observer(RecordRegister::blank(), [Symbol::Outcome(1)]).unwrap();
        let joint = obj.tensor(&blank).unwrap();
        assert_eq!(joint.dimension(), 1);
        let label = BasisLabel::new(vec![Symbol::Outcome(1)], RecordRegister::blank());
        assert_eq!(joint.amplitude(&label), c(1.0));

        let alphabet = [Symbol::Outcome(1), Symbol::Outcome(2)];
        let obj = StateVector::object(
            [(vec![Symbol::Outcome(1)], c(1.0)), (vec![Symbol::Outcome(2)], c(1.0))],
            alphabet,
        )
        .unwrap();
        let joint = obj.tensor(&blank).unwrap();
        assert_eq!(joint.dimension(), 2);
        for a in joint.terms().values() {
            assert!((a.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        }
    }

    #[test]
    fn tensor_role_collision() {
        let a = cat_object(c(1.0), c(1.0)).unwrap();
        assert_eq!(a.tensor(&a), Err(Error::RoleCollision("object")));
    }

    #[test]
    fn inner_products() {
        let live = cat_object(c(1.0), c(0.0)).unwrap();
        let dead = cat_object(c(0.0), c(1.0)).unwrap();
        assert_eq!(live.inner(&dead).unwrap(), Amplitude::default());
        let s = cat_object(Amplitude::new(0.3, 0.4), c(0.2)).unwrap();
        assert!((s.inner(&s).unwrap() - c(1.0)).norm() < 1e-15);

        let blank = StateVector::observer(RecordRegister::blank(), [Symbol::Live]).unwrap();
        assert!(matches!(live.inner(&blank), Err(Error::Label(_))));
    }

    #[test]
    fn identity_apply_and_coverage() {
        let basis = vec![
            BasisLabel::object_only(vec![Symbol::Live]),
            BasisLabel::object_only(vec![Symbol::Dead]),
        ];
        let roles = Roles::object([Symbol::Live, Symbol::Dead]);
        let mut id = LinearOperator::identity(basis.clone(), roles.clone()).unwrap();
        assert!(id.is_unitary(UNITARY_TOL));
        let s = cat_object(Amplitude::new(0.3, -0.1), c(0.5)).unwrap();
        assert_eq!(id.apply(&s).unwrap().terms(), s.terms());

        let small = LinearOperator::identity(basis[..1].to_vec(), roles).unwrap();
        assert!(matches!(small.apply(&s), Err(Error::BasisCoverage(_))));
    }

    #[test]
    fn non_unitary_diagonal() {
        let basis = vec![
            BasisLabel::object_only(vec![Symbol::Live]),
            BasisLabel::object_only(vec![Symbol::Dead]),
        ];
        let m = SquareMatrix::from_rows(&[vec![c(1.0), c(0.0)], vec![c(0.0), c(2.0)]]).unwrap();
        let mut op = LinearOperator::new(basis, Roles::object([Symbol::Live, Symbol::Dead]), m).unwrap();
        assert!(!op.is_unitary(UNITARY_TOL));
        assert!(!op.verified_unitary());
    }

    #[test]
    fn haar_unitary_is_unitary_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..6 {
            let u = haar_unitary(dim, &mut rng);
            assert!(u.unitarity_residual() < 1e-13, "dim {dim}");
        }
        let a = haar_unitary(2, &mut ChaCha8Rng::seed_from_u64(42));
        let b = haar_unitary(2, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    #[test]
    fn register_display() {
        let r = RecordRegister::blank().appended(Symbol::Outcome(1)).appended(Symbol::Outcome(2));
        assert_eq!(r.to_string(), "[a1 a2]");
        assert_eq!(r.len(), 2);
        let l = BasisLabel::new(vec![Symbol::Live], RecordRegister::from_symbols([Symbol::Live]));
        assert_eq!(l.to_string(), "|live>|[live]>");
    }
}
