//! The cat and its observer.
//!
//! The joint space is `{live, dead} (x) {blank, rec_live, rec_dead,
//! rec_plus, rec_minus}`, ten orthonormal labels. Two observation operators
//! act on it:
//!
//! * `U` records the definite cat states: `|live>|blank> -> |live>|rec_live>`
//!   and `|dead>|blank> -> |dead>|rec_dead>`. By linearity a superposed cat
//!   branches the observer.
//! * `U'` records the superpositions `phi_+- = a|live> +- b|dead>` as
//!   definite: `phi_+-|blank> -> phi_+-|rec_+->`. By linearity a definite
//!   cat then branches the observer into `rec_plus` and `rec_minus`.
//!
//! Both are completed off the blank sector by swapping `blank` with the
//! matching record and leaving every other label fixed.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    haar_unitary, Amplitude, BasisLabel, LinearOperator, RecordRegister, Roles, SquareMatrix, StateVector,
    Symbol, NORM_TOL, UNITARY_TOL,
};
use crate::measure::{subset_measure, MeasureValue, SubsetSelector};

/// Cat object states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CatState {
    Live,
    Dead,
}

impl CatState {
    pub const ALL: [CatState; 2] = [CatState::Live, CatState::Dead];

    pub fn symbol(self) -> Symbol {
        match self {
            CatState::Live => Symbol::Live,
            CatState::Dead => Symbol::Dead,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CatState::Live => "live",
            CatState::Dead => "dead",
        }
    }
}

/// The five observer memory states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CatRecord {
    Blank,
    RecLive,
    RecDead,
    RecPlus,
    RecMinus,
}

impl CatRecord {
    pub const ALL: [CatRecord; 5] = [
        CatRecord::Blank,
        CatRecord::RecLive,
        CatRecord::RecDead,
        CatRecord::RecPlus,
        CatRecord::RecMinus,
    ];

    pub fn register(self) -> RecordRegister {
        match self {
            CatRecord::Blank => RecordRegister::blank(),
            CatRecord::RecLive => RecordRegister::from_symbols([Symbol::Live]),
            CatRecord::RecDead => RecordRegister::from_symbols([Symbol::Dead]),
            CatRecord::RecPlus => RecordRegister::from_symbols([Symbol::Plus]),
            CatRecord::RecMinus => RecordRegister::from_symbols([Symbol::Minus]),
        }
    }

    pub fn from_register(reg: &RecordRegister) -> Option<CatRecord> {
        CatRecord::ALL.into_iter().find(|r| &r.register() == reg)
    }

    pub fn name(self) -> &'static str {
        match self {
            CatRecord::Blank => "blank",
            CatRecord::RecLive => "rec_live",
            CatRecord::RecDead => "rec_dead",
            CatRecord::RecPlus => "rec_plus",
            CatRecord::RecMinus => "rec_minus",
        }
    }

    /// The record a faithful observer writes for a definite cat.
    pub fn of(cat: CatState) -> CatRecord {
        match cat {
            CatState::Live => CatRecord::RecLive,
            CatState::Dead => CatRecord::RecDead,
        }
    }
}

pub fn cat_roles() -> Roles {
    Roles::joint([Symbol::Live, Symbol::Dead], [Symbol::Live, Symbol::Dead, Symbol::Plus, Symbol::Minus])
}

pub fn joint_label(cat: CatState, record: CatRecord) -> BasisLabel {
    BasisLabel::new(vec![cat.symbol()], record.register())
}

/// The ten joint labels, object-major: `(live, blank), (live, rec_live), ...`.
pub fn cat_basis() -> Vec<BasisLabel> {
    CatState::ALL
        .into_iter()
        .flat_map(|c| CatRecord::ALL.into_iter().map(move |r| joint_label(c, r)))
        .collect()
}

fn basis_index(object: usize, record: CatRecord) -> usize {
    object * CatRecord::ALL.len() + record as usize
}

/// Cat superposition `a|live> + b|dead>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperpositionParams {
    a: Amplitude,
    b: Amplitude,
}

impl SuperpositionParams {
    /// Requires `|a|^2 + |b|^2 = 1`. Zero components are allowed here and
    /// rejected by the `U'` paths.
    pub fn new(a: Amplitude, b: Amplitude) -> Result<Self> {
        let finite = [a.re, a.im, b.re, b.im].iter().all(|x| x.is_finite());
        let total = a.norm_sqr() + b.norm_sqr();
        if !finite || (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParams(format!("|a|^2 + |b|^2 = {total}, expected 1")));
        }
        Ok(Self { a, b })
    }

    /// Real positive `a = sqrt(a_sq)`, `b = sqrt(1 - a_sq)`.
    pub fn from_a_sq(a_sq: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a_sq) {
            return Err(Error::InvalidParams(format!("|a|^2 = {a_sq} is outside [0, 1]")));
        }
        Self::new(Amplitude::new(a_sq.sqrt(), 0.0), Amplitude::new((1.0 - a_sq).sqrt(), 0.0))
    }

    pub fn a(&self) -> Amplitude {
        self.a
    }

    pub fn b(&self) -> Amplitude {
        self.b
    }

    /// `<phi_+|phi_-> = |a|^2 - |b|^2`.
    pub fn phi_overlap(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    fn require_nonzero(&self) -> Result<()> {
        if self.a == Amplitude::default() || self.b == Amplitude::default() {
            return Err(Error::InvalidParams("a and b must both be non-zero".into()));
        }
        Ok(())
    }

    /// Object vector `a|live> + sign b|dead>` as `[live, dead]` coordinates.
    fn phi(&self, sign: f64) -> [Amplitude; 2] {
        [self.a, self.b * sign]
    }
}

/// `|cat>|blank>`.
pub fn definite_blank(cat: CatState) -> StateVector {
    StateVector::new([(joint_label(cat, CatRecord::Blank), Amplitude::new(1.0, 0.0))], cat_roles())
        .expect("single unit term")
}

/// `(a|live> + sign b|dead>)|blank>`.
pub fn superposed_blank(p: &SuperpositionParams, sign: f64) -> Result<StateVector> {
    let [l, d] = p.phi(sign);
    StateVector::new(
        [
            (joint_label(CatState::Live, CatRecord::Blank), l),
            (joint_label(CatState::Dead, CatRecord::Blank), d),
        ],
        cat_roles(),
    )
}

/// Permutation swapping `|cat>|blank>` with `|cat>|rec_cat>` for each cat
/// state.
pub fn build_record_unitary() -> LinearOperator {
    let dim = cat_basis().len();
    let mut perm: Vec<usize> = (0..dim).collect();
    for (o, cat) in CatState::ALL.into_iter().enumerate() {
        let blank = basis_index(o, CatRecord::Blank);
        let rec = basis_index(o, CatRecord::of(cat));
        perm.swap(blank, rec);
    }
    // column c maps to row perm[c]
    let matrix = SquareMatrix::from_fn(dim, |r, c| {
        if perm[c] == r { Amplitude::new(1.0, 0.0) } else { Amplitude::default() }
    });
    let mut op = LinearOperator::new(cat_basis(), cat_roles(), matrix).expect("cat basis is valid");
    assert!(op.is_unitary(UNITARY_TOL), "record unitary completion is not unitary");
    op
}

/// `U (a|live> + b|dead>)|blank>`, obtained by applying the record unitary.
pub fn observe_superposition(p: &SuperpositionParams) -> Result<StateVector> {
    build_record_unitary().apply(&superposed_blank(p, 1.0)?)
}

/// The linear map fixed by `phi_+-|blank> -> phi_+-|rec_+->`, completed by
/// `phi_+-|rec_+-> -> phi_+-|blank>` and identity elsewhere in the
/// `{phi_+, phi_-}` object frame.
///
/// For `|a| != |b|` the frame is not orthonormal and the result is linear
/// but not unitary; use [`build_phi_observer`] for the checked operator.
pub fn phi_observer_candidate(p: &SuperpositionParams) -> Result<LinearOperator> {
    p.require_nonzero()?;
    let (a, b) = (p.a, p.b);
    // frame B = [phi_+ phi_-] in (live, dead) coordinates and its inverse
    let frame = [[a, a], [b, -b]];
    let det = -(a * b) * 2.0;
    let inv = [[-b / det, -a / det], [-b / det, a / det]];

    let records = CatRecord::ALL.len();
    // record permutation in the frame: index 0 = phi_+, 1 = phi_-
    let target = |k: usize, r: CatRecord| -> CatRecord {
        let own = if k == 0 { CatRecord::RecPlus } else { CatRecord::RecMinus };
        if r == CatRecord::Blank {
            own
        } else if r == own {
            CatRecord::Blank
        } else {
            r
        }
    };
    // U' = (B (x) I) P (B^-1 (x) I) where P permutes records per frame vector
    let matrix = SquareMatrix::from_fn(2 * records, |row, col| {
        let (ro, rr) = (row / records, CatRecord::ALL[row % records]);
        let (co, cr) = (col / records, CatRecord::ALL[col % records]);
        let mut acc = Amplitude::default();
        for k in 0..2 {
            if target(k, cr) == rr {
                acc += frame[ro][k] * inv[k][co];
            }
        }
        acc
    });
    LinearOperator::new(cat_basis(), cat_roles(), matrix)
}

/// Checked `U'`. Exists only when `phi_+` and `phi_-` are orthogonal,
/// i.e. `|a| = |b|`.
pub fn build_phi_observer(p: &SuperpositionParams) -> Result<LinearOperator> {
    p.require_nonzero()?;
    let overlap = p.phi_overlap();
    if overlap.abs() > NORM_TOL {
        return Err(Error::NoUnitaryCompletion { overlap });
    }
    let mut op = phi_observer_candidate(p)?;
    if !op.is_unitary(UNITARY_TOL) {
        return Err(Error::NotUnitary { residual: op.unitarity_residual() });
    }
    Ok(op)
}

/// `U' |which>|blank>`.
pub fn uprime_on_definite(p: &SuperpositionParams, which: CatState) -> Result<StateVector> {
    build_phi_observer(p)?.apply(&definite_blank(which))
}

/// Closed forms for `U'` on a definite cat:
///
/// ```text
/// live: 1/(2a) [ phi_+ |rec_plus> + phi_- |rec_minus> ]
/// dead: 1/(2b) [ phi_+ |rec_plus> - phi_- |rec_minus> ]
/// ```
///
/// Assembled term by term, without any operator.
pub fn definite_closed_form(p: &SuperpositionParams, which: CatState) -> Result<StateVector> {
    p.require_nonzero()?;
    let (scale, minus_sign) = match which {
        CatState::Live => (Amplitude::new(1.0, 0.0) / (p.a * 2.0), 1.0),
        CatState::Dead => (Amplitude::new(1.0, 0.0) / (p.b * 2.0), -1.0),
    };
    let mut terms = Vec::new();
    for (record, frame_sign, outer) in
        [(CatRecord::RecPlus, 1.0, 1.0), (CatRecord::RecMinus, -1.0, minus_sign)]
    {
        let [l, d] = p.phi(frame_sign);
        terms.push((joint_label(CatState::Live, record), scale * l * outer));
        terms.push((joint_label(CatState::Dead, record), scale * d * outer));
    }
    StateVector::new(terms, cat_roles())
}

/// Measure of each observer memory state present in `s`.
pub fn branch_measures(s: &StateVector) -> BTreeMap<RecordRegister, MeasureValue> {
    let mut out = BTreeMap::new();
    for label in s.terms().keys() {
        out.entry(label.memory.clone())
            .or_insert_with(|| subset_measure(s, &SubsetSelector::Memory(label.memory.clone())));
    }
    out
}

/// [`branch_measures`] keyed by cat record.
pub fn cat_branch_measures(s: &StateVector) -> BTreeMap<CatRecord, MeasureValue> {
    branch_measures(s)
        .into_iter()
        .filter_map(|(reg, m)| CatRecord::from_register(&reg).map(|r| (r, m)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    /// Largest change of any memory-branch measure.
    pub max_deviation: f64,
    pub invariant: bool,
}

/// Recomputes the memory-branch measures of `U (a|live> + b|dead>)|blank>`
/// by summing `|<v_k, record|s>|^2` over the orthonormal object basis given
/// by the columns of `v`, and compares with the measures in the original
/// basis.
pub fn basis_invariance_check(
    p: &SuperpositionParams,
    v: &SquareMatrix,
) -> Result<InvarianceReport> {
    let residual = v.unitarity_residual();
    if v.dim() != 2 || residual > UNITARY_TOL {
        return Err(Error::InvalidBasisTransform { residual });
    }
    let s = observe_superposition(p)?;
    let reference = cat_branch_measures(&s);
    let mut max_deviation = 0.0f64;
    for record in CatRecord::ALL {
        let coords = CatState::ALL.map(|c| s.amplitude(&joint_label(c, record)));
        let rotated: f64 = (0..2)
            .map(|k| {
                let basis_vec = v.column(k);
                let proj: Amplitude =
                    basis_vec.iter().zip(&coords).map(|(e, x)| e.conj() * x).sum();
                proj.norm_sqr()
            })
            .sum();
        let original = reference.get(&record).map_or(0.0, MeasureValue::linear);
        max_deviation = max_deviation.max((rotated - original).abs());
    }
    Ok(InvarianceReport { max_deviation, invariant: max_deviation <= NORM_TOL })
}

/// Runs `trials` Haar-random object-basis rotations, drawn from a ChaCha8
/// stream seeded with `seed`, through [`basis_invariance_check`].
pub fn seeded_invariance_trials(
    p: &SuperpositionParams,
    seed: u64,
    trials: u64,
) -> Result<Vec<InvarianceReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| basis_invariance_check(p, &haar_unitary(2, &mut rng))).collect()
}
