//! Pauli operators on `Z_M` qudits living on the degree-k cells of a complex,
//! with exact phase bookkeeping, plus stabilizer groups with membership,
//! mutual-commutation, and commutant-quotient queries.
//!
//! An operator is kept in the normal form `phase * X^x Z^z` with every X
//! factor to the left of every Z factor; `x` and `z` are mod-M cochains on
//! the qudit cells. On one qudit `Z X = omega X Z` with `omega = e^{2 pi i/M}`,
//! so collecting a product into normal form costs the phase
//! `omega^{<z_P, x_Q>}`, and the group commutator of two operators is the
//! prefactor-independent phase `omega^{<z_P, x_Q> - <z_Q, x_P>}`.

use std::collections::{BTreeSet, HashMap};

use once_cell::sync::OnceCell;
use thiserror::Error;

use crate::complex::{CellComplex, CellId, Cochain};
use crate::linalg::{
    gcd, howell_form, quotient_invariants, solve_mod, InvariantFactors, ModMat, SolveOutcome,
};
use crate::par;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("operators live on different algebras: {0}")]
    MixedAlgebra(&'static str),
}

// ---------------------------------------------------------------------------
// Phase exponents
// ---------------------------------------------------------------------------

/// Exponent of a root of unity: the rational `num/den` stands for
/// `e^{2 pi i num/den}`, kept in lowest terms with `0 <= num < den`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhaseExp {
    num: i64,
    den: i64,
}

impl PhaseExp {
    pub const ZERO: PhaseExp = PhaseExp { num: 0, den: 1 };

    /// `num/den` reduced mod 1 into lowest terms.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero phase denominator");
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let num = num.rem_euclid(den);
        let g = gcd(num, den).max(1);
        PhaseExp { num: num / g, den: den / g }
    }

    pub fn numer(&self) -> i64 {
        self.num
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Integer multiple `k * self`, still reduced mod 1.
    pub fn times(&self, k: i64) -> Self {
        // num * k can overflow only for astronomically large k; den stays
        // small (it divides 2M), so multiply before reducing is exact.
        PhaseExp::new(self.num.checked_mul(k).expect("phase scaling overflow"), self.den)
    }

    /// Smallest `k >= 1` with `k * self = 0`: the order of the phase as a
    /// root of unity.
    pub fn order(&self) -> i64 {
        self.den
    }
}

impl std::ops::Add for PhaseExp {
    type Output = PhaseExp;
    fn add(self, rhs: PhaseExp) -> PhaseExp {
        let g = gcd(self.den, rhs.den);
        let den = self.den / g * rhs.den;
        PhaseExp::new(self.num * (den / self.den) + rhs.num * (den / rhs.den), den)
    }
}

impl std::ops::Neg for PhaseExp {
    type Output = PhaseExp;
    fn neg(self) -> PhaseExp {
        PhaseExp::new(-self.num, self.den)
    }
}

impl std::ops::Sub for PhaseExp {
    type Output = PhaseExp;
    fn sub(self, rhs: PhaseExp) -> PhaseExp {
        self + (-rhs)
    }
}

impl std::fmt::Display for PhaseExp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl std::fmt::Debug for PhaseExp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PhaseExp({self})")
    }
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// `phase * X^x Z^z` on the degree-`x.degree` cells; `x` and `z` are cochains
/// reduced mod `modulus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliOperator {
    pub modulus: i64,
    pub x: Cochain,
    pub z: Cochain,
    pub phase: PhaseExp,
}

impl PauliOperator {
    /// Assemble an operator, checking the algebra invariants: matching
    /// degrees, moduli and complex, and a phase denominator dividing 2M.
    /// Nothing in the constructions here can leave that range, so a violation
    /// is an internal consistency error, not a user error.
    pub fn new(x: Cochain, z: Cochain, phase: PhaseExp) -> Self {
        assert!(x.modulus >= 2, "qudit modulus must be at least 2");
        assert_eq!(x.modulus, z.modulus, "X and Z exponents disagree on the modulus");
        assert_eq!(x.degree, z.degree, "X and Z exponents disagree on the degree");
        assert_eq!(x.complex_token, z.complex_token, "X and Z exponents live on different complexes");
        assert!(
            (2 * x.modulus) % phase.denom() == 0,
            "phase denominator {} exceeds the 2M cap for M={}",
            phase.denom(),
            x.modulus
        );
        PauliOperator { modulus: x.modulus, x, z, phase }
    }

    pub fn identity(cx: &CellComplex, degree: usize, modulus: i64) -> Self {
        Self::new(Cochain::zero(cx, degree, modulus), Cochain::zero(cx, degree, modulus), PhaseExp::ZERO)
    }

    /// `X^support` with no prefactor.
    pub fn from_x(cx: &CellComplex, support: &Cochain) -> Self {
        Self::new(support.clone(), Cochain::zero(cx, support.degree, support.modulus), PhaseExp::ZERO)
    }

    /// `Z^support` with no prefactor.
    pub fn from_z(cx: &CellComplex, support: &Cochain) -> Self {
        Self::new(Cochain::zero(cx, support.degree, support.modulus), support.clone(), PhaseExp::ZERO)
    }

    pub fn degree(&self) -> usize {
        self.x.degree
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero() && self.phase.is_zero()
    }

    pub fn with_phase(mut self, phase: PhaseExp) -> Self {
        assert!((2 * self.modulus) % phase.denom() == 0, "phase denominator exceeds the 2M cap");
        self.phase = phase;
        self
    }

    /// Exact inverse: reordering `(X^x Z^z)^{-1} = Z^{-z} X^{-x}` back into
    /// normal form costs `omega^{<z, x>}`.
    pub fn inverse(&self) -> Self {
        let corr = PhaseExp::new(dot_mod(&self.z, &self.x, self.modulus), self.modulus);
        PauliOperator::new(self.x.scaled(-1), self.z.scaled(-1), -self.phase + corr)
    }

    /// `self` multiplied `k` times (inverse for negative `k`).
    pub fn pow(&self, k: i64) -> Self {
        let (base, k) = if k < 0 { (self.inverse(), -k) } else { (self.clone(), k) };
        let mut out = PauliOperator::new(base.x.scaled(0), base.z.scaled(0), PhaseExp::ZERO);
        for _ in 0..k {
            out = multiply(&out, &base).expect("same algebra");
        }
        out
    }
}

/// `sum_c a(c) b(c)` reduced mod `m`.
fn dot_mod(a: &Cochain, b: &Cochain, m: i64) -> i64 {
    let (small, large) = if a.support_len() <= b.support_len() { (a, b) } else { (b, a) };
    let mut acc = 0i64;
    for (c, v) in small.iter() {
        acc += v * large.coeff(c);
    }
    acc.rem_euclid(m)
}

fn same_algebra(p: &PauliOperator, q: &PauliOperator) -> Result<(), PauliError> {
    if p.modulus != q.modulus {
        return Err(PauliError::MixedAlgebra("different qudit moduli"));
    }
    if p.degree() != q.degree() {
        return Err(PauliError::MixedAlgebra("different qudit cell degrees"));
    }
    if p.x.complex_token != q.x.complex_token {
        return Err(PauliError::MixedAlgebra("different complexes"));
    }
    Ok(())
}

/// Product in normal form: exponents add, and moving `Z^{z_P}` across
/// `X^{x_Q}` costs `omega^{<z_P, x_Q>}`.
pub fn multiply(p: &PauliOperator, q: &PauliOperator) -> Result<PauliOperator, PauliError> {
    same_algebra(p, q)?;
    let corr = PhaseExp::new(dot_mod(&p.z, &q.x, p.modulus), p.modulus);
    Ok(PauliOperator::new(p.x.plus(&q.x), p.z.plus(&q.z), p.phase + q.phase + corr))
}

/// Phase of the group commutator `P^{-1} Q^{-1} P Q`; prefactors of `P` and
/// `Q` cancel, leaving `omega^{<z_P, x_Q> - <z_Q, x_P>}`.
pub fn commutator_phase(p: &PauliOperator, q: &PauliOperator) -> Result<PhaseExp, PauliError> {
    same_algebra(p, q)?;
    let m = p.modulus;
    Ok(PhaseExp::new(dot_mod(&p.z, &q.x, m) - dot_mod(&q.z, &p.x, m), m))
}

// ---------------------------------------------------------------------------
// Stabilizer groups
// ---------------------------------------------------------------------------

/// Result of a stabilizer membership query. `combination` lists generator
/// indices with exponents whose ordered product reproduces the queried
/// exponents exactly; `phase_defect` is the leftover prefactor of the query
/// relative to that product, so membership as an exact operator holds iff the
/// defect is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Member { combination: Vec<(usize, i64)>, phase_defect: PhaseExp },
    NotMember,
}

impl Membership {
    /// Member with the phase accounted for exactly.
    pub fn is_exact(&self) -> bool {
        matches!(self, Membership::Member { phase_defect, .. } if phase_defect.is_zero())
    }

    /// Member up to a global phase.
    pub fn is_member_up_to_phase(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }
}

/// Immutable list of named Pauli generators over one qudit algebra, with the
/// exponent data laid out for sparse symplectic queries. Mutual commutation
/// is checked by [`StabilizerGroup::check_mutual_commutation`] rather than
/// enforced at construction, so that a deliberately corrupted group is
/// representable and the check has something to report.
pub struct StabilizerGroup {
    modulus: i64,
    degree: usize,
    complex_token: u64,
    n_qudits: usize,
    names: Vec<String>,
    phases: Vec<PhaseExp>,
    /// Sorted `(cell, exponent)` pairs per generator.
    xs: Vec<Box<[(CellId, i64)]>>,
    zs: Vec<Box<[(CellId, i64)]>>,
    /// Lazily built cell -> generators-with-support-there index.
    touching: OnceCell<Vec<Vec<u32>>>,
    /// Set by the commutation check; enables the syndrome shortcut in
    /// membership queries (valid only for commuting groups).
    commuting: OnceCell<bool>,
}

impl StabilizerGroup {
    pub fn new(
        cx: &CellComplex,
        degree: usize,
        modulus: i64,
        generators: Vec<(String, PauliOperator)>,
    ) -> Result<Self, PauliError> {
        assert!(modulus >= 2);
        let n_qudits = cx.n_cells(degree);
        let mut names = Vec::with_capacity(generators.len());
        let mut phases = Vec::with_capacity(generators.len());
        let mut xs = Vec::with_capacity(generators.len());
        let mut zs = Vec::with_capacity(generators.len());
        for (name, g) in generators {
            if g.modulus != modulus {
                return Err(PauliError::MixedAlgebra("generator modulus differs from the group"));
            }
            if g.degree() != degree {
                return Err(PauliError::MixedAlgebra("generator degree differs from the group"));
            }
            if g.x.complex_token != cx.token() {
                return Err(PauliError::MixedAlgebra("generator lives on a different complex"));
            }
            names.push(name);
            phases.push(g.phase);
            xs.push(g.x.iter().collect::<Vec<_>>().into_boxed_slice());
            zs.push(g.z.iter().collect::<Vec<_>>().into_boxed_slice());
        }
        Ok(StabilizerGroup {
            modulus,
            degree,
            complex_token: cx.token(),
            n_qudits,
            names,
            phases,
            xs,
            zs,
            touching: OnceCell::new(),
            commuting: OnceCell::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_qudits(&self) -> usize {
        self.n_qudits
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Rebuild generator `i` as an operator on `cx`.
    pub fn generator(&self, cx: &CellComplex, i: usize) -> PauliOperator {
        assert_eq!(cx.token(), self.complex_token, "wrong complex for this group");
        let x = Cochain::from_entries(cx, self.degree, self.modulus, self.xs[i].iter().copied());
        let z = Cochain::from_entries(cx, self.degree, self.modulus, self.zs[i].iter().copied());
        PauliOperator::new(x, z, self.phases[i])
    }

    fn touching(&self) -> &[Vec<u32>] {
        self.touching.get_or_init(|| {
            let mut t = vec![Vec::new(); self.n_qudits];
            for i in 0..self.len() {
                merge_support(&self.xs[i], &self.zs[i], |c| t[c as usize].push(i as u32));
            }
            t
        })
    }

    /// Generators with nonzero commutator phase against `p`, by index.
    /// Disjoint supports always commute, so only generators touching the
    /// support of `p` are examined.
    pub fn violations(&self, p: &PauliOperator) -> Vec<(usize, PhaseExp)> {
        assert_eq!(p.x.complex_token, self.complex_token, "wrong complex for this group");
        assert_eq!(p.modulus, self.modulus, "wrong modulus for this group");
        assert_eq!(p.degree(), self.degree, "wrong degree for this group");
        let t = self.touching();
        let mut cand: BTreeSet<u32> = BTreeSet::new();
        for c in p.x.support().chain(p.z.support()) {
            cand.extend(t[c as usize].iter().copied());
        }
        let m = self.modulus;
        let mut out = Vec::new();
        for &i in &cand {
            let i = i as usize;
            let mut acc = 0i64;
            for &(c, zv) in self.zs[i].iter() {
                acc += zv * p.x.coeff(c);
            }
            for &(c, xv) in self.xs[i].iter() {
                acc -= xv * p.z.coeff(c);
            }
            if acc.rem_euclid(m) != 0 {
                out.push((i, PhaseExp::new(acc, m)));
            }
        }
        out
    }

    /// Per-cell sparse columns of the exponent data: `(generator, value)`
    /// lists for X and Z separately.
    #[allow(clippy::type_complexity)]
    fn per_cell_columns(&self) -> (Vec<Vec<(u32, i64)>>, Vec<Vec<(u32, i64)>>) {
        let mut cx_cols = vec![Vec::new(); self.n_qudits];
        let mut cz_cols = vec![Vec::new(); self.n_qudits];
        for i in 0..self.len() {
            for &(c, v) in self.xs[i].iter() {
                cx_cols[c as usize].push((i as u32, v));
            }
            for &(c, v) in self.zs[i].iter() {
                cz_cols[c as usize].push((i as u32, v));
            }
        }
        (cx_cols, cz_cols)
    }

    /// Commutator phases of generator `i` against every later generator with
    /// overlapping support, keeping the nonzero ones.
    fn violating_row(
        &self,
        cx_cols: &[Vec<(u32, i64)>],
        cz_cols: &[Vec<(u32, i64)>],
        i: usize,
    ) -> Vec<(u32, i64)> {
        let m = self.modulus;
        let mut acc: HashMap<u32, i64> = HashMap::new();
        for &(c, zv) in self.zs[i].iter() {
            for &(j, xv) in cx_cols[c as usize].iter() {
                *acc.entry(j).or_insert(0) += zv * xv;
            }
        }
        for &(c, xv) in self.xs[i].iter() {
            for &(j, zv) in cz_cols[c as usize].iter() {
                *acc.entry(j).or_insert(0) -= xv * zv;
            }
        }
        let mut out: Vec<(u32, i64)> = acc
            .into_iter()
            .filter(|&(j, v)| j as usize > i && v.rem_euclid(m) != 0)
            .map(|(j, v)| (j, v.rem_euclid(m)))
            .collect();
        out.sort_unstable();
        out
    }

    /// All non-commuting generator pairs with their commutator phases; an
    /// empty report certifies a valid stabilizer set. Pairs are reported once
    /// with the lower index first.
    pub fn check_mutual_commutation(&self) -> Vec<(String, String, PhaseExp)> {
        let (cx_cols, cz_cols) = self.per_cell_columns();
        let rows = par::map_range(self.len(), |i| self.violating_row(&cx_cols, &cz_cols, i));
        self.finish_commutation(rows)
    }

    /// Sequential twin of [`Self::check_mutual_commutation`], kept
    /// unconditionally as the reference path for benchmarks and determinism
    /// checks.
    pub fn check_mutual_commutation_sequential(&self) -> Vec<(String, String, PhaseExp)> {
        let (cx_cols, cz_cols) = self.per_cell_columns();
        let rows = par::map_range_seq(self.len(), |i| self.violating_row(&cx_cols, &cz_cols, i));
        self.finish_commutation(rows)
    }

    fn finish_commutation(&self, rows: Vec<Vec<(u32, i64)>>) -> Vec<(String, String, PhaseExp)> {
        let mut report = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                report.push((
                    self.names[i].clone(),
                    self.names[j as usize].clone(),
                    PhaseExp::new(v, self.modulus),
                ));
            }
        }
        let _ = self.commuting.set(report.is_empty());
        report
    }

    /// Solve for generator exponents reproducing the X and Z exponents of
    /// `p`. The search works outward from the generators whose X part meets
    /// the X support of `p` (Z against Z for a pure-Z target): each round
    /// Howell-reduces `p` against the admitted subset, and the cells of the
    /// irreducible residue pick the next generators to admit, smallest
    /// support first, so a local combination is found without ever forming
    /// a lattice-wide system. Member answers are certificates: the
    /// combination is rebuilt into an operator and compared exactly.
    /// NotMember is declared once the subset saturates its touching
    /// closure, where the restricted system equals the full one.
    pub fn is_member(&self, cx: &CellComplex, p: &PauliOperator) -> Membership {
        assert_eq!(p.x.complex_token, self.complex_token, "wrong complex for this group");
        assert_eq!(p.modulus, self.modulus, "wrong modulus for this group");
        assert_eq!(p.degree(), self.degree, "wrong degree for this group");
        // For a verified-commuting group, a nonzero syndrome refutes
        // membership without any solve.
        if self.commuting.get() == Some(&true) && !self.violations(p).is_empty() {
            return Membership::NotMember;
        }
        let t = self.touching();
        let seed: Vec<CellId> = p.x.support().chain(p.z.support()).collect();
        // Support on a qudit no generator touches cannot be produced.
        if seed.iter().any(|&c| t[c as usize].is_empty()) {
            return Membership::NotMember;
        }
        let mut gens: BTreeSet<u32> = if p.x.is_zero() {
            let cells: Vec<CellId> = p.z.support().collect();
            self.hitting(&cells, false)
        } else {
            let cells: Vec<CellId> = p.x.support().collect();
            self.hitting(&cells, true)
        };
        loop {
            let residual = match self.reduce_attempt(cx, p, &gens) {
                Ok(found) => return found,
                Err(residual) => residual,
            };
            let mut fresh: Vec<u32> = Vec::new();
            for &(c, on_x) in &residual {
                for g in self.hitting(&[c], on_x) {
                    if !gens.contains(&g) {
                        fresh.push(g);
                    }
                }
            }
            fresh.sort_unstable();
            fresh.dedup();
            if !fresh.is_empty() {
                fresh.sort_by_key(|&g| self.xs[g as usize].len() + self.zs[g as usize].len());
                fresh.truncate(gens.len().max(256));
                gens.extend(fresh);
                continue;
            }
            // Residual-guided growth stalled: fall back to whole hops of
            // the touching closure; saturation makes NotMember exact.
            let mut cells: BTreeSet<CellId> = seed.iter().copied().collect();
            for &g in &gens {
                for &(c, _) in self.xs[g as usize].iter() {
                    cells.insert(c);
                }
                for &(c, _) in self.zs[g as usize].iter() {
                    cells.insert(c);
                }
            }
            let grown: BTreeSet<u32> =
                cells.iter().flat_map(|&c| t[c as usize].iter().copied()).collect();
            if grown.len() == gens.len() {
                return Membership::NotMember;
            }
            gens = grown;
        }
    }

    /// Generators whose X (or Z) exponent list has an entry on one of the
    /// given cells.
    fn hitting(&self, cells: &[CellId], on_x: bool) -> BTreeSet<u32> {
        let t = self.touching();
        let mut out = BTreeSet::new();
        for &c in cells {
            for &g in t[c as usize].iter() {
                if out.contains(&g) {
                    continue;
                }
                let part = if on_x { &self.xs[g as usize] } else { &self.zs[g as usize] };
                if part.binary_search_by_key(&c, |&(cc, _)| cc).is_ok() {
                    out.insert(g);
                }
            }
        }
        out
    }

    /// Howell-reduce the exponents of `p` against a generator subset over
    /// the cells the subset touches. Exponent equality is demanded on every
    /// such cell, so a successful reduction is a genuine combination no
    /// matter how the subset was chosen; it is rebuilt and compared exactly
    /// before being reported. Failure returns the residue's cells, tagged
    /// `true` for the X block.
    fn reduce_attempt(
        &self,
        cx: &CellComplex,
        p: &PauliOperator,
        gens: &BTreeSet<u32>,
    ) -> Result<Membership, Vec<(CellId, bool)>> {
        let mut cells: BTreeSet<CellId> = p.x.support().chain(p.z.support()).collect();
        for &g in gens {
            for &(c, _) in self.xs[g as usize].iter() {
                cells.insert(c);
            }
            for &(c, _) in self.zs[g as usize].iter() {
                cells.insert(c);
            }
        }
        let cells: Vec<CellId> = cells.into_iter().collect();
        let w = cells.len();
        let pos = |c: CellId| cells.binary_search(&c).expect("cell in the restricted set");
        let glist: Vec<u32> = gens.iter().copied().collect();
        let m = self.modulus;
        let rows: Vec<Vec<i64>> = glist
            .iter()
            .map(|&g| {
                let mut row = vec![0i64; 2 * w];
                for &(c, v) in self.xs[g as usize].iter() {
                    row[pos(c)] = v;
                }
                for &(c, v) in self.zs[g as usize].iter() {
                    row[w + pos(c)] = v;
                }
                row
            })
            .collect();
        let hf = howell_form(m, 2 * w, &rows);
        let mut b = vec![0i64; 2 * w];
        for (c, v) in p.x.iter() {
            b[pos(c)] = v;
        }
        for (c, v) in p.z.iter() {
            b[w + pos(c)] = v;
        }
        let mut coefs = vec![0i64; glist.len()];
        for (k, row) in hf.rows.iter().enumerate() {
            let piv = hf.pivots[k];
            // Howell pivots divide the modulus; the canonical residue of
            // b[piv] modulo the pivot survives the subtraction.
            let q = b[piv] / row[piv];
            if q == 0 {
                continue;
            }
            for (bj, rj) in b.iter_mut().zip(row) {
                *bj = (*bj - q * rj).rem_euclid(m);
            }
            for (cj, tj) in coefs.iter_mut().zip(&hf.transform[k]) {
                *cj = (*cj + q * tj).rem_euclid(m);
            }
        }
        if b.iter().any(|&v| v != 0) {
            let res: Vec<(CellId, bool)> = b
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v != 0)
                .map(|(i, _)| if i < w { (cells[i], true) } else { (cells[i - w], false) })
                .collect();
            return Err(res);
        }
        let combination: Vec<(usize, i64)> = glist
            .iter()
            .zip(&coefs)
            .filter(|&(_, &e)| e != 0)
            .map(|(&g, &e)| (g as usize, e))
            .collect();
        let mut prod = PauliOperator::identity(cx, self.degree, self.modulus);
        for &(g, e) in &combination {
            prod = multiply(&prod, &self.generator(cx, g).pow(e)).expect("same algebra");
        }
        assert_eq!(prod.x, p.x, "membership certificate lost the X exponents");
        assert_eq!(prod.z, p.z, "membership certificate lost the Z exponents");
        Ok(Membership::Member { combination, phase_defect: p.phase - prod.phase })
    }

    /// Invariant factors of (everything commuting with the group) modulo the
    /// group's own exponent span: the logical algebra. The commutant is the
    /// kernel of the symplectic pairing matrix of the generators, so no
    /// support enumeration is involved.
    pub fn commutant_quotient(&self) -> InvariantFactors {
        let m = self.modulus;
        let n = self.n_qudits;
        // Row i pairs a vector (x|z) to the commutator phase numerator of
        // generator i against it: <z_i, x> - <x_i, z>.
        let mut s = ModMat::zero(m, self.len(), 2 * n);
        for i in 0..self.len() {
            for &(c, v) in self.zs[i].iter() {
                s.set(i, c as usize, v);
            }
            for &(c, v) in self.xs[i].iter() {
                s.set(i, n + c as usize, (m - v) % m);
            }
        }
        let SolveOutcome::Solution { kernel, .. } = solve_mod(&s, &vec![0; self.len()]) else {
            unreachable!("the zero vector always solves the homogeneous system");
        };
        let full = ModMat::from_columns(m, 2 * n, &kernel);
        let mut sub = ModMat::zero(m, 2 * n, self.len());
        for i in 0..self.len() {
            for &(c, v) in self.xs[i].iter() {
                sub.set(c as usize, i, v);
            }
            for &(c, v) in self.zs[i].iter() {
                sub.set(n + c as usize, i, v);
            }
        }
        quotient_invariants(&sub, &full)
            .expect("a commuting group lies inside its own commutant")
    }
}

/// Visit each cell in the union of two sorted support lists once.
fn merge_support(a: &[(CellId, i64)], b: &[(CellId, i64)], mut visit: impl FnMut(CellId)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let c = match (a.get(i), b.get(j)) {
            (Some(&(ca, _)), Some(&(cb, _))) => {
                if ca <= cb {
                    i += 1;
                    if ca == cb {
                        j += 1;
                    }
                    ca
                } else {
                    j += 1;
                    cb
                }
            }
            (Some(&(ca, _)), None) => {
                i += 1;
                ca
            }
            (None, Some(&(cb, _))) => {
                j += 1;
                cb
            }
            (None, None) => unreachable!(),
        };
        visit(c);
    }
}
