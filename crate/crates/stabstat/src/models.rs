//! Stabilizer models on cubical tori. Three single-layer shapes cover eight
//! families: a plain pair (X on coboundaries, Z on boundaries), a gauged pair
//! whose lower generator carries a cup-product Z-tail, and a condensed triple
//! that doubles the boundary detector and adds a two-sided condensation term.
//! On top of these sits a four-dimensional multi-layer family with one face
//! qudit lattice per level, hopping terms tying the layers together, and
//! gauge terms indexed by a congruence lattice of layer exponents.
//!
//! Tails repeat under translation, so every tail is computed once per axis
//! type at the zero base point and translated to the rest of the lattice.

use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::complex::{
    apply_differential, build_cubical_torus, build_layered_cubical_torus, AxisSet, BasePoint,
    CellComplex, CellId, Cochain, ComplexError, ComplexKind,
};
use crate::cup::{cup_integral_left, cup_integral_right};
use crate::linalg::{
    extgcd, hermite_normal_form, howell_form, quotient_invariants, IntMat, InvariantFactors,
    ModMat,
};
use crate::par;
use crate::pauli::{PauliOperator, PhaseExp, StabilizerGroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{family} is not defined at d={d}, k={k}, M={modulus}")]
    UnsupportedDimension { family: Family, d: usize, k: usize, modulus: i64 },
    #[error("the lattice would need {cells} cells, over the cap {cap}")]
    SizeLimitExceeded { cells: u64, cap: u64 },
    #[error("lattice size {l} is degenerate")]
    DegenerateLattice { l: usize },
    #[error("the {family} model has no {kind} operator")]
    UnknownKind { family: Family, kind: String },
    #[error("expected a degree-{expected} support, got degree {got}")]
    WrongDegree { expected: usize, got: usize },
    #[error("support lives on a different complex or qudit algebra")]
    MixedComplex,
    #[error("levels must be a divisibility chain of at most 3 entries, each at least 2")]
    InvalidLevels,
    #[error("twist entry ({row},{col}) is out of range")]
    InvalidTwist { row: usize, col: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Toric,
    GaugedToric,
    FermionicLoop,
    DoubleSemion,
    SemionicMembrane,
    FermionicParticle,
    FermionicMembrane,
    FermionicVolume,
    DwMultilayer,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Toric,
        Family::GaugedToric,
        Family::FermionicLoop,
        Family::DoubleSemion,
        Family::SemionicMembrane,
        Family::FermionicParticle,
        Family::FermionicMembrane,
        Family::FermionicVolume,
        Family::DwMultilayer,
    ];

    fn as_str(self) -> &'static str {
        match self {
            Family::Toric => "toric",
            Family::GaugedToric => "gauged-toric",
            Family::FermionicLoop => "fermionic-loop",
            Family::DoubleSemion => "double-semion",
            Family::SemionicMembrane => "semionic-membrane",
            Family::FermionicParticle => "fermionic-particle",
            Family::FermionicMembrane => "fermionic-membrane",
            Family::FermionicVolume => "fermionic-volume",
            Family::DwMultilayer => "dw-multilayer",
        }
    }

    /// Families whose doubled charge is condensed: the stabilizer set gains
    /// the condensation term and the boundary detector appears squared.
    pub fn condenses(self) -> bool {
        matches!(
            self,
            Family::FermionicLoop
                | Family::DoubleSemion
                | Family::SemionicMembrane
                | Family::FermionicVolume
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown model family `{s}`"))
    }
}

/// Shape of the single-layer stabilizer set.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Shape {
    /// {A, B}: bare coboundary and boundary generators.
    Plain,
    /// {G, B}: the lower generator carries the cup Z-tail.
    Gauged,
    /// {G, B^2, C~}: doubled detector plus the condensation term.
    Condensed,
}

fn shape(f: Family) -> Shape {
    match f {
        Family::Toric => Shape::Plain,
        Family::GaugedToric | Family::FermionicParticle | Family::FermionicMembrane => Shape::Gauged,
        f if f.condenses() => Shape::Condensed,
        Family::DwMultilayer => unreachable!("multi-layer models take the layered build path"),
        _ => unreachable!(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub family: Family,
    pub d: usize,
    pub l: usize,
    pub modulus: i64,
    pub qudit_degree: usize,
    /// Multi-layer only: per-layer levels, a divisibility chain.
    pub levels: Vec<i64>,
    /// Multi-layer only: upper-triangular twist rows, diagonal first.
    pub twist: Vec<Vec<i64>>,
}

impl ModelSpec {
    fn single(family: Family, d: usize, l: usize, modulus: i64, k: usize) -> Result<Self, ModelError> {
        let spec = ModelSpec { family, d, l, modulus, qudit_degree: k, levels: Vec::new(), twist: Vec::new() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn toric(d: usize, l: usize, modulus: i64, k: usize) -> Result<Self, ModelError> {
        Self::single(Family::Toric, d, l, modulus, k)
    }

    pub fn gauged_toric(d: usize, l: usize, modulus: i64, k: usize) -> Result<Self, ModelError> {
        Self::single(Family::GaugedToric, d, l, modulus, k)
    }

    pub fn fermionic_loop(d: usize, l: usize) -> Result<Self, ModelError> {
        Self::single(Family::FermionicLoop, d, l, 4, d.wrapping_sub(2))
    }

    pub fn double_semion(l: usize) -> Result<Self, ModelError> {
        Self::single(Family::DoubleSemion, 2, l, 4, 1)
    }

    pub fn semionic_membrane(l: usize) -> Result<Self, ModelError> {
        Self::single(Family::SemionicMembrane, 6, l, 4, 3)
    }

    pub fn fermionic_particle(d: usize, l: usize) -> Result<Self, ModelError> {
        Self::single(Family::FermionicParticle, d, l, 2, d.wrapping_sub(1))
    }

    pub fn fermionic_membrane(d: usize, l: usize) -> Result<Self, ModelError> {
        Self::single(Family::FermionicMembrane, d, l, 2, d.wrapping_sub(3))
    }

    pub fn fermionic_volume(d: usize, l: usize) -> Result<Self, ModelError> {
        Self::single(Family::FermionicVolume, d, l, 4, d.wrapping_sub(4))
    }

    pub fn dw_multilayer(l: usize, levels: Vec<i64>, twist: Vec<Vec<i64>>) -> Result<Self, ModelError> {
        validate_dw_params(&levels, &twist)?;
        let ns = *levels.last().unwrap();
        let spec = ModelSpec {
            family: Family::DwMultilayer,
            d: 4,
            l,
            modulus: ns * ns,
            qudit_degree: 2,
            levels,
            twist,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let (d, k, m) = (self.d, self.qudit_degree, self.modulus);
        let bad = || {
            Err(ModelError::UnsupportedDimension { family: self.family, d, k, modulus: m })
        };
        if d < 1 || d > 8 || m < 2 {
            return bad();
        }
        let in_range = k >= 1 && k + 1 <= d;
        let gauged_ok = || {
            // The tail index must be in range and the tails must close: the
            // top pairing of two coboundary tails cancels when the index is
            // zero, when d+k is even, or over two-state qudits.
            in_range && 2 * k >= d && (2 * k == d || (d + k) % 2 == 0 || m == 2)
        };
        let ok = match self.family {
            Family::Toric => in_range,
            Family::GaugedToric => gauged_ok(),
            Family::FermionicLoop => (4..=8).contains(&d) && m == 4 && k == d - 2,
            Family::DoubleSemion => d == 2 && m == 4 && k == 1,
            Family::SemionicMembrane => d == 6 && m == 4 && k == 3,
            Family::FermionicParticle => (2..=8).contains(&d) && m == 2 && k == d - 1,
            Family::FermionicMembrane => (6..=8).contains(&d) && m == 2 && k == d - 3,
            Family::FermionicVolume => d == 8 && m == 4 && k == 4,
            Family::DwMultilayer => {
                validate_dw_params(&self.levels, &self.twist)?;
                let ns = *self.levels.last().unwrap();
                d == 4 && k == 2 && m == ns * ns
            }
        };
        if ok {
            Ok(())
        } else {
            bad()
        }
    }
}

fn validate_dw_params(levels: &[i64], twist: &[Vec<i64>]) -> Result<(), ModelError> {
    let s = levels.len();
    if !(1..=3).contains(&s) || levels.iter().any(|&n| n < 2) {
        return Err(ModelError::InvalidLevels);
    }
    for w in levels.windows(2) {
        if w[1] % w[0] != 0 {
            return Err(ModelError::InvalidLevels);
        }
    }
    if twist.len() != s || twist.iter().any(|row| row.len() != s) {
        return Err(ModelError::InvalidLevels);
    }
    for (j, row) in twist.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let cap = if k < j {
                0
            } else if k == j {
                extgcd(levels[j], 2).0
            } else {
                extgcd(levels[j], levels[k]).0
            };
            if v < 0 || v >= cap.max(1) || (k < j && v != 0) {
                return Err(ModelError::InvalidTwist { row: j, col: k });
            }
        }
    }
    Ok(())
}

/// Which stabilizer family a generator belongs to. The unnamed integer in
/// the layered variants is a zero-based layer or basis index; display is
/// one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StabFamily {
    /// Bare X on a coboundary.
    A,
    /// X on a coboundary with the cup Z-tail.
    G,
    /// Z on a boundary.
    B,
    /// Doubled Z on a boundary.
    BSq,
    /// Condensation term: doubled X with the two-sided doubled Z-tail.
    CT,
    /// Layer hopping term.
    W(usize),
    /// Gauge term for one congruence-basis pair.
    Gnm(usize),
    /// Unit relation on a layer whose level squared sits below the modulus.
    R(usize),
}

impl fmt::Display for StabFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabFamily::A => write!(f, "A"),
            StabFamily::G => write!(f, "G"),
            StabFamily::B => write!(f, "B"),
            StabFamily::BSq => write!(f, "B2"),
            StabFamily::CT => write!(f, "Ct"),
            StabFamily::W(j) => write!(f, "W{}", j + 1),
            StabFamily::Gnm(r) => write!(f, "Gnm{}", r + 1),
            StabFamily::R(j) => write!(f, "R{}", j + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExcitationKind {
    /// Z on the doubled support (bare support over two-state qudits).
    Charge,
    /// X on the support with the family's decoration tail.
    Flux,
    /// Toric composite: X with the plain cup tail.
    Em,
    /// Pair hopping: the doubled composite that the condensed families
    /// absorb into their stabilizer set.
    Hopping,
}

impl ExcitationKind {
    fn as_str(self) -> &'static str {
        match self {
            ExcitationKind::Charge => "charge",
            ExcitationKind::Flux => "flux",
            ExcitationKind::Em => "em",
            ExcitationKind::Hopping => "hopping",
        }
    }
}

impl fmt::Display for ExcitationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExcitationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [ExcitationKind::Charge, ExcitationKind::Flux, ExcitationKind::Em, ExcitationKind::Hopping]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown excitation kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyndromeEntry {
    pub family: StabFamily,
    pub cell: CellId,
    pub phase: PhaseExp,
}

pub struct Model {
    pub spec: ModelSpec,
    pub complex: CellComplex,
    pub group: StabilizerGroup,
    /// Per-generator (family, cell); layered generators carry base-lattice
    /// cell ids, the layer lives in the family tag.
    tags: Vec<(StabFamily, CellId)>,
    /// Build notes; the congruence basis for the multi-layer family.
    pub metadata: Vec<String>,
}

impl Model {
    pub fn generator_family(&self, i: usize) -> (StabFamily, CellId) {
        self.tags[i]
    }

    /// Generator counts per family, in generator order.
    pub fn family_counts(&self) -> Vec<(StabFamily, usize)> {
        let mut out: Vec<(StabFamily, usize)> = Vec::new();
        for &(f, _) in &self.tags {
            match out.last_mut() {
                Some((g, n)) if *g == f => *n += 1,
                _ => out.push((f, 1)),
            }
        }
        out
    }

    /// All stabilizers with a nonzero commutator phase against `p`, sorted
    /// by family and cell.
    pub fn syndrome(&self, p: &PauliOperator) -> Vec<SyndromeEntry> {
        assert_eq!(p.x.complex_token, self.complex.token(), "operator lives on a different complex");
        assert_eq!(p.modulus, self.spec.modulus, "operator modulus differs from the model");
        let mut out: Vec<SyndromeEntry> = self
            .group
            .violations(p)
            .into_iter()
            .map(|(i, phase)| {
                let (family, cell) = self.tags[i];
                SyndromeEntry { family, cell, phase }
            })
            .collect();
        out.sort_by_key(|e| (e.family, e.cell));
        out
    }

    pub fn excitation_operator(
        &self,
        kind: ExcitationKind,
        support: &Cochain,
    ) -> Result<PauliOperator, ModelError> {
        let k = self.spec.qudit_degree;
        if support.degree != k {
            return Err(ModelError::WrongDegree { expected: k, got: support.degree });
        }
        if support.complex_token != self.complex.token() || support.modulus != self.spec.modulus {
            return Err(ModelError::MixedComplex);
        }
        let unknown =
            || Err(ModelError::UnknownKind { family: self.spec.family, kind: kind.to_string() });
        if self.spec.family == Family::DwMultilayer {
            return unknown();
        }
        let cx = &self.complex;
        let (d, m) = (self.spec.d, self.spec.modulus);
        let sh = shape(self.spec.family);
        let j = 2 * k as i64 - d as i64;
        Ok(match kind {
            ExcitationKind::Charge => {
                let z = if m == 2 { support.clone() } else { support.scaled(2) };
                PauliOperator::from_z(cx, &z)
            }
            ExcitationKind::Flux => match sh {
                Shape::Plain => PauliOperator::from_x(cx, support),
                Shape::Gauged => {
                    let z = cup_integral_left(cx, support, j as usize).expect("tail in range");
                    PauliOperator::new(support.clone(), z, PhaseExp::ZERO)
                }
                Shape::Condensed => {
                    let sgn = if d % 2 == 0 { -1 } else { 1 };
                    let head = cup_integral_left(cx, support, j as usize).expect("tail in range");
                    let corr = boundary_adjoint(
                        cx,
                        &cup_integral_left(cx, support, j as usize + 1).expect("tail in range"),
                    );
                    PauliOperator::new(support.clone(), head.plus(&corr.scaled(sgn)), PhaseExp::ZERO)
                }
            },
            ExcitationKind::Em => {
                if sh != Shape::Plain || j < 0 {
                    return unknown();
                }
                let z = cup_integral_left(cx, support, j as usize).expect("tail in range");
                PauliOperator::new(support.clone(), z, PhaseExp::ZERO)
            }
            ExcitationKind::Hopping => match sh {
                Shape::Plain => {
                    if m != 4 || j < 0 {
                        return unknown();
                    }
                    let z = cup_integral_left(cx, support, j as usize).expect("tail in range");
                    PauliOperator::new(support.scaled(2), z.scaled(2), PhaseExp::ZERO)
                }
                Shape::Gauged => {
                    let z = cup_integral_left(cx, support, j as usize).expect("tail in range");
                    PauliOperator::new(support.clone(), z, PhaseExp::ZERO)
                }
                Shape::Condensed => {
                    let head = cup_integral_left(cx, support, j as usize).expect("tail in range");
                    let corr = boundary_adjoint(
                        cx,
                        &cup_integral_right(cx, support, j as usize + 1).expect("tail in range"),
                    );
                    PauliOperator::new(
                        support.scaled(2),
                        head.plus(&corr).scaled(2),
                        PhaseExp::ZERO,
                    )
                }
            },
        })
    }
}

pub fn build_model(spec: &ModelSpec) -> Result<Model, ModelError> {
    spec.validate()?;
    match spec.family {
        Family::DwMultilayer => dw_build(&spec.levels, &spec.twist, spec.l),
        _ => build_single_layer(spec),
    }
}

fn lift_complex_err(spec: &ModelSpec, e: ComplexError) -> ModelError {
    match e {
        ComplexError::SizeLimitExceeded { cells, cap } => ModelError::SizeLimitExceeded { cells, cap },
        ComplexError::DegenerateLattice { l } => ModelError::DegenerateLattice { l },
        _ => ModelError::UnsupportedDimension {
            family: spec.family,
            d: spec.d,
            k: spec.qudit_degree,
            modulus: spec.modulus,
        },
    }
}

/// Transpose of the differential on the support of `u`: each coface of the
/// output cell contributes its incidence sign times the coefficient there.
fn boundary_adjoint(cx: &CellComplex, u: &Cochain) -> Cochain {
    assert!(u.degree >= 1);
    let mut out = Cochain::zero(cx, u.degree - 1, u.modulus);
    for (r, v) in u.iter() {
        for &(q, s) in cx.boundary_of(u.degree, r) {
            out.add_to(q, s as i64 * v);
        }
    }
    out
}

fn boundary_cochain(cx: &CellComplex, k: usize, c: CellId, modulus: i64) -> Cochain {
    Cochain::from_entries(cx, k - 1, modulus, cx.boundary_of(k, c).iter().map(|&(f, s)| (f, s as i64)))
}

fn lattice_size(cx: &CellComplex) -> usize {
    match cx.kind {
        ComplexKind::CubicalTorus { l, .. } => l,
        _ => unreachable!("tail tables need a plain cubical torus"),
    }
}

/// One tail per axis type at the zero base point; every other cell's tail is
/// a lattice translate. Exact because the cup tables depend only on axis
/// sets and relative offsets.
struct TailTable {
    gen_degree: usize,
    tail_degree: usize,
    modulus: i64,
    n_types: usize,
    protos: Vec<Vec<(BasePoint, AxisSet, i64)>>,
}

impl TailTable {
    fn per_type(
        cx: &CellComplex,
        gen_degree: usize,
        modulus: i64,
        f: impl Fn(&CellComplex, CellId) -> Cochain,
    ) -> TailTable {
        let l = lattice_size(cx);
        let n_types = cx.n_cells(gen_degree) / l.pow(cx.dim() as u32);
        let mut protos = Vec::with_capacity(n_types);
        let mut tail_degree = gen_degree;
        for t in 0..n_types {
            let tail = f(cx, t as CellId);
            tail_degree = tail.degree;
            protos.push(
                tail.iter()
                    .map(|(c, v)| {
                        let (b, a) = cx.cubical_cell(tail.degree, c);
                        (b, a, v)
                    })
                    .collect(),
            );
        }
        TailTable { gen_degree, tail_degree, modulus, n_types, protos }
    }

    fn tail_for(&self, cx: &CellComplex, cell: CellId) -> Cochain {
        let l = lattice_size(cx);
        let ty = cell as usize % self.n_types;
        let (base, _) = cx.cubical_cell(self.gen_degree, cell);
        let mut out = Cochain::zero(cx, self.tail_degree, self.modulus);
        for (pb, pax, v) in &self.protos[ty] {
            let nb: BasePoint = pb
                .iter()
                .zip(base.iter())
                .map(|(&a, &b)| ((a as usize + b as usize) % l) as u16)
                .collect();
            out.add_to(cx.cubical_id(&nb, pax), *v);
        }
        out
    }
}

fn gen_name(fam: StabFamily, cx: &CellComplex, deg: usize, c: CellId) -> String {
    format!("{fam}[{}]", cx.cell_label(deg, c))
}

fn build_single_layer(spec: &ModelSpec) -> Result<Model, ModelError> {
    let cx = build_cubical_torus(spec.d, spec.l).map_err(|e| lift_complex_err(spec, e))?;
    let k = spec.qudit_degree;
    let m = spec.modulus;
    let sh = shape(spec.family);
    let n_low = cx.n_cells(k - 1);
    let n_up = cx.n_cells(k + 1);
    let n_mid = cx.n_cells(k);
    let total = n_low + n_up + if sh == Shape::Condensed { n_mid } else { 0 };
    let mut gens: Vec<(String, PauliOperator)> = Vec::with_capacity(total);
    let mut tags: Vec<(StabFamily, CellId)> = Vec::with_capacity(total);

    let lower_tag = if sh == Shape::Plain { StabFamily::A } else { StabFamily::G };
    let j = (2 * k).wrapping_sub(spec.d); // validated nonnegative for tails
    let lower_tails = if sh == Shape::Plain {
        None
    } else {
        Some(TailTable::per_type(&cx, k - 1, m, |cx, c| {
            let dc = apply_differential(cx, &Cochain::unit(cx, k - 1, m, c));
            cup_integral_right(cx, &dc, j).expect("tail in range")
        }))
    };
    for c in 0..n_low as CellId {
        let x = apply_differential(&cx, &Cochain::unit(&cx, k - 1, m, c));
        let z = match &lower_tails {
            None => Cochain::zero(&cx, k, m),
            Some(t) => t.tail_for(&cx, c),
        };
        gens.push((gen_name(lower_tag, &cx, k - 1, c), PauliOperator::new(x, z, PhaseExp::ZERO)));
        tags.push((lower_tag, c));
    }

    let (upper_tag, upper_scale) =
        if sh == Shape::Condensed { (StabFamily::BSq, 2) } else { (StabFamily::B, 1) };
    for c in 0..n_up as CellId {
        let z = boundary_cochain(&cx, k + 1, c, m).scaled(upper_scale);
        gens.push((gen_name(upper_tag, &cx, k + 1, c), PauliOperator::from_z(&cx, &z)));
        tags.push((upper_tag, c));
    }

    if sh == Shape::Condensed {
        let ct_tails = TailTable::per_type(&cx, k, m, |cx, c| {
            let u = Cochain::unit(cx, k, m, c);
            cup_integral_left(cx, &u, j)
                .expect("tail in range")
                .plus(&boundary_adjoint(cx, &cup_integral_right(cx, &u, j + 1).expect("tail in range")))
                .scaled(2)
        });
        for c in 0..n_mid as CellId {
            let x = Cochain::unit(&cx, k, m, c).scaled(2);
            let z = ct_tails.tail_for(&cx, c);
            gens.push((gen_name(StabFamily::CT, &cx, k, c), PauliOperator::new(x, z, PhaseExp::ZERO)));
            tags.push((StabFamily::CT, c));
        }
    }

    let group = StabilizerGroup::new(&cx, k, m, gens).expect("generators live on the model complex");
    Ok(Model { spec: spec.clone(), complex: cx, group, tags, metadata: Vec::new() })
}

// --- multi-layer family -----------------------------------------------------

/// Basis pairs (n, m) of the layer-exponent lattice: all (n, m) whose scaled
/// rows close mod the top level. Solved over the top level, lifted, and
/// column-reduced over the integers; every returned pair is re-checked by
/// substitution.
pub fn dw_lambda_basis(
    levels: &[i64],
    twist: &[Vec<i64>],
) -> Result<Vec<(Vec<i64>, Vec<i64>)>, ModelError> {
    validate_dw_params(levels, twist)?;
    let s = levels.len();
    let ns = levels[s - 1];
    // Row j of the congruence: (ns/N_j) n_j - sum_{k>=j} l_jk (ns/N_k) m_k.
    let column = |i: usize| -> Vec<i64> {
        (0..s)
            .map(|row| {
                if i < s {
                    if i == row {
                        ns / levels[i]
                    } else {
                        0
                    }
                } else {
                    let k = i - s;
                    if k >= row {
                        -(twist[row][k] * (ns / levels[k]))
                    } else {
                        0
                    }
                }
            })
            .collect()
    };
    let transposed: Vec<Vec<i64>> = (0..2 * s).map(column).collect();
    let hf = howell_form(ns, s, &transposed);
    let mut gens: Vec<Vec<i64>> = hf.kernel.clone();
    for i in 0..2 * s {
        let mut e = vec![0i64; 2 * s];
        e[i] = ns;
        gens.push(e);
    }
    let a = IntMat::from_fn(2 * s, gens.len(), |i, jc| gens[jc][i]);
    let h = hermite_normal_form(&a).h;
    let mut basis = Vec::new();
    for jc in 0..h.cols {
        let col: Vec<i64> = (0..2 * s)
            .map(|i| h[(i, jc)].to_i64().expect("congruence lattice entries stay small"))
            .collect();
        if col.iter().all(|&x| x == 0) {
            continue;
        }
        let (n, m) = (col[..s].to_vec(), col[s..].to_vec());
        for row in 0..s {
            let mut acc = n[row] * (ns / levels[row]);
            for k in row..s {
                acc -= twist[row][k] * (ns / levels[k]) * m[k];
            }
            assert_eq!(acc.rem_euclid(ns), 0, "basis pair fails the congruence");
        }
        basis.push((n, m));
    }
    assert_eq!(basis.len(), 2 * s, "the congruence lattice has full rank");
    Ok(basis)
}

/// The layer-exponent lattice modulo the condensed tuples: one hopping tuple
/// per layer plus the squared-level unit vectors.
pub fn dw_fusion_group(levels: &[i64], twist: &[Vec<i64>]) -> Result<InvariantFactors, ModelError> {
    let basis = dw_lambda_basis(levels, twist)?;
    let s = levels.len();
    let m = levels[s - 1] * levels[s - 1];
    let full_cols: Vec<Vec<i64>> =
        basis.iter().map(|(n, mm)| n.iter().chain(mm.iter()).copied().collect()).collect();
    let mut sub_cols: Vec<Vec<i64>> = Vec::new();
    for j in 0..s {
        let mut w = vec![0i64; 2 * s];
        w[j] = twist[j][j] * levels[j];
        for k in j + 1..s {
            w[k] = twist[j][k] * levels[k];
        }
        w[s + j] = levels[j];
        sub_cols.push(w);
        let mut un = vec![0i64; 2 * s];
        un[j] = levels[j] * levels[j];
        sub_cols.push(un);
        let mut um = vec![0i64; 2 * s];
        um[s + j] = levels[j] * levels[j];
        sub_cols.push(um);
    }
    let full = ModMat::from_columns(m, 2 * s, &full_cols);
    let sub = ModMat::from_columns(m, 2 * s, &sub_cols);
    Ok(quotient_invariants(&sub, &full).expect("condensed tuples lie in the lattice"))
}

/// Per-face tails of the multi-layer generators on the base lattice.
struct DwTails {
    base: CellComplex,
    /// u_f with u_f(f') = integral of f' cup f.
    hop: Vec<Cochain>,
    /// Coboundary of each edge as a face cochain.
    de: Vec<Cochain>,
    /// w_e with w_e(f) = integral of (d e) cup f.
    gauge: Vec<Cochain>,
}

fn dw_tails(l: usize, m: i64, spec: &ModelSpec) -> Result<DwTails, ModelError> {
    let base = build_cubical_torus(4, l).map_err(|e| lift_complex_err(spec, e))?;
    let hop = par::map_range(base.n_cells(2), |f| {
        cup_integral_left(&base, &Cochain::unit(&base, 2, m, f as CellId), 0).expect("tail in range")
    });
    let de: Vec<Cochain> = (0..base.n_cells(1))
        .map(|e| apply_differential(&base, &Cochain::unit(&base, 1, m, e as CellId)))
        .collect();
    let gauge = par::map_range(base.n_cells(1), |e| {
        cup_integral_right(&base, &de[e], 0).expect("tail in range")
    });
    Ok(DwTails { base, hop, de, gauge })
}

fn deposit(out: &mut Cochain, src: &Cochain, per: usize, layer: usize, scale: i64) {
    if scale == 0 {
        return;
    }
    let off = (layer * per) as CellId;
    for (c, v) in src.iter() {
        out.add_to(c + off, v * scale);
    }
}

/// Build the multi-layer model: one face-qudit layer per level over a single
/// uniform modulus (the top level squared), layer exponents scaled so the
/// native per-layer algebras embed. A single layer uses the plain torus.
pub fn dw_build(levels: &[i64], twist: &[Vec<i64>], l: usize) -> Result<Model, ModelError> {
    let spec = ModelSpec::dw_multilayer(l, levels.to_vec(), twist.to_vec())?;
    let s = levels.len();
    let m = spec.modulus;
    let cx = if s == 1 {
        build_cubical_torus(4, l)
    } else {
        build_layered_cubical_torus(4, l, s)
    }
    .map_err(|e| lift_complex_err(&spec, e))?;
    let tails = dw_tails(l, m, &spec)?;
    let per_f = tails.base.n_cells(2);
    let per_e = tails.base.n_cells(1);
    let basis = dw_lambda_basis(levels, twist)?;

    let mut gens: Vec<(String, PauliOperator)> = Vec::new();
    let mut tags: Vec<(StabFamily, CellId)> = Vec::new();

    for j in 0..s {
        for f in 0..per_f as CellId {
            let mut x = Cochain::zero(&cx, 2, m);
            x.add_to(f + (j * per_f) as CellId, twist[j][j] * levels[j]);
            for k in j + 1..s {
                x.add_to(f + (k * per_f) as CellId, twist[j][k] * levels[k]);
            }
            let mut z = Cochain::zero(&cx, 2, m);
            deposit(&mut z, &tails.hop[f as usize], per_f, j, m / levels[j]);
            gens.push((
                gen_name(StabFamily::W(j), &tails.base, 2, f),
                PauliOperator::new(x, z, PhaseExp::ZERO),
            ));
            tags.push((StabFamily::W(j), f));
        }
    }

    for (rho, (n, mm)) in basis.iter().enumerate() {
        for e in 0..per_e as CellId {
            let mut x = Cochain::zero(&cx, 2, m);
            let mut z = Cochain::zero(&cx, 2, m);
            for j in 0..s {
                deposit(&mut x, &tails.de[e as usize], per_f, j, n[j]);
                let alpha = m / (levels[j] * levels[j]);
                deposit(&mut z, &tails.gauge[e as usize], per_f, j, alpha * mm[j]);
            }
            gens.push((
                gen_name(StabFamily::Gnm(rho), &tails.base, 1, e),
                PauliOperator::new(x, z, PhaseExp::ZERO),
            ));
            tags.push((StabFamily::Gnm(rho), e));
        }
    }

    for j in 0..s {
        if levels[j] * levels[j] == m {
            continue;
        }
        for f in 0..per_f as CellId {
            let mut x = Cochain::zero(&cx, 2, m);
            x.add_to(f + (j * per_f) as CellId, levels[j] * levels[j]);
            gens.push((
                gen_name(StabFamily::R(j), &tails.base, 2, f),
                PauliOperator::from_x(&cx, &x),
            ));
            tags.push((StabFamily::R(j), f));
        }
    }

    let metadata = basis
        .iter()
        .enumerate()
        .map(|(rho, (n, mm))| format!("lambda[{rho}]: n = {n:?}, m = {mm:?}"))
        .collect();
    let group = StabilizerGroup::new(&cx, 2, m, gens).expect("generators live on the model complex");
    Ok(Model { spec, complex: cx, group, tags, metadata })
}

/// Gauge operator for an arbitrary layer-exponent pair on one base edge; in
/// the stabilizer group exactly when the pair sits in the congruence lattice.
pub fn dw_gnm(model: &Model, edge: CellId, n: &[i64], m: &[i64]) -> Result<PauliOperator, ModelError> {
    let spec = &model.spec;
    if spec.family != Family::DwMultilayer {
        return Err(ModelError::UnknownKind { family: spec.family, kind: "layer-gauge".into() });
    }
    let s = spec.levels.len();
    assert_eq!(n.len(), s, "one n exponent per layer");
    assert_eq!(m.len(), s, "one m exponent per layer");
    let mod_m = spec.modulus;
    let tails = dw_tails(spec.l, mod_m, spec)?;
    let per_f = tails.base.n_cells(2);
    assert!((edge as usize) < tails.base.n_cells(1), "edge id out of range");
    let mut x = Cochain::zero(&model.complex, 2, mod_m);
    let mut z = Cochain::zero(&model.complex, 2, mod_m);
    for j in 0..s {
        deposit(&mut x, &tails.de[edge as usize], per_f, j, n[j]);
        let alpha = mod_m / (spec.levels[j] * spec.levels[j]);
        deposit(&mut z, &tails.gauge[edge as usize], per_f, j, alpha * m[j]);
    }
    Ok(PauliOperator::new(x, z, PhaseExp::ZERO))
}

/// Layered membrane operator: X by the support on each layer scaled by n,
/// with the cup and shifted-cup Z-tails scaled by m. The support lives on
/// the base four-torus of the model's lattice size.
pub fn dw_membrane(
    model: &Model,
    n: &[i64],
    m: &[i64],
    support: &Cochain,
) -> Result<PauliOperator, ModelError> {
    let spec = &model.spec;
    if spec.family != Family::DwMultilayer {
        return Err(ModelError::UnknownKind { family: spec.family, kind: "layer-membrane".into() });
    }
    let s = spec.levels.len();
    assert_eq!(n.len(), s, "one n exponent per layer");
    assert_eq!(m.len(), s, "one m exponent per layer");
    let mod_m = spec.modulus;
    let base = build_cubical_torus(4, spec.l).map_err(|e| lift_complex_err(spec, e))?;
    if support.degree != 2 {
        return Err(ModelError::WrongDegree { expected: 2, got: support.degree });
    }
    if support.complex_token != base.token() || support.modulus != mod_m {
        return Err(ModelError::MixedComplex);
    }
    let per_f = base.n_cells(2);
    let head = cup_integral_right(&base, support, 0).expect("tail in range");
    let corr = cup_integral_right(&base, &apply_differential(&base, support), 1).expect("tail in range");
    let tail = head.plus(&corr.scaled(-1));
    let mut x = Cochain::zero(&model.complex, 2, mod_m);
    let mut z = Cochain::zero(&model.complex, 2, mod_m);
    for j in 0..s {
        deposit(&mut x, support, per_f, j, n[j]);
        let alpha = mod_m / (spec.levels[j] * spec.levels[j]);
        deposit(&mut z, &tail, per_f, j, alpha * m[j]);
    }
    Ok(PauliOperator::new(x, z, PhaseExp::ZERO))
}

/// Same generated group up to global phases: every generator of each group
/// is a member of the other. Membership solves run per generator in
/// parallel.
pub fn exponent_span_equal(cx: &CellComplex, a: &StabilizerGroup, b: &StabilizerGroup) -> bool {
    let contains = |big: &StabilizerGroup, small: &StabilizerGroup| -> bool {
        par::map_range(small.len(), |i| {
            big.is_member(cx, &small.generator(cx, i)).is_member_up_to_phase()
        })
        .into_iter()
        .all(|ok| ok)
    };
    contains(b, a) && contains(a, b)
}
