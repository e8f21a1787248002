//! Higher cup products on simplicial and cubical cochains, with the signed
//! Leibniz rule
//!
//! ```text
//! d(a cup_i b) = da cup_i b + (-1)^p a cup_i db
//!              + (-1)^{p+q+i} a cup_{i-1} b + (-1)^{pq+p+q} b cup_{i-1} a
//! ```
//!
//! as the defining gate, plus the Steenrod square, Bockstein, and the
//! quartic-coefficient representative built from them.
//!
//! Both families are driven by coefficient tables on a universal model cell.
//! The simplicial tables solve the chain-level recursion behind the Leibniz
//! rule degree by degree, inverting the boundary with the cone contraction
//! toward vertex 0; every inversion is certified at build time by asserting
//! the boundary identity it must satisfy. The cubical tables push the
//! simplicial ones through the shuffle subdivision of the model cube and the
//! front/back projection onto its tensor factors; the projection retracts the
//! subdivision exactly, which is also asserted at build time. Tables are
//! translation invariant, so evaluation on a torus never touches global
//! topology.

use crate::complex::{apply_differential, CellComplex, CellId, Cochain, ComplexKind};
use once_cell::sync::Lazy;
use smallvec::SmallVec;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CupError {
    #[error("cochains live on different complexes")]
    MixedComplex,
    #[error("cochains have different moduli")]
    MixedModulus,
    #[error("input is not closed in its modulus")]
    NotCocycle,
    #[error("cup products need a cubical torus or a simplicial complex")]
    UnsupportedComplex,
}

// ---------------------------------------------------------------------------
// Simplicial tables
//
// A table entry (front, back, coeff) is a pair of vertex subsets of the
// universal m-simplex {0..m}; evaluation of a cup_i on an m-cell contracts
// the bidegree-(p,q) entries against the two cochains.
// ---------------------------------------------------------------------------

type Mask = u16;

fn popcount(m: Mask) -> usize {
    m.count_ones() as usize
}

/// Bits of a mask in increasing order.
fn bits(mut m: Mask) -> SmallVec<[u8; 12]> {
    let mut out = SmallVec::new();
    while m != 0 {
        let b = m.trailing_zeros() as u8;
        out.push(b);
        m &= m - 1;
    }
    out
}

/// Alternating-sign vertex drops of a simplex mask.
fn mask_boundary(m: Mask) -> SmallVec<[(Mask, i64); 12]> {
    let mut out = SmallVec::new();
    if popcount(m) < 2 {
        return out;
    }
    for (t, b) in bits(m).into_iter().enumerate() {
        let sign = if t % 2 == 0 { 1 } else { -1 };
        out.push((m & !(1 << b), sign));
    }
    out
}

/// Image of a mask under the order embedding that skips vertex j.
fn spread(m: Mask, j: u8) -> Mask {
    let low = m & ((1 << j) - 1);
    let high = (m & !((1 << j) - 1)) << 1;
    low | high
}

/// Formal integer combination of tensor pairs of simplices.
#[derive(Clone, Default)]
struct TensorChain(BTreeMap<(Mask, Mask), i64>);

impl TensorChain {
    fn add(&mut self, f: Mask, b: Mask, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.0.entry((f, b)).or_insert(0);
        *e += c;
        if *e == 0 {
            self.0.remove(&(f, b));
        }
    }

    fn add_all(&mut self, other: &TensorChain, scale: i64) {
        for (&(f, b), &c) in &other.0 {
            self.add(f, b, c * scale);
        }
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Tensor boundary with the first-factor degree in the Koszul sign.
    fn boundary(&self) -> TensorChain {
        let mut out = TensorChain::default();
        for (&(f, b), &c) in &self.0 {
            for (df, s) in mask_boundary(f) {
                out.add(df, b, s * c);
            }
            let sign = if (popcount(f) - 1) % 2 == 0 { 1 } else { -1 };
            for (db, s) in mask_boundary(b) {
                out.add(f, db, sign * s * c);
            }
        }
        out
    }

    /// Signed factor swap matching the b cup_{i-1} a term of the Leibniz rule.
    fn swap_signed(&self) -> TensorChain {
        let mut out = TensorChain::default();
        for (&(f, b), &c) in &self.0 {
            let p = popcount(f) - 1;
            let q = popcount(b) - 1;
            let sign = if (p * q + p + q) % 2 == 0 { 1 } else { -1 };
            out.add(b, f, sign * c);
        }
        out
    }

    /// Tensor contraction induced by coning onto vertex 0.
    fn contract(&self) -> TensorChain {
        let mut out = TensorChain::default();
        for (&(f, b), &c) in &self.0 {
            if f & 1 == 0 {
                out.add(f | 1, b, c);
            }
            if popcount(f) == 1 && b & 1 == 0 {
                out.add(1, b | 1, c);
            }
        }
        out
    }

    fn relabel(&self, j: u8) -> TensorChain {
        let mut out = TensorChain::default();
        for (&(f, b), &c) in &self.0 {
            out.add(spread(f, j), spread(b, j), c);
        }
        out
    }
}

type SimpTable = Arc<Vec<(Mask, Mask, i64)>>;

static SIMP_TABLES: Lazy<Mutex<HashMap<(usize, usize), SimpTable>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Higher diagonal of the universal m-simplex for cup_i, built recursively
/// and certified against the chain-level Leibniz identity.
fn simp_table(m: usize, i: usize) -> SimpTable {
    if let Some(t) = SIMP_TABLES.lock().unwrap().get(&(m, i)) {
        return t.clone();
    }
    let chain = build_simp_chain(m, i);
    let table: SimpTable =
        Arc::new(chain.0.iter().map(|(&(f, b), &c)| (f, b, c)).collect());
    SIMP_TABLES.lock().unwrap().insert((m, i), table.clone());
    table
}

fn simp_chain(m: usize, i: usize) -> TensorChain {
    let t = simp_table(m, i);
    let mut out = TensorChain::default();
    for &(f, b, c) in t.iter() {
        out.add(f, b, c);
    }
    out
}

fn build_simp_chain(m: usize, i: usize) -> TensorChain {
    let full: Mask = ((1u32 << (m + 1)) - 1) as Mask;
    let mut out = TensorChain::default();
    if i > m {
        return out;
    }
    if i == 0 {
        // Front-face / back-face diagonal.
        for k in 0..=m {
            let front: Mask = ((1u32 << (k + 1)) - 1) as Mask;
            let back: Mask = full & !(((1u32 << k) - 1) as Mask);
            out.add(front, back, 1);
        }
        return out;
    }
    // Boundary image of the lower tables.
    let mut rhs = TensorChain::default();
    let lower = simp_chain(m - 1, i);
    for j in 0..=m as u8 {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        rhs.add_all(&lower.relabel(j), sign);
    }
    let prev = simp_chain(m, i - 1);
    let msign = if m % 2 == 0 { 1 } else { -1 };
    rhs.add_all(&prev, msign);
    rhs.add_all(&prev.swap_signed(), -1);
    // rhs is the required boundary of the new table; invert by contraction.
    let mut probe = rhs.boundary();
    assert!(probe.is_zero(), "cup table recursion lost exactness at m={m} i={i}");
    let solved = rhs.contract();
    probe = solved.boundary();
    probe.add_all(&rhs, -1);
    assert!(probe.is_zero(), "cup table contraction failed at m={m} i={i}");
    solved
}

// ---------------------------------------------------------------------------
// Cubical tables
//
// A face of the model m-cube is (axes, offsets): the sub-cube spanning the
// axes in `axes` based at the corner `offsets`. An entry pairs two faces
// with an integer coefficient.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct CubeFace {
    pub axes: u16,
    pub offs: u16,
}

type CubeTable = Arc<Vec<(CubeFace, CubeFace, i64)>>;

static CUBE_TABLES: Lazy<Mutex<HashMap<(usize, usize), CubeTable>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn permutations(m: usize) -> Vec<Vec<u8>> {
    let mut arr: Vec<u8> = (0..m as u8).collect();
    let mut out = Vec::new();
    fn heaps(k: usize, arr: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if k <= 1 {
            out.push(arr.clone());
            return;
        }
        for i in 0..k {
            heaps(k - 1, arr, out);
            if k % 2 == 0 {
                arr.swap(i, k - 1);
            } else {
                arr.swap(0, k - 1);
            }
        }
    }
    heaps(m, &mut arr, &mut out);
    out
}

fn perm_sign(p: &[u8]) -> i64 {
    let mut inv = 0usize;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 { 1 } else { -1 }
}

/// Front/back projection of a vertex chain of the model cube onto signed
/// sub-cubes: sum over ascending transversals picking one flipped axis per
/// step, offsets read off at the resting position of each skipped axis.
fn project_chain(tuple: &[u16]) -> SmallVec<[CubeFace; 8]> {
    let k = tuple.len() - 1;
    let mut out = SmallVec::new();
    let steps: SmallVec<[u16; 8]> =
        (0..k).map(|s| tuple[s + 1] ^ tuple[s]).collect();
    let mut chosen: SmallVec<[u8; 8]> = SmallVec::new();
    fn rec(
        s: usize,
        min_axis: u8,
        steps: &[u16],
        tuple: &[u16],
        chosen: &mut SmallVec<[u8; 8]>,
        out: &mut SmallVec<[CubeFace; 8]>,
    ) {
        if s == steps.len() {
            let mut axes: u16 = 0;
            for &a in chosen.iter() {
                axes |= 1 << a;
            }
            // Offsets of the unflipped axes at their resting index.
            let mut offs: u16 = 0;
            let width = 16 - tuple.iter().fold(0u16, |acc, &v| acc | v).leading_zeros() as usize;
            for t in 0..width.max(1) as u8 {
                if axes >> t & 1 == 1 {
                    continue;
                }
                let rest = chosen.iter().filter(|&&a| a < t).count();
                offs |= ((tuple[rest] >> t) & 1) << t;
            }
            out.push(CubeFace { axes, offs });
            return;
        }
        let mut rem = steps[s];
        while rem != 0 {
            let a = rem.trailing_zeros() as u8;
            rem &= rem - 1;
            if a >= min_axis {
                chosen.push(a);
                rec(s + 1, a + 1, steps, tuple, chosen, out);
                chosen.pop();
            }
        }
    }
    rec(0, 0, &steps, tuple, &mut chosen, &mut out);
    out
}

fn cube_table(m: usize, i: usize) -> CubeTable {
    if let Some(t) = CUBE_TABLES.lock().unwrap().get(&(m, i)) {
        return t.clone();
    }
    let table = build_cube_table(m, i);
    CUBE_TABLES.lock().unwrap().insert((m, i), table.clone());
    table
}

fn build_cube_table(m: usize, i: usize) -> CubeTable {
    let mut acc: BTreeMap<(CubeFace, CubeFace), i64> = BTreeMap::new();
    if i > m {
        return Arc::new(Vec::new());
    }
    let simp = simp_table(m, i);
    for p in permutations(m) {
        let sgn = perm_sign(&p);
        // Vertex chain of the shuffle simplex for this axis order.
        let mut chain: SmallVec<[u16; 12]> = SmallVec::new();
        let mut v: u16 = 0;
        chain.push(v);
        for &a in &p {
            v |= 1 << a;
            chain.push(v);
        }
        for &(f, b, c) in simp.iter() {
            let ft: SmallVec<[u16; 12]> =
                bits(f).into_iter().map(|t| chain[t as usize]).collect();
            let bt: SmallVec<[u16; 12]> =
                bits(b).into_iter().map(|t| chain[t as usize]).collect();
            for pf in project_chain(&ft) {
                for pb in project_chain(&bt) {
                    let e = acc.entry((pf, pb)).or_insert(0);
                    *e += sgn * c;
                }
            }
        }
    }
    acc.retain(|_, c| *c != 0);
    // Certificate: the projection retracts the shuffle subdivision of every
    // face of the model cube.
    for axes_mask in 0u16..(1 << m) {
        let face_axes = bits(axes_mask);
        let mut co: u16 = !axes_mask & (((1u32 << m) - 1) as u16);
        let mut offsets: Vec<u16> = vec![0];
        while co != 0 {
            let a = co.trailing_zeros() as u8;
            co &= co - 1;
            offsets = offsets
                .iter()
                .flat_map(|&o| [o, o | (1 << a)])
                .collect();
        }
        for off in offsets {
            let mut total: BTreeMap<CubeFace, i64> = BTreeMap::new();
            for p in permutations(face_axes.len()) {
                let sgn = perm_sign(&p);
                let mut chain: SmallVec<[u16; 12]> = SmallVec::new();
                let mut v = off;
                chain.push(v);
                for &idx in &p {
                    v |= 1 << face_axes[idx as usize];
                    chain.push(v);
                }
                for pf in project_chain(&chain) {
                    *total.entry(pf).or_insert(0) += sgn;
                }
            }
            total.retain(|_, c| *c != 0);
            let expect = CubeFace { axes: axes_mask, offs: off };
            assert!(
                total.len() == 1 && total.get(&expect) == Some(&1),
                "projection does not retract the subdivision at m={m}"
            );
        }
    }
    Arc::new(acc.into_iter().map(|((f, b), c)| (f, b, c)).collect())
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Cofaces of the support of `a`, climbed to the target degree.
fn simplicial_ancestors(cx: &CellComplex, a: &Cochain, m: usize) -> BTreeSet<CellId> {
    let mut cur: BTreeSet<CellId> = a.support().collect();
    for k in a.degree..m {
        let mut next = BTreeSet::new();
        for &c in &cur {
            for &(up, _) in cx.coboundary_of(k, c) {
                next.insert(up);
            }
        }
        cur = next;
    }
    cur
}

/// The m-cubes having a given cell of `a`'s support as a face.
fn cubical_ancestors(cx: &CellComplex, a: &Cochain, m: usize) -> BTreeSet<CellId> {
    let d = cx.dim();
    let l = match cx.kind {
        crate::complex::ComplexKind::CubicalTorus { l, .. } => l,
        _ => unreachable!("cubical ancestors on a cubical complex"),
    };
    let mut out = BTreeSet::new();
    for cell in a.support() {
        let (base, axes) = cx.cubical_cell(a.degree, cell);
        let have: u16 = axes.iter().fold(0, |acc, &x| acc | (1 << x));
        let missing: Vec<u8> = (0..d as u8).filter(|a| have >> a & 1 == 0).collect();
        let extra = m - a.degree;
        // Choose the added axes, then every down-shift pattern on them.
        let mut choose: Vec<Vec<u8>> = Vec::new();
        fn rec(start: usize, need: usize, pool: &[u8], cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if cur.len() == need {
                out.push(cur.clone());
                return;
            }
            for idx in start..pool.len() {
                cur.push(pool[idx]);
                rec(idx + 1, need, pool, cur, out);
                cur.pop();
            }
        }
        rec(0, extra, &missing, &mut Vec::new(), &mut choose);
        for added in choose {
            let mut full_axes: Vec<u8> = axes.to_vec();
            full_axes.extend_from_slice(&added);
            full_axes.sort_unstable();
            for shift_bits in 0u32..(1 << added.len()) {
                let mut nb = base.clone();
                for (idx, &ax) in added.iter().enumerate() {
                    if shift_bits >> idx & 1 == 1 {
                        let c = nb[ax as usize] as usize;
                        nb[ax as usize] = ((c + l - 1) % l) as u16;
                    }
                }
                out.insert(cx.cubical_id(&nb, &full_axes));
            }
        }
    }
    out
}

/// Layered stacks carry no cup structure; products are evaluated per layer
/// on the base torus instead.
fn reject_layered(cx: &CellComplex) -> Result<(), CupError> {
    if matches!(cx.kind, ComplexKind::LayeredCubicalTorus { .. }) {
        return Err(CupError::UnsupportedComplex);
    }
    Ok(())
}

/// Higher cup product. Out-of-range i yields the zero cochain of the formal
/// output degree.
pub fn cup_i(cx: &CellComplex, a: &Cochain, b: &Cochain, i: usize) -> Result<Cochain, CupError> {
    reject_layered(cx)?;
    if a.complex_token != cx.token() || b.complex_token != cx.token() {
        return Err(CupError::MixedComplex);
    }
    if a.modulus != b.modulus {
        return Err(CupError::MixedModulus);
    }
    let (p, q) = (a.degree, b.degree);
    let out_degree = (p + q).saturating_sub(i);
    let mut out = Cochain::zero(cx, out_degree, a.modulus);
    if i > p.min(q) || out_degree > cx.dim() || a.is_zero() || b.is_zero() {
        return Ok(out);
    }
    let m = out_degree;
    if cx.is_simplicial() {
        let table = simp_table(m, i);
        let entries: Vec<(Mask, Mask, i64)> = table
            .iter()
            .copied()
            .filter(|&(f, _, _)| popcount(f) == p + 1)
            .collect();
        for cell in simplicial_ancestors(cx, a, m) {
            let vs = cx.simplex_vertices(m, cell);
            let mut total: i64 = 0;
            for &(f, bm, c) in &entries {
                let fv: SmallVec<[u32; 8]> =
                    bits(f).into_iter().map(|t| vs[t as usize]).collect();
                let Some((fk, fid)) = cx.simplex_id(&fv) else { continue };
                debug_assert_eq!(fk, p);
                let av = a.coeff(fid);
                if av == 0 {
                    continue;
                }
                let bv: SmallVec<[u32; 8]> =
                    bits(bm).into_iter().map(|t| vs[t as usize]).collect();
                let Some((bk, bid)) = cx.simplex_id(&bv) else { continue };
                debug_assert_eq!(bk, q);
                total += c * av * b.coeff(bid);
            }
            out.add_to(cell, total);
        }
    } else {
        let table = cube_table(m, i);
        let entries: Vec<(CubeFace, CubeFace, i64)> = table
            .iter()
            .copied()
            .filter(|&(f, _, _)| popcount(f.axes) == p)
            .collect();
        let l = match cx.kind {
            crate::complex::ComplexKind::CubicalTorus { l, .. } => l,
            _ => unreachable!(),
        };
        for cell in cubical_ancestors(cx, a, m) {
            let (base, axes) = cx.cubical_cell(m, cell);
            let locate = |face: CubeFace| -> CellId {
                let sub: SmallVec<[u8; 8]> = bits(face.axes)
                    .into_iter()
                    .map(|t| axes[t as usize])
                    .collect();
                let mut nb = base.clone();
                for t in bits(face.offs) {
                    let ax = axes[t as usize] as usize;
                    nb[ax] = ((nb[ax] as usize + 1) % l) as u16;
                }
                cx.cubical_id(&nb, &sub)
            };
            let mut total: i64 = 0;
            for &(f, bm, c) in &entries {
                let av = a.coeff(locate(f));
                if av == 0 {
                    continue;
                }
                total += c * av * b.coeff(locate(bm));
            }
            out.add_to(cell, total);
        }
    }
    Ok(out)
}

/// Top-degree pairing with the right slot open: the cochain `t` on the
/// complementary degree `dim - p + i` with `t(c) = integral of a cup_i 1_c`.
/// One sweep over the top cells incident to `a` replaces a full scan of
/// `cup_i(a, 1_c, i)` over every cell `c`. Out-of-range `i` yields zero.
pub fn cup_integral_right(cx: &CellComplex, a: &Cochain, i: usize) -> Result<Cochain, CupError> {
    reject_layered(cx)?;
    if a.complex_token != cx.token() {
        return Err(CupError::MixedComplex);
    }
    let d = cx.dim();
    let p = a.degree;
    let q = (d + i).saturating_sub(p);
    let mut out = Cochain::zero(cx, q, a.modulus);
    if i > p || q > d || a.is_zero() {
        return Ok(out);
    }
    if cx.is_simplicial() {
        let table = simp_table(d, i);
        let entries: Vec<(Mask, Mask, i64)> =
            table.iter().copied().filter(|&(f, _, _)| popcount(f) == p + 1).collect();
        for cell in simplicial_ancestors(cx, a, d) {
            let w = cx.orientation_sign(cell);
            let vs = cx.simplex_vertices(d, cell);
            for &(f, bm, c) in &entries {
                let fv: SmallVec<[u32; 8]> =
                    bits(f).into_iter().map(|t| vs[t as usize]).collect();
                let Some((_, fid)) = cx.simplex_id(&fv) else { continue };
                let av = a.coeff(fid);
                if av == 0 {
                    continue;
                }
                let bv: SmallVec<[u32; 8]> =
                    bits(bm).into_iter().map(|t| vs[t as usize]).collect();
                let Some((_, bid)) = cx.simplex_id(&bv) else { continue };
                out.add_to(bid, c * av * w);
            }
        }
    } else {
        let table = cube_table(d, i);
        let entries: Vec<(CubeFace, CubeFace, i64)> =
            table.iter().copied().filter(|&(f, _, _)| popcount(f.axes) == p).collect();
        let l = match cx.kind {
            ComplexKind::CubicalTorus { l, .. } => l,
            _ => unreachable!(),
        };
        for cell in cubical_ancestors(cx, a, d) {
            let w = cx.orientation_sign(cell);
            let (base, axes) = cx.cubical_cell(d, cell);
            let locate = |face: CubeFace| -> CellId {
                let sub: SmallVec<[u8; 8]> = bits(face.axes)
                    .into_iter()
                    .map(|t| axes[t as usize])
                    .collect();
                let mut nb = base.clone();
                for t in bits(face.offs) {
                    let ax = axes[t as usize] as usize;
                    nb[ax] = ((nb[ax] as usize + 1) % l) as u16;
                }
                cx.cubical_id(&nb, &sub)
            };
            for &(f, bm, c) in &entries {
                let av = a.coeff(locate(f));
                if av != 0 {
                    out.add_to(locate(bm), c * av * w);
                }
            }
        }
    }
    Ok(out)
}

/// Mirror of [`cup_integral_right`] with the left slot open:
/// `t(c) = integral of 1_c cup_i b` on degree `dim - q + i`.
pub fn cup_integral_left(cx: &CellComplex, b: &Cochain, i: usize) -> Result<Cochain, CupError> {
    reject_layered(cx)?;
    if b.complex_token != cx.token() {
        return Err(CupError::MixedComplex);
    }
    let d = cx.dim();
    let q = b.degree;
    let p = (d + i).saturating_sub(q);
    let mut out = Cochain::zero(cx, p, b.modulus);
    if i > q || p > d || b.is_zero() {
        return Ok(out);
    }
    if cx.is_simplicial() {
        let table = simp_table(d, i);
        let entries: Vec<(Mask, Mask, i64)> =
            table.iter().copied().filter(|&(f, _, _)| popcount(f) == p + 1).collect();
        for cell in simplicial_ancestors(cx, b, d) {
            let w = cx.orientation_sign(cell);
            let vs = cx.simplex_vertices(d, cell);
            for &(f, bm, c) in &entries {
                let bv: SmallVec<[u32; 8]> =
                    bits(bm).into_iter().map(|t| vs[t as usize]).collect();
                let Some((_, bid)) = cx.simplex_id(&bv) else { continue };
                let bc = b.coeff(bid);
                if bc == 0 {
                    continue;
                }
                let fv: SmallVec<[u32; 8]> =
                    bits(f).into_iter().map(|t| vs[t as usize]).collect();
                let Some((_, fid)) = cx.simplex_id(&fv) else { continue };
                out.add_to(fid, c * bc * w);
            }
        }
    } else {
        let table = cube_table(d, i);
        let entries: Vec<(CubeFace, CubeFace, i64)> =
            table.iter().copied().filter(|&(f, _, _)| popcount(f.axes) == p).collect();
        let l = match cx.kind {
            ComplexKind::CubicalTorus { l, .. } => l,
            _ => unreachable!(),
        };
        for cell in cubical_ancestors(cx, b, d) {
            let w = cx.orientation_sign(cell);
            let (base, axes) = cx.cubical_cell(d, cell);
            let locate = |face: CubeFace| -> CellId {
                let sub: SmallVec<[u8; 8]> = bits(face.axes)
                    .into_iter()
                    .map(|t| axes[t as usize])
                    .collect();
                let mut nb = base.clone();
                for t in bits(face.offs) {
                    let ax = axes[t as usize] as usize;
                    nb[ax] = ((nb[ax] as usize + 1) % l) as u16;
                }
                cx.cubical_id(&nb, &sub)
            };
            for &(f, bm, c) in &entries {
                let bc = b.coeff(locate(bm));
                if bc != 0 {
                    out.add_to(locate(f), c * bc * w);
                }
            }
        }
    }
    Ok(out)
}

/// Steenrod square on a mod-2 cocycle: B cup_{n-k} B.
pub fn steenrod_square(cx: &CellComplex, k: usize, b: &Cochain) -> Result<Cochain, CupError> {
    assert_eq!(b.modulus, 2, "Steenrod square needs mod-2 coefficients");
    assert!(k <= b.degree, "square index exceeds degree");
    if !apply_differential(cx, b).is_zero() {
        return Err(CupError::NotCocycle);
    }
    let sq = cup_i(cx, b, b, b.degree - k)?;
    debug_assert!(apply_differential(cx, &sq).is_zero());
    Ok(sq)
}

fn integer_lift(cx: &CellComplex, b: &Cochain) -> Cochain {
    Cochain::from_entries(cx, b.degree, 0, b.iter())
}

/// Bockstein of a mod-2 cocycle: lift, take the coboundary, halve.
pub fn bockstein(cx: &CellComplex, b: &Cochain) -> Result<Cochain, CupError> {
    assert_eq!(b.modulus, 2, "Bockstein needs mod-2 coefficients");
    if !apply_differential(cx, b).is_zero() {
        return Err(CupError::NotCocycle);
    }
    let lifted = integer_lift(cx, b);
    let d = apply_differential(cx, &lifted);
    let mut out = Cochain::zero(cx, b.degree + 1, 2);
    for (cell, v) in d.iter() {
        debug_assert_eq!(v % 2, 0);
        out.add_to(cell, v / 2);
    }
    Ok(out)
}

/// Mod-4 cochain representing half of Sq^2 Sq^1 through the lift B-hat:
/// (-1)^{n+1} (B-hat cup_{n-3} B-hat + B-hat cup_{n-2} d B-hat).
pub fn sq2sq1_quartic_representative(
    cx: &CellComplex,
    b: &Cochain,
) -> Result<Cochain, CupError> {
    assert_eq!(b.modulus, 2, "representative needs a mod-2 input");
    if !apply_differential(cx, b).is_zero() {
        return Err(CupError::NotCocycle);
    }
    let n = b.degree;
    let lifted = integer_lift(cx, b);
    let d_lift = apply_differential(cx, &lifted);
    let mut total = Cochain::zero(cx, n + 3, 0);
    if n >= 3 {
        total = total.plus(&cup_i(cx, &lifted, &lifted, n - 3)?);
    }
    if n >= 2 {
        total = total.plus(&cup_i(cx, &lifted, &d_lift, n - 2)?);
    }
    let sign = if (n + 1) % 2 == 0 { 1 } else { -1 };
    Ok(total.scaled(sign).with_modulus(4))
}
