//! Finite cell complexes: cubical tori, boundaries of simplices,
//! Kuhn-triangulated tori, and layered stacks of tori, with exact
//! boundary/coboundary incidence and sparse (co)chains over `Z` or `Z/M`.
//!
//! Cells are addressed as `(degree, index)`; within a degree, indices follow
//! the lexicographic order of the canonical cell descriptor (base point and
//! axis set for cubes, sorted vertex tuple for simplices), so ids are stable
//! across runs and processes.

use smallvec::SmallVec;
use std::collections::BTreeMap;
use thiserror::Error;

pub type CellId = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("complex would have {cells} cells of the densest degree, over the cap {cap}")]
    SizeLimitExceeded { cells: u64, cap: u64 },
    #[error("lattice of extent {l} along an axis is degenerate; need at least 3")]
    DegenerateLattice { l: usize },
    #[error("dimension {d} is outside the supported range {min}..={max}")]
    UnsupportedDimension { d: usize, min: usize, max: usize },
    #[error("operation needs degree {expected}, got {got}")]
    WrongDegree { expected: usize, got: usize },
    #[error("operation is only defined on cubical torus complexes")]
    UnsupportedComplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComplexKind {
    CubicalTorus { d: usize, l: usize },
    SimplexBoundary { n: usize },
    KuhnTorus { d: usize, l: usize },
    /// `s` disjoint copies of a cubical torus, one per qudit layer.
    LayeredCubicalTorus { d: usize, l: usize, s: usize },
}

/// Sorted axis set of a cube, axes numbered from 0.
pub type AxisSet = SmallVec<[u8; 8]>;
/// Base point of a cube, one coordinate per axis.
pub type BasePoint = SmallVec<[u16; 8]>;

#[derive(Debug)]
enum Geometry {
    /// Pure arithmetic indexing; no per-cell storage needed.
    Cubical { d: usize, l: usize, axis_sets: Vec<Vec<AxisSet>> },
    /// Per degree, lexicographically sorted vertex tuples.
    Simplicial { verts: Vec<Vec<SmallVec<[u32; 8]>>> },
    /// Disjoint copies of a base complex; copy `j` occupies the id block
    /// `j*base_count..(j+1)*base_count` in every degree.
    Layered { base: Box<CellComplex> },
}

#[derive(Debug)]
pub struct CellComplex {
    pub kind: ComplexKind,
    dim: usize,
    geometry: Geometry,
    counts: Vec<usize>,
    /// CSR incidence per degree k (1..=dim): faces of each k-cell.
    boundary: Vec<Csr>,
    /// CSR incidence per degree k (0..dim): cofaces of each k-cell.
    coboundary: Vec<Csr>,
    /// Fundamental cycle coefficients of the top cells; None means all +1.
    orientation: Option<Vec<i8>>,
}

#[derive(Debug, Default)]
struct Csr {
    offsets: Vec<u32>,
    entries: Vec<(CellId, i8)>,
}

impl Csr {
    fn of(&self, id: CellId) -> &[(CellId, i8)] {
        let a = self.offsets[id as usize] as usize;
        let b = self.offsets[id as usize + 1] as usize;
        &self.entries[a..b]
    }

    fn from_rows(rows: Vec<Vec<(CellId, i8)>>) -> Csr {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for r in rows {
            entries.extend(r);
            offsets.push(entries.len() as u32);
        }
        Csr { offsets, entries }
    }
}

const CELL_CAP: u64 = 1 << 24;

fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n - i) as u64 / (i + 1) as u64;
    }
    r
}

/// All k-subsets of 0..d in lexicographic order.
fn axis_subsets(d: usize, k: usize) -> Vec<AxisSet> {
    let mut out = Vec::new();
    let mut cur: AxisSet = SmallVec::new();
    fn rec(d: usize, k: usize, start: usize, cur: &mut AxisSet, out: &mut Vec<AxisSet>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for a in start..d {
            cur.push(a as u8);
            rec(d, k, a + 1, cur, out);
            cur.pop();
        }
    }
    rec(d, k, 0, &mut cur, &mut out);
    out
}

pub fn build_cubical_torus(d: usize, l: usize) -> Result<CellComplex, ComplexError> {
    if !(1..=8).contains(&d) {
        return Err(ComplexError::UnsupportedDimension { d, min: 1, max: 8 });
    }
    if l < 3 {
        return Err(ComplexError::DegenerateLattice { l });
    }
    let volume = (l as u64).checked_pow(d as u32).ok_or(ComplexError::SizeLimitExceeded {
        cells: u64::MAX,
        cap: CELL_CAP,
    })?;
    let densest = binom(d, d / 2) * volume;
    if densest > CELL_CAP {
        return Err(ComplexError::SizeLimitExceeded { cells: densest, cap: CELL_CAP });
    }

    let axis_sets: Vec<Vec<AxisSet>> = (0..=d).map(|k| axis_subsets(d, k)).collect();
    let counts: Vec<usize> = (0..=d).map(|k| (binom(d, k) * volume) as usize).collect();

    let mut cx = CellComplex {
        kind: ComplexKind::CubicalTorus { d, l },
        dim: d,
        geometry: Geometry::Cubical { d, l, axis_sets },
        counts,
        boundary: Vec::new(),
        coboundary: Vec::new(),
        orientation: None,
    };
    build_incidence(&mut cx);
    Ok(cx)
}

/// Stack of `s` disjoint copies of the d-torus, used as the qudit index
/// space of multi-layer models. Cup products are not defined here; they are
/// evaluated per layer on the base torus instead.
pub fn build_layered_cubical_torus(d: usize, l: usize, s: usize) -> Result<CellComplex, ComplexError> {
    assert!(s >= 1, "a layered complex needs at least one layer");
    let base = build_cubical_torus(d, l)?;
    let densest = base.counts.iter().map(|&c| c as u64).max().unwrap() * s as u64;
    if densest > CELL_CAP {
        return Err(ComplexError::SizeLimitExceeded { cells: densest, cap: CELL_CAP });
    }
    let counts: Vec<usize> = base.counts.iter().map(|&c| c * s).collect();
    let mut cx = CellComplex {
        kind: ComplexKind::LayeredCubicalTorus { d, l, s },
        dim: d,
        geometry: Geometry::Layered { base: Box::new(base) },
        counts,
        boundary: Vec::new(),
        coboundary: Vec::new(),
        orientation: None,
    };
    build_incidence(&mut cx);
    Ok(cx)
}

pub fn build_simplex_boundary(n: usize) -> Result<CellComplex, ComplexError> {
    if !(2..=10).contains(&n) {
        return Err(ComplexError::UnsupportedDimension { d: n, min: 2, max: 10 });
    }
    // Cells of degree k: all (k+1)-subsets of {0..n}, for k <= n-1.
    let mut verts: Vec<Vec<SmallVec<[u32; 8]>>> = Vec::new();
    for k in 0..=(n - 1) {
        let mut cells: Vec<SmallVec<[u32; 8]>> = Vec::new();
        let subsets = axis_subsets(n + 1, k + 1);
        for s in subsets {
            cells.push(s.iter().map(|&v| v as u32).collect());
        }
        cells.sort();
        verts.push(cells);
    }
    let counts = verts.iter().map(|v| v.len()).collect();
    // Facet dropping vertex i carries sign (-1)^i in the fundamental cycle.
    let top: &Vec<SmallVec<[u32; 8]>> = &verts[n - 1];
    let mut orientation: Vec<i8> = Vec::with_capacity(top.len());
    for facet in top {
        let missing =
            (0..=n as u32).find(|v| !facet.contains(v)).expect("facet misses one vertex");
        orientation.push(if missing % 2 == 0 { 1 } else { -1 });
    }
    let mut cx = CellComplex {
        kind: ComplexKind::SimplexBoundary { n },
        dim: n - 1,
        geometry: Geometry::Simplicial { verts },
        counts,
        boundary: Vec::new(),
        coboundary: Vec::new(),
        orientation: Some(orientation),
    };
    build_incidence(&mut cx);
    cx.finish_orientation();
    Ok(cx)
}

pub fn build_kuhn_torus(d: usize, l: usize) -> Result<CellComplex, ComplexError> {
    if !(1..=5).contains(&d) {
        return Err(ComplexError::UnsupportedDimension { d, min: 1, max: 5 });
    }
    if l < 3 {
        return Err(ComplexError::DegenerateLattice { l });
    }
    let volume = (l as u64).pow(d as u32);
    let mut fact = 1u64;
    for i in 1..=d as u64 {
        fact *= i;
    }
    if fact * volume > CELL_CAP {
        return Err(ComplexError::SizeLimitExceeded { cells: fact * volume, cap: CELL_CAP });
    }

    // Vertex id: lexicographic rank of the coordinate tuple.
    let vid = |coords: &[usize]| -> u32 {
        let mut r = 0usize;
        for &c in coords {
            r = r * l + (c % l);
        }
        r as u32
    };

    // Chain shapes per degree: ordered tuples of disjoint nonempty axis
    // blocks. A k-cell climbs from its base through k block steps.
    let mut shapes: Vec<Vec<Vec<AxisSet>>> = vec![Vec::new(); d + 1];
    fn shape_rec(d: usize, remaining: &[u8], cur: &mut Vec<AxisSet>, out: &mut [Vec<Vec<AxisSet>>]) {
        out[cur.len()].push(cur.clone());
        if remaining.is_empty() {
            return;
        }
        // Choose any nonempty subset of the remaining axes as the next block.
        let m = remaining.len();
        for mask in 1u32..(1 << m) {
            let block: AxisSet = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| remaining[i]).collect();
            let rest: Vec<u8> = (0..m).filter(|&i| mask >> i & 1 == 0).map(|i| remaining[i]).collect();
            cur.push(block);
            shape_rec(d, &rest, cur, out);
            cur.pop();
        }
    }
    let all: Vec<u8> = (0..d as u8).collect();
    shape_rec(d, &all, &mut Vec::new(), &mut shapes);

    let mut verts: Vec<Vec<SmallVec<[u32; 8]>>> = Vec::new();
    for k in 0..=d {
        let mut cells: Vec<SmallVec<[u32; 8]>> = Vec::new();
        let mut base = vec![0usize; d];
        loop {
            for shape in &shapes[k] {
                let mut v: SmallVec<[u32; 8]> = SmallVec::new();
                let mut p = base.clone();
                v.push(vid(&p));
                for block in shape {
                    for &a in block {
                        p[a as usize] = (p[a as usize] + 1) % l;
                    }
                    v.push(vid(&p));
                }
                v.sort_unstable();
                cells.push(v);
            }
            // next base
            let mut i = d;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                base[i] += 1;
                if base[i] < l {
                    break;
                }
                base[i] = 0;
            }
            if base.iter().all(|&c| c == 0) {
                break;
            }
        }
        cells.sort();
        cells.dedup();
        verts.push(cells);
    }
    // Fundamental cycle: the subdivision image of the all-ones cube cycle.
    // Each top simplex comes from one (base, permutation) pair; its sign is
    // the permutation parity times the parity of sorting the vertex chain.
    let mut orientation: Vec<i8> = vec![0; verts[d].len()];
    let mut perm: Vec<u8> = (0..d as u8).collect();
    let mut perms: Vec<Vec<u8>> = Vec::new();
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
    heaps(d, &mut perm, &mut perms);
    let perm_sign = |p: &[u8]| -> i8 {
        let mut inv = 0usize;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i] > p[j] {
                    inv += 1;
                }
            }
        }
        if inv % 2 == 0 { 1 } else { -1 }
    };
    let mut base = vec![0usize; d];
    loop {
        for p in &perms {
            let mut pt = base.clone();
            let mut chain: Vec<u32> = vec![vid(&pt)];
            for &a in p {
                pt[a as usize] = (pt[a as usize] + 1) % l;
                chain.push(vid(&pt));
            }
            let mut inv = 0usize;
            for i in 0..chain.len() {
                for j in i + 1..chain.len() {
                    if chain[i] > chain[j] {
                        inv += 1;
                    }
                }
            }
            let tau: i8 = if inv % 2 == 0 { 1 } else { -1 };
            let mut key: SmallVec<[u32; 8]> = chain.iter().copied().collect();
            key.sort_unstable();
            let id = verts[d].binary_search(&key).expect("top simplex present");
            orientation[id] = perm_sign(p) * tau;
        }
        let mut i = d;
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            base[i] += 1;
            if base[i] < l {
                break;
            }
            base[i] = 0;
        }
        if base.iter().all(|&c| c == 0) {
            break;
        }
    }

    let counts = verts.iter().map(|v| v.len()).collect();
    let mut cx = CellComplex {
        kind: ComplexKind::KuhnTorus { d, l },
        dim: d,
        geometry: Geometry::Simplicial { verts },
        counts,
        boundary: Vec::new(),
        coboundary: Vec::new(),
        orientation: Some(orientation),
    };
    build_incidence(&mut cx);
    cx.finish_orientation();
    Ok(cx)
}

fn build_incidence(cx: &mut CellComplex) {
    let dim = cx.dim;
    let mut boundary: Vec<Csr> = Vec::with_capacity(dim + 1);
    boundary.push(Csr::default()); // degree 0 has no boundary
    for k in 1..=dim {
        let rows: Vec<Vec<(CellId, i8)>> =
            (0..cx.counts[k]).map(|id| cx.compute_boundary(k, id as CellId)).collect();
        boundary.push(Csr::from_rows(rows));
    }
    // Adjoint incidence.
    let mut coboundary: Vec<Csr> = Vec::with_capacity(dim + 1);
    for k in 0..dim {
        let mut rows: Vec<Vec<(CellId, i8)>> = vec![Vec::new(); cx.counts[k]];
        let csr = &boundary[k + 1];
        for up in 0..cx.counts[k + 1] {
            for &(f, s) in csr.of(up as CellId) {
                rows[f as usize].push((up as CellId, s));
            }
        }
        for r in rows.iter_mut() {
            r.sort_unstable_by_key(|&(c, _)| c);
        }
        coboundary.push(Csr::from_rows(rows));
    }
    coboundary.push(Csr::default()); // top degree has no coboundary
    cx.boundary = boundary;
    cx.coboundary = coboundary;
}

impl CellComplex {
    /// Checks that the stored top-cell coefficients form a cycle and
    /// normalizes the global sign so cell 0 gets +1.
    fn finish_orientation(&mut self) {
        let Some(w) = self.orientation.take() else { return };
        let d = self.dim;
        let mut sums: Vec<i64> = vec![0; self.counts[d - 1]];
        for (id, &coeff) in w.iter().enumerate() {
            assert!(coeff == 1 || coeff == -1, "unset orientation at {id}");
            for &(f, s) in self.boundary[d].of(id as CellId) {
                sums[f as usize] += coeff as i64 * s as i64;
            }
        }
        assert!(sums.iter().all(|&s| s == 0), "top orientation is not a cycle");
        let flip = w[0];
        self.orientation = Some(w.into_iter().map(|c| c * flip).collect());
    }

    /// Coefficient of a top cell in the fundamental cycle.
    pub fn orientation_sign(&self, id: CellId) -> i64 {
        match &self.orientation {
            None => 1,
            Some(w) => w[id as usize] as i64,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_cells(&self, k: usize) -> usize {
        if k > self.dim {
            0
        } else {
            self.counts[k]
        }
    }

    /// Structural token: complexes built from the same parameters share it.
    pub fn token(&self) -> u64 {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let mut h = DefaultHasher::new();
        self.kind.hash(&mut h);
        h.finish()
    }

    pub fn is_cubical(&self) -> bool {
        matches!(self.kind, ComplexKind::CubicalTorus { .. })
    }

    pub fn is_simplicial(&self) -> bool {
        matches!(self.kind, ComplexKind::SimplexBoundary { .. } | ComplexKind::KuhnTorus { .. })
    }

    /// Number of disjoint layers; 1 unless the complex is a layered stack.
    pub fn layer_count(&self) -> usize {
        match self.kind {
            ComplexKind::LayeredCubicalTorus { s, .. } => s,
            _ => 1,
        }
    }

    /// Faces with incidence signs; the alternating-sum boundary of the cell.
    pub fn boundary_of(&self, k: usize, id: CellId) -> &[(CellId, i8)] {
        self.boundary[k].of(id)
    }

    /// Cofaces with the signs they carry the cell with.
    pub fn coboundary_of(&self, k: usize, id: CellId) -> &[(CellId, i8)] {
        self.coboundary[k].of(id)
    }

    fn compute_boundary(&self, k: usize, id: CellId) -> Vec<(CellId, i8)> {
        match &self.geometry {
            Geometry::Cubical { l, .. } => {
                let (base, axes) = self.cubical_cell(k, id);
                let mut out = Vec::with_capacity(2 * k);
                for (t, &a) in axes.iter().enumerate() {
                    let sub: AxisSet = axes.iter().copied().filter(|&x| x != a).collect();
                    let sign = if t % 2 == 0 { 1i8 } else { -1 };
                    let mut upper = base.clone();
                    upper[a as usize] = ((upper[a as usize] as usize + 1) % l) as u16;
                    out.push((self.cubical_id(&upper, &sub), sign));
                    out.push((self.cubical_id(&base, &sub), -sign));
                }
                out.sort_unstable_by_key(|&(c, _)| c);
                out
            }
            Geometry::Simplicial { verts } => {
                let vs = &verts[k][id as usize];
                let mut out = Vec::with_capacity(k + 1);
                for t in 0..vs.len() {
                    let face: SmallVec<[u32; 8]> =
                        vs.iter().enumerate().filter(|&(i, _)| i != t).map(|(_, &v)| v).collect();
                    let fid = verts[k - 1].binary_search(&face).expect("face of a cell is a cell");
                    let sign = if t % 2 == 0 { 1i8 } else { -1 };
                    out.push((fid as CellId, sign));
                }
                out.sort_unstable_by_key(|&(c, _)| c);
                out
            }
            Geometry::Layered { base, .. } => {
                let per = base.counts[k];
                let layer = id as usize / per;
                let off = (layer * base.counts[k - 1]) as CellId;
                base.boundary_of(k, (id as usize % per) as CellId)
                    .iter()
                    .map(|&(f, sgn)| (f + off, sgn))
                    .collect()
            }
        }
    }

    /// Base point and axis set of a cubical cell.
    pub fn cubical_cell(&self, k: usize, id: CellId) -> (BasePoint, AxisSet) {
        let Geometry::Cubical { d, l, axis_sets } = &self.geometry else {
            panic!("cubical_cell needs a plain cubical torus");
        };
        let n_axes = axis_sets[k].len();
        let base_rank = id as usize / n_axes;
        let axes = axis_sets[k][id as usize % n_axes].clone();
        let mut base: BasePoint = SmallVec::from_elem(0, *d);
        let mut r = base_rank;
        for i in (0..*d).rev() {
            base[i] = (r % l) as u16;
            r /= l;
        }
        (base, axes)
    }

    /// Canonical id of the cubical cell with this base point and axis set.
    pub fn cubical_id(&self, base: &[u16], axes: &[u8]) -> CellId {
        let Geometry::Cubical { d, l, axis_sets } = &self.geometry else {
            panic!("cubical_id needs a plain cubical torus");
        };
        debug_assert_eq!(base.len(), *d);
        let k = axes.len();
        let mut base_rank = 0usize;
        for &c in base {
            debug_assert!((c as usize) < *l);
            base_rank = base_rank * l + c as usize;
        }
        let axes_rank = axis_sets[k]
            .binary_search_by(|s| s.as_slice().cmp(axes))
            .expect("axis set out of range");
        (base_rank * axis_sets[k].len() + axes_rank) as CellId
    }

    /// Sorted global vertex tuple of a simplicial cell.
    pub fn simplex_vertices(&self, k: usize, id: CellId) -> &[u32] {
        let Geometry::Simplicial { verts } = &self.geometry else {
            panic!("simplex_vertices on a cubical complex");
        };
        &verts[k][id as usize]
    }

    /// Canonical id of the simplex with this sorted vertex tuple, if present.
    pub fn simplex_id(&self, vs: &[u32]) -> Option<(usize, CellId)> {
        let Geometry::Simplicial { verts } = &self.geometry else {
            return None;
        };
        let k = vs.len().checked_sub(1)?;
        if k > self.dim {
            return None;
        }
        let key: SmallVec<[u32; 8]> = vs.iter().copied().collect();
        verts[k].binary_search(&key).ok().map(|i| (k, i as CellId))
    }

    /// Human-readable cell descriptor, stable across runs.
    pub fn cell_label(&self, k: usize, id: CellId) -> String {
        match &self.geometry {
            Geometry::Cubical { .. } => {
                let (base, axes) = self.cubical_cell(k, id);
                let b: Vec<String> = base.iter().map(|c| c.to_string()).collect();
                let a: Vec<String> = axes.iter().map(|c| (c + 1).to_string()).collect();
                format!("<{};e{}>", b.join(","), a.join(""))
            }
            Geometry::Simplicial { .. } => {
                let vs: Vec<String> =
                    self.simplex_vertices(k, id).iter().map(|v| v.to_string()).collect();
                format!("({})", vs.join(","))
            }
            Geometry::Layered { base, .. } => {
                let per = base.counts[k];
                format!("L{}:{}", id as usize / per, base.cell_label(k, (id as usize % per) as CellId))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Sparse chains and cochains
// ---------------------------------------------------------------------------

/// Sparse cochain: cell -> coefficient, reduced into [0, M) when M > 0.
/// Modulus 0 means integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain {
    pub degree: usize,
    pub modulus: i64,
    pub complex_token: u64,
    entries: BTreeMap<CellId, i64>,
}

/// Sparse chain with the same storage; transforms covariantly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub degree: usize,
    pub modulus: i64,
    pub complex_token: u64,
    entries: BTreeMap<CellId, i64>,
}

fn reduce(m: i64, v: i64) -> i64 {
    if m == 0 {
        v
    } else {
        v.rem_euclid(m)
    }
}

macro_rules! chain_like {
    ($t:ident) => {
        impl $t {
            pub fn zero(cx: &CellComplex, degree: usize, modulus: i64) -> Self {
                $t { degree, modulus, complex_token: cx.token(), entries: BTreeMap::new() }
            }

            pub fn from_entries(
                cx: &CellComplex,
                degree: usize,
                modulus: i64,
                it: impl IntoIterator<Item = (CellId, i64)>,
            ) -> Self {
                let mut c = Self::zero(cx, degree, modulus);
                for (cell, v) in it {
                    c.add_to(cell, v);
                }
                c
            }

            /// Indicator of a single cell.
            pub fn unit(cx: &CellComplex, degree: usize, modulus: i64, cell: CellId) -> Self {
                Self::from_entries(cx, degree, modulus, [(cell, 1)])
            }

            pub fn coeff(&self, cell: CellId) -> i64 {
                self.entries.get(&cell).copied().unwrap_or(0)
            }

            pub fn add_to(&mut self, cell: CellId, v: i64) {
                let nv = reduce(self.modulus, self.coeff(cell) + v);
                if nv == 0 {
                    self.entries.remove(&cell);
                } else {
                    self.entries.insert(cell, nv);
                }
            }

            pub fn iter(&self) -> impl Iterator<Item = (CellId, i64)> + '_ {
                self.entries.iter().map(|(&c, &v)| (c, v))
            }

            pub fn support(&self) -> impl Iterator<Item = CellId> + '_ {
                self.entries.keys().copied()
            }

            pub fn support_len(&self) -> usize {
                self.entries.len()
            }

            pub fn is_zero(&self) -> bool {
                self.entries.is_empty()
            }

            pub fn scaled(&self, c: i64) -> Self {
                let mut out = $t {
                    degree: self.degree,
                    modulus: self.modulus,
                    complex_token: self.complex_token,
                    entries: BTreeMap::new(),
                };
                for (cell, v) in self.iter() {
                    out.add_to(cell, c * v);
                }
                out
            }

            pub fn plus(&self, other: &Self) -> Self {
                assert_eq!(self.degree, other.degree, "degree mismatch");
                assert_eq!(self.modulus, other.modulus, "modulus mismatch");
                assert_eq!(self.complex_token, other.complex_token, "complex mismatch");
                let mut out = self.clone();
                for (cell, v) in other.iter() {
                    out.add_to(cell, v);
                }
                out
            }

            /// Same entries, coefficients re-reduced in a new modulus.
            pub fn with_modulus(&self, m: i64) -> Self {
                let mut out = $t {
                    degree: self.degree,
                    modulus: m,
                    complex_token: self.complex_token,
                    entries: BTreeMap::new(),
                };
                for (cell, v) in self.iter() {
                    out.add_to(cell, v);
                }
                out
            }
        }
    };
}

chain_like!(Cochain);
chain_like!(Chain);

/// Coboundary: (da)(c) = a(boundary c).
pub fn apply_differential(cx: &CellComplex, a: &Cochain) -> Cochain {
    assert_eq!(a.complex_token, cx.token(), "cochain belongs to a different complex");
    let mut out = Cochain::zero(cx, a.degree + 1, a.modulus);
    if a.degree + 1 > cx.dim() {
        return out;
    }
    for (cell, v) in a.iter() {
        for &(up, s) in cx.coboundary_of(a.degree, cell) {
            out.add_to(up, s as i64 * v);
        }
    }
    out
}

/// Boundary of a chain.
pub fn apply_boundary(cx: &CellComplex, c: &Chain) -> Chain {
    assert_eq!(c.complex_token, cx.token(), "chain belongs to a different complex");
    if c.degree == 0 {
        return Chain::zero(cx, 0, c.modulus);
    }
    let mut out = Chain::zero(cx, c.degree - 1, c.modulus);
    for (cell, v) in c.iter() {
        for &(f, s) in cx.boundary_of(c.degree, cell) {
            out.add_to(f, s as i64 * v);
        }
    }
    out
}

/// Evaluation of a top-degree cochain against the fundamental cycle. In the
/// canonical orientation every top cell contributes its coefficient with
/// weight +1; the result is reduced into the cochain's modulus when nonzero.
pub fn integrate(cx: &CellComplex, a: &Cochain) -> Result<i64, ComplexError> {
    if a.degree != cx.dim() {
        return Err(ComplexError::WrongDegree { expected: cx.dim(), got: a.degree });
    }
    let total = a.iter().map(|(c, v)| cx.orientation_sign(c) * v).sum();
    Ok(reduce(a.modulus, total))
}

/// Signed complementary-cell pairing on a cubical torus: maps the indicator
/// cochain of a k-cell to a (d-k)-cochain supported on the complementary-axes
/// cube at a shifted base point, with signs chosen so that
/// `dual(boundary c) = differential(dual c)` holds exactly.
pub fn dual_correspondence(
    cx: &CellComplex,
    k: usize,
    id: CellId,
) -> Result<(CellId, i64), ComplexError> {
    let Geometry::Cubical { d, l, .. } = &cx.geometry else {
        return Err(ComplexError::UnsupportedComplex);
    };
    let (base, axes) = cx.cubical_cell(k, id);
    let co_axes: AxisSet = (0..*d as u8).filter(|a| !axes.contains(a)).collect();
    let mut shifted: BasePoint = base.clone();
    for &a in &co_axes {
        let c = shifted[a as usize] as usize;
        shifted[a as usize] = ((c + l - 1) % l) as u16;
    }
    // Sign of the factorwise dual: one flip per edge axis, plus the regrading
    // exponent that matches the tensor coboundary convention.
    let exp: usize = axes.len() + axes.iter().map(|&a| a as usize).sum::<usize>();
    let sign = if exp % 2 == 0 { 1 } else { -1 };
    Ok((cx.cubical_id(&shifted, &co_axes), sign))
}

/// Apply the dual correspondence to a whole chain, yielding a cochain.
pub fn dual_cochain(cx: &CellComplex, c: &Chain) -> Result<Cochain, ComplexError> {
    let mut out = Cochain::zero(cx, cx.dim() - c.degree, c.modulus);
    for (cell, v) in c.iter() {
        let (dc, s) = dual_correspondence(cx, c.degree, cell)?;
        out.add_to(dc, s * v);
    }
    Ok(out)
}
