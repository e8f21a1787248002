//! Cell complex construction, incidence algebra, and duality.
//!
//! Oracles are written first and kept independent of the implementation:
//! closed-form cell counts, an ordered-partition counter for the Kuhn
//! triangulation, and Betti numbers via Smith normal form of raw incidence
//! matrices.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stabstat::complex::*;
use stabstat::linalg::{smith_normal_form, IntMat};

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

fn oracle_binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let mut r = 1u64;
    for i in 0..k.min(n - k) {
        r = r * (n - i) as u64 / (i + 1) as u64;
    }
    r
}

/// Number of k-step increasing chains from a fixed base of a d-cube whose
/// steps are disjoint nonempty axis blocks: sum over the number of axes used.
fn oracle_kuhn_cells_per_base(d: usize, k: usize) -> u64 {
    // surj(j, k): surjections from a j-set onto an ordered k-tuple of blocks.
    fn surj(j: usize, k: usize) -> u64 {
        if k == 0 {
            return (j == 0) as u64;
        }
        if j < k {
            return 0;
        }
        // k! * Stirling2(j, k) by inclusion-exclusion.
        let mut total: i128 = 0;
        for t in 0..=k {
            let sign = if t % 2 == 0 { 1i128 } else { -1 };
            total += sign * oracle_binom(k, t) as i128 * ((k - t) as i128).pow(j as u32);
        }
        total as u64
    }
    (0..=d).map(|j| oracle_binom(d, j) * surj(j, k)).sum()
}

/// Betti number b_k over Q from ranks of the boundary matrices.
fn oracle_betti(cx: &CellComplex, k: usize) -> usize {
    let rank = |deg: usize| -> usize {
        if deg == 0 || deg > cx.dim() {
            return 0;
        }
        let rows = cx.n_cells(deg - 1);
        let cols = cx.n_cells(deg);
        let mut m = IntMat::zero(rows, cols);
        for c in 0..cols {
            for &(f, s) in cx.boundary_of(deg, c as CellId) {
                m[(f as usize, c)] += BigInt::from(s);
            }
        }
        smith_normal_form(&m).factors.iter().filter(|f| **f != BigInt::from(0)).count()
    };
    cx.n_cells(k) - rank(k) - rank(k + 1)
}

/// Torsion coefficients of H_k: nontrivial invariant factors of boundary k+1.
fn oracle_torsion_free(cx: &CellComplex, k: usize) -> bool {
    if k + 1 > cx.dim() {
        return true;
    }
    let rows = cx.n_cells(k);
    let cols = cx.n_cells(k + 1);
    let mut m = IntMat::zero(rows, cols);
    for c in 0..cols {
        for &(f, s) in cx.boundary_of(k + 1, c as CellId) {
            m[(f as usize, c)] += BigInt::from(s);
        }
    }
    let one = BigInt::from(1);
    smith_normal_form(&m)
        .factors
        .iter()
        .all(|f| *f == one || *f == BigInt::from(0))
}

fn random_cochain(rng: &mut ChaCha8Rng, cx: &CellComplex, deg: usize, modulus: i64, supp: usize) -> Cochain {
    let n = cx.n_cells(deg);
    Cochain::from_entries(
        cx,
        deg,
        modulus,
        (0..supp).map(|_| (rng.gen_range(0..n) as CellId, rng.gen_range(-9..=9i64))),
    )
}

fn random_chain(rng: &mut ChaCha8Rng, cx: &CellComplex, deg: usize, modulus: i64, supp: usize) -> Chain {
    let n = cx.n_cells(deg);
    Chain::from_entries(
        cx,
        deg,
        modulus,
        (0..supp).map(|_| (rng.gen_range(0..n) as CellId, rng.gen_range(-9..=9i64))),
    )
}

fn pair<A: Clone>(_: A) {}

// ---------------------------------------------------------------------------
// Cell counts
// ---------------------------------------------------------------------------

#[test]
fn cubical_counts_match_binomial_oracle() {
    for &(d, l) in &[(1usize, 3usize), (2, 3), (3, 3), (4, 4), (2, 5)] {
        let cx = build_cubical_torus(d, l).unwrap();
        assert_eq!(cx.dim(), d);
        for k in 0..=d {
            let expect = oracle_binom(d, k) * (l as u64).pow(d as u32);
            assert_eq!(cx.n_cells(k) as u64, expect, "d={d} l={l} k={k}");
        }
    }
    // 2-cell count of the d=4, L=4 torus.
    let cx = build_cubical_torus(4, 4).unwrap();
    assert_eq!(cx.n_cells(2), 1536);
}

#[test]
fn simplex_boundary_counts() {
    let cx = build_simplex_boundary(4).unwrap();
    assert_eq!(
        (0..=3).map(|k| cx.n_cells(k)).collect::<Vec<_>>(),
        vec![5, 10, 10, 5]
    );
    let cx = build_simplex_boundary(7).unwrap();
    assert_eq!(cx.n_cells(3), 70);
    for n in 2..=6 {
        let cx = build_simplex_boundary(n).unwrap();
        for k in 0..n {
            assert_eq!(cx.n_cells(k) as u64, oracle_binom(n + 1, k + 1));
        }
        // Euler characteristic of the (n-1)-sphere.
        let chi: i64 = (0..n).map(|k| if k % 2 == 0 { 1 } else { -1 } * cx.n_cells(k) as i64).sum();
        assert_eq!(chi, 1 + if (n - 1) % 2 == 0 { 1 } else { -1 });
    }
}

#[test]
fn kuhn_counts_match_ordered_partition_oracle() {
    let cx = build_kuhn_torus(2, 3).unwrap();
    assert_eq!(cx.n_cells(2), 18);
    let cx = build_kuhn_torus(3, 3).unwrap();
    assert_eq!(cx.n_cells(3), 162);
    for &(d, l) in &[(1usize, 3usize), (2, 3), (2, 4), (3, 3), (4, 3)] {
        let cx = build_kuhn_torus(d, l).unwrap();
        let vol = (l as u64).pow(d as u32);
        for k in 0..=d {
            assert_eq!(
                cx.n_cells(k) as u64,
                oracle_kuhn_cells_per_base(d, k) * vol,
                "d={d} l={l} k={k}"
            );
        }
        let chi: i64 =
            (0..=d).map(|k| if k % 2 == 0 { 1 } else { -1 } * cx.n_cells(k) as i64).sum();
        assert_eq!(chi, 0, "torus Euler characteristic");
    }
}

// ---------------------------------------------------------------------------
// Boundary algebra
// ---------------------------------------------------------------------------

#[test]
fn boundary_squares_to_zero_on_every_cell() {
    let complexes: Vec<CellComplex> = vec![
        build_cubical_torus(1, 3).unwrap(),
        build_cubical_torus(2, 3).unwrap(),
        build_cubical_torus(3, 3).unwrap(),
        build_kuhn_torus(2, 3).unwrap(),
        build_kuhn_torus(3, 3).unwrap(),
        build_simplex_boundary(4).unwrap(),
        build_simplex_boundary(5).unwrap(),
    ];
    for cx in &complexes {
        for k in 2..=cx.dim() {
            for id in 0..cx.n_cells(k) {
                let c = Chain::unit(cx, k, 0, id as CellId);
                let dd = apply_boundary(cx, &apply_boundary(cx, &c));
                assert!(dd.is_zero(), "dd != 0 at degree {k}");
            }
        }
    }
}

#[test]
fn circle_and_small_torus_boundaries() {
    let cx = build_cubical_torus(1, 3).unwrap();
    assert_eq!(cx.n_cells(0), 3);
    assert_eq!(cx.n_cells(1), 3);
    let all_edges = Chain::from_entries(&cx, 1, 0, (0..3).map(|i| (i as CellId, 1)));
    assert!(apply_boundary(&cx, &all_edges).is_zero());

    // Coboundary of a vertex indicator: one incoming edge, one outgoing.
    let v = Cochain::unit(&cx, 0, 0, 0);
    let dv = apply_differential(&cx, &v);
    let mut signs: Vec<i64> = dv.iter().map(|(_, s)| s).collect();
    signs.sort();
    assert_eq!(signs, vec![-1, 1]);

    let cx = build_cubical_torus(2, 3).unwrap();
    assert_eq!(cx.n_cells(2), 9);
    for id in 0..9 {
        let c = Chain::unit(&cx, 2, 0, id);
        assert!(apply_boundary(&cx, &apply_boundary(&cx, &c)).is_zero());
    }
}

#[test]
fn adjunction_of_differential_and_boundary() {
    let complexes: Vec<CellComplex> = vec![
        build_cubical_torus(2, 3).unwrap(),
        build_cubical_torus(3, 4).unwrap(),
        build_kuhn_torus(2, 3).unwrap(),
        build_kuhn_torus(3, 3).unwrap(),
        build_simplex_boundary(5).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for cx in &complexes {
        for trial in 0..1000 {
            let k = rng.gen_range(0..cx.dim());
            let modulus = [0, 4][trial % 2];
            let a = random_cochain(&mut rng, cx, k, modulus, 8);
            let c = random_chain(&mut rng, cx, k + 1, modulus, 8);
            let lhs: i64 = {
                let da = apply_differential(cx, &a);
                c.iter().map(|(cell, v)| v * da.coeff(cell)).sum()
            };
            let rhs: i64 = {
                let bc = apply_boundary(cx, &c);
                bc.iter().map(|(cell, v)| v * a.coeff(cell)).sum()
            };
            if modulus == 0 {
                assert_eq!(lhs, rhs);
            } else {
                assert_eq!(lhs.rem_euclid(modulus), rhs.rem_euclid(modulus));
            }
        }
    }
}

#[test]
fn differential_squares_to_zero_mod_4_and_over_z() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for cx in &[build_cubical_torus(3, 3).unwrap(), build_kuhn_torus(3, 3).unwrap()] {
        for _ in 0..200 {
            for &m in &[0i64, 4] {
                let deg = rng.gen_range(0..cx.dim() - 1);
                let a = random_cochain(&mut rng, cx, deg, m, 6);
                let dd = apply_differential(cx, &apply_differential(cx, &a));
                assert!(dd.is_zero());
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Homology against the Smith normal form oracle
// ---------------------------------------------------------------------------

#[test]
fn betti_numbers_of_tori_and_spheres() {
    for &(d, l) in &[(1usize, 3usize), (2, 3), (3, 3)] {
        let cx = build_cubical_torus(d, l).unwrap();
        for k in 0..=d {
            assert_eq!(oracle_betti(&cx, k) as u64, oracle_binom(d, k), "cubical d={d} k={k}");
            assert!(oracle_torsion_free(&cx, k));
        }
    }
    for &(d, l) in &[(1usize, 3usize), (2, 3), (3, 3)] {
        let cx = build_kuhn_torus(d, l).unwrap();
        for k in 0..=d {
            assert_eq!(oracle_betti(&cx, k) as u64, oracle_binom(d, k), "kuhn d={d} k={k}");
            assert!(oracle_torsion_free(&cx, k));
        }
    }
    for n in [2usize, 4] {
        let cx = build_simplex_boundary(n).unwrap();
        for k in 0..n {
            let expect = if k == 0 || k == n - 1 { 1 } else { 0 };
            assert_eq!(oracle_betti(&cx, k), expect, "sphere n={n} k={k}");
            assert!(oracle_torsion_free(&cx, k));
        }
    }
}

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

#[test]
fn integrate_counts_and_kills_coboundaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let complexes: Vec<CellComplex> = vec![
        build_cubical_torus(2, 3).unwrap(),
        build_cubical_torus(3, 3).unwrap(),
        build_kuhn_torus(2, 3).unwrap(),
        build_simplex_boundary(3).unwrap(),
    ];
    for cx in &complexes {
        let d = cx.dim();
        let one_cell = Cochain::unit(cx, d, 0, 0);
        assert_eq!(integrate(cx, &one_cell).unwrap(), 1);
        for _ in 0..1000 {
            let b = random_cochain(&mut rng, cx, d - 1, 0, 6);
            assert_eq!(integrate(cx, &apply_differential(cx, &b)).unwrap(), 0);
        }
        let low = Cochain::unit(cx, 0, 0, 0);
        assert_eq!(
            integrate(cx, &low),
            Err(ComplexError::WrongDegree { expected: d, got: 0 })
        );
    }
    let cx = build_cubical_torus(2, 3).unwrap();
    let ones = Cochain::from_entries(&cx, 2, 0, (0..9).map(|i| (i as CellId, 1)));
    assert_eq!(integrate(&cx, &ones).unwrap(), 9);
}

// ---------------------------------------------------------------------------
// Dual correspondence
// ---------------------------------------------------------------------------

#[test]
fn dual_is_a_signed_bijection_interchanging_degrees() {
    for d in 1..=4 {
        let cx = build_cubical_torus(d, 3).unwrap();
        for k in 0..=d {
            let mut seen = std::collections::BTreeSet::new();
            for id in 0..cx.n_cells(k) {
                let (dc, sign) = dual_correspondence(&cx, k, id as CellId).unwrap();
                assert!(sign == 1 || sign == -1);
                assert!((dc as usize) < cx.n_cells(d - k));
                assert!(seen.insert(dc), "dual not injective");
                // Applying the dual twice returns the cell translated one
                // step down every axis.
                let (ddc, _) = dual_correspondence(&cx, d - k, dc).unwrap();
                let (base, axes) = cx.cubical_cell(k, id as CellId);
                let (dbase, daxes) = cx.cubical_cell(k, ddc);
                assert_eq!(axes, daxes);
                for a in 0..d {
                    assert_eq!((base[a] + 3 - 1) % 3, dbase[a]);
                }
            }
        }
    }
}

#[test]
fn dual_intertwines_boundary_and_differential_exactly() {
    for d in 1..=4 {
        let cx = build_cubical_torus(d, 3).unwrap();
        for k in 1..=d {
            for id in 0..cx.n_cells(k) {
                let c = Chain::unit(&cx, k, 0, id as CellId);
                let lhs = dual_cochain(&cx, &apply_boundary(&cx, &c)).unwrap();
                let rhs = apply_differential(&cx, &dual_cochain(&cx, &c).unwrap());
                assert_eq!(lhs, rhs, "d={d} k={k} id={id}");
            }
        }
    }
}

#[test]
fn dual_preserves_mid_degree_and_pairs_once() {
    let cx = build_cubical_torus(4, 3).unwrap();
    let (dc, _) = dual_correspondence(&cx, 2, 5).unwrap();
    pair(dc);
    let cx6 = build_cubical_torus(6, 3).unwrap();
    let (dc6, _) = dual_correspondence(&cx6, 3, 11).unwrap();
    assert!((dc6 as usize) < cx6.n_cells(3));
    // Intersection pairing: the dual cochain of a cell evaluates to +-1 on
    // exactly one cell.
    for k in 0..=4 {
        for id in [0usize, 7, 13] {
            let c = Chain::unit(&cx, k, 0, id as CellId);
            let dual = dual_cochain(&cx, &c).unwrap();
            assert_eq!(dual.support_len(), 1);
            let (_, v) = dual.iter().next().unwrap();
            assert!(v == 1 || v == -1);
        }
    }
    // Simplicial complexes have no dual correspondence.
    let kuhn = build_kuhn_torus(2, 3).unwrap();
    assert_eq!(dual_correspondence(&kuhn, 0, 0), Err(ComplexError::UnsupportedComplex));
}

// ---------------------------------------------------------------------------
// Validation errors and canonical ordering
// ---------------------------------------------------------------------------

#[test]
fn construction_rejects_degenerate_and_oversized_inputs() {
    assert_eq!(build_cubical_torus(2, 2).unwrap_err(), ComplexError::DegenerateLattice { l: 2 });
    assert!(matches!(
        build_cubical_torus(8, 6).unwrap_err(),
        ComplexError::SizeLimitExceeded { .. }
    ));
    assert!(matches!(
        build_cubical_torus(0, 3).unwrap_err(),
        ComplexError::UnsupportedDimension { .. }
    ));
    assert!(matches!(
        build_cubical_torus(9, 3).unwrap_err(),
        ComplexError::UnsupportedDimension { .. }
    ));
    assert!(matches!(build_simplex_boundary(1).unwrap_err(), ComplexError::UnsupportedDimension { .. }));
    assert!(matches!(build_simplex_boundary(11).unwrap_err(), ComplexError::UnsupportedDimension { .. }));
    assert!(matches!(build_kuhn_torus(6, 3).unwrap_err(), ComplexError::UnsupportedDimension { .. }));
    assert_eq!(build_kuhn_torus(2, 1).unwrap_err(), ComplexError::DegenerateLattice { l: 1 });
}

#[test]
fn cell_ids_follow_lexicographic_descriptor_order() {
    let cx = build_cubical_torus(3, 3).unwrap();
    for k in 0..=3 {
        let mut prev: Option<(Vec<u16>, Vec<u8>)> = None;
        for id in 0..cx.n_cells(k) {
            let (base, axes) = cx.cubical_cell(k, id as CellId);
            let key = (base.to_vec(), axes.to_vec());
            if let Some(p) = &prev {
                assert!(*p < key, "descriptor order broken at degree {k} id {id}");
            }
            assert_eq!(cx.cubical_id(&base, &axes), id as CellId);
            prev = Some(key);
        }
    }
    let cx = build_kuhn_torus(2, 3).unwrap();
    for k in 0..=2 {
        let mut prev: Option<Vec<u32>> = None;
        for id in 0..cx.n_cells(k) {
            let vs = cx.simplex_vertices(k, id as CellId).to_vec();
            assert!(vs.windows(2).all(|w| w[0] < w[1]), "vertex tuple sorted");
            if let Some(p) = &prev {
                assert!(*p < vs);
            }
            assert_eq!(cx.simplex_id(&vs), Some((k, id as CellId)));
            prev = Some(vs);
        }
    }
}

#[test]
fn labels_are_stable_and_informative() {
    let cx = build_cubical_torus(2, 3).unwrap();
    let lbl = cx.cell_label(1, 0);
    assert!(lbl.contains("e"), "{lbl}");
    let kuhn = build_kuhn_torus(2, 3).unwrap();
    let lbl = kuhn.cell_label(2, 0);
    assert!(lbl.starts_with('('), "{lbl}");
}
