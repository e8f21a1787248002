//! Minimal consumer drive of the cup-product API: front/back product on a
//! simplex boundary, an intersection integral on the 2-torus, the Leibniz
//! residual on random cochains, and the mod-2 operations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stabstat::complex::*;
use stabstat::cup::*;

fn main() {
    // Front/back product of edge indicators on the boundary of the
    // 3-simplex: supported on the single triangle (0 1 2).
    let cx = build_simplex_boundary(3).unwrap();
    let e01 = cx.simplex_id(&[0, 1]).unwrap().1;
    let e12 = cx.simplex_id(&[1, 2]).unwrap().1;
    let u = Cochain::unit(&cx, 1, 0, e01);
    let v = Cochain::unit(&cx, 1, 0, e12);
    let prod = cup_i(&cx, &u, &v, 0).unwrap();
    for (cell, c) in prod.iter() {
        println!("ind(01) cup ind(12) = {c} on {}", cx.cell_label(2, cell));
    }

    // Two transverse hyperplane cocycles on the 2-torus intersect once.
    let t2 = build_cubical_torus(2, 3).unwrap();
    let x = |axis: usize| -> Cochain {
        let mut entries = Vec::new();
        for e in 0..t2.n_cells(1) {
            let (base, axes) = t2.cubical_cell(1, e as CellId);
            if axes[0] as usize == axis && base[axis] == 2 {
                entries.push((e as CellId, 1));
            }
        }
        Cochain::from_entries(&t2, 1, 0, entries)
    };
    let (x0, x1) = (x(0), x(1));
    println!(
        "d(x0) support = {}, d(x1) support = {}",
        apply_differential(&t2, &x0).support_len(),
        apply_differential(&t2, &x1).support_len()
    );
    let inter = integrate(&t2, &cup_i(&t2, &x0, &x1, 0).unwrap()).unwrap();
    println!("integral of x0 cup x1 over T^2 = {inter}");

    // Leibniz residual on random integer cochains of a 3-torus.
    let t3 = build_cubical_torus(3, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rand_cochain = |rng: &mut ChaCha8Rng, deg: usize| -> Cochain {
        let n = t3.n_cells(deg);
        Cochain::from_entries(
            &t3,
            deg,
            0,
            (0..4).map(|_| (rng.gen_range(0..n) as CellId, rng.gen_range(-9..=9i64))),
        )
    };
    let a = rand_cochain(&mut rng, 1);
    let b = rand_cochain(&mut rng, 2);
    // p=1, q=2, i=1: signs (-1)^p = -1, (-1)^{p+q-i} = 1, (-1)^{pq+p+q} = -1.
    let lhs = apply_differential(&t3, &cup_i(&t3, &a, &b, 1).unwrap());
    let da = apply_differential(&t3, &a);
    let db = apply_differential(&t3, &b);
    let rhs = cup_i(&t3, &da, &b, 1)
        .unwrap()
        .plus(&cup_i(&t3, &a, &db, 1).unwrap().scaled(-1))
        .plus(&cup_i(&t3, &a, &b, 0).unwrap().scaled(1))
        .plus(&cup_i(&t3, &b, &a, 0).unwrap().scaled(-1));
    let residual = lhs.plus(&rhs.scaled(-1));
    println!("Leibniz residual support (p=1,q=2,i=1) = {}", residual.support_len());

    // Mod-2 operations on a closed 1-cochain of the 3-torus.
    let g3 = Cochain::from_entries(
        &t3,
        1,
        2,
        (0..t3.n_cells(1)).filter_map(|e| {
            let (base, axes) = t3.cubical_cell(1, e as CellId);
            (axes[0] == 0 && base[0] == 2).then_some((e as CellId, 1))
        }),
    );
    let beta = bockstein(&t3, &g3).unwrap();
    let sq1 = steenrod_square(&t3, 1, &g3).unwrap();
    println!(
        "crossing cocycle on T^3: bockstein support = {}, Sq^1 support = {}",
        beta.support_len(),
        sq1.support_len()
    );

    // One-sided integral: t(c) = integral of x0 cup 1_c. Pairing t against
    // x1 recovers the intersection number computed above.
    let t = cup_integral_right(&t2, &x0, 0).unwrap();
    let paired: i64 = t.iter().map(|(c, v)| v * x1.coeff(c)).sum();
    println!("right-slot functional of x0: support = {}, <t, x1> = {paired}", t.support_len());
    let s = cup_integral_left(&t2, &x1, 0).unwrap();
    let paired_left: i64 = s.iter().map(|(c, v)| v * x0.coeff(c)).sum();
    println!("left-slot functional of x1: <x0, s> = {paired_left}");

    // A two-layer stack of 2-tori: doubled counts, per-layer incidence.
    let stack = build_layered_cubical_torus(2, 3, 2).unwrap();
    let per = t2.n_cells(2);
    let shifted = stack
        .boundary_of(2, per as CellId)
        .iter()
        .zip(t2.boundary_of(2, 0))
        .all(|(&(f, s), &(f0, s0))| f as usize == f0 as usize + t2.n_cells(1) && s == s0);
    println!(
        "two-layer T^2: layers = {}, squares = {}, copy-1 boundary shifted intact = {shifted}",
        stack.layer_count(),
        stack.n_cells(2)
    );
}
