//! Consumer drive of the Pauli layer: the single-qudit clock/shift phase,
//! a toric stabilizer group checked for commutation, membership queries with
//! exact certificates, and commutant quotients on two lattices.

use stabstat::complex::*;
use stabstat::pauli::*;

fn coboundary_x(cx: &CellComplex, k: usize, id: CellId, m: i64) -> PauliOperator {
    PauliOperator::from_x(cx, &apply_differential(cx, &Cochain::unit(cx, k, m, id)))
}

fn boundary_z(cx: &CellComplex, k: usize, id: CellId, m: i64) -> PauliOperator {
    let entries = cx.boundary_of(k, id).iter().map(|&(f, s)| (f, s as i64));
    PauliOperator::from_z(cx, &Cochain::from_entries(cx, k - 1, m, entries))
}

fn toric(cx: &CellComplex, qudit_deg: usize, m: i64) -> StabilizerGroup {
    let mut gens = Vec::new();
    for e in 0..cx.n_cells(qudit_deg - 1) {
        let id = e as CellId;
        gens.push((format!("A{id}"), coboundary_x(cx, qudit_deg - 1, id, m)));
    }
    for t in 0..cx.n_cells(qudit_deg + 1) {
        let id = t as CellId;
        gens.push((format!("B{id}"), boundary_z(cx, qudit_deg + 1, id, m)));
    }
    StabilizerGroup::new(cx, qudit_deg, m, gens).unwrap()
}

fn main() {
    // Clock against shift on one mod-4 qudit: a quarter turn.
    let circle = build_cubical_torus(1, 3).unwrap();
    let z = PauliOperator::from_z(&circle, &Cochain::unit(&circle, 1, 4, 0));
    let x = PauliOperator::from_x(&circle, &Cochain::unit(&circle, 1, 4, 0));
    println!("[Z, X] phase at M=4 = {}", commutator_phase(&z, &x).unwrap());

    // Mod-2 toric code on the 3x3 torus, qudits on the 18 edges.
    let t2 = build_cubical_torus(2, 3).unwrap();
    let group = toric(&t2, 1, 2);
    println!("toric T^2: {} generators, {} bad pairs", group.len(), group.check_mutual_commutation().len());

    let prod = multiply(&group.generator(&t2, 0), &group.generator(&t2, 12)).unwrap();
    match group.is_member(&t2, &prod) {
        Membership::Member { combination, phase_defect } => println!(
            "star * plaquette: member with {} factors, defect {phase_defect}",
            combination.len()
        ),
        Membership::NotMember => println!("star * plaquette: not a member"),
    }

    // A winding Z line commutes with every generator yet is not a member.
    let winding = PauliOperator::from_z(
        &t2,
        &Cochain::from_entries(&t2, 1, 2, (0..3).map(|i| (t2.cubical_id(&[i, 0], &[0]), 1))),
    );
    println!(
        "winding Z: {} violations, member = {}",
        group.violations(&winding).len(),
        group.is_member(&t2, &winding) != Membership::NotMember
    );

    println!("commutant of toric T^2 mod 2 = {}", group.commutant_quotient());

    // Mod-4 loop code on the 3^4 torus, qudits on the 324 faces.
    let t4 = build_cubical_torus(4, 3).unwrap();
    let loops = toric(&t4, 2, 4);
    println!("loop code T^4: {} generators, {} bad pairs", loops.len(), loops.check_mutual_commutation().len());
    println!("commutant of loop code T^4 mod 4 = {}", loops.commutant_quotient());
}
