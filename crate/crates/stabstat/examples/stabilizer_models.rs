//! Consumer drive of the model builders: a condensed loop model checked for
//! commutation, excitation operators with their membership and syndrome
//! behavior, and the layered multilayer construction with its fusion group.

use stabstat::complex::Cochain;
use stabstat::models::*;

fn main() {
    // Condensed loop model on the 3^4 torus, qudits on the 486 faces.
    let lp = build_model(&ModelSpec::fermionic_loop(4, 3).unwrap()).unwrap();
    let fams: Vec<String> =
        lp.family_counts().iter().map(|(f, n)| format!("{f}:{n}")).collect();
    println!(
        "fermionic-loop d=4 L=3: qudits = {}, families = {}",
        lp.complex.n_cells(2),
        fams.join(" ")
    );
    println!(
        "all generator pairs commute = {}",
        lp.group.check_mutual_commutation().is_empty()
    );

    // The flux line squares into the group; the doubled hopping pair is
    // absorbed outright. Both memberships carry exact certificates.
    let face = Cochain::unit(&lp.complex, 2, 4, 0);
    let flux = lp.excitation_operator(ExcitationKind::Flux, &face).unwrap();
    println!(
        "flux^2 on one face is a stabilizer = {}",
        lp.group.is_member(&lp.complex, &flux.pow(2)).is_member_up_to_phase()
    );
    let hop = lp.excitation_operator(ExcitationKind::Hopping, &face).unwrap();
    println!(
        "hopping pair on one face is a stabilizer = {}",
        lp.group.is_member(&lp.complex, &hop).is_member_up_to_phase()
    );

    // A bare charge anticommutes with the gauge generator on each of the
    // four boundary edges of its face.
    let charge = lp.excitation_operator(ExcitationKind::Charge, &face).unwrap();
    let syn = lp.syndrome(&charge);
    println!(
        "charge on one face flips {} generators, all family G = {}",
        syn.len(),
        syn.iter().all(|e| e.family == StabFamily::G)
    );

    // Multilayer stacks: the single twisted Z2 level fuses as charge times
    // flux, and the (2,4) pair builds on two face layers.
    println!(
        "one twisted Z2 level: fusion group = {}",
        dw_fusion_group(&[2], &[vec![1]]).unwrap()
    );
    let two = dw_build(&[2, 4], &[vec![1, 1], vec![0, 0]], 3).unwrap();
    println!(
        "two-level (2,4) stack: {} generators on {} qudits",
        two.group.len(),
        two.complex.n_cells(2)
    );
}
