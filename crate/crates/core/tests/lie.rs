use odeconf::lie::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn idx(t: &StructureTable, l: &str) -> usize {
    t.index_of(l).unwrap()
}

#[test]
fn flat_tables_read_off_the_structure_equations() {
    let p = flat_structure_constants(FlatSystem::Point);
    assert_eq!(p.dim(), 7);
    assert!(p.is_antisymmetric());
    assert_eq!(p.get(idx(&p, "theta1"), idx(&p, "Omega1"), idx(&p, "theta1")), &Q3::int(-1));
    let g = flat_structure_constants(FlatSystem::G2);
    assert_eq!(g.dim(), 14);
    assert!(g.is_antisymmetric());
    // dθ⁴ ∋ (4/3) θ³∧Ω₆ and dθ⁵ ∋ −(4/3) θ³∧Ω₅.
    assert_eq!(g.get(idx(&g, "theta4"), idx(&g, "theta3"), idx(&g, "Omega6")), &Q3::frac(-4, 3));
    assert_eq!(g.get(idx(&g, "theta5"), idx(&g, "theta3"), idx(&g, "Omega5")), &Q3::frac(4, 3));
}

#[test]
fn jacobi_and_d_squared_agree() {
    for sys in [FlatSystem::Point, FlatSystem::G2] {
        let t = flat_structure_constants(sys);
        assert!(t.jacobi_check().holds, "{:?}", sys);
        assert!(t.d_squared_check().unwrap().is_empty(), "{:?}", sys);
    }
}

#[test]
fn mutated_table_fails_both_routes() {
    let mut t = flat_structure_constants(FlatSystem::Point);
    let (k, i, j) = (idx(&t, "theta1"), idx(&t, "Omega2"), idx(&t, "theta2"));
    let v = t.get(k, i, j) + &Q3::one();
    t.set(k, i, j, v);
    let r = t.jacobi_check();
    assert!(!r.holds);
    let v = r.violation.unwrap();
    assert_ne!(v.value, "0");
    assert!(!t.d_squared_check().unwrap().is_empty());
}

#[test]
fn killing_signatures() {
    let g = flat_structure_constants(FlatSystem::G2).killing_analysis();
    assert!(g.nondegenerate);
    assert_eq!(g.inertia.triple(), (8, 6, 0));
    let p = flat_structure_constants(FlatSystem::Point).killing_analysis();
    assert!(!p.nondegenerate);
    assert_eq!((p.rank, p.inertia.triple()), (4, (3, 1, 3)));
    let a = StructureTable::zero(vec!["a".into(), "b".into(), "c".into()]).killing_analysis();
    assert_eq!(a.inertia.triple(), (0, 0, 3));
}

#[test]
fn matrix_bases_have_the_expected_shapes() {
    for (c, n, size) in [(Connection::Point, 7, 5), (Connection::PointNormal, 7, 8), (Connection::G2, 14, 7)] {
        let b = matrix_rep(c);
        assert_eq!((b.dim(), b.size()), (n, size), "{:?}", c);
        assert!(b.is_independent(), "{:?}", c);
    }
    // The 5×5 connection is lower block-triangular apart from its first column.
    let b = matrix_rep(Connection::Point);
    for i in 0..b.dim() {
        let m = b.matrix(i);
        assert!((1..5).all(|c| m[0][c].is_zero()));
        assert!((0..4).all(|r| m[r][4].is_zero()));
    }
}

#[test]
fn connections_close_onto_the_flat_tables() {
    for (c, f) in [(Connection::Point, FlatSystem::Point), (Connection::PointNormal, FlatSystem::Point), (Connection::G2, FlatSystem::G2)] {
        let cl = matrix_rep(c).commutator_closure_check();
        assert!(cl.closed, "{:?}", c);
        let t = cl.table.unwrap();
        assert!(t.jacobi_check().holds);
        let flat = flat_structure_constants(f);
        assert!(t.same_brackets(&flat), "{:?}", c);
        assert!(!t.same_brackets(&flat.negated()), "{:?}", c);
    }
}

#[test]
fn invariant_bilinear_forms() {
    let g2 = matrix_rep(Connection::G2).invariant_bilinear_form();
    assert_eq!(g2.dimension, 1);
    assert_eq!(g2.basis_inertia[0].unsigned(), (4, 3));
    let n = matrix_rep(Connection::PointNormal).invariant_bilinear_form();
    assert!(n.contains_signature(4, 4));
    let p = matrix_rep(Connection::Point).invariant_bilinear_form();
    assert_eq!((p.dimension, p.basis_inertia[0].unsigned()), (1, (3, 2)));
    let rot = MatrixBasis::from_connection(&["a", "b", "c"], &[&["0", "-c", "b"], &["c", "0", "-a"], &["-b", "a", "0"]]).unwrap();
    let r = rot.invariant_bilinear_form();
    assert_eq!(r.dimension, 1);
    let b = &r.basis[0];
    assert!(b[0][1].is_zero() && b[0][2].is_zero() && b[1][2].is_zero());
    assert!(b[0][0] == b[1][1] && b[1][1] == b[2][2] && !b[0][0].is_zero());
}

#[test]
fn invariant_three_form_is_generic() {
    let b = matrix_rep(Connection::G2);
    let r = b.invariant_three_form();
    assert_eq!(r.dimension, 1);
    assert!(r.generic);
    assert_eq!(r.induced_inertia.unwrap().unsigned(), (4, 3));
    assert_eq!(r.proportional_to_invariant_form, Some(true));
}

#[test]
fn random_matrices_have_no_invariant_three_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let labels: Vec<String> = (0..14).map(|i| format!("X{}", i)).collect();
    let mats = (0..14).map(|_| (0..7).map(|_| (0..7).map(|_| Q3::int(rng.gen_range(-3..=3))).collect()).collect()).collect();
    let b = MatrixBasis::new(labels, mats).unwrap();
    assert_eq!(b.invariant_three_form().dimension, 0);
    assert_eq!(b.invariant_bilinear_form().dimension, 0);
}

#[test]
fn verify_reports_are_consistent() {
    for s in LieSystem::ALL {
        let r = verify(s).unwrap();
        assert!(r.consistent(), "{}", s);
        assert!(r.jacobi.holds, "{}", s);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["system"], s.name());
    }
    assert!("nope".parse::<LieSystem>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn relabeling_preserves_jacobi_and_killing(perm in Just((0..14usize).collect::<Vec<_>>()).prop_shuffle()) {
        let g = flat_structure_constants(FlatSystem::G2);
        let labels: Vec<String> = perm.iter().map(|&i| g.labels()[i].clone()).collect();
        let h = g.reordered(&labels).unwrap();
        prop_assert!(h.jacobi_check().holds);
        prop_assert!(h.same_brackets(&g));
        prop_assert_eq!(h.killing_analysis().inertia.triple(), (8, 6, 0));
    }
}
