//! Randomized identities across modules. Each proptest prints nothing on
//! success; failures are reproducible from the persisted proptest seed.

use kforge_core::builders::{self, twisted_lattice_count};
use kforge_core::dgla::{validate, BasisRef, DgLa, GradedElement, GradedMap, ValidateOptions};
use kforge_core::equivariance::GroupAction;
use kforge_core::hodge::{betti_numbers, hodge_data, random_metric};
use kforge_core::kuranishi::{
    gauge_transform, kuranishi_map, mc_residual, solve_kuranishi, verify_family, SolveOptions,
};
use kforge_core::series::Monomial;
use kforge_core::{GradedSeries, Matrix, Scalar};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_scalar() -> impl Strategy<Value = Scalar> {
    (-3i64..=3, -3i64..=3).prop_map(|(a, b)| Scalar::gaussian(a, b))
}

fn element(l: &DgLa, q: i32) -> impl Strategy<Value = GradedElement> {
    let shape = l.shape().clone();
    prop::collection::vec(small_scalar(), shape.dim(q))
        .prop_map(move |v| GradedElement::homogeneous(&shape, q, v).unwrap())
}

/// A series in `nvars` parameters with up to `terms` random degree-`q` terms.
fn series(l: &DgLa, q: i32, nvars: usize, order: u32, terms: usize) -> impl Strategy<Value = GradedSeries> {
    let shape = l.shape().clone();
    let names: Vec<String> = (1..=nvars).map(|i| format!("s{i}")).collect();
    prop::collection::vec(
        (prop::collection::vec(0u32..=2, nvars), element(l, q)),
        0..=terms,
    )
    .prop_map(move |ts| {
        let mut s = GradedSeries::zero(names.clone(), order, shape.clone()).unwrap();
        for (e, c) in ts {
            let m = Monomial::new(e);
            if m.total_degree() >= 1 && m.total_degree() <= order {
                s.insert(m, c).unwrap();
            }
        }
        s
    })
}

/// Decodes a torus-constants degree-1 element into one `r×r` matrix per
/// one-form, reading only the basis names (`Eab*ek`).
fn decode_one_form(l: &DgLa, e: &GradedElement, n: usize, r: usize) -> Vec<Matrix> {
    let mut out = vec![Matrix::zeros(r, r); n];
    for (i, c) in e.component(1).iter().enumerate() {
        let name = l.space().name(BasisRef::new(1, i));
        let (unit, form) = name.split_once("*e").unwrap();
        let a = unit.as_bytes()[1] - b'1';
        let b = unit.as_bytes()[2] - b'1';
        let k: usize = form.parse::<usize>().unwrap() - 1;
        out[k][(a as usize, b as usize)] += c.clone();
    }
    out
}

/// Coefficient matrix of `e1^e2` in a degree-2 element.
fn decode_two_form(l: &DgLa, e: &GradedElement, r: usize) -> Matrix {
    let mut out = Matrix::zeros(r, r);
    for (i, c) in e.component(2).iter().enumerate() {
        let name = l.space().name(BasisRef::new(2, i));
        let unit = name.split('*').next().unwrap();
        let a = (unit.as_bytes()[1] - b'1') as usize;
        let b = (unit.as_bytes()[2] - b'1') as usize;
        out[(a, b)] += c.clone();
    }
    out
}

#[test]
fn builder_grid_validates() {
    for n in 1..=2 {
        for r in 1..=3 {
            let (l, _) = builders::torus_constants(n, r).unwrap();
            assert!(validate(&l, ValidateOptions::default()).passed(), "torus n={n} r={r}");
        }
    }
    for m in 0..=4 {
        for c in [Scalar::zero(), Scalar::from_ratio(1, 2), Scalar::gaussian(1, 1)] {
            let (l, _) = builders::twisted_dolbeault(m, &c).unwrap();
            assert!(validate(&l, ValidateOptions::default()).passed());
        }
    }
}

#[test]
fn twisted_betti_matches_lattice_count() {
    for m in 0..=4 {
        for c in [Scalar::zero(), Scalar::from_ratio(1, 2), Scalar::gaussian(1, 1), Scalar::gaussian(-2, 1)] {
            let (l, _) = builders::twisted_dolbeault(m, &c).unwrap();
            let b = betti_numbers(&l);
            let count = twisted_lattice_count(m, &c);
            assert_eq!((b[&0], b[&1]), (count, count), "M={m} c={c}");
        }
    }
}

#[test]
fn betti_numbers_are_metric_independent() {
    let seed = 20260101;
    println!("seed {seed}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (toy, _, _) = builders::toy3();
    let (torus, _) = builders::torus_constants(2, 2).unwrap();
    let (tw, _) = builders::twisted_dolbeault(2, &Scalar::zero()).unwrap();
    for l in [&toy, &torus, &tw] {
        let betti = betti_numbers(l);
        for _ in 0..3 {
            let m = random_metric(l.shape(), &mut rng, 3);
            let h = hodge_data(l, &m).unwrap();
            assert_eq!(h.harmonic_dims(), betti);
            assert!(h.verify(l).all());
        }
    }
}

#[test]
fn toy3_mc_substitution_oracle() {
    // MC(t x − ½t² y) = −½ t³ v
    let (l, m, _) = builders::toy3();
    let h = hodge_data(&l, &m).unwrap();
    let f = solve_kuranishi(&l, &h, SolveOptions::with_order(5)).unwrap();
    let mut expected = f.alpha.zero_like();
    let v = GradedElement::basis(l.shape(), BasisRef::new(2, 1));
    expected.insert(Monomial::new(vec![3]), v.scale(&Scalar::from_ratio(-1, 2))).unwrap();
    assert_eq!(mc_residual(&l, &f.alpha).unwrap(), expected);
}

#[test]
fn order_stability() {
    let (l, m, _) = builders::toy3();
    let h = hodge_data(&l, &m).unwrap();
    let hi = solve_kuranishi(&l, &h, SolveOptions::with_order(7)).unwrap();
    for n in 1..7 {
        let lo = solve_kuranishi(&l, &h, SolveOptions::with_order(n)).unwrap();
        let cut = hi.alpha.truncate_to(n).unwrap();
        assert_eq!(cut.terms(), lo.alpha.terms());
        assert_eq!(hi.obstruction.truncate_to(n).unwrap().terms(), lo.obstruction.terms());
    }
}

#[test]
fn random_metric_family_identities() {
    let seed = 7;
    println!("seed {seed}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l, _, _) = builders::toy3();
    for _ in 0..3 {
        let m = random_metric(l.shape(), &mut rng, 2);
        let h = hodge_data(&l, &m).unwrap();
        let f = solve_kuranishi(&l, &h, SolveOptions::with_order(6)).unwrap();
        assert!(verify_family(&l, &h, &f).unwrap().all());
        assert_eq!(kuranishi_map(&l, &h, &f.alpha).unwrap(), f.linear_part());
    }
}

#[test]
fn commuting_points_are_mc_zeros() {
    let (l, m) = builders::torus_constants(2, 2).unwrap();
    let h = hodge_data(&l, &m).unwrap();
    let f = solve_kuranishi(&l, &h, SolveOptions::with_order(3)).unwrap();
    // A1 = diag(1,2), A2 = diag(3,4): parameters in unit order E11, E22, E12, E21.
    let point: Vec<Scalar> = [1, 2, 0, 0, 3, 4, 0, 0].iter().map(|&x| Scalar::from_int(x)).collect();
    for g in &f.ideal_generators {
        assert!(g.polynomial.evaluate(&point).is_zero());
    }
    let mc = mc_residual(&l, &f.alpha).unwrap();
    assert!(mc.evaluate(&point).unwrap().is_zero());
}

#[test]
fn conjugation_commutes_with_hodge_operators() {
    let (l, m) = builders::torus_constants(2, 2).unwrap();
    let h = hodge_data(&l, &m).unwrap();
    let hm = Matrix::diagonal(&[Scalar::one(), Scalar::i()]);
    let (a, _) = builders::conjugation_action(&l, &hm).unwrap();
    let g = &a.generators()[0];
    let shape = l.shape();
    for op in [h.projector(), h.green(), h.laplacian()] {
        assert!(g.compose(op).same_map(&op.compose(g), shape));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_is_bilinear(
        (a, a2, b, k) in {
            let (l, _) = builders::torus_constants(2, 2).unwrap();
            (element(&l, 1), element(&l, 1), element(&l, 0), small_scalar())
        }
    ) {
        let (l, _) = builders::torus_constants(2, 2).unwrap();
        let mut lhs_arg = a.clone();
        lhs_arg.add_scaled(&k, &a2);
        let lhs = l.bracket(&lhs_arg, &b).unwrap();
        let mut rhs = l.bracket(&a, &b).unwrap();
        rhs.add_scaled(&k, &l.bracket(&a2, &b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn half_bracket_is_wedge_of_matrices(a in {
        let (l, _) = builders::torus_constants(2, 3).unwrap();
        element(&l, 1)
    }) {
        // ½[α, α] = α ∧ α = (A1 A2 − A2 A1) e1^e2
        let (l, _) = builders::torus_constants(2, 3).unwrap();
        let mats = decode_one_form(&l, &a, 2, 3);
        let direct = mats[0].mul(&mats[1]).sub(&mats[1].mul(&mats[0]));
        let half = l.bracket(&a, &a).unwrap().scale(&Scalar::from_ratio(1, 2));
        prop_assert_eq!(decode_two_form(&l, &half, 3), direct);
    }

    #[test]
    fn group_action_commutes_with_mc(s in {
        let (l, _) = builders::torus_constants(2, 2).unwrap();
        series(&l, 1, 2, 3, 4)
    }) {
        let (l, _) = builders::torus_constants(2, 2).unwrap();
        let swap = Matrix::from_ints(&[&[0, 1], &[1, 0]]);
        let (a, _): (GroupAction, _) = builders::conjugation_action(&l, &swap).unwrap();
        let g: &GradedMap = &a.generators()[0];
        let lhs = mc_residual(&l, &s.apply(g).unwrap()).unwrap();
        let rhs = mc_residual(&l, &s).unwrap().apply(g).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn gauge_inverse(
        (xi, s) in {
            let (l, _) = builders::torus_constants(2, 2).unwrap();
            (series(&l, 0, 2, 3, 3), series(&l, 1, 2, 3, 4))
        }
    ) {
        let (l, _) = builders::torus_constants(2, 2).unwrap();
        let g = gauge_transform(&l, &xi, &s).unwrap();
        prop_assert_eq!(gauge_transform(&l, &xi.neg(), &g).unwrap(), s);
    }

    #[test]
    fn gauge_inverse_with_differential(
        (xi, s) in {
            let (l, _) = builders::twisted_dolbeault(1, &Scalar::zero()).unwrap();
            (series(&l, 0, 1, 4, 3), series(&l, 1, 1, 4, 3))
        }
    ) {
        let (l, _) = builders::twisted_dolbeault(1, &Scalar::zero()).unwrap();
        let g = gauge_transform(&l, &xi, &s).unwrap();
        prop_assert_eq!(gauge_transform(&l, &xi.neg(), &g).unwrap(), s);
    }
}
