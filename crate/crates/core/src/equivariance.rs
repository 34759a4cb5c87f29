//! Finite and infinitesimal actions on a dgLa, metric averaging, induced
//! actions on harmonic spaces, and equivariance of Kuranishi families.

use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use crate::dgla::{DgLa, GradedElement, GradedMap, Shape, Status};
use crate::error::{Error, Result};
use crate::hodge::{hodge_data, HodgeData, MetricData};
use crate::kuranishi::{mc_residual, obstruction_shape, KuranishiFamily};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::series::{GradedSeries, Polynomial};

/// Default cap on the enumerated group closure.
pub const DEFAULT_MAX_GROUP_SIZE: usize = 4096;

/// A finite group given by degree-preserving generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAction {
    generators: Vec<GradedMap>,
    orders: Option<Vec<u32>>,
}

impl GroupAction {
    pub fn new(generators: Vec<GradedMap>, orders: Option<Vec<u32>>) -> Self {
        GroupAction { generators, orders }
    }

    pub fn identity(shape: &Shape) -> Self {
        GroupAction::new(vec![GradedMap::identity(shape)], Some(vec![1]))
    }

    pub fn generators(&self) -> &[GradedMap] {
        &self.generators
    }

    pub fn orders(&self) -> Option<&[u32]> {
        self.orders.as_deref()
    }

    pub fn check_shape(&self, shape: &Shape) -> Result<()> {
        check_maps(&self.generators, shape, "generator")?;
        if let Some(o) = &self.orders {
            if o.len() != self.generators.len() {
                return Err(Error::at("orders", "one order per generator is required"));
            }
        }
        Ok(())
    }
}

/// A Lie algebra acting by degree-preserving derivations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfinitesimalAction {
    derivations: Vec<GradedMap>,
}

impl InfinitesimalAction {
    pub fn new(derivations: Vec<GradedMap>) -> Self {
        InfinitesimalAction { derivations }
    }

    pub fn derivations(&self) -> &[GradedMap] {
        &self.derivations
    }

    pub fn check_shape(&self, shape: &Shape) -> Result<()> {
        check_maps(&self.derivations, shape, "derivation")
    }
}

fn check_maps(maps: &[GradedMap], shape: &Shape, what: &str) -> Result<()> {
    for (i, g) in maps.iter().enumerate() {
        if g.shift() != 0 {
            return Err(Error::at(format!("{what}s[{i}]"), "must preserve degree"));
        }
        g.check_shape(shape).map_err(|e| Error::at(format!("{what}s[{i}]"), e.to_string()))?;
    }
    Ok(())
}

/// Either kind of action, as read from an action document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Finite(GroupAction),
    Infinitesimal(InfinitesimalAction),
}

impl Action {
    pub fn maps(&self) -> &[GradedMap] {
        match self {
            Action::Finite(a) => a.generators(),
            Action::Infinitesimal(a) => a.derivations(),
        }
    }

    pub fn check_shape(&self, shape: &Shape) -> Result<()> {
        match self {
            Action::Finite(a) => a.check_shape(shape),
            Action::Infinitesimal(a) => a.check_shape(shape),
        }
    }
}

pub const COND_INVERTIBLE: &str = "invertible";
pub const COND_COMMUTES_D: &str = "commutes_with_d";
pub const COND_BRACKET: &str = "preserves_bracket";
pub const COND_DERIVATION: &str = "derivation";
pub const COND_METRIC: &str = "metric_invariant";
pub const COND_METRIC_SKEW: &str = "metric_skew";
pub const COND_COMMUTES_ADJOINT: &str = "commutes_with_adjoint";
pub const COND_ORDERS: &str = "declared_orders";
pub const COND_LAPLACIAN: &str = "commutes_with_laplacian";
pub const COND_PROJECTOR: &str = "commutes_with_projector";
pub const COND_GREEN: &str = "commutes_with_green";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionCheck {
    pub condition: &'static str,
    pub status: Status,
    /// Informational checks do not affect [`ActionReport::passed`].
    pub informational: bool,
    /// First failing generator and where it fails.
    pub generator: Option<usize>,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActionReport {
    pub kind: &'static str,
    pub checks: Vec<ConditionCheck>,
}

impl ActionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.informational || c.status != Status::Fail)
    }

    pub fn get(&self, condition: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }

    pub fn status(&self, condition: &str) -> Status {
        self.get(condition).map_or(Status::Skipped, |c| c.status)
    }
}

/// Runs `f` on each map and records the first failure.
fn condition<F>(name: &'static str, maps: &[GradedMap], mut f: F) -> ConditionCheck
where
    F: FnMut(&GradedMap) -> Option<String>,
{
    for (i, g) in maps.iter().enumerate() {
        if let Some(w) = f(g) {
            return ConditionCheck {
                condition: name,
                status: Status::Fail,
                informational: false,
                generator: Some(i),
                witness: Some(w),
            };
        }
    }
    ConditionCheck { condition: name, status: Status::Pass, informational: false, generator: None, witness: None }
}

fn skipped(name: &'static str) -> ConditionCheck {
    ConditionCheck { condition: name, status: Status::Skipped, informational: false, generator: None, witness: None }
}

fn describe_column(l: &DgLa, diff: Option<crate::dgla::BasisRef>) -> Option<String> {
    diff.map(|b| format!("on basis vector {}", l.space().name(b)))
}

/// `a ∘ b` versus `b ∘ a`; on mismatch names the first basis vector.
fn commutes(l: &DgLa, a: &GradedMap, b: &GradedMap) -> Option<String> {
    let shape = l.shape();
    describe_column(l, a.compose(b).first_difference(&b.compose(a), shape))
}

fn invertibility(l: &DgLa, g: &GradedMap) -> Option<String> {
    let shape = l.shape();
    shape
        .degrees()
        .find(|&q| shape.dim(q) > 0 && g.block_or_zero(shape, q).inverse().is_none())
        .map(|q| format!("singular in degree {q}"))
}

fn inverse_map(l: &DgLa, g: &GradedMap) -> Option<GradedMap> {
    let shape = l.shape();
    let mut out = GradedMap::zero(0);
    for q in shape.degrees() {
        let b = g.block_or_zero(shape, q);
        out.set_block(q, if b.rows() == 0 { b } else { b.inverse()? });
    }
    Some(out)
}

/// First basis pair `(a, b)` with `g[a,b] ≠ [ga, gb]` (or, when `derivation`
/// is set, `g[a,b] ≠ [ga,b] + [a,gb]`).
fn bracket_defect(l: &DgLa, g: &GradedMap, derivation: bool) -> Option<String> {
    let shape = l.shape();
    if l.is_abelian() {
        return None;
    }
    let basis: Vec<_> = shape.basis().collect();
    let images: Vec<GradedElement> =
        basis.iter().map(|&b| g.apply(&GradedElement::basis(shape, b))).collect();
    for (ia, &a) in basis.iter().enumerate() {
        for (ib, &b) in basis.iter().enumerate() {
            if !shape.contains(a.degree + b.degree) {
                continue;
            }
            let lhs = g.apply(&l.bracket_basis(a, b));
            let rhs = if derivation {
                let ea = GradedElement::basis(shape, a);
                let eb = GradedElement::basis(shape, b);
                l.bracket_unchecked(&images[ia], &eb).add(&l.bracket_unchecked(&ea, &images[ib]))
            } else {
                l.bracket_unchecked(&images[ia], &images[ib])
            };
            if lhs != rhs {
                let names = l.space();
                return Some(format!(
                    "on ({}, {}): defect {}",
                    names.name(a),
                    names.name(b),
                    names.format_element(&lhs.sub(&rhs))
                ));
            }
        }
    }
    None
}

fn metric_defect(m: &MetricData, shape: &Shape, g: &GradedMap, skew: bool) -> Option<String> {
    for q in shape.degrees() {
        if shape.dim(q) == 0 {
            continue;
        }
        let b = g.block_or_zero(shape, q);
        let gram = m.gram(q);
        let lhs = b.conj_transpose().mul(gram);
        let (lhs, rhs) = if skew {
            (lhs.add(&gram.mul(&b)), Matrix::zeros(gram.rows(), gram.cols()))
        } else {
            (lhs.mul(&b), gram.clone())
        };
        if let Some((i, j)) = lhs.first_difference(&rhs) {
            return Some(format!("degree {q}, Gram entry ({}, {})", i + 1, j + 1));
        }
    }
    None
}

fn power(g: &GradedMap, k: u32, shape: &Shape) -> GradedMap {
    let mut out = GradedMap::identity(shape);
    for _ in 0..k {
        out = g.compose(&out);
    }
    out
}

fn operator_checks(l: &DgLa, h: &HodgeData, maps: &[GradedMap]) -> Vec<ConditionCheck> {
    vec![
        condition(COND_LAPLACIAN, maps, |g| commutes(l, g, h.laplacian())),
        condition(COND_PROJECTOR, maps, |g| commutes(l, g, h.projector())),
        condition(COND_GREEN, maps, |g| commutes(l, g, h.green())),
    ]
}

/// Checks the structural conditions of a finite action and, when the metric
/// is invariant, that every generator commutes with `□`, `P` and `G`.
pub fn validate_group_action(l: &DgLa, m: &MetricData, a: &GroupAction) -> Result<ActionReport> {
    let shape = l.shape();
    a.check_shape(shape)?;
    if !m.conforms(shape) {
        return Err(Error::input("metric does not match the graded space"));
    }
    let gens = a.generators();
    let invertible = condition(COND_INVERTIBLE, gens, |g| invertibility(l, g));
    let metric = condition(COND_METRIC, gens, |g| metric_defect(m, shape, g, false));
    let mut checks = vec![
        invertible,
        condition(COND_COMMUTES_D, gens, |g| commutes(l, g, l.differential())),
        condition(COND_BRACKET, gens, |g| bracket_defect(l, g, false)),
        metric.clone(),
    ];
    checks.push(match a.orders() {
        None => skipped(COND_ORDERS),
        Some(orders) => {
            let mut idx = 0;
            condition(COND_ORDERS, gens, |g| {
                let k = orders[idx];
                idx += 1;
                (!power(g, k, shape).same_map(&GradedMap::identity(shape), shape))
                    .then(|| format!("g^{k} is not the identity"))
            })
        }
    });
    if metric.status == Status::Pass {
        let h = hodge_data(l, m)?;
        checks.extend(operator_checks(l, &h, gens));
    } else {
        checks.extend([COND_LAPLACIAN, COND_PROJECTOR, COND_GREEN].map(skipped));
    }
    Ok(ActionReport { kind: "finite", checks })
}

/// Checks that each map is a derivation commuting with `d` and with `d*`.
///
/// Commuting with `d*` is what the harmonic theory needs; it holds whenever
/// the metric adjoint of `X` commutes with `d`. The stricter skew condition
/// `X^†Γ + ΓX = 0` is reported but does not affect the verdict.
pub fn validate_infinitesimal_action(
    l: &DgLa,
    m: &MetricData,
    a: &InfinitesimalAction,
) -> Result<ActionReport> {
    let shape = l.shape();
    a.check_shape(shape)?;
    if !m.conforms(shape) {
        return Err(Error::input("metric does not match the graded space"));
    }
    let h = hodge_data(l, m)?;
    let xs = a.derivations();
    let mut skew = condition(COND_METRIC_SKEW, xs, |x| metric_defect(m, shape, x, true));
    skew.informational = true;
    let mut checks = vec![
        condition(COND_DERIVATION, xs, |x| bracket_defect(l, x, true)),
        condition(COND_COMMUTES_D, xs, |x| commutes(l, x, l.differential())),
        condition(COND_COMMUTES_ADJOINT, xs, |x| commutes(l, x, h.adjoint())),
        skew,
    ];
    checks.extend(operator_checks(l, &h, xs));
    Ok(ActionReport { kind: "infinitesimal", checks })
}

pub fn validate_action(l: &DgLa, m: &MetricData, a: &Action) -> Result<ActionReport> {
    match a {
        Action::Finite(g) => validate_group_action(l, m, g),
        Action::Infinitesimal(x) => validate_infinitesimal_action(l, m, x),
    }
}

/// Every element of the group generated by the action, identity first, in
/// breadth-first order.
pub fn group_closure(shape: &Shape, a: &GroupAction, max_group_size: usize) -> Result<Vec<GradedMap>> {
    a.check_shape(shape)?;
    let dense = |g: &GradedMap| g.dense_blocks(shape);
    let identity = GradedMap::identity(shape);
    let mut seen: HashSet<Vec<Matrix>> = HashSet::from([dense(&identity)]);
    let mut elements = vec![identity.clone()];
    let mut queue = VecDeque::from([identity]);
    while let Some(e) = queue.pop_front() {
        for g in a.generators() {
            let p = g.compose(&e);
            if seen.insert(dense(&p)) {
                if elements.len() == max_group_size {
                    return Err(Error::Guard(format!(
                        "group closure exceeds the bound of {max_group_size} elements"
                    )));
                }
                elements.push(p.clone());
                queue.push_back(p);
            }
        }
    }
    Ok(elements)
}

/// The averaged metric `(1/|G|) Σ_g g^† Γ g`, degree by degree.
pub fn average_metric(
    shape: &Shape,
    m: &MetricData,
    a: &GroupAction,
    max_group_size: usize,
) -> Result<MetricData> {
    if !m.conforms(shape) {
        return Err(Error::input("metric does not match the graded space"));
    }
    let group = group_closure(shape, a, max_group_size)?;
    let k = Scalar::from_int(group.len() as i64).inv().expect("nonempty group");
    let grams = shape
        .degrees()
        .map(|q| {
            let gram = m.gram(q);
            let mut sum = Matrix::zeros(gram.rows(), gram.cols());
            for g in &group {
                let b = g.block_or_zero(shape, q);
                sum = sum.add(&b.conj_transpose().mul(gram).mul(&b));
            }
            sum.scale(&k)
        })
        .collect();
    MetricData::from_grams(shape, grams)
}

/// Matrix of `g` restricted to the harmonic space of degree `q`, in the
/// harmonic basis (columns are images).
pub fn restrict_to_harmonic(h: &HodgeData, g: &GradedMap, q: i32) -> Result<Matrix> {
    let basis = h.harmonic_basis(q);
    let shape = h.shape();
    if basis.is_empty() {
        return Ok(Matrix::zeros(0, 0));
    }
    let b = Matrix::from_columns(shape.dim(q), basis);
    let gb = g.block_or_zero(shape, q).mul(&b);
    b.solve_matrix(&gb)?.ok_or_else(|| {
        Error::Consistency(format!("action does not preserve the harmonic space in degree {q}"))
    })
}

/// Induced action of one generator on `H¹` and `H²`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HarmonicRepresentation {
    pub rho1: Matrix,
    pub rho2: Matrix,
}

fn harmonic_pair(h: &HodgeData, g: &GradedMap) -> Result<HarmonicRepresentation> {
    Ok(HarmonicRepresentation { rho1: restrict_to_harmonic(h, g, 1)?, rho2: restrict_to_harmonic(h, g, 2)? })
}

pub fn induced_harmonic_action(
    l: &DgLa,
    h: &HodgeData,
    a: &GroupAction,
) -> Result<Vec<HarmonicRepresentation>> {
    a.check_shape(h.shape())?;
    a.generators()
        .iter()
        .map(|g| {
            let rep = harmonic_pair(h, g)?;
            let g_inv = inverse_map(l, g).ok_or_else(|| Error::input("generator is not invertible"))?;
            let inv = harmonic_pair(h, &g_inv)?;
            if !rep.rho1.mul(&inv.rho1).is_identity() || !rep.rho2.mul(&inv.rho2).is_identity() {
                return Err(Error::Consistency("induced harmonic action is not a representation".into()));
            }
            Ok(rep)
        })
        .collect()
}

pub fn induced_infinitesimal_action(
    h: &HodgeData,
    a: &InfinitesimalAction,
) -> Result<Vec<HarmonicRepresentation>> {
    a.check_shape(h.shape())?;
    a.derivations().iter().map(|x| harmonic_pair(h, x)).collect()
}

/// Outcome of the equivariance identities for one generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorEquivariance {
    pub generator: usize,
    pub rho1: Matrix,
    pub rho2: Matrix,
    /// `g·α(t) = α(ρ¹t)`, or its linearization for derivations.
    pub alpha: bool,
    /// `ob(ρ¹t) = ρ²·ob(t)`, or its linearization.
    pub obstruction: bool,
    /// Transformed ideal generators lie in the span of the generators.
    pub ideal_invariant: bool,
    /// `MC(g·α) = g·MC(α)`; always true for derivations, not evaluated.
    pub mc_commutes: bool,
    /// First monomial where an identity fails.
    pub witness: Option<String>,
}

impl GeneratorEquivariance {
    pub fn passed(&self) -> bool {
        self.alpha && self.obstruction && self.ideal_invariant && self.mc_commutes
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivarianceReport {
    pub kind: &'static str,
    /// Highest total degree compared.
    pub max_degree: u32,
    pub generators: Vec<GeneratorEquivariance>,
}

impl EquivarianceReport {
    pub fn passed(&self) -> bool {
        self.generators.iter().all(GeneratorEquivariance::passed)
    }
}

fn obstruction_operator(h: &HodgeData, rho2: &Matrix) -> Result<GradedMap> {
    let shape = obstruction_shape(h);
    GradedMap::from_blocks(&shape, 0, [(2, rho2.clone())].into())
}

fn first_witness(
    names: &[String],
    label: &str,
    lhs: &GradedSeries,
    rhs: &GradedSeries,
) -> Option<String> {
    lhs.first_difference(rhs).map(|m| format!("{label} differs at {}", m.format(names)))
}

fn check_family_shapes(h: &HodgeData, f: &KuranishiFamily) -> Result<()> {
    if f.alpha.shape() != h.shape() {
        return Err(Error::input("family and action live on different graded spaces"));
    }
    Ok(())
}

/// Whether every polynomial in `images` is a linear combination of `gens`.
fn in_span(gens: &[Polynomial], images: &[Polynomial]) -> bool {
    let mut monos: Vec<_> = gens.iter().chain(images).flat_map(|p| p.terms().keys().cloned()).collect();
    monos.sort();
    monos.dedup();
    let column = |p: &Polynomial| -> Vec<Scalar> {
        monos.iter().map(|m| p.terms().get(m).cloned().unwrap_or_default()).collect()
    };
    let nonzero: Vec<&Polynomial> = gens.iter().filter(|p| !p.is_zero()).collect();
    let a = Matrix::from_columns(monos.len(), &nonzero.iter().map(|p| column(p)).collect::<Vec<_>>());
    images.iter().filter(|p| !p.is_zero()).all(|p| {
        !nonzero.is_empty() && matches!(a.solve(&column(p)), Ok(Some(_)))
    })
}

fn obstruction_polys(ob: &GradedSeries) -> Vec<Polynomial> {
    (0..ob.shape().dim(2)).map(|j| ob.coordinate_polynomial(2, j)).collect()
}

/// Checks `g·α(t) = α(ρ¹t)`, `ob(ρ¹t) = ρ²·ob(t)`, invariance of the ideal
/// and `MC∘g = g∘MC` on `α`, for each generator.
pub fn check_family_equivariance(
    l: &DgLa,
    h: &HodgeData,
    f: &KuranishiFamily,
    a: &GroupAction,
) -> Result<EquivarianceReport> {
    check_family_shapes(h, f)?;
    let reps = induced_harmonic_action(l, h, a)?;
    let names = &f.parameters;
    let mc = mc_residual(l, &f.alpha)?;
    let gens = obstruction_polys(&f.obstruction);
    let mut out = Vec::new();
    for (i, (g, rep)) in a.generators().iter().zip(reps).enumerate() {
        let g_alpha = f.alpha.apply(g)?;
        let alpha_sub = f.alpha.substitute_linear(&rep.rho1)?;
        let ob_sub = f.obstruction.substitute_linear(&rep.rho1)?;
        let ob_rot = f.obstruction.apply(&obstruction_operator(h, &rep.rho2)?)?;
        let mc_g = mc_residual(l, &g_alpha)?;
        let g_mc = mc.apply(g)?;
        let witness = first_witness(names, "g.alpha vs alpha(rho1 t)", &g_alpha, &alpha_sub)
            .or_else(|| first_witness(names, "ob(rho1 t) vs rho2 ob", &ob_sub, &ob_rot))
            .or_else(|| first_witness(names, "MC(g.alpha) vs g.MC(alpha)", &mc_g, &g_mc));
        out.push(GeneratorEquivariance {
            generator: i,
            alpha: g_alpha == alpha_sub,
            obstruction: ob_sub == ob_rot,
            ideal_invariant: in_span(&gens, &obstruction_polys(&ob_sub)),
            mc_commutes: mc_g == g_mc,
            witness,
            rho1: rep.rho1,
            rho2: rep.rho2,
        });
    }
    Ok(EquivarianceReport { kind: "finite", max_degree: f.order, generators: out })
}

/// Checks `X·α = Σ_i (ρ¹(X)t)_i ∂α/∂t_i` and the analogous identity for `ob`.
pub fn check_infinitesimal_equivariance(
    h: &HodgeData,
    f: &KuranishiFamily,
    a: &InfinitesimalAction,
) -> Result<EquivarianceReport> {
    check_family_shapes(h, f)?;
    let reps = induced_infinitesimal_action(h, a)?;
    let names = &f.parameters;
    let gens = obstruction_polys(&f.obstruction);
    let mut out = Vec::new();
    for (i, (x, rep)) in a.derivations().iter().zip(reps).enumerate() {
        let x_alpha = f.alpha.apply(x)?;
        let flow_alpha = f.alpha.linear_vector_field_derivative(&rep.rho1)?;
        let flow_ob = f.obstruction.linear_vector_field_derivative(&rep.rho1)?;
        let x_ob = f.obstruction.apply(&obstruction_operator(h, &rep.rho2)?)?;
        let witness = first_witness(names, "X.alpha vs chain rule", &x_alpha, &flow_alpha)
            .or_else(|| first_witness(names, "X.ob vs chain rule", &x_ob, &flow_ob));
        out.push(GeneratorEquivariance {
            generator: i,
            alpha: x_alpha == flow_alpha,
            obstruction: x_ob == flow_ob,
            ideal_invariant: in_span(&gens, &obstruction_polys(&flow_ob)),
            mc_commutes: true,
            witness,
            rho1: rep.rho1,
            rho2: rep.rho2,
        });
    }
    Ok(EquivarianceReport { kind: "infinitesimal", max_degree: f.order, generators: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders;
    use crate::kuranishi::{solve_kuranishi, SolveOptions};

    fn diag(entries: &[i64]) -> Matrix {
        Matrix::diagonal(&entries.iter().map(|&e| Scalar::from_int(e)).collect::<Vec<_>>())
    }

    /// One-degree space of dimension 2 in degree 0, zero dgLa structure.
    fn plane() -> (DgLa, Shape) {
        let space = crate::dgla::GradedSpace::new(0, vec![vec!["a".into(), "b".into()]]).unwrap();
        let shape = space.shape().clone();
        let l = DgLa::new(space, GradedMap::zero(1), Default::default()).unwrap();
        (l, shape)
    }

    fn swap(shape: &Shape) -> GroupAction {
        let g = GradedMap::from_blocks(shape, 0, [(0, Matrix::from_ints(&[&[0, 1], &[1, 0]]))].into()).unwrap();
        GroupAction::new(vec![g], Some(vec![2]))
    }

    #[test]
    fn toy3_action_passes() {
        let (l, m, a) = builders::toy3();
        let r = validate_group_action(&l, &m, &a).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.checks.iter().all(|c| c.status == Status::Pass));
        let h = hodge_data(&l, &m).unwrap();
        let reps = induced_harmonic_action(&l, &h, &a).unwrap();
        assert_eq!(reps[0].rho1, diag(&[-1]));
        assert_eq!(reps[0].rho2, diag(&[-1]));
    }

    #[test]
    fn swap_with_unequal_gram_fails_invariance() {
        let (l, shape) = plane();
        let m = MetricData::from_grams(&shape, vec![diag(&[1, 2])]).unwrap();
        let r = validate_group_action(&l, &m, &swap(&shape)).unwrap();
        assert!(!r.passed());
        let c = r.get(COND_METRIC).unwrap();
        assert_eq!(c.status, Status::Fail);
        assert!(c.witness.is_some());
        assert_eq!(r.status(COND_GREEN), Status::Skipped);
    }

    #[test]
    fn averaging_swap() {
        let (l, shape) = plane();
        let m = MetricData::from_grams(&shape, vec![diag(&[1, 2])]).unwrap();
        let a = swap(&shape);
        let avg = average_metric(&shape, &m, &a, 16).unwrap();
        let half3 = Scalar::from_ratio(3, 2);
        assert_eq!(avg.gram(0), &Matrix::diagonal(&[half3.clone(), half3]));
        let full = GroupAction::new(group_closure(&shape, &a, 16).unwrap(), None);
        assert_eq!(validate_group_action(&l, &avg, &full).unwrap().status(COND_METRIC), Status::Pass);
        // Idempotent on an invariant metric.
        assert_eq!(average_metric(&shape, &avg, &a, 16).unwrap(), avg);
    }

    #[test]
    fn rotation_keeps_identity_gram() {
        let (_, shape) = plane();
        let rot = GradedMap::from_blocks(&shape, 0, [(0, Matrix::from_ints(&[&[0, -1], &[1, 0]]))].into()).unwrap();
        let a = GroupAction::new(vec![rot], Some(vec![4]));
        assert_eq!(group_closure(&shape, &a, 16).unwrap().len(), 4);
        let m = MetricData::identity(&shape);
        assert_eq!(average_metric(&shape, &m, &a, 16).unwrap(), m);
        assert!(matches!(average_metric(&shape, &m, &a, 3), Err(Error::Guard(_))));
    }

    #[test]
    fn toy3_family_equivariance() {
        let (l, m, a) = builders::toy3();
        let h = hodge_data(&l, &m).unwrap();
        let f = solve_kuranishi(&l, &h, SolveOptions::with_order(5)).unwrap();
        let r = check_family_equivariance(&l, &h, &f, &a).unwrap();
        assert!(r.passed(), "{r:?}");
        let id = GroupAction::identity(l.shape());
        assert!(check_family_equivariance(&l, &h, &f, &id).unwrap().passed());
    }

    #[test]
    fn conjugation_on_torus() {
        let (l, m) = builders::torus_constants(2, 2).unwrap();
        let (a, info) = builders::conjugation_action(&l, &diag(&[1, -1])).unwrap();
        assert!(info.unitary_up_to_scale);
        assert!(validate_group_action(&l, &m, &a).unwrap().passed());
        let h = hodge_data(&l, &m).unwrap();
        let reps = induced_harmonic_action(&l, &h, &a).unwrap();
        assert_eq!(reps[0].rho1, diag(&[1, 1, -1, -1, 1, 1, -1, -1]));
        let f = solve_kuranishi(&l, &h, SolveOptions::with_order(3)).unwrap();
        assert!(check_family_equivariance(&l, &h, &f, &a).unwrap().passed());
    }

    #[test]
    fn broken_generator_is_caught() {
        let (l, m, _) = builders::toy3();
        // x ↦ 2x breaks [x,x] = u unless u ↦ 4u.
        let g = GradedMap::from_blocks(
            l.shape(),
            0,
            [(1, diag(&[2, 1])), (2, diag(&[1, 1]))].into(),
        )
        .unwrap();
        let r = validate_group_action(&l, &m, &GroupAction::new(vec![g], None)).unwrap();
        assert_eq!(r.status(COND_BRACKET), Status::Fail);
        assert_eq!(r.status(COND_ORDERS), Status::Skipped);
    }

    #[test]
    fn inner_derivation_chain_rule() {
        let (l, m) = builders::torus_constants(2, 2).unwrap();
        let h0 = Matrix::diagonal(&[Scalar::one(), Scalar::from_int(-1)]);
        let x = builders::inner_derivation(&l, &h0).unwrap();
        let r = validate_infinitesimal_action(&l, &m, &x).unwrap();
        assert!(r.passed(), "{r:?}");
        let h = hodge_data(&l, &m).unwrap();
        let f = solve_kuranishi(&l, &h, SolveOptions::with_order(3)).unwrap();
        assert!(check_infinitesimal_equivariance(&h, &f, &x).unwrap().passed());
        let zero = InfinitesimalAction::new(vec![GradedMap::zero(0)]);
        assert!(check_infinitesimal_equivariance(&h, &f, &zero).unwrap().passed());
    }

    #[test]
    fn degree_weight_is_euler_field_on_linear_family() {
        let (l, m) = builders::torus_constants(2, 1).unwrap();
        let x = builders::degree_weight_derivation(&l);
        assert!(validate_infinitesimal_action(&l, &m, &x).unwrap().passed());
        let h = hodge_data(&l, &m).unwrap();
        let f = solve_kuranishi(&l, &h, SolveOptions::with_order(3)).unwrap();
        let reps = induced_infinitesimal_action(&h, &x).unwrap();
        assert!(reps[0].rho1.is_identity());
        assert!(check_infinitesimal_equivariance(&h, &f, &x).unwrap().passed());
    }
}
