//! Order-by-order Maurer–Cartan solutions in harmonic gauge, the obstruction
//! map, the Kuranishi map, the slice diagnostics and the gauge action.
//!
//! With `α_1 = Σ t_i h_i` (harmonic degree-1 basis) the family is
//!
//! ```text
//! α_k = −½ d*G Σ_{i+j=k} [α_i, α_j]        (2 ≤ k ≤ N)
//! ob  = ½ P[α, α]                          (in harmonic degree-2 coordinates)
//! ```
//!
//! so that `K(α) = α + ½ d*G[α, α] = α_1` and `dα + ½[α, α] = ob` modulo the
//! `d*G`-exact correction checked by [`verify_family`].

use serde::Serialize;

use crate::dgla::{DgLa, GradedElement, Shape};
use crate::error::{Error, Result};
use crate::hodge::HodgeData;
use crate::scalar::Scalar;
use crate::series::{default_parameter_names, GradedSeries, Polynomial};

/// Above this many parameters a warning is logged.
pub const WARN_PARAMS: usize = 16;
/// Default refusal threshold for the number of parameters.
pub const DEFAULT_MAX_PARAMS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub order: u32,
    pub max_params: usize,
    /// Ignore `max_params`.
    pub force: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { order: 4, max_params: DEFAULT_MAX_PARAMS, force: false }
    }
}

impl SolveOptions {
    pub fn with_order(order: u32) -> Self {
        SolveOptions { order, ..Default::default() }
    }
}

/// A nonzero obstruction coordinate polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealGenerator {
    /// Index of the harmonic degree-2 basis vector.
    pub coordinate: usize,
    pub polynomial: Polynomial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KuranishiFamily {
    pub parameters: Vec<String>,
    pub order: u32,
    /// Degree-1 solution `α(t)`.
    pub alpha: GradedSeries,
    /// `½P[α,α]` in harmonic degree-2 coordinates (a series over a one-degree
    /// space of dimension `dim H²`, placed in degree 2).
    pub obstruction: GradedSeries,
    pub ideal_generators: Vec<IdealGenerator>,
    pub notice: Option<String>,
}

impl KuranishiFamily {
    pub fn obstruction_dim(&self) -> usize {
        self.obstruction.shape().dim(2)
    }

    /// Obstruction coordinate `j` as a scalar polynomial.
    pub fn obstruction_polynomial(&self, j: usize) -> Polynomial {
        self.obstruction.coordinate_polynomial(2, j)
    }

    /// Homogeneous pieces of each obstruction coordinate, keyed by order.
    pub fn obstruction_by_order(&self) -> Vec<(u32, Vec<Polynomial>)> {
        (1..=self.order)
            .map(|k| {
                let pieces = (0..self.obstruction_dim())
                    .map(|j| self.obstruction_polynomial(j).homogeneous_part(k))
                    .collect();
                (k, pieces)
            })
            .collect()
    }

    /// The linear part `α_1`.
    pub fn linear_part(&self) -> GradedSeries {
        self.alpha.homogeneous_part(1)
    }
}

/// Shape of the harmonic degree-2 coordinate space.
pub fn obstruction_shape(h: &HodgeData) -> Shape {
    Shape::new(2, vec![h.harmonic_basis(2).len()])
}

fn require_degree(s: &GradedSeries, q: i32, what: &str) -> Result<()> {
    if s.is_homogeneous_of_degree(q) {
        Ok(())
    } else {
        Err(Error::input(format!("{what} must have degree-{q} coefficients only")))
    }
}

fn require_shape(l: &DgLa, s: &GradedSeries) -> Result<()> {
    if s.shape() != l.shape() {
        return Err(Error::input("series does not live in the dgLa's graded space"));
    }
    Ok(())
}

pub fn solve_kuranishi(l: &DgLa, h: &HodgeData, opts: SolveOptions) -> Result<KuranishiFamily> {
    if opts.order < 1 {
        return Err(Error::input("order must be at least 1"));
    }
    if h.shape() != l.shape() {
        return Err(Error::input("Hodge data was built for a different dgLa"));
    }
    let h1 = h.harmonic_elements(1);
    let m = h1.len();
    if m > WARN_PARAMS {
        log::warn!("{m} deformation parameters; monomial counts grow quickly");
    }
    if m > opts.max_params && !opts.force {
        return Err(Error::Guard(format!(
            "{m} parameters exceed the limit of {} (use force to override)",
            opts.max_params
        )));
    }
    let parameters = default_parameter_names(m);
    let shape = l.shape().clone();
    let alpha1 = GradedSeries::linear(parameters.clone(), opts.order, shape.clone(), &h1)?;
    let notice = (m == 0).then(|| "H^1 = 0: the deformation problem is rigid".to_string());

    let dg = h.adjoint_green();
    let minus_half = Scalar::from_ratio(-1, 2);
    let mut parts: Vec<GradedSeries> = vec![alpha1.zero_like(), alpha1.clone()];
    for k in 2..=opts.order as usize {
        let mut sum = alpha1.zero_like();
        for i in 1..k {
            sum = sum.add(&parts[i].bracket(l, &parts[k - i])?)?;
        }
        parts.push(sum.apply(&dg)?.scale(&minus_half));
    }
    let mut alpha = alpha1.zero_like();
    for p in &parts[1..] {
        alpha = alpha.add(p)?;
    }

    let obstruction = obstruction_coordinates(l, h, &alpha)?;
    let ideal_generators = (0..obstruction.shape().dim(2))
        .map(|j| IdealGenerator { coordinate: j, polynomial: obstruction.coordinate_polynomial(2, j) })
        .filter(|g| !g.polynomial.is_zero())
        .collect();
    Ok(KuranishiFamily { parameters, order: opts.order, alpha, obstruction, ideal_generators, notice })
}

/// Harmonic degree-2 coordinates of `½P[α,α]`.
pub fn obstruction_coordinates(l: &DgLa, h: &HodgeData, alpha: &GradedSeries) -> Result<GradedSeries> {
    let half = Scalar::from_ratio(1, 2);
    let sq = alpha.bracket(l, alpha)?.scale(&half);
    let oshape = obstruction_shape(h);
    let mut ob = GradedSeries::zero(alpha.parameters().to_vec(), alpha.order(), oshape.clone())?;
    for (mono, c) in sq.terms() {
        let coords = h.harmonic_coordinates(2, c.component(2));
        if coords.iter().all(Scalar::is_zero) {
            continue;
        }
        ob.insert(mono.clone(), GradedElement::homogeneous(&oshape, 2, coords)?)?;
    }
    Ok(ob)
}

/// `Σ_j ob_j(t) h_j`, the obstruction pushed back into `g²`.
pub fn obstruction_injection(h: &HodgeData, f: &KuranishiFamily) -> Result<GradedSeries> {
    let mut out = f.alpha.zero_like();
    for (mono, c) in f.obstruction.terms() {
        let v = h.harmonic_vector(2, c.component(2));
        out.insert(mono.clone(), GradedElement::homogeneous(h.shape(), 2, v)?)?;
    }
    Ok(out)
}

/// `K(β) = β + ½ d*G[β, β]`.
pub fn kuranishi_map(l: &DgLa, h: &HodgeData, beta: &GradedSeries) -> Result<GradedSeries> {
    require_shape(l, beta)?;
    require_degree(beta, 1, "argument of the Kuranishi map")?;
    let corr = beta.bracket(l, beta)?.apply(&h.adjoint_green())?;
    beta.add_scaled(&Scalar::from_ratio(1, 2), &corr)
}

/// `ds + ½[s, s]`.
pub fn mc_residual(l: &DgLa, s: &GradedSeries) -> Result<GradedSeries> {
    require_shape(l, s)?;
    require_degree(s, 1, "Maurer-Cartan argument")?;
    s.apply(l.differential())?
        .add_scaled(&Scalar::from_ratio(1, 2), &s.bracket(l, s)?)
}

/// `□s + ½ d*[s, s]`.
pub fn elliptic_residual(l: &DgLa, h: &HodgeData, s: &GradedSeries) -> Result<GradedSeries> {
    require_shape(l, s)?;
    require_degree(s, 1, "argument of the elliptic equation")?;
    let quad = s.bracket(l, s)?.apply(h.adjoint())?;
    s.apply(h.laplacian())?.add_scaled(&Scalar::from_ratio(1, 2), &quad)
}

/// Components of the slice map `(P s, d* s, d* MC(s))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceResidual {
    pub harmonic: GradedSeries,
    pub coclosed: GradedSeries,
    pub mc_coclosed: GradedSeries,
}

impl SliceResidual {
    /// True when the last two components vanish, i.e. `s` lies in the slice.
    pub fn in_slice(&self) -> bool {
        self.coclosed.is_zero() && self.mc_coclosed.is_zero()
    }
}

pub fn slice_residual(l: &DgLa, h: &HodgeData, s: &GradedSeries) -> Result<SliceResidual> {
    let mc = mc_residual(l, s)?;
    Ok(SliceResidual {
        harmonic: s.apply(h.projector())?,
        coclosed: s.apply(h.adjoint())?,
        mc_coclosed: mc.apply(h.adjoint())?,
    })
}

/// `exp(ξ)·s = s + Σ_{n≥0} ad_ξⁿ(ad_ξ(s) − dξ) / (n+1)!`.
///
/// The sum is finite because `ξ` has no constant term.
pub fn gauge_transform(l: &DgLa, xi: &GradedSeries, s: &GradedSeries) -> Result<GradedSeries> {
    require_shape(l, xi)?;
    require_shape(l, s)?;
    require_degree(xi, 0, "gauge parameter")?;
    require_degree(s, 1, "gauged series")?;
    let mut term = xi.bracket(l, s)?.sub(&xi.apply(l.differential())?)?;
    let mut out = s.clone();
    let mut factorial = Scalar::one();
    let mut n = 0i64;
    while !term.is_zero() {
        factorial = &factorial * &Scalar::from_int(n + 1);
        out = out.add_scaled(&factorial.inv().expect("nonzero factorial"), &term)?;
        term = xi.bracket(l, &term)?;
        n += 1;
    }
    Ok(out)
}

/// Exact pass/fail for the identities every solved family must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FamilyDiagnostics {
    /// `P(α) = α_1`
    pub harmonic_part_is_linear: bool,
    /// `d*α = 0`
    pub coclosed: bool,
    /// `K(α) = α_1`
    pub kuranishi_condition: bool,
    /// `□α + ½d*[α,α] = 0`
    pub elliptic_equation: bool,
    /// `MC(α) = ob + d*G[MC(α), α]`
    pub fixed_point_identity: bool,
}

impl FamilyDiagnostics {
    pub fn all(&self) -> bool {
        self.harmonic_part_is_linear
            && self.coclosed
            && self.kuranishi_condition
            && self.elliptic_equation
            && self.fixed_point_identity
    }
}

pub fn verify_family(l: &DgLa, h: &HodgeData, f: &KuranishiFamily) -> Result<FamilyDiagnostics> {
    let alpha = &f.alpha;
    let linear = f.linear_part();
    let mc = mc_residual(l, alpha)?;
    let fixed_rhs = obstruction_injection(h, f)?
        .add(&mc.bracket(l, alpha)?.apply(&h.adjoint_green())?)?;
    Ok(FamilyDiagnostics {
        harmonic_part_is_linear: alpha.apply(h.projector())? == linear,
        coclosed: alpha.apply(h.adjoint())?.is_zero(),
        kuranishi_condition: kuranishi_map(l, h, alpha)? == linear,
        elliptic_equation: elliptic_residual(l, h, alpha)?.is_zero(),
        fixed_point_identity: mc == fixed_rhs,
    })
}
