//! Metric adjoint, Laplacian, harmonic projection and Green operator.
//!
//! Everything is computed degree by degree with exact elimination. The
//! harmonic basis is the canonical echelon basis of `ker □`; it is not
//! orthonormalized, so the projector goes through the inverse Gram matrix of
//! that basis instead.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::dgla::{DgLa, GradedElement, GradedMap, Shape};
use crate::error::{Error, Result};
use crate::linalg::{positive_definite_hermitian, Matrix};
use crate::scalar::Scalar;

/// One Hermitian positive definite Gram matrix per degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricData {
    min_degree: i32,
    grams: Vec<Matrix>,
}

impl MetricData {
    pub fn identity(shape: &Shape) -> Self {
        MetricData {
            min_degree: shape.min_degree,
            grams: shape.dims.iter().map(|&d| Matrix::identity(d)).collect(),
        }
    }

    /// Wraps per-degree Gram matrices after checking their sizes.
    /// Positivity is checked separately by [`MetricData::validate`].
    pub fn from_grams(shape: &Shape, grams: Vec<Matrix>) -> Result<Self> {
        if grams.len() != shape.dims.len() {
            return Err(Error::at(
                "metric",
                format!("expected {} Gram matrices, found {}", shape.dims.len(), grams.len()),
            ));
        }
        for (off, (g, &d)) in grams.iter().zip(&shape.dims).enumerate() {
            if g.shape() != (d, d) {
                return Err(Error::at(
                    format!("metric[{off}]"),
                    format!("Gram matrix is {}x{}, expected {d}x{d}", g.rows(), g.cols()),
                ));
            }
        }
        Ok(MetricData { min_degree: shape.min_degree, grams })
    }

    pub fn gram(&self, q: i32) -> &Matrix {
        &self.grams[(q - self.min_degree) as usize]
    }

    pub fn grams(&self) -> &[Matrix] {
        &self.grams
    }

    pub fn is_identity(&self) -> bool {
        self.grams.iter().all(Matrix::is_identity)
    }

    pub fn conforms(&self, shape: &Shape) -> bool {
        self.min_degree == shape.min_degree
            && self.grams.len() == shape.dims.len()
            && self.grams.iter().zip(&shape.dims).all(|(g, &d)| g.shape() == (d, d))
    }

    /// Fails with a metric error naming the first inadmissible degree.
    pub fn validate(&self) -> Result<()> {
        for (off, g) in self.grams.iter().enumerate() {
            let q = self.min_degree + off as i32;
            let rep = positive_definite_hermitian(g)?;
            if !rep.hermitian {
                let (r, c) = rep.asymmetric_entry.unwrap_or_default();
                return Err(Error::Metric(format!(
                    "Gram matrix in degree {q} is not Hermitian (entry ({r}, {c}))"
                )));
            }
            if !rep.minors_positive {
                return Err(Error::Metric(format!(
                    "Gram matrix in degree {q} is not positive definite (leading minor {} is {})",
                    rep.leading_minors.len(),
                    rep.leading_minors.last().cloned().unwrap_or_default()
                )));
            }
        }
        Ok(())
    }

    /// `⟨a, b⟩ = a^† Γ b`, summed over degrees.
    pub fn pairing(&self, a: &GradedElement, b: &GradedElement) -> Scalar {
        let mut total = Scalar::zero();
        for (off, g) in self.grams.iter().enumerate() {
            let q = self.min_degree + off as i32;
            let gb = g.mul_vec(b.component(q));
            for (x, y) in a.component(q).iter().zip(&gb) {
                if !x.is_zero() && !y.is_zero() {
                    total += x.conj() * y;
                }
            }
        }
        total
    }
}

/// A random admissible metric `Γ = L·D·L^†` with `L` unit lower triangular.
///
/// `L` is nonzero only inside diagonal blocks of size `block`, so large
/// degrees stay block-sparse.
pub fn random_metric<R: Rng>(shape: &Shape, rng: &mut R, block: usize) -> MetricData {
    let block = block.max(1);
    let grams = shape
        .dims
        .iter()
        .map(|&n| {
            let mut lower = Matrix::identity(n);
            for r in 0..n {
                for c in 0..r {
                    if r / block == c / block {
                        lower[(r, c)] = Scalar::gaussian(rng.gen_range(-2..=2), rng.gen_range(-2..=2));
                    }
                }
            }
            let diag: Vec<Scalar> = (0..n).map(|_| Scalar::from_int(rng.gen_range(1..=4))).collect();
            lower.mul(&Matrix::diagonal(&diag)).mul(&lower.conj_transpose())
        })
        .collect();
    MetricData { min_degree: shape.min_degree, grams }
}

/// The metric-dependent operators of a dgLa.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HodgeData {
    shape: Shape,
    metric: MetricData,
    adjoint: GradedMap,
    laplacian: GradedMap,
    harmonic_basis: BTreeMap<i32, Vec<Vec<Scalar>>>,
    harmonic_gram_inverse: BTreeMap<i32, Matrix>,
    projector: GradedMap,
    green: GradedMap,
}

/// `d*` with `Γ_{q-1} · d*_q = d_{q-1}^† · Γ_q`.
pub fn adjoint_differential(l: &DgLa, m: &MetricData) -> Result<GradedMap> {
    let shape = l.shape();
    if !m.conforms(shape) {
        return Err(Error::input("metric does not match the graded space"));
    }
    m.validate()?;
    let mut adj = GradedMap::zero(-1);
    for q in shape.degrees() {
        if !shape.contains(q - 1) {
            continue;
        }
        let d_prev = l.differential().block_or_zero(shape, q - 1);
        let g_prev_inv = m
            .gram(q - 1)
            .inverse()
            .ok_or_else(|| Error::Metric(format!("Gram matrix in degree {} is singular", q - 1)))?;
        adj.set_block(q, g_prev_inv.mul(&d_prev.conj_transpose()).mul(m.gram(q)));
    }
    Ok(adj)
}

pub fn hodge_data(l: &DgLa, m: &MetricData) -> Result<HodgeData> {
    let shape = l.shape().clone();
    let d = l.differential();
    let adjoint = adjoint_differential(l, m)?;
    let laplacian = adjoint.compose(d).add(&d.compose(&adjoint), &shape);

    let mut harmonic_basis = BTreeMap::new();
    let mut harmonic_gram_inverse = BTreeMap::new();
    let mut projector = GradedMap::zero(0);
    let mut green = GradedMap::zero(0);
    for q in shape.degrees() {
        let n = shape.dim(q);
        let lap = laplacian.block_or_zero(&shape, q);
        let basis = lap.kernel_basis();
        let gram = m.gram(q);
        let b = Matrix::from_columns(n, &basis);
        let hg = b.conj_transpose().mul(gram).mul(&b);
        let hg_inv = hg
            .inverse()
            .ok_or_else(|| Error::Consistency(format!("harmonic Gram matrix singular in degree {q}")))?;
        let p = b.mul(&hg_inv).mul(&b.conj_transpose()).mul(gram);
        let complement = Matrix::identity(n).sub(&p);
        let particular = lap.solve_matrix(&complement)?.ok_or_else(|| {
            Error::Consistency(format!("Id - P is not in the image of the Laplacian in degree {q}"))
        })?;
        let g = complement.mul(&particular);
        harmonic_basis.insert(q, basis);
        harmonic_gram_inverse.insert(q, hg_inv);
        projector.set_block(q, p);
        green.set_block(q, g);
    }
    Ok(HodgeData {
        shape,
        metric: m.clone(),
        adjoint,
        laplacian,
        harmonic_basis,
        harmonic_gram_inverse,
        projector,
        green,
    })
}

/// `dim ker d_q − rank d_{q−1}`, metric-free.
pub fn betti_numbers(l: &DgLa) -> BTreeMap<i32, usize> {
    let shape = l.shape();
    let d = l.differential();
    let rank = |q: i32| -> usize {
        if shape.contains(q) && shape.contains(q + 1) {
            d.block_or_zero(shape, q).rank()
        } else {
            0
        }
    };
    shape.degrees().map(|q| (q, shape.dim(q) - rank(q) - rank(q - 1))).collect()
}

impl HodgeData {
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn metric(&self) -> &MetricData {
        &self.metric
    }

    pub fn adjoint(&self) -> &GradedMap {
        &self.adjoint
    }

    pub fn laplacian(&self) -> &GradedMap {
        &self.laplacian
    }

    pub fn projector(&self) -> &GradedMap {
        &self.projector
    }

    pub fn green(&self) -> &GradedMap {
        &self.green
    }

    /// `d* ∘ G`, the operator that drives the Kuranishi recursion.
    pub fn adjoint_green(&self) -> GradedMap {
        self.adjoint.compose(&self.green)
    }

    pub fn harmonic_basis(&self, q: i32) -> &[Vec<Scalar>] {
        self.harmonic_basis.get(&q).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn harmonic_elements(&self, q: i32) -> Vec<GradedElement> {
        self.harmonic_basis(q)
            .iter()
            .map(|v| GradedElement::homogeneous(&self.shape, q, v.clone()).expect("harmonic shape"))
            .collect()
    }

    pub fn harmonic_dims(&self) -> BTreeMap<i32, usize> {
        self.shape.degrees().map(|q| (q, self.harmonic_basis(q).len())).collect()
    }

    /// Coordinates of `P v` in the harmonic basis of degree `q`, computed from
    /// the Gram pairings `⟨h_j, v⟩`.
    pub fn harmonic_coordinates(&self, q: i32, v: &[Scalar]) -> Vec<Scalar> {
        let basis = self.harmonic_basis(q);
        if basis.is_empty() {
            return Vec::new();
        }
        let gv = self.metric.gram(q).mul_vec(v);
        let pairings: Vec<Scalar> = basis
            .iter()
            .map(|h| h.iter().zip(&gv).filter(|(a, _)| !a.is_zero()).map(|(a, b)| a.conj() * b).sum())
            .collect();
        self.harmonic_gram_inverse[&q].mul_vec(&pairings)
    }

    /// `Σ c_j h_j` in degree `q`.
    pub fn harmonic_vector(&self, q: i32, coords: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); self.shape.dim(q)];
        for (c, h) in coords.iter().zip(self.harmonic_basis(q)) {
            if c.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(h) {
                if !x.is_zero() {
                    *o += c * x;
                }
            }
        }
        out
    }

    /// Re-verifies every identity the construction promises.
    pub fn verify(&self, l: &DgLa) -> HodgeChecks {
        let shape = &self.shape;
        let d = l.differential();
        let id = GradedMap::identity(shape);
        let p = &self.projector;
        let g = &self.green;
        let lap = &self.laplacian;

        let adjoint_exact = shape.degrees().all(|q| {
            if !shape.contains(q - 1) {
                return true;
            }
            let lhs = self.metric.gram(q - 1).mul(&self.adjoint.block_or_zero(shape, q));
            let rhs = d.block_or_zero(shape, q - 1).conj_transpose().mul(self.metric.gram(q));
            lhs == rhs
        });
        let laplacian_consistent = lap.same_map(
            &self.adjoint.compose(d).add(&d.compose(&self.adjoint), shape),
            shape,
        );
        let complement = id.sub(p, shape);
        let splitting_exact = id.same_map(&p.add(&lap.compose(g), shape), shape);
        let green_inverts_laplacian =
            lap.compose(g).same_map(&complement, shape) && g.compose(lap).same_map(&complement, shape);
        let zero0 = GradedMap::zero(0);
        let green_projector_orthogonal =
            g.compose(p).same_map(&zero0, shape) && p.compose(g).same_map(&zero0, shape);
        let green_commutes_d = g.compose(d).same_map(&d.compose(g), shape);
        let green_commutes_adjoint =
            g.compose(&self.adjoint).same_map(&self.adjoint.compose(g), shape);
        let projector_idempotent = p.compose(p).same_map(p, shape);
        let projector_self_adjoint = shape.degrees().all(|q| {
            let gp = self.metric.gram(q).mul(&p.block_or_zero(shape, q));
            gp == gp.conj_transpose()
        });
        let projector_kills_exact = p.compose(d).is_zero();
        let adjoint_kills_harmonic = self.adjoint.compose(p).is_zero();
        let harmonic_is_closed = shape.degrees().all(|q| {
            self.harmonic_elements(q)
                .iter()
                .all(|h| d.apply(h).is_zero() && self.adjoint.apply(h).is_zero())
        });
        HodgeChecks {
            adjoint_exact,
            laplacian_consistent,
            splitting_exact,
            green_inverts_laplacian,
            green_projector_orthogonal,
            green_commutes_d,
            green_commutes_adjoint,
            projector_idempotent,
            projector_self_adjoint,
            projector_kills_exact,
            adjoint_kills_harmonic,
            harmonic_is_closed,
        }
    }
}

/// Exact pass/fail for each Hodge identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HodgeChecks {
    pub adjoint_exact: bool,
    pub laplacian_consistent: bool,
    pub splitting_exact: bool,
    pub green_inverts_laplacian: bool,
    pub green_projector_orthogonal: bool,
    pub green_commutes_d: bool,
    pub green_commutes_adjoint: bool,
    pub projector_idempotent: bool,
    pub projector_self_adjoint: bool,
    pub projector_kills_exact: bool,
    pub adjoint_kills_harmonic: bool,
    pub harmonic_is_closed: bool,
}

impl HodgeChecks {
    pub fn all(&self) -> bool {
        self.adjoint_exact
            && self.laplacian_consistent
            && self.splitting_exact
            && self.green_inverts_laplacian
            && self.green_projector_orthogonal
            && self.green_commutes_d
            && self.green_commutes_adjoint
            && self.projector_idempotent
            && self.projector_self_adjoint
            && self.projector_kills_exact
            && self.adjoint_kills_harmonic
            && self.harmonic_is_closed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn toy3_adjoint_and_operators() {
        let (l, m, _) = builders::toy3();
        let adj = adjoint_differential(&l, &m).unwrap();
        // d* on degree 2 is the transpose of [[0,1],[0,0]]: u -> y, v -> 0
        assert_eq!(adj.block(2).unwrap(), &Matrix::from_ints(&[&[0, 0], &[1, 0]]));

        let h = hodge_data(&l, &m).unwrap();
        assert_eq!(h.laplacian().block(1).unwrap(), &Matrix::from_ints(&[&[0, 0], &[0, 1]]));
        assert_eq!(h.harmonic_basis(1), &[vec![s(1), s(0)]]);
        assert_eq!(h.harmonic_basis(2), &[vec![s(0), s(1)]]);
        assert_eq!(h.projector().block(1).unwrap(), &Matrix::from_ints(&[&[1, 0], &[0, 0]]));
        assert_eq!(h.green().block(1).unwrap(), &Matrix::from_ints(&[&[0, 0], &[0, 1]]));
        assert!(h.verify(&l).all());
        assert_eq!(betti_numbers(&l), BTreeMap::from([(1, 1), (2, 1)]));
    }

    #[test]
    fn rescaled_gram_rescales_adjoint() {
        let (l, _, _) = builders::toy3();
        let grams = vec![Matrix::identity(2), Matrix::identity(2).scale(&s(2))];
        let m = MetricData::from_grams(l.shape(), grams).unwrap();
        let adj = adjoint_differential(&l, &m).unwrap();
        assert_eq!(adj.block(2).unwrap(), &Matrix::from_ints(&[&[0, 0], &[2, 0]]));
    }

    #[test]
    fn zero_differential_gives_trivial_hodge() {
        let (l, m) = builders::torus_constants(2, 2).unwrap();
        let h = hodge_data(&l, &m).unwrap();
        assert!(h.adjoint().is_zero());
        for q in 0..=2 {
            assert!(h.laplacian().block(q).unwrap().is_zero());
            assert!(h.projector().block(q).unwrap().is_identity());
            assert!(h.green().block(q).unwrap().is_zero());
        }
        assert_eq!(betti_numbers(&l), BTreeMap::from([(0, 4), (1, 8), (2, 4)]));
    }

    #[test]
    fn twisted_cutoff_one_keeps_zero_mode() {
        let (l, m) = builders::twisted_dolbeault(1, &Scalar::zero()).unwrap();
        let h = hodge_data(&l, &m).unwrap();
        assert_eq!(h.harmonic_dims(), BTreeMap::from([(0, 1), (1, 1)]));
        assert!(h.verify(&l).all());
        // the (0,0) mode is the middle of the 3x3 grid
        assert_eq!(h.harmonic_basis(0)[0][4], s(1));
    }

    #[test]
    fn twisted_half_offset_has_no_cohomology() {
        let (l, _) = builders::twisted_dolbeault(2, &Scalar::from_ratio(1, 2)).unwrap();
        assert_eq!(betti_numbers(&l), BTreeMap::from([(0, 0), (1, 0)]));
    }

    #[test]
    fn non_positive_metric_rejected() {
        let (l, _, _) = builders::toy3();
        let grams = vec![Matrix::from_ints(&[&[1, 0], &[0, -1]]), Matrix::identity(2)];
        let m = MetricData::from_grams(l.shape(), grams).unwrap();
        assert!(matches!(hodge_data(&l, &m), Err(Error::Metric(_))));
    }

    #[test]
    fn random_metrics_preserve_cohomology() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (l, _) = builders::twisted_dolbeault(1, &Scalar::zero()).unwrap();
        let betti = betti_numbers(&l);
        for _ in 0..3 {
            let m = random_metric(l.shape(), &mut rng, 4);
            m.validate().unwrap();
            let h = hodge_data(&l, &m).unwrap();
            assert!(h.verify(&l).all());
            assert_eq!(h.harmonic_dims(), betti);
        }
    }
}
