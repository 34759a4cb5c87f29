//! Truncated multivariate polynomials in commuting parameters `t_1..t_m`,
//! with either scalar coefficients ([`Polynomial`]) or graded-element
//! coefficients ([`GradedSeries`]). Everything lives in the maximal ideal:
//! there is no constant term, and terms of total degree above the order `N`
//! are discarded.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::dgla::{DgLa, GradedElement, GradedMap, Shape};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// An exponent vector, ordered by total degree and then lexicographically
/// with higher powers of earlier parameters first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn unit(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn evaluate(&self, point: &[Scalar]) -> Scalar {
        self.0
            .iter()
            .zip(point)
            .filter(|(&e, _)| e > 0)
            .fold(Scalar::one(), |acc, (&e, x)| &acc * &x.pow(e))
    }

    pub fn format(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .zip(names)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, n)| if e == 1 { n.clone() } else { format!("{n}^{e}") })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Conventional parameter names: `t` for one parameter, `t1..tm` otherwise.
pub fn default_parameter_names(m: usize) -> Vec<String> {
    if m == 1 {
        vec!["t".into()]
    } else {
        (1..=m).map(|i| format!("t{i}")).collect()
    }
}

/// A scalar polynomial truncated at total degree `order`. Unlike series, a
/// constant term is allowed so that products of linear forms can be built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    order: u32,
    terms: BTreeMap<Monomial, Scalar>,
}

impl Polynomial {
    pub fn zero(nvars: usize, order: u32) -> Self {
        Polynomial { nvars, order, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, order: u32, c: Scalar) -> Self {
        let mut p = Polynomial::zero(nvars, order);
        p.add_term(Monomial(vec![0; nvars]), c);
        p
    }

    /// `Σ_j coeffs[j] · t_j`.
    pub fn linear_form(order: u32, coeffs: &[Scalar]) -> Self {
        let n = coeffs.len();
        let mut p = Polynomial::zero(n, order);
        for (j, c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::unit(n, j), c.clone());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c·m`, dropping it if the degree exceeds the order.
    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() || m.total_degree() > self.order {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &Scalar) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars, self.order);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars, self.order);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if m1.total_degree() + m2.total_degree() <= self.order {
                    out.add_term(m1.mul(m2), c1 * c2);
                }
            }
        }
        out
    }

    pub fn homogeneous_part(&self, k: u32) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            order: self.order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.total_degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn evaluate(&self, point: &[Scalar]) -> Scalar {
        self.terms.iter().map(|(m, c)| c * &m.evaluate(point)).sum()
    }

    /// `p(R·t)`.
    pub fn substitute_linear(&self, r: &Matrix) -> Result<Polynomial> {
        let forms = substitution_forms(r, self.nvars, self.order)?;
        let mut out = Polynomial::zero(self.nvars, self.order);
        let mut cache = PowerCache::new(&forms);
        for (m, c) in &self.terms {
            let img = cache.monomial(m);
            for (mm, k) in &img.terms {
                out.add_term(mm.clone(), c * k);
            }
        }
        Ok(out)
    }

    pub fn format(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(m, c)| {
                if m.total_degree() == 0 {
                    c.to_string()
                } else if c.is_one() {
                    m.format(names)
                } else {
                    format!("{c}*{}", m.format(names))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn substitution_forms(r: &Matrix, nvars: usize, order: u32) -> Result<Vec<Polynomial>> {
    if r.shape() != (nvars, nvars) {
        return Err(Error::input(format!(
            "substitution matrix is {}x{}, expected {nvars}x{nvars}",
            r.rows(),
            r.cols()
        )));
    }
    Ok((0..nvars).map(|i| Polynomial::linear_form(order, r.row(i))).collect())
}

/// Memoized powers of the substituted linear forms.
struct PowerCache<'a> {
    forms: &'a [Polynomial],
    powers: BTreeMap<(usize, u32), Polynomial>,
}

impl<'a> PowerCache<'a> {
    fn new(forms: &'a [Polynomial]) -> Self {
        PowerCache { forms, powers: BTreeMap::new() }
    }

    fn power(&mut self, i: usize, e: u32) -> Polynomial {
        if let Some(p) = self.powers.get(&(i, e)) {
            return p.clone();
        }
        let f = &self.forms[i];
        let p = if e == 0 {
            Polynomial::constant(f.nvars, f.order, Scalar::one())
        } else {
            self.power(i, e - 1).mul(f)
        };
        self.powers.insert((i, e), p.clone());
        p
    }

    fn monomial(&mut self, m: &Monomial) -> Polynomial {
        let f = &self.forms[0];
        let mut acc = Polynomial::constant(f.nvars, f.order, Scalar::one());
        for (i, &e) in m.exponents().iter().enumerate() {
            if e > 0 {
                acc = acc.mul(&self.power(i, e));
            }
        }
        acc
    }
}

/// `Σ_e t^e ⊗ c_e` with graded-element coefficients, `1 ≤ |e| ≤ N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSeries {
    parameters: Vec<String>,
    order: u32,
    shape: Shape,
    terms: BTreeMap<Monomial, GradedElement>,
}

impl GradedSeries {
    pub fn zero(parameters: Vec<String>, order: u32, shape: Shape) -> Result<Self> {
        if order < 1 {
            return Err(Error::input("truncation order must be at least 1"));
        }
        Ok(GradedSeries { parameters, order, shape, terms: BTreeMap::new() })
    }

    /// An empty series with the same parameters, order and shape.
    pub fn zero_like(&self) -> Self {
        GradedSeries {
            parameters: self.parameters.clone(),
            order: self.order,
            shape: self.shape.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// `Σ_i t_i · coeffs[i]`.
    pub fn linear(
        parameters: Vec<String>,
        order: u32,
        shape: Shape,
        coeffs: &[GradedElement],
    ) -> Result<Self> {
        if coeffs.len() != parameters.len() {
            return Err(Error::input("one coefficient per parameter is required"));
        }
        let mut s = GradedSeries::zero(parameters, order, shape)?;
        let m = coeffs.len();
        for (i, c) in coeffs.iter().enumerate() {
            s.insert(Monomial::unit(m, i), c.clone())?;
        }
        Ok(s)
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn nvars(&self) -> usize {
        self.parameters.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, GradedElement> {
        &self.terms
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&GradedElement> {
        self.terms.get(m)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `t^m ⊗ c`, rejecting constant terms and terms above the order.
    pub fn insert(&mut self, m: Monomial, c: GradedElement) -> Result<()> {
        if m.exponents().len() != self.nvars() {
            return Err(Error::input(format!(
                "exponent vector has {} entries, expected {}",
                m.exponents().len(),
                self.nvars()
            )));
        }
        if m.total_degree() == 0 {
            return Err(Error::input("series terms must have positive total degree"));
        }
        if m.total_degree() > self.order {
            return Err(Error::input(format!(
                "term of total degree {} exceeds the truncation order {}",
                m.total_degree(),
                self.order
            )));
        }
        if !c.conforms(&self.shape) {
            return Err(Error::input("series coefficient does not conform to the graded space"));
        }
        self.accumulate(m, &Scalar::one(), &c);
        Ok(())
    }

    /// Adds `k · t^m ⊗ c`; silently truncates above the order.
    fn accumulate(&mut self, m: Monomial, k: &Scalar, c: &GradedElement) {
        let deg = m.total_degree();
        if deg == 0 || deg > self.order || k.is_zero() || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(e) => {
                e.add_scaled(k, c);
                if e.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.scale(k));
            }
        }
    }

    fn compatible(&self, other: &GradedSeries) -> Result<()> {
        if self.parameters != other.parameters {
            return Err(Error::input("series have different parameters"));
        }
        if self.order != other.order {
            return Err(Error::input(format!(
                "series have different truncation orders ({} vs {})",
                self.order, other.order
            )));
        }
        if self.shape != other.shape {
            return Err(Error::input("series live in different graded spaces"));
        }
        Ok(())
    }

    pub fn add(&self, other: &GradedSeries) -> Result<GradedSeries> {
        self.add_scaled(&Scalar::one(), other)
    }

    pub fn sub(&self, other: &GradedSeries) -> Result<GradedSeries> {
        self.add_scaled(&Scalar::from_int(-1), other)
    }

    /// `self + k·other`.
    pub fn add_scaled(&self, k: &Scalar, other: &GradedSeries) -> Result<GradedSeries> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), k, c);
        }
        Ok(out)
    }

    pub fn scale(&self, k: &Scalar) -> GradedSeries {
        let mut out = self.zero_like();
        for (m, c) in &self.terms {
            out.accumulate(m.clone(), k, c);
        }
        out
    }

    pub fn neg(&self) -> GradedSeries {
        self.scale(&Scalar::from_int(-1))
    }

    /// Terms of total degree exactly `k`.
    pub fn homogeneous_part(&self, k: u32) -> GradedSeries {
        let mut out = self.zero_like();
        for (m, c) in self.terms.iter().filter(|(m, _)| m.total_degree() == k) {
            out.terms.insert(m.clone(), c.clone());
        }
        out
    }

    /// Terms of total degree at most `k`, re-homed at order `k`.
    pub fn truncate_to(&self, k: u32) -> Result<GradedSeries> {
        let mut out = GradedSeries::zero(self.parameters.clone(), k, self.shape.clone())?;
        for (m, c) in self.terms.iter().filter(|(m, _)| m.total_degree() <= k) {
            out.terms.insert(m.clone(), c.clone());
        }
        Ok(out)
    }

    /// Keeps only the degree-`q` part of every coefficient.
    pub fn project_degree(&self, q: i32) -> GradedSeries {
        let mut out = self.zero_like();
        for (m, c) in &self.terms {
            out.accumulate(m.clone(), &Scalar::one(), &c.project_degree(q));
        }
        out
    }

    /// True if every coefficient is concentrated in degree `q`.
    pub fn is_homogeneous_of_degree(&self, q: i32) -> bool {
        self.terms.values().all(|c| c.support_degrees().iter().all(|&d| d == q))
    }

    /// `[s, s']` with the parameters even and central.
    pub fn bracket(&self, l: &DgLa, other: &GradedSeries) -> Result<GradedSeries> {
        self.compatible(other)?;
        if &self.shape != l.shape() {
            return Err(Error::input("series and dgLa have different graded spaces"));
        }
        let mut out = self.zero_like();
        if l.is_abelian() {
            return Ok(out);
        }
        for (m1, c1) in &self.terms {
            let d1 = m1.total_degree();
            for (m2, c2) in &other.terms {
                if d1 + m2.total_degree() > self.order {
                    continue;
                }
                let b = l.bracket_unchecked(c1, c2);
                out.accumulate(m1.mul(m2), &Scalar::one(), &b);
            }
        }
        Ok(out)
    }

    /// Applies a graded linear map coefficient-wise.
    pub fn apply(&self, op: &GradedMap) -> Result<GradedSeries> {
        op.check_shape(&self.shape)?;
        let mut out = self.zero_like();
        for (m, c) in &self.terms {
            out.accumulate(m.clone(), &Scalar::one(), &op.apply(c));
        }
        Ok(out)
    }

    /// Formal substitution `t ← R·t`, i.e. the series `s(R·t)`.
    pub fn substitute_linear(&self, r: &Matrix) -> Result<GradedSeries> {
        let forms = substitution_forms(r, self.nvars(), self.order)?;
        let mut out = self.zero_like();
        if self.nvars() == 0 {
            return Ok(out);
        }
        let mut cache = PowerCache::new(&forms);
        for (m, c) in &self.terms {
            let img = cache.monomial(m);
            for (mm, k) in img.terms() {
                out.accumulate(mm.clone(), k, c);
            }
        }
        Ok(out)
    }

    /// `Σ_i (R·t)_i ∂s/∂t_i`, the derivative along a linear vector field.
    pub fn linear_vector_field_derivative(&self, r: &Matrix) -> Result<GradedSeries> {
        let n = self.nvars();
        if r.shape() != (n, n) {
            return Err(Error::input("vector field matrix has the wrong size"));
        }
        let mut out = self.zero_like();
        for (m, c) in &self.terms {
            for i in 0..n {
                let e = m.exponents()[i];
                if e == 0 {
                    continue;
                }
                let mut lowered = m.exponents().to_vec();
                lowered[i] -= 1;
                let factor = Scalar::from_int(e as i64);
                for j in 0..n {
                    let rij = &r[(i, j)];
                    if rij.is_zero() {
                        continue;
                    }
                    let mut exps = lowered.clone();
                    exps[j] += 1;
                    out.accumulate(Monomial(exps), &(rij * &factor), c);
                }
            }
        }
        Ok(out)
    }

    pub fn evaluate(&self, point: &[Scalar]) -> Result<GradedElement> {
        if point.len() != self.nvars() {
            return Err(Error::input(format!(
                "evaluation point has {} coordinates, expected {}",
                point.len(),
                self.nvars()
            )));
        }
        let mut out = GradedElement::zero(&self.shape);
        for (m, c) in &self.terms {
            out.add_scaled(&m.evaluate(point), c);
        }
        Ok(out)
    }

    /// The scalar polynomial carried by basis coordinate `(q, index)`.
    pub fn coordinate_polynomial(&self, q: i32, index: usize) -> Polynomial {
        let mut p = Polynomial::zero(self.nvars(), self.order);
        for (m, c) in &self.terms {
            if let Some(x) = c.component(q).get(index) {
                p.add_term(m.clone(), x.clone());
            }
        }
        p
    }

    /// First monomial at which two series differ.
    pub fn first_difference(&self, other: &GradedSeries) -> Option<Monomial> {
        let keys: std::collections::BTreeSet<&Monomial> =
            self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter().find(|m| self.terms.get(*m) != other.terms.get(*m)).cloned()
    }
}

impl GradedSeries {
    /// Like `Display`, with coefficients written in the basis names of `space`.
    pub fn format_with(&self, space: &crate::dgla::GradedSpace) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{}·({})", m.format(&self.parameters), space.format_element(c)))
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Display for GradedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{}·({c:?})", m.format(&self.parameters)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders;
    use crate::dgla::BasisRef;
    use proptest::prelude::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    fn toy() -> DgLa {
        builders::toy3().0
    }

    fn elem(l: &DgLa, q: i32, i: usize) -> GradedElement {
        GradedElement::basis(l.shape(), BasisRef::new(q, i))
    }

    fn one_param(l: &DgLa, order: u32) -> GradedSeries {
        GradedSeries::zero(vec!["t".into()], order, l.shape().clone()).unwrap()
    }

    fn mono(e: &[u32]) -> Monomial {
        Monomial::new(e.to_vec())
    }

    #[test]
    fn graded_lex_order() {
        let mut v = vec![mono(&[0, 2]), mono(&[1, 0]), mono(&[1, 1]), mono(&[2, 0]), mono(&[0, 1])];
        v.sort();
        assert_eq!(v, vec![mono(&[1, 0]), mono(&[0, 1]), mono(&[2, 0]), mono(&[1, 1]), mono(&[0, 2])]);
    }

    #[test]
    fn add_and_cancel() {
        let l = toy();
        let mut a = one_param(&l, 3);
        a.insert(mono(&[1]), elem(&l, 1, 0)).unwrap();
        let mut b = one_param(&l, 3);
        b.insert(mono(&[1]), elem(&l, 1, 1)).unwrap();
        let sum = a.add(&b).unwrap();
        assert_eq!(sum.coefficient(&mono(&[1])).unwrap(), &elem(&l, 1, 0).add(&elem(&l, 1, 1)));
        assert_eq!(a.add(&one_param(&l, 3)).unwrap(), a);
        assert!(a.add_scaled(&s(-1), &a).unwrap().is_zero());
    }

    #[test]
    fn mixed_orders_rejected() {
        let l = toy();
        assert!(one_param(&l, 2).add(&one_param(&l, 3)).is_err());
        assert!(GradedSeries::zero(vec![], 0, l.shape().clone()).is_err());
        let mut a = one_param(&l, 2);
        assert!(a.insert(mono(&[0]), elem(&l, 1, 0)).is_err());
        assert!(a.insert(mono(&[3]), elem(&l, 1, 0)).is_err());
    }

    #[test]
    fn bracket_of_tx_with_itself() {
        let l = toy();
        let mut a = one_param(&l, 3);
        a.insert(mono(&[1]), elem(&l, 1, 0)).unwrap();
        let b = a.bracket(&l, &a).unwrap();
        assert_eq!(b.terms().len(), 1);
        assert_eq!(b.coefficient(&mono(&[2])).unwrap(), &elem(&l, 2, 0));
    }

    #[test]
    fn bracket_truncates() {
        let l = toy();
        let mut a = one_param(&l, 2);
        a.insert(mono(&[2]), elem(&l, 1, 0)).unwrap();
        assert!(a.bracket(&l, &a).unwrap().is_zero());
    }

    #[test]
    fn two_parameter_commutator() {
        let (l, _) = builders::torus_constants(2, 2).unwrap();
        let params = vec!["t1".to_string(), "t2".to_string()];
        let mut a = GradedSeries::zero(params.clone(), 2, l.shape().clone()).unwrap();
        a.insert(mono(&[1, 0]), elem(&l, 1, 2)).unwrap(); // E12*e1
        let mut b = GradedSeries::zero(params, 2, l.shape().clone()).unwrap();
        b.insert(mono(&[0, 1]), elem(&l, 1, 7)).unwrap(); // E21*e2
        let c = a.bracket(&l, &b).unwrap();
        let coeff = c.coefficient(&mono(&[1, 1])).unwrap();
        assert_eq!(l.space().format_element(coeff), "E11*e1^e2 + -1*E22*e1^e2");
    }

    #[test]
    fn operator_application() {
        let (l, m, _) = builders::toy3();
        let h = crate::hodge::hodge_data(&l, &m).unwrap();
        let mut a = one_param(&l, 3);
        a.insert(mono(&[1]), elem(&l, 1, 1)).unwrap();
        let da = a.apply(l.differential()).unwrap();
        assert_eq!(da.coefficient(&mono(&[1])).unwrap(), &elem(&l, 2, 0));

        let mut v = one_param(&l, 3);
        v.insert(mono(&[2]), elem(&l, 2, 1)).unwrap();
        assert!(v.apply(h.green()).unwrap().is_zero());
        assert_eq!(v.apply(h.projector()).unwrap(), v);
    }

    #[test]
    fn substitution_examples() {
        let l = toy();
        let mut a = one_param(&l, 3);
        a.insert(mono(&[2]), elem(&l, 2, 0)).unwrap();
        assert_eq!(a.substitute_linear(&Matrix::identity(1)).unwrap(), a);
        assert_eq!(a.substitute_linear(&Matrix::from_ints(&[&[-1]])).unwrap(), a);

        let params = vec!["t1".to_string(), "t2".to_string()];
        let mut w = GradedSeries::zero(params, 2, l.shape().clone()).unwrap();
        w.insert(mono(&[1, 1]), elem(&l, 2, 1)).unwrap();
        let swap = Matrix::from_ints(&[&[0, 1], &[1, 0]]);
        assert_eq!(w.substitute_linear(&swap).unwrap(), w);
        assert!(w.substitute_linear(&Matrix::identity(3)).is_err());
    }

    #[test]
    fn evaluation_examples() {
        let l = toy();
        let mut a = one_param(&l, 3);
        a.insert(mono(&[1]), elem(&l, 1, 0)).unwrap();
        a.insert(mono(&[2]), elem(&l, 1, 1).scale(&Scalar::from_ratio(-1, 2))).unwrap();
        assert!(a.evaluate(&[s(0)]).unwrap().is_zero());
        let v = a.evaluate(&[s(2)]).unwrap();
        assert_eq!(v, elem(&l, 1, 0).scale(&s(2)).add(&elem(&l, 1, 1).scale(&s(-2))));
        assert!(a.evaluate(&[s(1), s(1)]).is_err());

        let params = vec!["t1".to_string(), "t2".to_string()];
        let mut w = GradedSeries::zero(params, 2, l.shape().clone()).unwrap();
        w.insert(mono(&[1, 1]), elem(&l, 2, 1)).unwrap();
        assert_eq!(w.evaluate(&[s(1), Scalar::i()]).unwrap(), elem(&l, 2, 1).scale(&Scalar::i()));
    }

    #[test]
    fn euler_field_on_homogeneous_series() {
        let l = toy();
        let params = vec!["t1".to_string(), "t2".to_string()];
        let mut w = GradedSeries::zero(params, 3, l.shape().clone()).unwrap();
        w.insert(mono(&[1, 1]), elem(&l, 2, 1)).unwrap();
        w.insert(mono(&[2, 0]), elem(&l, 2, 0)).unwrap();
        let euler = w.linear_vector_field_derivative(&Matrix::identity(2)).unwrap();
        assert_eq!(euler, w.scale(&s(2)));
    }

    fn arb_series(nvars: usize, order: u32) -> impl Strategy<Value = Vec<(Vec<u32>, i64, usize, i64)>> {
        proptest::collection::vec(
            (proptest::collection::vec(0u32..3, nvars), 1i64..3, 0usize..4, -3i64..4),
            0..5,
        )
        .prop_map(move |v| {
            v.into_iter()
                .filter(|(e, ..)| {
                    let d: u32 = e.iter().sum();
                    d >= 1 && d <= order
                })
                .collect()
        })
    }

    fn build(l: &DgLa, nvars: usize, order: u32, raw: &[(Vec<u32>, i64, usize, i64)]) -> GradedSeries {
        let params = default_parameter_names(nvars);
        let mut s = GradedSeries::zero(params, order, l.shape().clone()).unwrap();
        for (e, q, i, c) in raw {
            let q = *q as i32;
            let i = i % l.shape().dim(q);
            s.insert(Monomial::new(e.clone()), elem(l, q, i).scale(&Scalar::from_int(*c))).unwrap();
        }
        s
    }

    fn random_matrix(v: &[i64], n: usize) -> Matrix {
        let rows: Vec<Vec<Scalar>> = v.chunks(n).map(|c| c.iter().map(|&x| s(x)).collect()).collect();
        Matrix::from_rows(rows, n).unwrap()
    }

    proptest! {
        #[test]
        fn substitution_composes(
            raw in arb_series(2, 3),
            r1 in proptest::collection::vec(-2i64..3, 4),
            r2 in proptest::collection::vec(-2i64..3, 4),
        ) {
            let (l, _) = builders::torus_constants(2, 1).unwrap();
            let series = build(&l, 2, 3, &raw);
            let a = random_matrix(&r1, 2);
            let b = random_matrix(&r2, 2);
            let lhs = series.substitute_linear(&a).unwrap().substitute_linear(&b).unwrap();
            let rhs = series.substitute_linear(&a.mul(&b)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn bracket_matches_double_loop_oracle(raw_a in arb_series(2, 3), raw_b in arb_series(2, 3)) {
            let (l, _) = builders::torus_constants(2, 2).unwrap();
            let a = build(&l, 2, 3, &raw_a);
            let b = build(&l, 2, 3, &raw_b);
            let fast = a.bracket(&l, &b).unwrap();
            // oracle: expand every coefficient into basis vectors and sum
            let mut oracle = a.zero_like();
            for (m1, c1) in a.terms() {
                for (m2, c2) in b.terms() {
                    let m = m1.mul(m2);
                    if m.total_degree() > 3 { continue; }
                    for (ra, xa) in c1.entries() {
                        for (rb, xb) in c2.entries() {
                            let e = l.bracket_basis(ra, rb).scale(&(xa * xb));
                            oracle.accumulate(m.clone(), &Scalar::one(), &e);
                        }
                    }
                }
            }
            prop_assert_eq!(&fast, &oracle);
            // graded antisymmetry for series with degree-1 coefficients: [a,b] = [b,a]
            let a1 = a.project_degree(1);
            let b1 = b.project_degree(1);
            prop_assert_eq!(a1.bracket(&l, &b1).unwrap(), b1.bracket(&l, &a1).unwrap());
        }

        #[test]
        fn leibniz_lifts_to_series(raw_a in arb_series(1, 3), raw_b in arb_series(1, 3)) {
            let (l, _, _) = builders::toy3();
            let a = build(&l, 1, 3, &raw_a).project_degree(1);
            let b = build(&l, 1, 3, &raw_b).project_degree(1);
            let d = l.differential();
            let lhs = a.bracket(&l, &b).unwrap().apply(d).unwrap();
            let rhs = a.apply(d).unwrap().bracket(&l, &b).unwrap()
                .sub(&a.bracket(&l, &b.apply(d).unwrap()).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
