//! Finite-dimensional differential graded Lie algebras: graded spaces,
//! elements, per-degree linear maps, structure constants and the axiom
//! validator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Degree range and per-degree dimensions. Degrees outside the range are zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Shape {
    pub min_degree: i32,
    pub dims: Vec<usize>,
}

impl Shape {
    pub fn new(min_degree: i32, dims: Vec<usize>) -> Self {
        assert!(!dims.is_empty(), "a shape needs at least one degree");
        Shape { min_degree, dims }
    }

    pub fn max_degree(&self) -> i32 {
        self.min_degree + self.dims.len() as i32 - 1
    }

    pub fn contains(&self, q: i32) -> bool {
        q >= self.min_degree && q <= self.max_degree()
    }

    pub fn dim(&self, q: i32) -> usize {
        if self.contains(q) {
            self.dims[(q - self.min_degree) as usize]
        } else {
            0
        }
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> {
        self.min_degree..=self.max_degree()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn basis(&self) -> impl Iterator<Item = BasisRef> + '_ {
        self.degrees()
            .flat_map(move |q| (0..self.dim(q)).map(move |index| BasisRef { degree: q, index }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GradedSpace {
    shape: Shape,
    basis_names: Vec<Vec<String>>,
}

impl GradedSpace {
    pub fn new(min_degree: i32, basis_names: Vec<Vec<String>>) -> Result<Self> {
        if basis_names.is_empty() {
            return Err(Error::at("basis", "at least one degree is required"));
        }
        for (off, names) in basis_names.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for name in names {
                if !seen.insert(name) {
                    return Err(Error::at(
                        format!("basis[{off}]"),
                        format!("duplicate basis name `{name}`"),
                    ));
                }
            }
        }
        let dims = basis_names.iter().map(Vec::len).collect();
        Ok(GradedSpace { shape: Shape::new(min_degree, dims), basis_names })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn min_degree(&self) -> i32 {
        self.shape.min_degree
    }

    pub fn max_degree(&self) -> i32 {
        self.shape.max_degree()
    }

    pub fn dim(&self, q: i32) -> usize {
        self.shape.dim(q)
    }

    pub fn names(&self, q: i32) -> &[String] {
        if self.shape.contains(q) {
            &self.basis_names[(q - self.shape.min_degree) as usize]
        } else {
            &[]
        }
    }

    pub fn name(&self, b: BasisRef) -> &str {
        &self.names(b.degree)[b.index]
    }

    pub fn basis_names(&self) -> &[Vec<String>] {
        &self.basis_names
    }

    /// Human-readable linear combination of basis names.
    pub fn format_element(&self, e: &GradedElement) -> String {
        let mut parts = Vec::new();
        for q in self.shape.degrees() {
            for (i, c) in e.component(q).iter().enumerate() {
                if !c.is_zero() {
                    let name = &self.names(q)[i];
                    if c.is_one() {
                        parts.push(name.clone());
                    } else {
                        parts.push(format!("{c}*{name}"));
                    }
                }
            }
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

/// A basis vector `e_index` of degree `degree`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BasisRef {
    pub degree: i32,
    pub index: usize,
}

impl BasisRef {
    pub fn new(degree: i32, index: usize) -> Self {
        BasisRef { degree, index }
    }
}

/// An element of the total space, one coefficient vector per degree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GradedElement {
    min_degree: i32,
    components: Vec<Vec<Scalar>>,
}

impl GradedElement {
    pub fn zero(shape: &Shape) -> Self {
        GradedElement {
            min_degree: shape.min_degree,
            components: shape.dims.iter().map(|&d| vec![Scalar::zero(); d]).collect(),
        }
    }

    pub fn basis(shape: &Shape, b: BasisRef) -> Self {
        let mut e = GradedElement::zero(shape);
        e.component_mut(b.degree)[b.index] = Scalar::one();
        e
    }

    /// Element concentrated in degree `q`.
    pub fn homogeneous(shape: &Shape, q: i32, coeffs: Vec<Scalar>) -> Result<Self> {
        if coeffs.len() != shape.dim(q) {
            return Err(Error::input(format!(
                "degree {q} component has {} entries, expected {}",
                coeffs.len(),
                shape.dim(q)
            )));
        }
        let mut e = GradedElement::zero(shape);
        if shape.contains(q) {
            e.components[(q - shape.min_degree) as usize] = coeffs;
        }
        Ok(e)
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.min_degree, self.components.iter().map(Vec::len).collect())
    }

    pub fn conforms(&self, shape: &Shape) -> bool {
        self.min_degree == shape.min_degree
            && self.components.len() == shape.dims.len()
            && self.components.iter().zip(&shape.dims).all(|(c, &d)| c.len() == d)
    }

    pub fn component(&self, q: i32) -> &[Scalar] {
        let off = q - self.min_degree;
        if off < 0 || off as usize >= self.components.len() {
            &[]
        } else {
            &self.components[off as usize]
        }
    }

    pub fn component_mut(&mut self, q: i32) -> &mut Vec<Scalar> {
        let off = q - self.min_degree;
        assert!(
            off >= 0 && (off as usize) < self.components.len(),
            "degree {q} outside the graded range"
        );
        &mut self.components[off as usize]
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.components.len() as i32).map(move |o| o + self.min_degree)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().flatten().all(Scalar::is_zero)
    }

    /// Degrees carrying a nonzero component.
    pub fn support_degrees(&self) -> Vec<i32> {
        self.degrees().filter(|&q| self.component(q).iter().any(|c| !c.is_zero())).collect()
    }

    /// Keeps only the degree-`q` component.
    pub fn project_degree(&self, q: i32) -> GradedElement {
        let mut out = GradedElement::zero(&self.shape());
        if self.component(q).is_empty() {
            return out;
        }
        *out.component_mut(q) = self.component(q).to_vec();
        out
    }

    /// Nonzero coefficients as `(basis, value)` pairs in basis order.
    pub fn entries(&self) -> impl Iterator<Item = (BasisRef, &Scalar)> + '_ {
        self.degrees().flat_map(move |q| {
            self.component(q)
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(move |(i, c)| (BasisRef::new(q, i), c))
        })
    }

    pub fn add_assign(&mut self, other: &GradedElement) {
        assert_eq!(self.min_degree, other.min_degree, "graded element shape mismatch");
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            for (x, y) in a.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x += y;
                }
            }
        }
    }

    pub fn add_scaled(&mut self, k: &Scalar, other: &GradedElement) {
        if k.is_zero() {
            return;
        }
        assert_eq!(self.min_degree, other.min_degree, "graded element shape mismatch");
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            for (x, y) in a.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x += k * y;
                }
            }
        }
    }

    pub fn add(&self, other: &GradedElement) -> GradedElement {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &GradedElement) -> GradedElement {
        let mut out = self.clone();
        out.add_scaled(&Scalar::from_int(-1), other);
        out
    }

    pub fn scale(&self, k: &Scalar) -> GradedElement {
        GradedElement {
            min_degree: self.min_degree,
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(|x| x * k).collect())
                .collect(),
        }
    }

    pub fn neg(&self) -> GradedElement {
        self.scale(&Scalar::from_int(-1))
    }
}

impl fmt::Debug for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> =
            self.entries().map(|(b, c)| format!("{c}*e{}_{}", b.degree, b.index)).collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// A linear map of fixed degree `shift`: one matrix per source degree `q`,
/// sending degree `q` to degree `q + shift`. Missing blocks are zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GradedMap {
    shift: i32,
    blocks: BTreeMap<i32, Matrix>,
}

impl GradedMap {
    pub fn zero(shift: i32) -> Self {
        GradedMap { shift, blocks: BTreeMap::new() }
    }

    pub fn identity(shape: &Shape) -> Self {
        let blocks = shape.degrees().map(|q| (q, Matrix::identity(shape.dim(q)))).collect();
        GradedMap { shift: 0, blocks }
    }

    /// Builds a map from explicit blocks, checking each against `shape`.
    pub fn from_blocks(shape: &Shape, shift: i32, blocks: BTreeMap<i32, Matrix>) -> Result<Self> {
        let m = GradedMap { shift, blocks };
        m.check_shape(shape)?;
        Ok(m)
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    pub fn block(&self, q: i32) -> Option<&Matrix> {
        self.blocks.get(&q)
    }

    pub fn blocks(&self) -> &BTreeMap<i32, Matrix> {
        &self.blocks
    }

    /// Block for source degree `q`, materialized as zeros when absent.
    pub fn block_or_zero(&self, shape: &Shape, q: i32) -> Matrix {
        self.blocks
            .get(&q)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(shape.dim(q + self.shift), shape.dim(q)))
    }

    pub fn set_block(&mut self, q: i32, m: Matrix) {
        self.blocks.insert(q, m);
    }

    pub fn check_shape(&self, shape: &Shape) -> Result<()> {
        for (&q, m) in &self.blocks {
            let target = q + self.shift;
            let expected = (shape.dim(target), shape.dim(q));
            if !shape.contains(q) && !m.is_zero() {
                return Err(Error::input(format!("map block for degree {q} outside the range")));
            }
            if !shape.contains(target) && !m.is_zero() {
                return Err(Error::input(format!(
                    "map block for degree {q} lands in degree {target} outside the range"
                )));
            }
            if shape.contains(q) && shape.contains(target) && m.shape() != expected {
                return Err(Error::input(format!(
                    "map block for degree {q} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    expected.0,
                    expected.1
                )));
            }
        }
        Ok(())
    }

    pub fn apply(&self, e: &GradedElement) -> GradedElement {
        let shape = e.shape();
        let mut out = GradedElement::zero(&shape);
        for (&q, m) in &self.blocks {
            let target = q + self.shift;
            if !shape.contains(target) || !shape.contains(q) {
                continue;
            }
            let comp = e.component(q);
            if comp.iter().all(Scalar::is_zero) {
                continue;
            }
            let img = m.mul_vec(comp);
            for (x, y) in out.component_mut(target).iter_mut().zip(img) {
                *x += y;
            }
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GradedMap) -> GradedMap {
        let mut blocks = BTreeMap::new();
        for (&q, b) in &other.blocks {
            if let Some(a) = self.blocks.get(&(q + other.shift)) {
                blocks.insert(q, a.mul(b));
            }
        }
        GradedMap { shift: self.shift + other.shift, blocks }
    }

    fn combine(&self, other: &GradedMap, shape: &Shape, sign: i64) -> GradedMap {
        assert_eq!(self.shift, other.shift, "adding graded maps of different degree");
        let k = Scalar::from_int(sign);
        let keys: BTreeSet<i32> = self.blocks.keys().chain(other.blocks.keys()).copied().collect();
        let blocks = keys
            .into_iter()
            .map(|q| {
                let a = self.block_or_zero(shape, q);
                let b = other.block_or_zero(shape, q);
                (q, a.add(&b.scale(&k)))
            })
            .collect();
        GradedMap { shift: self.shift, blocks }
    }

    pub fn add(&self, other: &GradedMap, shape: &Shape) -> GradedMap {
        self.combine(other, shape, 1)
    }

    pub fn sub(&self, other: &GradedMap, shape: &Shape) -> GradedMap {
        self.combine(other, shape, -1)
    }

    pub fn scale(&self, k: &Scalar) -> GradedMap {
        GradedMap {
            shift: self.shift,
            blocks: self.blocks.iter().map(|(&q, m)| (q, m.scale(k))).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(Matrix::is_zero)
    }

    /// Equality as linear maps (absent blocks count as zero).
    pub fn same_map(&self, other: &GradedMap, shape: &Shape) -> bool {
        self.shift == other.shift && self.sub(other, shape).is_zero()
    }

    /// First source degree and basis column where the maps differ.
    pub fn first_difference(&self, other: &GradedMap, shape: &Shape) -> Option<BasisRef> {
        let diff = self.sub(other, shape);
        for (&q, m) in &diff.blocks {
            for c in 0..m.cols() {
                if m.column(c).iter().any(|x| !x.is_zero()) {
                    return Some(BasisRef::new(q, c));
                }
            }
        }
        None
    }

    /// Blocks as a dense list over every source degree of `shape`, zeros
    /// filled in. Used for serialization.
    pub fn dense_blocks(&self, shape: &Shape) -> Vec<Matrix> {
        shape.degrees().map(|q| self.block_or_zero(shape, q)).collect()
    }
}

/// Structure constants: `[e_a, e_b] = Σ c_k e_k` in degree `|a| + |b|`,
/// stored for every ordered pair with a nonzero result.
pub type BracketTable = BTreeMap<(BasisRef, BasisRef), Vec<(usize, Scalar)>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DgLa {
    space: GradedSpace,
    differential: GradedMap,
    bracket: BracketTable,
}

impl DgLa {
    /// Assembles a dgLa, checking shapes and that every bracket lands in range.
    /// Axioms are not checked; see [`validate`].
    pub fn new(space: GradedSpace, differential: GradedMap, bracket: BracketTable) -> Result<Self> {
        if differential.shift() != 1 {
            return Err(Error::at("differential", "the differential must have degree +1"));
        }
        differential
            .check_shape(space.shape())
            .map_err(|e| Error::at("differential", e.to_string()))?;
        let shape = space.shape();
        let blocks = shape
            .degrees()
            .filter(|&q| shape.contains(q + 1))
            .map(|q| (q, differential.block_or_zero(shape, q)))
            .collect();
        let differential = GradedMap { shift: 1, blocks };
        let mut cleaned = BracketTable::new();
        for ((a, b), terms) in bracket {
            for r in [a, b] {
                if r.index >= shape.dim(r.degree) {
                    return Err(Error::at(
                        "bracket",
                        format!("basis index {} out of range in degree {}", r.index, r.degree),
                    ));
                }
            }
            let target = a.degree + b.degree;
            let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (k, c) in terms {
                if c.is_zero() {
                    continue;
                }
                if !shape.contains(target) {
                    return Err(Error::at(
                        "bracket",
                        format!(
                            "entry [{}:{}, {}:{}] lands in degree {target} outside [{}, {}]",
                            a.degree,
                            a.index,
                            b.degree,
                            b.index,
                            shape.min_degree,
                            shape.max_degree()
                        ),
                    ));
                }
                if k >= shape.dim(target) {
                    return Err(Error::at(
                        "bracket",
                        format!("target index {k} out of range in degree {target}"),
                    ));
                }
                *acc.entry(k).or_default() += c;
            }
            let terms: Vec<(usize, Scalar)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            if !terms.is_empty() {
                cleaned.insert((a, b), terms);
            }
        }
        Ok(DgLa { space, differential, bracket: cleaned })
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn shape(&self) -> &Shape {
        self.space.shape()
    }

    pub fn differential(&self) -> &GradedMap {
        &self.differential
    }

    pub fn bracket_table(&self) -> &BracketTable {
        &self.bracket
    }

    pub fn is_abelian(&self) -> bool {
        self.bracket.is_empty()
    }

    fn check(&self, e: &GradedElement, what: &str) -> Result<()> {
        if e.conforms(self.shape()) {
            Ok(())
        } else {
            Err(Error::input(format!("{what} does not conform to the graded space")))
        }
    }

    /// `[e_a, e_b]` for basis vectors.
    pub fn bracket_basis(&self, a: BasisRef, b: BasisRef) -> GradedElement {
        let mut out = GradedElement::zero(self.shape());
        if let Some(terms) = self.bracket.get(&(a, b)) {
            let comp = out.component_mut(a.degree + b.degree);
            for (k, c) in terms {
                comp[*k] = c.clone();
            }
        }
        out
    }

    /// Bilinear extension of the structure constants.
    pub fn bracket(&self, a: &GradedElement, b: &GradedElement) -> Result<GradedElement> {
        self.check(a, "left bracket argument")?;
        self.check(b, "right bracket argument")?;
        Ok(self.bracket_unchecked(a, b))
    }

    pub(crate) fn bracket_unchecked(&self, a: &GradedElement, b: &GradedElement) -> GradedElement {
        let mut out = GradedElement::zero(self.shape());
        if self.bracket.is_empty() {
            return out;
        }
        let right: Vec<(BasisRef, &Scalar)> = b.entries().collect();
        if right.is_empty() {
            return out;
        }
        for (ra, ca) in a.entries() {
            for (rb, cb) in &right {
                if let Some(terms) = self.bracket.get(&(ra, *rb)) {
                    let coeff = ca * *cb;
                    let comp = out.component_mut(ra.degree + rb.degree);
                    for (k, c) in terms {
                        comp[*k] += &coeff * c;
                    }
                }
            }
        }
        out
    }

    pub fn apply_differential(&self, a: &GradedElement) -> Result<GradedElement> {
        self.check(a, "argument of the differential")?;
        Ok(self.differential.apply(a))
    }
}

fn sign(exp: i32) -> Scalar {
    if exp.rem_euclid(2) == 0 {
        Scalar::one()
    } else {
        Scalar::from_int(-1)
    }
}

/// `(-1)^(p·q)` as a scalar.
pub fn koszul_sign(p: i32, q: i32) -> Scalar {
    sign(p * q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// The basis tuple the identity was evaluated on.
    pub tuple: Vec<BasisRef>,
    pub names: Vec<String>,
    /// The nonzero defect, written in basis names.
    pub defect: String,
    #[serde(skip)]
    pub defect_element: GradedElement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub status: Status,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub axioms: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.axioms.iter().all(|a| a.status != Status::Fail)
    }

    pub fn get(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.axioms.iter().find(|a| a.axiom == axiom)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    pub skip_jacobi: bool,
}

pub const AXIOM_D_SQUARED: &str = "d_squared_zero";
pub const AXIOM_ANTISYMMETRY: &str = "graded_antisymmetry";
pub const AXIOM_JACOBI: &str = "graded_jacobi";
pub const AXIOM_LEIBNIZ: &str = "graded_leibniz";

/// Checks `d∘d = 0`, graded antisymmetry, graded Jacobi and graded Leibniz.
///
/// Only basis tuples that can produce a nonzero defect are visited; they are
/// visited in lexicographic order so the reported witness is deterministic.
pub fn validate(l: &DgLa, opts: ValidateOptions) -> ValidationReport {
    let axioms = vec![
        check_d_squared(l),
        check_antisymmetry(l),
        if opts.skip_jacobi {
            AxiomCheck { axiom: AXIOM_JACOBI, status: Status::Skipped, witness: None }
        } else {
            check_jacobi(l)
        },
        check_leibniz(l),
    ];
    ValidationReport { axioms }
}

fn verdict(axiom: &'static str, witness: Option<Witness>) -> AxiomCheck {
    AxiomCheck {
        axiom,
        status: if witness.is_some() { Status::Fail } else { Status::Pass },
        witness,
    }
}

fn witness(l: &DgLa, tuple: Vec<BasisRef>, defect: GradedElement) -> Witness {
    Witness {
        names: tuple.iter().map(|&b| l.space().name(b).to_string()).collect(),
        tuple,
        defect: l.space().format_element(&defect),
        defect_element: defect,
    }
}

fn check_d_squared(l: &DgLa) -> AxiomCheck {
    let d = l.differential();
    let dd = d.compose(d);
    let found = dd.first_difference(&GradedMap::zero(2), l.shape()).map(|b| {
        let e = GradedElement::basis(l.shape(), b);
        witness(l, vec![b], d.apply(&d.apply(&e)))
    });
    verdict(AXIOM_D_SQUARED, found)
}

fn check_antisymmetry(l: &DgLa) -> AxiomCheck {
    let pairs: BTreeSet<(BasisRef, BasisRef)> =
        l.bracket_table().keys().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
    for (a, b) in pairs {
        let ab = l.bracket_basis(a, b);
        let ba = l.bracket_basis(b, a);
        let mut defect = ab;
        defect.add_scaled(&koszul_sign(a.degree, b.degree), &ba);
        if !defect.is_zero() {
            return verdict(AXIOM_ANTISYMMETRY, Some(witness(l, vec![a, b], defect)));
        }
    }
    verdict(AXIOM_ANTISYMMETRY, None)
}

fn check_jacobi(l: &DgLa) -> AxiomCheck {
    let shape = l.shape();
    let all: Vec<BasisRef> = shape.basis().collect();
    let mut triples = BTreeSet::new();
    for &(x, y) in l.bracket_table().keys() {
        for &z in &all {
            triples.insert((z, x, y));
            triples.insert((x, y, z));
            triples.insert((x, z, y));
        }
    }
    for (a, b, c) in triples {
        let ea = GradedElement::basis(shape, a);
        let eb = GradedElement::basis(shape, b);
        let ec = GradedElement::basis(shape, c);
        let lhs = l.bracket_unchecked(&ea, &l.bracket_basis(b, c));
        let first = l.bracket_unchecked(&l.bracket_basis(a, b), &ec);
        let second = l.bracket_unchecked(&eb, &l.bracket_basis(a, c));
        let mut defect = lhs.sub(&first);
        defect.add_scaled(&(-koszul_sign(a.degree, b.degree)), &second);
        if !defect.is_zero() {
            return verdict(AXIOM_JACOBI, Some(witness(l, vec![a, b, c], defect)));
        }
    }
    verdict(AXIOM_JACOBI, None)
}

fn check_leibniz(l: &DgLa) -> AxiomCheck {
    let shape = l.shape();
    let d = l.differential();
    // preimages[x] = basis vectors whose differential involves x
    let mut preimages: BTreeMap<BasisRef, Vec<BasisRef>> = BTreeMap::new();
    for (&q, m) in d.blocks() {
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                if !m[(r, c)].is_zero() {
                    preimages
                        .entry(BasisRef::new(q + 1, r))
                        .or_default()
                        .push(BasisRef::new(q, c));
                }
            }
        }
    }
    let mut pairs = BTreeSet::new();
    for &(x, y) in l.bracket_table().keys() {
        pairs.insert((x, y));
        for &a in preimages.get(&x).into_iter().flatten() {
            pairs.insert((a, y));
        }
        for &b in preimages.get(&y).into_iter().flatten() {
            pairs.insert((x, b));
        }
    }
    for (a, b) in pairs {
        let ea = GradedElement::basis(shape, a);
        let eb = GradedElement::basis(shape, b);
        let lhs = d.apply(&l.bracket_basis(a, b));
        let first = l.bracket_unchecked(&d.apply(&ea), &eb);
        let second = l.bracket_unchecked(&ea, &d.apply(&eb));
        let mut defect = lhs.sub(&first);
        defect.add_scaled(&(-sign(a.degree)), &second);
        if !defect.is_zero() {
            return verdict(AXIOM_LEIBNIZ, Some(witness(l, vec![a, b], defect)));
        }
    }
    verdict(AXIOM_LEIBNIZ, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_abelian() -> DgLa {
        let space = GradedSpace::new(0, vec![vec!["a".into()], vec!["b".into()]]).unwrap();
        DgLa::new(space, GradedMap::zero(1), BracketTable::new()).unwrap()
    }

    #[test]
    fn zero_bracket_zero_differential_passes() {
        let rep = validate(&tiny_abelian(), ValidateOptions::default());
        assert!(rep.passed());
        assert!(rep.axioms.iter().all(|a| a.status == Status::Pass));
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(GradedSpace::new(0, vec![vec!["a".into(), "a".into()]]).is_err());
    }

    #[test]
    fn bracket_outside_range_rejected() {
        let space = GradedSpace::new(1, vec![vec!["x".into()], vec!["u".into()]]).unwrap();
        let mut table = BracketTable::new();
        table.insert((BasisRef::new(1, 0), BasisRef::new(2, 0)), vec![(0, Scalar::one())]);
        let err = DgLa::new(space, GradedMap::zero(1), table).unwrap_err();
        assert!(err.to_string().contains("degree 3"), "{err}");
    }

    #[test]
    fn d_squared_failure_reports_witness() {
        let space = GradedSpace::new(
            0,
            vec![vec!["a".into()], vec!["b".into()], vec!["c".into()]],
        )
        .unwrap();
        let mut blocks = BTreeMap::new();
        blocks.insert(0, Matrix::from_ints(&[&[1]]));
        blocks.insert(1, Matrix::from_ints(&[&[1]]));
        let d = GradedMap::from_blocks(space.shape(), 1, blocks).unwrap();
        let l = DgLa::new(space, d, BracketTable::new()).unwrap();
        let rep = validate(&l, ValidateOptions::default());
        let check = rep.get(AXIOM_D_SQUARED).unwrap();
        assert_eq!(check.status, Status::Fail);
        let w = check.witness.as_ref().unwrap();
        assert_eq!(w.names, vec!["a"]);
        assert_eq!(w.defect, "c");
    }

    #[test]
    fn skip_jacobi_is_reported() {
        let rep = validate(&tiny_abelian(), ValidateOptions { skip_jacobi: true });
        assert_eq!(rep.get(AXIOM_JACOBI).unwrap().status, Status::Skipped);
        assert!(rep.passed());
    }

    #[test]
    fn element_shape_mismatch_is_input_error() {
        let l = tiny_abelian();
        let wrong = GradedElement::zero(&Shape::new(0, vec![2, 1]));
        assert!(l.bracket(&wrong, &wrong).is_err());
        assert!(l.apply_differential(&wrong).is_err());
    }
}
