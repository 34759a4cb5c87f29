//! Example dgLas, metrics and actions.
//!
//! * [`torus_constants`]: constant-coefficient Dolbeault forms with values in
//!   `End(E)` for a trivial rank-`r` bundle on an `n`-torus, i.e.
//!   `gl(r) ⊗ Λ•(C^n)` with zero differential.
//! * [`twisted_dolbeault`]: the abelian Dolbeault complex of a flat line bundle
//!   on a 1-torus truncated to Fourier modes `[-M, M]^2`, with symbol
//!   `m1 + i·m2 + c`.
//! * [`toy3`]: a four-dimensional fixture with a third-order obstruction.
//!
//! Matrix units in `gl(r)` are ordered diagonal first (`E11, …, Err`), then
//! off-diagonal in lexicographic order. Degree-`q` bases are form-major: for
//! each increasing multi-index `I` with `|I| = q`, all matrix units.

use std::collections::BTreeMap;

use crate::dgla::{BasisRef, BracketTable, DgLa, GradedMap, GradedSpace, Shape};
use crate::equivariance::{GroupAction, InfinitesimalAction};
use crate::error::{Error, Result};
use crate::hodge::MetricData;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub const MAX_COMPLEX_DIM: usize = 2;
pub const MAX_RANK: usize = 4;
pub const MAX_CUTOFF: usize = 8;

/// How odd-odd brackets combine the two matrix products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketConvention {
    /// `[A⊗ω, B⊗η] = (AB)⊗(ω∧η) − (−1)^{|ω||η|}(BA)⊗(η∧ω)`; a graded Lie bracket.
    Graded,
    /// `(AB − (−1)^{|ω||η|}BA)⊗(ω∧η)`: both products on the same wedge. Breaks
    /// graded antisymmetry for two one-forms; kept as a validator fixture.
    SameWedge,
}

/// Parameters of the torus builders, with their resource bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusSpec {
    pub complex_dim: usize,
    pub rank: usize,
    pub cutoff: usize,
    pub twist: Scalar,
}

impl TorusSpec {
    pub fn check(&self) -> Result<()> {
        if self.complex_dim == 0 || self.complex_dim > MAX_COMPLEX_DIM {
            return Err(Error::Guard(format!(
                "complex dimension {} outside 1..={MAX_COMPLEX_DIM}",
                self.complex_dim
            )));
        }
        if self.rank == 0 || self.rank > MAX_RANK {
            return Err(Error::Guard(format!("rank {} outside 1..={MAX_RANK}", self.rank)));
        }
        if self.cutoff > MAX_CUTOFF {
            return Err(Error::Guard(format!("Fourier cutoff {} exceeds {MAX_CUTOFF}", self.cutoff)));
        }
        Ok(())
    }
}

fn matrix_units(r: usize) -> Vec<(usize, usize)> {
    let mut units: Vec<(usize, usize)> = (0..r).map(|a| (a, a)).collect();
    for a in 0..r {
        for b in 0..r {
            if a != b {
                units.push((a, b));
            }
        }
    }
    units
}

/// Increasing multi-indices of size `q` in `{0..n}`, lexicographic.
fn multi_indices(n: usize, q: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, q: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, q, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, q, &mut Vec::new(), &mut out);
    out
}

/// `ω_I ∧ ω_J = sign · ω_K`, or `None` when `I` and `J` overlap.
fn wedge(i: &[usize], j: &[usize]) -> Option<(i64, Vec<usize>)> {
    if i.iter().any(|x| j.contains(x)) {
        return None;
    }
    let inversions = i.iter().map(|&a| j.iter().filter(|&&b| a > b).count()).sum::<usize>();
    let mut k: Vec<usize> = i.iter().chain(j).copied().collect();
    k.sort_unstable();
    Some((if inversions % 2 == 0 { 1 } else { -1 }, k))
}

fn form_name(idx: &[usize]) -> String {
    idx.iter().map(|i| format!("e{}", i + 1)).collect::<Vec<_>>().join("^")
}

struct TorusLayout {
    n: usize,
    r: usize,
    units: Vec<(usize, usize)>,
    forms: Vec<Vec<Vec<usize>>>,
}

impl TorusLayout {
    fn new(n: usize, r: usize) -> Self {
        TorusLayout { n, r, units: matrix_units(r), forms: (0..=n).map(|q| multi_indices(n, q)).collect() }
    }

    fn unit_index(&self, a: usize, b: usize) -> usize {
        self.units.iter().position(|&u| u == (a, b)).expect("matrix unit")
    }

    fn index(&self, form: &[usize], unit: usize) -> usize {
        let q = form.len();
        let f = self.forms[q].iter().position(|x| x == form).expect("multi-index");
        f * self.units.len() + unit
    }

    fn space(&self) -> GradedSpace {
        let names = (0..=self.n)
            .map(|q| {
                self.forms[q]
                    .iter()
                    .flat_map(|form| {
                        self.units.iter().map(move |&(a, b)| {
                            if form.is_empty() {
                                format!("E{}{}", a + 1, b + 1)
                            } else {
                                format!("E{}{}*{}", a + 1, b + 1, form_name(form))
                            }
                        })
                    })
                    .collect()
            })
            .collect();
        GradedSpace::new(0, names).expect("torus basis names are unique")
    }

    /// Per-degree block-diagonal map acting on the `gl(r)` factor by `m`.
    fn on_matrix_factor(&self, shape: &Shape, m: &Matrix) -> GradedMap {
        let k = self.units.len();
        let mut blocks = BTreeMap::new();
        for q in 0..=self.n {
            let count = self.forms[q].len();
            let mut big = Matrix::zeros(k * count, k * count);
            for f in 0..count {
                for r in 0..k {
                    for c in 0..k {
                        big[(f * k + r, f * k + c)] = m[(r, c)].clone();
                    }
                }
            }
            blocks.insert(q as i32, big);
        }
        GradedMap::from_blocks(shape, 0, blocks).expect("block shapes")
    }

    /// Matrix of `σ ↦ f(E_ab)` on `gl(r)` in the matrix-unit basis.
    fn gl_operator(&self, f: impl Fn(&Matrix) -> Matrix) -> Matrix {
        let k = self.units.len();
        let mut out = Matrix::zeros(k, k);
        for (c, &(a, b)) in self.units.iter().enumerate() {
            let mut e = Matrix::zeros(self.r, self.r);
            e[(a, b)] = Scalar::one();
            let img = f(&e);
            for (row, &(x, y)) in self.units.iter().enumerate() {
                out[(row, c)] = img[(x, y)].clone();
            }
        }
        out
    }
}

/// `gl(r) ⊗ Λ•(C^n)` with zero differential, identity Gram.
pub fn torus_constants(n: usize, r: usize) -> Result<(DgLa, MetricData)> {
    torus_constants_with(n, r, BracketConvention::Graded)
}

pub fn torus_constants_with(
    n: usize,
    r: usize,
    convention: BracketConvention,
) -> Result<(DgLa, MetricData)> {
    TorusSpec { complex_dim: n, rank: r, cutoff: 0, twist: Scalar::zero() }.check()?;
    let layout = TorusLayout::new(n, r);
    let space = layout.space();
    let mut table = BracketTable::new();
    for p in 0..=n {
        for q in 0..=n - p {
            for fi in &layout.forms[p] {
                for fj in &layout.forms[q] {
                    let Some((s_ij, k_form)) = wedge(fi, fj) else { continue };
                    let (s_ji, _) = wedge(fj, fi).expect("disjoint");
                    let koszul = if (p * q) % 2 == 0 { 1 } else { -1 };
                    // coefficient on (BA) ⊗ ω_K
                    let ba_sign = match convention {
                        BracketConvention::Graded => -koszul * s_ji,
                        BracketConvention::SameWedge => -koszul * s_ij,
                    };
                    for (ua, &(a1, a2)) in layout.units.iter().enumerate() {
                        for (ub, &(b1, b2)) in layout.units.iter().enumerate() {
                            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
                            // E_{a1 a2} E_{b1 b2} = δ_{a2 b1} E_{a1 b2}
                            if a2 == b1 {
                                let k = layout.index(&k_form, layout.unit_index(a1, b2));
                                *acc.entry(k).or_default() += s_ij;
                            }
                            if b2 == a1 {
                                let k = layout.index(&k_form, layout.unit_index(b1, a2));
                                *acc.entry(k).or_default() += ba_sign;
                            }
                            let terms: Vec<(usize, Scalar)> = acc
                                .into_iter()
                                .filter(|&(_, c)| c != 0)
                                .map(|(k, c)| (k, Scalar::from_int(c)))
                                .collect();
                            if !terms.is_empty() {
                                let a = BasisRef::new(p as i32, layout.index(fi, ua));
                                let b = BasisRef::new(q as i32, layout.index(fj, ub));
                                table.insert((a, b), terms);
                            }
                        }
                    }
                }
            }
        }
    }
    let metric = MetricData::identity(space.shape());
    let l = DgLa::new(space, GradedMap::zero(1), table)?;
    Ok((l, metric))
}

/// Abelian Dolbeault complex of a flat line bundle on a 1-torus with Fourier
/// modes `m ∈ [-M, M]^2` (lexicographic, `m1` major) and
/// `d φ_m = (m1 + i·m2 + c) φ_m dz̄`.
pub fn twisted_dolbeault(cutoff: usize, twist: &Scalar) -> Result<(DgLa, MetricData)> {
    TorusSpec { complex_dim: 1, rank: 1, cutoff, twist: twist.clone() }.check()?;
    let m = cutoff as i64;
    let modes: Vec<(i64, i64)> = (-m..=m).flat_map(|a| (-m..=m).map(move |b| (a, b))).collect();
    let names0: Vec<String> = modes.iter().map(|(a, b)| format!("phi({a},{b})")).collect();
    let names1: Vec<String> = modes.iter().map(|(a, b)| format!("phi({a},{b})dzbar")).collect();
    let space = GradedSpace::new(0, vec![names0, names1])?;
    let symbols: Vec<Scalar> = modes.iter().map(|&(a, b)| &Scalar::gaussian(a, b) + twist).collect();
    let d = GradedMap::from_blocks(
        space.shape(),
        1,
        BTreeMap::from([(0, Matrix::diagonal(&symbols))]),
    )?;
    let metric = MetricData::identity(space.shape());
    Ok((DgLa::new(space, d, BracketTable::new())?, metric))
}

/// Closed-form count of lattice points with `m1 + i·m2 + c = 0`.
pub fn twisted_lattice_count(cutoff: usize, twist: &Scalar) -> usize {
    let m = cutoff as i64;
    (-m..=m)
        .flat_map(|a| (-m..=m).map(move |b| (a, b)))
        .filter(|&(a, b)| (&Scalar::gaussian(a, b) + twist).is_zero())
        .count()
}

/// Degrees 1..2 with `g¹ = ⟨x, y⟩`, `g² = ⟨u, v⟩`, `dy = u`, `[x,x] = u`,
/// `[x,y] = [y,x] = v`, plus the `Z/2` action `x ↦ −x, v ↦ −v`.
pub fn toy3() -> (DgLa, MetricData, GroupAction) {
    let space = GradedSpace::new(
        1,
        vec![vec!["x".into(), "y".into()], vec!["u".into(), "v".into()]],
    )
    .expect("toy3 names");
    let shape = space.shape().clone();
    let d = GradedMap::from_blocks(&shape, 1, BTreeMap::from([(1, Matrix::from_ints(&[&[0, 1], &[0, 0]]))]))
        .expect("toy3 differential");
    let x = BasisRef::new(1, 0);
    let y = BasisRef::new(1, 1);
    let mut table = BracketTable::new();
    table.insert((x, x), vec![(0, Scalar::one())]);
    table.insert((x, y), vec![(1, Scalar::one())]);
    table.insert((y, x), vec![(1, Scalar::one())]);
    let l = DgLa::new(space, d, table).expect("toy3 dgla");
    let g = GradedMap::from_blocks(
        &shape,
        0,
        BTreeMap::from([
            (1, Matrix::from_ints(&[&[-1, 0], &[0, 1]])),
            (2, Matrix::from_ints(&[&[1, 0], &[0, -1]])),
        ]),
    )
    .expect("toy3 action");
    let action = GroupAction::new(vec![g], Some(vec![2]));
    (l, MetricData::identity(&shape), action)
}

fn torus_layout_of(l: &DgLa) -> Result<TorusLayout> {
    let shape = l.shape();
    let r2 = shape.dim(0);
    let r = (1..=MAX_RANK).find(|r| r * r == r2);
    let n = shape.max_degree();
    match r {
        Some(r) if shape.min_degree == 0 && n >= 1 && n as usize <= MAX_COMPLEX_DIM => {
            let layout = TorusLayout::new(n as usize, r);
            if &layout.space() == l.space() {
                Ok(layout)
            } else {
                Err(Error::input("dgLa basis does not match the torus-constants layout"))
            }
        }
        _ => Err(Error::input("dgLa is not a torus-constants dgLa")),
    }
}

/// Whether the conjugating matrix preserves the identity Gram (`h^†h = λ·Id`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugationInfo {
    pub unitary_up_to_scale: bool,
}

/// The action `A⊗ω ↦ (h⁻¹ A h)⊗ω` on a torus-constants dgLa.
pub fn conjugation_action(l: &DgLa, h: &Matrix) -> Result<(GroupAction, ConjugationInfo)> {
    let layout = torus_layout_of(l)?;
    if h.shape() != (layout.r, layout.r) {
        return Err(Error::input(format!(
            "conjugating matrix must be {0}x{0}, got {1}x{2}",
            layout.r,
            h.rows(),
            h.cols()
        )));
    }
    let h_inv = h.inverse().ok_or_else(|| Error::input("conjugating matrix is singular"))?;
    let hh = h.conj_transpose().mul(h);
    let lambda = hh[(0, 0)].clone();
    let unitary_up_to_scale = hh == Matrix::identity(layout.r).scale(&lambda);
    let gl = layout.gl_operator(|e| h_inv.mul(e).mul(h));
    let g = layout.on_matrix_factor(l.shape(), &gl);
    Ok((GroupAction::new(vec![g], None), ConjugationInfo { unitary_up_to_scale }))
}

/// The inner derivation `A⊗ω ↦ [h, A]⊗ω` on a torus-constants dgLa.
pub fn inner_derivation(l: &DgLa, h: &Matrix) -> Result<InfinitesimalAction> {
    let layout = torus_layout_of(l)?;
    if h.shape() != (layout.r, layout.r) {
        return Err(Error::input(format!("derivation matrix must be {0}x{0}", layout.r)));
    }
    let gl = layout.gl_operator(|e| h.mul(e).sub(&e.mul(h)));
    Ok(InfinitesimalAction::new(vec![layout.on_matrix_factor(l.shape(), &gl)]))
}

/// The grading derivation: multiplication by `q` on degree `q`.
pub fn degree_weight_derivation(l: &DgLa) -> InfinitesimalAction {
    let shape = l.shape();
    let blocks = shape
        .degrees()
        .map(|q| (q, Matrix::identity(shape.dim(q)).scale(&Scalar::from_int(q as i64))))
        .collect();
    InfinitesimalAction::new(vec![GradedMap::from_blocks(shape, 0, blocks).expect("diagonal blocks")])
}
