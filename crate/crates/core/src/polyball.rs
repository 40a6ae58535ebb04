//! Tuples of row operators on ℂ^h: membership in the regular Λ-polyball,
//! the doubly Λ-commuting relations, and purity.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eye, min_eigenvalue, spectral_norm, zeros, CMat};
use crate::mwords::MultiWord;
use crate::phases::PhaseMatrix;
use crate::rewrite::{Letter, StarPolynomial};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Tolerances {
    /// Algebraic residuals.
    pub residual: f64,
    /// Eigenvalue floors in positivity checks.
    pub eigen: f64,
    /// Rank decisions.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { residual: 1e-10, eigen: 1e-9, rank: 1e-9 }
    }
}

#[derive(Clone, Debug)]
pub struct RowTuple {
    lambda: PhaseMatrix,
    dim: usize,
    ops: Vec<Vec<CMat>>,
}

impl RowTuple {
    pub fn new(lambda: &PhaseMatrix, ops: Vec<Vec<CMat>>) -> Result<Self> {
        if ops.len() != lambda.k() {
            return Err(Error::Usage(format!("{} blocks given, k = {}", ops.len(), lambda.k())));
        }
        let dim = ops.first().and_then(|b| b.first()).map_or(0, |m| m.nrows());
        for (i, block) in ops.iter().enumerate() {
            if block.len() != lambda.n()[i] {
                return Err(Error::Usage(format!(
                    "block {} has {} operators, n_{} = {}",
                    i + 1,
                    block.len(),
                    i + 1,
                    lambda.n()[i]
                )));
            }
            if let Some(m) = block.iter().find(|m| m.nrows() != dim || m.ncols() != dim) {
                return Err(Error::Usage(format!(
                    "operator of shape {}x{} in block {}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols(),
                    i + 1
                )));
            }
        }
        Ok(RowTuple { lambda: lambda.clone(), dim, ops })
    }

    pub fn zero(lambda: &PhaseMatrix, dim: usize) -> Self {
        let ops = lambda.n().iter().map(|&a| vec![zeros(dim, dim); a]).collect();
        RowTuple { lambda: lambda.clone(), dim, ops }
    }

    pub fn lambda(&self) -> &PhaseMatrix {
        &self.lambda
    }

    pub fn k(&self) -> usize {
        self.lambda.k()
    }

    pub fn n(&self) -> &[usize] {
        self.lambda.n()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[Vec<CMat>] {
        &self.ops
    }

    /// T_{i,s}, 1-based.
    pub fn t(&self, i: usize, s: usize) -> &CMat {
        &self.ops[i - 1][s - 1]
    }

    pub fn map(&self, f: impl Fn(usize, usize, &CMat) -> CMat) -> Self {
        let ops = self
            .ops
            .iter()
            .enumerate()
            .map(|(i, b)| b.iter().enumerate().map(|(s, m)| f(i + 1, s + 1, m)).collect())
            .collect();
        RowTuple { lambda: self.lambda.clone(), dim: self.dim, ops }
    }

    pub fn scaled(&self, r: f64) -> Self {
        self.map(|_, _, m| m * Complex64::new(r, 0.0))
    }

    /// W* T W for unitary W.
    pub fn conjugate_by(&self, w: &CMat) -> Self {
        self.map(|_, _, m| w.adjoint() * m * w)
    }

    /// Φ_{rT_i}(X) = r² Σ_s T_{i,s} X T*_{i,s}.
    pub fn phi(&self, i: usize, x: &CMat, r: f64) -> CMat {
        let mut out = zeros(self.dim, self.dim);
        for t in &self.ops[i - 1] {
            out += t * x * t.adjoint();
        }
        out * Complex64::new(r * r, 0.0)
    }

    /// (id − Φ_{rT_i}) applied for each i in `subset`.
    pub fn mixed_defect(&self, subset: &[usize], r: f64) -> CMat {
        let mut x = eye(self.dim);
        for &i in subset {
            x = &x - self.phi(i, &x, r);
        }
        x
    }

    /// Δ_{rT}(I) = (id−Φ_{rT_1})∘⋯∘(id−Φ_{rT_k})(I).
    pub fn defect(&self, r: f64) -> CMat {
        let all: Vec<usize> = (1..=self.k()).collect();
        self.mixed_defect(&all, r)
    }

    /// T_{i,α} = T_{i,a₁}⋯T_{i,a_m}.
    pub fn block_word(&self, i: usize, letters: &[usize]) -> CMat {
        let mut m = eye(self.dim);
        for &s in letters {
            m = m * self.t(i, s);
        }
        m
    }

    /// T_α = T_{1,α₁}⋯T_{k,α_k}.
    pub fn multiword(&self, alpha: &MultiWord) -> CMat {
        let mut m = eye(self.dim);
        for p in alpha.parts() {
            if !p.is_empty() {
                m = m * self.block_word(p.block, &p.letters);
            }
        }
        m
    }

    /// T*_β = (T_{1,β₁})*⋯(T_{k,β_k})*.
    pub fn multiword_star(&self, beta: &MultiWord) -> CMat {
        let mut m = eye(self.dim);
        for p in beta.parts() {
            if !p.is_empty() {
                m = m * self.block_word(p.block, &p.letters).adjoint();
            }
        }
        m
    }

    /// Product of letters with starred letters read as adjoints.
    pub fn letter_product(&self, word: &[Letter]) -> CMat {
        let mut m = eye(self.dim);
        for l in word {
            let t = self.t(l.block, l.index);
            m = if l.starred { m * t.adjoint() } else { m * t };
        }
        m
    }

    /// p(T,T*) with each monomial read as T_α T*_β.
    pub fn evaluate(&self, p: &StarPolynomial) -> Result<CMat> {
        if p.n() != self.n() {
            return Err(Error::Usage("polynomial and tuple have different arities".into()));
        }
        let mut out = zeros(self.dim, self.dim);
        for m in p.terms() {
            out += self.multiword(&m.creators) * self.multiword_star(&m.annihilators) * m.coefficient();
        }
        Ok(out)
    }

    /// max ‖T_{i,s}T_{j,t} − λ_{i,j}(s,t)T_{j,t}T_{i,s}‖ over i < j.
    pub fn commuting_residual(&self) -> f64 {
        self.pair_residual(|a, b, lam| a * b - (b * a) * lam)
    }

    /// max ‖T*_{i,s}T_{j,t} − conj(λ_{i,j}(s,t))T_{j,t}T*_{i,s}‖ over i ≠ j.
    pub fn doubly_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 1..=self.k() {
            for j in 1..=self.k() {
                if i == j {
                    continue;
                }
                for s in 1..=self.n()[i - 1] {
                    for t in 1..=self.n()[j - 1] {
                        let lam = self.lambda.lambda(i, j, s, t).to_complex().conj();
                        let a = self.t(i, s).adjoint();
                        let b = self.t(j, t);
                        worst = worst.max(spectral_norm(&(&a * b - (b * &a) * lam)));
                    }
                }
            }
        }
        worst
    }

    fn pair_residual(&self, f: impl Fn(&CMat, &CMat, Complex64) -> CMat) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 1..=self.k() {
            for j in (i + 1)..=self.k() {
                for s in 1..=self.n()[i - 1] {
                    for t in 1..=self.n()[j - 1] {
                        let lam = self.lambda.lambda(i, j, s, t).to_complex();
                        worst = worst.max(spectral_norm(&f(self.t(i, s), self.t(j, t), lam)));
                    }
                }
            }
        }
        worst
    }

    /// Σ_{|p|=q} Φ^{p₁}_{T₁}∘⋯∘Φ^{p_k}_{T_k}(X), for q = 0..=max_q.
    pub fn graded_phi_sums(&self, x: &CMat, max_q: usize) -> Vec<CMat> {
        // a_j[q] = a_{j+1}[q] + Φ_j(a_j[q−1]), with a_{k+1}[q] = [q = 0]·X
        let mut a: Vec<CMat> = (0..=max_q).map(|q| if q == 0 { x.clone() } else { zeros(self.dim, self.dim) }).collect();
        for j in (1..=self.k()).rev() {
            for q in 1..=max_q {
                let step = self.phi(j, &a[q - 1], 1.0);
                a[q] += step;
            }
        }
        a
    }

    /// Smallest d with T_{1,β₁}⋯T_{k,β_k} = 0 whenever Σ|β_i| > d.
    pub fn joint_nilpotency_order(&self) -> Option<usize> {
        let k = self.k() as f64;
        let mut x = eye(self.dim);
        for q in 1..=(self.dim + 1) {
            let mut next = zeros(self.dim, self.dim);
            for i in 1..=self.k() {
                next += self.phi(i, &x, 1.0);
            }
            x = next;
            if spectral_norm(&x) <= NIL_TOL * k.powi(q as i32) {
                return Some(q - 1);
            }
        }
        None
    }
}

const NIL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct SubsetEigen {
    pub subset: Vec<usize>,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridPoint {
    pub r: f64,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PurityReport {
    pub is_pure: bool,
    pub max_power: usize,
    /// ‖Φ^P_{T_i}(I)‖ per block.
    pub norms: Vec<f64>,
    /// First p with Φ^p_{T_i}(I) = 0, when that happens.
    pub nilpotency_orders: Vec<Option<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub row_norms: Vec<f64>,
    pub is_row_contraction: bool,
    pub is_lambda_commuting: bool,
    pub commuting_residual: f64,
    pub is_doubly: bool,
    pub doubly_residual: f64,
    pub positivity: Vec<SubsetEigen>,
    pub r_grid: Vec<GridPoint>,
    pub r_grid_consistent: bool,
    pub is_member: bool,
    pub is_pure: bool,
    pub purity: PurityReport,
}

pub const DEFAULT_MAX_POWER: usize = 256;

pub fn phi_map(t: &RowTuple, i: usize, x: &CMat, r: f64) -> Result<CMat> {
    if x.nrows() != t.dim() || x.ncols() != t.dim() {
        return Err(Error::Usage(format!(
            "X is {}x{}, tuple acts on dimension {}",
            x.nrows(),
            x.ncols(),
            t.dim()
        )));
    }
    if i == 0 || i > t.k() {
        return Err(Error::Usage(format!("block {i} out of range 1..{}", t.k())));
    }
    Ok(t.phi(i, x, r))
}

pub fn check_doubly(t: &RowTuple, tol: &Tolerances) -> (bool, f64) {
    let r = t.doubly_residual();
    (r <= tol.residual, r)
}

pub fn check_pure(t: &RowTuple, tol: &Tolerances, max_power: usize) -> Result<PurityReport> {
    if max_power == 0 {
        return Err(Error::Usage("max power must be at least 1".into()));
    }
    let mut norms = Vec::new();
    let mut orders = Vec::new();
    for i in 1..=t.k() {
        let mut x = eye(t.dim());
        let mut order = None;
        for p in 1..=max_power {
            x = t.phi(i, &x, 1.0);
            if order.is_none() && p <= t.dim().max(1) && spectral_norm(&x) <= NIL_TOL {
                order = Some(p);
            }
        }
        if t.dim() == 0 {
            order = Some(0);
        }
        norms.push(spectral_norm(&x));
        orders.push(order);
    }
    let is_pure = norms.iter().all(|&v| v <= tol.residual);
    Ok(PurityReport { is_pure, max_power, norms, nilpotency_orders: orders })
}

/// Subsets of {1..k} as sorted index lists, in binary order.
pub fn subsets(k: usize) -> Vec<Vec<usize>> {
    (0..(1usize << k))
        .map(|mask| (1..=k).filter(|&i| mask & (1 << (i - 1)) != 0).collect())
        .collect()
}

pub fn check_membership(t: &RowTuple, tol: &Tolerances) -> MembershipReport {
    let id = eye(t.dim());
    let row_norms: Vec<f64> = (1..=t.k()).map(|i| spectral_norm(&t.phi(i, &id, 1.0))).collect();
    let is_row_contraction = row_norms.iter().all(|&v| v <= 1.0 + tol.residual);
    let commuting_residual = t.commuting_residual();
    let is_lambda_commuting = commuting_residual <= tol.residual;
    let doubly_residual = t.doubly_residual();
    let is_doubly = doubly_residual <= tol.residual;

    let positivity: Vec<SubsetEigen> = subsets(t.k())
        .into_iter()
        .map(|subset| {
            let d = t.mixed_defect(&subset, 1.0);
            SubsetEigen { min_eigenvalue: min_eigenvalue(&d), subset }
        })
        .collect();
    let positive = positivity.iter().all(|p| p.min_eigenvalue >= -tol.eigen);

    let r_grid: Vec<GridPoint> = (1..=9)
        .map(|j| {
            let r = j as f64 / 10.0;
            GridPoint { r, min_eigenvalue: min_eigenvalue(&t.defect(r)) }
        })
        .collect();
    let grid_ok = r_grid.iter().all(|p| p.min_eigenvalue >= -tol.eigen);
    let is_member = is_lambda_commuting && positive;
    let purity = check_pure(t, tol, DEFAULT_MAX_POWER).expect("positive max power");

    MembershipReport {
        row_norms,
        is_row_contraction,
        is_lambda_commuting,
        commuting_residual,
        is_doubly,
        doubly_residual,
        positivity,
        r_grid,
        r_grid_consistent: !(is_member && !grid_ok),
        is_member,
        is_pure: purity.is_pure,
        purity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::phases::{validate_lambda, LambdaEntry};

    fn clock_shift(m: usize) -> (CMat, CMat) {
        let w = Complex64::from_polar(1.0, std::f64::consts::TAU / m as f64);
        let mut cl = zeros(m, m);
        let mut x = zeros(m, m);
        for j in 0..m {
            cl[(j, j)] = w.powu(j as u32);
            x[((j + 1) % m, j)] = c(1., 0.);
        }
        (cl, x)
    }

    fn twist(turns: i64) -> PhaseMatrix {
        validate_lambda(&[1, 1], &[LambdaEntry::new(1, 2, 1, 1, turns, 4)]).unwrap()
    }

    fn jordan() -> CMat {
        let mut j = zeros(2, 2);
        j[(0, 1)] = c(1., 0.);
        j
    }

    #[test]
    fn phi_examples() {
        let l = PhaseMatrix::trivial(&[1]).unwrap();
        let z = RowTuple::zero(&l, 3);
        assert_eq!(phi_map(&z, 1, &eye(3), 1.0).unwrap(), zeros(3, 3));
        let (u, _) = clock_shift(3);
        let t = RowTuple::new(&l, vec![vec![u]]).unwrap();
        assert!((phi_map(&t, 1, &eye(3), 1.0).unwrap() - eye(3)).norm() < 1e-14);
        let j = RowTuple::new(&l, vec![vec![jordan()]]).unwrap();
        let p = phi_map(&j, 1, &eye(2), 1.0).unwrap();
        assert_eq!(p[(0, 0)], c(1., 0.));
        assert_eq!(p[(1, 1)], c(0., 0.));
        assert!(phi_map(&j, 1, &eye(3), 1.0).is_err());
    }

    #[test]
    fn torus_is_member_not_pure() {
        let (cl, x) = clock_shift(4);
        let t = RowTuple::new(&twist(1), vec![vec![cl.clone()], vec![x.clone()]]).unwrap();
        let rep = check_membership(&t, &Tolerances::default());
        assert!(rep.is_member && !rep.is_pure && rep.is_doubly);
        for p in &rep.positivity[1..] {
            assert!(p.min_eigenvalue.abs() < 1e-12);
        }
        let bad = RowTuple::new(&twist(-1), vec![vec![cl], vec![x]]).unwrap();
        let rep = check_membership(&bad, &Tolerances::default());
        assert!((rep.commuting_residual - 2.0).abs() < 1e-12);
        assert!(!rep.is_member);
    }

    #[test]
    fn zero_tuple() {
        let t = RowTuple::zero(&twist(1), 2);
        let rep = check_membership(&t, &Tolerances::default());
        assert!(rep.is_member && rep.is_pure && rep.is_doubly);
        assert_eq!(t.defect(1.0), eye(2));
    }

    #[test]
    fn purity_examples() {
        let l = PhaseMatrix::trivial(&[1]).unwrap();
        let mut j3 = zeros(3, 3);
        j3[(0, 1)] = c(1., 0.);
        j3[(1, 2)] = c(1., 0.);
        let t = RowTuple::new(&l, vec![vec![j3]]).unwrap();
        let rep = check_pure(&t, &Tolerances::default(), 10).unwrap();
        assert!(rep.is_pure);
        assert_eq!(rep.nilpotency_orders, vec![Some(3)]);
        let (u, _) = clock_shift(3);
        let t = RowTuple::new(&l, vec![vec![u.clone()]]).unwrap();
        let rep = check_pure(&t, &Tolerances::default(), 10).unwrap();
        assert!(!rep.is_pure && (rep.norms[0] - 1.0).abs() < 1e-12);
        let t = RowTuple::new(&l, vec![vec![u * c(0.5, 0.)]]).unwrap();
        let rep = check_pure(&t, &Tolerances::default(), 40).unwrap();
        assert!(rep.is_pure && rep.nilpotency_orders == vec![None]);
        assert!(check_pure(&t, &Tolerances::default(), 0).is_err());
    }

    #[test]
    fn doubly_examples() {
        let (cl, x) = clock_shift(4);
        let t = RowTuple::new(&twist(1), vec![vec![cl], vec![x]]).unwrap();
        assert!(check_doubly(&t, &Tolerances::default()).0);
        assert!(check_doubly(&RowTuple::zero(&twist(1), 3), &Tolerances::default()).0);
    }

    #[test]
    fn joint_order_of_jordan() {
        let l = PhaseMatrix::trivial(&[1]).unwrap();
        let t = RowTuple::new(&l, vec![vec![jordan()]]).unwrap();
        assert_eq!(t.joint_nilpotency_order(), Some(1));
        assert_eq!(RowTuple::zero(&l, 2).joint_nilpotency_order(), Some(0));
    }
}
