//! The standard model on ℓ²(F⁺_{n₁}×⋯×F⁺_{n_k}): exact action on basis
//! vectors and its compression to total degree ≤ D.
//!
//! Every matrix built here carries a creator-degree m. Identities between
//! such matrices are only asserted on basis vectors of degree ≤ D − m.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eye, zeros, CMat};
use crate::mwords::{enumerate_basis, MultiWord};
use crate::phases::{agg, Phase, PhaseMatrix};
use crate::rewrite::{monomial_letters, Letter, StarPolynomial};

/// Action of one generator on χ_α (no truncation).
///
/// S_{i,s} prepends g_s^i to α_i with phase ∏_{j<i} 𝝀_{i,j}(s,α_j);
/// S*_{i,s} strips a leading g_s^i with the conjugate phase, or gives zero.
pub fn symbolic_apply(lambda: &PhaseMatrix, letter: Letter, chi: &MultiWord) -> Option<(Phase, MultiWord)> {
    let i = letter.block;
    let s = letter.index;
    let mut phase = Phase::ONE;
    for j in 1..i {
        phase = phase * agg(lambda, i, s, j, &chi.part(j).letters);
    }
    if letter.starred {
        let (first, rest) = chi.strip_leftmost(i)?;
        (first == s).then(|| (phase.conj(), rest))
    } else {
        Some((phase, chi.prepend_unchecked(i, s)))
    }
}

/// Applies a letter sequence (rightmost letter first).
pub fn apply_word(lambda: &PhaseMatrix, word: &[Letter], chi: &MultiWord) -> Option<(Phase, MultiWord)> {
    let mut phase = Phase::ONE;
    let mut cur = chi.clone();
    for &l in word.iter().rev() {
        let (p, next) = symbolic_apply(lambda, l, &cur)?;
        phase = phase * p;
        cur = next;
    }
    Some((phase, cur))
}

/// p(S,S*)χ as a sparse vector.
pub fn apply_polynomial(lambda: &PhaseMatrix, p: &StarPolynomial, chi: &MultiWord) -> BTreeMap<MultiWord, Complex64> {
    let mut out: BTreeMap<MultiWord, Complex64> = BTreeMap::new();
    for ((a, b), &(ph, sc)) in p.raw_terms() {
        if let Some((q, img)) = apply_word(lambda, &monomial_letters(a, b), chi) {
            *out.entry(img).or_default() += (ph * q).to_complex() * sc;
        }
    }
    out.retain(|_, v| *v != Complex64::new(0.0, 0.0));
    out
}

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub matrix: CMat,
    pub creator_degree: usize,
    pub tag: String,
}

#[derive(Debug)]
pub struct TruncatedModel {
    lambda: PhaseMatrix,
    max_degree: usize,
    basis: Vec<MultiWord>,
    index: HashMap<MultiWord, usize>,
    degrees: Vec<usize>,
    shifts: OnceLock<Vec<Vec<CMat>>>,
}

impl Clone for TruncatedModel {
    fn clone(&self) -> Self {
        TruncatedModel {
            lambda: self.lambda.clone(),
            max_degree: self.max_degree,
            basis: self.basis.clone(),
            index: self.index.clone(),
            degrees: self.degrees.clone(),
            shifts: OnceLock::new(),
        }
    }
}

impl TruncatedModel {
    pub fn new(lambda: &PhaseMatrix, max_degree: usize) -> Result<Self> {
        let basis = enumerate_basis(lambda.n(), max_degree)?;
        let index = basis.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let degrees = basis.iter().map(MultiWord::degree).collect();
        Ok(TruncatedModel {
            lambda: lambda.clone(),
            max_degree,
            basis,
            index,
            degrees,
            shifts: OnceLock::new(),
        })
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

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[MultiWord] {
        &self.basis
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn index_of(&self, w: &MultiWord) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Indices of basis vectors of degree ≤ D − m (empty when m > D).
    pub fn interior(&self, m: usize) -> Vec<usize> {
        if m > self.max_degree {
            return Vec::new();
        }
        let cap = self.max_degree - m;
        (0..self.dim()).filter(|&i| self.degrees[i] <= cap).collect()
    }

    pub fn symbolic_apply(&self, letter: Letter, chi: &MultiWord) -> Option<(Phase, MultiWord)> {
        symbolic_apply(&self.lambda, letter, chi)
    }

    fn compute_letter(&self, letter: Letter) -> CMat {
        let mut m = zeros(self.dim(), self.dim());
        for (col, chi) in self.basis.iter().enumerate() {
            if let Some((ph, img)) = self.symbolic_apply(letter, chi) {
                if let Some(row) = self.index_of(&img) {
                    m[(row, col)] = ph.to_complex();
                }
            }
        }
        m
    }

    /// Truncated S_{i,s}.
    pub fn shift(&self, i: usize, s: usize) -> &CMat {
        let all = self.shifts.get_or_init(|| {
            (1..=self.k())
                .map(|b| (1..=self.n()[b - 1]).map(|t| self.compute_letter(Letter::s(b, t))).collect())
                .collect()
        });
        &all[i - 1][s - 1]
    }

    /// Truncated matrix of one letter. Starred letters are exact adjoints.
    pub fn letter_matrix(&self, letter: Letter) -> CMat {
        let s = self.shift(letter.block, letter.index);
        if letter.starred {
            s.adjoint()
        } else {
            s.clone()
        }
    }

    /// Product of per-letter truncated matrices.
    pub fn word_matrix(&self, word: &[Letter]) -> OperatorMatrix {
        let mut m = eye(self.dim());
        for &l in word {
            m = m * self.letter_matrix(l);
        }
        OperatorMatrix {
            matrix: m,
            creator_degree: word.len(),
            tag: format!("word of length {}", word.len()),
        }
    }

    /// Compression P_D p(S,S*) P_D computed from the exact action.
    pub fn build_matrix(&self, p: &StarPolynomial) -> Result<OperatorMatrix> {
        if p.n() != self.n() {
            return Err(Error::Usage(format!(
                "polynomial over arities {:?}, model over {:?}",
                p.n(),
                self.n()
            )));
        }
        let mut m = zeros(self.dim(), self.dim());
        for ((a, b), &(ph, sc)) in p.raw_terms() {
            let word = monomial_letters(a, b);
            let coeff = ph.to_complex() * sc;
            for (col, chi) in self.basis.iter().enumerate() {
                if let Some((q, img)) = apply_word(&self.lambda, &word, chi) {
                    if let Some(row) = self.index_of(&img) {
                        m[(row, col)] += q.to_complex() * coeff;
                    }
                }
            }
        }
        Ok(OperatorMatrix {
            matrix: m,
            creator_degree: p.creator_degree(),
            tag: "polynomial".into(),
        })
    }

    /// Φ_{rS_i}(X) = r² Σ_s S_{i,s} X S*_{i,s}.
    pub fn phi(&self, i: usize, x: &CMat, r: f64) -> CMat {
        let mut out = zeros(x.nrows(), x.ncols());
        for s in 1..=self.n()[i - 1] {
            let sh = self.shift(i, s);
            out += sh * x * sh.adjoint();
        }
        out * Complex64::new(r * r, 0.0)
    }

    /// ∏_{i∈C}(I − r²Σ_s S_{i,s}S*_{i,s}).
    pub fn defect_operator(&self, r: f64, subset: &[usize]) -> Result<OperatorMatrix> {
        if subset.is_empty() {
            return Err(Error::Usage("defect subset must be nonempty".into()));
        }
        if let Some(&i) = subset.iter().find(|&&i| i == 0 || i > self.k()) {
            return Err(Error::Usage(format!("block {i} out of range 1..{}", self.k())));
        }
        let id = eye(self.dim());
        let mut m = id.clone();
        for &i in subset {
            m = &m * (&id - self.phi(i, &id, r));
        }
        Ok(OperatorMatrix {
            matrix: m,
            creator_degree: 2 * subset.len(),
            tag: format!("defect r={r} C={subset:?}"),
        })
    }

    pub fn vacuum_projection(&self) -> CMat {
        let mut p = zeros(self.dim(), self.dim());
        p[(0, 0)] = Complex64::new(1.0, 0.0);
        p
    }

    /// q_m(S) P_ℂ p_m(S)* for coefficient vectors over the basis, where
    /// f_m(S) = Σ_{|α|≤m} f_α S_α.
    pub fn rank_one_approx(&self, p: &[Complex64], q: &[Complex64], m: usize) -> Result<OperatorMatrix> {
        if m > self.max_degree {
            return Err(Error::Usage(format!("degree cap {m} exceeds truncation {}", self.max_degree)));
        }
        if p.len() != self.dim() || q.len() != self.dim() {
            return Err(Error::Usage("coefficient vectors must have model dimension".into()));
        }
        let empty = MultiWord::empty(self.k());
        let analytic = |f: &[Complex64]| {
            let mut poly = StarPolynomial::zero(self.n());
            for (idx, w) in self.basis.iter().enumerate() {
                if w.degree() <= m {
                    poly.add_term((w.clone(), empty.clone()), Phase::ONE, f[idx]);
                }
            }
            poly
        };
        let qm = self.build_matrix(&analytic(q))?.matrix;
        let pm = self.build_matrix(&analytic(p))?.matrix;
        Ok(OperatorMatrix {
            matrix: qm * self.vacuum_projection() * pm.adjoint(),
            creator_degree: 2 * m,
            tag: format!("rank-one approximant m={m}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, hermitian_eigen, principal, rank};
    use crate::phases::{validate_lambda, LambdaEntry};
    use crate::rewrite::reduce_word;

    fn cfg_a() -> PhaseMatrix {
        validate_lambda(&[1, 1], &[LambdaEntry::new(1, 2, 1, 1, 1, 4)]).unwrap()
    }

    #[test]
    fn shift_action_examples() {
        let l = cfg_a();
        let chi: MultiWord = "1|e".parse().unwrap();
        let (ph, img) = symbolic_apply(&l, Letter::s(2, 1), &chi).unwrap();
        assert_eq!(ph.to_complex(), c(0., -1.));
        assert_eq!(img.to_string(), "1|1");
        assert!(symbolic_apply(&l, Letter::star(1, 1), &"e|1".parse().unwrap()).is_none());
        let (ph, img) = symbolic_apply(&l, Letter::s(1, 1), &"1|1".parse().unwrap()).unwrap();
        assert!(ph.is_one());
        assert_eq!(img.to_string(), "1.1|1");
    }

    #[test]
    fn build_matrix_examples() {
        let l1 = PhaseMatrix::trivial(&[1]).unwrap();
        let m = TruncatedModel::new(&l1, 2).unwrap();
        assert_eq!(m.build_matrix(&StarPolynomial::identity(&[1])).unwrap().matrix, eye(3));
        let s = reduce_word(&l1, &[Letter::s(1, 1)]);
        let p = s.add(&reduce_word(&l1, &[Letter::star(1, 1)]));
        let a = m.build_matrix(&p).unwrap().matrix;
        let expect = CMat::from_row_slice(3, 3, &[c(0., 0.), c(1., 0.), c(0., 0.), c(1., 0.), c(0., 0.), c(1., 0.), c(0., 0.), c(1., 0.), c(0., 0.)]);
        assert_eq!(a, expect);
        let (ev, _) = hermitian_eigen(&a);
        let want = [-2f64.sqrt(), 0.0, 2f64.sqrt()];
        for (x, y) in ev.iter().zip(want) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn letter_product_loses_top_degree() {
        let m = TruncatedModel::new(&cfg_a(), 2).unwrap();
        let w = m.word_matrix(&[Letter::star(1, 1), Letter::s(1, 1)]).matrix;
        assert_eq!(rank(&w, 1e-12), 3);
        for (i, d) in m.degrees().iter().enumerate() {
            let expect = if *d == 2 { 0.0 } else { 1.0 };
            assert_eq!(w[(i, i)], c(expect, 0.));
        }
        let sym = m.build_matrix(&reduce_word(&cfg_a(), &[Letter::star(1, 1), Letter::s(1, 1)])).unwrap();
        assert_eq!(sym.matrix, eye(6));
    }

    #[test]
    fn defect_examples() {
        let l = cfg_a();
        let m = TruncatedModel::new(&l, 3).unwrap();
        let d = m.defect_operator(1.0, &[1, 2]).unwrap().matrix;
        let int = m.interior(1);
        let p = principal(&d, &int);
        let mut want = zeros(int.len(), int.len());
        want[(0, 0)] = c(1., 0.);
        assert_eq!(p, want);
        assert_eq!(m.defect_operator(0.0, &[1, 2]).unwrap().matrix, eye(m.dim()));
        let l1 = PhaseMatrix::trivial(&[1]).unwrap();
        let m1 = TruncatedModel::new(&l1, 2).unwrap();
        let d1 = m1.defect_operator(1.0, &[1]).unwrap().matrix;
        assert_eq!(d1, m1.vacuum_projection());
        assert!(m.defect_operator(1.0, &[]).is_err());
    }

    #[test]
    fn rank_one_examples() {
        let l1 = PhaseMatrix::trivial(&[1]).unwrap();
        let m = TruncatedModel::new(&l1, 4).unwrap();
        let mut e0 = vec![c(0., 0.); m.dim()];
        e0[0] = c(1., 0.);
        assert_eq!(m.rank_one_approx(&e0, &e0, 0).unwrap().matrix, m.vacuum_projection());
        let g: Vec<Complex64> = (0..m.dim()).map(|j| c(0.5f64.powi(j as i32), 0.)).collect();
        let r = m.rank_one_approx(&g, &g, 4).unwrap().matrix;
        for a in 0..5 {
            for b in 0..5 {
                assert!((r[(a, b)] - c(0.5f64.powi((a + b) as i32), 0.)).norm() < 1e-15);
            }
        }
        let z = vec![c(0., 0.); m.dim()];
        assert_eq!(m.rank_one_approx(&g, &z, 3).unwrap().matrix, zeros(5, 5));
        assert!(m.rank_one_approx(&g, &g, 5).is_err());
    }
}
