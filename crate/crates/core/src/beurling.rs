//! Co-invariant and invariant subspaces of the model ℓ²⊗K, K = ℂ^aux:
//! the span identity for co-invariant subspaces, Beurling-type tests, the
//! factorization Y = AA* with A multi-analytic, and compression models.
//!
//! Ambient coordinates are b·aux + j for basis index b. Co-invariance is
//! exact under truncation (adjoints lower degree); invariance carries a
//! buffer b and is asserted on degrees ≤ D − b only.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::berezin::build_kernel;
use crate::error::{Error, Result};
use crate::fockmodel::TruncatedModel;
use crate::linalg::{
    eye, kron_identity, lifted_apply, lifted_apply_adjoint, min_eigenvalue, norm_on_columns, orthonormal_range,
    principal, psd_frame, rank, singular_values, span_defect, spectral_norm, zeros, CMat,
};
use crate::mwords::{words_of_multidegree, MultiWord};
use crate::polyball::{check_membership, RowTuple, Tolerances};
use crate::sampling::{compress, gaussian_matrix, hstack, Prng};
use crate::wold::{trace_fingerprint, Verdict, FINGERPRINT_LENGTH};

/// Orthonormal columns allowed to deviate from Q*Q = I by this much.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SubspaceHandle {
    model: TruncatedModel,
    aux: usize,
    q: CMat,
    /// Rank and condition number of the vectors it was built from.
    pub input_rank: usize,
    pub conditioning: f64,
}

impl SubspaceHandle {
    /// Orthonormalizes the columns of `vectors`, dropping directions with
    /// singular value ≤ tol.
    pub fn from_vectors(model: &TruncatedModel, aux: usize, vectors: &CMat, tol: f64) -> Result<Self> {
        if aux == 0 {
            return Err(Error::Usage("auxiliary dimension must be at least 1".into()));
        }
        if vectors.nrows() != model.dim() * aux {
            return Err(Error::Usage(format!(
                "vectors have {} coordinates, the model has {}",
                vectors.nrows(),
                model.dim() * aux
            )));
        }
        let sv = singular_values(vectors);
        let kept: Vec<f64> = sv.iter().copied().filter(|&s| s > tol).collect();
        let conditioning = match (kept.first(), kept.last()) {
            (Some(a), Some(b)) => a / b,
            _ => f64::INFINITY,
        };
        Ok(SubspaceHandle {
            model: model.clone(),
            aux,
            q: orthonormal_range(vectors, tol),
            input_rank: kept.len(),
            conditioning,
        })
    }

    pub fn from_orthonormal(model: &TruncatedModel, aux: usize, q: CMat) -> Result<Self> {
        if q.nrows() != model.dim() * aux {
            return Err(Error::Usage("frame does not match the model".into()));
        }
        let r = spectral_norm(&(q.adjoint() * &q - eye(q.ncols())));
        if r > ORTHONORMAL_TOL {
            return Err(Error::Usage(format!("columns are not orthonormal (residual {r:.3e})")));
        }
        Ok(SubspaceHandle { model: model.clone(), aux, input_rank: q.ncols(), conditioning: 1.0, q })
    }

    /// Range of a Hermitian Y, by eigenvalues above the rank tolerance.
    pub fn from_range(model: &TruncatedModel, aux: usize, y: &CMat, tol: f64) -> Result<Self> {
        let (v, _) = psd_frame(y, tol);
        Self::from_orthonormal(model, aux, v)
    }

    pub fn model(&self) -> &TruncatedModel {
        &self.model
    }

    pub fn aux(&self) -> usize {
        self.aux
    }

    pub fn q(&self) -> &CMat {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.ncols()
    }

    pub fn projector(&self) -> CMat {
        &self.q * self.q.adjoint()
    }

    /// Ambient coordinates whose Fock degree is ≤ D − m.
    pub fn interior(&self, m: usize) -> Vec<usize> {
        let r = self.aux;
        self.model.interior(m).into_iter().flat_map(|b| (0..r).map(move |j| b * r + j)).collect()
    }
}

fn letters(model: &TruncatedModel) -> Vec<(usize, usize)> {
    (1..=model.k()).flat_map(|i| (1..=model.n()[i - 1]).map(move |s| (i, s))).collect()
}

/// Distance of (S*_{i,s}⊗I)M from M, per letter.
pub fn coinvariance_residuals(h: &SubspaceHandle) -> Vec<((usize, usize), f64)> {
    letters(&h.model)
        .into_iter()
        .map(|(i, s)| {
            let x = lifted_apply_adjoint(h.model.shift(i, s), h.aux, &h.q);
            ((i, s), span_defect(&h.q, &x))
        })
        .collect()
}

pub fn check_coinvariant(h: &SubspaceHandle, tol: f64) -> Result<()> {
    match coinvariance_residuals(h).into_iter().find(|&(_, r)| r > tol) {
        Some(((i, s), r)) => Err(Error::Rejected(format!(
            "subspace is not co-invariant: adj(S[{i}:{s}])⊗I leaves it (residual {r:.3e})"
        ))),
        None => Ok(()),
    }
}

/// Distance of (S_{i,s}⊗I)M from M, measured on degrees ≤ D − buffer.
pub fn invariance_residuals(h: &SubspaceHandle, buffer: usize) -> Vec<((usize, usize), f64)> {
    let rows = h.interior(buffer);
    letters(&h.model)
        .into_iter()
        .map(|(i, s)| {
            let x = lifted_apply(h.model.shift(i, s), h.aux, &h.q);
            let off = &x - &h.q * (h.q.adjoint() * &x);
            ((i, s), spectral_norm(&off.select_rows(&rows)))
        })
        .collect()
}

/// Smallest subspace containing the columns of `q` and invariant under the
/// truncated S_{i,s}⊗I.
pub fn invariant_closure(model: &TruncatedModel, aux: usize, q: &CMat, tol: f64) -> CMat {
    let mut q = orthonormal_range(q, tol);
    loop {
        let mut cols = vec![q.clone()];
        for (i, s) in letters(model) {
            cols.push(lifted_apply(model.shift(i, s), aux, &q));
        }
        let refs: Vec<&CMat> = cols.iter().collect();
        let next = orthonormal_range(&hstack(&refs), tol);
        if next.ncols() == q.ncols() {
            return next;
        }
        q = next;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanReport {
    pub l_dim: usize,
    pub span_dim: usize,
    pub target_dim: usize,
    /// ‖P_span − I⊗P_L‖.
    pub span_residual: f64,
    pub holds: bool,
}

/// L = (P_ℂ⊗I)M, and the check span{(S_α⊗I)M} = ℓ²⊗L on the truncation.
/// Returns an orthonormal basis of L ⊆ ℂ^aux with the report.
pub fn coinvariant_span(h: &SubspaceHandle, tol: &Tolerances) -> Result<(CMat, SpanReport)> {
    check_coinvariant(h, tol.residual)?;
    let r = h.aux;
    let vac = h.model.index_of(&MultiWord::empty(h.model.k())).expect("vacuum is a basis vector");
    let top = h.q.rows(vac * r, r).clone_owned();
    let l = orthonormal_range(&top, tol.rank);
    let span = invariant_closure(&h.model, r, &h.q, tol.rank);
    let pl = &l * l.adjoint();
    let mut target = zeros(h.model.dim() * r, h.model.dim() * r);
    for b in 0..h.model.dim() {
        target.view_mut((b * r, b * r), (r, r)).copy_from(&pl);
    }
    let span_residual = spectral_norm(&(&span * span.adjoint() - target));
    let report = SpanReport {
        l_dim: l.ncols(),
        span_dim: span.ncols(),
        target_dim: h.model.dim() * l.ncols(),
        span_residual,
        holds: span_residual <= tol.residual && span.ncols() == h.model.dim() * l.ncols(),
    };
    Ok((l, report))
}

/// (id − Φ_{S₁⊗I})∘⋯∘(id − Φ_{S_k⊗I})(Y) on the truncation.
pub fn lifted_defect(model: &TruncatedModel, aux: usize, y: &CMat) -> CMat {
    let mut x = y.clone();
    for i in 1..=model.k() {
        let mut phi = zeros(x.nrows(), x.ncols());
        for s in 1..=model.n()[i - 1] {
            let sx = lifted_apply(model.shift(i, s), aux, &x);
            phi += lifted_apply(model.shift(i, s), aux, &sx.adjoint()).adjoint();
        }
        x -= phi;
    }
    x
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub buffer: usize,
    pub interior_dim: usize,
    pub invariance_residual: f64,
    /// Smallest eigenvalue of the defect of P_M on the interior.
    pub min_defect_eigenvalue: f64,
    /// Doubly Λ-commuting residual of (S⊗I)|_M on the interior.
    pub doubly_residual: f64,
    pub defect_positive: bool,
    pub doubly: bool,
    pub is_beurling: bool,
    /// The two conditions agree.
    pub consistent: bool,
}

/// Positivity of the defect of P_M, and the doubly Λ-commuting relations
/// of the restriction V_{i,s} = P_M(S_{i,s}⊗I)P_M, on degrees ≤ D − buffer.
pub fn beurling_conditions(h: &SubspaceHandle, buffer: usize, tol: &Tolerances) -> Result<ConditionReport> {
    if buffer < 2 {
        return Err(Error::Rejected(format!("buffer {buffer} is too small: products of two letters need b ≥ 2")));
    }
    let inner = h.interior(buffer);
    let invariance = invariance_residuals(h, buffer);
    if let Some(((i, s), r)) = invariance.iter().copied().find(|&(_, r)| r > tol.residual) {
        return Err(Error::Rejected(format!(
            "subspace is not invariant on the interior: S[{i}:{s}]⊗I leaves it (residual {r:.3e})"
        )));
    }
    let invariance_residual = invariance.iter().map(|x| x.1).fold(0.0, f64::max);
    let p = h.projector();
    let defect = lifted_defect(&h.model, h.aux, &p);
    let min_defect_eigenvalue = if inner.is_empty() { 0.0 } else { min_eigenvalue(&principal(&defect, &inner)) };

    let lam = h.model.lambda();
    let restricted: Vec<Vec<CMat>> = (1..=h.model.k())
        .map(|i| {
            (1..=h.model.n()[i - 1])
                .map(|s| &p * kron_identity(h.model.shift(i, s), h.aux) * &p)
                .collect()
        })
        .collect();
    let mut doubly_residual: f64 = 0.0;
    for i in 1..=h.model.k() {
        for j in 1..=h.model.k() {
            if i == j {
                continue;
            }
            for s in 1..=h.model.n()[i - 1] {
                for t in 1..=h.model.n()[j - 1] {
                    let a = restricted[i - 1][s - 1].adjoint();
                    let b = &restricted[j - 1][t - 1];
                    let c = lam.lambda(i, j, s, t).to_complex().conj();
                    let r = &a * b - (b * &a) * c;
                    doubly_residual = doubly_residual.max(spectral_norm(&principal(&r, &inner)));
                }
            }
        }
    }
    let defect_positive = min_defect_eigenvalue >= -tol.eigen;
    let doubly = doubly_residual <= tol.residual;
    Ok(ConditionReport {
        buffer,
        interior_dim: inner.len(),
        invariance_residual,
        min_defect_eigenvalue,
        doubly_residual,
        defect_positive,
        doubly,
        is_beurling: defect_positive && doubly,
        consistent: defect_positive == doubly,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Factorization {
    /// A : ℓ²⊗𝒟 → ℓ²⊗K.
    #[serde(skip)]
    pub a: CMat,
    /// Contractions T_{i,s} = C*_{i,s} on the closure of the range of Y^{1/2}.
    #[serde(skip)]
    pub tuple: RowTuple,
    pub range_dim: usize,
    pub defect_dim: usize,
    pub min_defect_eigenvalue: f64,
    /// ‖Y − AA*‖ on the interior.
    pub residual: f64,
    /// ‖A(S_{i,s}⊗I) − (S_{i,s}⊗I)A‖ on interior columns.
    pub multi_analytic_residual: f64,
}

/// Y = AA* with A multi-analytic, for Hermitian Y whose defect is positive.
/// With Y = R*R, R = diag(√μ)V*, the map C_{i,s}R = R(S*_{i,s}⊗I) defines a
/// jointly nilpotent tuple T = C*; then A = R*K_T*.
pub fn beurling_factorize(model: &TruncatedModel, aux: usize, y: &CMat, tol: &Tolerances) -> Result<Factorization> {
    let n = model.dim() * aux;
    if y.nrows() != n || y.ncols() != n {
        return Err(Error::Usage(format!("Y is {}x{}, the model has dimension {n}", y.nrows(), y.ncols())));
    }
    let herm = spectral_norm(&(y - y.adjoint()));
    if herm > tol.residual {
        return Err(Error::Usage(format!("Y is not Hermitian (residual {herm:.3e})")));
    }
    let inner: Vec<usize> = model.interior(1).into_iter().flat_map(|b| (0..aux).map(move |j| b * aux + j)).collect();
    let defect = lifted_defect(model, aux, y);
    let min_defect_eigenvalue = if inner.is_empty() { 0.0 } else { min_eigenvalue(&principal(&defect, &inner)) };
    if min_defect_eigenvalue < -tol.eigen {
        return Err(Error::Rejected(format!(
            "defect of Y has eigenvalue {min_defect_eigenvalue:.3e} < 0 on the interior; no multi-analytic factorization"
        )));
    }
    let (v, roots) = psd_frame(y, tol.rank);
    let g = roots.len();
    let mut r = v.adjoint();
    let mut r_plus = v.clone();
    for (j, &mu) in roots.iter().enumerate() {
        r.row_mut(j).scale_mut(mu);
        r_plus.column_mut(j).unscale_mut(mu);
    }
    let ops: Vec<Vec<CMat>> = (1..=model.k())
        .map(|i| {
            (1..=model.n()[i - 1])
                .map(|s| {
                    let c = &r * lifted_apply_adjoint(model.shift(i, s), aux, &r_plus);
                    c.adjoint()
                })
                .collect()
        })
        .collect();
    let tuple = RowTuple::new(model.lambda(), ops)?;
    let kernel = build_kernel(&tuple, model.max_degree(), tol)?;
    let a = r.adjoint() * kernel.matrix.adjoint();
    let residual = spectral_norm(&principal(&(y - &a * a.adjoint()), &inner));
    let dom: Vec<usize> =
        model.interior(1).into_iter().flat_map(|b| (0..kernel.defect_dim).map(move |j| b * kernel.defect_dim + j)).collect();
    let mut multi_analytic_residual: f64 = 0.0;
    for (i, s) in letters(model) {
        let sh = model.shift(i, s);
        let lhs = lifted_apply_adjoint(sh, kernel.defect_dim, &a.adjoint()).adjoint();
        let rhs = lifted_apply(sh, aux, &a);
        multi_analytic_residual = multi_analytic_residual.max(norm_on_columns(&(lhs - rhs), &dom));
    }
    Ok(Factorization {
        a,
        tuple,
        range_dim: g,
        defect_dim: kernel.defect_dim,
        min_defect_eigenvalue,
        residual,
        multi_analytic_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CompressionReport {
    #[serde(skip)]
    pub tuple: RowTuple,
    pub is_member: bool,
    pub is_pure: bool,
    pub nilpotency_order: Option<usize>,
    pub defect_rank: usize,
    /// dim (P_ℂ⊗I)M.
    pub vacuum_rank: usize,
    pub ranks_agree: bool,
}

/// T_{i,s} = P_M(S_{i,s}⊗I)|_M for co-invariant M.
pub fn compression_model(h: &SubspaceHandle, tol: &Tolerances) -> Result<CompressionReport> {
    check_coinvariant(h, tol.residual)?;
    let tuple = compress(&h.model, h.aux, &h.q);
    let rep = check_membership(&tuple, tol);
    let defect_rank = rank(&tuple.defect(1.0), tol.rank);
    let vac = h.model.index_of(&MultiWord::empty(h.model.k())).expect("vacuum is a basis vector");
    let vacuum_rank = rank(&h.q.rows(vac * h.aux, h.aux).clone_owned(), tol.rank);
    Ok(CompressionReport {
        nilpotency_order: tuple.joint_nilpotency_order(),
        tuple,
        is_member: rep.is_member,
        is_pure: rep.is_pure,
        defect_rank,
        vacuum_rank,
        ranks_agree: defect_rank == vacuum_rank,
    })
}

/// Traces of all words of length ≤ 4 in the T_{i,s} and their adjoints.
pub fn moment_fingerprint(t: &RowTuple) -> Vec<Complex64> {
    let ops: Vec<CMat> = t.ops().iter().flatten().cloned().collect();
    trace_fingerprint(&ops, FINGERPRINT_LENGTH)
}

/// Compressions of the scalar model to co-invariant M, M' are unitarily
/// equivalent exactly when M = M'. Equal subspaces give Equivalent;
/// different fingerprints give Not; anything else stays Inconclusive.
pub fn rank_one_verdict(m: &SubspaceHandle, m2: &SubspaceHandle, tol: &Tolerances) -> Result<Verdict> {
    if m.dim() == m2.dim() && spectral_norm(&(m.projector() - m2.projector())) <= tol.residual {
        return Ok(Verdict::Equivalent);
    }
    if m.dim() != m2.dim() {
        return Ok(Verdict::Not);
    }
    let a = moment_fingerprint(&compression_model(m, tol)?.tuple);
    let b = moment_fingerprint(&compression_model(m2, tol)?.tuple);
    let scale = m.dim().max(1) as f64;
    if a.iter().zip(&b).any(|(x, y)| (x - y).norm() > 1e-8 * scale) {
        Ok(Verdict::Not)
    } else {
        Ok(Verdict::Inconclusive)
    }
}

/// Truncated right creator χ_α ↦ ∏_{j>i}∏_{b∈α_j}λ_{j,i}(b,s) χ_{α_i g_s}.
/// These commute with every S_{j,t}.
pub fn right_creator(model: &TruncatedModel, i: usize, s: usize) -> CMat {
    let lam = model.lambda();
    let mut m = zeros(model.dim(), model.dim());
    for (col, chi) in model.basis().iter().enumerate() {
        if let Some(row) = model.index_of(&chi.append_unchecked(i, s)) {
            let mut ph = crate::phases::Phase::ONE;
            for j in (i + 1)..=model.k() {
                for &b in &chi.part(j).letters {
                    ph = ph * lam.lambda(j, i, b, s);
                }
            }
            m[(row, col)] = ph.to_complex();
        }
    }
    m
}

/// R_β = R_{1,β₁}⋯R_{k,β_k}, each block word applied letter by letter.
pub fn right_word(model: &TruncatedModel, beta: &MultiWord) -> CMat {
    let mut out = eye(model.dim());
    for part in beta.parts() {
        for &s in part.letters.iter().rev() {
            out *= right_creator(model, part.block, s);
        }
    }
    out
}

/// Ψ = Σ_j R_{β_j} ⊗ θ_j : ℓ²⊗ℂ^e → ℓ²⊗ℂ^aux.
#[derive(Clone, Debug)]
pub struct InnerSymbol {
    pub betas: Vec<MultiWord>,
    pub thetas: Vec<CMat>,
    pub psi: CMat,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl InnerSymbol {
    /// Y = ΨΨ*, the projection onto the range of Ψ.
    pub fn range_projection(&self) -> CMat {
        &self.psi * self.psi.adjoint()
    }
}

/// Ψ is isometric when the β_j are distinct of one multidegree and
/// Σ θ_j*θ_j = I.
pub fn inner_symbol(model: &TruncatedModel, betas: Vec<MultiWord>, thetas: Vec<CMat>) -> Result<InnerSymbol> {
    if betas.is_empty() || betas.len() != thetas.len() {
        return Err(Error::Usage("need one θ per word, at least one".into()));
    }
    let md = betas[0].multidegree();
    if betas.iter().any(|b| b.multidegree() != md) {
        return Err(Error::Usage("words must share one multidegree".into()));
    }
    let mut sorted = betas.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != betas.len() {
        return Err(Error::Usage("words must be distinct".into()));
    }
    let (out_dim, in_dim) = thetas[0].shape();
    if thetas.iter().any(|t| t.shape() != (out_dim, in_dim)) {
        return Err(Error::Usage("θ_j must share one shape".into()));
    }
    let gram = thetas.iter().fold(zeros(in_dim, in_dim), |acc, t| acc + t.adjoint() * t);
    let r = spectral_norm(&(gram - eye(in_dim)));
    if r > ORTHONORMAL_TOL {
        return Err(Error::Usage(format!("Σθ*θ ≠ I (residual {r:.3e})")));
    }
    let mut psi = zeros(model.dim() * out_dim, model.dim() * in_dim);
    for (b, t) in betas.iter().zip(&thetas) {
        psi += right_word(model, b).kronecker(t);
    }
    Ok(InnerSymbol { betas, thetas, psi, in_dim, out_dim })
}

/// Random inner symbol: a random multidegree of total ≤ max_degree, up to
/// three distinct words of it, and a random isometry split into the θ_j.
pub fn random_inner_symbol(rng: &mut Prng, model: &TruncatedModel, max_degree: usize, max_aux: usize) -> InnerSymbol {
    let k = model.k();
    let total = rng.random_range(0..=max_degree);
    let mut md = vec![0usize; k];
    for _ in 0..total {
        md[rng.random_range(0..k)] += 1;
    }
    let mut words = words_of_multidegree(model.n(), &md);
    let count = rng.random_range(1..=words.len().min(3));
    let mut betas = Vec::new();
    for _ in 0..count {
        betas.push(words.swap_remove(rng.random_range(0..words.len())));
    }
    let in_dim = rng.random_range(1..=max_aux);
    let out_dim = rng.random_range(in_dim.div_ceil(count)..=max_aux).max(1);
    let stacked = orthonormal_range(&gaussian_matrix(rng, out_dim * count, in_dim), 0.0);
    let thetas = (0..count).map(|j| stacked.rows(j * out_dim, out_dim).clone_owned()).collect();
    inner_symbol(model, betas, thetas).expect("generated symbol is inner")
}

/// span{χ_α : |α| ≥ 1}: invariant, and Beurling exactly when k = 1.
pub fn positive_degree_subspace(model: &TruncatedModel) -> SubspaceHandle {
    let cols: Vec<usize> = (0..model.dim()).filter(|&b| model.degrees()[b] >= 1).collect();
    let q = eye(model.dim()).select_columns(&cols);
    SubspaceHandle::from_orthonormal(model, 1, q).expect("coordinate frame")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::berezin::berezin_kernel;
    use crate::linalg::c;
    use crate::phases::{validate_lambda, LambdaEntry, PhaseMatrix};
    use crate::sampling::{coinvariant_closure, stream};

    fn cfg_a() -> PhaseMatrix {
        validate_lambda(&[1, 1], &[LambdaEntry::new(1, 2, 1, 1, 1, 4)]).unwrap()
    }

    fn cfg_b() -> PhaseMatrix {
        validate_lambda(
            &[2, 1],
            &[LambdaEntry::new(1, 2, 1, 1, 1, 4), LambdaEntry::new(1, 2, 2, 1, 1, 2)],
        )
        .unwrap()
    }

    fn single() -> PhaseMatrix {
        PhaseMatrix::trivial(&[1]).unwrap()
    }

    fn basis_vector(model: &TruncatedModel, parts: Vec<Vec<usize>>) -> CMat {
        let mut v = zeros(model.dim(), 1);
        v[(model.index_of(&MultiWord::from_letters(parts)).unwrap(), 0)] = c(1., 0.);
        v
    }

    #[test]
    fn right_creators_commute_with_shifts() {
        for lam in [cfg_a(), cfg_b()] {
            let model = TruncatedModel::new(&lam, 4).unwrap();
            let inner = model.interior(2);
            for (i, s) in letters(&model) {
                for (j, t) in letters(&model) {
                    let r = right_creator(&model, j, t);
                    let sh = model.shift(i, s);
                    assert!(norm_on_columns(&(sh * &r - &r * sh), &inner) < 1e-15);
                    // R is an isometry with the S-ranges structure of a row
                    assert!(norm_on_columns(&(r.adjoint() * &r - eye(model.dim())), &model.interior(1)) < 1e-15);
                }
            }
        }
    }

    #[test]
    fn vacuum_span() {
        let model = TruncatedModel::new(&cfg_a(), 3).unwrap();
        let h = SubspaceHandle::from_vectors(&model, 1, &basis_vector(&model, vec![vec![], vec![]]), 1e-12).unwrap();
        let (l, rep) = coinvariant_span(&h, &Tolerances::default()).unwrap();
        assert_eq!(l.ncols(), 1);
        assert!(rep.holds);
        assert_eq!(rep.span_dim, model.dim());
    }

    #[test]
    fn single_shifted_vector_not_coinvariant() {
        let model = TruncatedModel::new(&cfg_a(), 3).unwrap();
        let h = SubspaceHandle::from_vectors(&model, 1, &basis_vector(&model, vec![vec![1], vec![]]), 1e-12).unwrap();
        let err = coinvariant_span(&h, &Tolerances::default()).unwrap_err();
        assert!(err.to_string().contains("adj(S[1:1])"));
    }

    #[test]
    fn jordan_kernel_range() {
        let mut j = zeros(2, 2);
        j[(0, 1)] = c(1., 0.);
        let t = RowTuple::new(&single(), vec![vec![j]]).unwrap();
        let tol = Tolerances::default();
        let k = berezin_kernel(&t, &tol, None).unwrap();
        let h = SubspaceHandle::from_orthonormal(&k.model, k.defect_dim, k.matrix.clone()).unwrap();
        let (l, rep) = coinvariant_span(&h, &tol).unwrap();
        assert_eq!(l.ncols(), 1);
        assert!(rep.holds);
        let cm = compression_model(&h, &tol).unwrap();
        assert!(cm.is_member && cm.is_pure && cm.ranks_agree);
        // with Q = K_T the compression is T itself
        assert!(spectral_norm(&(cm.tuple.t(1, 1) - t.t(1, 1))) < 1e-14);
    }

    #[test]
    fn compression_of_whole_space() {
        let model = TruncatedModel::new(&cfg_a(), 3).unwrap();
        let h = SubspaceHandle::from_orthonormal(&model, 1, eye(model.dim())).unwrap();
        let cm = compression_model(&h, &Tolerances::default()).unwrap();
        assert_eq!(cm.tuple.t(2, 1), model.shift(2, 1));
        assert_eq!(cm.defect_rank, 1);
        let v = SubspaceHandle::from_vectors(&model, 1, &basis_vector(&model, vec![vec![], vec![]]), 1e-12).unwrap();
        let cv = compression_model(&v, &Tolerances::default()).unwrap();
        assert_eq!(spectral_norm(cv.tuple.t(1, 1)), 0.0);
        assert_eq!(cv.defect_rank, 1);
    }

    #[test]
    fn tensor_subspace_is_beurling() {
        let model = TruncatedModel::new(&cfg_a(), 4).unwrap();
        let mut l = zeros(2, 1);
        l[(0, 0)] = c(0.6, 0.);
        l[(1, 0)] = c(0., 0.8);
        let q = eye(model.dim()).kronecker(&l);
        let h = SubspaceHandle::from_orthonormal(&model, 2, q).unwrap();
        let rep = beurling_conditions(&h, 2, &Tolerances::default()).unwrap();
        assert!(rep.is_beurling && rep.consistent);
    }

    #[test]
    fn classical_shift_range_is_beurling() {
        let model = TruncatedModel::new(&single(), 6).unwrap();
        let h = positive_degree_subspace(&model);
        let rep = beurling_conditions(&h, 2, &Tolerances::default()).unwrap();
        assert!(rep.is_beurling);
        let f = beurling_factorize(&model, 1, &h.projector(), &Tolerances::default()).unwrap();
        assert!(f.residual < 1e-12 && f.multi_analytic_residual < 1e-12);
        // range of A is M
        let pa = orthonormal_range(&f.a, 1e-9);
        assert!(spectral_norm(&(&pa * pa.adjoint() - h.projector())) < 1e-10);
    }

    #[test]
    fn two_variable_counterexample() {
        let model = TruncatedModel::new(&cfg_a(), 4).unwrap();
        let h = positive_degree_subspace(&model);
        let tol = Tolerances::default();
        let rep = beurling_conditions(&h, 2, &tol).unwrap();
        assert!(!rep.defect_positive && !rep.doubly && !rep.is_beurling);
        assert!((rep.min_defect_eigenvalue + 1.0).abs() < 1e-12);
        assert!(beurling_factorize(&model, 1, &h.projector(), &tol).is_err());
        assert!(beurling_conditions(&h, 1, &tol).is_err());
    }

    #[test]
    fn identity_factorizes() {
        let model = TruncatedModel::new(&cfg_b(), 3).unwrap();
        let f = beurling_factorize(&model, 1, &eye(model.dim()), &Tolerances::default()).unwrap();
        assert_eq!(f.defect_dim, 1);
        assert!(f.residual < 1e-12 && f.multi_analytic_residual < 1e-12);
    }

    #[test]
    fn random_inner_symbols() {
        let mut rng = stream(3, "beurling-unit");
        let tol = Tolerances::default();
        for lam in [cfg_a(), cfg_b()] {
            let model = TruncatedModel::new(&lam, 4).unwrap();
            for _ in 0..5 {
                let psi = random_inner_symbol(&mut rng, &model, 2, 2);
                let y = psi.range_projection();
                let f = beurling_factorize(&model, psi.out_dim, &y, &tol).unwrap();
                assert!(f.residual < 1e-8, "{}", f.residual);
                assert!(f.multi_analytic_residual < 1e-8, "{}", f.multi_analytic_residual);
                let h = SubspaceHandle::from_range(&model, psi.out_dim, &y, 1e-9).unwrap();
                let rep = beurling_conditions(&h, 2, &tol).unwrap();
                assert!(rep.is_beurling, "{rep:?}");
            }
        }
    }

    #[test]
    fn distinct_coinvariant_subspaces_differ() {
        let mut rng = stream(5, "rank-one-unit");
        let model = TruncatedModel::new(&cfg_a(), 3).unwrap();
        let tol = Tolerances::default();
        let pick = |rng: &mut Prng| {
            let v = gaussian_matrix(rng, model.dim(), 1);
            let q = coinvariant_closure(&model, 1, &v.select_rows(&[0, 1, 2]).resize_vertically(model.dim(), c(0., 0.)), 1e-12);
            SubspaceHandle::from_orthonormal(&model, 1, q).unwrap()
        };
        let a = pick(&mut rng);
        let b = pick(&mut rng);
        assert_eq!(rank_one_verdict(&a, &a, &tol).unwrap(), Verdict::Equivalent);
        assert_ne!(rank_one_verdict(&a, &b, &tol).unwrap(), Verdict::Equivalent);
    }
}
