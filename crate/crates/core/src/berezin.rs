//! Noncommutative Berezin kernel K_T and what it buys: the Berezin
//! transform, the von Neumann inequality, the minimal isometric dilation of
//! pure tuples, ρ_z rescaling and the moment identities for n = (1,…,1).
//!
//! K_T h = Σ_β χ_β ⊗ Δ_T(I)^{1/2} (T_{1,β₁}⋯T_{k,β_k})* h, written in the
//! defect frame {√μ_j v_j}: coordinate j of Δ^{1/2}x is √μ_j⟨x, v_j⟩.
//! Kernel rows are indexed by b·r + j for basis index b and defect index j.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockmodel::TruncatedModel;
use crate::linalg::{eye, hermitian_eigen, kron_identity, lifted_apply, lifted_apply_adjoint, orthonormal_range, spectral_norm, zeros, CMat};
use crate::mwords::MultiWord;
use crate::phases::Phase;
use crate::polyball::{check_membership, MembershipReport, RowTuple, Tolerances};
use crate::rewrite::{Letter, StarPolynomial};
use crate::sampling::hstack;

#[derive(Clone, Debug)]
pub struct BerezinKernel {
    pub model: TruncatedModel,
    pub defect_dim: usize,
    /// r × h matrix with rows √μ_j v_j*.
    pub frame: CMat,
    /// (model dim · r) × h.
    pub matrix: CMat,
    pub nilpotency_order: Option<usize>,
    /// ‖Σ_{|p|=D+1} Φ^p(I)‖, zero when the series is finite at degree D.
    pub tail_bound: f64,
    pub isometry_residual: f64,
    pub intertwining_residual: f64,
}

impl BerezinKernel {
    /// Truncated S_{i,s} ⊗ I on the kernel's codomain.
    pub fn lifted_shift(&self, i: usize, s: usize) -> CMat {
        kron_identity(self.model.shift(i, s), self.defect_dim)
    }

    /// K*(f ⊗ I)K.
    pub fn transform(&self, f: &StarPolynomial) -> Result<CMat> {
        let fm = self.model.build_matrix(f)?.matrix;
        Ok(self.matrix.adjoint() * lifted_apply(&fm, self.defect_dim, &self.matrix))
    }
}

fn reject(report: &MembershipReport, what: &str) -> Error {
    Error::Rejected(format!(
        "{what}: member={} pure={} commuting_residual={:.3e} min_defect_eigenvalue={:.3e}",
        report.is_member,
        report.is_pure,
        report.commuting_residual,
        report.positivity.iter().map(|p| p.min_eigenvalue).fold(f64::INFINITY, f64::min)
    ))
}

fn defect_frame(t: &RowTuple, tol: &Tolerances) -> Result<CMat> {
    let (vals, vecs) = hermitian_eigen(&t.defect(1.0));
    if let Some(&low) = vals.first() {
        if low < -tol.eigen {
            return Err(Error::Rejected(format!("defect operator has eigenvalue {low:.3e} < 0")));
        }
    }
    let keep: Vec<usize> = (0..vals.len()).rev().filter(|&i| vals[i] > tol.rank).collect();
    let mut frame = zeros(keep.len(), t.dim());
    for (row, &i) in keep.iter().enumerate() {
        let root = vals[i].sqrt();
        for col in 0..t.dim() {
            frame[(row, col)] = vecs[(col, i)].conj() * root;
        }
    }
    Ok(frame)
}

/// T_β for every basis word of the model, built from β = g_s^j β'.
fn basis_products(model: &TruncatedModel, t: &RowTuple) -> Vec<CMat> {
    let mut out: Vec<CMat> = Vec::with_capacity(model.dim());
    for w in model.basis() {
        if w.is_empty() {
            out.push(eye(t.dim()));
            continue;
        }
        let j = (1..=w.k()).find(|&j| !w.part(j).is_empty()).unwrap();
        let (s, rest) = w.strip_leftmost(j).unwrap();
        let prev = &out[model.index_of(&rest).expect("basis closed under stripping")];
        out.push(t.t(j, s) * prev);
    }
    out
}

/// Builds K_T at truncation degree D without membership checks.
pub fn build_kernel(t: &RowTuple, degree: usize, tol: &Tolerances) -> Result<BerezinKernel> {
    let frame = defect_frame(t, tol)?;
    let r = frame.nrows();
    let model = TruncatedModel::new(t.lambda(), degree)?;
    let products = basis_products(&model, t);
    let mut k = zeros(model.dim() * r, t.dim());
    for (b, tb) in products.iter().enumerate() {
        let block = &frame * tb.adjoint();
        k.view_mut((b * r, 0), (r, t.dim())).copy_from(&block);
    }
    let isometry_residual = spectral_norm(&(k.adjoint() * &k - eye(t.dim())));
    let mut intertwining_residual: f64 = 0.0;
    for i in 1..=t.k() {
        for s in 1..=t.n()[i - 1] {
            let lhs = &k * t.t(i, s).adjoint();
            let rhs = lifted_apply_adjoint(model.shift(i, s), r, &k);
            intertwining_residual = intertwining_residual.max(spectral_norm(&(lhs - rhs)));
        }
    }
    let tail = t.graded_phi_sums(&eye(t.dim()), degree + 1);
    let tail_bound = spectral_norm(tail.last().unwrap());
    Ok(BerezinKernel {
        model,
        defect_dim: r,
        frame,
        matrix: k,
        nilpotency_order: t.joint_nilpotency_order(),
        tail_bound,
        isometry_residual,
        intertwining_residual,
    })
}

/// K_T for a pure member. Jointly nilpotent tuples get the exact finite
/// kernel at degree max(d, degree); others need an explicit degree.
pub fn berezin_kernel(t: &RowTuple, tol: &Tolerances, degree: Option<usize>) -> Result<BerezinKernel> {
    let rep = check_membership(t, tol);
    if !rep.is_member || !rep.is_pure {
        return Err(reject(&rep, "Berezin kernel needs a pure member"));
    }
    let d = match (t.joint_nilpotency_order(), degree) {
        (Some(d), g) => g.map_or(d, |g| g.max(d)),
        (None, Some(g)) => g,
        (None, None) => {
            return Err(Error::Usage("tuple is not jointly nilpotent: give a truncation degree".into()))
        }
    };
    build_kernel(t, d, tol)
}

/// ‖Σ_{p∈{0..d}^k} Φ^{p₁}_{T₁}∘⋯∘Φ^{p_k}_{T_k}[Δ_T(I)] − I‖.
pub fn series_identity_residual(t: &RowTuple, d: usize) -> f64 {
    let mut x = t.defect(1.0);
    for i in (1..=t.k()).rev() {
        let mut acc = x.clone();
        let mut cur = x;
        for _ in 0..d {
            cur = t.phi(i, &cur, 1.0);
            acc += &cur;
        }
        x = acc;
    }
    spectral_norm(&(x - eye(t.dim())))
}

#[derive(Clone, Debug, Serialize)]
pub struct TransformReport {
    pub exact: bool,
    /// ‖B − f(T,T*)‖ for the last evaluation.
    pub residual: f64,
    pub r_values: Vec<f64>,
    pub residuals: Vec<f64>,
    /// ‖B_{r_{j+1}} − B_{r_j}‖.
    pub increments: Vec<f64>,
    #[serde(skip)]
    pub matrix: CMat,
    #[serde(skip)]
    pub direct: CMat,
}

/// Ψ_T(f): exact K*(f⊗I)K for nilpotent members, K_{rT}-approximants at
/// truncation degree `degree` along `rs` otherwise.
pub fn berezin_transform(
    t: &RowTuple,
    f: &StarPolynomial,
    rs: &[f64],
    degree: usize,
    tol: &Tolerances,
) -> Result<TransformReport> {
    let rep = check_membership(t, tol);
    if !rep.is_member {
        return Err(reject(&rep, "Berezin transform needs a member"));
    }
    let direct = t.evaluate(f)?;
    if let Some(d) = t.joint_nilpotency_order() {
        let k = build_kernel(t, d + f.creator_degree(), tol)?;
        let b = k.transform(f)?;
        let residual = spectral_norm(&(&b - &direct));
        return Ok(TransformReport {
            exact: true,
            residual,
            r_values: vec![1.0],
            residuals: vec![residual],
            increments: Vec::new(),
            matrix: b,
            direct,
        });
    }
    let rs: Vec<f64> = if rep.is_pure { vec![1.0] } else { rs.to_vec() };
    if rs.is_empty() {
        return Err(Error::Usage("non-pure member needs a nonempty r-sequence".into()));
    }
    let mut mats = Vec::new();
    let mut residuals = Vec::new();
    for &r in &rs {
        let k = build_kernel(&t.scaled(r), degree, tol)?;
        let b = k.transform(f)?;
        residuals.push(spectral_norm(&(&b - &direct)));
        mats.push(b);
    }
    let increments = mats.windows(2).map(|w| spectral_norm(&(&w[1] - &w[0]))).collect();
    Ok(TransformReport {
        exact: false,
        residual: *residuals.last().unwrap(),
        r_values: rs,
        residuals,
        increments,
        matrix: mats.pop().unwrap(),
        direct,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VnReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub nilpotency_order: usize,
    pub model_degree: usize,
}

/// ‖f(T,T*)‖ against the norm of the compression of f(S,S*) at degree D'.
pub fn vn_check(t: &RowTuple, f: &StarPolynomial, model_degree: usize, tol: &Tolerances) -> Result<VnReport> {
    let rep = check_membership(t, tol);
    if !rep.is_member {
        return Err(reject(&rep, "von Neumann check needs a member"));
    }
    let d = t
        .joint_nilpotency_order()
        .ok_or_else(|| Error::Rejected("tuple is not jointly nilpotent".into()))?;
    let need = d + f.creator_degree();
    if model_degree < need {
        return Err(Error::Usage(format!("model degree {model_degree} below d + m = {need}")));
    }
    let lhs = spectral_norm(&t.evaluate(f)?);
    let model = TruncatedModel::new(t.lambda(), model_degree)?;
    let rhs = spectral_norm(&model.build_matrix(f)?.matrix);
    Ok(VnReport { lhs, rhs, pass: lhs <= rhs + tol.eigen, nilpotency_order: d, model_degree })
}

fn check_unimodular(t: &RowTuple, z: &[Vec<Complex64>], tol: f64) -> Result<()> {
    if z.len() != t.k() || z.iter().zip(t.n()).any(|(b, &n)| b.len() != n) {
        return Err(Error::Usage("rescaling phases must match the arities".into()));
    }
    for (i, b) in z.iter().enumerate() {
        for (s, v) in b.iter().enumerate() {
            if (v.norm() - 1.0).abs() > tol {
                return Err(Error::Rejected(format!("z_{{{},{}}} = {v} is not unimodular", i + 1, s + 1)));
            }
        }
    }
    Ok(())
}

/// zT = (z_{i,s}T_{i,s}).
pub fn rescale_tuple(t: &RowTuple, z: &[Vec<Complex64>], tol: &Tolerances) -> Result<RowTuple> {
    check_unimodular(t, z, tol.residual)?;
    Ok(t.map(|i, s, m| m * z[i - 1][s - 1]))
}

/// Exact phases as complex rescaling factors.
pub fn phases_to_complex(z: &[Vec<Phase>]) -> Vec<Vec<Complex64>> {
    z.iter().map(|b| b.iter().map(|p| p.to_complex()).collect()).collect()
}

fn word_weight(w: &MultiWord, z: &[Vec<Complex64>]) -> Complex64 {
    w.parts()
        .iter()
        .flat_map(|p| p.letters.iter().map(move |&s| z[p.block - 1][s - 1]))
        .product()
}

/// ρ_z(S_αS*_β) = z_α conj(z_β) S_αS*_β.
pub fn rho_z(f: &StarPolynomial, z: &[Vec<Complex64>]) -> StarPolynomial {
    let mut out = StarPolynomial::zero(f.n());
    for ((a, b), &(ph, sc)) in f.raw_terms() {
        let w = word_weight(a, z) * word_weight(b, z).conj();
        out.add_term((a.clone(), b.clone()), ph, sc * w);
    }
    out
}

/// ‖B_T[ρ_z(f)] − B_{zT}[f]‖ with both sides from their own kernels.
pub fn rescale_invariance(t: &RowTuple, z: &[Vec<Complex64>], f: &StarPolynomial, tol: &Tolerances) -> Result<f64> {
    let zt = rescale_tuple(t, z, tol)?;
    let d = t
        .joint_nilpotency_order()
        .ok_or_else(|| Error::Rejected("invariance check needs a jointly nilpotent tuple".into()))?;
    let deg = d + f.creator_degree();
    let lhs = berezin_kernel(t, tol, Some(deg))?.transform(&rho_z(f, z))?;
    let rhs = berezin_kernel(&zt, tol, Some(deg))?.transform(f)?;
    Ok(spectral_norm(&(lhs - rhs)))
}

#[derive(Clone, Debug)]
pub struct DilationRecord {
    pub kernel: BerezinKernel,
    /// V_{i,s} = S_{i,s} ⊗ I on the truncated model tensor D_T.
    pub v: Vec<Vec<CMat>>,
    /// max ‖V*_{i,s}K − K T*_{i,s}‖.
    pub adjoint_residual: f64,
    /// Distance of interior basis vectors from span{V_α K H}.
    pub span_residual: f64,
    pub span_dim: usize,
    pub interior_dim: usize,
}

/// V = S ⊗ I_{D_T} with H embedded by K_T, at truncation degree d + extra.
pub fn minimal_dilation(t: &RowTuple, tol: &Tolerances, extra: usize) -> Result<DilationRecord> {
    let rep = check_membership(t, tol);
    if !rep.is_member {
        return Err(reject(&rep, "dilation needs a member"));
    }
    if !rep.is_pure {
        return Err(Error::Rejected("tuple is not pure: verify moments instead".into()));
    }
    let d = t
        .joint_nilpotency_order()
        .ok_or_else(|| Error::Rejected("pure but not jointly nilpotent: no finite dilation".into()))?;
    let kernel = build_kernel(t, d + extra, tol)?;
    let r = kernel.defect_dim;
    let model = &kernel.model;
    let v: Vec<Vec<CMat>> = (1..=t.k())
        .map(|i| (1..=t.n()[i - 1]).map(|s| kernel.lifted_shift(i, s)).collect())
        .collect();
    let mut adjoint_residual: f64 = 0.0;
    for i in 1..=t.k() {
        for s in 1..=t.n()[i - 1] {
            let lhs = v[i - 1][s - 1].adjoint() * &kernel.matrix;
            let rhs = &kernel.matrix * t.t(i, s).adjoint();
            adjoint_residual = adjoint_residual.max(spectral_norm(&(lhs - rhs)));
        }
    }
    let reach = model.max_degree() - d;
    let mut pieces = Vec::new();
    for w in model.basis().iter().filter(|w| w.degree() <= reach) {
        let p = StarPolynomial::monomial(t.n(), w.clone(), MultiWord::empty(t.k()), Complex64::new(1.0, 0.0));
        pieces.push(lifted_apply(&model.build_matrix(&p)?.matrix, r, &kernel.matrix));
    }
    let refs: Vec<&CMat> = pieces.iter().collect();
    let q = orthonormal_range(&hstack(&refs), tol.rank);
    // Stripping one letter from each nonempty block costs up to k extra
    // letters, so words of length ≤ D − d reach degrees ≤ D − d − k.
    let interior: Vec<usize> = model
        .interior(d + t.k())
        .into_iter()
        .flat_map(|b| (0..r).map(move |j| b * r + j))
        .collect();
    let mut e = zeros(model.dim() * r, interior.len());
    for (col, &row) in interior.iter().enumerate() {
        e[(row, col)] = Complex64::new(1.0, 0.0);
    }
    let span_residual = spectral_norm(&(&e - &q * (q.adjoint() * &e)));
    Ok(DilationRecord {
        span_dim: q.ncols(),
        interior_dim: interior.len(),
        kernel,
        v,
        adjoint_residual,
        span_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentEntry {
    pub m: Vec<i64>,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentTrend {
    pub r: f64,
    /// Against the moments of T.
    pub max_residual: f64,
    /// Against the moments of rT (truncation error only).
    pub max_residual_scaled: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub exact: bool,
    pub entries: Vec<MomentEntry>,
    pub max_residual: f64,
    pub trend: Vec<MomentTrend>,
}

/// All m ∈ ℤ^k with Σ|m_i| ≤ bound.
pub fn moment_vectors(k: usize, bound: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                let used: i64 = v.iter().map(|x| x.abs()).sum();
                let left = bound as i64 - used;
                (-left..=left).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn moment_letters(m: &[i64]) -> Vec<Letter> {
    let mut word = Vec::new();
    for (i, &x) in m.iter().enumerate() {
        for _ in 0..(-x).max(0) {
            word.push(Letter::s(i + 1, 1));
        }
    }
    for (i, &x) in m.iter().enumerate() {
        for _ in 0..x.max(0) {
            word.push(Letter::star(i + 1, 1));
        }
    }
    word
}

fn dilation_moment(kernel: &BerezinKernel, word: &[Letter]) -> CMat {
    let r = kernel.defect_dim;
    let mut x = kernel.matrix.clone();
    for l in word.iter().rev() {
        let v = kernel.model.shift(l.block, l.index);
        x = if l.starred { lifted_apply_adjoint(v, r, &x) } else { lifted_apply(v, r, &x) };
    }
    kernel.matrix.adjoint() * x
}

/// Compares P_H V^{m⁻}V*^{m⁺}|_H with T^{m⁻}T*^{m⁺} for Σ|m_i| ≤ bound.
/// Nilpotent tuples are exact; other members go through K_{rT} along `rs`.
pub fn moment_check(t: &RowTuple, bound: usize, rs: &[f64], degree: usize, tol: &Tolerances) -> Result<MomentReport> {
    if t.n().iter().any(|&a| a != 1) {
        return Err(Error::Rejected("moment identities need n = (1,…,1)".into()));
    }
    let rep = check_membership(t, tol);
    if !rep.is_member {
        return Err(reject(&rep, "moment check needs a member"));
    }
    let ms = moment_vectors(t.k(), bound);
    let rhs_for = |tt: &RowTuple, m: &[i64]| tt.letter_product(&moment_letters(m));
    if let Some(d) = t.joint_nilpotency_order() {
        let kernel = build_kernel(t, d + bound, tol)?;
        let entries: Vec<MomentEntry> = ms
            .iter()
            .map(|m| {
                let word = moment_letters(m);
                let residual = spectral_norm(&(dilation_moment(&kernel, &word) - rhs_for(t, m)));
                MomentEntry { m: m.clone(), residual }
            })
            .collect();
        let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
        return Ok(MomentReport { exact: true, entries, max_residual, trend: Vec::new() });
    }
    if rs.is_empty() {
        return Err(Error::Usage("non-nilpotent member needs a nonempty r-sequence".into()));
    }
    let mut trend = Vec::new();
    let mut entries = Vec::new();
    for &r in rs {
        let tr = t.scaled(r);
        let kernel = build_kernel(&tr, degree, tol)?;
        let mut worst_t: f64 = 0.0;
        let mut worst_rt: f64 = 0.0;
        entries.clear();
        for m in &ms {
            let lhs = dilation_moment(&kernel, &moment_letters(m));
            let vs_t = spectral_norm(&(&lhs - rhs_for(t, m)));
            worst_t = worst_t.max(vs_t);
            worst_rt = worst_rt.max(spectral_norm(&(&lhs - rhs_for(&tr, m))));
            entries.push(MomentEntry { m: m.clone(), residual: vs_t });
        }
        trend.push(MomentTrend { r, max_residual: worst_t, max_residual_scaled: worst_rt });
    }
    let max_residual = trend.last().map_or(0.0, |x| x.max_residual);
    Ok(MomentReport { exact: false, entries, max_residual, trend })
}
