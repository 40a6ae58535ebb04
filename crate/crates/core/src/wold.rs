//! Standard doubly Λ-commuting tuples assembled from pieces, their Wold
//! projections and wandering data, and unitary equivalence through the
//! wandering data.
//!
//! A piece with subset A lives on ℓ²(×_{i∈A}F⁺_{n_i}) ⊗ ℂ^w, truncated at
//! degree D. Blocks in A act as shifts; a block j ∉ A (which needs n_j = 1)
//! acts as χ_α⊗h ↦ ∏_{i∈A}𝝀_{j,i}(1,α_i) χ_α⊗U_jh.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockmodel::TruncatedModel;
use crate::linalg::{
    commutant_dimension, eye, hermitian_eigen, hermitian_part, kron_identity, multiset_match, norm_on_columns,
    normal_eigenvalues, rank, spectral_norm, zeros, CMat,
};
use crate::phases::{agg, Phase, PhaseMatrix};
use crate::polyball::{subsets, RowTuple, Tolerances};
use crate::sampling::{random_lambda, random_unitary, weyl_solutions, weyl_unitary, Prng};

/// Unitarity and twisted commutation of the wandering unitaries.
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Piece {
    pub subset: Vec<usize>,
    pub wandering_dim: usize,
    /// U_j for each j ∉ subset.
    pub unitaries: BTreeMap<usize, CMat>,
}

impl Piece {
    pub fn pure(subset: Vec<usize>, wandering_dim: usize) -> Self {
        Piece { subset, wandering_dim, unitaries: BTreeMap::new() }
    }

    pub fn with_unitaries(subset: Vec<usize>, unitaries: BTreeMap<usize, CMat>) -> Self {
        let wandering_dim = unitaries.values().next().map_or(0, |u| u.nrows());
        Piece { subset, wandering_dim, unitaries }
    }
}

#[derive(Clone, Debug)]
pub struct TupleSpec {
    lambda: PhaseMatrix,
    pieces: Vec<Piece>,
}

impl TupleSpec {
    pub fn new(lambda: &PhaseMatrix, mut pieces: Vec<Piece>) -> Result<Self> {
        let k = lambda.k();
        for (p, piece) in pieces.iter_mut().enumerate() {
            let bad = |msg: String| Error::Rejected(format!("piece {p}: {msg}"));
            piece.subset.sort_unstable();
            if piece.subset.windows(2).any(|w| w[0] == w[1]) {
                return Err(bad("repeated block in subset".into()));
            }
            if let Some(&i) = piece.subset.iter().find(|&&i| i == 0 || i > k) {
                return Err(bad(format!("block {i} out of range 1..{k}")));
            }
            let rest: Vec<usize> = (1..=k).filter(|i| !piece.subset.contains(i)).collect();
            if let Some(&j) = rest.iter().find(|&&j| lambda.n()[j - 1] > 1) {
                return Err(bad(format!(
                    "block {j} is outside the subset with n_{j} = {}; a Cuntz row of length ≥ 2 has no finite-dimensional realization",
                    lambda.n()[j - 1]
                )));
            }
            let keys: Vec<usize> = piece.unitaries.keys().copied().collect();
            if keys != rest {
                return Err(bad(format!("unitaries given for blocks {keys:?}, expected {rest:?}")));
            }
            for (&j, u) in &piece.unitaries {
                if u.nrows() != piece.wandering_dim || u.ncols() != piece.wandering_dim {
                    return Err(bad(format!(
                        "U_{j} is {}x{}, wandering dimension is {}",
                        u.nrows(),
                        u.ncols(),
                        piece.wandering_dim
                    )));
                }
                let r = spectral_norm(&(u.adjoint() * u - eye(u.nrows())));
                if r > UNITARY_TOL {
                    return Err(bad(format!("U_{j} is not unitary (residual {r:.3e})")));
                }
            }
            for (a, &i) in rest.iter().enumerate() {
                for &j in &rest[a + 1..] {
                    let (ui, uj) = (&piece.unitaries[&i], &piece.unitaries[&j]);
                    let lam = lambda.lambda(i, j, 1, 1).to_complex();
                    let r = spectral_norm(&(ui * uj - (uj * ui) * lam));
                    if r > UNITARY_TOL {
                        return Err(bad(format!("U_{i}U_{j} ≠ λ U_{j}U_{i} (residual {r:.3e})")));
                    }
                }
            }
        }
        Ok(TupleSpec { lambda: lambda.clone(), pieces })
    }

    pub fn lambda(&self) -> &PhaseMatrix {
        &self.lambda
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Σ of wandering dimensions per subset.
    pub fn planted_dims(&self) -> BTreeMap<Vec<usize>, usize> {
        let mut out: BTreeMap<Vec<usize>, usize> = subsets(self.lambda.k()).into_iter().map(|a| (a, 0)).collect();
        for p in &self.pieces {
            *out.get_mut(&p.subset).unwrap() += p.wandering_dim;
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceLayout {
    pub subset: Vec<usize>,
    pub wandering_dim: usize,
    pub offset: usize,
    pub len: usize,
}

#[derive(Clone, Debug)]
pub struct AssembledTuple {
    pub tuple: RowTuple,
    pub max_degree: usize,
    pub pieces: Vec<PieceLayout>,
    /// Fock degree of each coordinate; 0 on pieces with A = ∅.
    pub degrees: Vec<usize>,
}

impl AssembledTuple {
    /// Coordinates of Fock degree ≤ D − m.
    pub fn interior(&self, m: usize) -> Vec<usize> {
        if m > self.max_degree {
            return Vec::new();
        }
        (0..self.degrees.len()).filter(|&b| self.degrees[b] + m <= self.max_degree).collect()
    }

    /// Orthogonal projection onto the coordinates of one piece.
    pub fn piece_projection(&self, p: usize) -> CMat {
        let l = &self.pieces[p];
        let mut out = zeros(self.degrees.len(), self.degrees.len());
        for b in l.offset..l.offset + l.len {
            out[(b, b)] = Complex64::new(1.0, 0.0);
        }
        out
    }
}

fn piece_ops(lambda: &PhaseMatrix, piece: &Piece, max_degree: usize) -> Result<(Vec<Vec<CMat>>, Vec<usize>)> {
    let k = lambda.k();
    let w = piece.wandering_dim;
    if piece.subset.is_empty() {
        let ops = (1..=k).map(|j| vec![piece.unitaries[&j].clone()]).collect();
        return Ok((ops, vec![0; w]));
    }
    let sub = lambda.restrict(&piece.subset)?;
    let model = TruncatedModel::new(&sub, max_degree)?;
    let degrees = model.degrees().iter().flat_map(|&d| std::iter::repeat_n(d, w)).collect();
    let mut ops = Vec::with_capacity(k);
    for j in 1..=k {
        if let Some(a) = piece.subset.iter().position(|&i| i == j) {
            ops.push((1..=lambda.n()[j - 1]).map(|s| kron_identity(model.shift(a + 1, s), w)).collect());
        } else {
            let mut phases = zeros(model.dim(), model.dim());
            for (b, word) in model.basis().iter().enumerate() {
                let ph = piece
                    .subset
                    .iter()
                    .enumerate()
                    .fold(Phase::ONE, |acc, (a, &i)| acc * agg(lambda, j, 1, i, &word.part(a + 1).letters));
                phases[(b, b)] = ph.to_complex();
            }
            ops.push(vec![phases.kronecker(&piece.unitaries[&j])]);
        }
    }
    Ok((ops, degrees))
}

/// Direct sum of the pieces, each truncated at Fock degree D.
pub fn assemble(spec: &TupleSpec, max_degree: usize) -> Result<AssembledTuple> {
    let lambda = &spec.lambda;
    let k = lambda.k();
    let mut parts = Vec::new();
    let mut layout = Vec::new();
    let mut degrees = Vec::new();
    for piece in &spec.pieces {
        let (ops, deg) = piece_ops(lambda, piece, max_degree)?;
        layout.push(PieceLayout {
            subset: piece.subset.clone(),
            wandering_dim: piece.wandering_dim,
            offset: degrees.len(),
            len: deg.len(),
        });
        degrees.extend(deg);
        parts.push(ops);
    }
    let dim = degrees.len();
    let mut ops: Vec<Vec<CMat>> = (1..=k).map(|i| vec![zeros(dim, dim); lambda.n()[i - 1]]).collect();
    for (piece, l) in parts.iter().zip(&layout) {
        for i in 0..k {
            for (s, m) in piece[i].iter().enumerate() {
                ops[i][s].view_mut((l.offset, l.offset), (l.len, l.len)).copy_from(m);
            }
        }
    }
    Ok(AssembledTuple { tuple: RowTuple::new(lambda, ops)?, max_degree, pieces: layout, degrees })
}

/// Doubly Λ-commuting residuals restricted to the coordinates where the
/// truncation is exact: (lac*) on degree ≤ D−1, (lac) on degree ≤ D−2.
pub fn interior_doubly_residual(t: &AssembledTuple) -> (f64, f64) {
    let v = &t.tuple;
    let (in1, in2) = (t.interior(1), t.interior(2));
    let mut lac: f64 = 0.0;
    let mut lac_star: f64 = 0.0;
    for i in 1..=v.k() {
        for j in 1..=v.k() {
            if i == j {
                continue;
            }
            for s in 1..=v.n()[i - 1] {
                for u in 1..=v.n()[j - 1] {
                    let lam = v.lambda().lambda(i, j, s, u).to_complex();
                    let (a, b) = (v.t(i, s), v.t(j, u));
                    lac = lac.max(norm_on_columns(&(a * b - (b * a) * lam), &in2));
                    let a_star = a.adjoint();
                    lac_star = lac_star.max(norm_on_columns(&(&a_star * b - (b * &a_star) * lam.conj()), &in1));
                }
            }
        }
    }
    (lac, lac_star)
}

#[derive(Clone, Debug, Serialize)]
pub struct WoldProjections {
    pub power: usize,
    pub subsets: Vec<Vec<usize>>,
    #[serde(skip)]
    pub projections: Vec<CMat>,
    /// P_i^{(s)} ≈ E_i(p) and P_i^{(c)} ≈ F_i(p), i = 1..k.
    #[serde(skip)]
    pub shift_parts: Vec<CMat>,
    #[serde(skip)]
    pub cuntz_parts: Vec<CMat>,
    pub ranks: Vec<usize>,
    pub idempotent_residual: f64,
    pub orthogonality_residual: f64,
    pub sum_residual: f64,
    pub commutation_residual: f64,
    pub stabilization_residual: f64,
    pub doubly_residual: f64,
}

fn reject_non_doubly(t: &AssembledTuple, tol: &Tolerances) -> Result<f64> {
    let (lac, lac_star) = interior_doubly_residual(t);
    let worst = lac.max(lac_star);
    if worst > tol.residual {
        return Err(Error::Rejected(format!(
            "tuple is not doubly Λ-commuting on the interior (residual {worst:.3e})"
        )));
    }
    Ok(worst)
}

/// E_i(q) = Σ_{r<q}Φ_i^r(I − Φ_i(I)) and F_i(q) = Φ_i^q(I) at q = p−1 and
/// q = p, as (E(p), F(p), E(p−1), F(p−1)).
fn wold_parts(v: &RowTuple, p: usize) -> [Vec<CMat>; 4] {
    let id = eye(v.dim());
    let mut out: [Vec<CMat>; 4] = Default::default();
    for i in 1..=v.k() {
        let delta = &id - v.phi(i, &id, 1.0);
        let mut e = zeros(v.dim(), v.dim());
        let mut term = delta;
        let mut f = id.clone();
        let (mut e0, mut f0) = (e.clone(), f.clone());
        for q in 0..p {
            if q + 1 == p {
                e0 = e.clone();
                f0 = f.clone();
            }
            e += &term;
            term = v.phi(i, &term, 1.0);
            f = v.phi(i, &f, 1.0);
        }
        out[0].push(e);
        out[1].push(f);
        out[2].push(e0);
        out[3].push(f0);
    }
    out
}

fn subset_products(k: usize, es: &[CMat], fs: &[CMat], dim: usize) -> Vec<CMat> {
    subsets(k)
        .iter()
        .map(|a| {
            let mut p = eye(dim);
            for i in 1..=k {
                p = if a.contains(&i) { p * &es[i - 1] } else { p * &fs[i - 1] };
            }
            p
        })
        .collect()
}

/// P_A = ∏_{i∈A}E_i(p)·∏_{i∉A}F_i(p) at p = D+1, where the truncated nets
/// have stopped moving, with the identities checked on the interior.
pub fn wold_projections(t: &AssembledTuple, tol: &Tolerances) -> Result<WoldProjections> {
    let doubly_residual = reject_non_doubly(t, tol)?;
    let v = &t.tuple;
    let (k, dim) = (v.k(), v.dim());
    let power = t.max_degree + 1;
    let [es, fs, es0, fs0] = wold_parts(v, power);
    let projections = subset_products(k, &es, &fs, dim);
    let previous = subset_products(k, &es0, &fs0, dim);

    let inner = t.interior(1);
    let mut idempotent_residual: f64 = 0.0;
    let mut orthogonality_residual: f64 = 0.0;
    let mut commutation_residual: f64 = 0.0;
    let mut stabilization_residual: f64 = 0.0;
    let mut total = zeros(dim, dim);
    for (a, p) in projections.iter().enumerate() {
        idempotent_residual = idempotent_residual.max(norm_on_columns(&(p * p - p), &inner));
        idempotent_residual = idempotent_residual.max(norm_on_columns(&(p - p.adjoint()), &inner));
        for q in &projections[a + 1..] {
            orthogonality_residual = orthogonality_residual.max(norm_on_columns(&(p * q), &inner));
        }
        for block in v.ops() {
            for x in block {
                commutation_residual = commutation_residual.max(norm_on_columns(&(p * x - x * p), &inner));
            }
        }
        stabilization_residual = stabilization_residual.max(norm_on_columns(&(p - &previous[a]), &inner));
        total += p;
    }
    let sum_residual = norm_on_columns(&(total - eye(dim)), &inner);
    let ranks = projections.iter().map(|p| rank(p, tol.rank)).collect();
    Ok(WoldProjections {
        power,
        subsets: subsets(k),
        projections,
        shift_parts: es,
        cuntz_parts: fs,
        ranks,
        idempotent_residual,
        orthogonality_residual,
        sum_residual,
        commutation_residual,
        stabilization_residual,
        doubly_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WanderingEntry {
    pub subset: Vec<usize>,
    pub dim: usize,
    /// V_j restricted to L_A, for j ∉ A with n_j = 1.
    #[serde(skip)]
    pub unitaries: BTreeMap<usize, CMat>,
    /// max ‖V*_{i,s}|_{L_A}‖ over i ∈ A.
    pub kernel_residual: f64,
    pub unitarity_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WanderingData {
    pub n: Vec<usize>,
    #[serde(skip)]
    pub lambda: PhaseMatrix,
    pub entries: Vec<WanderingEntry>,
    /// rank of the full defect Δ_V(I).
    pub defect_rank: usize,
}

impl WanderingData {
    pub fn dims(&self) -> BTreeMap<Vec<usize>, usize> {
        self.entries.iter().map(|e| (e.subset.clone(), e.dim)).collect()
    }

    pub fn entry(&self, subset: &[usize]) -> Option<&WanderingEntry> {
        self.entries.iter().find(|e| e.subset == subset)
    }
}

/// L_A = range of (∏_{j∉A}F_j(p))·Δ_A with Δ_A = ∏_{i∈A}(I − Φ_i(I)).
pub fn wandering_data(t: &AssembledTuple, tol: &Tolerances) -> Result<WanderingData> {
    reject_non_doubly(t, tol)?;
    let v = &t.tuple;
    let (k, dim) = (v.k(), v.dim());
    let id = eye(dim);
    let [_, fs, _, _] = wold_parts(v, t.max_degree + 1);
    let deltas: Vec<CMat> = (1..=k).map(|i| &id - v.phi(i, &id, 1.0)).collect();
    let mut entries = Vec::new();
    for a in subsets(k) {
        let mut x = eye(dim);
        for j in (1..=k).filter(|j| !a.contains(j)) {
            x *= &fs[j - 1];
        }
        for &i in &a {
            x *= &deltas[i - 1];
        }
        let (vals, vecs) = hermitian_eigen(&hermitian_part(&x));
        let keep: Vec<usize> = (0..vals.len()).filter(|&m| vals[m] > 0.5).collect();
        let q = vecs.select_columns(&keep);
        let mut kernel_residual: f64 = 0.0;
        for &i in &a {
            for s in 1..=v.n()[i - 1] {
                kernel_residual = kernel_residual.max(spectral_norm(&(v.t(i, s).adjoint() * &q)));
            }
        }
        let mut unitaries = BTreeMap::new();
        let mut unitarity_residual: f64 = 0.0;
        for j in (1..=k).filter(|j| !a.contains(j) && v.n()[j - 1] == 1) {
            let u = q.adjoint() * v.t(j, 1) * &q;
            unitarity_residual = unitarity_residual.max(spectral_norm(&(u.adjoint() * &u - eye(u.nrows()))));
            unitaries.insert(j, u);
        }
        entries.push(WanderingEntry { subset: a, dim: q.ncols(), unitaries, kernel_residual, unitarity_residual });
    }
    let defect_rank = rank(&deltas.iter().fold(eye(dim), |acc, d| acc * d), tol.rank);
    Ok(WanderingData { n: v.n().to_vec(), lambda: v.lambda().clone(), entries, defect_rank })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Equivalent,
    Not,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub verdict: Verdict,
    pub reasons: Vec<String>,
}

pub const FINGERPRINT_LENGTH: usize = 4;

/// tr of every word of length 1..=4 in the letters U_j, U_j*.
pub fn trace_fingerprint(ops: &[CMat], max_len: usize) -> Vec<Complex64> {
    let letters: Vec<CMat> = ops.iter().flat_map(|u| [u.clone(), u.adjoint()]).collect();
    let mut out = Vec::new();
    let mut layer: Vec<CMat> = vec![eye(ops.first().map_or(0, |u| u.nrows()))];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * letters.len());
        for w in &layer {
            for l in &letters {
                let m = w * l;
                out.push(m.trace());
                next.push(m);
            }
        }
        layer = next;
    }
    out
}

/// Dimensions decide; a single restricted unitary is compared by its
/// spectrum; two or more by trace fingerprints, which can only refute.
pub fn equivalence_check(x: &WanderingData, y: &WanderingData, tol: f64) -> Result<EquivalenceReport> {
    if x.n != y.n || !x.lambda.same_model(&y.lambda) {
        return Err(Error::Usage("wandering data over different models".into()));
    }
    let mut reasons = Vec::new();
    let mut verdict = Verdict::Equivalent;
    for (a, b) in x.entries.iter().zip(&y.entries) {
        if a.dim != b.dim {
            reasons.push(format!("subset {:?}: dimensions {} vs {}", a.subset, a.dim, b.dim));
            verdict = Verdict::Not;
            continue;
        }
        if a.dim == 0 || a.unitaries.is_empty() {
            continue;
        }
        let ua: Vec<CMat> = a.unitaries.values().cloned().collect();
        let ub: Vec<CMat> = b.unitaries.values().cloned().collect();
        if ua.len() == 1 {
            if !multiset_match(&normal_eigenvalues(&ua[0]), &normal_eigenvalues(&ub[0]), tol) {
                reasons.push(format!("subset {:?}: spectra differ", a.subset));
                verdict = Verdict::Not;
            }
            continue;
        }
        let fa = trace_fingerprint(&ua, FINGERPRINT_LENGTH);
        let fb = trace_fingerprint(&ub, FINGERPRINT_LENGTH);
        if fa.iter().zip(&fb).any(|(p, q)| (p - q).norm() > tol * a.dim as f64) {
            reasons.push(format!("subset {:?}: trace fingerprints differ", a.subset));
            verdict = Verdict::Not;
        } else {
            reasons.push(format!("subset {:?}: fingerprints agree up to length {FINGERPRINT_LENGTH}", a.subset));
            if verdict == Verdict::Equivalent {
                verdict = Verdict::Inconclusive;
            }
        }
    }
    Ok(EquivalenceReport { verdict, reasons })
}

/// No nontrivial joint reducing subspace: the commutant of the operators
/// and their adjoints is the scalars.
pub fn is_irreducible(ops: &[CMat], tol: f64) -> bool {
    commutant_dimension(ops, tol) == 1
}

/// Random valid spec for the round-trip suite: k ≤ 3, torus modulus in
/// {2,3,4,6}, wandering dimensions ≤ 6, D ≤ 4, assembled dimension ≤ max_dim.
pub fn random_tuple_spec(rng: &mut Prng, max_dim: usize) -> (TupleSpec, usize) {
    loop {
        let k = rng.random_range(1..=3);
        let modulus = [2u64, 3, 4, 6][rng.random_range(0..4)];
        let n: Vec<usize> = (0..k).map(|_| if rng.random_bool(0.7) { 1 } else { 2 }).collect();
        let lambda = random_lambda(rng, &n, modulus);
        let max_degree = rng.random_range(1..=4);
        let pieces: Vec<Piece> =
            (0..rng.random_range(1..=3)).filter_map(|_| random_piece(rng, &lambda)).collect();
        if pieces.is_empty() {
            continue;
        }
        let spec = TupleSpec::new(&lambda, pieces).expect("generated spec is valid");
        let dim: usize = spec.pieces.iter().map(|p| piece_dim(&lambda, p, max_degree)).sum();
        if dim <= max_dim {
            return (spec, max_degree);
        }
    }
}

fn piece_dim(lambda: &PhaseMatrix, piece: &Piece, max_degree: usize) -> usize {
    let n: Vec<usize> = piece.subset.iter().map(|&i| lambda.n()[i - 1]).collect();
    // Σ_{d ≤ D} #{multiwords of degree d}
    let mut counts = vec![0usize; max_degree + 1];
    counts[0] = 1;
    for &ni in &n {
        let mut next = vec![0usize; max_degree + 1];
        for (d, &c) in counts.iter().enumerate() {
            let mut words = 1usize;
            for e in 0..=(max_degree - d) {
                next[d + e] += c * words;
                words *= ni;
            }
        }
        counts = next;
    }
    counts.iter().sum::<usize>() * piece.wandering_dim
}

fn random_piece(rng: &mut Prng, lambda: &PhaseMatrix) -> Option<Piece> {
    let k = lambda.k();
    let subset: Vec<usize> = (1..=k).filter(|&i| lambda.n()[i - 1] > 1 || rng.random_bool(0.5)).collect();
    let rest: Vec<usize> = (1..=k).filter(|i| !subset.contains(i)).collect();
    match rest.len() {
        0 => Some(Piece::pure(subset, rng.random_range(1..=6))),
        1 => {
            let w = rng.random_range(1..=6);
            let u = random_unitary(rng, w);
            Some(Piece::with_unitaries(subset, BTreeMap::from([(rest[0], u)])))
        }
        _ => {
            let sols = weyl_solutions(lambda, &rest, 6);
            if sols.is_empty() {
                return None;
            }
            let (m, ex) = &sols[rng.random_range(0..sols.len())];
            let copies = rng.random_range(1..=6 / m);
            let frame = random_unitary(rng, m * copies);
            let unitaries = rest
                .iter()
                .zip(ex)
                .map(|(&j, &(x, z))| {
                    let mut diag = zeros(copies, copies);
                    for c in 0..copies {
                        diag[(c, c)] = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
                    }
                    let u = weyl_unitary(*m, x, z).kronecker(&diag);
                    (j, &frame * u * frame.adjoint())
                })
                .collect();
            Some(Piece::with_unitaries(subset, unitaries))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::phases::{validate_lambda, LambdaEntry};
    use crate::sampling::{clock_shift, stream};

    fn cfg_a() -> PhaseMatrix {
        validate_lambda(&[1, 1], &[LambdaEntry::new(1, 2, 1, 1, 1, 4)]).unwrap()
    }

    fn torus_piece() -> Piece {
        let (cl, x) = clock_shift(4);
        Piece::with_unitaries(vec![], BTreeMap::from([(1, cl), (2, x)]))
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn standard_pair_matches_model() {
        let spec = TupleSpec::new(&cfg_a(), vec![Piece::pure(vec![1, 2], 1)]).unwrap();
        let t = assemble(&spec, 2).unwrap();
        let model = TruncatedModel::new(&cfg_a(), 2).unwrap();
        assert_eq!(t.tuple.dim(), 6);
        assert_eq!(t.tuple.t(1, 1), model.shift(1, 1));
        assert_eq!(t.tuple.t(2, 1), model.shift(2, 1));
        let w = wold_projections(&t, &tol()).unwrap();
        let inner = t.interior(1);
        for (a, p) in w.subsets.iter().zip(&w.projections) {
            let target = if a == &vec![1, 2] { eye(6) } else { zeros(6, 6) };
            assert!(norm_on_columns(&(p - target), &inner) < 1e-14);
        }
        let wd = wandering_data(&t, &tol()).unwrap();
        assert_eq!(wd.dims()[&vec![1, 2]], 1);
        assert_eq!(wd.dims().values().sum::<usize>(), 1);
    }

    #[test]
    fn torus_is_all_cuntz() {
        let spec = TupleSpec::new(&cfg_a(), vec![torus_piece()]).unwrap();
        let t = assemble(&spec, 2).unwrap();
        assert_eq!(t.tuple.dim(), 4);
        let w = wold_projections(&t, &tol()).unwrap();
        assert!(spectral_norm(&(&w.projections[0] - eye(4))) < 1e-14);
        assert!(w.projections[1..].iter().all(|p| spectral_norm(p) < 1e-14));
    }

    #[test]
    fn half_shift_piece() {
        let (_, x) = clock_shift(4);
        let spec = TupleSpec::new(&cfg_a(), vec![Piece::with_unitaries(vec![1], BTreeMap::from([(2, x.clone())]))])
            .unwrap();
        let t = assemble(&spec, 2).unwrap();
        assert_eq!(t.tuple.dim(), 12);
        // V₂ χ_m⊗h = λ₂₁^m χ_m⊗X₄h with λ₂₁ = −i
        for m in 0..3 {
            let blk = t.tuple.t(2, 1).view((4 * m, 4 * m), (4, 4)).clone_owned();
            assert!(spectral_norm(&(blk - &x * c(0., -1.).powu(m as u32))) < 1e-15);
        }
        let wd = wandering_data(&t, &tol()).unwrap();
        let e = wd.entry(&[1]).unwrap();
        assert_eq!(e.dim, 4);
        assert!(e.kernel_residual < 1e-14);
        assert!(multiset_match(&normal_eigenvalues(&e.unitaries[&2]), &normal_eigenvalues(&x), 1e-10));
        let w = wold_projections(&t, &tol()).unwrap();
        for r in [w.idempotent_residual, w.orthogonality_residual, w.sum_residual, w.commutation_residual] {
            assert!(r < 1e-12);
        }
    }

    #[test]
    fn mixed_spec_ranks() {
        let spec = TupleSpec::new(&cfg_a(), vec![Piece::pure(vec![1, 2], 2), torus_piece()]).unwrap();
        let t = assemble(&spec, 3).unwrap();
        let w = wold_projections(&t, &tol()).unwrap();
        let inner = t.interior(1);
        let full = w.subsets.iter().position(|a| a == &vec![1, 2]).unwrap();
        let restricted = crate::linalg::principal(&w.projections[full], &inner);
        let pure_interior = inner.iter().filter(|&&b| b < t.pieces[0].len).count();
        assert_eq!(pure_interior, 6 * 2);
        assert_eq!(rank(&restricted, 1e-9), pure_interior);
        assert_eq!(w.ranks[0], 4);
        let wd = wandering_data(&t, &tol()).unwrap();
        assert_eq!(wd.defect_rank, 2);
        assert_eq!(wd.dims(), spec.planted_dims());
    }

    #[test]
    fn cuntz_rows_outside_subset_rejected() {
        let l = validate_lambda(&[2, 1], &[]).unwrap();
        let (cl, _) = clock_shift(2);
        let err = TupleSpec::new(&l, vec![Piece::with_unitaries(vec![2], BTreeMap::from([(1, cl)]))]).unwrap_err();
        assert!(err.to_string().contains("n_1 = 2"));
    }

    #[test]
    fn non_commuting_unitaries_rejected() {
        let (cl, x) = clock_shift(4);
        let piece = Piece::with_unitaries(vec![], BTreeMap::from([(1, x), (2, cl)]));
        assert!(TupleSpec::new(&cfg_a(), vec![piece]).is_err());
    }

    #[test]
    fn equivalence_examples() {
        let (cl, x) = clock_shift(4);
        let one = |u: CMat| {
            let spec = TupleSpec::new(&cfg_a(), vec![Piece::with_unitaries(vec![1], BTreeMap::from([(2, u)]))]).unwrap();
            wandering_data(&assemble(&spec, 2).unwrap(), &tol()).unwrap()
        };
        let r = equivalence_check(&one(x), &one(cl), 1e-8).unwrap();
        assert_eq!(r.verdict, Verdict::Equivalent);

        let dims = |w| {
            let spec = TupleSpec::new(&cfg_a(), vec![Piece::pure(vec![1, 2], w)]).unwrap();
            wandering_data(&assemble(&spec, 2).unwrap(), &tol()).unwrap()
        };
        assert_eq!(equivalence_check(&dims(2), &dims(2), 1e-8).unwrap().verdict, Verdict::Equivalent);
        assert_eq!(equivalence_check(&dims(2), &dims(3), 1e-8).unwrap().verdict, Verdict::Not);

        let torus = TupleSpec::new(&cfg_a(), vec![torus_piece()]).unwrap();
        let wd = wandering_data(&assemble(&torus, 1).unwrap(), &tol()).unwrap();
        assert_eq!(equivalence_check(&wd, &wd, 1e-8).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn torus_pair_is_irreducible() {
        let (cl, x) = clock_shift(4);
        assert!(is_irreducible(&[cl.clone(), x], 1e-9));
        assert!(!is_irreducible(&[cl], 1e-9));
    }

    #[test]
    fn random_specs_round_trip() {
        let mut rng = stream(7, "wold-unit");
        for _ in 0..10 {
            let (spec, d) = random_tuple_spec(&mut rng, 120);
            let t = assemble(&spec, d).unwrap();
            let wd = wandering_data(&t, &tol()).unwrap();
            assert_eq!(wd.dims(), spec.planted_dims());
        }
    }
}
