//! Dense complex matrix helpers over nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn spectral_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Spectral norm of the columns of `a` selected by `cols`.
pub fn norm_on_columns(a: &CMat, cols: &[usize]) -> f64 {
    spectral_norm(&a.select_columns(cols))
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Eigenvalues ascending with matching eigenvector columns.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let e = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| e.eigenvalues[x].total_cmp(&e.eigenvalues[y]));
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = e.eigenvectors.select_columns(&order);
    (vals, vecs)
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    hermitian_eigen(a).0.first().copied().unwrap_or(0.0)
}

pub fn principal(a: &CMat, idx: &[usize]) -> CMat {
    a.select_rows(idx).select_columns(idx)
}

/// A ⊗ I_r with row index b·r + j.
pub fn kron_identity(a: &CMat, r: usize) -> CMat {
    if r == 1 {
        return a.clone();
    }
    let mut out = zeros(a.nrows() * r, a.ncols() * r);
    for col in 0..a.ncols() {
        for row in 0..a.nrows() {
            let v = a[(row, col)];
            if v != Complex64::new(0.0, 0.0) {
                for j in 0..r {
                    out[(row * r + j, col * r + j)] = v;
                }
            }
        }
    }
    out
}

/// (a⊗I_r)x without forming the Kronecker product.
pub fn lifted_apply(a: &CMat, r: usize, x: &CMat) -> CMat {
    lifted_apply_with(a.nrows(), a.ncols(), r, x, |m| m * a.transpose())
}

/// (a*⊗I_r)x without forming the Kronecker product.
pub fn lifted_apply_adjoint(a: &CMat, r: usize, x: &CMat) -> CMat {
    lifted_apply_with(a.ncols(), a.nrows(), r, x, |m| m * a.conjugate())
}

// Column c of x, rows b·r+j, is the r×cols matrix M[j,b]; (a⊗I)x is M aᵀ.
fn lifted_apply_with(rows: usize, cols: usize, r: usize, x: &CMat, f: impl Fn(&CMat) -> CMat) -> CMat {
    assert_eq!(x.nrows(), cols * r, "lifted_apply shape");
    let mut out = zeros(rows * r, x.ncols());
    for c in 0..x.ncols() {
        let m = CMat::from_column_slice(r, cols, x.column(c).as_slice());
        let y = f(&m);
        out.column_mut(c).copy_from_slice(y.as_slice());
    }
    out
}

/// Orthonormal basis of the column space, dropping singular values ≤ tol.
///
/// The rank comes from the singular values; the basis from a column-pivoted QR,
/// since the complex SVD with vectors can return an inaccurate leading pair.
pub fn orthonormal_range(a: &CMat, tol: f64) -> CMat {
    if a.ncols() == 0 || a.nrows() == 0 {
        return zeros(a.nrows(), 0);
    }
    let r = rank(a, tol);
    a.clone().col_piv_qr().q().columns(0, r).into_owned()
}

/// Singular values of `a`, descending.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn rank(a: &CMat, tol: f64) -> usize {
    singular_values(a).into_iter().filter(|&s| s > tol).count()
}

/// Range of a Hermitian positive matrix together with √eigenvalues:
/// returns (V_r, √μ) for eigenvalues μ > rank_tol.
pub fn psd_frame(a: &CMat, rank_tol: f64) -> (CMat, Vec<f64>) {
    let (vals, vecs) = hermitian_eigen(a);
    let keep: Vec<usize> = (0..vals.len()).rev().filter(|&i| vals[i] > rank_tol).collect();
    let roots = keep.iter().map(|&i| vals[i].sqrt()).collect();
    (vecs.select_columns(&keep), roots)
}

/// Projection onto the column span of an orthonormal matrix.
pub fn projector(q: &CMat) -> CMat {
    q * q.adjoint()
}

/// Distance of the columns of `x` from the span of orthonormal `q`.
pub fn span_defect(q: &CMat, x: &CMat) -> f64 {
    spectral_norm(&(x - q * (q.adjoint() * x)))
}

/// Dimension of {X : X U_j = U_j X for all j}.
pub fn commutant_dimension(ops: &[CMat], tol: f64) -> usize {
    let Some(first) = ops.first() else { return 0 };
    let m = first.nrows();
    let n2 = m * m;
    let mut stacked = zeros(2 * n2 * ops.len(), n2);
    for (q, u) in ops.iter().enumerate() {
        for col in 0..n2 {
            let mut x = zeros(m, m);
            x[(col % m, col / m)] = Complex64::new(1.0, 0.0);
            for adj in 0..2 {
                let uu = if adj == 0 { u.clone() } else { u.adjoint() };
                let r = &x * &uu - &uu * &x;
                for (k, v) in r.iter().enumerate() {
                    stacked[((2 * q + adj) * n2 + k, col)] = *v;
                }
            }
        }
    }
    n2 - rank(&stacked, tol)
}

/// Eigenvalues of a normal matrix via the complex Schur form.
pub fn normal_eigenvalues(a: &CMat) -> Vec<Complex64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let t = a.clone().schur().unpack().1;
    (0..a.nrows()).map(|i| t[(i, i)]).collect()
}

/// True when the two multisets agree up to a greedy nearest match within tol.
pub fn multiset_match(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in a {
        let best = (0..b.len())
            .filter(|&j| !used[j])
            .min_by(|&p, &q| (b[p] - x).norm().total_cmp(&(b[q] - x).norm()));
        match best {
            Some(j) if (b[j] - x).norm() <= tol => used[j] = true,
            _ => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_layout() {
        let a = CMat::from_row_slice(2, 2, &[c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)]);
        let k = kron_identity(&a, 2);
        assert_eq!(k[(0, 2)], c(2., 0.));
        assert_eq!(k[(1, 3)], c(2., 0.));
        assert_eq!(k[(2, 0)], c(3., 0.));
        assert_eq!(k[(0, 1)], c(0., 0.));
    }

    #[test]
    fn eigen_sorted() {
        let a = CMat::from_row_slice(2, 2, &[c(2., 0.), c(0., 1.), c(0., -1.), c(2., 0.)]);
        let (v, _) = hermitian_eigen(&a);
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn schur_spectrum_of_cycle() {
        let mut x = zeros(4, 4);
        for j in 0..4 {
            x[((j + 1) % 4, j)] = c(1., 0.);
        }
        let ev = normal_eigenvalues(&x);
        let roots = [c(1., 0.), c(0., 1.), c(-1., 0.), c(0., -1.)];
        assert!(multiset_match(&ev, &roots, 1e-10));
    }

    #[test]
    fn commutant_of_scalar_and_cycle() {
        let mut x = zeros(3, 3);
        for j in 0..3 {
            x[((j + 1) % 3, j)] = c(1., 0.);
        }
        assert_eq!(commutant_dimension(&[x.clone()], 1e-9), 3);
        let w = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        let cl = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1., 0.), w, w * w]));
        assert_eq!(commutant_dimension(&[x, cl], 1e-9), 1);
    }
}
