//! Seeded random inputs.
//!
//! Randomness contract: a run seed `u64` and a stream name give the
//! generator `ChaCha8Rng::seed_from_u64(seed)` with its stream set to the
//! 64-bit FNV-1a hash of the name. Streams with different names are
//! independent and the sequence is identical on every platform.

use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::fockmodel::TruncatedModel;
use crate::linalg::{eye, lifted_apply, lifted_apply_adjoint, orthonormal_range, zeros, CMat};
use crate::mwords::MultiWord;
use crate::phases::{validate_lambda, LambdaEntry, Phase, PhaseMatrix};
use crate::polyball::RowTuple;
use crate::rewrite::{Letter, StarPolynomial};

pub type Prng = ChaCha8Rng;

pub fn fnv1a64(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn stream(seed: u64, name: &str) -> Prng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a64(name));
    rng
}

pub fn gaussian(rng: &mut Prng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix(rng: &mut Prng, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| gaussian(rng))
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary(rng: &mut Prng, m: usize) -> CMat {
    let g = gaussian_matrix(rng, m, m);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut out = q;
    for j in 0..m {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..m {
            out[(i, j)] *= ph;
        }
    }
    out
}

pub fn random_hermitian(rng: &mut Prng, m: usize) -> CMat {
    let g = gaussian_matrix(rng, m, m);
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Clock C = diag(ω^j) and cyclic shift X e_j = e_{j+1}; C X = ω X C.
pub fn clock_shift(m: usize) -> (CMat, CMat) {
    let mut cl = zeros(m, m);
    let mut x = zeros(m, m);
    for j in 0..m {
        cl[(j, j)] = Phase::from_turns(j as i64, m as u64).to_complex();
        x[((j + 1) % m, j)] = Complex64::new(1.0, 0.0);
    }
    (cl, x)
}

/// Twist with every entry a random multiple of 1/modulus.
pub fn random_lambda(rng: &mut Prng, n: &[usize], modulus: u64) -> PhaseMatrix {
    let mut raw = Vec::new();
    for i in 1..=n.len() {
        for j in (i + 1)..=n.len() {
            for s in 1..=n[i - 1] {
                for t in 1..=n[j - 1] {
                    let turns = rng.random_range(0..modulus) as i64;
                    raw.push(LambdaEntry::new(i, j, s, t, turns, modulus));
                }
            }
        }
    }
    validate_lambda(n, &raw).expect("generated twist is valid")
}

pub fn random_letter(rng: &mut Prng, n: &[usize]) -> Letter {
    let i = rng.random_range(1..=n.len());
    let s = rng.random_range(1..=n[i - 1]);
    Letter { starred: rng.random_bool(0.5), block: i, index: s }
}

pub fn random_word(rng: &mut Prng, n: &[usize], len: usize) -> Vec<Letter> {
    (0..len).map(|_| random_letter(rng, n)).collect()
}

pub fn random_multiword(rng: &mut Prng, n: &[usize], degree: usize) -> MultiWord {
    let mut parts = vec![Vec::new(); n.len()];
    for _ in 0..degree {
        let i = rng.random_range(0..n.len());
        parts[i].push(rng.random_range(1..=n[i]));
    }
    MultiWord::from_letters(parts)
}

/// Random polynomial with Gaussian coefficients and |α|+|β| ≤ max_degree.
pub fn random_polynomial(rng: &mut Prng, n: &[usize], max_degree: usize, terms: usize) -> StarPolynomial {
    let mut p = StarPolynomial::zero(n);
    for _ in 0..terms {
        let total = rng.random_range(0..=max_degree);
        let na = rng.random_range(0..=total);
        let a = random_multiword(rng, n, na);
        let b = random_multiword(rng, n, total - na);
        p.add_term((a, b), Phase::ONE, gaussian(rng));
    }
    p
}

/// Random polynomial with small Gaussian-integer coefficients; terms may
/// cancel exactly, including down to the zero polynomial.
pub fn random_integer_polynomial(rng: &mut Prng, n: &[usize], max_degree: usize, terms: usize) -> StarPolynomial {
    let mut p = StarPolynomial::zero(n);
    let mut keys = Vec::new();
    for _ in 0..terms {
        let reuse = !keys.is_empty() && rng.random_bool(0.4);
        let key = if reuse {
            keys.choose(rng).cloned().unwrap()
        } else {
            let total = rng.random_range(0..=max_degree);
            let na = rng.random_range(0..=total);
            (random_multiword(rng, n, na), random_multiword(rng, n, total - na))
        };
        keys.push(key.clone());
        let re = rng.random_range(-2..=2) as f64;
        let im = rng.random_range(-2..=2) as f64;
        let ph = Phase::from_turns(rng.random_range(0..4), 4);
        p.add_term(key, ph, Complex64::new(re, im));
    }
    p
}

/// Smallest subspace containing `v` and invariant under every S*_{i,s}⊗I.
pub fn coinvariant_closure(model: &TruncatedModel, aux: usize, v: &CMat, tol: f64) -> CMat {
    let letters: Vec<(usize, usize)> =
        (1..=model.k()).flat_map(|i| (1..=model.n()[i - 1]).map(move |s| (i, s))).collect();
    let mut q = orthonormal_range(v, tol);
    loop {
        let mut cols = vec![q.clone()];
        for &(i, s) in &letters {
            cols.push(lifted_apply_adjoint(model.shift(i, s), aux, &q));
        }
        let refs: Vec<&CMat> = cols.iter().collect();
        let stacked = hstack(&refs);
        let next = orthonormal_range(&stacked, tol);
        if next.ncols() == q.ncols() {
            return next;
        }
        q = next;
    }
}

/// Largest ‖(I − QQ*)(S*⊗I)Q‖ over all letters is at most `tol`.
pub fn is_coinvariant(model: &TruncatedModel, aux: usize, q: &CMat, tol: f64) -> bool {
    (1..=model.k()).all(|i| {
        (1..=model.n()[i - 1]).all(|s| {
            let img = lifted_apply_adjoint(model.shift(i, s), aux, q);
            let rest = &img - q * (q.adjoint() * &img);
            crate::linalg::spectral_norm(&rest) <= tol
        })
    })
}

pub fn hstack(parts: &[&CMat]) -> CMat {
    let rows = parts.first().map_or(0, |m| m.nrows());
    let cols: usize = parts.iter().map(|m| m.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for m in parts {
        out.view_mut((0, at), (rows, m.ncols())).copy_from(*m);
        at += m.ncols();
    }
    out
}

/// Compression Q*(S_{i,s}⊗I)Q to the span of orthonormal Q.
pub fn compress(model: &TruncatedModel, aux: usize, q: &CMat) -> RowTuple {
    let ops = (1..=model.k())
        .map(|i| {
            (1..=model.n()[i - 1])
                .map(|s| q.adjoint() * lifted_apply(model.shift(i, s), aux, q))
                .collect()
        })
        .collect();
    RowTuple::new(model.lambda(), ops).expect("compression has model shape")
}

/// A jointly nilpotent member of the polyball: the compression of the
/// model to a random co-invariant subspace of dimension ≤ max_dim, seen in
/// a random orthonormal frame.
pub fn random_nilpotent_member(rng: &mut Prng, lambda: &PhaseMatrix, max_dim: usize, max_degree: usize) -> RowTuple {
    let model = TruncatedModel::new(lambda, max_degree).expect("valid model");
    loop {
        let aux = rng.random_range(1..=2);
        let support = rng.random_range(1..=2);
        let mut v = zeros(model.dim() * aux, 1);
        for _ in 0..support {
            let b = rng.random_range(0..model.dim());
            for j in 0..aux {
                v[(b * aux + j, 0)] += gaussian(rng);
            }
        }
        let q = coinvariant_closure(&model, aux, &v, 1e-8);
        if q.ncols() == 0 || q.ncols() > max_dim || !is_coinvariant(&model, aux, &q, 1e-12) {
            continue;
        }
        let t = compress(&model, aux, &q);
        if t.joint_nilpotency_order().is_none() {
            continue;
        }
        let w = random_unitary(rng, q.ncols());
        return t.conjugate_by(&w);
    }
}

/// Weyl unitaries X^{x_j}C^{z_j} on ℂ^m realizing the twist between the
/// given blocks (all with n_j = 1): U_iU_j = λ_{i,j}(1,1)U_jU_i.
/// Returns every (m, exponents) solution with m ≤ max_m.
pub fn weyl_solutions(lambda: &PhaseMatrix, blocks: &[usize], max_m: usize) -> Vec<(usize, Vec<(usize, usize)>)> {
    let mut out = Vec::new();
    for m in 1..=max_m {
        let c = blocks.len();
        let total = (m * m).pow(c as u32);
        for code in 0..total {
            let mut rest = code;
            let ex: Vec<(usize, usize)> = (0..c)
                .map(|_| {
                    let v = rest % (m * m);
                    rest /= m * m;
                    (v % m, v / m)
                })
                .collect();
            let ok = (0..c).all(|a| {
                (a + 1..c).all(|b| {
                    let (xi, zi) = ex[a];
                    let (xj, zj) = ex[b];
                    let turns = (zi * xj) as i64 - (xi * zj) as i64;
                    Phase::from_turns(turns, m as u64) == lambda.lambda(blocks[a], blocks[b], 1, 1)
                })
            });
            if ok {
                out.push((m, ex));
            }
        }
    }
    out
}

pub fn weyl_unitary(m: usize, x: usize, z: usize) -> CMat {
    let (cl, sh) = clock_shift(m);
    let mut u = eye(m);
    for _ in 0..x {
        u = u * &sh;
    }
    for _ in 0..z {
        u = u * &cl;
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral_norm;
    use crate::polyball::{check_membership, Tolerances};

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, "x").random();
        let b: u64 = stream(7, "x").random();
        let c: u64 = stream(7, "y").random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = stream(1, "u");
        let u = random_unitary(&mut rng, 5);
        assert!(spectral_norm(&(u.adjoint() * &u - eye(5))) < 1e-12);
    }

    #[test]
    fn nilpotent_members_are_members() {
        let mut rng = stream(3, "nil");
        let l = validate_lambda(&[1, 1], &[LambdaEntry::new(1, 2, 1, 1, 1, 4)]).unwrap();
        for _ in 0..5 {
            let t = random_nilpotent_member(&mut rng, &l, 6, 3);
            let rep = check_membership(&t, &Tolerances::default());
            assert!(rep.is_member && rep.is_pure, "{rep:?}");
            assert!(t.joint_nilpotency_order().is_some());
        }
    }

    #[test]
    fn weyl_pairs_twist() {
        let l = validate_lambda(&[1, 1], &[LambdaEntry::new(1, 2, 1, 1, 1, 4)]).unwrap();
        let sols = weyl_solutions(&l, &[1, 2], 4);
        assert!(sols.iter().all(|(m, _)| *m == 4));
        let (m, ex) = &sols[0];
        let u1 = weyl_unitary(*m, ex[0].0, ex[0].1);
        let u2 = weyl_unitary(*m, ex[1].0, ex[1].1);
        let lam = l.lambda(1, 2, 1, 1).to_complex();
        assert!(spectral_norm(&(&u1 * &u2 - (&u2 * &u1) * lam)) < 1e-12);
    }
}
