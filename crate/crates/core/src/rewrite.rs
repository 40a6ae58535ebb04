//! Normal forms in the *-algebra generated by {s_{i,s}} and {s*_{i,s}}.
//!
//! Rules, applied to adjacent pairs until none fires:
//!
//! * R1: s*_{i,s} s_{i,t} → δ_{st}
//! * R2: s*_{i,s} s_{j,t} → conj(λ_{i,j}(s,t)) s_{j,t} s*_{i,s}, i ≠ j
//! * R3: s_{i,s} s_{j,t} → λ_{i,j}(s,t) s_{j,t} s_{i,s}, j < i
//! * R4: s*_{i,s} s*_{j,t} → λ_{i,j}(s,t) s*_{j,t} s*_{i,s}, j < i
//!
//! Terminal words read S_{1,α₁}⋯S_{k,α_k} S*_{1,β₁}⋯S*_{k,β_k} with
//! S*_{i,β} = (S_{i,β})*, so the starred letters of block i spell β_i reversed.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mwords::MultiWord;
use crate::phases::{Phase, PhaseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub starred: bool,
    pub block: usize,
    pub index: usize,
}

impl Letter {
    pub fn s(block: usize, index: usize) -> Self {
        Letter { starred: false, block, index }
    }

    pub fn star(block: usize, index: usize) -> Self {
        Letter { starred: true, block, index }
    }

    pub fn adjoint(self) -> Self {
        Letter { starred: !self.starred, ..self }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.starred {
            write!(f, "adj(S[{}:{}])", self.block, self.index)
        } else {
            write!(f, "S[{}:{}]", self.block, self.index)
        }
    }
}

/// Parses `S[1:1]adj(S[2:1])`-style letter sequences; `I` is the empty word.
pub fn parse_word(text: &str, n: &[usize]) -> Result<Vec<Letter>> {
    let bad = |msg: &str| Error::Usage(format!("cannot parse word {text:?}: {msg}"));
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        rest = rest.trim_start_matches(|c: char| c == '*' || c.is_whitespace());
        if rest.is_empty() {
            break;
        }
        let starred = rest.starts_with("adj(");
        if starred {
            rest = &rest[4..];
        } else if let Some(r) = rest.strip_prefix('I') {
            rest = r;
            continue;
        }
        let body = rest.strip_prefix("S[").ok_or_else(|| bad("expected S[i:s]"))?;
        let close = body.find(']').ok_or_else(|| bad("missing ]"))?;
        let (i, s) = body[..close].split_once(':').ok_or_else(|| bad("expected i:s"))?;
        let i: usize = i.trim().parse().map_err(|_| bad("bad block"))?;
        let s: usize = s.trim().parse().map_err(|_| bad("bad letter"))?;
        if i == 0 || i > n.len() || s == 0 || s > n[i - 1] {
            return Err(bad(&format!("letter S[{i}:{s}] out of range")));
        }
        rest = &body[close + 1..];
        if starred {
            rest = rest.strip_prefix(')').ok_or_else(|| bad("missing )"))?;
        }
        out.push(Letter { starred, block: i, index: s });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
}

enum Step {
    Kill,
    Cancel,
    Swap(Phase),
}

fn rule(lambda: &PhaseMatrix, x: Letter, y: Letter) -> Option<Step> {
    match (x.starred, y.starred) {
        (true, false) if x.block == y.block => Some(if x.index == y.index { Step::Cancel } else { Step::Kill }),
        (true, false) => Some(Step::Swap(lambda.lambda(x.block, y.block, x.index, y.index).conj())),
        (false, false) | (true, true) if y.block < x.block => {
            Some(Step::Swap(lambda.lambda(x.block, y.block, x.index, y.index)))
        }
        _ => None,
    }
}

/// Applies R1–R4 exhaustively with the given redex selection.
/// Returns `None` when the word reduces to zero.
pub fn normalize(lambda: &PhaseMatrix, word: &[Letter], strategy: Strategy) -> Option<(Phase, Vec<Letter>)> {
    let mut w = word.to_vec();
    let mut phase = Phase::ONE;
    loop {
        let positions = 0..w.len().saturating_sub(1);
        let found = match strategy {
            Strategy::Leftmost => positions.clone().find_map(|p| rule(lambda, w[p], w[p + 1]).map(|r| (p, r))),
            Strategy::Rightmost => positions.rev().find_map(|p| rule(lambda, w[p], w[p + 1]).map(|r| (p, r))),
        };
        match found {
            None => return Some((phase, w)),
            Some((_, Step::Kill)) => return None,
            Some((p, Step::Cancel)) => {
                w.drain(p..p + 2);
            }
            Some((p, Step::Swap(ph))) => {
                w.swap(p, p + 1);
                phase = phase * ph;
            }
        }
    }
}

/// a·S_{1,α₁}⋯S_{k,α_k}S*_{1,β₁}⋯S*_{k,β_k} with a = phase·scale.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalMonomial {
    pub phase: Phase,
    pub scale: Complex64,
    pub creators: MultiWord,
    pub annihilators: MultiWord,
}

impl NormalMonomial {
    pub fn coefficient(&self) -> Complex64 {
        self.phase.to_complex() * self.scale
    }

    /// Letter sequence of S_α S*_β, left to right.
    pub fn letters(&self) -> Vec<Letter> {
        monomial_letters(&self.creators, &self.annihilators)
    }

    fn from_terminal(k: usize, phase: Phase, word: &[Letter]) -> Self {
        let mut creators = vec![Vec::new(); k];
        let mut annihilators = vec![Vec::new(); k];
        for l in word {
            if l.starred {
                annihilators[l.block - 1].insert(0, l.index);
            } else {
                creators[l.block - 1].push(l.index);
            }
        }
        NormalMonomial {
            phase,
            scale: Complex64::new(1.0, 0.0),
            creators: MultiWord::from_letters(creators),
            annihilators: MultiWord::from_letters(annihilators),
        }
    }
}

pub fn monomial_letters(creators: &MultiWord, annihilators: &MultiWord) -> Vec<Letter> {
    let mut out = Vec::new();
    for part in creators.parts() {
        out.extend(part.letters.iter().map(|&s| Letter::s(part.block, s)));
    }
    for part in annihilators.parts() {
        out.extend(part.letters.iter().rev().map(|&s| Letter::star(part.block, s)));
    }
    out
}

pub type TermKey = (MultiWord, MultiWord);

/// Finite sum of normal monomials, keyed by (creators, annihilators).
#[derive(Clone, Debug, PartialEq)]
pub struct StarPolynomial {
    n: Vec<usize>,
    terms: BTreeMap<TermKey, (Phase, Complex64)>,
}

impl StarPolynomial {
    pub fn zero(n: &[usize]) -> Self {
        StarPolynomial { n: n.to_vec(), terms: BTreeMap::new() }
    }

    pub fn identity(n: &[usize]) -> Self {
        Self::monomial(n, MultiWord::empty(n.len()), MultiWord::empty(n.len()), Complex64::new(1.0, 0.0))
    }

    pub fn monomial(n: &[usize], creators: MultiWord, annihilators: MultiWord, coeff: Complex64) -> Self {
        let mut p = Self::zero(n);
        p.add_term((creators, annihilators), Phase::ONE, coeff);
        p
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn k(&self) -> usize {
        self.n.len()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = NormalMonomial> + '_ {
        self.terms.iter().map(|((c, a), &(phase, scale))| NormalMonomial {
            phase,
            scale,
            creators: c.clone(),
            annihilators: a.clone(),
        })
    }

    pub fn raw_terms(&self) -> &BTreeMap<TermKey, (Phase, Complex64)> {
        &self.terms
    }

    /// Adds phase·scale at `key`. Equal keys merge onto the stored phase;
    /// exact zeros are dropped.
    pub fn add_term(&mut self, key: TermKey, phase: Phase, scale: Complex64) {
        if scale == Complex64::new(0.0, 0.0) {
            return;
        }
        match self.terms.get_mut(&key) {
            None => {
                self.terms.insert(key, (phase, scale));
            }
            Some((p0, s0)) => {
                let merged = *s0 + scale * (phase * p0.conj()).to_complex();
                if merged == Complex64::new(0.0, 0.0) {
                    self.terms.remove(&key);
                } else {
                    *s0 = merged;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (key, &(ph, sc)) in &other.terms {
            out.add_term(key.clone(), ph, sc);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(&self.n);
        for (key, &(ph, sc)) in &self.terms {
            out.add_term(key.clone(), ph, sc * c);
        }
        out
    }

    /// Multiplies every coefficient by an exact phase.
    pub fn rotate(&self, ph: Phase) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            v.0 = v.0 * ph;
        }
        out
    }

    /// Drops terms with |coefficient| ≤ tol.
    pub fn prune(&self, tol: f64) -> Self {
        let mut out = self.clone();
        out.terms.retain(|_, (_, s)| s.norm() > tol);
        out
    }

    /// Max of |α|+|β| over terms.
    pub fn creator_degree(&self) -> usize {
        self.terms.keys().map(|(a, b)| a.degree() + b.degree()).max().unwrap_or(0)
    }

    pub fn max_annihilator_degree(&self) -> usize {
        self.terms.keys().map(|(_, b)| b.degree()).max().unwrap_or(0)
    }

    pub fn has_no_adjoints(&self) -> bool {
        self.terms.keys().all(|(_, b)| b.is_empty())
    }

    /// Coefficients as plain complex numbers.
    pub fn coefficients(&self) -> BTreeMap<TermKey, Complex64> {
        self.terms.iter().map(|(k, &(p, s))| (k.clone(), p.to_complex() * s)).collect()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let a = self.coefficients();
        let b = other.coefficients();
        let keys: std::collections::BTreeSet<&TermKey> = a.keys().chain(b.keys()).collect();
        let ok = keys.into_iter().all(|k| {
            let x = a.get(k).copied().unwrap_or_default();
            let y = b.get(k).copied().unwrap_or_default();
            (x - y).norm() <= tol
        });
        ok
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Usage(format!("polynomials over arities {:?} and {:?}", self.n, other.n)));
        }
        Ok(())
    }
}

/// Reduces a word to its normal form (a single monomial or zero).
pub fn reduce_word(lambda: &PhaseMatrix, word: &[Letter]) -> StarPolynomial {
    let mut out = StarPolynomial::zero(lambda.n());
    if let Some(m) = reduce_monomial(lambda, word) {
        out.add_term((m.creators, m.annihilators), m.phase, m.scale);
    }
    out
}

pub fn reduce_monomial(lambda: &PhaseMatrix, word: &[Letter]) -> Option<NormalMonomial> {
    let (phase, w) = normalize(lambda, word, Strategy::Leftmost)?;
    Some(NormalMonomial::from_terminal(lambda.k(), phase, &w))
}

pub fn multiply(lambda: &PhaseMatrix, p: &StarPolynomial, q: &StarPolynomial) -> Result<StarPolynomial> {
    p.check_compatible(q)?;
    if p.n != lambda.n() {
        return Err(Error::Usage("polynomial and twist have different arities".into()));
    }
    let mut out = StarPolynomial::zero(&p.n);
    for ((a1, b1), &(ph1, s1)) in &p.terms {
        for ((a2, b2), &(ph2, s2)) in &q.terms {
            let mut word = monomial_letters(a1, b1);
            word.extend(monomial_letters(a2, b2));
            if let Some(m) = reduce_monomial(lambda, &word) {
                out.add_term((m.creators, m.annihilators), ph1 * ph2 * m.phase, s1 * s2);
            }
        }
    }
    Ok(out)
}

pub fn adjoint(lambda: &PhaseMatrix, p: &StarPolynomial) -> StarPolynomial {
    let mut out = StarPolynomial::zero(&p.n);
    for ((a, b), &(ph, s)) in &p.terms {
        let word: Vec<Letter> = monomial_letters(a, b).into_iter().rev().map(Letter::adjoint).collect();
        let m = reduce_monomial(lambda, &word).expect("adjoint of a normal monomial is nonzero");
        out.add_term((m.creators, m.annihilators), ph.conj() * m.phase, s.conj());
    }
    out
}

pub fn format_coefficient(z: Complex64) -> String {
    let exact = [
        (Complex64::new(1.0, 0.0), "1"),
        (Complex64::new(-1.0, 0.0), "-1"),
        (Complex64::new(0.0, 1.0), "i"),
        (Complex64::new(0.0, -1.0), "-i"),
    ];
    if let Some((_, s)) = exact.iter().find(|(v, _)| *v == z) {
        return s.to_string();
    }
    if z.im == 0.0 {
        return format!("{}", z.re);
    }
    if z.re == 0.0 {
        return format!("{}i", z.im);
    }
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

impl fmt::Display for NormalMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})*", format_coefficient(self.coefficient()))?;
        let letters = self.letters();
        if letters.is_empty() {
            return f.write_str("I");
        }
        let (cre, ann): (Vec<Letter>, Vec<Letter>) = letters.iter().partition(|l| !l.starred);
        for l in &cre {
            write!(f, "{l}")?;
        }
        if !ann.is_empty() {
            if !cre.is_empty() {
                f.write_str("*")?;
            }
            for l in &ann {
                write!(f, "{l}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for StarPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms().map(|m| m.to_string()).collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phases::{validate_lambda, LambdaEntry};

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

    fn single(p: &StarPolynomial) -> NormalMonomial {
        assert_eq!(p.len(), 1);
        p.terms().next().unwrap()
    }

    #[test]
    fn creator_swap() {
        let l = cfg_a();
        let m = single(&reduce_word(&l, &[Letter::s(2, 1), Letter::s(1, 1)]));
        assert_eq!(m.coefficient(), Complex64::new(0.0, -1.0));
        assert_eq!(m.creators.to_string(), "1|1");
        assert!(m.annihilators.is_empty());
        assert_eq!(m.to_string(), "(-i)*S[1:1]S[2:1]");
    }

    #[test]
    fn starred_past_unstarred() {
        let l = cfg_a();
        let m = single(&reduce_word(&l, &[Letter::star(1, 1), Letter::s(2, 1)]));
        assert_eq!(m.coefficient(), Complex64::new(0.0, -1.0));
        assert_eq!(m.to_string(), "(-i)*S[2:1]*adj(S[1:1])");
    }

    #[test]
    fn orthogonality_kills() {
        let l = cfg_b();
        assert!(reduce_word(&l, &[Letter::star(1, 1), Letter::s(1, 2)]).is_zero());
        assert!(reduce_word(&l, &[Letter::star(1, 1), Letter::s(2, 1), Letter::s(1, 2)]).is_zero());
        let id = reduce_word(&l, &[Letter::star(1, 2), Letter::s(1, 2)]);
        assert_eq!(id, StarPolynomial::identity(&[2, 1]));
    }

    #[test]
    fn starred_blocks_sorted() {
        // s*_{2,1}s*_{1,1} = λ_{2,1}(1,1) s*_{1,1}s*_{2,1}
        let l = cfg_a();
        let m = single(&reduce_word(&l, &[Letter::star(2, 1), Letter::star(1, 1)]));
        assert_eq!(m.coefficient(), Complex64::new(0.0, -1.0));
        assert_eq!(m.annihilators.to_string(), "1|1");
    }

    #[test]
    fn multiply_examples() {
        let l = cfg_a();
        let n = [1, 1];
        let s11 = StarPolynomial::monomial(&n, "1|e".parse().unwrap(), MultiWord::empty(2), 1.0.into());
        let s11s = adjoint(&l, &s11);
        assert_eq!(single(&s11s).annihilators.to_string(), "1|e");
        let pq = multiply(&l, &s11, &s11s).unwrap();
        assert_eq!(single(&pq).to_string(), "(1)*S[1:1]*adj(S[1:1])");
        assert_eq!(multiply(&l, &s11s, &s11).unwrap(), StarPolynomial::identity(&n));
        let id = StarPolynomial::identity(&n);
        assert_eq!(multiply(&l, &id, &pq).unwrap(), pq);
        assert_eq!(adjoint(&l, &id), id);
    }

    #[test]
    fn word_parsing() {
        let w = parse_word("S[2:1]*adj(S[1:1]) S[1:1]", &[1, 1]).unwrap();
        assert_eq!(w, vec![Letter::s(2, 1), Letter::star(1, 1), Letter::s(1, 1)]);
        assert!(parse_word("S[3:1]", &[1, 1]).is_err());
        assert_eq!(parse_word("I", &[1]).unwrap(), vec![]);
    }
}
