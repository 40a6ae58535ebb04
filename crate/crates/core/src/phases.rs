//! Exact roots of unity and the twist datum Λ = {λ_{i,j}(s,t)}.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mwords::Word;

/// exp(2πi·num/den), kept reduced with 0 ≤ num < den.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Phase {
    num: u64,
    den: u64,
}

impl Phase {
    pub const ONE: Phase = Phase { num: 0, den: 1 };

    pub fn from_turns(num: i64, den: u64) -> Self {
        assert!(den > 0, "phase denominator must be positive");
        let d = den as i128;
        let r = (num as i128).rem_euclid(d) as u64;
        let g = r.gcd(&den);
        Phase { num: r / g, den: den / g }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    pub fn conj(self) -> Self {
        Phase::from_turns(-(self.num as i64), self.den)
    }

    pub fn pow(self, e: i64) -> Self {
        let num = (self.num as i128 * e as i128).rem_euclid(self.den as i128);
        Phase::from_turns(num as i64, self.den)
    }

    /// Turns expressed over modulus `n`, if `n` is a multiple of the denominator.
    pub fn turns_mod(&self, n: u64) -> Option<u64> {
        (n % self.den == 0).then(|| self.num * (n / self.den))
    }

    /// Exact for multiples of a quarter turn.
    pub fn to_complex(self) -> Complex64 {
        if (4 * self.num) % self.den == 0 {
            return match 4 * self.num / self.den {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
        }
        let theta = std::f64::consts::TAU * self.num as f64 / self.den as f64;
        Complex64::new(theta.cos(), theta.sin())
    }

    /// Rounds the argument of `z` to the nearest multiple of 1/n turn.
    pub fn from_complex(z: Complex64, n: u64) -> Self {
        let turns = z.arg() / std::f64::consts::TAU * n as f64;
        Phase::from_turns(turns.round() as i64, n)
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        let l = self.den.lcm(&rhs.den);
        let a = self.num * (l / self.den) + rhs.num * (l / rhs.den);
        Phase::from_turns((a % l) as i64, l)
    }
}

impl Default for Phase {
    fn default() -> Self {
        Phase::ONE
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A rational number of turns `p/q` as written in configs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Turns {
    pub num: i64,
    pub den: u64,
}

impl FromStr for Turns {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("bad turn fraction {s:?}, expected p/q"));
        let (p, q) = match s.trim().split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s.trim(), "1"),
        };
        let num: i64 = p.parse().map_err(|_| bad())?;
        let den: u64 = q.parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        Ok(Turns { num, den })
    }
}

impl fmt::Display for Turns {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// One raw twist entry λ_{i,j}(s,t) = exp(2πi·turns).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LambdaEntry {
    pub i: usize,
    pub j: usize,
    pub s: usize,
    pub t: usize,
    pub turns: Turns,
}

impl LambdaEntry {
    pub fn new(i: usize, j: usize, s: usize, t: usize, num: i64, den: u64) -> Self {
        LambdaEntry { i, j, s, t, turns: Turns { num, den } }
    }
}

/// The validated twist Λ. Entries are stored as integers modulo `modulus`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseMatrix {
    n: Vec<usize>,
    modulus: u64,
    offsets: Vec<usize>,
    table: Vec<u64>,
}

impl PhaseMatrix {
    pub fn k(&self) -> usize {
        self.n.len()
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    /// Global modulus N: every entry is a power of exp(2πi/N).
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    fn slot(&self, i: usize, s: usize) -> usize {
        self.offsets[i - 1] + s - 1
    }

    fn letters(&self) -> usize {
        self.n.iter().sum()
    }

    /// λ_{i,j}(s,t) for i ≠ j. Panics on i = j or out-of-range arguments.
    pub fn lambda(&self, i: usize, j: usize, s: usize, t: usize) -> Phase {
        assert!(i != j, "no intra-block twist");
        let turns = self.table[self.slot(i, s) * self.letters() + self.slot(j, t)];
        Phase::from_turns(turns as i64, self.modulus)
    }

    /// Raw turns of λ_{i,j}(s,t) modulo N.
    pub fn turns(&self, i: usize, j: usize, s: usize, t: usize) -> u64 {
        self.table[self.slot(i, s) * self.letters() + self.slot(j, t)]
    }

    /// The commuting twist (all entries 1).
    pub fn trivial(n: &[usize]) -> Result<Self> {
        validate_lambda(n, &[])
    }

    /// Every defined entry as (i,j,s,t,turns mod N), i < j only.
    pub fn entries(&self) -> Vec<(usize, usize, usize, usize, u64)> {
        let mut out = Vec::new();
        for i in 1..=self.k() {
            for j in (i + 1)..=self.k() {
                for s in 1..=self.n[i - 1] {
                    for t in 1..=self.n[j - 1] {
                        out.push((i, j, s, t, self.turns(i, j, s, t)));
                    }
                }
            }
        }
        out
    }

    pub fn same_model(&self, other: &PhaseMatrix) -> bool {
        self.n == other.n && self.entries().iter().zip(other.entries()).all(|(a, b)| {
            Phase::from_turns(a.4 as i64, self.modulus) == Phase::from_turns(b.4 as i64, other.modulus)
        })
    }

    /// The twist between the listed blocks, renumbered 1..=blocks.len().
    pub fn restrict(&self, blocks: &[usize]) -> Result<PhaseMatrix> {
        let n: Vec<usize> = blocks.iter().map(|&i| self.n[i - 1]).collect();
        let mut raw = Vec::new();
        for (a, &i) in blocks.iter().enumerate() {
            for (b, &j) in blocks.iter().enumerate().skip(a + 1) {
                for s in 1..=self.n[i - 1] {
                    for t in 1..=self.n[j - 1] {
                        raw.push(LambdaEntry::new(a + 1, b + 1, s, t, self.turns(i, j, s, t) as i64, self.modulus));
                    }
                }
            }
        }
        validate_lambda(&n, &raw)
    }

    pub fn check_block(&self, i: usize, s: usize) -> Result<()> {
        if i == 0 || i > self.k() {
            return Err(Error::Usage(format!("block {i} out of range 1..{}", self.k())));
        }
        if s == 0 || s > self.n[i - 1] {
            return Err(Error::Usage(format!("letter {s} out of range 1..{} for block {i}", self.n[i - 1])));
        }
        Ok(())
    }
}

/// Builds Λ from raw entries. Missing directions are filled by conjugation,
/// unspecified pairs default to 1, and N is the lcm of the denominators.
pub fn validate_lambda(n: &[usize], raw: &[LambdaEntry]) -> Result<PhaseMatrix> {
    if n.is_empty() {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if let Some(i) = n.iter().position(|&a| a == 0) {
        return Err(Error::Config(format!("arity n_{} must be at least 1", i + 1)));
    }
    let k = n.len();
    let err = |index: usize, e: &LambdaEntry, reason: String| Error::Lambda {
        index,
        i: e.i,
        j: e.j,
        s: e.s,
        t: e.t,
        reason,
    };
    let mut modulus = 1u64;
    for (idx, e) in raw.iter().enumerate() {
        if e.i == 0 || e.i > k || e.j == 0 || e.j > k {
            return Err(err(idx, e, format!("block out of range 1..{k}")));
        }
        if e.i == e.j {
            return Err(err(idx, e, "intra-block twist is not allowed".into()));
        }
        if e.s == 0 || e.s > n[e.i - 1] || e.t == 0 || e.t > n[e.j - 1] {
            return Err(err(idx, e, "letter out of range".into()));
        }
        if e.turns.den == 0 {
            return Err(err(idx, e, "zero denominator".into()));
        }
        let p = Phase::from_turns(e.turns.num, e.turns.den);
        modulus = modulus.lcm(&p.den());
    }

    let mut offsets = Vec::with_capacity(k);
    let mut acc = 0;
    for &a in n {
        offsets.push(acc);
        acc += a;
    }
    let letters = acc;
    let mut table: Vec<Option<(u64, usize)>> = vec![None; letters * letters];
    let slot = |i: usize, s: usize| offsets[i - 1] + s - 1;

    for (idx, e) in raw.iter().enumerate() {
        let turns = Phase::from_turns(e.turns.num, e.turns.den).turns_mod(modulus).unwrap();
        let fwd = slot(e.i, e.s) * letters + slot(e.j, e.t);
        let back = slot(e.j, e.t) * letters + slot(e.i, e.s);
        let conj = (modulus - turns) % modulus;
        if let Some((_, prev)) = table[fwd] {
            if raw[prev].i == e.i {
                return Err(err(idx, e, format!("duplicate of entry {prev}")));
            }
            if table[fwd].unwrap().0 != turns {
                return Err(err(idx, e, format!("not the conjugate of entry {prev}")));
            }
        }
        table[fwd] = Some((turns, idx));
        table[back] = Some((conj, idx));
    }

    Ok(PhaseMatrix {
        n: n.to_vec(),
        modulus,
        offsets,
        table: table.into_iter().map(|c| c.map_or(0, |(t, _)| t)).collect(),
    })
}

/// 𝝀_{i,j}(s,β) = ∏_b λ_{i,j}(s,b) over the letters of β (block j ≠ i).
pub fn aggregate_phase(lambda: &PhaseMatrix, i: usize, s: usize, beta: &Word) -> Result<Phase> {
    if beta.block == i {
        return Err(Error::Usage(format!("aggregate phase needs distinct blocks, got {i} twice")));
    }
    lambda.check_block(i, s)?;
    for &b in &beta.letters {
        lambda.check_block(beta.block, b)?;
    }
    Ok(agg(lambda, i, s, beta.block, &beta.letters))
}

/// 𝝀_{i,j}(α,β) = ∏_a ∏_b λ_{i,j}(a,b).
pub fn aggregate_phase_words(lambda: &PhaseMatrix, alpha: &Word, beta: &Word) -> Result<Phase> {
    if alpha.block == beta.block {
        return Err(Error::Usage(format!(
            "aggregate phase needs distinct blocks, got {} twice",
            alpha.block
        )));
    }
    let mut out = Phase::ONE;
    for &a in &alpha.letters {
        out = out * aggregate_phase(lambda, alpha.block, a, beta)?;
    }
    Ok(out)
}

pub(crate) fn agg(lambda: &PhaseMatrix, i: usize, s: usize, j: usize, beta: &[usize]) -> Phase {
    let m = lambda.modulus();
    let total: u64 = beta.iter().map(|&b| lambda.turns(i, j, s, b)).sum();
    Phase::from_turns((total % m) as i64, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_a() -> PhaseMatrix {
        validate_lambda(&[1, 1], &[LambdaEntry::new(1, 2, 1, 1, 1, 4)]).unwrap()
    }

    #[test]
    fn conjugate_fill_in() {
        let l = cfg_a();
        assert_eq!(l.modulus(), 4);
        assert_eq!(l.lambda(1, 2, 1, 1).to_complex(), Complex64::new(0.0, 1.0));
        assert_eq!(l.lambda(2, 1, 1, 1).to_complex(), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn non_conjugate_pair_rejected() {
        let raw = [LambdaEntry::new(1, 2, 1, 1, 1, 4), LambdaEntry::new(2, 1, 1, 1, 1, 4)];
        match validate_lambda(&[1, 1], &raw) {
            Err(Error::Lambda { index, i, j, .. }) => assert_eq!((index, i, j), (1, 2, 1)),
            other => panic!("expected lambda error, got {other:?}"),
        }
        let ok = [LambdaEntry::new(1, 2, 1, 1, 1, 4), LambdaEntry::new(2, 1, 1, 1, -1, 4)];
        assert!(validate_lambda(&[1, 1], &ok).is_ok());
    }

    #[test]
    fn intra_block_rejected() {
        let raw = [LambdaEntry::new(1, 1, 1, 2, 1, 4)];
        assert!(matches!(validate_lambda(&[2], &raw), Err(Error::Lambda { .. })));
    }

    #[test]
    fn modulus_is_lcm() {
        let raw = [LambdaEntry::new(1, 2, 1, 1, 1, 4), LambdaEntry::new(1, 2, 2, 1, 1, 2)];
        let l = validate_lambda(&[2, 1], &raw).unwrap();
        assert_eq!(l.modulus(), 4);
        assert_eq!(l.lambda(1, 2, 1, 1).to_complex(), Complex64::new(0.0, 1.0));
        assert_eq!(l.lambda(1, 2, 2, 1).to_complex(), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn aggregate_examples() {
        let l = cfg_a();
        let w3 = Word { block: 1, letters: vec![1, 1, 1] };
        assert_eq!(aggregate_phase(&l, 2, 1, &w3).unwrap().to_complex(), Complex64::new(0.0, 1.0));
        let w2 = Word { block: 2, letters: vec![1, 1] };
        assert_eq!(aggregate_phase(&l, 1, 1, &w2).unwrap().to_complex(), Complex64::new(-1.0, 0.0));
        assert!(aggregate_phase(&l, 1, 1, &Word::empty(2)).unwrap().is_one());
        let a2 = Word { block: 1, letters: vec![1, 1] };
        assert!(aggregate_phase_words(&l, &a2, &w2).unwrap().is_one());
        assert!(aggregate_phase_words(&l, &Word::empty(1), &w2).unwrap().is_one());
        assert!(aggregate_phase(&l, 1, 1, &a2).is_err());
    }

    #[test]
    fn turn_parsing() {
        assert_eq!("1/4".parse::<Turns>().unwrap(), Turns { num: 1, den: 4 });
        assert_eq!("-3/8".parse::<Turns>().unwrap(), Turns { num: -3, den: 8 });
        assert_eq!("0".parse::<Turns>().unwrap(), Turns { num: 0, den: 1 });
        assert!("1/0".parse::<Turns>().is_err());
    }
}
