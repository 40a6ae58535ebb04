//! Words in the free semigroups F⁺_{n_i} and multi-words indexing the
//! standard basis χ_{(α₁,…,α_k)}.
//!
//! Blocks and letters are 1-based throughout. The empty word is the neutral
//! element g₀^i.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    pub block: usize,
    pub letters: Vec<usize>,
}

impl Word {
    pub fn empty(block: usize) -> Self {
        Word { block, letters: Vec::new() }
    }

    pub fn new(block: usize, letters: Vec<usize>, n_block: usize) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&s| s == 0 || s > n_block) {
            return Err(Error::Usage(format!(
                "letter {bad} out of range 1..{n_block} in block {block}"
            )));
        }
        Ok(Word { block, letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// An element (α₁,…,α_k) of F⁺_{n₁}×⋯×F⁺_{n_k}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiWord {
    parts: Vec<Word>,
}

impl MultiWord {
    pub fn empty(k: usize) -> Self {
        MultiWord { parts: (1..=k).map(Word::empty).collect() }
    }

    /// Builds from raw letter lists, one per block, without arity checks.
    pub fn from_letters(parts: Vec<Vec<usize>>) -> Self {
        MultiWord {
            parts: parts
                .into_iter()
                .enumerate()
                .map(|(b, letters)| Word { block: b + 1, letters })
                .collect(),
        }
    }

    pub fn from_letters_checked(parts: Vec<Vec<usize>>, n: &[usize]) -> Result<Self> {
        if parts.len() != n.len() {
            return Err(Error::Usage(format!(
                "multi-word has {} parts, expected {}",
                parts.len(),
                n.len()
            )));
        }
        let parts = parts
            .into_iter()
            .enumerate()
            .map(|(b, letters)| Word::new(b + 1, letters, n[b]))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiWord { parts })
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Word] {
        &self.parts
    }

    /// Part of block `i` (1-based).
    pub fn part(&self, i: usize) -> &Word {
        &self.parts[i - 1]
    }

    pub fn degree(&self) -> usize {
        self.parts.iter().map(Word::len).sum()
    }

    /// Per-block lengths (|α₁|,…,|α_k|).
    pub fn multidegree(&self) -> Vec<usize> {
        self.parts.iter().map(Word::len).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.iter().all(Word::is_empty)
    }

    /// α_i ↦ g_s^i α_i.
    pub fn prepend_letter(&self, i: usize, s: usize, n: &[usize]) -> Result<Self> {
        if i == 0 || i > self.k() {
            return Err(Error::Usage(format!("block {i} out of range 1..{}", self.k())));
        }
        if s == 0 || s > n[i - 1] {
            return Err(Error::Usage(format!("letter {s} out of range 1..{} for block {i}", n[i - 1])));
        }
        Ok(self.prepend_unchecked(i, s))
    }

    pub(crate) fn prepend_unchecked(&self, i: usize, s: usize) -> Self {
        let mut out = self.clone();
        out.parts[i - 1].letters.insert(0, s);
        out
    }

    /// α_i ↦ α_i g_s^i.
    pub(crate) fn append_unchecked(&self, i: usize, s: usize) -> Self {
        let mut out = self.clone();
        out.parts[i - 1].letters.push(s);
        out
    }

    /// Removes the leftmost letter of part `i`, returning it with the rest.
    pub fn strip_leftmost(&self, i: usize) -> Option<(usize, Self)> {
        let part = &self.parts[i - 1];
        let first = *part.letters.first()?;
        let mut out = self.clone();
        out.parts[i - 1].letters.remove(0);
        Some((first, out))
    }

    /// Concatenation part by part: (α_iβ_i)_i.
    pub fn concat(&self, other: &Self) -> Self {
        let parts = self
            .parts
            .iter()
            .zip(&other.parts)
            .map(|(a, b)| {
                let mut letters = a.letters.clone();
                letters.extend_from_slice(&b.letters);
                Word { block: a.block, letters }
            })
            .collect();
        MultiWord { parts }
    }
}

impl Ord for MultiWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.parts.cmp(&other.parts))
    }
}

impl PartialOrd for MultiWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, part) in self.parts.iter().enumerate() {
            if idx > 0 {
                f.write_str("|")?;
            }
            if part.is_empty() {
                f.write_str("e")?;
            } else {
                let s: Vec<String> = part.letters.iter().map(|l| l.to_string()).collect();
                f.write_str(&s.join("."))?;
            }
        }
        Ok(())
    }
}

impl FromStr for MultiWord {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut parts = Vec::new();
        for raw in text.trim().split('|') {
            let raw = raw.trim();
            if raw == "e" {
                parts.push(Vec::new());
                continue;
            }
            let letters = raw
                .split('.')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&v| v > 0)
                        .ok_or_else(|| Error::Usage(format!("bad letter {t:?} in multi-word {text:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            parts.push(letters);
        }
        Ok(MultiWord::from_letters(parts))
    }
}

impl Serialize for MultiWordText<'_> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self.0)
    }
}

/// Serializes a multi-word in its `"1.2|e"` text form.
pub struct MultiWordText<'a>(pub &'a MultiWord);

fn check_arities(n: &[usize]) -> Result<()> {
    if n.is_empty() {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if let Some(i) = n.iter().position(|&a| a == 0) {
        return Err(Error::Config(format!("arity n_{} must be at least 1", i + 1)));
    }
    Ok(())
}

fn words_of_len(arity: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (1..=arity).map(move |s| {
                    let mut v = w.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    out
}

/// All multi-words over arities `n` of total degree at most `max_degree`,
/// graded by degree, then lexicographic by block then letters.
pub fn enumerate_basis(n: &[usize], max_degree: usize) -> Result<Vec<MultiWord>> {
    check_arities(n)?;
    let mut acc: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for &arity in n {
        let mut next = Vec::new();
        for prefix in &acc {
            let used: usize = prefix.iter().map(Vec::len).sum();
            for len in 0..=(max_degree - used) {
                for w in words_of_len(arity, len) {
                    let mut p = prefix.clone();
                    p.push(w);
                    next.push(p);
                }
            }
        }
        acc = next;
    }
    let mut out: Vec<MultiWord> = acc.into_iter().map(MultiWord::from_letters).collect();
    out.sort();
    Ok(out)
}

/// Multi-words with a prescribed multidegree (|α₁|,…,|α_k|).
pub fn words_of_multidegree(n: &[usize], lens: &[usize]) -> Vec<MultiWord> {
    let mut acc: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for (&arity, &len) in n.iter().zip(lens) {
        let ws = words_of_len(arity, len);
        acc = acc
            .into_iter()
            .flat_map(|p| {
                ws.iter().map(move |w| {
                    let mut q = p.clone();
                    q.push(w.clone());
                    q
                })
            })
            .collect();
    }
    let mut out: Vec<MultiWord> = acc.into_iter().map(MultiWord::from_letters).collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_count(n: &[usize], d: usize) -> usize {
        // Σ over length vectors with total ≤ d of ∏ n_i^{ℓ_i}
        fn rec(n: &[usize], left: usize) -> usize {
            match n.split_first() {
                None => 1,
                Some((&a, rest)) => (0..=left).map(|l| a.pow(l as u32) * rec(rest, left - l)).sum(),
            }
        }
        rec(n, d)
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(enumerate_basis(&[1, 1], 2).unwrap().len(), 6);
        assert_eq!(enumerate_basis(&[2, 1], 2).unwrap().len(), 11);
        let b = enumerate_basis(&[1], 0).unwrap();
        assert_eq!(b, vec![MultiWord::empty(1)]);
        for (n, d) in [(vec![2, 2], 3), (vec![3], 4), (vec![1, 2, 1], 3)] {
            assert_eq!(enumerate_basis(&n, d).unwrap().len(), brute_count(&n, d));
        }
    }

    #[test]
    fn rejects_bad_arities() {
        assert!(matches!(enumerate_basis(&[], 2), Err(Error::Config(_))));
        assert!(matches!(enumerate_basis(&[1, 0], 2), Err(Error::Config(_))));
    }

    #[test]
    fn prepend_examples() {
        let n = [2, 1];
        let e = MultiWord::empty(2);
        let a = e.prepend_letter(1, 1, &n).unwrap();
        assert_eq!(a, MultiWord::from_letters(vec![vec![1], vec![]]));
        let b = a.prepend_letter(2, 1, &n).unwrap();
        assert_eq!(b, MultiWord::from_letters(vec![vec![1], vec![1]]));
        let c = MultiWord::from_letters(vec![vec![2, 1], vec![]]).prepend_letter(1, 1, &n).unwrap();
        assert_eq!(c, MultiWord::from_letters(vec![vec![1, 2, 1], vec![]]));
        assert!(e.prepend_letter(3, 1, &n).is_err());
        assert!(e.prepend_letter(2, 2, &n).is_err());
    }

    #[test]
    fn text_round_trip() {
        let w: MultiWord = "1.2|e".parse().unwrap();
        assert_eq!(w, MultiWord::from_letters(vec![vec![1, 2], vec![]]));
        assert_eq!(w.to_string(), "1.2|e");
        assert!("1.x|e".parse::<MultiWord>().is_err());
        assert!("0|e".parse::<MultiWord>().is_err());
    }
}
