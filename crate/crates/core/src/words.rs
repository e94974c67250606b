//! Product words over a matrix family and their cyclic structure.
//!
//! A word `[d0, d1, ..., dn-1]` denotes the product `A_{dn-1} ... A_{d1} A_{d0}`:
//! the first letter acts first. Letters are zero-based internally and
//! shown one-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::MatrixFamily;
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProductWord {
    pub letters: Vec<usize>,
}

impl ProductWord {
    pub fn new(letters: Vec<usize>) -> Self {
        ProductWord { letters }
    }

    /// Builds a word from one-based letters.
    pub fn from_one_based(letters: &[usize]) -> Result<Self> {
        if letters.contains(&0) {
            return Err(Error::InvalidInput("letters are one-based".into()));
        }
        Ok(ProductWord::new(letters.iter().map(|l| l - 1).collect()))
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.letters.iter().map(|l| l + 1).collect()
    }

    /// True unless the word is a proper power of a shorter word.
    pub fn is_simple(&self) -> bool {
        let n = self.letters.len();
        if n == 0 {
            return false;
        }
        (1..n)
            .filter(|p| n.is_multiple_of(*p))
            .all(|p| (p..n).any(|i| self.letters[i] != self.letters[i - p]))
    }

    /// Lexicographically least rotation.
    pub fn cyclic_normal_form(&self) -> ProductWord {
        let n = self.letters.len();
        let best = (0..n)
            .map(|s| self.rotated(s))
            .min()
            .unwrap_or_default();
        ProductWord::new(best)
    }

    fn rotated(&self, s: usize) -> Vec<usize> {
        let n = self.letters.len();
        (0..n).map(|i| self.letters[(i + s) % n]).collect()
    }

    /// Rotation by `s` letters: `[d_s, ..., d_{n-1}, d_0, ..., d_{s-1}]`.
    pub fn rotation(&self, s: usize) -> ProductWord {
        ProductWord::new(self.rotated(s % self.letters.len().max(1)))
    }
}

impl fmt::Display for ProductWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|l| l.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Product written with generator labels in reading order, repeated
/// factors collapsed: letters `[0, 0, 1]` with labels `A, B` give `B A^2`.
pub fn product_name(word: &ProductWord, labels: &[String]) -> String {
    let mut parts: Vec<(usize, usize)> = Vec::new();
    for &l in word.letters.iter().rev() {
        match parts.last_mut() {
            Some((last, count)) if *last == l => *count += 1,
            _ => parts.push((l, 1)),
        }
    }
    parts
        .iter()
        .map(|&(l, c)| {
            let name = labels.get(l).cloned().unwrap_or_else(|| format!("#{}", l + 1));
            if c == 1 {
                name
            } else {
                format!("{name}^{c}")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Evaluates the product of a word; the empty word gives the identity.
pub fn evaluate(family: &MatrixFamily, word: &ProductWord) -> Result<Matrix> {
    let d = family.dim();
    let mut p = Matrix::identity(d, d);
    for &l in &word.letters {
        let a = family.get(l).ok_or_else(|| {
            Error::InvalidInput(format!("letter {} exceeds family size {}", l + 1, family.len()))
        })?;
        p = a * p;
    }
    Ok(p)
}

/// Lyndon words (simple necklace representatives) of length `1..=n_max`
/// over `m` letters, ordered by length and then lexicographically.
pub fn simple_necklaces(m: usize, n_max: usize) -> Vec<ProductWord> {
    let mut out = Vec::new();
    if m == 0 || n_max == 0 {
        return out;
    }
    // Duval's successor rule enumerates Lyndon words in lexicographic order.
    let mut w: Vec<usize> = vec![0];
    loop {
        out.push(ProductWord::new(w.clone()));
        let period = w.len();
        while w.len() < n_max {
            w.push(w[w.len() - period]);
        }
        while w.last() == Some(&(m - 1)) {
            w.pop();
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.letters.cmp(&b.letters)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(l: &[usize]) -> ProductWord {
        ProductWord::new(l.to_vec())
    }

    #[test]
    fn simplicity() {
        assert!(w(&[0, 1]).is_simple());
        assert!(!w(&[0, 1, 0, 1]).is_simple());
        assert!(!w(&[1, 1]).is_simple());
        assert!(w(&[0, 0, 1, 1]).is_simple());
        assert!(!w(&[]).is_simple());
    }

    #[test]
    fn normal_form_is_least_rotation() {
        assert_eq!(w(&[1, 0, 0]).cyclic_normal_form(), w(&[0, 0, 1]));
        assert_eq!(w(&[1, 1, 0, 0]).cyclic_normal_form(), w(&[0, 0, 1, 1]));
    }

    #[test]
    fn binary_lyndon_words_up_to_four() {
        let got: Vec<Vec<usize>> = simple_necklaces(2, 4).into_iter().map(|w| w.letters).collect();
        let want = vec![
            vec![0],
            vec![1],
            vec![0, 1],
            vec![0, 0, 1],
            vec![0, 1, 1],
            vec![0, 0, 0, 1],
            vec![0, 0, 1, 1],
            vec![0, 1, 1, 1],
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn display_is_one_based() {
        assert_eq!(w(&[0, 2]).to_string(), "[1 3]");
        assert_eq!(ProductWord::from_one_based(&[1, 3]).unwrap(), w(&[0, 2]));
        assert!(ProductWord::from_one_based(&[0]).is_err());
    }
}
