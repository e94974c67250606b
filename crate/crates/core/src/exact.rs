//! Exact rational matrices and the `.rat` text format.
//!
//! A `.rat` file holds one or more blocks. Each block is a `rows cols`
//! header followed by `rows * cols` entries in row-major order. Entries
//! are integers, `p/q` fractions or finite decimals. `#` starts a comment.

use std::ops::Mul;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Parses `p/q`, an integer, or a decimal such as `-0.125` or `1e-3` exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if s.contains('/') {
        let r = BigRational::from_str(s).ok()?;
        return Some(r);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(i) => (&digits[..i], &digits[i + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    let num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(num);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigRational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(RatMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigRational::one();
        }
        m
    }

    pub fn from_columns(cols: &[RatMatrix]) -> Result<Self> {
        let rows = cols.first().map(|c| c.rows).unwrap_or(0);
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.rows != rows || c.cols != 1 {
                return Err(Error::DimensionMismatch("columns must share length".into()));
            }
            for i in 0..rows {
                m.data[i * m.cols + j] = c.data[i].clone();
            }
        }
        Ok(m)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> RatMatrix {
        let data = (0..self.rows).map(|i| self.get(i, j).clone()).collect();
        RatMatrix {
            rows: self.rows,
            cols: 1,
            data,
        }
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> RatMatrix {
        let mut data = Vec::with_capacity((r1 - r0) * (c1 - c0));
        for i in r0..r1 {
            for j in c0..c1 {
                data.push(self.get(i, j).clone());
            }
        }
        RatMatrix {
            rows: r1 - r0,
            cols: c1 - c0,
            data,
        }
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn to_f64(&self) -> Matrix {
        Matrix::from_row_iterator(self.rows, self.cols, self.data.iter().map(rational_to_f64))
    }

    pub fn to_vector(&self) -> Vector {
        Vector::from_iterator(self.data.len(), self.data.iter().map(rational_to_f64))
    }

    pub fn sub(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("subtraction shape".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn try_mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<RatMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let piv = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let p = a.get(col, col).clone();
            for j in 0..n {
                a.data[col * n + j] /= &p;
                inv.data[col * n + j] /= &p;
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col).clone();
                for j in 0..n {
                    let t = &f * a.get(col, j);
                    a.data[r * n + j] -= t;
                    let t = &f * inv.get(col, j);
                    inv.data[r * n + j] -= t;
                }
            }
        }
        Some(inv)
    }

    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let (rows, cols) = (a.rows, a.cols);
        let mut rank = 0;
        for col in 0..cols {
            let Some(piv) = (rank..rows).find(|&r| !a.get(r, col).is_zero()) else {
                continue;
            };
            for j in 0..cols {
                a.data.swap(piv * cols + j, rank * cols + j);
            }
            let p = a.get(rank, col).clone();
            for r in rank + 1..rows {
                if a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col) / &p;
                for j in col..cols {
                    let t = &f * a.get(rank, j);
                    a.data[r * cols + j] -= t;
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn max_abs(&self) -> BigRational {
        self.data
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn to_rat_string(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format_rational(self.get(i, j))).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

impl Mul for &RatMatrix {
    type Output = RatMatrix;
    fn mul(self, rhs: &RatMatrix) -> RatMatrix {
        self.try_mul(rhs).expect("shape mismatch in rational product")
    }
}

/// Reads every block of a `.rat` document.
pub fn parse_rat(text: &str) -> Result<Vec<RatMatrix>> {
    let mut tokens: Vec<(usize, usize, &str)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        let mut offset = 0;
        for tok in body.split_whitespace() {
            let col = body[offset..].find(tok).map(|p| p + offset).unwrap_or(0);
            offset = col + tok.len();
            tokens.push((ln + 1, col + 1, tok));
        }
    }
    let mut out = Vec::new();
    let mut it = tokens.into_iter();
    while let Some((l, c, t)) = it.next() {
        let rows: usize = t
            .parse()
            .map_err(|_| Error::parse(l, c, format!("expected row count, found `{t}`")))?;
        let (l2, c2, t2) = it
            .next()
            .ok_or_else(|| Error::parse(l, c, "missing column count"))?;
        let cols: usize = t2
            .parse()
            .map_err(|_| Error::parse(l2, c2, format!("expected column count, found `{t2}`")))?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let (l3, c3, t3) = it
                .next()
                .ok_or_else(|| Error::parse(l2, c2, format!("block {rows}x{cols} is truncated")))?;
            let v = parse_rational(t3)
                .ok_or_else(|| Error::parse(l3, c3, format!("invalid rational `{t3}`")))?;
            data.push(v);
        }
        out.push(RatMatrix::new(rows, cols, data)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(r("-1/8"), BigRational::new((-1).into(), 8.into()));
        assert_eq!(r("0.125"), BigRational::new(1.into(), 8.into()));
        assert_eq!(r("-2.5e-1"), BigRational::new((-1).into(), 4.into()));
        assert_eq!(r("3"), BigRational::from_integer(3.into()));
        assert_eq!(r("1e3"), BigRational::from_integer(1000.into()));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
        assert!(parse_rational(".").is_none());
    }

    #[test]
    fn round_trips_blocks() {
        let text = "# two blocks\n2 2\n1 -1/8\n0 1/2\n\n2 1\n3/4 5\n";
        let blocks = parse_rat(text).unwrap();
        assert_eq!(blocks.len(), 2);
        let again = parse_rat(&(blocks[0].to_rat_string() + &blocks[1].to_rat_string())).unwrap();
        assert_eq!(blocks, again);
    }

    #[test]
    fn reports_position_of_bad_entry() {
        match parse_rat("2 2\n1 x\n0 1") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_rat("2 2\n1 2 3"), Err(Error::Parse { .. })));
    }

    #[test]
    fn inverse_and_rank() {
        let a = parse_rat("2 2\n1 2\n3 4").unwrap().remove(0);
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, RatMatrix::identity(2));
        let s = parse_rat("2 2\n1 2\n2 4").unwrap().remove(0);
        assert!(s.inverse().is_none());
        assert_eq!(s.rank(), 1);
    }
}
