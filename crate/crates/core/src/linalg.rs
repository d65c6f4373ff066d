//! Exact linear algebra over ℚ.
//!
//! Elimination is fraction-free (Bareiss) on an integer copy of the matrix:
//! every row is first scaled by the lcm of its denominators, which leaves
//! the row space unchanged. Pivoting always takes the first row with a
//! nonzero entry in the current column, so results are deterministic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rat::{lcm_denoms, Rat};

pub type QVector = Vec<Rat>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rat>,
}

/// Reduced row echelon form: pivot columns and the nonzero rows.
#[derive(Clone, Debug)]
pub struct Rref {
    pub pivots: Vec<usize>,
    pub rows: Vec<QVector>,
    pub cols: usize,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, entries: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        QMatrix { rows: r, cols: c, entries: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        QMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rat::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[Rat]) -> QVector {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Appends `b` as an extra column.
    pub fn augment(&self, b: &[Rat]) -> QMatrix {
        assert_eq!(b.len(), self.rows);
        let rows = (0..self.rows)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.push(b[i].clone());
                r
            })
            .collect();
        let mut m = QMatrix::from_rows(rows);
        m.cols = self.cols + 1;
        m
    }

    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let l = lcm_denoms(row);
                row.iter()
                    .map(|x| (x * Rat::from_integer(l.clone())).to_integer())
                    .collect()
            })
            .collect()
    }

    /// Fraction-free forward elimination. Returns the echelon rows and pivot columns.
    pub fn bareiss_echelon(&self) -> (Vec<Vec<BigInt>>, Vec<usize>) {
        let mut m = self.integer_rows();
        let mut pivots = Vec::new();
        let mut prev = BigInt::one();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !m[i][c].is_zero()) else {
                continue;
            };
            m.swap(r, p);
            let (top, rest) = m.split_at_mut(r + 1);
            let prow = &top[r];
            let pv = &prow[c];
            for row in rest.iter_mut() {
                let f = row[c].clone();
                for j in c + 1..self.cols {
                    if row[j].is_zero() && (f.is_zero() || prow[j].is_zero()) {
                        continue;
                    }
                    let v = pv * &row[j] - &f * &prow[j];
                    debug_assert!((&v % &prev).is_zero());
                    row[j] = v / &prev;
                }
                row[c] = BigInt::zero();
            }
            prev = pv.clone();
            pivots.push(c);
            r += 1;
        }
        m.truncate(r);
        (m, pivots)
    }

    pub fn rref(&self) -> Rref {
        let (ech, pivots) = self.bareiss_echelon();
        let mut rows: Vec<QVector> = ech
            .into_iter()
            .zip(&pivots)
            .map(|(row, &pc)| {
                let inv = Rat::new(BigInt::one(), row[pc].clone());
                row.into_iter().map(|x| Rat::from_integer(x) * &inv).collect()
            })
            .collect();
        for k in (0..rows.len()).rev() {
            let pc = pivots[k];
            let (above, from_k) = rows.split_at_mut(k);
            let pivot_row = &from_k[0];
            for row in above.iter_mut() {
                if row[pc].is_zero() {
                    continue;
                }
                let f = row[pc].clone();
                for j in pc..self.cols {
                    if !pivot_row[j].is_zero() {
                        row[j] -= &f * &pivot_row[j];
                    }
                }
            }
        }
        Rref { pivots, rows, cols: self.cols }
    }

    pub fn rank(&self) -> usize {
        self.bareiss_echelon().1.len()
    }

    /// Rank over `GF(p)` for a fixed 61-bit prime. Never exceeds the rank over ℚ,
    /// so a full-column-rank answer proves a trivial kernel.
    pub fn rank_mod_p_lower_bound(&self) -> usize {
        let p = MOD_P;
        let pb = BigInt::from(p);
        let mut m: Vec<Vec<u64>> = self
            .integer_rows()
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|x| x.mod_floor(&pb).to_u64().expect("reduced below p"))
                    .collect()
            })
            .collect();
        rank_mod_p(&mut m, self.cols, p)
    }
}

const MOD_P: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

pub(crate) fn rank_mod_p(m: &mut [Vec<u64>], cols: usize, p: u64) -> usize {
    let rows = m.len();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, piv);
        let inv = powmod(m[r][c], p - 2, p);
        for x in &mut m[r][c..cols] {
            *x = mulmod(*x, inv, p);
        }
        let (top, rest) = m.split_at_mut(r + 1);
        let prow = &top[r];
        for row in rest.iter_mut() {
            let f = row[c];
            if f == 0 {
                continue;
            }
            for j in c..cols {
                if prow[j] != 0 {
                    row[j] = (row[j] + p - mulmod(f, prow[j], p)) % p;
                }
            }
        }
        r += 1;
    }
    r
}

/// Scales to coprime integers with the first nonzero entry positive.
pub fn canonical_scale(v: &[Rat]) -> QVector {
    let l = lcm_denoms(v);
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let sign = ints.iter().find(|x| !x.is_zero()).map_or(1, |x| if x.is_negative() { -1 } else { 1 });
    let g = g * BigInt::from(sign);
    ints.into_iter().map(|x| Rat::from_integer(x / &g)).collect()
}

impl Rref {
    fn kernel_of_first(&self, n: usize) -> Vec<QVector> {
        let pivot_set: Vec<Option<usize>> = {
            let mut s = vec![None; n];
            for (k, &c) in self.pivots.iter().enumerate() {
                if c < n {
                    s[c] = Some(k);
                }
            }
            s
        };
        (0..n)
            .filter(|&f| pivot_set[f].is_none())
            .map(|f| {
                let mut v = vec![Rat::zero(); n];
                v[f] = Rat::one();
                for (k, &c) in self.pivots.iter().enumerate() {
                    if c < n {
                        v[c] = -self.rows[k][f].clone();
                    }
                }
                canonical_scale(&v)
            })
            .collect()
    }
}

/// Canonical basis of the right null space, one vector per free column in
/// ascending column order.
pub fn kernel(m: &QMatrix) -> Vec<QVector> {
    m.rref().kernel_of_first(m.cols)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub particular: QVector,
    pub kernel: Vec<QVector>,
}

/// Solves `m x = b`; the particular solution has every free variable zero.
pub fn solve(m: &QMatrix, b: &[Rat]) -> Option<Solution> {
    assert_eq!(b.len(), m.rows());
    let n = m.cols();
    let rref = m.augment(b).rref();
    if rref.pivots.last() == Some(&n) {
        return None;
    }
    let mut particular = vec![Rat::zero(); n];
    for (k, &c) in rref.pivots.iter().enumerate() {
        particular[c] = rref.rows[k][n].clone();
    }
    Some(Solution { particular, kernel: rref.kernel_of_first(n) })
}

pub fn rank(m: &QMatrix) -> usize {
    m.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    fn v(xs: &[i64]) -> QVector {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn kernel_rank_one() {
        let m = QMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(kernel(&m), vec![v(&[2, -1])]);
    }

    #[test]
    fn kernel_identity_and_zero() {
        assert!(kernel(&QMatrix::identity(3)).is_empty());
        let k = kernel(&QMatrix::zeros(2, 3));
        assert_eq!(k, vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])]);
    }

    #[test]
    fn solve_examples() {
        let s = solve(&QMatrix::from_i64(&[&[2]]), &v(&[1])).unwrap();
        assert_eq!(s.particular, vec![ratio(1, 2)]);
        assert!(s.kernel.is_empty());

        assert!(solve(&QMatrix::from_i64(&[&[1, 1], &[1, 1]]), &v(&[1, 2])).is_none());

        let s = solve(&QMatrix::from_i64(&[&[1, 1], &[0, 0]]), &v(&[3, 0])).unwrap();
        assert_eq!(s.particular, v(&[3, 0]));
        assert_eq!(s.kernel, vec![v(&[1, -1])]);
    }

    #[test]
    fn rational_entries_and_residual() {
        let m = QMatrix::from_rows(vec![
            vec![ratio(1, 2), ratio(1, 3), rat(0)],
            vec![rat(0), ratio(2, 7), rat(5)],
            vec![ratio(1, 2), ratio(13, 21), rat(5)],
        ]);
        let b = vec![rat(1), rat(2), rat(3)];
        let s = solve(&m, &b).unwrap();
        assert_eq!(m.mul_vec(&s.particular), b);
        assert_eq!(s.kernel.len(), 1);
        assert!(m.mul_vec(&s.kernel[0]).iter().all(|x| x.is_zero()));
        assert_eq!(m.rank(), 2);
        assert_eq!(m.rank_mod_p_lower_bound(), 2);
    }

    #[test]
    fn rank_deficient_columns_skipped() {
        let m = QMatrix::from_i64(&[&[0, 1, 2, 3], &[0, 2, 4, 7], &[0, 0, 0, 1], &[0, 3, 6, 1]]);
        assert_eq!(m.rank(), 2);
        let k = kernel(&m);
        assert_eq!(k, vec![v(&[1, 0, 0, 0]), v(&[0, 2, -1, 0])]);
    }
}
