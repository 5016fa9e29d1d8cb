use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows of equal length. `cols` is needed for the
    /// zero-row case.
    pub fn from_rows<T: Into<BigInt> + Clone>(cols: usize, rows: &[Vec<T>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend(r.iter().cloned().map(Into::into));
        }
        IntMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_i64_rows(cols: usize, rows: &[Vec<i64>]) -> Self {
        IntMatrix::from_rows(cols, rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<BigInt> {
        self.row(i).to_vec()
    }

    /// Row `i` as machine integers; `None` on overflow.
    pub fn row_i64(&self, i: usize) -> Option<Vec<i64>> {
        self.row(i).iter().map(|x| x.to_i64()).collect()
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows).map(|i| self.row_i64(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn is_zero_row(&self, i: usize) -> bool {
        self.row(i).iter().all(Zero::is_zero)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a.get(i, k).is_zero()) else {
                    return BigInt::zero();
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1).clone()
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Row Hermite normal form. Returns `(h, u)` with `u` unimodular and
/// `h = u * m`; pivots of `h` are positive, entries above a pivot are reduced
/// into `[0, pivot)`, zero rows are at the bottom.
pub fn hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut pivot_row = 0;
    for col in 0..h.cols {
        if pivot_row == h.rows {
            break;
        }
        // gcd-combine every lower row into pivot_row
        for i in pivot_row + 1..h.rows {
            if h.get(i, col).is_zero() {
                continue;
            }
            let a = h.get(pivot_row, col).clone();
            let b = h.get(i, col).clone();
            let eg = a.extended_gcd(&b);
            let (g, x, y) = (eg.gcd, eg.x, eg.y);
            // [x y; -b/g a/g] has determinant 1
            let p = -(&b / &g);
            let q = &a / &g;
            combine_rows(&mut h, pivot_row, i, &x, &y, &p, &q);
            combine_rows(&mut u, pivot_row, i, &x, &y, &p, &q);
        }
        if h.get(pivot_row, col).is_zero() {
            continue;
        }
        if h.get(pivot_row, col).is_negative() {
            negate_row(&mut h, pivot_row);
            negate_row(&mut u, pivot_row);
        }
        let p = h.get(pivot_row, col).clone();
        for i in 0..pivot_row {
            let q = h.get(i, col).div_floor(&p);
            if !q.is_zero() {
                sub_row_multiple(&mut h, i, pivot_row, &q);
                sub_row_multiple(&mut u, i, pivot_row, &q);
            }
        }
        pivot_row += 1;
    }
    (h, u)
}

fn combine_rows(
    m: &mut IntMatrix,
    r1: usize,
    r2: usize,
    x: &BigInt,
    y: &BigInt,
    p: &BigInt,
    q: &BigInt,
) {
    for j in 0..m.cols {
        let a = m.get(r1, j).clone();
        let b = m.get(r2, j).clone();
        m.set(r1, j, x * &a + y * &b);
        m.set(r2, j, p * &a + q * &b);
    }
}

fn negate_row(m: &mut IntMatrix, r: usize) {
    for j in 0..m.cols {
        let v = -m.get(r, j).clone();
        m.set(r, j, v);
    }
}

fn sub_row_multiple(m: &mut IntMatrix, target: usize, src: usize, q: &BigInt) {
    for j in 0..m.cols {
        let v = m.get(target, j) - q * m.get(src, j);
        m.set(target, j, v);
    }
}

/// Integer basis of the left kernel `{x : x * m^T = 0}`, one vector per row.
/// The basis spans a saturated sublattice of `Z^cols`.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    // left kernel of m^T: rows of u matching zero rows of hnf(m^T)
    let t = m.transpose();
    let (h, u) = hnf(&t);
    let rows: Vec<Vec<BigInt>> = (0..h.rows())
        .filter(|&i| h.is_zero_row(i))
        .map(|i| u.row_vec(i))
        .collect();
    IntMatrix::from_rows(m.cols(), &rows)
}

/// Solves `y * gens = target` over the integers, where the rows of `gens`
/// are the lattice generators. Returns one solution if any exists.
pub fn solve_integer(gens: &IntMatrix, target: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(gens.cols(), target.len());
    if gens.rows() == 0 {
        return target.iter().all(Zero::is_zero).then(Vec::new);
    }
    let (h, u) = hnf(gens);
    let mut residual: Vec<BigInt> = target.to_vec();
    let mut coeffs = vec![BigInt::zero(); h.rows()];
    let mut col = 0;
    for i in 0..h.rows() {
        if h.is_zero_row(i) {
            break;
        }
        while h.get(i, col).is_zero() {
            if !residual[col].is_zero() {
                return None;
            }
            col += 1;
        }
        let p = h.get(i, col);
        let (q, r) = residual[col].div_rem(p);
        if !r.is_zero() {
            return None;
        }
        for j in 0..h.cols() {
            residual[j] -= &q * h.get(i, j);
        }
        coeffs[i] = q;
        col += 1;
    }
    if residual.iter().any(|x| !x.is_zero()) {
        return None;
    }
    // y = coeffs * u
    let mut y = vec![BigInt::zero(); gens.rows()];
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for (j, yj) in y.iter_mut().enumerate() {
            *yj += c * u.get(i, j);
        }
    }
    Some(y)
}

/// Inverse of a unimodular integer matrix; `None` if `|det| != 1`.
pub fn unimodular_inverse(m: &IntMatrix) -> Option<IntMatrix> {
    if m.rows() != m.cols() || !m.det().abs().is_one() {
        return None;
    }
    let (h, u) = hnf(m);
    debug_assert_eq!(h, IntMatrix::identity(m.rows()));
    Some(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(cols: usize, rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_i64_rows(cols, rows)
    }

    fn is_row_hnf(h: &IntMatrix) -> bool {
        let mut last_pivot: Option<usize> = None;
        let mut seen_zero = false;
        for i in 0..h.rows() {
            let lead = (0..h.cols()).find(|&j| !h.get(i, j).is_zero());
            match lead {
                None => seen_zero = true,
                Some(j) => {
                    if seen_zero || last_pivot.is_some_and(|p| j <= p) || !h.get(i, j).is_positive()
                    {
                        return false;
                    }
                    for k in 0..i {
                        let v = h.get(k, j);
                        if v.is_negative() || v >= h.get(i, j) {
                            return false;
                        }
                    }
                    last_pivot = Some(j);
                }
            }
        }
        true
    }

    #[test]
    fn hnf_identity_and_swap() {
        let id = IntMatrix::identity(2);
        assert_eq!(hnf(&id), (id.clone(), id.clone()));
        let swap = mat(2, &[vec![0, 1], vec![1, 0]]);
        let (h, u) = hnf(&swap);
        assert_eq!(h, id);
        assert_eq!(u, swap);
    }

    #[test]
    fn hnf_defining_identities() {
        let m = mat(2, &[vec![2, 4], vec![1, 3]]);
        let (h, u) = hnf(&m);
        assert_eq!(h.get(0, 0), &BigInt::one());
        assert_eq!(u.mul(&m), h);
        assert!(u.det().abs().is_one());
        assert!(is_row_hnf(&h));
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_basis(&mat(2, &[vec![1, 1]]));
        assert_eq!(k.rows(), 1);
        let r = k.row_i64(0).unwrap();
        assert!(r == vec![1, -1] || r == vec![-1, 1]);

        assert_eq!(kernel_basis(&IntMatrix::identity(3)).rows(), 0);

        let k = kernel_basis(&mat(2, &[vec![1, 0], vec![1, 0]]));
        assert_eq!(k.rows(), 1);
        let r = k.row_i64(0).unwrap();
        assert!(r == vec![0, 1] || r == vec![0, -1]);
    }

    #[test]
    fn kernel_of_empty_matrix_is_everything() {
        let k = kernel_basis(&IntMatrix::zeros(0, 3));
        assert_eq!(k.rows(), 3);
        assert!(k.det().abs().is_one());
    }

    #[test]
    fn solve_integer_respects_lattice() {
        let gens = mat(2, &[vec![2, 0], vec![0, 3]]);
        let t: Vec<BigInt> = vec![4.into(), (-3).into()];
        let y = solve_integer(&gens, &t).unwrap();
        assert_eq!(y, vec![BigInt::from(2), BigInt::from(-1)]);
        assert!(solve_integer(&gens, &[1.into(), 0.into()]).is_none());
    }

    #[test]
    fn determinant() {
        assert_eq!(mat(2, &[vec![1, 1], vec![1, 3]]).det(), BigInt::from(2));
        assert_eq!(
            mat(3, &[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]).det(),
            BigInt::from(-1)
        );
        assert_eq!(mat(2, &[vec![1, 2], vec![2, 4]]).det(), BigInt::zero());
    }
}
