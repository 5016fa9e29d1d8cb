use std::fmt;

use num_traits::{One, Zero};

use super::gauss::GaussRational as G;

/// Square matrix over `Q(i)` in row-major order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QIMatrix {
    size: usize,
    data: Vec<G>,
}

impl QIMatrix {
    pub fn zero(r: usize) -> Self {
        QIMatrix {
            size: r,
            data: vec![G::zero(); r * r],
        }
    }

    pub fn identity(r: usize) -> Self {
        let mut m = QIMatrix::zero(r);
        for i in 0..r {
            m.set(i, i, G::one());
        }
        m
    }

    /// Matrix unit with a single 1 at `(i, j)`.
    pub fn unit(r: usize, i: usize, j: usize) -> Self {
        let mut m = QIMatrix::zero(r);
        m.set(i, j, G::one());
        m
    }

    pub fn diag(entries: &[G]) -> Self {
        let mut m = QIMatrix::zero(entries.len());
        for (i, x) in entries.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn diag_i64(entries: &[i64]) -> Self {
        QIMatrix::diag(&entries.iter().map(|&x| G::from(x)).collect::<Vec<_>>())
    }

    /// Panics unless `rows` is square.
    pub fn from_rows(rows: Vec<Vec<G>>) -> Self {
        let r = rows.len();
        assert!(rows.iter().all(|row| row.len() == r), "matrix must be square");
        QIMatrix {
            size: r,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn try_from_rows(rows: Vec<Vec<G>>) -> Option<Self> {
        let r = rows.len();
        if rows.iter().any(|row| row.len() != r) {
            return None;
        }
        Some(QIMatrix::from_rows(rows))
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        QIMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| G::from(x)).collect())
                .collect(),
        )
    }

    pub fn from_flat(size: usize, data: Vec<G>) -> Self {
        assert_eq!(data.len(), size * size);
        QIMatrix { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &G {
        &self.data[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: G) {
        self.data[i * self.size + j] = v;
    }

    pub fn entries(&self) -> &[G] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<G>> {
        self.data.chunks(self.size.max(1)).map(<[G]>::to_vec).take(self.size).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == QIMatrix::identity(self.size)
    }

    pub fn add(&self, o: &QIMatrix) -> QIMatrix {
        assert_eq!(self.size, o.size);
        QIMatrix {
            size: self.size,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &QIMatrix) -> QIMatrix {
        assert_eq!(self.size, o.size);
        QIMatrix {
            size: self.size,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &G) -> QIMatrix {
        QIMatrix {
            size: self.size,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, o: &QIMatrix) -> QIMatrix {
        assert_eq!(self.size, o.size);
        let r = self.size;
        let mut out = QIMatrix::zero(r);
        for i in 0..r {
            for k in 0..r {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..r {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        out.data[i * r + j] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> QIMatrix {
        let mut acc = QIMatrix::identity(self.size);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn commutes_with(&self, o: &QIMatrix) -> bool {
        self.mul(o) == o.mul(self)
    }

    pub fn is_idempotent(&self) -> bool {
        self.mul(self) == *self
    }

    pub fn rank(&self) -> usize {
        rank(&self.rows(), self.size)
    }

    pub fn inverse(&self) -> Option<QIMatrix> {
        let r = self.size;
        let mut aug: Vec<Vec<G>> = self
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                row.extend((0..r).map(|j| if i == j { G::one() } else { G::zero() }));
                row
            })
            .collect();
        let pivots = rref(&mut aug, 2 * r);
        if pivots.len() < r || pivots[r - 1] >= r {
            return None;
        }
        Some(QIMatrix::from_rows(
            aug.into_iter().map(|row| row[r..].to_vec()).collect(),
        ))
    }

    /// Inverse of `self` inside the corner algebra `e M_r e`, i.e. `w` with
    /// `self·w = w·self = e` and `e·w·e = w`.
    pub fn corner_inverse(&self, e: &QIMatrix) -> Option<QIMatrix> {
        let one = QIMatrix::identity(self.size);
        let shifted = self.add(&one.sub(e));
        let w = e.mul(&shifted.inverse()?).mul(e);
        (self.mul(&w) == *e && w.mul(self) == *e).then_some(w)
    }

    /// `e·self·e`.
    pub fn compress(&self, e: &QIMatrix) -> QIMatrix {
        e.mul(self).mul(e)
    }
}

impl fmt::Display for QIMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.rows().iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let parts: Vec<String> = row.iter().map(ToString::to_string).collect();
            write!(f, "{}", parts.join(" "))?;
        }
        write!(f, "]")
    }
}

/// In-place reduced row echelon form over the first `cols` columns.
/// Returns the pivot columns in row order.
pub fn rref(rows: &mut Vec<Vec<G>>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inv().expect("nonzero pivot");
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &(&f * y);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<G>], cols: usize) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, cols).len()
}

/// Basis of `{x : A x = 0}` for `A` given by rows with `cols` columns.
/// Each basis vector has a 1 in its free coordinate.
pub fn nullspace(rows: &[Vec<G>], cols: usize) -> Vec<Vec<G>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, cols);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![G::zero(); cols];
        v[free] = G::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -&m[row][free];
        }
        out.push(v);
    }
    out
}

/// Solves `Σ c_j cols_j = target` for vectors of equal length.
pub fn solve_combination(columns: &[Vec<G>], target: &[G]) -> Option<Vec<G>> {
    let len = target.len();
    let k = columns.len();
    let mut aug: Vec<Vec<G>> = (0..len)
        .map(|i| {
            let mut row: Vec<G> = columns.iter().map(|c| c[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug, k + 1);
    if pivots.last() == Some(&k) {
        return None;
    }
    let mut sol = vec![G::zero(); k];
    for (row, &pc) in pivots.iter().enumerate() {
        sol[pc] = aug[row][k].clone();
    }
    Some(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_rank() {
        let a = QIMatrix::from_rows(vec![
            vec![G::from(1), G::i()],
            vec![G::from(2), G::from(3)],
        ]);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        assert_eq!(a.rank(), 2);
        assert!(QIMatrix::unit(2, 0, 1).inverse().is_none());
        assert_eq!(QIMatrix::unit(3, 0, 1).rank(), 1);
    }

    #[test]
    fn corner_inverse_on_diagonal_corner() {
        let e = QIMatrix::diag_i64(&[1, 0]);
        let a = QIMatrix::diag_i64(&[5, 0]);
        let w = a.corner_inverse(&e).unwrap();
        assert_eq!(w, QIMatrix::diag(&[G::from_ratio(1, 5), G::zero()]));
        assert!(QIMatrix::zero(2).corner_inverse(&e).is_none());
    }

    #[test]
    fn nullspace_vectors_are_annihilated() {
        let rows = vec![
            vec![G::from(1), G::from(2), G::from(3)],
            vec![G::from(2), G::from(4), G::from(6)],
        ];
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &rows {
                let dot = row.iter().zip(v).fold(G::zero(), |a, (x, y)| &a + &(x * y));
                assert!(dot.is_zero());
            }
        }
    }
}
