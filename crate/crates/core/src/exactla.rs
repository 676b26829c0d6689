//! Dense exact linear algebra over a fixed GF(q).
//!
//! Pivoting always takes the first nonzero entry scanning top-to-bottom, and
//! `solve` sets free variables to zero, so every result is reproducible.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::combi::IndexSubset;
use crate::error::{Error, Result};
use crate::gf::{Fe, Field};

/// Row or column label of a structured matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Subset(IndexSubset),
    /// `(U, A)` column labels, or `(A, A')` row labels of the tangent matrix.
    Pair(IndexSubset, IndexSubset),
}

impl Label {
    fn render(&self) -> String {
        fn join(s: IndexSubset) -> String {
            s.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        }
        match self {
            Label::Subset(s) => join(*s),
            Label::Pair(a, b) => format!("{} | {}", join(*a), join(*b)),
        }
    }

    fn parse(line: &str) -> Result<Label> {
        fn set(s: &str) -> Result<IndexSubset> {
            let idx: Vec<usize> = s
                .split_whitespace()
                .map(|t| t.parse().map_err(|e| Error::Parse(format!("label: {e}"))))
                .collect::<Result<_>>()?;
            IndexSubset::new(&idx, crate::combi::MAX_GROUND)
        }
        match line.split_once('|') {
            Some((a, b)) => Ok(Label::Pair(set(a)?, set(b)?)),
            None => Ok(Label::Subset(set(line)?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
    pub row_labels: Option<Vec<Label>>,
    pub col_labels: Option<Vec<Label>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqVector {
    pub field: Field,
    pub entries: Vec<Fe>,
    pub labels: Option<Vec<Label>>,
}

impl FqVector {
    pub fn new(field: &Field, entries: Vec<Fe>) -> Self {
        FqVector {
            field: field.clone(),
            entries,
            labels: None,
        }
    }

    pub fn zeros(field: &Field, len: usize) -> Self {
        Self::new(field, vec![Fe::ZERO; len])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }

    pub fn dot(&self, other: &[Fe]) -> Fe {
        let f = &self.field;
        f.sum(self.entries.iter().zip(other).map(|(&a, &b)| f.mul(a, b)))
    }
}

fn two_rows(data: &mut [Fe], cols: usize, src: usize, dst: usize) -> (&[Fe], &mut [Fe]) {
    debug_assert_ne!(src, dst);
    if src < dst {
        let (lo, hi) = data.split_at_mut(dst * cols);
        (&lo[src * cols..src * cols + cols], &mut hi[..cols])
    } else {
        let (lo, hi) = data.split_at_mut(src * cols);
        (&hi[..cols], &mut lo[dst * cols..dst * cols + cols])
    }
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub matrix: FqMatrix,
    pub pivots: Vec<usize>,
}

impl FqMatrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        FqMatrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![Fe::ZERO; rows * cols],
            row_labels: None,
            col_labels: None,
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    pub fn from_rows(field: &Field, rows: &[Vec<Fe>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let mut m = Self::zeros(field, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            m.row_mut(i).copy_from_slice(r);
        }
        Ok(m)
    }

    /// Builds from small integers, mapped into the prime subfield.
    pub fn from_ints(field: &Field, rows: &[&[i64]]) -> Self {
        let rows: Vec<Vec<Fe>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| field.from_int(x)).collect())
            .collect();
        Self::from_rows(field, &rows).expect("rectangular literal")
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[Fe] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Fe {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Fe) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Fe] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Fe] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Fe> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> FqMatrix {
        let mut t = FqMatrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t.row_labels = self.col_labels.clone();
        t.col_labels = self.row_labels.clone();
        t
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    pub fn mul(&self, other: &FqMatrix) -> Result<FqMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = FqMatrix::zeros(&self.field, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if !a.is_zero() {
                    let src = other.row(k);
                    self.field.axpy(out.row_mut(r), a, src);
                }
            }
        }
        Ok(out)
    }

    /// `M x`
    pub fn mul_vec(&self, x: &[Fe]) -> Result<Vec<Fe>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{} columns, vector of {}",
                self.cols,
                x.len()
            )));
        }
        let f = &self.field;
        Ok((0..self.rows)
            .map(|r| f.sum(self.row(r).iter().zip(x).map(|(&a, &b)| f.mul(a, b))))
            .collect())
    }

    /// `y M` for a row vector `y`.
    pub fn vec_mul(&self, y: &[Fe]) -> Result<Vec<Fe>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "{} rows, vector of {}",
                self.rows,
                y.len()
            )));
        }
        let mut out = vec![Fe::ZERO; self.cols];
        for (r, &c) in y.iter().enumerate() {
            self.field.axpy(&mut out, c, self.row(r));
        }
        Ok(out)
    }

    pub fn hadamard(&self, other: &FqMatrix) -> Result<FqMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch("hadamard shapes differ".into()));
        }
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a = self.field.mul(*a, b);
        }
        Ok(out)
    }

    /// `diag(left) · M · diag(right)`
    pub fn scale_by_diagonals(&self, left: &[Fe], right: &[Fe]) -> Result<FqMatrix> {
        if left.len() != self.rows || right.len() != self.cols {
            return Err(Error::DimensionMismatch("diagonal sizes".into()));
        }
        let f = &self.field;
        let mut out = self.clone();
        for (r, &lr) in left.iter().enumerate() {
            for (c, x) in out.row_mut(r).iter_mut().enumerate() {
                if !x.is_zero() {
                    *x = f.mul(f.mul(lr, *x), right[c]);
                }
            }
        }
        Ok(out)
    }

    /// First entry where two equally shaped matrices differ.
    pub fn first_mismatch(&self, other: &FqMatrix) -> Option<(usize, usize)> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Some((0, 0));
        }
        self.data
            .iter()
            .zip(&other.data)
            .position(|(a, b)| a != b)
            .map(|i| (i / self.cols, i % self.cols))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Inverse of a square matrix; `NoSolution` when singular.
    pub fn inverse(&self) -> Result<FqMatrix> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut aug = FqMatrix::zeros(&self.field, n, 2 * n);
        for r in 0..n {
            aug.row_mut(r)[..n].copy_from_slice(self.row(r));
            aug.set(r, n + r, Fe::ONE);
        }
        let ech = aug.echelon();
        if ech.pivots.len() < n || ech.pivots.last().is_some_and(|&p| p >= n) {
            return Err(Error::NoSolution);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        let rows: Vec<usize> = (0..n).collect();
        Ok(ech.matrix.submatrix(&rows, &cols))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> FqMatrix {
        let mut out = FqMatrix::zeros(&self.field, rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out.set(i, j, self.get(r, c));
            }
        }
        out
    }

    pub fn det(&self) -> Result<Fe> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(det_in_place(&self.field, self.data.clone(), self.rows))
    }

    /// Rank by forward elimination.
    pub fn rank(&self) -> usize {
        let f = &self.field;
        let cols = self.cols;
        let mut data = self.data.clone();
        let mut prow = 0;
        for col in 0..cols {
            if prow == self.rows {
                break;
            }
            let Some(piv) = (prow..self.rows).find(|&r| !data[r * cols + col].is_zero()) else {
                continue;
            };
            if piv != prow {
                for c in col..cols {
                    data.swap(piv * cols + c, prow * cols + c);
                }
            }
            let inv = f.inv(data[prow * cols + col]).expect("pivot is nonzero");
            for r in prow + 1..self.rows {
                let x = data[r * cols + col];
                if x.is_zero() {
                    continue;
                }
                let factor = f.neg(f.mul(x, inv));
                let (src, dst) = two_rows(&mut data, cols, prow, r);
                f.axpy(&mut dst[col..], factor, &src[col..]);
            }
            prow += 1;
        }
        prow
    }

    pub fn echelon(&self) -> Echelon {
        let f = &self.field;
        let mut m = self.clone();
        m.row_labels = None;
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut prow = 0;
        for col in 0..cols {
            if prow == m.rows {
                break;
            }
            let Some(piv) = (prow..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(piv, prow);
            let inv = f.inv(m.get(prow, col)).expect("pivot is nonzero");
            f.scale(&mut m.row_mut(prow)[col..], inv);
            for r in 0..m.rows {
                if r == prow {
                    continue;
                }
                let x = m.get(r, col);
                if x.is_zero() {
                    continue;
                }
                let (src, dst) = two_rows(&mut m.data, cols, prow, r);
                f.axpy(&mut dst[col..], f.neg(x), &src[col..]);
            }
            pivots.push(col);
            prow += 1;
        }
        Echelon { matrix: m, pivots }
    }

    /// Basis of `{x : Mx = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<FqVector> {
        let f = &self.field;
        let ech = self.echelon();
        let mut is_pivot = vec![None; self.cols];
        for (i, &p) in ech.pivots.iter().enumerate() {
            is_pivot[p] = Some(i);
        }
        (0..self.cols)
            .filter(|&c| is_pivot[c].is_none())
            .map(|free| {
                let mut x = vec![Fe::ZERO; self.cols];
                x[free] = Fe::ONE;
                for (i, &p) in ech.pivots.iter().enumerate() {
                    x[p] = f.neg(ech.matrix.get(i, free));
                }
                FqVector::new(f, x)
            })
            .collect()
    }

    /// Some `x` with `Mx = v`, free variables set to zero.
    pub fn solve(&self, v: &[Fe]) -> Result<FqVector> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "{} rows, right-hand side of {}",
                self.rows,
                v.len()
            )));
        }
        let mut aug = FqMatrix::zeros(&self.field, self.rows, self.cols + 1);
        for (r, &x) in v.iter().enumerate() {
            aug.row_mut(r)[..self.cols].copy_from_slice(self.row(r));
            aug.set(r, self.cols, x);
        }
        let ech = aug.echelon();
        if ech.pivots.last() == Some(&self.cols) {
            return Err(Error::NoSolution);
        }
        let mut x = vec![Fe::ZERO; self.cols];
        for (i, &p) in ech.pivots.iter().enumerate() {
            x[p] = ech.matrix.get(i, self.cols);
        }
        Ok(FqVector::new(&self.field, x))
    }

    pub fn in_column_space(&self, v: &[Fe]) -> Result<bool> {
        match self.solve(v) {
            Ok(_) => Ok(true),
            Err(Error::NoSolution) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Text dump: field header, `rows cols`, then the rows. Labels, when
    /// present, follow in `row-labels` / `col-labels` sections.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{}", self.field.header()).unwrap();
        writeln!(s, "{} {}", self.rows, self.cols).unwrap();
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|x| x.0.to_string()).collect();
            writeln!(s, "{}", line.join(" ")).unwrap();
        }
        if let Some(labels) = &self.row_labels {
            writeln!(s, "row-labels").unwrap();
            for l in labels {
                writeln!(s, "{}", l.render()).unwrap();
            }
        }
        if let Some(labels) = &self.col_labels {
            writeln!(s, "col-labels").unwrap();
            for l in labels {
                writeln!(s, "{}", l.render()).unwrap();
            }
        }
        s
    }

    pub fn parse_dump(text: &str) -> Result<FqMatrix> {
        let mut lines = text.lines();
        let field = Field::from_header(
            lines
                .next()
                .ok_or_else(|| Error::Parse("empty matrix file".into()))?,
        )?;
        let dims: Vec<usize> = lines
            .next()
            .ok_or_else(|| Error::Parse("missing dimensions".into()))?
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|e| Error::Parse(format!("dimensions: {e}")))
            })
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(Error::Parse("dimension line needs two integers".into()));
        };
        let mut m = FqMatrix::zeros(&field, rows, cols);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing row {r}")))?;
            let vals: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|e| Error::Parse(format!("row {r}: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != cols {
                return Err(Error::Parse(format!(
                    "row {r} has {} entries, expected {cols}",
                    vals.len()
                )));
            }
            for (c, v) in vals.into_iter().enumerate() {
                m.set(r, c, field.elem(v)?);
            }
        }
        let mut section: Option<&str> = None;
        let (mut rl, mut cl) = (Vec::new(), Vec::new());
        for line in lines {
            match line.trim() {
                "row-labels" => section = Some("row"),
                "col-labels" => section = Some("col"),
                "" => {}
                l => match section {
                    Some("row") => rl.push(Label::parse(l)?),
                    Some("col") => cl.push(Label::parse(l)?),
                    _ => return Err(Error::Parse(format!("unexpected line: {l}"))),
                },
            }
        }
        if !rl.is_empty() {
            m.row_labels = Some(rl);
        }
        if !cl.is_empty() {
            m.col_labels = Some(cl);
        }
        Ok(m)
    }
}

fn det_in_place(f: &Field, mut data: Vec<Fe>, n: usize) -> Fe {
    let mut det = Fe::ONE;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !data[r * n + col].is_zero()) else {
            return Fe::ZERO;
        };
        if piv != col {
            for c in col..n {
                data.swap(piv * n + c, col * n + c);
            }
            det = f.neg(det);
        }
        let p = data[col * n + col];
        det = f.mul(det, p);
        let inv = f.inv(p).expect("pivot is nonzero");
        for r in col + 1..n {
            let x = data[r * n + col];
            if x.is_zero() {
                continue;
            }
            let factor = f.neg(f.mul(x, inv));
            let (src, dst) = two_rows(&mut data, n, col, r);
            f.axpy(&mut dst[col..], factor, &src[col..]);
        }
    }
    det
}

/// Determinant of the square matrix whose rows are the given vectors.
pub fn det_of_rows(f: &Field, rows: &[&[Fe]]) -> Fe {
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for r in rows {
        debug_assert_eq!(r.len(), n);
        data.extend_from_slice(r);
    }
    det_in_place(f, data, n)
}

/// Column space built one column at a time, kept as normalized echelon vectors.
/// A second elimination order for cross-checking `rank`.
pub struct ColumnBasis {
    field: Field,
    dim: usize,
    vectors: Vec<(usize, Vec<Fe>)>,
}

impl ColumnBasis {
    pub fn new(field: &Field, dim: usize) -> Self {
        ColumnBasis {
            field: field.clone(),
            dim,
            vectors: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_full(&self) -> bool {
        self.vectors.len() == self.dim
    }

    fn reduce(&self, mut v: Vec<Fe>) -> Vec<Fe> {
        for (pivot, b) in &self.vectors {
            let x = v[*pivot];
            if !x.is_zero() {
                self.field.axpy(&mut v, self.field.neg(x), b);
            }
        }
        v
    }

    /// Adds a vector; returns whether it enlarged the span.
    pub fn insert(&mut self, v: Vec<Fe>) -> bool {
        debug_assert_eq!(v.len(), self.dim);
        let mut v = self.reduce(v);
        let Some(pivot) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = self.field.inv(v[pivot]).expect("nonzero");
        self.field.scale(&mut v, inv);
        // keep earlier vectors reduced at the new pivot so `reduce` stays one pass
        for (_, b) in self.vectors.iter_mut() {
            let x = b[pivot];
            if !x.is_zero() {
                self.field.axpy(b, self.field.neg(x), &v);
            }
        }
        self.vectors.push((pivot, v));
        true
    }

    pub fn contains(&self, v: &[Fe]) -> bool {
        self.reduce(v.to_vec()).iter().all(|x| x.is_zero())
    }

    pub fn from_columns(m: &FqMatrix, stop_when_full: bool) -> Self {
        let mut basis = ColumnBasis::new(m.field(), m.rows());
        for c in 0..m.cols() {
            if stop_when_full && basis.is_full() {
                break;
            }
            basis.insert(m.column(c));
        }
        basis
    }
}

/// Rank through the column-by-column route; stops early at full row rank.
pub fn rank_by_columns(m: &FqMatrix) -> usize {
    ColumnBasis::from_columns(m, true).rank()
}

pub fn has_full_row_rank(m: &FqMatrix) -> bool {
    rank_by_columns(m) == m.rows()
}

/// Some row index `C` whose coordinate vector `e(C)` lies in the column space.
pub fn weight_one_in_colspace(m: &FqMatrix) -> Option<usize> {
    let basis = ColumnBasis::from_columns(m, true);
    let mut e = vec![Fe::ZERO; m.rows()];
    (0..m.rows()).find(|&r| {
        e.iter_mut().for_each(|x| *x = Fe::ZERO);
        e[r] = Fe::ONE;
        basis.contains(&e)
    })
}
