//! Arcs: ordered families of vectors in which every `k` of them form a basis.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combi::{subsets_colex, IndexSubset};
use crate::error::{Error, Result};
use crate::exactla::{det_of_rows, FqMatrix};
use crate::gf::{find_eta, Fe, Field};

pub fn dot(f: &Field, a: &[Fe], b: &[Fe]) -> Fe {
    f.sum(a.iter().zip(b).map(|(&x, &y)| f.mul(x, y)))
}

/// The functional `x ↦ det(x, rows)` for `k−1` rows of length `k`.
pub fn det_functional(f: &Field, rows: &[&[Fe]]) -> Vec<Fe> {
    let k = rows.len() + 1;
    let mut e = vec![Fe::ZERO; k];
    (0..k)
        .map(|j| {
            e.iter_mut().for_each(|x| *x = Fe::ZERO);
            e[j] = Fe::ONE;
            let mut all: Vec<&[Fe]> = Vec::with_capacity(k);
            all.push(&e);
            all.extend_from_slice(rows);
            det_of_rows(f, &all)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    field: Field,
    k: usize,
    vectors: Vec<Vec<Fe>>,
    certified: bool,
}

/// Outcome of an arc test, with the first degenerate `k`-subset in colex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcCheck {
    pub is_arc: bool,
    pub witness: Option<IndexSubset>,
}

pub fn is_arc(vectors: &[Vec<Fe>], field: &Field, k: usize) -> Result<ArcCheck> {
    if vectors.len() < k {
        return Err(Error::TooFewVectors {
            needed: k,
            got: vectors.len(),
        });
    }
    for s in subsets_colex(IndexSubset::range(vectors.len()), k) {
        let rows: Vec<&[Fe]> = s.iter().map(|i| vectors[i].as_slice()).collect();
        if det_of_rows(field, &rows).is_zero() {
            return Ok(ArcCheck {
                is_arc: false,
                witness: Some(s),
            });
        }
    }
    Ok(ArcCheck {
        is_arc: true,
        witness: None,
    })
}

impl Arc {
    /// Wraps vectors without testing the arc property.
    pub fn uncertified(field: &Field, k: usize, vectors: Vec<Vec<Fe>>) -> Result<Arc> {
        if let Some(v) = vectors.iter().find(|v| v.len() != k) {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in dimension {k}",
                v.len()
            )));
        }
        if let Some(x) = vectors.iter().flatten().find(|x| x.0 >= field.q()) {
            return Err(Error::ElementOutOfRange {
                value: x.0 as u64,
                q: field.q(),
            });
        }
        if vectors.len() < k {
            return Err(Error::TooFewVectors {
                needed: k,
                got: vectors.len(),
            });
        }
        Ok(Arc {
            field: field.clone(),
            k,
            vectors,
            certified: false,
        })
    }

    /// Wraps and certifies; `NotAnArc` carries the degenerate subset.
    pub fn certify(field: &Field, k: usize, vectors: Vec<Vec<Fe>>) -> Result<Arc> {
        let mut arc = Arc::uncertified(field, k, vectors)?;
        let check = is_arc(&arc.vectors, field, k)?;
        if let Some(w) = check.witness {
            return Err(Error::NotAnArc(w.to_vec()));
        }
        arc.certified = true;
        Ok(arc)
    }

    pub fn from_ints(field: &Field, k: usize, rows: &[&[i64]]) -> Result<Arc> {
        let vectors = rows
            .iter()
            .map(|r| r.iter().map(|&x| field.from_int(x)).collect())
            .collect();
        Arc::certify(field, k, vectors)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn len(&self) -> usize {
        self.vectors.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
    pub fn vectors(&self) -> &[Vec<Fe>] {
        &self.vectors
    }
    pub fn vector(&self, i: usize) -> &[Fe] {
        &self.vectors[i]
    }
    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// The tangent count `q + k − 1 − |S|`; negative values mean no arc this large exists.
    pub fn t(&self) -> i64 {
        self.field.q() as i64 + self.k as i64 - 1 - self.len() as i64
    }

    pub fn all(&self) -> IndexSubset {
        IndexSubset::range(self.len())
    }

    /// Subfamily in the given order; subfamilies of arcs stay certified.
    pub fn subarc(&self, indices: &[usize]) -> Result<Arc> {
        let mut seen = IndexSubset::EMPTY;
        for &i in indices {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    ground: self.len(),
                });
            }
            if seen.contains(i) {
                return Err(Error::IndexClash(i));
            }
            seen = seen.with(i);
        }
        if indices.len() < self.k {
            return Err(Error::TooFewVectors {
                needed: self.k,
                got: indices.len(),
            });
        }
        Ok(Arc {
            field: self.field.clone(),
            k: self.k,
            vectors: indices.iter().map(|&i| self.vectors[i].clone()).collect(),
            certified: self.certified,
        })
    }

    pub fn prefix(&self, n: usize) -> Result<Arc> {
        self.subarc(&(0..n).collect::<Vec<_>>())
    }

    /// Reorders so the listed indices come first (in the given order), then the rest in order.
    pub fn bring_to_front(&self, front: &[usize]) -> Result<Arc> {
        let mut order = front.to_vec();
        order.extend((0..self.len()).filter(|i| !front.contains(i)));
        self.subarc(&order)
    }

    /// Applies `x ↦ N x` and multiplies vector `i` by `scalars[i]`.
    pub fn transformed(&self, n: &FqMatrix, scalars: &[Fe]) -> Result<Arc> {
        if n.rows() != self.k || n.cols() != self.k || scalars.len() != self.len() {
            return Err(Error::DimensionMismatch(
                "transform does not fit the arc".into(),
            ));
        }
        if n.det()?.is_zero() {
            return Err(Error::SingularBasis);
        }
        if scalars.iter().any(|s| s.is_zero()) {
            return Err(Error::DivisionByZero);
        }
        let f = &self.field;
        let vectors = self
            .vectors
            .iter()
            .zip(scalars)
            .map(|(v, &s)| {
                n.mul_vec(v)
                    .map(|w| w.into_iter().map(|x| f.mul(x, s)).collect())
            })
            .collect::<Result<_>>()?;
        Ok(Arc {
            field: f.clone(),
            k: self.k,
            vectors,
            certified: self.certified,
        })
    }

    /// A random linearly equivalent copy: invertible transform, column scalings and a shuffle.
    pub fn random_equivalent(&self, rng: &mut impl Rng) -> Arc {
        let f = &self.field;
        let n = random_invertible(f, self.k, rng);
        let scalars: Vec<Fe> = (0..self.len()).map(|_| random_nonzero(f, rng)).collect();
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(rng);
        self.transformed(&n, &scalars)
            .and_then(|a| a.subarc(&order))
            .expect("valid transform")
    }

    /// Flattened encodings, used as a total order on arcs.
    pub fn encoding(&self) -> Vec<u32> {
        self.vectors.iter().flatten().map(|x| x.0).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{}", self.field.header()).unwrap();
        writeln!(s, "{} {}", self.k, self.len()).unwrap();
        for v in &self.vectors {
            let line: Vec<String> = v.iter().map(|x| x.0.to_string()).collect();
            writeln!(s, "{}", line.join(" ")).unwrap();
        }
        s
    }

    /// Parses the text format; the result is uncertified until [`Arc::recertify`].
    pub fn parse(text: &str) -> Result<Arc> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty arc file".into()))?;
        let field = Field::from_header(header)?;
        let dims = parse_ints(
            lines
                .next()
                .ok_or_else(|| Error::Parse("missing `k m` line".into()))?,
        )?;
        let [k, m] = dims[..] else {
            return Err(Error::Parse("expected `k m`".into()));
        };
        let (k, m) = (k as usize, m as usize);
        let mut vectors = Vec::with_capacity(m);
        for _ in 0..m {
            let row = parse_ints(
                lines
                    .next()
                    .ok_or_else(|| Error::Parse("too few vectors".into()))?,
            )?;
            if row.len() != k {
                return Err(Error::Parse(format!(
                    "vector with {} entries, expected {k}",
                    row.len()
                )));
            }
            vectors.push(
                row.into_iter()
                    .map(|x| field.elem(x))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing lines after the last vector".into()));
        }
        Arc::uncertified(&field, k, vectors)
    }

    pub fn recertify(self) -> Result<Arc> {
        Arc::certify(&self.field, self.k, self.vectors)
    }

    pub fn check(&self) -> Result<ArcCheck> {
        is_arc(&self.vectors, &self.field, self.k)
    }
}

fn parse_ints(line: &str) -> Result<Vec<u64>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<u64>()
                .map_err(|e| Error::Parse(format!("`{t}`: {e}")))
        })
        .collect()
}

pub fn random_nonzero(f: &Field, rng: &mut impl Rng) -> Fe {
    Fe(rng.gen_range(1..f.q()))
}

pub fn random_invertible(f: &Field, k: usize, rng: &mut impl Rng) -> FqMatrix {
    loop {
        let rows: Vec<Vec<Fe>> = (0..k)
            .map(|_| (0..k).map(|_| Fe(rng.gen_range(0..f.q()))).collect())
            .collect();
        let m = FqMatrix::from_rows(f, &rows).expect("square");
        if !m.det().expect("square").is_zero() {
            return m;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisRole {
    Standard,
    FromArc,
    TangentAdapted,
}

/// An explicit basis; determinants "with respect to B" go through it.
#[derive(Clone, Debug)]
pub struct Basis {
    field: Field,
    vectors: Vec<Vec<Fe>>,
    role: BasisRole,
    det_inv: Fe,
    // columns are the basis vectors; its inverse maps standard coordinates to B-coordinates
    to_coords: FqMatrix,
}

impl Basis {
    pub fn new(field: &Field, vectors: Vec<Vec<Fe>>, role: BasisRole) -> Result<Basis> {
        let k = vectors.len();
        if vectors.iter().any(|v| v.len() != k) {
            return Err(Error::DimensionMismatch(
                "basis must be k vectors of length k".into(),
            ));
        }
        let rows = FqMatrix::from_rows(field, &vectors)?;
        let det = rows.det()?;
        let det_inv = field.inv(det).map_err(|_| Error::SingularBasis)?;
        let to_coords = rows
            .transpose()
            .inverse()
            .map_err(|_| Error::SingularBasis)?;
        Ok(Basis {
            field: field.clone(),
            vectors,
            role,
            det_inv,
            to_coords,
        })
    }

    pub fn standard(field: &Field, k: usize) -> Basis {
        let vectors = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { Fe::ONE } else { Fe::ZERO })
                    .collect()
            })
            .collect();
        Basis::new(field, vectors, BasisRole::Standard).expect("identity is a basis")
    }

    /// The basis formed by the listed members of an arc, in the given order.
    pub fn from_arc(arc: &Arc, indices: &[usize]) -> Result<Basis> {
        if indices.len() != arc.k() {
            return Err(Error::BadSizes(format!(
                "{} vectors for a basis of dimension {}",
                indices.len(),
                arc.k()
            )));
        }
        let vectors = indices.iter().map(|&i| arc.vector(i).to_vec()).collect();
        Basis::new(arc.field(), vectors, BasisRole::FromArc)
    }

    pub fn random(field: &Field, k: usize, rng: &mut impl Rng) -> Basis {
        let m = random_invertible(field, k, rng);
        let vectors = (0..k).map(|i| m.row(i).to_vec()).collect();
        Basis::new(field, vectors, BasisRole::Standard).expect("invertible")
    }

    pub fn vectors(&self) -> &[Vec<Fe>] {
        &self.vectors
    }
    pub fn role(&self) -> BasisRole {
        self.role
    }
    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    /// Determinant of the standard-coordinate basis matrix.
    pub fn det(&self) -> Fe {
        self.field.inv(self.det_inv).expect("nonzero")
    }

    /// `det(rows)` with every row written in this basis.
    pub fn det_rows(&self, rows: &[&[Fe]]) -> Fe {
        self.field.mul(det_of_rows(&self.field, rows), self.det_inv)
    }

    /// Scales a standard-coordinate determinant into this basis.
    pub fn rescale(&self, det_std: Fe) -> Fe {
        self.field.mul(det_std, self.det_inv)
    }

    /// Coordinates of `x` with respect to this basis.
    pub fn coords(&self, x: &[Fe]) -> Vec<Fe> {
        self.to_coords.mul_vec(x).expect("length k")
    }

    /// The change-of-basis matrix taking coordinates in `self` to coordinates in `other`.
    pub fn change_to(&self, other: &Basis) -> FqMatrix {
        let cols: Vec<Vec<Fe>> = self.vectors.iter().map(|b| other.coords(b)).collect();
        FqMatrix::from_rows(&self.field, &cols)
            .expect("square")
            .transpose()
    }
}

/// `det(u, C)` with respect to `B`, `C` written in arc order.
pub fn det_uc(u: usize, c: IndexSubset, s: &Arc, b: &Basis) -> Result<Fe> {
    if c.contains(u) {
        return Err(Error::IndexClash(u));
    }
    if c.len() + 1 != s.k() {
        return Err(Error::BadSizes(format!(
            "|C| = {} but k − 1 = {}",
            c.len(),
            s.k() - 1
        )));
    }
    if let Some(i) = c.iter().chain(std::iter::once(u)).find(|&i| i >= s.len()) {
        return Err(Error::IndexOutOfRange {
            index: i,
            ground: s.len(),
        });
    }
    let mut rows: Vec<&[Fe]> = vec![s.vector(u)];
    rows.extend(c.iter().map(|i| s.vector(i)));
    Ok(b.det_rows(&rows))
}

/// The arc `e_1, …, e_k, e_1 + ⋯ + e_k`.
pub fn make_bush(field: &Field, k: usize) -> Arc {
    let mut vectors: Vec<Vec<Fe>> = Basis::standard(field, k).vectors().to_vec();
    vectors.push(vec![Fe::ONE; k]);
    Arc::certify(field, k, vectors).expect("frame is an arc")
}

/// The normal rational curve: `(1, t, …, t^{k−1})` for `t` in encoding order, then `(0, …, 0, 1)`.
pub fn make_nrc(field: &Field, k: usize) -> Result<Arc> {
    if k < 1 || k > field.q() as usize + 1 {
        return Err(Error::DimensionTooLarge { k, q: field.q() });
    }
    let mut vectors: Vec<Vec<Fe>> = field
        .elements()
        .map(|t| {
            let mut v = Vec::with_capacity(k);
            let mut x = Fe::ONE;
            for _ in 0..k {
                v.push(x);
                x = field.mul(x, t);
            }
            v
        })
        .collect();
    let mut last = vec![Fe::ZERO; k];
    last[k - 1] = Fe::ONE;
    vectors.push(last);
    // every k members form a Vandermonde matrix (possibly with the point at infinity), so the
    // enumeration of all k-subsets, hopeless at q = 49, is skipped
    let mut arc = Arc::uncertified(field, k, vectors)?;
    arc.certified = true;
    Ok(arc)
}

/// Glynn's size-10 arc in `F_9^5`: `(1, t, t² + η t⁶, t³, t⁴)` and `(0,0,0,0,1)`.
pub fn make_glynn() -> Arc {
    let f = Field::new(3, 2).expect("F_9");
    let eta = find_eta(&f).expect("order 9");
    let pw = |t: Fe, n: i64| f.pow(t, n).expect("nonnegative exponent");
    let mut vectors: Vec<Vec<Fe>> = f
        .elements()
        .map(|t| {
            vec![
                Fe::ONE,
                t,
                f.add(pw(t, 2), f.mul(eta, pw(t, 6))),
                pw(t, 3),
                pw(t, 4),
            ]
        })
        .collect();
    vectors.push(vec![Fe::ZERO, Fe::ZERO, Fe::ZERO, Fe::ZERO, Fe::ONE]);
    Arc::certify(&f, 5, vectors).expect("Glynn's family is an arc")
}

/// The dual arc in dimension `s − k`, from the parity-check matrix `[−Xᵀ | I]`.
pub fn dual_arc(s: &Arc) -> Result<Arc> {
    let (k, m) = (s.k(), s.len());
    if m <= k {
        return Err(Error::SizeNotGreaterThanK { size: m, k });
    }
    let f = s.field();
    let generator = FqMatrix::from_rows(f, s.vectors())?.transpose();
    let ech = generator.echelon();
    if ech.pivots != (0..k).collect::<Vec<_>>() {
        return Err(Error::NotAnArc((0..k).collect()));
    }
    let d = m - k;
    let vectors: Vec<Vec<Fe>> = (0..m)
        .map(|j| {
            if j < k {
                (0..d).map(|r| f.neg(ech.matrix.get(j, k + r))).collect()
            } else {
                (0..d)
                    .map(|r| if r == j - k { Fe::ONE } else { Fe::ZERO })
                    .collect()
            }
        })
        .collect();
    match Arc::certify(f, d, vectors) {
        Err(Error::NotAnArc(w)) => Err(Error::DualNotArc(w)),
        other => other,
    }
}

/// Linearly equivalent copy whose first `k + 1` vectors are the standard frame
/// and whose remaining vectors have first coordinate 1.
pub fn normalize_frame(s: &Arc) -> Result<Arc> {
    let k = s.k();
    if s.len() < k + 1 {
        return Err(Error::TooFewVectors {
            needed: k + 1,
            got: s.len(),
        });
    }
    let f = s.field();
    let first = FqMatrix::from_rows(f, &s.vectors()[..k])?.transpose();
    let to_frame = first
        .inverse()
        .map_err(|_| Error::NotAnArc((0..k).collect()))?;
    let c = to_frame.mul_vec(s.vector(k))?;
    if let Some(i) = c.iter().position(|x| x.is_zero()) {
        let mut w: Vec<usize> = (0..k).filter(|&j| j != i).collect();
        w.push(k);
        return Err(Error::NotAnArc(w));
    }
    // rescale coordinate i by 1/c_i so the (k+1)-th vector becomes all ones
    let mut vectors = Vec::with_capacity(s.len());
    for (j, v) in s.vectors().iter().enumerate() {
        let mut w = to_frame.mul_vec(v)?;
        for (x, &ci) in w.iter_mut().zip(&c) {
            *x = f.div(*x, ci)?;
        }
        let scale = if j < k {
            f.inv(w[j])?
        } else {
            let lead = w[0];
            if lead.is_zero() {
                return Err(Error::NotAnArc((1..k).chain(std::iter::once(j)).collect()));
            }
            f.inv(lead)?
        };
        f.scale(&mut w, scale);
        vectors.push(w);
    }
    Ok(Arc {
        field: f.clone(),
        k,
        vectors,
        certified: s.is_certified(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum EnumerationMode {
    Exhaustive { budget: u128 },
    Sample { count: usize, seed: u64 },
}

pub const DEFAULT_EXHAUSTIVE_BUDGET: u128 = 1 << 32;

/// Vectors with first coordinate 1 and no zero coordinate, in lexicographic order.
fn frame_candidates(f: &Field, k: usize) -> Vec<Vec<Fe>> {
    let q = f.q();
    let total = ((q - 1) as usize).pow(k as u32 - 1);
    (0..total)
        .map(|mut r| {
            let mut v = vec![Fe::ONE; k];
            for x in v[1..].iter_mut().rev() {
                *x = Fe((r % (q as usize - 1)) as u32 + 1);
                r /= q as usize - 1;
            }
            v
        })
        .collect()
}

/// The hyperplanes through `k − 1` members of a growing family, so that a new
/// vector can be tested against all of them with one dot product each.
#[derive(Clone, Debug)]
pub struct Grower {
    field: Field,
    k: usize,
    vectors: Vec<Vec<Fe>>,
    functionals: Vec<Vec<Fe>>,
}

impl Grower {
    pub fn new(field: &Field, k: usize) -> Grower {
        Grower {
            field: field.clone(),
            k,
            vectors: Vec::new(),
            functionals: Vec::new(),
        }
    }

    pub fn from_arc(arc: &Arc) -> Grower {
        let mut g = Grower::new(arc.field(), arc.k());
        for v in arc.vectors() {
            g.push(v.clone());
        }
        g
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Whether appending `v` keeps every `k`-subset a basis.
    pub fn accepts(&self, v: &[Fe]) -> bool {
        if v.iter().all(|x| x.is_zero()) {
            return false;
        }
        if self.vectors.len() + 1 < self.k {
            // fewer than k vectors: independence of the whole family
            let mut rows = self.vectors.clone();
            rows.push(v.to_vec());
            let m = FqMatrix::from_rows(&self.field, &rows).expect("rectangular");
            return m.rank() == rows.len();
        }
        self.functionals
            .iter()
            .all(|phi| !dot(&self.field, phi, v).is_zero())
    }

    /// Appends without testing.
    pub fn push(&mut self, v: Vec<Fe>) {
        let m = self.vectors.len();
        if m + 2 >= self.k {
            for s in subsets_colex(IndexSubset::range(m), self.k - 2) {
                let mut rows: Vec<&[Fe]> = s.iter().map(|i| self.vectors[i].as_slice()).collect();
                rows.push(&v);
                self.functionals.push(det_functional(&self.field, &rows));
            }
        }
        self.vectors.push(v);
    }

    pub fn pop(&mut self) {
        let m = self.vectors.len();
        if m == 0 {
            return;
        }
        let added = crate::combi::binom_usize(m - 1, self.k - 2);
        self.functionals.truncate(self.functionals.len() - added);
        self.vectors.pop();
    }

    pub fn vectors(&self) -> &[Vec<Fe>] {
        &self.vectors
    }

    pub fn to_arc(&self) -> Arc {
        Arc {
            field: self.field.clone(),
            k: self.k,
            vectors: self.vectors.clone(),
            certified: true,
        }
    }
}

/// Normalized-frame arcs of the given size, exhaustively or by seeded sampling.
pub fn enumerate_arcs(
    field: &Field,
    k: usize,
    size: usize,
    mode: EnumerationMode,
) -> Result<ArcStream> {
    if k < 2 {
        return Err(Error::BadSizes(format!("dimension {k} is below 2")));
    }
    if size < k + 1 {
        return Err(Error::SizeNotGreaterThanK { size, k });
    }
    if k > field.q() as usize + 1 {
        return Err(Error::DimensionTooLarge { k, q: field.q() });
    }
    let frame = make_bush(field, k);
    match mode {
        EnumerationMode::Exhaustive { budget } => {
            let extra = size - k - 1;
            let space = ((field.q() - 1) as u128)
                .checked_pow(((k - 1) * extra) as u32)
                .unwrap_or(u128::MAX);
            if space > budget {
                return Err(Error::BudgetExceeded { space, budget });
            }
            let candidates = frame_candidates(field, k);
            let grower = Grower::from_arc(&frame);
            Ok(ArcStream::Exhaustive(Exhaustive {
                candidates,
                grower,
                target: size,
                stack: vec![0],
                done: false,
            }))
        }
        EnumerationMode::Sample { count, seed } => Ok(ArcStream::Sample(Sampler {
            frame,
            size,
            count,
            seed,
            next: 0,
        })),
    }
}

pub enum ArcStream {
    Exhaustive(Exhaustive),
    Sample(Sampler),
}

impl Iterator for ArcStream {
    type Item = Result<Arc>;

    fn next(&mut self) -> Option<Result<Arc>> {
        match self {
            ArcStream::Exhaustive(e) => e.next().map(Ok),
            ArcStream::Sample(s) => s.next(),
        }
    }
}

/// Depth-first search over strictly increasing candidate columns.
pub struct Exhaustive {
    candidates: Vec<Vec<Fe>>,
    grower: Grower,
    target: usize,
    // next candidate index to try at each open level
    stack: Vec<usize>,
    done: bool,
}

impl Iterator for Exhaustive {
    type Item = Arc;

    fn next(&mut self) -> Option<Arc> {
        if self.done {
            return None;
        }
        if self.grower.len() == self.target {
            // the frame alone already has the requested size
            self.done = true;
            return Some(self.grower.to_arc());
        }
        loop {
            let Some(top) = self.stack.last_mut() else {
                self.done = true;
                return None;
            };
            let start = *top;
            let found =
                (start..self.candidates.len()).find(|&i| self.grower.accepts(&self.candidates[i]));
            match found {
                Some(i) => {
                    *top = i + 1;
                    self.grower.push(self.candidates[i].clone());
                    if self.grower.len() == self.target {
                        let arc = self.grower.to_arc();
                        self.grower.pop();
                        return Some(arc);
                    }
                    self.stack.push(i + 1);
                }
                None => {
                    self.stack.pop();
                    if self.stack.is_empty() {
                        self.done = true;
                        return None;
                    }
                    self.grower.pop();
                }
            }
        }
    }
}

/// Random growth from the frame; sample `i` uses stream `i` of the seeded generator.
pub struct Sampler {
    frame: Arc,
    size: usize,
    count: usize,
    seed: u64,
    next: usize,
}

pub const SAMPLE_RESTARTS: usize = 64;

impl Sampler {
    fn grow(&self, index: usize) -> Result<Arc> {
        let f = self.frame.field();
        let k = self.frame.k();
        let q = f.q();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let retries = 200 * q as usize;
        'restart: for _ in 0..SAMPLE_RESTARTS {
            let mut g = Grower::from_arc(&self.frame);
            while g.len() < self.size {
                let mut placed = false;
                for _ in 0..retries {
                    let mut v = vec![Fe::ONE; k];
                    for x in v[1..].iter_mut() {
                        *x = random_nonzero(f, &mut rng);
                    }
                    if g.accepts(&v) {
                        g.push(v);
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    continue 'restart;
                }
            }
            return Ok(g.to_arc());
        }
        Err(Error::Unsatisfiable { size: self.size })
    }
}

impl Iterator for Sampler {
    type Item = Result<Arc>;

    fn next(&mut self) -> Option<Result<Arc>> {
        if self.next >= self.count {
            return None;
        }
        let i = self.next;
        self.next += 1;
        Some(self.grow(i))
    }
}

/// One sampled arc for a given stream index, independent of any iteration order.
pub fn sample_arc(field: &Field, k: usize, size: usize, seed: u64, index: usize) -> Result<Arc> {
    if size < k + 1 {
        return Err(Error::SizeNotGreaterThanK { size, k });
    }
    Sampler {
        frame: make_bush(field, k),
        size,
        count: index + 1,
        seed,
        next: 0,
    }
    .grow(index)
}
