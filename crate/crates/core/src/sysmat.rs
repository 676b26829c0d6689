//! The determinant-weighted inclusion matrices attached to an arc, the
//! tangent-function matrices that are diagonally equivalent to them, and the
//! auxiliary vectors used to certify rank statements.
//!
//! Throughout, `G` is the prefix `0..m` of the ambient arc `S`. Rows are the
//! `(k−1)`-subsets of `G` in colex order; columns are pairs `(U, A)` with `U`
//! an `n`-subset in colex order and, within each `U`, `A` a `(k−2)`-subset of
//! `G∖U` in colex order.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::arcs::{Arc, Basis, BasisRole};
use crate::combi::{
    binom_big, binom_mod_p, block_inversions, colex_rank, factorial_mod, last_colex_subset,
    lex_cmp, subsets_colex, tau, IndexSubset,
};
use crate::error::{Error, Result};
use crate::exactla::{det_of_rows, FqMatrix, FqVector, Label};
use crate::gf::{Fe, Field};
use crate::tangents::{adapted_basis, tangent_count, TangentCache};

/// `I_r(a, b)`: rows `binom(r, a)`, columns `binom(r, b)`, entry 1 when the column set is inside the row set.
pub fn build_inclusion(field: &Field, r: usize, a: usize, b: usize) -> Result<FqMatrix> {
    if b > a || a > r {
        return Err(Error::BadParams { r, a, b });
    }
    let rows: Vec<IndexSubset> = subsets_colex(IndexSubset::range(r), a).collect();
    let cols: Vec<IndexSubset> = subsets_colex(IndexSubset::range(r), b).collect();
    let mut m = FqMatrix::zeros(field, rows.len(), cols.len());
    for (i, &row) in rows.iter().enumerate() {
        // b-subsets of the row set, located by their colex rank
        for sub in subsets_colex(row, b) {
            m.set(i, colex_rank(sub), Fe::ONE);
        }
    }
    m.row_labels = Some(rows.into_iter().map(Label::Subset).collect());
    m.col_labels = Some(cols.into_iter().map(Label::Subset).collect());
    Ok(m)
}

/// The p-rank of `I_r(a, b)` from the Frankl–Wilson formula.
pub fn fw_rank(r: usize, a: usize, b: usize, p: u32) -> Result<BigUint> {
    if b > a {
        return Err(Error::BadParams { r, a, b });
    }
    if a + b > r {
        return Err(Error::ParamOrderViolated { r, a, b });
    }
    let mut total = BigInt::zero();
    for i in 0..=b {
        if binom_mod_p((a - i) as u64, (b - i) as u64, p) == 0 {
            continue;
        }
        let below = if i == 0 {
            BigUint::zero()
        } else {
            binom_big(r as u64, i as u64 - 1)
        };
        total += BigInt::from(binom_big(r as u64, i as u64)) - BigInt::from(below);
    }
    debug_assert!(!total.is_negative());
    Ok(total.to_biguint().expect("nonnegative"))
}

/// Column labels `(U, A)`: `U` over `binom(m, n)`, then `A` over `binom([m]∖U, k−2)`.
pub fn column_pairs(m: usize, n: usize, k: usize) -> Vec<(IndexSubset, IndexSubset)> {
    let ground = IndexSubset::range(m);
    let mut out = Vec::new();
    for u in subsets_colex(ground, n) {
        for a in subsets_colex(ground.minus(u), k - 2) {
            out.push((u, a));
        }
    }
    out
}

fn check_n(m: usize, k: usize, n: usize) -> Result<()> {
    let max = (m + 1).saturating_sub(k);
    if m + 1 < k || n > max {
        return Err(Error::NTooLarge { n, max });
    }
    Ok(())
}

fn labelled(
    mut mat: FqMatrix,
    rows: &[IndexSubset],
    cols: &[(IndexSubset, IndexSubset)],
) -> FqMatrix {
    mat.row_labels = Some(rows.iter().map(|&c| Label::Subset(c)).collect());
    mat.col_labels = Some(cols.iter().map(|&(u, a)| Label::Pair(u, a)).collect());
    mat
}

/// `det(y, C)_B` for every `(k−1)`-subset `C` of `G` (by colex rank) and every `y ∉ C`.
struct DetTable {
    dets: Vec<Vec<Fe>>,
}

impl DetTable {
    fn new(g: &Arc, b: &Basis) -> DetTable {
        let k = g.k();
        let dets = subsets_colex(g.all(), k - 1)
            .map(|c| {
                (0..g.len())
                    .map(|y| {
                        if c.contains(y) {
                            return Fe::ZERO;
                        }
                        let mut rows: Vec<&[Fe]> = vec![g.vector(y)];
                        rows.extend(c.iter().map(|i| g.vector(i)));
                        b.det_rows(&rows)
                    })
                    .collect()
            })
            .collect();
        DetTable { dets }
    }

    fn get(&self, y: usize, c: IndexSubset) -> Fe {
        self.dets[colex_rank(c)][y]
    }
}

/// `M_G^{↑n}` with respect to the basis `B`.
pub fn build_m(g: &Arc, n: usize, b: &Basis) -> Result<FqMatrix> {
    let (k, m) = (g.k(), g.len());
    check_n(m, k, n)?;
    let f = g.field();
    let dets = DetTable::new(g, b);
    let rows: Vec<IndexSubset> = subsets_colex(g.all(), k - 1).collect();
    let cols = column_pairs(m, n, k);
    let mut mat = FqMatrix::zeros(f, rows.len(), cols.len());
    for (j, &(u, a)) in cols.iter().enumerate() {
        for x in g.all().minus(u.union(a)).iter() {
            let c = a.with(x);
            mat.set(
                colex_rank(c),
                j,
                f.product(u.iter().map(|y| dets.get(y, c))),
            );
        }
    }
    Ok(labelled(mat, &rows, &cols))
}

/// The diagonal of `J_G^{↑n}`: `Π_{y∈L_C} det(y, C)_B^{−1}` with `L_C` the `n` largest members of `G∖C`.
pub fn j_diagonal(g: &Arc, n: usize, b: &Basis) -> Result<Vec<Fe>> {
    let (k, m) = (g.k(), g.len());
    check_n(m, k, n)?;
    let f = g.field();
    let dets = DetTable::new(g, b);
    subsets_colex(g.all(), k - 1)
        .map(|c| {
            let l = last_colex_subset(g.all().minus(c), n)?;
            f.inv(f.product(l.iter().map(|y| dets.get(y, c))))
        })
        .collect()
}

/// `H_G^{↑n} = J_G^{↑n} M_G^{↑n}`; independent of `B`.
pub fn build_h(g: &Arc, n: usize, b: &Basis) -> Result<FqMatrix> {
    let m = build_m(g, n, b)?;
    let j = j_diagonal(g, n, b)?;
    let ones = vec![Fe::ONE; m.cols()];
    let mut h = m.scale_by_diagonals(&j, &ones)?;
    h.row_labels = m.row_labels;
    h.col_labels = m.col_labels;
    Ok(h)
}

/// The four matrices of the tangent system on `G = S[0..m)`, sharing labels.
#[derive(Clone, Debug)]
pub struct Pqr {
    pub p: FqMatrix,
    pub q: FqMatrix,
    pub r: FqMatrix,
    pub signed_inclusion: FqMatrix,
}

fn check_pqr_sizes(s: &Arc, m: usize, n: usize) -> Result<usize> {
    let t = tangent_count(s)?;
    if m != t + s.k() + n || m > s.len() {
        return Err(Error::SizeMismatch {
            g: m,
            expected: t + s.k() + n,
        });
    }
    Ok(t)
}

pub fn build_pqr(s: &Arc, m: usize, n: usize) -> Result<Pqr> {
    let t = check_pqr_sizes(s, m, n)?;
    let k = s.k();
    check_n(m, k, n)?;
    let f = s.field();
    let g = IndexSubset::range(m);
    let cache = TangentCache::new(s);
    let rows: Vec<IndexSubset> = subsets_colex(g, k - 1).collect();
    let cols = column_pairs(m, n, k);

    // per A: the B(A)-determinants det(x, y, A) for x, y in G∖A
    let mut pair_dets: Vec<Option<Vec<Vec<Fe>>>> = vec![None; crate::combi::binom_usize(m, k - 2)];
    let mut pair_det = |a: IndexSubset| -> Result<Vec<Vec<Fe>>> {
        let slot = &mut pair_dets[colex_rank(a)];
        if let Some(v) = slot {
            return Ok(v.clone());
        }
        let ba = adapted_basis(s, a)?;
        let mut table = vec![vec![Fe::ZERO; m]; m];
        for x in g.minus(a).iter() {
            for y in g.minus(a.with(x)).iter() {
                let mut r: Vec<&[Fe]> = vec![s.vector(x), s.vector(y)];
                r.extend(a.iter().map(|i| s.vector(i)));
                table[x][y] = ba.det_rows(&r);
            }
        }
        *slot = Some(table.clone());
        Ok(table)
    };

    let shape = || FqMatrix::zeros(f, rows.len(), cols.len());
    let (mut pm, mut qm, mut rm, mut im) = (shape(), shape(), shape(), shape());
    for (j, &(u, a)) in cols.iter().enumerate() {
        let table = pair_det(a)?;
        let ts = cache.get(a)?;
        for x in g.minus(u.union(a)).iter() {
            let c = a.with(x);
            let row = colex_rank(c);
            let qv = ts.eval(s.vector(x));
            let rv = f.inv(f.product(g.minus(c.union(u)).iter().map(|y| table[x][y])))?;
            qm.set(row, j, qv);
            rm.set(row, j, rv);
            pm.set(row, j, f.mul(qv, rv));
            im.set(row, j, f.sign(tau(a, c)? * (t + 1)));
        }
    }
    Ok(Pqr {
        p: labelled(pm, &rows, &cols),
        q: labelled(qm, &rows, &cols),
        r: labelled(rm, &rows, &cols),
        signed_inclusion: labelled(im, &rows, &cols),
    })
}

/// Rows `(A, A')` for each `(k−1)`-subset `C` of `S` in colex order, pairs in
/// lex order; columns the `(k−2)`-subsets of `S` in colex order.
pub fn build_l(s: &Arc) -> Result<FqMatrix> {
    let k = s.k();
    let f = s.field();
    let t = tangent_count(s)?;
    let cache = TangentCache::new(s);
    let cols: Vec<IndexSubset> = subsets_colex(s.all(), k - 2).collect();
    let mut entries: Vec<Vec<(usize, Fe)>> = Vec::new();
    let mut row_labels = Vec::new();
    for c in subsets_colex(s.all(), k - 1) {
        let mut faces: Vec<IndexSubset> = subsets_colex(c, k - 2).collect();
        faces.sort_by(|x, y| lex_cmp(*x, *y));
        for (i, &a) in faces.iter().enumerate() {
            for &a2 in &faces[i + 1..] {
                let u = c.minus(a).only().expect("one element");
                let v = c.minus(a2).only().expect("one element");
                let first = f.mul(f.sign(tau(a, c)? * (t + 1)), cache.f(a, u)?);
                let second = f.mul(f.sign(tau(a2, c)? * (t + 1) + 1), cache.f(a2, v)?);
                entries.push(vec![(colex_rank(a), first), (colex_rank(a2), second)]);
                row_labels.push(Label::Pair(a, a2));
            }
        }
    }
    let mut l = FqMatrix::zeros(f, entries.len(), cols.len());
    for (r, row) in entries.iter().enumerate() {
        for &(c, v) in row {
            l.set(r, c, v);
        }
    }
    l.row_labels = Some(row_labels);
    l.col_labels = Some(cols.into_iter().map(Label::Subset).collect());
    Ok(l)
}

/// One coordinate of the explicit nullspace vector of `L`, normalised so that
/// the first `k−2` members of `S` get 1.
pub fn alpha_entry(cache: &TangentCache, a: IndexSubset) -> Result<Fe> {
    let s = cache.arc();
    let k = s.k();
    let f = s.field();
    let t = tangent_count(s)?;
    let first = IndexSubset::range(k - 2);
    let d = a.intersection(first);
    let x: Vec<usize> = a.minus(first).to_vec();
    let z: Vec<usize> = first.minus(a).to_vec();
    let r = x.len();
    let sw = block_inversions(d, first.minus(a));
    let mut acc = f.sign((r + sw) * (t + 1));
    for i in 0..r {
        // sets D ∪ {z_r..z_i} ∪ {x_{i−1}..x_1} and D ∪ {z_r..z_{i+1}} ∪ {x_i..x_1}, zero-based
        let num_set = z[i..].iter().chain(&x[..i]).fold(d, |acc, &e| acc.with(e));
        let den_set = z[i + 1..]
            .iter()
            .chain(&x[..=i])
            .fold(d, |acc, &e| acc.with(e));
        let num = cache.f(num_set, x[i])?;
        let den = cache.f(den_set, z[i])?;
        acc = f.mul(acc, f.div(num, den)?);
    }
    Ok(acc)
}

/// `α` over all `(k−2)`-subsets of `S` in colex order.
pub fn alpha_vector(s: &Arc) -> Result<FqVector> {
    let cache = TangentCache::new(s);
    alpha_vector_cached(&cache)
}

pub fn alpha_vector_cached(cache: &TangentCache) -> Result<FqVector> {
    let s = cache.arc();
    let subsets: Vec<IndexSubset> = subsets_colex(s.all(), s.k() - 2).collect();
    let entries = subsets
        .iter()
        .map(|&a| alpha_entry(cache, a))
        .collect::<Result<Vec<_>>>()?;
    if let Some(i) = entries.iter().position(|x| x.is_zero()) {
        return Err(Error::ZeroEntry(i));
    }
    let mut v = FqVector::new(s.field(), entries);
    v.labels = Some(subsets.into_iter().map(Label::Subset).collect());
    Ok(v)
}

/// `α_C` for a `(k−1)`-subset, from every face `A ⊂ C`; `None` when the faces disagree.
pub fn alpha_c(
    cache: &TangentCache,
    c: IndexSubset,
    alpha: &dyn Fn(IndexSubset) -> Result<Fe>,
) -> Result<Option<Fe>> {
    let s = cache.arc();
    let f = s.field();
    let t = tangent_count(s)?;
    let mut value = None;
    for x in c.iter() {
        let a = c.without(x);
        let v = f.mul(
            f.sign(tau(a, c)? * (t + 1)),
            f.mul(alpha(a)?, cache.f(a, x)?),
        );
        match value {
            None => value = Some(v),
            Some(w) if w != v => return Ok(None),
            _ => {}
        }
    }
    Ok(value)
}

#[derive(Clone, Debug, Serialize)]
pub struct SimilarReport {
    pub rows: usize,
    pub cols: usize,
    pub d1: Vec<Fe>,
    pub d2: Vec<Fe>,
    pub ones_residual_zero: bool,
    pub alpha_nonzero: bool,
    pub alpha_in_nullspace: bool,
    pub alpha_c_well_defined: bool,
    /// First `(row, col)` where `D1 P D2` and `M` disagree.
    pub mismatch: Option<(usize, usize)>,
}

impl SimilarReport {
    pub fn passed(&self) -> bool {
        self.ones_residual_zero
            && self.alpha_nonzero
            && self.alpha_in_nullspace
            && self.alpha_c_well_defined
            && self.mismatch.is_none()
    }
}

/// Builds `D1 = F1 F3` and `D2 = F2 F4` and compares `D1 P D2` with `M` entrywise.
pub fn verify_similar(s: &Arc, m: usize, n: usize, b: &Basis) -> Result<SimilarReport> {
    let bundle = SystemBundle::new(s.clone(), m, n, b.clone())?;
    bundle.similar_report()
}

/// The vector `v_i(X, Y, Δ)`, optionally weighted by `det(U, C)_B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetVector {
    pub i: usize,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub delta: IndexSubset,
    pub u: Option<usize>,
    pub entries: FqVector,
}

impl GadgetVector {
    pub fn support(&self) -> Vec<usize> {
        (0..self.entries.len())
            .filter(|&c| !self.entries.entries[c].is_zero())
            .collect()
    }
}

fn gadget_sets(
    ground: usize,
    x: &[usize],
    y: &[usize],
    delta: IndexSubset,
    u: Option<usize>,
) -> Result<IndexSubset> {
    if x.len() != y.len() {
        return Err(Error::BadSizes(format!(
            "|X| = {} but |Y| = {}",
            x.len(),
            y.len()
        )));
    }
    let mut all = delta;
    for &e in x.iter().chain(y).chain(u.iter()) {
        if all.contains(e) {
            return Err(Error::OverlapError);
        }
        all = all.with(e);
    }
    if let Some(e) = all.max().filter(|&e| e >= ground) {
        return Err(Error::IndexOutOfRange { index: e, ground });
    }
    Ok(all)
}

fn gadget_entries(
    field: &Field,
    ground: usize,
    size: usize,
    x: &[usize],
    y: &[usize],
    delta: IndexSubset,
    weight: &dyn Fn(IndexSubset) -> Result<Fe>,
) -> Result<Vec<Fe>> {
    let mut entries = vec![Fe::ZERO; crate::combi::binom_usize(ground, size)];
    let i = x.len();
    for tau_bits in 0u64..(1 << i) {
        let mut c = delta;
        for j in 0..i {
            c = c.with(if tau_bits >> j & 1 == 1 { x[j] } else { y[j] });
        }
        let sign = field.sign(tau_bits.count_ones() as usize);
        entries[colex_rank(c)] = field.mul(sign, weight(c)?);
    }
    Ok(entries)
}

/// `v_i(X, Y, Δ)` over `binom([ground], k−1)`; `X`, `Y` are ordered so that `x_j` pairs with `y_j`.
pub fn gadget_vector(
    field: &Field,
    ground: usize,
    x: &[usize],
    y: &[usize],
    delta: IndexSubset,
) -> Result<GadgetVector> {
    gadget_sets(ground, x, y, delta, None)?;
    let size = x.len() + delta.len();
    let entries = gadget_entries(field, ground, size, x, y, delta, &|_| Ok(Fe::ONE))?;
    Ok(GadgetVector {
        i: x.len(),
        x: x.to_vec(),
        y: y.to_vec(),
        delta,
        u: None,
        entries: FqVector::new(field, entries),
    })
}

/// `v_i(U, X, Y, Δ)` over `binom(G, k−1)`: the same pattern weighted by `det(U, C)_B`.
pub fn gadget_vector_at(
    g: &Arc,
    b: &Basis,
    u: usize,
    x: &[usize],
    y: &[usize],
    delta: IndexSubset,
) -> Result<GadgetVector> {
    gadget_sets(g.len(), x, y, delta, Some(u))?;
    if x.len() + delta.len() + 1 != g.k() {
        return Err(Error::BadSizes(format!(
            "|X| + |Δ| = {} but k − 1 = {}",
            x.len() + delta.len(),
            g.k() - 1
        )));
    }
    let weight = |c: IndexSubset| crate::arcs::det_uc(u, c, g, b);
    let entries = gadget_entries(g.field(), g.len(), g.k() - 1, x, y, delta, &weight)?;
    Ok(GadgetVector {
        i: x.len(),
        x: x.to_vec(),
        y: y.to_vec(),
        delta,
        u: Some(u),
        entries: FqVector::new(g.field(), entries),
    })
}

fn det_ordered(b: &Basis, g: &Arc, first: usize, rest: IndexSubset, tail: IndexSubset) -> Fe {
    let mut rows: Vec<&[Fe]> = vec![g.vector(first)];
    rows.extend(rest.iter().map(|i| g.vector(i)));
    rows.extend(tail.iter().map(|i| g.vector(i)));
    b.det_rows(&rows)
}

/// Coefficients `det(u, W∖w, Δ)_B / det(w, W∖w, Δ)_B` of `u` in the basis `W ∪ Δ`.
pub fn cramer_coefficients(
    g: &Arc,
    b: &Basis,
    u: usize,
    w: IndexSubset,
    delta: IndexSubset,
) -> Result<Vec<(usize, Fe)>> {
    let f = g.field();
    if w.len() + delta.len() != g.k() || !w.is_disjoint(delta) {
        return Err(Error::BadSizes(format!(
            "|W| + |Δ| = {} but k = {}",
            w.len() + delta.len(),
            g.k()
        )));
    }
    w.iter()
        .map(|wi| {
            let rest = w.without(wi);
            let num = det_ordered(b, g, u, rest, delta);
            let den = det_ordered(b, g, wi, rest, delta);
            Ok((wi, f.div(num, den)?))
        })
        .collect()
}

/// `Σ_{w∈W} [det(u, W∖w, Δ) / det(w, W∖w, Δ)] det(w, C) − det(u, C)`, all with respect to `B`.
pub fn check_cramerlike(
    g: &Arc,
    c: IndexSubset,
    delta: IndexSubset,
    w: IndexSubset,
    u: usize,
    b: &Basis,
) -> Result<Fe> {
    let f = g.field();
    if !delta.is_subset_of(c) || c.len() + 1 != g.k() {
        return Err(Error::BadSizes("Δ must lie inside a (k−1)-set C".into()));
    }
    let det_c = |y: usize| {
        if c.contains(y) {
            Ok(Fe::ZERO)
        } else {
            crate::arcs::det_uc(y, c, g, b)
        }
    };
    let mut total = Fe::ZERO;
    for (wi, coef) in cramer_coefficients(g, b, u, w, delta)? {
        total = f.add(total, f.mul(coef, det_c(wi)?));
    }
    Ok(f.sub(total, det_c(u)?))
}

/// One step of the descent on gadget vectors: with `x_i = U`, `X = X' ∪ {U}`,
/// `Y = Y' ∪ {y_i}`, `Δ = Δ' ∖ {y_i}`, checks
/// `v_{i−1}(U, X', Y', Δ') = Σ_{w∈W} coef_w · v_i(w, X, Y, Δ)`.
#[allow(clippy::too_many_arguments)]
pub fn check_lincombvr(
    g: &Arc,
    b: &Basis,
    u: usize,
    x_prev: &[usize],
    y_prev: &[usize],
    delta_prev: IndexSubset,
    y_i: usize,
    w: IndexSubset,
) -> Result<bool> {
    if !delta_prev.contains(y_i) {
        return Err(Error::BadSizes("y_i must belong to Δ'".into()));
    }
    let lhs = gadget_vector_at(g, b, u, x_prev, y_prev, delta_prev)?;
    let mut x = x_prev.to_vec();
    x.push(u);
    let mut y = y_prev.to_vec();
    y.push(y_i);
    let delta = delta_prev.without(y_i);
    let used = gadget_sets(g.len(), &x, &y, delta, None)?;
    if !w.is_disjoint(used) || w.len() != x.len() + 1 {
        return Err(Error::BadSizes(format!(
            "W must be {} members outside X ∪ Y ∪ Δ",
            x.len() + 1
        )));
    }
    let f = g.field();
    let mut rhs = vec![Fe::ZERO; lhs.entries.len()];
    for (wi, coef) in cramer_coefficients(g, b, u, w, delta)? {
        let v = gadget_vector_at(g, b, wi, &x, &y, delta)?;
        f.axpy(&mut rhs, coef, &v.entries.entries);
    }
    Ok(rhs == lhs.entries.entries)
}

fn require_k_above_p(k: usize, p: u32) -> Result<()> {
    if k <= p as usize {
        return Err(Error::PreconditionKLEP { k, p });
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct ColperpReport {
    pub product_zero: bool,
    pub nullity: usize,
    pub column_rank: usize,
    pub formula: u64,
}

impl ColperpReport {
    pub fn passed(&self) -> bool {
        self.product_zero && self.nullity == self.column_rank && self.nullity as u64 == self.formula
    }
}

/// The nullspace of `I_{2k−3}(k+p−2, k−1)` equals the column space of `I_{2k−3}(k−1, k−2)`.
pub fn check_colperp(k: usize, field: &Field) -> Result<ColperpReport> {
    let p = field.p();
    require_k_above_p(k, p)?;
    let r = 2 * k - 3;
    let top = build_inclusion(field, r, k + p as usize - 2, k - 1)?;
    let low = build_inclusion(field, r, k - 1, k - 2)?;
    let product_zero = top.mul(&low)?.is_zero();
    let nullity = top.cols() - top.rank();
    let column_rank = low.rank();
    let formula = crate::combi::to_u64(&fw_rank(r, k - 1, k - 2, p)?);
    Ok(ColperpReport {
        product_zero,
        nullity,
        column_rank,
        formula,
    })
}

/// `v_{k−p}(X, Y, Δ)` lies in the column space of `I_{2k−3}(k−1, k−2)`, and is
/// orthogonal to every row of `I_{2k−3}(k+p−2, k−1)`.
pub fn check_base_lemma(
    k: usize,
    field: &Field,
    x: &[usize],
    y: &[usize],
    delta: IndexSubset,
) -> Result<(bool, bool)> {
    let p = field.p();
    require_k_above_p(k, p)?;
    let i = k - p as usize;
    if x.len() != i || delta.len() + i + 1 != k {
        return Err(Error::BadSizes(format!(
            "need |X| = |Y| = {i} and |Δ| = {}",
            k - 1 - i
        )));
    }
    let r = 2 * k - 3;
    let v = gadget_vector(field, r, x, y, delta)?;
    let low = build_inclusion(field, r, k - 1, k - 2)?;
    let in_span = low.in_column_space(&v.entries.entries)?;
    let top = build_inclusion(field, r, k + p as usize - 2, k - 1)?;
    let orthogonal = top.mul_vec(&v.entries.entries)?.iter().all(|e| e.is_zero());
    Ok((in_span, orthogonal))
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaReport {
    pub beta: Vec<Fe>,
    pub w: Vec<Fe>,
    pub v: Vec<Fe>,
}

/// The explicit preimage for the weight-`k` target vector in the column space of `I_{2k−2}(k−1, k−2)`.
pub fn classification_beta(k: usize, field: &Field) -> Result<BetaReport> {
    let p = field.p();
    if k > p as usize {
        return Err(Error::KExceedsP { k, p });
    }
    if k < 2 {
        return Err(Error::BadSizes(format!("k = {k}")));
    }
    let f = field;
    let r = 2 * k - 2;
    let head = IndexSubset::range(k);
    let fact = |n: usize| f.from_int(factorial_mod(n as u64, p) as i64);
    let beta: Vec<Fe> = subsets_colex(IndexSubset::range(r), k - 2)
        .map(|a| {
            let l = a.intersection(head).len();
            f.mul(f.sign(l), f.mul(fact(l), fact(k - 2 - l)))
        })
        .collect();
    let inc = build_inclusion(f, r, k - 1, k - 2)?;
    let w = inc.mul_vec(&beta)?;
    let top = f.mul(f.sign(k - 2), fact(k - 1));
    for (idx, c) in subsets_colex(IndexSubset::range(r), k - 1).enumerate() {
        let expected = if c.is_subset_of(head) { top } else { Fe::ZERO };
        if w[idx] != expected {
            return Err(Error::MismatchEntry { row: idx, col: 0 });
        }
    }
    let scale = f.inv(top)?;
    let v = w.iter().map(|&x| f.mul(x, scale)).collect();
    Ok(BetaReport { beta, w, v })
}

/// `W_{S,B}`: for each `x ∈ S∖B` the column of inverse coordinates of `x` in the basis `B`.
pub fn roth_lempel(s: &Arc, b: IndexSubset) -> Result<(FqMatrix, usize)> {
    let k = s.k();
    if b.len() != k {
        return Err(Error::BadSizes(format!("|B| = {} but k = {k}", b.len())));
    }
    let f = s.field();
    let basis = Basis::from_arc(s, &b.to_vec())?;
    let mut cols = Vec::new();
    for x in s.all().minus(b).iter() {
        let c = basis.coords(s.vector(x));
        if c.iter().any(|e| e.is_zero()) {
            return Err(Error::ZeroCoordinate(x));
        }
        cols.push(c.iter().map(|&e| f.inv(e)).collect::<Result<Vec<_>>>()?);
    }
    let w = if cols.is_empty() {
        FqMatrix::zeros(f, k, 0)
    } else {
        FqMatrix::from_rows(f, &cols)?.transpose()
    };
    let rank = w.rank();
    Ok((w, rank))
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub k: usize,
    pub n: usize,
    pub subsets_checked: usize,
    /// `c_j = α_{B∖e_j}` from the first `A`.
    pub c: Vec<Fe>,
    /// Whether `c` agrees, up to a common scalar, across every `A`.
    pub c_projectively_constant: bool,
    /// Whether the weight-`k` target lies in the column space of `H` for every `A`.
    pub target_in_colspace: bool,
    pub closed_form_ok: bool,
    pub residual_failures: Vec<Vec<usize>>,
    pub z_rank: Option<usize>,
    pub z_annihilates: Option<bool>,
}

impl ClassificationReport {
    pub fn passed(&self) -> bool {
        self.closed_form_ok
            && self.residual_failures.is_empty()
            && self.z_rank.is_none_or(|r| r + 2 == self.k)
            && self.z_annihilates.unwrap_or(true)
    }
}

fn proportional(f: &Field, a: &[Fe], b: &[Fe]) -> bool {
    let Some(j) = a.iter().position(|x| !x.is_zero()) else {
        return b.iter().all(|x| x.is_zero());
    };
    if b[j].is_zero() {
        return false;
    }
    let ratio = f.div(b[j], a[j]).expect("nonzero");
    a.iter().zip(b).all(|(&x, &y)| f.mul(x, ratio) == y)
}

/// Walks every `(k−2)`-subset `A ⊂ S∖B`: reorders `S` as `(B, A, L̂, …)`,
/// builds the left kernel vector of `H_G^{↑n}` from `α` and checks the linear
/// relation it forces among inverse coordinates.
pub fn classification_witness(s: &Arc, b: &[usize], n: usize) -> Result<ClassificationReport> {
    let k = s.k();
    let f = s.field();
    if b.len() != k || k < 3 {
        return Err(Error::BadSizes(format!(
            "need k ≥ 3 and |B| = k, got k = {k}, |B| = {}",
            b.len()
        )));
    }
    let q = f.q() as usize;
    if s.len() != q + 1 || 2 * k + n > q {
        return Err(Error::BadSizes(format!(
            "need |S| = q + 1 and n ≤ q − 2k, got |S| = {}, n = {n}",
            s.len()
        )));
    }
    let bset = IndexSubset::new(b, s.len())?;
    let basis = Basis::from_arc(s, b)?;
    let coords: Vec<Vec<Fe>> = (0..s.len()).map(|i| basis.coords(s.vector(i))).collect();
    let m = 2 * k - 2 + n;
    let head = IndexSubset::range(k);

    let mut c_first: Option<Vec<Fe>> = None;
    let mut c_constant = true;
    let mut target_ok = true;
    let mut closed_ok = true;
    let mut failures = Vec::new();
    let mut checked = 0;
    for a in subsets_colex(s.all().minus(bset), k - 2) {
        let l_hat: Vec<usize> = s.all().minus(bset.union(a)).iter().take(n).collect();
        let mut front = b.to_vec();
        front.extend(a.iter());
        front.extend(&l_hat);
        let s2 = s.bring_to_front(&front)?;
        let g = s2.prefix(m)?;
        let gb = Basis::new(f, s2.vectors()[..k].to_vec(), BasisRole::FromArc)?;
        let cache = TangentCache::new(&s2);
        let alpha_of = |x: IndexSubset| alpha_entry(&cache, x);
        let dets = DetTable::new(&g, &gb);

        // y_C = α_C Π_{y ∈ G∖(C ∪ L_C)} det(y, C)^{−1}
        let mut y = Vec::new();
        for c in subsets_colex(g.all(), k - 1) {
            let ac = alpha_c(&cache, c, &alpha_of)?.ok_or(Error::MismatchEntry {
                row: colex_rank(c),
                col: 0,
            })?;
            let lc = last_colex_subset(g.all().minus(c), n)?;
            let prod = f.product(g.all().minus(c.union(lc)).iter().map(|x| dets.get(x, c)));
            y.push(f.div(ac, prod)?);
        }
        let h = build_h(&g, n, &gb)?;
        if let Some(col) = h.vec_mul(&y)?.iter().position(|e| !e.is_zero()) {
            return Err(Error::MismatchEntry { row: 0, col });
        }
        let mut target = vec![Fe::ZERO; y.len()];
        for c in subsets_colex(head, k - 1) {
            target[colex_rank(c)] = Fe::ONE;
        }
        let in_span = h.in_column_space(&target)?;
        target_ok &= in_span;

        // c_j and the closed form of y on the rows B∖e_j
        let a_pos = IndexSubset::range(2 * k - 2).minus(head);
        let mut c = Vec::with_capacity(k);
        let mut residual = Fe::ZERO;
        for j in 0..k {
            let row = head.without(j);
            let cj = alpha_c(&cache, row, &alpha_of)?.ok_or(Error::MismatchEntry {
                row: colex_rank(row),
                col: 0,
            })?;
            let inv_prod = f.product(
                a_pos
                    .iter()
                    .map(|i| f.inv(coords_of(&s2, &gb, i)[j]).expect("arc coordinate")),
            );
            let term = f.mul(f.sign((j + 2) * (k - 1)), f.mul(cj, inv_prod));
            closed_ok &= y[colex_rank(row)] == term;
            residual = f.add(residual, term);
            c.push(cj);
        }
        if in_span && !residual.is_zero() {
            failures.push(a.to_vec());
        }
        match &c_first {
            None => c_first = Some(c),
            Some(c0) => c_constant &= proportional(f, c0, &c),
        }
        checked += 1;
    }
    let c = c_first.unwrap_or_default();

    // Z for the first three members outside B and a (k−2)-set avoiding them
    let rest: Vec<usize> = s.all().minus(bset).to_vec();
    let (z_rank, z_annihilates) = if c_constant && rest.len() > k && !c.is_empty() {
        let triple = &rest[..3];
        let a: Vec<usize> = rest[3..k + 1].to_vec();
        let zrows: Vec<Vec<Fe>> = (0..k - 2)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let prod = f.product(
                            a.iter()
                                .enumerate()
                                .filter(|&(l, _)| l != i)
                                .map(|(_, &y)| f.inv(coords[y][j]).expect("nonzero")),
                        );
                        f.mul(f.sign((j + 2) * (k - 1)), f.mul(c[j], prod))
                    })
                    .collect()
            })
            .collect();
        let z = FqMatrix::from_rows(f, &zrows)?;
        let annihilates = triple.iter().all(|&w| {
            let col: Vec<Fe> = coords[w]
                .iter()
                .map(|&e| f.inv(e).expect("nonzero"))
                .collect();
            z.mul_vec(&col)
                .expect("length k")
                .iter()
                .all(|e| e.is_zero())
        });
        (Some(z.rank()), Some(annihilates))
    } else {
        (None, None)
    };
    Ok(ClassificationReport {
        k,
        n,
        subsets_checked: checked,
        c,
        c_projectively_constant: c_constant,
        target_in_colspace: target_ok,
        closed_form_ok: closed_ok,
        residual_failures: failures,
        z_rank,
        z_annihilates,
    })
}

fn coords_of(s: &Arc, b: &Basis, i: usize) -> Vec<Fe> {
    b.coords(s.vector(i))
}

/// The matrices attached to one `(S, G = S[0..m), n, B)`, built on first use.
pub struct SystemBundle {
    s: Arc,
    g: Arc,
    n: usize,
    basis: Basis,
    m_cell: OnceLock<FqMatrix>,
    h_cell: OnceLock<FqMatrix>,
    pqr_cell: OnceLock<Pqr>,
    alpha_cell: OnceLock<FqVector>,
}

fn fill<T>(cell: &OnceLock<T>, build: impl FnOnce() -> Result<T>) -> Result<&T> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = build()?;
    Ok(cell.get_or_init(|| v))
}

impl SystemBundle {
    pub fn new(s: Arc, m: usize, n: usize, basis: Basis) -> Result<SystemBundle> {
        if basis.k() != s.k() {
            return Err(Error::DimensionMismatch(format!(
                "basis of size {} for k = {}",
                basis.k(),
                s.k()
            )));
        }
        let g = s.prefix(m)?;
        check_n(m, s.k(), n)?;
        Ok(SystemBundle {
            s,
            g,
            n,
            basis,
            m_cell: OnceLock::new(),
            h_cell: OnceLock::new(),
            pqr_cell: OnceLock::new(),
            alpha_cell: OnceLock::new(),
        })
    }

    /// A bundle that only needs `G`; the tangent matrices are then built with `S = G`.
    pub fn for_family(g: Arc, n: usize, basis: Basis) -> Result<SystemBundle> {
        let m = g.len();
        SystemBundle::new(g, m, n, basis)
    }

    pub fn s(&self) -> &Arc {
        &self.s
    }

    pub fn g(&self) -> &Arc {
        &self.g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> i64 {
        self.s.t()
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn m(&self) -> Result<&FqMatrix> {
        fill(&self.m_cell, || build_m(&self.g, self.n, &self.basis))
    }

    pub fn h(&self) -> Result<&FqMatrix> {
        fill(&self.h_cell, || build_h(&self.g, self.n, &self.basis))
    }

    pub fn pqr(&self) -> Result<&Pqr> {
        fill(&self.pqr_cell, || build_pqr(&self.s, self.g.len(), self.n))
    }

    pub fn alpha(&self) -> Result<&FqVector> {
        fill(&self.alpha_cell, || alpha_vector(&self.s))
    }

    pub fn similar_report(&self) -> Result<SimilarReport> {
        let s = &self.s;
        let f = s.field();
        let k = s.k();
        let t = tangent_count(s)?;
        let pqr = self.pqr()?;
        let mm = self.m()?;
        let cache = TangentCache::new(s);

        let ones = vec![Fe::ONE; pqr.p.rows()];
        let ones_residual_zero = pqr.p.vec_mul(&ones)?.iter().all(|e| e.is_zero());

        let alpha = self.alpha()?;
        let alpha_nonzero = alpha.entries.iter().all(|e| !e.is_zero());
        let l = build_l(s)?;
        let alpha_in_nullspace = l.mul_vec(&alpha.entries)?.iter().all(|e| e.is_zero());
        let alpha_of = |a: IndexSubset| Ok(alpha.entries[colex_rank(a)]);

        let g = self.g.all();
        let dets = DetTable::new(&self.g, &self.basis);
        let mut alpha_c_well_defined = true;
        let mut d1 = Vec::new();
        for c in subsets_colex(g, k - 1) {
            let ac = match alpha_c(&cache, c, &alpha_of)? {
                Some(v) => v,
                None => {
                    alpha_c_well_defined = false;
                    // fall back to the first face so the comparison can still locate a mismatch
                    let a = c.without(c.min().expect("nonempty"));
                    f.mul(
                        f.sign(tau(a, c)? * (t + 1)),
                        f.mul(
                            alpha_of(a)?,
                            cache.f(a, c.minus(a).0.trailing_zeros() as usize)?,
                        ),
                    )
                }
            };
            let f3 = f.product(g.minus(c).iter().map(|y| dets.get(y, c)));
            d1.push(f.div(f3, ac)?);
        }
        let cols = column_pairs(self.g.len(), self.n, k);
        let sign4 = f.sign((t + 1) * (k - 1));
        let mut d2 = Vec::with_capacity(cols.len());
        let mut f4_by_a = std::collections::HashMap::new();
        for &(_, a) in &cols {
            let f4 = match f4_by_a.get(&a) {
                Some(&v) => v,
                None => {
                    let ba = adapted_basis(s, a)?;
                    let n_det = ba.change_to(&self.basis).det()?;
                    let v = f.mul(sign4, f.pow(n_det, -((t + 1) as i64))?);
                    f4_by_a.insert(a, v);
                    v
                }
            };
            d2.push(f.mul(alpha_of(a)?, f4));
        }
        let lhs = pqr.p.scale_by_diagonals(&d1, &d2)?;
        let mismatch = lhs.first_mismatch(mm);
        Ok(SimilarReport {
            rows: mm.rows(),
            cols: mm.cols(),
            d1,
            d2,
            ones_residual_zero,
            alpha_nonzero,
            alpha_in_nullspace,
            alpha_c_well_defined,
            mismatch,
        })
    }
}

/// `det` of `k` arc members in the order given.
pub fn det_members(s: &Arc, b: &Basis, idx: &[usize]) -> Fe {
    let rows: Vec<&[Fe]> = idx.iter().map(|&i| s.vector(i)).collect();
    b.det_rows(&rows)
}

/// Unweighted determinant helper for tests and callers outside a basis.
pub fn det_std(s: &Arc, idx: &[usize]) -> Fe {
    let rows: Vec<&[Fe]> = idx.iter().map(|&i| s.vector(i)).collect();
    det_of_rows(s.field(), &rows)
}
