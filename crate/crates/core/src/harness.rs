//! Verification campaigns over populations of arcs, and the named one-shot checks.
//!
//! Both are registries of trait objects: a campaign kind knows which arc size
//! it needs, whether the parameters sit inside the proven or conjectured
//! range, and how to judge one arc; a check knows how to run itself from a
//! small parameter set. Adding a kind means adding one impl and one line in
//! the registry constructor.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arcs::{
    enumerate_arcs, make_glynn, make_nrc, random_invertible, random_nonzero, Arc, Basis,
    EnumerationMode, Grower,
};
use crate::combi::{binom_usize, colex_unrank, subsets_colex, IndexSubset};
use crate::error::{Error, Result};
use crate::exactla::{rank_by_columns, weight_one_in_colspace, FqMatrix};
use crate::gf::{Fe, Field, FieldSpec};
use crate::sysmat::{
    build_h, build_inclusion, build_m, check_base_lemma, check_colperp, check_cramerlike,
    check_lincombvr, classification_beta, classification_witness, fw_rank, roth_lempel,
    verify_similar,
};
use crate::tangents::{
    adapted_basis, check_homogtwovar, check_interpolation, segre_sides, BinaryForm, TangentCache,
};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Arcs sampled per seed when a campaign does not say otherwise.
pub const DEFAULT_SAMPLE_COUNT: usize = 500;

/// Where a campaign's arcs come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArcSource {
    /// Frame-normalised arcs, exhaustively or sampled per `mode`.
    Generated,
    /// The first `size` points of the normal rational curve.
    NrcPrefix,
    /// Random `size`-subsets of random linear images of the normal rational curve.
    NrcSubarcs,
    /// The Glynn arc and, when sampling, random linear images of it.
    Glynn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Stop after this many arcs (exhaustive populations are truncated, and the report says so).
    pub max_arcs: Option<usize>,
    /// Node limit for the extension search.
    pub search_nodes: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_arcs: None,
            search_nodes: 5_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Campaign {
    pub kind: String,
    pub field: FieldSpec,
    pub k: usize,
    pub n: usize,
    /// Arc size for kinds where it is free; derived from `k` and `n` otherwise.
    pub size: Option<usize>,
    pub mode: EnumerationMode,
    pub source: ArcSource,
    pub budget: Budget,
    /// Random instances drawn per arc by the identity checks.
    pub instances_per_arc: usize,
}

impl Campaign {
    pub fn new(kind: &str, field: &Field, k: usize, n: usize, mode: EnumerationMode) -> Campaign {
        Campaign {
            kind: kind.to_string(),
            field: field.spec(),
            k,
            n,
            size: None,
            mode,
            source: ArcSource::Generated,
            budget: Budget::default(),
            instances_per_arc: 1,
        }
    }

    pub fn with_size(mut self, size: usize) -> Campaign {
        self.size = Some(size);
        self
    }

    pub fn with_source(mut self, source: ArcSource) -> Campaign {
        self.source = source;
        self
    }

    pub fn with_instances(mut self, count: usize) -> Campaign {
        self.instances_per_arc = count;
        self
    }

    pub fn seed(&self) -> Option<u64> {
        match self.mode {
            EnumerationMode::Sample { seed, .. } => Some(seed),
            EnumerationMode::Exhaustive { .. } => None,
        }
    }

    fn field(&self) -> Result<Field> {
        Field::new(self.field.p as u64, self.field.e)
    }
}

/// Whether the parameters fall where a theorem or conjecture makes a prediction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RangeCheck {
    pub in_range: bool,
    pub note: String,
}

impl RangeCheck {
    fn new(in_range: bool, note: impl Into<String>) -> RangeCheck {
        RangeCheck {
            in_range,
            note: note.into(),
        }
    }
}

/// The verdict on one arc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
    /// Informational line for the report log, independent of the verdict.
    pub log: Option<String>,
}

impl Outcome {
    fn pass(detail: impl Into<String>) -> Outcome {
        Outcome {
            pass: true,
            detail: detail.into(),
            log: None,
        }
    }

    fn fail(detail: impl Into<String>) -> Outcome {
        Outcome {
            pass: false,
            detail: detail.into(),
            log: None,
        }
    }

    fn verdict(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome {
            pass,
            detail: detail.into(),
            log: None,
        }
    }
}

pub trait CampaignKind: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn arc_size(&self, c: &Campaign, f: &Field) -> Result<usize>;
    fn range(&self, c: &Campaign, f: &Field) -> RangeCheck;
    fn check(&self, c: &Campaign, arc: &Arc, rng: &mut ChaCha8Rng) -> Result<Outcome>;
}

fn explicit_size(c: &Campaign) -> Result<usize> {
    c.size
        .ok_or_else(|| Error::Config(format!("campaign {} needs an arc size", c.kind)))
}

/// Full row rank of `M`, with a deficient answer confirmed by column-order elimination.
fn confirmed_rank(m: &FqMatrix) -> Result<(usize, bool)> {
    let rank = m.rank();
    if rank == m.rows() {
        return Ok((rank, true));
    }
    let second = rank_by_columns(m);
    if second != rank {
        return Err(Error::CountMismatch {
            expected: rank,
            found: second,
        });
    }
    Ok((rank, false))
}

struct PerRank;

impl CampaignKind for PerRank {
    fn name(&self) -> &'static str {
        "perrank"
    }

    fn summary(&self) -> &'static str {
        "full row rank of M^n on arcs of size 2k-3+n"
    }

    fn arc_size(&self, c: &Campaign, _: &Field) -> Result<usize> {
        Ok(2 * c.k + c.n - 3)
    }

    fn range(&self, c: &Campaign, f: &Field) -> RangeCheck {
        let (p, q) = (f.p() as usize, f.q() as usize);
        let bound = p + c.n * (p - 2);
        let ok = c.n <= q && c.k >= 2 && c.k <= bound && 2 * c.k + c.n <= q + 4;
        RangeCheck::new(
            ok,
            format!(
                "2 <= k <= min(p + n(p-2), (q+4-n)/2) = min({bound}, {}/2)",
                q as i64 + 4 - c.n as i64
            ),
        )
    }

    fn check(&self, c: &Campaign, arc: &Arc, _: &mut ChaCha8Rng) -> Result<Outcome> {
        let m = build_m(arc, c.n, &Basis::standard(arc.field(), arc.k()))?;
        let (rank, full) = confirmed_rank(&m)?;
        Ok(Outcome::verdict(
            full,
            format!("rank {rank} of {} rows ({} columns)", m.rows(), m.cols()),
        ))
    }
}

struct NoneThm;

impl CampaignKind for NoneThm {
    fn name(&self) -> &'static str {
        "none_thm"
    }

    fn summary(&self) -> &'static str {
        "full row rank of M^1 on arcs of size 2k-2"
    }

    fn arc_size(&self, c: &Campaign, _: &Field) -> Result<usize> {
        if c.n != 1 {
            return Err(Error::Config(format!(
                "none_thm runs with n = 1, got {}",
                c.n
            )));
        }
        Ok(2 * c.k - 2)
    }

    fn range(&self, c: &Campaign, f: &Field) -> RangeCheck {
        let (p, q) = (f.p() as usize, f.q() as usize);
        RangeCheck::new(
            c.k <= 2 * p - 2 && 2 * p - 2 <= q,
            format!("k <= 2p-2 <= q with 2p-2 = {}", 2 * p - 2),
        )
    }

    fn check(&self, c: &Campaign, arc: &Arc, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        PerRank.check(c, arc, rng)
    }
}

struct NZero;

impl CampaignKind for NZero {
    fn name(&self) -> &'static str {
        "nzero"
    }

    fn summary(&self) -> &'static str {
        "M^0 on arcs of size 2k-3 has full row rank exactly when k <= p"
    }

    fn arc_size(&self, c: &Campaign, _: &Field) -> Result<usize> {
        if c.n != 0 {
            return Err(Error::Config(format!("nzero runs with n = 0, got {}", c.n)));
        }
        Ok(2 * c.k - 3)
    }

    fn range(&self, _: &Campaign, _: &Field) -> RangeCheck {
        RangeCheck::new(true, "both directions are predicted for every k")
    }

    fn check(&self, c: &Campaign, arc: &Arc, _: &mut ChaCha8Rng) -> Result<Outcome> {
        let m = build_m(arc, c.n, &Basis::standard(arc.field(), arc.k()))?;
        let (rank, full) = confirmed_rank(&m)?;
        let expected = arc.k() <= arc.field().p() as usize;
        Ok(Outcome::verdict(
            full == expected,
            format!(
                "rank {rank} of {} rows, full rank expected: {expected}",
                m.rows()
            ),
        ))
    }
}

/// The weight-`k` target: ones on the `(k−1)`-subsets of the first `k` members.
pub fn classification_target(g: &Arc) -> Vec<Fe> {
    let k = g.k();
    let mut v = vec![Fe::ZERO; binom_usize(g.len(), k - 1)];
    for c in subsets_colex(IndexSubset::range(k), k - 1) {
        v[crate::combi::colex_rank(c)] = Fe::ONE;
    }
    v
}

struct Classify;

impl CampaignKind for Classify {
    fn name(&self) -> &'static str {
        "classify"
    }

    fn summary(&self) -> &'static str {
        "weight-k target vector in the column space of H^n on arcs of size 2k-2+n"
    }

    fn arc_size(&self, c: &Campaign, _: &Field) -> Result<usize> {
        Ok(2 * c.k + c.n - 2)
    }

    fn range(&self, c: &Campaign, f: &Field) -> RangeCheck {
        let (p, q) = (f.p() as usize, f.q() as usize);
        let n_ok = 2 * c.k + c.n <= q;
        let predicted = (c.n == 0 && c.k <= p) || (c.n == 2 && c.k <= 2 * p - 2 && 2 * p - 2 <= q);
        RangeCheck::new(
            n_ok && predicted,
            "n <= q-2k and either (n = 0, k <= p) or (n = 2, k <= 2p-2 <= q)",
        )
    }

    fn check(&self, c: &Campaign, arc: &Arc, _: &mut ChaCha8Rng) -> Result<Outcome> {
        let h = build_h(arc, c.n, &Basis::standard(arc.field(), arc.k()))?;
        let target = classification_target(arc);
        let ok = h.in_column_space(&target)?;
        Ok(Outcome::verdict(
            ok,
            format!(
                "target {} the column space of a {}x{} matrix",
                if ok { "in" } else { "not in" },
                h.rows(),
                h.cols()
            ),
        ))
    }
}

struct SegreKind;

/// A random `(D, u, v, w)` with `|D| = k − 3`.
fn random_segre_instance(arc: &Arc, rng: &mut impl Rng) -> (IndexSubset, usize, usize, usize) {
    let mut idx: Vec<usize> = (0..arc.len()).collect();
    idx.shuffle(rng);
    (IndexSubset::of(&idx[3..arc.k()]), idx[0], idx[1], idx[2])
}

impl CampaignKind for SegreKind {
    fn name(&self) -> &'static str {
        "segre"
    }

    fn summary(&self) -> &'static str {
        "lemma of tangents on random (D, u, v, w)"
    }

    fn arc_size(&self, c: &Campaign, _: &Field) -> Result<usize> {
        explicit_size(c)
    }

    fn range(&self, c: &Campaign, _: &Field) -> RangeCheck {
        RangeCheck::new(c.k >= 3, "k >= 3")
    }

    fn check(&self, c: &Campaign, arc: &Arc, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let cache = TangentCache::new(arc);
        for _ in 0..c.instances_per_arc {
            let (d, u, v, w) = random_segre_instance(arc, rng);
            let (l, r) = segre_sides(&cache, d, u, v, w)?;
            if l != r {
                return Ok(Outcome::fail(format!(
                    "D = {d}, u = {u}, v = {v}, w = {w}: {l} vs {r}"
                )));
            }
        }
        Ok(Outcome::pass(format!("{} instances", c.instances_per_arc)))
    }
}

struct InterpolationKind;

/// `t + 2` pairwise independent points of `F_q^2`, randomly scaled.
pub fn random_line_points(f: &Field, count: usize, rng: &mut impl Rng) -> Vec<(Fe, Fe)> {
    let mut all: Vec<(Fe, Fe)> = f.elements().map(|a| (Fe::ONE, a)).collect();
    all.push((Fe::ZERO, Fe::ONE));
    all.shuffle(rng);
    all.truncate(count);
    all.into_iter()
        .map(|(x, y)| {
            let s = random_nonzero(f, rng);
            (f.mul(x, s), f.mul(y, s))
        })
        .collect()
}

impl CampaignKind for InterpolationKind {
    fn name(&self) -> &'static str {
        "interpolation"
    }

    fn summary(&self) -> &'static str {
        "interpolation identity for random forms and for tangent functions on the arc"
    }

    fn arc_size(&self, c: &Campaign, _: &Field) -> Result<usize> {
        explicit_size(c)
    }

    fn range(&self, c: &Campaign, f: &Field) -> RangeCheck {
        let size = c.size.unwrap_or(0);
        let t = f.q() as usize + c.k - 1 - size.min(f.q() as usize + c.k - 1);
        RangeCheck::new(c.k >= 2 && size >= c.k + t, "|S| - (k-2) >= t + 2")
    }

    fn check(&self, c: &Campaign, arc: &Arc, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let f = arc.field();
        let k = arc.k();
        let t = crate::tangents::tangent_count(arc)?;
        for _ in 0..c.instances_per_arc {
            // a random form of degree t on t + 2 points of the line
            if t + 2 <= f.q() as usize + 1 {
                let pts = random_line_points(f, t + 2, rng);
                let form = BinaryForm {
                    coeffs: (0..=t).map(|_| Fe(rng.gen_range(0..f.q()))).collect(),
                };
                let r = check_interpolation(f, &pts, &form)?;
                if !r.is_zero() {
                    return Ok(Outcome::fail(format!(
                        "random form of degree {t}: residual {r}"
                    )));
                }
            }
            // the tangent function at a random A on t + 2 further members
            let rank = rng.gen_range(0..binom_usize(arc.len(), k - 2));
            let a = colex_unrank(rank, k - 2);
            let mut rest = arc.all().minus(a).to_vec();
            if rest.len() < t + 2 {
                continue;
            }
            rest.shuffle(rng);
            let tset = IndexSubset::of(&rest[..t + 2]);
            let b = adapted_basis(arc, a)?;
            let r = check_homogtwovar(arc, a, tset, &b)?;
            if !r.is_zero() {
                return Ok(Outcome::fail(format!("A = {a}, T = {tset}: residual {r}")));
            }
        }
        Ok(Outcome::pass(format!("{} instances", c.instances_per_arc)))
    }
}

struct SimilarKind;

impl CampaignKind for SimilarKind {
    fn name(&self) -> &'static str {
        "similar"
    }

    fn summary(&self) -> &'static str {
        "1 P = 0 and D1 P D2 = M with G the first t+k+n members"
    }

    fn arc_size(&self, c: &Campaign, _: &Field) -> Result<usize> {
        explicit_size(c)
    }

    fn range(&self, c: &Campaign, f: &Field) -> RangeCheck {
        let size = c.size.unwrap_or(0);
        let m = (f.q() as usize + 2 * c.k - 1 + c.n).saturating_sub(size);
        RangeCheck::new(
            size + 1 >= c.k && m <= size && size < f.q() as usize + c.k,
            format!("|G| = t+k+n = {m} <= |S| = {size}"),
        )
    }

    fn check(&self, c: &Campaign, arc: &Arc, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let t = crate::tangents::tangent_count(arc)?;
        let m = t + arc.k() + c.n;
        if m > arc.len() {
            return Err(Error::SizeMismatch {
                g: arc.len(),
                expected: m,
            });
        }
        let b = Basis::random(arc.field(), arc.k(), rng);
        let rep = verify_similar(arc, m, c.n, &b)?;
        let detail = format!(
            "{}x{}; 1P=0: {}, alpha nonzero: {}, L alpha = 0: {}, alpha_C well defined: {}, mismatch: {:?}",
            rep.rows, rep.cols, rep.ones_residual_zero, rep.alpha_nonzero, rep.alpha_in_nullspace, rep.alpha_c_well_defined, rep.mismatch
        );
        Ok(Outcome::verdict(rep.passed(), detail))
    }
}

/// Result of trying to grow an arc to a target size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtensionSearch {
    Extends(Arc),
    NoExtension { nodes: u64 },
}

/// Depth-first search for an arc of size `target` containing `g`, adding
/// projective points (first nonzero coordinate 1) in increasing order.
pub fn search_extension(g: &Arc, target: usize, node_budget: u64) -> Result<ExtensionSearch> {
    let f = g.field();
    let k = g.k();
    if target <= g.len() {
        return Ok(ExtensionSearch::Extends(g.clone()));
    }
    let q = f.q() as u64;
    let total = (q.pow(k as u32) - 1) / (q - 1);
    let points: Vec<Vec<Fe>> = (0..total)
        .map(|mut r| {
            // r enumerates points by the position of the leading 1 and the free tail
            let mut lead = k - 1;
            loop {
                let tail = q.pow((k - 1 - lead) as u32);
                if r < tail {
                    break;
                }
                r -= tail;
                lead -= 1;
            }
            let mut v = vec![Fe::ZERO; k];
            v[lead] = Fe::ONE;
            for x in v[lead + 1..].iter_mut() {
                *x = Fe((r % q) as u32);
                r /= q;
            }
            v
        })
        .collect();
    let mut grower = Grower::from_arc(g);
    let candidates: Vec<usize> = (0..points.len())
        .filter(|&i| grower.accepts(&points[i]))
        .collect();
    let mut nodes = 0u64;
    let mut stack: Vec<usize> = vec![0];
    while let Some(&pos) = stack.last() {
        let depth = stack.len() - 1;
        if grower.len() == target {
            return Ok(ExtensionSearch::Extends(grower.to_arc()));
        }
        // not enough candidates left to reach the target
        if pos >= candidates.len() || candidates.len() - pos < target - grower.len() {
            stack.pop();
            if !stack.is_empty() {
                grower.pop();
                *stack.last_mut().unwrap() += 1;
            }
            continue;
        }
        nodes += 1;
        if nodes > node_budget {
            return Err(Error::BudgetExceeded {
                space: nodes as u128,
                budget: node_budget as u128,
            });
        }
        let v = &points[candidates[pos]];
        if grower.accepts(v) {
            grower.push(v.clone());
            stack.push(pos + 1);
        } else {
            *stack.last_mut().unwrap() += 1;
        }
        let _ = depth;
    }
    Ok(ExtensionSearch::NoExtension { nodes })
}

/// Shared by the full-rank and weight-one variants of the extension cross-check.
struct ExtensionKind {
    weight_one: bool,
}

impl CampaignKind for ExtensionKind {
    fn name(&self) -> &'static str {
        if self.weight_one {
            "weight_one"
        } else {
            "extension_crosscheck"
        }
    }

    fn summary(&self) -> &'static str {
        if self.weight_one {
            "arcs whose M^n has a weight-one column-space vector do not extend to size q+2k-1+n-|G|"
        } else {
            "arcs with full-row-rank M^n do not extend to size q+2k-1+n-|G|"
        }
    }

    fn arc_size(&self, c: &Campaign, _: &Field) -> Result<usize> {
        explicit_size(c)
    }

    fn range(&self, c: &Campaign, f: &Field) -> RangeCheck {
        let size = c.size.unwrap_or(0);
        let q = f.q() as usize;
        let ok = c.n + c.k <= size + 1 && 2 * size <= q + 2 * c.k - 2 + c.n;
        RangeCheck::new(
            ok,
            format!(
                "n+k-1 <= |G| <= (q+2k-2+n)/2, target {}",
                (q + 2 * c.k - 1 + c.n).saturating_sub(size)
            ),
        )
    }

    fn check(&self, c: &Campaign, arc: &Arc, _: &mut ChaCha8Rng) -> Result<Outcome> {
        let f = arc.field();
        let target = f.q() as usize + 2 * arc.k() - 1 + c.n - arc.len();
        let m = build_m(arc, c.n, &Basis::standard(f, arc.k()))?;
        let gate = if self.weight_one {
            weight_one_in_colspace(&m).is_some()
        } else {
            m.rows() <= m.cols() && confirmed_rank(&m)?.1
        };
        let search = match search_extension(arc, target, c.budget.search_nodes) {
            Ok(s) => s,
            // an unfinished search is neither a witness nor a confirmation
            Err(Error::BudgetExceeded { .. }) => {
                let mut out = Outcome::pass("search budget exhausted; undecided");
                out.log = Some(format!(
                    "search for a {target}-point extension exceeded {} nodes",
                    c.budget.search_nodes
                ));
                return Ok(out);
            }
            Err(e) => return Err(e),
        };
        let extends = matches!(search, ExtensionSearch::Extends(_));
        let what = if self.weight_one {
            "weight-one vector"
        } else {
            "full row rank"
        };
        let mut out = if gate {
            Outcome::verdict(!extends, format!("{what}; extends to {target}: {extends}"))
        } else {
            Outcome::pass(format!("no {what}; nothing to check"))
        };
        if !gate {
            let vacuous = if !self.weight_one && m.rows() > m.cols() {
                " (more rows than columns)"
            } else {
                ""
            };
            out.log = Some(format!(
                "no {what}{vacuous}; extends to {target}: {extends}"
            ));
        }
        Ok(out)
    }
}

pub struct Registry<T: ?Sized> {
    entries: Vec<Box<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.entries.iter().map(|b| b.as_ref())
    }
}

impl Registry<dyn CampaignKind> {
    pub fn campaigns() -> Self {
        Registry {
            entries: vec![
                Box::new(PerRank),
                Box::new(Classify),
                Box::new(NZero),
                Box::new(NoneThm),
                Box::new(SegreKind),
                Box::new(InterpolationKind),
                Box::new(SimilarKind),
                Box::new(ExtensionKind { weight_one: false }),
                Box::new(ExtensionKind { weight_one: true }),
            ],
        }
    }

    pub fn get(&self, name: &str) -> Result<&dyn CampaignKind> {
        self.iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown campaign kind {name}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub encoding: Vec<u32>,
    /// The arc in the standard arc file format.
    pub arc: String,
    pub detail: String,
}

impl Witness {
    pub fn reload(&self) -> Result<Arc> {
        Arc::parse(&self.arc)?.recertify()
    }
}

/// The deterministic part of a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportBody {
    pub campaign: Campaign,
    pub toolkit_version: String,
    pub seed: Option<u64>,
    pub exploratory: bool,
    pub range_note: String,
    pub arc_size: usize,
    pub arcs_tested: usize,
    pub passes: usize,
    pub failures: Vec<Witness>,
    pub log: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: u64,
    pub jobs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    #[serde(flatten)]
    pub body: ReportBody,
    pub timing: Timing,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.body.failures.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// The report without timing: byte-identical across reruns.
    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("serializable")
    }

    pub fn csv_header() -> &'static str {
        "kind,q,k,n,size,arcs_tested,passes,failures,exploratory,elapsed_ms"
    }

    pub fn csv_row(&self) -> String {
        let b = &self.body;
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            b.campaign.kind,
            b.campaign.field.q,
            b.campaign.k,
            b.campaign.n,
            b.arc_size,
            b.arcs_tested,
            b.passes,
            b.failures.len(),
            b.exploratory,
            self.timing.elapsed_ms
        )
    }
}

/// The arcs a campaign runs over, in generation order.
pub fn population(c: &Campaign, f: &Field, size: usize) -> Result<Vec<Arc>> {
    let k = c.k;
    let cap = c.budget.max_arcs.unwrap_or(usize::MAX);
    let sample = match c.mode {
        EnumerationMode::Sample { count, seed } => Some((count, seed)),
        EnumerationMode::Exhaustive { .. } => None,
    };
    let arcs = match c.source {
        ArcSource::Generated if size == k => match sample {
            // every basis is equivalent to the standard one
            None => vec![Arc::certify(
                f,
                k,
                Basis::standard(f, k).vectors().to_vec(),
            )?],
            Some((count, seed)) => (0..count.min(cap))
                .map(|i| {
                    let mut rng = stream_rng(seed, i);
                    let m = random_invertible(f, k, &mut rng);
                    Arc::certify(f, k, (0..k).map(|j| m.column(j)).collect())
                })
                .collect::<Result<_>>()?,
        },
        ArcSource::Generated => {
            let stream = enumerate_arcs(f, k, size, c.mode)?;
            stream
                .take(cap)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| match e {
                    Error::Unsatisfiable { size } => Error::GenerationExhausted(format!(
                        "no arc of size {size} found by sampling"
                    )),
                    other => other,
                })?
        }
        ArcSource::NrcPrefix => vec![make_nrc(f, k)?.prefix(size)?],
        ArcSource::NrcSubarcs if size > f.q() as usize + 1 => {
            return Err(Error::Config(format!(
                "the curve has only {} points, {size} requested",
                f.q() + 1
            )));
        }
        ArcSource::NrcSubarcs => {
            let nrc = make_nrc(f, k)?;
            let (count, seed) =
                sample.ok_or_else(|| Error::Config("nrc-subarcs needs sample mode".into()))?;
            (0..count.min(cap))
                .map(|i| {
                    let mut rng = stream_rng(seed, i);
                    let mut idx: Vec<usize> = (0..nrc.len()).collect();
                    idx.shuffle(&mut rng);
                    nrc.random_equivalent(&mut rng).subarc(&idx[..size])
                })
                .collect::<Result<_>>()?
        }
        ArcSource::Glynn => {
            let g = make_glynn();
            if g.field().q() != f.q() || k != 5 {
                return Err(Error::Config("the Glynn arc lives in F_9^5".into()));
            }
            let g = g.prefix(size)?;
            match sample {
                None => vec![g],
                Some((count, seed)) => (0..count.min(cap))
                    .map(|i| g.random_equivalent(&mut stream_rng(seed, i)))
                    .collect(),
            }
        }
    };
    Ok(arcs)
}

fn stream_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs a campaign on a pool of `jobs` workers.
pub fn run_campaign(c: &Campaign, jobs: usize) -> Result<VerificationReport> {
    let registry = Registry::campaigns();
    let kind = registry.get(&c.kind)?;
    let start = Instant::now();
    let f = c.field()?;
    let size = kind.arc_size(c, &f)?;
    let range = kind.range(c, &f);
    let arcs = population(c, &f, size)?;
    let seed = c.seed().unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let mut results: Vec<(Vec<u32>, Arc, Outcome)> = pool.install(|| {
        arcs.into_par_iter()
            .enumerate()
            .map(|(i, arc)| {
                let mut rng = stream_rng(seed ^ 0x5eed, i);
                let out = kind.check(c, &arc, &mut rng)?;
                Ok((arc.encoding(), arc, out))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    results.sort_by(|a, b| a.0.cmp(&b.0));

    let mut log = Vec::new();
    if let (Some(max), EnumerationMode::Exhaustive { .. }) = (c.budget.max_arcs, c.mode) {
        if results.len() == max {
            log.push(format!("population truncated at {max} arcs"));
        }
    }
    let mut failures = Vec::new();
    let mut passes = 0;
    for (enc, arc, out) in &results {
        if let Some(line) = &out.log {
            log.push(format!("{enc:?}: {line}"));
        }
        if out.pass {
            passes += 1;
        } else {
            failures.push(Witness {
                encoding: enc.clone(),
                arc: arc.to_text(),
                detail: out.detail.clone(),
            });
        }
    }
    let body = ReportBody {
        campaign: c.clone(),
        toolkit_version: TOOLKIT_VERSION.to_string(),
        seed: c.seed(),
        exploratory: !range.in_range,
        range_note: range.note,
        arc_size: size,
        arcs_tested: results.len(),
        passes,
        failures,
        log,
    };
    Ok(VerificationReport {
        body,
        timing: Timing {
            elapsed_ms: start.elapsed().as_millis() as u64,
            jobs: jobs.max(1),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoalRow {
    pub n: u64,
    pub k_bound: u64,
    /// `(q + 4 − n) / 2`, the second cap on `k` in the conjectured range.
    pub size_cap: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoalTable {
    pub q: u64,
    pub p: u64,
    pub n_max: u64,
    pub rows: Vec<GoalRow>,
    /// `((p − 2)/(2p − 3)) q + 3 − (p − 1)/(2p − 3)` as an exact fraction.
    pub mds_bound: String,
    pub mds_bound_floor: i64,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn show(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// The range of `n` for which the conjecture would settle `k <= p + n(p−2)`,
/// with the per-`n` bound and the aggregate bound, in exact arithmetic.
pub fn run_goal_table(f: &Field) -> GoalTable {
    let (p, q) = (f.p() as i64, f.q() as i64);
    // |x| read as the absolute value, then rounded down
    let n_max = rat(q - 2 * p + 4, 2 * p - 3)
        .abs()
        .floor()
        .to_integer()
        .to_u64()
        .expect("small");
    let rows = (0..=n_max)
        .map(|n| GoalRow {
            n,
            k_bound: (p + n as i64 * (p - 2)) as u64,
            size_cap: show(&rat(q + 4 - n as i64, 2)),
        })
        .collect();
    let bound = rat(p - 2, 2 * p - 3) * BigRational::from_integer(BigInt::from(q)) + rat(3, 1)
        - rat(p - 1, 2 * p - 3);
    GoalTable {
        q: q as u64,
        p: p as u64,
        n_max,
        rows,
        mds_bound_floor: bound.floor().to_integer().to_i64().expect("small"),
        mds_bound: show(&bound),
    }
}

/// Parameters shared by the named checks; each check reads what it needs.
#[derive(Clone, Debug, Serialize)]
pub struct CheckParams {
    pub field: FieldSpec,
    pub k: usize,
    pub n: usize,
    pub count: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub passed: bool,
    pub instances: usize,
    pub detail: serde_json::Value,
}

pub trait VerifyCheck: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, params: &CheckParams) -> Result<CheckResult>;
}

fn result(
    name: &str,
    passed: bool,
    instances: usize,
    detail: serde_json::Value,
) -> Result<CheckResult> {
    Ok(CheckResult {
        check: name.to_string(),
        passed,
        instances,
        detail,
    })
}

fn params_field(p: &CheckParams) -> Result<Field> {
    Field::new(p.field.p as u64, p.field.e)
}

/// A random `size`-subset of a random linear image of the normal rational curve.
pub fn random_nrc_subarc(f: &Field, k: usize, size: usize, rng: &mut impl Rng) -> Result<Arc> {
    let nrc = make_nrc(f, k)?;
    let mut idx: Vec<usize> = (0..nrc.len()).collect();
    idx.shuffle(rng);
    nrc.random_equivalent(rng).subarc(&idx[..size])
}

struct SegreCheck;

impl VerifyCheck for SegreCheck {
    fn name(&self) -> &'static str {
        "segre"
    }

    fn summary(&self) -> &'static str {
        "lemma of tangents on random instances (the Glynn arc over F_9 when k = 5)"
    }

    fn run(&self, p: &CheckParams) -> Result<CheckResult> {
        let f = params_field(p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let mut bad = Vec::new();
        for i in 0..p.count {
            let arc = if f.q() == 9 && p.k == 5 && i % 2 == 0 {
                make_glynn()
            } else {
                let size = rng.gen_range(p.k.max(3)..=f.q() as usize + 1);
                random_nrc_subarc(&f, p.k, size, &mut rng)?
            };
            let cache = TangentCache::new(&arc);
            let (d, u, v, w) = random_segre_instance(&arc, &mut rng);
            let (l, r) = segre_sides(&cache, d, u, v, w)?;
            if l != r {
                bad.push(serde_json::json!({"arc": arc.encoding(), "d": d.to_vec(), "u": u, "v": v, "w": w}));
            }
        }
        result(
            self.name(),
            bad.is_empty(),
            p.count,
            serde_json::json!({ "failures": bad }),
        )
    }
}

struct InterpolationCheck;

impl VerifyCheck for InterpolationCheck {
    fn name(&self) -> &'static str {
        "interpolation"
    }

    fn summary(&self) -> &'static str {
        "interpolation identity for random binary forms of every degree up to q-1"
    }

    fn run(&self, p: &CheckParams) -> Result<CheckResult> {
        let f = params_field(p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let mut bad = 0;
        for _ in 0..p.count {
            let t = rng.gen_range(0..f.q() as usize);
            let pts = random_line_points(&f, t + 2, &mut rng);
            let form = BinaryForm {
                coeffs: (0..=t).map(|_| Fe(rng.gen_range(0..f.q()))).collect(),
            };
            if !check_interpolation(&f, &pts, &form)?.is_zero() {
                bad += 1;
            }
        }
        result(
            self.name(),
            bad == 0,
            p.count,
            serde_json::json!({ "nonzero_residuals": bad }),
        )
    }
}

struct SimilarCheck;

impl VerifyCheck for SimilarCheck {
    fn name(&self) -> &'static str {
        "similar"
    }

    fn summary(&self) -> &'static str {
        "D1 P D2 = M, 1 P = 0, L alpha = 0 on random (S, G, n)"
    }

    fn run(&self, p: &CheckParams) -> Result<CheckResult> {
        let f = params_field(p)?;
        let q = f.q() as usize;
        let k = p.k;
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        // |G| = q + 2k − 1 + n − |S| must not exceed |S|
        let lo = (q + 2 * k - 1 + p.n).div_ceil(2);
        if lo > q + 1 {
            return Err(Error::Config(format!(
                "no arc size fits n = {} at k = {k}, q = {q}",
                p.n
            )));
        }
        let mut bad = Vec::new();
        for _ in 0..p.count {
            let size = rng.gen_range(lo..=q + 1);
            let s = random_nrc_subarc(&f, k, size, &mut rng)?;
            let m = q + 2 * k - 1 + p.n - size;
            let rep = verify_similar(&s, m, p.n, &Basis::random(&f, k, &mut rng))?;
            if !rep.passed() {
                bad.push(serde_json::json!({"arc": s.encoding(), "report": rep}));
            }
        }
        result(
            self.name(),
            bad.is_empty(),
            p.count,
            serde_json::json!({ "failures": bad }),
        )
    }
}

struct ColperpCheck;

impl VerifyCheck for ColperpCheck {
    fn name(&self) -> &'static str {
        "colperp"
    }

    fn summary(&self) -> &'static str {
        "nullspace of I(k+p-2, k-1) equals the column space of I(k-1, k-2) on 2k-3 points"
    }

    fn run(&self, p: &CheckParams) -> Result<CheckResult> {
        let rep = check_colperp(p.k, &params_field(p)?)?;
        result(
            self.name(),
            rep.passed(),
            1,
            serde_json::to_value(&rep).expect("serializable"),
        )
    }
}

struct BaseCheck;

impl VerifyCheck for BaseCheck {
    fn name(&self) -> &'static str {
        "base"
    }

    fn summary(&self) -> &'static str {
        "v_{k-p}(X, Y, D) lies in the column space of I(k-1, k-2), and the descent step holds"
    }

    fn run(&self, p: &CheckParams) -> Result<CheckResult> {
        let f = params_field(p)?;
        let k = p.k;
        let i = k
            .checked_sub(f.p() as usize)
            .filter(|&i| i > 0)
            .ok_or(Error::PreconditionKLEP { k, p: f.p() })?;
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let mut bad = 0;
        for _ in 0..p.count {
            let mut idx: Vec<usize> = (0..2 * k - 3).collect();
            idx.shuffle(&mut rng);
            let delta = IndexSubset::of(&idx[2 * i..2 * i + k - 1 - i]);
            if check_base_lemma(k, &f, &idx[..i], &idx[i..2 * i], delta)? != (true, true) {
                bad += 1;
            }
        }
        let descent = lincombvr_instances(&f, k.max(4), p.count, p.seed)?;
        result(
            self.name(),
            bad == 0 && descent == 0,
            p.count,
            serde_json::json!({ "base_failures": bad, "descent_failures": descent }),
        )
    }
}

/// Random instances of the gadget-vector descent step; returns the failure count.
pub fn lincombvr_instances(f: &Field, k: usize, count: usize, seed: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..count {
        let g = random_nrc_subarc(f, k, 2 * k - 2, &mut rng)?;
        let b = Basis::random(f, k, &mut rng);
        let i = rng.gen_range(1..=(k - 2) / 2);
        let mut idx: Vec<usize> = (0..2 * k - 2).collect();
        idx.shuffle(&mut rng);
        let u = idx[0];
        let xp = &idx[1..i];
        let yp = &idx[i..2 * i - 1];
        let d0 = 2 * i - 1;
        let delta = IndexSubset::of(&idx[d0..d0 + k - i]);
        let w = IndexSubset::of(&idx[d0 + k - i..d0 + k + 1]);
        if !check_lincombvr(&g, &b, u, xp, yp, delta, idx[d0], w)? {
            bad += 1;
        }
    }
    Ok(bad)
}

struct CramerCheck;

impl VerifyCheck for CramerCheck {
    fn name(&self) -> &'static str {
        "cramer"
    }

    fn summary(&self) -> &'static str {
        "det(u, C) expands over the basis W with D inside C"
    }

    fn run(&self, p: &CheckParams) -> Result<CheckResult> {
        let f = params_field(p)?;
        let k = p.k;
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let mut bad = 0;
        for _ in 0..p.count {
            let size = (2 * k - 1).min(f.q() as usize + 1);
            let g = random_nrc_subarc(&f, k, size, &mut rng)?;
            let b = Basis::random(&f, k, &mut rng);
            let mut idx: Vec<usize> = (0..size).collect();
            idx.shuffle(&mut rng);
            let c = IndexSubset::of(&idx[..k - 1]);
            let dsize = rng.gen_range(0..k - 1);
            let delta = IndexSubset::of(&idx[..dsize]);
            let mut rest: Vec<usize> = (0..size).filter(|i| !delta.contains(*i)).collect();
            rest.shuffle(&mut rng);
            let w = IndexSubset::of(&rest[..k - dsize]);
            let u = rng.gen_range(0..size);
            if !check_cramerlike(&g, c, delta, w, u, &b)?.is_zero() {
                bad += 1;
            }
        }
        result(
            self.name(),
            bad == 0,
            p.count,
            serde_json::json!({ "nonzero_residuals": bad }),
        )
    }
}

struct BetaCheck;

impl VerifyCheck for BetaCheck {
    fn name(&self) -> &'static str {
        "beta"
    }

    fn summary(&self) -> &'static str {
        "explicit preimage of the weight-k target under I(k-1, k-2) on 2k-2 points, and the NRC witness"
    }

    fn run(&self, p: &CheckParams) -> Result<CheckResult> {
        let f = params_field(p)?;
        let beta = classification_beta(p.k, &f)?;
        let mut detail = serde_json::json!({ "v": beta.v.iter().map(|x| x.0).collect::<Vec<_>>() });
        let mut passed = true;
        if p.k >= 3 && 2 * p.k + p.n <= f.q() as usize {
            let s = make_nrc(&f, p.k)?;
            let rep = classification_witness(&s, &(0..p.k).collect::<Vec<_>>(), p.n)?;
            passed &= rep.passed();
            detail["witness"] = serde_json::to_value(&rep).expect("serializable");
        }
        result(self.name(), passed, 1, detail)
    }
}

struct RothLempelCheck;

impl VerifyCheck for RothLempelCheck {
    fn name(&self) -> &'static str {
        "rothlempel"
    }

    fn summary(&self) -> &'static str {
        "rank of the inverse-coordinate matrix over every basis inside the curve (and the Glynn arc over F_9)"
    }

    fn run(&self, p: &CheckParams) -> Result<CheckResult> {
        let f = params_field(p)?;
        let s = make_nrc(&f, p.k)?;
        let mut ranks = std::collections::BTreeMap::new();
        for b in subsets_colex(s.all(), p.k) {
            *ranks.entry(roth_lempel(&s, b)?.1).or_insert(0usize) += 1;
        }
        let mut passed = ranks.keys().all(|&r| r == 2);
        let mut detail = serde_json::json!({ "nrc_ranks": ranks });
        if f.q() == 9 && p.k == 5 {
            let g = make_glynn();
            let min = subsets_colex(g.all(), 5)
                .map(|b| roth_lempel(&g, b).map(|x| x.1))
                .collect::<Result<Vec<_>>>()?;
            let lowest = min.iter().copied().min().unwrap_or(0);
            passed &= lowest >= 3;
            detail["glynn_min_rank"] = serde_json::json!(lowest);
        }
        result(self.name(), passed, ranks.values().sum(), detail)
    }
}

impl Registry<dyn VerifyCheck> {
    pub fn checks() -> Self {
        Registry {
            entries: vec![
                Box::new(SegreCheck),
                Box::new(InterpolationCheck),
                Box::new(SimilarCheck),
                Box::new(ColperpCheck),
                Box::new(BaseCheck),
                Box::new(CramerCheck),
                Box::new(BetaCheck),
                Box::new(RothLempelCheck),
            ],
        }
    }

    pub fn get(&self, name: &str) -> Result<&dyn VerifyCheck> {
        self.iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown check {name}")))
    }
}

/// The brute-force side of the rank-formula comparison.
pub fn inclusion_rank(f: &Field, r: usize, a: usize, b: usize) -> Result<usize> {
    Ok(build_inclusion(f, r, a, b)?.rank())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankMismatch {
    pub r: usize,
    pub a: usize,
    pub b: usize,
    pub elimination: usize,
    pub formula: u64,
}

/// Compares the rank formula with elimination on every admissible `(r, a, b)` with `r <= r_max`.
pub fn fw_agreement(f: &Field, r_max: usize) -> Result<Vec<RankMismatch>> {
    let mut mismatches = Vec::new();
    for r in 0..=r_max {
        for b in 0..=r / 2 {
            for a in b..=r - b {
                let brute = inclusion_rank(f, r, a, b)?;
                let formula = crate::combi::to_u64(&fw_rank(r, a, b, f.p())?);
                if brute as u64 != formula {
                    mismatches.push(RankMismatch {
                        r,
                        a,
                        b,
                        elimination: brute,
                        formula,
                    });
                }
            }
        }
    }
    Ok(mismatches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arcs::DEFAULT_EXHAUSTIVE_BUDGET;

    fn field(q: u32) -> Field {
        Field::of_order(q).unwrap()
    }

    fn exhaustive() -> EnumerationMode {
        EnumerationMode::Exhaustive {
            budget: DEFAULT_EXHAUSTIVE_BUDGET,
        }
    }

    fn sample(count: usize, seed: u64) -> EnumerationMode {
        EnumerationMode::Sample { count, seed }
    }

    #[test]
    fn registries_are_complete() {
        let names: Vec<&str> = Registry::campaigns().iter().map(|k| k.name()).collect();
        for n in [
            "perrank",
            "classify",
            "nzero",
            "none_thm",
            "segre",
            "interpolation",
            "similar",
            "extension_crosscheck",
            "weight_one",
        ] {
            assert!(names.contains(&n), "{n}");
        }
        let checks: Vec<&str> = Registry::checks().iter().map(|k| k.name()).collect();
        assert_eq!(
            checks,
            [
                "segre",
                "interpolation",
                "similar",
                "colperp",
                "base",
                "cramer",
                "beta",
                "rothlempel"
            ]
        );
        assert!(Registry::campaigns().get("nope").is_err());
    }

    #[test]
    fn perrank_small_pass_and_known_failure() {
        let f = field(7);
        let rep = run_campaign(&Campaign::new("perrank", &f, 3, 0, exhaustive()), 1).unwrap();
        assert!(rep.all_passed());
        assert!(!rep.body.exploratory);

        let f9 = field(9);
        let c = Campaign::new("perrank", &f9, 5, 1, exhaustive()).with_source(ArcSource::NrcPrefix);
        let rep = run_campaign(&c, 1).unwrap();
        assert_eq!(rep.body.failures.len(), 1);
        assert!(rep.body.exploratory);
        assert!(rep.body.failures[0].detail.starts_with("rank 69 of 70"));
        let back = rep.body.failures[0].reload().unwrap();
        assert_eq!(
            back.encoding(),
            make_nrc(&f9, 5).unwrap().prefix(8).unwrap().encoding()
        );
    }

    #[test]
    fn none_thm_exhaustive_f9_k4() {
        let f = field(9);
        let mut c = Campaign::new("none_thm", &f, 4, 1, exhaustive());
        c.budget.max_arcs = Some(200);
        let rep = run_campaign(&c, 1).unwrap();
        assert!(rep.all_passed() && rep.body.arcs_tested > 0);
        assert!(!rep.body.exploratory);
    }

    #[test]
    fn nzero_both_directions() {
        for (q, k) in [(7, 4), (9, 4), (8, 3), (9, 5), (4, 3)] {
            let f = field(q);
            let c =
                Campaign::new("nzero", &f, k, 0, sample(3, 1)).with_source(ArcSource::NrcSubarcs);
            let rep = run_campaign(&c, 1).unwrap();
            assert!(rep.all_passed(), "q={q} k={k}: {:?}", rep.body.failures);
        }
    }

    #[test]
    fn classify_within_and_beyond_p() {
        let f = field(7);
        let rep = run_campaign(&Campaign::new("classify", &f, 3, 0, sample(20, 3)), 1).unwrap();
        assert!(rep.all_passed());
        // k = p + 1: the target leaves the column space
        let f3 = field(3);
        let c = Campaign::new("classify", &f3, 2, 0, exhaustive());
        assert!(run_campaign(&c, 1).unwrap().all_passed());
        let f9 = field(9);
        let c =
            Campaign::new("classify", &f9, 4, 0, sample(2, 1)).with_source(ArcSource::NrcSubarcs);
        let rep = run_campaign(&c, 1).unwrap();
        assert_eq!(rep.body.failures.len(), 2);
        assert!(rep.body.exploratory);
    }

    #[test]
    fn identity_campaigns() {
        let f = field(9);
        let c = Campaign::new("segre", &f, 5, 0, sample(2, 4))
            .with_size(10)
            .with_source(ArcSource::Glynn)
            .with_instances(20);
        assert!(run_campaign(&c, 1).unwrap().all_passed());
        let c = Campaign::new("interpolation", &f, 4, 0, sample(10, 4))
            .with_size(8)
            .with_instances(5);
        assert!(run_campaign(&c, 1).unwrap().all_passed());
        let c = Campaign::new("similar", &f, 4, 1, sample(5, 4)).with_size(9);
        assert!(run_campaign(&c, 1).unwrap().all_passed());
    }

    #[test]
    fn extension_search_small() {
        let f = field(5);
        // the conic over F_5 has 6 points and no 7-point extension
        let conic = make_nrc(&f, 3).unwrap();
        assert_eq!(
            search_extension(&conic, 7, 1_000_000).unwrap(),
            ExtensionSearch::NoExtension { nodes: 0 }
        );
        let four = conic.prefix(4).unwrap();
        match search_extension(&four, 6, 1_000_000).unwrap() {
            ExtensionSearch::Extends(a) => assert!(a.check().unwrap().is_arc && a.len() == 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            search_extension(&four, 6, 1),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn extension_crosscheck_campaigns() {
        for (q, kind) in [
            (5, "extension_crosscheck"),
            (7, "extension_crosscheck"),
            (7, "weight_one"),
        ] {
            let f = field(q);
            let c = Campaign::new(kind, &f, 3, 0, sample(5, 9)).with_size(4);
            let rep = run_campaign(&c, 1).unwrap();
            assert!(rep.all_passed(), "{q} {kind}");
        }
    }

    #[test]
    fn reports_are_reproducible_and_parallel_safe() {
        let f = field(9);
        let c = Campaign::new("perrank", &f, 4, 2, sample(12, 7));
        let a = run_campaign(&c, 1).unwrap();
        let b = run_campaign(&c, 2).unwrap();
        assert_eq!(a.body_json(), b.body_json());
        let back: VerificationReport = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back.body, a.body);
        assert_eq!(a.body.passes + a.body.failures.len(), a.body.arcs_tested);
        assert_eq!(
            a.csv_row().split(',').count(),
            VerificationReport::csv_header().split(',').count()
        );
    }

    #[test]
    fn goal_table_arithmetic() {
        let t = run_goal_table(&field(9));
        // (9 − 6 + 4)/3 = 7/3
        assert_eq!(t.n_max, 2);
        assert_eq!(
            t.rows.iter().map(|r| r.k_bound).collect::<Vec<_>>(),
            vec![3, 4, 5]
        );
        // (1/3)·9 + 3 − 2/3 = 16/3
        assert_eq!(t.mds_bound, "16/3");
        assert_eq!(t.mds_bound_floor, 5);
        let t = run_goal_table(&field(7));
        assert_eq!(t.n_max, 0);
        assert_eq!(t.rows[0].k_bound, 7);
        for q in [8u32, 11, 25, 27, 49] {
            let f = field(q);
            let t = run_goal_table(&f);
            let (p, qq) = (f.p() as i64, q as i64);
            let exact = rat(qq * (p - 2) + 3 * (2 * p - 3) - (p - 1), 2 * p - 3);
            assert_eq!(t.mds_bound, show(&exact));
        }
    }

    #[test]
    fn checks_pass() {
        let reg = Registry::checks();
        let f9 = field(9).spec();
        let f7 = field(7).spec();
        let run = |name: &str, field: &FieldSpec, k: usize, count: usize| {
            reg.get(name)
                .unwrap()
                .run(&CheckParams {
                    field: field.clone(),
                    k,
                    n: 0,
                    count,
                    seed: 1,
                })
                .unwrap()
        };
        assert!(run("segre", &f9, 5, 20).passed);
        assert!(run("interpolation", &f7, 3, 50).passed);
        assert!(run("similar", &f7, 3, 5).passed);
        assert!(run("colperp", &f9, 4, 1).passed);
        assert!(run("base", &f9, 5, 5).passed);
        assert!(run("cramer", &f7, 4, 30).passed);
        assert!(run("beta", &f7, 3, 1).passed);
        assert!(run("rothlempel", &f7, 3, 1).passed);
    }

    #[test]
    fn fw_agreement_small() {
        assert!(fw_agreement(&field(4), 7).unwrap().is_empty());
    }
}
