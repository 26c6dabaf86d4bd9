//! Families of lifted expressions and their composition into inequalities
//! detecting genuine multipartite nonlocality or nonlocality depth.
//!
//! Given members `I^g` that share their positive part `I₊` and whose
//! negative parts share the common term `T`, the family sum obeys
//! `Σ_g I^g ≤ γ·(I₊ − T)` on every model whose parties split into blocks such
//! that at most `γ` members sit inside a single block.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::error::{Error, Result};
use crate::expression::BellExpression;
use crate::scenario::{Event, Scenario};
use crate::seeds::{cglmp_seeds, chsh_seed, tri_seed};

/// Largest party count accepted by [`gamma_exact`].
pub const GAMMA_PARTY_CAP: usize = 12;

/// Partition of the parties `0..n` into disjoint nonempty blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::OutOfRange("empty block in partition".into()));
            }
            b.sort_unstable();
            for &p in b.iter() {
                if p >= n || std::mem::replace(&mut seen[p], true) {
                    return Err(Error::OutOfRange(format!("blocks {blocks:?} are not disjoint in 0..{n}")));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::OutOfRange(format!("blocks do not cover 0..{n}")));
        }
        Ok(Partition { blocks })
    }

    /// Size of the largest block.
    pub fn k(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn masks(&self) -> Vec<u32> {
        self.blocks
            .iter()
            .map(|b| b.iter().fold(0u32, |m, &p| m | (1 << p)))
            .collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|p| (p + 1).to_string()).collect::<Vec<_>>().join(""))
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

/// Calls `visit` with the block label of every party for each set partition
/// of `0..n` whose blocks have at most `max_block` elements. Labels follow
/// the restricted-growth convention, so every partition is visited once.
pub fn for_each_partition<F: FnMut(&[usize], usize)>(n: usize, max_block: usize, mut visit: F) {
    fn rec<F: FnMut(&[usize], usize)>(
        pos: usize,
        labels: &mut Vec<usize>,
        sizes: &mut Vec<usize>,
        max_block: usize,
        visit: &mut F,
    ) {
        let n = labels.len();
        if pos == n {
            visit(labels, sizes.len());
            return;
        }
        for b in 0..sizes.len() {
            if sizes[b] < max_block {
                labels[pos] = b;
                sizes[b] += 1;
                rec(pos + 1, labels, sizes, max_block, visit);
                sizes[b] -= 1;
            }
        }
        labels[pos] = sizes.len();
        sizes.push(1);
        rec(pos + 1, labels, sizes, max_block, visit);
        sizes.pop();
    }
    if n == 0 || max_block == 0 {
        return;
    }
    let mut labels = vec![0; n];
    let mut sizes = Vec::new();
    rec(0, &mut labels, &mut sizes, max_block, &mut visit);
}

/// All partitions of `0..n` with blocks of size at most `k`.
pub fn partitions(n: usize, k: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    for_each_partition(n, k, |labels, count| {
        let mut blocks = vec![Vec::new(); count];
        for (p, &l) in labels.iter().enumerate() {
            blocks[l].push(p);
        }
        out.push(Partition { blocks });
    });
    out
}

/// All bipartitions `S|S̄` with both sides nonempty, each listed once
/// (party 0 always in `S`).
pub fn bipartitions(n: usize) -> Vec<Partition> {
    (1..(1u32 << (n - 1)))
        .map(|mask| {
            // bit i of `mask` puts party i+1 on the far side.
            let far: Vec<usize> = (1..n).filter(|&p| mask & (1 << (p - 1)) != 0).collect();
            let near: Vec<usize> = (0..n).filter(|p| !far.contains(p)).collect();
            Partition {
                blocks: vec![near, far],
            }
        })
        .collect()
}

/// Lifted expressions `I^g` together with their party subsets `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionFamily {
    pub scenario: Scenario,
    pub label: String,
    members: Vec<(Vec<usize>, BellExpression)>,
}

impl ExpressionFamily {
    pub fn new(label: impl Into<String>, members: Vec<(Vec<usize>, BellExpression)>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::Composition("expression family is empty".into()))?;
        let scenario = first.1.scenario;
        for (g, e) in &members {
            scenario.ensure_same(&e.scenario)?;
            if g.is_empty() || g.iter().any(|&p| p >= scenario.n) {
                return Err(Error::Composition(format!(
                    "member subset {g:?} is not a nonempty subset of 0..{}",
                    scenario.n
                )));
            }
        }
        Ok(ExpressionFamily {
            scenario,
            label: label.into(),
            members,
        })
    }

    pub fn members(&self) -> &[(Vec<usize>, BellExpression)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn sum(&self) -> BellExpression {
        let mut acc = BellExpression::zero(self.scenario, format!("Σ {}", self.label));
        for (_, e) in &self.members {
            acc = acc.plus(e).expect("members share the family scenario");
        }
        acc
    }

    /// The shared positive part, or an error naming the first member whose
    /// positive part differs.
    pub fn shared_positive_part(&self) -> Result<BellExpression> {
        let (g0, e0) = &self.members[0];
        let plus = e0.pos_neg_decompose().0;
        for (g, e) in &self.members[1..] {
            let other = e.pos_neg_decompose().0;
            if other.term_map() != plus.term_map() {
                return Err(Error::Composition(format!(
                    "positive parts of members {g0:?} and {g:?} differ: [{plus}] vs [{other}]"
                )));
            }
        }
        Ok(plus.with_label("I₊"))
    }

    fn member_masks(&self) -> Vec<u32> {
        self.members
            .iter()
            .map(|(g, _)| g.iter().fold(0u32, |m, &p| m | (1 << p)))
            .collect()
    }

    /// Number of members lying entirely inside one block of `partition`.
    pub fn members_inside(&self, partition: &Partition) -> usize {
        let blocks = partition.masks();
        self.member_masks()
            .iter()
            .filter(|&&g| blocks.iter().any(|&b| g & !b == 0))
            .count()
    }
}

/// Largest common term of the members' negative parts: the entrywise
/// minimum of their coefficient maps (empty when the supports are disjoint).
pub fn common_negative_term(fam: &ExpressionFamily) -> Result<BellExpression> {
    if fam.is_empty() {
        return Err(Error::Composition("expression family is empty".into()));
    }
    let negatives: Vec<BellExpression> = fam
        .members
        .iter()
        .map(|(_, e)| e.pos_neg_decompose().1)
        .collect();
    BellExpression::entrywise_min(fam.scenario, "T", negatives.iter())
}

/// Which block structures the bound has to hold for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Every bipartition: violation certifies genuine multipartite nonlocality.
    Gmnl,
    /// Every partition with blocks of size at most `k`: violation certifies
    /// nonlocality depth at least `k + 1`.
    Depth(usize),
}

/// Exact `γ`: the maximum over admissible partitions of the number of
/// members contained in one block. `k = n − 1` is evaluated over
/// bipartitions, which give the same maximum since merging blocks never
/// lowers the count.
pub fn gamma_exact(fam: &ExpressionFamily, k: usize) -> Result<usize> {
    let n = fam.scenario.n;
    if n > GAMMA_PARTY_CAP {
        return Err(Error::CapExceeded(format!(
            "γ enumeration is limited to n ≤ {GAMMA_PARTY_CAP}, got n = {n}"
        )));
    }
    if k == 0 || k > n {
        return Err(Error::OutOfRange(format!("block size k = {k} must be in 1..={n}")));
    }
    let members = fam.member_masks();
    if k + 1 == n && n >= 2 {
        let all = (1u32 << n) - 1;
        let best = (1..(1u32 << (n - 1)))
            .map(|m| {
                let s = m << 1;
                let t = all & !s;
                members.iter().filter(|&&g| g & !s == 0 || g & !t == 0).count()
            })
            .max()
            .unwrap_or(0);
        return Ok(best);
    }
    let mut best = 0;
    for_each_partition(n, k, |labels, count| {
        let mut blocks = vec![0u32; count];
        for (p, &l) in labels.iter().enumerate() {
            blocks[l] |= 1 << p;
        }
        let inside = members
            .iter()
            .filter(|&&g| blocks.iter().any(|&b| g & !b == 0))
            .count();
        best = best.max(inside);
    });
    Ok(best)
}

/// Whether `T` is extracted or the plain bound `γ·I₊` is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommonTerm {
    Extract,
    Omit,
}

/// `Σ_g I^g ≤ γ·(I₊ − T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposedInequality {
    pub label: String,
    pub kind: BoundKind,
    pub gamma: usize,
    pub lhs: BellExpression,
    pub rhs: BellExpression,
    pub positive_part: BellExpression,
    pub common_term: BellExpression,
}

impl ComposedInequality {
    pub fn scenario(&self) -> Scenario {
        self.lhs.scenario
    }

    /// `lhs − rhs` as one expression; the inequality reads `expr ≤ 0`.
    pub fn as_expression(&self) -> BellExpression {
        self.lhs
            .minus(&self.rhs)
            .expect("lhs and rhs share a scenario")
            .with_label(self.label.clone())
    }

    /// `eval(lhs) − eval(rhs)`; positive means violated.
    pub fn margin(&self, b: &Behavior) -> Result<f64> {
        Ok(self.lhs.evaluate(b)? - self.rhs.evaluate(b)?)
    }

    pub fn violated_by(&self, b: &Behavior) -> Result<bool> {
        Ok(self.margin(b)? > 0.0)
    }
}

impl fmt::Display for ComposedInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ≤ {}", self.label, self.lhs, self.rhs)
    }
}

fn compose(
    fam: &ExpressionFamily,
    kind: BoundKind,
    common: CommonTerm,
    label: String,
) -> Result<ComposedInequality> {
    let n = fam.scenario.n;
    let positive_part = fam.shared_positive_part()?;
    let common_term = match common {
        CommonTerm::Extract => common_negative_term(fam)?,
        CommonTerm::Omit => BellExpression::zero(fam.scenario, "T"),
    };
    let gamma = match kind {
        BoundKind::Gmnl => {
            if n < 2 {
                return Err(Error::Composition("GMNL needs at least two parties".into()));
            }
            gamma_exact(fam, n - 1)?
        }
        BoundKind::Depth(k) => gamma_exact(fam, k)?,
    };
    let rhs = positive_part
        .minus(&common_term)?
        .scaled(gamma as f64)
        .with_label(format!("{gamma}·(I₊ − T)"));
    Ok(ComposedInequality {
        label,
        kind,
        gamma,
        lhs: fam.sum(),
        rhs,
        positive_part,
        common_term,
    })
}

/// Composition certifying genuine multipartite nonlocality.
pub fn compose_gmnl(fam: &ExpressionFamily) -> Result<ComposedInequality> {
    compose(fam, BoundKind::Gmnl, CommonTerm::Extract, format!("{} [GMNL]", fam.label))
}

/// Like [`compose_gmnl`] but with `T = 0`, reproducing the bound `γ·I₊`.
pub fn compose_gmnl_plain(fam: &ExpressionFamily) -> Result<ComposedInequality> {
    compose(fam, BoundKind::Gmnl, CommonTerm::Omit, format!("{} [GMNL, T=0]", fam.label))
}

/// Composition certifying nonlocality depth `k + 1`.
pub fn compose_depth(fam: &ExpressionFamily, k: usize) -> Result<ComposedInequality> {
    let n = fam.scenario.n;
    if k == 0 || k > n {
        return Err(Error::OutOfRange(format!("depth parameter k = {k} must be in 1..={n}")));
    }
    compose(fam, BoundKind::Depth(k), CommonTerm::Extract, format!("{} [depth k={k}]", fam.label))
}

pub fn compose_depth_plain(fam: &ExpressionFamily, k: usize) -> Result<ComposedInequality> {
    let n = fam.scenario.n;
    if k == 0 || k > n {
        return Err(Error::OutOfRange(format!("depth parameter k = {k} must be in 1..={n}")));
    }
    compose(fam, BoundKind::Depth(k), CommonTerm::Omit, format!("{} [depth k={k}, T=0]", fam.label))
}

fn lifted_chsh(n: usize, i: usize, j: usize) -> Result<BellExpression> {
    chsh_seed()
        .lift(n, &[i, j], &vec![(0, 0); n - 2])
        .map(|e| e.with_label(format!("I^{{{},{}}}", i + 1, j + 1)))
}

fn check_parties(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::OutOfRange(format!("this family needs n ≥ {min}, got {n}")));
    }
    Ok(())
}

/// `{I^{1,j}_{𝟎|𝟎}}_{j=2..n}`: CHSH between party 1 and each other party.
pub fn star_chsh_family(n: usize) -> Result<ExpressionFamily> {
    check_parties(n, 3)?;
    let members = (1..n)
        .map(|j| Ok((vec![0, j], lifted_chsh(n, 0, j)?)))
        .collect::<Result<Vec<_>>>()?;
    ExpressionFamily::new(format!("star CHSH n={n}"), members)
}

/// `{I^{i,j}_{𝟎|𝟎}}_{i<j}`: CHSH between every pair.
pub fn symmetric_chsh_family(n: usize) -> Result<ExpressionFamily> {
    check_parties(n, 3)?;
    let mut members = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            members.push((vec![i, j], lifted_chsh(n, i, j)?));
        }
    }
    ExpressionFamily::new(format!("symmetric CHSH n={n}"), members)
}

/// `{I_tri^{1,2,i}}_{i=3..n}`.
pub fn tri_family(n: usize) -> Result<ExpressionFamily> {
    check_parties(n, 3)?;
    let members = (2..n)
        .map(|i| {
            let e = tri_seed()
                .lift(n, &[0, 1, i], &vec![(0, 0); n - 3])?
                .with_label(format!("I_tri^{{1,2,{}}}", i + 1));
            Ok((vec![0, 1, i], e))
        })
        .collect::<Result<Vec<_>>>()?;
    ExpressionFamily::new(format!("tri n={n}"), members)
}

/// `Σ_{j} I^{1,j} ≤ (n−2)·[p(𝟎|𝟎) − p(1𝟎|1𝟎)]`.
pub fn improved00(n: usize) -> Result<ComposedInequality> {
    let mut c = compose_gmnl(&star_chsh_family(n)?)?;
    c.label = format!("improved00 n={n}");
    Ok(c)
}

/// `Σ_{j} I^{1,j} ≤ (n−2)·p(𝟎|𝟎)`.
pub fn ineq_i1(n: usize) -> Result<ComposedInequality> {
    let mut c = compose_gmnl_plain(&star_chsh_family(n)?)?;
    c.label = format!("I1 n={n}");
    Ok(c)
}

/// `Σ_{i<j} I^{i,j} ≤ C(n−1,2)·p(𝟎|𝟎)`.
pub fn ineq_isym(n: usize) -> Result<ComposedInequality> {
    let mut c = compose_gmnl(&symmetric_chsh_family(n)?)?;
    c.label = format!("Isym n={n}");
    Ok(c)
}

/// Improved tripartite-seed inequality `Σ_i I_tri^{1,2,i} ≤ (n−3)(I₊ − T)`.
pub fn tri_improved(n: usize) -> Result<ComposedInequality> {
    let mut c = compose_gmnl(&tri_family(n)?)?;
    c.label = format!("tri-improved n={n}");
    Ok(c)
}

/// Star-family depth inequality `Σ_j I^{1,j} ≤ (k−1)·[p(𝟎|𝟎) − p(1𝟎|1𝟎)]`.
pub fn star_depth(n: usize, k: usize) -> Result<ComposedInequality> {
    let mut c = compose_depth(&star_chsh_family(n)?, k)?;
    c.label = format!("star-depth n={n} k={k}");
    Ok(c)
}

/// Symmetric-family depth inequality with the enumerated `γ_k`.
pub fn symmetric_depth(n: usize, k: usize) -> Result<ComposedInequality> {
    let mut c = compose_depth(&symmetric_chsh_family(n)?, k)?;
    c.label = format!("sym-depth n={n} k={k}");
    Ok(c)
}

fn binomial2(x: usize) -> usize {
    x * x.saturating_sub(1) / 2
}

/// Enumerated `γ_k` of the symmetric CHSH family next to the closed form
/// `⌊n/k⌋·C(k,2) + (n mod k)·C(n mod k, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetricDepthReport {
    pub n: usize,
    pub k: usize,
    pub enumerated: usize,
    pub closed_form: usize,
}

impl SymmetricDepthReport {
    pub fn agrees(&self) -> bool {
        self.enumerated == self.closed_form
    }
}

pub fn symmetric_depth_report(n: usize, k: usize) -> Result<SymmetricDepthReport> {
    let fam = symmetric_chsh_family(n)?;
    let enumerated = gamma_exact(&fam, k)?;
    let rem = n % k;
    let closed_form = (n / k) * binomial2(k) + rem * binomial2(rem);
    Ok(SymmetricDepthReport {
        n,
        k,
        enumerated,
        closed_form,
    })
}

/// Qutrit members `I^{ij} = J₃^{ij}(1|0) + J̃₃^{ij}(0|0)` for the pairs
/// AB, AC, BC of three parties.
pub fn qutrit_members() -> Result<Vec<(Vec<usize>, BellExpression)>> {
    let (j3, j3t) = cglmp_seeds();
    [[0, 1], [0, 2], [1, 2]]
        .iter()
        .map(|pair| {
            let a = j3.lift(3, pair, &[(1, 0)])?;
            let b = j3t.lift(3, pair, &[(0, 0)])?;
            let name = ["A", "B", "C"];
            let e = a
                .plus(&b)?
                .with_label(format!("I^{}{}", name[pair[0]], name[pair[1]]));
            Ok((pair.to_vec(), e))
        })
        .collect()
}

/// Six events `p(a|x₀)` with `a ∈ {001,010,011,100,101,110}`.
pub fn qutrit_six(inputs: &str) -> Vec<Event> {
    ["001", "010", "011", "100", "101", "110"]
        .iter()
        .map(|a| Event::parse(&format!("{a}|{inputs}")).expect("literal"))
        .collect()
}

/// `(I^AB + I^AC + I^BC ≤ I₊, I^AB + I^AC ≤ I₊ − T)` on `(3,2,3)`.
pub fn compose_qutrit_tripartite() -> Result<(ComposedInequality, ComposedInequality)> {
    let members = qutrit_members()?;
    let sym_fam = ExpressionFamily::new("qutrit sym", members.clone())?;
    let star_fam = ExpressionFamily::new("qutrit star", members[..2].to_vec())?;
    let expected: Vec<Event> = qutrit_six("000");
    let plus = sym_fam.shared_positive_part()?;
    let got: Vec<Event> = plus.term_map().keys().cloned().collect();
    if got != expected || plus.terms().any(|(_, c)| c != 1.0) {
        return Err(Error::Composition(format!("unexpected qutrit positive part [{plus}]")));
    }
    let mut sym = compose_gmnl(&sym_fam)?;
    sym.label = "qutrit-sym".into();
    let mut star = compose_gmnl(&star_fam)?;
    star.label = "qutrit-star".into();
    Ok((sym, star))
}
