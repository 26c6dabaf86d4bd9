//! Classical bounds by exhaustive search over extremal models.
//!
//! A model that is local across a partition of the parties is a mixture of
//! products of non-signaling behaviors, one per block. Bell expressions are
//! linear, so their maximum over such mixtures is reached on products of
//! block vertices. Singleton blocks contribute deterministic strategies and
//! two-party blocks the vertices from [`ns_vertices_2x2xd`]. For a block of
//! three or more parties the maximum over its non-signaling polytope is
//! computed directly by an exact linear program.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::lp::{self, Q};
use super::vertices::ns_vertices_2x2xd;
use crate::behavior::Behavior;
use crate::compose::{bipartitions, partitions, ExpressionFamily, Partition};
use crate::error::{Error, Result};
use crate::expression::BellExpression;
use crate::scenario::{digits_to_index, index_to_digits, Scenario};

/// Largest number of deterministic strategies [`local_bound`] enumerates.
pub const LOCAL_STRATEGY_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound {
    #[serde(serialize_with = "ser_rational")]
    pub exact: Q,
    pub value: f64,
    /// Block structure where the maximum is attained (hybrid bounds only).
    pub partition: Option<Partition>,
    /// Maximizing strategy `strategy[k][x_k]` (local bound only).
    pub strategy: Option<Vec<Vec<usize>>>,
}

fn ser_rational<S: serde::Serializer>(q: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

pub fn to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn exact(c: f64) -> Result<Q> {
    BigRational::from_float(c)
        .ok_or_else(|| Error::InvalidExpression(format!("coefficient {c} is not finite")))
}

/// Coefficients rescaled to integers `c_i = num_i / den`.
fn integer_coefficients(e: &BellExpression) -> Result<(Vec<i128>, BigInt)> {
    let qs = e
        .terms()
        .map(|(_, c)| exact(c))
        .collect::<Result<Vec<_>>>()?;
    let den = qs
        .iter()
        .fold(BigInt::one(), |l, q| num_integer::Integer::lcm(&l, q.denom()));
    let nums = qs
        .iter()
        .map(|q| {
            let scaled = (q * BigRational::from_integer(den.clone())).to_integer();
            i128::try_from(scaled).map_err(|_| {
                Error::Unsupported("coefficients span too many binary orders of magnitude".into())
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((nums, den))
}

/// Maximum of `e` over deterministic local strategies.
///
/// The last party's response is optimized input by input, so only the
/// strategies of the first `n−1` parties are enumerated.
pub fn local_bound(e: &BellExpression) -> Result<Bound> {
    let s = e.scenario;
    let total = (s.d as f64).powi((s.m * s.n) as i32);
    if total > LOCAL_STRATEGY_CAP as f64 {
        return Err(Error::CapExceeded(format!(
            "{s} has {total:.3e} deterministic strategies, cap is {LOCAL_STRATEGY_CAP}"
        )));
    }
    let (nums, den) = integer_coefficients(e)?;
    let last = s.n - 1;
    // grouped[x_last][a_last] = [(outcomes, inputs of the other parties, c)]
    let mut grouped: Vec<Vec<Vec<(Vec<usize>, Vec<usize>, i128)>>> = vec![vec![Vec::new(); s.d]; s.m];
    for ((ev, _), c) in e.terms().zip(&nums) {
        grouped[ev.inputs[last]][ev.outcomes[last]].push((
            ev.outcomes[..last].to_vec(),
            ev.inputs[..last].to_vec(),
            *c,
        ));
    }
    let per_party = s.d.pow(s.m as u32);
    let heads = per_party.pow(last as u32);
    let decode = |idx: usize| -> Vec<Vec<usize>> {
        index_to_digits(idx, per_party, last)
            .into_iter()
            .map(|code| index_to_digits(code, s.d, s.m))
            .collect()
    };
    let best_response = |strategy: &[Vec<usize>]| -> (i128, Vec<usize>) {
        let mut value = 0i128;
        let mut response = Vec::with_capacity(s.m);
        for by_outcome in &grouped {
            let (best_a, best_v) = by_outcome
                .iter()
                .map(|terms| {
                    terms
                        .iter()
                        .filter(|(a, x, _)| (0..last).all(|k| strategy[k][x[k]] == a[k]))
                        .map(|t| t.2)
                        .sum::<i128>()
                })
                .enumerate()
                .fold((0, i128::MIN), |acc, (a, v)| if v > acc.1 { (a, v) } else { acc });
            value += best_v;
            response.push(best_a);
        }
        (value, response)
    };
    let (value, head) = (0..heads)
        .into_par_iter()
        .map(|idx| (best_response(&decode(idx)).0, idx))
        .reduce(
            || (i128::MIN, usize::MAX),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    let mut strategy = decode(head);
    strategy.push(best_response(&strategy).1);
    let exact = BigRational::new(BigInt::from(value), den);
    Ok(Bound {
        value: to_f64(&exact),
        exact,
        partition: None,
        strategy: Some(strategy),
    })
}

/// Extremal points of a block's model set, or the block's polytope when
/// its vertices are not listed.
enum BlockModel {
    Vertices(Vec<Vec<Q>>),
    Polytope,
}

fn block_scenario(parent: Scenario, size: usize) -> Scenario {
    Scenario { n: size, ..parent }
}

fn block_model(s: Scenario) -> Result<BlockModel> {
    match s.n {
        1 => {
            let verts = (0..s.d.pow(s.m as u32))
                .map(|code| {
                    let strat = index_to_digits(code, s.d, s.m);
                    (0..s.len())
                        .map(|i| {
                            let ev = s.event(i);
                            if strat[ev.inputs[0]] == ev.outcomes[0] {
                                Q::one()
                            } else {
                                Q::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            Ok(BlockModel::Vertices(verts))
        }
        2 if s.m == 2 => {
            let verts = ns_vertices_2x2xd(s.d)?
                .iter()
                .map(|v| {
                    v.probs
                        .iter()
                        .map(|r| BigRational::new((*r.numer()).into(), (*r.denom()).into()))
                        .collect()
                })
                .collect();
            Ok(BlockModel::Vertices(verts))
        }
        2 => Err(Error::Unsupported(format!(
            "two-party blocks need two inputs per party, got m = {}",
            s.m
        ))),
        _ => Ok(BlockModel::Polytope),
    }
}

/// Equality constraints of the non-signaling polytope of `s`, over the
/// probabilities in index order (non-negativity is implicit).
pub fn ns_constraints(s: Scenario) -> (Vec<Vec<Q>>, Vec<Q>) {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for x in s.inputs() {
        let mut row = vec![Q::zero(); s.len()];
        for a in s.outcomes() {
            row[s.index(&crate::scenario::Event::new(a, x.clone()))] = Q::one();
        }
        rows.push(row);
        rhs.push(Q::one());
    }
    let rest_in = s.m.pow(s.n as u32 - 1);
    let rest_out = s.d.pow(s.n as u32 - 1);
    for k in 0..s.n {
        for ri in 0..rest_in {
            let xr = index_to_digits(ri, s.m, s.n - 1);
            for ro in 0..rest_out {
                let ar = index_to_digits(ro, s.d, s.n - 1);
                for xk in 1..s.m {
                    let mut row = vec![Q::zero(); s.len()];
                    for ak in 0..s.d {
                        let mut a = ar.clone();
                        a.insert(k, ak);
                        let mut x1 = xr.clone();
                        x1.insert(k, xk);
                        let mut x0 = xr.clone();
                        x0.insert(k, 0);
                        row[digits_to_index(&a, s.d) * s.input_strings() + digits_to_index(&x1, s.m)] += Q::one();
                        row[digits_to_index(&a, s.d) * s.input_strings() + digits_to_index(&x0, s.m)] -= Q::one();
                    }
                    rows.push(row);
                    rhs.push(Q::zero());
                }
            }
        }
    }
    (rows, rhs)
}

/// Maximum of `e` over non-signaling behaviors of its full scenario.
pub fn ns_bound(e: &BellExpression) -> Result<Q> {
    let s = e.scenario;
    let mut c = vec![Q::zero(); s.len()];
    for (ev, coef) in e.terms() {
        c[s.index(ev)] += exact(coef)?;
    }
    let (a, b) = ns_constraints(s);
    Ok(lp::maximize(&c, &a, &b)?.value)
}

/// Maximum of `e` over products of block models for one partition.
pub fn partition_max(e: &BellExpression, partition: &Partition) -> Result<Q> {
    let s = e.scenario;
    let blocks = &partition.blocks;
    if blocks.iter().map(Vec::len).sum::<usize>() != s.n {
        return Err(Error::ScenarioMismatch {
            expected: format!("partition of {} parties", s.n),
            found: partition.to_string(),
        });
    }
    if blocks.iter().filter(|b| b.len() >= 3).count() > 1 {
        return Err(Error::Unsupported(format!(
            "partition {partition} has more than one block of three or more parties"
        )));
    }
    let models = blocks
        .iter()
        .map(|b| block_model(block_scenario(s, b.len())))
        .collect::<Result<Vec<_>>>()?;
    // The block optimized last is the polytope block, or the one with the
    // most vertices.
    let weight = |m: &BlockModel| match m {
        BlockModel::Polytope => usize::MAX,
        BlockModel::Vertices(v) => v.len(),
    };
    let last = (0..blocks.len())
        .max_by_key(|&i| (weight(&models[i]), std::cmp::Reverse(i)))
        .expect("partition has a block");
    let others: Vec<usize> = (0..blocks.len()).filter(|&i| i != last).collect();
    let sub_index = |block: &[usize], ev: &crate::scenario::Event| -> usize {
        let a: Vec<usize> = block.iter().map(|&p| ev.outcomes[p]).collect();
        let x: Vec<usize> = block.iter().map(|&p| ev.inputs[p]).collect();
        digits_to_index(&a, s.d) * s.m.pow(block.len() as u32) + digits_to_index(&x, s.m)
    };
    let terms: Vec<(Vec<usize>, usize, Q)> = e
        .terms()
        .map(|(ev, c)| {
            Ok((
                others.iter().map(|&i| sub_index(&blocks[i], ev)).collect(),
                sub_index(&blocks[last], ev),
                exact(c)?,
            ))
        })
        .collect::<Result<_>>()?;
    let other_verts: Vec<&Vec<Vec<Q>>> = others
        .iter()
        .map(|&i| match &models[i] {
            BlockModel::Vertices(v) => v,
            BlockModel::Polytope => unreachable!("polytope block is optimized last"),
        })
        .collect();
    let counts: Vec<usize> = other_verts.iter().map(|v| v.len()).collect();
    let tuples: usize = counts.iter().product();
    let last_s = block_scenario(s, blocks[last].len());
    let lp_data = matches!(models[last], BlockModel::Polytope).then(|| ns_constraints(last_s));
    let eval = |t: usize| -> Result<Q> {
        let mut choice = Vec::with_capacity(counts.len());
        let mut rest = t;
        for &c in counts.iter().rev() {
            choice.push(rest % c);
            rest /= c;
        }
        choice.reverse();
        let mut functional = vec![Q::zero(); last_s.len()];
        for (idx, tail, c) in &terms {
            let mut w = c.clone();
            for (j, &i) in idx.iter().enumerate() {
                let p = &other_verts[j][choice[j]][i];
                if p.is_zero() {
                    w = Q::zero();
                    break;
                }
                w *= p;
            }
            if !w.is_zero() {
                functional[*tail] += w;
            }
        }
        match (&models[last], &lp_data) {
            (BlockModel::Vertices(v), _) => Ok(v
                .iter()
                .map(|vert| {
                    vert.iter()
                        .zip(&functional)
                        .filter(|(p, _)| !p.is_zero())
                        .map(|(p, f)| p * f)
                        .sum::<Q>()
                })
                .max()
                .expect("vertex list is nonempty")),
            (BlockModel::Polytope, Some((a, b))) => Ok(lp::maximize(&functional, a, b)?.value),
            _ => unreachable!(),
        }
    };
    let values = (0..tuples).into_par_iter().map(eval).collect::<Result<Vec<_>>>()?;
    Ok(values.into_iter().max().expect("at least one tuple"))
}

fn check_caps(s: Scenario, what: &str) -> Result<()> {
    let ok = s.m == 2 && ((s.d == 2 && s.n <= 4) || (s.d == 3 && s.n <= 3));
    if ok {
        Ok(())
    } else {
        Err(Error::CapExceeded(format!(
            "{what} supports two inputs with n ≤ 4 for d = 2 or n ≤ 3 for d = 3, got {s}"
        )))
    }
}

fn max_over(e: &BellExpression, parts: Vec<Partition>) -> Result<Bound> {
    let mut best: Option<(Q, Partition)> = None;
    for p in parts {
        let v = partition_max(e, &p)?;
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, p));
        }
    }
    let (exact, partition) = best.ok_or_else(|| Error::OutOfRange("no admissible partition".into()))?;
    Ok(Bound {
        value: to_f64(&exact),
        exact,
        partition: Some(partition),
        strategy: None,
    })
}

/// Maximum of `e` over models local across some bipartition `S|S̄`.
pub fn bilocal_bound(e: &BellExpression) -> Result<Bound> {
    let s = e.scenario;
    check_caps(s, "bilocal bound")?;
    if s.n < 2 {
        return Err(Error::OutOfRange("bilocal bound needs at least two parties".into()));
    }
    max_over(e, bipartitions(s.n))
}

/// Maximum of `e` over models whose blocks all have at most `k` parties.
pub fn kproducible_bound(e: &BellExpression, k: usize) -> Result<Bound> {
    let s = e.scenario;
    check_caps(s, "k-producible bound")?;
    if k == 0 || k > s.n {
        return Err(Error::OutOfRange(format!("k = {k} outside 1..={}", s.n)));
    }
    max_over(e, partitions(s.n, k))
}

/// Outcome of [`verify_condition_i`].
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    /// Largest value of a member over models that split its parties.
    pub worst: f64,
    /// `(member parties, partition, value)` for every positive maximum.
    pub failures: Vec<(Vec<usize>, String, f64)>,
}

impl ConditionReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that every member is non-positive on all models local across a
/// bipartition separating its own parties.
pub fn verify_condition_i(fam: &ExpressionFamily) -> Result<ConditionReport> {
    check_caps(fam.scenario, "condition check")?;
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for (g, member) in fam.members() {
        for p in bipartitions(fam.scenario.n) {
            let inside = p.blocks.iter().any(|b| g.iter().all(|q| b.contains(q)));
            if inside {
                continue;
            }
            let v = partition_max(member, &p)?;
            let vf = to_f64(&v);
            worst = worst.max(vf);
            if v.is_positive() {
                failures.push((g.clone(), p.to_string(), vf));
            }
        }
    }
    Ok(ConditionReport { worst, failures })
}

/// Product behavior built from one extremal model per block.
#[derive(Debug, Clone)]
pub struct HybridVertex {
    pub scenario: Scenario,
    pub partition: Partition,
    pub blocks: Vec<Vec<Q>>,
}

impl HybridVertex {
    pub fn probs(&self) -> Vec<Q> {
        let s = self.scenario;
        (0..s.len())
            .map(|i| {
                let ev = s.event(i);
                self.partition
                    .blocks
                    .iter()
                    .zip(&self.blocks)
                    .map(|(b, v)| {
                        let a: Vec<usize> = b.iter().map(|&p| ev.outcomes[p]).collect();
                        let x: Vec<usize> = b.iter().map(|&p| ev.inputs[p]).collect();
                        v[digits_to_index(&a, s.d) * s.m.pow(b.len() as u32) + digits_to_index(&x, s.m)].clone()
                    })
                    .product()
            })
            .collect()
    }

    pub fn to_behavior(&self) -> Result<Behavior> {
        Behavior::new(self.scenario, self.probs().iter().map(to_f64).collect())
    }
}

/// Every product of block vertices for `partition`. Blocks must have at
/// most two parties.
pub fn hybrid_vertices(s: Scenario, partition: &Partition) -> Result<Vec<HybridVertex>> {
    let sets = partition
        .blocks
        .iter()
        .map(|b| match block_model(block_scenario(s, b.len()))? {
            BlockModel::Vertices(v) => Ok(v),
            BlockModel::Polytope => Err(Error::Unsupported(format!(
                "no vertex list for a block of {} parties",
                b.len()
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![Vec::new()];
    for set in &sets {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Vec<Q>>| {
                set.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    Ok(out
        .into_iter()
        .map(|blocks| HybridVertex {
            scenario: s,
            partition: partition.clone(),
            blocks,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::{improved00, star_chsh_family};
    use crate::scenario::ev;
    use crate::seeds::{chsh_seed, cglmp_seeds};

    fn q(n: i64) -> Q {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn seed_local_bounds() {
        assert_eq!(local_bound(&chsh_seed()).unwrap().exact, q(0));
        let (j3, jt) = cglmp_seeds();
        assert_eq!(local_bound(&j3).unwrap().exact, q(0));
        assert_eq!(local_bound(&jt).unwrap().exact, q(0));
    }

    #[test]
    fn single_term_local_bound() {
        let e = BellExpression::from_terms(Scenario::qubits(3), "p0", [(ev("000|000"), 1.0)]).unwrap();
        let b = local_bound(&e).unwrap();
        assert_eq!(b.exact, q(1));
        let strat = b.strategy.unwrap();
        assert!(strat.iter().all(|s| s[0] == 0));
    }

    #[test]
    fn fractional_coefficients_stay_exact() {
        let e = BellExpression::from_terms(
            Scenario::qubits(2),
            "f",
            [(ev("00|00"), 0.25), (ev("11|11"), 0.5), (ev("01|01"), -0.125)],
        )
        .unwrap();
        assert_eq!(local_bound(&e).unwrap().exact, BigRational::new(5.into(), 8.into()));
    }

    #[test]
    fn chsh_ns_bound_is_half() {
        // PR box reaches p(00|00) = 1/2 with every subtracted event at 0.
        assert_eq!(ns_bound(&chsh_seed()).unwrap(), BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn lp_block_agrees_with_vertices_on_two_parties() {
        let e = chsh_seed();
        let via_vertices = partition_max(&e, &Partition::new(2, vec![vec![0, 1]]).unwrap()).unwrap();
        assert_eq!(via_vertices, ns_bound(&e).unwrap());
    }

    #[test]
    fn improved00_three_party_bilocal_is_zero() {
        let b = bilocal_bound(&improved00(3).unwrap().as_expression()).unwrap();
        assert_eq!(b.exact, q(0));
    }

    #[test]
    fn condition_i_holds_for_star_family() {
        let r = verify_condition_i(&star_chsh_family(3).unwrap()).unwrap();
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn caps_are_enforced() {
        let e = BellExpression::zero(Scenario::qubits(5), "z");
        assert!(matches!(bilocal_bound(&e), Err(Error::CapExceeded(_))));
        let big = BellExpression::zero(Scenario { n: 8, m: 2, d: 3 }, "z");
        assert!(matches!(local_bound(&big), Err(Error::CapExceeded(_))));
    }

    #[test]
    fn hybrid_vertex_count() {
        let s = Scenario::qubits(3);
        let p = Partition::new(3, vec![vec![0], vec![1, 2]]).unwrap();
        let hv = hybrid_vertices(s, &p).unwrap();
        assert_eq!(hv.len(), 4 * 24);
        assert!(hv[5].to_behavior().is_ok());
    }
}
