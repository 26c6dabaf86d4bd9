//! Exact vertex enumeration of non-signaling polytopes.
//!
//! Behaviors are parametrized by Collins–Gisin coordinates (all marginals
//! with outcomes below `d−1`). Every full probability is an affine function
//! of those coordinates, and the polytope is cut out by requiring each of
//! them to be non-negative. Vertices are found with the double-description
//! method on the homogenized cone, in exact integer arithmetic.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::error::{Error, Result};
use crate::scenario::{index_to_digits, Scenario};

pub const CACHE_VERSION: u32 = 1;

/// Environment variable naming the directory for vertex cache files.
pub const CACHE_DIR_ENV: &str = "GMNL_VERTEX_CACHE";

/// Extreme point of a non-signaling polytope, as exact probabilities in
/// [`Scenario::index`] order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NsVertex {
    pub probs: Vec<Rational64>,
}

impl NsVertex {
    pub fn to_behavior(&self, scenario: Scenario) -> Result<Behavior> {
        let probs = self
            .probs
            .iter()
            .map(|r| *r.numer() as f64 / *r.denom() as f64)
            .collect();
        Behavior::new(scenario, probs)
    }

    pub fn is_deterministic(&self) -> bool {
        self.probs.iter().all(|p| p.is_zero() || *p == Rational64::from_integer(1))
    }
}

/// Affine description `p(a|x) = (c₀ + Σ_j c_j y_j)` of every probability in
/// Collins–Gisin coordinates `y`.
struct CollinsGisin {
    scenario: Scenario,
    vars: usize,
    rows: Vec<Vec<i64>>, // [constant, coefficients…] per event index
}

impl CollinsGisin {
    fn new(scenario: Scenario) -> Self {
        let Scenario { n, m, d } = scenario;
        let mut index: HashMap<(u32, Vec<usize>, Vec<usize>), usize> = HashMap::new();
        for mask in 1u32..(1 << n) {
            let size = mask.count_ones() as usize;
            for xi in 0..m.pow(size as u32) {
                let xs = index_to_digits(xi, m, size);
                for ai in 0..(d - 1).pow(size as u32) {
                    let a = index_to_digits(ai, d - 1, size);
                    let next = index.len();
                    index.insert((mask, xs.clone(), a), next);
                }
            }
        }
        let vars = index.len();
        let mut rows = Vec::with_capacity(scenario.len());
        for i in 0..scenario.len() {
            let e = scenario.event(i);
            let mut row = vec![0i64; vars + 1];
            let free: u32 = (0..n)
                .filter(|&k| e.outcomes[k] < d - 1)
                .fold(0, |acc, k| acc | (1 << k));
            let last: Vec<usize> = (0..n).filter(|&k| e.outcomes[k] == d - 1).collect();
            for sub in 0u32..(1 << last.len()) {
                let u: u32 = last
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| sub & (1 << j) != 0)
                    .fold(0, |acc, (_, &k)| acc | (1 << k));
                let sign = if sub.count_ones() % 2 == 0 { 1 } else { -1 };
                let mask = free | u;
                if mask == 0 {
                    row[0] += sign;
                    continue;
                }
                let parties: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
                let xs: Vec<usize> = parties.iter().map(|&k| e.inputs[k]).collect();
                let u_parties: Vec<usize> = parties.iter().copied().filter(|&k| u & (1 << k) != 0).collect();
                for ai in 0..(d - 1).pow(u_parties.len() as u32) {
                    let au = index_to_digits(ai, d - 1, u_parties.len());
                    let a: Vec<usize> = parties
                        .iter()
                        .map(|&k| match u_parties.iter().position(|&q| q == k) {
                            Some(pos) => au[pos],
                            None => e.outcomes[k],
                        })
                        .collect();
                    row[1 + index[&(mask, xs.clone(), a)]] += sign;
                }
            }
            rows.push(row);
        }
        CollinsGisin { scenario, vars, rows }
    }
}

fn gcd_normalize(v: &mut [i128]) {
    let g = v.iter().fold(0i128, |g, &x| g.gcd(&x));
    if g > 1 {
        v.iter_mut().for_each(|x| *x /= g);
    }
}

fn dot(h: &[i64], r: &[i128]) -> i128 {
    h.iter().zip(r).map(|(&a, &b)| a as i128 * b).sum()
}

/// Picks `dim` linearly independent rows (exact rational elimination) and
/// returns their indices together with the columns of the inverse matrix,
/// which are the extreme rays of the initial simplicial cone.
fn initial_cone(rows: &[Vec<i64>], dim: usize) -> Result<(Vec<usize>, Vec<Vec<i128>>)> {
    use num_rational::BigRational;
    use num_traits::One;
    let q = |v: i64| BigRational::from_integer(v.into());
    let mut chosen = Vec::new();
    let mut basis: Vec<(usize, Vec<BigRational>)> = Vec::new(); // (pivot column, reduced row)
    for (i, row) in rows.iter().enumerate() {
        let mut r: Vec<BigRational> = row.iter().map(|&v| q(v)).collect();
        for (pc, b) in &basis {
            if !r[*pc].is_zero() {
                let f = r[*pc].clone() / &b[*pc];
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= &f * y;
                }
            }
        }
        if let Some(pc) = r.iter().position(|x| !x.is_zero()) {
            basis.push((pc, r));
            chosen.push(i);
            if chosen.len() == dim {
                break;
            }
        }
    }
    if chosen.len() < dim {
        return Err(Error::Numerical("constraint system is not full rank".into()));
    }
    // Invert the chosen square matrix by Gauss–Jordan.
    let mut a: Vec<Vec<BigRational>> = chosen
        .iter()
        .map(|&i| {
            let mut r: Vec<BigRational> = rows[i].iter().map(|&v| q(v)).collect();
            r.extend((0..dim).map(|j| if j == chosen.iter().position(|&c| c == i).unwrap() { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for col in 0..dim {
        let p = (col..dim).find(|&r| !a[r][col].is_zero()).expect("full rank");
        a.swap(col, p);
        let inv = BigRational::one() / &a[col][col];
        a[col].iter_mut().for_each(|x| *x *= &inv);
        let prow = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
    }
    // Column j of the inverse is a ray tight on every chosen row but j.
    let rays = (0..dim)
        .map(|j| {
            let col: Vec<BigRational> = (0..dim).map(|r| a[r][dim + j].clone()).collect();
            let lcm = col.iter().fold(num_bigint::BigInt::one(), |l, x| l.lcm(x.denom()));
            let mut ints: Vec<i128> = col
                .iter()
                .map(|x| {
                    let v = x * BigRational::from_integer(lcm.clone());
                    i128::try_from(v.to_integer()).expect("small integer ray")
                })
                .collect();
            gcd_normalize(&mut ints);
            ints
        })
        .collect();
    Ok((chosen, rays))
}

struct Ray {
    coords: Vec<i128>,
    tight: u128,
}

/// Double-description enumeration of the extreme rays of `{z : H z ≥ 0}`.
fn extreme_rays(rows: &[Vec<i64>]) -> Result<Vec<Vec<i128>>> {
    let dim = rows[0].len();
    if rows.len() > 128 {
        return Err(Error::Unsupported(format!(
            "vertex enumeration supports at most 128 constraints, got {}",
            rows.len()
        )));
    }
    let (chosen, init) = initial_cone(rows, dim)?;
    let mut rays: Vec<Ray> = init
        .into_iter()
        .enumerate()
        .map(|(j, coords)| {
            let tight = chosen
                .iter()
                .enumerate()
                .filter(|&(r, _)| r != j)
                .fold(0u128, |m, (_, &row)| m | (1u128 << row));
            Ray { coords, tight }
        })
        .collect();
    for (i, h) in rows.iter().enumerate() {
        if chosen.contains(&i) {
            continue;
        }
        let vals: Vec<i128> = rays.iter().map(|r| dot(h, &r.coords)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&j| vals[j] > 0).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&j| vals[j] < 0).collect();
        let mut fresh = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].tight & rays[q].tight;
                if (common.count_ones() as usize) + 2 < dim {
                    continue;
                }
                let adjacent = !rays.iter().enumerate().any(|(j, r)| {
                    j != p && j != q && r.tight & common == common
                });
                if !adjacent {
                    continue;
                }
                let (sp, sq) = (vals[p], vals[q]);
                let mut coords: Vec<i128> = rays[q]
                    .coords
                    .iter()
                    .zip(&rays[p].coords)
                    .map(|(&rq, &rp)| sp * rq - sq * rp)
                    .collect();
                gcd_normalize(&mut coords);
                fresh.push(Ray {
                    coords,
                    tight: common | (1u128 << i),
                });
            }
        }
        let mut next: Vec<Ray> = Vec::with_capacity(pos.len() + fresh.len());
        for (j, r) in rays.into_iter().enumerate() {
            match vals[j].signum() {
                1 => next.push(r),
                0 => next.push(Ray {
                    coords: r.coords,
                    tight: r.tight | (1u128 << i),
                }),
                _ => {}
            }
        }
        next.extend(fresh);
        rays = next;
    }
    Ok(rays.into_iter().map(|r| r.coords).collect())
}

/// Enumerates every vertex of the non-signaling polytope of `scenario`.
pub fn enumerate_ns_vertices(scenario: Scenario) -> Result<Vec<NsVertex>> {
    let cg = CollinsGisin::new(scenario);
    debug_assert_eq!(cg.rows.len(), cg.scenario.len());
    // Homogenized constraints: t·c₀ + c·y ≥ 0 for every probability, and t ≥ 0.
    let mut rows = cg.rows.clone();
    let mut t_row = vec![0i64; cg.vars + 1];
    t_row[0] = 1;
    rows.push(t_row);
    let rays = extreme_rays(&rows)?;
    let mut out = Vec::with_capacity(rays.len());
    for r in rays {
        let t = r[0];
        if t <= 0 {
            return Err(Error::Numerical("unbounded direction in a bounded polytope".into()));
        }
        let den = i64::try_from(t).map_err(|_| Error::Numerical("vertex entry overflow".into()))?;
        let probs = cg
            .rows
            .iter()
            .map(|h| {
                i64::try_from(dot(h, &r))
                    .map(|num| Rational64::new(num, den))
                    .map_err(|_| Error::Numerical("vertex entry overflow".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::Numerical("enumerated vertex has a negative entry".into()));
        }
        out.push(NsVertex { probs });
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Vertices of the bipartite two-input, `d`-outcome non-signaling polytope.
/// Results are memoized per process.
pub fn ns_vertices_2x2xd(d: usize) -> Result<&'static [NsVertex]> {
    static D2: OnceLock<Vec<NsVertex>> = OnceLock::new();
    static D3: OnceLock<Vec<NsVertex>> = OnceLock::new();
    let cell = match d {
        2 => &D2,
        3 => &D3,
        _ => {
            return Err(Error::Unsupported(format!(
                "non-signaling vertices are available for d ∈ {{2,3}}, got d = {d}"
            )))
        }
    };
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let scenario = Scenario { n: 2, m: 2, d };
    let verts = match default_cache_path(d) {
        Some(path) => load_or_build(&path, scenario)?,
        None => enumerate_ns_vertices(scenario)?,
    };
    Ok(cell.get_or_init(|| verts))
}

pub fn default_cache_path(d: usize) -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).map(|dir| PathBuf::from(dir).join(cache_file_name(d)))
}

pub fn cache_file_name(d: usize) -> String {
    format!("ns_vertices_2x2x{d}.json")
}

#[derive(Serialize, Deserialize)]
struct RationalDoc {
    num: i64,
    den: i64,
}

#[derive(Serialize, Deserialize)]
struct CacheDoc {
    version: u32,
    scenario: Scenario,
    vertices: Vec<Vec<RationalDoc>>,
}

pub fn write_cache(path: &Path, scenario: Scenario, vertices: &[NsVertex]) -> Result<()> {
    let doc = CacheDoc {
        version: CACHE_VERSION,
        scenario,
        vertices: vertices
            .iter()
            .map(|v| {
                v.probs
                    .iter()
                    .map(|r| RationalDoc {
                        num: *r.numer(),
                        den: *r.denom(),
                    })
                    .collect()
            })
            .collect(),
    };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, serde_json::to_string(&doc)?)?;
    Ok(())
}

pub fn read_cache(path: &Path, scenario: Scenario) -> Result<Vec<NsVertex>> {
    let doc: CacheDoc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if doc.version != CACHE_VERSION {
        return Err(Error::InvalidBehavior(format!(
            "vertex cache version {} is not {CACHE_VERSION}",
            doc.version
        )));
    }
    scenario.ensure_same(&doc.scenario)?;
    doc.vertices
        .into_iter()
        .map(|v| {
            if v.len() != scenario.len() {
                return Err(Error::InvalidBehavior("vertex of wrong length in cache".into()));
            }
            let probs = v
                .into_iter()
                .map(|r| {
                    if r.den == 0 {
                        Err(Error::InvalidBehavior("zero denominator in cache".into()))
                    } else {
                        Ok(Rational64::new(r.num, r.den))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(NsVertex { probs })
        })
        .collect()
}

/// Reads the cache at `path`, or enumerates and writes it when absent.
pub fn load_or_build(path: &Path, scenario: Scenario) -> Result<Vec<NsVertex>> {
    if path.exists() {
        return read_cache(path, scenario);
    }
    regenerate_cache(path, scenario)
}

pub fn regenerate_cache(path: &Path, scenario: Scenario) -> Result<Vec<NsVertex>> {
    let verts = enumerate_ns_vertices(scenario)?;
    write_cache(path, scenario, &verts)?;
    Ok(verts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::check_nonsignaling;

    #[test]
    fn collins_gisin_rows_sum_to_one() {
        // Summing p(a|x) over a for fixed x leaves only the constant 1.
        for s in [Scenario::qubits(2), Scenario { n: 2, m: 2, d: 3 }, Scenario::qubits(3)] {
            let cg = CollinsGisin::new(s);
            for x in s.inputs() {
                let mut acc = vec![0i64; cg.vars + 1];
                for a in s.outcomes() {
                    let row = &cg.rows[s.index(&crate::scenario::Event::new(a, x.clone()))];
                    acc.iter_mut().zip(row).for_each(|(u, v)| *u += v);
                }
                assert_eq!(acc[0], 1);
                assert!(acc[1..].iter().all(|&v| v == 0));
            }
        }
        assert_eq!(CollinsGisin::new(Scenario { n: 2, m: 2, d: 3 }).vars, 24);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(cache_file_name(2));
        let s = Scenario::qubits(2);
        let built = load_or_build(&path, s).unwrap();
        assert!(path.exists());
        let read = read_cache(&path, s).unwrap();
        assert_eq!(built, read);
        assert!(read_cache(&path, Scenario { n: 2, m: 2, d: 3 }).is_err());
    }

    #[test]
    fn vertices_are_nonsignaling() {
        let s = Scenario::qubits(2);
        for v in ns_vertices_2x2xd(2).unwrap() {
            let b = v.to_behavior(s).unwrap();
            assert!(check_nonsignaling(&b).pass);
        }
    }

    #[test]
    fn unsupported_outcome_count() {
        assert!(matches!(ns_vertices_2x2xd(4), Err(Error::Unsupported(_))));
    }
}
