//! A second, deliberately naive implementation of query generation: nested
//! loops over every random choice with exact weights. The auditor's figures
//! must agree with it exactly.

use std::collections::BTreeMap;

use pirpsi_core::auditor::{exact_query_distribution, exact_rate, DEFAULT_BUDGET};
use pirpsi_core::distributions::{p_ij, p_theta_zero};
use pirpsi_core::{DemandSideInfo, Rational, SchemeParams};

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

fn subsets(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![vec![]];
    }
    if items.len() < size {
        return vec![];
    }
    let mut with: Vec<Vec<usize>> = subsets(&items[1..], size - 1)
        .into_iter()
        .map(|mut s| {
            s.insert(0, items[0]);
            s
        })
        .collect();
    with.extend(subsets(&items[1..], size));
    with
}

/// Every map from `set` to `[1:N-1]`.
fn labellings(set: &[usize], n: usize) -> Vec<Vec<(usize, u32)>> {
    let mut out = vec![vec![]];
    for &i in set {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (1..n as u32).map(move |v| {
                    let mut p = prefix.clone();
                    p.push((i, v));
                    p
                })
            })
            .collect();
    }
    out
}

fn frac(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

struct Reference {
    /// Distribution of `u_m` for each `m`, i.e. of the query of a server
    /// that `σ` maps to position `m`.
    positions: Vec<BTreeMap<Vec<u32>, Rational>>,
    expected_nonzero: Rational,
}

fn reference(p: &SchemeParams, ws: &DemandSideInfo) -> Reference {
    let (n, k, m) = (p.n(), p.k(), p.m());
    let w = ws.demand();
    let side = ws.side().to_vec();
    let inter = ws.interference(p);
    let q = (n - 1) as i64;
    let mut positions = vec![BTreeMap::new(); n];
    let mut expected_nonzero = Rational::zero();

    let pis = permutations(&(1..n).collect::<Vec<_>>());
    let bs = labellings(&side, n);
    let base = frac(1, pis.len() as i64) * frac(1, q.pow(m as u32));
    for pi in &pis {
        for b in &bs {
            for i in 0..=m {
                for j in 0..=inter.len() {
                    let pij = p_ij(i, j, p).unwrap();
                    if pij.is_zero() {
                        continue;
                    }
                    let rs = subsets(&side, i);
                    let ts = subsets(&inter, j);
                    let orders = permutations(&(0..i).collect::<Vec<_>>());
                    let w_pair = &base
                        * &pij
                        * frac(1, rs.len() as i64)
                        * frac(1, orders.len() as i64)
                        * frac(1, ts.len() as i64)
                        * frac(1, q.pow(j as u32));
                    for r in &rs {
                        // the (I-1)-subsets of R, the x-th leaving out r[x]
                        let drop_one = |x: usize| -> Vec<usize> {
                            r.iter().enumerate().filter(|&(y, _)| y != x).map(|(_, &v)| v).collect()
                        };
                        for order in &orders {
                            for t in &ts {
                                for c in labellings(t, n) {
                                    let p0 = p_theta_zero(i, p).unwrap();
                                    for (theta, pt) in [(0u8, p0.clone()), (1, Rational::one() - p0)] {
                                        if pt.is_zero() {
                                            continue;
                                        }
                                        let weight = &w_pair * &pt;
                                        let mut u = vec![vec![0u32; k]; n];
                                        for &(idx, v) in b.iter().filter(|(idx, _)| r.contains(idx)) {
                                            u[0][idx - 1] = v;
                                        }
                                        for mm in 1..n {
                                            u[mm][w - 1] = pi[mm - 1] as u32;
                                            let part: Vec<usize> = if theta == 1 && mm <= i {
                                                drop_one(order[mm - 1])
                                            } else {
                                                side.clone()
                                            };
                                            for &(idx, v) in b.iter().filter(|(idx, _)| part.contains(idx)) {
                                                u[mm][idx - 1] = v;
                                            }
                                        }
                                        for row in u.iter_mut() {
                                            for &(idx, v) in &c {
                                                row[idx - 1] = v;
                                            }
                                        }
                                        let nonzero = u.iter().filter(|v| v.iter().any(|&x| x != 0)).count();
                                        expected_nonzero += &weight * &frac(nonzero as i64, 1);
                                        for (pos, v) in u.into_iter().enumerate() {
                                            *positions[pos].entry(v).or_insert_with(Rational::zero) += weight.clone();
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Reference { positions, expected_nonzero }
}

/// `σ` is uniform, so every server sees the average over positions.
fn server_marginal(r: &Reference) -> BTreeMap<Vec<u32>, Rational> {
    let n = r.positions.len() as i64;
    let mut out = BTreeMap::new();
    for pos in &r.positions {
        for (v, mass) in pos {
            *out.entry(v.clone()).or_insert_with(Rational::zero) += mass / &frac(n, 1);
        }
    }
    out.retain(|_, m: &mut Rational| !m.is_zero());
    out
}

fn check(p: &SchemeParams, ws: &DemandSideInfo) {
    let r = reference(p, ws);
    let expected = server_marginal(&r);
    let total: Rational = expected.values().cloned().sum();
    assert!(total.is_one(), "{p} {ws}: reference total {total}");
    for server in 1..=p.n() {
        let got = exact_query_distribution(ws, server, p, DEFAULT_BUDGET).unwrap();
        let got: BTreeMap<Vec<u32>, Rational> = got.masses.into_iter().map(|(v, m)| (v.0, m)).collect();
        assert_eq!(got, expected, "{p} {ws} server {server}");
    }
    if ws == &DemandSideInfo::canonical(p) {
        let rate = exact_rate(p, DEFAULT_BUDGET).unwrap();
        assert_eq!(rate.expected_subpackets, r.expected_nonzero, "{p}");
        // N (1 - 1/N^{K-M}) sub-packets
        let nk = (p.n() as i64).pow((p.k() - p.m()) as u32);
        assert_eq!(r.expected_nonzero, frac(p.n() as i64, 1) * (Rational::one() - frac(1, nk)), "{p}");
    }
}

#[test]
fn matches_reference_on_every_pair() {
    for (n, k, m) in [(2, 3, 1), (2, 4, 1), (3, 3, 2), (3, 4, 1), (3, 4, 2)] {
        let p = SchemeParams::new(n, k, m, n - 1, 2).unwrap();
        for ws in DemandSideInfo::all(&p) {
            check(&p, &ws);
        }
    }
}

#[test]
fn matches_reference_larger() {
    for (n, k, m) in [(4, 5, 2), (3, 5, 2), (4, 4, 3)] {
        let p = SchemeParams::new(n, k, m, n - 1, 2).unwrap();
        check(&p, &DemandSideInfo::canonical(&p));
        let last = DemandSideInfo::all(&p).pop().unwrap();
        check(&p, &last);
    }
}
