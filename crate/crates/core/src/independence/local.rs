//! Exact dependence of at most four functions on the piece around one loop.
//!
//! Suppose shifts `b` make the minimum attained twice at every point of the
//! piece. Call `i ~ j` when `f_i + b_i` and `f_j + b_j` tie as minimizers on
//! an interval of positive length. That interval lies where `f_j - f_i` is
//! flat, so `b_i - b_j` is one of finitely many flat levels. A function
//! without ties can be dropped, which leaves a smaller family. Otherwise:
//!
//! - if the tie graph is connected, a spanning tree pins every shift;
//! - with four functions it may also split into two tied pairs. The relative
//!   shift between the pairs then ranges over a closed set. An endpoint of
//!   that set is a value where the picture changes: some function meets
//!   another at a breakpoint or at a crossing inside one pair.
//!
//! Every candidate is checked with the exact envelope.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::exact::{q, Q};
use crate::graph::{ChainOfLoops, Edge};
use crate::plfun::{loop_region, lower_envelope_on, PLFunction};

pub const LOCAL_LIMIT: usize = 4;

type Region = Vec<(Edge, Q, Q)>;

/// Values of `f` on flat segments of positive length inside the region.
fn flat_levels(f: &PLFunction, g: &ChainOfLoops, region: &Region) -> Vec<Q> {
    let set: BTreeSet<Q> = region
        .iter()
        .flat_map(|(e, lo, hi)| f.edge(g, *e).segments(lo, hi))
        .filter(|(a, b, _, s)| *s == 0 && a < b)
        .map(|(_, _, v, _)| v)
        .collect();
    set.into_iter().collect()
}

/// Points of the region where `f` vanishes on a sloped segment, plus every
/// breakpoint of `f` and the ends of each region interval.
fn critical_points(f: &PLFunction, g: &ChainOfLoops, region: &Region) -> Vec<(Edge, Q)> {
    let mut out = Vec::new();
    for (e, lo, hi) in region {
        for (a, b, v, s) in f.edge(g, *e).segments(lo, hi) {
            out.push((*e, a.clone()));
            out.push((*e, b.clone()));
            if s != 0 {
                let x = &a - &v / q(s);
                if x >= a && x <= b {
                    out.push((*e, x));
                }
            }
        }
    }
    out
}

fn good(fns: &[&PLFunction], shifts: &[Q], g: &ChainOfLoops, region: &Region) -> bool {
    lower_envelope_on(fns, shifts, g, region)
        .iter()
        .all(|c| c.achievers.len() >= 2)
}

fn spanning_trees(k: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    let n = pairs.len();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k - 1 {
            continue;
        }
        let edges: Vec<(usize, usize)> = (0..n)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| pairs[b])
            .collect();
        let mut comp: Vec<usize> = (0..k).collect();
        let find = |c: &Vec<usize>, mut x: usize| {
            while c[x] != x {
                x = c[x];
            }
            x
        };
        let mut acyclic = true;
        for &(i, j) in &edges {
            let (a, b) = (find(&comp, i), find(&comp, j));
            if a == b {
                acyclic = false;
                break;
            }
            comp[a] = b;
        }
        if acyclic {
            out.push(edges);
        }
    }
    out
}

/// Shifts from a spanning tree with one flat level per edge; `b_0 = 0`.
fn tree_shifts(k: usize, tree: &[(usize, usize)], levels: &[Q]) -> Vec<Q> {
    let mut b: Vec<Option<Q>> = vec![None; k];
    b[0] = Some(Q::zero());
    for _ in 0..k {
        for (&(i, j), l) in tree.iter().zip(levels) {
            // f_j - f_i = l on the tie, so b_j = b_i - l
            match (&b[i], &b[j]) {
                (Some(bi), None) => b[j] = Some(bi - l),
                (None, Some(bj)) => b[i] = Some(bj + l),
                _ => {}
            }
        }
    }
    b.into_iter().map(|x| x.expect("tree spans")).collect()
}

fn connected_candidates(fns: &[&PLFunction], g: &ChainOfLoops, region: &Region) -> bool {
    let k = fns.len();
    let mut levels = vec![vec![Vec::new(); k]; k];
    for i in 0..k {
        for j in i + 1..k {
            levels[i][j] = flat_levels(&fns[j].sub(fns[i]), g, region);
        }
    }
    let mut tried: BTreeSet<Vec<Q>> = BTreeSet::new();
    for tree in spanning_trees(k) {
        let choices: Vec<&Vec<Q>> = tree.iter().map(|&(i, j)| &levels[i][j]).collect();
        if choices.iter().any(|c| c.is_empty()) {
            continue;
        }
        let mut idx = vec![0usize; tree.len()];
        loop {
            let ls: Vec<Q> = idx
                .iter()
                .zip(&choices)
                .map(|(&n, c)| c[n].clone())
                .collect();
            let b = tree_shifts(k, &tree, &ls);
            if tried.insert(b.clone()) && good(fns, &b, g, region) {
                return true;
            }
            let mut p = 0;
            while p < idx.len() {
                idx[p] += 1;
                if idx[p] < choices[p].len() {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
            if p == idx.len() {
                break;
            }
        }
    }
    false
}

fn two_pair_candidates(fns: &[&PLFunction], g: &ChainOfLoops, region: &Region) -> bool {
    for (a, b, c, d) in [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)] {
        let dab = fns[b].sub(fns[a]);
        let dcd = fns[d].sub(fns[c]);
        let lab = flat_levels(&dab, g, region);
        let lcd = flat_levels(&dcd, g, region);
        let mut breaks: Vec<(Edge, Q)> = Vec::new();
        for f in fns {
            breaks.extend(critical_points(f, g, region));
        }
        for la in &lab {
            for lc in &lcd {
                let mut pts = breaks.clone();
                pts.extend(critical_points(&dab.shifted(&-la), g, region));
                pts.extend(critical_points(&dcd.shifted(&-lc), g, region));
                pts.sort();
                pts.dedup();
                // b_a = 0, b_b = -la, b_c = t, b_d = t - lc
                let mut ts: BTreeSet<Q> = BTreeSet::new();
                for (e, x) in &pts {
                    let val = |n: usize| fns[n].edge(g, *e).eval(x);
                    let left = [val(a), val(b) - la];
                    let right = [val(c), val(d) - lc];
                    for l in &left {
                        for r in &right {
                            ts.insert(l - r);
                        }
                    }
                }
                for t in ts {
                    let mut sh = vec![Q::zero(); 4];
                    sh[b] = -la.clone();
                    sh[c] = t.clone();
                    sh[d] = &t - lc;
                    if good(fns, &sh, g, region) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

fn dependent_exactly(fns: &[&PLFunction], g: &ChainOfLoops, region: &Region) -> bool {
    match fns.len() {
        0 | 1 => false,
        2 => {
            let d = fns[1].sub(fns[0]);
            region
                .iter()
                .all(|(e, lo, hi)| d.edge(g, *e).segments(lo, hi).iter().all(|s| s.3 == 0))
                && flat_levels(&d, g, region).len() <= 1
        }
        3 => connected_candidates(fns, g, region),
        _ => connected_candidates(fns, g, region) || two_pair_candidates(fns, g, region),
    }
}

/// Whether some shifts make the minimum of `fns` attained twice at every
/// point of the piece around loop `t`. Exact for up to [`LOCAL_LIMIT`]
/// functions; larger families are reported as possibly dependent.
pub fn locally_dependent(fns: &[&PLFunction], g: &ChainOfLoops, t: usize) -> bool {
    let k = fns.len();
    if k < 2 {
        return false;
    }
    if k > LOCAL_LIMIT {
        return true;
    }
    let region = loop_region(g, t);
    // subsets by increasing size
    let mut masks: Vec<u32> = (1u32..(1 << k)).filter(|m| m.count_ones() >= 2).collect();
    masks.sort_by_key(|m| m.count_ones());
    masks.into_iter().any(|mask| {
        let sub: Vec<&PLFunction> = (0..k)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| fns[i])
            .collect();
        dependent_exactly(&sub, g, &region)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parameters::ParameterQuadruple;
    use crate::plfun::PsiFamily;
    use crate::series::{build_divisor, standard_tableau, MultiSetIndex};

    fn family() -> (ChainOfLoops, PsiFamily) {
        let p = ParameterQuadruple::from_rsrho(2, 1, 0, 3).unwrap();
        let g = ChainOfLoops::instantiate_admissible(&p, None).unwrap();
        let t = standard_tableau(&p).unwrap();
        let d = build_divisor(&t, &g, 0).unwrap();
        let fam = PsiFamily::build(&d, &t.to_path().unwrap().slope_table(), &g).unwrap();
        (g, fam)
    }

    #[test]
    fn pairs_and_triples() {
        let (g, fam) = family();
        let f = |s: &str| fam.psi_multi(&MultiSetIndex::parse(s).unwrap());
        let (a, b) = (f("222"), f("122"));
        // psi_1 bends on loop 1 so the pair cannot tie on all of it
        assert!(!locally_dependent(&[&a, &b], &g, 1));
        let c = a.shifted(&q(5));
        assert!(locally_dependent(&[&a, &c], &g, 1));
        assert!(locally_dependent(&[&a, &b, &c], &g, 1));
        assert!(!locally_dependent(&[&a], &g, 1));
    }

    #[test]
    fn two_tied_pairs() {
        let (g, fam) = family();
        let f = |s: &str| fam.psi_multi(&MultiSetIndex::parse(s).unwrap());
        let (a, b) = (f("222"), f("122"));
        // {a, a+1} and {b, b+1} each tie everywhere, so four functions are dependent
        let (a1, b1) = (a.shifted(&q(1)), b.shifted(&q(1)));
        assert!(locally_dependent(&[&a, &b, &a1, &b1], &g, 1));
        assert_eq!(spanning_trees(4).len(), 16);
        assert_eq!(spanning_trees(3).len(), 3);
    }

    #[test]
    fn found_shifts_are_checked() {
        let (g, fam) = family();
        // three functions that separate on loop 2 in every arrangement
        let fs: Vec<PLFunction> = ["002", "012", "112"]
            .iter()
            .map(|s| fam.psi_multi(&MultiSetIndex::parse(s).unwrap()))
            .collect();
        let refs: Vec<&PLFunction> = fs.iter().collect();
        let dep = locally_dependent(&refs, &g, 2);
        let region = loop_region(&g, 2);
        if dep {
            assert!(
                connected_candidates(&refs, &g, &region)
                    || dependent_exactly(&refs[..2], &g, &region)
                    || dependent_exactly(&refs[1..], &g, &region)
                    || dependent_exactly(&[refs[0], refs[2]], &g, &region)
            );
        }
    }
}
