//! Chip positions of `D` and the loop pieces of each `psi_i`.
//!
//! On loop `k` the function `psi_i` enters at `v_k` with slope `a = p_{k-1}(i)`
//! and leaves at `w_k` with slope `b = p_k(i)`. It may use the chip of `D` on
//! the loop (slope rises by one there) and it may have one concave kink
//! elsewhere (a chip of `D_i`). The two edges must integrate to the same value.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SlopeTable, Step, Tableau};
use crate::error::{Error, Result};
use crate::exact::{self, frac, q, Q};
use crate::graph::{CanonPoint, ChainOfLoops, Edge, GraphPoint, Vertex};

/// Slopes along one edge: `slopes[0]` up to `breaks[0]`, and so on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeProfile {
    #[serde(with = "exact::serde_vec_q")]
    pub breaks: Vec<Q>,
    pub slopes: Vec<i64>,
}

impl EdgeProfile {
    pub fn constant_slope(s: i64) -> Self {
        Self {
            breaks: Vec::new(),
            slopes: vec![s],
        }
    }

    fn from_events(len: &Q, start: i64, mut events: Vec<(Q, i64)>) -> Self {
        events.sort();
        let mut slope = start;
        let mut breaks = Vec::new();
        let mut slopes = Vec::new();
        let mut i = 0;
        while i < events.len() {
            let pos = events[i].0.clone();
            let mut delta = 0;
            while i < events.len() && events[i].0 == pos {
                delta += events[i].1;
                i += 1;
            }
            if delta == 0 || &pos >= len {
                continue;
            }
            if pos.is_zero() {
                slope += delta;
                continue;
            }
            slopes.push(slope);
            breaks.push(pos);
            slope += delta;
        }
        slopes.push(slope);
        Self { breaks, slopes }
    }

    /// Total change of value along an edge of length `len`.
    pub fn integral(&self, len: &Q) -> Q {
        let mut prev = Q::zero();
        let mut total = Q::zero();
        for (k, s) in self.slopes.iter().enumerate() {
            let end = self.breaks.get(k).unwrap_or(len);
            total += q(*s) * (end - &prev);
            prev = end.clone();
        }
        total
    }

    pub fn start_slope(&self) -> i64 {
        self.slopes[0]
    }

    pub fn end_slope(&self) -> i64 {
        *self.slopes.last().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LoopSolution {
    pub top: EdgeProfile,
    pub bottom: EdgeProfile,
}

/// The divisor `D`: `r` chips at `w_0` and at most one chip per loop.
#[derive(Debug, Clone)]
pub struct DivisorModel {
    r: u32,
    chips: Vec<Option<GraphPoint>>,
    solutions: Vec<Vec<LoopSolution>>,
    ambiguous: Vec<usize>,
    linger_primes: Vec<u64>,
}

impl DivisorModel {
    pub fn rank(&self) -> u32 {
        self.r
    }

    pub fn genus(&self) -> usize {
        self.chips.len()
    }

    pub fn chip(&self, k: usize) -> Option<&GraphPoint> {
        self.chips[k - 1].as_ref()
    }

    pub fn degree(&self) -> usize {
        self.r as usize + self.chips.iter().flatten().count()
    }

    /// The loop piece of `psi_i` on loop `k`.
    pub fn solution(&self, k: usize, i: u32) -> &LoopSolution {
        &self.solutions[k - 1][i as usize]
    }

    /// Loops where more than one chip position or loop piece was possible.
    pub fn ambiguous_loops(&self) -> &[usize] {
        &self.ambiguous
    }

    pub fn linger_primes(&self) -> &[u64] {
        &self.linger_primes
    }

    pub fn divisor(&self, g: &ChainOfLoops) -> BTreeMap<CanonPoint, i64> {
        let mut out = BTreeMap::new();
        if self.r > 0 {
            out.insert(CanonPoint::Vertex(Vertex::W(0)), self.r as i64);
        }
        for c in self.chips.iter().flatten() {
            *out.entry(g.canonical(c)).or_insert(0) += 1;
        }
        out
    }
}

fn scan_width(a: i64, b: i64) -> i64 {
    a.abs() + b.abs() + 2
}

/// All loop pieces with entry slope `a`, exit slope `b` and an optional chip
/// `(on_top, x)`, deduplicated and sorted.
fn solve_loop(l: &Q, m: &Q, a: i64, b: i64, chip: Option<(bool, &Q)>) -> Vec<LoopSolution> {
    let mut found = BTreeSet::new();
    let es: &[i64] = if chip.is_some() { &[0, 1] } else { &[0] };
    let w = scan_width(a, b);
    for &e in es {
        let k = a - b + e;
        if !(0..=1).contains(&k) {
            continue;
        }
        for t in -w..=w {
            let mut top_ev = Vec::new();
            let mut bot_ev = Vec::new();
            let mut base_top = q(t) * l;
            let mut base_bot = q(a - t) * m;
            if let (1, Some((on_top, x))) = (e, chip) {
                if on_top {
                    base_top += l - x;
                    top_ev.push((x.clone(), 1));
                } else {
                    base_bot += m - x;
                    bot_ev.push((x.clone(), 1));
                }
            }
            let mut push = |top_ev: Vec<(Q, i64)>, bot_ev: Vec<(Q, i64)>| {
                let top = EdgeProfile::from_events(l, t, top_ev);
                let bottom = EdgeProfile::from_events(m, a - t, bot_ev);
                debug_assert_eq!(top.integral(l), bottom.integral(m));
                found.insert(LoopSolution { top, bottom });
            };
            if k == 0 {
                if base_top == base_bot {
                    push(top_ev, bot_ev);
                }
                continue;
            }
            // sink on top: base_top - (l - y) = base_bot
            let y = l - (&base_top - &base_bot);
            if !y.is_negative() && &y <= l {
                let mut te = top_ev.clone();
                te.push((y, -1));
                push(te, bot_ev.clone());
            }
            // sink on bottom: base_top = base_bot - (m - y)
            let y = m - (&base_bot - &base_top);
            if !y.is_negative() && &y <= m {
                let mut be = bot_ev.clone();
                be.push((y, -1));
                push(top_ev.clone(), be);
            }
        }
    }
    found.into_iter().collect()
}

/// Chip positions on a loop where `psi_i*` gains one unit of slope.
fn ascent_positions(l: &Q, m: &Q, a: i64) -> Vec<(bool, Q)> {
    let mut out = BTreeSet::new();
    let w = scan_width(a, a + 1);
    for t in -w..=w {
        let x = l + q(t) * l - q(a - t) * m;
        if x.is_positive() && &x < l {
            out.insert((true, x));
        }
        let x = q(a - t + 1) * m - q(t) * l;
        if x.is_positive() && &x < m {
            out.insert((false, x));
        }
    }
    out.into_iter().collect()
}

fn pick_linger_prime(rng: &mut ChaCha8Rng, g: &ChainOfLoops, used: &[u64]) -> u64 {
    loop {
        let start: u64 = rng.gen_range(1_000..100_000);
        let p = exact::primes_above(start, 1)[0];
        let bp = num_bigint::BigInt::from(p);
        let clash = g
            .edges()
            .iter()
            .any(|&e| g.edge_len(e).denom().is_multiple_of(&bp));
        if !clash && !used.contains(&p) {
            return p;
        }
    }
}

/// Solves the chip positions of `D` loop by loop and records every loop piece
/// of `psi_0 .. psi_r`. The representatives `D_i` are checked afterwards.
pub fn build_divisor(t: &Tableau, g: &ChainOfLoops, seed: u64) -> Result<DivisorModel> {
    if t.genus() != g.genus() {
        return Err(Error::Mismatch(format!(
            "tableau has genus {}, graph has genus {}",
            t.genus(),
            g.genus()
        )));
    }
    let tbl: SlopeTable = t.to_path()?.slope_table();
    let r = tbl.rank();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chips = Vec::with_capacity(g.genus());
    let mut solutions = Vec::with_capacity(g.genus());
    let mut ambiguous = Vec::new();
    let mut linger_primes = Vec::new();
    for k in 1..=g.genus() {
        let (l, m) = (g.top_len(k), g.bottom_len(k));
        let slopes = |i: u32| (tbl.get(k - 1, i), tbl.get(k, i));
        let solve_all = |chip: Option<(bool, &Q)>| -> Option<(Vec<LoopSolution>, bool)> {
            let mut sols = Vec::new();
            let mut amb = false;
            for i in 0..=r {
                let (a, b) = slopes(i);
                let all = solve_loop(l, m, a, b, chip);
                amb |= all.len() > 1;
                sols.push(all.into_iter().next()?);
            }
            Some((sols, amb))
        };
        let (chip, sols, amb) = match tbl.step(k) {
            Step::Down => {
                let (s, amb) = solve_all(None).ok_or_else(|| Error::LoopSolve {
                    loop_index: k,
                    msg: "no loop piece without a chip".into(),
                })?;
                (None, s, amb)
            }
            Step::Coordinate(j) => {
                let (a, _) = slopes(j - 1);
                let mut feasible = ascent_positions(l, m, a)
                    .into_iter()
                    .filter_map(|(top, x)| solve_all(Some((top, &x))).map(|s| (top, x, s)));
                let (top, x, (s, amb)) = feasible.next().ok_or_else(|| Error::LoopSolve {
                    loop_index: k,
                    msg: format!("no chip position lets psi_{} ascend", j - 1),
                })?;
                let amb = amb || feasible.next().is_some();
                let edge = if top { Edge::Top(k) } else { Edge::Bottom(k) };
                (Some(GraphPoint::new(edge, x)), s, amb)
            }
            Step::Linger => {
                let p = pick_linger_prime(&mut rng, g, &linger_primes);
                linger_primes.push(p);
                let x = l * frac(1, 3) + frac(1, p as i64);
                let (s, amb) = solve_all(Some((true, &x))).ok_or_else(|| Error::LoopSolve {
                    loop_index: k,
                    msg: format!(
                        "lingering chip at {} admits no loop piece",
                        exact::to_string(&x)
                    ),
                })?;
                (Some(GraphPoint::new(Edge::Top(k), x)), s, amb)
            }
        };
        if amb {
            ambiguous.push(k);
        }
        chips.push(chip);
        solutions.push(sols);
    }
    let model = DivisorModel {
        r,
        chips,
        solutions,
        ambiguous,
        linger_primes,
    };
    crate::plfun::verify_representatives(&model, &tbl, g)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parameters::ParameterQuadruple;
    use crate::series::standard_tableau;

    #[test]
    fn canonical_chip_count() {
        let p = ParameterQuadruple::from_rsrho(2, 1, 0, 3).unwrap();
        let g = ChainOfLoops::instantiate_admissible(&p, None).unwrap();
        let t = standard_tableau(&p).unwrap();
        let d = build_divisor(&t, &g, 0).unwrap();
        assert_eq!(d.degree(), p.d as usize);
        assert!(d.chip(1).is_some() && d.chip(2).is_some() && d.chip(3).is_none());
        assert!(d.ambiguous_loops().is_empty());
        // psi_0 ascends on loop 1 with the chip at l - p_0(0) m on the top edge
        let x = q(4) - q(2) * g.bottom_len(1);
        assert_eq!(d.chip(1).unwrap(), &GraphPoint::new(Edge::Top(1), x));
    }

    #[test]
    fn down_loop_sink() {
        let (l, m) = (q(4), frac(1, 7));
        let sols = solve_loop(&l, &m, 3, 2, None);
        assert_eq!(sols.len(), 1);
        let s = &sols[0];
        assert_eq!(s.top.slopes, vec![1, 0]);
        assert_eq!(s.top.breaks, vec![q(2) * &m]);
        assert_eq!(s.top.integral(&l), s.bottom.integral(&m));
    }

    #[test]
    fn edge_profile_merges_events() {
        let p =
            EdgeProfile::from_events(&q(3), 2, vec![(q(1), 1), (q(1), -1), (q(0), -1), (q(3), 5)]);
        assert_eq!(p, EdgeProfile::constant_slope(1));
        assert_eq!(p.integral(&q(3)), q(3));
    }

    #[test]
    fn linger_seed_changes_position_only() {
        let p = ParameterQuadruple::from_rsrho(3, 1, 1, 3).unwrap();
        let g = ChainOfLoops::instantiate_admissible(&p, None).unwrap();
        let t = Tableau::new(
            vec![vec![1], vec![3], vec![4], vec![5]],
            [2].into_iter().collect(),
        )
        .unwrap();
        let a = build_divisor(&t, &g, 1).unwrap();
        let b = build_divisor(&t, &g, 1).unwrap();
        assert_eq!(a.chip(2), b.chip(2));
        assert_eq!(a.degree(), p.d as usize);
        assert_eq!(a.linger_primes().len(), 1);
    }
}
