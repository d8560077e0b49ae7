//! Exact piecewise-linear functions on the chain of loops.
//!
//! A function is stored edge by edge: its value at the edge's left endpoint
//! and an [`EdgeProfile`] of integer slopes. The order of a function at a
//! point is minus the sum of its outgoing slopes, so a concave kink has
//! positive order and `D + div psi_i = D_i` holds with `D_i` effective.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, q, Q};
use crate::graph::{CanonPoint, ChainOfLoops, Edge, GraphPoint, Vertex};
use crate::series::{DivisorModel, EdgeProfile, MultiSetIndex, SlopeTable};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeFn {
    pub edge: Edge,
    #[serde(with = "exact::serde_q")]
    pub start: Q,
    #[serde(flatten)]
    pub profile: EdgeProfile,
}

impl EdgeFn {
    fn segment_index(&self, x: &Q) -> usize {
        self.profile.breaks.partition_point(|b| b <= x)
    }

    /// Slope on the segment starting at `x`.
    pub fn slope_right(&self, x: &Q) -> i64 {
        self.profile.slopes[self.segment_index(x)]
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut v = self.start.clone();
        let mut prev = Q::zero();
        for (k, b) in self.profile.breaks.iter().enumerate() {
            if b >= x {
                return v + q(self.profile.slopes[k]) * (x - &prev);
            }
            v += q(self.profile.slopes[k]) * (b - &prev);
            prev = b.clone();
        }
        v + q(self.profile.end_slope()) * (x - &prev)
    }

    /// Segments `(a, b, value at a, slope)` covering `[lo, hi]`.
    pub fn segments(&self, lo: &Q, hi: &Q) -> Vec<(Q, Q, Q, i64)> {
        let mut cuts: Vec<Q> = vec![lo.clone()];
        cuts.extend(
            self.profile
                .breaks
                .iter()
                .filter(|b| *b > lo && *b < hi)
                .cloned(),
        );
        cuts.push(hi.clone());
        let mut v = self.eval(lo);
        let mut out = Vec::with_capacity(cuts.len());
        for w in cuts.windows(2) {
            let s = self.slope_right(&w[0]);
            out.push((w[0].clone(), w[1].clone(), v.clone(), s));
            v += q(s) * (&w[1] - &w[0]);
        }
        out
    }

    fn combine(&self, other: &Self, sign: i64) -> Self {
        let mut breaks: Vec<Q> = self
            .profile
            .breaks
            .iter()
            .chain(&other.profile.breaks)
            .cloned()
            .collect();
        breaks.sort();
        breaks.dedup();
        let mut out_b = Vec::new();
        let mut out_s = vec![self.slope_right(&Q::zero()) + sign * other.slope_right(&Q::zero())];
        for b in breaks {
            let s = self.slope_right(&b) + sign * other.slope_right(&b);
            if s != *out_s.last().unwrap() {
                out_b.push(b);
                out_s.push(s);
            }
        }
        Self {
            edge: self.edge,
            start: &self.start + q(sign) * &other.start,
            profile: EdgeProfile {
                breaks: out_b,
                slopes: out_s,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PLFunction {
    edges: Vec<EdgeFn>,
}

impl PLFunction {
    pub fn constant(g: &ChainOfLoops, c: Q) -> Self {
        let edges = g
            .edges()
            .into_iter()
            .map(|edge| EdgeFn {
                edge,
                start: c.clone(),
                profile: EdgeProfile::constant_slope(0),
            })
            .collect();
        Self { edges }
    }

    pub fn from_edges(g: &ChainOfLoops, mut edges: Vec<EdgeFn>) -> Result<Self> {
        edges.sort_by_key(|e| g.edge_index(e.edge));
        if edges.iter().map(|e| e.edge).ne(g.edges()) {
            return Err(Error::Mismatch(
                "function does not cover every edge exactly once".into(),
            ));
        }
        let f = Self { edges };
        f.check_continuity(g)?;
        Ok(f)
    }

    pub fn edge(&self, g: &ChainOfLoops, e: Edge) -> &EdgeFn {
        &self.edges[g.edge_index(e)]
    }

    pub fn edge_fns(&self) -> &[EdgeFn] {
        &self.edges
    }

    pub fn eval(&self, g: &ChainOfLoops, p: &GraphPoint) -> Q {
        self.edge(g, p.edge).eval(&p.offset)
    }

    pub fn eval_vertex(&self, g: &ChainOfLoops, v: Vertex) -> Q {
        self.eval(g, &g.vertex_point(v))
    }

    pub fn check_continuity(&self, g: &ChainOfLoops) -> Result<()> {
        for v in g.vertices() {
            let mut vals = g.incident(v).into_iter().map(|(e, starts)| {
                let f = self.edge(g, e);
                if starts {
                    f.start.clone()
                } else {
                    f.eval(g.edge_len(e))
                }
            });
            let first = vals.next().unwrap();
            if vals.any(|x| x != first) {
                return Err(Error::Internal(format!("discontinuity at {v:?}")));
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            edges: self
                .edges
                .iter()
                .zip(&other.edges)
                .map(|(a, b)| a.combine(b, 1))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            edges: self
                .edges
                .iter()
                .zip(&other.edges)
                .map(|(a, b)| a.combine(b, -1))
                .collect(),
        }
    }

    pub fn shifted(&self, c: &Q) -> Self {
        let mut out = self.clone();
        out.edges.iter_mut().for_each(|e| e.start += c);
        out
    }

    /// Slope of the function on bridge `k` just to the right of its midpoint.
    pub fn bridge_slope_at_midpoint(&self, g: &ChainOfLoops, k: usize) -> Result<i64> {
        let f = self.edge(g, Edge::Bridge(k));
        let mid = exact::half(g.bridge_len(k));
        if f.profile.breaks.contains(&mid) {
            return Err(Error::KinkAtMidpoint(k));
        }
        Ok(f.slope_right(&mid))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}

/// `psi_0 .. psi_r`, normalized to vanish at `w_0`.
#[derive(Debug, Clone)]
pub struct PsiFamily {
    psi: Vec<PLFunction>,
}

impl PsiFamily {
    pub fn build(d: &DivisorModel, tbl: &SlopeTable, g: &ChainOfLoops) -> Result<Self> {
        let psi = (0..=d.rank())
            .map(|i| build_psi(i, d, tbl, g))
            .collect::<Result<_>>()?;
        Ok(Self { psi })
    }

    pub fn psi(&self, i: u32) -> &PLFunction {
        &self.psi[i as usize]
    }

    /// `psi_I = sum_{i in I} psi_i`.
    pub fn psi_multi(&self, idx: &MultiSetIndex) -> PLFunction {
        let mut it = idx.entries().iter().map(|&i| &self.psi[i as usize]);
        let first = it.next().expect("non-empty multiset").clone();
        it.fold(first, |acc, f| acc.add(f))
    }
}

pub fn build_psi(
    i: u32,
    d: &DivisorModel,
    tbl: &SlopeTable,
    g: &ChainOfLoops,
) -> Result<PLFunction> {
    let n = g.genus();
    let mut edges = Vec::with_capacity(3 * n + 1);
    let mut val = Q::zero();
    for k in 0..=n {
        let slope = tbl.get(k, i);
        edges.push(EdgeFn {
            edge: Edge::Bridge(k),
            start: val.clone(),
            profile: EdgeProfile::constant_slope(slope),
        });
        val += q(slope) * g.bridge_len(k);
        if k == n {
            break;
        }
        let sol = d.solution(k + 1, i);
        let top_end = &val + sol.top.integral(g.top_len(k + 1));
        if top_end != &val + sol.bottom.integral(g.bottom_len(k + 1)) {
            return Err(Error::LoopSolve {
                loop_index: k + 1,
                msg: format!("psi_{i} is discontinuous"),
            });
        }
        edges.push(EdgeFn {
            edge: Edge::Top(k + 1),
            start: val.clone(),
            profile: sol.top.clone(),
        });
        edges.push(EdgeFn {
            edge: Edge::Bottom(k + 1),
            start: val.clone(),
            profile: sol.bottom.clone(),
        });
        val = top_end;
    }
    PLFunction::from_edges(g, edges)
}

pub fn build_psi_multi(
    idx: &MultiSetIndex,
    d: &DivisorModel,
    tbl: &SlopeTable,
    g: &ChainOfLoops,
) -> Result<PLFunction> {
    let fam = PsiFamily::build(d, tbl, g)?;
    Ok(fam.psi_multi(idx))
}

/// `div f` as a map from points to orders; zero orders are omitted.
pub fn divisor_of(f: &PLFunction, g: &ChainOfLoops) -> BTreeMap<CanonPoint, i64> {
    let mut out = BTreeMap::new();
    for v in g.vertices() {
        let outgoing: i64 = g
            .incident(v)
            .into_iter()
            .map(|(e, starts)| {
                let p = &f.edge(g, e).profile;
                if starts {
                    p.start_slope()
                } else {
                    -p.end_slope()
                }
            })
            .sum();
        if outgoing != 0 {
            out.insert(CanonPoint::Vertex(v), -outgoing);
        }
    }
    for ef in &f.edges {
        for (k, b) in ef.profile.breaks.iter().enumerate() {
            let order = ef.profile.slopes[k] - ef.profile.slopes[k + 1];
            if order != 0 {
                out.insert(CanonPoint::Interior(ef.edge, b.clone()), order);
            }
        }
    }
    out
}

pub fn add_divisors(
    a: &BTreeMap<CanonPoint, i64>,
    b: &BTreeMap<CanonPoint, i64>,
    scale_b: i64,
) -> BTreeMap<CanonPoint, i64> {
    let mut out = a.clone();
    for (p, v) in b {
        *out.entry(p.clone()).or_insert(0) += scale_b * v;
    }
    out.retain(|_, v| *v != 0);
    out
}

/// Checks that every `D_i = D + div psi_i` is effective with the prescribed end degrees.
pub fn verify_representatives(d: &DivisorModel, tbl: &SlopeTable, g: &ChainOfLoops) -> Result<()> {
    let dd = d.divisor(g);
    let r = d.rank();
    for i in 0..=r {
        let f = build_psi(i, d, tbl, g)?;
        for k in 0..=g.genus() {
            if f.edge(g, Edge::Bridge(k)).profile.slopes != [tbl.get(k, i)] {
                return Err(Error::Internal(format!(
                    "psi_{i} has the wrong slope on bridge {k}"
                )));
            }
        }
        let di = add_divisors(&dd, &divisor_of(&f, g), 1);
        if let Some((p, v)) = di.iter().find(|(_, v)| **v < 0) {
            return Err(Error::Internal(format!("D_{i} has order {v} at {p:?}")));
        }
        let at = |v: Vertex| *di.get(&CanonPoint::Vertex(v)).unwrap_or(&0);
        if at(Vertex::W(0)) != i as i64 || at(Vertex::V(g.genus() + 1)) != (r - i) as i64 {
            return Err(Error::Internal(format!(
                "D_{i} has the wrong degree at an end vertex"
            )));
        }
    }
    Ok(())
}

/// A maximal sub-interval of an edge on which the set of minimizers is constant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopeCell {
    pub edge: Edge,
    #[serde(with = "exact::serde_q")]
    pub lo: Q,
    #[serde(with = "exact::serde_q")]
    pub hi: Q,
    /// Positions in the input family.
    pub achievers: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Envelope {
    pub theta: PLFunction,
    pub cells: Vec<EnvelopeCell>,
}

impl Envelope {
    /// First cell (in edge order) attained by a single function.
    pub fn first_unique_cell(&self) -> Option<&EnvelopeCell> {
        self.cells.iter().find(|c| c.achievers.len() < 2)
    }

    pub fn min_attained_twice(&self) -> bool {
        self.first_unique_cell().is_none()
    }

    /// Achievers at a point: the union over every cell whose closure contains it.
    pub fn achievers_at(&self, g: &ChainOfLoops, p: &GraphPoint) -> Vec<usize> {
        let target = g.canonical(p);
        let mut out: Vec<usize> = Vec::new();
        for c in &self.cells {
            let hit = [&c.lo, &c.hi]
                .iter()
                .any(|x| g.canonical(&GraphPoint::new(c.edge, (*x).clone())) == target)
                || (c.edge == p.edge && c.lo <= p.offset && p.offset <= c.hi);
            if hit {
                out.extend(&c.achievers);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Lower envelope of one edge restricted to `[lo, hi]`.
fn edge_envelope(
    edge: Edge,
    lo: &Q,
    hi: &Q,
    fns: &[&EdgeFn],
    shifts: &[Q],
) -> (EdgeFn, Vec<EnvelopeCell>) {
    let mut cuts: Vec<Q> = fns
        .iter()
        .flat_map(|f| {
            f.profile
                .breaks
                .iter()
                .filter(|b| *b > lo && *b < hi)
                .cloned()
        })
        .collect();
    cuts.push(lo.clone());
    cuts.push(hi.clone());
    cuts.sort();
    cuts.dedup();
    let mut vals: Vec<Q> = fns
        .iter()
        .zip(shifts)
        .map(|(f, b)| f.eval(lo) + b)
        .collect();
    let mut cells: Vec<EnvelopeCell> = Vec::new();
    let mut theta_breaks: Vec<Q> = Vec::new();
    let mut theta_slopes: Vec<i64> = Vec::new();
    let mut theta_start: Option<Q> = None;
    for w in cuts.windows(2) {
        let (x0, x1) = (&w[0], &w[1]);
        let slopes: Vec<i64> = fns.iter().map(|f| f.slope_right(x0)).collect();
        let mut cur = x0.clone();
        let mut cv = vals.clone();
        loop {
            let minv = cv.iter().min().unwrap().clone();
            let smin = (0..fns.len())
                .filter(|&j| cv[j] == minv)
                .map(|j| slopes[j])
                .min()
                .unwrap();
            let ach: Vec<usize> = (0..fns.len())
                .filter(|&j| cv[j] == minv && slopes[j] == smin)
                .collect();
            let mut end = x1.clone();
            for j in 0..fns.len() {
                if slopes[j] < smin {
                    let x = &cur + (&cv[j] - &minv) / q(smin - slopes[j]);
                    if x < end {
                        end = x;
                    }
                }
            }
            if theta_start.is_none() {
                theta_start = Some(minv.clone());
            }
            match theta_slopes.last() {
                Some(&s) if s == smin => {}
                Some(_) => {
                    theta_breaks.push(cur.clone());
                    theta_slopes.push(smin);
                }
                None => theta_slopes.push(smin),
            }
            match cells.last_mut() {
                Some(c) if c.achievers == ach => c.hi = end.clone(),
                _ => cells.push(EnvelopeCell {
                    edge,
                    lo: cur.clone(),
                    hi: end.clone(),
                    achievers: ach,
                }),
            }
            let dx = &end - &cur;
            for j in 0..fns.len() {
                cv[j] += q(slopes[j]) * &dx;
            }
            cur = end;
            if &cur == x1 {
                break;
            }
        }
        vals = cv;
    }
    let theta = EdgeFn {
        edge,
        start: theta_start.unwrap_or_default(),
        profile: EdgeProfile {
            breaks: theta_breaks,
            slopes: theta_slopes,
        },
    };
    (theta, cells)
}

/// `theta = min_j (f_j + b_j)` with the cells of constant minimizer sets.
pub fn lower_envelope(fns: &[&PLFunction], shifts: &[Q], g: &ChainOfLoops) -> Envelope {
    assert_eq!(fns.len(), shifts.len());
    assert!(!fns.is_empty());
    let mut theta_edges = Vec::new();
    let mut cells = Vec::new();
    for e in g.edges() {
        let efs: Vec<&EdgeFn> = fns.iter().map(|f| f.edge(g, e)).collect();
        let (t, c) = edge_envelope(e, &Q::zero(), g.edge_len(e), &efs, shifts);
        theta_edges.push(t);
        cells.extend(c);
    }
    Envelope {
        theta: PLFunction { edges: theta_edges },
        cells,
    }
}

/// Envelope cells over an explicit list of edge intervals.
pub fn lower_envelope_on(
    fns: &[&PLFunction],
    shifts: &[Q],
    g: &ChainOfLoops,
    region: &[(Edge, Q, Q)],
) -> Vec<EnvelopeCell> {
    region
        .iter()
        .flat_map(|(e, lo, hi)| {
            let efs: Vec<&EdgeFn> = fns.iter().map(|f| f.edge(g, *e)).collect();
            edge_envelope(*e, lo, hi, &efs, shifts).1
        })
        .collect()
}

/// The closed piece around loop `t`: half bridges on both sides plus the loop edges.
pub fn loop_region(g: &ChainOfLoops, t: usize) -> Vec<(Edge, Q, Q)> {
    vec![
        (
            Edge::Bridge(t - 1),
            exact::half(g.bridge_len(t - 1)),
            g.bridge_len(t - 1).clone(),
        ),
        (Edge::Top(t), Q::zero(), g.top_len(t).clone()),
        (Edge::Bottom(t), Q::zero(), g.bottom_len(t).clone()),
        (Edge::Bridge(t), Q::zero(), exact::half(g.bridge_len(t))),
    ]
}

/// Slopes of `theta` at the bridge midpoints and the degrees `delta_t` of
/// `mD + div theta` on each piece, computed directly and by the slope formula.
pub fn delta_vector(
    theta: &PLFunction,
    d: &DivisorModel,
    g: &ChainOfLoops,
    m: u32,
) -> Result<(Vec<i64>, Vec<i64>)> {
    let n = g.genus();
    let sigma: Vec<i64> = (0..=n)
        .map(|k| theta.bridge_slope_at_midpoint(g, k))
        .collect::<Result<_>>()?;
    let m = m as i64;
    let chips_on = |t: usize| -> i64 {
        if t == 0 {
            d.rank() as i64
        } else if t <= n {
            d.chip(t).is_some() as i64
        } else {
            0
        }
    };
    let formula: Vec<i64> = (0..=n + 1)
        .map(|t| {
            let before = if t == 0 { 0 } else { sigma[t - 1] };
            let after = if t == n + 1 { 0 } else { sigma[t] };
            before - after + m * chips_on(t)
        })
        .collect();
    let delta_div = add_divisors(&divisor_of(theta, g), &d.divisor(g), m);
    let mut direct = vec![0i64; n + 2];
    for (p, v) in &delta_div {
        direct[piece_of_canon(g, p)] += v;
    }
    if direct != formula {
        return Err(Error::Internal(format!(
            "delta mismatch: direct {direct:?}, formula {formula:?}"
        )));
    }
    Ok((sigma, formula))
}

pub fn piece_of_canon(g: &ChainOfLoops, p: &CanonPoint) -> usize {
    match p {
        CanonPoint::Vertex(Vertex::W(k)) | CanonPoint::Vertex(Vertex::V(k)) => *k,
        CanonPoint::Interior(e, x) => g.piece_of(&GraphPoint::new(*e, x.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::frac;
    use crate::parameters::ParameterQuadruple;
    use crate::series::{build_divisor, standard_tableau};

    fn canonical() -> (ParameterQuadruple, ChainOfLoops, DivisorModel, SlopeTable) {
        let p = ParameterQuadruple::from_rsrho(2, 1, 0, 3).unwrap();
        let g = ChainOfLoops::instantiate_admissible(&p, None).unwrap();
        let t = standard_tableau(&p).unwrap();
        let d = build_divisor(&t, &g, 0).unwrap();
        (p, g, d, t.to_path().unwrap().slope_table())
    }

    #[test]
    fn psi_r_is_constant() {
        let (_, g, d, tbl) = canonical();
        let f = build_psi(2, &d, &tbl, &g).unwrap();
        assert_eq!(f, PLFunction::constant(&g, Q::zero()));
        assert!(divisor_of(&f, &g).is_empty());
    }

    #[test]
    fn div_psi_0_plus_d() {
        let (_, g, d, tbl) = canonical();
        let f = build_psi(0, &d, &tbl, &g).unwrap();
        let d0 = add_divisors(&d.divisor(&g), &divisor_of(&f, &g), 1);
        assert!(d0.values().all(|&v| v > 0));
        assert_eq!(d0.values().sum::<i64>(), 4);
        assert_eq!(divisor_of(&f, &g).values().sum::<i64>(), 0);
    }

    #[test]
    fn kink_orders() {
        let p = ParameterQuadruple::from_rsrho(1, 1, 0, 1).unwrap();
        let g = ChainOfLoops::instantiate_admissible(&p, None).unwrap();
        let mut f = PLFunction::constant(&g, Q::zero());
        // slope -1 then +1 on bridge 0: a convex kink, slope change +2
        let len = g.bridge_len(0).clone();
        let mid = exact::half(&len);
        f.edges[0].profile = EdgeProfile {
            breaks: vec![mid.clone()],
            slopes: vec![-1, 1],
        };
        let div = divisor_of(&f, &g);
        assert_eq!(
            div.get(&CanonPoint::Interior(Edge::Bridge(0), mid)),
            Some(&-2)
        );
    }

    #[test]
    fn envelope_of_opposite_lines() {
        let p = ParameterQuadruple::from_rsrho(1, 1, 0, 1).unwrap();
        let g = ChainOfLoops::instantiate_admissible(&p, None).unwrap();
        let len = q(2);
        let up = EdgeFn {
            edge: Edge::Top(1),
            start: Q::zero(),
            profile: EdgeProfile::constant_slope(1),
        };
        let down = EdgeFn {
            edge: Edge::Top(1),
            start: q(2),
            profile: EdgeProfile::constant_slope(-1),
        };
        let (theta, cells) = edge_envelope(
            Edge::Top(1),
            &Q::zero(),
            &len,
            &[&up, &down],
            &[Q::zero(), Q::zero()],
        );
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].hi, q(1));
        assert_eq!(cells[0].achievers, vec![0]);
        assert_eq!(cells[1].achievers, vec![1]);
        assert_eq!(theta.profile.breaks, vec![q(1)]);
        let _ = g;
    }

    #[test]
    fn equalized_pair_ties_everywhere() {
        let (_, g, d, tbl) = canonical();
        let fam = PsiFamily::build(&d, &tbl, &g).unwrap();
        let f = fam.psi(0).clone();
        let h = f.shifted(&frac(7, 3));
        let env = lower_envelope(&[&f, &h], &[frac(7, 3), Q::zero()], &g);
        assert!(env.cells.iter().all(|c| c.achievers.len() == 2));
        assert!(env.min_attained_twice());
    }

    #[test]
    fn delta_formula_example() {
        assert_eq!(6 - 7 + 3, 2);
        let (p, g, d, tbl) = canonical();
        let fam = PsiFamily::build(&d, &tbl, &g).unwrap();
        let fns: Vec<PLFunction> = MultiSetIndex::all(2, 3)
            .iter()
            .map(|i| fam.psi_multi(i))
            .collect();
        let refs: Vec<&PLFunction> = fns.iter().collect();
        let shifts = vec![Q::zero(); fns.len()];
        let env = lower_envelope(&refs, &shifts, &g);
        let (sigma, delta) = delta_vector(&env.theta, &d, &g, p.m).unwrap();
        assert_eq!(delta.iter().sum::<i64>(), (p.m * p.d) as i64);
        assert_eq!(sigma.len(), 4);
        let theta_div = add_divisors(&divisor_of(&env.theta, &g), &d.divisor(&g), 3);
        assert!(theta_div.values().all(|&v| v >= 0));
    }

    #[test]
    fn psi_multi_slopes_match_table() {
        let (_, g, d, tbl) = canonical();
        let fam = PsiFamily::build(&d, &tbl, &g).unwrap();
        for i in MultiSetIndex::all(2, 3) {
            let f = fam.psi_multi(&i);
            for k in 0..=3 {
                assert_eq!(
                    f.bridge_slope_at_midpoint(&g, k).unwrap(),
                    tbl.sigma_of(&i, k)
                );
            }
            let div = add_divisors(&divisor_of(&f, &g), &d.divisor(&g), 3);
            assert_eq!(div.values().sum::<i64>(), 12);
            assert!(div.values().all(|&v| v >= 0));
        }
        assert_eq!(
            fam.psi_multi(&MultiSetIndex::new(vec![2, 2, 2])),
            PLFunction::constant(&g, Q::zero())
        );
    }

    #[test]
    fn json_export() {
        let (_, g, d, tbl) = canonical();
        let f = build_psi(0, &d, &tbl, &g).unwrap();
        let v = f.to_json();
        let back: PLFunction = serde_json::from_value(v).unwrap();
        assert_eq!(back, f);
    }
}
