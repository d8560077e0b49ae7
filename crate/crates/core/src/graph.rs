//! The metric chain of loops with bridges.
//!
//! Vertices are `w_0..w_g` (left end of each bridge) and `v_1..v_{g+1}`
//! (right end of each bridge). Bridge `k` joins `w_k` to `v_{k+1}`; the top
//! and bottom edges of loop `k` both run from `v_k` to `w_k`. Every length is
//! an exact rational.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, q, Q};
use crate::parameters::ParameterQuadruple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Bridge(usize),
    Top(usize),
    Bottom(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Vertex {
    W(usize),
    V(usize),
}

/// A point given by an edge and the distance from that edge's left endpoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GraphPoint {
    pub edge: Edge,
    #[serde(with = "exact::serde_q")]
    pub offset: Q,
}

/// Canonical form of a point: vertices are identified across edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CanonPoint {
    Vertex(Vertex),
    Interior(Edge, Q),
}

impl GraphPoint {
    pub fn new(edge: Edge, offset: Q) -> Self {
        Self { edge, offset }
    }
}

/// `Gamma_[lo, hi] = gamma_lo ⊔ ... ⊔ gamma_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceRange {
    pub lo: usize,
    pub hi: usize,
}

impl PieceRange {
    pub fn contains(&self, g: &ChainOfLoops, p: &GraphPoint) -> bool {
        let k = g.piece_of(p);
        self.lo <= k && k <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainOfLoops {
    top: Vec<Q>,
    bottom: Vec<Q>,
    bridge: Vec<Q>,
    long_bridges: BTreeSet<usize>,
}

/// JSON form: `{"top": ["p/q", ...], "bottom": [...], "bridge": [...], "long_bridges": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    #[serde(with = "exact::serde_vec_q")]
    pub top: Vec<Q>,
    #[serde(with = "exact::serde_vec_q")]
    pub bottom: Vec<Q>,
    #[serde(with = "exact::serde_vec_q")]
    pub bridge: Vec<Q>,
    pub long_bridges: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clause {
    /// Lengths must be strictly positive.
    Positive,
    /// `4 g m_k < l_k`.
    LoopShape,
    /// `l_k << min(n_{k-1}, n_k)`.
    BridgeScale,
    /// No relation `sum c_k m_k = 0` with `|c_k| <= g + 1`.
    Genericity,
    /// Blocks are much shorter than the long bridges around them.
    BlockScale,
    /// Shape of the length arrays does not match the parameters.
    Shape,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub clause: Clause,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub violations: Vec<Violation>,
}

impl Admissibility {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, clause: Clause) -> bool {
        self.violations.iter().any(|v| v.clause == clause)
    }
}

/// The scale factor used for `x << y`, read as `y >= K x`.
pub fn scale_factor(p: &ParameterQuadruple) -> Q {
    q(10 * p.g as i64 * p.m as i64 * (p.r as i64 + p.s as i64 + 1))
}

/// Default long bridges `{alpha s : 0 <= alpha <= r + 1}`.
pub fn default_long_bridges(p: &ParameterQuadruple) -> BTreeSet<usize> {
    (0..=p.r as usize + 1).map(|a| a * p.s as usize).collect()
}

impl ChainOfLoops {
    pub fn from_lengths(
        top: Vec<Q>,
        bottom: Vec<Q>,
        bridge: Vec<Q>,
        long_bridges: BTreeSet<usize>,
    ) -> Result<Self> {
        let g = top.len();
        if bottom.len() != g || bridge.len() != g + 1 {
            return Err(Error::Mismatch(format!(
                "expected {g} bottom and {} bridge lengths, got {} and {}",
                g + 1,
                bottom.len(),
                bridge.len()
            )));
        }
        if let Some(&k) = long_bridges.iter().find(|&&k| k > g) {
            return Err(Error::BridgeOutOfRange { index: k, max: g });
        }
        Ok(Self {
            top,
            bottom,
            bridge,
            long_bridges,
        })
    }

    /// Concrete admissible lengths: `m_k = 1/q_k` for the primes `q_k > g + 1`,
    /// `l_k = 4`, ordinary bridges `K (sum l + sum m + g)` and long bridges
    /// `K (sum l + sum m + (g + 1) n)` with `n` the ordinary bridge length.
    pub fn instantiate_admissible(
        p: &ParameterQuadruple,
        long_bridges: Option<&BTreeSet<usize>>,
    ) -> Result<Self> {
        let g = p.genus();
        let long = match long_bridges {
            Some(set) => {
                if let Some(&k) = set.iter().find(|&&k| k > g) {
                    return Err(Error::BridgeOutOfRange { index: k, max: g });
                }
                set.clone()
            }
            None => default_long_bridges(p)
                .into_iter()
                .filter(|&k| k <= g)
                .collect(),
        };
        let primes = exact::primes_above(g as u64 + 1, g);
        let bottom: Vec<Q> = primes.iter().map(|&pr| exact::frac(1, pr as i64)).collect();
        let top: Vec<Q> = vec![q(4); g];
        let k = scale_factor(p);
        let loops: Q = top.iter().chain(bottom.iter()).sum();
        let ordinary = &k * (&loops + q(g as i64));
        let long_len = &k * (&loops + q(g as i64 + 1) * &ordinary);
        let bridge = (0..=g)
            .map(|i| {
                if long.contains(&i) {
                    long_len.clone()
                } else {
                    ordinary.clone()
                }
            })
            .collect();
        Self::from_lengths(top, bottom, bridge, long)
    }

    pub fn genus(&self) -> usize {
        self.top.len()
    }

    pub fn top_len(&self, k: usize) -> &Q {
        &self.top[k - 1]
    }

    pub fn bottom_len(&self, k: usize) -> &Q {
        &self.bottom[k - 1]
    }

    pub fn bridge_len(&self, k: usize) -> &Q {
        &self.bridge[k]
    }

    pub fn long_bridges(&self) -> &BTreeSet<usize> {
        &self.long_bridges
    }

    pub fn edge_len(&self, e: Edge) -> &Q {
        match e {
            Edge::Bridge(k) => self.bridge_len(k),
            Edge::Top(k) => self.top_len(k),
            Edge::Bottom(k) => self.bottom_len(k),
        }
    }

    /// All edges in a fixed order: bridges, then each loop's top and bottom.
    pub fn edges(&self) -> Vec<Edge> {
        let g = self.genus();
        let mut out: Vec<Edge> = (0..=g).map(Edge::Bridge).collect();
        for k in 1..=g {
            out.push(Edge::Top(k));
            out.push(Edge::Bottom(k));
        }
        out
    }

    pub fn edge_index(&self, e: Edge) -> usize {
        let g = self.genus();
        match e {
            Edge::Bridge(k) => k,
            Edge::Top(k) => g + 1 + 2 * (k - 1),
            Edge::Bottom(k) => g + 2 + 2 * (k - 1),
        }
    }

    pub fn endpoints(&self, e: Edge) -> (Vertex, Vertex) {
        match e {
            Edge::Bridge(k) => (Vertex::W(k), Vertex::V(k + 1)),
            Edge::Top(k) | Edge::Bottom(k) => (Vertex::V(k), Vertex::W(k)),
        }
    }

    /// Edges at a vertex, with `true` when the edge starts there.
    pub fn incident(&self, v: Vertex) -> Vec<(Edge, bool)> {
        let g = self.genus();
        match v {
            Vertex::W(k) => {
                let mut out = vec![(Edge::Bridge(k), true)];
                if k >= 1 {
                    out.push((Edge::Top(k), false));
                    out.push((Edge::Bottom(k), false));
                }
                out
            }
            Vertex::V(k) => {
                let mut out = vec![(Edge::Bridge(k - 1), false)];
                if k <= g {
                    out.push((Edge::Top(k), true));
                    out.push((Edge::Bottom(k), true));
                }
                out
            }
        }
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        let g = self.genus();
        let mut out: Vec<Vertex> = (0..=g).map(Vertex::W).collect();
        out.extend((1..=g + 1).map(Vertex::V));
        out
    }

    pub fn vertex_point(&self, v: Vertex) -> GraphPoint {
        match v {
            Vertex::W(k) => GraphPoint::new(Edge::Bridge(k), Q::zero()),
            Vertex::V(k) => GraphPoint::new(Edge::Bridge(k - 1), self.bridge_len(k - 1).clone()),
        }
    }

    /// The midpoint `u_k` of bridge `k`.
    pub fn midpoint(&self, k: usize) -> GraphPoint {
        GraphPoint::new(Edge::Bridge(k), exact::half(self.bridge_len(k)))
    }

    pub fn canonical(&self, p: &GraphPoint) -> CanonPoint {
        let (a, b) = self.endpoints(p.edge);
        if p.offset.is_zero() {
            CanonPoint::Vertex(a)
        } else if &p.offset == self.edge_len(p.edge) {
            CanonPoint::Vertex(b)
        } else {
            CanonPoint::Interior(p.edge, p.offset.clone())
        }
    }

    pub fn point_eq(&self, a: &GraphPoint, b: &GraphPoint) -> bool {
        self.canonical(a) == self.canonical(b)
    }

    pub fn contains_point(&self, p: &GraphPoint) -> bool {
        let ok_edge = match p.edge {
            Edge::Bridge(k) => k <= self.genus(),
            Edge::Top(k) | Edge::Bottom(k) => k >= 1 && k <= self.genus(),
        };
        ok_edge && !p.offset.is_negative() && &p.offset <= self.edge_len(p.edge)
    }

    /// The pieces `gamma_0 .. gamma_{g+1}`.
    pub fn decompose(&self) -> Vec<PieceRange> {
        (0..=self.genus() + 1)
            .map(|k| PieceRange { lo: k, hi: k })
            .collect()
    }

    /// Index of the piece containing `p`. Each `u_k` lies in `gamma_{k+1}`.
    pub fn piece_of(&self, p: &GraphPoint) -> usize {
        match p.edge {
            Edge::Top(k) | Edge::Bottom(k) => k,
            Edge::Bridge(k) => {
                if p.offset < exact::half(self.bridge_len(k)) {
                    k
                } else {
                    k + 1
                }
            }
        }
    }

    /// Blocks as `(a, b)` pairs of consecutive long bridges; the block holds loops `a+1..=b`.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let l: Vec<usize> = self.long_bridges.iter().copied().collect();
        l.windows(2)
            .map(|w| (w[0], w[1]))
            .filter(|(a, b)| b > a)
            .collect()
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            top: self.top.clone(),
            bottom: self.bottom.clone(),
            bridge: self.bridge.clone(),
            long_bridges: self.long_bridges.iter().copied().collect(),
        }
    }

    pub fn from_file(f: GraphFile) -> Result<Self> {
        Self::from_lengths(
            f.top,
            f.bottom,
            f.bridge,
            f.long_bridges.into_iter().collect(),
        )
    }

    pub fn verify_admissible(&self, p: &ParameterQuadruple) -> Admissibility {
        let mut violations = Vec::new();
        let mut push = |clause, detail: String| violations.push(Violation { clause, detail });
        let g = self.genus();
        if g != p.genus() {
            push(
                Clause::Shape,
                format!("graph has genus {g}, parameters say {}", p.g),
            );
            return Admissibility { violations };
        }
        for e in self.edges() {
            if !self.edge_len(e).is_positive() {
                push(Clause::Positive, format!("{e:?} has non-positive length"));
            }
        }
        if !violations.is_empty() {
            return Admissibility { violations };
        }
        let k = scale_factor(p);
        let mut push = |clause, detail: String| violations.push(Violation { clause, detail });
        let four_g = q(4 * g as i64);
        for i in 1..=g {
            if &four_g * self.bottom_len(i) >= *self.top_len(i) {
                push(Clause::LoopShape, format!("loop {i}: 4g m_k >= l_k"));
            }
            let bridges = self.bridge_len(i - 1).min(self.bridge_len(i));
            if &k * self.top_len(i) > *bridges {
                push(
                    Clause::BridgeScale,
                    format!("loop {i}: l_k not << adjacent bridges"),
                );
            }
        }
        match find_relation(&self.bottom, g as i64 + 1) {
            RelationSearch::None => {}
            RelationSearch::Found(c) => push(
                Clause::Genericity,
                format!("relation with coefficients {c:?}"),
            ),
            RelationSearch::Undecided(n) => push(
                Clause::Genericity,
                format!("relation search over {n} unresolved lengths exceeds budget"),
            ),
        }
        for (a, b) in self.blocks() {
            let mut size: Q = (a + 1..=b).map(|i| self.top_len(i).clone()).sum();
            size += (a + 1..b).map(|i| self.bridge_len(i).clone()).sum::<Q>();
            let bound = self.bridge_len(a).min(self.bridge_len(b));
            if &k * &size > *bound {
                push(
                    Clause::BlockScale,
                    format!("block {}..={b} not << bridges {a}, {b}", a + 1),
                );
            }
        }
        Admissibility { violations }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelationSearch {
    None,
    Found(Vec<i64>),
    Undecided(usize),
}

const RELATION_BUDGET: f64 = 4.0e6;

/// Decide whether `sum c_k x_k = 0` has a non-trivial solution with `|c_k| <= bound`.
///
/// Coefficients that are forced to vanish by a denominator factor not shared
/// with the remaining lengths are eliminated first; the rest is settled by a
/// meet-in-the-middle enumeration.
pub fn find_relation(xs: &[Q], bound: i64) -> RelationSearch {
    let n = xs.len();
    let mut alive: Vec<bool> = vec![true; n];
    loop {
        let mut changed = false;
        for k in 0..n {
            if !alive[k] {
                continue;
            }
            let others = (0..n)
                .filter(|&j| j != k && alive[j])
                .fold(BigInt::one(), |acc, j| acc.lcm(xs[j].denom()));
            let dk = xs[k].denom();
            let own = dk / dk.gcd(&others);
            if own > BigInt::from(bound) {
                alive[k] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let idx: Vec<usize> = (0..n).filter(|&k| alive[k]).collect();
    if idx.is_empty() {
        return RelationSearch::None;
    }
    if idx.iter().any(|&k| xs[k].is_zero()) {
        let mut c = vec![0; n];
        c[idx.iter().copied().find(|&k| xs[k].is_zero()).unwrap()] = 1;
        return RelationSearch::Found(c);
    }
    let width = (2 * bound + 1) as f64;
    let half = idx.len().div_ceil(2);
    if width.powi(half as i32) > RELATION_BUDGET {
        return RelationSearch::Undecided(idx.len());
    }
    let lcm = idx
        .iter()
        .fold(BigInt::one(), |acc, &k| acc.lcm(xs[k].denom()));
    let ints: Vec<BigInt> = idx
        .iter()
        .map(|&k| (&xs[k] * Q::from_integer(lcm.clone())).to_integer())
        .collect();
    let (left, right) = ints.split_at(ints.len() / 2);
    let left_sums = enumerate_sums(left, bound);
    let mut table: HashMap<BigInt, Vec<i64>> = HashMap::new();
    for (sum, coeffs) in left_sums {
        let nonzero = coeffs.iter().any(|&c| c != 0);
        let entry = table.entry(sum).or_insert_with(|| coeffs.clone());
        if nonzero && entry.iter().all(|&c| c == 0) {
            *entry = coeffs;
        }
    }
    for (sum, coeffs) in enumerate_sums(right, bound) {
        let want = -sum;
        if let Some(lc) = table.get(&want) {
            let nontrivial = lc.iter().chain(coeffs.iter()).any(|&c| c != 0);
            if nontrivial {
                let mut c = vec![0; n];
                for (pos, &k) in idx.iter().enumerate() {
                    c[k] = if pos < left.len() {
                        lc[pos]
                    } else {
                        coeffs[pos - left.len()]
                    };
                }
                return RelationSearch::Found(c);
            }
        }
    }
    RelationSearch::None
}

fn enumerate_sums(xs: &[BigInt], bound: i64) -> Vec<(BigInt, Vec<i64>)> {
    let mut out = vec![(BigInt::zero(), Vec::new())];
    for x in xs {
        let mut next = Vec::with_capacity(out.len() * (2 * bound as usize + 1));
        for (sum, coeffs) in &out {
            for c in -bound..=bound {
                let mut cc = coeffs.clone();
                cc.push(c);
                next.push((sum + x * BigInt::from(c), cc));
            }
        }
        out = next;
    }
    out
}

/// Approximate value for display purposes only.
pub fn approx(x: &Q) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}
