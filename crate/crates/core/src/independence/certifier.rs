//! Left-to-right search over slope profiles `sigma_0 .. sigma_g`.
//!
//! States at bridge `k` are the slope `sigma_k` together with the block
//! context (block, slope at the block start, guessed slope at the block end).
//! Each loop transition is filtered by the enabled rules; an empty frontier
//! is a contradiction and certifies independence.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{locally_dependent, CaseContext, Rule, RuleSet};
use crate::error::{Error, Result};
use crate::plfun::PLFunction;
use crate::series::{MultiSetIndex, Step};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum TraceStep {
    /// Admissible values of `sigma_k` before any loop is considered.
    Domain {
        bridge: usize,
        rule: Option<Rule>,
        lower: Option<i64>,
        upper: Option<i64>,
        size: usize,
    },
    /// Values of `sigma_k` reachable after the loops `1..=k`.
    Reach {
        bridge: usize,
        lower: i64,
        upper: i64,
        states: usize,
        eliminated: BTreeMap<Rule, u64>,
    },
    /// No profile survives loop `loop_index`.
    Contradiction {
        loop_index: usize,
        rules: Vec<Rule>,
        delta_max: Option<i64>,
    },
    /// Families with fewer than two functions.
    Trivial { size: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaProfile {
    pub sigma: Vec<i64>,
    pub delta: Vec<i64>,
    /// Functions permitted on each loop `1..=g` under the enabled rules.
    pub loop_candidates: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "profile", rename_all = "snake_case")]
pub enum CertOutcome {
    Independent,
    Inconclusive(SigmaProfile),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleStats {
    pub transitions: u64,
    pub eliminated: BTreeMap<Rule, u64>,
    pub local_checks: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceCertificate {
    pub rules: RuleSet,
    pub trace: Vec<TraceStep>,
    pub outcome: CertOutcome,
    pub stats: RuleStats,
}

impl IndependenceCertificate {
    pub fn is_independent(&self) -> bool {
        self.outcome == CertOutcome::Independent
    }

    pub fn domain(&self, bridge: usize) -> Option<(Option<i64>, Option<i64>)> {
        self.trace.iter().find_map(|s| match s {
            TraceStep::Domain {
                bridge: b,
                lower,
                upper,
                ..
            } if *b == bridge => Some((*lower, *upper)),
            _ => None,
        })
    }

    pub fn reach(&self, bridge: usize) -> Option<(i64, i64)> {
        self.trace.iter().find_map(|s| match s {
            TraceStep::Reach {
                bridge: b,
                lower,
                upper,
                ..
            } if *b == bridge => Some((*lower, *upper)),
            _ => None,
        })
    }

    pub fn contradiction(&self) -> Option<(usize, &[Rule], Option<i64>)> {
        self.trace.iter().find_map(|s| match s {
            TraceStep::Contradiction {
                loop_index,
                rules,
                delta_max,
            } => Some((*loop_index, rules.as_slice(), *delta_max)),
            _ => None,
        })
    }
}

type Block = Option<(usize, i64, i64)>;
type State = (i64, Block);

struct Engine<'a> {
    ctx: &'a CaseContext,
    a: &'a [MultiSetIndex],
    rules: &'a RuleSet,
    m: i64,
    sl: Vec<Vec<i64>>,
    fns: Vec<PLFunction>,
    blocks: Vec<(usize, usize)>,
    local_cache: HashMap<(usize, Vec<usize>), bool>,
    stats: RuleStats,
}

impl<'a> Engine<'a> {
    fn new(ctx: &'a CaseContext, a: &'a [MultiSetIndex], rules: &'a RuleSet) -> Self {
        let g = ctx.graph.genus();
        let sl = a
            .iter()
            .map(|i| (0..=g).map(|k| ctx.table.sigma_of(i, k)).collect())
            .collect();
        let fns = if rules.contains(Rule::C6) {
            ctx.functions(a)
        } else {
            Vec::new()
        };
        Self {
            ctx,
            a,
            rules,
            m: ctx.params.m as i64,
            sl,
            fns,
            blocks: ctx.graph.blocks(),
            local_cache: HashMap::new(),
            stats: RuleStats::default(),
        }
    }

    fn genus(&self) -> usize {
        self.ctx.graph.genus()
    }

    fn domain(&self, k: usize) -> Vec<i64> {
        let vals: Vec<i64> = self.sl.iter().map(|s| s[k]).collect();
        let (lo, hi) = (*vals.iter().min().unwrap(), *vals.iter().max().unwrap());
        (lo..=hi)
            .filter(|v| {
                !self.rules.contains(Rule::C5) || vals.iter().filter(|x| *x == v).count() >= 2
            })
            .collect()
    }

    fn delta(&self, t: usize, u: i64, v: i64) -> i64 {
        u - v + self.m * self.ctx.table.chips_on(t)
    }

    fn block_bounds(&self, blk: Block) -> Option<(usize, usize, i64, i64)> {
        blk.map(|(b, sa, sb)| (self.blocks[b].0, self.blocks[b].1, sa, sb))
    }

    /// Candidates on loop `t` for the transition `u -> v`, or the rule that kills it.
    fn loop_check(
        &mut self,
        t: usize,
        u: i64,
        v: i64,
        blk: Block,
    ) -> std::result::Result<Vec<usize>, Rule> {
        let delta = self.delta(t, u, v);
        let on = |r| self.rules.contains(r);
        if on(Rule::C4) && delta < 2 {
            return Err(Rule::C4);
        }
        let mut cand: Vec<usize> = (0..self.a.len()).collect();
        if on(Rule::C1) {
            cand.retain(|&j| self.sl[j][t - 1] <= u && self.sl[j][t] >= v);
            if cand.is_empty() {
                return Err(Rule::C1);
            }
        }
        if let (true, Some((ba, bb, sa, sb))) = (on(Rule::C2), self.block_bounds(blk)) {
            cand.retain(|&j| self.sl[j][ba] <= sa && self.sl[j][bb] >= sb);
            if cand.is_empty() {
                return Err(Rule::C2);
            }
        }
        if let (true, Some(c)) = (on(Rule::C3), self.ctx.table.column(t)) {
            let need = self.m - delta;
            cand.retain(|&j| self.a[j].count(c) as i64 >= need);
            if cand.is_empty() {
                return Err(Rule::C3);
            }
        }
        if on(Rule::C5) && cand.iter().filter(|&&j| self.sl[j][t - 1] == u).count() < 2 {
            return Err(Rule::C5);
        }
        if on(Rule::C6) && cand.len() <= super::local::LOCAL_LIMIT {
            let key = (t, cand.clone());
            let dep = match self.local_cache.get(&key) {
                Some(&d) => d,
                None => {
                    self.stats.local_checks += 1;
                    let refs: Vec<&PLFunction> = cand.iter().map(|&j| &self.fns[j]).collect();
                    let d = locally_dependent(&refs, &self.ctx.graph, t);
                    self.local_cache.insert(key, d);
                    d
                }
            };
            if !dep {
                return Err(Rule::C6);
            }
        }
        Ok(cand)
    }

    /// Block counting at the end of block `b` with boundary slopes `sa`, `sb`.
    fn block_check(&self, b: usize, sa: i64, sb: i64) -> Option<Rule> {
        if !self.rules.contains(Rule::C7) || self.m != 3 {
            return None;
        }
        let (ba, bb) = self.blocks[b];
        if (ba + 1..=bb).any(|t| self.ctx.table.step(t) == Step::Down) {
            return None;
        }
        let q: Vec<usize> = (0..self.a.len())
            .filter(|&j| self.sl[j][ba] <= sa && self.sl[j][bb] >= sb)
            .collect();
        if q.is_empty() {
            return self.rules.contains(Rule::C2).then_some(Rule::C2);
        }
        let mut common: BTreeSet<u32> = self.a[q[0]].entries().iter().copied().collect();
        for &j in &q[1..] {
            common.retain(|c| self.a[j].contains(*c));
        }
        for c in common {
            let reduced: BTreeSet<MultiSetIndex> =
                q.iter().filter_map(|&j| self.a[j].without_one(c)).collect();
            let lo = reduced
                .iter()
                .map(|i| self.ctx.table.sigma_of(i, ba))
                .min()
                .unwrap();
            let hi = reduced
                .iter()
                .map(|i| self.ctx.table.sigma_of(i, bb))
                .max()
                .unwrap();
            let bound = (bb - ba) as i64 + (hi - lo + 1);
            if reduced.len() as i64 <= bound {
                return Some(Rule::C7);
            }
        }
        None
    }

    /// States at bridge `k` with slope `v`, opening a new block context when a block starts at `k`.
    fn enter(&self, k: usize, v: i64, doms: &[Vec<i64>]) -> Vec<State> {
        match self.blocks.iter().position(|&(a, _)| a == k) {
            Some(b) => doms[self.blocks[b].1]
                .iter()
                .map(|&sb| (v, Some((b, v, sb))))
                .collect(),
            None => vec![(v, None)],
        }
    }

    fn run(mut self) -> IndependenceCertificate {
        let g = self.genus();
        let mut trace = Vec::new();
        let doms: Vec<Vec<i64>> = (0..=g).map(|k| self.domain(k)).collect();
        for (k, d) in doms.iter().enumerate() {
            trace.push(TraceStep::Domain {
                bridge: k,
                rule: self.rules.contains(Rule::C5).then_some(Rule::C5),
                lower: d.first().copied(),
                upper: d.last().copied(),
                size: d.len(),
            });
        }
        if let Some(k) = doms.iter().position(|d| d.is_empty()) {
            // no slope is possible on bridge k, so loop k + 1 cannot be entered
            trace.push(TraceStep::Contradiction {
                loop_index: (k + 1).min(g),
                rules: vec![Rule::C5],
                delta_max: None,
            });
            return self.finish(trace, CertOutcome::Independent);
        }
        let mut layers: Vec<BTreeMap<State, Option<State>>> = Vec::with_capacity(g + 1);
        let first: BTreeMap<State, Option<State>> = doms[0]
            .iter()
            .flat_map(|&v| self.enter(0, v, &doms))
            .map(|s| (s, None))
            .collect();
        if first.is_empty() {
            trace.push(TraceStep::Contradiction {
                loop_index: 0,
                rules: vec![Rule::C5],
                delta_max: None,
            });
            return self.finish(trace, CertOutcome::Independent);
        }
        layers.push(first);
        for t in 1..=g {
            let mut next: BTreeMap<State, Option<State>> = BTreeMap::new();
            let mut killed: BTreeMap<Rule, u64> = BTreeMap::new();
            let mut delta_max: Option<i64> = None;
            let cur: Vec<State> = layers[t - 1].keys().cloned().collect();
            for st in cur {
                let (u, blk) = st;
                let inside = blk.filter(|(b, _, _)| {
                    let (a, e) = self.blocks[*b];
                    a < t && t <= e
                });
                let closes = inside.is_some_and(|(b, _, _)| self.blocks[b].1 == t);
                for &v in &doms[t] {
                    if closes && Some(v) != inside.map(|x| x.2) {
                        continue;
                    }
                    self.stats.transitions += 1;
                    let d = self.delta(t, u, v);
                    delta_max = Some(delta_max.map_or(d, |m| m.max(d)));
                    if let Err(rule) = self.loop_check(t, u, v, inside) {
                        *killed.entry(rule).or_insert(0) += 1;
                        continue;
                    }
                    let carried = if closes {
                        let (b, sa, _) = inside.unwrap();
                        if let Some(rule) = self.block_check(b, sa, v) {
                            *killed.entry(rule).or_insert(0) += 1;
                            continue;
                        }
                        None
                    } else {
                        inside
                    };
                    let succ = match carried {
                        Some(c) => vec![(v, Some(c))],
                        None => self.enter(t, v, &doms),
                    };
                    for s in succ {
                        next.entry(s).or_insert(Some(st));
                    }
                }
            }
            for (r, n) in &killed {
                *self.stats.eliminated.entry(*r).or_insert(0) += n;
            }
            if next.is_empty() {
                let mut rules: Vec<Rule> = killed.keys().copied().collect();
                if doms[t].is_empty() {
                    rules.push(Rule::C5);
                    rules.sort();
                    rules.dedup();
                }
                trace.push(TraceStep::Contradiction {
                    loop_index: t,
                    rules,
                    delta_max,
                });
                return self.finish(trace, CertOutcome::Independent);
            }
            let lower = next.keys().map(|s| s.0).min().unwrap();
            let upper = next.keys().map(|s| s.0).max().unwrap();
            trace.push(TraceStep::Reach {
                bridge: t,
                lower,
                upper,
                states: next.len(),
                eliminated: killed,
            });
            layers.push(next);
        }
        let profile = self.survivor(&layers);
        self.finish(trace, CertOutcome::Inconclusive(profile))
    }

    fn survivor(&mut self, layers: &[BTreeMap<State, Option<State>>]) -> SigmaProfile {
        let g = self.genus();
        let mut states = vec![layers[g].keys().next().cloned().unwrap()];
        for t in (1..=g).rev() {
            let pred = layers[t][states.last().unwrap()].expect("back pointer");
            states.push(pred);
        }
        states.reverse();
        let sigma: Vec<i64> = states.iter().map(|s| s.0).collect();
        let r = self.ctx.params.r as i64;
        let mut delta = vec![self.m * r - sigma[0]];
        delta.extend((1..=g).map(|t| self.delta(t, sigma[t - 1], sigma[t])));
        delta.push(sigma[g]);
        let loop_candidates = (1..=g)
            .map(|t| {
                let blk = states[t - 1].1.filter(|(b, _, _)| {
                    let (a, e) = self.blocks[*b];
                    a < t && t <= e
                });
                let cand = self
                    .loop_check(t, sigma[t - 1], sigma[t], blk)
                    .unwrap_or_default();
                cand.iter().map(|&j| self.a[j].to_string()).collect()
            })
            .collect();
        SigmaProfile {
            sigma,
            delta,
            loop_candidates,
        }
    }

    fn finish(self, trace: Vec<TraceStep>, outcome: CertOutcome) -> IndependenceCertificate {
        IndependenceCertificate {
            rules: self.rules.clone(),
            trace,
            outcome,
            stats: self.stats,
        }
    }
}

/// Runs the profile search for `A` under the enabled rules.
pub fn certify_independence(
    a: &[MultiSetIndex],
    ctx: &CaseContext,
    rules: &RuleSet,
) -> Result<IndependenceCertificate> {
    ctx.validate(a)?;
    if a.len() < 2 {
        return Ok(IndependenceCertificate {
            rules: rules.clone(),
            trace: vec![TraceStep::Trivial { size: a.len() }],
            outcome: CertOutcome::Independent,
            stats: RuleStats::default(),
        });
    }
    Ok(Engine::new(ctx, a, rules).run())
}

/// Re-derives a certificate and checks its steps.
///
/// The domain steps are recomputed from the slope table alone, and a final
/// contradiction decided by `C4` alone is checked against the reach and
/// domain bounds around it.
pub fn replay(
    cert: &IndependenceCertificate,
    a: &[MultiSetIndex],
    ctx: &CaseContext,
) -> Result<()> {
    let again = certify_independence(a, ctx, &cert.rules)?;
    if again.trace != cert.trace || again.outcome != cert.outcome {
        return Err(Error::Internal("replay produced a different trace".into()));
    }
    let sl = |i: &MultiSetIndex, k| ctx.table.sigma_of(i, k);
    for step in &cert.trace {
        if let TraceStep::Domain {
            bridge,
            rule,
            lower,
            upper,
            size,
        } = step
        {
            let mut count: BTreeMap<i64, usize> = BTreeMap::new();
            for i in a {
                *count.entry(sl(i, *bridge)).or_insert(0) += 1;
            }
            let lo = *count.keys().next().unwrap();
            let hi = *count.keys().last().unwrap();
            let vals: Vec<i64> = (lo..=hi)
                .filter(|v| rule.is_none() || count.get(v).copied().unwrap_or(0) >= 2)
                .collect();
            if vals.first() != lower.as_ref()
                || vals.last() != upper.as_ref()
                || vals.len() != *size
            {
                return Err(Error::Internal(format!(
                    "domain step at bridge {bridge} does not replay"
                )));
            }
        }
    }
    if let Some((t, rules, Some(dmax))) = cert.contradiction() {
        if rules == [Rule::C4] && t >= 1 {
            let u_hi = if t == 1 {
                cert.domain(0).and_then(|d| d.1)
            } else {
                cert.reach(t - 1).map(|r| r.1)
            };
            let v_lo = cert.domain(t).and_then(|d| d.0);
            if let (Some(u), Some(v)) = (u_hi, v_lo) {
                let bound = u - v + ctx.params.m as i64 * ctx.table.chips_on(t);
                if dmax > bound || dmax >= 2 {
                    return Err(Error::Internal(
                        "contradiction step does not follow from its bounds".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}
