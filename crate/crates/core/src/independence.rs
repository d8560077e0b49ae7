//! Tropical (in)dependence of families `{psi_I : I in A}`.
//!
//! [`check_dependence`] decides exactly whether given shifts `b_I` make the
//! minimum attained twice everywhere. [`search_dependence`] looks for such
//! shifts. [`certify_independence`] runs the slope-profile certifier, which
//! either reaches a contradiction (independence) or returns a surviving
//! profile, never a dependence claim.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Q};
use crate::graph::{ChainOfLoops, GraphPoint};
use crate::parameters::ParameterQuadruple;
use crate::plfun::{lower_envelope, PLFunction, PsiFamily};
use crate::series::{build_divisor, DivisorModel, MultiSetIndex, SlopeTable, Tableau};

mod certifier;
mod local;
pub use certifier::{
    certify_independence, replay, CertOutcome, IndependenceCertificate, RuleStats, SigmaProfile,
    TraceStep,
};
pub use local::locally_dependent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
}

impl Rule {
    pub const ALL: [Rule; 7] = [
        Rule::C1,
        Rule::C2,
        Rule::C3,
        Rule::C4,
        Rule::C5,
        Rule::C6,
        Rule::C7,
    ];
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameters(format!("unknown rule {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet(BTreeSet<Rule>);

impl Default for RuleSet {
    fn default() -> Self {
        Self::all()
    }
}

impl RuleSet {
    pub fn all() -> Self {
        Self(Rule::ALL.into_iter().collect())
    }

    pub fn none() -> Self {
        Self(BTreeSet::new())
    }

    pub fn contains(&self, r: Rule) -> bool {
        self.0.contains(&r)
    }

    pub fn without(mut self, r: Rule) -> Self {
        self.0.remove(&r);
        self
    }

    pub fn with(mut self, r: Rule) -> Self {
        self.0.insert(r);
        self
    }

    /// Comma-separated list such as `"C1,C4,C5"`.
    pub fn parse(s: &str) -> Result<Self> {
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(Rule::from_str)
            .collect::<Result<_>>()
            .map(Self)
    }

    pub fn iter(&self) -> impl Iterator<Item = Rule> + '_ {
        self.0.iter().copied()
    }
}

/// Everything derived from one case: graph, divisor, slope table and `psi_i`.
#[derive(Debug, Clone)]
pub struct CaseContext {
    pub params: ParameterQuadruple,
    pub tableau: Tableau,
    pub graph: ChainOfLoops,
    pub divisor: DivisorModel,
    pub table: SlopeTable,
    pub family: PsiFamily,
}

impl CaseContext {
    pub fn new(
        params: ParameterQuadruple,
        tableau: Tableau,
        long_bridges: Option<&BTreeSet<usize>>,
        seed: u64,
    ) -> Result<Self> {
        let graph = ChainOfLoops::instantiate_admissible(&params, long_bridges)?;
        Self::with_graph(params, tableau, graph, seed)
    }

    pub fn with_graph(
        params: ParameterQuadruple,
        tableau: Tableau,
        graph: ChainOfLoops,
        seed: u64,
    ) -> Result<Self> {
        if !tableau.matches(&params) {
            return Err(Error::Mismatch(format!(
                "tableau shape does not match {params}"
            )));
        }
        let adm = graph.verify_admissible(&params);
        if !adm.ok() {
            return Err(Error::InvalidParameters(format!(
                "edge lengths are not admissible: {:?}",
                adm.violations
            )));
        }
        let table = tableau.to_path()?.slope_table();
        let divisor = build_divisor(&tableau, &graph, seed)?;
        let family = PsiFamily::build(&divisor, &table, &graph)?;
        Ok(Self {
            params,
            tableau,
            graph,
            divisor,
            table,
            family,
        })
    }

    pub fn functions(&self, a: &[MultiSetIndex]) -> Vec<PLFunction> {
        a.iter().map(|i| self.family.psi_multi(i)).collect()
    }

    /// Checks that `a` is a set of distinct multisets of size `m` over `0..=r`.
    pub fn validate(&self, a: &[MultiSetIndex]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for i in a {
            MultiSetIndex::checked(i.entries().to_vec(), self.params.r, self.params.m)?;
            if !seen.insert(i) {
                return Err(Error::DuplicateIndex(i.to_string()));
            }
        }
        Ok(())
    }
}

/// Shifts `b_I`, one per member of `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceWitness {
    pub shifts: BTreeMap<MultiSetIndex, Q>,
    pub verified: bool,
}

#[derive(Serialize, Deserialize)]
struct WitnessRepr {
    b: BTreeMap<String, String>,
    verified: bool,
}

impl Serialize for DependenceWitness {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WitnessRepr {
            b: self
                .shifts
                .iter()
                .map(|(k, v)| (k.to_string(), exact::to_string(v)))
                .collect(),
            verified: self.verified,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DependenceWitness {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = WitnessRepr::deserialize(d)?;
        let shifts = repr
            .b
            .iter()
            .map(|(k, v)| Ok((MultiSetIndex::parse(k)?, exact::parse(v)?)))
            .collect::<Result<_>>()
            .map_err(serde::de::Error::custom)?;
        Ok(Self {
            shifts,
            verified: repr.verified,
        })
    }
}

/// Result of an exact dependence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DependenceCheck {
    Dependent,
    /// A point where the minimum is attained by a single function.
    UniqueAt(GraphPoint, MultiSetIndex),
}

/// Exact check of the shifts in `w`; the failure point is reported when they do not work.
pub fn check_dependence_detail(
    a: &[MultiSetIndex],
    w: &DependenceWitness,
    ctx: &CaseContext,
) -> Result<DependenceCheck> {
    ctx.validate(a)?;
    if a.is_empty() {
        return Err(Error::InvalidParameters("empty family".into()));
    }
    let shifts: Vec<Q> = a
        .iter()
        .map(|i| {
            w.shifts
                .get(i)
                .cloned()
                .ok_or_else(|| Error::Mismatch(format!("no shift for {i}")))
        })
        .collect::<Result<_>>()?;
    if w.shifts.len() != a.len() {
        return Err(Error::Mismatch(
            "witness has shifts for functions outside the family".into(),
        ));
    }
    let fns = ctx.functions(a);
    let refs: Vec<&PLFunction> = fns.iter().collect();
    let env = lower_envelope(&refs, &shifts, &ctx.graph);
    Ok(match env.first_unique_cell() {
        None => DependenceCheck::Dependent,
        Some(c) => {
            let mid = exact::half(&(&c.lo + &c.hi));
            DependenceCheck::UniqueAt(GraphPoint::new(c.edge, mid), a[c.achievers[0]].clone())
        }
    })
}

/// True when every point of the graph has at least two minimizers of `psi_I + b_I`.
pub fn check_dependence(
    a: &[MultiSetIndex],
    w: &DependenceWitness,
    ctx: &CaseContext,
) -> Result<bool> {
    Ok(check_dependence_detail(a, w, ctx)? == DependenceCheck::Dependent)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found {
        witness: DependenceWitness,
        iterations: usize,
    },
    Exhausted {
        iterations: usize,
    },
}

/// Monotone search for dependence shifts.
///
/// Wherever `psi_I + b_I` is the unique minimum, any dependence `b' >= b`
/// must have `b'_I - b_I` at least the gap up to the other functions there.
/// Each round raises every such `b_I` by its largest gap, so the iterates
/// never pass the least dependence above the start. A dependent family is
/// reached in the limit; the budget caps the number of rounds. The search
/// never claims independence.
pub fn search_dependence(
    a: &[MultiSetIndex],
    ctx: &CaseContext,
    budget: usize,
) -> Result<SearchOutcome> {
    ctx.validate(a)?;
    if a.len() < 2 {
        return Ok(SearchOutcome::Exhausted { iterations: 0 });
    }
    let fns = ctx.functions(a);
    let refs: Vec<&PLFunction> = fns.iter().collect();
    let g = &ctx.graph;
    let mut shifts = vec![Q::zero(); a.len()];
    let mut history: Vec<Vec<Q>> = Vec::new();
    for it in 0..budget {
        let env = lower_envelope(&refs, &shifts, g);
        let mut raise: Vec<Option<Q>> = vec![None; a.len()];
        for cell in env.cells.iter().filter(|c| c.achievers.len() == 1) {
            let j = cell.achievers[0];
            if let Some(x) = largest_gap(&refs, &shifts, j, cell, g) {
                if raise[j].as_ref().is_none_or(|r| &x > r) {
                    raise[j] = Some(x);
                }
            }
        }
        if raise.iter().all(Option::is_none) {
            let witness = DependenceWitness {
                shifts: a.iter().cloned().zip(shifts).collect(),
                verified: false,
            };
            let verified = check_dependence(a, &witness, ctx)?;
            if !verified {
                return Err(Error::Internal(
                    "search produced shifts that fail the exact check".into(),
                ));
            }
            return Ok(SearchOutcome::Found {
                witness: DependenceWitness {
                    verified,
                    ..witness
                },
                iterations: it,
            });
        }
        let step: Vec<Q> = raise.into_iter().map(Option::unwrap_or_default).collect();
        for (b, r) in shifts.iter_mut().zip(&step) {
            *b += r;
        }
        history.push(step);
        if let Some(tail) = geometric_tail(&history) {
            for (b, r) in shifts.iter_mut().zip(tail) {
                *b += r;
            }
            history.clear();
        }
    }
    Ok(SearchOutcome::Exhausted { iterations: budget })
}

/// `Some(x)` when `b = mu a` for one `mu` across all entries, with `a` and `b` sharing support.
fn common_ratio(a: &[Q], b: &[Q]) -> Option<Q> {
    let mut mu: Option<Q> = None;
    for (x, y) in a.iter().zip(b) {
        match (x.is_zero(), y.is_zero()) {
            (true, true) => continue,
            (false, false) => {
                let r = y / x;
                if mu.as_ref().is_some_and(|m| *m != r) {
                    return None;
                }
                mu = Some(r);
            }
            _ => return None,
        }
    }
    mu
}

/// When the last raises repeat with period 1 or 2 up to a fixed factor
/// `0 < mu < 1`, the rest of the series they start: `sum(last p) * mu / (1 - mu)`.
fn geometric_tail(history: &[Vec<Q>]) -> Option<Vec<Q>> {
    let n = history.len();
    for p in [1usize, 2] {
        if n < 2 * p + 1 {
            continue;
        }
        let ratios: Vec<Option<Q>> = (0..p + 1)
            .map(|i| common_ratio(&history[n - 1 - i - p], &history[n - 1 - i]))
            .collect();
        let Some(Some(mu)) = ratios.first().cloned() else {
            continue;
        };
        if !(mu.is_positive() && mu < Q::one()) || ratios.iter().any(|r| r.as_ref() != Some(&mu)) {
            continue;
        }
        let factor = &mu / (Q::one() - &mu);
        let mut tail = vec![Q::zero(); history[0].len()];
        for step in &history[n - p..] {
            for (t, r) in tail.iter_mut().zip(step) {
                *t += r * &factor;
            }
        }
        return Some(tail);
    }
    None
}

/// Largest gap between function `j` and the envelope of the others over a cell.
fn largest_gap(
    fns: &[&PLFunction],
    shifts: &[Q],
    j: usize,
    cell: &crate::plfun::EnvelopeCell,
    g: &ChainOfLoops,
) -> Option<Q> {
    let others: Vec<usize> = (0..fns.len()).filter(|&k| k != j).collect();
    let ofns: Vec<&PLFunction> = others.iter().map(|&k| fns[k]).collect();
    let oshifts: Vec<Q> = others.iter().map(|&k| shifts[k].clone()).collect();
    let region = [(cell.edge, cell.lo.clone(), cell.hi.clone())];
    let ocells = crate::plfun::lower_envelope_on(&ofns, &oshifts, g, &region);
    let fj = fns[j].edge(g, cell.edge);
    // the gap is piecewise linear, so its maximum sits at a breakpoint
    let mut points: Vec<Q> = vec![cell.lo.clone(), cell.hi.clone()];
    points.extend(ocells.iter().map(|c| c.lo.clone()));
    points.extend(
        fj.profile
            .breaks
            .iter()
            .filter(|b| **b > cell.lo && **b < cell.hi)
            .cloned(),
    );
    for k in &others {
        let ef = fns[*k].edge(g, cell.edge);
        points.extend(
            ef.profile
                .breaks
                .iter()
                .filter(|b| **b > cell.lo && **b < cell.hi)
                .cloned(),
        );
    }
    points
        .iter()
        .filter_map(|x| {
            let mine = fj.eval(x) + &shifts[j];
            let best = others
                .iter()
                .map(|&k| fns[k].edge(g, cell.edge).eval(x) + &shifts[k])
                .min()?;
            let gap = best - mine;
            gap.is_positive().then_some(gap)
        })
        .max()
}

/// Three-valued outcome with its evidence.
#[derive(Debug, Clone)]
pub enum Verdict {
    Independent(IndependenceCertificate),
    Dependent(DependenceWitness),
    Unknown {
        certificate: IndependenceCertificate,
        profile: SigmaProfile,
    },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Independent(_) => "independent",
            Verdict::Dependent(_) => "dependent",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

/// Certifier first; on an inconclusive run, the dependence search with `budget` rounds.
pub fn verdict(
    a: &[MultiSetIndex],
    ctx: &CaseContext,
    rules: &RuleSet,
    budget: usize,
) -> Result<Verdict> {
    let cert = certify_independence(a, ctx, rules)?;
    let profile = match &cert.outcome {
        CertOutcome::Independent => return Ok(Verdict::Independent(cert)),
        CertOutcome::Inconclusive(p) => p.clone(),
    };
    match search_dependence(a, ctx, budget)? {
        SearchOutcome::Found { witness, .. } if witness.verified => Ok(Verdict::Dependent(witness)),
        _ => Ok(Verdict::Unknown {
            certificate: cert,
            profile,
        }),
    }
}

/// `sigma`-permissibility of `I` on loop `t`: `sigma_{t-1} psi_I <= sigma_{t-1}` and `sigma_t psi_I >= sigma_t`.
pub fn is_permissible(i: &MultiSetIndex, t: usize, sigma: &[i64], tbl: &SlopeTable) -> bool {
    tbl.sigma_of(i, t - 1) <= sigma[t - 1] && tbl.sigma_of(i, t) >= sigma[t]
}
