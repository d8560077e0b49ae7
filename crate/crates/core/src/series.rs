//! Tableaux, lingering lattice paths, slope tables and the divisor `D`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parameters::ParameterQuadruple;

mod divisor;
pub use divisor::{build_divisor, DivisorModel, EdgeProfile, LoopSolution};

/// A multiset of size `m` over `{0..r}`, stored non-decreasing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiSetIndex(Vec<u32>);

impl MultiSetIndex {
    pub fn new(mut entries: Vec<u32>) -> Self {
        entries.sort_unstable();
        Self(entries)
    }

    /// Validating constructor: size `m`, entries at most `r`.
    pub fn checked(entries: Vec<u32>, r: u32, m: u32) -> Result<Self> {
        let i = Self::new(entries);
        if i.0.len() != m as usize || i.0.iter().any(|&e| e > r) {
            return Err(Error::BadMultiset(i.to_string()));
        }
        Ok(i)
    }

    /// Parses `"003"` (one digit per entry) or `"0,0,3"` / `"0 0 3"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let bad = || Error::BadMultiset(s.to_string());
        let entries: Vec<u32> = if s.contains(',') || s.contains(' ') {
            s.split([',', ' '])
                .filter(|t| !t.is_empty())
                .map(|t| t.trim().parse().map_err(|_| bad()))
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).ok_or_else(bad))
                .collect::<Result<_>>()?
        };
        if entries.is_empty() {
            return Err(bad());
        }
        Ok(Self::new(entries))
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn count(&self, i: u32) -> usize {
        self.0.iter().filter(|&&e| e == i).count()
    }

    pub fn contains(&self, i: u32) -> bool {
        self.0.contains(&i)
    }

    /// `I + 1`: every entry raised by one.
    pub fn shifted(&self) -> Self {
        Self(self.0.iter().map(|e| e + 1).collect())
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    /// Removes one copy of `i`, if present.
    pub fn without_one(&self, i: u32) -> Option<Self> {
        let pos = self.0.iter().position(|&e| e == i)?;
        let mut v = self.0.clone();
        v.remove(pos);
        Some(Self(v))
    }

    /// `r - I`.
    pub fn mirrored(&self, r: u32) -> Self {
        Self::new(self.0.iter().map(|e| r - e).collect())
    }

    /// All multisets of size `m` over `{0..r}` in lexicographic order.
    pub fn all(r: u32, m: u32) -> Vec<Self> {
        fn rec(start: u32, r: u32, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiSetIndex>) {
            if left == 0 {
                out.push(MultiSetIndex(cur.clone()));
                return;
            }
            for e in start..=r {
                cur.push(e);
                rec(e, r, left - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, r, m, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for MultiSetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&e| e < 10) {
            for e in &self.0 {
                write!(f, "{e}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    /// Add `e_j`, `1 <= j <= r`.
    Coordinate(u32),
    /// Add `(-1, ..., -1)`.
    Down,
    Linger,
}

/// A rectangular `(r+1) x s` tableau on the alphabet `1..g` with omitted numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tableau {
    columns: Vec<Vec<u32>>,
    omitted: BTreeSet<u32>,
}

impl Tableau {
    pub fn new(columns: Vec<Vec<u32>>, omitted: BTreeSet<u32>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidTableau(m));
        if columns.len() < 2 {
            return bad("need at least two columns".into());
        }
        let s = columns[0].len();
        if s == 0 || columns.iter().any(|c| c.len() != s) {
            return bad("shape is not rectangular".into());
        }
        for (j, c) in columns.iter().enumerate() {
            if c.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("column {} is not strictly increasing", j + 1));
            }
        }
        for row in 0..s {
            if columns.windows(2).any(|w| w[0][row] >= w[1][row]) {
                return bad(format!("row {} is not strictly increasing", row + 1));
            }
        }
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        for &e in columns.iter().flatten().chain(omitted.iter()) {
            if !seen.insert(e) {
                return bad(format!("entry {e} appears twice"));
            }
        }
        let g = seen.len() as u32;
        if seen.iter().copied().ne(1..=g) {
            return bad(format!("entries and omitted numbers do not form 1..{g}"));
        }
        Ok(Self { columns, omitted })
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.columns
    }

    pub fn omitted(&self) -> &BTreeSet<u32> {
        &self.omitted
    }

    pub fn rank(&self) -> u32 {
        self.columns.len() as u32 - 1
    }

    pub fn rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn genus(&self) -> usize {
        self.columns.len() * self.rows() + self.omitted.len()
    }

    pub fn rho(&self) -> usize {
        self.omitted.len()
    }

    pub fn matches(&self, p: &ParameterQuadruple) -> bool {
        self.rank() == p.r && self.rows() == p.s as usize && self.rho() == p.rho as usize
    }

    pub fn step(&self, i: u32) -> Step {
        if self.omitted.contains(&i) {
            return Step::Linger;
        }
        let r = self.rank();
        let j = self
            .columns
            .iter()
            .position(|c| c.contains(&i))
            .expect("validated tableau covers 1..g") as u32;
        if j < r {
            Step::Coordinate(j + 1)
        } else {
            Step::Down
        }
    }

    pub fn to_path(&self) -> Result<LingeringLatticePath> {
        let steps = (1..=self.genus() as u32).map(|i| self.step(i)).collect();
        LingeringLatticePath::from_steps(self.rank(), steps)
    }

    /// Text form: one line per row, then `linger:` followed by the omitted numbers.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in 0..self.rows() {
            let cells: Vec<String> = self.columns.iter().map(|c| c[row].to_string()).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        let om: Vec<String> = self.omitted.iter().map(|e| e.to_string()).collect();
        out.push_str("linger:");
        if !om.is_empty() {
            out.push(' ');
            out.push_str(&om.join(" "));
        }
        out.push('\n');
        out
    }

    /// Parses the text form. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<u32>> = Vec::new();
        let mut omitted = BTreeSet::new();
        let mut seen_linger = false;
        let mut last_line = 0;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let lineno = n + 1;
            if line.is_empty() {
                continue;
            }
            last_line = lineno;
            let perr = |msg: String| Error::Parse { line: lineno, msg };
            if let Some(rest) = line.strip_prefix("linger:") {
                if seen_linger {
                    return Err(perr("second linger: line".into()));
                }
                seen_linger = true;
                for tok in rest.split_whitespace().filter(|t| *t != "-") {
                    let v: u32 = tok
                        .parse()
                        .map_err(|_| perr(format!("bad entry {tok:?}")))?;
                    omitted.insert(v);
                }
                continue;
            }
            if seen_linger {
                return Err(perr("row after linger: line".into()));
            }
            let row: Vec<u32> = line
                .split_whitespace()
                .map(|tok| tok.parse().map_err(|_| perr(format!("bad entry {tok:?}"))))
                .collect::<Result<_>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(perr(format!(
                        "row has {} entries, expected {}",
                        row.len(),
                        first.len()
                    )));
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: last_line.max(1),
                msg: "no tableau rows".into(),
            });
        }
        let width = rows[0].len();
        let columns = (0..width)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        Self::new(columns, omitted).map_err(|e| Error::Parse {
            line: last_line,
            msg: e.to_string(),
        })
    }
}

/// Steps together with the points `p_0..p_g` in `Z^r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LingeringLatticePath {
    r: u32,
    points: Vec<Vec<i64>>,
    steps: Vec<Step>,
}

impl LingeringLatticePath {
    pub fn from_steps(r: u32, steps: Vec<Step>) -> Result<Self> {
        let start: Vec<i64> = (1..=r as i64).rev().collect();
        let mut points = vec![start.clone()];
        for (n, st) in steps.iter().enumerate() {
            let mut p = points.last().unwrap().clone();
            match *st {
                Step::Coordinate(j) if j >= 1 && j <= r => p[j as usize - 1] += 1,
                Step::Coordinate(j) => {
                    return Err(Error::IllegalPath {
                        step: n + 1,
                        reason: format!("coordinate {j} out of range"),
                    })
                }
                Step::Down => p.iter_mut().for_each(|x| *x -= 1),
                Step::Linger => {}
            }
            if let Some(j) = (0..p.len().saturating_sub(1)).find(|&j| p[j] <= p[j + 1]) {
                return Err(Error::IllegalPath {
                    step: n + 1,
                    reason: format!("p({j}) > p({})", j + 1),
                });
            }
            if p.last().is_some_and(|&x| x <= 0) {
                return Err(Error::IllegalPath {
                    step: n + 1,
                    reason: format!("p({}) > 0", r - 1),
                });
            }
            points.push(p);
        }
        if points.last() != Some(&start) {
            return Err(Error::IllegalPath {
                step: steps.len(),
                reason: "p_g = p_0".into(),
            });
        }
        Ok(Self { r, points, steps })
    }

    pub fn rank(&self) -> u32 {
        self.r
    }

    pub fn genus(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn to_tableau(&self) -> Tableau {
        let mut columns = vec![Vec::new(); self.r as usize + 1];
        let mut omitted = BTreeSet::new();
        for (n, st) in self.steps.iter().enumerate() {
            let i = n as u32 + 1;
            match *st {
                Step::Coordinate(j) => columns[j as usize - 1].push(i),
                Step::Down => columns[self.r as usize].push(i),
                Step::Linger => {
                    omitted.insert(i);
                }
            }
        }
        Tableau::new(columns, omitted).expect("legal path yields a valid tableau")
    }

    pub fn slope_table(&self) -> SlopeTable {
        let p = self
            .points
            .iter()
            .map(|pt| pt.iter().copied().chain(std::iter::once(0)).collect())
            .collect();
        SlopeTable {
            p,
            steps: self.steps.clone(),
        }
    }
}

/// Column-filled tableau: column `j` holds `js+1 ..= (j+1)s`.
pub fn standard_tableau(p: &ParameterQuadruple) -> Result<Tableau> {
    if p.rho != 0 {
        return Err(Error::InvalidParameters(format!(
            "standard tableau needs rho = 0, got {}",
            p.rho
        )));
    }
    standard_tableau_with_lingers(p)
}

/// The standard tableau on the first `(r+1)s` numbers followed by `rho` lingering steps.
pub fn standard_tableau_with_lingers(p: &ParameterQuadruple) -> Result<Tableau> {
    let s = p.s;
    let columns = (0..=p.r)
        .map(|j| (j * s + 1..=(j + 1) * s).collect())
        .collect();
    let base = (p.r + 1) * s;
    let omitted = (base + 1..=base + p.rho).collect();
    Tableau::new(columns, omitted)
}

/// Every legal lingering lattice path of rank `r` with `s` rows and `rho` lingering steps.
pub fn enumerate_paths(r: u32, s: u32, rho: u32, limit: usize) -> Vec<LingeringLatticePath> {
    let g = ((r + 1) * s + rho) as usize;
    let mut out = Vec::new();
    let start: Vec<i64> = (1..=r as i64).rev().collect();
    let mut steps = Vec::with_capacity(g);
    #[allow(clippy::too_many_arguments)]
    fn rec(
        r: u32,
        cur: &mut Vec<i64>,
        counts: &mut [u32],
        lingers: u32,
        steps: &mut Vec<Step>,
        g: usize,
        limit: usize,
        out: &mut Vec<LingeringLatticePath>,
    ) {
        if out.len() >= limit {
            return;
        }
        if steps.len() == g {
            if let Ok(p) = LingeringLatticePath::from_steps(r, steps.clone()) {
                out.push(p);
            }
            return;
        }
        let s = counts[r as usize + 1];
        let legal =
            |p: &[i64]| p.windows(2).all(|w| w[0] > w[1]) && p.last().is_none_or(|&x| x > 0);
        for j in 1..=r {
            if counts[j as usize] < s {
                cur[j as usize - 1] += 1;
                if legal(cur) {
                    counts[j as usize] += 1;
                    steps.push(Step::Coordinate(j));
                    rec(r, cur, counts, lingers, steps, g, limit, out);
                    steps.pop();
                    counts[j as usize] -= 1;
                }
                cur[j as usize - 1] -= 1;
            }
        }
        if counts[0] < s {
            cur.iter_mut().for_each(|x| *x -= 1);
            if legal(cur) {
                counts[0] += 1;
                steps.push(Step::Down);
                rec(r, cur, counts, lingers, steps, g, limit, out);
                steps.pop();
                counts[0] -= 1;
            }
            cur.iter_mut().for_each(|x| *x += 1);
        }
        if lingers > 0 {
            steps.push(Step::Linger);
            rec(r, cur, counts, lingers - 1, steps, g, limit, out);
            steps.pop();
        }
    }
    // counts[0] tracks Down steps, counts[j] coordinate j, counts[r+1] the row count s.
    let mut counts = vec![0u32; r as usize + 2];
    counts[r as usize + 1] = s;
    let mut cur = start;
    rec(
        r,
        &mut cur,
        &mut counts,
        rho,
        &mut steps,
        g,
        limit,
        &mut out,
    );
    out
}

/// `p_k(i)` for `0 <= k <= g`, `0 <= i <= r`, with `p_k(r) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopeTable {
    p: Vec<Vec<i64>>,
    #[serde(skip)]
    steps: Vec<Step>,
}

impl SlopeTable {
    pub fn rank(&self) -> u32 {
        self.p[0].len() as u32 - 1
    }

    pub fn genus(&self) -> usize {
        self.p.len() - 1
    }

    pub fn get(&self, k: usize, i: u32) -> i64 {
        self.p[k][i as usize]
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.p
    }

    pub fn step(&self, t: usize) -> Step {
        self.steps[t - 1]
    }

    /// `sigma_k psi_I = sum_{i in I} p_k(i)`.
    pub fn sigma_of(&self, idx: &MultiSetIndex, k: usize) -> i64 {
        idx.entries().iter().map(|&i| self.p[k][i as usize]).sum()
    }

    /// `deg(D|gamma_t)`: one chip on Coordinate and Linger loops, none on Down loops.
    pub fn chips_on(&self, t: usize) -> i64 {
        match self.step(t) {
            Step::Down => 0,
            _ => 1,
        }
    }

    /// The function index whose slope changes on loop `t`: `j-1` for `e_j`, `r` for a down step.
    pub fn column(&self, t: usize) -> Option<u32> {
        match self.step(t) {
            Step::Coordinate(j) => Some(j - 1),
            Step::Down => Some(self.rank()),
            Step::Linger => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self.p)
    }
}

/// Convenience: `sigma_of` as a free function.
pub fn sigma_of(idx: &MultiSetIndex, k: usize, tbl: &SlopeTable) -> i64 {
    tbl.sigma_of(idx, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tab(cols: &[&[u32]], om: &[u32]) -> Tableau {
        Tableau::new(
            cols.iter().map(|c| c.to_vec()).collect(),
            om.iter().copied().collect(),
        )
        .unwrap()
    }

    #[test]
    fn canonical_genus_three_path() {
        let p = ParameterQuadruple::from_rsrho(2, 1, 0, 3).unwrap();
        let t = standard_tableau(&p).unwrap();
        assert_eq!(t.to_text(), "1 2 3\nlinger:\n");
        let path = t.to_path().unwrap();
        assert_eq!(
            path.steps(),
            &[Step::Coordinate(1), Step::Coordinate(2), Step::Down]
        );
        assert_eq!(path.points()[1], vec![3, 1]);
        assert_eq!(path.points()[2], vec![3, 2]);
        assert_eq!(path.points()[3], vec![2, 1]);
    }

    #[test]
    fn standard_tableau_first_block() {
        for (r, s) in [(3, 2), (4, 3), (5, 5)] {
            let p = ParameterQuadruple::from_rsrho(r, s, 0, 3).unwrap();
            let path = standard_tableau(&p).unwrap().to_path().unwrap();
            let mut want: Vec<i64> = (1..=r as i64).rev().collect();
            want[0] += s as i64;
            assert_eq!(path.points()[s as usize], want);
        }
        let p = ParameterQuadruple::from_rsrho(3, 2, 0, 3).unwrap();
        let t = standard_tableau(&p).unwrap();
        assert_eq!(
            t.columns(),
            &[vec![1, 2], vec![3, 4], vec![5, 6], vec![7, 8]]
        );
        let p = ParameterQuadruple::from_rsrho(1, 1, 0, 1).unwrap();
        assert_eq!(standard_tableau(&p).unwrap().genus(), 2);
        let p = ParameterQuadruple::from_rsrho(3, 1, 1, 3).unwrap();
        assert!(standard_tableau(&p).is_err());
    }

    #[test]
    fn roundtrips() {
        let fig8 = tab(&[&[1], &[3], &[4], &[5]], &[2]);
        assert_eq!(fig8.to_path().unwrap().to_tableau(), fig8);
        let p = ParameterQuadruple::from_rsrho(3, 2, 0, 3).unwrap();
        let fig5 = standard_tableau(&p).unwrap();
        assert_eq!(fig5.to_path().unwrap().to_tableau(), fig5);
        assert_eq!(Tableau::parse(&fig8.to_text()).unwrap(), fig8);
    }

    #[test]
    fn illegal_tableau_reports_step() {
        let err = Tableau::new(vec![vec![2], vec![1]], BTreeSet::new()).unwrap_err();
        assert!(matches!(err, Error::InvalidTableau(_)));
        let bad = LingeringLatticePath::from_steps(2, vec![Step::Coordinate(2)]).unwrap_err();
        assert_eq!(
            bad,
            Error::IllegalPath {
                step: 1,
                reason: "p(0) > p(1)".into()
            }
        );
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = Tableau::parse("1 2 3\n4 x 6\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = Tableau::parse("1 2\n3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(Tableau::parse("# only a comment\n").is_err());
    }

    #[test]
    fn sigma_examples() {
        let p = ParameterQuadruple::from_rsrho(2, 1, 0, 3).unwrap();
        let tbl = standard_tableau(&p)
            .unwrap()
            .to_path()
            .unwrap()
            .slope_table();
        for a in 0..=3u32 {
            for b in 0..=3 - a {
                let c = 3 - a - b;
                let mut e = vec![0; a as usize];
                e.extend(vec![1; b as usize]);
                e.extend(vec![2; c as usize]);
                let i = MultiSetIndex::new(e);
                assert_eq!(tbl.sigma_of(&i, 1), 3 * a as i64 + b as i64);
                assert_eq!(tbl.sigma_of(&i, 2), 3 * a as i64 + 2 * b as i64);
            }
        }
        for (r, s) in [(3u32, 2u32), (4, 3), (5, 5)] {
            let p = ParameterQuadruple::from_rsrho(r, s, 0, 3).unwrap();
            let tbl = standard_tableau(&p)
                .unwrap()
                .to_path()
                .unwrap()
                .slope_table();
            let i = MultiSetIndex::new(vec![0, 1, 3]);
            assert_eq!(tbl.sigma_of(&i, s as usize), 3 * r as i64 + s as i64 - 4);
        }
    }

    #[test]
    fn multiset_encoding() {
        let i = MultiSetIndex::parse("300").unwrap();
        assert_eq!(i.entries(), &[0, 0, 3]);
        assert_eq!(i.to_string(), "003");
        assert_eq!(
            MultiSetIndex::parse("0, 10,2").unwrap().to_string(),
            "0,2,10"
        );
        assert_eq!(MultiSetIndex::all(2, 2).len(), 6);
        assert_eq!(MultiSetIndex::all(3, 3).len(), 20);
        assert!(MultiSetIndex::checked(vec![0, 4], 3, 2).is_err());
        assert_eq!(i.mirrored(3).to_string(), "033");
    }

    #[test]
    fn path_enumeration_counts() {
        // standard Young tableaux of a 2x2 square: 2
        assert_eq!(enumerate_paths(1, 2, 0, usize::MAX).len(), 2);
        // 3x2 rectangle: 5
        assert_eq!(enumerate_paths(2, 2, 0, usize::MAX).len(), 5);
        // one linger on 3 cells in one row: 4 positions
        assert_eq!(enumerate_paths(2, 1, 1, usize::MAX).len(), 4);
    }
}
