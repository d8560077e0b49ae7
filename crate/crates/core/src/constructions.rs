//! Inductive case transformations and the library of explicit cases.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parameters::ParameterQuadruple;
use crate::series::{
    standard_tableau, standard_tableau_with_lingers, MultiSetIndex, SlopeTable, Tableau,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseSpec {
    pub name: String,
    pub params: ParameterQuadruple,
    pub tableau: Tableau,
    pub long_bridges: Option<BTreeSet<usize>>,
    pub family: Vec<MultiSetIndex>,
    pub source: String,
    /// Only an outline of the argument is available for this case.
    pub sketch: bool,
    /// Needs `--allow-long` on the command line.
    pub expensive: bool,
}

/// JSON sidecar stored next to the tableau text file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSidecar {
    pub name: String,
    pub r: u32,
    pub s: u32,
    pub rho: u32,
    pub m: u32,
    /// Indices as strings such as `"003"` or `"0,0,12"`.
    pub family: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub long_bridges: Option<Vec<usize>>,
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub sketch: bool,
    #[serde(default)]
    pub expensive: bool,
}

impl CaseSpec {
    pub fn new(
        name: impl Into<String>,
        params: ParameterQuadruple,
        tableau: Tableau,
        long_bridges: Option<BTreeSet<usize>>,
        mut family: Vec<MultiSetIndex>,
        source: impl Into<String>,
    ) -> Result<Self> {
        if !tableau.matches(&params) {
            return Err(Error::Mismatch(format!(
                "tableau shape does not match {params}"
            )));
        }
        family.sort();
        let mut seen = BTreeSet::new();
        for i in &family {
            MultiSetIndex::checked(i.entries().to_vec(), params.r, params.m)?;
            if !seen.insert(i.clone()) {
                return Err(Error::DuplicateIndex(i.to_string()));
            }
        }
        if let Some(lb) = &long_bridges {
            if let Some(&k) = lb.iter().find(|&&k| k > params.genus()) {
                return Err(Error::BridgeOutOfRange {
                    index: k,
                    max: params.genus(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            params,
            tableau,
            long_bridges,
            family,
            source: source.into(),
            sketch: false,
            expensive: false,
        })
    }

    pub fn size_law_holds(&self) -> bool {
        self.family.len() as u128 == self.params.classify_range().target_size
    }

    pub fn slope_table(&self) -> Result<SlopeTable> {
        Ok(self.tableau.to_path()?.slope_table())
    }

    pub fn sidecar(&self) -> CaseSidecar {
        let p = &self.params;
        CaseSidecar {
            name: self.name.clone(),
            r: p.r,
            s: p.s,
            rho: p.rho,
            m: p.m,
            family: self.family.iter().map(|i| i.to_string()).collect(),
            long_bridges: self
                .long_bridges
                .as_ref()
                .map(|s| s.iter().copied().collect()),
            source: self.source.clone(),
            sketch: self.sketch,
            expensive: self.expensive,
        }
    }

    pub fn from_parts(tableau: Tableau, sc: CaseSidecar) -> Result<Self> {
        let params = ParameterQuadruple::from_rsrho(sc.r, sc.s, sc.rho, sc.m)?;
        let family = sc
            .family
            .iter()
            .map(|s| MultiSetIndex::parse(s))
            .collect::<Result<Vec<_>>>()?;
        let mut c = Self::new(
            sc.name,
            params,
            tableau,
            sc.long_bridges.map(|v| v.into_iter().collect()),
            family,
            sc.source,
        )?;
        c.sketch = sc.sketch;
        c.expensive = sc.expensive;
        Ok(c)
    }
}

/// The base family over the genus-3 canonical tableau: all of size 2 for
/// `m = 2`, then `{I + one more 1}` plus the four extreme functions.
pub fn canonical_family(m: u32) -> Result<Vec<MultiSetIndex>> {
    if m < 2 {
        return Err(Error::InvalidParameters(format!(
            "canonical family needs m >= 2, got {m}"
        )));
    }
    let mut fam = MultiSetIndex::all(2, 2);
    for k in 3..=m {
        let mut next: BTreeSet<MultiSetIndex> = fam
            .iter()
            .map(|i| i.union(&MultiSetIndex::new(vec![1])))
            .collect();
        let k = k as usize;
        let mut zeros_two = vec![0; k - 1];
        zeros_two.push(2);
        let mut zero_twos = vec![2; k - 1];
        zero_twos.push(0);
        for e in [vec![0; k], zeros_two, zero_twos, vec![2; k]] {
            next.insert(MultiSetIndex::new(e));
        }
        fam = next.into_iter().collect();
    }
    Ok(fam)
}

pub fn canonical_case(m: u32) -> Result<CaseSpec> {
    let p = ParameterQuadruple::from_rsrho(2, 1, 0, m)?;
    let family = canonical_family(m)?;
    CaseSpec::new(
        format!("canonical-m{m}"),
        p,
        standard_tableau(&p)?,
        None,
        family,
        "canonical",
    )
}

/// Adds a lingering last step: `(r, s, rho + 1, m)`.
pub fn induct_injective_rho(c: &CaseSpec) -> Result<CaseSpec> {
    if !c.params.is_injective() {
        return Err(Error::NotApplicable(format!(
            "{} is not in the injective range",
            c.params
        )));
    }
    let p = &c.params;
    let q = ParameterQuadruple::from_rsrho(p.r, p.s, p.rho + 1, p.m)?;
    let mut omitted = c.tableau.omitted().clone();
    omitted.insert(p.g + 1);
    let tableau = Tableau::new(c.tableau.columns().to_vec(), omitted)?;
    let long = c.long_bridges.clone().map(|mut s| {
        s.insert(q.genus());
        s
    });
    CaseSpec::new(
        format!("{}+rho", c.name),
        q,
        tableau,
        long,
        c.family.clone(),
        c.source.clone(),
    )
}

/// Appends the row `g+1 .. g+r+1`: `(r, s + 1, rho, m)`.
pub fn induct_injective_s(c: &CaseSpec) -> Result<CaseSpec> {
    if !c.params.is_injective() {
        return Err(Error::NotApplicable(format!(
            "{} is not in the injective range",
            c.params
        )));
    }
    let p = &c.params;
    let q = ParameterQuadruple::from_rsrho(p.r, p.s + 1, p.rho, p.m)?;
    let columns = c
        .tableau
        .columns()
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let mut col = col.clone();
            col.push(p.g + 1 + j as u32);
            col
        })
        .collect();
    let tableau = Tableau::new(columns, c.tableau.omitted().clone())?;
    let long = c.long_bridges.clone().map(|mut s| {
        s.insert(q.genus());
        s
    });
    CaseSpec::new(
        format!("{}+s", c.name),
        q,
        tableau,
        long,
        c.family.clone(),
        c.source.clone(),
    )
}

/// The functions added by [`induct_surjective_r`]: `0^(m)` and
/// `0^(k) 1^(m-1-k) alpha` for `1 <= k <= m-1`, `1 <= alpha <= s+1`.
pub fn surjective_added(m: u32, s: u32) -> Vec<MultiSetIndex> {
    let mut out = vec![MultiSetIndex::new(vec![0; m as usize])];
    for k in 1..m {
        for alpha in 1..=s + 1 {
            let mut e = vec![0; k as usize];
            e.extend(vec![1; (m - 1 - k) as usize]);
            e.push(alpha);
            out.push(MultiSetIndex::new(e));
        }
    }
    out.sort();
    out
}

/// Shifts the tableau by `s` and prepends the column `1..s`: `(r + 1, s, rho, m)`.
pub fn induct_surjective_r(c: &CaseSpec) -> Result<CaseSpec> {
    let p = &c.params;
    if p.r < p.s {
        return Err(Error::NotApplicable(format!(
            "r+ needs r >= s, got r = {}, s = {}",
            p.r, p.s
        )));
    }
    if !p.is_surjective() {
        return Err(Error::NotApplicable(format!(
            "{p} is not in the surjective range"
        )));
    }
    let q = ParameterQuadruple::from_rsrho(p.r + 1, p.s, p.rho, p.m)?;
    let mut columns = vec![(1..=p.s).collect::<Vec<u32>>()];
    columns.extend(
        c.tableau
            .columns()
            .iter()
            .map(|col| col.iter().map(|e| e + p.s).collect()),
    );
    let omitted = c.tableau.omitted().iter().map(|e| e + p.s).collect();
    let tableau = Tableau::new(columns, omitted)?;
    let mut family: Vec<MultiSetIndex> = c.family.iter().map(|i| i.shifted()).collect();
    family.extend(surjective_added(p.m, p.s));
    let long = c.long_bridges.as_ref().map(|set| {
        std::iter::once(0)
            .chain(set.iter().map(|x| x + p.s as usize))
            .collect()
    });
    CaseSpec::new(
        format!("{}+r", c.name),
        q,
        tableau,
        long,
        family,
        c.source.clone(),
    )
}

/// The three inductive steps on cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Induction {
    #[serde(rename = "rho+")]
    Rho,
    #[serde(rename = "s+")]
    S,
    #[serde(rename = "r+")]
    R,
}

impl Induction {
    pub const ALL: [Induction; 3] = [Induction::Rho, Induction::S, Induction::R];

    pub fn apply(self, c: &CaseSpec) -> Result<CaseSpec> {
        match self {
            Induction::Rho => induct_injective_rho(c),
            Induction::S => induct_injective_s(c),
            Induction::R => induct_surjective_r(c),
        }
    }

    /// Parameters a source would need for this step to land on `target`.
    pub fn source_params(self, target: &ParameterQuadruple) -> Option<ParameterQuadruple> {
        let t = target;
        let (r, s, rho) = match self {
            Induction::Rho => (t.r, t.s, t.rho.checked_sub(1)?),
            Induction::S => (t.r, t.s.checked_sub(1).filter(|&s| s > 0)?, t.rho),
            Induction::R => (t.r.checked_sub(1).filter(|&r| r > 0)?, t.s, t.rho),
        };
        let p = ParameterQuadruple::from_rsrho(r, s, rho, t.m).ok()?;
        let ok = match self {
            Induction::Rho | Induction::S => p.is_injective(),
            Induction::R => p.r >= p.s && p.is_surjective(),
        };
        ok.then_some(p)
    }
}

impl fmt::Display for Induction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Induction::Rho => "rho+",
            Induction::S => "s+",
            Induction::R => "r+",
        })
    }
}

impl FromStr for Induction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho+" => Ok(Induction::Rho),
            "s+" => Ok(Induction::S),
            "r+" => Ok(Induction::R),
            _ => Err(Error::NotApplicable(format!(
                "unknown operation {s:?}; expected rho+, s+ or r+"
            ))),
        }
    }
}

/// Every single step from a case of smaller genus that yields `target`.
pub fn predecessors(target: &ParameterQuadruple) -> Vec<(Induction, ParameterQuadruple)> {
    Induction::ALL
        .iter()
        .filter_map(|&op| op.source_params(target).map(|p| (op, p)))
        .collect()
}

/// Slopes on bridge `s` of the functions added by the surjective induction:
/// pairwise distinct and all above `m r` for the source rank `r`.
pub fn surjective_separation(image: &CaseSpec) -> Result<bool> {
    let p = &image.params;
    let tbl = image.slope_table()?;
    let added = surjective_added(p.m, p.s);
    let k = p.s as usize;
    let vals: Vec<i64> = added.iter().map(|i| tbl.sigma_of(i, k)).collect();
    let distinct: BTreeSet<i64> = vals.iter().copied().collect();
    let floor = p.m as i64 * (p.r as i64 - 1);
    let ones = MultiSetIndex::new(vec![1; p.m as usize]);
    Ok(distinct.len() == vals.len()
        && vals.iter().all(|&v| v > floor)
        && tbl.sigma_of(&ones, k) == floor)
}

/// Reverses the chain: entry `e` in column `j` moves to `g+1-e` in column `r-j`, and `I` to `r - I`.
pub fn mirror(c: &CaseSpec) -> Result<CaseSpec> {
    let p = &c.params;
    let g = p.g;
    let cols = c.tableau.columns();
    let columns = (0..cols.len())
        .map(|j| {
            let mut col: Vec<u32> = cols[cols.len() - 1 - j].iter().map(|e| g + 1 - e).collect();
            col.sort_unstable();
            col
        })
        .collect();
    let omitted = c.tableau.omitted().iter().map(|e| g + 1 - e).collect();
    let tableau = Tableau::new(columns, omitted)?;
    let family = c.family.iter().map(|i| i.mirrored(p.r)).collect();
    let long = c
        .long_bridges
        .as_ref()
        .map(|s| s.iter().map(|x| g as usize - x).collect());
    CaseSpec::new(
        format!("{}-mirror", c.name),
        *p,
        tableau,
        long,
        family,
        c.source.clone(),
    )
}

/// Multisets with at least one index in `{0, 1, r-1, r}`.
pub fn extreme_family(r: u32, m: u32) -> Vec<MultiSetIndex> {
    let ext = [0, 1, r - 1, r];
    MultiSetIndex::all(r, m)
        .into_iter()
        .filter(|i| i.entries().iter().any(|e| ext.contains(e)))
        .collect()
}

fn tableau(cols: &[&[u32]], omitted: &[u32]) -> Tableau {
    Tableau::new(
        cols.iter().map(|c| c.to_vec()).collect(),
        omitted.iter().copied().collect(),
    )
    .expect("library tableau is valid")
}

fn all_except(r: u32, m: u32, excluded: &[&str]) -> Vec<MultiSetIndex> {
    let ex: Vec<MultiSetIndex> = excluded
        .iter()
        .map(|s| MultiSetIndex::parse(s).unwrap())
        .collect();
    MultiSetIndex::all(r, m)
        .into_iter()
        .filter(|i| !ex.contains(i))
        .collect()
}

/// Takes `n` members alternately from the front and the back of `fam`.
fn trim_symmetric(fam: Vec<MultiSetIndex>, n: usize) -> Vec<MultiSetIndex> {
    let mut out = Vec::with_capacity(n);
    let (mut lo, mut hi) = (0, fam.len());
    while out.len() < n && lo < hi {
        out.push(fam[lo].clone());
        lo += 1;
        if out.len() < n && lo < hi {
            hi -= 1;
            out.push(fam[hi].clone());
        }
    }
    out
}

fn build_library() -> Result<Vec<CaseSpec>> {
    let mut out = Vec::new();
    for m in 2..=6 {
        out.push(canonical_case(m)?);
    }
    for (r, s) in [(3, 3), (4, 4)] {
        let p = ParameterQuadruple::from_rsrho(r, s, 0, 3)?;
        let fam = MultiSetIndex::all(r, 3);
        out.push(CaseSpec::new(
            format!("thm1.3.1-r{r}-s{s}"),
            p,
            standard_tableau(&p)?,
            None,
            fam,
            "injective, s >= r^2/4",
        )?);
    }
    for r in 3..=5 {
        let p = ParameterQuadruple::from_rsrho(r, r - 1, 0, 3)?;
        let fam = extreme_family(r, 3);
        out.push(CaseSpec::new(
            format!("thm1.3.2-r{r}"),
            p,
            standard_tableau(&p)?,
            None,
            fam,
            "s = r - 1, extreme indices",
        )?);
    }
    let base = induct_surjective_r(&canonical_case(3)?)?;
    out.push(CaseSpec {
        name: "rank3-rho0".into(),
        source: "rank 3 battery".into(),
        ..base
    });
    let p = |rho| ParameterQuadruple::from_rsrho(3, 1, rho, 3);
    out.push(CaseSpec::new(
        "rank3-rho1",
        p(1)?,
        tableau(&[&[1], &[3], &[4], &[5]], &[2]),
        None,
        all_except(3, 3, &["003", "023", "033"]),
        "rank 3 battery",
    )?);
    out.push(CaseSpec::new(
        "rank3-rho2",
        p(2)?,
        tableau(&[&[1], &[3], &[5], &[6]], &[2, 4]),
        None,
        all_except(3, 3, &["003"]),
        "rank 3 battery",
    )?);
    out.push(CaseSpec::new(
        "rank3-rho3",
        p(3)?,
        tableau(&[&[1], &[4], &[6], &[7]], &[2, 3, 5]),
        None,
        MultiSetIndex::all(3, 3),
        "rank 3 battery",
    )?);
    let p431 = ParameterQuadruple::from_rsrho(4, 3, 1, 3)?;
    out.push(CaseSpec::new(
        "rank4-s3-rho1",
        p431,
        tableau(
            &[
                &[1, 2, 3],
                &[4, 5, 6],
                &[7, 8, 9],
                &[11, 12, 13],
                &[14, 15, 16],
            ],
            &[10],
        ),
        Some([3, 6, 10, 13].into_iter().collect()),
        MultiSetIndex::all(4, 3),
        "rank 4, genus-4 middle block",
    )?);
    let pairs = [
        (1, 1),
        (1, 2),
        (1, 3),
        (1, 4),
        (1, 5),
        (1, 6),
        (1, 7),
        (1, 8),
        (2, 1),
        (2, 2),
        (2, 3),
        (2, 4),
    ];
    for (s, rho) in pairs {
        let p = ParameterQuadruple::from_rsrho(4, s, rho, 3)?;
        let target = p.classify_range().target_size as usize;
        let fam = if target >= 35 {
            MultiSetIndex::all(4, 3)
        } else {
            trim_symmetric(extreme_family(4, 3), target)
        };
        let mut c = CaseSpec::new(
            format!("rank4-s{s}-rho{rho}"),
            p,
            standard_tableau_with_lingers(&p)?,
            None,
            fam,
            "rank 4 outline",
        )?;
        c.sketch = true;
        out.push(c);
    }
    let p55 = ParameterQuadruple::from_rsrho(5, 5, 0, 3)?;
    let mut c = CaseSpec::new(
        "rank5",
        p55,
        standard_tableau(&p55)?,
        None,
        MultiSetIndex::all(5, 3),
        "rank 5, r = s = 5",
    )?;
    c.expensive = true;
    out.push(c);
    for c in &out {
        if !c.size_law_holds() {
            return Err(Error::Internal(format!(
                "library case {} has {} functions",
                c.name,
                c.family.len()
            )));
        }
    }
    Ok(out)
}

/// Every named case, in a fixed order.
pub fn case_library() -> Vec<CaseSpec> {
    build_library().expect("library cases are well formed")
}

pub fn library_case(name: &str) -> Result<CaseSpec> {
    case_library()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownCase(name.to_string()))
}
