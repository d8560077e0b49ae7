//! Turning command-line selections into cases and parameters.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use troprank_core::constructions::CaseSidecar;
use troprank_core::{case_library, CaseSpec, ParameterQuadruple, Tableau};

use crate::CliError;

/// Either `--r --s --rho --m` or `--g --r --d --m`.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long)]
    pub rho: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub g: Option<u32>,
    #[arg(long)]
    pub d: Option<u32>,
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<ParameterQuadruple, CliError> {
        let m = self.m.unwrap_or(3);
        let p = match (self.r, self.s, self.rho, self.g, self.d) {
            (Some(r), Some(s), rho, None, None) => {
                ParameterQuadruple::from_rsrho(r, s, rho.unwrap_or(0), m)?
            }
            (Some(r), None, None, Some(g), Some(d)) => ParameterQuadruple::from_grdm(g, r, d, m)?,
            _ => {
                return Err(CliError::Input(
                    "give --r --s [--rho] [--m] or --g --r --d [--m]".into(),
                ))
            }
        };
        Ok(p)
    }

    /// Whether `p` agrees with every selector that was given.
    pub fn selects(&self, p: &ParameterQuadruple) -> bool {
        let ok = |want: Option<u32>, have: u32| want.is_none_or(|w| w == have);
        ok(self.r, p.r)
            && ok(self.s, p.s)
            && ok(self.rho, p.rho)
            && ok(self.m, p.m)
            && ok(self.g, p.g)
            && ok(self.d, p.d)
    }
}

/// Where a case comes from: the built-in library or a tableau file with its sidecar.
#[derive(Debug, Clone, Default, Args)]
pub struct CaseArgs {
    /// Library case name or family prefix, e.g. `canonical` or `thm1.3.2-r4`.
    #[arg(long)]
    pub library: Option<String>,
    /// Tableau text file; needs `--sidecar`.
    #[arg(long, requires = "sidecar", conflicts_with = "library")]
    pub tableau: Option<PathBuf>,
    /// JSON sidecar with parameters and the function family.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    #[command(flatten)]
    pub select: ParamArgs,
}

impl CaseArgs {
    pub fn cases(&self) -> Result<Vec<CaseSpec>, CliError> {
        match (&self.library, &self.tableau) {
            (Some(name), _) => library_matches(name, &self.select),
            (None, Some(t)) => Ok(vec![load_case(
                t,
                self.sidecar.as_deref().expect("clap enforces"),
            )?]),
            (None, None) => Err(CliError::Input(
                "give --library NAME or --tableau FILE --sidecar FILE".into(),
            )),
        }
    }

    pub fn single(&self) -> Result<CaseSpec, CliError> {
        let mut cs = self.cases()?;
        match cs.len() {
            1 => Ok(cs.remove(0)),
            n => Err(CliError::Input(format!(
                "selection matches {n} cases ({}); narrow it with --m/--r/--s/--rho",
                cs.iter()
                    .map(|c| c.name.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))),
        }
    }
}

/// Cases named exactly `name`, or else those whose name extends `name-`.
pub fn library_matches(name: &str, select: &ParamArgs) -> Result<Vec<CaseSpec>, CliError> {
    let lib = case_library();
    let exact: Vec<CaseSpec> = lib.iter().filter(|c| c.name == name).cloned().collect();
    let found = if exact.is_empty() {
        let prefix = format!("{name}-");
        lib.into_iter()
            .filter(|c| c.name.starts_with(&prefix))
            .collect()
    } else {
        exact
    };
    let picked: Vec<CaseSpec> = found
        .into_iter()
        .filter(|c| select.selects(&c.params))
        .collect();
    if picked.is_empty() {
        return Err(CliError::Input(format!(
            "no library case matches {name:?} with the given selectors"
        )));
    }
    Ok(picked)
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_case(tableau: &Path, sidecar: &Path) -> Result<CaseSpec, CliError> {
    let t = Tableau::parse(&read_text(tableau)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", tableau.display())))?;
    let sc: CaseSidecar = serde_json::from_str(&read_text(sidecar)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", sidecar.display())))?;
    CaseSpec::from_parts(t, sc).map_err(|e| CliError::Input(format!("{}: {e}", sidecar.display())))
}

/// One entry of a batch file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BatchEntry {
    Library(String),
    Files { tableau: PathBuf, sidecar: PathBuf },
}

/// Reads a JSON array of library names and `{tableau, sidecar}` pairs.
/// Relative paths are taken from the batch file's directory.
pub fn load_batch(path: &Path) -> Result<Vec<CaseSpec>, CliError> {
    let entries: Vec<BatchEntry> = serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for e in entries {
        match e {
            BatchEntry::Library(name) => out.extend(library_matches(&name, &ParamArgs::default())?),
            BatchEntry::Files { tableau, sidecar } => {
                out.push(load_case(&base.join(tableau), &base.join(sidecar))?)
            }
        }
    }
    Ok(out)
}
