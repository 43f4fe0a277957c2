//! JSON campaign configuration. Unknown keys are rejected.
//!
//! ```json
//! {
//!   "problems": [{ "name": "rot_elliptic", "dim": 10 }],
//!   "algorithms": [
//!     { "family": "jade", "mode": "adaptive" },
//!     { "family": "jade", "mode": "baseline" }
//!   ],
//!   "runs": 25,
//!   "budget": "10000*D",
//!   "master_seed": 1,
//!   "out_dir": "results",
//!   "threads": 4
//! }
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use acos_core::algorithms::{AcosMode, AlgorithmSpec, Family, FamilyParams};
use acos_core::benchmarks::{catalog_entry, CatalogEntry};
use acos_core::selector::SelectorParams;
use serde::Deserialize;

use crate::error::HarnessError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemConfig>,
    pub algorithms: Vec<AlgorithmConfig>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_threads")]
    pub threads: usize,
    /// Campaign-wide selector and archive overrides; per-algorithm values win.
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub archive_factor: Option<f64>,
}

fn default_runs() -> usize {
    51
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_threads() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Catalog name, see `acos list-functions`.
    pub name: String,
    pub dim: usize,
    /// Name used in outputs; defaults to `name`.
    pub label: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub family: String,
    #[serde(default = "default_mode")]
    pub mode: String,
    /// Name used in outputs; defaults to the family name.
    pub label: Option<String>,
    pub np: Option<usize>,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub archive_factor: Option<f64>,
    #[serde(default)]
    pub params: ParamOverrides,
}

fn default_mode() -> String {
    "adaptive".to_string()
}

/// Family parameters. Keys that do not belong to the family are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub chi: Option<f64>,
    pub velocity_fraction: Option<f64>,
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    pub learning_period: Option<usize>,
    pub p_frac: Option<f64>,
    pub c: Option<f64>,
    /// JADE's parent archive size as a multiple of NP.
    pub parent_archive_factor: Option<f64>,
}

/// Either a fixed FE count or `"<k>*D"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(try_from = "BudgetRepr")]
pub enum Budget {
    Fixed(u64),
    PerDim(u64),
}

impl Default for Budget {
    fn default() -> Self {
        Budget::PerDim(10_000)
    }
}

impl Budget {
    pub fn fes(&self, dim: usize) -> u64 {
        match *self {
            Budget::Fixed(n) => n,
            Budget::PerDim(k) => k * dim as u64,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BudgetRepr {
    Number(u64),
    Text(String),
}

impl TryFrom<BudgetRepr> for Budget {
    type Error = String;

    fn try_from(repr: BudgetRepr) -> Result<Self, String> {
        match repr {
            BudgetRepr::Number(n) => Ok(Budget::Fixed(n)),
            BudgetRepr::Text(s) => parse_budget(&s),
        }
    }
}

pub fn parse_budget(s: &str) -> Result<Budget, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(k) = t.strip_suffix("*D") {
        return k
            .parse()
            .map(Budget::PerDim)
            .map_err(|_| format!("bad budget `{s}`"));
    }
    t.parse()
        .map(Budget::Fixed)
        .map_err(|_| format!("bad budget `{s}`, expected a number or `k*D`"))
}

/// Parses `adaptive`, `noarchive`, `baseline`, `fixed:<p>` or `fixed-p<p>`.
pub fn parse_mode(s: &str) -> Result<AcosMode, String> {
    let mode = match s {
        "adaptive" => AcosMode::Adaptive,
        "noarchive" => AcosMode::NoArchive,
        "baseline" => AcosMode::Baseline,
        _ => {
            let value = s
                .strip_prefix("fixed:")
                .or_else(|| s.strip_prefix("fixed-p"))
                .ok_or_else(|| format!("unknown mode `{s}`"))?;
            let p: f64 = value
                .parse()
                .map_err(|_| format!("bad fixed probability in `{s}`"))?;
            AcosMode::FixedP(p)
        }
    };
    mode.validate().map_err(|e| format!("mode `{s}`: {e}"))?;
    Ok(mode)
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct ProblemPlan {
    pub label: String,
    pub entry: &'static CatalogEntry,
    pub dim: usize,
}

/// A validated algorithm; the population size may depend on the dimension.
#[derive(Debug, Clone)]
pub struct AlgorithmPlan {
    pub label: String,
    pub family: Family,
    pub mode: AcosMode,
    pub mode_name: String,
    np: Option<usize>,
    params: FamilyParams,
    selector: SelectorParams,
    archive_factor: f64,
}

impl AlgorithmPlan {
    pub fn new(family: Family, mode: AcosMode) -> Self {
        let base = AlgorithmSpec::new(family, 1);
        AlgorithmPlan {
            label: family.name().to_string(),
            family,
            mode,
            mode_name: mode.to_string(),
            np: None,
            params: base.params,
            selector: base.selector,
            archive_factor: base.archive_factor,
        }
    }

    pub fn spec(&self, dim: usize) -> AlgorithmSpec {
        let mut spec = AlgorithmSpec::new(self.family, dim);
        if let Some(np) = self.np {
            spec.np = np;
        }
        spec.params = self.params;
        spec.selector = self.selector;
        spec.archive_factor = self.archive_factor;
        spec
    }

    /// The same algorithm in another mode.
    pub fn with_mode(&self, mode: AcosMode) -> Self {
        AlgorithmPlan {
            mode,
            mode_name: mode.to_string(),
            ..self.clone()
        }
    }

    /// `label/mode`, the cell name used in pairwise output.
    pub fn cell_name(&self) -> String {
        format!("{}/{}", self.label, self.mode_name)
    }
}

/// A fully validated campaign.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub problems: Vec<ProblemPlan>,
    pub algorithms: Vec<AlgorithmPlan>,
    pub runs: usize,
    pub budget: Budget,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    pub threads: usize,
}

fn valid_label(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl ParamOverrides {
    fn given(&self) -> Vec<&'static str> {
        let slots = [
            ("c1", self.c1.is_some()),
            ("c2", self.c2.is_some()),
            ("chi", self.chi.is_some()),
            ("velocity_fraction", self.velocity_fraction.is_some()),
            ("tau1", self.tau1.is_some()),
            ("tau2", self.tau2.is_some()),
            ("learning_period", self.learning_period.is_some()),
            ("p_frac", self.p_frac.is_some()),
            ("c", self.c.is_some()),
            ("parent_archive_factor", self.parent_archive_factor.is_some()),
        ];
        slots.iter().filter(|s| s.1).map(|s| s.0).collect()
    }
}

fn allowed_params(family: Family) -> &'static [&'static str] {
    match family {
        Family::PsoW => &["c1", "c2", "velocity_fraction"],
        Family::PsoCf => &["c1", "c2", "chi", "velocity_fraction"],
        Family::Jde => &["tau1", "tau2"],
        Family::Sade => &["learning_period"],
        Family::Jade => &["p_frac", "c", "parent_archive_factor"],
    }
}

fn apply_params(params: &mut FamilyParams, o: &ParamOverrides) -> Result<(), String> {
    let family = params.family();
    if let Some(key) = o
        .given()
        .into_iter()
        .find(|k| !allowed_params(family).contains(k))
    {
        return Err(format!(
            "parameter `{key}` does not apply to family `{}`",
            family.name()
        ));
    }
    fn set<T: Copy>(slot: &mut T, v: Option<T>) {
        if let Some(v) = v {
            *slot = v;
        }
    }
    match params {
        FamilyParams::PsoW {
            c1,
            c2,
            velocity_fraction,
        } => {
            set(c1, o.c1);
            set(c2, o.c2);
            set(velocity_fraction, o.velocity_fraction);
        }
        FamilyParams::PsoCf {
            c1,
            c2,
            chi,
            velocity_fraction,
        } => {
            set(c1, o.c1);
            set(c2, o.c2);
            set(chi, o.chi);
            set(velocity_fraction, o.velocity_fraction);
        }
        FamilyParams::Jde { tau1, tau2 } => {
            set(tau1, o.tau1);
            set(tau2, o.tau2);
        }
        FamilyParams::Sade { learning_period } => set(learning_period, o.learning_period),
        FamilyParams::Jade {
            p_frac,
            c,
            archive_factor,
        } => {
            set(p_frac, o.p_frac);
            set(c, o.c);
            set(archive_factor, o.parent_archive_factor);
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks every constraint and resolves names.
    pub fn validate(&self) -> Result<Campaign, HarnessError> {
        let err = |m: String| HarnessError::Config(m);
        if self.problems.is_empty() {
            return Err(err("no problems listed".into()));
        }
        if self.algorithms.is_empty() {
            return Err(err("no algorithms listed".into()));
        }
        if self.runs == 0 {
            return Err(err("runs must be at least 1".into()));
        }
        if self.threads == 0 {
            return Err(err("threads must be at least 1".into()));
        }
        let mut problems = Vec::new();
        let mut seen = HashSet::new();
        for p in &self.problems {
            let entry = catalog_entry(&p.name).map_err(|_| err(format!("unknown function `{}`", p.name)))?;
            if p.dim < entry.min_dim() {
                return Err(err(format!("`{}` needs dim >= {}", p.name, entry.min_dim())));
            }
            let label = p.label.clone().unwrap_or_else(|| p.name.clone());
            if !valid_label(&label) {
                return Err(err(format!(
                    "problem label `{label}` may only use [A-Za-z0-9_.-]"
                )));
            }
            if !seen.insert(label.clone()) {
                return Err(err(format!(
                    "duplicate problem `{label}`; give one a distinct label"
                )));
            }
            problems.push(ProblemPlan {
                label,
                entry,
                dim: p.dim,
            });
        }
        let mut algorithms = Vec::new();
        let mut seen = HashSet::new();
        for a in &self.algorithms {
            let family =
                Family::from_name(&a.family).ok_or_else(|| err(format!("unknown family `{}`", a.family)))?;
            let mode = parse_mode(&a.mode).map_err(err)?;
            let mut plan = AlgorithmPlan::new(family, mode);
            if let Some(label) = &a.label {
                plan.label = label.clone();
            }
            if !valid_label(&plan.label) {
                return Err(err(format!(
                    "algorithm label `{}` may only use [A-Za-z0-9_.-]",
                    plan.label
                )));
            }
            if !seen.insert(plan.cell_name()) {
                return Err(err(format!("duplicate algorithm `{}`", plan.cell_name())));
            }
            plan.np = a.np;
            apply_params(&mut plan.params, &a.params).map_err(err)?;
            plan.selector.epsilon = a.epsilon.or(self.epsilon).unwrap_or(plan.selector.epsilon);
            plan.selector.eta = a.eta.or(self.eta).unwrap_or(plan.selector.eta);
            plan.archive_factor = a
                .archive_factor
                .or(self.archive_factor)
                .unwrap_or(plan.archive_factor);
            algorithms.push(plan);
        }
        for p in &problems {
            for a in &algorithms {
                let spec = a.spec(p.dim);
                spec.validate()
                    .map_err(|e| err(format!("{}: {e}", a.cell_name())))?;
                if self.budget.fes(p.dim) < spec.np as u64 {
                    return Err(err(format!(
                        "budget {} on `{}` is below the population size {} of {}",
                        self.budget.fes(p.dim),
                        p.label,
                        spec.np,
                        a.cell_name()
                    )));
                }
            }
        }
        Ok(Campaign {
            problems,
            algorithms,
            runs: self.runs,
            budget: self.budget,
            master_seed: self.master_seed,
            out_dir: self.out_dir.clone(),
            threads: self.threads,
        })
    }
}
