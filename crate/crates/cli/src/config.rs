//! The run configuration embedded in every report.

use serde::{Deserialize, Serialize};
use ssg_core::catalog::Params;
use ssg_core::perm::SearchBudget;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSelector {
    pub name: String,
    #[serde(flatten)]
    pub params: Params,
    /// Recursion file to load instead of a builtin.
    pub system_file: Option<String>,
}

impl GroupSelector {
    pub fn builtin(name: &str, params: Params) -> Self {
        GroupSelector {
            name: name.to_string(),
            params,
            system_file: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    /// stab(m+n) = X^n ⋆ stab(m)
    BranchingLemma,
    /// stab_G(n+m) = stab_{(X^n ⋆ G) ⋊ Q_n}(n+m)
    Samestabs,
    /// ranks of the σ-signature maps against finitary rotors
    PsiRank,
    /// randomized act/section laws over the catalog
    Laws,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    CatalogList,
    CatalogShow,
    Quotient,
    Verify {
        lemma: Lemma,
        m: Option<usize>,
        n: Option<usize>,
        count: Option<usize>,
    },
    Tower {
        k: usize,
        count: usize,
    },
    AddingMachine {
        xs: Vec<i64>,
    },
    Dihedral,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Node limit for backtrack searches; normalizer searches get four times this.
    pub search_nodes: u64,
    /// Section words visited by the word problem solver.
    pub equality: usize,
    /// Largest group whose order is recounted by breadth-first closure.
    pub closure_limit: usize,
    pub gamma_candidates: usize,
    pub commutator_steps: usize,
    /// Largest level quotient enumerated element by element by the tower.
    pub quotient_elements: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            search_nodes: 50_000_000,
            equality: 10_000,
            closure_limit: 1_000_000,
            gamma_candidates: 100_000,
            commutator_steps: 100_000,
            quotient_elements: 2_000_000,
        }
    }
}

impl Budgets {
    pub fn search(&self) -> SearchBudget {
        SearchBudget {
            backtrack_nodes: self.search_nodes,
            normalizer_candidates: self.search_nodes.saturating_mul(4),
            ..SearchBudget::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub command: Command,
    pub group: Option<GroupSelector>,
    /// Empty means the command's default.
    pub levels: Vec<usize>,
    pub budgets: Budgets,
    pub seed: u64,
    pub format: Format,
    pub out: Option<String>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            command,
            group: None,
            levels: Vec::new(),
            budgets: Budgets::default(),
            seed: DEFAULT_SEED,
            format: Format::Json,
            out: None,
        }
    }

    pub fn with_group(mut self, name: &str, params: Params) -> Self {
        self.group = Some(GroupSelector::builtin(name, params));
        self
    }

    pub fn with_levels(mut self, levels: impl IntoIterator<Item = usize>) -> Self {
        self.levels = levels.into_iter().collect();
        self
    }
}

/// Parses `3`, `1..4` (inclusive) or `1,2,5`.
pub fn parse_levels(text: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("cannot read levels from `{text}`");
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect()
}
