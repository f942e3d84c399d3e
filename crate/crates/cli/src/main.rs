use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ssg_cli::{
    parse_levels, replay, run, Command, Format, GroupSelector, Lemma, RunConfig, EXIT_USAGE,
};
use ssg_core::catalog::Params;

/// Computations with self-similar groups acting on rooted trees.
///
/// Exit status: 0 pass, 1 fail with witness, 2 inconclusive within budget, 3 usage error.
#[derive(Parser)]
#[command(name = "ssg", version, args_conflicts_with_subcommands = true)]
struct Cli {
    /// Rerun a stored report and recheck its certificates.
    #[arg(long, value_name = "FILE")]
    replay: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Builtin groups.
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Orders of the level quotients G_n, by stabilizer chain and by closure.
    Quotient(Common),
    /// Check a stabilizer lemma, the rank profile, or the recursion laws.
    Verify {
        lemma: Lemma,
        /// Level whose stabilizer lies in the branching subgroup; discovered when omitted.
        #[arg(long)]
        m: Option<usize>,
        /// Depth n of X^n ⋆ G (default 1).
        #[arg(long)]
        n: Option<usize>,
        /// Number of randomized law checks.
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Tower of index-p extensions of an index-p^(k−1) subgroup.
    Tower {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Candidates tried when searching for each γ.
        #[arg(long)]
        gamma_budget: Option<usize>,
        /// Largest level quotient enumerated element by element.
        #[arg(long)]
        quotient_limit: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// The involutions τ^x u normalizing the adding machine ⟨τ⟩.
    AddingMachine {
        /// Tree level (same as --levels).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xs: Option<Vec<i64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Finite images of the infinite dihedral group ⟨τ, δ⟩.
    Dihedral {
        /// Tree level (same as --levels).
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Rerun a stored report and recheck its certificates.
    Replay { file: PathBuf },
}

#[derive(Subcommand)]
enum CatalogCmd {
    List(Common),
    Show(Common),
}

#[derive(Clone)]
struct LevelList(Vec<usize>);

fn level_list(text: &str) -> Result<LevelList, String> {
    parse_levels(text).map(LevelList)
}

#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    vector: Option<Vec<u32>>,
    /// Recursion file defining a custom group; --group names it.
    #[arg(long, value_name = "FILE")]
    system: Option<String>,
    /// `3`, `1..4` (inclusive) or `1,2,5`.
    #[arg(long, alias = "level", value_parser = level_list)]
    levels: Option<LevelList>,
    /// Node limit for backtrack searches.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl Common {
    fn config(self, command: Command) -> RunConfig {
        let mut c = RunConfig::new(command);
        if self.group.is_some() || self.system.is_some() {
            c.group = Some(GroupSelector {
                name: self.group.unwrap_or_else(|| "custom".to_string()),
                params: Params {
                    p: self.p,
                    vector: self.vector,
                },
                system_file: self.system,
            });
        }
        c.levels = self.levels.map(|l| l.0).unwrap_or_default();
        if let Some(b) = self.budget {
            c.budgets.search_nodes = b;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        c.out = self.out;
        c.format = self.format;
        c
    }
}

fn level_flag(n: Option<usize>, common: &mut Common) {
    if let Some(n) = n {
        common.levels = Some(LevelList(vec![n]));
    }
}

fn config_of(cmd: Cmd) -> Result<RunConfig, PathBuf> {
    Ok(match cmd {
        Cmd::Catalog(CatalogCmd::List(c)) => c.config(Command::CatalogList),
        Cmd::Catalog(CatalogCmd::Show(c)) => c.config(Command::CatalogShow),
        Cmd::Quotient(c) => c.config(Command::Quotient),
        Cmd::Verify {
            lemma,
            m,
            n,
            count,
            common,
        } => common.config(Command::Verify { lemma, m, n, count }),
        Cmd::Tower {
            k,
            count,
            gamma_budget,
            quotient_limit,
            common,
        } => {
            let mut c = common.config(Command::Tower { k, count });
            if let Some(b) = gamma_budget {
                c.budgets.gamma_candidates = b;
            }
            if let Some(q) = quotient_limit {
                c.budgets.quotient_elements = q;
            }
            c
        }
        Cmd::AddingMachine { n, xs, mut common } => {
            level_flag(n, &mut common);
            let xs = xs.unwrap_or_else(|| ssg_cli::DEFAULT_RESIDUES.to_vec());
            common.config(Command::AddingMachine { xs })
        }
        Cmd::Dihedral { n, mut common } => {
            level_flag(n, &mut common);
            common.config(Command::Dihedral)
        }
        Cmd::Replay { file } => return Err(file),
    })
}

fn do_replay(path: &PathBuf) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return EXIT_USAGE;
        }
    };
    match replay(&text) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));
            summary.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn main_code() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cmd = match (cli.replay, cli.command) {
        (Some(path), _) => return do_replay(&path),
        (None, Some(cmd)) => cmd,
        (None, None) => {
            eprintln!("error: a subcommand or --replay is required (see --help)");
            return EXIT_USAGE;
        }
    };
    let config = match config_of(cmd) {
        Ok(c) => c,
        Err(path) => return do_replay(&path),
    };
    let outcome = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let text = outcome.text();
    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {path}: {e}");
                return EXIT_USAGE;
            }
            eprintln!("{:?}: wrote {path}", outcome.report.verdict);
        }
        None => print!("{text}"),
    }
    outcome.exit_code()
}

fn main() -> ExitCode {
    ExitCode::from(main_code() as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
