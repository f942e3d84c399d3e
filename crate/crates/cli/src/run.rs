//! Command execution and replay.

use serde::{Deserialize, Serialize};
use ssg_core::catalog::{builtin, Params, SelfSimilarGroup, BUILTINS};
use ssg_core::lab::tower::branching_level;
use ssg_core::lab::{
    adding_machine_family, build_extension_tower, dihedral_checks, DihedralReport, FamilyReport,
    TowerConfig, TowerReport,
};
use ssg_core::perm::{PermGroup, SearchBudget};
use ssg_core::quotient::{
    level_quotient, psi_rank_profile, rotor_psi_rank_profile, verify_branching_lemma,
    verify_samestabs, StabCertificate, StabVerdict,
};
use ssg_core::recursion::{parse_system, SystemFile};
use ssg_core::Error;

use crate::config::{Command, GroupSelector, Lemma, RunConfig, SCHEMA_VERSION};
use crate::laws::{check_laws, LawReport};
use crate::report::{Report, Stored, Table, Verdict};

pub const DEFAULT_LAW_CHECKS: usize = 1000;
pub const DEFAULT_ADDING_MACHINE_LEVEL: usize = 10;
pub const DEFAULT_RESIDUES: [i64; 8] = [0, 1, 3, 5, 7, 9, 11, 13];
pub const DEFAULT_DIHEDRAL_LEVEL: usize = 4;
pub const DEFAULT_PSI_LEVEL: usize = 8;
/// Largest `m` tried when a group does not record one.
const MAX_DISCOVERED_M: usize = 4;

/// A finished run: the report and its table for CSV output.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub table: Table,
}

impl Outcome {
    pub fn text(&self) -> String {
        self.report.render(&self.table)
    }

    pub fn exit_code(&self) -> i32 {
        self.report.verdict.exit_code()
    }
}

/// Errors that produce no report: bad arguments, unreadable input or an
/// unexpected failure inside a computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunError(pub String);

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError(e.to_string())
    }
}

struct Body {
    verdict: Verdict,
    diagnostics: Vec<String>,
    result: serde_json::Value,
    table: Table,
}

fn body<T: Serialize>(verdict: Verdict, diagnostics: Vec<String>, result: &T, table: Table) -> Body {
    Body {
        verdict,
        diagnostics,
        result: serde_json::to_value(result).expect("serializable"),
        table,
    }
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn yes(b: bool) -> String {
    b.to_string()
}

pub fn load_group(sel: &GroupSelector) -> Result<SelfSimilarGroup, RunError> {
    match &sel.system_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError(format!("cannot read {path}: {e}")))?;
            let system = parse_system(&text).map_err(|e| RunError(format!("{path}: {e}")))?;
            Ok(SelfSimilarGroup::custom(&sel.name, system))
        }
        None => Ok(builtin(&sel.name, &sel.params)?),
    }
}

fn group_of(config: &RunConfig) -> Result<SelfSimilarGroup, RunError> {
    let sel = config
        .group
        .as_ref()
        .ok_or_else(|| RunError("this command needs --group".into()))?;
    load_group(sel)
}

/// Runs the command described by `config`. Budget exhaustion gives an
/// inconclusive report rather than an error.
pub fn run(config: &RunConfig) -> Result<Outcome, RunError> {
    if config.schema_version != SCHEMA_VERSION {
        return Err(RunError(format!(
            "schema version {} is not {SCHEMA_VERSION}",
            config.schema_version
        )));
    }
    let outcome = match dispatch(config) {
        Ok(b) => b,
        Err(e) if e.is_inconclusive() => Body {
            verdict: Verdict::Inconclusive,
            diagnostics: vec![e.to_string()],
            result: serde_json::Value::Null,
            table: Table::default(),
        },
        Err(Error::InvalidParameter(msg)) => return Err(RunError(msg)),
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome {
        report: Report {
            config: config.clone(),
            verdict: outcome.verdict,
            diagnostics: outcome.diagnostics,
            result: outcome.result,
        },
        table: outcome.table,
    })
}

fn dispatch(config: &RunConfig) -> ssg_core::Result<Body> {
    let group = || group_of(config).map_err(|e| Error::InvalidParameter(e.0));
    match &config.command {
        Command::CatalogList => Ok(catalog_list()),
        Command::CatalogShow => Ok(catalog_show(&group()?)),
        Command::Quotient => quotient(&group()?, config),
        Command::Verify { lemma, m, n, count } => match lemma {
            Lemma::BranchingLemma | Lemma::Samestabs => {
                stab_lemma(&group()?, *lemma, *m, n.unwrap_or(1), &config.levels)
            }
            Lemma::PsiRank => psi_rank(&group()?, config),
            Lemma::Laws => laws(config, count.unwrap_or(DEFAULT_LAW_CHECKS)),
        },
        Command::Tower { k, count } => tower(&group()?, config, *k, *count),
        Command::AddingMachine { xs } => {
            let n = single_level(config, DEFAULT_ADDING_MACHINE_LEVEL)?;
            adding_machine(xs, n)
        }
        Command::Dihedral => dihedral(config),
    }
}

fn single_level(config: &RunConfig, default: usize) -> ssg_core::Result<usize> {
    match config.levels.as_slice() {
        [] => Ok(default),
        [n] => Ok(*n),
        _ => Err(Error::InvalidParameter("this command takes a single level".into())),
    }
}

#[derive(Serialize, Deserialize)]
struct CatalogEntry {
    name: String,
    description: String,
}

fn catalog_list() -> Body {
    let entries: Vec<CatalogEntry> = BUILTINS
        .iter()
        .map(|(name, description)| CatalogEntry {
            name: name.to_string(),
            description: description.to_string(),
        })
        .collect();
    let table = Table {
        header: vec!["name", "description"],
        rows: entries.iter().map(|e| vec![e.name.clone(), e.description.clone()]).collect(),
    };
    body(Verdict::Pass, Vec::new(), &entries, table)
}

#[derive(Serialize, Deserialize)]
struct GroupInfo {
    name: String,
    params: Params,
    degree: usize,
    generators: Vec<String>,
    system: SystemFile,
    k_generators: Vec<String>,
    k_normal_closure: bool,
    commutator_branching: bool,
    stab_level: Option<usize>,
}

fn catalog_show(g: &SelfSimilarGroup) -> Body {
    let system = SystemFile::from_system(g.system());
    let branch = g.branch();
    let table = Table {
        header: vec!["generator", "perm", "sections"],
        rows: system
            .generators
            .iter()
            .map(|s| {
                let perm: Vec<String> = s.perm.iter().map(|i| i.to_string()).collect();
                vec![s.name.clone(), perm.join(" "), s.sections.join(" ; ")]
            })
            .collect(),
    };
    let info = GroupInfo {
        name: g.name().to_string(),
        params: g.params().clone(),
        degree: g.degree(),
        generators: g.generator_names(),
        system,
        k_generators: branch.k_generators.iter().map(|w| g.system().format_word(w)).collect(),
        k_normal_closure: branch.k_normal_closure,
        commutator_branching: branch.commutator_branching,
        stab_level: branch.stab_level,
    };
    body(Verdict::Pass, Vec::new(), &info, table)
}

#[derive(Serialize, Deserialize)]
struct QuotientRow {
    level: usize,
    leaves: String,
    order: String,
    /// Breadth-first count, when the order is within the closure limit.
    closure_order: Option<String>,
    agree: Option<bool>,
}

fn quotient(g: &SelfSimilarGroup, config: &RunConfig) -> ssg_core::Result<Body> {
    if config.levels.is_empty() {
        return Err(Error::InvalidParameter("quotient needs --levels".into()));
    }
    let limit = config.budgets.closure_limit;
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for &level in &config.levels {
        let q = level_quotient(g, level);
        let order = q.group().order();
        let closure = if order <= limit.into() {
            q.group().closure_order(limit)
        } else {
            None
        };
        let agree = closure.map(|c| order == c.into());
        if agree == Some(false) {
            diagnostics.push(format!(
                "level {level}: stabilizer chain gives {order}, closure gives {}",
                closure.unwrap()
            ));
        }
        rows.push(QuotientRow {
            level,
            leaves: (g.degree() as u128).pow(level as u32).to_string(),
            order: order.to_string(),
            closure_order: closure.map(|c| c.to_string()),
            agree,
        });
    }
    let table = Table {
        header: vec!["level", "leaves", "order", "closure_order", "agree"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.level.to_string(),
                    r.leaves.clone(),
                    r.order.clone(),
                    r.closure_order.clone().unwrap_or_default(),
                    r.agree.map(yes).unwrap_or_default(),
                ]
            })
            .collect(),
    };
    Ok(body(pass_if(diagnostics.is_empty()), diagnostics, &rows, table))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabResult {
    pub m: usize,
    pub n: usize,
    pub certificates: Vec<StabCertificate>,
}

fn stab_lemma(
    g: &SelfSimilarGroup,
    lemma: Lemma,
    m: Option<usize>,
    n: usize,
    levels: &[usize],
) -> ssg_core::Result<Body> {
    let m = match m {
        Some(m) => m,
        None => branching_level(g, MAX_DISCOVERED_M)?,
    };
    let default = [m + n + 1];
    let levels = if levels.is_empty() { &default[..] } else { levels };
    let mut certificates = Vec::new();
    let mut diagnostics = Vec::new();
    for &level in levels {
        let cert = match lemma {
            Lemma::BranchingLemma => verify_branching_lemma(g, m, n, level)?,
            _ => verify_samestabs(g, n, m, level)?,
        };
        if let StabVerdict::Unequal { reason, witness } = &cert.verdict {
            diagnostics.push(format!("level {level}: {reason}; witness {witness}"));
        }
        certificates.push(cert);
    }
    let table = Table {
        header: vec!["lemma", "m", "n", "level", "lhs_order", "rhs_order", "equal"],
        rows: certificates
            .iter()
            .map(|c| {
                vec![
                    c.lemma.clone(),
                    c.m.to_string(),
                    c.n.to_string(),
                    c.level.to_string(),
                    c.lhs_order.clone(),
                    c.rhs_order.clone(),
                    yes(c.verdict.is_equal()),
                ]
            })
            .collect(),
    };
    let result = StabResult { m, n, certificates };
    Ok(body(pass_if(diagnostics.is_empty()), diagnostics, &result, table))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiResult {
    pub n_max: usize,
    pub profile: Vec<usize>,
    pub rotor_profile: Vec<usize>,
    pub max_rank: usize,
    /// First `n` from which the profile is constant up to `n_max`.
    pub constant_from: usize,
}

fn psi_rank(g: &SelfSimilarGroup, config: &RunConfig) -> ssg_core::Result<Body> {
    let n_max = config.levels.iter().copied().max().unwrap_or(DEFAULT_PSI_LEVEL);
    let profile = psi_rank_profile(g, n_max)?;
    let rotor_profile = rotor_psi_rank_profile(g.degree(), n_max)?;
    let last = profile[n_max];
    let constant_from = (0..=n_max).find(|&n| profile[n..].iter().all(|&r| r == last)).unwrap();
    let result = PsiResult {
        n_max,
        max_rank: profile.iter().copied().max().unwrap_or(0),
        profile,
        rotor_profile,
        constant_from,
    };
    let mut diagnostics = Vec::new();
    if constant_from >= n_max {
        diagnostics.push(format!("rank profile still changes at n = {n_max}"));
    }
    if last >= result.rotor_profile[n_max] {
        diagnostics.push(format!("rank {last} reaches the rotor rank at n = {n_max}"));
    }
    let table = Table {
        header: vec!["n", "rank", "rotor_rank"],
        rows: (0..=n_max)
            .map(|n| {
                vec![
                    n.to_string(),
                    result.profile[n].to_string(),
                    result.rotor_profile[n].to_string(),
                ]
            })
            .collect(),
    };
    Ok(body(pass_if(diagnostics.is_empty()), diagnostics, &result, table))
}

fn laws(config: &RunConfig, count: usize) -> ssg_core::Result<Body> {
    let report: LawReport = check_laws(count, config.seed, config.budgets.equality)?;
    let table = Table {
        header: vec!["group", "checks"],
        rows: report
            .groups
            .iter()
            .map(|g| vec![g.group.clone(), g.checks.to_string()])
            .collect(),
    };
    let diagnostics = report.failures.clone();
    Ok(body(pass_if(diagnostics.is_empty()), diagnostics, &report, table))
}

fn tower(g: &SelfSimilarGroup, config: &RunConfig, k: usize, count: usize) -> ssg_core::Result<Body> {
    let tower_config = TowerConfig {
        k,
        count,
        gamma_budget: config.budgets.gamma_candidates,
        commutator_steps: config.budgets.commutator_steps,
        max_quotient_elements: config.budgets.quotient_elements,
        ..TowerConfig::default()
    };
    let report = build_extension_tower(g, &tower_config, &config.budgets.search())?;
    let verdict = if !report.complete {
        Verdict::Inconclusive
    } else {
        pass_if(report.passed())
    };
    let mut diagnostics = report.diagnostics.clone();
    for e in report.entries.iter().filter(|e| !e.passed) {
        diagnostics.push(format!("entry {} failed its checks", e.index));
    }
    let table = Table {
        header: vec![
            "index",
            "gamma_depth",
            "faithful_level",
            "n",
            "consistent",
            "com_index",
            "exact_com_index",
            "passed",
        ],
        rows: report
            .entries
            .iter()
            .map(|e| {
                let first = e.certificates.first();
                vec![
                    e.index.to_string(),
                    e.gamma_depth.to_string(),
                    e.faithful_level.to_string(),
                    e.n.to_string(),
                    yes(e.consistent),
                    first.and_then(|c| c.com_index.clone()).unwrap_or_default(),
                    first
                        .and_then(|c| c.exact.as_ref())
                        .map(|x| x.com_index.clone())
                        .unwrap_or_default(),
                    yes(e.passed),
                ]
            })
            .collect(),
    };
    Ok(body(verdict, diagnostics, &report, table))
}

fn adding_machine(xs: &[i64], n: usize) -> ssg_core::Result<Body> {
    let report = adding_machine_family(xs, n)?;
    let mut diagnostics = Vec::new();
    if !report.pairwise_distinct {
        diagnostics.push("two residues give the same element".to_string());
    }
    for m in report.members.iter() {
        if !(m.involution && m.inverts_tau && m.contains_a && m.index_over_a == "2") {
            diagnostics.push(format!("residue {} fails a check", m.x));
        }
    }
    let table = Table {
        header: vec!["x", "involution", "inverts_tau", "extension_order", "index_over_a"],
        rows: report
            .members
            .iter()
            .map(|m| {
                vec![
                    m.x.to_string(),
                    yes(m.involution),
                    yes(m.inverts_tau),
                    m.extension_order.clone(),
                    m.index_over_a.clone(),
                ]
            })
            .collect(),
    };
    Ok(body(pass_if(report.passed), diagnostics, &report, table))
}

fn dihedral(config: &RunConfig) -> ssg_core::Result<Body> {
    let levels = if config.levels.is_empty() {
        vec![DEFAULT_DIHEDRAL_LEVEL]
    } else {
        config.levels.clone()
    };
    let budget = config.budgets.search();
    let reports = levels
        .iter()
        .map(|&n| dihedral_checks(n, &budget))
        .collect::<ssg_core::Result<Vec<_>>>()?;
    let diagnostics: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("level {} fails a check", r.level))
        .collect();
    let table = Table {
        header: vec![
            "level",
            "order",
            "dihedral_presentation",
            "index_two_subgroups",
            "normalizer_order",
            "passed",
        ],
        rows: reports
            .iter()
            .map(|r| {
                vec![
                    r.level.to_string(),
                    r.order.clone(),
                    yes(r.dihedral_presentation),
                    r.index_two_subgroups.to_string(),
                    r.normalizer_order.clone().unwrap_or_default(),
                    yes(r.passed),
                ]
            })
            .collect(),
    };
    Ok(body(pass_if(diagnostics.is_empty()), diagnostics, &reports, table))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplaySummary {
    pub identical: bool,
    pub certificates_checked: usize,
    pub discrepancies: Vec<String>,
}

impl ReplaySummary {
    pub fn exit_code(&self) -> i32 {
        if self.discrepancies.is_empty() {
            0
        } else {
            1
        }
    }
}

/// Reruns the configuration stored in `text`, compares the output byte for
/// byte, and rechecks the certificates stored in JSON reports.
pub fn replay(text: &str) -> Result<ReplaySummary, RunError> {
    let stored = Stored::parse(text).map_err(RunError)?;
    let fresh = run(stored.config())?.text();
    let mut summary = ReplaySummary {
        identical: fresh == text,
        certificates_checked: 0,
        discrepancies: Vec::new(),
    };
    if !summary.identical {
        let line = fresh
            .lines()
            .zip(text.lines())
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| fresh.lines().count().min(text.lines().count()));
        summary
            .discrepancies
            .push(format!("fresh run differs from the stored report at line {}", line + 1));
    }
    if let Stored::Json(report) = &stored {
        if report.verdict != Verdict::Inconclusive {
            recheck(report, &mut summary)?;
        }
    }
    Ok(summary)
}

fn parse_result<T: for<'de> Deserialize<'de>>(report: &Report) -> Result<T, RunError> {
    serde_json::from_value(report.result.clone())
        .map_err(|e| RunError(format!("stored result unreadable: {e}")))
}

fn recheck(report: &Report, summary: &mut ReplaySummary) -> Result<(), RunError> {
    let budget: SearchBudget = report.config.budgets.search();
    let mut check = |ok: bool, what: String| {
        summary.certificates_checked += 1;
        if !ok {
            summary.discrepancies.push(what);
        }
    };
    match &report.config.command {
        Command::Verify {
            lemma: Lemma::BranchingLemma | Lemma::Samestabs,
            ..
        } => {
            let result: StabResult = parse_result(report)?;
            for c in &result.certificates {
                check(c.replay()?, format!("certificate on level {} does not replay", c.level));
            }
        }
        Command::Tower { .. } => {
            let result: TowerReport = parse_result(report)?;
            for e in &result.entries {
                for c in e.certificates.iter().filter_map(|c| c.exact.as_ref()) {
                    check(
                        c.replay(&budget)?,
                        format!("entry {}: exact certificate on level {} does not replay", e.index, c.level),
                    );
                }
                for w in &e.distinct_from {
                    check(
                        w.verified() || !e.passed,
                        format!("entry {}: distinctness from entry {} unverified", e.index, w.j),
                    );
                }
            }
        }
        Command::AddingMachine { .. } => {
            let result: FamilyReport = parse_result(report)?;
            let tau_inv = result.tau.inverse();
            for m in &result.members {
                let e = &m.element;
                let ok = e.compose(e).is_identity() == m.involution
                    && (e.compose(&result.tau).compose(e) == tau_inv) == m.inverts_tau;
                check(ok, format!("residue {}: stored checks do not recompute", m.x));
            }
        }
        Command::Dihedral => {
            let result: Vec<DihedralReport> = parse_result(report)?;
            for r in &result {
                let leaves = 1usize << r.level;
                for gens in &r.index_two_generators {
                    let sub = PermGroup::new(leaves, gens.clone()).map_err(Error::from)?;
                    check(
                        (sub.order() * 2u32).to_string() == r.order,
                        format!("level {}: stored subgroup is not of index two", r.level),
                    );
                }
            }
        }
        _ => {}
    }
    Ok(())
}
