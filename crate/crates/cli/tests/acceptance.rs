//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use ssg_cli::laws::{check_laws, label, law_groups};
use ssg_cli::{
    replay, run, Command, Format, Lemma, Outcome, PsiResult, RunConfig, StabResult, Verdict,
};
use ssg_core::catalog::{builtin, Params};
use ssg_core::lab::{DihedralReport, FamilyReport, TowerReport};
use ssg_core::quotient::{discover_m, level_quotient, StabVerdict};
use ssg_core::recursion::{equal, section_closure, Closure, Equality};

const LAW_CHECKS: usize = 1000;
const LAW_SEED: u64 = 0x5eed;
const LAW_TIME: Duration = Duration::from_secs(30);
const ORACLE_MAX_ORDER: u32 = 1_000_000;
const ORACLE_TIME: Duration = Duration::from_secs(120);
const RELATIONS_LEVEL: usize = 10;
const RELATIONS_TIME: Duration = Duration::from_secs(5);
const BRANCHING_TIME: Duration = Duration::from_secs(300);
const PSI_LEVEL: usize = 8;
const TOWER_COUNT: usize = 5;
const TOWER_TIME: Duration = Duration::from_secs(600);
const ADDING_MACHINE_LEVEL: usize = 10;
const ADDING_MACHINE_TIME: Duration = Duration::from_secs(60);
const DIHEDRAL_LEVELS: std::ops::RangeInclusive<usize> = 4..=8;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<String, String> {
    let t = start.elapsed();
    ensure(t < limit, format!("took {t:.1?}, limit {limit:?}"))?;
    Ok(format!("{t:.1?}"))
}

/// Reports kept for the determinism criterion.
struct Artifacts {
    dir: PathBuf,
    files: Vec<(PathBuf, String)>,
}

impl Artifacts {
    fn run(&mut self, name: &str, config: RunConfig) -> Result<Outcome, String> {
        let outcome = run(&config).map_err(|e| format!("{name}: {e}"))?;
        let path = self.dir.join(name);
        let text = outcome.text();
        std::fs::write(&path, &text).map_err(|e| e.to_string())?;
        self.files.push((path, text));
        Ok(outcome)
    }
}

fn verify(lemma: Lemma, group: &str, params: Params, m: usize, n: usize, level: usize) -> RunConfig {
    RunConfig::new(Command::Verify {
        lemma,
        m: Some(m),
        n: Some(n),
        count: None,
    })
    .with_group(group, params)
    .with_levels([level])
}

fn result<T: serde::de::DeserializeOwned>(o: &Outcome) -> Result<T, String> {
    serde_json::from_value(o.report.result.clone()).map_err(|e| e.to_string())
}

fn laws() -> Check {
    let start = Instant::now();
    let report = check_laws(LAW_CHECKS, LAW_SEED, 10_000).map_err(|e| e.to_string())?;
    ensure(report.checks >= LAW_CHECKS, "too few checks")?;
    ensure(report.failures.is_empty(), format!("{:?}", report.failures))?;
    let t = within(start, LAW_TIME)?;
    Ok(format!("{} checks over {} groups, {t}", report.checks, report.groups.len()))
}

fn oracles() -> Check {
    let start = Instant::now();
    let mut compared = 0;
    for g in law_groups().map_err(|e| e.to_string())? {
        let required = match (g.name(), g.params().p) {
            ("grigorchuk", _) => 4,
            ("gupta_sidki", Some(3)) => 3,
            ("adding_machine", _) => 12,
            _ => 1,
        };
        let mut level = 1;
        loop {
            let q = level_quotient(&g, level);
            let order = q.group().order();
            if order > BigUint::from(ORACLE_MAX_ORDER) || level > 12 {
                break;
            }
            let closure = q.group().closure_order(ORACLE_MAX_ORDER as usize);
            ensure(
                closure.map(BigUint::from) == Some(order.clone()),
                format!("{} level {level}: chain {order}, closure {closure:?}", label(&g)),
            )?;
            compared += 1;
            level += 1;
        }
        ensure(level > required, format!("{} stopped below level {required}", label(&g)))?;
    }
    let t = within(start, ORACLE_TIME)?;
    Ok(format!("{compared} level quotients agree, {t}"))
}

fn relations() -> Check {
    let start = Instant::now();
    let g = builtin("grigorchuk", &Params::default()).map_err(|e| e.to_string())?;
    let el = |w: &str| g.element(w).map_err(|e| e.to_string());
    let pairs = [
        ("b b", "e"),
        ("c c", "e"),
        ("d d", "e"),
        ("b c", "d"),
        ("c d", "b"),
        ("d b", "c"),
    ];
    for (lhs, rhs) in pairs {
        let (x, y) = (el(lhs)?, el(rhs)?);
        ensure(
            equal(&x, &y, 10_000).map_err(|e| e.to_string())? == Equality::Equal,
            format!("{lhs} = {rhs} not certified"),
        )?;
        let diff = x.multiply(&y.invert()).map_err(|e| e.to_string())?;
        let Closure::Closed(set) = section_closure(g.system(), &[diff.word().clone()], 10_000)
        else {
            return Err(format!("{lhs} = {rhs}: section closure overflows"));
        };
        ensure(
            set.iter().all(|w| g.system().decompose(w).perm.is_identity()),
            format!("{lhs} = {rhs}: closed set has a moving element"),
        )?;
        ensure(
            x.leaf_perm(RELATIONS_LEVEL) == y.leaf_perm(RELATIONS_LEVEL),
            format!("{lhs} and {rhs} differ on level {RELATIONS_LEVEL}"),
        )?;
    }
    let t = within(start, RELATIONS_TIME)?;
    Ok(format!("6 relations certified, leaf actions agree to level {RELATIONS_LEVEL}, {t}"))
}

fn branching(art: &mut Artifacts) -> Check {
    let start = Instant::now();
    let g = builtin("grigorchuk", &Params::default()).map_err(|e| e.to_string())?;
    let m = discover_m(&g, 4, 2)
        .map_err(|e| e.to_string())?
        .ok_or("no m discovered")?;
    for n in [1, 2] {
        let name = format!("branching_n{n}.json");
        let o = art.run(&name, verify(Lemma::BranchingLemma, "grigorchuk", Params::default(), m, n, m + n + 1))?;
        ensure(o.report.verdict == Verdict::Pass, format!("n = {n}: {:?}", o.report.diagnostics))?;
    }
    let o = art.run(
        "branching_m0.json",
        verify(Lemma::BranchingLemma, "grigorchuk", Params::default(), 0, 1, 4),
    )?;
    let r: StabResult = result(&o)?;
    ensure(
        o.report.verdict == Verdict::Fail
            && matches!(r.certificates[0].verdict, StabVerdict::Unequal { .. }),
        "m = 0 should fail with a witness",
    )?;
    let t = within(start, BRANCHING_TIME)?;
    Ok(format!("m = {m}, n = 1, 2 pass; m = 0 fails with witness, {t}"))
}

fn samestabs(art: &mut Artifacts) -> Check {
    let mut found = Vec::new();
    for (name, params, file) in [
        ("grigorchuk", Params::default(), "samestabs_grigorchuk.json"),
        ("gupta_sidki", Params::prime(3), "samestabs_gs3.json"),
    ] {
        let g = builtin(name, &params).map_err(|e| e.to_string())?;
        let m = discover_m(&g, 4, 2)
            .map_err(|e| e.to_string())?
            .ok_or("no m discovered")?;
        let o = art.run(file, verify(Lemma::Samestabs, name, params, m, 1, m + 2))?;
        ensure(o.report.verdict == Verdict::Pass, format!("{name}: {:?}", o.report.diagnostics))?;
        found.push(format!("{name} m = {m}"));
    }
    Ok(found.join(", "))
}

fn psi(art: &mut Artifacts) -> Check {
    let config = RunConfig::new(Command::Verify {
        lemma: Lemma::PsiRank,
        m: None,
        n: None,
        count: None,
    })
    .with_group("grigorchuk", Params::default())
    .with_levels([PSI_LEVEL]);
    let o = art.run("psi_rank.json", config)?;
    let r: PsiResult = result(&o)?;
    ensure(r.profile.len() == PSI_LEVEL + 1, "short profile")?;
    ensure(r.profile.iter().all(|&x| x <= 4), format!("rank above 4: {:?}", r.profile))?;
    ensure(r.constant_from < PSI_LEVEL, format!("not constant: {:?}", r.profile))?;
    ensure(
        r.rotor_profile == (1..=PSI_LEVEL + 1).collect::<Vec<_>>(),
        format!("rotor ranks {:?}", r.rotor_profile),
    )?;
    Ok(format!("ranks {:?} constant from n = {}; rotor ranks n+1", r.profile, r.constant_from))
}

fn towers(art: &mut Artifacts) -> Check {
    let start = Instant::now();
    let mut found = Vec::new();
    for (name, params, file) in [
        ("grigorchuk", Params::default(), "tower_grigorchuk.json"),
        ("gupta_sidki", Params::prime(3), "tower_gs3.json"),
    ] {
        let config = RunConfig::new(Command::Tower {
            k: 1,
            count: TOWER_COUNT,
        })
        .with_group(name, params);
        let o = art.run(file, config)?;
        let r: TowerReport = result(&o)?;
        ensure(
            r.entries.len() >= TOWER_COUNT,
            format!("{name}: {} entries, {:?}", r.entries.len(), r.diagnostics),
        )?;
        let p = r.p.to_string();
        for e in &r.entries {
            ensure(e.consistent, format!("{name} entry {}: inconsistent", e.index))?;
            for c in &e.certificates {
                ensure(
                    c.outside_h && c.normalizes_h && c.p_th_power_in_h,
                    format!("{name} entry {} level {}: extension checks", e.index, c.level),
                )?;
                ensure(
                    c.com_index.as_deref() == Some(p.as_str())
                        && c.exact.as_ref().is_none_or(|x| x.com_index == p),
                    format!("{name} entry {} level {}: index not {p}", e.index, c.level),
                )?;
            }
            ensure(
                e.distinct_from.len() == e.index - 1
                    && e.distinct_from.iter().all(|w| w.verified()),
                format!("{name} entry {}: distinctness", e.index),
            )?;
            ensure(e.passed, format!("{name} entry {} failed", e.index))?;
        }
        let levels: Vec<String> = r.entries.iter().map(|e| e.n.to_string()).collect();
        found.push(format!("{name} n = {}", levels.join(",")));
    }
    let t = within(start, TOWER_TIME)?;
    Ok(format!("{}, {t}", found.join("; ")))
}

fn adding_machine(art: &mut Artifacts) -> Check {
    let start = Instant::now();
    let xs = vec![0, 1, 3, 5, 7, 9, 11, 13];
    let config =
        RunConfig::new(Command::AddingMachine { xs: xs.clone() }).with_levels([ADDING_MACHINE_LEVEL]);
    let o = art.run("adding_machine.json", config)?;
    let r: FamilyReport = result(&o)?;
    ensure(r.members.len() == xs.len(), "missing members")?;
    let order = (BigUint::from(2u32) << ADDING_MACHINE_LEVEL).to_string();
    for m in &r.members {
        ensure(
            m.involution
                && m.inverts_tau
                && m.contains_a
                && m.index_over_a == "2"
                && m.extension_order == order,
            format!("residue {}", m.x),
        )?;
    }
    ensure(r.pairwise_distinct, "members coincide")?;
    ensure(o.report.verdict == Verdict::Pass, "verdict")?;
    let t = within(start, ADDING_MACHINE_TIME)?;
    Ok(format!("{} residues at n = {ADDING_MACHINE_LEVEL}, {t}", xs.len()))
}

fn dihedral(art: &mut Artifacts) -> Check {
    let config = RunConfig::new(Command::Dihedral).with_levels(DIHEDRAL_LEVELS);
    let o = art.run("dihedral.json", config.clone())?;
    let r: Vec<DihedralReport> = result(&o)?;
    ensure(r.len() == DIHEDRAL_LEVELS.count(), "missing levels")?;
    for (d, n) in r.iter().zip(DIHEDRAL_LEVELS) {
        ensure(
            d.order == (BigUint::from(1u32) << (n + 1)).to_string()
                && d.dihedral_presentation
                && d.index_two_subgroups == 3,
            format!("level {n}: {d:?}"),
        )?;
    }
    // the same run as a CSV table, to replay that format too
    let csv = RunConfig {
        format: Format::Csv,
        ..config
    };
    art.run("dihedral.csv", csv)?;
    Ok(format!("levels {DIHEDRAL_LEVELS:?}: orders 2^(n+1), dihedral, 3 index-2 subgroups"))
}

fn determinism(art: &Artifacts) -> Check {
    ensure(!art.files.is_empty(), "no artifacts")?;
    let exe = env!("CARGO_BIN_EXE_ssg");
    for (path, text) in &art.files {
        let stored = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        ensure(&stored == text, "file changed on disk")?;
        let summary = replay(&stored).map_err(|e| e.to_string())?;
        ensure(
            summary.identical && summary.discrepancies.is_empty(),
            format!("{}: {:?}", name(path), summary.discrepancies),
        )?;
        let status = std::process::Command::new(exe)
            .arg("replay")
            .arg(path)
            .output()
            .map_err(|e| e.to_string())?
            .status;
        ensure(status.success(), format!("ssg replay {}: {status}", name(path)))?;
    }
    Ok(format!("{} reports replay byte-identically", art.files.len()))
}

fn name(path: &Path) -> String {
    path.file_name().unwrap().to_string_lossy().into_owned()
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut art = Artifacts {
        dir: dir.path().to_path_buf(),
        files: Vec::new(),
    };
    let results: Vec<(&str, Check)> = vec![
        ("wreath-recursion laws", laws()),
        ("chain and closure orders", oracles()),
        ("Grigorchuk relations", relations()),
        ("branching lemma", branching(&mut art)),
        ("same stabilizers", samestabs(&mut art)),
        ("rank profile", psi(&mut art)),
        ("extension towers", towers(&mut art)),
        ("adding machine family", adding_machine(&mut art)),
        ("dihedral images", dihedral(&mut art)),
        ("determinism and replay", determinism(&art)),
    ];
    let mut failed = 0;
    for (i, (title, r)) in results.iter().enumerate() {
        match r {
            Ok(msg) => println!("criterion {:>2} PASS {title}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL {title}: {msg}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
