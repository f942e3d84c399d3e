//! Randomized checks of the wreath-recursion laws on catalog groups.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use ssg_core::catalog::{builtin, Params, SelfSimilarGroup, BUILTINS};
use ssg_core::recursion::{equal, Element, Equality, Letter, Vertex, Word};
use ssg_core::Result;

const MAX_WORD: usize = 6;
const MAX_VERTEX: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupLaws {
    pub group: String,
    pub checks: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawReport {
    pub seed: u64,
    pub checks: usize,
    pub groups: Vec<GroupLaws>,
    pub failures: Vec<String>,
}

/// Every builtin with its default parameters, plus Gupta–Sidki at p = 5.
pub fn law_groups() -> Result<Vec<SelfSimilarGroup>> {
    let mut groups = BUILTINS
        .iter()
        .map(|(name, _)| builtin(name, &Params::default()))
        .collect::<Result<Vec<_>>>()?;
    groups.push(builtin("gupta_sidki", &Params::prime(5))?);
    Ok(groups)
}

/// Group name with its prime, when it has one.
pub fn label(g: &SelfSimilarGroup) -> String {
    match g.params().p {
        Some(p) => format!("{}(p={p})", g.name()),
        None => g.name().to_string(),
    }
}

fn random_element(rng: &mut ChaCha8Rng, g: &SelfSimilarGroup) -> Element {
    let gens = g.generator_indices();
    let len = rng.gen_range(0..=MAX_WORD);
    let letters = (0..len)
        .map(|_| Letter::new(gens[rng.gen_range(0..gens.len())], rng.gen_bool(0.5)))
        .collect();
    Element::new(g.system().clone(), Word::new(letters))
}

fn random_vertex(rng: &mut ChaCha8Rng, d: usize, max: usize) -> Vertex {
    let len = rng.gen_range(0..=max);
    Vertex::from_letters((0..len).map(|_| rng.gen_range(0..d as u32)).collect())
}

fn same(a: &Element, b: &Element, budget: usize) -> Result<std::result::Result<(), String>> {
    Ok(match equal(a, b, budget)? {
        Equality::Equal => Ok(()),
        Equality::Distinct(v) => Err(format!("{a} and {b} differ at {v}")),
        Equality::Unknown => Err(format!("{a} = {b} undecided within {budget} sections")),
    })
}

/// One law, chosen by `which`, on random data.
fn check_one(
    rng: &mut ChaCha8Rng,
    g: &SelfSimilarGroup,
    which: usize,
    budget: usize,
) -> Result<std::result::Result<(), String>> {
    let d = g.degree();
    let (g1, g2) = (random_element(rng, g), random_element(rng, g));
    let v = random_vertex(rng, d, MAX_VERTEX);
    Ok(match which % 5 {
        0 => {
            let lhs = g1.multiply(&g2)?.act(&v)?;
            let rhs = g1.act(&g2.act(&v)?)?;
            if lhs == rhs {
                Ok(())
            } else {
                Err(format!("({g1})({g2}) moves {v} to {lhs}, composition gives {rhs}"))
            }
        }
        1 => {
            let lhs = g1.multiply(&g2)?.section(&v)?;
            let rhs = g1.section(&g2.act(&v)?)?.multiply(&g2.section(&v)?)?;
            same(&lhs, &rhs, budget)?
        }
        2 => {
            let w = random_vertex(rng, d, MAX_VERTEX);
            let lhs = g1.act(&v.concat(&w))?;
            let rhs = g1.act(&v)?.concat(&g1.section(&v)?.act(&w)?);
            if lhs == rhs {
                Ok(())
            } else {
                Err(format!("{g1} on {v}{w}: {lhs} against {rhs}"))
            }
        }
        3 => {
            let lhs = g1.invert().section(&v)?;
            let rhs = g1.section(&g1.invert().act(&v)?)?.invert();
            same(&lhs, &rhs, budget)?
        }
        _ => {
            let w = random_vertex(rng, d, 2);
            let lhs = g1.section(&v.concat(&w))?;
            let rhs = g1.section(&v)?.section(&w)?;
            same(&lhs, &rhs, budget)?
        }
    })
}

/// At least `total` checks spread evenly over [`law_groups`].
pub fn check_laws(total: usize, seed: u64, budget: usize) -> Result<LawReport> {
    let groups = law_groups()?;
    let per_group = total.div_ceil(groups.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LawReport {
        seed,
        checks: 0,
        groups: Vec::new(),
        failures: Vec::new(),
    };
    for g in &groups {
        for i in 0..per_group {
            if let Err(msg) = check_one(&mut rng, g, i, budget)? {
                report.failures.push(format!("{}: {msg}", label(g)));
            }
        }
        report.checks += per_group;
        report.groups.push(GroupLaws {
            group: label(g),
            checks: per_group,
        });
    }
    Ok(report)
}
