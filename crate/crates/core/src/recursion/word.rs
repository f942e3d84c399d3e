use std::fmt;

/// One generator occurrence, possibly inverted.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter {
    pub generator: u32,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: u32, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inverted(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

/// A freely reduced word over the generators of a recursion system.
///
/// `x1 x2 … xk` denotes the composition `x1 ∘ x2 ∘ … ∘ xk`: the rightmost
/// letter acts first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word and freely reduces it.
    pub fn new(letters: Vec<Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
        for l in letters {
            match out.last() {
                Some(&last) if last == l.inverted() => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Word(out)
    }

    pub fn generator(index: u32) -> Self {
        Word(vec![Letter::new(index, false)])
    }

    /// `generator^exponent`.
    pub fn power_of(index: u32, exponent: i64) -> Self {
        let letter = Letter::new(index, exponent < 0);
        Word(vec![letter; exponent.unsigned_abs() as usize])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word::new(letters)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverted()).collect())
    }

    pub fn pow(&self, exponent: i64) -> Word {
        let base = if exponent < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::with_capacity(base.len() * exponent.unsigned_abs() as usize);
        for _ in 0..exponent.unsigned_abs() {
            letters.extend_from_slice(&base.0);
        }
        Word::new(letters)
    }

    /// Runs of equal letters as `(generator, signed exponent)`.
    pub fn runs(&self) -> Vec<(u32, i64)> {
        let mut runs: Vec<(u32, i64)> = Vec::new();
        for l in &self.0 {
            let step = if l.inverse { -1 } else { 1 };
            match runs.last_mut() {
                Some((g, e)) if *g == l.generator && (*e < 0) == l.inverse => *e += step,
                _ => runs.push((l.generator, step)),
            }
        }
        runs
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self
            .runs()
            .into_iter()
            .map(|(g, e)| if e == 1 { format!("g{g}") } else { format!("g{g}^{e}") })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_reduction() {
        let a = Letter::new(0, false);
        let b = Letter::new(1, false);
        let w = Word::new(vec![a, b, b.inverted(), a.inverted(), b]);
        assert_eq!(w, Word::generator(1));
        assert!(Word::generator(0).concat(&Word::generator(0).inverse()).is_empty());
    }

    #[test]
    fn runs_and_powers() {
        let w = Word::power_of(2, -3).concat(&Word::generator(0));
        assert_eq!(w.runs(), vec![(2, -3), (0, 1)]);
        assert_eq!(Word::generator(1).pow(-2), Word::power_of(1, -2));
        assert!(Word::empty().inverse().is_empty());
    }
}
