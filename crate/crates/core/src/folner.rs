//! Følner schedules: increasing finite word sets `F_n` whose translates by
//! each generator differ from `F_n` in at most `ε_n |F_n|` elements.
//!
//! ℤ and ℤ^d schedules are built over commuting basis words and handled
//! through exponent vectors, so the defect is exact set arithmetic. Finite
//! schedules use one fixed list of words covering the group.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::group::{enumerate_ball_capped, GroupRep, Word, DEFAULT_BALL_CAP};

/// Default constant in `ε_n = c / n`.
pub const DEFAULT_EPS_CONST: f64 = 3.0;
/// Schedules verify the defect invariant for `n` up to this index.
pub const VERIFY_UP_TO: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Z,
    Zd(usize),
    Finite,
}

impl FromStr for GroupKind {
    type Err = Error;

    /// Accepts `z`, `z^d`/`zd` (e.g. `z^2`, `z2`) and `finite`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "z" {
            return Ok(GroupKind::Z);
        }
        if t == "finite" {
            return Ok(GroupKind::Finite);
        }
        let rest = t.strip_prefix("z^").or_else(|| t.strip_prefix('z'));
        match rest.and_then(|r| r.parse::<usize>().ok()) {
            Some(1) => Ok(GroupKind::Z),
            Some(d) if d >= 1 => Ok(GroupKind::Zd(d)),
            _ => Err(Error::UnsupportedGroup(s.to_string())),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Z => write!(f, "z"),
            GroupKind::Zd(d) => write!(f, "z^{d}"),
            GroupKind::Finite => write!(f, "finite"),
        }
    }
}

/// How the schedule index grows between outer iterations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Advance {
    /// `n = 1, 2, 3, …`
    #[default]
    Linear,
    /// `n = 1, 2, 4, 8, …`
    Doubling,
}

impl FromStr for Advance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(Advance::Linear),
            "doubling" => Ok(Advance::Doubling),
            other => Err(Error::Invalid(format!(
                "unknown schedule advance `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
enum Sets {
    /// Boxes `{0..n-1}^d` of exponents over commuting basis words.
    Boxes(Vec<Word>),
    /// The same word list for every `n`.
    Fixed(Vec<Word>),
}

#[derive(Clone, Debug)]
pub struct FolnerSchedule {
    kind: GroupKind,
    sets: Sets,
    eps_const: f64,
}

/// Worst defect ratio `|F Δ γF| / |F|` at one index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefectCheck {
    pub n: usize,
    pub ratio: f64,
    pub eps: f64,
}

impl FolnerSchedule {
    /// Intervals `{w^0, …, w^{n-1}}`.
    pub fn z(basis: Word) -> Result<Self> {
        Self::boxes(vec![basis])
    }

    /// Boxes over `d` basis words, which must generate a copy of ℤ^d.
    pub fn zd(basis: Vec<Word>) -> Result<Self> {
        Self::boxes(basis)
    }

    fn boxes(basis: Vec<Word>) -> Result<Self> {
        let kind = match basis.len() {
            0 => return Err(Error::UnsupportedGroup("z^0".into())),
            1 => GroupKind::Z,
            d => GroupKind::Zd(d),
        };
        let s = FolnerSchedule {
            kind,
            sets: Sets::Boxes(basis),
            eps_const: DEFAULT_EPS_CONST,
        };
        s.verify(VERIFY_UP_TO)?;
        Ok(s)
    }

    /// A finite group given by words covering it; `F_n` is that list for
    /// every `n`.
    pub fn finite(elements: Vec<Word>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Invalid(
                "a finite schedule needs at least one word".into(),
            ));
        }
        Ok(FolnerSchedule {
            kind: GroupKind::Finite,
            sets: Sets::Fixed(elements),
            eps_const: DEFAULT_EPS_CONST,
        })
    }

    /// The whole group generated by `rep`, which must close up within the
    /// default ball cap. Translation invariance is checked on the matrices.
    pub fn finite_closure(rep: &GroupRep) -> Result<Self> {
        let mut radius = 2;
        loop {
            let ball = enumerate_ball_capped(rep, radius, DEFAULT_BALL_CAP).map_err(|_| {
                Error::UnsupportedGroup(format!(
                    "{} does not close up within {DEFAULT_BALL_CAP} elements",
                    rep.name
                ))
            })?;
            if ball.layer_ends.windows(2).any(|w| w[0] == w[1]) {
                for l in rep.letters() {
                    let g = rep.letter_matrix(l)?;
                    if !ball
                        .elements
                        .iter()
                        .all(|e| ball.contains_matrix(&(g * e), 1e-8))
                    {
                        return Err(Error::UnsupportedGroup(format!(
                            "{} is not a finite group",
                            rep.name
                        )));
                    }
                }
                return Self::finite(ball.words);
            }
            radius *= 2;
        }
    }

    /// Schedule of the given kind over the first generators of `rep`:
    /// `g0` for ℤ, `g0..g{d-1}` for ℤ^d, and the closure for finite groups.
    pub fn for_rep(kind: GroupKind, rep: &GroupRep) -> Result<Self> {
        let d = match kind {
            GroupKind::Z => 1,
            GroupKind::Zd(d) => d,
            GroupKind::Finite => return Self::finite_closure(rep),
        };
        if d > rep.num_generators() {
            return Err(Error::UnsupportedGroup(format!(
                "{kind} needs {d} generators, {} has {}",
                rep.name,
                rep.num_generators()
            )));
        }
        Self::boxes((0..d).map(|i| Word::power(i, 1)).collect())
    }

    pub fn with_eps_const(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Invalid(format!(
                "ε constant must be positive, got {c}"
            )));
        }
        self.eps_const = c;
        self.verify(VERIFY_UP_TO)?;
        Ok(self)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn eps(&self, n: usize) -> f64 {
        self.eps_const / n as f64
    }

    /// `|F_n|`.
    pub fn set_size(&self, n: usize) -> usize {
        match &self.sets {
            Sets::Boxes(b) => n.saturating_pow(b.len() as u32),
            Sets::Fixed(w) => w.len(),
        }
    }

    /// Words of `F_n` (`n ≥ 1`).
    pub fn set(&self, n: usize) -> Vec<Word> {
        match &self.sets {
            Sets::Fixed(w) => w.clone(),
            Sets::Boxes(basis) => box_exponents(basis.len(), n)
                .into_iter()
                .map(|e| {
                    Word(
                        e.iter()
                            .zip(basis)
                            .flat_map(|(&k, b)| power_of(b, k).0)
                            .collect(),
                    )
                })
                .collect(),
        }
    }

    /// Schedule indices in order, stopping before `|F_n|` exceeds `cap`.
    /// Finite schedules have the single index 1.
    pub fn indices(&self, advance: Advance, cap: usize) -> Vec<usize> {
        if let Sets::Fixed(_) = self.sets {
            return vec![1];
        }
        let mut out = Vec::new();
        let mut n = 1;
        while self.set_size(n) <= cap {
            out.push(n);
            n = match advance {
                Advance::Linear => n + 1,
                Advance::Doubling => n * 2,
            };
        }
        out
    }

    /// Defect at index `n`, worst over the basis directions and their
    /// inverses. Finite schedules report zero; their invariance is checked
    /// where they are built.
    pub fn defect(&self, n: usize) -> DefectCheck {
        let ratio = match &self.sets {
            Sets::Fixed(_) => 0.0,
            Sets::Boxes(basis) => {
                let d = basis.len();
                let set: HashSet<Vec<i64>> = box_exponents(d, n).into_iter().collect();
                let mut worst = 0usize;
                for axis in 0..d {
                    for step in [1i64, -1] {
                        let shifted: HashSet<Vec<i64>> = set
                            .iter()
                            .map(|e| {
                                let mut e = e.clone();
                                e[axis] += step;
                                e
                            })
                            .collect();
                        worst = worst.max(set.symmetric_difference(&shifted).count());
                    }
                }
                worst as f64 / set.len() as f64
            }
        };
        DefectCheck {
            n,
            ratio,
            eps: self.eps(n),
        }
    }

    /// Checks `|F_n Δ γF_n| < ε_n |F_n|` for `n = 1..=up_to` (bounded by
    /// the set size staying reasonable).
    pub fn verify(&self, up_to: usize) -> Result<()> {
        for n in 1..=up_to {
            if self.set_size(n) > DEFAULT_BALL_CAP {
                break;
            }
            let c = self.defect(n);
            if c.ratio >= c.eps {
                return Err(Error::Invalid(format!(
                    "Følner defect {} at n = {n} is not below ε_n = {}",
                    c.ratio, c.eps
                )));
            }
        }
        Ok(())
    }
}

fn power_of(w: &Word, k: i64) -> Word {
    let base = if k >= 0 { w.clone() } else { w.inverse() };
    Word(base.0.repeat(k.unsigned_abs() as usize))
}

fn box_exponents(d: usize, n: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n as i64).map(move |k| {
                    let mut e = prefix.clone();
                    e.push(k);
                    e
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::InvertibleMatrix;

    #[test]
    fn kinds_parse() {
        assert_eq!("z".parse::<GroupKind>().unwrap(), GroupKind::Z);
        assert_eq!("Z^2".parse::<GroupKind>().unwrap(), GroupKind::Zd(2));
        assert_eq!("z3".parse::<GroupKind>().unwrap(), GroupKind::Zd(3));
        assert_eq!("finite".parse::<GroupKind>().unwrap(), GroupKind::Finite);
        assert!(matches!(
            "free".parse::<GroupKind>(),
            Err(Error::UnsupportedGroup(_))
        ));
        assert!(matches!(
            "z^0".parse::<GroupKind>(),
            Err(Error::UnsupportedGroup(_))
        ));
    }

    #[test]
    fn integer_intervals() {
        let s = FolnerSchedule::z(Word::parse("g0").unwrap()).unwrap();
        let f = s.set(10);
        assert_eq!(f.len(), 10);
        assert_eq!(f[3].to_string(), "g0g0g0");
        let c = s.defect(10);
        assert!((c.ratio - 0.2).abs() < 1e-15);
        assert!(c.ratio < c.eps);
    }

    #[test]
    fn unit_constant_rejects_intervals() {
        let s = FolnerSchedule::z(Word::parse("g0").unwrap()).unwrap();
        assert!(s.with_eps_const(1.0).is_err());
    }

    #[test]
    fn square_boxes() {
        let s = FolnerSchedule::zd(vec![Word::parse("g0").unwrap(), Word::parse("g1").unwrap()])
            .unwrap();
        assert_eq!(s.kind(), GroupKind::Zd(2));
        assert_eq!(s.set(20).len(), 400);
        assert!((s.defect(20).ratio - 0.1).abs() < 1e-15);
        assert_eq!(*s.indices(Advance::Linear, 4096).last().unwrap(), 64);
    }

    #[test]
    fn indices_by_advance() {
        let s = FolnerSchedule::z(Word::parse("g0").unwrap()).unwrap();
        assert_eq!(s.indices(Advance::Doubling, 20), vec![1, 2, 4, 8, 16]);
        assert_eq!(s.indices(Advance::Linear, 4).len(), 4);
    }

    #[test]
    fn involution_closure() {
        let a = InvertibleMatrix::from_rows(&[&[1.0, 1.0], &[0.0, -1.0]]).unwrap();
        let rep = GroupRep::new("c2", vec![a], vec![]).unwrap();
        let s = FolnerSchedule::for_rep(GroupKind::Finite, &rep).unwrap();
        assert_eq!(s.set(7).len(), 2);
        assert_eq!(s.defect(7).ratio, 0.0);
        assert_eq!(s.indices(Advance::Doubling, 4096), vec![1]);
    }

    #[test]
    fn infinite_group_is_not_finite() {
        let a = InvertibleMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 1.0]]).unwrap();
        let rep = GroupRep::new("z", vec![a], vec![]).unwrap();
        assert!(matches!(
            FolnerSchedule::for_rep(GroupKind::Finite, &rep),
            Err(Error::UnsupportedGroup(_))
        ));
    }
}
