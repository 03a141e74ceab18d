//! Finitely generated groups represented by invertible matrices, acting on
//! the cone by `(γ, P) ↦ π(γ) P π(γ)*`.
//!
//! Suprema over the group are approximated on word balls: all reduced words
//! of length at most `R`, with words whose images agree to [`DEDUP_TOL`]
//! identified. Every such quantity carries the radius it was measured at.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::{congruence_raw, op_norm, InvertibleMatrix, Mat, PosDefMatrix};
use crate::thompson::dist;

/// Images closer than this (Frobenius) are the same group element.
pub const DEDUP_TOL: f64 = 1e-8;
/// Default cap on the number of elements in a word ball.
pub const DEFAULT_BALL_CAP: usize = 4096;
/// Relations must evaluate to the identity within this Frobenius distance.
pub const RELATION_TOL: f64 = 1e-8;
/// Relative tolerance of the size plateau detector.
pub const PLATEAU_TOL: f64 = 1e-9;

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn gen(generator: usize) -> Self {
        Letter {
            generator,
            inverse: false,
        }
    }

    pub fn inv(generator: usize) -> Self {
        Letter {
            generator,
            inverse: true,
        }
    }

    pub fn inverted(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.inverse { 'G' } else { 'g' };
        write!(f, "{c}{}", self.generator)
    }
}

/// A word over the generators and their inverses, read left to right:
/// `π(l₁ l₂ … l_k) = π(l₁) π(l₂) ⋯ π(l_k)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    /// `g^k`, using the inverse letter for negative `k`.
    pub fn power(generator: usize, k: i64) -> Self {
        let l = if k < 0 {
            Letter::inv(generator)
        } else {
            Letter::gen(generator)
        };
        Word(vec![l; k.unsigned_abs() as usize])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverted()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.clone();
        for &l in &other.0 {
            out.push_reduced(l);
        }
        out
    }

    /// Appends with free cancellation against the last letter.
    pub fn push_reduced(&mut self, l: Letter) {
        if self.0.last() == Some(&l.inverted()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    /// Parses tokens `g<i>` (generator) and `G<i>` (inverse), concatenated
    /// or separated by commas/whitespace. `e` or the empty string is the
    /// identity.
    pub fn parse(s: &str) -> Result<Word> {
        let bad = |msg: String| Error::Parse {
            what: "word".into(),
            msg,
        };
        let mut letters = Vec::new();
        let cleaned: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .collect();
        if cleaned.is_empty() || cleaned == "e" {
            return Ok(Word::identity());
        }
        let chars: Vec<char> = cleaned.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let inverse = match chars[i] {
                'g' => false,
                'G' => true,
                c => return Err(bad(format!("unexpected character '{c}' in \"{s}\""))),
            };
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if start == i {
                return Err(bad(format!("missing generator index in \"{s}\"")));
            }
            let idx: String = chars[start..i].iter().collect();
            let generator = idx
                .parse()
                .map_err(|_| bad(format!("bad generator index in \"{s}\"")))?;
            letters.push(Letter { generator, inverse });
        }
        Ok(Word(letters))
    }

    /// Parses a list of tokens such as `["g0", "G0", "g1"]`.
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Result<Word> {
        let mut letters = Vec::new();
        for t in tokens {
            letters.extend(Word::parse(t.as_ref())?.0);
        }
        Ok(Word(letters))
    }

    pub fn tokens(&self) -> Vec<String> {
        self.0.iter().map(|l| l.to_string()).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A representation of a finitely generated group by invertible matrices.
#[derive(Clone, Debug)]
pub struct GroupRep {
    pub name: String,
    dim: usize,
    generators: Vec<InvertibleMatrix>,
    relations: Vec<Word>,
}

impl GroupRep {
    pub fn new(
        name: impl Into<String>,
        generators: Vec<InvertibleMatrix>,
        relations: Vec<Word>,
    ) -> Result<Self> {
        let first = generators.first().ok_or_else(|| {
            Error::Invalid("a representation needs at least one generator".into())
        })?;
        let dim = first.dim();
        if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimMismatch {
                expected: dim,
                found: g.dim(),
            });
        }
        let rep = GroupRep {
            name: name.into(),
            dim,
            generators,
            relations,
        };
        for r in &rep.relations {
            let m = rep.eval(r)?;
            let defect = (m - Mat::identity(dim, dim)).norm();
            if defect > RELATION_TOL {
                return Err(Error::Invalid(format!(
                    "relation {r} evaluates to a matrix at distance {defect:e} from the identity"
                )));
            }
        }
        Ok(rep)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[InvertibleMatrix] {
        &self.generators
    }

    pub fn relations(&self) -> &[Word] {
        &self.relations
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// All letters `g_i`, `G_i`, in that order per generator.
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.generators.len())
            .flat_map(|i| [Letter::gen(i), Letter::inv(i)])
            .collect()
    }

    pub fn letter_matrix(&self, l: Letter) -> Result<&Mat> {
        let g = self.generators.get(l.generator).ok_or_else(|| {
            Error::Invalid(format!(
                "letter {l} refers to a missing generator ({} available)",
                self.generators.len()
            ))
        })?;
        Ok(if l.inverse { g.inverse() } else { g.entries() })
    }

    /// `π(w)`.
    pub fn eval(&self, w: &Word) -> Result<Mat> {
        let mut m = Mat::identity(self.dim, self.dim);
        for &l in &w.0 {
            m *= self.letter_matrix(l)?;
        }
        Ok(m)
    }

    /// The representation generated by the images of `words`.
    pub fn subgroup(&self, name: impl Into<String>, words: &[Word]) -> Result<GroupRep> {
        let gens = words
            .iter()
            .map(|w| Ok(InvertibleMatrix::from_trusted(self.eval(w)?)))
            .collect::<Result<Vec<_>>>()?;
        GroupRep::new(name, gens, Vec::new())
    }
}

fn check_dim(rep: &GroupRep, found: usize) -> Result<()> {
    if rep.dim != found {
        return Err(Error::DimMismatch {
            expected: rep.dim,
            found,
        });
    }
    Ok(())
}

/// `π(w) p π(w)*`.
pub fn act(rep: &GroupRep, w: &Word, p: &PosDefMatrix) -> Result<PosDefMatrix> {
    check_dim(rep, p.dim())?;
    Ok(act_matrix(&rep.eval(w)?, p))
}

pub(crate) fn act_matrix(g: &Mat, p: &PosDefMatrix) -> PosDefMatrix {
    congruence_raw(g, p)
}

/// Near-duplicate detection on matrices: a grid hash on two entries with a
/// neighbourhood scan.
pub(crate) struct Dedup {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    items: Vec<Mat>,
    tol: f64,
}

impl Dedup {
    pub(crate) fn new(tol: f64) -> Self {
        Dedup {
            cell: (tol * 100.0).max(1e-6),
            buckets: HashMap::new(),
            items: Vec::new(),
            tol,
        }
    }

    fn key(&self, m: &Mat) -> (i64, i64) {
        let n = m.nrows();
        let a = m[(0, 0)].re_part();
        let b = m[(n - 1, 0)].re_part();
        (
            (a / self.cell).floor() as i64,
            (b / self.cell).floor() as i64,
        )
    }

    pub(crate) fn find(&self, m: &Mat) -> Option<usize> {
        let (ka, kb) = self.key(m);
        for da in -1..=1 {
            for db in -1..=1 {
                if let Some(ids) = self
                    .buckets
                    .get(&(ka.saturating_add(da), kb.saturating_add(db)))
                {
                    for &i in ids {
                        if (&self.items[i] - m).norm() <= self.tol {
                            return Some(i);
                        }
                    }
                }
            }
        }
        None
    }

    /// Inserts unless a near-duplicate exists; returns the index and whether
    /// it was new.
    pub(crate) fn insert(&mut self, m: Mat) -> (usize, bool) {
        if let Some(i) = self.find(&m) {
            return (i, false);
        }
        let k = self.key(&m);
        let i = self.items.len();
        self.buckets.entry(k).or_default().push(i);
        self.items.push(m);
        (i, true)
    }

    pub(crate) fn len(&self) -> usize {
        self.items.len()
    }

    pub(crate) fn into_items(self) -> Vec<Mat> {
        self.items
    }
}

trait RePart {
    fn re_part(&self) -> f64;
}

impl RePart for crate::matrix::Scalar {
    fn re_part(&self) -> f64 {
        nalgebra::ComplexField::real(*self)
    }
}

/// Deduplicated group elements of word length at most `radius`.
#[derive(Clone, Debug)]
pub struct WordBall {
    pub radius: usize,
    /// Shortest word found for each element, in BFS order.
    pub words: Vec<Word>,
    pub elements: Vec<Mat>,
    /// `layer_ends[r]` = number of elements of length ≤ r.
    pub layer_ends: Vec<usize>,
}

impl WordBall {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Orbit `{π(w) p π(w)*}` over the ball.
    pub fn orbit(&self, p: &PosDefMatrix) -> Vec<PosDefMatrix> {
        self.elements.iter().map(|g| act_matrix(g, p)).collect()
    }

    /// Whether some element is within `tol` (Frobenius) of `m`.
    pub fn contains_matrix(&self, m: &Mat, tol: f64) -> bool {
        self.elements.iter().any(|e| (e - m).norm() <= tol)
    }
}

/// Breadth-first enumeration of reduced words up to `radius`.
pub fn enumerate_ball(rep: &GroupRep, radius: usize) -> Result<WordBall> {
    enumerate_ball_capped(rep, radius, DEFAULT_BALL_CAP)
}

pub fn enumerate_ball_capped(rep: &GroupRep, radius: usize, cap: usize) -> Result<WordBall> {
    let n = rep.dim;
    let letters = rep.letters();
    let mut dedup = Dedup::new(DEDUP_TOL);
    let mut words = vec![Word::identity()];
    dedup.insert(Mat::identity(n, n));
    let mut frontier = vec![0usize];
    let mut layer_ends = vec![1];
    let mut mats: Vec<Mat> = vec![Mat::identity(n, n)];

    for _ in 0..radius {
        let mut next = Vec::new();
        for &idx in &frontier {
            let base_word = words[idx].clone();
            let base = mats[idx].clone();
            for &l in &letters {
                if base_word.0.last() == Some(&l.inverted()) {
                    continue;
                }
                let m = &base * rep.letter_matrix(l)?;
                if m.iter().any(|v| {
                    !v.re_part().is_finite() || !nalgebra::ComplexField::imaginary(*v).is_finite()
                }) {
                    return Err(Error::Invalid(format!(
                        "word {base_word}{l} overflows floating point range"
                    )));
                }
                let (i, fresh) = dedup.insert(m.clone());
                if fresh {
                    if dedup.len() > cap {
                        return Err(Error::BallTooLarge { cap });
                    }
                    let mut w = base_word.clone();
                    w.0.push(l);
                    words.push(w);
                    mats.push(m);
                    next.push(i);
                }
            }
        }
        layer_ends.push(words.len());
        frontier = next;
    }
    Ok(WordBall {
        radius,
        words,
        elements: dedup.into_items(),
        layer_ends,
    })
}

/// Measured size `sup ‖π(w)‖` over a word ball.
#[derive(Clone, Debug, PartialEq)]
pub struct SizeEstimate {
    pub value: f64,
    pub radius_used: usize,
    /// Running maximum per radius `0..=radius_used`.
    pub monotone_history: Vec<f64>,
    /// First radius at which three consecutive history values agree.
    pub plateau_at: Option<usize>,
}

impl SizeEstimate {
    /// False when the history never plateaus, the signature of norm growth
    /// without a uniform bound.
    pub fn uniformly_bounded(&self) -> bool {
        self.plateau_at.is_some()
    }
}

pub(crate) fn detect_plateau(history: &[f64]) -> Option<usize> {
    let eq = |a: f64, b: f64| (a - b).abs() <= PLATEAU_TOL * a.abs().max(b.abs()).max(1.0);
    (2..history.len())
        .find(|&r| eq(history[r], history[r - 1]) && eq(history[r - 1], history[r - 2]))
}

fn running_max_by_layer(ball: &WordBall, values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ball.layer_ends.len());
    let mut best = f64::NEG_INFINITY;
    let mut start = 0;
    for &end in &ball.layer_ends {
        for &v in &values[start..end] {
            best = best.max(v);
        }
        out.push(best);
        start = end;
    }
    out
}

pub fn size_on_ball(ball: &WordBall) -> SizeEstimate {
    let norms: Vec<f64> = ball.elements.iter().map(op_norm).collect();
    let monotone_history = running_max_by_layer(ball, &norms);
    SizeEstimate {
        value: *monotone_history.last().unwrap_or(&1.0),
        radius_used: ball.radius,
        plateau_at: detect_plateau(&monotone_history),
        monotone_history,
    }
}

/// `|π| ≈ max ‖π(w)‖` over the word ball of the given radius.
pub fn rep_size(rep: &GroupRep, radius: usize) -> Result<SizeEstimate> {
    Ok(size_on_ball(&enumerate_ball(rep, radius)?))
}

/// `diam(π) ≈ max d(I, π(w)π(w)*)` over the word ball.
pub fn rep_diam(rep: &GroupRep, radius: usize) -> Result<f64> {
    Ok(diam_on_ball(&enumerate_ball(rep, radius)?))
}

pub fn diam_on_ball(ball: &WordBall) -> f64 {
    let n = ball.elements.first().map(|m| m.nrows()).unwrap_or(1);
    let id = PosDefMatrix::identity(n);
    ball.elements
        .iter()
        .map(|g| dist(&id, &act_matrix(g, &id)))
        .fold(0.0, f64::max)
}

/// `π_t : γ ↦ s^{-t} π(γ) s^{t}`.
pub fn interpolate_rep(rep: &GroupRep, s: &PosDefMatrix, t: f64) -> Result<GroupRep> {
    check_dim(rep, s.dim())?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TOutOfRange(t));
    }
    let fwd = s.powf(t);
    let back = s.powf(-t);
    let gens = rep
        .generators
        .iter()
        .map(|g| InvertibleMatrix::from_trusted(back.entries() * g.entries() * fwd.entries()))
        .collect();
    Ok(GroupRep {
        name: format!("{}_t{t}", rep.name),
        dim: rep.dim,
        generators: gens,
        relations: rep.relations.clone(),
    })
}

/// Positive square root of a fixed point.
pub fn extract_unitariser(t: &PosDefMatrix) -> InvertibleMatrix {
    t.sqrt().to_invertible()
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitariserCheck {
    /// `max_w ‖(S⁻¹π(w)S)(S⁻¹π(w)S)* − I‖` over the ball.
    pub max_defect: f64,
    /// `s(S)`.
    pub size: f64,
    pub radius: usize,
}

/// Checks that `S⁻¹ π(w) S` is unitary on the word ball.
pub fn verify_unitariser(
    rep: &GroupRep,
    s: &InvertibleMatrix,
    radius: usize,
) -> Result<UnitariserCheck> {
    check_dim(rep, s.dim())?;
    let ball = enumerate_ball(rep, radius)?;
    Ok(verify_on_ball(&ball, s))
}

pub fn verify_on_ball(ball: &WordBall, s: &InvertibleMatrix) -> UnitariserCheck {
    let n = s.dim();
    let id = Mat::identity(n, n);
    let s_inv = s.inverse();
    let max_defect = ball
        .elements
        .iter()
        .map(|g| {
            let c = s_inv * g * s.entries();
            op_norm(&(&c * c.adjoint() - &id))
        })
        .fold(0.0, f64::max);
    UnitariserCheck {
        max_defect,
        size: crate::matrix::operator_size(s),
        radius: ball.radius,
    }
}

/// `T̄ = T / sqrt(λ_min λ_max)`, the rescaling with `‖T̄‖ = ‖T̄⁻¹‖`.
pub fn normalize_fixed_point(t: &PosDefMatrix) -> PosDefMatrix {
    let factor = (t.min_eigenvalue() * t.max_eigenvalue()).sqrt().recip();
    t.scale(factor).expect("positive scale factor")
}

/// Max displacement `d(p, π(g) p π(g)*)` over the generators and their
/// inverses.
pub fn generator_displacement(rep: &GroupRep, p: &PosDefMatrix) -> Result<f64> {
    check_dim(rep, p.dim())?;
    let mut worst = 0.0f64;
    for l in rep.letters() {
        let moved = act_matrix(rep.letter_matrix(l)?, p);
        worst = worst.max(dist(p, &moved));
    }
    Ok(worst)
}

/// Max displacement of `p` under the images of the given words.
pub fn word_displacement(rep: &GroupRep, words: &[Word], p: &PosDefMatrix) -> Result<f64> {
    check_dim(rep, p.dim())?;
    let mut worst = 0.0f64;
    for w in words {
        let g = rep.eval(w)?;
        worst = worst.max(dist(p, &act_matrix(&g, p)));
        let g_inv = rep.eval(&w.inverse())?;
        worst = worst.max(dist(p, &act_matrix(&g_inv, p)));
    }
    Ok(worst)
}

/// `s⁻¹ g s` for every generator; unitary exactly when `s²` is fixed.
pub fn conjugated_generators(rep: &GroupRep, s: &InvertibleMatrix) -> Vec<Mat> {
    rep.generators
        .iter()
        .map(|g| s.inverse() * g.entries() * s.entries())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::scalar;
    use std::f64::consts::E;

    fn rotation(theta: f64) -> Mat {
        let (s, c) = theta.sin_cos();
        Mat::from_row_slice(2, 2, &[c, -s, s, c].map(scalar))
    }

    fn conj_rotation(theta: f64) -> InvertibleMatrix {
        let s0 = Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0].map(scalar));
        let s0_inv = s0.clone().try_inverse().unwrap();
        InvertibleMatrix::new(&s0 * rotation(theta) * s0_inv).unwrap()
    }

    fn c2() -> GroupRep {
        let a = InvertibleMatrix::from_rows(&[&[1.0, 1.0], &[0.0, -1.0]]).unwrap();
        GroupRep::new("c2", vec![a], vec![Word::parse("g0g0").unwrap()]).unwrap()
    }

    #[test]
    fn word_parsing() {
        let w = Word::parse("g0G1g12").unwrap();
        assert_eq!(w.0, vec![Letter::gen(0), Letter::inv(1), Letter::gen(12)]);
        assert_eq!(w.to_string(), "g0G1g12");
        assert_eq!(Word::parse("e").unwrap(), Word::identity());
        assert_eq!(Word::from_tokens(&["g0", "G0", "g1"]).unwrap().len(), 3);
        assert!(Word::parse("x1").is_err());
        assert!(Word::parse("g").is_err());
        assert_eq!(Word::parse("g0g1").unwrap().inverse().to_string(), "G1G0");
        assert_eq!(
            Word::parse("g0g1")
                .unwrap()
                .concat(&Word::parse("G1g2").unwrap())
                .to_string(),
            "g0g2"
        );
    }

    #[test]
    fn bad_relation_rejected() {
        let a = InvertibleMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert!(GroupRep::new("bad", vec![a], vec![Word::parse("g0g0").unwrap()]).is_err());
    }

    #[test]
    fn ball_radius_zero() {
        let b = enumerate_ball(&c2(), 0).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b.words[0].is_empty());
    }

    #[test]
    fn ball_of_integers() {
        let rep = GroupRep::new("z", vec![conj_rotation(1.0)], vec![]).unwrap();
        let b = enumerate_ball(&rep, 3).unwrap();
        assert_eq!(b.len(), 7);
        assert_eq!(b.layer_ends, vec![1, 3, 5, 7]);
    }

    #[test]
    fn ball_of_involution() {
        for r in 1..5 {
            assert_eq!(enumerate_ball(&c2(), r).unwrap().len(), 2);
        }
    }

    #[test]
    fn ball_cap() {
        let a = InvertibleMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
        let b = InvertibleMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        let free = GroupRep::new("free", vec![a, b], vec![]).unwrap();
        assert!(matches!(
            enumerate_ball_capped(&free, 8, 100),
            Err(Error::BallTooLarge { cap: 100 })
        ));
    }

    #[test]
    fn action_identity_and_definition() {
        let rep = c2();
        let p = PosDefMatrix::from_rows(&[&[2.0, 0.3], &[0.3, 1.0]]).unwrap();
        let same = act(&rep, &Word::identity(), &p).unwrap();
        assert!((same.entries() - p.entries()).norm() < 1e-15);
        let a = rep.eval(&Word::parse("g0").unwrap()).unwrap();
        let at_id = act(
            &rep,
            &Word::parse("g0").unwrap(),
            &PosDefMatrix::identity(2),
        )
        .unwrap();
        assert!((at_id.entries() - &a * a.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn unitary_rep_size_and_diam() {
        let rep = GroupRep::new(
            "rot",
            vec![InvertibleMatrix::new(rotation(0.7)).unwrap()],
            vec![],
        )
        .unwrap();
        let s = rep_size(&rep, 6).unwrap();
        assert!((s.value - 1.0).abs() < 1e-14);
        assert!(s.uniformly_bounded());
        assert!(rep_diam(&rep, 6).unwrap() < 1e-12);
    }

    #[test]
    fn unbounded_rep_flagged() {
        let a = InvertibleMatrix::from_rows(&[&[E, 0.0], &[0.0, 1.0]]).unwrap();
        let rep = GroupRep::new("unbounded", vec![a], vec![]).unwrap();
        let s = rep_size(&rep, 8).unwrap();
        assert!(!s.uniformly_bounded());
        for (k, v) in s.monotone_history.iter().enumerate() {
            assert!((v.ln() - k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn c2_diameter_two_ways() {
        let rep = c2();
        let a = rep.eval(&Word::parse("g0").unwrap()).unwrap();
        let aa = PosDefMatrix::new(&a * a.adjoint()).unwrap();
        let direct = dist(&PosDefMatrix::identity(2), &aa);
        assert!((rep_diam(&rep, 3).unwrap() - direct).abs() < 1e-14);
        let size = rep_size(&rep, 3).unwrap().value;
        assert!((direct - 2.0 * size.ln()).abs() < 1e-12);
    }

    #[test]
    fn interpolation_endpoints() {
        let rep = c2();
        let s = PosDefMatrix::from_rows(&[&[2.0, 0.3], &[0.3, 1.0]]).unwrap();
        let r0 = interpolate_rep(&rep, &s, 0.0).unwrap();
        assert!((r0.generators()[0].entries() - rep.generators()[0].entries()).norm() < 1e-14);
        assert!(matches!(
            interpolate_rep(&rep, &s, 1.5),
            Err(Error::TOutOfRange(_))
        ));
    }

    #[test]
    fn unitariser_of_constructed_rep() {
        let rep = GroupRep::new("z", vec![conj_rotation(1.0)], vec![]).unwrap();
        let s0 = InvertibleMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 1.0]]).unwrap();
        let check = verify_unitariser(&rep, &s0, 10).unwrap();
        assert!(check.max_defect <= 1e-10);
        assert!((check.size - 2.0).abs() < 1e-14);
        assert!(matches!(
            verify_unitariser(&rep, &InvertibleMatrix::identity(3), 2),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn extract_examples() {
        let u = extract_unitariser(&PosDefMatrix::identity(2));
        assert!((u.entries() - Mat::identity(2, 2)).norm() < 1e-15);
        let u = extract_unitariser(&PosDefMatrix::from_diagonal(&[4.0, 9.0]).unwrap());
        assert!(
            (u.entries() - PosDefMatrix::from_diagonal(&[2.0, 3.0]).unwrap().entries()).norm()
                < 1e-14
        );
    }

    #[test]
    fn normalize_examples() {
        let id = PosDefMatrix::identity(3);
        assert!((normalize_fixed_point(&id).entries() - id.entries()).norm() < 1e-15);
        let t = PosDefMatrix::from_diagonal(&[1.0, E.powi(4)]).unwrap();
        let n = normalize_fixed_point(&t);
        assert!((n.max_eigenvalue() - E * E).abs() < 1e-12);
        assert!((n.min_eigenvalue() - E.powi(-2)).abs() < 1e-14);
        let scaled = normalize_fixed_point(&t.scale(17.0).unwrap());
        assert!((scaled.entries() - n.entries()).norm() < 1e-12);
    }
}
