//! Fixed points of the congruence action by Følner averaging, finite-index
//! promotion, two-stage extension solves, and the distance-bound
//! certificate.
//!
//! A fixed point `T` of `P ↦ π(γ) P π(γ)*` yields the unitariser `T^{1/2}`.
//! Reports carry the normalized point `T̄`, the measured sizes and the
//! per-index residual history.

use std::collections::HashMap;

use serde::{Serialize, Serializer};

use crate::barycenter::{averaging_mean, BarycenterConfig};
use crate::convex::diam_of;
use crate::error::{Error, Result};
use crate::folner::{Advance, FolnerSchedule};
use crate::group::{
    act_matrix, enumerate_ball, generator_displacement, normalize_fixed_point, size_on_ball,
    verify_on_ball, word_displacement, Dedup, GroupRep, Letter, Word, WordBall, DEDUP_TOL,
};
use crate::io::MatrixJson;
use crate::matrix::{operator_size, InvertibleMatrix, Mat, PosDefMatrix};
use crate::thompson::dist;

/// Certificates hold when the margin is at least `-CERT_TOL`.
pub const CERT_TOL: f64 = 1e-6;
/// Subgroup fixedness threshold for promotion inputs.
pub const SUBGROUP_FIXED_TOL: f64 = 1e-8;

/// Constants of the bound `d(I, T̄) ≤ ln K + (α/2) · diam(π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundSpec {
    #[serde(rename = "K")]
    pub k: f64,
    pub alpha: f64,
}

impl BoundSpec {
    pub fn new(k: f64, alpha: f64) -> Result<Self> {
        if !(k >= 1.0) || !(alpha > 0.0) {
            return Err(Error::Invalid(format!(
                "bound constants need K ≥ 1 and α > 0, got K = {k}, α = {alpha}"
            )));
        }
        Ok(BoundSpec { k, alpha })
    }

    /// `K = 1, α = 2`, i.e. `s(S) ≤ |π|²`.
    pub fn amenable() -> Self {
        BoundSpec { k: 1.0, alpha: 2.0 }
    }

    /// Constants of an extension of an amenable-bound group by an amenable
    /// group: `K' = 1, α' + 2 = 4`.
    pub fn extension() -> Self {
        BoundSpec { k: 1.0, alpha: 4.0 }
    }

    pub fn c(&self) -> f64 {
        self.k.ln()
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Word-ball radius for sizes, diameters and unitariser checks.
    pub radius: usize,
    /// Stop once the generator displacement is at most this.
    pub target: f64,
    /// Largest `|F_n|` the schedule may reach.
    pub cap: usize,
    pub advance: Advance,
    pub barycenter: BarycenterConfig,
    /// Ball radius of the normal subgroup used by the normality check.
    pub normal_radius: usize,
    pub bound: BoundSpec,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            radius: 8,
            target: 1e-6,
            cap: 4096,
            advance: Advance::Linear,
            barycenter: BarycenterConfig::default(),
            normal_radius: 4,
            bound: BoundSpec::amenable(),
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.radius < 2 {
            return Err(Error::Invalid("solver radius must be at least 2".into()));
        }
        if !(self.target > 0.0) {
            return Err(Error::Invalid(format!(
                "target residual must be positive, got {}",
                self.target
            )));
        }
        self.barycenter.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistoryRow {
    pub n: usize,
    /// Number of distinct orbit points averaged.
    pub points: usize,
    pub residual: f64,
    /// `s(x_n^{1/2})`.
    pub size: f64,
    /// `d(I, x̄_n)` for the normalized iterate.
    pub distance: f64,
}

fn ser_pd<S: Serializer>(p: &PosDefMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from(p).serialize(s)
}

fn ser_inv<S: Serializer>(p: &InvertibleMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from(p).serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPointReport {
    pub method: String,
    pub group: String,
    #[serde(serialize_with = "ser_pd")]
    pub fixed_point: PosDefMatrix,
    #[serde(serialize_with = "ser_pd")]
    pub normalized: PosDefMatrix,
    /// `T̄^{1/2}`.
    #[serde(serialize_with = "ser_inv")]
    pub unitariser: InvertibleMatrix,
    /// Max displacement `d(T, g·T)` over generators and inverses.
    pub residual: f64,
    /// `max ‖CC* − I‖` for `C = S⁻¹π(w)S` over the radius ball.
    pub unitariser_defect: f64,
    /// `s(S)`.
    pub size_measured: f64,
    /// `|π|` measured on the radius ball.
    pub rep_size: f64,
    /// `K · |π|^α`.
    pub size_bound: f64,
    /// `d(I, T̄)`.
    pub distance_to_identity: f64,
    /// Diameter of the sampled orbit of the start point.
    pub orbit_diam: f64,
    /// `max d(T, orbit) − orbit_diam`.
    pub xpi_margin: f64,
    pub schedule_index_reached: usize,
    pub radius: usize,
    pub bound: BoundSpec,
    pub history: Vec<HistoryRow>,
    pub size_history: Vec<f64>,
    /// Residual of the stage-1 point (extension solves).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage1_residual: Option<f64>,
    /// Largest displacement under the normal subgroup seen in stage 2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_displacement: Option<f64>,
}

impl FixedPointReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Memoized `π(w)` over word prefixes.
struct WordCache<'a> {
    rep: &'a GroupRep,
    map: HashMap<Vec<Letter>, Mat>,
}

impl<'a> WordCache<'a> {
    fn new(rep: &'a GroupRep) -> Self {
        WordCache {
            rep,
            map: HashMap::new(),
        }
    }

    fn eval(&mut self, w: &Word) -> Result<Mat> {
        let letters = &w.0;
        if let Some(m) = self.map.get(letters.as_slice()) {
            return Ok(m.clone());
        }
        let mut k = letters.len();
        while k > 0 && !self.map.contains_key(&letters[..k]) {
            k -= 1;
        }
        let n = self.rep.dim();
        let mut m = if k == 0 {
            Mat::identity(n, n)
        } else {
            self.map[&letters[..k]].clone()
        };
        for j in k..letters.len() {
            m *= self.rep.letter_matrix(letters[j])?;
            self.map.insert(letters[..=j].to_vec(), m.clone());
        }
        Ok(m)
    }
}

/// Distinct points `π(w) p π(w)*` for `w` in `words`.
fn orbit_set(cache: &mut WordCache, words: &[Word], p: &PosDefMatrix) -> Result<Vec<PosDefMatrix>> {
    let mut dedup = Dedup::new(DEDUP_TOL);
    let mut out = Vec::new();
    for w in words {
        let q = act_matrix(&cache.eval(w)?, p);
        if dedup.insert(q.entries().clone()).1 {
            out.push(q);
        }
    }
    Ok(out)
}

fn history_row(n: usize, points: usize, residual: f64, x: &PosDefMatrix) -> HistoryRow {
    let size = x.condition().sqrt();
    HistoryRow {
        n,
        points,
        residual,
        size,
        distance: dist(&PosDefMatrix::identity(x.dim()), &normalize_fixed_point(x)),
    }
}

struct Assembly<'a> {
    method: &'static str,
    rep: &'a GroupRep,
    ball: &'a WordBall,
    start: &'a PosDefMatrix,
    point: PosDefMatrix,
    residual: f64,
    n: usize,
    history: Vec<HistoryRow>,
    bound: BoundSpec,
}

fn assemble(a: Assembly) -> FixedPointReport {
    let size = size_on_ball(a.ball);
    let normalized = normalize_fixed_point(&a.point);
    let unitariser = normalized.sqrt().to_invertible();
    let check = verify_on_ball(a.ball, &unitariser);
    let orbit = a.ball.orbit(a.start);
    let orbit_diam = diam_of(&orbit);
    let far = orbit.iter().map(|q| dist(&a.point, q)).fold(0.0, f64::max);
    FixedPointReport {
        method: a.method.to_string(),
        group: a.rep.name.clone(),
        distance_to_identity: dist(&PosDefMatrix::identity(a.point.dim()), &normalized),
        size_measured: operator_size(&unitariser),
        fixed_point: a.point,
        normalized,
        unitariser,
        residual: a.residual,
        unitariser_defect: check.max_defect,
        rep_size: size.value,
        size_bound: a.bound.k * size.value.powf(a.bound.alpha),
        orbit_diam,
        xpi_margin: far - orbit_diam,
        schedule_index_reached: a.n,
        radius: a.ball.radius,
        bound: a.bound,
        history: a.history,
        size_history: size.monotone_history,
        stage1_residual: None,
        normal_displacement: None,
    }
}

fn check_start(rep: &GroupRep, start: &PosDefMatrix) -> Result<()> {
    if start.dim() != rep.dim() {
        return Err(Error::DimMismatch {
            expected: rep.dim(),
            found: start.dim(),
        });
    }
    Ok(())
}

/// Iterates `x_n = b(F_n · start)` along the schedule until the generator
/// displacement is at most `cfg.target`.
pub fn solve_amenable(
    rep: &GroupRep,
    schedule: &FolnerSchedule,
    start: &PosDefMatrix,
    cfg: &SolverConfig,
) -> Result<FixedPointReport> {
    cfg.validate()?;
    check_start(rep, start)?;
    let ball = enumerate_ball(rep, cfg.radius)?;
    let size = size_on_ball(&ball);
    if !size.uniformly_bounded() {
        return Err(Error::NotUniformlyBounded {
            radius: cfg.radius,
            history: size.monotone_history,
        });
    }

    let mut cache = WordCache::new(rep);
    let mut history = Vec::new();
    let mut warm: Option<PosDefMatrix> = None;
    for n in schedule.indices(cfg.advance, cfg.cap) {
        let points = orbit_set(&mut cache, &schedule.set(n), start)?;
        let x = averaging_mean(&points, &cfg.barycenter, warm.as_ref())?;
        let residual = generator_displacement(rep, &x)?;
        log::debug!("n = {n}: {} points, residual {residual:e}", points.len());
        history.push(history_row(n, points.len(), residual, &x));
        if residual <= cfg.target {
            return Ok(assemble(Assembly {
                method: "amenable",
                rep,
                ball: &ball,
                start,
                point: x,
                residual,
                n,
                history,
                bound: cfg.bound,
            }));
        }
        warm = Some(x);
    }
    Err(Error::NoConvergence {
        iterations: history.len(),
        residual: history.last().map_or(f64::NAN, |r| r.residual),
        history: history.iter().map(|r| r.residual).collect(),
    })
}

fn check_identity_among(rep: &GroupRep, words: &[Word]) -> Result<()> {
    let id = Mat::identity(rep.dim(), rep.dim());
    for w in words {
        if (rep.eval(w)? - &id).norm() <= DEDUP_TOL {
            return Ok(());
        }
    }
    Err(Error::Invalid(
        "coset representatives must include the identity".into(),
    ))
}

/// `y = b({γ_i · x})` over coset representatives `γ_i` of a finite-index
/// subgroup generated by `subgroup` that fixes `x`.
pub fn promote_finite_index(
    rep: &GroupRep,
    subgroup: &[Word],
    subgroup_fixed: &PosDefMatrix,
    coset_reps: &[Word],
    cfg: &SolverConfig,
) -> Result<FixedPointReport> {
    cfg.validate()?;
    check_start(rep, subgroup_fixed)?;
    let displacement = word_displacement(rep, subgroup, subgroup_fixed)?;
    if displacement > SUBGROUP_FIXED_TOL {
        return Err(Error::NotSubgroupFixed { displacement });
    }
    check_identity_among(rep, coset_reps)?;
    let ball = enumerate_ball(rep, cfg.radius)?;
    let mut cache = WordCache::new(rep);
    let points = orbit_set(&mut cache, coset_reps, subgroup_fixed)?;
    let y = averaging_mean(&points, &cfg.barycenter, None)?;
    let residual = generator_displacement(rep, &y)?;
    let row = history_row(1, points.len(), residual, &y);
    Ok(assemble(Assembly {
        method: "finite-index",
        rep,
        ball: &ball,
        start: &PosDefMatrix::identity(rep.dim()),
        point: y,
        residual,
        n: 1,
        history: vec![row],
        bound: cfg.bound,
    }))
}

/// How the fixed point of the normal subgroup is obtained.
#[derive(Clone, Debug)]
pub enum Stage1 {
    /// Følner averaging over a schedule on the normal subgroup, whose
    /// generators are the normal words in order.
    Schedule(FolnerSchedule),
    /// A given point, checked to be fixed by the normal subgroup.
    Point(PosDefMatrix),
}

/// Checks that `g n g⁻¹` lies in the normal subgroup's word ball for every
/// generator `g^{±1}` and normal generator `n`.
pub fn check_normality(rep: &GroupRep, normal: &[Word], radius: usize) -> Result<()> {
    let sub = rep.subgroup(format!("{}'", rep.name), normal)?;
    let ball = enumerate_ball(&sub, radius)?;
    for l in rep.letters() {
        let g = rep.letter_matrix(l)?;
        let g_inv = rep.letter_matrix(l.inverted())?;
        for (k, w) in normal.iter().enumerate() {
            let conj = g * rep.eval(w)? * g_inv;
            let tol = DEDUP_TOL * conj.norm().max(1.0);
            if !ball.contains_matrix(&conj, tol) {
                return Err(Error::NormalityViolated(format!(
                    "{l} · n{k} · {} is not in the radius-{radius} ball of the normal subgroup",
                    l.inverted()
                )));
            }
        }
    }
    Ok(())
}

/// Two-stage solve for `Γ` with normal subgroup `Γ'` (generated by
/// `normal`) and amenable quotient. Stage 1 finds a `Γ'`-fixed point; stage
/// 2 averages its translates by the quotient schedule, whose words are
/// lifts to `Γ` of the quotient elements.
pub fn solve_extension(
    rep: &GroupRep,
    normal: &[Word],
    stage1: &Stage1,
    quotient: &FolnerSchedule,
    cfg: &SolverConfig,
) -> Result<FixedPointReport> {
    cfg.validate()?;
    if normal.is_empty() {
        return Err(Error::Invalid(
            "the normal subgroup needs at least one generator".into(),
        ));
    }
    check_normality(rep, normal, cfg.normal_radius)?;

    let sub = rep.subgroup(format!("{}'", rep.name), normal)?;
    let (x1, stage1_residual) = match stage1 {
        Stage1::Point(p) => {
            check_start(rep, p).map_err(|e| Error::Stage1Failed(Box::new(e)))?;
            let d = generator_displacement(&sub, p)?;
            if d > SUBGROUP_FIXED_TOL {
                return Err(Error::Stage1Failed(Box::new(Error::NotSubgroupFixed {
                    displacement: d,
                })));
            }
            (p.clone(), d)
        }
        Stage1::Schedule(s) => {
            let r = solve_amenable(&sub, s, &PosDefMatrix::identity(rep.dim()), cfg)
                .map_err(|e| Error::Stage1Failed(Box::new(e)))?;
            (r.fixed_point, r.residual)
        }
    };
    let drift_tol = 10.0 * stage1_residual.max(cfg.barycenter.collapse_tol);

    let ball = enumerate_ball(rep, cfg.radius)?;
    let mut cache = WordCache::new(rep);
    let mut history = Vec::new();
    let mut warm: Option<PosDefMatrix> = None;
    let mut worst_drift = 0.0f64;
    for n in quotient.indices(cfg.advance, cfg.cap) {
        let points = orbit_set(&mut cache, &quotient.set(n), &x1)?;
        let x = averaging_mean(&points, &cfg.barycenter, warm.as_ref())?;
        let drift = generator_displacement(&sub, &x)?;
        worst_drift = worst_drift.max(drift);
        if drift > drift_tol {
            return Err(Error::NormalityViolated(format!(
                "stage-2 iterate at n = {n} moved by {drift:e} under the normal subgroup (allowed {drift_tol:e})"
            )));
        }
        let residual = generator_displacement(rep, &x)?;
        history.push(history_row(n, points.len(), residual, &x));
        if residual <= cfg.target {
            let mut report = assemble(Assembly {
                method: "extension",
                rep,
                ball: &ball,
                start: &PosDefMatrix::identity(rep.dim()),
                point: x,
                residual,
                n,
                history,
                bound: cfg.bound,
            });
            report.stage1_residual = Some(stage1_residual);
            report.normal_displacement = Some(worst_drift);
            return Ok(report);
        }
        warm = Some(x);
    }
    Err(Error::NoConvergence {
        iterations: history.len(),
        residual: history.last().map_or(f64::NAN, |r| r.residual),
        history: history.iter().map(|r| r.residual).collect(),
    })
}

/// `(holds, margin)` with `margin = ln K + (α/2)·orbit_diam − d(I, T̄)`.
pub fn bound_certificate(report: &FixedPointReport, spec: &BoundSpec) -> (bool, f64) {
    let margin = spec.c() + spec.alpha / 2.0 * report.orbit_diam - report.distance_to_identity;
    (margin >= -CERT_TOL, margin)
}
