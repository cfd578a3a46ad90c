//! Phase-insensitive distances to CNOT and CZ, and the scalar reward.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use nalgebra::SMatrix;

use crate::hilbert::{
    pulse_coefficient, LogicalColumns, LogicalEmbedding, Matrix4c, Matrix5c, Matrix9c, SpinPair,
    SubspaceUnitaries, C64,
};
use crate::powell::Objective;
use crate::sequence::{canonical_alpha, Layout, Structure};

/// Distance below which a sequence counts as an exact gate.
pub const EXACT_EPS: f64 = 1e-8;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Target {
    Cnot,
    Cz,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Cnot => "CNOT",
            Target::Cz => "CZ",
        })
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CNOT" => Ok(Target::Cnot),
            "CZ" => Ok(Target::Cz),
            _ => Err(Error::Parse(format!("unknown target {s:?}"))),
        }
    }
}

impl Target {
    /// Distance of the logical columns from this gate.
    pub fn distance(self, cols: &LogicalColumns) -> f64 {
        distance(cols, &self.matrix())
    }

    /// The 4x4 logical gate.
    pub fn matrix(self) -> Matrix4c {
        let one = C64::new(1.0, 0.0);
        let mut m = Matrix4c::zeros();
        match self {
            Target::Cnot => {
                m[(0, 0)] = one;
                m[(1, 1)] = one;
                m[(2, 3)] = one;
                m[(3, 2)] = one;
            }
            Target::Cz => {
                m[(0, 0)] = one;
                m[(1, 1)] = one;
                m[(2, 2)] = one;
                m[(3, 3)] = -one;
            }
        }
        m
    }
}

/// One sector's share of the radicand, `(4 - |tr(T^dagger B)|) / 4`.
///
/// For unitary input `4 - |tr(T^dagger B)|` equals half of
/// `||B - e^{i phi} T||^2 + leakage` with `phi` the trace phase; both terms are
/// sums of squares of small numbers, so an exact gate evaluates to ~1e-30
/// rather than to the ~1e-16 rounding floor of the direct difference.
fn sector_radicand<const R: usize>(cols: &nalgebra::SMatrix<C64, R, 4>, target: &Matrix4c) -> f64 {
    let mut overlap = C64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            overlap += target[(i, j)].conj() * cols[(i, j)];
        }
    }
    let norm = overlap.norm();
    let phase = if norm > 0.0 {
        overlap / norm
    } else {
        C64::new(1.0, 0.0)
    };
    let mut s = 0.0;
    for j in 0..4 {
        for i in 0..R {
            let t = if i < 4 {
                target[(i, j)] * phase
            } else {
                C64::new(0.0, 0.0)
            };
            s += (cols[(i, j)] - t).norm_sqr();
        }
    }
    s / 8.0
}

/// Phase-insensitive distance of logical columns from a 4x4 target, in
/// `[0, sqrt 2]` for unitary input.
pub fn distance(cols: &LogicalColumns, target: &Matrix4c) -> f64 {
    (sector_radicand(&cols.spin0, target) + sector_radicand(&cols.spin1, target))
        .max(0.0)
        .sqrt()
}

/// The defining expression `sqrt(2 - |tr0|/4 - |tr1|/4)` evaluated directly.
/// Agrees with [`distance`] on unitary input, but bottoms out near 1e-8 for
/// exact gates because of cancellation.
pub fn distance_direct(cols: &LogicalColumns, target: &Matrix4c) -> f64 {
    let tr = |b: Matrix4c| (target.adjoint() * b).trace();
    (2.0 - 0.25 * tr(cols.block0()).norm() - 0.25 * tr(cols.block1()).norm())
        .max(0.0)
        .sqrt()
}

/// Distance from CNOT, in `[0, sqrt 2]`.
pub fn d_fw(us: &SubspaceUnitaries) -> f64 {
    Target::Cnot.distance(&us.logical_columns())
}

/// Distance from CZ, in `[0, sqrt 2]`.
pub fn d_cz(us: &SubspaceUnitaries) -> f64 {
    Target::Cz.distance(&us.logical_columns())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TimeMode {
    Sequential,
    Parallel,
}

impl fmt::Display for TimeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeMode::Sequential => "SEQUENTIAL",
            TimeMode::Parallel => "PARALLEL",
        })
    }
}

impl FromStr for TimeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SEQUENTIAL" => Ok(TimeMode::Sequential),
            "PARALLEL" => Ok(TimeMode::Parallel),
            _ => Err(Error::Parse(format!("unknown time mode {s:?}"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub target: Target,
    pub big_n: f64,
    pub gamma: f64,
    pub time_mode: TimeMode,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            target: Target::Cnot,
            big_n: 10.0,
            gamma: 0.01,
            time_mode: TimeMode::Parallel,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.big_n > 0.0 && self.big_n.is_finite()) {
            return Err(Error::Config(format!(
                "big N must be positive, got {}",
                self.big_n
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Distance and time of one alpha vector.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub d: f64,
    pub t_sequential: f64,
    pub t_parallel: f64,
}

impl Evaluation {
    pub fn time(&self, mode: TimeMode) -> f64 {
        match mode {
            TimeMode::Sequential => self.t_sequential,
            TimeMode::Parallel => self.t_parallel,
        }
    }

    pub fn reward(&self, cfg: &RewardConfig) -> f64 {
        cfg.big_n - self.d - cfg.gamma * self.time(cfg.time_mode)
    }

    pub fn is_exact(&self) -> bool {
        self.d < EXACT_EPS
    }
}

/// Evaluates alpha vectors of a fixed layout and structure.
#[derive(Clone, Debug)]
pub struct Problem {
    pub layout: Layout,
    pub structure: Structure,
    pub target: Target,
    pairs: Vec<SpinPair>,
    /// Parallel-step groups of the brick layout, as alpha indices.
    groups: Vec<std::ops::Range<usize>>,
}

impl Problem {
    pub fn new(layout: Layout, structure: Structure, target: Target) -> Result<Problem> {
        structure.check_layout(&layout)?;
        let dim = structure
            .dimension(&layout)
            .ok_or_else(|| Error::Config("optimization needs a brick structure".into()))?;
        let pattern = layout.brick_pattern();
        let pairs = (0..dim)
            .map(|i| layout.couplings()[pattern[i % pattern.len()]])
            .collect();
        let mut groups = Vec::new();
        let mut offset = 0;
        while offset < dim {
            for g in layout.bricks() {
                groups.push(offset..offset + g.len());
                offset += g.len();
            }
        }
        Ok(Problem {
            layout,
            structure,
            target,
            pairs,
            groups,
        })
    }

    pub fn dimension(&self) -> usize {
        self.pairs.len()
    }

    fn check(&self, alphas: &[f64]) -> Result<()> {
        if alphas.len() != self.pairs.len() {
            return Err(Error::Dimension {
                expected: self.pairs.len(),
                got: alphas.len(),
            });
        }
        Ok(())
    }

    /// Distance to the target; the hot path.
    pub fn distance(&self, alphas: &[f64]) -> Result<f64> {
        self.check(alphas)?;
        let emb = LogicalEmbedding::standard();
        let cols =
            emb.pulses_logical_columns(self.pairs.iter().copied().zip(alphas.iter().copied()));
        Ok(self.target.distance(&cols))
    }

    /// `(T_s, T_p)` without building a sequence. Panics on a wrong length.
    pub fn times(&self, alphas: &[f64]) -> (f64, f64) {
        assert_eq!(alphas.len(), self.pairs.len());
        let mut ts = 0.0;
        let mut tp = 0.0;
        for g in &self.groups {
            let mut step = 0.0f64;
            for &a in &alphas[g.clone()] {
                let a = canonical_alpha(a);
                ts += a;
                step = step.max(a);
            }
            tp += step;
        }
        (ts, tp)
    }

    /// Powell objective over this problem with a cached fast path for
    /// coordinate lines.
    pub fn objective(&self, kind: SearchObjective, reward: &RewardConfig) -> ProblemObjective<'_> {
        ProblemObjective::new(self, kind, reward)
    }

    pub fn evaluate(&self, alphas: &[f64]) -> Result<Evaluation> {
        let d = self.distance(alphas)?;
        let (t_sequential, t_parallel) = self.times(alphas);
        Ok(Evaluation {
            d,
            t_sequential,
            t_parallel,
        })
    }
}

/// What the local optimizer minimizes.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchObjective {
    /// `d` alone.
    Distance,
    /// `d + gamma * T`, the negated reward up to the constant `big_N`.
    #[default]
    DistancePlusTime,
}

type Cols0 = SMatrix<C64, 5, 4>;
type Cols1 = SMatrix<C64, 9, 4>;

/// [`Objective`] over a [`Problem`].
///
/// Along a coordinate line only one pulse changes, so with `L` the columns
/// after the pulses before it and `S` the product of the pulses after it,
/// `f(t) = dist(S L + c(t) S P L)`: two precomputed column blocks per sector.
/// Prefix columns and suffix products are cached against the alphas they were
/// built from and rebuilt only where those differ.
pub struct ProblemObjective<'a> {
    problem: &'a Problem,
    kind: SearchObjective,
    gamma: f64,
    time_mode: TimeMode,
    target: Matrix4c,
    prefix: Vec<(Cols0, Cols1)>,
    prefix_alphas: Vec<f64>,
    prefix_valid: usize,
    suffix: Vec<(Matrix5c, Matrix9c)>,
    suffix_alphas: Vec<f64>,
    suffix_built: bool,
    line: Option<AxisLine>,
    scratch: Vec<f64>,
}

struct AxisLine {
    k: usize,
    base: f64,
    a: (Cols0, Cols1),
    b: (Cols0, Cols1),
}

impl<'a> ProblemObjective<'a> {
    fn new(problem: &'a Problem, kind: SearchObjective, reward: &RewardConfig) -> Self {
        let n = problem.dimension();
        ProblemObjective {
            problem,
            kind,
            gamma: reward.gamma,
            time_mode: reward.time_mode,
            target: problem.target.matrix(),
            prefix: vec![(Cols0::identity(), Cols1::identity()); n + 1],
            prefix_alphas: vec![0.0; n],
            prefix_valid: 0,
            suffix: vec![(Matrix5c::identity(), Matrix9c::identity()); n],
            suffix_alphas: vec![0.0; n],
            suffix_built: false,
            line: None,
            scratch: vec![0.0; n],
        }
    }

    fn time_term(&self, alphas: &[f64]) -> f64 {
        match self.kind {
            SearchObjective::Distance => 0.0,
            SearchObjective::DistancePlusTime => {
                let (ts, tp) = self.problem.times(alphas);
                self.gamma
                    * match self.time_mode {
                        TimeMode::Sequential => ts,
                        TimeMode::Parallel => tp,
                    }
            }
        }
    }

    fn ensure_prefix(&mut self, x: &[f64], k: usize) {
        let emb = LogicalEmbedding::standard();
        let mut valid = self.prefix_valid.min(k);
        if let Some(m) = (0..valid).find(|&j| self.prefix_alphas[j].to_bits() != x[j].to_bits()) {
            valid = m;
        }
        for j in valid..k {
            let (p0, p1) = emb.sector_projectors(self.problem.pairs[j]);
            let c = pulse_coefficient(x[j]);
            let (c0, c1) = self.prefix[j];
            self.prefix[j + 1] = (c0 + (p0 * c0) * c, c1 + (p1 * c1) * c);
            self.prefix_alphas[j] = x[j];
        }
        self.prefix_valid = k;
    }

    fn ensure_suffix(&mut self, x: &[f64], k: usize) {
        let n = x.len();
        let fresh = self.suffix_built
            && self.suffix_alphas[k + 1..]
                .iter()
                .zip(&x[k + 1..])
                .all(|(a, b)| a.to_bits() == b.to_bits());
        if fresh {
            return;
        }
        let emb = LogicalEmbedding::standard();
        self.suffix[n - 1] = (Matrix5c::identity(), Matrix9c::identity());
        for j in (1..n).rev() {
            let (p0, p1) = emb.sector_projectors(self.problem.pairs[j]);
            let c = pulse_coefficient(x[j]);
            let (s0, s1) = self.suffix[j];
            self.suffix[j - 1] = (s0 + (s0 * p0) * c, s1 + (s1 * p1) * c);
        }
        self.suffix_alphas.copy_from_slice(x);
        self.suffix_built = true;
    }
}

impl Objective for ProblemObjective<'_> {
    fn value(&mut self, x: &[f64]) -> f64 {
        let cols = LogicalEmbedding::standard()
            .pulses_logical_columns(self.problem.pairs.iter().copied().zip(x.iter().copied()));
        distance(&cols, &self.target) + self.time_term(x)
    }

    fn begin_axis_line(&mut self, x: &[f64], k: usize) -> bool {
        self.ensure_prefix(x, k);
        self.ensure_suffix(x, k);
        let (p0, p1) = LogicalEmbedding::standard().sector_projectors(self.problem.pairs[k]);
        let (l0, l1) = self.prefix[k];
        let (s0, s1) = self.suffix[k];
        self.line = Some(AxisLine {
            k,
            base: x[k],
            a: (s0 * l0, s1 * l1),
            b: (s0 * (p0 * l0), s1 * (p1 * l1)),
        });
        if self.kind == SearchObjective::DistancePlusTime {
            self.scratch.copy_from_slice(x);
        }
        true
    }

    fn axis_value(&mut self, t: f64) -> f64 {
        let line = self.line.as_ref().expect("axis line prepared");
        let alpha = line.base + t;
        let c = pulse_coefficient(alpha);
        let cols = LogicalColumns {
            spin0: line.a.0 + line.b.0 * c,
            spin1: line.a.1 + line.b.1 * c,
        };
        let d = distance(&cols, &self.target);
        if self.kind == SearchObjective::Distance {
            return d;
        }
        let k = line.k;
        self.scratch[k] = alpha;
        let v = d + self.time_term(&self.scratch);
        self.scratch[k] = line.base;
        v
    }
}

/// `big_N - d - gamma * T`.
pub fn reward(
    alphas: &[f64],
    cfg: &RewardConfig,
    layout: &Layout,
    structure: Structure,
) -> Result<f64> {
    let problem = Problem::new(layout.clone(), structure, cfg.target)?;
    Ok(problem.evaluate(alphas)?.reward(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{alphas_to_sequence, timing};

    fn embed(gate: Matrix4c, phase0: C64, phase1: C64) -> SubspaceUnitaries {
        let mut u = SubspaceUnitaries::identity();
        u.spin0
            .fixed_view_mut::<4, 4>(0, 0)
            .copy_from(&(gate * phase0));
        u.spin1
            .fixed_view_mut::<4, 4>(0, 0)
            .copy_from(&(gate * phase1));
        u
    }

    #[test]
    fn exact_gates_have_zero_distance() {
        let p0 = C64::from_polar(1.0, 0.7);
        let p1 = C64::from_polar(1.0, -2.1);
        assert!(d_fw(&embed(Target::Cnot.matrix(), p0, p1)) < 1e-15);
        assert!(d_cz(&embed(Target::Cz.matrix(), p0, p1)) < 1e-15);
    }

    #[test]
    fn identity_is_at_distance_one() {
        let id = SubspaceUnitaries::identity();
        assert!((d_fw(&id) - 1.0).abs() < 1e-15);
        assert!((d_cz(&id) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_alphas_reward() {
        let cfg = RewardConfig::default();
        let r = reward(
            &[0.0; 35],
            &cfg,
            &Layout::linear11(),
            Structure::five_brick(),
        )
        .unwrap();
        assert!((r - 9.0).abs() < 1e-12);
    }

    #[test]
    fn reward_rejects_bad_dimension() {
        let cfg = RewardConfig::default();
        let e = reward(
            &[0.0; 34],
            &cfg,
            &Layout::linear11(),
            Structure::five_brick(),
        )
        .unwrap_err();
        assert_eq!(
            e,
            Error::Dimension {
                expected: 35,
                got: 34
            }
        );
    }

    #[test]
    fn fast_times_match_timing() {
        let p = Problem::new(Layout::linear11(), Structure::five_brick(), Target::Cnot).unwrap();
        let alphas: Vec<f64> = (0..35)
            .map(|i| {
                if i % 4 == 0 {
                    0.0
                } else {
                    (i as f64 * 0.377) % 2.0
                }
            })
            .collect();
        let e = timing(&alphas_to_sequence(&p.layout, p.structure, &alphas).unwrap());
        let (ts, tp) = p.times(&alphas);
        assert!((ts - e.t_sequential).abs() < 1e-12);
        assert!((tp - e.t_parallel).abs() < 1e-12);
    }

    #[test]
    fn axis_lines_match_full_evaluation() {
        let cfg = RewardConfig::default();
        for layout in [Layout::linear11(), Layout::grid2d()] {
            let structure = if layout.couplings().len() == 5 {
                Structure::five_brick()
            } else {
                Structure::seven_block()
            };
            let p = Problem::new(layout, structure, Target::Cnot).unwrap();
            let mut x: Vec<f64> = (0..p.dimension())
                .map(|i| (i as f64 * 0.731).sin() + 1.0)
                .collect();
            for kind in [SearchObjective::Distance, SearchObjective::DistancePlusTime] {
                let mut obj = p.objective(kind, &cfg);
                for k in [0, 3, 4, 17, p.dimension() - 1, 2] {
                    assert!(obj.begin_axis_line(&x, k));
                    for t in [-0.3, 0.0, 0.05, 0.9] {
                        let fast = obj.axis_value(t);
                        let mut y = x.clone();
                        y[k] += t;
                        let slow = obj.value(&y);
                        assert!((fast - slow).abs() < 1e-12, "{k} {t}: {fast} vs {slow}");
                    }
                    x[k] += 0.25;
                }
            }
        }
    }

    #[test]
    fn stable_and_direct_forms_agree() {
        use crate::hilbert::{Spin, SpinPair};
        let emb = LogicalEmbedding::standard();
        let p = |a, b| SpinPair::new(a, b).unwrap();
        let us = emb.pulses_unitary([
            (p(Spin::A1, Spin::B1), 0.61),
            (p(Spin::A2, Spin::B2), 1.37),
            (p(Spin::B1, Spin::B2), 0.2),
        ]);
        for t in [Target::Cnot, Target::Cz] {
            let cols = us.logical_columns();
            let a = distance(&cols, &t.matrix());
            let b = distance_direct(&cols, &t.matrix());
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }
}
