//! Layouts, brick structures, pulse sequences and their timing.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{LogicalEmbedding, Spin, SpinPair, SubspaceUnitaries};

/// Pulses with `|canonical(alpha)|` below this are treated as absent.
pub const ZERO_ALPHA_EPS: f64 = 1e-12;

/// Reduces `alpha` into `[0, 2)`.
pub fn canonical_alpha(alpha: f64) -> f64 {
    let a = alpha.rem_euclid(2.0);
    // rem_euclid can round up to exactly 2 for tiny negative inputs
    if a >= 2.0 || 2.0 - a < ZERO_ALPHA_EPS || a < ZERO_ALPHA_EPS {
        0.0
    } else {
        a
    }
}

/// Rounds `alpha` to a multiple of 2^-52, the spacing of doubles in `[1, 2)`.
/// On this grid `2 - alpha` is exact, so conjugation is a bitwise involution.
pub fn snap_alpha(alpha: f64) -> f64 {
    const SCALE: f64 = (1u64 << 52) as f64;
    if alpha.abs() >= 2.0 {
        return alpha;
    }
    (alpha * SCALE).round() / SCALE
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayoutKind {
    #[serde(rename = "LINEAR_11")]
    Linear11,
    #[serde(rename = "LINEAR_33")]
    Linear33,
    #[serde(rename = "GRID_2D")]
    Grid2D,
}

impl LayoutKind {
    pub const ALL: [LayoutKind; 3] = [
        LayoutKind::Linear11,
        LayoutKind::Linear33,
        LayoutKind::Grid2D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LayoutKind::Linear11 => "LINEAR_11",
            LayoutKind::Linear33 => "LINEAR_33",
            LayoutKind::Grid2D => "GRID_2D",
        }
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayoutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        match t.as_str() {
            "LINEAR_11" | "11" => Ok(LayoutKind::Linear11),
            "LINEAR_33" | "33" => Ok(LayoutKind::Linear33),
            "GRID_2D" | "2D" => Ok(LayoutKind::Grid2D),
            _ => Err(Error::Parse(format!("unknown layout {s:?}"))),
        }
    }
}

/// Connectivity of the six spins plus the parallel-step groups of one brick.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    kind: LayoutKind,
    couplings: Vec<SpinPair>,
    /// Parallel-step groups of one brick, as indices into `couplings`.
    bricks: Vec<Vec<usize>>,
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn pairs(list: &[(Spin, Spin)]) -> Vec<SpinPair> {
    list.iter()
        .map(|&(a, b)| SpinPair::new(a, b).expect("layout pairs are distinct"))
        .collect()
}

impl Layout {
    pub fn new(kind: LayoutKind) -> Layout {
        use Spin::*;
        match kind {
            // chain A3-A2-A1-B1-B2-B3
            LayoutKind::Linear11 => Layout {
                kind,
                couplings: pairs(&[(A2, A3), (A1, A2), (A1, B1), (B1, B2), (B2, B3)]),
                bricks: vec![vec![1, 3], vec![0, 2, 4]],
            },
            // chain A1-A2-A3-B3-B2-B1
            LayoutKind::Linear33 => Layout {
                kind,
                couplings: pairs(&[(A1, A2), (A2, A3), (A3, B3), (B3, B2), (B2, B1)]),
                bricks: vec![vec![1, 3], vec![0, 2, 4]],
            },
            LayoutKind::Grid2D => Layout {
                kind,
                couplings: pairs(&[
                    (A1, A2),
                    (A2, A3),
                    (B1, B2),
                    (B2, B3),
                    (A1, B1),
                    (A2, B2),
                    (A3, B3),
                ]),
                bricks: vec![vec![0, 2], vec![1, 3], vec![4, 5, 6]],
            },
        }
    }

    pub fn linear11() -> Layout {
        Layout::new(LayoutKind::Linear11)
    }

    pub fn linear33() -> Layout {
        Layout::new(LayoutKind::Linear33)
    }

    pub fn grid2d() -> Layout {
        Layout::new(LayoutKind::Grid2D)
    }

    pub fn kind(&self) -> LayoutKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn couplings(&self) -> &[SpinPair] {
        &self.couplings
    }

    pub fn bricks(&self) -> &[Vec<usize>] {
        &self.bricks
    }

    /// Coupling indices of one brick in canonical pulse order.
    pub fn brick_pattern(&self) -> Vec<usize> {
        self.bricks.iter().flatten().copied().collect()
    }

    pub fn coupling_index(&self, pair: SpinPair) -> Result<usize> {
        self.couplings
            .iter()
            .position(|&c| c == pair)
            .ok_or_else(|| Error::LayoutViolation {
                pair: pair.to_string(),
                layout: self.name().to_string(),
            })
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(Layout::new(s.parse()?))
    }
}

/// How a flat alpha vector maps onto pulses.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Structure {
    /// `n` five-pulse bricks on a linear layout.
    FiveBrick(usize),
    /// `n` seven-pulse blocks on the 2D layout.
    SevenBlock(usize),
    /// Arbitrary pulse list, timed by greedy packing.
    Free,
}

impl Structure {
    pub const DEFAULT_BRICKS: usize = 7;

    pub fn five_brick() -> Structure {
        Structure::FiveBrick(Self::DEFAULT_BRICKS)
    }

    pub fn seven_block() -> Structure {
        Structure::SevenBlock(Self::DEFAULT_BRICKS)
    }

    pub fn n_bricks(self) -> Option<usize> {
        match self {
            Structure::FiveBrick(n) | Structure::SevenBlock(n) => Some(n),
            Structure::Free => None,
        }
    }

    /// Same kind with a different brick count.
    pub fn with_bricks(self, n: usize) -> Structure {
        match self {
            Structure::FiveBrick(_) => Structure::FiveBrick(n),
            Structure::SevenBlock(_) => Structure::SevenBlock(n),
            Structure::Free => Structure::Free,
        }
    }

    /// Checks that the structure can be laid out on `layout`.
    pub fn check_layout(self, layout: &Layout) -> Result<()> {
        let ok = match self {
            Structure::FiveBrick(_) => layout.couplings.len() == 5,
            Structure::SevenBlock(_) => layout.couplings.len() == 7,
            Structure::Free => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleStructure {
                structure: self.to_string(),
                layout: layout.name().to_string(),
            })
        }
    }

    /// Length of the alpha vector, if fixed.
    pub fn dimension(self, layout: &Layout) -> Option<usize> {
        self.n_bricks().map(|n| n * layout.couplings.len())
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::FiveBrick(n) => write!(f, "FIVE_BRICK_{n}"),
            Structure::SevenBlock(n) => write!(f, "SEVEN_BLOCK_{n}"),
            Structure::Free => f.write_str("FREE"),
        }
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        if t == "FREE" {
            return Ok(Structure::Free);
        }
        let parse_n = |rest: &str| -> Result<usize> {
            if rest.is_empty() {
                return Ok(Structure::DEFAULT_BRICKS);
            }
            let n = rest
                .strip_prefix('_')
                .and_then(|r| r.parse::<usize>().ok())
                .ok_or_else(|| Error::Parse(format!("bad brick count in structure {s:?}")))?;
            if n == 0 {
                return Err(Error::Parse(format!("structure {s:?} has no bricks")));
            }
            Ok(n)
        };
        if let Some(rest) = t.strip_prefix("FIVE_BRICK") {
            Ok(Structure::FiveBrick(parse_n(rest)?))
        } else if let Some(rest) = t.strip_prefix("SEVEN_BLOCK") {
            Ok(Structure::SevenBlock(parse_n(rest)?))
        } else {
            Err(Error::Parse(format!("unknown structure {s:?}")))
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Pulse {
    pub coupling: usize,
    pub alpha: f64,
}

/// Ordered exchange pulses on a layout; the first pulse acts first.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSequence {
    layout: Layout,
    structure: Structure,
    pulses: Vec<Pulse>,
}

impl GateSequence {
    pub fn new(layout: Layout, structure: Structure, pulses: Vec<Pulse>) -> Result<GateSequence> {
        structure.check_layout(&layout)?;
        for p in &pulses {
            if p.coupling >= layout.couplings.len() {
                return Err(Error::Parse(format!(
                    "coupling index {} out of range for {}",
                    p.coupling,
                    layout.name()
                )));
            }
            if !p.alpha.is_finite() {
                return Err(Error::Parse(format!("non-finite alpha {}", p.alpha)));
            }
        }
        if let Some(dim) = structure.dimension(&layout) {
            if pulses.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: pulses.len(),
                });
            }
            let pattern = layout.brick_pattern();
            for (i, p) in pulses.iter().enumerate() {
                if p.coupling != pattern[i % pattern.len()] {
                    return Err(Error::Parse(format!(
                        "pulse {i} on {} breaks the {structure} pattern",
                        layout.couplings[p.coupling]
                    )));
                }
            }
        }
        Ok(GateSequence {
            layout,
            structure,
            pulses,
        })
    }

    /// Free-structure sequence from explicit spin pairs.
    pub fn from_pairs<I>(layout: Layout, pulses: I) -> Result<GateSequence>
    where
        I: IntoIterator<Item = (SpinPair, f64)>,
    {
        let pulses = pulses
            .into_iter()
            .map(|(pair, alpha)| {
                Ok(Pulse {
                    coupling: layout.coupling_index(pair)?,
                    alpha,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        GateSequence::new(layout, Structure::Free, pulses)
    }

    pub fn empty(layout: Layout) -> GateSequence {
        GateSequence {
            layout,
            structure: Structure::Free,
            pulses: Vec::new(),
        }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.alpha).collect()
    }

    pub fn pair(&self, i: usize) -> SpinPair {
        self.layout.couplings[self.pulses[i].coupling]
    }

    /// `(pair, alpha)` in application order.
    pub fn pair_alphas(&self) -> impl Iterator<Item = (SpinPair, f64)> + '_ {
        self.pulses
            .iter()
            .map(|p| (self.layout.couplings[p.coupling], p.alpha))
    }

    /// Same pulses, forgetting the brick structure.
    pub fn into_free(self) -> GateSequence {
        GateSequence {
            structure: Structure::Free,
            ..self
        }
    }

    /// Builds the sequence from a structure's alpha vector.
    pub fn from_alphas(
        layout: &Layout,
        structure: Structure,
        alphas: &[f64],
    ) -> Result<GateSequence> {
        alphas_to_sequence(layout, structure, alphas)
    }

    /// Sector unitaries under the standard embedding.
    pub fn unitary(&self) -> SubspaceUnitaries {
        sequence_unitary(self, LogicalEmbedding::standard())
    }

    pub fn timing(&self) -> TimingReport {
        timing(self)
    }
}

/// Lays out `alphas` brick by brick in the layout's within-brick order.
pub fn alphas_to_sequence(
    layout: &Layout,
    structure: Structure,
    alphas: &[f64],
) -> Result<GateSequence> {
    structure.check_layout(layout)?;
    let dim = match structure.dimension(layout) {
        Some(d) => d,
        None => {
            return Err(Error::Config(
                "a FREE sequence cannot be built from a bare alpha vector".into(),
            ));
        }
    };
    if alphas.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: alphas.len(),
        });
    }
    let pattern = layout.brick_pattern();
    let pulses = alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| Pulse {
            coupling: pattern[i % pattern.len()],
            alpha,
        })
        .collect();
    GateSequence::new(layout.clone(), structure, pulses)
}

/// Ordered product of pulses on both sectors.
pub fn sequence_unitary(seq: &GateSequence, emb: &LogicalEmbedding) -> SubspaceUnitaries {
    emb.pulses_unitary(seq.pair_alphas())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingReport {
    pub t_sequential: f64,
    pub t_parallel: f64,
    /// Pulse indices executed together, nonzero pulses only.
    pub step_groups: Vec<Vec<usize>>,
    pub n_pulses_nonzero: usize,
    pub n_time_steps: usize,
}

fn is_active(alpha: f64) -> bool {
    canonical_alpha(alpha) > 0.0
}

/// Parallel-step groups of a brick-structured sequence, empty groups included.
fn brick_groups(seq: &GateSequence, n: usize) -> Vec<Vec<usize>> {
    let per_brick = seq.layout.couplings.len();
    let mut groups = Vec::with_capacity(n * seq.layout.bricks.len());
    for b in 0..n {
        let mut offset = b * per_brick;
        for g in &seq.layout.bricks {
            groups.push((offset..offset + g.len()).collect());
            offset += g.len();
        }
    }
    groups
}

/// Greedy as-soon-as-possible packing of the nonzero pulses.
pub fn greedy_groups(seq: &GateSequence) -> Vec<Vec<usize>> {
    let mut last_step = [None::<usize>; crate::hilbert::N_SPINS];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, p) in seq.pulses.iter().enumerate() {
        if !is_active(p.alpha) {
            continue;
        }
        let (a, b) = seq.layout.couplings[p.coupling].spins();
        let step = match (last_step[a.index()], last_step[b.index()]) {
            (None, None) => 0,
            (x, y) => x.max(y).map_or(0, |s| s + 1),
        };
        if groups.len() <= step {
            groups.resize_with(step + 1, Vec::new);
        }
        groups[step].push(i);
        last_step[a.index()] = Some(step);
        last_step[b.index()] = Some(step);
    }
    groups
}

/// Sequential and parallel execution time in units of `pi/J`.
pub fn timing(seq: &GateSequence) -> TimingReport {
    let groups = match seq.structure.n_bricks() {
        Some(n) => brick_groups(seq, n),
        None => greedy_groups(seq),
    };
    let step_groups: Vec<Vec<usize>> = groups
        .into_iter()
        .map(|g| {
            g.into_iter()
                .filter(|&i| is_active(seq.pulses[i].alpha))
                .collect::<Vec<_>>()
        })
        .filter(|g| !g.is_empty())
        .collect();
    let t_sequential = seq.pulses.iter().map(|p| canonical_alpha(p.alpha)).sum();
    let t_parallel = step_groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|&i| canonical_alpha(seq.pulses[i].alpha))
                .fold(0.0, f64::max)
        })
        .sum();
    let n_pulses_nonzero = seq.pulses.iter().filter(|p| is_active(p.alpha)).count();
    TimingReport {
        t_sequential,
        t_parallel,
        n_time_steps: step_groups.len(),
        step_groups,
        n_pulses_nonzero,
    }
}

/// Replaces every alpha by `2 - alpha` (mod 2); conjugates both sector unitaries.
pub fn transform_conjugate(seq: &GateSequence) -> GateSequence {
    let pulses = seq
        .pulses
        .iter()
        .map(|p| Pulse {
            coupling: p.coupling,
            alpha: canonical_alpha(2.0 - snap_alpha(p.alpha)),
        })
        .collect();
    GateSequence {
        layout: seq.layout.clone(),
        structure: seq.structure,
        pulses,
    }
}

/// Reverses the pulse order and negates every alpha; realizes the inverse
/// unitary.
///
/// On layouts whose bricks have two step groups the reversed steps keep the
/// same alternation, so the result is re-aligned into bricks: a blank step at
/// either end is absorbed, otherwise one brick is added. Other structures come
/// back as FREE sequences.
pub fn transform_invert(seq: &GateSequence) -> GateSequence {
    let negate = |a: f64| canonical_alpha(-a);
    let layout = &seq.layout;
    let n = match seq.structure.n_bricks() {
        Some(n) if layout.bricks.len() == 2 => n,
        _ => {
            let pulses = seq
                .pulses
                .iter()
                .rev()
                .map(|p| Pulse {
                    coupling: p.coupling,
                    alpha: negate(p.alpha),
                })
                .collect();
            return GateSequence {
                layout: layout.clone(),
                structure: Structure::Free,
                pulses,
            };
        }
    };

    // reversed steps, each as the negated alphas of its pulses
    let mut steps: Vec<Option<Vec<f64>>> = brick_groups(seq, n)
        .iter()
        .rev()
        .map(|g| Some(g.iter().map(|&i| negate(seq.pulses[i].alpha)).collect()))
        .collect();
    let blank = |s: &Option<Vec<f64>>| s.as_ref().is_none_or(|v| v.iter().all(|&a| a == 0.0));
    // the reversed list starts with a second-kind step
    if blank(&steps[0]) {
        steps.remove(0);
        steps.push(None);
    } else if blank(&steps[steps.len() - 1]) {
        steps.pop();
        steps.insert(0, None);
    } else {
        steps.insert(0, None);
        steps.push(None);
    }

    let mut pulses = Vec::with_capacity(steps.len() / 2 * layout.couplings.len());
    for (k, step) in steps.iter().enumerate() {
        for (slot, &c) in layout.bricks[k % 2].iter().enumerate() {
            let alpha = step.as_ref().map_or(0.0, |v| v[slot]);
            pulses.push(Pulse { coupling: c, alpha });
        }
    }
    GateSequence {
        layout: layout.clone(),
        structure: seq.structure.with_bricks(steps.len() / 2),
        pulses,
    }
}

/// Serializes to the JSON sequence format, one pulse per line. Alphas are
/// written in shortest round-trip form, so parsing restores them bit for bit.
pub fn serialize(seq: &GateSequence) -> String {
    let mut out = format!(
        "{{\n  \"layout\": \"{}\",\n  \"structure\": \"{}\",\n  \"pulses\": [",
        seq.layout.name(),
        seq.structure
    );
    for (i, (pair, alpha)) in seq.pair_alphas().enumerate() {
        let (a, b) = pair.spins();
        let sep = if i == 0 { "\n" } else { ",\n" };
        out.push_str(&format!(
            "{sep}    {{\"pair\": [\"{a}\", \"{b}\"], \"alpha\": {alpha:?}}}"
        ));
    }
    if !seq.is_empty() {
        out.push_str("\n  ");
    }
    out.push_str("]\n}\n");
    out
}

/// Parses the JSON sequence format. Alphas are snapped with [`snap_alpha`].
pub fn parse(text: &str) -> Result<GateSequence> {
    // alpha is read as a raw value so that "NaN" strings get a clear message
    #[derive(Deserialize)]
    struct RawPulse {
        pair: [String; 2],
        alpha: serde_json::Value,
    }
    #[derive(Deserialize)]
    struct RawSequence {
        layout: String,
        #[serde(default)]
        structure: Option<String>,
        pulses: Vec<RawPulse>,
    }
    let raw: RawSequence = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let layout: Layout = raw.layout.parse()?;
    let structure = match raw.structure {
        Some(s) => s.parse()?,
        None => Structure::Free,
    };
    let pulses =
        raw.pulses
            .iter()
            .map(|p| {
                let a: Spin = p.pair[0].parse()?;
                let b: Spin = p.pair[1].parse()?;
                let pair = SpinPair::new(a, b)?;
                let alpha = p.alpha.as_f64().filter(|x| x.is_finite()).ok_or_else(|| {
                    Error::Parse(format!("alpha {} is not a finite number", p.alpha))
                })?;
                Ok(Pulse {
                    coupling: layout.coupling_index(pair)?,
                    alpha: snap_alpha(alpha),
                })
            })
            .collect::<Result<Vec<_>>>()?;
    GateSequence::new(layout, structure, pulses)
}

impl fmt::Display for GateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} [", self.layout.name(), self.structure)?;
        for (i, (pair, alpha)) in self.pair_alphas().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{pair}:{alpha}")?;
        }
        f.write_str("]")
    }
}

/// Distinct spins touched by the nonzero pulses of a group.
pub fn group_support(seq: &GateSequence, group: &[usize]) -> BTreeSet<Spin> {
    group
        .iter()
        .flat_map(|&i| {
            let (a, b) = seq.pair(i).spins();
            [a, b]
        })
        .collect()
}

/// Layouts and structures serialize as their names.
macro_rules! serde_by_name {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: serde::Serializer>(
                &self,
                s: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: serde::Deserializer<'de>>(
                d: D,
            ) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_by_name!(Layout);
serde_by_name!(Structure);
