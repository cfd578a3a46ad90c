//! Budgeted Powell direction-set minimization.
//!
//! "Partial" means the number of outer cycles is a hard cap; the optimizer
//! never iterates to convergence.

use serde::{Deserialize, Serialize};

const GOLDEN: f64 = 0.381_966_011_250_105_1; // 2 - phi
const GROW: f64 = 1.618_033_988_749_895;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowellConfig {
    pub max_outer_iterations: usize,
    /// Bracket width, in step-parameter units, at which golden section stops.
    pub line_search_tolerance: f64,
    /// Objective evaluations allowed per line minimization.
    pub line_search_max_evals: usize,
    /// Period that parameters are wrapped into after each line minimization.
    pub wrap_period: Option<f64>,
    /// First trial step of the bracketing phase.
    pub initial_step: f64,
}

impl Default for PowellConfig {
    fn default() -> Self {
        PowellConfig {
            max_outer_iterations: 12,
            line_search_tolerance: 1e-8,
            line_search_max_evals: 60,
            wrap_period: Some(2.0),
            initial_step: 0.1,
        }
    }
}

impl PowellConfig {
    pub fn with_iterations(iters: usize) -> Self {
        PowellConfig {
            max_outer_iterations: iters,
            ..Self::default()
        }
    }

    /// Upper bound on objective evaluations for a problem of dimension `dim`.
    pub fn eval_budget(&self, dim: usize) -> usize {
        self.max_outer_iterations * dim * self.line_search_max_evals + 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowellResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// Set when the objective returned a non-finite value and the run stopped.
    pub aborted: bool,
}

/// Objective with an optional fast path for lines along a coordinate axis.
pub trait Objective {
    fn value(&mut self, x: &[f64]) -> f64;

    /// Prepares evaluation of `t -> f(x + t e_k)`. Returning `false` makes the
    /// optimizer fall back to [`Objective::value`].
    fn begin_axis_line(&mut self, _x: &[f64], _k: usize) -> bool {
        false
    }

    /// `f(x + t e_k)` for the line set up by the last successful
    /// [`Objective::begin_axis_line`].
    fn axis_value(&mut self, _t: f64) -> f64 {
        unreachable!("axis_value without begin_axis_line")
    }
}

/// Adapts a plain closure.
pub struct FnObjective<F>(pub F);

impl<F: FnMut(&[f64]) -> f64> Objective for FnObjective<F> {
    fn value(&mut self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

struct Counted<'a, O: ?Sized> {
    f: &'a mut O,
    evals: usize,
    nonfinite: bool,
}

impl<O: Objective + ?Sized> Counted<'_, O> {
    fn check(&mut self, v: f64) -> Option<f64> {
        self.evals += 1;
        if v.is_finite() {
            Some(v)
        } else {
            self.nonfinite = true;
            None
        }
    }

    fn call(&mut self, x: &[f64]) -> Option<f64> {
        let v = self.f.value(x);
        self.check(v)
    }
}

#[derive(Clone, Debug)]
enum Direction {
    Axis(usize),
    General(Vec<f64>),
}

fn point(x: &[f64], u: &[f64], t: f64, buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend(x.iter().zip(u).map(|(a, b)| a + t * b));
}

/// Minimizes along `x + t u` starting from `f(x) = f0`. Returns the best step
/// and value found, never worse than `(0, f0)`. `None` on a non-finite value.
fn line_minimize<O: Objective + ?Sized>(
    obj: &mut Counted<'_, O>,
    x: &[f64],
    dir: &Direction,
    f0: f64,
    cfg: &PowellConfig,
    max_extent: f64,
) -> Option<(f64, f64)> {
    let budget = cfg.line_search_max_evals;
    let start = obj.evals;
    let mut buf = Vec::with_capacity(x.len());
    let axis = match dir {
        Direction::Axis(k) => obj.f.begin_axis_line(x, *k).then_some(*k),
        Direction::General(_) => None,
    };
    let mut eval = |obj: &mut Counted<'_, O>, t: f64| -> Option<f64> {
        match (axis, dir) {
            (Some(_), _) => {
                let v = obj.f.axis_value(t);
                obj.check(v)
            }
            (None, Direction::Axis(k)) => {
                buf.clear();
                buf.extend_from_slice(x);
                buf[*k] += t;
                obj.call(&buf)
            }
            (None, Direction::General(u)) => {
                point(x, u, t, &mut buf);
                obj.call(&buf)
            }
        }
    };
    let left = |obj: &Counted<'_, O>| budget.saturating_sub(obj.evals - start);

    if budget == 0 {
        return Some((0.0, f0));
    }
    // bracketing
    let h = cfg.initial_step;
    let fh = eval(obj, h)?;
    let (mut a, mut fa, mut b, mut fb) = (0.0, f0, h, fh);
    if fh > f0 {
        if left(obj) == 0 {
            return Some((0.0, f0));
        }
        let fm = eval(obj, -h)?;
        if fm >= f0 {
            // minimum inside [-h, h]
            return golden(
                obj,
                &mut eval,
                (-h, fm),
                (0.0, f0),
                (h, fh),
                cfg,
                start,
                budget,
            );
        }
        b = -h;
        fb = fm;
    }
    // now f(b) <= f(a), step outward from b
    loop {
        let c = b + GROW * (b - a);
        if c.abs() > max_extent || left(obj) == 0 {
            // no rise found before the period ends
            let best = if fb < f0 { (b, fb) } else { (0.0, f0) };
            return Some(best);
        }
        let fc = eval(obj, c)?;
        if fc >= fb {
            return golden(
                obj,
                &mut eval,
                (a, fa),
                (b, fb),
                (c, fc),
                cfg,
                start,
                budget,
            );
        }
        a = b;
        fa = fb;
        b = c;
        fb = fc;
    }
}

/// Golden-section search on a bracket `lo, mid, hi` with `f(mid)` lowest.
#[allow(clippy::too_many_arguments)]
fn golden<O, E>(
    obj: &mut Counted<'_, O>,
    eval: &mut E,
    lo: (f64, f64),
    mid: (f64, f64),
    hi: (f64, f64),
    cfg: &PowellConfig,
    start: usize,
    budget: usize,
) -> Option<(f64, f64)>
where
    O: Objective + ?Sized,
    E: FnMut(&mut Counted<'_, O>, f64) -> Option<f64>,
{
    let (mut a, mut c) = if lo.0 < hi.0 {
        (lo.0, hi.0)
    } else {
        (hi.0, lo.0)
    };
    let (mut b, mut fb) = mid;
    while (c - a).abs() > cfg.line_search_tolerance && obj.evals - start < budget {
        // probe the larger sub-interval
        let x = if c - b > b - a {
            b + GOLDEN * (c - b)
        } else {
            b - GOLDEN * (b - a)
        };
        let fx = eval(obj, x)?;
        if fx < fb {
            if x > b {
                a = b;
            } else {
                c = b;
            }
            b = x;
            fb = fx;
        } else if x > b {
            c = x;
        } else {
            a = x;
        }
    }
    Some((b, fb))
}

fn step(x: &mut [f64], displacement: &mut [f64], dir: &Direction, t: f64) {
    match dir {
        Direction::Axis(i) => {
            x[*i] += t;
            displacement[*i] += t;
        }
        Direction::General(u) => {
            for ((xi, di), ui) in x.iter_mut().zip(displacement.iter_mut()).zip(u) {
                *xi += t * ui;
                *di += t * ui;
            }
        }
    }
}

fn wrap(x: &mut [f64], period: Option<f64>) {
    if let Some(p) = period {
        for v in x.iter_mut() {
            *v = v.rem_euclid(p);
            if *v >= p {
                *v = 0.0;
            }
        }
    }
}

/// Runs at most `cfg.max_outer_iterations` Powell cycles from `x0`.
///
/// Each cycle line-minimizes along every direction of the set (initially the
/// coordinate axes), then, if Powell's test accepts it, line-minimizes along
/// the cycle's net displacement and swaps it in for the direction of largest
/// decrease. The returned value is never above `f(x0)`.
pub fn powell_partial<F>(f: F, x0: &[f64], cfg: &PowellConfig) -> PowellResult
where
    F: FnMut(&[f64]) -> f64,
{
    powell_minimize(&mut FnObjective(f), x0, cfg)
}

/// [`powell_partial`] for an [`Objective`], using its axis fast path.
pub fn powell_minimize<O: Objective + ?Sized>(
    f: &mut O,
    x0: &[f64],
    cfg: &PowellConfig,
) -> PowellResult {
    let n = x0.len();
    let mut obj = Counted {
        f,
        evals: 0,
        nonfinite: false,
    };
    let mut x = x0.to_vec();
    let fx0 = match obj.call(&x) {
        Some(v) => v,
        None => {
            return PowellResult {
                x,
                f: f64::NAN,
                evals: obj.evals,
                aborted: true,
            }
        }
    };
    let mut fx = fx0;
    if cfg.max_outer_iterations == 0 || n == 0 {
        return PowellResult {
            x,
            f: fx,
            evals: obj.evals,
            aborted: false,
        };
    }
    let max_extent = cfg
        .wrap_period
        .unwrap_or(f64::INFINITY)
        .max(cfg.initial_step * 2.0);

    let mut dirs: Vec<Direction> = (0..n).map(Direction::Axis).collect();

    let cycle_budget = n * cfg.line_search_max_evals;
    let mut trial = Vec::with_capacity(n);

    for _ in 0..cfg.max_outer_iterations {
        let cycle_start = obj.evals;
        let f_start = fx;
        let x_start = x.clone();
        let mut displacement = vec![0.0; n];
        let (mut biggest_drop, mut biggest_idx) = (0.0, 0);
        for (k, dir) in dirs.iter().enumerate() {
            let Some((t, ft)) = line_minimize(&mut obj, &x, dir, fx, cfg, max_extent) else {
                return PowellResult {
                    x,
                    f: fx,
                    evals: obj.evals,
                    aborted: true,
                };
            };
            if ft < fx {
                step(&mut x, &mut displacement, dir, t);
                wrap(&mut x, cfg.wrap_period);
                if fx - ft > biggest_drop {
                    biggest_drop = fx - ft;
                    biggest_idx = k;
                }
                fx = ft;
            }
        }
        let norm = displacement.iter().map(|v| v * v).sum::<f64>().sqrt();
        if fx >= f_start || norm == 0.0 {
            // nothing moved; further cycles would repeat the same searches
            break;
        }
        let u: Vec<f64> = displacement.iter().map(|v| v / norm).collect();
        // Powell's test on the extrapolated point x_start + 2 * displacement:
        // adopt the net displacement only if it is still descending there and
        // the dropped direction was not carrying most of the decrease.
        if cycle_budget.saturating_sub(obj.evals - cycle_start) < 2 {
            continue;
        }
        trial.clear();
        trial.extend(x_start.iter().zip(&displacement).map(|(a, d)| a + 2.0 * d));
        let Some(fe) = obj.call(&trial) else {
            return PowellResult {
                x,
                f: fx,
                evals: obj.evals,
                aborted: true,
            };
        };
        if fe >= f_start {
            continue;
        }
        let lhs = 2.0 * (f_start - 2.0 * fx + fe) * (f_start - fx - biggest_drop).powi(2);
        if lhs >= biggest_drop * (f_start - fe).powi(2) {
            continue;
        }
        let dir = Direction::General(u);
        let line_cfg = PowellConfig {
            line_search_max_evals: cfg
                .line_search_max_evals
                .min(cycle_budget - (obj.evals - cycle_start)),
            ..*cfg
        };
        let Some((t, ft)) = line_minimize(&mut obj, &x, &dir, fx, &line_cfg, max_extent) else {
            return PowellResult {
                x,
                f: fx,
                evals: obj.evals,
                aborted: true,
            };
        };
        if ft < fx {
            step(&mut x, &mut displacement, &dir, t);
            wrap(&mut x, cfg.wrap_period);
            fx = ft;
        }
        dirs.remove(biggest_idx);
        dirs.push(dir);
    }
    PowellResult {
        x,
        f: fx,
        evals: obj.evals,
        aborted: obj.nonfinite,
    }
}
