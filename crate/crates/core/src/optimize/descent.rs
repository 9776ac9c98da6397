//! Projected gradient descent with Barzilai-Borwein steps and Armijo
//! backtracking along the projection arc.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentSettings {
    pub max_iter: usize,
    /// Stop once the objective fell by at most `rel_tol` (relative) over the
    /// last `window` iterations.
    pub rel_tol: f64,
    pub window: usize,
    /// Stop once the objective is at most this value.
    pub zero_objective: f64,
    /// Stop once the largest gradient component fell to this fraction of
    /// its starting value; zero disables the test.
    pub grad_tol: f64,
    pub sufficient_decrease: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for DescentSettings {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            rel_tol: 1e-10,
            window: 10,
            zero_objective: 0.0,
            grad_tol: 0.0,
            sufficient_decrease: 1e-4,
            shrink: 0.5,
            max_backtracks: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// The objective reached the zero threshold.
    ZeroObjective,
    /// The relative decrease over the window fell below tolerance.
    Stalled,
    /// No step along the projected gradient decreases the objective.
    Stationary,
    IterationCap,
    /// Nothing to optimize.
    NoFreeVariables,
}

impl StopReason {
    pub fn converged(self) -> bool {
        !matches!(self, StopReason::IterationCap)
    }
}

pub(crate) trait Objective {
    /// Objective value and gradient at `x`.
    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)>;

    /// Maps `x` onto the feasible set in place.
    fn project(&self, _x: &mut [f64]) {}
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DescentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub stop: StopReason,
    /// Objective at the start and after every accepted step.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn minimize(
    problem: &mut impl Objective,
    mut x: Vec<f64>,
    settings: &DescentSettings,
) -> Result<DescentOutcome> {
    problem.project(&mut x);
    let (mut f, mut g) = problem.evaluate(&x)?;
    let mut history = vec![f];
    let mut step = 1.0;
    let mut trial = vec![0.0; x.len()];
    let finish = |x, value, iterations, stop, history| {
        Ok(DescentOutcome {
            x,
            value,
            iterations,
            stop,
            history,
        })
    };
    if x.is_empty() {
        return finish(x, f, 0, StopReason::NoFreeVariables, history);
    }
    let grad_floor = settings.grad_tol * max_abs(&g);
    for iter in 1..=settings.max_iter {
        if f <= settings.zero_objective {
            return finish(x, f, iter - 1, StopReason::ZeroObjective, history);
        }
        if max_abs(&g) <= grad_floor {
            return finish(x, f, iter - 1, StopReason::Stationary, history);
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..=settings.max_backtracks {
            for ((y, xi), gi) in trial.iter_mut().zip(&x).zip(&g) {
                *y = xi - t * gi;
            }
            problem.project(&mut trial);
            let predicted: f64 = x
                .iter()
                .zip(&trial)
                .zip(&g)
                .map(|((xi, yi), gi)| gi * (yi - xi))
                .sum();
            if predicted >= 0.0 {
                // Projection cancelled the step entirely.
                break;
            }
            let (f_new, g_new) = problem.evaluate(&trial)?;
            if f_new <= f + settings.sufficient_decrease * predicted {
                accepted = Some((f_new, g_new));
                break;
            }
            t *= settings.shrink;
        }
        let Some((f_new, g_new)) = accepted else {
            return finish(x, f, iter - 1, StopReason::Stationary, history);
        };
        let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 {
            (dot(&s, &s) / sy).clamp(1e-30, 1e30)
        } else {
            t * 2.0
        };
        std::mem::swap(&mut x, &mut trial);
        f = f_new;
        g = g_new;
        history.push(f);
        if history.len() > settings.window {
            let old = history[history.len() - 1 - settings.window];
            if old - f <= settings.rel_tol * old.abs() {
                let stop = if f <= settings.zero_objective {
                    StopReason::ZeroObjective
                } else {
                    StopReason::Stalled
                };
                return finish(x, f, iter, stop, history);
            }
        }
    }
    let stop = if f <= settings.zero_objective {
        StopReason::ZeroObjective
    } else {
        StopReason::IterationCap
    };
    finish(x, f, settings.max_iter, stop, history)
}
