//! Orthant-wise limited-memory quasi-Newton minimization.
//!
//! Minimizes `f(x) + l1 * |x|_1` for a smooth, differentiable `f`. With
//! `l1 = 0` every orthant step is a no-op and the method is plain L-BFGS
//! with a backtracking Armijo line search.

use std::collections::VecDeque;

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum OptimError {
    #[error("objective is not finite at iteration {iteration}")]
    NonFinite { iteration: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OwlqnConfig<T> {
    pub l1: T,
    pub max_iterations: usize,
    /// Stop when the objective's relative decrease over `period` iterations,
    /// or the pseudo-gradient norm relative to `max(1, |x|)`, falls below this.
    pub tolerance: T,
    pub period: usize,
    /// Number of correction pairs kept.
    pub history: usize,
    pub max_linesearch: usize,
}

impl<T: Scalar> Default for OwlqnConfig<T> {
    fn default() -> Self {
        OwlqnConfig {
            l1: T::zero(),
            max_iterations: 200,
            tolerance: T::of(1e-5),
            period: 10,
            history: 6,
            max_linesearch: 40,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// No step along the search direction decreased the objective.
    LineSearchFailed,
}

#[derive(Clone, Debug)]
pub struct OwlqnResult<T> {
    pub x: Vec<T>,
    pub objective: T,
    /// Objective at the start and after every accepted step.
    pub trace: Vec<T>,
    pub iterations: usize,
    pub termination: Termination,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn l1_norm<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|v| v.abs()).sum()
}

/// Steepest-descent direction of the non-smooth objective, negated.
fn pseudo_gradient<T: Scalar>(x: &[T], g: &[T], l1: T, out: &mut [T]) {
    if l1 == T::zero() {
        out.copy_from_slice(g);
        return;
    }
    for ((o, &xi), &gi) in out.iter_mut().zip(x).zip(g) {
        let zero = T::zero();
        *o = if xi < zero || (xi == zero && gi - l1 > zero) {
            gi - l1
        } else if xi > zero || gi + l1 < zero {
            gi + l1
        } else {
            zero
        };
    }
}

struct Memory<T> {
    pairs: VecDeque<(Vec<T>, Vec<T>, T)>,
    capacity: usize,
}

impl<T: Scalar> Memory<T> {
    fn push(&mut self, s: Vec<T>, y: Vec<T>) {
        let ys = dot(&s, &y);
        if ys <= T::epsilon() {
            return;
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, ys));
    }

    /// Two-loop recursion: returns `-H * v`.
    fn direction(&self, v: &[T]) -> Vec<T> {
        let mut q: Vec<T> = v.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, ys) in self.pairs.iter().rev() {
            let a = dot(s, &q) / *ys;
            q.iter_mut().zip(y).for_each(|(qi, &yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((_, y, ys)) = self.pairs.back() {
            let gamma = *ys / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        }
        for ((s, y, ys), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = dot(y, &q) / *ys;
            q.iter_mut().zip(s).for_each(|(qi, &si)| *qi += (a - b) * si);
        }
        q.iter_mut().for_each(|qi| *qi = -*qi);
        q
    }
}

/// Minimizes `f + l1 * |x|_1` from `x0`. `f` writes the gradient of its
/// smooth part into the second argument and returns its value.
pub fn minimize<T, F>(mut f: F, x0: Vec<T>, config: &OwlqnConfig<T>) -> Result<OwlqnResult<T>, OptimError>
where
    T: Scalar,
    F: FnMut(&[T], &mut [T]) -> T,
{
    let dim = x0.len();
    let l1 = config.l1;
    let c1 = T::of(1e-4);
    let half = T::of(0.5);

    let mut x = x0;
    let mut g = vec![T::zero(); dim];
    let mut fx = f(&x, &mut g) + l1 * l1_norm(&x);
    if !fx.is_finite() {
        return Err(OptimError::NonFinite { iteration: 0 });
    }
    let mut pg = vec![T::zero(); dim];
    pseudo_gradient(&x, &g, l1, &mut pg);

    let mut memory = Memory { pairs: VecDeque::new(), capacity: config.history.max(1) };
    let mut trace = vec![fx];
    let mut xn = vec![T::zero(); dim];
    let mut gn = vec![T::zero(); dim];
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    if dot(&pg, &pg).sqrt() / T::one().max(dot(&x, &x).sqrt()) <= config.tolerance {
        termination = Termination::Converged;
    }

    while termination == Termination::MaxIterations && iterations < config.max_iterations {
        iterations += 1;
        let mut d = memory.direction(&pg);
        if l1 > T::zero() {
            for (di, &pi) in d.iter_mut().zip(&pg) {
                if *di * pi >= T::zero() {
                    *di = T::zero();
                }
            }
        }
        if dot(&d, &pg) >= T::zero() {
            memory.pairs.clear();
            d = pg.iter().map(|&v| -v).collect();
        }
        let orthant: Vec<T> = x
            .iter()
            .zip(&pg)
            .map(|(&xi, &pi)| if xi != T::zero() { xi.signum() } else { (-pi).signum() })
            .collect();

        let mut step = if memory.pairs.is_empty() {
            T::one() / dot(&d, &d).sqrt().max(T::one())
        } else {
            T::one()
        };
        let mut accepted = None;
        for _ in 0..config.max_linesearch {
            for i in 0..dim {
                let v = x[i] + step * d[i];
                xn[i] = if l1 > T::zero() && v.signum() != orthant[i] { T::zero() } else { v };
            }
            let fn_val = f(&xn, &mut gn) + l1 * l1_norm(&xn);
            if fn_val.is_nan() {
                return Err(OptimError::NonFinite { iteration: iterations });
            }
            let decrease: T = pg.iter().zip(xn.iter().zip(&x)).map(|(&p, (&a, &b))| p * (a - b)).sum();
            if fn_val.is_finite() && fn_val <= fx + c1 * decrease {
                accepted = Some(fn_val);
                break;
            }
            step *= half;
        }
        let Some(fn_val) = accepted else {
            termination = Termination::LineSearchFailed;
            break;
        };

        let s: Vec<T> = xn.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<T> = gn.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        memory.push(s, y);
        std::mem::swap(&mut x, &mut xn);
        std::mem::swap(&mut g, &mut gn);
        fx = fn_val;
        pseudo_gradient(&x, &g, l1, &mut pg);
        trace.push(fx);

        let pg_norm = dot(&pg, &pg).sqrt() / T::one().max(dot(&x, &x).sqrt());
        let window_converged = trace.len() > config.period && {
            let before = trace[trace.len() - 1 - config.period];
            (before - fx) / fx.abs().max(T::epsilon()) < config.tolerance
        };
        if pg_norm <= config.tolerance || window_converged {
            termination = Termination::Converged;
        }
    }

    Ok(OwlqnResult { x, objective: fx, trace, iterations, termination })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(x: &[f64], g: &mut [f64]) -> f64 {
        // 0.5 * sum (i+1) (x_i - 1)^2
        let mut f = 0.0;
        for (i, (&xi, gi)) in x.iter().zip(g.iter_mut()).enumerate() {
            let a = (i + 1) as f64;
            f += 0.5 * a * (xi - 1.0).powi(2);
            *gi = a * (xi - 1.0);
        }
        f
    }

    #[test]
    fn solves_quadratic() {
        let cfg = OwlqnConfig { tolerance: 1e-10, ..Default::default() };
        let res = minimize(quadratic, vec![0.0; 5], &cfg).unwrap();
        for xi in &res.x {
            assert!((xi - 1.0).abs() < 1e-6, "{:?}", res.x);
        }
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let cfg = OwlqnConfig { tolerance: 1e-12, max_iterations: 500, ..Default::default() };
        let res = minimize(f, vec![-1.2, 1.0], &cfg).unwrap();
        assert!((res.x[0] - 1.0).abs() < 1e-4 && (res.x[1] - 1.0).abs() < 1e-4, "{:?}", res.x);
    }

    #[test]
    fn l1_soft_thresholds() {
        // minimize 0.5 (x - c)^2 + l1 |x| per coordinate: x* = sign(c) max(|c| - l1, 0)
        let c = [3.0, -2.0, 0.5, -0.2];
        let f = |x: &[f64], g: &mut [f64]| {
            let mut v = 0.0;
            for i in 0..4 {
                v += 0.5 * (x[i] - c[i]).powi(2);
                g[i] = x[i] - c[i];
            }
            v
        };
        let cfg = OwlqnConfig { l1: 1.0, tolerance: 1e-12, ..Default::default() };
        let res = minimize(f, vec![0.0; 4], &cfg).unwrap();
        let expect = [2.0, -1.0, 0.0, 0.0];
        for (a, b) in res.x.iter().zip(expect) {
            assert!((a - b).abs() < 1e-6, "{:?}", res.x);
        }
        assert_eq!(res.x[2], 0.0);
        assert_eq!(res.x[3], 0.0);
    }

    #[test]
    fn trace_never_increases() {
        let cfg = OwlqnConfig { l1: 0.3, tolerance: 1e-12, ..Default::default() };
        let res = minimize(quadratic, vec![5.0, -3.0, 0.0], &cfg).unwrap();
        assert!(res.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn nan_objective_is_reported() {
        let f = |_: &[f64], _: &mut [f64]| f64::NAN;
        assert_eq!(minimize(f, vec![0.0], &OwlqnConfig::default()).unwrap_err(), OptimError::NonFinite { iteration: 0 });
    }

    #[test]
    fn single_precision() {
        let f = |x: &[f32], g: &mut [f32]| {
            g[0] = 2.0 * (x[0] - 3.0);
            (x[0] - 3.0).powi(2)
        };
        let res = minimize(f, vec![0.0f32], &OwlqnConfig::default()).unwrap();
        assert!((res.x[0] - 3.0).abs() < 1e-3);
    }
}
