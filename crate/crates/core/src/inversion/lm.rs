//! Damped least squares (Levenberg–Marquardt) for the four-rate system.
//!
//! The parameter vector is always four long, `[phi0, phi1, phi2, r0]`.
//! When `r0` is held fixed its Jacobian column is zero, so the damping term
//! pins its update to zero.

use nalgebra::{Matrix4, Vector4};

pub(crate) type Params = Vector4<f64>;

/// Residual vector and Jacobian at a parameter point.
pub(crate) trait LeastSquares {
    fn evaluate(&self, x: &Params) -> (Vector4<f64>, Matrix4<f64>);
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct LmSettings {
    pub max_iterations: usize,
    /// Stop when the accepted step is below this (absolute, per parameter).
    pub step_tolerance: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: 1e-15,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct LmOutcome {
    pub x: Params,
    /// `0.5 * |r|^2` at `x`.
    pub cost: f64,
}

pub(crate) fn minimize(problem: &impl LeastSquares, x0: Params, settings: &LmSettings) -> LmOutcome {
    let mut x = x0;
    let (mut r, mut j) = problem.evaluate(&x);
    let mut cost = 0.5 * r.norm_squared();
    let mut lambda = {
        let jtj = j.transpose() * j;
        1e-3 * (0..4).map(|i| jtj[(i, i)]).fold(0.0, f64::max).max(1e-12)
    };

    for _ in 0..settings.max_iterations {
        if cost == 0.0 {
            break;
        }
        let jt = j.transpose();
        let jtj = jt * j;
        let gradient = jt * r;
        let mut accepted = false;
        while lambda < 1e20 {
            let damped = jtj + Matrix4::identity() * lambda;
            let Some(step) = damped.lu().solve(&(-gradient)) else {
                lambda *= 4.0;
                continue;
            };
            let candidate = x + step;
            let (r_new, j_new) = problem.evaluate(&candidate);
            let cost_new = 0.5 * r_new.norm_squared();
            if cost_new < cost {
                let step_size = step.amax();
                x = candidate;
                r = r_new;
                j = j_new;
                cost = cost_new;
                lambda = (lambda / 3.0).max(1e-20);
                accepted = step_size > settings.step_tolerance;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    LmOutcome { x, cost }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rosenbrock written as residuals, padded to four.
    struct Rosenbrock;

    impl LeastSquares for Rosenbrock {
        fn evaluate(&self, x: &Params) -> (Vector4<f64>, Matrix4<f64>) {
            let r = Vector4::new(10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0], 0.0, 0.0);
            let mut j = Matrix4::zeros();
            j[(0, 0)] = -20.0 * x[0];
            j[(0, 1)] = 10.0;
            j[(1, 0)] = -1.0;
            (r, j)
        }
    }

    #[test]
    fn solves_rosenbrock() {
        let out = minimize(&Rosenbrock, Vector4::new(-1.2, 1.0, 0.0, 0.0), &LmSettings::default());
        assert!((out.x[0] - 1.0).abs() < 1e-10);
        assert!((out.x[1] - 1.0).abs() < 1e-10);
        assert!(out.cost < 1e-20);
        // frozen parameters stay put
        assert_eq!(out.x[2], 0.0);
        assert_eq!(out.x[3], 0.0);
    }
}
