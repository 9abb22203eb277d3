//! Reference computations kept independent of the step-function machinery.
//!
//! [`integrate_reference`] integrates the smooth equation for the basis
//! `{u, v}` with an adaptive embedded Runge-Kutta pair (Dormand-Prince 5(4)), so agreement
//! with the production path checks the coefficient approximation as well as
//! the recurrences. Slow by design; never used by the solver itself.

use ode_solvers::{Dopri5, OutputType, System, Vector4};

use crate::error::{Error, Result};
use crate::potential::PeriodicPotential;
use crate::shooting::MonodromyCoefficients;

/// `u`, `u'`, `v`, `v'` at the end of one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSolution {
    pub u: f64,
    pub u_x: f64,
    pub v: f64,
    pub v_x: f64,
    /// `|u v' - u' v - 1|`, the drift of the Wronskian.
    pub error_estimate: f64,
}

impl OracleSolution {
    fn from_state(s: [f64; 4]) -> Self {
        let [u, u_x, v, v_x] = s;
        OracleSolution {
            u,
            u_x,
            v,
            v_x,
            error_estimate: (u * v_x - u_x * v - 1.0).abs(),
        }
    }

    pub fn wronskian(&self) -> f64 {
        self.u * self.v_x - self.u_x * self.v
    }

    pub fn discriminant(&self) -> f64 {
        self.u + self.v_x
    }

    pub fn as_coefficients(&self) -> MonodromyCoefficients {
        MonodromyCoefficients {
            c11: self.u,
            c12: self.u_x,
            c21: self.v,
            c22: self.v_x,
            log_zeta: 0.0,
        }
    }
}

struct Hill<'a> {
    potential: &'a PeriodicPotential,
    lambda: f64,
}

impl System<f64, Vector4<f64>> for Hill<'_> {
    fn system(&self, x: f64, y: &Vector4<f64>, dy: &mut Vector4<f64>) {
        let k = self.potential.evaluate(x) - self.lambda;
        dy[0] = y[1];
        dy[1] = k * y[0];
        dy[2] = y[3];
        dy[3] = k * y[2];
    }
}

fn check_tol(rel_tol: f64) -> Result<()> {
    if (1e-13..=1e-6).contains(&rel_tol) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "oracle tolerance must lie in [1e-13, 1e-6], got {rel_tol}"
        )))
    }
}

/// Knots the integrator must not step across: the potential's own jumps
/// (for step potentials) between `0` and `x`.
fn knots(potential: &PeriodicPotential, x: f64) -> Vec<f64> {
    let period = potential.period();
    let mut out = vec![0.0];
    if let Some(bps) = potential.step_breakpoints() {
        let mut shift = 0.0;
        while shift < x {
            for &b in &bps[1..] {
                let k = shift + b;
                if k > 0.0 && k < x {
                    out.push(k);
                }
            }
            shift += period;
        }
    }
    out.push(x);
    out.dedup();
    out
}

/// State `(u, u', v, v')` at `x ≥ 0`.
pub fn integrate_to(
    potential: &PeriodicPotential,
    lambda: f64,
    x: f64,
    rel_tol: f64,
) -> Result<[f64; 4]> {
    check_tol(rel_tol)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "x must be finite and >= 0, got {x}"
        )));
    }
    let mut state = Vector4::new(1.0, 0.0, 0.0, 1.0);
    let atol = rel_tol * 1e-2;
    for w in knots(potential, x).windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let system = Hill { potential, lambda };
        let mut solver = Dopri5::from_param(
            system,
            a,
            b,
            b - a,
            state,
            rel_tol,
            atol,
            0.9,
            0.04,
            0.2,
            10.0,
            b - a,
            0.0,
            1_000_000,
            u32::MAX,
            OutputType::Sparse,
        );
        solver
            .integrate()
            .map_err(|e| Error::IntegrationFailure(e.to_string()))?;
        state = *solver
            .y_out()
            .last()
            .ok_or_else(|| Error::IntegrationFailure("no output produced".into()))?;
    }
    Ok([state[0], state[1], state[2], state[3]])
}

/// `u`, `u'`, `v`, `v'` at `x = ℓ` for the smooth potential.
pub fn integrate_reference(
    potential: &PeriodicPotential,
    lambda: f64,
    rel_tol: f64,
) -> Result<OracleSolution> {
    integrate_to(potential, lambda, potential.period(), rel_tol).map(OracleSolution::from_state)
}

/// Closed-form `(u, u', v, v')` at `x` for `q ≡ 0`.
pub fn free_solution(lambda: f64, x: f64) -> [f64; 4] {
    if lambda > 0.0 {
        let w = lambda.sqrt();
        let (s, c) = (w * x).sin_cos();
        [c, -w * s, s / w, c]
    } else if lambda < 0.0 {
        let w = (-lambda).sqrt();
        let (s, c) = ((w * x).sinh(), (w * x).cosh());
        [c, w * s, s / w, c]
    } else {
        [1.0, 0.0, x, 1.0]
    }
}

/// Central difference `(g(λ + step) - g(λ - step)) / (2 step)`.
pub fn finite_difference_lambda<F>(mut quantity: F, lambda: f64, step: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {step}"
        )));
    }
    let hi = quantity(lambda + step)?;
    let lo = quantity(lambda - step)?;
    Ok((hi - lo) / (2.0 * step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_reference_is_identity_at_lambda_one() {
        let p = PeriodicPotential::free(2.0 * PI).unwrap();
        let s = integrate_reference(&p, 1.0, 1e-12).unwrap();
        assert!((s.u - 1.0).abs() < 1e-9);
        assert!(s.u_x.abs() < 1e-9);
        assert!(s.v.abs() < 1e-9);
        assert!((s.v_x - 1.0).abs() < 1e-9);
    }

    #[test]
    fn free_reference_matches_closed_form() {
        let p = PeriodicPotential::free(2.0 * PI).unwrap();
        for lam in [-0.7, 0.0, 0.3, 5.0] {
            let s = integrate_to(&p, lam, 3.3, 1e-12).unwrap();
            let e = free_solution(lam, 3.3);
            for k in 0..4 {
                assert!((s[k] - e[k]).abs() < 1e-9 * (1.0 + e[k].abs()), "{lam} {k}");
            }
        }
    }

    #[test]
    fn wronskian_is_preserved() {
        let p = PeriodicPotential::builtin("ex2").unwrap();
        let s = integrate_reference(&p, 3.5, 1e-12).unwrap();
        assert!(s.error_estimate <= 1e-11, "{}", s.error_estimate);
    }

    #[test]
    fn step_potentials_split_at_jumps() {
        let p = PeriodicPotential::step("sq", 2.0, vec![0.0, 1.0, 2.0], vec![0.0, 3.0]).unwrap();
        assert_eq!(knots(&p, 2.0), vec![0.0, 1.0, 2.0]);
        assert_eq!(knots(&p, 5.0), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let free = PeriodicPotential::free(2.0).unwrap();
        assert_eq!(knots(&free, 2.0), vec![0.0, 2.0]);
    }

    #[test]
    fn tolerance_range_is_enforced() {
        let p = PeriodicPotential::builtin("mathieu").unwrap();
        assert!(integrate_reference(&p, 1.0, 1e-3).is_err());
        assert!(integrate_reference(&p, 1.0, 1e-15).is_err());
    }

    #[test]
    fn central_difference_of_a_square() {
        let d = finite_difference_lambda(|x| Ok(x * x), 3.0, 1e-4).unwrap();
        assert!((d - 6.0).abs() < 1e-8);
        assert!(finite_difference_lambda(Ok, 1.0, 0.0).is_err());
    }
}
