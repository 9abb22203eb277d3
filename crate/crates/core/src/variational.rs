//! λ-derivatives of the monodromy and the density near indeterminate edges.
//!
//! Each basis solution is swept together with its λ-derivative. With
//! `B = [y, y']` and `D = ∂B/∂λ`, a cell maps `(B, D)` to
//! `(A B, A_λ B + A D)` forward and `(A⁻¹ B, (A⁻¹)_λ B + A⁻¹ D)` backward.
//! Both parts are divided by the same `σ`, so `D` holds the true derivative
//! in the frame's scale. Because the backward Wronskian is 1 for every λ,
//! each `∂c_ij/∂λ` is the sum of two Wronskian pairings at the match point.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{PeriodicPotential, StepMesh};
use crate::propagator::{power_of_two_below, IntervalKernel, StateFrame, RENORMALIZE_ABOVE};
use crate::shooting::{
    run_ladder_with, Extrapolate, LadderConfig, MonodromyCoefficients, SweepPlan,
};
use crate::spectral::{self, BandSearch, BoundaryCondition};

/// A basis solution and its λ-derivative, sharing one external scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalFrame {
    pub base: StateFrame,
    /// `(∂y/∂λ, ∂y'/∂λ)` in units of `exp(base.log_scale)`.
    pub d_lambda: [f64; 2],
    /// Running `Σ h_j / (2 ω_j)` over the scaled cells crossed so far.
    pub correction_sum: f64,
}

impl VariationalFrame {
    pub fn new(y: f64, y_x: f64) -> Self {
        VariationalFrame {
            base: StateFrame::new(y, y_x),
            d_lambda: [0.0, 0.0],
            correction_sum: 0.0,
        }
    }

    /// Crosses cell `k` from left to right.
    pub fn advance_forward(&mut self, k: &IntervalKernel) {
        self.step(k, true);
    }

    /// Crosses cell `k` from right to left.
    pub fn advance_backward(&mut self, k: &IntervalKernel) {
        self.step(k, false);
    }

    fn step(&mut self, k: &IntervalKernel, forward: bool) {
        let (m, ml) = if forward {
            (k.scaled_forward(), k.scaled_forward_lambda())
        } else {
            (k.scaled_backward(), k.scaled_backward_lambda())
        };
        let b = self.base.as_array();
        let from_base = ml.apply(b);
        let carried = m.apply(self.d_lambda);
        self.d_lambda = [from_base[0] + carried[0], from_base[1] + carried[1]];
        self.base.advance(&m, k.log_sigma);
        self.correction_sum += k.log_sigma_rate();
        self.renormalize();
    }

    fn renormalize(&mut self) {
        let mag = self
            .base
            .max_abs()
            .max(self.d_lambda[0].abs())
            .max(self.d_lambda[1].abs());
        if mag > RENORMALIZE_ABOVE && mag.is_finite() {
            let f = power_of_two_below(mag);
            self.base.y /= f;
            self.base.y_x /= f;
            self.base.log_scale += f.ln();
            self.d_lambda[0] /= f;
            self.d_lambda[1] /= f;
        }
    }

    /// λ-derivative of the stored (scaled) components themselves, with the
    /// `σ` factors varying too: `D + Σ h_j/(2ω_j) · B`.
    pub fn scaled_derivative(&self) -> [f64; 2] {
        [
            self.d_lambda[0] + self.correction_sum * self.base.y,
            self.d_lambda[1] + self.correction_sum * self.base.y_x,
        ]
    }
}

/// `∂c_ij/∂λ` at the end of the period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeDerivatives {
    /// `u_λ(ℓ) = ∂c11/∂λ`.
    pub u_l: f64,
    /// `u'_λ(ℓ) = ∂c12/∂λ`.
    pub u_xl: f64,
    /// `v_λ(ℓ) = ∂c21/∂λ`.
    pub v_l: f64,
    /// `v'_λ(ℓ) = ∂c22/∂λ`.
    pub v_xl: f64,
}

impl EdgeDerivatives {
    /// λ-derivative of `c11 c22 - c12 c21`, which should vanish.
    pub fn det_derivative(&self, c: &MonodromyCoefficients) -> f64 {
        self.u_l * c.c22 + c.c11 * self.v_xl - self.u_xl * c.c21 - c.c12 * self.v_l
    }

    /// λ-derivative of the discriminant `c11 + c22`.
    pub fn trace_derivative(&self) -> f64 {
        self.u_l + self.v_xl
    }
}

/// Coefficients and their derivatives from one mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalMonodromy {
    pub coeffs: MonodromyCoefficients,
    pub derivs: EdgeDerivatives,
}

impl Extrapolate for VariationalMonodromy {
    fn richardson(&self, coarse: &Self) -> Self {
        let (f, c) = (&self.derivs, &coarse.derivs);
        VariationalMonodromy {
            coeffs: self.coeffs.richardson(&coarse.coeffs),
            derivs: EdgeDerivatives {
                u_l: f.u_l.richardson(&c.u_l),
                u_xl: f.u_xl.richardson(&c.u_xl),
                v_l: f.v_l.richardson(&c.v_l),
                v_xl: f.v_xl.richardson(&c.v_xl),
            },
        }
    }
}

/// The four variational frames at the match point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalMatch {
    pub u_front: VariationalFrame,
    pub v_front: VariationalFrame,
    pub u_back: VariationalFrame,
    pub v_back: VariationalFrame,
}

/// Runs the scaled base and derivative sweeps of `plan` to `x_M`.
pub fn variational_frames(plan: &SweepPlan) -> VariationalMatch {
    let mut u_front = VariationalFrame::new(1.0, 0.0);
    let mut v_front = VariationalFrame::new(0.0, 1.0);
    for k in plan.forward_cells() {
        u_front.advance_forward(k);
        v_front.advance_forward(k);
    }
    let mut u_back = VariationalFrame::new(1.0, 0.0);
    let mut v_back = VariationalFrame::new(0.0, 1.0);
    for k in plan.backward_cells().iter().rev() {
        u_back.advance_backward(k);
        v_back.advance_backward(k);
    }
    VariationalMatch {
        u_front,
        v_front,
        u_back,
        v_back,
    }
}

fn pair(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// `W(a, b)` and `∂W(a, b)/∂λ` in true units.
fn pair_with_derivative(a: &VariationalFrame, b: &VariationalFrame) -> (f64, f64) {
    let s = (a.base.log_scale + b.base.log_scale).exp();
    let (ab, bb) = (a.base.as_array(), b.base.as_array());
    let w = pair(ab, bb);
    let dw = pair(a.d_lambda, bb) + pair(ab, b.d_lambda);
    (w * s, dw * s)
}

/// Coefficients and λ-derivatives of the step approximation in `plan`.
pub fn variational_shoot(plan: &SweepPlan) -> Result<VariationalMonodromy> {
    let lambda = plan.lambda;
    let f = variational_frames(plan);
    let (c11, u_l) = pair_with_derivative(&f.u_front, &f.v_back);
    let (c12, u_xl) = pair_with_derivative(&f.u_back, &f.u_front);
    let (c21, v_l) = pair_with_derivative(&f.v_front, &f.v_back);
    let (c22, v_xl) = pair_with_derivative(&f.u_back, &f.v_front);
    let out = VariationalMonodromy {
        coeffs: MonodromyCoefficients {
            c11,
            c12,
            c21,
            c22,
            log_zeta: plan.log_p_front() - plan.log_p_back(),
        },
        derivs: EdgeDerivatives {
            u_l,
            u_xl,
            v_l,
            v_xl,
        },
    };
    let finite = [c11, c12, c21, c22, u_l, u_xl, v_l, v_xl]
        .iter()
        .all(|x| x.is_finite());
    if finite {
        Ok(out)
    } else {
        Err(Error::ScalingFault { lambda })
    }
}

/// Coefficients and derivatives converged together on the mesh ladder:
/// the trace and all four derivatives must settle to within `tol`.
pub fn variational_monodromy(
    potential: &PeriodicPotential,
    lambda: f64,
    tol: f64,
) -> Result<(MonodromyCoefficients, EdgeDerivatives)> {
    let ladder = run_ladder_with(
        potential,
        tol,
        &LadderConfig::default(),
        |mesh: &StepMesh| variational_shoot(&SweepPlan::new(mesh, lambda)),
        |v: &VariationalMonodromy| {
            let d = &v.derivs;
            Ok([v.coeffs.trace(), d.u_l, d.u_xl, d.v_l, d.v_xl])
        },
    )?;
    let ladder = ladder.into_result(lambda)?;
    Ok((ladder.estimate.coeffs, ladder.estimate.derivs))
}

/// Band edge inside `bracket`, to within `width`.
///
/// The discriminant defect must change sign across the bracket, or touch
/// zero inside it (a closed gap).
pub fn locate_edge(potential: &PeriodicPotential, bracket: (f64, f64), width: f64) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo < hi) || !(width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bad bracket [{lo}, {hi}] or width {width}"
        )));
    }
    let tol = BandSearch::default().tol;
    let g = |l: f64| {
        spectral::discriminant_coefficients(potential, l, tol).map(|(c, _)| c.discriminant_defect())
    };
    let (glo, ghi) = (g(lo)?, g(hi)?);
    let (blo, bhi) = (spectral::in_band(glo), spectral::in_band(ghi));
    if blo != bhi {
        let (band, gap) = if blo { (lo, hi) } else { (hi, lo) };
        return spectral::bisect_edge(potential, band, gap, width, tol);
    }
    // no sign change: accept a minimum of |g| that reaches zero
    let (x, gx) = spectral::golden_min(|l| g(l).map(f64::abs), lo, hi, width)?;
    if gx > 1e-12 {
        return Err(Error::Bracket { lo, hi });
    }
    // A double root only resolves to about sqrt(eps) from |g|; the trace
    // derivative has a simple root there.
    Ok(refine_double_root(potential, x, (lo, hi), width, tol).unwrap_or(x))
}

fn refine_double_root(
    potential: &PeriodicPotential,
    x: f64,
    (lo, hi): (f64, f64),
    width: f64,
    tol: f64,
) -> Option<f64> {
    let dt = |l: f64| {
        variational_monodromy(potential, l, tol)
            .ok()
            .map(|(_, d)| d.trace_derivative())
    };
    let mut h = 1e-7 * x.abs().max(1.0);
    let (mut a, mut b) = loop {
        let (a, b) = ((x - h).max(lo), (x + h).min(hi));
        let (da, db) = (dt(a)?, dt(b)?);
        if da.signum() != db.signum() {
            break ((a, da), (b, db));
        }
        if h > 1e-4 * x.abs().max(1.0) {
            return None;
        }
        h *= 4.0;
    };
    while b.0 - a.0 > width {
        let m = 0.5 * (a.0 + b.0);
        if m == a.0 || m == b.0 {
            break;
        }
        let dm = dt(m)?;
        if dm.signum() == a.1.signum() {
            a = (m, dm);
        } else {
            b = (m, dm);
        }
    }
    Some(0.5 * (a.0 + b.0))
}

/// Where the factor `2 + |c11 + c22|` of the near-edge formula is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceFactor {
    /// At the edge, where it equals 4. The truncation is then consistent:
    /// every factor is a leading-order Taylor coefficient at `λ*`.
    #[default]
    AtEdge,
    /// At the evaluation point `λ`, which needs one extra monodromy.
    AtLambda,
}

/// Density near an indeterminate edge `lambda_star` from the λ-derivatives
/// there, for the Dirichlet (`α = 0`) and Neumann (`α = π/2`) conditions:
///
/// ```text
/// f ≈ sqrt((2 + |c11 + c22|) |u_λ + v'_λ|(λ*)) / (2π |d(λ*)| sqrt|λ* - λ|)
/// ```
///
/// with `d = v_λ` (Dirichlet) or `d = u'_λ` (Neumann). The relative error is
/// `O(|λ* - λ|)`.
pub fn density_near_edge(
    potential: &PeriodicPotential,
    bc: &BoundaryCondition,
    lambda: f64,
    lambda_star: f64,
    tol: f64,
) -> Result<f64> {
    density_near_edge_with(potential, bc, lambda, lambda_star, tol, TraceFactor::AtEdge)
}

pub fn density_near_edge_with(
    potential: &PeriodicPotential,
    bc: &BoundaryCondition,
    lambda: f64,
    lambda_star: f64,
    tol: f64,
    factor: TraceFactor,
) -> Result<f64> {
    if !(bc.is_dirichlet() || bc.is_neumann()) {
        return Err(Error::UnsupportedBoundary { alpha: bc.alpha() });
    }
    let gap = (lambda_star - lambda).abs();
    if !(gap > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must differ from the edge {lambda_star}"
        )));
    }
    let (_, d) = variational_monodromy(potential, lambda_star, tol)?;
    let outer = match factor {
        TraceFactor::AtEdge => 4.0,
        TraceFactor::AtLambda => {
            let (here, _) = spectral::discriminant_coefficients(potential, lambda, tol)?;
            2.0 + here.trace().abs()
        }
    };
    let den = if bc.is_dirichlet() { d.v_l } else { d.u_xl };
    let num = (outer * d.trace_derivative().abs()).sqrt();
    Ok(num / (2.0 * PI * den.abs() * gap.sqrt()))
}

/// Exponent estimate from two samples of `f ≈ C / |λ - λ*|^rate`.
pub fn growth_rate(p1: (f64, f64), p2: (f64, f64), lambda_star: f64) -> Result<f64> {
    let ((l1, f1), (l2, f2)) = (p1, p2);
    if !(f1 > 0.0 && f2 > 0.0) {
        return Err(Error::InvalidArgument("densities must be positive".into()));
    }
    let (d1, d2) = ((l1 - lambda_star).abs(), (l2 - lambda_star).abs());
    if l1 == l2 || d1 == 0.0 || d2 == 0.0 {
        return Err(Error::InvalidArgument(
            "need two distinct points away from the edge".into(),
        ));
    }
    Ok((f2 / f1).ln() / (d1 / d2).ln())
}
