//! Stabilized double shooting across one period.
//!
//! The forward basis `{u, v}` (unit initial data at `x = 0`) is swept to an
//! interior breakpoint `x_M`, the backward basis (unit terminal data at
//! `x = ℓ`) is swept back to the same point, and the monodromy entries
//! `c11 = u(ℓ)`, `c12 = u'(ℓ)`, `c21 = v(ℓ)`, `c22 = v'(ℓ)` are read off
//! from the two bases at the match point. Every hyperbolic cell is divided by
//! `σ_n = exp(ω_n h_n)` as it is crossed; the accumulated logs are only
//! recombined, and exponentiated, once the quotient is formed.

use crate::error::{Error, Result};
use crate::potential::{PeriodicPotential, StepMesh};
use crate::propagator::{IntervalKernel, StateFrame, Transfer};

/// Cells in the first mesh of a refinement ladder.
pub const DEFAULT_INITIAL_CELLS: usize = 16;
/// Bisections allowed after the first mesh.
pub const DEFAULT_MAX_REFINEMENTS: usize = 8;

const DEGENERATE_DELTA: f64 = 1e-290;

/// Per-λ sweep data: one kernel per cell and the match index.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub lambda: f64,
    pub kernels: Vec<IntervalKernel>,
    /// 1-based `M` in `1..=N+1`: cells `1..M` are swept forward, cells
    /// `M..=N` backward.
    pub match_index: usize,
}

/// Defect `|front(M) - total/2|` for each `M = 1..=N+1`, where `front(M)` is
/// the sum of `log σ_n` over `n < M`.
pub fn match_defects(log_sigma: &[f64]) -> Vec<f64> {
    let total: f64 = log_sigma.iter().sum();
    let half = 0.5 * total;
    let mut front = 0.0;
    let mut out = Vec::with_capacity(log_sigma.len() + 1);
    out.push((front - half).abs());
    for &s in log_sigma {
        front += s;
        out.push((front - half).abs());
    }
    out
}

/// Chooses the match index from the per-cell `log σ_n`.
///
/// The defect is minimized; among equal defects the first index whose front
/// sum reaches half the total wins, falling back to the first minimizer. With
/// no scaled cell at all the midpoint `⌈(N+1)/2⌉` is used.
pub fn choose_match_index(log_sigma: &[f64]) -> usize {
    let n = log_sigma.len();
    let total: f64 = log_sigma.iter().sum();
    if total == 0.0 {
        return (n + 2) / 2;
    }
    let defects = match_defects(log_sigma);
    let best = defects.iter().copied().fold(f64::INFINITY, f64::min);
    let half = 0.5 * total;
    let mut front = 0.0;
    let mut first_min = None;
    for (m, &d) in defects.iter().enumerate() {
        if m > 0 {
            front += log_sigma[m - 1];
        }
        if d == best {
            if front >= half {
                return m + 1;
            }
            first_min.get_or_insert(m + 1);
        }
    }
    first_min.unwrap_or(1)
}

impl SweepPlan {
    pub fn new(mesh: &StepMesh, lambda: f64) -> Self {
        let kernels: Vec<_> = mesh
            .cells()
            .map(|(h, q)| IntervalKernel::new(lambda, q, h))
            .collect();
        let log_sigma: Vec<f64> = kernels.iter().map(|k| k.log_sigma).collect();
        let match_index = choose_match_index(&log_sigma);
        SweepPlan {
            lambda,
            kernels,
            match_index,
        }
    }

    /// Same kernels with a caller-chosen match index.
    pub fn with_match_index(mut self, m: usize) -> Self {
        assert!(
            m >= 1 && m <= self.kernels.len() + 1,
            "match index out of range"
        );
        self.match_index = m;
        self
    }

    pub fn cells(&self) -> usize {
        self.kernels.len()
    }

    pub fn log_p_front(&self) -> f64 {
        self.kernels[..self.match_index - 1]
            .iter()
            .map(|k| k.log_sigma)
            .sum()
    }

    pub fn log_p_back(&self) -> f64 {
        self.kernels[self.match_index - 1..]
            .iter()
            .map(|k| k.log_sigma)
            .sum()
    }

    pub(crate) fn forward_cells(&self) -> &[IntervalKernel] {
        &self.kernels[..self.match_index - 1]
    }

    pub(crate) fn backward_cells(&self) -> &[IntervalKernel] {
        &self.kernels[self.match_index - 1..]
    }
}

/// `plan_sweep` for a mesh and λ.
pub fn plan_sweep(mesh: &StepMesh, lambda: f64) -> SweepPlan {
    SweepPlan::new(mesh, lambda)
}

/// Scaled forward and backward bases at `x_M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchFrames {
    pub u_front: StateFrame,
    pub v_front: StateFrame,
    pub u_back: StateFrame,
    pub v_back: StateFrame,
    pub log_p_front: f64,
    pub log_p_back: f64,
}

fn sweep_frames(plan: &SweepPlan) -> MatchFrames {
    let mut u_front = StateFrame::new(1.0, 0.0);
    let mut v_front = StateFrame::new(0.0, 1.0);
    for k in plan.forward_cells() {
        let a = k.scaled_forward();
        u_front.advance(&a, k.log_sigma);
        v_front.advance(&a, k.log_sigma);
        u_front.renormalize();
        v_front.renormalize();
    }
    let mut u_back = StateFrame::new(1.0, 0.0);
    let mut v_back = StateFrame::new(0.0, 1.0);
    for k in plan.backward_cells().iter().rev() {
        let b = k.scaled_backward();
        u_back.advance(&b, k.log_sigma);
        v_back.advance(&b, k.log_sigma);
        u_back.renormalize();
        v_back.renormalize();
    }
    MatchFrames {
        u_front,
        v_front,
        u_back,
        v_back,
        log_p_front: plan.log_p_front(),
        log_p_back: plan.log_p_back(),
    }
}

/// `c11, c12, c21, c22` (that is `u(ℓ), u'(ℓ), v(ℓ), v'(ℓ)`) of the step
/// approximation, with `log_zeta = log p(1, M-1) - log p(M, N)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MonodromyCoefficients {
    pub c11: f64,
    pub c12: f64,
    pub c21: f64,
    pub c22: f64,
    pub log_zeta: f64,
}

impl MonodromyCoefficients {
    pub fn from_transfer(t: &Transfer) -> Self {
        // columns of the monodromy are (u, u') and (v, v')
        MonodromyCoefficients {
            c11: t.a11,
            c12: t.a21,
            c21: t.a12,
            c22: t.a22,
            log_zeta: 0.0,
        }
    }

    /// `u(ℓ) + v'(ℓ)`.
    pub fn trace(&self) -> f64 {
        self.c11 + self.c22
    }

    pub fn det(&self) -> f64 {
        self.c11 * self.c22 - self.c12 * self.c21
    }

    /// `2 - |u(ℓ) + v'(ℓ)|`: positive in bands, negative in gaps.
    pub fn discriminant_defect(&self) -> f64 {
        2.0 - self.trace().abs()
    }

    pub fn is_finite(&self) -> bool {
        self.c11.is_finite() && self.c12.is_finite() && self.c21.is_finite() && self.c22.is_finite()
    }
}

/// Wronskian-type pairing `a.y b.y' - a.y' b.y` of two frames' stored parts.
fn pair(a: &StateFrame, b: &StateFrame) -> f64 {
    a.y * b.y_x - a.y_x * b.y
}

fn assemble(frames: &MatchFrames, lambda: f64) -> Result<MonodromyCoefficients> {
    let MatchFrames {
        u_front: uf,
        v_front: vf,
        u_back: ub,
        v_back: vb,
        ..
    } = frames;
    let delta = pair(ub, vb);
    if !(delta.abs() >= DEGENERATE_DELTA) {
        return Err(Error::DegenerateBasis { lambda, delta });
    }
    // Every cell matrix has unit determinant, so the unscaled backward
    // Wronskian is exactly 1 and the quotients reduce to rescaled pairings.
    // Dividing by the frame-computed Wronskian instead would cancel away
    // about 2·log p(M, N) / ln 10 digits.
    let c11 = pair(uf, vb) * (uf.log_scale + vb.log_scale).exp();
    let c12 = pair(ub, uf) * (ub.log_scale + uf.log_scale).exp();
    let c21 = pair(vf, vb) * (vf.log_scale + vb.log_scale).exp();
    let c22 = pair(ub, vf) * (ub.log_scale + vf.log_scale).exp();
    let coeffs = MonodromyCoefficients {
        c11,
        c12,
        c21,
        c22,
        log_zeta: frames.log_p_front - frames.log_p_back,
    };
    if coeffs.is_finite() {
        Ok(coeffs)
    } else {
        Err(Error::ScalingFault { lambda })
    }
}

/// Runs both scaled sweeps of `plan` and returns the match frames.
pub fn match_frames(plan: &SweepPlan) -> MatchFrames {
    sweep_frames(plan)
}

/// Monodromy coefficients of the step approximation described by `plan`.
pub fn double_shoot(plan: &SweepPlan) -> Result<MonodromyCoefficients> {
    assemble(&sweep_frames(plan), plan.lambda)
}

/// Unscaled forward-only shooting from `x = 0` to `x = ℓ`. Kept only to
/// reproduce its loss of accuracy when `λ < q` on part of the period.
pub fn simple_shoot(mesh: &StepMesh, lambda: f64) -> MonodromyCoefficients {
    let mut u = [1.0, 0.0];
    let mut v = [0.0, 1.0];
    for (h, q) in mesh.cells() {
        let a = crate::propagator::step_matrix(lambda - q, h);
        u = a.apply(u);
        v = a.apply(v);
    }
    MonodromyCoefficients {
        c11: u[0],
        c12: u[1],
        c21: v[0],
        c22: v[1],
        log_zeta: 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShootingMode {
    #[default]
    Double,
    Simple,
}

/// Quantities computed on a mesh whose discretization error expands in even
/// powers of the cell width, so that one Richardson step removes the `h²`
/// term.
pub trait Extrapolate: Sized {
    /// `(4·fine - coarse) / 3`, where `fine` used half the cell width.
    fn richardson(&self, coarse: &Self) -> Self;
}

impl Extrapolate for f64 {
    fn richardson(&self, coarse: &f64) -> f64 {
        (4.0 * self - coarse) / 3.0
    }
}

impl Extrapolate for MonodromyCoefficients {
    fn richardson(&self, coarse: &Self) -> Self {
        MonodromyCoefficients {
            c11: self.c11.richardson(&coarse.c11),
            c12: self.c12.richardson(&coarse.c12),
            c21: self.c21.richardson(&coarse.c21),
            c22: self.c22.richardson(&coarse.c22),
            log_zeta: self.log_zeta,
        }
    }
}

/// What a ladder compares between rungs.
pub trait LadderValue: Clone {
    /// Distance between two successive rungs.
    fn distance(&self, other: &Self) -> f64;
    /// Single number reported on non-convergence.
    fn headline(&self) -> f64;
}

impl LadderValue for f64 {
    fn distance(&self, other: &f64) -> f64 {
        (self - other).abs()
    }

    fn headline(&self) -> f64 {
        *self
    }
}

/// Componentwise: the largest absolute difference.
impl<const K: usize> LadderValue for [f64; K] {
    fn distance(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, |m, d| if d > m || d.is_nan() { d } else { m })
    }

    fn headline(&self) -> f64 {
        self.first().copied().unwrap_or(f64::NAN)
    }
}

/// Mesh-refinement ladder settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderConfig {
    pub initial_cells: usize,
    pub max_refinements: usize,
    pub mode: ShootingMode,
    /// Compare Richardson-extrapolated rungs instead of raw ones.
    pub extrapolate: bool,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            initial_cells: DEFAULT_INITIAL_CELLS,
            max_refinements: DEFAULT_MAX_REFINEMENTS,
            mode: ShootingMode::Double,
            extrapolate: true,
        }
    }
}

impl LadderConfig {
    pub fn simple_shooting() -> Self {
        LadderConfig {
            mode: ShootingMode::Simple,
            ..Self::default()
        }
    }

    pub fn coefficients(&self, mesh: &StepMesh, lambda: f64) -> Result<MonodromyCoefficients> {
        match self.mode {
            ShootingMode::Double => double_shoot(&SweepPlan::new(mesh, lambda)),
            ShootingMode::Simple => Ok(simple_shoot(mesh, lambda)),
        }
    }
}

/// Last rung of a ladder run.
#[derive(Debug, Clone)]
pub struct Ladder<T = MonodromyCoefficients, V = f64> {
    /// Estimate on the last rung, extrapolated when the config asks for it.
    pub estimate: T,
    /// Finest mesh used.
    pub mesh: StepMesh,
    /// Quantity of interest for `estimate`.
    pub value: V,
    /// `|value - previous value|`, infinite if there was nothing to compare.
    pub defect: f64,
    pub converged: bool,
}

impl<T, V: LadderValue> Ladder<T, V> {
    pub fn into_result(self, lambda: f64) -> Result<Ladder<T, V>> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence {
                lambda,
                best: self.value.headline(),
                defect: self.defect,
                mesh_n: self.mesh.len(),
            })
        }
    }
}

/// Refines the mesh by bisection until two successive values of `scalar`
/// are within `tol` of each other. `compute` produces the raw quantity on one
/// mesh. Never fails on non-convergence: the result says whether it
/// converged.
pub fn run_ladder_with<T, V, C, S>(
    potential: &PeriodicPotential,
    tol: f64,
    config: &LadderConfig,
    mut compute: C,
    mut scalar: S,
) -> Result<Ladder<T, V>>
where
    T: Extrapolate + Clone,
    V: LadderValue,
    C: FnMut(&StepMesh) -> Result<T>,
    S: FnMut(&T) -> Result<V>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut mesh = potential.base_mesh(config.initial_cells)?;
    let mut raw = compute(&mesh)?;
    // (estimate, value) of the previous rung, once one exists
    let mut last: Option<(T, V)> = if config.extrapolate {
        None
    } else {
        let v = scalar(&raw)?;
        Some((raw.clone(), v))
    };
    let mut defect = f64::INFINITY;
    for _ in 0..config.max_refinements {
        let next_mesh = mesh.refine(potential);
        let next_raw = compute(&next_mesh)?;
        let estimate = if config.extrapolate {
            next_raw.richardson(&raw)
        } else {
            next_raw.clone()
        };
        let value = scalar(&estimate)?;
        mesh = next_mesh;
        raw = next_raw;
        let done = match &last {
            Some((_, prev)) => {
                defect = value.distance(prev);
                defect <= tol
            }
            None => false,
        };
        last = Some((estimate, value));
        if done {
            break;
        }
    }
    let converged = defect <= tol;
    let (estimate, value) = match last {
        Some(pair) => pair,
        None => {
            // no refinement allowed: only the raw base rung exists
            let v = scalar(&raw)?;
            (raw, v)
        }
    };
    Ok(Ladder {
        estimate,
        mesh,
        value,
        defect,
        converged,
    })
}

/// [`run_ladder_with`] on the monodromy coefficients.
pub fn run_ladder<F>(
    potential: &PeriodicPotential,
    lambda: f64,
    tol: f64,
    config: &LadderConfig,
    scalar: F,
) -> Result<Ladder>
where
    F: FnMut(&MonodromyCoefficients) -> Result<f64>,
{
    run_ladder_with(
        potential,
        tol,
        config,
        |mesh| config.coefficients(mesh, lambda),
        scalar,
    )
}

/// Monodromy coefficients converged on the discriminant `c11 + c22`.
pub fn monodromy_at(
    potential: &PeriodicPotential,
    lambda: f64,
    tol: f64,
) -> Result<(MonodromyCoefficients, StepMesh)> {
    monodromy_with(potential, lambda, tol, &LadderConfig::default())
}

pub fn monodromy_with(
    potential: &PeriodicPotential,
    lambda: f64,
    tol: f64,
    config: &LadderConfig,
) -> Result<(MonodromyCoefficients, StepMesh)> {
    let ladder = run_ladder(potential, lambda, tol, config, |c| Ok(c.trace()))?;
    let ladder = ladder.into_result(lambda)?;
    Ok((ladder.estimate, ladder.mesh))
}
