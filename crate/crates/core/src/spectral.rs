//! Spectral density, discriminant and band/gap location.
//!
//! With the boundary condition `y(0) cos α + y'(0) sin α = 0` and `λ` inside
//! a stability interval the density is
//!
//! ```text
//! f(λ) = sqrt(4 - (c11 + c22)²) / (2π |c12 sin²α + (c11 - c22) sinα cosα - c21 cos²α|)
//! ```
//!
//! and it vanishes in the gaps, where `|c11 + c22| > 2`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle;
use crate::potential::PeriodicPotential;
use crate::shooting::{run_ladder, LadderConfig, MonodromyCoefficients};

/// Default number of scan points for [`find_bands`].
pub const DEFAULT_SCAN_POINTS: usize = 2000;

/// `|c21|` or `|c12|` at a converged edge below this marks it indeterminate.
pub const EDGE_CLASSIFY_TOL: f64 = 1e-6;

/// Defects above `-ZERO_DEFECT` count as inside a band. Touching points such
/// as the closed gaps of the free equation would otherwise split bands on
/// roundoff.
pub const ZERO_DEFECT: f64 = 1e-13;

/// Whether a discriminant defect `2 - |c11 + c22|` lies in a band.
pub fn in_band(g: f64) -> bool {
    g >= -ZERO_DEFECT
}

/// Boundary condition `y(0) cos α + y'(0) sin α = 0`, `α ∈ [0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    alpha: f64,
}

impl BoundaryCondition {
    pub fn new(alpha: f64) -> Result<Self> {
        if (0.0..PI).contains(&alpha) {
            Ok(BoundaryCondition { alpha })
        } else {
            Err(Error::InvalidArgument(format!(
                "alpha must lie in [0, pi), got {alpha}"
            )))
        }
    }

    /// `y(0) = 0`.
    pub fn dirichlet() -> Self {
        BoundaryCondition { alpha: 0.0 }
    }

    /// `y'(0) = 0`.
    pub fn neumann() -> Self {
        BoundaryCondition { alpha: FRAC_PI_2 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_dirichlet(&self) -> bool {
        self.alpha == 0.0
    }

    pub fn is_neumann(&self) -> bool {
        self.alpha == FRAC_PI_2
    }

    /// `(sin α, cos α)`, exact for the Dirichlet and Neumann cases.
    pub fn sin_cos(&self) -> (f64, f64) {
        if self.is_dirichlet() {
            (0.0, 1.0)
        } else if self.is_neumann() {
            (1.0, 0.0)
        } else {
            self.alpha.sin_cos()
        }
    }
}

/// One density estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub lambda: f64,
    pub f: f64,
    pub in_gap: bool,
    pub mesh_n: usize,
    pub converged: bool,
}

/// `sqrt(max(0, 4 - (c11 + c22)²))`.
pub fn density_numerator(c: &MonodromyCoefficients) -> f64 {
    (4.0 - c.trace() * c.trace()).max(0.0).sqrt()
}

/// `c12 sin²α + (c11 - c22) sinα cosα - c21 cos²α`.
pub fn density_denominator(c: &MonodromyCoefficients, bc: &BoundaryCondition) -> f64 {
    let (s, co) = bc.sin_cos();
    c.c12 * s * s + (c.c11 - c.c22) * s * co - c.c21 * co * co
}

/// Density from one set of coefficients, `0` in a gap.
pub fn density_from(c: &MonodromyCoefficients, bc: &BoundaryCondition) -> f64 {
    let num = density_numerator(c);
    if num == 0.0 {
        return 0.0;
    }
    num / (2.0 * PI * density_denominator(c, bc).abs())
}

/// Both parts of the density formula vanish, so its value carries no
/// information and the edge formulas must be used instead.
pub fn is_indeterminate(c: &MonodromyCoefficients, bc: &BoundaryCondition) -> bool {
    let num_sq = (4.0 - c.trace() * c.trace()).max(0.0);
    let den = density_denominator(c, bc).abs();
    num_sq <= 1e-10 && den <= 1e-6 * (1.0 + c.c11.abs() + c.c22.abs())
}

/// Density estimate converged on the mesh ladder.
///
/// A point that does not converge within the allowed refinements is still
/// returned, with `converged == false` and the last estimate as `f`.
pub fn density(
    potential: &PeriodicPotential,
    bc: &BoundaryCondition,
    lambda: f64,
    tol: f64,
) -> Result<DensityPoint> {
    density_with(potential, bc, lambda, tol, &LadderConfig::default())
}

pub fn density_with(
    potential: &PeriodicPotential,
    bc: &BoundaryCondition,
    lambda: f64,
    tol: f64,
    config: &LadderConfig,
) -> Result<DensityPoint> {
    let ladder = run_ladder(potential, lambda, tol, config, |c| Ok(density_from(c, bc)))?;
    let c = &ladder.estimate;
    if is_indeterminate(c, bc) {
        let f = coexistence_limit(potential, bc, lambda, tol)?;
        return Ok(DensityPoint {
            lambda,
            f,
            in_gap: false,
            mesh_n: ladder.mesh.len(),
            converged: ladder.converged,
        });
    }
    let in_gap = density_numerator(c) == 0.0;
    Ok(DensityPoint {
        lambda,
        f: if in_gap { 0.0 } else { ladder.value },
        in_gap,
        mesh_n: ladder.mesh.len(),
        converged: ladder.converged,
    })
}

/// Whether the monodromy is `±I` to within `eps`, i.e. `λ` sits in a
/// closed gap where both periodic solutions coexist.
pub fn is_coexistence(c: &MonodromyCoefficients, eps: f64) -> bool {
    let scale = 1.0 + c.c11.abs() + c.c22.abs();
    c.c12.abs().max(c.c21.abs()).max((c.c11 - c.c22).abs()) <= eps * scale
}

/// Density at a closed gap, where the clamped formula is `0/0`.
///
/// With `M(λ) = ±I + A δ + O(δ²)` and `det M = 1`, `tr A = 0` and
/// `4 - tr² = 4 |det A| δ² + O(δ³)`, so the limit needs only `A = ∂M/∂λ`:
/// `f = sqrt|det A| / (π |A12 s² + (A11 - A22) s c - A21 c²|)`.
/// A genuine open-gap edge, where `f` blows up, is reported as
/// [`Error::Indeterminate`].
pub fn coexistence_limit(
    potential: &PeriodicPotential,
    bc: &BoundaryCondition,
    lambda: f64,
    tol: f64,
) -> Result<f64> {
    let (c, d) = crate::variational::variational_monodromy(potential, lambda, tol)?;
    if !is_coexistence(&c, 1e-6) {
        return Err(Error::Indeterminate { lambda });
    }
    let a = MonodromyCoefficients {
        c11: d.u_l,
        c12: d.u_xl,
        c21: d.v_l,
        c22: d.v_xl,
        log_zeta: 0.0,
    };
    let den = density_denominator(&a, bc).abs();
    let det = a.det();
    if !(den > 0.0) || !(det > 0.0) {
        return Err(Error::Indeterminate { lambda });
    }
    Ok(det.sqrt() / (PI * den))
}

/// Densities at many points, computed in parallel and returned in input
/// order.
pub fn density_curve(
    potential: &PeriodicPotential,
    bc: &BoundaryCondition,
    lambdas: &[f64],
    tol: f64,
) -> Vec<Result<DensityPoint>> {
    lambdas
        .par_iter()
        .map(|&l| density(potential, bc, l, tol))
        .collect()
}

/// Monodromy coefficients converged on the discriminant `c11 + c22`.
///
/// Unlike [`crate::shooting::monodromy_at`] this returns the last estimate
/// even without convergence; the flag says which.
pub fn discriminant_coefficients(
    potential: &PeriodicPotential,
    lambda: f64,
    tol: f64,
) -> Result<(MonodromyCoefficients, bool)> {
    let ladder = run_ladder(potential, lambda, tol, &LadderConfig::default(), |c| {
        Ok(c.trace())
    })?;
    Ok((ladder.estimate, ladder.converged))
}

/// `2 - |c11 + c22|`: positive in bands, negative in gaps, zero at edges.
pub fn discriminant_defect(potential: &PeriodicPotential, lambda: f64, tol: f64) -> Result<f64> {
    let ladder = run_ladder(potential, lambda, tol, &LadderConfig::default(), |c| {
        Ok(c.trace())
    })?;
    Ok(ladder.into_result(lambda)?.estimate.discriminant_defect())
}

/// How a band edge relates to the density formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeTag {
    /// The density formula stays determinate for every `α`.
    Regular,
    /// `v(ℓ) = 0` at the edge: the Dirichlet density is `0/0`.
    DirichletIndeterminate,
    /// `u'(ℓ) = 0` at the edge: the Neumann density is `0/0`.
    NeumannIndeterminate,
    /// Not an edge at all: the band continues past the scanned range.
    RangeLimit,
}

impl EdgeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeTag::Regular => "regular",
            EdgeTag::DirichletIndeterminate => "dirichlet_indeterminate",
            EdgeTag::NeumannIndeterminate => "neumann_indeterminate",
            EdgeTag::RangeLimit => "range_limit",
        }
    }

    /// Classifies an edge from the coefficients there.
    pub fn classify(c: &MonodromyCoefficients) -> EdgeTag {
        let d = c.c21.abs();
        let n = c.c12.abs();
        match (d <= EDGE_CLASSIFY_TOL, n <= EDGE_CLASSIFY_TOL) {
            (true, true) if n < d => EdgeTag::NeumannIndeterminate,
            (true, _) => EdgeTag::DirichletIndeterminate,
            (false, true) => EdgeTag::NeumannIndeterminate,
            (false, false) => EdgeTag::Regular,
        }
    }
}

/// One stability interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub left: f64,
    pub right: f64,
    pub left_tag: EdgeTag,
    pub right_tag: EdgeTag,
}

/// Stability intervals found in a range, in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandChart {
    pub range: (f64, f64),
    pub bands: Vec<Band>,
}

impl BandChart {
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.bands.iter().map(|b| (b.left, b.right)).collect()
    }

    /// Gaps between consecutive bands.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.bands
            .windows(2)
            .map(|w| (w[0].right, w[1].left))
            .collect()
    }

    pub fn edge_tags(&self) -> Vec<EdgeTag> {
        self.bands
            .iter()
            .flat_map(|b| [b.left_tag, b.right_tag])
            .collect()
    }
}

/// Tolerances and scan density for [`find_bands`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSearch {
    pub scan_points: usize,
    /// Final width of every edge bracket.
    pub edge_tol: f64,
    /// Ladder tolerance on the discriminant.
    pub tol: f64,
}

impl Default for BandSearch {
    fn default() -> Self {
        BandSearch {
            scan_points: DEFAULT_SCAN_POINTS,
            edge_tol: 1e-9,
            tol: 1e-12,
        }
    }
}

fn defect_at(potential: &PeriodicPotential, lambda: f64, tol: f64) -> Result<f64> {
    discriminant_coefficients(potential, lambda, tol).map(|(c, _)| c.discriminant_defect())
}

/// Bisects between a point inside a band and one inside a gap (in either
/// order) down to width `edge_tol`. Returns the midpoint of the last
/// bracket.
pub fn bisect_edge(
    potential: &PeriodicPotential,
    band_side: f64,
    gap_side: f64,
    edge_tol: f64,
    tol: f64,
) -> Result<f64> {
    let (mut inside, mut outside) = (band_side, gap_side);
    while (outside - inside).abs() > edge_tol {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if in_band(defect_at(potential, mid, tol)?) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

/// Golden-section search for a minimum of `g` on `[a, b]`.
pub(crate) fn golden_min<G>(mut g: G, mut a: f64, mut b: f64, width: f64) -> Result<(f64, f64)>
where
    G: FnMut(f64) -> Result<f64>,
{
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut g1 = g(x1)?;
    let mut g2 = g(x2)?;
    while b - a > width {
        if g1 <= g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - r * (b - a);
            g1 = g(x1)?;
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + r * (b - a);
            g2 = g(x2)?;
        }
    }
    Ok(if g1 <= g2 { (x1, g1) } else { (x2, g2) })
}

/// Locates the stability intervals of `potential` inside `range`.
///
/// The discriminant defect is scanned on a uniform grid, every sign change
/// is bisected, and every local minimum that stays positive on the grid is
/// searched for a gap too narrow for the grid to see. A local maximum that
/// stays negative is searched for a hidden band in the same way.
pub fn find_bands(
    potential: &PeriodicPotential,
    range: (f64, f64),
    search: &BandSearch,
) -> Result<BandChart> {
    let (lo, hi) = range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}]")));
    }
    if search.scan_points < 2 {
        return Err(Error::InvalidArgument(
            "at least two scan points are needed".into(),
        ));
    }
    if !(search.edge_tol > 0.0) {
        return Err(Error::InvalidArgument(
            "edge tolerance must be positive".into(),
        ));
    }
    let n = search.scan_points;
    let tol = search.tol;
    let grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let g: Vec<f64> = grid
        .par_iter()
        .map(|&l| defect_at(potential, l, tol))
        .collect::<Result<_>>()?;

    // crossings as (lambda, entering_band)
    let mut crossings: Vec<(usize, bool)> = Vec::new();
    let mut hidden: Vec<usize> = Vec::new();
    for i in 0..n - 1 {
        let (a, b) = (in_band(g[i]), in_band(g[i + 1]));
        if a != b {
            crossings.push((i, b));
        }
        if i > 0 {
            let (p, c, nx) = (g[i - 1], g[i], g[i + 1]);
            let dip = in_band(c) && in_band(p) && in_band(nx) && c < p && c <= nx;
            let bump = !in_band(c) && !in_band(p) && !in_band(nx) && c > p && c >= nx;
            if dip || bump {
                hidden.push(i);
            }
        }
    }

    let edges: Vec<(f64, bool)> = crossings
        .par_iter()
        .map(|&(i, entering)| {
            let (band_side, gap_side) = if entering {
                (grid[i + 1], grid[i])
            } else {
                (grid[i], grid[i + 1])
            };
            bisect_edge(potential, band_side, gap_side, search.edge_tol, tol).map(|e| (e, entering))
        })
        .collect::<Result<_>>()?;

    let extra: Vec<Vec<(f64, bool)>> = hidden
        .par_iter()
        .map(|&i| {
            let (a, b) = (grid[i - 1], grid[i + 1]);
            let is_dip = in_band(g[i]);
            let sign = if is_dip { 1.0 } else { -1.0 };
            let (x, gx) = golden_min(
                |l| defect_at(potential, l, tol).map(|v| sign * v),
                a,
                b,
                search.edge_tol,
            )?;
            // A tangency reaches zero only to within the ladder's own error,
            // so the dip must be deeper than that error to count.
            let check = run_ladder(potential, x, tol, &LadderConfig::default(), |c| {
                Ok(c.trace())
            })?;
            if sign * gx > -ZERO_DEFECT.max(check.defect) {
                return Ok(Vec::new());
            }
            // the interior point x lies in a hidden gap (dip) or band (bump)
            let (l_edge, r_edge) = if is_dip {
                (
                    bisect_edge(potential, a, x, search.edge_tol, tol)?,
                    bisect_edge(potential, b, x, search.edge_tol, tol)?,
                )
            } else {
                (
                    bisect_edge(potential, x, a, search.edge_tol, tol)?,
                    bisect_edge(potential, x, b, search.edge_tol, tol)?,
                )
            };
            Ok(vec![(l_edge, !is_dip), (r_edge, is_dip)])
        })
        .collect::<Result<_>>()?;

    let mut all: Vec<(f64, bool)> = edges
        .into_iter()
        .chain(extra.into_iter().flatten())
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    let tags: Vec<EdgeTag> = all
        .par_iter()
        .map(|&(l, _)| {
            discriminant_coefficients(potential, l, tol).map(|(c, _)| EdgeTag::classify(&c))
        })
        .collect::<Result<_>>()?;

    let mut bands = Vec::new();
    let mut open: Option<(f64, EdgeTag)> = if in_band(g[0]) {
        Some((lo, EdgeTag::RangeLimit))
    } else {
        None
    };
    for (&(l, entering), &tag) in all.iter().zip(&tags) {
        if entering {
            open = Some((l, tag));
        } else if let Some((left, left_tag)) = open.take() {
            if l > left {
                bands.push(Band {
                    left,
                    right: l,
                    left_tag,
                    right_tag: tag,
                });
            }
        }
    }
    if let Some((left, left_tag)) = open {
        if hi > left {
            bands.push(Band {
                left,
                right: hi,
                left_tag,
                right_tag: EdgeTag::RangeLimit,
            });
        }
    }
    Ok(BandChart { range, bands })
}

/// Normalized coefficients `(a, b, c)` of the periodic quadratic form, with
/// `4ac - b² = 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppellCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl AppellCoefficients {
    /// `4ac - b²`, which is 4 for a correctly normalized triple.
    pub fn invariant(&self) -> f64 {
        4.0 * self.a * self.c - self.b * self.b
    }
}

/// `(a, b, c) = (-2 c21, 2 (c11 - c22), 2 c12) / sqrt(4 - (c11 + c22)²)`.
pub fn appell_coefficients(c: &MonodromyCoefficients, lambda: f64) -> Result<AppellCoefficients> {
    let d = 4.0 - c.trace() * c.trace();
    if !(d > 0.0) {
        return Err(Error::OutOfBand { lambda });
    }
    let s = d.sqrt();
    Ok(AppellCoefficients {
        a: -2.0 * c.c21 / s,
        b: 2.0 * (c.c11 - c.c22) / s,
        c: 2.0 * c.c12 / s,
    })
}

/// `1 / (π |c sin²α + b sinα cosα + a cos²α|)`.
pub fn density_via_f1(
    coef: &AppellCoefficients,
    bc: &BoundaryCondition,
    lambda: f64,
) -> Result<f64> {
    let (s, co) = bc.sin_cos();
    let den = coef.c * s * s + coef.b * s * co + coef.a * co * co;
    if den == 0.0 || !den.is_finite() {
        return Err(Error::Indeterminate { lambda });
    }
    Ok(1.0 / (PI * den.abs()))
}

/// Largest `|Φ(x + ℓ) - Φ(x)|` over `xs`, where
/// `Φ(x) = v(ℓ) u(x)² - (u(ℓ) - v'(ℓ)) u(x) v(x) - u'(ℓ) v(x)²`
/// is evaluated with the reference integrator.
pub fn phi_form_check(potential: &PeriodicPotential, lambda: f64, xs: &[f64]) -> Result<f64> {
    const RTOL: f64 = 1e-12;
    let period = oracle::integrate_reference(potential, lambda, RTOL)?;
    let d = 4.0 - period.discriminant().powi(2);
    if !(d > 0.0) {
        return Err(Error::OutOfBand { lambda });
    }
    let phi = |s: [f64; 4]| {
        let (u, v) = (s[0], s[2]);
        period.v * u * u - (period.u - period.v_x) * u * v - period.u_x * v * v
    };
    let mut worst: f64 = 0.0;
    for &x in xs {
        let here = oracle::integrate_to(potential, lambda, x, RTOL)?;
        let there = oracle::integrate_to(potential, lambda, x + potential.period(), RTOL)?;
        worst = worst.max((phi(there) - phi(here)).abs());
    }
    Ok(worst)
}
