//! Exact propagation of `(y, y')` across one constant-potential cell.
//!
//! On a cell of width `h` where `q` is the constant `q_n`, the solution of
//! `-y'' + q_n y = λ y` is a combination of `φ(t)` and `φ'(t)` with
//! `τ = λ - q_n`: circular functions for `τ > 0`, hyperbolic ones for `τ < 0`.
//! When `|τ| h²` is small the closed forms lose accuracy and a Taylor series
//! in `τ t²` is used instead.

/// `|τ| t²` below this uses the series branch.
pub const SERIES_THRESHOLD: f64 = 1e-2;

/// Relative `τ` below which a cell is not scaled.
const SCALE_EPSILON: f64 = 1e-12;

// 1/(2k+1)! and 1/(2k)! for k = 0..=6
const INV_ODD_FACT: [f64; 7] = [
    1.0,
    1.0 / 6.0,
    1.0 / 120.0,
    1.0 / 5040.0,
    1.0 / 362_880.0,
    1.0 / 39_916_800.0,
    1.0 / 6_227_020_800.0,
];
const INV_EVEN_FACT: [f64; 7] = [
    1.0,
    1.0 / 2.0,
    1.0 / 24.0,
    1.0 / 720.0,
    1.0 / 40_320.0,
    1.0 / 3_628_800.0,
    1.0 / 479_001_600.0,
];

fn horner(coeffs: impl DoubleEndedIterator<Item = f64>, z: f64) -> f64 {
    coeffs.rev().fold(0.0, |acc, c| acc * z + c)
}

/// `(φ(t), φ'(t))` for the cell equation with `τ = λ - q`.
pub fn phi_pair(tau: f64, t: f64) -> (f64, f64) {
    let z = tau * t * t;
    if z.abs() < SERIES_THRESHOLD {
        // φ = t Σ (-z)^k/(2k+1)!,  φ' = Σ (-z)^k/(2k)!
        let phi = t * horner(INV_ODD_FACT.iter().copied(), -z);
        let phi_x = horner(INV_EVEN_FACT.iter().copied(), -z);
        (phi, phi_x)
    } else if tau > 0.0 {
        let w = tau.sqrt();
        let (s, c) = (w * t).sin_cos();
        (s / w, c)
    } else {
        let w = (-tau).sqrt();
        ((w * t).sinh() / w, (w * t).cosh())
    }
}

/// `∂φ/∂λ` at `t`, given `φ(t)` and `φ'(t)`.
///
/// Equal to `(t φ' - φ) / (2τ)`; near `τ = 0` the quotient cancels, so the
/// series branch differentiates the series term by term instead.
pub fn phi_lambda(tau: f64, t: f64, phi: f64, phi_x: f64) -> f64 {
    let z = tau * t * t;
    if z.abs() < SERIES_THRESHOLD {
        // ∂φ/∂τ = t³ Σ_{k≥1} k (-1)^k z^{k-1} / (2k+1)!
        let s = horner(
            (1..INV_ODD_FACT.len()).map(|k| -(k as f64) * INV_ODD_FACT[k]),
            -z,
        );
        t * t * t * s
    } else {
        (t * phi_x - phi) / (2.0 * tau)
    }
}

/// A real 2×2 matrix acting on `(y, y')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Transfer {
    pub const IDENTITY: Transfer = Transfer {
        a11: 1.0,
        a12: 0.0,
        a21: 0.0,
        a22: 1.0,
    };

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Transfer { a11, a12, a21, a22 }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn mul(&self, rhs: &Transfer) -> Transfer {
        Transfer {
            a11: self.a11 * rhs.a11 + self.a12 * rhs.a21,
            a12: self.a11 * rhs.a12 + self.a12 * rhs.a22,
            a21: self.a21 * rhs.a11 + self.a22 * rhs.a21,
            a22: self.a21 * rhs.a12 + self.a22 * rhs.a22,
        }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn scale(&self, s: f64) -> Transfer {
        Transfer::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn max_abs_diff(&self, other: &Transfer) -> f64 {
        [
            self.a11 - other.a11,
            self.a12 - other.a12,
            self.a21 - other.a21,
            self.a22 - other.a22,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }
}

fn forward_from(tau: f64, phi: f64, phi_x: f64) -> Transfer {
    Transfer::new(phi_x, phi, -tau * phi, phi_x)
}

fn backward_from(tau: f64, phi: f64, phi_x: f64) -> Transfer {
    Transfer::new(phi_x, -phi, tau * phi, phi_x)
}

fn lambda_from(h: f64, phi: f64, phi_x: f64, phi_l: f64) -> Transfer {
    let d = -0.5 * h * phi;
    Transfer::new(d, phi_l, -0.5 * (phi + h * phi_x), d)
}

/// Cell propagator `A` mapping `(y, y')(x_n)` to `(y, y')(x_n + h)`.
pub fn step_matrix(tau: f64, h: f64) -> Transfer {
    let (phi, phi_x) = phi_pair(tau, h);
    forward_from(tau, phi, phi_x)
}

/// `A⁻¹`, which propagates from the right end of the cell to the left.
pub fn step_matrix_inverse(tau: f64, h: f64) -> Transfer {
    let (phi, phi_x) = phi_pair(tau, h);
    backward_from(tau, phi, phi_x)
}

/// `∂A/∂λ`.
pub fn step_matrix_lambda(tau: f64, h: f64) -> Transfer {
    let (phi, phi_x) = phi_pair(tau, h);
    lambda_from(h, phi, phi_x, phi_lambda(tau, h, phi, phi_x))
}

/// Precomputed propagation data for one cell at a fixed λ.
///
/// The `scaled_*` fields are divided by `σ = exp(ω h)` when the cell is
/// hyperbolic enough to be scaled and equal the plain values otherwise; they
/// stay finite even when `ω h` is far beyond the range of `exp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalKernel {
    pub tau: f64,
    pub omega: f64,
    pub h: f64,
    /// `ω h` if the cell is scaled, else 0.
    pub log_sigma: f64,
    pub scaled_phi: f64,
    pub scaled_phi_x: f64,
    pub scaled_phi_lambda: f64,
}

impl IntervalKernel {
    pub fn new(lambda: f64, q: f64, h: f64) -> Self {
        let tau = lambda - q;
        let omega = tau.abs().sqrt();
        let eps = SCALE_EPSILON * lambda.abs().max(1.0);
        let scaled = tau < -eps;
        let log_sigma = if scaled { omega * h } else { 0.0 };
        let z = tau * h * h;

        let (phi, phi_x, phi_l) = if scaled && z.abs() >= SERIES_THRESHOLD {
            // sinh(ωh)/e^{ωh} and cosh(ωh)/e^{ωh} without forming either
            let e = (-2.0 * omega * h).exp();
            let m = -(-2.0 * omega * h).exp_m1();
            let phi = m / (2.0 * omega);
            let phi_x = 0.5 * (1.0 + e);
            (phi, phi_x, (h * phi_x - phi) / (2.0 * tau))
        } else {
            let (phi, phi_x) = phi_pair(tau, h);
            let phi_l = phi_lambda(tau, h, phi, phi_x);
            if scaled {
                let inv = (-log_sigma).exp();
                (phi * inv, phi_x * inv, phi_l * inv)
            } else {
                (phi, phi_x, phi_l)
            }
        };

        IntervalKernel {
            tau,
            omega,
            h,
            log_sigma,
            scaled_phi: phi,
            scaled_phi_x: phi_x,
            scaled_phi_lambda: phi_l,
        }
    }

    pub fn is_scaled(&self) -> bool {
        self.log_sigma > 0.0
    }

    pub fn sigma(&self) -> f64 {
        self.log_sigma.exp()
    }

    /// Unscaled `φ(h)`; overflows to infinity for very large `ω h`.
    pub fn phi(&self) -> f64 {
        self.scaled_phi * self.sigma()
    }

    pub fn phi_x(&self) -> f64 {
        self.scaled_phi_x * self.sigma()
    }

    /// `A / σ`.
    pub fn scaled_forward(&self) -> Transfer {
        forward_from(self.tau, self.scaled_phi, self.scaled_phi_x)
    }

    /// `A⁻¹ / σ`.
    pub fn scaled_backward(&self) -> Transfer {
        backward_from(self.tau, self.scaled_phi, self.scaled_phi_x)
    }

    /// `(∂A/∂λ) / σ`, with σ held fixed.
    pub fn scaled_forward_lambda(&self) -> Transfer {
        lambda_from(
            self.h,
            self.scaled_phi,
            self.scaled_phi_x,
            self.scaled_phi_lambda,
        )
    }

    /// `(∂A⁻¹/∂λ) / σ`, with σ held fixed.
    pub fn scaled_backward_lambda(&self) -> Transfer {
        let f = self.scaled_forward_lambda();
        Transfer::new(f.a11, -f.a12, -f.a21, f.a22)
    }

    /// `h / (2ω)` for scaled cells: `-∂ log σ / ∂λ`.
    pub fn log_sigma_rate(&self) -> f64 {
        if self.is_scaled() {
            self.h / (2.0 * self.omega)
        } else {
            0.0
        }
    }
}

/// `(y, y')` with an external scale: the represented value is
/// `(y, y') · exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateFrame {
    pub y: f64,
    pub y_x: f64,
    pub log_scale: f64,
}

/// Magnitude beyond which frames are renormalized into `log_scale`.
pub const RENORMALIZE_ABOVE: f64 = 1e150;

/// Largest power of two not above `m` (for finite `m >= 1`). Dividing by it
/// is exact, and it is locally constant in any parameter `m` depends on.
pub fn power_of_two_below(m: f64) -> f64 {
    2f64.powi(m.log2().floor() as i32)
}

impl StateFrame {
    pub fn new(y: f64, y_x: f64) -> Self {
        StateFrame {
            y,
            y_x,
            log_scale: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.y, self.y_x]
    }

    pub fn max_abs(&self) -> f64 {
        self.y.abs().max(self.y_x.abs())
    }

    /// Applies `m` and adds `log_factor` to the external scale.
    pub fn advance(&mut self, m: &Transfer, log_factor: f64) {
        let [y, y_x] = m.apply([self.y, self.y_x]);
        self.y = y;
        self.y_x = y_x;
        self.log_scale += log_factor;
    }

    /// Moves the magnitude into `log_scale` once it exceeds the bound; returns
    /// the factor the components were divided by (1 if untouched).
    pub fn renormalize(&mut self) -> f64 {
        let m = self.max_abs();
        if m > RENORMALIZE_ABOVE && m.is_finite() {
            let f = power_of_two_below(m);
            self.y /= f;
            self.y_x /= f;
            self.log_scale += f.ln();
            f
        } else {
            1.0
        }
    }

    /// The represented value; may overflow.
    pub fn value(&self) -> [f64; 2] {
        let s = self.log_scale.exp();
        [self.y * s, self.y_x * s]
    }
}
