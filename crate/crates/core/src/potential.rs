//! Periodic potentials and their step-function discretizations.
//!
//! A [`PeriodicPotential`] is either one of the builtin closed forms, a
//! constant, an explicit step function read from a file, or an arbitrary
//! closure. [`StepMesh`] replaces it by a piecewise-constant function sampled
//! at subinterval midpoints.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The builtin example potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    /// `cos x`, period 2π.
    Mathieu,
    /// `3 / (2 + sin x)`, period 2π.
    Ex2,
    /// `1 / sqrt(1 - 0.75 sin² x)`, period π.
    Ex3,
    /// `(0.5 + cos x + cos 2x + cos 3x) / π`, period 2π.
    Ex4,
    /// `sin x + 0.5 sin 2x + 0.1 sin 3x`, period 2π.
    Ex5,
}

impl Builtin {
    pub const ALL: [Builtin; 5] = [
        Builtin::Mathieu,
        Builtin::Ex2,
        Builtin::Ex3,
        Builtin::Ex4,
        Builtin::Ex5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Mathieu => "mathieu",
            Builtin::Ex2 => "ex2",
            Builtin::Ex3 => "ex3",
            Builtin::Ex4 => "ex4",
            Builtin::Ex5 => "ex5",
        }
    }

    pub fn period(self) -> f64 {
        match self {
            Builtin::Ex3 => PI,
            _ => 2.0 * PI,
        }
    }

    /// Whether `q(ℓ - x) = q(x)`.
    pub fn is_even(self) -> bool {
        matches!(self, Builtin::Mathieu | Builtin::Ex3 | Builtin::Ex4)
    }

    fn eval(self, x: f64) -> f64 {
        match self {
            Builtin::Mathieu => x.cos(),
            Builtin::Ex2 => 3.0 / (2.0 + x.sin()),
            Builtin::Ex3 => {
                let s = x.sin();
                1.0 / (1.0 - 0.75 * s * s).sqrt()
            }
            Builtin::Ex4 => (0.5 + x.cos() + (2.0 * x).cos() + (3.0 * x).cos()) / PI,
            Builtin::Ex5 => x.sin() + 0.5 * (2.0 * x).sin() + 0.1 * (3.0 * x).sin(),
        }
    }
}

impl std::str::FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::NotFound(s.to_string()))
    }
}

#[derive(Clone)]
enum Profile {
    Builtin(Builtin),
    Constant(f64),
    Step {
        breakpoints: Arc<[f64]>,
        values: Arc<[f64]>,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A real potential `q` of period `ℓ`.
#[derive(Clone)]
pub struct PeriodicPotential {
    name: String,
    period: f64,
    profile: Profile,
}

impl fmt::Debug for PeriodicPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicPotential")
            .field("name", &self.name)
            .field("period", &self.period)
            .finish_non_exhaustive()
    }
}

/// On-disk form of a user step potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub period: f64,
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

fn check_period(period: f64) -> Result<()> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "period must be positive and finite, got {period}"
        )))
    }
}

impl PeriodicPotential {
    pub fn builtin(name: &str) -> Result<Self> {
        Ok(Self::from_builtin(name.parse()?))
    }

    pub fn from_builtin(b: Builtin) -> Self {
        PeriodicPotential {
            name: b.name().to_string(),
            period: b.period(),
            profile: Profile::Builtin(b),
        }
    }

    pub fn constant(value: f64, period: f64) -> Result<Self> {
        check_period(period)?;
        Ok(PeriodicPotential {
            name: format!("constant({value})"),
            period,
            profile: Profile::Constant(value),
        })
    }

    /// The free equation `q ≡ 0`.
    pub fn free(period: f64) -> Result<Self> {
        let mut p = Self::constant(0.0, period)?;
        p.name = "free".to_string();
        Ok(p)
    }

    /// Wraps an arbitrary function, which is sampled only on `[0, period)`.
    pub fn from_fn<F>(name: impl Into<String>, period: f64, q: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_period(period)?;
        Ok(PeriodicPotential {
            name: name.into(),
            period,
            profile: Profile::Custom(Arc::new(q)),
        })
    }

    /// An explicit step function: `values[n]` holds on
    /// `[breakpoints[n], breakpoints[n + 1])`. The first breakpoint must be 0
    /// and the last one the period.
    pub fn step(
        name: impl Into<String>,
        period: f64,
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_period(period)?;
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::Parse(format!(
                "expected len(breakpoints) = len(values) + 1 >= 2, got {} and {}",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::Parse("first breakpoint must be 0".into()));
        }
        let last = *breakpoints.last().unwrap();
        if (last - period).abs() > 4.0 * breakpoints.len() as f64 * f64::EPSILON * period {
            return Err(Error::Parse(format!(
                "last breakpoint {last} does not match period {period}"
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parse(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("values must be finite".into()));
        }
        let mut breakpoints = breakpoints;
        *breakpoints.last_mut().unwrap() = period;
        Ok(PeriodicPotential {
            name: name.into(),
            period,
            profile: Profile::Step {
                breakpoints: breakpoints.into(),
                values: values.into(),
            },
        })
    }

    pub fn from_file_spec(spec: PotentialFile) -> Result<Self> {
        let name = spec.name.unwrap_or_else(|| "step".to_string());
        Self::step(name, spec.period, spec.breakpoints, spec.values)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: PotentialFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file_spec(spec)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// A builtin name, or otherwise a path to a potential file.
    pub fn resolve(spec: &str) -> Result<Self> {
        match spec.parse::<Builtin>() {
            Ok(b) => Ok(Self::from_builtin(b)),
            Err(not_found) => {
                if Path::new(spec).exists() {
                    Self::from_json_file(spec)
                } else {
                    Err(not_found)
                }
            }
        }
    }

    /// The same function viewed as having period `k ℓ`. The monodromy over
    /// `k ℓ` is the `k`-th power of the one over `ℓ`, so the spectrum is
    /// unchanged but the basis `{u, v}` is sampled further out.
    pub fn repeated(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("repeat count must be >= 1".into()));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let name = format!("{}x{k}", self.name);
        let period = self.period * k as f64;
        if let Profile::Step {
            breakpoints,
            values,
        } = &self.profile
        {
            let mut bps = vec![0.0];
            let mut vals = Vec::with_capacity(values.len() * k);
            for j in 0..k {
                let shift = j as f64 * self.period;
                bps.extend(breakpoints[1..].iter().map(|b| b + shift));
                vals.extend_from_slice(values);
            }
            return Self::step(name, period, bps, vals);
        }
        let inner = self.clone();
        Self::from_fn(name, period, move |x| inner.evaluate(x))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn as_builtin(&self) -> Option<Builtin> {
        match self.profile {
            Profile::Builtin(b) => Some(b),
            _ => None,
        }
    }

    /// True for potentials known to satisfy `q(ℓ - x) = q(x)`.
    pub fn is_even(&self) -> bool {
        match &self.profile {
            Profile::Builtin(b) => b.is_even(),
            Profile::Constant(_) => true,
            _ => false,
        }
    }

    /// Native breakpoints of a step potential.
    pub fn step_breakpoints(&self) -> Option<&[f64]> {
        match &self.profile {
            Profile::Step { breakpoints, .. } => Some(breakpoints),
            _ => None,
        }
    }

    /// `q(x)`, with `x` reduced modulo the period first.
    pub fn evaluate(&self, x: f64) -> f64 {
        let x = if (0.0..self.period).contains(&x) {
            x
        } else {
            x.rem_euclid(self.period)
        };
        match &self.profile {
            Profile::Builtin(b) => b.eval(x),
            Profile::Constant(c) => *c,
            Profile::Custom(f) => f(x),
            Profile::Step {
                breakpoints,
                values,
            } => {
                // index of the last breakpoint <= x
                let idx = breakpoints.partition_point(|&b| b <= x);
                values[idx.saturating_sub(1).min(values.len() - 1)]
            }
        }
    }

    /// The mesh a refinement ladder starts from. Step potentials use their own
    /// breakpoints so that the approximation is exact from the start.
    pub fn base_mesh(&self, n0: usize) -> Result<StepMesh> {
        match &self.profile {
            Profile::Step { breakpoints, .. } => {
                StepMesh::with_breakpoints(self, breakpoints.to_vec())
            }
            _ => StepMesh::discretize(self, n0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MeshKind {
    Uniform(usize),
    Custom,
}

/// A partition of `[0, ℓ]` with one potential value per subinterval.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMesh {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    kind: MeshKind,
}

fn uniform_breakpoints(period: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| (i as f64 / n as f64) * period).collect()
}

fn sample_midpoints(p: &PeriodicPotential, breakpoints: &[f64]) -> Vec<f64> {
    breakpoints
        .windows(2)
        .map(|w| p.evaluate(0.5 * (w[0] + w[1])))
        .collect()
}

impl StepMesh {
    /// Uniform mesh of `n` subintervals with midpoint sampling.
    pub fn discretize(p: &PeriodicPotential, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "mesh needs at least one interval".into(),
            ));
        }
        let breakpoints = uniform_breakpoints(p.period(), n);
        let values = sample_midpoints(p, &breakpoints);
        Ok(StepMesh {
            breakpoints,
            values,
            kind: MeshKind::Uniform(n),
        })
    }

    /// A caller-chosen partition, still sampled at midpoints.
    pub fn with_breakpoints(p: &PeriodicPotential, breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidArgument(
                "mesh needs at least one interval".into(),
            ));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != p.period() {
            return Err(Error::InvalidArgument("mesh must span [0, period]".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("breakpoints must increase".into()));
        }
        let values = sample_midpoints(p, &breakpoints);
        Ok(StepMesh {
            breakpoints,
            values,
            kind: MeshKind::Custom,
        })
    }

    /// Bisects every subinterval and resamples at the new midpoints.
    pub fn refine(&self, p: &PeriodicPotential) -> StepMesh {
        let breakpoints = match self.kind {
            MeshKind::Uniform(n) => uniform_breakpoints(p.period(), 2 * n),
            MeshKind::Custom => {
                let mut b = Vec::with_capacity(2 * self.breakpoints.len() - 1);
                for w in self.breakpoints.windows(2) {
                    b.push(w[0]);
                    b.push(0.5 * (w[0] + w[1]));
                }
                b.push(*self.breakpoints.last().unwrap());
                b
            }
        };
        let values = sample_midpoints(p, &breakpoints);
        let kind = match self.kind {
            MeshKind::Uniform(n) => MeshKind::Uniform(2 * n),
            MeshKind::Custom => MeshKind::Custom,
        };
        StepMesh {
            breakpoints,
            values,
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn width(&self, n: usize) -> f64 {
        self.breakpoints[n + 1] - self.breakpoints[n]
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints.windows(2).map(|w| w[1] - w[0])
    }

    pub fn period(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// `(width, value)` per subinterval, left to right.
    pub fn cells(&self) -> impl DoubleEndedIterator<Item = (f64, f64)> + ExactSizeIterator + '_ {
        self.breakpoints
            .windows(2)
            .zip(self.values.iter())
            .map(|(w, &q)| (w[1] - w[0], q))
    }
}
