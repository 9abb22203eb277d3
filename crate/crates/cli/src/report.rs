//! Output rows and the JSON envelope around them.

use std::path::Path;

use hill_spectral::spectral::{Band, DensityPoint, EdgeTag};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::format::{Cell, Row};

/// What every JSON artifact carries besides its rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<R> {
    pub command: String,
    pub potential: String,
    pub period: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<EdgeSummary>,
    pub rows: Vec<R>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSummary {
    pub lambda_star: f64,
    pub tag: EdgeTag,
}

/// Reads back a JSON artifact written by this tool.
pub fn read_report<R: DeserializeOwned>(path: impl AsRef<Path>) -> std::io::Result<Report<R>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(std::io::Error::other)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub left: f64,
    pub right: f64,
    pub left_tag: EdgeTag,
    pub right_tag: EdgeTag,
}

impl From<&Band> for BandRow {
    fn from(b: &Band) -> Self {
        BandRow {
            left: b.left,
            right: b.right,
            left_tag: b.left_tag,
            right_tag: b.right_tag,
        }
    }
}

impl Row for BandRow {
    const HEADER: &'static [&'static str] = &["left", "right", "left_tag", "right_tag"];

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.left.into(),
            self.right.into(),
            self.left_tag.as_str().into(),
            self.right_tag.as_str().into(),
        ]
    }
}

/// `f` is absent for an indeterminate point; `rho_trapezoid` only with
/// `--rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub lambda: f64,
    pub f: Option<f64>,
    pub in_gap: bool,
    pub mesh_n: usize,
    pub converged: bool,
    pub indeterminate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_trapezoid: Option<f64>,
}

impl DensityRow {
    pub fn from_point(p: &DensityPoint) -> Self {
        DensityRow {
            lambda: p.lambda,
            f: Some(p.f),
            in_gap: p.in_gap,
            mesh_n: p.mesh_n,
            converged: p.converged,
            indeterminate: false,
            rho_trapezoid: None,
        }
    }

    pub fn indeterminate(lambda: f64) -> Self {
        DensityRow {
            lambda,
            f: None,
            in_gap: false,
            mesh_n: 0,
            converged: false,
            indeterminate: true,
            rho_trapezoid: None,
        }
    }
}

impl Row for DensityRow {
    const HEADER: &'static [&'static str] = &[
        "lambda",
        "f",
        "in_gap",
        "mesh_n",
        "converged",
        "indeterminate",
        "rho_trapezoid",
    ];

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.lambda.into(),
            self.f.into(),
            self.in_gap.into(),
            self.mesh_n.into(),
            self.converged.into(),
            self.indeterminate.into(),
            self.rho_trapezoid.into(),
        ]
    }
}

/// One point of an approach sequence towards an edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub lambda_star: f64,
    pub lambda: f64,
    pub f_clamped: f64,
    pub f_near_edge: f64,
    /// Growth-rate estimate from this row and the previous one.
    pub rate: Option<f64>,
}

impl Row for EdgeRow {
    const HEADER: &'static [&'static str] =
        &["lambda_star", "lambda", "f_clamped", "f_near_edge", "rate"];

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.lambda_star.into(),
            self.lambda.into(),
            self.f_clamped.into(),
            self.f_near_edge.into(),
            self.rate.into(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalRow {
    pub lambda: f64,
    pub fd_u_xl: f64,
    pub u_xl: f64,
    pub fd_v_l: f64,
    pub v_l: f64,
    /// Larger of the two `|analytic - fd| / max(1, |analytic|)`.
    pub rel_diff: f64,
}

impl Row for VariationalRow {
    const HEADER: &'static [&'static str] =
        &["lambda", "fd_u_xl", "u_xl", "fd_v_l", "v_l", "rel_diff"];

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.lambda.into(),
            self.fd_u_xl.into(),
            self.u_xl.into(),
            self.fd_v_l.into(),
            self.v_l.into(),
            self.rel_diff.into(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub shooting: String,
    pub points: usize,
    pub repetitions: usize,
    pub mean_seconds: f64,
    pub failures: usize,
}

impl Row for BenchRow {
    const HEADER: &'static [&'static str] = &[
        "shooting",
        "points",
        "repetitions",
        "mean_seconds",
        "failures",
    ];

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.shooting.as_str().into(),
            self.points.into(),
            self.repetitions.into(),
            self.mean_seconds.into(),
            self.failures.into(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub lambda: f64,
    pub u: f64,
    pub u_x: f64,
    pub v: f64,
    pub v_x: f64,
    pub error_estimate: f64,
}

impl Row for OracleRow {
    const HEADER: &'static [&'static str] = &["lambda", "u", "u_x", "v", "v_x", "error_estimate"];

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.lambda.into(),
            self.u.into(),
            self.u_x.into(),
            self.v.into(),
            self.v_x.into(),
            self.error_estimate.into(),
        ]
    }
}
