use std::fmt::Write as _;
use std::io::{BufRead, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::model::{MonotoneSign, PhasePoint, TorusPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    UMinus,
    UPlus,
}

impl SolutionKind {
    /// Monotone sign of the models this solution belongs to.
    pub fn sign(self) -> MonotoneSign {
        match self {
            SolutionKind::UMinus => MonotoneSign::Minus,
            SolutionKind::UPlus => MonotoneSign::Plus,
        }
    }

    pub fn for_sign(sign: MonotoneSign) -> Self {
        match sign {
            MonotoneSign::Minus => SolutionKind::UMinus,
            MonotoneSign::Plus => SolutionKind::UPlus,
        }
    }
}

/// Solve statistics kept alongside the values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub last_update: f64,
    pub dtau: f64,
    pub viscosity: [f64; 2],
    /// Largest increase of any node between monotonicity checkpoints.
    pub max_monotone_increase: f64,
    /// `max |H(x, centred Du, u)|` over every node, kinks included.
    pub residual_all_nodes: f64,
}

/// Viscosity solution `u-` or `u+` sampled on a periodic grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub(crate) grid: Grid,
    pub(crate) values: Vec<f64>,
    pub(crate) kind: SolutionKind,
    /// `P(0, ·)` coercivity radius bounding `‖Du‖`.
    pub(crate) lipschitz_bound: f64,
    /// `max |H(x, Du, u)|` over differentiability nodes.
    pub(crate) residual_norm: f64,
    /// Constant sub/super-solution bounds `(U_lower, U_upper)`.
    pub(crate) bounds: (f64, f64),
    pub(crate) stats: Option<SolveStats>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    dim: usize,
    n: usize,
    kind: SolutionKind,
    lipschitz_bound: f64,
    residual_norm: f64,
    bounds: (f64, f64),
    #[serde(default)]
    stats: Option<SolveStats>,
}

impl GridFunction {
    /// Wraps externally computed values; all must be finite.
    pub fn from_values(
        grid: Grid,
        values: Vec<f64>,
        kind: SolutionKind,
        lipschitz_bound: f64,
        bounds: (f64, f64),
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InputDomain(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) || !lipschitz_bound.is_finite() {
            return Err(Error::InputDomain("non-finite grid values".into()));
        }
        Ok(Self {
            grid,
            values,
            kind,
            lipschitz_bound,
            residual_norm: f64::NAN,
            bounds,
            stats: None,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> SolutionKind {
        self.kind
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn stats(&self) -> Option<&SolveStats> {
        self.stats.as_ref()
    }

    /// Slack `C·h` allowed when comparing interpolated values with the exact
    /// solution.
    pub fn grid_slack(&self) -> f64 {
        self.lipschitz_bound * self.grid.spacing()
    }

    /// Periodic piecewise-multilinear interpolation.
    pub fn interpolate(&self, x: &TorusPoint) -> f64 {
        let n = self.grid.points_per_axis();
        let h = self.grid.spacing();
        let c = x.coords();
        let mut base = [0usize; 2];
        let mut frac = [0.0; 2];
        for a in 0..self.grid.dim() {
            let s = c[a] / h;
            let i = s.floor();
            frac[a] = s - i;
            base[a] = (i as usize) % n;
        }
        if self.grid.dim() == 1 {
            let v0 = self.values[base[0]];
            let v1 = self.values[(base[0] + 1) % n];
            v0 + frac[0] * (v1 - v0)
        } else {
            let at = |i: usize, j: usize| self.values[self.grid.flat_index([(base[0] + i) % n, (base[1] + j) % n])];
            let (fx, fy) = (frac[0], frac[1]);
            (1.0 - fx) * ((1.0 - fy) * at(0, 0) + fy * at(0, 1)) + fx * ((1.0 - fy) * at(1, 0) + fy * at(1, 1))
        }
    }

    /// `F(z) = u-(x) - u` for `u-`, `u - u+(x)` for `u+`.
    pub fn second_lyapunov(&self, z: &PhasePoint) -> f64 {
        let v = self.interpolate(&z.x);
        match self.kind {
            SolutionKind::UMinus => v - z.u,
            SolutionKind::UPlus => z.u - v,
        }
    }

    /// One JSON header line followed by little-endian `f64` values.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            dim: self.grid.dim(),
            n: self.grid.points_per_axis(),
            kind: self.kind,
            lipschitz_bound: self.lipschitz_bound,
            residual_norm: self.residual_norm,
            bounds: self.bounds,
            stats: self.stats,
        };
        let mut out = serde_json::to_vec(&header)?;
        out.push(b'\n');
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut reader = bytes;
        let mut line = Vec::new();
        reader.read_until(b'\n', &mut line)?;
        let header: Header = serde_json::from_slice(&line)?;
        let grid = Grid::new(header.dim, header.n)?;
        let mut raw = Vec::new();
        reader.read_to_end(&mut raw)?;
        if raw.len() != 8 * grid.len() {
            return Err(Error::InputDomain(format!(
                "grid payload has {} bytes, expected {}",
                raw.len(),
                8 * grid.len()
            )));
        }
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        let mut gf = Self::from_values(grid, values, header.kind, header.lipschitz_bound, header.bounds)?;
        gf.residual_norm = header.residual_norm;
        gf.stats = header.stats;
        Ok(gf)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// CSV with node coordinates and value.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for a in 1..=self.grid.dim() {
            let _ = write!(out, "x{a},");
        }
        out.push_str("u\n");
        for k in 0..self.grid.len() {
            for c in self.grid.node(k).coords() {
                let _ = write!(out, "{c},");
            }
            let _ = writeln!(out, "{}", self.values[k]);
        }
        out
    }
}
