//! TOML run configuration. Every table rejects unknown keys and every
//! physical quantity is re-validated through the library constructors.

use std::path::Path;

use anyhow::{bail, Context};
use kgwell::fdtd::{Boundary, FdtdConfig};
use kgwell::mse::causal_nmax;
use kgwell::wavepacket::{QuadraturePlan, QuadratureRule, WavepacketSpec};
use kgwell::{UnitSystem, WellConfig};
use num_complex::Complex64;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub units: Option<UnitsSection>,
    pub well: Option<WellSection>,
    pub bound_states: Option<BoundStatesSection>,
    pub scan: Option<ScanSection>,
    pub wavepacket: Option<WavepacketSection>,
    pub grid: Option<GridSection>,
    pub fdtd: Option<FdtdSection>,
    pub compare: Option<CompareSection>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsSection {
    pub hbar: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellSection {
    pub depth: f64,
    pub width: f64,
    #[serde(default = "one")]
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundStatesSection {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_curve_points")]
    pub curve_points: usize,
}

impl Default for BoundStatesSection {
    fn default() -> Self {
        Self { tol: default_tol(), curve_points: default_curve_points() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// Well depths to scan; `well.depth` is used when absent.
    pub depths: Option<Vec<f64>>,
    pub p_min: f64,
    pub p_max: f64,
    pub points: usize,
    pub nmax: usize,
    #[serde(default = "unit_alpha")]
    pub alpha: [f64; 2],
    #[serde(default)]
    pub beta: [f64; 2],
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavepacketSection {
    pub p0: f64,
    pub sigma_p: f64,
    pub x0: f64,
    #[serde(default = "unit_alpha")]
    pub alpha: [f64; 2],
    #[serde(default)]
    pub beta: [f64; 2],
    /// Truncation order; the causal rule for the last snapshot when absent.
    pub nmax: Option<usize>,
    /// Explicit momentum quadrature; a resolving plan is derived when absent.
    pub quadrature: Option<QuadratureSection>,
    /// Rescale so the charge at `t = 0` on the output grid is one.
    #[serde(default = "yes")]
    pub normalize: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub p_min: f64,
    pub p_max: f64,
    pub nodes: usize,
    #[serde(default)]
    pub rule: RuleName,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    #[default]
    GaussLegendre,
    Trapezoid,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdtdSection {
    pub dx: f64,
    /// Defaults to `dx / 2c`.
    pub dt: Option<f64>,
    /// Domain; defaults to the well padded by `c t_max` on both sides.
    pub x_left: Option<f64>,
    pub x_right: Option<f64>,
    #[serde(default)]
    pub boundary: BoundaryName,
    /// Lattice spacings for `--convergence`, coarsest first.
    #[serde(default)]
    pub convergence_dx: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryName {
    #[default]
    HardWall,
    Periodic,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    #[serde(default = "default_l2_max")]
    pub l2_max: f64,
    pub centroid_max: Option<f64>,
    pub charge_max: Option<f64>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self { l2_max: default_l2_max(), centroid_max: None, charge_max: None }
    }
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn unit_alpha() -> [f64; 2] {
    [1.0, 0.0]
}
fn default_tol() -> f64 {
    1e-12
}
fn default_curve_points() -> usize {
    2000
}
fn default_l2_max() -> f64 {
    0.05
}

fn complex([re, im]: [f64; 2]) -> Complex64 {
    Complex64::new(re, im)
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.units()?;
        if cfg.well.is_some() {
            cfg.well()?;
        }
        Ok(cfg)
    }

    pub fn units(&self) -> anyhow::Result<UnitSystem> {
        Ok(match self.units {
            Some(u) => UnitSystem::new(u.hbar, u.c)?,
            None => UnitSystem::NATURAL,
        })
    }

    pub fn well(&self) -> anyhow::Result<WellConfig> {
        let w = self.well.context("missing [well] table")?;
        Ok(WellConfig::new(w.depth, w.width, w.mass)?)
    }

    pub fn bound_states(&self) -> BoundStatesSection {
        self.bound_states.unwrap_or_default()
    }

    pub fn scan(&self) -> anyhow::Result<&ScanSection> {
        let s = self.scan.as_ref().context("missing [scan] table")?;
        if !(s.p_min > 0.0 && s.p_max > s.p_min && s.points >= 2) {
            bail!("[scan] needs 0 < p_min < p_max and points >= 2");
        }
        Ok(s)
    }

    pub fn scan_depths(&self) -> anyhow::Result<Vec<f64>> {
        let depths = match &self.scan()?.depths {
            Some(d) => d.clone(),
            None => vec![self.well()?.depth],
        };
        if depths.is_empty() {
            bail!("[scan] depths is empty");
        }
        Ok(depths)
    }

    pub fn scan_alpha_beta(&self) -> anyhow::Result<(Complex64, Complex64)> {
        let s = self.scan()?;
        Ok((complex(s.alpha), complex(s.beta)))
    }

    pub fn grid(&self) -> anyhow::Result<&GridSection> {
        let g = self.grid.as_ref().context("missing [grid] table")?;
        if !(g.dx > 0.0 && g.x_max > g.x_min && g.x_min.is_finite() && g.x_max.is_finite()) {
            bail!("[grid] needs x_min < x_max and dx > 0");
        }
        let cells = (g.x_max - g.x_min) / g.dx;
        if (cells - cells.round()).abs() > 1e-6 {
            bail!("[grid] x_max - x_min must be a whole number of dx");
        }
        if g.times.is_empty() || g.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            bail!("[grid] times must be a non-empty list of non-negative times");
        }
        if g.times.windows(2).any(|w| w[1] <= w[0]) {
            bail!("[grid] times must be strictly ascending");
        }
        Ok(g)
    }

    pub fn x_grid(&self) -> anyhow::Result<Vec<f64>> {
        let g = self.grid()?;
        let n = ((g.x_max - g.x_min) / g.dx).round() as usize;
        Ok((0..=n).map(|i| g.x_min + i as f64 * g.dx).collect())
    }

    pub fn t_max(&self) -> anyhow::Result<f64> {
        Ok(*self.grid()?.times.last().expect("times checked non-empty"))
    }

    pub fn wavepacket(&self) -> anyhow::Result<WavepacketSpec> {
        let w = self.wavepacket.as_ref().context("missing [wavepacket] table")?;
        let well = self.well()?;
        let units = self.units()?;
        let grid = self.grid()?;
        let t_max = self.t_max()?;
        let mut spec = WavepacketSpec::gaussian(w.p0, w.sigma_p, w.x0)?;
        spec.alpha = complex(w.alpha);
        spec.beta = complex(w.beta);
        spec.nmax = w.nmax.unwrap_or_else(|| causal_nmax(t_max, w.p0, &well, units));
        match w.quadrature {
            Some(q) => {
                let rule = match q.rule {
                    RuleName::GaussLegendre => QuadratureRule::GaussLegendre,
                    RuleName::Trapezoid => QuadratureRule::Trapezoid,
                };
                spec.quad = QuadraturePlan::new(q.p_min, q.p_max, q.nodes, rule)?;
            }
            None => {
                let extent = grid.x_min.abs().max(grid.x_max.abs());
                spec = spec.with_resolving_quadrature(&well, units, extent, t_max)?;
            }
        }
        Ok(spec)
    }

    pub fn normalize(&self) -> bool {
        self.wavepacket.is_none_or(|w| w.normalize)
    }

    pub fn fdtd_section(&self) -> anyhow::Result<&FdtdSection> {
        self.fdtd.as_ref().context("missing [fdtd] table")
    }

    /// Lattice for spacing `dx`; `dt` is scaled along with `dx` when
    /// `dx` differs from the configured spacing.
    pub fn fdtd_config(&self, dx: f64) -> anyhow::Result<FdtdConfig> {
        let f = self.fdtd_section()?;
        let units = self.units()?;
        let well = self.well()?;
        let t_max = self.t_max()?;
        let mut cfg = FdtdConfig::padded(&well, units, dx, t_max);
        if let Some(dt) = f.dt {
            cfg.dt = dt * dx / f.dx;
            cfg.n_steps = (t_max / cfg.dt).round() as usize;
        }
        if let Some(x) = f.x_left {
            cfg.x_left = x;
        }
        if let Some(x) = f.x_right {
            cfg.x_right = x;
        }
        cfg.boundary = match f.boundary {
            BoundaryName::HardWall => Boundary::HardWall,
            BoundaryName::Periodic => Boundary::Periodic,
        };
        if (cfg.t_max() - t_max).abs() > 1e-9 * t_max.max(1.0) {
            bail!("last snapshot time {t_max} is not a whole number of steps dt = {}", cfg.dt);
        }
        cfg.validate(&well, units)?;
        Ok(cfg)
    }

    pub fn compare(&self) -> CompareSection {
        self.compare.unwrap_or_default()
    }
}
