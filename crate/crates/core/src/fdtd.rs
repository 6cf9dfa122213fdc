//! Finite-difference solver of the full Klein-Gordon equation, used as an
//! independent check on the scattering-series wavepackets.
//!
//! The equation is expanded as
//! `-ħ² ψ_tt - 2iħV ψ_t + V² ψ = -ħ²c² ψ_xx + m²c⁴ ψ` and discretised with
//! centred three-level differences in time and the three-point stencil in
//! space. The complex coefficient of `ψ^{n+1}` is inverted node by node.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{UnitSystem, WellConfig};
use crate::wavepacket::{charge_density, FieldGrid, Wavepacket};

/// Largest accepted Courant number `c dt / dx`.
pub const CFL_LIMIT: f64 = 0.5;
/// Growth of `max |ψ|` over its initial value that aborts a run. Only
/// enforced when `V0 < 2mc²`: deeper wells amplify components near
/// `E = V0/2` on every round trip, which is physics, not instability.
pub const MAX_GROWTH: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `ψ = 0` on the two outermost nodes.
    HardWall,
    /// The lattice wraps; `x_right` is identified with `x_left`.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdtdConfig {
    pub dx: f64,
    pub dt: f64,
    pub x_left: f64,
    pub x_right: f64,
    pub n_steps: usize,
    pub boundary: Boundary,
}

impl FdtdConfig {
    /// Hard-walled lattice padded by `c t_max` on both sides of the well,
    /// with `c dt = dx / 2`.
    pub fn padded(well: &WellConfig, units: UnitSystem, dx: f64, t_max: f64) -> Self {
        let dt = CFL_LIMIT * dx / units.c;
        let pad = (units.c * t_max / dx).ceil() * dx;
        FdtdConfig {
            dx,
            dt,
            x_left: -pad,
            x_right: (well.width / dx).ceil() * dx + pad,
            n_steps: (t_max / dt).round() as usize,
            boundary: Boundary::HardWall,
        }
    }

    pub fn t_max(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    pub fn n_nodes(&self) -> usize {
        let span = ((self.x_right - self.x_left) / self.dx).round() as usize;
        match self.boundary {
            Boundary::HardWall => span + 1,
            Boundary::Periodic => span,
        }
    }

    pub fn lattice(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.x_left + i as f64 * self.dx).collect()
    }

    pub fn validate(&self, well: &WellConfig, units: UnitSystem) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.dx.is_finite() && self.dx > 0.0) {
            return bad(format!("dx must be > 0, got {}", self.dx));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.x_left.is_finite() && self.x_right.is_finite() && self.x_right > self.x_left) {
            return bad(format!("empty domain [{}, {}]", self.x_left, self.x_right));
        }
        let cells = (self.x_right - self.x_left) / self.dx;
        if (cells - cells.round()).abs() > 1e-6 || cells.round() < 4.0 {
            return bad(format!("domain length is not a whole number (>= 4) of cells dx = {}", self.dx));
        }
        let courant = units.c * self.dt / self.dx;
        if courant > CFL_LIMIT * (1.0 + 1e-12) {
            return bad(format!("c dt / dx = {courant} exceeds {CFL_LIMIT}"));
        }
        if self.boundary == Boundary::HardWall {
            let pad = units.c * self.t_max();
            if self.x_left > -pad + 1e-9 * pad.max(1.0) || self.x_right < well.width + pad - 1e-9 * pad.max(1.0) {
                return bad(format!(
                    "domain [{}, {}] must extend c t_max = {pad} beyond [0, {}]",
                    self.x_left, self.x_right, well.width
                ));
            }
        }
        // Uniform-potential tests only. The two edge nodes mix V0/2 with
        // V0²/2, which fails the frozen test once V0 > 2mc², but a single
        // node supports no Fourier mode; the growth monitor covers it.
        for v in [0.0, 0.5 * well.depth, well.depth] {
            let margin = self.stability_margin(v, well, units);
            if margin < 0.0 {
                return bad(format!(
                    "dt = {} is unstable where V = {v} (amplification test short by {:.3e}); reduce dt",
                    self.dt, -margin
                ));
            }
        }
        Ok(())
    }

    /// Von Neumann test for a node with potential `v`. A Fourier mode obeys
    /// `(a+b) z² - C z + (a-b) = 0` with `a = ħ²/dt²`, `b = iħV/dt` and
    /// `C = 2a + V² - W²`, `W² = ħ²c²K² + m²c⁴`. Because `|a+b| = |a-b|`
    /// both roots lie on the unit circle iff `|C| ≤ 2|a+b|`; `C` is linear in
    /// `W²`, so checking the two ends of the lattice spectrum suffices.
    /// Returns `min(2|a+b| - |C|) / 2a`, negative when unstable.
    pub fn stability_margin(&self, v: f64, well: &WellConfig, units: UnitSystem) -> f64 {
        let h = units.hbar;
        let a = h * h / (self.dt * self.dt);
        let r = (a * a + (h * v / self.dt).powi(2)).sqrt();
        let rest = well.rest_energy(units);
        let w2_lo = rest * rest;
        let w2_hi = w2_lo + 4.0 * (h * units.c / self.dx).powi(2);
        [w2_lo, w2_hi].iter().map(|w2| (2.0 * r - (2.0 * a + v * v - w2).abs()) / (2.0 * a)).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdtdState {
    pub psi_prev: Vec<Complex64>,
    pub psi_curr: Vec<Complex64>,
    pub step_index: usize,
}

impl FdtdState {
    /// `max |ψ|` at the current level.
    pub fn peak(&self) -> f64 {
        self.psi_curr.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct FdtdSolver {
    cfg: FdtdConfig,
    well: WellConfig,
    units: UnitSystem,
    x: Vec<f64>,
    potential: Vec<f64>,
    // ψ^{n+1} = c_curr ψ^n + c_prev ψ^{n-1} + c_lap (ψ_{i+1} - 2ψ_i + ψ_{i-1})
    c_curr: Vec<Complex64>,
    c_prev: Vec<Complex64>,
    c_lap: Vec<Complex64>,
    growth_limit: f64,
}

impl FdtdSolver {
    pub fn new(cfg: FdtdConfig, well: WellConfig, units: UnitSystem) -> Result<Self> {
        cfg.validate(&well, units)?;
        let x = cfg.lattice();
        // A node on an edge carries the average of the equations on its two
        // sides: mean V in the ψ_t term and mean V² (not (mean V)²) in the
        // V² term. Anything else is an O(1) error at that node and costs an
        // order of convergence.
        let on_edge = |xi: f64, edge: f64| (xi - edge).abs() < 1e-9 * cfg.dx;
        let (potential, potential_sq): (Vec<f64>, Vec<f64>) = x
            .iter()
            .map(|&xi| {
                if on_edge(xi, 0.0) || on_edge(xi, well.width) {
                    (0.5 * well.depth, 0.5 * well.depth * well.depth)
                } else {
                    let v = well.potential(xi);
                    (v, v * v)
                }
            })
            .unzip();
        let h = units.hbar;
        let a = h * h / (cfg.dt * cfg.dt);
        let rest = well.rest_energy(units);
        let lap = (h * units.c / cfg.dx).powi(2);
        let mut c_curr = Vec::with_capacity(x.len());
        let mut c_prev = Vec::with_capacity(x.len());
        let mut c_lap = Vec::with_capacity(x.len());
        for (&v, &v_sq) in potential.iter().zip(&potential_sq) {
            let b = Complex64::new(0.0, h * v / cfg.dt);
            let inv = (a + b).inv();
            c_curr.push(inv * (2.0 * a + v_sq - rest * rest));
            c_prev.push(-inv * (a - b));
            c_lap.push(inv * lap);
        }
        let growth_limit = if well.depth < 2.0 * rest { MAX_GROWTH } else { f64::INFINITY };
        Ok(Self { cfg, well, units, x, potential, c_curr, c_prev, c_lap, growth_limit })
    }

    pub fn config(&self) -> &FdtdConfig {
        &self.cfg
    }

    pub fn lattice(&self) -> &[f64] {
        &self.x
    }

    pub fn time(&self, state: &FdtdState) -> f64 {
        state.step_index as f64 * self.cfg.dt
    }

    /// Seeds `ψ(-dt)` and `ψ(0)` from an analytic field `f(t, x)`.
    pub fn init_with<F>(&self, f: F) -> FdtdState
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        use rayon::prelude::*;
        let sample = |t: f64| -> Vec<Complex64> {
            let mut row: Vec<Complex64> = self.x.par_iter().map(|&x| f(t, x)).collect();
            if self.cfg.boundary == Boundary::HardWall {
                let n = row.len();
                row[0] = Complex64::new(0.0, 0.0);
                row[n - 1] = Complex64::new(0.0, 0.0);
            }
            row
        };
        FdtdState { psi_prev: sample(-self.cfg.dt), psi_curr: sample(0.0), step_index: 0 }
    }

    pub fn init_from_wavepacket(&self, packet: &Wavepacket) -> FdtdState {
        self.init_with(|t, x| packet.field(t, x).0)
    }

    /// `ψ^{n+1}` without advancing the state.
    pub fn lookahead(&self, state: &FdtdState) -> Vec<Complex64> {
        let mut next = state.psi_prev.clone();
        self.advance_into(&state.psi_curr, &mut next);
        next
    }

    /// Overwrites `prev` (holding `ψ^{n-1}`) with `ψ^{n+1}`; each node reads
    /// only its own old value, so the update can run in place. Returns
    /// `max |ψ^{n+1}|`.
    fn advance_into(&self, psi: &[Complex64], prev: &mut [Complex64]) -> f64 {
        let n = psi.len();
        let mut peak: f64 = 0.0;
        let mut node = |i: usize, old: Complex64, left: Complex64, right: Complex64| {
            let v = self.c_curr[i] * psi[i] + self.c_prev[i] * old + self.c_lap[i] * (left - 2.0 * psi[i] + right);
            peak = peak.max(v.norm_sqr());
            v
        };
        match self.cfg.boundary {
            Boundary::HardWall => {
                for i in 1..n - 1 {
                    prev[i] = node(i, prev[i], psi[i - 1], psi[i + 1]);
                }
                prev[0] = Complex64::new(0.0, 0.0);
                prev[n - 1] = Complex64::new(0.0, 0.0);
            }
            Boundary::Periodic => {
                prev[0] = node(0, prev[0], psi[n - 1], psi[1]);
                for i in 1..n - 1 {
                    prev[i] = node(i, prev[i], psi[i - 1], psi[i + 1]);
                }
                prev[n - 1] = node(n - 1, prev[n - 1], psi[n - 2], psi[0]);
            }
        }
        peak.sqrt()
    }

    /// Advances one time step. Fails on non-finite values, and once
    /// `max |ψ|` exceeds [`MAX_GROWTH`] times `reference` (typically the
    /// initial maximum) in wells too shallow to amplify.
    pub fn step(&self, state: &mut FdtdState, reference: f64) -> Result<()> {
        let peak = self.advance_into(&state.psi_curr, &mut state.psi_prev);
        std::mem::swap(&mut state.psi_prev, &mut state.psi_curr);
        state.step_index += 1;
        let growth = peak / reference;
        if !growth.is_finite() || growth > self.growth_limit {
            return Err(Error::InstabilityDetected { step: state.step_index, growth });
        }
        Ok(())
    }

    /// Charge density at the current level, with `∂ₜψ` and `|ψ|²` replaced
    /// by the centred combinations `(ψ⁺ - ψ⁻)/2dt` and `Re ψ*(ψ⁺ + ψ⁻)/2`.
    /// Summed over the lattice this is conserved by the scheme to rounding.
    pub fn charge_on_lattice(&self, state: &FdtdState) -> Vec<f64> {
        let next = self.lookahead(state);
        self.charge_with(state, &next)
    }

    fn charge_with(&self, state: &FdtdState, next: &[Complex64]) -> Vec<f64> {
        let rest = self.well.rest_energy(self.units);
        let inv_2dt = 0.5 / self.cfg.dt;
        (0..self.x.len())
            .map(|i| {
                let psi = state.psi_curr[i];
                let dpsi = (next[i] - state.psi_prev[i]) * inv_2dt;
                let density = 0.5 * (psi.conj() * (next[i] + state.psi_prev[i])).re;
                (-self.units.hbar * (psi.conj() * dpsi).im - self.potential[i] * density) / rest
            })
            .collect()
    }

    /// Pointwise charge density with the plain `|ψⁿ|²` term. Close to
    /// [`FdtdSolver::charge_on_lattice`] but not exactly conserved.
    pub fn charge_pointwise(&self, state: &FdtdState) -> Vec<f64> {
        let next = self.lookahead(state);
        let inv_2dt = 0.5 / self.cfg.dt;
        (0..self.x.len())
            .map(|i| {
                let dpsi = (next[i] - state.psi_prev[i]) * inv_2dt;
                charge_density(state.psi_curr[i], dpsi, self.potential[i], self.well.mass, self.units)
            })
            .collect()
    }

    pub fn total_charge(&self, state: &FdtdState) -> f64 {
        self.charge_on_lattice(state).iter().sum::<f64>() * self.cfg.dx
    }

    /// Steps the state forward and records the field at each requested time.
    /// Times must be ascending, not earlier than the current state, and
    /// whole multiples of `dt`.
    pub fn run(&self, state: &mut FdtdState, times: &[f64]) -> Result<FieldGrid> {
        let reference = if state.peak() > 0.0 { state.peak() } else { 1.0 };
        let mut grid = FieldGrid {
            x: self.x.clone(),
            t: Vec::with_capacity(times.len()),
            psi: Vec::with_capacity(times.len()),
            dpsi_dt: Vec::with_capacity(times.len()),
            rho: Vec::with_capacity(times.len()),
        };
        for &t in times {
            let target = self.step_for_time(t)?;
            if target < state.step_index {
                return Err(Error::Config(format!("time {t} lies before the current state")));
            }
            if target > self.cfg.n_steps {
                return Err(Error::Config(format!("time {t} is beyond t_max = {}", self.cfg.t_max())));
            }
            while state.step_index < target {
                self.step(state, reference)?;
            }
            let next = self.lookahead(state);
            let inv_2dt = 0.5 / self.cfg.dt;
            grid.t.push(t);
            grid.rho.push(self.charge_with(state, &next));
            grid.dpsi_dt.push(next.iter().zip(&state.psi_prev).map(|(a, b)| (a - b) * inv_2dt).collect());
            grid.psi.push(state.psi_curr.clone());
        }
        Ok(grid)
    }

    fn step_for_time(&self, t: f64) -> Result<usize> {
        let n = (t / self.cfg.dt).round();
        if t.is_nan() || t < 0.0 || (n * self.cfg.dt - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::Config(format!("time {t} is not a whole number of steps dt = {}", self.cfg.dt)));
        }
        Ok(n as usize)
    }
}
