//! Semi-analytic wavepackets.
//!
//! A packet is a superposition over in-well momenta of the stationary
//! multiple-scattering solutions, weighted by the Gaussian envelope
//! `g(p) = exp(-(p - p0)² / 4σ_p²) exp(-i p x0 / ħ)`:
//!
//! ```text
//! G_j(t, x) = ∫ dp g(p) (A_j e^{i p_j x/ħ} + B_j e^{-i p_j x/ħ}) e^{-i E t/ħ}
//! ```
//!
//! Only positive momenta and positive energies enter, so the packet carries
//! no antiparticle component at `t = 0`. The position spread is about
//! `ħ / (2σ_p)` and should stay well below the well width.

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::kinematics::{ModeSolution, Region, UnitSystem, WellConfig};
use crate::mse::{mse_amplitudes, SeriesOrder};
use crate::snapshot;

/// Envelope weight that may fall outside the quadrature range.
pub const MAX_LOST_WEIGHT: f64 = 1e-8;
/// Target size of the envelope at the cut, after amplification by the
/// scattering series.
pub const RESOLVED_EDGE: f64 = 1e-10;
/// Half-width of the default quadrature range, in units of `σ_p`.
pub const DEFAULT_RANGE_SIGMAS: f64 = 6.0;
pub const DEFAULT_NODES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    GaussLegendre,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePlan {
    pub p_min: f64,
    pub p_max: f64,
    pub n_nodes: usize,
    pub rule: QuadratureRule,
}

impl QuadraturePlan {
    pub fn new(p_min: f64, p_max: f64, n_nodes: usize, rule: QuadratureRule) -> Result<Self> {
        if !(p_min.is_finite() && p_min > 0.0) {
            return Err(Error::InvalidParameter(format!("p_min must be > 0, got {p_min}")));
        }
        if !(p_max.is_finite() && p_max > p_min) {
            return Err(Error::InvalidParameter(format!("p_max must exceed p_min, got {p_max}")));
        }
        if n_nodes < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 nodes, got {n_nodes}")));
        }
        Ok(Self { p_min, p_max, n_nodes, rule })
    }

    /// Gauss-Legendre over `p0 ± 6σ_p`, clipped to positive momenta.
    pub fn around(p0: f64, sigma_p: f64) -> Result<Self> {
        let half = DEFAULT_RANGE_SIGMAS * sigma_p;
        let p_min = (p0 - half).max(1e-6 * sigma_p);
        Self::new(p_min, p0 + half, DEFAULT_NODES, QuadratureRule::GaussLegendre)
    }

    /// Nodes and weights in ascending node order.
    pub fn nodes(&self) -> Result<Vec<(f64, f64)>> {
        let (a, b) = (self.p_min, self.p_max);
        match self.rule {
            QuadratureRule::GaussLegendre => {
                let rule = GaussLegendre::new(self.n_nodes)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                let half = 0.5 * (b - a);
                let mid = 0.5 * (b + a);
                let mut nodes: Vec<(f64, f64)> = rule
                    .nodes()
                    .zip(rule.weights())
                    .map(|(x, w)| (mid + half * x, half * w))
                    .collect();
                nodes.sort_by(|l, r| l.0.total_cmp(&r.0));
                Ok(nodes)
            }
            QuadratureRule::Trapezoid => {
                let n = self.n_nodes;
                let h = (b - a) / (n - 1) as f64;
                Ok((0..n)
                    .map(|i| {
                        let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
                        (a + i as f64 * h, w)
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketSpec {
    pub p0: f64,
    pub sigma_p: f64,
    pub x0: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub nmax: usize,
    pub quad: QuadraturePlan,
}

impl WavepacketSpec {
    /// Right-moving packet (`α = 1`, `β = 0`) with ten scattering round trips
    /// and the default quadrature plan.
    pub fn gaussian(p0: f64, sigma_p: f64, x0: f64) -> Result<Self> {
        if !(p0.is_finite() && p0 > 0.0) {
            return Err(Error::InvalidParameter(format!("p0 must be > 0, got {p0}")));
        }
        if !(sigma_p.is_finite() && sigma_p > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma_p must be > 0, got {sigma_p}")));
        }
        Ok(Self {
            p0,
            sigma_p,
            x0,
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
            nmax: 10,
            quad: QuadraturePlan::around(p0, sigma_p)?,
        })
    }

    /// Fraction of `∫|g|² dp` inside the quadrature range.
    pub fn captured_weight(&self) -> f64 {
        let s = self.sigma_p * std::f64::consts::SQRT_2;
        let lost = 0.5 * erfc((self.quad.p_max - self.p0) / s) + 0.5 * erfc((self.p0 - self.quad.p_min) / s);
        1.0 - lost
    }

    /// Replaces the quadrature plan with one that resolves every term of
    /// the truncated series for `|x| ≤ x_extent`, `0 ≤ t ≤ t_max`.
    ///
    /// In the supercritical regime the n-th term is amplified by up to
    /// `|r_l|²ⁿ` (about 1.8²ⁿ for a 5mc² well), so each end of the range is
    /// pushed out until `|g|` times that growth drops below
    /// [`RESOLVED_EDGE`]. `r_l` has a pole where `E = V0/2`; a packet whose
    /// envelope does not decay fast enough before reaching it is rejected.
    /// The n-th term also oscillates like `e^{2inpL/ħ}` across the range,
    /// which sets the number of Gauss-Legendre nodes.
    pub fn with_resolving_quadrature(mut self, well: &WellConfig, units: UnitSystem, x_extent: f64, t_max: f64) -> Result<Self> {
        let p_max = self.range_edge(well, units, 1.0)?;
        let p_min = self.range_edge(well, units, -1.0)?;
        let v_max = units.c;
        let phase_rate = (2.0 * (self.nmax as f64 + 1.0) * well.width + x_extent.abs() + self.x0.abs() + v_max * t_max) / units.hbar;
        let omega = 0.5 * (p_max - p_min) * phase_rate;
        let n_nodes = ((1.25 * omega).ceil() as usize + 64).max(DEFAULT_NODES);
        self.quad = QuadraturePlan::new(p_min, p_max, n_nodes, QuadratureRule::GaussLegendre)?;
        Ok(self)
    }

    /// Walks from `p0` in direction `dir` until the amplified envelope is
    /// negligible, at least [`DEFAULT_RANGE_SIGMAS`] widths out.
    fn range_edge(&self, well: &WellConfig, units: UnitSystem, dir: f64) -> Result<f64> {
        let h = self.sigma_p / 16.0;
        let floor = 1e-6 * self.sigma_p;
        let mut last = f64::INFINITY;
        for j in 1..=64 * 16 {
            let d = j as f64 * h;
            let p = self.p0 + dir * d;
            if p <= floor {
                return Ok(floor);
            }
            let too_wide = |why: String| {
                Err(Error::InvalidParameter(format!(
                    "sigma_p = {} is too wide for nmax = {}: {why}",
                    self.sigma_p, self.nmax
                )))
            };
            let Ok(mode) = ModeSolution::new(p, well, units) else {
                return too_wide(format!("envelope still significant at the degenerate momentum {p}"));
            };
            let sc = crate::mse::step_coefficients(&mode, well, units)?;
            let r2 = sc.rl.norm_sqr();
            let growth = (0..=self.nmax).map(|n| r2.powi(n as i32)).sum::<f64>() * sc.tl.norm().max(sc.rl.norm()).max(1.0);
            let amplified = (-d * d / (4.0 * self.sigma_p * self.sigma_p)).exp() * growth;
            if amplified <= RESOLVED_EDGE && d >= DEFAULT_RANGE_SIGMAS * self.sigma_p {
                return Ok(p);
            }
            if amplified > last && d > DEFAULT_RANGE_SIGMAS * self.sigma_p {
                return too_wide(format!("amplified envelope turns up at p = {p} (|g| times growth = {amplified:e})"));
            }
            last = amplified;
        }
        Err(Error::InvalidParameter(format!("no quadrature cut within 64 sigma_p of p0 = {}", self.p0)))
    }

    pub fn envelope(&self, p: f64, units: UnitSystem) -> Complex64 {
        let d = p - self.p0;
        Complex64::from_polar((-d * d / (4.0 * self.sigma_p * self.sigma_p)).exp(), -p * self.x0 / units.hbar)
    }
}

/// Per-node amplitudes, precomputed once and shared by every `(t, x)`.
#[derive(Debug, Clone, Copy)]
struct NodeMode {
    p: f64,
    energy: f64,
    q: Complex64,
    weight: Complex64,
    b1: Complex64,
    a2: Complex64,
    b2: Complex64,
    a3_edge: Complex64,
}

#[derive(Debug, Clone)]
pub struct Wavepacket {
    spec: WavepacketSpec,
    well: WellConfig,
    units: UnitSystem,
    modes: Vec<NodeMode>,
}

impl Wavepacket {
    pub fn new(spec: WavepacketSpec, well: WellConfig, units: UnitSystem) -> Result<Self> {
        let captured = spec.captured_weight();
        if captured < 1.0 - MAX_LOST_WEIGHT {
            return Err(Error::QuadratureUnderflow { captured });
        }
        let modes = spec
            .quad
            .nodes()?
            .into_iter()
            .map(|(p, w)| {
                let mode = ModeSolution::new(p, &well, units)?;
                let amps = mse_amplitudes(&mode, &well, units, spec.alpha, spec.beta, SeriesOrder::Truncated(spec.nmax))?;
                Ok(NodeMode {
                    p,
                    energy: mode.energy,
                    q: mode.q,
                    weight: spec.envelope(p, units) * w,
                    b1: amps.b1,
                    a2: amps.a2,
                    b2: amps.b2,
                    a3_edge: amps.a3_edge,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, well, units, modes })
    }

    pub fn spec(&self) -> &WavepacketSpec {
        &self.spec
    }

    pub fn well(&self) -> &WellConfig {
        &self.well
    }

    pub fn units(&self) -> UnitSystem {
        self.units
    }

    /// `(ψ, ∂ψ/∂t)` at `(t, x)`; the time derivative uses the exact factor
    /// `-iE/ħ` of each mode.
    pub fn field(&self, t: f64, x: f64) -> (Complex64, Complex64) {
        let inv_hbar = 1.0 / self.units.hbar;
        let region = self.well.region(x);
        let mut psi = Complex64::new(0.0, 0.0);
        let mut dpsi = Complex64::new(0.0, 0.0);
        for m in &self.modes {
            let time_phase = -m.energy * t * inv_hbar;
            let wave = match region {
                Region::Inside => {
                    m.a2 * Complex64::from_polar(1.0, (m.p * x) * inv_hbar + time_phase)
                        + m.b2 * Complex64::from_polar(1.0, -(m.p * x) * inv_hbar + time_phase)
                }
                Region::Left => {
                    let arg = Complex64::new(0.0, -1.0) * m.q * (x * inv_hbar) + Complex64::new(0.0, time_phase);
                    m.b1 * arg.exp()
                }
                Region::Right => {
                    let arg =
                        Complex64::new(0.0, 1.0) * m.q * ((x - self.well.width) * inv_hbar) + Complex64::new(0.0, time_phase);
                    m.a3_edge * arg.exp()
                }
            };
            let term = m.weight * wave;
            psi += term;
            dpsi += term * Complex64::new(0.0, -m.energy * inv_hbar);
        }
        (psi, dpsi)
    }

    pub fn charge_at(&self, t: f64, x: f64) -> f64 {
        let (psi, dpsi) = self.field(t, x);
        charge_density(psi, dpsi, self.well.potential(x), self.well.mass, self.units)
    }

    /// Rescale `α` and `β` so that the total charge at `t = 0`, integrated
    /// over `x_grid`, equals one. Returns the charge before rescaling.
    pub fn normalize(&mut self, x_grid: &[f64]) -> Result<f64> {
        let rho: Vec<f64> = x_grid.par_iter().map(|&x| self.charge_at(0.0, x)).collect();
        let total = snapshot::trapezoid(x_grid, &rho);
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidParameter(format!("initial charge {total} cannot be normalised")));
        }
        let s = total.sqrt().recip();
        for m in &mut self.modes {
            m.weight *= s;
        }
        self.spec.alpha *= s;
        self.spec.beta *= s;
        Ok(total)
    }

    pub fn evolve_grid(&self, x_grid: &[f64], t_list: &[f64]) -> FieldGrid {
        let mut grid = FieldGrid {
            x: x_grid.to_vec(),
            t: t_list.to_vec(),
            psi: Vec::with_capacity(t_list.len()),
            dpsi_dt: Vec::with_capacity(t_list.len()),
            rho: Vec::with_capacity(t_list.len()),
        };
        for &t in t_list {
            let row: Vec<(Complex64, Complex64, f64)> = x_grid
                .par_iter()
                .map(|&x| {
                    let (psi, dpsi) = self.field(t, x);
                    (psi, dpsi, charge_density(psi, dpsi, self.well.potential(x), self.well.mass, self.units))
                })
                .collect();
            grid.psi.push(row.iter().map(|r| r.0).collect());
            grid.dpsi_dt.push(row.iter().map(|r| r.1).collect());
            grid.rho.push(row.iter().map(|r| r.2).collect());
        }
        grid
    }
}

pub fn evaluate_field(spec: WavepacketSpec, well: WellConfig, units: UnitSystem, t: f64, x: f64) -> Result<(Complex64, Complex64)> {
    Ok(Wavepacket::new(spec, well, units)?.field(t, x))
}

/// Klein-Gordon charge density
/// `ρ = iħ/(2mc²) (ψ* ∂ₜψ - ψ ∂ₜψ*) - V/(mc²) |ψ|²`.
pub fn charge_density(psi: Complex64, dpsi_dt: Complex64, potential: f64, mass: f64, units: UnitSystem) -> f64 {
    let rest = mass * units.c * units.c;
    (-units.hbar * (psi.conj() * dpsi_dt).im - potential * psi.norm_sqr()) / rest
}

/// Sampled field on a space-time grid, indexed `[t][x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub psi: Vec<Vec<Complex64>>,
    pub dpsi_dt: Vec<Vec<Complex64>>,
    pub rho: Vec<Vec<f64>>,
}

impl FieldGrid {
    pub fn total_charge(&self, t_index: usize) -> f64 {
        snapshot::trapezoid(&self.x, &self.rho[t_index])
    }

    pub fn region_charges(&self, t_index: usize, well: &WellConfig) -> [f64; 3] {
        snapshot::region_charges(&self.x, &self.rho[t_index], well)
    }

    pub fn centroid(&self, t_index: usize) -> f64 {
        snapshot::centroid(&self.x, &self.rho[t_index])
    }

    /// Keeps every `stride`-th column, starting with the first.
    pub fn every(&self, stride: usize) -> FieldGrid {
        self.strided(0, stride, usize::MAX)
    }

    /// Keeps at most `count` columns `start, start + stride, …`.
    pub fn strided(&self, start: usize, stride: usize, count: usize) -> FieldGrid {
        fn pick<T: Copy>(row: &[T], start: usize, stride: usize, count: usize) -> Vec<T> {
            row.iter().skip(start).step_by(stride.max(1)).take(count).copied().collect()
        }
        FieldGrid {
            x: pick(&self.x, start, stride, count),
            t: self.t.clone(),
            psi: self.psi.iter().map(|r| pick(r, start, stride, count)).collect(),
            dpsi_dt: self.dpsi_dt.iter().map(|r| pick(r, start, stride, count)).collect(),
            rho: self.rho.iter().map(|r| pick(r, start, stride, count)).collect(),
        }
    }

    pub fn to_table(&self) -> snapshot::SnapshotTable {
        snapshot::SnapshotTable { x: self.x.clone(), t: self.t.clone(), psi: self.psi.clone(), rho: self.rho.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const N: UnitSystem = UnitSystem::NATURAL;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn plane_wave_charge_is_energy_over_rest_mass() {
        let e = 2f64.sqrt();
        let (p, x, t) = (1.0, 0.3, 0.7);
        let psi = Complex64::from_polar(1.0, p * x - e * t);
        let dpsi = psi * Complex64::new(0.0, -e);
        assert_relative_eq!(charge_density(psi, dpsi, 0.0, 1.0, N), e, max_relative = 1e-15);
        assert_eq!(charge_density(Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.0), 0.0, 1.0, N), 0.0);
        assert_eq!(charge_density(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 3.0, 1.0, N), 0.0);
    }

    #[test]
    fn quadrature_plans() {
        assert!(QuadraturePlan::new(0.0, 1.0, 8, QuadratureRule::Trapezoid).is_err());
        assert!(QuadraturePlan::new(1.0, 1.0, 8, QuadratureRule::Trapezoid).is_err());
        assert!(QuadraturePlan::new(0.5, 1.0, 1, QuadratureRule::Trapezoid).is_err());
        for rule in [QuadratureRule::GaussLegendre, QuadratureRule::Trapezoid] {
            let plan = QuadraturePlan::new(0.5, 2.0, 400, rule).unwrap();
            let integral: f64 = plan.nodes().unwrap().iter().map(|(x, w)| w * x * x).sum();
            assert_relative_eq!(integral, (8.0 - 0.125) / 3.0, max_relative = 1e-5);
        }
        let nodes = QuadraturePlan::around(1.0, 0.02).unwrap().nodes().unwrap();
        assert_eq!(nodes.len(), DEFAULT_NODES);
        assert!(nodes.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn narrow_range_underflows() {
        let mut spec = WavepacketSpec::gaussian(1.0, 0.02, 5.0).unwrap();
        spec.quad = QuadraturePlan::new(0.95, 1.05, 64, QuadratureRule::GaussLegendre).unwrap();
        let well = WellConfig::new(0.0, 10.0, 1.0).unwrap();
        assert!(matches!(Wavepacket::new(spec, well, N), Err(Error::QuadratureUnderflow { .. })));
    }

    #[test]
    fn free_packet_peaks_at_its_centre() {
        let well = WellConfig::new(0.0, 400.0, 1.0).unwrap();
        let spec = WavepacketSpec::gaussian(1.0, 0.02, 200.0).unwrap();
        let packet = Wavepacket::new(spec, well, N).unwrap();
        let xs = linspace(50.0, 350.0, 601);
        let mags: Vec<f64> = xs.iter().map(|&x| packet.field(0.0, x).0.norm()).collect();
        let imax = mags.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_relative_eq!(xs[imax], 200.0, epsilon = 0.5);
    }

    #[test]
    fn resolving_quadrature_suppresses_late_series_terms() {
        // Ten round trips in a supercritical well: terms up to |r|^20 ~ 1e5
        // must cancel away from the packet.
        let well = WellConfig::new(5.0, 400.0, 1.0).unwrap();
        let spec = WavepacketSpec::gaussian(1.0, 0.02, 200.0).unwrap();
        let naive = Wavepacket::new(spec, well, N).unwrap();
        let resolved = Wavepacket::new(spec.with_resolving_quadrature(&well, N, 1800.0, 1000.0).unwrap(), well, N).unwrap();
        let peak = resolved.field(0.0, 200.0).0.norm();
        let direct = WavepacketSpec { nmax: 0, ..spec }.with_resolving_quadrature(&well, N, 1800.0, 1000.0).unwrap();
        let direct = Wavepacket::new(direct, well, N).unwrap();
        assert_relative_eq!(peak, direct.field(0.0, 200.0).0.norm(), max_relative = 1e-6);
        for x in [-1000.0, -300.0, -20.0, 420.0, 800.0, 1700.0] {
            assert!(resolved.field(0.0, x).0.norm() < 1e-7 * peak, "x={x}");
        }
        assert!(naive.field(0.0, -20.0).0.norm() > peak);
    }

    #[test]
    fn field_is_linear_in_alpha() {
        let well = WellConfig::new(5.0, 100.0, 1.0).unwrap();
        let mut spec = WavepacketSpec::gaussian(1.0, 0.05, 50.0).unwrap();
        spec.quad.n_nodes = 96;
        let one = Wavepacket::new(spec, well, N).unwrap();
        spec.alpha = Complex64::new(2.0, 0.0);
        let two = Wavepacket::new(spec, well, N).unwrap();
        for (t, x) in [(0.0, 50.0), (80.0, 110.0), (150.0, -20.0)] {
            let (a, da) = one.field(t, x);
            let (b, db) = two.field(t, x);
            assert!((b - 2.0 * a).norm() <= 1e-12 * (1.0 + b.norm()));
            assert!((db - 2.0 * da).norm() <= 1e-12 * (1.0 + db.norm()));
        }
    }

    #[test]
    fn time_derivative_matches_finite_differences() {
        let well = WellConfig::new(5.0, 100.0, 1.0).unwrap();
        let mut spec = WavepacketSpec::gaussian(1.0, 0.05, 50.0).unwrap();
        spec.quad.n_nodes = 128;
        let packet = Wavepacket::new(spec, well, N).unwrap();
        let h = 1e-3;
        for (t, x) in [(10.0, 55.0), (60.0, 98.0), (90.0, 120.0), (170.0, -10.0), (40.0, 0.5)] {
            let (_, d) = packet.field(t, x);
            let fd = (packet.field(t + h, x).0 - packet.field(t - h, x).0) / (2.0 * h);
            assert!((d - fd).norm() <= 1e-5 * d.norm().max(1e-3), "t={t} x={x}: {d} vs {fd}");
        }
    }

    #[test]
    fn bound_regime_packet_is_continuous_at_the_edges() {
        // E ~ 1.1, V0 = 1.5: every node is bound; before the next round trip
        // arrives the truncated series matches across both edges. The jump
        // left over comes from cutting the envelope at 6σ, where |g| ~ e^-9.
        let well = WellConfig::new(1.5, 200.0, 1.0).unwrap();
        let mut spec = WavepacketSpec::gaussian(0.5, 0.05, 100.0).unwrap();
        spec.nmax = 4;
        let packet = Wavepacket::new(spec, well, N).unwrap();
        let peak = packet.field(0.0, 100.0).0.norm();
        for t in [0.0, 200.0, 400.0] {
            for edge in [0.0, 200.0] {
                let inside = packet.field(t, edge).0;
                let outside = packet.field(t, edge + if edge == 0.0 { -1e-9 } else { 1e-9 }).0;
                assert!((inside - outside).norm() < 1e-4 * peak, "t={t} edge={edge}: {} vs {} (peak {peak})", inside, outside);
            }
        }
    }

    #[test]
    fn normalisation_sets_unit_charge_and_scales_quadratically() {
        let well = WellConfig::new(0.0, 400.0, 1.0).unwrap();
        let mut spec = WavepacketSpec::gaussian(1.0, 0.02, 200.0).unwrap();
        spec.quad.n_nodes = 128;
        let xs = linspace(0.0, 400.0, 2001);
        let mut packet = Wavepacket::new(spec, well, N).unwrap();
        let q1 = packet.normalize(&xs).unwrap();
        let grid = packet.evolve_grid(&xs, &[0.0]);
        assert_relative_eq!(grid.total_charge(0), 1.0, max_relative = 1e-12);

        spec.alpha = Complex64::new(2.0, 0.0);
        let doubled = Wavepacket::new(spec, well, N).unwrap();
        let q2 = doubled.evolve_grid(&xs, &[0.0]).total_charge(0);
        assert_relative_eq!(q2, 4.0 * q1, max_relative = 1e-12);
    }

    #[test]
    fn strided_columns() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let grid = FieldGrid {
            x: x.clone(),
            t: vec![0.0],
            psi: vec![x.iter().map(|&v| Complex64::new(v, 0.0)).collect()],
            dpsi_dt: vec![x.iter().map(|&v| Complex64::new(0.0, v)).collect()],
            rho: vec![x.iter().map(|&v| -v).collect()],
        };
        let s = grid.strided(1, 3, 2);
        assert_eq!(s.x, vec![1.0, 4.0]);
        assert_eq!(s.rho[0], vec![-1.0, -4.0]);
        assert_eq!(s.dpsi_dt[0][1], Complex64::new(0.0, 4.0));
        assert_eq!(grid.every(4).x, vec![0.0, 4.0, 8.0]);
    }
}
