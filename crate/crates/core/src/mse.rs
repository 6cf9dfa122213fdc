//! Multiple scattering expansion for the square well.
//!
//! The well is treated as two independent potential steps. A wave inside the
//! well bounces between them; each round trip multiplies its amplitude by
//! `r_r r_l`, so every region amplitude carries the factor
//! `S = Σ_{n=0}^{nmax} (r_r r_l)^n`. In the supercritical regime
//! `|r_r r_l| > 1` and the series only makes sense truncated, with the n-th
//! term switching on after the n-th round trip.

use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{energy, ModeSolution, Regime, UnitSystem, WellConfig};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Reflection and transmission amplitudes of the left (`x = 0`) and right
/// (`x = L`) steps, for waves incident from inside the well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCoefficients {
    pub tl: Complex64,
    pub rl: Complex64,
    pub tr: Complex64,
    pub rr: Complex64,
}

pub fn step_coefficients(mode: &ModeSolution, well: &WellConfig, units: UnitSystem) -> Result<StepCoefficients> {
    let p = Complex64::new(mode.p, 0.0);
    let q = mode.q;
    if q.norm() == 0.0 || (p + q).norm() == 0.0 {
        return Err(Error::DegenerateChannel { energy: mode.energy, depth: well.depth });
    }
    let k = well.width / units.hbar;
    let rl = (p - q) / (p + q);
    let tl = 2.0 * p / (p + q);
    let tr = tl * (I * (p - q) * k).exp();
    let rr = rl * Complex64::from_polar(1.0, 2.0 * mode.p * k);
    Ok(StepCoefficients { tl, rl, tr, rr })
}

impl StepCoefficients {
    /// Round-trip factor `r_r r_l`.
    pub fn round_trip(&self) -> Complex64 {
        self.rr * self.rl
    }
}

/// Truncation of the scattering series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOrder {
    /// Keep terms `n = 0..=nmax`.
    Truncated(usize),
    /// Closed form `1/(1 - r_r r_l)`; only allowed outside the supercritical regime.
    Converged,
}

/// `Σ_{n=0}^{nmax} (r_r r_l)^n` by Horner's rule.
pub fn series_factor(rr: Complex64, rl: Complex64, nmax: usize) -> Complex64 {
    let x = rr * rl;
    let mut s = Complex64::new(1.0, 0.0);
    for _ in 0..nmax {
        s = s * x + 1.0;
    }
    s
}

/// Region amplitudes built from the scattering series.
///
/// Region 1 holds `B1 e^{-iqx/ħ}`, region 2 `A2 e^{ipx/ħ} + B2 e^{-ipx/ħ}`,
/// region 3 `A3 e^{iqx/ħ}`; `A1 = B3 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseAmplitudes {
    pub b1: Complex64,
    pub a2: Complex64,
    pub b2: Complex64,
    pub a3: Complex64,
    /// `A3 e^{iqL/ħ}`, the region-3 amplitude referenced to the right edge.
    /// Stays finite when `e^{-iqL/ħ}` alone would overflow for bound modes.
    pub a3_edge: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub order: SeriesOrder,
    pub series: Complex64,
}

impl MseAmplitudes {
    pub fn a1(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    pub fn b3(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    /// Stationary wavefunction (without the `e^{-iEt/ħ}` factor) at `x`.
    pub fn wavefunction(&self, mode: &ModeSolution, well: &WellConfig, units: UnitSystem, x: f64) -> Complex64 {
        let k = 1.0 / units.hbar;
        if x < 0.0 {
            self.b1 * (-I * mode.q * x * k).exp()
        } else if x > well.width {
            self.a3_edge * (I * mode.q * (x - well.width) * k).exp()
        } else {
            self.a2 * Complex64::from_polar(1.0, mode.p * x * k) + self.b2 * Complex64::from_polar(1.0, -mode.p * x * k)
        }
    }
}

pub fn mse_amplitudes(
    mode: &ModeSolution,
    well: &WellConfig,
    units: UnitSystem,
    alpha: Complex64,
    beta: Complex64,
    order: SeriesOrder,
) -> Result<MseAmplitudes> {
    let sc = step_coefficients(mode, well, units)?;
    let series = match order {
        SeriesOrder::Truncated(nmax) => series_factor(sc.rr, sc.rl, nmax),
        SeriesOrder::Converged => {
            let x = sc.round_trip();
            if mode.regime == Regime::Supercritical {
                return Err(Error::DivergentSeries { ratio: x.norm() });
            }
            let denom = Complex64::new(1.0, 0.0) - x;
            if denom.norm() == 0.0 {
                return Err(Error::DivergentSeries { ratio: x.norm() });
            }
            denom.inv()
        }
    };
    let right_moving = (alpha + beta * sc.rl) * series;
    let left_moving = (alpha * sc.rr + beta) * series;
    let edge_phase = Complex64::from_polar(1.0, mode.p * well.width / units.hbar);
    Ok(MseAmplitudes {
        b1: sc.tl * left_moving,
        a2: right_moving,
        b2: left_moving,
        a3: sc.tr * right_moving,
        a3_edge: sc.tl * edge_phase * right_moving,
        alpha,
        beta,
        order,
        series,
    })
}

/// Residuals of the four continuity conditions for `ψ` and `ψ'` at `x = 0`
/// and `x = L`, in the order `[ψ(0), ψ(L), ψ'(0), ψ'(L)]` (derivative rows
/// divided by `i/ħ`).
///
/// With the closed-form series these equal the launched waves themselves:
/// the `x = 0` rows are proportional to `α` and the `x = L` rows to `β`.
pub fn matching_residuals(amps: &MseAmplitudes, mode: &ModeSolution, well: &WellConfig, units: UnitSystem) -> [Complex64; 4] {
    edge_residuals(amps.a2, amps.b2, amps, mode, well, units)
}

/// Continuity residuals of each step on its own: at `x = 0` the wave
/// leaving the left step is `A2 - α`, at `x = L` the wave leaving the right
/// step is `B2 - β`. These vanish for the closed-form series.
pub fn step_matching_residuals(
    amps: &MseAmplitudes,
    mode: &ModeSolution,
    well: &WellConfig,
    units: UnitSystem,
) -> [Complex64; 4] {
    let left = edge_residuals(amps.a2 - amps.alpha, amps.b2, amps, mode, well, units);
    let right = edge_residuals(amps.a2, amps.b2 - amps.beta, amps, mode, well, units);
    [left[0], right[1], left[2], right[3]]
}

fn edge_residuals(
    a2: Complex64,
    b2: Complex64,
    amps: &MseAmplitudes,
    mode: &ModeSolution,
    well: &WellConfig,
    units: UnitSystem,
) -> [Complex64; 4] {
    let p = mode.p;
    let q = mode.q;
    let e_pos = Complex64::from_polar(1.0, p * well.width / units.hbar);
    let e_neg = e_pos.conj();
    [
        amps.b1 - (a2 + b2),
        a2 * e_pos + b2 * e_neg - amps.a3_edge,
        -q * amps.b1 - p * (a2 - b2),
        p * (a2 * e_pos - b2 * e_neg) - q * amps.a3_edge,
    ]
}

/// Truncation order sufficient up to `t_max`: the n-th round trip arrives
/// after roughly `2nL/v` with `v = p0 c² / E(p0)`.
pub fn causal_nmax(t_max: f64, p0: f64, well: &WellConfig, units: UnitSystem) -> usize {
    let v = p0 * units.c * units.c / energy(p0, well.mass, units);
    (t_max.max(0.0) * v / (2.0 * well.width)).ceil() as usize + 2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfiniteWellLevel {
    pub k: usize,
    pub p: f64,
    pub energy: f64,
    /// `mc² + k²π²ħ²/(2mL²)`.
    pub energy_nonrelativistic: f64,
}

/// Levels of the infinitely deep well, `p_k = kπħ/L`.
pub fn infinite_well_energies(well: &WellConfig, units: UnitSystem, kmax: usize) -> Vec<InfiniteWellLevel> {
    let rest = well.rest_energy(units);
    (1..=kmax)
        .map(|k| {
            let p = k as f64 * std::f64::consts::PI * units.hbar / well.width;
            InfiniteWellLevel {
                k,
                p,
                energy: energy(p, well.mass, units),
                energy_nonrelativistic: rest + p * p / (2.0 * well.mass),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub p: f64,
    pub abs_a2: f64,
    pub abs_b1: f64,
    pub abs_a3: f64,
    /// `None` flags a degenerate channel; the amplitudes are then zero.
    pub regime: Option<Regime>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceScan {
    pub depth: f64,
    pub nmax: usize,
    pub rows: Vec<ScanRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub p: f64,
    pub value: f64,
}

/// Amplitude magnitudes `|A2|`, `|B1|`, `|A3|` over a momentum grid.
/// Degenerate momenta are kept as flagged rows instead of failing the scan.
pub fn resonance_scan(
    well: &WellConfig,
    units: UnitSystem,
    p_grid: &[f64],
    alpha: Complex64,
    beta: Complex64,
    nmax: usize,
) -> Result<ResonanceScan> {
    let rows = p_grid
        .iter()
        .map(|&p| match ModeSolution::new(p, well, units) {
            Ok(mode) => {
                let amps = mse_amplitudes(&mode, well, units, alpha, beta, SeriesOrder::Truncated(nmax))?;
                Ok(ScanRow {
                    p,
                    abs_a2: amps.a2.norm(),
                    abs_b1: amps.b1.norm(),
                    abs_a3: amps.a3.norm(),
                    regime: Some(mode.regime),
                })
            }
            Err(Error::DegenerateChannel { .. }) => Ok(ScanRow { p, abs_a2: 0.0, abs_b1: 0.0, abs_a3: 0.0, regime: None }),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResonanceScan { depth: well.depth, nmax, rows })
}

impl ResonanceScan {
    pub fn flagged(&self) -> impl Iterator<Item = &ScanRow> {
        self.rows.iter().filter(|r| r.regime.is_none())
    }

    pub fn peaks_b1(&self) -> Vec<Peak> {
        self.peaks(|r| r.abs_b1)
    }

    /// Main lobe of each resonance `k`: the largest `|B1|` peak within half
    /// a spacing of `kπħ/L`, for every `k` whose window lies inside the scan.
    /// Weaker maxima in between are side lobes of the truncated sum.
    pub fn main_lobes(&self, width: f64, units: UnitSystem) -> Vec<(usize, Peak)> {
        let (Some(first), Some(last)) = (self.rows.first(), self.rows.last()) else {
            return vec![];
        };
        let spacing = std::f64::consts::PI * units.hbar / width;
        let peaks = self.peaks_b1();
        (1..)
            .map(|k| (k, k as f64 * spacing))
            .skip_while(|&(_, centre)| centre - 0.5 * spacing < first.p)
            .take_while(|&(_, centre)| centre + 0.5 * spacing <= last.p)
            .filter_map(|(k, centre)| {
                peaks
                    .iter()
                    .filter(|pk| (pk.p - centre).abs() < 0.5 * spacing)
                    .max_by(|a, b| a.value.total_cmp(&b.value))
                    .map(|pk| (k, *pk))
            })
            .collect()
    }

    pub fn peaks_a2(&self) -> Vec<Peak> {
        self.peaks(|r| r.abs_a2)
    }

    /// Interior local maxima, refined by a parabola through the three
    /// neighbouring samples. Flagged rows break the search.
    pub fn peaks(&self, value: impl Fn(&ScanRow) -> f64) -> Vec<Peak> {
        self.rows
            .windows(3)
            .filter(|w| w.iter().all(|r| r.regime.is_some()))
            .filter_map(|w| {
                let (y0, y1, y2) = (value(&w[0]), value(&w[1]), value(&w[2]));
                (y1 > y0 && y1 >= y2).then(|| parabolic_vertex((w[0].p, y0), (w[1].p, y1), (w[2].p, y2)))
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "p,absA2,absB1,absA3,V0,nmax")?;
        for r in self.rows.iter().filter(|r| r.regime.is_some()) {
            writeln!(out, "{},{},{},{},{},{}", r.p, r.abs_a2, r.abs_b1, r.abs_a3, self.depth, self.nmax)?;
        }
        Ok(())
    }
}

fn parabolic_vertex((x0, y0): (f64, f64), (x1, y1): (f64, f64), (x2, y2): (f64, f64)) -> Peak {
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature >= 0.0 {
        return Peak { p: x1, value: y1 };
    }
    // y = y1 + d (x - x1) + curvature (x - x1)^2 with d the slope at x1.
    let slope = d01 + curvature * (x1 - x0);
    let shift = (-slope / (2.0 * curvature)).clamp(x0 - x1, x2 - x1);
    Peak { p: x1 + shift, value: y1 + slope * shift + curvature * shift * shift }
}
