//! Bound states of a subcritical well.
//!
//! Works in the scaled variables `P = pL/(2ħ)` and `Q = qL/(2ħ)`. Even
//! states solve `P tan P = Q_r(P)`, odd states `-P cot P = Q_r(P)`, where
//! `Q_r` is the scaled decay constant `sqrt(m²c⁴ - (E - V0)²) L / (2ħc)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{energy, momentum_for_energy, outside_momentum, Regime, UnitSystem, WellConfig};
use crate::roots::{bisect, sign_change_brackets};

/// Grid density of the bracketing scan, in samples per π of `P`.
pub const SAMPLES_PER_PI: usize = 10_000;
/// Half-width of the window excluded around each tan/cot pole.
pub const POLE_WINDOW: f64 = 1e-3;
/// Bracket width at which bisection stops.
pub const BISECTION_WIDTH: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    /// 1-based position in the energy-ordered table.
    pub k: usize,
    pub parity: Parity,
    /// Scaled momentum `pL/(2ħ)`.
    pub scaled_p: f64,
    pub p: f64,
    pub energy: f64,
    /// Decay constant, `q = i qr`.
    pub qr: f64,
    /// `|(q+p)² e^{-ipL/ħ} - (q-p)² e^{ipL/ħ}|` at the root.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateTable {
    pub well: WellConfig,
    pub states: Vec<BoundState>,
}

impl BoundStateTable {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,parity,P,p,E,qr,residual")?;
        for s in &self.states {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.k, s.parity, s.scaled_p, s.p, s.energy, s.qr, s.residual
            )?;
        }
        Ok(())
    }
}

/// One row of the graphical-solution plot: the two branch curves and the
/// circle-like curve they intersect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub scaled_p: f64,
    pub qa: f64,
    pub qb: f64,
    pub qr: f64,
}

pub fn write_curves_csv<W: Write>(rows: &[CurveRow], mut out: W) -> io::Result<()> {
    writeln!(out, "P,Qa,Qb,Qr")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.scaled_p, r.qa, r.qb, r.qr)?;
    }
    Ok(())
}

fn scale(well: &WellConfig, units: UnitSystem) -> f64 {
    well.width / (2.0 * units.hbar)
}

/// Range `[P_lo, P_hi]` on which `|E - V0| <= mc²`, or `None` if empty.
pub fn bound_domain(well: &WellConfig, units: UnitSystem) -> Option<(f64, f64)> {
    let rest = well.rest_energy(units);
    if well.depth <= 0.0 {
        return None;
    }
    let e_lo = rest.max(well.depth - rest);
    let e_hi = well.depth + rest;
    let s = scale(well, units);
    let lo = momentum_for_energy(e_lo, well.mass, units) * s;
    let hi = momentum_for_energy(e_hi, well.mass, units) * s;
    (hi > lo).then_some((lo, hi))
}

/// Scaled decay constant `Q_r(P)` of the region outside the well.
pub fn circle_curve(scaled_p: f64, well: &WellConfig, units: UnitSystem) -> Result<f64> {
    if !(scaled_p.is_finite() && scaled_p >= 0.0) {
        return Err(Error::OutOfDomain(format!("P must be >= 0, got {scaled_p}")));
    }
    let s = scale(well, units);
    let p = scaled_p / s;
    let rest = well.rest_energy(units);
    let shifted = energy(p, well.mass, units) - well.depth;
    let arg = (rest - shifted) * (rest + shifted);
    if arg < -1e-12 * rest * rest {
        return Err(Error::OutOfDomain(format!(
            "(E - V0)^2 exceeds m^2c^4 at P = {scaled_p}"
        )));
    }
    Ok(arg.max(0.0).sqrt() / units.c * s)
}

fn even_branch(p: f64) -> f64 {
    p * p.tan()
}

fn odd_branch(p: f64) -> f64 {
    if p == 0.0 {
        -1.0
    } else {
        -p / p.tan()
    }
}

/// Determinant of the homogeneous matching system with `q = i qr`.
pub fn determinant(p: f64, qr: f64, well: &WellConfig, units: UnitSystem) -> Complex64 {
    let q = Complex64::new(0.0, qr);
    let p_c = Complex64::new(p, 0.0);
    let phase = Complex64::from_polar(1.0, p * well.width / units.hbar);
    (q + p_c).powi(2) * phase.conj() - (q - p_c).powi(2) * phase
}

/// Ratio `A2/B2` spanning the null space of the in-well matching system at
/// momentum `p` (taken from whichever row is better conditioned).
pub fn standing_wave_ratio(p: f64, qr: f64, well: &WellConfig, units: UnitSystem) -> Complex64 {
    let q = Complex64::new(0.0, qr);
    let p_c = Complex64::new(p, 0.0);
    let phase = Complex64::from_polar(1.0, p * well.width / units.hbar);
    let (m11, m12) = (q + p_c, q - p_c);
    let (m21, m22) = ((q - p_c) * phase, (q + p_c) * phase.conj());
    if m11.norm() + m12.norm() >= m21.norm() + m22.norm() {
        -m12 / m11
    } else {
        -m22 / m21
    }
}

/// Subintervals of `[lo, hi]` between consecutive poles at `offset + kπ`.
fn pole_free_intervals(lo: f64, hi: f64, offset: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![lo];
    let mut k = ((lo - offset) / PI).floor() as i64;
    loop {
        let pole = offset + k as f64 * PI;
        if pole >= hi {
            break;
        }
        if pole > lo {
            edges.push(pole);
        }
        k += 1;
    }
    edges.push(hi);
    edges.windows(2).map(|w| (w[0], w[1])).collect()
}

fn sample(a: f64, b: f64) -> Vec<f64> {
    let step = PI / SAMPLES_PER_PI as f64;
    let n = ((b - a) / step).ceil().max(1.0) as usize;
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

fn refine<F: Fn(f64) -> f64>(lo: f64, hi: f64, g: &F, tol: f64) -> Result<Option<f64>> {
    let Some(root) = bisect(lo, hi, g, BISECTION_WIDTH) else {
        return Ok(None);
    };
    if g(root).abs() < tol {
        return Ok(Some(root));
    }
    let root = bisect(lo, hi, g, 0.0).unwrap_or(root);
    let residual = g(root).abs();
    if residual < tol {
        Ok(Some(root))
    } else {
        Err(Error::RootNotConverged { lo, hi, tol, residual })
    }
}

/// All bound states of the well, ordered by energy.
///
/// Roots of `P tan P - Q_r` and `-P cot P - Q_r` are bracketed on a uniform
/// grid between the branch poles and refined by bisection. A well that binds
/// nothing yields an empty table.
pub fn find_bound_states(well: &WellConfig, units: UnitSystem, tol: f64) -> Result<BoundStateTable> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }
    let Some((lo, hi)) = bound_domain(well, units) else {
        return Ok(BoundStateTable { well: *well, states: vec![] });
    };
    let s = scale(well, units);
    let circle = |x: f64| circle_curve(x, well, units).unwrap_or(0.0);
    let qr_max = well.rest_energy(units) / units.c * s;

    let mut roots: Vec<(f64, Parity)> = vec![];
    for (parity, offset, branch) in [
        (Parity::Even, FRAC_PI_2, even_branch as fn(f64) -> f64),
        (Parity::Odd, 0.0, odd_branch as fn(f64) -> f64),
    ] {
        let g = |x: f64| branch(x) - circle(x);
        for (a, b) in pole_free_intervals(lo, hi, offset) {
            // Near a pole the branch exceeds any attainable Q_r once the
            // distance drops below P/Q_r, so tighten the window for very wide wells.
            let window = POLE_WINDOW.min(0.1 * b.max(FRAC_PI_2) / (qr_max + 1.0));
            let a = if a > lo || (a == 0.0 && offset == 0.0) { a + window } else { a };
            let b = if b < hi { b - window } else { b };
            if b <= a {
                continue;
            }
            for (x0, x1) in sign_change_brackets(&sample(a, b), g) {
                if let Some(root) = refine(x0, x1, &g, tol)? {
                    roots.push((root, parity));
                }
            }
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));

    let states = roots
        .into_iter()
        .enumerate()
        .map(|(i, (scaled_p, parity))| {
            let p = scaled_p / s;
            let qr = circle(scaled_p) / s;
            BoundState {
                k: i + 1,
                parity,
                scaled_p,
                p,
                energy: energy(p, well.mass, units),
                qr,
                residual: determinant(p, qr, well, units).norm(),
            }
        })
        .collect();
    Ok(BoundStateTable { well: *well, states })
}

/// Distance of `r_l` from `±e^{-ipL/ħ}`, minimised over the sign.
///
/// Zero exactly at bound states: even states match `+`, odd states `-`.
pub fn mse_bound_state_condition(p: f64, well: &WellConfig, units: UnitSystem) -> Result<f64> {
    let (q, regime) = outside_momentum(p, well, units)?;
    if regime != Regime::Bound {
        return Err(Error::InvalidParameter(format!(
            "p = {p} is in the {regime} regime, not bound"
        )));
    }
    let p_c = Complex64::new(p, 0.0);
    let rl = (p_c - q) / (p_c + q);
    let phase = Complex64::from_polar(1.0, -p * well.width / units.hbar);
    Ok((rl - phase).norm().min((rl + phase).norm()))
}

/// Curves of the graphical solution sampled at `grid`, skipping points
/// within `pole_window` of a tan/cot pole and points outside the bound domain.
pub fn intersection_curves(
    well: &WellConfig,
    units: UnitSystem,
    grid: &[f64],
    pole_window: f64,
) -> Vec<CurveRow> {
    let near_pole = |x: f64| {
        let k_tan = ((x - FRAC_PI_2) / PI).round();
        let k_cot = (x / PI).round();
        (x - FRAC_PI_2 - k_tan * PI).abs() < pole_window || (k_cot >= 1.0 && (x - k_cot * PI).abs() < pole_window)
    };
    grid.iter()
        .filter(|x| x.is_finite() && !near_pole(**x))
        .filter_map(|&x| {
            let qr = circle_curve(x, well, units).ok()?;
            Some(CurveRow { scaled_p: x, qa: even_branch(x), qb: odd_branch(x), qr })
        })
        .collect()
}
