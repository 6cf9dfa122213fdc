//! Snapshot CSV shared by the semi-analytic and finite-difference solvers,
//! plus the integrals and comparison metrics computed from it.

use std::io::{self, BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{Region, WellConfig};

/// First line of every snapshot file.
pub const SNAPSHOT_SCHEMA: &str = "# kgwell-snapshot v1";
pub const SNAPSHOT_HEADER: &str = "t,x,re_psi,im_psi,rho";
pub const SUMMARY_HEADER: &str = "t,total_charge,charge_region1,charge_region2,charge_region3";

/// Field samples on a space-time grid, indexed `[t][x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotTable {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub psi: Vec<Vec<Complex64>>,
    pub rho: Vec<Vec<f64>>,
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

/// Charge in each region. Each region is integrated from its own samples
/// (nodes lying exactly on an edge are skipped), with the piecewise-linear
/// interpolant extrapolated up to the edges, so the jump of `ρ` across an
/// edge does not leak into its neighbours.
pub fn region_charges(x: &[f64], rho: &[f64], well: &WellConfig) -> [f64; 3] {
    let mut out = [0.0; 3];
    let bounds = [(f64::NEG_INFINITY, 0.0), (0.0, well.width), (well.width, f64::INFINITY)];
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        let first = x.partition_point(|&xi| xi <= lo);
        let end = x.partition_point(|&xi| xi < hi);
        if first >= end {
            continue;
        }
        let (xs, ys) = (&x[first..end], &rho[first..end]);
        let mut q = trapezoid(xs, ys);
        let n = xs.len();
        if n >= 2 {
            if lo.is_finite() {
                let slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
                let d = xs[0] - lo;
                q += d * (ys[0] - 0.5 * slope * d);
            }
            if hi.is_finite() {
                let slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
                let d = hi - xs[n - 1];
                q += d * (ys[n - 1] + 0.5 * slope * d);
            }
        }
        out[k] = q;
    }
    out
}

/// Charge-weighted mean position.
pub fn centroid(x: &[f64], rho: &[f64]) -> f64 {
    let xr: Vec<f64> = x.iter().zip(rho).map(|(a, b)| a * b).collect();
    trapezoid(x, &xr) / trapezoid(x, rho)
}

/// Charge-weighted mean position restricted to one region.
pub fn region_centroid(x: &[f64], rho: &[f64], well: &WellConfig, region: Region) -> f64 {
    let masked: Vec<f64> = x.iter().zip(rho).map(|(&xi, &r)| if well.region(xi) == region { r } else { 0.0 }).collect();
    centroid(x, &masked)
}

impl SnapshotTable {
    pub fn total_charge(&self, t_index: usize) -> f64 {
        trapezoid(&self.x, &self.rho[t_index])
    }

    pub fn region_charges(&self, t_index: usize, well: &WellConfig) -> [f64; 3] {
        region_charges(&self.x, &self.rho[t_index], well)
    }

    pub fn centroid(&self, t_index: usize) -> f64 {
        centroid(&self.x, &self.rho[t_index])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{SNAPSHOT_SCHEMA}")?;
        writeln!(w, "{SNAPSHOT_HEADER}")?;
        for (ti, &t) in self.t.iter().enumerate() {
            for (xi, &x) in self.x.iter().enumerate() {
                let psi = self.psi[ti][xi];
                writeln!(w, "{t:e},{x:e},{:e},{:e},{:e}", psi.re, psi.im, self.rho[ti][xi])?;
            }
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut w: W, well: &WellConfig) -> io::Result<()> {
        writeln!(w, "{SUMMARY_HEADER}")?;
        for (ti, &t) in self.t.iter().enumerate() {
            let [r1, r2, r3] = self.region_charges(ti, well);
            writeln!(w, "{t:e},{:e},{r1:e},{r2:e},{r3:e}", self.total_charge(ti))?;
        }
        Ok(())
    }

    /// Parses a file written by [`SnapshotTable::write_csv`]. Rows must be
    /// grouped by time with the same `x` grid at every time.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Config(format!("snapshot file ends before {what}")))?
                .map_err(|e| Error::Config(e.to_string()))
        };
        let schema = next("schema line")?;
        if schema.trim() != SNAPSHOT_SCHEMA {
            return Err(Error::Config(format!("unsupported snapshot schema {schema:?}")));
        }
        let header = next("header")?;
        if header.trim() != SNAPSHOT_HEADER {
            return Err(Error::Config(format!("unexpected snapshot header {header:?}")));
        }
        let mut table = SnapshotTable { x: Vec::new(), t: Vec::new(), psi: Vec::new(), rho: Vec::new() };
        let mut xs_current: Vec<f64> = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Config(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("row {}: {e}", n + 3)))?;
            let [t, x, re, im, rho] = fields[..] else {
                return Err(Error::Config(format!("row {}: expected 5 columns", n + 3)));
            };
            if table.t.last() != Some(&t) {
                if !table.t.is_empty() {
                    table.check_row(&xs_current)?;
                }
                table.t.push(t);
                table.psi.push(Vec::new());
                table.rho.push(Vec::new());
                xs_current.clear();
            }
            xs_current.push(x);
            table.psi.last_mut().unwrap().push(Complex64::new(re, im));
            table.rho.last_mut().unwrap().push(rho);
        }
        if table.t.is_empty() {
            return Err(Error::Config("snapshot file has no rows".into()));
        }
        table.check_row(&xs_current)?;
        Ok(table)
    }

    fn check_row(&mut self, xs: &[f64]) -> Result<()> {
        if self.x.is_empty() {
            self.x = xs.to_vec();
        } else if self.x != xs {
            return Err(Error::Config("x grid differs between snapshot times".into()));
        }
        Ok(())
    }
}

/// Agreement between two snapshot sets at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotComparison {
    pub t: f64,
    /// `‖ρ_a - ρ_b‖₂ / ‖ρ_b‖₂`.
    pub l2_rel: f64,
    pub centroid_diff: f64,
    pub charge_diff: f64,
}

/// Compares `a` against the reference `b`; grids and times must coincide.
pub fn compare(a: &SnapshotTable, b: &SnapshotTable) -> Result<Vec<SnapshotComparison>> {
    let same = |u: &[f64], v: &[f64]| {
        u.len() == v.len() && u.iter().zip(v).all(|(p, q)| (p - q).abs() <= 1e-9 * (1.0 + q.abs()))
    };
    if !same(&a.x, &b.x) {
        return Err(Error::Config("snapshot x grids differ".into()));
    }
    if !same(&a.t, &b.t) {
        return Err(Error::Config("snapshot times differ".into()));
    }
    Ok((0..a.t.len())
        .map(|i| {
            let diff: Vec<f64> = a.rho[i].iter().zip(&b.rho[i]).map(|(p, q)| (p - q) * (p - q)).collect();
            let norm: Vec<f64> = b.rho[i].iter().map(|q| q * q).collect();
            SnapshotComparison {
                t: b.t[i],
                l2_rel: (trapezoid(&b.x, &diff) / trapezoid(&b.x, &norm)).sqrt(),
                centroid_diff: (a.centroid(i) - b.centroid(i)).abs(),
                charge_diff: (a.total_charge(i) - b.total_charge(i)).abs(),
            }
        })
        .collect())
}
