use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use kgwell::boundstates::{bound_domain, find_bound_states, intersection_curves, write_curves_csv, POLE_WINDOW};
use kgwell::fdtd::{FdtdConfig, FdtdSolver};
use kgwell::mse::{resonance_scan, Peak};
use kgwell::snapshot::{compare, trapezoid, SnapshotTable};
use kgwell::wavepacket::{FieldGrid, Wavepacket};
use kgwell::WellConfig;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::write_atomic;

/// Why a command stopped: bad input (exit 2) or a failure while running (exit 3).
#[derive(Debug)]
pub enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        use kgwell::Error as E;
        match e.downcast_ref::<E>() {
            Some(E::InvalidParameter(_) | E::Config(_) | E::OutOfDomain(_) | E::QuadratureUnderflow { .. }) => {
                Failure::Invalid(e)
            }
            _ => Failure::Runtime(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

/// Marks errors from configuration handling as invalid input.
fn invalid<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Invalid)
}

pub type Outcome = Result<bool, Failure>;

pub fn bound_states(cfg: &RunConfig, out: &Path) -> Outcome {
    let units = invalid(cfg.units())?;
    let well = invalid(cfg.well())?;
    let opts = cfg.bound_states();
    let table = find_bound_states(&well, units, opts.tol).map_err(anyhow::Error::from)?;
    let curves = match bound_domain(&well, units) {
        Some((lo, hi)) if opts.curve_points >= 2 => {
            let n = opts.curve_points;
            let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
            intersection_curves(&well, units, &grid, POLE_WINDOW)
        }
        _ => vec![],
    };
    write_atomic(out, "bound_states.csv", |w| table.write_csv(w))?;
    write_atomic(out, "curves.csv", |w| write_curves_csv(&curves, w))?;
    println!("{} bound states for V0 = {}, L = {}", table.len(), well.depth, well.width);
    for s in &table.states {
        println!("  k={} {} p={:.12} E={:.12}", s.k, s.parity, s.p, s.energy);
    }
    Ok(true)
}

#[derive(Debug, Clone)]
struct ScanSummary {
    depth: f64,
    rows: usize,
    flagged: usize,
    peak_b1: f64,
    lobes: Vec<(usize, Peak)>,
}

pub fn scan(cfg: &RunConfig, out: &Path) -> Outcome {
    let units = invalid(cfg.units())?;
    let s = invalid(cfg.scan())?;
    let depths = invalid(cfg.scan_depths())?;
    let (alpha, beta) = invalid(cfg.scan_alpha_beta())?;
    let base = invalid(cfg.well())?;
    let wells = invalid(
        depths.iter().map(|&d| Ok(WellConfig::new(d, base.width, base.mass)?)).collect::<anyhow::Result<Vec<_>>>(),
    )?;
    let n = s.points;
    let p_grid: Vec<f64> = (0..n).map(|i| s.p_min + (s.p_max - s.p_min) * i as f64 / (n - 1) as f64).collect();

    let mut summary = vec![];
    for well in &wells {
        let scan = resonance_scan(well, units, &p_grid, alpha, beta, s.nmax).map_err(anyhow::Error::from)?;
        write_atomic(out, &format!("scan_V0_{}.csv", well.depth), |w| scan.write_csv(w))?;
        summary.push(ScanSummary {
            depth: well.depth,
            rows: scan.rows.len(),
            flagged: scan.flagged().count(),
            peak_b1: scan.peaks_b1().iter().map(|p| p.value).fold(0.0, f64::max),
            lobes: scan.main_lobes(well.width, units),
        });
    }
    summary.sort_by(|a, b| a.depth.total_cmp(&b.depth));
    write_atomic(out, "scan_report.csv", |w| {
        writeln!(w, "V0,nmax,rows,flagged,max_peak_absB1")?;
        for r in &summary {
            writeln!(w, "{},{},{},{},{}", r.depth, s.nmax, r.rows, r.flagged, r.peak_b1)?;
        }
        Ok(())
    })?;
    write_atomic(out, "resonances.csv", |w| {
        writeln!(w, "V0,k,p,p_over_k_pi_hbar_per_L,absB1")?;
        for r in &summary {
            for (k, peak) in &r.lobes {
                let centre = *k as f64 * std::f64::consts::PI * units.hbar / base.width;
                writeln!(w, "{},{k},{},{},{}", r.depth, peak.p, peak.p / centre, peak.value)?;
            }
        }
        Ok(())
    })?;
    for r in &summary {
        let heights: Vec<String> = r.lobes.iter().map(|(k, pk)| format!("k={k} {:.4e}", pk.value)).collect();
        println!("V0 = {}: |B1| main lobes [{}] ({} flagged rows)", r.depth, heights.join(", "), r.flagged);
    }
    if summary.len() > 1 {
        // Compare lobe by lobe over the resonances every depth resolved. The
        // global maximum is no use: it sits on the pole at E = V0/2.
        let shared: Vec<usize> = summary[0]
            .lobes
            .iter()
            .map(|l| l.0)
            .filter(|k| summary.iter().all(|r| r.lobes.iter().any(|l| l.0 == *k)))
            .collect();
        let height = |r: &ScanSummary, k: usize| r.lobes.iter().find(|l| l.0 == k).map_or(0.0, |l| l.1.value);
        let decreasing = !shared.is_empty()
            && shared.iter().all(|&k| summary.windows(2).all(|w| height(&w[1], k) < height(&w[0], k)));
        println!(
            "peak height strictly decreasing with V0: {} (resonances k = {:?})",
            if decreasing { "yes" } else { "no" },
            shared
        );
    }
    Ok(true)
}

/// The configured packet, normalised on the output grid unless disabled.
fn packet(cfg: &RunConfig, x: &[f64]) -> Result<Wavepacket, Failure> {
    let spec = invalid(cfg.wavepacket())?;
    let (well, units) = (invalid(cfg.well())?, invalid(cfg.units())?);
    let mut packet = Wavepacket::new(spec, well, units).map_err(|e| Failure::Invalid(e.into()))?;
    if cfg.normalize() {
        packet.normalize(x).map_err(anyhow::Error::from)?;
    }
    Ok(packet)
}

fn write_snapshots(out: &Path, table: &SnapshotTable, well: &WellConfig) -> Result<(), Failure> {
    write_atomic(out, "snapshots.csv", |w| table.write_csv(w))?;
    write_atomic(out, "summary.csv", |w| table.write_summary_csv(w, well))?;
    for i in 0..table.t.len() {
        let [q1, q2, q3] = table.region_charges(i, well);
        println!(
            "t = {:>8}: total {:+.6} regions [{:+.6}, {:+.6}, {:+.6}]",
            table.t[i],
            table.total_charge(i),
            q1,
            q2,
            q3
        );
    }
    Ok(())
}

pub fn evolve(cfg: &RunConfig, out: &Path) -> Outcome {
    let well = invalid(cfg.well())?;
    let x = invalid(cfg.x_grid())?;
    let times = invalid(cfg.grid())?.times.clone();
    let packet = packet(cfg, &x)?;
    let spec = packet.spec();
    eprintln!("nmax = {}, quadrature {} nodes on [{}, {}]", spec.nmax, spec.quad.n_nodes, spec.quad.p_min, spec.quad.p_max);
    let field = packet.evolve_grid(&x, &times);
    write_snapshots(out, &field.to_table(), &well)?;
    Ok(true)
}

/// Position of the output grid inside a lattice: first index and stride.
fn sublattice(lattice: &FdtdConfig, x: &[f64], grid_dx: f64) -> anyhow::Result<(usize, usize)> {
    let stride = grid_dx / lattice.dx;
    let start = (x[0] - lattice.x_left) / lattice.dx;
    let whole = |v: f64| (v - v.round()).abs() < 1e-6 && v.round() >= 0.0;
    if !whole(stride) || stride.round() < 1.0 || !whole(start) {
        bail!(
            "output grid (x_min = {}, dx = {grid_dx}) does not lie on the lattice (x_left = {}, dx = {})",
            x[0],
            lattice.x_left,
            lattice.dx
        );
    }
    let (start, stride) = (start.round() as usize, stride.round() as usize);
    if start + stride * (x.len() - 1) >= lattice.n_nodes() {
        bail!("output grid extends beyond the lattice [{}, {}]", lattice.x_left, lattice.x_right);
    }
    Ok((start, stride))
}

struct FdtdRun {
    cfg: FdtdConfig,
    /// Full-lattice snapshots.
    field: FieldGrid,
    initial_charge: f64,
}

fn run_fdtd(cfg: &RunConfig, packet: &Wavepacket, dx: f64, times: &[f64]) -> Result<FdtdRun, Failure> {
    let lattice = invalid(cfg.fdtd_config(dx))?;
    let solver = FdtdSolver::new(lattice, cfg.well().map_err(Failure::Invalid)?, cfg.units().map_err(Failure::Invalid)?)
        .map_err(anyhow::Error::from)?;
    let mut state = solver.init_from_wavepacket(packet);
    let initial_charge = solver.total_charge(&state);
    let field = solver.run(&mut state, times).map_err(anyhow::Error::from)?;
    Ok(FdtdRun { cfg: lattice, field, initial_charge })
}

pub fn fdtd(cfg: &RunConfig, out: &Path, convergence: bool) -> Outcome {
    let well = invalid(cfg.well())?;
    let x = invalid(cfg.x_grid())?;
    let grid = invalid(cfg.grid())?.clone();
    let section = invalid(cfg.fdtd_section())?.clone();
    let lattice = invalid(cfg.fdtd_config(section.dx))?;
    invalid(sublattice(&lattice, &x, grid.dx))?;
    if convergence {
        if section.convergence_dx.len() < 2 {
            return Err(Failure::Invalid(anyhow::anyhow!("--convergence needs at least two [fdtd] convergence_dx entries")));
        }
        for &h in &section.convergence_dx {
            let l = invalid(cfg.fdtd_config(h))?;
            invalid(sublattice(&l, &x, grid.dx))?;
        }
    }
    let packet = packet(cfg, &x)?;

    let run = run_fdtd(cfg, &packet, section.dx, &grid.times)?;
    let (start, stride) = invalid(sublattice(&run.cfg, &x, grid.dx))?;
    let mut sampled = run.field.strided(start, stride, x.len());
    sampled.x = x.clone();
    write_snapshots(out, &sampled.to_table(), &well)?;
    let charges: Vec<f64> = run.field.rho.iter().map(|r| r.iter().sum::<f64>() * run.cfg.dx).collect();
    write_atomic(out, "charge_drift.csv", |w| {
        writeln!(w, "t,lattice_charge,relative_drift")?;
        for (t, q) in grid.times.iter().zip(&charges) {
            writeln!(w, "{t},{q},{}", (q - run.initial_charge) / run.initial_charge)?;
        }
        Ok(())
    })?;
    let worst = charges.iter().map(|q| ((q - run.initial_charge) / run.initial_charge).abs()).fold(0.0, f64::max);
    println!(
        "lattice dx = {}, dt = {}, {} nodes, {} steps; max relative charge drift {worst:.3e}",
        run.cfg.dx,
        run.cfg.dt,
        run.cfg.n_nodes(),
        run.cfg.n_steps
    );

    if convergence {
        let last = grid.times.len() - 1;
        let t_last = grid.times[last];
        let mut rows: Vec<(FdtdConfig, Vec<f64>)> = vec![];
        for &h in &section.convergence_dx {
            let r = run_fdtd(cfg, &packet, h, &[t_last])?;
            let (start, stride) = invalid(sublattice(&r.cfg, &x, grid.dx))?;
            rows.push((r.cfg, r.field.strided(start, stride, x.len()).rho.swap_remove(0)));
        }
        let diffs: Vec<f64> = rows
            .windows(2)
            .map(|w| {
                let d: Vec<f64> = w[0].1.iter().zip(&w[1].1).map(|(a, b)| (a - b).powi(2)).collect();
                trapezoid(&x, &d).sqrt()
            })
            .collect();
        write_atomic(out, "convergence.csv", |w| {
            writeln!(w, "dx,dt,t,l2_diff_to_next,ratio")?;
            for (i, d) in diffs.iter().enumerate() {
                let ratio = if i > 0 { format!("{}", diffs[i - 1] / d) } else { String::new() };
                writeln!(w, "{},{},{t_last},{d},{ratio}", rows[i].0.dx, rows[i].0.dt)?;
            }
            Ok(())
        })?;
        for (i, d) in diffs.iter().enumerate() {
            let order = if i > 0 { format!(", ratio {:.3} (order {:.2})", diffs[i - 1] / d, (diffs[i - 1] / d).log2()) } else { String::new() };
            println!("dx {} -> {}: |rho diff|_2 = {d:.3e}{order}", rows[i].0.dx, rows[i + 1].0.dx);
        }
    }
    Ok(true)
}

#[derive(Debug, Serialize)]
struct SnapshotReport {
    t: f64,
    l2_rel: f64,
    centroid_diff: f64,
    charge_diff: f64,
}

#[derive(Debug, Serialize)]
struct CompareReport {
    snapshots: Vec<SnapshotReport>,
    pass: bool,
}

fn read_run(path: &Path) -> anyhow::Result<SnapshotTable> {
    let file: PathBuf = if path.is_dir() { path.join("snapshots.csv") } else { path.to_path_buf() };
    let f = std::fs::File::open(&file).with_context(|| format!("opening {}", file.display()))?;
    SnapshotTable::read_csv(std::io::BufReader::new(f)).with_context(|| format!("reading {}", file.display()))
}

/// Compares run `a` against the reference run `b`.
pub fn compare_runs(cfg: Option<&RunConfig>, a: &Path, b: &Path, out: Option<&Path>) -> Outcome {
    let limits = cfg.map(|c| c.compare()).unwrap_or_default();
    let ta = invalid(read_run(a))?;
    let tb = invalid(read_run(b))?;
    let rows = compare(&ta, &tb).map_err(|e| Failure::Invalid(e.into()))?;
    let within = |v: f64, limit: Option<f64>| limit.is_none_or(|l| v <= l);
    let pass = rows.iter().all(|r| {
        r.l2_rel.is_finite() && r.l2_rel <= limits.l2_max && within(r.centroid_diff, limits.centroid_max) && within(r.charge_diff, limits.charge_max)
    });
    let report = CompareReport {
        snapshots: rows
            .iter()
            .map(|r| SnapshotReport { t: r.t, l2_rel: r.l2_rel, centroid_diff: r.centroid_diff, charge_diff: r.charge_diff })
            .collect(),
        pass,
    };
    let json = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?;
    if let Some(dir) = out {
        write_atomic(dir, "compare.json", |w| writeln!(w, "{json}"))?;
    }
    println!("{json}");
    Ok(pass)
}
