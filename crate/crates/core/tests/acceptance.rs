//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL`
//! line (run with `--nocapture` to see them) and fails if its criterion does.

use std::f64::consts::PI;
use std::time::Instant;

use kgwell::boundstates::{find_bound_states, mse_bound_state_condition};
use kgwell::fdtd::{FdtdConfig, FdtdSolver};
use kgwell::kinematics::energy;
use kgwell::mse::{
    infinite_well_energies, matching_residuals, mse_amplitudes, resonance_scan, step_coefficients,
    step_matching_residuals, SeriesOrder,
};
use kgwell::snapshot::{compare, trapezoid};
use kgwell::wavepacket::{FieldGrid, Wavepacket, WavepacketSpec};
use kgwell::{ModeSolution, Regime, UnitSystem, WellConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: UnitSystem = UnitSystem::NATURAL;
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn report(n: u32, pass: bool, start: Instant, detail: &str) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} ({:.1} s) {detail}", start.elapsed().as_secs_f64());
    pass
}

fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).round() as usize;
    (0..=n).map(|i| a + i as f64 * step).collect()
}

/// Momentum drawn so that the mode lands in `regime` for the given depth.
fn sample_momentum(rng: &mut ChaCha8Rng, depth: f64, regime: Regime) -> Option<f64> {
    let (lo, hi) = match regime {
        Regime::Bound => (1f64.max(depth - 1.0), depth + 1.0),
        Regime::Supercritical => (1.0, depth - 1.0),
        Regime::OpenChannel => (depth + 1.0, depth + 40.0),
    };
    if hi <= lo {
        return None;
    }
    let e: f64 = rng.gen_range(lo..hi);
    let p = (e * e - 1.0).sqrt();
    (p > 1e-3).then_some(p)
}

fn modes(rng: &mut ChaCha8Rng, regime: Regime, count: usize) -> Vec<(WellConfig, ModeSolution)> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let depth = match regime {
            Regime::Supercritical => rng.gen_range(2.05..120.0),
            _ => rng.gen_range(0.0..20.0),
        };
        let well = WellConfig::new(depth, rng.gen_range(0.5..50.0), 1.0).unwrap();
        let Some(p) = sample_momentum(rng, depth, regime) else { continue };
        match ModeSolution::new(p, &well, N) {
            Ok(m) if m.regime == regime => out.push((well, m)),
            _ => {}
        }
    }
    out
}

#[test]
fn criterion_01_step_coefficient_identities() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_rr: f64 = 0.0;
    let mut worst_flux: f64 = 0.0;
    let mut samples = 0;
    for regime in [Regime::Bound, Regime::Supercritical, Regime::OpenChannel] {
        for (well, m) in modes(&mut rng, regime, 334) {
            samples += 1;
            let sc = step_coefficients(&m, &well, N).unwrap();
            let rr = sc.rl * Complex64::from_polar(1.0, 2.0 * m.p * well.width / N.hbar);
            worst_rr = worst_rr.max((sc.rr - rr).norm() / rr.norm());
            if m.q.im == 0.0 {
                // Relative to the size of the terms: p(1 - r_l²) cancels
                // when |q| and p are far apart.
                let lhs = m.p * (ONE - sc.rl * sc.rl);
                let rhs = m.q * sc.tl * sc.tl;
                worst_flux = worst_flux.max((lhs - rhs).norm() / (m.p * (1.0 + sc.rl.norm_sqr())));
            }
        }
    }
    let pass = worst_rr < 1e-13 && worst_flux < 1e-13 && start.elapsed().as_secs_f64() < 1.0;
    assert!(report(
        1,
        pass,
        start,
        &format!("{samples} samples, rr identity {worst_rr:.1e}, flux identity {worst_flux:.1e} (limit 1e-13)")
    ));
}

#[test]
fn criterion_02_superradiance() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut min_super = f64::INFINITY;
    for (well, m) in modes(&mut rng, Regime::Supercritical, 1000) {
        let sc = step_coefficients(&m, &well, N).unwrap();
        min_super = min_super.min(sc.rl.norm().min(sc.rr.norm()));
    }
    let mut worst_bound: f64 = 0.0;
    for (well, m) in modes(&mut rng, Regime::Bound, 1000) {
        let sc = step_coefficients(&m, &well, N).unwrap();
        worst_bound = worst_bound.max((sc.rl.norm() - 1.0).abs());
    }
    let pass = min_super > 1.0 && worst_bound < 1e-12 && start.elapsed().as_secs_f64() < 1.0;
    assert!(report(
        2,
        pass,
        start,
        &format!("min(|rl|,|rr|) supercritical = {min_super:.6}, max ||rl|-1| bound = {worst_bound:.1e}")
    ));
}

/// Zeros of the matching determinant found by scanning its sign on `points`
/// uniform momenta. With `q = i q_r` the determinant is `2i Im[(p + i q_r)² e^{-ipL}]`.
fn brute_force_roots(well: &WellConfig, points: usize) -> Vec<f64> {
    let p_hi = ((well.depth + 1.0).powi(2) - 1.0).sqrt();
    let d = |p: f64| {
        let qr = (1.0 - (energy(p, 1.0, N) - well.depth).powi(2)).max(0.0).sqrt();
        (Complex64::new(p, qr).powi(2) * Complex64::from_polar(1.0, -p * well.width)).im
    };
    let ps: Vec<f64> = (1..=points).map(|i| p_hi * i as f64 / points as f64).collect();
    let mut roots = vec![];
    for w in ps.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (d(a), d(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if d(a) * d(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

const CRITERION_3_DEPTHS: [f64; 5] = [0.2, 0.5, 1.0, 1.5, 1.9];

#[test]
fn criterion_03_bound_state_oracle() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = vec![];
    for depth in CRITERION_3_DEPTHS {
        let well = WellConfig::new(depth, 10.0, 1.0).unwrap();
        let table = find_bound_states(&well, N, 1e-12).unwrap();
        let brute = brute_force_roots(&well, 1_000_000);
        let worst = table.states.iter().zip(&brute).map(|(s, b)| (s.p - b).abs()).fold(0.0, f64::max);
        let ok = table.len() == brute.len() && worst < 1e-9;
        pass &= ok;
        detail.push(format!("V0={depth}: {}/{} states, max dp {worst:.1e}", table.len(), brute.len()));
    }
    pass &= start.elapsed().as_secs_f64() < 10.0;
    assert!(report(3, pass, start, &detail.join("; ")));
}

#[test]
fn criterion_04_mse_matching_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let well = WellConfig::new(1.5, 10.0, 1.0).unwrap();
    let mut literal: f64 = 0.0;
    let mut stepwise: f64 = 0.0;
    let mut done = 0;
    while done < 100 {
        let Some(p) = sample_momentum(&mut rng, well.depth, Regime::Bound) else { continue };
        let Ok(m) = ModeSolution::new(p, &well, N) else { continue };
        if m.regime != Regime::Bound {
            continue;
        }
        let Ok(a) = mse_amplitudes(&m, &well, N, ONE, ZERO, SeriesOrder::Converged) else { continue };
        literal = literal.max(matching_residuals(&a, &m, &well, N).iter().map(|r| r.norm()).fold(0.0, f64::max));
        stepwise = stepwise.max(step_matching_residuals(&a, &m, &well, N).iter().map(|r| r.norm()).fold(0.0, f64::max));
        done += 1;
    }
    let mut condition: f64 = 0.0;
    let mut states = 0;
    for depth in CRITERION_3_DEPTHS {
        let w = WellConfig::new(depth, 10.0, 1.0).unwrap();
        for s in find_bound_states(&w, N, 1e-12).unwrap().states {
            condition = condition.max(mse_bound_state_condition(s.p, &w, N).unwrap());
            states += 1;
        }
    }
    // The two-sided conditions carry the launched wave as a source term:
    // B1 - (A2 + B2) = -α for the closed-form series, so this part cannot
    // reach 1e-12 for α ≠ 0. The per-step conditions are reported alongside.
    let pass = literal < 1e-12 && condition < 1e-10 && start.elapsed().as_secs_f64() < 5.0;
    assert!(report(
        4,
        pass,
        start,
        &format!(
            "literal four-condition residual {literal:.2e} (alpha = 1); per-step residual {stepwise:.1e}; \
             r_l = ±e^(-ipL) residual {condition:.1e} over {states} states"
        )
    ));
}

#[test]
fn criterion_05_resonance_and_suppression() {
    let start = Instant::now();
    let width = 20.0;
    let p_grid = grid(0.0005, 1.0, 0.0005);
    // Main lobes k = 1..5; the maxima between them are side lobes of the
    // truncated sum.
    let lobes = |depth: f64| -> Vec<(f64, f64)> {
        let well = WellConfig::new(depth, width, 1.0).unwrap();
        let scan = resonance_scan(&well, N, &p_grid, ONE, ZERO, 10).unwrap();
        let found = scan.main_lobes(width, N);
        (1..=5)
            .map(|k| found.iter().find(|l| l.0 == k).map_or((f64::NAN, 0.0), |l| (l.1.p, l.1.value)))
            .collect()
    };
    let (l5, l20, l50) = (lobes(5.0), lobes(20.0), lobes(50.0));
    let offset = l50
        .iter()
        .enumerate()
        .map(|(i, (p, _))| (p / ((i + 1) as f64 * PI / width) - 1.0).abs())
        .fold(0.0, f64::max);
    let decreasing = (0..5).all(|i| l5[i].1 > l20[i].1 && l20[i].1 > l50[i].1);
    let scaled = |depth: f64| {
        let well = WellConfig::new(depth, width, 1.0).unwrap();
        let m = ModeSolution::new(1.0, &well, N).unwrap();
        step_coefficients(&m, &well, N).unwrap().tl.norm() * depth
    };
    let (t200, t400) = (scaled(200.0), scaled(400.0));
    let drift = (t200 / t400 - 1.0).abs();
    let pass = offset < 0.02 && !offset.is_nan() && decreasing && drift < 0.05 && start.elapsed().as_secs_f64() < 30.0;
    let heights = |l: &[(f64, f64)]| l.iter().map(|x| format!("{:.3}", x.1)).collect::<Vec<_>>().join("/");
    assert!(report(
        5,
        pass,
        start,
        &format!(
            "V0=50 peaks within {:.2}% of k pi/L; |B1| lobes k=1..5: V0=5 {} > V0=20 {} > V0=50 {}; \
             |tl| V0 = {t200:.4} (200), {t400:.4} (400), change {:.2}%",
            100.0 * offset,
            heights(&l5),
            heights(&l20),
            heights(&l50),
            100.0 * drift
        )
    ));
}

#[test]
fn criterion_06_infinite_well_spectrum() {
    let start = Instant::now();
    // Wide enough that the first several levels sit below kπħ/(Lmc) = 0.1.
    let well = WellConfig::new(0.0, 200.0, 1.0).unwrap();
    let levels = infinite_well_energies(&well, N, 200);
    let mut formula: f64 = 0.0;
    let mut worst_nr: f64 = 0.0;
    let mut nr_levels = 0;
    for l in &levels {
        let p = l.k as f64 * PI * N.hbar / well.width;
        let e = (well.mass.powi(2) * N.c.powi(4) + p * p * N.c * N.c).sqrt();
        formula = formula.max((l.p / p - 1.0).abs()).max((l.energy / e - 1.0).abs());
        if p / (well.mass * N.c) < 0.1 {
            nr_levels += 1;
            worst_nr = worst_nr.max((l.energy_nonrelativistic / l.energy - 1.0).abs());
        }
    }
    let pass = formula < 4.0 * f64::EPSILON && nr_levels > 0 && worst_nr < 0.005 && start.elapsed().as_secs_f64() < 1.0;
    assert!(report(
        6,
        pass,
        start,
        &format!(
            "{} levels, max deviation from the closed form {formula:.1e}; worst NR deviation over {nr_levels} levels \
             below k pi/(Lmc) = 0.1: {worst_nr:.2e}",
            levels.len()
        )
    ));
}

fn fig4_packet(depth: f64, x_extent: f64, t_max: f64, nmax: usize) -> (WellConfig, Wavepacket) {
    let well = WellConfig::new(depth, 400.0, 1.0).unwrap();
    let mut spec = WavepacketSpec::gaussian(1.0, 0.02, 200.0).unwrap();
    spec.nmax = nmax;
    let spec = spec.with_resolving_quadrature(&well, N, x_extent, t_max).unwrap();
    (well, Wavepacket::new(spec, well, N).unwrap())
}

#[test]
fn criterion_07_free_packet() {
    let start = Instant::now();
    let (_, mut packet) = fig4_packet(0.0, 800.0, 400.0, 0);
    let x = grid(-200.0, 800.0, 0.5);
    packet.normalize(&x).unwrap();
    let times = grid(0.0, 400.0, 50.0);
    let field = packet.evolve_grid(&x, &times);
    let q0 = field.total_charge(0);
    let drift = (0..times.len()).map(|i| (field.total_charge(i) / q0 - 1.0).abs()).fold(0.0, f64::max);
    // Least-squares slope of the centroid.
    let c: Vec<f64> = (0..times.len()).map(|i| field.centroid(i)).collect();
    let tm = times.iter().sum::<f64>() / times.len() as f64;
    let cm = c.iter().sum::<f64>() / c.len() as f64;
    let v = times.iter().zip(&c).map(|(t, c)| (t - tm) * (c - cm)).sum::<f64>()
        / times.iter().map(|t| (t - tm).powi(2)).sum::<f64>();
    let v_err = (v * 2f64.sqrt() - 1.0).abs();
    let pass = v_err < 0.01 && drift < 1e-6 && start.elapsed().as_secs_f64() < 60.0;
    assert!(report(
        7,
        pass,
        start,
        &format!("centroid velocity {v:.6} (1/sqrt2 off by {:.3}%), charge drift {drift:.1e}", 100.0 * v_err)
    ));
}

const FIG4_TIMES: [f64; 6] = [0.0, 200.0, 400.0, 600.0, 800.0, 1000.0];

/// The fig4_evolve experiment on the default 0.5 grid, normalised at t = 0.
fn fig4_run(depth: f64) -> (WellConfig, FieldGrid) {
    let x = grid(-1000.0, 1400.0, 0.5);
    let (well, mut packet) = fig4_packet(depth, 1400.0, 1000.0, 10);
    packet.normalize(&x).unwrap();
    (well, packet.evolve_grid(&x, &FIG4_TIMES))
}

#[test]
fn criterion_08_klein_paradox_dynamics() {
    let start = Instant::now();
    let (well, field) = fig4_run(5.0);
    let mut pass = true;
    let mut rows = vec![];
    for (i, &t) in FIG4_TIMES.iter().enumerate() {
        let [q1, q2, q3] = field.region_charges(i, &well);
        let total = field.total_charge(i);
        pass &= (total - 1.0).abs() < 0.02;
        // The packet (speed 1/√2, width ~25) has fully hit the right edge
        // by t = 400 and reaches the left edge again around t = 850.
        if (400.0..=800.0).contains(&t) {
            pass &= q2 > 1.0 && q3 < 0.0;
        }
        if t >= 1000.0 {
            pass &= q1 < 0.0;
        }
        rows.push(format!("t={t}: [{q1:.3}, {q2:.3}, {q3:.3}] total {total:.4}"));
    }
    pass &= start.elapsed().as_secs_f64() < 600.0;
    assert!(report(8, pass, start, &rows.join("; ")));
}

#[test]
fn criterion_09_klein_tunneling_suppression() {
    let start = Instant::now();
    let outside_peak = |depth: f64| {
        let (well, field) = fig4_run(depth);
        let last = FIG4_TIMES.len() - 1;
        field.x.iter().zip(&field.rho[last]).filter(|(x, _)| **x < 0.0 || **x > well.width).map(|(_, r)| r.abs()).fold(0.0, f64::max)
    };
    let (shallow, deep) = (outside_peak(5.0), outside_peak(50.0));
    let ratio = shallow / deep;
    let pass = ratio >= 10.0 && start.elapsed().as_secs_f64() < 600.0;
    assert!(report(
        9,
        pass,
        start,
        &format!("max |rho| outside at t=1000: V0=5 {shallow:.3e}, V0=50 {deep:.3e}, ratio {ratio:.1}")
    ));
}

/// Runs the oracle from the packet and returns the snapshots at `times`
/// together with the relative drift of the conserved lattice charge.
fn fdtd_run(well: &WellConfig, packet: &Wavepacket, dx: f64, t_max: f64, times: &[f64]) -> (FieldGrid, f64) {
    let cfg = FdtdConfig::padded(well, N, dx, t_max);
    let solver = FdtdSolver::new(cfg, *well, N).unwrap();
    let mut state = solver.init_from_wavepacket(packet);
    let q0 = solver.total_charge(&state);
    let field = solver.run(&mut state, times).unwrap();
    let drift = (solver.total_charge(&state) / q0 - 1.0).abs();
    (field, drift)
}

#[test]
fn criterion_10_mse_against_fdtd() {
    let start = Instant::now();
    // fig4_evolve configuration at dx = 0.1, 0.05 (the default) and 0.025; dx =
    // 0.2 is unstable at V0 = 5, and 0.1 sits just above 5% at t = 1000.
    // The default run is compared with MSE on every tenth node (the 0.5
    // output grid), successive resolutions on the 0.1 lattice.
    let (well, mut packet) = fig4_packet(5.0, 1400.0, 1000.0, 10);
    let coarse = FdtdConfig::padded(&well, N, 0.5, 1000.0).lattice();
    packet.normalize(&coarse).unwrap();
    let times = [800.0, 1000.0];
    let runs: Vec<(FieldGrid, f64)> = [0.1, 0.05, 0.025].iter().map(|&h| fdtd_run(&well, &packet, h, 1000.0, &times)).collect();
    let fdtd = runs[1].0.every(10);
    let drift = runs.iter().map(|r| r.1).fold(0.0, f64::max);
    let mse = packet.evolve_grid(&fdtd.x, &times);
    let cmp = compare(&mse.to_table(), &fdtd.to_table()).unwrap();
    let l2_ok = cmp.iter().all(|c| c.l2_rel < 0.05);

    let diff = |a: &FieldGrid, b: &FieldGrid, k: usize| {
        assert!(a.x.len() == b.x.len() && a.x.iter().zip(&b.x).all(|(u, v)| (u - v).abs() < 1e-9));
        let d: Vec<f64> = a.rho[k].iter().zip(&b.rho[k]).map(|(u, v)| (u - v).powi(2)).collect();
        trapezoid(&a.x, &d).sqrt()
    };
    let (r0, r1, r2) = (&runs[0].0, runs[1].0.every(2), runs[2].0.every(4));
    let order = diff(r0, &r1, 1) / diff(&r1, &r2, 1);

    // Against the analytic evolution in free space.
    let (free, mut free_packet) = fig4_packet(0.0, 800.0, 400.0, 0);
    let x = FdtdConfig::padded(&free, N, 0.2, 400.0).lattice();
    free_packet.normalize(&x).unwrap();
    let exact = free_packet.evolve_grid(&x, &[400.0]);
    let free_runs: Vec<FieldGrid> =
        [(0.2, 1), (0.1, 2)].iter().map(|&(h, s)| fdtd_run(&free, &free_packet, h, 400.0, &[400.0]).0.every(s)).collect();
    let exact_ratio = diff(&free_runs[0], &exact, 0) / diff(&free_runs[1], &exact, 0);

    let pass = l2_ok
        && (3.5..=4.5).contains(&order)
        && (3.5..=4.5).contains(&exact_ratio)
        && drift < 1e-5
        && start.elapsed().as_secs_f64() < 1800.0;
    let l2: Vec<String> = cmp.iter().map(|c| format!("t={}: L2 {:.2}%", c.t, 100.0 * c.l2_rel)).collect();
    assert!(report(
        10,
        pass,
        start,
        &format!(
            "{}; self-convergence ratio at t=1000 {order:.3}, free-space error ratio {exact_ratio:.3}; max lattice charge drift {drift:.1e}",
            l2.join(", ")
        )
    ));
}
