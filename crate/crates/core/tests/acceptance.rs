//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test -p mlflux --test acceptance -- --nocapture`.

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::Arc;
use std::time::{Duration, Instant};

use mlflux::algebra::DeformationSpec;
use mlflux::cli;
use mlflux::evolution::{continuity_residual, FreeEvolution, ResidualInput, ResidualOptions};
use mlflux::flux::{
    flux_closed_grid, flux_closed_grid_fine, flux_closed_spectral, flux_series,
    geometric_sum_identity,
};
use mlflux::states::{plane_wave, two_wave, GaussianPacket, GridState, MomentumGrid, SpectralState};
use num_complex::Complex64;
use rand::{rngs::StdRng, Rng, SeedableRng};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn report(id: u32, name: &str, checks: &[(bool, String)], elapsed: Duration, limit: Duration) {
    let in_time = elapsed <= limit;
    let pass = in_time && checks.iter().all(|(ok, _)| *ok);
    let details: Vec<&str> = checks.iter().map(|(_, d)| d.as_str()).collect();
    println!(
        "[{}] criterion {id}: {name}: {}; runtime {:.3}s (limit {:.1}s)",
        if pass { "PASS" } else { "FAIL" },
        details.join("; "),
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    assert!(pass, "criterion {id} failed");
}

#[test]
fn criterion_1_undeformed_recovery() {
    let start = Instant::now();
    let spec = Arc::new(DeformationSpec::undeformed());
    let (center, sigma, x0) = (0.5, 1.0, 3.0);
    let grid = MomentumGrid::new(1024, 12.0).unwrap();
    let state = GridState::gaussian(spec.clone(), grid, GaussianPacket::new(center, sigma).displaced(x0)).unwrap();

    let fine = state.to_coordinate_oversampled(2).unwrap();
    let coeffs = spec.taylor_coeffs(1).unwrap();
    let series = flux_series(&fine, &coeffs, 1).unwrap();
    let closed = flux_closed_grid_fine(&state).unwrap();
    let textbook: Vec<f64> = series
        .x
        .iter()
        .map(|&x| {
            let psi = common::gaussian_psi(center, sigma, x0, 1.0, x);
            let dpsi = common::gaussian_dpsi(center, sigma, x0, 1.0, x);
            (psi.conj() * dpsi).im
        })
        .collect();
    let scale = common::max_abs(&textbook);
    let d1 = common::max_abs_diff(&series.values, &textbook) / scale;
    let d2 = common::max_abs_diff(&closed.values, &textbook) / scale;
    let d3 = common::max_abs_diff(&series.values, &closed.values) / scale;
    let elapsed = start.elapsed();
    report(
        1,
        "undeformed recovery",
        &[
            (d1 <= 1e-10, format!("series vs textbook {d1:.2e}")),
            (d2 <= 1e-10, format!("closed vs textbook {d2:.2e}")),
            (d3 <= 1e-10, format!("series vs closed {d3:.2e}")),
        ],
        elapsed,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_2_plane_wave_flux() {
    let start = Instant::now();
    let spec = Arc::new(DeformationSpec::kempf_tan(1.0).unwrap());
    let state = plane_wave(spec.clone(), c(1.0, 0.0), FRAC_PI_4, 0.0).unwrap();
    let xs: Vec<f64> = (0..101).map(|i| -10.0 + 0.2 * i as f64).collect();
    let j = flux_closed_spectral(&state, &xs, 0.0).unwrap();
    let err = j.values.iter().fold(0.0_f64, |m, v| m.max((v - 2.0).abs()));
    let fd = common::richardson_derivative(|p| common::kempf_t(1.0, 1.0, p), FRAC_PI_4, 1e-3);
    let elapsed = start.elapsed();
    report(
        2,
        "plane-wave flux",
        &[
            (err <= 1e-12, format!("max|j - 2| = {err:.2e}")),
            ((fd - 2.0).abs() <= 1e-6, format!("finite-difference T' = {fd:.10}")),
        ],
        elapsed,
        Duration::from_millis(100),
    );
}

#[test]
fn criterion_3_two_wave_interference() {
    let start = Instant::now();
    let spec = Arc::new(DeformationSpec::kempf_tan(1.0).unwrap());
    let t = 0.4;
    let a = Complex64::from_polar(1.2, 0.3);
    let b = Complex64::from_polar(0.8, -0.5);
    let (p1, p2) = (0.7, -0.3);
    let state = two_wave(spec.clone(), a, p1, b, p2, 0.0).unwrap();
    let xs: Vec<f64> = (0..1000).map(|i| -50.0 + 0.1 * i as f64).collect();
    let j = flux_closed_spectral(&state, &xs, t).unwrap();
    let direct: Vec<f64> = xs
        .iter()
        .map(|&x| {
            common::two_wave_current(
                |p| common::kempf_t(1.0, 1.0, p),
                |p| common::kempf_t_prime(1.0, 1.0, p),
                a,
                p1,
                b,
                p2,
                1.0,
                t,
                x,
            )
        })
        .collect();
    let err = common::max_abs_diff(&j.values, &direct);

    let p = 0.6;
    let opposite = two_wave(spec.clone(), a, p, b, -p, 0.0).unwrap();
    let kernel = spec.divided_difference_kernel(p, -p).unwrap();
    let jo = flux_closed_spectral(&opposite, &xs, t).unwrap();
    let plain = a.norm_sqr() * spec.kinetic_derivative(p).unwrap()
        + b.norm_sqr() * spec.kinetic_derivative(-p).unwrap();
    let flat = jo.values.iter().fold(0.0_f64, |m, v| m.max((v - plain).abs()));
    let elapsed = start.elapsed();
    report(
        3,
        "two-wave interference",
        &[
            (err <= 1e-13, format!("max deviation from direct formula {err:.2e}")),
            (kernel == 0.0, format!("interference coefficient for p2 = -p1 is {kernel:e}")),
            (flat <= 1e-15, format!("opposite-momentum profile deviation {flat:.2e}")),
        ],
        elapsed,
        Duration::from_millis(100),
    );
}

#[test]
fn criterion_4_series_closed_equivalence() {
    let start = Instant::now();
    let spec = Arc::new(DeformationSpec::kempf_tan(1.0).unwrap());
    let packet = GaussianPacket::new(0.05, 0.1).displaced(2.0);
    let state = GridState::gaussian(spec.clone(), MomentumGrid::new(512, 0.5).unwrap(), packet).unwrap();
    let coeffs = spec.taylor_coeffs(16).unwrap();
    let series = flux_series(&state.to_coordinate_oversampled(2).unwrap(), &coeffs, 16).unwrap();
    let closed = flux_closed_grid_fine(&state).unwrap();
    let diff = series.max_abs_difference(&closed);
    let rel = diff / closed.max_abs();
    let estimate = series.truncation_estimate.unwrap();

    // naive triple loop on a small grid
    let small = GridState::gaussian(spec.clone(), MomentumGrid::new(64, 0.5).unwrap(), packet).unwrap();
    let xs: Vec<f64> = (0..64).map(|i| -30.0 + i as f64).collect();
    let fast = flux_closed_grid(&small, &xs).unwrap();
    let dp = small.grid().spacing();
    let naive = common::naive_closed_flux(small.values(), &small.momenta(), dp, 1.0, &xs, |p, q| {
        common::kempf_kernel(1.0, 1.0, p, q)
    });
    let naive_re: Vec<f64> = naive.iter().map(|v| v.re).collect();
    let naive_err = common::max_abs_diff(&fast.values, &naive_re) / common::max_abs(&naive_re);
    let elapsed = start.elapsed();
    report(
        4,
        "series/closed equivalence",
        &[
            (rel <= 1e-8, format!("relative difference {rel:.2e}")),
            (diff <= estimate, format!("max difference {diff:.2e} vs truncation estimate {estimate:.2e}")),
            (naive_err <= 1e-12, format!("naive oracle at M=64 {naive_err:.2e}")),
        ],
        elapsed,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_5_continuity_residual() {
    let start = Instant::now();
    let spec = Arc::new(DeformationSpec::kempf_tan(1.0).unwrap());
    let packet = GaussianPacket::new(0.05, 0.1);
    let residual = |m: usize| {
        let state = GridState::gaussian(spec.clone(), MomentumGrid::new(m, 0.5).unwrap(), packet).unwrap();
        continuity_residual(ResidualInput::Grid(&state), ResidualOptions::default()).unwrap()
    };
    let big = residual(1024);
    let ratio_max = big.max_abs / big.scale();
    let l256 = residual(256).l2;
    let l512 = residual(512).l2;
    let drop = l256 / l512;
    let elapsed = start.elapsed();
    report(
        5,
        "continuity residual",
        &[
            (ratio_max <= 1e-6, format!("M=1024 max|r|/max|dj/dx| = {ratio_max:.2e}")),
            (
                drop >= 1e2,
                format!("L2 residual M=256 {l256:.2e} -> M=512 {l512:.2e}, drop x{drop:.2}"),
            ),
        ],
        elapsed,
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_6_taylor_coefficients() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut out = Vec::new();
    let code = cli::run(
        [
            "mlflux",
            "coeffs",
            "--algebra",
            "kempf-tan",
            "--order",
            "3",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &mut out,
    );
    let text = String::from_utf8(out).unwrap();
    let emitted: Vec<f64> = text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let oracle = common::tan_sq_coeffs_by_fit(3);
    let err = emitted
        .iter()
        .zip(&oracle)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));

    let specs = [
        DeformationSpec::undeformed(),
        DeformationSpec::kempf_tan(1.0).unwrap(),
        DeformationSpec::kempf_tan(0.03).unwrap(),
        DeformationSpec::user_series(0.5, vec![1.0, 1.0 / 6.0, 1.0 / 120.0], f64::INFINITY).unwrap(),
        DeformationSpec::user_series(2.0, vec![1.0, -0.1], 1.0).unwrap(),
    ];
    let a1_exact = specs.iter().all(|s| s.taylor_coeffs(2).unwrap().a(1) == 1.0);
    let elapsed = start.elapsed();
    report(
        6,
        "Taylor coefficients",
        &[
            (code == 0 && emitted.len() == 3, format!("exit {code}, emitted {emitted:?}")),
            (err <= 1e-9, format!("max deviation from fitted tan² coefficients {err:.2e}")),
            (a1_exact, format!("a_1 == 1 for all {} algebras: {a1_exact}", specs.len())),
        ],
        elapsed,
        Duration::from_millis(100),
    );
}

#[test]
fn criterion_7_geometric_identity() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let p: f64 = rng.gen_range(-2.0..2.0);
        let q: f64 = rng.gen_range(-2.0..2.0);
        let n: usize = rng.gen_range(1..=10);
        let (lhs, rhs) = geometric_sum_identity(p, q, n).unwrap();
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()));
    }
    let mut diag = 0.0_f64;
    for &p in &[-1.7, -0.3, 0.5, 1.1, 1.9] {
        for n in 1..=10 {
            let (lhs, rhs) = geometric_sum_identity(p, p, n).unwrap();
            let limit = 2.0 * n as f64 * p.powi(2 * n as i32 - 1);
            diag = diag.max(((lhs - limit) / limit).abs()).max(((rhs - limit) / limit).abs());
        }
    }
    let elapsed = start.elapsed();
    report(
        7,
        "geometric-progression identity",
        &[
            (worst <= 1e-12, format!("worst relative disagreement {worst:.2e}")),
            (diag <= 1e-12, format!("diagonal limit deviation {diag:.2e}")),
        ],
        elapsed,
        Duration::from_millis(100),
    );
}

#[test]
fn criterion_8_unitarity_and_reversal() {
    let start = Instant::now();
    let spec = Arc::new(DeformationSpec::kempf_tan(1.0).unwrap());
    let state = GridState::gaussian(spec, MomentumGrid::new(256, 0.5).unwrap(), GaussianPacket::new(0.05, 0.1)).unwrap();
    let n0 = state.norm();
    let dt = 0.37;
    let mut s = state.clone();
    let mut worst_norm = 0.0_f64;
    for _ in 0..10_000 {
        s = s.evolve_free(dt).unwrap();
        worst_norm = worst_norm.max((s.norm() - n0).abs() / n0);
    }
    let peak = state.values().iter().fold(0.0_f64, |m, v| m.max(v.norm()));
    let deviation = |a: &GridState, b: &GridState| {
        a.values()
            .iter()
            .zip(b.values())
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
            / peak
    };
    // evolving by dt and then by -dt, from the initial and the long-run state
    let mut back = 0.0_f64;
    for step in [dt, 1.0, 25.0, 1e3] {
        for base in [&state, &s] {
            let round = base.evolve_free(step).unwrap().evolve_free(-step).unwrap();
            back = back.max(deviation(&round, base));
        }
    }
    // reported only: 1e4 steps back accumulate one rounding per step
    let mut undo = s.clone();
    for _ in 0..10_000 {
        undo = undo.evolve_free(-dt).unwrap();
    }
    let long_run = deviation(&undo, &state);
    let elapsed = start.elapsed();
    report(
        8,
        "unitarity and reversal",
        &[
            (worst_norm <= 1e-13, format!("norm drift over 1e4 steps {worst_norm:.2e}")),
            (back <= 1e-12, format!("dt/-dt round trip deviation {back:.2e}")),
            (true, format!("1e4 steps each way (informational) {long_run:.2e}")),
        ],
        elapsed,
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_9_merge_limit() {
    let start = Instant::now();
    let spec = Arc::new(DeformationSpec::kempf_tan(1.0).unwrap());
    let (a, b) = (c(1.0, 0.2), c(-0.3, 0.5));
    let p = 0.4;
    let delta = 1e-6 * FRAC_PI_2;
    let split = SpectralState::new(spec.clone(), 0.0)
        .with_component(p, a)
        .unwrap()
        .with_component(p + delta, b)
        .unwrap();
    let merged = plane_wave(spec, a + b, p, 0.0).unwrap();
    let xs: Vec<f64> = (0..201).map(|i| -10.0 + 0.1 * i as f64).collect();
    let js = flux_closed_spectral(&split, &xs, 0.0).unwrap();
    let jm = flux_closed_spectral(&merged, &xs, 0.0).unwrap();
    let rel = js.max_abs_difference(&jm) / jm.max_abs();
    let elapsed = start.elapsed();
    report(
        9,
        "merge limit",
        &[(rel <= 1e-4, format!("relative difference {rel:.2e} at delta = {delta:.2e}"))],
        elapsed,
        Duration::from_millis(100),
    );
}
