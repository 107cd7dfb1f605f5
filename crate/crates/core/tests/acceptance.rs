//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints a PASS/FAIL line; exits nonzero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use linmax::bounds::{bound_maxwell, bound_maxwell_ball, bound_te, StabilityParams};
use linmax::experiments::{reference_slope, run_noise_sweep, SweepResult, SLOPE_WINDOW};
use linmax::forward::{assemble, relative_l2_error, RealField2D};
use linmax::geometry::{CartesianGrid, DiskDomain, Discretization};
use linmax::linearised::{first_order_trace, synth_linearised_trace};
use linmax::phantom::{Phantom, PhantomKind};
use linmax::phase_space::{make_ce_pair_3d, make_ce_pair_te, make_phase_point};
use linmax::reconstruct::{reconstruct_from_bank, ForwardSetup, ReconstructionConfig, TraceBank};
use linmax::recovery::{oracle_ft, recover_mode};

const OMEGAS: [f64; 3] = [5.0, 10.0, 15.0];
const BANK_CAP: f64 = 50.0;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn disk() -> DiskDomain {
    DiskDomain::new([0.0, 0.0], 0.7).unwrap()
}

fn ce_algebra() -> Verdict {
    let mut rng = StdRng::seed_from_u64(2024);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let r = rng.random_range(0.05..80.0);
        let t = rng.random_range(0.0..PI);
        let p = rng.random_range(0.0..2.0 * PI);
        let omega = rng.random_range(0.5..30.0);
        let xi = [r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * t.cos()];
        worst = worst.max(make_ce_pair_3d(xi, omega, 1.0, 1.0).unwrap().max_relative_residual());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(worst <= 1e-12 && secs < 1.0, format!("max residual {worst:.2e}, {secs:.3} s"))
}

fn forward_convergence() -> Verdict {
    let start = Instant::now();
    let pair = make_ce_pair_te(make_phase_point([1.0, 0.0]).unwrap(), 5.0).unwrap();
    let err = |n: usize| {
        let disc = Arc::new(Discretization::new(CartesianGrid::square(n, 0.75).unwrap(), disk()).unwrap());
        let op = assemble(disc.clone(), 5.0, 1.0, 1.0, &RealField2D::zeros(disc.grid)).unwrap();
        let u = op.solve_dirichlet(|x| pair.e3(x)).unwrap();
        relative_l2_error(&u, |x| pair.e3(x))
    };
    let (coarse, fine) = (err(100), err(200));
    let ratio = coarse / fine;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        (3.2..=4.8).contains(&ratio) && secs < 60.0,
        format!("errors {coarse:.3e} / {fine:.3e}, ratio {ratio:.3}, {secs:.1} s"),
    )
}

fn mode_recovery(setup: &ForwardSetup) -> Verdict {
    let start = Instant::now();
    let ph = Phantom::new(PhantomKind::GaussBump, 0.1);
    let omega = 15.0;
    let (op, op0) = setup.operators(&ph, omega, 1.0, 1.0).unwrap();
    let fine = ph.sample(CartesianGrid::square(400, 0.7).unwrap());
    let peak = oracle_ft(&fine, &disk(), [0.0, 0.0]).norm();
    let mut worst = 0.0f64;
    for kappa in [1.0, 5.0, 10.0] {
        for s in 0..19 {
            let t = 2.0 * PI * s as f64 / 19.0;
            let pair = make_ce_pair_te(make_phase_point([kappa * t.cos(), kappa * t.sin()]).unwrap(), omega).unwrap();
            let trace = synth_linearised_trace(&op, &op0, &pair, &setup.extractor).unwrap();
            let m = recover_mode(&trace, &pair, &setup.sampling, omega, 1.0).unwrap();
            worst = worst.max((m.value - oracle_ft(&fine, &disk(), m.key())).norm() / peak);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 0.10 && secs < 120.0,
        format!("worst mismatch {:.2}% of peak over 57 modes, {secs:.1} s", 100.0 * worst),
    )
}

struct Banks {
    setup: ForwardSetup,
    banks: Vec<(ReconstructionConfig, TraceBank)>,
    build_s: f64,
}

fn build_banks(setup: ForwardSetup) -> Banks {
    let start = Instant::now();
    let banks = OMEGAS
        .iter()
        .map(|&omega| {
            let cfg = ReconstructionConfig::new(omega);
            let mut wide = cfg.clone();
            wide.truncation = Some(BANK_CAP);
            let (op, op0) = setup.operators(&cfg.phantom, omega, 1.0, 1.0).unwrap();
            let bank = TraceBank::generate(&setup, &op, &op0, wide.phase_grid().unwrap()).unwrap();
            (cfg, bank)
        })
        .collect();
    Banks {
        setup,
        banks,
        build_s: start.elapsed().as_secs_f64(),
    }
}

fn blow_up(b: &Banks) -> Verdict {
    let fine = Phantom::peaks().sample(CartesianGrid::square(241, 0.7).unwrap());
    let mut pass = true;
    let mut parts = Vec::new();
    for (cfg, bank) in &b.banks {
        let k = cfg.wavenumber();
        let all = bank.modes(&b.setup.sampling, BANK_CAP, None).unwrap();
        let mut true_max = 0.0f64;
        let mut far_max = 0.0f64;
        for (idx, (l, _)) in all.grid.indices().enumerate() {
            let kappa = all.grid.lengths[l];
            let m = &all.modes()[idx];
            if kappa <= 2.0 * k {
                true_max = true_max.max(oracle_ft(&fine, &disk(), m.key()).norm());
            } else if kappa > 2.0 * k + 5.0 {
                far_max = far_max.max(m.value.norm());
            }
        }
        let ratio = far_max / true_max;
        pass &= ratio > 10.0;
        parts.push(format!("omega {}: {ratio:.1e}x", cfg.omega));
    }
    verdict(pass, parts.join(", "))
}

fn resolution(b: &Banks) -> Verdict {
    let start = Instant::now();
    let errs: Vec<f64> = b
        .banks
        .iter()
        .map(|(cfg, bank)| reconstruct_from_bank(cfg, &b.setup, bank).unwrap().rel_error.unwrap())
        .collect();
    let secs = b.build_s + start.elapsed().as_secs_f64();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let halved = errs[2] <= 0.5 * errs[0];
    verdict(
        decreasing && halved && secs < 900.0,
        format!(
            "errors {:.4} / {:.4} / {:.4}, decreasing {decreasing}, ratio 15:5 {:.3}, {secs:.0} s",
            errs[0],
            errs[1],
            errs[2],
            errs[2] / errs[0]
        ),
    )
}

fn noise_slopes(b: &Banks) -> Verdict {
    let deltas = [0.02, 0.05, 0.1, 0.2, 0.4];
    let seeds: Vec<u64> = (0..5).collect();
    let mut sweep = SweepResult::default();
    for (cfg, bank) in &b.banks {
        sweep.extend(run_noise_sweep(cfg, &b.setup, bank, &deltas, &seeds).unwrap());
    }
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance_metrics.csv");
    sweep.write_metrics(std::fs::File::create(&path).unwrap()).unwrap();
    let slopes = sweep.slopes();
    let ordered = slopes.windows(2).all(|w| w[1].slope > w[0].slope);
    let soft: Vec<String> = slopes
        .iter()
        .map(|s| {
            let r = reference_slope(s.omega).unwrap();
            let tag = if (s.slope - r).abs() <= SLOPE_WINDOW { "in" } else { "out" };
            format!("omega {}: {:+.4} (ref {r:.2}, {tag})", s.omega, s.slope)
        })
        .collect();
    verdict(ordered && slopes.len() == 3, format!("{}; ordering {ordered}; metrics {}", soft.join(", "), path.display()))
}

fn bound_evaluators() -> Verdict {
    let pts = common::lattice();
    let start = Instant::now();
    let ours: Vec<_> = pts
        .iter()
        .map(|p| (bound_maxwell(p).unwrap(), bound_te(p, false).unwrap(), bound_maxwell_ball(p).unwrap()))
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let mut ok = true;
    for (p, (mx, te, ball)) in pts.iter().zip(&ours) {
        let o = common::maxwell(p, false);
        let t = common::te(p, p.c2);
        ok &= mx.chi == o.chi && common::rel_close(mx.total, o.total, 1e-12);
        ok &= te.chi == t.chi && common::rel_close(te.total, t.total, 1e-12);
        for (a, b) in [mx.term_lipschitz, mx.term_holder, mx.term_log].iter().zip(o.terms) {
            ok &= common::rel_close(*a, b, 1e-12);
        }
        for (a, b) in [te.term_lipschitz, te.term_holder, te.term_log].iter().zip(t.terms) {
            ok &= common::rel_close(*a, b, 1e-12);
        }
        let mut q = *p;
        q.vol = PI * p.d.powi(3) / 6.0;
        q.vol2 = PI * p.d.powi(2) / 4.0;
        ok &= common::rel_close(bound_maxwell(&q).unwrap().total, ball.total, 1e-12);
    }
    let mut flips = true;
    for eps in [0.3, 0.05, 1e-4, 1e-9] {
        let e = -f64::ln(eps);
        let mut p = StabilityParams::disk_defaults(eps, e.max(1.0));
        if p.k != e {
            continue;
        }
        flips &= bound_te(&p, true).unwrap().chi;
        p.k = e.next_up();
        flips &= !bound_te(&p, true).unwrap().chi && !bound_maxwell(&p).unwrap().chi;
    }
    verdict(
        ok && flips && secs < 1.0,
        format!("{} lattice points, oracle agreement {ok}, regime switch {flips}, {secs:.4} s", pts.len()),
    )
}

fn linearisation_order(setup: &ForwardSetup) -> Verdict {
    let omega = 15.0;
    let ph = Phantom::peaks();
    let sigma = ph.sample(setup.disc.grid);
    let op0 = assemble(setup.disc.clone(), omega, 1.0, 1.0, &RealField2D::zeros(setup.disc.grid)).unwrap();
    let op1 = assemble(setup.disc.clone(), omega, 1.0, 1.0, &sigma).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for xi in [[-1.0, 0.0], [3.0, 4.0]] {
        let pair = make_ce_pair_te(make_phase_point(xi).unwrap(), omega).unwrap();
        let linear = first_order_trace(&op1, &op0, &pair, &setup.extractor).unwrap();
        let mismatch: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&t| {
                let op = assemble(setup.disc.clone(), omega, 1.0, 1.0, &sigma.scaled(t)).unwrap();
                let tr = synth_linearised_trace(&op, &op0, &pair, &setup.extractor).unwrap();
                let diff: Vec<_> = tr.values.iter().zip(&linear.values).map(|(a, b)| a - b * t).collect();
                linmax::forward::trace_l2_norm(&diff, &setup.sampling) / t
            })
            .collect();
        let r1 = mismatch[0] / mismatch[1];
        let r2 = mismatch[1] / mismatch[2];
        pass &= (1.5..=2.5).contains(&r1) && (1.5..=2.5).contains(&r2);
        parts.push(format!("xi {xi:?}: ratios {r1:.3}, {r2:.3}"));
    }
    verdict(pass, parts.join("; "))
}

fn main() -> ExitCode {
    let mut results: Vec<(u8, &str, Verdict)> = Vec::new();
    let mut report = |id: u8, name: &'static str, v: Verdict| {
        println!("{} criterion {id} ({name}): {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((id, name, v));
    };
    report(1, "CE algebra", ce_algebra());
    report(2, "forward convergence", forward_convergence());
    let setup = ForwardSetup::new(200, 720).unwrap();
    report(3, "mode recovery vs quadrature", mode_recovery(&setup));
    let banks = build_banks(setup);
    report(4, "blow-up beyond 2k", blow_up(&banks));
    report(5, "resolution increases with frequency", resolution(&banks));
    report(6, "noise slope ordering", noise_slopes(&banks));
    report(7, "bound evaluators", bound_evaluators());
    report(8, "linearisation order", linearisation_order(&banks.setup));
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
