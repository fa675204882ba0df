//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measured figures (run with `-- --nocapture` to see them).
//!
//! Everything is property-based at desk scale: randomized families come
//! from the deterministic preset generators, so every run checks the
//! same systems.

use std::time::Instant;

use ansatz_core::calculus::{
    chaundy_consistency, chaundy_jet, fd_jet, implicit_jet, ScalarFieldSample,
};
use ansatz_core::constructors::{
    bateman_ansatz, ma_chaundy, monge_flow, superposed_wave, ufe_chaundy, wave_ansatz,
    NullCheckOptions, QuadratureRule,
};
use ansatz_core::expr::Expr;
use ansatz_core::presets::{
    anchored_grid, preset_rng, random_bateman, random_chaundy, random_expression_source,
    random_monge_ampere, random_wave,
};
use ansatz_core::residuals::{
    bateman_residual, bordered_hessian, hessian_equivalence, monge_ampere_det,
    monge_system_residual, null_gradient, wave_residual, SignConvention,
};
use ansatz_core::solve::{
    grid_continuation, grid_continuation_restricted, newton_solve, TraversalPolicy,
};
use ansatz_core::{AnsatzSystem, Jet2, NewtonOptions, SmoothMap};
use rand::Rng;

fn opts() -> NewtonOptions {
    NewtonOptions::default()
}

/// Entrywise relative difference with a unit floor, the metric used for
/// all "relative" tolerances below.
fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

#[test]
fn criterion_1_bateman_suite() {
    let start = Instant::now();
    let mut rng = preset_rng(0xB47E);
    let mut worst_residual = 0.0f64;
    let mut worst_fraction = 1.0f64;
    for family in 0..50 {
        let fam = random_bateman(&mut rng);
        let system = bateman_ansatz(&fam.f1, &fam.f2).unwrap();
        let grid = anchored_grid(&fam.anchor, 0.4, 20);
        let (_, branch) = grid_continuation_restricted(
            &system,
            &grid,
            &[fam.phi_seed],
            TraversalPolicy::Lexicographic,
            opts(),
            0.8,
            8,
        )
        .unwrap();
        let fraction = branch.convergence_fraction();
        worst_fraction = worst_fraction.min(fraction);
        assert!(
            fraction >= 0.8,
            "family {family}: convergence fraction {fraction} after restriction"
        );
        for (_, coords, unknowns) in branch.solved() {
            let sample = implicit_jet(&system, &coords, unknowns).unwrap();
            let r = bateman_residual(&sample).unwrap().normalized.abs();
            worst_residual = worst_residual.max(r);
            assert!(r <= 1e-8, "family {family}: residual {r} at {coords:?}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() <= 30.0, "bateman suite took {elapsed:?}");
    println!(
        "acceptance 1 (bateman suite): PASS: 50 families, max residual {worst_residual:.2e}, \
         min convergence {worst_fraction:.2}, runtime {:.1}s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_2_ufe_chaundy_suite() {
    let mut rng = preset_rng(0xC4A);
    let mut worst_bordered = 0.0f64;
    let mut worst_consistency = 0.0f64;
    let mut worst_agreement = 0.0f64;
    for family in 0..20 {
        let fam = random_chaundy(&mut rng);
        let system = ufe_chaundy(&fam.f).unwrap();
        let grid = anchored_grid(&fam.anchor, 0.25, 5);
        let branch = grid_continuation(
            &system,
            &grid,
            &fam.seed,
            TraversalPolicy::Lexicographic,
            opts(),
        )
        .unwrap();
        for (_, coords, unknowns) in branch.solved() {
            let sample = implicit_jet(&system, &coords, unknowns).unwrap();
            let b = bordered_hessian(&sample).unwrap().normalized.abs();
            worst_bordered = worst_bordered.max(b);
            assert!(b <= 1e-7, "family {family}: bordered {b} at {coords:?}");

            let at = [coords[0], coords[1], coords[2]];
            let defects = chaundy_consistency(&fam.f, &at, unknowns[0], unknowns[1]).unwrap();
            for d in defects {
                worst_consistency = worst_consistency.max(d);
                assert!(d <= 1e-8, "family {family}: consistency defect {d}");
            }

            let closed = chaundy_jet(&fam.f, &at, unknowns[0], unknowns[1]).unwrap();
            for k in 0..3 {
                let d = rel(sample.grad[k], closed.grad[k]);
                worst_agreement = worst_agreement.max(d);
                assert!(d <= 1e-9, "family {family}: gradient mismatch {d}");
                for l in 0..3 {
                    let d = rel(sample.hess_at(k, l), closed.hess_at(k, l));
                    worst_agreement = worst_agreement.max(d);
                    assert!(d <= 1e-9, "family {family}: hessian mismatch {d}");
                }
            }
        }
    }
    println!(
        "acceptance 2 (ufe/chaundy suite): PASS: 20 families, max bordered {worst_bordered:.2e}, \
         max consistency defect {worst_consistency:.2e}, max route disagreement {worst_agreement:.2e}"
    );
}

#[test]
fn criterion_3_monge_ampere_suite() {
    let mut rng = preset_rng(0x3A);
    let mut worst_det = 0.0f64;
    let mut worst_euler = 0.0f64;
    let mut worst_hess = 0.0f64;
    for family in 0..20 {
        let zero_g4 = family % 2 == 1;
        let fam = random_monge_ampere(&mut rng, zero_g4);
        let field = ma_chaundy(&fam.g).unwrap();
        let mut carry = fam.seed;
        for sample_idx in 0..12 {
            let coords = [
                fam.anchor[0] + 0.008 * f64::from(sample_idx),
                fam.anchor[1] - 0.006 * f64::from(sample_idx),
                fam.anchor[2] + 0.007 * f64::from(sample_idx),
            ];
            let s = field.sample(&coords, carry, opts()).unwrap();
            carry = [s.parameters[0], s.parameters[1]];

            let det = monge_ampere_det(&s).normalized.abs();
            worst_det = worst_det.max(det);
            assert!(det <= 1e-8, "family {family}: hessian det {det}");

            if zero_g4 {
                let euler: f64 = (0..3).map(|k| coords[k] * s.grad[k]).sum();
                let defect = (euler - s.phi).abs() / (1.0 + s.phi.abs());
                worst_euler = worst_euler.max(defect);
                assert!(defect <= 1e-8, "family {family}: weight-one defect {defect}");
            }

            let si = field.sample_implicit(&coords, carry, opts()).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let d = rel(s.hess_at(i, j), si.hess_at(i, j));
                    worst_hess = worst_hess.max(d);
                    assert!(d <= 1e-9, "family {family}: closed-form hessian off by {d}");
                }
            }
        }
    }
    println!(
        "acceptance 3 (monge-ampère suite): PASS: 20 families, max det {worst_det:.2e}, \
         max weight-one defect {worst_euler:.2e}, max hessian disagreement {worst_hess:.2e}"
    );
}

#[test]
fn criterion_4_wave_suite() {
    let mut rng = preset_rng(0x4A7E);
    let mut worst_wave = 0.0f64;
    let mut worst_null = 0.0f64;
    for family in 0..20 {
        let fam = random_wave(&mut rng);
        let system = wave_ansatz(&fam.f, NullCheckOptions::default()).unwrap();
        let grid = anchored_grid(&fam.anchor, 0.25, 5);
        let branch = grid_continuation(
            &system,
            &grid,
            &[fam.u_seed],
            TraversalPolicy::Lexicographic,
            opts(),
        )
        .unwrap();
        for (_, coords, unknowns) in branch.solved() {
            let sample = implicit_jet(&system, &coords, unknowns).unwrap();
            let w = wave_residual(&sample, 0).unwrap().normalized.abs();
            let n = null_gradient(&sample, 0).unwrap().normalized.abs();
            worst_wave = worst_wave.max(w);
            worst_null = worst_null.max(n);
            assert!(w <= 1e-8, "family {family}: wave residual {w}");
            assert!(n <= 1e-8, "family {family}: null-gradient {n}");
        }
    }

    // The non-admissible family (u, 1, 0) must be rejected at build time.
    let bad = vec![
        SmoothMap::parse("u", &["u"]).unwrap(),
        SmoothMap::parse("1", &["u"]).unwrap(),
        SmoothMap::parse("0", &["u"]).unwrap(),
    ];
    assert!(wave_ansatz(&bad, NullCheckOptions::default()).is_err());

    // Superposition closure: profile s² with 8 nodes integrates to
    // 2π t² + π(x² + y²).
    let profile = SmoothMap::parse("s^2", &["s", "theta"]).unwrap();
    let field = superposed_wave(profile, QuadratureRule::periodic_trapezoid(8)).unwrap();
    let origin = field.sample(&[0.0, 0.0, 0.0]).unwrap();
    assert!(origin.phi.abs() <= 1e-12);
    let unit = field.sample(&[1.0, 0.0, 0.0]).unwrap();
    assert!((unit.phi - std::f64::consts::TAU).abs() <= 1e-9);
    let mut worst_super = 0.0f64;
    for coords in [[0.3, 0.7, -0.4], [1.1, -0.2, 0.5], [0.0, 1.0, 1.0]] {
        let s = field.sample(&coords).unwrap();
        worst_super = worst_super.max(wave_residual(&s, 0).unwrap().normalized.abs());
    }
    assert!(worst_super <= 1e-9);
    println!(
        "acceptance 4 (wave suite): PASS: 20 families, max wave {worst_wave:.2e}, \
         max null-gradient {worst_null:.2e}, superposed residual {worst_super:.2e}, \
         non-null family rejected"
    );
}

#[test]
fn criterion_5_monge_flow_suite() {
    let f = vec![
        SmoothMap::parse("a", &["a", "b"]).unwrap(),
        SmoothMap::parse("0", &["a", "b"]).unwrap(),
    ];
    let field = monge_flow(&f).unwrap();
    let mut worst_value = 0.0f64;
    let mut worst_residual = 0.0f64;
    let mut worst_convention = 0.0f64;
    let mut carry = vec![0.0, 0.0];
    for it in 0..=20 {
        let t = 0.1 * f64::from(it); // t ∈ [0, 2]
        for ix in 0..5 {
            let x = -1.0 + 0.5 * f64::from(ix);
            let coords = [t, x, 0.3];
            let s = field.sample(&coords, &carry, opts()).unwrap();
            carry = vec![s.components[0].value, s.components[1].value];
            let expected = x / (1.0 + t);
            worst_value = worst_value.max((s.components[0].value - expected).abs());
            assert!((s.components[0].value - expected).abs() <= 1e-10);

            let mat = monge_system_residual(&s, SignConvention::Material).unwrap();
            for r in &mat {
                worst_residual = worst_residual.max(r.raw.abs());
                assert!(r.raw.abs() <= 1e-10);
            }
            let pri = monge_system_residual(&s, SignConvention::Printed).unwrap();
            for (i, comp) in s.components.iter().enumerate() {
                let defect = (mat[i].raw + pri[i].raw - 2.0 * comp.grad[0]).abs();
                worst_convention = worst_convention.max(defect);
                assert!(defect <= 1e-13 * (1.0 + comp.grad[0].abs()));
            }
        }
    }
    println!(
        "acceptance 5 (monge flow): PASS: max |u − x/(1+t)| {worst_value:.2e}, \
         max residual {worst_residual:.2e}, convention defect {worst_convention:.2e}"
    );
}

#[test]
fn criterion_6_calculus_oracle() {
    let mut rng = preset_rng(0x0AC1);
    let mut pairs = 0;
    let mut worst_grad = 0.0f64;
    let mut worst_hess = 0.0f64;

    let mut check = |system: &AnsatzSystem, coords: &[f64], seed: &[f64]| {
        let solved = newton_solve(system, coords, seed, opts()).unwrap();
        let exact = implicit_jet(system, coords, &solved.unknowns).unwrap();
        let fd1 = fd_jet(system, coords, seed, 1e-5, opts()).unwrap();
        for k in 0..coords.len() {
            let d = rel(exact.grad[k], fd1.grad[k]);
            worst_grad = worst_grad.max(d);
            assert!(d <= 1e-5, "gradient oracle off by {d}");
        }
        let fd2 = fd_jet(system, coords, seed, 1e-4, opts()).unwrap();
        for k in 0..coords.len() {
            for l in 0..coords.len() {
                let d = rel(exact.hess_at(k, l), fd2.hess_at(k, l));
                worst_hess = worst_hess.max(d);
                assert!(d <= 1e-3, "hessian oracle off by {d}");
            }
        }
        pairs += 1;
    };

    for _ in 0..100 {
        let fam = random_bateman(&mut rng);
        let system = bateman_ansatz(&fam.f1, &fam.f2).unwrap();
        check(&system, &fam.anchor, &[fam.phi_seed]);
    }
    for _ in 0..50 {
        let fam = random_chaundy(&mut rng);
        let system = ufe_chaundy(&fam.f).unwrap();
        check(&system, &fam.anchor, &fam.seed);
    }
    for _ in 0..50 {
        let fam = random_wave(&mut rng);
        let system = wave_ansatz(&fam.f, NullCheckOptions::default()).unwrap();
        check(&system, &fam.anchor, &[fam.u_seed]);
    }
    assert_eq!(pairs, 200);

    // Jet algebra against finite differences of the scalar evaluator.
    let params = ["x", "y", "z"];
    let mut worst_expr = 0.0f64;
    let mut checked = 0;
    while checked < 100 {
        let d = rng.gen_range(1..=3usize);
        let src = random_expression_source(&mut rng, &params[..d]);
        let map = SmoothMap::parse(&src, &params[..d]).unwrap();
        let p: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let Ok(jet) = map.eval_jets(&Jet2::seed_all(&p)) else { continue };
        let eval = |q: &[f64]| map.eval_scalar(q).unwrap();
        let (h1, h2) = (1e-5, 1e-4);
        for k in 0..d {
            let mut hi = p.clone();
            let mut lo = p.clone();
            hi[k] += h1;
            lo[k] -= h1;
            let fd = (eval(&hi) - eval(&lo)) / (2.0 * h1);
            let dg = rel(jet.grad[k], fd);
            worst_expr = worst_expr.max(dg);
            assert!(dg <= 1e-5, "jet gradient of `{src}` off by {dg}");
        }
        for k in 0..d {
            for l in k..d {
                let fd = if k == l {
                    let mut hi = p.clone();
                    let mut lo = p.clone();
                    hi[k] += h2;
                    lo[k] -= h2;
                    (eval(&hi) - 2.0 * eval(&p) + eval(&lo)) / (h2 * h2)
                } else {
                    let shift = |dk: f64, dl: f64| {
                        let mut q = p.clone();
                        q[k] += dk;
                        q[l] += dl;
                        eval(&q)
                    };
                    (shift(h2, h2) - shift(h2, -h2) - shift(-h2, h2) + shift(-h2, -h2))
                        / (4.0 * h2 * h2)
                };
                let dh = rel(jet.hess_at(k, l), fd);
                worst_expr = worst_expr.max(dh);
                assert!(dh <= 1e-5, "jet hessian of `{src}` off by {dh}");
            }
        }
        checked += 1;
    }
    println!(
        "acceptance 6 (calculus oracle): PASS: 200 system pairs \
         (grad {worst_grad:.2e}, hess {worst_hess:.2e}), 100 expressions ({worst_expr:.2e})"
    );
}

#[test]
fn criterion_7_hessian_equivalence() {
    // Hand calibration: φ = x1² + x2² + x3 against z = c − x1² − x2².
    let base = [0.4, -0.3, 0.7];
    let phi_map = SmoothMap::parse("x1^2 + x2^2 + x3", &["x1", "x2", "x3"]).unwrap();
    let phi_sample = ScalarFieldSample::from_map(&phi_map, &base).unwrap();
    let c = phi_sample.phi;
    let z_map =
        SmoothMap::parse(&format!("{c} - x1^2 - x2^2"), &["x1", "x2"]).unwrap();
    let z_sample = ScalarFieldSample::from_map(&z_map, &base[..2]).unwrap();
    let eq = hessian_equivalence(&phi_sample, &z_sample, 1e-10).unwrap();
    assert!((eq.det_hz - 4.0).abs() <= 1e-12);
    assert!((eq.bordered + 4.0).abs() <= 1e-12);
    assert!((eq.ratio + 1.0).abs() <= 1e-12);

    // Ten random level-set pairs in d = 3: the slice is re-derived by an
    // implicit solve of φ(x1, x2, z) = c, then both determinants compared.
    let mut rng = preset_rng(0xE16);
    let mut tested = 0;
    let mut worst_ratio = 0.0f64;
    let mut nonzero_pairs = 0;
    while tested < 10 {
        let src = random_expression_source(&mut rng, &["x1", "x2", "x3"]);
        let map = SmoothMap::parse(&src, &["x1", "x2", "x3"]).unwrap();
        let base: Vec<f64> = (0..3).map(|_| rng.gen_range(0.4..1.2)).collect();
        let Ok(phi_sample) = ScalarFieldSample::from_map(&map, &base) else { continue };
        if phi_sample.grad[2].abs() < 0.3 {
            continue;
        }
        // z-system: φ(x1, x2, z) − c = 0 with unknown z in the phi slot.
        let c = phi_sample.phi;
        let body = Expr::sub(
            map.body().substitute(&[Expr::var(1), Expr::var(2), Expr::var(0)]),
            Expr::num(c),
        );
        let z_map = SmoothMap::from_parts(
            vec!["phi".into(), "x1".into(), "x2".into()],
            body,
        );
        let z_system = AnsatzSystem::new(
            vec!["phi".into()],
            vec!["x1".into(), "x2".into()],
            vec![z_map],
        )
        .unwrap();
        let Ok(solved) = newton_solve(&z_system, &base[..2], &[base[2]], opts()) else {
            continue;
        };
        let Ok(z_sample) = implicit_jet(&z_system, &base[..2], &solved.unknowns) else {
            continue;
        };
        let Ok(eq) = hessian_equivalence(&phi_sample, &z_sample, 1e-8) else { continue };

        // Zero-set equivalence: the two determinants vanish together.
        let hz_zero = eq.det_hz_normalized.abs() <= 1e-8;
        let bordered_zero = eq.bordered_normalized.abs() <= 1e-8;
        assert_eq!(hz_zero, bordered_zero, "zero sets disagree for `{src}`");
        if !bordered_zero {
            nonzero_pairs += 1;
            let expected = -1.0 / phi_sample.grad[2].powi(4);
            let d = (eq.ratio - expected).abs() / (1.0 + expected.abs());
            worst_ratio = worst_ratio.max(d);
            assert!(d <= 1e-6, "ratio off by {d} for `{src}`");
        }
        tested += 1;
    }
    assert!(nonzero_pairs >= 5, "suite needs informative non-solution pairs");

    // Solution pairs: on a Chaundy solution both sides vanish.
    let sol = SmoothMap::parse("-(t^2/4 + x)/y", &["t", "x", "y"]).unwrap();
    for base in [[1.2, 0.4, 0.9], [0.8, -0.2, 1.1]] {
        let phi_sample = ScalarFieldSample::from_map(&sol, &base).unwrap();
        let c = phi_sample.phi;
        let body = Expr::sub(
            sol.body().substitute(&[Expr::var(1), Expr::var(2), Expr::var(0)]),
            Expr::num(c),
        );
        let z_map =
            SmoothMap::from_parts(vec!["phi".into(), "t".into(), "x".into()], body);
        let z_system = AnsatzSystem::new(
            vec!["phi".into()],
            vec!["t".into(), "x".into()],
            vec![z_map],
        )
        .unwrap();
        let solved = newton_solve(&z_system, &base[..2], &[base[2]], opts()).unwrap();
        let z_sample = implicit_jet(&z_system, &base[..2], &solved.unknowns).unwrap();
        let eq = hessian_equivalence(&phi_sample, &z_sample, 1e-8).unwrap();
        assert!(eq.det_hz_normalized.abs() <= 1e-8);
        assert!(eq.bordered_normalized.abs() <= 1e-8);
    }
    println!(
        "acceptance 7 (hessian equivalence): PASS: calibration exact, 10 random pairs \
         ({nonzero_pairs} informative, ratio defect {worst_ratio:.2e}), solution pairs vanish"
    );
}

#[test]
fn criterion_8_negative_controls() {
    let quad = SmoothMap::parse("t^2 + x", &["t", "x"]).unwrap();
    let s = ScalarFieldSample::from_map(&quad, &[0.7, 0.4]).unwrap();
    let b = bateman_residual(&s).unwrap().raw;
    assert!((b - 2.0).abs() <= 1e-12);

    let ball = SmoothMap::parse("(x1^2 + x2^2 + x3^2)/2", &["x1", "x2", "x3"]).unwrap();
    let s = ScalarFieldSample::from_map(&ball, &[0.1, -0.5, 0.8]).unwrap();
    let m = monge_ampere_det(&s).raw;
    assert!((m - 1.0).abs() <= 1e-12);

    let tsq = SmoothMap::parse("t^2", &["t", "x"]).unwrap();
    let s = ScalarFieldSample::from_map(&tsq, &[0.3, 0.9]).unwrap();
    let w = wave_residual(&s, 0).unwrap().raw;
    assert!((w - 2.0).abs() <= 1e-12);

    println!(
        "acceptance 8 (negative controls): PASS: bateman(t²+x) = {b}, \
         monge-ampère(Σx²/2) = {m}, wave(t²) = {w}"
    );
}

#[test]
fn criterion_9_cli_contract() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("scenario.json");
    std::fs::write(
        &config_path,
        r#"{
            "equation": "bateman",
            "functions": { "f1": "phi", "f2": "1" },
            "grid": [
                { "min": 1.0, "max": 2.0, "count": 20 },
                { "min": 0.0, "max": 0.9, "count": 20 }
            ],
            "seed_values": [0.3],
            "rng_seed": 42
        }"#,
    )
    .unwrap();
    let run = |extra: &[&str]| {
        let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_ansatz"));
        cmd.args(["--config", config_path.to_str().unwrap()]);
        cmd.args(extra);
        cmd.output().unwrap()
    };

    // Determinism: byte-identical reports for fixed config and seed.
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    assert_eq!(run(&["--out", a.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(run(&["--out", b.to_str().unwrap()]).status.code(), Some(0));
    let bytes_a = std::fs::read(&a).unwrap();
    assert_eq!(bytes_a, std::fs::read(&b).unwrap());

    // Exit statuses per contract.
    let out = dir.path().join("c.json");
    assert_eq!(
        run(&["--out", out.to_str().unwrap(), "--tolerance", "1e-30"]).status.code(),
        Some(1),
        "residual failure exits 1"
    );
    let usage = std::process::Command::new(env!("CARGO_BIN_EXE_ansatz"))
        .output()
        .unwrap();
    assert_eq!(usage.status.code(), Some(2), "missing --config exits 2");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"equation\": \"heat\"}").unwrap();
    let config_err = std::process::Command::new(env!("CARGO_BIN_EXE_ansatz"))
        .args(["--config", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(config_err.status.code(), Some(3), "config error exits 3");

    let report: serde_json::Value = serde_json::from_slice(&bytes_a).unwrap();
    assert_eq!(report["summary"]["convergence_fraction"], 1.0);
    let elapsed = start.elapsed();
    println!(
        "acceptance 9 (cli contract): PASS: deterministic reports, statuses 0/1/2/3, \
         runtime {:.1}s",
        elapsed.as_secs_f64()
    );
}
