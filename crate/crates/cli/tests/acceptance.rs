//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p isospec-cli --test acceptance`.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use isospec_cli::{run, Command, RunConfig, Source};
use isospec_core::catalog::{
    generic_start_pair, so5_family, so5_family_domain, two_plane_det_check, two_plane_family,
    TwoPlaneParams,
};
use isospec_core::curvature::{ric_v, scal_g, total_scal_integral, BaseGroupData};
use isospec_core::flow::{integrate_flow, y_field};
use isospec_core::heat::{
    c_ric_quadrature_difference, heat_comparison, moment1, moment2, sphere_mean, sphere_volume,
    OneFormVerdict,
};
use isospec_core::invariants::{
    dp_ab_directional, dq_along_y, eigen_multiset, is_isospectral, p_ab, table_keys,
};
use isospec_core::random::{random_jmap, random_orthogonal, random_skew};
use isospec_core::skew::{char_poly, find_conjugator, pencil_eval};
use isospec_core::{JMap, SkewMatrix};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Outcome {
    checks: Vec<(String, bool)>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { checks: vec![] }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn budget(out: &mut Outcome, elapsed: Duration, limit: Duration) {
    out.check(
        format!("runtime {elapsed:.2?} < {limit:?}"),
        elapsed < limit,
    );
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn base() -> BaseGroupData {
    BaseGroupData::su2_x_su2_unit()
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    let j = generic_start_pair();
    let (dq, el) = timed(|| dq_along_y(&j).unwrap());
    out.check(
        format!("dq(Y) = {dq}, expected 2"),
        (dq - 2.0).abs() <= 1e-9,
    );
    budget(&mut out, el, Duration::from_millis(1));
    out
}

fn criterion_2() -> Outcome {
    let mut out = Outcome::new();
    let grid = [-1.0, -0.5, 0.3, 1.0, 2.0];
    let ((printed, quartic, ric), el) = timed(|| {
        let (lo, hi) = so5_family_domain();
        let mut printed = 0.0f64;
        let mut quartic = 0.0f64;
        let mut ric = 0.0f64;
        for t in linspace(lo, hi, 20) {
            let j = so5_family(t).unwrap();
            for &s in &grid {
                for &u in &grid {
                    let c = char_poly(&pencil_eval(&j, &[s, u]).unwrap());
                    let c3 = 3.0 * s * s + 2.0 * u * u;
                    let r2 = s * s + u * u;
                    let rel = |e: [f64; 6]| {
                        let scale = e.iter().map(|x| x.abs()).fold(1.0, f64::max);
                        (0..6)
                            .map(|k| (c.coeff(k) - e[k]).abs() / scale)
                            .fold(0.0, f64::max)
                    };
                    printed = printed.max(rel([0.0, r2, 0.0, c3, 0.0, 1.0]));
                    quartic = quartic.max(rel([0.0, r2 * r2, 0.0, c3, 0.0, 1.0]));
                }
            }
            ric = ric.max((ric_v(&j).norm_squared() - (t * t - t + 6.5)).abs());
        }
        (printed, quartic, ric)
    });
    out.check(
        format!(
            "char poly vs λ⁵+(3s²+2u²)λ³+(s²+u²)λ: max rel err {printed:.3e} \
             (against (s²+u²)²λ instead: {quartic:.1e})"
        ),
        printed <= 1e-9,
    );
    out.check(
        format!("‖Ric_v‖² vs t²−t+13/2: max err {ric:.1e}"),
        ric <= 1e-9,
    );
    budget(&mut out, el, Duration::from_millis(100));
    out
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    let p = TwoPlaneParams::new(1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
    let (res, el) = timed(|| {
        let (lo, hi) = p.interval();
        let ts = linspace(lo, hi, 10);
        let iso = ts.iter().all(|&t| {
            let ex = two_plane_family(&p, t).unwrap();
            is_isospectral(&ex.j_ref, &ex.j_t, 1e-8)
                .unwrap()
                .isospectral
        });
        let fit = two_plane_det_check(&p, &ts).unwrap();
        let rv: Vec<DMatrix<f64>> = ts
            .iter()
            .map(|&t| ric_v(&two_plane_family(&p, t).unwrap().j_t))
            .collect();
        let norms: Vec<f64> = rv.iter().map(|r| r.norm_squared()).collect();
        let dets: Vec<f64> = rv.iter().map(|r| r.determinant()).collect();
        (lo, hi, iso, fit, norms, dets)
    });
    let (lo, hi, iso, fit, norms, dets) = res;
    let spread = |v: &[f64]| {
        v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
    };
    out.check(
        format!("interval [{lo:.6}, {hi:.6}] = [−1/3, 1/4]"),
        (lo + 1.0 / 3.0).abs() < 1e-12 && (hi - 0.25).abs() < 1e-12,
    );
    out.check("isospectral at all 10 samples, tol 1e-8", iso);
    out.check(
        format!(
            "det(a²+b(t)²) slope {:.9} vs −48 ± 1e-6 (det(−(a²+b(t)²)) has slope {:.9})",
            fit.slope, -fit.slope
        ),
        (fit.slope + 48.0).abs() <= 1e-6,
    );
    out.check(
        format!("linearity residual {:.1e} ≤ 1e-8", fit.max_residual),
        fit.max_residual <= 1e-8,
    );
    out.check(
        format!("‖Ric_v‖² spread {:.1e} ≤ 1e-9", spread(&norms)),
        spread(&norms) <= 1e-9,
    );
    out.check(
        format!("det(Ric_v) spread {:.3e} > 1e-6", spread(&dets)),
        spread(&dets) > 1e-6,
    );
    budget(&mut out, el, Duration::from_millis(100));
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    let ((tangent, fd), el) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut tangent = 0.0f64; // worst |dp(Y)| / bound
        let mut fd = 0.0f64; // worst |dp(ε) − FD| / bound
        for i in 0..20 {
            let m = 5 + i % 3;
            let j = random_jmap(&mut rng, m, 2);
            let y = y_field(&j).unwrap();
            let eps = random_jmap(&mut rng, m, 2);
            let eps = eps.scale(eps.norm().recip());
            let s = j.component(0).norm() + j.component(1).norm();
            let h = 1e-4 * s;
            let plus = j.axpy(h, &eps).unwrap();
            let minus = j.axpy(-h, &eps).unwrap();
            for (a, b) in table_keys(m) {
                let n = (a + b) as i32;
                let d = dp_ab_directional(&j, &y, a, b).unwrap();
                tangent = tangent.max(d.abs() / (1e-8 * s.powi(n + 3)));
                let exact = dp_ab_directional(&j, &eps, a, b).unwrap();
                let central =
                    (p_ab(&plus, a, b).unwrap() - p_ab(&minus, a, b).unwrap()) / (2.0 * h);
                fd = fd.max((exact - central).abs() / (1e-6 * (s + 1.0).powi(n)));
            }
        }
        (tangent, fd)
    });
    out.check(
        format!("dp(Y) = 0: worst |dp|/bound {tangent:.1e} ≤ 1"),
        tangent <= 1.0,
    );
    out.check(
        format!("dp vs central differences: worst err/bound {fd:.1e} ≤ 1"),
        fd <= 1.0,
    );
    budget(&mut out, el, Duration::from_secs(5));
    out
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    let (worst, el) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst = 0.0f64;
        for m in [4, 3] {
            for _ in 0..50 {
                let j = random_jmap(&mut rng, m, 2);
                let scale = j.component(0).norm().powi(4) * j.component(1).norm().powi(3);
                worst = worst.max(dq_along_y(&j).unwrap().abs() / (1e-10 * scale));
            }
        }
        worst
    });
    out.check(
        format!("dq(Y) = 0 on so(4), so(3): worst |dq|/bound {worst:.1e} ≤ 1"),
        worst <= 1.0,
    );
    budget(&mut out, el, Duration::from_secs(1));
    out
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let j = generic_start_pair();
    let ((tr, fine), el) = timed(|| {
        (
            integrate_flow(&j, 0.1, 1e-3, 1e-8).unwrap(),
            integrate_flow(&j, 0.1, 5e-4, 1e-8).unwrap(),
        )
    });
    let drift = tr.max_drift();
    out.check(
        format!("max drift {drift:.2e} ≤ 1e-8"),
        drift <= 1e-8 && !tr.degraded,
    );
    let dq = tr.q_series.last().unwrap().1 - tr.q_series[0].1;
    out.check(format!("q(0.1) − q(0) = {dq:.4} > 0.05"), dq > 0.05);
    let r = &tr.ric_norm_series;
    let slope = (-3.0 * r[0].1 + 4.0 * r[1].1 - r[2].1) / (2.0 * tr.step_size);
    out.check(
        format!("d/dt ‖Ric_v‖² at 0 = {slope:.5}, expected 1 ± 0.05"),
        (slope - 1.0).abs() <= 0.05,
    );
    let ratio = drift / fine.max_drift();
    out.check(
        format!("drift ratio when halving dt {ratio:.1} ≥ 8"),
        ratio >= 8.0,
    );
    budget(&mut out, el, Duration::from_secs(5));
    out
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new();
    let b = base();
    let (h, el) = timed(|| {
        heat_comparison(
            &so5_family(0.0).unwrap(),
            &so5_family(0.25).unwrap(),
            &b,
            1e-9,
        )
        .unwrap()
    });
    out.check(
        format!("Δ‖Ric_v‖² = {} vs 0.1875", h.delta_ric_norm_sq),
        (h.delta_ric_norm_sq - 0.1875).abs() <= 1e-9,
    );
    let expected = b.vol_s * sphere_volume(4) * 72.0 / 35.0 * 0.1875;
    let rel = (h.delta_a2_1_combination - expected).abs() / expected.abs();
    out.check(
        format!("Δc_s + 10Δc_Ric rel err {rel:.1e} ≤ 1e-9"),
        rel <= 1e-9,
    );
    out.check(
        format!("verdict {:?}", h.verdict),
        h.verdict == OneFormVerdict::NotOneFormIsospectral,
    );
    budget(&mut out, el, Duration::from_millis(100));
    out
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new();
    let b = base();
    let ((d, moments), el) = timed(|| {
        let j0 = so5_family(0.0).unwrap();
        let j1 = so5_family(0.25).unwrap();
        let d = c_ric_quadrature_difference(&j0, &j1, &b, 1_000_000, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut worst = 0.0f64;
        for i in 0..20u64 {
            let m = 2 + (i as usize) % 6;
            let a = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
            let vol = sphere_volume(m - 1);
            let quad = |v: &[f64]| {
                let v = DVector::from_column_slice(v);
                (&a * &v).dot(&v)
            };
            let e1 = sphere_mean(m, 100_000, 2 * i, quad);
            let e2 = sphere_mean(m, 100_000, 2 * i + 1, |v| quad(v).powi(2));
            worst = worst
                .max((e1.mean * vol - moment1(&a).unwrap()).abs() / (3.0 * e1.std_error * vol));
            worst = worst
                .max((e2.mean * vol - moment2(&a).unwrap()).abs() / (3.0 * e2.std_error * vol));
        }
        (d, worst)
    });
    let closed = b.vol_s * sphere_volume(4) * 0.2 * 0.1875;
    let z = (d.value - closed) / d.std_error;
    out.check(
        format!(
            "ΔC_Ric quadrature {:.4} ± {:.4} vs closed form {closed:.4}: |z| = {:.2} ≤ 3",
            d.value,
            d.std_error,
            z.abs()
        ),
        z.abs() <= 3.0,
    );
    out.check(
        format!("moments vs Monte Carlo: worst |err|/3σ {moments:.2} ≤ 1"),
        moments <= 1.0,
    );
    budget(&mut out, el, Duration::from_secs(60));
    out
}

/// Isospectral iff the pencil spectra agree at every sampled weight.
fn eigen_oracle(j: &JMap, j2: &JMap, weights: &[[f64; 2]]) -> bool {
    weights.iter().all(|w| {
        let e1 = eigen_multiset(&pencil_eval(j, w).unwrap());
        let e2 = eigen_multiset(&pencil_eval(j2, w).unwrap());
        let scale = 1.0 + e1.iter().chain(&e2).cloned().fold(0.0, f64::max);
        e1.iter()
            .zip(&e2)
            .all(|(x, y)| (x - y).abs() <= 1e-6 * scale)
    })
}

fn criterion_9() -> Outcome {
    let mut out = Outcome::new();
    let ((agree, iso_count, total), el) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut pairs: Vec<(JMap, JMap)> = vec![];
        for i in 0..8 {
            let j = random_jmap(&mut rng, 5 + i % 3, 2);
            let q = random_orthogonal(&mut rng, j.m());
            pairs.push((j.clone(), j.conjugate(&q)));
        }
        let (lo, hi) = so5_family_domain();
        for (t0, t1) in [(0.0, 0.25), (lo, hi), (-0.3, 0.1), (0.2, 0.35)] {
            pairs.push((so5_family(t0).unwrap(), so5_family(t1).unwrap()));
        }
        for (p, t) in [
            (TwoPlaneParams::new(1.0, 2.0, 1.0, 1.0, 1.0).unwrap(), 0.2),
            (TwoPlaneParams::new(0.7, 1.3, 0.4, 2.0, 0.9).unwrap(), 0.3),
            (TwoPlaneParams::new(1.0, 1.5, 0.5, 0.8, 1.2).unwrap(), -0.2),
        ] {
            let ex = two_plane_family(&p, t).unwrap();
            pairs.push((ex.j_ref, ex.j_t));
        }
        let iso_count = pairs.len();
        for i in 0..iso_count {
            let (j, j2) = pairs[i].clone();
            let bump =
                JMap::new(vec![random_skew(&mut rng, j.m()), SkewMatrix::zeros(j.m())]).unwrap();
            let bumped = j2.axpy(0.05 * j2.norm() / bump.norm(), &bump).unwrap();
            pairs.push((j, bumped));
        }
        let weights: Vec<[f64; 2]> = (0..50)
            .map(|_| [rng.sample(StandardNormal), rng.sample(StandardNormal)])
            .collect();
        let mut agree = 0;
        for (k, (j, j2)) in pairs.iter().enumerate() {
            let fast = is_isospectral(j, j2, 1e-8).unwrap().isospectral;
            let oracle = eigen_oracle(j, j2, &weights);
            if fast == oracle && fast == (k < iso_count) {
                agree += 1;
            }
        }
        (agree, iso_count, pairs.len())
    });
    out.check(
        format!("{agree}/{total} pairs agree with the eigenvalue oracle ({iso_count} isospectral)"),
        agree == total && total == 30,
    );
    budget(&mut out, el, Duration::from_secs(10));
    out
}

fn criterion_10() -> Outcome {
    let mut out = Outcome::new();
    let ((found, worst_res, worst_orth, rejected), el) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (mut found, mut worst_res, mut worst_orth) = (0, 0.0f64, 0.0f64);
        for i in 0..20 {
            let m = 3 + i % 6;
            let a = random_skew(&mut rng, m);
            let q = random_orthogonal(&mut rng, m);
            let b = a.conjugate(&q);
            if let Ok(c) = find_conjugator(&a, &b, 1e-8) {
                found += 1;
                worst_res = worst_res.max(c.residual);
                worst_orth = worst_orth.max(c.orthogonality_defect);
            }
        }
        let mut rejected = 0;
        for i in 0..10 {
            let m = 3 + i % 6;
            let a = random_skew(&mut rng, m);
            let q = random_orthogonal(&mut rng, m);
            let b = if i % 2 == 0 {
                a.scale(1.01).conjugate(&q)
            } else {
                random_skew(&mut rng, m)
            };
            if find_conjugator(&a, &b, 1e-8).is_err() {
                rejected += 1;
            }
        }
        (found, worst_res, worst_orth, rejected)
    });
    out.check(format!("{found}/20 conjugators found"), found == 20);
    out.check(
        format!("worst residual {worst_res:.1e} ≤ 1e-8"),
        worst_res <= 1e-8,
    );
    out.check(
        format!("worst orthogonality defect {worst_orth:.1e} ≤ 1e-10"),
        worst_orth <= 1e-10,
    );
    out.check(
        format!("{rejected}/10 mismatched pairs rejected"),
        rejected == 10,
    );
    budget(&mut out, el, Duration::from_secs(1));
    out
}

fn criterion_11() -> Outcome {
    let mut out = Outcome::new();
    let b = base();
    let mut pairs: Vec<(JMap, JMap)> = vec![];
    let (lo, hi) = so5_family_domain();
    for (t0, t1) in [(0.0, 0.25), (lo, hi), (-0.3, 0.1)] {
        pairs.push((so5_family(t0).unwrap(), so5_family(t1).unwrap()));
    }
    for (p, t) in [
        (TwoPlaneParams::new(1.0, 2.0, 1.0, 1.0, 1.0).unwrap(), 0.2),
        (
            TwoPlaneParams::new(1.0, 2.0, 1.0, 1.0, 1.0).unwrap(),
            -1.0 / 3.0,
        ),
        (TwoPlaneParams::new(0.7, 1.3, 0.4, 2.0, 0.9).unwrap(), 0.3),
    ] {
        let ex = two_plane_family(&p, t).unwrap();
        pairs.push((ex.j_ref, ex.j_t));
    }
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
    let (mut sg, mut tr, mut ts, mut a0) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (j, j2) in &pairs {
        sg = sg.max(rel(scal_g(j), scal_g(j2)));
        tr = tr.max(rel(ric_v(j).trace(), ric_v(j2).trace()));
        ts = ts.max(rel(total_scal_integral(j, &b), total_scal_integral(j2, &b)));
        let h = heat_comparison(j, j2, &b, 1e-9).unwrap();
        let terms =
            (5.0 * h.delta_c_s).abs() + (2.0 * h.delta_c_ric).abs() + (2.0 * h.delta_c_r).abs();
        if terms > 0.0 {
            a0 = a0.max(h.delta_a2_0.abs() * 360.0 / terms);
        }
    }
    out.check(format!("scal_G equal: worst rel {sg:.1e}"), sg <= 1e-9);
    out.check(format!("tr Ric_v equal: worst rel {tr:.1e}"), tr <= 1e-9);
    out.check(format!("∫scal equal: worst rel {ts:.1e}"), ts <= 1e-9);
    out.check(format!("Δa₂⁰ = 0: worst rel {a0:.1e}"), a0 <= 1e-9);
    out
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = vec![];
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

fn criterion_12() -> Outcome {
    let mut out = Outcome::new();
    let configs = {
        let mut certify = RunConfig::new(Command::Certify);
        certify.input = Some(Source::Catalog("ex4.3@t=0".into()));
        certify.input2 = Some(Source::Catalog("ex4.3@t=0.25".into()));
        certify.samples = Some(20_000);
        certify.seed = 12;
        let mut flow = RunConfig::new(Command::Flow);
        flow.input = Some(Source::Catalog("lemma4.2".into()));
        flow.t_end = 0.02;
        flow.write_states = true;
        let mut report = RunConfig::new(Command::Report);
        report.input = Some(Source::Catalog("ex4.3@t=0".into()));
        report.samples = Some(20_000);
        report.seed = 7;
        [("certify", certify), ("flow", flow), ("report", report)]
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    for (name, config) in configs {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ca = RunConfig {
            out: Some(a.path().to_path_buf()),
            ..config.clone()
        };
        let cb = RunConfig {
            out: Some(b.path().to_path_buf()),
            ..config
        };
        let code_a = run(&ca);
        // second run on a single thread
        let code_b = single.install(|| run(&cb));
        let (ta, tb) = (read_tree(a.path()), read_tree(b.path()));
        out.check(
            format!(
                "{name}: exit codes {code_a}/{code_b}, {} files byte-identical",
                ta.len()
            ),
            code_a == 0 && code_b == 0 && !ta.is_empty() && ta == tb,
        );
    }
    out
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("dq(Y) at the generic pair equals 2", criterion_1),
        (
            "one-parameter so(5) family: char poly and ‖Ric_v‖²",
            criterion_2,
        ),
        (
            "two-parameter family: interval, isospectrality, det slope, Ric_v",
            criterion_3,
        ),
        ("Y is tangent to the invariant level sets", criterion_4),
        ("dq(Y) vanishes for m ≤ 4", criterion_5),
        ("flow from the generic pair", criterion_6),
        ("heat pipeline on the so(5) pair", criterion_7),
        ("c_Ric quadrature and sphere moments", criterion_8),
        ("isospectrality predicate vs eigenvalue oracle", criterion_9),
        ("orthogonal conjugator recovery", criterion_10),
        (
            "spectral invariants agree across isospectral pairs",
            criterion_11,
        ),
        ("CLI determinism", criterion_12),
    ];
    let mut failed = vec![];
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = f();
        let status = if outcome.passed() { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status}  {name}", i + 1);
        for (what, ok) in &outcome.checks {
            println!("      [{}] {what}", if *ok { " ok " } else { "FAIL" });
        }
        if !outcome.passed() {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 12 criteria passed");
    } else {
        println!(
            "acceptance: {} of 12 criteria failed: {failed:?}",
            failed.len()
        );
        std::process::exit(1);
    }
}
