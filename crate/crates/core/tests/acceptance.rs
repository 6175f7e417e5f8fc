//! Acceptance checks. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.
//!
//! Reference values here come from oracles built in this file: Born
//! probabilities summed straight off the explicit tripartite vector, Gram
//! square roots for the square-root measurement, and entropy sums of the form
//! `Σ p·log(p / (p_a·p_e))`.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qutrit_qkd::attack::{
    ab_error, build_tripartite, eve_error, mutual_info_ab, mutual_info_ae, srm_directions,
    subspace_analysis, transformed_ancillas, AttackParams,
};
use qutrit_qkd::correlations::{
    correlation_q, correlation_q_closed, joint_probs, thresholds, BellStatistic,
};
use qutrit_qkd::information::LogBase;
use qutrit_qkd::protocol::{run, SimConfig, Source};
use qutrit_qkd::quantum::{
    gram_of, max_entangled_state, standard_settings, tritter_unitary, vectors_from_gram,
    ComplexMatrix, ComplexVector, PhaseVector,
};
use qutrit_qkd::sweep::{crossover, CrossoverOptions};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn grid(n: usize) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        let f = i as f64 / (n - 1) as f64;
        for j in 0..n {
            let lam = -0.5 + 1.5 * j as f64 / (n - 1) as f64;
            pts.push((f, lam));
        }
    }
    pts
}

/// Key-basis quantities read off the explicit 81-dimensional state.
struct Explicit {
    /// `joint_ab[a][b]`: Born probability of outcomes `(a, b)` at settings (3, 3).
    joint_ab: [[f64; 3]; 3],
    /// `joint_ae[a][3 i + e]`: Alice's trit `a`, subspace `i`, Eve's guess `e`.
    joint_ae: [[f64; 9]; 3],
    p: [f64; 3],
    /// Pairwise normalized overlaps within each subspace; `None` when empty.
    overlaps: [Option<[Complex64; 3]>; 3],
}

impl Explicit {
    fn w(&self, i: usize) -> Option<f64> {
        if self.p[i] <= 1e-14 {
            return None;
        }
        let hits: f64 = (0..3).map(|a| self.joint_ae[a][3 * i + a]).sum();
        Some(hits / self.p[i])
    }
}

/// Subspace label of an outcome pair at the key settings.
fn subspace(a: usize, b: usize) -> usize {
    (2 * (a + b)) % 3
}

/// Principal square root of a Hermitian PSD matrix, with eigenvalues below
/// a relative floor treated as zero.
fn gram_sqrt(g: &[[Complex64; 3]; 3]) -> [[Complex64; 3]; 3] {
    let m = DMatrix::from_fn(3, 3, |i, j| (g[i][j] + g[j][i].conj()) * 0.5);
    let eig = m.symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for k in 0..3 {
        let l = eig.eigenvalues[k];
        if l <= 1e-12 * top {
            continue;
        }
        let s = l.sqrt();
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x += eig.eigenvectors[(i, k)] * eig.eigenvectors[(j, k)].conj() * s;
            }
        }
    }
    out
}

fn explicit(f: f64, lam: f64) -> Explicit {
    let params = AttackParams::new(f, lam).unwrap();
    let state = build_tripartite(&params).unwrap();
    let psi = state.vector();
    let settings = standard_settings();
    let ua = tritter_unitary(settings.alice(3));
    let ub = tritter_unitary(settings.bob(3));

    let mut out = vec![Complex64::new(0.0, 0.0); 81];
    for a in 0..3 {
        for b in 0..3 {
            for e in 0..9 {
                let mut acc = Complex64::new(0.0, 0.0);
                for x in 0..3 {
                    for y in 0..3 {
                        acc += ua[(a, x)] * ub[(b, y)] * psi[(3 * x + y) * 9 + e];
                    }
                }
                out[(3 * a + b) * 9 + e] = acc;
            }
        }
    }
    let block = |a: usize, b: usize| &out[(3 * a + b) * 9..(3 * a + b) * 9 + 9];
    let inner = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
        u.iter().zip(v).map(|(x, y)| x.conj() * y).sum()
    };

    let mut joint_ab = [[0.0; 3]; 3];
    for (a, row) in joint_ab.iter_mut().enumerate() {
        for (b, x) in row.iter_mut().enumerate() {
            *x = block(a, b).iter().map(|z| z.norm_sqr()).sum();
        }
    }

    let mut joint_ae = [[0.0; 9]; 3];
    let mut p = [0.0; 3];
    let mut overlaps = [None; 3];
    for i in 0..3 {
        // Members ordered by Alice's trit.
        let members: Vec<(usize, usize)> = (0..3)
            .map(|a| (a, (0..3).find(|&b| subspace(a, b) == i).unwrap()))
            .collect();
        let mut g = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (j, &(aj, bj)) in members.iter().enumerate() {
            for (k, &(ak, bk)) in members.iter().enumerate() {
                g[j][k] = inner(block(aj, bj), block(ak, bk));
            }
        }
        p[i] = (0..3).map(|j| g[j][j].re).sum();
        if p[i] <= 1e-14 {
            continue;
        }
        let n = |j: usize| g[j][j].re.sqrt();
        overlaps[i] = Some([
            g[0][1] / (n(0) * n(1)),
            g[1][2] / (n(1) * n(2)),
            g[0][2] / (n(0) * n(2)),
        ]);
        // Square-root measurement statistics: P(guess e | member a) ∝ |√G_{e a}|².
        let root = gram_sqrt(&g);
        for a in 0..3 {
            for e in 0..3 {
                joint_ae[a][3 * i + e] = root[e][a].norm_sqr();
            }
        }
    }
    Explicit {
        joint_ab,
        joint_ae,
        p,
        overlaps,
    }
}

/// `Σ p·log(p / (p_row·p_col))` in trits.
fn mutual_information_trits<const C: usize>(joint: &[[f64; C]; 3]) -> f64 {
    let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..C).map(|c| joint.iter().map(|r| r[c]).sum()).collect();
    let mut acc = 0.0;
    for (r, row) in joint.iter().enumerate() {
        for (c, &p) in row.iter().enumerate() {
            if p > 0.0 {
                acc += p * (p / (rows[r] * cols[c])).ln();
            }
        }
    }
    acc / 3f64.ln()
}

fn q33_unity() -> Outcome {
    let s = standard_settings();
    let closed = correlation_q_closed(s.alice(3), s.bob(3)).0;
    let table = joint_probs(&max_entangled_state(), s.alice(3), s.bob(3)).unwrap();
    let via_table = correlation_q(&table).0;
    let one = Complex64::new(1.0, 0.0);
    let (d1, d2) = ((closed - one).norm(), (via_table - one).norm());
    outcome(
        d1 < 1e-12 && d2 < 1e-12,
        format!("|Q33-1| closed {d1:.1e}, table {d2:.1e} (tol 1e-12)"),
    )
}

fn bell_value() -> Outcome {
    let expected = 2.0 / 3.0 * (2.0 + 3f64.sqrt());
    let analytic = BellStatistic::from_settings(&standard_settings(), 1.0)
        .unwrap()
        .s;
    let start = Instant::now();
    let cfg = SimConfig::new(1_000_000, 20_240_601, Source::Honest).unwrap();
    let transcript = run(&cfg).unwrap();
    let elapsed = start.elapsed();
    let mc = transcript.s_estimate().unwrap_or(f64::NAN);
    let pass = (analytic - expected).abs() < 1e-9
        && (mc - expected).abs() <= 0.01
        && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "S analytic {analytic:.10} (|d| {:.1e}, tol 1e-9); MC 1e6 trials {mc:.5} (|d| {:.4}, tol 0.01) in {:.2}s (limit 10s)",
            (analytic - expected).abs(),
            (mc - expected).abs(),
            elapsed.as_secs_f64()
        ),
    )
}

fn thresholds_identity() -> Outcome {
    let t = thresholds();
    let d = (t.v0 * t.qm_value - 3f64.sqrt()).abs();
    let dv = (t.v0 - (6.0 * 3f64.sqrt() - 9.0) / 2.0).abs();
    outcome(
        d < 1e-12 && dv < 1e-15 && (t.lr_bound - 3f64.sqrt()).abs() < 1e-15,
        format!("V0 = {:.10}, |V0*S_qm - sqrt3| = {d:.1e} (tol 1e-12)", t.v0),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let (mut dp, mut dl, mut dw, mut mismatched_empty) = (0f64, 0f64, 0f64, 0usize);
    for (f, lam) in grid(20) {
        let params = AttackParams::new(f, lam).unwrap();
        let closed = subspace_analysis(&params);
        let ex = explicit(f, lam);
        for i in 0..3 {
            dp = dp.max((closed.p[i] - ex.p[i]).abs());
            match (closed.lam_tilde[i], ex.overlaps[i], closed.w[i], ex.w(i)) {
                (Some(l), Some(ov), Some(w), Some(w_ex)) => {
                    for o in ov {
                        dl = dl.max((o - Complex64::new(l, 0.0)).norm());
                    }
                    dw = dw.max((w - w_ex).abs());
                }
                (None, None, None, None) => {}
                _ => mismatched_empty += 1,
            }
        }
    }
    let elapsed = start.elapsed();
    let tol = 1e-9;
    outcome(
        dp < tol && dl < tol && dw < tol && mismatched_empty == 0 && elapsed < Duration::from_secs(30),
        format!(
            "20x20 grid: max|dP| {dp:.1e}, max|d lam~| {dl:.1e}, max|dW| {dw:.1e} (tol 1e-9), empty-subspace mismatches {mismatched_empty}, {:.2}s (limit 30s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn error_rates() -> Outcome {
    let start = Instant::now();
    let mut worst_z = 0f64;
    let mut notes = Vec::new();
    for (k, &(f, lam)) in [(0.9, 0.8), (0.7, 0.95), (1.0, 0.85)].iter().enumerate() {
        let params = AttackParams::new(f, lam).unwrap();
        let expected = ab_error(&params);
        let cfg = SimConfig::new(100_000, 1_000 + k as u64, Source::Attack(params)).unwrap();
        let t = run(&cfg).unwrap();
        let n = t.key_length() as f64;
        let qber = t.qber.unwrap_or(f64::NAN);
        let sigma = (expected * (1.0 - expected) / n).sqrt();
        let z = (qber - expected).abs() / sigma;
        worst_z = worst_z.max(if z.is_nan() { f64::INFINITY } else { z });
        notes.push(format!(
            "({f},{lam}) qber {qber:.4} vs {expected:.4} ({z:.2} sigma)"
        ));
    }
    let v0 = thresholds().v0;
    let (mut checked, mut violations) = (0usize, 0usize);
    for (f, lam) in grid(101) {
        if f * lam < v0 {
            continue;
        }
        let params = AttackParams::new(f, lam).unwrap();
        checked += 1;
        if eve_error(&params) < ab_error(&params) {
            violations += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst_z <= 3.0 && violations == 0 && checked > 0 && elapsed < Duration::from_secs(60),
        format!(
            "{}; E_Eve >= E_AB at {}/{checked} grid points with f*lam >= V0; {:.2}s (limit 60s)",
            notes.join(", "),
            checked - violations,
            elapsed.as_secs_f64()
        ),
    )
}

fn mutual_information() -> Outcome {
    let one = AttackParams::new(1.0, 1.0).unwrap();
    let e_ab = (mutual_info_ab(&one, LogBase::TRIT) - 1.0).abs();
    let e_ae = mutual_info_ae(&one, LogBase::TRIT).abs();
    let (mut d_ab, mut d_ae) = (0f64, 0f64);
    for (f, lam) in grid(50) {
        let params = AttackParams::new(f, lam).unwrap();
        let ex = explicit(f, lam);
        d_ab = d_ab.max(
            (mutual_info_ab(&params, LogBase::TRIT) - mutual_information_trits(&ex.joint_ab)).abs(),
        );
        d_ae = d_ae.max(
            (mutual_info_ae(&params, LogBase::TRIT) - mutual_information_trits(&ex.joint_ae)).abs(),
        );
    }
    outcome(
        e_ab < 1e-12 && e_ae < 1e-12 && d_ab < 1e-12 && d_ae < 1e-12,
        format!(
            "at (1,1): |I_AB-1| {e_ab:.1e}, |I_AE| {e_ae:.1e}; 50x50 brute force: max|dI_AB| {d_ab:.1e}, max|dI_AE| {d_ae:.1e} (tol 1e-12)"
        ),
    )
}

fn crossover_value() -> Outcome {
    let start = Instant::now();
    let r = crossover(&CrossoverOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let v0 = thresholds().v0;
    outcome(
        (r.v_max - 0.6629).abs() <= 0.0005 && r.v_max < v0 && elapsed < Duration::from_secs(30),
        format!(
            "v_max {:.6} at f {:.6}, lam {:.6} (target 0.6629 +/- 0.0005, V0 {v0:.6}); {:.2}s (limit 30s)",
            r.v_max,
            r.argmax_f,
            r.argmax_lam,
            elapsed.as_secs_f64()
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_qutrit-qkd");
    let runs = [("a", "1"), ("b", "1"), ("c", "4"), ("d", "3")];
    let mut artifacts = Vec::new();
    for source in [vec!["--f", "0.9", "--lam", "0.8"], vec!["--honest"]] {
        let mut group = Vec::new();
        for (name, workers) in runs {
            let path = dir.path().join(format!("{name}.txt"));
            let out = Command::new(exe)
                .args([
                    "simulate",
                    "--trials",
                    "50000",
                    "--seed",
                    "99",
                    "--workers",
                    workers,
                ])
                .args(&source)
                .arg("--out")
                .arg(&path)
                .output()
                .unwrap();
            if !out.status.success() {
                return outcome(false, format!("simulate exited with {}", out.status));
            }
            let transcript = std::fs::read(&path).unwrap();
            let summary =
                std::fs::read(dir.path().join(format!("{name}.txt.summary.json"))).unwrap();
            group.push((transcript, summary, out.stdout));
        }
        artifacts.push(group);
    }
    let identical = artifacts.iter().all(|g| g.iter().all(|x| *x == g[0]));
    let bytes = artifacts[0][0].0.len();
    outcome(
        identical,
        format!("attack and honest sources, 50000 trials, workers 1/1/4/3: transcripts ({bytes} bytes), summaries and stdout identical = {identical}"),
    )
}

fn random_phases(rng: &mut ChaCha8Rng) -> PhaseVector {
    let span = 4.0 * std::f64::consts::PI;
    PhaseVector::new([
        rng.random_range(-span..span),
        rng.random_range(-span..span),
        rng.random_range(-span..span),
    ])
    .unwrap()
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let id = ComplexMatrix::identity(3);

    let mut unitarity = 0f64;
    for _ in 0..1_000_000 {
        let u = tritter_unitary(&random_phases(&mut rng));
        unitarity = unitarity.max(u.adjoint().matmul(&u).max_abs_diff(&id));
    }

    let mut normalization = 0f64;
    let psi = max_entangled_state();
    for _ in 0..10_000 {
        let t = joint_probs(&psi, &random_phases(&mut rng), &random_phases(&mut rng)).unwrap();
        normalization = normalization.max((t.total() - 1.0).abs());
    }
    let mut orthogonality = 0f64;
    let mut srm = 0f64;
    let mut srm_checked = 0usize;
    for (f, lam) in grid(20) {
        let params = AttackParams::new(f, lam).unwrap();
        let tripartite = build_tripartite(&params).unwrap();
        normalization = normalization.max((tripartite.vector().norm_sqr() - 1.0).abs());
        let ex = explicit(f, lam);
        let total: f64 = ex.joint_ab.iter().flatten().sum();
        let total_ae: f64 = ex.joint_ae.iter().flatten().sum();
        normalization = normalization
            .max((total - 1.0).abs())
            .max((total_ae - 1.0).abs());

        let tilde = transformed_ancillas(&params).unwrap();
        for (a, b) in (0..9).map(|k| (k / 3, k % 3)) {
            for (c, d) in (0..9).map(|k| (k / 3, k % 3)) {
                if subspace(a, b) != subspace(c, d) {
                    orthogonality =
                        orthogonality.max(tilde.get(a, b).inner(tilde.get(c, d)).norm());
                }
            }
        }
        for i in 0..3 {
            let members: [ComplexVector; 3] = std::array::from_fn(|a| {
                let b = (0..3).find(|&b| subspace(a, b) == i).unwrap();
                tilde.get(a, b).clone()
            });
            if let Ok(dirs) = srm_directions(&members) {
                srm = srm.max(gram_of(&dirs).max_abs_diff(&id));
                srm_checked += 1;
            }
        }
    }

    let mut round_trip = 0f64;
    for n in 1..=6 {
        for _ in 0..200 {
            let k = rng.random_range(1..=n);
            let vectors: Vec<ComplexVector> = (0..n)
                .map(|_| {
                    ComplexVector::new(
                        (0..k)
                            .map(|_| {
                                Complex64::new(
                                    rng.random_range(-1.0..1.0),
                                    rng.random_range(-1.0..1.0),
                                )
                            })
                            .collect(),
                    )
                })
                .collect();
            let g = gram_of(&vectors);
            let realized = vectors_from_gram(&g).unwrap();
            round_trip = round_trip.max(gram_of(&realized).max_abs_diff(&g));
        }
    }

    let pass = unitarity < 1e-12
        && normalization < 1e-12
        && orthogonality < 1e-12
        && srm < 1e-10
        && srm_checked > 0
        && round_trip < 1e-10;
    outcome(
        pass,
        format!(
            "unitarity (1e6 triples) {unitarity:.1e} (tol 1e-12); normalization {normalization:.1e} (tol 1e-12); cross-subspace overlap {orthogonality:.1e} (tol 1e-12); SRM Gram-I {srm:.1e} over {srm_checked} subspaces (tol 1e-10); Gram round-trip {round_trip:.1e} (tol 1e-10)"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("Q33 = 1", q33_unity),
        ("Bell value", bell_value),
        ("thresholds", thresholds_identity),
        ("oracle equivalence", oracle_equivalence),
        ("error rates", error_rates),
        ("mutual information", mutual_information),
        ("crossover", crossover_value),
        ("determinism", determinism),
        ("property suites", property_suites),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failures += 1;
        }
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {name}: {}", k + 1, o.detail);
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
