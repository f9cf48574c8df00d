//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use lattice_wiretap::analysis::{
    empirical_leakage, faded_dual_minimum, leakage_decomposition, outage_probability,
};
use lattice_wiretap::channel::{capacity_exact, complex_normal, ChannelModel, FadingKind};
use lattice_wiretap::gaussian::convolution_distance;
use lattice_wiretap::gaussian::{
    brute_force_pmf, flatness_by_definition, flatness_factor, smoothing_dual_bound,
    smoothing_parameter, CovarianceSpec, DiscreteGaussianSpec, KleinSampler,
};
use lattice_wiretap::lattice::{ComplexLattice, CosetSystem};
use lattice_wiretap::numberfield::{catalog_names, NumberField};
use lattice_wiretap::receiver::{
    decode, error_rate, received_min_distance_bound, tail_bound_check, DecodeMode,
    ErrorRateOptions, GdfePreprocessor, ETAS, TAIL_TS,
};
use lattice_wiretap::seeds::stream_rng;
use lattice_wiretap::wiretap::{design_code, r_prime_threshold, Message, NestingSpec, WiretapCode};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn field(name: &str) -> NumberField {
    NumberField::from_catalog(name).unwrap()
}

fn ring(name: &str) -> ComplexLattice {
    ComplexLattice::from_ring(&field(name), 1.0).unwrap()
}

/// The reference code: `Q(ζ8)`, `k = 2`, index 2, `P = 10`, `R′ = 4.5`.
fn reference_code() -> WiretapCode {
    design_code(
        &field("Q(zeta8)"),
        2,
        10.0,
        2f64.ln() / 2.0,
        4.5,
        &NestingSpec::Auto,
    )
    .unwrap()
}

fn algebraic_identities() -> Check {
    let mut worst = (0.0f64, 0.0f64);
    for name in catalog_names() {
        let f = field(&name);
        let k = f.k();
        let d = f.discriminant().unsigned_abs() as f64;
        let codiff = f.codifferent().map_err(|e| e.to_string())?;
        let n = codiff.norm_f64() * d;
        ensure((n - 1.0).abs() <= 1e-12, || {
            format!("{name}: N(O^∨)|d| = {n}")
        })?;
        let lat = ring(&name);
        let vol = 2f64.powi(-(k as i32)) * d.sqrt();
        let rel = (lat.volume() / vol - 1.0).abs();
        ensure(rel <= 1e-9, || {
            format!("{name}: volume {} vs {vol}", lat.volume())
        })?;
        let dual = ComplexLattice::from_ideal(&f, &codiff, 2.0)
            .unwrap()
            .conjugate();
        let cmp = lat.dual().compare_basis(&dual);
        ensure(cmp.unimodular, || {
            format!("{name}: dual basis change {cmp:?}")
        })?;
        worst = (worst.0.max((n - 1.0).abs()), worst.1.max(rel));
    }
    Ok(format!(
        "max |N·|d|−1| = {:.1e}, max vol rel err = {:.1e}",
        worst.0, worst.1
    ))
}

fn minimum_bounds() -> Check {
    let mut tightest = f64::INFINITY;
    for name in catalog_names() {
        let f = field(&name);
        let k = f.k() as f64;
        let codiff = f.codifferent().unwrap();
        for (label, lat, norm) in [
            ("O_F", ring(&name), 1.0),
            (
                "O^∨",
                ComplexLattice::from_ideal(&f, &codiff, 1.0).unwrap(),
                codiff.norm_f64(),
            ),
        ] {
            let l1 = lat.minimum().map_err(|e| e.to_string())?;
            let bound = k.sqrt() * norm.powf(1.0 / (2.0 * k));
            ensure(l1 >= bound * (1.0 - 1e-9), || {
                format!("{name} {label}: λ₁ = {l1} < {bound}")
            })?;
            tightest = tightest.min(l1 / bound);
        }
    }
    let l1 = ring("Q(zeta5)").minimum().unwrap();
    ensure((l1 - 2f64.sqrt()).abs() < 1e-9, || {
        format!("Q(ζ5): λ₁ = {l1}, expected equality at √2")
    })?;
    Ok(format!(
        "min λ₁/bound = {tightest:.6}; Q(ζ5) O_F attains √2"
    ))
}

fn flatness_consistency() -> Check {
    for name in catalog_names() {
        let f = field(&name);
        let lat = ring(&name);
        let eps = 2f64.powi(-2 * f.k() as i32);
        let eta = smoothing_parameter(&lat, eps).map_err(|e| e.to_string())?;
        let rd = f.root_discriminant();
        ensure(eta <= rd, || {
            format!("{name}: η = {eta} > |d|^(1/2k) = {rd}")
        })?;
        let dual_bound = smoothing_dual_bound(&lat).unwrap();
        ensure(eta <= dual_bound * (1.0 + 1e-9), || {
            format!("{name}: η = {eta} > 2√k/λ₁(Λ*) = {dual_bound}")
        })?;
        for e in [eps, 0.1, 0.5] {
            let eta = smoothing_parameter(&lat, e).unwrap();
            ensure(eta <= dual_bound * (1.0 + 1e-9), || {
                format!("{name}: η_{e} = {eta} > {dual_bound}")
            })?;
        }
    }
    let mut worst = 0.0f64;
    for (lat, sigma) in [
        (ring("Q(i)"), 0.5),
        (ring("Q(zeta3)"), 0.6),
        (ring("Q(sqrt-7)"), 0.9),
    ] {
        let (max, _) = flatness_by_definition(&lat, sigma, 64).map_err(|e| e.to_string())?;
        let theta = flatness_factor(&lat, &CovarianceSpec::Scalar(sigma)).unwrap();
        worst = worst.max((max - theta.mid()).abs());
    }
    ensure(worst <= 1e-6, || format!("grid vs theta differ by {worst}"))?;
    Ok(format!(
        "smoothing ≤ root discriminant on all fields; grid vs theta max diff {worst:.1e}"
    ))
}

fn tv(spec: &DiscreteGaussianSpec, draws: u64, seed: u64) -> Result<f64, String> {
    let sampler = KleinSampler::new(spec).map_err(|e| e.to_string())?;
    let pmf = brute_force_pmf(spec, None).map_err(|e| e.to_string())?;
    let mut rng = stream_rng(seed, 0);
    let mut counts: HashMap<Vec<i64>, u64> = HashMap::new();
    for _ in 0..draws {
        *counts.entry(sampler.sample(&mut rng).coords).or_default() += 1;
    }
    Ok(pmf.tv_distance(&counts, draws))
}

fn sampler_fidelity() -> Check {
    let c = |re, im| Complex64::new(re, im);
    let settings = [
        (
            "Z[i] σ=2",
            DiscreteGaussianSpec::centered(ring("Q(i)"), 2.0).unwrap(),
        ),
        (
            "ψ(O_Q(ζ3)) σ=1.5 shifted",
            DiscreteGaussianSpec::new(
                ring("Q(zeta3)"),
                vec![c(0.3, -0.4)],
                CovarianceSpec::Scalar(1.5),
            )
            .unwrap(),
        ),
        (
            "ψ(O_Q(ζ8)) σ=1.2",
            DiscreteGaussianSpec::centered(ring("Q(zeta8)"), 1.2).unwrap(),
        ),
    ];
    let mut parts = Vec::new();
    for (i, (label, spec)) in settings.iter().enumerate() {
        let d = tv(spec, 1_000_000, 100 + i as u64)?;
        ensure(d < 0.01, || format!("{label}: TV = {d}"))?;
        parts.push(format!("{label}: TV {d:.4}"));
    }
    let code = reference_code();
    let mut rng = stream_rng(7, 0);
    let n = 50_000;
    let mut energy = 0.0;
    for _ in 0..n {
        let m = Message(rng.random_range(0..code.index()));
        energy += code
            .encode(m, &mut rng)
            .unwrap()
            .point
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            / code.k() as f64;
    }
    energy /= n as f64;
    ensure((energy / code.power() - 1.0).abs() < 0.05, || {
        format!("encoder power {energy} vs P = {}", code.power())
    })?;
    parts.push(format!("encoder power {energy:.3} vs P = {}", code.power()));
    Ok(parts.join("; "))
}

fn convolution_lemma() -> Check {
    let zi = ring("Q(i)");
    let c = |re, im| Complex64::new(re, im);
    let settings = [
        (
            CovarianceSpec::Scalar(2.0),
            CovarianceSpec::Scalar(2.0),
            c(0.0, 0.0),
        ),
        (
            CovarianceSpec::Scalar(1.0),
            CovarianceSpec::Scalar(10.0),
            c(0.2, 0.1),
        ),
        (
            CovarianceSpec::Scalar(1.2),
            CovarianceSpec::Scalar(1.5),
            c(0.5, 0.5),
        ),
    ];
    let mut parts = Vec::new();
    for (s1, s2, shift) in settings {
        let r = convolution_distance(&zi, &s1, &s2, &[shift]).map_err(|e| e.to_string())?;
        ensure(r.epsilon_used <= 0.5, || {
            format!("ε = {} violates the lemma's condition", r.epsilon_used)
        })?;
        ensure(r.measured_v <= 4.0 * r.epsilon_used + 1e-4, || {
            format!("{r:?}")
        })?;
        parts.push(format!(
            "V {:.2e} ≤ 4ε {:.2e}",
            r.measured_v,
            4.0 * r.epsilon_used
        ));
    }
    Ok(parts.join("; "))
}

fn gdfe_identity() -> Check {
    let mut rng = stream_rng(11, 0);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let k = 1 + i % 8;
        let h: Vec<Complex64> = (0..k).map(|_| complex_normal(&mut rng, 1.0)).collect();
        let rho = 10f64.powf(rng.random_range(-1.0..3.0));
        let pre = GdfePreprocessor::new(&h, rho).map_err(|e| e.to_string())?;
        let y: Vec<Complex64> = (0..k).map(|_| complex_normal(&mut rng, 4.0)).collect();
        let x: Vec<Complex64> = (0..k).map(|_| complex_normal(&mut rng, 4.0)).collect();
        worst = worst.max(pre.identity_residual(&y, &x).abs());
    }
    ensure(worst < 1e-9, || format!("residual {worst}"))?;
    let targets = [
        ("Q(i)", 2.0),
        ("Q(zeta3)", 3.0),
        ("Q(sqrt-7)", 2.0),
        ("Q(zeta5)", 5.0),
        ("Q(zeta8)", 2.0),
        ("Q(zeta12)", 4.0),
        ("Q(zeta15)", 25.0),
    ];
    let mut messages = 0;
    for (name, index) in targets {
        let f = field(name);
        let r_prime = r_prime_threshold(f.root_discriminant()) + 1.0;
        let code = design_code(
            &f,
            f.k(),
            20.0,
            f64::ln(index) / f.k() as f64,
            r_prime,
            &NestingSpec::Auto,
        )
        .map_err(|e| format!("{name}: {e}"))?;
        let ones = vec![Complex64::new(1.0, 0.0); code.k()];
        for m in 0..code.index() {
            let x = code
                .encode(Message(m), &mut rng)
                .map_err(|e| e.to_string())?;
            let got = decode(&code, &x.point, &ones, 1e12).map_err(|e| e.to_string())?;
            ensure(got == Message(m), || {
                format!("{name}: message {m} decoded as {}", got.0)
            })?;
            messages += 1;
        }
    }
    Ok(format!(
        "max residual {worst:.1e} over 1000 instances; {messages} messages round-trip on 7 codes"
    ))
}

fn reliability_chain() -> Check {
    let code = reference_code();
    let rayleigh =
        |snr: f64| ChannelModel::new(FadingKind::ErgodicRayleigh, code.power() / snr).unwrap();
    let mut parts = Vec::new();
    for (i, db) in [20.0, 25.0, 30.0, 35.0, 40.0].into_iter().enumerate() {
        let snr = 10f64.powf(db / 10.0);
        let opts = ErrorRateOptions {
            trials: 10_000,
            seed: 500 + i as u64,
            mode: DecodeMode::Map,
        };
        let r =
            error_rate(&code, &rayleigh(snr), snr, opts, None, &ETAS).map_err(|e| e.to_string())?;
        ensure(r.within_bounds(), || format!("{db} dB: {r:?}"))?;
        let best = r.bounds.iter().map(|b| b.bound).fold(1.0, f64::min);
        parts.push(format!("{db}dB Pe {:.4} ≤ {best:.3}", r.pe));
    }
    let mut rng = stream_rng(21, 0);
    let snr = 1000.0;
    for _ in 0..100 {
        let h: Vec<Complex64> = (0..code.k())
            .map(|_| complex_normal(&mut rng, 1.0))
            .collect();
        let md = received_min_distance_bound(&code, &h, snr).map_err(|e| e.to_string())?;
        let exact = md.exact_sq.ok_or("exact d_R unavailable")?;
        ensure(exact >= md.amgm_sq * (1.0 - 1e-9), || {
            format!("d_R² {exact} < AM-GM {}", md.amgm_sq)
        })?;
    }
    parts.push("d_R ≥ AM-GM on 100 draws".into());
    for (i, snr) in [100.0, 1000.0].into_iter().enumerate() {
        let h: Vec<Complex64> = (0..code.k())
            .map(|_| complex_normal(&mut rng, 1.0))
            .collect();
        let t = tail_bound_check(&code, &h, snr, &TAIL_TS, 10_000, 900 + i as u64)
            .map_err(|e| e.to_string())?;
        ensure(t.all_ok(), || format!("tail rows {:?}", t.rows))?;
    }
    parts.push("tail exceedances within e^δe^{−t} + 3SE".into());
    Ok(parts.join("; "))
}

fn secrecy_chain() -> Check {
    let mut rng = stream_rng(31, 0);
    let mut draws = 0;
    for name in catalog_names() {
        let f = field(&name);
        let code = design_code(
            &f,
            f.k(),
            10.0,
            0.0,
            r_prime_threshold(f.root_discriminant()) + 1.5,
            &NestingSpec::Scalar { c: 1 },
        )
        .map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let h: Vec<Complex64> = (0..code.k())
                .map(|_| complex_normal(&mut rng, 1.0))
                .collect();
            let sigma_e = rng.random_range(0.3..3.0);
            let chk = faded_dual_minimum(&code, &h, 10.0, sigma_e).map_err(|e| e.to_string())?;
            ensure(chk.holds(), || format!("{name}: {chk:?}"))?;
            draws += 1;
        }
    }
    let mut parts = vec![format!("faded dual λ₁ ≥ bound on {draws} draws")];

    let fine = ComplexLattice::from_real_generators(1, DMatrix::identity(2, 2)).unwrap();
    let code = WiretapCode::from_cosets(CosetSystem::from_scalar(&fine, 2).unwrap(), 4.0, 2.0, 2.0)
        .unwrap();
    let h = [Complex64::new(0.8, 0.3)];
    let raw: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let random: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let point = [0.0, 0.0, 1.0, 0.0];
    for (label, p) in [
        ("uniform", None),
        ("point-mass", Some(&point[..])),
        ("random", Some(&random[..])),
    ] {
        let r = empirical_leakage(&code, &h, 1.0, p).map_err(|e| e.to_string())?;
        let bound = r
            .bound
            .ok_or_else(|| format!("{label}: measured ε = {} > 1/2", r.eps))?;
        ensure(r.value <= bound + r.quadrature_error, || {
            format!("{label}: {r:?}")
        })?;
        parts.push(format!("{label} I = {:.3e} ≤ {bound:.2e}", r.value));
    }

    let reference = reference_code();
    let awgn = ChannelModel::gaussian(1.0).unwrap();
    let d =
        leakage_decomposition(&reference, &awgn, None, 0.5, 500, 41).map_err(|e| e.to_string())?;
    ensure(d.outage_term == 0.0, || {
        format!("gaussian outage term {}", d.outage_term)
    })?;
    parts.push("gaussian outage term = 0".into());

    let ray = ChannelModel::new(FadingKind::ErgodicRayleigh, 1.0).unwrap();
    let ce = capacity_exact(&ray, 10.0).unwrap();
    for seed in [1u64, 2, 3] {
        let p: Vec<f64> = [2, 4, 8]
            .iter()
            .map(|&k| outage_probability(&ray, 10.0, k, ce, 0.5, 20_000, seed))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure(p[0] > p[1] && p[1] > p[2], || {
            format!("seed {seed}: outage {p:?}")
        })?;
        if seed == 1 {
            parts.push(format!(
                "Rayleigh outage k=2,4,8: {:.4} > {:.4} > {:.4}",
                p[0], p[1], p[2]
            ));
        }
    }
    Ok(parts.join("; "))
}

fn determinism() -> Check {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let text =
        std::fs::read_to_string(root.join("configs/default.json")).map_err(|e| e.to_string())?;
    let mut cfg: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    cfg["trials"] = 500.into();
    cfg["bound_draws"] = 20.into();
    let path = tmp.path().join("config.json");
    std::fs::write(&path, cfg.to_string()).map_err(|e| e.to_string())?;
    let mut digests = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "3"), ("c", "3")] {
        let out = tmp.path().join(run);
        let mut files = Vec::new();
        for cmd in ["simulate", "bounds", "design-code"] {
            let o = Command::new(env!("CARGO_BIN_EXE_lwt"))
                .args([
                    cmd,
                    "--config",
                    path.to_str().unwrap(),
                    "--out",
                    out.to_str().unwrap(),
                    "--threads",
                    threads,
                ])
                .output()
                .map_err(|e| e.to_string())?;
            ensure(o.status.success(), || {
                String::from_utf8_lossy(&o.stderr).into_owned()
            })?;
        }
        for csv in ["error_rate.csv", "secrecy.csv", "bounds.csv", "design.csv"] {
            files.push(std::fs::read(out.join(csv)).map_err(|e| e.to_string())?);
        }
        digests.push(files);
    }
    ensure(digests[0] == digests[1] && digests[1] == digests[2], || {
        "CSV outputs differ between runs".into()
    })?;
    let bytes: usize = digests[0].iter().map(Vec::len).sum();
    Ok(format!(
        "4 CSVs ({bytes} bytes) identical over 3 runs, 1 and 3 threads"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("algebraic identities", algebraic_identities),
        ("λ₁ bounds", minimum_bounds),
        ("flatness/smoothing consistency", flatness_consistency),
        ("sampler fidelity", sampler_fidelity),
        ("convolution lemma", convolution_lemma),
        ("MMSE-GDFE identity and round trip", gdfe_identity),
        ("reliability chain", reliability_chain),
        ("secrecy chain", secrecy_chain),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.1}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1}s] {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
