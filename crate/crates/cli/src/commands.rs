//! Subcommands. Each writes fixed-column CSV files plus a JSON report into the
//! output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use lattice_wiretap::analysis::{
    empirical_leakage, faded_dual_minimum, faded_flatness, leakage_bound, leakage_decomposition,
    outage_probability, LeakageDecomposition,
};
use lattice_wiretap::channel::{capacity_exact, complex_normal, sample_channel, ChannelModel};
use lattice_wiretap::gaussian::{
    flatness_factor, smoothing_dual_bound, smoothing_parameter, CovarianceSpec,
};
use lattice_wiretap::lattice::ComplexLattice;
use lattice_wiretap::numberfield::{catalog_names, NumberField};
use lattice_wiretap::receiver::{
    decode_with, error_rate, received_min_distance_bound, tail_bound_check, DecodeMode,
    ErrorRateOptions, ErrorRateReport, GdfePreprocessor, ETAS, TAIL_TS,
};
use lattice_wiretap::seeds::{split_seed, stream_rng};
use lattice_wiretap::wiretap::{design_code, Message, WiretapCode};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

/// Seed streams, one per independent experiment stage.
const STREAM_ERROR_RATE: u64 = 1;
const STREAM_SECRECY: u64 = 2;
const STREAM_BOB_DRAWS: u64 = 3;
const STREAM_EVE_DRAWS: u64 = 4;
const STREAM_TAIL: u64 = 5;
const STREAM_VERIFY: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    AnalyzeLattice,
    DesignCode,
    Simulate,
    Bounds,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::AnalyzeLattice => "analyze-lattice",
            Command::DesignCode => "design-code",
            Command::Simulate => "simulate",
            Command::Bounds => "bounds",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// False when a bound or invariant check failed.
    pub passed: bool,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    wall_clock_seconds: f64,
    config: &'a ExperimentConfig,
    result: T,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
        self.files.push(path);
        Ok(())
    }

    fn report<T: Serialize>(
        &mut self,
        cmd: Command,
        cfg: &ExperimentConfig,
        start: Instant,
        result: T,
    ) -> Result<(), CliError> {
        let report = Report {
            command: cmd.name(),
            version: env!("CARGO_PKG_VERSION"),
            wall_clock_seconds: start.elapsed().as_secs_f64(),
            config: cfg,
            result,
        };
        self.json(&format!("{}.json", cmd.name()), &report)
    }
}

pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let mut out = Writer::new(&cfg.output.dir)?;
    let passed = match cmd {
        Command::AnalyzeLattice => analyze_lattice(cfg, &mut out, start)?,
        Command::DesignCode => design(cfg, &mut out, start)?,
        Command::Simulate => simulate(cfg, &mut out, start)?,
        Command::Bounds => bounds(cfg, &mut out, start)?,
        Command::Verify => verify(cfg, &mut out, start)?,
    };
    Ok(Outcome {
        files: out.files,
        passed,
    })
}

fn build_code(cfg: &ExperimentConfig) -> Result<WiretapCode, CliError> {
    let field = NumberField::from_catalog(&cfg.field_name)?;
    Ok(design_code(
        &field,
        cfg.k,
        cfg.power,
        cfg.rate_target,
        cfg.r_prime,
        &cfg.nesting_spec,
    )?)
}

fn eve_capacity(cfg: &ExperimentConfig) -> Result<f64, CliError> {
    Ok(capacity_exact(
        &cfg.eve,
        cfg.power / cfg.eve.noise_variance,
    )?)
}

fn snr_db(snr: f64) -> f64 {
    10.0 * snr.log10()
}

// analyze-lattice

#[derive(Debug, Clone, Serialize)]
struct LatticeRow {
    seed: u64,
    field: String,
    k: usize,
    ideal: &'static str,
    norm: f64,
    volume: f64,
    volume_formula: f64,
    lambda1: f64,
    lambda1_bound: f64,
    dual_unimodular: bool,
    smoothing: f64,
    smoothing_dual_bound: f64,
    root_discriminant: f64,
}

#[derive(Debug, Clone, Serialize)]
struct FlatnessRow {
    seed: u64,
    field: String,
    k: usize,
    sigma: f64,
    eps_lo: f64,
    eps_hi: f64,
}

fn lattice_rows(field: &NumberField, seed: u64) -> Result<Vec<LatticeRow>, CliError> {
    let k = field.k();
    let d = field.discriminant().unsigned_abs() as f64;
    let codiff = field.codifferent()?;
    let ring = ComplexLattice::from_ring(field, 1.0)?;
    let dual = ComplexLattice::from_ideal(field, &codiff, 1.0)?;
    let eps = 2f64.powi(-2 * k as i32);
    let rd = field.root_discriminant();
    let mut rows = Vec::new();
    for (ideal, lat, partner, norm) in [
        ("O_F", &ring, &dual, 1.0),
        ("codifferent", &dual, &ring, codiff.norm_f64()),
    ] {
        rows.push(LatticeRow {
            seed,
            field: field.name().to_string(),
            k,
            ideal,
            norm,
            volume: lat.volume(),
            volume_formula: 2f64.powi(-(k as i32)) * d.sqrt() * norm,
            lambda1: lat.minimum()?,
            lambda1_bound: (k as f64).sqrt() * norm.powf(1.0 / (2 * k) as f64),
            dual_unimodular: lat
                .dual()
                .compare_basis(&partner.scaled(2.0)?.conjugate())
                .unimodular,
            smoothing: smoothing_parameter(lat, eps)?,
            smoothing_dual_bound: smoothing_dual_bound(lat)?,
            root_discriminant: rd,
        });
    }
    Ok(rows)
}

fn analyze_lattice(
    cfg: &ExperimentConfig,
    out: &mut Writer,
    start: Instant,
) -> Result<bool, CliError> {
    let field = NumberField::from_catalog(&cfg.field_name)?;
    let rows = lattice_rows(&field, cfg.seed)?;
    let ring = ComplexLattice::from_ring(&field, 1.0)?;
    let curve = cfg
        .flatness_sigmas
        .iter()
        .map(|&s| {
            let e = flatness_factor(&ring, &CovarianceSpec::Scalar(s))?;
            Ok(FlatnessRow {
                seed: cfg.seed,
                field: field.name().to_string(),
                k: field.k(),
                sigma: s,
                eps_lo: e.lo,
                eps_hi: e.hi,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let passed = rows.iter().all(|r| {
        r.lambda1 >= r.lambda1_bound * (1.0 - 1e-9)
            && r.dual_unimodular
            && (r.volume / r.volume_formula - 1.0).abs() < 1e-9
            && r.smoothing <= r.smoothing_dual_bound * (1.0 + 1e-9)
    }) && rows[0].smoothing <= rows[0].root_discriminant * (1.0 + 1e-9);
    out.csv("lattice.csv", &rows)?;
    out.csv("flatness.csv", &curve)?;
    #[derive(Serialize)]
    struct R<'a> {
        lattices: &'a [LatticeRow],
        flatness: &'a [FlatnessRow],
    }
    out.report(
        Command::AnalyzeLattice,
        cfg,
        start,
        R {
            lattices: &rows,
            flatness: &curve,
        },
    )?;
    Ok(passed)
}

// design-code

#[derive(Debug, Clone, Serialize)]
struct DesignRow {
    seed: u64,
    field: String,
    k: usize,
    copies: usize,
    #[serde(rename = "P")]
    power: f64,
    #[serde(rename = "R_target")]
    rate_target: f64,
    #[serde(rename = "R")]
    rate: f64,
    #[serde(rename = "R_b")]
    rate_b: f64,
    #[serde(rename = "R_prime")]
    r_prime: f64,
    r_prime_threshold: f64,
    index: u64,
    alpha_b: f64,
    alpha_e: f64,
    alpha_e_formula: f64,
    g_eff: f64,
    flatness_e_hi: Option<f64>,
    power_flatness_ok: Option<bool>,
    c_e: f64,
    r_prime_secrecy_ok: bool,
}

fn design_row(cfg: &ExperimentConfig, code: &WiretapCode) -> Result<DesignRow, CliError> {
    let c_e = eve_capacity(cfg)?;
    Ok(DesignRow {
        seed: cfg.seed,
        field: code.field_name().to_string(),
        k: code.k(),
        copies: code.copies(),
        power: code.power(),
        rate_target: code.rate_target(),
        rate: code.rate(),
        rate_b: code.rate_b(),
        r_prime: code.r_prime(),
        r_prime_threshold: lattice_wiretap::wiretap::r_prime_threshold(code.g_eff()),
        index: code.index(),
        alpha_b: code.alpha_b(),
        alpha_e: code.alpha_e(),
        alpha_e_formula: code.alpha_e_formula(),
        g_eff: code.g_eff(),
        flatness_e_hi: code.flatness_e().map(|e| e.hi),
        power_flatness_ok: code.power_flatness_ok(),
        c_e,
        r_prime_secrecy_ok: code.meets_secrecy_rate(c_e),
    })
}

fn design(cfg: &ExperimentConfig, out: &mut Writer, start: Instant) -> Result<bool, CliError> {
    let code = build_code(cfg)?;
    let row = design_row(cfg, &code)?;
    out.csv("design.csv", std::slice::from_ref(&row))?;
    out.json("code.json", &code.descriptor(cfg.seed))?;
    let passed = row.r_prime_secrecy_ok && row.power_flatness_ok != Some(false);
    out.report(Command::DesignCode, cfg, start, &row)?;
    Ok(passed)
}

// simulate

#[derive(Debug, Clone, Serialize)]
struct ErrorRateRow {
    seed: u64,
    field: String,
    k: usize,
    #[serde(rename = "R")]
    rate: f64,
    snr_db: f64,
    trials: usize,
    errors: usize,
    pe: f64,
    ci_lo: f64,
    ci_hi: f64,
    delta: f64,
    eta: f64,
    noise_term: f64,
    noise_term_analytic: f64,
    distance_term: f64,
    distance_term_exact: f64,
    bound: f64,
    bound_ci: f64,
    within_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
struct SecrecyRow {
    seed: u64,
    field: String,
    k: usize,
    #[serde(rename = "R")]
    rate: f64,
    eve_snr_db: f64,
    c_e: f64,
    delta: f64,
    outage_probability: f64,
    outage_term: f64,
    sigma_condition: f64,
    conditional_term: Option<f64>,
    conditional_term_measured: Option<f64>,
    total: Option<f64>,
    leakage_bound_design: f64,
    empirical_leakage: Option<f64>,
    empirical_quadrature_error: Option<f64>,
    empirical_eps: Option<f64>,
    empirical_bound: Option<f64>,
}

fn error_rate_rows(
    cfg: &ExperimentConfig,
    code: &WiretapCode,
    reports: &[ErrorRateReport],
) -> Vec<ErrorRateRow> {
    reports
        .iter()
        .flat_map(|r| {
            r.bounds.iter().map(move |b| ErrorRateRow {
                seed: cfg.seed,
                field: code.field_name().to_string(),
                k: code.k(),
                rate: code.rate(),
                snr_db: snr_db(r.snr),
                trials: r.trials,
                errors: r.errors,
                pe: r.pe,
                ci_lo: r.ci.0,
                ci_hi: r.ci.1,
                delta: r.delta,
                eta: b.eta,
                noise_term: b.noise_term,
                noise_term_analytic: b.noise_term_analytic,
                distance_term: b.distance_term,
                distance_term_exact: b.distance_term_exact,
                bound: b.bound,
                bound_ci: b.bound_ci,
                within_bound: r.pe <= b.bound + 3.0 * (r.ci.1 - r.ci.0 + b.bound_ci),
            })
        })
        .collect()
}

fn eve_draw(cfg: &ExperimentConfig, k: usize, i: usize) -> Result<Vec<Complex64>, CliError> {
    let mut rng = stream_rng(split_seed(cfg.seed, STREAM_EVE_DRAWS), i as u64);
    Ok(sample_channel(&cfg.eve, k, &mut rng)?.h)
}

fn simulate(cfg: &ExperimentConfig, out: &mut Writer, start: Instant) -> Result<bool, CliError> {
    let code = build_code(cfg)?;
    let reports = cfg
        .snr_grid()
        .iter()
        .enumerate()
        .map(|(i, &snr)| {
            let opts = ErrorRateOptions {
                trials: cfg.trials,
                seed: split_seed(split_seed(cfg.seed, STREAM_ERROR_RATE), i as u64),
                mode: cfg.decode_mode,
            };
            error_rate(&code, &cfg.bob_model(snr), snr, opts, None, &ETAS)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows = error_rate_rows(cfg, &code, &reports);

    let dec: LeakageDecomposition = leakage_decomposition(
        &code,
        &cfg.eve,
        None,
        cfg.delta,
        cfg.trials,
        split_seed(cfg.seed, STREAM_SECRECY),
    )?;
    let empirical = if cfg.empirical_leakage {
        let h = eve_draw(cfg, code.k(), 0)?;
        Some(empirical_leakage(&code, &h, cfg.sigma_e(), None)?)
    } else {
        None
    };
    let k = code.k();
    let secrecy = SecrecyRow {
        seed: cfg.seed,
        field: code.field_name().to_string(),
        k,
        rate: code.rate(),
        eve_snr_db: snr_db(cfg.power / cfg.eve.noise_variance),
        c_e: dec.c_e,
        delta: dec.delta,
        outage_probability: dec.outage_probability,
        outage_term: dec.outage_term,
        sigma_condition: dec.sigma_condition,
        conditional_term: dec.conditional_term,
        conditional_term_measured: dec.conditional_term_measured,
        total: dec.total,
        leakage_bound_design: leakage_bound(2f64.powi(-2 * k as i32), k, code.rate())?,
        empirical_leakage: empirical.map(|e| e.value),
        empirical_quadrature_error: empirical.map(|e| e.quadrature_error),
        empirical_eps: empirical.map(|e| e.eps),
        empirical_bound: empirical.and_then(|e| e.bound),
    };
    let passed = rows.iter().all(|r| r.within_bound) && empirical.is_none_or(|e| e.within_bound());
    out.csv("error_rate.csv", &rows)?;
    out.csv("secrecy.csv", std::slice::from_ref(&secrecy))?;
    #[derive(Serialize)]
    struct R<'a> {
        design: DesignRow,
        error_rate: &'a [ErrorRateReport],
        decomposition: LeakageDecomposition,
        secrecy: &'a SecrecyRow,
    }
    let result = R {
        design: design_row(cfg, &code)?,
        error_rate: &reports,
        decomposition: dec,
        secrecy: &secrecy,
    };
    out.report(Command::Simulate, cfg, start, result)?;
    Ok(passed)
}

// bounds

#[derive(Debug, Clone, Serialize)]
struct BoundRow {
    seed: u64,
    table: &'static str,
    snr_db: Option<f64>,
    draw: Option<usize>,
    param: Option<f64>,
    measured: f64,
    bound: Option<f64>,
    ok: bool,
}

fn bound_rows(cfg: &ExperimentConfig, code: &WiretapCode) -> Result<Vec<BoundRow>, CliError> {
    let k = code.k();
    let mut rows = Vec::new();
    let row = |table, snr: Option<f64>, draw, param, measured, bound, ok| BoundRow {
        seed: cfg.seed,
        table,
        snr_db: snr.map(snr_db),
        draw,
        param,
        measured,
        bound,
        ok,
    };
    for (i, &snr) in cfg.snr_grid().iter().enumerate() {
        let model = cfg.bob_model(snr);
        let mut rng = stream_rng(split_seed(cfg.seed, STREAM_BOB_DRAWS), i as u64);
        let h = sample_channel(&model, k, &mut rng)?.h;
        let tail = tail_bound_check(
            code,
            &h,
            snr,
            &TAIL_TS,
            cfg.trials,
            split_seed(split_seed(cfg.seed, STREAM_TAIL), i as u64),
        )?;
        for t in &tail.rows {
            rows.push(row(
                "tail",
                Some(snr),
                None,
                Some(t.t),
                t.exceedance,
                Some(t.bound + 3.0 * t.std_err),
                t.ok,
            ));
        }
        for d in 0..cfg.bound_draws {
            let h = sample_channel(&model, k, &mut rng)?.h;
            let md = received_min_distance_bound(code, &h, snr)?;
            if let Some(exact) = md.exact_sq {
                rows.push(row(
                    "min_distance",
                    Some(snr),
                    Some(d),
                    None,
                    exact,
                    Some(md.amgm_sq),
                    exact >= md.amgm_sq * (1.0 - 1e-9),
                ));
            }
        }
    }
    for d in 0..cfg.bound_draws {
        let h = eve_draw(cfg, k, d)?;
        let dual = faded_dual_minimum(code, &h, cfg.power, cfg.sigma_e())?;
        rows.push(row(
            "faded_dual",
            None,
            Some(d),
            None,
            dual.exact,
            Some(dual.bound),
            dual.holds(),
        ));
        let ff = faded_flatness(code, &h, cfg.power, cfg.sigma_e())?;
        let implied = ff.condition_holds.then(|| 2f64.powi(-2 * k as i32));
        rows.push(row(
            "faded_flatness",
            None,
            Some(d),
            Some(ff.sigma_condition),
            ff.eps.hi,
            implied,
            ff.consistent,
        ));
    }
    if cfg.empirical_leakage {
        for d in 0..cfg.bound_draws.min(3) {
            let h = eve_draw(cfg, k, d)?;
            let e = empirical_leakage(code, &h, cfg.sigma_e(), None)?;
            rows.push(row(
                "leakage",
                None,
                Some(d),
                Some(e.eps),
                e.value,
                e.bound,
                e.within_bound(),
            ));
        }
    }
    Ok(rows)
}

fn bounds(cfg: &ExperimentConfig, out: &mut Writer, start: Instant) -> Result<bool, CliError> {
    let code = build_code(cfg)?;
    let rows = bound_rows(cfg, &code)?;
    let passed = rows.iter().all(|r| r.ok);
    out.csv("bounds.csv", &rows)?;
    out.report(Command::Bounds, cfg, start, &rows)?;
    Ok(passed)
}

// verify

#[derive(Debug, Clone, Serialize)]
struct CheckRow {
    check: &'static str,
    subject: String,
    measured: f64,
    bound: f64,
    ok: bool,
}

fn check(
    check: &'static str,
    subject: impl Into<String>,
    measured: f64,
    bound: f64,
    ok: bool,
) -> CheckRow {
    CheckRow {
        check,
        subject: subject.into(),
        measured,
        bound,
        ok,
    }
}

fn verify_rows(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>, CliError> {
    let mut rows = Vec::new();
    for name in catalog_names() {
        let field = NumberField::from_catalog(&name)?;
        let d = field.discriminant().unsigned_abs() as f64;
        let codiff = field.codifferent()?.norm_f64();
        rows.push(check(
            "codifferent_norm",
            &name,
            codiff * d,
            1.0,
            (codiff * d - 1.0).abs() < 1e-12,
        ));
        for r in lattice_rows(&field, cfg.seed)? {
            let subject = format!("{name} {}", r.ideal);
            let rel = (r.volume / r.volume_formula - 1.0).abs();
            rows.push(check(
                "volume",
                &subject,
                r.volume,
                r.volume_formula,
                rel < 1e-9,
            ));
            rows.push(check(
                "dual_lattice",
                &subject,
                f64::from(u8::from(r.dual_unimodular)),
                1.0,
                r.dual_unimodular,
            ));
            rows.push(check(
                "lambda1",
                &subject,
                r.lambda1,
                r.lambda1_bound,
                r.lambda1 >= r.lambda1_bound * (1.0 - 1e-9),
            ));
            rows.push(check(
                "smoothing_dual",
                &subject,
                r.smoothing,
                r.smoothing_dual_bound,
                r.smoothing <= r.smoothing_dual_bound * (1.0 + 1e-9),
            ));
            if r.ideal == "O_F" {
                rows.push(check(
                    "smoothing_root_discriminant",
                    &subject,
                    r.smoothing,
                    r.root_discriminant,
                    r.smoothing <= r.root_discriminant * (1.0 + 1e-9),
                ));
            }
        }
    }

    let mut rng = stream_rng(split_seed(cfg.seed, STREAM_VERIFY), 0);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let k = 1 + i % 8;
        let h: Vec<Complex64> = (0..k).map(|_| complex_normal(&mut rng, 1.0)).collect();
        let rho = 10f64.powf(rng.random_range(-1.0..3.0));
        let pre = GdfePreprocessor::new(&h, rho)?;
        let y: Vec<Complex64> = (0..k).map(|_| complex_normal(&mut rng, 4.0)).collect();
        let x: Vec<Complex64> = (0..k).map(|_| complex_normal(&mut rng, 4.0)).collect();
        let scale = 1.0 + y.iter().chain(&x).map(|z| z.norm_sqr()).sum::<f64>() * (1.0 + 1.0 / rho);
        worst = worst.max(pre.identity_residual(&y, &x).abs() / scale);
    }
    rows.push(check(
        "gdfe_identity",
        "200 random instances",
        worst,
        1e-9,
        worst < 1e-9,
    ));

    let code = build_code(cfg)?;
    let subject = format!(
        "{} k={} index={}",
        code.field_name(),
        code.k(),
        code.index()
    );
    let ones = vec![Complex64::new(1.0, 0.0); code.k()];
    let pre = GdfePreprocessor::new(&ones, 1e12)?;
    let mut failures = 0usize;
    for m in 0..code.index().min(4096) {
        let x = code.encode(Message(m), &mut rng)?.point;
        if decode_with(&code, &x, &pre, DecodeMode::Map)?.message != Message(m) {
            failures += 1;
        }
    }
    rows.push(check(
        "noiseless_roundtrip",
        &subject,
        failures as f64,
        0.0,
        failures == 0,
    ));

    let n = 4000;
    let energy: f64 = (0..n)
        .map(|_| {
            let m = Message(rng.random_range(0..code.index()));
            Ok(code
                .encode(m, &mut rng)?
                .point
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                / code.k() as f64)
        })
        .sum::<Result<f64, lattice_wiretap::Error>>()?
        / n as f64;
    if code.power_flatness_ok() == Some(true) {
        let rel = (energy / cfg.power - 1.0).abs();
        rows.push(check(
            "encoder_power",
            &subject,
            energy,
            cfg.power,
            rel < 0.05,
        ));
    }

    let mut holds = 0usize;
    for d in 0..cfg.bound_draws {
        let h = eve_draw(cfg, code.k(), d)?;
        holds += usize::from(faded_dual_minimum(&code, &h, cfg.power, cfg.sigma_e())?.holds());
    }
    rows.push(check(
        "faded_dual_minimum",
        &subject,
        holds as f64,
        cfg.bound_draws as f64,
        holds == cfg.bound_draws,
    ));

    let awgn = ChannelModel::gaussian(cfg.eve.noise_variance)?;
    let c_awgn = capacity_exact(&awgn, cfg.power / awgn.noise_variance)?;
    let p = outage_probability(&awgn, cfg.power, code.k(), c_awgn, cfg.delta, 100, cfg.seed)?;
    rows.push(check("gaussian_outage", &subject, p, 0.0, p == 0.0));

    let small = ErrorRateOptions {
        trials: 200,
        seed: cfg.seed,
        mode: cfg.decode_mode,
    };
    let snr = cfg.snr_grid()[0];
    let a = error_rate(&code, &cfg.bob_model(snr), snr, small, None, &ETAS)?;
    let b = error_rate(&code, &cfg.bob_model(snr), snr, small, None, &ETAS)?;
    rows.push(check("determinism", &subject, a.pe, b.pe, a == b));
    Ok(rows)
}

fn verify(cfg: &ExperimentConfig, out: &mut Writer, start: Instant) -> Result<bool, CliError> {
    let rows = verify_rows(cfg)?;
    let passed = rows.iter().all(|r| r.ok);
    out.csv("verify.csv", &rows)?;
    out.report(Command::Verify, cfg, start, &rows)?;
    Ok(passed)
}
