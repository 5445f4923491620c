//! One function per subcommand. Each fills the defaults it relies on into the
//! config, so that summary.json records exactly what was run.

use std::f64::consts::PI;

use ncspectral::action::{
    action_samples, constant_term, correction_scaling, cosmological_term, fit_expansion,
    heat_trace, CorrectionOptions, CutoffProfile, NcOptions, TraceMethod, WindowOptions,
};
use ncspectral::diophantine::{classify_matrix, jarnik_construct, Profile};
use ncspectral::lattice::cube;
use ncspectral::operator::{phase_unitary, ModeWindow, OneForm, SpectralTriple};
use ncspectral::zeta::{
    evaluate, is_integral, residue_shifted, HomogeneousPolynomial, TwistedSeries,
};
use ncspectral::{Complex64, Error, LatticePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{build_one_form, GridSpec, RunConfig, ThetaSpec};
use crate::output::{num, Report, Table};

type Result<T> = std::result::Result<T, Error>;

fn n_of(cfg: &mut RunConfig, default: usize) -> usize {
    *cfg.n.get_or_insert(default)
}

fn theta_of(cfg: &mut RunConfig) -> &ThetaSpec {
    cfg.theta
        .get_or_insert_with(|| ThetaSpec::Preset("golden".into()))
}

fn triple_of(cfg: &mut RunConfig, default_n: usize) -> Result<SpectralTriple> {
    let n = n_of(cfg, default_n);
    SpectralTriple::new(theta_of(cfg).resolve(n)?)
}

fn form_of(cfg: &RunConfig, n: usize) -> Result<Option<OneForm>> {
    match &cfg.one_form {
        Some(modes) if !modes.is_empty() => Ok(Some(build_one_form(n, modes)?)),
        _ => Ok(None),
    }
}

fn polynomial_of(cfg: &mut RunConfig, n: usize) -> Result<HomogeneousPolynomial> {
    let src = cfg.polynomial.get_or_insert_with(|| "1".into()).clone();
    HomogeneousPolynomial::parse(n, &src)
}

fn twist_of(cfg: &mut RunConfig, n: usize) -> Result<Vec<f64>> {
    let a = cfg.twist.get_or_insert_with(|| vec![0.0; n]).clone();
    if a.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.len(),
        });
    }
    Ok(a)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";")
}

pub fn zeta_eval(cfg: &mut RunConfig) -> Result<Report> {
    let n = n_of(cfg, 2);
    let p = polynomial_of(cfg, n)?;
    let a = twist_of(cfg, n)?;
    let points = cfg
        .s
        .get_or_insert_with(|| vec![[n as f64 + p.degree() as f64 + 1.0, 0.0]])
        .clone();
    let series = TwistedSeries::new(p.clone(), a.clone())?;
    let mut table = Table::new(&[
        "n",
        "P",
        "a",
        "s_re",
        "s_im",
        "value_re",
        "value_im",
        "est_error",
    ]);
    let mut results = Vec::new();
    for s in points {
        let r = evaluate(&series, Complex64::new(s[0], s[1]))?;
        table.push(vec![
            n.to_string(),
            p.to_string(),
            join(&a),
            num(s[0]),
            num(s[1]),
            num(r.value.re),
            num(r.value.im),
            num(r.est_error),
        ]);
        results.push(r);
    }
    Ok(Report::ok(table, results))
}

#[derive(Serialize)]
struct ResidueRow {
    shift: f64,
    pole_present: bool,
    residue: f64,
    natural_shift: f64,
    natural_residue: f64,
    twist_integral: bool,
}

/// Res_{s=0} Σ' P(k) e^{2πik·a} ‖k‖^{−(s+shift)}. The row also reports the
/// residue at the only possible pole, shift = n + deg P.
pub fn zeta_residue(cfg: &mut RunConfig) -> Result<Report> {
    let n = n_of(cfg, 2);
    let p = polynomial_of(cfg, n)?;
    let a = twist_of(cfg, n)?;
    let natural = (n as u32 + p.degree()) as f64;
    let shift = *cfg.shift.get_or_insert(natural);
    let integral = is_integral(&a);
    let at = residue_shifted(&p, shift)?;
    let nat = residue_shifted(&p, natural)?;
    let (res, nat_res) = if integral {
        (at.value, nat.value)
    } else {
        (0.0, 0.0)
    };
    let mut table = Table::new(&[
        "n",
        "P",
        "a",
        "shift",
        "pole_present",
        "residue",
        "natural_shift",
        "natural_residue",
    ]);
    table.push(vec![
        n.to_string(),
        p.to_string(),
        join(&a),
        num(shift),
        (at.pole_present && integral).to_string(),
        num(res),
        num(natural),
        num(nat_res),
    ]);
    let row = ResidueRow {
        shift,
        pole_present: at.pole_present && integral,
        residue: res,
        natural_shift: natural,
        natural_residue: nat_res,
        twist_integral: integral,
    };
    Ok(Report::ok(table, row))
}

pub fn dio_classify(cfg: &mut RunConfig) -> Result<Report> {
    let n = n_of(cfg, 2);
    let theta = theta_of(cfg).resolve(n)?;
    let delta = *cfg.delta.get_or_insert(1.0);
    let c = *cfg.c.get_or_insert(1e-3);
    let qmax = *cfg.qmax.get_or_insert(10_000);
    if !(delta > 0.0 && c > 0.0 && qmax > 0) {
        return Err(Error::Domain("delta, c and qmax must be positive".into()));
    }
    let report = classify_matrix(&theta, delta, c, qmax);
    let mut table = Table::new(&["u", "violations", "accepted"]);
    let fmt_u = |u: &[i64]| {
        u.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(";")
    };
    for (u, count) in &report.rejected {
        table.push(vec![fmt_u(u), count.to_string(), "false".into()]);
    }
    if let Some(u) = &report.witness_u {
        table.push(vec![fmt_u(u), "0".into(), "true".into()]);
    }
    Ok(Report::ok(table, report))
}

pub fn dio_construct(cfg: &mut RunConfig) -> Result<Report> {
    let profile: Profile = cfg
        .approximation
        .get_or_insert_with(|| "power:4".into())
        .parse()?;
    let depth = *cfg.depth.get_or_insert(8);
    let j = jarnik_construct(&profile, depth)?;
    let mut table = Table::new(&[
        "k",
        "a_next",
        "q_bits",
        "q",
        "ln_residual",
        "ln_bound",
        "certified",
        "exact",
    ]);
    let quotients = j.cf.quotient_strings();
    for c in &j.certificates {
        table.push(vec![
            c.k.to_string(),
            quotients[c.k + 1].clone(),
            c.q_bits.to_string(),
            c.q.clone().unwrap_or_default(),
            num(c.ln_residual),
            num(c.ln_bound),
            c.certified.to_string(),
            c.exact.to_string(),
        ]);
    }
    let passed = j.all_certified();
    Ok(Report {
        table,
        results: serde_json::to_value(&j).expect("serializes"),
        passed,
    })
}

pub const FIT_GRID: GridSpec = GridSpec {
    min: 6.0,
    max: 24.0,
    points: 8,
};
pub const HEAT_GRID: GridSpec = GridSpec {
    min: 0.01,
    max: 1.0,
    points: 8,
};
pub const CORRECTION_GRID: GridSpec = GridSpec {
    min: 1e-4,
    max: 1e-1,
    points: 13,
};

fn window_opts(cfg: &RunConfig) -> WindowOptions {
    let mut o = WindowOptions::default();
    if let Some(seed) = cfg.seed {
        o.slq.seed = seed;
    }
    o
}

pub fn action_fit(cfg: &mut RunConfig) -> Result<Report> {
    let t = triple_of(cfg, 2)?;
    let n = t.n();
    let profile: CutoffProfile = cfg
        .profile
        .get_or_insert_with(|| "gaussian".into())
        .parse()?;
    let grid = *cfg.lambda.get_or_insert(FIT_GRID);
    let a = form_of(cfg, n)?;
    let lambdas = grid.values();
    let samples = action_samples(&t, &profile, &lambdas, a.as_ref(), &window_opts(cfg))?;
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let fit = fit_expansion(&profile, n, &lambdas, &values)?;
    let cosmo = cosmological_term(&fit)?;
    let mut table = Table::new(&["parameter", "value", "uncertainty"]);
    for s in &samples {
        table.push(vec![
            format!("S(lambda={})", num(s.lambda)),
            num(s.value),
            num(s.std_error + s.truncation_bound),
        ]);
    }
    for c in &fit.coefficients {
        table.push(vec![format!("c{}", c.power), num(c.c), num(c.uncertainty)]);
    }
    table.push(vec!["guard".into(), num(fit.guard), String::new()]);
    table.push(vec![
        "cosmological_target".into(),
        num(cosmo.reference),
        String::new(),
    ]);
    let passed = cfg
        .tolerance
        .map_or(true, |tol| cosmo.relative_deviation <= tol);
    Ok(Report {
        table,
        results: json!({ "samples": samples, "fit": fit, "cosmological": cosmo }),
        passed,
    })
}

pub fn action_constant_term(cfg: &mut RunConfig) -> Result<Report> {
    let t = triple_of(cfg, 4)?;
    let n = t.n();
    let a = form_of(cfg, n)?.unwrap_or_else(|| OneForm::zero(n));
    let opts = NcOptions {
        order: cfg.order,
        certified: None,
    };
    let ct = constant_term(&t, &a, &opts)?;
    let mut table = Table::new(&["parameter", "value_re", "value_im", "uncertainty"]);
    for term in &ct.terms {
        table.push(vec![
            format!("nc_integral_q{}", term.q),
            num(term.value.re),
            num(term.value.im),
            num(term.error_estimate),
        ]);
    }
    table.push(vec![
        "constant_term".into(),
        num(ct.value.re),
        num(ct.value.im),
        num(ct.error_estimate),
    ]);
    let mut rel = None;
    if let Some(target) = ct.curvature_target {
        table.push(vec![
            "curvature_target".into(),
            num(target.re),
            num(target.im),
            String::new(),
        ]);
        if target.norm() > 0.0 {
            rel = Some((ct.value - target).norm() / target.norm());
        }
    }
    let passed = match (cfg.tolerance, rel) {
        (Some(tol), Some(r)) => r <= tol,
        (Some(tol), None) if n == 2 => ct.value.norm() <= tol,
        _ => true,
    };
    Ok(Report {
        table,
        results: json!({ "constant_term": ct, "relative_gap": rel }),
        passed,
    })
}

pub fn action_heat(cfg: &mut RunConfig) -> Result<Report> {
    let t = triple_of(cfg, 2)?;
    let n = t.n();
    let a = form_of(cfg, n)?;
    let grid = *cfg.t.get_or_insert(HEAT_GRID);
    let default_method = if a.is_some() { "dense" } else { "exact" };
    let method = match cfg
        .method
        .get_or_insert_with(|| default_method.into())
        .as_str()
    {
        "exact" => TraceMethod::ExactFormula,
        "dense" => TraceMethod::DenseWindow,
        "stochastic" => TraceMethod::Stochastic,
        other => {
            return Err(Error::Config(format!(
                "unknown method {other:?}; expected exact, dense or stochastic"
            )))
        }
    };
    let opts = window_opts(cfg);
    let mut table = Table::new(&[
        "t",
        "value_re",
        "value_im",
        "method",
        "cutoff_radius",
        "tail_bound",
        "std_error",
    ]);
    let mut samples = Vec::new();
    for time in grid.values() {
        let h = heat_trace(&t, a.as_ref(), time, method, &opts)?;
        let m = serde_json::to_value(h.method).expect("serializes");
        table.push(vec![
            num(h.t),
            num(h.value.re),
            num(h.value.im),
            m.as_str().unwrap_or_default().to_string(),
            num(h.cutoff_radius),
            num(h.tail_bound),
            num(h.std_error),
        ]);
        samples.push(h);
    }
    Ok(Report::ok(table, samples))
}

pub fn action_correction(cfg: &mut RunConfig) -> Result<Report> {
    let n = n_of(cfg, 2);
    let specs = cfg
        .thetas
        .get_or_insert_with(|| {
            ["rational:1/2", "golden", "jarnik:power:4"]
                .iter()
                .map(|s| ThetaSpec::Preset(s.to_string()))
                .collect()
        })
        .clone();
    let grid = *cfg.t.get_or_insert(CORRECTION_GRID);
    let family = specs
        .iter()
        .map(|s| Ok((s.label(), s.resolve(n)?)))
        .collect::<Result<Vec<_>>>()?;
    let rows = correction_scaling(&family, &grid.values(), &CorrectionOptions::default())?;
    let mut table = Table::new(&["theta", "t", "delta", "baseline"]);
    for r in &rows {
        for p in &r.points {
            table.push(vec![
                r.label.clone(),
                num(p.t),
                num(p.delta),
                num(p.baseline),
            ]);
        }
    }
    Ok(Report::ok(table, rows))
}

/// Suites run by `op check`.
pub const SUITES: [&str; 4] = ["pure-gauge", "covariance", "gauge", "square"];

#[derive(Serialize)]
struct SuiteResult {
    suite: String,
    checks: usize,
    max_deviation: f64,
    tolerance: f64,
    passed: bool,
}

fn run_suite(t: &SpectralTriple, suite: &str, rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let n = t.n();
    let w = ModeWindow::max_norm(if n <= 2 { 3 } else { 1 });
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    match suite {
        "pure-gauge" | "covariance" => {
            for k in cube(n, 3) {
                let d = if suite == "pure-gauge" {
                    t.pure_gauge_check_on(&k, &w)?
                } else {
                    t.covariance_check_on(&k, &w)?
                };
                worst = worst.max(d);
                checks += 1;
            }
        }
        "gauge" => {
            for _ in 0..20 {
                let a = OneForm::random_anti_selfadjoint(n, 2, 1, 0.5, rng);
                let p: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
                let u = phase_unitary(LatticePoint::new(&p), rng.gen_range(0.0..2.0 * PI));
                worst = worst.max(t.gauge_covariance_check(&u, &a, &w)?);
                checks += 1;
            }
        }
        "square" => {
            for _ in 0..10 {
                let a = OneForm::random_anti_selfadjoint(n, 2, 2, 0.5, rng);
                worst = worst.max(t.square_expansion_check_on(&a, &w)?);
                checks += 1;
            }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown suite {other:?}; expected one of {}",
                SUITES.join(", ")
            )));
        }
    }
    Ok((checks, worst))
}

pub fn op_check(cfg: &mut RunConfig, suites: &[String]) -> Result<Report> {
    let t = triple_of(cfg, 2)?;
    let tol = *cfg.tolerance.get_or_insert(1e-13);
    let seed = *cfg.seed.get_or_insert(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(&["suite", "checks", "max_deviation", "tolerance", "passed"]);
    let mut results = Vec::new();
    for s in suites {
        let (checks, worst) = run_suite(&t, s, &mut rng)?;
        let passed = worst <= tol;
        table.push(vec![
            s.clone(),
            checks.to_string(),
            num(worst),
            num(tol),
            passed.to_string(),
        ]);
        results.push(SuiteResult {
            suite: s.clone(),
            checks,
            max_deviation: worst,
            tolerance: tol,
            passed,
        });
    }
    let passed = results.iter().all(|r| r.passed);
    Ok(Report {
        table,
        results: serde_json::to_value(&results).expect("serializes"),
        passed,
    })
}
