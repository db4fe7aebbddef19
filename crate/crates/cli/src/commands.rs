//! One function per subcommand. Each resolves its parameters (filling in
//! defaults), computes, and returns the summary and detail files without
//! touching the filesystem.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use spectral_gibbs::concentration::{
    complex_gaussian, empirical_tail_vs_bound, linear_form_samples, orlicz_norm, partition_positivity_check,
    variance_estimate, OrliczKind, RadialQuadraticSum, ShiftMatrix, TailBound, TailCurve, MIN_ORLICZ_SAMPLES,
};
use spectral_gibbs::dynamics::{evolve, invariance_test, FlowFailure, NamedObservable, TrajectoryReport};
use spectral_gibbs::fourier_field::{
    japanese_bracket, read_field_dump, sample_free_field, sobolev_norm, write_field_dump, FieldShape, SeedPolicy,
};
use spectral_gibbs::gibbs::{tail_probability, WeightedEnsemble};
use spectral_gibbs::kms::{
    check_localization, ibp_residuals, kms_residuals, liouville_residuals, IdentityReport, TestFunction,
    TestFunctionSource,
};
use spectral_gibbs::observables::{wick_mass, InteractionSpec};
use spectral_gibbs::stats::McEstimate;

use crate::config::{config_err, increasing, positive, Params};
use crate::CliError;

/// What a subcommand produced.
#[derive(Debug)]
pub struct Outcome {
    pub result: Value,
    /// (file name, contents), written next to the JSON summary.
    pub files: Vec<(String, Vec<u8>)>,
    pub violation: bool,
    /// Set when the computation failed part-way but produced a partial report.
    pub failure: Option<String>,
}

impl Outcome {
    fn new(result: Value, files: Vec<(String, Vec<u8>)>, violation: bool) -> Self {
        Self {
            result,
            files,
            violation,
            failure: None,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Run(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Run(e.to_string()))
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn fmt(x: f64) -> String {
    x.to_string()
}

/// Samples per work unit; sums are formed per chunk and then in chunk order,
/// so results do not depend on the thread count.
const CHUNK: usize = 1024;

#[derive(Clone)]
struct ModeSums {
    m2: Vec<f64>,
    m4: Vec<f64>,
    mass: [f64; 2],
    sobolev: [f64; 2],
}

pub fn sample(p: &mut Params) -> Result<Outcome, CliError> {
    let d = p.d()?;
    let n = p.n();
    let s = p.s(d);
    let samples = p.samples(2)?;
    let seed = p.seed();
    let dumps = *p.dumps.get_or_insert(0);
    if dumps > samples {
        return Err(config_err("dumps exceeds the number of samples"));
    }
    let shape = FieldShape::new(d, n)?;
    let policy = SeedPolicy::new(seed);
    let len = shape.len();

    let chunks: Vec<ModeSums> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = ModeSums {
                m2: vec![0.0; len],
                m4: vec![0.0; len],
                mass: [0.0; 2],
                sobolev: [0.0; 2],
            };
            for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let u = sample_free_field(d, n, &policy, i as u64)?;
                for ((a2, a4), z) in acc.m2.iter_mut().zip(acc.m4.iter_mut()).zip(u.coeffs()) {
                    let q = z.norm_sqr();
                    *a2 += q;
                    *a4 += q * q;
                }
                let m = wick_mass(&u);
                let h = sobolev_norm(&u, -s).powi(2);
                acc.mass[0] += m;
                acc.mass[1] += m * m;
                acc.sobolev[0] += h;
                acc.sobolev[1] += h * h;
            }
            Ok(acc)
        })
        .collect::<spectral_gibbs::Result<_>>()?;
    let mut total = chunks[0].clone();
    for c in &chunks[1..] {
        for j in 0..len {
            total.m2[j] += c.m2[j];
            total.m4[j] += c.m4[j];
        }
        for j in 0..2 {
            total.mass[j] += c.mass[j];
            total.sobolev[j] += c.sobolev[j];
        }
    }
    let nf = samples as f64;
    let estimate = |sum: f64, sum_sq: f64| {
        let mean = sum / nf;
        let var = (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
        McEstimate {
            value: mean,
            std_error: (var / nf).sqrt(),
            n_effective: nf,
            n_samples: samples,
        }
    };

    let mut rows = Vec::with_capacity(len);
    let mut max_z: f64 = 0.0;
    let mut sobolev_exact = 0.0;
    for (j, k) in shape.indices().enumerate() {
        let b2 = japanese_bracket(&k).powi(2);
        let expected = 1.0 / b2;
        sobolev_exact += b2.powf(-1.0 - s);
        let est = estimate(total.m2[j], total.m4[j]);
        let z = (est.value - expected) / est.std_error;
        max_z = max_z.max(z.abs());
        let mut row: Vec<String> = k.components().iter().map(|c| c.to_string()).collect();
        row.extend([fmt(expected), fmt(est.value), fmt(est.std_error), fmt(z)]);
        rows.push(row);
    }
    let mut cols: Vec<String> = (1..=d).map(|i| format!("k{i}")).collect();
    cols.extend(header(&["expected", "mean_abs2", "std_error", "z"]));

    let ens = WeightedEnsemble::generate(&spectral_gibbs::gibbs::EnsembleConfig::free(d, n, samples, policy))?;
    let digest: String = ens.digest()?.iter().map(|b| format!("{b:02x}")).collect();

    let mut files = vec![("sample_modes.csv".to_string(), csv_bytes(&cols, &rows)?)];
    for i in 0..dumps {
        let u = sample_free_field(d, n, &policy, i as u64)?;
        let mut bytes = Vec::new();
        write_field_dump(&mut bytes, &u, s, seed, i as u64)?;
        files.push((format!("field_{i:06}.sgff"), bytes));
    }
    let sobolev = estimate(total.sobolev[0], total.sobolev[1]);
    let result = json!({
        "samples": samples,
        "modes": len,
        "ensemble_digest": digest,
        "covariance_max_abs_z": max_z,
        "wick_mass": estimate(total.mass[0], total.mass[1]),
        "sobolev_sq": sobolev,
        "sobolev_sq_exact": sobolev_exact,
        "sobolev_sq_z": (sobolev.value - sobolev_exact) / sobolev.std_error,
    });
    Ok(Outcome::new(result, files, false))
}

pub fn partition(p: &mut Params) -> Result<Outcome, CliError> {
    let cfg = p.ensemble(2)?;
    let records = *p.records.get_or_insert(false);
    let ens = WeightedEnsemble::generate(&cfg)?;
    let z = ens.partition()?;
    let active = ens.records().iter().filter(|r| r.is_active()).count();
    let mass = ens.expectation(|_, r| Ok(r.wick_mass))?;
    let mut files = Vec::new();
    if records {
        let rows: Vec<Vec<String>> = ens
            .records()
            .iter()
            .map(|r| vec![r.index.to_string(), fmt(r.wick_mass), fmt(r.h_interaction), fmt(r.log_weight)])
            .collect();
        files.push((
            "partition_samples.csv".to_string(),
            csv_bytes(&header(&["index", "wick_mass", "h_interaction", "log_weight"]), &rows)?,
        ));
    }
    let result = json!({
        "estimate": z.value,
        "std_error": z.std_error,
        "n_effective": mass.n_effective,
        "samples": z.n_samples,
        "inside_cutoff": active,
        "mean_wick_mass": mass,
    });
    Ok(Outcome::new(result, files, false))
}

pub fn tail(p: &mut Params) -> Result<Outcome, CliError> {
    let d = p.d()?;
    let n = p.n();
    let interaction = p.interaction(d, n)?;
    let radius = p.radius.ok_or_else(|| config_err("tail needs `radius`"))?;
    positive("radius", radius)?;
    let lambdas = p.lambdas.clone().ok_or_else(|| config_err("tail needs `lambdas`"))?;
    increasing("lambdas", &lambdas)?;
    let samples = p.samples(2)?;
    let seed = SeedPolicy::new(p.seed());
    let curve = tail_probability(d, n, &interaction, radius, &lambdas, samples, seed)?;
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|t| {
            vec![
                fmt(t.lambda),
                t.count.to_string(),
                fmt(t.probability.value),
                fmt(t.probability.std_error),
                fmt(t.ci_low),
                fmt(t.ci_high),
            ]
        })
        .collect();
    let csv = csv_bytes(
        &header(&["lambda", "count", "probability", "std_error", "ci_low", "ci_high"]),
        &rows,
    )?;
    Ok(Outcome::new(to_value(&curve), vec![("tail.csv".into(), csv)], false))
}

fn identity_outcome(
    name: &str,
    reports: &[IdentityReport],
    functions: Vec<Value>,
    threshold: f64,
) -> Result<Outcome, CliError> {
    let max_abs_z = reports.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    let checks: Vec<Value> = reports
        .iter()
        .zip(functions)
        .enumerate()
        .map(|(i, (r, f))| {
            json!({
                "index": i,
                "functions": f,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "residual": r.residual.value,
                "std_error": r.residual.std_error,
                "z": r.z,
            })
        })
        .collect();
    let rows: Vec<Vec<String>> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.to_string(),
                fmt(r.lhs.value),
                fmt(r.rhs.value),
                fmt(r.residual.value),
                fmt(r.residual.std_error),
                fmt(r.z),
            ]
        })
        .collect();
    let csv = csv_bytes(&header(&["index", "lhs", "rhs", "residual", "std_error", "z"]), &rows)?;
    let violation = max_abs_z > threshold;
    let result = json!({
        "checks": checks,
        "max_abs_z": max_abs_z,
        "z_threshold": threshold,
        "n_effective": reports.first().map_or(0.0, |r| r.lhs.n_effective),
    });
    Ok(Outcome::new(result, vec![(format!("{name}.csv"), csv)], violation))
}

pub fn kms_check(p: &mut Params) -> Result<Outcome, CliError> {
    let cfg = p.ensemble(2)?;
    let family = p.family()?;
    let count = p.functions()?;
    let calibration = p.calibration();
    let threshold = p.z_threshold()?;
    let radius = if cfg.cutoff.is_none() {
        if p.inner_radius.is_some() {
            return Err(config_err("`inner-radius` needs a cutoff"));
        }
        None
    } else {
        Some(*p.inner_radius.get_or_insert(0.6 * cfg.cutoff.radius()))
    };
    let source = TestFunctionSource::new(cfg.seed.master());
    let mut fs = Vec::with_capacity(count);
    let mut gs: Vec<Box<dyn TestFunction>> = Vec::with_capacity(count);
    let mut described = Vec::with_capacity(count);
    for i in 0..count as u64 {
        let (f, localized, g) = source.pair(cfg.d, family, radius, i)?;
        let g: Box<dyn TestFunction> = match localized {
            Some(l) => {
                described.push(json!({"f": f, "g": l}));
                Box::new(l)
            }
            None => {
                described.push(json!({"f": f, "g": g}));
                Box::new(g)
            }
        };
        check_localization(&cfg.cutoff, g.as_ref())?;
        fs.push(f);
        gs.push(g);
    }
    let ens = WeightedEnsemble::generate(&cfg)?;
    let pairs: Vec<(&dyn TestFunction, &dyn TestFunction)> =
        fs.iter().zip(&gs).map(|(f, g)| (f as &dyn TestFunction, g.as_ref())).collect();
    let reports = kms_residuals(&ens, &pairs, calibration)?;
    identity_outcome("kms-check", &reports, described, threshold)
}

pub fn liouville_check(p: &mut Params) -> Result<Outcome, CliError> {
    let cfg = p.ensemble(2)?;
    let family = p.family()?;
    let count = p.functions()?;
    let calibration = p.calibration();
    let threshold = p.z_threshold()?;
    let source = TestFunctionSource::new(cfg.seed.master());
    let fs = (0..count as u64)
        .map(|i| source.cylindrical(cfg.d, family, i))
        .collect::<spectral_gibbs::Result<Vec<_>>>()?;
    let ens = WeightedEnsemble::generate(&cfg)?;
    let refs: Vec<&dyn TestFunction> = fs.iter().map(|f| f as &dyn TestFunction).collect();
    let reports = liouville_residuals(&ens, &refs, calibration)?;
    let described = fs.iter().map(|f| json!({ "f": f })).collect();
    identity_outcome("liouville-check", &reports, described, threshold)
}

pub fn ibp_check(p: &mut Params) -> Result<Outcome, CliError> {
    let cfg = p.ensemble(2)?;
    if cfg.interaction != InteractionSpec::Off || !cfg.cutoff.is_none() {
        return Err(config_err("ibp-check runs under the free measure: interaction off, no cutoff"));
    }
    let family = p.family()?;
    let count = p.functions()?;
    let calibration = p.calibration();
    let threshold = p.z_threshold()?;
    let source = TestFunctionSource::new(cfg.seed.master());
    let triples = (0..count as u64)
        .map(|i| source.triple(cfg.d, cfg.n, family, i))
        .collect::<spectral_gibbs::Result<Vec<_>>>()?;
    let ens = WeightedEnsemble::generate(&cfg)?;
    let refs: Vec<_> = triples
        .iter()
        .map(|(f, g, psi)| (f as &dyn TestFunction, g as &dyn TestFunction, psi))
        .collect();
    let reports = ibp_residuals(&ens, &refs, calibration)?;
    let described = triples
        .iter()
        .map(|(f, g, psi)| {
            let dir: Vec<Value> = psi
                .iter()
                .filter(|(_, c)| c.norm_sqr() > 0.0)
                .map(|(k, c)| json!({"k": k, "re": c.re, "im": c.im}))
                .collect();
            json!({"f": f, "g": g, "psi": dir})
        })
        .collect();
    identity_outcome("ibp-check", &reports, described, threshold)
}

fn trajectory_csv(report: &TrajectoryReport) -> Result<Vec<u8>, CliError> {
    let rows: Vec<Vec<String>> = report
        .checkpoints
        .iter()
        .map(|c| vec![fmt(c.t), fmt(c.h), fmt(c.mass), fmt(c.drift_h), fmt(c.drift_mass)])
        .collect();
    csv_bytes(&header(&["t", "h", "mass", "drift_h", "drift_mass"]), &rows)
}

pub fn flow(p: &mut Params) -> Result<Outcome, CliError> {
    let (u0, s, seed, index) = match p.initial_field.clone() {
        Some(path) => {
            let file = std::fs::File::open(&path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            let (h, u) = read_field_dump(std::io::BufReader::new(file))?;
            for (key, given, found) in [("d", p.d, h.d), ("n", p.n, h.n)] {
                if given.is_some_and(|g| g != found) {
                    return Err(config_err(format!("{key} = {} does not match the initial field ({found})", given.unwrap())));
                }
            }
            p.d = Some(h.d);
            p.n = Some(h.n);
            (u, h.s, h.seed, h.index)
        }
        None => {
            let d = p.d()?;
            let n = p.n();
            let s = p.s(d);
            let seed = p.seed();
            let index = *p.sample_index.get_or_insert(0);
            (sample_free_field(d, n, &SeedPolicy::new(seed), index)?, s, seed, index)
        }
    };
    let interaction = p.interaction(u0.d(), u0.n())?;
    let cfg = p.flow(interaction)?;
    let tolerance = *p.drift_tolerance.get_or_insert(1e-6);
    positive("drift-tolerance", tolerance)?;
    match evolve(&u0, &cfg) {
        Ok(traj) => {
            let r = &traj.report;
            let violation = r.max_drift_h > tolerance || r.max_drift_mass > tolerance;
            let mut dump = Vec::new();
            write_field_dump(&mut dump, &traj.field, s, seed, index)?;
            let result = json!({
                "status": "completed",
                "max_drift_h": r.max_drift_h,
                "max_drift_mass": r.max_drift_mass,
                "drift_tolerance": tolerance,
                "initial": r.checkpoints.first(),
                "final": r.checkpoints.last(),
            });
            Ok(Outcome::new(
                result,
                vec![("flow.csv".into(), trajectory_csv(r)?), ("flow_final.sgff".into(), dump)],
                violation,
            ))
        }
        Err(FlowFailure::Unstable(abort)) => {
            let result = json!({
                "status": "unstable",
                "unstable_at": abort.time,
                "last_stable_time": abort.last_stable_time,
                "max_drift_h": abort.report.max_drift_h,
                "max_drift_mass": abort.report.max_drift_mass,
            });
            let mut dump = Vec::new();
            write_field_dump(&mut dump, &abort.last_stable, s, seed, index)?;
            let mut out = Outcome::new(
                result,
                vec![
                    ("flow.csv".into(), trajectory_csv(&abort.report)?),
                    ("flow_last_stable.sgff".into(), dump),
                ],
                false,
            );
            out.failure = Some(format!("flow became unstable at t = {}", abort.time));
            Ok(out)
        }
        Err(FlowFailure::Invalid(e)) => Err(e.into()),
    }
}

pub fn invariance(p: &mut Params) -> Result<Outcome, CliError> {
    let ens = p.ensemble(2)?;
    let flow = p.flow(ens.interaction.clone())?;
    let threshold = p.z_threshold()?;
    let observables = NamedObservable::shipped(ens.d)?;
    let report = invariance_test(&ens, &flow, &observables)?;
    let mut by_name = serde_json::Map::new();
    let mut rows = Vec::new();
    let mut max_abs_z: f64 = 0.0;
    for e in &report.entries {
        max_abs_z = max_abs_z.max(e.z.abs());
        by_name.insert(e.name.clone(), to_value(e));
        rows.push(vec![
            e.name.clone(),
            fmt(e.before.value),
            fmt(e.after.value),
            fmt(e.difference.value),
            fmt(e.difference.std_error),
            fmt(e.z),
        ]);
    }
    let csv = csv_bytes(
        &header(&["observable", "before", "after", "difference", "std_error", "z"]),
        &rows,
    )?;
    let result = json!({
        "observables": by_name,
        "max_abs_z": max_abs_z,
        "z_threshold": threshold,
        "max_drift_h": report.max_drift_h,
        "n_effective": report.n_effective,
    });
    Ok(Outcome::new(result, vec![("invariance.csv".into(), csv)], max_abs_z > threshold))
}

const REFERENCE_STREAM: u64 = 0x6f72_6c69;

fn reference_draws(seed: SeedPolicy, count: usize, f: impl Fn(num_complex::Complex64) -> f64 + Sync) -> Vec<f64> {
    let seed = seed.derive(REFERENCE_STREAM);
    (0..count as u64)
        .into_par_iter()
        .map(|i| f(complex_gaussian(&mut seed.rng(i))))
        .collect()
}

pub fn concentration(p: &mut Params) -> Result<Outcome, CliError> {
    let d = *p.d.get_or_insert(3);
    p.d()?;
    let samples = p.samples(MIN_ORLICZ_SAMPLES)?;
    let seed = SeedPolicy::new(p.seed());
    let max_moment = p.max_moment()?;
    let threshold = p.z_threshold()?;
    let statistic = p.statistic.get_or_insert_with(|| "shell-sum".into()).clone();
    let mut extra = serde_json::Map::new();
    let shell = |p: &mut Params| -> Result<RadialQuadraticSum, CliError> {
        let inner = *p.shell_inner.get_or_insert(16.0);
        let outer = *p.shell_outer.get_or_insert(4.0 * inner);
        if !(inner >= 0.0 && outer > inner && outer.is_finite()) {
            return Err(config_err("need 0 <= shell-inner < shell-outer"));
        }
        Ok(RadialQuadraticSum::shell(d, inner, outer)?)
    };
    let (values, bound, scale, orlicz) = match statistic.as_str() {
        "shell-sum" => {
            let law = shell(p)?;
            let psi1 = orlicz_norm(&reference_draws(seed, samples, |g| g.norm_sqr() - 1.0), OrliczKind::Psi1, max_moment)?;
            let values = law.sample_many(&seed, samples);
            let var = variance_estimate(&values)?;
            let z = (var.value - law.variance()) / var.std_error;
            extra.insert(
                "variance".into(),
                json!({"exact": law.variance(), "estimate": var, "z": z}),
            );
            extra.insert("modes".into(), json!(law.modes()));
            let bound = TailBound::Bernstein {
                a_l2_sq: law.l2_sq(),
                a_linf: law.linf(),
                psi1: psi1.value,
            };
            (values, bound, law.l2_sq().sqrt(), psi1)
        }
        "linear-form" => {
            let a = shell(p)?.coefficients();
            let psi2 = orlicz_norm(&reference_draws(seed, samples, |g| g.norm()), OrliczKind::Psi2, max_moment)?;
            let values = linear_form_samples(&a, &seed, samples);
            extra.insert("modes".into(), json!(a.len()));
            let bound = TailBound::hoeffding(&a, psi2.value)?;
            let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            (values, bound, scale, psi2)
        }
        "shift-matrix" => {
            let k_scale = *p.matrix_scale.get_or_insert(8.0);
            positive("matrix-scale", k_scale)?;
            let shift = p.shift.get_or_insert_with(|| [1, 0, 0][..d].to_vec()).clone();
            let m = ShiftMatrix::new(d, k_scale, &shift)?;
            let norms = m.norms(k_scale);
            extra.insert("norms".into(), to_value(&norms));
            let psi2 = orlicz_norm(&reference_draws(seed, samples, |g| g.norm()), OrliczKind::Psi2, max_moment)?;
            let values = m.sample_many(&seed, samples);
            let bound = TailBound::HansonWright {
                hs_sq: norms.hs_sq,
                op: norms.operator,
                psi2: psi2.value,
            };
            (values, bound, norms.hs_sq.sqrt(), psi2)
        }
        other => return Err(config_err(format!("unknown statistic `{other}`"))),
    };
    let thresholds = p
        .thresholds
        .get_or_insert_with(|| (1..=8).map(|i| 0.5 * i as f64 * scale).collect())
        .clone();
    increasing("thresholds", &thresholds)?;
    let curve: TailCurve = empirical_tail_vs_bound(&values, bound, &thresholds)?;
    let rows: Vec<Vec<String>> = curve
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt(r.threshold),
                fmt(r.empirical),
                fmt(r.ci_low),
                fmt(r.ci_high),
                fmt(r.bound),
                fmt(curve.fitted_c),
            ]
        })
        .collect();
    let csv = csv_bytes(
        &header(&["threshold", "empirical", "ci_low", "ci_high", "bound", "fitted_c"]),
        &rows,
    )?;
    let variance_bad = extra
        .get("variance")
        .and_then(|v| v["z"].as_f64())
        .is_some_and(|z| z.abs() > threshold);
    let violation = !(curve.fitted_c > 0.0) || !curve.dominated() || variance_bad;
    let mut result = serde_json::Map::new();
    result.insert("statistic".into(), json!(statistic));
    result.insert("orlicz".into(), to_value(&orlicz));
    result.insert("bound".into(), to_value(&curve.bound));
    result.insert("fitted_c".into(), json!(curve.fitted_c));
    result.insert("dominated".into(), json!(curve.dominated()));
    result.insert("rows".into(), to_value(&curve.rows));
    result.extend(extra);
    Ok(Outcome::new(Value::Object(result), vec![("concentration.csv".into(), csv)], violation))
}

pub fn positivity(p: &mut Params) -> Result<Outcome, CliError> {
    let d = p.d()?;
    if d == 1 {
        return Err(config_err("positivity is checked for d = 2 and 3"));
    }
    let n = p.n();
    let samples = p.samples(2)?;
    let seed = p.seed();
    let radii = p.radii.get_or_insert_with(|| vec![0.5, 1.0, 2.0]).clone();
    increasing("radii", &radii)?;
    if radii[0] <= 0.0 {
        return Err(config_err("radii must be positive"));
    }
    let reports = partition_positivity_check(d, &radii, samples, n, seed)?;
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                fmt(r.radius),
                fmt(r.estimate.value),
                r.successes.to_string(),
                fmt(r.ci_low),
                fmt(r.ci_high),
                r.positive.to_string(),
            ]
        })
        .collect();
    let csv = csv_bytes(
        &header(&["radius", "estimate", "successes", "ci_low", "ci_high", "positive"]),
        &rows,
    )?;
    let violation = reports.iter().any(|r| !r.positive);
    Ok(Outcome::new(
        json!({ "checks": reports, "confidence": spectral_gibbs::concentration::POSITIVITY_CONFIDENCE }),
        vec![("positivity.csv".into(), csv)],
        violation,
    ))
}
