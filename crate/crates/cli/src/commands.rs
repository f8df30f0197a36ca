use mtlab_core::acceptance;
use mtlab_core::constants::{self, counterexample_check, precision_from_env, smallest_counterexample_n};
use mtlab_core::functionals::{family_member, g_functional, sweep_csv, DEFAULT_DELTAS};
use mtlab_core::mfe::{oracle_epsilon, ConcentrationRow};
use mtlab_core::thermo::{entropy, free_energy, gibbs_measure, measure_energy};
use mtlab_core::*;
use serde_json::{json, Value};

use crate::cli::{Format, MfeAction, Params};
use crate::output::{jnum, num, Outcome};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Validation(_) => "validation",
            CliError::Numerical(_) => "numerical",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e.class() {
            ErrorClass::Validation => CliError::Validation(e.to_string()),
            ErrorClass::Numerical => CliError::Numerical(e.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, CliError>;

fn grid(p: &Params) -> Res<GridSpec> {
    let mut g = GridSpec::default();
    if let Some(t) = p.tmin {
        g = g.with_t_min(t);
    }
    if let Some(k) = p.grid_points {
        g = g.with_points(k);
    }
    g.validate()?;
    Ok(g)
}

fn dim(p: &Params) -> Res<usize> {
    match p.n.unwrap_or(2) {
        0 => Err(CliError::Validation("n must be positive".into())),
        n => Ok(n),
    }
}

fn positive_list(name: &str, v: &[f64]) -> Res<()> {
    match v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        Some(x) => Err(CliError::Validation(format!("--{name} values must be positive, got {x}"))),
        None => Ok(()),
    }
}

fn gammas(p: &Params, default: &[f64]) -> Res<Vec<f64>> {
    let g = p.gamma.clone().unwrap_or_else(|| default.to_vec());
    positive_list("gamma", &g)?;
    Ok(g)
}

/// Profiles named on the command line: `--input`, or a family with its
/// parameters. `gamma` is needed by the `fs-scaled` family only.
struct Source {
    label: String,
    param: f64,
}

fn family_desc(p: &Params) -> Res<FamilyDescriptor> {
    Ok(FamilyDescriptor {
        kind: FamilyKind::parse(p.family.as_deref().unwrap_or("fs"))?,
        n: dim(p)?,
        grid: grid(p)?,
    })
}

fn family_params(p: &Params, kind: FamilyKind) -> Res<Vec<f64>> {
    let v = match kind {
        FamilyKind::Cone => p.slope.clone().unwrap_or_else(|| vec![1.0]),
        _ => p.eps.clone().unwrap_or_else(|| vec![1.0]),
    };
    positive_list(if kind == FamilyKind::Cone { "slope" } else { "eps" }, &v)?;
    Ok(v)
}

fn profiles(p: &Params, gamma: f64) -> Res<Vec<(Source, RadialProfile)>> {
    if let Some(path) = &p.input {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        let prof = RadialProfile::from_table(&text)?;
        let label = if prof.label().is_empty() { "input".to_string() } else { prof.label().to_string() };
        return Ok(vec![(Source { label, param: f64::NAN }, prof)]);
    }
    let desc = family_desc(p)?;
    family_params(p, desc.kind)?
        .into_iter()
        .map(|x| {
            let prof = family_member(&desc, x, gamma)?;
            Ok((
                Source {
                    label: desc.kind.name().to_string(),
                    param: x,
                },
                prof,
            ))
        })
        .collect()
}

pub fn family(p: &Params) -> Res<Outcome> {
    let gamma = gammas(p, &[1.0])?[0];
    let mut text = String::new();
    let mut results = Vec::new();
    for (src, prof) in profiles(p, gamma)? {
        let prof = prof.labelled(format!("{}:{}", src.label, num(src.param)));
        if !text.is_empty() {
            text.push('\n');
        }
        text.push_str(&prof.to_table());
        results.push(json!({
            "label": prof.label(),
            "n": prof.dim_n(),
            "tail_slope": prof.tail_slope(),
            "t": prof.grid_t(),
            "g": prof.grid_g(),
        }));
    }
    let mut o = Outcome::json(Value::Array(results));
    o.text = Some(text);
    o.default_format = Format::Csv;
    Ok(o)
}

pub fn mt(p: &Params) -> Res<Outcome> {
    let deltas = p.delta.clone().unwrap_or_else(|| DEFAULT_DELTAS.to_vec());
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for g in gammas(p, &[1.0])? {
        for (src, prof) in profiles(p, g)? {
            let r = mt_check(&prof, g, &deltas)?;
            rows.push(vec![
                src.label.clone(),
                num(src.param),
                r.n.to_string(),
                num(g),
                num(r.lhs),
                num(r.j_raw),
                num(r.e_thermo),
                num(r.g_value),
                num(r.sharp_rhs),
                num(r.sharp_margin),
                num(r.quad_err),
            ]);
            results.push(json!({
                "label": src.label,
                "param": jnum(src.param),
                "report": {
                    "n": r.n, "gamma": g, "lhs": jnum(r.lhs), "j_raw": jnum(r.j_raw),
                    "e_thermo": jnum(r.e_thermo), "g_value": jnum(r.g_value),
                    "sharp_rhs": jnum(r.sharp_rhs), "sharp_margin": jnum(r.sharp_margin),
                    "quad_err": jnum(r.quad_err),
                    "quasi": r.quasi.iter().map(|q| json!({
                        "delta": q.delta, "value": jnum(q.value), "margin": jnum(q.margin)
                    })).collect::<Vec<_>>(),
                },
            }));
        }
    }
    Ok(Outcome::table(
        vec![
            "family", "param", "n", "gamma", "lhs", "j_raw", "e_thermo", "g_value", "sharp_rhs", "sharp_margin",
            "quad_err",
        ],
        rows,
        Value::Array(results),
    ))
}

pub fn bm(p: &Params) -> Res<Outcome> {
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for (src, prof) in profiles(p, 1.0)? {
        let r = bm_check(&prof)?;
        rows.push(vec![
            src.label.clone(),
            num(src.param),
            r.n.to_string(),
            num(r.mass),
            num(r.integral),
            num(r.ratio_sharp),
            num(r.ratio_quasi),
            r.admissible.to_string(),
        ]);
        results.push(json!({
            "label": src.label, "param": jnum(src.param), "n": r.n, "mass": jnum(r.mass),
            "integral": jnum(r.integral), "ratio_sharp": jnum(r.ratio_sharp),
            "ratio_quasi": jnum(r.ratio_quasi), "admissible": r.admissible,
        }));
    }
    Ok(Outcome::table(
        vec!["family", "param", "n", "mass", "integral", "ratio_sharp", "ratio_quasi", "admissible"],
        rows,
        Value::Array(results),
    ))
}

pub fn sweep_cmd(p: &Params) -> Res<Outcome> {
    if p.input.is_some() {
        return Err(CliError::Usage("sweep works on families; --input is not accepted".into()));
    }
    let desc = family_desc(p)?;
    let params = family_params(p, desc.kind)?;
    let rows = sweep(&desc, &gammas(p, &[1.0])?, &params)?;
    let results = rows
        .iter()
        .map(|r| {
            json!({
                "family": r.family, "n": r.n, "param": r.param, "gamma": r.gamma,
                "mass": jnum(r.mass), "integral": jnum(r.integral), "lhs": jnum(r.lhs),
                "j_raw": jnum(r.j_raw), "g_value": jnum(r.g_value), "sharp_rhs": jnum(r.sharp_rhs),
                "ratio_sharp": jnum(r.ratio_sharp), "ratio_quasi": jnum(r.ratio_quasi),
                "admissible": r.admissible,
            })
        })
        .collect();
    let mut o = Outcome::json(Value::Array(results));
    o.text = Some(sweep_csv(&rows));
    o.default_format = Format::Csv;
    Ok(o)
}

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

pub fn legendre_cmd(p: &Params) -> Res<Outcome> {
    let n = dim(p)? as f64;
    let k = p.grid_points.unwrap_or(100).max(2);
    let t_hi = 1.5 * (n + 1.0) * 10f64.powf(1.0 / n);
    let f = ConvexGridFunction::from_fn(
        linspace(0.0, t_hi, 40_001),
        |t| (n + 1.0).powf(-(n + 1.0)) * t.powf(n + 1.0),
        Side::T,
    )?;
    let s = linspace(0.1, 10.0, k);
    let fs = legendre(&f, &s)?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for (&x, &v) in s.iter().zip(fs.values()) {
        let exact = n * x.powf((n + 1.0) / n);
        rows.push(vec![num(x), num(v), num(exact), num((v - exact).abs())]);
        results.push(json!({"s": x, "fstar": v, "exact": exact}));
    }
    Ok(Outcome::table(vec!["s", "fstar", "exact", "abs_err"], rows, Value::Array(results)))
}

pub fn laplace(p: &Params) -> Res<Outcome> {
    let ts = p.gamma.clone().unwrap_or_else(|| vec![0.5, 1.0]);
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for (src, prof) in profiles(p, 1.0)? {
        for &t in &ts {
            let r = laplace_layer_cake(&prof, t)?;
            let rel = (r.direct - r.layer).abs() / r.direct;
            rows.push(vec![src.label.clone(), num(src.param), num(t), num(r.direct), num(r.layer), num(rel)]);
            results.push(json!({
                "label": src.label, "param": jnum(src.param), "t": t,
                "direct": r.direct, "layer": r.layer, "rel_diff": rel,
            }));
        }
    }
    Ok(Outcome::table(
        vec!["family", "param", "t", "direct", "layer", "rel_diff"],
        rows,
        Value::Array(results),
    ))
}

pub fn thermo(p: &Params) -> Res<Outcome> {
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for g in gammas(p, &[1.0])? {
        for (src, prof) in profiles(p, g)? {
            let mu = gibbs_measure(&prof, g)?;
            let gv = g_functional(&prof, g)?;
            let fe = free_energy(&mu, g)?;
            let ent = entropy(&mu)?;
            let en = measure_energy(&mu)?;
            let gap = duality_gap(&prof, g)?;
            rows.push(vec![
                src.label.clone(),
                num(src.param),
                num(g),
                num(gv),
                num(fe),
                num(en),
                num(ent),
                num(gap),
            ]);
            results.push(json!({
                "label": src.label, "param": jnum(src.param), "gamma": g, "g_value": jnum(gv),
                "free_energy": jnum(fe), "gibbs_energy": jnum(en), "gibbs_entropy": jnum(ent),
                "duality_gap": jnum(gap),
            }));
        }
    }
    Ok(Outcome::table(
        vec!["family", "param", "gamma", "g_value", "free_energy", "gibbs_energy", "gibbs_entropy", "duality_gap"],
        rows,
        Value::Array(results),
    ))
}

fn solve_options(p: &Params) -> Res<mfe::SolveOptions> {
    let mut o = mfe::SolveOptions {
        grid: grid(p)?,
        ..Default::default()
    };
    if let Some(t) = p.tol {
        if t.is_nan() || t <= 0.0 {
            return Err(CliError::Validation("--tol must be positive".into()));
        }
        o.tol = t;
    }
    o.method = match p.method.as_deref().unwrap_or("auto") {
        "auto" => mfe::Method::Auto,
        "fixed-point" => mfe::Method::FixedPoint,
        "shooting" => mfe::Method::Shooting,
        m => return Err(CliError::Validation(format!("unknown method `{m}`"))),
    };
    Ok(o)
}

fn solution_json(s: &MFESolution) -> Value {
    let n = s.profile.dim_n();
    let oracle = oracle_epsilon(n, s.mass_a).ok();
    json!({
        "n": n,
        "mass_a": s.mass_a,
        "normalization_z": jnum(s.normalization_z),
        "residual_sup": jnum(s.residual_sup),
        "iterations": s.iterations,
        "eps_fit": jnum(s.eps_fit),
        "oracle_epsilon": oracle,
        "converged": s.converged,
        "method": s.method,
        "cross_check": s.cross_check,
        "flagged": s.flagged,
        "grid_points": s.profile.len(),
    })
}

pub fn mfe_cmd(action: &MfeAction) -> Res<Outcome> {
    match action {
        MfeAction::Solve(p) => {
            let n = dim(p)?;
            let opts = solve_options(p)?;
            let sol = if p.gamma_form {
                let g = match p.gamma.as_deref() {
                    Some([g]) => *g,
                    _ => return Err(CliError::Usage("--gamma-form needs exactly one --gamma".into())),
                };
                solve_gamma_form(n, g, &opts)?
            } else {
                let a = p.a.ok_or_else(|| CliError::Usage("mfe solve needs --a (or --gamma-form --gamma)".into()))?;
                solve(n, a, &opts)?
            };
            let mut o = Outcome::json(solution_json(&sol));
            o.text = Some(sol.profile.clone().labelled(format!("mfe:a={}", num(sol.mass_a))).to_table());
            Ok(o)
        }
        MfeAction::Continue(p) => {
            let n = dim(p)?;
            let path = p
                .path
                .clone()
                .ok_or_else(|| CliError::Usage("mfe continue needs --path".into()))?;
            let sols = continuation(n, &path, &solve_options(p)?)?;
            let rep = concentration_report(&sols)?;
            let row = |s: &MFESolution, c: &ConcentrationRow| {
                vec![
                    num(c.mass_a),
                    num(c.eps_fit),
                    num(s.residual_sup),
                    s.iterations.to_string(),
                    s.method.clone(),
                    num(c.core_fraction),
                    num(c.shoulder_fraction),
                    num(c.annulus_distance),
                    num(c.annulus_distance_critical),
                    num(c.e_thermo),
                ]
            };
            let rows = sols.iter().zip(&rep.rows).map(|(s, c)| row(s, c)).collect();
            let results = json!({
                "classification": rep.classification,
                "steps": sols.iter().zip(&rep.rows).map(|(s, c)| json!({
                    "solution": solution_json(s),
                    "core_fraction": c.core_fraction,
                    "shoulder_fraction": c.shoulder_fraction,
                    "annulus_distance": c.annulus_distance,
                    "annulus_distance_critical": c.annulus_distance_critical,
                    "e_thermo": c.e_thermo,
                })).collect::<Vec<_>>(),
            });
            let mut o = Outcome::table(
                vec![
                    "mass_a", "eps_fit", "residual_sup", "iterations", "method", "core_fraction",
                    "shoulder_fraction", "annulus_distance", "annulus_distance_critical", "e_thermo",
                ],
                rows,
                results,
            );
            o.default_format = Format::Json;
            Ok(o)
        }
    }
}

pub fn constants_cmd(p: &Params) -> Res<Outcome> {
    let n_max = p.n_max.unwrap_or(10);
    if n_max == 0 {
        return Err(CliError::Validation("--n-max must be at least 1".into()));
    }
    let sig = precision_from_env();
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for n in 1..=n_max {
        let r = constants::constants_row(n, sig);
        let c = counterexample_check(n);
        let res = |k: &str| r.identity_residuals.get(k).copied().unwrap_or(f64::NAN);
        rows.push(vec![
            n.to_string(),
            r.xi_n.decimal.clone(),
            r.d_n.decimal.clone(),
            r.sigma_2n_minus_1.decimal.clone(),
            r.aubin_a_n.decimal.clone(),
            r.sharp_c_n.decimal.clone(),
            num(res("a_n/xi_n - 1")),
            num(res("(c_n/a_n) / ((1+1/n)/2)^n - 1")),
            c.volume.clone(),
            c.bound.clone(),
            c.holds.to_string(),
        ]);
        table.push(json!({"constants": r, "counterexample": c}));
    }
    let results = json!({
        "significant_digits": sig,
        "rows": table,
        "smallest_counterexample_n": smallest_counterexample_n(),
    });
    Ok(Outcome::table(
        vec![
            "n",
            "xi_n",
            "d_n",
            "sigma_2n_minus_1",
            "aubin_a_n",
            "sharp_c_n",
            "res_a_xi",
            "res_c_ratio",
            "volume",
            "bound",
            "holds",
        ],
        rows,
        results,
    ))
}

/// Returns the outcome and whether every selected criterion passed.
pub fn reproduce(p: &Params) -> Res<(Outcome, bool)> {
    let ids = p.only.clone().unwrap_or_else(|| (1..=acceptance::NAMES.len()).collect());
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > acceptance::NAMES.len()) {
        return Err(CliError::Validation(format!("no criterion {bad}")));
    }
    let results: Vec<_> = ids.iter().map(|&i| acceptance::run(i)).collect();
    for r in &results {
        eprintln!("{}", r.line());
    }
    let all = results.iter().all(|r| r.passed);
    let rows = results
        .iter()
        .map(|r| {
            vec![
                r.id.to_string(),
                r.name.clone(),
                if r.passed { "PASS" } else { "FAIL" }.to_string(),
                format!("\"{}\"", r.detail.replace('"', "'")),
            ]
        })
        .collect();
    let json_rows = results
        .iter()
        .map(|r| json!({"id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail}))
        .collect::<Vec<_>>();
    let passed = results.iter().filter(|r| r.passed).count();
    let mut o = Outcome::table(
        vec!["id", "name", "status", "detail"],
        rows,
        json!({"criteria": json_rows, "passed": passed, "total": results.len()}),
    );
    o.default_format = Format::Table;
    Ok((o, all))
}
