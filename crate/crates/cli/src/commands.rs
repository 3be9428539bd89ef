use anyhow::{Context as _, Result};
use clap::{ArgGroup, Args};
use contextium::kcbs::{kcbs_cos_gamma, kcbs_pentagon, kcbs_theta, mie_closed_form_a, plus_z};
use contextium::majorana::{
    overlap_via_bargmann, stars_from_state, state_from_stars, triad_coefficients, zero_population, StarPair,
    TriadCoefficients,
};
use contextium::measures::{
    global_bounds, kappa, mie, mie_via_commutators, opnorm_bound, spectral_bound, BoundsRecord,
};
use contextium::scenario::Scenario;
use contextium::uncertainty::{
    extremal_state_report, optimize_sum, smax_surface_sample, ExtremalStateReport, OptimizationProblem,
    OptimizerConfig,
};
use contextium::{DensityMatrix, Direction, StateVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::output::{emit, Cell, Table};
use crate::{Cli, Command};

/// Malformed command-line values that clap itself cannot catch.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn load(name: &str) -> Result<Scenario> {
    Scenario::load(name).with_context(|| format!("loading scenario '{name}'"))
}

#[derive(Debug, Args)]
pub struct MieArgs {
    /// Built-in scenario name or path to a scenario file.
    #[arg(long, default_value = "kcbs")]
    pub scenario: String,
    /// Context name; every context when omitted.
    #[arg(long)]
    pub context: Option<String>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value = "kcbs")]
    pub scenario: String,
    /// Name of a state in the scenario.
    #[arg(long)]
    pub state: String,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Number of KCBS contexts, 1 to 5.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    /// KCBS context indices (1-based), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub context: Vec<usize>,
    /// Grid points per angle.
    #[arg(long, default_value_t = 50)]
    pub resolution: usize,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["stars", "amplitudes"])))]
pub struct MajoranaArgs {
    /// Star pair as "theta_m,phi_m;theta_n,phi_n".
    #[arg(long, allow_hyphen_values = true)]
    pub stars: Option<String>,
    /// Amplitudes in the (+1, 0, -1) basis as "re,im;re,im;re,im".
    #[arg(long, allow_hyphen_values = true)]
    pub amplitudes: Option<String>,
    /// Direction "theta,phi" for the triad decomposition.
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Option<String>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub scenario: String,
}

pub fn run(cli: &Cli) -> Result<()> {
    let fmt = cli.global.format;
    match &cli.command {
        Command::Mie(a) => {
            let rows = mie_rows(a)?;
            emit(fmt, &rows, || {
                let mut t = Table::new(&["context", "E", "one_minus_E", "E_commutator", "delta"]);
                for r in &rows {
                    t.push(vec![
                        r.context.as_str().into(),
                        r.e.into(),
                        r.one_minus_e.into(),
                        r.e_commutator.into(),
                        r.delta.into(),
                    ]);
                }
                t
            })
        }
        Command::Bounds(a) => {
            let rep = bounds(a)?;
            emit(fmt, &rep, || bounds_table(&rep))
        }
        Command::KcbsReport => {
            let rep = kcbs_report(cli.global.seed)?;
            emit(fmt, &rep, || kcbs_table(&rep))
        }
        Command::Optimize(a) => {
            let problem = OptimizationProblem::kcbs(a.n)?;
            let cfg = OptimizerConfig {
                starts: a.starts,
                max_iters: a.max_iters,
                tol: a.tol,
                seed: cli.global.seed,
            };
            let r = optimize_sum(&problem, &cfg)?;
            emit(fmt, &r, || {
                let s = r.best_stars;
                let mut pairs: Vec<(&str, Cell)> = vec![
                    ("n", r.n.into()),
                    ("best_value", r.best_value.into()),
                    ("theta_m", s.m.theta().into()),
                    ("phi_m", s.m.phi().into()),
                    ("theta_n", s.n.theta().into()),
                    ("phi_n", s.n.phi().into()),
                    ("zero_axis_theta", r.zero_axis.theta().into()),
                    ("zero_axis_phi", r.zero_axis.phi().into()),
                    ("zero_axis_fidelity", r.zero_axis_fidelity.into()),
                    ("starts_used", r.starts_used.into()),
                    ("iterations", r.iterations.into()),
                    ("converged", r.converged.into()),
                ];
                let labels: Vec<String> = (1..=r.n)
                    .flat_map(|a| [format!("product_{a}"), format!("residual_{a}")])
                    .collect();
                for (a, label) in labels.chunks(2).enumerate() {
                    pairs.push((label[0].as_str(), r.per_context_products[a].into()));
                    pairs.push((label[1].as_str(), r.residuals[a].into()));
                }
                Table::key_values(pairs)
            })
        }
        Command::Surface(a) => {
            let points = smax_surface_sample(&a.context, a.resolution)?;
            emit(fmt, &points, || {
                let mut headers: Vec<String> = ["theta_m", "phi_m", "theta_n", "phi_n"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect();
                headers.extend(a.context.iter().map(|c| format!("residual_{c}")));
                let mut t = Table::with_headers(headers);
                for p in &points {
                    let mut row: Vec<Cell> = vec![
                        p.stars.m.theta().into(),
                        p.stars.m.phi().into(),
                        p.stars.n.theta().into(),
                        p.stars.n.phi().into(),
                    ];
                    row.extend(p.residuals.iter().map(|&r| Cell::from(r)));
                    t.push(row);
                }
                t
            })
        }
        Command::Majorana(a) => {
            let rep = majorana(a)?;
            emit(fmt, &rep, || majorana_table(&rep))
        }
        Command::Validate(a) => {
            let s = load(&a.scenario)?;
            emit(fmt, s.document(), || {
                let names = |it: Vec<&str>| it.join(",");
                Table::key_values(vec![
                    ("source", s.source().to_string().into()),
                    ("dim", s.dim().into()),
                    (
                        "observables",
                        names(s.observables().keys().map(String::as_str).collect()).into(),
                    ),
                    (
                        "contexts",
                        names(s.contexts().iter().map(|c| c.spec.name.as_str()).collect()).into(),
                    ),
                    (
                        "states",
                        names(s.states().keys().map(String::as_str).collect()).into(),
                    ),
                ])
            })
        }
    }
}

#[derive(Debug, Serialize)]
struct MieRow {
    context: String,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "one_minus_E")]
    one_minus_e: f64,
    /// Same quantity from the commutator form.
    #[serde(rename = "E_commutator")]
    e_commutator: f64,
    delta: f64,
}

fn mie_rows(a: &MieArgs) -> Result<Vec<MieRow>> {
    let s = load(&a.scenario)?;
    let selected: Vec<_> = match &a.context {
        Some(name) => {
            s.context(name)?;
            s.contexts().iter().filter(|c| &c.spec.name == name).collect()
        }
        None => s.contexts().iter().collect(),
    };
    selected
        .into_iter()
        .map(|c| {
            let e = mie(&c.context)?;
            let ec = mie_via_commutators(&c.context)?;
            Ok(MieRow {
                context: c.spec.name.clone(),
                e: e.value,
                one_minus_e: 1.0 - e.value,
                e_commutator: ec.value,
                delta: (e.raw - ec.raw).abs(),
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct NamedRecord {
    name: String,
    #[serde(flatten)]
    record: BoundsRecord,
}

#[derive(Debug, Serialize)]
struct BoundsOutput {
    scenario: String,
    state: String,
    beta: f64,
    contexts: Vec<NamedRecord>,
    totals: BoundsRecord,
}

fn bounds(a: &BoundsArgs) -> Result<BoundsOutput> {
    let s = load(&a.scenario)?;
    let rho = s.state(&a.state)?;
    let rep = global_bounds(&s.family()?, rho)?;
    Ok(BoundsOutput {
        scenario: s.source().to_string(),
        state: a.state.clone(),
        beta: rep.beta,
        contexts: s
            .contexts()
            .iter()
            .zip(rep.contexts)
            .map(|(c, record)| NamedRecord {
                name: c.spec.name.clone(),
                record,
            })
            .collect(),
        totals: rep.totals,
    })
}

fn bounds_table(rep: &BoundsOutput) -> Table {
    let mut t = Table::new(&[
        "context",
        "E",
        "one_minus_E",
        "kappa",
        "D",
        "spectral",
        "purity",
        "opnorm",
        "hybrid",
        "dA_dC",
        "D_over_2",
    ]);
    let row = |name: &str, r: &BoundsRecord, with_e: bool| -> Vec<Cell> {
        let e: Cell = if with_e { r.e.into() } else { "".into() };
        let ome: Cell = if with_e { r.one_minus_e.into() } else { "".into() };
        let k: Cell = if with_e { r.kappa.into() } else { "".into() };
        vec![
            name.into(),
            e,
            ome,
            k,
            r.d_value.into(),
            r.spectral_bound.into(),
            r.purity_bound.into(),
            r.opnorm_bound.into(),
            r.hybrid_bound.into(),
            r.variance_product.into(),
            r.robertson_lhs.into(),
        ]
    };
    for c in &rep.contexts {
        t.push(row(&c.name, &c.record, true));
    }
    t.push(row("total", &rep.totals, false));
    t
}

#[derive(Debug, Serialize)]
struct KcbsReport {
    theta_kcbs: f64,
    theta_kcbs_degrees: f64,
    cos_gamma: f64,
    mie_per_context: Vec<f64>,
    mie_closed_form: f64,
    kappa: f64,
    spectral_bound: f64,
    opnorm_bound: f64,
    global_spectral_bound: f64,
    global_opnorm_bound: f64,
    /// Summed hybrid bound for a pure state (purity 1).
    global_hybrid_bound_pure: f64,
    per_context_product_0z: f64,
    extremal: ExtremalStateReport,
}

fn kcbs_report(seed: u64) -> Result<KcbsReport> {
    let pent = kcbs_pentagon();
    let fam = pent.contexts();
    let g1 = pent.context(1);
    let mie_per_context = fam
        .contexts()
        .iter()
        .map(|c| mie(c).map(|m| m.value))
        .collect::<Result<Vec<_>, _>>()?;
    let spectral = spectral_bound(g1)?;
    let opn = opnorm_bound(g1);
    let pure = global_bounds(fam, &DensityMatrix::from_pure(&plus_z())?)?;
    let extremal = extremal_state_report(20, seed)?;
    Ok(KcbsReport {
        theta_kcbs: kcbs_theta(),
        theta_kcbs_degrees: kcbs_theta().to_degrees(),
        cos_gamma: kcbs_cos_gamma(),
        mie_closed_form: mie_closed_form_a(kcbs_cos_gamma().acos()),
        mie_per_context,
        kappa: kappa(g1),
        spectral_bound: spectral,
        opnorm_bound: opn,
        global_spectral_bound: fam
            .contexts()
            .iter()
            .map(spectral_bound)
            .sum::<Result<f64, _>>()?,
        global_opnorm_bound: fam.contexts().iter().map(opnorm_bound).sum(),
        global_hybrid_bound_pure: pure.totals.hybrid_bound,
        per_context_product_0z: extremal.states[0].products_sum / 5.0,
        extremal,
    })
}

fn kcbs_table(r: &KcbsReport) -> Table {
    let mut pairs: Vec<(&str, Cell)> = vec![
        ("theta_kcbs", r.theta_kcbs.into()),
        ("theta_kcbs_degrees", r.theta_kcbs_degrees.into()),
        ("cos_gamma", r.cos_gamma.into()),
        ("E", r.mie_per_context[0].into()),
        ("E_closed_form", r.mie_closed_form.into()),
        (
            "E_spread",
            (r.mie_per_context.iter().cloned().fold(f64::MIN, f64::max)
                - r.mie_per_context.iter().cloned().fold(f64::MAX, f64::min))
            .into(),
        ),
        ("kappa", r.kappa.into()),
        ("spectral_bound", r.spectral_bound.into()),
        ("opnorm_bound", r.opnorm_bound.into()),
        ("global_spectral_bound", r.global_spectral_bound.into()),
        ("global_opnorm_bound", r.global_opnorm_bound.into()),
        ("global_hybrid_bound_pure", r.global_hybrid_bound_pure.into()),
        ("per_context_product_0z", r.per_context_product_0z.into()),
        ("max_D_random_0u", r.extremal.max_random_axis_d.into()),
    ];
    let labels: Vec<(String, String, String)> = r
        .extremal
        .states
        .iter()
        .map(|s| {
            (
                format!("D_{}", s.name),
                format!("products_{}", s.name),
                format!("robertson_gap_{}", s.name),
            )
        })
        .collect();
    for (s, (d, p, g)) in r.extremal.states.iter().zip(&labels) {
        pairs.push((d.as_str(), s.d_total.into()));
        pairs.push((p.as_str(), s.products_sum.into()));
        pairs.push((g.as_str(), s.robertson_gap.into()));
    }
    Table::key_values(pairs)
}

fn parse_floats(s: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("{what}: cannot parse '{s}' as numbers")))?;
    if v.len() != expected {
        return Err(usage(format!(
            "{what}: expected {expected} numbers, got {}",
            v.len()
        )));
    }
    Ok(v)
}

fn parse_direction(s: &str) -> Result<Direction> {
    let v = parse_floats(s, 2, "direction")?;
    Direction::new(v[0], v[1]).map_err(|e| usage(format!("direction '{s}': {e}")))
}

fn parse_stars(s: &str) -> Result<StarPair> {
    let parts: Vec<&str> = s.split(';').collect();
    if parts.len() != 2 {
        return Err(usage(format!(
            "stars: expected \"theta,phi;theta,phi\", got '{s}'"
        )));
    }
    Ok(StarPair::new(
        parse_direction(parts[0])?,
        parse_direction(parts[1])?,
    ))
}

fn parse_amplitudes(s: &str) -> Result<StateVector> {
    let parts: Vec<&str> = s.split(';').collect();
    if parts.len() != 3 {
        return Err(usage(format!(
            "amplitudes: expected three \"re,im\" entries, got '{s}'"
        )));
    }
    let mut v = Vec::with_capacity(3);
    for p in parts {
        let z = parse_floats(p, 2, "amplitude")?;
        v.push(Complex64::new(z[0], z[1]));
    }
    let psi = StateVector::from_vec(v);
    let n = psi.norm();
    if !(n.is_finite() && n > 0.0) {
        return Err(contextium::Error::Validation("amplitudes must not all vanish".into()).into());
    }
    Ok(psi.unscale(n))
}

#[derive(Debug, Serialize)]
struct TriadReport {
    coefficients: TriadCoefficients,
    zero_population: f64,
    zero_population_bargmann: f64,
    variance: f64,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct MajoranaReport {
    stars: StarPair,
    amplitudes: Vec<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    triad: Option<TriadReport>,
}

fn majorana(a: &MajoranaArgs) -> Result<MajoranaReport> {
    let (stars, state) = match (&a.stars, &a.amplitudes) {
        (Some(s), None) => {
            let p = parse_stars(s)?;
            (p, state_from_stars(&p))
        }
        (None, Some(s)) => {
            let psi = parse_amplitudes(s)?;
            let p = stars_from_state(&psi)?;
            (p, contextium::operator::fix_global_phase(&psi))
        }
        _ => return Err(usage("exactly one of --stars or --amplitudes is required")),
    };
    let triad = match &a.direction {
        None => None,
        Some(d) => {
            let k = parse_direction(d)?;
            let coefficients = triad_coefficients(&stars, &k);
            let p = zero_population(&state, &k);
            Some(TriadReport {
                coefficients,
                zero_population: p,
                zero_population_bargmann: overlap_via_bargmann(&stars, &k),
                variance: 4.0 * p * (1.0 - p),
                residual: p - 0.5,
            })
        }
    };
    Ok(MajoranaReport {
        stars,
        amplitudes: state.iter().copied().collect(),
        triad,
    })
}

fn majorana_table(r: &MajoranaReport) -> Table {
    let amp = |z: &Complex64| {
        format!(
            "{} {} {}i",
            crate::output::sig6(z.re),
            if z.im < 0.0 { "-" } else { "+" },
            crate::output::sig6(z.im.abs())
        )
    };
    let mut pairs: Vec<(&str, Cell)> = vec![
        ("theta_m", r.stars.m.theta().into()),
        ("phi_m", r.stars.m.phi().into()),
        ("theta_n", r.stars.n.theta().into()),
        ("phi_n", r.stars.n.phi().into()),
        ("amplitude_plus1", amp(&r.amplitudes[0]).into()),
        ("amplitude_0", amp(&r.amplitudes[1]).into()),
        ("amplitude_minus1", amp(&r.amplitudes[2]).into()),
    ];
    if let Some(t) = &r.triad {
        pairs.push(("K", amp(&t.coefficients.k).into()));
        pairs.push(("K1", amp(&t.coefficients.k1).into()));
        pairs.push(("K2", amp(&t.coefficients.k2).into()));
        pairs.push(("zero_population", t.zero_population.into()));
        pairs.push(("zero_population_bargmann", t.zero_population_bargmann.into()));
        pairs.push(("variance", t.variance.into()));
        pairs.push(("residual", t.residual.into()));
    }
    Table::key_values(pairs)
}
