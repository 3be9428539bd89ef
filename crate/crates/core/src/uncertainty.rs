//! Maximisation of `sum_a dA_(a-1) dA_(a+1)` over pure spin-1 states for the
//! first `n` KCBS contexts, parameterised by Majorana star pairs.

use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kcbs::{kcbs_pentagon, minus_z, plus_z, zero_eigenstate, Direction, KcbsPentagon};
use crate::majorana::{state_from_stars, StarPair};
use crate::measures::{d_single, ContextFamily};
use crate::operator::{random, variance, DensityMatrix, StateVector};

/// Tolerance on `|K|^2 - 1/2` for a point to count as maximally uncertain.
pub const SURFACE_TOL: f64 = 1e-3;

/// Objective over the first `n` KCBS contexts `G_1..G_n`.
#[derive(Debug, Clone)]
pub struct OptimizationProblem {
    n: usize,
    pentagon: KcbsPentagon,
    contexts: ContextFamily,
    /// `(|0_(a-1)>, |0_(a+1)>)` per context.
    outer: Vec<(StateVector, StateVector)>,
    central: Vec<StateVector>,
}

impl OptimizationProblem {
    pub fn kcbs(n: usize) -> Result<Self> {
        if !(1..=5).contains(&n) {
            return Err(Error::validation(format!(
                "number of contexts must be in 1..=5, got {n}"
            )));
        }
        let pentagon = kcbs_pentagon();
        let contexts = ContextFamily::new(pentagon.contexts().contexts()[..n].to_vec())?;
        let outer = (1..=n as isize)
            .map(|a| {
                (
                    zero_eigenstate(pentagon.direction(a - 1)),
                    zero_eigenstate(pentagon.direction(a + 1)),
                )
            })
            .collect();
        let central = (1..=n as isize)
            .map(|a| zero_eigenstate(pentagon.direction(a)))
            .collect();
        Ok(OptimizationProblem {
            n,
            pentagon,
            contexts,
            outer,
            central,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contexts(&self) -> &ContextFamily {
        &self.contexts
    }

    pub fn pentagon(&self) -> &KcbsPentagon {
        &self.pentagon
    }

    /// `dA dC` per context for a normalized pure state.
    pub fn per_context_products(&self, psi: &StateVector) -> Vec<f64> {
        let var = |z: &StateVector| {
            let p = z.dotc(psi).norm_sqr();
            4.0 * p * (1.0 - p)
        };
        self.outer
            .iter()
            .map(|(a, c)| (var(a) * var(c)).max(0.0).sqrt())
            .collect()
    }

    /// `<0_(k_a)| chi |0_(k_a)> - 1/2` for each central direction.
    pub fn residuals(&self, psi: &StateVector) -> Vec<f64> {
        self.central
            .iter()
            .map(|z| z.dotc(psi).norm_sqr() - 0.5)
            .collect()
    }

    pub fn objective(&self, psi: &StateVector) -> f64 {
        self.per_context_products(psi).iter().sum()
    }

    pub fn objective_stars(&self, p: &StarPair) -> f64 {
        self.objective(&state_from_stars(p))
    }

    fn objective_angles(&self, x: &[f64; 4]) -> f64 {
        self.objective_stars(&stars_from_angles(x))
    }
}

fn stars_from_angles(x: &[f64; 4]) -> StarPair {
    StarPair::new(Direction::wrapped(x[0], x[1]), Direction::wrapped(x[2], x[3]))
}

/// `sum dA dC` over a family, with variances from the density-matrix path.
pub fn sum_uncertainty_products(family: &ContextFamily, psi: &StateVector) -> Result<f64> {
    let rho = DensityMatrix::from_pure(psi)?;
    let mut total = 0.0;
    for ctx in family.contexts() {
        total += (variance(ctx.a(), &rho)? * variance(ctx.c(), &rho)?).sqrt();
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            starts: 64,
            max_iters: 500,
            tol: 1e-6,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub n: usize,
    pub best_value: f64,
    pub best_stars: StarPair,
    pub best_state: Vec<Complex64>,
    pub per_context_products: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Axis `u` of the `|0_u>` state closest to the optimum and that fidelity.
    pub zero_axis: Direction,
    pub zero_axis_fidelity: f64,
    pub starts_used: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl OptimizationResult {
    pub fn state(&self) -> StateVector {
        StateVector::from_vec(self.best_state.clone())
    }
}

struct LocalRun {
    x: [f64; 4],
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Nelder-Mead ascent on the four star angles.
fn nelder_mead(problem: &OptimizationProblem, x0: [f64; 4], step: f64, cfg: &OptimizerConfig) -> LocalRun {
    // Minimise f = -objective.
    let f = |x: &[f64; 4]| -problem.objective_angles(x);
    let mut simplex: Vec<([f64; 4], f64)> = Vec::with_capacity(5);
    simplex.push((x0, f(&x0)));
    for i in 0..4 {
        let mut x = x0;
        x[i] += step;
        simplex.push((x, f(&x)));
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[4].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| (0..4).map(|i| (x[i] - simplex[0].0[i]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter <= cfg.tol && spread <= cfg.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = [0.0; 4];
        for (x, _) in &simplex[..4] {
            for i in 0..4 {
                centroid[i] += x[i] / 4.0;
            }
        }
        let worst = simplex[4];
        let along =
            |t: f64| -> [f64; 4] { std::array::from_fn(|i| centroid[i] + t * (worst.0[i] - centroid[i])) };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            simplex[4] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[3].1 {
            simplex[4] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let x = along(-0.5);
            (x, f(&x))
        } else {
            let x = along(0.5);
            (x, f(&x))
        };
        if fc < worst.1.min(fr) {
            simplex[4] = (xc, fc);
            continue;
        }
        let best = simplex[0].0;
        for (x, fx) in simplex.iter_mut().skip(1) {
            *x = std::array::from_fn(|i| best[i] + 0.5 * (x[i] - best[i]));
            *fx = f(x);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    LocalRun {
        x: simplex[0].0,
        value: -simplex[0].1,
        iterations,
        converged,
    }
}

fn start_point(seed: u64, index: usize) -> [f64; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut draw = || {
        let t = rng.random::<f64>().mul_add(2.0, -1.0).acos();
        let p = rng.random::<f64>() * std::f64::consts::TAU;
        (t, p)
    };
    let (a, b) = draw();
    let (c, d) = draw();
    [a, b, c, d]
}

fn tiebreak_key(p: &StarPair) -> (f64, f64) {
    let c = p.canonical();
    (c.m.theta(), c.m.phi())
}

/// Multi-start Nelder-Mead; starts run in parallel, merged in start order.
pub fn optimize_sum(problem: &OptimizationProblem, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    if cfg.starts == 0 {
        return Err(Error::validation("at least one start is required"));
    }
    if !(cfg.tol.is_finite() && cfg.tol > 0.0) {
        return Err(Error::validation("optimizer tolerance must be positive"));
    }
    let runs: Vec<LocalRun> = (0..cfg.starts)
        .into_par_iter()
        .map(|i| {
            let first = nelder_mead(problem, start_point(cfg.seed, i), 0.4, cfg);
            // One restart from the local optimum to escape a collapsed simplex.
            let second = nelder_mead(problem, first.x, 0.05, cfg);
            LocalRun {
                iterations: first.iterations + second.iterations,
                converged: second.converged,
                ..if second.value >= first.value {
                    second
                } else {
                    first
                }
            }
        })
        .collect();

    let iterations = runs.iter().map(|r| r.iterations).sum();
    let converged = runs.iter().any(|r| r.converged);
    let top = runs.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::numerical("objective was not finite at any start"));
    }
    let best = runs
        .iter()
        .filter(|r| r.value >= top - cfg.tol)
        .map(|r| (stars_from_angles(&r.x).canonical(), r.value))
        .min_by(|a, b| {
            let (ka, kb) = (tiebreak_key(&a.0), tiebreak_key(&b.0));
            ka.partial_cmp(&kb).expect("finite angles")
        })
        .expect("at least one run");

    let (stars, _) = best;
    let state = state_from_stars(&stars);
    let per_context_products = problem.per_context_products(&state);
    let (zero_axis, zero_axis_fidelity) = nearest_zero_axis(&state)?;
    Ok(OptimizationResult {
        n: problem.n,
        best_value: per_context_products.iter().sum(),
        best_stars: stars,
        residuals: problem.residuals(&state),
        best_state: state.iter().copied().collect(),
        per_context_products,
        zero_axis,
        zero_axis_fidelity,
        starts_used: cfg.starts,
        iterations,
        converged,
    })
}

/// The axis `u` maximising `|<0_u|psi>|^2`, and that maximum.
pub fn nearest_zero_axis(psi: &StateVector) -> Result<(Direction, f64)> {
    if psi.len() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            found: psi.len(),
        });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::i();
    let w = [(psi[2] - psi[0]) * s, -(psi[2] + psi[0]) * i * s, psi[1]];
    let g = Matrix3::from_fn(|r, c| (w[r] * w[c].conj()).re);
    let eig = SymmetricEigen::new(g);
    let (idx, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("three eigenvalues");
    let v = eig.eigenvectors.column(idx);
    let u = Direction::from_vector([v[0], v[1], v[2]])?;
    let fid = zero_eigenstate(&u).dotc(psi).norm_sqr() / psi.norm_squared();
    Ok((u, fid))
}

/// One grid point that lies on every requested maximum-uncertainty surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub stars: StarPair,
    pub residuals: Vec<f64>,
}

/// Star pairs on a `resolution^4` grid whose residuals for all listed
/// contexts (1-based) are within [`SURFACE_TOL`].
pub fn smax_surface_sample(contexts: &[usize], resolution: usize) -> Result<Vec<SurfacePoint>> {
    if resolution < 2 {
        return Err(Error::validation("resolution must be at least 2"));
    }
    if contexts.is_empty() {
        return Err(Error::validation("at least one context is required"));
    }
    if let Some(bad) = contexts.iter().find(|&&c| !(1..=5).contains(&c)) {
        return Err(Error::validation(format!("context index {bad} outside 1..=5")));
    }
    let pent = kcbs_pentagon();
    let central: Vec<StateVector> = contexts
        .iter()
        .map(|&c| zero_eigenstate(pent.direction(c as isize)))
        .collect();
    let thetas: Vec<f64> = (0..resolution)
        .map(|i| std::f64::consts::PI * i as f64 / (resolution - 1) as f64)
        .collect();
    let phis: Vec<f64> = (0..resolution)
        .map(|j| std::f64::consts::TAU * j as f64 / resolution as f64)
        .collect();
    // Each star visits the grid once; the poles carry only phi = 0.
    let mut nodes = Vec::new();
    for (i, &t) in thetas.iter().enumerate() {
        let at_pole = i == 0 || i + 1 == resolution;
        for &p in if at_pole { &phis[..1] } else { &phis[..] } {
            nodes.push(Direction::new(t, p)?);
        }
    }
    let points = (0..nodes.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            let nodes = &nodes;
            let central = &central;
            (a..nodes.len()).filter_map(move |b| {
                let stars = StarPair::new(nodes[a], nodes[b]);
                let chi = state_from_stars(&stars);
                let residuals: Vec<f64> = central.iter().map(|z| z.dotc(&chi).norm_sqr() - 0.5).collect();
                residuals
                    .iter()
                    .all(|r| r.abs() <= SURFACE_TOL)
                    .then_some(SurfacePoint { stars, residuals })
            })
        })
        .collect();
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalStateRecord {
    pub name: String,
    pub d_total: f64,
    pub products_sum: f64,
    /// `sum_a D_a / 2`.
    pub robertson_lhs: f64,
    /// `sum_a dA dC`.
    pub robertson_rhs: f64,
    pub robertson_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomAxisRecord {
    pub axis: Direction,
    pub d_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalStateReport {
    pub states: Vec<ExtremalStateRecord>,
    pub random_axes: Vec<RandomAxisRecord>,
    pub max_random_axis_d: f64,
}

fn extremal_record(name: &str, family: &ContextFamily, psi: &StateVector) -> Result<ExtremalStateRecord> {
    let rho = DensityMatrix::from_pure(psi)?;
    let mut d_total = 0.0;
    let mut rhs = 0.0;
    for ctx in family.contexts() {
        d_total += d_single(ctx, &rho)?;
        rhs += (variance(ctx.a(), &rho)? * variance(ctx.c(), &rho)?).sqrt();
    }
    Ok(ExtremalStateRecord {
        name: name.to_string(),
        d_total,
        products_sum: rhs,
        robertson_lhs: d_total / 2.0,
        robertson_rhs: rhs,
        robertson_gap: rhs - d_total / 2.0,
    })
}

/// `D` and uncertainty products over the KCBS family at `|0_z>`, `|+1_z>`,
/// `|-1_z>`, and `D` at `count` random `|0_u>` states.
pub fn extremal_state_report(count: usize, seed: u64) -> Result<ExtremalStateReport> {
    let pent = kcbs_pentagon();
    let family = pent.contexts();
    let states = vec![
        extremal_record("0z", family, &zero_eigenstate(&Direction::z()))?,
        extremal_record("+1z", family, &plus_z())?,
        extremal_record("-1z", family, &minus_z())?,
    ];
    let mut rng = random::rng(seed);
    let mut random_axes = Vec::with_capacity(count);
    for _ in 0..count {
        let axis = Direction::new(
            rng.random::<f64>().mul_add(2.0, -1.0).acos(),
            rng.random::<f64>() * std::f64::consts::TAU,
        )?;
        let rho = DensityMatrix::from_pure(&zero_eigenstate(&axis))?;
        let d_total = crate::measures::d_total(family, &rho)?;
        random_axes.push(RandomAxisRecord { axis, d_total });
    }
    let max_random_axis_d = random_axes.iter().map(|r| r.d_total).fold(0.0, f64::max);
    Ok(ExtremalStateReport {
        states,
        random_axes,
        max_random_axis_d,
    })
}
