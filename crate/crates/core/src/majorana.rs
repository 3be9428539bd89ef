//! Two-star (Majorana) representation of spin-1 pure states.
//!
//! A state with stars `m`, `n` is the symmetrised product
//! `(|+m +n> + |+n +m>) / sqrt(3 + m.n)` mapped onto `(m = +1, 0, -1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kcbs::{cartesian_ket, dot3, zero_eigenstate, Direction};
use crate::operator::{fix_global_phase, StateVector, C0};

/// Pairs closer than this to antipodal use the exact `|0_m>` state.
pub const ANTIPODAL_TOL: f64 = 1e-12;
/// Relative size below which a Majorana polynomial coefficient counts as zero.
pub const ROOT_UNDERFLOW: f64 = 1e-12;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// A spin-1/2 state `(up, down)` in the `sigma_z` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    pub up: Complex64,
    pub down: Complex64,
}

impl Spinor {
    pub fn new(up: Complex64, down: Complex64) -> Self {
        Spinor { up, down }
    }

    /// `|+k> = (cos(t/2), e^{ip} sin(t/2))`.
    pub fn along(k: &Direction) -> Self {
        let (s, c) = (0.5 * k.theta()).sin_cos();
        Spinor {
            up: Complex64::new(c, 0.0),
            down: Complex64::from_polar(s, k.phi()),
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Spinor) -> Complex64 {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    pub fn scale(&self, z: Complex64) -> Spinor {
        Spinor {
            up: self.up * z,
            down: self.down * z,
        }
    }

    /// Bloch vector of the (not necessarily normalized) spinor.
    fn bloch(&self) -> Result<[f64; 3]> {
        let n = self.up.norm_sqr() + self.down.norm_sqr();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::numerical("zero spinor"));
        }
        let x = self.up.conj() * self.down;
        Ok([
            2.0 * x.re / n,
            2.0 * x.im / n,
            (self.up.norm_sqr() - self.down.norm_sqr()) / n,
        ])
    }
}

/// Unordered pair of Majorana stars.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StarPair {
    pub m: Direction,
    pub n: Direction,
}

impl PartialEq for StarPair {
    fn eq(&self, other: &Self) -> bool {
        (self.m == other.m && self.n == other.n) || (self.m == other.n && self.n == other.m)
    }
}

fn key(d: &Direction) -> (f64, f64) {
    (d.theta(), d.phi())
}

impl StarPair {
    pub fn new(m: Direction, n: Direction) -> Self {
        StarPair { m, n }
    }

    /// Same pair with `m` the star of smaller `(theta, phi)`.
    pub fn canonical(&self) -> StarPair {
        if key(&self.n) < key(&self.m) {
            StarPair { m: self.n, n: self.m }
        } else {
            *self
        }
    }

    pub fn cos_angle(&self) -> f64 {
        self.m.dot(&self.n)
    }

    pub fn is_antipodal(&self) -> bool {
        self.cos_angle() <= -1.0 + ANTIPODAL_TOL
    }

    /// Largest star displacement (chord length) under the better matching.
    pub fn distance(&self, other: &StarPair) -> f64 {
        let c = |a: &Direction, b: &Direction| {
            let (u, v) = (a.vector(), b.vector());
            ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2)).sqrt()
        };
        let straight = c(&self.m, &other.m).max(c(&self.n, &other.n));
        let crossed = c(&self.m, &other.n).max(c(&self.n, &other.m));
        straight.min(crossed)
    }
}

/// Normalized spin-1 state of a star pair, global phase fixed.
pub fn state_from_stars(p: &StarPair) -> StateVector {
    if p.is_antipodal() {
        return zero_eigenstate(&p.m);
    }
    let (a, b) = (Spinor::along(&p.m), Spinor::along(&p.n));
    let v = StateVector::from_vec(vec![
        a.up * b.up * 2.0,
        (a.up * b.down + a.down * b.up) * SQRT2,
        a.down * b.down * 2.0,
    ]);
    let norm = (3.0 + p.cos_angle()).sqrt();
    fix_global_phase(&v.unscale(norm))
}

/// Star pair of a spin-1 state, the inverse of [`state_from_stars`] up to phase.
pub fn stars_from_state(psi: &StateVector) -> Result<StarPair> {
    if psi.len() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            found: psi.len(),
        });
    }
    let scale = psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::validation("state vector is zero or not finite"));
    }
    let small = ROOT_UNDERFLOW * scale;
    let zero_if_small = |z: Complex64| if z.norm() < small { C0 } else { z };
    // c+ z^2 - sqrt2 c0 z + c- = 0 in the stereographic variable z = e^{ip} tan(t/2)
    let qa = zero_if_small(psi[0]);
    let qb = zero_if_small(-psi[1] * SQRT2);
    let qc = zero_if_small(psi[2]);

    // Each root r is carried as a spinor (1, r), with infinite roots as (0, 1).
    let (r1, r2) = if qa == C0 {
        if qb == C0 {
            (Spinor::new(C0, Complex64::ONE), Spinor::new(C0, Complex64::ONE))
        } else {
            (Spinor::new(C0, Complex64::ONE), Spinor::new(-qb, qc))
        }
    } else {
        let disc = (qb * qb - qa * qc * 4.0).sqrt();
        let s = if (qb.conj() * disc).re >= 0.0 { disc } else { -disc };
        let q = -(qb + s) * 0.5;
        if q == C0 {
            // b = 0 and c = 0: double root at zero
            (Spinor::new(Complex64::ONE, C0), Spinor::new(Complex64::ONE, C0))
        } else {
            (Spinor::new(qa, q), Spinor::new(q, qc))
        }
    };
    let m = Direction::from_vector(r1.bloch()?)?;
    let n = Direction::from_vector(r2.bloch()?)?;
    Ok(StarPair { m, n }.canonical())
}

/// Orthonormal frame adapted to `k`: `k`, the polar and the azimuthal unit vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triad {
    pub k: Direction,
    pub k1: Direction,
    pub k2: Direction,
}

pub fn triad(k: &Direction) -> Triad {
    let (st, ct) = k.theta().sin_cos();
    let (sp, cp) = k.phi().sin_cos();
    Triad {
        k: *k,
        k1: Direction::from_vector([ct * cp, ct * sp, -st]).expect("unit vector"),
        k2: Direction::from_vector([-sp, cp, 0.0]).expect("unit vector"),
    }
}

/// The states `|K>, |K1>, |K2>` against which the triad coefficients are
/// inner products: `-|k>`, `|k1>` and `-i|k2>` in the Cartesian frame.
pub fn triad_basis(t: &Triad) -> [StateVector; 3] {
    let minus_i = Complex64::new(0.0, -1.0);
    [
        -cartesian_ket(t.k.vector()),
        cartesian_ket(t.k1.vector()),
        cartesian_ket(t.k2.vector()) * minus_i,
    ]
}

/// `chi = K |K> + K1 |K1> + K2 |K2>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriadCoefficients {
    #[serde(rename = "K")]
    pub k: Complex64,
    #[serde(rename = "K1")]
    pub k1: Complex64,
    #[serde(rename = "K2")]
    pub k2: Complex64,
    pub triad: Triad,
}

impl TriadCoefficients {
    pub fn norm_sqr(&self) -> f64 {
        self.k.norm_sqr() + self.k1.norm_sqr() + self.k2.norm_sqr()
    }
}

/// Closed-form triad coefficients of the pair `p` relative to `k`.
///
/// Antipodal pairs are evaluated by direct projection of `|0_m>`.
pub fn triad_coefficients(p: &StarPair, k: &Direction) -> TriadCoefficients {
    let t = triad(k);
    if p.is_antipodal() {
        let chi = state_from_stars(p);
        let [b0, b1, b2] = triad_basis(&t);
        return TriadCoefficients {
            k: b0.dotc(&chi),
            k1: b1.dotc(&chi),
            k2: b2.dotc(&chi),
            triad: t,
        };
    }
    let (sm, cm) = (0.5 * p.m.theta()).sin_cos();
    let (sn, cn) = (0.5 * p.n.theta()).sin_cos();
    let (stk, ctk) = k.theta().sin_cos();
    let (pm, pn, pk) = (p.m.phi(), p.n.phi(), k.phi());
    let both = Complex64::from_polar(sm * sn, pm + pn - 2.0 * pk);
    let x = both.scale(-1.0) + cm * cn;
    let y = Complex64::from_polar(sm * cn, pm - pk) + Complex64::from_polar(cm * sn, pn - pk);
    let norm = ((3.0 + p.cos_angle()) / 2.0).sqrt();
    TriadCoefficients {
        k: (x * stk - y * ctk) / norm,
        k1: -(x * ctk + y * stk) / norm,
        k2: (both + cm * cn) / norm,
        triad: t,
    }
}

/// `<a|b><b|c><c|d><d|a>`.
pub fn bargmann(a: &Spinor, b: &Spinor, c: &Spinor, d: &Spinor) -> Complex64 {
    a.inner(b) * b.inner(c) * c.inner(d) * d.inner(a)
}

/// `|<0_k|chi>|^2` from star angles and two Bargmann invariants.
pub fn overlap_via_bargmann(p: &StarPair, k: &Direction) -> f64 {
    let cos_half_sq = |u: &Direction| 0.5 * (1.0 + k.dot(u));
    let sin_half_sq = |u: &Direction| 0.5 * (1.0 - k.dot(u));
    let angles = cos_half_sq(&p.m) * sin_half_sq(&p.n) + cos_half_sq(&p.n) * sin_half_sq(&p.m);
    let (pk, mk) = (Spinor::along(k), Spinor::along(&k.antipode()));
    let (sm, sn) = (Spinor::along(&p.m), Spinor::along(&p.n));
    let geometric = bargmann(&pk, &sm, &mk, &sn) + bargmann(&pk, &sn, &mk, &sm);
    2.0 / (3.0 + p.cos_angle()) * (angles + geometric.re)
}

/// `p_k = |<0_k|psi>|^2` for a normalized state.
pub fn zero_population(psi: &StateVector, k: &Direction) -> f64 {
    zero_eigenstate(k).dotc(psi).norm_sqr()
}

/// `(Delta A_k)^2 = 4 p (1 - p)` with `p = |K|^2`.
pub fn variance_a(p: &StarPair, k: &Direction) -> f64 {
    let q = triad_coefficients(p, k).k.norm_sqr();
    4.0 * q * (1.0 - q)
}

pub fn variance_a_state(psi: &StateVector, k: &Direction) -> f64 {
    let q = zero_population(psi, k);
    4.0 * q * (1.0 - q)
}

/// `|K|^2 - 1/2`; zero on the surface of maximal uncertainty of `A_k`.
pub fn max_uncertainty_residual(p: &StarPair, k: &Direction) -> f64 {
    triad_coefficients(p, k).k.norm_sqr() - 0.5
}

pub fn max_uncertainty_residual_state(psi: &StateVector, k: &Direction) -> f64 {
    zero_population(psi, k) - 0.5
}

/// Angle between two directions, stable near 0 and pi.
pub fn angle_between(a: &Direction, b: &Direction) -> f64 {
    let (u, v) = (a.vector(), b.vector());
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    dot3(&cross, &cross).sqrt().atan2(dot3(&u, &v))
}
