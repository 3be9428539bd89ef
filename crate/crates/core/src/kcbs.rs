//! Spin-1 operators, the dichotomic observables `A_k = 2 S_k^2 - I` and the
//! KCBS pentagon.
//!
//! Matrices are written in the `S_z` basis ordered `(m = +1, 0, -1)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Context, ContextFamily};
use crate::operator::{fix_global_phase, CMatrix, HermitianOperator, StateVector, C0, C1};

/// A unit vector on the sphere, `(sin t cos p, sin t sin p, cos t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Angles", into = "Angles")]
pub struct Direction {
    theta: f64,
    phi: f64,
    vector: [f64; 3],
}

/// Wire format of a [`Direction`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Angles {
    pub theta: f64,
    pub phi: f64,
}

impl TryFrom<Angles> for Direction {
    type Error = Error;

    fn try_from(a: Angles) -> Result<Self> {
        Direction::new(a.theta, a.phi)
    }
}

impl From<Direction> for Angles {
    fn from(d: Direction) -> Self {
        Angles {
            theta: d.theta,
            phi: d.phi,
        }
    }
}

fn spherical(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

impl Direction {
    /// Requires `theta` in `[0, pi]`; `phi` is reduced into `[0, 2 pi)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(Error::validation("direction angles must be finite"));
        }
        if !(-1e-12..=PI + 1e-12).contains(&theta) {
            return Err(Error::validation(format!("polar angle {theta} outside [0, pi]")));
        }
        let theta = theta.clamp(0.0, PI);
        let phi = phi.rem_euclid(TAU);
        Ok(Direction {
            theta,
            phi,
            vector: spherical(theta, phi),
        })
    }

    /// Accepts any real angles and maps them onto the canonical ranges.
    pub fn wrapped(theta: f64, phi: f64) -> Self {
        let mut t = theta.rem_euclid(TAU);
        let mut p = phi;
        if t > PI {
            t = TAU - t;
            p += PI;
        }
        let p = p.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU
        let p = if p >= TAU { 0.0 } else { p };
        Direction {
            theta: t,
            phi: p,
            vector: spherical(t, p),
        }
    }

    /// Direction of a nonzero vector; `phi = 0` at the poles.
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::validation("direction vector must be nonzero and finite"));
        }
        let u = [v[0] / n, v[1] / n, v[2] / n];
        let rho = u[0].hypot(u[1]);
        let theta = rho.atan2(u[2]);
        let phi = if rho < 1e-15 {
            0.0
        } else {
            u[1].atan2(u[0]).rem_euclid(TAU)
        };
        let phi = if phi >= TAU { 0.0 } else { phi };
        Ok(Direction {
            theta,
            phi,
            vector: u,
        })
    }

    pub fn z() -> Self {
        Direction::wrapped(0.0, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn vector(&self) -> [f64; 3] {
        self.vector
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        dot3(&self.vector, &other.vector)
    }

    pub fn antipode(&self) -> Direction {
        let v = self.vector;
        Direction::from_vector([-v[0], -v[1], -v[2]]).expect("unit vector")
    }
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `(S_x, S_y, S_z)` for spin 1.
pub fn spin_operators() -> (HermitianOperator, HermitianOperator, HermitianOperator) {
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let i = Complex64::new(0.0, FRAC_1_SQRT_2);
    let sx = CMatrix::from_row_slice(3, 3, &[C0, r, C0, r, C0, r, C0, r, C0]);
    let sy = CMatrix::from_row_slice(3, 3, &[C0, -i, C0, i, C0, -i, C0, i, C0]);
    let sx = HermitianOperator::new(sx).expect("S_x is Hermitian");
    let sy = HermitianOperator::new(sy).expect("S_y is Hermitian");
    let sz = HermitianOperator::diagonal(&[1.0, 0.0, -1.0]).expect("S_z is Hermitian");
    (sx, sy, sz)
}

/// `S_k = k . S`.
pub fn spin_component(k: &Direction) -> HermitianOperator {
    let (sx, sy, sz) = spin_operators();
    let [x, y, z] = k.vector;
    HermitianOperator::new(sx.scale(x) + sy.scale(y) + sz.scale(z)).expect("real combination")
}

/// `A_k = 2 S_k^2 - I`, spectrum `{+1, +1, -1}`.
pub fn dichotomic_observable(k: &Direction) -> HermitianOperator {
    let s = spin_component(k);
    let m = (&*s * &*s).scale(2.0) - CMatrix::identity(3, 3);
    HermitianOperator::new(m).expect("square of a Hermitian operator")
}

/// The `m = 0` state along a Cartesian vector `v`, without phase fixing.
///
/// In a Cartesian basis this state is `v` itself; the components here are
/// its image in the `(m = +1, 0, -1)` basis.
pub fn cartesian_ket(v: [f64; 3]) -> StateVector {
    StateVector::from_vec(vec![
        Complex64::new(-v[0], v[1]) * FRAC_1_SQRT_2,
        Complex64::new(v[2], 0.0),
        Complex64::new(v[0], v[1]) * FRAC_1_SQRT_2,
    ])
}

/// Normalized `|0_k>` with `S_k |0_k> = 0`, first nonzero amplitude real positive.
pub fn zero_eigenstate(k: &Direction) -> StateVector {
    fix_global_phase(&cartesian_ket(k.vector))
}

/// `|+1_z>`.
pub fn plus_z() -> StateVector {
    StateVector::from_vec(vec![C1, C0, C0])
}

/// `|-1_z>`.
pub fn minus_z() -> StateVector {
    StateVector::from_vec(vec![C0, C0, C1])
}

/// Polar angle of the KCBS cone, `arcsin(1 / (sqrt(2) cos(pi/10)))`.
pub fn kcbs_theta() -> f64 {
    (1.0 / (2f64.sqrt() * (PI / 10.0).cos())).asin()
}

/// `cos` of the angle between non-adjacent pentagon directions, `(sqrt 5 - 1)/2`.
pub fn kcbs_cos_gamma() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Five directions with cyclic adjacent orthogonality, their dichotomic
/// observables and the five contexts `G_a = {A_(a-1), A_a, A_(a+1)}`.
#[derive(Debug, Clone)]
pub struct KcbsPentagon {
    directions: [Direction; 5],
    observables: Vec<HermitianOperator>,
    contexts: ContextFamily,
}

impl KcbsPentagon {
    /// Direction `k_a`, with `a` taken mod 5 and `a = 1` the first direction.
    pub fn direction(&self, a: isize) -> &Direction {
        &self.directions[(a - 1).rem_euclid(5) as usize]
    }

    /// Observable `A_a`, cyclic in `a` (1-based).
    pub fn observable(&self, a: isize) -> &HermitianOperator {
        &self.observables[(a - 1).rem_euclid(5) as usize]
    }

    pub fn directions(&self) -> &[Direction; 5] {
        &self.directions
    }

    pub fn observables(&self) -> &[HermitianOperator] {
        &self.observables
    }

    pub fn contexts(&self) -> &ContextFamily {
        &self.contexts
    }

    /// Context `G_a` (1-based, cyclic).
    pub fn context(&self, a: isize) -> &Context {
        &self.contexts.contexts()[(a - 1).rem_euclid(5) as usize]
    }
}

pub fn kcbs_pentagon() -> KcbsPentagon {
    let theta = kcbs_theta();
    let directions: [Direction; 5] = std::array::from_fn(|i| {
        Direction::new(theta, i as f64 * 6.0 * PI / 5.0).expect("polar angle in range")
    });
    let observables: Vec<HermitianOperator> = directions.iter().map(dichotomic_observable).collect();
    let contexts = (0..5)
        .map(|i| {
            Context::new(
                observables[(i + 4) % 5].clone(),
                observables[i].clone(),
                observables[(i + 1) % 5].clone(),
            )
            .expect("adjacent pentagon observables commute")
        })
        .collect();
    KcbsPentagon {
        directions,
        observables,
        contexts: ContextFamily::new(contexts).expect("five contexts in d = 3"),
    }
}

/// `E(S^2; S_k1, S_v) = (5 - 2 cos^2 g + 9 cos^4 g) / 12`.
pub fn mie_closed_form_s(gamma: f64) -> f64 {
    let c2 = gamma.cos().powi(2);
    (5.0 - 2.0 * c2 + 9.0 * c2 * c2) / 12.0
}

/// `E(A_k2; A_k1, A_v) = (3 - 4 cos^2 g + 4 cos^4 g) / 3`.
pub fn mie_closed_form_a(gamma: f64) -> f64 {
    let c2 = gamma.cos().powi(2);
    (3.0 - 4.0 * c2 + 4.0 * c2 * c2) / 3.0
}

/// The pair `{S_k1, S^2, S_v}` and `{A_k1, A_k2, A_v}`, with `v` in the
/// `k1`-`k3` plane at angle `gamma` from `k1` and `k2` normal to that plane.
pub fn illustrative_contexts(gamma: f64) -> Result<(Context, Context)> {
    if !(0.0..=PI).contains(&gamma) {
        return Err(Error::validation(format!("gamma {gamma} outside [0, pi]")));
    }
    let pent = kcbs_pentagon();
    let k1 = pent.direction(1).vector();
    let k3 = pent.direction(3).vector();
    let c13 = dot3(&k1, &k3);
    let e = [k3[0] - c13 * k1[0], k3[1] - c13 * k1[1], k3[2] - c13 * k1[2]];
    let en = dot3(&e, &e).sqrt();
    let (s, c) = gamma.sin_cos();
    let v = Direction::from_vector([
        c * k1[0] + s * e[0] / en,
        c * k1[1] + s * e[1] / en,
        c * k1[2] + s * e[2] / en,
    ])?;
    let k1 = pent.direction(1);
    let s_squared = HermitianOperator::new(CMatrix::identity(3, 3).scale(2.0))?;
    let ctx_s = Context::new(spin_component(k1), s_squared, spin_component(&v))?;
    let ctx_a = Context::new(
        dichotomic_observable(k1),
        dichotomic_observable(pent.direction(2)),
        dichotomic_observable(&v),
    )?;
    Ok((ctx_s, ctx_a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::mie;
    use crate::operator::{commutator, eigendecompose, fidelity, max_norm, random, DEFAULT_GROUP_TOL};
    use rand::Rng;

    fn spectrum(h: &HermitianOperator) -> Vec<f64> {
        let (v, _) = (eigendecompose(h, 1e-15).unwrap(), ());
        let mut out = Vec::new();
        for (l, d) in v.eigenvalues.iter().zip(&v.dims) {
            out.extend(std::iter::repeat_n(*l, *d));
        }
        out
    }

    fn random_direction<R: Rng>(rng: &mut R) -> Direction {
        Direction::new(
            rng.random::<f64>().mul_add(2.0, -1.0).acos(),
            rng.random::<f64>() * TAU,
        )
        .unwrap()
    }

    #[test]
    fn spin_algebra() {
        let (sx, sy, sz) = spin_operators();
        let i = Complex64::new(0.0, 1.0);
        assert!(max_norm(&(commutator(&sx, &sy).unwrap() - sz.map(|z| z * i))) < 1e-14);
        assert!(max_norm(&(commutator(&sy, &sz).unwrap() - sx.map(|z| z * i))) < 1e-14);
        assert!(max_norm(&(commutator(&sz, &sx).unwrap() - sy.map(|z| z * i))) < 1e-14);
        let s2 = &*sx * &*sx + &*sy * &*sy + &*sz * &*sz;
        assert!(max_norm(&(&s2 - CMatrix::identity(3, 3).scale(2.0))) < 1e-14);
        assert!((s2.trace().re - 6.0).abs() < 1e-14);
        let ev = spectrum(&sz);
        assert_eq!(ev.len(), 3);
        for (a, b) in ev.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn components_and_observables() {
        let z = Direction::z();
        let (_, _, sz) = spin_operators();
        assert!(max_norm(&(&*spin_component(&z) - &*sz)) < 1e-15);
        let az = dichotomic_observable(&z);
        assert!(max_norm(&(&*az - &*HermitianOperator::diagonal(&[1.0, -1.0, 1.0]).unwrap())) < 1e-15);

        let mut rng = random::rng(2);
        for _ in 0..50 {
            let k = random_direction(&mut rng);
            for (a, b) in spectrum(&spin_component(&k)).iter().zip([-1.0, 0.0, 1.0]) {
                assert!((a - b).abs() < 1e-12);
            }
            let a = dichotomic_observable(&k);
            assert!(max_norm(&(&*a * &*a - CMatrix::identity(3, 3))) < 1e-12);
            assert!((a.trace().re - 1.0).abs() < 1e-12);
            let zk = zero_eigenstate(&k);
            assert!((zk.norm() - 1.0).abs() < 1e-14);
            assert!((&*spin_component(&k) * &zk).norm() < 1e-14);
            let proj = &zk * zk.adjoint();
            let alt = CMatrix::identity(3, 3) - proj.scale(2.0);
            assert!(max_norm(&(&*a - alt)) < 1e-12);
            let dec = eigendecompose(&a, DEFAULT_GROUP_TOL).unwrap();
            assert_eq!(dec.dims, vec![1, 2]);
        }
    }

    #[test]
    fn zero_states() {
        let z0 = zero_eigenstate(&Direction::z());
        assert!((&z0 - StateVector::from_vec(vec![C0, C1, C0])).norm() < 1e-15);
        let x = Direction::new(PI / 2.0, 0.0).unwrap();
        let x0 = zero_eigenstate(&x);
        let expect = StateVector::from_vec(vec![
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            C0,
            Complex64::new(-FRAC_1_SQRT_2, 0.0),
        ]);
        assert!((&x0 - expect).norm() < 1e-15);

        let mut rng = random::rng(4);
        for _ in 0..50 {
            let k = random_direction(&mut rng);
            let q = random_direction(&mut rng);
            let ov = fidelity(&zero_eigenstate(&k), &zero_eigenstate(&q));
            assert!((ov - k.dot(&q).powi(2)).abs() < 1e-12);
        }
        let y = Direction::new(PI / 2.0, PI / 2.0).unwrap();
        assert!(fidelity(&zero_eigenstate(&x), &zero_eigenstate(&y)) < 1e-30);
    }

    #[test]
    fn pentagon_geometry() {
        let p = kcbs_pentagon();
        let theta = kcbs_theta();
        assert!((theta - 0.7435f64.asin()).abs() < 1e-4);
        for a in 1..=5 {
            assert!((p.direction(a).theta() - theta).abs() < 1e-12);
            assert!(p.direction(a).dot(p.direction(a + 1)).abs() < 1e-12);
            assert!((p.direction(a).dot(p.direction(a + 2)) - kcbs_cos_gamma()).abs() < 1e-12);
            assert_eq!(p.observable(a + 5), p.observable(a));
        }
        assert!((kcbs_cos_gamma() - 0.618034).abs() < 1e-6);
    }

    #[test]
    fn pentagon_contexts_uniform() {
        let p = kcbs_pentagon();
        let es: Vec<f64> = (1..=5).map(|a| mie(p.context(a)).unwrap().raw).collect();
        let spread =
            es.iter().cloned().fold(f64::MIN, f64::max) - es.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 1e-10);
        assert!((es[0] - mie_closed_form_a(kcbs_cos_gamma().acos())).abs() < 1e-10);
        let g1 = p.context(1);
        assert_eq!(g1.a(), p.observable(5));
        assert_eq!(g1.b(), p.observable(1));
        assert_eq!(g1.c(), p.observable(2));
    }

    #[test]
    fn adjacent_pair_joint_blocks() {
        use crate::operator::{joint_eigenprojectors, Tolerances};
        let p = kcbs_pentagon();
        let fam = joint_eigenprojectors(p.observable(5), p.observable(1), Tolerances::default()).unwrap();
        assert_eq!(fam.dims, vec![1, 1, 1]);
        let mut pairs: Vec<(i32, i32)> = fam
            .pairs
            .iter()
            .map(|&(a, b)| (a.round() as i32, b.round() as i32))
            .collect();
        pairs.sort();
        assert_eq!(pairs, vec![(-1, 1), (1, -1), (1, 1)]);
        // Brute-force common eigenvectors: k5, k1 and k5 x k1.
        let k5 = p.direction(5).vector();
        let k1 = p.direction(1).vector();
        let cross = [
            k5[1] * k1[2] - k5[2] * k1[1],
            k5[2] * k1[0] - k5[0] * k1[2],
            k5[0] * k1[1] - k5[1] * k1[0],
        ];
        for v in [k5, k1, cross] {
            let ket = cartesian_ket(v);
            let hits = fam
                .projectors
                .iter()
                .filter(|pr| (ket.adjoint() * &***pr * &ket)[(0, 0)].re > 1.0 - 1e-10)
                .count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn closed_forms() {
        assert!((mie_closed_form_s(0.0) - 1.0).abs() < 1e-15);
        assert!((mie_closed_form_a(0.0) - 1.0).abs() < 1e-15);
        assert!((mie_closed_form_a(PI / 2.0) - 1.0).abs() < 1e-15);
        assert!((mie_closed_form_a(PI / 4.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((mie_closed_form_s(PI / 4.0) - 25.0 / 48.0).abs() < 1e-15);
    }

    #[test]
    fn illustrative_contexts_match_closed_forms() {
        let (s, a) = illustrative_contexts(PI / 4.0).unwrap();
        assert!((mie(&a).unwrap().raw - 2.0 / 3.0).abs() < 1e-10);
        assert!((mie(&s).unwrap().raw - 25.0 / 48.0).abs() < 1e-10);
        let (s, a) = illustrative_contexts(0.0).unwrap();
        assert!((mie(&a).unwrap().value - 1.0).abs() < 1e-10);
        assert!((mie(&s).unwrap().value - 1.0).abs() < 1e-10);
        assert!(illustrative_contexts(4.0).is_err());
    }

    #[test]
    fn direction_conventions() {
        assert!(Direction::new(-0.5, 0.0).is_err());
        let d = Direction::new(1.0, -1.0).unwrap();
        assert!((d.phi() - (TAU - 1.0)).abs() < 1e-15);
        let w = Direction::wrapped(-1.0, 0.5);
        assert!((w.theta() - 1.0).abs() < 1e-15);
        assert!((w.phi() - (0.5 + PI)).abs() < 1e-15);
        let v = Direction::wrapped(2.0, 3.0).vector();
        let back = Direction::from_vector(v).unwrap();
        assert!((back.theta() - 2.0).abs() < 1e-12 && (back.phi() - 3.0).abs() < 1e-12);
        let json = serde_json::to_string(&Direction::z()).unwrap();
        assert_eq!(json, r#"{"theta":0.0,"phi":0.0}"#);
    }
}
