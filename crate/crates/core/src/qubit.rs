//! Value types for a single two-level system: amplitudes, 2x2 complex
//! matrices, the Pauli basis and occupation probabilities.
//!
//! The Hamiltonian convention throughout the crate is
//! `H(t) = -(dE/2) sz + V(t) sx`, so state 1 sits at `-dE/2` and state 2 at
//! `+dE/2`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm tolerance enforced when constructing a [`Complex2State`].
pub const NORM_TOL: f64 = 1e-12;
/// Default tolerance on `|U^dag U - I|_F` for matrices treated as propagators.
pub const UNITARITY_TOL: f64 = 1e-10;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub delta_e: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

fn default_hbar() -> f64 {
    1.0
}

impl SystemParams {
    pub fn new(delta_e: f64, hbar: f64) -> Result<Self> {
        let p = SystemParams { delta_e, hbar };
        p.validate()?;
        Ok(p)
    }

    /// Natural units, `hbar = 1`.
    pub fn natural(delta_e: f64) -> Result<Self> {
        Self::new(delta_e, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta_e.is_finite() || self.delta_e < 0.0 {
            return Err(Error::InvalidParams(format!(
                "delta_e must be finite and >= 0, got {}",
                self.delta_e
            )));
        }
        if !self.hbar.is_finite() || self.hbar <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "hbar must be finite and > 0, got {}",
                self.hbar
            )));
        }
        Ok(())
    }

    /// Angular frequency `dE / (2 hbar)` of the free phase rotation.
    pub fn half_splitting_rate(&self) -> f64 {
        0.5 * self.delta_e / self.hbar
    }

    /// `H(t)` for a given potential value, as a matrix.
    pub fn hamiltonian(&self, v: f64) -> Unitary2 {
        Unitary2::new(
            C64::new(-0.5 * self.delta_e, 0.0),
            C64::new(v, 0.0),
            C64::new(v, 0.0),
            C64::new(0.5 * self.delta_e, 0.0),
        )
    }
}

/// Probability amplitudes `(a1, a2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Complex2State {
    pub a1: C64,
    pub a2: C64,
}

impl Complex2State {
    pub fn new(a1: C64, a2: C64) -> Result<Self> {
        let s = Complex2State { a1, a2 };
        s.validate()?;
        Ok(s)
    }

    pub(crate) fn new_unchecked(a1: C64, a2: C64) -> Self {
        Complex2State { a1, a2 }
    }

    pub fn validate(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(())
    }

    /// State 1, `(1, 0)`.
    pub fn lower() -> Self {
        Complex2State { a1: ONE, a2: ZERO }
    }

    /// State 2, `(0, 1)`.
    pub fn upper() -> Self {
        Complex2State { a1: ZERO, a2: ONE }
    }

    pub fn basis(index: usize) -> Self {
        if index == 2 {
            Self::upper()
        } else {
            Self::lower()
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a1.norm_sqr() + self.a2.norm_sqr()
    }

    pub fn populations(&self) -> (f64, f64) {
        populations(self)
    }
}

impl Default for Complex2State {
    fn default() -> Self {
        Self::lower()
    }
}

/// A 2x2 complex matrix. Used both for propagators and for arbitrary
/// operators such as Hamiltonians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Unitary2 {
    pub u11: C64,
    pub u12: C64,
    pub u21: C64,
    pub u22: C64,
}

impl Unitary2 {
    pub const IDENTITY: Unitary2 = Unitary2 { u11: ONE, u12: ZERO, u21: ZERO, u22: ONE };
    pub const SIGMA_X: Unitary2 = Unitary2 { u11: ZERO, u12: ONE, u21: ONE, u22: ZERO };
    pub const SIGMA_Y: Unitary2 = Unitary2 {
        u11: ZERO,
        u12: C64 { re: 0.0, im: -1.0 },
        u21: I,
        u22: ZERO,
    };
    pub const SIGMA_Z: Unitary2 = Unitary2 {
        u11: ONE,
        u12: ZERO,
        u21: ZERO,
        u22: C64 { re: -1.0, im: 0.0 },
    };

    pub const fn new(u11: C64, u12: C64, u21: C64, u22: C64) -> Self {
        Unitary2 { u11, u12, u21, u22 }
    }

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Unitary2::new(d1, ZERO, ZERO, d2)
    }

    /// `exp(i (phi I + a . sigma))` for real `phi` and real vector `a`, in
    /// closed form: `e^{i phi} (I cos|a| + i (a/|a|) . sigma sin|a|)`.
    pub fn exp_i_pauli(phi: f64, a: [f64; 3]) -> Self {
        let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        let (s, c) = norm.sin_cos();
        // sin|a| / |a| -> 1 as |a| -> 0
        let sinc = if norm < 1e-8 { 1.0 - norm * norm / 6.0 } else { s / norm };
        let (nx, ny, nz) = (a[0] * sinc, a[1] * sinc, a[2] * sinc);
        let m = Unitary2::new(
            C64::new(c, nz),
            C64::new(ny, nx),
            C64::new(-ny, nx),
            C64::new(c, -nz),
        );
        if phi == 0.0 {
            m
        } else {
            m.scale(C64::from_polar(1.0, phi))
        }
    }

    pub fn dagger(&self) -> Self {
        Unitary2::new(self.u11.conj(), self.u21.conj(), self.u12.conj(), self.u22.conj())
    }

    pub fn trace(&self) -> C64 {
        self.u11 + self.u22
    }

    pub fn det(&self) -> C64 {
        self.u11 * self.u22 - self.u12 * self.u21
    }

    pub fn scale(&self, k: C64) -> Self {
        Unitary2::new(self.u11 * k, self.u12 * k, self.u21 * k, self.u22 * k)
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.u11.norm_sqr() + self.u12.norm_sqr() + self.u21.norm_sqr() + self.u22.norm_sqr())
            .sqrt()
    }

    /// `|self - other|_F`.
    pub fn distance(&self, other: &Unitary2) -> f64 {
        (*self - *other).frobenius_norm()
    }

    /// `|U^dag U - I|_F`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.dagger() * *self - Unitary2::IDENTITY).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() < tol && (self.det().norm() - 1.0).abs() < tol
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        if self.is_unitary(tol) {
            Ok(())
        } else {
            Err(Error::NotUnitary { defect: self.unitarity_defect() })
        }
    }

    /// Matrix-vector product without any unitarity check.
    pub fn mul_state(&self, s: &Complex2State) -> Complex2State {
        Complex2State::new_unchecked(
            self.u11 * s.a1 + self.u12 * s.a2,
            self.u21 * s.a1 + self.u22 * s.a2,
        )
    }

    pub fn is_finite(&self) -> bool {
        [self.u11, self.u12, self.u21, self.u22].iter().all(|z| z.is_finite())
    }

    /// Rows as `[[u11, u12], [u21, u22]]`.
    pub fn rows(&self) -> [[C64; 2]; 2] {
        [[self.u11, self.u12], [self.u21, self.u22]]
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;
    fn mul(self, r: Unitary2) -> Unitary2 {
        Unitary2::new(
            self.u11 * r.u11 + self.u12 * r.u21,
            self.u11 * r.u12 + self.u12 * r.u22,
            self.u21 * r.u11 + self.u22 * r.u21,
            self.u21 * r.u12 + self.u22 * r.u22,
        )
    }
}

impl Add for Unitary2 {
    type Output = Unitary2;
    fn add(self, r: Unitary2) -> Unitary2 {
        Unitary2::new(self.u11 + r.u11, self.u12 + r.u12, self.u21 + r.u21, self.u22 + r.u22)
    }
}

impl Sub for Unitary2 {
    type Output = Unitary2;
    fn sub(self, r: Unitary2) -> Unitary2 {
        Unitary2::new(self.u11 - r.u11, self.u12 - r.u12, self.u21 - r.u21, self.u22 - r.u22)
    }
}

/// Coefficients of `c_i I + c_x sx + c_y sy + c_z sz`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliDecomposition {
    pub c_i: C64,
    pub c_x: C64,
    pub c_y: C64,
    pub c_z: C64,
}

impl PauliDecomposition {
    pub fn reassemble(&self) -> Unitary2 {
        Unitary2::new(
            self.c_i + self.c_z,
            self.c_x - I * self.c_y,
            self.c_x + I * self.c_y,
            self.c_i - self.c_z,
        )
    }

    pub fn max_imag(&self) -> f64 {
        [self.c_i, self.c_x, self.c_y, self.c_z]
            .iter()
            .map(|c| c.im.abs())
            .fold(0.0, f64::max)
    }
}

/// `c_i = tr(m)/2`, `c_k = tr(sigma_k m)/2`.
pub fn decompose_pauli(m: &Unitary2) -> PauliDecomposition {
    PauliDecomposition {
        c_i: 0.5 * (m.u11 + m.u22),
        c_x: 0.5 * (m.u21 + m.u12),
        c_y: 0.5 * I * (m.u12 - m.u21),
        c_z: 0.5 * (m.u11 - m.u22),
    }
}

/// `u s`, rejecting `u` if it fails the default unitarity check.
pub fn apply(u: &Unitary2, s: &Complex2State) -> Result<Complex2State> {
    u.check_unitary(UNITARITY_TOL)?;
    Ok(u.mul_state(s))
}

/// `(|a1|^2, |a2|^2)`.
pub fn populations(s: &Complex2State) -> (f64, f64) {
    (s.a1.norm_sqr(), s.a2.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn identity_decomposes_to_ci() {
        let d = decompose_pauli(&Unitary2::IDENTITY);
        assert_eq!(d.c_i, ONE);
        assert_eq!(d.c_x, ZERO);
        assert_eq!(d.c_y, ZERO);
        assert_eq!(d.c_z, ZERO);
    }

    #[test]
    fn hamiltonian_decomposes_to_field_and_splitting() {
        let p = SystemParams::natural(2.0).unwrap();
        let d = decompose_pauli(&p.hamiltonian(0.5));
        assert!((d.c_i - ZERO).norm() < 1e-15);
        assert!((d.c_x - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((d.c_y - ZERO).norm() < 1e-15);
        assert!((d.c_z - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pauli_matrices_decompose_to_unit_vectors() {
        let dx = decompose_pauli(&Unitary2::SIGMA_X);
        let dy = decompose_pauli(&Unitary2::SIGMA_Y);
        let dz = decompose_pauli(&Unitary2::SIGMA_Z);
        assert_eq!((dx.c_x, dy.c_y, dz.c_z), (ONE, ONE, ONE));
        assert_eq!(dx.reassemble(), Unitary2::SIGMA_X);
        assert_eq!(dy.reassemble(), Unitary2::SIGMA_Y);
    }

    #[test]
    fn apply_identity_is_noop() {
        let s = Complex2State::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        assert_eq!(apply(&Unitary2::IDENTITY, &s).unwrap(), s);
    }

    #[test]
    fn apply_minus_i_sigma_x_swaps() {
        let u = Unitary2::SIGMA_X.scale(-I);
        let out = apply(&u, &Complex2State::lower()).unwrap();
        assert_eq!(out.a1, ZERO);
        assert_eq!(out.a2, -I);
        assert_eq!(populations(&out).1, 1.0);
    }

    #[test]
    fn apply_rejects_non_unitary() {
        let u = Unitary2::IDENTITY.scale(C64::new(1.1, 0.0));
        assert!(matches!(
            apply(&u, &Complex2State::lower()),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn populations_examples() {
        assert_eq!(populations(&Complex2State::lower()), (1.0, 0.0));
        let s = Complex2State::new(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, -FRAC_1_SQRT_2))
            .unwrap();
        let (p1, p2) = populations(&s);
        assert!((p1 - 0.5).abs() < 1e-15 && (p2 - 0.5).abs() < 1e-15);

        // sigma_x rotation by pi/4
        let u = Unitary2::exp_i_pauli(0.0, [-FRAC_PI_4, 0.0, 0.0]);
        let (p1, p2) = populations(&apply(&u, &Complex2State::lower()).unwrap());
        assert!((p1 - 0.5).abs() < 1e-15 && (p2 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn state_normalization_is_enforced() {
        assert!(Complex2State::new(ONE, ONE).is_err());
        assert!(Complex2State::new(C64::new(1.0 + 1e-11, 0.0), ZERO).is_err());
        assert!(Complex2State::new(C64::new(1.0 + 1e-13, 0.0), ZERO).is_ok());
    }

    #[test]
    fn params_validation() {
        assert!(SystemParams::new(-1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 0.0).is_err());
        assert!(SystemParams::new(0.0, 2.0).is_ok());
    }

    #[test]
    fn exp_i_pauli_matches_half_turn() {
        // exp(-i pi/2 sx) = -i sx
        let u = Unitary2::exp_i_pauli(0.0, [-FRAC_PI_2, 0.0, 0.0]);
        assert!(u.distance(&Unitary2::SIGMA_X.scale(-I)) < 1e-15);
        // exp(i pi/2 sz) = diag(i, -i)
        let u = Unitary2::exp_i_pauli(0.0, [0.0, 0.0, FRAC_PI_2]);
        assert!(u.distance(&Unitary2::diag(I, -I)) < 1e-15);
        assert!(u.is_unitary(1e-14));
    }
}
