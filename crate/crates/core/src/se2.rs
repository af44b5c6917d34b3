//! SE(2) rigid transforms, the se(2) Lie algebra, and planar points.
//!
//! Poses are stored as `(x, y, theta)` with `theta` kept normalized to
//! `(-pi, pi]`; homogeneous matrices are never materialized outside of
//! `exp`/`log`. All operations are pure functions over immutable values.

use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::{real, Real};

/// Angle equal to `pi` maps to `+pi` (positive branch), giving the
/// normalization interval `(-pi, pi]`.
#[inline]
pub fn normalize_angle<T: Real>(angle: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut a = angle % two_pi;
    if a > T::PI() {
        a -= two_pi;
    } else if a <= -T::PI() {
        a += two_pi;
    }
    a
}

/// A point in the plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self {
            x: T::zero(),
            y: T::zero(),
        }
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn distance(&self, other: &Self) -> T {
        (*self - *other).norm()
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<T: Real> Add for Point2<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Real> Sub for Point2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Real> Neg for Point2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// An SE(2) rigid transform: translation in meters, rotation in radians.
///
/// `theta` is normalized to `(-pi, pi]` by every constructor and operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
}

/// A vector in the Lie algebra se(2): `(rho_x, rho_y, omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Twist2<T> {
    pub rho_x: T,
    pub rho_y: T,
    pub omega: T,
}

/// Below this rotation magnitude `exp`/`log` switch to the first-order
/// series for the V matrix, keeping relative error below machine noise
/// across the switch point.
const SMALL_ANGLE: f64 = 1e-10;

impl<T: Real> Pose2<T> {
    #[inline]
    pub fn new(x: T, y: T, theta: T) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    #[inline]
    pub fn identity() -> Self {
        Self {
            x: T::zero(),
            y: T::zero(),
            theta: T::zero(),
        }
    }

    #[inline]
    pub fn from_translation(t: Point2<T>) -> Self {
        Self::new(t.x, t.y, T::zero())
    }

    #[inline]
    pub fn translation(&self) -> Point2<T> {
        Point2::new(self.x, self.y)
    }

    /// `self` applied after `other`: the returned transform maps a point
    /// through `other` first, then through `self`.
    #[inline]
    pub fn compose(&self, other: &Self) -> Self {
        let (s, c) = self.theta.sin_cos();
        Self::new(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )
    }

    #[inline]
    pub fn inverse(&self) -> Self {
        let (s, c) = self.theta.sin_cos();
        Self::new(
            -(c * self.x + s * self.y),
            s * self.x - c * self.y,
            -self.theta,
        )
    }

    #[inline]
    pub fn transform_point(&self, pt: Point2<T>) -> Point2<T> {
        let (s, c) = self.theta.sin_cos();
        Point2::new(
            self.x + c * pt.x - s * pt.y,
            self.y + s * pt.x + c * pt.y,
        )
    }

    /// Closed-form SE(2) exponential map.
    pub fn exp(xi: &Twist2<T>) -> Self {
        let w = xi.omega;
        let (tx, ty) = if w.abs() < real(SMALL_ANGLE) {
            // V = I + (w/2) S to first order.
            let half_w = w / real::<T>(2.0);
            (
                xi.rho_x - half_w * xi.rho_y,
                half_w * xi.rho_x + xi.rho_y,
            )
        } else {
            // 1 - cos w computed as 2 sin^2(w/2) to avoid cancellation.
            let s = w.sin();
            let one_minus_c = real::<T>(2.0) * (w / real::<T>(2.0)).sin().powi(2);
            (
                (s * xi.rho_x - one_minus_c * xi.rho_y) / w,
                (one_minus_c * xi.rho_x + s * xi.rho_y) / w,
            )
        };
        Self::new(tx, ty, w)
    }

    /// Inverse of [`Pose2::exp`]. `theta == pi` returns `omega = +pi`.
    pub fn log(&self) -> Twist2<T> {
        let w = self.theta;
        if w.abs() < real(SMALL_ANGLE) {
            let half_w = w / real::<T>(2.0);
            Twist2 {
                rho_x: self.x + half_w * self.y,
                rho_y: -half_w * self.x + self.y,
                omega: w,
            }
        } else {
            // V^-1 = [[a, h], [-h, a]] with h = w/2 and
            // a = (w sin w) / (2 (1 - cos w)) = (w/2) cot(w/2).
            let half_w = w / real::<T>(2.0);
            let a = half_w * w.sin() / (real::<T>(2.0) * half_w.sin().powi(2));
            Twist2 {
                rho_x: a * self.x + half_w * self.y,
                rho_y: -half_w * self.x + a * self.y,
                omega: w,
            }
        }
    }
}

impl<T: Real> Twist2<T> {
    #[inline]
    pub fn new(rho_x: T, rho_y: T, omega: T) -> Self {
        Self { rho_x, rho_y, omega }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn as_array(&self) -> [T; 3] {
        [self.rho_x, self.rho_y, self.omega]
    }

    #[inline]
    pub fn from_array(v: [T; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl<T: Real> Neg for Twist2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.rho_x, -self.rho_y, -self.omega)
    }
}

/// 3x3 matrix in row-major layout, used for tangent-space Jacobians.
pub type Mat3<T> = [[T; 3]; 3];

pub fn mat3_mul<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn mat3_vec<T: Real>(a: &Mat3<T>, v: &[T; 3]) -> [T; 3] {
    let mut out = [T::zero(); 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
    }
    out
}

pub fn mat3_scale<T: Real>(a: &Mat3<T>, s: T) -> Mat3<T> {
    let mut out = *a;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v = *v * s;
        }
    }
    out
}

/// Adjoint of a pose on se(2): `T exp(xi) T^-1 = exp(Ad_T xi)`.
pub fn adjoint<T: Real>(p: &Pose2<T>) -> Mat3<T> {
    let (s, c) = p.theta.sin_cos();
    [
        [c, -s, p.y],
        [s, c, -p.x],
        [T::zero(), T::zero(), T::one()],
    ]
}

/// Inverse of the left Jacobian of SE(2) at `xi`.
///
/// Satisfies `log(exp(eta) exp(xi)) ~= xi + Jl^-1(xi) eta` for small `eta`.
/// The right-Jacobian counterpart is `Jr^-1(xi) = Jl^-1(-xi)`.
pub fn left_jacobian_inv<T: Real>(xi: &Twist2<T>) -> Mat3<T> {
    let th = xi.omega;
    let (alpha, beta, q1, q2);
    if th.abs() < real(1e-4) {
        // Series accurate to O(th^4) relative; crossover chosen so the
        // closed form's cancellation error stays below it.
        let th2 = th * th;
        alpha = T::one() - th2 / real(6.0);
        beta = th / real::<T>(2.0) * (T::one() - th2 / real(12.0));
        let g = th / real::<T>(6.0) * (T::one() - th2 / real(20.0)); // (th - sin th)/th^2
        let b_over = T::one() / real::<T>(2.0) * (T::one() - th2 / real(12.0)); // (1-cos th)/th^2
        q1 = xi.rho_y * b_over + xi.rho_x * g;
        q2 = -xi.rho_x * b_over + xi.rho_y * g;
    } else {
        let (s, c2) = (th.sin(), (th / real::<T>(2.0)).sin().powi(2));
        let one_minus_c = real::<T>(2.0) * c2;
        alpha = s / th;
        beta = one_minus_c / th;
        let th2 = th * th;
        q1 = (xi.rho_y * one_minus_c + xi.rho_x * (th - s)) / th2;
        q2 = (-xi.rho_x * one_minus_c + xi.rho_y * (th - s)) / th2;
    }
    // Jl = [[alpha, -beta, q1], [beta, alpha, q2], [0, 0, 1]];
    // invert the rot-scale block analytically.
    let det = alpha * alpha + beta * beta;
    let (ia, ib) = (alpha / det, beta / det);
    [
        [ia, ib, -(ia * q1 + ib * q2)],
        [-ib, ia, -(-ib * q1 + ia * q2)],
        [T::zero(), T::zero(), T::one()],
    ]
}

/// `Jr^-1(xi)`: satisfies `log(exp(xi) exp(eta)) ~= xi + Jr^-1(xi) eta`.
pub fn right_jacobian_inv<T: Real>(xi: &Twist2<T>) -> Mat3<T> {
    left_jacobian_inv(&-*xi)
}
