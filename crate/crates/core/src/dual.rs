//! Forward-mode dual numbers.
//!
//! `Dual<T>` carries a value and one directional derivative. Nesting
//! (`Dual<Dual<f64>>`, ...) gives mixed higher derivatives: seed the outer
//! layer along one coordinate and the inner layer along another, and the
//! `eps.eps` slot holds the mixed second partial. Every closed-form field in
//! the crate is written once against [`Real`] and differentiated this way.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by `f64` and every nesting of [`Dual`].
pub trait Real:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + 'static
{
    fn cst(c: f64) -> Self;
    /// Innermost real part.
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, c: f64) -> Self;
    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }
}

impl Real for f64 {
    #[inline]
    fn cst(c: f64) -> Self {
        c
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn powf(self, c: f64) -> Self {
        f64::powf(self, c)
    }
}

/// Value plus one infinitesimal direction: `re + eps·ε`, `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Real> Dual<T> {
    #[inline]
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    /// Independent variable: derivative seed 1.
    #[inline]
    pub fn var(re: T) -> Self {
        Self { re, eps: T::one() }
    }

    #[inline]
    pub fn constant(re: T) -> Self {
        Self { re, eps: T::zero() }
    }

    // chain rule with precomputed f(re) and f'(re)
    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        Self {
            re: f,
            eps: df * self.eps,
        }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        let q = self.re * inv;
        Self::new(q, (self.eps - q * o.eps) * inv)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Real> Add<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, c: f64) -> Self {
        Self::new(self.re + c, self.eps)
    }
}

impl<T: Real> Sub<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, c: f64) -> Self {
        Self::new(self.re - c, self.eps)
    }
}

impl<T: Real> Mul<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, c: f64) -> Self {
        Self::new(self.re * c, self.eps * c)
    }
}

impl<T: Real> Div<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, c: f64) -> Self {
        Self::new(self.re / c, self.eps / c)
    }
}

impl<T: Real> Real for Dual<T> {
    #[inline]
    fn cst(c: f64) -> Self {
        Self::constant(T::cst(c))
    }

    #[inline]
    fn value(&self) -> f64 {
        self.re.value()
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, (s * 2.0).recip())
    }

    fn ln(self) -> Self {
        self.chain(self.re.ln(), self.re.recip())
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }

    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::one(),
            1 => self,
            _ => self.chain(self.re.powi(n), self.re.powi(n - 1) * n as f64),
        }
    }

    fn powf(self, c: f64) -> Self {
        self.chain(self.re.powf(c), self.re.powf(c - 1.0) * c)
    }
}

/// Lift a real point into `Dual<T>` with the derivative seeded along `dir`.
#[inline]
pub fn seed<T: Real>(x: &[T; 3], dir: usize) -> [Dual<T>; 3] {
    std::array::from_fn(|k| {
        if k == dir {
            Dual::var(x[k])
        } else {
            Dual::constant(x[k])
        }
    })
}

#[inline]
pub fn lift<T: Real>(x: &[T; 3]) -> [Dual<T>; 3] {
    std::array::from_fn(|k| Dual::constant(x[k]))
}

/// Value and gradient of a scalar field.
pub fn gradient<T, F>(f: F, x: &[T; 3]) -> (T, [T; 3])
where
    T: Real,
    F: Fn(&[Dual<T>; 3]) -> Dual<T>,
{
    let mut value = T::zero();
    let mut grad = [T::zero(); 3];
    for (k, g) in grad.iter_mut().enumerate() {
        let d = f(&seed(x, k));
        value = d.re;
        *g = d.eps;
    }
    (value, grad)
}

/// Value, gradient and Hessian of a scalar field from six mixed
/// evaluations with `Dual<Dual<T>>`.
pub fn hessian<T, F>(f: F, x: &[T; 3]) -> (T, [T; 3], [[T; 3]; 3])
where
    T: Real,
    F: Fn(&[Dual<Dual<T>>; 3]) -> Dual<Dual<T>>,
{
    let mut value = T::zero();
    let mut grad = [T::zero(); 3];
    let mut hess = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let d = f(&seed2(x, i, j));
            value = d.re.re;
            if i == j {
                grad[i] = d.eps.re;
            }
            hess[i][j] = d.eps.eps;
            hess[j][i] = d.eps.eps;
        }
    }
    (value, grad, hess)
}

/// Outer layer seeded along `outer`, inner layer along `inner`.
#[inline]
pub fn seed2<T: Real>(x: &[T; 3], outer: usize, inner: usize) -> [Dual<Dual<T>>; 3] {
    std::array::from_fn(|k| {
        let re = if k == inner {
            Dual::var(x[k])
        } else {
            Dual::constant(x[k])
        };
        let eps = if k == outer {
            Dual::constant(T::one())
        } else {
            Dual::constant(T::zero())
        };
        Dual::new(re, eps)
    })
}
