//! Dense square matrices over `f64` or `Complex64`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::{Complex64, ComplexFloat};
use num_traits::{Float, One, Zero};

/// Scalars the dense routines work over.
pub trait Scalar:
    ComplexFloat<Real = f64> + Copy + Zero + One + core::fmt::Debug + Send + Sync
{
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conjugate(self) -> Self;
}

impl Scalar for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        Float::abs(self)
    }
    fn conjugate(self) -> Self {
        self
    }
}

impl Scalar for Complex64 {
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conjugate(self) -> Self {
        self.conj()
    }
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

pub type CMatrix = Matrix<Complex64>;
pub type RMatrix = Matrix<f64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == T::zero() {
                    continue;
                }
                let brow = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    /// `self * rhs^dagger`.
    pub fn mul_adjoint(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        Self::from_fn(n, |i, j| {
            let a = self.row(i);
            let b = rhs.row(j);
            a.iter()
                .zip(b)
                .fold(T::zero(), |acc, (&x, &y)| acc + x * y.conjugate())
        })
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conjugate())
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.axpy(T::one(), rhs)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.axpy(-T::one(), rhs)
    }

    /// `self + s * rhs`.
    pub fn axpy(&self, s: T, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a + s * b)
                .collect(),
        }
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius(&self) -> f64 {
        Float::sqrt(
            self.data
                .iter()
                .map(|x| x.modulus() * x.modulus())
                .sum::<f64>(),
        )
    }

    /// Largest absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self - rhs` over the leading `k x k` block.
    pub fn block_max_diff(&self, rhs: &Self, k: usize) -> f64 {
        let mut m = 0.0f64;
        for i in 0..k.min(self.n) {
            for j in 0..k.min(self.n) {
                m = m.max((self[(i, j)] - rhs[(i, j)]).modulus());
            }
        }
        m
    }

    /// Solves `self * X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[(x, col)].modulus().total_cmp(&a[(y, col)].modulus()))
                .unwrap_or(col);
            if a[(piv, col)].modulus() == 0.0 {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    b.data.swap(piv * n + j, col * n + j);
                }
            }
            let inv = T::one() / a[(col, col)];
            for r in col + 1..n {
                let f = a[(r, col)] * inv;
                if f == T::zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[(col, j)];
                    a[(r, j)] = a[(r, j)] - f * v;
                }
                for j in 0..n {
                    let v = b[(col, j)];
                    b[(r, j)] = b[(r, j)] - f * v;
                }
            }
        }
        for col in (0..n).rev() {
            let inv = T::one() / a[(col, col)];
            for j in 0..n {
                let mut s = b[(col, j)];
                for k in col + 1..n {
                    s = s - a[(col, k)] * b[(k, j)];
                }
                b[(col, j)] = s * inv;
            }
        }
        Some(b)
    }

    /// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
    pub fn expm(&self) -> Self {
        const B: [f64; 14] = [
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ];
        const THETA13: f64 = 5.371920351148152;
        let n = self.n;
        let norm = self.norm_one();
        let s = if norm > THETA13 {
            Float::ceil(Float::log2(norm / THETA13)) as i32
        } else {
            0
        };
        let a = self.scale(T::from_real(Float::powi(0.5f64, s)));
        let id = Self::identity(n);
        let a2 = a.mul(&a);
        let a4 = a2.mul(&a2);
        let a6 = a4.mul(&a2);
        let c = |k: usize| T::from_real(B[k]);

        let u_inner = a6.scale(c(13)).axpy(c(11), &a4).axpy(c(9), &a2);
        let u = a.mul(
            &a6.mul(&u_inner)
                .axpy(c(7), &a6)
                .axpy(c(5), &a4)
                .axpy(c(3), &a2)
                .axpy(c(1), &id),
        );
        let v_inner = a6.scale(c(12)).axpy(c(10), &a4).axpy(c(8), &a2);
        let v = a6
            .mul(&v_inner)
            .axpy(c(6), &a6)
            .axpy(c(4), &a4)
            .axpy(c(2), &a2)
            .axpy(c(0), &id);

        let mut r = v
            .sub(&u)
            .solve(&v.add(&u))
            .expect("Pade denominator is singular");
        for _ in 0..s {
            r = r.mul(&r);
        }
        r
    }
}

impl RMatrix {
    pub fn to_complex(&self) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}
