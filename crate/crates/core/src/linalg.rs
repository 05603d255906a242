//! Small dense linear-algebra helpers shared across modules.

use std::f64::consts::PI;

use nalgebra::{Cholesky, Const, DMatrix, DimMin, SMatrix, SVector};

use crate::{Error, Result};

/// 2-norm condition number from the singular values. Returns `inf` for a
/// matrix with a zero singular value.
pub fn condition_number<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    let sv = DMatrix::from_column_slice(N, N, m.as_slice()).singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Condition number of a symmetric matrix from its eigenvalues.
pub fn symmetric_condition<const N: usize>(m: &SMatrix<f64, N, N>) -> f64
where
    Const<N>: nalgebra::DimSub<nalgebra::U1>,
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<<Const<N> as nalgebra::DimSub<nalgebra::U1>>::Output>,
{
    let ev = m.symmetric_eigenvalues();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &e in ev.iter() {
        lo = lo.min(e.abs());
        hi = hi.max(e.abs());
    }
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Cholesky factorization of an SPD matrix, refusing matrices whose condition
/// number exceeds `max_condition`.
pub fn guarded_cholesky<const N: usize>(
    m: &SMatrix<f64, N, N>,
    what: &'static str,
    max_condition: f64,
) -> Result<Cholesky<f64, Const<N>>>
where
    Const<N>: nalgebra::DimSub<nalgebra::U1>,
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<<Const<N> as nalgebra::DimSub<nalgebra::U1>>::Output>,
{
    let condition = symmetric_condition(m);
    if !(condition <= max_condition) {
        return Err(Error::IllConditioned { what, condition });
    }
    Cholesky::new(*m).ok_or(Error::IllConditioned {
        what,
        condition: f64::INFINITY,
    })
}

/// Solves a general square system after checking its 2-norm condition number.
pub fn guarded_solve<const N: usize>(
    m: &SMatrix<f64, N, N>,
    rhs: &SVector<f64, N>,
    what: &'static str,
    max_condition: f64,
) -> Result<SVector<f64, N>>
where
    Const<N>: DimMin<Const<N>, Output = Const<N>>,
{
    let condition = condition_number(m);
    if !(condition <= max_condition) {
        return Err(Error::IllConditioned { what, condition });
    }
    m.lu().solve(rhs).ok_or(Error::IllConditioned {
        what,
        condition: f64::INFINITY,
    })
}

pub fn symmetrize<const N: usize>(m: &mut SMatrix<f64, N, N>) {
    let t = m.transpose();
    *m = (*m + t) * 0.5;
}

/// Largest absolute entry of `m - mᵀ`.
pub fn asymmetry<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    (m - m.transpose()).amax()
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}
