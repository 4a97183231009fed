//! Real polynomials stored as coefficient vectors in descending powers.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::scalar::{cabs, lit, real, Real};

/// Drops exactly-zero leading coefficients; the zero polynomial becomes `[0]`.
pub fn trim<T: Real>(p: &[T]) -> Vec<T> {
    match p.iter().position(|c| *c != T::zero()) {
        Some(i) => p[i..].to_vec(),
        None => vec![T::zero()],
    }
}

/// Drops leading coefficients below `rel_tol * max|p_i|`.
pub fn trim_relative<T: Real>(p: &[T], rel_tol: T) -> Vec<T> {
    let scale = p.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    if scale == T::zero() {
        return vec![T::zero()];
    }
    match p.iter().position(|c| c.abs() > rel_tol * scale) {
        Some(i) => p[i..].to_vec(),
        None => vec![T::zero()],
    }
}

pub fn degree<T: Real>(p: &[T]) -> usize {
    trim(p).len() - 1
}

pub fn is_zero<T: Real>(p: &[T]) -> bool {
    p.iter().all(|c| *c == T::zero())
}

/// Horner evaluation at a complex point.
pub fn eval<T: Real>(p: &[T], z: Complex<T>) -> Complex<T> {
    p.iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, c| acc * z + real(*c))
}

pub fn eval_real<T: Real>(p: &[T], x: T) -> T {
    p.iter().fold(T::zero(), |acc, c| acc * x + *c)
}

fn eval_with_derivative<T: Real>(p: &[T], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    p.iter().fold((zero, zero), |(v, d), c| (v * z + real(*c), d * z + v))
}

pub fn mul<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += *x * *y;
        }
    }
    out
}

/// Sum aligned at the constant term.
pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().max(b.len());
    let mut out = vec![T::zero(); n];
    for (i, c) in a.iter().enumerate() {
        out[n - a.len() + i] += *c;
    }
    for (i, c) in b.iter().enumerate() {
        out[n - b.len() + i] += *c;
    }
    out
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let neg: Vec<T> = b.iter().map(|c| -*c).collect();
    add(a, &neg)
}

pub fn scale<T: Real>(p: &[T], s: T) -> Vec<T> {
    p.iter().map(|c| *c * s).collect()
}

/// Left-pads with zeros to length `len` (no-op when already longer).
pub fn pad_to<T: Real>(p: &[T], len: usize) -> Vec<T> {
    if p.len() >= len {
        return p.to_vec();
    }
    let mut out = vec![T::zero(); len - p.len()];
    out.extend_from_slice(p);
    out
}

/// Monic polynomial with the given roots. Complex roots are expected in
/// conjugate pairs; the imaginary residue is discarded.
pub fn from_roots<T: Real>(roots: &[Complex<T>]) -> Vec<T> {
    let mut acc = vec![real(T::one())];
    for r in roots {
        let mut next = vec![Complex::new(T::zero(), T::zero()); acc.len() + 1];
        for (i, c) in acc.iter().enumerate() {
            next[i] += *c;
            next[i + 1] -= *c * *r;
        }
        acc = next;
    }
    acc.into_iter().map(|c| c.re).collect()
}

/// Roots via companion-matrix eigenvalues, polished by a few Newton steps.
pub fn roots<T: Real>(p: &[T]) -> Vec<Complex<T>> {
    let p = trim(p);
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = p[0];
    let companion = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -p[j + 1] / lead
        } else if i == j + 1 {
            T::one()
        } else {
            T::zero()
        }
    });
    let mut out: Vec<Complex<T>> = companion.complex_eigenvalues().iter().copied().collect();
    for r in out.iter_mut() {
        *r = polish_root(&p, *r);
    }
    sort_complex(&mut out);
    out
}

fn polish_root<T: Real>(p: &[T], mut z: Complex<T>) -> Complex<T> {
    let mut best = cabs(eval(p, z));
    for _ in 0..4 {
        let (v, d) = eval_with_derivative(p, z);
        if cabs(d) == T::zero() {
            break;
        }
        let cand = z - v / d;
        let val = cabs(eval(p, cand));
        if val < best {
            best = val;
            z = cand;
        } else {
            break;
        }
    }
    // Real polynomials: snap numerically-real roots onto the axis.
    if z.im.abs() <= lit::<T>(1e-12) * (T::one() + cabs(z)) {
        z.im = T::zero();
    }
    z
}

/// Deterministic ordering: by real part, then imaginary part.
pub fn sort_complex<T: Real>(v: &mut [Complex<T>]) {
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_roots_and_back() {
        let r = [real(0.2), real(0.5), Complex::new(0.1, 0.3), Complex::new(0.1, -0.3)];
        let p = from_roots(&r);
        let mut got = roots(&p);
        sort_complex(&mut got);
        let mut want = r.to_vec();
        sort_complex(&mut want);
        for (a, b) in got.iter().zip(&want) {
            assert!(cabs(*a - *b) < 1e-12);
        }
    }

    #[test]
    fn trim_and_degree() {
        assert_eq!(trim(&[0.0, 0.0, 1.0, 2.0]), vec![1.0, 2.0]);
        assert_eq!(trim(&[0.0f64, 0.0]), vec![0.0]);
        assert_eq!(degree(&[0.0, 3.0, 1.0, 0.0]), 2);
        assert_eq!(trim_relative(&[1e-18, 1.0, -1.1], 1e-10), vec![1.0, -1.1]);
    }

    #[test]
    fn arithmetic() {
        assert_eq!(mul(&[1.0, -0.2], &[1.0, -0.5]), vec![1.0, -0.7, 0.1]);
        assert_eq!(add(&[1.0, 2.0, 3.0], &[1.0]), vec![1.0, 2.0, 4.0]);
        assert_eq!(sub(&[1.0], &[1.0, 1.0]), vec![-1.0, 0.0]);
        assert_eq!(eval_real(&[1.0, -0.7, 0.1], 1.0), 0.4);
    }

    #[test]
    fn constant_has_no_roots() {
        assert!(roots(&[3.0]).is_empty());
        assert!(roots(&[0.0, 0.0, 2.0]).is_empty());
    }
}
