//! Complex vector helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// Hermitian inner product `sum a_j conj(b_j)`.
pub fn hermitian(a: &CVector, b: &CVector) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

/// Holomorphic pairing `sum a_j b_j`, the action of a (1,0)-covector on a vector.
pub fn pairing(a: &CVector, b: &CVector) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &CVector) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn basis(n: usize, j: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[j] = C64::new(1.0, 0.0);
    v
}

pub fn from_reals(re: &[f64]) -> CVector {
    CVector::from_iterator(re.len(), re.iter().map(|&x| C64::new(x, 0.0)))
}

/// Interleaved real coordinates `(x_1, y_1, ..., x_n, y_n)`.
pub fn to_real(z: &CVector) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn from_real(x: &[f64]) -> CVector {
    CVector::from_iterator(x.len() / 2, x.chunks(2).map(|p| C64::new(p[0], p[1])))
}

/// `U U^*` distance from the identity, in max-entry norm.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let prod = u * u.adjoint();
    let n = u.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Haar-ish random unitary: QR of a complex Gaussian matrix with the phases of
/// `R`'s diagonal pushed into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Orthonormal completion: returns `n` orthonormal vectors whose leading
/// entries are `leading` (assumed orthonormal) followed by Gram-Schmidt
/// completions drawn from the standard basis.
pub fn complete_basis(leading: &[CVector], n: usize) -> Vec<CVector> {
    let mut out: Vec<CVector> = leading.to_vec();
    for j in 0..n {
        if out.len() == n {
            break;
        }
        let mut v = basis(n, j);
        for b in &out {
            let c = hermitian(&v, b);
            v -= b * c;
        }
        // second pass for numerical orthogonality
        for b in &out {
            let c = hermitian(&v, b);
            v -= b * c;
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            out.push(v / C64::new(nv, 0.0));
        }
    }
    out
}
