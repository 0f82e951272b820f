//! Dense complex matrix helpers on top of faer.

use faer::{c64, Mat, Side};

pub type CMat = Mat<c64>;

pub const I: c64 = c64 { re: 0.0, im: 1.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

#[inline]
pub fn cx(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn zeros(n: usize, m: usize) -> CMat {
    Mat::zeros(n, m)
}

pub fn from_rows(rows: &[&[c64]]) -> CMat {
    let n = rows.len();
    let m = if n == 0 { 0 } else { rows[0].len() };
    Mat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn from_real(n: usize, m: usize, f: impl Fn(usize, usize) -> f64) -> CMat {
    Mat::from_fn(n, m, |i, j| cx(f(i, j), 0.0))
}

pub fn diag(d: &[c64]) -> CMat {
    Mat::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { ZERO })
}

pub fn diag_real(d: &[f64]) -> CMat {
    Mat::from_fn(d.len(), d.len(), |i, j| if i == j { cx(d[i], 0.0) } else { ZERO })
}

/// Pauli matrices: index 0 is the identity.
pub fn pauli(k: usize) -> CMat {
    let (o, z, i) = (ONE, ZERO, I);
    match k {
        0 => from_rows(&[&[o, z], &[z, o]]),
        1 => from_rows(&[&[z, o], &[o, z]]),
        2 => from_rows(&[&[z, -i], &[i, z]]),
        3 => from_rows(&[&[o, z], &[z, -o]]),
        _ => panic!("pauli index {k} out of range"),
    }
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kron(b)
}

pub fn kron_all(factors: &[CMat]) -> CMat {
    let mut out = eye(1);
    for f in factors {
        out = kron(&out, f);
    }
    out
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn conj(a: &CMat) -> CMat {
    a.conjugate().to_owned()
}

pub fn transpose(a: &CMat) -> CMat {
    a.transpose().to_owned()
}

pub fn scale(a: &CMat, z: c64) -> CMat {
    a * faer::Scale(z)
}

pub fn scale_re(a: &CMat, x: f64) -> CMat {
    a * faer::Scale(cx(x, 0.0))
}

pub fn trace(a: &CMat) -> c64 {
    let mut t = ZERO;
    for i in 0..a.nrows().min(a.ncols()) {
        t += a[(i, i)];
    }
    t
}

pub fn block_diag(blocks: &[&CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(n, m);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                out[(r + i, c + j)] = b[(i, j)];
            }
        }
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Writes `b` into `a` at offset (r, c).
pub fn set_block(a: &mut CMat, r: usize, c: usize, b: &CMat) {
    for i in 0..b.nrows() {
        for j in 0..b.ncols() {
            a[(r + i, c + j)] = b[(i, j)];
        }
    }
}

pub fn get_block(a: &CMat, r: usize, c: usize, n: usize, m: usize) -> CMat {
    a.submatrix(r, c, n, m).to_owned()
}

/// Submatrix on an arbitrary index set.
pub fn select(a: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

pub fn columns(a: &CMat, cols: &[usize]) -> CMat {
    Mat::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

pub fn frobenius(a: &CMat) -> f64 {
    a.norm_l2()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.norm_max()
}

/// Spectral norm. Exact below 160 rows, converged power iteration on A*A above;
/// returns the Frobenius bound once that is at most 1e-12.
pub fn op_norm(a: &CMat) -> f64 {
    let (n, m) = (a.nrows(), a.ncols());
    if n == 0 || m == 0 {
        return 0.0;
    }
    let fro = a.norm_l2();
    // Frobenius bounds the spectral norm; below this level the difference is immaterial
    if fro <= 1e-12 {
        return fro;
    }
    if n.max(m) <= 160 {
        return a
            .singular_values()
            .map(|s| s.into_iter().fold(0.0, f64::max))
            .unwrap_or(fro);
    }
    // deterministic start with no special alignment
    let mut v = Mat::<c64>::from_fn(m, 1, |i, _| cx(1.0 + 0.37 * ((i * 7919) % 101) as f64, 0.1 * ((i * 31) % 17) as f64));
    let nv = v.norm_l2();
    v = scale_re(&v, 1.0 / nv);
    let ah = a.adjoint().to_owned();
    let mut est = 0.0;
    for _ in 0..300 {
        let w = a * &v;
        let z = &ah * &w;
        let nz = z.norm_l2();
        if nz == 0.0 {
            return 0.0;
        }
        let new = nz.sqrt();
        v = scale_re(&z, 1.0 / nz);
        if (new - est).abs() <= 1e-9 * new {
            est = new;
            break;
        }
        est = new;
    }
    est.min(fro)
}

pub fn sub(a: &CMat, b: &CMat) -> CMat {
    a - b
}

pub fn comm(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticomm(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn dist(a: &CMat, b: &CMat) -> f64 {
    op_norm(&(a - b))
}

/// Hermitian eigendecomposition, eigenvalues ascending.
pub fn eigh(h: &CMat) -> (Vec<f64>, CMat) {
    let e = h
        .self_adjoint_eigen(Side::Lower)
        .expect("self-adjoint eigendecomposition failed to converge");
    let vals = (0..h.nrows()).map(|i| e.S().column_vector()[i].re).collect();
    (vals, e.U().to_owned())
}

pub fn eigvalsh(h: &CMat) -> Vec<f64> {
    h.self_adjoint_eigenvalues(Side::Lower)
        .expect("self-adjoint eigenvalues failed to converge")
}

/// Hermitian part (A + A*)/2, used to scrub rounding asymmetry before eigh.
pub fn hermitian_part(a: &CMat) -> CMat {
    scale_re(&(a + a.adjoint()), 0.5)
}

/// Applies f to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(h: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, u) = eigh(h);
    let fv: Vec<f64> = vals.iter().map(|&x| f(x)).collect();
    &u * diag_real(&fv) * u.adjoint()
}

/// Unitary polar factor of a square matrix.
pub fn polar_unitary(a: &CMat) -> CMat {
    let svd = a.svd().expect("svd failed to converge");
    svd.U() * svd.V().adjoint()
}

/// Orthonormal basis of the eigenspace of a normal matrix `a` at eigenvalue `lambda`,
/// via the Hermitian matrix (a - λ)*(a - λ).
pub fn eigenspace(a: &CMat, lambda: c64, tol: f64) -> CMat {
    let n = a.nrows();
    let shifted = a - scale(&eye(n), lambda);
    let h = hermitian_part(&(shifted.adjoint() * &shifted));
    let (vals, u) = eigh(&h);
    let cols: Vec<usize> = (0..n).filter(|&i| vals[i] < tol).collect();
    columns(&u, &cols)
}

/// Numerical rank from singular values.
pub fn rank(a: &CMat, tol: f64) -> usize {
    a.singular_values()
        .map(|s| s.into_iter().filter(|&x| x > tol).count())
        .unwrap_or(0)
}

/// Matrix exponential of a skew-Hermitian matrix.
pub fn expm_skew(a: &CMat) -> CMat {
    // a = -i h with h Hermitian
    let h = hermitian_part(&scale(a, I));
    let (vals, u) = eigh(&h);
    let d: Vec<c64> = vals.iter().map(|&x| cx(x.cos(), -x.sin())).collect();
    &u * diag(&d) * u.adjoint()
}

/// Permutation matrix sending basis vector j to perm[j].
pub fn permutation(perm: &[usize]) -> CMat {
    let n = perm.len();
    let mut p = zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        p[(i, j)] = ONE;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let xy = pauli(1) * pauli(2);
        assert!(dist(&xy, &scale(&pauli(3), I)) < 1e-15);
        for k in 1..4 {
            assert!(dist(&(pauli(k) * pauli(k)), &eye(2)) < 1e-15);
        }
    }

    #[test]
    fn op_norm_paths_agree() {
        let n = 200;
        let a = Mat::from_fn(n, n, |i, j| cx(((i * 13 + j * 7) % 11) as f64 - 5.0, ((i + 2 * j) % 5) as f64 - 2.0));
        let exact = a.singular_values().unwrap().into_iter().fold(0.0, f64::max);
        assert!((op_norm(&a) - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn expm_skew_is_unitary() {
        let h = from_rows(&[&[cx(1.0, 0.0), cx(0.5, 0.2)], &[cx(0.5, -0.2), cx(-0.3, 0.0)]]);
        let a = scale(&h, -I);
        let u = expm_skew(&a);
        assert!(dist(&(u.adjoint() * &u), &eye(2)) < 1e-13);
    }
}
