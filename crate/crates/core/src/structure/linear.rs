use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::{ContactHamiltonian, PhasePoint};

/// Jacobian of `X_H` at `z` in the coordinates `(x, p, u)`.
pub fn contact_jacobian<H: ContactHamiltonian + ?Sized>(model: &H, z: &PhasePoint) -> DMatrix<f64> {
    let n = model.dim();
    let s = model.second(z);
    let hx = model.grad_x(z);
    let hu = model.d_u(z);
    let p = z.p();
    let m = 2 * n + 1;
    let mut j = DMatrix::zeros(m, m);
    for i in 0..n {
        for k in 0..n {
            // ẋ_i = ∂H/∂p_i
            j[(i, k)] = s.xp[k][i];
            j[(i, n + k)] = s.pp[i][k];
            // ṗ_i = -∂H/∂x_i - (∂H/∂u) p_i
            j[(n + i, k)] = -s.xx[i][k] - p[i] * s.xu[k];
            j[(n + i, n + k)] = -s.xp[i][k] - p[i] * s.pu[k] - if i == k { hu } else { 0.0 };
        }
        j[(i, 2 * n)] = s.pu[i];
        j[(n + i, 2 * n)] = -s.xu[i] - p[i] * s.uu;
    }
    // u̇ = <∂H/∂p, p> - H
    for k in 0..n {
        j[(2 * n, k)] = (0..n).map(|l| s.xp[k][l] * p[l]).sum::<f64>() - hx[k];
        j[(2 * n, n + k)] = (0..n).map(|l| s.pp[l][k] * p[l]).sum::<f64>();
    }
    j[(2 * n, 2 * n)] = (0..n).map(|l| s.pu[l] * p[l]).sum::<f64>() - hu;
    j
}

/// Eigenvalues sorted by real part, then imaginary part.
pub fn spectrum(j: &DMatrix<f64>) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> = j.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

/// Real directions spanning the eigenspace of `mu`: eigenvectors for a real
/// eigenvalue, their real and imaginary parts for a complex one. A repeated
/// eigenvalue contributes its whole (geometric) eigenspace. The result is
/// orthonormal.
pub fn eigen_directions(j: &DMatrix<f64>, mu: Complex64) -> Vec<Vec<f64>> {
    let m = j.nrows();
    let a = DMatrix::from_fn(m, m, |r, c| {
        Complex64::new(j[(r, c)], 0.0) - if r == c { mu } else { Complex64::new(0.0, 0.0) }
    });
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let s = &svd.singular_values;
    let s_min = s.iter().copied().fold(f64::INFINITY, f64::min);
    let s_max = s.iter().copied().fold(0.0, f64::max);
    let cutoff = s_min.max(1e-9 * s_max.max(1.0));
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for idx in (0..s.len()).filter(|&i| s[i] <= cutoff) {
        let v: Vec<Complex64> = (0..m).map(|c| vt[(idx, c)].conj()).collect();
        // rotate so the largest entry is real; keeps real eigenvectors real
        let pivot = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(Complex64::new(1.0, 0.0));
        let phase = pivot.conj() / pivot.norm();
        let v: Vec<Complex64> = v.iter().map(|c| c * phase).collect();
        dirs.push(v.iter().map(|c| c.re).collect());
        if mu.im.abs() > 1e-12 {
            dirs.push(v.iter().map(|c| c.im).collect());
        }
    }
    // Gram-Schmidt, dropping dependent vectors
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut d in dirs {
        for b in &basis {
            let dot: f64 = d.iter().zip(b).map(|(x, y)| x * y).sum();
            d.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(d.iter().map(|x| x / norm).collect());
        }
    }
    basis
}
