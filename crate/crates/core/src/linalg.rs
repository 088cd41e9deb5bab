//! Small Krylov solvers on plain vectors.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[derive(Clone, Debug)]
pub struct Solve {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `||b - A x|| / ||b||`.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Preconditioned conjugate gradients for a symmetric positive
/// (semi-)definite operator. `project` is applied to every residual so
/// that iterates stay in a chosen complement of the nullspace.
pub fn pcg<A, P>(
    apply: A,
    b: &[f64],
    x0: Option<&[f64]>,
    inv_diag: Option<&[f64]>,
    project: P,
    tol: f64,
    max_iter: usize,
) -> Solve
where
    A: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&mut [f64]),
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    if bnorm == 0.0 {
        return Solve {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let ax = apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    project(&mut r);
    let precondition = |r: &[f64]| -> Vec<f64> {
        match inv_diag {
            Some(d) => r.iter().zip(d).map(|(ri, di)| ri * di).collect(),
            None => r.to_vec(),
        }
    };
    let mut z = precondition(&r);
    project(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut rel = norm(&r) / bnorm;
    let mut it = 0;
    while rel > tol && it < max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let a = rz / pap;
        axpy(&mut x, a, &p);
        axpy(&mut r, -a, &ap);
        project(&mut r);
        it += 1;
        rel = norm(&r) / bnorm;
        z = precondition(&r);
        project(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    // Recompute the true residual to guard against drift in the recurrence.
    let ax = apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    project(&mut r);
    let rel = norm(&r) / bnorm;
    Solve {
        x,
        iterations: it,
        relative_residual: rel,
        converged: rel <= tol,
    }
}

/// CGLS for `min ||A x - b||`; started from zero it converges to the
/// minimum-norm solution of a consistent system.
pub fn cgls<A, T>(apply: A, apply_t: T, b: &[f64], n: usize, tol: f64, max_iter: usize) -> Solve
where
    A: Fn(&[f64]) -> Vec<f64>,
    T: Fn(&[f64]) -> Vec<f64>,
{
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Solve {
            x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let mut r = b.to_vec();
    let mut s = apply_t(&r);
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    let gamma0 = gamma;
    let mut it = 0;
    while it < max_iter && norm(&r) / bnorm > tol && gamma > gamma0 * 1e-300 {
        let q = apply(&p);
        let qq = dot(&q, &q);
        if qq == 0.0 {
            break;
        }
        let a = gamma / qq;
        axpy(&mut x, a, &p);
        axpy(&mut r, -a, &q);
        s = apply_t(&r);
        let gamma_new = dot(&s, &s);
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
        it += 1;
    }
    let ax = apply(&x);
    let rel = norm(&b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<_>>()) / bnorm;
    Solve {
        x,
        iterations: it,
        relative_residual: rel,
        converged: rel <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcg_solves_a_tridiagonal_system() {
        let n = 20;
        let apply = |x: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let l = if i > 0 { x[i - 1] } else { 0.0 };
                    let r = if i + 1 < n { x[i + 1] } else { 0.0 };
                    3.0 * x[i] - l - r
                })
                .collect()
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let s = pcg(apply, &b, None, None, |_| {}, 1e-14, 100);
        assert!(s.converged);
        let ax = apply(&s.x);
        assert!(ax.iter().zip(&b).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn cgls_finds_minimum_norm_solution() {
        // x0 + x1 = 2 has minimum-norm solution (1, 1).
        let s = cgls(
            |x: &[f64]| vec![x[0] + x[1]],
            |r: &[f64]| vec![r[0], r[0]],
            &[2.0],
            2,
            1e-14,
            10,
        );
        assert!((s.x[0] - 1.0).abs() < 1e-14 && (s.x[1] - 1.0).abs() < 1e-14);
    }
}
