use nalgebra::DMatrix;

use crate::{IntegratorError, OdeSystem};

/// Forward-difference Jacobian of `sys` at `(t, y)`.
///
/// Column `j` is `(f(y + h_j e_j) - f(y)) / h_j` with
/// `h_j = perturbation * max(|y_j|, floor_j)`. `f0` must hold `f(t, y)`.
/// Returns the matrix and the number of right-hand side evaluations spent.
pub fn jacobian_fd<S: OdeSystem + ?Sized>(
    sys: &S,
    t: f64,
    y: &[f64],
    f0: &[f64],
    floor: &[f64],
    perturbation: f64,
) -> Result<(DMatrix<f64>, usize), IntegratorError> {
    let n = y.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut yp = y.to_vec();
    let mut f1 = vec![0.0; n];
    for j in 0..n {
        let yj = y[j];
        let step = perturbation * yj.abs().max(floor[j]);
        yp[j] = yj + step;
        // Use the representable increment.
        let h = yp[j] - yj;
        sys.rhs(t, &yp, &mut f1)
            .map_err(|source| IntegratorError::Rhs { t, source })?;
        yp[j] = yj;
        let mut col = jac.column_mut(j);
        for i in 0..n {
            let v = (f1[i] - f0[i]) / h;
            if !v.is_finite() {
                return Err(IntegratorError::NonFiniteJacobian {
                    index: j,
                    name: sys.state_name(j),
                });
            }
            col[i] = v;
        }
    }
    Ok((jac, n))
}
