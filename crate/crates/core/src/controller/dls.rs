use nalgebra::Matrix3;

use crate::error::ControlError;
use crate::geometry::Vec3;
use crate::kinematics::{Jacobian, JointVector};

/// Relative eigenvalue floor below which an undamped `J J^T` counts as singular.
const SINGULAR_RCOND: f64 = 1e-12;

/// Damped least-squares joint velocities: `J^T (J J^T + lambda^2 I)^-1 v`.
///
/// Minimizes `|J qdot - v|^2 + lambda^2 |qdot|^2`. With `lambda = 0` this is
/// the minimum-norm pseudoinverse solution and fails on rank-deficient `J`.
pub fn dls_solve(jac: &Jacobian, v: &Vec3, lambda: f64) -> Result<JointVector, ControlError> {
    let gram = jac * jac.transpose();
    let damped = gram + Matrix3::identity() * (lambda * lambda);
    if lambda == 0.0 {
        let eig = gram.symmetric_eigenvalues();
        let max = eig.amax();
        if !(max > 0.0) || eig.min() <= SINGULAR_RCOND * max {
            return Err(ControlError::Singular);
        }
    }
    let chol = damped.cholesky().ok_or(ControlError::Singular)?;
    Ok(jac.transpose() * chol.solve(v))
}
