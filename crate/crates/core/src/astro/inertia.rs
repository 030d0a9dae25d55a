//! Mass properties and the principal-moment triangle check.

use std::fmt;

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::AstroError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassProperties {
    /// Hub mass, kg.
    pub m_hub: f64,
    /// Inertia about the centre of mass in body axes, kg·m².
    pub inertia: Matrix3<f64>,
}

/// A principal moment larger than the sum of the other two.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleViolation {
    /// Zero-based index of the offending axis.
    pub axis: usize,
    pub moment: f64,
    pub others_sum: f64,
}

impl fmt::Display for TriangleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (j, k) = match self.axis {
            0 => (2, 3),
            1 => (1, 3),
            _ => (1, 2),
        };
        write!(
            f,
            "inertia triangle rule violated on axis {}: I{} + I{} = {} < I{} = {} \
             (the sum of any two principal moments must be at least the third)",
            self.axis + 1,
            j,
            k,
            self.others_sum,
            self.axis + 1,
            self.moment
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InertiaReport {
    pub principal: [f64; 3],
    pub violations: Vec<TriangleViolation>,
}

impl InertiaReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `I_i + I_j >= I_k` over the principal moments. Diagonal input is
/// checked as given; otherwise the matrix is diagonalised first.
pub fn check_inertia(inertia: &Matrix3<f64>) -> Result<InertiaReport, AstroError> {
    let scale = inertia.abs().max().max(f64::MIN_POSITIVE);
    if (inertia - inertia.transpose()).abs().max() > 1e-9 * scale {
        return Err(AstroError::Asymmetric);
    }
    let off_diag = inertia[(0, 1)] != 0.0 || inertia[(0, 2)] != 0.0 || inertia[(1, 2)] != 0.0;
    let principal: [f64; 3] = if off_diag {
        let eig = SymmetricEigen::new(*inertia);
        [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]]
    } else {
        [inertia[(0, 0)], inertia[(1, 1)], inertia[(2, 2)]]
    };
    if principal.iter().any(|&m| !(m > 0.0)) {
        return Err(AstroError::NotPositiveDefinite);
    }
    let violations = (0..3)
        .filter_map(|k| {
            let others_sum = principal[(k + 1) % 3] + principal[(k + 2) % 3];
            (others_sum < principal[k]).then(|| TriangleViolation {
                axis: k,
                moment: principal[k],
                others_sum,
            })
        })
        .collect();
    Ok(InertiaReport { principal, violations })
}
