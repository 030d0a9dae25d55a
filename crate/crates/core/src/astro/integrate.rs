//! Classical fixed-step fourth-order Runge–Kutta.

use nalgebra::SVector;

use super::AstroError;

/// One RK4 step of `ẋ = deriv(t, x)` from `t` to `t + dt`.
pub fn rk4_step<const N: usize, F>(
    mut deriv: F,
    state: &SVector<f64, N>,
    t: f64,
    dt: f64,
) -> Result<SVector<f64, N>, AstroError>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>, AstroError>,
{
    if !(dt > 0.0) {
        return Err(AstroError::NonPositiveStep);
    }
    let check = |k: SVector<f64, N>, at: f64| {
        if k.iter().all(|x| x.is_finite()) {
            Ok(k)
        } else {
            Err(AstroError::NonFinite(at))
        }
    };
    let half = 0.5 * dt;
    let k1 = check(deriv(t, state)?, t)?;
    let k2 = check(deriv(t + half, &(state + half * k1))?, t + half)?;
    let k3 = check(deriv(t + half, &(state + half * k2))?, t + half)?;
    let k4 = check(deriv(t + dt, &(state + dt * k3))?, t + dt)?;
    Ok(state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector1;

    #[test]
    fn exponential_single_step() {
        // RK4 on ẋ = x reproduces the Taylor series to 4th order:
        // 1 + h + h²/2 + h³/6 + h⁴/24 = 1.105170833333...
        let x = rk4_step(|_, x| Ok(*x), &Vector1::new(1.0), 0.0, 0.1).unwrap();
        assert!((x[0] - 1.1051708333333333).abs() < 1e-15);
    }

    #[test]
    fn zero_derivative_keeps_state() {
        let s = nalgebra::Vector3::new(1.0, -2.0, 3.0);
        let x = rk4_step(|_, _| Ok(nalgebra::Vector3::zeros()), &s, 5.0, 0.3).unwrap();
        assert_eq!(x, s);
    }

    #[test]
    fn bad_step_and_non_finite() {
        let s = Vector1::new(1.0);
        assert_eq!(rk4_step(|_, x| Ok(*x), &s, 0.0, 0.0), Err(AstroError::NonPositiveStep));
        assert_eq!(
            rk4_step(|_, _| Ok(Vector1::new(f64::NAN)), &s, 2.0, 1.0),
            Err(AstroError::NonFinite(2.0))
        );
    }
}
