use crate::error::{Error, Result};
use crate::functional::{exponents, normalizing_scale};
use crate::numeric::sphere_area;

/// `Y_{1,0}` of the round sphere: `n(n−1)·ω_n^{2/n}`.
pub fn closed_form_sphere(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf - 1.0) * sphere_area(n).powf(2.0 / nf)
}

/// Reference values for the round hemisphere at `Y_{λ,1−λ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HemisphereClosedForm {
    /// `n(n−2)/4 · V / (λV^{(n−2)/n} + (1−λ)A^{(n−2)/(n−1)})`.
    pub escobar_formula: f64,
    /// `escobar_formula` times `4(n−1)/(n−2)`, the ratio between the two
    /// gradient normalizations.
    pub audit_rescaled: f64,
    /// Energy of the normalized constant field on the hemisphere: the exact
    /// value at λ = 1, an upper bound otherwise.
    pub constant_field: f64,
    /// Energy of the normalized constant field on the conformally equivalent
    /// unit ball: the exact value at λ = 0, an upper bound otherwise.
    pub ball_constant_field: f64,
}

impl HemisphereClosedForm {
    /// The smaller of the two upper bounds.
    pub fn upper_bound(&self) -> f64 {
        self.constant_field.min(self.ball_constant_field)
    }
}

pub fn closed_form_hemisphere(n: usize, lambda: f64) -> Result<HemisphereClosedForm> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("dimension {n} < 3")));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("λ = {lambda} is outside [0, 1]")));
    }
    let nf = n as f64;
    let vol = 0.5 * sphere_area(n);
    let area = sphere_area(n - 1);
    let denom = lambda * vol.powf((nf - 2.0) / nf) + (1.0 - lambda) * area.powf((nf - 2.0) / (nf - 1.0));
    let escobar_formula = nf * (nf - 2.0) / 4.0 * vol / denom;
    let (p, q) = exponents(n);
    let c = normalizing_scale(lambda * vol, (1.0 - lambda) * area, p, q)?;
    // unit ball: R = 0, H = 1 on the boundary sphere
    let ball_vol = area / nf;
    let cb = normalizing_scale(lambda * ball_vol, (1.0 - lambda) * area, p, q)?;
    Ok(HemisphereClosedForm {
        escobar_formula,
        audit_rescaled: escobar_formula * 4.0 * (nf - 1.0) / (nf - 2.0),
        constant_field: nf * (nf - 1.0) * c * c * vol,
        ball_constant_field: 2.0 * (nf - 1.0) * cb * cb * area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_values() {
        assert!((closed_form_sphere(3) - 6.0 * (2.0 * PI * PI).powf(2.0 / 3.0)).abs() < 1e-12);
        assert!((closed_form_sphere(3) - 43.82).abs() < 0.01);
        assert!((closed_form_sphere(4) - 61.56).abs() < 0.01);
    }

    #[test]
    fn hemisphere_endpoints() {
        let one = closed_form_hemisphere(3, 1.0).unwrap();
        assert!((one.escobar_formula - 0.75 * PI.powf(4.0 / 3.0)).abs() < 1e-12);
        assert!((one.constant_field - 6.0 * PI.powf(4.0 / 3.0)).abs() < 1e-10);
        assert!((one.audit_rescaled - one.constant_field).abs() < 1e-10);
        assert_eq!(one.upper_bound(), one.constant_field);
        let zero = closed_form_hemisphere(3, 0.0).unwrap();
        assert!((zero.escobar_formula - 2.088).abs() < 1e-3);
        // the rescaled formula is the hemisphere constant, not the ball optimum
        assert!((zero.audit_rescaled - zero.constant_field).abs() < 1e-10);
        assert!((zero.ball_constant_field - 4.0 * (4.0 * PI).sqrt()).abs() < 1e-10);
        assert_eq!(zero.upper_bound(), zero.ball_constant_field);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(closed_form_hemisphere(2, 0.5).is_err());
        assert!(closed_form_hemisphere(3, 1.5).is_err());
    }
}
