//! Dispersion coefficients of the a,b,c,d Boussinesq family.

use std::fmt;

use crate::error::{Error, Result};

/// `(a, b, c, d)` together with the `(theta^2, nu, mu)` that generated them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub theta2: f64,
    pub nu: f64,
    pub mu: f64,
}

/// Tolerance on `a + b + c + d = 1/3`.
pub const SUM_TOLERANCE: f64 = 1e-14;

/// Theta squared assumed for Bona-Smith when none is given.
pub const DEFAULT_BONA_SMITH_THETA2: f64 = 9.0 / 11.0;

pub fn coefficients(theta2: f64, nu: f64, mu: f64) -> Result<Coefficients> {
    if !(0.0..=1.0).contains(&theta2) {
        return Err(Error::invalid(format!("theta^2 = {theta2} is outside [0, 1]")));
    }
    if !nu.is_finite() || !mu.is_finite() {
        return Err(Error::invalid("nu and mu must be finite"));
    }
    let shallow = 0.5 * (theta2 - 1.0 / 3.0);
    let deep = 0.5 * (1.0 - theta2);
    Ok(Coefficients {
        a: shallow * nu,
        b: shallow * (1.0 - nu),
        c: deep * mu,
        d: deep * (1.0 - mu),
        theta2,
        nu,
        mu,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemFamily {
    BbmBbm,
    BonaSmith,
    KdvKdv,
    General,
}

impl SystemFamily {
    pub const ALL: [SystemFamily; 4] = [
        SystemFamily::BbmBbm,
        SystemFamily::BonaSmith,
        SystemFamily::KdvKdv,
        SystemFamily::General,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemFamily::BbmBbm => "bbm-bbm",
            SystemFamily::BonaSmith => "bona-smith",
            SystemFamily::KdvKdv => "kdv-kdv",
            SystemFamily::General => "general",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        SystemFamily::ALL.into_iter().find(|f| f.name() == s)
    }
}

impl fmt::Display for SystemFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `mu` of the Bona-Smith row, `(4 - 6 theta^2) / (3 (1 - theta^2))`.
pub fn bona_smith_mu(theta2: f64) -> Result<f64> {
    if !(2.0 / 3.0..1.0).contains(&theta2) {
        return Err(Error::invalid(format!(
            "Bona-Smith requires 2/3 <= theta^2 < 1, got {theta2}"
        )));
    }
    Ok((4.0 - 6.0 * theta2) / (3.0 * (1.0 - theta2)))
}

/// Named presets. `theta2` only matters for Bona-Smith.
pub fn family_preset(family: SystemFamily, theta2: Option<f64>) -> Result<Coefficients> {
    let coef = match family {
        SystemFamily::BbmBbm => coefficients(2.0 / 3.0, 0.0, 0.0)?,
        SystemFamily::KdvKdv => coefficients(2.0 / 3.0, 1.0, 1.0)?,
        SystemFamily::BonaSmith => {
            let t = theta2.unwrap_or(DEFAULT_BONA_SMITH_THETA2);
            coefficients(t, 0.0, bona_smith_mu(t)?)?
        }
        SystemFamily::General => {
            return Err(Error::invalid("the general family needs explicit theta^2, nu and mu"));
        }
    };
    let violations = validate(&coef);
    if let Some(v) = violations.first() {
        return Err(Error::invalid(format!("{family} preset violates {v}")));
    }
    Ok(coef)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Violation {
    /// `a + b + c + d - 1/3`.
    Sum { excess: f64 },
    /// `c + d` when negative.
    NegativeCPlusD { value: f64 },
    Theta2OutOfRange { theta2: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Sum { excess } => write!(f, "a+b+c+d = 1/3 (off by {excess:e})"),
            Violation::NegativeCPlusD { value } => write!(f, "c+d >= 0 (c+d = {value})"),
            Violation::Theta2OutOfRange { theta2 } => write!(f, "0 <= theta^2 <= 1 (theta^2 = {theta2})"),
        }
    }
}

/// Every constraint the coefficients break; empty when admissible.
pub fn validate(c: &Coefficients) -> Vec<Violation> {
    let mut out = Vec::new();
    let excess = c.a + c.b + c.c + c.d - 1.0 / 3.0;
    if !(excess.abs() <= SUM_TOLERANCE) {
        out.push(Violation::Sum { excess });
    }
    let cd = c.c + c.d;
    if !(cd >= -SUM_TOLERANCE) {
        out.push(Violation::NegativeCPlusD { value: cd });
    }
    if !(0.0..=1.0).contains(&c.theta2) {
        out.push(Violation::Theta2OutOfRange { theta2: c.theta2 });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bbm_bbm_values() {
        let c = family_preset(SystemFamily::BbmBbm, None).unwrap();
        assert_eq!((c.a, c.c), (0.0, 0.0));
        assert_abs_diff_eq!(c.b, 1.0 / 6.0, epsilon = 1e-16);
        assert_abs_diff_eq!(c.d, 1.0 / 6.0, epsilon = 1e-16);
    }

    #[test]
    fn kdv_kdv_values() {
        let c = family_preset(SystemFamily::KdvKdv, None).unwrap();
        assert_abs_diff_eq!(c.a, 1.0 / 6.0, epsilon = 1e-16);
        assert_abs_diff_eq!(c.c, 1.0 / 6.0, epsilon = 1e-16);
        assert_eq!((c.b, c.d), (0.0, 0.0));
    }

    #[test]
    fn bona_smith_nine_elevenths() {
        let c = family_preset(SystemFamily::BonaSmith, Some(9.0 / 11.0)).unwrap();
        assert_abs_diff_eq!(c.mu, -5.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.a, 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(c.b, 8.0 / 33.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.c, -5.0 / 33.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.d, 8.0 / 33.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.c + c.d, 3.0 / 33.0, epsilon = 1e-15);
        assert!(validate(&c).is_empty());
    }

    #[test]
    fn bona_smith_at_two_thirds_is_bbm_bbm() {
        let bs = family_preset(SystemFamily::BonaSmith, Some(2.0 / 3.0)).unwrap();
        let bbm = family_preset(SystemFamily::BbmBbm, None).unwrap();
        assert_eq!(bs.mu, 0.0);
        assert_eq!((bs.a, bs.b, bs.c, bs.d), (bbm.a, bbm.b, bbm.c, bbm.d));
    }

    #[test]
    fn bona_smith_rejects_theta_one() {
        assert!(family_preset(SystemFamily::BonaSmith, Some(1.0)).is_err());
        assert!(family_preset(SystemFamily::BonaSmith, Some(0.5)).is_err());
    }

    #[test]
    fn theta_range_is_checked() {
        assert!(matches!(coefficients(1.2, 0.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(coefficients(-0.1, 0.0, 0.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn hand_built_coefficients_report_sum_violation() {
        let c = Coefficients { a: 1.0, b: 1.0, c: 1.0, d: 1.0, theta2: 0.5, nu: 0.0, mu: 0.0 };
        let v = validate(&c);
        assert_eq!(v.len(), 1);
        match v[0] {
            Violation::Sum { excess } => assert_abs_diff_eq!(excess, 4.0 - 1.0 / 3.0, epsilon = 1e-14),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_c_plus_d_is_reported_not_rejected() {
        let c = Coefficients { a: 0.2, b: 0.3, c: -0.5, d: 1.0 / 3.0, theta2: 0.5, nu: 0.0, mu: 0.0 };
        assert!(matches!(validate(&c).as_slice(), [Violation::NegativeCPlusD { .. }]));
    }
}
