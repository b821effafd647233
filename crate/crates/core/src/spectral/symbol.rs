//! Real, even Fourier multipliers used by the model operators.

/// A diagonal operator given by its Fourier symbol as a function of `|k|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Symbol {
    /// `|k|^s`, mean mode mapped to zero (velocity convention for `Lambda^s`).
    LambdaPow(f64),
    /// `mu4 |k|^(2 theta)`, the fractional dissipation `mu4 (-Delta)^theta`.
    A0 { theta: f64, mu4: f64 },
    /// `mu4 |k|^2 / (1 + alpha^2 |k|^2)`, the filtered Voigt dissipation
    /// `-mu4 Delta (I - alpha^2 Delta)^-1`.
    VoigtA0 { mu4: f64, alpha: f64 },
    /// `(1 + alpha^2 |k|^2)^(-exponent)`, the Helmholtz filter.
    Helmholtz { exponent: f64, alpha: f64 },
    /// `(1 + alpha^2 |k|^2)^exponent`, inverse of [`Symbol::Helmholtz`].
    InvHelmholtz { exponent: f64, alpha: f64 },
    /// `|k|^(2 s)`, powers of `A1 = -Delta`.
    A1Pow(f64),
}

impl Symbol {
    /// Symbol value at squared wavenumber `k2`.
    pub fn eval(&self, k2: f64) -> f64 {
        match *self {
            Symbol::LambdaPow(s) => {
                if k2 == 0.0 {
                    0.0
                } else {
                    k2.powf(0.5 * s)
                }
            }
            Symbol::A0 { theta, mu4 } => mu4 * pow_or_zero(k2, theta),
            Symbol::VoigtA0 { mu4, alpha } => mu4 * k2 / (1.0 + alpha * alpha * k2),
            Symbol::Helmholtz { exponent, alpha } => (1.0 + alpha * alpha * k2).powf(-exponent),
            Symbol::InvHelmholtz { exponent, alpha } => (1.0 + alpha * alpha * k2).powf(exponent),
            Symbol::A1Pow(s) => pow_or_zero(k2, s),
        }
    }

    /// Negative powers are undefined on the mean mode.
    pub fn needs_zero_mean(&self) -> bool {
        match *self {
            Symbol::LambdaPow(s) | Symbol::A1Pow(s) => s < 0.0,
            Symbol::A0 { theta, .. } => theta < 0.0,
            _ => false,
        }
    }
}

/// `k2^p` with `0^0 = 1` and the mean mode dropped for negative `p`.
fn pow_or_zero(k2: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if k2 == 0.0 {
        0.0
    } else {
        k2.powf(p)
    }
}
