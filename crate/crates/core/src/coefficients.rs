//! Model and Leslie parameters, the named presets, constraint validation and
//! coercivity constants of the spectral symbols.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::{Grid, Symbol};

/// Form of the dissipation operator `A0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Dissipation {
    /// `mu4 (-Delta)^theta`.
    #[default]
    Fractional,
    /// `-mu4 Delta (I - alpha^2 Delta)^-1`.
    Voigt,
}

/// Which extra term the `chi = 1` advection form carries.
///
/// With `v = Mu`, `w = Qu` and `((grad a)^T b)_i = sum_j d_i a_j b_j`:
/// - `Conservative`: `P[(w . grad) v + (grad w)^T v]`, the Lagrangian
///   averaged form; `<B0(u, u), Qu> = 0` holds for it.
/// - `Literal`: `P[(v . grad) w + (grad w)^T v]`.
/// - `Transposed`: `P[(v . grad) w + (grad v)^T w]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChiVariant {
    #[default]
    Conservative,
    Literal,
    Transposed,
}

/// Smoothing exponents and operator choices selecting one regularized model.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    pub theta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub chi: u8,
    #[cfg_attr(feature = "serde", serde(default))]
    pub chi_variant: ChiVariant,
    pub alpha: f64,
    pub mu4: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub dissipation: Dissipation,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        for (name, v) in [
            ("theta", self.theta),
            ("theta1", self.theta1),
            ("theta2", self.theta2),
            ("alpha", self.alpha),
            ("mu4", self.mu4),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        if self.theta < 0.0 {
            return bad(format!("theta must be >= 0, got {}", self.theta));
        }
        if self.theta2 < 0.0 {
            return bad(format!("theta2 must be >= 0, got {}", self.theta2));
        }
        if self.chi > 1 {
            return bad(format!("chi must be 0 or 1, got {}", self.chi));
        }
        if self.alpha <= 0.0 {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        if self.mu4 <= 0.0 {
            return bad(format!("mu4 must be > 0, got {}", self.mu4));
        }
        if self.dissipation == Dissipation::Voigt && self.theta != 0.0 {
            return bad("the Voigt dissipation requires theta = 0".into());
        }
        Ok(())
    }

    /// Symbol of `A0`.
    pub fn a0_symbol(&self) -> Symbol {
        match self.dissipation {
            Dissipation::Fractional => Symbol::A0 {
                theta: self.theta,
                mu4: self.mu4,
            },
            Dissipation::Voigt => Symbol::VoigtA0 {
                mu4: self.mu4,
                alpha: self.alpha,
            },
        }
    }

    /// Symbol of the filter `M = (I - alpha^2 Delta)^-theta1`.
    pub fn m_symbol(&self) -> Symbol {
        Symbol::Helmholtz {
            exponent: self.theta1,
            alpha: self.alpha,
        }
    }

    /// Symbol of the filter `Q = (I - alpha^2 Delta)^-theta2`.
    pub fn q_symbol(&self) -> Symbol {
        Symbol::Helmholtz {
            exponent: self.theta2,
            alpha: self.alpha,
        }
    }

    /// `A0`, `M`, `Q` as power symbols in `x = |k|^2`.
    fn a0_power(&self) -> PowerSymbol {
        match self.dissipation {
            Dissipation::Fractional => PowerSymbol::new(self.mu4, self.theta, 0.0),
            Dissipation::Voigt => PowerSymbol::new(self.mu4, 1.0, 1.0),
        }
    }

    fn q_power(&self) -> PowerSymbol {
        PowerSymbol::new(1.0, 0.0, self.theta2)
    }
}

/// The six named members of the model family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    NseEl,
    LerayEl,
    MlEl,
    SbmEl,
    NsvEl,
    NsEl,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::NseEl,
        Preset::LerayEl,
        Preset::MlEl,
        Preset::SbmEl,
        Preset::NsvEl,
        Preset::NsEl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::NseEl => "NSE-EL",
            Preset::LerayEl => "Leray-EL-alpha",
            Preset::MlEl => "ML-EL-alpha",
            Preset::SbmEl => "SBM-EL",
            Preset::NsvEl => "NSV-EL",
            Preset::NsEl => "NS-EL-alpha",
        }
    }

    /// `(theta, theta1, theta2, chi)`.
    pub fn exponents(self) -> (f64, f64, f64, u8) {
        match self {
            Preset::NseEl => (1.0, 0.0, 0.0, 0),
            Preset::LerayEl => (1.0, 1.0, 0.0, 0),
            Preset::MlEl => (1.0, 0.0, 1.0, 0),
            Preset::SbmEl => (1.0, 1.0, 1.0, 0),
            Preset::NsvEl => (0.0, 1.0, 1.0, 0),
            Preset::NsEl => (1.0, 0.0, 1.0, 1),
        }
    }

    pub fn dissipation(self) -> Dissipation {
        match self {
            Preset::NsvEl => Dissipation::Voigt,
            _ => Dissipation::Fractional,
        }
    }

    /// Name of the advection form, `B00` or `B01`.
    pub fn bilinear_form(self) -> &'static str {
        if self.exponents().3 == 0 {
            "B00"
        } else {
            "B01"
        }
    }

    pub fn params(self, alpha: f64, mu4: f64) -> ModelParams {
        let (theta, theta1, theta2, chi) = self.exponents();
        ModelParams {
            theta,
            theta1,
            theta2,
            chi,
            chi_variant: ChiVariant::default(),
            alpha,
            mu4,
            dissipation: self.dissipation(),
        }
    }

    pub fn valid_names() -> String {
        Preset::ALL.map(Preset::name).join(", ")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = |x: &str| x.to_ascii_lowercase().replace(['_', ' '], "-").replace("-α", "-alpha");
        let wanted = norm(s.trim());
        Preset::ALL
            .into_iter()
            .find(|p| norm(p.name()) == wanted)
            .ok_or_else(|| Error::UnknownPreset {
                name: s.to_string(),
                valid: Preset::valid_names(),
            })
    }
}

/// Which constraint set the Leslie coefficients are checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Case {
    /// Parodi's relation holds.
    #[default]
    Parodi,
    /// No Parodi relation; the strict discriminant inequality instead.
    General,
}

impl Case {
    pub fn number(self) -> u8 {
        match self {
            Case::Parodi => 1,
            Case::General => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Case> {
        match n {
            1 => Ok(Case::Parodi),
            2 => Ok(Case::General),
            _ => Err(Error::InvalidParameter(format!("case must be 1 or 2, got {n}"))),
        }
    }
}

/// `lambda1 = mu2 - mu3`, `lambda2 = mu5 - mu6`.
pub fn derive_lambdas(mu2: f64, mu3: f64, mu5: f64, mu6: f64) -> (f64, f64) {
    (mu2 - mu3, mu5 - mu6)
}

/// Leslie viscosity coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeslieCoefficients {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu5: f64,
    pub mu6: f64,
    pub case: Case,
}

impl LeslieCoefficients {
    pub fn new(mu1: f64, mu2: f64, mu3: f64, mu5: f64, mu6: f64, case: Case) -> Self {
        LeslieCoefficients {
            mu1,
            mu2,
            mu3,
            mu5,
            mu6,
            case,
        }
    }

    pub fn lambda1(&self) -> f64 {
        derive_lambdas(self.mu2, self.mu3, self.mu5, self.mu6).0
    }

    pub fn lambda2(&self) -> f64 {
        derive_lambdas(self.mu2, self.mu3, self.mu5, self.mu6).1
    }

    /// Errors unless `lambda1 < 0`; every dynamic operator needs this.
    pub fn require_negative_lambda1(&self) -> Result<f64> {
        let lambda1 = self.lambda1();
        if lambda1 < 0.0 {
            Ok(lambda1)
        } else {
            Err(Error::Lambda1NotNegative { lambda1 })
        }
    }

    /// Coefficient `c` of `||A_Q d||^2` in the dissipation: Case 1 uses
    /// `mu5 + mu6 + lambda2^2 / lambda1`, Case 2 the bound
    /// `mu5 + mu6 + (lambda2 - mu2 - mu3)^2 / lambda1`.
    pub fn aqd_coefficient(&self) -> f64 {
        let l1 = self.lambda1();
        match self.case {
            Case::Parodi => self.mu5 + self.mu6 + self.lambda2().powi(2) / l1,
            Case::General => {
                self.mu5 + self.mu6 + (self.lambda2() - self.mu2 - self.mu3).powi(2) / l1
            }
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_constraints(self)
    }
}

/// One checked inequality; `slack >= 0` (or `> 0` for strict ones) means it
/// holds.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintCheck {
    pub name: &'static str,
    pub slack: f64,
    pub strict: bool,
}

impl ConstraintCheck {
    pub fn satisfied(&self) -> bool {
        if self.strict {
            self.slack > 0.0
        } else {
            self.slack >= 0.0
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub case: Case,
    pub checks: Vec<ConstraintCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(ConstraintCheck::satisfied)
    }

    pub fn violations(&self) -> Vec<&ConstraintCheck> {
        self.checks.iter().filter(|c| !c.satisfied()).collect()
    }

    pub fn into_result(self) -> Result<ValidationReport> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::Constraints(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let failed = self.violations();
        if failed.is_empty() {
            return write!(f, "case {}: all {} constraints hold", self.case.number(), self.checks.len());
        }
        let parts: Vec<String> = failed
            .iter()
            .map(|c| format!("{} (slack {:e})", c.name, c.slack))
            .collect();
        write!(f, "case {}: {}", self.case.number(), parts.join("; "))
    }
}

/// Relative tolerance for the Parodi equality.
const PARODI_TOL: f64 = 1e-12;

pub const LAMBDA1_NEGATIVE: &str = "λ₁ < 0";
pub const MU1_NONNEGATIVE: &str = "μ₁ ≥ 0";
pub const MU56_NONNEGATIVE: &str = "μ₅ + μ₆ ≥ 0";
pub const PARODI: &str = "μ₂ + μ₃ = μ₆ − μ₅";
pub const LAMBDA2_BOUND: &str = "λ₂²/(−λ₁) ≤ μ₅ + μ₆";
pub const DISCRIMINANT: &str = "|λ₂ − μ₂ − μ₃| < 2√(−λ₁)√(μ₅ + μ₆)";

/// Checks the sign constraints shared by both cases and the inequalities of
/// the selected case.
pub fn validate_constraints(c: &LeslieCoefficients) -> ValidationReport {
    let l1 = c.lambda1();
    let l2 = c.lambda2();
    let s56 = c.mu5 + c.mu6;
    let mut checks = vec![
        ConstraintCheck {
            name: LAMBDA1_NEGATIVE,
            slack: -l1,
            strict: true,
        },
        ConstraintCheck {
            name: MU1_NONNEGATIVE,
            slack: c.mu1,
            strict: false,
        },
        ConstraintCheck {
            name: MU56_NONNEGATIVE,
            slack: s56,
            strict: false,
        },
    ];
    match c.case {
        Case::Parodi => {
            let scale = [c.mu2, c.mu3, c.mu5, c.mu6]
                .iter()
                .fold(1.0f64, |m, v| m.max(v.abs()));
            let defect = (c.mu2 + c.mu3 - (c.mu6 - c.mu5)).abs();
            checks.push(ConstraintCheck {
                name: PARODI,
                slack: if defect <= PARODI_TOL * scale { 0.0 } else { -defect },
                strict: false,
            });
            let bound = if l1 < 0.0 { l2 * l2 / -l1 } else { f64::INFINITY };
            checks.push(ConstraintCheck {
                name: LAMBDA2_BOUND,
                slack: s56 - bound,
                strict: false,
            });
        }
        Case::General => {
            let rhs = if l1 < 0.0 && s56 >= 0.0 {
                2.0 * (-l1).sqrt() * s56.sqrt()
            } else {
                f64::NEG_INFINITY
            };
            checks.push(ConstraintCheck {
                name: DISCRIMINANT,
                slack: rhs - (l2 - c.mu2 - c.mu3).abs(),
                strict: true,
            });
        }
    }
    ValidationReport { case: c.case, checks }
}

/// `c x^p (1 + alpha^2 x)^-r` with `x = |k|^2`.
#[derive(Clone, Copy, Debug)]
struct PowerSymbol {
    c: f64,
    p: f64,
    r: f64,
}

impl PowerSymbol {
    fn new(c: f64, p: f64, r: f64) -> Self {
        PowerSymbol { c, p, r }
    }

    fn times(self, o: PowerSymbol) -> Self {
        PowerSymbol::new(self.c * o.c, self.p + o.p, self.r + o.r)
    }

    fn eval(&self, x: f64, alpha: f64) -> f64 {
        self.c * x.powf(self.p) * (1.0 + alpha * alpha * x).powf(-self.r)
    }

    /// Infimum over `x >= x0 > 0`. The log-derivative `p/x - r a^2/(1 + a^2 x)`
    /// has at most one zero, so the infimum is at `x0`, at infinity, or at
    /// that critical point.
    fn infimum(&self, x0: f64, alpha: f64) -> f64 {
        let a2 = alpha * alpha;
        let at_infinity = if self.p > self.r {
            f64::INFINITY
        } else if self.p == self.r {
            self.c * a2.powf(-self.r)
        } else {
            0.0
        };
        let mut inf = self.eval(x0, alpha).min(at_infinity);
        if self.r != self.p {
            let xc = self.p / (a2 * (self.r - self.p));
            if xc.is_finite() && xc > x0 {
                inf = inf.min(self.eval(xc, alpha));
            }
        }
        inf
    }
}

/// Coercivity constants of the symbols on a truncated grid, together with the
/// continuum infima over `|k| >= 2 pi / L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coercivity {
    /// `min a0(k) / |k|^(2 theta)`.
    pub c_a0: f64,
    /// `min q(k) |k|^(2 theta2)`.
    pub c_q: f64,
    /// `min a0(k) q(k) |k|^(-2 (theta - theta2))`.
    pub c_a0q: f64,
    pub c_a0_continuum: f64,
    pub c_q_continuum: f64,
    pub c_a0q_continuum: f64,
}

pub fn coercivity_constants(params: &ModelParams, grid: &Grid) -> Coercivity {
    let a0 = params.a0_power();
    let q = params.q_power();
    let syms = [
        a0.times(PowerSymbol::new(1.0, -params.theta, 0.0)),
        q.times(PowerSymbol::new(1.0, params.theta2, 0.0)),
        a0.times(q).times(PowerSymbol::new(1.0, params.theta2 - params.theta, 0.0)),
    ];
    let mut mins = [f64::INFINITY; 3];
    for &x in grid.k2().iter().filter(|&&x| x > 0.0) {
        for (m, s) in mins.iter_mut().zip(&syms) {
            *m = m.min(s.eval(x, params.alpha));
        }
    }
    let x0 = grid.k_min().powi(2);
    Coercivity {
        c_a0: mins[0],
        c_q: mins[1],
        c_a0q: mins[2],
        c_a0_continuum: syms[0].infimum(x0, params.alpha),
        c_q_continuum: syms[1].infimum(x0, params.alpha),
        c_a0q_continuum: syms[2].infimum(x0, params.alpha),
    }
}

/// Operator norm of `Q` from `V^-theta2` to `V^theta2`, `max q(k) |k|^(2 theta2)`.
pub fn q_operator_norm(params: &ModelParams, grid: &Grid) -> f64 {
    let s = params.q_power().times(PowerSymbol::new(1.0, params.theta2, 0.0));
    grid.k2()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| s.eval(x, params.alpha))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn lambda_arithmetic() {
        assert_eq!(derive_lambdas(-1.0, 0.5, 0.0, 0.0).0, -1.5);
        assert_eq!(derive_lambdas(0.0, 0.0, 1.0, 0.5).1, 0.5);
        assert_eq!(derive_lambdas(0.0, 0.0, 0.0, 0.0).0, 0.0);
    }

    #[test]
    fn parodi_case_passes_with_unit_slack() {
        let c = LeslieCoefficients::new(0.0, -1.0, 0.0, 1.5, 0.5, Case::Parodi);
        assert_eq!((c.lambda1(), c.lambda2()), (-1.0, 1.0));
        let r = c.validate();
        assert!(r.passed(), "{r}");
        let bound = r.checks.iter().find(|k| k.name == LAMBDA2_BOUND).unwrap();
        assert!((bound.slack - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_lambda1_rejected() {
        for case in [Case::Parodi, Case::General] {
            let c = LeslieCoefficients::new(0.0, 0.3, 0.3, 0.5, 0.5, case);
            let r = c.validate();
            assert!(!r.passed());
            assert!(r.violations().iter().any(|v| v.name == LAMBDA1_NEGATIVE));
            assert!(r.to_string().contains("λ₁ < 0"));
        }
    }

    #[test]
    fn general_case_discriminant() {
        // lambda1 = -1, lambda2 = 3, mu2 + mu3 = 0, mu5 + mu6 = 2: 3 >= 2 sqrt(2)
        let c = LeslieCoefficients::new(0.0, -0.5, 0.5, 2.5, -0.5, Case::General);
        assert_eq!((c.lambda1(), c.lambda2()), (-1.0, 3.0));
        let r = c.validate();
        let d = r.checks.iter().find(|k| k.name == DISCRIMINANT).unwrap();
        assert!((d.slack - (2.0 * 2f64.sqrt() - 3.0)).abs() < 1e-14);
        assert!(!r.passed());
    }

    #[test]
    fn strict_inequality_fails_at_equality() {
        // |lambda2 - mu2 - mu3| = 2 exactly: lambda1 = -1, mu5 + mu6 = 1
        let c = LeslieCoefficients::new(0.0, -0.5, 0.5, 1.5, -0.5, Case::General);
        let r = c.validate();
        let d = r.checks.iter().find(|k| k.name == DISCRIMINANT).unwrap();
        assert_eq!(d.slack, 0.0);
        assert!(!r.passed());
    }

    #[test]
    fn scaling_viscosities_keeps_parodi_pass() {
        let c = LeslieCoefficients::new(0.2, -0.6, 0.4, 0.3, 0.1, Case::Parodi);
        assert!(c.validate().passed());
        let s = LeslieCoefficients::new(0.2, -0.7, 0.3, 0.6, 0.2, Case::Parodi);
        assert!(s.validate().passed());
    }

    #[test]
    fn preset_table() {
        let p: Preset = "NSV-EL".parse().unwrap();
        assert_eq!(p.exponents(), (0.0, 1.0, 1.0, 0));
        assert_eq!(p.bilinear_form(), "B00");
        let p: Preset = "NS-EL-alpha".parse().unwrap();
        assert_eq!(p.exponents(), (1.0, 0.0, 1.0, 1));
        assert_eq!(p.bilinear_form(), "B01");
        let p: Preset = "SBM-EL".parse().unwrap();
        assert_eq!(p.exponents(), (1.0, 1.0, 1.0, 0));
        assert_eq!("leray_el_alpha".parse::<Preset>().unwrap(), Preset::LerayEl);
        let err = "Bardina".parse::<Preset>().unwrap_err();
        let msg = err.to_string();
        for p in Preset::ALL {
            assert!(msg.contains(p.name()));
        }
    }

    #[test]
    fn model_param_ranges() {
        let mut p = Preset::SbmEl.params(1.0, 1.0);
        assert!(p.validate().is_ok());
        p.chi = 2;
        assert!(p.validate().is_err());
        let mut p = Preset::SbmEl.params(1.0, 1.0);
        p.theta2 = -0.1;
        assert!(p.validate().is_err());
        p = Preset::SbmEl.params(0.0, 1.0);
        assert!(p.validate().is_err());
        p = Preset::SbmEl.params(1.0, -1.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn coercivity_examples() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let c = coercivity_constants(&Preset::NseEl.params(0.5, 0.7), &g);
        assert_eq!(c.c_q, 1.0);
        assert!((c.c_a0q - 0.7).abs() < 1e-15);
        assert!((c.c_a0 - 0.7).abs() < 1e-15);

        let c = coercivity_constants(&Preset::SbmEl.params(1.0, 1.0), &g);
        assert!((c.c_q - 0.5).abs() < 1e-15);
        assert!((c.c_q_continuum - 0.5).abs() < 1e-15);
        for p in Preset::ALL {
            let c = coercivity_constants(&p.params(1.0, 1.0), &g);
            assert!(c.c_a0 > 0.0 && c.c_q > 0.0 && c.c_a0q > 0.0, "{p}: {c:?}");
            assert!(c.c_a0q_continuum <= c.c_a0q * (1.0 + 1e-14), "{p}: {c:?}");
        }
    }

    #[test]
    fn continuum_infimum_with_interior_minimum() {
        // x^-1 (1 + x)^-(-2) = (1 + x)^2 / x has its minimum 4 at x = 1
        let s = PowerSymbol::new(1.0, -1.0, -2.0);
        assert!((s.infimum(0.25, 1.0) - 4.0).abs() < 1e-14);
        assert!((s.infimum(2.0, 1.0) - 4.5).abs() < 1e-14);
    }

    #[test]
    fn q_norm_nse_is_one() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        assert_eq!(q_operator_norm(&Preset::NseEl.params(1.0, 1.0), &g), 1.0);
        assert!(q_operator_norm(&Preset::MlEl.params(1.0, 1.0), &g) < 1.0);
    }
}
