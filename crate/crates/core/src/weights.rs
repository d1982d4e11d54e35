//! Subadditive weight functions `omega` and the exponential weights built on them.
//!
//! All built-in weights are concave on `[0, inf)` with `omega(0) = 0`, which gives
//! subadditivity directly. The derived weights are
//! `m_lambda(z) = exp(lambda * omega(|z|))` and `v_lambda(z) = exp(|lambda| * omega(|z|))`,
//! with the tensor components `m_{lambda,1}` (time block only) and `m_{lambda,2}`
//! (frequency block only).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Built-in weight families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "lowercase")]
pub enum OmegaKind {
    /// `log(1 + t)`; the weight producing the classical Schwartz setting.
    Log1p,
    /// `t^beta` with `0 < beta < 1`.
    Power(f64),
    /// `log(e^(s-1) + t)^s - (s-1)^s` with `s >= 1`.
    ///
    /// The shift `e^(s-1)` makes the function concave, so it stays subadditive; the plain
    /// `log(1+t)^s` is not subadditive for `s > 1`.
    LogPower(f64),
}

/// An admissible weight function `omega: [0, inf) -> [0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    kind: OmegaKind,
}

impl WeightFunction {
    pub fn new(kind: OmegaKind) -> Result<Self> {
        match kind {
            OmegaKind::Log1p => {}
            OmegaKind::Power(beta) => {
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(Error::Argument(format!(
                        "power weight needs beta in (0, 1), got {beta}"
                    )));
                }
            }
            OmegaKind::LogPower(s) => {
                if !(s >= 1.0 && s.is_finite()) {
                    return Err(Error::Argument(format!(
                        "log-power weight needs s >= 1, got {s}"
                    )));
                }
            }
        }
        Ok(Self { kind })
    }

    pub fn log1p() -> Self {
        Self { kind: OmegaKind::Log1p }
    }

    pub fn power(beta: f64) -> Result<Self> {
        Self::new(OmegaKind::Power(beta))
    }

    pub fn log_power(s: f64) -> Result<Self> {
        Self::new(OmegaKind::LogPower(s))
    }

    pub fn kind(&self) -> OmegaKind {
        self.kind
    }

    /// Short identifier used in reports and CSV rows.
    pub fn id(&self) -> String {
        match self.kind {
            OmegaKind::Log1p => "log1p".to_string(),
            OmegaKind::Power(b) => format!("power({b})"),
            OmegaKind::LogPower(s) => format!("logpower({s})"),
        }
    }

    /// Whether `int_1^inf omega(t)/t^2 dt` converges. True for every built-in family.
    pub fn integrability_flag(&self) -> bool {
        true
    }

    /// Constants `(A, B)` with `omega(t) >= A + B log(1+t)` for all `t >= 0`.
    pub fn gamma_constants(&self) -> (f64, f64) {
        match self.kind {
            OmegaKind::Log1p => (0.0, 1.0),
            // log(1+t) <= ((1+t)^b - 1)/b <= t^b / b
            OmegaKind::Power(beta) => (0.0, beta),
            // u^s >= u - 1 for u >= 0, and log(e^(s-1)+t) >= log(1+t)
            OmegaKind::LogPower(s) => (-1.0 - (s - 1.0).powf(s), 1.0),
        }
    }

    /// Evaluates `omega(t)`; negative `t` is a domain error.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("omega evaluated at t = {t}")));
        }
        Ok(self.eval_unchecked(t))
    }

    /// Evaluates `omega(t)` for `t >= 0` without the domain check.
    #[inline]
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        match self.kind {
            OmegaKind::Log1p => t.ln_1p(),
            OmegaKind::Power(beta) => t.powf(beta),
            OmegaKind::LogPower(s) => {
                let shift = s - 1.0;
                (shift.exp() + t).ln().powf(s) - shift.powf(s)
            }
        }
    }

    /// `omega(|z|)` for a point given by its coordinates.
    #[inline]
    pub fn eval_norm(&self, coords: &[f64]) -> f64 {
        let r = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.eval_unchecked(r)
    }
}

/// Which part of a phase-space point the weight sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightComponent {
    /// `m_lambda(x, xi)` on the full phase space.
    Full,
    /// `m_{lambda,1}(x) = m_lambda(x, 0)`.
    First,
    /// `m_{lambda,2}(xi) = m_lambda(0, xi)`.
    Second,
    /// `v_lambda(z) = exp(|lambda| omega(|z|))`.
    Absolute,
}

/// A weight `m_lambda` (or one of its components) on `R^d x R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub omega: WeightFunction,
    pub lambda: f64,
    pub component: WeightComponent,
}

impl WeightSpec {
    pub fn new(omega: WeightFunction, lambda: f64, component: WeightComponent) -> Self {
        Self { omega, lambda, component }
    }

    pub fn full(omega: WeightFunction, lambda: f64) -> Self {
        Self::new(omega, lambda, WeightComponent::Full)
    }

    pub fn absolute(omega: WeightFunction, lambda: f64) -> Self {
        Self::new(omega, lambda, WeightComponent::Absolute)
    }

    /// The trivial weight `m_0 = 1`.
    pub fn unit() -> Self {
        Self::full(WeightFunction::log1p(), 0.0)
    }

    /// Evaluates the weight at `(x, xi)`; `x` and `xi` must have the same length `d`.
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> f64 {
        if self.lambda == 0.0 {
            return 1.0;
        }
        let sq = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>();
        let (r2, exponent) = match self.component {
            WeightComponent::Full => (sq(x) + sq(xi), self.lambda),
            WeightComponent::First => (sq(x), self.lambda),
            WeightComponent::Second => (sq(xi), self.lambda),
            WeightComponent::Absolute => (sq(x) + sq(xi), self.lambda.abs()),
        };
        (exponent * self.omega.eval_unchecked(r2.sqrt())).exp()
    }

    /// Evaluates at a point `z` in `R^{2d}` laid out as `(x, xi)`.
    pub fn eval_point(&self, z: &[f64]) -> Result<f64> {
        if z.len() % 2 != 0 || z.is_empty() {
            return Err(Error::Structure(format!(
                "phase-space point must have even length, got {}",
                z.len()
            )));
        }
        let d = z.len() / 2;
        Ok(self.eval(&z[..d], &z[d..]))
    }
}

/// A product of weights, e.g. `m_{lambda,1} (x) v_{lambda,2} m_{-mu,2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseWeight {
    pub factors: Vec<WeightSpec>,
}

impl PhaseWeight {
    pub fn unit() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn product(factors: impl IntoIterator<Item = WeightSpec>) -> Self {
        Self { factors: factors.into_iter().collect() }
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> f64 {
        self.factors.iter().map(|w| w.eval(x, xi)).product()
    }

    pub fn is_unit(&self) -> bool {
        self.factors.iter().all(|w| w.lambda == 0.0)
    }
}

impl From<WeightSpec> for PhaseWeight {
    fn from(w: WeightSpec) -> Self {
        Self { factors: vec![w] }
    }
}

/// Outcome of [`check_weight_conditions`]; violations are counted, never thrown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub subadditivity_violations: usize,
    pub monotonicity_violations: usize,
    pub gamma_constants: (f64, f64),
    pub gamma_violations: usize,
    pub convexity_violations: usize,
    pub beta_holds: bool,
    /// Quadrature of `int_1^{t_max} omega(t)/t^2 dt`.
    pub beta_tail_integral: f64,
    /// Log-log slope of the integrand over the last decade; convergence needs it below -1.
    pub beta_tail_slope: f64,
}

/// Numerical check of the defining conditions on an arbitrary evaluator.
pub fn check_conditions_with<F>(
    omega: F,
    gamma_constants: (f64, f64),
    beta_flag: bool,
    sample_count: usize,
    t_max: f64,
) -> Result<ConditionReport>
where
    F: Fn(f64) -> f64,
{
    if sample_count < 10 {
        return Err(Error::Argument(format!("sample_count must be >= 10, got {sample_count}")));
    }
    if !(t_max > 1.0) {
        return Err(Error::Argument(format!("t_max must exceed 1, got {t_max}")));
    }
    let rel = |a: f64, b: f64| 1e-12 * (1.0 + a.abs() + b.abs());

    // Subadditivity on a 2-d Halton set in [0, t_max]^2.
    let mut subadditivity_violations = 0;
    for i in 1..=sample_count * sample_count {
        let t1 = t_max * radical_inverse(i, 2);
        let t2 = t_max * radical_inverse(i, 3);
        let (w1, w2) = (omega(t1), omega(t2));
        if omega(t1 + t2) > w1 + w2 + rel(w1, w2) {
            subadditivity_violations += 1;
        }
    }

    let grid: Vec<f64> = (0..sample_count)
        .map(|i| t_max * i as f64 / (sample_count - 1) as f64)
        .collect();
    let mut monotonicity_violations = 0;
    for pair in grid.windows(2) {
        let (a, b) = (omega(pair[0]), omega(pair[1]));
        if a > b + rel(a, b) {
            monotonicity_violations += 1;
        }
    }

    let (ga, gb) = gamma_constants;
    let gamma_violations = grid
        .iter()
        .filter(|&&t| {
            let w = omega(t);
            let lower = ga + gb * t.ln_1p();
            w < lower - rel(w, lower)
        })
        .count();

    // Midpoint convexity of phi(s) = omega(e^s) on log-spaced samples.
    let (s_lo, s_hi) = (-8.0_f64, t_max.ln());
    let s_nodes: Vec<f64> = (0..sample_count)
        .map(|i| s_lo + (s_hi - s_lo) * i as f64 / (sample_count - 1) as f64)
        .collect();
    let phi = |s: f64| omega(s.exp());
    let mut convexity_violations = 0;
    for i in 0..s_nodes.len() {
        for j in i + 2..s_nodes.len() {
            let (a, b) = (s_nodes[i], s_nodes[j]);
            let mid = phi(0.5 * (a + b));
            let chord = 0.5 * (phi(a) + phi(b));
            if mid > chord + rel(mid, chord) {
                convexity_violations += 1;
            }
        }
    }

    // Tail heuristic for int_1^inf omega(t)/t^2 dt: log-spaced trapezoid plus end slope.
    let steps = 4 * sample_count;
    let (l0, l1) = (0.0_f64, t_max.ln());
    let mut integral = 0.0;
    let integrand = |u: f64| {
        let t = u.exp();
        omega(t) / t // omega(t)/t^2 * dt, with dt = t du
    };
    let du = (l1 - l0) / steps as f64;
    for k in 0..steps {
        let (u0, u1) = (l0 + k as f64 * du, l0 + (k + 1) as f64 * du);
        integral += 0.5 * du * (integrand(u0) + integrand(u1));
    }
    let t_hi = t_max;
    let t_lo = (t_max / 10.0).max(1.0 + 1e-9);
    let f = |t: f64| omega(t) / (t * t);
    let beta_tail_slope = if t_hi > t_lo && f(t_lo) > 0.0 && f(t_hi) > 0.0 {
        (f(t_hi).ln() - f(t_lo).ln()) / (t_hi.ln() - t_lo.ln())
    } else {
        f64::NEG_INFINITY
    };

    Ok(ConditionReport {
        subadditivity_violations,
        monotonicity_violations,
        gamma_constants,
        gamma_violations,
        convexity_violations,
        beta_holds: beta_flag && beta_tail_slope < -1.0,
        beta_tail_integral: integral,
        beta_tail_slope,
    })
}

/// Checks subadditivity, the logarithmic lower bound, convexity of `omega(e^s)`, and reports
/// the integrability flag with a tail estimate.
pub fn check_weight_conditions(
    w: &WeightFunction,
    sample_count: usize,
    t_max: f64,
) -> Result<ConditionReport> {
    check_conditions_with(
        |t| w.eval_unchecked(t),
        w.gamma_constants(),
        w.integrability_flag(),
        sample_count,
        t_max,
    )
}

/// Van der Corput radical inverse in the given base.
fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut result, mut f) = (0.0, inv);
    while i > 0 {
        result += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn builtins() -> Vec<WeightFunction> {
        vec![
            WeightFunction::log1p(),
            WeightFunction::power(0.5).unwrap(),
            WeightFunction::power(0.2).unwrap(),
            WeightFunction::log_power(1.0).unwrap(),
            WeightFunction::log_power(2.0).unwrap(),
            WeightFunction::log_power(3.5).unwrap(),
        ]
    }

    #[test]
    fn omega_direct_values() {
        assert_relative_eq!(WeightFunction::log1p().eval(3.0).unwrap(), 4f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(WeightFunction::power(0.5).unwrap().eval(4.0).unwrap(), 2.0);
        for w in builtins() {
            assert_eq!(w.eval(0.0).unwrap(), 0.0, "{}", w.id());
        }
    }

    #[test]
    fn negative_argument_is_domain_error() {
        assert!(matches!(WeightFunction::log1p().eval(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(WeightFunction::power(1.0).is_err());
        assert!(WeightFunction::power(0.0).is_err());
        assert!(WeightFunction::power(f64::NAN).is_err());
        assert!(WeightFunction::log_power(0.5).is_err());
    }

    #[test]
    fn weight_values() {
        let z = [3.0, 0.0];
        let w = WeightSpec::full(WeightFunction::log1p(), 2.0);
        assert_relative_eq!(w.eval_point(&z).unwrap(), 16.0, max_relative = 1e-14);
        let w = WeightSpec::full(WeightFunction::power(0.5).unwrap(), 1.0);
        assert_relative_eq!(w.eval_point(&[0.0, 4.0]).unwrap(), 2f64.exp(), max_relative = 1e-14);
        let w = WeightSpec::full(WeightFunction::power(0.5).unwrap(), 0.0);
        assert_eq!(w.eval_point(&[7.0, -2.0]).unwrap(), 1.0);
        assert!(WeightSpec::unit().eval_point(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn components_restrict_blocks() {
        let om = WeightFunction::log1p();
        let first = WeightSpec::new(om, 1.0, WeightComponent::First);
        let second = WeightSpec::new(om, 1.0, WeightComponent::Second);
        assert_relative_eq!(first.eval(&[3.0], &[100.0]), 4.0, max_relative = 1e-14);
        assert_relative_eq!(second.eval(&[100.0], &[3.0]), 4.0, max_relative = 1e-14);
        let v = WeightSpec::absolute(om, -1.0);
        assert_relative_eq!(v.eval(&[3.0], &[0.0]), 4.0, max_relative = 1e-14);
    }

    #[test]
    fn builtin_conditions_hold() {
        for w in builtins() {
            let r = check_weight_conditions(&w, 64, 1e4).unwrap();
            assert_eq!(r.subadditivity_violations, 0, "{}", w.id());
            assert_eq!(r.monotonicity_violations, 0, "{}", w.id());
            assert_eq!(r.gamma_violations, 0, "{}", w.id());
            assert_eq!(r.convexity_violations, 0, "{}", w.id());
            assert!(r.beta_holds, "{} slope {}", w.id(), r.beta_tail_slope);
        }
        let r = check_weight_conditions(&WeightFunction::log1p(), 32, 100.0).unwrap();
        assert_eq!(r.gamma_constants, (0.0, 1.0));
    }

    #[test]
    fn unshifted_log_square_is_not_subadditive() {
        let r = check_conditions_with(|t: f64| t.ln_1p().powi(2), (-1.0, 1.0), true, 32, 50.0)
            .unwrap();
        assert!(r.subadditivity_violations > 0);
    }

    #[test]
    fn corrupted_square_weight_flags_violations() {
        let r = check_conditions_with(|t| t * t, (0.0, 1.0), false, 20, 10.0).unwrap();
        assert!(r.subadditivity_violations > 0);
        assert!(!r.beta_holds);
    }

    #[test]
    fn check_rejects_bad_sampling() {
        let w = WeightFunction::log1p();
        assert!(check_weight_conditions(&w, 5, 10.0).is_err());
        assert!(check_weight_conditions(&w, 20, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn monotone_and_subadditive(t1 in 0.0f64..1e3, t2 in 0.0f64..1e3, idx in 0usize..6) {
            let w = builtins()[idx];
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let (a, b) = (w.eval(lo).unwrap(), w.eval(hi).unwrap());
            prop_assert!(a <= b);
            let s = w.eval(t1 + t2).unwrap();
            prop_assert!(s <= a + b + 1e-12 * (1.0 + a + b));
        }

        #[test]
        fn submultiplicative(
            x1 in -50.0f64..50.0, k1 in -50.0f64..50.0,
            x2 in -50.0f64..50.0, k2 in -50.0f64..50.0,
            li in 0usize..5, idx in 0usize..6,
        ) {
            let lambda = [-2.0, -1.0, 0.0, 1.0, 2.0][li];
            let om = builtins()[idx];
            let m = WeightSpec::full(om, lambda);
            let v = WeightSpec::absolute(om, lambda);
            let lhs = m.eval(&[x1 + x2], &[k1 + k2]);
            let rhs = m.eval(&[x1], &[k1]) * v.eval(&[x2], &[k2]);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
            prop_assert!(v.eval(&[x2], &[k2]) >= 1.0);
        }

        #[test]
        fn full_weight_splits(x in -80.0f64..80.0, k in -80.0f64..80.0, lambda in 0.0f64..3.0, idx in 0usize..6) {
            let om = builtins()[idx];
            let full = WeightSpec::full(om, lambda).eval(&[x], &[k]);
            let first = WeightSpec::new(om, lambda, WeightComponent::First).eval(&[x], &[k]);
            let v2 = WeightSpec::new(om, lambda, WeightComponent::Absolute).eval(&[0.0], &[k]);
            prop_assert!(full <= first * v2 * (1.0 + 1e-12));
        }
    }
}
