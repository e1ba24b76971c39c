//! Divergence-time measurement and the error models of the computational
//! uncertainty principle.
//!
//! Two error scales compete in a fixed-step integration at finite precision:
//! truncation error growing like `hᵐ` and accumulated round-off growing like
//! `h^(-1/2)`. The first yields the error law fitted by [`fit_error_law`] and its
//! minimiser [`optimal_step`]; the second bounds how long a trajectory at `p`
//! bits stays close to the true one ([`measure_mect`]), and how that horizon
//! scales with `p` ([`extrapolate_mect`]).

use std::cmp::Ordering;
use std::f64::consts::LN_2;

use mpreal::MpReal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::literal::Literal;
use crate::lorenz::{integrate, LorenzSetup, Stepper, RK4_ORDER};

/// Precision of the comparison trajectory for a run at `p` bits.
pub fn reference_precision(p: u32) -> u32 {
    (2 * p).max(p + 64)
}

/// Settings for [`measure_mect`].
#[derive(Debug, Clone)]
pub struct MectConfig {
    /// Step size (nondimensional time), used at both precisions.
    pub h: Literal,
    /// Divergence threshold on `|x_p − x_ref|`.
    pub delta: f64,
    /// Give up after this much nondimensional time.
    pub t_max: f64,
}

impl Default for MectConfig {
    fn default() -> Self {
        MectConfig {
            h: Literal::Decimal("0.01".into()),
            delta: 1.0,
            t_max: 500.0,
        }
    }
}

/// Maximum effective computation time at one precision.
#[derive(Debug, Clone, PartialEq)]
pub struct MectEstimate {
    pub precision: u32,
    /// First time at which the trajectories differ by more than `delta`.
    pub mect: f64,
    pub delta: f64,
    pub h: f64,
    pub reference_precision: u32,
    /// Step index at which the threshold was crossed.
    pub step: u64,
}

/// Integrates the same setup at `p` bits and at [`reference_precision`]
/// with identical `h` and reports the first step where the `x` coordinates
/// differ by more than `delta`.
pub fn measure_mect(setup: &LorenzSetup, p: u32, cfg: &MectConfig) -> Result<MectEstimate> {
    if !(cfg.delta > 0.0 && cfg.delta.is_finite()) {
        return Err(Error::InvalidSpec(format!("delta must be > 0, got {}", cfg.delta)));
    }
    if !(cfg.t_max > 0.0 && cfg.t_max.is_finite()) {
        return Err(Error::InvalidSpec(format!("t_max must be > 0, got {}", cfg.t_max)));
    }
    let pref = reference_precision(p);
    let params = setup.params(p)?;
    if !params.is_chaotic_regime() {
        return Err(Error::InvalidSpec("MECT needs the chaotic regime, γ ≥ 28".into()));
    }
    let h = cfg.h.to_f64();
    let mut low = Stepper::new(params, setup.initial(p)?, &cfg.h.at(p)?)?;
    let mut high = Stepper::new(setup.params(pref)?, setup.initial(pref)?, &cfg.h.at(pref)?)?;
    let delta = MpReal::from_f64(cfg.delta, pref)?;
    let n_max = (cfg.t_max / h).floor() as u64;
    for step in 1..=n_max {
        low.step()?;
        high.step()?;
        let gap = low.state().x.to_precision(pref)?.sub(&high.state().x)?;
        if gap.cmp_abs(&delta) == Ordering::Greater {
            return Ok(MectEstimate {
                precision: p,
                mect: step as f64 * h,
                delta: cfg.delta,
                h,
                reference_precision: pref,
                step,
            });
        }
    }
    Err(Error::MectBeyondHorizon { t_max: cfg.t_max })
}

/// [`measure_mect`] over several precisions, results in input order.
pub fn measure_mect_many(setup: &LorenzSetup, ps: &[u32], cfg: &MectConfig) -> Vec<Result<MectEstimate>> {
    ps.par_iter().map(|&p| measure_mect(setup, p, cfg)).collect()
}

/// Linear growth of the divergence time with precision,
/// `T(p) = T₁ + Ĉ·m·ln2·(p − p₁)·m/(m + 0.5)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MectModel {
    pub chat: f64,
    pub m: u32,
    /// `(p, T)` pairs the model was solved from, lowest precision first.
    pub anchors: Vec<(u32, f64)>,
}

impl MectModel {
    fn slope_factor(m: u32) -> f64 {
        let m = f64::from(m);
        m * LN_2 * m / (m + 0.5)
    }

    /// Predicted divergence time at `p` bits.
    pub fn predict(&self, p: u32) -> f64 {
        let (p1, t1) = self.anchors[0];
        t1 + self.chat * Self::slope_factor(self.m) * (f64::from(p) - f64::from(p1))
    }
}

/// Solves the model for `Ĉ` from two anchors and predicts `T(target_p)`.
pub fn extrapolate_mect(a: (u32, f64), b: (u32, f64), m: u32, target_p: u32) -> Result<(MectModel, f64)> {
    let (lo, hi) = if a.0 <= b.0 { (a, b) } else { (b, a) };
    if lo.0 == hi.0 {
        return Err(Error::Fit(format!("both anchors are at {} bits", lo.0)));
    }
    if !(hi.1 > lo.1) {
        return Err(Error::Fit(format!(
            "divergence time must grow with precision: T({}) = {}, T({}) = {}",
            lo.0, lo.1, hi.0, hi.1
        )));
    }
    let chat = (hi.1 - lo.1) / (MectModel::slope_factor(m) * f64::from(hi.0 - lo.0));
    let model = MectModel {
        chat,
        m,
        anchors: vec![lo, hi],
    };
    let t = model.predict(target_p);
    Ok((model, t))
}

/// [`extrapolate_mect`] from two measurements.
pub fn extrapolate_from(a: &MectEstimate, b: &MectEstimate, target_p: u32) -> Result<(MectModel, f64)> {
    extrapolate_mect((a.precision, a.mect), (b.precision, b.mect), RK4_ORDER, target_p)
}

/// `E(h) ≈ A·hᵐ + B·h^(−1/2)` at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorLawFit {
    pub t_fixed: Option<f64>,
    /// Truncation amplitude.
    pub a: f64,
    /// Round-off amplitude.
    pub b: f64,
    pub m: u32,
    /// Root-mean-square deviation of the fit from the samples.
    pub residual: f64,
    /// Mean of the sampled errors, the scale for `residual`.
    pub mean_error: f64,
}

impl ErrorLawFit {
    pub fn eval(&self, h: f64) -> f64 {
        self.a * h.powi(self.m as i32) + self.b / h.sqrt()
    }
}

/// Non-negative least squares for `E(h) = A·hᵐ + B·h^(−1/2)`.
pub fn fit_error_law(samples: &[(f64, f64)], m: u32) -> Result<ErrorLawFit> {
    if samples.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 samples, got {}", samples.len())));
    }
    if let Some(&(h, e)) = samples
        .iter()
        .find(|(h, e)| !(h.is_finite() && *h > 0.0 && e.is_finite() && *e > 0.0))
    {
        return Err(Error::Fit(format!("sample (h = {h}, E = {e}) is not positive and finite")));
    }
    let (h_min, h_max) = samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(h, _)| (lo.min(h), hi.max(h)));
    if h_max / h_min < 10.0 {
        return Err(Error::Fit(format!(
            "step sizes must span a decade, got {h_min} to {h_max}"
        )));
    }
    let basis = |h: f64| (h.powi(m as i32), h.powf(-0.5));
    let (mut suu, mut suv, mut svv, mut sue, mut sve) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(h, e) in samples {
        let (u, v) = basis(h);
        suu += u * u;
        suv += u * v;
        svv += v * v;
        sue += u * e;
        sve += v * e;
    }
    let objective = |a: f64, b: f64| -> f64 {
        samples
            .iter()
            .map(|&(h, e)| {
                let (u, v) = basis(h);
                (a * u + b * v - e).powi(2)
            })
            .sum()
    };
    let det = suu * svv - suv * suv;
    let mut candidates = vec![(sue / suu, 0.0), (0.0, sve / svv)];
    if det > 1e-12 * suu * svv {
        let a = (sue * svv - sve * suv) / det;
        let b = (sve * suu - sue * suv) / det;
        if a >= 0.0 && b >= 0.0 {
            candidates.push((a, b));
        }
    } else {
        return Err(Error::Fit("degenerate design: step sizes too close together".into()));
    }
    let (a, b) = candidates
        .into_iter()
        .filter(|&(a, b)| a >= 0.0 && b >= 0.0)
        .min_by(|x, y| objective(x.0, x.1).total_cmp(&objective(y.0, y.1)))
        .expect("the one-term candidates are non-negative");
    let n = samples.len() as f64;
    let mut fit = ErrorLawFit {
        t_fixed: None,
        a,
        b,
        m,
        residual: 0.0,
        mean_error: samples.iter().map(|s| s.1).sum::<f64>() / n,
    };
    fit.residual = (samples.iter().map(|&(h, e)| (fit.eval(h) - e).powi(2)).sum::<f64>() / n).sqrt();
    Ok(fit)
}

/// Closed-form minimiser `h* = (B/(2mA))^(1/(m+0.5))` of the fitted law.
pub fn optimal_step(fit: &ErrorLawFit) -> Result<f64> {
    if !(fit.a > 0.0 && fit.b > 0.0) {
        return Err(Error::NoInteriorMinimum(format!(
            "need A > 0 and B > 0, got A = {}, B = {}",
            fit.a, fit.b
        )));
    }
    let m = f64::from(fit.m);
    Ok((fit.b / (2.0 * m * fit.a)).powf(1.0 / (m + 0.5)))
}

/// Where the error-law samples are measured against.
#[derive(Debug, Clone)]
pub struct ErrorLawReference {
    pub precision: u32,
    pub h: Literal,
}

/// Errors `|x_p(t) − x_ref(t)|` for each step size in `hs`, integrating the
/// setup to `t` at `p` bits. Results are in the order of `hs`.
pub fn error_law_samples(
    setup: &LorenzSetup,
    p: u32,
    t: &Literal,
    hs: &[Literal],
    reference: &ErrorLawReference,
) -> Result<Vec<(f64, f64)>> {
    let x_ref = integrate(&setup.spec(&reference.h, t, reference.precision)?)?.x;
    hs.par_iter()
        .map(|h| {
            let x = integrate(&setup.spec(h, t, p)?)?.x;
            let err = x.to_precision(reference.precision)?.sub(&x_ref)?.abs();
            Ok((h.to_f64(), err.to_f64()))
        })
        .collect()
}

/// Samples and fits the error law at `t`, `p` bits.
pub fn measure_error_law(
    setup: &LorenzSetup,
    p: u32,
    t: &Literal,
    hs: &[Literal],
    reference: &ErrorLawReference,
) -> Result<(Vec<(f64, f64)>, ErrorLawFit)> {
    let samples = error_law_samples(setup, p, t, hs, reference)?;
    let mut fit = fit_error_law(&samples, RK4_ORDER)?;
    fit.t_fixed = Some(t.to_f64());
    Ok((samples, fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(a: f64, b: f64, h: f64) -> f64 {
        a * h.powi(4) + b / h.sqrt()
    }

    #[test]
    fn synthetic_law_is_recovered() {
        let hs = [0.5, 0.8, 1.0, 1.5, 2.0, 3.0, 6.0];
        let samples: Vec<_> = hs.iter().map(|&h| (h, law(1.0, 8.0, h))).collect();
        let fit = fit_error_law(&samples, 4).unwrap();
        assert!((fit.a - 1.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.b - 8.0).abs() < 1e-6 * 8.0, "{fit:?}");
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn fit_preconditions() {
        let few = [(0.1, 1.0), (0.01, 1.0), (0.001, 1.0)];
        assert!(matches!(fit_error_law(&few, 4), Err(Error::Fit(_))));
        let flat = [(0.1, 1.0); 5];
        assert!(matches!(fit_error_law(&flat, 4), Err(Error::Fit(_))));
        let narrow = [(0.1, 1.0), (0.11, 1.0), (0.12, 2.0), (0.13, 1.5)];
        assert!(matches!(fit_error_law(&narrow, 4), Err(Error::Fit(_))));
    }

    #[test]
    fn optimal_step_examples() {
        let fit = |a, b| ErrorLawFit {
            t_fixed: None,
            a,
            b,
            m: 4,
            residual: 0.0,
            mean_error: 1.0,
        };
        assert!((optimal_step(&fit(1.0, 8.0)).unwrap() - 1.0).abs() < 1e-12);
        let h = optimal_step(&fit(1.0, 8.0 * 2f64.powf(4.5))).unwrap();
        assert!((h - 2.0).abs() < 1e-12);
        assert!(matches!(optimal_step(&fit(0.0, 1.0)), Err(Error::NoInteriorMinimum(_))));
        assert!(matches!(optimal_step(&fit(1.0, 0.0)), Err(Error::NoInteriorMinimum(_))));
    }

    #[test]
    fn extrapolation_examples() {
        let (model, t) = extrapolate_mect((24, 17.0), (53, 35.0), 4, 256).unwrap();
        assert!((model.chat - 0.252).abs() < 0.001, "{}", model.chat);
        assert!((t - 161.0).abs() < 0.5, "{t}");
        assert_eq!(model.predict(24), 17.0);
        // anchor order does not matter
        let (again, _) = extrapolate_mect((53, 35.0), (24, 17.0), 4, 256).unwrap();
        assert_eq!(again, model);
        assert!(extrapolate_mect((24, 17.0), (24, 18.0), 4, 256).is_err());
        assert!(extrapolate_mect((24, 17.0), (53, 17.0), 4, 256).is_err());
    }

    #[test]
    fn reference_precision_rule() {
        assert_eq!(reference_precision(24), 88);
        assert_eq!(reference_precision(53), 117);
        assert_eq!(reference_precision(64), 128);
        assert_eq!(reference_precision(256), 512);
    }

    #[test]
    fn mect_rejects_bad_settings() {
        let setup = LorenzSetup::classic();
        let cfg = MectConfig {
            delta: 0.0,
            ..MectConfig::default()
        };
        assert!(measure_mect(&setup, 24, &cfg).is_err());
        let calm = LorenzSetup {
            gamma: 20.into(),
            ..LorenzSetup::classic()
        };
        assert!(measure_mect(&calm, 24, &MectConfig::default()).is_err());
        let short = MectConfig {
            t_max: 1.0,
            ..MectConfig::default()
        };
        assert!(matches!(
            measure_mect(&setup, 24, &short),
            Err(Error::MectBeyondHorizon { .. })
        ));
    }
}
