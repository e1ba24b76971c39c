//! The Lorenz vector field and a fixed-step classical Runge-Kutta integrator
//! carried out entirely in [`MpReal`] arithmetic.
//!
//! Every compound expression below is evaluated in one frozen order, one
//! correctly rounded operation at a time. Changing any grouping changes the
//! bits of every long-horizon result, so the order is part of the contract.

use std::io::Write;

use mpreal::{MpError, MpReal};

use crate::error::{Error, Result};
use crate::literal::Literal;

/// Order `m` of the classical Runge-Kutta method.
pub const RK4_ORDER: u32 = 4;

/// Coefficients of `dx/dt = σ(y−x)`, `dy/dt = γx − y − xz`, `dz/dt = xy − βz`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LorenzParams {
    pub sigma: MpReal,
    pub gamma: MpReal,
    pub beta: MpReal,
}

impl LorenzParams {
    pub fn new(sigma: MpReal, gamma: MpReal, beta: MpReal) -> Result<Self> {
        same_precision(&[&sigma, &gamma, &beta])?;
        Ok(LorenzParams { sigma, gamma, beta })
    }

    /// σ = 10, γ = 28, β = 8/3 (formed as `8 ⊘ 3` at `prec`).
    pub fn classic(prec: u32) -> Result<Self> {
        let eight = MpReal::from_u64(8, prec)?;
        let three = MpReal::from_u64(3, prec)?;
        Ok(LorenzParams {
            sigma: MpReal::from_u64(10, prec)?,
            gamma: MpReal::from_u64(28, prec)?,
            beta: eight.div(&three)?,
        })
    }

    pub fn precision(&self) -> u32 {
        self.sigma.precision()
    }

    pub fn to_precision(&self, prec: u32) -> Result<Self> {
        Ok(LorenzParams {
            sigma: self.sigma.to_precision(prec)?,
            gamma: self.gamma.to_precision(prec)?,
            beta: self.beta.to_precision(prec)?,
        })
    }

    /// γ ≥ 28, the range used wherever chaotic behaviour is required.
    pub fn is_chaotic_regime(&self) -> bool {
        self.gamma.compare(&MpReal::from_u64(28, 64).expect("valid precision"))
            != std::cmp::Ordering::Less
    }
}

/// A point `(x, y, z)`; also the output vector of the one-way map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State3 {
    pub x: MpReal,
    pub y: MpReal,
    pub z: MpReal,
}

impl State3 {
    pub fn new(x: MpReal, y: MpReal, z: MpReal) -> Result<Self> {
        same_precision(&[&x, &y, &z])?;
        Ok(State3 { x, y, z })
    }

    pub fn from_decimals(x: &str, y: &str, z: &str, prec: u32) -> Result<Self> {
        Ok(State3 {
            x: MpReal::from_decimal(x, prec)?,
            y: MpReal::from_decimal(y, prec)?,
            z: MpReal::from_decimal(z, prec)?,
        })
    }

    pub fn origin(prec: u32) -> Result<Self> {
        let z = MpReal::zero(prec)?;
        Ok(State3 {
            x: z.clone(),
            y: z.clone(),
            z,
        })
    }

    pub fn precision(&self) -> u32 {
        self.x.precision()
    }

    pub fn to_precision(&self, prec: u32) -> Result<Self> {
        Ok(State3 {
            x: self.x.to_precision(prec)?,
            y: self.y.to_precision(prec)?,
            z: self.z.to_precision(prec)?,
        })
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [self.x.to_f64(), self.y.to_f64(), self.z.to_f64()]
    }

    /// `(x, y, z)` hex dumps joined by newlines, for golden files.
    pub fn to_hex_dump(&self) -> String {
        format!(
            "{}\n{}\n{}\n",
            self.x.to_hex_dump(),
            self.y.to_hex_dump(),
            self.z.to_hex_dump()
        )
    }
}

/// Everything that determines one integration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegrationSpec {
    pub params: LorenzParams,
    pub initial: State3,
    /// Time step (nondimensional time).
    pub h: MpReal,
    /// End time (nondimensional time).
    pub t: MpReal,
}

impl IntegrationSpec {
    pub fn new(params: LorenzParams, initial: State3, h: MpReal, t: MpReal) -> Result<Self> {
        let spec = IntegrationSpec {
            params,
            initial,
            h,
            t,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Classic coefficients from `(5, 5, 10)` with decimal `h` and `t`.
    pub fn classic(h: &str, t: &str, prec: u32) -> Result<Self> {
        IntegrationSpec::new(
            LorenzParams::classic(prec)?,
            State3::from_decimals("5", "5", "10", prec)?,
            MpReal::from_decimal(h, prec)?,
            MpReal::from_decimal(t, prec)?,
        )
    }

    pub fn precision(&self) -> u32 {
        self.h.precision()
    }

    /// The method order; always [`RK4_ORDER`].
    pub fn method_order(&self) -> u32 {
        RK4_ORDER
    }

    pub fn validate(&self) -> Result<()> {
        same_precision(&[
            &self.params.sigma,
            &self.params.gamma,
            &self.params.beta,
            &self.initial.x,
            &self.initial.y,
            &self.initial.z,
            &self.h,
            &self.t,
        ])?;
        if self.h.is_zero() || self.h.is_negative() {
            return Err(Error::InvalidSpec("step h must be > 0".into()));
        }
        if self.t.is_negative() {
            return Err(Error::InvalidSpec("end time t must be >= 0".into()));
        }
        Ok(())
    }
}

/// Coefficients and initial point in written form, so the same setup can
/// be formed at several precisions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LorenzSetup {
    pub sigma: Literal,
    pub gamma: Literal,
    pub beta: Literal,
    pub x0: Literal,
    pub y0: Literal,
    pub z0: Literal,
}

impl LorenzSetup {
    /// σ = 10, γ = 28, β = 8/3 from (5, 5, 10).
    pub fn classic() -> Self {
        LorenzSetup {
            sigma: 10.into(),
            gamma: 28.into(),
            beta: Literal::Quotient("8".into(), "3".into()),
            x0: 5.into(),
            y0: 5.into(),
            z0: 10.into(),
        }
    }

    pub fn params(&self, prec: u32) -> Result<LorenzParams> {
        LorenzParams::new(self.sigma.at(prec)?, self.gamma.at(prec)?, self.beta.at(prec)?)
    }

    pub fn initial(&self, prec: u32) -> Result<State3> {
        State3::new(self.x0.at(prec)?, self.y0.at(prec)?, self.z0.at(prec)?)
    }

    pub fn spec(&self, h: &Literal, t: &Literal, prec: u32) -> Result<IntegrationSpec> {
        IntegrationSpec::new(self.params(prec)?, self.initial(prec)?, h.at(prec)?, t.at(prec)?)
    }
}

fn same_precision(values: &[&MpReal]) -> Result<()> {
    let p = values[0].precision();
    match values.iter().find(|v| v.precision() != p) {
        None => Ok(()),
        Some(v) => Err(Error::InvalidSpec(format!(
            "mixed precisions {p} and {} bits",
            v.precision()
        ))),
    }
}

/// Evaluates the vector field:
///
/// ```text
/// dx = σ ⊗ (y ⊖ x)
/// dy = ((γ ⊗ x) ⊖ y) ⊖ (x ⊗ z)
/// dz = (x ⊗ y) ⊖ (β ⊗ z)
/// ```
pub fn lorenz_rhs(params: &LorenzParams, s: &State3) -> Result<State3, MpError> {
    let dx = params.sigma.mul(&s.y.sub(&s.x)?)?;
    let dy = params.gamma.mul(&s.x)?.sub(&s.y)?.sub(&s.x.mul(&s.z)?)?;
    let dz = s.x.mul(&s.y)?.sub(&params.beta.mul(&s.z)?)?;
    Ok(State3 {
        x: dx,
        y: dy,
        z: dz,
    })
}

/// Step size together with the derived `h ⊘ 2` and `h ⊘ 6`.
#[derive(Debug, Clone)]
struct StepSize {
    full: MpReal,
    half: MpReal,
    sixth: MpReal,
}

impl StepSize {
    fn new(h: &MpReal) -> Result<Self, MpError> {
        let p = h.precision();
        Ok(StepSize {
            full: h.clone(),
            half: h.div(&MpReal::from_u64(2, p)?)?,
            sixth: h.div(&MpReal::from_u64(6, p)?)?,
        })
    }
}

/// `s ⊕ (c ⊗ k)` componentwise.
fn axpy(s: &State3, c: &MpReal, k: &State3) -> Result<State3, MpError> {
    Ok(State3 {
        x: s.x.add(&c.mul(&k.x)?)?,
        y: s.y.add(&c.mul(&k.y)?)?,
        z: s.z.add(&c.mul(&k.z)?)?,
    })
}

/// `((k1 ⊕ (k2 ⊕ k2)) ⊕ (k3 ⊕ k3)) ⊕ k4`; `k ⊕ k` is the exact doubling.
fn weighted_sum(k1: &MpReal, k2: &MpReal, k3: &MpReal, k4: &MpReal) -> Result<MpReal, MpError> {
    k1.add(&k2.mul_2exp(1)?)?.add(&k3.mul_2exp(1)?)?.add(k4)
}

fn rk4_with(params: &LorenzParams, s: &State3, h: &StepSize) -> Result<State3, MpError> {
    let k1 = lorenz_rhs(params, s)?;
    let k2 = lorenz_rhs(params, &axpy(s, &h.half, &k1)?)?;
    let k3 = lorenz_rhs(params, &axpy(s, &h.half, &k2)?)?;
    let k4 = lorenz_rhs(params, &axpy(s, &h.full, &k3)?)?;
    Ok(State3 {
        x: s.x.add(&h.sixth.mul(&weighted_sum(&k1.x, &k2.x, &k3.x, &k4.x)?)?)?,
        y: s.y.add(&h.sixth.mul(&weighted_sum(&k1.y, &k2.y, &k3.y, &k4.y)?)?)?,
        z: s.z.add(&h.sixth.mul(&weighted_sum(&k1.z, &k2.z, &k3.z, &k4.z)?)?)?,
    })
}

/// One classical Runge-Kutta step:
/// `s ⊕ (h⊘6) ⊗ (k1 + 2k2 + 2k3 + k4)` with stages at `s ⊕ (h⊘2)⊗k`.
pub fn rk4_step(params: &LorenzParams, s: &State3, h: &MpReal) -> Result<State3> {
    if h.is_zero() || h.is_negative() {
        return Err(Error::InvalidSpec("step h must be > 0".into()));
    }
    let h = StepSize::new(h)?;
    rk4_with(params, s, &h).map_err(|source| Error::Diverged { step: 0, source })
}

/// How an interval `[0, t]` is covered by steps of size `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepPlan {
    pub full_steps: u64,
    /// Final shorter step `t ⊖ n⊗h`, when `t` is not a multiple of `h`.
    pub partial: Option<MpReal>,
}

/// `n = ⌊t/h⌋` full steps and a final partial step `h′ = t − n·h ∈ (0, h)`.
///
/// `t` counts as a multiple of `h` when `|t − n·h| ≤ h·2^(−⌊p/2⌋)` for the
/// nearest integer `n`; binary `h` such as 0.01 is never exact, so without
/// this tolerance `t = 1, h = 0.01` would end in a step of size ~1e-77.
pub fn plan_steps(h: &MpReal, t: &MpReal) -> Result<StepPlan> {
    if h.is_zero() || h.is_negative() {
        return Err(Error::InvalidSpec("step h must be > 0".into()));
    }
    if t.is_negative() {
        return Err(Error::InvalidSpec("end time t must be >= 0".into()));
    }
    if t.is_zero() {
        return Ok(StepPlan {
            full_steps: 0,
            partial: None,
        });
    }
    let p = h.precision();
    let count = |n: u64| MpReal::from_u64(n, p);
    let too_many = || Error::InvalidSpec("t/h exceeds the supported step count".into());
    let q = t.div(h)?;
    let half = MpReal::from_u64(1, p)?.mul_2exp(-1)?;
    let nearest = q.add(&half)?.floor_u64().ok_or_else(too_many)?;
    let residual = t.sub(&count(nearest)?.mul(h)?)?;
    let tolerance = h.mul_2exp(-i64::from(p / 2))?;
    if residual.cmp_abs(&tolerance) != std::cmp::Ordering::Greater {
        return Ok(StepPlan {
            full_steps: nearest,
            partial: None,
        });
    }
    let mut n = q.floor_u64().ok_or_else(too_many)?;
    loop {
        let rest = t.sub(&count(n)?.mul(h)?)?;
        if rest.is_zero() {
            return Ok(StepPlan {
                full_steps: n,
                partial: None,
            });
        }
        if rest.is_negative() {
            n -= 1;
        } else if rest.cmp_abs(h) != std::cmp::Ordering::Less {
            n += 1;
        } else {
            return Ok(StepPlan {
                full_steps: n,
                partial: Some(rest),
            });
        }
    }
}

/// Advances one trajectory step by step with a fixed `h`.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: LorenzParams,
    h: StepSize,
    state: State3,
    steps: u64,
}

impl Stepper {
    pub fn new(params: LorenzParams, initial: State3, h: &MpReal) -> Result<Self> {
        same_precision(&[&params.sigma, &initial.x, h])?;
        if h.is_zero() || h.is_negative() {
            return Err(Error::InvalidSpec("step h must be > 0".into()));
        }
        Ok(Stepper {
            params,
            h: StepSize::new(h)?,
            state: initial,
            steps: 0,
        })
    }

    pub fn state(&self) -> &State3 {
        &self.state
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    pub fn into_state(self) -> State3 {
        self.state
    }

    pub fn step(&mut self) -> Result<&State3> {
        let step = self.steps + 1;
        self.state = rk4_with(&self.params, &self.state, &self.h)
            .map_err(|source| Error::Diverged { step, source })?;
        self.steps = step;
        Ok(&self.state)
    }

    /// One step of a different size `h′`, counted as a step.
    pub fn step_by(&mut self, h: &MpReal) -> Result<&State3> {
        let step = self.steps + 1;
        let size = StepSize::new(h).map_err(|source| Error::Diverged { step, source })?;
        self.state = rk4_with(&self.params, &self.state, &size)
            .map_err(|source| Error::Diverged { step, source })?;
        self.steps = step;
        Ok(&self.state)
    }
}

/// Integrate to exactly `t` following [`plan_steps`].
pub fn integrate(spec: &IntegrationSpec) -> Result<State3> {
    integrate_observed(spec, |_, _| {})
}

/// [`integrate`], calling `observe(step_index, state)` after every step
/// (index 0 is the initial state).
pub fn integrate_observed(
    spec: &IntegrationSpec,
    mut observe: impl FnMut(u64, &State3),
) -> Result<State3> {
    spec.validate()?;
    let plan = plan_steps(&spec.h, &spec.t)?;
    let mut stepper = Stepper::new(spec.params.clone(), spec.initial.clone(), &spec.h)?;
    observe(0, stepper.state());
    for _ in 0..plan.full_steps {
        stepper.step()?;
        observe(stepper.steps, stepper.state());
    }
    if let Some(partial) = &plan.partial {
        stepper.step_by(partial)?;
        observe(stepper.steps, stepper.state());
    }
    Ok(stepper.into_state())
}

/// CSV `t,x,y,z` with round-trip decimal digits, one row every `every`
/// full steps plus the final state at exactly `t`.
pub fn write_trajectory_csv(spec: &IntegrationSpec, every: u64, mut out: impl Write) -> Result<()> {
    let every = every.max(1);
    let digits = spec.h.round_trip_digits();
    let p = spec.precision();
    let plan = plan_steps(&spec.h, &spec.t)?;
    let total = plan.full_steps + u64::from(plan.partial.is_some());
    let io = |e: std::io::Error| Error::Config(format!("write failed: {e}"));
    writeln!(out, "t,x,y,z").map_err(io)?;
    let mut failure = None;
    integrate_observed(spec, |i, s| {
        if failure.is_some() || !(i % every == 0 || i == total) {
            return;
        }
        let t = if i == total {
            Ok(spec.t.clone())
        } else {
            MpReal::from_u64(i, p).and_then(|n| n.mul(&spec.h))
        };
        let row = t.map(|t| {
            format!(
                "{},{},{},{}",
                t.to_decimal(digits),
                s.x.to_decimal(digits),
                s.y.to_decimal(digits),
                s.z.to_decimal(digits)
            )
        });
        match row {
            Ok(row) => {
                if let Err(e) = writeln!(out, "{row}") {
                    failure = Some(io(e));
                }
            }
            Err(e) => failure = Some(e.into()),
        }
    })?;
    failure.map_or(Ok(()), Err)
}
