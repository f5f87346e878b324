//! The horocycle flow on PSL(2,R) and on the quotient, plus time changes
//! generated by bounded positive speed fields with their forward and inverse
//! reparametrizations `beta` and `alpha`.

use std::sync::Arc;

use serde::Serialize;

use crate::fuchsian::{FuchsianGroup, QuotientPoint};
use crate::psl2::{GroupElement, PointH2};
use crate::{Error, Result};

/// Right translation by the horocycle subgroup: `g -> g b_t`.
pub fn flow_on_g(g: &GroupElement, t: f64) -> GroupElement {
    g.compose(&GroupElement::horocycle(t))
}

/// The quotient horocycle flow `Gamma g -> Gamma g b_t`. Acts on the carried
/// representative, so it commutes with [`project`] by construction.
pub fn horocycle_flow(x: &QuotientPoint, t: f64) -> QuotientPoint {
    QuotientPoint::new(flow_on_g(x.rep(), t), x.group().clone())
}

/// Natural projection `g -> Gamma g`.
pub fn project(g: GroupElement, group: &Arc<FuchsianGroup>) -> QuotientPoint {
    QuotientPoint::new(g, group.clone())
}

/// A positive speed field on the quotient, specified as a named built-in.
/// Fields are evaluated on the carried representative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SpeedField {
    /// `speed = value` everywhere.
    Constant { value: f64 },
    /// `speed = 1 + amplitude * sin(x(rep i) + phase)` where `x(rep i)` is
    /// the first coordinate of the representative's basepoint image.
    Sinusoidal { amplitude: f64, phase: f64 },
}

impl SpeedField {
    pub fn constant(value: f64) -> Result<SpeedField> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Config(format!(
                "constant speed must be positive and finite, got {value}"
            )));
        }
        Ok(SpeedField::Constant { value })
    }

    pub fn sinusoidal(amplitude: f64, phase: f64) -> Result<SpeedField> {
        if !(0.0..1.0).contains(&amplitude) || !phase.is_finite() {
            return Err(Error::Config(format!(
                "sinusoidal speed needs amplitude in [0, 1) and finite phase, \
                 got amplitude {amplitude}, phase {phase}"
            )));
        }
        Ok(SpeedField::Sinusoidal { amplitude, phase })
    }

    /// Parse `constant:<c>` or `sinusoidal:<amplitude>:<phase>`.
    pub fn parse(spec: &str) -> Result<SpeedField> {
        let mut parts = spec.split(':');
        let kind = parts.next().unwrap_or("");
        let rest: Vec<&str> = parts.collect();
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number {s:?} in speed spec {spec:?}")))
        };
        match (kind.trim(), rest.as_slice()) {
            ("constant", [c]) => SpeedField::constant(num(c)?),
            ("sinusoidal", [amp]) => SpeedField::sinusoidal(num(amp)?, 0.0),
            ("sinusoidal", [amp, phase]) => SpeedField::sinusoidal(num(amp)?, num(phase)?),
            _ => Err(Error::Config(format!(
                "speed spec {spec:?} is not 'constant:<c>' or 'sinusoidal:<amplitude>[:<phase>]'"
            ))),
        }
    }

    pub fn eval(&self, x: &QuotientPoint) -> f64 {
        match self {
            SpeedField::Constant { value } => *value,
            SpeedField::Sinusoidal { amplitude, phase } => {
                let z = x.rep().mobius(&PointH2::I);
                1.0 + amplitude * (z.x + phase).sin()
            }
        }
    }

    /// `(f_min, f_max)` with `0 < f_min <= f_max < inf`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            SpeedField::Constant { value } => (*value, *value),
            SpeedField::Sinusoidal { amplitude, .. } => (1.0 - amplitude, 1.0 + amplitude),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SpeedField::Constant { value } => format!("constant:{value}"),
            SpeedField::Sinusoidal { amplitude, phase } => {
                format!("sinusoidal:{amplitude}:{phase}")
            }
        }
    }
}

/// A time change of the horocycle flow generated by a speed field:
/// `psi_t(x) = theta_{beta(t, x)}(x)` where `beta` solves
/// `beta'(u) = speed(theta_{beta(u)}(x))`, `beta(0) = 0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimeChange {
    pub speed: SpeedField,
    pub integrator_step: f64,
}

impl TimeChange {
    pub fn new(speed: SpeedField, integrator_step: f64) -> Result<TimeChange> {
        if !integrator_step.is_finite() || integrator_step <= 0.0 {
            return Err(Error::Config(format!(
                "integrator step must be positive and finite, got {integrator_step}"
            )));
        }
        Ok(TimeChange {
            speed,
            integrator_step,
        })
    }

    /// Forward reparametrization: fixed-step classical RK4 on the autonomous
    /// scalar equation, with the step shrunk uniformly so the grid lands on
    /// `t` exactly. Strictly increasing since every stage value is at least
    /// `f_min > 0`.
    pub fn beta(&self, t: f64, x: &QuotientPoint) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let steps = (t.abs() / self.integrator_step).ceil().max(1.0) as usize;
        let h = t / steps as f64;
        let f = |b: f64| self.speed.eval(&horocycle_flow(x, b));
        let mut b = 0.0;
        for _ in 0..steps {
            let k1 = f(b);
            let k2 = f(b + 0.5 * h * k1);
            let k3 = f(b + 0.5 * h * k2);
            let k4 = f(b + h * k3);
            b += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        b
    }

    /// Inverse reparametrization in the time slot: the unique `u` with
    /// `beta(u, x) = t`, found by monotone bisection on the bracket
    /// `[t/f_max, t/f_min]` to a 1e-10 slot followed by one Newton polish
    /// (`beta' = speed` at the current point).
    pub fn alpha(&self, t: f64, x: &QuotientPoint) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let (f_min, f_max) = self.speed.bounds();
        let (mut lo, mut hi) = if t > 0.0 {
            (t / f_max, t / f_min)
        } else {
            (t / f_min, t / f_max)
        };
        for _ in 0..200 {
            if hi - lo <= 1e-10 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.beta(mid, x) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let u = 0.5 * (lo + hi);
        let bu = self.beta(u, x);
        u - (bu - t) / self.speed.eval(&horocycle_flow(x, bu))
    }

    /// The time-changed flow `psi_t(x) = theta_{beta(t, x)}(x)`.
    pub fn psi(&self, t: f64, x: &QuotientPoint) -> QuotientPoint {
        horocycle_flow(x, self.beta(t, x))
    }
}
