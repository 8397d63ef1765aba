//! Unit-roof suspensions over a measure-preserving base map.

use crate::error::{Result, ShearError};
use crate::flows::geometry::wrap_unit;
use crate::rng::splitmix64;

/// Largest denominator screened when validating a rotation number.
const ROTATION_SCREEN: u64 = 1_000_000;

/// The base system `(A, nu, T)` with `A = [0, 1)` and `nu` Lebesgue.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseMapSpec {
    /// `x -> 2x mod 1`.
    Doubling,
    /// `x -> x + alpha mod 1`, `alpha` irrational.
    Rotation(f64),
}

impl BaseMapSpec {
    /// Rotation by `alpha`, rejected when `alpha` is within 1e-12 of a
    /// rational with denominator at most 10^6.
    pub fn rotation(alpha: f64) -> Result<Self> {
        let spec = BaseMapSpec::Rotation(alpha);
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let BaseMapSpec::Rotation(alpha) = *self {
            if !alpha.is_finite() {
                return Err(ShearError::InvalidParameter("rotation number must be finite".into()));
            }
            for q in 1..=ROTATION_SCREEN {
                let qa = q as f64 * alpha;
                if (qa - qa.round()).abs() < 1e-12 {
                    return Err(ShearError::InvalidParameter(format!(
                        "rotation number {alpha} is rational with denominator {q}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `T^k(mark)`.
    pub fn iterate(&self, mark: &Mark, k: u64) -> Mark {
        match (self, mark) {
            (BaseMapSpec::Doubling, Mark::Binary { key, shift }) => Mark::Binary { key: *key, shift: shift + k },
            (BaseMapSpec::Doubling, m) => {
                // float marks are dyadic: their doubling orbit reaches 0
                // after at most 1075 steps and stays there
                let mut x = m.value();
                for _ in 0..k.min(1100) {
                    if x == 0.0 {
                        break;
                    }
                    x = wrap_unit(2.0 * x);
                }
                Mark::Real(x)
            }
            (BaseMapSpec::Rotation(alpha), m) => {
                let step = wrap_unit((k as f64) * alpha);
                Mark::Real(wrap_unit(m.value() + step))
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            BaseMapSpec::Doubling => "doubling".into(),
            BaseMapSpec::Rotation(a) => format!("rotation({a})"),
        }
    }
}

/// A point of the base space `A = [0, 1)`.
///
/// `Binary` is the point whose binary expansion is a keyed pseudo-random
/// bit stream read from bit `shift` on. The doubling map shifts that stream,
/// so its orbit is exact for any number of steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mark {
    Real(f64),
    Binary { key: u64, shift: u64 },
}

impl Mark {
    pub fn value(&self) -> f64 {
        match *self {
            Mark::Real(x) => x,
            Mark::Binary { key, shift } => {
                let word = |i: u64| splitmix64(key ^ splitmix64(i));
                let (wi, off) = (shift / 64, (shift % 64) as u32);
                let bits = if off == 0 { word(wi) } else { (word(wi) << off) | (word(wi + 1) >> (64 - off)) };
                (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
            }
        }
    }

    /// Distance on R/Z between the represented points.
    pub fn distance(&self, other: &Mark) -> f64 {
        crate::flows::geometry::circle_distance(self.value(), other.value())
    }
}

/// State `(x, s)` of a unit-roof suspension: base point and roof height.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuspensionState {
    pub mark: Mark,
    pub height: f64,
}

/// Flow the suspension `(x, s) -> (T^k x, s + speed t - k)` with
/// `k = floor(s + speed t)`.
pub fn suspension_evolve(base: &BaseMapSpec, speed: f64, state: SuspensionState, t: f64) -> Result<SuspensionState> {
    if !t.is_finite() {
        return Err(ShearError::NonFiniteTime(t));
    }
    if t < 0.0 {
        return Err(ShearError::NegativeTime(t));
    }
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(ShearError::InvalidParameter(format!("suspension speed {speed} must be positive")));
    }
    if !(0.0..1.0).contains(&state.height) {
        return Err(ShearError::OutOfDomain(format!("roof height {} outside [0, 1)", state.height)));
    }
    let total = state.height + speed * t;
    let k = total.floor();
    let mut height = total - k;
    if height >= 1.0 {
        height = 0.0;
    }
    Ok(SuspensionState { mark: base.iterate(&state.mark, k as u64), height })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn no_roof_crossing() {
        let s = SuspensionState { mark: Mark::Real(0.1), height: 0.5 };
        let out = suspension_evolve(&BaseMapSpec::Doubling, 1.0, s, 0.25).unwrap();
        assert!(close(out.mark.value(), 0.1) && close(out.height, 0.75));
    }

    #[test]
    fn one_roof_crossing() {
        let s = SuspensionState { mark: Mark::Real(0.1), height: 0.5 };
        let out = suspension_evolve(&BaseMapSpec::Doubling, 1.0, s, 1.0).unwrap();
        assert!(close(out.mark.value(), 0.2) && close(out.height, 0.5));
    }

    #[test]
    fn three_roof_crossings() {
        // by hand: 0.1 -> 0.2 -> 0.4 -> 0.8, height 3.2 - 3
        let s = SuspensionState { mark: Mark::Real(0.1), height: 0.0 };
        let out = suspension_evolve(&BaseMapSpec::Doubling, 2.0, s, 1.6).unwrap();
        assert!(close(out.mark.value(), 0.8) && close(out.height, 0.2), "{out:?}");
    }

    #[test]
    fn negative_time_rejected() {
        let s = SuspensionState { mark: Mark::Real(0.1), height: 0.0 };
        assert_eq!(suspension_evolve(&BaseMapSpec::Doubling, 1.0, s, -1.0), Err(ShearError::NegativeTime(-1.0)));
    }

    #[test]
    fn binary_mark_shift_is_doubling() {
        let m = Mark::Binary { key: 99, shift: 17 };
        let x = m.value();
        let y = BaseMapSpec::Doubling.iterate(&m, 1).value();
        // doubling of the 53-bit truncation agrees up to the newly read bit
        assert!((wrap_unit(2.0 * x) - y).abs() < 2e-16);
        let far = BaseMapSpec::Doubling.iterate(&m, 5000).value();
        assert!(far > 0.0 && far < 1.0);
    }

    #[test]
    fn rational_rotation_rejected() {
        assert!(BaseMapSpec::rotation(0.5).is_err());
        assert!(BaseMapSpec::rotation(3.0 / 7.0).is_err());
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!(BaseMapSpec::rotation(golden).is_ok());
    }
}
