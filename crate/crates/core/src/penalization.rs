//! Admissible penalizations `beta_eps` of the boundary constraint.
//!
//! An admissible family is uniformly Lipschitz, non-positive, vanishes on
//! `t >= 0`, is nondecreasing and concave. Only the canonical linear member
//! `beta_eps(t) = min(t, 0) / eps` ships; [`PenaltyKind`] is the extension point.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyKind {
    CanonicalLinear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalization<T> {
    kind: PenaltyKind,
    epsilon: T,
}

impl<T: Real> Penalization<T> {
    pub fn canonical(epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero()) || !epsilon.is_finite() {
            return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self {
            kind: PenaltyKind::CanonicalLinear,
            epsilon,
        })
    }

    pub fn kind(&self) -> PenaltyKind {
        self.kind
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn beta(&self, t: T) -> T {
        match self.kind {
            PenaltyKind::CanonicalLinear => {
                if t < T::zero() {
                    t / self.epsilon
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Derivative of `beta`; the right derivative (zero) is used at `t = 0`.
    pub fn beta_prime(&self, t: T) -> T {
        match self.kind {
            PenaltyKind::CanonicalLinear => {
                if t < T::zero() {
                    self.epsilon.recip()
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Antiderivative `int_0^t beta`, the boundary energy density. Non-negative.
    pub fn potential(&self, t: T) -> T {
        match self.kind {
            PenaltyKind::CanonicalLinear => {
                if t < T::zero() {
                    t * t / (lit::<T>(2.0) * self.epsilon)
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Global Lipschitz constant of `beta`.
    pub fn lipschitz(&self) -> T {
        self.epsilon.recip()
    }

    /// Member of the same family satisfying `rescaled.beta(t) == self.beta(sigma * t)`,
    /// i.e. parameter `epsilon / sigma`.
    pub fn rescale(&self, sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidConfig(format!("scale must be positive, got {sigma}")));
        }
        Ok(Self {
            kind: self.kind,
            epsilon: self.epsilon / sigma,
        })
    }

    pub fn admissibility(&self, range: (T, T), samples: usize) -> AdmissibilityReport<T> {
        admissibility_check(|t| self.beta(t), Some(self.lipschitz()), range, samples)
    }
}

/// Items of the admissibility definition, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdmissibilityItem {
    UniformlyLipschitz,
    NonPositive,
    VanishesOnNonNegative,
    Nondecreasing,
    Concave,
}

impl AdmissibilityItem {
    pub const ALL: [AdmissibilityItem; 5] = [
        Self::UniformlyLipschitz,
        Self::NonPositive,
        Self::VanishesOnNonNegative,
        Self::Nondecreasing,
        Self::Concave,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemOutcome<T> {
    pub item: AdmissibilityItem,
    pub passed: bool,
    /// Sample point at which the item failed.
    pub witness: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport<T> {
    pub items: Vec<ItemOutcome<T>>,
    /// Largest difference quotient seen on the sample set.
    pub max_slope: T,
}

impl<T: Real> AdmissibilityReport<T> {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|o| o.passed)
    }

    pub fn outcome(&self, item: AdmissibilityItem) -> &ItemOutcome<T> {
        self.items.iter().find(|o| o.item == item).expect("every item is reported")
    }
}

/// Audits a candidate penalization on a uniform sample of `range`.
///
/// With `lipschitz_bound = None` the Lipschitz item only requires finite
/// difference quotients.
pub fn admissibility_check<T: Real>(
    beta: impl Fn(T) -> T,
    lipschitz_bound: Option<T>,
    range: (T, T),
    samples: usize,
) -> AdmissibilityReport<T> {
    let n = samples.max(3);
    let (a, b) = range;
    let step = (b - a) / lit((n - 1) as f64);
    let ts: Vec<T> = (0..n).map(|i| a + step * lit(i as f64)).collect();
    let vals: Vec<T> = ts.iter().map(|&t| beta(t)).collect();
    let scale = vals.iter().fold(T::one(), |m, v| m.max(v.abs()));
    let tol = lit::<T>(1e3) * T::epsilon() * scale;

    let slopes: Vec<T> = (1..n).map(|i| (vals[i] - vals[i - 1]) / step).collect();
    let max_slope = slopes.iter().fold(T::zero(), |m, s| m.max(s.abs()));

    let first = |pred: &dyn Fn(usize) -> bool, over: usize| (0..over).find(|&i| pred(i));

    let lip_fail = first(
        &|i| {
            let s = slopes[i].abs();
            !s.is_finite() || lipschitz_bound.is_some_and(|l| s > l * (T::one() + lit(1e-9)) + tol)
        },
        n - 1,
    );
    let nonpos_fail = first(&|i| vals[i] > tol, n);
    let zero_fail = first(&|i| ts[i] >= T::zero() && vals[i].abs() > tol, n);
    let mono_fail = first(&|i| slopes[i] * step < -tol, n - 1);
    let concave_fail = first(&|i| (slopes[i + 1] - slopes[i]) * step > tol, n - 2);

    let outcome = |item, fail: Option<usize>, at: &dyn Fn(usize) -> T| ItemOutcome {
        item,
        passed: fail.is_none(),
        witness: fail.map(at),
    };
    let items = vec![
        outcome(AdmissibilityItem::UniformlyLipschitz, lip_fail, &|i| ts[i]),
        outcome(AdmissibilityItem::NonPositive, nonpos_fail, &|i| ts[i]),
        outcome(AdmissibilityItem::VanishesOnNonNegative, zero_fail, &|i| ts[i]),
        outcome(AdmissibilityItem::Nondecreasing, mono_fail, &|i| ts[i]),
        outcome(AdmissibilityItem::Concave, concave_fail, &|i| ts[i + 1]),
    ];
    AdmissibilityReport { items, max_slope }
}
