//! Power-shaped fuzzy intervals used as possibility distributions of single
//! uncertain quantities.
//!
//! A coefficient is written `<nominal, dev_lo, dev_hi>_{z1-z2}`. Its membership
//! function rises from `nominal - dev_lo` to `nominal` as
//! `(1 + (x - nominal) / dev_lo)^(1/z1)` and falls to `nominal + dev_hi` as
//! `(1 + (nominal - x) / dev_hi)^(1/z2)`. Inverting `mu(x) >= lambda` gives
//! the lambda-cut bounds `nominal - dev_lo (1 - lambda^z1)` and
//! `nominal + dev_hi (1 - lambda^z2)`, so membership and cuts use the
//! reciprocal exponents `1/z` and `z` respectively.

use crate::error::{check_unit_interval, Error, Result};

/// Possibility distribution of one uncertain coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyInterval {
    nominal: f64,
    dev_lo: f64,
    dev_hi: f64,
    shape_lo: f64,
    shape_hi: f64,
}

impl FuzzyInterval {
    pub fn new(nominal: f64, dev_lo: f64, dev_hi: f64, shape_lo: f64, shape_hi: f64) -> Result<Self> {
        if !nominal.is_finite() {
            return Err(Error::Validation(format!("nominal value {nominal} is not finite")));
        }
        for (what, v) in [("dev_lo", dev_lo), ("dev_hi", dev_hi)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain {
                    what,
                    value: v,
                    domain: "[0, inf)",
                });
            }
        }
        for (what, v) in [("shape_lo", shape_lo), ("shape_hi", shape_hi)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain {
                    what,
                    value: v,
                    domain: "(0, inf)",
                });
            }
        }
        Ok(Self {
            nominal,
            dev_lo,
            dev_hi,
            shape_lo,
            shape_hi,
        })
    }

    /// Symmetric interval `<nominal, dev, dev>_{z-z}`.
    pub fn symmetric(nominal: f64, dev: f64, shape: f64) -> Result<Self> {
        Self::new(nominal, dev, dev, shape, shape)
    }

    /// A coefficient without uncertainty.
    pub fn crisp(nominal: f64) -> Result<Self> {
        Self::new(nominal, 0.0, 0.0, 1.0, 1.0)
    }

    pub fn nominal(&self) -> f64 {
        self.nominal
    }

    pub fn dev_lo(&self) -> f64 {
        self.dev_lo
    }

    pub fn dev_hi(&self) -> f64 {
        self.dev_hi
    }

    pub fn shape_lo(&self) -> f64 {
        self.shape_lo
    }

    pub fn shape_hi(&self) -> f64 {
        self.shape_hi
    }

    /// Support `[nominal - dev_lo, nominal + dev_hi]`.
    pub fn support(&self) -> (f64, f64) {
        (self.nominal - self.dev_lo, self.nominal + self.dev_hi)
    }

    /// Membership degree (possibility) of `x`.
    pub fn membership(&self, x: f64) -> f64 {
        if x == self.nominal {
            return 1.0;
        }
        if x < self.nominal {
            // a zero deviation collapses the branch onto the nominal point
            if self.dev_lo == 0.0 {
                return 0.0;
            }
            let base = 1.0 + (x - self.nominal) / self.dev_lo;
            if base <= 0.0 {
                0.0
            } else {
                base.powf(1.0 / self.shape_lo)
            }
        } else {
            if self.dev_hi == 0.0 {
                return 0.0;
            }
            let base = 1.0 + (self.nominal - x) / self.dev_hi;
            if base <= 0.0 {
                0.0
            } else {
                base.powf(1.0 / self.shape_hi)
            }
        }
    }

    /// The lambda-cut `[lower, upper]`; `cut(0)` is the support.
    pub fn cut(&self, lambda: f64) -> Result<(f64, f64)> {
        check_unit_interval("lambda", lambda)?;
        Ok((
            self.nominal - self.dev_lo * (1.0 - lambda.powf(self.shape_lo)),
            self.nominal + self.dev_hi * (1.0 - lambda.powf(self.shape_hi)),
        ))
    }
}

/// Possibility distribution `<0, budget>_z` of the distance between a
/// scenario and the nominal scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationInterval {
    budget: f64,
    shape: f64,
}

impl DeviationInterval {
    pub fn new(budget: f64, shape: f64) -> Result<Self> {
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(Error::Domain {
                what: "budget",
                value: budget,
                domain: "[0, inf)",
            });
        }
        if !(shape.is_finite() && shape > 0.0) {
            return Err(Error::Domain {
                what: "shape",
                value: shape,
                domain: "(0, inf)",
            });
        }
        Ok(Self { budget, shape })
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn membership(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 1.0;
        }
        if x < 0.0 || x >= self.budget {
            return 0.0;
        }
        (1.0 - x / self.budget).powf(1.0 / self.shape)
    }

    /// Radius `budget * (1 - lambda^shape)` of the lambda-cut `[0, radius]`.
    pub fn dev_cut(&self, lambda: f64) -> Result<f64> {
        check_unit_interval("lambda", lambda)?;
        Ok(self.budget * (1.0 - lambda.powf(self.shape)))
    }
}
