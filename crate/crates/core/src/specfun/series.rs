//! Compensated accumulation of series whose partial sums may leave the f64 range.

/// Partial sums above this magnitude are rescaled.
const RESCALE_ABOVE: f64 = 1e200;

/// A real number stored as `value * exp(ln_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Scaled {
    pub value: f64,
    pub ln_scale: f64,
}

impl Scaled {
    pub fn one() -> Self {
        Scaled { value: 1.0, ln_scale: 0.0 }
    }

    pub fn exp(x: f64) -> Self {
        Scaled { value: 1.0, ln_scale: x }
    }

    /// `ln |self|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.value.abs().ln() + self.ln_scale
    }

    pub fn is_positive(&self) -> bool {
        self.value > 0.0
    }

    pub fn to_f64(self) -> f64 {
        if self.value == 0.0 {
            return 0.0;
        }
        self.value.signum() * self.ln_abs().exp()
    }
}

/// Neumaier-compensated running sum in a movable logarithmic frame.
///
/// Terms are added either directly in the current frame (`add`) or as
/// `mant * exp(ln_scale)` (`add_scaled`), which moves the frame when needed.
#[derive(Debug, Clone)]
pub(crate) struct ScaledSum {
    sum: f64,
    comp: f64,
    max_abs: f64,
    ln_scale: f64,
}

impl ScaledSum {
    pub fn new() -> Self {
        ScaledSum { sum: 0.0, comp: 0.0, max_abs: 0.0, ln_scale: 0.0 }
    }

    pub fn ln_scale(&self) -> f64 {
        self.ln_scale
    }

    /// Adds a term expressed in the current frame.
    pub fn add(&mut self, t: f64) {
        let s = self.sum + t;
        if self.sum.abs() >= t.abs() {
            self.comp += (self.sum - s) + t;
        } else {
            self.comp += (t - s) + self.sum;
        }
        self.sum = s;
        self.max_abs = self.max_abs.max(t.abs());
    }

    /// Adds `mant * exp(ln_scale)`, exactly when `ln_scale` is the current frame.
    pub fn add_scaled(&mut self, mant: f64, ln_scale: f64) {
        if mant == 0.0 {
            return;
        }
        if self.max_abs == 0.0 {
            self.ln_scale = ln_scale;
        } else if ln_scale == self.ln_scale {
            self.add(mant);
            return;
        } else if ln_scale + mant.abs().ln() - self.ln_scale > 300.0 {
            self.shift_frame(ln_scale);
        }
        self.add(mant * (ln_scale - self.ln_scale).exp());
    }

    /// Moves the frame if the running sum is getting large; returns the
    /// factor the caller must apply to any term it carries in this frame.
    pub fn rescale_if_needed(&mut self) -> f64 {
        if self.sum.abs() > RESCALE_ABOVE || self.max_abs > RESCALE_ABOVE {
            let factor = 1.0 / RESCALE_ABOVE;
            self.sum *= factor;
            self.comp *= factor;
            self.max_abs *= factor;
            self.ln_scale += RESCALE_ABOVE.ln();
            factor
        } else {
            1.0
        }
    }

    fn shift_frame(&mut self, new_ln_scale: f64) {
        let factor = (self.ln_scale - new_ln_scale).exp();
        self.sum *= factor;
        self.comp *= factor;
        self.max_abs *= factor;
        self.ln_scale = new_ln_scale;
    }

    /// Compensated total in the current frame.
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }

    /// Largest term magnitude over the result magnitude. Infinite when the
    /// sum cancelled to exactly zero.
    pub fn cancellation_ratio(&self) -> f64 {
        let t = self.total().abs();
        if t == 0.0 {
            if self.max_abs == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.max_abs / t
        }
    }

    pub fn finish(&self) -> Scaled {
        Scaled { value: self.total(), ln_scale: self.ln_scale }
    }
}
