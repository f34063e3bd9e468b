use crate::RhsError;

/// A first-order system `dy/dt = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError>;

    /// Called on every accepted state. Implementations may clamp components
    /// back into their admissible range. Returns true if `y` was modified.
    fn project(&self, _y: &mut [f64]) -> bool {
        false
    }

    fn state_name(&self, index: usize) -> String {
        format!("y[{index}]")
    }
}

impl<S: OdeSystem + ?Sized> OdeSystem for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
        (**self).rhs(t, y, dydt)
    }
    fn project(&self, y: &mut [f64]) -> bool {
        (**self).project(y)
    }
    fn state_name(&self, index: usize) -> String {
        (**self).state_name(index)
    }
}
