use serde::{Deserialize, Serialize};

/// Radial profile ψ applied to the scaled distance `ε·‖x − c‖`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RbfKind {
    #[default]
    Thinplate,
    Gauss,
    Invquad,
    Invmultiquad,
    Polyharmonic,
}

impl RbfKind {
    /// `order` is only used by the polyharmonic profile.
    pub fn eval(self, r: f64, order: u32) -> f64 {
        match self {
            RbfKind::Thinplate => {
                if r == 0.0 {
                    0.0
                } else {
                    r * r * r.ln()
                }
            }
            RbfKind::Gauss => (-(r * r)).exp(),
            RbfKind::Invquad => 1.0 / (1.0 + r * r),
            RbfKind::Invmultiquad => 1.0 / (1.0 + r * r).sqrt(),
            RbfKind::Polyharmonic => {
                // r^k for odd k, r^k ln r for even k
                if order % 2 == 1 {
                    r.powi(order as i32)
                } else if r == 0.0 {
                    0.0
                } else {
                    r.powi(order as i32) * r.ln()
                }
            }
        }
    }
}
