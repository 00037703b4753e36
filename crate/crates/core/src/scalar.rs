use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar the operators are generic over: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Lossy conversion from an `f64` constant.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Relative cutoff below which a singular value counts as zero.
    fn rank_cutoff() -> Self;
}

impl Real for f32 {
    fn rank_cutoff() -> Self {
        1e-5
    }
}

impl Real for f64 {
    fn rank_cutoff() -> Self {
        1e-10
    }
}
