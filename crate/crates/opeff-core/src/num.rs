//! Float math routed through libstd or libm depending on features.

#[cfg(feature = "std")]
mod imp {
    pub fn powf(x: f64, y: f64) -> f64 {
        x.powf(y)
    }
    pub fn abs(x: f64) -> f64 {
        x.abs()
    }
    pub fn floor(x: f64) -> f64 {
        x.floor()
    }
    pub fn ceil(x: f64) -> f64 {
        x.ceil()
    }
    pub fn round(x: f64) -> f64 {
        x.round()
    }
}

#[cfg(all(not(feature = "std"), feature = "libm"))]
mod imp {
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
    pub fn ceil(x: f64) -> f64 {
        libm::ceil(x)
    }
    pub fn round(x: f64) -> f64 {
        libm::round(x)
    }
}

pub(crate) use imp::{abs, ceil, floor, powf, round};
