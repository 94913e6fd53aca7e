//! Scalar abstraction for the numeric pipeline.
//!
//! Every matrix, vector, and loss in this crate is generic over [`Scalar`],
//! implemented for `f32` and `f64`. The associated [`Scalar::Atomic`] cell is
//! what lets embedding training share its weight tables across workers with
//! relaxed, unsynchronized element-wise updates (lost updates are tolerated by
//! contract; determinism is only guaranteed single-worker).

use std::fmt;
use std::iter::Sum;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Atomic cell holding one scalar; all accesses are `Relaxed`.
    type Atomic: Send + Sync;

    fn atomic_new(value: Self) -> Self::Atomic;
    fn atomic_load(cell: &Self::Atomic) -> Self;
    fn atomic_store(cell: &Self::Atomic, value: Self);

    /// Lossless-enough conversion for configuration constants.
    fn from_f64_cfg(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant representable in scalar type")
    }
}

impl Scalar for f32 {
    type Atomic = AtomicU32;

    fn atomic_new(value: Self) -> Self::Atomic {
        AtomicU32::new(value.to_bits())
    }

    fn atomic_load(cell: &Self::Atomic) -> Self {
        f32::from_bits(cell.load(Ordering::Relaxed))
    }

    fn atomic_store(cell: &Self::Atomic, value: Self) {
        cell.store(value.to_bits(), Ordering::Relaxed);
    }
}

impl Scalar for f64 {
    type Atomic = AtomicU64;

    fn atomic_new(value: Self) -> Self::Atomic {
        AtomicU64::new(value.to_bits())
    }

    fn atomic_load(cell: &Self::Atomic) -> Self {
        f64::from_bits(cell.load(Ordering::Relaxed))
    }

    fn atomic_store(cell: &Self::Atomic, value: Self) {
        cell.store(value.to_bits(), Ordering::Relaxed);
    }
}

/// Logistic function `1 / (1 + e^-x)`, computed exactly (no lookup table) so
/// gradient checks hold to finite-difference accuracy.
pub fn sigmoid<S: Scalar>(x: S) -> S {
    S::one() / (S::one() + (-x).exp())
}
