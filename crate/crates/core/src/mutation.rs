//! Deliberate defects for mutation-sensitivity checks.
//!
//! With the `mutation` feature each switch is a process-wide flag; without it
//! every query is a constant `false` and compiles away.

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Mutation {
    /// Negates every Poisson bracket.
    FlipBracketSign = 1,
    /// Ignores the Koszul sign when multiplying monomials.
    DropKoszulSign = 2,
    /// Omits the `1/k!` factors of the twisting series.
    DropFactorial = 4,
}

#[cfg(feature = "mutation")]
mod imp {
    use super::Mutation;
    use core::sync::atomic::{AtomicU8, Ordering};

    static ACTIVE: AtomicU8 = AtomicU8::new(0);

    pub fn set(m: Option<Mutation>) {
        ACTIVE.store(m.map_or(0, |m| m as u8), Ordering::SeqCst);
    }

    #[inline]
    pub fn active(m: Mutation) -> bool {
        ACTIVE.load(Ordering::Relaxed) & m as u8 != 0
    }
}

#[cfg(feature = "mutation")]
pub use imp::set;

#[cfg(feature = "mutation")]
#[inline]
pub(crate) fn active(m: Mutation) -> bool {
    imp::active(m)
}

#[cfg(not(feature = "mutation"))]
#[inline(always)]
pub(crate) fn active(_: Mutation) -> bool {
    false
}
