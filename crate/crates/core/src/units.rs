//! Money unit conversions.
//!
//! Every amount inside the library is in EUR. External files and the CLI use
//! k€ for incomes and G€ for aggregate masses; convert only at those edges.

pub const EUR_PER_KEUR: f64 = 1e3;
pub const EUR_PER_GEUR: f64 = 1e9;

#[inline]
pub fn keur_to_eur(v: f64) -> f64 {
    v * EUR_PER_KEUR
}

#[inline]
pub fn eur_to_keur(v: f64) -> f64 {
    v / EUR_PER_KEUR
}

#[inline]
pub fn geur_to_eur(v: f64) -> f64 {
    v * EUR_PER_GEUR
}

#[inline]
pub fn eur_to_geur(v: f64) -> f64 {
    v / EUR_PER_GEUR
}
