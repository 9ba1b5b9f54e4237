//! Chebyshev interpolation, Remez best approximation (interval and discrete),
//! diagonal Padé approximants to `exp` and Zolotarev approximants to `√x`.

mod chebyshev;
mod pade;
mod remez;
mod zolotarev;

pub use chebyshev::{chebyshev_extrema, chebyshev_interpolant, chebyshev_roots, sup_error, ChebPoly};
pub use pade::{pade_exp, pade_exp_coeffs, pade_exp_scaled};
pub use remez::{discrete_best_poly, remez_best_poly, BestApprox};
pub use zolotarev::{agm, ellip_k, sncndn, zolotarev_sqrt};
