//! Critical graphs of the quadratic differentials λ²(z−a)(z−b)/z⁴ dz² and the
//! zeros of generalized Bessel polynomials with degree-dependent parameter.
//!
//! - [`cxnum`]: branch-tracked square roots, Gauss–Legendre path quadrature, adaptive stepping.
//! - [`quaddiff`]: the differential, trajectory tracing, critical graphs, gates, periods, faces.
//! - [`motherbody`]: the algebraic equation z²C² − (pz+q)C + r = 0 and its discriminant.
//! - [`bessel`]: generalized Bessel polynomials, their zeros and Cauchy transforms.
//! - [`render`]: deterministic SVG output.

pub mod cxnum;
pub mod quaddiff;
pub mod motherbody;
pub mod bessel;
pub mod render;
