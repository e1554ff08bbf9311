//! Metric components and closed-form Christoffel symbols of each family.
//!
//! The metric formulas are written once over [`Field`] so the same code
//! yields plain values and hyperjets.

use num_complex::Complex64;

use super::tensor::{zero_symbols, Symbols};
use super::Family;
use crate::jet::Jet2;
use crate::scalar::{Field, Scalar};

/// 2D metric in chart order (first coordinate, fibre coordinate `q`).
pub fn metric2<T: Field>(family: Family, h: T, q: T) -> [[T; 2]; 2] {
    let zero = T::constant(0.0);
    let q2 = q * q;
    let fibre = T::constant(1.0) / q2;
    let base = match family {
        Family::Hyperbolic | Family::ComplexSphere | Family::KahlerNorden => (h - q2).square() / q2,
        Family::AntiDeSitterPlus | Family::AntiDeSitterMinus => -(h + q2).square() / q2,
    };
    if family == Family::AntiDeSitterMinus {
        [[-base, zero], [zero, -fibre]]
    } else {
        [[base, zero], [zero, fibre]]
    }
}

/// Four-dimensional Kähler-Norden metric in chart order (x, Φ, y, Ψ), written
/// in terms of `Re h`, `Im h`, Φ and Ψ.
pub fn kn_metric<T: Field>(hr: T, hi: T, phi: T, psi: T) -> [[T; 4]; 4] {
    let zero = T::constant(0.0);
    let two = T::constant(2.0);
    let four = T::constant(4.0);
    let dp = phi * phi + psi * psi;
    let dm = phi * phi - psi * psi;
    let dp2 = dp * dp;
    let a = (dm * (dp2 + hr * hr - hi * hi) + four * phi * psi * hr * hi - two * dp2 * hr) / dp2;
    let b = -four * (phi * hi - psi * (dp + hr)) * (psi * hi - phi * (dp - hr)) / dp2;
    let c = dm / dp2;
    let d = two * phi * psi / dp2;
    let xy = b / two;
    [
        [a, zero, xy, zero],
        [zero, c, zero, d],
        [xy, zero, -a, zero],
        [zero, d, zero, -c],
    ]
}

/// Real 4×4 metric obtained as the real part of the holomorphic metric,
/// `ĝ_kl dX^k dX^l = Re[G_ab dZ^a dZ^b]` with `dZ = dRe + i dIm`.
pub fn kn_metric_from_complex(g: &[[Complex64; 2]; 2]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for a in 0..2 {
        for b in 0..2 {
            let v = g[a][b];
            let (ra, ia) = (a, a + 2);
            let (rb, ib) = (b, b + 2);
            out[ra][rb] += v.re;
            out[ia][ib] -= v.re;
            out[ra][ib] -= v.im;
            out[ia][rb] -= v.im;
        }
    }
    out
}

/// Closed-form symbols of the hyperbolic and complex-sphere metrics; both
/// share the same formulas over their respective scalars.
pub fn closed_hyperbolic<S: Scalar>(h: Jet2<S>, q: S) -> Symbols<S, 2> {
    let mut g = zero_symbols::<S, 2>();
    let q2 = q * q;
    let (hv, hp) = (h.value, h.d1);
    g[0][0][0] = hp / (hv - q2);
    let mixed = (q2 + hv) / (q * (q2 - hv));
    g[0][0][1] = mixed;
    g[0][1][0] = mixed;
    g[1][0][0] = (hv * hv - q2 * q2) / q;
    g[1][1][1] = -S::one() / q;
    g
}

/// Closed-form symbols shared by both (anti-)de Sitter signs.
pub fn closed_ads<S: Scalar>(h: Jet2<S>, q: S) -> Symbols<S, 2> {
    let mut g = zero_symbols::<S, 2>();
    let q2 = q * q;
    let (hv, hp) = (h.value, h.d1);
    g[0][0][0] = hp / (hv + q2);
    let mixed = (q2 - hv) / (q * (q2 + hv));
    g[0][0][1] = mixed;
    g[0][1][0] = mixed;
    g[1][0][0] = (q2 * q2 - hv * hv) / q;
    g[1][1][1] = -S::one() / q;
    g
}

/// Real 4D symbols assembled from the holomorphic symbols `Υ`.
///
/// With `Z^a = X^a + i Y^a`, a holomorphic connection gives
/// `Γ̂^{X^a}_{B C} + i Γ̂^{Y^a}_{B C} = i^(p+q) Υ^a_bc` where `p`, `q` count
/// how many of the lower real indices are imaginary directions.
pub fn kn_from_upsilon(u: &Symbols<Complex64, 2>) -> Symbols<f64, 4> {
    let mut out = zero_symbols::<f64, 4>();
    let ipow = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
    ];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        let w = u[a][b][c] * ipow[p + q];
                        let j = b + 2 * p;
                        let k = c + 2 * q;
                        out[a][j][k] = w.re;
                        out[a + 2][j][k] = w.im;
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_values() {
        let g = metric2(Family::Hyperbolic, 0.0, 1.0);
        assert_eq!(g, [[1.0, 0.0], [0.0, 1.0]]);
        let g = metric2(Family::AntiDeSitterPlus, 0.0, 1.0);
        assert_eq!(g, [[-1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn explicit_kn_matches_real_part_construction() {
        let (x, y, phi, psi) = (0.3, -0.4, 1.1, 0.6);
        let z = Complex64::new(x, y);
        let h = z * z + 1.0;
        let big_x = Complex64::new(phi, psi);
        let g = metric2(Family::ComplexSphere, h, big_x);
        let lhs = kn_metric(h.re, h.im, phi, psi);
        let rhs = kn_metric_from_complex(&g);
        for i in 0..4 {
            for j in 0..4 {
                assert!((lhs[i][j] - rhs[i][j]).abs() < 1e-12, "{i}{j}");
            }
        }
    }
}
