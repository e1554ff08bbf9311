//! Dimension-generic tensor algebra over [`Scalar`]s: matrix inversion,
//! Levi-Civita symbols from metric hyperjets, and the Riemann tensor.

use crate::jet::HyperJet;
use crate::scalar::Scalar;

pub type Matrix<S, const N: usize> = [[S; N]; N];
/// `Γ^i_jk` stored as `[i][j][k]`.
pub type Symbols<S, const N: usize> = [[[S; N]; N]; N];
/// `∂_m Γ^i_jk` stored as `[m][i][j][k]`.
pub type SymbolDerivatives<S, const N: usize> = [Symbols<S, N>; N];
/// `R^i_jkl` stored as `[i][j][k][l]`.
pub type Riemann<S, const N: usize> = [[[[S; N]; N]; N]; N];

pub fn zeros<S: Scalar, const N: usize>() -> Matrix<S, N> {
    [[S::zero(); N]; N]
}

pub fn zero_symbols<S: Scalar, const N: usize>() -> Symbols<S, N> {
    [[[S::zero(); N]; N]; N]
}

/// Gauss-Jordan inversion with partial pivoting. Returns `None` when a pivot
/// is negligible relative to the largest entry.
pub fn invert<S: Scalar, const N: usize>(m: &Matrix<S, N>) -> Option<Matrix<S, N>> {
    let scale = m.iter().flatten().map(|v| v.modulus()).fold(0.0f64, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let mut a = *m;
    let mut inv = zeros::<S, N>();
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = S::one();
    }
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&r, &s| a[r][col].modulus().total_cmp(&a[s][col].modulus()))
            .unwrap_or(col);
        if a[pivot][col].modulus() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = S::one() / a[col][col];
        for k in 0..N {
            a[col][k] *= p;
            inv[col][k] *= p;
        }
        for r in 0..N {
            if r != col {
                let f = a[r][col];
                if f != S::zero() {
                    for k in 0..N {
                        let (ack, ick) = (a[col][k], inv[col][k]);
                        a[r][k] -= f * ack;
                        inv[r][k] -= f * ick;
                    }
                }
            }
        }
    }
    Some(inv)
}

pub fn values<S: Scalar, const N: usize>(g: &Matrix<HyperJet<S, N>, N>) -> Matrix<S, N> {
    let mut out = zeros::<S, N>();
    for i in 0..N {
        for j in 0..N {
            out[i][j] = g[i][j].value;
        }
    }
    out
}

/// Levi-Civita symbols and their first derivatives from a metric whose
/// components carry exact first and second partial derivatives.
pub fn levi_civita<S: Scalar, const N: usize>(
    g: &Matrix<HyperJet<S, N>, N>,
) -> Option<(Symbols<S, N>, SymbolDerivatives<S, N>)> {
    let gv = values(g);
    let ginv = invert(&gv)?;
    let half = S::constant(0.5);

    // c[l][j][k] = ∂_k g_lj + ∂_j g_lk - ∂_l g_jk
    let mut c = zero_symbols::<S, N>();
    // dc[m][l][j][k] = ∂_m c[l][j][k]
    let mut dc = [zero_symbols::<S, N>(); N];
    for l in 0..N {
        for j in 0..N {
            for k in 0..N {
                c[l][j][k] = g[l][j].grad[k] + g[l][k].grad[j] - g[j][k].grad[l];
                for (m, dcm) in dc.iter_mut().enumerate() {
                    dcm[l][j][k] = g[l][j].hess[k][m] + g[l][k].hess[j][m] - g[j][k].hess[l][m];
                }
            }
        }
    }

    // ∂_m g^{-1} = -g^{-1} (∂_m g) g^{-1}
    let mut dginv = [zeros::<S, N>(); N];
    for (m, dgm) in dginv.iter_mut().enumerate() {
        let mut tmp = zeros::<S, N>();
        for a in 0..N {
            for b in 0..N {
                let mut acc = S::zero();
                for k in 0..N {
                    acc += g[a][k].grad[m] * ginv[k][b];
                }
                tmp[a][b] = acc;
            }
        }
        for a in 0..N {
            for b in 0..N {
                let mut acc = S::zero();
                for k in 0..N {
                    acc += ginv[a][k] * tmp[k][b];
                }
                dgm[a][b] = -acc;
            }
        }
    }

    let mut gamma = zero_symbols::<S, N>();
    let mut dgamma = [zero_symbols::<S, N>(); N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                let mut acc = S::zero();
                for l in 0..N {
                    acc += ginv[i][l] * c[l][j][k];
                }
                gamma[i][j][k] = half * acc;
                for m in 0..N {
                    let mut d = S::zero();
                    for l in 0..N {
                        d += dginv[m][i][l] * c[l][j][k] + ginv[i][l] * dc[m][l][j][k];
                    }
                    dgamma[m][i][j][k] = half * d;
                }
            }
        }
    }
    Some((gamma, dgamma))
}

/// `R^i_jkl = ∂_k Γ^i_jl - ∂_l Γ^i_jk + Γ^i_mk Γ^m_jl - Γ^i_ml Γ^m_jk`.
pub fn riemann<S: Scalar, const N: usize>(gamma: &Symbols<S, N>, dgamma: &SymbolDerivatives<S, N>) -> Riemann<S, N> {
    let mut r = [[[[S::zero(); N]; N]; N]; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    let mut acc = dgamma[k][i][j][l] - dgamma[l][i][j][k];
                    for m in 0..N {
                        acc += gamma[i][m][k] * gamma[m][j][l] - gamma[i][m][l] * gamma[m][j][k];
                    }
                    r[i][j][k][l] = acc;
                }
            }
        }
    }
    r
}

/// `R_ijkl = g_im R^m_jkl`.
pub fn lower<S: Scalar, const N: usize>(g: &Matrix<S, N>, r: &Riemann<S, N>) -> Riemann<S, N> {
    let mut out = [[[[S::zero(); N]; N]; N]; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    let mut acc = S::zero();
                    for m in 0..N {
                        acc += g[i][m] * r[m][j][k][l];
                    }
                    out[i][j][k][l] = acc;
                }
            }
        }
    }
    out
}

/// `R_jl = R^k_jkl`.
pub fn ricci<S: Scalar, const N: usize>(r: &Riemann<S, N>) -> Matrix<S, N> {
    let mut out = zeros::<S, N>();
    for j in 0..N {
        for l in 0..N {
            let mut acc = S::zero();
            for k in 0..N {
                acc += r[k][j][k][l];
            }
            out[j][l] = acc;
        }
    }
    out
}

pub fn trace_with<S: Scalar, const N: usize>(ginv: &Matrix<S, N>, m: &Matrix<S, N>) -> S {
    let mut acc = S::zero();
    for a in 0..N {
        for b in 0..N {
            acc += ginv[a][b] * m[a][b];
        }
    }
    acc
}

/// Sectional curvature of the plane spanned by `u` and `v`.
pub fn sectional<S: Scalar, const N: usize>(g: &Matrix<S, N>, r_lower: &Riemann<S, N>, u: &[S; N], v: &[S; N]) -> S {
    let mut num = S::zero();
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    num += r_lower[i][j][k][l] * u[i] * v[j] * u[k] * v[l];
                }
            }
        }
    }
    let gp = |a: &[S; N], b: &[S; N]| {
        let mut acc = S::zero();
        for i in 0..N {
            for j in 0..N {
                acc += g[i][j] * a[i] * b[j];
            }
        }
        acc
    };
    num / (gp(u, u) * gp(v, v) - gp(u, v) * gp(u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn inverse_of_complex_matrix() {
        let m = [
            [Complex64::new(1.0, 2.0), Complex64::new(0.5, 0.0)],
            [Complex64::new(0.5, 0.0), Complex64::new(-1.0, 1.0)],
        ];
        let inv = invert(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    acc += m[i][k] * inv[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((acc - expect).norm() < 1e-14);
            }
        }
        assert!(invert(&[[1.0, 2.0], [2.0, 4.0]]).is_none());
    }

    #[test]
    fn round_sphere_has_unit_curvature() {
        // g = dθ² + sin²θ dφ² at θ = 0.7.
        let th = HyperJet::<f64, 2>::seed(0.7, 0);
        let s = th.compose(0.7f64.sin(), 0.7f64.cos(), -0.7f64.sin());
        let one = HyperJet::<f64, 2>::constant(1.0);
        let zero = HyperJet::<f64, 2>::constant(0.0);
        let g = [[one, zero], [zero, s * s]];
        let (gamma, dgamma) = levi_civita(&g).unwrap();
        let r = riemann(&gamma, &dgamma);
        let gv = values(&g);
        let rl = lower(&gv, &r);
        let k = sectional(&gv, &rl, &[1.0, 0.0], &[0.0, 1.0]);
        assert!((k - 1.0).abs() < 1e-13, "K = {k}");
        // Γ^θ_φφ = -sinθ cosθ
        assert!((gamma[0][1][1] + 0.7f64.sin() * 0.7f64.cos()).abs() < 1e-15);
    }
}
