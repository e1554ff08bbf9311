//! Square roots continued along a real parameter.

use num_complex::Complex64;

use super::ReconstructError;

const MAX_REFINE: usize = 40;
const MAX_TURN: f64 = std::f64::consts::PI / 8.0;

/// Below this modulus a radicand counts as zero.
pub const ZERO_RADICAND: f64 = 1e-10;

/// Roots of a radicand tracked on a grid, continued from the base point.
#[derive(Clone, Debug)]
pub struct RootTrack {
    ts: Vec<f64>,
    roots: Vec<Complex64>,
    /// Grid points where the radicand came within [`ZERO_RADICAND`] of zero.
    pub flagged: Vec<f64>,
    /// Largest modulus of the radicand over the grid.
    pub sup_radicand: f64,
    pub base_root: Complex64,
}

/// Principal root, which has positive real part, or positive imaginary part
/// on the negative real axis.
fn base_choice(rho: Complex64) -> Complex64 {
    rho.sqrt()
}

fn closer(s: Complex64, prev: Complex64) -> Complex64 {
    if (s - prev).norm() <= (s + prev).norm() {
        s
    } else {
        -s
    }
}

fn turn(a: Complex64, b: Complex64) -> f64 {
    if a.norm() == 0.0 || b.norm() == 0.0 {
        0.0
    } else {
        (b / a).arg().abs()
    }
}

impl RootTrack {
    /// Track `sqrt(radicand(t))` over the sorted `grid`, starting at `base`
    /// and refining wherever the root turns by more than π/8 between
    /// neighbours.
    pub fn build(
        grid: &[f64],
        base: f64,
        radicand: impl Fn(f64) -> Result<Complex64, ReconstructError>,
    ) -> Result<Self, ReconstructError> {
        let mut grid: Vec<f64> = grid.to_vec();
        grid.push(base);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let ib = grid.iter().position(|&t| t == base).unwrap_or(0);
        let rho0 = radicand(base)?;
        let base_root = base_choice(rho0);

        let mut sup = rho0.norm();
        let mut flagged = Vec::new();
        if rho0.norm() < ZERO_RADICAND {
            flagged.push(base);
        }

        let mut walk = |targets: &mut dyn Iterator<Item = f64>| -> Result<Vec<(f64, Complex64)>, ReconstructError> {
            let mut out = Vec::new();
            let (mut t_prev, mut r_prev) = (base, base_root);
            for t in targets {
                // Subdivide toward t until the root turns gently.
                let mut stack = vec![t];
                let mut depth = 0;
                while let Some(&target) = stack.last() {
                    let rho = radicand(target)?;
                    let r = closer(rho.sqrt(), r_prev);
                    if turn(r_prev, r) > MAX_TURN && depth < MAX_REFINE && rho.norm() >= ZERO_RADICAND {
                        stack.push(0.5 * (t_prev + target));
                        depth += 1;
                        continue;
                    }
                    stack.pop();
                    sup = sup.max(rho.norm());
                    if rho.norm() < ZERO_RADICAND {
                        flagged.push(target);
                    }
                    out.push((target, r));
                    t_prev = target;
                    r_prev = r;
                    depth = 0;
                }
            }
            Ok(out)
        };

        let right = walk(&mut grid[ib + 1..].iter().copied())?;
        let left = walk(&mut grid[..ib].iter().rev().copied())?;

        let mut pairs: Vec<(f64, Complex64)> = left.into_iter().rev().collect();
        pairs.push((base, base_root));
        pairs.extend(right);
        flagged.sort_by(f64::total_cmp);
        flagged.dedup();
        Ok(Self {
            ts: pairs.iter().map(|p| p.0).collect(),
            roots: pairs.iter().map(|p| p.1).collect(),
            flagged,
            sup_radicand: sup,
            base_root,
        })
    }

    /// Continued root of `rho` at `t`: the sign of the principal root that
    /// is closer to the tracked root at the nearest grid point.
    pub fn root(&self, t: f64, rho: Complex64) -> Complex64 {
        let i = self.ts.partition_point(|&s| s < t);
        let near = if i == 0 {
            0
        } else if i >= self.ts.len() {
            self.ts.len() - 1
        } else if (t - self.ts[i - 1]).abs() <= (self.ts[i] - t).abs() {
            i - 1
        } else {
            i
        };
        closer(rho.sqrt(), self.roots[near])
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.ts.iter().copied().zip(self.roots.iter().copied())
    }

    pub fn is_degenerate(&self) -> bool {
        self.sup_radicand < ZERO_RADICAND
    }
}
