use num_complex::Complex64;

use super::GeodesicError;

/// Polyline `s ∈ [0, 1] ↦ ζ(s)` in the complex plane. Segment `k` of `n`
/// occupies `s ∈ [k/n, (k+1)/n]` and is traversed at constant speed.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPath {
    vertices: Vec<Complex64>,
}

impl ComplexPath {
    pub fn new(vertices: Vec<Complex64>) -> Result<Self, GeodesicError> {
        if vertices.len() < 2 {
            return Err(GeodesicError::InvalidPath("a path needs at least two vertices".into()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeodesicError::InvalidPath("non-finite vertex".into()));
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(GeodesicError::InvalidPath("zero-length segment".into()));
        }
        Ok(Self { vertices })
    }

    pub fn straight(a: Complex64, b: Complex64) -> Result<Self, GeodesicError> {
        Self::new(vec![a, b])
    }

    /// Parse `"re,im;re,im;..."`.
    pub fn parse(text: &str) -> Result<Self, GeodesicError> {
        let bad = |s: &str| GeodesicError::InvalidPath(format!("cannot read vertex `{s}`"));
        let mut vertices = Vec::new();
        for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (re, im) = part.split_once(',').ok_or_else(|| bad(part))?;
            let re: f64 = re.trim().parse().map_err(|_| bad(part))?;
            let im: f64 = im.trim().parse().map_err(|_| bad(part))?;
            vertices.push(Complex64::new(re, im));
        }
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn segments(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn start(&self) -> Complex64 {
        self.vertices[0]
    }

    pub fn end(&self) -> Complex64 {
        self.vertices[self.vertices.len() - 1]
    }

    /// Parameter interval of segment `k`.
    pub fn segment_range(&self, k: usize) -> (f64, f64) {
        let n = self.segments() as f64;
        let hi = if k + 1 == self.segments() {
            1.0
        } else {
            (k + 1) as f64 / n
        };
        (k as f64 / n, hi)
    }

    /// Segment containing `s`; vertices belong to the following segment,
    /// except the final one.
    pub fn segment_of(&self, s: f64) -> usize {
        let n = self.segments();
        ((s * n as f64).floor().max(0.0) as usize).min(n - 1)
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    pub fn point_in(&self, k: usize, s: f64) -> Complex64 {
        let (a, b) = self.segment_range(k);
        let u = (s - a) / (b - a);
        self.vertices[k] + (self.vertices[k + 1] - self.vertices[k]) * u
    }

    pub fn velocity_in(&self, k: usize) -> Complex64 {
        (self.vertices[k + 1] - self.vertices[k]) * self.segments() as f64
    }

    pub fn point(&self, s: f64) -> Complex64 {
        self.point_in(self.segment_of(s), s)
    }

    pub fn velocity(&self, s: f64) -> Complex64 {
        self.velocity_in(self.segment_of(s))
    }

    /// Winding number of the closed loop `self` followed by `other`
    /// reversed, around `w`. Both paths must share end points.
    pub fn winding_with(&self, other: &ComplexPath, w: Complex64) -> f64 {
        let mut loop_pts: Vec<Complex64> = self.vertices.clone();
        loop_pts.extend(other.vertices.iter().rev().skip(1));
        let mut total = 0.0;
        for pair in loop_pts.windows(2) {
            let a = pair[0] - w;
            let b = pair[1] - w;
            total += (b / a).arg();
        }
        total / std::f64::consts::TAU
    }

    /// Smallest distance from `w` to the polyline.
    pub fn distance_to(&self, w: Complex64) -> f64 {
        self.vertices
            .windows(2)
            .map(|seg| {
                let d = seg[1] - seg[0];
                let t = (((w - seg[0]) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                (seg[0] + d * t - w).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn polyline_parametrisation() {
        let p = ComplexPath::parse("0,0; 1,0; 1,1").unwrap();
        assert_eq!(p.point(0.5), c(1.0, 0.0));
        assert_eq!(p.point(0.75), c(1.0, 0.5));
        assert_eq!(p.velocity(0.25), c(2.0, 0.0));
        assert_eq!(p.velocity(1.0), c(0.0, 2.0));
        assert!((p.length() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn winding_number_of_a_square() {
        let a = ComplexPath::parse("0,0;1,0;1,1").unwrap();
        let b = ComplexPath::parse("0,0;0,1;1,1").unwrap();
        assert!((a.winding_with(&b, c(0.5, 0.5)) - 1.0).abs() < 1e-12);
        assert!(a.winding_with(&b, c(2.0, 0.5)).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(ComplexPath::parse("0,0").is_err());
        assert!(ComplexPath::parse("0,0;0,0").is_err());
        assert!(ComplexPath::parse("0;1,1").is_err());
    }
}
