//! Exact extremes of truncated-power profiles
//! `t -> sum_j w_j (x_j - t)_{+/-}^q` of a discrete signed measure.
//!
//! Between consecutive atoms the profile is a genuine polynomial of degree
//! `q`; its extremes on a piece lie at the ends or at roots of its
//! derivative, which is itself a profile of degree `q - 1`. Roots are
//! isolated recursively (the roots of the derivative bracket the roots of
//! the polynomial) and refined by bisection.

use crate::exprfn::{tpow_minus, tpow_plus};
use crate::measures::Tail;

const BISECTION_TOL: f64 = 1e-12;

/// `sum_j w_j (s (x_j - t))^m` over the atoms active on one piece.
struct PiecePoly<'a> {
    atoms: &'a [(f64, f64)],
    orient: f64,
}

impl PiecePoly<'_> {
    fn eval(&self, m: u32, t: f64) -> f64 {
        self.atoms.iter().map(|&(x, w)| w * (self.orient * (x - t)).powi(m as i32)).sum()
    }

    /// Roots of the degree-`m` member inside `(a, b)`, ascending.
    fn roots(&self, m: u32, a: f64, b: f64) -> Vec<f64> {
        if m == 0 {
            return Vec::new();
        }
        let mut marks = vec![a];
        marks.extend(self.roots(m - 1, a, b));
        marks.push(b);
        let mut out = Vec::new();
        for w in marks.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let (flo, fhi) = (self.eval(m, lo), self.eval(m, hi));
            if flo == 0.0 && lo > a {
                out.push(lo);
                continue;
            }
            if flo * fhi >= 0.0 {
                continue;
            }
            let lo_negative = flo < 0.0;
            while hi - lo > BISECTION_TOL * (1.0 + lo.abs().max(hi.abs())) {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (self.eval(m, mid) < 0.0) == lo_negative {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        out
    }
}

/// Smallest and largest value with their locations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremes {
    pub min: f64,
    pub argmin: f64,
    pub max: f64,
    pub argmax: f64,
}

/// `t -> c * sum_j w_j (x_j - t)_{tail}^q` for a one-dimensional measure.
#[derive(Debug, Clone)]
pub struct SplineProfile {
    atoms: Vec<(f64, f64)>,
    q: u32,
    tail: Tail,
    factor: f64,
}

impl SplineProfile {
    /// `atoms` must be sorted by location with distinct locations.
    pub fn new(atoms: Vec<(f64, f64)>, q: u32, tail: Tail, factor: f64) -> Self {
        debug_assert!(atoms.windows(2).all(|w| w[0].0 < w[1].0));
        Self { atoms, q, tail, factor }
    }

    pub fn value(&self, t: f64) -> f64 {
        let s: f64 = self
            .atoms
            .iter()
            .map(|&(x, w)| {
                w * match self.tail {
                    Tail::Plus => tpow_plus(x - t, self.q),
                    Tail::Minus => tpow_minus(x - t, self.q),
                }
            })
            .sum();
        self.factor * s
    }

    /// Magnitude against which values are compared with zero:
    /// `|c| sum_j |w_j| max(width, 1)^q`.
    pub fn scale(&self) -> f64 {
        let width = match (self.atoms.first(), self.atoms.last()) {
            (Some(a), Some(b)) => (b.0 - a.0).max(1.0),
            _ => 1.0,
        };
        self.factor.abs() * self.atoms.iter().map(|a| a.1.abs()).sum::<f64>() * width.powi(self.q as i32)
    }

    /// Points where the extremes can occur: every atom, the midpoint and the
    /// critical points of every piece, and one probe outside the hull on
    /// each side.
    pub fn candidates(&self) -> Vec<f64> {
        let n = self.atoms.len();
        if n == 0 {
            return vec![0.0];
        }
        let (first, last) = (self.atoms[0].0, self.atoms[n - 1].0);
        let pad = (last - first).max(1.0);
        let mut pts = vec![first - pad];
        for i in 0..n {
            pts.push(self.atoms[i].0);
            if i + 1 < n {
                let (a, b) = (self.atoms[i].0, self.atoms[i + 1].0);
                pts.push(0.5 * (a + b));
                let piece = match self.tail {
                    Tail::Plus => PiecePoly { atoms: &self.atoms[i + 1..], orient: 1.0 },
                    Tail::Minus => PiecePoly { atoms: &self.atoms[..=i], orient: -1.0 },
                };
                if self.q >= 1 {
                    pts.extend(piece.roots(self.q - 1, a, b));
                }
            }
        }
        pts.push(last + pad);
        pts
    }

    pub fn extremes(&self) -> Extremes {
        let mut e = Extremes { min: f64::INFINITY, argmin: 0.0, max: f64::NEG_INFINITY, argmax: 0.0 };
        for t in self.candidates() {
            let v = self.value(t);
            if v < e.min {
                e.min = v;
                e.argmin = t;
            }
            if v > e.max {
                e.max = v;
                e.argmax = t;
            }
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_minimum() {
        // A piecewise cubic with an interior minimum; compare with dense sampling.
        let p = SplineProfile::new(vec![(0.0, 1.0), (1.0, -2.0), (2.0, 1.5)], 3, Tail::Plus, 1.0);
        let e = p.extremes();
        let mut dense_min = f64::INFINITY;
        for i in 0..=40_000 {
            let t = -1.0 + 4.0 * i as f64 / 40_000.0;
            dense_min = dense_min.min(p.value(t));
        }
        assert!(e.min <= dense_min + 1e-12);
        assert!((e.min - dense_min).abs() < 1e-6);
    }

    #[test]
    fn minus_side_mirror() {
        let plus = SplineProfile::new(vec![(0.0, 0.5), (1.0, -1.0), (2.0, 0.5)], 1, Tail::Plus, 1.0);
        let minus = SplineProfile::new(vec![(0.0, 0.5), (1.0, -1.0), (2.0, 0.5)], 1, Tail::Minus, 1.0);
        for t in [-1.0, 0.0, 0.3, 1.0, 1.5, 2.0, 3.0] {
            // Moments 0 and 1 vanish, so the two sides coincide.
            assert!((plus.value(t) - minus.value(t)).abs() < 1e-15);
        }
        assert_eq!(plus.extremes().max, 0.5);
    }

    #[test]
    fn step_profiles() {
        let p = SplineProfile::new(vec![(0.0, 1.0), (1.0, -1.0)], 0, Tail::Plus, 1.0);
        let e = p.extremes();
        // Both atoms count at t = 0; only the negative one on (0, 1].
        assert_eq!(e.min, -1.0);
        assert!(e.argmin > 0.0 && e.argmin <= 1.0);
        assert_eq!(e.max, 0.0);
    }
}
