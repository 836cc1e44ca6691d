//! Node samplers used by the sampling-based certifiers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::geometry::{BoxDomain, Interval, MultiIndex, PointSystem};

/// How candidate point systems are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// Uniform nodes from a ChaCha stream with the given seed.
    Random { seed: u64 },
    /// Equally spaced windows of a fixed lattice on each axis.
    Grid,
}

impl Sampler {
    pub fn name(&self) -> &'static str {
        match self {
            Sampler::Random { .. } => "random",
            Sampler::Grid => "grid",
        }
    }
}

/// Minimum pairwise node distance, as a fraction of the axis width.
pub const DEFAULT_SEPARATION: f64 = 1e-3;

const MAX_REJECTIONS: usize = 10_000;

fn check_axis(axis: usize, iv: Interval, count: usize, sep: f64) -> Result<()> {
    if !iv.is_finite() {
        return Err(invalid(format!("axis {}: sampler needs a bounded interval", axis + 1)));
    }
    if (count as f64) * sep >= 1.0 {
        return Err(invalid(format!(
            "axis {}: cannot place {count} nodes with separation {sep} of the width",
            axis + 1
        )));
    }
    Ok(())
}

/// `count` distinct nodes uniformly inside `iv`, pairwise at least
/// `sep * width` apart.
pub fn random_tuple(rng: &mut ChaCha8Rng, iv: Interval, count: usize, sep: f64) -> Option<Vec<f64>> {
    let gap = sep * iv.width();
    let (lo, hi) = (iv.lo + 0.5 * gap, iv.hi - 0.5 * gap);
    for _ in 0..MAX_REJECTIONS {
        let mut t: Vec<f64> = (0..count).map(|_| rng.gen_range(lo..hi)).collect();
        t.sort_by(f64::total_cmp);
        if t.windows(2).all(|w| w[1] - w[0] >= gap) {
            return Some(t);
        }
    }
    None
}

/// Deterministic stream of point systems of order `n` inside `domain`.
pub struct SystemStream {
    sampler: Sampler,
    rng: ChaCha8Rng,
    domain: BoxDomain,
    n: MultiIndex,
    sep: f64,
    windows: Vec<Vec<(usize, usize)>>,
    lattice: Vec<usize>,
    counter: usize,
}

impl SystemStream {
    pub fn new(sampler: Sampler, domain: &BoxDomain, n: &MultiIndex, sep: f64) -> Result<Self> {
        if domain.dim() != n.dim() {
            return Err(crate::error::Error::Dimension { expected: n.dim(), got: domain.dim() });
        }
        if !(sep > 0.0) {
            return Err(invalid("separation must be positive"));
        }
        for (axis, iv) in domain.axes().iter().enumerate() {
            check_axis(axis, *iv, n.get(axis) + 1, sep)?;
        }
        let seed = match sampler {
            Sampler::Random { seed } => seed,
            Sampler::Grid => 0,
        };
        // Lattice windows: (start, stride) with start + n_i * stride < L.
        let lattice: Vec<usize> = n
            .entries()
            .iter()
            .map(|&ni| ((4 * (ni + 1)).max(16)).min(((1.0 / sep) as usize).max(ni + 1)))
            .collect();
        let windows = n
            .entries()
            .iter()
            .zip(&lattice)
            .map(|(&ni, &len)| {
                let mut w = Vec::new();
                for stride in 1..len {
                    if ni * stride >= len {
                        break;
                    }
                    for start in 0..len - ni * stride {
                        w.push((start, stride));
                    }
                }
                if w.is_empty() {
                    w.push((0, 1));
                }
                w
            })
            .collect();
        Ok(Self {
            sampler,
            rng: ChaCha8Rng::seed_from_u64(seed),
            domain: domain.clone(),
            n: n.clone(),
            sep,
            windows,
            lattice,
            counter: 0,
        })
    }

    pub fn next_system(&mut self) -> Result<PointSystem> {
        let t = self.counter;
        self.counter += 1;
        let mut axes = Vec::with_capacity(self.n.dim());
        match self.sampler {
            Sampler::Random { .. } => {
                for (axis, iv) in self.domain.axes().iter().enumerate() {
                    let count = self.n.get(axis) + 1;
                    let tuple = random_tuple(&mut self.rng, *iv, count, self.sep).ok_or_else(|| {
                        invalid(format!("axis {}: could not sample distinct nodes", axis + 1))
                    })?;
                    axes.push(tuple);
                }
            }
            Sampler::Grid => {
                let mut rest = t;
                for (axis, iv) in self.domain.axes().iter().enumerate() {
                    let w = &self.windows[axis];
                    let (start, stride) = w[rest % w.len()];
                    rest /= w.len();
                    let len = self.lattice[axis] as f64;
                    let tuple = (0..=self.n.get(axis))
                        .map(|j| iv.lo + iv.width() * ((start + j * stride) as f64 + 0.5) / len)
                        .collect();
                    axes.push(tuple);
                }
            }
        }
        PointSystem::new(axes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_systems_respect_separation_and_bounds() {
        let dom = BoxDomain::cube(2, 0.0, 3.0).unwrap();
        let n = MultiIndex::new(vec![4, 2]).unwrap();
        let mut s = SystemStream::new(Sampler::Random { seed: 7 }, &dom, &n, 1e-3).unwrap();
        for _ in 0..200 {
            let sys = s.next_system().unwrap();
            crate::geometry::validate_point_system(sys.axes(), &dom, &n).unwrap();
            for t in sys.axes() {
                for w in t.windows(2) {
                    assert!(w[1] - w[0] >= 3e-3 - 1e-15);
                }
            }
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let dom = BoxDomain::cube(1, -1.0, 1.0).unwrap();
        let n = MultiIndex::new(vec![3]).unwrap();
        let mut a = SystemStream::new(Sampler::Random { seed: 42 }, &dom, &n, 1e-3).unwrap();
        let mut b = SystemStream::new(Sampler::Random { seed: 42 }, &dom, &n, 1e-3).unwrap();
        for _ in 0..10 {
            assert_eq!(a.next_system().unwrap(), b.next_system().unwrap());
        }
    }

    #[test]
    fn grid_systems_are_valid() {
        let dom = BoxDomain::cube(2, 0.0, 1.0).unwrap();
        let n = MultiIndex::new(vec![2, 1]).unwrap();
        let mut s = SystemStream::new(Sampler::Grid, &dom, &n, 1e-3).unwrap();
        for _ in 0..500 {
            let sys = s.next_system().unwrap();
            crate::geometry::validate_point_system(sys.axes(), &dom, &n).unwrap();
        }
    }

    #[test]
    fn unbounded_axis_is_rejected() {
        let dom = BoxDomain::unbounded(1);
        let n = MultiIndex::new(vec![1]).unwrap();
        assert!(SystemStream::new(Sampler::Grid, &dom, &n, 1e-3).is_err());
    }
}
