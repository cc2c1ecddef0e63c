use std::fmt;

use rand::seq::index;
use rand::Rng;

/// Search-space representation used by the colony.
///
/// `neighbor` realizes the food-source perturbation
/// `v_j = x_j + phi * (x_j - x'_j)` on one uniformly chosen dimension `j`,
/// with `phi` uniform in `[-1, 1]`, followed by a repair onto the
/// encoding's domain.
pub trait Encoding {
    type Solution: Clone + PartialEq + fmt::Debug;

    fn dimension(&self) -> usize;

    fn random_solution<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Solution;

    fn neighbor<R: Rng + ?Sized>(
        &self,
        current: &Self::Solution,
        partner: &Self::Solution,
        rng: &mut R,
    ) -> Self::Solution;

    fn is_feasible(&self, solution: &Self::Solution) -> bool;
}

/// One perturbed binary coordinate: round, then clamp to `{0, 1}`.
pub fn binary_step(x: bool, partner: bool, phi: f64) -> bool {
    let xv = x as u8 as f64;
    let pv = partner as u8 as f64;
    let v = (xv + phi * (xv - pv)).round().clamp(0.0, 1.0);
    v >= 1.0
}

/// One perturbed index coordinate: round, then clamp to `[0, universe - 1]`.
pub fn index_step(x: usize, partner: usize, phi: f64, universe: usize) -> usize {
    let xv = x as f64;
    let v = (xv + phi * (xv - partner as f64)).round();
    v.clamp(0.0, universe.saturating_sub(1) as f64) as usize
}

/// Fixed-length 0/1 vector; bit `i` set means item `i` is selected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryEncoding {
    pub dim: usize,
    /// Probability that a bit is set in a freshly drawn solution.
    pub density: f64,
}

impl BinaryEncoding {
    pub fn new(dim: usize, density: f64) -> Self {
        Self { dim, density }
    }
}

impl Encoding for BinaryEncoding {
    type Solution = Vec<bool>;

    fn dimension(&self) -> usize {
        self.dim
    }

    fn random_solution<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        let p = self.density.clamp(0.0, 1.0);
        (0..self.dim).map(|_| rng.gen_bool(p)).collect()
    }

    fn neighbor<R: Rng + ?Sized>(&self, current: &Vec<bool>, partner: &Vec<bool>, rng: &mut R) -> Vec<bool> {
        let mut v = current.clone();
        if self.dim == 0 {
            return v;
        }
        let j = rng.gen_range(0..self.dim);
        let phi = rng.gen_range(-1.0..=1.0);
        v[j] = binary_step(current[j], partner[j], phi);
        v
    }

    fn is_feasible(&self, solution: &Vec<bool>) -> bool {
        solution.len() == self.dim
    }
}

/// `k` distinct positions drawn from `0..universe`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexEncoding {
    pub k: usize,
    pub universe: usize,
}

impl IndexEncoding {
    pub fn new(k: usize, universe: usize) -> Self {
        Self { k, universe }
    }

    /// Replaces coordinate `j` of `current` with `value`, resampling uniformly
    /// among unused positions when `value` already appears elsewhere.
    pub fn place<R: Rng + ?Sized>(&self, current: &[usize], j: usize, value: usize, rng: &mut R) -> Vec<usize> {
        let mut v = current.to_vec();
        let duplicate = current.iter().enumerate().any(|(i, &x)| i != j && x == value);
        if !duplicate {
            v[j] = value;
            return v;
        }
        let mut used = vec![false; self.universe];
        for &x in current {
            used[x] = true;
        }
        let free: Vec<usize> = (0..self.universe).filter(|&p| !used[p]).collect();
        if !free.is_empty() {
            v[j] = free[rng.gen_range(0..free.len())];
        }
        v
    }
}

impl Encoding for IndexEncoding {
    type Solution = Vec<usize>;

    fn dimension(&self) -> usize {
        self.k
    }

    fn random_solution<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        index::sample(rng, self.universe, self.k.min(self.universe)).into_vec()
    }

    fn neighbor<R: Rng + ?Sized>(&self, current: &Vec<usize>, partner: &Vec<usize>, rng: &mut R) -> Vec<usize> {
        if self.k == 0 {
            return current.clone();
        }
        let j = rng.gen_range(0..self.k);
        let phi = rng.gen_range(-1.0..=1.0);
        let value = index_step(current[j], partner[j], phi, self.universe);
        if value == current[j] {
            return current.clone();
        }
        self.place(current, j, value, rng)
    }

    fn is_feasible(&self, solution: &Vec<usize>) -> bool {
        if solution.len() != self.k || solution.iter().any(|&x| x >= self.universe) {
            return false;
        }
        let mut seen = vec![false; self.universe];
        solution.iter().all(|&x| !std::mem::replace(&mut seen[x], true))
    }
}
