use std::fmt;

/// Multi-index `α = (α_1, …, α_d)` for derivatives `D^α` and monomials `ξ^α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// All multi-indices of exactly the given order, in lexicographic order
    /// (largest first component first).
    pub fn of_order(dim: usize, order: u32) -> Vec<MultiIndex> {
        fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == dim {
                prefix.push(left);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for a in (0..=left).rev() {
                prefix.push(a);
                rec(dim, left - a, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if dim > 0 {
            rec(dim, order, &mut Vec::with_capacity(dim), &mut out);
        }
        out
    }

    /// All nonzero multi-indices with `1 ≤ |α| ≤ max_order`.
    pub fn up_to(dim: usize, max_order: u32) -> Vec<MultiIndex> {
        (1..=max_order).flat_map(|k| Self::of_order(dim, k)).collect()
    }

    /// `⌊d/2⌋ + 1`, the highest derivative order the symbol conditions use.
    pub fn condition_order(dim: usize) -> u32 {
        (dim / 2) as u32 + 1
    }

    pub fn monomial(&self, xi: &[f64]) -> f64 {
        self.0.iter().zip(xi).map(|(&a, &x)| x.powi(a as i32)).product()
    }

    /// `D^γ ξ^self` as `(coefficient, exponent)`, `None` when it vanishes.
    pub fn differentiate(&self, by: &MultiIndex) -> Option<(f64, MultiIndex)> {
        let mut coeff = 1.0;
        let mut exps = Vec::with_capacity(self.0.len());
        for (&a, &g) in self.0.iter().zip(&by.0) {
            if g > a {
                return None;
            }
            for k in 0..g {
                coeff *= (a - k) as f64;
            }
            exps.push(a - g);
        }
        Some((coeff, MultiIndex(exps)))
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for MultiIndex {
    /// Components joined by `_`, e.g. `1_0`, safe inside CSV cells.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("_")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}
