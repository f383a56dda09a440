use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One interval `[t0, t1)` of a coefficient schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece<C> {
    pub t0: f64,
    pub t1: f64,
    pub coeff: C,
}

/// Piecewise-constant-in-time coefficient schedule.
///
/// Pieces are contiguous and ordered, so together they cover the window
/// `[start, end]`. Lookup is right-continuous; the closing instant `end`
/// belongs to the last piece.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeProfile<C> {
    pieces: Vec<Piece<C>>,
}

impl<C> TimeProfile<C> {
    pub fn new(pieces: Vec<Piece<C>>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::invalid("time profile has no pieces"));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.t0.is_finite() && p.t1.is_finite()) || p.t0 >= p.t1 {
                return Err(Error::invalid(format!(
                    "piece {i} has an empty or non-finite interval [{}, {})",
                    p.t0, p.t1
                )));
            }
        }
        for (i, w) in pieces.windows(2).enumerate() {
            if w[0].t1 != w[1].t0 {
                return Err(Error::invalid(format!(
                    "pieces {i} and {} are not contiguous ({} vs {})",
                    i + 1,
                    w[0].t1,
                    w[1].t0
                )));
            }
        }
        Ok(TimeProfile { pieces })
    }

    pub fn constant(t0: f64, t1: f64, coeff: C) -> Result<Self> {
        Self::new(vec![Piece { t0, t1, coeff }])
    }

    pub fn pieces(&self) -> &[Piece<C>] {
        &self.pieces
    }

    pub fn start(&self) -> f64 {
        self.pieces[0].t0
    }

    pub fn end(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].t1
    }

    /// All piece boundaries including both window ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.pieces.iter().map(|p| p.t0).collect();
        b.push(self.end());
        b
    }

    pub fn index_at(&self, t: f64) -> Result<usize> {
        let (start, end) = (self.start(), self.end());
        if !(t >= start && t <= end) {
            return Err(Error::OutOfWindow { t, start, end });
        }
        // first piece whose right end is beyond t
        let i = self.pieces.partition_point(|p| p.t1 <= t);
        Ok(i.min(self.pieces.len() - 1))
    }

    pub fn at(&self, t: f64) -> Result<&C> {
        Ok(&self.pieces[self.index_at(t)?].coeff)
    }

    pub fn map<D>(&self, mut f: impl FnMut(&C) -> D) -> TimeProfile<D> {
        TimeProfile { pieces: self.pieces.iter().map(|p| Piece { t0: p.t0, t1: p.t1, coeff: f(&p.coeff) }).collect() }
    }

    /// Same intervals, coefficient sets reassigned: piece `i` receives the
    /// coefficients of piece `order[i]`.
    pub fn reassigned(&self, order: &[usize]) -> TimeProfile<C>
    where
        C: Clone,
    {
        assert_eq!(order.len(), self.pieces.len());
        TimeProfile {
            pieces: self
                .pieces
                .iter()
                .zip(order)
                .map(|(p, &j)| Piece { t0: p.t0, t1: p.t1, coeff: self.pieces[j].coeff.clone() })
                .collect(),
        }
    }
}
