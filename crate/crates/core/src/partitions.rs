//! γ-adapted filtration of dyadic space-time cubes.
//!
//! Level `m` halves space `m` times and cuts time into intervals of length
//! `2^{−E_m}`, where the integer `E_m` keeps `τ_m = 2^{mγ − E_m}` in `[1, 2)`.
//! Going one level finer the time side is divided `2^{k}` times with
//! `k ∈ {⌊γ⌋, ⌊γ⌋ + 1}`; going coarser, `2^{k}` intervals are merged.
//! All index arithmetic is exact: `γ` is held as a rational.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Digits kept for named irrational orders.
const IRRATIONAL_DIGITS: u32 = 30;

/// An order `γ > 0` as an exact rational `num/den`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gamma {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

impl Gamma {
    pub fn rational(num: i128, den: i128) -> Result<Self> {
        if den <= 0 || num <= 0 {
            return Err(Error::domain(format!("order γ must be a positive rational, got {num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Gamma { num: num / g, den: den / g })
    }

    /// Exact rational of the shortest decimal that round-trips `x`.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::domain(format!("order γ must be positive and finite, got {x}")));
        }
        format!("{x}").parse()
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn denominator(&self) -> i128 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `⌊γ⌋`.
    pub fn floor(&self) -> i64 {
        (self.num / self.den) as i64
    }

    fn times(&self, m: i64) -> i128 {
        (m as i128).checked_mul(self.num).expect("level too large for exact arithmetic")
    }

    /// `⌊mγ⌋`.
    pub fn floor_times(&self, m: i64) -> i64 {
        self.times(m).div_euclid(self.den) as i64
    }

    /// `mγ − e` as a float; exact numerator arithmetic before the division.
    pub fn excess(&self, m: i64, e: i64) -> f64 {
        (self.times(m) - e as i128 * self.den) as f64 / self.den as f64
    }
}

impl FromStr for Gamma {
    type Err = Error;

    /// Accepts decimals (`1.5`, `2`, `3.7e0`), fractions (`3/2`) and the
    /// names `pi`, `e`, `sqrt2`, which are rounded to 30 decimals.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let named = match s.to_ascii_lowercase().as_str() {
            "pi" | "π" => Some("3.141592653589793238462643383279"),
            "e" => Some("2.718281828459045235360287471352"),
            "sqrt2" | "√2" => Some("1.414213562373095048801688724209"),
            _ => None,
        };
        if let Some(digits) = named {
            let scaled: i128 = digits.replace('.', "")[..(IRRATIONAL_DIGITS as usize + 1)].parse().unwrap();
            return Gamma::rational(scaled, 10i128.pow(IRRATIONAL_DIGITS));
        }
        let bad = || Error::domain(format!("cannot read order γ from {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            return Gamma::rational(n, d);
        }
        let (mantissa, exp) = match s.split_once(['e', 'E']) {
            Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
            None => (s, 0),
        };
        let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int.is_empty() && frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let mut num: i128 = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let mut scale = frac.len() as i32 - exp;
        while scale < 0 {
            num = num.checked_mul(10).ok_or_else(bad)?;
            scale += 1;
        }
        if scale > 36 {
            return Err(bad());
        }
        Gamma::rational(num, 10i128.pow(scale as u32))
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Position in the level sequence: `m` and the time exponent `E_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LevelState {
    pub m: i64,
    pub e: i64,
    /// Time subdivision count used by the last step, when one was taken.
    pub k: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Finer,
    Coarser,
}

impl LevelState {
    /// Level 0, `E_0 = 0`.
    pub fn origin() -> Self {
        LevelState { m: 0, e: 0, k: None }
    }

    /// `τ_m = 2^{mγ − E_m}`.
    pub fn tau(&self, gamma: &Gamma) -> f64 {
        gamma.excess(self.m, self.e).exp2()
    }

    /// One step of the division (finer) or merger (coarser) rule.
    ///
    /// With `ρ` the ratio of the unsplit time side to `2^{−mγ}` scale, the
    /// test `ρ ∈ [2^{⌊γ⌋}, 2^{⌊γ⌋+1})` is done on `log2 ρ` in exact rationals.
    pub fn advance(&self, gamma: &Gamma, dir: Direction) -> LevelState {
        let fl = gamma.floor() as i128;
        let den = gamma.den;
        match dir {
            Direction::Finer => {
                let m = self.m + 1;
                // log2 ρ_m = mγ − E_{m−1}
                let log_rho = gamma.times(m) - self.e as i128 * den;
                let k = if log_rho < (fl + 1) * den { fl } else { fl + 1 };
                LevelState { m, e: self.e + k as i64, k: Some(k as i64) }
            }
            Direction::Coarser => {
                let m = self.m - 1;
                // log2 ρ_m = mγ − E_{m+1}
                let log_rho = gamma.times(m) - self.e as i128 * den;
                let k = if log_rho >= -fl * den && log_rho < (1 - fl) * den { fl } else { fl + 1 };
                LevelState { m, e: self.e - k as i64, k: Some(k as i64) }
            }
        }
    }
}

/// Iterates the division/merger rule from level 0 to `m`.
pub fn trace_to(gamma: &Gamma, m: i64) -> Vec<LevelState> {
    let mut s = LevelState::origin();
    let mut out = vec![s];
    let dir = if m >= 0 { Direction::Finer } else { Direction::Coarser };
    while s.m != m {
        s = s.advance(gamma, dir);
        out.push(s);
    }
    out
}

/// A space-time cube `[i0 2^{−E_m}, (i0+1) 2^{−E_m}) × Π [i_j 2^{−m}, (i_j+1) 2^{−m})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cube {
    pub m: i64,
    pub i0: i64,
    pub idx: Vec<i64>,
}

/// Half-open axis-aligned box `[t.0, t.1) × Π [x_j.0, x_j.1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpaceTimeBox {
    pub t: (f64, f64),
    pub x: Vec<(f64, f64)>,
}

impl SpaceTimeBox {
    pub fn contains(&self, t: f64, x: &[f64]) -> bool {
        self.t.0 <= t && t < self.t.1 && self.x.iter().zip(x).all(|(&(a, b), &v)| a <= v && v < b)
    }

    pub fn contains_box(&self, other: &SpaceTimeBox) -> bool {
        self.t.0 <= other.t.0
            && other.t.1 <= self.t.1
            && self.x.iter().zip(&other.x).all(|(a, b)| a.0 <= b.0 && b.1 <= a.1)
    }

    pub fn volume(&self) -> f64 {
        self.x.iter().fold(self.t.1 - self.t.0, |v, (a, b)| v * (b - a))
    }
}

/// The filtration for a given order and spatial dimension.
///
/// `E_m` is evaluated through its closed form `⌊mγ⌋`, which agrees with the
/// iterated division/merger rule (see [`trace_to`] and the tests).
#[derive(Clone, Debug)]
pub struct Filtration {
    gamma: Gamma,
    dim: usize,
}

impl Filtration {
    pub fn new(gamma: Gamma, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("spatial dimension must be at least 1"));
        }
        Ok(Filtration { gamma, dim })
    }

    pub fn gamma(&self) -> &Gamma {
        &self.gamma
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `E_m`: the time side at level `m` is `2^{−E_m}`.
    pub fn e(&self, m: i64) -> i64 {
        self.gamma.floor_times(m)
    }

    pub fn tau(&self, m: i64) -> f64 {
        self.gamma.excess(m, self.e(m)).exp2()
    }

    /// `E_m − E_{m−1}`: time subdivisions from level `m − 1` to level `m`.
    pub fn step(&self, m: i64) -> i64 {
        self.e(m) - self.e(m - 1)
    }

    /// Subdivision count `k_m` attached to level `m`: `E_m − E_{m−1}` for
    /// `m ≥ 0` and `E_{m+1} − E_m` for `m ≤ −1`.
    pub fn k(&self, m: i64) -> i64 {
        if m >= 0 {
            self.step(m)
        } else {
            self.step(m + 1)
        }
    }

    pub fn time_side(&self, m: i64) -> f64 {
        (-self.e(m) as f64).exp2()
    }

    /// `log2 |Q|` for a level-`m` cube.
    pub fn log2_volume(&self, m: i64) -> i64 {
        -self.e(m) - m * self.dim as i64
    }

    /// `|parent| / |Q|` for level-`m` cubes, `2^{d + E_m − E_{m−1}}`.
    pub fn regularity_ratio(&self, m: i64) -> f64 {
        ((self.dim as i64 + self.step(m)) as f64).exp2()
    }

    pub fn locate(&self, t: f64, x: &[f64], m: i64) -> Result<Cube> {
        if x.len() != self.dim || !t.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("point must be finite with one coordinate per dimension"));
        }
        let ts = (self.e(m) as f64).exp2();
        let xs = (m as f64).exp2();
        // Keeps indices, their children and the box corners exact in f64.
        let exact = 2f64.powi(52);
        if (t * ts).abs() >= exact || x.iter().any(|v| (v * xs).abs() >= exact) {
            return Err(Error::domain(format!("point is too far from the origin for exact level-{m} indices")));
        }
        Ok(Cube { m, i0: (t * ts).floor() as i64, idx: x.iter().map(|v| (v * xs).floor() as i64).collect() })
    }

    pub fn bounds(&self, q: &Cube) -> SpaceTimeBox {
        let dt = self.time_side(q.m);
        let dx = (-q.m as f64).exp2();
        SpaceTimeBox {
            t: (q.i0 as f64 * dt, (q.i0 + 1) as f64 * dt),
            x: q.idx.iter().map(|&i| (i as f64 * dx, (i + 1) as f64 * dx)).collect(),
        }
    }

    /// The `2^{d + k}` level-`(m+1)` cubes partitioning `q`.
    pub fn children(&self, q: &Cube) -> Vec<Cube> {
        let k = self.step(q.m + 1);
        let nt = 1i64 << k;
        let mut out = Vec::with_capacity((nt as usize) << self.dim);
        for dt in 0..nt {
            for bits in 0..(1usize << self.dim) {
                out.push(Cube {
                    m: q.m + 1,
                    i0: q.i0 * nt + dt,
                    idx: q.idx.iter().enumerate().map(|(j, &i)| 2 * i + ((bits >> j) & 1) as i64).collect(),
                });
            }
        }
        out
    }

    pub fn parent(&self, q: &Cube) -> Cube {
        let k = self.step(q.m);
        Cube { m: q.m - 1, i0: q.i0.div_euclid(1 << k), idx: q.idx.iter().map(|i| i.div_euclid(2)).collect() }
    }

    /// `2^{−mγ}` for level `m`, i.e. `τ_m 2^{−E_m}`.
    pub fn parabolic_time(&self, m: i64) -> f64 {
        self.tau(m) * self.time_side(m)
    }

    /// `Q* = [t0, t0 + 4·2^{−mγ}) × Π [x_j − 2·2^{−m}, x_j + 2·2^{−m})` around the
    /// lower corner `(t0, x)` of `q`.
    pub fn dilate(&self, q: &Cube) -> SpaceTimeBox {
        let b = self.bounds(q);
        let h = 2.0 * (-q.m as f64).exp2();
        SpaceTimeBox {
            t: (b.t.0, b.t.0 + 4.0 * self.parabolic_time(q.m)),
            x: b.x.iter().map(|&(a, _)| (a - h, a + h)).collect(),
        }
    }

    /// CSV rows `m, k_m, E_m, tau_m, time_side, regularity_ratio` for
    /// `levels.0 ..= levels.1`.
    pub fn table_csv(&self, levels: (i64, i64)) -> String {
        let mut out = String::from("m,k_m,E_m,tau_m,time_side,regularity_ratio\n");
        for m in levels.0..=levels.1 {
            out.push_str(&format!(
                "{m},{},{},{:?},{:?},{:?}\n",
                self.k(m),
                self.e(m),
                self.tau(m),
                self.time_side(m),
                self.regularity_ratio(m)
            ));
        }
        out
    }
}

/// Time-only filtration with intervals `[4^{−m} i, 4^{−m}(i + 1))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimeLevel {
    pub m: i64,
}

impl TimeLevel {
    pub fn side(&self) -> f64 {
        (-2.0 * self.m as f64).exp2()
    }

    pub fn interval(&self, i: i64) -> (f64, f64) {
        let d = self.side();
        (i as f64 * d, (i + 1) as f64 * d)
    }

    pub fn locate(&self, t: f64) -> i64 {
        (t / self.side()).floor() as i64
    }

    /// `[t0 − 2δ, t0 + 2δ)` with `δ = 4^{−m}`.
    pub fn dilate(&self, i: i64) -> (f64, f64) {
        let (t0, _) = self.interval(i);
        let d = self.side();
        (t0 - 2.0 * d, t0 + 2.0 * d)
    }

    /// Indices of the four level-`(m+1)` intervals inside interval `i`.
    pub fn children(&self, i: i64) -> [i64; 4] {
        [4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> Gamma {
        s.parse().unwrap()
    }

    #[test]
    fn parses_orders_exactly() {
        assert_eq!(g("1.5"), Gamma::rational(3, 2).unwrap());
        assert_eq!(g("3/2"), g("1.5"));
        assert_eq!(g("2"), Gamma::rational(2, 1).unwrap());
        assert_eq!(g("37e-1"), g("3.7"));
        assert_eq!(Gamma::from_f64(0.5).unwrap(), Gamma::rational(1, 2).unwrap());
        assert!((g("pi").value() - std::f64::consts::PI).abs() < 1e-15);
        assert!("-1".parse::<Gamma>().is_err());
        assert!("abc".parse::<Gamma>().is_err());
    }

    #[test]
    fn hand_traces_for_three_halves() {
        let gm = g("1.5");
        let t = trace_to(&gm, 2);
        assert_eq!((t[1].k, t[1].e), (Some(1), 1));
        assert!((t[1].tau(&gm) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!((t[2].k, t[2].e), (Some(2), 3));
        assert_eq!(t[2].tau(&gm), 1.0);
        let back = trace_to(&gm, -1);
        assert_eq!((back[1].k, back[1].e), (Some(2), -2));
        assert!((back[1].tau(&gm) - 2f64.sqrt()).abs() < 1e-15);
        let f = Filtration::new(gm, 1).unwrap();
        assert_eq!(f.time_side(-1), 4.0);
    }

    #[test]
    fn parabolic_case() {
        let f = Filtration::new(g("2"), 1).unwrap();
        for m in -6..=6 {
            assert_eq!(f.k(m), 2);
            assert_eq!(f.time_side(m), 4f64.powi(-m as i32));
        }
        let q = Cube { m: 1, i0: 7, idx: vec![3] };
        assert_eq!(f.parent(&q), Cube { m: 0, i0: 1, idx: vec![1] });
        assert_eq!(f.children(&q).len(), 8);
        let star = f.dilate(&Cube { m: 0, i0: 0, idx: vec![0] });
        assert_eq!(star, SpaceTimeBox { t: (0.0, 4.0), x: vec![(-2.0, 2.0)] });
    }

    #[test]
    fn children_of_level_zero_for_three_halves() {
        let f = Filtration::new(g("1.5"), 1).unwrap();
        assert_eq!(f.children(&Cube { m: 0, i0: 0, idx: vec![0] }).len(), 4);
    }

    #[test]
    fn round_trip_advance() {
        for s in ["0.5", "1", "1.5", "2", "e", "pi", "3.7"] {
            let gm = g(s);
            for st in trace_to(&gm, 15).into_iter().chain(trace_to(&gm, -15)) {
                let back = st.advance(&gm, Direction::Finer).advance(&gm, Direction::Coarser);
                assert_eq!((back.m, back.e), (st.m, st.e));
                let back = st.advance(&gm, Direction::Coarser).advance(&gm, Direction::Finer);
                assert_eq!((back.m, back.e), (st.m, st.e));
            }
        }
    }

    #[test]
    fn time_filtration() {
        assert_eq!(TimeLevel { m: 0 }.interval(3), (3.0, 4.0));
        assert_eq!(TimeLevel { m: 1 }.side(), 0.25);
        let l = TimeLevel { m: 1 };
        assert_eq!(l.dilate(2), (0.0, 1.0));
        for c in l.children(5) {
            let (a, b) = TimeLevel { m: 2 }.interval(c);
            let (p, q) = l.interval(5);
            assert!(p <= a && b <= q);
        }
    }
}
