//! Exact continuous nondecreasing piecewise-linear functions.
//!
//! A function is zero on `(-inf, anchor]`, follows a finite chain of linear
//! pieces to the right of the anchor, and grows with a strictly positive final
//! slope after the last breakpoint. Values are stored as knots `(x, f(x))`
//! together with the slope to the right of each knot.
//!
//! The canonical form merges adjacent pieces of equal slope and absorbs a
//! leading flat-at-zero piece into the anchor, so two functions are equal iff
//! their canonical knots are.

use crate::error::{Error, Result};
use crate::rational::{self, Extended, Rational};
use num_traits::{Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
struct Knot {
    x: Rational,
    y: Rational,
    /// Slope on `[x, next knot]`, or the final slope for the last knot.
    slope: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinear {
    knots: Vec<Knot>,
}

impl PiecewiseLinear {
    /// Builds `f` from its anchor, a list of `(right end, slope)` pieces and a
    /// final slope. Piece `k` covers `[x_{k-1}, x_k]` with `x_0 = anchor`.
    pub fn new(anchor: Rational, segments: Vec<(Rational, Rational)>, final_slope: Rational) -> Result<Self> {
        if !final_slope.is_positive() {
            return Err(Error::InvalidFunction(format!("final slope must be positive, got {final_slope}")));
        }
        let mut knots = Vec::with_capacity(segments.len() + 1);
        let mut x = anchor;
        let mut y = Rational::zero();
        for (k, (end, slope)) in segments.into_iter().enumerate() {
            if slope.is_negative() {
                return Err(Error::InvalidFunction(format!("piece {k} has negative slope {slope}")));
            }
            if end < x || (end == x && k > 0) {
                return Err(Error::InvalidFunction(format!(
                    "breakpoints must be strictly increasing (piece {k} ends at {end} after {x})"
                )));
            }
            if end == x {
                // A zero-length first piece starting at the anchor.
                continue;
            }
            let next_y = &y + &slope * (&end - &x);
            knots.push(Knot { x, y, slope });
            x = end;
            y = next_y;
        }
        knots.push(Knot { x, y, slope: final_slope });
        Ok(Self::canonical(knots))
    }

    /// `rho * (x - x_star)^+`.
    pub fn linear(rho: Rational, x_star: Rational) -> Result<Self> {
        Self::new(x_star, Vec::new(), rho)
    }

    fn canonical(knots: Vec<Knot>) -> Self {
        let mut out: Vec<Knot> = Vec::with_capacity(knots.len());
        for knot in knots {
            match out.last() {
                Some(prev) if prev.slope == knot.slope => {}
                // A flat piece at zero: the zero set extends to this knot.
                Some(prev) if prev.slope.is_zero() && prev.y.is_zero() && out.len() == 1 => {
                    out[0] = knot;
                }
                _ => out.push(knot),
            }
        }
        PiecewiseLinear { knots: out }
    }

    pub fn anchor(&self) -> &Rational {
        &self.knots[0].x
    }

    /// Canonical `(right end, slope)` pieces between the anchor and the last breakpoint.
    pub fn segments(&self) -> Vec<(Rational, Rational)> {
        self.knots.windows(2).map(|w| (w[1].x.clone(), w[0].slope.clone())).collect()
    }

    pub fn final_slope(&self) -> &Rational {
        &self.knots.last().expect("at least one knot").slope
    }

    /// Breakpoints including the anchor.
    pub fn breakpoints(&self) -> impl Iterator<Item = &Rational> {
        self.knots.iter().map(|k| &k.x)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        if x <= self.anchor() {
            return Rational::zero();
        }
        let k = self.knots.partition_point(|kn| &kn.x <= x) - 1;
        let kn = &self.knots[k];
        &kn.y + &kn.slope * (x - &kn.x)
    }

    /// The largest point where the function vanishes.
    pub fn zero_end(&self) -> Rational {
        self.anchor().clone()
    }

    pub fn sum<'a, I>(fs: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a PiecewiseLinear>,
    {
        let fs: Vec<&PiecewiseLinear> = fs.into_iter().collect();
        if fs.is_empty() {
            return Err(Error::InvalidArgument("sum of an empty list of functions".into()));
        }
        let mut xs: Vec<Rational> = fs.iter().flat_map(|f| f.breakpoints().cloned()).collect();
        xs.sort();
        xs.dedup();
        let knots = xs
            .into_iter()
            .map(|x| {
                let y = fs.iter().map(|f| f.eval(&x)).sum();
                let slope = fs.iter().map(|f| f.slope_right_of(&x)).sum();
                Knot { x, y, slope }
            })
            .collect();
        Ok(Self::canonical(knots))
    }

    /// Slope on `[x, x + eps)`.
    fn slope_right_of(&self, x: &Rational) -> Rational {
        if x < self.anchor() {
            return Rational::zero();
        }
        let k = self.knots.partition_point(|kn| &kn.x <= x) - 1;
        self.knots[k].slope.clone()
    }

    /// `sup { x : f(x) <= t }` for `t >= 0`. On a flat spot at level `t` this is
    /// the right end of the spot.
    pub fn right_inverse(&self, t: &Rational) -> Result<Rational> {
        if t.is_negative() {
            return Err(Error::InvalidArgument(format!("right inverse needs t >= 0, got {t}")));
        }
        let k = self.knots.partition_point(|kn| &kn.y <= t) - 1;
        let kn = &self.knots[k];
        // Either the last knot (final slope > 0) or the next knot is strictly above t.
        Ok(&kn.x + (t - &kn.y) / &kn.slope)
    }

    /// `sup { x <= cap : f(x) = f(v) }` for `v <= cap`.
    pub fn level_sup(&self, cap: &Rational, v: &Rational) -> Result<Rational> {
        if v > cap {
            return Err(Error::InvalidArgument(format!("level_sup needs v <= cap, got {v} > {cap}")));
        }
        let right = self.right_inverse(&self.eval(v))?;
        Ok(rational::min(&right, cap))
    }

    pub fn is_strictly_increasing_on_support(&self) -> bool {
        self.knots.iter().all(|k| k.slope.is_positive())
    }

    /// True iff the function is `rho (x - x*)^+` for some `rho > 0`.
    pub fn is_single_kink(&self) -> bool {
        self.knots.len() == 1
    }

    /// The slope just right of the zero end, and the first breakpoint after it
    /// (where that slope stops being valid).
    pub fn germ(&self) -> (Rational, Extended) {
        let rho = self.knots[0].slope.clone();
        let validity = match self.knots.get(1) {
            Some(k) => Extended::Finite(k.x.clone()),
            None => Extended::Infinite,
        };
        (rho, validity)
    }

    /// Smallest and largest slope on `[zero_end, inf)`.
    pub fn slope_bounds(&self) -> (Rational, Rational) {
        let mut slopes = self.knots.iter().map(|k| &k.slope);
        let first = slopes.next().expect("at least one knot").clone();
        slopes.fold((first.clone(), first), |(lo, hi), s| (rational::min(&lo, s), rational::max(&hi, s)))
    }

    /// `y -> f(y + offset)`.
    pub fn shifted(&self, offset: &Rational) -> Self {
        let knots =
            self.knots.iter().map(|k| Knot { x: &k.x - offset, y: k.y.clone(), slope: k.slope.clone() }).collect();
        PiecewiseLinear { knots }
    }
}
