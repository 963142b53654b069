//! Connection functions `f: [0, ∞) -> [0, 1]`, nonincreasing with bounded
//! support, stored as right-closed step functions.
//!
//! A step function with breaks `b_1 < ... < b_k` and values `v_1 >= ... >=
//! v_k` takes value `v_i` on `(b_{i-1}, b_i]` (with `b_0 = 0` and `f(0) =
//! v_1`) and `0` beyond `b_k`. Step functions are closed under both
//! transforms and have exact integrals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};

/// JSON form: `{"type":"indicator","range":1.0}` or
/// `{"type":"steps","breaks":[...],"values":[...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConnectionSpec {
    Indicator { range: f64 },
    Steps { breaks: Vec<f64>, values: Vec<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ConnectionSpec", into = "ConnectionSpec")]
pub struct ConnectionFunction {
    repr: ConnectionSpec,
    support: f64,
}

/// Which side a discretisation approximates the target function from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Upper,
    Lower,
}

impl ConnectionFunction {
    /// Gilbert's rule: connect iff distance `<= range`.
    pub fn indicator(range: f64) -> Result<Self> {
        check_positive("range", range)?;
        Ok(ConnectionFunction {
            repr: ConnectionSpec::Indicator { range },
            support: range,
        })
    }

    pub fn steps(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.is_empty() || breaks.len() != values.len() {
            return Err(Error::invalid(
                "breaks",
                format!(
                    "need equally many breaks and values, got {} and {}",
                    breaks.len(),
                    values.len()
                ),
            ));
        }
        let mut prev = 0.0;
        for &b in &breaks {
            if !(b > prev && b.is_finite()) {
                return Err(Error::invalid(
                    "breaks",
                    "breakpoints must be finite, positive and strictly increasing",
                ));
            }
            prev = b;
        }
        let mut prev = 1.0;
        for &v in &values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid("values", format!("{v} not in [0, 1]")));
            }
            if v > prev {
                return Err(Error::invalid("values", "values must be nonincreasing"));
            }
            prev = v;
        }
        let support = match values.iter().rposition(|&v| v > 0.0) {
            Some(i) => breaks[i],
            None => {
                return Err(Error::invalid(
                    "values",
                    "connection function vanishes identically",
                ))
            }
        };
        Ok(ConnectionFunction {
            repr: ConnectionSpec::Steps { breaks, values },
            support,
        })
    }

    /// Step approximation of a nonincreasing `target` on `[0, support]` with
    /// `resolution` equal-width steps. `Upper` uses the left-end value of each
    /// step (dominates `target`), `Lower` the right-end value.
    pub fn discretize<F: Fn(f64) -> f64>(
        target: F,
        support: f64,
        resolution: usize,
        bound: Bound,
    ) -> Result<Self> {
        check_positive("support", support)?;
        if resolution == 0 {
            return Err(Error::invalid("resolution", "must be >= 1"));
        }
        let width = support / resolution as f64;
        let breaks: Vec<f64> = (1..=resolution).map(|i| width * i as f64).collect();
        let values = (0..resolution)
            .map(|i| {
                let at = match bound {
                    Bound::Upper => width * i as f64,
                    Bound::Lower => width * (i + 1) as f64,
                };
                target(at)
            })
            .collect();
        Self::steps(breaks, values)
    }

    pub fn spec(&self) -> &ConnectionSpec {
        &self.repr
    }

    pub fn support_radius(&self) -> f64 {
        self.support
    }

    /// `f(r)`; rejects negative or NaN distances.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::invalid("r", format!("distance {r} must be >= 0")));
        }
        Ok(self.value(r))
    }

    /// Unchecked evaluation for `r >= 0`.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match &self.repr {
            ConnectionSpec::Indicator { range } => {
                if r <= *range {
                    1.0
                } else {
                    0.0
                }
            }
            ConnectionSpec::Steps { breaks, values } => {
                let i = breaks.partition_point(|&b| b < r);
                values.get(i).copied().unwrap_or(0.0)
            }
        }
    }

    /// Breaks and values with equal neighbouring values merged and trailing
    /// zero steps dropped.
    pub fn canonical_steps(&self) -> (Vec<f64>, Vec<f64>) {
        let (breaks, values): (&[f64], &[f64]) = match &self.repr {
            ConnectionSpec::Indicator { range } => {
                return (vec![*range], vec![1.0]);
            }
            ConnectionSpec::Steps { breaks, values } => (breaks, values),
        };
        let mut out_b: Vec<f64> = Vec::with_capacity(breaks.len());
        let mut out_v: Vec<f64> = Vec::with_capacity(values.len());
        for (&b, &v) in breaks.iter().zip(values) {
            if v == 0.0 {
                break;
            }
            match out_v.last() {
                Some(&last) if last == v => *out_b.last_mut().unwrap() = b,
                _ => {
                    out_b.push(b);
                    out_v.push(v);
                }
            }
        }
        (out_b, out_v)
    }

    /// `Some(range)` when `f` is exactly Gilbert's indicator of `[0, range]`.
    pub fn as_indicator(&self) -> Option<f64> {
        let (b, v) = self.canonical_steps();
        (v.len() == 1 && v[0] == 1.0).then(|| b[0])
    }

    /// `∫₀^∞ r f(r) dr`, exact for step functions.
    pub fn first_moment(&self) -> f64 {
        match &self.repr {
            ConnectionSpec::Indicator { range } => 0.5 * range * range,
            ConnectionSpec::Steps { breaks, values } => {
                let mut prev = 0.0;
                let mut sum = 0.0;
                for (&b, &v) in breaks.iter().zip(values) {
                    sum += v * (b * b - prev * prev);
                    prev = b;
                }
                0.5 * sum
            }
        }
    }

    /// `r ↦ q·f(r)`.
    pub fn squash(&self, q: f64) -> Result<Self> {
        check_unit_open_closed("q", q)?;
        if q == 1.0 {
            return Ok(self.clone());
        }
        let (breaks, values) = self.raw_steps();
        Self::steps(breaks, values.into_iter().map(|v| q * v).collect())
    }

    /// The spreading transform `r ↦ p·f(√p·r)`.
    pub fn spread(&self, p: f64) -> Result<Self> {
        check_unit_open_closed("p", p)?;
        if p == 1.0 {
            return Ok(self.clone());
        }
        let stretch = p.sqrt();
        let (breaks, values) = self.raw_steps();
        Self::steps(
            breaks.into_iter().map(|b| b / stretch).collect(),
            values.into_iter().map(|v| p * v).collect(),
        )
    }

    /// Length rescale to unit support: returns `g(r) = f(r·scale)` and
    /// `scale = support_radius(f)`. Critical intensities satisfy
    /// `λ_g = scale²·λ_f`.
    pub fn normalize_support(&self) -> (Self, f64) {
        let scale = self.support;
        if scale == 1.0 {
            return (self.clone(), 1.0);
        }
        let g = match &self.repr {
            ConnectionSpec::Indicator { range } => Self::indicator(range / scale),
            ConnectionSpec::Steps { breaks, values } => Self::steps(
                breaks.iter().map(|b| b / scale).collect(),
                values.clone(),
            ),
        }
        .expect("rescaling preserves validity");
        (g, scale)
    }

    /// Pointwise comparison of canonical representations.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let (ba, va) = self.canonical_steps();
        let (bb, vb) = other.canonical_steps();
        ba.len() == bb.len()
            && ba.iter().zip(&bb).all(|(x, y)| (x - y).abs() <= tol)
            && va.iter().zip(&vb).all(|(x, y)| (x - y).abs() <= tol)
    }

    pub fn describe(&self) -> String {
        match &self.repr {
            ConnectionSpec::Indicator { range } => format!("indicator({range})"),
            ConnectionSpec::Steps { breaks, values } => {
                let pairs: Vec<String> = breaks
                    .iter()
                    .zip(values)
                    .map(|(b, v)| format!("{b}:{v}"))
                    .collect();
                format!("steps({})", pairs.join(";"))
            }
        }
    }

    fn raw_steps(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.repr {
            ConnectionSpec::Indicator { range } => (vec![*range], vec![1.0]),
            ConnectionSpec::Steps { breaks, values } => (breaks.clone(), values.clone()),
        }
    }
}

impl PartialEq for ConnectionFunction {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_steps() == other.canonical_steps()
    }
}

impl TryFrom<ConnectionSpec> for ConnectionFunction {
    type Error = Error;

    fn try_from(spec: ConnectionSpec) -> Result<Self> {
        match spec {
            ConnectionSpec::Indicator { range } => Self::indicator(range),
            ConnectionSpec::Steps { breaks, values } => Self::steps(breaks, values),
        }
    }
}

impl From<ConnectionFunction> for ConnectionSpec {
    fn from(f: ConnectionFunction) -> Self {
        f.repr
    }
}

/// Expected degree `2π·λ·∫ r f(r) dr`.
pub fn mean_degree(intensity: f64, f: &ConnectionFunction) -> Result<f64> {
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return Err(Error::invalid("intensity", format!("{intensity} must be >= 0")));
    }
    Ok(2.0 * PI * intensity * f.first_moment())
}

/// The branching lower bound `(2π ∫ r f(r) dr)^{-1}` on the critical intensity.
pub fn penrose_lower_bound(f: &ConnectionFunction) -> Result<f64> {
    let m = f.first_moment();
    if !(m > 0.0) {
        return Err(Error::invalid("f", "first moment must be positive"));
    }
    Ok(1.0 / (2.0 * PI * m))
}

fn check_unit_open_closed(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{x} not in (0, 1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gilbert() -> ConnectionFunction {
        ConnectionFunction::indicator(1.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = gilbert();
        assert_eq!(f.eval(0.5).unwrap(), 1.0);
        assert_eq!(f.eval(1.0).unwrap(), 1.0);
        assert_eq!(f.eval(1.5).unwrap(), 0.0);
        assert!(f.eval(-0.1).is_err());
        let g = ConnectionFunction::steps(vec![0.5, 1.0], vec![1.0, 0.25]).unwrap();
        assert_eq!(g.eval(0.7).unwrap(), 0.25);
        assert_eq!(g.eval(0.5).unwrap(), 1.0);
        assert_eq!(g.eval(0.0).unwrap(), 1.0);
        assert_eq!(g.eval(1.01).unwrap(), 0.0);
    }

    #[test]
    fn moments() {
        assert_eq!(gilbert().first_moment(), 0.5);
        assert_eq!(ConnectionFunction::indicator(2.0).unwrap().first_moment(), 2.0);
        let g = ConnectionFunction::steps(vec![1.0, 2.0], vec![1.0, 0.5]).unwrap();
        assert!((g.first_moment() - 1.25).abs() < 1e-15);
        assert!((mean_degree(1.0, &gilbert()).unwrap() - PI).abs() < 1e-15);
        assert_eq!(mean_degree(0.0, &g).unwrap(), 0.0);
    }

    #[test]
    fn lower_bounds() {
        assert!((penrose_lower_bound(&gilbert()).unwrap() - 1.0 / PI).abs() < 1e-15);
        let two = ConnectionFunction::indicator(2.0).unwrap();
        assert!((penrose_lower_bound(&two).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        for p in [0.1, 0.25, 0.5, 0.9, 1.0] {
            let s = gilbert().spread(p).unwrap();
            assert!((penrose_lower_bound(&s).unwrap() - 1.0 / PI).abs() < 1e-12);
        }
    }

    #[test]
    fn squash_examples() {
        let f = gilbert();
        assert_eq!(f.squash(1.0).unwrap(), f);
        let h = f.squash(0.5).unwrap();
        assert_eq!(h.canonical_steps(), (vec![1.0], vec![0.5]));
        assert_eq!(h.support_radius(), 1.0);
        assert!(f.squash(0.0).is_err());
        assert!(f.squash(1.5).is_err());
    }

    #[test]
    fn spread_examples() {
        let s = gilbert().spread(0.25).unwrap();
        assert_eq!(s.canonical_steps(), (vec![2.0], vec![0.25]));
        assert_eq!(s.support_radius(), 2.0);
        assert_eq!(s.value(1.99), 0.25);
        assert_eq!(s.value(2.01), 0.0);
        assert_eq!(gilbert().spread(1.0).unwrap(), gilbert());
        assert!(gilbert().spread(0.0).is_err());
    }

    #[test]
    fn normalization() {
        let (g, scale) = ConnectionFunction::indicator(2.0).unwrap().normalize_support();
        assert_eq!(g, gilbert());
        assert_eq!(scale, 2.0);
        let (g, scale) = gilbert().normalize_support();
        assert_eq!(g, gilbert());
        assert_eq!(scale, 1.0);
    }

    #[test]
    fn constructor_validation() {
        assert!(ConnectionFunction::steps(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(ConnectionFunction::steps(vec![2.0, 1.0], vec![0.5, 0.4]).is_err());
        assert!(ConnectionFunction::steps(vec![1.0], vec![0.0]).is_err());
        assert!(ConnectionFunction::steps(vec![1.0], vec![1.2]).is_err());
        assert!(ConnectionFunction::steps(vec![], vec![]).is_err());
        let trailing = ConnectionFunction::steps(vec![1.0, 3.0], vec![0.5, 0.0]).unwrap();
        assert_eq!(trailing.support_radius(), 1.0);
        assert!(ConnectionFunction::indicator(0.0).is_err());
    }

    #[test]
    fn json_forms() {
        let f: ConnectionFunction =
            serde_json::from_str(r#"{"type":"indicator","range":1.0}"#).unwrap();
        assert_eq!(f, gilbert());
        let g: ConnectionFunction =
            serde_json::from_str(r#"{"type":"steps","breaks":[0.5,1.0],"values":[1.0,0.25]}"#)
                .unwrap();
        assert_eq!(g.value(0.7), 0.25);
        let bad = serde_json::from_str::<ConnectionFunction>(
            r#"{"type":"steps","breaks":[0.5,1.0],"values":[0.25,1.0]}"#,
        );
        assert!(bad.is_err());
        let back = serde_json::to_string(&g).unwrap();
        assert_eq!(serde_json::from_str::<ConnectionFunction>(&back).unwrap(), g);
    }

    #[test]
    fn discretized_exponential_brackets_target() {
        let target = |r: f64| (-r).exp();
        let up = ConnectionFunction::discretize(target, 3.0, 60, Bound::Upper).unwrap();
        let lo = ConnectionFunction::discretize(target, 3.0, 60, Bound::Lower).unwrap();
        for i in 0..300 {
            let r = 3.0 * i as f64 / 300.0;
            assert!(lo.value(r) <= target(r) + 1e-15);
            assert!(up.value(r) + 1e-15 >= target(r));
        }
        assert!(lo.first_moment() < up.first_moment());
    }
}
