//! Closed-form complexity brackets of the triangle constructions,
//! parameter optimization and exponent fits. Every additive term has
//! constant 1; `log` is the natural logarithm.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::triangle::Variant;

/// Instance sizes: vertices, edges and `d₂ = √(Exp_v |N_v|²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CostInput {
    pub n: f64,
    pub m: f64,
    pub d2: f64,
}

/// Continuous tunables `|X| = x`, `|A| = a`, `|B| = b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tunables {
    pub x: f64,
    pub a: f64,
    pub b: f64,
}

impl Tunables {
    /// Nearest integers with `1 ≤ x ≤ n` and `1 ≤ b ≤ a ≤ n`.
    pub fn rounded(&self, n: usize) -> (usize, usize, usize) {
        let r = |v: f64| (v.round().max(1.0) as usize).min(n.max(1));
        let a = r(self.a);
        (r(self.x), a, r(self.b).min(a))
    }
}

fn check_input(i: &CostInput) -> Result<()> {
    if !(i.n > 1.0 && i.m > 0.0 && i.d2 >= 0.0) || !(i.n.is_finite() && i.m.is_finite() && i.d2.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "need n > 1, m > 0, d2 >= 0, got n={}, m={}, d2={}",
            i.n, i.m, i.d2
        )));
    }
    Ok(())
}

/// The bracket `K` under the square root.
pub fn bracket(variant: Variant, i: &CostInput, t: &Tunables) -> Result<f64> {
    check_input(i)?;
    let Tunables { x, a, b } = *t;
    if !(x > 0.0 && a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "tunables must be positive, got x={x}, a={a}, b={b}"
        )));
    }
    let (n, m) = (i.n, i.m);
    let ln = n.ln();
    let na2 = (n / a).powi(2);
    let tail = (a / b).powi(2) * (b + b * b / x);
    Ok(match variant {
        Variant::Dense => x * n * n + (a * x).powi(2) + na2 * (a * x * x + n * (b * b + tail)),
        Variant::Sparse => {
            let t = m / (n * n);
            (x * m + (a * x).powi(2) * t + na2 * (a * x * x * t + n * (b * b * t + tail))) * ln
        }
        Variant::Sparsenew => n * (b * b * m / (n * n) * ln + (n * n / (b * b)) * (b + b * b * i.d2 * i.d2 / (n * n))),
    })
}

/// `√K`.
pub fn eval_cost(variant: Variant, i: &CostInput, t: &Tunables) -> Result<f64> {
    bracket(variant, i, t).map(f64::sqrt)
}

/// The parameter choice stated with each construction.
pub fn reference_choice(variant: Variant, i: &CostInput) -> Tunables {
    let n = i.n;
    match variant {
        Variant::Dense => Tunables {
            x: n.sqrt(),
            a: n.powf(0.75),
            b: n.sqrt(),
        },
        Variant::Sparse => {
            let xb = n.sqrt() / (i.m / (n * n)).cbrt();
            Tunables {
                x: xb,
                a: n.powf(0.75),
                b: xb,
            }
        }
        Variant::Sparsenew => {
            let b = n.powf(4.0 / 3.0) / (i.m * n.ln()).cbrt();
            Tunables { x: 1.0, a: n, b }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Optimum {
    pub tunables: Tunables,
    pub cost: f64,
    pub reference: Tunables,
    pub reference_cost: f64,
    /// Regime conditions of the analysis that do not hold.
    pub warnings: Vec<String>,
}

/// Feasible region in log coordinates `(ln x, ln a, ln b)`.
struct Region {
    ln_n: f64,
    b_min: f64,
    free_xa: bool,
}

impl Region {
    fn project(&self, p: [f64; 3]) -> [f64; 3] {
        let c = |v: f64, lo: f64| v.clamp(lo, self.ln_n);
        if !self.free_xa {
            return [0.0, self.ln_n, c(p[2], self.b_min)];
        }
        let a = c(p[1], 0.0);
        [c(p[0], 0.0), a, p[2].clamp(self.b_min.min(a), a)]
    }
}

/// Minimizes the cost over continuous tunables with `1 ≤ x ≤ n`,
/// `1 ≤ b ≤ a ≤ n` (sparsenew: `b ∈ [min(n²/m, n), n]`), starting from
/// [`reference_choice`] and accepting only improvements.
pub fn optimize_params(variant: Variant, i: &CostInput) -> Result<Optimum> {
    check_input(i)?;
    let n = i.n;
    let region = Region {
        ln_n: n.ln(),
        b_min: match variant {
            Variant::Sparsenew => (n * n / i.m).min(n).ln(),
            _ => 0.0,
        },
        free_xa: variant != Variant::Sparsenew,
    };
    let mut warnings = Vec::new();
    if variant == Variant::Sparse && i.m < n.powf(1.25) {
        warnings.push(format!("m = {} is below n^(5/4) = {}", i.m, n.powf(1.25)));
    }
    if variant == Variant::Sparsenew && n * n / i.m > n {
        warnings.push(format!("n^2/m = {} exceeds n; b is capped at n", n * n / i.m));
    }
    let to_t = |p: [f64; 3]| Tunables {
        x: p[0].exp(),
        a: p[1].exp(),
        b: p[2].exp(),
    };
    let cost = |p: [f64; 3]| bracket(variant, i, &to_t(p)).map(|k| k.ln());
    let reference = reference_choice(variant, i);
    let reference_cost = eval_cost(variant, i, &reference)?;
    let start = [reference.x.ln(), reference.a.ln(), reference.b.ln()];
    let mut p = region.project(start);
    if variant != Variant::Sparsenew && p.iter().zip(&start).any(|(a, b)| (a - b).abs() > 1e-12) {
        warnings.push("reference choice lies outside 1 <= b <= a <= n and was projected".into());
    }
    let mut best = cost(p)?;
    let mut step = 1.0;
    while step > 1e-9 {
        let mut improved = false;
        for d in 0..3 {
            for s in [step, -step] {
                let mut q = p;
                q[d] += s;
                let q = region.project(q);
                let c = cost(q)?;
                if c < best - 1e-15 {
                    best = c;
                    p = q;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    let tunables = to_t(p);
    let cost = eval_cost(variant, i, &tunables)?;
    Ok(Optimum {
        tunables,
        cost,
        reference,
        reference_cost,
        warnings,
    })
}

/// `m = coef · n^exp`, written `n^1.5` or `0.5*n^1.5`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MLaw {
    pub coef: f64,
    pub exp: f64,
}

impl MLaw {
    pub fn m(&self, n: f64) -> f64 {
        self.coef * n.powf(self.exp)
    }

    /// `d₂` of a regular graph with `m(n)` edges: `2m/n`.
    pub fn regular_d2(&self, n: f64) -> f64 {
        2.0 * self.m(n) / n
    }
}

impl FromStr for MLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::InvalidParameters(format!("cannot parse m-law {s:?}, expected e.g. n^1.5 or 0.5*n^1.5"));
        let (coef, rest) = match s.split_once('*') {
            Some((c, r)) => (c.parse::<f64>().map_err(|_| bad())?, r),
            None => (1.0, s.as_str()),
        };
        let exp = match rest.strip_prefix('n') {
            Some("") => 1.0,
            Some(e) => e.strip_prefix('^').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
            None => return Err(bad()),
        };
        Ok(MLaw { coef, exp })
    }
}

/// Least-squares line through `(ln n, ln value)`.
#[derive(Clone, Debug, Serialize)]
pub struct TermFit {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub variant: Variant,
    pub slope: f64,
    pub residual: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub points: usize,
    /// Power of `log n` divided out before fitting.
    pub log_power: f64,
    pub terms: Vec<TermFit>,
    /// Term with the largest fitted slope.
    pub dominant: String,
    /// Term with the larger value at `n_max`.
    pub largest_at_n_max: String,
    pub samples: Vec<FitSample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitSample {
    pub n: f64,
    pub m: f64,
    pub d2: f64,
    pub tunables: Tunables,
    pub cost: f64,
}

pub fn least_squares(name: &str, xs: &[f64], ys: &[f64]) -> TermFit {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    TermFit {
        name: name.into(),
        slope,
        intercept,
        residual,
    }
}

/// `count` log-spaced points from `lo` to `hi`.
pub fn log_range(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}

/// Fits the slope of the optimized cost against `n` after dividing out
/// the declared log factor (dense: none; sparse: `√log n`; sparsenew:
/// `(log n)^{1/6}`). For sparsenew the two additive parts of the bracket
/// are fitted separately, since `n·d₂²` does not depend on `b`.
pub fn fit_exponent(variant: Variant, law: &MLaw, ns: &[f64]) -> Result<FitResult> {
    if ns.len() < 3 {
        return Err(Error::InvalidParameters(format!(
            "need at least 3 points, got {}",
            ns.len()
        )));
    }
    let log_power = match variant {
        Variant::Dense => 0.0,
        Variant::Sparse => 0.5,
        Variant::Sparsenew => 1.0 / 6.0,
    };
    let samples: Vec<FitSample> = ns
        .par_iter()
        .map(|&n| {
            let input = CostInput {
                n,
                m: law.m(n),
                d2: law.regular_d2(n),
            };
            optimize_params(variant, &input).map(|o| FitSample {
                n,
                m: input.m,
                d2: input.d2,
                tunables: o.tunables,
                cost: o.cost,
            })
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = samples.iter().map(|s| s.n.ln()).collect();
    let corrected = |v: f64, n: f64| v.ln() - log_power * n.ln().ln();
    let total: Vec<f64> = samples.iter().map(|s| corrected(s.cost, s.n)).collect();
    let mut terms = vec![least_squares("total", &xs, &total)];
    let mut largest_at_n_max = "total".to_string();
    if variant == Variant::Sparsenew {
        let power: Vec<f64> = samples
            .iter()
            .map(|s| {
                let k = bracket(variant, &CostInput { d2: 0.0, ..input_of(s) }, &s.tunables).expect("valid sample");
                corrected(k.sqrt(), s.n)
            })
            .collect();
        let d2_term: Vec<f64> = samples.iter().map(|s| (s.d2 * s.n.sqrt()).ln()).collect();
        terms.push(least_squares("n^(5/6) (m log n)^(1/6)", &xs, &power));
        terms.push(least_squares("d2 sqrt(n)", &xs, &d2_term));
        let last = samples.len() - 1;
        largest_at_n_max = if power[last] + log_power * samples[last].n.ln().ln() >= d2_term[last] {
            terms[1].name.clone()
        } else {
            terms[2].name.clone()
        };
    }
    let dominant = terms
        .iter()
        .skip(usize::from(terms.len() > 1))
        .max_by(|a, b| a.slope.total_cmp(&b.slope))
        .expect("at least one term")
        .clone();
    Ok(FitResult {
        variant,
        slope: dominant.slope,
        residual: dominant.residual,
        n_min: ns.iter().copied().fold(f64::INFINITY, f64::min),
        n_max: ns.iter().copied().fold(0.0, f64::max),
        points: ns.len(),
        log_power,
        dominant: dominant.name,
        largest_at_n_max,
        terms,
        samples,
    })
}

fn input_of(s: &FitSample) -> CostInput {
    CostInput {
        n: s.n,
        m: s.m,
        d2: s.d2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_input(n: f64) -> CostInput {
        CostInput {
            n,
            m: n * n / 2.0,
            d2: n,
        }
    }

    #[test]
    fn dense_bracket_by_hand() {
        // n=4, x=a=b=2: 32 + 16 + 4·(8 + 4·(4 + 1·(2 + 2))) = 208
        let k = bracket(Variant::Dense, &dense_input(4.0), &Tunables { x: 2.0, a: 2.0, b: 2.0 }).unwrap();
        assert!((k - 208.0).abs() < 1e-12);
    }

    #[test]
    fn optimizer_never_worse_than_reference_choice() {
        for variant in [Variant::Dense, Variant::Sparse, Variant::Sparsenew] {
            for n in [8.0, 1e3, 1e6] {
                let law = MLaw { coef: 1.0, exp: 1.5 };
                let i = CostInput {
                    n,
                    m: law.m(n),
                    d2: law.regular_d2(n),
                };
                let o = optimize_params(variant, &i).unwrap();
                assert!(o.cost <= o.reference_cost * (1.0 + 1e-12), "{variant:?} n={n}");
                let (x, a, b) = o.tunables.rounded(n as usize);
                assert!(x >= 1 && b >= 1 && b <= a && a <= n as usize);
            }
        }
    }

    #[test]
    fn dense_optimum_near_three_quarters() {
        let n = (1u64 << 20) as f64;
        let o = optimize_params(Variant::Dense, &dense_input(n)).unwrap();
        let ratio = o.tunables.a / n.powf(0.75);
        assert!((0.25..=4.0).contains(&ratio), "a ratio {ratio}");
    }

    #[test]
    fn sparse_optimum_near_reference_choice() {
        let n = (1u64 << 20) as f64;
        let i = CostInput {
            n,
            m: n.powf(1.5),
            d2: 2.0 * n.sqrt(),
        };
        let o = optimize_params(Variant::Sparse, &i).unwrap();
        let target = n.sqrt() / (i.m / (n * n)).cbrt();
        for v in [o.tunables.x, o.tunables.b] {
            assert!((0.25..=4.0).contains(&(v / target)), "{v} vs {target}");
        }
    }

    #[test]
    fn sparsenew_reference_choice_matches_closed_form() {
        for n in [1e3, 1e5, 1e7] {
            let law = MLaw { coef: 1.0, exp: 1.5 };
            let i = CostInput {
                n,
                m: law.m(n),
                d2: law.regular_d2(n),
            };
            let c = eval_cost(Variant::Sparsenew, &i, &reference_choice(Variant::Sparsenew, &i)).unwrap();
            let closed = n.powf(5.0 / 6.0) * (i.m * n.ln()).powf(1.0 / 6.0) + i.d2 * n.sqrt();
            assert!(c / closed < 4.0 && closed / c < 4.0, "{c} vs {closed}");
        }
    }

    #[test]
    fn monotone_in_m_and_d2() {
        let t = Tunables {
            x: 10.0,
            a: 100.0,
            b: 20.0,
        };
        for variant in [Variant::Dense, Variant::Sparse, Variant::Sparsenew] {
            let base = CostInput {
                n: 1000.0,
                m: 5000.0,
                d2: 10.0,
            };
            let c = eval_cost(variant, &base, &t).unwrap();
            assert!(eval_cost(variant, &CostInput { m: 6000.0, ..base }, &t).unwrap() >= c);
            assert!(eval_cost(variant, &CostInput { d2: 11.0, ..base }, &t).unwrap() >= c);
        }
    }

    #[test]
    fn m_law_parsing() {
        assert_eq!("n^1.5".parse::<MLaw>().unwrap(), MLaw { coef: 1.0, exp: 1.5 });
        assert_eq!("0.5 * n^2".parse::<MLaw>().unwrap(), MLaw { coef: 0.5, exp: 2.0 });
        assert_eq!("n".parse::<MLaw>().unwrap(), MLaw { coef: 1.0, exp: 1.0 });
        assert!("m^2".parse::<MLaw>().is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = Tunables { x: 1.0, a: 1.0, b: 1.0 };
        assert!(eval_cost(
            Variant::Dense,
            &CostInput {
                n: 0.0,
                m: 1.0,
                d2: 0.0
            },
            &t
        )
        .is_err());
        assert!(eval_cost(Variant::Dense, &dense_input(10.0), &Tunables { x: 0.0, ..t }).is_err());
        assert!(fit_exponent(Variant::Dense, &MLaw { coef: 1.0, exp: 2.0 }, &[10.0, 20.0]).is_err());
    }
}
