//! Scalar proximal operators of the nonconvex penalty family.
//!
//! `scalar_prox(p, mu, v)` returns a global minimizer of
//! `pen(mu, |x|) + (x - v)^2 / 2`, where `pen` is [`Penalty::value`]. For
//! L1, Lq, capped-Lq, Log and Firm the weight enters as `mu * phi(|x|)`;
//! MCP and SCAD use their usual two-parameter form with `lambda = mu`.
//!
//! Each prox enumerates the stationary points of every smooth piece (clamped
//! to the piece), the piece boundaries and zero, then keeps the candidate
//! with the lowest objective. Exact ties go to the smaller magnitude.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    L1,
    Firm { gamma: f64 },
    Lq { q: f64 },
    CappedLq { q: f64, cap: f64 },
    Mcp { gamma: f64 },
    Scad { a: f64 },
    Log { gamma: f64 },
}

impl Penalty {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPenalty(msg));
        match *self {
            Penalty::L1 => Ok(()),
            Penalty::Firm { gamma } | Penalty::Mcp { gamma } if !(gamma > 1.0 && gamma.is_finite()) => {
                bad(format!("gamma must exceed 1, got {gamma}"))
            }
            Penalty::Scad { a } if !(a > 2.0 && a.is_finite()) => bad(format!("SCAD a must exceed 2, got {a}")),
            Penalty::Lq { q } | Penalty::CappedLq { q, .. } if !(q > 0.0 && q <= 1.0) => {
                bad(format!("q must lie in (0, 1], got {q}"))
            }
            Penalty::CappedLq { cap, .. } if !(cap > 0.0 && cap.is_finite()) => {
                bad(format!("cap must be positive, got {cap}"))
            }
            Penalty::Log { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                bad(format!("log gamma must be positive, got {gamma}"))
            }
            _ => Ok(()),
        }
    }

    /// Weighted penalty at magnitude `t >= 0`.
    pub fn value(&self, mu: f64, t: f64) -> f64 {
        let t = t.abs();
        match *self {
            Penalty::L1 => mu * t,
            Penalty::Firm { gamma } => {
                if t <= gamma {
                    mu * (t - t * t / (2.0 * gamma))
                } else {
                    mu * gamma / 2.0
                }
            }
            Penalty::Lq { q } => mu * pow_q(t, q),
            Penalty::CappedLq { q, cap } => mu * pow_q(t.min(cap), q),
            Penalty::Mcp { gamma } => {
                if t <= gamma * mu {
                    mu * t - t * t / (2.0 * gamma)
                } else {
                    gamma * mu * mu / 2.0
                }
            }
            Penalty::Scad { a } => {
                if t <= mu {
                    mu * t
                } else if t <= a * mu {
                    (2.0 * a * mu * t - t * t - mu * mu) / (2.0 * (a - 1.0))
                } else {
                    mu * mu * (a + 1.0) / 2.0
                }
            }
            Penalty::Log { gamma } => mu * (t / gamma).ln_1p(),
        }
    }

    /// Prox objective `value(mu, |x|) + (x - v)^2 / 2`.
    pub fn objective(&self, mu: f64, x: f64, v: f64) -> f64 {
        self.value(mu, x) + 0.5 * (x - v) * (x - v)
    }

    /// Unweighted `phi(t)` used by diagnostics (`value` at `mu = 1`).
    pub fn phi(&self, t: f64) -> f64 {
        self.value(1.0, t)
    }

    pub fn prox(&self, mu: f64, v: f64) -> f64 {
        scalar_prox_unchecked(self, mu, v)
    }
}

fn pow_q(t: f64, q: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if q == 1.0 {
        t
    } else {
        t.powf(q)
    }
}

/// Global minimizer of `value(mu, |x|) + (x - v)^2 / 2`.
pub fn scalar_prox(p: &Penalty, mu: f64, v: f64) -> Result<f64> {
    p.validate()?;
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("prox weight must be >= 0, got {mu}")));
    }
    Ok(scalar_prox_unchecked(p, mu, v))
}

pub(crate) fn scalar_prox_unchecked(p: &Penalty, mu: f64, v: f64) -> f64 {
    if mu == 0.0 || v == 0.0 {
        return v;
    }
    let a = v.abs();
    let x = match *p {
        Penalty::L1 => (a - mu).max(0.0),
        _ => best_candidate(p, mu, a, &candidates(p, mu, a)),
    };
    x.copysign(v)
}

fn best_candidate(p: &Penalty, mu: f64, a: f64, cands: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = cands
        .iter()
        .copied()
        .filter(|x| x.is_finite())
        .map(|x| x.clamp(0.0, a))
        .collect();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut best = 0.0;
    let mut best_obj = p.objective(mu, 0.0, a);
    for &x in &sorted {
        let f = p.objective(mu, x, a);
        if f < best_obj {
            best = x;
            best_obj = f;
        }
    }
    best
}

fn candidates(p: &Penalty, mu: f64, a: f64) -> Vec<f64> {
    match *p {
        Penalty::L1 => vec![(a - mu).max(0.0)],
        Penalty::Firm { gamma } => {
            let mut c = vec![gamma, a];
            if gamma > mu {
                c.push(((a - mu) * gamma / (gamma - mu)).clamp(0.0, gamma));
            }
            c
        }
        Penalty::Mcp { gamma } => {
            vec![gamma * mu, a, ((a - mu) * gamma / (gamma - 1.0)).clamp(0.0, gamma * mu)]
        }
        Penalty::Scad { a: s } => vec![
            (a - mu).clamp(0.0, mu),
            mu,
            (((s - 1.0) * a - s * mu) / (s - 2.0)).clamp(mu, s * mu),
            s * mu,
            a.max(s * mu),
        ],
        Penalty::Lq { q } => lq_root(mu, q, a).into_iter().collect(),
        Penalty::CappedLq { q, cap } => {
            let mut c = vec![cap, a.max(cap)];
            if let Some(x) = lq_root(mu, q, a) {
                c.push(x.min(cap));
            }
            c
        }
        Penalty::Log { gamma } => {
            let disc = (a + gamma) * (a + gamma) - 4.0 * mu;
            if disc >= 0.0 {
                let r = disc.sqrt();
                vec![((a - gamma) + r) / 2.0, ((a - gamma) - r) / 2.0]
            } else {
                vec![]
            }
        }
    }
}

/// Threshold below which the Lq prox returns zero.
pub fn lq_threshold(mu: f64, q: f64) -> f64 {
    if q >= 1.0 {
        return mu;
    }
    let base = 2.0 * mu * (1.0 - q);
    base.powf(1.0 / (2.0 - q)) + mu * q * base.powf((q - 1.0) / (2.0 - q))
}

/// Larger positive root of `x + mu q x^(q-1) = a`, if any.
fn lq_root(mu: f64, q: f64, a: f64) -> Option<f64> {
    if q >= 1.0 {
        return Some((a - mu).max(0.0));
    }
    // Below xbar the objective is concave, so only the root above it matters.
    let xbar = (mu * q * (1.0 - q)).powf(1.0 / (2.0 - q));
    if a <= xbar {
        return None;
    }
    let f = |x: f64| x + mu * q * x.powf(q - 1.0) - a;
    let mut x = a;
    for _ in 0..50 {
        let fx = f(x);
        let dfx = 1.0 + mu * q * (q - 1.0) * x.powf(q - 2.0);
        if dfx <= 0.0 || x <= xbar {
            break;
        }
        let next = x - fx / dfx;
        if (next - x).abs() <= 1e-12 * x.max(1.0) {
            return (next > xbar).then_some(next);
        }
        x = next;
    }
    // Newton stalled: the objective is convex on [xbar, a], so refine by
    // golden-section search there.
    let g = |x: f64| mu * x.powf(q) + 0.5 * (x - a) * (x - a);
    let (mut lo, mut hi) = (xbar, a);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if g(m1) <= g(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    Some(0.5 * (lo + hi))
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Penalty::L1 => write!(f, "l1"),
            Penalty::Firm { gamma } => write!(f, "firm:{gamma}"),
            Penalty::Lq { q } => write!(f, "lq:{q}"),
            Penalty::CappedLq { q, cap } => write!(f, "cappedlq:{q}:{cap}"),
            Penalty::Mcp { gamma } => write!(f, "mcp:{gamma}"),
            Penalty::Scad { a } => write!(f, "scad:{a}"),
            Penalty::Log { gamma } => write!(f, "log:{gamma}"),
        }
    }
}

/// Parses `l1`, `firm:G`, `lq:Q`, `cappedlq:Q:C`, `mcp:G`, `scad:A`, `log:G`.
impl FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::InvalidPenalty(format!("missing parameter in '{s}'")))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidPenalty(format!("'{s}': {e}")))
        };
        let expect = |n: usize| -> Result<()> {
            if parts.len() != n {
                return Err(Error::InvalidPenalty(format!("'{s}' expects {} parameter(s)", n - 1)));
            }
            Ok(())
        };
        let p = match parts[0].to_ascii_lowercase().as_str() {
            "l1" => {
                expect(1)?;
                Penalty::L1
            }
            "firm" => {
                expect(2)?;
                Penalty::Firm { gamma: num(1)? }
            }
            "lq" => {
                expect(2)?;
                Penalty::Lq { q: num(1)? }
            }
            "cappedlq" => {
                expect(3)?;
                Penalty::CappedLq { q: num(1)?, cap: num(2)? }
            }
            "mcp" => {
                expect(2)?;
                Penalty::Mcp { gamma: num(1)? }
            }
            "scad" => {
                expect(2)?;
                Penalty::Scad { a: num(1)? }
            }
            "log" => {
                expect(2)?;
                Penalty::Log { gamma: num(1)? }
            }
            other => return Err(Error::InvalidPenalty(format!("unknown penalty '{other}'"))),
        };
        p.validate()?;
        Ok(p)
    }
}
