//! Adaptive Gauss-Kronrod quadrature on graded panels.

use super::gauss::{WG7, WGK15, XGK15};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub enum Domain {
    /// Finite interval with optional interior scales at which panels are graded.
    Interval { a: f64, b: f64, scales: Vec<f64> },
    /// `[a, inf)`; scales as above, tail mapped by x = X/u.
    HalfLine { a: f64, scales: Vec<f64> },
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
            max_depth: 40,
        }
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK15[7] * fc;
    let mut g = WG7[3] * fc;
    for i in 0..7 {
        let dx = h * XGK15[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK15[i] * s;
        if i % 2 == 1 {
            g += WG7[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Breakpoints `scale * 2^k` for k in [-40, 40] that fall inside (a, b).
fn graded_breaks(a: f64, b: f64, scales: &[f64]) -> Vec<f64> {
    let mut pts = vec![a, b];
    for &s in scales.iter().filter(|s| **s > 0.0 && s.is_finite()) {
        for k in -40..=40 {
            let x = s * 2f64.powi(k);
            if x > a && x < b {
                pts.push(x);
            }
        }
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * x.abs().max(1e-300));
    pts
}

#[derive(PartialEq)]
struct Panel {
    err: f64,
    a: f64,
    b: f64,
    val: f64,
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive: always bisect the panel with the largest error.
fn integrate_panels<F: Fn(f64) -> f64>(f: &F, pts: &[f64], opts: &QuadOptions) -> QuadResult {
    let mut heap = std::collections::BinaryHeap::new();
    let (mut val, mut err) = (0.0, 0.0);
    for w in pts.windows(2) {
        let (v, e) = gk15(f, w[0], w[1]);
        val += v;
        err += e;
        heap.push(Panel {
            err: e,
            a: w[0],
            b: w[1],
            val: v,
        });
    }
    let max_panels = pts.len() + (1usize << opts.max_depth.min(14));
    while heap.len() < max_panels {
        let tol = (opts.rel_tol * val.abs()).max(opts.abs_tol);
        if err <= tol {
            break;
        }
        let worst = heap.pop().expect("non-empty");
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            heap.push(Panel { err: 0.0, ..worst });
            err -= worst.err;
            continue;
        }
        let (lv, le) = gk15(f, worst.a, m);
        let (rv, re) = gk15(f, m, worst.b);
        val += lv + rv - worst.val;
        err += le + re - worst.err;
        heap.push(Panel {
            err: le,
            a: worst.a,
            b: m,
            val: lv,
        });
        heap.push(Panel {
            err: re,
            a: m,
            b: worst.b,
            val: rv,
        });
    }
    // resum to limit accumulated cancellation in the running totals
    let mut out = QuadResult {
        value: 0.0,
        error: 0.0,
    };
    for p in heap {
        out.value += p.val;
        out.error += p.err;
    }
    out
}

/// Integrate `f` over `domain`. Fails when the error estimate exceeds the
/// requested tolerance by more than a factor of 100.
pub fn quad<F: Fn(f64) -> f64>(f: F, domain: &Domain, opts: &QuadOptions) -> Result<QuadResult> {
    let res = match domain {
        Domain::Interval { a, b, scales } => {
            if !(b > a) {
                return Err(Error::InvalidInput(format!("empty interval [{a}, {b}]")));
            }
            integrate_panels(&f, &graded_breaks(*a, *b, scales), opts)
        }
        Domain::HalfLine { a, scales } => {
            let top = scales
                .iter()
                .cloned()
                .fold(1.0f64, f64::max)
                .max(a.abs() + 1.0)
                * 64.0;
            let head = integrate_panels(&f, &graded_breaks(*a, top, scales), opts);
            // x = top / u, dx = top / u^2 du on (0, 1]
            let g = |u: f64| {
                if u <= 0.0 {
                    0.0
                } else {
                    f(top / u) * top / (u * u)
                }
            };
            let tail_pts: Vec<f64> = (0..=30).rev().map(|k| 2f64.powi(-k)).collect();
            let mut pts = vec![0.0];
            pts.extend(tail_pts);
            let tail = integrate_panels(&g, &pts, opts);
            QuadResult {
                value: head.value + tail.value,
                error: head.error + tail.error,
            }
        }
    };
    let tol = (opts.rel_tol * res.value.abs()).max(opts.abs_tol);
    if !res.value.is_finite() || res.error > 100.0 * tol {
        return Err(Error::Quadrature {
            estimate: res.error,
            tolerance: tol,
        });
    }
    Ok(res)
}

/// Integral over the plane of a radial function: 2 pi * int_0^inf f(r) r dr.
pub fn radial_plane<F: Fn(f64) -> f64>(
    f: F,
    scales: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = quad(
        |r| two_pi * r * f(r),
        &Domain::HalfLine {
            a: 0.0,
            scales: scales.to_vec(),
        },
        opts,
    )?;
    Ok(r)
}

/// Same as [`radial_plane`] restricted to the disk of radius `rmax`.
pub fn radial_disk<F: Fn(f64) -> f64>(
    f: F,
    rmax: f64,
    scales: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let two_pi = 2.0 * std::f64::consts::PI;
    quad(
        |r| two_pi * r * f(r),
        &Domain::Interval {
            a: 0.0,
            b: rmax,
            scales: scales.to_vec(),
        },
        opts,
    )
}
