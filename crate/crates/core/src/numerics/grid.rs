//! Graded spectral-element grids on a meridian interval [0, L].

use serde::{Deserialize, Serialize};

use super::gauss::Lobatto;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Polynomial degree per element.
    pub degree: usize,
    /// Geometric growth factor of element sizes away from a clustered end.
    pub ratio: f64,
    /// First element length as a fraction of the smallest declared scale.
    pub inner_fraction: f64,
    /// Upper bound on element length as a fraction of the interval length.
    pub max_element: f64,
    /// Number of nonzero angular modes (multiples of k) carried by the grid.
    pub angular_modes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            degree: 10,
            ratio: 2.0,
            inner_fraction: 1.0 / 32.0,
            max_element: 0.125,
            angular_modes: 3,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 || self.degree > 40 {
            return Err(invalid(format!(
                "grid degree {} outside [1, 40]",
                self.degree
            )));
        }
        if !(self.ratio > 1.0 && self.ratio <= 4.0) {
            return Err(invalid(format!("grid ratio {} outside (1, 4]", self.ratio)));
        }
        if !(self.inner_fraction > 0.0 && self.inner_fraction <= 1.0) {
            return Err(invalid("grid inner_fraction must lie in (0, 1]"));
        }
        if !(self.max_element > 0.0 && self.max_element <= 1.0) {
            return Err(invalid("grid max_element must lie in (0, 1]"));
        }
        Ok(())
    }

    /// The same spec with element sizes scaled down by `factor` (h-refinement).
    pub fn refined(&self, factor: f64) -> Self {
        Self {
            ratio: self.ratio.powf(1.0 / factor),
            inner_fraction: self.inner_fraction / factor,
            max_element: self.max_element / factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum End {
    Start,
    End,
}

/// Concentration scales measured from one end of the interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub end: End,
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub length: f64,
    pub breaks: Vec<f64>,
    pub rule: Lobatto,
    pub nodes: Vec<f64>,
    /// Arclength quadrature weights (all positive).
    pub weights: Vec<f64>,
    /// Angular modes 0, k, 2k, ... carried by the grid.
    pub modes: Vec<i64>,
    pub clusters: Vec<Cluster>,
}

fn geometric_from(h0: f64, ratio: f64, hmax: f64, limit: f64) -> Vec<f64> {
    let mut pts = vec![];
    let mut x = 0.0;
    let mut h = h0;
    while x + h < limit {
        x += h;
        pts.push(x);
        h = (h * ratio).min(hmax);
    }
    pts
}

impl RadialGrid {
    pub fn from_breaks(
        mut breaks: Vec<f64>,
        degree: usize,
        k: u32,
        angular_modes: usize,
    ) -> Result<Self> {
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("grid breakpoints must be strictly increasing"));
        }
        let rule = Lobatto::new(degree);
        let ne = breaks.len() - 1;
        let n = ne * degree + 1;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for e in 0..ne {
            let (a, b) = (breaks[e], breaks[e + 1]);
            let jac = 0.5 * (b - a);
            for q in 0..=degree {
                let g = e * degree + q;
                nodes[g] = a + (rule.nodes[q] + 1.0) * jac;
                weights[g] += rule.weights[q] * jac;
            }
            nodes[e * degree] = a;
        }
        nodes[n - 1] = breaks[ne];
        let modes = (0..=angular_modes as i64)
            .map(|m| m * k.max(1) as i64)
            .collect();
        Ok(Self {
            length: breaks[ne] - breaks[0],
            breaks,
            rule,
            nodes,
            weights,
            modes,
            clusters: vec![],
        })
    }

    pub fn uniform(length: f64, elements: usize, degree: usize) -> Result<Self> {
        if elements == 0 || !(length > 0.0) {
            return Err(invalid("uniform grid needs positive length and elements"));
        }
        let breaks = (0..=elements)
            .map(|e| length * e as f64 / elements as f64)
            .collect();
        Self::from_breaks(breaks, degree, 1, 0)
    }

    /// Grid on [0, length] geometrically graded towards each clustered end,
    /// with `fixed` breakpoints inserted exactly.
    pub fn graded(
        length: f64,
        clusters: &[Cluster],
        fixed: &[f64],
        spec: &GridSpec,
        k: u32,
    ) -> Result<Self> {
        spec.validate()?;
        if !(length > 0.0) {
            return Err(invalid("grid length must be positive"));
        }
        let hmax = spec.max_element * length;
        // keep at least ~9 nodes per decade whatever the degree
        let ratio = spec.ratio.min(10f64.powf(spec.degree as f64 / 9.0));
        let both = clusters.iter().any(|c| c.end == End::Start)
            && clusters.iter().any(|c| c.end == End::End);
        let limit = if both { 0.5 * length } else { length };
        let mut pts: Vec<(f64, bool)> = vec![(0.0, true), (length, true)];
        for c in clusters {
            let smin = c
                .scales
                .iter()
                .cloned()
                .filter(|s| *s > 0.0)
                .fold(f64::INFINITY, f64::min);
            if !smin.is_finite() {
                return Err(invalid("cluster without positive scales"));
            }
            let h0 = (smin * spec.inner_fraction).min(hmax);
            for x in geometric_from(h0, ratio, hmax, limit) {
                let x = if c.end == End::Start { x } else { length - x };
                pts.push((x, false));
            }
        }
        if clusters.is_empty() {
            let n = (1.0 / spec.max_element).ceil() as usize;
            for e in 1..n {
                pts.push((length * e as f64 / n as f64, false));
            }
        }
        for &f in fixed {
            if f > 0.0 && f < length {
                pts.push((f, true));
            }
        }
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pts.dedup_by(|a, b| {
            if (a.0 - b.0).abs() <= 1e-14 * length {
                b.1 |= a.1;
                true
            } else {
                false
            }
        });
        // drop free points that create slivers next to fixed ones
        loop {
            let mut removed = false;
            for i in 1..pts.len() - 1 {
                let hl = pts[i].0 - pts[i - 1].0;
                let hr = pts[i + 1].0 - pts[i].0;
                let sliver_left = hl < 0.3 * hr && pts[i - 1].1 && !pts[i].1;
                let sliver_right = hr < 0.3 * hl && pts[i + 1].1 && !pts[i].1;
                if sliver_left || sliver_right {
                    pts.remove(i);
                    removed = true;
                    break;
                }
            }
            if !removed {
                break;
            }
        }
        // split oversized elements
        let mut breaks = vec![pts[0].0];
        for w in pts.windows(2) {
            let h = w[1].0 - w[0].0;
            let parts = (h / hmax).ceil().max(1.0) as usize;
            for s in 1..=parts {
                breaks.push(w[0].0 + h * s as f64 / parts as f64);
            }
        }
        let mut g = Self::from_breaks(breaks, spec.degree, k, spec.angular_modes)?;
        g.clusters = clusters.to_vec();
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn elements(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.rule.degree
    }

    /// Global node index of local node `q` in element `e`.
    pub fn index(&self, e: usize, q: usize) -> usize {
        e * self.rule.degree + q
    }

    pub fn element_of(&self, x: f64) -> usize {
        let ne = self.elements();
        match self.breaks.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(ne - 1),
            Err(i) => i.saturating_sub(1).min(ne - 1),
        }
    }

    /// Evaluate the piecewise polynomial interpolant of nodal `values` at `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let e = self.element_of(x);
        let (a, b) = (self.breaks[e], self.breaks[e + 1]);
        let xi = (2.0 * (x - a) / (b - a) - 1.0).clamp(-1.0, 1.0);
        let basis = self.rule.basis_at(xi);
        basis
            .iter()
            .enumerate()
            .map(|(q, l)| l * values[self.index(e, q)])
            .sum()
    }

    /// Derivative of the interpolant at every node (element averages at shared nodes).
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        let p = self.degree();
        let mut out = vec![0.0; self.len()];
        let mut count = vec![0.0; self.len()];
        for e in 0..self.elements() {
            let jac = 0.5 * (self.breaks[e + 1] - self.breaks[e]);
            for q in 0..=p {
                let d: f64 = (0..=p)
                    .map(|m| self.rule.diff[q][m] * values[self.index(e, m)])
                    .sum();
                out[self.index(e, q)] += d / jac;
                count[self.index(e, q)] += 1.0;
            }
        }
        out.iter().zip(count).map(|(v, c)| v / c).collect()
    }

    /// Nodes within a factor sqrt(10) of `scale`, measured from the given end.
    pub fn nodes_per_decade(&self, scale: f64, end: End) -> usize {
        let lo = scale / 10f64.sqrt();
        let hi = scale * 10f64.sqrt();
        self.nodes
            .iter()
            .map(|&s| {
                if end == End::Start {
                    s
                } else {
                    self.length - s
                }
            })
            .filter(|&d| d >= lo && d <= hi)
            .count()
    }

    /// Check the resolution requirement on every declared scale.
    pub fn check_resolution(&self, required: usize) -> Result<()> {
        for c in &self.clusters {
            for &s in &c.scales {
                let n = self.nodes_per_decade(s, c.end);
                if n < required {
                    return Err(Error::Unresolved {
                        scale: s,
                        nodes: n,
                        required,
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weights_sum_to_length() {
        let g = RadialGrid::uniform(2.5, 7, 6).unwrap();
        let s: f64 = g.weights.iter().sum();
        assert!((s - 2.5).abs() < 1e-13);
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let g = RadialGrid::uniform(1.0, 3, 5).unwrap();
        let vals: Vec<f64> = g.nodes.iter().map(|x| x.powi(5) - 2.0 * x).collect();
        for x in [0.0, 0.123, 0.5, 0.77, 1.0] {
            let v = g.interpolate(&vals, x);
            assert!((v - (x.powi(5) - 2.0 * x)).abs() < 1e-12);
        }
        let d = g.derivative(&vals);
        for (x, dv) in g.nodes.iter().zip(d) {
            assert!((dv - (5.0 * x.powi(4) - 2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn graded_grid_resolves_scales_and_keeps_fixed_breaks() {
        let spec = GridSpec::default();
        let c = [
            Cluster {
                end: End::Start,
                scales: vec![1e-8, 1e-3],
            },
            Cluster {
                end: End::End,
                scales: vec![1e-4],
            },
        ];
        let g = RadialGrid::graded(1.0, &c, &[0.11, 0.22], &spec, 3).unwrap();
        g.check_resolution(8).unwrap();
        assert!(g.breaks.iter().any(|b| (b - 0.11).abs() < 1e-15));
        assert!(g.breaks.iter().any(|b| (b - 0.22).abs() < 1e-15));
        assert_eq!(g.modes, vec![0, 3, 6, 9]);
    }

    proptest! {
        #[test]
        fn nodes_increase_and_weights_positive(
            smin in 1e-9f64..1e-2,
            ratio in 1.3f64..3.0,
            degree in 2usize..12,
            both in any::<bool>(),
        ) {
            let spec = GridSpec { degree, ratio, ..GridSpec::default() };
            let mut c = vec![Cluster { end: End::Start, scales: vec![smin] }];
            if both {
                c.push(Cluster { end: End::End, scales: vec![smin] });
            }
            let g = RadialGrid::graded(1.0, &c, &[0.1, 0.2], &spec, 2).unwrap();
            prop_assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
            prop_assert!(g.weights.iter().all(|w| *w > 0.0));
            prop_assert!(g.check_resolution(8).is_ok());
        }
    }
}
