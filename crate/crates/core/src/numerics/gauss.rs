//! Gauss-type rules on the reference interval [-1, 1].

/// Legendre polynomial P_n and its derivative at `x`.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // derivative from the standard recurrence; valid away from x = +-1
    let dp = if (1.0 - x * x).abs() > 1e-14 {
        n as f64 * (p0 - x * p1) / (1.0 - x * x)
    } else {
        let s = if x > 0.0 {
            1.0
        } else if n.is_multiple_of(2) {
            -1.0
        } else {
            1.0
        };
        s * (n * (n + 1)) as f64 / 2.0
    };
    (p1, dp)
}

/// Gauss-Legendre nodes and weights with `n` points, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut xi = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, xi);
            let dx = p / dp;
            xi -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, xi);
        x[i] = xi;
        w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
    (x, w)
}

/// Gauss-Lobatto-Legendre rule for polynomial degree `p` (p + 1 points).
#[derive(Debug, Clone)]
pub struct Lobatto {
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `diff[i][j]` = derivative of the j-th Lagrange basis at node i.
    pub diff: Vec<Vec<f64>>,
}

impl Lobatto {
    pub fn new(p: usize) -> Self {
        assert!(p >= 1);
        let n = p + 1;
        let mut nodes = vec![0.0; n];
        nodes[0] = -1.0;
        nodes[p] = 1.0;
        // interior nodes are the roots of P_p'
        for i in 1..p {
            let mut x = -(std::f64::consts::PI * i as f64 / p as f64).cos();
            for _ in 0..100 {
                let (pp, dp) = legendre(p, x);
                // P_p'' from the Legendre ODE: (1-x^2) P'' = 2x P' - p(p+1) P
                let d2 = (2.0 * x * dp - (p * (p + 1)) as f64 * pp) / (1.0 - x * x);
                let dx = dp / d2;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
        }
        let pp1 = (p * (p + 1)) as f64;
        let pvals: Vec<f64> = nodes.iter().map(|&x| legendre(p, x).0).collect();
        let weights = pvals.iter().map(|&pv| 2.0 / (pp1 * pv * pv)).collect();
        let mut diff = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                diff[i][j] = if i != j {
                    pvals[i] / (pvals[j] * (nodes[i] - nodes[j]))
                } else if i == 0 {
                    -pp1 / 4.0
                } else if i == p {
                    pp1 / 4.0
                } else {
                    0.0
                };
            }
        }
        Self {
            degree: p,
            nodes,
            weights,
            diff,
        }
    }

    /// Lagrange basis values at reference point `x`.
    pub fn basis_at(&self, x: f64) -> Vec<f64> {
        let n = self.nodes.len();
        let mut out = vec![1.0; n];
        for (j, o) in out.iter_mut().enumerate() {
            for m in 0..n {
                if m != j {
                    *o *= (x - self.nodes[m]) / (self.nodes[j] - self.nodes[m]);
                }
            }
        }
        out
    }
}

/// Kronrod 15-point abscissae (non-negative half, descending) with the
/// embedded 7-point Gauss rule on the odd entries.
pub(crate) const XGK15: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

pub(crate) const WGK15: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

pub(crate) const WG7: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_design_degree() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn lobatto_integrates_design_degree_and_differentiates() {
        for p in 1..14 {
            let rule = Lobatto::new(p);
            for deg in 0..(2 * p) {
                let q: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!((q - exact).abs() < 1e-13, "p={p} deg={deg}");
            }
            // D applied to x^p is exact
            for i in 0..=p {
                let d: f64 = (0..=p)
                    .map(|j| rule.diff[i][j] * rule.nodes[j].powi(p as i32))
                    .sum();
                let exact = p as f64 * rule.nodes[i].powi(p as i32 - 1);
                assert!((d - exact).abs() < 1e-10, "p={p} i={i} {d} {exact}");
            }
        }
    }

    #[test]
    fn kronrod_and_gauss_rules_integrate_polynomials() {
        let k15 = |deg: i32| -> f64 {
            let mut s = WGK15[7] * 0f64.powi(deg);
            for i in 0..7 {
                s += WGK15[i] * (XGK15[i].powi(deg) + (-XGK15[i]).powi(deg));
            }
            s
        };
        let g7 = |deg: i32| -> f64 {
            let mut s = WG7[3] * 0f64.powi(deg);
            for i in 0..3 {
                let x = XGK15[2 * i + 1];
                s += WG7[i] * (x.powi(deg) + (-x).powi(deg));
            }
            s
        };
        for deg in 0..=22 {
            let exact = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            assert!((k15(deg) - exact).abs() < 1e-13, "k15 deg={deg}");
            if deg <= 13 {
                assert!((g7(deg) - exact).abs() < 1e-13, "g7 deg={deg}");
            }
        }
    }
}
