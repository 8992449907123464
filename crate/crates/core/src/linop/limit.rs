use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::numerics::{radial_plane, QuadOptions};

/// 2 alpha^2 r^{alpha-2} / (1 + r^alpha)^2.
pub fn limit_potential(alpha: f64, r: f64) -> f64 {
    if r == 0.0 {
        return if alpha == 2.0 { 8.0 } else { 0.0 };
    }
    let ra = r.powf(alpha);
    if ra.is_infinite() {
        return 0.0;
    }
    2.0 * alpha * alpha * ra / (r * r) / ((1.0 + ra) * (1.0 + ra))
}

/// Generators of the kernel of the limit operator.
#[derive(Debug, Clone, Copy)]
pub struct KernelFunctions {
    pub alpha: f64,
}

pub fn kernel_functions(alpha: u32) -> Result<KernelFunctions> {
    if alpha < 2 || !alpha.is_multiple_of(2) {
        return Err(invalid(format!(
            "kernel needs an even alpha >= 2, got {alpha}"
        )));
    }
    Ok(KernelFunctions {
        alpha: alpha as f64,
    })
}

impl KernelFunctions {
    /// (1 - r^alpha) / (1 + r^alpha)
    pub fn phi0(&self, r: f64) -> f64 {
        let t = self.alpha * r.ln();
        if t > 700.0 {
            return -1.0;
        }
        -(0.5 * t).tanh()
    }

    /// r^{alpha/2} / (1 + r^alpha)
    pub fn radial12(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        0.5 / (0.5 * self.alpha * r.ln()).cosh()
    }

    pub fn phi1(&self, r: f64, theta: f64) -> f64 {
        self.radial12(r) * (0.5 * self.alpha * theta).cos()
    }

    pub fn phi2(&self, r: f64, theta: f64) -> f64 {
        self.radial12(r) * (0.5 * self.alpha * theta).sin()
    }

    /// Angular mode of phi^idx.
    pub fn mode(&self, idx: usize) -> i64 {
        if idx == 0 {
            0
        } else {
            (self.alpha / 2.0) as i64
        }
    }

    /// Radial profile of phi^idx.
    pub fn radial(&self, idx: usize, r: f64) -> f64 {
        if idx == 0 {
            self.phi0(r)
        } else {
            self.radial12(r)
        }
    }
}

/// -Lap - V_alpha restricted to angular mode ell, discretized by central
/// differences on a uniform grid in t = log r.
#[derive(Debug, Clone)]
pub struct LimitOperator {
    pub alpha: f64,
    pub ell: i64,
    pub t: Vec<f64>,
    pub h: f64,
}

impl LimitOperator {
    pub fn new(alpha: f64, ell: i64, t_min: f64, t_max: f64, intervals: usize) -> Result<Self> {
        if intervals < 4 || !(t_max > t_min) {
            return Err(invalid(
                "limit operator grid needs t_max > t_min and at least 4 intervals",
            ));
        }
        let h = (t_max - t_min) / intervals as f64;
        let t = (0..=intervals).map(|k| t_min + h * k as f64).collect();
        Ok(Self { alpha, ell, t, h })
    }

    pub fn radii(&self) -> Vec<f64> {
        self.t.iter().map(|t| t.exp()).collect()
    }

    /// r^2 (L f) at interior nodes; endpoints are left at zero.
    pub fn apply_scaled(&self, f: &[f64]) -> Vec<f64> {
        let n = self.t.len();
        let l2 = (self.ell * self.ell) as f64;
        let mut out = vec![0.0; n];
        for k in 1..n - 1 {
            let r = self.t[k].exp();
            let ftt = (f[k + 1] - 2.0 * f[k] + f[k - 1]) / (self.h * self.h);
            out[k] = -(ftt - l2 * f[k]) - r * r * limit_potential(self.alpha, r) * f[k];
        }
        out
    }

    /// Largest |r^2 L f| at interior nodes for the sampled profile.
    pub fn residual_of(&self, profile: impl Fn(f64) -> f64) -> f64 {
        let f: Vec<f64> = self.radii().into_iter().map(profile).collect();
        self.apply_scaled(&f)
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// <L f, f> / <f, f> in L^2(dy) over the interior nodes.
    pub fn rayleigh_quotient(&self, profile: impl Fn(f64) -> f64) -> f64 {
        let f: Vec<f64> = self.radii().into_iter().map(profile).collect();
        let lf = self.apply_scaled(&f);
        // dy = r^2 dt dtheta, and apply_scaled already carries r^2
        let num: f64 = (1..f.len() - 1).map(|k| lf[k] * f[k]).sum();
        let den: f64 = (1..f.len() - 1)
            .map(|k| f[k] * f[k] * (2.0 * self.t[k]).exp())
            .sum();
        num / den
    }
}

/// Integrals of 2 alpha^2 |y|^{alpha-2} (1+|y|^alpha)^{-2} z against 1,
/// log(1 + |y|^alpha) and log|y|, z = (1 - |y|^alpha)/(1 + |y|^alpha).
pub fn quadrature_identities(alpha: u32) -> Result<[f64; 3]> {
    let k = kernel_functions(alpha)?;
    let a = k.alpha;
    let opts = QuadOptions::default();
    let w = |r: f64| limit_potential(a, r) * k.phi0(r);
    let i0 = radial_plane(w, &[1.0], &opts)?.value;
    let i1 = radial_plane(
        |r| {
            let t = a * r.ln();
            let l = if t > 36.0 { t } else { t.exp().ln_1p() };
            w(r) * l
        },
        &[1.0],
        &opts,
    )?
    .value;
    let i2 = radial_plane(
        |r| if r == 0.0 { 0.0 } else { w(r) * r.ln() },
        &[1.0],
        &opts,
    )?
    .value;
    Ok([i0, i1, i2])
}

/// Angular modes 0, k, 2k, ... up to `cap` (inclusive).
pub fn admissible_modes(k: u32, cap: i64) -> Vec<i64> {
    let k = k.max(1) as i64;
    (0..=cap / k).map(|m| m * k).collect()
}

/// Keep only the Fourier modes in kZ of samples taken at `m` equally spaced angles.
pub fn restrict_to_modes(samples: &[f64], k: u32) -> Vec<f64> {
    let m = samples.len();
    let k = k.max(1) as usize;
    let mut out = vec![0.0; m];
    for freq in 0..m {
        // signed frequency of bin `freq`
        let signed = if freq <= m / 2 { freq } else { m - freq };
        if signed % k != 0 {
            continue;
        }
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in samples.iter().enumerate() {
            let a = -2.0 * PI * (freq * j) as f64 / m as f64;
            re += v * a.cos();
            im += v * a.sin();
        }
        for (j, o) in out.iter_mut().enumerate() {
            let a = 2.0 * PI * (freq * j) as f64 / m as f64;
            *o += (re * a.cos() - im * a.sin()) / m as f64;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        let k = kernel_functions(4).unwrap();
        assert_eq!(k.phi0(0.0), 1.0);
        assert!(k.phi0(1.0).abs() < 1e-15);
        assert_eq!(k.phi0(1e200), -1.0);
        assert!((k.radial12(1.0) - 0.5).abs() < 1e-15);
        assert!(kernel_functions(3).is_err());
    }

    #[test]
    fn kernel_residual_is_second_order() {
        for alpha in [2u32, 4, 6] {
            let k = kernel_functions(alpha).unwrap();
            for idx in 0..3 {
                let errs: Vec<f64> = [200, 400, 800]
                    .iter()
                    .map(|&n| {
                        let op =
                            LimitOperator::new(alpha as f64, k.mode(idx), -6.0, 6.0, n).unwrap();
                        op.residual_of(|r| k.radial(idx, r))
                    })
                    .collect();
                let order = (errs[0] / errs[2]).log2() / 2.0;
                assert!(
                    order > 1.9 && order < 2.1,
                    "alpha {alpha} idx {idx}: {errs:?}"
                );
            }
        }
    }

    #[test]
    fn identities() {
        for alpha in [2u32, 4, 6, 8] {
            let [i0, i1, i2] = quadrature_identities(alpha).unwrap();
            let a = alpha as f64;
            assert!(i0.abs() < 1e-8, "{i0}");
            assert!((i1 / (-2.0 * PI * a) - 1.0).abs() < 1e-8, "{i1}");
            assert!((i2 / (-4.0 * PI) - 1.0).abs() < 1e-8, "{i2}");
        }
    }

    #[test]
    fn potential_mass() {
        for alpha in [2.0, 4.0, 10.0] {
            let m = radial_plane(
                |r| limit_potential(alpha, r),
                &[1.0],
                &QuadOptions::default(),
            )
            .unwrap();
            assert!((m.value / (4.0 * PI * alpha) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn mode_restriction_kills_phi12() {
        let m = 48;
        for (alpha, k) in [(4u32, 3u32), (6, 4), (2, 2)] {
            let kf = kernel_functions(alpha).unwrap();
            let ang: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
            for r in [0.3, 1.0, 2.5] {
                let s1: Vec<f64> = ang.iter().map(|&t| kf.phi1(r, t)).collect();
                let s2: Vec<f64> = ang.iter().map(|&t| kf.phi2(r, t)).collect();
                assert!(restrict_to_modes(&s1, k).iter().all(|v| v.abs() < 1e-13));
                assert!(restrict_to_modes(&s2, k).iter().all(|v| v.abs() < 1e-13));
                let s0 = vec![kf.phi0(r); m];
                let kept = restrict_to_modes(&s0, k);
                assert!(kept.iter().zip(&s0).all(|(a, b)| (a - b).abs() < 1e-13));
            }
        }
        // k = 1 keeps everything
        assert_eq!(admissible_modes(1, 3), vec![0, 1, 2, 3]);
        assert_eq!(admissible_modes(3, 9), vec![0, 3, 6, 9]);
    }

    #[test]
    fn phi0_rayleigh_quotient_vanishes() {
        let k = kernel_functions(2).unwrap();
        let q: Vec<f64> = [200, 800]
            .iter()
            .map(|&n| {
                LimitOperator::new(2.0, 0, -8.0, 8.0, n)
                    .unwrap()
                    .rayleigh_quotient(|r| k.phi0(r))
            })
            .collect();
        assert!(q[1].abs() < 1e-6, "{q:?}");
        assert!(q[1].abs() < q[0].abs());
    }
}
