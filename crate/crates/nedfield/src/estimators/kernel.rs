//! Kernel functions with compact support `[-1, 1]`.

use serde::{Deserialize, Serialize};

use super::EstimatorError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KernelFamily {
    Epanechnikov,
    Triangular,
    Quartic,
    /// Piecewise-linear table on nodes in `[-1, 1]`; must be nonnegative and
    /// integrate to 1.
    UserTabulated { xs: Vec<f64>, ys: Vec<f64> },
}

/// Validated kernel: nonnegative on `[-1, 1]`, zero outside, unit mass in 1D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Multivariate evaluation: product of 1D factors when true, else the 1D
    /// kernel of the Euclidean norm (mass-normalized only in 1D).
    pub product_form: bool,
}

impl KernelSpec {
    pub fn new(family: KernelFamily) -> Result<Self, EstimatorError> {
        let spec = KernelSpec {
            family,
            product_form: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn epanechnikov() -> Self {
        KernelSpec::new(KernelFamily::Epanechnikov).unwrap()
    }

    pub fn triangular() -> Self {
        KernelSpec::new(KernelFamily::Triangular).unwrap()
    }

    pub fn quartic() -> Self {
        KernelSpec::new(KernelFamily::Quartic).unwrap()
    }

    fn validate(&self) -> Result<(), EstimatorError> {
        if let KernelFamily::UserTabulated { xs, ys } = &self.family {
            if xs.len() != ys.len() || xs.len() < 2 {
                return Err(EstimatorError::BadKernel(
                    "tabulated kernel needs matching xs/ys with at least 2 nodes".into(),
                ));
            }
            if xs.windows(2).any(|w| w[1] <= w[0]) {
                return Err(EstimatorError::BadKernel(
                    "tabulated kernel nodes must be strictly increasing".into(),
                ));
            }
            if xs[0] < -1.0 || *xs.last().unwrap() > 1.0 {
                return Err(EstimatorError::BadKernel(
                    "tabulated kernel support must lie inside [-1, 1]".into(),
                ));
            }
            if ys.iter().any(|&y| y < 0.0 || !y.is_finite()) {
                return Err(EstimatorError::BadKernel(
                    "tabulated kernel must be nonnegative and finite".into(),
                ));
            }
        }
        // Unit mass in 1D, by Simpson quadrature on [-1, 1].
        let m = 4000usize;
        let hstep = 2.0 / m as f64;
        let mut acc = self.eval1(-1.0) + self.eval1(1.0);
        for k in 1..m {
            let u = -1.0 + k as f64 * hstep;
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * self.eval1(u);
        }
        let mass = acc * hstep / 3.0;
        if (mass - 1.0).abs() > 1e-10 {
            return Err(EstimatorError::BadKernel(format!(
                "kernel mass {mass} differs from 1 beyond 1e-10"
            )));
        }
        Ok(())
    }

    pub fn eval1(&self, u: f64) -> f64 {
        if u.abs() > 1.0 {
            return 0.0;
        }
        match &self.family {
            KernelFamily::Epanechnikov => 0.75 * (1.0 - u * u),
            KernelFamily::Triangular => 1.0 - u.abs(),
            KernelFamily::Quartic => {
                let w = 1.0 - u * u;
                15.0 / 16.0 * w * w
            }
            KernelFamily::UserTabulated { xs, ys } => {
                if u < xs[0] || u > *xs.last().unwrap() {
                    return 0.0;
                }
                let i = xs.partition_point(|&x| x <= u).min(xs.len() - 1).max(1);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let (y0, y1) = (ys[i - 1], ys[i]);
                y0 + (y1 - y0) * (u - x0) / (x1 - x0)
            }
        }
    }

    /// Multivariate factor: product of 1D evaluations or the radial form.
    pub fn eval_multi(&self, u: &[f64]) -> f64 {
        if self.product_form {
            u.iter().map(|&v| self.eval1(v)).product()
        } else {
            self.eval1(u.iter().map(|v| v * v).sum::<f64>().sqrt())
        }
    }

    /// Lipschitz modulus on the support.
    pub fn lipschitz(&self) -> f64 {
        match &self.family {
            KernelFamily::Epanechnikov => 1.5,
            KernelFamily::Triangular => 1.0,
            // |K'| = (15/4) |u| (1 - u^2) peaks at u = 1/sqrt(3).
            KernelFamily::Quartic => 15.0 / 4.0 / 3f64.sqrt() * (2.0 / 3.0),
            KernelFamily::UserTabulated { xs, ys } => xs
                .windows(2)
                .zip(ys.windows(2))
                .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
                .fold(0.0, f64::max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_kernels_validate() {
        for spec in [
            KernelSpec::epanechnikov(),
            KernelSpec::triangular(),
            KernelSpec::quartic(),
        ] {
            assert_eq!(spec.eval1(1.5), 0.0);
            assert!(spec.eval1(0.0) > 0.0);
        }
    }

    #[test]
    fn epanechnikov_values() {
        let k = KernelSpec::epanechnikov();
        assert!((k.eval1(0.5) - 0.5625).abs() < 1e-15);
        assert_eq!(k.eval1(1.0), 0.0);
    }

    #[test]
    fn product_form_multiplies() {
        let k = KernelSpec::epanechnikov();
        let v = k.eval_multi(&[0.5, 0.0]);
        assert!((v - 0.5625 * 0.75).abs() < 1e-15);
    }

    #[test]
    fn tabulated_kernel_checked_for_mass() {
        // Triangular kernel tabulated on 3 nodes integrates to 1 exactly.
        let ok = KernelSpec::new(KernelFamily::UserTabulated {
            xs: vec![-1.0, 0.0, 1.0],
            ys: vec![0.0, 1.0, 0.0],
        });
        assert!(ok.is_ok());
        let bad = KernelSpec::new(KernelFamily::UserTabulated {
            xs: vec![-1.0, 0.0, 1.0],
            ys: vec![0.0, 2.0, 0.0],
        });
        assert!(bad.is_err());
    }
}
