//! Minimal dense-tensor kernel: 64-bit values, row-major storage,
//! reverse-mode gradients on an explicit tape, an adaptive-moment
//! optimizer, and the categorical / diagonal-Gaussian distributions the
//! policies sample from.

mod adam;
mod dist;
pub(crate) mod kernels;
mod tape;

pub use adam::{Adam, AdamConfig, ParamUpdate};
pub use dist::{ActionDistribution, LOG_STD_MAX, LOG_STD_MIN};
pub use tape::{Gradients, Tape, Var};

use crate::error::{Error, Result};

/// Dense row-major tensor of finite 64-bit reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Build a tensor, validating the element count and finiteness.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expect: usize = shape.iter().product();
        if data.len() != expect {
            return Err(Error::Shape(format!(
                "shape {:?} wants {} values, got {}",
                shape,
                expect,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "tensor with shape {shape:?} contains {bad}"
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn scalar(v: f64) -> Result<Self> {
        Tensor::new(vec![], vec![v])
    }

    pub fn vector(data: Vec<f64>) -> Result<Self> {
        let n = data.len();
        Tensor::new(vec![n], data)
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Tensor::new(vec![rows, cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// True when the tensor holds exactly one value (shape `[]` or `[1]`...).
    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1
    }

    pub fn item(&self) -> Result<f64> {
        if !self.is_scalar() {
            return Err(Error::Shape(format!(
                "item() on non-scalar shape {:?}",
                self.shape
            )));
        }
        Ok(self.data[0])
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Rows of a rank-2 tensor.
    pub fn rows(&self) -> usize {
        self.shape.first().copied().unwrap_or(1)
    }

    pub fn same_shape(&self, other: &Tensor) -> bool {
        self.shape == other.shape
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_count() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Tensor::new(vec![2], vec![1.0, f64::NAN]).is_err());
        assert!(Tensor::new(vec![2], vec![f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn scalar_is_scalar() {
        let t = Tensor::scalar(3.5).unwrap();
        assert!(t.is_scalar());
        assert_eq!(t.item().unwrap(), 3.5);
    }
}
