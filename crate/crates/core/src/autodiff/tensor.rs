use crate::error::{Error, Result};

use super::Scalar;

/// Dense N-D array, row-major with the last axis fastest. 5-D tensors use
/// the `(batch, channel, depth, height, width)` layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
    requires_grad: bool,
    grad: Option<Vec<T>>,
}

pub const MAX_RANK: usize = 5;

pub(crate) fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

impl<T: Scalar> Tensor<T> {
    pub fn new(shape: &[usize], data: Vec<T>) -> Result<Self> {
        if shape.len() > MAX_RANK {
            return Err(Error::shape(format!("rank {} exceeds {MAX_RANK}", shape.len())));
        }
        if shape.contains(&0) {
            return Err(Error::shape(format!("zero-sized axis in {shape:?}")));
        }
        if numel(shape) != data.len() {
            return Err(Error::shape(format!(
                "shape {shape:?} needs {} values, got {}",
                numel(shape),
                data.len()
            )));
        }
        Ok(Tensor { shape: shape.to_vec(), data, requires_grad: false, grad: None })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        Self::new(shape, vec![T::zero(); numel(shape)])
    }

    pub fn full(shape: &[usize], value: T) -> Result<Self> {
        Self::new(shape, vec![value; numel(shape)])
    }

    pub fn scalar(value: T) -> Self {
        Tensor { shape: Vec::new(), data: vec![value], requires_grad: false, grad: None }
    }

    pub fn from_f64(shape: &[usize], data: &[f64]) -> Result<Self> {
        Self::new(shape, data.iter().map(|&v| T::from_f64(v)).collect())
    }

    /// Marks the tensor as a trainable leaf.
    pub fn with_grad(mut self) -> Self {
        self.requires_grad = true;
        self
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn requires_grad(&self) -> bool {
        self.requires_grad
    }

    pub fn set_requires_grad(&mut self, flag: bool) {
        self.requires_grad = flag;
    }

    pub fn grad(&self) -> Option<&[T]> {
        self.grad.as_deref()
    }

    /// Adds `g` into the gradient slot, creating it if absent.
    pub fn accumulate_grad(&mut self, g: &[T]) {
        assert_eq!(g.len(), self.data.len(), "gradient length mismatch");
        match &mut self.grad {
            Some(acc) => acc.iter_mut().zip(g).for_each(|(a, &b)| *a = *a + b),
            None => self.grad = Some(g.to_vec()),
        }
    }

    pub fn zero_grad(&mut self) {
        self.grad = None;
    }

    pub fn reshape(mut self, shape: &[usize]) -> Result<Self> {
        if numel(shape) != self.data.len() {
            return Err(Error::shape(format!(
                "cannot reshape {:?} to {shape:?}",
                self.shape
            )));
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    /// Element-type conversion; the gradient slot is dropped.
    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| U::from_f64(v.as_f64())).collect(),
            requires_grad: self.requires_grad,
            grad: None,
        }
    }

    /// `[N, C, D, H, W]` dims of a 5-D tensor.
    pub fn dims5(&self) -> Result<[usize; 5]> {
        dims5(&self.shape)
    }
}

pub(crate) fn dims5(shape: &[usize]) -> Result<[usize; 5]> {
    shape
        .try_into()
        .map_err(|_| Error::shape(format!("expected a 5-D tensor, got {shape:?}")))
}

/// Inverse of [`pixel_shuffle3d`](super::Graph::pixel_shuffle3d): folds each
/// `r×r×r` spatial block back into `r³` channels.
pub fn pixel_unshuffle3d<T: Scalar>(x: &Tensor<T>, r: usize) -> Result<Tensor<T>> {
    let [n, c, d, h, w] = x.dims5()?;
    if r == 0 || d % r != 0 || h % r != 0 || w % r != 0 {
        return Err(Error::shape(format!("spatial dims not divisible by {r}")));
    }
    let (od, oh, ow) = (d / r, h / r, w / r);
    let oc = c * r * r * r;
    let mut out = vec![T::zero(); x.numel()];
    let src = x.data();
    for ni in 0..n {
        for ci in 0..c {
            for z in 0..d {
                for y in 0..h {
                    for xx in 0..w {
                        let (i, j, k) = (z % r, y % r, xx % r);
                        let ch = ci * r * r * r + i * r * r + j * r + k;
                        let dst = (((ni * oc + ch) * od + z / r) * oh + y / r) * ow + xx / r;
                        out[dst] = src[(((ni * c + ci) * d + z) * h + y) * w + xx];
                    }
                }
            }
        }
    }
    Tensor::new(&[n, oc, od, oh, ow], out)
}
