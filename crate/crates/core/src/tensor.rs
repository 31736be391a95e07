//! Dense real tensors stored with the mode-1 index varying fastest.
//!
//! For an order-3 tensor of extents `(n1, n2, n3)` the entry `(i, j, k)` sits
//! at `i + n1 * (j + n2 * k)`, so each frontal slice is a contiguous
//! column-major `n1 x n2` block.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl fmt::Debug for DenseTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseTensor")
            .field("dims", &self.dims)
            .field("norm", &self.frobenius_norm())
            .finish()
    }
}

pub(crate) fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.len() < 2 {
        return Err(Error::dim(format!("tensor order must be at least 2, got {}", dims.len())));
    }
    if let Some(pos) = dims.iter().position(|&d| d == 0) {
        return Err(Error::dim(format!("extent of mode {} is zero", pos + 1)));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::dim("element count overflows usize"))
}

impl DenseTensor {
    /// Builds a tensor from mode-1-fastest data, rejecting non-finite entries.
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if data.len() != len {
            return Err(Error::dim(format!(
                "data length {} does not match extents {:?} ({} elements)",
                data.len(),
                dims,
                len
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::arg(format!("non-finite element at linear index {pos}")));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(Self { dims: dims.to_vec(), data: vec![0.0; len] })
    }

    /// Fills a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = check_dims(dims)?;
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for (d, slot) in idx.iter_mut().enumerate() {
                *slot += 1;
                if *slot < dims[d] {
                    break;
                }
                *slot = 0;
            }
        }
        Self::new(dims.to_vec(), data)
    }

    /// Caller guarantees `data.len()` matches `dims`.
    pub(crate) fn from_parts(dims: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        Self { dims, data }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.dims.len(), "index order does not match tensor order");
        let mut lin = 0;
        let mut stride = 1;
        for (&i, &n) in idx.iter().zip(&self.dims) {
            assert!(i < n, "index {idx:?} out of bounds for extents {:?}", self.dims);
            lin += i * stride;
            stride *= n;
        }
        lin
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.linear_index(idx)]
    }

    /// Panics on a non-finite value, keeping the constructor invariant.
    pub fn set(&mut self, idx: &[usize], value: f64) {
        assert!(value.is_finite(), "non-finite value {value}");
        let lin = self.linear_index(idx);
        self.data[lin] = value;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Number of frontal slices, i.e. the product of all extents past mode 2.
    pub fn slice_count(&self) -> usize {
        self.dims[2..].iter().product()
    }

    pub fn rows(&self) -> usize {
        self.dims[0]
    }

    pub fn cols(&self) -> usize {
        self.dims[1]
    }

    /// Frontal slice `k` (trailing modes flattened, mode 3 fastest).
    pub fn frontal_slice(&self, k: usize) -> DMatrix<f64> {
        let block = self.dims[0] * self.dims[1];
        DMatrix::from_column_slice(self.dims[0], self.dims[1], &self.data[k * block..(k + 1) * block])
    }

    /// The tube `(i, j, :)` of an order-3 tensor.
    pub fn tube(&self, i: usize, j: usize) -> Tube {
        assert_eq!(self.order(), 3, "tubes are defined for order-3 tensors");
        let (n1, n2, n3) = (self.dims[0], self.dims[1], self.dims[2]);
        Tube { data: (0..n3).map(|k| self.data[i + n1 * (j + n2 * k)]).collect() }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|x| x * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_parts(self.dims.clone(), self.data.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.expect_same_dims(other)?;
        Ok(Self::from_parts(
            self.dims.clone(),
            self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// Frobenius norm of `self - other` without allocating.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.expect_same_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub fn expect_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::dim(format!("extents {:?} and {:?} differ", self.dims, other.dims)));
        }
        Ok(())
    }

    pub(crate) fn expect_order3(&self, what: &str) -> Result<(usize, usize, usize)> {
        if self.order() != 3 {
            return Err(Error::dim(format!("{what} needs an order-3 tensor, got order {}", self.order())));
        }
        Ok((self.dims[0], self.dims[1], self.dims[2]))
    }

    /// Reinterprets the data under new extents with the same element count.
    pub fn reshape(&self, dims: &[usize]) -> Result<Self> {
        let len = check_dims(dims)?;
        if len != self.len() {
            return Err(Error::dim(format!("cannot reshape {:?} into {:?}", self.dims, dims)));
        }
        Ok(Self::from_parts(dims.to_vec(), self.data.clone()))
    }

    /// The `n1*n2 x n3*...` matrix whose columns are the vectorized frontal slices.
    pub fn matricize_frames(&self) -> DMatrix<f64> {
        let rows = self.dims[0] * self.dims[1];
        DMatrix::from_column_slice(rows, self.len() / rows, &self.data)
    }
}

pub fn frobenius_norm(t: &DenseTensor) -> f64 {
    t.frobenius_norm()
}

/// A `1 x 1 x n3` fiber; tubes form a commutative ring under circular convolution.
#[derive(Clone, Debug, PartialEq)]
pub struct Tube {
    data: Vec<f64>,
}

impl Tube {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::dim("a tube needs at least one element"));
        }
        Ok(Self { data })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Direct circular convolution `c(k) = sum_m a(m) b((k - m) mod n)`.
pub fn tube_circ_conv(a: &Tube, b: &Tube) -> Result<Tube> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::dim(format!("tube lengths {} and {} differ", n, b.len())));
    }
    let data = (0..n)
        .map(|k| (0..n).map(|m| a.data[m] * b.data[(k + n - m) % n]).sum())
        .collect();
    Ok(Tube { data })
}
