use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::ParamVector;
use crate::error::{check_len, Error, Result};
use crate::Scalar;

/// Output nonlinearity applied after the last affine layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    Identity,
    /// Row-wise softmax.
    Softmax,
    /// Elementwise tanh, used for bounded continuous actions.
    Tanh,
}

#[derive(Clone, Debug, PartialEq)]
struct Linear<T> {
    /// `in x out`.
    weight: Array2<T>,
    bias: Array1<T>,
}

/// Fully connected network: affine layers, ReLU between them, then a [`Head`].
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T> {
    dims: Vec<usize>,
    layers: Vec<Linear<T>>,
    head: Head,
}

/// Activations retained by [`Mlp::forward_trace`] for a backward pass.
#[derive(Clone, Debug)]
pub struct Trace<T> {
    /// `inputs[l]` is the input to layer `l`; `inputs[0]` is the batch.
    inputs: Vec<Array2<T>>,
    pub output: Array2<T>,
}

#[derive(Clone, Debug)]
pub struct Gradients<T> {
    pub params: ParamVector<T>,
    pub input: Array2<T>,
}

fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::invalid("an mlp needs at least input and output widths"));
    }
    if dims.contains(&0) {
        return Err(Error::invalid(format!("zero layer width in {dims:?}")));
    }
    Ok(())
}

impl<T: Scalar> Mlp<T> {
    /// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
    pub fn new<R: Rng + ?Sized>(dims: &[usize], head: Head, rng: &mut R) -> Result<Self> {
        validate_dims(dims)?;
        let layers = dims
            .windows(2)
            .map(|w| {
                let bound = 1.0 / (w[0] as f64).sqrt();
                Linear {
                    weight: Array2::from_shape_simple_fn((w[0], w[1]), || T::of(rng.random_range(-bound..bound))),
                    bias: Array1::zeros(w[1]),
                }
            })
            .collect();
        Ok(Self { dims: dims.to_vec(), layers, head })
    }

    pub fn zeros(dims: &[usize], head: Head) -> Result<Self> {
        validate_dims(dims)?;
        let layers = dims
            .windows(2)
            .map(|w| Linear { weight: Array2::zeros((w[0], w[1])), bias: Array1::zeros(w[1]) })
            .collect();
        Ok(Self { dims: dims.to_vec(), layers, head })
    }

    pub fn from_params(dims: &[usize], head: Head, params: &ParamVector<T>) -> Result<Self> {
        let mut net = Self::zeros(dims, head)?;
        net.set_params(params)?;
        Ok(net)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        self.dims[self.dims.len() - 1]
    }

    pub fn param_count(&self) -> usize {
        self.dims.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    pub fn params(&self) -> ParamVector<T> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend(layer.weight.iter().copied());
            out.extend(layer.bias.iter().copied());
        }
        ParamVector(out)
    }

    pub fn set_params(&mut self, params: &[T]) -> Result<()> {
        check_len("mlp parameters", params.len(), self.param_count())?;
        let mut rest = params;
        for layer in &mut self.layers {
            let (w, tail) = rest.split_at(layer.weight.len());
            let (b, tail) = tail.split_at(layer.bias.len());
            // Weights are standard-layout, so logical order is memory order.
            layer.weight.as_slice_mut().expect("standard layout").copy_from_slice(w);
            layer.bias.as_slice_mut().expect("contiguous").copy_from_slice(b);
            rest = tail;
        }
        Ok(())
    }

    /// Converts every parameter to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Mlp<U> {
        let params: Vec<U> = self.params().iter().map(|x| U::of(x.f64())).collect();
        Mlp::from_params(&self.dims, self.head, &ParamVector(params)).expect("same dims")
    }

    fn check_batch(&self, batch: &ArrayView2<T>) -> Result<()> {
        check_len("mlp input width", batch.ncols(), self.input_dim())
    }

    pub fn forward(&self, batch: &Array2<T>) -> Result<Array2<T>> {
        self.forward_view(batch.view())
    }

    pub fn forward_view(&self, batch: ArrayView2<T>) -> Result<Array2<T>> {
        self.check_batch(&batch)?;
        let mut x = affine(&self.layers[0], batch);
        for layer in &self.layers[1..] {
            relu(&mut x);
            x = affine(layer, x.view());
        }
        apply_head(self.head, &mut x);
        Ok(x)
    }

    pub fn forward_trace(&self, batch: &Array2<T>) -> Result<Trace<T>> {
        self.check_batch(&batch.view())?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        inputs.push(batch.clone());
        let mut x = affine(&self.layers[0], batch.view());
        for layer in &self.layers[1..] {
            relu(&mut x);
            let next = affine(layer, x.view());
            inputs.push(x);
            x = next;
        }
        apply_head(self.head, &mut x);
        Ok(Trace { inputs, output: x })
    }

    /// Gradient of `<forward(batch), upstream>` with respect to parameters and input.
    pub fn backward(&self, trace: &Trace<T>, upstream: &Array2<T>) -> Result<Gradients<T>> {
        self.backprop(trace, upstream, true)
    }

    /// Same as [`Mlp::backward`] but only the input gradient.
    pub fn input_gradient(&self, trace: &Trace<T>, upstream: &Array2<T>) -> Result<Array2<T>> {
        Ok(self.backprop(trace, upstream, false)?.input)
    }

    fn backprop(&self, trace: &Trace<T>, upstream: &Array2<T>, want_params: bool) -> Result<Gradients<T>> {
        if upstream.dim() != trace.output.dim() {
            return Err(Error::invalid(format!(
                "upstream shape {:?}, expected {:?}",
                upstream.dim(),
                trace.output.dim()
            )));
        }
        let mut delta = head_backward(self.head, &trace.output, upstream);
        let mut blocks: Vec<(Array2<T>, Array1<T>)> = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &trace.inputs[l];
            if want_params {
                blocks.push((input.t().dot(&delta), delta.sum_axis(Axis(0))));
            }
            let mut back = delta.dot(&layer.weight.t());
            if l > 0 {
                Zip::from(&mut back).and(input).for_each(|g, &a| {
                    if a <= T::zero() {
                        *g = T::zero();
                    }
                });
            }
            delta = back;
        }
        let mut params = Vec::with_capacity(if want_params { self.param_count() } else { 0 });
        for (w, b) in blocks.iter().rev() {
            params.extend(w.iter().copied());
            params.extend(b.iter().copied());
        }
        Ok(Gradients { params: ParamVector(params), input: delta })
    }
}

fn affine<T: Scalar>(layer: &Linear<T>, x: ArrayView2<T>) -> Array2<T> {
    let mut y = x.dot(&layer.weight);
    y += &layer.bias;
    y
}

fn relu<T: Scalar>(x: &mut Array2<T>) {
    x.mapv_inplace(|v| if v > T::zero() { v } else { T::zero() });
}

fn apply_head<T: Scalar>(head: Head, x: &mut Array2<T>) {
    match head {
        Head::Identity => {}
        Head::Tanh => x.mapv_inplace(|v| v.tanh()),
        Head::Softmax => {
            for mut row in x.rows_mut() {
                let max = row.iter().copied().fold(T::neg_infinity(), T::max);
                row.mapv_inplace(|v| (v - max).exp());
                let sum = row.sum();
                row.mapv_inplace(|v| v / sum);
            }
        }
    }
}

fn head_backward<T: Scalar>(head: Head, output: &Array2<T>, upstream: &Array2<T>) -> Array2<T> {
    match head {
        Head::Identity => upstream.clone(),
        Head::Tanh => {
            let mut g = upstream.clone();
            Zip::from(&mut g).and(output).for_each(|g, &y| *g *= T::one() - y * y);
            g
        }
        Head::Softmax => {
            let mut g = upstream.clone();
            for (mut grow, prow) in g.rows_mut().into_iter().zip(output.rows()) {
                let dot: T = grow.iter().zip(prow.iter()).map(|(&u, &p)| u * p).sum();
                Zip::from(&mut grow).and(&prow).for_each(|u, &p| *u = p * (*u - dot));
            }
            g
        }
    }
}
