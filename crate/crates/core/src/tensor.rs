//! Dense covariant tensor fields with symbolic components.
//!
//! All tensors here carry lower indices only. Components are stored
//! row-major: the component `T[i₀, i₁, …]` lives at `Σ i_k n^(rank-1-k)`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{EvalError, Expr, Tape};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    None,
    /// Antisymmetric in (1,2) and (3,4), symmetric under pair exchange.
    RiemannLike,
    Symmetric2,
    Antisymmetric2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TensorError {
    RankMismatch { expected: usize, found: usize },
    DimensionMismatch { expected: usize, found: usize },
    ComponentCount { expected: usize, found: usize },
}

impl fmt::Display for TensorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorError::RankMismatch { expected, found } => {
                write!(f, "expected a rank-{expected} tensor, got rank {found}")
            }
            TensorError::DimensionMismatch { expected, found } => {
                write!(f, "expected dimension {expected}, got {found}")
            }
            TensorError::ComponentCount { expected, found } => {
                write!(f, "expected {expected} components, got {found}")
            }
        }
    }
}

pub fn component_count(dim: usize, rank: usize) -> usize {
    dim.pow(rank as u32)
}

pub fn flat_index(dim: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

/// Calls `f` for every multi-index of the given shape in storage order.
pub fn for_each_index(dim: usize, rank: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = alloc::vec![0usize; rank];
    let total = component_count(dim, rank);
    for _ in 0..total {
        f(&idx);
        for slot in (0..rank).rev() {
            idx[slot] += 1;
            if idx[slot] < dim {
                break;
            }
            idx[slot] = 0;
        }
    }
}

#[derive(Clone, Debug)]
pub struct TensorField {
    dim: usize,
    rank: usize,
    components: Vec<Expr>,
    symmetry: Symmetry,
}

impl TensorField {
    pub fn new(dim: usize, rank: usize, components: Vec<Expr>, symmetry: Symmetry) -> Result<Self, TensorError> {
        let expected = component_count(dim, rank);
        if components.len() != expected {
            return Err(TensorError::ComponentCount {
                expected,
                found: components.len(),
            });
        }
        Ok(TensorField {
            dim,
            rank,
            components,
            symmetry,
        })
    }

    pub fn from_fn(dim: usize, rank: usize, symmetry: Symmetry, mut f: impl FnMut(&[usize]) -> Expr) -> Self {
        let mut components = Vec::with_capacity(component_count(dim, rank));
        for_each_index(dim, rank, |idx| components.push(f(idx)));
        TensorField {
            dim,
            rank,
            components,
            symmetry,
        }
    }

    pub fn zeros(dim: usize, rank: usize) -> Self {
        TensorField::from_fn(dim, rank, Symmetry::None, |_| Expr::zero())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        debug_assert_eq!(idx.len(), self.rank);
        &self.components[flat_index(self.dim, idx)]
    }

    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    pub fn expect_rank(&self, rank: usize) -> Result<(), TensorError> {
        if self.rank == rank {
            Ok(())
        } else {
            Err(TensorError::RankMismatch {
                expected: rank,
                found: self.rank,
            })
        }
    }

    pub fn expect_dim(&self, dim: usize) -> Result<(), TensorError> {
        if self.dim == dim {
            Ok(())
        } else {
            Err(TensorError::DimensionMismatch {
                expected: dim,
                found: self.dim,
            })
        }
    }

    pub fn map(&self, f: impl FnMut(&Expr) -> Expr) -> TensorField {
        TensorField {
            dim: self.dim,
            rank: self.rank,
            components: self.components.iter().map(f).collect(),
            symmetry: self.symmetry,
        }
    }

    /// Componentwise `self - other`; the result keeps `self`'s symmetry tag.
    pub fn sub(&self, other: &TensorField) -> Result<TensorField, TensorError> {
        other.expect_dim(self.dim)?;
        other.expect_rank(self.rank)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.sub(b))
            .collect();
        Ok(TensorField {
            components,
            ..self.clone()
        })
    }

    pub fn scale(&self, factor: &Expr) -> TensorField {
        self.map(|c| factor.mul(c))
    }

    /// Simplifies each component, sharing work across components.
    pub fn simplified(&self) -> TensorField {
        let mut s = crate::expr::simplify::Simplifier::default();
        self.map(|c| s.run(c))
    }

    /// Evaluates at a single point; compiles a fresh tape.
    pub fn evaluate<S: AsRef<str>>(&self, coordinates: &[S], point: &[f64]) -> Result<NumTensor, EvalError> {
        let tape = TensorTape::compile(coordinates, &[self])?;
        Ok(tape.eval(point)?.remove(0))
    }
}

/// Tensor product `a ⊗ b` with the indices of `a` first.
pub fn outer(a: &TensorField, b: &TensorField) -> Result<TensorField, TensorError> {
    b.expect_dim(a.dim)?;
    let nb = b.components.len();
    Ok(TensorField::from_fn(a.dim, a.rank + b.rank, Symmetry::None, |idx| {
        let i = flat_index(a.dim, &idx[..a.rank]);
        let j = flat_index(a.dim, &idx[a.rank..]);
        debug_assert!(j < nb);
        a.components[i].mul(&b.components[j])
    }))
}

/// Numeric components of a tensor at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct NumTensor {
    pub dim: usize,
    pub rank: usize,
    pub data: Vec<f64>,
}

impl NumTensor {
    pub fn zeros(dim: usize, rank: usize) -> Self {
        NumTensor {
            dim,
            rank,
            data: alloc::vec![0.0; component_count(dim, rank)],
        }
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[flat_index(self.dim, idx)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }

    /// Largest componentwise `|self - other|`.
    pub fn max_abs_diff(&self, other: &NumTensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max(libm::fabs(a - b)))
    }
}

/// Several tensors compiled onto one tape so that their shared subtrees
/// are evaluated once per point.
pub struct TensorTape {
    tape: Tape,
    shapes: Vec<(usize, usize)>,
}

impl TensorTape {
    pub fn compile<S: AsRef<str>>(coordinates: &[S], tensors: &[&TensorField]) -> Result<Self, EvalError> {
        let exprs: Vec<Expr> = tensors.iter().flat_map(|t| t.components.iter().cloned()).collect();
        Ok(TensorTape {
            tape: Tape::compile(coordinates, &exprs)?,
            shapes: tensors.iter().map(|t| (t.dim, t.rank)).collect(),
        })
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<NumTensor>, EvalError> {
        let values = self.tape.eval(point)?;
        let mut out = Vec::with_capacity(self.shapes.len());
        let mut offset = 0;
        for &(dim, rank) in &self.shapes {
            let len = component_count(dim, rank);
            out.push(NumTensor {
                dim,
                rank,
                data: values[offset..offset + len].to_vec(),
            });
            offset += len;
        }
        Ok(out)
    }

    pub fn op_count(&self) -> usize {
        self.tape.op_count()
    }
}

/// Largest violation of the declared symmetry at one point.
pub fn symmetry_residual(t: &NumTensor, symmetry: Symmetry) -> f64 {
    let n = t.dim;
    let mut worst: f64 = 0.0;
    let mut note = |v: f64| worst = worst.max(libm::fabs(v));
    match (symmetry, t.rank) {
        (Symmetry::None, _) => {}
        (Symmetry::Symmetric2, 2) => for_each_index(n, 2, |i| note(t.get(i) - t.get(&[i[1], i[0]]))),
        (Symmetry::Antisymmetric2, 2) => for_each_index(n, 2, |i| note(t.get(i) + t.get(&[i[1], i[0]]))),
        (Symmetry::RiemannLike, 4) => for_each_index(n, 4, |i| {
            let (w, x, y, z) = (i[0], i[1], i[2], i[3]);
            let v = t.get(i);
            note(v + t.get(&[x, w, y, z]));
            note(v + t.get(&[w, x, z, y]));
            note(v - t.get(&[y, z, w, x]));
            note(v + t.get(&[x, y, w, z]) + t.get(&[y, w, x, z]));
        }),
        _ => note(f64::INFINITY),
    }
    worst
}

pub(crate) fn index_label(idx: &[usize]) -> String {
    let mut s = String::from("[");
    for (k, i) in idx.iter().enumerate() {
        if k > 0 {
            s.push(',');
        }
        s.push_str(&alloc::format!("{i}"));
    }
    s.push(']');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn storage_order() {
        let mut seen = Vec::new();
        for_each_index(2, 3, |i| seen.push(flat_index(2, i)));
        assert_eq!(seen, (0..8).collect::<Vec<_>>());
        assert_eq!(flat_index(3, &[1, 2]), 5);
    }

    #[test]
    fn outer_product_and_symmetry() {
        let a = TensorField::new(2, 1, vec![Expr::var("x"), Expr::int(2)], Symmetry::None).unwrap();
        let t = outer(&a, &a).unwrap().with_symmetry(Symmetry::Symmetric2);
        let v = t.evaluate(&["x"], &[3.0]).unwrap();
        assert_eq!(v.data, vec![9.0, 6.0, 6.0, 4.0]);
        assert_eq!(symmetry_residual(&v, Symmetry::Symmetric2), 0.0);
        assert_eq!(symmetry_residual(&v, Symmetry::Antisymmetric2), 18.0);
    }

    #[test]
    fn component_count_is_checked() {
        assert_eq!(
            TensorField::new(2, 2, vec![Expr::zero()], Symmetry::None).unwrap_err(),
            TensorError::ComponentCount { expected: 4, found: 1 }
        );
    }
}
