//! The curvature apparatus of a metric chart.
//!
//! Conventions, fixed throughout:
//!
//! * `Γ^k_ij` is stored at `[k][i][j]`.
//! * The curvature operator `ℛ(X,Y) = [∇_X,∇_Y] − ∇_[X,Y]` has components
//!   `ℛ(∂_i,∂_j)∂_k = Rc^l_ijk ∂_l`, stored at `[i][j][k][l]`.
//! * `R(W,X,Y,Z) = g(ℛ(W,X)Y, Z)`, `S(Y,Z) = tr(X ↦ ℛ(X,Y)Z)`, `r = g^{jk} S_jk`.
//! * `G(W,X,Y,Z) = g(X,Y)g(W,Z) − g(W,Y)g(X,Z)`, the lowered form of
//!   `𝒢(X,Y)Z = g(Y,Z)X − g(X,Z)Y`, and `C = R − r/(n(n−1)) G`.
//! * Covariant derivatives put the new index first: `(∇T)_{a i…} = ∇_a T_{i…}`,
//!   so `(∇∇T)_{a b …} = ∇²_{∂a,∂b} T`.
//!
//! With these, a space of constant sectional curvature `K` has `R = K·G`.

mod connection;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use crate::chart::MetricChart;
use crate::expr::simplify::Simplifier;
use crate::expr::{count_nodes, Differentiator, Expr};
use crate::tensor::{index_label, Symmetry, TensorError, TensorField};

/// Default bound on the number of distinct expression nodes in the
/// Riemann tensor of a chart.
pub const NODE_LIMIT: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeometryError {
    /// The metric determinant is identically zero.
    Singular,
    /// Expression swell beyond the node limit.
    Resource { component: String, nodes: usize, limit: usize },
    Tensor(TensorError),
    Order(usize),
}

impl From<TensorError> for GeometryError {
    fn from(e: TensorError) -> Self {
        GeometryError::Tensor(e)
    }
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::Singular => write!(f, "metric determinant is identically zero"),
            GeometryError::Resource { component, nodes, limit } => write!(
                f,
                "expression swell: Riemann component {component} needs {nodes} nodes (limit {limit})"
            ),
            GeometryError::Tensor(e) => write!(f, "{e}"),
            GeometryError::Order(k) => write!(f, "covariant derivative order must be 1 or 2, got {k}"),
        }
    }
}

pub struct CurvatureBundle {
    chart: MetricChart,
    inverse: Vec<Expr>,
    christoffel: Vec<Expr>,
    operator: Vec<Expr>,
    metric: TensorField,
    riemann: TensorField,
    ricci: TensorField,
    scalar: Expr,
    model: TensorField,
    concircular: TensorField,
    // one per coordinate; shared so repeated derivatives reuse work
    partials: RefCell<Vec<Differentiator>>,
}

impl CurvatureBundle {
    pub fn new(chart: MetricChart) -> Result<Self, GeometryError> {
        CurvatureBundle::with_node_limit(chart, NODE_LIMIT)
    }

    pub fn with_node_limit(chart: MetricChart, limit: usize) -> Result<Self, GeometryError> {
        let n = chart.dim();
        let inverse = connection::inverse_metric(&chart).ok_or(GeometryError::Singular)?;
        let christoffel = connection::christoffel(&chart, &inverse);
        let mut partials: Vec<Differentiator> = chart.coordinates().iter().map(|c| Differentiator::new(c)).collect();
        let gamma = |k: usize, i: usize, j: usize| &christoffel[(k * n + i) * n + j];

        let mut simplifier = Simplifier::default();
        let mut operator = Vec::with_capacity(n * n * n * n);
        crate::tensor::for_each_index(n, 4, |idx| {
            let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
            if j == i {
                operator.push(Expr::zero());
                return;
            }
            if j < i {
                // antisymmetric in (i, j)
                let twin = operator[((j * n + i) * n + k) * n + l].neg();
                operator.push(twin);
                return;
            }
            let mut terms = vec![partials[i].derive(gamma(l, j, k)), partials[j].derive(gamma(l, i, k)).neg()];
            for m in 0..n {
                terms.push(gamma(m, j, k).mul(gamma(l, i, m)));
                terms.push(gamma(m, i, k).mul(gamma(l, j, m)).neg());
            }
            operator.push(simplifier.run(&Expr::sum(terms)));
        });
        let rc = |i: usize, j: usize, k: usize, l: usize| &operator[((i * n + j) * n + k) * n + l];

        let metric = TensorField::new(n, 2, chart.metric_components().to_vec(), Symmetry::Symmetric2)?;
        let g = |i: usize, j: usize| chart.metric(i, j);
        let riemann = TensorField::from_fn(n, 4, Symmetry::RiemannLike, |idx| {
            let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
            simplifier.run(&Expr::sum((0..n).map(|m| g(l, m).mul(rc(i, j, k, m)))))
        });
        check_swell(&riemann, limit)?;

        let ricci = TensorField::from_fn(n, 2, Symmetry::Symmetric2, |idx| {
            simplifier.run(&Expr::sum((0..n).map(|i| rc(i, idx[0], idx[1], i).clone())))
        });
        let scalar = simplifier.run(&Expr::sum(
            (0..n * n).map(|jk| inverse[jk].mul(&ricci.components()[jk])),
        ));
        let model = TensorField::from_fn(n, 4, Symmetry::RiemannLike, |idx| {
            let (w, x, y, z) = (idx[0], idx[1], idx[2], idx[3]);
            simplifier.run(&g(x, y).mul(g(w, z)).sub(&g(w, y).mul(g(x, z))))
        });
        let factor = scalar.div(&Expr::int((n * (n - 1)) as i64));
        let concircular = TensorField::from_fn(n, 4, Symmetry::RiemannLike, |idx| {
            simplifier.run(&riemann.get(idx).sub(&factor.mul(model.get(idx))))
        });
        drop(simplifier);
        // the operator derivatives above are not needed again
        partials.iter_mut().for_each(|d| *d = Differentiator::new(d.variable()));
        Ok(CurvatureBundle {
            chart,
            inverse,
            christoffel,
            operator,
            metric,
            riemann,
            ricci,
            scalar,
            model,
            concircular,
            partials: RefCell::new(partials),
        })
    }

    pub fn chart(&self) -> &MetricChart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// `g^{ij}`, row-major.
    pub fn inverse_metric(&self) -> &[Expr] {
        &self.inverse
    }

    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> &Expr {
        let n = self.dim();
        &self.christoffel[(k * n + i) * n + j]
    }

    pub fn christoffel_components(&self) -> &[Expr] {
        &self.christoffel
    }

    /// `Rc^l_ijk`, the `∂_l` component of `ℛ(∂_i,∂_j)∂_k`.
    pub fn operator(&self, i: usize, j: usize, k: usize, l: usize) -> &Expr {
        let n = self.dim();
        &self.operator[((i * n + j) * n + k) * n + l]
    }

    pub fn operator_components(&self) -> &[Expr] {
        &self.operator
    }

    pub fn metric(&self) -> &TensorField {
        &self.metric
    }

    pub fn riemann(&self) -> &TensorField {
        &self.riemann
    }

    pub fn ricci(&self) -> &TensorField {
        &self.ricci
    }

    pub fn scalar_curvature(&self) -> &Expr {
        &self.scalar
    }

    /// The tensor `G` built from the metric alone.
    pub fn model(&self) -> &TensorField {
        &self.model
    }

    pub fn concircular(&self) -> &TensorField {
        &self.concircular
    }

    /// Partial derivative along coordinate `a`, memoized across calls.
    pub fn partial(&self, a: usize, e: &Expr) -> Expr {
        self.partials.borrow_mut()[a].derive(e)
    }

    /// `∇T` (order 1) or `∇∇T` (order 2), new indices first.
    pub fn covariant_derivative(&self, t: &TensorField, order: usize) -> Result<TensorField, GeometryError> {
        match order {
            1 => self.nabla(t),
            2 => self.nabla(&self.nabla(t)?),
            k => Err(GeometryError::Order(k)),
        }
    }

    fn nabla(&self, t: &TensorField) -> Result<TensorField, GeometryError> {
        let n = self.dim();
        t.expect_dim(n)?;
        let k = t.rank();
        let mut slots = vec![0usize; k];
        Ok(TensorField::from_fn(n, k + 1, Symmetry::None, |idx| {
            let a = idx[0];
            let rest = &idx[1..];
            let mut terms = vec![self.partial(a, t.get(rest))];
            slots.copy_from_slice(rest);
            for s in 0..k {
                for m in 0..n {
                    let gamma = self.christoffel(m, a, rest[s]);
                    if gamma.is_zero() {
                        continue;
                    }
                    slots[s] = m;
                    let c = t.get(&slots);
                    if !c.is_zero() {
                        terms.push(gamma.mul(c).neg());
                    }
                }
                slots[s] = rest[s];
            }
            Expr::sum(terms)
        }))
    }

    /// `(ℛ(∂_u,∂_v)T)(∂_w,…)` by the derivation rule
    /// `−T(ℛ(U,V)W, …) − … − T(…, ℛ(U,V)Z)`; indices `(u, v, w, …)`.
    pub fn curvature_action(&self, t: &TensorField) -> Result<TensorField, GeometryError> {
        let n = self.dim();
        t.expect_dim(n)?;
        let k = t.rank();
        let mut slots = vec![0usize; k];
        Ok(TensorField::from_fn(n, k + 2, Symmetry::None, |idx| {
            let (u, v) = (idx[0], idx[1]);
            let rest = &idx[2..];
            let mut terms = Vec::new();
            slots.copy_from_slice(rest);
            for s in 0..k {
                for m in 0..n {
                    let r = self.operator(u, v, rest[s], m);
                    if r.is_zero() {
                        continue;
                    }
                    slots[s] = m;
                    let c = t.get(&slots);
                    if !c.is_zero() {
                        terms.push(r.mul(c).neg());
                    }
                }
                slots[s] = rest[s];
            }
            Expr::sum(terms)
        }))
    }

    /// The same action as `∇²_{U,V}T − ∇²_{V,U}T`, an independent route
    /// through second covariant derivatives.
    pub fn curvature_action_via_second_derivative(&self, t: &TensorField) -> Result<TensorField, GeometryError> {
        let second = self.covariant_derivative(t, 2)?;
        Ok(antisymmetrize_leading(&second))
    }

    /// `dω(U,V) = ½((∇_U ω)(V) − (∇_V ω)(U))`. The connection terms cancel
    /// for a torsion-free connection, so partial derivatives are used.
    pub fn exterior_derivative(&self, omega: &TensorField) -> Result<TensorField, GeometryError> {
        let n = self.dim();
        omega.expect_dim(n)?;
        omega.expect_rank(1)?;
        let half = Expr::ratio(1, 2);
        Ok(TensorField::from_fn(n, 2, Symmetry::Antisymmetric2, |idx| {
            let (u, v) = (idx[0], idx[1]);
            if u == v {
                return Expr::zero();
            }
            let d = self.partial(u, omega.get(&[v])).sub(&self.partial(v, omega.get(&[u])));
            half.mul(&d)
        }))
    }

    /// The differential `df` as a rank-1 field.
    pub fn gradient(&self, f: &Expr) -> TensorField {
        TensorField::from_fn(self.dim(), 1, Symmetry::None, |idx| self.partial(idx[0], f))
    }
}

/// `T_{uv…} − T_{vu…}` over the two leading slots.
pub fn antisymmetrize_leading(t: &TensorField) -> TensorField {
    let mut swapped = vec![0usize; t.rank()];
    TensorField::from_fn(t.dim(), t.rank(), Symmetry::None, |idx| {
        if idx[0] == idx[1] {
            return Expr::zero();
        }
        swapped.copy_from_slice(idx);
        swapped.swap(0, 1);
        t.get(idx).sub(t.get(&swapped))
    })
}

/// `(μ∧λ)(U,V) = ½(μ(U)λ(V) − μ(V)λ(U))`.
pub fn wedge(mu: &TensorField, lambda: &TensorField) -> Result<TensorField, GeometryError> {
    mu.expect_rank(1)?;
    lambda.expect_rank(1)?;
    lambda.expect_dim(mu.dim())?;
    let half = Expr::ratio(1, 2);
    Ok(TensorField::from_fn(mu.dim(), 2, Symmetry::Antisymmetric2, |idx| {
        let (u, v) = (idx[0], idx[1]);
        if u == v {
            return Expr::zero();
        }
        let d = mu.get(&[u]).mul(lambda.get(&[v])).sub(&mu.get(&[v]).mul(lambda.get(&[u])));
        half.mul(&d)
    }))
}

fn check_swell(t: &TensorField, limit: usize) -> Result<(), GeometryError> {
    let total = count_nodes(t.components());
    if total <= limit {
        return Ok(());
    }
    let mut worst = (0, Vec::new());
    crate::tensor::for_each_index(t.dim(), t.rank(), |idx| {
        let c = t.get(idx).node_count();
        if c > worst.0 {
            worst = (c, idx.to_vec());
        }
    });
    Err(GeometryError::Resource {
        component: index_label(&worst.1),
        nodes: total,
        limit,
    })
}
