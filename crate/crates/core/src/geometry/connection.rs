use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::chart::MetricChart;
use crate::expr::simplify::Simplifier;
use crate::expr::{Differentiator, Expr};

/// Determinant of the minor with the given row and column bitmasks,
/// expanded along its first row. Minors are memoized and structurally
/// zero entries skipped, so sparse metrics stay cheap.
struct Minors<'a> {
    n: usize,
    g: &'a [Expr],
    memo: BTreeMap<(u32, u32), Expr>,
}

impl Minors<'_> {
    fn det(&mut self, rows: u32, cols: u32) -> Expr {
        if rows == 0 {
            return Expr::one();
        }
        if let Some(d) = self.memo.get(&(rows, cols)) {
            return d.clone();
        }
        let r = rows.trailing_zeros() as usize;
        let mut terms = Vec::new();
        let mut position = 0;
        for c in 0..self.n {
            if cols & (1 << c) == 0 {
                continue;
            }
            let entry = &self.g[r * self.n + c];
            if !entry.is_zero() {
                let sub = self.det(rows & !(1 << r), cols & !(1 << c));
                let term = entry.mul(&sub);
                terms.push(if position % 2 == 0 { term } else { term.neg() });
            }
            position += 1;
        }
        let d = Expr::sum(terms);
        self.memo.insert((rows, cols), d.clone());
        d
    }
}

/// Symbolic inverse metric `g^{ij}` (row-major) via cofactors; `None`
/// when the determinant simplifies to zero.
pub(crate) fn inverse_metric(chart: &MetricChart) -> Option<Vec<Expr>> {
    let n = chart.dim();
    let all = (1u32 << n) - 1;
    let mut minors = Minors {
        n,
        g: chart.metric_components(),
        memo: BTreeMap::new(),
    };
    let mut simplifier = Simplifier::default();
    let det = simplifier.run(&minors.det(all, all));
    if det.is_zero() {
        return None;
    }
    let mut inv = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            // (g^{-1})_{ij} = C_{ji} / det
            let cof = minors.det(all & !(1 << j), all & !(1 << i));
            let cof = if (i + j) % 2 == 0 { cof } else { cof.neg() };
            inv.push(simplifier.run(&cof.div(&det)));
        }
    }
    Some(inv)
}

/// `∂_l g_ij` stored at `[l][i][j]`.
pub(crate) fn metric_derivatives(chart: &MetricChart) -> Vec<Expr> {
    let n = chart.dim();
    let mut out = Vec::with_capacity(n * n * n);
    for coord in chart.coordinates() {
        let mut d = Differentiator::new(coord);
        for e in chart.metric_components() {
            out.push(d.derive(e));
        }
    }
    out
}

/// Levi-Civita symbols `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`,
/// stored at `[k][i][j]`.
pub(crate) fn christoffel(chart: &MetricChart, inverse: &[Expr]) -> Vec<Expr> {
    let n = chart.dim();
    let dg = metric_derivatives(chart);
    let d = |l: usize, i: usize, j: usize| &dg[(l * n + i) * n + j];
    // first kind: Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let half = Expr::ratio(1, 2);
    let mut first = Vec::with_capacity(n * n * n);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let s = d(i, j, l).add(d(j, i, l)).sub(d(l, i, j));
                first.push(half.mul(&s));
            }
        }
    }
    let mut simplifier = Simplifier::default();
    let mut out: Vec<Expr> = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if j < i {
                    // symmetric in (i, j): reuse the node
                    let twin = out[(k * n + j) * n + i].clone();
                    out.push(twin);
                    continue;
                }
                let terms = (0..n).map(|l| inverse[k * n + l].mul(&first[(l * n + i) * n + j]));
                out.push(simplifier.run(&Expr::sum(terms)));
            }
        }
    }
    out
}
