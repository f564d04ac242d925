//! Gauss–Legendre rules on `[-1, 1]`.

use crate::error::{Error, Result};
use crate::scalar::{count, lit, Real};

/// Nodes and weights of an `order`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds the rule by Newton iteration on the Legendre recurrence.
    ///
    /// Nodes are returned in ascending order. Exact for polynomials of
    /// degree `2 * order - 1`.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Input("quadrature order must be at least 1".into()));
        }
        let n = order;
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let tol = T::default_epsilon() * lit(4.0);
        // roots are symmetric; solve the upper half only
        for i in 0..n.div_ceil(2) {
            let mut x: T =
                (T::pi() * (count::<T>(i) + lit(0.75)) / (count::<T>(n) + lit(0.5))).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= tol {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != T::zero() {
                dp = d;
            }
            let w = lit::<T>(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Iterates `(node, weight)` pairs mapped onto `[-half, half]`.
    pub fn scaled(&self, half: T) -> impl Iterator<Item = (T, T)> + '_ {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (x * half, w * half))
    }
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let k = count::<T>(k);
        let p2 = ((lit::<T>(2.0) * k - T::one()) * x * p1 - (k - T::one()) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let d = count::<T>(n) * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}
