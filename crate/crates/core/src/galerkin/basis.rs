use std::f64::consts::PI;

use crate::grid_spectral::{GridSpec, MAX_DIM};

/// Shape of a real trigonometric basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Constant,
    Cos,
    Sin,
}

/// `w(x) = norm·cos(κ·x)` or `norm·sin(κ·x)` with `κ = 2π ξ / L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFunction {
    pub wavevector: [i64; MAX_DIM],
    pub parity: Parity,
}

/// Orthonormal real Fourier basis on `[0, L)ⁿ`: the constant, then `cos`
/// and `sin` pairs for half-lattice wavevectors ordered by `|ξ|²` and then
/// lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigBasis {
    dim: usize,
    length: f64,
    functions: Vec<BasisFunction>,
}

impl TrigBasis {
    pub fn new(dim: usize, length: f64, size: usize) -> Self {
        let mut radius = 1i64;
        loop {
            let mut half: Vec<[i64; MAX_DIM]> = Vec::new();
            let r2 = radius * radius;
            let span = -radius..=radius;
            let mut xi = [0i64; MAX_DIM];
            let axes = |d| if d < dim { span.clone() } else { 0..=0 };
            for a in axes(0) {
                for b in axes(1) {
                    for c in axes(2) {
                        xi[0] = a;
                        xi[1] = b;
                        xi[2] = c;
                        let canonical = xi.iter().find(|&&k| k != 0).is_some_and(|&k| k > 0);
                        if canonical && xi.iter().map(|k| k * k).sum::<i64>() <= r2 {
                            half.push(xi);
                        }
                    }
                }
            }
            if 1 + 2 * half.len() >= size {
                half.sort_by_key(|xi| (xi.iter().map(|k| k * k).sum::<i64>(), std::cmp::Reverse(*xi)));
                let mut functions = vec![BasisFunction {
                    wavevector: [0; MAX_DIM],
                    parity: Parity::Constant,
                }];
                for xi in half {
                    functions.push(BasisFunction {
                        wavevector: xi,
                        parity: Parity::Cos,
                    });
                    functions.push(BasisFunction {
                        wavevector: xi,
                        parity: Parity::Sin,
                    });
                }
                functions.truncate(size);
                return Self {
                    dim,
                    length,
                    functions,
                };
            }
            radius *= 2;
        }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[BasisFunction] {
        &self.functions
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest `|ξ_a|` over retained functions and axes.
    pub fn max_component(&self) -> i64 {
        self.functions
            .iter()
            .flat_map(|f| f.wavevector.iter().map(|k| k.abs()))
            .max()
            .unwrap_or(0)
    }

    fn scale(&self) -> f64 {
        2.0 * PI / self.length
    }

    fn norm(&self, f: &BasisFunction) -> f64 {
        let vol = self.length.powi(self.dim as i32);
        match f.parity {
            Parity::Constant => vol.powf(-0.5),
            _ => (2.0 / vol).sqrt(),
        }
    }

    /// `w_j(x)`.
    pub fn value(&self, j: usize, x: &[f64]) -> f64 {
        let f = &self.functions[j];
        let arg = self.phase(f, x);
        self.norm(f)
            * match f.parity {
                Parity::Constant => 1.0,
                Parity::Cos => arg.cos(),
                Parity::Sin => arg.sin(),
            }
    }

    /// `∇w_j(x)`, written into `out[..dim]`.
    pub fn gradient(&self, j: usize, x: &[f64], out: &mut [f64]) {
        let f = &self.functions[j];
        let arg = self.phase(f, x);
        let s = self.norm(f)
            * match f.parity {
                Parity::Constant => 0.0,
                Parity::Cos => -arg.sin(),
                Parity::Sin => arg.cos(),
            };
        for a in 0..self.dim {
            out[a] = s * f.wavevector[a] as f64 * self.scale();
        }
    }

    /// `|κ_j|²`, the diagonal of the gradient Gram matrix.
    pub fn gradient_gram_diagonal(&self) -> Vec<f64> {
        let s = self.scale();
        self.functions
            .iter()
            .map(|f| f.wavevector.iter().map(|&k| (k as f64 * s).powi(2)).sum())
            .collect()
    }

    fn phase(&self, f: &BasisFunction, x: &[f64]) -> f64 {
        let s = self.scale();
        (0..self.dim).map(|a| f.wavevector[a] as f64 * s * x[a]).sum()
    }

    /// Number of basis functions representable on `grid`: the constant plus
    /// a `cos`/`sin` pair for every non-Nyquist half-lattice mode.
    pub fn capacity(grid: &GridSpec) -> usize {
        let inner = grid.points() - 1;
        (inner.pow(grid.dim() as u32) - 1) + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_spectral::{inner_product, ScalarField};

    #[test]
    fn one_dimensional_ordering() {
        let b = TrigBasis::new(1, 2.0 * PI, 5);
        let got: Vec<(i64, Parity)> = b
            .functions()
            .iter()
            .map(|f| (f.wavevector[0], f.parity))
            .collect();
        assert_eq!(
            got,
            vec![
                (0, Parity::Constant),
                (1, Parity::Cos),
                (1, Parity::Sin),
                (2, Parity::Cos),
                (2, Parity::Sin)
            ]
        );
        assert_eq!(b.max_component(), 2);
    }

    #[test]
    fn orthonormal_on_the_grid() {
        for (dim, n, m) in [(1, 16, 9), (2, 16, 21)] {
            let grid = GridSpec::new(dim, n, 3.0).unwrap();
            let b = TrigBasis::new(dim, 3.0, m);
            let fields: Vec<ScalarField> = (0..m)
                .map(|j| ScalarField::from_fn(grid, |x| b.value(j, x)))
                .collect();
            for j in 0..m {
                for k in 0..m {
                    let ip = inner_product(&fields[j], &fields[k]).unwrap();
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-12, "({j},{k}) = {ip}");
                }
            }
        }
    }

    #[test]
    fn capacity_counts_non_nyquist_modes() {
        let g = GridSpec::periodic(1, 8).unwrap();
        // 1 + cos/sin for ξ = 1, 2, 3
        assert_eq!(TrigBasis::capacity(&g), 7);
        let g2 = GridSpec::periodic(2, 8).unwrap();
        assert_eq!(TrigBasis::capacity(&g2), 49);
    }
}
