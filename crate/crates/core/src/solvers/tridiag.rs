/// Tridiagonal matrix in three-band storage. `lower[0]` and `upper[n-1]` are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn with_size(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Thomas algorithm. On a zero or non-finite pivot returns the offending row.
    pub fn solve(&self, rhs: &[f64]) -> std::result::Result<Vec<f64>, usize> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut piv = self.diag[0];
        if piv == 0.0 || !piv.is_finite() {
            return Err(0);
        }
        c[0] = self.upper[0] / piv;
        d[0] = rhs[0] / piv;
        for i in 1..n {
            piv = self.diag[i] - self.lower[i] * c[i - 1];
            if piv == 0.0 || !piv.is_finite() {
                return Err(i);
            }
            c[i] = if i + 1 < n { self.upper[i] / piv } else { 0.0 };
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solve_inverts_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2, 3, 10, 57] {
            let mut m = Tridiagonal::with_size(n);
            for i in 0..n {
                m.lower[i] = rng.gen_range(-1.0..1.0);
                m.upper[i] = rng.gen_range(-1.0..1.0);
                m.diag[i] = 3.0 + rng.gen_range(0.0..1.0);
            }
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = m.solve(&m.apply(&x)).unwrap();
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_pivot_reported() {
        let mut m = Tridiagonal::with_size(3);
        m.diag = vec![1.0, 1.0, 1.0];
        m.lower[1] = 1.0;
        m.upper[0] = 1.0;
        assert_eq!(m.solve(&[1.0, 1.0, 1.0]), Err(1));
    }
}
