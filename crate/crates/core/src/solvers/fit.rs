//! Least-squares fits of low-degree polynomials over the index `i = 0..n`.

use num_traits::Float;

/// `c[0] + c[1]·i + c[2]·i²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly<T> {
    pub coeffs: [T; 3],
}

impl<T: Float> Poly<T> {
    pub fn constant(c: T) -> Self {
        Poly { coeffs: [c, T::zero(), T::zero()] }
    }

    pub fn eval(&self, i: T) -> T {
        let [c0, c1, c2] = self.coeffs;
        (c2 * i + c1) * i + c0
    }

    /// Highest power with a nonzero coefficient (0 for constants).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    /// Largest absolute deviation from `ys` at `i = 0, 1, ...`.
    pub fn max_residual(&self, ys: &[T]) -> T {
        ys.iter()
            .enumerate()
            .map(|(i, &y)| (self.eval(T::from(i).expect("index fits")) - y).abs())
            .fold(T::zero(), T::max)
    }
}

/// Solves the small dense system `a·x = b` by Gaussian elimination with
/// partial pivoting; `None` when singular.
fn solve<T: Float, const N: usize>(mut a: [[T; N]; N], mut b: [T; N]) -> Option<[T; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())?;
        if a[pivot][col].abs() <= T::epsilon() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for (offset, row) in lower.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            for (x, &p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x = *x - f * p;
            }
            b[col + 1 + offset] = b[col + 1 + offset] - f * b[col];
        }
    }
    let mut x = [T::zero(); N];
    for row in (0..N).rev() {
        let tail = (row + 1..N).fold(T::zero(), |acc, k| acc + a[row][k] * x[k]);
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

fn normal_fit<T: Float, const N: usize>(ys: &[T]) -> Option<[T; N]> {
    // Fit over t = i / scale to keep the normal equations well conditioned,
    // then map the coefficients back to powers of i.
    let scale = T::from(ys.len().max(2) - 1)?;
    let mut a = [[T::zero(); N]; N];
    let mut b = [T::zero(); N];
    for (i, &y) in ys.iter().enumerate() {
        let t = T::from(i)? / scale;
        let mut pow = [T::one(); N];
        for k in 1..N {
            pow[k] = pow[k - 1] * t;
        }
        for r in 0..N {
            for c in 0..N {
                a[r][c] = a[r][c] + pow[r] * pow[c];
            }
            b[r] = b[r] + pow[r] * y;
        }
    }
    let mut x = solve(a, b)?;
    let mut s = T::one();
    for coeff in x.iter_mut() {
        *coeff = *coeff / s;
        s = s * scale;
    }
    Some(x)
}

/// Least-squares polynomial of exactly the given degree (0, 1 or 2);
/// `None` if there are fewer points than coefficients.
pub fn fit_degree<T: Float>(ys: &[T], degree: usize) -> Option<Poly<T>> {
    if ys.len() <= degree {
        return None;
    }
    let z = T::zero();
    Some(match degree {
        0 => {
            let mean = ys.iter().fold(z, |acc, &y| acc + y) / T::from(ys.len())?;
            Poly::constant(mean)
        }
        1 => {
            let [c0, c1] = normal_fit::<T, 2>(ys)?;
            Poly { coeffs: [c0, c1, z] }
        }
        2 => Poly { coeffs: normal_fit::<T, 3>(ys)? },
        _ => return None,
    })
}

/// The lowest-degree fit (trying 0, then 1, then 2) whose maximum residual
/// is within `eps`, after zeroing coefficients that are negligible.
pub fn fit_lowest<T: Float>(ys: &[T], eps: T) -> Option<Poly<T>> {
    (0..=2).find_map(|d| {
        let mut p = fit_degree(ys, d)?;
        if p.max_residual(ys) > eps {
            return None;
        }
        for k in 0..3 {
            if !p.coeffs[k].is_zero() && p.coeffs[k].abs() < eps {
                let mut q = p;
                q.coeffs[k] = T::zero();
                if q.max_residual(ys) <= eps {
                    p = q;
                }
            }
        }
        Some(p)
    })
}
