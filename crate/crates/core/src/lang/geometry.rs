use std::ops::Mul;

use crate::scalar::Scalar;

/// A homogeneous 4×4 affine transform. Only the top three rows are stored;
/// the bottom row is always `[0, 0, 0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMatrix<T> {
    rows: [[T; 4]; 3],
}

impl<T: Scalar> AffineMatrix<T> {
    pub fn identity() -> Self {
        let e = |r: usize, c: usize| if r == c { T::one() } else { T::zero() };
        AffineMatrix { rows: std::array::from_fn(|r| std::array::from_fn(|c| e(r, c))) }
    }

    pub fn translation([x, y, z]: [T; 3]) -> Self {
        let mut m = Self::identity();
        m.rows[0][3] = x;
        m.rows[1][3] = y;
        m.rows[2][3] = z;
        m
    }

    pub fn scaling([x, y, z]: [T; 3]) -> Self {
        let mut m = Self::identity();
        m.rows[0][0] = x;
        m.rows[1][1] = y;
        m.rows[2][2] = z;
        m
    }

    /// `Rz · Ry · Rx` for angles in degrees; `None` when the scalar type
    /// cannot represent the required sines and cosines.
    pub fn rotation_degrees([x, y, z]: [T; 3]) -> Option<Self> {
        let (sx, cx) = x.sin_cos_degrees()?;
        let (sy, cy) = y.sin_cos_degrees()?;
        let (sz, cz) = z.sin_cos_degrees()?;
        let o = T::zero;
        let i = T::one;
        let rx = Self::from_linear([[i(), o(), o()], [o(), cx.clone(), -sx.clone()], [o(), sx, cx]]);
        let ry = Self::from_linear([[cy.clone(), o(), sy.clone()], [o(), i(), o()], [-sy, o(), cy]]);
        let rz = Self::from_linear([[cz.clone(), -sz.clone(), o()], [sz, cz, o()], [o(), o(), i()]]);
        Some(&(&rz * &ry) * &rx)
    }

    fn from_linear(m: [[T; 3]; 3]) -> Self {
        let rows = m.map(|[a, b, c]| [a, b, c, T::zero()]);
        AffineMatrix { rows }
    }

    pub fn entry(&self, row: usize, col: usize) -> T {
        match row {
            0..=2 => self.rows[row][col].clone(),
            _ if col == 3 => T::one(),
            _ => T::zero(),
        }
    }

    /// The twelve stored entries, row-major.
    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.rows.iter().flatten()
    }

    pub fn transform_point(&self, p: &[T; 3]) -> [T; 3] {
        std::array::from_fn(|r| {
            let row = &self.rows[r];
            row[0].clone() * p[0].clone() + row[1].clone() * p[1].clone() + row[2].clone() * p[2].clone() + row[3].clone()
        })
    }

    /// True when every entry differs by at most `eps`.
    pub fn approx_eq(&self, other: &Self, eps: &T) -> bool {
        self.entries().zip(other.entries()).all(|(a, b)| (a.clone() - b.clone()).abs() <= *eps)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> AffineMatrix<U> {
        AffineMatrix { rows: std::array::from_fn(|r| std::array::from_fn(|c| f(&self.rows[r][c]))) }
    }
}

impl<T: Scalar> Mul for &AffineMatrix<T> {
    type Output = AffineMatrix<T>;

    fn mul(self, rhs: &AffineMatrix<T>) -> AffineMatrix<T> {
        let rows = std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                (0..4).fold(T::zero(), |acc, k| acc + self.entry(r, k) * rhs.entry(k, c))
            })
        });
        AffineMatrix { rows }
    }
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;
    use num_traits::FromPrimitive;

    use super::*;

    #[test]
    fn rotation_composes_z_after_x() {
        // Rotating +y by 90° about x gives +z; then 90° about z leaves it.
        let m = AffineMatrix::<f64>::rotation_degrees([90.0, 0.0, 90.0]).unwrap();
        assert_eq!(m.transform_point(&[0.0, 1.0, 0.0]), [0.0, 0.0, 1.0]);
        // +x: about x unchanged, then about z to +y.
        assert_eq!(m.transform_point(&[1.0, 0.0, 0.0]), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn half_turn_equals_mirror_scale_exactly() {
        let r = |v: f64| BigRational::from_f64(v).unwrap();
        let rot = AffineMatrix::rotation_degrees([r(0.0), r(0.0), r(180.0)]).unwrap();
        let scale = AffineMatrix::scaling([r(-1.0), r(-1.0), r(1.0)]);
        assert_eq!(rot, scale);
    }

    #[test]
    fn scale_translate_interchange() {
        let s = AffineMatrix::<f64>::scaling([2.0, 3.0, 4.0]);
        let t = AffineMatrix::translation([1.0, 1.0, 1.0]);
        let t2 = AffineMatrix::translation([2.0, 3.0, 4.0]);
        assert_eq!(&s * &t, &t2 * &s);
    }
}
