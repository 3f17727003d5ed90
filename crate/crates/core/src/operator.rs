//! Dense complex operators on multi-qubit Hilbert spaces.
//!
//! Qubits are labelled from 1 and qubit 1 is the leftmost Kronecker factor,
//! so basis index `b` of an `n`-qubit register reads the state of qubit `k`
//! from bit `n - k` of `b`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Relative tolerance for treating a sample as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A square complex matrix acting on `dim = 2^n` states.
#[derive(Clone, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Operator(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Operator(DMatrix::identity(dim, dim))
    }

    /// Builds an operator from `dim * dim` entries in row-major order.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {dim}x{dim} operator, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Operator(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let entries: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_major(dim, &entries)
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = DMatrix::zeros(diag.len(), diag.len());
        for (k, &d) in diag.iter().enumerate() {
            m[(k, k)] = d;
        }
        Operator(m)
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Operator(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<C64> {
        self.0.transpose().iter().copied().collect()
    }

    pub fn dagger(&self) -> Self {
        Operator(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, c: C64) -> Self {
        Operator(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// `self += c * other`, without allocating.
    pub fn add_scaled(&mut self, c: C64, other: &Operator) {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.zip_apply(&other.0, |a, b| *a += c * b);
    }

    pub fn kron(&self, other: &Operator) -> Self {
        kron(self, other)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Operator::identity(self.dim());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// `max |H - H†|`, absolute.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.0[(r, c)] - self.0[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        let scale = self.max_abs();
        self.hermiticity_residual() <= HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE)
    }

    /// `max |U†U - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let prod = self.0.adjoint() * &self.0;
        Operator(prod).max_abs_diff(&Operator::identity(self.dim()))
    }

    fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|r| (0..n).all(|c| r == c || self.0[(r, c)] == C64::new(0.0, 0.0)))
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{})", self.dim(), self.dim())?;
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|c| {
                    let z = self.0[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        Operator(self.0 * rhs.0)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

/// Kronecker product with `a` as the leftmost factor.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    Operator(a.0.kronecker(&b.0))
}

/// Single-qubit matrices in the computational basis `(|0⟩, |1⟩)`.
pub mod pauli {
    use super::{Operator, C64, I};

    fn two(entries: [C64; 4]) -> Operator {
        Operator::from_row_major(2, &entries).expect("2x2")
    }

    pub fn identity() -> Operator {
        Operator::identity(2)
    }

    pub fn x() -> Operator {
        two([0.0.into(), 1.0.into(), 1.0.into(), 0.0.into()])
    }

    pub fn y() -> Operator {
        two([0.0.into(), -I, I, 0.0.into()])
    }

    pub fn z() -> Operator {
        two([1.0.into(), 0.0.into(), 0.0.into(), (-1.0).into()])
    }

    /// `(σˣ + iσʸ)/2 = |0⟩⟨1|`.
    pub fn plus() -> Operator {
        two([0.0.into(), 1.0.into(), 0.0.into(), 0.0.into()])
    }

    /// `(σˣ - iσʸ)/2 = |1⟩⟨0|`.
    pub fn minus() -> Operator {
        two([0.0.into(), 0.0.into(), 1.0.into(), 0.0.into()])
    }
}

/// Places a single-qubit operator on `qubit` (1-based) of an `n_qubits` register.
pub fn embed(op: &Operator, qubit: usize, n_qubits: usize) -> Operator {
    assert!(
        (1..=n_qubits).contains(&qubit),
        "qubit {qubit} outside register of {n_qubits}"
    );
    assert_eq!(op.dim(), 2, "embed expects a single-qubit operator");
    let mut acc = Operator::identity(1);
    for k in 1..=n_qubits {
        let factor = if k == qubit { op.clone() } else { pauli::identity() };
        acc = kron(&acc, &factor);
    }
    acc
}

/// Product of single-qubit operators on two distinct qubits.
pub fn embed_pair(a: &Operator, qa: usize, b: &Operator, qb: usize, n_qubits: usize) -> Operator {
    assert_ne!(qa, qb);
    &embed(a, qa, n_qubits) * &embed(b, qb, n_qubits)
}

/// `exp(-i h dt)` for Hermitian `h`, through its eigendecomposition.
pub fn matrix_exp_skew_hermitian(h: &Operator, dt: f64) -> Result<Operator> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian {
            residual: h.hermiticity_residual(),
            time: None,
        });
    }
    Ok(exp_hermitian_unchecked(h, dt))
}

pub(crate) fn exp_hermitian_unchecked(h: &Operator, dt: f64) -> Operator {
    if h.is_diagonal() {
        let diag: Vec<C64> = (0..h.dim())
            .map(|k| (-I * h.get(k, k).re * dt).exp())
            .collect();
        return Operator::from_diagonal(&diag);
    }
    // scaling and squaring with a Taylor series for exp(-iHdt)
    let n = h.dim();
    let x = h.0.map(|z| -I * z * dt);
    let norm = (0..n)
        .map(|c| x.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let y = x / C64::new(2f64.powi(squarings), 0.0);
    let mut sum = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &y / C64::new(k as f64, 0.0);
        sum += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Operator(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let k = kron(&pauli::identity(), &pauli::identity());
        assert_eq!(k, Operator::identity(4));
    }

    #[test]
    fn kron_orders_qubit_one_leftmost() {
        let k = kron(&pauli::z(), &pauli::identity());
        let expected = Operator::from_real_rows(
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, -1.0, 0.0, //
                0.0, 0.0, 0.0, -1.0,
            ],
        )
        .unwrap();
        assert_eq!(k, expected);
    }

    #[test]
    fn kron_plus_minus_single_entry() {
        // |0⟩₁|1⟩₂ is basis index 1, |1⟩₁|0⟩₂ is index 2.
        let k = kron(&pauli::plus(), &pauli::minus());
        for r in 0..4 {
            for col in 0..4 {
                let expected = if (r, col) == (1, 2) { c(1.0, 0.0) } else { c(0.0, 0.0) };
                assert_eq!(k.get(r, col), expected, "entry ({r},{col})");
            }
        }
    }

    #[test]
    fn embed_matches_explicit_kron() {
        let e = embed(&pauli::x(), 2, 3);
        let k = kron(&kron(&pauli::identity(), &pauli::x()), &pauli::identity());
        assert_eq!(e, k);
    }

    #[test]
    fn row_major_roundtrip_and_length_check() {
        let entries: Vec<C64> = (0..16).map(|k| c(k as f64, -(k as f64))).collect();
        let op = Operator::from_row_major(4, &entries).unwrap();
        assert_eq!(op.get(1, 2), c(6.0, -6.0));
        assert_eq!(op.to_row_major(), entries);
        assert!(Operator::from_row_major(4, &entries[..15]).is_err());
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let u = matrix_exp_skew_hermitian(&Operator::zeros(4), 0.7).unwrap();
        assert_eq!(u, Operator::identity(4));
    }

    #[test]
    fn exp_of_diagonal_is_exact() {
        let delta = 0.31;
        let dt = 0.37;
        let h = pauli::z().scale_real(delta / 2.0);
        let u = matrix_exp_skew_hermitian(&h, dt).unwrap();
        assert_eq!(u.get(0, 0), (-I * (delta / 2.0) * dt).exp());
        assert_eq!(u.get(1, 1), (I * (delta / 2.0) * dt).exp());
        assert_eq!(u.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn exp_of_sigma_x_quarter_turn() {
        // exp(-i (π/2) σx) = -i σx
        let omega = 1.3;
        let dt = PI / 2.0 / omega;
        let u = matrix_exp_skew_hermitian(&pauli::x().scale_real(omega), dt).unwrap();
        let expected = pauli::x().scale(-I);
        assert!(u.max_abs_diff(&expected) < 1e-12, "{u:?}");
    }

    #[test]
    fn exp_rejects_non_hermitian() {
        let h = pauli::plus();
        assert!(matches!(
            matrix_exp_skew_hermitian(&h, 1.0),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn exp_of_dense_hermitian_is_unitary() {
        let h = &(&embed_pair(&pauli::plus(), 1, &pauli::minus(), 2, 2).scale(c(0.3, 0.4))
            + &embed_pair(&pauli::minus(), 1, &pauli::plus(), 2, 2).scale(c(0.3, -0.4)))
            + &embed(&pauli::x(), 1, 2).scale_real(0.9);
        let u = matrix_exp_skew_hermitian(&h, 2.5).unwrap();
        assert!(u.unitarity_residual() < 1e-13);
    }

    #[test]
    fn exp_matches_known_spectrum_on_degenerate_register() {
        // H = P D P† with a five-fold degenerate D and a product-state basis P
        let rot = |a: f64, b: f64| {
            let (s, co) = a.sin_cos();
            Operator::from_row_major(
                2,
                &[c(co, 0.0), C64::from_polar(-s, b), C64::from_polar(s, -b), c(co, 0.0)],
            )
            .unwrap()
        };
        let mut p = rot(0.3, 0.1);
        for (a, b) in [(1.1, -0.7), (0.2, 2.0), (-0.9, 0.4), (0.6, 1.3)] {
            p = p.kron(&rot(a, b));
        }
        let levels = [0.0, 0.31, -0.31, 0.31, 1.7, 0.0, -0.31, 0.0];
        let d: Vec<f64> = (0..32).map(|k| levels[k % 8]).collect();
        let h = &(&p * &Operator::from_diagonal(&d.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>()))
            * &p.dagger();
        for dt in [0.002, 0.7, 9.0] {
            let phases: Vec<C64> = d.iter().map(|&x| C64::from_polar(1.0, -x * dt)).collect();
            let want = &(&p * &Operator::from_diagonal(&phases)) * &p.dagger();
            let got = matrix_exp_skew_hermitian(&h, dt).unwrap();
            assert!(got.max_abs_diff(&want) < 1e-12, "dt = {dt}: {}", got.max_abs_diff(&want));
        }
    }
}
