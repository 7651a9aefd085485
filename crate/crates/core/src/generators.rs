//! Matrix ensembles: the E1–E4 examples, two-level and uniform-spectrum
//! diagonals, Haar-random orthogonal conjugation, and Wishart sample
//! covariances. All are pure functions of their arguments and seed.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, householder_qr, make_spd, SpdMatrix, SquareMatrix};
use crate::rng::{stream, Gaussian};
use crate::scalar::{lit, to_f64, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GeneratorKind {
    E1,
    E2,
    E3,
    E4,
    TwoLevelDiagonal,
    UniformSpectrum,
    Wishart,
    Custom,
}

impl std::str::FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(
            match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
                "e1" => Self::E1,
                "e2" => Self::E2,
                "e3" => Self::E3,
                "e4" => Self::E4,
                "twolevel" | "twoleveldiagonal" => Self::TwoLevelDiagonal,
                "uniform" | "uniformspectrum" => Self::UniformSpectrum,
                "wishart" => Self::Wishart,
                "custom" => Self::Custom,
                _ => return Err(Error::BadArguments(format!("unknown generator kind `{s}`"))),
            },
        )
    }
}

/// Full description of a generated matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec<T> {
    pub kind: GeneratorKind,
    pub n: usize,
    pub kappa: T,
    /// Number of eigenvalues set to κ (two-level diagonal only).
    pub ell_split: Option<usize>,
    /// Wishart degrees of freedom; defaults to `2n`.
    pub degrees_of_freedom: Option<usize>,
    /// Eigenvalues for [`GeneratorKind::Custom`].
    pub spectrum: Option<Vec<T>>,
    pub seed: u64,
}

impl<T: Scalar> GeneratorSpec<T> {
    pub fn new(kind: GeneratorKind, n: usize, kappa: T, seed: u64) -> Self {
        Self {
            kind,
            n,
            kappa,
            ell_split: None,
            degrees_of_freedom: None,
            spectrum: None,
            seed,
        }
    }

    pub fn generate(&self) -> Result<SpdMatrix<T>> {
        if self.kind != GeneratorKind::Custom && self.n < 2 {
            return Err(Error::DimensionTooSmall { n: self.n, min: 2 });
        }
        match self.kind {
            GeneratorKind::E1 => gen_e1(self.n, self.kappa),
            GeneratorKind::E2 => gen_e2(self.n, self.kappa, self.seed),
            GeneratorKind::E3 => gen_e3(self.n, self.kappa, self.seed),
            GeneratorKind::E4 => gen_e4(self.n, self.kappa, self.seed),
            GeneratorKind::TwoLevelDiagonal => {
                let ell = self.ell_split.ok_or_else(|| {
                    Error::BadArguments("two-level diagonal needs ell_split".into())
                })?;
                gen_two_level_diagonal(self.n, self.kappa, ell)
            }
            GeneratorKind::UniformSpectrum => gen_uniform_spectrum(self.n, self.kappa, self.seed),
            GeneratorKind::Wishart => {
                let dof = self.degrees_of_freedom.unwrap_or(2 * self.n);
                let scale = make_spd(SquareMatrix::identity(self.n))?;
                gen_wishart(self.n, dof, &scale, self.seed)
            }
            GeneratorKind::Custom => {
                let spectrum = self.spectrum.as_ref().ok_or_else(|| {
                    Error::BadArguments("custom generator needs a spectrum".into())
                })?;
                make_spd(SquareMatrix::from_diagonal(spectrum))
            }
        }
    }
}

fn check_kappa<T: Scalar>(kappa: T) -> Result<()> {
    if !(kappa >= T::one()) || !kappa.is_finite() {
        return Err(Error::KappaBelowOne(to_f64(kappa)));
    }
    Ok(())
}

/// E1: `n/2` eigenvalues equal to κ, the rest equal to 1.
pub fn gen_e1<T: Scalar>(n: usize, kappa: T) -> Result<SpdMatrix<T>> {
    if !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    if n == 0 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    gen_two_level_diagonal(n, kappa, n / 2)
}

/// `ell_split` eigenvalues κ followed by `n - ell_split` ones.
pub fn gen_two_level_diagonal<T: Scalar>(
    n: usize,
    kappa: T,
    ell_split: usize,
) -> Result<SpdMatrix<T>> {
    if ell_split < 1 || ell_split >= n {
        return Err(Error::BadSplit { ell: ell_split, n });
    }
    check_kappa(kappa)?;
    let diag: Vec<T> = (0..n)
        .map(|i| if i < ell_split { kappa } else { T::one() })
        .collect();
    make_spd(SquareMatrix::from_diagonal(&diag))
}

/// E2 spectrum: `κ`, `n - 2` uniform draws on `[1, κ]`, then `1`; sorted descending.
pub fn e2_spectrum<T: Scalar>(n: usize, kappa: T, seed: u64) -> Result<Vec<T>> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    if !(kappa > T::one()) || !kappa.is_finite() {
        return Err(Error::KappaNotAboveOne(to_f64(kappa)));
    }
    let mut rng = stream(seed, "e2-spectrum", 0);
    Ok(pinned_uniform_spectrum(n, kappa, &mut rng))
}

pub(crate) fn pinned_uniform_spectrum<T: Scalar, R: Rng>(
    n: usize,
    kappa: T,
    rng: &mut R,
) -> Vec<T> {
    let span = kappa - T::one();
    let mut spectrum = Vec::with_capacity(n);
    spectrum.push(kappa);
    for _ in 0..n.saturating_sub(2) {
        spectrum.push(T::one() + span * lit::<T>(rng.gen::<f64>()));
    }
    spectrum.push(T::one());
    spectrum.sort_by(|a, b| b.partial_cmp(a).unwrap());
    spectrum
}

/// E2: diagonal with pinned extremes and uniform interior eigenvalues.
pub fn gen_e2<T: Scalar>(n: usize, kappa: T, seed: u64) -> Result<SpdMatrix<T>> {
    make_spd(SquareMatrix::from_diagonal(&e2_spectrum(n, kappa, seed)?))
}

/// Diagonal with all `n` eigenvalues uniform on `[1, κ]` (so `κ(M) <= κ`).
pub fn gen_uniform_spectrum<T: Scalar>(n: usize, kappa: T, seed: u64) -> Result<SpdMatrix<T>> {
    check_kappa(kappa)?;
    let mut rng = stream(seed, "uniform-spectrum", 0);
    let span = kappa - T::one();
    let mut diag: Vec<T> = (0..n)
        .map(|_| T::one() + span * lit::<T>(rng.gen::<f64>()))
        .collect();
    diag.sort_by(|a, b| b.partial_cmp(a).unwrap());
    make_spd(SquareMatrix::from_diagonal(&diag))
}

/// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
/// each column of `Q` multiplied by the sign of the matching `R` diagonal entry.
pub fn gen_haar_orthogonal<T: Scalar>(n: usize, seed: u64) -> SquareMatrix<T> {
    haar_from_stream(n, &mut Gaussian::new(stream(seed, "haar", 0)))
}

pub(crate) fn haar_from_stream<T: Scalar, R: Rng>(
    n: usize,
    g: &mut Gaussian<R>,
) -> SquareMatrix<T> {
    let z = SquareMatrix::from_row_major(n, (0..n * n).map(|_| lit::<T>(g.draw())).collect())
        .expect("n*n entries");
    let (mut q, r_diag) = householder_qr(&z);
    for (j, d) in r_diag.into_iter().enumerate() {
        if d < T::zero() {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// `Qᵀ D Q` for diagonal `d`, symmetrized.
pub(crate) fn conjugate_diagonal<T: Scalar>(d: &[T], q: &SquareMatrix<T>) -> SquareMatrix<T> {
    let n = d.len();
    let mut out = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut s = T::zero();
            for (l, &dl) in d.iter().enumerate() {
                s = s + q[(l, i)] * dl * q[(l, j)];
            }
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    out
}

/// E3: Haar conjugation of E1.
pub fn gen_e3<T: Scalar>(n: usize, kappa: T, seed: u64) -> Result<SpdMatrix<T>> {
    let d = gen_e1(n, kappa)?.entries().diagonal();
    let q = gen_haar_orthogonal::<T>(n, seed);
    make_spd(conjugate_diagonal(&d, &q))
}

/// E4: Haar conjugation of E2 (both drawn from streams derived from `seed`).
pub fn gen_e4<T: Scalar>(n: usize, kappa: T, seed: u64) -> Result<SpdMatrix<T>> {
    let d = e2_spectrum(n, kappa, seed)?;
    let q = gen_haar_orthogonal::<T>(n, seed);
    make_spd(conjugate_diagonal(&d, &q))
}

/// Wishart `W_n(V, n_f)` normalized by `n_f`: `n_f⁻¹ Σ x_i x_iᵀ`, `x_i ~ N(0, V)`.
pub fn gen_wishart<T: Scalar>(
    n: usize,
    degrees_of_freedom: usize,
    scale: &SpdMatrix<T>,
    seed: u64,
) -> Result<SpdMatrix<T>> {
    if scale.dim() != n {
        return Err(Error::BadArguments(format!(
            "scale matrix is {}x{}, expected {n}x{n}",
            scale.dim(),
            scale.dim()
        )));
    }
    if degrees_of_freedom < n {
        return Err(Error::DegreesOfFreedomTooSmall {
            dof: degrees_of_freedom,
            n,
        });
    }
    let l = cholesky(scale.entries())?;
    let mut g = Gaussian::new(stream(seed, "wishart", 0));
    let mut acc = vec![0.0f64; n * n];
    let mut z = vec![T::zero(); n];
    let mut x = vec![0.0f64; n];
    for _ in 0..degrees_of_freedom {
        for zi in z.iter_mut() {
            *zi = lit(g.draw());
        }
        for i in 0..n {
            let mut s = T::zero();
            for j in 0..=i {
                s = s + l[(i, j)] * z[j];
            }
            x[i] = to_f64(s);
        }
        for i in 0..n {
            for j in i..n {
                acc[i * n + j] += x[i] * x[j];
            }
        }
    }
    let dof = degrees_of_freedom as f64;
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v: T = lit(acc[i * n + j] / dof);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    make_spd(m)
}
