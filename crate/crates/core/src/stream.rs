//! Streaming application of a BLT matrix and correlated-noise generation.
//!
//! Multiplying by an `n x n` BLT never needs the matrix: each geometric
//! channel keeps one width-`m` buffer holding the decayed history
//! `S_i = sum_{tau < t} lambda_i^(t-1-tau) x_tau`, so one step costs
//! `O(d m)` time and memory regardless of `t`. The same buffers solve
//! `C x = y` by rearranging the output equation, which is how correlated
//! noise rows `(C^-1 Z)[t, :]` are produced without ever materializing
//! anything.

use std::io::{self, Read, Write};

use crate::blt::{BltParams, InverseBltParams};
use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// Per-channel recurrence buffers for one streaming pass.
///
/// A state must be driven by exactly one of [`StreamState::step_multiply`] or
/// [`StreamState::step_solve`]; mixing them on one instance interleaves two
/// different recurrences. Instances are single-owner mutable: one state must
/// not be stepped concurrently, but distinct states are independent.
#[derive(Clone, Debug)]
pub struct StreamState {
    alpha: Vec<f64>,
    lambda: Vec<f64>,
    buffers: Vec<Vec<f64>>,
    width: usize,
    t: usize,
}

impl StreamState {
    /// Fresh state (all buffers zero, step counter at 1) for vectors of
    /// width `m`.
    pub fn new(params: &BltParams, m: usize) -> Self {
        assert!(m >= 1, "vector width must be at least 1");
        Self {
            alpha: params.alpha().to_vec(),
            lambda: params.lambda().to_vec(),
            buffers: vec![vec![0.0; m]; params.d()],
            width: m,
            t: 1,
        }
    }

    /// Step counter of the next step (starts at 1).
    pub fn t(&self) -> usize {
        self.t
    }

    /// Buffer of channel `i`, exposed for invariant checks.
    pub fn buffer(&self, i: usize) -> &[f64] {
        &self.buffers[i]
    }

    fn check_width(&self, len: usize) -> Result<()> {
        if len != self.width {
            return Err(Error::DimensionMismatch {
                expected: self.width,
                got: len,
            });
        }
        Ok(())
    }

    fn read_buffers(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.width];
        for (a, buf) in self.alpha.iter().zip(&self.buffers) {
            for (slot, b) in acc.iter_mut().zip(buf) {
                *slot += a * b;
            }
        }
        acc
    }

    fn update_buffers(&mut self, x: &[f64]) {
        for (l, buf) in self.lambda.iter().zip(&mut self.buffers) {
            for (slot, xv) in buf.iter_mut().zip(x) {
                *slot = l * *slot + xv;
            }
        }
        self.t += 1;
    }

    /// One step of `y = C x`: returns `y_t = x_t + sum_i alpha_i S_i` and
    /// absorbs `x_t` into the buffers.
    pub fn step_multiply(&mut self, x_t: &[f64]) -> Result<Vec<f64>> {
        self.check_width(x_t.len())?;
        let mut y = self.read_buffers();
        for (slot, xv) in y.iter_mut().zip(x_t) {
            *slot += xv;
        }
        self.update_buffers(x_t);
        Ok(y)
    }

    /// One step of solving `C x = y`: returns `x_t = y_t - sum_i alpha_i S_i`
    /// and absorbs the recovered `x_t` into the buffers.
    pub fn step_solve(&mut self, y_t: &[f64]) -> Result<Vec<f64>> {
        self.check_width(y_t.len())?;
        let read = self.read_buffers();
        let x: Vec<f64> = y_t.iter().zip(&read).map(|(y, r)| y - r).collect();
        self.update_buffers(&x);
        Ok(x)
    }
}

/// Noise calibration for the correlated noise mechanism.
///
/// Each raw noise entry is drawn i.i.d. Gaussian with standard deviation
/// `sensitivity * sigma`. When a zCDP budget `rho` is given, the multiplier
/// is `sigma = sqrt(1 / (2 rho))`.
///
/// The generator behind this is reproducible, not cryptographic; see
/// [`crate::rng`]. Production privacy deployments need a secure noise source,
/// which is out of scope here.
#[derive(Clone, Debug)]
pub struct NoiseConfig {
    /// Noise multiplier.
    pub sigma: f64,
    /// Optional zCDP budget that `sigma` was calibrated from.
    pub rho: Option<f64>,
    /// L2 sensitivity of the matrix being protected.
    pub sensitivity: f64,
    /// Seed for the counter-based generator.
    pub seed: u64,
    /// Output vector width.
    pub m: usize,
}

impl NoiseConfig {
    /// Config from an explicit noise multiplier.
    pub fn new(sigma: f64, sensitivity: f64, seed: u64, m: usize) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParams(format!(
                "sigma = {sigma} must be >= 0"
            )));
        }
        if !sensitivity.is_finite() || sensitivity < 0.0 {
            return Err(Error::InvalidParams(format!(
                "sensitivity = {sensitivity} must be >= 0"
            )));
        }
        if m == 0 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        Ok(Self {
            sigma,
            rho: None,
            sensitivity,
            seed,
            m,
        })
    }

    /// Config calibrated from a zCDP budget: `sigma^2 = 1 / (2 rho)`.
    pub fn from_rho(rho: f64, sensitivity: f64, seed: u64, m: usize) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::InvalidParams(format!("rho = {rho} must be > 0")));
        }
        let mut cfg = Self::new((1.0 / (2.0 * rho)).sqrt(), sensitivity, seed, m)?;
        cfg.rho = Some(rho);
        Ok(cfg)
    }

    /// Standard deviation of each raw noise entry.
    pub fn noise_std(&self) -> f64 {
        self.sensitivity * self.sigma
    }
}

/// Infinite stream of i.i.d. Gaussian rows from the seeded generator.
#[derive(Clone, Debug)]
pub struct GaussianRows {
    rng: CounterRng,
    m: usize,
    std_dev: f64,
}

impl GaussianRows {
    pub fn new(cfg: &NoiseConfig) -> Self {
        Self {
            rng: CounterRng::new(cfg.seed),
            m: cfg.m,
            std_dev: cfg.noise_std(),
        }
    }
}

impl Iterator for GaussianRows {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let mut row = vec![0.0; self.m];
        self.rng.fill_normal(&mut row, self.std_dev);
        Some(row)
    }
}

/// Rows of `C^-1 Z` for any raw row source `Z`.
///
/// Generic over the source so tests can inject a fixed `Z` and compare
/// against a dense computation on the same realization.
#[derive(Debug)]
pub struct CorrelatedRows<S> {
    state: StreamState,
    source: S,
    remaining: usize,
}

impl<S: Iterator<Item = Vec<f64>>> CorrelatedRows<S> {
    /// Applies the inverse BLT to `steps` rows drawn from `source`.
    pub fn new(inv: &InverseBltParams, m: usize, source: S, steps: usize) -> Self {
        Self {
            state: StreamState::new(&inv.to_params(), m),
            source,
            remaining: steps,
        }
    }
}

impl<S: Iterator<Item = Vec<f64>>> Iterator for CorrelatedRows<S> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let z = self.source.next()?;
        Some(
            self.state
                .step_multiply(&z)
                .expect("source width matches state"),
        )
    }
}

/// Seeded correlated noise: `steps` rows of `C^-1 Z` with `Z` i.i.d. Gaussian
/// of standard deviation `sensitivity * sigma`. Deterministic per seed.
pub fn noise_rows(
    inv: &InverseBltParams,
    cfg: &NoiseConfig,
    steps: usize,
) -> CorrelatedRows<GaussianRows> {
    CorrelatedRows::new(inv, cfg.m, GaussianRows::new(cfg), steps)
}

const DUMP_MAGIC: &[u8; 4] = b"BLTN";

/// Writes rows as the binary dump format: a 16-byte header (magic `BLTN`,
/// little-endian `u32` row count, `u32` width, 4 reserved zero bytes)
/// followed by row-major little-endian `f64` values.
pub fn write_rows<W: Write>(w: &mut W, rows: &[Vec<f64>]) -> io::Result<()> {
    let n = rows.len() as u32;
    let m = rows.first().map_or(0, Vec::len) as u32;
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&m.to_le_bytes())?;
    w.write_all(&[0u8; 4])?;
    for row in rows {
        debug_assert_eq!(row.len(), m as usize);
        for v in row {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a binary row dump written by [`write_rows`].
pub fn read_rows<R: Read>(r: &mut R) -> io::Result<Vec<Vec<f64>>> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[0..4] != DUMP_MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad magic"));
    }
    let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let m = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let mut rows = Vec::with_capacity(n);
    let mut buf = [0u8; 8];
    for _ in 0..n {
        let mut row = Vec::with_capacity(m);
        for _ in 0..m {
            r.read_exact(&mut buf)?;
            row.push(f64::from_le_bytes(buf));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blt::{invert_params, toeplitz_coeffs};

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len(), "got {got:?}, want {want:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol, "got {got:?}, want {want:?}");
        }
    }

    #[test]
    fn multiply_scalar_stream_of_ones() {
        let p = BltParams::new(vec![0.4, 0.2], vec![0.8, 0.4]).unwrap();
        let mut state = StreamState::new(&p, 1);
        let mut ys = Vec::new();
        for _ in 0..3 {
            ys.push(state.step_multiply(&[1.0]).unwrap()[0]);
        }
        assert_close(&ys, &[1.0, 1.6, 2.0], 1e-15);
    }

    #[test]
    fn impulse_response_is_coefficient_column() {
        let p = BltParams::new(vec![0.3, 0.15], vec![0.9, 0.5]).unwrap();
        let n = 16;
        let mut state = StreamState::new(&p, 1);
        let mut column = vec![state.step_multiply(&[1.0]).unwrap()[0]];
        for _ in 1..n {
            column.push(state.step_multiply(&[0.0]).unwrap()[0]);
        }
        assert_close(&column, &toeplitz_coeffs(&p, n), 1e-14);
    }

    #[test]
    fn zero_scales_are_identity() {
        let p = BltParams::new(vec![0.0, 0.0], vec![0.7, 0.2]).unwrap();
        let mut mul = StreamState::new(&p, 2);
        let mut solve = StreamState::new(&p, 2);
        for t in 0..5 {
            let x = vec![t as f64, -1.5 * t as f64];
            assert_eq!(mul.step_multiply(&x).unwrap(), x);
            assert_eq!(solve.step_solve(&x).unwrap(), x);
        }
    }

    #[test]
    fn solve_impulse_gives_inverse_column() {
        let p = BltParams::new(vec![0.4, 0.2], vec![0.8, 0.4]).unwrap();
        let mut state = StreamState::new(&p, 1);
        let mut column = vec![state.step_solve(&[1.0]).unwrap()[0]];
        for _ in 1..4 {
            column.push(state.step_solve(&[0.0]).unwrap()[0]);
        }
        assert_close(&column, &[1.0, -0.6, -0.04, -0.024], 1e-14);
    }

    #[test]
    fn solve_round_trips_multiply() {
        let p = BltParams::new(
            vec![0.2, 0.15, 0.1, 0.05, 0.05, 0.05],
            vec![0.95, 0.8, 0.65, 0.5, 0.35, 0.2],
        )
        .unwrap();
        let mut rng = crate::rng::CounterRng::new(5);
        let mut mul = StreamState::new(&p, 3);
        let mut solve = StreamState::new(&p, 3);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            let y = mul.step_multiply(&x).unwrap();
            let back = solve.step_solve(&y).unwrap();
            for (b, xv) in back.iter().zip(&x) {
                worst = worst.max((b - xv).abs());
            }
        }
        assert!(worst <= 1e-10, "round-trip error {worst}");
    }

    #[test]
    fn solve_matches_multiply_by_inverse_params() {
        let p = BltParams::new(vec![0.2, 0.1], vec![0.8, 0.4]).unwrap();
        let inv = invert_params(&p).unwrap();
        let mut solve = StreamState::new(&p, 2);
        let mut mul_inv = StreamState::new(&inv.to_params(), 2);
        let mut rng = crate::rng::CounterRng::new(9);
        for _ in 0..1000 {
            let y: Vec<f64> = (0..2).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            let a = solve.step_solve(&y).unwrap();
            let b = mul_inv.step_multiply(&y).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn buffers_hold_discounted_history() {
        let p = BltParams::new(vec![0.3, 0.2], vec![0.9, 0.4]).unwrap();
        let mut state = StreamState::new(&p, 1);
        assert_eq!(state.buffer(0), &[0.0]);
        let xs: Vec<f64> = (0..100).map(|t| ((t * 7919) % 13) as f64 - 6.0).collect();
        for (idx, &x) in xs.iter().enumerate() {
            let t = idx + 1;
            for (i, &l) in p.lambda().iter().enumerate() {
                let want: f64 = (1..t)
                    .map(|tau| l.powi((t - 1 - tau) as i32) * xs[tau - 1])
                    .sum();
                if [1, 2, 10, 100].contains(&t) {
                    assert!(
                        (state.buffer(i)[0] - want).abs() <= 1e-12 * (1.0 + want.abs()),
                        "buffer {i} at t = {t}"
                    );
                }
            }
            state.step_multiply(&[x]).unwrap();
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = BltParams::new(vec![0.5], vec![0.8]).unwrap();
        let mut state = StreamState::new(&p, 2);
        assert!(matches!(
            state.step_multiply(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn noise_rows_deterministic_per_seed() {
        let p = BltParams::new(vec![0.2, 0.1], vec![0.8, 0.4]).unwrap();
        let inv = invert_params(&p).unwrap();
        let cfg = NoiseConfig::new(1.5, 2.0, 1234, 3).unwrap();
        let a: Vec<Vec<f64>> = noise_rows(&inv, &cfg, 64).collect();
        let b: Vec<Vec<f64>> = noise_rows(&inv, &cfg, 64).collect();
        assert_eq!(a, b);
        let other = NoiseConfig::new(1.5, 2.0, 1235, 3).unwrap();
        let c: Vec<Vec<f64>> = noise_rows(&inv, &other, 64).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_sigma_gives_zero_rows() {
        let p = BltParams::new(vec![0.5], vec![0.8]).unwrap();
        let inv = invert_params(&p).unwrap();
        let cfg = NoiseConfig::new(0.0, 1.0, 7, 2).unwrap();
        for row in noise_rows(&inv, &cfg, 32) {
            assert_eq!(row, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn impulse_source_yields_inverse_coefficients() {
        let p = BltParams::new(vec![0.5], vec![0.8]).unwrap();
        let inv = invert_params(&p).unwrap();
        let impulse = std::iter::once(vec![1.0]).chain(std::iter::repeat_with(|| vec![0.0]));
        let rows: Vec<f64> = CorrelatedRows::new(&inv, 1, impulse, 5)
            .map(|row| row[0])
            .collect();
        assert_close(&rows, &[1.0, -0.5, -0.15, -0.045, -0.0135], 1e-14);
    }

    #[test]
    fn rho_calibration() {
        let cfg = NoiseConfig::from_rho(0.125, 1.0, 0, 1).unwrap();
        assert!((cfg.sigma - 2.0).abs() < 1e-15);
        assert!(NoiseConfig::from_rho(0.0, 1.0, 0, 1).is_err());
    }

    #[test]
    fn gaussian_scale_is_calibrated() {
        let cfg = NoiseConfig::new(0.5, 3.0, 99, 1).unwrap();
        let mut src = GaussianRows::new(&cfg);
        let n = 1_000_000;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let v = src.next().unwrap()[0];
            sum_sq += v * v;
        }
        let std = (sum_sq / n as f64).sqrt();
        let want = cfg.noise_std();
        assert!((std - want).abs() <= 0.01 * want, "std {std} want {want}");
    }

    #[test]
    fn dump_round_trip() {
        let rows = vec![
            vec![1.0, -2.5],
            vec![0.25, 1e-300],
            vec![f64::MIN, f64::MAX],
        ];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        assert_eq!(&buf[0..4], b"BLTN");
        assert_eq!(buf.len(), 16 + 8 * 6);
        let back = read_rows(&mut buf.as_slice()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn dump_reader_rejects_wrong_magic() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[vec![1.0]]).unwrap();
        buf[0] = b'X';
        assert!(read_rows(&mut buf.as_slice()).is_err());
    }
}
