//! Local descent on the unitary orbit of an ensemble.
//!
//! The iterate is the ensemble matrix `X = W S` (one unnormalized member per
//! row). Moves are `X <- exp(A) X` with `A` anti-Hermitian, which keeps
//! `sum_e |x_e><x_e|` fixed. The gradient is estimated by central differences
//! along the elementary generators `E_ab` (real and imaginary), each of which
//! exponentiates to a rotation of rows `a` and `b` only. The step uses the
//! full exponential of the gradient generator, a Barzilai-Borwein step length
//! and Armijo backtracking.

use crate::state::{eigh, CMatrix, C64};

/// Gradient norm below which a stalled line search counts as converged.
const STALL_GRADIENT: f64 = 1e-6;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const MIN_STEP: f64 = 1e-10;
const MAX_STEP: f64 = 1e4;

pub(crate) struct Settings {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub fd_step: f64,
}

pub(crate) struct LocalMinimum {
    pub rows: CMatrix,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Contribution of one unnormalized member: `p H(|x_i|^2 / p)` in bits.
fn row_term(row: &[C64]) -> f64 {
    let mut p = 0.0;
    let mut acc = 0.0;
    for z in row {
        let q = z.norm_sqr();
        if q > 0.0 {
            acc -= q * q.log2();
            p += q;
        }
    }
    if p > 0.0 {
        acc + p * p.log2()
    } else {
        0.0
    }
}

/// Row-major copy for fast row access.
struct Rows {
    data: Vec<C64>,
    d: usize,
}

impl Rows {
    fn from_matrix(x: &CMatrix) -> Self {
        let (m, d) = x.shape();
        let mut data = Vec::with_capacity(m * d);
        for e in 0..m {
            data.extend(x.row(e).iter().copied());
        }
        Self { data, d }
    }

    fn row(&self, e: usize) -> &[C64] {
        &self.data[e * self.d..(e + 1) * self.d]
    }

    fn objective(&self) -> f64 {
        self.data.chunks(self.d).map(row_term).sum()
    }
}

/// Generator kind for the pair `(a, b)`: `Re` is `|a><b| - |b><a|`,
/// `Im` is `i(|a><b| + |b><a|)`.
#[derive(Clone, Copy)]
enum Kind {
    Re,
    Im,
}

/// Objective change of rows `a`, `b` after `exp(t E_ab)`.
fn rotated_pair_terms(xa: &[C64], xb: &[C64], kind: Kind, t: f64, buf: &mut [C64]) -> f64 {
    let (c, s) = (t.cos(), t.sin());
    let d = xa.len();
    let (ra, rb) = buf.split_at_mut(d);
    match kind {
        Kind::Re => {
            for i in 0..d {
                ra[i] = xa[i] * c + xb[i] * s;
                rb[i] = xb[i] * c - xa[i] * s;
            }
        }
        Kind::Im => {
            let is = C64::new(0.0, s);
            for i in 0..d {
                ra[i] = xa[i] * c + xb[i] * is;
                rb[i] = xb[i] * c + xa[i] * is;
            }
        }
    }
    row_term(ra) + row_term(rb)
}

fn pairs(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..m).flat_map(move |a| (a + 1..m).map(move |b| (a, b)))
}

/// Central-difference gradient, ordered as `(pair, Re), (pair, Im)`.
fn gradient(rows: &Rows, m: usize, h: f64) -> Vec<f64> {
    let mut buf = vec![C64::new(0.0, 0.0); 2 * rows.d];
    let mut g = Vec::with_capacity(m * (m - 1));
    for (a, b) in pairs(m) {
        let (xa, xb) = (rows.row(a), rows.row(b));
        for kind in [Kind::Re, Kind::Im] {
            let plus = rotated_pair_terms(xa, xb, kind, h, &mut buf);
            let minus = rotated_pair_terms(xa, xb, kind, -h, &mut buf);
            g.push((plus - minus) / (2.0 * h));
        }
    }
    g
}

/// Hermitian `H = i G` for the anti-Hermitian generator `G = sum_k g_k E_k`.
fn hermitian_generator(g: &[f64], m: usize) -> CMatrix {
    let mut h = CMatrix::zeros(m, m);
    for (k, (a, b)) in pairs(m).enumerate() {
        let (re, im) = (g[2 * k], g[2 * k + 1]);
        // G_ab = re + i im, G_ba = -re + i im; H = i G.
        h[(a, b)] = C64::new(-im, re);
        h[(b, a)] = C64::new(-im, -re);
    }
    h
}

/// Precomputed spectral form of `exp(-alpha G) = V diag(e^{i alpha lambda}) V^dag`.
struct StepExp {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl StepExp {
    fn new(h: &CMatrix) -> Self {
        let eig = eigh(h);
        Self { values: eig.values, vectors: eig.vectors }
    }

    fn unitary(&self, alpha: f64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &l) in self.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, alpha * l);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn descend(w0: CMatrix, support: &CMatrix, settings: &Settings) -> LocalMinimum {
    let m = w0.nrows();
    let mut x = w0 * support;
    let rows = Rows::from_matrix(&x);
    let mut value = rows.objective();
    let mut g = gradient(&rows, m, settings.fd_step);
    let mut gnorm2 = dot(&g, &g);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < settings.max_iterations {
        if gnorm2.sqrt() <= settings.tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let exp = StepExp::new(&hermitian_generator(&g, m));
        let mut alpha = step;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = exp.unitary(alpha) * &x;
            let trial_rows = Rows::from_matrix(&trial);
            let trial_value = trial_rows.objective();
            if trial_value <= value - ARMIJO * alpha * gnorm2 {
                accepted = Some((trial, trial_rows, trial_value));
                break;
            }
            alpha *= 0.5;
        }
        let Some((next_x, next_rows, next_value)) = accepted else {
            converged = gnorm2.sqrt() <= STALL_GRADIENT;
            break;
        };
        let next_g = gradient(&next_rows, m, settings.fd_step);
        // Barzilai-Borwein length from s = -alpha g, y = g' - g.
        let sy = alpha * (gnorm2 - dot(&g, &next_g));
        step = if sy > 0.0 { alpha * alpha * gnorm2 / sy } else { 2.0 * alpha };
        step = step.clamp(MIN_STEP, MAX_STEP);

        x = next_x;
        value = next_value;
        gnorm2 = dot(&next_g, &next_g);
        g = next_g;
    }
    if !converged && gnorm2.sqrt() <= settings.tolerance {
        converged = true;
    }
    LocalMinimum { rows: x, value, iterations, converged }
}
