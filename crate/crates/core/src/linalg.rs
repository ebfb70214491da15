//! Dense real matrices and the two eigensolvers the crate needs.
//!
//! - [`symmetric_eigen`]: Householder tridiagonalisation followed by implicit
//!   QL (the EISPACK `tred2`/`tql2` pair). Used to exponentiate the small
//!   proposal Hamiltonians.
//! - [`eigenvalues`]: eigenvalues of a general real matrix via balancing,
//!   Householder reduction to Hessenberg form and the Francis double-shift
//!   QR iteration (EISPACK `balanc`/`orthes`/`hqr`). Used for transition
//!   matrices, which are not symmetric.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::math::{fabs, hypot, sign, sqrt};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return invalid("matrix data length does not match its shape");
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return invalid("matmul shape mismatch");
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `v^T M`.
    pub fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate().take(self.rows) {
            if vi == 0.0 {
                continue;
            }
            for (o, m) in out.iter_mut().zip(self.row(i)) {
                *o += vi * m;
            }
        }
        out
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| fabs(a - b))
            .fold(0.0, f64::max)
    }

    pub fn scale(&mut self, factor: f64) {
        for x in &mut self.data {
            *x *= factor;
        }
    }

    /// `max |M - M^T|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max(fabs(self[(i, j)] - self[(j, i)]));
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition `A = V diag(values) V^T` of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub vectors: Matrix,
}

/// Eigen-decomposition of a symmetric matrix. Only the lower triangle is read.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    if !a.is_square() {
        return invalid("symmetric_eigen needs a square matrix");
    }
    let n = a.rows();
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }
    // `z` holds V transposed: z[j * n + k] is V[k][j]. Every inner loop then
    // walks memory contiguously.
    let mut z = a.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut z, &mut d, &mut e);
    tql2(n, &mut z, &mut d, &mut e)?;
    let vectors = Matrix::from_fn(n, n, |r, c| z[c * n + r]);
    Ok(SymmetricEigen { values: d, vectors })
}

fn tred2(n: usize, z: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    // v(a, b) == V[a][b] == z[b * n + a]
    macro_rules! v {
        ($a:expr, $b:expr) => {
            z[($b) * n + ($a)]
        };
    }
    for j in 0..n {
        d[j] = v!(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += fabs(*dk);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v!(i - 1, j);
                v!(i, j) = 0.0;
                v!(j, i) = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v!(j, i) = f;
                g = e[j] + v!(j, j) * f;
                let col = j * n;
                for k in (j + 1)..i {
                    g += z[col + k] * d[k];
                    e[k] += z[col + k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = j * n;
                for k in j..i {
                    z[col + k] -= f * e[k] + g * d[k];
                }
                d[j] = v!(i - 1, j);
                v!(i, j) = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v!(n - 1, i) = v!(i, i);
        v!(i, i) = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            let next = (i + 1) * n;
            for k in 0..=i {
                d[k] = z[next + k] / h;
            }
            for j in 0..=i {
                let col = j * n;
                let mut g = 0.0;
                for k in 0..=i {
                    g += z[next + k] * z[col + k];
                }
                for k in 0..=i {
                    z[col + k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v!(k, i + 1) = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v!(n - 1, j);
        v!(n - 1, j) = 0.0;
    }
    v!(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

fn tql2(n: usize, z: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(fabs(d[l]) + fabs(e[l]));
        let mut m = l;
        while m < n {
            if fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let col_i = &mut lo[i * n..];
                    let col_next = &mut hi[..n];
                    for (vi, vn) in col_i.iter_mut().zip(col_next.iter_mut()) {
                        let t = *vn;
                        *vn = s * *vi + c * t;
                        *vi = c * *vi - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if fabs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort into ascending order, swapping eigenvectors along.
    for i in 0..n - 1 {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for r in 0..n {
                z.swap(i * n + r, k * n + r);
            }
        }
    }
    Ok(())
}

/// All eigenvalues of a general real square matrix, in no particular order.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return invalid("eigenvalues needs a square matrix");
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.data.iter().any(|x| !x.is_finite()) {
        return invalid("matrix has non-finite entries");
    }
    let mut h = a.clone();
    let (low, high) = balance(&mut h);
    orthes(&mut h, low, high);
    for i in 2..n {
        for j in 0..i - 1 {
            h[(i, j)] = 0.0;
        }
    }
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    hqr(&mut h, low, high, &mut wr, &mut wi)?;
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

/// Parlett-Reinsch balancing with radix 2. Returns the `[low, high]` block
/// that still needs the QR iteration; rows outside it hold isolated
/// eigenvalues on the diagonal.
fn balance(a: &mut Matrix) -> (usize, usize) {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    let mut k = 0usize;
    let mut l = n - 1;

    let exchange = |a: &mut Matrix, j: usize, m: usize, k: usize, l: usize| {
        if j == m {
            return;
        }
        for i in 0..=l {
            let t = a[(i, j)];
            a[(i, j)] = a[(i, m)];
            a[(i, m)] = t;
        }
        for i in k..n {
            let t = a[(j, i)];
            a[(j, i)] = a[(m, i)];
            a[(m, i)] = t;
        }
    };

    // Rows isolating an eigenvalue are pushed down.
    loop {
        let found = (0..=l)
            .rev()
            .find(|&j| (0..=l).all(|i| i == j || a[(j, i)] == 0.0));
        match found {
            Some(j) => {
                exchange(a, j, l, k, l);
                if l == 0 {
                    return (k, l);
                }
                l -= 1;
            }
            None => break,
        }
    }
    // Columns isolating an eigenvalue are pushed left.
    loop {
        let found = (k..=l).find(|&j| (k..=l).all(|i| i == j || a[(i, j)] == 0.0));
        match found {
            Some(j) => {
                exchange(a, j, k, k, l);
                k += 1;
            }
            None => break,
        }
    }

    let b2 = RADIX * RADIX;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in k..=l {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in k..=l {
                if j != i {
                    c += fabs(a[(j, i)]);
                    r += fabs(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= b2;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= b2;
            }
            if (c + r) / f < 0.95 * s {
                let g = 1.0 / f;
                converged = false;
                for j in k..n {
                    a[(i, j)] *= g;
                }
                for j in 0..=l {
                    a[(j, i)] *= f;
                }
            }
        }
    }
    (k, l)
}

/// Householder reduction of rows/columns `low..=high` to upper Hessenberg form.
fn orthes(a: &mut Matrix, low: usize, high: usize) {
    let n = a.rows();
    if high < low + 2 {
        return;
    }
    let mut ort = vec![0.0; n];
    let mut f_row = vec![0.0; n];
    for m in (low + 1)..high {
        let mut scale = 0.0;
        for i in m..=high {
            scale += fabs(a[(i, m - 1)]);
        }
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in (m..=high).rev() {
            ort[i] = a[(i, m - 1)] / scale;
            h += ort[i] * ort[i];
        }
        let g = -sign(sqrt(h), ort[m]);
        h -= ort[m] * g;
        ort[m] -= g;

        // Left: rows m..=high, columns m..n.
        f_row[m..n].iter_mut().for_each(|x| *x = 0.0);
        for i in m..=high {
            let oi = ort[i];
            let row = a.row(i);
            for j in m..n {
                f_row[j] += oi * row[j];
            }
        }
        for i in m..=high {
            let oi = ort[i] / h;
            let row = a.row_mut(i);
            for j in m..n {
                row[j] -= f_row[j] * oi;
            }
        }
        // Right: rows 0..=high, columns m..=high.
        for i in 0..=high {
            let row = a.row_mut(i);
            let mut f = 0.0;
            for j in m..=high {
                f += ort[j] * row[j];
            }
            f /= h;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        a[(m, m - 1)] = scale * g;
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only.
fn hqr(h: &mut Matrix, low: usize, high: usize, wr: &mut [f64], wi: &mut [f64]) -> Result<()> {
    let n = h.rows();
    let mut norm = 0.0;
    let mut k0 = 0;
    for i in 0..n {
        for j in k0..n {
            norm += fabs(h[(i, j)]);
        }
        k0 = i;
        if i < low || i > high {
            wr[i] = h[(i, i)];
            wi[i] = 0.0;
        }
    }

    let mut en = high as isize;
    let mut t = 0.0;
    let mut itn = 30 * n;
    while en >= low as isize {
        let enu = en as usize;
        let mut its = 0;
        loop {
            // Look for a single small sub-diagonal element.
            let mut l = enu;
            while l > low {
                let mut s = fabs(h[(l - 1, l - 1)]) + fabs(h[(l, l)]);
                if s == 0.0 {
                    s = norm;
                }
                if s + fabs(h[(l, l - 1)]) == s {
                    break;
                }
                l -= 1;
            }

            let mut x = h[(enu, enu)];
            if l == enu {
                wr[enu] = x + t;
                wi[enu] = 0.0;
                en -= 1;
                break;
            }
            let na = enu - 1;
            let mut y = h[(na, na)];
            let mut w = h[(enu, na)] * h[(na, enu)];
            if l == na {
                let p = (y - x) / 2.0;
                let q = p * p + w;
                let zz = sqrt(fabs(q));
                let x = x + t;
                if q >= 0.0 {
                    let zz = p + sign(zz, p);
                    wr[na] = x + zz;
                    wr[enu] = if zz != 0.0 { x - w / zz } else { wr[na] };
                    wi[na] = 0.0;
                    wi[enu] = 0.0;
                } else {
                    wr[na] = x + p;
                    wr[enu] = x + p;
                    wi[na] = zz;
                    wi[enu] = -zz;
                }
                en -= 2;
                break;
            }
            if itn == 0 {
                return Err(Error::NoConvergence);
            }
            if its == 10 || its == 20 {
                // Exceptional shift.
                t += x;
                for i in low..=enu {
                    h[(i, i)] -= x;
                }
                let s = fabs(h[(enu, na)]) + fabs(h[(na, enu - 2)]);
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            itn -= 1;

            // Look for two consecutive small sub-diagonal elements.
            let mut m = na - 1;
            let (mut p, mut q, mut r);
            loop {
                let zz = h[(m, m)];
                let rr = x - zz;
                let ss = y - zz;
                p = (rr * ss - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - zz - rr - ss;
                r = h[(m + 2, m + 1)];
                let s = fabs(p) + fabs(q) + fabs(r);
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let tst1 = fabs(p) * (fabs(h[(m - 1, m - 1)]) + fabs(zz) + fabs(h[(m + 1, m + 1)]));
                let tst2 = tst1 + fabs(h[(m, m - 1)]) * (fabs(q) + fabs(r));
                if tst2 == tst1 {
                    break;
                }
                m -= 1;
            }

            let mp2 = m + 2;
            for i in mp2..=enu {
                h[(i, i - 2)] = 0.0;
                if i != mp2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows l..=en and columns m..=en.
            for k in m..=na {
                let notlast = k != na;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = fabs(p) + fabs(q) + fabs(r);
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                let s = sign(sqrt(p * p + q * q + r * r), p);
                if k != m {
                    h[(k, k - 1)] = -s * x;
                } else if l != m {
                    h[(k, k - 1)] = -h[(k, k - 1)];
                }
                p += s;
                x = p / s;
                y = q / s;
                let zz = r / s;
                q /= p;
                r /= p;
                let jmax = enu.min(k + 3);
                if notlast {
                    for j in k..=enu {
                        let pp = h[(k, j)] + q * h[(k + 1, j)] + r * h[(k + 2, j)];
                        h[(k, j)] -= pp * x;
                        h[(k + 1, j)] -= pp * y;
                        h[(k + 2, j)] -= pp * zz;
                    }
                    for i in l..=jmax {
                        let pp = x * h[(i, k)] + y * h[(i, k + 1)] + zz * h[(i, k + 2)];
                        h[(i, k)] -= pp;
                        h[(i, k + 1)] -= pp * q;
                        h[(i, k + 2)] -= pp * r;
                    }
                } else {
                    for j in k..=enu {
                        let pp = h[(k, j)] + q * h[(k + 1, j)];
                        h[(k, j)] -= pp * x;
                        h[(k + 1, j)] -= pp * y;
                    }
                    for i in l..=jmax {
                        let pp = x * h[(i, k)] + y * h[(i, k + 1)];
                        h[(i, k)] -= pp;
                        h[(i, k + 1)] -= pp * q;
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::vec::Vec;

    fn random_symmetric(n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn symmetric_eigen_reconstructs_matrix() {
        for &n in &[1usize, 2, 3, 7, 16, 33] {
            let a = random_symmetric(n, n as u64);
            let eig = symmetric_eigen(&a).unwrap();
            let v = &eig.vectors;
            let recon = Matrix::from_fn(n, n, |i, j| {
                (0..n).map(|k| v[(i, k)] * eig.values[k] * v[(j, k)]).sum()
            });
            assert!(recon.max_abs_diff(&a) < 1e-12, "n={n}");
            let vtv = v.transpose().matmul(v).unwrap();
            assert!(vtv.max_abs_diff(&Matrix::identity(n)) < 1e-12);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn symmetric_eigen_diagonal_matrix() {
        let a = Matrix::from_fn(4, 4, |i, j| if i == j { [3.0, -1.0, 2.0, 0.5][i] } else { 0.0 });
        let eig = symmetric_eigen(&a).unwrap();
        assert_eq!(eig.values, [-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn general_eigenvalues_of_rotation_are_complex_pair() {
        let a = Matrix::from_vec(2, 2, [0.0, -1.0, 1.0, 0.0].to_vec()).unwrap();
        let ev = sorted_re(eigenvalues(&a).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn general_eigenvalues_of_companion_matrix() {
        // Roots 1, 2, 3, 4 of x^4 - 10x^3 + 35x^2 - 50x + 24.
        let c = [24.0, -50.0, 35.0, -10.0];
        let a = Matrix::from_fn(4, 4, |i, j| {
            if j == 3 {
                -c[i]
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        let ev = sorted_re(eigenvalues(&a).unwrap());
        for (k, e) in ev.iter().enumerate() {
            assert!((e.re - (k + 1) as f64).abs() < 1e-9, "{e}");
            assert!(e.im.abs() < 1e-9);
        }
    }

    #[test]
    fn general_eigenvalues_triangular_are_isolated() {
        let a = Matrix::from_fn(5, 5, |i, j| if j >= i { (i * 5 + j) as f64 * 0.1 + 1.0 } else { 0.0 });
        let mut ev: Vec<f64> = eigenvalues(&a).unwrap().iter().map(|c| c.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut diag: Vec<f64> = (0..5).map(|i| a[(i, i)]).collect();
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in ev.iter().zip(&diag) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn general_matches_symmetric_solver() {
        for &n in &[3usize, 10, 40] {
            let a = random_symmetric(n, 100 + n as u64);
            let sym = symmetric_eigen(&a).unwrap().values;
            let gen = sorted_re(eigenvalues(&a).unwrap());
            for (s, g) in sym.iter().zip(&gen) {
                assert!((s - g.re).abs() < 1e-10, "n={n}: {s} vs {g}");
                assert!(g.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn general_eigenvalues_trace_and_similarity_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 30;
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let ev = eigenvalues(&a).unwrap();
        let trace: f64 = (0..n).map(|i| a[(i, i)]).sum();
        let sum: Complex64 = ev.iter().sum();
        assert!((sum.re - trace).abs() < 1e-10);
        assert!(sum.im.abs() < 1e-10);
        // Sum of squares equals trace(A^2).
        let a2 = a.matmul(&a).unwrap();
        let trace2: f64 = (0..n).map(|i| a2[(i, i)]).sum();
        let sum2: Complex64 = ev.iter().map(|z| z * z).sum();
        assert!((sum2.re - trace2).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_square() {
        assert!(eigenvalues(&Matrix::zeros(2, 3)).is_err());
        assert!(symmetric_eigen(&Matrix::zeros(3, 2)).is_err());
    }
}
