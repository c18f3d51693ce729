//! Small dense matrix exponential (Taylor with scaling and squaring).

/// Row-major square matrix of side `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let n = self.n;
        let mut c = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    c.a[i * n + j] += aik * o.a[k * n + j];
                }
            }
        }
        c
    }
}

/// `exp(A)`.
pub fn expm(a: &Mat) -> Mat {
    let n = a.n;
    let norm = a.norm1();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(s);
    let mut b = a.clone();
    b.a.iter_mut().for_each(|v| *v *= scale);
    // Horner on the degree-18 Taylor polynomial; ‖B‖ ≤ 1/2 gives truncation below 1e-22.
    let mut e = Mat::identity(n);
    for k in (1..=18).rev() {
        e = b.mul(&e);
        e.a.iter_mut().for_each(|v| *v /= k as f64);
        for i in 0..n {
            e.a[i * n + i] += 1.0;
        }
    }
    for _ in 0..s {
        e = e.mul(&e);
    }
    e
}
