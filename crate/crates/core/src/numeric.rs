//! Small numeric helpers shared by the modules.

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn sum(xs: &[f64]) -> f64 {
    let mut s = NeumaierSum::default();
    for &x in xs {
        s.add(x);
    }
    s.value()
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = sum(xs) / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let mut ss = NeumaierSum::default();
    for &x in xs {
        ss.add((x - mean) * (x - mean));
    }
    let var = ss.value() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Sum of `(a·b)` over two equal-length slices with compensation.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = NeumaierSum::default();
    for (x, y) in a.iter().zip(b) {
        s.add(x * y);
    }
    s.value()
}

/// A Monte Carlo or exact value with its standard error (`0` when exact).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, se: 0.0 }
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let (value, se) = mean_and_se(xs);
        Self { value, se }
    }
}

/// Ordinary least squares `y = a + b x`: `(a, b, se_b, r², residuals)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64, Vec<f64>) {
    let n = x.len() as f64;
    let mx = sum(x) / n;
    let my = sum(y) / n;
    let mut sxx = NeumaierSum::default();
    let mut sxy = NeumaierSum::default();
    let mut syy = NeumaierSum::default();
    for (a, b) in x.iter().zip(y) {
        sxx.add((a - mx) * (a - mx));
        sxy.add((a - mx) * (b - my));
        syy.add((b - my) * (b - my));
    }
    let slope = sxy.value() / sxx.value();
    let intercept = my - slope * mx;
    let resid: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - intercept - slope * a).collect();
    let sse: f64 = resid.iter().map(|r| r * r).sum();
    let se = if x.len() > 2 { (sse / (n - 2.0) / sxx.value()).sqrt() } else { f64::NAN };
    let r2 = if syy.value() > 0.0 { 1.0 - sse / syy.value() } else { 1.0 };
    (intercept, slope, se, r2, resid)
}
