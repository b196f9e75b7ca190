//! Adaptive Gauss–Kronrod (7/15) quadrature in one dimension and its nested
//! extension to boxes. Used as the numerical oracle for the closed-form
//! integrals elsewhere in the crate.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { abs_tol: 1e-11, max_depth: 24 }
    }
}

fn kronrod(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

impl Quadrature {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
        self.adapt(&mut f, a, b, self.abs_tol, 0)
    }

    fn adapt(&self, f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = kronrod(f, a, b);
        if err <= tol || depth >= self.max_depth {
            return value;
        }
        let mid = 0.5 * (a + b);
        self.adapt(f, a, mid, 0.5 * tol, depth + 1) + self.adapt(f, mid, b, 0.5 * tol, depth + 1)
    }

    /// Iterated integral of `f` over the box `[lower, upper]`.
    pub fn integrate_box(&self, f: impl Fn(&[f64]) -> f64, lower: &[f64], upper: &[f64]) -> f64 {
        assert_eq!(lower.len(), upper.len(), "box bounds differ in dimension");
        let mut point = Vec::with_capacity(lower.len());
        self.nested(&f, lower, upper, &mut point)
    }

    /// Iterated integral over the unit cube `[0, 1]^d`.
    pub fn integrate_unit_cube(&self, f: impl Fn(&[f64]) -> f64, d: usize) -> f64 {
        self.integrate_box(f, &vec![0.0; d], &vec![1.0; d])
    }

    fn nested(
        &self,
        f: &dyn Fn(&[f64]) -> f64,
        lower: &[f64],
        upper: &[f64],
        point: &mut Vec<f64>,
    ) -> f64 {
        let k = point.len();
        if k == lower.len() {
            return f(point);
        }
        let mut inner = |x: f64| {
            point.push(x);
            let v = self.nested(f, lower, upper, point);
            point.pop();
            v
        };
        self.adapt(&mut inner, lower[k], upper[k], self.abs_tol, 0)
    }
}
