//! Fixed-order Gauss-Legendre rules on intervals.

const GL3_X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Rule order supported by [`gauss_legendre`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Gl3,
    Gl5,
}

impl Rule {
    fn table(self) -> (&'static [f64], &'static [f64]) {
        match self {
            Rule::Gl3 => (&GL3_X, &GL3_W),
            Rule::Gl5 => (&GL5_X, &GL5_W),
        }
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn points(self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
        let (xs, ws) = self.table();
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        xs.iter().zip(ws.iter()).map(move |(x, w)| (c + h * x, h * w))
    }
}

/// Integral of a vector-valued `f` over `[a, b]` with a single panel.
pub fn gauss_legendre<const N: usize, F>(rule: Rule, a: f64, b: f64, mut f: F) -> [f64; N]
where
    F: FnMut(f64) -> [f64; N],
{
    let mut acc = [0.0; N];
    if b <= a {
        return acc;
    }
    for (x, w) in rule.points(a, b) {
        let v = f(x);
        for k in 0..N {
            acc[k] += w * v[k];
        }
    }
    acc
}

/// Composite rule with `panels` equal panels.
pub fn composite<const N: usize, F>(rule: Rule, a: f64, b: f64, panels: usize, mut f: F) -> [f64; N]
where
    F: FnMut(f64) -> [f64; N],
{
    let mut acc = [0.0; N];
    if b <= a || panels == 0 {
        return acc;
    }
    let h = (b - a) / panels as f64;
    for i in 0..panels {
        let lo = a + h * i as f64;
        let hi = if i + 1 == panels { b } else { lo + h };
        let part = gauss_legendre(rule, lo, hi, &mut f);
        for k in 0..N {
            acc[k] += part[k];
        }
    }
    acc
}
