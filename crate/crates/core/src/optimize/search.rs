//! One-dimensional and simplex-constrained search primitives.

/// Result of a scalar minimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMin {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimisation on `[lo, hi]` until the bracket is narrower
/// than `width`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, width: f64) -> LineMin {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    let mut evaluations = 2;
    while (b - a) > width && iterations < 10_000 {
        iterations += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evaluations += 1;
    }
    // the bracket ends are candidates too (monotone objectives end there)
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let v = f(x);
        evaluations += 1;
        if v < best.1 {
            best = (x, v);
        }
    }
    LineMin {
        x: best.0,
        value: best.1,
        iterations,
        evaluations,
    }
}

/// `n` evenly spaced points on `[lo, hi]`; a single point sits at the midpoint.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Index and value of the smallest entry; ties go to the lowest index.
pub fn argmin(values: &[f64]) -> Option<(usize, f64)> {
    values
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best, (i, v)| match best {
            Some((_, bv)) if v.is_nan() || v >= bv => best,
            _ => Some((i, v)),
        })
}

/// Euclidean projection onto `{x >= 0, sum x <= cap}`.
pub fn project_capped_simplex(x: &mut [f64], cap: f64) {
    for v in x.iter_mut() {
        if v.is_nan() || *v <= 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = x.iter().sum();
    if sum <= cap {
        return;
    }
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        acc += v;
        let t = (acc - cap) / (k + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    for v in x.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentSettings {
    pub max_iter: usize,
    /// Relative objective change counted as no progress.
    pub rel_tol: f64,
    /// Consecutive no-progress iterations that end the run.
    pub patience: usize,
    /// Central-difference step relative to the coordinate.
    pub fd_rel_step: f64,
}

impl Default for DescentSettings {
    fn default() -> Self {
        Self {
            max_iter: 3_000,
            rel_tol: 1e-10,
            patience: 5,
            fd_rel_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Product of capped simplices: coordinates `blocks[k].0 .. blocks[k].1`
/// share the cap `blocks[k].2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSimplex {
    pub blocks: Vec<(usize, usize, f64)>,
}

impl BlockSimplex {
    pub fn project(&self, x: &mut [f64]) {
        for &(start, end, cap) in &self.blocks {
            project_capped_simplex(&mut x[start..end], cap);
        }
    }
}

fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], rel: f64, evals: &mut usize) -> Vec<f64> {
    let mut probe = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let h = rel * x[i].abs().max(1e-3);
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
        *evals += 2;
    }
    g
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected-gradient descent with central-difference gradients,
/// Barzilai-Borwein trial steps and step-halving Armijo backtracking.
pub fn projected_gradient<F: Fn(&[f64]) -> f64>(
    f: F,
    start: &[f64],
    set: &BlockSimplex,
    settings: &DescentSettings,
) -> DescentResult {
    let mut x = start.to_vec();
    set.project(&mut x);
    let mut evaluations = 1;
    let mut fx = f(&x);
    let mut g = fd_gradient(&f, &x, settings.fd_rel_step, &mut evaluations);
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut alpha = if gmax > 0.0 { 0.1 / gmax } else { 1.0 };
    let mut stall = 0;
    let mut converged = false;
    let mut iterations = 0;
    let mut trial = vec![0.0; x.len()];
    let mut dir = vec![0.0; x.len()];

    while iterations < settings.max_iter {
        iterations += 1;
        for i in 0..x.len() {
            trial[i] = x[i] - alpha * g[i];
        }
        set.project(&mut trial);
        for i in 0..x.len() {
            dir[i] = trial[i] - x[i];
        }
        let slope = dot(&g, &dir);
        if dir.iter().all(|d| d.abs() < 1e-15) || slope.is_nan() || slope >= 0.0 {
            converged = true;
            break;
        }
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-20 {
            for i in 0..x.len() {
                trial[i] = x[i] + t * dir[i];
            }
            let ft = f(&trial);
            evaluations += 1;
            if ft <= fx + 1e-4 * t * slope {
                accepted = Some(ft);
                break;
            }
            t *= 0.5;
        }
        let Some(f_new) = accepted else {
            converged = true;
            break;
        };
        let rel = (fx - f_new).abs() / fx.abs().max(f64::MIN_POSITIVE);
        stall = if rel < settings.rel_tol { stall + 1 } else { 0 };
        let g_new = fd_gradient(&f, &trial, settings.fd_rel_step, &mut evaluations);
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..x.len() {
            let s = trial[i] - x[i];
            ss += s * s;
            sy += s * (g_new[i] - g[i]);
        }
        alpha = if sy > 0.0 { ss / sy } else { alpha * 2.0 };
        alpha = alpha.clamp(1e-12, 1e12);
        x.copy_from_slice(&trial);
        fx = f_new;
        g = g_new;
        if stall >= settings.patience {
            converged = true;
            break;
        }
    }
    DescentResult {
        x,
        value: fx,
        iterations,
        evaluations,
        converged,
    }
}
