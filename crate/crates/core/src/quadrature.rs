//! Adaptive composite Gauss–Legendre quadrature.
//!
//! Panels use a 15-point rule; each panel's error estimate is the difference
//! between the one-panel value and the sum over its two halves. Pieces that
//! touch a singular point are integrated over dyadic layers shrinking toward
//! it, and the decay of the layer contributions decides between convergence
//! (with a geometric tail correction) and divergence.

use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule on [a, b].
    pub fn apply<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The 15-point rule used by every adaptive panel.
pub fn gauss15() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::legendre(15))
}

/// Compensated (Neumaier) running sum; order of additions is the caller's.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Longest allowed initial panel; long ranges start pre-split.
    pub max_panel_width: f64,
    /// Panel budget per smooth piece.
    pub max_panels: usize,
    /// Dyadic layer budget per singular piece.
    pub max_layers: usize,
    /// Layer decay rate (in halvings per layer) at or below which a
    /// singular piece is declared divergent.
    pub divergence_rate: f64,
    /// Number of consecutive layer ratios used for the rate fit.
    pub divergence_window: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            max_panel_width: 1.0,
            max_panels: 20_000,
            max_layers: 2_000,
            divergence_rate: 0.0,
            divergence_window: 4,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn with_max_panel_width(mut self, w: f64) -> Self {
        self.max_panel_width = w;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub divergent: bool,
    pub converged: bool,
    /// (cumulative panel count, running value) after each refinement sweep.
    pub trace: Vec<(usize, f64)>,
}

impl Integral {
    fn zero() -> Self {
        Integral {
            value: 0.0,
            error: 0.0,
            divergent: false,
            converged: true,
            trace: vec![(0, 0.0)],
        }
    }

    fn divergent(trace: Vec<(usize, f64)>) -> Self {
        Integral {
            value: f64::INFINITY,
            error: f64::INFINITY,
            divergent: true,
            converged: true,
            trace,
        }
    }
}

/// Integrates `f` over [a, b].
///
/// `breaks` are interior points where `f` may jump or kink; panels never
/// straddle them. `singular` lists points where `f` may blow up; pieces
/// adjacent to one are integrated in dyadic layers toward it. A piece
/// endpoint where `f` is not finite is treated as singular as well.
pub fn integrate<F>(f: F, a: f64, b: f64, breaks: &[f64], singular: &[f64], opts: &QuadOptions) -> Integral
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Integral::zero();
    }
    if a > b {
        let mut r = integrate_ordered(&f, b, a, breaks, singular, opts);
        r.value = -r.value;
        for e in &mut r.trace {
            e.1 = -e.1;
        }
        return r;
    }
    integrate_ordered(&f, a, b, breaks, singular, opts)
}

fn integrate_ordered<F>(f: &F, a: f64, b: f64, breaks: &[f64], singular: &[f64], opts: &QuadOptions) -> Integral
where
    F: Fn(f64) -> f64,
{
    let mut points: Vec<f64> = vec![a];
    let mut interior: Vec<f64> = breaks
        .iter()
        .chain(singular.iter())
        .copied()
        .filter(|x| *x > a && *x < b && x.is_finite())
        .collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    points.extend(interior);
    points.push(b);

    let is_sing = |x: f64| singular.contains(&x) || !f(x).is_finite();

    let mut total = Neumaier::default();
    let mut error = 0.0;
    let mut converged = true;
    let mut trace = Vec::new();
    let mut panels_so_far = 0usize;
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if lo >= hi {
            continue;
        }
        let sl = is_sing(lo);
        let sr = is_sing(hi);
        let piece = match (sl, sr) {
            (false, false) => adaptive(f, lo, hi, opts),
            (true, false) => graded(f, lo, hi, opts),
            (false, true) => graded(&|x: f64| f(lo + hi - x), lo, hi, opts),
            (true, true) => {
                let m = 0.5 * (lo + hi);
                let left = graded(f, lo, m, opts);
                let right = graded(&|x: f64| f(m + hi - x), m, hi, opts);
                combine(left, right)
            }
        };
        if piece.divergent {
            let mut t = trace;
            for (n, v) in piece.trace {
                t.push((panels_so_far + n, total.value() + v));
            }
            return Integral::divergent(t);
        }
        for (n, v) in &piece.trace {
            trace.push((panels_so_far + n, total.value() + v));
        }
        panels_so_far += piece.trace.last().map_or(0, |e| e.0);
        total.add(piece.value);
        error += piece.error;
        converged &= piece.converged;
    }
    Integral {
        value: total.value(),
        error,
        divergent: false,
        converged,
        trace,
    }
}

fn combine(l: Integral, r: Integral) -> Integral {
    if l.divergent || r.divergent {
        let mut t = l.trace;
        t.extend(r.trace);
        return Integral::divergent(t);
    }
    let n_left = l.trace.last().map_or(0, |e| e.0);
    let mut trace = l.trace;
    for (n, v) in r.trace {
        trace.push((n_left + n, l.value + v));
    }
    Integral {
        value: l.value + r.value,
        error: l.error + r.error,
        divergent: false,
        converged: l.converged && r.converged,
        trace,
    }
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn eval_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let rule = gauss15();
    let mut g = |x: f64| f(x);
    let whole = rule.apply(&mut g, a, b);
    let m = 0.5 * (a + b);
    let halves = rule.apply(&mut g, a, m) + rule.apply(&mut g, m, b);
    let err = if whole.is_finite() && halves.is_finite() {
        (whole - halves).abs()
    } else {
        f64::INFINITY
    };
    Panel { a, b, value: halves, err }
}

/// Adaptive integration of a piece with no singular endpoint.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, opts: &QuadOptions) -> Integral {
    let n0 = ((b - a) / opts.max_panel_width).ceil().clamp(1.0, 1e6) as usize;
    let h = (b - a) / n0 as f64;
    let mut panels: Vec<Panel> = (0..n0)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == n0 { b } else { a + h * (i + 1) as f64 };
            eval_panel(f, lo, hi)
        })
        .collect();
    let mut trace = Vec::new();
    // Sweeps since the error estimate last fell below 3/4 of its best value;
    // a long run means the estimate is rounding noise.
    let mut best_err = f64::INFINITY;
    let mut stalled = 0;
    loop {
        let mut total = Neumaier::default();
        let mut err = 0.0;
        for p in &panels {
            total.add(p.value);
            err += p.err;
        }
        let value = total.value();
        trace.push((panels.len(), value));
        if !value.is_finite() {
            return Integral::divergent(trace);
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if err <= target {
            return Integral {
                value,
                error: err,
                divergent: false,
                converged: true,
                trace,
            };
        }
        if err < 0.75 * best_err {
            best_err = err;
            stalled = 0;
        } else {
            stalled += 1;
        }
        if panels.len() >= opts.max_panels || stalled >= 6 {
            return Integral {
                value,
                error: err,
                divergent: false,
                converged: false,
                trace,
            };
        }
        let share = target / panels.len() as f64;
        let worst = panels.iter().map(|p| p.err).fold(0.0, f64::max);
        let mut next = Vec::with_capacity(panels.len() * 2);
        for p in &panels {
            let split = (p.err > share || p.err == worst) && p.b - p.a > 4.0 * f64::EPSILON * p.a.abs().max(p.b.abs()).max(1e-300);
            if split {
                let m = 0.5 * (p.a + p.b);
                next.push(eval_panel(f, p.a, m));
                next.push(eval_panel(f, m, p.b));
            } else {
                next.push(*p);
            }
        }
        if next.len() == panels.len() {
            // No panel can be split further: accept what we have.
            let value = next.iter().map(|p| p.value).sum();
            return Integral {
                value,
                error: err,
                divergent: false,
                converged: false,
                trace,
            };
        }
        panels = next;
    }
}

/// Integrates over [a, b] where `f` may be singular at `a`.
///
/// Layer k covers [a + w 2^{-(k+1)}, a + w 2^{-k}]. For an integrand that
/// behaves like (x-a)^{-θ} the layer contributions shrink by 2^{θ-1}; the
/// fitted rate s = 1 - θ decides divergence (s ≤ 0) and otherwise supplies
/// the geometric remainder of the unvisited layers.
pub fn graded<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, opts: &QuadOptions) -> Integral {
    let w = b - a;
    let mut sum = Neumaier::default();
    let mut error = 0.0;
    let mut contribs: Vec<f64> = Vec::new();
    let mut trace = Vec::new();
    let mut panels = 0usize;
    let mut prev_est: Option<f64> = None;
    let mut stable = 0;
    let win = opts.divergence_window.max(2);
    for k in 0..opts.max_layers {
        let hi = a + w * 0.5f64.powi(k as i32);
        let lo = a + w * 0.5f64.powi(k as i32 + 1);
        if lo <= a || hi <= lo {
            // Layers have reached the resolution of f64 near `a`.
            let value = sum.value();
            return Integral {
                value,
                error: error + contribs.last().map_or(0.0, |c| c.abs()),
                divergent: false,
                converged: true,
                trace,
            };
        }
        let layer = adaptive(f, lo, hi, opts);
        panels += layer.trace.last().map_or(0, |e| e.0);
        if layer.divergent || !layer.value.is_finite() {
            trace.push((panels, f64::INFINITY));
            return Integral::divergent(trace);
        }
        sum.add(layer.value);
        error += layer.error;
        contribs.push(layer.value);
        trace.push((panels, sum.value()));

        if contribs.len() <= win {
            continue;
        }
        let tail = &contribs[contribs.len() - win - 1..];
        let mags: Vec<f64> = tail.iter().map(|c| c.abs()).collect();
        let scale = sum.value().abs().max(opts.abs_tol);
        if mags.iter().all(|m| *m <= opts.rel_tol * 1e-3 * scale) {
            return Integral {
                value: sum.value(),
                error: error + mags.iter().sum::<f64>(),
                divergent: false,
                converged: true,
                trace,
            };
        }
        if mags.contains(&0.0) {
            continue;
        }
        let rates: Vec<f64> = mags.windows(2).map(|p| -(p[1] / p[0]).log2()).collect();
        let rate = rates.iter().sum::<f64>() / rates.len() as f64;
        if k >= 6 && rates.iter().all(|s| *s <= opts.divergence_rate) {
            return Integral::divergent(trace);
        }
        if rate <= 0.0 {
            continue;
        }
        let r = 2f64.powf(-rate);
        let last = *contribs.last().unwrap();
        let remainder = last * r / (1.0 - r);
        let est = sum.value() + remainder;
        let tol = opts.rel_tol.max(1e-15) * est.abs().max(opts.abs_tol);
        if let Some(p) = prev_est {
            if (est - p).abs() <= tol {
                stable += 1;
            } else {
                stable = 0;
            }
        }
        prev_est = Some(est);
        let small_remainder = remainder.abs() <= 1e-3 * est.abs();
        if stable >= 2 && (small_remainder || k >= 12) {
            trace.push((panels, est));
            return Integral {
                value: est,
                error: error + tol + (remainder * 1e-6).abs(),
                divergent: false,
                converged: true,
                trace,
            };
        }
    }
    let value = prev_est.unwrap_or(sum.value());
    Integral {
        value,
        error: f64::INFINITY,
        divergent: false,
        converged: false,
        trace,
    }
}
