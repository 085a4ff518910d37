//! Gauss-Legendre rules and composite node grids over the box.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::geometry::{Interval, WellGeometry};

/// Nodes per panel used for eigenfunction integrals.
pub const DEFAULT_ORDER: usize = 64;

/// An `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be at least 1");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Roots are symmetric; solve for the upper half by Newton from the
        // Tricomi initial guess.
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
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
        Self { nodes, weights }
    }

    /// Shared 64-point rule.
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(DEFAULT_ORDER))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }

    /// Composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite<F: Fn(f64) -> f64>(&self, a: f64, b: f64, panels: usize, f: F) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + h * p as f64;
                self.integrate(lo, lo + h, &f)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Number of panels so that each holds at most one oscillation of wavenumber
/// `k` and is no wider than `max_panel`.
pub fn panel_count(length: f64, wavenumber: f64, max_panel: f64) -> usize {
    if length <= 0.0 {
        return 0;
    }
    let by_wave = (wavenumber.abs() * length / (2.0 * PI)).ceil();
    let by_width = if max_panel.is_finite() && max_panel > 0.0 {
        (length / max_panel).ceil()
    } else {
        1.0
    };
    by_wave.max(by_width).max(1.0) as usize
}

/// Quadrature nodes and weights covering an interval of the box, split at
/// the barrier edges.
#[derive(Debug, Clone)]
pub struct NodeGrid {
    pub xs: Vec<f64>,
    pub ws: Vec<f64>,
}

impl NodeGrid {
    /// Builds a composite grid on `interval` (split at barrier edges).
    ///
    /// `wavenumbers` gives the fastest spatial scale in each of the three
    /// regions (left chamber, barrier, right chamber).
    pub fn over(
        geometry: &WellGeometry,
        interval: Interval,
        wavenumbers: RegionScales,
        max_panel: f64,
        rule: &GaussLegendre,
    ) -> Self {
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for piece in geometry.split_at_edges(interval) {
            let k = wavenumbers.for_piece(geometry, piece);
            let panels = panel_count(piece.length(), k, max_panel);
            let h = piece.length() / panels as f64;
            for p in 0..panels {
                let lo = piece.lo + h * p as f64;
                let half = 0.5 * h;
                let mid = lo + half;
                for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
                    xs.push(mid + half * t);
                    ws.push(w * half);
                }
            }
        }
        Self { xs, ws }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.xs.iter().zip(&self.ws).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Spatial rates per region: oscillation wavenumber outside the barrier and
/// the larger of decay rate or wavenumber inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionScales {
    pub outside: f64,
    pub barrier: f64,
}

impl RegionScales {
    fn for_piece(&self, geometry: &WellGeometry, piece: Interval) -> f64 {
        let mid = 0.5 * (piece.lo + piece.hi);
        if mid > geometry.barrier_left() && mid < geometry.barrier_right() {
            self.barrier
        } else {
            self.outside
        }
    }
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(a: f64, b: f64, panels: usize, f: F) -> f64 {
    let n = if panels % 2 == 1 { panels + 1 } else { panels.max(2) };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}
