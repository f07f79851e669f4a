//! Barnes–Hut evaluation of `log B` and `B'/B` for large Blaschke products.
//!
//! `b_a(z) = (1/|a|)(z − a)/(z − a*)` with `a* = 1/ā`, so
//! `log B = Σ_j [log(z − a_j) − log(z − a_j*)] − Σ_{a_j≠0} ln|a_j|` and
//! `B'/B = Σ_j [1/(z − a_j) − 1/(z − a_j*)]`: a 2-D field of unit charges.
//! Far clusters are replaced by truncated multipole expansions.

use num_complex::Complex64;

const LEAF: usize = 64;
const ORDER: usize = 56;
/// Opening criterion: a cluster of radius ρ at distance d is expanded when ρ < θ d.
const THETA: f64 = 0.5;
/// Target truncation error of each expansion, relative to the cluster charge.
const TRUNCATION: f64 = 1e-16;
const NEAR_ZERO: f64 = 1e-8;

#[derive(Debug)]
struct Node {
    center: Complex64,
    radius: f64,
    /// `M_k = Σ q (s − c)^k` and `M_k / k` for `k ≥ 1`.
    moments: Vec<Complex64>,
    scaled: Vec<Complex64>,
    start: usize,
    end: usize,
    children: Vec<usize>,
}

#[derive(Debug)]
pub(crate) struct LogField {
    sources: Vec<Complex64>,
    charges: Vec<f64>,
    nodes: Vec<Node>,
    log_const: f64,
}

impl LogField {
    pub(crate) fn new(zeros: &[Complex64]) -> Self {
        let mut pts: Vec<(Complex64, f64)> = Vec::with_capacity(2 * zeros.len());
        let mut log_const = 0.0;
        for &a in zeros {
            pts.push((a, 1.0));
            let m = a.norm();
            if m > 0.0 {
                pts.push((a / (m * m), -1.0));
                log_const -= m.ln();
            }
        }
        let mut field = LogField {
            sources: Vec::new(),
            charges: Vec::new(),
            nodes: Vec::new(),
            log_const,
        };
        if !pts.is_empty() {
            field.build(&mut pts, 0);
        }
        let (s, q) = pts.into_iter().unzip();
        field.sources = s;
        field.charges = q;
        field.fill_moments();
        field
    }

    /// Quadtree over `pts[..]`, reordering it so every node owns a contiguous range.
    fn build(&mut self, pts: &mut [(Complex64, f64)], offset: usize) -> usize {
        let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for (p, _) in pts.iter() {
            lo_x = lo_x.min(p.re);
            hi_x = hi_x.max(p.re);
            lo_y = lo_y.min(p.im);
            hi_y = hi_y.max(p.im);
        }
        let center = Complex64::new(0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y));
        let radius = pts.iter().map(|(p, _)| (p - center).norm()).fold(0.0, f64::max);
        let id = self.nodes.len();
        self.nodes.push(Node {
            center,
            radius,
            moments: Vec::new(),
            scaled: Vec::new(),
            start: offset,
            end: offset + pts.len(),
            children: Vec::new(),
        });
        if pts.len() <= LEAF || radius == 0.0 {
            return id;
        }
        let quadrant = |p: &Complex64| (p.re >= center.re) as usize + 2 * (p.im >= center.im) as usize;
        pts.sort_by_key(|(p, _)| quadrant(p));
        let mut children = Vec::new();
        let mut begin = 0;
        for q in 0..4 {
            let end = begin + pts[begin..].iter().take_while(|(p, _)| quadrant(p) == q).count();
            if end > begin {
                children.push(self.build(&mut pts[begin..end], offset + begin));
            }
            begin = end;
        }
        self.nodes[id].children = children;
        id
    }

    fn fill_moments(&mut self) {
        for node in &mut self.nodes {
            let mut m = vec![Complex64::new(0.0, 0.0); ORDER + 1];
            for (s, &q) in self.sources[node.start..node.end]
                .iter()
                .zip(&self.charges[node.start..node.end])
            {
                let d = s - node.center;
                let mut pow = Complex64::new(q, 0.0);
                for mk in m.iter_mut() {
                    *mk += pow;
                    pow *= d;
                }
            }
            node.scaled = m
                .iter()
                .enumerate()
                .map(|(k, &mk)| if k == 0 { mk } else { mk / k as f64 })
                .collect();
            node.moments = m;
        }
    }

    /// `(B(z), B'(z))`, or `None` within `1e-8` of a zero where the caller
    /// should fall back to the product rule.
    pub(crate) fn eval_both(&self, z: Complex64) -> Option<(Complex64, Complex64)> {
        if self.nodes.is_empty() {
            return Some((Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
        }
        let mut log = Complex64::new(0.0, 0.0);
        let mut ld = Complex64::new(0.0, 0.0);
        // Π (z − s)^q, folded into `log` before it leaves the safe range
        let mut prod = Complex64::new(1.0, 0.0);
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            let diff = z - node.center;
            let dist = diff.norm();
            if node.radius < THETA * dist {
                let ratio = node.radius / dist;
                let p = if ratio == 0.0 {
                    0
                } else {
                    ((TRUNCATION.ln() / ratio.ln()).ceil() as usize).min(ORDER)
                };
                let w = 1.0 / diff;
                // Horner in w for Σ_{k≤p} M_k w^k and Σ_{1≤k≤p} (M_k/k) w^k
                let mut c = Complex64::new(0.0, 0.0);
                let mut l = Complex64::new(0.0, 0.0);
                for k in (0..=p).rev() {
                    c = c * w + node.moments[k];
                    if k > 0 {
                        l = (l + node.scaled[k]) * w;
                    }
                }
                ld += c * w;
                log -= l;
                let q = node.moments[0].re.round() as i32;
                if q.abs() <= 8 {
                    prod *= diff.powi(q);
                    flush(&mut prod, &mut log);
                } else {
                    log += q as f64 * diff.ln();
                }
            } else if node.children.is_empty() {
                for (s, &q) in self.sources[node.start..node.end]
                    .iter()
                    .zip(&self.charges[node.start..node.end])
                {
                    let d = z - s;
                    if q > 0.0 && d.norm() < NEAR_ZERO {
                        return None;
                    }
                    let inv = 1.0 / d;
                    if q > 0.0 {
                        prod *= d;
                        ld += inv;
                    } else {
                        prod *= inv;
                        ld -= inv;
                    }
                    flush(&mut prod, &mut log);
                }
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
        log += prod.ln();
        let b = (log + self.log_const).exp();
        Some((b, b * ld))
    }
}

fn flush(prod: &mut Complex64, log: &mut Complex64) {
    let n = prod.norm_sqr();
    if !(1e-150..=1e150).contains(&n) {
        *log += prod.ln();
        *prod = Complex64::new(1.0, 0.0);
    }
}
