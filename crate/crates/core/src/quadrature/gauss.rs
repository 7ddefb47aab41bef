use std::f64::consts::PI;

use crate::geometry::{Disk, Point, Rect};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_interval(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|t| half * t).collect(),
    )
}

/// Tensor-product Gauss points and weights on a rectangle, split into
/// `cells × cells` equal sub-rectangles.
pub fn tensor_points(rect: &Rect, cells: usize, per_axis: usize) -> (Vec<Point>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(per_axis);
    let dx = rect.width() / cells as f64;
    let dy = rect.height() / cells as f64;
    let mut pts = Vec::with_capacity(cells * cells * per_axis * per_axis);
    let mut wts = Vec::with_capacity(pts.capacity());
    for cj in 0..cells {
        let y0 = rect.min.y + cj as f64 * dy;
        for ci in 0..cells {
            let x0 = rect.min.x + ci as f64 * dx;
            for (&ty, &wy) in gx.iter().zip(&gw) {
                for (&tx, &wx) in gx.iter().zip(&gw) {
                    pts.push(Point::new(
                        x0 + 0.5 * dx * (tx + 1.0),
                        y0 + 0.5 * dy * (ty + 1.0),
                    ));
                    wts.push(0.25 * dx * dy * wx * wy);
                }
            }
        }
    }
    (pts, wts)
}

/// Polar product rule on a disk: Gauss in the radius (with the `r` Jacobian)
/// and the trapezoid rule in angle, which is spectrally accurate for
/// periodic integrands.
pub fn disk_polar_points(disk: &Disk, n_radial: usize, n_angular: usize) -> (Vec<Point>, Vec<f64>) {
    let (r, wr) = gauss_legendre_interval(n_radial, 0.0, disk.radius);
    let dth = 2.0 * PI / n_angular as f64;
    let mut pts = Vec::with_capacity(n_radial * n_angular);
    let mut wts = Vec::with_capacity(pts.capacity());
    for (&ri, &wi) in r.iter().zip(&wr) {
        for k in 0..n_angular {
            let th = (k as f64 + 0.5) * dth;
            pts.push(Point::new(
                disk.center.x + ri * th.cos(),
                disk.center.y + ri * th.sin(),
            ));
            wts.push(wi * ri * dth);
        }
    }
    (pts, wts)
}

/// Gauss points on a triangle via the collapsed (Duffy) square.
pub fn triangle_points(a: Point, b: Point, c: Point, per_axis: usize) -> (Vec<Point>, Vec<f64>) {
    let (g, w) = gauss_legendre_interval(per_axis, 0.0, 1.0);
    let det = ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)).abs();
    let mut pts = Vec::with_capacity(per_axis * per_axis);
    let mut wts = Vec::with_capacity(per_axis * per_axis);
    for (&u, &wu) in g.iter().zip(&w) {
        for (&v, &wv) in g.iter().zip(&w) {
            let s = u;
            let t = v * (1.0 - u);
            pts.push(Point::new(
                a.x + s * (b.x - a.x) + t * (c.x - a.x),
                a.y + s * (b.y - a.y) + t * (c.y - a.y),
            ));
            wts.push(wu * wv * (1.0 - u) * det);
        }
    }
    (pts, wts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_exactness() {
        for n in 1..=40 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn triangle_rule_area_and_linear() {
        let (p, w) = triangle_points(Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(0.0, 1.0), 4);
        let area: f64 = w.iter().sum();
        assert!((area - 1.0).abs() < 1e-14);
        let mx: f64 = p.iter().zip(&w).map(|(p, w)| w * p.x).sum();
        assert!((mx - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn polar_rule_disk_moments() {
        let d = Disk::new(Point::new(0.0, 0.0), 1.0);
        let (p, w) = disk_polar_points(&d, 10, 24);
        let area: f64 = w.iter().sum();
        assert!((area - PI).abs() < 1e-13);
        let m20: f64 = p.iter().zip(&w).map(|(p, w)| w * p.x * p.x).sum();
        assert!((m20 - PI / 4.0).abs() < 1e-13);
    }
}
