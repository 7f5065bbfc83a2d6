use std::f64::consts::PI;

use crate::circuit::Gate;
use crate::linalg::Mat;

const ANGLE_EPS: f64 = 1e-12;

/// `U = e^{i·phase}·Rz(phi)·Ry(theta)·Rz(lambda)`.
#[derive(Clone, Copy, Debug)]
pub struct Zyz {
    pub phase: f64,
    pub phi: f64,
    pub theta: f64,
    pub lambda: f64,
}

pub fn zyz(u: &Mat) -> Zyz {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let root = det.sqrt();
    let a = u[(0, 0)] / root;
    let b = u[(1, 0)] / root;
    let theta = 2.0 * b.norm().atan2(a.norm());
    let (sum, diff) = if a.norm() < 1e-14 {
        (0.0, 2.0 * b.arg())
    } else if b.norm() < 1e-14 {
        (-2.0 * a.arg(), 0.0)
    } else {
        (-2.0 * a.arg(), 2.0 * b.arg())
    };
    Zyz { phase: root.arg(), phi: (sum + diff) / 2.0, theta, lambda: (sum - diff) / 2.0 }
}

/// Wraps into (-π, π]; a rotation by 2π is a global phase when uncontrolled.
pub fn wrap(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

pub fn negligible(angle: f64) -> bool {
    wrap(angle).abs() < ANGLE_EPS
}

/// Native rotations realizing a 2×2 unitary up to global phase.
pub fn synth_1q(u: &Mat, q: usize) -> Vec<Gate> {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let v = u / det.sqrt();
    if v[(0, 0)].im.abs() < 1e-13 && v[(1, 0)].re.abs() < 1e-13 && (v[(0, 0)] - v[(1, 1)]).norm() < 1e-13 {
        let theta = wrap(2.0 * (-v[(1, 0)].im).atan2(v[(0, 0)].re));
        return if negligible(theta) { Vec::new() } else { vec![Gate::rx(q, theta)] };
    }
    if v.iter().all(|z| z.im.abs() < 1e-13) && (v[(0, 0)] - v[(1, 1)]).norm() < 1e-13 {
        let theta = wrap(2.0 * v[(1, 0)].re.atan2(v[(0, 0)].re));
        return if negligible(theta) { Vec::new() } else { vec![Gate::ry(q, theta)] };
    }
    let e = zyz(u);
    let mut out = Vec::new();
    if negligible(e.theta) {
        let z = wrap(e.phi + e.lambda);
        if !negligible(z) {
            out.push(Gate::rz(q, z));
        }
        return out;
    }
    if !negligible(e.lambda) {
        out.push(Gate::rz(q, wrap(e.lambda)));
    }
    out.push(Gate::ry(q, wrap(e.theta)));
    if !negligible(e.phi) {
        out.push(Gate::rz(q, wrap(e.phi)));
    }
    out
}
