use crate::error::{ChaosError, Result};

const MAX_DEPTH: u32 = 48;

/// Result of a quadrature with its accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

/// Adaptive Simpson on `[a, b]`. The absolute target is `rel_tol` times the
/// magnitude of a 16-panel composite pre-estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<Quadrature> {
    if !(rel_tol > 0.0) {
        return Err(ChaosError::InvalidArgument(format!("rel_tol must be positive, got {rel_tol}")));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut evaluations = 0usize;
    let mut eval = |x: f64| {
        evaluations += 1;
        f(x)
    };

    let pieces = 16;
    let h = (b - a) / pieces as f64;
    let mut panels = Vec::with_capacity(pieces);
    let mut rough = 0.0;
    let mut left = eval(a);
    for k in 0..pieces {
        let pa = a + h * k as f64;
        let pb = if k + 1 == pieces { b } else { pa + h };
        let fm = eval(0.5 * (pa + pb));
        let fb = eval(pb);
        let whole = (pb - pa) / 6.0 * (left + 4.0 * fm + fb);
        rough += whole.abs();
        panels.push(Panel {
            a: pa,
            b: pb,
            fa: left,
            fm,
            fb,
            whole,
        });
        left = fb;
    }
    let target = rel_tol * rough.max(f64::MIN_POSITIVE);
    let per_panel = target / pieces as f64;

    let mut value = 0.0;
    let mut error = 0.0;
    let mut converged = true;
    for p in panels {
        let (v, e, ok) = refine(&mut eval, p, per_panel, 0);
        value += v;
        error += e;
        converged &= ok;
    }
    if !converged || !value.is_finite() {
        return Err(ChaosError::QuadratureFailed {
            estimate: value,
            achieved: error,
        });
    }
    Ok(Quadrature {
        value,
        error,
        evaluations,
    })
}

fn refine<F: FnMut(f64) -> f64>(f: &mut F, p: Panel, tol: f64, depth: u32) -> (f64, f64, bool) {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    let delta = left + right - p.whole;
    if delta.abs() <= 15.0 * tol {
        return (left + right + delta / 15.0, delta.abs() / 15.0, true);
    }
    if depth >= MAX_DEPTH {
        return (left + right + delta / 15.0, delta.abs() / 15.0, false);
    }
    let (lv, le, lok) = refine(
        f,
        Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
        },
        0.5 * tol,
        depth + 1,
    );
    let (rv, re, rok) = refine(
        f,
        Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
        },
        0.5 * tol,
        depth + 1,
    );
    (lv + rv, le + re, lok && rok)
}
