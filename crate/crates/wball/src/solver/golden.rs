//! Golden-section minimization of a scalar function on a bracket.

const INVPHI: f64 = 0.618_033_988_749_894_8;

/// Minimizes `f` on `[lo, hi]` and returns the best evaluated `(x, f(x))`.
///
/// Written for convex or unimodal `f`; because every probe (including both
/// endpoints) is tracked, a flat or slightly non-unimodal function still
/// yields the best point that was actually seen.
pub(crate) fn golden_min(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let mut a = lo;
    let mut b = hi;
    let mut best = (a, f(a));
    let fb = f(b);
    if fb < best.1 {
        best = (b, fb);
    }
    if b - a <= tol {
        return best;
    }
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if fc < best.1 {
            best = (c, fc);
        }
        if fd < best.1 {
            best = (d, fd);
        }
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    best
}
