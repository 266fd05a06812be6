//! Small deterministic optimizers: golden-section search for bracketed
//! one-dimensional maximization and a box-constrained Nelder-Mead simplex for
//! the two-parameter likelihood fits.

/// (sqrt(5) - 1) / 2
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximize a unimodal `f` over `[lo, hi]` by golden-section search.
///
/// Stops when the bracket is narrower than `tol` and returns the bracket
/// midpoint with its objective value. Convergence is unconditional for
/// unimodal objectives, including maxima at the interval ends.
pub fn golden_section_max<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> (f64, f64) {
    debug_assert!(lo < hi && tol > 0.0);
    let mut a = lo;
    let mut b = hi;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
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
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    (x, fx)
}

/// Maximize `f` over the box `[lo, hi]^2` by Nelder-Mead, projecting trial
/// points back into the box. Deterministic for a given starting point.
pub fn nelder_mead_max_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    start: [f64; 2],
    step: f64,
    lo: f64,
    hi: f64,
    max_iter: usize,
) -> ([f64; 2], f64) {
    let clamp = |x: [f64; 2]| [x[0].clamp(lo, hi), x[1].clamp(lo, hi)];
    // initial simplex: start plus one offset per coordinate, pointed inward
    // when the start sits against the upper bound
    let offset = |x: f64| if x + step <= hi { x + step } else { x - step };
    let mut pts = [
        clamp(start),
        clamp([offset(start[0]), start[1]]),
        clamp([start[0], offset(start[1])]),
    ];
    let mut vals = [
        f(pts[0][0], pts[0][1]),
        f(pts[1][0], pts[1][1]),
        f(pts[2][0], pts[2][1]),
    ];

    for _ in 0..max_iter {
        // order: index 0 best (largest), index 2 worst
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
        let (best, mid, worst) = (order[0], order[1], order[2]);

        let diameter = pts
            .iter()
            .flat_map(|a| {
                pts.iter()
                    .map(move |b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
            })
            .fold(0.0f64, f64::max);
        if diameter < 1e-10 && (vals[best] - vals[worst]).abs() < 1e-12 {
            break;
        }

        let centroid = [
            0.5 * (pts[best][0] + pts[mid][0]),
            0.5 * (pts[best][1] + pts[mid][1]),
        ];
        let reflect = clamp([
            centroid[0] + (centroid[0] - pts[worst][0]),
            centroid[1] + (centroid[1] - pts[worst][1]),
        ]);
        let f_reflect = f(reflect[0], reflect[1]);

        if f_reflect > vals[best] {
            let expand = clamp([
                centroid[0] + 2.0 * (centroid[0] - pts[worst][0]),
                centroid[1] + 2.0 * (centroid[1] - pts[worst][1]),
            ]);
            let f_expand = f(expand[0], expand[1]);
            if f_expand > f_reflect {
                pts[worst] = expand;
                vals[worst] = f_expand;
            } else {
                pts[worst] = reflect;
                vals[worst] = f_reflect;
            }
        } else if f_reflect > vals[mid] {
            pts[worst] = reflect;
            vals[worst] = f_reflect;
        } else {
            let contract = clamp([
                centroid[0] + 0.5 * (pts[worst][0] - centroid[0]),
                centroid[1] + 0.5 * (pts[worst][1] - centroid[1]),
            ]);
            let f_contract = f(contract[0], contract[1]);
            if f_contract > vals[worst] {
                pts[worst] = contract;
                vals[worst] = f_contract;
            } else {
                // shrink toward the best vertex
                for i in 0..3 {
                    if i == best {
                        continue;
                    }
                    pts[i] = clamp([
                        pts[best][0] + 0.5 * (pts[i][0] - pts[best][0]),
                        pts[best][1] + 0.5 * (pts[i][1] - pts[best][1]),
                    ]);
                    vals[i] = f(pts[i][0], pts[i][1]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..3 {
        if vals[i] > vals[best] {
            best = i;
        }
    }
    (pts[best], vals[best])
}
