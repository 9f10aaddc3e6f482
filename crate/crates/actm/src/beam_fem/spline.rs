//! Parametric natural cubic spline through beam key points.
//!
//! A beam centerline is described by five key points; the mesh wants nodes
//! spaced evenly along the curve itself. The key points are interpolated
//! component-wise by natural cubic splines parametrized by cumulative
//! control-polygon chord length, then the curve is resampled at equal arc
//! length with a dense lookup table.

/// Scalar natural cubic spline: interpolates `(t_i, v_i)` with zero second
/// derivative at both ends.
#[derive(Debug, Clone)]
pub struct NaturalCubic {
    ts: Vec<f64>,
    vs: Vec<f64>,
    /// Second derivatives at the knots.
    curv: Vec<f64>,
}

impl NaturalCubic {
    /// Knots must be strictly increasing; needs at least two of them.
    pub fn new(ts: Vec<f64>, vs: Vec<f64>) -> Self {
        let n = ts.len();
        assert!(n >= 2 && n == vs.len());
        assert!(ts.windows(2).all(|w| w[1] > w[0]), "knots must increase");

        // Tridiagonal system for interior second derivatives (Thomas
        // algorithm); natural ends pin curv[0] = curv[n-1] = 0.
        let mut curv = vec![0.0; n];
        if n > 2 {
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for k in 0..m {
                let i = k + 1;
                let h0 = ts[i] - ts[i - 1];
                let h1 = ts[i + 1] - ts[i];
                diag[k] = 2.0 * (h0 + h1);
                upper[k] = h1;
                rhs[k] = 6.0 * ((vs[i + 1] - vs[i]) / h1 - (vs[i] - vs[i - 1]) / h0);
            }
            for k in 1..m {
                let lower = ts[k + 1] - ts[k];
                let w = lower / diag[k - 1];
                diag[k] -= w * upper[k - 1];
                rhs[k] -= w * rhs[k - 1];
            }
            curv[m] = rhs[m - 1] / diag[m - 1];
            for k in (0..m - 1).rev() {
                curv[k + 1] = (rhs[k] - upper[k] * curv[k + 2]) / diag[k];
            }
        }
        Self { ts, vs, curv }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let seg = self.segment(t);
        let (t0, t1) = (self.ts[seg], self.ts[seg + 1]);
        let h = t1 - t0;
        let a = (t1 - t) / h;
        let b = (t - t0) / h;
        a * self.vs[seg]
            + b * self.vs[seg + 1]
            + ((a * a * a - a) * self.curv[seg] + (b * b * b - b) * self.curv[seg + 1]) * h * h
                / 6.0
    }

    fn segment(&self, t: f64) -> usize {
        // Clamped extrapolation keeps lookups robust at the exact ends.
        let n = self.ts.len();
        match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }
}

/// Planar curve through key points, ready for equal-arc-length sampling.
#[derive(Debug, Clone)]
pub struct PlanarSpline {
    x: NaturalCubic,
    y: NaturalCubic,
    /// Dense arc-length table: parameter values and cumulative lengths.
    table_t: Vec<f64>,
    table_s: Vec<f64>,
}

/// Resolution of the arc-length lookup table. At 4096 panels the polyline
/// length error is far below the solver tolerances.
const TABLE_PANELS: usize = 4096;

impl PlanarSpline {
    /// Interpolates the key points, parametrized by cumulative straight-line
    /// distance between consecutive key points. Consecutive key points must
    /// not coincide.
    pub fn through(points: &[(f64, f64)]) -> Option<Self> {
        let mut ts = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        ts.push(0.0);
        for pair in points.windows(2) {
            let d = (pair[1].0 - pair[0].0).hypot(pair[1].1 - pair[0].1);
            if d <= 0.0 {
                return None;
            }
            acc += d;
            ts.push(acc);
        }
        let x = NaturalCubic::new(ts.clone(), points.iter().map(|p| p.0).collect());
        let y = NaturalCubic::new(ts, points.iter().map(|p| p.1).collect());

        let mut table_t = Vec::with_capacity(TABLE_PANELS + 1);
        let mut table_s = Vec::with_capacity(TABLE_PANELS + 1);
        let mut prev = (x.eval(0.0), y.eval(0.0));
        let mut s = 0.0;
        table_t.push(0.0);
        table_s.push(0.0);
        for i in 1..=TABLE_PANELS {
            let t = acc * (i as f64) / (TABLE_PANELS as f64);
            let p = (x.eval(t), y.eval(t));
            s += (p.0 - prev.0).hypot(p.1 - prev.1);
            table_t.push(t);
            table_s.push(s);
            prev = p;
        }
        Some(Self {
            x,
            y,
            table_t,
            table_s,
        })
    }

    /// Total arc length of the interpolated curve.
    pub fn arc_length(&self) -> f64 {
        *self.table_s.last().unwrap()
    }

    /// `count + 1` points spaced at equal arc length, endpoints exact.
    pub fn equal_arc_points(&self, count: usize) -> Vec<(f64, f64)> {
        assert!(count >= 1);
        let total = self.arc_length();
        (0..=count)
            .map(|k| {
                if k == 0 {
                    (self.x.eval(0.0), self.y.eval(0.0))
                } else if k == count {
                    let t = *self.table_t.last().unwrap();
                    (self.x.eval(t), self.y.eval(t))
                } else {
                    let t = self.param_at_arc(total * (k as f64) / (count as f64));
                    (self.x.eval(t), self.y.eval(t))
                }
            })
            .collect()
    }

    fn param_at_arc(&self, s: f64) -> f64 {
        let i = match self
            .table_s
            .binary_search_by(|x| x.partial_cmp(&s).unwrap())
        {
            Ok(i) => return self.table_t[i],
            Err(0) => 1,
            Err(i) if i > TABLE_PANELS => TABLE_PANELS,
            Err(i) => i,
        };
        let (s0, s1) = (self.table_s[i - 1], self.table_s[i]);
        let (t0, t1) = (self.table_t[i - 1], self.table_t[i]);
        t0 + (t1 - t0) * (s - s0) / (s1 - s0)
    }
}
