//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands on a finite interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize) -> (Vec<f64>, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let mut buf = vec![0.0; dim];
    f(c, &mut buf);
    for i in 0..dim {
        kron[i] = WGK[7] * buf[i];
        gauss[i] = WG[3] * buf[i];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let mut lo = vec![0.0; dim];
        f(c - dx, &mut lo);
        f(c + dx, &mut buf);
        for i in 0..dim {
            let s = lo[i] + buf[i];
            kron[i] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * s;
            }
        }
    }
    let mut err: f64 = 0.0;
    for i in 0..dim {
        kron[i] *= h;
        gauss[i] *= h;
        err = err.max((kron[i] - gauss[i]).abs());
    }
    (kron, err)
}

/// Integrate a vector-valued function over `[a, b]`. The integrand writes its
/// components into the provided slice. Subdivision stops once the summed error
/// estimate is below `abs_tol + rel_tol * max|I_i|` or after `max_panels`.
pub fn integrate<F: FnMut(f64, &mut [f64])>(
    mut f: F,
    a: f64,
    b: f64,
    dim: usize,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> (Vec<f64>, f64) {
    let (v, e) = gk15(&mut f, a, b, dim);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, err: e });
    loop {
        let mut total = vec![0.0; dim];
        let mut err = 0.0;
        for p in heap.iter() {
            for i in 0..dim {
                total[i] += p.value[i];
            }
            err += p.err;
        }
        let scale = total.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if err <= abs_tol + rel_tol * scale || heap.len() >= max_panels {
            return (total, err);
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            heap.push(Panel { err: 0.0, ..worst });
            continue;
        }
        let (lv, le) = gk15(&mut f, worst.a, mid, dim);
        let (rv, re) = gk15(&mut f, mid, worst.b, dim);
        heap.push(Panel { a: worst.a, b: mid, value: lv, err: le });
        heap.push(Panel { a: mid, b: worst.b, value: rv, err: re });
    }
}
