//! Fixed-shape reductions. Sums are taken sequentially inside chunks of
//! [`CHUNK`] elements and the chunk totals are combined pairwise, so the
//! result depends only on the input order.

pub const CHUNK: usize = 1024;

pub fn chunked_sum(values: &[f64]) -> f64 {
    let partials: Vec<f64> = values.chunks(CHUNK).map(|c| c.iter().sum()).collect();
    pairwise(&partials)
}

fn pairwise(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise(a) + pairwise(b)
        }
    }
}

/// `chunked_sum` of `f(x)` over `values`.
pub fn chunked_sum_by(values: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let mapped: Vec<f64> = values.iter().map(|&v| f(v)).collect();
    chunked_sum(&mapped)
}
