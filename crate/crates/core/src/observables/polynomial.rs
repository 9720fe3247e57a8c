/// Exponent tuples of every monomial of total degree `0..=degree` in `n`
/// variables: constant first, then graded by degree, and within a degree in
/// descending lexicographic order of the exponent tuple (so `x1²` precedes
/// `x1·x2` precedes `x2²`).
pub fn monomial_exponents(n: usize, degree: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for d in 0..=degree {
        let mut current = vec![0u32; n];
        push_degree(n, d as u32, 0, &mut current, &mut out);
    }
    out
}

fn push_degree(n: usize, remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == n {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        push_degree(n, remaining - e, pos + 1, current, out);
    }
    current[pos] = 0;
}

pub fn eval_monomial(x: &[f64], exponents: &[u32]) -> f64 {
    x.iter()
        .zip(exponents)
        .filter(|(_, &e)| e > 0)
        .map(|(v, &e)| v.powi(e as i32))
        .product()
}

/// Binomial coefficient C(n, k).
pub fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
