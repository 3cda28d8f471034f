use crate::error::{Error, Result};

/// Shannon entropy in bits.
pub fn entropy(dist: &[f64]) -> f64 {
    dist.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

pub fn expected_length(code: &[String], dist: &[f64]) -> f64 {
    code.iter().zip(dist).map(|(c, p)| c.len() as f64 * p).sum()
}

/// Huffman code for a probability vector (positive entries summing to one).
pub fn huffman(dist: &[f64]) -> Result<Vec<String>> {
    if dist.is_empty() {
        return Err(Error::BadDistribution("empty distribution".into()));
    }
    if let Some(p) = dist.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
        return Err(Error::BadDistribution(format!("non-positive probability {p}")));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::BadDistribution(format!("probabilities sum to {sum}")));
    }
    Ok(build(dist))
}

/// Huffman code for positive integer weights.
pub fn huffman_weights(weights: &[u64]) -> Result<Vec<String>> {
    if weights.is_empty() || weights.contains(&0) {
        return Err(Error::BadDistribution("weights must be positive".into()));
    }
    let w: Vec<f64> = weights.iter().map(|&w| w as f64).collect();
    Ok(build(&w))
}

/// Merge the two lightest subtrees (ties: smallest contained symbol index);
/// the first popped takes `0`.
fn build(weights: &[f64]) -> Vec<String> {
    let n = weights.len();
    let mut codes = vec![String::new(); n];
    if n == 1 {
        return codes;
    }
    // (weight, smallest symbol, symbols)
    let mut active: Vec<(f64, usize, Vec<usize>)> =
        weights.iter().enumerate().map(|(i, &w)| (w, i, vec![i])).collect();
    let mut prefix_rev = vec![String::new(); n];
    while active.len() > 1 {
        active.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (w0, m0, s0) = active.remove(0);
        let (w1, m1, s1) = active.remove(0);
        for &s in &s0 {
            prefix_rev[s].push('0');
        }
        for &s in &s1 {
            prefix_rev[s].push('1');
        }
        let mut merged = s0;
        merged.extend(s1);
        active.push((w0 + w1, m0.min(m1), merged));
    }
    for (c, r) in codes.iter_mut().zip(prefix_rev) {
        *c = r.chars().rev().collect();
    }
    codes
}
