use std::collections::{BTreeSet, HashMap};

use super::KernelError;

/// Counts of every length-`k` substring.
pub fn kmer_counts(s: &[u8], k: usize) -> HashMap<&[u8], u32> {
    let mut counts = HashMap::new();
    if k == 0 || s.len() < k {
        return counts;
    }
    for w in s.windows(k) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

/// Dot product of two k-mer count tables.
pub fn spectrum_dot(a: &HashMap<&[u8], u32>, b: &HashMap<&[u8], u32>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .filter_map(|(mer, &ca)| large.get(mer).map(|&cb| ca as f64 * cb as f64))
        .sum()
}

/// Spectrum kernel: inner product of the k-mer count vectors of two sequences.
pub fn spectrum_kernel(s1: &str, s2: &str, k: usize) -> Result<f64, KernelError> {
    if k == 0 {
        return Err(KernelError::ZeroK);
    }
    let a = kmer_counts(s1.as_bytes(), k);
    let b = kmer_counts(s2.as_bytes(), k);
    Ok(spectrum_dot(&a, &b))
}

/// Cosine normalization `k(a,b) / sqrt(k(a,a) k(b,b))`.
///
/// Returns 0 when either self-similarity is zero; callers building a Gram
/// matrix put 1 on the diagonal in that case.
pub fn normalize_kernel(raw: f64, self_a: f64, self_b: f64) -> f64 {
    let denom = self_a * self_b;
    if denom <= 0.0 {
        return 0.0;
    }
    raw / denom.sqrt()
}

/// Shared-annotation kernel `|A ∩ B| / sqrt(|A|^2 |B|^2)`; 0 if either set is empty.
pub fn domain_kernel(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let shared = a.intersection(b).count() as f64;
    shared / ((a.len() * a.len()) as f64 * (b.len() * b.len()) as f64).sqrt()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample covariance `(1/n) Σ_t (x_t - μx)(y_t - μy)` of two expression profiles.
pub fn correlation_kernel(x: &[f64], y: &[f64]) -> Result<f64, KernelError> {
    check_profiles(x, y)?;
    let (mx, my) = (mean(x), mean(y));
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(s / x.len() as f64)
}

/// Double-sum form `(1/n) Σ_x Σ_y (x - μx)(y - μy)`, which factorizes into the
/// product of the two centered sums and is therefore ~0 on any input.
pub fn correlation_kernel_double_sum(x: &[f64], y: &[f64]) -> Result<f64, KernelError> {
    check_profiles(x, y)?;
    let (mx, my) = (mean(x), mean(y));
    let mut s = 0.0;
    for a in x {
        for b in y {
            s += (a - mx) * (b - my);
        }
    }
    Ok(s / x.len() as f64)
}

fn check_profiles(x: &[f64], y: &[f64]) -> Result<(), KernelError> {
    if x.len() != y.len() || x.is_empty() {
        return Err(KernelError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn spectrum_examples() {
        assert_eq!(spectrum_kernel("AAB", "ABA", 2).unwrap(), 1.0);
        assert_eq!(spectrum_kernel("AAB", "AAB", 2).unwrap(), 2.0);
        assert_eq!(spectrum_kernel("A", "A", 2).unwrap(), 0.0);
        assert!(matches!(
            spectrum_kernel("A", "A", 0),
            Err(KernelError::ZeroK)
        ));
        // repeated mers: AAAA has AA x3
        assert_eq!(spectrum_kernel("AAAA", "AAA", 2).unwrap(), 6.0);
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_kernel(1.0, 2.0, 2.0), 0.5);
        assert_eq!(normalize_kernel(3.0, 3.0, 3.0), 1.0);
        assert_eq!(normalize_kernel(0.0, 2.0, 5.0), 0.0);
        assert_eq!(normalize_kernel(1.0, 0.0, 5.0), 0.0);
    }

    #[test]
    fn domain_examples() {
        assert_eq!(
            domain_kernel(&set(&["d1", "d2"]), &set(&["d2", "d3"])),
            0.25
        );
        let a = set(&["a", "b", "c"]);
        assert!((domain_kernel(&a, &a) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(domain_kernel(&set(&[]), &a), 0.0);
        assert_eq!(domain_kernel(&set(&[]), &set(&[])), 0.0);
    }

    #[test]
    fn covariance_examples() {
        let v = correlation_kernel(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(correlation_kernel(&[5.0, 5.0], &[1.0, 9.0]).unwrap(), 0.0);
        let x = [1.0, 4.0, 2.0, 7.0];
        let m = 3.5;
        let var = x.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / 4.0;
        assert!((correlation_kernel(&x, &x).unwrap() - var).abs() < 1e-12);
        assert!(correlation_kernel(&[1.0], &[1.0, 2.0]).is_err());
        assert!(
            correlation_kernel_double_sum(&x, &[3.0, 1.0, 0.0, 2.0])
                .unwrap()
                .abs()
                < 1e-12
        );
    }
}
