//! Integer lattice enumeration helpers for Fourier modes k ∈ ℤᵈ.

/// ℓ¹ norm |k| = |k₁| + … + |k_d|.
pub fn l1(k: &[i64]) -> i64 {
    k.iter().map(|c| c.abs()).sum()
}

/// Max norm of k.
pub fn linf(k: &[i64]) -> i64 {
    k.iter().map(|c| c.abs()).max().unwrap_or(0)
}

/// All k in the box max-norm ≤ `radius`, in lexicographic order (first
/// component slowest). The order is symmetric: index i and `len - 1 - i`
/// hold k and -k.
pub fn box_modes(dim: usize, radius: usize) -> Vec<Vec<i64>> {
    let side = 2 * radius + 1;
    let total = side.pow(dim as u32);
    let r = radius as i64;
    (0..total)
        .map(|mut idx| {
            let mut k = vec![0i64; dim];
            for a in (0..dim).rev() {
                k[a] = (idx % side) as i64 - r;
                idx /= side;
            }
            k
        })
        .collect()
}

/// Nonzero k with 0 < |k|₁ ≤ `radius`. Only one of each ±k pair is
/// returned when `half` is set (the one whose first nonzero entry is positive).
pub fn l1_shell(dim: usize, radius: usize, half: bool) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut k = vec![0i64; dim];
    fill_l1(&mut k, 0, radius as i64, &mut out);
    out.retain(|k| k.iter().any(|&c| c != 0));
    if half {
        out.retain(|k| k.iter().find(|&&c| c != 0).map(|&c| c > 0).unwrap_or(false));
    }
    out
}

fn fill_l1(k: &mut Vec<i64>, axis: usize, budget: i64, out: &mut Vec<Vec<i64>>) {
    if axis == k.len() {
        out.push(k.clone());
        return;
    }
    for c in -budget..=budget {
        k[axis] = c;
        fill_l1(k, axis + 1, budget - c.abs(), out);
    }
    k[axis] = 0;
}
