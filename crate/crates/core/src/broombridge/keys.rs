/// `{p, q}` as `[min, max]`.
pub fn canonical_one_electron_key([p, q]: [usize; 2]) -> [usize; 2] {
    if p <= q {
        [p, q]
    } else {
        [q, p]
    }
}

/// Lexicographically smallest of the eight real-orbital symmetry images of
/// a Mulliken-ordered index tuple `(pq|rs)`.
///
/// The result does not depend on whether indices are 0- or 1-based.
pub fn canonical_two_electron_key([p, q, r, s]: [usize; 4]) -> [usize; 4] {
    let a = canonical_one_electron_key([p, q]);
    let b = canonical_one_electron_key([r, s]);
    // every image keeps each pair together; the minimum orders each pair
    // internally and then the pairs themselves
    if a <= b {
        [a[0], a[1], b[0], b[1]]
    } else {
        [b[0], b[1], a[0], a[1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn images([p, q, r, s]: [usize; 4]) -> [[usize; 4]; 8] {
        [
            [p, q, r, s],
            [q, p, r, s],
            [p, q, s, r],
            [q, p, s, r],
            [r, s, p, q],
            [s, r, p, q],
            [r, s, q, p],
            [s, r, q, p],
        ]
    }

    fn brute_force_min(k: [usize; 4]) -> [usize; 4] {
        images(k).into_iter().min().unwrap()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(canonical_two_electron_key([2, 1, 1, 1]), [1, 1, 1, 2]);
        assert_eq!(canonical_two_electron_key([1, 1, 1, 1]), [1, 1, 1, 1]);
        assert_eq!(canonical_two_electron_key([3, 4, 1, 2]), [1, 2, 3, 4]);
        assert_eq!(canonical_one_electron_key([5, 2]), [2, 5]);
    }

    #[test]
    fn class_count_for_four_orbitals() {
        let mut classes = std::collections::BTreeSet::new();
        for p in 0..4 {
            for q in 0..4 {
                for r in 0..4 {
                    for s in 0..4 {
                        classes.insert(brute_force_min([p, q, r, s]));
                    }
                }
            }
        }
        assert_eq!(classes.len(), 55);
    }

    proptest! {
        #[test]
        fn matches_enumeration(k in prop::array::uniform4(1usize..9)) {
            prop_assert_eq!(canonical_two_electron_key(k), brute_force_min(k));
        }

        #[test]
        fn idempotent_and_closed(k in prop::array::uniform4(0usize..9)) {
            let c = canonical_two_electron_key(k);
            prop_assert_eq!(canonical_two_electron_key(c), c);
            for img in images(k) {
                prop_assert_eq!(canonical_two_electron_key(img), c);
            }
        }
    }
}
