//! 1-bit pixel packing: least-significant bit first, row-major, frames
//! concatenated without per-frame alignment.

/// Packs 0/1 values into bytes; the final byte is zero-padded.
pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b != 0 {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

/// Unpacks `count` bits starting at bit offset `start`.
pub fn unpack_bits(bytes: &[u8], start: usize, count: usize) -> Vec<u8> {
    (start..start + count)
        .map(|i| (bytes[i / 8] >> (i % 8)) & 1)
        .collect()
}

/// Byte length of `pixels` packed bits, padded to an even length.
pub fn packed_len(pixels: usize) -> usize {
    let n = pixels.div_ceil(8);
    n + n % 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Straightforward per-bit oracle with explicit powers of two.
    fn naive_pack(bits: &[u8]) -> Vec<u8> {
        bits.chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| u32::from(b) * 2u32.pow(j as u32))
                    .sum::<u32>() as u8
            })
            .collect()
    }

    #[test]
    fn two_by_two_diagonal() {
        assert_eq!(pack_bits(&[1, 0, 0, 1]), vec![0x09]);
    }

    #[test]
    fn frames_are_not_byte_aligned() {
        // Two 3-pixel frames share one byte.
        assert_eq!(pack_bits(&[1, 1, 1, 0, 0, 1]), vec![0b0010_0111]);
        assert_eq!(unpack_bits(&[0b0010_0111], 3, 3), vec![0, 0, 1]);
    }

    proptest! {
        #[test]
        fn matches_naive_and_round_trips(bits in prop::collection::vec(0u8..=1, 0..200)) {
            let packed = pack_bits(&bits);
            prop_assert_eq!(&packed, &naive_pack(&bits));
            prop_assert_eq!(packed.len(), bits.len().div_ceil(8));
            prop_assert_eq!(unpack_bits(&packed, 0, bits.len()), bits);
        }
    }
}
