//! Deterministic sampling of points in the unit interval.
//!
//! Every sample is a dyadic rational `k / 2^bits` drawn from a counter-mode
//! ChaCha stream: the experiment seed keys the cipher and the sample index
//! selects the stream, so sample `i` is the same point no matter how many
//! worker threads are running or in which order samples are produced.  The
//! low bit is forced to 1, which keeps the numerator odd — the point is then
//! never exactly representable with fewer bits, so its digit and quotient
//! streams cannot terminate early by accident.

use crate::kernel::{make_rational, ExactRational};
use crate::{Error, Int, Result};
use num_bigint::Sign;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Draw sample `index` of the stream keyed by `seed`: an odd dyadic rational
/// `k / 2^bits` in `(0, 1)`.
pub fn sample_point(seed: u64, index: u64, bits: u64) -> Result<ExactRational> {
    if bits < 8 {
        return Err(Error::invalid("sample precision must be at least 8 bits"));
    }
    let nbytes = usize::try_from(bits.div_ceil(8))
        .map_err(|_| Error::invalid("sample precision out of range"))?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut buf = vec![0u8; nbytes];
    rng.fill_bytes(&mut buf);
    // Interpret little-endian, mask down to exactly `bits` bits, force odd.
    let excess = (8 * nbytes as u64 - bits) as u32;
    if excess > 0 {
        let keep = 0xffu8 >> excess;
        *buf.last_mut().expect("nbytes >= 1") &= keep;
    }
    buf[0] |= 1;
    let num = Int::from_bytes_le(Sign::Plus, &buf);
    let den = Int::from(1u8) << bits;
    make_rational(num, den)
}
