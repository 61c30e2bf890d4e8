/// The 64-bit linear congruential generator all runs draw from. Its output
/// is part of the trajectory format, so it must stay bit-exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lcg {
    state: u64,
}

const MULTIPLIER: u64 = 6364136223846793005;
const INCREMENT: u64 = 1442695040888963407;

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    /// Advances the state and returns it.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT);
        self.state
    }

    /// `s / 2^64` as a binary64 value, after advancing.
    pub fn next_f64(&mut self) -> f64 {
        self.next_u64() as f64 / 18446744073709551616.0
    }
}
