//! Occupancy configurations and the event-driven dynamics.
//!
//! The generator moves one particle from `i` to `j` at rate `1/n` for every
//! ordered pair `(i, j)` with `η_i > 0`, including `i = j`. Summed over
//! destinations, each non-empty site fires at unit rate, so the total event
//! rate is the number of non-empty sites. Self-jumps are drawn like any other
//! destination and leave the heights unchanged.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::RngStream;

const NOT_LISTED: u32 = u32::MAX;

/// Heights of `n` sites holding `m` particles, plus the simulation clock.
///
/// Non-empty sites are kept in a dense index array so that a uniformly chosen
/// non-empty site costs one random draw, and insert/remove are O(1).
#[derive(Debug, Clone)]
pub struct Configuration {
    heights: Vec<u64>,
    m: u64,
    nonempty: Vec<u32>,
    slot: Vec<u32>,
    clock: f64,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.heights == other.heights && self.clock == other.clock
    }
}

impl Configuration {
    pub fn new(heights: Vec<u64>) -> Result<Self> {
        if heights.is_empty() {
            return Err(Error::InvalidInput("configuration needs at least one site"));
        }
        if heights.len() >= NOT_LISTED as usize {
            return Err(Error::InvalidInput("too many sites"));
        }
        let mut m: u64 = 0;
        for &h in &heights {
            m = m
                .checked_add(h)
                .ok_or(Error::InvalidInput("particle count overflows u64"))?;
        }
        let mut nonempty = Vec::new();
        let mut slot = vec![NOT_LISTED; heights.len()];
        for (i, &h) in heights.iter().enumerate() {
            if h > 0 {
                slot[i] = nonempty.len() as u32;
                nonempty.push(i as u32);
            }
        }
        Ok(Self {
            heights,
            m,
            nonempty,
            slot,
            clock: 0.0,
        })
    }

    /// All `m` particles stacked on site 0.
    pub fn worst_case(n: usize, m: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1"));
        }
        let mut heights = vec![0; n];
        heights[0] = m;
        Self::new(heights)
    }

    /// Builds a configuration with solid heights `⌊u_i n⌋` on the first sites
    /// and the remaining `round(ρn) − Σ⌊u_i n⌋` particles spread as evenly as
    /// possible over the other sites (lowest indices get the extra particle).
    pub fn from_profile(n: usize, rho: f64, u: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1"));
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::InvalidInput("density must be finite and non-negative"));
        }
        let solid = u.iter().rposition(|&x| x > 0.0).map_or(0, |p| p + 1);
        if solid > n {
            return Err(Error::InvalidInput("profile has more solid sites than n"));
        }
        let m = libm::round(rho * n as f64) as u64;
        let mut heights = vec![0u64; n];
        let mut used = 0u64;
        for (i, &ui) in u[..solid].iter().enumerate() {
            if !(ui >= 0.0) {
                return Err(Error::InvalidInput("profile entries must be non-negative"));
            }
            heights[i] = libm::floor(ui * n as f64) as u64;
            used += heights[i];
        }
        if used > m {
            return Err(Error::InvalidInput("profile holds more than rho*n particles"));
        }
        let rest = m - used;
        let liquid = (n - solid) as u64;
        match rest.checked_div(liquid) {
            Some(base) => {
                let extra = rest % liquid;
                for (j, h) in heights[solid..].iter_mut().enumerate() {
                    *h = base + u64::from((j as u64) < extra);
                }
            }
            None => heights[n - 1] += rest,
        }
        Self::new(heights)
    }

    pub fn n(&self) -> usize {
        self.heights.len()
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn heights(&self) -> &[u64] {
        &self.heights
    }

    pub fn height(&self, site: usize) -> u64 {
        self.heights[site]
    }

    pub fn nonempty_count(&self) -> usize {
        self.nonempty.len()
    }

    pub fn empty_count(&self) -> usize {
        self.n() - self.nonempty.len()
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    /// Resets the clock, e.g. when a configuration is reused as a fresh start.
    pub fn with_clock(mut self, clock: f64) -> Self {
        self.clock = clock;
        self
    }

    pub fn max_height(&self) -> u64 {
        self.heights.iter().copied().max().unwrap_or(0)
    }

    /// Site indices ordered by decreasing height, ties by lowest index.
    pub fn solid_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n()).collect();
        idx.sort_by(|&a, &b| self.heights[b].cmp(&self.heights[a]).then(a.cmp(&b)));
        idx
    }

    /// Sum of the `l` largest heights.
    pub fn top_mass(&self, l: usize) -> u64 {
        if l == 0 {
            return 0;
        }
        let mut h = self.heights.clone();
        h.sort_unstable_by(|a, b| b.cmp(a));
        h[..l.min(h.len())].iter().sum()
    }

    /// Empties the `l` highest sites (ties broken by lowest index).
    pub fn truncate_solid(&self, l: usize) -> Result<Self> {
        if l > self.n() {
            return Err(Error::InvalidInput("cannot truncate more sites than n"));
        }
        let mut heights = self.heights.clone();
        for &i in self.solid_order().iter().take(l) {
            heights[i] = 0;
        }
        Ok(Self::new(heights)?.with_clock(self.clock))
    }

    #[inline]
    fn push_nonempty(&mut self, site: usize) {
        self.slot[site] = self.nonempty.len() as u32;
        self.nonempty.push(site as u32);
    }

    #[inline]
    fn remove_nonempty(&mut self, site: usize) {
        let pos = self.slot[site] as usize;
        let last = self.nonempty.pop().expect("site listed as nonempty");
        if pos < self.nonempty.len() {
            self.nonempty[pos] = last;
            self.slot[last as usize] = pos as u32;
        }
        self.slot[site] = NOT_LISTED;
    }

    /// Moves one particle from `src` to `dst` if `src` is non-empty.
    /// Returns whether the move was allowed.
    #[inline]
    pub fn attempt(&mut self, src: usize, dst: usize) -> bool {
        if self.heights[src] == 0 {
            return false;
        }
        if src != dst {
            self.heights[src] -= 1;
            if self.heights[src] == 0 {
                self.remove_nonempty(src);
            }
            if self.heights[dst] == 0 {
                self.push_nonempty(dst);
            }
            self.heights[dst] += 1;
        }
        true
    }

    #[inline]
    fn jump(&mut self, rng: &mut RngStream) {
        let src = self.nonempty[rng.below(self.nonempty.len())] as usize;
        let dst = rng.below(self.heights.len());
        self.attempt(src, dst);
    }

    /// Advances by exactly one event (possibly a self-jump).
    pub fn step(&mut self, rng: &mut RngStream) -> Result<()> {
        let k = self.nonempty.len();
        if k == 0 {
            return Err(Error::AbsorbingEmpty);
        }
        self.clock += rng.exp1() / k as f64;
        self.jump(rng);
        Ok(())
    }

    /// Runs the chain up to `t_end`, calling `observer(index, t, state)` at
    /// each of `sample_times` with the state in force at that time. The final
    /// holding time is cut at `t_end`, which is exact by memorylessness.
    ///
    /// Returns the number of events executed.
    pub fn run_until<F>(
        &mut self,
        t_end: f64,
        rng: &mut RngStream,
        sample_times: &[f64],
        mut observer: F,
    ) -> Result<u64>
    where
        F: FnMut(usize, f64, &Configuration),
    {
        check_schedule(self.clock, t_end, sample_times)?;
        let mut next_sample = 0;
        let mut events = 0u64;
        loop {
            let k = self.nonempty.len();
            let next_jump = if k == 0 {
                f64::INFINITY
            } else {
                self.clock + rng.exp1() / k as f64
            };
            while next_sample < sample_times.len() && sample_times[next_sample] < next_jump {
                observer(next_sample, sample_times[next_sample], self);
                next_sample += 1;
            }
            if next_jump > t_end {
                break;
            }
            self.jump(rng);
            self.clock = next_jump;
            events += 1;
        }
        self.clock = t_end;
        Ok(events)
    }
}

fn check_schedule(clock: f64, t_end: f64, sample_times: &[f64]) -> Result<()> {
    if !(t_end >= clock) || t_end.is_nan() {
        return Err(Error::InvalidInput("t_end must not precede the current clock"));
    }
    let mut prev = clock;
    for &t in sample_times {
        if !(t >= prev) {
            return Err(Error::InvalidInput(
                "sample times must be non-decreasing and not before the clock",
            ));
        }
        prev = t;
    }
    if prev > t_end {
        return Err(Error::InvalidInput("sample times must not exceed t_end"));
    }
    Ok(())
}

/// Runs several configurations on one shared set of Poisson clocks: attempts
/// arrive at rate `n`, each picking a uniform source and destination, and
/// every configuration performs the move if its source is non-empty. This is
/// the graphical construction with `n²` rate-`1/n` clocks, and it preserves
/// the coordinate-wise order between configurations.
///
/// `observer(index, t, states)` sees all configurations at each sample time.
/// Returns the number of attempts.
pub fn run_coupled<F>(
    configs: &mut [Configuration],
    t_end: f64,
    rng: &mut RngStream,
    sample_times: &[f64],
    mut observer: F,
) -> Result<u64>
where
    F: FnMut(usize, f64, &[Configuration]),
{
    let Some(first) = configs.first() else {
        return Err(Error::InvalidInput("no configurations to couple"));
    };
    let n = first.n();
    let clock = first.clock;
    for c in configs.iter() {
        if c.n() != n {
            return Err(Error::SiteCountMismatch {
                left: n,
                right: c.n(),
            });
        }
        if c.clock != clock {
            return Err(Error::InvalidInput("coupled configurations must share a clock"));
        }
    }
    check_schedule(clock, t_end, sample_times)?;
    let rate = n as f64;
    let mut now = clock;
    let mut next_sample = 0;
    let mut attempts = 0u64;
    loop {
        let next = now + rng.exp1() / rate;
        while next_sample < sample_times.len() && sample_times[next_sample] < next {
            observer(next_sample, sample_times[next_sample], configs);
            next_sample += 1;
        }
        if next > t_end {
            break;
        }
        let src = rng.below(n);
        let dst = rng.below(n);
        for c in configs.iter_mut() {
            c.attempt(src, dst);
            c.clock = next;
        }
        now = next;
        attempts += 1;
    }
    for c in configs.iter_mut() {
        c.clock = t_end;
    }
    Ok(attempts)
}
