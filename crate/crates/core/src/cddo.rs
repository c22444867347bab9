//! Continuous Child Drawing Development Optimization.
//!
//! A population of drawings moves through `[lower, upper]^D`. Each iteration
//! draws one random hand pressure (RHP) for the whole population; a drawing
//! whose sampled hand pressure falls below it takes a skill step toward its
//! personal and the global best, offset by its golden ratio. Drawings whose
//! golden ratio lies close to φ instead copy a pattern from memory nudged by
//! the global best. Everything else stays put for the iteration.
//!
//! The golden ratio of a drawing inside `[0, 1]` is at least 1, so a skill
//! step almost always lands above the upper bound. Clamping would pin every
//! moved component at 1 and the swarm stops after an iteration or two; the
//! default [`BoundaryPolicy::Wrap`] folds the step back periodically, which
//! keeps the attraction toward the bests and turns the golden-ratio offset
//! into a shift. Clamping is still available.
//!
//! Random draws happen in a fixed order so that a seed fully determines a
//! run: RHP once per iteration, then for every drawing in index order its
//! hand-pressure index, its length/width indices, the rate re-draw of the
//! branch taken and, for the creativity branch, the pattern-memory index.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{stream_rng, Stream};

/// φ, the target of the golden-ratio gate.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// Magnitude substituted for a near-zero length component in the golden ratio.
pub const DIVISION_EPSILON: f64 = 1e-9;

/// Rate range used after a skill (low hand pressure) update.
pub const HIGH_RATES: (f64, f64) = (0.6, 1.0);
/// Rate range used after a creativity update.
pub const LOW_RATES: (f64, f64) = (0.0, 0.5);

/// Box constraint shared by every dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || lower >= upper {
            return Err(invalid(format!(
                "bounds require finite lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    #[inline]
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lower..=self.upper).contains(&x)
    }
}

/// What happens to a component that leaves the box after an update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryPolicy {
    /// Saturate at the violated bound.
    Clamp,
    /// Mirror back into the box, folding repeatedly for large excursions.
    Reflect,
    /// Re-enter from the opposite bound (periodic box).
    #[default]
    Wrap,
    /// Redraw the component uniformly inside the box.
    Random,
}

impl BoundaryPolicy {
    pub fn apply<R: Rng + ?Sized>(self, x: f64, bounds: &Bounds, rng: &mut R) -> f64 {
        if bounds.contains(x) {
            return x;
        }
        let Bounds { lower, upper } = *bounds;
        let width = upper - lower;
        match self {
            BoundaryPolicy::Clamp => bounds.clamp(x),
            BoundaryPolicy::Reflect => {
                let t = (x - lower).rem_euclid(2.0 * width);
                bounds.clamp(lower + if t > width { 2.0 * width - t } else { t })
            }
            BoundaryPolicy::Wrap => bounds.clamp(lower + (x - lower).rem_euclid(width)),
            BoundaryPolicy::Random => rng.gen_range(lower..=upper),
        }
    }
}

impl std::str::FromStr for BoundaryPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "clamp" => Ok(Self::Clamp),
            "reflect" => Ok(Self::Reflect),
            "wrap" => Ok(Self::Wrap),
            "random" => Ok(Self::Random),
            other => Err(invalid(format!(
                "unknown boundary policy {other:?} (expected clamp, reflect, wrap or random)"
            ))),
        }
    }
}

impl std::fmt::Display for BoundaryPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Clamp => "clamp",
            Self::Reflect => "reflect",
            Self::Wrap => "wrap",
            Self::Random => "random",
        })
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            lower: 0.0,
            upper: 1.0,
        }
    }
}

/// Optimizer tunables. `Default` yields the reference parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CddoParams {
    pub population_size: usize,
    pub max_iterations: usize,
    /// Creativity rate, scales the global best in the creativity update.
    pub cr: f64,
    /// Skill rate every drawing starts with.
    pub sr_init: f64,
    /// Level rate every drawing starts with.
    pub lr_init: f64,
    /// Pattern memory capacity.
    pub pattern_size: usize,
    pub bounds: Bounds,
    pub boundary: BoundaryPolicy,
    /// Maximum |GR - φ| for the creativity branch.
    pub gr_tolerance: f64,
    /// Keep SR/LR at their initial values instead of re-drawing per branch.
    pub fixed_rates: bool,
    pub seed: u64,
}

impl Default for CddoParams {
    fn default() -> Self {
        Self {
            population_size: 30,
            max_iterations: 100,
            cr: 0.1,
            sr_init: 0.9,
            lr_init: 0.01,
            pattern_size: 10,
            bounds: Bounds::default(),
            boundary: BoundaryPolicy::Wrap,
            gr_tolerance: 0.1,
            fixed_rates: false,
            seed: 0,
        }
    }
}

impl CddoParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(invalid("population_size must be at least 1"));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be at least 1"));
        }
        if self.pattern_size == 0 {
            return Err(invalid("pattern_size must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return Err(invalid(format!("cr must lie in [0, 1], got {}", self.cr)));
        }
        if !(self.gr_tolerance > 0.0 && self.gr_tolerance.is_finite()) {
            return Err(invalid(format!(
                "gr_tolerance must be positive, got {}",
                self.gr_tolerance
            )));
        }
        if !(self.sr_init.is_finite() && self.lr_init.is_finite()) {
            return Err(invalid("sr_init and lr_init must be finite"));
        }
        Bounds::new(self.bounds.lower, self.bounds.upper)?;
        Ok(())
    }
}

/// One candidate solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Drawing {
    pub position: Vec<f64>,
    pub fitness: f64,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub skill_rate: f64,
    pub level_rate: f64,
}

impl Drawing {
    fn new(position: Vec<f64>, params: &CddoParams) -> Self {
        Self {
            best_position: position.clone(),
            position,
            fitness: f64::INFINITY,
            best_fitness: f64::INFINITY,
            skill_rate: params.sr_init,
            level_rate: params.lr_init,
        }
    }

    fn record(&mut self, fitness: f64) {
        self.fitness = fitness;
        if fitness < self.best_fitness {
            self.best_fitness = fitness;
            self.best_position.clone_from(&self.position);
        }
    }
}

/// Bounded ring buffer of global-best positions.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternMemory {
    entries: Vec<Vec<f64>>,
    capacity: usize,
    cursor: usize,
}

impl PatternMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "pattern memory needs a positive capacity");
        Self {
            entries: Vec::with_capacity(capacity),
            capacity,
            cursor: 0,
        }
    }

    /// Writes at the cursor, overwriting the oldest entry once full.
    pub fn store(&mut self, position: Vec<f64>) {
        if self.entries.len() < self.capacity {
            self.entries.push(position);
        } else {
            self.entries[self.cursor] = position;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Uniformly chosen entry, or `None` while the memory is empty.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&[f64]> {
        if self.entries.is_empty() {
            return None;
        }
        let idx = rng.gen_range(0..self.entries.len());
        Some(&self.entries[idx])
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }
}

/// Random starting population, fitness not yet evaluated.
pub fn init_population<R: Rng + ?Sized>(
    params: &CddoParams,
    dimension: usize,
    rng: &mut R,
) -> Result<Vec<Drawing>> {
    if dimension == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let Bounds { lower, upper } = params.bounds;
    Ok((0..params.population_size)
        .map(|_| {
            let position = (0..dimension)
                .map(|_| rng.gen_range(lower..=upper))
                .collect();
            Drawing::new(position, params)
        })
        .collect())
}

pub fn random_hand_pressure<R: Rng + ?Sized>(bounds: &Bounds, rng: &mut R) -> f64 {
    rng.gen_range(bounds.lower..=bounds.upper)
}

/// Hand pressure of a drawing: one of its components, chosen uniformly.
pub fn select_hand_pressure<R: Rng + ?Sized>(position: &[f64], rng: &mut R) -> f64 {
    position[rng.gen_range(0..position.len())]
}

/// Independent uniform `(length, width)` component indices; they may coincide.
pub fn select_lw_indices<R: Rng + ?Sized>(dimension: usize, rng: &mut R) -> (usize, usize) {
    let length = rng.gen_range(0..dimension);
    let width = rng.gen_range(0..dimension);
    (length, width)
}

/// `(x[L] + x[W]) / x[L]`. A length component within [`DIVISION_EPSILON`] of
/// zero is replaced by the epsilon carrying its sign (positive for exact zero).
pub fn golden_ratio(position: &[f64], length: usize, width: usize) -> f64 {
    let l = position[length];
    let w = position[width];
    let denom = if l.abs() < DIVISION_EPSILON {
        if l < 0.0 {
            -DIVISION_EPSILON
        } else {
            DIVISION_EPSILON
        }
    } else {
        l
    };
    (l + w) / denom
}

/// `gr + sr * (pbest - x) + lr * (gbest - x)`, with `gr` added to every
/// component. The result is not clamped.
pub fn skill_update(drawing: &Drawing, gbest: &[f64], gr: f64, sr: f64, lr: f64) -> Vec<f64> {
    drawing
        .position
        .iter()
        .zip(&drawing.best_position)
        .zip(gbest)
        .map(|((&x, &pb), &gb)| gr + sr * (pb - x) + lr * (gb - x))
        .collect()
}

/// `pattern + cr * gbest`. The result is not clamped.
pub fn creativity_update(pattern: &[f64], gbest: &[f64], cr: f64) -> Vec<f64> {
    pattern
        .iter()
        .zip(gbest)
        .map(|(&p, &g)| p + cr * g)
        .collect()
}

/// Complete optimizer state between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct Swarm {
    pub drawings: Vec<Drawing>,
    pub memory: PatternMemory,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub evaluations: usize,
}

fn evaluate<F>(fitness: &mut F, drawing: usize, position: &[f64]) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let value = fitness(position).map_err(|e| Error::Fitness {
        drawing,
        source: Box::new(e),
    })?;
    if value.is_nan() {
        return Err(Error::Fitness {
            drawing,
            source: Box::new(invalid("fitness function returned NaN")),
        });
    }
    Ok(value)
}

impl Swarm {
    /// Builds and evaluates the initial population and seeds the pattern
    /// memory with the first global best.
    pub fn initialize<F, R>(
        params: &CddoParams,
        dimension: usize,
        fitness: &mut F,
        rng: &mut R,
    ) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<f64>,
        R: Rng + ?Sized,
    {
        params.validate()?;
        let mut drawings = init_population(params, dimension, rng)?;
        for (i, d) in drawings.iter_mut().enumerate() {
            let value = evaluate(fitness, i, &d.position)?;
            d.record(value);
        }
        let mut swarm = Self {
            best_position: drawings[0].best_position.clone(),
            best_fitness: drawings[0].best_fitness,
            drawings,
            memory: PatternMemory::new(params.pattern_size),
            evaluations: params.population_size,
        };
        swarm.refresh_global_best();
        swarm.memory.store(swarm.best_position.clone());
        Ok(swarm)
    }

    pub fn dimension(&self) -> usize {
        self.best_position.len()
    }

    // Earliest index wins ties so the result does not depend on float noise.
    fn refresh_global_best(&mut self) {
        for d in &self.drawings {
            if d.best_fitness < self.best_fitness {
                self.best_fitness = d.best_fitness;
                self.best_position.clone_from(&d.best_position);
            }
        }
    }

    /// One full iteration. Positions are updated against the global best as
    /// it stood at the start of the iteration; moved drawings are then
    /// evaluated in index order, bests updated and the pattern memory
    /// refreshed once.
    pub fn step<F, R>(&mut self, params: &CddoParams, fitness: &mut F, rng: &mut R) -> Result<()>
    where
        F: FnMut(&[f64]) -> Result<f64>,
        R: Rng + ?Sized,
    {
        let dimension = self.dimension();
        let bounds = params.bounds;
        let rhp = random_hand_pressure(&bounds, rng);
        let gbest = self.best_position.clone();
        let mut moved = Vec::with_capacity(self.drawings.len());

        for (i, d) in self.drawings.iter_mut().enumerate() {
            let hp = select_hand_pressure(&d.position, rng);
            let (length, width) = select_lw_indices(dimension, rng);
            let gr = golden_ratio(&d.position, length, width);

            let next = if hp < rhp {
                let next = skill_update(d, &gbest, gr, d.skill_rate, d.level_rate);
                if !params.fixed_rates {
                    d.skill_rate = rng.gen_range(HIGH_RATES.0..=HIGH_RATES.1);
                    d.level_rate = rng.gen_range(HIGH_RATES.0..=HIGH_RATES.1);
                }
                next
            } else if (gr - GOLDEN_RATIO).abs() <= params.gr_tolerance {
                if !params.fixed_rates {
                    d.skill_rate = rng.gen_range(LOW_RATES.0..=LOW_RATES.1);
                    d.level_rate = rng.gen_range(LOW_RATES.0..=LOW_RATES.1);
                }
                let pattern = self.memory.sample(rng).unwrap_or(&gbest);
                creativity_update(pattern, &gbest, params.cr)
            } else {
                continue;
            };

            let next: Vec<f64> = next
                .into_iter()
                .map(|x| params.boundary.apply(x, &bounds, rng))
                .collect();
            if next != d.position {
                d.position = next;
                moved.push(i);
            }
        }

        for i in moved {
            let value = evaluate(fitness, i, &self.drawings[i].position)?;
            self.evaluations += 1;
            self.drawings[i].record(value);
        }
        self.refresh_global_best();
        self.memory.store(self.best_position.clone());
        Ok(())
    }
}

/// Outcome of a full optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Global best after initialization, before the first iteration.
    pub initial_best_fitness: f64,
    /// Global best after each iteration.
    pub fitness_history: Vec<f64>,
    /// Number of fitness function calls.
    pub evaluations: usize,
}

/// Runs initialization followed by `max_iterations` steps.
pub fn optimize<F, R>(
    params: &CddoParams,
    dimension: usize,
    mut fitness: F,
    rng: &mut R,
) -> Result<OptimizeResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
    R: Rng + ?Sized,
{
    let mut swarm = Swarm::initialize(params, dimension, &mut fitness, rng)?;
    let initial_best_fitness = swarm.best_fitness;
    let mut fitness_history = Vec::with_capacity(params.max_iterations);
    for _ in 0..params.max_iterations {
        swarm.step(params, &mut fitness, rng)?;
        fitness_history.push(swarm.best_fitness);
    }
    Ok(OptimizeResult {
        best_position: swarm.best_position,
        best_fitness: swarm.best_fitness,
        initial_best_fitness,
        fitness_history,
        evaluations: swarm.evaluations,
    })
}

/// [`optimize`] with the search stream derived from `params.seed`.
pub fn optimize_seeded<F>(
    params: &CddoParams,
    dimension: usize,
    fitness: F,
) -> Result<OptimizeResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut rng = stream_rng(params.seed, Stream::Search);
    optimize(params, dimension, fitness, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn drawing(position: Vec<f64>, best: Vec<f64>) -> Drawing {
        Drawing {
            position,
            fitness: 0.0,
            best_position: best,
            best_fitness: 0.0,
            skill_rate: 0.9,
            level_rate: 0.01,
        }
    }

    #[test]
    fn bounds_reject_inverted_and_empty_ranges() {
        assert!(Bounds::new(1.0, 0.0).is_err());
        assert!(Bounds::new(0.5, 0.5).is_err());
        assert!(Bounds::new(f64::NAN, 1.0).is_err());
        assert!(Bounds::new(0.0, 1.0).is_ok());
    }

    #[test]
    fn init_population_default_size_and_range() {
        let params = CddoParams::default();
        let pop = init_population(&params, 4, &mut seeded_rng(1)).unwrap();
        assert_eq!(pop.len(), 30);
        for d in &pop {
            assert_eq!(d.position.len(), 4);
            assert!(d.position.iter().all(|&x| (0.0..=1.0).contains(&x)));
            assert_eq!(d.position, d.best_position);
        }
    }

    #[test]
    fn init_population_degenerate_range() {
        let params = CddoParams {
            population_size: 1,
            bounds: Bounds::new(5.0, 5.001).unwrap(),
            ..CddoParams::default()
        };
        let pop = init_population(&params, 1, &mut seeded_rng(3)).unwrap();
        assert_eq!(pop.len(), 1);
        assert!((5.0..=5.001).contains(&pop[0].position[0]));
    }

    #[test]
    fn init_population_is_deterministic() {
        let params = CddoParams::default();
        let a = init_population(&params, 6, &mut seeded_rng(42)).unwrap();
        let b = init_population(&params, 6, &mut seeded_rng(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_population_rejects_zero_dimension() {
        let err = init_population(&CddoParams::default(), 0, &mut seeded_rng(0)).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn rhp_in_bounds() {
        let mut rng = seeded_rng(9);
        let unit = Bounds::default();
        for _ in 0..1000 {
            assert!(unit.contains(random_hand_pressure(&unit, &mut rng)));
        }
        let narrow = Bounds::new(3.0, 3.0 + 1e-12).unwrap();
        assert!((random_hand_pressure(&narrow, &mut rng) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn hand_pressure_single_and_constant() {
        let mut rng = seeded_rng(0);
        assert_eq!(select_hand_pressure(&[0.7], &mut rng), 0.7);
        for _ in 0..20 {
            assert_eq!(select_hand_pressure(&[0.3, 0.3, 0.3], &mut rng), 0.3);
        }
    }

    #[test]
    fn lw_indices_single_dimension() {
        let mut rng = seeded_rng(0);
        assert_eq!(select_lw_indices(1, &mut rng), (0, 0));
        for _ in 0..1000 {
            let (l, w) = select_lw_indices(126, &mut rng);
            assert!(l < 126 && w < 126);
        }
    }

    #[test]
    fn golden_ratio_direct() {
        assert_eq!(golden_ratio(&[1.0, 1.0], 0, 1), 2.0);
        assert!((golden_ratio(&[1.0, 0.618], 0, 1) - 1.618).abs() < 1e-15);
        // L and W may be the same component.
        assert_eq!(golden_ratio(&[0.4], 0, 0), 2.0);
    }

    #[test]
    fn golden_ratio_singular_length() {
        let gr = golden_ratio(&[0.0, 0.5], 0, 1);
        assert_eq!(gr, 0.5 / DIVISION_EPSILON);
        let neg = golden_ratio(&[-1e-12, 0.5], 0, 1);
        assert!(neg < 0.0 && neg.is_finite());
    }

    #[test]
    fn skill_update_examples() {
        let d = drawing(vec![0.3, 0.6], vec![0.3, 0.6]);
        assert_eq!(
            skill_update(&d, &[0.3, 0.6], 0.0, 0.9, 0.01),
            vec![0.0, 0.0]
        );

        let d = drawing(vec![0.0, 0.0], vec![1.0, 1.0]);
        let x = skill_update(&d, &[1.0, 1.0], 0.0, 0.9, 0.01);
        for v in x {
            assert!((v - 0.91).abs() < 1e-15);
        }

        let d = drawing(vec![0.2, 0.9, 0.4], vec![0.1, 0.1, 0.1]);
        assert_eq!(
            skill_update(&d, &[0.5, 0.5, 0.5], 1.618, 0.0, 0.0),
            vec![1.618; 3]
        );
    }

    #[test]
    fn creativity_update_examples() {
        assert_eq!(
            creativity_update(&[0.2, 0.7], &[0.9, 0.1], 0.0),
            vec![0.2, 0.7]
        );
        let x = creativity_update(&[0.5], &[1.0], 0.1);
        assert!((x[0] - 0.6).abs() < 1e-15);
        assert_eq!(creativity_update(&[0.0; 3], &[0.0; 3], 0.1), vec![0.0; 3]);
    }

    #[test]
    fn pattern_memory_ring() {
        let mut pm = PatternMemory::new(1);
        pm.store(vec![1.0]);
        pm.store(vec![2.0]);
        assert_eq!(pm.entries(), &[vec![2.0]]);

        let mut pm = PatternMemory::new(10);
        for i in 0..10 {
            pm.store(vec![i as f64]);
        }
        assert_eq!(pm.len(), 10);
        for i in 0..10 {
            assert!(pm.entries().contains(&vec![i as f64]));
        }
        pm.store(vec![10.0]);
        assert_eq!(pm.len(), 10);
        assert!(!pm.entries().contains(&vec![0.0]));
        assert!(pm.entries().contains(&vec![10.0]));
        assert_eq!(pm.cursor(), 1);
    }

    #[test]
    fn pattern_memory_sample_empty_and_single() {
        let mut rng = seeded_rng(0);
        let mut pm = PatternMemory::new(4);
        assert!(pm.sample(&mut rng).is_none());
        pm.store(vec![0.25, 0.75]);
        assert_eq!(pm.sample(&mut rng).unwrap(), &[0.25, 0.75]);
    }

    #[test]
    fn params_validation() {
        assert!(CddoParams::default().validate().is_ok());
        let bad = CddoParams {
            population_size: 0,
            ..CddoParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = CddoParams {
            cr: 1.5,
            ..CddoParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = CddoParams {
            gr_tolerance: 0.0,
            ..CddoParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn boundary_policies() {
        let mut rng = seeded_rng(0);
        let unit = Bounds::default();
        let apply = |p: BoundaryPolicy, x: f64, rng: &mut ChaCha| p.apply(x, &unit, rng);
        for p in [
            BoundaryPolicy::Clamp,
            BoundaryPolicy::Reflect,
            BoundaryPolicy::Wrap,
            BoundaryPolicy::Random,
        ] {
            assert_eq!(apply(p, 0.25, &mut rng), 0.25);
            assert_eq!(apply(p, 1.0, &mut rng), 1.0);
            for x in [-7.3, -0.2, 1.2, 2.0, 3.75, 5e8] {
                assert!(unit.contains(apply(p, x, &mut rng)), "{p} {x}");
            }
            assert_eq!(p.to_string().parse::<BoundaryPolicy>().unwrap(), p);
        }
        assert_eq!(apply(BoundaryPolicy::Clamp, 1.7, &mut rng), 1.0);
        assert_eq!(apply(BoundaryPolicy::Clamp, -0.3, &mut rng), 0.0);
        assert!((apply(BoundaryPolicy::Reflect, 1.25, &mut rng) - 0.75).abs() < 1e-15);
        assert!((apply(BoundaryPolicy::Reflect, -0.25, &mut rng) - 0.25).abs() < 1e-15);
        assert!((apply(BoundaryPolicy::Reflect, 2.25, &mut rng) - 0.25).abs() < 1e-15);
        assert!((apply(BoundaryPolicy::Wrap, 1.25, &mut rng) - 0.25).abs() < 1e-15);
        assert!((apply(BoundaryPolicy::Wrap, -0.25, &mut rng) - 0.75).abs() < 1e-15);
        assert_eq!(apply(BoundaryPolicy::Wrap, 2.0, &mut rng), 0.0);
        assert!("sideways".parse::<BoundaryPolicy>().is_err());

        let shifted = Bounds::new(-2.0, 3.0).unwrap();
        assert!((BoundaryPolicy::Wrap.apply(4.0, &shifted, &mut rng) - (-1.0)).abs() < 1e-12);
        assert!((BoundaryPolicy::Reflect.apply(4.0, &shifted, &mut rng) - 2.0).abs() < 1e-12);
    }

    type ChaCha = rand_chacha::ChaCha8Rng;

    #[test]
    fn fitness_failure_names_drawing() {
        let params = CddoParams {
            population_size: 5,
            ..CddoParams::default()
        };
        let mut calls = 0;
        let res = optimize(
            &params,
            3,
            |_x: &[f64]| {
                calls += 1;
                if calls == 3 {
                    Err(invalid("boom"))
                } else {
                    Ok(1.0)
                }
            },
            &mut seeded_rng(0),
        );
        match res {
            Err(Error::Fitness { drawing, .. }) => assert_eq!(drawing, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nan_fitness_is_rejected() {
        let params = CddoParams {
            population_size: 2,
            ..CddoParams::default()
        };
        let res = optimize(&params, 2, |_x: &[f64]| Ok(f64::NAN), &mut seeded_rng(0));
        assert!(matches!(res, Err(Error::Fitness { drawing: 0, .. })));
    }

    #[test]
    fn single_iteration_history() {
        let params = CddoParams {
            max_iterations: 1,
            ..CddoParams::default()
        };
        let res = optimize_seeded(&params, 3, |x: &[f64]| Ok(x.iter().sum())).unwrap();
        assert_eq!(res.fitness_history.len(), 1);
    }

    #[test]
    fn constant_landscape_flat_history() {
        let res = optimize_seeded(&CddoParams::default(), 5, |_x: &[f64]| Ok(0.5)).unwrap();
        assert!(res.fitness_history.iter().all(|&f| f == 0.5));
        assert_eq!(res.best_fitness, 0.5);
    }

    #[test]
    fn fixed_rates_keep_initial_values() {
        let params = CddoParams {
            fixed_rates: true,
            ..CddoParams::default()
        };
        let mut f = |x: &[f64]| Ok(x.iter().map(|v| (v - 0.3).powi(2)).sum::<f64>());
        let mut rng = seeded_rng(5);
        let mut swarm = Swarm::initialize(&params, 4, &mut f, &mut rng).unwrap();
        for _ in 0..20 {
            swarm.step(&params, &mut f, &mut rng).unwrap();
        }
        for d in &swarm.drawings {
            assert_eq!(d.skill_rate, 0.9);
            assert_eq!(d.level_rate, 0.01);
        }
    }
}
