//! Genetic search over five-key-point beam shapes.
//!
//! A chromosome is the full key-point set of a candidate beam; the two end
//! points are pinned, only the three middle points evolve. Fitness is the
//! root-mean-square residual of a straight-line fit to the candidate's
//! torque-angle curve over the operating window, so lower is better and a
//! candidate with no falling torque branch is worthless (infinite residual).
//!
//! All stochastic draws happen on one seeded generator owned by the run
//! loop; fitness evaluations are pure and run in parallel, so a fixed seed
//! reproduces a run bit for bit.

use crate::beam_fem::{
    build_model, solve_force_deflection_covering, BeamDesign, CrossSection, DesignBox, Material,
};
use crate::geometry::{AngleSchedule, CrankGeometry};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

/// Worst possible fitness, assigned when a candidate cannot produce a
/// falling torque branch or its FEM solve fails.
pub const SENTINEL: f64 = f64::INFINITY;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GaError {
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid shape space: {0}")]
    InvalidSpace(String),
    #[error("no candidate produced a finite fitness")]
    NoFeasibleCandidate,
}

/// One candidate beam shape plus its cached evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    key_points: [(f64, f64); 5],
    fitness: Option<f64>,
}

impl Chromosome {
    pub fn new(key_points: [(f64, f64); 5]) -> Self {
        Self {
            key_points,
            fitness: None,
        }
    }

    pub fn key_points(&self) -> &[(f64, f64); 5] {
        &self.key_points
    }

    /// A chromosome carrying a precomputed fitness, for driving the
    /// selection operator directly without an evaluation pass.
    pub fn evaluated(key_points: [(f64, f64); 5], fitness: f64) -> Self {
        Self {
            key_points,
            fitness: Some(fitness),
        }
    }

    /// Cached fitness, or `None` while unevaluated.
    pub fn fitness(&self) -> Option<f64> {
        self.fitness
    }
}

/// Run parameters. Field defaults follow the reference configuration;
/// everything is overridable before calling [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub crossover_probability: f64,
    pub mutation_mu: f64,
    pub mutation_sigma: f64,
    pub cull_fraction: f64,
    pub max_generations: usize,
    /// Absolute residual (N*m) at or below which the search stops.
    pub fitness_threshold: f64,
    pub rng_seed: u64,
    /// Roulette regularizer keeping zero-residual pools well defined.
    pub fitness_epsilon: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 30,
            crossover_probability: 0.30,
            mutation_mu: 1.0,
            mutation_sigma: 0.01,
            cull_fraction: 0.40,
            max_generations: 100,
            fitness_threshold: 0.0,
            rng_seed: 0,
            fitness_epsilon: 1e-12,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        let err = |msg: &str| Err(GaError::InvalidConfig(msg.into()));
        if self.population_size < 4 {
            return err("population_size must be at least 4");
        }
        if !(0.0..=1.0).contains(&self.crossover_probability) {
            return err("crossover_probability must lie in [0, 1]");
        }
        if !self.mutation_mu.is_finite() || !self.mutation_sigma.is_finite() {
            return err("mutation parameters must be finite");
        }
        if self.mutation_sigma < 0.0 {
            return err("mutation_sigma must be nonnegative");
        }
        if !(self.cull_fraction > 0.0 && self.cull_fraction < 1.0) {
            return err("cull_fraction must lie in (0, 1)");
        }
        if self.fitness_threshold.is_nan() || self.fitness_threshold < 0.0 {
            return err("fitness_threshold must be nonnegative");
        }
        if !(self.fitness_epsilon > 0.0) || !self.fitness_epsilon.is_finite() {
            return err("fitness_epsilon must be positive and finite");
        }
        Ok(())
    }
}

/// The sampling domain: a design box with two pinned end points. Middle
/// points live anywhere in the box with projections onto the pin axis
/// strictly between the pins.
#[derive(Debug, Clone, Copy)]
pub struct ShapeSpace {
    design_box: DesignBox,
    pin_a: (f64, f64),
    pin_b: (f64, f64),
}

impl ShapeSpace {
    pub fn new(
        design_box: DesignBox,
        pin_a: (f64, f64),
        pin_b: (f64, f64),
    ) -> Result<Self, GaError> {
        if !design_box.contains(pin_a) || !design_box.contains(pin_b) {
            return Err(GaError::InvalidSpace("pins must lie inside the box".into()));
        }
        let space = Self {
            design_box,
            pin_a,
            pin_b,
        };
        if !(space.chord_coord(pin_b) > space.chord_coord(pin_a)) {
            return Err(GaError::InvalidSpace(
                "pins must span a positive chord".into(),
            ));
        }
        Ok(space)
    }

    pub fn design_box(&self) -> DesignBox {
        self.design_box
    }

    pub fn pins(&self) -> ((f64, f64), (f64, f64)) {
        (self.pin_a, self.pin_b)
    }

    /// Projection onto the pin-to-pin axis, the coordinate middle points are
    /// ordered by.
    fn chord_coord(&self, p: (f64, f64)) -> f64 {
        let ax = self.pin_b.0 - self.pin_a.0;
        let ay = self.pin_b.1 - self.pin_a.1;
        (p.0 - self.pin_a.0) * ax + (p.1 - self.pin_a.1) * ay
    }

    fn sort_middle(&self, points: &mut [(f64, f64); 5]) {
        let mut middle = [points[1], points[2], points[3]];
        middle.sort_by(|p, q| {
            self.chord_coord(*p)
                .partial_cmp(&self.chord_coord(*q))
                .expect("box coordinates are finite")
        });
        points[1..4].copy_from_slice(&middle);
    }

    fn middle_ordered(&self, points: &[(f64, f64); 5]) -> bool {
        points
            .windows(2)
            .all(|w| self.chord_coord(w[0]) < self.chord_coord(w[1]))
    }

    /// Uniform sample over box positions whose sorted middle points fall
    /// strictly between the pins (rejection keeps the accepted distribution
    /// uniform on the valid region).
    fn sample(&self, rng: &mut impl Rng) -> Chromosome {
        for _ in 0..100_000 {
            let mut points = [self.pin_a, (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), self.pin_b];
            for p in points.iter_mut().take(4).skip(1) {
                *p = (
                    rng.random_range(0.0..=self.design_box.length()),
                    rng.random_range(0.0..=self.design_box.depth()),
                );
            }
            self.sort_middle(&mut points);
            if self.middle_ordered(&points) {
                return Chromosome::new(points);
            }
        }
        unreachable!("a positive-measure set of valid shapes exists");
    }

    fn clamp(&self, p: (f64, f64)) -> (f64, f64) {
        (
            p.0.clamp(0.0, self.design_box.length()),
            p.1.clamp(0.0, self.design_box.depth()),
        )
    }
}

/// Outcome of evaluating one chromosome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Root-mean-square residual of the line fit (N*m); [`SENTINEL`] when
    /// the candidate is unusable.
    pub residual: f64,
    /// Whether the problem's own stopping rule is satisfied (for the
    /// reference problem: residual within 2% of the mean torque magnitude).
    pub meets_target: bool,
}

/// A fitness landscape the run loop can search. Implementations must be
/// pure: evaluation order is unspecified and runs in parallel.
pub trait FitnessProblem: Sync {
    fn evaluate(&self, key_points: &[(f64, f64); 5]) -> Evaluation;
}

/// Creates the starting pool: endpoints pinned, middle points sampled
/// uniformly in the box and sorted along the chord axis.
pub fn init_population(
    space: &ShapeSpace,
    config: &GaConfig,
    rng: &mut impl Rng,
) -> Vec<Chromosome> {
    (0..config.population_size)
        .map(|_| space.sample(rng))
        .collect()
}

/// Unconditional one-point crossover: a cut index k in {2, 3, 4} (1-based)
/// is drawn, the points strictly after position k switch parents, and each
/// child's middle points are re-sorted along the chord axis.
pub fn crossover(
    a: &Chromosome,
    b: &Chromosome,
    space: &ShapeSpace,
    rng: &mut impl Rng,
) -> (Chromosome, Chromosome) {
    let k = rng.random_range(2..=4usize);
    let mut c1 = a.key_points;
    let mut c2 = b.key_points;
    for i in k..5 {
        c1[i] = b.key_points[i];
        c2[i] = a.key_points[i];
    }
    space.sort_middle(&mut c1);
    space.sort_middle(&mut c2);
    (Chromosome::new(c1), Chromosome::new(c2))
}

/// Applies [`crossover`] with the configured probability; `None` means the
/// pair was left alone. The coin is always consumed, keeping run replay
/// independent of the outcome.
pub fn maybe_crossover(
    a: &Chromosome,
    b: &Chromosome,
    space: &ShapeSpace,
    probability: f64,
    rng: &mut impl Rng,
) -> Option<(Chromosome, Chromosome)> {
    let crossed = rng.random_bool(probability);
    crossed.then(|| crossover(a, b, space, rng))
}

/// Multiplies each coordinate of the middle (third) key point by an
/// independent Normal(mu, sigma) draw in the box frame, clamping the result
/// to the box.
pub fn mutate(
    c: &Chromosome,
    space: &ShapeSpace,
    mu: f64,
    sigma: f64,
    rng: &mut impl Rng,
) -> Chromosome {
    let normal = Normal::new(mu, sigma).expect("validated mutation parameters");
    let mut points = c.key_points;
    let (x, y) = points[2];
    points[2] = space.clamp((x * normal.sample(rng), y * normal.sample(rng)));
    space.sort_middle(&mut points);
    Chromosome::new(points)
}

/// Removes exactly ceil(cull_fraction * n) chromosomes by repeated roulette
/// draws with removal shares proportional to fitness + epsilon (worse is
/// more likely to go). The pool's best member never enters the wheel. If
/// any candidate share is infinite, draws are uniform over the infinite
/// ones, the limit of the regularized wheel.
pub fn select(population: &mut Vec<Chromosome>, config: &GaConfig, rng: &mut impl Rng) {
    let n = population.len();
    let to_remove = (config.cull_fraction * n as f64).ceil() as usize;
    debug_assert!(population.iter().all(|c| c.fitness.is_some()));
    let best = population
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            a.fitness
                .unwrap()
                .partial_cmp(&b.fitness.unwrap())
                .expect("fitness is never NaN")
        })
        .map(|(i, _)| i)
        .expect("population is never empty");

    let mut removable: Vec<usize> = (0..n).filter(|&i| i != best).collect();
    for _ in 0..to_remove.min(removable.len()) {
        let weights: Vec<f64> = removable
            .iter()
            .map(|&i| population[i].fitness.unwrap() + config.fitness_epsilon)
            .collect();
        let infinite: Vec<usize> = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_infinite())
            .map(|(j, _)| j)
            .collect();
        let pick = if !infinite.is_empty() {
            infinite[rng.random_range(0..infinite.len())]
        } else {
            let total: f64 = weights.iter().sum();
            let mut ball = rng.random_range(0.0..total);
            let mut chosen = weights.len() - 1;
            for (j, w) in weights.iter().enumerate() {
                if ball < *w {
                    chosen = j;
                    break;
                }
                ball -= w;
            }
            chosen
        };
        removable.swap_remove(pick);
    }
    let mut keep = vec![false; n];
    keep[best] = true;
    for &i in &removable {
        keep[i] = true;
    }
    let mut it = keep.iter();
    population.retain(|_| *it.next().unwrap());
}

/// Per-generation progress row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    /// Best-ever residual after this generation (non-increasing).
    pub best_fitness: f64,
    /// Mean over the current pool's finite residuals (infinite when none).
    pub mean_fitness: f64,
    /// Cumulative number of fitness evaluations.
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Chromosome,
    pub history: Vec<GenerationStats>,
}

fn ensure_evaluated(
    population: &mut [Chromosome],
    problem: &impl FitnessProblem,
    counter: &mut usize,
) -> Vec<(usize, Evaluation)> {
    let fresh: Vec<usize> = population
        .iter()
        .enumerate()
        .filter(|(_, c)| c.fitness.is_none())
        .map(|(i, _)| i)
        .collect();
    *counter += fresh.len();
    let results: Vec<(usize, Evaluation)> = fresh
        .par_iter()
        .map(|&i| (i, problem.evaluate(&population[i].key_points)))
        .collect();
    for (i, eval) in &results {
        population[*i].fitness = Some(eval.residual);
    }
    results
}

/// Best-ever candidate and whether its own stopping rule held.
struct Champion {
    chromosome: Chromosome,
    meets_target: bool,
}

impl Champion {
    fn absorb(this: &mut Option<Self>, population: &[Chromosome], fresh: &[(usize, Evaluation)]) {
        for (i, eval) in fresh {
            let better = this
                .as_ref()
                .map_or(true, |c| eval.residual < c.chromosome.fitness.unwrap());
            if better {
                *this = Some(Champion {
                    chromosome: population[*i].clone(),
                    meets_target: eval.meets_target,
                });
            }
        }
    }
}

fn pool_best(population: &[Chromosome]) -> (usize, f64) {
    population
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.fitness.expect("evaluated")))
        .min_by(|(_, a), (_, b)| a.partial_cmp(b).expect("fitness is never NaN"))
        .expect("population is never empty")
}

/// The full loop: evaluate, record, cross, mutate, cull, replenish. Stops
/// as soon as the best residual reaches the threshold (or a candidate
/// satisfies the problem's own rule), or when the generation budget runs
/// out; errors if nothing ever evaluated finite.
pub fn run(
    config: &GaConfig,
    space: &ShapeSpace,
    problem: &impl FitnessProblem,
) -> Result<GaOutcome, GaError> {
    config.validate()?;
    let mut rng = crate::seeded_rng(config.rng_seed);
    let mut population = init_population(space, config, &mut rng);
    let mut best_ever: Option<Champion> = None;
    let mut history = Vec::new();
    let mut evaluations = 0usize;

    for generation in 1..=config.max_generations {
        let fresh = ensure_evaluated(&mut population, problem, &mut evaluations);
        Champion::absorb(&mut best_ever, &population, &fresh);
        let finite: Vec<f64> = population
            .iter()
            .filter_map(|c| c.fitness.filter(|f| f.is_finite()))
            .collect();
        let mean_fitness = if finite.is_empty() {
            f64::INFINITY
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        let champion = best_ever.as_ref().expect("whole pool just evaluated");
        let best_ever_fit = champion.chromosome.fitness.unwrap();
        history.push(GenerationStats {
            generation,
            best_fitness: best_ever_fit,
            mean_fitness,
            evaluations,
        });
        if best_ever_fit <= config.fitness_threshold || champion.meets_target {
            break;
        }
        if generation == config.max_generations {
            break;
        }

        // operator phase; the current pool best is exempt
        let elite = pool_best(&population).0;
        let candidates: Vec<usize> = (0..population.len()).filter(|&i| i != elite).collect();
        for _ in 0..population.len() / 2 {
            if candidates.len() < 2 {
                break;
            }
            let i = candidates[rng.random_range(0..candidates.len())];
            let mut j = candidates[rng.random_range(0..candidates.len())];
            while j == i {
                j = candidates[rng.random_range(0..candidates.len())];
            }
            if let Some((c1, c2)) = maybe_crossover(
                &population[i],
                &population[j],
                space,
                config.crossover_probability,
                &mut rng,
            ) {
                population[i] = c1;
                population[j] = c2;
            }
        }
        for i in 0..population.len() {
            if i != elite {
                population[i] = mutate(
                    &population[i],
                    space,
                    config.mutation_mu,
                    config.mutation_sigma,
                    &mut rng,
                );
            }
        }
        let fresh = ensure_evaluated(&mut population, problem, &mut evaluations);
        Champion::absorb(&mut best_ever, &population, &fresh);
        select(&mut population, config, &mut rng);
        while population.len() < config.population_size {
            population.push(space.sample(&mut rng));
        }
    }

    match best_ever {
        Some(c) if c.chromosome.fitness.unwrap().is_finite() => Ok(GaOutcome {
            best: c.chromosome,
            history,
        }),
        _ => Err(GaError::NoFeasibleCandidate),
    }
}

/// The reference fitness: straight-line fit of the candidate's raw
/// torque-angle curve over the operating window.
///
/// The torque uses the transmission law with the signed FEM force (tension
/// positive), so a compressed element whose torque drops as the handle
/// closes fits a negative slope; candidates whose fitted slope is
/// nonnegative carry no negative stiffness and get the sentinel.
pub struct NsmLinearityProblem {
    pub geometry: CrankGeometry,
    pub section: CrossSection,
    pub material: Material,
    pub design_box: DesignBox,
    /// Chord length at which the mounted element is relaxed (m).
    pub relaxed_chord: f64,
    /// The negative-stiffness window the line is fitted over.
    pub window: AngleSchedule,
    pub n_elements: usize,
    /// Extra solver steps inserted between the relaxed chord and the window.
    pub prelude_steps: usize,
    /// Stopping rule: residual at or below this fraction of the mean
    /// absolute torque satisfies the search.
    pub target_fraction: f64,
}

impl NsmLinearityProblem {
    /// Window torque samples for one candidate, or `None` when the shape is
    /// invalid or the solver fails.
    fn window_torque(&self, key_points: &[(f64, f64); 5]) -> Option<Vec<(f64, f64)>> {
        let design = BeamDesign::new(*key_points, self.section, self.material, self.design_box)
            .ok()?;
        let model = build_model(&design, self.n_elements).ok()?;
        // mounted relaxed between the pins: the shape's own rest chord must
        // agree with the configured relaxed length
        if (model.natural_chord() - self.relaxed_chord).abs() > 1e-9 * self.relaxed_chord {
            return None;
        }
        let thetas: Vec<f64> = self.window.angles().collect();
        let chords: Vec<f64> = thetas
            .iter()
            .map(|&t| self.geometry.elastic_length(t))
            .collect();
        let curve =
            solve_force_deflection_covering(&model, &chords, self.prelude_steps).ok()?;
        thetas
            .iter()
            .zip(&chords)
            .map(|(&theta, &chord)| {
                let force = curve.force_at(chord).ok()?;
                Some((theta, self.geometry.crank_torque(force, theta)))
            })
            .collect()
    }
}

/// Ordinary least squares for y = intercept + slope * x.
/// Returns (slope, intercept, rms residual).
pub(crate) fn line_fit(samples: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx) * (s.0 - mx)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (samples
        .iter()
        .map(|s| {
            let r = s.1 - (intercept + slope * s.0);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

impl FitnessProblem for NsmLinearityProblem {
    fn evaluate(&self, key_points: &[(f64, f64); 5]) -> Evaluation {
        let sentinel = Evaluation {
            residual: SENTINEL,
            meets_target: false,
        };
        let Some(samples) = self.window_torque(key_points) else {
            return sentinel;
        };
        let (slope, _, rms) = line_fit(&samples);
        if slope >= 0.0 {
            return sentinel;
        }
        let mean_abs = samples.iter().map(|s| s.1.abs()).sum::<f64>() / samples.len() as f64;
        Evaluation {
            residual: rms,
            meets_target: mean_abs > 0.0 && rms <= self.target_fraction * mean_abs,
        }
    }
}

/// Analytic stand-in landscape for solver-free tests: a quadratic bowl in
/// the mutable (third) key point, the one coordinate the mutation operator
/// steers directly. The optimum and optimal value are known by
/// construction.
pub struct SurrogateProblem {
    pub target: (f64, f64),
}

impl FitnessProblem for SurrogateProblem {
    fn evaluate(&self, key_points: &[(f64, f64); 5]) -> Evaluation {
        let (x, y) = key_points[2];
        let residual = (x - self.target.0).powi(2) + (y - self.target.1).powi(2);
        Evaluation {
            residual,
            meets_target: false,
        }
    }
}
