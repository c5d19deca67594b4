"""
Synthetic Car-Following Generator

Simulates one leader-follower pair per sequence. The follower is driven by
an intelligent-driver acceleration law that perceives the gap and approach
rate through a reaction-lag delay buffer; its parameters come from the
driver's active regime, which follows a Markov chain evaluated every
switch_interval seconds. Each sequence draws from its own generator seeded
by (seed, driver index, sequence index, attempt), so the corpus is a pure
function of the specs.
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from app.core.errors import GenerationError, ValidationError
from app.domain.sequence import CarFollowingSequence, Dataset, validate_car_following
from app.synthdata.specs import CorpusSpec, DriverSpec, RegimeParams, ScenarioSpec

logger = logging.getLogger(__name__)

ACCEL_EXPONENT = 4
LEADER_GAIN = 0.5
PERTURBATION_MEMORY = 0.95
NOISE_MEMORY = 0.9
EMERGENCY_GAP = 1.0
EMERGENCY_DECEL = 9.0
CONTACT_GAP = 0.5


def idm_acceleration(speed: float, gap: float, approach_rate: float, params: RegimeParams) -> float:
    """
    Intelligent-driver acceleration.

    Args:
        speed: Follower speed (m/s)
        gap: Bumper-to-bumper gap (m)
        approach_rate: Follower speed minus leader speed (m/s)
        params: Active regime

    Returns:
        float: Acceleration command (m/s^2)
    """
    desired_gap = (params.min_gap + speed * params.time_headway
                   + speed * approach_rate / (2.0 * np.sqrt(params.max_accel * params.comfortable_decel)))
    desired_gap = max(desired_gap, params.min_gap)
    return params.max_accel * (1.0 - (speed / params.desired_speed) ** ACCEL_EXPONENT
                               - (desired_gap / max(gap, 1e-3)) ** 2)


def leader_profile(n_frames: int, scenario: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    """Leader speed per frame: ramps between held target speeds plus a bounded perturbation."""
    dt = scenario.dt
    speeds = np.empty(n_frames)
    v = rng.uniform(scenario.leader_speed_min, scenario.leader_speed_max)
    target = v
    hold_left = 0
    perturbation = 0.0
    innovation = scenario.perturbation * np.sqrt(1.0 - PERTURBATION_MEMORY ** 2)

    for t in range(n_frames):
        speeds[t] = v
        if hold_left <= 0:
            target = rng.uniform(scenario.leader_speed_min, scenario.leader_speed_max)
            hold_left = int(round(rng.uniform(scenario.hold_min, scenario.hold_max) / dt))
        hold_left -= 1

        command = float(np.clip(LEADER_GAIN * (target - v), -scenario.leader_decel, scenario.leader_accel))
        perturbation = PERTURBATION_MEMORY * perturbation + innovation * rng.standard_normal()
        perturbation = float(np.clip(perturbation, -scenario.perturbation, scenario.perturbation))
        v = max(0.0, v + (command + perturbation) * dt)
    return speeds


def regime_path(driver: DriverSpec, n_switches: int, rng: np.random.Generator) -> np.ndarray:
    """Regime index per switching interval; the first is drawn from the stationary distribution."""
    P = driver.transition_matrix
    path = np.empty(n_switches, dtype=int)
    if n_switches == 0:
        return path
    path[0] = rng.choice(len(driver.regimes), p=driver.stationary_distribution())
    for i in range(1, n_switches):
        path[i] = rng.choice(len(driver.regimes), p=P[path[i - 1]])
    return path


def simulate_follower(leader_speeds: np.ndarray, driver: DriverSpec, scenario: ScenarioSpec,
                      rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Run the follower behind a given leader.

    Returns:
        Tuple[np.ndarray, np.ndarray]: (T, 4) frames (v, a, h, hdot) and the regime index per frame
    """
    dt = scenario.dt
    n = len(leader_speeds)
    switch_frames = max(1, int(round(scenario.switch_interval / dt)))
    regimes = np.repeat(regime_path(driver, -(-n // switch_frames), rng), switch_frames)[:n]

    v = np.empty(n)
    gap = np.empty(n)
    acc = np.empty(n)
    v[0] = leader_speeds[0]
    gap[0] = driver.regimes[regimes[0]].equilibrium_gap(v[0])
    noise = 0.0
    noise_innovation = driver.accel_noise * np.sqrt(1.0 - NOISE_MEMORY ** 2)

    for t in range(n):
        params = driver.regimes[regimes[t]]
        lagged = max(0, t - int(round(params.reaction_lag / dt)))
        command = idm_acceleration(v[t], gap[lagged], v[lagged] - leader_speeds[lagged], params)
        noise = NOISE_MEMORY * noise + noise_innovation * rng.standard_normal()
        command += noise

        if gap[t] < EMERGENCY_GAP and leader_speeds[t] < v[t]:
            command = -EMERGENCY_DECEL
        command = float(np.clip(command, -EMERGENCY_DECEL, params.max_accel))
        if v[t] + command * dt < 0.0:
            command = -v[t] / dt
        acc[t] = command

        if t + 1 < n:
            v[t + 1] = v[t] + command * dt
            gap[t + 1] = gap[t] + 0.5 * dt * ((leader_speeds[t] + leader_speeds[t + 1]) - (v[t] + v[t + 1]))

    frames = np.column_stack([v, acc, gap, leader_speeds - v])
    return frames, regimes


def _n_frames(scenario: ScenarioSpec, rng: np.random.Generator) -> int:
    duration = rng.uniform(scenario.duration_min, scenario.duration_max)
    return max(2, int(round(duration / scenario.dt)))


def generate_sequence(driver: DriverSpec, scenario: ScenarioSpec, driver_index: int,
                      sequence_index: int) -> CarFollowingSequence:
    """
    Generate one validated sequence, retrying on contact or failed validation.

    Raises:
        GenerationError: when every attempt of the retry budget fails
    """
    source_id = f"{driver.driver_id}/seq{sequence_index:03d}"
    last_reason = "no attempt made"
    for attempt in range(scenario.max_attempts):
        rng = np.random.default_rng([scenario.seed, driver_index, sequence_index, attempt])
        n_frames = _n_frames(scenario, rng)
        frames, _ = simulate_follower(leader_profile(n_frames, scenario, rng), driver, scenario, rng)

        if np.min(frames[:, 2]) <= CONTACT_GAP:
            last_reason = f"contact (min gap {np.min(frames[:, 2]):.3f} m)"
            logger.debug(f"{source_id} attempt {attempt}: {last_reason}")
            continue
        try:
            seq = CarFollowingSequence(frames, scenario.dt, driver_id=driver.driver_id, source_id=source_id)
        except ValidationError as e:
            last_reason = str(e)
            continue
        verdict = validate_car_following(seq, scenario.max_gap, scenario.min_duration)
        if verdict:
            return seq
        last_reason = verdict.reasons[0]
        logger.debug(f"{source_id} attempt {attempt}: {last_reason}")

    raise GenerationError(f"Could not generate {source_id} in {scenario.max_attempts} attempts: {last_reason}")


def generate_corpus(drivers: Sequence[DriverSpec], scenario: ScenarioSpec,
                    n_sequences_per_driver: int) -> Dataset:
    """
    Generate a labeled corpus.

    Args:
        drivers: Driver specs, in output order
        scenario: Leader profile family, durations, thresholds and seed
        n_sequences_per_driver: Raw sequences per driver

    Returns:
        Dataset: All sequences, grouped by driver in spec order
    """
    if n_sequences_per_driver < 1:
        raise ValidationError(f"n_sequences_per_driver must be at least 1, got {n_sequences_per_driver}")
    ids = [d.driver_id for d in drivers]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"Duplicate driver ids: {ids}")

    sequences: List[CarFollowingSequence] = []
    for driver_index, driver in enumerate(drivers):
        for sequence_index in range(n_sequences_per_driver):
            sequences.append(generate_sequence(driver, scenario, driver_index, sequence_index))
        logger.info(f"Generated {n_sequences_per_driver} sequences for driver {driver.driver_id}")
    return Dataset(sequences)


def generate_from_spec(spec: CorpusSpec, n_sequences_per_driver: int) -> Dataset:
    return generate_corpus(spec.drivers, spec.scenario, n_sequences_per_driver)


def split_dataset(ds: Dataset, train_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """
    Per-driver stratified split.

    Each driver contributes floor(train_fraction * n + 0.5) randomly chosen
    sequences to the training set; both parts keep the original order.

    Returns:
        Tuple[Dataset, Dataset]: (train, test)
    """
    if not 0.0 <= train_fraction <= 1.0:
        raise ValidationError(f"train_fraction must lie in [0, 1], got {train_fraction}")
    ds.require_labeled()
    rng = np.random.default_rng(seed)

    train_keys = set()
    for driver_id, seqs in ds.by_driver().items():
        n_train = int(np.floor(train_fraction * len(seqs) + 0.5))
        chosen = rng.permutation(len(seqs))[:n_train]
        train_keys.update(id(seqs[i]) for i in chosen)

    train = [seq for seq in ds.sequences if id(seq) in train_keys]
    test = [seq for seq in ds.sequences if id(seq) not in train_keys]
    return Dataset(train, "train"), Dataset(test, "test")
