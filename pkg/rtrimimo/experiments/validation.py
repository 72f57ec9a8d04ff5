"""Closed-form versus oracle checks run by the ``validate`` experiment."""

import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.stats import chisquare

from rtrimimo.config import RTRIMimoConfig
from rtrimimo.estimation import empirical_mse, mse_floor, normalized_mse, training_gain
from rtrimimo.models import (
    ExperimentSpec,
    LinkConfig,
    PowerMode,
    ValidationRecord,
    ValidationStatus,
    db_to_linear,
)
from rtrimimo.optimize import (
    alpha_high_snr_limit,
    joint_operating_point,
    optimal_alpha,
    optimize_training_length,
    relative_rate_gain,
)
from rtrimimo.rate import (
    closed_form_rate,
    effective_noise_variance,
    effective_snr,
    effective_snr_array,
    effective_snr_ratio,
    eigenvalue_pdf_moment,
    empirical_effective_noise,
    mc_rate,
    wishart_unordered_eig_pdf,
)
from rtrimimo.streams import RandomSource
from rtrimimo.system import sample_channel

logger = logging.getLogger(__name__)

# Monte-Carlo agreement band in standard errors.
SIGMA_BAND = 3.0

MSE_GRID_SNR_DB = (-10.0, 0.0, 10.0, 20.0, 30.0)
MSE_GRID_TRAINING = (4, 8, 16)
PRACTICAL_DELTAS = (0.08, 0.175)
RATE_ANTENNAS = (1, 2, 4)
RATE_RHO_EFF = (0.1, 1.0, 10.0, 100.0)
MAX_PDF_DIMENSION = 6
ALPHA_INSTANCES = 50
ALPHA_GRID_POINTS = 9999
TP_SEARCH_SNR_DB = (-10.0, 0.0, 10.0, 20.0, 30.0)
HISTOGRAM_EDGES = (0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 13.0)
ROUTE_INSTANCES = 100


def _record(name: str, passed: bool, measured: float, bound: float, detail: str = "") -> ValidationRecord:
    status = ValidationStatus.PASS if passed else ValidationStatus.FAIL
    return ValidationRecord(name=name, status=status, measured=float(measured), bound=float(bound), detail=detail)


def _z_score(measured: float, expected: float, std_err: float) -> float:
    if std_err == 0.0:
        return 0.0 if measured == expected else float("inf")
    return abs(measured - expected) / std_err


class ValidationSuite:
    """
    Runs every closed-form/oracle property and reports one record per property.

    Monte-Carlo checks use ``spec.trials`` trials per point and draw from
    streams derived from ``spec.seed`` and the property name, so a report
    depends only on the spec, never on the worker count.
    """

    def __init__(self, spec: ExperimentSpec, settings: Optional[RTRIMimoConfig] = None):
        self.spec = spec
        self.settings = settings or RTRIMimoConfig()
        self.config = spec.config

    def _rng(self, name: str, index: int = 0) -> RandomSource:
        return RandomSource.for_experiment(self.spec.seed, f"validate/{name}", index)

    @property
    def _mc_options(self) -> Dict[str, int]:
        return {
            "max_workers": self.settings.simulation.max_workers,
            "block_size": self.settings.simulation.block_size,
        }

    def _link(self, **overrides: float) -> LinkConfig:
        return self.config.at(**overrides)

    # ------------------------------------------------------------------
    # Estimation
    # ------------------------------------------------------------------

    def check_mse_floor(self) -> ValidationRecord:
        """Empirical MSE at 40 dB training SNR sits on the high-SNR floor."""
        t_p = self.config.n_tx
        worst = 0.0
        details = []
        for index, delta in enumerate(PRACTICAL_DELTAS):
            floor = mse_floor(t_p, self.config.n_tx, delta)
            mean, _ = empirical_mse(
                self._link(delta=delta), t_p, db_to_linear(40.0), self.spec.trials,
                self._rng("mse_floor", index), **self._mc_options,
            )
            error = abs(mean - floor) / floor
            worst = max(worst, error)
            details.append(f"delta={delta:g}: {mean:.6g} vs {floor:.6g}")
        return _record("mse_floor", worst <= 0.05, worst, 0.05, "; ".join(details))

    def check_mse_closed_form_grid(self) -> ValidationRecord:
        """Empirical MSE within the sigma band of 1/(1+g) on the full grid."""
        worst = 0.0
        worst_point = ""
        index = 0
        for snr_db in MSE_GRID_SNR_DB:
            rho_p = db_to_linear(snr_db)
            for delta in (0.0,) + PRACTICAL_DELTAS:
                for t_p in MSE_GRID_TRAINING:
                    if t_p < self.config.n_tx or t_p > self.config.coherence - 1:
                        continue
                    expected = normalized_mse(training_gain(rho_p, t_p, self.config.n_tx, delta))
                    mean, std_err = empirical_mse(
                        self._link(delta=delta), t_p, rho_p, self.spec.trials,
                        self._rng("mse_closed_form_grid", index), **self._mc_options,
                    )
                    z = _z_score(mean, expected, std_err)
                    if z > worst:
                        worst = z
                        worst_point = f"snr={snr_db:g} dB, delta={delta:g}, t_p={t_p}"
                    index += 1
        detail = f"worst at {worst_point}" if index else "no grid training length fits the link"
        return _record("mse_closed_form_grid", worst <= SIGMA_BAND, worst, SIGMA_BAND, detail)

    # ------------------------------------------------------------------
    # Rate
    # ------------------------------------------------------------------

    def check_rate_closed_form_vs_mc(self) -> ValidationRecord:
        """Closed-form rate against the log-det oracle.

        measured is the worst gap divided by max(1% of the rate, 3 std_err).
        """
        worst = 0.0
        worst_point = ""
        index = 0
        for n_tx in RATE_ANTENNAS:
            for n_rx in RATE_ANTENNAS:
                for rho in RATE_RHO_EFF:
                    exact = closed_form_rate(rho, n_tx, n_rx, 1, 1)
                    sampled = mc_rate(
                        rho, n_tx, n_rx, 1, 1, self.spec.trials,
                        self._rng("rate_closed_form_vs_mc", index), **self._mc_options,
                    )
                    allowed = max(0.01 * exact.bits_per_use, SIGMA_BAND * sampled.std_err)
                    ratio = abs(exact.bits_per_use - sampled.bits_per_use) / allowed
                    if ratio > worst:
                        worst = ratio
                        worst_point = f"{n_tx}x{n_rx}, rho_eff={rho:g}"
                    index += 1
        return _record("rate_closed_form_vs_mc", worst <= 1.0, worst, 1.0, f"worst at {worst_point}")

    def _pdf_dimensions(self) -> List[Tuple[int, int]]:
        return [(p, q) for p in range(1, MAX_PDF_DIMENSION + 1) for q in range(1, p + 1)]

    def check_wishart_normalization(self) -> ValidationRecord:
        worst = max(abs(eigenvalue_pdf_moment(p, q, 0) - 1.0) for p, q in self._pdf_dimensions())
        return _record("wishart_normalization", worst <= 1e-6, worst, 1e-6)

    def check_wishart_first_moment(self) -> ValidationRecord:
        worst = max(abs(eigenvalue_pdf_moment(p, q, 1) - p) for p, q in self._pdf_dimensions())
        return _record("wishart_first_moment", worst <= 1e-5, worst, 1e-5)

    def check_wishart_histogram(self) -> ValidationRecord:
        """Chi-square fit of one random eigenvalue per sampled 4x4 Wishart matrix."""
        p = q = 4
        rng = self._rng("wishart_histogram")
        h = sample_channel(q, p, rng, batch=(self.spec.trials,))
        eigenvalues = np.linalg.eigvalsh(h @ np.conj(np.swapaxes(h, -1, -2)))
        pick = rng.generator.integers(0, q, size=self.spec.trials)
        sample = eigenvalues[np.arange(self.spec.trials), pick]

        edges = list(HISTOGRAM_EDGES)
        observed = np.histogram(sample, bins=edges + [np.inf])[0]
        probabilities = [
            quad(lambda x: wishart_unordered_eig_pdf(x, p, q), lo, hi)[0] for lo, hi in zip(edges, edges[1:])
        ]
        probabilities.append(max(1.0 - sum(probabilities), 0.0))
        expected = np.asarray(probabilities) * self.spec.trials
        expected *= observed.sum() / expected.sum()

        p_value = float(chisquare(observed, expected).pvalue)
        return _record("wishart_histogram", p_value > 0.01, p_value, 0.01, "p-value of chi-square fit")

    def check_effective_snr_routes(self) -> ValidationRecord:
        """Closed form and sigma-ratio route agree on random operating points."""
        rng = self._rng("effective_snr_routes").generator
        worst = 0.0
        for _ in range(ROUTE_INSTANCES):
            rho_p, rho_d = 10.0 ** rng.uniform(-2.0, 4.0, size=2)
            t_p = int(rng.integers(self.config.n_tx, 4 * self.config.n_tx + 1))
            delta = float(rng.uniform(0.0, 0.3))
            direct = effective_snr(rho_p, rho_d, t_p, self.config.n_tx, delta).value
            ratio = effective_snr_ratio(rho_p, rho_d, t_p, self.config.n_tx, delta).value
            worst = max(worst, abs(direct - ratio) / direct)
        return _record("effective_snr_routes", worst <= 1e-12, worst, 1e-12)

    def check_effective_noise_variance(self) -> ValidationRecord:
        """Empirical power of the effective noise against (1/(1+g) + delta^2) rho_d + 1."""
        link = self._link(delta=0.175, snr=10.0)
        split, _ = joint_operating_point(link, link.n_tx)
        gain = training_gain(split.rho_p, split.t_p, link.n_tx, link.delta)
        expected = effective_noise_variance(gain, split.rho_d, link.delta)
        mean, std_err = empirical_effective_noise(
            link, split, self.spec.trials, self._rng("effective_noise_variance"), **self._mc_options
        )
        z = _z_score(mean, expected, std_err)
        return _record("effective_noise_variance", z <= SIGMA_BAND, z, SIGMA_BAND, f"{mean:.6g} vs {expected:.6g}")

    # ------------------------------------------------------------------
    # Optimization
    # ------------------------------------------------------------------

    def check_alpha_optimality(self) -> ValidationRecord:
        """Closed-form alpha is not beaten by a uniform alpha grid."""
        rng = self._rng("alpha_optimality").generator
        grid = np.arange(1, ALPHA_GRID_POINTS + 1) / (ALPHA_GRID_POINTS + 1)
        n_tx = self.config.n_tx
        worst = 0.0
        for _ in range(ALPHA_INSTANCES):
            rho = float(10.0 ** rng.uniform(-2.0, 4.0))
            coherence = int(rng.integers(n_tx + 1, 201))
            t_p = int(rng.integers(n_tx, coherence))
            t_d = coherence - t_p
            delta = float(rng.uniform(0.0, 0.2))

            alpha = optimal_alpha(rho, coherence, t_p, n_tx, delta)
            energy = rho * coherence
            best = float(effective_snr_array((1 - alpha) * energy / t_p, alpha * energy / t_d, t_p, n_tx, delta))
            searched = effective_snr_array((1 - grid) * energy / t_p, grid * energy / t_d, t_p, n_tx, delta)
            worst = max(worst, (float(searched.max()) - best) / best)
        return _record("alpha_optimality", worst <= 1e-12, worst, 1e-12, "relative excess of the grid optimum")

    def check_alpha_low_snr_limit(self) -> ValidationRecord:
        n_tx, coherence = self.config.n_tx, self.config.coherence
        worst = max(
            abs(optimal_alpha(1e-8, coherence, t_p, n_tx, delta) - 0.5)
            for t_p in (n_tx, (n_tx + coherence) // 2, coherence - 1)
            for delta in self.spec.delta_list
        )
        return _record("alpha_low_snr_limit", worst <= 1e-3, worst, 1e-3)

    def check_alpha_high_snr_limit(self) -> ValidationRecord:
        n_tx, coherence = self.config.n_tx, self.config.coherence
        worst = max(
            abs(
                optimal_alpha(1e8, coherence, t_p, n_tx, delta)
                - alpha_high_snr_limit(t_p, coherence - t_p, n_tx, delta)
            )
            for t_p in (n_tx, (n_tx + coherence) // 2, coherence - 1)
            for delta in self.spec.delta_list
        )
        return _record("alpha_high_snr_limit", worst <= 1e-3, worst, 1e-3)

    def check_ideal_hardware_tp(self) -> ValidationRecord:
        """Ideal hardware always trains with exactly n_tx pilots."""
        found = [
            optimize_training_length(
                self._link(delta=0.0, snr=db_to_linear(snr_db)),
                PowerMode.JOINT_POWER,
                max_workers=self.settings.simulation.max_workers,
            ).t_p
            for snr_db in TP_SEARCH_SNR_DB
        ]
        worst = max(abs(t_p - self.config.n_tx) for t_p in found)
        return _record("ideal_hardware_tp", worst == 0, worst, 0, f"t_p_opt = {found}")

    def check_rtri_tp_inflation(self) -> ValidationRecord:
        design = optimize_training_length(
            self._link(delta=0.175, snr=db_to_linear(30.0)),
            PowerMode.JOINT_POWER,
            max_workers=self.settings.simulation.max_workers,
        )
        return _record("rtri_tp_inflation", design.t_p > self.config.n_tx, design.t_p, self.config.n_tx)

    def _gain_at_30_db(self, delta: float) -> float:
        return relative_rate_gain(self._link(delta=delta), db_to_linear(30.0))

    def check_rtri_rate_gain(self) -> ValidationRecord:
        gain = self._gain_at_30_db(0.175)
        return _record("rtri_rate_gain", gain > 0.0, gain, 0.0, "percent")

    def check_rate_gain_ordering(self) -> ValidationRecord:
        difference = self._gain_at_30_db(0.175) - self._gain_at_30_db(0.08)
        return _record("rate_gain_ordering", difference >= 0.0, difference, 0.0, "gain(0.175) - gain(0.08)")

    def check_rate_saturation(self) -> ValidationRecord:
        """Equal-power rate flattens with impairments and keeps growing without."""

        def rate(delta: float, snr_db: float) -> float:
            link = self._link(delta=delta, snr=db_to_linear(snr_db))
            return optimize_training_length(link, PowerMode.EQUAL_POWER).rate.bits_per_use

        impaired = abs(rate(0.175, 60.0) - rate(0.175, 40.0)) / rate(0.175, 40.0)
        ideal_growth = (rate(0.0, 60.0) - rate(0.0, 40.0)) / rate(0.0, 40.0)
        return _record(
            "rate_saturation",
            impaired < 0.01 and ideal_growth > 0.5,
            impaired,
            0.01,
            f"delta=0 growth {ideal_growth:.3%}",
        )

    # ------------------------------------------------------------------

    def checks(self) -> List[Callable[[], ValidationRecord]]:
        return [
            self.check_mse_floor,
            self.check_mse_closed_form_grid,
            self.check_rate_closed_form_vs_mc,
            self.check_wishart_normalization,
            self.check_wishart_first_moment,
            self.check_wishart_histogram,
            self.check_alpha_optimality,
            self.check_alpha_low_snr_limit,
            self.check_alpha_high_snr_limit,
            self.check_ideal_hardware_tp,
            self.check_rtri_tp_inflation,
            self.check_rtri_rate_gain,
            self.check_rate_gain_ordering,
            self.check_rate_saturation,
            self.check_effective_snr_routes,
            self.check_effective_noise_variance,
        ]

    def run(self) -> List[ValidationRecord]:
        """Run every check; a check that raises is reported as failed."""
        records = []
        for check in self.checks():
            name = check.__name__.removeprefix("check_")
            logger.info(f"Running validation: {name}")
            try:
                record = check()
            except Exception as e:
                logger.error(f"Validation {name} crashed: {e}")
                record = _record(name, False, float("nan"), float("nan"), f"error: {e}")
            logger.info(f"{name}: {record.status.value} (measured {record.measured:.6g}, bound {record.bound:.6g})")
            records.append(record)
        failed = [record.name for record in records if not record.passed]
        if failed:
            logger.warning(f"{len(failed)} of {len(records)} properties failed: {', '.join(failed)}")
        return records
