import numpy as np

from forecastad.data.frame import AttackInterval
from forecastad.detector import (
    Detector,
    ErrorConfig,
    detect,
    diagnose,
    error_series,
    ewma,
    ewma_alpha,
    fit_threshold,
    process,
    residuals,
    tag_weights,
    write_detection_report,
)
from forecastad.detector.report import read_events, read_flags, render_svg
from forecastad.exceptions import ParameterError, ShapeMismatchError
from .base import ForecastADTestCase
from .constants import EWMA_ALPHA, EWMA_HALF_LIFE, WEIGHTS_EXPECTED, WEIGHTS_RESIDUALS


class TagWeightTestCase(ForecastADTestCase):
    def test_hand_computed_weights(self):
        weights = tag_weights(np.array([WEIGHTS_RESIDUALS]))
        self.assertArrayAlmostEqual(weights, WEIGHTS_EXPECTED, atol=0, rtol=1e-3)

    def test_weights_are_positive_and_normalised(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n_tags = int(rng.integers(1, 12))
            matrix = np.abs(rng.standard_normal((200, n_tags))) * rng.uniform(0.01, 10, size=n_tags)
            weights = tag_weights(matrix)
            self.assertAlmostEqual(float(weights.sum()), 1.0, places=12)
            self.assertTrue(np.all(weights > 0))

    def test_predictable_tags_weigh_more(self):
        rng = np.random.default_rng(2)
        matrix = np.abs(rng.standard_normal((300, 2))) * [0.1, 1.0]
        weights = tag_weights(matrix)
        self.assertGreater(weights[0], weights[1])

    def test_degenerate_matrices_give_uniform_weights(self):
        self.assertArrayAlmostEqual(tag_weights(np.zeros((10, 4))), np.full(4, 0.25))
        self.assertArrayAlmostEqual(tag_weights(np.full((10, 3), 2.0)), np.full(3, 1 / 3))

    def test_span_restricts_rows(self):
        matrix = np.ones((20, 2))
        matrix[:5, 0] = 100.0
        self.assertArrayAlmostEqual(tag_weights(matrix, (5, 20)), [0.5, 0.5])


class ErrorSeriesTestCase(ForecastADTestCase):
    def test_unweighted_linear_error_is_the_tag_mean(self):
        matrix = np.abs(np.random.default_rng(3).standard_normal((40, 3)))
        config = ErrorConfig(power=1, half_life=None, use_weights=False)
        self.assertArrayAlmostEqual(process(matrix, None, config), matrix.mean(axis=1), atol=1e-15)

    def test_weighted_powered_mean(self):
        matrix = np.array([[1.0, 2.0], [0.5, 0.0]])
        series = error_series(matrix, np.array([0.25, 0.75]), power=2)
        self.assertArrayAlmostEqual(series, [(0.25 * 1 + 0.75 * 4) / 2, 0.25 * 0.25 / 2])

    def test_weights_shape_is_checked(self):
        with self.assertRaises(ShapeMismatchError):
            error_series(np.ones((3, 2)), np.ones(3))

    def test_residuals(self):
        self.assertArrayAlmostEqual(residuals(np.array([[1.0, -1.0]]), np.array([[0.5, 1.0]])), [[0.5, 2.0]])
        with self.assertRaises(ShapeMismatchError):
            residuals(np.ones((2, 2)), np.ones((2, 3)))

    def test_power_must_be_at_least_one(self):
        with self.assertRaises(ParameterError):
            ErrorConfig(power=0.5)


class EwmaTestCase(ForecastADTestCase):
    def test_alpha_from_half_life(self):
        self.assertAlmostEqual(ewma_alpha(EWMA_HALF_LIFE), EWMA_ALPHA, delta=1e-4)
        self.assertAlmostEqual((1 - ewma_alpha(EWMA_HALF_LIFE)) ** EWMA_HALF_LIFE, 0.5, places=12)

    def test_impulse_response_halves_every_half_life(self):
        impulse = np.zeros(60)
        impulse[1] = 1.0
        smoothed = ewma(impulse, EWMA_HALF_LIFE)
        self.assertEqual(smoothed[0], 0.0)
        self.assertAlmostEqual(smoothed[1], ewma_alpha(EWMA_HALF_LIFE), places=12)
        self.assertAlmostEqual(smoothed[1 + EWMA_HALF_LIFE] / smoothed[1], 0.5, places=10)
        self.assertAlmostEqual(smoothed[1 + 3 * EWMA_HALF_LIFE] / smoothed[1], 0.125, places=10)

    def test_first_value_is_ignored(self):
        self.assertEqual(ewma(np.array([50.0, 0.0, 0.0]), 5)[0], 0.0)
        self.assertArrayAlmostEqual(ewma(np.array([50.0, 0.0, 0.0]), 5), [0, 0, 0])

    def test_smoothing_stays_in_range_and_reduces_variance(self):
        series = np.abs(np.random.default_rng(4).standard_normal(2000))
        smoothed = ewma(series, EWMA_HALF_LIFE)
        self.assertLessEqual(smoothed.max(), series.max())
        self.assertGreaterEqual(smoothed.min(), 0.0)
        self.assertLess(smoothed[100:].var(), series[100:].var())

    def test_constant_series_converges(self):
        smoothed = ewma(np.full(500, 3.0), 4)
        self.assertAlmostEqual(smoothed[-1], 3.0, places=10)


class ThresholdTestCase(ForecastADTestCase):
    def test_linear_percentile(self):
        self.assertAlmostEqual(fit_threshold(np.arange(101, dtype=np.float64)), 99.0)
        self.assertAlmostEqual(fit_threshold(np.array([0.0, 1.0])), 0.99)

    def test_span(self):
        series = np.concatenate((np.full(10, 1e6), np.arange(101, dtype=np.float64)))
        self.assertAlmostEqual(fit_threshold(series, (10, 111)), 99.0)


class DetectTestCase(ForecastADTestCase):
    def test_runs_at_or_above_threshold(self):
        events = detect(np.array([0, 2, 2, 0, 3, 0], dtype=np.float64), 2.0)
        self.assertEqual([(e.start, e.end) for e in events], [(1, 2), (4, 4)])
        self.assertEqual((events[1].peak, events[1].peak_time), (3.0, 4))
        self.assertEqual(events[0].length, 2)

    def test_run_reaching_the_end(self):
        events = detect(np.array([0.0, 0.0, 5.0, 6.0]), 1.0)
        self.assertEqual([(e.start, e.end, e.peak_time) for e in events], [(2, 3, 3)])

    def test_no_events(self):
        self.assertEqual(detect(np.zeros(10), 0.5), [])

    def test_threshold_must_be_finite(self):
        with self.assertRaises(ParameterError):
            detect(np.zeros(3), np.inf)


class DiagnoseTestCase(ForecastADTestCase):
    tag_names = ('FIT101', 'LIT101', 'AIT201')

    def test_ranking_and_ties(self):
        matrix = np.zeros((6, 3))
        matrix[2:4, 1] = 5.0
        matrix[2:4, 2] = 5.0
        matrix[3, 0] = 1.0
        events = diagnose(matrix, detect(matrix.max(axis=1), 1.0), top_k=3, tag_names=self.tag_names)
        suspects = events[0].suspects
        self.assertEqual([s.name for s in suspects], ['LIT101', 'AIT201', 'FIT101'])
        self.assertEqual([s.group for s in suspects], ['1', '2', '1'])

    def test_ranking_uses_weighted_powered_contribution(self):
        matrix = np.array([[0.0, 0.0], [2.0, 3.0]])
        events = detect(np.array([0.0, 1.0]), 1.0)
        unweighted = diagnose(matrix, events, top_k=1)
        weighted = diagnose(matrix, events, top_k=1, weights=np.array([0.9, 0.1]), power=2)
        self.assertEqual(unweighted[0].suspects[0].index, 1)
        self.assertEqual(weighted[0].suspects[0].index, 0)

    def test_ranking_is_scale_free(self):
        rng = np.random.default_rng(5)
        matrix = np.abs(rng.standard_normal((30, 5)))
        events = detect(matrix.mean(axis=1), float(np.median(matrix.mean(axis=1))))
        base = diagnose(matrix, events, top_k=5)
        scaled = diagnose(matrix * 1000.0, events, top_k=5)
        for a, b in zip(base, scaled, strict=True):
            self.assertEqual([s.index for s in a.suspects], [s.index for s in b.suspects])

    def test_peak_residual_in_tag_units(self):
        matrix = np.array([[0.0, 0.0], [0.5, 2.0]])
        events = diagnose(matrix, detect(np.array([0.0, 1.0]), 1.0), scale=np.array([10.0, 3.0]))
        self.assertEqual([s.peak_residual for s in events[0].suspects], [6.0, 5.0])

    def test_top_k_bound(self):
        with self.assertRaises(ParameterError):
            diagnose(np.ones((2, 2)), [], top_k=0)


class DetectorTestCase(ForecastADTestCase):
    def setUp(self):
        rng = np.random.default_rng(6)
        self.train = np.abs(rng.standard_normal((500, 3)))
        self.test = np.abs(rng.standard_normal((500, 3)))
        self.test[200:210, 2] += 20.0

    def test_fit_then_run(self):
        detector = Detector(ErrorConfig(power=2, half_life=None), top_k=2)
        self.assertFalse(detector.fitted)
        detector.fit(self.train)
        self.assertTrue(detector.fitted)
        self.assertAlmostEqual(float(detector.weights.sum()), 1.0)

        result = detector.run(self.test, tag_names=('FIT101', 'LIT101', 'AIT201'))
        self.assertEqual(result.series.shape, (500,))
        self.assertTrue(np.all(result.flags[200:210]))
        hit = [event for event in result.events if event.contains(205)]
        self.assertEqual(len(hit), 1)
        self.assertEqual(hit[0].suspects[0].name, 'AIT201')
        self.assertEqual(len(hit[0].suspects), 2)

    def test_threshold_is_the_training_percentile_of_the_processed_series(self):
        config = ErrorConfig(power=6, half_life=5)
        detector = Detector(config).fit(self.train, (10, 500))
        expected = fit_threshold(process(self.train, detector.weights, config)[10:500])
        self.assertEqual(detector.threshold, expected)

    def test_unweighted_detector_is_fitted_without_weights(self):
        detector = Detector(ErrorConfig(use_weights=False)).fit(self.train)
        self.assertIsNone(detector.weights)
        self.assertTrue(detector.fitted)

    def test_run_before_fit(self):
        with self.assertRaises(ParameterError):
            Detector(ErrorConfig()).run(self.test)


class ReportTestCase(ForecastADTestCase):
    def setUp(self):
        self.tmp = self.make_tmpdir()
        matrix = np.zeros((20, 2))
        matrix[5:8, 1] = 4.0
        matrix[12, 0] = 3.0
        self.detector = Detector(ErrorConfig(power=1, use_weights=False), threshold=1.0, top_k=2)
        self.result = self.detector.run(matrix, tag_names=('FIT101', 'P102'))
        self.timestamps = np.arange(20, dtype=np.float64) * 2

    def test_events_and_timeline_files(self):
        paths = write_detection_report(self.tmp, self.result, 2, self.timestamps)
        self.assertEqual([p.name for p in paths], ['events.csv', 'timeline.csv'])
        events = read_events(paths[0])
        self.assertEqual(events, [(5, 7, ('P102', 'FIT101')), (12, 12, ('FIT101', 'P102'))])
        flags = read_flags(paths[1])
        self.assertEqual(list(np.flatnonzero(flags)), [5, 6, 7, 12])
        header = paths[0].read_text(encoding='utf-8').splitlines()[0]
        self.assertIn('start_timestamp', header)
        self.assertIn('duration', header)

    def test_single_suspect_per_event(self):
        path = write_detection_report(self.tmp, self.result, 1)[0]
        self.assertEqual(read_events(path), [(5, 7, ('P102',)), (12, 12, ('FIT101',))])

    def test_svg_is_stable(self):
        attacks = (AttackInterval(4, 8, ('P102',)),)
        first = render_svg(self.tmp / 'a.svg', self.result, self.timestamps, attacks)
        second = render_svg(self.tmp / 'b.svg', self.result, self.timestamps, attacks)
        self.assertEqual(first.read_bytes(), second.read_bytes())
        self.assertTrue(first.read_text(encoding='utf-8').lstrip().startswith('<?xml'))

    def test_svg_is_listed_when_requested(self):
        paths = write_detection_report(self.tmp, self.result, 2, svg=True)
        self.assertEqual(paths[-1].name, 'error_curve.svg')
        self.assertTrue(paths[-1].is_file())


class DiagnosisRateTestCase(ForecastADTestCase):
    """Top-5 diagnosis over injected residual bursts on 8 tags of unequal noise."""

    n_tags = 8
    length = 50

    def test_injected_tag_is_among_the_top_five(self):
        hits = diagnosed = detected = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            noise = rng.uniform(0.1, 0.5, self.n_tags)
            train = np.abs(rng.standard_normal((1000, self.n_tags))) * noise
            test = np.abs(rng.standard_normal((1000, self.n_tags))) * noise
            target = int(rng.integers(self.n_tags))
            start = int(rng.integers(100, 800))
            test[start : start + self.length, target] += 3.0 * noise.max()

            detector = Detector(ErrorConfig(power=6, half_life=4), top_k=5).fit(train)
            overlapping = [
                event
                for event in detector.run(test).events
                if event.start < start + self.length and event.end >= start
            ]
            detected += bool(overlapping)
            for event in overlapping:
                diagnosed += 1
                hits += target in [suspect.index for suspect in event.suspects]
        self.assertGreaterEqual(detected, 19)
        self.assertGreaterEqual(hits / diagnosed, 0.95)
