import math

import numpy as np
import pandas as pd
import yaml
from faker import Faker

from forecastad.exceptions import ParameterError, ShapeMismatchError
from forecastad.metrics import (
    DetectionSet,
    GroundTruth,
    NabProfile,
    attack_table,
    detection_delay,
    nab_score,
    pointwise_confusion,
    raw_nab_score,
    scaled_sigmoid,
    score,
    window_counts,
    write_score_report,
)
from .base import ForecastADTestCase
from .constants import (
    PATHOLOGY_COVERAGE,
    PATHOLOGY_GAP,
    PATHOLOGY_LONG,
    PATHOLOGY_SHORT,
    PATHOLOGY_SHORT_COUNT,
    STANDARD_PROFILE,
)
from .generator import generate_frame, generate_truth


def outside_points(truth: GroundTruth) -> list[int]:
    return list(np.flatnonzero(~truth.membership()))


class NabScoreTestCase(ForecastADTestCase):
    def setUp(self):
        self.fake = Faker()
        self.fake.seed_instance(1234)

    def test_scaled_sigmoid(self):
        self.assertAlmostEqual(scaled_sigmoid(0.0), 0.0)
        self.assertAlmostEqual(scaled_sigmoid(-1.0), 2 / (1 + math.exp(-5)) - 1)
        self.assertEqual(scaled_sigmoid(3.5), -1.0)
        self.assertLess(scaled_sigmoid(0.1), 0.0)

    def test_anchors(self):
        for _ in range(200):
            truth = generate_truth(self.fake)
            perfect = DetectionSet(truth.n_points, tuple(start for start, _ in truth.windows))
            self.assertEqual(nab_score(truth, DetectionSet(truth.n_points, ())), 0.0)
            self.assertAlmostEqual(nab_score(truth, perfect), 100.0, places=9)

    def test_false_positive_strictly_lowers_the_score(self):
        for _ in range(200):
            truth = generate_truth(self.fake)
            starts = [start for start, _ in truth.windows]
            extra = self.fake.random_element(outside_points(truth))
            with_fp = DetectionSet(truth.n_points, tuple(sorted([*starts, extra])))
            self.assertLess(
                nab_score(truth, with_fp, STANDARD_PROFILE),
                nab_score(truth, DetectionSet(truth.n_points, tuple(starts)), STANDARD_PROFILE),
            )

    def test_only_false_positives_score_negative(self):
        for _ in range(200):
            truth = generate_truth(self.fake)
            outside = outside_points(truth)
            picks = sorted(set(self.fake.random_elements(outside, length=min(3, len(outside)))))
            self.assertLess(nab_score(truth, DetectionSet(truth.n_points, tuple(picks))), 0.0)

    def test_earlier_detection_scores_higher(self):
        for _ in range(200):
            truth = generate_truth(self.fake)
            start, end = self.fake.random_element(truth.windows)
            if end == start:
                continue
            early = self.fake.random_int(start, end - 1)
            late = self.fake.random_int(early + 1, end)
            self.assertGreater(
                nab_score(truth, DetectionSet(truth.n_points, (early,))),
                nab_score(truth, DetectionSet(truth.n_points, (late,))),
            )

    def test_later_detections_in_a_window_earn_nothing(self):
        truth = GroundTruth(100, ((10, 19),))
        once = nab_score(truth, DetectionSet(100, (12,)))
        self.assertEqual(nab_score(truth, DetectionSet(100, (12, 15, 19))), once)

    def test_shift_invariance(self):
        for _ in range(100):
            truth = generate_truth(self.fake)
            offset = self.fake.random_int(1, 500)
            times = tuple(sorted(set(self.fake.random_elements(list(range(truth.n_points)), length=4))))
            shifted = DetectionSet(truth.n_points + offset, tuple(t + offset for t in times))
            self.assertAlmostEqual(
                nab_score(truth.shifted(offset), shifted),
                nab_score(truth, DetectionSet(truth.n_points, times)),
                places=9,
            )

    def test_hand_computed_raw_score(self):
        truth = GroundTruth(100, ((10, 19), (50, 59)))
        detections = DetectionSet(100, (5, 10, 64))
        expected = math.fsum(
            [
                1.0 * scaled_sigmoid((10 - 19 - 1) / 10),
                -1.0,
                -0.11,
                0.11 * scaled_sigmoid((64 - 59) / 10),
            ]
        )
        self.assertAlmostEqual(raw_nab_score(truth, detections), expected, places=12)

    def test_no_windows(self):
        truth = GroundTruth(50, ())
        self.assertEqual(nab_score(truth, DetectionSet(50, ())), 0.0)
        self.assertAlmostEqual(nab_score(truth, DetectionSet(50, (3,))), -11 / scaled_sigmoid(-1.0), places=9)

    def test_profile_bounds(self):
        with self.assertRaises(ParameterError):
            NabProfile(tp=0.0)
        with self.assertRaises(ParameterError):
            NabProfile(fp=-1.0)


class PointwiseTestCase(ForecastADTestCase):
    def test_confusion_counts(self):
        truth = GroundTruth(10, ((2, 4),))
        flags = np.zeros(10, dtype=bool)
        flags[3:6] = True
        counts = pointwise_confusion(truth, flags)
        self.assertEqual((counts.tp, counts.fp, counts.fn, counts.tn), (2, 1, 1, 6))
        self.assertAlmostEqual(counts.precision, 2 / 3)
        self.assertAlmostEqual(counts.recall, 2 / 3)
        self.assertAlmostEqual(counts.f1, 2 / 3)

    def test_nothing_flagged(self):
        counts = pointwise_confusion(GroundTruth(10, ((2, 4),)), np.zeros(10))
        self.assertEqual((counts.precision, counts.recall, counts.f1), (1.0, 0.0, 0.0))

    def test_flag_length_is_checked(self):
        with self.assertRaises(ShapeMismatchError):
            pointwise_confusion(GroundTruth(10, ()), np.zeros(9))

    def test_window_counts(self):
        truth = GroundTruth(100, ((10, 19), (50, 59), (80, 89)))
        self.assertEqual(window_counts(truth, DetectionSet(100, (0, 12, 15, 55, 70))), (2, 2, 1))


class DelayTestCase(ForecastADTestCase):
    def test_delay_in_seconds_and_ratio(self):
        truth = GroundTruth(400, ((100, 199), (300, 349)))
        summary = detection_delay(truth, DetectionSet(400, (142, 150)), step=1.0)
        self.assertEqual(summary.windows[0].delay_s, 42.0)
        self.assertAlmostEqual(summary.windows[0].ratio, 0.42)
        self.assertIsNone(summary.windows[1].delay_s)
        self.assertEqual((summary.detected, summary.missed), (1, 1))
        self.assertEqual(summary.mean_delay_s, 42.0)

    def test_step_scales_the_delay(self):
        truth = GroundTruth(400, ((100, 199),))
        self.assertEqual(detection_delay(truth, DetectionSet(400, (142,)), step=2.0).mean_delay_s, 84.0)

    def test_no_detections(self):
        summary = detection_delay(GroundTruth(10, ((2, 4),)), DetectionSet(10, ()))
        self.assertTrue(summary.no_detections)
        self.assertIsNone(summary.mean_delay_s)
        self.assertIsNone(summary.mean_ratio)


class DetectionSetTestCase(ForecastADTestCase):
    def test_rising_edges(self):
        flags = [0, 1, 1, 0, 1, 0, 0, 1]
        self.assertEqual(DetectionSet.from_flags(flags).times, (1, 4, 7))

    def test_event_running_into_a_window_is_credited(self):
        truth = GroundTruth(20, ((5, 9),))
        flags = np.zeros(20, dtype=bool)
        flags[3:7] = True
        detections = DetectionSet.from_flags(flags, truth)
        self.assertEqual(detections.times, (3, 5))
        self.assertEqual(window_counts(truth, detections), (1, 1, 0))

    def test_times_must_increase(self):
        with self.assertRaises(ParameterError):
            DetectionSet(10, (4, 4))
        with self.assertRaises(ParameterError):
            DetectionSet(10, (10,))

    def test_truth_windows_must_be_disjoint(self):
        with self.assertRaises(ParameterError):
            GroundTruth(20, ((2, 6), (6, 9)))

    def test_truth_from_frame_keeps_targets(self):
        frame = generate_frame(60, 2, attacks=[(30, 39, ('P101',)), (5, 9, ('LIT101', 'MV101'))])
        truth = GroundTruth.from_frame(frame)
        self.assertEqual(truth.windows, ((5, 9), (30, 39)))
        self.assertEqual(truth.targets, (('LIT101', 'MV101'), ('P101',)))

    def test_truth_from_labels(self):
        truth = GroundTruth.from_flags([0, 1, 1, 0, 0, 1])
        self.assertEqual(truth.windows, ((1, 2), (5, 5)))


class PathologyTestCase(ForecastADTestCase):
    """One long attack caught, ten short ones missed: pointwise F1 looks good, window recall does not."""

    def setUp(self):
        windows = [(PATHOLOGY_GAP, PATHOLOGY_GAP + PATHOLOGY_LONG - 1)]
        t = windows[0][1] + 1 + PATHOLOGY_GAP
        for _ in range(PATHOLOGY_SHORT_COUNT):
            windows.append((t, t + PATHOLOGY_SHORT - 1))
            t += PATHOLOGY_SHORT + PATHOLOGY_GAP
        self.truth = GroundTruth(t, tuple(windows))
        self.flags = np.zeros(t, dtype=bool)
        self.flags[windows[0][0] : windows[0][1] + 1] = True

    def test_coverage_and_window_recall_diverge(self):
        report = score(self.truth, self.flags)
        self.assertAlmostEqual(report.coverage, PATHOLOGY_COVERAGE)
        self.assertAlmostEqual(report.coverage, 6 / 7)
        self.assertEqual(report.precision, 1.0)
        self.assertAlmostEqual(report.f1, 12 / 13)
        self.assertEqual((report.tp, report.fp, report.fn), (1, 0, 10))
        self.assertAlmostEqual(report.window_recall, 1 / 11)
        self.assertLess(report.nab, 20.0)

    def test_report_files(self):
        report = score(self.truth, self.flags, step=1.0)
        table = attack_table(self.truth, self.flags, report, [(600, 4199, ('LIT101', 'FIT101'))])
        tmp = self.make_tmpdir()
        paths = write_score_report(tmp, report, table)
        self.assertEqual([p.name for p in paths], ['score.yaml', 'score.csv', 'attacks_table.csv'])

        with open(paths[0], encoding='utf-8') as f:
            document = yaml.safe_load(f)
        self.assertEqual(document['tp'], 1)
        self.assertEqual(document['pointwise']['fn'], PATHOLOGY_SHORT * PATHOLOGY_SHORT_COUNT)
        self.assertEqual(document['profile'], {'tp': 1.0, 'fp': 0.11, 'fn': 1.0})
        self.assertEqual(len(document['delays']), 11)
        self.assertEqual(document['mean_delay_s'], 0.0)

        row = pd.read_csv(paths[1]).iloc[0]
        self.assertAlmostEqual(row['f1'], 12 / 13, places=8)

        attacks = pd.read_csv(paths[2], keep_default_na=False)
        self.assertEqual(len(attacks), 11)
        self.assertEqual(attacks['detected_tags'].iloc[0], 'LIT101 FIT101')
        self.assertEqual(attacks['pointwise_recall'].iloc[0], 1.0)
        self.assertEqual(attacks['pointwise_recall'].iloc[1], 0.0)
