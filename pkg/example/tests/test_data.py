import numpy as np

from forecastad.data.frame import (
    AttackInterval,
    CsvSchema,
    TimeSeriesFrame,
    load_attacks,
    load_csv,
    resample_uniform,
    save_attacks,
    save_csv,
)
from forecastad.data.scaling import ScalingStats, apply_scaler, fit_scaler
from forecastad.data.synth import SynthConfig, default_config, synth_generate
from forecastad.data.windows import WindowDataset, WindowSpec, make_windows
from forecastad.exceptions import (
    CsvParseError,
    CsvReadError,
    FrameInvariantError,
    InsufficientDataError,
    ParameterError,
    SchemaError,
    SeriesTooShortError,
    SynthConfigError,
)
from .base import ForecastADTestCase
from .constants import LABELLED_CSV, SMALL_CSV
from .generator import generate_frame


class LoadCsvTestCase(ForecastADTestCase):
    def setUp(self):
        self.tmp = self.make_tmpdir()

    def test_without_label_column(self):
        frame = load_csv(self.write_text(self.tmp, 'small.csv', SMALL_CSV))
        self.assertEqual((frame.n_points, frame.n_tags), (3, 2))
        self.assertEqual(frame.tag_names, ('FIT101', 'LIT101'))
        self.assertIsNone(frame.labels)
        self.assertEqual(frame.step, 1.0)

    def test_attack_label_spelling_is_normalised(self):
        frame = load_csv(self.write_text(self.tmp, 'labelled.csv', LABELLED_CSV))
        self.assertArrayAlmostEqual(frame.labels, [0, 1, 1, 0])
        self.assertEqual([(i.start, i.end) for i in frame.attack_intervals], [(1, 2)])

    def test_missing_column(self):
        path = self.write_text(self.tmp, 'small.csv', SMALL_CSV)
        with self.assertRaises(SchemaError) as cm:
            load_csv(path, CsvSchema(tag_columns=('FIT101', 'AIT201')))
        self.assertEqual(cm.exception.missing_columns, ['AIT201'])

    def test_non_numeric_cell_names_the_row(self):
        path = self.write_text(self.tmp, 'bad.csv', SMALL_CSV.replace('1.6', 'n/a'))
        with self.assertRaises(CsvParseError) as cm:
            load_csv(path)
        self.assertEqual((cm.exception.column, cm.exception.row), ('FIT101', 1))

    def test_latin1_file_is_a_read_error(self):
        path = self.tmp / 'latin1.csv'
        path.write_bytes('Timestamp,D\u00e9bit\n0,1.0\n1,2.0\n'.encode('latin-1'))
        with self.assertRaises(CsvReadError) as cm:
            load_csv(path)
        self.assertIn('latin1.csv', str(cm.exception))
        self.assertIn('UTF-8', str(cm.exception))

    def test_ragged_rows_are_a_read_error(self):
        path = self.write_text(self.tmp, 'ragged.csv', 'Timestamp,FIT101\n0,1.0\n1,2.0,3.0,4.0\n')
        with self.assertRaises(CsvReadError) as cm:
            load_csv(path)
        self.assertIn('ragged.csv', str(cm.exception))

    def test_empty_file_is_a_read_error(self):
        path = self.write_text(self.tmp, 'empty.csv', '')
        with self.assertRaises(CsvReadError) as cm:
            load_csv(path)
        self.assertIn('empty', str(cm.exception))

    def test_single_row(self):
        path = self.write_text(self.tmp, 'one.csv', 'Timestamp,FIT101\n0,1.0\n')
        with self.assertRaises(InsufficientDataError):
            load_csv(path)

    def test_save_and_load_keep_labels(self):
        frame = load_csv(self.write_text(self.tmp, 'labelled.csv', LABELLED_CSV))
        save_csv(frame, self.tmp / 'copy.csv')
        self.assertFrameEqual(load_csv(self.tmp / 'copy.csv'), frame)

    def test_attack_sidecar(self):
        intervals = (AttackInterval(3, 9, ('LIT101',)), AttackInterval(20, 25, ('MV101', 'P101')))
        save_attacks(self.tmp / 'attacks.yaml', intervals)
        self.assertEqual(load_attacks(self.tmp / 'attacks.yaml'), intervals)


class TimeSeriesFrameTestCase(ForecastADTestCase):
    def test_rejects_non_increasing_timestamps(self):
        with self.assertRaises(FrameInvariantError):
            TimeSeriesFrame([0, 2, 1], np.zeros((3, 1)), ('FIT101',))

    def test_rejects_non_finite_values(self):
        with self.assertRaises(FrameInvariantError):
            TimeSeriesFrame([0, 1], [[1.0], [np.nan]], ('FIT101',))

    def test_values_are_read_only(self):
        frame = generate_frame(20, 2)
        with self.assertRaises(ValueError):
            frame.values[0, 0] = 1.0

    def test_trim_head_reindexes_attacks(self):
        frame = generate_frame(50, 2, attacks=[(5, 9, ()), (20, 30, ('X',))])
        trimmed = frame.trim_head(8)
        self.assertEqual(trimmed.n_points, 42)
        self.assertEqual([(i.start, i.end) for i in trimmed.attack_intervals], [(0, 1), (12, 22)])


class ResampleTestCase(ForecastADTestCase):
    def test_linear_interpolation_onto_grid(self):
        frame = TimeSeriesFrame([0.0, 1.0, 3.0], [[0.0], [1.0], [3.0]], ('FIT101',))
        resampled = resample_uniform(frame, 1.0)
        self.assertArrayAlmostEqual(resampled.timestamps, [0, 1, 2, 3])
        self.assertArrayAlmostEqual(resampled.values[:, 0], [0, 1, 2, 3])
        self.assertEqual(resampled.step, 1.0)

    def test_uniform_input_is_returned_unchanged(self):
        frame = generate_frame(30, 2)
        self.assertIs(resample_uniform(frame, 1.0), frame)


class ScalingTestCase(ForecastADTestCase):
    def test_zero_mean_unit_variance(self):
        frame = generate_frame(300, 4)
        scaled = apply_scaler(frame, fit_scaler(frame))
        self.assertArrayAlmostEqual(scaled.values.mean(axis=0), np.zeros(4), atol=1e-10)
        self.assertArrayAlmostEqual(scaled.values.std(axis=0), np.ones(4), atol=1e-10)

    def test_constant_tag_gets_unit_std(self):
        frame = TimeSeriesFrame([0, 1, 2], [[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]], ('FIT101', 'MV101'))
        stats = fit_scaler(frame)
        self.assertEqual(stats.std[1], 1.0)
        self.assertArrayAlmostEqual(stats.transform(frame.values)[:, 1], [0, 0, 0])

    def test_inverse_and_persistence(self):
        frame = generate_frame(100, 3)
        stats = ScalingStats.from_dict(fit_scaler(frame).to_dict())
        self.assertArrayAlmostEqual(stats.inverse(stats.transform(frame.values)), frame.values, atol=1e-12)

    def test_stored_zero_std_is_a_parameter_error(self):
        with self.assertRaises(ParameterError) as cm:
            ScalingStats.from_dict({'mean': [0.0, 1.0], 'std': [1.0, 0.0]})
        self.assertIn('scaling std', str(cm.exception))


class WindowTestCase(ForecastADTestCase):
    def test_window_pairs_tile_the_forecast_span(self):
        spec = WindowSpec(3, 1, 2)
        pairs = make_windows(10, spec)
        self.assertEqual(len(pairs), 3)
        self.assertEqual([(p.target_range.start, p.target_range.stop) for p in pairs], [(4, 6), (6, 8), (8, 10)])
        self.assertEqual(pairs[1].input_range, range(2, 5))
        self.assertEqual(spec.forecast_span(10), (4, 10))

    def test_series_too_short(self):
        with self.assertRaises(SeriesTooShortError):
            make_windows(5, WindowSpec(3, 1, 2))

    def test_dataset_batches_are_flattened_row_major(self):
        values = np.arange(20, dtype=np.float64).reshape(10, 2)
        dataset = WindowDataset(values, WindowSpec(3, 1, 2))
        inputs, targets = dataset.batch([1])
        self.assertArrayAlmostEqual(inputs, [values[2:5].ravel()])
        self.assertArrayAlmostEqual(targets, [values[6:8].ravel()])
        self.assertEqual((dataset.input_dims, dataset.output_dims), ((3, 2), (2, 2)))

    def test_holdout_split_keeps_time_order(self):
        dataset = WindowDataset(np.zeros((50, 1)), WindowSpec(5, 0, 1))
        head, tail = dataset.split(0.2)
        self.assertEqual((len(head), len(tail)), (36, 9))
        self.assertLess(head.indices[-1], tail.indices[0])


class SynthTestCase(ForecastADTestCase):
    def test_same_seed_same_plant(self):
        config = default_config(1000)
        first, second = synth_generate(config, 5), synth_generate(config, 5)
        self.assertFrameEqual(first, second, atol=0)
        self.assertFalse(np.array_equal(first.values, synth_generate(config, 6).values))

    def test_clean_split_has_no_attacks(self):
        frame = synth_generate(default_config(1000), 1, inject=False)
        self.assertEqual(frame.attack_intervals, ())
        self.assertEqual(int(frame.labels.sum()), 0)

    def test_injections_become_labelled_intervals(self):
        config = default_config(5000)
        frame = synth_generate(config, 1)
        self.assertEqual(len(frame.attack_intervals), 6)
        first = frame.attack_intervals[0]
        self.assertEqual((first.start, first.end, first.targets), (600, 699, ('LIT101',)))
        self.assertEqual(int(frame.labels.sum()), sum(i.length for i in frame.attack_intervals))

    def test_start_up_only_changes_the_head(self):
        config = default_config(1000)
        self.assertEqual(config.startup, 80)
        plain = synth_generate(config, 3, inject=False)
        warm = synth_generate(config, 3, inject=False, startup=True)
        self.assertTrue(np.array_equal(warm.values[80:], plain.values[80:]))
        moved = ~np.isclose(warm.values[:80], plain.values[:80]).all(axis=0)
        self.assertEqual([name for name, flag in zip(config.tag_names, moved, strict=True) if not flag], ['MV101'])

    def test_start_up_must_fit_the_series(self):
        data = default_config(1000).serialize()
        data['startup'] = 1000
        with self.assertRaises(SynthConfigError) as cm:
            SynthConfig.from_dict(data)
        self.assertIn('startup', str(cm.exception))

    def test_default_tags_are_forecastable(self):
        kinds = {tag.name: tag.kind.value for tag in default_config().tags}
        self.assertEqual(kinds['MV101'], 'constant')
        self.assertEqual({kind for name, kind in kinds.items() if name != 'MV101'}, {'sine'})

    def test_overlapping_injections_name_the_key(self):
        data = default_config(1000).serialize()
        data['injections'][1]['start'] = data['injections'][0]['start'] + 1
        with self.assertRaises(SynthConfigError) as cm:
            SynthConfig.from_dict(data)
        self.assertIn('injections[1]', str(cm.exception))
