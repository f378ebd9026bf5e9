import json

from django.test import override_settings

from forecastad.conf import RunConfig, apply_overrides, get_setting, load_run_config, parse_override
from forecastad.exceptions import ConfigError
from forecastad.nn.layers import LayerKind
from .base import ForecastADTestCase


class RunConfigTestCase(ForecastADTestCase):
    def setUp(self):
        self.tmp = self.make_tmpdir()

    def test_defaults(self):
        config = RunConfig.from_dict({})
        self.assertEqual(config.seed, 0)
        self.assertEqual(config.window.spec.serialize(), {'input_len': 50, 'horizon': 10, 'forecast_len': 4})
        self.assertEqual(config.detector.power, 6.0)
        self.assertEqual(config.metrics.profile().serialize(), {'tp': 1.0, 'fp': 0.11, 'fn': 1.0})
        self.assertEqual([layer.units for layer in config.model.hidden_layers()], [64, 64])

    def test_unknown_keys_are_named(self):
        for data, key in (
            ({'windows': {}}, 'windows'),
            ({'window': {'stride': 2}}, 'window.stride'),
            ({'dataset': {'schema': {'separator': ';'}}}, 'dataset.schema.separator'),
        ):
            with self.subTest(key=key):
                with self.assertRaises(ConfigError) as cm:
                    RunConfig.from_dict(data)
                self.assertEqual(cm.exception.key, key)

    def test_invalid_values_are_named(self):
        for data, key in (
            ({'window': {'input_len': 0}}, 'window.input_len'),
            ({'detector': {'half_life': 'weekly'}}, 'detector.half_life'),
            ({'detector': {'power': 0.5}}, 'detector.power'),
            ({'search': {'parent_count': 1}}, 'search.parent_count'),
            ({'train': {'optimizer': {'name': 'rmsprop'}}}, 'train.optimizer'),
            ({'model': {'output_activation': 'swish'}}, 'model.output_activation'),
            ({'model': {'genome': 'best_genome.yaml'}}, 'model.template'),
            ({'metrics': {'nab': {'fp': -1}}}, 'metrics.nab'),
            ({'seed': -3}, 'seed'),
        ):
            with self.subTest(key=key):
                with self.assertRaises(ConfigError) as cm:
                    RunConfig.from_dict(data)
                self.assertEqual(cm.exception.key, key)

    def test_half_life(self):
        spec = RunConfig.from_dict({'window': {'forecast_len': 7}}).window.spec
        self.assertEqual(RunConfig.from_dict({}).detector.error_config(spec).half_life, 7)
        off = RunConfig.from_dict({'detector': {'half_life': None}})
        self.assertIsNone(off.detector.error_config(spec).half_life)
        fixed = RunConfig.from_dict({'detector': {'half_life': 12}})
        self.assertEqual(fixed.detector.error_config(spec).half_life, 12)

    def test_decoder_is_appended(self):
        config = RunConfig.from_dict({'model': {'layers': [{'kind': 'dropout', 'size': 0.2}]}})
        layers = config.model.layer_configs((4, 3))
        self.assertEqual([layer.kind for layer in layers], [LayerKind.DROPOUT, LayerKind.DENSE])
        self.assertEqual(layers[-1].units, 12)

    def test_require(self):
        config = RunConfig.from_dict({'dataset': {'test': str(self.tmp / 'missing.csv')}})
        with self.assertRaises(ConfigError) as cm:
            config.require('dataset.train')
        self.assertEqual(cm.exception.key, 'dataset.train')
        with self.assertRaises(ConfigError) as cm:
            config.require('dataset.test')
        self.assertIn('missing.csv', str(cm.exception))

    def test_synth_errors_carry_the_dotted_key(self):
        config = RunConfig.from_dict({'dataset': {'synth': {'n_points': 100, 'tags': []}}})
        with self.assertRaises(ConfigError) as cm:
            config.dataset.synth_config()
        self.assertEqual(cm.exception.key, 'dataset.synth.tags')

    @override_settings(FORECASTAD={'DEFAULT_TOP_K': 4, 'N_JOBS': 3})
    def test_process_settings(self):
        config = RunConfig.from_dict({})
        self.assertEqual(config.detector.resolved_top_k, 4)
        self.assertEqual(config.search.evolution_config(0).n_jobs, 3)
        self.assertEqual(get_setting('FLOAT_FORMAT'), '%.10g')
        self.assertEqual(RunConfig.from_dict({'detector': {'top_k': 1}}).detector.resolved_top_k, 1)


class OverrideTestCase(ForecastADTestCase):
    def test_values_are_yaml_scalars(self):
        self.assertEqual(parse_override('window.horizon=0'), (['window', 'horizon'], 0))
        self.assertEqual(parse_override('detector.half_life=null'), (['detector', 'half_life'], None))
        self.assertEqual(parse_override('output_dir=runs/a'), (['output_dir'], 'runs/a'))
        self.assertEqual(parse_override('train.optimizer.params.learning_rate=0.001')[1], 0.001)

    def test_malformed_override(self):
        with self.assertRaises(ConfigError):
            parse_override('window.horizon')

    def test_nested_override_creates_sections(self):
        data = apply_overrides({'seed': 1}, ['window.horizon=2', 'seed=9'])
        self.assertEqual(data, {'seed': 9, 'window': {'horizon': 2}})

    def test_override_through_a_scalar(self):
        with self.assertRaises(ConfigError):
            apply_overrides({'seed': 1}, ['seed.value=2'])


class LoadRunConfigTestCase(ForecastADTestCase):
    def setUp(self):
        self.tmp = self.make_tmpdir()

    def test_yaml_file_with_overrides(self):
        path = self.write_text(self.tmp, 'run.yaml', 'seed: 3\nwindow:\n  input_len: 20\n  horizon: 5\n')
        config = load_run_config(path, ['window.horizon=0'], seed=11, output_dir=str(self.tmp / 'out'))
        self.assertEqual((config.seed, config.window.input_len, config.window.horizon), (11, 20, 0))
        self.assertEqual(config.output_path, self.tmp / 'out')

    def test_manifest_is_accepted_as_config(self):
        original = RunConfig.from_dict({'seed': 5, 'window': {'input_len': 12}})
        manifest = {'command': 'train', 'toolkit_version': '1.0.0', 'config': original.serialize(), 'outputs': {}}
        path = self.write_text(self.tmp, 'manifest.json', json.dumps(manifest))
        self.assertEqual(load_run_config(path), original)

    def test_missing_config_file(self):
        with self.assertRaises(ConfigError) as cm:
            load_run_config(self.tmp / 'nope.yaml')
        self.assertEqual(cm.exception.key, '--config')

    def test_invalid_yaml(self):
        path = self.write_text(self.tmp, 'bad.yaml', 'window: [unclosed\n')
        with self.assertRaises(ConfigError):
            load_run_config(path)

    def test_document_must_be_a_mapping(self):
        path = self.write_text(self.tmp, 'list.yaml', '- 1\n- 2\n')
        with self.assertRaises(ConfigError):
            load_run_config(path)
