# differentiation/management/commands/train.py
from ...experiments import FEATURE_SETS, MODELS, ExperimentConfig, run_experiment, run_grid
from ...models import ExperimentRun
from ..base import PipelineCommand

# ключи --config, которые передаются в ExperimentConfig как есть
CONFIG_KEYS = (
    'bands', 'filter_order', 'stft', 'cwt', 'scalogram_time_pool', 'top_k', 'holdout_fraction',
    'cv_folds', 'grids', 'train', 'network',
)


class Command(PipelineCommand):
    help = 'Обучает модель на паре (набор признаков, модель) или на всей сетке экспериментов'

    def add_pipeline_arguments(self, parser):
        self.add_data_arguments(parser)
        parser.add_argument('--feature-set', dest='feature_set', choices=FEATURE_SETS, help='Набор признаков')
        parser.add_argument('--model', choices=MODELS, help='Модель')
        parser.add_argument('--grid', action='store_true', help='Прогнать все допустимые пары признаков и моделей')
        parser.add_argument('--epochs', type=int, help='Максимум эпох для CNN')
        parser.add_argument('--top-k', type=int, dest='top_k', help='Число признаков FNC после отбора')
        parser.add_argument('--fnc-table', dest='fnc_table', help='Кэш FNC из команды features вместо расчёта по ICN')
        parser.add_argument('--no-time-pool', action='store_true', dest='no_time_pool',
                            help='Подавать скалограммы в 3D CNN без усреднения по парам отсчётов')
        parser.add_argument('--out', help='Каталог эксперимента')

    def base_config(self) -> dict:
        manifest, synth = self.data_source()
        fnc_table = self.value('fnc_table')
        base = {key: self.file_config[key] for key in CONFIG_KEYS if key in self.file_config}
        base.update({
            'seed': self.value('seed', 0),
            'output_dir': str(self.resolve(self.value('out', 'runs'))),
            'manifest': str(manifest) if manifest else None,
            'synth': synth,
            'fs': self.value('fs'),
            'fnc_table': str(self.resolve(fnc_table)) if fnc_table else None,
        })
        if self.options.get('top_k') is not None:
            base['top_k'] = self.options['top_k']
        if self.options.get('epochs') is not None:
            base['train'] = {**base.get('train', {}), 'epochs': self.options['epochs']}
        if self.options.get('no_time_pool'):
            base['scalogram_time_pool'] = False
        return base

    def run(self):
        base = self.base_config()
        if self.options.get('grid') or self.file_config.get('grid_run'):
            report = run_grid(base)
        else:
            cfg = ExperimentConfig.from_dict({
                **base,
                'feature_set': self.value('feature_set'),
                'model': self.value('model'),
            })
            report = run_experiment(cfg)
        for row in report.rows:
            ExperimentRun.objects.record_rows([row], output_dir=str(report.output_dir))
            self.stdout.write(f"{row['feature_set']:<12} {row['model']:<6} AUC {row['auc']:.4f} (n={row['n']})")
        self.success(f'Готово: {len(report.rows)} прогонов, отчёт в {report.output_dir}')
