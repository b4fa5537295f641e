# differentiation/management/commands/evaluate.py
from ...dataio import load_model
from ...exceptions import ConfigError
from ...experiments import evaluate
from ...models import ExperimentRun
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'AUC сохранённой модели на размеченных наборах Public/Private и их среднее'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--model', help='Файл модели (model.json)')
        parser.add_argument('--public', help='Манифест набора Public')
        parser.add_argument('--private', help='Манифест набора Private')
        parser.add_argument('--fs', type=float, help='Частота дискретизации, Гц')

    def run(self):
        model_path = self.resolve(self.value('model', 'model.json'))
        public, private = self.value('public'), self.value('private')
        if not public and not private:
            raise ConfigError('Нужен хотя бы один набор: --public или --private')
        rows = evaluate(
            model_path,
            public=self.resolve(public) if public else None,
            private=self.resolve(private) if private else None,
            fs=self.value('fs'),
        )
        artifact = load_model(model_path)
        for row in rows:
            row.update({
                'feature_set': artifact.feature_descriptor['feature_set'],
                'model': artifact.algorithm,
                'fingerprint': artifact.fingerprint,
                'artifact': str(model_path),
            })
            self.stdout.write(f"{row['split']:<8} AUC {row['auc']:.4f} (n={row['n']})")
        ExperimentRun.objects.record_rows(rows, output_dir=str(model_path.parent))
        self.success(f'Оценка завершена: {len(rows)} строк')
